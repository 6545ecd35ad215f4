//! File formats: trace CSV, training-pair CSV, ranked-key CSV, curve CSV,
//! label sidecars, key lists, and the JSON profile document.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::attack::{AttackProfile, RankedKeyList, PROFILE_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::eval::TopRCurve;
use crate::lock::{parse_key_list, CombinationKey, KeySet, LockSpec};
use crate::regression::TrainingPair;
use crate::segmentation::SegmentationTrace;
use crate::signal::GyroTrace;
use crate::synth::{GroundTruth, LabelKind, TraceLabel};

/// Version stamp emitted at the top of every CSV artifact; readers skip `#`
/// comments, so stamped files stay round-trippable.
pub const CSV_SCHEMA_COMMENT: &str = "# gyrodial csv 1";

fn reader_builder() -> csv::ReaderBuilder {
    let mut b = csv::ReaderBuilder::new();
    b.comment(Some(b'#')).trim(csv::Trim::All).flexible(true);
    b
}

/// Opens a file for reading, tagging any failure with the path.
pub fn open_file<P: AsRef<Path>>(path: P) -> Result<File> {
    let path = path.as_ref();
    File::open(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

/// Creates (or truncates) a file for writing, tagging any failure with the
/// path.
pub fn create_file<P: AsRef<Path>>(path: P) -> Result<File> {
    let path = path.as_ref();
    File::create(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

fn parse_field<T: std::str::FromStr>(field: &str, row: usize, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::TraceLoad {
        row,
        msg: format!("unparseable {what}: {field:?}"),
    })
}

/// Reads a trace CSV: header `t,gx[,gy,gz]`, `#` comments permitted, sample
/// rate inferred from the timestamps.
pub fn read_trace<R: Read>(reader: R) -> Result<GyroTrace> {
    let mut csv = reader_builder().from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            msg: format!("missing header: {e}"),
        })?
        .clone();
    let cols: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
    if cols.len() < 2 || cols[0] != "t" || cols[1] != "gx" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header t,gx[,gy,gz], found {}", cols.join(",")),
        });
    }
    let has_yz = cols.len() >= 4;

    let mut t = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut z = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::TraceLoad {
            row,
            msg: e.to_string(),
        })?;
        if record.len() < 2 {
            return Err(Error::TraceLoad {
                row,
                msg: format!("expected at least 2 columns, found {}", record.len()),
            });
        }
        let ti: f64 = parse_field(&record[0], row, "timestamp")?;
        if let Some(&prev) = t.last() {
            if ti <= prev {
                return Err(Error::TraceLoad {
                    row,
                    msg: format!("timestamps not increasing: {prev} then {ti}"),
                });
            }
        }
        t.push(ti);
        x.push(parse_field(&record[1], row, "gx sample")?);
        if has_yz && record.len() >= 4 {
            y.push(parse_field(&record[2], row, "gy sample")?);
            z.push(parse_field(&record[3], row, "gz sample")?);
        }
    }
    if t.len() < 2 {
        return Err(Error::TraceLoad {
            row: t.len() + 1,
            msg: "no samples (need at least two rows)".into(),
        });
    }
    let rate = (t.len() - 1) as f64 / (t[t.len() - 1] - t[0]);
    let trace = GyroTrace {
        sample_rate_hz: rate,
        t,
        x,
        y,
        z,
    };
    trace.validate()?;
    Ok(trace)
}

pub fn load_trace<P: AsRef<Path>>(path: P) -> Result<GyroTrace> {
    read_trace(BufReader::new(open_file(path)?))
}

pub fn write_trace<W: Write>(mut w: W, trace: &GyroTrace) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA_COMMENT}")?;
    let with_yz = !trace.y.is_empty();
    if with_yz {
        writeln!(w, "t,gx,gy,gz")?;
        for i in 0..trace.len() {
            writeln!(
                w,
                "{},{},{},{}",
                trace.t[i], trace.x[i], trace.y[i], trace.z[i]
            )?;
        }
    } else {
        writeln!(w, "t,gx")?;
        for i in 0..trace.len() {
            writeln!(w, "{},{}", trace.t[i], trace.x[i])?;
        }
    }
    Ok(())
}

pub fn save_trace<P: AsRef<Path>>(path: P, trace: &GyroTrace) -> Result<()> {
    write_trace(BufWriter::new(create_file(path)?), trace)
}

/// Reads training pairs: header `phase,sign,theta,alpha`, phase 1-based in
/// the file (converted to 0-based in memory).
pub fn read_training_pairs<R: Read>(reader: R) -> Result<Vec<TrainingPair>> {
    let mut csv = reader_builder().from_reader(reader);
    let headers = csv.headers().map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    let cols: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
    if cols != ["phase", "sign", "theta", "alpha"] {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "expected header phase,sign,theta,alpha, found {}",
                cols.join(",")
            ),
        });
    }
    let mut pairs = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::TraceLoad {
            row,
            msg: e.to_string(),
        })?;
        if record.len() != 4 {
            return Err(Error::TraceLoad {
                row,
                msg: format!("expected 4 columns, found {}", record.len()),
            });
        }
        let phase: usize = parse_field(&record[0], row, "phase")?;
        if phase == 0 {
            return Err(Error::TraceLoad {
                row,
                msg: "phase numbers are 1-based".into(),
            });
        }
        pairs.push(TrainingPair {
            phase: phase - 1,
            sign: record[1].parse()?,
            theta: parse_field(&record[2], row, "theta")?,
            alpha: parse_field(&record[3], row, "alpha")?,
        });
    }
    Ok(pairs)
}

pub fn load_training_pairs<P: AsRef<Path>>(path: P) -> Result<Vec<TrainingPair>> {
    read_training_pairs(BufReader::new(open_file(path)?))
}

pub fn write_training_pairs<W: Write>(mut w: W, pairs: &[TrainingPair]) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA_COMMENT}")?;
    writeln!(w, "phase,sign,theta,alpha")?;
    for p in pairs {
        writeln!(w, "{},{},{},{}", p.phase + 1, p.sign, p.theta, p.alpha)?;
    }
    Ok(())
}

/// Writes a ranking as `rank,key,log_score`.
pub fn write_ranked<W: Write>(mut w: W, ranked: &RankedKeyList) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA_COMMENT}")?;
    writeln!(w, "rank,key,log_score")?;
    for (i, (key, score)) in ranked.entries.iter().enumerate() {
        writeln!(w, "{},{},{}", i + 1, key, score)?;
    }
    Ok(())
}

pub fn save_ranked<P: AsRef<Path>>(path: P, ranked: &RankedKeyList) -> Result<()> {
    write_ranked(BufWriter::new(create_file(path)?), ranked)
}

/// Writes a success curve as `r,success_rate,improvement_factor`.
pub fn write_curve<W: Write>(mut w: W, curve: &TopRCurve) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA_COMMENT}")?;
    writeln!(w, "r,success_rate,improvement_factor")?;
    for pt in &curve.points {
        writeln!(w, "{},{},{}", pt.r, pt.success_rate, pt.improvement_factor)?;
    }
    Ok(())
}

pub fn save_curve<P: AsRef<Path>>(path: P, curve: &TopRCurve) -> Result<()> {
    write_curve(BufWriter::new(create_file(path)?), curve)
}

/// Writes event labels as `event_start,event_end,key,kind`; confusers have
/// an empty key field.
pub fn write_labels<W: Write>(mut w: W, labels: &[TraceLabel]) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA_COMMENT}")?;
    writeln!(w, "event_start,event_end,key,kind")?;
    for l in labels {
        let key = l.key.as_ref().map(|k| k.to_string()).unwrap_or_default();
        let kind = match l.kind {
            LabelKind::Unlock => "unlock",
            LabelKind::Confuser => "confuser",
        };
        writeln!(w, "{},{},{},{}", l.start_t, l.end_t, key, kind)?;
    }
    Ok(())
}

pub fn save_labels<P: AsRef<Path>>(path: P, labels: &[TraceLabel]) -> Result<()> {
    write_labels(BufWriter::new(create_file(path)?), labels)
}

pub fn read_labels<R: Read>(reader: R) -> Result<Vec<TraceLabel>> {
    let mut csv = reader_builder().from_reader(reader);
    let mut labels = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::TraceLoad {
            row,
            msg: e.to_string(),
        })?;
        if record.len() < 4 {
            return Err(Error::TraceLoad {
                row,
                msg: format!("expected 4 columns, found {}", record.len()),
            });
        }
        let kind = match record[3].trim() {
            "unlock" => LabelKind::Unlock,
            "confuser" => LabelKind::Confuser,
            other => {
                return Err(Error::TraceLoad {
                    row,
                    msg: format!("unknown label kind {other:?}"),
                })
            }
        };
        let key = if record[2].trim().is_empty() {
            None
        } else {
            Some(record[2].parse::<CombinationKey>()?)
        };
        labels.push(TraceLabel {
            start_t: parse_field(&record[0], row, "event start")?,
            end_t: parse_field(&record[1], row, "event end")?,
            kind,
            key,
        });
    }
    Ok(labels)
}

pub fn load_labels<P: AsRef<Path>>(path: P) -> Result<Vec<TraceLabel>> {
    read_labels(BufReader::new(open_file(path)?))
}

/// Persists a profile as versioned JSON.
pub fn write_profile<W: Write>(w: W, profile: &AttackProfile) -> Result<()> {
    profile.validate()?;
    serde_json::to_writer_pretty(w, profile)?;
    Ok(())
}

pub fn save_profile<P: AsRef<Path>>(path: P, profile: &AttackProfile) -> Result<()> {
    write_profile(BufWriter::new(create_file(path)?), profile)
}

/// Loads a profile document, refusing schema versions this build does not
/// understand.
pub fn read_profile<R: Read>(reader: R) -> Result<AttackProfile> {
    let profile: AttackProfile = serde_json::from_reader(reader)?;
    if profile.schema_version != PROFILE_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: profile.schema_version,
            expected: PROFILE_SCHEMA_VERSION,
        });
    }
    profile.validate()?;
    Ok(profile)
}

pub fn load_profile<P: AsRef<Path>>(path: P) -> Result<AttackProfile> {
    read_profile(BufReader::new(open_file(path)?))
}

/// Loads a key list file: one key per line, `#` comments.
pub fn load_key_list<P: AsRef<Path>>(path: P, spec: &LockSpec) -> Result<KeySet> {
    let mut text = String::new();
    open_file(path)?.read_to_string(&mut text)?;
    parse_key_list(&text, spec)
}

pub fn write_key_list<W: Write>(mut w: W, keys: &[CombinationKey]) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA_COMMENT}")?;
    for k in keys {
        writeln!(w, "{k}")?;
    }
    Ok(())
}

/// Persists a lock description as JSON, for the custom-lock selector.
pub fn save_lock_spec<P: AsRef<Path>>(path: P, spec: &LockSpec) -> Result<()> {
    spec.validate()?;
    serde_json::to_writer_pretty(BufWriter::new(create_file(path)?), spec)?;
    Ok(())
}

pub fn load_lock_spec<P: AsRef<Path>>(path: P) -> Result<LockSpec> {
    let spec: LockSpec = serde_json::from_reader(BufReader::new(open_file(path)?))?;
    spec.validate()?;
    Ok(spec)
}

/// Persists generator ground truth as JSON next to a synthesized trace.
pub fn save_ground_truth<P: AsRef<Path>>(path: P, truth: &GroundTruth) -> Result<()> {
    serde_json::to_writer_pretty(BufWriter::new(create_file(path)?), truth)?;
    Ok(())
}

/// Reads numeric columns from a CSV; a non-numeric first row is treated as a
/// header and skipped.
pub fn read_columns<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut csv = reader_builder().has_headers(false).from_reader(reader);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::TraceLoad {
            row,
            msg: e.to_string(),
        })?;
        let fields: Vec<&str> = record.iter().filter(|f| !f.trim().is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Err(_) if row == 1 => continue, // header
            Err(_) => {
                return Err(Error::TraceLoad {
                    row,
                    msg: format!("non-numeric value in {fields:?}"),
                })
            }
            Ok(values) => {
                if cols.is_empty() {
                    cols = vec![Vec::new(); values.len()];
                } else if values.len() != cols.len() {
                    return Err(Error::TraceLoad {
                        row,
                        msg: format!("expected {} columns, found {}", cols.len(), values.len()),
                    });
                }
                for (c, v) in values.into_iter().enumerate() {
                    cols[c].push(v);
                }
            }
        }
    }
    if cols.is_empty() || cols[0].is_empty() {
        return Err(Error::InvalidArgument("no numeric rows found".into()));
    }
    Ok(cols)
}

pub fn load_columns<P: AsRef<Path>>(path: P) -> Result<Vec<Vec<f64>>> {
    read_columns(BufReader::new(open_file(path)?))
}

/// Debug dump of the segmentation transform: `index,transformed,smoothed,peak`.
pub fn write_segmentation_debug<W: Write>(mut w: W, debug: &SegmentationTrace) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA_COMMENT}")?;
    writeln!(w, "index,transformed,smoothed,peak")?;
    for i in 0..debug.transformed.len() {
        let peak = debug.peaks.contains(&i) as u8;
        writeln!(
            w,
            "{},{},{},{}",
            i, debug.transformed[i], debug.smoothed[i], peak
        )?;
    }
    Ok(())
}

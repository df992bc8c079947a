//! File formats: WAV audio, manifest, feature and history CSVs.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::compress::{FeatureVector, N_FEATURES};
use crate::dsp::{Class, PcgSignal};
use crate::error::{invalid, Error, Result};
use crate::train::{HistoryRecord, Sample, TrainHistory};

pub const MANIFEST_HEADER: [&str; 2] = ["path", "label"];
pub const FEATURE_HEADER: [&str; 9] = ["f0", "f1", "f2", "f3", "f4", "f5", "f6", "f7", "label"];
pub const HISTORY_HEADER: [&str; 3] = ["iter", "loss", "train_acc"];

/// Reads a mono WAV (16-bit integer or 32-bit float) scaled to `[-1, 1]`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<PcgSignal> {
    read_wav_from(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn read_wav_from<R: Read>(reader: R) -> Result<PcgSignal> {
    let mut wav = hound::WavReader::new(reader)?;
    let spec = wav.spec();
    if spec.channels != 1 {
        return invalid(format!("expected mono audio, file has {} channels", spec.channels));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => wav
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()?,
        (hound::SampleFormat::Float, 32) => wav
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        (fmt, bits) => {
            return Err(Error::Unsupported(format!("{bits}-bit {fmt:?} WAV (need 16-bit int or 32-bit float)")));
        }
    };
    PcgSignal::new(samples, spec.sample_rate)
}

/// Writes mono 16-bit PCM, clamping to full scale.
pub fn write_wav(path: impl AsRef<Path>, signal: &PcgSignal) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &s in signal.samples() {
        w.write_sample((s * 32768.0).round().clamp(-32768.0, 32767.0) as i16)?;
    }
    w.finalize()?;
    Ok(())
}

/// Float text with at least 9 significant digits that parses back exactly.
pub fn fmt_float(v: f64) -> String {
    let short = format!("{:.8e}", v);
    if short.parse::<f64>().ok() == Some(v) {
        short
    } else {
        format!("{v:e}")
    }
}

fn check_header(rdr: &mut csv::Reader<impl Read>, want: &[&str]) -> Result<()> {
    let got = rdr.headers()?;
    if got.iter().map(str::trim).ne(want.iter().copied()) {
        return invalid(format!("bad header {:?}, expected {}", got, want.join(",")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Class,
}

/// Parses `path,label` rows. Relative paths resolve against `base`.
pub fn read_manifest_from<R: Read>(reader: R, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &MANIFEST_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            if rec.len() != 2 {
                return invalid(format!("manifest row has {} fields", rec.len()));
            }
            let p = Path::new(rec[0].trim());
            Ok(ManifestEntry {
                path: if p.is_absolute() { p.to_path_buf() } else { base.join(p) },
                label: rec[1].parse()?,
            })
        })
        .collect()
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    read_manifest_from(std::fs::File::open(path)?, base)
}

/// Writes entries with paths as given (no rebasing).
pub fn write_manifest_to<W: Write>(writer: W, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MANIFEST_HEADER)?;
    for e in entries {
        w.write_record([e.path.to_string_lossy().as_ref(), e.label.tag()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_features_to<W: Write>(writer: W, rows: &[Sample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FEATURE_HEADER)?;
    for r in rows {
        let mut rec: Vec<String> = r.features.values().iter().map(|&v| fmt_float(v)).collect();
        rec.push(r.label.tag().to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features_from<R: Read>(reader: R) -> Result<Vec<Sample>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &FEATURE_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            if rec.len() != N_FEATURES + 1 {
                return invalid(format!("feature row has {} fields", rec.len()));
            }
            let vals = (0..N_FEATURES)
                .map(|i| {
                    rec[i]
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("feature {:?}: {e}", &rec[i])))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Sample {
                features: FeatureVector::new(&vals)?,
                label: rec[N_FEATURES].parse()?,
            })
        })
        .collect()
}

pub fn write_features(path: impl AsRef<Path>, rows: &[Sample]) -> Result<()> {
    write_features_to(std::fs::File::create(path)?, rows)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    read_features_from(std::fs::File::open(path)?)
}

pub fn write_history_to<W: Write>(writer: W, history: &TrainHistory) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HISTORY_HEADER)?;
    for r in &history.records {
        w.write_record([r.iter.to_string(), fmt_float(r.loss), fmt_float(r.train_acc)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history_from<R: Read>(reader: R) -> Result<TrainHistory> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &HISTORY_HEADER)?;
    let mut records = Vec::new();
    for rec in rdr.deserialize::<HistoryRecord>() {
        let r = rec?;
        if !r.loss.is_finite() || !r.train_acc.is_finite() {
            return invalid(format!("non-finite value at iteration {}", r.iter));
        }
        if records.last().is_some_and(|p: &HistoryRecord| p.iter >= r.iter) {
            return invalid(format!("iteration {} is not increasing", r.iter));
        }
        records.push(r);
    }
    Ok(TrainHistory { records })
}

pub fn write_history(path: impl AsRef<Path>, history: &TrainHistory) -> Result<()> {
    write_history_to(std::fs::File::create(path)?, history)
}

pub fn read_history(path: impl AsRef<Path>) -> Result<TrainHistory> {
    read_history_from(std::fs::File::open(path)?)
}

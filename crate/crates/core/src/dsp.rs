//! PCG signal handling: resampling, Shannon-energy envelope, cardiac-cycle
//! segmentation and a synthetic S3/murmur generator.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Rate every signal is brought to before segmentation.
pub const SEGMENT_RATE: u32 = 4000;
pub const MIN_SEGMENT_S: f64 = 0.2;
pub const MAX_SEGMENT_S: f64 = 2.5;
pub const ENVELOPE_WINDOW_S: f64 = 0.02;
pub const PEAK_THRESHOLD: f64 = 0.3;
pub const MIN_CYCLE_S: f64 = 0.5;

const RESAMPLE_TAPS: usize = 64;
/// Anti-alias cutoff as a fraction of the target Nyquist frequency.
const RESAMPLE_CUTOFF: f64 = 0.45;

/// Abnormality class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    S3,
    Murmur,
}

impl Class {
    pub const ALL: [Class; 2] = [Class::S3, Class::Murmur];

    /// Label used in CSV files and the model document.
    pub fn tag(self) -> &'static str {
        match self {
            Class::S3 => "S3",
            Class::Murmur => "MURMUR",
        }
    }

    /// Regression target for the readout: S3 is +1, murmur -1.
    pub fn target(self) -> f64 {
        match self {
            Class::S3 => 1.0,
            Class::Murmur => -1.0,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S3" => Ok(Class::S3),
            "MURMUR" => Ok(Class::Murmur),
            other => invalid(format!("unknown label {other:?} (expected S3 or MURMUR)")),
        }
    }
}

/// Mono audio at a fixed rate.
#[derive(Clone, Debug, PartialEq)]
pub struct PcgSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl PcgSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return invalid("empty signal");
        }
        if sample_rate == 0 {
            return invalid("sample rate must be positive");
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return invalid("signal contains non-finite samples");
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Peak-normalized copy (max |sample| == 1). Silence is returned as is.
    pub fn normalized(&self) -> Self {
        let peak = self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if peak == 0.0 {
            return self.clone();
        }
        Self {
            samples: self.samples.iter().map(|s| s / peak).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// One cardiac cycle cut from a longer recording.
#[derive(Clone, Debug, PartialEq)]
pub struct PcgSegment {
    samples: Vec<f64>,
    sample_rate: u32,
    source_start: usize,
    label: Option<Class>,
}

impl PcgSegment {
    /// Fails unless the duration lies within the cardiac-cycle bounds.
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_start: usize, label: Option<Class>) -> Result<Self> {
        let sig = PcgSignal::new(samples, sample_rate)?;
        let d = sig.duration_s();
        if !(MIN_SEGMENT_S..=MAX_SEGMENT_S).contains(&d) {
            return invalid(format!(
                "segment of {d:.3} s outside {MIN_SEGMENT_S}..{MAX_SEGMENT_S} s"
            ));
        }
        Ok(Self {
            samples: sig.samples,
            sample_rate,
            source_start,
            label,
        })
    }

    /// Wraps arbitrary audio without the duration gate. Used by the
    /// time-frequency front-ends, which only need non-empty input.
    pub fn unchecked(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let sig = PcgSignal::new(samples, sample_rate)?;
        Ok(Self {
            samples: sig.samples,
            sample_rate,
            source_start: 0,
            label: None,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_start(&self) -> usize {
        self.source_start
    }

    pub fn label(&self) -> Option<Class> {
        self.label
    }

    pub fn with_label(mut self, label: Class) -> Self {
        self.label = Some(label);
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Blackman-windowed sinc low-pass, unit DC gain. `cutoff` is in cycles per
/// sample. Tap `j` sits at offset `j - (taps - 1) / 2`.
fn lowpass_taps(cutoff: f64, taps: usize) -> Vec<f64> {
    let mid = (taps - 1) as f64 / 2.0;
    let m = (taps - 1) as f64;
    let mut h: Vec<f64> = (0..taps)
        .map(|j| {
            let x = j as f64;
            let w = 0.42 - 0.5 * (2.0 * PI * x / m).cos() + 0.08 * (4.0 * PI * x / m).cos();
            2.0 * cutoff * sinc(2.0 * cutoff * (x - mid)) * w
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

/// Changes the sample rate. Downsampling low-pass filters below the new
/// Nyquist first; values between input samples are linearly interpolated.
pub fn resample(signal: &PcgSignal, target_rate: u32) -> Result<PcgSignal> {
    if target_rate == 0 {
        return invalid("target rate must be positive");
    }
    let src = signal.sample_rate;
    if target_rate == src {
        return Ok(signal.clone());
    }
    let x = &signal.samples;
    let n_in = x.len();
    let last = n_in as isize - 1;
    let at = |i: isize| x[i.clamp(0, last) as usize];

    // `offset` is the time (in input samples) that filtered[0] represents.
    let (filtered, offset) = if target_rate < src {
        let h = lowpass_taps(RESAMPLE_CUTOFF * (target_rate as f64 / 2.0) / src as f64, RESAMPLE_TAPS);
        let half = (RESAMPLE_TAPS / 2) as isize;
        let y: Vec<f64> = (0..n_in as isize)
            .map(|n| {
                h.iter()
                    .enumerate()
                    .map(|(j, hj)| hj * at(n + j as isize - half))
                    .sum()
            })
            .collect();
        (y, -0.5)
    } else {
        (x.clone(), 0.0)
    };

    let step = src as f64 / target_rate as f64;
    let n_out = ((n_in as f64 / step).round() as usize).max(1);
    let top = (filtered.len() - 1) as f64;
    let out = (0..n_out)
        .map(|m| {
            let pos = (m as f64 * step - offset).clamp(0.0, top);
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            if i + 1 < filtered.len() {
                filtered[i] * (1.0 - frac) + filtered[i + 1] * frac
            } else {
                filtered[i]
            }
        })
        .collect();
    PcgSignal::new(out, target_rate)
}

/// Smoothed Shannon energy, scaled to peak at 1.
///
/// Smoothing is Gaussian with `±σ` spanning `window_s`.
/// Samples are scaled so the loudest one sits at `|x| = e^{-1/2}`, where
/// `-x² ln x²` is largest; the energy is then monotone in amplitude.
pub fn envelope(signal: &PcgSignal, window_s: f64) -> Result<Vec<f64>> {
    if !(window_s > 0.0) {
        return invalid(format!("envelope window must be positive, got {window_s}"));
    }
    let x = &signal.samples;
    let peak = x.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    let scale = 1.0 / (peak * E.sqrt());
    let energy: Vec<f64> = x
        .iter()
        .map(|s| {
            let p = (s * scale).powi(2);
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        })
        .collect();

    let sigma = window_s / 2.0 * signal.sample_rate as f64;
    let reach = (3.0 * sigma).ceil() as usize;
    let kernel: Vec<f64> = (0..=2 * reach)
        .map(|i| {
            let t = (i as f64 - reach as f64) / sigma.max(f64::MIN_POSITIVE);
            (-0.5 * t * t).exp()
        })
        .collect();
    let ksum: f64 = kernel.iter().sum();
    let n = energy.len();
    let mut smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(reach);
            let hi = (i + reach).min(n - 1);
            (lo..=hi)
                .map(|j| energy[j] * kernel[j + reach - i])
                .sum::<f64>()
                / ksum
        })
        .collect();
    let top = smooth.iter().cloned().fold(0.0, f64::max);
    if top > 0.0 {
        smooth.iter_mut().for_each(|v| *v /= top);
    }
    Ok(smooth)
}

/// Strict local maxima (flat tops resolved to their middle), edges excluded.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < x.len() {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < x.len() && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < x.len() && x[j + 1] < x[i] {
                peaks.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Envelope peaks at or above `threshold · max`, keeping the taller of any two
/// closer than `min_distance` samples.
pub fn pick_peaks(env: &[f64], threshold: f64, min_distance: usize) -> Vec<usize> {
    let top = env.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return Vec::new();
    }
    let mut cands: Vec<usize> = local_maxima(env)
        .into_iter()
        .filter(|&i| env[i] >= threshold * top)
        .collect();
    cands.sort_by(|&a, &b| env[b].total_cmp(&env[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for c in cands {
        if kept.iter().all(|&k| k.abs_diff(c) >= min_distance) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

/// Heart-sound peak positions in samples.
pub fn detect_peaks(signal: &PcgSignal, min_cycle_s: f64) -> Result<Vec<usize>> {
    if !(min_cycle_s > 0.0) {
        return invalid("minimum cycle length must be positive");
    }
    let env = envelope(signal, ENVELOPE_WINDOW_S)?;
    let min_distance = (min_cycle_s * signal.sample_rate as f64).round() as usize;
    Ok(pick_peaks(&env, PEAK_THRESHOLD, min_distance))
}

/// `[start, end)` ranges splitting `len` samples at the midpoints between
/// consecutive peaks. The ranges tile `0..len`.
pub fn cycle_bounds(len: usize, peaks: &[usize]) -> Result<Vec<(usize, usize)>> {
    if peaks.len() < 2 {
        return Err(Error::SegmentationFailed(format!(
            "found {} heart-sound peak(s), need at least 2",
            peaks.len()
        )));
    }
    let mut edges = vec![0];
    edges.extend(peaks.windows(2).map(|w| (w[0] + w[1]) / 2));
    edges.push(len);
    Ok(edges.windows(2).map(|w| (w[0], w[1])).collect())
}

/// Cuts `signal` at the given peaks, dropping implausibly short or long cycles.
pub fn segments_from_peaks(signal: &PcgSignal, peaks: &[usize]) -> Result<Vec<PcgSegment>> {
    Ok(cycle_bounds(signal.len(), peaks)?
        .into_iter()
        .filter_map(|(s, e)| PcgSegment::new(signal.samples[s..e].to_vec(), signal.sample_rate, s, None).ok())
        .collect())
}

/// Splits a 4 kHz recording into single cardiac cycles.
pub fn segment_by_cycles(signal: &PcgSignal, min_cycle_s: f64) -> Result<Vec<PcgSegment>> {
    if signal.sample_rate != SEGMENT_RATE {
        return invalid(format!(
            "segmentation expects {SEGMENT_RATE} Hz input, got {} Hz",
            signal.sample_rate
        ));
    }
    let peaks = detect_peaks(signal, min_cycle_s)?;
    segments_from_peaks(signal, &peaks)
}

/// Generator output with ground-truth burst centres in seconds.
#[derive(Clone, Debug)]
pub struct SyntheticPcg {
    pub signal: PcgSignal,
    pub class: Class,
    pub s1_times: Vec<f64>,
    pub s2_times: Vec<f64>,
    /// S3 burst centres, or the middle of each murmur span.
    pub extra_times: Vec<f64>,
    /// Murmur noise spans `(start, end)` in seconds; empty for S3.
    pub murmur_spans: Vec<(f64, f64)>,
}

const LEAD_S: f64 = 0.15;
const S1_LEN_S: f64 = 0.08;
const S2_LEN_S: f64 = 0.06;
const S3_LEN_S: f64 = 0.07;
const BACKGROUND_RMS: f64 = 0.01;

fn add_burst(out: &mut [f64], fs: f64, center_s: f64, len_s: f64, freq: f64, amp: f64, phase: f64) {
    let start = ((center_s - len_s / 2.0) * fs).round().max(0.0) as usize;
    let n = (len_s * fs).round() as usize;
    for k in 0..n {
        let Some(slot) = out.get_mut(start + k) else { break };
        let w = 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos();
        let t = k as f64 / fs;
        *slot += amp * w * (2.0 * PI * freq * t + phase).sin();
    }
}

/// Deterministic stand-in recording of `n_cycles` heartbeats.
///
/// Every cycle has an S1 and S2 tone burst. S3 recordings add a 30-60 Hz
/// burst about 150 ms after S2; murmur recordings add 150-400 Hz noise
/// between S1 and S2. The shared parts (timing, S1/S2, background) depend
/// only on `seed`, so the two classes differ only in their abnormal sound.
pub fn synthesize_pcg(class: Class, n_cycles: usize, seed: u64) -> Result<SyntheticPcg> {
    if n_cycles == 0 {
        return invalid("need at least one cycle");
    }
    let fs = SEGMENT_RATE as f64;
    let mut common = ChaCha8Rng::seed_from_u64(seed);
    let mut extra = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_0F_A6_0A11);

    let periods: Vec<f64> = (0..n_cycles).map(|_| common.gen_range(0.95..1.05)).collect();
    let total_s = LEAD_S + periods.iter().sum::<f64>();
    let n = (total_s * fs).round() as usize;
    let mut out: Vec<f64> = (0..n)
        .map(|_| {
            // Sum of uniforms, close enough to Gaussian for background hiss.
            let u: f64 = (0..4).map(|_| common.gen_range(-1.0..1.0)).sum();
            u * BACKGROUND_RMS * (3.0f64 / 4.0).sqrt()
        })
        .collect();

    let mut syn = SyntheticPcg {
        signal: PcgSignal::new(vec![0.0], SEGMENT_RATE)?,
        class,
        s1_times: Vec::new(),
        s2_times: Vec::new(),
        extra_times: Vec::new(),
        murmur_spans: Vec::new(),
    };
    let mut t = LEAD_S;
    for period in periods {
        let s1 = t;
        let s1_f = common.gen_range(70.0..110.0);
        let s1_a = common.gen_range(0.9..1.0);
        let s2 = s1 + common.gen_range(0.24..0.28);
        let s2_f = common.gen_range(90.0..140.0);
        let s2_a = common.gen_range(0.55..0.7);
        let ph1 = common.gen_range(0.0..2.0 * PI);
        let ph2 = common.gen_range(0.0..2.0 * PI);
        add_burst(&mut out, fs, s1, S1_LEN_S, s1_f, s1_a, ph1);
        add_burst(&mut out, fs, s2, S2_LEN_S, s2_f, s2_a, ph2);
        syn.s1_times.push(s1);
        syn.s2_times.push(s2);

        match class {
            Class::S3 => {
                let s3 = s2 + extra.gen_range(0.13..0.16);
                let f = extra.gen_range(35.0..55.0);
                let a = extra.gen_range(0.4..0.5);
                let ph = extra.gen_range(0.0..2.0 * PI);
                add_burst(&mut out, fs, s3, S3_LEN_S, f, a, ph);
                syn.extra_times.push(s3);
            }
            Class::Murmur => {
                let start = s1 + S1_LEN_S / 2.0;
                let end = s2 - S2_LEN_S / 2.0;
                let amp = extra.gen_range(0.25..0.35);
                add_band_noise(&mut out, fs, start, end, 150.0, 400.0, amp, &mut extra);
                syn.extra_times.push((start + end) / 2.0);
                syn.murmur_spans.push((start, end));
            }
        }
        t += period;
    }
    syn.signal = PcgSignal::new(out, SEGMENT_RATE)?;
    Ok(syn)
}

/// Adds noise band-limited to `[lo, hi]` Hz (a dense random-phase
/// multitone) over `[start_s, end_s)` with a short raised-cosine taper.
#[allow(clippy::too_many_arguments)]
fn add_band_noise(out: &mut [f64], fs: f64, start_s: f64, end_s: f64, lo: f64, hi: f64, rms: f64, rng: &mut ChaCha8Rng) {
    let tones: Vec<(f64, f64)> = (0..48)
        .map(|_| (rng.gen_range(lo..hi), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let amp = rms * (2.0 / tones.len() as f64).sqrt();
    let start = (start_s * fs).round() as usize;
    let end = ((end_s * fs).round() as usize).min(out.len());
    let taper = (0.01 * fs) as usize;
    for i in start..end {
        let t = i as f64 / fs;
        let edge = (i - start).min(end - 1 - i);
        let w = if edge < taper {
            0.5 - 0.5 * (PI * edge as f64 / taper as f64).cos()
        } else {
            1.0
        };
        let v: f64 = tones.iter().map(|(f, ph)| (2.0 * PI * f * t + ph).sin()).sum();
        out[i] += w * amp * v;
    }
}

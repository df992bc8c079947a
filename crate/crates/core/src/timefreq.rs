//! Time-frequency front-ends. Each turns a segment into an image; after
//! [`to_model_image`] all of them yield a 32×32 grid in `[0, 1]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp::PcgSegment;
use crate::error::{invalid, Error, Result};

pub const IMAGE_SIDE: usize = 32;
pub const CWT_MIN_FREQ: f64 = 20.0;
pub const CWT_MAX_FREQ: f64 = 1000.0;
/// Kernel half-width in standard deviations of the Gaussian envelope.
const KERNEL_SIGMAS: f64 = 4.0;

pub const MEL_N_FFT: usize = 512;
pub const MEL_HOP: usize = 128;
pub const MEL_BANDS: usize = 32;
pub const MEL_MIN_FREQ: f64 = 20.0;
pub const MEL_MAX_FREQ: f64 = 2000.0;

/// Real matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ImageGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows * cols != values.len() {
            return invalid(format!("{rows}x{cols} grid needs {} values, got {}", rows * cols, values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("grid contains non-finite values");
        }
        Ok(Self { rows, cols, values })
    }

    pub fn filled(rows: usize, cols: usize, v: f64) -> Self {
        Self {
            rows,
            cols,
            values: vec![v; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        Self::new(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean of each row.
    pub fn row_means(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().sum::<f64>() / self.cols as f64)
            .collect()
    }
}

/// Complex Morlet parameters (`cmorB-C`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveletSpec {
    pub n_scales: usize,
    pub center_freq: f64,
    pub bandwidth: f64,
}

impl Default for WaveletSpec {
    fn default() -> Self {
        Self {
            n_scales: 128,
            center_freq: 1.0,
            bandwidth: 1.5,
        }
    }
}

impl WaveletSpec {
    fn validate(&self) -> Result<()> {
        if self.n_scales < 2 || !(self.center_freq > 0.0) || !(self.bandwidth > 0.0) {
            return invalid(format!("bad wavelet parameters {self:?}"));
        }
        Ok(())
    }

    /// Pseudo-frequency of every row, log-spaced from high to low.
    pub fn row_frequencies(&self) -> Vec<f64> {
        let ratio = (CWT_MIN_FREQ / CWT_MAX_FREQ).ln();
        (0..self.n_scales)
            .map(|i| CWT_MAX_FREQ * (ratio * i as f64 / (self.n_scales - 1) as f64).exp())
            .collect()
    }

    /// Scale (in samples) of every row; pseudo-frequency is `C·fs/a`.
    pub fn scales(&self, sample_rate: f64) -> Vec<f64> {
        self.row_frequencies()
            .into_iter()
            .map(|f| self.center_freq * sample_rate / f)
            .collect()
    }

    pub fn scale_to_frequency(&self, scale: f64, sample_rate: f64) -> f64 {
        self.center_freq * sample_rate / scale
    }

    /// Row whose pseudo-frequency is closest to `freq` on a log axis.
    pub fn nearest_row(&self, freq: f64) -> usize {
        self.row_frequencies()
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.ln() - freq.ln()).abs().total_cmp(&(b.1.ln() - freq.ln()).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Discretized conjugate wavelet at `scale`, L1-normalized, centred.
    pub fn kernel(&self, scale: f64) -> Vec<Complex64> {
        let sigma = (self.bandwidth / 2.0).sqrt();
        let half = (KERNEL_SIGMAS * sigma * scale).ceil() as isize;
        let norm = (PI * self.bandwidth).powf(-0.5);
        let mut k: Vec<Complex64> = (-half..=half)
            .map(|n| {
                let t = n as f64 / scale;
                let env = norm * (-t * t / self.bandwidth).exp();
                Complex64::from_polar(env, -2.0 * PI * self.center_freq * t)
            })
            .collect();
        let l1: f64 = k.iter().map(|c| c.norm()).sum();
        k.iter_mut().for_each(|c| *c /= l1);
        k
    }

    /// Length of the widest kernel for a given rate.
    pub fn max_kernel_len(&self, sample_rate: f64) -> usize {
        let a = self.scales(sample_rate).into_iter().fold(0.0, f64::max);
        let sigma = (self.bandwidth / 2.0).sqrt();
        2 * (KERNEL_SIGMAS * sigma * a).ceil() as usize + 1
    }
}

/// Magnitude of the continuous wavelet transform, one row per scale and one
/// column per sample. Row 0 is the highest pseudo-frequency.
pub fn cwt_scalogram(segment: &PcgSegment, spec: &WaveletSpec) -> Result<ImageGrid> {
    spec.validate()?;
    let fs = segment.sample_rate() as f64;
    let x = segment.samples();
    let n = x.len();
    let need = spec.max_kernel_len(fs);
    if n < need {
        return invalid(format!("segment has {n} samples, widest wavelet needs {need}"));
    }
    let rows: Vec<Vec<f64>> = spec
        .scales(fs)
        .par_iter()
        .map(|&a| {
            let kern = spec.kernel(a);
            let half = (kern.len() / 2) as isize;
            (0..n as isize)
                .map(|b| {
                    let lo = (b - half).max(0);
                    let hi = (b + half).min(n as isize - 1);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for t in lo..=hi {
                        acc += kern[(t - b + half) as usize] * x[t as usize];
                    }
                    acc.norm()
                })
                .collect()
        })
        .collect();
    ImageGrid::new(spec.n_scales, n, rows.concat())
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular Mel filters between `MEL_MIN_FREQ` and `MEL_MAX_FREQ`.
#[derive(Clone, Debug)]
pub struct MelBank {
    /// `n_mels + 2` edge frequencies; band `m` peaks at `edges[m + 1]`.
    edges: Vec<f64>,
}

impl MelBank {
    pub fn new(n_mels: usize) -> Result<Self> {
        if n_mels == 0 {
            return invalid("need at least one Mel band");
        }
        let (lo, hi) = (hz_to_mel(MEL_MIN_FREQ), hz_to_mel(MEL_MAX_FREQ));
        let mut edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        edges[0] = MEL_MIN_FREQ;
        edges[n_mels + 1] = MEL_MAX_FREQ;
        Ok(Self { edges })
    }

    pub fn n_bands(&self) -> usize {
        self.edges.len() - 2
    }

    pub fn center(&self, band: usize) -> f64 {
        self.edges[band + 1]
    }

    /// Weight of band `m` at frequency `f` (Hz).
    pub fn weight(&self, m: usize, f: f64) -> f64 {
        let (l, c, r) = (self.edges[m], self.edges[m + 1], self.edges[m + 2]);
        if f <= l || f >= r {
            0.0
        } else if f <= c {
            (f - l) / (c - l)
        } else {
            (r - f) / (r - c)
        }
    }

    /// Band-by-bin weight matrix for an `n_fft`-point spectrum.
    pub fn matrix(&self, n_fft: usize, sample_rate: f64) -> Vec<Vec<f64>> {
        let bins = n_fft / 2 + 1;
        (0..self.n_bands())
            .map(|m| {
                (0..bins)
                    .map(|k| self.weight(m, k as f64 * sample_rate / n_fft as f64))
                    .collect()
            })
            .collect()
    }
}

/// `log1p` of Mel-weighted STFT magnitude (Hann window), `n_mels × n_frames`.
pub fn mel_spectrogram(segment: &PcgSegment, n_fft: usize, hop: usize, n_mels: usize) -> Result<ImageGrid> {
    if n_fft < 2 || hop == 0 {
        return invalid(format!("bad STFT geometry n_fft={n_fft} hop={hop}"));
    }
    let x = segment.samples();
    if x.len() < n_fft {
        return invalid(format!("segment has {} samples, STFT needs {n_fft}", x.len()));
    }
    let bank = MelBank::new(n_mels)?.matrix(n_fft, segment.sample_rate() as f64);
    let window: Vec<f64> = (0..n_fft)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n_fft as f64).cos())
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);
    let n_frames = 1 + (x.len() - n_fft) / hop;
    let mut out = vec![0.0; n_mels * n_frames];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for frame in 0..n_frames {
        let start = frame * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(x[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (m, weights) in bank.iter().enumerate() {
            let e: f64 = weights.iter().zip(&buf).map(|(w, c)| w * c.norm()).sum();
            out[m * n_frames + frame] = e.ln_1p();
        }
    }
    ImageGrid::new(n_mels, n_frames, out)
}

/// Linear interpolation of `x` onto `n` corner-aligned points.
fn stretch(x: &[f64], n: usize) -> Vec<f64> {
    if x.len() == 1 || n == 1 {
        return vec![x[0]; n];
    }
    let step = (x.len() - 1) as f64 / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let pos = i as f64 * step;
            let j = (pos.floor() as usize).min(x.len() - 2);
            let frac = pos - j as f64;
            x[j] * (1.0 - frac) + x[j + 1] * frac
        })
        .collect()
}

/// Waveform reshaped row-major into a 32×32 image.
pub fn raw_grayscale(segment: &PcgSegment) -> Result<ImageGrid> {
    let side = IMAGE_SIDE;
    let img = ImageGrid::new(side, side, stretch(segment.samples(), side * side))?;
    Ok(normalize01(&img))
}

/// Bilinear resampling with corner-aligned sample positions.
pub fn resize_bilinear(img: &ImageGrid, rows: usize, cols: usize) -> Result<ImageGrid> {
    if img.values.is_empty() {
        return invalid("cannot resize an empty image");
    }
    if rows == 0 || cols == 0 {
        return invalid(format!("target shape {rows}x{cols} is empty"));
    }
    if rows == img.rows && cols == img.cols {
        return Ok(img.clone());
    }
    let axis = |src: usize, dst: usize| -> Vec<(usize, usize, f64)> {
        (0..dst)
            .map(|i| {
                if src == 1 || dst == 1 {
                    return (0, 0, 0.0);
                }
                let pos = i as f64 * (src - 1) as f64 / (dst - 1) as f64;
                let lo = (pos.floor() as usize).min(src - 2);
                (lo, lo + 1, pos - lo as f64)
            })
            .collect()
    };
    let ry = axis(img.rows, rows);
    let rx = axis(img.cols, cols);
    ImageGrid::from_fn(rows, cols, |r, c| {
        let (y0, y1, fy) = ry[r];
        let (x0, x1, fx) = rx[c];
        let top = img.get(y0, x0) * (1.0 - fx) + img.get(y0, x1) * fx;
        let bot = img.get(y1, x0) * (1.0 - fx) + img.get(y1, x1) * fx;
        top * (1.0 - fy) + bot * fy
    })
}

/// Min-max scaling to `[0, 1]`; a constant image becomes all 0.5.
pub fn normalize01(img: &ImageGrid) -> ImageGrid {
    let (lo, hi) = (img.min(), img.max());
    let values = if hi > lo {
        img.values.iter().map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.5; img.values.len()]
    };
    ImageGrid {
        rows: img.rows,
        cols: img.cols,
        values,
    }
}

/// Which front-end turns a segment into an image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMethod {
    Wavelet,
    Mel,
    Raw,
}

impl FeatureMethod {
    pub const ALL: [FeatureMethod; 3] = [FeatureMethod::Wavelet, FeatureMethod::Mel, FeatureMethod::Raw];

    pub fn name(self) -> &'static str {
        match self {
            FeatureMethod::Wavelet => "wavelet",
            FeatureMethod::Mel => "mel",
            FeatureMethod::Raw => "raw",
        }
    }
}

impl fmt::Display for FeatureMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown feature method {s:?} (wavelet|mel|raw)")))
    }
}

/// Segment → 32×32 image in `[0, 1]` using the chosen front-end.
pub fn to_model_image(segment: &PcgSegment, method: FeatureMethod) -> Result<ImageGrid> {
    let img = match method {
        FeatureMethod::Wavelet => cwt_scalogram(segment, &WaveletSpec::default())?,
        FeatureMethod::Mel => mel_spectrogram(segment, MEL_N_FFT, MEL_HOP, MEL_BANDS)?,
        FeatureMethod::Raw => raw_grayscale(segment)?,
    };
    Ok(normalize01(&resize_bilinear(&img, IMAGE_SIDE, IMAGE_SIDE)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(x: Vec<f64>) -> PcgSegment {
        PcgSegment::unchecked(x, 4000).unwrap()
    }

    #[test]
    fn grid_shape_checked() {
        assert!(ImageGrid::new(2, 2, vec![0.0; 3]).is_err());
        assert!(ImageGrid::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn normalize_cases() {
        let g = ImageGrid::new(1, 3, vec![0.0, 5.0, 10.0]).unwrap();
        assert_eq!(normalize01(&g).values(), &[0.0, 0.5, 1.0]);
        let c = ImageGrid::filled(2, 2, 7.0);
        assert!(normalize01(&c).values().iter().all(|&v| v == 0.5));
        let u = ImageGrid::new(1, 4, vec![0.0, 0.25, 1.0, 0.6]).unwrap();
        assert_eq!(normalize01(&u), u);
    }

    #[test]
    fn resize_cases() {
        let g = ImageGrid::from_fn(3, 5, |r, c| (r * 7 + c) as f64).unwrap();
        assert_eq!(resize_bilinear(&g, 3, 5).unwrap(), g);
        let k = ImageGrid::filled(4, 6, 2.5);
        assert!(resize_bilinear(&k, 9, 2).unwrap().values().iter().all(|&v| (v - 2.5).abs() < 1e-15));

        // Corner-aligned 4→2 samples the checkerboard at its corners.
        let board = ImageGrid::from_fn(4, 4, |r, c| ((r + c) % 2) as f64).unwrap();
        let small = resize_bilinear(&board, 2, 2).unwrap();
        assert_eq!(small.values(), &[0.0, 1.0, 1.0, 0.0]);

        // 4→3: positions 0, 1.5, 3 on both axes.
        let mid = resize_bilinear(&board, 3, 3).unwrap();
        assert_eq!(mid.get(1, 1), 0.5);
        assert_eq!(mid.get(0, 1), 0.5);
        assert_eq!(mid.get(2, 2), 0.0);
        assert!(resize_bilinear(&board, 0, 3).is_err());
    }

    #[test]
    fn raw_grayscale_cases() {
        let c = raw_grayscale(&seg(vec![0.3; 900])).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.5));

        let ramp = raw_grayscale(&seg((0..1024).map(|i| i as f64).collect())).unwrap();
        for r in 0..32 {
            for col in 0..32 {
                assert!((ramp.get(r, col) - (32 * r + col) as f64 / 1023.0).abs() < 1e-12);
            }
        }
        let long = raw_grayscale(&seg((0..2048).map(|i| (i as f64 * 0.01).sin()).collect())).unwrap();
        assert_eq!((long.rows(), long.cols()), (32, 32));
    }

    #[test]
    fn scale_map_is_monotone() {
        let spec = WaveletSpec::default();
        let scales = spec.scales(4000.0);
        assert_eq!(scales.len(), 128);
        assert!(scales.windows(2).all(|w| w[1] > w[0]));
        let f: Vec<f64> = scales.iter().map(|&a| spec.scale_to_frequency(a, 4000.0)).collect();
        assert!(f.windows(2).all(|w| w[1] < w[0]));
        assert!((f[0] - 1000.0).abs() < 1e-9 && (f[127] - 20.0).abs() < 1e-9);
        assert_eq!(spec.nearest_row(1000.0), 0);
        assert_eq!(spec.nearest_row(20.0), 127);
    }

    #[test]
    fn kernel_is_l1_normalized() {
        let spec = WaveletSpec::default();
        for a in [4.0, 40.0, 200.0] {
            let k = spec.kernel(a);
            assert_eq!(k.len() % 2, 1);
            assert!((k.iter().map(|c| c.norm()).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cwt_rejects_short_segments() {
        let spec = WaveletSpec::default();
        let need = spec.max_kernel_len(4000.0);
        assert!(cwt_scalogram(&seg(vec![0.0; need - 1]), &spec).is_err());
        let zero = cwt_scalogram(&seg(vec![0.0; need]), &spec).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let bad = WaveletSpec { n_scales: 1, ..spec };
        assert!(cwt_scalogram(&seg(vec![0.0; need]), &bad).is_err());
    }

    #[test]
    fn mel_zero_and_short() {
        let z = mel_spectrogram(&seg(vec![0.0; 2000]), 512, 128, 32).unwrap();
        assert_eq!(z.rows(), 32);
        assert_eq!(z.cols(), 1 + (2000 - 512) / 128);
        assert!(z.values().iter().all(|&v| v == 0.0));
        assert!(mel_spectrogram(&seg(vec![0.0; 511]), 512, 128, 32).is_err());
    }

    #[test]
    fn mel_bank_partitions_band() {
        let bank = MelBank::new(32).unwrap();
        let m = bank.matrix(512, 4000.0);
        assert!(m.iter().all(|row| row.iter().sum::<f64>() > 0.0));
        let (lo, hi) = (bank.center(0), bank.center(31));
        for i in 0..=500 {
            let f = lo + (hi - lo) * i as f64 / 500.0;
            let total: f64 = (0..32).map(|b| bank.weight(b, f)).sum();
            assert!((total - 1.0).abs() < 1e-12, "f={f} total={total}");
        }
        assert_eq!(bank.weight(0, MEL_MIN_FREQ), 0.0);
        assert_eq!(bank.weight(31, MEL_MAX_FREQ), 0.0);
    }

    #[test]
    fn method_names() {
        for m in FeatureMethod::ALL {
            assert_eq!(m.name().parse::<FeatureMethod>().unwrap(), m);
        }
        assert!("cwt".parse::<FeatureMethod>().is_err());
    }
}

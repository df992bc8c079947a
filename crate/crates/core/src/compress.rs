//! 32×32 image → 8 values: max-pool to 8×8, Otsu-binarize, row means.

use crate::error::{invalid, Result};
use crate::timefreq::ImageGrid;

pub const N_FEATURES: usize = 8;
pub const POOL_KERNEL: usize = 4;
pub const OTSU_BINS: usize = 256;

/// Eight values in `[0, 1]`, one per qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector([f64; N_FEATURES]);

impl FeatureVector {
    pub fn new(values: &[f64]) -> Result<Self> {
        let Ok(arr) = <[f64; N_FEATURES]>::try_from(values) else {
            return invalid(format!("feature vector needs {N_FEATURES} values, got {}", values.len()));
        };
        if let Some(v) = arr.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return invalid(format!("feature value {v} outside [0, 1]"));
        }
        Ok(Self(arr))
    }

    pub fn values(&self) -> &[f64; N_FEATURES] {
        &self.0
    }
}

/// Non-overlapping `kernel × kernel` max pooling.
pub fn max_pool(img: &ImageGrid, kernel: usize) -> Result<ImageGrid> {
    if kernel == 0 || img.rows() % kernel != 0 || img.cols() % kernel != 0 {
        return invalid(format!(
            "{}x{} image is not divisible into {kernel}x{kernel} blocks",
            img.rows(),
            img.cols()
        ));
    }
    ImageGrid::from_fn(img.rows() / kernel, img.cols() / kernel, |i, j| {
        (0..kernel)
            .flat_map(|dr| (0..kernel).map(move |dc| (dr, dc)))
            .map(|(dr, dc)| img.get(i * kernel + dr, j * kernel + dc))
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Histogram bin of every pixel over the image's own `[min, max]` range.
/// `None` for a constant image.
pub fn histogram_bins(img: &ImageGrid) -> Option<Vec<usize>> {
    let (lo, hi) = (img.min(), img.max());
    if !(hi > lo) {
        return None;
    }
    Some(
        img.values()
            .iter()
            .map(|v| (((v - lo) / (hi - lo) * OTSU_BINS as f64) as usize).min(OTSU_BINS - 1))
            .collect(),
    )
}

/// Otsu threshold as a bin index: pixels in bins above it are foreground.
/// The first maximizer of between-class variance wins ties.
pub fn otsu_bin(bins: &[usize]) -> Option<usize> {
    let mut hist = [0u64; OTSU_BINS];
    for &b in bins {
        hist[b] += 1;
    }
    let total = bins.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best: Option<(usize, f64)> = None;
    for (t, &c) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        w0 += c as f64;
        sum0 += t as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let diff = sum0 / w0 - (sum_all - sum0) / w1;
        let between = w0 * w1 * diff * diff;
        if best.map_or(true, |(_, b)| between > b) {
            best = Some((t, between));
        }
    }
    best.map(|(t, _)| t)
}

/// Threshold value separating the two classes, or `None` for constant input.
pub fn otsu_threshold(img: &ImageGrid) -> Option<f64> {
    let bins = histogram_bins(img)?;
    let t = otsu_bin(&bins)?;
    let (lo, hi) = (img.min(), img.max());
    Some(lo + (t + 1) as f64 / OTSU_BINS as f64 * (hi - lo))
}

/// 1 above the Otsu threshold, 0 elsewhere. Constant images map to all zeros.
pub fn binarize_otsu(img: &ImageGrid) -> ImageGrid {
    let values = match histogram_bins(img).and_then(|b| otsu_bin(&b).map(|t| (b, t))) {
        Some((bins, t)) => bins.iter().map(|&b| if b > t { 1.0 } else { 0.0 }).collect(),
        None => vec![0.0; img.values().len()],
    };
    ImageGrid::new(img.rows(), img.cols(), values).expect("shape unchanged")
}

/// Row means of an 8×8 map.
pub fn reduce_to_8(img: &ImageGrid) -> Result<FeatureVector> {
    if img.rows() != N_FEATURES || img.cols() != N_FEATURES {
        return invalid(format!("expected an 8x8 map, got {}x{}", img.rows(), img.cols()));
    }
    FeatureVector::new(&img.row_means())
}

/// Full compression of a normalized 32×32 image.
pub fn compress_pipeline(img: &ImageGrid) -> Result<FeatureVector> {
    if img.rows() != 32 || img.cols() != 32 {
        return invalid(format!("expected a 32x32 image, got {}x{}", img.rows(), img.cols()));
    }
    reduce_to_8(&binarize_otsu(&max_pool(img, POOL_KERNEL)?))
}

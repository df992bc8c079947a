//! Heart-sound classification with a simulated quantum convolutional network.
//!
//! Pipeline: [`dsp`] (resample, segment) → [`timefreq`] (scalogram, Mel or
//! raw image) → [`compress`] (8 values) → [`qcnn`] (8-qubit circuit on the
//! [`qsim`] statevector simulator) → [`train`] (COBYLA fit, evaluation).

pub mod cobyla;
pub mod compress;
pub mod dsp;
pub mod error;
pub mod io;
pub mod qcnn;
pub mod qsim;
pub mod timefreq;
pub mod train;

pub use compress::FeatureVector;
pub use dsp::{Class, PcgSegment, PcgSignal};
pub use error::{Error, Result};
pub use qcnn::{Qcnn, QcnnParams};
pub use timefreq::{FeatureMethod, ImageGrid};

//! Eight-qubit quantum convolutional classifier.
//!
//! Features are phase-encoded (`H` then `P(2f)` per qubit), then three
//! convolution/pooling stages shrink the active register 8 → 4 → 2 → 1 and the
//! survivor's `<Z>` is the model output. Pooled-away qubits stay in the
//! statevector but receive no further gates.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::compress::{FeatureVector, N_FEATURES};
use crate::dsp::Class;
use crate::error::{Error, Result};
use crate::qsim::{Circuit, Gate, Op, StateVector};
use crate::timefreq::FeatureMethod;

pub const N_QUBITS: usize = 8;
pub const PARAMS_PER_BLOCK: usize = 3;
/// Parameter slots of the standard architecture.
pub const PARAM_COUNT: usize = 60;

/// Rotation angles for every conv/pool block, in emission order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QcnnParams(Vec<f64>);

impl QcnnParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != PARAM_COUNT {
            return Err(Error::InvalidInput(format!(
                "expected {PARAM_COUNT} parameters, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite parameter".into()));
        }
        Ok(Self(values))
    }

    pub fn zeros() -> Self {
        Self(vec![0.0; PARAM_COUNT])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// One convolution layer followed by one pooling layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub conv_pairs: Vec<(usize, usize)>,
    /// `(discard, keep)` pairs.
    pub pool_pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QcnnArchitecture {
    pub n_qubits: usize,
    pub stages: Vec<Stage>,
    pub readout_qubit: usize,
}

impl QcnnArchitecture {
    /// Ring convolutions, even-into-odd pooling, readout on qubit 7.
    pub fn standard() -> Self {
        Self {
            n_qubits: N_QUBITS,
            stages: vec![
                Stage {
                    conv_pairs: vec![(0, 1), (2, 3), (4, 5), (6, 7), (1, 2), (3, 4), (5, 6), (7, 0)],
                    pool_pairs: vec![(0, 1), (2, 3), (4, 5), (6, 7)],
                },
                Stage {
                    conv_pairs: vec![(1, 3), (5, 7), (3, 5), (7, 1)],
                    pool_pairs: vec![(1, 3), (5, 7)],
                },
                Stage {
                    conv_pairs: vec![(3, 7)],
                    pool_pairs: vec![(3, 7)],
                },
            ],
            readout_qubit: 7,
        }
    }

    /// Qubits still active after each stage's pooling.
    pub fn surviving(&self) -> Vec<Vec<usize>> {
        let mut alive: Vec<usize> = (0..self.n_qubits).collect();
        self.stages
            .iter()
            .map(|stage| {
                alive.retain(|q| !stage.pool_pairs.iter().any(|&(d, _)| d == *q));
                alive.clone()
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.stages
            .iter()
            .map(|s| (s.conv_pairs.len() + s.pool_pairs.len()) * PARAMS_PER_BLOCK)
            .sum()
    }
}

/// Encoding circuit: `H` then `P(2 f_q)` on each qubit.
pub fn feature_map(features: &[f64]) -> Result<Circuit> {
    if features.len() != N_FEATURES {
        return Err(Error::InvalidInput(format!(
            "feature map takes {N_FEATURES} values, got {}",
            features.len()
        )));
    }
    let mut c = Circuit::new(N_QUBITS);
    for (q, &f) in features.iter().enumerate() {
        c.push(Gate::H(q));
        c.push(Gate::P(q, 2.0 * f));
    }
    Ok(c)
}

fn distinct(a: usize, b: usize, what: &str) -> Result<()> {
    if a == b {
        return Err(Error::InvalidGate(format!("{what} block needs two distinct qubits, got {a} twice")));
    }
    Ok(())
}

/// Convolution block ops reading angles from slots `first_slot..first_slot + 3`.
pub fn conv_ops(first_slot: usize, a: usize, b: usize) -> Result<Vec<Op>> {
    distinct(a, b, "conv")?;
    let fixed = |gate| Op { gate, slot: None };
    let param = |gate, k: usize| Op {
        gate,
        slot: Some(first_slot + k),
    };
    Ok(vec![
        fixed(Gate::Rz(b, -FRAC_PI_2)),
        fixed(Gate::Cx { control: b, target: a }),
        param(Gate::Rz(a, 0.0), 0),
        param(Gate::Ry(b, 0.0), 1),
        fixed(Gate::Cx { control: a, target: b }),
        param(Gate::Ry(b, 0.0), 2),
        fixed(Gate::Cx { control: b, target: a }),
        fixed(Gate::Rz(a, FRAC_PI_2)),
    ])
}

/// Pooling block ops; `discard` gets no gates after this block.
pub fn pool_ops(first_slot: usize, keep: usize, discard: usize) -> Result<Vec<Op>> {
    distinct(keep, discard, "pool")?;
    let fixed = |gate| Op { gate, slot: None };
    let param = |gate, k: usize| Op {
        gate,
        slot: Some(first_slot + k),
    };
    Ok(vec![
        fixed(Gate::Rz(keep, -FRAC_PI_2)),
        fixed(Gate::Cx {
            control: keep,
            target: discard,
        }),
        param(Gate::Rz(discard, 0.0), 0),
        param(Gate::Ry(keep, 0.0), 1),
        fixed(Gate::Cx {
            control: discard,
            target: keep,
        }),
        param(Gate::Ry(keep, 0.0), 2),
    ])
}

fn bind_block(ops: Vec<Op>, theta: [f64; 3]) -> Vec<Gate> {
    ops.into_iter()
        .map(|op| match op.slot {
            Some(k) => op.gate.with_angle(theta[k]),
            None => op.gate,
        })
        .collect()
}

/// Convolution block with concrete angles.
pub fn conv_block(theta: [f64; 3], a: usize, b: usize) -> Result<Vec<Gate>> {
    Ok(bind_block(conv_ops(0, a, b)?, theta))
}

/// Pooling block with concrete angles.
pub fn pool_block(theta: [f64; 3], keep: usize, discard: usize) -> Result<Vec<Gate>> {
    Ok(bind_block(pool_ops(0, keep, discard)?, theta))
}

/// Trainable part of the model. Only the standard architecture is accepted.
pub fn build_qcnn(arch: &QcnnArchitecture) -> Result<Circuit> {
    if *arch != QcnnArchitecture::standard() {
        return Err(Error::Unsupported(
            "only the standard 8-qubit three-stage architecture is supported".into(),
        ));
    }
    let mut blocks = Vec::new();
    for stage in &arch.stages {
        for &(a, b) in &stage.conv_pairs {
            blocks.push(conv_ops(blocks.len() * PARAMS_PER_BLOCK, a, b)?);
        }
        for &(discard, keep) in &stage.pool_pairs {
            blocks.push(pool_ops(blocks.len() * PARAMS_PER_BLOCK, keep, discard)?);
        }
    }
    let mut c = Circuit::new(arch.n_qubits);
    for op in blocks.into_iter().flatten() {
        match op.slot {
            Some(s) => c.push_param(op.gate, s)?,
            None => c.push(op.gate),
        }
    }
    debug_assert_eq!(c.n_params(), PARAM_COUNT);
    Ok(c)
}

/// Feature map plus the prebuilt trainable circuit.
#[derive(Clone, Debug)]
pub struct Qcnn {
    arch: QcnnArchitecture,
    circuit: Circuit,
}

impl Qcnn {
    pub fn new() -> Self {
        let arch = QcnnArchitecture::standard();
        let circuit = build_qcnn(&arch).expect("standard architecture builds");
        Self { arch, circuit }
    }

    pub fn architecture(&self) -> &QcnnArchitecture {
        &self.arch
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Final state before readout.
    pub fn state(&self, features: &FeatureVector, params: &QcnnParams) -> Result<StateVector> {
        let mut state = StateVector::zero(N_QUBITS)?;
        feature_map(features.values())?.apply_to(&mut state, &[])?;
        self.circuit.apply_to(&mut state, params.as_slice())?;
        Ok(state)
    }

    /// `<Z>` on the readout qubit, in `[-1, 1]`.
    pub fn forward(&self, features: &FeatureVector, params: &QcnnParams) -> Result<f64> {
        self.state(features, params)?
            .expectation_z(self.arch.readout_qubit)
    }

    pub fn predict(&self, features: &FeatureVector, params: &QcnnParams) -> Result<Class> {
        Ok(class_from_output(self.forward(features, params)?))
    }
}

impl Default for Qcnn {
    fn default() -> Self {
        Self::new()
    }
}

/// Readout sign to class; zero goes to S3.
pub fn class_from_output(z: f64) -> Class {
    if z >= 0.0 {
        Class::S3
    } else {
        Class::Murmur
    }
}

pub fn forward(features: &FeatureVector, params: &QcnnParams) -> Result<f64> {
    Qcnn::new().forward(features, params)
}

pub fn predict(features: &FeatureVector, params: &QcnnParams) -> Result<Class> {
    Qcnn::new().predict(features, params)
}

pub const MODEL_VERSION: u32 = 1;
pub const ARCHITECTURE_TAG: &str = "qcnn-v1";

/// On-disk model description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub n_qubits: usize,
    pub architecture: String,
    pub feature_method: FeatureMethod,
    pub params: Vec<f64>,
    pub label_map: BTreeMap<String, i32>,
}

impl ModelDocument {
    pub fn new(feature_method: FeatureMethod, params: &QcnnParams) -> Self {
        Self {
            version: MODEL_VERSION,
            n_qubits: N_QUBITS,
            architecture: ARCHITECTURE_TAG.to_string(),
            feature_method,
            params: params.as_slice().to_vec(),
            label_map: Class::ALL
                .iter()
                .map(|c| (c.tag().to_string(), c.target() as i32))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and checks the document against this build's architecture.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.version != MODEL_VERSION {
            return Err(Error::Unsupported(format!("model version {}", doc.version)));
        }
        if doc.n_qubits != N_QUBITS || doc.architecture != ARCHITECTURE_TAG {
            return Err(Error::Unsupported(format!(
                "model architecture {} on {} qubits",
                doc.architecture, doc.n_qubits
            )));
        }
        if doc.label_map != Self::new(doc.feature_method, &QcnnParams::zeros()).label_map {
            return Err(Error::Unsupported(format!("label map {:?}", doc.label_map)));
        }
        QcnnParams::new(doc.params.clone())?;
        Ok(doc)
    }

    pub fn params(&self) -> Result<QcnnParams> {
        QcnnParams::new(self.params.clone())
    }
}

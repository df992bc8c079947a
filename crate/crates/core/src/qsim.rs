//! Dense statevector simulator.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. Gate matrices
//! use the usual conventions: `RY(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]`,
//! `RZ(t) = diag(e^{-it/2}, e^{it/2})`, `P(l) = diag(1, e^{il})`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_QUBITS: usize = 12;
/// Largest register accepted by [`dense_oracle_unitary`].
pub const ORACLE_MAX_QUBITS: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Amplitudes of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidInput(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Builds a state from raw amplitudes. The vector must have a power-of-two
    /// length and unit norm (within 1e-10).
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() || len > 1 << MAX_QUBITS {
            return Err(Error::InvalidInput(format!(
                "amplitude count {len} is not 2^n for 1 <= n <= {MAX_QUBITS}"
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("state norm {norm} != 1")));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        if index >= s.amps.len() {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        s.amps[0] = ZERO;
        s.amps[index] = ONE;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Sum of squared amplitude magnitudes.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::H(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_1q(q, [[s.into(), s.into()], [s.into(), (-s).into()]]);
            }
            Gate::X(q) => self.for_pairs(q, |a, b| std::mem::swap(a, b)),
            Gate::Rx(q, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                self.apply_1q(
                    q,
                    [[c.into(), C64::new(0.0, -s)], [C64::new(0.0, -s), c.into()]],
                );
            }
            Gate::Ry(q, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                self.apply_1q(q, [[c.into(), (-s).into()], [s.into(), c.into()]]);
            }
            Gate::Rz(q, t) => {
                let (lo, hi) = rz_phases(t);
                self.for_pairs(q, |a, b| {
                    *a *= lo;
                    *b *= hi;
                });
            }
            Gate::P(q, l) => {
                let ph = C64::from_polar(1.0, l);
                self.for_pairs(q, |_, b| *b *= ph);
            }
            Gate::Cx { control, target } => {
                let cm = 1 << control;
                let tm = 1 << target;
                for i in 0..self.amps.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amps.swap(i, i | tm);
                    }
                }
            }
            Gate::Cz(a, b) => {
                let m = (1 << a) | (1 << b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Crz {
                control,
                target,
                angle,
            } => {
                let (lo, hi) = rz_phases(angle);
                let cm = 1 << control;
                let tm = 1 << target;
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & cm != 0 {
                        *amp *= if i & tm == 0 { lo } else { hi };
                    }
                }
            }
        }
        Ok(())
    }

    /// Visits every amplitude pair `(i, i | 1<<q)` with bit `q` of `i` clear.
    fn for_pairs(&mut self, q: usize, mut f: impl FnMut(&mut C64, &mut C64)) {
        let half = 1 << q;
        for block in self.amps.chunks_exact_mut(half << 1) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a, b);
            }
        }
    }

    fn apply_1q(&mut self, q: usize, m: [[C64; 2]; 2]) {
        self.for_pairs(q, |a, b| {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        });
    }

    /// `<Z>` on one qubit.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::InvalidInput(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        let mask = 1 << qubit;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }
}

fn rz_phases(t: f64) -> (C64, C64) {
    (C64::from_polar(1.0, -t / 2.0), C64::from_polar(1.0, t / 2.0))
}

/// One gate of the supported set. Angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    P(usize, f64),
    Cx { control: usize, target: usize },
    Cz(usize, usize),
    Crz { control: usize, target: usize, angle: f64 },
}

impl Gate {
    /// Qubits acted on, control first for controlled gates.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::P(q, _) => {
                vec![q]
            }
            Gate::Cx { control, target } | Gate::Crz { control, target, .. } => vec![control, target],
            Gate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, t) | Gate::Ry(_, t) | Gate::Rz(_, t) | Gate::P(_, t) => Some(t),
            Gate::Crz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn is_parameterized(&self) -> bool {
        self.angle().is_some()
    }

    /// Same gate with its angle replaced. Fixed gates are returned unchanged.
    pub fn with_angle(self, t: f64) -> Self {
        match self {
            Gate::Rx(q, _) => Gate::Rx(q, t),
            Gate::Ry(q, _) => Gate::Ry(q, t),
            Gate::Rz(q, _) => Gate::Rz(q, t),
            Gate::P(q, _) => Gate::P(q, t),
            Gate::Crz { control, target, .. } => Gate::Crz {
                control,
                target,
                angle: t,
            },
            g => g,
        }
    }

    /// The inverse gate: negated angle for rotations, itself otherwise.
    pub fn inverse(self) -> Self {
        match self.angle() {
            Some(t) => self.with_angle(-t),
            None => self,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidGate(format!(
                "{self:?}: qubit {q} out of range for {n_qubits} qubits"
            )));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::InvalidGate(format!("{self:?}: repeated qubit {}", qs[0])));
        }
        Ok(())
    }

    /// Expansion of the gate as a sum of tensor products of 2x2 factors.
    /// Each term lists `(qubit, factor)`; unlisted qubits carry identity.
    fn kron_terms(&self) -> Vec<Vec<(usize, Mat2)>> {
        let p0 = [[ONE, ZERO], [ZERO, ZERO]];
        let p1 = [[ZERO, ZERO], [ZERO, ONE]];
        match *self {
            Gate::Cx { control, target } => vec![
                vec![(control, p0)],
                vec![(control, p1), (target, [[ZERO, ONE], [ONE, ZERO]])],
            ],
            Gate::Cz(a, b) => vec![
                vec![(a, p0)],
                vec![(a, p1), (b, [[ONE, ZERO], [ZERO, -ONE]])],
            ],
            Gate::Crz {
                control,
                target,
                angle,
            } => {
                let (lo, hi) = rz_phases(angle);
                vec![vec![(control, p0)], vec![(control, p1), (target, [[lo, ZERO], [ZERO, hi]])]]
            }
            g => {
                let q = g.qubits()[0];
                vec![vec![(q, g.matrix_1q())]]
            }
        }
    }

    fn matrix_1q(&self) -> Mat2 {
        match *self {
            Gate::H(_) => {
                let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
                [[s, s], [s, -s]]
            }
            Gate::X(_) => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Rx(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                [[c.into(), C64::new(0.0, -s)], [C64::new(0.0, -s), c.into()]]
            }
            Gate::Ry(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                [[c.into(), (-s).into()], [s.into(), c.into()]]
            }
            Gate::Rz(_, t) => {
                let (lo, hi) = rz_phases(t);
                [[lo, ZERO], [ZERO, hi]]
            }
            Gate::P(_, l) => [[ONE, ZERO], [ZERO, C64::from_polar(1.0, l)]],
            _ => unreachable!("two-qubit gate has no 2x2 matrix"),
        }
    }
}

type Mat2 = [[C64; 2]; 2];

/// Value-in/value-out form of [`StateVector::apply`].
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Circuit element: a gate, optionally taking its angle from a parameter slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Op {
    pub gate: Gate,
    pub slot: Option<usize>,
}

/// Ordered gate list over a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn push(&mut self, gate: Gate) {
        self.ops.push(Op { gate, slot: None });
    }

    /// Appends a rotation whose angle is read from `params[slot]` at run time.
    pub fn push_param(&mut self, gate: Gate, slot: usize) -> Result<()> {
        if !gate.is_parameterized() {
            return Err(Error::InvalidGate(format!("{gate:?} takes no angle")));
        }
        self.ops.push(Op {
            gate,
            slot: Some(slot),
        });
        Ok(())
    }

    /// Appends all of `other`'s ops, shifting its parameter slots past ours.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::InvalidInput(format!(
                "cannot join {}-qubit and {}-qubit circuits",
                self.n_qubits, other.n_qubits
            )));
        }
        let offset = self.n_params();
        self.ops.extend(other.ops.iter().map(|op| Op {
            gate: op.gate,
            slot: op.slot.map(|s| s + offset),
        }));
        Ok(())
    }

    /// One past the highest bound slot.
    pub fn n_params(&self) -> usize {
        self.ops
            .iter()
            .filter_map(|op| op.slot)
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Gates with parameter slots substituted.
    pub fn bind(&self, params: &[f64]) -> Result<Vec<Gate>> {
        let n = self.n_params();
        if params.len() != n {
            return Err(Error::InvalidInput(format!(
                "circuit has {n} parameter slots, got {} values",
                params.len()
            )));
        }
        let mut used = vec![false; n];
        let gates = self
            .ops
            .iter()
            .map(|op| match op.slot {
                Some(s) => {
                    used[s] = true;
                    op.gate.with_angle(params[s])
                }
                None => op.gate,
            })
            .collect();
        if let Some(gap) = used.iter().position(|u| !u) {
            return Err(Error::InvalidInput(format!("parameter slot {gap} is never used")));
        }
        Ok(gates)
    }

    /// Applies every gate to `state` in order.
    pub fn apply_to(&self, state: &mut StateVector, params: &[f64]) -> Result<()> {
        if state.n_qubits != self.n_qubits {
            return Err(Error::InvalidInput(format!(
                "{}-qubit circuit on {}-qubit state",
                self.n_qubits, state.n_qubits
            )));
        }
        for gate in self.bind(params)? {
            state.apply(&gate)?;
        }
        Ok(())
    }
}

/// Runs `circuit` from `|0...0>`.
pub fn run_circuit(circuit: &Circuit, params: &[f64]) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.n_qubits)?;
    circuit.apply_to(&mut state, params)?;
    Ok(state)
}

/// Square complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Self { dim, data }
    }

    fn from_mat2(m: &Mat2) -> Self {
        Self {
            dim: 2,
            data: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let dim = self.dim * other.dim;
        let mut data = vec![ZERO; dim * dim];
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.get(r1, c1);
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        data[(r1 * other.dim + r2) * dim + c1 * other.dim + c2] = a * other.get(r2, c2);
                    }
                }
            }
        }
        CMatrix { dim, data }
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                for c in 0..n {
                    data[r * n + c] += a * other.get(k, c);
                }
            }
        }
        CMatrix { dim: n, data }
    }

    fn add(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.get(r, c).conj();
            }
        }
        CMatrix { dim: n, data }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    /// Largest entry of `|M^dagger M - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.adjoint().matmul(self);
        let id = CMatrix::identity(self.dim);
        p.data
            .iter()
            .zip(&id.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Full-register matrix of one gate, assembled from Kronecker products.
/// The most significant qubit is the leftmost factor.
pub fn gate_unitary(gate: &Gate, n_qubits: usize) -> Result<CMatrix> {
    gate.validate(n_qubits)?;
    let id2 = CMatrix::identity(2);
    let mut total: Option<CMatrix> = None;
    for term in gate.kron_terms() {
        let mut m = CMatrix::identity(1);
        for q in (0..n_qubits).rev() {
            let factor = term
                .iter()
                .find(|(tq, _)| *tq == q)
                .map_or_else(|| id2.clone(), |(_, f)| CMatrix::from_mat2(f));
            m = m.kron(&factor);
        }
        total = Some(match total {
            Some(t) => t.add(&m),
            None => m,
        });
    }
    Ok(total.expect("every gate has at least one term"))
}

/// Whole-circuit unitary by naive matrix products, for cross-checking the
/// statevector kernel on small registers.
pub fn dense_oracle_unitary(circuit: &Circuit, params: &[f64]) -> Result<CMatrix> {
    let n = circuit.n_qubits;
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::Unsupported(format!(
            "dense oracle limited to {ORACLE_MAX_QUBITS} qubits, circuit has {n}"
        )));
    }
    let mut u = CMatrix::identity(1 << n);
    for gate in circuit.bind(params)? {
        u = gate_unitary(&gate, n)?.matmul(&u);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn zero_state_shapes() {
        let s = StateVector::zero(1).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);
        let s = StateVector::zero(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.amplitudes()[0], ONE);
        for n in 1..=MAX_QUBITS {
            assert_eq!(StateVector::zero(n).unwrap().norm_sqr(), 1.0);
        }
        assert!(matches!(StateVector::zero(0), Err(Error::InvalidInput(_))));
        assert!(matches!(StateVector::zero(13), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(&StateVector::zero(1).unwrap(), &Gate::H(0)).unwrap();
        let h = C64::from(FRAC_1_SQRT_2);
        assert!(close(s.amplitudes()[0], h) && close(s.amplitudes()[1], h));
    }

    #[test]
    fn cx_flips_target_when_control_set() {
        let s = StateVector::basis(2, 2).unwrap();
        let s = apply_gate(&s, &Gate::Cx { control: 1, target: 0 }).unwrap();
        assert_eq!(s.amplitudes()[3], ONE);
        let s = StateVector::basis(2, 1).unwrap();
        let s = apply_gate(&s, &Gate::Cx { control: 1, target: 0 }).unwrap();
        assert_eq!(s.amplitudes()[1], ONE);
    }

    #[test]
    fn bad_targets_rejected() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply(&Gate::H(2)), Err(Error::InvalidGate(_))));
        assert!(matches!(
            s.apply(&Gate::Cx { control: 1, target: 1 }),
            Err(Error::InvalidGate(_))
        ));
        assert!(matches!(s.apply(&Gate::Cz(0, 5)), Err(Error::InvalidGate(_))));
    }

    #[test]
    fn ry_pi_maps_zero_to_one() {
        let mut c = Circuit::new(1);
        c.push_param(Gate::Ry(0, 0.0), 0).unwrap();
        let s = run_circuit(&c, &[PI]).unwrap();
        assert!(close(s.amplitudes()[0], ZERO));
        assert!(close(s.amplitudes()[1], ONE));
    }

    #[test]
    fn empty_circuit_is_ground_state() {
        let s = run_circuit(&Circuit::new(2), &[]).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());
    }

    #[test]
    fn parameter_count_mismatch() {
        let mut c = Circuit::new(1);
        c.push_param(Gate::Rz(0, 0.0), 0).unwrap();
        assert!(matches!(run_circuit(&c, &[]), Err(Error::InvalidInput(_))));
        assert!(matches!(run_circuit(&c, &[1.0, 2.0]), Err(Error::InvalidInput(_))));
        let mut gap = Circuit::new(1);
        gap.push_param(Gate::Rz(0, 0.0), 1).unwrap();
        assert!(run_circuit(&gap, &[0.0, 0.0]).is_err());
        assert!(c.push_param(Gate::H(0), 1).is_err());
    }

    #[test]
    fn z_expectation_values() {
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(zero.expectation_z(0).unwrap(), 1.0);
        assert_eq!(one.expectation_z(0).unwrap(), -1.0);
        let h = C64::from(FRAC_1_SQRT_2);
        let bell = StateVector::from_amplitudes(vec![h, ZERO, ZERO, h]).unwrap();
        assert!(bell.expectation_z(0).unwrap().abs() < 1e-15);
        assert!(bell.expectation_z(1).unwrap().abs() < 1e-15);
        for t in [0.0, PI / 4.0, PI / 2.0, PI] {
            let s = apply_gate(&zero, &Gate::Ry(0, t)).unwrap();
            assert!((s.expectation_z(0).unwrap() - t.cos()).abs() < 1e-12);
        }
        assert!(matches!(zero.expectation_z(1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn basis_states_give_exact_signs() {
        for idx in 0..8 {
            let s = StateVector::basis(3, idx).unwrap();
            for q in 0..3 {
                let expect = if idx >> q & 1 == 0 { 1.0 } else { -1.0 };
                assert_eq!(s.expectation_z(q).unwrap(), expect);
            }
        }
    }

    #[test]
    fn oracle_small_cases() {
        let u = dense_oracle_unitary(&Circuit::new(2), &[]).unwrap();
        assert_eq!(u, CMatrix::identity(4));
        let mut c = Circuit::new(1);
        c.push(Gate::H(0));
        let u = dense_oracle_unitary(&c, &[]).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!(close(u.get(0, 0), h.into()) && close(u.get(0, 1), h.into()));
        assert!(close(u.get(1, 0), h.into()) && close(u.get(1, 1), (-h).into()));
        assert!(matches!(
            dense_oracle_unitary(&Circuit::new(5), &[]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn gate_matrices_are_unitary() {
        let gates = [
            Gate::H(0),
            Gate::X(1),
            Gate::Rx(0, 0.3),
            Gate::Ry(1, -1.7),
            Gate::Rz(0, 2.2),
            Gate::P(1, 0.9),
            Gate::Cx { control: 0, target: 1 },
            Gate::Cz(1, 0),
            Gate::Crz { control: 1, target: 0, angle: 1.3 },
        ];
        for g in gates {
            assert!(gate_unitary(&g, 2).unwrap().unitarity_error() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn extend_shifts_slots() {
        let mut a = Circuit::new(1);
        a.push_param(Gate::Rx(0, 0.0), 0).unwrap();
        let mut b = Circuit::new(1);
        b.push_param(Gate::Rz(0, 0.0), 0).unwrap();
        a.extend(&b).unwrap();
        assert_eq!(a.n_params(), 2);
        assert_eq!(a.ops()[1].slot, Some(1));
        assert!(a.extend(&Circuit::new(2)).is_err());
    }
}

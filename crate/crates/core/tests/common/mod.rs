//! Reference implementations used to cross-check the library.
//!
//! Everything here is written from the textbook definitions with plain loops
//! and owns no code from the crate under test.

#![allow(dead_code)]

use heartq::qsim::{Gate, C64};
use rand::Rng;

pub type Mat = Vec<Vec<C64>>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn eye(d: usize) -> Mat {
    (0..d)
        .map(|i| (0..d).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn matvec(a: &Mat, v: &[C64]) -> Vec<C64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn single(g: &Gate) -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match *g {
        Gate::H(_) => vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]],
        Gate::X(_) => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        Gate::Rx(_, t) => {
            let (s, co) = (t / 2.0).sin_cos();
            vec![vec![c(co, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(co, 0.0)]]
        }
        Gate::Ry(_, t) => {
            let (s, co) = (t / 2.0).sin_cos();
            vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
        }
        Gate::Rz(_, t) | Gate::Crz { angle: t, .. } => vec![
            vec![C64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), C64::from_polar(1.0, t / 2.0)],
        ],
        Gate::P(_, l) => vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), C64::from_polar(1.0, l)],
        ],
        Gate::Cx { .. } => single(&Gate::X(0)),
        Gate::Cz(..) => vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ],
    }
}

/// `⊗` over qubits n-1..0 with `pick(q)` at each position; qubit 0 is the
/// least-significant index bit, so it is the rightmost factor.
fn embed(n: usize, pick: impl Fn(usize) -> Mat) -> Mat {
    let mut m = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        m = kron(&m, &pick(q));
    }
    m
}

/// Full `2^n × 2^n` matrix of one gate.
pub fn dense_gate(g: &Gate, n: usize) -> Mat {
    let p0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]];
    let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
    let controlled = |ctl: usize, tgt: usize| {
        let u = single(g);
        let off = embed(n, |q| if q == ctl { p0.clone() } else { eye(2) });
        let on = embed(n, |q| {
            if q == ctl {
                p1.clone()
            } else if q == tgt {
                u.clone()
            } else {
                eye(2)
            }
        });
        add(&off, &on)
    };
    match *g {
        Gate::H(t) | Gate::X(t) | Gate::Rx(t, _) | Gate::Ry(t, _) | Gate::Rz(t, _) | Gate::P(t, _) => {
            let u = single(g);
            embed(n, |q| if q == t { u.clone() } else { eye(2) })
        }
        Gate::Cx { control, target } | Gate::Crz { control, target, .. } => controlled(control, target),
        Gate::Cz(a, b) => controlled(a, b),
    }
}

/// Product of dense gate matrices, last gate leftmost.
pub fn dense_circuit(gates: &[Gate], n: usize) -> Mat {
    gates.iter().fold(eye(1 << n), |acc, g| matmul(&dense_gate(g, n), &acc))
}

/// State reached from `|0…0⟩`.
pub fn dense_run(gates: &[Gate], n: usize) -> Vec<C64> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    for g in gates {
        v = matvec(&dense_gate(g, n), &v);
    }
    v
}

pub fn dense_expectation_z(v: &[C64], qubit: usize) -> f64 {
    v.iter()
        .enumerate()
        .map(|(i, a)| if i >> qubit & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

/// A gate of any kind on random qubits with a random angle.
pub fn random_gate(rng: &mut impl Rng, n: usize) -> Gate {
    let q = rng.gen_range(0..n);
    let t = rng.gen_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI);
    let kinds = if n > 1 { 9 } else { 6 };
    match rng.gen_range(0..kinds) {
        0 => Gate::H(q),
        1 => Gate::X(q),
        2 => Gate::Rx(q, t),
        3 => Gate::Ry(q, t),
        4 => Gate::Rz(q, t),
        5 => Gate::P(q, t),
        6 => Gate::Cx {
            control: q,
            target: pick_other(rng, n, q),
        },
        7 => Gate::Cz(q, pick_other(rng, n, q)),
        _ => Gate::Crz {
            control: q,
            target: pick_other(rng, n, q),
            angle: t,
        },
    }
}

fn pick_other(rng: &mut impl Rng, n: usize, q: usize) -> usize {
    let r = rng.gen_range(0..n - 1);
    if r >= q {
        r + 1
    } else {
        r
    }
}

/// Max over each `k × k` block, by direct indexing of a row-major buffer.
pub fn brute_max_pool(values: &[f64], side: usize, k: usize) -> Vec<f64> {
    let out_side = side / k;
    let mut out = vec![f64::NEG_INFINITY; out_side * out_side];
    for r in 0..side {
        for col in 0..side {
            let o = (r / k) * out_side + col / k;
            if values[r * side + col] > out[o] {
                out[o] = values[r * side + col];
            }
        }
    }
    out
}

/// Otsu by exhaustive search: try every cut of the 256-bin histogram, score it
/// by the within-class sum of squares of the bin indices, and keep the first
/// minimum. Pixels in bins above the cut become 1.
pub fn brute_otsu(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![0.0; values.len()];
    }
    let bins: Vec<usize> = values
        .iter()
        .map(|v| (((v - lo) / (hi - lo) * 256.0) as usize).min(255))
        .collect();
    let within = |t: usize| -> Option<f64> {
        let a: Vec<f64> = bins.iter().filter(|&&x| x <= t).map(|&x| x as f64).collect();
        let b: Vec<f64> = bins.iter().filter(|&&x| x > t).map(|&x| x as f64).collect();
        if a.is_empty() || b.is_empty() {
            return None;
        }
        let ss = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
        };
        Some(ss(&a) + ss(&b))
    };
    let mut best: Option<(usize, f64)> = None;
    for t in 0..256 {
        if let Some(w) = within(t) {
            // Cuts inside an empty stretch of the histogram give the same split.
            if best.map_or(true, |(_, bw)| w < bw - 1e-9 * bw.abs().max(1.0)) {
                best = Some((t, w));
            }
        }
    }
    let t = best.map(|(t, _)| t).unwrap_or(255);
    bins.iter().map(|&b| if b > t { 1.0 } else { 0.0 }).collect()
}

pub fn brute_row_means(values: &[f64], side: usize) -> Vec<f64> {
    (0..side)
        .map(|r| {
            let mut s = 0.0;
            for col in 0..side {
                s += values[r * side + col];
            }
            s / side as f64
        })
        .collect()
}

/// Fraction of points each class's nearest centroid gets right, scored on `test`.
pub fn nearest_centroid_accuracy(train: &[(Vec<f64>, bool)], test: &[(Vec<f64>, bool)]) -> f64 {
    let centroid = |pos: bool| {
        let pts: Vec<&Vec<f64>> = train.iter().filter(|(_, l)| *l == pos).map(|(x, _)| x).collect();
        let d = pts[0].len();
        (0..d)
            .map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64)
            .collect::<Vec<f64>>()
    };
    let (cp, cn) = (centroid(true), centroid(false));
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let hits = test
        .iter()
        .filter(|(x, l)| (dist(x, &cp) < dist(x, &cn)) == *l)
        .count();
    hits as f64 / test.len() as f64
}

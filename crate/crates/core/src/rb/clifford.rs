//! Clifford groups on one and two qubits, compiled into {I, +-X, +-Y, +-X/2, +-Y/2} and CZ.
//!
//! One qubit: breadth-first minimal sequences (the identity counts as one `I`).
//! Two qubits: the single-qubit, CNOT-like, iSWAP-like and SWAP-like classes, each a
//! fixed entangling skeleton preceded by a C1 (x) C1 layer.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type U2 = Matrix2<Complex64>;
pub type U4 = Matrix4<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Gate {
    I,
    X,
    MX,
    Y,
    MY,
    X2,
    MX2,
    Y2,
    MY2,
}

/// Generators used by the breadth-first search, in search order.
pub const GENERATORS: [Gate; 8] = [Gate::X, Gate::MX, Gate::Y, Gate::MY, Gate::X2, Gate::MX2, Gate::Y2, Gate::MY2];

impl Gate {
    pub fn name(self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::MX => "-X",
            Gate::Y => "Y",
            Gate::MY => "-Y",
            Gate::X2 => "X/2",
            Gate::MX2 => "-X/2",
            Gate::Y2 => "Y/2",
            Gate::MY2 => "-Y/2",
        }
    }

    pub fn unitary(self) -> U2 {
        match self {
            Gate::I => U2::identity(),
            Gate::X => rotation([1.0, 0.0, 0.0], PI),
            Gate::MX => rotation([1.0, 0.0, 0.0], -PI),
            Gate::Y => rotation([0.0, 1.0, 0.0], PI),
            Gate::MY => rotation([0.0, 1.0, 0.0], -PI),
            Gate::X2 => rotation([1.0, 0.0, 0.0], PI / 2.0),
            Gate::MX2 => rotation([1.0, 0.0, 0.0], -PI / 2.0),
            Gate::Y2 => rotation([0.0, 1.0, 0.0], PI / 2.0),
            Gate::MY2 => rotation([0.0, 1.0, 0.0], -PI / 2.0),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// cos(t/2) I - i sin(t/2) (n . sigma)
pub fn rotation(n: [f64; 3], theta: f64) -> U2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let z = |re: f64, im: f64| Complex64::new(re, im);
    U2::new(
        z(c, -s * n[2]),
        z(-s * n[1], -s * n[0]),
        z(s * n[1], -s * n[0]),
        z(c, s * n[2]),
    )
}

pub fn cz() -> U4 {
    let mut m = U4::identity();
    m[(3, 3)] = Complex64::new(-1.0, 0.0);
    m
}

pub fn kron2(a: &U2, b: &U2) -> U4 {
    U4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Time-ordered product of a gate sequence.
pub fn sequence_unitary(seq: &[Gate]) -> U2 {
    seq.iter().fold(U2::identity(), |u, g| g.unitary() * u)
}

/// Phase-normalized, rounded matrix entries, usable as a hash key.
pub fn phase_key<const N: usize>(entries: impl Iterator<Item = Complex64> + Clone) -> Vec<i64> {
    let first = entries.clone().find(|z| z.norm() > 1e-6).unwrap_or(Complex64::new(1.0, 0.0));
    let ph = first.conj() / first.norm();
    let mut key = Vec::with_capacity(2 * N);
    for z in entries {
        let w = z * ph;
        key.push((w.re * 1e6).round() as i64);
        key.push((w.im * 1e6).round() as i64);
    }
    key
}

pub fn key2(u: &U2) -> Vec<i64> {
    // row-major order so the "first" entry is well defined
    phase_key::<4>((0..4).map(move |i| u[(i / 2, i % 2)]))
}

pub fn key4(u: &U4) -> Vec<i64> {
    phase_key::<16>((0..16).map(move |i| u[(i / 4, i % 4)]))
}

#[derive(Debug, Clone, Serialize)]
pub struct Clifford1 {
    pub sequence: Vec<Gate>,
    #[serde(skip)]
    pub unitary: U2,
}

impl Clifford1 {
    pub fn gate_count(&self) -> usize {
        self.sequence.len()
    }
}

/// The 24 single-qubit Cliffords with minimal sequences, identity first.
pub fn clifford1() -> &'static [Clifford1] {
    static TABLE: OnceLock<Vec<Clifford1>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut out = vec![Clifford1 { sequence: vec![Gate::I], unitary: U2::identity() }];
        seen.insert(key2(&U2::identity()), 0);
        let mut queue = VecDeque::from([(U2::identity(), Vec::<Gate>::new())]);
        while let Some((u, seq)) = queue.pop_front() {
            for g in GENERATORS {
                let v = g.unitary() * u;
                let k = key2(&v);
                if seen.contains_key(&k) {
                    continue;
                }
                let mut s = seq.clone();
                s.push(g);
                seen.insert(k, out.len());
                out.push(Clifford1 { sequence: s.clone(), unitary: v });
                queue.push_back((v, s));
            }
        }
        out
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Op {
    /// Single-qubit gate on qubit 0 (first tensor factor) or 1.
    Single(u8, Gate),
    Cz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CliffordClass {
    Single,
    CnotLike,
    IswapLike,
    SwapLike,
}

#[derive(Debug, Clone, Serialize)]
pub struct Clifford2 {
    pub class: CliffordClass,
    /// Time-ordered operations.
    pub ops: Vec<Op>,
    #[serde(skip)]
    pub unitary: U4,
}

impl Clifford2 {
    pub fn single_count(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, Op::Single(..))).count()
    }

    pub fn cz_count(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, Op::Cz)).count()
    }
}

pub fn ops_unitary(ops: &[Op]) -> U4 {
    let cz = cz();
    ops.iter().fold(U4::identity(), |u, op| match op {
        Op::Cz => cz * u,
        Op::Single(0, g) => kron2(&g.unitary(), &U2::identity()) * u,
        Op::Single(_, g) => kron2(&U2::identity(), &g.unitary()) * u,
    })
}

fn layer(a: &[Gate], b: &[Gate]) -> Vec<Op> {
    a.iter().map(|g| Op::Single(0, *g)).chain(b.iter().map(|g| Op::Single(1, *g))).collect()
}

use Gate::*;

/// Layers closing the CNOT-like and iSWAP-like classes.
pub const S1: [&[Gate]; 3] = [&[I], &[Y2, X2], &[MX2, MY2]];
pub const S1_Y2: [&[Gate]; 3] = [&[Y2], &[Y, X2], &[Y2, MX2, MY2]];
pub const S1_X2: [&[Gate]; 3] = [&[X2], &[X2, Y2, X2], &[MY2]];

/// All 11520 two-qubit Cliffords, each with its compiled sequence.
pub fn clifford2() -> &'static [Clifford2] {
    static TABLE: OnceLock<Vec<Clifford2>> = OnceLock::new();
    TABLE.get_or_init(|| build_clifford2().expect("two-qubit Clifford table closes"))
}

fn build_clifford2() -> Result<Vec<Clifford2>> {
    let c1 = clifford1();
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    let mut out = Vec::with_capacity(11520);
    let mut push = |class, ops: Vec<Op>, out: &mut Vec<Clifford2>| -> Result<()> {
        let u = ops_unitary(&ops);
        if seen.insert(key4(&u), ()).is_some() {
            return Err(Error::Closure(format!("duplicate element in class {class:?}")));
        }
        out.push(Clifford2 { class, ops, unitary: u });
        Ok(())
    };
    for a in c1 {
        for b in c1 {
            let base = layer(&a.sequence, &b.sequence);
            push(CliffordClass::Single, base.clone(), &mut out)?;
            for s in S1 {
                for t in S1_Y2 {
                    let mut ops = base.clone();
                    ops.push(Op::Cz);
                    ops.extend(layer(s, t));
                    push(CliffordClass::CnotLike, ops, &mut out)?;
                }
            }
            for s in S1_Y2 {
                for t in S1_X2 {
                    let mut ops = base.clone();
                    ops.push(Op::Cz);
                    ops.extend(layer(&[Y2], &[MX2]));
                    ops.push(Op::Cz);
                    ops.extend(layer(s, t));
                    push(CliffordClass::IswapLike, ops, &mut out)?;
                }
            }
            let mut ops = base.clone();
            for (x, y) in [(MY2, Y2), (Y2, MY2), (I, Y2)] {
                ops.push(Op::Cz);
                ops.extend(layer(&[x], &[y]));
            }
            push(CliffordClass::SwapLike, ops, &mut out)?;
        }
    }
    Ok(out)
}

/// Lookup from phase key to table index.
pub struct CliffordIndex {
    map: HashMap<Vec<i64>, usize>,
}

impl CliffordIndex {
    pub fn one_qubit() -> Self {
        CliffordIndex { map: clifford1().iter().enumerate().map(|(i, c)| (key2(&c.unitary), i)).collect() }
    }

    pub fn two_qubit() -> Self {
        CliffordIndex { map: clifford2().iter().enumerate().map(|(i, c)| (key4(&c.unitary), i)).collect() }
    }

    pub fn find2(&self, u: &U2) -> Result<usize> {
        self.map.get(&key2(u)).copied().ok_or_else(|| Error::Closure("product left the 1-qubit group".into()))
    }

    pub fn find4(&self, u: &U4) -> Result<usize> {
        self.map.get(&key4(u)).copied().ok_or_else(|| Error::Closure("product left the 2-qubit group".into()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub n_qubits: u32,
    pub size: usize,
    pub mean_single_qubit_gates: f64,
    pub mean_cz: f64,
    pub class_counts: Vec<(String, usize)>,
}

pub fn build_clifford_group(n_qubits: u32) -> Result<DecompositionSummary> {
    match n_qubits {
        1 => {
            let t = clifford1();
            Ok(DecompositionSummary {
                n_qubits,
                size: t.len(),
                mean_single_qubit_gates: t.iter().map(|c| c.gate_count()).sum::<usize>() as f64 / t.len() as f64,
                mean_cz: 0.0,
                class_counts: vec![("single".into(), t.len())],
            })
        }
        2 => {
            let t = clifford2();
            let count = |k| t.iter().filter(|c| c.class == k).count();
            Ok(DecompositionSummary {
                n_qubits,
                size: t.len(),
                mean_single_qubit_gates: t.iter().map(|c| c.single_count()).sum::<usize>() as f64 / t.len() as f64,
                mean_cz: t.iter().map(|c| c.cz_count()).sum::<usize>() as f64 / t.len() as f64,
                class_counts: vec![
                    ("single".into(), count(CliffordClass::Single)),
                    ("cnot-like".into(), count(CliffordClass::CnotLike)),
                    ("iswap-like".into(), count(CliffordClass::IswapLike)),
                    ("swap-like".into(), count(CliffordClass::SwapLike)),
                ],
            })
        }
        _ => Err(Error::invalid("n_qubits", "must be 1 or 2")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_unitary() {
        for g in GENERATORS {
            let u = g.unitary();
            assert!((u.adjoint() * u - U2::identity()).norm() < 1e-14);
        }
    }

    #[test]
    fn one_qubit_closure_exhaustive() {
        let t = clifford1();
        let idx = CliffordIndex::one_qubit();
        for a in t {
            idx.find2(&a.unitary.adjoint()).unwrap();
            for b in t {
                idx.find2(&(a.unitary * b.unitary)).unwrap();
            }
        }
    }

    #[test]
    fn sequences_recompose() {
        for c in clifford1() {
            assert_eq!(key2(&sequence_unitary(&c.sequence)), key2(&c.unitary));
        }
    }

    #[test]
    fn phase_key_ignores_global_phase() {
        let u = Gate::X2.unitary() * Gate::Y2.unitary();
        let v = u * Complex64::from_polar(1.0, 0.77);
        assert_eq!(key2(&u), key2(&v));
    }
}

//! Density-matrix simulation of standard and interleaved randomized benchmarking.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::clifford::{clifford1, clifford2, cz, phase_key, Gate, Op};
use super::fit::{
    clifford_fidelity, fit_decay, fit_population, fit_rb, gate_fidelity, interleaved_fidelity, ExpFit,
    LeakageFit, Weights,
};
use crate::budget::leakage_kraus;
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Lengths used for interleaved runs unless given.
pub const DEFAULT_LENGTHS: [usize; 12] = [1, 3, 6, 10, 15, 20, 30, 45, 60, 80, 100, 150];

#[derive(Debug, Clone)]
pub enum Channel {
    Identity,
    /// `rho_c -> p rho_c + (1 - p) Tr(rho_c) I/d` on the computational block.
    Depolarizing(f64),
    /// Kraus operators on the full simulated space.
    Kraus(Vec<CMat>),
}

/// Depolarizing noise after every physical gate instead of every Clifford.
#[derive(Debug, Clone, Copy)]
pub struct GateNoise {
    /// Single-qubit depolarizing parameter on the qubit acted on.
    pub single: f64,
    /// Two-qubit depolarizing parameter after each CZ.
    pub cz: f64,
}

#[derive(Debug, Clone)]
pub struct InterleavedGate {
    pub name: String,
    /// Ideal gate on the computational space (must be a Clifford).
    pub unitary: CMat,
    pub channel: Channel,
}

#[derive(Debug, Clone)]
pub struct RbSpec {
    pub n_qubits: u32,
    pub lengths: Vec<usize>,
    pub randomizations: usize,
    pub seed: u64,
    pub clifford_noise: Channel,
    pub gate_noise: Option<GateNoise>,
    pub interleaved: Option<InterleavedGate>,
    /// Non-computational levels appended to the simulated space.
    pub leakage_levels: usize,
    /// Finite-shot sampling of each sequence's survival; exact probabilities if `None`.
    pub shots: Option<u32>,
}

impl RbSpec {
    pub fn new(n_qubits: u32, lengths: Vec<usize>, randomizations: usize, seed: u64) -> Self {
        RbSpec {
            n_qubits,
            lengths,
            randomizations,
            seed,
            clifford_noise: Channel::Identity,
            gate_noise: None,
            interleaved: None,
            leakage_levels: 0,
            shots: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RbResult {
    pub lengths: Vec<usize>,
    pub survival: Vec<f64>,
    pub survival_sem: Vec<f64>,
    pub population: Vec<f64>,
    pub fit: ExpFit,
    pub f_clifford: f64,
    pub f_clifford_err: f64,
    pub gates_per_clifford: f64,
    pub f_gate: f64,
    pub f_gate_err: f64,
}

struct Group {
    d: usize,
    unitaries: Vec<CMat>,
    ops: Vec<Vec<Op>>,
    index: HashMap<Vec<i64>, usize>,
    gates_per_clifford: f64,
}

fn key(m: &CMat) -> Vec<i64> {
    let n = m.nrows();
    phase_key::<16>((0..n * n).map(move |i| m[(i / n, i % n)]))
}

impl Group {
    fn new(n_qubits: u32) -> Result<Self> {
        let (d, unitaries, ops): (usize, Vec<CMat>, Vec<Vec<Op>>) = match n_qubits {
            1 => (
                2,
                clifford1().iter().map(|c| CMat::from_fn(2, 2, |r, k| c.unitary[(r, k)])).collect(),
                clifford1().iter().map(|c| c.sequence.iter().map(|g| Op::Single(0, *g)).collect()).collect(),
            ),
            2 => (
                4,
                clifford2().iter().map(|c| CMat::from_fn(4, 4, |r, k| c.unitary[(r, k)])).collect(),
                clifford2().iter().map(|c| c.ops.clone()).collect(),
            ),
            _ => return Err(Error::invalid("n_qubits", "must be 1 or 2")),
        };
        let index = unitaries.iter().enumerate().map(|(i, u)| (key(u), i)).collect();
        let gates_per_clifford = if n_qubits == 1 {
            ops.iter().map(|o| o.len()).sum::<usize>() as f64 / ops.len() as f64
        } else {
            let t = clifford2();
            t.iter().map(|c| c.single_count() + c.cz_count()).sum::<usize>() as f64 / t.len() as f64
        };
        Ok(Group { d, unitaries, ops, index, gates_per_clifford })
    }

    fn find(&self, u: &CMat) -> Result<usize> {
        self.index
            .get(&key(u))
            .copied()
            .ok_or_else(|| Error::Closure("sequence product is not a Clifford".into()))
    }
}

fn embed(u: &CMat, dim: usize) -> CMat {
    let mut m = CMat::identity(dim, dim);
    m.view_mut((0, 0), (u.nrows(), u.ncols())).copy_from(u);
    m
}

fn conj(u: &CMat, rho: &CMat) -> CMat {
    u * rho * u.adjoint()
}

fn check_channel(ch: &Channel, dim: usize, d: usize) -> Result<()> {
    match ch {
        Channel::Identity => Ok(()),
        Channel::Depolarizing(p) => {
            let lo = -1.0 / (d * d - 1) as f64;
            if *p < lo || *p > 1.0 {
                return Err(Error::invalid("depolarizing", format!("parameter {p} outside [{lo}, 1]")));
            }
            Ok(())
        }
        Channel::Kraus(ks) => {
            let mut s = CMat::zeros(dim, dim);
            for k in ks {
                if k.nrows() != dim || k.ncols() != dim {
                    return Err(Error::invalid("kraus", format!("operator is not {dim}x{dim}")));
                }
                s += k.adjoint() * k;
            }
            let defect = (s - CMat::identity(dim, dim)).norm();
            if defect > 1e-10 {
                return Err(Error::NotTracePreserving(defect));
            }
            Ok(())
        }
    }
}

fn depolarize(rho: &mut CMat, p: f64, d: usize) {
    let dim = rho.nrows();
    let tr: Complex64 = (0..d).map(|i| rho[(i, i)]).sum();
    let off = (1.0 - (d * d - 1) as f64 * (1.0 - p) / (d * d) as f64).max(0.0).sqrt();
    for r in 0..dim {
        for c in 0..dim {
            match (r < d, c < d) {
                (true, true) => {
                    rho[(r, c)] *= p;
                    if r == c {
                        rho[(r, c)] += tr * ((1.0 - p) / d as f64);
                    }
                }
                (false, false) => {}
                _ => rho[(r, c)] *= off,
            }
        }
    }
}

fn apply(ch: &Channel, rho: &CMat, d: usize) -> CMat {
    match ch {
        Channel::Identity => rho.clone(),
        Channel::Depolarizing(p) => {
            let mut r = rho.clone();
            depolarize(&mut r, *p, d);
            r
        }
        Channel::Kraus(ks) => ks.iter().map(|k| conj(k, rho)).fold(CMat::zeros(rho.nrows(), rho.ncols()), |a, b| a + b),
    }
}

fn pauli(i: usize) -> CMat {
    let (z, o, im) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::i());
    match i {
        0 => CMat::identity(2, 2),
        1 => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMat::from_row_slice(2, 2, &[z, -im, im, z]),
        _ => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Depolarizing Kraus set on one qubit of an `n_qubits` register, identity on leakage levels.
fn local_depolarizing(p: f64, qubit: u8, n_qubits: u32, dim: usize) -> Vec<CMat> {
    let q = (1.0 - p) / 4.0;
    let d = 1usize << n_qubits;
    (0..4)
        .map(|i| {
            let local = pauli(i);
            let op = if n_qubits == 1 {
                local
            } else if qubit == 0 {
                local.kronecker(&CMat::identity(2, 2))
            } else {
                CMat::identity(2, 2).kronecker(&local)
            };
            let w = if i == 0 { (1.0 - 3.0 * q).sqrt() } else { q.sqrt() };
            let mut k = CMat::zeros(dim, dim);
            k.view_mut((0, 0), (d, d)).copy_from(&(op * Complex64::new(w, 0.0)));
            if i == 0 {
                for l in d..dim {
                    k[(l, l)] = Complex64::new(1.0, 0.0);
                }
            }
            k
        })
        .collect()
}

struct Prepared {
    group: Group,
    dim: usize,
    embedded: Vec<CMat>,
    gate_ops: HashMap<Op, CMat>,
    local_noise: Vec<Vec<CMat>>,
}

fn prepare(spec: &RbSpec) -> Result<Prepared> {
    if spec.lengths.is_empty() || spec.randomizations == 0 {
        return Err(Error::invalid("lengths", "need at least one length and one randomization"));
    }
    let group = Group::new(spec.n_qubits)?;
    let d = group.d;
    let dim = d + spec.leakage_levels;
    check_channel(&spec.clifford_noise, dim, d)?;
    if let Some(g) = &spec.interleaved {
        check_channel(&g.channel, dim, d)?;
        if g.unitary.nrows() != d {
            return Err(Error::invalid("interleaved", "gate dimension differs from the register"));
        }
        group.find(&g.unitary)?;
    }
    let embedded = group.unitaries.iter().map(|u| embed(u, dim)).collect();
    let mut gate_ops = HashMap::new();
    let mut local_noise = Vec::new();
    if let Some(gn) = spec.gate_noise {
        for ch in [Channel::Depolarizing(gn.single), Channel::Depolarizing(gn.cz)] {
            check_channel(&ch, 2, 2)?;
        }
        for ops in &group.ops {
            for op in ops {
                gate_ops.entry(*op).or_insert_with(|| {
                    let u = match op {
                        Op::Cz => CMat::from_fn(4, 4, |r, c| cz()[(r, c)]),
                        Op::Single(q, g) => single_on(*g, *q, spec.n_qubits),
                    };
                    embed(&u, dim)
                });
            }
        }
        local_noise = (0..spec.n_qubits as u8).map(|q| local_depolarizing(gn.single, q, spec.n_qubits, dim)).collect();
    }
    Ok(Prepared { group, dim, embedded, gate_ops, local_noise })
}

fn single_on(g: Gate, q: u8, n_qubits: u32) -> CMat {
    let u = g.unitary();
    let u = CMat::from_fn(2, 2, |r, c| u[(r, c)]);
    match (n_qubits, q) {
        (1, _) => u,
        (_, 0) => u.kronecker(&CMat::identity(2, 2)),
        _ => CMat::identity(2, 2).kronecker(&u),
    }
}

impl Prepared {
    fn clifford(&self, spec: &RbSpec, i: usize, rho: &CMat) -> CMat {
        let d = self.group.d;
        match spec.gate_noise {
            None => apply(&spec.clifford_noise, &conj(&self.embedded[i], rho), d),
            Some(gn) => {
                let mut r = rho.clone();
                for op in &self.group.ops[i] {
                    r = conj(&self.gate_ops[op], &r);
                    r = match op {
                        Op::Cz => apply(&Channel::Depolarizing(gn.cz), &r, d),
                        Op::Single(q, _) => apply(&Channel::Kraus(self.local_noise[*q as usize].clone()), &r, d),
                    };
                }
                r
            }
        }
    }

    /// Final (survival, computational population) of one random sequence.
    fn sequence(&self, spec: &RbSpec, m: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
        let d = self.group.d;
        let mut rho = CMat::zeros(self.dim, self.dim);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        let mut total = CMat::identity(d, d);
        let n = self.group.unitaries.len();
        for _ in 0..m {
            let i = rng.gen_range(0..n);
            rho = self.clifford(spec, i, &rho);
            total = &self.group.unitaries[i] * &total;
            if let Some(g) = &spec.interleaved {
                rho = apply(&g.channel, &conj(&embed(&g.unitary, self.dim), &rho), d);
                total = &g.unitary * &total;
            }
            // snap to the table so rounding does not accumulate
            total = self.group.unitaries[self.group.find(&total)?].clone();
        }
        let rec = self.group.find(&total.adjoint())?;
        rho = self.clifford(spec, rec, &rho);
        let survival = rho[(0, 0)].re;
        let pop = (0..d).map(|i| rho[(i, i)].re).sum();
        Ok((survival, pop))
    }
}

fn mean_sem(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct Raw {
    survival: Vec<f64>,
    sem: Vec<f64>,
    population: Vec<f64>,
    population_sem: Vec<f64>,
    /// Per-sequence `survival - population / d`, whose average decays as a single
    /// exponential even with leakage.
    difference: Vec<f64>,
    difference_sem: Vec<f64>,
}

fn run_raw(spec: &RbSpec, stream_offset: u64) -> Result<(Raw, f64)> {
    let prep = prepare(spec)?;
    let d = (1usize << spec.n_qubits) as f64;
    let mut raw = Raw {
        survival: vec![],
        sem: vec![],
        population: vec![],
        population_sem: vec![],
        difference: vec![],
        difference_sem: vec![],
    };
    for (li, &m) in spec.lengths.iter().enumerate() {
        let samples: Vec<(f64, f64)> = (0..spec.randomizations)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(stream_offset + ((li as u64) << 32) + r as u64);
                let (s, p) = prep.sequence(spec, m, &mut rng)?;
                let s = match spec.shots {
                    None => s,
                    Some(k) => (0..k).filter(|_| rng.gen::<f64>() < s).count() as f64 / k as f64,
                };
                Ok((s, p))
            })
            .collect::<Result<_>>()?;
        let s: Vec<f64> = samples.iter().map(|x| x.0).collect();
        let p: Vec<f64> = samples.iter().map(|x| x.1).collect();
        let (sm, se) = mean_sem(&s);
        let (pm, pe) = mean_sem(&p);
        let diff: Vec<f64> = s.iter().zip(&p).map(|(a, b)| a - b / d).collect();
        let (dm, de) = mean_sem(&diff);
        raw.difference.push(dm);
        raw.difference_sem.push(de);
        raw.survival.push(sm);
        raw.sem.push(se);
        raw.population.push(pm);
        raw.population_sem.push(pe);
    }
    Ok((raw, prep.group.gates_per_clifford))
}

fn result_from(spec: &RbSpec, raw: &Raw, fit: ExpFit, gpc: f64) -> RbResult {
    let d = 1usize << spec.n_qubits;
    let (fc, fce) = clifford_fidelity(fit.p, fit.p_err, d);
    let (fg, fge) = gate_fidelity(fit.p, fit.p_err, d, gpc);
    RbResult {
        lengths: spec.lengths.clone(),
        survival: raw.survival.clone(),
        survival_sem: raw.sem.clone(),
        population: raw.population.clone(),
        fit,
        f_clifford: fc,
        f_clifford_err: fce,
        gates_per_clifford: gpc,
        f_gate: fg,
        f_gate_err: fge,
    }
}

fn lengths_f64(spec: &RbSpec) -> Vec<f64> {
    spec.lengths.iter().map(|&m| m as f64).collect()
}

/// Standard (or, with `spec.interleaved`, plain interleaved) benchmarking.
pub fn simulate_rb(spec: &RbSpec) -> Result<RbResult> {
    let (raw, gpc) = run_raw(spec, 0)?;
    let fit = fit_rb(&lengths_f64(spec), &raw.survival, Weights::Relative(&raw.sem))?;
    Ok(result_from(spec, &raw, fit, gpc))
}

#[derive(Debug, Clone, Serialize)]
pub struct IrbResult {
    pub reference: RbResult,
    pub interleaved: RbResult,
    pub leakage: LeakageFit,
    /// Decay of `survival - population / d` in the interleaved run.
    pub p_interleaved: f64,
    pub p_interleaved_err: f64,
    /// Interleaved fidelity with the leakage-per-gate correction.
    pub f_gate: f64,
    pub f_gate_err: f64,
    /// `1 - (d-1)(1 - p_int/p_ref)/d` using the plain interleaved fit.
    pub f_gate_plain: f64,
    pub f_gate_plain_err: f64,
}

/// Reference and interleaved runs with the same seed, plus leakage-aware extraction.
pub fn simulate_irb(spec: &RbSpec) -> Result<IrbResult> {
    let Some(_) = &spec.interleaved else {
        return Err(Error::invalid("interleaved", "an interleaved gate is required"));
    };
    let d = 1usize << spec.n_qubits;
    let x = lengths_f64(spec);
    let reference_spec = RbSpec { interleaved: None, ..spec.clone() };
    let reference = simulate_rb(&reference_spec)?;

    let (raw, gpc) = run_raw(spec, 1 << 62)?;
    let plain = fit_rb(&x, &raw.survival, Weights::Relative(&raw.sem))?;
    let leakage = fit_population(&x, &raw.population, Weights::Relative(&raw.population_sem))?;
    let (p_int, p_int_err) = if leakage.lambda < 1.0 - 1e-12 {
        let f = fit_decay(&x, &raw.difference, Weights::Relative(&raw.difference_sem))?;
        (f.p, f.p_err)
    } else {
        (plain.p, plain.p_err)
    };
    let (pr, pre) = (reference.fit.p, reference.fit.p_err);
    let (f_plain, e_plain) = interleaved_fidelity(pr, pre, plain.p, plain.p_err, d);
    let (f, e) = interleaved_fidelity(pr, pre, p_int, p_int_err, d);
    let interleaved = result_from(spec, &raw, plain, gpc);
    Ok(IrbResult {
        f_gate: f - leakage.leakage_rate / d as f64,
        f_gate_err: e,
        f_gate_plain: f_plain,
        f_gate_plain_err: e_plain,
        p_interleaved: p_int,
        p_interleaved_err: p_int_err,
        reference,
        interleaved,
        leakage,
    })
}

/// Interleaved CZ with relaxation between |11> and one non-computational level at
/// `x = t_g / T1_alpha`, reference Cliffords depolarized with `p_ref`.
pub fn cz_leakage_irb_spec(x: f64, p_ref: f64, randomizations: usize, seed: u64) -> RbSpec {
    let u = CMat::from_fn(4, 4, |r, c| cz()[(r, c)]);
    RbSpec {
        n_qubits: 2,
        lengths: DEFAULT_LENGTHS.to_vec(),
        randomizations,
        seed,
        clifford_noise: Channel::Depolarizing(p_ref),
        gate_noise: None,
        interleaved: Some(InterleavedGate { name: "CZ".into(), unitary: u, channel: Channel::Kraus(leakage_kraus(x).to_vec()) }),
        leakage_levels: 1,
        shots: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_survival_is_one() {
        for n in [1, 2] {
            let r = simulate_rb(&RbSpec::new(n, vec![1, 2, 5, 10, 20], 4, 3)).unwrap();
            assert!(r.survival.iter().all(|s| (s - 1.0).abs() < 1e-10), "{:?}", r.survival);
            assert_eq!(r.fit.p, 1.0);
        }
    }

    #[test]
    fn depolarizing_recovers_p() {
        let mut s = RbSpec::new(1, vec![1, 5, 10, 20, 40, 60, 80, 100, 150, 200], 20, 11);
        s.clifford_noise = Channel::Depolarizing(0.995);
        let r = simulate_rb(&s).unwrap();
        assert!((r.fit.p - 0.995).abs() < 1e-9, "{:?}", r.fit);
    }

    #[test]
    fn non_cptp_rejected() {
        let mut s = RbSpec::new(1, vec![1, 2, 3, 4], 2, 0);
        s.clifford_noise = Channel::Kraus(vec![CMat::identity(2, 2) * Complex64::new(0.9, 0.0)]);
        assert!(matches!(simulate_rb(&s), Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn seeded_runs_repeat() {
        let mut s = RbSpec::new(2, vec![1, 4, 8, 16], 5, 42);
        s.gate_noise = Some(GateNoise { single: 0.999, cz: 0.99 });
        let a = simulate_rb(&s).unwrap();
        let b = simulate_rb(&s).unwrap();
        assert_eq!(a.survival, b.survival);
    }
}

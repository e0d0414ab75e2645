//! Exponential-decay fits for benchmarking data.
//!
//! Models are linear in every parameter except one decay constant, so the decay
//! constant is found by Brent search on the projected residual and the result is
//! polished with Gauss-Newton on all parameters.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::brent_min;

#[derive(Debug, Clone, Copy)]
pub enum Weights<'a> {
    /// Unit weights; covariance scaled by the residual variance.
    None,
    /// Per-point standard errors; covariance scaled by the residual variance.
    Relative(&'a [f64]),
    /// Per-point standard errors taken as exact.
    Absolute(&'a [f64]),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpFit {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub a_err: f64,
    pub p_err: f64,
    pub b_err: f64,
    /// y - model at each point.
    pub residuals: Vec<f64>,
    pub ssr: f64,
}

/// `y = offset(q, x) + sum_j c_j col_j(q, x)`, with analytic q-derivatives.
struct Separable<'f> {
    offset: &'f dyn Fn(f64, f64) -> (f64, f64),
    cols: &'f dyn Fn(f64, f64) -> Vec<(f64, f64)>,
}

struct SeparableFit {
    q: f64,
    coeffs: Vec<f64>,
    /// Covariance over (coeffs..., q).
    cov: DMatrix<f64>,
    residuals: Vec<f64>,
    ssr: f64,
}

fn weights_of(w: Weights, n: usize) -> Result<(Vec<f64>, bool)> {
    let (s, absolute) = match w {
        Weights::None => return Ok((vec![1.0; n], false)),
        Weights::Relative(s) => (s, false),
        Weights::Absolute(s) => (s, true),
    };
    if s.len() != n {
        return Err(Error::invalid("sigma", "length differs from data"));
    }
    if s.iter().all(|&v| v > 1e-15 && v.is_finite()) {
        Ok((s.iter().map(|v| 1.0 / (v * v)).collect(), absolute))
    } else if absolute {
        Err(Error::invalid("sigma", "absolute weights must be positive"))
    } else {
        Ok((vec![1.0; n], false))
    }
}

impl Separable<'_> {
    fn linear(&self, q: f64, x: &[f64], y: &[f64], w: &[f64]) -> (Vec<f64>, f64) {
        let n = x.len();
        let k = (self.cols)(q, x[0]).len();
        let mut a = DMatrix::zeros(n, k);
        let mut r = DVector::zeros(n);
        for i in 0..n {
            let sw = w[i].sqrt();
            for (j, (v, _)) in (self.cols)(q, x[i]).into_iter().enumerate() {
                a[(i, j)] = v * sw;
            }
            r[i] = (y[i] - (self.offset)(q, x[i]).0) * sw;
        }
        let svd = a.clone().svd(true, true);
        let c = svd.solve(&r, 1e-12).unwrap_or_else(|_| DVector::zeros(k));
        let ssr = (r - a * &c).norm_squared();
        (c.iter().cloned().collect(), ssr)
    }

    fn eval(&self, q: f64, c: &[f64], x: f64) -> (f64, Vec<f64>) {
        let (mut v, mut dq) = (self.offset)(q, x);
        let cols = (self.cols)(q, x);
        let mut grad = Vec::with_capacity(c.len() + 1);
        for (j, (f, df)) in cols.into_iter().enumerate() {
            v += c[j] * f;
            dq += c[j] * df;
            grad.push(f);
        }
        grad.push(dq);
        (v, grad)
    }

    fn fit(&self, x: &[f64], y: &[f64], weights: Weights, lo: f64, hi: f64) -> Result<SeparableFit> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::invalid("lengths", "x and y differ in length"));
        }
        let (w, absolute) = weights_of(weights, n)?;
        // coarse scan so Brent starts in the right basin
        let grid = 200;
        let mut best = (lo, f64::INFINITY);
        for i in 0..=grid {
            let q = lo + (hi - lo) * i as f64 / grid as f64;
            let s = self.linear(q, x, y, &w).1;
            if s < best.1 {
                best = (q, s);
            }
        }
        let step = (hi - lo) / grid as f64;
        let (a, b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
        let (mut q, _) = brent_min(|q| Ok(self.linear(q, x, y, &w).1), a, b, 1e-12, 500)?;
        let mut c = self.linear(q, x, y, &w).0;
        let k = c.len() + 1;

        let jac = |q: f64, c: &[f64]| {
            let mut j = DMatrix::zeros(n, k);
            let mut r = DVector::zeros(n);
            for i in 0..n {
                let (v, g) = self.eval(q, c, x[i]);
                let sw = w[i].sqrt();
                r[i] = (y[i] - v) * sw;
                for (col, gv) in g.into_iter().enumerate() {
                    j[(i, col)] = gv * sw;
                }
            }
            (j, r)
        };
        for _ in 0..50 {
            let (j, r) = jac(q, &c);
            let Some(delta) = j.clone().svd(true, true).solve(&r, 1e-14).ok() else { break };
            let qn = (q + delta[k - 1]).clamp(lo, hi);
            let cn: Vec<f64> = c.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let (_, rn) = jac(qn, &cn);
            if rn.norm_squared() > r.norm_squared() {
                break;
            }
            let done = (qn - q).abs() < 1e-16 * q.abs().max(1.0);
            q = qn;
            c = cn;
            if done {
                break;
            }
        }
        let (j, r) = jac(q, &c);
        let ssr = r.norm_squared();
        let dof = n.saturating_sub(k).max(1) as f64;
        let jtj = j.transpose() * &j;
        let cov = match jtj.clone().try_inverse() {
            Some(inv) if absolute => inv,
            Some(inv) => inv * (ssr / dof),
            None => DMatrix::from_element(k, k, f64::NAN),
        };
        let residuals = (0..n).map(|i| y[i] - self.eval(q, &c, x[i]).0).collect();
        Ok(SeparableFit { q, coeffs: c, cov, residuals, ssr })
    }
}

fn distinct(x: &[f64]) -> usize {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v.len()
}

fn pow_d(p: f64, m: f64) -> (f64, f64) {
    let v = p.powf(m);
    let d = if m == 0.0 { 0.0 } else { m * p.powf(m - 1.0) };
    (v, d)
}

/// Fit `y = A p^m + B` with `0 <= p <= 1`.
pub fn fit_rb(lengths: &[f64], y: &[f64], weights: Weights) -> Result<ExpFit> {
    if distinct(lengths) < 4 {
        return Err(Error::Fit("at least 4 distinct sequence lengths are required".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    if y.iter().all(|v| (v - mean).abs() < 1e-12) {
        // flat data: no decay
        return Ok(ExpFit {
            a: 0.0,
            p: 1.0,
            b: mean,
            a_err: 0.0,
            p_err: 0.0,
            b_err: 0.0,
            residuals: y.iter().map(|v| v - mean).collect(),
            ssr: y.iter().map(|v| (v - mean).powi(2)).sum(),
        });
    }
    let offset = |_: f64, _: f64| (0.0, 0.0);
    let cols = |p: f64, m: f64| vec![pow_d(p, m), (1.0, 0.0)];
    let model = Separable { offset: &offset, cols: &cols };
    let f = model.fit(lengths, y, weights, 0.0, 1.0)?;
    Ok(ExpFit {
        a: f.coeffs[0],
        b: f.coeffs[1],
        p: f.q,
        a_err: f.cov[(0, 0)].sqrt(),
        b_err: f.cov[(1, 1)].sqrt(),
        p_err: f.cov[(2, 2)].sqrt(),
        residuals: f.residuals,
        ssr: f.ssr,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LeakageFit {
    /// Computational population `A_c + (1 - A_c) lambda^m`.
    pub a_c: f64,
    pub lambda: f64,
    pub lambda_err: f64,
    /// Leakage per gate `(1 - A_c)(1 - lambda)`.
    pub leakage_rate: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_population(lengths: &[f64], pop: &[f64], weights: Weights) -> Result<LeakageFit> {
    if distinct(lengths) < 3 {
        return Err(Error::Fit("at least 3 distinct sequence lengths are required".into()));
    }
    if pop.iter().all(|v| (v - 1.0).abs() < 1e-12) {
        return Ok(LeakageFit {
            a_c: 1.0,
            lambda: 1.0,
            lambda_err: 0.0,
            leakage_rate: 0.0,
            residuals: vec![0.0; pop.len()],
        });
    }
    let offset = |l: f64, m: f64| pow_d(l, m);
    let cols = |l: f64, m: f64| {
        let (v, d) = pow_d(l, m);
        vec![(1.0 - v, -d)]
    };
    let model = Separable { offset: &offset, cols: &cols };
    let f = model.fit(lengths, pop, weights, 0.0, 1.0)?;
    let a_c = f.coeffs[0];
    Ok(LeakageFit {
        a_c,
        lambda: f.q,
        lambda_err: f.cov[(1, 1)].sqrt(),
        leakage_rate: (1.0 - a_c) * (1.0 - f.q),
        residuals: f.residuals,
    })
}

/// Fit `y = A p^m` (no offset) with `0 <= p <= 1`; `b` and `b_err` are zero.
pub fn fit_decay(lengths: &[f64], y: &[f64], weights: Weights) -> Result<ExpFit> {
    if distinct(lengths) < 3 {
        return Err(Error::Fit("at least 3 distinct sequence lengths are required".into()));
    }
    let offset = |_: f64, _: f64| (0.0, 0.0);
    let cols = |p: f64, m: f64| vec![pow_d(p, m)];
    let model = Separable { offset: &offset, cols: &cols };
    let f = model.fit(lengths, y, weights, 0.0, 1.0)?;
    Ok(ExpFit {
        a: f.coeffs[0],
        b: 0.0,
        p: f.q,
        a_err: f.cov[(0, 0)].sqrt(),
        b_err: 0.0,
        p_err: f.cov[(1, 1)].sqrt(),
        residuals: f.residuals,
        ssr: f.ssr,
    })
}

/// `1 - (1 - 1/d)(1 - p)` and its standard error.
pub fn clifford_fidelity(p: f64, p_err: f64, d: usize) -> (f64, f64) {
    let k = 1.0 - 1.0 / d as f64;
    (1.0 - k * (1.0 - p), k * p_err)
}

/// Per physical gate, given the mean number of gates per Clifford.
pub fn gate_fidelity(p: f64, p_err: f64, d: usize, gates_per_clifford: f64) -> (f64, f64) {
    let k = (1.0 - 1.0 / d as f64) / gates_per_clifford;
    (1.0 - k * (1.0 - p), k * p_err)
}

/// `1 - (d - 1)(1 - p_int/p_ref)/d` with first-order error propagation.
pub fn interleaved_fidelity(p_ref: f64, p_ref_err: f64, p_int: f64, p_int_err: f64, d: usize) -> (f64, f64) {
    let k = (d as f64 - 1.0) / d as f64;
    let f = 1.0 - k * (1.0 - p_int / p_ref);
    let e = k * ((p_int_err / p_ref).powi(2) + (p_int * p_ref_err / (p_ref * p_ref)).powi(2)).sqrt();
    (f, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_synthetic_recovered() {
        let m: Vec<f64> = [1.0, 5.0, 10.0, 20.0, 40.0, 80.0, 120.0].to_vec();
        let (a, p, b) = (0.7, 0.987_f64, 0.26);
        let y: Vec<f64> = m.iter().map(|&m| a * p.powf(m) + b).collect();
        let f = fit_rb(&m, &y, Weights::None).unwrap();
        assert!((f.a - a).abs() < 1e-9 && (f.p - p).abs() < 1e-9 && (f.b - b).abs() < 1e-9, "{f:?}");
    }

    #[test]
    fn flat_data_is_no_decay() {
        let m = [1.0, 2.0, 4.0, 8.0];
        let f = fit_rb(&m, &[1.0; 4], Weights::None).unwrap();
        assert_eq!(f.p, 1.0);
    }

    #[test]
    fn too_few_lengths() {
        assert!(fit_rb(&[1.0, 2.0, 2.0, 3.0], &[0.9, 0.8, 0.8, 0.7], Weights::None).is_err());
    }

    #[test]
    fn population_fit_exact() {
        let m: Vec<f64> = [1.0, 3.0, 10.0, 30.0, 60.0, 100.0].to_vec();
        let y: Vec<f64> = m.iter().map(|&m| 0.8 + 0.2 * 0.99f64.powf(m)).collect();
        let f = fit_population(&m, &y, Weights::None).unwrap();
        assert!((f.a_c - 0.8).abs() < 1e-9 && (f.lambda - 0.99).abs() < 1e-9);
        assert!((f.leakage_rate - 0.2 * 0.01).abs() < 1e-9);
    }

    #[test]
    fn fidelity_arithmetic() {
        assert!((clifford_fidelity(0.9998, 0.0, 2).0 - 0.9999).abs() < 1e-15);
        let (f, _) = interleaved_fidelity(0.98, 0.0, 0.98 * 0.996, 0.0, 4);
        assert!((f - (1.0 - 0.75 * 0.004)).abs() < 1e-12);
    }
}

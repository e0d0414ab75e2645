//! One-dimensional searches used by the calibration loop and the fits.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `f` on `[a, b]`, stopping when the bracket is below `tol`.
pub fn golden_min<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Brent's method for a bracketed minimum, for smooth objectives where golden
/// section would waste evaluations.
pub fn brent_min<F>(mut f: F, a0: f64, b0: f64, tol: f64, max_iter: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a0.min(b0), a0.max(b0));
    let mut x = a + (1.0 - INV_PHI) * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Ok((x, fx));
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { b - x };
            d = (1.0 - INV_PHI) * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::Fit("brent minimization did not converge".into()))
}

/// Bisection for a sign change of `f` on `[a, b]`. Stops when `|f| < ftol` or the
/// bracket is narrower than `xtol`.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, ftol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa.signum() == fb.signum() {
        return Err(Error::Fit("bisection bracket has no sign change".into()));
    }
    loop {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm.abs() < ftol || (b - a).abs() < xtol {
            return Ok((m, fm));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
}

/// Illinois-modified regula falsi on a bracket whose end values are already known.
/// Stops when `|f| < ftol` or the bracket is narrower than `xtol`.
pub fn regula_falsi<F>(mut f: F, (mut a, mut fa): (f64, f64), (mut b, mut fb): (f64, f64), xtol: f64, ftol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa.signum() == fb.signum() {
        return Err(Error::Fit("regula falsi bracket has no sign change".into()));
    }
    let mut side = 0;
    for _ in 0..200 {
        let x = (a * fb - b * fa) / (fb - fa);
        let fx = f(x)?;
        if fx.abs() < ftol || (b - a).abs() < xtol {
            return Ok((x, fx));
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::Fit("regula falsi did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_min() {
        let (x, _) = golden_min(|x| Ok((x - 0.3).powi(2)), -1.0, 2.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn brent_finds_min() {
        let (x, _) = brent_min(|x| Ok((x - 0.7).powi(4) + (x - 0.7).powi(2)), 0.0, 1.0, 1e-10, 200).unwrap();
        assert!((x - 0.7).abs() < 1e-6);
    }

    #[test]
    fn bisect_root() {
        let (x, _) = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-12, 0.0).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-10);
        assert!(bisect(|x| Ok(x * x + 1.0), 0.0, 2.0, 1e-12, 0.0).is_err());
    }

    #[test]
    fn regula_falsi_root() {
        let mut calls = 0;
        let (x, _) = regula_falsi(
            |x| {
                calls += 1;
                Ok(x.sin() - 0.5)
            },
            (0.0, -0.5),
            (1.5, 1.5f64.sin() - 0.5),
            1e-14,
            1e-13,
        )
        .unwrap();
        assert!((x - (0.5f64).asin()).abs() < 1e-12);
        assert!(calls < 15, "{calls}");
    }
}

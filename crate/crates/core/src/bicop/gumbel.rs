//! Unrotated Gumbel copula, `theta >= 1`. Rotations are applied by the caller.

use crate::error::{Error, Result};

#[inline]
fn ln_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Returns `(x, y, ln A, A^{1/θ})` with `x = -ln u`, `y = -ln v`, `A = x^θ + y^θ`.
#[inline]
fn parts(u: f64, v: f64, theta: f64) -> (f64, f64, f64, f64) {
    let x = -u.ln();
    let y = -v.ln();
    let ln_a = ln_sum_exp(theta * x.ln(), theta * y.ln());
    (x, y, ln_a, (ln_a / theta).exp())
}

pub(crate) fn ln_pdf(u: f64, v: f64, theta: f64) -> f64 {
    let (x, y, ln_a, a1) = parts(u, v, theta);
    -a1 + x
        + y
        + (theta - 1.0) * (x.ln() + y.ln())
        + (1.0 / theta - 2.0) * ln_a
        + (a1 + theta - 1.0).ln()
}

/// `∂C(u,v)/∂v`
pub(crate) fn hfunc(u: f64, v: f64, theta: f64) -> f64 {
    let (_, y, ln_a, a1) = parts(u, v, theta);
    (-a1 + (1.0 / theta - 1.0) * ln_a + (theta - 1.0) * y.ln() + y).exp()
}

pub(crate) fn cdf(u: f64, v: f64, theta: f64) -> f64 {
    (-parts(u, v, theta).3).exp()
}

/// Solves `hfunc(u, v) = w` for `u` by Newton steps safeguarded with bisection.
pub(crate) fn hinv(w: f64, v: f64, theta: f64, lo: f64, hi: f64) -> Result<f64> {
    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 100;
    let (mut lo, mut hi) = (lo, hi);
    if hfunc(lo, v, theta) >= w {
        return Ok(lo);
    }
    if hfunc(hi, v, theta) <= w {
        return Ok(hi);
    }
    let mut u = w.clamp(lo, hi);
    for _ in 0..MAX_ITER {
        let f = hfunc(u, v, theta) - w;
        if f == 0.0 {
            return Ok(u);
        }
        if f < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let slope = ln_pdf(u, v, theta).exp();
        let newton = u - f / slope;
        let next = if slope.is_finite() && slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - u).abs() < 1e-3 * TOL || hi - lo < TOL * 1e-2 {
            return Ok(next);
        }
        u = next;
    }
    if hi - lo < TOL {
        return Ok(0.5 * (lo + hi));
    }
    Err(Error::Convergence {
        what: "Gumbel h-inverse".into(),
        iterations: MAX_ITER,
    })
}

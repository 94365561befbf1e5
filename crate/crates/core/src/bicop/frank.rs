//! Frank copula, `theta != 0`. All forms are written with `expm1` so they stay
//! accurate for small `|theta|`.

/// `e^{-θ} - 1 + (e^{-θu} - 1)(e^{-θv} - 1)` with its factors `a`, `b` and `em`.
///
/// For large positive `θ` near the upper corner the factored form cancels
/// badly, so the expanded sum of exponentials is used there instead.
#[inline]
fn terms(u: f64, v: f64, theta: f64) -> (f64, f64, f64, f64) {
    let em = (-theta).exp_m1();
    let a = (-theta * u).exp_m1();
    let b = (-theta * v).exp_m1();
    let mut d = em + a * b;
    if d.abs() < 0.25 * em.abs() {
        d = (-theta).exp() - (-theta * u).exp() - (-theta * v).exp() + (-theta * (u + v)).exp();
    }
    (em, a, b, d)
}

pub(crate) fn ln_pdf(u: f64, v: f64, theta: f64) -> f64 {
    let (em, _, _, d) = terms(u, v, theta);
    (-theta * em).ln() - theta * (u + v) - 2.0 * d.abs().ln()
}

/// `∂C(u,v)/∂v`
pub(crate) fn hfunc(u: f64, v: f64, theta: f64) -> f64 {
    let (_, a, _, d) = terms(u, v, theta);
    (-theta * v).exp() * a / d
}

pub(crate) fn hinv(w: f64, v: f64, theta: f64) -> f64 {
    if theta > 1.0 {
        // e^{-θu} as a ratio of positive sums; no cancellation as u -> 1
        let ev = (-theta * v).exp();
        let num = ev * (1.0 - w) + w * (-theta).exp();
        let den = ev * (1.0 - w) + w;
        return -(num.ln() - den.ln()) / theta;
    }
    let em = (-theta).exp_m1();
    let b = (-theta * v).exp_m1();
    let a = w * em / (1.0 + b * (1.0 - w));
    -a.ln_1p() / theta
}

pub(crate) fn cdf(u: f64, v: f64, theta: f64) -> f64 {
    let (em, a, b, d) = terms(u, v, theta);
    if d.abs() < 0.25 * em.abs() {
        -(d / em).ln() / theta
    } else {
        -(a * b / em).ln_1p() / theta
    }
}

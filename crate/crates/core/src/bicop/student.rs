use statrs::function::gamma::ln_gamma;

use crate::dist::{bvt_cdf, integrate, t_cdf, t_quantile};

/// Parameter-only part of the log density; shared across observations.
pub(crate) fn ln_norm_const(rho: f64, nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 2.0)) + ln_gamma(0.5 * nu)
        - 2.0 * ln_gamma(0.5 * (nu + 1.0))
        - 0.5 * (1.0 - rho * rho).ln()
}

/// Log density on t scores `x = t_ν⁻¹(u)`, `y = t_ν⁻¹(v)`, given `ln_norm_const(rho, nu)`.
#[inline]
pub(crate) fn ln_pdf_scores(x: f64, y: f64, rho: f64, nu: f64, norm: f64) -> f64 {
    let s = 1.0 - rho * rho;
    let q = (x * x + y * y - 2.0 * rho * x * y) / (nu * s);
    norm - 0.5 * (nu + 2.0) * q.ln_1p()
        + 0.5 * (nu + 1.0) * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p())
}

pub(crate) fn ln_pdf(u: f64, v: f64, rho: f64, nu: f64) -> f64 {
    ln_pdf_scores(
        t_quantile(u, nu),
        t_quantile(v, nu),
        rho,
        nu,
        ln_norm_const(rho, nu),
    )
}

/// `∂C(u,v)/∂v`
pub(crate) fn hfunc(u: f64, v: f64, rho: f64, nu: f64) -> f64 {
    hfunc_scores(t_quantile(u, nu), t_quantile(v, nu), rho, nu)
}

#[inline]
pub(crate) fn hfunc_scores(x: f64, y: f64, rho: f64, nu: f64) -> f64 {
    let scale = ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
    t_cdf((x - rho * y) / scale, nu + 1.0)
}

pub(crate) fn hinv(w: f64, v: f64, rho: f64, nu: f64) -> f64 {
    let y = t_quantile(v, nu);
    let scale = ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
    t_cdf(t_quantile(w, nu + 1.0) * scale + rho * y, nu)
}

pub(crate) fn cdf(u: f64, v: f64, rho: f64, nu: f64) -> f64 {
    if nu.fract() == 0.0 && nu <= 1000.0 {
        return bvt_cdf(nu as u32, t_quantile(u, nu), t_quantile(v, nu), rho);
    }
    integrate(|s| hfunc(u, s, rho, nu), 0.0, v, 8)
}

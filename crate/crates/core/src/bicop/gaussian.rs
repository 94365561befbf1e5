use crate::dist::{bvn_cdf, norm_cdf, norm_quantile};

/// Log density on normal scores `x = Φ⁻¹(u)`, `y = Φ⁻¹(v)`.
#[inline]
pub(crate) fn ln_pdf_scores(x: f64, y: f64, rho: f64) -> f64 {
    let s = 1.0 - rho * rho;
    -0.5 * s.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s)
}

pub(crate) fn ln_pdf(u: f64, v: f64, rho: f64) -> f64 {
    ln_pdf_scores(norm_quantile(u), norm_quantile(v), rho)
}

/// `∂C(u,v)/∂v`
pub(crate) fn hfunc(u: f64, v: f64, rho: f64) -> f64 {
    hfunc_scores(norm_quantile(u), norm_quantile(v), rho)
}

#[inline]
pub(crate) fn hfunc_scores(x: f64, y: f64, rho: f64) -> f64 {
    norm_cdf((x - rho * y) / (1.0 - rho * rho).sqrt())
}

pub(crate) fn hinv(w: f64, v: f64, rho: f64) -> f64 {
    norm_cdf(norm_quantile(w) * (1.0 - rho * rho).sqrt() + rho * norm_quantile(v))
}

pub(crate) fn cdf(u: f64, v: f64, rho: f64) -> f64 {
    bvn_cdf(norm_quantile(u), norm_quantile(v), rho)
}

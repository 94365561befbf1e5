//! Univariate and bivariate distribution functions used by the elliptical families.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use libm::erfc;
use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::gamma::ln_gamma;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Normal quantile by Wichura's AS 241 rational approximations (relative
/// error below 1e-15).
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&AS241_A, r) / poly(&AS241_B, r);
    }
    let r = (-p.min(1.0 - p).ln()).sqrt();
    let x = if r <= 5.0 {
        poly(&AS241_C, r - 1.6) / poly(&AS241_D, r - 1.6)
    } else {
        poly(&AS241_E, r - 5.0) / poly(&AS241_F, r - 5.0)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

#[inline]
fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[allow(clippy::excessive_precision)]
const AS241_A: [f64; 8] = [
    3.3871328727963666080e0,
    1.3314166789178437745e+2,
    1.9715909503065514427e+3,
    1.3731693765509461125e+4,
    4.5921953931549871457e+4,
    6.7265770927008700853e+4,
    3.3430575583588128105e+4,
    2.5090809287301226727e+3,
];
#[allow(clippy::excessive_precision)]
const AS241_B: [f64; 8] = [
    1.0,
    4.2313330701600911252e+1,
    6.8718700749205790830e+2,
    5.3941960214247511077e+3,
    2.1213794301586595867e+4,
    3.9307895800092710610e+4,
    2.8729085735721942674e+4,
    5.2264952788528545610e+3,
];
#[allow(clippy::excessive_precision)]
const AS241_C: [f64; 8] = [
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
#[allow(clippy::excessive_precision)]
const AS241_D: [f64; 8] = [
    1.0,
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
#[allow(clippy::excessive_precision)]
const AS241_E: [f64; 8] = [
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
#[allow(clippy::excessive_precision)]
const AS241_F: [f64; 8] = [
    1.0,
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

/// `ln Γ((ν+1)/2) - ln Γ(ν/2) - ln(νπ)/2`, the constant of the t log density.
pub fn t_ln_norm(nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln()
}

pub fn t_ln_pdf(x: f64, nu: f64) -> f64 {
    t_ln_norm(nu) - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x * x));
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Student-t quantile: incomplete-beta inversion polished by Newton steps on the CDF.
pub fn t_quantile(p: f64, nu: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    let tail = p.min(1.0 - p);
    let z = inv_beta_reg(0.5 * nu, 0.5, 2.0 * tail);
    let x0 = if z > 0.0 {
        (nu * (1.0 - z) / z).sqrt()
    } else {
        f64::MAX.sqrt()
    };
    let x = lower_tail_newton(tail, nu, -x0, 4).unwrap_or_else(|x| x);
    if p < 0.5 {
        x
    } else {
        -x
    }
}

/// Student-t quantile by Newton's method from a nearby starting value, such as
/// the quantile for a slightly different `nu`. Falls back to [`t_quantile`]
/// when the iteration does not settle.
pub fn t_quantile_near(p: f64, nu: f64, start: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 || p == 0.5 || !start.is_finite() {
        return t_quantile(p, nu);
    }
    let tail = p.min(1.0 - p);
    match lower_tail_newton(tail, nu, -start.abs(), 12) {
        Ok(x) if p < 0.5 => x,
        Ok(x) => -x,
        Err(_) => t_quantile(p, nu),
    }
}

/// Solves `F(x) = tail` on `x <= 0`, where the t CDF is convex, so Newton
/// iterates approach the root monotonically after at most one overshoot.
/// `Err` carries the last iterate when `max_iter` steps were not enough.
fn lower_tail_newton(tail: f64, nu: f64, start: f64, max_iter: usize) -> Result<f64, f64> {
    let ln_norm = t_ln_norm(nu);
    let mut x = start.min(0.0);
    for _ in 0..max_iter {
        let dens = (ln_norm - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp();
        if dens <= 0.0 || !dens.is_finite() {
            return Err(x);
        }
        let step = (t_cdf(x, nu) - tail) / dens;
        if !step.is_finite() {
            return Err(x);
        }
        let next = (x - step).min(0.0);
        // quadratic convergence: the remaining error is of order step^2
        let done = (next - x).abs() <= 1e-9 * x.abs().max(1.0);
        x = next;
        if done {
            return Ok(x);
        }
    }
    Err(x)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n <= 1 { 1.0 } else { p0 };
            deriv = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / deriv;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn cached_rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static R6: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R12: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R20: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R64: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match n {
        6 => R6.get_or_init(|| gauss_legendre(6)),
        12 => R12.get_or_init(|| gauss_legendre(12)),
        20 => R20.get_or_init(|| gauss_legendre(20)),
        _ => R64.get_or_init(|| gauss_legendre(64)),
    }
}

/// Integral of `f` over `[a, b]` with composite 64-point Gauss-Legendre on `panels` panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = cached_rule(64);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        total += x
            .iter()
            .zip(w)
            .map(|(xi, wi)| wi * f(mid + half * xi))
            .sum::<f64>()
            * half;
    }
    total
}

/// `P(X > h, Y > k)` for a standard bivariate normal with correlation `r` (Genz, TVPACK `BVND`).
fn bvnd(h: f64, k: f64, r: f64) -> f64 {
    let rule = if r.abs() < 0.3 {
        6
    } else if r.abs() < 0.75 {
        12
    } else {
        20
    };
    let (x, w) = cached_rule(rule);
    let (h, mut k) = (h, k);
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r != 0.0 {
            let hs = 0.5 * (h * h + k * k);
            let asr = r.asin();
            for (xi, wi) in x.iter().zip(w) {
                let sn = (0.5 * asr * (xi + 1.0)).sin();
                bvn += 0.5 * wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
            bvn *= asr / (2.0 * PI);
        }
        bvn += norm_cdf(-h) * norm_cdf(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let a2 = (1.0 - r) * (1.0 + r);
            let a = a2.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let asr = -0.5 * (bs / a2 + hk);
            if asr > -100.0 {
                bvn = a
                    * asr.exp()
                    * (1.0 - c * (bs - a2) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a2 * a2 / 5.0);
            }
            if -hk < 100.0 {
                let b = bs.sqrt();
                bvn -= (-0.5 * hk).exp()
                    * (2.0 * PI).sqrt()
                    * norm_cdf(-b / a)
                    * b
                    * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            let half = 0.5 * a;
            for (xi, wi) in x.iter().zip(w) {
                let xs = (half * (xi + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (bs / xs + hk);
                if asr > -100.0 {
                    bvn += half
                        * wi
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
            bvn = -bvn / (2.0 * PI);
        }
        if r > 0.0 {
            bvn += norm_cdf(-h.max(k));
        } else {
            bvn = -bvn;
            if k > h {
                bvn += norm_cdf(k) - norm_cdf(h);
            }
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Standard bivariate normal CDF `P(X <= h, Y <= k)`.
pub fn bvn_cdf(h: f64, k: f64, r: f64) -> f64 {
    bvnd(-h, -k, r)
}

/// Standard bivariate Student-t CDF for integer degrees of freedom (Dunnett-Sobel, Genz `BVTL`).
pub fn bvt_cdf(nu: u32, dh: f64, dk: f64, r: f64) -> f64 {
    let nuf = nu as f64;
    let snu = nuf.sqrt();
    let ors = 1.0 - r * r;
    let hrk = dh - r * dk;
    let krh = dk - r * dh;
    let (xnhk, xnkh) = if hrk.abs() + ors > 0.0 {
        (
            hrk * hrk / (hrk * hrk + ors * (nuf + dk * dk)),
            krh * krh / (krh * krh + ors * (nuf + dh * dh)),
        )
    } else {
        (0.0, 0.0)
    };
    let hs = if dh - r * dk < 0.0 { -1.0 } else { 1.0 };
    let ks = if dk - r * dh < 0.0 { -1.0 } else { 1.0 };
    let mut bvt;
    if nu.is_multiple_of(2) {
        bvt = ors.sqrt().atan2(-r) / (2.0 * PI);
        let mut gmph = dh / (16.0 * (nuf + dh * dh)).sqrt();
        let mut gmpk = dk / (16.0 * (nuf + dk * dk)).sqrt();
        let mut btnckh = 2.0 * xnkh.sqrt().atan2((1.0 - xnkh).sqrt()) / PI;
        let mut btpdkh = 2.0 * (xnkh * (1.0 - xnkh)).sqrt() / PI;
        let mut btnchk = 2.0 * xnhk.sqrt().atan2((1.0 - xnhk).sqrt()) / PI;
        let mut btpdhk = 2.0 * (xnhk * (1.0 - xnhk)).sqrt() / PI;
        for j in 1..=nu / 2 {
            let jf = j as f64;
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btnckh += btpdkh;
            btpdkh = 2.0 * jf * btpdkh * (1.0 - xnkh) / (2.0 * jf + 1.0);
            btnchk += btpdhk;
            btpdhk = 2.0 * jf * btpdhk * (1.0 - xnhk) / (2.0 * jf + 1.0);
            gmph = gmph * (2.0 * jf - 1.0) / (2.0 * jf * (1.0 + dh * dh / nuf));
            gmpk = gmpk * (2.0 * jf - 1.0) / (2.0 * jf * (1.0 + dk * dk / nuf));
        }
    } else {
        let qhrk = (dh * dh + dk * dk - 2.0 * r * dh * dk + nuf * ors).sqrt();
        let hkrn = dh * dk + r * nuf;
        let hkn = dh * dk - nuf;
        let hpk = dh + dk;
        bvt = (-snu * (hkn * qhrk + hpk * hkrn)).atan2(hkn * hkrn - nuf * hpk * qhrk) / (2.0 * PI);
        if bvt < -1e-15 {
            bvt += 1.0;
        }
        let mut gmph = dh / (2.0 * PI * snu * (1.0 + dh * dh / nuf));
        let mut gmpk = dk / (2.0 * PI * snu * (1.0 + dk * dk / nuf));
        let mut btnckh = xnkh.sqrt();
        let mut btpdkh = btnckh;
        let mut btnchk = xnhk.sqrt();
        let mut btpdhk = btnchk;
        for j in 1..=(nu - 1) / 2 {
            let jf = j as f64;
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btpdkh = (2.0 * jf - 1.0) * btpdkh * (1.0 - xnkh) / (2.0 * jf);
            btnckh += btpdkh;
            btpdhk = (2.0 * jf - 1.0) * btpdhk * (1.0 - xnhk) / (2.0 * jf);
            btnchk += btpdhk;
            gmph = 2.0 * jf * gmph / ((2.0 * jf + 1.0) * (1.0 + dh * dh / nuf));
            gmpk = 2.0 * jf * gmpk / ((2.0 * jf + 1.0) * (1.0 + dk * dk / nuf));
        }
    }
    bvt.clamp(0.0, 1.0)
}

//! Small derivative-free and quasi-Newton minimizers for likelihood fitting.

/// Outcome of a minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Brent's method for a minimum of `f` on `[a, b]`.
///
/// Returns `(x, f(x), iterations, converged)`. Convergence means the bracket
/// shrank below `tol` (absolute plus relative part).
pub fn brent_min<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64, usize, bool) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for iter in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol + 1e-10 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return (x, fx, iter, true);
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
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
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
    (x, fx, max_iter, false)
}

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    /// Central-difference step for the gradient.
    pub fd_step: f64,
    /// Stop once the relative objective change falls below this on two
    /// consecutive iterations while the gradient is below `rel_grad_tol`.
    pub rel_tol: f64,
    pub rel_grad_tol: f64,
    /// Stop once the largest gradient component falls below this.
    pub grad_tol: f64,
    /// Stop once the largest parameter step falls below this.
    pub step_tol: f64,
    pub max_iter: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            fd_step: 1e-6,
            rel_tol: 1e-8,
            rel_grad_tol: 1e-4,
            grad_tol: 1e-5,
            step_tol: 1e-8,
            max_iter: 500,
        }
    }
}

pub fn fd_gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// An objective with a gradient.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;
    fn gradient(&mut self, x: &[f64]) -> Vec<f64>;
}

/// Wraps a plain function; gradients by central differences.
pub struct FiniteDiff<F> {
    pub f: F,
    pub step: f64,
}

impl<F: FnMut(&[f64]) -> f64> Objective for FiniteDiff<F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&mut self, x: &[f64]) -> Vec<f64> {
        fd_gradient(&mut self.f, x, self.step)
    }
}

/// BFGS on an unconstrained objective with finite-difference gradients and
/// a backtracking Armijo line search. The returned point never has a larger
/// objective value than `x0`.
pub fn bfgs<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: BfgsOptions) -> Minimum {
    bfgs_objective(
        &mut FiniteDiff {
            f,
            step: opts.fd_step,
        },
        x0,
        opts,
    )
}

/// [`bfgs`] with the gradient supplied by the objective.
pub fn bfgs_objective<O: Objective>(obj: &mut O, x0: &[f64], opts: BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = obj.value(&x);
    if n == 0 {
        return Minimum {
            x,
            value: fx,
            iterations: 0,
            converged: true,
        };
    }
    let mut g = obj.gradient(&x);
    let mut hinv = identity(n);
    let mut converged = false;
    let mut iterations = 0;
    let mut small_changes = 0;
    while iterations < opts.max_iter {
        if max_abs(&g) < opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir: Vec<f64> = mat_vec(&hinv, &g).iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 || !slope.is_finite() {
            hinv = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        // keep the first trial step moderate on the transformed scale
        let dir_norm = max_abs(&dir);
        let mut t = if dir_norm > 2.0 { 2.0 / dir_norm } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            let ft = obj.value(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no descent along the search direction: restart from steepest descent once
            if hinv != identity(n) {
                hinv = identity(n);
                continue;
            }
            break;
        };
        let g_new = obj.gradient(&x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let rel_change = (fx - f_new).abs() / fx.abs().max(1e-8);
        let step = max_abs(&s);
        x = x_new;
        fx = f_new;
        g = g_new;
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * yy.sqrt() {
            if hinv == identity(n) {
                // scale the initial inverse Hessian to the curvature just seen
                hinv = scaled_identity(n, sy / yy);
            }
            bfgs_update(&mut hinv, &s, &y, sy);
        }
        if step < opts.step_tol {
            converged = true;
            break;
        }
        if rel_change < opts.rel_tol && max_abs(&g) < opts.rel_grad_tol {
            small_changes += 1;
            if small_changes >= 2 {
                converged = true;
                break;
            }
        } else {
            small_changes = 0;
        }
    }
    Minimum {
        x,
        value: fx,
        iterations,
        converged,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn scaled_identity(n: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut m = identity(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = scale;
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    let rho = 1.0 / sy;
    for i in 0..n {
        for j in 0..n {
            h[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
}

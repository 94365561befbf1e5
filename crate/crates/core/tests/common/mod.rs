//! Slow reference implementations and generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rvine_core::bicop::{tau_to_param, FamilyTag, PairCopula};
use rvine_core::matrix::TriMatrix;
use rvine_core::structure::{RVineStructure, TreeSequence};
use rvine_core::RVineModel;

/// `F(a | conditioning of edge (t, idx))` by recursive application of the
/// h-functions down the explicit trees.
pub fn cond_cdf(trees: &TreeSequence, t: usize, idx: usize, a: usize, x: &[f64]) -> f64 {
    if t == 0 {
        return x[a - 1];
    }
    let e = &trees.tree(t)[idx];
    let prev = trees.tree(t - 1);
    let child = if prev[e.nodes.0].complete_union().contains(&a) {
        e.nodes.0
    } else {
        e.nodes.1
    };
    let f = &prev[child];
    let d = if f.conditioned.0 == a {
        f.conditioned.1
    } else {
        f.conditioned.0
    };
    let ua = cond_cdf(trees, t - 1, child, a, x);
    let ud = cond_cdf(trees, t - 1, child, d, x);
    if f.conditioned.0 == a {
        f.copula.hfunc(ua, ud).unwrap()
    } else {
        f.copula.hfunc_given_first(ud, ua).unwrap()
    }
}

/// Log density as the sum over every edge of every tree, without matrices.
pub fn tree_walk_log_density(trees: &TreeSequence, x: &[f64]) -> f64 {
    let mut ll = 0.0;
    for t in 0..trees.trees().len() {
        for (idx, e) in trees.tree(t).iter().enumerate() {
            let u = cond_cdf(trees, t, idx, e.conditioned.0, x);
            let v = cond_cdf(trees, t, idx, e.conditioned.1, x);
            ll += e.copula.ln_pdf(u, v).unwrap();
        }
    }
    ll
}

/// A parametric copula with `0.05 <= |tau| <= max_tau`, or independence.
pub fn random_copula(rng: &mut impl Rng, max_tau: f64) -> PairCopula {
    let families = [
        FamilyTag::Independence,
        FamilyTag::Gaussian,
        FamilyTag::StudentT,
        FamilyTag::Gumbel,
        FamilyTag::SurvivalGumbel,
        FamilyTag::Gumbel90,
        FamilyTag::Gumbel270,
        FamilyTag::Frank,
    ];
    let family = families[rng.random_range(0..families.len())];
    if family == FamilyTag::Independence {
        return PairCopula::independence();
    }
    let mut tau = rng.random_range(0.05..max_tau);
    if rng.random::<bool>() {
        tau = -tau;
    }
    if !family.admits_tau(tau) {
        tau = -tau;
    }
    let c = tau_to_param(family, tau).unwrap();
    if family == FamilyTag::StudentT {
        PairCopula::student_t(c.theta(), rng.random_range(2.5..15.0)).unwrap()
    } else {
        c
    }
}

/// A random vine with random pair copulas on every edge.
pub fn random_model(n: usize, rng: &mut impl Rng, max_tau: f64) -> (TreeSequence, RVineModel) {
    let mut trees = TreeSequence::random(n, rng);
    for t in 0..n - 1 {
        for i in 0..trees.tree(t).len() {
            let c = random_copula(rng, max_tau);
            trees.set_copula(t, i, c);
        }
    }
    let model = RVineModel::from_trees(&trees).unwrap();
    (trees, model)
}

/// Places the copulas of `trees` on an equivalent `structure`, oriented so
/// the diagonal variable comes first.
pub fn model_on_structure(trees: &TreeSequence, s: &RVineStructure) -> RVineModel {
    let n = s.dim();
    let mut cops = TriMatrix::new(n);
    for c in 0..n {
        for r in c + 1..n {
            let entry = s.entry(r, c);
            let e = trees
                .trees()
                .iter()
                .flatten()
                .find(|e| e.entry() == entry)
                .expect("structures encode the same vine");
            let cop = if e.conditioned.0 == s.get(c, c) {
                e.copula
            } else {
                e.copula.transposed()
            };
            cops.set(r, c, cop);
        }
    }
    RVineModel::new(s.clone(), cops).unwrap()
}

/// Asymptotic p-value of the one-sample Kolmogorov-Smirnov test against U(0,1).
pub fn ks_uniform_p_value(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i as f64 + 1.0) / n - x))
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
        p += sign * (-2.0 * k * k * lambda * lambda).exp();
    }
    (2.0 * p).clamp(0.0, 1.0)
}

/// Standard error of Kendall's tau under independence.
pub fn tau_se(n: usize) -> f64 {
    let n = n as f64;
    (2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0))).sqrt()
}

/// Point `i` of the Halton sequence in `dim` dimensions.
pub fn halton(i: usize, dim: usize) -> Vec<f64> {
    const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (0..dim)
        .map(|d| {
            let b = PRIMES[d];
            let (mut f, mut r, mut k) = (1.0, 0.0, i + 1);
            while k > 0 {
                f /= b as f64;
                r += f * (k % b) as f64;
                k /= b;
            }
            r
        })
        .collect()
}

/// The seven-variable example structure.
pub fn m_star() -> RVineStructure {
    RVineStructure::from_rows(&[
        vec![7],
        vec![4, 4],
        vec![5, 6, 6],
        vec![1, 5, 5, 5],
        vec![2, 1, 1, 1, 1],
        vec![3, 2, 2, 3, 3, 3],
        vec![6, 3, 3, 2, 2, 2, 2],
    ])
    .unwrap()
}

/// Quasi-Monte Carlo estimate of the integral of `f` over the unit cube.
///
/// Halton points pass through `u = 3t^2 - 2t^3` with Jacobian `6t(1-t)`; the
/// substitution damps the integrable corner singularities of tail-dependent
/// densities, which otherwise make the plain estimator heavy-tailed.
pub fn qmc_integral(dim: usize, points: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut u = vec![0.0; dim];
    let mut total = 0.0;
    for i in 0..points {
        let mut jac = 1.0;
        for (x, t) in u.iter_mut().zip(halton(i, dim)) {
            jac *= 6.0 * t * (1.0 - t);
            *x = t * t * (3.0 - 2.0 * t);
        }
        total += f(&u) * jac;
    }
    total / points as f64
}

//! Density evaluation and simulation by the matrix recursions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bicop::{clamp_unit, PairCopula};
use crate::error::{Error, Result};
use crate::model::RVineModel;
use crate::sample::CopulaSample;

/// Intermediate values of a full-sample evaluation: per row the direct and
/// indirect matrices and each step's log density.
pub(crate) struct EvalCache {
    n: usize,
    steps: usize,
    direct: Vec<f64>,
    indirect: Vec<f64>,
    lpdf: Vec<f64>,
}

/// Scratch matrices of conditional distribution values, reusable across calls.
#[derive(Debug, Clone)]
pub struct EvalWorkspace {
    n: usize,
    direct: Vec<f64>,
    indirect: Vec<f64>,
}

impl EvalWorkspace {
    pub fn new(n: usize) -> Self {
        EvalWorkspace {
            n,
            direct: vec![0.5; n * n],
            indirect: vec![0.5; n * n],
        }
    }

    fn ensure(&mut self, n: usize) {
        if self.n != n {
            *self = Self::new(n);
        }
    }
}

fn check_point(model: &RVineModel, x: &[f64]) -> Result<()> {
    if x.len() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: x.len(),
        });
    }
    for &v in x {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain {
                what: "observation",
                value: v,
            });
        }
    }
    Ok(())
}

impl RVineModel {
    /// Log copula density at `x`, where `x[j]` is the value of variable `j + 1`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.log_density_with(&mut EvalWorkspace::new(self.dim()), x)
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.log_density(x).map(f64::exp)
    }

    pub fn log_density_with(&self, ws: &mut EvalWorkspace, x: &[f64]) -> Result<f64> {
        check_point(self, x)?;
        Ok(self.log_density_unchecked(ws, x))
    }

    fn log_density_unchecked(&self, ws: &mut EvalWorkspace, x: &[f64]) -> f64 {
        ws.ensure(self.dim());
        self.run_plan(&mut ws.direct, &mut ws.indirect, x, |_, _| {})
    }

    /// Algorithm body shared by plain and cached evaluation; `record` sees
    /// each step's log density.
    fn run_plan(
        &self,
        vd: &mut [f64],
        vi: &mut [f64],
        x: &[f64],
        mut record: impl FnMut(usize, f64),
    ) -> f64 {
        let n = self.dim();
        let s = self.structure();
        for c in 0..n {
            vd[(n - 1) * n + c] = clamp_unit(x[s.get(c, c) - 1]);
        }
        let mut ll = 0.0;
        for (k, st) in self.plan().iter().enumerate() {
            let cop = self.copula(st.row, st.col);
            let z1 = vd[st.row * n + st.col];
            let z2 = if st.direct {
                vd[st.row * n + st.src]
            } else {
                vi[st.row * n + st.src]
            };
            let (lpdf, h, h1) = cop.step_clamped(z1, z2, st.store_direct, st.store_indirect);
            record(k, lpdf);
            ll += lpdf;
            let up = (st.row - 1) * n + st.col;
            if st.store_direct {
                vd[up] = h;
            }
            if st.store_indirect {
                vi[up] = h1;
            }
        }
        ll
    }

    /// Plan steps whose inputs change when the copula of step `k` does,
    /// `k` itself first.
    pub(crate) fn dependent_steps(&self, k: usize) -> Vec<usize> {
        let n = self.dim();
        let plan = self.plan();
        let mut dirty_d = vec![false; n * n];
        let mut dirty_i = vec![false; n * n];
        let mut out = Vec::new();
        for (j, st) in plan.iter().enumerate().skip(k) {
            let reads_dirty = dirty_d[st.row * n + st.col]
                || if st.direct {
                    dirty_d[st.row * n + st.src]
                } else {
                    dirty_i[st.row * n + st.src]
                };
            if j == k || reads_dirty {
                out.push(j);
                let up = (st.row - 1) * n + st.col;
                dirty_d[up] |= st.store_direct;
                dirty_i[up] |= st.store_indirect;
            }
        }
        out
    }

    /// Evaluates every row once and keeps the intermediate values.
    pub(crate) fn eval_cache(&self, sample: &CopulaSample) -> EvalCache {
        let n = self.dim();
        let steps = self.plan().len();
        let rows = sample.n_obs();
        let mut cache = EvalCache {
            n,
            steps,
            direct: vec![0.5; rows * n * n],
            indirect: vec![0.5; rows * n * n],
            lpdf: vec![0.0; rows * steps],
        };
        for i in 0..rows {
            let (vd, vi) = (
                &mut cache.direct[i * n * n..(i + 1) * n * n],
                &mut cache.indirect[i * n * n..(i + 1) * n * n],
            );
            let lp = &mut cache.lpdf[i * steps..(i + 1) * steps];
            self.run_plan(vd, vi, sample.row(i), |k, v| lp[k] = v);
        }
        cache
    }

    /// Change of the log-likelihood when the copula of step `deps[0]` is
    /// replaced by `cop`; `deps` comes from [`Self::dependent_steps`].
    pub(crate) fn loglik_delta(&self, cache: &EvalCache, deps: &[usize], cop: &PairCopula) -> f64 {
        let n = cache.n;
        let plan = self.plan();
        let mut vd = vec![0.0; n * n];
        let mut vi = vec![0.0; n * n];
        let mut delta = 0.0;
        for i in 0..cache.lpdf.len() / cache.steps {
            vd.copy_from_slice(&cache.direct[i * n * n..(i + 1) * n * n]);
            vi.copy_from_slice(&cache.indirect[i * n * n..(i + 1) * n * n]);
            let lp = &cache.lpdf[i * cache.steps..(i + 1) * cache.steps];
            for (m, &j) in deps.iter().enumerate() {
                let st = &plan[j];
                let c = if m == 0 {
                    cop
                } else {
                    self.copula(st.row, st.col)
                };
                let z1 = vd[st.row * n + st.col];
                let z2 = if st.direct {
                    vd[st.row * n + st.src]
                } else {
                    vi[st.row * n + st.src]
                };
                let (lpdf, h, h1) = c.step_clamped(z1, z2, st.store_direct, st.store_indirect);
                delta += lpdf - lp[j];
                let up = (st.row - 1) * n + st.col;
                if st.store_direct {
                    vd[up] = h;
                }
                if st.store_indirect {
                    vi[up] = h1;
                }
            }
        }
        delta
    }

    /// Log densities of every row, in order; evaluated in parallel.
    pub fn row_log_densities(&self, sample: &CopulaSample) -> Result<Vec<f64>> {
        if sample.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: sample.dim(),
            });
        }
        let n = self.dim();
        Ok(sample
            .as_slice()
            .par_chunks_exact(n)
            .map_init(
                || EvalWorkspace::new(n),
                |ws, row| self.log_density_unchecked(ws, row),
            )
            .collect())
    }

    /// Sum of row log densities, added up in row order so the result does
    /// not depend on thread scheduling.
    pub fn loglik(&self, sample: &CopulaSample) -> Result<f64> {
        Ok(self.row_log_densities(sample)?.iter().sum())
    }

    /// `count` draws using a ChaCha8 stream seeded with `seed`; each row
    /// consumes `n` consecutive uniforms.
    pub fn simulate(&self, count: usize, seed: u64) -> Result<CopulaSample> {
        if count == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..count * n)
            .map(|_| clamp_unit(rng.random::<f64>()))
            .collect();
        self.transform_uniforms(&CopulaSample::from_clamped(n, w))
    }

    /// Maps independent uniforms to draws from the model (inverse Rosenblatt
    /// transform); column `c` of `w` drives the diagonal variable of column `c`.
    pub fn transform_uniforms(&self, w: &CopulaSample) -> Result<CopulaSample> {
        let n = self.dim();
        if w.dim() != n {
            return Err(Error::Dimension {
                expected: n,
                got: w.dim(),
            });
        }
        let rows: Vec<Result<Vec<f64>>> = w
            .as_slice()
            .par_chunks_exact(n)
            .map_init(
                || (EvalWorkspace::new(n), vec![0.0; n]),
                |(ws, z2), u| {
                    let mut x = vec![0.0; n];
                    self.simulate_row(ws, z2, u, &mut x)?;
                    Ok(x)
                },
            )
            .collect();
        let mut data = Vec::with_capacity(w.as_slice().len());
        for row in rows {
            data.extend(row?);
        }
        Ok(CopulaSample::from_clamped(n, data))
    }

    fn simulate_row(
        &self,
        ws: &mut EvalWorkspace,
        z2: &mut [f64],
        u: &[f64],
        x: &mut [f64],
    ) -> Result<()> {
        let n = self.dim();
        let s = self.structure();
        let (vd, vi) = (&mut ws.direct, &mut ws.indirect);
        for c in 0..n {
            vd[(n - 1) * n + c] = u[c];
        }
        x[s.get(n - 1, n - 1) - 1] = vd[(n - 1) * n + n - 1];
        // the plan lists each column's rows bottom-up, columns right to left
        let mut start = 0;
        for c in (0..n.saturating_sub(1)).rev() {
            let steps = &self.plan()[start..start + (n - 1 - c)];
            start += n - 1 - c;
            let bottom = (n - 1) * n + c;
            for st in steps.iter().rev() {
                let cop = self.copula(st.row, st.col);
                z2[st.row] = if st.direct {
                    vd[st.row * n + st.src]
                } else {
                    vi[st.row * n + st.src]
                };
                vd[bottom] = cop
                    .hinv_clamped(vd[bottom], z2[st.row])
                    .map_err(|e| e.at_edge(n - st.row, s.entry(st.row, st.col).to_string()))?;
            }
            x[s.get(c, c) - 1] = vd[bottom];
            for st in steps {
                let cop = self.copula(st.row, st.col);
                let z1 = vd[st.row * n + c];
                let up = (st.row - 1) * n + c;
                if st.store_direct {
                    vd[up] = cop.hfunc_clamped(z1, z2[st.row]);
                }
                if st.store_indirect {
                    vi[up] = cop.hfunc_first_clamped(z1, z2[st.row]);
                }
            }
        }
        Ok(())
    }
}

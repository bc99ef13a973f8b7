use mweica::ica::{fastica_baseline, mweica, weica_with, FastIcaOptions, MweicaOptions, UnmixingResult};
use mweica::DataMatrix;

use crate::args::{Method, SolverArgs};
use crate::error::Result;
use crate::output::Meta;

/// Options after method defaults are filled in, ready to be recorded.
#[derive(Debug, Clone)]
pub enum Resolved {
    Weighted(MweicaOptions),
    FastIca(FastIcaOptions),
}

impl Resolved {
    pub fn new(method: Method, solver: &SolverArgs, seed: u64, samples: usize) -> Self {
        match method {
            Method::Mweica | Method::Weica => {
                let mut o = MweicaOptions::for_samples(samples).with_seed(seed);
                if method == Method::Weica {
                    o.n_weights = 2;
                } else if let Some(n) = solver.n_weights {
                    o.n_weights = n;
                }
                if let Some(t) = solver.tol {
                    o.tol = t;
                }
                if let Some(s) = solver.max_sweeps {
                    o.max_sweeps = s;
                }
                Resolved::Weighted(o)
            }
            Method::Fastica => {
                let mut o = FastIcaOptions {
                    seed,
                    ..FastIcaOptions::default()
                };
                if let Some(t) = solver.tol {
                    o.tol = t;
                }
                if let Some(s) = solver.max_sweeps {
                    o.max_iter = s;
                }
                Resolved::FastIca(o)
            }
        }
    }

    pub fn record(&self, meta: &mut Meta) {
        match self {
            Resolved::Weighted(o) => {
                meta.set("seed", o.seed);
                meta.set("n_weights", o.n_weights);
                meta.set_f64("tol", o.tol);
                meta.set("max_sweeps", o.max_sweeps);
                meta.set("precondition", o.precondition);
                meta.set(
                    "ess_floor",
                    o.ess_floor.map_or("d+1".to_string(), mweica::harness::format_value),
                );
                meta.set("max_redraws", o.max_redraws);
            }
            Resolved::FastIca(o) => {
                meta.set("seed", o.seed);
                meta.set_f64("tol", o.tol);
                meta.set("max_iter", o.max_iter);
            }
        }
    }
}

pub fn run(method: Method, x: &DataMatrix, opts: &Resolved) -> Result<UnmixingResult> {
    Ok(match (method, opts) {
        (Method::Mweica, Resolved::Weighted(o)) => mweica(x, o)?,
        (Method::Weica, Resolved::Weighted(o)) => weica_with(x, o)?,
        (Method::Fastica, Resolved::FastIca(o)) => fastica_baseline(x, o)?,
        _ => unreachable!("options resolved for a different method"),
    })
}

pub fn record_diagnostics(meta: &mut Meta, result: &UnmixingResult) {
    let d = &result.diagnostics;
    meta.set_f64("residual", result.residual);
    meta.set("sweeps_used", d.sweeps_used);
    meta.set("converged", d.converged);
    meta.set("near_degenerate", d.near_degenerate);
    meta.set_f64("min_separation", d.spectrum.min_separation);
    meta.set_f64("min_ess", d.min_ess);
    meta.set_f64("median_ess", d.median_ess);
    meta.set("rejected_points", d.rejected_points);
    let rows: Vec<String> = result.weight_rows().iter().map(usize::to_string).collect();
    meta.set("weight_rows", rows.join(" "));
    let history: Vec<String> = d
        .criterion_history
        .iter()
        .map(|v| mweica::harness::format_value(*v))
        .collect();
    meta.set("criterion_history", history.join(" "));
}

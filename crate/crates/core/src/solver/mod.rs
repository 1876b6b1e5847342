//! Numerical search for coincidence points: multi-start local descent of
//! the scenario residual over a sphere or a rotation group, and a dense
//! one-dimensional scan for rotations of the circle.

pub mod action;
pub mod expr;
pub mod local;
pub mod residual;
pub mod scenario;

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use action::{ActionDescriptor, ActionKind, ActionRep};
pub use expr::{Expr, MapDescriptor, MapSpec};
pub use local::{Domain, LocalMethod};
pub use scenario::{Evaluation, Existence, Scenario, ScenarioFile, SolverOptions, Target};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Point(Vec<f64>),
    /// Rows of an orthogonal matrix.
    Rotation(Vec<Vec<f64>>),
}

impl Witness {
    fn from_flat(domain: Domain, x: Vec<f64>) -> Self {
        match domain {
            Domain::Sphere { .. } => Witness::Point(x),
            Domain::Rotation { n } => Witness::Rotation(x.chunks(n).map(<[f64]>::to_vec).collect()),
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        match self {
            Witness::Point(x) => x.clone(),
            Witness::Rotation(rows) => rows.concat(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub witness: Witness,
    pub residual: f64,
    pub subset: Vec<usize>,
    pub common_value: Vec<f64>,
    pub success: bool,
    pub existence: Existence,
    pub starts_attempted: usize,
    pub starts_converged: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_start: Option<usize>,
    /// Rotation angle, for the circle scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl SolverResult {
    /// Recompute the residual of the witness from scratch and compare.
    pub fn reverify(&self, scenario: &Scenario) -> Result<f64> {
        let fresh = scenario.evaluate(&self.witness.flat())?.residual;
        if (fresh - self.residual).abs() > scenario.options.verify_tol {
            return Err(Error::CrossCheck(format!(
                "witness residual {fresh:e} differs from the reported {:e}",
                self.residual
            )));
        }
        Ok(fresh)
    }
}

/// Everything the multi-start search produced.
#[derive(Debug, Clone)]
pub struct MultiStart {
    pub best: SolverResult,
    /// Final residual of each start, by start index.
    pub start_residuals: Vec<f64>,
}

impl MultiStart {
    pub fn converged_within(&self, tol: f64) -> usize {
        self.start_residuals.iter().filter(|&&r| r <= tol).count()
    }
}

fn objective(scenario: &Scenario, x: &[f64]) -> f64 {
    match scenario.evaluate(x) {
        Ok(e) if e.residual.is_finite() => e.residual,
        _ => f64::INFINITY,
    }
}

/// One local search: repeated descents, each in a chart re-centred at the
/// best point so far, with the initial step shrinking with the residual.
fn run_start(scenario: &Scenario, index: usize) -> (Vec<f64>, f64) {
    let opts = &scenario.options;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    let domain = scenario.domain;
    let dim = domain.manifold_dim();
    let mut x = domain.random_point(&mut rng);
    let mut fx = objective(scenario, &x);
    let mut step = 0.5;
    let max_iters = 200 * (dim + 1);
    for _ in 0..opts.max_rounds {
        if fx <= opts.polish_target {
            break;
        }
        let chart = domain.chart(&x);
        let f = |t: &[f64]| objective(scenario, &chart.point(t));
        let origin = vec![0.0; dim];
        let r = match opts.method {
            LocalMethod::Simplex => local::nelder_mead(&f, &origin, step, 1e-16, opts.polish_target, max_iters),
            LocalMethod::Gradient => local::gradient_descent(&f, &origin, step, 1e-16, opts.polish_target, max_iters),
        };
        if !(r.f < fx) {
            break;
        }
        x = chart.point(&r.x);
        fx = objective(scenario, &x);
        step = fx.sqrt().clamp(1e-9, 0.5);
    }
    (x, fx)
}

/// Multi-start search. Starts run in parallel; the best start is the one
/// with the smallest residual, ties going to the lower index.
pub fn run_starts(scenario: &Scenario) -> Result<MultiStart> {
    let opts = &scenario.options;
    let outcomes: Vec<(Vec<f64>, f64)> = (0..opts.starts)
        .into_par_iter()
        .map(|i| run_start(scenario, i))
        .collect();
    let (best_index, (best_x, _)) = outcomes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.1.total_cmp(&b.1).then(i.cmp(j)))
        .expect("at least one start");
    let eval = scenario.evaluate(best_x)?;
    let start_residuals: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let starts_converged = start_residuals.iter().filter(|&&r| r <= opts.eps_solve).count();
    let best = SolverResult {
        witness: Witness::from_flat(scenario.domain, best_x.clone()),
        success: eval.residual <= opts.eps_solve,
        residual: eval.residual,
        subset: eval.subset,
        common_value: eval.common_value,
        existence: scenario.existence(),
        starts_attempted: opts.starts,
        starts_converged,
        best_start: Some(best_index),
        angle: None,
        wall_time_ms: None,
    };
    Ok(MultiStart { best, start_residuals })
}

/// Multi-start search that fails with `BudgetExhausted` when no start
/// reaches `eps_solve`.
pub fn solve(scenario: &Scenario) -> Result<SolverResult> {
    let run = run_starts(scenario)?;
    if run.best.success {
        Ok(run.best)
    } else {
        Err(Error::BudgetExhausted {
            best_residual: run.best.residual,
            starts: scenario.options.starts,
        })
    }
}

fn rotation_2d(theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    vec![c, -s, s, c]
}

/// Grid scan over `theta in [0, 2 pi)` for `q = 3` rotation scenarios,
/// bisecting every sign change of `f(rho g x) - f(rho g^2 x)` and keeping
/// roots where the identity value does not exceed the others.
pub fn knaster_scan_1d(scenario: &Scenario) -> Result<SolverResult> {
    if scenario.target != Target::Knaster || scenario.domain != (Domain::Rotation { n: 2 }) || scenario.q() != 3 {
        return Err(Error::Scenario("the circle scan needs a knaster scenario with q = 3 on SO(2)".into()));
    }
    let opts = &scenario.options;
    let grid = opts.grid;
    if grid < 2 {
        return Err(Error::ResolutionTooCoarse { grid });
    }
    let diff = |theta: f64| -> Result<f64> {
        let v = scenario.orbit_values(&rotation_2d(theta))?;
        Ok(v[1][0] - v[2][0])
    };
    let thetas: Vec<f64> = (0..=grid).map(|i| TAU * i as f64 / grid as f64).collect();
    let values = thetas.iter().map(|&t| diff(t)).collect::<Result<Vec<f64>>>()?;
    let mut roots = Vec::new();
    for i in 0..grid {
        let (a, b) = (thetas[i], thetas[i + 1]);
        let (da, db) = (values[i], values[i + 1]);
        if da == 0.0 {
            roots.push(a);
        } else if db != 0.0 && (da < 0.0) != (db < 0.0) {
            let (mut lo, mut hi, mut dlo) = (a, b, da);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let dm = diff(mid)?;
                if dm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (dm < 0.0) == (dlo < 0.0) {
                    lo = mid;
                    dlo = dm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    if roots.is_empty() {
        return Err(Error::ResolutionTooCoarse { grid });
    }
    let mut best: Option<(f64, Evaluation)> = None;
    for &theta in &roots {
        let eval = scenario.evaluate(&rotation_2d(theta))?;
        if best.as_ref().is_none_or(|(_, b)| eval.residual < b.residual) {
            best = Some((theta, eval));
        }
    }
    let (theta, eval) = best.expect("nonempty roots");
    let converged = roots
        .iter()
        .filter(|&&t| objective(scenario, &rotation_2d(t)) <= opts.eps_solve)
        .count();
    if eval.residual > opts.eps_solve {
        return Err(Error::BudgetExhausted {
            best_residual: eval.residual,
            starts: roots.len(),
        });
    }
    Ok(SolverResult {
        witness: Witness::from_flat(scenario.domain, rotation_2d(theta)),
        residual: eval.residual,
        subset: eval.subset,
        common_value: eval.common_value,
        success: true,
        existence: scenario.existence(),
        starts_attempted: roots.len(),
        starts_converged: converged,
        best_start: None,
        angle: Some(theta),
        wall_time_ms: None,
    })
}

//! Coincidence-search problems as read from JSON, and their residuals.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupTable};

use super::action::{ActionDescriptor, ActionKind, ActionRep};
use super::expr::{MapDescriptor, MapSpec};
use super::local::{Domain, LocalMethod};
use super::residual::{coincidence_residual, knaster_residual, max_coincidence_residual};

pub const DEFAULT_EPS_SOLVE: f64 = 1e-8;
pub const DEFAULT_VERIFY_TOL: f64 = 1e-12;
pub const DEFAULT_STARTS: usize = 100;
pub const DEFAULT_GRID: usize = 3600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    /// Coincidence set `A(f, k)`.
    #[serde(rename = "A")]
    A,
    /// Maximum coincidence set `A'(f, k)`, scalar `f`.
    #[serde(rename = "A_prime")]
    APrime,
    /// `A'(f1, k) ∩ A(h, q)` for `f = f1 (+) h`.
    #[serde(rename = "A_prime_and_h")]
    APrimeAndH,
    /// Rotation `rho` with `f(rho g x)` constant over `g != e` and
    /// `f(rho x)` at most that constant.
    #[serde(rename = "knaster")]
    Knaster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Existence {
    /// The genus precondition holds, a solution exists.
    Guaranteed,
    /// Free action but the genus precondition fails.
    NotGuaranteed,
    /// Hypotheses of the existence theorem do not apply.
    Unknown,
}

impl Existence {
    pub fn describe(self) -> &'static str {
        match self {
            Existence::Guaranteed => "guaranteed",
            Existence::NotGuaranteed => "not guaranteed",
            Existence::Unknown => "unknown",
        }
    }
}

fn default_starts() -> usize {
    DEFAULT_STARTS
}

/// On-disk scenario format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub domain: Domain,
    pub group: GroupDescriptor,
    pub action: ActionDescriptor,
    pub map: MapDescriptor,
    pub target: Target,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_solve: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<LocalMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub seed: u64,
    pub starts: usize,
    pub eps_solve: f64,
    pub verify_tol: f64,
    pub method: LocalMethod,
    /// Chart re-centrings per start.
    pub max_rounds: usize,
    /// Residual at which a start stops polishing.
    pub polish_target: f64,
    /// Grid size for the one-dimensional rotation scan.
    pub grid: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: DEFAULT_STARTS,
            eps_solve: DEFAULT_EPS_SOLVE,
            verify_tol: DEFAULT_VERIFY_TOL,
            method: LocalMethod::Simplex,
            max_rounds: 12,
            polish_target: 1e-26,
            grid: DEFAULT_GRID,
        }
    }
}

/// A validated coincidence-search problem.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub domain: Domain,
    pub action: ActionRep,
    pub map: MapSpec,
    pub target: Target,
    pub k: usize,
    pub base_point: Option<Vec<f64>>,
    pub options: SolverOptions,
}

/// Residual of one point together with its witness data.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub residual: f64,
    pub subset: Vec<usize>,
    pub common_value: Vec<f64>,
}

impl Scenario {
    pub fn from_json(src: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(src).map_err(|e| Error::Scenario(format!("scenario JSON: {e}")))?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        let group = Arc::new(GroupTable::from_descriptor(&file.group)?);
        let q = group.order();
        let ambient = match file.domain {
            Domain::Sphere { d } => d,
            Domain::Rotation { n } => n,
        };
        if ambient < 2 {
            return Err(Error::Scenario("the domain needs ambient dimension at least 2".into()));
        }
        let action = ActionRep::from_descriptor(group, &file.action, ambient)?;
        let map = MapSpec::from_descriptor(&file.map)?;
        if let Some(m) = file.m {
            if m != map.output_dim() {
                return Err(Error::Scenario(format!(
                    "m = {m} but the map has {} components",
                    map.output_dim()
                )));
            }
        }
        if map.arity() > ambient {
            return Err(Error::Scenario(format!(
                "the map uses x{} but points live in R^{ambient}",
                map.arity()
            )));
        }
        let k = match file.target {
            Target::Knaster => {
                if !matches!(file.domain, Domain::Rotation { .. }) {
                    return Err(Error::Scenario("the knaster target searches over rotations".into()));
                }
                if map.output_dim() != 1 {
                    return Err(Error::Scenario("the knaster target needs a scalar map".into()));
                }
                if q < 3 {
                    return Err(Error::Scenario("the knaster target needs |G| >= 3".into()));
                }
                match file.k {
                    Some(k) if k != q - 1 => {
                        return Err(Error::KOutOfRange { k, lo: q - 1, hi: q - 1 });
                    }
                    _ => q - 1,
                }
            }
            _ => {
                if !matches!(file.domain, Domain::Sphere { .. }) {
                    return Err(Error::Scenario("coincidence targets search over a sphere".into()));
                }
                let k = file.k.ok_or_else(|| Error::Scenario("missing k".into()))?;
                if k < 2 || k > q {
                    return Err(Error::KOutOfRange { k, lo: 2, hi: q });
                }
                if file.target == Target::APrime && map.output_dim() != 1 {
                    return Err(Error::Scenario("the A_prime target needs a scalar map".into()));
                }
                k
            }
        };
        let base_point = match (file.target, &file.base_point) {
            (Target::Knaster, Some(x)) => {
                if x.len() != ambient {
                    return Err(Error::Shape(format!("base point of length {} in R^{ambient}", x.len())));
                }
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(norm > 0.0) || !norm.is_finite() {
                    return Err(Error::Scenario("the base point must be a nonzero vector".into()));
                }
                Some(x.iter().map(|v| v / norm).collect())
            }
            (Target::Knaster, None) => {
                let mut x = vec![0.0; ambient];
                x[0] = 1.0;
                Some(x)
            }
            (_, Some(_)) => return Err(Error::Scenario("base_point only applies to the knaster target".into())),
            (_, None) => None,
        };
        let defaults = SolverOptions::default();
        let options = SolverOptions {
            seed: file.seed,
            starts: file.starts,
            eps_solve: file.eps_solve.unwrap_or(defaults.eps_solve),
            verify_tol: file.verify_tol.unwrap_or(defaults.verify_tol),
            method: file.method.unwrap_or(defaults.method),
            grid: file.grid.unwrap_or(defaults.grid),
            ..defaults
        };
        if options.starts == 0 {
            return Err(Error::Scenario("starts must be positive".into()));
        }
        if !(options.eps_solve >= 0.0) || !(options.verify_tol >= 0.0) {
            return Err(Error::Scenario("tolerances must be nonnegative".into()));
        }
        Ok(Self {
            domain: file.domain,
            action,
            map,
            target: file.target,
            k,
            base_point,
            options,
        })
    }

    pub fn group(&self) -> &Arc<GroupTable> {
        self.action.group()
    }

    pub fn q(&self) -> usize {
        self.group().order()
    }

    pub fn m(&self) -> usize {
        self.map.output_dim()
    }

    /// Whether the existence theorem covers this scenario. On spheres a
    /// free action has genus `d`; the condition is `d > (q-1)(m-1) + k-1`.
    /// The rotation search is covered for odd p-tori acting on `I[G]`.
    pub fn existence(&self) -> Existence {
        match self.domain {
            Domain::Sphere { d } => {
                if !self.action.is_free() {
                    return Existence::Unknown;
                }
                let bound = (self.q() - 1) * (self.m() - 1) + self.k - 1;
                if d > bound {
                    Existence::Guaranteed
                } else {
                    Existence::NotGuaranteed
                }
            }
            Domain::Rotation { .. } => {
                let g = self.group();
                let exponent = (1..g.order()).map(|e| g.element_order(e)).max().unwrap_or(1);
                let odd_p_torus = g.is_abelian()
                    && exponent % 2 == 1
                    && crate::group::is_prime(exponent as u64)
                    && (1..g.order()).all(|e| g.element_order(e) == exponent);
                if odd_p_torus && self.action.kind() == ActionKind::PermutationIg {
                    Existence::Guaranteed
                } else {
                    Existence::Unknown
                }
            }
        }
    }

    /// Map values along the orbit: entry `g` is `f(R(g^-1) x)` on spheres
    /// and `f(rho R(g) x)` for rotations.
    pub fn orbit_values(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        let q = self.q();
        let group = self.group();
        let dim = self.action.dim();
        let mut moved = vec![0.0; dim];
        let mut out = Vec::with_capacity(q);
        match self.domain {
            Domain::Sphere { d } => {
                if point.len() != d {
                    return Err(Error::Shape(format!("point of length {} on S^{}", point.len(), d - 1)));
                }
                for g in 0..q {
                    self.action.apply_into(group.inv(g), point, &mut moved);
                    let mut v = Vec::with_capacity(self.m());
                    self.map.eval_into(&moved, &mut v)?;
                    out.push(v);
                }
            }
            Domain::Rotation { n } => {
                if point.len() != n * n {
                    return Err(Error::Shape(format!("rotation with {} entries for SO({n})", point.len())));
                }
                let rho = DMatrix::from_row_slice(n, n, point);
                let x = self.base_point.as_ref().expect("validated knaster scenario");
                for g in 0..q {
                    self.action.apply_into(g, x, &mut moved);
                    let rotated: Vec<f64> = (0..n).map(|r| (0..n).map(|c| rho[(r, c)] * moved[c]).sum()).collect();
                    let mut v = Vec::with_capacity(1);
                    self.map.eval_into(&rotated, &mut v)?;
                    out.push(v);
                }
            }
        }
        if out.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation("the map is not finite on this orbit".into()));
        }
        Ok(out)
    }

    /// `A(f, k)` residual of a sphere point for the full map.
    pub fn residual_a(&self, x: &[f64]) -> Result<(f64, Vec<usize>)> {
        let values = self.orbit_values(x)?;
        Ok(coincidence_residual(&values, self.k))
    }

    /// `A'(f1, k)` residual of a sphere point for the first component.
    pub fn residual_aprime(&self, x: &[f64]) -> Result<(f64, Vec<usize>)> {
        let values: Vec<f64> = self.orbit_values(x)?.into_iter().map(|v| v[0]).collect();
        Ok(max_coincidence_residual(&values, self.k))
    }

    /// Knaster residual of a rotation, row-major.
    pub fn residual_knaster(&self, rho: &[f64]) -> Result<f64> {
        let values: Vec<f64> = self.orbit_values(rho)?.into_iter().map(|v| v[0]).collect();
        Ok(knaster_residual(&values).0)
    }

    /// Residual of the scenario's target with witness subset and common value.
    pub fn evaluate(&self, point: &[f64]) -> Result<Evaluation> {
        let values = self.orbit_values(point)?;
        let mean_over = |subset: &[usize], comp: std::ops::Range<usize>| -> Vec<f64> {
            comp.map(|c| subset.iter().map(|&g| values[g][c]).sum::<f64>() / subset.len() as f64)
                .collect()
        };
        let m = self.m();
        Ok(match self.target {
            Target::A => {
                let (residual, subset) = coincidence_residual(&values, self.k);
                let common_value = mean_over(&subset, 0..m);
                Evaluation { residual, subset, common_value }
            }
            Target::APrime => {
                let first: Vec<f64> = values.iter().map(|v| v[0]).collect();
                let (residual, subset) = max_coincidence_residual(&first, self.k);
                let common_value = mean_over(&subset, 0..1);
                Evaluation { residual, subset, common_value }
            }
            Target::APrimeAndH => {
                let first: Vec<f64> = values.iter().map(|v| v[0]).collect();
                let (r1, subset) = max_coincidence_residual(&first, self.k);
                let mut common_value = mean_over(&subset, 0..1);
                let mut residual = r1;
                if m > 1 {
                    let rest: Vec<Vec<f64>> = values.iter().map(|v| v[1..].to_vec()).collect();
                    let (r2, all) = coincidence_residual(&rest, self.q());
                    residual += r2;
                    common_value.extend(mean_over(&all, 1..m));
                }
                Evaluation { residual, subset, common_value }
            }
            Target::Knaster => {
                let first: Vec<f64> = values.iter().map(|v| v[0]).collect();
                let (residual, mean) = knaster_residual(&first);
                Evaluation {
                    residual,
                    subset: (1..self.q()).collect(),
                    common_value: vec![mean],
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn borsuk_ulam() -> Scenario {
        Scenario::from_json(
            r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":2},
                "action":"antipodal","map":{"expr":"x1 + x2^2","m":1},"target":"A","k":2}"#,
        )
        .unwrap()
    }

    #[test]
    fn residual_a_examples() {
        let s = borsuk_ulam();
        assert_eq!(s.residual_a(&[0.0, 1.0, 0.0]).unwrap(), (0.0, vec![0, 1]));
        assert_eq!(s.residual_a(&[1.0, 0.0, 0.0]).unwrap().0, 4.0);
        assert_eq!(s.existence(), Existence::Guaranteed);
    }

    #[test]
    fn constant_map_has_zero_residual() {
        let s = Scenario::from_json(
            r#"{"domain":{"kind":"sphere","d":4},"group":{"kind":"cyclic","q":3},
                "action":"complex_roots","map":{"expr":"2.5"},"target":"A","k":3}"#,
        )
        .unwrap();
        assert_eq!(s.residual_a(&[0.5, 0.5, 0.5, 0.5]).unwrap().0, 0.0);
    }

    #[test]
    fn knaster_constant_map() {
        let s = Scenario::from_json(
            r#"{"domain":{"kind":"rotation","n":2},"group":{"kind":"cyclic","q":3},
                "action":"permutation_ig","map":{"expr":"1"},"target":"knaster"}"#,
        )
        .unwrap();
        assert_eq!(s.residual_knaster(&[0.6, -0.8, 0.8, 0.6]).unwrap(), 0.0);
        assert_eq!(s.existence(), Existence::Guaranteed);
    }

    #[test]
    fn rejects_bad_scenarios() {
        let bad = [
            r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":2},"action":"antipodal","map":{"expr":"x1"},"target":"A","k":3}"#,
            r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":2},"action":"antipodal","map":{"expr":"x4"},"target":"A","k":2}"#,
            r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":3},"action":"complex_roots","map":{"expr":"x1"},"target":"A","k":2}"#,
            r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":2},"action":"antipodal","map":{"expr":"x1"},"target":"A","k":2,"typo":1}"#,
            r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":2},"action":"antipodal","map":{"expr":["x1","x2"]},"target":"A_prime","k":2}"#,
        ];
        for src in bad {
            assert!(Scenario::from_json(src).is_err(), "{src}");
        }
    }

    #[test]
    fn precondition_flag() {
        let s = Scenario::from_json(
            r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":2},
                "action":"antipodal","map":{"expr":["x1","x2","x3","x1*x2"],"m":4},"target":"A","k":2}"#,
        )
        .unwrap();
        assert_eq!(s.existence(), Existence::NotGuaranteed);
        let klein = Scenario::from_json(
            r#"{"domain":{"kind":"rotation","n":3},"group":{"kind":"p_torus","p":2,"n":2},
                "action":"permutation_ig","map":{"expr":"x1"},"target":"knaster"}"#,
        )
        .unwrap();
        assert_eq!(klein.existence(), Existence::Unknown);
    }
}

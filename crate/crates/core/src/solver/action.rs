//! Orthogonal representations of finite groups on `R^d`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::config_spaces::PointAction;
use crate::error::{Error, Result};
use crate::group::GroupTable;
use crate::scalar::{Rational, Scalar};

/// Tolerance for the representation axioms.
pub const REP_TOL: f64 = 1e-12;
/// `R(g) - I` with a singular value below this counts as having a fixed vector.
pub const FIXED_VECTOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    /// `Z/2` acting by `x -> -x`.
    Antipodal,
    /// Regular representation: coordinate permutation of `R^q`.
    Permutation,
    /// Coordinate permutation restricted to `I[G]`, in an orthonormal basis.
    PermutationIg,
    /// Cyclic group acting on `C^(d/2)` by multiplication with roots of unity.
    ComplexRoots,
    UserSupplied,
}

/// Action as written in a scenario file: a kind name or explicit matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionDescriptor {
    Named(ActionKind),
    Matrices { matrices: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone)]
pub struct ActionRep {
    group: Arc<GroupTable>,
    kind: ActionKind,
    dim: usize,
    matrices: Vec<DMatrix<f64>>,
    exact: Option<Vec<Vec<Vec<Rational>>>>,
}

fn permutation_matrix(group: &GroupTable, g: usize) -> DMatrix<f64> {
    let q = group.order();
    // P(g) e_h = e_{gh}
    DMatrix::from_fn(q, q, |r, c| if group.mul(g, c) == r { 1.0 } else { 0.0 })
}

/// Orthonormal basis of `I[G]` as the columns of a `q x (q-1)` matrix:
/// column `j` is `(1, .., 1, -j, 0, ..)/sqrt(j (j+1))` with `j` leading ones.
pub fn ig_basis(q: usize) -> DMatrix<f64> {
    DMatrix::from_fn(q, q.saturating_sub(1), |r, c| {
        let j = c + 1;
        let norm = ((j * (j + 1)) as f64).sqrt();
        if r < j {
            1.0 / norm
        } else if r == j {
            -(j as f64) / norm
        } else {
            0.0
        }
    })
}

impl ActionRep {
    fn build(
        group: Arc<GroupTable>,
        kind: ActionKind,
        matrices: Vec<DMatrix<f64>>,
        exact: Option<Vec<Vec<Vec<Rational>>>>,
    ) -> Result<Self> {
        let dim = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        let rep = Self {
            group,
            kind,
            dim,
            matrices,
            exact,
        };
        rep.validate()?;
        Ok(rep)
    }

    pub fn antipodal(group: Arc<GroupTable>, d: usize) -> Result<Self> {
        if group.order() != 2 {
            return Err(Error::Scenario("the antipodal action needs a group of order 2".into()));
        }
        if d == 0 {
            return Err(Error::Scenario("dimension must be positive".into()));
        }
        let id = DMatrix::<f64>::identity(d, d);
        let exact = (0..2)
            .map(|g| {
                let s = if g == 0 { Rational::one() } else { -Rational::one() };
                (0..d)
                    .map(|r| (0..d).map(|c| if r == c { s.clone() } else { Rational::zero() }).collect())
                    .collect()
            })
            .collect();
        Self::build(group, ActionKind::Antipodal, vec![id.clone(), -id], Some(exact))
    }

    pub fn permutation(group: Arc<GroupTable>) -> Result<Self> {
        let q = group.order();
        let matrices = (0..q).map(|g| permutation_matrix(&group, g)).collect();
        let exact = (0..q)
            .map(|g| {
                (0..q)
                    .map(|r| {
                        (0..q)
                            .map(|c| if group.mul(g, c) == r { Rational::one() } else { Rational::zero() })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::build(group, ActionKind::Permutation, matrices, Some(exact))
    }

    pub fn permutation_ig(group: Arc<GroupTable>) -> Result<Self> {
        let q = group.order();
        if q < 2 {
            return Err(Error::Scenario("I[G] is zero for the trivial group".into()));
        }
        let b = ig_basis(q);
        let matrices = (0..q)
            .map(|g| b.transpose() * permutation_matrix(&group, g) * &b)
            .collect();
        Self::build(group, ActionKind::PermutationIg, matrices, None)
    }

    pub fn complex_roots(group: Arc<GroupTable>, d: usize) -> Result<Self> {
        let q = group.order();
        if d == 0 || d % 2 != 0 {
            return Err(Error::Scenario(format!("complex_roots needs an even dimension, got {d}")));
        }
        if group.table() != GroupTable::cyclic(q)?.table() {
            return Err(Error::Scenario("complex_roots needs a cyclic group".into()));
        }
        let matrices = (0..q)
            .map(|g| {
                let (s, c) = (2.0 * PI * g as f64 / q as f64).sin_cos();
                let mut m = DMatrix::<f64>::zeros(d, d);
                for b in 0..d / 2 {
                    let (i, j) = (2 * b, 2 * b + 1);
                    m[(i, i)] = c;
                    m[(i, j)] = -s;
                    m[(j, i)] = s;
                    m[(j, j)] = c;
                }
                m
            })
            .collect();
        Self::build(group, ActionKind::ComplexRoots, matrices, None)
    }

    pub fn user_supplied(group: Arc<GroupTable>, matrices: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::Scenario(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let d = matrices[0].len();
        let mats = matrices
            .iter()
            .map(|m| {
                if m.len() != d || m.iter().any(|r| r.len() != d) {
                    return Err(Error::Scenario("matrices must all be square of one size".into()));
                }
                Ok(DMatrix::from_fn(d, d, |r, c| m[r][c]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(group, ActionKind::UserSupplied, mats, None)
    }

    pub fn from_descriptor(group: Arc<GroupTable>, desc: &ActionDescriptor, d: usize) -> Result<Self> {
        let rep = match desc {
            ActionDescriptor::Named(ActionKind::Antipodal) => Self::antipodal(group, d)?,
            ActionDescriptor::Named(ActionKind::Permutation) => Self::permutation(group)?,
            ActionDescriptor::Named(ActionKind::PermutationIg) => Self::permutation_ig(group)?,
            ActionDescriptor::Named(ActionKind::ComplexRoots) => Self::complex_roots(group, d)?,
            ActionDescriptor::Named(ActionKind::UserSupplied) => {
                return Err(Error::Scenario("user_supplied actions need a \"matrices\" field".into()))
            }
            ActionDescriptor::Matrices { matrices } => Self::user_supplied(group, matrices.clone())?,
        };
        if rep.dim != d {
            return Err(Error::Scenario(format!(
                "action acts on R^{} but the domain lives in R^{d}",
                rep.dim
            )));
        }
        Ok(rep)
    }

    /// `R(e) = I`, `R(g) R(h) = R(gh)` and orthogonality, to [`REP_TOL`].
    pub fn validate(&self) -> Result<()> {
        let q = self.group.order();
        if self.matrices.len() != q || self.dim == 0 {
            return Err(Error::InvalidParameter("one nonempty matrix per group element".into()));
        }
        let id = DMatrix::<f64>::identity(self.dim, self.dim);
        let max_abs = |m: DMatrix<f64>| m.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if max_abs(&self.matrices[0] - &id) > REP_TOL {
            return Err(Error::InvalidParameter("R(e) is not the identity".into()));
        }
        for g in 0..q {
            let r = &self.matrices[g];
            if r.nrows() != self.dim || r.ncols() != self.dim {
                return Err(Error::InvalidParameter(format!("R({g}) has the wrong shape")));
            }
            if max_abs(r.transpose() * r - &id) > REP_TOL {
                return Err(Error::InvalidParameter(format!("R({g}) is not orthogonal")));
            }
            for h in 0..q {
                if max_abs(r * &self.matrices[h] - &self.matrices[self.group.mul(g, h)]) > REP_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "R({g}) R({h}) differs from R({})",
                        self.group.mul(g, h)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Arc<GroupTable> {
        &self.group
    }

    pub fn kind(&self) -> ActionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &DMatrix<f64> {
        &self.matrices[g]
    }

    pub fn has_exact_source(&self) -> bool {
        self.exact.is_some()
    }

    /// No non-identity element fixes a nonzero vector.
    pub fn is_free(&self) -> bool {
        let id = DMatrix::<f64>::identity(self.dim, self.dim);
        (1..self.group.order()).all(|g| {
            let sv = (&self.matrices[g] - &id).singular_values();
            sv.iter().all(|&s| s > FIXED_VECTOR_TOL)
        })
    }

    /// No nonzero vector is fixed by the whole group.
    pub fn is_fixed_point_free(&self) -> bool {
        let q = self.group.order();
        let mut avg = DMatrix::<f64>::zeros(self.dim, self.dim);
        for m in &self.matrices {
            avg += m;
        }
        avg /= q as f64;
        // the average is the projection onto the fixed subspace
        avg.iter().all(|x| x.abs() < FIXED_VECTOR_TOL)
    }

    pub fn apply_into(&self, g: usize, x: &[f64], out: &mut [f64]) {
        let m = &self.matrices[g];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..self.dim).map(|c| m[(r, c)] * x[c]).sum();
        }
    }
}

impl PointAction<f64> for ActionRep {
    fn group(&self) -> &Arc<GroupTable> {
        &self.group
    }

    fn point_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, g: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.group.check_index(g)?;
        if x.len() != self.dim {
            return Err(Error::Shape(format!("point of dimension {} for R^{}", x.len(), self.dim)));
        }
        let mut out = vec![0.0; self.dim];
        self.apply_into(g, x, &mut out);
        Ok(out)
    }
}

impl PointAction<Rational> for ActionRep {
    fn group(&self) -> &Arc<GroupTable> {
        &self.group
    }

    fn point_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, g: usize, x: &[Rational]) -> Result<Vec<Rational>> {
        self.group.check_index(g)?;
        let exact = self
            .exact
            .as_ref()
            .ok_or_else(|| Error::Evaluation(format!("{:?} action has no exact rational form", self.kind)))?;
        if x.len() != self.dim {
            return Err(Error::Shape(format!("point of dimension {} for R^{}", x.len(), self.dim)));
        }
        Ok(exact[g]
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, b)| a * b)
                    .fold(Rational::zero(), |acc, v| acc + v)
            })
            .collect())
    }
}

/// Rational points and floats share the same action through this helper.
pub fn apply_generic<S: Scalar>(rep: &ActionRep, g: usize, x: &[S]) -> Result<Vec<S>>
where
    ActionRep: PointAction<S>,
{
    PointAction::<S>::apply(rep, g, x)
}

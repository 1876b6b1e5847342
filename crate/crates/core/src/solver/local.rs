//! Local search on the unit sphere and on `SO(n)` through charts: a point
//! of the manifold plus tangent coordinates, mapped back by a retraction
//! (renormalisation on the sphere, column orthonormalisation on `SO(n)`).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Unit sphere `S^(d-1)` in `R^d`.
    Sphere { d: usize },
    /// Rotation group `SO(n)`, points stored row-major.
    Rotation { n: usize },
}

impl Domain {
    /// Manifold dimension, the number of chart coordinates.
    pub fn manifold_dim(&self) -> usize {
        match *self {
            Domain::Sphere { d } => d - 1,
            Domain::Rotation { n } => n * (n - 1) / 2,
        }
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match *self {
            Domain::Sphere { d } => loop {
                let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-8 {
                    break v.into_iter().map(|x| x / norm).collect();
                }
            },
            Domain::Rotation { n } => {
                let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
                let mut q = orthonormalize(&g);
                if q.determinant() < 0.0 {
                    q.column_mut(0).neg_mut();
                }
                flatten(&q)
            }
        }
    }

    pub fn chart(&self, center: &[f64]) -> Chart {
        match *self {
            Domain::Sphere { d } => {
                let c = DVector::from_column_slice(center);
                let mut full = DMatrix::<f64>::zeros(d, d + 1);
                full.set_column(0, &c);
                for i in 0..d {
                    full[(i, i + 1)] = 1.0;
                }
                let q = full.qr().q();
                let basis = q.columns(1, d - 1).into_owned();
                Chart::Sphere { center: c, basis }
            }
            Domain::Rotation { n } => Chart::Rotation {
                base: DMatrix::from_row_slice(n, n, center),
            },
        }
    }
}

pub enum Chart {
    Sphere { center: DVector<f64>, basis: DMatrix<f64> },
    Rotation { base: DMatrix<f64> },
}

impl Chart {
    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        match self {
            Chart::Sphere { center, basis } => {
                let v = center + basis * DVector::from_column_slice(t);
                let norm = v.norm();
                v.iter().map(|x| x / norm).collect()
            }
            Chart::Rotation { base } => {
                let n = base.nrows();
                let mut skew = DMatrix::<f64>::zeros(n, n);
                let mut idx = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        skew[(i, j)] = t[idx];
                        skew[(j, i)] = -t[idx];
                        idx += 1;
                    }
                }
                let step = DMatrix::<f64>::identity(n, n) + skew;
                flatten(&orthonormalize(&(base * step)))
            }
        }
    }
}

/// Gram–Schmidt via QR with the signs fixed so that `R` has a positive
/// diagonal; preserves the sign of the determinant.
pub fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalMethod {
    /// Nelder–Mead simplex descent.
    #[default]
    Simplex,
    /// Finite-difference gradient descent with backtracking.
    Gradient,
}

#[derive(Debug, Clone)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
}

/// Nelder–Mead with the standard coefficients. Stops when the simplex
/// collapses below `xtol`, the best value reaches `ftarget`, or after
/// `max_iters` iterations.
pub fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    xtol: f64,
    ftarget: f64,
    max_iters: usize,
) -> LocalResult {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };
    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[0] <= ftarget {
            break;
        }
        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < xtol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflected = lerp(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = lerp(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = lerp(&centroid, &worst, -0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = lerp(&centroid, &worst, 0.5);
                let fc = f(&c);
                (c, fc)
            };
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = lerp(&simplex[0], &simplex[i], 0.5);
                    values[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("nonempty simplex");
    LocalResult {
        x: simplex[best].clone(),
        f: values[best],
        evals,
    }
}

/// Central-difference gradient descent with Armijo backtracking.
pub fn gradient_descent(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    xtol: f64,
    ftarget: f64,
    max_iters: usize,
) -> LocalResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut evals = 1;
    let mut alpha = step;
    for _ in 0..max_iters {
        if fx <= ftarget {
            break;
        }
        let h = (step * 1e-4).max(1e-10);
        let grad: Vec<f64> = (0..n)
            .map(|i| {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += h;
                b[i] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect();
        evals += 2 * n;
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm == 0.0 || !gnorm.is_finite() {
            break;
        }
        let mut accepted = false;
        while alpha > xtol {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - alpha * gi / gnorm).collect();
            let ft = f(&trial);
            evals += 1;
            if ft < fx - 1e-4 * alpha * gnorm {
                x = trial;
                fx = ft;
                alpha *= 2.0;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    LocalResult { x, f: fx, evals }
}

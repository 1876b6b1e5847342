//! The acceptance matrix as a single report. Each row checks one claim and
//! carries an anchor naming it.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arrangement::{betti_report, k_equal_arrangement, v1_arrangement};
use crate::config_spaces::{
    act_on_pattern, coincidence_pattern, hat_map, in_kwise_diagonal, pattern_action_fixed_points,
    DEFAULT_COINCIDENCE_EPS,
};
use crate::cover_check::cover_check;
use crate::error::{Error, Result};
use crate::group::{act_on_tuple, fixed_subsets, GroupTable, OrbitTuple};
use crate::scalar::{rat, Rational, ScalarKind};
use crate::solver::residual::coincidence_residual;
use crate::solver::{knaster_scan_1d, run_starts, ActionRep, Existence, MapSpec, Scenario, Witness};

pub const BORSUK_ULAM: &str = r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":2},"action":"antipodal","map":{"expr":"x1 + x2^2","m":1},"target":"A","k":2,"starts":100}"#;
pub const Z3_ON_S3: &str = r#"{"domain":{"kind":"sphere","d":4},"group":{"kind":"cyclic","q":3},"action":"complex_roots","map":{"expr":"x1","m":1},"target":"A_prime","k":2,"seed":7,"starts":100}"#;
pub const KNASTER_CIRCLE: &str = r#"{"domain":{"kind":"rotation","n":2},"group":{"kind":"cyclic","q":3},"action":"permutation_ig","map":{"expr":"0.3*x1 - 0.7*x2"},"target":"knaster","base_point":[0.6,0.8]}"#;
pub const KNASTER_KLEIN: &str = r#"{"domain":{"kind":"rotation","n":3},"group":{"kind":"p_torus","p":2,"n":2},"action":"permutation_ig","map":{"expr":"0.5*x1 - x2 + 0.25*x3"},"target":"knaster","base_point":[1,0,0],"starts":200}"#;
pub const OVERDETERMINED: &str = r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":2},"action":"antipodal","map":{"expr":["x1","x2","x3","x1*x2 + x3"],"m":4},"target":"A","k":2,"starts":50}"#;

/// Faults the self-test can plant to show that its checks bite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Injection {
    /// Overwrite one entry of a multiplication table.
    CorruptGroupTable,
    /// Float coincidence tolerance forced to zero.
    ZeroTolerance,
}

#[derive(Debug, Clone)]
pub struct SelftestOptions {
    pub seed: u64,
    pub cover_samples: usize,
    pub exact_points: usize,
    pub inject: Option<Injection>,
    pub timing: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            cover_samples: 100_000,
            exact_points: 10_000,
            inject: None,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionRow {
    pub id: String,
    pub anchor: &'static str,
    pub pass: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub subcommand: &'static str,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject: Option<Injection>,
    pub rows: Vec<AssertionRow>,
    pub pass: bool,
}

impl SelftestReport {
    pub fn first_failure(&self) -> Option<&AssertionRow> {
        self.rows.iter().find(|r| !r.pass)
    }
}

type Check = fn(&SelftestOptions) -> Result<(bool, String)>;

/// Row id, anchor, check.
pub fn rows() -> Vec<(&'static str, &'static str, Check)> {
    vec![
        ("group-axioms", "Let G be a finite group", check_group_axioms),
        ("cover", "W(q,k) = V_1∪V_2∪⋯∪V_{k-1}", check_cover),
        ("k-equal-vanishing", "precise-genus-p-tori", check_k_equal),
        ("k-equal-exact-values", "a complement to a system of (q−k+1)-dimensional linear subspaces", check_k_equal_exact),
        ("v1-vanishing", "a system of (m + q − k)-dimensional linear subspaces", check_v1),
        ("pattern-fixed-points", "acts on such patterns without fixed points", check_patterns),
        ("subset-fixed-points", "no G-fixed points for m<q", check_subsets),
        ("hat-equivariance", "the map f̂ is G-equivariant", check_hat_equivariance),
        ("coincidence-redefinition", "A(f, k) = f̂⁻¹(Δ_q^k(Y))", check_redefinition),
        ("float-pattern-tolerance", "a pattern of coincidence", check_float_patterns),
        ("borsuk-ulam", "coinc-zp", check_borsuk_ulam),
        ("z3-on-s3", "coinc-fpf", check_z3),
        ("knaster-circle", "f(ρ(gx)) = c, and f(ρ(x)) ≤ c", check_knaster_circle),
        ("knaster-klein", "there exists a rotation ρ of S^{q−2} with positive determinant", check_knaster_klein),
        ("precondition-negative-control", "g_G(X) > (|G|−1)(m−1) + k − 1", check_negative_control),
    ]
}

pub fn selftest(opts: &SelftestOptions) -> SelftestReport {
    let mut out = Vec::new();
    for (id, anchor, check) in rows() {
        let start = Instant::now();
        let (pass, detail) = match check(opts) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            log::error!("{id} failed ({anchor}): {detail}");
        } else {
            log::info!("{id} passed");
        }
        out.push(AssertionRow {
            id: id.to_string(),
            anchor,
            pass,
            detail,
            elapsed_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        });
    }
    SelftestReport {
        subcommand: "selftest",
        seed: opts.seed,
        inject: opts.inject,
        pass: out.iter().all(|r| r.pass),
        rows: out,
    }
}

fn check_group_axioms(opts: &SelftestOptions) -> Result<(bool, String)> {
    let mut groups: Vec<GroupTable> = (1..=12).map(GroupTable::cyclic).collect::<Result<_>>()?;
    for (p, n) in [(2, 2), (2, 3), (3, 2), (5, 1), (3, 3)] {
        groups.push(GroupTable::p_torus(p, n)?);
    }
    if opts.inject == Some(Injection::CorruptGroupTable) {
        groups[4].corrupt_entry(1, 1, 0);
    }
    for g in &groups {
        if let Err(e) = g.verify_axioms() {
            return Ok((false, format!("{}: {e}", g.label())));
        }
    }
    Ok((true, format!("{} tables satisfy the group axioms", groups.len())))
}

fn check_cover(opts: &SelftestOptions) -> Result<(bool, String)> {
    let mut classified = 0;
    for q in 3..=6 {
        for k in 2..=q {
            let r = cover_check(q, k, opts.cover_samples, opts.seed, ScalarKind::Rational)?;
            if !r.pass {
                return Ok((false, format!("q={q} k={k}: {} failures, first {:?}", r.failure_count, r.failures.first())));
            }
            classified += r.classified;
        }
    }
    Ok((true, format!("18 (q,k) pairs x {} samples, {classified} classified, 0 failures", opts.cover_samples)))
}

fn check_k_equal(_: &SelftestOptions) -> Result<(bool, String)> {
    let mut cases = 0;
    for q in 2..=7 {
        for k in 2..=q {
            for p in [2, 3, 5] {
                let r = betti_report(&k_equal_arrangement(q, k)?, p)?;
                if !r.pass {
                    return Ok((false, format!("q={q} k={k} p={p}: betti {:?}", r.betti)));
                }
                cases += 1;
            }
        }
    }
    Ok((true, format!("{cases} (q,k,p) cases vanish through degree k-3")))
}

fn check_k_equal_exact(_: &SelftestOptions) -> Result<(bool, String)> {
    let circle = betti_report(&k_equal_arrangement(3, 3)?, 3)?.betti;
    let sphere = betti_report(&k_equal_arrangement(4, 4)?, 3)?.betti;
    let pass = circle == [0, 1, 0] && sphere == [0, 0, 1, 0];
    Ok((pass, format!("q=k=3: {circle:?}, q=k=4: {sphere:?}")))
}

fn check_v1(_: &SelftestOptions) -> Result<(bool, String)> {
    let mut parts = Vec::new();
    for (m, q, k) in [(2, 3, 2), (2, 3, 3), (2, 4, 3)] {
        for p in [2, 3, 5] {
            let r = betti_report(&v1_arrangement(m, q, k)?, p)?;
            if !r.pass {
                return Ok((false, format!("(m,q,k)=({m},{q},{k}) p={p}: betti {:?}", r.betti)));
            }
        }
        let r = betti_report(&v1_arrangement(m, q, k)?, 2)?;
        parts.push(format!("({m},{q},{k}): {:?}", r.betti));
    }
    Ok((true, parts.join("; ")))
}

fn check_patterns(_: &SelftestOptions) -> Result<(bool, String)> {
    for p in [3, 5, 7] {
        let g = GroupTable::cyclic(p)?;
        for k in 1..=p {
            let fixed = pattern_action_fixed_points(&g, k)?.len();
            let expected = if k == 1 || k == p { 1 } else { 0 };
            if fixed != expected {
                return Ok((false, format!("p={p} k={k}: {fixed} fixed patterns")));
            }
        }
    }
    Ok((true, "no fixed patterns for 2 <= k <= p-1, p in {3,5,7}".into()))
}

fn check_subsets(_: &SelftestOptions) -> Result<(bool, String)> {
    let mut groups: Vec<GroupTable> = (2..=8).map(GroupTable::cyclic).collect::<Result<_>>()?;
    groups.push(GroupTable::p_torus(2, 2)?);
    groups.push(GroupTable::p_torus(2, 3)?);
    for g in &groups {
        for m in 1..g.order() {
            if !fixed_subsets(g, m).is_empty() {
                return Ok((false, format!("{}: fixed {m}-subset", g.label())));
            }
        }
    }
    Ok((true, format!("{} groups of order <= 8 have no fixed proper subsets", groups.len())))
}

const POLYNOMIALS: [&[&str]; 3] = [
    &["x1^2 + x2*x3 - x1"],
    &["x1*x2 - 2*x3 + 1/2"],
    &["x1 + x2", "x3^2 - x1*x3"],
];

/// Random rational point with frequent repeated coordinates.
fn tied_point(rng: &mut ChaCha8Rng, q: usize) -> Vec<Rational> {
    let pool = [rat(-1, 1), rat(0, 1), rat(1, 2), rat(1, 1), rat(2, 3)];
    let width = rng.random_range(1..=pool.len());
    (0..q).map(|_| pool[rng.random_range(0..width)].clone()).collect()
}

fn exact_setups() -> Result<Vec<(Arc<GroupTable>, ActionRep)>> {
    let groups = vec![
        GroupTable::cyclic(3)?,
        GroupTable::cyclic(4)?,
        GroupTable::p_torus(2, 2)?,
        GroupTable::cyclic(5)?,
    ];
    groups
        .into_iter()
        .map(|g| {
            let g = Arc::new(g);
            Ok((g.clone(), ActionRep::permutation(g)?))
        })
        .collect()
}

fn check_hat_equivariance(opts: &SelftestOptions) -> Result<(bool, String)> {
    let setups = exact_setups()?;
    let maps: Vec<MapSpec> = POLYNOMIALS.iter().map(|s| MapSpec::parse(s)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..opts.exact_points {
        let (group, action) = &setups[i % setups.len()];
        let f = &maps[(i / setups.len()) % maps.len()];
        let x = tied_point(&mut rng, group.order());
        let eval = |y: &[Rational]| f.eval(y);
        let hat = hat_map(eval, action, &x)?;
        for h in 0..group.order() {
            let hx = crate::solver::action::apply_generic(action, h, &x)?;
            if act_on_tuple(h, &hat)?.values() != hat_map(eval, action, &hx)?.values() {
                return Ok((false, format!("point {i}, h = {h}")));
            }
        }
    }
    Ok((true, format!("{} exact points, all group elements", opts.exact_points)))
}

fn check_redefinition(opts: &SelftestOptions) -> Result<(bool, String)> {
    let setups = exact_setups()?;
    let maps: Vec<MapSpec> = POLYNOMIALS.iter().map(|s| MapSpec::parse(s)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut zeros = 0;
    for i in 0..opts.exact_points {
        let (group, action) = &setups[i % setups.len()];
        let f = &maps[(i / setups.len()) % maps.len()];
        let q = group.order();
        let k = rng.random_range(2..=q);
        let x = tied_point(&mut rng, q);
        let hat: OrbitTuple<Rational> = hat_map(|y: &[Rational]| f.eval(y), action, &x)?;
        let (residual, subset) = coincidence_residual(hat.values(), k);
        let zero = residual == Rational::from_integer(0.into());
        zeros += zero as usize;
        if zero != in_kwise_diagonal(&hat, k, DEFAULT_COINCIDENCE_EPS)? || subset.len() != k {
            return Ok((false, format!("point {i}, k = {k}: residual {residual}")));
        }
    }
    Ok((true, format!("{} exact points, {zeros} in A(f,k)", opts.exact_points)))
}

fn check_float_patterns(opts: &SelftestOptions) -> Result<(bool, String)> {
    let eps = if opts.inject == Some(Injection::ZeroTolerance) { 0.0 } else { DEFAULT_COINCIDENCE_EPS };
    let group = Arc::new(GroupTable::cyclic(4)?);
    let phi = OrbitTuple::scalar(group.clone(), vec![0.1 + 0.2, 0.3, 1.0, 1.0])?;
    let pattern = coincidence_pattern(&phi, eps)?;
    let moved = coincidence_pattern(&phi.act(1)?, eps)?;
    let pass = pattern.blocks() == [vec![0, 1], vec![2, 3]] && moved == act_on_pattern(&group, 1, &pattern);
    Ok((pass, format!("pattern {:?} at eps = {eps:e}", pattern.blocks())))
}

fn best_point(w: &Witness) -> Vec<f64> {
    w.flat()
}

fn check_borsuk_ulam(_: &SelftestOptions) -> Result<(bool, String)> {
    let s = Scenario::from_json(BORSUK_ULAM)?;
    let run = run_starts(&s)?;
    let converged = run.converged_within(1e-8);
    let x = best_point(&run.best.witness);
    let pass = converged >= 95 && x[0].abs() < 1e-9 && run.best.reverify(&s).is_ok();
    Ok((pass, format!("{converged}/100 starts below 1e-8, witness x1 = {:e}", x[0])))
}

fn check_z3(_: &SelftestOptions) -> Result<(bool, String)> {
    let s = Scenario::from_json(Z3_ON_S3)?;
    let run = run_starts(&s)?;
    let converged = run.converged_within(1e-8);
    // independent re-evaluation: f = x1 along the orbit under rotation by 2 pi g / 3
    let x = best_point(&run.best.witness);
    let values: Vec<f64> = (0..3)
        .map(|g| {
            let t = -std::f64::consts::TAU * g as f64 / 3.0;
            t.cos() * x[0] - t.sin() * x[1]
        })
        .collect();
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let direct = (sorted[0] - sorted[1]).powi(2);
    let pass = converged >= 1 && direct < 1e-8 && s.existence() == Existence::Guaranteed;
    Ok((pass, format!("{converged}/100 starts below 1e-8, direct residual {direct:e}")))
}

fn check_knaster_circle(_: &SelftestOptions) -> Result<(bool, String)> {
    let s = Scenario::from_json(KNASTER_CIRCLE)?;
    let r = knaster_scan_1d(&s)?;
    let closed = ((0.7f64).atan2(-0.3) - (0.8f64).atan2(0.6)).rem_euclid(std::f64::consts::TAU);
    let angle = r.angle.unwrap_or(f64::NAN);
    let err = (angle - closed).abs();
    Ok((err < 1e-6, format!("angle {angle}, closed form {closed}, |diff| {err:e}")))
}

fn check_knaster_klein(_: &SelftestOptions) -> Result<(bool, String)> {
    let s = Scenario::from_json(KNASTER_KLEIN)?;
    let run = run_starts(&s)?;
    let converged = run.converged_within(1e-6);
    Ok((
        converged >= 1 && run.best.residual < 1e-6,
        format!("{converged}/200 starts below 1e-6, best {:e}", run.best.residual),
    ))
}

fn check_negative_control(_: &SelftestOptions) -> Result<(bool, String)> {
    let s = Scenario::from_json(OVERDETERMINED)?;
    let existence = s.existence();
    let outcome = match crate::solver::solve(&s) {
        Ok(r) => format!("solved with residual {:e}", r.residual),
        Err(Error::BudgetExhausted { best_residual, .. }) => format!("budget exhausted, best {best_residual:e}"),
        Err(e) => return Err(e),
    };
    Ok((
        existence == Existence::NotGuaranteed,
        format!("existence {}, {outcome}", existence.describe()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn light(inject: Option<Injection>) -> SelftestOptions {
        SelftestOptions {
            cover_samples: 200,
            exact_points: 200,
            inject,
            ..Default::default()
        }
    }

    #[test]
    fn injections_fail_their_rows() {
        let row = |inject, id: &str| {
            let (_, _, check) = rows().into_iter().find(|r| r.0 == id).unwrap();
            check(&light(inject))
        };
        assert!(row(None, "group-axioms").unwrap().0);
        assert!(!row(Some(Injection::CorruptGroupTable), "group-axioms").unwrap().0);
        assert!(row(None, "float-pattern-tolerance").unwrap().0);
        assert!(matches!(
            row(Some(Injection::ZeroTolerance), "float-pattern-tolerance"),
            Err(Error::AmbiguousPattern { .. })
        ));
    }

    #[test]
    fn exact_rows_pass_on_small_budgets() {
        for id in ["hat-equivariance", "coincidence-redefinition", "pattern-fixed-points", "subset-fixed-points"] {
            let (_, _, check) = rows().into_iter().find(|r| r.0 == id).unwrap();
            let (pass, detail) = check(&light(None)).unwrap();
            assert!(pass, "{id}: {detail}");
        }
    }
}

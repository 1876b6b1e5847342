//! Randomised verification of the cover of `W(q,k)` by the pieces
//! `V_1, .., V_(k-1)`: classification of every sample outside the maximum
//! diagonal, equivariance of the classifier, and disjointness of the open
//! sets `U_M` of equal size.

use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config_spaces::{in_max_diagonal, in_top_set, top_block_classify, DEFAULT_COINCIDENCE_EPS};
use crate::error::{Error, Result};
use crate::group::{GroupTable, OrbitTuple};
use crate::scalar::{Rational, Scalar, ScalarKind};

/// Samples per independently seeded batch.
const BATCH: usize = 1024;
/// Failures kept verbatim in a report.
const MAX_REPORTED: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Outside the maximum diagonal but not classified into some `V_m`, `m < k`.
    Cover,
    /// Classified although the maximum is attained `k` times.
    Converse,
    /// `top(g phi) != g top(phi)`.
    Equivariance,
    /// Two distinct `M` of one size both contain the sample.
    Disjointness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverFailure {
    pub sample: usize,
    pub kind: FailureKind,
    pub phi: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverAssertions {
    pub disjoint: bool,
    pub equivariant: bool,
    pub cover: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub group: String,
    pub q: usize,
    pub k: usize,
    pub scalar: ScalarKind,
    pub seed: u64,
    pub samples: usize,
    /// Samples outside the maximum diagonal, hence classified.
    pub classified: usize,
    /// Classified samples per multiplicity `m = 1..k-1`.
    pub by_multiplicity: Vec<usize>,
    pub failure_count: usize,
    pub failures: Vec<CoverFailure>,
    pub assertions: CoverAssertions,
    pub pass: bool,
}

/// Random tuple with many ties: values are small fractions, some samples
/// draw from a three-element pool and some have a planted top block.
pub fn sample_rational_tuple<R: Rng + ?Sized>(rng: &mut R, q: usize) -> Vec<Rational> {
    let small = |rng: &mut R, range: i64, den: i64| {
        Rational::new(
            BigInt::from(rng.random_range(-range..=range)),
            BigInt::from(rng.random_range(1..=den)),
        )
    };
    match rng.random_range(0..4) {
        0 => (0..q).map(|_| Rational::from_integer(BigInt::from(rng.random_range(0..3)))).collect(),
        1 => (0..q).map(|_| small(rng, 4, 4)).collect(),
        2 => {
            let mut v: Vec<Rational> = (0..q).map(|_| small(rng, 4, 3)).collect();
            let top = v.iter().max().expect("q >= 1").clone() + Rational::from_integer(BigInt::from(1));
            let size = rng.random_range(1..=q);
            for _ in 0..size {
                let i = rng.random_range(0..q);
                v[i] = top.clone();
            }
            v
        }
        _ => (0..q).map(|_| small(rng, 1000, 997)).collect(),
    }
}

#[derive(Default)]
struct BatchOutcome {
    classified: usize,
    by_multiplicity: Vec<usize>,
    failures: Vec<CoverFailure>,
    failure_count: usize,
    cover_ok: bool,
    equivariant_ok: bool,
    disjoint_ok: bool,
}

fn check_sample<S: Scalar>(
    group: &Arc<GroupTable>,
    k: usize,
    index: usize,
    values: Vec<S>,
    out: &mut BatchOutcome,
) -> Result<()> {
    let q = group.order();
    let phi = OrbitTuple::scalar(group.clone(), values)?;
    let fail = |kind: FailureKind, detail: String, out: &mut BatchOutcome| {
        match kind {
            FailureKind::Cover | FailureKind::Converse => out.cover_ok = false,
            FailureKind::Equivariance => out.equivariant_ok = false,
            FailureKind::Disjointness => out.disjoint_ok = false,
        }
        out.failure_count += 1;
        if out.failures.len() < MAX_REPORTED {
            out.failures.push(CoverFailure {
                sample: index,
                kind,
                phi: phi.scalars().iter().map(|v| format!("{v:?}")).collect(),
                detail,
            });
        }
    };

    let on_diagonal = in_max_diagonal(&phi, k, DEFAULT_COINCIDENCE_EPS)?;
    let classified = top_block_classify(&phi, k);
    let top = match (on_diagonal, classified) {
        (false, Ok(t)) => {
            if t.m == 0 || t.m >= k || t.block.len() != t.m || !in_top_set(&phi, &t.block) {
                fail(FailureKind::Cover, format!("classified as m = {} with block {:?}", t.m, t.block.members()), out);
            }
            t
        }
        (false, Err(e)) => {
            fail(FailureKind::Cover, e.to_string(), out);
            return Ok(());
        }
        (true, Ok(t)) => {
            fail(FailureKind::Converse, format!("classified as m = {}", t.m), out);
            return Ok(());
        }
        (true, Err(Error::NotInW { .. })) => return Ok(()),
        (true, Err(e)) => return Err(e),
    };
    out.classified += 1;
    out.by_multiplicity[top.m] += 1;

    for g in 1..q {
        let moved = phi.act(g)?;
        match top_block_classify(&moved, k) {
            Ok(t) if t.block == top.block.act(group, g)? => {}
            other => fail(
                FailureKind::Equivariance,
                format!("g = {g}: got {:?}", other.map(|t| t.block.members().to_vec())),
                out,
            ),
        }
    }

    // greater[g]: mask of indices h with phi(g) > phi(h)
    let scalars = phi.scalars();
    let greater: Vec<u64> = (0..q)
        .map(|g| {
            (0..q)
                .filter(|&h| scalars[g].total_cmp(&scalars[h]).is_gt())
                .fold(0u64, |acc, h| acc | (1 << h))
        })
        .collect();
    let full = (1u64 << q) - 1;
    let mut members_by_size = vec![0usize; q];
    for mask in 1..full {
        let outside = full & !mask;
        let inside = (0..q).filter(|&g| mask >> g & 1 == 1).all(|g| greater[g] & outside == outside);
        if inside {
            members_by_size[mask.count_ones() as usize] += 1;
        }
    }
    if let Some(size) = (1..q).find(|&s| members_by_size[s] > 1) {
        fail(
            FailureKind::Disjointness,
            format!("{} sets U_M with |M| = {size} contain the sample", members_by_size[size]),
            out,
        );
    }
    if members_by_size[top.m] != 1 {
        fail(FailureKind::Cover, format!("no U_M with |M| = {} contains the sample", top.m), out);
    }
    Ok(())
}

/// Check `samples` random tuples for the cyclic group of order `q`.
pub fn cover_check(q: usize, k: usize, samples: usize, seed: u64, scalar: ScalarKind) -> Result<CoverReport> {
    if !(2..=20).contains(&q) {
        return Err(Error::InvalidParameter(format!("q = {q} outside 2..=20")));
    }
    if k < 2 || k > q {
        return Err(Error::KOutOfRange { k, lo: 2, hi: q });
    }
    let group = Arc::new(GroupTable::cyclic(q)?);
    let batches = samples.div_ceil(BATCH);
    let outcomes = (0..batches)
        .into_par_iter()
        .map(|b| -> Result<BatchOutcome> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut out = BatchOutcome {
                by_multiplicity: vec![0; k],
                cover_ok: true,
                equivariant_ok: true,
                disjoint_ok: true,
                ..Default::default()
            };
            for index in b * BATCH..((b + 1) * BATCH).min(samples) {
                let values = sample_rational_tuple(&mut rng, q);
                match scalar {
                    ScalarKind::Rational => check_sample(&group, k, index, values, &mut out)?,
                    ScalarKind::Float => {
                        let floats = values.iter().map(f64::from_rational).collect();
                        check_sample::<f64>(&group, k, index, floats, &mut out)?
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut classified = 0;
    let mut by_multiplicity = vec![0; k];
    let mut failures = Vec::new();
    let mut failure_count = 0;
    let mut assertions = CoverAssertions {
        disjoint: true,
        equivariant: true,
        cover: true,
    };
    for o in outcomes {
        classified += o.classified;
        for (acc, c) in by_multiplicity.iter_mut().zip(&o.by_multiplicity) {
            *acc += c;
        }
        failure_count += o.failure_count;
        failures.extend(o.failures);
        assertions.cover &= o.cover_ok;
        assertions.equivariant &= o.equivariant_ok;
        assertions.disjoint &= o.disjoint_ok;
    }
    failures.truncate(MAX_REPORTED);
    by_multiplicity.remove(0);
    Ok(CoverReport {
        group: group.label().to_string(),
        q,
        k,
        scalar,
        seed,
        samples,
        classified,
        by_multiplicity,
        failure_count,
        failures,
        assertions,
        pass: failure_count == 0,
    })
}

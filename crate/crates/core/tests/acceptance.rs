//! Acceptance matrix. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::TAU;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use equitopo_core::arrangement::{betti_report, k_equal_arrangement, v1_arrangement};
use equitopo_core::config_spaces::{hat_map, in_kwise_diagonal, pattern_action_fixed_points};
use equitopo_core::cover_check::cover_check;
use equitopo_core::group::{act_on_tuple, fixed_subsets, GroupTable};
use equitopo_core::scalar::{rat, Rational, ScalarKind};
use equitopo_core::solver::residual::coincidence_residual;
use equitopo_core::solver::{knaster_scan_1d, run_starts, solve, ActionRep, Existence, MapSpec, Scenario};
use equitopo_core::Error;

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(n: usize, name: &str, budget: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|e| Outcome {
        pass: false,
        detail: format!(
            "panicked: {}",
            e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        ),
    });
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "[{}] {n}. {name}: {} ({:.2} s, budget {} s{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", over budget" }
    );
    pass
}

fn cover() -> Outcome {
    let mut classified = 0;
    for q in 3..=6 {
        for k in 2..=q {
            let r = cover_check(q, k, 100_000, 1, ScalarKind::Rational).expect("valid parameters");
            let a = r.assertions;
            if !(r.pass && a.cover && a.disjoint && a.equivariant) || r.classified == 0 {
                return Outcome {
                    pass: false,
                    detail: format!("q={q} k={k}: {} failures", r.failure_count),
                };
            }
            classified += r.classified;
        }
    }
    Outcome {
        pass: true,
        detail: format!("18 (q,k) pairs x 1e5 exact samples, {classified} classified, 0 failures"),
    }
}

fn vanishes_through(betti: &[usize], bound: i64) -> bool {
    betti.iter().enumerate().all(|(i, &b)| i as i64 > bound || b == 0)
}

fn k_equal_band() -> Outcome {
    let mut cases = 0;
    for q in 2..=7 {
        for k in 2..=q {
            for p in [2, 3, 5] {
                let betti = betti_report(&k_equal_arrangement(q, k).unwrap(), p).unwrap().betti;
                if !vanishes_through(&betti, k as i64 - 3) {
                    return Outcome {
                        pass: false,
                        detail: format!("q={q} k={k} p={p}: {betti:?}"),
                    };
                }
                cases += 1;
            }
        }
    }
    let circle = betti_report(&k_equal_arrangement(3, 3).unwrap(), 2).unwrap().betti;
    let sphere = betti_report(&k_equal_arrangement(4, 4).unwrap(), 2).unwrap().betti;
    Outcome {
        pass: circle[1] == 1 && sphere[2] == 1,
        detail: format!("{cases} cases vanish through k-3; b1(3,3) = {}, b2(4,4) = {}", circle[1], sphere[2]),
    }
}

fn v1_band() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (m, q, k) in [(2usize, 3usize, 2usize), (2, 3, 3), (2, 4, 3)] {
        let bound = ((m - 1) * (q - 1) + k) as i64 - 3;
        for p in [2, 3, 5] {
            let betti = betti_report(&v1_arrangement(m, q, k).unwrap(), p).unwrap().betti;
            pass &= vanishes_through(&betti, bound);
            if p == 2 {
                parts.push(format!("({m},{q},{k}) through {bound}: {betti:?}"));
            }
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

/// Partitions of `0..n` as label vectors, built independently of the library.
fn label_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                let next = p.iter().max().map_or(0, |m| m + 1);
                (0..=next).map(move |l| {
                    let mut q = p.clone();
                    q.push(l);
                    q
                })
            })
            .collect();
    }
    out
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

fn pattern_freeness() -> Outcome {
    for p in [3usize, 5, 7] {
        let all = label_partitions(p);
        for k in 1..=p {
            let fixed = all
                .iter()
                .filter(|l| l.iter().max().unwrap() + 1 == k)
                .filter(|l| {
                    // rotation by one: position i carries the label of i - 1
                    let rotated: Vec<usize> = (0..p).map(|i| l[(i + p - 1) % p]).collect();
                    same_partition(l, &rotated)
                })
                .count();
            let library = pattern_action_fixed_points(&GroupTable::cyclic(p).unwrap(), k).unwrap().len();
            let expected = usize::from(k == 1 || k == p);
            if fixed != expected || library != expected {
                return Outcome {
                    pass: false,
                    detail: format!("p={p} k={k}: {fixed} fixed (library {library})"),
                };
            }
        }
    }
    Outcome {
        pass: true,
        detail: "p in {3,5,7}: none fixed for 2 <= k <= p-1, one each for k in {1,p}".into(),
    }
}

fn subset_freeness() -> Outcome {
    let mut groups: Vec<GroupTable> = (2..=8).map(|q| GroupTable::cyclic(q).unwrap()).collect();
    groups.push(GroupTable::p_torus(2, 2).unwrap());
    groups.push(GroupTable::p_torus(2, 3).unwrap());
    let mut checked = 0;
    for g in &groups {
        let q = g.order();
        for mask in 1u32..(1 << q) - 1 {
            let fixed = (0..q).all(|a| {
                let image = (0..q).filter(|&x| mask >> x & 1 == 1).fold(0u32, |acc, x| acc | 1 << g.mul(a, x));
                image == mask
            });
            if fixed {
                return Outcome {
                    pass: false,
                    detail: format!("{}: subset {mask:b} fixed", g.label()),
                };
            }
            checked += 1;
        }
        if (1..q).any(|m| !fixed_subsets(g, m).is_empty()) {
            return Outcome {
                pass: false,
                detail: format!("{}: library reports a fixed subset", g.label()),
            };
        }
    }
    Outcome {
        pass: true,
        detail: format!("{} groups, {checked} proper subsets, none fixed", groups.len()),
    }
}

fn poly(x: &[Rational], which: usize) -> Rational {
    match which {
        0 => &x[0] * &x[0] + &x[1] * &x[2] - &x[0],
        _ => &x[0] * &x[1] - rat(2, 1) * &x[2] + rat(1, 2),
    }
}

fn hat_and_redefinition() -> Outcome {
    const SOURCES: [&str; 2] = ["x1^2 + x2*x3 - x1", "x1*x2 - 2*x3 + 1/2"];
    let pool = [rat(-1, 1), rat(0, 1), rat(1, 2), rat(1, 1), rat(2, 3)];
    let groups: Vec<Arc<GroupTable>> = [
        GroupTable::cyclic(3).unwrap(),
        GroupTable::cyclic(4).unwrap(),
        GroupTable::p_torus(2, 2).unwrap(),
        GroupTable::cyclic(5).unwrap(),
    ]
    .into_iter()
    .map(Arc::new)
    .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut members = 0;
    for i in 0..10_000 {
        let g = &groups[i % groups.len()];
        let which = (i / groups.len()) % 2;
        let q = g.order();
        let action = ActionRep::permutation(g.clone()).unwrap();
        let f = MapSpec::parse(&[SOURCES[which]]).unwrap();
        let width = rng.random_range(1..=pool.len());
        let x: Vec<Rational> = (0..q).map(|_| pool[rng.random_range(0..width)].clone()).collect();
        let k = rng.random_range(2..=q);

        // (g^-1 x)_j = x_{g j} for the coordinate permutation action
        let oracle: Vec<Rational> = (0..q)
            .map(|a| {
                let moved: Vec<Rational> = (0..q).map(|j| x[g.mul(a, j)].clone()).collect();
                poly(&moved, which)
            })
            .collect();
        let hat = hat_map(|y: &[Rational]| f.eval(y), &action, &x).unwrap();
        if hat.scalars() != oracle {
            return Outcome {
                pass: false,
                detail: format!("point {i}: f^ differs from direct evaluation"),
            };
        }
        for h in 0..q {
            let hx: Vec<Rational> = (0..q).map(|j| x[g.mul(g.inv(h), j)].clone()).collect();
            let rhs = hat_map(|y: &[Rational]| f.eval(y), &action, &hx).unwrap();
            if act_on_tuple(h, &hat).unwrap() != rhs {
                return Outcome {
                    pass: false,
                    detail: format!("point {i}: h f^(x) != f^(h x) for h = {h}"),
                };
            }
        }
        let largest_class = oracle.iter().map(|v| oracle.iter().filter(|w| *w == v).count()).max().unwrap();
        let in_diagonal = largest_class >= k;
        let (residual, _) = coincidence_residual(hat.values(), k);
        let zero = residual == rat(0, 1);
        if zero != in_diagonal || in_diagonal != in_kwise_diagonal(&hat, k, 1e-9).unwrap() {
            return Outcome {
                pass: false,
                detail: format!("point {i}: residual {residual}, largest class {largest_class}, k = {k}"),
            };
        }
        members += usize::from(in_diagonal);
    }
    Outcome {
        pass: true,
        detail: format!("1e4 exact points: equivariance holds, residual zero exactly on the {members} diagonal points"),
    }
}

fn scenario(path: &str) -> Scenario {
    let src = std::fs::read_to_string(format!("{}/../../scenarios/{path}", env!("CARGO_MANIFEST_DIR"))).unwrap();
    Scenario::from_json(&src).unwrap()
}

fn borsuk_ulam() -> Outcome {
    let s = scenario("borsuk_ulam.json");
    let run = run_starts(&s).unwrap();
    let converged = run.converged_within(1e-8);
    let x1 = run.best.witness.flat()[0];
    Outcome {
        pass: converged >= 95 && x1.abs() < 1e-9,
        detail: format!("{converged}/100 starts below 1e-8, witness |x1| = {:.1e}", x1.abs()),
    }
}

fn z3_on_s3() -> Outcome {
    let s = scenario("z3_on_s3.json");
    let run = run_starts(&s).unwrap();
    let converged = run.converged_within(1e-8);
    let x = run.best.witness.flat();
    let mut values: Vec<f64> = (0..3)
        .map(|g| {
            let t = -TAU * g as f64 / 3.0;
            t.cos() * x[0] - t.sin() * x[1]
        })
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let direct = (values[0] - values[1]).powi(2);
    Outcome {
        pass: converged >= 1 && direct < 1e-8 && s.existence() == Existence::Guaranteed,
        detail: format!("{converged}/100 starts below 1e-8, direct re-evaluation {direct:.1e}"),
    }
}

fn knaster() -> Outcome {
    let circle = scenario("knaster_circle.json");
    let r = knaster_scan_1d(&circle).unwrap();
    let closed = ((0.7f64).atan2(-0.3) - (0.8f64).atan2(0.6)).rem_euclid(TAU);
    let diff = (r.angle.unwrap() - closed).abs();
    let klein = scenario("knaster_klein.json");
    let start = Instant::now();
    let run = run_starts(&klein).unwrap();
    let klein_time = start.elapsed();
    let converged = run.converged_within(1e-6);
    Outcome {
        pass: diff < 1e-6 && converged >= 1 && klein_time <= Duration::from_secs(120),
        detail: format!(
            "q=3 scan angle off the closed form by {diff:.1e}; q=4 SO(3): {converged}/200 starts below 1e-6 in {:.2} s",
            klein_time.as_secs_f64()
        ),
    }
}

fn negative_control() -> Outcome {
    let s = scenario("overdetermined.json");
    let existence = s.existence();
    let outcome = match solve(&s) {
        Ok(r) => format!("solved, residual {:.1e}", r.residual),
        Err(Error::BudgetExhausted { best_residual, .. }) => format!("BudgetExhausted, best {best_residual:.3}"),
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("unexpected error {e}"),
            }
        }
    };
    Outcome {
        pass: existence == Existence::NotGuaranteed,
        detail: format!("k=q=2, m=4 on S^2: existence {}, {outcome}", existence.describe()),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "cover of W(q,k) by V_1..V_(k-1)", secs(60), cover),
        criterion(2, "k-equal complement vanishing band", secs(300), k_equal_band),
        criterion(3, "V_1 complement vanishing band", secs(120), v1_band),
        criterion(4, "pattern action fixed-point freeness", secs(5), pattern_freeness),
        criterion(5, "subset action fixed-point freeness", secs(5), subset_freeness),
        criterion(6, "f^ equivariance and coincidence redefinition", secs(30), hat_and_redefinition),
        criterion(7, "Borsuk-Ulam coincidence search", secs(30), borsuk_ulam),
        criterion(7, "Z/3 on S^3 maximum coincidence search", secs(30), z3_on_s3),
        criterion(8, "Knaster-type rotations", secs(130), knaster),
        criterion(9, "negative control outside the precondition", secs(60), negative_control),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} acceptance checks passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

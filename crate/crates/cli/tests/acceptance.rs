//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Pass a substring as the first free argument to run a subset, e.g.
//! `cargo test --test acceptance -- 6`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;

use martingale::branching::{
    exact_mean_check, extinction_probability, monte_carlo_extinction, ui_failure_demo, OffspringDistribution,
    UI_SURVIVAL_THRESHOLD,
};
use martingale::fixtures::{
    random_filtration, random_martingale, random_partition, random_path, random_predictable, random_refinement,
    random_space, random_with_drift, PathFamily,
};
use martingale::montecarlo::{Parallelism, RngStream, DEFAULT_SEED};
use martingale::process::{classify, make_binary_tree_space, martingale_transform, AdaptedProcess, ProcessKind};
use martingale::upcrossing::{check_pathwise_inequality, doob_bound_check, BoundMode, SamplePath, Weights};
use martingale::{conditional_expectation, expectation, verify_defining_property, RandomVector, Rational, Scalar};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn zero() -> Rational {
    q(0, 1)
}

fn criterion_1() -> Outcome {
    const TRIPLES: usize = 1000;
    let mut failures = Vec::new();
    for i in 0..TRIPLES {
        let mut rng = RngStream::new(DEFAULT_SEED, i as u64);
        let n = rng.random_range(1..=12);
        let space = random_space::<Rational, _>(&mut rng, n);
        let draw = |rng: &mut RngStream| {
            let v = (0..n)
                .map(|_| q(rng.random_range(-20..=20), rng.random_range(1..=5)))
                .collect();
            RandomVector::new(space.clone(), v).unwrap()
        };
        let x = draw(&mut rng);
        let z = draw(&mut rng);
        let g = random_partition(&mut rng, n, n);
        let h = random_refinement(&mut rng, &g);

        let y = conditional_expectation(&x, &g).unwrap();
        let defining = verify_defining_property(&x, &y, &g, 0.0).unwrap().passed;
        let inner = conditional_expectation(&x, &h).unwrap();
        let tower = conditional_expectation(&inner, &g).unwrap().values() == y.values();
        let (a, b) = (q(rng.random_range(-4..=4), 1), q(rng.random_range(-4..=4), 3));
        let combo = conditional_expectation(&x.linear_combination(&a, &z, &b).unwrap(), &g).unwrap();
        let ez = conditional_expectation(&z, &g).unwrap();
        let linear = combo.values() == y.linear_combination(&a, &ez, &b).unwrap().values();
        let total = expectation(&y) == expectation(&x);
        if !(defining && tower && linear && total) {
            failures.push(i);
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{TRIPLES} exact triples, defining property + tower + linearity + total expectation; failures {failures:?}"
        ),
    )
}

fn tree_martingale(rng: &mut RngStream, depth: usize) -> AdaptedProcess<Rational> {
    let up = rng.random_range(1..=4);
    let down = rng.random_range(1..=4);
    // p·up − (1 − p)·down = 0
    let p = q(down, up + down);
    let tree = make_binary_tree_space(depth, p, q(up, 1), q(-down, 1)).unwrap();
    if rng.random::<bool>() {
        tree.walk
    } else {
        random_martingale(rng, &tree.filtration)
    }
}

fn criterion_2() -> Outcome {
    const SPACES: usize = 500;
    let mut failures = Vec::new();
    for i in 0..SPACES {
        let mut rng = RngStream::new(DEFAULT_SEED + 2, i as u64);
        let depth = 1 + i % 8;
        let x = tree_martingale(&mut rng, depth);
        assert_eq!(classify(&x, 0.0).kind, ProcessKind::Martingale);
        let c = random_predictable(&mut rng, x.filtration(), -3, 3).unwrap();
        let y = martingale_transform(&c, &x).unwrap();
        if classify(&y, 0.0).kind != ProcessKind::Martingale {
            failures.push(i);
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{SPACES} binary-tree spaces (depth 1..=8), bounded predictable C; non-martingale transforms {failures:?}"
        ),
    )
}

fn exhaustive_paths(steps: usize) -> Vec<SamplePath<Rational>> {
    let mut out = Vec::new();
    for len in 0..=steps {
        for bits in 0u32..(1 << len) {
            let mut x = 0i64;
            let mut v = vec![q(0, 1)];
            for k in 0..len {
                x += if bits >> k & 1 == 1 { 1 } else { -1 };
                v.push(q(x, 1));
            }
            out.push(SamplePath::new(v).unwrap());
        }
    }
    out
}

fn pathwise_bands() -> Vec<(Rational, Rational)> {
    vec![
        (q(-1, 2), q(1, 2)),
        (q(-1, 1), q(1, 1)),
        (q(0, 1), q(2, 1)),
        (q(-2, 1), q(1, 1)),
    ]
}

struct PathwiseTally {
    checks: usize,
    fuzz_paths: usize,
    exhaustive_paths: usize,
    literal_violations: usize,
    corrected_violations: usize,
    first_literal: Option<String>,
}

fn pathwise_tally() -> PathwiseTally {
    const FUZZ: usize = 100_000;
    let bands = pathwise_bands();
    let fuzz = (0..FUZZ).map(|i| {
        let mut rng = RngStream::new(DEFAULT_SEED + 3, i as u64);
        let len = rng.random_range(1..=60);
        random_path::<Rational, _>(&mut rng, PathFamily::ALL[i % 4], len)
    });
    // Every ±1 path from 0 with at most 13 steps: the 8192 paths of 13 steps
    // and all their prefixes, a superset of the paths of length ≤ 12.
    let exhaustive = exhaustive_paths(13);
    let exhaustive_count = exhaustive.len();
    let mut t = PathwiseTally {
        checks: 0,
        fuzz_paths: FUZZ,
        exhaustive_paths: exhaustive_count,
        literal_violations: 0,
        corrected_violations: 0,
        first_literal: None,
    };
    for path in fuzz.chain(exhaustive) {
        for (a, b) in &bands {
            let r = check_pathwise_inequality(&path, a, b).unwrap();
            t.checks += 1;
            if r.slack < zero() {
                t.literal_violations += 1;
                if t.first_literal.is_none() {
                    let values: Vec<String> = path.values().iter().map(|v| v.to_string()).collect();
                    t.first_literal = Some(format!("path ({}) band {a}:{b} slack {}", values.join(","), r.slack));
                }
            }
            if r.corrected_slack < zero() {
                t.corrected_violations += 1;
            }
        }
    }
    t
}

fn criterion_3(t: &PathwiseTally) -> Outcome {
    Outcome::new(
        t.literal_violations == 0,
        format!(
            "slack = S_N + (X_0-a)^- - (X_N-a)^- - (b-a)U_N over {} fuzzed + {} exhaustive paths x {} bands: {} violations of {} checks; first: {}",
            t.fuzz_paths,
            t.exhaustive_paths,
            pathwise_bands().len(),
            t.literal_violations,
            t.checks,
            t.first_literal.as_deref().unwrap_or("none"),
        ),
    )
}

fn criterion_3_corrected(t: &PathwiseTally) -> Outcome {
    Outcome::new(
        t.corrected_violations == 0,
        format!(
            "S_N - (X_0-a)^- + (X_N-a)^- - (b-a)U_N >= 0: {} violations of {} checks",
            t.corrected_violations, t.checks
        ),
    )
}

/// Full path enumerations `(paths, weights, description)` of a process.
fn enumerate(x: &AdaptedProcess<Rational>) -> (Vec<SamplePath<Rational>>, Weights<Rational>) {
    let space = x.filtration().space();
    let paths = (0..space.len()).map(|w| SamplePath::new(x.path(w)).unwrap()).collect();
    (paths, Weights::Explicit(space.probs().to_vec()))
}

fn submartingale_fixtures() -> Vec<(String, AdaptedProcess<Rational>)> {
    let mut out = Vec::new();
    for (p, up, down) in [(q(1, 2), 1, -1), (q(2, 3), 1, -1), (q(1, 2), 2, -1), (q(3, 4), 1, -2)] {
        let label = format!("tree walk p={p} steps {up}/{down} depth 10");
        let tree = make_binary_tree_space(10, p, q(up, 1), q(down, 1)).unwrap();
        out.push((label, tree.walk));
    }
    for i in 0..20 {
        let mut rng = RngStream::new(DEFAULT_SEED + 4, i);
        let n = rng.random_range(2..=12);
        let steps = rng.random_range(1..=6);
        let space = random_space::<Rational, _>(&mut rng, n);
        let f = random_filtration(&mut rng, space, steps);
        out.push((format!("random submartingale #{i}"), random_with_drift(&mut rng, &f, 1)));
    }
    out
}

fn doob_bands() -> Vec<(Rational, Rational)> {
    vec![
        (q(-1, 2), q(1, 2)),
        (q(-1, 1), q(1, 1)),
        (q(0, 1), q(2, 1)),
        (q(1, 2), q(3, 2)),
    ]
}

struct DoobTally {
    checks: usize,
    literal_failures: usize,
    weak_failures: usize,
    integral_failures: usize,
    positive_failures: usize,
    first_literal: Option<String>,
}

fn doob_tally(fixtures: &[(String, AdaptedProcess<Rational>)]) -> DoobTally {
    let mut t = DoobTally {
        checks: 0,
        literal_failures: 0,
        weak_failures: 0,
        integral_failures: 0,
        positive_failures: 0,
        first_literal: None,
    };
    for (label, x) in fixtures {
        let (paths, weights) = enumerate(x);
        for n in 0..=x.horizon() {
            let truncated: Vec<_> = paths.iter().map(|p| p.truncated(n)).collect();
            for (a, b) in doob_bands() {
                let r = doob_bound_check(&truncated, &weights, &a, &b, BoundMode::Exact).unwrap();
                t.checks += 1;
                if !r.holds {
                    t.literal_failures += 1;
                    if t.first_literal.is_none() {
                        t.first_literal =
                            Some(format!("{label}, N={n}, band {a}:{b}: (b-a)E[U]={} > {}", r.lhs, r.rhs));
                    }
                }
                t.weak_failures += usize::from(!r.weak_holds);
                t.integral_failures += usize::from(r.mean_integral < zero());
                t.positive_failures += usize::from(!r.positive_part_holds);
            }
        }
    }
    t
}

fn criterion_4(t: &DoobTally) -> Outcome {
    Outcome::new(
        t.literal_failures == 0 && t.weak_failures == 0 && t.integral_failures == 0,
        format!(
            "submartingale enumerations, {} (fixture, N, band) checks: (b-a)E[U] <= E[(X_N-a)^-] - E[(X_0-a)^-] fails {}, <= E[(X_N-a)^-] fails {}, E[S_N] >= 0 fails {}; first: {}",
            t.checks,
            t.literal_failures,
            t.weak_failures,
            t.integral_failures,
            t.first_literal.as_deref().unwrap_or("none"),
        ),
    )
}

fn criterion_4_integral(t: &DoobTally) -> Outcome {
    Outcome::new(
        t.integral_failures == 0,
        format!(
            "E[S_N] >= 0 on {} submartingale checks: {} failures",
            t.checks, t.integral_failures
        ),
    )
}

fn criterion_4_positive_part(t: &DoobTally) -> Outcome {
    Outcome::new(
        t.positive_failures == 0,
        format!(
            "(b-a)E[U] <= E[(X_N-a)^+] - E[(X_0-a)^+] on {} submartingale checks: {} failures",
            t.checks, t.positive_failures
        ),
    )
}

fn criterion_4_supermartingales() -> Outcome {
    let mut fixtures = Vec::new();
    for (p, up, down) in [(q(1, 2), 1, -1), (q(1, 3), 2, -1), (q(1, 3), 1, -1), (q(1, 2), 1, -2)] {
        let tree = make_binary_tree_space(10, p.clone(), q(up, 1), q(down, 1)).unwrap();
        fixtures.push((format!("tree walk p={p} steps {up}/{down}"), tree.walk));
    }
    for i in 0..20 {
        let mut rng = RngStream::new(DEFAULT_SEED + 5, i);
        let n = rng.random_range(2..=12);
        let steps = rng.random_range(1..=6);
        let space = random_space::<Rational, _>(&mut rng, n);
        let f = random_filtration(&mut rng, space, steps);
        let drift = if i % 2 == 0 { 0 } else { -1 };
        fixtures.push((
            format!("random drift {drift} #{i}"),
            random_with_drift(&mut rng, &f, drift),
        ));
    }
    let t = doob_tally(&fixtures);
    Outcome::new(
        t.literal_failures == 0 && t.weak_failures == 0,
        format!(
            "literal bound on martingale and supermartingale enumerations: {} checks, {} failures, first: {}",
            t.checks,
            t.literal_failures + t.weak_failures,
            t.first_literal.as_deref().unwrap_or("none")
        ),
    )
}

/// `E[Z_n]` by enumerating every individual's offspring count.
fn brute_force_means(p: &[Rational], horizon: usize) -> Vec<Rational> {
    fn walk(p: &[Rational], z: usize, n: usize, horizon: usize, weight: Rational, acc: &mut [Rational]) {
        acc[n] = acc[n].clone() + weight.clone() * q(z as i64, 1);
        if n == horizon {
            return;
        }
        let mut counts = vec![0usize; z];
        loop {
            let w = counts.iter().fold(weight.clone(), |w, &k| w * p[k].clone());
            if w != zero() {
                walk(p, counts.iter().sum(), n + 1, horizon, w, acc);
            }
            let mut i = 0;
            loop {
                if i == z {
                    return;
                }
                counts[i] += 1;
                if counts[i] < p.len() {
                    break;
                }
                counts[i] = 0;
                i += 1;
            }
        }
    }
    let mut acc = vec![zero(); horizon + 1];
    walk(p, 1, 0, horizon, q(1, 1), &mut acc);
    acc
}

fn criterion_5() -> Outcome {
    let laws = [
        vec![q(1, 4), q(0, 1), q(3, 4)],
        vec![q(3, 4), q(0, 1), q(1, 4)],
        vec![q(1, 2), q(0, 1), q(1, 2)],
        vec![q(1, 3), q(1, 3), q(1, 3)],
        vec![q(0, 1), q(1, 2), q(1, 2)],
        vec![q(1, 2), q(1, 2)],
        vec![q(1, 5), q(3, 5), q(1, 5)],
    ];
    let mut failures = Vec::new();
    for p in &laws {
        let d = OffspringDistribution::new(p.clone()).unwrap();
        let oracle = brute_force_means(p, 3);
        let report = exact_mean_check(&d, 3).unwrap();
        let mut power = q(1, 1);
        let mut ok = report.passed && report.means == oracle;
        for m in &oracle {
            ok &= *m == power;
            power *= d.mean().clone();
        }
        if !ok {
            failures.push(format!("{p:?}"));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{} laws, horizon 3, E[Z_n] = mu^n exactly; failures {failures:?}",
            laws.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let sub = OffspringDistribution::new(vec![q(3, 4), q(0, 1), q(1, 4)]).unwrap();
    let sup = OffspringDistribution::new(vec![q(1, 4), q(0, 1), q(3, 4)]).unwrap();
    let q_sub = extinction_probability(&sub, 1e-12, 1_000_000).unwrap();
    let q_sup = extinction_probability(&sup, 1e-12, 1_000_000).unwrap();
    // f(s) = 1/4 + 3/4 s² = s has roots 1/3 and 1.
    let root = (4.0 - (16.0f64 - 12.0).sqrt()) / 6.0;
    let a = (q_sub.q - 1.0).abs() <= 1e-9;
    let b = (q_sup.q - root).abs() <= 1e-9 && (q_sup.q - 1.0 / 3.0).abs() <= 1e-9;
    let mc_sub = monte_carlo_extinction(&sub, 50, 100_000, DEFAULT_SEED, Parallelism::Global).unwrap();
    let mc_sup = monte_carlo_extinction(&sup, 50, 100_000, DEFAULT_SEED, Parallelism::Global).unwrap();
    let c = mc_sub.within_three_se && mc_sup.within_three_se;
    Outcome::new(
        a && b && c,
        format!(
            "(a) q_sub = {} [{}]; (b) q_sup = {} vs {root} [{}]; (c) P(Z_50=0): sub {} vs {} (se {:.2e}), sup {} vs {} (se {:.2e}) [{}]",
            q_sub.q,
            pass(a),
            q_sup.q,
            pass(b),
            mc_sub.proportion.estimate,
            mc_sub.exact,
            mc_sub.proportion.standard_error,
            mc_sup.proportion.estimate,
            mc_sup.exact,
            mc_sup.proportion.standard_error,
            pass(c),
        ),
    )
}

fn criterion_7() -> Outcome {
    let r = ui_failure_demo(100_000, 200, DEFAULT_SEED, Parallelism::Global).unwrap();
    let last = r.rows.last().unwrap();
    let below = r.final_survival < UI_SURVIVAL_THRESHOLD;
    Outcome::new(
        r.mean_within_three_se && below && r.survival_nonincreasing,
        format!(
            "mean Z_200 = {} (se {:.3}, within 3 se: {}), survival {} < {UI_SURVIVAL_THRESHOLD}: {}, nonincreasing: {}, extinct fraction {}",
            last.mean,
            last.standard_error,
            r.mean_within_three_se,
            r.final_survival,
            below,
            r.survival_nonincreasing,
            r.final_extinct_fraction,
        ),
    )
}

fn run_cli(args: &[&str], threads: Option<&str>, out: &Path) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_martingale"));
    cmd.args(args).arg("--out").arg(out).env_remove("MARTINGALE_SEED");
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    let status = cmd.status().expect("binary runs");
    assert!(
        matches!(status.code(), Some(0 | 1 | 3)),
        "{args:?} exited with {status}"
    );
    std::fs::read(out).expect("output written")
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let commands: &[&[&str]] = &[
        &[
            "upcross",
            "--fuzz",
            "--trials",
            "2000",
            "--horizon",
            "40",
            "--band=-1:1",
            "--band=0:2",
            "--format",
            "csv",
        ],
        &[
            "upcross",
            "--fuzz",
            "--trials",
            "2000",
            "--seed",
            "7",
            "--form",
            "corrected",
        ],
        &[
            "gw",
            "simulate",
            "--p",
            "1/4,0,3/4",
            "--trials",
            "200",
            "--horizon",
            "20",
            "--format",
            "csv",
        ],
        &[
            "gw",
            "extinction",
            "--p",
            "1/4,0,3/4",
            "--trials",
            "20000",
            "--seed",
            "11",
        ],
        &["gw", "defect-check", "--p", "1/4,1/4,1/2", "--trials", "5000"],
        &["gw", "ui-demo", "--trials", "20000", "--format", "csv"],
        &["classify", "--tree", "6:2/3:1:-1"],
    ];
    let mut mismatches = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let out = dir.path().join(format!("run{i}.out"));
        let reference = run_cli(args, None, &out);
        for threads in [None, Some("1"), Some("4")] {
            if run_cli(args, threads, &out) != reference {
                mismatches.push(format!("{} (threads {threads:?})", args.join(" ")));
            }
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!(
            "{} seeded commands x 4 runs (global pool, 1 and 4 threads); mismatches {mismatches:?}",
            commands.len()
        ),
    )
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        }
    }
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let selected = |id: &str| filter.as_deref().is_none_or(|f| id.contains(f));

    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |id: &'static str, f: &dyn Fn() -> Outcome| {
        if selected(id) {
            let o = guarded(f);
            println!("criterion {id}: {} - {}", pass(o.passed), o.detail);
            results.push((id, o));
        }
    };

    record("1", &criterion_1);
    record("2", &criterion_2);
    if selected("3") {
        let t = pathwise_tally();
        record("3", &|| criterion_3(&t));
        record("3 (corrected form)", &|| criterion_3_corrected(&t));
    }
    if selected("4") {
        let fixtures = submartingale_fixtures();
        let t = doob_tally(&fixtures);
        record("4", &|| criterion_4(&t));
        record("4 (E[S_N] >= 0)", &|| criterion_4_integral(&t));
        record("4 (positive-part bound)", &|| criterion_4_positive_part(&t));
        record("4 (literal bound, super/martingales)", &criterion_4_supermartingales);
    }
    record("5", &criterion_5);
    record("6", &criterion_6);
    record("7", &criterion_7);
    record("8", &criterion_8);

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.passed).map(|(id, _)| *id).collect();
    println!(
        "acceptance: {} of {} checks passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failed.join(", "))
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}

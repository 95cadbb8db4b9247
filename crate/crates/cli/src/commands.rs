use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use martingale::branching::{
    self, classify_regime, extinction_by, extinction_probability, OffspringDistribution, DEFAULT_PGF_MAX_ITER,
    DEFAULT_PGF_TOL, DEFAULT_POP_CAP, UI_PILOT_HORIZON, UI_SURVIVAL_THRESHOLD,
};
use martingale::fixtures::{random_path, PathFamily};
use martingale::io::{self, scalar_to_json};
use martingale::montecarlo::run_trials;
use martingale::process::{classify, make_binary_tree_space, AdaptedProcess, ProcessKind};
use martingale::upcrossing::{check_pathwise_inequality, PathwiseVerdict, UpcrossingReport};
use martingale::{conditional_expectation, parse_rational, verify_defining_property, Rational, Scalar};
use serde_json::{json, Value};

use crate::report::{Report, RunConfig, Status, Table};
use crate::{ClassifyArgs, Cli, Command, CondexpArgs, Form, GwArgs, GwCommand, Kind, UpcrossArgs};

const DEFAULT_FUZZ_PATHS: usize = 10_000;
const DEFAULT_FUZZ_LENGTH: usize = 100;
const DEFAULT_GW_TRIALS: usize = 10_000;
const DEFAULT_GW_HORIZON: usize = 50;
const DEFAULT_SIMULATE_TRIALS: usize = 10;
const DEFAULT_UI_TRIALS: usize = 100_000;
const DEFAULT_DEFECT_HORIZON: usize = 10;
/// Largest horizon for the exact part of `gw defect-check`.
const EXACT_DEFECT_HORIZON: usize = 3;

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Condexp(args) => condexp(cli, args),
        Command::Classify(args) => classify_cmd(cli, args),
        Command::Upcross(args) => upcross(cli, args),
        Command::Gw(args) => gw(cli, args),
    }
}

fn base_config(cli: &Cli, command: &str) -> RunConfig {
    let mut c = RunConfig::new(command, cli.format, cli.out.as_ref());
    c.set("seed", cli.seed());
    for key in ["trials", "horizon", "tol", "bands"] {
        c.set(key, Value::Null);
    }
    c
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))
}

fn exact(x: &Rational) -> String {
    x.to_string()
}

fn negative(x: &Rational) -> bool {
    *x < Rational::from_ratio(0, 1)
}

fn bands_json(bands: &[(Rational, Rational)]) -> Value {
    Value::Array(bands.iter().map(|(a, b)| json!(format!("{a}:{b}"))).collect())
}

fn condexp(cli: &Cli, args: &CondexpArgs) -> Result<Report> {
    let doc = io::space_from_json::<Rational>(&read_json(&args.space)?)
        .with_context(|| format!("space file {}", args.space.display()))?;
    let x = io::random_vector_from_json(doc.space.clone(), &read_json(&args.x)?)
        .with_context(|| format!("X file {}", args.x.display()))?;
    let (g, source) = match (&args.partition, args.partition_index) {
        (Some(path), _) => (
            io::partition_from_json(doc.space.len(), &read_json(path)?)
                .with_context(|| format!("partition file {}", path.display()))?,
            Value::from(path.display().to_string()),
        ),
        (None, Some(i)) => (
            doc.partitions
                .get(i)
                .cloned()
                .ok_or_else(|| anyhow!("space file has no partition {i}"))?,
            json!(format!("space#{i}")),
        ),
        (None, None) if doc.partitions.len() == 1 => (doc.partitions[0].clone(), json!("space#0")),
        (None, None) => bail!("give --partition or --partition-index"),
    };
    let tol = cli.tol.unwrap_or(0.0);
    let y = conditional_expectation(&x, &g)?;
    let check = verify_defining_property(&x, &y, &g, tol)?;

    let mut config = base_config(cli, "condexp");
    config
        .set("space", args.space.display().to_string())
        .set("x", args.x.display().to_string())
        .set("partition", source)
        .set("tol", tol);

    let mut table = Table::new(&["outcome", "label", "prob", "x", "y", "block"]);
    for w in 0..doc.space.len() {
        table.push(vec![
            w.to_string(),
            doc.space.labels()[w].clone(),
            exact(&doc.space.probs()[w]),
            exact(&x.values()[w]),
            exact(&y.values()[w]),
            g.block_of(w).to_string(),
        ]);
    }
    let blocks: Vec<Value> = check
        .blocks
        .iter()
        .map(|b| {
            json!({
                "block": b.block,
                "outcomes": b.outcomes,
                "x_integral": exact(&b.x_integral),
                "y_integral": exact(&b.y_integral),
                "abs_diff": exact(&b.abs_diff),
                "ok": b.ok,
            })
        })
        .collect();
    let result = json!({
        "y": y.values().iter().map(scalar_to_json).collect::<Vec<_>>(),
        "expectation": exact(&x.expectation()),
        "partition": io::partition_to_json(&g),
        "defining_property": {
            "passed": check.passed,
            "tol": check.tol,
            "blocks": blocks,
            "note": check.note,
        },
    });
    Ok(Report {
        config,
        status: Status::from_checks(check.passed),
        result,
        table,
    })
}

fn parse_tree(text: &str) -> Result<AdaptedProcess<Rational>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [depth, up, step_up, step_down] = parts[..] else {
        bail!("tree must be depth:up_prob:step_up:step_down, got {text:?}");
    };
    let num = |t: &str| parse_rational(t).ok_or_else(|| anyhow!("bad number {t:?} in tree {text:?}"));
    let depth: usize = depth.parse().with_context(|| format!("bad depth {depth:?}"))?;
    Ok(make_binary_tree_space(depth, num(up)?, num(step_up)?, num(step_down)?)?.walk)
}

fn classify_cmd(cli: &Cli, args: &ClassifyArgs) -> Result<Report> {
    let (x, source) = match (&args.process, &args.tree) {
        (Some(path), _) => (
            io::process_from_json::<Rational>(&read_json(path)?)
                .with_context(|| format!("process file {}", path.display()))?,
            json!({"process": path.display().to_string()}),
        ),
        (None, Some(tree)) => (parse_tree(tree)?, json!({"tree": tree})),
        (None, None) => bail!("give --process or --tree"),
    };
    let tol = cli.tol.unwrap_or(0.0);
    let class = classify(&x, tol);
    let expected = args.expect.map(|k| match k {
        Kind::Martingale => ProcessKind::Martingale,
        Kind::Supermartingale => ProcessKind::Supermartingale,
        Kind::Submartingale => ProcessKind::Submartingale,
        Kind::None => ProcessKind::None,
    });

    let mut config = base_config(cli, "classify");
    config
        .set("input", source)
        .set("tol", tol)
        .set("horizon", x.horizon())
        .set("expect", expected.map_or(Value::Null, |k| json!(k.to_string())));

    let mut table = Table::new(&["time", "block", "outcomes", "defect"]);
    let mut defects = Vec::new();
    for d in class.all_defects() {
        let outcomes = d.outcomes.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" ");
        table.push(vec![
            d.time.to_string(),
            d.block.to_string(),
            outcomes,
            exact(&d.defect),
        ]);
        defects.push(json!({
            "time": d.time,
            "block": d.block,
            "outcomes": d.outcomes,
            "defect": exact(&d.defect),
        }));
    }
    let result = json!({
        "kind": class.kind,
        "tol": class.tol,
        "outcomes": x.filtration().space().len(),
        "defects": defects,
    });
    Ok(Report {
        config,
        status: Status::from_checks(expected.is_none_or(|k| k == class.kind)),
        result,
        table,
    })
}

fn violated(r: &UpcrossingReport<Rational>, form: Form) -> bool {
    let v = match form {
        Form::Literal => r.verdict(),
        Form::Corrected => r.corrected_verdict(),
    };
    v == PathwiseVerdict::Violated
}

fn upcross_json(r: &UpcrossingReport<Rational>) -> Value {
    let trace: Vec<Value> = r
        .trace
        .iter()
        .map(|t| {
            json!({
                "n": t.n,
                "value": exact(&t.value),
                "indicator": t.indicator.map(u8::from),
                "running_integral": exact(&t.running_integral),
                "running_count": t.running_count,
            })
        })
        .collect();
    json!({
        "band": {"lower": exact(&r.record.band.lower), "upper": exact(&r.record.band.upper)},
        "taus": r.record.taus,
        "sigmas": r.record.sigmas,
        "count": r.record.count,
        "open_excursion": r.record.open_excursion(),
        "indicator": r.indicator.iter().map(|&h| u8::from(h)).collect::<Vec<_>>(),
        "integral": exact(&r.integral),
        "lhs": exact(&r.lhs),
        "initial_correction": exact(&r.initial_correction),
        "final_correction": exact(&r.final_correction),
        "rhs": exact(&r.rhs),
        "slack": exact(&r.slack),
        "verdict": r.verdict(),
        "corrected_rhs": exact(&r.corrected_rhs),
        "corrected_slack": exact(&r.corrected_slack),
        "corrected_verdict": r.corrected_verdict(),
        "trace": trace,
    })
}

fn upcross(cli: &Cli, args: &UpcrossArgs) -> Result<Report> {
    let bands = if cli.bands.is_empty() {
        vec![(Rational::from_ratio(-1, 1), Rational::from_ratio(1, 1))]
    } else {
        cli.bands.clone()
    };
    let mut config = base_config(cli, "upcross");
    config.set("bands", bands_json(&bands)).set("form", args.form.name());
    if args.fuzz {
        return upcross_fuzz(cli, args, &bands, config);
    }
    let (path, source) = match (&args.path, &args.values) {
        (Some(p), _) => (
            io::path_from_json::<Rational>(&read_json(p)?).with_context(|| format!("path file {}", p.display()))?,
            json!({"path": p.display().to_string()}),
        ),
        (None, Some(v)) => (io::path_from_text::<Rational>(v)?, json!({"values": v})),
        (None, None) => bail!("give --path, --values or --fuzz"),
    };
    config.set("input", source).set("horizon", path.horizon());

    let mut table = Table::new(&[
        "band_lower",
        "band_upper",
        "n",
        "value",
        "indicator",
        "running_integral",
        "running_count",
    ]);
    let mut reports = Vec::new();
    let mut status = Status::Ok;
    for (a, b) in &bands {
        let r = check_pathwise_inequality(&path, a, b)?;
        if violated(&r, args.form) {
            status = Status::TheoremViolation;
        }
        for t in &r.trace {
            table.push(vec![
                exact(a),
                exact(b),
                t.n.to_string(),
                exact(&t.value),
                t.indicator.map_or(String::new(), |h| u8::from(h).to_string()),
                exact(&t.running_integral),
                t.running_count.to_string(),
            ]);
        }
        reports.push(upcross_json(&r));
    }
    Ok(Report {
        config,
        status,
        result: json!({ "reports": reports }),
        table,
    })
}

fn family_name(f: PathFamily) -> &'static str {
    match f {
        PathFamily::Walk => "walk",
        PathFamily::Noise => "noise",
        PathFamily::Monotone => "monotone",
        PathFamily::Alternating => "alternating",
    }
}

struct FuzzRow {
    family: PathFamily,
    band: usize,
    count: usize,
    lhs: Rational,
    rhs: Rational,
    slack: Rational,
    corrected_rhs: Rational,
    corrected_slack: Rational,
}

fn upcross_fuzz(
    cli: &Cli,
    args: &UpcrossArgs,
    bands: &[(Rational, Rational)],
    mut config: RunConfig,
) -> Result<Report> {
    let trials = cli.trials.unwrap_or(DEFAULT_FUZZ_PATHS);
    let horizon = cli.horizon.unwrap_or(DEFAULT_FUZZ_LENGTH);
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    config
        .set("input", "fuzz")
        .set("trials", trials)
        .set("horizon", horizon);

    let per_path = run_trials(trials, cli.seed(), cli.parallelism(), |i, rng| {
        let family = PathFamily::ALL[i % PathFamily::ALL.len()];
        let path = random_path::<Rational, _>(rng, family, horizon);
        bands
            .iter()
            .enumerate()
            .map(|(band, (a, b))| {
                let r = check_pathwise_inequality(&path, a, b).expect("bands validated");
                FuzzRow {
                    family,
                    band,
                    count: r.record.count,
                    lhs: r.lhs,
                    rhs: r.rhs,
                    slack: r.slack,
                    corrected_rhs: r.corrected_rhs,
                    corrected_slack: r.corrected_slack,
                }
            })
            .collect::<Vec<_>>()
    });

    let mut table = Table::new(&[
        "path",
        "family",
        "band_lower",
        "band_upper",
        "count",
        "lhs",
        "rhs",
        "slack",
        "corrected_rhs",
        "corrected_slack",
    ]);
    let (mut literal_violations, mut corrected_violations) = (0usize, 0usize);
    let mut min_slack: Option<Rational> = None;
    let mut min_corrected: Option<Rational> = None;
    let mut examples = Vec::new();
    for (i, rows) in per_path.iter().enumerate() {
        for row in rows {
            let (a, b) = &bands[row.band];
            table.push(vec![
                i.to_string(),
                family_name(row.family).to_string(),
                exact(a),
                exact(b),
                row.count.to_string(),
                exact(&row.lhs),
                exact(&row.rhs),
                exact(&row.slack),
                exact(&row.corrected_rhs),
                exact(&row.corrected_slack),
            ]);
            literal_violations += usize::from(negative(&row.slack));
            corrected_violations += usize::from(negative(&row.corrected_slack));
            if min_slack.as_ref().is_none_or(|m| row.slack < *m) {
                min_slack = Some(row.slack.clone());
            }
            if min_corrected.as_ref().is_none_or(|m| row.corrected_slack < *m) {
                min_corrected = Some(row.corrected_slack.clone());
            }
            let bad = match args.form {
                Form::Literal => negative(&row.slack),
                Form::Corrected => negative(&row.corrected_slack),
            };
            if bad && examples.len() < 10 {
                examples.push(json!({
                    "path": i,
                    "family": family_name(row.family),
                    "band": format!("{a}:{b}"),
                    "slack": exact(&row.slack),
                    "corrected_slack": exact(&row.corrected_slack),
                }));
            }
        }
    }
    let selected = match args.form {
        Form::Literal => literal_violations,
        Form::Corrected => corrected_violations,
    };
    let result = json!({
        "paths": trials,
        "checks": trials * bands.len(),
        "literal_violations": literal_violations,
        "corrected_violations": corrected_violations,
        "min_slack": min_slack.as_ref().map(exact),
        "min_corrected_slack": min_corrected.as_ref().map(exact),
        "violations": examples,
    });
    Ok(Report {
        config,
        status: if selected > 0 {
            Status::TheoremViolation
        } else {
            Status::Ok
        },
        result,
        table,
    })
}

fn load_offspring(cli: &Cli, args: &GwArgs) -> Result<(OffspringDistribution<Rational>, Value)> {
    if let Some(p) = &args.p {
        let probs = p
            .split(',')
            .map(|t| parse_rational(t).ok_or_else(|| anyhow!("bad probability {t:?}")))
            .collect::<Result<Vec<_>>>()?;
        return Ok((OffspringDistribution::new(probs)?, json!({"p": p})));
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow!("give an offspring law with --config FILE or --p"))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let doc: Value = if is_toml {
        toml::from_str(&text).with_context(|| format!("{} is not valid TOML", path.display()))?
    } else {
        serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))?
    };
    let dist = io::offspring_from_json(&doc).with_context(|| format!("offspring file {}", path.display()))?;
    Ok((dist, json!({"config": path.display().to_string()})))
}

fn probs_json(d: &OffspringDistribution<Rational>) -> Value {
    Value::Array(d.probs().iter().map(scalar_to_json).collect())
}

fn gw(cli: &Cli, args: &GwArgs) -> Result<Report> {
    if let GwCommand::UiDemo { threshold } = &args.command {
        return ui_demo(cli, args, *threshold);
    }
    let (dist, source) = load_offspring(cli, args)?;
    let name = match args.command {
        GwCommand::Simulate => "gw simulate",
        GwCommand::Extinction => "gw extinction",
        GwCommand::Regime => "gw regime",
        GwCommand::DefectCheck => "gw defect-check",
        GwCommand::UiDemo { .. } => unreachable!(),
    };
    let mut config = base_config(cli, name);
    config.set("offspring", source).set("p", probs_json(&dist));
    match args.command {
        GwCommand::Simulate => gw_simulate(cli, args, &dist, config),
        GwCommand::Extinction => gw_extinction(cli, &dist, config),
        GwCommand::Regime => gw_regime(cli, &dist, config),
        GwCommand::DefectCheck => gw_defect(cli, &dist, config),
        GwCommand::UiDemo { .. } => unreachable!(),
    }
}

fn gw_simulate(
    cli: &Cli,
    args: &GwArgs,
    dist: &OffspringDistribution<Rational>,
    mut config: RunConfig,
) -> Result<Report> {
    let trials = cli.trials.unwrap_or(DEFAULT_SIMULATE_TRIALS);
    let horizon = cli.horizon.unwrap_or(DEFAULT_GW_HORIZON);
    let pop_cap = args.pop_cap.unwrap_or(DEFAULT_POP_CAP);
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    config
        .set("trials", trials)
        .set("horizon", horizon)
        .set("pop_cap", pop_cap);
    let trajectories = branching::simulate_ensemble(dist, horizon, trials, cli.seed(), pop_cap, cli.parallelism())?;
    let mut table = Table::new(&["trial", "n", "z"]);
    for (i, t) in trajectories.iter().enumerate() {
        for (n, z) in t.sizes.iter().enumerate() {
            table.push(vec![i.to_string(), n.to_string(), z.to_string()]);
        }
    }
    let extinct = trajectories.iter().filter(|t| t.extinct_by(horizon)).count();
    let capped = trajectories.iter().filter(|t| t.capped).count();
    let result = json!({
        "regime": classify_regime(dist, 0.0),
        "extinct_by_horizon": extinct,
        "capped": capped,
        "trajectories": trajectories,
    });
    Ok(Report {
        config,
        status: Status::Ok,
        result,
        table,
    })
}

fn gw_extinction(cli: &Cli, dist: &OffspringDistribution<Rational>, mut config: RunConfig) -> Result<Report> {
    let tol = cli.tol.unwrap_or(DEFAULT_PGF_TOL);
    let horizon = cli.horizon.unwrap_or(DEFAULT_GW_HORIZON);
    let trials = cli.trials.unwrap_or(DEFAULT_GW_TRIALS);
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    config
        .set("tol", tol)
        .set("max_iter", DEFAULT_PGF_MAX_ITER)
        .set("horizon", horizon)
        .set("trials", trials);
    let pgf = extinction_probability(dist, tol, DEFAULT_PGF_MAX_ITER)?;
    let iterates: Vec<f64> = (0..=horizon).map(|n| extinction_by(dist, n)).collect();
    let mc = branching::monte_carlo_extinction(dist, horizon, trials, cli.seed(), cli.parallelism())?;
    let (lo, hi) = mc.proportion.confidence_interval();

    let mut table = Table::new(&["n", "iterate"]);
    for (n, s) in iterates.iter().enumerate() {
        table.push(vec![n.to_string(), s.to_string()]);
    }
    let result = json!({
        "regime": classify_regime(dist, 0.0),
        "degenerate": pgf.degenerate,
        "q": pgf.q,
        "converged": pgf.converged,
        "iterations": pgf.iterations,
        "iterates": iterates,
        "monte_carlo": {
            "horizon": mc.horizon,
            "trials": mc.proportion.trials,
            "extinct": mc.proportion.successes,
            "estimate": mc.proportion.estimate,
            "standard_error": mc.proportion.standard_error,
            "ci95": [lo, hi],
            "exact": mc.exact,
            "within_three_se": mc.within_three_se,
            "pop_cap": mc.pop_cap,
            "capped_trials": mc.capped_trials,
        },
    });
    Ok(Report {
        config,
        status: Status::from_checks(mc.within_three_se),
        result,
        table,
    })
}

fn gw_regime(cli: &Cli, dist: &OffspringDistribution<Rational>, mut config: RunConfig) -> Result<Report> {
    let tol = cli.tol.unwrap_or(0.0);
    config.set("tol", tol);
    let regime = classify_regime(dist, tol);
    let pgf = extinction_probability(dist, DEFAULT_PGF_TOL, DEFAULT_PGF_MAX_ITER)?;
    let variance = dist.variance();
    let mut table = Table::new(&[
        "regime",
        "mean",
        "variance",
        "degenerate",
        "q",
        "converged",
        "iterations",
    ]);
    table.push(vec![
        regime.kind.to_string(),
        exact(dist.mean()),
        exact(&variance),
        pgf.degenerate.to_string(),
        pgf.q.to_string(),
        pgf.converged.to_string(),
        pgf.iterations.to_string(),
    ]);
    let result = json!({
        "regime": regime.kind,
        "mean": exact(dist.mean()),
        "mean_f64": regime.mean,
        "variance": exact(&variance),
        "degenerate": pgf.degenerate,
        "q": pgf.q,
        "converged": pgf.converged,
        "iterations": pgf.iterations,
    });
    Ok(Report {
        config,
        status: Status::Ok,
        result,
        table,
    })
}

fn gw_defect(cli: &Cli, dist: &OffspringDistribution<Rational>, mut config: RunConfig) -> Result<Report> {
    let trials = cli.trials.unwrap_or(DEFAULT_GW_TRIALS);
    let horizon = cli.horizon.unwrap_or(DEFAULT_DEFECT_HORIZON);
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    config.set("trials", trials).set("horizon", horizon);
    let mc = branching::martingale_defect_check(dist, trials, horizon, cli.seed(), cli.parallelism())?;
    let exact_check = branching::exact_mean_check(dist, horizon.min(EXACT_DEFECT_HORIZON)).ok();

    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    let opt_bool = |x: Option<bool>| x.map_or(String::new(), |v| v.to_string());
    let mut table = Table::new(&[
        "n",
        "survivors",
        "ratio_mean",
        "ratio_se",
        "ratio_ok",
        "increment_mean",
        "increment_se",
        "increment_ok",
    ]);
    for r in &mc.rows {
        table.push(vec![
            r.generation.to_string(),
            r.survivors.to_string(),
            opt(r.ratio_mean),
            opt(r.ratio_se),
            opt_bool(r.ratio_ok),
            opt(r.increment_mean),
            opt(r.increment_se),
            opt_bool(r.increment_ok),
        ]);
    }
    let exact_json = exact_check.as_ref().map(|e| {
        json!({
            "horizon": e.means.len() - 1,
            "means": e.means.iter().map(exact).collect::<Vec<_>>(),
            "mean_powers": e.mean_powers.iter().map(exact).collect::<Vec<_>>(),
            "conditional": e.conditional.iter().map(|c| json!({
                "n": c.generation,
                "z": c.size,
                "conditional_mean": exact(&c.conditional_mean),
                "expected": exact(&c.expected),
                "ok": c.ok,
            })).collect::<Vec<_>>(),
            "passed": e.passed,
        })
    });
    let passed = mc.passed && exact_check.as_ref().is_none_or(|e| e.passed);
    let result = json!({
        "regime": classify_regime(dist, 0.0),
        "monte_carlo": mc,
        "exact": exact_json,
    });
    Ok(Report {
        config,
        status: Status::from_checks(passed),
        result,
        table,
    })
}

fn ui_demo(cli: &Cli, args: &GwArgs, threshold: Option<f64>) -> Result<Report> {
    if args.p.is_some() || cli.config.is_some() {
        bail!("ui-demo always uses the critical law p = (1/2, 0, 1/2); drop --p/--config");
    }
    let trials = cli.trials.unwrap_or(DEFAULT_UI_TRIALS);
    let horizon = cli.horizon.unwrap_or(UI_PILOT_HORIZON);
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let threshold = threshold.or((horizon == UI_PILOT_HORIZON).then_some(UI_SURVIVAL_THRESHOLD));
    let report = branching::ui_failure_demo(trials, horizon, cli.seed(), cli.parallelism())?;

    let mut config = base_config(cli, "gw ui-demo");
    config
        .set("trials", trials)
        .set("horizon", horizon)
        .set("p", probs_json(&branching::critical_binary_split()))
        .set("threshold", threshold.map_or(Value::Null, Value::from));

    let below = threshold.map(|t| report.final_survival < t);
    let mut table = Table::new(&["n", "mean", "standard_error", "survival", "exact_survival"]);
    for r in &report.rows {
        table.push(vec![
            r.generation.to_string(),
            r.mean.to_string(),
            r.standard_error.to_string(),
            r.survival.to_string(),
            r.exact_survival.to_string(),
        ]);
    }
    let passed = report.mean_within_three_se && report.survival_nonincreasing && below != Some(false);
    let result = json!({
        "report": report,
        "survival_below_threshold": below,
    });
    Ok(Report {
        config,
        status: Status::from_checks(passed),
        result,
        table,
    })
}

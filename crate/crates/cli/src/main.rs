//! Command-line front end: runs box-type set operations on named or
//! file-supplied scenarios and prints machine-readable JSON reports.
//!
//! Exit codes: 0 success, 1 inequality violation, 2 usage error,
//! 3 resource-cap refusal. Timing goes to standard error so standard
//! output stays byte-identical across runs.

use boxkit_core::measure::{eleven_box, inflate, st_box, st_box_complementary};
use boxkit_core::perc::{mc_experiment, Norm};
use boxkit_core::scenario::Scenario;
use boxkit_core::verify::{
    check_bkr, check_core_bound, check_eleven, check_st_bounds, generate_instance,
    InequalityReport, InstanceSpec, WeightProfile,
};
use boxkit_core::{
    classical_box, core, find_witness, Alphabet, BoxkitError, Event, ProductSpace, Rational,
    ThresholdPair,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use std::io::Write;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "boxkit", version, about = "Exact box-type operations on finite product spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Named scenario: grid2x3, grid13, coin, threesided, zeroatom.
    #[arg(long, conflicts_with = "scenario_file")]
    scenario: Option<String>,
    /// Coin family parameter (used by --scenario coin).
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// JSON file with alphabets and events (see README for the schema).
    #[arg(long)]
    scenario_file: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Classical disjoint-occurrence box of the scenario's two events.
    Box(ScenarioArgs),
    /// Measure-aware box (almost-sure disjoint occurrence).
    Eleven(ScenarioArgs),
    /// Lenient threshold box.
    Stbox {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Threshold for the first event, as p/q.
        #[arg(long)]
        s: String,
        /// Threshold for the second event, as p/q.
        #[arg(long)]
        t: String,
        /// Restrict the second mask to the complement of the first.
        #[arg(long)]
        complementary: bool,
    },
    /// Cylindrical core of the scenario's first event.
    Core(ScenarioArgs),
    /// Threshold inflation of the scenario's first event.
    Inflate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Inflation threshold, as p/q.
        #[arg(long)]
        r: String,
    },
    /// Seeded inequality suites over random instances.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Number of seeded instances.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Continuum percolation Monte Carlo experiment.
    Perc {
        /// Number of points.
        #[arg(long)]
        n: usize,
        /// Connection radius (edges join points within 2r).
        #[arg(long)]
        r: f64,
        /// Annihilation radius.
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        /// Distance norm: l1, l2, or linf.
        #[arg(long, default_value = "linf")]
        norm: String,
        #[arg(long, default_value_t = 1000)]
        replicates: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Bkr,
    Eleven,
    Core,
    St,
}

/// On-disk scenario: alphabets as weight strings, events as outcome
/// indices.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    alphabets: Vec<Vec<String>>,
    a: Vec<usize>,
    b: Vec<usize>,
}

fn load_scenario(args: &ScenarioArgs) -> anyhow::Result<Scenario> {
    if let Some(path) = &args.scenario_file {
        let text = std::fs::read_to_string(path)?;
        let file: ScenarioFile = serde_json::from_str(&text)?;
        let alphabets = file
            .alphabets
            .iter()
            .map(|weights| {
                let parsed = weights
                    .iter()
                    .map(|w| Rational::from_str(w))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                Ok(Alphabet::new(parsed)?)
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let space = ProductSpace::new(alphabets)?;
        let a = Event::from_indices(space.clone(), &file.a);
        let b = Event::from_indices(space.clone(), &file.b);
        Ok(Scenario {
            name: file.name.unwrap_or_else(|| path.clone()),
            space,
            a,
            b,
            coordinates: "as supplied in the scenario file".into(),
        })
    } else if let Some(name) = &args.scenario {
        Ok(boxkit_core::scenario::by_name(name, args.m)?)
    } else {
        anyhow::bail!("either --scenario or --scenario-file is required");
    }
}

fn event_value(e: &Event) -> Value {
    let prob = e.prob();
    json!({
        "prob": prob.to_string(),
        "prob_decimal": prob.to_f64(),
        "cardinality": e.cardinality(),
    })
}

/// Up to `limit` members of the event, as digit vectors.
fn members(e: &Event, limit: usize) -> Value {
    let space = e.space();
    let sample: Vec<Vec<usize>> = e.iter().take(limit).map(|x| space.decode(x)).collect();
    json!(sample)
}

fn report_value(r: &InequalityReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

fn emit(report: &Value, out: Option<&str>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn scenario_header(s: &Scenario, operation: &str) -> Value {
    json!({
        "operation": operation,
        "scenario": s.name,
        "coordinates": s.coordinates,
        "outcome_count": s.space.outcome_count(),
        "a": event_value(&s.a),
        "b": event_value(&s.b),
    })
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    // A violated inequality is reported through the return value.
    match cli.command {
        Command::Box(args) => {
            let s = load_scenario(&args)?;
            let result = classical_box(&s.a, &s.b);
            let witnesses: Vec<Value> = result
                .iter()
                .take(3)
                .filter_map(|x| find_witness(&s.a, &s.b, x))
                .map(|w| {
                    json!({
                        "outcome": s.space.decode(w.outcome),
                        "k": w.k.indices(s.space.n()).collect::<Vec<_>>(),
                        "l": w.l.indices(s.space.n()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let mut report = scenario_header(&s, "box");
            report["result"] = event_value(&result);
            report["witness_samples"] = json!(witnesses);
            report["bound"] = report_value(&check_bkr(&s.a, &s.b)?);
            let ok = report["bound"]["holds"].as_bool() == Some(true);
            emit(&report, args.out.as_deref())?;
            Ok(ok)
        }
        Command::Eleven(args) => {
            let s = load_scenario(&args)?;
            let result = eleven_box(&s.a, &s.b)?;
            let mut report = scenario_header(&s, "eleven");
            report["result"] = event_value(&result);
            report["members"] = members(&result, 8);
            report["bound"] = report_value(&check_eleven(&s.a, &s.b)?);
            let ok = report["bound"]["holds"].as_bool() == Some(true);
            emit(&report, args.out.as_deref())?;
            Ok(ok)
        }
        Command::Stbox {
            scenario,
            s,
            t,
            complementary,
        } => {
            let sc = load_scenario(&scenario)?;
            let s = Rational::from_str(&s).map_err(|e| anyhow::anyhow!("{e}"))?;
            let t = Rational::from_str(&t).map_err(|e| anyhow::anyhow!("{e}"))?;
            let st = ThresholdPair::new(s, t)?;
            let result = if complementary {
                st_box_complementary(&sc.a, &sc.b, &st)?
            } else {
                st_box(&sc.a, &sc.b, &st)?
            };
            let mut report = scenario_header(&sc, "stbox");
            report["s"] = json!(st.s().to_string());
            report["t"] = json!(st.t().to_string());
            report["complementary"] = json!(complementary);
            report["result"] = event_value(&result);
            report["members"] = members(&result, 8);
            let mut ok = true;
            if !complementary {
                let (inflated, through_cores) = check_st_bounds(&sc.a, &sc.b, &st)?;
                ok = inflated.holds && through_cores.as_ref().is_none_or(|r| r.holds);
                report["bound"] = report_value(&inflated);
                if let Some(r) = through_cores {
                    report["core_bound"] = report_value(&r);
                }
            }
            emit(&report, scenario.out.as_deref())?;
            Ok(ok)
        }
        Command::Core(args) => {
            let s = load_scenario(&args)?;
            let result = core(&s.a);
            let mut report = scenario_header(&s, "core");
            report["result"] = event_value(&result);
            report["gap"] = json!((&s.a.prob() - &result.prob()).to_string());
            emit(&report, args.out.as_deref())?;
            Ok(true)
        }
        Command::Inflate { scenario, r } => {
            let s = load_scenario(&scenario)?;
            let r = Rational::from_str(&r).map_err(|e| anyhow::anyhow!("{e}"))?;
            let result = inflate(&s.a, &r)?;
            let mut report = scenario_header(&s, "inflate");
            report["r"] = json!(r.to_string());
            report["result"] = event_value(&result);
            emit(&report, scenario.out.as_deref())?;
            Ok(true)
        }
        Command::Verify { suite, seeds, out } => {
            let mut reports: Vec<Value> = Vec::new();
            let mut violations = 0u64;
            for seed in 0..seeds {
                let profile = match seed % 3 {
                    0 => WeightProfile::Fair,
                    1 => WeightProfile::RandomRational,
                    _ => WeightProfile::WithZeroAtoms,
                };
                let sizes = match seed % 4 {
                    0 => vec![2, 2],
                    1 => vec![2, 3],
                    2 => vec![3, 3, 2],
                    _ => vec![2, 2, 2, 2],
                };
                let inst = generate_instance(&InstanceSpec {
                    seed,
                    sizes,
                    profile,
                    density: 0.4,
                })?;
                let checked: Vec<InequalityReport> = match suite {
                    Suite::Bkr => vec![check_bkr(&inst.a, &inst.b)?],
                    Suite::Eleven => vec![check_eleven(&inst.a, &inst.b)?],
                    Suite::Core => {
                        if inst.a.is_full() || inst.b.is_full() {
                            Vec::new()
                        } else {
                            vec![check_core_bound(&inst.a, &inst.b)?]
                        }
                    }
                    Suite::St => {
                        let st =
                            ThresholdPair::new(Rational::new(1, 2), Rational::new(1, 3))?;
                        let (first, second) = check_st_bounds(&inst.a, &inst.b, &st)?;
                        let mut v = vec![first];
                        v.extend(second);
                        v
                    }
                };
                for r in checked {
                    if !r.holds {
                        violations += 1;
                        reports.push(report_value(&r));
                    }
                }
            }
            let report = json!({
                "operation": "verify",
                "seeds": seeds,
                "violations": violations,
                "violating_reports": reports,
            });
            emit(&report, out.as_deref())?;
            Ok(violations == 0)
        }
        Command::Perc {
            n,
            r,
            q,
            norm,
            replicates,
            seed,
            out,
        } => {
            let norm = Norm::from_str(&norm).map_err(|e| anyhow::anyhow!("{e}"))?;
            let summary = mc_experiment(n, r, q, norm, replicates, seed);
            let prod = summary.p_a.p_hat * summary.p_b.p_hat;
            let mut report = serde_json::to_value(&summary)?;
            report["witness_minus_product"] = json!(summary.witness.p_hat - prod);
            report["seed"] = json!(seed);
            emit(&report, out.as_deref())?;
            Ok(true)
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    if let Some(e) = err.downcast_ref::<BoxkitError>() {
        match e {
            BoxkitError::SpaceTooLarge { .. }
            | BoxkitError::OracleBudgetExceeded { .. }
            | BoxkitError::AnnihilationTermTooLarge { .. } => return ExitCode::from(3),
            _ => {}
        }
    }
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("BOXKIT_THREADS") {
        if let Ok(count) = threads.parse::<usize>() {
            if count > 0 {
                // Ignore failure if a global pool already exists.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(count)
                    .build_global();
            }
        }
    }
    let started = Instant::now();
    let outcome = run(cli);
    let _ = writeln!(
        std::io::stderr(),
        "elapsed: {:.3}s",
        started.elapsed().as_secs_f64()
    );
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            let _ = writeln!(std::io::stderr(), "error: {err}");
            exit_code_for(&err)
        }
    }
}

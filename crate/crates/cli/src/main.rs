use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use causalnav::causal::{discover_structure, edge_f1, ground_truth_model, DiscoveryConfig};
use causalnav::env::{bundled_scenario, Scenario, BUNDLED_SCENARIOS};
use causalnav::harness::{
    compute_metrics, default_grid, markdown_report, metrics_csv, outcomes_csv, proxemics_csv, read_outcomes, run_all,
    runtime_by_approach, scalability_bench, scalability_markdown, sensitivity_csv, sensitivity_markdown,
    sensitivity_sweep, sweep_scenario, tests_csv, train_model, ApproachConfig, APPROACH_NAMES, TRAINING_SEED,
};
use causalnav::inference::{do_query, expected_value, fit_mle, CausalInferenceModel, QuerySpec};
use causalnav::params::Params;
use causalnav::pipeline::build_dataset;
use causalnav::planner::{decide_task, estimate_arcs, plan_path, Decision, DecisionPolicy, HeuristicWeights};
use causalnav::sim::{collect_training_log, TimeSeriesLog};

#[derive(Parser)]
#[command(name = "causalnav", version, about = "Causal task planning for a warehouse robot")]
struct Cli {
    /// Parameters document (TOML); built-in defaults otherwise.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    /// 20 waypoints, 20 workers, 50 tasks per slot.
    Desk,
    /// 73 waypoints, 50 workers, 200 tasks per slot.
    Full,
}

impl Profile {
    fn scenario(self) -> &'static str {
        match self {
            Profile::Desk => "desk20",
            Profile::Full => "warehouse73",
        }
    }
}

#[derive(Args)]
struct ScenarioArg {
    /// Bundled scenario name or path to a scenario document.
    #[arg(long)]
    scenario: Option<String>,
    /// Scenario preset, used when --scenario is absent.
    #[arg(long, value_enum, default_value = "desk")]
    profile: Profile,
}

impl ScenarioArg {
    fn load(&self) -> Result<Scenario> {
        load_scenario(self.scenario.as_deref().unwrap_or(self.profile.scenario()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the data-collection simulation and write the training log.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = TRAINING_SEED)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build the dataset, discover the structure and fit a model file.
    Learn {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Training log written by `simulate`; collected on the fly otherwise.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = TRAINING_SEED)]
        seed: u64,
        /// Fit the reference structure instead of the discovered one.
        #[arg(long)]
        reference_dag: bool,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Answer one interventional query against a model file.
    Infer {
        #[arg(long)]
        model: PathBuf,
        /// Target node, e.g. `L` or `V[t-1]`.
        #[arg(long)]
        target: String,
        /// Intervention `NODE=VALUE` (label or bin code); repeatable.
        #[arg(long = "do", value_name = "NODE=VALUE")]
        interventions: Vec<String>,
        /// Conditioning `NODE=VALUE`; repeatable.
        #[arg(long = "given", value_name = "NODE=VALUE")]
        conditions: Vec<String>,
    },
    /// Plan one task and print the route, its costs and the proceed/abort verdict.
    Plan {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        slot: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Battery level at the start of the task, %.
        #[arg(long, default_value_t = 100.0)]
        battery: f64,
        #[arg(long)]
        charging: bool,
        /// Shortest path instead of the causal cost.
        #[arg(long)]
        shortest: bool,
    },
    /// Run the four-way ablation and write outcomes, metrics and the report.
    Experiment {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Seeds as a list (`1,2,3`) or range (`1-5`).
        #[arg(long, default_value = "1-5")]
        seeds: String,
        /// Comma-separated subset of the approaches.
        #[arg(long, default_value = "baseline,causal-routing,refusal-only,full-causal")]
        approaches: String,
        /// Model file to plan with; trained on the scenario otherwise.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sweep the heuristic weights over the 27-point grid.
    Sensitivity {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "S2,S6")]
        slots: String,
        /// Tasks kept per slot.
        #[arg(long, default_value_t = 5)]
        tasks: usize,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Time the per-waypoint queries on growing subgraphs.
    Scalability {
        /// Bundled scenario name or path; the full warehouse by default.
        #[arg(long, default_value = "warehouse73")]
        scenario: String,
        #[arg(long, default_value = "10,20,30,40,50,60,70")]
        sizes: String,
        #[arg(long, default_value_t = 1000)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute metrics, tests and the Markdown report from `experiment` outputs.
    Report {
        /// Directory holding outcomes.csv and proxemics.csv.
        #[arg(long = "in", default_value = "out")]
        input: PathBuf,
        /// Defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the parameters in effect as a TOML document (the defaults unless --params is given).
    Params,
}

fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if BUNDLED_SCENARIOS.contains(&name_or_path) {
        return Ok(bundled_scenario(name_or_path)?);
    }
    let text = fs::read_to_string(name_or_path)
        .with_context(|| format!("'{name_or_path}' is neither a bundled scenario nor a readable file"))?;
    Ok(Scenario::parse(&text)?)
}

fn load_params(path: Option<&Path>) -> Result<Params> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(Params::parse(&text)?)
        }
        None => Ok(Params::default()),
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty seed range {s}");
        }
        return Ok((a..=b).collect());
    }
    let seeds = s.split(',').map(|x| x.trim().parse::<u64>()).collect::<Result<Vec<_>, _>>()?;
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    Ok(s.split(',').map(|x| x.trim().parse::<T>()).collect::<Result<Vec<_>, _>>()?)
}

fn assignment(model: &CausalInferenceModel, text: &str) -> Result<(String, usize)> {
    let (node, value) = text
        .split_once('=')
        .with_context(|| format!("expected NODE=VALUE, got '{text}'"))?;
    let base = node.trim().trim_end_matches("[t-1]");
    Ok((node.trim().to_string(), model.code(base, value.trim())?))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn model_for(path: Option<&Path>, scenario: &Scenario, params: &Params) -> Result<CausalInferenceModel> {
    match path {
        Some(p) => Ok(CausalInferenceModel::load(p).with_context(|| format!("loading model {}", p.display()))?),
        None => {
            log::info!("training on {} with seed {TRAINING_SEED}", scenario.name);
            Ok(train_model(scenario, params, TRAINING_SEED, None)?)
        }
    }
}

fn approaches(list: &str, params: &Params) -> Result<Vec<ApproachConfig>> {
    let mut out = Vec::new();
    for name in list.split(',').filter(|s| !s.trim().is_empty()) {
        let a = ApproachConfig::by_name(name, params)?;
        if !out.iter().any(|b: &ApproachConfig| b.name == a.name) {
            out.push(a);
        }
    }
    if out.is_empty() {
        bail!("no approaches selected");
    }
    // the first approach is the reference of every comparison
    out.sort_by_key(|a| APPROACH_NAMES.iter().position(|n| *n == a.name));
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let params = load_params(cli.params.as_deref())?;
    match cli.command {
        Command::Params => print!("{}", params.to_toml()),
        Command::Simulate { scenario, seed, out } => {
            let sc = scenario.load()?;
            fs::create_dir_all(&out)?;
            let log = collect_training_log(&sc, &params, seed)?;
            let path = log.save(&out)?;
            println!("wrote {} ({} rows)", path.display(), log.rows.len());
        }
        Command::Learn {
            scenario,
            log,
            seed,
            reference_dag,
            alpha,
            out,
        } => {
            let sc = scenario.load()?;
            fs::create_dir_all(&out)?;
            let log = match log {
                Some(p) => {
                    let f = fs::File::open(&p).with_context(|| format!("opening {}", p.display()))?;
                    TimeSeriesLog::read_csv(std::io::BufReader::new(f), &sc.name, seed)?
                }
                None => collect_training_log(&sc, &params, seed)?,
            };
            let (data, schema) = build_dataset(&log, &sc.graph, &params.learning)?;
            data.save(&out, &schema)?;
            let truth = ground_truth_model();
            let dag = if reference_dag {
                truth.clone()
            } else {
                let config = DiscoveryConfig {
                    alpha,
                    seed,
                    ..DiscoveryConfig::default()
                };
                let report = discover_structure(&data, &config)?;
                println!("discovered {} edges, F1 against the reference structure {:.3}", report.dag.edges.len(), edge_f1(&report.dag, &truth));
                write(&out.join("dag.json"), &report.dag.to_json()?)?;
                report.dag
            };
            let model = fit_mle(&dag, &data, &schema)?;
            model.save(&out.join("model.json"))?;
            println!("wrote {} ({} rows, sample period {} s)", out.join("model.json").display(), data.rows(), model.period);
        }
        Command::Infer {
            model,
            target,
            interventions,
            conditions,
        } => {
            let m = CausalInferenceModel::load(&model)?;
            let mut q = QuerySpec::new(&target);
            for a in &interventions {
                let (n, v) = assignment(&m, a)?;
                q = q.intervene(&n, v);
            }
            for a in &conditions {
                let (n, v) = assignment(&m, a)?;
                q = q.given(&n, v);
            }
            let dist = do_query(&m, &q)?;
            let base = target.trim_end_matches("[t-1]");
            let mut labels = m.variable(base)?.labels.clone();
            if labels.is_empty() {
                let vs = m.schema.get(base)?;
                labels = (0..vs.bins())
                    .map(|i| {
                        let (lo, hi) = vs.bounds(i);
                        format!("[{lo:.6}, {hi:.6}]")
                    })
                    .collect();
            }
            for (l, p) in labels.iter().zip(&dist) {
                println!("{target} = {l}: {p:.6}");
            }
            let expectation = expected_value(&dist, &m.schema, base).ok();
            if let Some(e) = expectation {
                println!("E[{target}] = {e:.6}");
            }
            let json = serde_json::json!({
                "target": target,
                "labels": labels,
                "probabilities": dist,
                "expected": expectation,
            });
            println!("{json}");
        }
        Command::Plan {
            model,
            scenario,
            slot,
            from,
            to,
            battery,
            charging,
            shortest,
        } => {
            let sc = scenario.load()?;
            let m = CausalInferenceModel::load(&model)?;
            let g = &sc.graph;
            let find = |id: &str| g.index_of(id).with_context(|| format!("unknown waypoint '{id}'"));
            let (a, b) = (find(&from)?, find(&to)?);
            let v = params.query_velocity();
            let est = estimate_arcs(g, &m, &slot, charging, v)?;
            let w = if shortest {
                HeuristicWeights::shortest()
            } else {
                HeuristicWeights::new(params.planner.lambda_delta, params.planner.lambda_d, params.planner.lambda_l)
            };
            let plan = plan_path(g, a, b, &est, &w)?;
            let policy = DecisionPolicy {
                b_min: params.task.b_min,
                query_velocity: v,
            };
            let verdict = decide_task(&plan, battery, &policy);
            let ids: Vec<&str> = plan.path.iter().map(|&i| g.id(i)).collect();
            println!("route: {}", ids.join(" -> "));
            println!("{:<8} {:<8} {:>9} {:>10} {:>10} {:>10}", "from", "to", "delta_m", "D_hat", "battery_%", "cost");
            let mut arcs = Vec::new();
            for e in &plan.arcs {
                let cost = w.arc_cost(e);
                println!(
                    "{:<8} {:<8} {:>9.3} {:>10.4} {:>10.5} {:>10.4}",
                    g.id(e.from),
                    g.id(e.to),
                    e.delta,
                    e.d_hat,
                    e.battery_cost,
                    cost
                );
                arcs.push(serde_json::json!({
                    "from": g.id(e.from), "to": g.id(e.to), "delta": e.delta,
                    "d_hat": e.d_hat, "battery": e.battery_cost, "cost": cost,
                }));
            }
            let verdict = match verdict {
                Decision::Proceed => "proceed",
                Decision::Abort => "abort",
            };
            println!("length {:.3} m, total cost {:.4}, C_L {:.5} %", plan.length, plan.total_cost, plan.c_l);
            println!("battery {battery} % -> {:.5} % (threshold {} %): {verdict}", battery - plan.c_l, params.task.b_min);
            let json = serde_json::json!({
                "route": ids, "arcs": arcs, "length": plan.length, "total_cost": plan.total_cost,
                "c_l": plan.c_l, "battery": battery, "b_min": params.task.b_min, "verdict": verdict,
                "expansions": plan.expansions,
            });
            println!("{json}");
        }
        Command::Experiment {
            scenario,
            seeds,
            approaches: list,
            model,
            out,
        } => {
            let sc = scenario.load()?;
            let seeds = parse_seeds(&seeds)?;
            let arms = approaches(&list, &params)?;
            let m = if arms.iter().any(ApproachConfig::needs_model) {
                Some(model_for(model.as_deref(), &sc, &params)?)
            } else {
                None
            };
            fs::create_dir_all(&out)?;
            log::info!("running {} approaches x {} seeds on {}", arms.len(), seeds.len(), sc.name);
            let results = run_all(&sc, &arms, m.as_ref(), &params, &seeds)?;
            let report = compute_metrics(&results)?;
            let runtime = runtime_by_approach(&results);
            write(&out.join("outcomes.csv"), &outcomes_csv(&results)?)?;
            write(&out.join("proxemics.csv"), &proxemics_csv(&results)?)?;
            write(&out.join("metrics.csv"), &metrics_csv(&report)?)?;
            write(&out.join("tests.csv"), &tests_csv(&report)?)?;
            write(&out.join("runtime.json"), &(serde_json::to_string_pretty(&runtime)? + "\n"))?;
            write(&out.join("report.md"), &markdown_report(&report, Some(&runtime)))?;
            for a in &report.approaches {
                println!(
                    "{:<15} success {:6.2} %  failures D/L {}/{}  refused {}  collisions {}  median distance {:.2} m",
                    a.approach,
                    a.counts.success_pct(),
                    a.counts.failure_d,
                    a.counts.failure_l,
                    a.counts.refused,
                    a.collisions,
                    a.proxemics.median
                );
            }
        }
        Command::Sensitivity {
            scenario,
            seed,
            slots,
            tasks,
            model,
            out,
        } => {
            let sc = scenario.load()?;
            let m = model_for(model.as_deref(), &sc, &params)?;
            let slots: Vec<&str> = slots.split(',').map(str::trim).collect();
            let sub = sweep_scenario(&sc, &slots, tasks)?;
            let default = HeuristicWeights::new(params.planner.lambda_delta, params.planner.lambda_d, params.planner.lambda_l);
            let report = sensitivity_sweep(&sub, &m, &params, &default_grid(), seed, default)?;
            fs::create_dir_all(&out)?;
            write(&out.join("sensitivity.csv"), &sensitivity_csv(&report)?)?;
            write(&out.join("sensitivity.md"), &sensitivity_markdown(&report))?;
            match report.default_row().and_then(|r| r.rank) {
                Some(r) => println!("{} of 27 configurations kept; default ranked {r}", report.survivors().count()),
                None => println!("{} of 27 configurations kept; default excluded", report.survivors().count()),
            }
        }
        Command::Scalability {
            scenario,
            sizes,
            repeats,
            seed,
            model,
            out,
        } => {
            let sc = load_scenario(&scenario)?;
            let m = model_for(model.as_deref(), &sc, &params)?;
            let sizes: Vec<usize> = parse_list(&sizes)?;
            let report = scalability_bench(&sc.graph, &m, &sizes, repeats, seed)?;
            fs::create_dir_all(&out)?;
            // wall-clock timings: kept out of the csv outputs on purpose
            write(&out.join("scalability.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
            write(&out.join("scalability.md"), &scalability_markdown(&report))?;
            println!("R^2 = {:.4}", report.fit.r_squared);
        }
        Command::Report { input, out } => {
            let out = out.unwrap_or_else(|| input.clone());
            let open = |name: &str| {
                let p = input.join(name);
                fs::File::open(&p).with_context(|| format!("opening {}", p.display()))
            };
            let results = read_outcomes(open("outcomes.csv")?, open("proxemics.csv")?)?;
            let report = compute_metrics(&results)?;
            let runtime: Option<BTreeMap<String, _>> = match fs::read_to_string(input.join("runtime.json")) {
                Ok(text) => Some(serde_json::from_str(&text).context("parsing runtime.json")?),
                Err(_) => None,
            };
            fs::create_dir_all(&out)?;
            write(&out.join("metrics.csv"), &metrics_csv(&report)?)?;
            write(&out.join("tests.csv"), &tests_csv(&report)?)?;
            write(&out.join("report.md"), &markdown_report(&report, runtime.as_ref()))?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

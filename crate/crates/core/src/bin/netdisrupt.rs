//! Experiment driver: generate instances, sweep budgets, audit plans.

use std::collections::BTreeMap;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand};

use netdisrupt::analysis::audit_plan;
use netdisrupt::dataio::{self, PlanRecord};
use netdisrupt::experiment::{self, parse_config_text, prepare_instance, PreparedInstance, SweepConfig};
use netdisrupt::{
    Adversary, Error, Exec, HeuristicKind, InfluenceMatrix, ObjectiveKind, ObjectiveSpec, Result,
};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (rng chacha8-streams-v1)");

#[derive(Parser)]
#[command(name = "netdisrupt", version = VERSION, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance as `<out>.edges` and `<out>.opinions`
    Gen {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Output prefix; defaults to the generator label
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every heuristic and objective over a budget schedule
    Sweep(SweepArgs),
    /// Re-check stored plans against the structural bounds
    Audit {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Plans written by `sweep --plans-out` or `brute`
        #[arg(long)]
        plans: PathBuf,
        /// Audit CSV path; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact optimum by exhaustive search (small instances only)
    Brute {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "disagreement")]
        objective: ObjectiveKind,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Plan JSONL path; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Objective values at selected budgets, one line per objective
    Table {
        /// Sweep CSV
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        ks: Vec<usize>,
        #[arg(long, default_value = "greedy")]
        heuristic: HeuristicKind,
        /// Selects one instance when the sweep has several seeds
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2)]
        precision: usize,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// Flat `key = value` settings file
    #[arg(long)]
    config: Option<PathBuf>,
    /// er, pa, sbm or dataset
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Edge list; selects the dataset source
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Opinion file for `--edges`
    #[arg(long)]
    opinions_file: Option<PathBuf>,
    /// Read a weight column from `--edges`
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Any other setting, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl InstanceArgs {
    fn settings(&self) -> Result<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(path) => parse_config_text(&dataio::read_text(path)?)?,
            None => BTreeMap::new(),
        };
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{pair}'")))?;
            map.insert(k.trim().replace('-', "_"), v.trim().to_owned());
        }
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_owned(), v);
            }
        };
        put("model", self.model.clone());
        put("n", self.n.map(|n| n.to_string()));
        put("seed", self.seed.map(|s| s.to_string()));
        if self.edges.is_some() {
            put("model", Some("dataset".into()));
        }
        put("edges", self.edges.as_ref().map(|p| p.display().to_string()));
        put("opinions_file", self.opinions_file.as_ref().map(|p| p.display().to_string()));
        if self.weighted {
            put("weighted", Some("true".into()));
        }
        Ok(map)
    }

    fn config(&self) -> Result<SweepConfig> {
        SweepConfig::from_settings(&self.settings()?)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma list or `all`
    #[arg(long)]
    heuristics: Option<String>,
    /// Comma list or `all`
    #[arg(long)]
    objectives: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    k_step: Option<usize>,
    /// Consecutive seeds to run, starting at `--seed`
    #[arg(long)]
    seeds: Option<usize>,
    /// closest or farthest
    #[arg(long)]
    mean_opinion_rule: Option<String>,
    /// CSV path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write each cell's final plan as JSONL
    #[arg(long)]
    plans_out: Option<PathBuf>,
    /// Check every plan prefix against the bounds
    #[arg(long)]
    audit: bool,
    /// Run on one thread
    #[arg(long)]
    sequential: bool,
}

impl SweepArgs {
    fn config(&self) -> Result<SweepConfig> {
        let mut map = self.instance.settings()?;
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_owned(), v);
            }
        };
        put("heuristics", self.heuristics.clone());
        put("objectives", self.objectives.clone());
        put("lambda", self.lambda.map(|v| v.to_string()));
        put("k_max", self.k_max.map(|v| v.to_string()));
        put("k_step", self.k_step.map(|v| v.to_string()));
        put("seeds", self.seeds.map(|v| v.to_string()));
        put("mean_opinion_rule", self.mean_opinion_rule.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("plans_out", self.plans_out.as_ref().map(|p| p.display().to_string()));
        if self.audit {
            put("audit", Some("true".into()));
        }
        if self.sequential {
            put("exec", Some("sequential".into()));
        }
        SweepConfig::from_settings(&map)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(dataio::create_file(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn single_instance(args: &InstanceArgs) -> Result<PreparedInstance> {
    let config = args.config()?;
    let instance = prepare_instance(&config.source, config.seed)?;
    for note in &instance.notes {
        eprintln!("note: {note}");
    }
    Ok(instance)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { instance, out } => {
            let config = instance.config()?;
            let experiment::InstanceSource::Generated { model, n, opinions } = config.source else {
                return Err(Error::Config("gen needs a generator model, not a dataset".into()));
            };
            let generator = netdisrupt::GeneratorConfig {
                model,
                n,
                opinions,
                seed: config.seed,
            };
            let generated = generator.generate()?;
            let prefix = out.unwrap_or_else(|| PathBuf::from(generator.label()));
            let with_ext = |ext: &str| {
                let mut p = prefix.clone().into_os_string();
                p.push(ext);
                PathBuf::from(p)
            };
            let mut edges = BufWriter::new(dataio::create_file(&with_ext(".edges"))?);
            dataio::write_edgelist(&generated.graph, &mut edges)?;
            edges.flush()?;
            let mut ops = BufWriter::new(dataio::create_file(&with_ext(".opinions"))?);
            dataio::write_opinions(&generated.opinions, &mut ops)?;
            ops.flush()?;
            println!(
                "{}: {} nodes, {} edges",
                generator.label(),
                generated.graph.node_count(),
                generated.graph.edge_count()
            );
        }
        Command::Sweep(args) => {
            let config = args.config()?;
            let result = experiment::run_sweep(&config)?;
            for note in &result.notes {
                eprintln!("note: {note}");
            }
            if config.out.is_none() {
                let mut out = output(None)?;
                dataio::write_sweep_csv(&result.rows, &mut out)?;
                out.flush()?;
            }
            if let Some(summary) = &result.audit {
                eprintln!("{summary}");
                if !summary.passed() {
                    return Err(Error::AuditFailed {
                        failures: summary.failures,
                        checks: summary.checks,
                    });
                }
            }
        }
        Command::Audit { instance, plans, out } => {
            let config = instance.config()?;
            let records = dataio::load_plans(&plans)?;
            let mut rows = Vec::new();
            for record in &records {
                let prepared = prepare_instance(&config.source, record.seed)?;
                if prepared.graph_id != record.graph_id {
                    return Err(Error::InconsistentPlan(format!(
                        "plan is for '{}', instance is '{}'",
                        record.graph_id, prepared.graph_id
                    )));
                }
                let inf = InfluenceMatrix::new(&prepared.graph)?;
                let reports = audit_plan(&inf, &prepared.graph, &prepared.opinions, &record.plan)?;
                rows.extend(reports.into_iter().map(|report| experiment::AuditRow {
                    heuristic: record.plan.heuristic,
                    objective: record.objective.kind,
                    seed: record.seed,
                    report,
                }));
            }
            let mut w = output(out.as_deref())?;
            experiment::write_audit_csv(&rows, &mut w)?;
            w.flush()?;
            let failures = rows.iter().filter(|r| !r.report.pass).count();
            eprintln!("audit: {} plans, {} checks, {failures} failures", records.len(), rows.len());
            if failures > 0 {
                return Err(Error::AuditFailed {
                    failures,
                    checks: rows.len(),
                });
            }
        }
        Command::Brute {
            instance,
            k,
            objective,
            lambda,
            out,
        } => {
            let prepared = single_instance(&instance)?;
            let spec = ObjectiveSpec::new(objective, lambda)?;
            let inf = InfluenceMatrix::with_exec(&prepared.graph, Exec::default())?;
            let plan = Adversary::new(&inf, &prepared.graph, spec)?.brute_force(&prepared.opinions, k)?;
            eprintln!("optimum {:.12} with {} takeover(s)", plan.final_value(), plan.len());
            let record = PlanRecord {
                graph_id: prepared.graph_id,
                seed: prepared.seed,
                objective: spec,
                plan,
            };
            let mut w = output(out.as_deref())?;
            dataio::write_plans(std::slice::from_ref(&record), &mut w)?;
            w.flush()?;
        }
        Command::Table {
            input,
            ks,
            heuristic,
            seed,
            precision,
        } => {
            let rows = dataio::load_sweep_csv(&input)?;
            let mut table = experiment::table_report(&rows, heuristic, &ks, seed)?;
            table.precision = precision;
            print!("{table}");
        }
    }
    Ok(())
}

fn emit_error(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            emit_error("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            emit_error(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}

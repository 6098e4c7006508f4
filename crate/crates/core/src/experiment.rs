//! Budget sweeps: every heuristic × objective over a schedule of budgets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::adversary::{Adversary, DisruptionPlan, HeuristicKind, MeanOpinionRule};
use crate::analysis::{audit_equilibria, BoundKind, BoundReport};
use crate::dataio::{self, Dataset, PlanRecord};
use crate::dynamics::{InfluenceMatrix, OpinionVector};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::generators::{GeneratorConfig, GraphModel, OpinionModel};
use crate::graph::WeightedGraph;
use crate::objectives::{ObjectiveKind, ObjectiveSpec, DEFAULT_LAMBDA};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource {
    Generated {
        model: GraphModel,
        n: usize,
        opinions: OpinionModel,
    },
    Dataset {
        name: String,
        edges: PathBuf,
        opinions: PathBuf,
        weighted: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub source: InstanceSource,
    pub heuristics: Vec<HeuristicKind>,
    pub objectives: Vec<ObjectiveKind>,
    pub lambda: f64,
    /// Largest budget; defaults to `n / 2`.
    pub k_max: Option<usize>,
    pub k_step: usize,
    pub seed: u64,
    /// Number of consecutive seeds starting at `seed`.
    pub seeds: usize,
    pub audit: bool,
    pub mean_opinion_rule: MeanOpinionRule,
    pub out: Option<PathBuf>,
    pub plans_out: Option<PathBuf>,
    pub exec: Exec,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            source: InstanceSource::Generated {
                model: GraphModel::ErdosRenyi { p: 0.2 },
                n: 200,
                opinions: OpinionModel::UniformUnit,
            },
            heuristics: HeuristicKind::SWEEP.to_vec(),
            objectives: ObjectiveKind::ALL.to_vec(),
            lambda: DEFAULT_LAMBDA,
            k_max: None,
            k_step: 1,
            seed: 0,
            seeds: 1,
            audit: false,
            mean_opinion_rule: MeanOpinionRule::Closest,
            out: None,
            plans_out: None,
            exec: Exec::default(),
        }
    }
}

/// Keys accepted in sweep config files (`key = value`, `#` comments).
pub const CONFIG_KEYS: &[&str] = &[
    "model",
    "n",
    "p",
    "m_attach",
    "p11",
    "p22",
    "p12",
    "opinions",
    "beta",
    "dataset_name",
    "edges",
    "opinions_file",
    "weighted",
    "heuristics",
    "objectives",
    "lambda",
    "k_max",
    "k_step",
    "seed",
    "seeds",
    "audit",
    "mean_opinion_rule",
    "out",
    "plans_out",
    "exec",
];

/// Parses `key = value` lines. Later duplicates override earlier ones.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        map.insert(key.trim().replace('-', "_"), value.trim().to_owned());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
}

fn edges_path(value: Option<&str>) -> Result<&str> {
    value.ok_or_else(|| Error::Config("dataset source needs 'edges'".into()))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean '{value}' for '{key}'"))),
    }
}

fn parse_list<T: std::str::FromStr<Err = Error> + Clone>(value: &str, all: &[T]) -> Result<Vec<T>> {
    if value.trim().eq_ignore_ascii_case("all") {
        return Ok(all.to_vec());
    }
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

impl SweepConfig {
    /// Builds a config from flat key/value settings over the defaults.
    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(key) = settings.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        let get = |key: &str| settings.get(key).map(String::as_str);
        let num = |key: &str, default: f64| -> Result<f64> {
            get(key).map_or(Ok(default), |v| parse_value(key, v))
        };
        let mut config = SweepConfig::default();

        let model = get("model").unwrap_or("er").to_ascii_lowercase();
        let n: usize = get("n").map_or(Ok(200), |v| parse_value("n", v))?;
        let beta = match get("beta") {
            None => [5.0, 2.0, 2.0, 5.0],
            Some(v) => {
                let parts: Vec<f64> = v
                    .split(',')
                    .map(|p| parse_value("beta", p.trim()))
                    .collect::<Result<_>>()?;
                parts
                    .try_into()
                    .map_err(|_| Error::Config("beta needs four values a1,b1,a2,b2".into()))?
            }
        };
        let default_opinions = if model == "sbm" { "beta" } else { "uniform" };
        let opinions = match get("opinions").unwrap_or(default_opinions) {
            "uniform" => OpinionModel::UniformUnit,
            "beta" => OpinionModel::BetaPerCommunity {
                alpha1: beta[0],
                beta1: beta[1],
                alpha2: beta[2],
                beta2: beta[3],
            },
            other => return Err(Error::Config(format!("unknown opinion model '{other}'"))),
        };
        config.source = match model.as_str() {
            "er" | "erdos-renyi" => InstanceSource::Generated {
                model: GraphModel::ErdosRenyi { p: num("p", 0.2)? },
                n,
                opinions,
            },
            "pa" | "preferential-attachment" => InstanceSource::Generated {
                model: GraphModel::PreferentialAttachment {
                    m_attach: get("m_attach").map_or(Ok(5), |v| parse_value("m_attach", v))?,
                },
                n,
                opinions,
            },
            "sbm" | "stochastic-block" => InstanceSource::Generated {
                model: GraphModel::StochasticBlock {
                    p11: num("p11", 0.7)?,
                    p22: num("p22", 0.7)?,
                    p12: num("p12", 0.1)?,
                },
                n,
                opinions,
            },
            "dataset" => InstanceSource::Dataset {
                name: match get("dataset_name") {
                    Some(name) => name.to_owned(),
                    None => PathBuf::from(edges_path(get("edges"))?)
                        .file_stem()
                        .map_or("dataset".into(), |s| s.to_string_lossy().into_owned()),
                },
                edges: edges_path(get("edges"))?.into(),
                opinions: get("opinions_file")
                    .ok_or_else(|| Error::Config("dataset source needs 'opinions_file'".into()))?
                    .into(),
                weighted: get("weighted").map_or(Ok(false), |v| parse_bool("weighted", v))?,
            },
            other => return Err(Error::Config(format!("unknown model '{other}'"))),
        };

        if let Some(v) = get("heuristics") {
            config.heuristics = parse_list(v, &HeuristicKind::SWEEP)?;
        }
        if let Some(v) = get("objectives") {
            config.objectives = parse_list(v, &ObjectiveKind::ALL)?;
        }
        config.lambda = num("lambda", DEFAULT_LAMBDA)?;
        config.k_max = get("k_max").map(|v| parse_value("k_max", v)).transpose()?;
        config.k_step = get("k_step").map_or(Ok(1), |v| parse_value("k_step", v))?;
        config.seed = get("seed").map_or(Ok(0), |v| parse_value("seed", v))?;
        config.seeds = get("seeds").map_or(Ok(1), |v| parse_value("seeds", v))?;
        config.audit = get("audit").map_or(Ok(false), |v| parse_bool("audit", v))?;
        if let Some(v) = get("mean_opinion_rule") {
            config.mean_opinion_rule = v.parse()?;
        }
        config.out = get("out").map(PathBuf::from);
        config.plans_out = get("plans_out").map(PathBuf::from);
        if let Some(v) = get("exec") {
            config.exec = match v {
                "parallel" => Exec::Parallel,
                "sequential" => Exec::Sequential,
                other => return Err(Error::Config(format!("unknown exec mode '{other}'"))),
            };
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.heuristics.is_empty() {
            return Err(Error::Config("no heuristics selected".into()));
        }
        if self.objectives.is_empty() {
            return Err(Error::Config("no objectives selected".into()));
        }
        if self.k_step == 0 {
            return Err(Error::Config("k_step must be at least 1".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be at least 1".into()));
        }
        ObjectiveSpec::new(ObjectiveKind::WeightedSum, self.lambda)?;
        Ok(())
    }

    /// Budgets `0, step, 2·step, …` up to `k_max` (default `n/2`).
    pub fn budgets(&self, n: usize) -> Result<Vec<usize>> {
        let k_max = self.k_max.unwrap_or(n / 2);
        if k_max > n {
            return Err(Error::Budget { k: k_max, n });
        }
        Ok((0..=k_max).step_by(self.k_step).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub heuristic: HeuristicKind,
    pub objective: ObjectiveKind,
    pub lambda: f64,
    pub k: usize,
    pub value: f64,
    pub seed: u64,
    pub graph_id: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow {
    pub heuristic: HeuristicKind,
    pub objective: ObjectiveKind,
    pub seed: u64,
    pub report: BoundReport,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditSummary {
    pub checks: usize,
    pub failures: usize,
    /// Smallest slack per check over plans with at least one takeover.
    pub min_slack: BTreeMap<BoundKind, f64>,
}

impl AuditSummary {
    fn from_rows(rows: &[AuditRow]) -> Self {
        let mut summary = AuditSummary::default();
        for row in rows {
            summary.checks += 1;
            if !row.report.pass {
                summary.failures += 1;
            }
            if row.report.k == 0 {
                continue;
            }
            let slot = summary.min_slack.entry(row.report.kind).or_insert(f64::INFINITY);
            *slot = slot.min(row.report.slack);
        }
        summary
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for AuditSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "audit: {} checks, {} failures", self.checks, self.failures)?;
        for (kind, slack) in &self.min_slack {
            write!(f, "; min slack {} = {slack:.6}", kind.name())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub audit_rows: Vec<AuditRow>,
    pub audit: Option<AuditSummary>,
    pub plans: Vec<PlanRecord>,
    pub notes: Vec<String>,
}

/// A graph ready for a sweep.
pub struct PreparedInstance {
    pub graph_id: String,
    pub seed: u64,
    pub graph: WeightedGraph,
    pub opinions: OpinionVector,
    pub notes: Vec<String>,
}

/// Generates or loads the instance for `seed`, dropping isolated nodes.
pub fn prepare_instance(source: &InstanceSource, seed: u64) -> Result<PreparedInstance> {
    match source {
        InstanceSource::Generated { model, n, opinions } => {
            let config = GeneratorConfig {
                model: *model,
                n: *n,
                opinions: *opinions,
                seed,
            };
            let instance = config.generate()?;
            let mut notes = Vec::new();
            let isolated = instance.graph.isolated_nodes().len();
            let (graph, opinions) = if isolated > 0 {
                notes.push(format!("{}: removed {isolated} isolated node(s)", config.label()));
                let (g, s, _) = instance.graph.remove_isolated(&instance.opinions)?;
                (g, s)
            } else {
                (instance.graph, instance.opinions)
            };
            Ok(PreparedInstance {
                graph_id: config.label(),
                seed,
                graph,
                opinions,
                notes,
            })
        }
        InstanceSource::Dataset {
            name,
            edges,
            opinions,
            weighted,
        } => {
            let data = Dataset::load(name, edges, opinions, *weighted)?.without_isolated()?;
            Ok(PreparedInstance {
                graph_id: data.name,
                seed,
                graph: data.graph,
                opinions: data.opinions,
                notes: data.notes,
            })
        }
    }
}

struct CellOutput {
    rows: Vec<SweepRow>,
    audit_rows: Vec<AuditRow>,
    plan: PlanRecord,
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    config: &SweepConfig,
    instance: &PreparedInstance,
    inf: &InfluenceMatrix,
    budgets: &[usize],
    heuristic: HeuristicKind,
    objective: ObjectiveKind,
) -> Result<CellOutput> {
    let spec = ObjectiveSpec::new(objective, config.lambda)?;
    let adversary = Adversary::new(inf, &instance.graph, spec)?
        .with_mean_opinion_rule(config.mean_opinion_rule);
    let s = &instance.opinions;
    let k_max = *budgets.last().expect("budget schedule starts at 0");
    let mut rng = rng::cell_stream(instance.seed, heuristic as usize, objective as usize);

    // exhaustive search is not prefix-consistent; solve each budget afresh
    let per_budget: Vec<DisruptionPlan> = if heuristic == HeuristicKind::BruteForce {
        budgets
            .iter()
            .map(|&k| adversary.brute_force(s, k))
            .collect::<Result<_>>()?
    } else {
        let plan = adversary.run(heuristic, s, k_max, &mut rng)?;
        budgets.iter().map(|&k| plan.prefix(k)).collect()
    };

    let row = |k: usize, value: f64| SweepRow {
        heuristic,
        objective,
        lambda: config.lambda,
        k,
        value,
        seed: instance.seed,
        graph_id: instance.graph_id.clone(),
    };
    let rows = budgets
        .iter()
        .zip(&per_budget)
        .map(|(&k, plan)| row(k, plan.final_value()))
        .collect();

    let mut audit_rows = Vec::new();
    if config.audit {
        let z = inf.equilibrium(s)?;
        for plan in &per_budget {
            let z_new = inf.equilibrium(&plan.modified)?;
            let reports = audit_equilibria(
                &instance.graph,
                s,
                &plan.modified,
                &z,
                &z_new,
                plan.len(),
                plan,
            )?;
            audit_rows.extend(reports.into_iter().map(|report| AuditRow {
                heuristic,
                objective,
                seed: instance.seed,
                report,
            }));
        }
    }

    Ok(CellOutput {
        rows,
        audit_rows,
        plan: PlanRecord {
            graph_id: instance.graph_id.clone(),
            seed: instance.seed,
            objective: spec,
            plan: per_budget.last().expect("non-empty schedule").clone(),
        },
    })
}

/// Runs the full grid and, when `config.out` is set, writes the CSV (plus
/// `<out>.audit.csv` when auditing and `plans_out` when set).
///
/// Rows come out in seed, heuristic, objective, budget order regardless of
/// how cells were scheduled.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut result = SweepResult::default();
    let seeds: Vec<u64> = (0..config.seeds as u64).map(|i| config.seed + i).collect();
    let instances = config
        .exec
        .map_slice(&seeds, |&seed| prepare_instance(&config.source, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut prepared = Vec::with_capacity(instances.len());
    for instance in &instances {
        result.notes.extend(instance.notes.iter().cloned());
        let budgets = config.budgets(instance.graph.node_count())?;
        let inf = InfluenceMatrix::with_exec(&instance.graph, config.exec)?;
        prepared.push((instance, inf, budgets));
    }
    let cells: Vec<(usize, HeuristicKind, ObjectiveKind)> = (0..prepared.len())
        .flat_map(|i| {
            config
                .heuristics
                .iter()
                .flat_map(move |&h| config.objectives.iter().map(move |&o| (i, h, o)))
        })
        .collect();
    let outputs = config.exec.map_slice(&cells, |&(i, h, o)| {
        let (instance, inf, budgets) = &prepared[i];
        run_cell(config, instance, inf, budgets, h, o)
    });
    for output in outputs {
        let output = output?;
        result.rows.extend(output.rows);
        result.audit_rows.extend(output.audit_rows);
        result.plans.push(output.plan);
    }
    if config.audit {
        result.audit = Some(AuditSummary::from_rows(&result.audit_rows));
    }
    if let Some(out) = &config.out {
        dataio::save_sweep_csv(&result.rows, out)?;
        if config.audit {
            let mut path = out.clone().into_os_string();
            path.push(".audit.csv");
            write_audit_csv(&result.audit_rows, dataio::create_file(&PathBuf::from(path))?)?;
        }
    }
    if let Some(path) = &config.plans_out {
        dataio::save_plans(&result.plans, path)?;
    }
    Ok(result)
}

pub fn write_audit_csv<W: std::io::Write>(rows: &[AuditRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record([
        "heuristic", "objective", "seed", "check", "k", "before", "after", "bound", "slack", "pass",
    ])?;
    for row in rows {
        let r = &row.report;
        w.write_record([
            row.heuristic.name(),
            row.objective.name(),
            &row.seed.to_string(),
            r.kind.name(),
            &r.k.to_string(),
            &dataio::format_float(r.before),
            &dataio::format_float(r.after),
            &dataio::format_float(r.bound),
            &dataio::format_float(r.slack),
            if r.pass { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Objective values by budget, one line per objective.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub heuristic: HeuristicKind,
    pub budgets: Vec<usize>,
    pub lines: Vec<(ObjectiveKind, Vec<f64>)>,
    pub precision: usize,
}

fn objective_title(kind: ObjectiveKind) -> &'static str {
    match kind {
        ObjectiveKind::Disagreement => "Disagreement",
        ObjectiveKind::Polarization => "Polarization",
        ObjectiveKind::WeightedSum => "Weighted Sum",
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut header = vec!["Objective".to_owned(), "Original".to_owned()];
        header.extend(self.budgets.iter().map(|k| format!("k = {k}")));
        let body: Vec<Vec<String>> = self
            .lines
            .iter()
            .map(|(kind, values)| {
                std::iter::once(objective_title(*kind).to_owned())
                    .chain(values.iter().map(|v| format!("{v:.prec$}", prec = self.precision)))
                    .collect()
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                std::iter::once(&header)
                    .chain(&body)
                    .map(|r| r[c].len())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |f: &mut fmt::Formatter<'_>, cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            writeln!(f, "| {} |", parts.join(" | "))
        };
        line(f, &header)?;
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        writeln!(f, "|-{}-|", rule.join("-|-"))?;
        for r in &body {
            line(f, r)?;
        }
        Ok(())
    }
}

/// Table of `heuristic`'s values at budget 0 ("Original") and at each of
/// `budgets`. With several seeds or graphs in `rows`, `seed` must pick one.
pub fn table_report(
    rows: &[SweepRow],
    heuristic: HeuristicKind,
    budgets: &[usize],
    seed: Option<u64>,
) -> Result<Table> {
    let selected: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.heuristic == heuristic && seed.is_none_or(|s| r.seed == s))
        .collect();
    let mut instances: Vec<(u64, &str)> = selected.iter().map(|r| (r.seed, r.graph_id.as_str())).collect();
    instances.sort_unstable();
    instances.dedup();
    if instances.len() > 1 {
        return Err(Error::Config(format!(
            "{} instances in the sweep; choose one with a seed",
            instances.len()
        )));
    }
    let mut lines = Vec::new();
    for kind in ObjectiveKind::ALL {
        let of_kind: Vec<&&SweepRow> = selected.iter().filter(|r| r.objective == kind).collect();
        if of_kind.is_empty() {
            continue;
        }
        let lookup = |k: usize| {
            of_kind
                .iter()
                .find(|r| r.k == k)
                .map(|r| r.value)
                .ok_or(Error::MissingBudget(k))
        };
        let values = std::iter::once(0)
            .chain(budgets.iter().copied())
            .map(lookup)
            .collect::<Result<Vec<f64>>>()?;
        lines.push((kind, values));
    }
    if lines.is_empty() {
        return Err(Error::Config(format!("no rows for heuristic '{heuristic}'")));
    }
    Ok(Table {
        heuristic,
        budgets: budgets.to_vec(),
        lines,
        precision: 2,
    })
}

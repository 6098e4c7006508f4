//! File formats.
//!
//! * Edge list: one edge per line, `u v [w]`, whitespace separated. Ids are
//!   arbitrary tokens and are remapped to dense indices in order of first
//!   appearance. Without a weight column every edge weighs 1.0.
//! * Opinions: one `id value` pair per line, every node exactly once.
//! * Sweep results: CSV with header
//!   `heuristic,objective,lambda,k,value,seed,graph_id`, floats written with
//!   17 significant digits.
//! * Plans: JSON Lines, one [`PlanRecord`] per line.
//!
//! `#` starts a comment in edge and opinion files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversary::{DisruptionPlan, HeuristicKind};
use crate::dynamics::OpinionVector;
use crate::error::{Error, Result};
use crate::experiment::SweepRow;
use crate::graph::WeightedGraph;
use crate::objectives::{ObjectiveKind, ObjectiveSpec};

/// External id ↔ dense index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMap {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dense ids `0..n` named by their decimal value.
    pub fn identity(n: usize) -> Self {
        let mut map = IdMap::new();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }

    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Map restricted to `kept` old indices, renumbered in that order.
    pub fn restrict(&self, kept: &[usize]) -> IdMap {
        let mut map = IdMap::new();
        for &old in kept {
            map.intern(&self.names[old]);
        }
        map
    }
}

/// A real network with innate opinions.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub graph: WeightedGraph,
    pub opinions: OpinionVector,
    pub ids: IdMap,
    pub notes: Vec<String>,
}

impl Dataset {
    /// Loads an edge list and an opinion file. Nodes that only appear in
    /// the opinion file become isolated nodes of the graph.
    pub fn load(name: &str, edges: &Path, opinions: &Path, weighted: bool) -> Result<Dataset> {
        let (edge_list, mut ids) = parse_edgelist(&read_text(edges)?, edges, weighted)?;
        let pairs = parse_opinion_pairs(&read_text(opinions)?, opinions)?;
        let from_edges = ids.len();
        for (id, _, _) in &pairs {
            ids.intern(id);
        }
        let graph = WeightedGraph::from_edges(ids.len(), edge_list)?;
        let opinions = align_opinions(&pairs, &ids)?;
        let mut notes = vec![format!(
            "{} nodes ({} from edges), {} edges",
            ids.len(),
            from_edges,
            graph.edge_count()
        )];
        if !weighted {
            notes.push("no weight column; every edge weighs 1.0".into());
        }
        Ok(Dataset {
            name: name.to_owned(),
            graph,
            opinions,
            ids,
            notes,
        })
    }

    /// Drops isolated nodes; they can be moved freely without affecting
    /// anyone else.
    pub fn without_isolated(self) -> Result<Dataset> {
        let before = self.graph.node_count();
        let (graph, opinions, kept) = self.graph.remove_isolated(&self.opinions)?;
        let mut notes = self.notes;
        if kept.len() < before {
            notes.push(format!("removed {} isolated node(s)", before - kept.len()));
        }
        Ok(Dataset {
            name: self.name,
            ids: self.ids.restrict(&kept),
            graph,
            opinions,
            notes,
        })
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Edges as `(u, v, weight)` triples.
pub type EdgeList = Vec<(usize, usize, f64)>;

/// Parses edge-list text. `source` only labels error messages.
pub fn parse_edgelist(
    text: &str,
    source: &Path,
    weighted: bool,
) -> Result<(EdgeList, IdMap)> {
    let mut ids = IdMap::new();
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let weight = match (tokens.len(), weighted) {
            (2, false) => 1.0,
            (3, true) => tokens[2].parse::<f64>().map_err(|e| {
                parse_error(source, lineno + 1, format!("bad weight '{}': {e}", tokens[2]))
            })?,
            (3, false) => {
                return Err(parse_error(
                    source,
                    lineno + 1,
                    "weight column found but file was loaded as unweighted",
                ))
            }
            (count, _) => {
                return Err(parse_error(
                    source,
                    lineno + 1,
                    format!(
                        "expected {} fields, found {count}",
                        if weighted { "3" } else { "2" }
                    ),
                ))
            }
        };
        if tokens[0] == tokens[1] {
            return Err(parse_error(source, lineno + 1, format!("self-loop on '{}'", tokens[0])));
        }
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(parse_error(
                source,
                lineno + 1,
                format!("weight {weight} outside (0, 1]"),
            ));
        }
        let u = ids.intern(tokens[0]);
        let v = ids.intern(tokens[1]);
        edges.push((u, v, weight));
    }
    Ok((edges, ids))
}

pub fn load_edgelist(path: &Path, weighted: bool) -> Result<(WeightedGraph, IdMap)> {
    let (edges, ids) = parse_edgelist(&read_text(path)?, path, weighted)?;
    Ok((WeightedGraph::from_edges(ids.len(), edges)?, ids))
}

fn parse_opinion_pairs(text: &str, source: &Path) -> Result<Vec<(String, f64, usize)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_error(
                source,
                lineno + 1,
                format!("expected 'id value', found {} fields", tokens.len()),
            ));
        }
        let value: f64 = tokens[1]
            .parse()
            .map_err(|e| parse_error(source, lineno + 1, format!("bad opinion '{}': {e}", tokens[1])))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(parse_error(
                source,
                lineno + 1,
                format!("opinion {value} outside [0, 1]"),
            ));
        }
        pairs.push((tokens[0].to_owned(), value, lineno + 1));
    }
    Ok(pairs)
}

fn align_opinions(pairs: &[(String, f64, usize)], ids: &IdMap) -> Result<OpinionVector> {
    let mut values = vec![None; ids.len()];
    for (id, value, _) in pairs {
        let i = ids.get(id).ok_or_else(|| Error::UnknownNode(id.clone()))?;
        if values[i].replace(*value).is_some() {
            return Err(Error::DuplicateOpinion(id.clone()));
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::MissingOpinion(ids.name(i).to_owned())))
        .collect::<Result<Vec<f64>>>()?;
    OpinionVector::new(values)
}

/// Parses opinion text against an existing id map.
pub fn parse_opinions(text: &str, source: &Path, ids: &IdMap) -> Result<OpinionVector> {
    align_opinions(&parse_opinion_pairs(text, source)?, ids)
}

pub fn load_opinions(path: &Path, ids: &IdMap) -> Result<OpinionVector> {
    parse_opinions(&read_text(path)?, path, ids)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })
}

pub fn open_file(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })
}

pub fn create_file(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })
}

/// 17 significant digits; parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_edgelist<W: Write>(g: &WeightedGraph, mut out: W) -> Result<()> {
    for e in g.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, format_float(e.weight))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_opinions<W: Write>(s: &OpinionVector, mut out: W) -> Result<()> {
    for (i, v) in s.iter().enumerate() {
        writeln!(out, "{i} {}", format_float(*v))?;
    }
    out.flush()?;
    Ok(())
}

pub const SWEEP_HEADER: [&str; 7] = ["heuristic", "objective", "lambda", "k", "value", "seed", "graph_id"];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        w.write_record([
            row.heuristic.name(),
            row.objective.name(),
            &format_float(row.lambda),
            &row.k.to_string(),
            &format_float(row.value),
            &row.seed.to_string(),
            &row.graph_id,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != SWEEP_HEADER {
        return Err(Error::Config(format!(
            "unexpected sweep CSV header {header:?}, expected {SWEEP_HEADER:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let bad = |field: &str| Error::Parse {
            path: PathBuf::from("<sweep csv>"),
            line: i + 2,
            message: format!("bad {field}"),
        };
        rows.push(SweepRow {
            heuristic: record[0].parse::<HeuristicKind>()?,
            objective: record[1].parse::<ObjectiveKind>()?,
            lambda: record[2].parse().map_err(|_| bad("lambda"))?,
            k: record[3].parse().map_err(|_| bad("k"))?,
            value: record[4].parse().map_err(|_| bad("value"))?,
            seed: record[5].parse().map_err(|_| bad("seed"))?,
            graph_id: record[6].to_owned(),
        });
    }
    Ok(rows)
}

pub fn save_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_sweep_csv(rows, BufWriter::new(create_file(path)?))
}

pub fn load_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    read_sweep_csv(BufReader::new(open_file(path)?))
}

/// A plan plus the context needed to re-check it later.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub graph_id: String,
    pub seed: u64,
    pub objective: ObjectiveSpec,
    pub plan: DisruptionPlan,
}

pub fn write_plans<W: Write>(records: &[PlanRecord], mut out: W) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_plans<R: BufRead>(input: R) -> Result<Vec<PlanRecord>> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

pub fn save_plans(records: &[PlanRecord], path: &Path) -> Result<()> {
    write_plans(records, BufWriter::new(create_file(path)?))
}

pub fn load_plans(path: &Path) -> Result<Vec<PlanRecord>> {
    read_plans(BufReader::new(open_file(path)?))
}

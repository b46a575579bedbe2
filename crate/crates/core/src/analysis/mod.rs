//! Post-hoc measurements of evolved brains.

mod dot;
mod transitions;

pub use dot::{export_dot, DotMode};
pub use transitions::{transition_matrix, Successor, TransitionMatrix};

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng;

use crate::brain::{Brain, ClampMode};
use crate::decoder::{decode_brain, DecodeConfig};
use crate::error::{Error, Result};
use crate::evolution::mean_fitness;
use crate::genome::{Genome, Site};
use crate::rng::{mix, stream};
use crate::scalar::Scalar;
use crate::tasks::Task;

/// Directed node pairs `(a, b)` such that some gate reads `a` and writes `b`.
pub fn connections<S: Scalar>(brain: &Brain<S>) -> BTreeSet<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    for g in brain.blueprints() {
        for a in g.read_nodes() {
            for &b in &g.outputs {
                pairs.insert((a, b));
            }
        }
    }
    pairs
}

/// Nodes some gate reads or writes.
pub fn active_nodes<S: Scalar>(brain: &Brain<S>) -> BTreeSet<usize> {
    brain
        .blueprints()
        .flat_map(|g| g.read_nodes().into_iter().chain(g.outputs.iter().copied()))
        .collect()
}

/// Unique connections over active nodes squared, self-loops included. A
/// gate-less brain has density 0.
pub fn density<S: Scalar>(brain: &Brain<S>) -> f64 {
    let n = active_nodes(brain).len();
    if n == 0 {
        return 0.0;
    }
    connections(brain).len() as f64 / (n * n) as f64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrainStats {
    pub n_gates: usize,
    pub n_active_nodes: usize,
    pub n_unique_connections: usize,
    pub genome_length: usize,
    /// Longest finite shortest path; self-loops do not count.
    pub graph_diameter: usize,
}

pub const BRAIN_STATS_HEADER: &str =
    "n_gates,n_active_nodes,n_unique_connections,genome_length,graph_diameter";

impl BrainStats {
    pub fn to_csv(&self) -> String {
        format!(
            "{BRAIN_STATS_HEADER}\n{},{},{},{},{}\n",
            self.n_gates,
            self.n_active_nodes,
            self.n_unique_connections,
            self.genome_length,
            self.graph_diameter
        )
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(BRAIN_STATS_HEADER) {
            return Err(Error::parse(0, "missing stats header"));
        }
        let row = lines
            .next()
            .ok_or_else(|| Error::parse(text.len(), "missing stats row"))?;
        let v: Vec<usize> = row
            .split(',')
            .map(|c| {
                c.parse().map_err(|_| {
                    Error::parse(BRAIN_STATS_HEADER.len() + 1, format!("bad cell `{c}`"))
                })
            })
            .collect::<Result<_>>()?;
        let [n_gates, n_active_nodes, n_unique_connections, genome_length, graph_diameter] = v[..]
        else {
            return Err(Error::parse(
                BRAIN_STATS_HEADER.len() + 1,
                "expected 5 cells",
            ));
        };
        Ok(BrainStats {
            n_gates,
            n_active_nodes,
            n_unique_connections,
            genome_length,
            graph_diameter,
        })
    }
}

fn diameter(n_nodes: usize, pairs: &BTreeSet<(usize, usize)>) -> usize {
    let mut adj = vec![Vec::new(); n_nodes];
    for &(a, b) in pairs {
        if a != b {
            adj[a].push(b);
        }
    }
    let mut best = 0;
    let mut dist = vec![usize::MAX; n_nodes];
    let mut queue = VecDeque::new();
    for src in 0..n_nodes {
        if adj[src].is_empty() {
            continue;
        }
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            best = best.max(dist[u]);
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    best
}

pub fn brain_stats<S: Scalar>(brain: &Brain<S>, genome: &Genome) -> BrainStats {
    let pairs = connections(brain);
    BrainStats {
        n_gates: brain.gates().len(),
        n_active_nodes: active_nodes(brain).len(),
        n_unique_connections: pairs.len(),
        genome_length: genome.len(),
        graph_diameter: diameter(brain.n_nodes(), &pairs),
    }
}

/// Scores shared by the knockout analyses: one lifetime per seed in
/// `mix(seed, r)`, the same seeds for wild type and variant.
fn score<S: Scalar>(brain: &Brain<S>, task: &dyn Task, seed: u64, repeats: usize) -> Result<f64> {
    let mut b = brain.clone();
    mean_fitness(
        &mut b,
        task,
        (0..repeats.max(1) as u64).map(|r| mix(&[seed, r])),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnockoutResult {
    pub wild_type: f64,
    pub knockout: f64,
}

/// Task score with and without gate `index`.
pub fn knockout_gate<S: Scalar>(
    brain: &Brain<S>,
    index: usize,
    task: &dyn Task,
    seed: u64,
    repeats: usize,
) -> Result<KnockoutResult> {
    let ko = brain.without_gate(index)?;
    Ok(KnockoutResult {
        wild_type: score(brain, task, seed, repeats)?,
        knockout: score(&ko, task, seed, repeats)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClampResult {
    pub wild_type: f64,
    pub clamped: f64,
    pub mode: ClampMode,
    /// Set when the clamp overrides percepts.
    pub warning: Option<String>,
}

pub fn clamp_node<S: Scalar>(
    brain: &Brain<S>,
    node: usize,
    mode: ClampMode,
    task: &dyn Task,
    seed: u64,
    repeats: usize,
) -> Result<ClampResult> {
    let mut clamped = brain.clone();
    clamped.clamp(node, mode)?;
    let warning = brain
        .input_nodes()
        .contains(&node)
        .then(|| format!("node {node} is an input node; clamping overrides the percept"));
    Ok(ClampResult {
        wild_type: score(brain, task, seed, repeats)?,
        clamped: score(&clamped, task, seed, repeats)?,
        mode,
        warning,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustnessRow {
    pub m: usize,
    pub mean: f64,
    /// Population standard deviation over the samples.
    pub std: f64,
    pub samples: usize,
}

/// Copy of `genome` with exactly `m` distinct sites each changed to a
/// different value.
pub fn mutate_exactly<R: Rng + ?Sized>(genome: &Genome, m: usize, rng: &mut R) -> Result<Genome> {
    if m > genome.len() {
        return Err(Error::invalid(format!(
            "{m} mutations exceed genome length {}",
            genome.len()
        )));
    }
    let max = genome.alphabet_max();
    let mut g = genome.clone();
    for i in sample(rng, genome.len(), m) {
        let old = genome.sites()[i];
        let v: Site = rng.gen_range(0..max);
        g.set(i, if v >= old { v + 1 } else { v });
    }
    Ok(g)
}

/// Mean and spread of fitness over `samples` mutants for each m in `0..=max_m`.
/// All mutants are scored on the same lifetimes as the wild type.
pub fn robustness_curve<S: Scalar>(
    genome: &Genome,
    cfg: &DecodeConfig,
    task: &dyn Task,
    max_m: usize,
    samples: usize,
    seed: u64,
    repeats: usize,
) -> Result<Vec<RobustnessRow>> {
    if samples == 0 {
        return Err(Error::invalid("robustness needs at least one sample"));
    }
    let mut rows = Vec::with_capacity(max_m + 1);
    for m in 0..=max_m {
        let mut rng = stream(seed, &[0x726f_6275, m as u64]);
        let scores = (0..samples)
            .map(|_| {
                let g = mutate_exactly(genome, m, &mut rng)?;
                score(&decode_brain::<S>(&g, cfg)?, task, seed, repeats)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean = scores.iter().sum::<f64>() / samples as f64;
        let var = scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / samples as f64;
        rows.push(RobustnessRow {
            m,
            mean,
            std: var.sqrt(),
            samples,
        });
    }
    Ok(rows)
}

pub const ROBUSTNESS_HEADER: &str = "m,mean,std,K";

pub fn robustness_csv(rows: &[RobustnessRow]) -> String {
    let mut s = format!("{ROBUSTNESS_HEADER}\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", r.m, r.mean, r.std, r.samples).unwrap();
    }
    s
}

pub fn parse_robustness_csv(text: &str) -> Result<Vec<RobustnessRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(ROBUSTNESS_HEADER) {
        return Err(Error::parse(0, "missing robustness header"));
    }
    lines
        .map(|line| {
            let bad = || Error::parse(0, format!("bad robustness row `{line}`"));
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 4 {
                return Err(bad());
            }
            Ok(RobustnessRow {
                m: c[0].parse().map_err(|_| bad())?,
                mean: c[1].parse().map_err(|_| bad())?,
                std: c[2].parse().map_err(|_| bad())?,
                samples: c[3].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

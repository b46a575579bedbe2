//! Flat `key = value` run configuration.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use markov_brain::decoder::DecodeConfig;
use markov_brain::evolution::{EvolutionConfig, Selection};
use markov_brain::gates::GateKind;
use markov_brain::tasks::{task_from_name, Task};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub evolution: EvolutionConfig,
    pub precision: Precision,
    pub out: Option<PathBuf>,
    seed_set: bool,
}

/// Every accepted key, in the order `to_text` writes them.
pub const KEYS: &[&str] = &[
    "seed",
    "out",
    "precision",
    "population_size",
    "generations",
    "selection",
    "elitism",
    "repeats",
    "initial_length",
    "seeded_codons",
    "reseed_each_generation",
    "snapshot_every",
    "task",
    "lifetime",
    "ticks_per_percept",
    "n_nodes",
    "min_in",
    "max_in",
    "min_out",
    "max_out",
    "gates",
    "zero_outputs_before_update",
    "feedback_floor",
    "point_rate",
    "segment_delete_prob",
    "segment_copy_prob",
    "segment_min",
    "segment_max",
    "genome_min",
    "genome_max",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value `{value}` for key `{key}`")))
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            evolution: EvolutionConfig::default(),
            precision: Precision::F64,
            out: None,
            seed_set: false,
        }
    }
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.evolution.seed
    }

    pub fn seed_is_set(&self) -> bool {
        self.seed_set
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let e = &mut self.evolution;
        let value = value.trim();
        match key {
            "seed" => {
                e.seed = parse(key, value)?;
                self.seed_set = true;
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "precision" => {
                self.precision = match value {
                    "f32" => Precision::F32,
                    "f64" => Precision::F64,
                    _ => {
                        return Err(CliError::Usage(format!(
                            "bad value `{value}` for key `precision`"
                        )))
                    }
                }
            }
            "population_size" => e.population_size = parse(key, value)?,
            "generations" => e.generations = parse(key, value)?,
            "selection" => e.selection = parse::<Selection>(key, value)?,
            "elitism" => e.elitism = parse(key, value)?,
            "repeats" => e.repeats = parse(key, value)?,
            "initial_length" => e.initial_length = parse(key, value)?,
            "seeded_codons" => e.seeded_codons = parse(key, value)?,
            "reseed_each_generation" => e.reseed_each_generation = parse(key, value)?,
            "snapshot_every" => e.snapshot_every = parse(key, value)?,
            "task" => e.task = value.to_string(),
            "lifetime" => e.lifetime = parse(key, value)?,
            "ticks_per_percept" => e.ticks_per_percept = parse(key, value)?,
            "n_nodes" => e.decode.n_nodes = parse(key, value)?,
            "min_in" => e.decode.min_in = parse(key, value)?,
            "max_in" => e.decode.max_in = parse(key, value)?,
            "min_out" => e.decode.min_out = parse(key, value)?,
            "max_out" => e.decode.max_out = parse(key, value)?,
            "gates" => {
                e.decode.enabled = value
                    .split(',')
                    .map(|k| parse::<GateKind>(key, k.trim()))
                    .collect::<Result<BTreeSet<_>, _>>()?
            }
            "zero_outputs_before_update" => {
                e.decode.zero_outputs_before_update = parse(key, value)?
            }
            "feedback_floor" => e.decode.feedback_floor = parse(key, value)?,
            "point_rate" => e.mutation.point_rate = parse(key, value)?,
            "segment_delete_prob" => e.mutation.segment_delete_prob = parse(key, value)?,
            "segment_copy_prob" => e.mutation.segment_copy_prob = parse(key, value)?,
            "segment_min" => e.mutation.segment_min = parse(key, value)?,
            "segment_max" => e.mutation.segment_max = parse(key, value)?,
            "genome_min" => e.mutation.genome_min = parse(key, value)?,
            "genome_max" => e.mutation.genome_max = parse(key, value)?,
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown config key `{key}`; known keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a config file's lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_override(&mut self, kv: &str) -> Result<(), CliError> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override `{kv}` is not key=value")))?;
        self.set(k.trim(), v)
    }

    /// Fills in the task's I/O counts and validates the whole config.
    pub fn finish(&mut self) -> Result<(), CliError> {
        let task = self.task()?;
        let spec = task.spec();
        self.evolution.decode.n_inputs = spec.n_inputs;
        self.evolution.decode.n_outputs = spec.n_outputs;
        self.evolution
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn task(&self) -> Result<Box<dyn Task>, CliError> {
        let e = &self.evolution;
        task_from_name(&e.task, e.lifetime, e.ticks_per_percept)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn decode(&self) -> &DecodeConfig {
        &self.evolution.decode
    }

    /// The resolved config; reading it back reproduces this one.
    pub fn to_text(&self) -> String {
        let e = &self.evolution;
        let m = &e.mutation;
        let d = &e.decode;
        let gates: Vec<&str> = d.enabled.iter().map(|k| k.name()).collect();
        let mut s = String::new();
        let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        put("seed", e.seed.to_string());
        if let Some(out) = &self.out {
            put("out", out.display().to_string());
        }
        put(
            "precision",
            if self.precision == Precision::F32 {
                "f32"
            } else {
                "f64"
            }
            .into(),
        );
        put("population_size", e.population_size.to_string());
        put("generations", e.generations.to_string());
        put("selection", e.selection.to_string());
        put("elitism", e.elitism.to_string());
        put("repeats", e.repeats.to_string());
        put("initial_length", e.initial_length.to_string());
        put("seeded_codons", e.seeded_codons.to_string());
        put(
            "reseed_each_generation",
            e.reseed_each_generation.to_string(),
        );
        put("snapshot_every", e.snapshot_every.to_string());
        put("task", e.task.clone());
        put("lifetime", e.lifetime.to_string());
        put("ticks_per_percept", e.ticks_per_percept.to_string());
        put("n_nodes", d.n_nodes.to_string());
        put("min_in", d.min_in.to_string());
        put("max_in", d.max_in.to_string());
        put("min_out", d.min_out.to_string());
        put("max_out", d.max_out.to_string());
        put("gates", gates.join(","));
        put(
            "zero_outputs_before_update",
            d.zero_outputs_before_update.to_string(),
        );
        put("feedback_floor", d.feedback_floor.to_string());
        put("point_rate", m.point_rate.to_string());
        put("segment_delete_prob", m.segment_delete_prob.to_string());
        put("segment_copy_prob", m.segment_copy_prob.to_string());
        put("segment_min", m.segment_min.to_string());
        put("segment_max", m.segment_max.to_string());
        put("genome_min", m.genome_min.to_string());
        put("genome_max", m.genome_max.to_string());
        s
    }
}

//! Genome to gate-network translation.
//!
//! A gene starts right after a two-site start codon and has a fixed layout:
//!
//! ```text
//! n_in | n_out | max_in input addresses | max_out output addresses | payload
//! ```
//!
//! Address and payload fields are sized by the configured maxima, not by the
//! decoded counts, so a mutation of a count site never shifts the meaning of
//! the sites after it. The one exception is the probabilistic ternary gate,
//! whose table width depends on the actual counts. All reads wrap around the
//! end of the genome.

mod dump;

use std::collections::BTreeSet;

pub use dump::{dump_brain, dump_gate, parse_dump};

use crate::brain::Brain;
use crate::error::{Error, Result};
use crate::gates::{
    FeedbackParams, GateBlueprint, GateKind, GenomeSpan, LogicTable, Payload, ProbabilityTable,
    WeightMatrix,
};
use crate::genome::{Genome, Site};
use crate::scalar::Scalar;

/// Largest buffer whose discretized state fits a `u128` label.
pub const MAX_NODES: usize = 128;

/// `lo + value mod (hi - lo + 1)`.
pub fn map_site(value: Site, lo: u32, hi: u32) -> Result<u32> {
    if lo > hi {
        return Err(Error::invalid(format!("empty range [{lo}, {hi}]")));
    }
    let span = u64::from(hi - lo) + 1;
    Ok(lo + (u64::from(value) % span) as u32)
}

fn map_range(value: Site, lo: usize, hi: usize) -> usize {
    lo + value as usize % (hi - lo + 1)
}

/// Linear map of `[0, alphabet_max]` onto `[lo, hi]`.
fn map_linear(value: Site, alphabet_max: Site, lo: f64, hi: f64) -> f64 {
    if alphabet_max == 0 {
        return lo;
    }
    lo + (hi - lo) * (f64::from(value) / f64::from(alphabet_max))
}

/// Start codon per gate kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodonRegistry {
    codons: Vec<(GateKind, [Site; 2])>,
}

impl Default for CodonRegistry {
    /// 42/213 probabilistic and 43/212 deterministic; the remaining kinds
    /// continue the `second = 255 - first` pattern from 44/211 upward.
    fn default() -> Self {
        let order = [
            (GateKind::Probabilistic, 42),
            (GateKind::Deterministic, 43),
            (GateKind::Ann, 44),
            (GateKind::Threshold, 45),
            (GateKind::Timer, 46),
            (GateKind::Feedback, 47),
            (GateKind::TernaryDeterministic, 48),
            (GateKind::TernaryProbabilistic, 49),
        ];
        CodonRegistry {
            codons: order.iter().map(|&(k, a)| (k, [a, 255 - a])).collect(),
        }
    }
}

impl CodonRegistry {
    pub fn new(codons: Vec<(GateKind, [Site; 2])>) -> Result<Self> {
        let reg = CodonRegistry { codons };
        reg.validate()?;
        Ok(reg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen_codons = BTreeSet::new();
        let mut seen_kinds = BTreeSet::new();
        for &(kind, codon) in &self.codons {
            if codon.iter().any(|&s| s <= 1) {
                return Err(Error::invalid(format!(
                    "codon {codon:?} for {kind} uses 0 or 1"
                )));
            }
            if !seen_codons.insert(codon) {
                return Err(Error::invalid(format!("codon {codon:?} is used twice")));
            }
            if !seen_kinds.insert(kind) {
                return Err(Error::invalid(format!("{kind} has two codons")));
            }
        }
        Ok(())
    }

    pub fn codon(&self, kind: GateKind) -> Option<[Site; 2]> {
        self.codons
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|&(_, c)| c)
    }

    pub fn kind_of(&self, pair: [Site; 2]) -> Option<GateKind> {
        self.codons
            .iter()
            .find(|(_, c)| *c == pair)
            .map(|&(k, _)| k)
    }

    pub fn codons(&self) -> &[(GateKind, [Site; 2])] {
        &self.codons
    }
}

/// Experimenter-set ranges for decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeConfig {
    pub n_nodes: usize,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub min_in: usize,
    pub max_in: usize,
    pub min_out: usize,
    pub max_out: usize,
    pub enabled: BTreeSet<GateKind>,
    pub registry: CodonRegistry,
    pub weight_range: (f64, f64),
    pub threshold_range: (u32, u32),
    pub timer_range: (u32, u32),
    pub feedback_capacity_range: (u32, u32),
    pub feedback_delta_range: (f64, f64),
    pub feedback_floor: f64,
    pub zero_outputs_before_update: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            n_nodes: 16,
            n_inputs: 1,
            n_outputs: 1,
            min_in: 1,
            max_in: 4,
            min_out: 1,
            max_out: 4,
            enabled: [GateKind::Deterministic, GateKind::Probabilistic].into(),
            registry: CodonRegistry::default(),
            weight_range: (-1.0, 1.0),
            threshold_range: (1, 16),
            timer_range: (1, 64),
            feedback_capacity_range: (1, 8),
            feedback_delta_range: (0.01, 0.5),
            feedback_floor: 0.01,
            zero_outputs_before_update: false,
        }
    }
}

impl DecodeConfig {
    pub fn with_io(n_inputs: usize, n_outputs: usize) -> Self {
        DecodeConfig {
            n_inputs,
            n_outputs,
            ..Self::default()
        }
    }

    pub fn with_kinds(mut self, kinds: &[GateKind]) -> Self {
        self.enabled = kinds.iter().copied().collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_inputs == 0 || self.n_outputs == 0 {
            return Err(Error::invalid(
                "need at least one input and one output node",
            ));
        }
        if self.n_nodes < self.n_inputs + self.n_outputs {
            return Err(Error::invalid(format!(
                "{} nodes cannot hold {} inputs and {} outputs",
                self.n_nodes, self.n_inputs, self.n_outputs
            )));
        }
        if self.n_nodes > MAX_NODES {
            return Err(Error::invalid(format!(
                "at most {MAX_NODES} nodes are supported"
            )));
        }
        for (name, lo, hi) in [
            ("inputs", self.min_in, self.max_in),
            ("outputs", self.min_out, self.max_out),
        ] {
            if lo == 0 || lo > hi || hi > 8 {
                return Err(Error::invalid(format!(
                    "gate {name} range [{lo}, {hi}] must lie within [1, 8]"
                )));
            }
        }
        let ordered = |(lo, hi): (u32, u32)| lo >= 1 && lo <= hi;
        if !ordered(self.threshold_range)
            || !ordered(self.timer_range)
            || !ordered(self.feedback_capacity_range)
        {
            return Err(Error::invalid(
                "threshold, timer and capacity ranges must start at 1 or more",
            ));
        }
        let (wl, wh) = self.weight_range;
        let (dl, dh) = self.feedback_delta_range;
        if !(wl.is_finite() && wh.is_finite() && wl <= wh) {
            return Err(Error::invalid("bad weight range"));
        }
        if !(dl.is_finite() && dh.is_finite() && 0.0 <= dl && dl <= dh) {
            return Err(Error::invalid("bad feedback delta range"));
        }
        if !(0.0..1.0).contains(&self.feedback_floor) {
            return Err(Error::invalid("feedback floor must lie in [0, 1)"));
        }
        self.registry.validate()
    }

    pub fn input_nodes(&self) -> Vec<usize> {
        (0..self.n_inputs).collect()
    }

    pub fn output_nodes(&self) -> Vec<usize> {
        (self.n_inputs..self.n_inputs + self.n_outputs).collect()
    }

    fn header_width(&self) -> usize {
        2 + self.max_in + self.max_out
    }

    /// Payload sites for a kind, given the decoded counts.
    pub fn payload_width(&self, kind: GateKind, n_in: usize, n_out: usize) -> usize {
        let bin_in = 1 << self.max_in;
        let bin_out = 1 << self.max_out;
        match kind {
            GateKind::Deterministic => bin_in,
            GateKind::Probabilistic => bin_in * bin_out,
            GateKind::Ann => self.max_in * self.max_out,
            GateKind::Threshold | GateKind::Timer => 1,
            GateKind::Feedback => 4 + bin_in * bin_out,
            GateKind::TernaryDeterministic => 3usize.pow(self.max_in as u32),
            GateKind::TernaryProbabilistic => 3usize.pow((n_in + n_out) as u32),
        }
    }

    /// Sites a gene occupies after its codon.
    pub fn gene_width(&self, kind: GateKind, n_in: usize, n_out: usize) -> usize {
        self.header_width() + self.payload_width(kind, n_in, n_out)
    }
}

/// Every position whose site pair (wrapping at the end) is a start codon.
pub fn scan_codons(genome: &Genome, registry: &CodonRegistry) -> Vec<(usize, GateKind)> {
    let sites = genome.sites();
    let n = sites.len();
    if n < 2 {
        return Vec::new();
    }
    let first_max = registry.codons.iter().map(|(_, c)| c[0]).max().unwrap_or(0) as usize;
    let mut is_first = vec![false; first_max + 1];
    for (_, c) in &registry.codons {
        is_first[c[0] as usize] = true;
    }
    let mut hits = Vec::new();
    for p in 0..n {
        let a = sites[p] as usize;
        if a <= first_max && is_first[a] {
            if let Some(kind) = registry.kind_of([sites[p], sites[(p + 1) % n]]) {
                hits.push((p, kind));
            }
        }
    }
    hits
}

/// Sites at `(start + i) mod len`.
pub fn read_circular(genome: &Genome, start: usize, count: usize) -> Vec<Site> {
    genome.read_circular(start, count)
}

/// Decodes the gene beginning at `body` (the site after the codon).
/// `None` when the kind is not enabled.
pub fn decode_gene<S: Scalar>(
    genome: &Genome,
    body: usize,
    kind: GateKind,
    cfg: &DecodeConfig,
) -> Option<GateBlueprint<S>> {
    if !cfg.enabled.contains(&kind) || genome.is_empty() {
        return None;
    }
    let len = genome.len();
    let at = |offset: usize| genome.site_at(body + offset);
    let n_in = map_range(at(0), cfg.min_in, cfg.max_in);
    let n_out = map_range(at(1), cfg.min_out, cfg.max_out);
    let inputs: Vec<usize> = (0..n_in)
        .map(|i| at(2 + i) as usize % cfg.n_nodes)
        .collect();
    let outputs: Vec<usize> = (0..n_out)
        .map(|j| at(2 + cfg.max_in + j) as usize % cfg.n_nodes)
        .collect();
    let base = cfg.header_width();
    let payload_site = |offset: usize| at(base + offset);
    let alphabet_max = genome.alphabet_max();

    let payload = match kind {
        GateKind::Deterministic => {
            let width = 1usize << n_out;
            let rows = (0..1usize << n_in)
                .map(|r| payload_site(r) as usize % width)
                .collect();
            Payload::Deterministic(LogicTable::binary(n_in, n_out, rows).ok()?)
        }
        GateKind::Probabilistic => {
            Payload::Probabilistic(binary_table(n_in, n_out, cfg.max_out, payload_site))
        }
        GateKind::Ann => {
            let (lo, hi) = cfg.weight_range;
            let weights = (0..n_out)
                .flat_map(|j| (0..n_in).map(move |i| (j, i)))
                .map(|(j, i)| {
                    S::of(map_linear(
                        payload_site(j * cfg.max_in + i),
                        alphabet_max,
                        lo,
                        hi,
                    ))
                })
                .collect();
            Payload::Ann(WeightMatrix::new(n_in, n_out, weights).ok()?)
        }
        GateKind::Threshold => {
            let (lo, hi) = cfg.threshold_range;
            Payload::Threshold {
                threshold: map_site(payload_site(0), lo, hi).ok()?,
            }
        }
        GateKind::Timer => {
            let (lo, hi) = cfg.timer_range;
            Payload::Timer {
                period: map_site(payload_site(0), lo, hi).ok()?,
            }
        }
        GateKind::Feedback => {
            let (clo, chi) = cfg.feedback_capacity_range;
            let (dlo, dhi) = cfg.feedback_delta_range;
            Payload::Feedback(FeedbackParams {
                capacity: map_site(payload_site(0), clo, chi).ok()? as usize,
                delta_max: S::of(map_linear(payload_site(1), alphabet_max, dlo, dhi)),
                floor: S::of(cfg.feedback_floor),
                pos_node: payload_site(2) as usize % cfg.n_nodes,
                neg_node: payload_site(3) as usize % cfg.n_nodes,
                table: binary_table(n_in, n_out, cfg.max_out, |o| payload_site(4 + o)),
            })
        }
        GateKind::TernaryDeterministic => {
            let width = 3usize.pow(n_out as u32);
            let rows = (0..3usize.pow(n_in as u32))
                .map(|r| payload_site(r) as usize % width)
                .collect();
            Payload::TernaryDeterministic(LogicTable::ternary(n_in, n_out, rows).ok()?)
        }
        GateKind::TernaryProbabilistic => {
            let count = 3usize.pow((n_in + n_out) as u32);
            let raw: Vec<S> = (0..count)
                .map(|o| S::of(f64::from(payload_site(o))))
                .collect();
            Payload::TernaryProbabilistic(ProbabilityTable::from_raw(n_in, n_out, 3, &raw).ok()?)
        }
    };
    let codon_start = (body % len + 2 * len - 2) % len;
    Some(GateBlueprint {
        inputs,
        outputs,
        payload,
        span: GenomeSpan {
            start: codon_start,
            len: 2 + cfg.gene_width(kind, n_in, n_out),
        },
    })
}

/// Reads the `2^n_in x 2^n_out` sub-block of a `2^max_in x 2^max_out` field.
fn binary_table<S: Scalar>(
    n_in: usize,
    n_out: usize,
    max_out: usize,
    site: impl Fn(usize) -> Site,
) -> ProbabilityTable<S> {
    let stride = 1usize << max_out;
    let width = 1usize << n_out;
    let raw: Vec<S> = (0..1usize << n_in)
        .flat_map(|r| (0..width).map(move |c| r * stride + c))
        .map(|o| S::of(f64::from(site(o))))
        .collect();
    ProbabilityTable::from_raw(n_in, n_out, 2, &raw).expect("site values are nonnegative")
}

/// All gates encoded by the genome, in codon order.
pub fn decode_blueprints<S: Scalar>(genome: &Genome, cfg: &DecodeConfig) -> Vec<GateBlueprint<S>> {
    scan_codons(genome, &cfg.registry)
        .into_iter()
        .filter_map(|(p, kind)| decode_gene(genome, p + 2, kind, cfg))
        .collect()
}

/// Builds the brain a genome encodes. Total: a genome without codons gives a
/// gate-less brain.
pub fn decode_brain<S: Scalar>(genome: &Genome, cfg: &DecodeConfig) -> Result<Brain<S>> {
    cfg.validate()?;
    Brain::from_config(decode_blueprints(genome, cfg), cfg)
}

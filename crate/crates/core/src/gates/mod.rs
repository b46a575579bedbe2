//! Gate kinds, decoded gate descriptions, and their per-update evaluation.

mod feedback;
mod tables;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

pub use feedback::{FeedbackParams, FeedbackState};
pub use tables::{
    binary_index, discretize_binary, discretize_ternary, eval_ann, eval_deterministic,
    eval_probabilistic, eval_ternary_deterministic, eval_ternary_probabilistic, normalize_row,
    pattern_bit, pattern_trit, sample_row, ternary_index, trit_pattern, LogicTable,
    ProbabilityTable, WeightMatrix,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Deterministic,
    Probabilistic,
    Ann,
    Threshold,
    Timer,
    Feedback,
    TernaryDeterministic,
    TernaryProbabilistic,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::Deterministic,
        GateKind::Probabilistic,
        GateKind::Ann,
        GateKind::Threshold,
        GateKind::Timer,
        GateKind::Feedback,
        GateKind::TernaryDeterministic,
        GateKind::TernaryProbabilistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Deterministic => "deterministic",
            GateKind::Probabilistic => "probabilistic",
            GateKind::Ann => "ann",
            GateKind::Threshold => "threshold",
            GateKind::Timer => "timer",
            GateKind::Feedback => "feedback",
            GateKind::TernaryDeterministic => "ternary_det",
            GateKind::TernaryProbabilistic => "ternary_prob",
        }
    }

    /// Whether evaluation consumes random numbers.
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            GateKind::Probabilistic | GateKind::Feedback | GateKind::TernaryProbabilistic
        )
    }

    pub fn is_ternary(self) -> bool {
        matches!(
            self,
            GateKind::TernaryDeterministic | GateKind::TernaryProbabilistic
        )
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown gate kind `{s}`")))
    }
}

/// Kind-specific function data of a gate.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload<S> {
    Deterministic(LogicTable),
    Probabilistic(ProbabilityTable<S>),
    Ann(WeightMatrix<S>),
    Threshold { threshold: u32 },
    Timer { period: u32 },
    Feedback(FeedbackParams<S>),
    TernaryDeterministic(LogicTable),
    TernaryProbabilistic(ProbabilityTable<S>),
}

impl<S> Payload<S> {
    pub fn kind(&self) -> GateKind {
        match self {
            Payload::Deterministic(_) => GateKind::Deterministic,
            Payload::Probabilistic(_) => GateKind::Probabilistic,
            Payload::Ann(_) => GateKind::Ann,
            Payload::Threshold { .. } => GateKind::Threshold,
            Payload::Timer { .. } => GateKind::Timer,
            Payload::Feedback(_) => GateKind::Feedback,
            Payload::TernaryDeterministic(_) => GateKind::TernaryDeterministic,
            Payload::TernaryProbabilistic(_) => GateKind::TernaryProbabilistic,
        }
    }
}

/// Where a gene sits on the genome: codon position and total site count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GenomeSpan {
    pub start: usize,
    pub len: usize,
}

/// A decoded gate: wiring plus function.
#[derive(Clone, Debug, PartialEq)]
pub struct GateBlueprint<S> {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub payload: Payload<S>,
    pub span: GenomeSpan,
}

impl<S: Scalar> GateBlueprint<S> {
    /// Checks wiring and payload against each other and the buffer size.
    pub fn new(
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        payload: Payload<S>,
        n_nodes: usize,
    ) -> Result<Self> {
        let bp = GateBlueprint {
            inputs,
            outputs,
            payload,
            span: GenomeSpan::default(),
        };
        bp.validate(n_nodes)?;
        Ok(bp)
    }

    pub fn kind(&self) -> GateKind {
        self.payload.kind()
    }

    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        if self.inputs.is_empty() || self.outputs.is_empty() {
            return Err(Error::invalid(
                "a gate needs at least one input and one output",
            ));
        }
        let extra = match &self.payload {
            Payload::Feedback(f) => vec![f.pos_node, f.neg_node],
            _ => Vec::new(),
        };
        if let Some(bad) = self
            .inputs
            .iter()
            .chain(&self.outputs)
            .chain(&extra)
            .find(|&&n| n >= n_nodes)
        {
            return Err(Error::invalid(format!(
                "node {bad} outside buffer of {n_nodes}"
            )));
        }
        let (n_in, n_out) = (self.inputs.len(), self.outputs.len());
        let dims_ok = match &self.payload {
            Payload::Deterministic(t) | Payload::TernaryDeterministic(t) => {
                t.n_in() == n_in && t.n_out() == n_out
            }
            Payload::Probabilistic(t) | Payload::TernaryProbabilistic(t) => {
                t.n_in() == n_in && t.n_out() == n_out && t.is_normalized()
            }
            Payload::Feedback(f) => {
                f.table.n_in() == n_in
                    && f.table.n_out() == n_out
                    && f.table.is_normalized()
                    && f.capacity >= 1
            }
            Payload::Ann(w) => w.n_in() == n_in && w.n_out() == n_out,
            Payload::Threshold { threshold } => *threshold >= 1,
            Payload::Timer { period } => *period >= 1,
        };
        let radix_ok = match &self.payload {
            Payload::Deterministic(t) => t.radix() == 2,
            Payload::TernaryDeterministic(t) => t.radix() == 3,
            Payload::Probabilistic(t) => t.radix() == 2,
            Payload::Feedback(f) => f.table.radix() == 2,
            Payload::TernaryProbabilistic(t) => t.radix() == 3,
            _ => true,
        };
        if !dims_ok || !radix_ok {
            return Err(Error::invalid(format!(
                "{} payload does not fit {n_in} inputs and {n_out} outputs",
                self.kind()
            )));
        }
        Ok(())
    }

    /// Nodes whose values the gate uses. Timers read nothing.
    pub fn read_nodes(&self) -> Vec<usize> {
        match &self.payload {
            Payload::Timer { .. } => Vec::new(),
            Payload::Feedback(f) => {
                let mut v = self.inputs.clone();
                v.push(f.pos_node);
                v.push(f.neg_node);
                v
            }
            _ => self.inputs.clone(),
        }
    }
}

/// Accumulates active inputs and fires once the threshold is reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdState {
    pub threshold: u32,
    pub accumulator: u32,
}

impl ThresholdState {
    pub fn new(threshold: u32) -> Self {
        ThresholdState {
            threshold: threshold.max(1),
            accumulator: 0,
        }
    }

    /// Adds `active` and reports whether the gate fires this update.
    pub fn step(&mut self, active: u32) -> bool {
        self.accumulator += active;
        if self.accumulator >= self.threshold {
            self.accumulator = 0;
            true
        } else {
            false
        }
    }
}

/// Fires every `period` updates, ignoring inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimerState {
    pub period: u32,
    pub counter: u32,
}

impl TimerState {
    pub fn new(period: u32) -> Self {
        TimerState {
            period: period.max(1),
            counter: 0,
        }
    }

    pub fn step(&mut self) -> bool {
        self.counter = (self.counter + 1) % self.period;
        self.counter == 0
    }
}

#[derive(Clone, Debug)]
enum GateState<S> {
    Stateless,
    Threshold(ThresholdState),
    Timer(TimerState),
    Feedback(FeedbackState<S>),
}

/// A gate inside a running brain.
#[derive(Clone, Debug)]
pub struct GateRuntime<S> {
    blueprint: GateBlueprint<S>,
    state: GateState<S>,
}

impl<S: Scalar> GateRuntime<S> {
    pub fn new(blueprint: GateBlueprint<S>) -> Self {
        let state = match &blueprint.payload {
            Payload::Threshold { threshold } => {
                GateState::Threshold(ThresholdState::new(*threshold))
            }
            Payload::Timer { period } => GateState::Timer(TimerState::new(*period)),
            Payload::Feedback(f) => GateState::Feedback(FeedbackState::new(f)),
            _ => GateState::Stateless,
        };
        GateRuntime { blueprint, state }
    }

    pub fn blueprint(&self) -> &GateBlueprint<S> {
        &self.blueprint
    }

    pub fn kind(&self) -> GateKind {
        self.blueprint.kind()
    }

    /// Internal counters to zero; feedback tables back to their decoded values.
    pub fn reset(&mut self) {
        match (&mut self.state, &self.blueprint.payload) {
            (GateState::Threshold(t), _) => t.accumulator = 0,
            (GateState::Timer(t), _) => t.counter = 0,
            (GateState::Feedback(st), Payload::Feedback(p)) => st.reset(p),
            _ => {}
        }
    }

    pub fn threshold_state(&self) -> Option<&ThresholdState> {
        match &self.state {
            GateState::Threshold(t) => Some(t),
            _ => None,
        }
    }

    pub fn timer_state(&self) -> Option<&TimerState> {
        match &self.state {
            GateState::Timer(t) => Some(t),
            _ => None,
        }
    }

    pub fn feedback_state(&self) -> Option<&FeedbackState<S>> {
        match &self.state {
            GateState::Feedback(f) => Some(f),
            _ => None,
        }
    }

    /// Reads `snapshot` (the buffer at t) and adds this gate's outputs into
    /// `next` (the buffer at t+1).
    pub fn evaluate<R: Rng + ?Sized>(&mut self, snapshot: &[S], next: &mut [S], rng: &mut R) {
        let GateRuntime { blueprint, state } = self;
        let (inputs, outputs) = (&blueprint.inputs[..], &blueprint.outputs[..]);
        match (&blueprint.payload, state) {
            (Payload::Deterministic(t), _) => {
                let pattern = t.lookup(binary_input_index(inputs, snapshot));
                write_bits(outputs, pattern, next);
            }
            (Payload::Probabilistic(t), _) => {
                let pattern = t.sample(binary_input_index(inputs, snapshot), rng);
                write_bits(outputs, pattern, next);
            }
            (Payload::Ann(w), _) => {
                let mut xs = [S::zero(); 8];
                let owned;
                let values: &[S] = if inputs.len() <= xs.len() {
                    for (x, &n) in xs.iter_mut().zip(inputs) {
                        *x = snapshot[n];
                    }
                    &xs[..inputs.len()]
                } else {
                    owned = inputs.iter().map(|&n| snapshot[n]).collect::<Vec<_>>();
                    &owned
                };
                for (j, &n) in outputs.iter().enumerate() {
                    next[n] += w.activate(j, values);
                }
            }
            (Payload::Threshold { .. }, GateState::Threshold(st)) => {
                let active = inputs
                    .iter()
                    .map(|&n| u32::from(discretize_binary(snapshot[n])))
                    .sum();
                if st.step(active) {
                    write_all(outputs, next);
                }
            }
            (Payload::Timer { .. }, GateState::Timer(st)) => {
                if st.step() {
                    write_all(outputs, next);
                }
            }
            (Payload::Feedback(p), GateState::Feedback(st)) => {
                let input = binary_input_index(inputs, snapshot);
                let pos = discretize_binary(snapshot[p.pos_node]) == 1;
                let neg = discretize_binary(snapshot[p.neg_node]) == 1;
                let pattern = st.step(input, pos, neg, rng);
                write_bits(outputs, pattern, next);
            }
            (Payload::TernaryDeterministic(t), _) => {
                let pattern = t.lookup(ternary_input_index(inputs, snapshot));
                write_trits(outputs, pattern, next);
            }
            (Payload::TernaryProbabilistic(t), _) => {
                let pattern = t.sample(ternary_input_index(inputs, snapshot), rng);
                write_trits(outputs, pattern, next);
            }
            _ => unreachable!("gate state always matches its payload"),
        }
    }
}

#[inline]
fn binary_input_index<S: Scalar>(inputs: &[usize], snapshot: &[S]) -> usize {
    inputs.iter().enumerate().fold(0, |acc, (i, &n)| {
        acc | (usize::from(discretize_binary(snapshot[n])) << i)
    })
}

#[inline]
fn ternary_input_index<S: Scalar>(inputs: &[usize], snapshot: &[S]) -> usize {
    inputs.iter().rev().fold(0, |acc, &n| {
        acc * 3 + (discretize_ternary(snapshot[n]) + 1) as usize
    })
}

#[inline]
fn write_bits<S: Scalar>(outputs: &[usize], pattern: usize, next: &mut [S]) {
    for (j, &n) in outputs.iter().enumerate() {
        if pattern_bit(pattern, j) == 1 {
            next[n] += S::one();
        }
    }
}

#[inline]
fn write_trits<S: Scalar>(outputs: &[usize], pattern: usize, next: &mut [S]) {
    let mut p = pattern;
    for &n in outputs {
        let trit = (p % 3) as i8 - 1;
        p /= 3;
        if trit != 0 {
            next[n] += S::of(f64::from(trit));
        }
    }
}

#[inline]
fn write_all<S: Scalar>(outputs: &[usize], next: &mut [S]) {
    for &n in outputs {
        next[n] += S::one();
    }
}

//! Empirical state-to-state transitions from recorded traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::brain::{label_of, Trace, TraceRow};
use crate::error::{Error, Result};

/// Counts of `(state, input) -> next_state`.
///
/// A state label is `sum bit_i * 2^i` over non-input nodes `i` (buffer
/// index order); the input nodes form the symbol `sum bit_j * 2^j` over
/// their position `j` in the input list.
/// `(next_state, probability, count)`.
pub type Successor = (u128, f64, u64);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransitionMatrix {
    counts: BTreeMap<(u128, u64), BTreeMap<u128, u64>>,
}

fn state_label(row: &TraceRow, inputs: &[usize]) -> u128 {
    label_of(
        row.bits
            .iter()
            .copied()
            .enumerate()
            .filter(|(i, _)| !inputs.contains(i)),
    )
}

fn input_symbol(row: &TraceRow, inputs: &[usize]) -> u64 {
    inputs
        .iter()
        .enumerate()
        .fold(0, |a, (j, &n)| a | (u64::from(row.bits[n] & 1) << j))
}

pub fn transition_matrix(traces: &[Trace]) -> Result<TransitionMatrix> {
    if traces.is_empty() || traces.iter().any(|t| t.rows.is_empty()) {
        return Err(Error::invalid("transition matrix needs nonempty traces"));
    }
    let mut m = TransitionMatrix::default();
    for t in traces {
        for w in t.rows.windows(2) {
            let key = (
                state_label(&w[0], &t.input_nodes),
                input_symbol(&w[0], &t.input_nodes),
            );
            let next = state_label(&w[1], &t.input_nodes);
            *m.counts.entry(key).or_default().entry(next).or_insert(0) += 1;
        }
    }
    Ok(m)
}

impl TransitionMatrix {
    /// Label of the first state of a trace.
    pub fn initial_state(trace: &Trace) -> Option<u128> {
        trace
            .rows
            .first()
            .map(|r| state_label(r, &trace.input_nodes))
    }

    pub fn n_transitions(&self) -> u64 {
        self.counts.values().flat_map(|r| r.values()).sum()
    }

    pub fn count(&self, state: u128, input: u64, next: u128) -> u64 {
        self.counts
            .get(&(state, input))
            .and_then(|r| r.get(&next))
            .copied()
            .unwrap_or(0)
    }

    pub fn prob(&self, state: u128, input: u64, next: u128) -> f64 {
        match self.counts.get(&(state, input)) {
            Some(r) => self.count(state, input, next) as f64 / r.values().sum::<u64>() as f64,
            None => 0.0,
        }
    }

    /// `(state, input)` with its next-state distribution.
    pub fn rows(&self) -> impl Iterator<Item = ((u128, u64), Vec<Successor>)> + '_ {
        self.counts.iter().map(|(&k, r)| {
            let total = r.values().sum::<u64>() as f64;
            (
                k,
                r.iter().map(|(&n, &c)| (n, c as f64 / total, c)).collect(),
            )
        })
    }

    /// True when every observed `(state, input)` has a single successor.
    pub fn is_deterministic(&self) -> bool {
        self.counts.values().all(|r| r.len() == 1)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("state,input,next_state,prob,count\n");
        for ((state, input), row) in self.rows() {
            for (next, p, c) in row {
                writeln!(s, "{state},{input},{next},{p},{c}").unwrap();
            }
        }
        s
    }

    /// Rebuilds the counts; probabilities are derived from them.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("state,input,next_state,prob,count") {
            return Err(Error::parse(0, "missing transition header"));
        }
        let mut m = TransitionMatrix::default();
        for line in lines {
            let bad = || Error::parse(0, format!("bad transition row `{line}`"));
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 5 {
                return Err(bad());
            }
            let key = (
                c[0].parse().map_err(|_| bad())?,
                c[1].parse().map_err(|_| bad())?,
            );
            let next: u128 = c[2].parse().map_err(|_| bad())?;
            let count: u64 = c[4].parse().map_err(|_| bad())?;
            m.counts.entry(key).or_default().insert(next, count);
        }
        Ok(m)
    }
}

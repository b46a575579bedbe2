//! Probabilistic gates that adjust their own table from delayed reward.

use std::collections::VecDeque;

use rand::Rng;

use super::tables::ProbabilityTable;
use crate::scalar::Scalar;

/// Heritable part of a feedback gate.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackParams<S> {
    pub table: ProbabilityTable<S>,
    /// How many past (input, output) pairs are remembered.
    pub capacity: usize,
    pub delta_max: S,
    pub floor: S,
    pub pos_node: usize,
    pub neg_node: usize,
}

/// Within-lifetime state: the adapted table and the pair history.
#[derive(Clone, Debug)]
pub struct FeedbackState<S> {
    table: ProbabilityTable<S>,
    history: VecDeque<(usize, usize)>,
    capacity: usize,
    delta_max: S,
    floor: S,
}

impl<S: Scalar> FeedbackState<S> {
    pub fn new(params: &FeedbackParams<S>) -> Self {
        FeedbackState {
            table: params.table.clone(),
            history: VecDeque::with_capacity(params.capacity),
            capacity: params.capacity.max(1),
            delta_max: params.delta_max,
            floor: params.floor,
        }
    }

    /// Back to the decoded table with an empty history.
    pub fn reset(&mut self, params: &FeedbackParams<S>) {
        self.table.clone_from(&params.table);
        self.history.clear();
    }

    pub fn table(&self) -> &ProbabilityTable<S> {
        &self.table
    }

    pub fn history(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.history.iter().copied()
    }

    /// Raises every remembered `P[I][O]` by a fresh `U(0, delta_max)`,
    /// renormalizing the row after each change. Oldest pair first.
    pub fn reward<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for k in 0..self.history.len() {
            let (i, o) = self.history[k];
            let delta = self.draw_delta(rng);
            let row = self.table.row_mut(i);
            row[o] += delta;
            renormalize(row);
        }
    }

    /// Lowers every remembered `P[I][O]`, never below the floor.
    pub fn punish<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for k in 0..self.history.len() {
            let (i, o) = self.history[k];
            let delta = self.draw_delta(rng);
            let floor = self.floor;
            let row = self.table.row_mut(i);
            row[o] = (row[o] - delta).max(floor);
            renormalize(row);
        }
    }

    fn draw_delta<R: Rng + ?Sized>(&self, rng: &mut R) -> S {
        self.delta_max * S::of(rng.gen::<f64>())
    }

    /// Applies pending feedback, samples an output for `input`, and records
    /// the pair.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        input: usize,
        pos: bool,
        neg: bool,
        rng: &mut R,
    ) -> usize {
        if pos {
            self.reward(rng);
        }
        if neg {
            self.punish(rng);
        }
        let output = self.table.sample(input, rng);
        if self.history.len() == self.capacity {
            self.history.pop_front();
        }
        self.history.push_back((input, output));
        output
    }
}

fn renormalize<S: Scalar>(row: &mut [S]) {
    let sum: S = row.iter().copied().sum();
    if sum > S::zero() {
        for p in row.iter_mut() {
            *p = *p / sum;
        }
    }
}

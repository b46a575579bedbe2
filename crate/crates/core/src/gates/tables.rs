//! Discretizers and the lookup structures gates compute with.
//!
//! Index convention: input `i` (the i-th connected node) contributes
//! `radix^i` to the row index, and output `j` of a pattern is digit `j`
//! in the same radix. Ternary digits store `trit + 1`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `1` for strictly positive values, `0` otherwise.
#[inline]
pub fn discretize_binary<S: Scalar>(x: S) -> u8 {
    u8::from(x > S::zero())
}

/// `1` at or above 1.0, `-1` at or below -1.0, `0` in between.
#[inline]
pub fn discretize_ternary<S: Scalar>(x: S) -> i8 {
    if x >= S::one() {
        1
    } else if x <= -S::one() {
        -1
    } else {
        0
    }
}

/// Scales nonnegative weights into a probability vector; an all-zero row
/// becomes uniform.
pub fn normalize_row<S: Scalar>(raw: &[S]) -> Result<Vec<S>> {
    if raw.is_empty() {
        return Err(Error::invalid("cannot normalize an empty row"));
    }
    if let Some(bad) = raw.iter().find(|x| !x.is_finite() || **x < S::zero()) {
        return Err(Error::invalid(format!(
            "row entry {bad} is negative or not finite"
        )));
    }
    let sum: S = raw.iter().copied().sum();
    if sum == S::zero() {
        let uniform = S::one() / S::of(raw.len() as f64);
        return Ok(vec![uniform; raw.len()]);
    }
    Ok(raw.iter().map(|&x| x / sum).collect())
}

#[inline]
pub fn binary_index(bits: &[u8]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (usize::from(b & 1) << i))
}

#[inline]
pub fn ternary_index(trits: &[i8]) -> usize {
    trits
        .iter()
        .rev()
        .fold(0, |acc, &t| acc * 3 + (t + 1) as usize)
}

/// Bit `j` of an output pattern.
#[inline]
pub fn pattern_bit(pattern: usize, j: usize) -> u8 {
    ((pattern >> j) & 1) as u8
}

/// Trit `j` of a ternary output pattern.
#[inline]
pub fn pattern_trit(pattern: usize, j: usize) -> i8 {
    ((pattern / 3usize.pow(j as u32)) % 3) as i8 - 1
}

/// Pattern with the given trits.
pub fn trit_pattern(trits: &[i8]) -> usize {
    ternary_index(trits)
}

fn checked_pow(radix: usize, exp: usize) -> Result<usize> {
    radix
        .checked_pow(exp as u32)
        .filter(|&n| n <= 1 << 24)
        .ok_or_else(|| Error::invalid(format!("{radix}^{exp} table is too large")))
}

/// Deterministic mapping from input pattern to output pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicTable {
    n_in: usize,
    n_out: usize,
    radix: usize,
    rows: Vec<usize>,
}

impl LogicTable {
    pub fn new(n_in: usize, n_out: usize, radix: usize, rows: Vec<usize>) -> Result<Self> {
        if radix != 2 && radix != 3 {
            return Err(Error::invalid(format!("radix {radix} is not 2 or 3")));
        }
        let n_rows = checked_pow(radix, n_in)?;
        let n_patterns = checked_pow(radix, n_out)?;
        if rows.len() != n_rows {
            return Err(Error::invalid(format!(
                "logic table needs {n_rows} rows, got {}",
                rows.len()
            )));
        }
        if let Some(bad) = rows.iter().find(|&&r| r >= n_patterns) {
            return Err(Error::invalid(format!(
                "output pattern {bad} outside [0, {n_patterns})"
            )));
        }
        Ok(LogicTable {
            n_in,
            n_out,
            radix,
            rows,
        })
    }

    pub fn binary(n_in: usize, n_out: usize, rows: Vec<usize>) -> Result<Self> {
        Self::new(n_in, n_out, 2, rows)
    }

    pub fn ternary(n_in: usize, n_out: usize, rows: Vec<usize>) -> Result<Self> {
        Self::new(n_in, n_out, 3, rows)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn radix(&self) -> usize {
        self.radix
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    #[inline]
    pub fn lookup(&self, index: usize) -> usize {
        self.rows[index]
    }
}

/// Row-stochastic matrix from input pattern to output-pattern probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable<S> {
    n_in: usize,
    n_out: usize,
    radix: usize,
    width: usize,
    entries: Vec<S>,
}

impl<S: Scalar> ProbabilityTable<S> {
    /// Normalizes every raw row.
    pub fn from_raw(n_in: usize, n_out: usize, radix: usize, raw: &[S]) -> Result<Self> {
        if radix != 2 && radix != 3 {
            return Err(Error::invalid(format!("radix {radix} is not 2 or 3")));
        }
        let n_rows = checked_pow(radix, n_in)?;
        let width = checked_pow(radix, n_out)?;
        if raw.len() != n_rows * width {
            return Err(Error::invalid(format!(
                "probability table needs {} entries, got {}",
                n_rows * width,
                raw.len()
            )));
        }
        let mut entries = Vec::with_capacity(raw.len());
        for row in raw.chunks(width) {
            entries.extend(normalize_row(row)?);
        }
        Ok(ProbabilityTable {
            n_in,
            n_out,
            radix,
            width,
            entries,
        })
    }

    /// Table taking already-normalized rows, rejecting rows that are not.
    pub fn from_rows(n_in: usize, n_out: usize, radix: usize, rows: &[Vec<S>]) -> Result<Self> {
        let flat: Vec<S> = rows.iter().flatten().copied().collect();
        let table = Self {
            n_in,
            n_out,
            radix,
            width: checked_pow(radix, n_out)?,
            entries: flat,
        };
        if rows.len() != checked_pow(radix, n_in)? || rows.iter().any(|r| r.len() != table.width) {
            return Err(Error::invalid("probability table has the wrong shape"));
        }
        if !table.is_normalized() {
            return Err(Error::invalid("probability rows must each sum to 1"));
        }
        Ok(table)
    }

    /// Point-mass table reproducing a deterministic logic table.
    pub fn indicator(logic: &LogicTable) -> Self {
        let width = logic.radix.pow(logic.n_out as u32);
        let mut entries = vec![S::zero(); logic.rows.len() * width];
        for (r, &pattern) in logic.rows.iter().enumerate() {
            entries[r * width + pattern] = S::one();
        }
        ProbabilityTable {
            n_in: logic.n_in,
            n_out: logic.n_out,
            radix: logic.radix,
            width,
            entries,
        }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn radix(&self) -> usize {
        self.radix
    }

    pub fn n_rows(&self) -> usize {
        self.entries.len() / self.width
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    #[inline]
    pub fn row(&self, index: usize) -> &[S] {
        &self.entries[index * self.width..(index + 1) * self.width]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, index: usize) -> &mut [S] {
        &mut self.entries[index * self.width..(index + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.entries.chunks(self.width)
    }

    pub fn is_normalized(&self) -> bool {
        self.rows().all(|row| {
            let sum: S = row.iter().copied().sum();
            row.iter().all(|&p| p >= S::zero() && p <= S::one())
                && (sum.as_f64() - 1.0).abs() <= S::ROW_TOLERANCE
        })
    }

    /// Inverse-CDF draw from row `index` given `u` in `[0, 1)`.
    #[inline]
    pub fn sample_with(&self, index: usize, u: S) -> usize {
        sample_row(self.row(index), u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> usize {
        self.sample_with(index, S::of(rng.gen::<f64>()))
    }
}

/// Inverse-CDF over one row. Rounding shortfall falls to the last bucket with
/// nonzero mass.
#[inline]
pub fn sample_row<S: Scalar>(row: &[S], u: S) -> usize {
    let mut acc = S::zero();
    let mut last_nonzero = row.len() - 1;
    for (j, &p) in row.iter().enumerate() {
        if p > S::zero() {
            acc += p;
            last_nonzero = j;
            if u < acc {
                return j;
            }
        }
    }
    last_nonzero
}

/// Weights of a single-layer tanh network, `n_out` rows by `n_in` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix<S> {
    n_in: usize,
    n_out: usize,
    weights: Vec<S>,
}

impl<S: Scalar> WeightMatrix<S> {
    pub fn new(n_in: usize, n_out: usize, weights: Vec<S>) -> Result<Self> {
        if weights.len() != n_in * n_out {
            return Err(Error::invalid(format!(
                "weight matrix needs {} values, got {}",
                n_in * n_out,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights must be finite"));
        }
        Ok(WeightMatrix {
            n_in,
            n_out,
            weights,
        })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// Weight from input `i` to output `j`.
    pub fn weight(&self, i: usize, j: usize) -> S {
        self.weights[j * self.n_in + i]
    }

    /// Activation of output `j`: `tanh(sum_i inputs[i] * w[i][j])`.
    #[inline]
    pub fn activate(&self, j: usize, inputs: &[S]) -> S {
        let row = &self.weights[j * self.n_in..(j + 1) * self.n_in];
        row.iter()
            .zip(inputs)
            .fold(S::zero(), |acc, (&w, &x)| acc + w * x)
            .tanh()
    }
}

/// Output bits of a deterministic gate for the given input bits.
pub fn eval_deterministic(table: &LogicTable, inputs: &[u8]) -> Vec<u8> {
    let pattern = table.lookup(binary_index(inputs));
    (0..table.n_out).map(|j| pattern_bit(pattern, j)).collect()
}

/// Output bits sampled from the row selected by the input bits.
pub fn eval_probabilistic<S: Scalar, R: Rng + ?Sized>(
    table: &ProbabilityTable<S>,
    inputs: &[u8],
    rng: &mut R,
) -> Vec<u8> {
    let pattern = table.sample(binary_index(inputs), rng);
    (0..table.n_out).map(|j| pattern_bit(pattern, j)).collect()
}

/// tanh outputs of an ANN gate on raw (not discretized) inputs.
pub fn eval_ann<S: Scalar>(weights: &WeightMatrix<S>, inputs: &[S]) -> Vec<S> {
    (0..weights.n_out)
        .map(|j| weights.activate(j, inputs))
        .collect()
}

/// Output trits of a deterministic ternary gate.
pub fn eval_ternary_deterministic(table: &LogicTable, inputs: &[i8]) -> Vec<i8> {
    let pattern = table.lookup(ternary_index(inputs));
    (0..table.n_out).map(|j| pattern_trit(pattern, j)).collect()
}

/// Output trits sampled from a ternary probability table.
pub fn eval_ternary_probabilistic<S: Scalar, R: Rng + ?Sized>(
    table: &ProbabilityTable<S>,
    inputs: &[i8],
    rng: &mut R,
) -> Vec<i8> {
    let pattern = table.sample(ternary_index(inputs), rng);
    (0..table.n_out).map(|j| pattern_trit(pattern, j)).collect()
}

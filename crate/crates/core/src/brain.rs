//! The state buffer and its synchronous t -> t+1 update.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::decoder::{DecodeConfig, MAX_NODES};
use crate::error::{Error, Result};
use crate::gates::{discretize_binary, GateBlueprint, GateRuntime};
use crate::rng::gate_stream;
use crate::scalar::Scalar;

/// What a clamped node is forced to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClampMode {
    Zero,
    One,
    /// A fresh random bit every time the clamp is applied.
    Random,
}

impl std::str::FromStr for ClampMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(ClampMode::Zero),
            "one" => Ok(ClampMode::One),
            "random" => Ok(ClampMode::Random),
            _ => Err(Error::invalid(format!("unknown clamp mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Brain<S: Scalar = f64> {
    buffer: Vec<S>,
    next: Vec<S>,
    gates: Vec<GateRuntime<S>>,
    /// Substream key of each gate; survives reordering and removal.
    keys: Vec<usize>,
    input_nodes: Vec<usize>,
    output_nodes: Vec<usize>,
    zero_outputs_before_update: bool,
    clamps: Vec<(usize, ClampMode)>,
    seed: u64,
    updates: u64,
}

impl<S: Scalar> Brain<S> {
    pub fn new(
        blueprints: Vec<GateBlueprint<S>>,
        n_nodes: usize,
        input_nodes: Vec<usize>,
        output_nodes: Vec<usize>,
        zero_outputs_before_update: bool,
    ) -> Result<Self> {
        if n_nodes == 0 || n_nodes > MAX_NODES {
            return Err(Error::invalid(format!(
                "buffer size {n_nodes} outside [1, {MAX_NODES}]"
            )));
        }
        if let Some(&bad) = input_nodes
            .iter()
            .chain(&output_nodes)
            .find(|&&n| n >= n_nodes)
        {
            return Err(Error::invalid(format!(
                "node {bad} outside buffer of {n_nodes}"
            )));
        }
        if input_nodes.iter().any(|n| output_nodes.contains(n)) {
            return Err(Error::invalid("input and output nodes overlap"));
        }
        for bp in &blueprints {
            bp.validate(n_nodes)?;
        }
        Ok(Brain {
            keys: (0..blueprints.len()).collect(),
            buffer: vec![S::zero(); n_nodes],
            next: vec![S::zero(); n_nodes],
            gates: blueprints.into_iter().map(GateRuntime::new).collect(),
            input_nodes,
            output_nodes,
            zero_outputs_before_update,
            clamps: Vec::new(),
            seed: 0,
            updates: 0,
        })
    }

    pub fn from_config(blueprints: Vec<GateBlueprint<S>>, cfg: &DecodeConfig) -> Result<Self> {
        Self::new(
            blueprints,
            cfg.n_nodes,
            cfg.input_nodes(),
            cfg.output_nodes(),
            cfg.zero_outputs_before_update,
        )
    }

    pub fn n_nodes(&self) -> usize {
        self.buffer.len()
    }

    pub fn buffer(&self) -> &[S] {
        &self.buffer
    }

    pub fn gates(&self) -> &[GateRuntime<S>] {
        &self.gates
    }

    pub fn blueprints(&self) -> impl Iterator<Item = &GateBlueprint<S>> {
        self.gates.iter().map(GateRuntime::blueprint)
    }

    pub fn input_nodes(&self) -> &[usize] {
        &self.input_nodes
    }

    pub fn output_nodes(&self) -> &[usize] {
        &self.output_nodes
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn set_zero_outputs_before_update(&mut self, on: bool) {
        self.zero_outputs_before_update = on;
    }

    /// Seed of the per-gate random substreams for the coming lifetime.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }

    pub fn is_deterministic(&self) -> bool {
        self.clamps.iter().all(|(_, m)| *m != ClampMode::Random)
            && self.gates.iter().all(|g| !g.kind().is_stochastic())
    }

    /// Same brain with gate `index` removed.
    pub fn without_gate(&self, index: usize) -> Result<Self> {
        if index >= self.gates.len() {
            return Err(Error::invalid(format!(
                "gate {index} out of range for {} gates",
                self.gates.len()
            )));
        }
        let mut b = self.clone();
        b.gates.remove(index);
        b.keys.remove(index);
        b.reset();
        Ok(b)
    }

    /// Same brain with the gate list reordered; `order[i]` is the old index
    /// of the new i-th gate.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.gates.len()];
        if order.len() != seen.len()
            || !order
                .iter()
                .all(|&i| i < seen.len() && !std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::invalid("gate order is not a permutation"));
        }
        let mut b = self.clone();
        b.gates = order.iter().map(|&i| self.gates[i].clone()).collect();
        b.keys = order.iter().map(|&i| self.keys[i]).collect();
        b.reset();
        Ok(b)
    }

    /// Forces `node` to a fixed or random value after every input write and
    /// every update.
    pub fn clamp(&mut self, node: usize, mode: ClampMode) -> Result<()> {
        if node >= self.buffer.len() {
            return Err(Error::invalid(format!("node {node} outside buffer")));
        }
        self.clamps.retain(|(n, _)| *n != node);
        self.clamps.push((node, mode));
        self.apply_clamps();
        Ok(())
    }

    fn apply_clamps(&mut self) {
        for &(node, mode) in &self.clamps {
            self.buffer[node] = match mode {
                ClampMode::Zero => S::zero(),
                ClampMode::One => S::one(),
                ClampMode::Random => {
                    let mut rng = gate_stream(self.seed, usize::MAX - node, self.updates);
                    if rng.gen::<bool>() {
                        S::one()
                    } else {
                        S::zero()
                    }
                }
            };
        }
    }

    /// Quiescent state: buffer all zero, gate state back to its start.
    pub fn reset(&mut self) {
        self.buffer.iter_mut().for_each(|x| *x = S::zero());
        self.gates.iter_mut().for_each(GateRuntime::reset);
        self.updates = 0;
        self.apply_clamps();
    }

    /// Writes the percept into the input nodes.
    pub fn set_inputs(&mut self, percept: &[S]) -> Result<()> {
        if percept.len() != self.input_nodes.len() {
            return Err(Error::invalid(format!(
                "percept has {} values for {} input nodes",
                percept.len(),
                self.input_nodes.len()
            )));
        }
        for (&n, &x) in self.input_nodes.iter().zip(percept) {
            self.buffer[n] = x;
        }
        self.apply_clamps();
        Ok(())
    }

    /// One synchronous update: every gate reads the buffer at t and their
    /// outputs are summed into a zeroed buffer for t+1.
    pub fn update(&mut self) {
        if self.zero_outputs_before_update {
            for &n in &self.output_nodes {
                self.buffer[n] = S::zero();
            }
        }
        self.next.iter_mut().for_each(|x| *x = S::zero());
        for (gate, &key) in self.gates.iter_mut().zip(&self.keys) {
            let mut rng = if gate.kind().is_stochastic() {
                gate_stream(self.seed, key, self.updates)
            } else {
                SplitMix64::seed_from_u64(0)
            };
            gate.evaluate(&self.buffer, &mut self.next, &mut rng);
        }
        std::mem::swap(&mut self.buffer, &mut self.next);
        self.updates += 1;
        self.apply_clamps();
    }

    pub fn read_outputs(&self) -> Vec<S> {
        self.output_nodes.iter().map(|&n| self.buffer[n]).collect()
    }

    /// Writes the percept, runs `ticks` updates with the inputs held, and
    /// returns the outputs.
    pub fn step_agent(&mut self, percept: &[S], ticks: usize) -> Result<Vec<S>> {
        self.step_recorded(percept, ticks, None)
    }

    /// As `step_agent`, appending one trace row per update.
    pub fn step_recorded(
        &mut self,
        percept: &[S],
        ticks: usize,
        mut trace: Option<&mut Trace>,
    ) -> Result<Vec<S>> {
        if ticks == 0 {
            return Err(Error::invalid("ticks_per_percept must be at least 1"));
        }
        for _ in 0..ticks {
            self.set_inputs(percept)?;
            let bits = trace.as_ref().map(|_| self.state_bits());
            self.update();
            if let (Some(t), Some(bits)) = (trace.as_deref_mut(), bits) {
                t.rows.push(TraceRow {
                    update: self.updates - 1,
                    percept: percept.iter().map(|x| x.as_f64()).collect(),
                    bits,
                    outputs: self.read_outputs().iter().map(|x| x.as_f64()).collect(),
                });
            }
        }
        Ok(self.read_outputs())
    }

    pub fn state_bits(&self) -> Vec<u8> {
        self.buffer.iter().map(|&x| discretize_binary(x)).collect()
    }

    /// Empty trace matching this brain's layout.
    pub fn new_trace(&self) -> Trace {
        Trace {
            n_nodes: self.n_nodes(),
            input_nodes: self.input_nodes.clone(),
            output_nodes: self.output_nodes.clone(),
            rows: Vec::new(),
        }
    }
}

/// One brain update as recorded: the discretized buffer after the percept was
/// written (before the update), and the raw outputs after it.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub update: u64,
    pub percept: Vec<f64>,
    pub bits: Vec<u8>,
    pub outputs: Vec<f64>,
}

impl TraceRow {
    /// `sum bit_i * 2^i` over all nodes.
    pub fn label(&self) -> u128 {
        label_of(self.bits.iter().copied().enumerate())
    }
}

pub(crate) fn label_of(bits: impl Iterator<Item = (usize, u8)>) -> u128 {
    bits.fold(0u128, |acc, (i, b)| acc | (u128::from(b & 1) << i))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub n_nodes: usize,
    pub input_nodes: Vec<usize>,
    pub output_nodes: Vec<usize>,
    pub rows: Vec<TraceRow>,
}

fn join(nodes: &[usize]) -> String {
    nodes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl Trace {
    /// CSV with a `# nodes=.. inputs=.. outputs=..` preamble, then
    /// `update,in_*,label,out_*` rows.
    pub fn to_csv(&self) -> String {
        self.to_csv_with(&[], |_| Vec::new())
    }

    /// CSV with extra trailing columns per row.
    pub(crate) fn to_csv_with(
        &self,
        extra_headers: &[&str],
        extra: impl Fn(usize) -> Vec<String>,
    ) -> String {
        let mut s = format!(
            "# nodes={} inputs={} outputs={}\n",
            self.n_nodes,
            join(&self.input_nodes),
            join(&self.output_nodes)
        );
        let mut header = vec!["update".to_string()];
        header.extend((0..self.input_nodes.len()).map(|i| format!("in_{i}")));
        header.push("label".into());
        header.extend((0..self.output_nodes.len()).map(|i| format!("out_{i}")));
        header.extend(extra_headers.iter().map(|h| h.to_string()));
        s.push_str(&header.join(","));
        s.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            write!(s, "{}", row.update).unwrap();
            for x in &row.percept {
                write!(s, ",{x}").unwrap();
            }
            write!(s, ",{}", row.label()).unwrap();
            for x in &row.outputs {
                write!(s, ",{x}").unwrap();
            }
            for x in extra(r) {
                write!(s, ",{x}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Reads a trace CSV, ignoring any columns after the outputs and any
    /// other `#` lines.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, pre) = lines.next().ok_or_else(|| Error::parse(0, "empty trace"))?;
        let mut n_nodes = None;
        let mut input_nodes = None;
        let mut output_nodes = None;
        for f in pre.trim_start_matches('#').split_whitespace() {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| Error::parse(0, format!("bad preamble field `{f}`")))?;
            let nodes = || -> Result<Vec<usize>> {
                if v.is_empty() {
                    return Ok(Vec::new());
                }
                v.split(',')
                    .map(|x| {
                        x.parse()
                            .map_err(|_| Error::parse(0, format!("bad node `{x}`")))
                    })
                    .collect()
            };
            match k {
                "nodes" => {
                    n_nodes = Some(v.parse().map_err(|_| Error::parse(0, "bad node count"))?)
                }
                "inputs" => input_nodes = Some(nodes()?),
                "outputs" => output_nodes = Some(nodes()?),
                _ => return Err(Error::parse(0, format!("unknown preamble key `{k}`"))),
            }
        }
        let (Some(n_nodes), Some(input_nodes), Some(output_nodes)) =
            (n_nodes, input_nodes, output_nodes)
        else {
            return Err(Error::parse(0, "preamble needs nodes, inputs and outputs"));
        };
        if n_nodes > MAX_NODES {
            return Err(Error::parse(0, "too many nodes for a label"));
        }
        let mut trace = Trace {
            n_nodes,
            input_nodes,
            output_nodes,
            rows: Vec::new(),
        };
        let _header = lines.next();
        let n_in = trace.input_nodes.len();
        let n_out = trace.output_nodes.len();
        let mut offset = text.lines().take(2).map(|l| l.len() + 1).sum::<usize>();
        for (_, line) in lines {
            let here = offset;
            offset += line.len() + 1;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() < 2 + n_in + n_out {
                return Err(Error::parse(here, "trace row is too short"));
            }
            let bad = |c: &str| Error::parse(here, format!("bad cell `{c}`"));
            let num = |c: &str| c.parse::<f64>().map_err(|_| bad(c));
            let label: u128 = cells[1 + n_in].parse().map_err(|_| bad(cells[1 + n_in]))?;
            trace.rows.push(TraceRow {
                update: cells[0].parse().map_err(|_| bad(cells[0]))?,
                percept: cells[1..1 + n_in]
                    .iter()
                    .map(|c| num(c))
                    .collect::<Result<_>>()?,
                bits: (0..n_nodes).map(|i| ((label >> i) & 1) as u8).collect(),
                outputs: cells[2 + n_in..2 + n_in + n_out]
                    .iter()
                    .map(|c| num(c))
                    .collect::<Result<_>>()?,
            });
        }
        Ok(trace)
    }
}

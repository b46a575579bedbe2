//! Perception-action environments that score an agent over one lifetime.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::brain::{Brain, Trace};
use crate::error::{Error, Result};
use crate::gates::discretize_binary;
use crate::rng::{mix, stream};
use crate::scalar::Scalar;

pub const DEFAULT_LIFETIME: usize = 200;

const ENV_LABEL: u64 = 0x656e_7669;
const AGENT_LABEL: u64 = 0x6167_656e;

/// Anything a task can drive: percepts in, raw outputs out.
pub trait Agent {
    /// Resets the agent and fixes its random streams for one lifetime.
    fn begin_lifetime(&mut self, seed: u64);

    fn act(&mut self, percept: &[f64], ticks: usize, trace: Option<&mut Trace>)
        -> Result<Vec<f64>>;

    /// An empty trace if the agent can record one.
    fn new_trace(&self) -> Option<Trace> {
        None
    }
}

impl<S: Scalar> Agent for Brain<S> {
    fn begin_lifetime(&mut self, seed: u64) {
        self.set_seed(seed);
        self.reset();
    }

    fn act(
        &mut self,
        percept: &[f64],
        ticks: usize,
        trace: Option<&mut Trace>,
    ) -> Result<Vec<f64>> {
        let p: Vec<S> = percept.iter().map(|&x| S::of(x)).collect();
        let out = self.step_recorded(&p, ticks, trace)?;
        Ok(out.into_iter().map(Scalar::as_f64).collect())
    }

    fn new_trace(&self) -> Option<Trace> {
        Some(Brain::new_trace(self))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaskSpec {
    pub n_inputs: usize,
    pub n_outputs: usize,
    /// Percepts per lifetime.
    pub lifetime: usize,
    pub ticks_per_percept: usize,
}

/// What happened at one percept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRecord {
    /// Discretized outputs, bit j weighted 2^j.
    pub action: u64,
    pub scored: bool,
    pub hit: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Recording {
    pub trace: Option<Trace>,
    pub steps: Vec<StepRecord>,
}

pub trait Task: Send + Sync {
    fn spec(&self) -> TaskSpec;

    /// One lifetime. The environment and the agent draw from streams derived
    /// from `seed` only.
    fn run(&self, agent: &mut dyn Agent, seed: u64, record: Option<&mut Recording>) -> Result<f64>;

    fn evaluate(&self, agent: &mut dyn Agent, seed: u64) -> Result<f64> {
        self.run(agent, seed, None)
    }
}

fn action_of(outputs: &[f64]) -> u64 {
    outputs
        .iter()
        .enumerate()
        .fold(0, |a, (j, &x)| a | (u64::from(discretize_binary(x)) << j))
}

/// Shared loop: feeds percepts, records, and counts hits.
struct Episode<'a> {
    agent: &'a mut dyn Agent,
    ticks: usize,
    record: Option<&'a mut Recording>,
}

impl<'a> Episode<'a> {
    fn new(
        agent: &'a mut dyn Agent,
        seed: u64,
        ticks: usize,
        mut record: Option<&'a mut Recording>,
    ) -> Self {
        agent.begin_lifetime(mix(&[seed, AGENT_LABEL]));
        if let Some(r) = record.as_deref_mut() {
            r.trace = agent.new_trace();
            r.steps.clear();
        }
        Episode {
            agent,
            ticks,
            record,
        }
    }

    fn act(&mut self, percept: &[f64]) -> Result<u64> {
        let trace = self.record.as_deref_mut().and_then(|r| r.trace.as_mut());
        let out = self.agent.act(percept, self.ticks, trace)?;
        Ok(action_of(&out))
    }

    fn log(&mut self, action: u64, scored: bool, hit: bool) {
        if let Some(r) = self.record.as_deref_mut() {
            r.steps.push(StepRecord {
                action,
                scored,
                hit,
            });
        }
    }
}

fn check_lifetime(lifetime: usize, ticks: usize) -> Result<()> {
    if lifetime == 0 || ticks == 0 {
        return Err(Error::invalid(
            "lifetime and ticks_per_percept must be at least 1",
        ));
    }
    Ok(())
}

/// Report, after each percept, the bit seen `k - 1` percepts before it.
///
/// An output read after the update on percept t carries at most the
/// information of percept t, so k = 1 asks for the current bit one update
/// later. Percepts t in `k..T` are scored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NBack {
    pub k: usize,
    pub lifetime: usize,
    pub ticks_per_percept: usize,
}

impl NBack {
    pub fn new(k: usize, lifetime: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("n-back delay k must be at least 1"));
        }
        check_lifetime(lifetime, 1)?;
        if lifetime <= k {
            return Err(Error::invalid(format!(
                "lifetime {lifetime} leaves nothing to score for k={k}"
            )));
        }
        Ok(NBack {
            k,
            lifetime,
            ticks_per_percept: 1,
        })
    }
}

impl Task for NBack {
    fn spec(&self) -> TaskSpec {
        TaskSpec {
            n_inputs: 1,
            n_outputs: 1,
            lifetime: self.lifetime,
            ticks_per_percept: self.ticks_per_percept,
        }
    }

    fn run(&self, agent: &mut dyn Agent, seed: u64, record: Option<&mut Recording>) -> Result<f64> {
        check_lifetime(self.lifetime, self.ticks_per_percept)?;
        let mut env = stream(seed, &[ENV_LABEL]);
        let bits: Vec<u64> = (0..self.lifetime).map(|_| env.gen_range(0..2)).collect();
        let mut ep = Episode::new(agent, seed, self.ticks_per_percept, record);
        let mut points = 0usize;
        for t in 0..self.lifetime {
            let action = ep.act(&[bits[t] as f64])?;
            let scored = t >= self.k;
            let hit = scored && (action & 1) == bits[t + 1 - self.k];
            points += usize::from(hit);
            ep.log(action, scored, hit);
        }
        Ok(points as f64 / (self.lifetime - self.k) as f64)
    }
}

/// Learn a hidden stimulus-to-action mapping from a delayed reward bit.
///
/// Percept: two stimulus bits then the reward bit, which is 1 iff the
/// previous action was correct. Scores the last `T / 2` trials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Association {
    pub lifetime: usize,
    pub ticks_per_percept: usize,
}

impl Association {
    pub fn new(lifetime: usize) -> Result<Self> {
        if lifetime < 2 {
            return Err(Error::invalid("association lifetime must be at least 2"));
        }
        Ok(Association {
            lifetime,
            ticks_per_percept: 1,
        })
    }

    /// The hidden mapping used for `seed`.
    pub fn mapping(seed: u64) -> [u64; 4] {
        let mut env = stream(seed, &[ENV_LABEL, 1]);
        std::array::from_fn(|_| env.gen_range(0..2))
    }
}

impl Task for Association {
    fn spec(&self) -> TaskSpec {
        TaskSpec {
            n_inputs: 3,
            n_outputs: 1,
            lifetime: self.lifetime,
            ticks_per_percept: self.ticks_per_percept,
        }
    }

    fn run(&self, agent: &mut dyn Agent, seed: u64, record: Option<&mut Recording>) -> Result<f64> {
        check_lifetime(self.lifetime, self.ticks_per_percept)?;
        let mapping = Self::mapping(seed);
        let mut env = stream(seed, &[ENV_LABEL, 2]);
        let mut ep = Episode::new(agent, seed, self.ticks_per_percept, record);
        let first_scored = self.lifetime - self.lifetime / 2;
        let mut reward = 0.0;
        let mut points = 0usize;
        for t in 0..self.lifetime {
            let s: usize = env.gen_range(0..4);
            let percept = [(s & 1) as f64, (s >> 1) as f64, reward];
            let action = ep.act(&percept)?;
            let correct = (action & 1) == mapping[s];
            reward = if correct { 1.0 } else { 0.0 };
            let scored = t >= first_scored;
            points += usize::from(scored && correct);
            ep.log(action, scored, scored && correct);
        }
        Ok(points as f64 / (self.lifetime / 2) as f64)
    }
}

/// Parses `nback`, `nback:<k>` or `association`.
pub fn task_from_name(name: &str, lifetime: usize, ticks: usize) -> Result<Box<dyn Task>> {
    check_lifetime(lifetime, ticks)?;
    let (base, arg) = name.split_once(':').unwrap_or((name, ""));
    match base {
        "nback" => {
            let k = if arg.is_empty() {
                1
            } else {
                arg.parse()
                    .map_err(|_| Error::invalid(format!("bad n-back delay `{arg}`")))?
            };
            let mut t = NBack::new(k, lifetime)?;
            t.ticks_per_percept = ticks;
            Ok(Box::new(t))
        }
        "association" if arg.is_empty() => {
            let mut t = Association::new(lifetime)?;
            t.ticks_per_percept = ticks;
            Ok(Box::new(t))
        }
        _ => Err(Error::invalid(format!("unknown task `{name}`"))),
    }
}

/// A lifetime log with its summary tables.
#[derive(Clone, Debug)]
pub struct BehaviorLog {
    pub recording: Recording,
    pub score: f64,
    pub frequencies: BTreeMap<u64, u64>,
    pub bigrams: BTreeMap<(u64, u64), u64>,
}

pub fn action_frequencies(steps: &[StepRecord]) -> BTreeMap<u64, u64> {
    let mut f = BTreeMap::new();
    for s in steps {
        *f.entry(s.action).or_insert(0) += 1;
    }
    f
}

/// Counts of action `a` immediately followed by action `b`.
pub fn action_bigrams(steps: &[StepRecord]) -> BTreeMap<(u64, u64), u64> {
    let mut f = BTreeMap::new();
    for w in steps.windows(2) {
        *f.entry((w[0].action, w[1].action)).or_insert(0) += 1;
    }
    f
}

pub fn record_behavior(agent: &mut dyn Agent, task: &dyn Task, seed: u64) -> Result<BehaviorLog> {
    let mut recording = Recording::default();
    let score = task.run(agent, seed, Some(&mut recording))?;
    Ok(BehaviorLog {
        frequencies: action_frequencies(&recording.steps),
        bigrams: action_bigrams(&recording.steps),
        recording,
        score,
    })
}

impl BehaviorLog {
    /// The trace CSV with `action,scored,hit` columns on the last update of
    /// each percept, then a `# score=` line.
    pub fn to_csv(&self) -> Result<String> {
        let trace = self
            .recording
            .trace
            .as_ref()
            .ok_or_else(|| Error::invalid("agent recorded no trace"))?;
        let ticks = trace.rows.len() / self.recording.steps.len().max(1);
        let mut s = trace.to_csv_with(&["action", "scored", "hit"], |r| {
            if (r + 1) % ticks.max(1) != 0 {
                return vec![String::new(); 3];
            }
            let st = self.recording.steps[r / ticks.max(1)];
            vec![
                st.action.to_string(),
                u8::from(st.scored).to_string(),
                u8::from(st.hit).to_string(),
            ]
        });
        writeln!(s, "# score={}", self.score).unwrap();
        Ok(s)
    }

    pub fn frequencies_csv(&self) -> String {
        let mut s = String::from("action,count\n");
        for (a, c) in &self.frequencies {
            writeln!(s, "{a},{c}").unwrap();
        }
        s
    }

    pub fn bigrams_csv(&self) -> String {
        let mut s = String::from("action,next_action,count\n");
        for ((a, b), c) in &self.bigrams {
            writeln!(s, "{a},{b},{c}").unwrap();
        }
        s
    }
}

/// Reads `action` columns and the `# score=` trailer back from a behavior
/// log.
pub fn parse_behavior_csv(text: &str) -> Result<(Trace, Vec<StepRecord>, f64)> {
    let trace = Trace::from_csv(text)?;
    let mut steps = Vec::new();
    let mut score = None;
    let extra_from = 2 + trace.input_nodes.len() + trace.output_nodes.len();
    for line in text.lines().skip(2) {
        if let Some(v) = line.strip_prefix("# score=") {
            score = Some(
                v.parse()
                    .map_err(|_| Error::parse(0, "bad score trailer"))?,
            );
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        match cells.get(extra_from..extra_from + 3) {
            Some([a, sc, h]) if !a.is_empty() => steps.push(StepRecord {
                action: a
                    .parse()
                    .map_err(|_| Error::parse(0, format!("bad action `{a}`")))?,
                scored: *sc == "1",
                hit: *h == "1",
            }),
            _ => {}
        }
    }
    let score = score.ok_or_else(|| Error::parse(text.len(), "missing score trailer"))?;
    Ok((trace, steps, score))
}

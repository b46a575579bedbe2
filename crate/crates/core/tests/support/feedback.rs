//! The reward setup for a single feedback gate, run two ways: through a real
//! brain and through a direct simulation of the update rule.

use markov_brain::brain::Brain;
use markov_brain::gates::{FeedbackParams, GateBlueprint, Payload, ProbabilityTable};
use markov_brain::rng::stream;
use rand::Rng;

pub const DELTA_MAX: f64 = 0.1;
pub const UPDATES: usize = 1000;
pub const TARGET: f64 = 0.9;

/// One random input bit on node 0, output on node 1. The output node is also
/// the reward node, so an output of 1 is rewarded on the next update. Node 2
/// is never written and serves as the punishment node.
pub fn reward_brain() -> Brain<f64> {
    let params = FeedbackParams {
        table: ProbabilityTable::from_raw(1, 1, 2, &[1.0; 4]).unwrap(),
        capacity: 1,
        delta_max: DELTA_MAX,
        floor: 0.01,
        pos_node: 1,
        neg_node: 2,
    };
    let gate = GateBlueprint::new(vec![0], vec![1], Payload::Feedback(params), 3).unwrap();
    Brain::new(vec![gate], 3, vec![0], vec![1], false).unwrap()
}

/// `P[row][1]` for both rows after `UPDATES` updates of the real brain.
pub fn run_brain(seed: u64) -> [f64; 2] {
    let mut brain = reward_brain();
    brain.set_seed(seed);
    brain.reset();
    let mut env = stream(seed, &[0xfeed]);
    for _ in 0..UPDATES {
        brain
            .step_agent(&[f64::from(env.gen_range(0..2u8))], 1)
            .unwrap();
    }
    let table = brain.gates()[0].feedback_state().unwrap().table();
    [table.row(0)[1], table.row(1)[1]]
}

/// The same experiment straight from the rule: a rewarded entry p becomes
/// (p + d) / (1 + d) with d uniform on [0, DELTA_MAX).
pub fn run_oracle(rng: &mut impl Rng) -> [f64; 2] {
    let mut p = [0.5, 0.5];
    let mut last: Option<(usize, bool)> = None;
    for _ in 0..UPDATES {
        if let Some((row, true)) = last {
            let d = DELTA_MAX * rng.gen::<f64>();
            p[row] = (p[row] + d) / (1.0 + d);
        }
        let row = rng.gen_range(0..2);
        last = Some((row, rng.gen::<f64>() < p[row]));
    }
    p
}

pub fn learned(p: [f64; 2]) -> bool {
    p.iter().all(|&x| x > TARGET)
}

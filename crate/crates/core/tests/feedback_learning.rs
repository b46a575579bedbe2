//! Within-lifetime learning by hand-wired feedback gates.

mod support;

use markov_brain::brain::Brain;
use markov_brain::gates::{FeedbackParams, GateBlueprint, LogicTable, Payload, ProbabilityTable};
use markov_brain::rng::stream;
use markov_brain::tasks::{Association, Task};
use support::feedback::{learned, run_brain, run_oracle};

/// Stimulus bits 0,1 and reward bit 2 in, action on 3. Node 4 carries the
/// negated reward, written by a NOT gate, so it lags the reward by one update.
fn association_learner(delta_max: f64, capacity: usize) -> Brain<f64> {
    let feedback = FeedbackParams {
        table: ProbabilityTable::from_raw(2, 1, 2, &[1.0; 8]).unwrap(),
        capacity,
        delta_max,
        floor: 0.01,
        pos_node: 2,
        neg_node: 4,
    };
    let not = LogicTable::binary(1, 1, vec![1, 0]).unwrap();
    let gates = vec![
        GateBlueprint::new(vec![0, 1], vec![3], Payload::Feedback(feedback), 5).unwrap(),
        GateBlueprint::new(vec![2], vec![4], Payload::Deterministic(not), 5).unwrap(),
    ];
    Brain::new(gates, 5, vec![0, 1, 2], vec![3], false).unwrap()
}

fn mean_over_lifetimes(brain: &mut Brain<f64>, task: &Association, n: u64) -> f64 {
    (0..n)
        .map(|seed| task.evaluate(brain, seed).unwrap())
        .sum::<f64>()
        / n as f64
}

#[test]
fn feedback_gate_learns_the_association() {
    let task = Association::new(200).unwrap();
    let mut learner = association_learner(0.3, 1);
    let mean = mean_over_lifetimes(&mut learner, &task, 50);
    println!("association mean fitness over 50 lifetimes: {mean:.3}");
    assert!(mean > 0.8, "mean fitness {mean}");
}

#[test]
fn untrained_gate_stays_at_chance() {
    let task = Association::new(200).unwrap();
    let mut learner = association_learner(0.0, 1);
    let mean = mean_over_lifetimes(&mut learner, &task, 50);
    assert!((mean - 0.5).abs() < 0.05, "mean fitness {mean}");
}

#[test]
fn rewarded_output_is_learned() {
    let mut rng = stream(99, &[]);
    let trials = 2000;
    let oracle_rate = (0..trials)
        .filter(|_| learned(run_oracle(&mut rng)))
        .count() as f64
        / trials as f64;
    let brain: Vec<[f64; 2]> = (0..50).map(run_brain).collect();
    let hits = brain.iter().filter(|p| learned(**p)).count();
    println!("oracle success rate {oracle_rate:.4}, brain {hits}/50");
    assert!(oracle_rate >= 0.95);
    assert!(hits >= 45);

    // the brain's final probabilities should follow the oracle's distribution
    let oracle_mean = (0..trials).map(|_| run_oracle(&mut rng)[0]).sum::<f64>() / trials as f64;
    let brain_mean = brain.iter().map(|p| p[0]).sum::<f64>() / 50.0;
    assert!(
        (oracle_mean - brain_mean).abs() < 0.01,
        "{oracle_mean} vs {brain_mean}"
    );
}

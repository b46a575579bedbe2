//! Brute-force reference decoder, independent of the real one.
#![allow(clippy::needless_range_loop)]

use markov_brain::decoder::{decode_blueprints, scan_codons, DecodeConfig};
use markov_brain::gates::{GateKind, Payload};
use markov_brain::genome::Genome;
use markov_brain::rng::stream;
use rand::Rng;

/// What the oracle expects one gene to decode to.
#[derive(Debug, PartialEq)]
pub struct Expected {
    pub codon_at: usize,
    pub kind: GateKind,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    /// Flattened payload numbers in the order the real payload stores them.
    numbers: Vec<f64>,
    extra: Vec<f64>,
    span_len: usize,
}

const CODONS: [(GateKind, u32, u32); 8] = [
    (GateKind::Probabilistic, 42, 213),
    (GateKind::Deterministic, 43, 212),
    (GateKind::Ann, 44, 211),
    (GateKind::Threshold, 45, 210),
    (GateKind::Timer, 46, 209),
    (GateKind::Feedback, 47, 208),
    (GateKind::TernaryDeterministic, 48, 207),
    (GateKind::TernaryProbabilistic, 49, 206),
];

fn normalized(raw: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    for &x in raw {
        sum += x;
    }
    if sum == 0.0 {
        return vec![1.0 / raw.len() as f64; raw.len()];
    }
    raw.iter().map(|&x| x / sum).collect()
}

pub fn oracle(sites: &[u32], n_nodes: usize) -> Vec<Expected> {
    let n = sites.len();
    // unrolled copy, long enough for any gene to be read without wrapping
    let mut tape = Vec::new();
    while tape.len() < 2 * n + 9000 {
        tape.extend_from_slice(sites);
    }
    let mut found = Vec::new();
    for p in 0..n {
        for &(kind, a, b) in &CODONS {
            if tape[p] != a || tape[p + 1] != b {
                continue;
            }
            let g = &tape[p + 2..];
            let n_in = 1 + g[0] as usize % 4;
            let n_out = 1 + g[1] as usize % 4;
            let inputs: Vec<usize> = g[2..2 + n_in]
                .iter()
                .map(|&s| s as usize % n_nodes)
                .collect();
            let outputs: Vec<usize> = g[6..6 + n_out]
                .iter()
                .map(|&s| s as usize % n_nodes)
                .collect();
            let pl = &g[10..];
            let mut numbers = Vec::new();
            let mut extra = Vec::new();
            let table = |pl: &[u32]| {
                let mut out = Vec::new();
                for r in 0..(1 << n_in) {
                    let row: Vec<f64> = (0..(1 << n_out))
                        .map(|c| f64::from(pl[r * 16 + c]))
                        .collect();
                    out.extend(normalized(&row));
                }
                out
            };
            let width = match kind {
                GateKind::Deterministic => {
                    for r in 0..(1 << n_in) {
                        numbers.push((pl[r] % (1 << n_out)) as f64);
                    }
                    16
                }
                GateKind::Probabilistic => {
                    numbers = table(pl);
                    256
                }
                GateKind::Ann => {
                    for j in 0..n_out {
                        for i in 0..n_in {
                            numbers.push(-1.0 + 2.0 * (f64::from(pl[j * 4 + i]) / 255.0));
                        }
                    }
                    16
                }
                GateKind::Threshold => {
                    numbers.push(f64::from(1 + pl[0] % 16));
                    1
                }
                GateKind::Timer => {
                    numbers.push(f64::from(1 + pl[0] % 64));
                    1
                }
                GateKind::Feedback => {
                    extra = vec![
                        f64::from(1 + pl[0] % 8),
                        0.01 + 0.49 * (f64::from(pl[1]) / 255.0),
                        (pl[2] as usize % n_nodes) as f64,
                        (pl[3] as usize % n_nodes) as f64,
                    ];
                    numbers = table(&pl[4..]);
                    260
                }
                GateKind::TernaryDeterministic => {
                    let w = 3u32.pow(n_out as u32);
                    for r in 0..3usize.pow(n_in as u32) {
                        numbers.push(f64::from(pl[r] % w));
                    }
                    81
                }
                GateKind::TernaryProbabilistic => {
                    let w = 3usize.pow(n_out as u32);
                    for r in 0..3usize.pow(n_in as u32) {
                        let row: Vec<f64> = (0..w).map(|c| f64::from(pl[r * w + c])).collect();
                        numbers.extend(normalized(&row));
                    }
                    3usize.pow((n_in + n_out) as u32)
                }
            };
            found.push(Expected {
                codon_at: p,
                kind,
                inputs,
                outputs,
                numbers,
                extra,
                span_len: 2 + 10 + width,
            });
        }
    }
    found
}

fn flatten(payload: &Payload<f64>) -> (Vec<f64>, Vec<f64>) {
    match payload {
        Payload::Deterministic(t) | Payload::TernaryDeterministic(t) => {
            (t.rows().iter().map(|&r| r as f64).collect(), vec![])
        }
        Payload::Probabilistic(t) | Payload::TernaryProbabilistic(t) => {
            (t.entries().to_vec(), vec![])
        }
        Payload::Ann(w) => (w.weights().to_vec(), vec![]),
        Payload::Threshold { threshold } => (vec![f64::from(*threshold)], vec![]),
        Payload::Timer { period } => (vec![f64::from(*period)], vec![]),
        Payload::Feedback(f) => (
            f.table.entries().to_vec(),
            vec![
                f.capacity as f64,
                f.delta_max,
                f.pos_node as f64,
                f.neg_node as f64,
            ],
        ),
    }
}

pub fn random_genome(rng: &mut impl Rng) -> Genome {
    let len = rng.gen_range(2..=2000);
    let mut sites: Vec<u32> = (0..len).map(|_| rng.gen_range(0..=255)).collect();
    // dense planting so genes overlap and some codons straddle the end
    for _ in 0..rng.gen_range(0..12) {
        let (_, a, b) = CODONS[rng.gen_range(0..CODONS.len())];
        let p = if rng.gen_bool(0.3) {
            len - 1
        } else {
            rng.gen_range(0..len)
        };
        sites[p] = a;
        sites[(p + 1) % len] = b;
    }
    Genome::new(sites, 255).unwrap()
}

/// Decodes `n` random genomes both ways and panics on the first mismatch.
/// Returns the gene, wrapped-gene and overlapping-pair counts.
pub fn compare_with_decoder(n: usize, seed: u64) -> (usize, usize, usize) {
    let cfg = DecodeConfig::default().with_kinds(&GateKind::ALL);
    let mut rng = stream(seed, &[]);
    let (mut genes, mut wrapped, mut overlapping) = (0, 0, 0);
    for _ in 0..n {
        let g = random_genome(&mut rng);
        let expected = oracle(g.sites(), cfg.n_nodes);
        let hits = scan_codons(&g, &cfg.registry);
        assert_eq!(
            hits,
            expected
                .iter()
                .map(|e| (e.codon_at, e.kind))
                .collect::<Vec<_>>(),
            "codon positions"
        );
        let got = decode_blueprints::<f64>(&g, &cfg);
        assert_eq!(got.len(), expected.len());
        for (b, e) in got.iter().zip(&expected) {
            assert_eq!(b.kind(), e.kind);
            assert_eq!(b.inputs, e.inputs);
            assert_eq!(b.outputs, e.outputs);
            assert_eq!(b.span.start, e.codon_at);
            assert_eq!(b.span.len, e.span_len);
            let (numbers, extra) = flatten(&b.payload);
            assert_eq!(numbers, e.numbers, "{:?}", e.kind);
            assert_eq!(extra, e.extra);
            if e.codon_at + e.span_len > g.len() {
                wrapped += 1;
            }
        }
        for w in expected.windows(2) {
            if w[1].codon_at < w[0].codon_at + w[0].span_len {
                overlapping += 1;
            }
        }
        genes += expected.len();
    }
    (genes, wrapped, overlapping)
}

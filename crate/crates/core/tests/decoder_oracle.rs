mod support;

use markov_brain::decoder::{decode_blueprints, DecodeConfig};
use markov_brain::gates::GateKind;
use markov_brain::rng::stream;
use support::oracle::{compare_with_decoder, oracle, random_genome};

#[test]
fn decoder_matches_brute_force_oracle() {
    let (genes, wrapped, overlapping) = compare_with_decoder(1000, 2024);
    assert!(
        genes > 3000 && wrapped > 100 && overlapping > 500,
        "{genes} {wrapped} {overlapping}"
    );
}

#[test]
fn disabled_kinds_are_skipped() {
    let cfg = DecodeConfig::default().with_kinds(&[GateKind::Deterministic]);
    let mut rng = stream(7, &[]);
    for _ in 0..100 {
        let g = random_genome(&mut rng);
        let expected = oracle(g.sites(), cfg.n_nodes)
            .into_iter()
            .filter(|e| e.kind == GateKind::Deterministic)
            .count();
        assert_eq!(decode_blueprints::<f64>(&g, &cfg).len(), expected);
    }
}

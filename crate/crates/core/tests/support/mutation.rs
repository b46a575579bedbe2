//! Statistical checks on replication.

use markov_brain::genome::{
    point_mutate, replicate_traced, segment_delete, Genome, MutationConfig,
};
use markov_brain::rng::stream;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Length extremes seen along one lineage of `n` replications.
#[derive(Debug)]
pub struct LengthRange {
    pub in_flight: (usize, usize),
    pub stored: (usize, usize),
}

/// Replicates a single lineage `n` times from length `start`, returning the
/// smallest and largest intermediate and stored lengths.
pub fn lineage_lengths(cfg: &MutationConfig, start: usize, n: usize, seed: u64) -> LengthRange {
    let mut rng = stream(seed, &[]);
    let mut g = Genome::random(start, 255, &mut rng).unwrap();
    let mut r = LengthRange {
        in_flight: (usize::MAX, 0),
        stored: (usize::MAX, 0),
    };
    for _ in 0..n {
        let (child, t) = replicate_traced(&g, cfg, &mut rng);
        for len in [t.after_delete, t.after_copy] {
            r.in_flight = (r.in_flight.0.min(len), r.in_flight.1.max(len));
        }
        r.stored = (r.stored.0.min(child.len()), r.stored.1.max(child.len()));
        g = child;
    }
    r
}

/// Deletion sizes from `n` forced deletions on a long genome, and the
/// chi-square p-value against the uniform distribution on
/// `[segment_min, segment_max]`.
pub fn deletion_uniformity(n: usize, seed: u64) -> (Vec<u64>, f64) {
    let cfg = MutationConfig {
        segment_delete_prob: 1.0,
        ..MutationConfig::none()
    };
    let mut rng = stream(seed, &[]);
    let g = Genome::random(5000, 255, &mut rng).unwrap();
    let bins = cfg.segment_max - cfg.segment_min + 1;
    let mut counts = vec![0u64; bins];
    for _ in 0..n {
        let size = g.len() - segment_delete(&g, &cfg, &mut rng).len();
        counts[size - cfg.segment_min] += 1;
    }
    let expected = n as f64 / bins as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    (counts, p)
}

/// Changed-site counts from `n` point-mutation passes over a length-`len`
/// genome, with the binomial mean and standard deviation they should follow.
pub struct PointCounts {
    pub mean: f64,
    pub variance: f64,
    pub binomial_mean: f64,
    pub binomial_sd: f64,
    pub n: usize,
}

impl PointCounts {
    /// Distance of the sample mean from the binomial mean in standard errors.
    pub fn mean_z(&self) -> f64 {
        (self.mean - self.binomial_mean) / (self.binomial_sd / (self.n as f64).sqrt())
    }

    /// Same for the sample variance, using the normal approximation to its
    /// sampling spread.
    pub fn variance_z(&self) -> f64 {
        let var = self.binomial_sd.powi(2);
        (self.variance - var) / (var * (2.0 / (self.n as f64 - 1.0)).sqrt())
    }
}

pub fn point_counts(len: usize, rate: f64, n: usize, seed: u64) -> PointCounts {
    let cfg = MutationConfig {
        point_rate: rate,
        ..MutationConfig::none()
    };
    let mut rng = stream(seed, &[]);
    let g = Genome::random(len, 255, &mut rng).unwrap();
    let counts: Vec<f64> = (0..n)
        .map(|_| {
            let child = point_mutate(&g, &cfg, &mut rng);
            g.sites()
                .iter()
                .zip(child.sites())
                .filter(|(a, b)| a != b)
                .count() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let variance = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    // a redraw lands on the old value one time in 256
    let p = rate * 255.0 / 256.0;
    PointCounts {
        mean,
        variance,
        binomial_mean: len as f64 * p,
        binomial_sd: (len as f64 * p * (1.0 - p)).sqrt(),
        n,
    }
}

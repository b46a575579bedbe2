//! Circular integer genomes and their replication operators.

use std::fmt::Write as _;
use std::io::{Read, Write};

use rand::Rng;

use crate::error::{Error, Result};

pub type Site = u32;

pub const DEFAULT_ALPHABET_MAX: Site = 255;
pub const DEFAULT_GENOME_MIN: usize = 1000;
pub const DEFAULT_GENOME_MAX: usize = 20_000;

const HEADER_MAGIC: &str = "MBGENOME";
const HEADER_VERSION: &str = "v1";
const SITES_PER_LINE: usize = 32;

/// Heritable sequence of sites, each in `[0, alphabet_max]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Genome {
    sites: Vec<Site>,
    alphabet_max: Site,
}

impl Genome {
    pub fn new(sites: Vec<Site>, alphabet_max: Site) -> Result<Self> {
        if let Some((i, &s)) = sites.iter().enumerate().find(|(_, &s)| s > alphabet_max) {
            return Err(Error::invalid(format!(
                "site {i} has value {s} above alphabet maximum {alphabet_max}"
            )));
        }
        Ok(Genome {
            sites,
            alphabet_max,
        })
    }

    /// Uniformly random genome of `length` sites.
    pub fn random<R: Rng + ?Sized>(length: usize, alphabet_max: Site, rng: &mut R) -> Result<Self> {
        if length == 0 || length > DEFAULT_GENOME_MAX {
            return Err(Error::invalid(format!(
                "genome length {length} outside [1, {DEFAULT_GENOME_MAX}]"
            )));
        }
        let sites = (0..length)
            .map(|_| rng.gen_range(0..=alphabet_max))
            .collect();
        Ok(Genome {
            sites,
            alphabet_max,
        })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn alphabet_max(&self) -> Site {
        self.alphabet_max
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Overwrites one site. Panics on an out-of-alphabet value.
    pub fn set(&mut self, index: usize, value: Site) {
        assert!(value <= self.alphabet_max, "site value outside alphabet");
        self.sites[index] = value;
    }

    /// Genome rotated left by `k` sites: new site `i` is old site `(i + k) mod len`.
    pub fn rotated(&self, k: usize) -> Genome {
        let mut sites = self.sites.clone();
        if !sites.is_empty() {
            sites.rotate_left(k % self.sites.len());
        }
        Genome {
            sites,
            alphabet_max: self.alphabet_max,
        }
    }

    /// Sites at `(start + i) mod len` for `i` in `0..count`.
    pub fn read_circular(&self, start: usize, count: usize) -> Vec<Site> {
        let n = self.sites.len();
        if n == 0 {
            return Vec::new();
        }
        (0..count).map(|i| self.sites[(start + i) % n]).collect()
    }

    #[inline]
    pub(crate) fn site_at(&self, index: usize) -> Site {
        self.sites[index % self.sites.len()]
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{HEADER_MAGIC} {HEADER_VERSION} alphabet={} length={}\n",
            self.alphabet_max,
            self.sites.len()
        );
        for line in self.sites.chunks(SITES_PER_LINE) {
            let mut first = true;
            for site in line {
                if !first {
                    s.push(' ');
                }
                first = false;
                write!(s, "{site}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn load<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text).map_err(|e| {
            if e.kind() == std::io::ErrorKind::InvalidData {
                Error::parse(0, "genome file is not valid UTF-8")
            } else {
                Error::Io(e)
            }
        })?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let header_end = text
            .find('\n')
            .ok_or_else(|| Error::parse(text.len(), "missing header line"))?;
        let header = text[..header_end].trim_end_matches('\r');
        let mut fields = header.split_whitespace();
        if fields.next() != Some(HEADER_MAGIC) {
            return Err(Error::parse(0, format!("expected `{HEADER_MAGIC}` magic")));
        }
        if fields.next() != Some(HEADER_VERSION) {
            return Err(Error::parse(
                0,
                format!("expected version `{HEADER_VERSION}`"),
            ));
        }
        let alphabet_max: Site = header_field(fields.next(), "alphabet")?;
        let length: usize = header_field(fields.next(), "length")?;
        if fields.next().is_some() {
            return Err(Error::parse(0, "trailing fields in header"));
        }
        if length == 0 {
            return Err(Error::parse(0, "genome has no sites"));
        }

        let body_start = header_end + 1;
        let mut sites = Vec::with_capacity(length);
        for (offset, token) in tokens_with_offsets(&text[body_start..]) {
            let offset = body_start + offset;
            let value: Site = token
                .parse()
                .map_err(|_| Error::parse(offset, format!("`{token}` is not a site value")))?;
            if value > alphabet_max {
                return Err(Error::parse(
                    offset,
                    format!("site value {value} exceeds alphabet maximum {alphabet_max}"),
                ));
            }
            if sites.len() == length {
                return Err(Error::parse(offset, "more sites than the header declares"));
            }
            sites.push(value);
        }
        if sites.len() < length {
            return Err(Error::parse(
                text.len(),
                format!("truncated: {} of {length} sites present", sites.len()),
            ));
        }
        Ok(Genome {
            sites,
            alphabet_max,
        })
    }
}

fn header_field<T: std::str::FromStr>(field: Option<&str>, key: &str) -> Result<T> {
    let field = field.ok_or_else(|| Error::parse(0, format!("missing `{key}=` in header")))?;
    let value = field
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| Error::parse(0, format!("expected `{key}=` in header, found `{field}`")))?;
    value
        .parse()
        .map_err(|_| Error::parse(0, format!("bad `{key}` value `{value}`")))
}

fn tokens_with_offsets(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.split(|c: char| c.is_ascii_whitespace())
        .scan(0usize, |pos, tok| {
            let start = *pos;
            *pos += tok.len() + 1;
            Some((start, tok))
        })
        .filter(|(_, tok)| !tok.is_empty())
}

/// Rates and size limits for replication.
#[derive(Clone, Debug, PartialEq)]
pub struct MutationConfig {
    pub point_rate: f64,
    pub segment_delete_prob: f64,
    pub segment_copy_prob: f64,
    pub segment_min: usize,
    pub segment_max: usize,
    pub genome_min: usize,
    pub genome_max: usize,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            point_rate: 0.005,
            segment_delete_prob: 0.2,
            segment_copy_prob: 0.2,
            segment_min: 256,
            segment_max: 512,
            genome_min: DEFAULT_GENOME_MIN,
            genome_max: DEFAULT_GENOME_MAX,
        }
    }
}

impl MutationConfig {
    /// No mutation at all.
    pub fn none() -> Self {
        MutationConfig {
            point_rate: 0.0,
            segment_delete_prob: 0.0,
            segment_copy_prob: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("point_rate", self.point_rate),
            ("segment_delete_prob", self.segment_delete_prob),
            ("segment_copy_prob", self.segment_copy_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        if self.segment_min == 0 || self.segment_min > self.segment_max {
            return Err(Error::invalid(format!(
                "segment size range [{}, {}] is empty or starts at 0",
                self.segment_min, self.segment_max
            )));
        }
        if self.genome_min >= self.genome_max {
            return Err(Error::invalid(format!(
                "genome_min {} must be below genome_max {}",
                self.genome_min, self.genome_max
            )));
        }
        Ok(())
    }
}

/// Redraws each site with probability `point_rate` from the full alphabet.
pub fn point_mutate<R: Rng + ?Sized>(genome: &Genome, cfg: &MutationConfig, rng: &mut R) -> Genome {
    let mut child = genome.clone();
    if cfg.point_rate <= 0.0 {
        return child;
    }
    let max = genome.alphabet_max;
    for site in child.sites.iter_mut() {
        if rng.gen_bool(cfg.point_rate) {
            *site = rng.gen_range(0..=max);
        }
    }
    child
}

/// Removes a random contiguous segment, never shrinking below `genome_min`.
pub fn segment_delete<R: Rng + ?Sized>(
    genome: &Genome,
    cfg: &MutationConfig,
    rng: &mut R,
) -> Genome {
    let mut child = genome.clone();
    if cfg.segment_delete_prob <= 0.0 || !rng.gen_bool(cfg.segment_delete_prob) {
        return child;
    }
    let len = child.sites.len();
    if len <= cfg.genome_min {
        return child;
    }
    let k = rng
        .gen_range(cfg.segment_min..=cfg.segment_max)
        .min(len - cfg.genome_min);
    let start = rng.gen_range(0..=len - k);
    child.sites.drain(start..start + k);
    child
}

/// Copies a random contiguous segment and inserts it at a random point.
pub fn segment_copy<R: Rng + ?Sized>(genome: &Genome, cfg: &MutationConfig, rng: &mut R) -> Genome {
    let mut child = genome.clone();
    if cfg.segment_copy_prob <= 0.0 || !rng.gen_bool(cfg.segment_copy_prob) {
        return child;
    }
    let len = child.sites.len();
    if len >= cfg.genome_max || len == 0 {
        return child;
    }
    let k = rng.gen_range(cfg.segment_min..=cfg.segment_max).min(len);
    let start = rng.gen_range(0..=len - k);
    let at = rng.gen_range(0..=len);
    let segment: Vec<Site> = child.sites[start..start + k].to_vec();
    child.sites.splice(at..at, segment);
    child
}

/// Lengths seen while a child genome was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplicationTrace {
    pub after_delete: usize,
    pub after_copy: usize,
    pub stored: usize,
}

/// Point mutation, then segment deletion, then segment copy, then the
/// length cap.
pub fn replicate<R: Rng + ?Sized>(genome: &Genome, cfg: &MutationConfig, rng: &mut R) -> Genome {
    replicate_traced(genome, cfg, rng).0
}

pub fn replicate_traced<R: Rng + ?Sized>(
    genome: &Genome,
    cfg: &MutationConfig,
    rng: &mut R,
) -> (Genome, ReplicationTrace) {
    let child = point_mutate(genome, cfg, rng);
    let child = segment_delete(&child, cfg, rng);
    let after_delete = child.len();
    let mut child = segment_copy(&child, cfg, rng);
    let after_copy = child.len();
    // a copy started just under the cap may overshoot it
    child.sites.truncate(cfg.genome_max);
    let stored = child.len();
    (
        child,
        ReplicationTrace {
            after_delete,
            after_copy,
            stored,
        },
    )
}

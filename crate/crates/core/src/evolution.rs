//! Populations, selection and the generational loop.

use std::fmt::Write as _;
use std::fs;
use std::marker::PhantomData;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::decoder::{decode_brain, DecodeConfig};
use crate::error::{Error, Result};
use crate::genome::{replicate, Genome, MutationConfig, DEFAULT_ALPHABET_MAX};
use crate::rng::{mix, stream, StreamRng};
use crate::scalar::Scalar;
use crate::tasks::{task_from_name, Task, DEFAULT_LIFETIME};

const INIT_LABEL: u64 = 1;
const NEXT_LABEL: u64 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct Organism {
    pub id: u64,
    pub genome: Genome,
    pub fitness: Option<f64>,
    pub parent_id: Option<u64>,
}

impl Organism {
    fn fitness(&self) -> Result<f64> {
        self.fitness
            .ok_or_else(|| Error::invalid(format!("organism {} has not been evaluated", self.id)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    Tournament(usize),
    Roulette,
}

impl std::fmt::Display for Selection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selection::Tournament(k) => write!(f, "tournament:{k}"),
            Selection::Roulette => f.write_str("roulette"),
        }
    }
}

impl std::str::FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            _ if s == "roulette" => Ok(Selection::Roulette),
            Some(("tournament", k)) => k
                .parse()
                .map(Selection::Tournament)
                .map_err(|_| Error::invalid(format!("bad tournament size `{k}`"))),
            _ => Err(Error::invalid(format!("unknown selection `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: u64,
    pub selection: Selection,
    pub elitism: usize,
    pub mutation: MutationConfig,
    pub decode: DecodeConfig,
    /// `nback`, `nback:<k>` or `association`.
    pub task: String,
    pub lifetime: usize,
    pub ticks_per_percept: usize,
    /// Lifetimes averaged per fitness evaluation.
    pub repeats: usize,
    pub initial_length: usize,
    /// Copies of each enabled start codon planted in every initial genome.
    pub seeded_codons: usize,
    /// Fresh lifetime seeds every generation; off gives every organism the
    /// same environments throughout the run.
    pub reseed_each_generation: bool,
    /// Population snapshot cadence in generations; 0 writes only the final one.
    pub snapshot_every: u64,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 100,
            generations: 1000,
            selection: Selection::Tournament(5),
            elitism: 1,
            mutation: MutationConfig::default(),
            decode: DecodeConfig::default(),
            task: "nback".into(),
            lifetime: DEFAULT_LIFETIME,
            ticks_per_percept: 1,
            repeats: 3,
            initial_length: 5000,
            seeded_codons: 4,
            reseed_each_generation: true,
            snapshot_every: 100,
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("population_size must be at least 2"));
        }
        if self.elitism > self.population_size {
            return Err(Error::invalid("elitism exceeds population_size"));
        }
        if self.selection == Selection::Tournament(0) {
            return Err(Error::invalid("tournament size must be at least 1"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if self.initial_length < 2 {
            return Err(Error::invalid("initial_length must be at least 2"));
        }
        self.mutation.validate()?;
        self.decode.validate()?;
        let spec = self.build_task()?.spec();
        if (spec.n_inputs, spec.n_outputs) != (self.decode.n_inputs, self.decode.n_outputs) {
            return Err(Error::invalid(format!(
                "task `{}` needs {} inputs and {} outputs, decode config has {} and {}",
                self.task,
                spec.n_inputs,
                spec.n_outputs,
                self.decode.n_inputs,
                self.decode.n_outputs
            )));
        }
        Ok(())
    }

    pub fn build_task(&self) -> Result<Box<dyn Task>> {
        task_from_name(&self.task, self.lifetime, self.ticks_per_percept)
    }

    /// Lifetime seed of one repeat of one organism.
    pub fn lifetime_seed(&self, generation: u64, index: usize, repeat: usize) -> u64 {
        if self.reseed_each_generation {
            mix(&[self.seed, generation, index as u64, repeat as u64])
        } else {
            mix(&[self.seed, repeat as u64])
        }
    }
}

/// Random genome with `seeded_codons` copies of every enabled start codon.
pub fn initial_genome<R: Rng + ?Sized>(cfg: &EvolutionConfig, rng: &mut R) -> Result<Genome> {
    let mut g = Genome::random(cfg.initial_length, DEFAULT_ALPHABET_MAX, rng)?;
    for &(kind, codon) in cfg.decode.registry.codons() {
        if !cfg.decode.enabled.contains(&kind) {
            continue;
        }
        for _ in 0..cfg.seeded_codons {
            let p = rng.gen_range(0..g.len() - 1);
            g.set(p, codon[0]);
            g.set(p + 1, codon[1]);
        }
    }
    Ok(g)
}

/// Mean task score over `seeds`, one lifetime each.
pub fn mean_fitness(
    agent: &mut dyn crate::tasks::Agent,
    task: &dyn Task,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for s in seeds {
        total += task.evaluate(agent, s)?;
        n += 1;
    }
    Ok(total / n.max(1) as f64)
}

/// Fitness and gate count of every genome. Each organism's lifetimes are
/// seeded by its index, so the result does not depend on `parallel`.
pub fn evaluate_population<S: Scalar>(
    genomes: &[&Genome],
    cfg: &EvolutionConfig,
    task: &dyn Task,
    generation: u64,
    parallel: bool,
) -> Result<Vec<(f64, usize)>> {
    let eval = |(i, g): (usize, &&Genome)| -> Result<(f64, usize)> {
        let mut brain = decode_brain::<S>(g, &cfg.decode)?;
        let seeds = (0..cfg.repeats).map(|r| cfg.lifetime_seed(generation, i, r));
        Ok((mean_fitness(&mut brain, task, seeds)?, brain.gates().len()))
    };
    if parallel {
        genomes.par_iter().enumerate().map(eval).collect()
    } else {
        genomes.iter().enumerate().map(eval).collect()
    }
}

/// Index of the chosen parent. Tournament: best of k uniform draws, ties to
/// the lower id. Roulette: proportional to fitness, uniform if all are zero.
pub fn select_parent<R: Rng + ?Sized>(
    pop: &[Organism],
    selection: Selection,
    rng: &mut R,
) -> Result<usize> {
    if pop.is_empty() {
        return Err(Error::invalid("cannot select from an empty population"));
    }
    let fitness: Vec<f64> = pop.iter().map(Organism::fitness).collect::<Result<_>>()?;
    match selection {
        Selection::Tournament(k) => {
            if k == 0 {
                return Err(Error::invalid("tournament size must be at least 1"));
            }
            let mut best = rng.gen_range(0..pop.len());
            for _ in 1..k {
                let c = rng.gen_range(0..pop.len());
                if fitness[c] > fitness[best]
                    || (fitness[c] == fitness[best] && pop[c].id < pop[best].id)
                {
                    best = c;
                }
            }
            Ok(best)
        }
        Selection::Roulette => {
            let total: f64 = fitness.iter().sum();
            if total <= 0.0 {
                return Ok(rng.gen_range(0..pop.len()));
            }
            let mut u = rng.gen::<f64>() * total;
            for (i, &f) in fitness.iter().enumerate() {
                if u < f {
                    return Ok(i);
                }
                u -= f;
            }
            Ok(fitness
                .iter()
                .rposition(|&f| f > 0.0)
                .expect("total is positive"))
        }
    }
}

/// Indices ordered best first, ties to the lower id.
fn ranking(pop: &[Organism]) -> Result<Vec<usize>> {
    let fitness: Vec<f64> = pop.iter().map(Organism::fitness).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| {
        fitness[b]
            .total_cmp(&fitness[a])
            .then(pop[a].id.cmp(&pop[b].id))
    });
    Ok(order)
}

/// Elites copied unmutated, the rest replicated from selected parents.
/// Children get ids from `next_id` onward.
pub fn next_generation<R: Rng + ?Sized>(
    pop: &[Organism],
    cfg: &EvolutionConfig,
    next_id: &mut u64,
    rng: &mut R,
) -> Result<Vec<Organism>> {
    let mut child = |genome, parent: &Organism| {
        let o = Organism {
            id: *next_id,
            genome,
            fitness: None,
            parent_id: Some(parent.id),
        };
        *next_id += 1;
        o
    };
    let mut next = Vec::with_capacity(cfg.population_size);
    for &i in ranking(pop)?.iter().take(cfg.elitism) {
        next.push(child(pop[i].genome.clone(), &pop[i]));
    }
    while next.len() < cfg.population_size {
        let p = &pop[select_parent(pop, cfg.selection, rng)?];
        next.push(child(replicate(&p.genome, &cfg.mutation, rng), p));
    }
    Ok(next)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub generation: u64,
    pub max_fitness: f64,
    pub mean_fitness: f64,
    pub min_fitness: f64,
    pub mean_genome_len: f64,
    pub mean_gates: f64,
}

pub const STATS_HEADER: &str =
    "generation,max_fitness,mean_fitness,min_fitness,mean_genome_len,mean_gates";

impl GenerationStats {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.generation,
            self.max_fitness,
            self.mean_fitness,
            self.min_fitness,
            self.mean_genome_len,
            self.mean_gates
        )
    }
}

pub fn parse_stats_csv(text: &str) -> Result<Vec<GenerationStats>> {
    let mut lines = text.lines();
    if lines.next() != Some(STATS_HEADER) {
        return Err(Error::parse(0, "missing stats header"));
    }
    let mut offset = STATS_HEADER.len() + 1;
    let mut out = Vec::new();
    for line in lines {
        let bad = || Error::parse(offset, format!("bad stats row `{line}`"));
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != 6 {
            return Err(bad());
        }
        let f = |i: usize| c[i].parse::<f64>().map_err(|_| bad());
        out.push(GenerationStats {
            generation: c[0].parse().map_err(|_| bad())?,
            max_fitness: f(1)?,
            mean_fitness: f(2)?,
            min_fitness: f(3)?,
            mean_genome_len: f(4)?,
            mean_gates: f(5)?,
        });
        offset += line.len() + 1;
    }
    Ok(out)
}

/// A run in progress. Construction evaluates generation 0.
pub struct Evolver<S: Scalar = f64> {
    cfg: EvolutionConfig,
    task: Box<dyn Task>,
    population: Vec<Organism>,
    generation: u64,
    next_id: u64,
    stats: Vec<GenerationStats>,
    parallel: bool,
    _scalar: PhantomData<S>,
}

impl<S: Scalar> Evolver<S> {
    pub fn new(cfg: EvolutionConfig) -> Result<Self> {
        cfg.validate()?;
        let task = cfg.build_task()?;
        Self::with_task(cfg, task)
    }

    /// A run on a task not nameable in the config.
    pub fn with_task(cfg: EvolutionConfig, task: Box<dyn Task>) -> Result<Self> {
        if cfg.population_size < 2 || cfg.elitism > cfg.population_size || cfg.repeats == 0 {
            return Err(Error::invalid("invalid population settings"));
        }
        let mut rng = stream(cfg.seed, &[INIT_LABEL]);
        let population = (0..cfg.population_size as u64)
            .map(|id| {
                Ok(Organism {
                    id,
                    genome: initial_genome(&cfg, &mut rng)?,
                    fitness: None,
                    parent_id: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut ev = Evolver {
            next_id: cfg.population_size as u64,
            cfg,
            task,
            population,
            generation: 0,
            stats: Vec::new(),
            parallel: true,
            _scalar: PhantomData,
        };
        ev.evaluate()?;
        Ok(ev)
    }

    /// Serial evaluation; results are identical either way.
    pub fn set_parallel(&mut self, parallel: bool) {
        self.parallel = parallel;
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.cfg
    }

    pub fn task(&self) -> &dyn Task {
        self.task.as_ref()
    }

    pub fn population(&self) -> &[Organism] {
        &self.population
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn stats(&self) -> &[GenerationStats] {
        &self.stats
    }

    pub fn best(&self) -> &Organism {
        let i = ranking(&self.population).expect("population is evaluated")[0];
        &self.population[i]
    }

    fn evaluate(&mut self) -> Result<()> {
        let genomes: Vec<&Genome> = self.population.iter().map(|o| &o.genome).collect();
        let results = evaluate_population::<S>(
            &genomes,
            &self.cfg,
            self.task.as_ref(),
            self.generation,
            self.parallel,
        )?;
        for (o, &(f, _)) in self.population.iter_mut().zip(&results) {
            o.fitness = Some(f);
        }
        let n = results.len() as f64;
        let fit = results.iter().map(|r| r.0);
        self.stats.push(GenerationStats {
            generation: self.generation,
            max_fitness: fit.clone().fold(f64::NEG_INFINITY, f64::max),
            mean_fitness: fit.clone().sum::<f64>() / n,
            min_fitness: fit.fold(f64::INFINITY, f64::min),
            mean_genome_len: self
                .population
                .iter()
                .map(|o| o.genome.len() as f64)
                .sum::<f64>()
                / n,
            mean_gates: results.iter().map(|r| r.1 as f64).sum::<f64>() / n,
        });
        Ok(())
    }

    /// Breeds and evaluates the next generation.
    pub fn step(&mut self) -> Result<&GenerationStats> {
        let mut rng: StreamRng = stream(self.cfg.seed, &[NEXT_LABEL, self.generation]);
        self.population =
            next_generation(&self.population, &self.cfg, &mut self.next_id, &mut rng)?;
        self.generation += 1;
        self.evaluate()?;
        Ok(self.stats.last().expect("just pushed"))
    }
}

/// Writes `manifest.csv` (`id,fitness,parent_id,genome`) and one genome file
/// per organism into `dir`.
pub fn save_snapshot(dir: &Path, pop: &[Organism]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::from("id,fitness,parent_id,genome\n");
    for o in pop {
        let file = format!("{}.genome", o.id);
        fs::write(dir.join(&file), o.genome.to_text())?;
        let fit = o.fitness.map(|f| f.to_string()).unwrap_or_default();
        let parent = o.parent_id.map(|p| p.to_string()).unwrap_or_default();
        writeln!(manifest, "{},{fit},{parent},{file}", o.id).unwrap();
    }
    fs::write(dir.join("manifest.csv"), manifest)?;
    Ok(())
}

pub fn load_snapshot(dir: &Path) -> Result<Vec<Organism>> {
    let text = fs::read_to_string(dir.join("manifest.csv"))?;
    let mut lines = text.lines();
    if lines.next() != Some("id,fitness,parent_id,genome") {
        return Err(Error::parse(0, "missing manifest header"));
    }
    let mut pop = Vec::new();
    for line in lines {
        let bad = || Error::invalid(format!("bad manifest row `{line}`"));
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != 4 || c[3].contains(['/', '\\']) {
            return Err(bad());
        }
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad())
            }
        };
        pop.push(Organism {
            id: c[0].parse().map_err(|_| bad())?,
            fitness: opt(c[1])?,
            parent_id: if c[2].is_empty() {
                None
            } else {
                Some(c[2].parse().map_err(|_| bad())?)
            },
            genome: Genome::from_text(&fs::read_to_string(dir.join(c[3]))?)?,
        });
    }
    Ok(pop)
}

/// What a finished run leaves behind.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub stats: Vec<GenerationStats>,
    pub population: Vec<Organism>,
}

/// Full run. With an output directory: `stats.csv`, periodic snapshots under
/// `snapshots/gen_<g>`, and the last population under `final`.
pub fn evolve<S: Scalar>(cfg: &EvolutionConfig, out: Option<&Path>) -> Result<RunRecord> {
    cfg.validate()?;
    let mut stats_file = String::new();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("stats.csv"), "")?;
    }
    let mut ev = Evolver::<S>::new(cfg.clone())?;
    loop {
        let g = ev.generation();
        if let Some(dir) = out {
            if cfg.snapshot_every > 0 && g % cfg.snapshot_every == 0 && g < cfg.generations {
                save_snapshot(
                    &dir.join("snapshots").join(format!("gen_{g:06}")),
                    ev.population(),
                )?;
            }
        }
        if g >= cfg.generations {
            break;
        }
        ev.step()?;
    }
    if let Some(dir) = out {
        stats_file.push_str(STATS_HEADER);
        stats_file.push('\n');
        for s in ev.stats() {
            stats_file.push_str(&s.csv_row());
            stats_file.push('\n');
        }
        fs::write(dir.join("stats.csv"), stats_file)?;
        save_snapshot(&dir.join("final"), ev.population())?;
    }
    Ok(RunRecord {
        stats: ev.stats().to_vec(),
        population: ev.population().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn small() -> EvolutionConfig {
        EvolutionConfig {
            population_size: 12,
            generations: 4,
            lifetime: 40,
            initial_length: 1200,
            ..EvolutionConfig::default()
        }
    }

    fn with_fitness(f: &[f64]) -> Vec<Organism> {
        let g = Genome::new(vec![0; 4], 255).unwrap();
        f.iter()
            .enumerate()
            .map(|(i, &x)| Organism {
                id: i as u64,
                genome: g.clone(),
                fitness: Some(x),
                parent_id: None,
            })
            .collect()
    }

    #[test]
    fn full_tournament_picks_global_best_lowest_id() {
        let pop = with_fitness(&[0.2, 0.9, 0.5, 0.9]);
        let mut rng = stream(1, &[]);
        for _ in 0..200 {
            assert_eq!(
                select_parent(&pop, Selection::Tournament(400), &mut rng).unwrap(),
                1
            );
        }
    }

    #[test]
    fn roulette_proportions() {
        let pop = with_fitness(&[3.0, 1.0]);
        let mut rng = stream(2, &[]);
        let n = 100_000;
        let first = (0..n)
            .filter(|_| select_parent(&pop, Selection::Roulette, &mut rng).unwrap() == 0)
            .count();
        assert!((first as f64 / n as f64 - 0.75).abs() < 0.015);
        let zero = with_fitness(&[0.0, 0.0, 0.0]);
        let hits = (0..3000)
            .filter(|_| select_parent(&zero, Selection::Roulette, &mut rng).unwrap() == 2)
            .count();
        assert!((hits as f64 / 3000.0 - 1.0 / 3.0).abs() < 0.04);
    }

    #[test]
    fn unevaluated_population_cannot_select() {
        let mut pop = with_fitness(&[1.0, 2.0]);
        pop[1].fitness = None;
        assert!(select_parent(&pop, Selection::Roulette, &mut stream(3, &[])).is_err());
    }

    #[test]
    fn elitism_and_size() {
        let mut cfg = small();
        let pop = with_fitness(&[0.1, 0.7, 0.3, 0.7, 0.0, 0.2, 0.4, 0.5, 0.6, 0.1, 0.2, 0.3]);
        let mut next_id = 100;
        let mut rng = stream(4, &[]);
        let next = next_generation(&pop, &cfg, &mut next_id, &mut rng).unwrap();
        assert_eq!(next.len(), 12);
        assert_eq!(next[0].parent_id, Some(1));
        assert_eq!(next[0].genome, pop[1].genome);
        cfg.elitism = 12;
        let clone = next_generation(&pop, &cfg, &mut next_id, &mut rng).unwrap();
        let mut got: Vec<u64> = clone.iter().map(|o| o.parent_id.unwrap()).collect();
        got.sort();
        assert_eq!(got, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn selection_names() {
        assert_eq!(
            "tournament:3".parse::<Selection>().unwrap(),
            Selection::Tournament(3)
        );
        assert_eq!(
            "roulette".parse::<Selection>().unwrap(),
            Selection::Roulette
        );
        assert_eq!(Selection::Tournament(7).to_string(), "tournament:7");
        assert!("best".parse::<Selection>().is_err());
    }

    #[test]
    fn serial_and_parallel_agree() {
        let cfg = small();
        let mut a = Evolver::<f64>::new(cfg.clone()).unwrap();
        let mut b = Evolver::<f64>::new(cfg).unwrap();
        b.set_parallel(false);
        for _ in 0..3 {
            a.step().unwrap();
            b.step().unwrap();
        }
        assert_eq!(a.stats(), b.stats());
        assert_eq!(a.population(), b.population());
    }

    #[test]
    fn zero_generations_logs_one_row() {
        let cfg = EvolutionConfig {
            generations: 0,
            ..small()
        };
        let dir = tempfile::tempdir().unwrap();
        let rec = evolve::<f64>(&cfg, Some(dir.path())).unwrap();
        assert_eq!(rec.stats.len(), 1);
        let text = fs::read_to_string(dir.path().join("stats.csv")).unwrap();
        assert_eq!(parse_stats_csv(&text).unwrap(), rec.stats);
        assert_eq!(
            load_snapshot(&dir.path().join("final")).unwrap(),
            rec.population
        );
    }

    #[test]
    fn population_size_conserved() {
        let mut ev = Evolver::<f32>::new(EvolutionConfig {
            population_size: 6,
            ..small()
        })
        .unwrap();
        for _ in 0..100 {
            let g = ev.step().unwrap().generation;
            assert_eq!(g, ev.generation());
            assert_eq!(ev.population().len(), 6);
        }
        let mut ids: Vec<u64> = ev.population().iter().map(|o| o.id).collect();
        ids.dedup();
        assert_eq!(ids.len(), 6);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(EvolutionConfig {
            population_size: 1,
            ..small()
        }
        .validate()
        .is_err());
        assert!(EvolutionConfig {
            selection: Selection::Tournament(0),
            ..small()
        }
        .validate()
        .is_err());
        assert!(EvolutionConfig {
            task: "association".into(),
            ..small()
        }
        .validate()
        .is_err());
    }
}

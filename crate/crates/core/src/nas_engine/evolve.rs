use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::genome::{Gene, Genome};
use super::pareto::{crowding_distance, dominates, front_ranks, nondominated_sort, Objectives};
use super::NasError;
use crate::model_zoo;
use crate::seed;
use crate::tensor_nn::{train, Example, ModelGraph, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NasConfig {
    pub budget: usize,
    pub population: usize,
    pub sample: usize,
}

impl Default for NasConfig {
    fn default() -> Self {
        NasConfig {
            budget: 60,
            population: 20,
            sample: 5,
        }
    }
}

impl NasConfig {
    pub fn validate(&self) -> Result<(), NasError> {
        if !(self.budget >= self.population && self.population >= self.sample && self.sample >= 2) {
            return Err(NasError::InvalidConfig(format!(
                "need budget >= population >= sample >= 2, got {} / {} / {}",
                self.budget, self.population, self.sample
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Genome,
    pub objectives: Objectives,
    /// Evaluation step at which the individual was created; the oldest
    /// population member is the one with the smallest value.
    pub age: u64,
    /// Whether the objectives came from the memo instead of training.
    pub cached: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParetoArchive {
    pub all_evaluated: Vec<Individual>,
    /// Indices into `all_evaluated` of the non-dominated members, by id.
    pub front: Vec<usize>,
}

impl ParetoArchive {
    pub fn from_evaluated(all_evaluated: Vec<Individual>) -> Self {
        let objs: Vec<Objectives> = all_evaluated.iter().map(|i| i.objectives).collect();
        let ids: Vec<u64> = all_evaluated.iter().map(|i| i.genome.id).collect();
        let front = nondominated_sort(&objs, &ids)
            .into_iter()
            .next()
            .unwrap_or_default();
        ParetoArchive {
            all_evaluated,
            front,
        }
    }

    pub fn front_members(&self) -> impl Iterator<Item = &Individual> {
        self.front.iter().map(|&i| &self.all_evaluated[i])
    }
}

/// Source of the accuracy objective.
pub trait Evaluator {
    fn accuracy(&mut self, genome: &Genome) -> Result<f64, NasError>;
}

/// Trains the spectrum model of each genome and reports its best mean
/// validation accuracy.
pub struct TrainingEvaluator<'a> {
    pub train: Vec<Example<'a>>,
    pub val: Vec<Example<'a>>,
    pub config: TrainConfig,
    pub seed: u64,
}

impl Evaluator for TrainingEvaluator<'_> {
    fn accuracy(&mut self, genome: &Genome) -> Result<f64, NasError> {
        let arch = model_zoo::spectrum_model(genome)?;
        let mut rng = seed::rng_from(seed::derive_indexed(self.seed, "nas-init", genome.id));
        let model = ModelGraph::<f32>::new(&arch, &mut rng)?;
        let cfg = TrainConfig {
            seed: seed::derive_indexed(self.seed, "nas-train", genome.id),
            ..self.config.clone()
        };
        Ok(train(model, &self.train, &self.val, &cfg)?.best_val_mean_acc)
    }
}

/// Memoises evaluations by canonical genome.
pub struct Memo<E> {
    pub inner: E,
    cache: HashMap<String, f64>,
    pub trainings: usize,
}

impl<E: Evaluator> Memo<E> {
    pub fn new(inner: E) -> Self {
        Memo {
            inner,
            cache: HashMap::new(),
            trainings: 0,
        }
    }

    /// Returns the objectives and whether they were cached.
    pub fn evaluate(&mut self, genome: &Genome) -> Result<(Objectives, bool), NasError> {
        let arch = model_zoo::spectrum_model(genome)?;
        let params = arch.count_params()?;
        let macs = arch.count_macs()?;
        let key = genome.canonical();
        let (accuracy, cached) = match self.cache.get(&key) {
            Some(&a) => (a, true),
            None => {
                let a = self.inner.accuracy(genome)?;
                self.trainings += 1;
                self.cache.insert(key, a);
                (a, false)
            }
        };
        Ok((
            Objectives {
                accuracy,
                params,
                macs,
            },
            cached,
        ))
    }
}

fn make_individual<E: Evaluator>(
    memo: &mut Memo<E>,
    genome: Genome,
    age: u64,
) -> Result<Individual, NasError> {
    let t0 = Instant::now();
    let (objectives, cached) = memo.evaluate(&genome)?;
    Ok(Individual {
        genome,
        objectives,
        age,
        cached,
        wall_time_s: t0.elapsed().as_secs_f64(),
    })
}

/// Aging evolution with NSGA-II parent choice: each cycle samples a
/// tournament from the population, picks the member with the best
/// (front rank, crowding distance, id) computed over the whole
/// population, adds its mutated child and retires the oldest member.
/// Every created individual counts against `budget`.
pub fn evolve<E: Evaluator>(
    seed_genome: &Genome,
    cfg: &NasConfig,
    memo: &mut Memo<E>,
    seed: u64,
    mut on_eval: impl FnMut(&Individual),
) -> Result<ParetoArchive, NasError> {
    cfg.validate()?;
    seed_genome.validate()?;
    let mut rng = seed::rng_for(seed, "nas-evolve");
    let mut all: Vec<Individual> = Vec::with_capacity(cfg.budget);
    let mut population: VecDeque<usize> = VecDeque::with_capacity(cfg.population + 1);

    let mut first = seed_genome.clone();
    first.id = 0;
    first.parent_id = None;
    let ind = make_individual(memo, first, 0)?;
    on_eval(&ind);
    all.push(ind);
    population.push_back(0);
    while all.len() < cfg.population {
        let id = all.len() as u64;
        let mut child = all[0].genome.mutate(&mut rng);
        child.id = id;
        let ind = make_individual(memo, child, id)?;
        on_eval(&ind);
        all.push(ind);
        population.push_back(id as usize);
    }

    while all.len() < cfg.budget {
        let members: Vec<usize> = population.iter().copied().collect();
        let objs: Vec<Objectives> = members.iter().map(|&i| all[i].objectives).collect();
        let ids: Vec<u64> = members.iter().map(|&i| all[i].genome.id).collect();
        let ranks = front_ranks(&objs, &ids);
        let mut crowd = vec![0.0; members.len()];
        for front in nondominated_sort(&objs, &ids) {
            let fo: Vec<Objectives> = front.iter().map(|&i| objs[i]).collect();
            for (&i, d) in front.iter().zip(crowding_distance(&fo)) {
                crowd[i] = d;
            }
        }
        let picks = sample(&mut rng, members.len(), cfg.sample);
        let best = picks
            .iter()
            .min_by(|&a, &b| {
                ranks[a]
                    .cmp(&ranks[b])
                    .then(crowd[b].total_cmp(&crowd[a]))
                    .then(ids[a].cmp(&ids[b]))
            })
            .unwrap();
        let parent = &all[members[best]].genome;
        let id = all.len() as u64;
        let mut child = parent.mutate(&mut rng);
        child.id = id;
        let ind = make_individual(memo, child, id)?;
        on_eval(&ind);
        all.push(ind);
        population.push_back(id as usize);
        let oldest = (0..population.len())
            .min_by_key(|&p| all[population[p]].age)
            .unwrap();
        population.remove(oldest);
    }
    Ok(ParetoArchive::from_evaluated(all))
}

/// Smallest front member (params, then MACs, then id) reaching
/// `min_accuracy`.
pub fn pick_candidate(archive: &ParetoArchive, min_accuracy: f64) -> Result<&Individual, NasError> {
    archive
        .front_members()
        .filter(|i| i.objectives.accuracy >= min_accuracy)
        .min_by_key(|i| (i.objectives.params, i.objectives.macs, i.genome.id))
        .ok_or(NasError::NoCandidateMeetsThreshold(min_accuracy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveRecord {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub genome: String,
    pub layers: Vec<Gene>,
    pub accuracy: f64,
    pub params: usize,
    pub macs: u64,
    pub age: u64,
    pub cached: bool,
}

impl From<&Individual> for ArchiveRecord {
    fn from(i: &Individual) -> Self {
        ArchiveRecord {
            id: i.genome.id,
            parent_id: i.genome.parent_id,
            genome: i.genome.canonical(),
            layers: i.genome.layers.clone(),
            accuracy: i.objectives.accuracy,
            params: i.objectives.params,
            macs: i.objectives.macs,
            age: i.age,
            cached: i.cached,
        }
    }
}

impl From<ArchiveRecord> for Individual {
    fn from(r: ArchiveRecord) -> Self {
        Individual {
            genome: Genome {
                layers: r.layers,
                id: r.id,
                parent_id: r.parent_id,
            },
            objectives: Objectives {
                accuracy: r.accuracy,
                params: r.params,
                macs: r.macs,
            },
            age: r.age,
            cached: r.cached,
            wall_time_s: 0.0,
        }
    }
}

pub fn write_archive_jsonl(path: &Path, archive: &ParetoArchive) -> Result<(), NasError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for i in &archive.all_evaluated {
        serde_json::to_writer(&mut f, &ArchiveRecord::from(i))?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_archive_jsonl(path: &Path) -> Result<ParetoArchive, NasError> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut all = Vec::new();
    for line in f.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ArchiveRecord = serde_json::from_str(&line)?;
        all.push(rec.into());
    }
    Ok(ParetoArchive::from_evaluated(all))
}

pub fn write_front_csv(path: &Path, archive: &ParetoArchive) -> Result<(), NasError> {
    let mut s = String::from("accuracy,params,macs,genome_id,genome\n");
    for i in archive.front_members() {
        let o = i.objectives;
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            o.accuracy,
            o.params,
            o.macs,
            i.genome.id,
            i.genome.canonical()
        ));
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Reads `(genome_id, objectives)` rows of a front CSV back, rejecting files in which one row dominates
/// another.
pub fn read_front_csv(path: &Path) -> Result<Vec<(u64, Objectives)>, NasError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let bad = || NasError::Format(format!("{}: malformed row {}", path.display(), n + 1));
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 4 {
            return Err(bad());
        }
        out.push((
            cols[3].parse().map_err(|_| bad())?,
            Objectives {
                accuracy: cols[0].parse().map_err(|_| bad())?,
                params: cols[1].parse().map_err(|_| bad())?,
                macs: cols[2].parse().map_err(|_| bad())?,
            },
        ));
    }
    for (a, oa) in &out {
        if let Some((b, _)) = out.iter().find(|(_, ob)| dominates(ob, oa)) {
            return Err(NasError::Format(format!(
                "{}: genome {b} dominates genome {a}, not a Pareto front",
                path.display()
            )));
        }
    }
    Ok(out)
}

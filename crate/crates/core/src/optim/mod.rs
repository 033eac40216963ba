//! Population metaheuristics over a box: two differential-evolution mutation
//! schemes and particle swarm optimization.
//!
//! All three maximize. Constrained objectives report a violation alongside
//! their value and are ranked by the quadratic exterior penalty
//! `value − c·violation²`, with `c` escalated while the incumbent stays
//! infeasible.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` switched to
//! `stream`, so a `(seed, stream)` pair reproduces on every platform. Fitness
//! evaluations of one generation run on the rayon pool; all random draws
//! happen on the calling thread in a fixed order, so results do not depend
//! on the number of workers.

pub mod de;
pub mod pso;
mod space;
mod stats;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::DecisionVector;
use crate::params::ModelParameters;
use crate::policy::{penalized_value, PolicyKind, PolicyObjective};

pub use space::SearchSpace;
pub use stats::{multi_seed_stats, SeedStats};

/// Violations at or below this count as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error("need at least 2 results for multi-seed statistics, got {0}")]
    TooFewResults(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// DE with rand-to-best/1 mutation.
    De1,
    /// DE with current-to-rand/1 mutation.
    De2,
    Pso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::De1, Algorithm::De2, Algorithm::Pso];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::De1 => "de1",
            Algorithm::De2 => "de2",
            Algorithm::Pso => "pso",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "de1" | "de-1" => Ok(Algorithm::De1),
            "de2" | "de-2" => Ok(Algorithm::De2),
            "pso" => Ok(Algorithm::Pso),
            other => Err(format!("unknown algorithm {other:?} (expected de1, de2 or pso)")),
        }
    }
}

/// Multiply the penalty coefficient by `factor` every `every` iterations
/// while the incumbent is infeasible. `every = 0` keeps it fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltySchedule {
    pub initial: f64,
    pub factor: f64,
    pub every: usize,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        PenaltySchedule {
            initial: 1e6,
            factor: 2.0,
            every: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub pop_size: usize,
    pub max_iter: usize,
    /// DE scale factor.
    #[serde(rename = "F")]
    pub f: f64,
    /// DE crossover probability.
    #[serde(rename = "Pc")]
    pub pc: f64,
    pub c1: f64,
    pub c2: f64,
    /// PSO inertia weight.
    pub m0: f64,
    /// When set, inertia decays linearly from `m0` to this value.
    pub m_final: Option<f64>,
    pub seed: u64,
    pub stream: u64,
    pub penalty: PenaltySchedule,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::for_algorithm(Algorithm::Pso, 0)
    }
}

impl OptimizerConfig {
    /// Published defaults: 100 DE generations, 300 PSO iterations, 50 members.
    pub fn for_algorithm(algorithm: Algorithm, seed: u64) -> Self {
        OptimizerConfig {
            algorithm,
            pop_size: 50,
            max_iter: match algorithm {
                Algorithm::Pso => 300,
                _ => 100,
            },
            f: 0.6,
            pc: 0.8,
            c1: 2.0,
            c2: 2.0,
            m0: 0.7,
            m_final: None,
            seed,
            stream: 0,
            penalty: PenaltySchedule::default(),
        }
    }

    pub fn with_iterations(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |msg: String| Err(OptimError::InvalidConfig(msg));
        let min_pop = match self.algorithm {
            Algorithm::De1 => 3,
            Algorithm::De2 => 4,
            Algorithm::Pso => 1,
        };
        if self.pop_size < min_pop {
            return bad(format!(
                "{} needs pop_size >= {min_pop}, got {}",
                self.algorithm, self.pop_size
            ));
        }
        if !(0.0..=1.0).contains(&self.pc) {
            return bad(format!("Pc = {} outside [0, 1]", self.pc));
        }
        for (name, v) in [("F", self.f), ("c1", self.c1), ("c2", self.c2), ("m0", self.m0)] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} = {v} must be finite and nonnegative"));
            }
        }
        if let Some(m) = self.m_final {
            if !m.is_finite() || m < 0.0 {
                return bad(format!("m_final = {m} must be finite and nonnegative"));
            }
        }
        let p = &self.penalty;
        if !(p.initial > 0.0 && p.initial.is_finite()) || !(p.factor >= 1.0 && p.factor.is_finite()) {
            return bad(format!("penalty needs initial > 0 and factor >= 1, got {p:?}"));
        }
        Ok(())
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Objective value plus constraint violation at one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub value: f64,
    pub violation: f64,
}

impl Score {
    pub fn unconstrained(value: f64) -> Self {
        Score { value, violation: 0.0 }.sanitized()
    }

    /// Score of a candidate the objective cannot evaluate.
    pub fn invalid() -> Self {
        Score {
            value: f64::NEG_INFINITY,
            violation: f64::INFINITY,
        }
    }

    fn sanitized(self) -> Self {
        if self.value.is_nan() || self.violation.is_nan() || self.value == f64::INFINITY {
            Score::invalid()
        } else {
            self
        }
    }

    pub fn fitness(&self, coefficient: f64) -> f64 {
        if self.value == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        penalized_value(self.value, self.violation, coefficient)
    }

    pub fn is_feasible(&self) -> bool {
        self.value.is_finite() && self.violation <= FEASIBILITY_TOL
    }
}

/// Something to maximize over a box.
pub trait Objective: Sync {
    fn score(&self, x: &[f64]) -> Score;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn score(&self, x: &[f64]) -> Score {
        Score::unconstrained(self(x))
    }
}

/// Adapter for closures that return a full [`Score`].
pub struct Constrained<F>(pub F);

impl<F> Objective for Constrained<F>
where
    F: Fn(&[f64]) -> Score + Sync,
{
    fn score(&self, x: &[f64]) -> Score {
        (self.0)(x).sanitized()
    }
}

/// A policy objective over `(T0, ξ1, ξ2, G, W_r)`. Domain errors score as invalid.
#[derive(Debug, Clone)]
pub struct PolicyProblem {
    pub params: ModelParameters,
    pub policy: PolicyKind,
}

impl PolicyProblem {
    pub fn new(params: ModelParameters, policy: PolicyKind) -> Self {
        PolicyProblem { params, policy }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<PolicyObjective, crate::ModelError> {
        let d = DecisionVector::from_array([x[0], x[1], x[2], x[3], x[4]]);
        self.policy.objective(&self.params, &d)
    }
}

impl Objective for PolicyProblem {
    fn score(&self, x: &[f64]) -> Score {
        match self.evaluate(x) {
            Ok(obj) => Score {
                value: obj.value,
                violation: obj.constraint_violation,
            }
            .sanitized(),
            Err(_) => Score::invalid(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryPoint {
    pub iteration: usize,
    pub best_fitness: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub stream: u64,
    pub best: Vec<f64>,
    /// Penalized fitness of `best` under the final coefficient.
    pub best_fitness: f64,
    /// Raw objective value of `best`.
    pub best_value: f64,
    pub violation: f64,
    pub feasible: bool,
    pub penalty_coefficient: f64,
    /// Best-so-far fitness after each iteration, iteration 0 being the
    /// initial population. Nondecreasing.
    pub history: Vec<HistoryPoint>,
    pub evaluations: usize,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl RunResult {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &RunResult) -> bool {
        let mut a = self.clone();
        a.wall_time_secs = other.wall_time_secs;
        a == *other
    }
}

/// Run the configured algorithm.
pub fn run(space: &SearchSpace, config: &OptimizerConfig, objective: &dyn Objective) -> Result<RunResult, OptimError> {
    match config.algorithm {
        Algorithm::De1 | Algorithm::De2 => de::de_run(space, config, objective),
        Algorithm::Pso => pso::pso_run(space, config, objective),
    }
}

/// Run streams `0..n` of the same seed.
pub fn run_seeds(
    space: &SearchSpace,
    config: &OptimizerConfig,
    objective: &dyn Objective,
    n: usize,
) -> Result<Vec<RunResult>, OptimError> {
    (0..n as u64)
        .map(|k| run(space, &config.clone().with_stream(k), objective))
        .collect()
}

/// The run to report across seeds: feasible runs first, then the highest
/// raw objective value.
pub fn select_best(results: &[RunResult]) -> Option<&RunResult> {
    results
        .iter()
        .max_by(|a, b| a.feasible.cmp(&b.feasible).then(a.best_value.total_cmp(&b.best_value)))
}

pub(crate) fn evaluate_all(objective: &dyn Objective, xs: &[Vec<f64>]) -> Vec<Score> {
    xs.par_iter().map(|x| objective.score(x)).collect()
}

pub(crate) fn argmax(scores: &[Score], coefficient: f64) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if s.fitness(coefficient) > scores[best].fitness(coefficient) {
            best = i;
        }
    }
    best
}

/// Escalating penalty coefficient.
pub(crate) struct Penalty {
    pub coefficient: f64,
    schedule: PenaltySchedule,
}

impl Penalty {
    pub fn new(schedule: PenaltySchedule) -> Self {
        Penalty {
            coefficient: schedule.initial,
            schedule,
        }
    }

    pub fn update(&mut self, iteration: usize, incumbent: &Score) {
        let every = self.schedule.every;
        if every > 0 && iteration > 0 && iteration.is_multiple_of(every) && incumbent.violation > FEASIBILITY_TOL {
            self.coefficient *= self.schedule.factor;
        }
    }
}

/// Incumbent per iteration; ranked under the final coefficient at the end.
pub(crate) struct Tracker {
    started: Instant,
    incumbents: Vec<(Vec<f64>, Score)>,
    pub evaluations: usize,
}

impl Tracker {
    pub fn new() -> Self {
        Tracker {
            started: Instant::now(),
            incumbents: Vec::new(),
            evaluations: 0,
        }
    }

    pub fn record(&mut self, x: &[f64], score: Score) {
        self.incumbents.push((x.to_vec(), score));
    }

    pub fn finish(self, config: &OptimizerConfig, coefficient: f64) -> RunResult {
        let mut history = Vec::with_capacity(self.incumbents.len());
        let mut best = 0;
        for (k, (_, s)) in self.incumbents.iter().enumerate() {
            if s.fitness(coefficient) > self.incumbents[best].1.fitness(coefficient) {
                best = k;
            }
            let b = &self.incumbents[best].1;
            history.push(HistoryPoint {
                iteration: k,
                best_fitness: b.fitness(coefficient),
                feasible: b.is_feasible(),
            });
        }
        let (x, s) = &self.incumbents[best];
        RunResult {
            algorithm: config.algorithm,
            seed: config.seed,
            stream: config.stream,
            best: x.clone(),
            best_fitness: s.fitness(coefficient),
            best_value: s.value,
            violation: s.violation,
            feasible: s.is_feasible(),
            penalty_coefficient: coefficient,
            history,
            evaluations: self.evaluations,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
        }
    }
}

/// Uniform random population inside `space`.
pub(crate) fn random_population(space: &SearchSpace, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    use rand::Rng;
    (0..n)
        .map(|_| {
            (0..space.dim())
                .map(|j| space.lower[j] + rng.random::<f64>() * (space.upper[j] - space.lower[j]))
                .collect()
        })
        .collect()
}

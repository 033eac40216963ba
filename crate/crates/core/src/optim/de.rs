//! Differential evolution with binomial crossover and greedy selection.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    argmax, evaluate_all, random_population, Algorithm, Objective, OptimError, OptimizerConfig, Penalty, RunResult,
    SearchSpace, Tracker,
};

/// rand-to-best/1: `x_i + R(x_best − x_i) + F(x_a − x_b)`.
pub fn de_mutate_rand_to_best(x_i: &[f64], x_best: &[f64], x_a: &[f64], x_b: &[f64], f: f64, r: f64) -> Vec<f64> {
    (0..x_i.len())
        .map(|j| x_i[j] + r * (x_best[j] - x_i[j]) + f * (x_a[j] - x_b[j]))
        .collect()
}

/// current-to-rand/1: `x_i + R(x_a − x_i) + F(x_b − x_c)`.
pub fn de_mutate_current_to_rand(x_i: &[f64], x_a: &[f64], x_b: &[f64], x_c: &[f64], f: f64, r: f64) -> Vec<f64> {
    (0..x_i.len())
        .map(|j| x_i[j] + r * (x_a[j] - x_i[j]) + f * (x_b[j] - x_c[j]))
        .collect()
}

/// Take each component from `donor` with probability `pc`; component
/// `j_rand` always comes from the donor.
pub fn binomial_crossover(target: &[f64], donor: &[f64], pc: f64, rng: &mut impl Rng) -> Vec<f64> {
    let n = target.len();
    let j_rand = rng.random_range(0..n);
    (0..n)
        .map(|j| {
            let u: f64 = rng.random();
            if j == j_rand || u < pc {
                donor[j]
            } else {
                target[j]
            }
        })
        .collect()
}

/// `k` distinct indices in `0..n`, none equal to `exclude`.
pub fn distinct_indices<const K: usize>(n: usize, exclude: usize, rng: &mut impl Rng) -> [usize; K] {
    let mut out = [0usize; K];
    let mut filled = 0;
    while filled < K {
        let c = rng.random_range(0..n);
        if c != exclude && !out[..filled].contains(&c) {
            out[filled] = c;
            filled += 1;
        }
    }
    out
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            return r;
        }
    }
}

pub fn de_run(
    space: &SearchSpace,
    config: &OptimizerConfig,
    objective: &dyn Objective,
) -> Result<RunResult, OptimError> {
    space.check()?;
    config.validate()?;
    if config.algorithm == Algorithm::Pso {
        return Err(OptimError::InvalidConfig("de_run called with the PSO algorithm".into()));
    }

    let mut rng = config.rng();
    let np = config.pop_size;
    let mut penalty = Penalty::new(config.penalty);
    let mut tracker = Tracker::new();

    let mut pop = random_population(space, np, &mut rng);
    let mut scores = evaluate_all(objective, &pop);
    tracker.evaluations += np;
    let b = argmax(&scores, penalty.coefficient);
    tracker.record(&pop[b], scores[b]);

    for iter in 1..=config.max_iter {
        let best = argmax(&scores, penalty.coefficient);
        penalty.update(iter, &scores[best]);
        let c = penalty.coefficient;
        let best = argmax(&scores, c);

        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let r = open_unit(&mut rng);
                let mut donor = match config.algorithm {
                    Algorithm::De1 => {
                        let [a, b] = distinct_indices::<2>(np, i, &mut rng);
                        de_mutate_rand_to_best(&pop[i], &pop[best], &pop[a], &pop[b], config.f, r)
                    }
                    _ => {
                        let [a, b, k] = distinct_indices::<3>(np, i, &mut rng);
                        de_mutate_current_to_rand(&pop[i], &pop[a], &pop[b], &pop[k], config.f, r)
                    }
                };
                space.reflect(&mut donor);
                binomial_crossover(&pop[i], &donor, config.pc, &mut rng)
            })
            .collect();

        let trial_scores = evaluate_all(objective, &trials);
        tracker.evaluations += np;
        for (i, (x, s)) in trials.into_iter().zip(trial_scores).enumerate() {
            if s.fitness(c) >= scores[i].fitness(c) {
                pop[i] = x;
                scores[i] = s;
            }
        }
        let b = argmax(&scores, c);
        tracker.record(&pop[b], scores[b]);
    }

    Ok(tracker.finish(config, penalty.coefficient))
}

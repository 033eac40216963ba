//! Global-best particle swarm optimization with inertia weight.

use rand::Rng;

use super::{
    argmax, evaluate_all, random_population, Algorithm, Objective, OptimError, OptimizerConfig, Penalty, RunResult,
    SearchSpace, Tracker,
};

/// One velocity and position step:
/// `V' = m0·V + c1·r1·(Pbest − X) + c2·r2·(Gbest − X)`, `X' = X + V'`.
#[allow(clippy::too_many_arguments)]
pub fn pso_update(
    x: &[f64],
    v: &[f64],
    pbest: &[f64],
    gbest: &[f64],
    m0: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
) -> (Vec<f64>, Vec<f64>) {
    let v_new: Vec<f64> = (0..x.len())
        .map(|j| m0 * v[j] + c1 * r1 * (pbest[j] - x[j]) + c2 * r2 * (gbest[j] - x[j]))
        .collect();
    let x_new = x.iter().zip(&v_new).map(|(a, b)| a + b).collect();
    (x_new, v_new)
}

pub fn pso_run(
    space: &SearchSpace,
    config: &OptimizerConfig,
    objective: &dyn Objective,
) -> Result<RunResult, OptimError> {
    space.check()?;
    config.validate()?;
    if config.algorithm != Algorithm::Pso {
        return Err(OptimError::InvalidConfig("pso_run called with a DE algorithm".into()));
    }

    let mut rng = config.rng();
    let n = config.pop_size;
    let dim = space.dim();
    let mut penalty = Penalty::new(config.penalty);
    let mut tracker = Tracker::new();

    let mut xs = random_population(space, n, &mut rng);
    let mut vs = vec![vec![0.0; dim]; n];
    let mut pbest = xs.clone();
    let mut pscores = evaluate_all(objective, &xs);
    tracker.evaluations += n;
    let mut g = argmax(&pscores, penalty.coefficient);
    tracker.record(&pbest[g], pscores[g]);

    for iter in 1..=config.max_iter {
        penalty.update(iter, &pscores[g]);
        let c = penalty.coefficient;
        g = argmax(&pscores, c);
        let inertia = match config.m_final {
            Some(m_end) if config.max_iter > 1 => {
                let frac = (iter - 1) as f64 / (config.max_iter - 1) as f64;
                config.m0 + (m_end - config.m0) * frac
            }
            _ => config.m0,
        };

        for i in 0..n {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let (mut x, mut v) = pso_update(
                &xs[i], &vs[i], &pbest[i], &pbest[g], inertia, config.c1, config.c2, r1, r2,
            );
            for (j, clamped) in space.clamp(&mut x).into_iter().enumerate() {
                if clamped {
                    v[j] = 0.0;
                }
            }
            xs[i] = x;
            vs[i] = v;
        }

        let scores = evaluate_all(objective, &xs);
        tracker.evaluations += n;
        for i in 0..n {
            if scores[i].fitness(c) >= pscores[i].fitness(c) {
                pbest[i].clone_from(&xs[i]);
                pscores[i] = scores[i];
            }
        }
        g = argmax(&pscores, c);
        tracker.record(&pbest[g], pscores[g]);
    }

    Ok(tracker.finish(config, penalty.coefficient))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_reference_values() {
        let (x, v) = pso_update(&[0.0], &[1.0], &[2.0], &[4.0], 0.7, 2.0, 2.0, 0.5, 0.5);
        assert!((v[0] - 6.7).abs() < 1e-12 && (x[0] - 6.7).abs() < 1e-12);
    }

    #[test]
    fn attraction_vanishes_at_the_best() {
        let p = [1.0, 2.0];
        let (x, v) = pso_update(&p, &[0.5, -1.0], &p, &p, 0.7, 2.0, 2.0, 0.3, 0.9);
        assert_eq!(v, vec![0.35, -0.7]);
        assert_eq!(x, vec![1.35, 1.3]);
        let (x, v) = pso_update(&p, &[0.0, 0.0], &p, &p, 0.7, 2.0, 2.0, 0.3, 0.9);
        assert_eq!((x, v), (p.to_vec(), vec![0.0, 0.0]));
    }
}

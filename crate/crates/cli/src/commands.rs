use std::path::PathBuf;

use anyhow::{anyhow, Context as _};
use greenchain_core::anfis::{generate_dataset, train_hybrid, AnfisModel};
use greenchain_core::optim::{multi_seed_stats, run_seeds, select_best, OptimizerConfig, PolicyProblem, SearchSpace};
use greenchain_core::sensitivity::{
    calibrate_missing_defaults, direction_verdict, published_pct_changes, run_sweep, BaselineRow, SweepSpec,
    DEFAULT_LEVELS, DIRECTION_CHECKS, PUBLISHED_PCT_CHANGES,
};
use greenchain_core::surface::{profit_surface, Axis};
use greenchain_core::{DecisionVector, ModelParameters, PolicyKind};
use log::info;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{cell, write_all, Artifact};
use crate::{Cli, Failure, InputContext, SearchArgs};

pub struct Context<'a> {
    pub cli: &'a Cli,
    pub cfg: &'a RunConfig,
}

impl Context<'_> {
    fn policy(&self) -> PolicyKind {
        self.cli.policy.or(self.cfg.policy).unwrap_or(PolicyKind::CarbonTax)
    }

    fn params(&self, policy: PolicyKind) -> Result<ModelParameters, Failure> {
        self.cfg.params(self.cli.params.as_deref(), policy).input()
    }

    fn out_dir(&self) -> PathBuf {
        self.cfg.out_dir(self.cli.out.as_deref())
    }

    /// Output directory only if one was asked for, by flag or config.
    fn explicit_out_dir(&self) -> Option<PathBuf> {
        (self.cli.out.is_some() || self.cfg.out.is_some()).then(|| self.out_dir())
    }

    fn decisions(&self) -> Result<DecisionVector, Failure> {
        self.cfg
            .decisions
            .ok_or_else(|| Failure::Input(anyhow!("no decision vector: set \"decisions\" in the config")))
    }

    fn optimizer(&self, search: &SearchArgs) -> Result<OptimizerConfig, Failure> {
        let seed = search
            .seed
            .or(self.cfg.seed)
            .ok_or_else(|| Failure::Input(anyhow!("a seed is required: pass --seed or set \"seed\" in the config")))?;
        let mut cfg = self.cfg.optimizer(search.algo, seed);
        if let Some(n) = search.iters {
            cfg.max_iter = n;
        }
        if let Some(n) = search.pop {
            cfg.pop_size = n;
        }
        cfg.validate().input()?;
        Ok(cfg)
    }

    fn write(&self, dir: PathBuf, artifacts: &[Artifact]) -> Result<(), Failure> {
        let paths = write_all(&dir, artifacts).map_err(Failure::Internal)?;
        for p in paths {
            info!("wrote {}", p.display());
        }
        Ok(())
    }
}

fn internal<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Internal)
}

pub fn evaluate(ctx: &Context, set: &[(String, f64)]) -> Result<(), Failure> {
    let policy = ctx.policy();
    let params = ctx.params(policy)?;
    let mut x = ctx.cfg.decisions.map(|d| d.to_array()).unwrap_or([f64::NAN; 5]);
    for (name, value) in set {
        let i = DecisionVector::index_of(name).ok_or_else(|| {
            Failure::Input(anyhow!(
                "unknown decision variable {name:?} (expected one of {:?})",
                DecisionVector::NAMES
            ))
        })?;
        x[i] = *value;
    }
    let missing: Vec<&str> = DecisionVector::NAMES
        .iter()
        .zip(x)
        .filter(|(_, v)| v.is_nan())
        .map(|(n, _)| *n)
        .collect();
    if !missing.is_empty() {
        return Err(Failure::Input(anyhow!(
            "decision vector incomplete, missing {}",
            missing.join(", ")
        )));
    }
    let obj = policy.objective(&params, &DecisionVector::from_array(x)).input()?;

    let body = json!({
        "policy": policy,
        "decisions": obj.diagnostics.decisions,
        "objective": {
            "value": obj.value,
            "phi_m": obj.phi_m,
            "phi_r": obj.phi_r,
            "constraint_violation": obj.constraint_violation,
            "feasible": obj.is_feasible(),
            "total_emissions": obj.total_emissions,
            "reduction": obj.reduction,
        },
        "profits": obj.diagnostics.profits,
        "schedule": obj.diagnostics.schedule,
        "costs": obj.diagnostics.costs,
    });
    println!("{}", internal(serde_json::to_string_pretty(&body).map_err(Into::into))?);
    if let Some(dir) = ctx.explicit_out_dir() {
        ctx.write(dir, &[internal(Artifact::json("evaluate.json", "evaluate", &body))?])?;
    }
    Ok(())
}

pub fn optimize(ctx: &Context, search: &SearchArgs, seeds: Option<usize>) -> Result<(), Failure> {
    let policy = ctx.policy();
    let params = ctx.params(policy)?;
    let config = ctx.optimizer(search)?;
    let n = seeds.or(ctx.cfg.optimizer.seeds).unwrap_or(1);
    if n == 0 {
        return Err(Failure::Input(anyhow!("--seeds must be at least 1")));
    }
    let space = SearchSpace::model_default(&params);
    let problem = PolicyProblem::new(params, policy);
    let runs = run_seeds(&space, &config, &problem, n).input()?;
    let best = select_best(&runs).expect("at least one run");
    let x = DecisionVector::from_array([best.best[0], best.best[1], best.best[2], best.best[3], best.best[4]]);
    let objective = problem.evaluate(&best.best).ok();
    let stats = if n >= 2 {
        let values: Vec<f64> = runs.iter().map(|r| r.best_value).collect();
        Some(multi_seed_stats(&values).input()?)
    } else {
        None
    };

    let run_summaries: Vec<Value> = runs
        .iter()
        .map(|r| {
            json!({
                "stream": r.stream,
                "best_value": r.best_value,
                "best_fitness": r.best_fitness,
                "violation": r.violation,
                "feasible": r.feasible,
                "evaluations": r.evaluations,
                "best": r.best,
            })
        })
        .collect();
    let body = json!({
        "policy": policy,
        "algorithm": config.algorithm,
        "optimizer": config,
        "seeds": n,
        "reported_stream": best.stream,
        "best": x,
        "value": best.best_value,
        "feasible": best.feasible,
        "violation": best.violation,
        "objective": objective.map(|o| json!({
            "value": o.value,
            "phi_m": o.phi_m,
            "phi_r": o.phi_r,
            "total_emissions": o.total_emissions,
            "constraint_violation": o.constraint_violation,
        })),
        "summary": stats.map(|s| json!({
            "n": s.n, "max": s.max, "mean": s.mean, "std": s.std, "relative_std": s.relative_std(),
        })),
        "runs": run_summaries,
    });
    let rows = runs.iter().flat_map(|r| {
        r.history.iter().map(move |h| {
            vec![
                r.stream.to_string(),
                h.iteration.to_string(),
                cell(Some(h.best_fitness)),
                h.feasible.to_string(),
            ]
        })
    });
    let artifacts = [
        internal(Artifact::json("best.json", "optimize", &body))?,
        internal(Artifact::csv(
            "convergence.csv",
            &["stream", "iteration", "best_fitness", "feasible"],
            rows,
        ))?,
    ];
    ctx.write(ctx.out_dir(), &artifacts)?;

    println!(
        "{} {} best {:.6} (stream {}, feasible {})",
        config.algorithm, policy, best.best_value, best.stream, best.feasible
    );
    println!(
        "  T0 = {:.6}, xi1 = {:.6}, xi2 = {:.6}, G = {:.6}, W_r = {:.6}",
        x.t0, x.xi1, x.xi2, x.g, x.w_r
    );
    if let Some(s) = stats {
        println!(
            "  seeds {}: max {:.6}, mean {:.6}, std {:.3e}",
            s.n, s.max, s.mean, s.std
        );
    }
    Ok(())
}

pub fn sensitivity(
    ctx: &Context,
    search: &SearchArgs,
    flags: &[String],
    published: bool,
    fixed: bool,
) -> Result<(), Failure> {
    let policy = ctx.policy();
    let params = ctx.params(policy)?;
    let section = &ctx.cfg.sweep;
    let parameters: Vec<String> = if !flags.is_empty() {
        flags.to_vec()
    } else if published {
        PUBLISHED_PCT_CHANGES.iter().map(|(p, _)| p.to_string()).collect()
    } else {
        section.parameters.clone()
    };
    if parameters.is_empty() {
        return Err(Failure::Input(anyhow!(
            "no parameters to sweep: pass --param, --published, or set sweep.parameters"
        )));
    }
    let reoptimize = !fixed && section.reoptimize.unwrap_or(true);
    let optimizer = if reoptimize {
        ctx.optimizer(search)?
    } else {
        OptimizerConfig::default()
    };

    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for name in &parameters {
        let mut spec = SweepSpec::new(name, optimizer.clone());
        spec.policy = policy;
        if let Some(levels) = &section.levels {
            spec.levels = levels.clone();
        }
        if !reoptimize {
            spec = spec.fixed_decisions(ctx.decisions()?);
        }
        info!("sweeping {name}");
        let sweep = run_sweep(&spec, &params).input()?;
        if let Some((_, dir)) = DIRECTION_CHECKS.iter().find(|(p, _)| p == name) {
            verdicts.push(direction_verdict(&sweep, name, *dir));
        }
        let reference = published_pct_changes(name);
        for row in sweep {
            let pub_pct = reference.and_then(|r| DEFAULT_LEVELS.iter().position(|l| *l == row.level).map(|i| r[i]));
            let d = row.decisions;
            rows.push(vec![
                row.parameter.clone(),
                format!("{}", row.level),
                cell(Some(row.value)),
                cell(d.map(|d| d.t0)),
                cell(d.map(|d| d.xi1)),
                cell(d.map(|d| d.xi2)),
                cell(d.map(|d| d.g)),
                cell(d.map(|d| d.w_r)),
                cell(row.z_m),
                cell(row.z_r),
                cell(row.phi_t),
                cell(row.pct_change),
                cell(pub_pct),
                row.feasible.to_string(),
                row.note.unwrap_or_default(),
            ]);
        }
    }

    let passed = verdicts.iter().filter(|v| v.passed).count();
    let body = json!({
        "policy": policy,
        "reoptimize": reoptimize,
        "optimizer": reoptimize.then_some(&optimizer),
        "checks": verdicts,
        "passed": passed,
    });
    let header = [
        "parameter",
        "level",
        "value",
        "T0",
        "xi1",
        "xi2",
        "G",
        "W_r",
        "Z_m",
        "Z_r",
        "phi_T",
        "pct_change",
        "published_pct_change",
        "feasible",
        "note",
    ];
    let artifacts = [
        internal(Artifact::csv("sensitivity.csv", &header, rows))?,
        internal(Artifact::json("directions.json", "sensitivity", &body))?,
    ];
    ctx.write(ctx.out_dir(), &artifacts)?;
    println!(
        "swept {} parameters; direction checks {passed}/{} pass",
        parameters.len(),
        verdicts.len()
    );
    Ok(())
}

pub fn anfis(
    ctx: &Context,
    variable: Option<&str>,
    lo: Option<f64>,
    hi: Option<f64>,
    points: Option<usize>,
    epochs: Option<usize>,
) -> Result<(), Failure> {
    let params = ctx.params(PolicyKind::CarbonTax)?;
    let base = ctx.decisions()?;
    let section = &ctx.cfg.anfis;
    let variable = variable
        .map(str::to_string)
        .or_else(|| section.variable.clone())
        .unwrap_or_else(|| "T0".into());
    let (lo, hi) = match (lo.or(section.lo), hi.or(section.hi)) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            return Err(Failure::Input(anyhow!(
                "the sweep range needs --lo and --hi (or anfis.lo, anfis.hi)"
            )))
        }
    };
    let n = points.or(section.points).unwrap_or(61);
    let mut train = ctx.cfg.train_config();
    if let Some(e) = epochs {
        train.epochs = e;
    }

    let data = generate_dataset(&params, &base, &variable, lo, hi, n).input()?;
    let model = AnfisModel::grid(lo, hi).input()?;
    let fit = train_hybrid(&model, &data, &train).input()?;
    let y_hat = fit.model.predict(&data.x).input()?;
    let rmse = *fit.rmse_history.last().expect("at least one epoch");
    let (ymin, ymax) = data
        .y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));

    let body = json!({
        "variable": variable,
        "range": [lo, hi],
        "points": n,
        "skipped": data.skipped,
        "training": train,
        "rmse": rmse,
        "rmse_relative_to_range": if ymax > ymin { Some(rmse / (ymax - ymin)) } else { None },
        "final_learning_rate": fit.final_learning_rate,
        "nodes": fit.model.node_count(),
        "rules": fit.model.rule_count(),
        "linear_parameters": fit.model.linear_parameter_count(),
        "nonlinear_parameters": fit.model.nonlinear_parameter_count(),
        "model": fit.model,
    });
    let data_rows = data
        .x
        .iter()
        .zip(&data.y)
        .zip(&y_hat)
        .map(|((x, y), yh)| vec![cell(Some(*x)), cell(Some(*y)), cell(Some(*yh))]);
    let history_rows = fit
        .rmse_history
        .iter()
        .enumerate()
        .map(|(i, e)| vec![i.to_string(), cell(Some(*e))]);
    let artifacts = [
        internal(Artifact::json("anfis_model.json", "anfis", &body))?,
        internal(Artifact::csv("anfis_data.csv", &["x", "y", "y_hat"], data_rows))?,
        internal(Artifact::csv("anfis_training.csv", &["epoch", "rmse"], history_rows))?,
    ];
    ctx.write(ctx.out_dir(), &artifacts)?;
    println!(
        "trained on {} points over {variable} in [{lo}, {hi}]: rmse {rmse:.6}",
        data.len()
    );
    Ok(())
}

pub fn surface(ctx: &Context, x: Option<Axis>, y: Option<Axis>) -> Result<(), Failure> {
    let policy = ctx.policy();
    let params = ctx.params(policy)?;
    let base = ctx.decisions()?;
    let section = &ctx.cfg.surface;
    let (Some(x), Some(y)) = (x.or_else(|| section.x.clone()), y.or_else(|| section.y.clone())) else {
        return Err(Failure::Input(anyhow!(
            "the surface needs --x and --y (or surface.x, surface.y)"
        )));
    };
    let cells = profit_surface(&params, policy, &base, &x, &y).input()?;
    let admissible = cells.iter().filter(|c| c.value.is_some()).count();
    let rows = cells
        .iter()
        .map(|c| vec![cell(Some(c.x)), cell(Some(c.y)), cell(c.value)]);
    let header = [x.variable.as_str(), y.variable.as_str(), "phi_T"];
    ctx.write(ctx.out_dir(), &[internal(Artifact::csv("surface.csv", &header, rows))?])?;
    println!("{}x{} grid, {admissible} admissible cells", x.n, y.n);
    Ok(())
}

pub fn calibrate(ctx: &Context, no_stationarity: bool) -> Result<(), Failure> {
    let mut doc = ctx.cfg.params_document(ctx.cli.params.as_deref()).input()?;
    let map = doc
        .as_object_mut()
        .ok_or_else(|| Failure::Input(anyhow!("parameter document is not a JSON object")))?;
    // The fitted constants only need placeholders to pass validation.
    for key in ["v1", "v2"] {
        map.entry(key).or_insert(json!(1.0));
    }
    map.entry("C_Tax").or_insert(json!(0.0));
    let params = ModelParameters::from_json(&doc, None)
        .map_err(|e| anyhow!("invalid parameters: {e}"))
        .input()?;

    let section = &ctx.cfg.calibration;
    let target = section.target.unwrap_or_else(BaselineRow::reference);
    let mut settings = section.settings;
    if no_stationarity {
        settings.stationarity_weight = 0.0;
    }
    let result = calibrate_missing_defaults(&params, &target, &settings).input()?;
    print!("{}", result.report());

    if let Some(dir) = ctx.explicit_out_dir() {
        let calibrated = result.apply(&params);
        let mut calibrated_doc = internal(serde_json::to_value(&calibrated).context("serializing parameters"))?;
        if let Value::Object(m) = &mut calibrated_doc {
            if m.get("C_CT").is_none_or(Value::is_null) {
                m.insert("C_CT".into(), json!(result.c_tax));
            }
        }
        let body = json!({
            "target": target,
            "settings": settings,
            "result": result,
            "parameters": calibrated_doc,
        });
        ctx.write(
            dir,
            &[internal(Artifact::json("calibration.json", "calibrate", &body))?],
        )?;
    }
    if !result.passed {
        return Err(Failure::Calibration(format!(
            "largest relative error {:.3e} exceeds tolerance {:.3e}",
            result.max_relative_error, settings.tolerance
        )));
    }
    Ok(())
}

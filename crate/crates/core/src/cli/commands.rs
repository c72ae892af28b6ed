//! The pipeline steps behind each subcommand. Every step writes its outputs
//! into a directory and returns what it wrote.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{config_err, GridSection, PlanSection, RunConfig, SimulateSection, TaskSection};
use super::records::{
    fmt_f64, read_curve, read_jsonl, read_jsonl_strict, write_curve, write_jsonl, write_table, write_text, RejectLine,
    ResponseLine, TrialLine,
};
use crate::dnc::DividePlan;
use crate::error::{Error, Result};
use crate::rng::stream_seed;
use crate::scaling::{fit_scaling, map_point, FitOptions, MapPoint, ScalingFit};
use crate::scoring::{judge, sar_curve, Criterion, SarCurve};
use crate::sk::{
    sar_crossover_approx, sar_disorder_avg, sar_independent, sar_perturbative, synth_curve, DisorderAverage,
    SeriesOrder, SkEnsembleSpec, SkParams,
};
use crate::tasks::{TaskInstance, TaskKind};

pub const INSTANCES_FILE: &str = "instances.jsonl";
pub const TRIALS_FILE: &str = "trials.jsonl";
pub const CURVE_FILE: &str = "curve.csv";
pub const REJECTS_FILE: &str = "rejects.jsonl";
pub const FIT_FILE: &str = "fit.json";
pub const ENSEMBLE_FILE: &str = "ensemble.csv";
pub const THEORY_FILE: &str = "theory.csv";
pub const SYNTHETIC_CURVE_FILE: &str = "synthetic_curve.csv";
pub const SIMULATE_META_FILE: &str = "simulate_meta.json";
pub const PLAN_FILE: &str = "plan.csv";

/// Seed of the `index`-th random instance at length `n`.
pub fn instance_seed(grid_seed: u64, n: usize, index: usize) -> u64 {
    stream_seed(stream_seed(grid_seed, n as u64), index as u64)
}

/// Instances for a task and grid: `instances_per_n` random instances per
/// length, then one per fixed input (seeded by its position in the list).
pub fn generate_instances(task: &TaskSection, grid: &GridSection, seed: Option<u64>) -> Result<Vec<TaskInstance>> {
    let params = task.params()?;
    let grid_seed = seed.unwrap_or(grid.seed);
    let mut jobs = Vec::new();
    for &n in &grid.lengths {
        for i in 0..grid.instances_per_n {
            jobs.push((n, instance_seed(grid_seed, n, i)));
        }
    }
    let mut out: Vec<TaskInstance> = jobs
        .par_iter()
        .map(|&(n, s)| TaskInstance::generate(task.kind, n, s, params))
        .collect::<Result<_>>()?;
    for (i, input) in grid.fixed_inputs.iter().enumerate() {
        let inst = TaskInstance::from_input(task.kind, params, i as u64, input)
            .map_err(|e| config_err(&format!("grid.fixed_inputs[{i}]"), e.to_string()))?;
        out.push(inst);
    }
    Ok(out)
}

pub fn cmd_generate(cfg: &RunConfig, out_dir: &Path, seed: Option<u64>) -> Result<(PathBuf, usize)> {
    let instances = generate_instances(cfg.task()?, cfg.grid()?, seed)?;
    for inst in &instances {
        inst.verify()?;
    }
    let path = out_dir.join(INSTANCES_FILE);
    write_jsonl(&path, &instances)?;
    Ok((path, instances.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct JudgeSummary {
    pub trials_path: PathBuf,
    pub curve_path: PathBuf,
    pub rejects_path: PathBuf,
    pub judged: usize,
    pub rejected: usize,
    pub curve: SarCurve,
}

type InstanceKey = (TaskKind, usize, u64);

/// Judges every response against its instance. Orphans and malformed lines
/// go to the rejects file. With nothing to judge the (empty) outputs are
/// still written and [`Error::EmptyInput`] is returned.
pub fn cmd_judge(instances: &Path, responses: &Path, criterion: Criterion, out_dir: &Path) -> Result<JudgeSummary> {
    let mut by_key: HashMap<InstanceKey, TaskInstance> = HashMap::new();
    for inst in read_jsonl_strict::<TaskInstance>(instances)? {
        let key = (inst.kind, inst.n, inst.seed);
        if by_key.insert(key, inst).is_some() {
            return Err(Error::Validation(format!(
                "{}: duplicate instance key {key:?}",
                instances.display()
            )));
        }
    }

    let mut rejects = Vec::new();
    let mut matched = Vec::new();
    for (line, parsed) in read_jsonl::<ResponseLine>(responses)? {
        match parsed {
            Err(reason) => rejects.push(RejectLine {
                line,
                reason: format!("malformed: {reason}"),
            }),
            Ok(r) => match by_key.get(&(r.task, r.n, r.seed)) {
                Some(inst) => matched.push((inst, r)),
                None => rejects.push(RejectLine {
                    line,
                    reason: format!("no instance with task={} n={} seed={}", r.task, r.n, r.seed),
                }),
            },
        }
    }

    let records: Vec<_> = matched.par_iter().map(|(inst, r)| judge(inst, &r.model, &r.response)).collect();
    let trials_path = out_dir.join(TRIALS_FILE);
    let curve_path = out_dir.join(CURVE_FILE);
    let rejects_path = out_dir.join(REJECTS_FILE);
    write_jsonl(&trials_path, records.iter().map(TrialLine::from))?;
    write_jsonl(&rejects_path, &rejects)?;

    let curve = if records.is_empty() {
        SarCurve {
            kind: None,
            points: Vec::new(),
        }
    } else {
        sar_curve(&records, criterion)?
    };
    write_curve(&curve_path, &curve)?;
    if records.is_empty() {
        return Err(Error::EmptyInput(responses.to_path_buf()));
    }
    Ok(JudgeSummary {
        trials_path,
        curve_path,
        rejects_path,
        judged: records.len(),
        rejected: rejects.len(),
        curve,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    #[serde(flatten)]
    pub fit: ScalingFit,
    /// `None` when the fitted curve never reaches 1/2.
    pub map: Option<MapPoint>,
}

pub fn cmd_fit(curve: &Path, opts: FitOptions, out_dir: &Path) -> Result<(PathBuf, FitReport)> {
    let curve = read_curve(curve)?;
    let fit = fit_scaling(&curve, opts)?;
    let report = FitReport {
        map: map_point(&fit).ok(),
        fit,
    };
    let path = out_dir.join(FIT_FILE);
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Error::Validation(e.to_string()))?;
    text.push('\n');
    write_text(&path, &text)?;
    Ok((path, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateRow {
    pub params: SkParams,
    pub ensemble: DisorderAverage,
    pub sar_pert2: f64,
    pub sar_pert4: f64,
    pub sar_crossover: f64,
    pub sar_independent: f64,
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    prng: &'static str,
    normal_sampler: &'static str,
    realization_seed: &'static str,
    master_seed: u64,
    section: &'a SimulateSectionMeta,
}

#[derive(Serialize)]
struct SimulateSectionMeta {
    j0: f64,
    h: f64,
    lengths: Vec<usize>,
    realizations: usize,
    estimator: crate::sk::Estimator,
    trials_per_realization: Option<usize>,
}

/// Ensemble and closed-form columns per length. Length `n` uses master seed
/// `stream_seed(master_seed, n)`, so rows do not depend on the grid.
pub fn cmd_simulate(sim: &SimulateSection, seed: Option<u64>, out_dir: &Path) -> Result<Vec<SimulateRow>> {
    let master = seed.unwrap_or(sim.master_seed);
    let mut rows = Vec::new();
    for &n in &sim.lengths {
        let params = SkParams::new(n, sim.j0, sim.h)?;
        let spec = SkEnsembleSpec::new(params, sim.realizations, stream_seed(master, n as u64))?
            .with_estimator(sim.estimator);
        rows.push(SimulateRow {
            params,
            ensemble: sar_disorder_avg(&spec)?,
            sar_pert2: sar_perturbative(&params, SeriesOrder::Second)?,
            sar_pert4: sar_perturbative(&params, SeriesOrder::Fourth)?,
            sar_crossover: sar_crossover_approx(&params)?,
            sar_independent: sar_independent(n, sim.h),
        });
    }

    write_table(
        &out_dir.join(ENSEMBLE_FILE),
        &["n", "j0", "h", "R", "sar_geo", "sar_arith", "stderr_log"],
        rows.iter().map(|r| {
            vec![
                r.params.n.to_string(),
                fmt_f64(r.params.j0),
                fmt_f64(r.params.h),
                sim.realizations.to_string(),
                fmt_f64(r.ensemble.sar_geo),
                fmt_f64(r.ensemble.sar_arith),
                fmt_f64(r.ensemble.stderr_log),
            ]
        }),
    )?;
    write_table(
        &out_dir.join(THEORY_FILE),
        &[
            "n",
            "sar_geo",
            "sar_arith",
            "stderr_log",
            "sar_pert2",
            "sar_pert4",
            "sar_crossover",
            "sar_independent",
        ],
        rows.iter().map(|r| {
            vec![
                r.params.n.to_string(),
                fmt_f64(r.ensemble.sar_geo),
                fmt_f64(r.ensemble.sar_arith),
                fmt_f64(r.ensemble.stderr_log),
                fmt_f64(r.sar_pert2),
                fmt_f64(r.sar_pert4),
                fmt_f64(r.sar_crossover),
                fmt_f64(r.sar_independent),
            ]
        }),
    )?;
    if let Some(trials) = sim.trials_per_realization {
        let curve = synth_curve(sim.j0, sim.h, &sim.lengths, sim.realizations, trials, master)?;
        write_curve(&out_dir.join(SYNTHETIC_CURVE_FILE), &curve)?;
    }

    let meta = SimulateMeta {
        prng: "xoshiro256**",
        normal_sampler: "box-muller",
        realization_seed: "stream_seed(stream_seed(master_seed, n), r)",
        master_seed: master,
        section: &SimulateSectionMeta {
            j0: sim.j0,
            h: sim.h,
            lengths: sim.lengths.clone(),
            realizations: sim.realizations,
            estimator: sim.estimator,
            trials_per_realization: sim.trials_per_realization,
        },
    };
    let path = out_dir.join(SIMULATE_META_FILE);
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Validation(e.to_string()))? + "\n";
    write_text(&path, &text)?;
    Ok(rows)
}

/// Plans for `k = 1..=k_max`; the `first_positive` column marks the smallest
/// `k` with positive gain. Undefined bounds are left empty.
pub fn cmd_plan(plan: &PlanSection, out_dir: &Path) -> Result<(PathBuf, Vec<DividePlan>)> {
    if plan.k_max == 0 {
        return Err(config_err("plan.k_max", "must be at least 1"));
    }
    let plans = (1..=plan.k_max)
        .map(|k| DividePlan::new(plan.n, k, plan.alpha, plan.beta0, plan.theta))
        .collect::<Result<Vec<_>>>()?;
    let first_positive = plans.iter().find(|p| p.gain > 0.0).map(|p| p.k);
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let path = out_dir.join(PLAN_FILE);
    write_table(
        &path,
        &["k", "sar_single", "sar_dc", "gain", "n_dc", "nstar_extended", "first_positive"],
        plans.iter().map(|p| {
            vec![
                p.k.to_string(),
                fmt_f64(p.sar_single),
                fmt_f64(p.sar_dc),
                fmt_f64(p.gain),
                opt(p.n_dc),
                opt(p.nstar_extended),
                (Some(p.k) == first_positive).to_string(),
            ]
        }),
    )?;
    Ok((path, plans))
}

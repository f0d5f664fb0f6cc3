//! Best-of-many optimizer runs. Runs execute in parallel with seeds
//! `seed, seed + 1, ...`; every candidate schedule is verified before it is
//! ranked, and ties go to the lower seed.

use cfft_core::cfft::check_against_dft;
use cfft_core::cse::run_cse;
use cfft_core::{BinaryMatrix, CfftPlan, CseConfig, Schedule, SymbolicSum};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Random vectors used when checking a composed plan schedule, on top of
/// the unit vectors.
pub const PLAN_CHECK_RANDOM: usize = 200;

#[derive(Debug, Clone)]
pub struct MatrixOutcome {
    pub schedule: Schedule,
    pub best_seed: u64,
    /// Additions of each run, in seed order.
    pub per_run: Vec<usize>,
}

impl MatrixOutcome {
    pub fn best(&self) -> usize {
        self.schedule.additions()
    }
}

/// Checks that `schedule` computes `M X` over formal inputs.
pub fn verify_matrix_schedule(m: &BinaryMatrix, schedule: &Schedule) -> Result<()> {
    if schedule.n_inputs != m.n_cols() || schedule.outputs.len() != m.n_rows() {
        return Err(CliError::Verification(format!(
            "schedule is {} -> {}, matrix is {} x {}",
            schedule.n_inputs,
            schedule.outputs.len(),
            m.n_rows(),
            m.n_cols()
        )));
    }
    let got = schedule.execute_symbolic()?;
    let want = m.mat_vec(&SymbolicSum::vars(m.n_cols()))?;
    match got.iter().zip(&want).position(|(a, b)| a != b) {
        Some(i) => Err(CliError::Verification(format!("output {i} differs"))),
        None => Ok(()),
    }
}

pub fn optimize_matrix(m: &BinaryMatrix, config: &CseConfig, runs: usize) -> Result<MatrixOutcome> {
    let runs = runs.max(1) as u64;
    let results: Vec<(u64, Schedule)> = (0..runs)
        .into_par_iter()
        .map(|k| {
            let seed = config.seed.wrapping_add(k);
            let (_, schedule) = run_cse(m, &CseConfig { seed, ..config.clone() });
            verify_matrix_schedule(m, &schedule)
                .map_err(|e| CliError::Verification(format!("run with seed {seed}: {e}")))?;
            Ok((seed, schedule))
        })
        .collect::<Result<_>>()?;
    let per_run = results.iter().map(|(_, s)| s.additions()).collect();
    let (best_seed, schedule) = results
        .into_iter()
        .min_by_key(|(seed, s)| (s.additions(), *seed))
        .expect("at least one run");
    Ok(MatrixOutcome { schedule, best_seed, per_run })
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    /// Full program computing the DFT in natural order.
    pub schedule: Schedule,
    pub pre: MatrixOutcome,
    pub post: MatrixOutcome,
}

impl PlanOutcome {
    pub fn additions(&self) -> usize {
        self.schedule.additions()
    }

    /// Pre plus post additions of run `k`.
    pub fn per_run(&self) -> Vec<usize> {
        self.pre.per_run.iter().zip(&self.post.per_run).map(|(a, b)| a + b).collect()
    }
}

/// Checks a full plan schedule against the naive DFT on all unit vectors and
/// [`PLAN_CHECK_RANDOM`] random vectors.
pub fn verify_plan_schedule(plan: &CfftPlan, schedule: &Schedule, seed: u64) -> Result<()> {
    let n = plan.n();
    if schedule.n_inputs != n || schedule.outputs.len() != n {
        return Err(cfft_core::Error::DimensionMismatch {
            expected: n,
            found: if schedule.n_inputs != n { schedule.n_inputs } else { schedule.outputs.len() },
        }
        .into());
    }
    check_against_dft(&plan.field, |f| schedule.execute(Some(&plan.field), f), PLAN_CHECK_RANDOM, seed)
        .map_err(|e| match e {
            cfft_core::Error::OracleMismatch { input, output } => CliError::Verification(format!(
                "first differing output F{output} (test vector {input})"
            )),
            other => other.into(),
        })
}

/// Optimizes the pre- and post-addition matrices of a plan independently
/// and composes the best of each.
pub fn optimize_plan(
    plan: &CfftPlan,
    pre_config: &CseConfig,
    post_config: &CseConfig,
    runs: usize,
) -> Result<PlanOutcome> {
    let pre = optimize_matrix(&plan.pre, pre_config, runs)?;
    let post = optimize_matrix(&plan.post, post_config, runs)?;
    let schedule = Schedule::compose_plan(plan, &pre.schedule, &post.schedule)?;
    verify_plan_schedule(plan, &schedule, post_config.seed)?;
    Ok(PlanOutcome { schedule, pre, post })
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[usize]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<usize>() as f64 / n;
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

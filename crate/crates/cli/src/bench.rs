use std::time::Instant;

use cfft_core::PlanKind;
use serde::Serialize;

use crate::config::Config;
use crate::error::Result;
use crate::forms::FormLibrary;
use crate::optimize::{mean_std, optimize_plan};
use crate::{plan, reference};

/// One `(n, kind)` line of a benchmark. `wall_ms` is the mean wall time of a
/// single run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub kind: String,
    pub mult: usize,
    pub adds_best: usize,
    pub adds_mean: f64,
    pub adds_std: f64,
    pub total: usize,
    pub runs: usize,
    pub seed: u64,
    pub wall_ms: f64,
    pub paper_adds: Option<usize>,
    pub paper_mult: Option<usize>,
}

pub fn bench_one(
    n: usize,
    kind: PlanKind,
    runs: usize,
    seed: u64,
    forms: &FormLibrary,
    config: &Config,
) -> Result<BenchRow> {
    let plan = plan::build(n, kind, forms, config)?;
    let mut pre_cfg = config.cse(plan.pre.n_rows())?;
    let mut post_cfg = config.cse(plan.post.n_rows())?;
    pre_cfg.seed = seed;
    post_cfg.seed = seed;
    let runs = runs.max(1);
    let start = Instant::now();
    let outcome = optimize_plan(&plan, &pre_cfg, &post_cfg, runs)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3 / runs as f64;
    let (adds_mean, adds_std) = mean_std(&outcome.per_run());
    let m = plan.field.m();
    Ok(BenchRow {
        n,
        kind: kind.name().to_string(),
        mult: outcome.schedule.multiplications(),
        adds_best: outcome.additions(),
        adds_mean,
        adds_std,
        total: outcome.schedule.total_complexity(m),
        runs,
        seed,
        wall_ms,
        paper_adds: reference::additions(n, kind),
        paper_mult: reference::multiplications(n),
    })
}

pub fn bench(
    lengths: &[usize],
    kinds: &[PlanKind],
    runs: usize,
    seed: u64,
    forms: &FormLibrary,
    config: &Config,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in lengths {
        for &kind in kinds {
            rows.push(bench_one(n, kind, runs, seed, forms, config)?);
        }
    }
    Ok(rows)
}

pub fn to_json(rows: &[BenchRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("plain data");
    s.push('\n');
    s
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = String::from(
        "n,kind,mult,adds_best,adds_mean,adds_std,total,runs,seed,wall_ms,paper_adds,paper_mult\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{:.3},{:.3},{},{},{},{:.3},{},{}\n",
            r.n,
            r.kind,
            r.mult,
            r.adds_best,
            r.adds_mean,
            r.adds_std,
            r.total,
            r.runs,
            r.seed,
            r.wall_ms,
            opt(r.paper_adds),
            opt(r.paper_mult)
        ));
    }
    s
}

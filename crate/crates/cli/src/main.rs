use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cfft_cli::bench::{self, BenchRow};
use cfft_cli::config::{parse_algorithm, parse_strategy, Config};
use cfft_cli::formats::{self, emit_plan, parse_matrix, parse_plan, parse_schedule, read_text};
use cfft_cli::forms::FormLibrary;
use cfft_cli::optimize::{mean_std, optimize_matrix, optimize_plan, verify_matrix_schedule, verify_plan_schedule};
use cfft_cli::{plan, reference, CliError, Result};
use cfft_core::{CfftPlan, CseConfig, PlanKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cfft", version, about = "Cyclotomic FFT plans over GF(2^m) with addition-minimized schedules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a plan and print its multiplication and direct addition counts.
    Plan {
        #[command(flatten)]
        source: PlanArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the additions of a plan or a binary matrix.
    Optimize {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        opt: OptArgs,
        /// Where to write the best schedule.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        report: ReportFormat,
    },
    /// Check a schedule against a plan (DFT oracle) or a matrix.
    Verify {
        #[arg(long)]
        schedule: PathBuf,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Optimize several plans and report counts next to published values.
    Bench {
        /// Comma-separated lengths.
        #[arg(long, value_delimiter = ',', default_values_t = [7usize, 15])]
        n: Vec<usize>,
        /// Comma-separated kinds.
        #[arg(long, value_delimiter = ',', default_values_t = [String::from("dcfft")])]
        kind: Vec<String>,
        #[arg(long)]
        forms: Option<PathBuf>,
        #[arg(long)]
        allow_naive: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        report: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct PlanArgs {
    /// Transform length, 2^m - 1.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "dcfft")]
    kind: String,
    /// Directory of `cyclic_<len>.txt` form files.
    #[arg(long)]
    forms: Option<PathBuf>,
    /// Use the naive form for lengths without a stored form.
    #[arg(long)]
    allow_naive: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Plan file written by `cfft plan`.
    #[arg(long, conflicts_with_all = ["matrix", "n"])]
    plan: Option<PathBuf>,
    /// Matrix file (`rows cols` header, then 0/1 rows).
    #[arg(long, conflicts_with = "n")]
    matrix: Option<PathBuf>,
    /// Build the plan on the fly instead of reading one.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "dcfft")]
    kind: String,
    #[arg(long)]
    forms: Option<PathBuf>,
    #[arg(long)]
    allow_naive: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OptArgs {
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Differential candidate window.
    #[arg(long)]
    ld: Option<usize>,
    /// Recurrence candidate window.
    #[arg(long)]
    lr: Option<usize>,
    #[arg(long, value_name = "classic|fast")]
    algo: Option<String>,
    #[arg(long, value_name = "differential_first|greedy")]
    strategy: Option<String>,
    /// Skip differential transforms.
    #[arg(long)]
    recurrence_only: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

const DEFAULT_RUNS: usize = 100;

fn load_config(path: Option<&Path>) -> Result<Config> {
    path.map_or_else(|| Ok(Config::default()), Config::load)
}

fn load_forms(dir: Option<&Path>, allow_naive: bool) -> Result<FormLibrary> {
    let lib = match dir {
        Some(d) => FormLibrary::with_dir(d)?,
        None => FormLibrary::bundled(),
    };
    Ok(lib.allow_naive(allow_naive))
}

fn parse_kind(s: &str) -> Result<PlanKind> {
    PlanKind::from_name(s).ok_or_else(|| CliError::BadInput(format!("unknown kind `{s}` (dcfft|scfft|icfft)")))
}

impl OptArgs {
    /// Command line flags over the config file.
    fn apply(&self, config: &mut Config) -> Result<()> {
        let o = &mut config.optimizer;
        if let Some(v) = self.runs {
            o.runs = Some(v);
        }
        if let Some(v) = self.seed {
            o.seed = Some(v);
        }
        if let Some(v) = self.ld {
            o.l_d = Some(v);
        }
        if let Some(v) = self.lr {
            o.l_r = Some(v);
        }
        if let Some(a) = &self.algo {
            parse_algorithm(a)?;
            o.algorithm = Some(a.clone());
        }
        if let Some(s) = &self.strategy {
            parse_strategy(s)?;
            o.strategy = Some(s.clone());
        }
        if self.recurrence_only {
            o.recurrence_only = Some(true);
        }
        Ok(())
    }
}

enum Input {
    Plan(Box<CfftPlan>),
    Matrix(cfft_core::BinaryMatrix),
}

impl InputArgs {
    fn config(&self) -> Result<Config> {
        load_config(self.config.as_deref())
    }

    fn load(&self, config: &Config) -> Result<Input> {
        if let Some(p) = &self.plan {
            return Ok(Input::Plan(Box::new(parse_plan(p, &read_text(p)?)?)));
        }
        if let Some(p) = &self.matrix {
            return Ok(Input::Matrix(parse_matrix(p, &read_text(p)?)?));
        }
        let n = self
            .n
            .ok_or_else(|| CliError::BadInput("one of --plan, --matrix or --n is required".into()))?;
        let forms = load_forms(self.forms.as_deref(), self.allow_naive)?;
        Ok(Input::Plan(Box::new(plan::build(n, parse_kind(&self.kind)?, &forms, config)?)))
    }
}

#[derive(Serialize)]
struct OptimizeReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    mult: usize,
    adds_best: usize,
    adds_mean: f64,
    adds_std: f64,
    total: Option<usize>,
    direct_adds: usize,
    runs: usize,
    seed: u64,
    wall_ms: f64,
    paper_adds: Option<usize>,
    paper_mult: Option<usize>,
    per_run: Vec<usize>,
}

fn render_optimize(r: &OptimizeReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(r).expect("plain data") + "\n",
        ReportFormat::Csv => {
            let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            let mut s = String::from("run,seed,adds\n");
            for (k, a) in r.per_run.iter().enumerate() {
                s.push_str(&format!("{k},{},{a}\n", r.seed.wrapping_add(k as u64)));
            }
            s.push_str(&format!(
                "# best={} mean={:.3} std={:.3} mult={} total={} direct={} paper_adds={}\n",
                r.adds_best,
                r.adds_mean,
                r.adds_std,
                r.mult,
                opt(r.total),
                r.direct_adds,
                opt(r.paper_adds)
            ));
            s
        }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => formats::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_plan(source: &PlanArgs, out: Option<&Path>) -> Result<()> {
    let config = load_config(source.config.as_deref())?;
    let forms = load_forms(source.forms.as_deref(), source.allow_naive)?;
    let plan = plan::build(source.n, parse_kind(&source.kind)?, &forms, &config)?;
    let c = plan.complexity();
    if let Some(p) = out {
        formats::write_text(p, &emit_plan(&plan))?;
    }
    println!("n={} kind={} mult={}, direct_adds={}", plan.n(), plan.kind.name(), c.mult, c.direct_adds);
    Ok(())
}

fn cmd_optimize(input: &InputArgs, opt: &OptArgs, out: Option<&Path>, format: ReportFormat) -> Result<()> {
    let mut config = input.config()?;
    opt.apply(&mut config)?;
    let runs = config.optimizer.runs.unwrap_or(DEFAULT_RUNS).max(1);
    let start = Instant::now();
    let (report, schedule) = match input.load(&config)? {
        Input::Matrix(m) => {
            let cse: CseConfig = config.cse(m.n_rows())?;
            let outcome = optimize_matrix(&m, &cse, runs)?;
            let (adds_mean, adds_std) = mean_std(&outcome.per_run);
            let report = OptimizeReport {
                n: None,
                kind: None,
                mult: 0,
                adds_best: outcome.best(),
                adds_mean,
                adds_std,
                total: None,
                direct_adds: m.direct_add_count(),
                runs,
                seed: cse.seed,
                wall_ms: start.elapsed().as_secs_f64() * 1e3 / runs as f64,
                paper_adds: None,
                paper_mult: None,
                per_run: outcome.per_run,
            };
            (report, outcome.schedule)
        }
        Input::Plan(plan) => {
            let pre_cfg = config.cse(plan.pre.n_rows())?;
            let post_cfg = config.cse(plan.post.n_rows())?;
            let outcome = optimize_plan(&plan, &pre_cfg, &post_cfg, runs)?;
            let per_run = outcome.per_run();
            let (adds_mean, adds_std) = mean_std(&per_run);
            let n = plan.n();
            let report = OptimizeReport {
                n: Some(n),
                kind: Some(plan.kind.name().to_string()),
                mult: outcome.schedule.multiplications(),
                adds_best: outcome.additions(),
                adds_mean,
                adds_std,
                total: Some(outcome.schedule.total_complexity(plan.field.m())),
                direct_adds: plan.complexity().direct_adds,
                runs,
                seed: post_cfg.seed,
                wall_ms: start.elapsed().as_secs_f64() * 1e3 / runs as f64,
                paper_adds: reference::additions(n, plan.kind),
                paper_mult: reference::multiplications(n),
                per_run,
            };
            (report, outcome.schedule)
        }
    };
    match out {
        Some(p) => {
            formats::write_text(p, &schedule.emit())?;
            print!("{}", render_optimize(&report, format));
        }
        None => {
            eprint!("{}", render_optimize(&report, format));
            print!("{}", schedule.emit());
        }
    }
    Ok(())
}

fn cmd_verify(schedule_path: &Path, input: &InputArgs) -> Result<()> {
    let schedule = parse_schedule(schedule_path, &read_text(schedule_path)?)?;
    let config = input.config()?;
    match input.load(&config)? {
        Input::Plan(plan) => verify_plan_schedule(&plan, &schedule, 0)?,
        Input::Matrix(m) => {
            if schedule.n_inputs != m.n_cols() || schedule.outputs.len() != m.n_rows() {
                return Err(cfft_core::Error::DimensionMismatch {
                    expected: m.n_rows(),
                    found: schedule.outputs.len(),
                }
                .into());
            }
            verify_matrix_schedule(&m, &schedule)?
        }
    }
    println!("pass: {} additions, {} multiplications", schedule.additions(), schedule.multiplications());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    lengths: &[usize],
    kinds: &[String],
    forms: Option<&Path>,
    allow_naive: bool,
    config: Option<&Path>,
    opt: &OptArgs,
    format: ReportFormat,
    out: Option<&Path>,
) -> Result<()> {
    let mut config = load_config(config)?;
    opt.apply(&mut config)?;
    let forms = load_forms(forms, allow_naive)?;
    let kinds = kinds.iter().map(|k| parse_kind(k)).collect::<Result<Vec<_>>>()?;
    for &n in lengths {
        plan::degree_for(n)?;
    }
    let runs = config.optimizer.runs.unwrap_or(DEFAULT_RUNS);
    let seed = config.optimizer.seed.unwrap_or(0);
    let rows: Vec<BenchRow> = bench::bench(lengths, &kinds, runs, seed, &forms, &config)?;
    let text = match format {
        ReportFormat::Json => bench::to_json(&rows),
        ReportFormat::Csv => bench::to_csv(&rows),
    };
    write_or_print(out, &text)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Plan { source, out } => cmd_plan(source, out.as_deref()),
        Command::Optimize { input, opt, out, report } => cmd_optimize(input, opt, out.as_deref(), *report),
        Command::Verify { schedule, input } => cmd_verify(schedule, input),
        Command::Bench { n, kind, forms, allow_naive, config, opt, report, out } => cmd_bench(
            n,
            kind,
            forms.as_deref(),
            *allow_naive,
            config.as_deref(),
            opt,
            *report,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

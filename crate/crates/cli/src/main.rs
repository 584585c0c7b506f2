use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use vqa_noise::bounds::{precision_at_rate, scaling_helpers};
use vqa_noise::harness::{mitigation_demo, predict_bounds, run_sweep, RunRecord, SweepVariable};
use vqa_noise::verify::{verify_channels, VerifyOptions};
use vqa_noise::{EvalMode, RunConfig};

mod plot;

use plot::{Chart, Series};

const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Parser)]
#[command(name = "vqa-noise", version, about = "Noise-precision experiments on variational circuits")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check channel equivalences through Pauli transfer matrices.
    VerifyChannels(VerifyArgs),
    /// Run a rate or gap sweep on the toy model.
    Sweep(RunArgs),
    /// Order-of-magnitude rates (`--scaling`) or bounds for the configured model.
    Predict(PredictArgs),
    /// Leading-order mitigation on the toy model.
    MitigateDemo(RunArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random channels per suite.
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// Largest allowed PTM entry deviation.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Scale applied to every Gaussian variance.
    #[arg(long, default_value_t = 1.0)]
    variance_scale: f64,
    /// Directory for `verify_channels.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Trajectory,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Noisy evaluation mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Trajectories per evaluation in trajectory mode.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    /// `r=.. n=.. M=..` with either `eps=..` or `q=..`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    scaling: Option<Vec<String>>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome = Result<bool, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn load_config(args: &RunArgs, required: bool) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))
                .map_err(usage)?;
            RunConfig::from_json(&text)
                .with_context(|| format!("invalid config {}", path.display()))
                .map_err(usage)?
        }
        None if required => return Err(usage(anyhow!("--config is required"))),
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.display().to_string();
    }
    let mode = match (args.mode, args.samples) {
        (Some(ModeArg::Exact), Some(_)) => return Err(usage(anyhow!("--samples needs --mode trajectory"))),
        (Some(ModeArg::Exact), None) => Some(EvalMode::Exact),
        (Some(ModeArg::Trajectory), s) | (None, s @ Some(_)) => Some(EvalMode::Trajectory {
            samples: s.unwrap_or(DEFAULT_SAMPLES),
            seed: cfg.seed,
        }),
        (None, None) => None,
    };
    if let Some(mode) = mode {
        cfg.mitigation.mode = mode;
        if let Some(sweep) = cfg.sweep.as_mut() {
            sweep.mode = mode;
        }
    }
    cfg.validate().context("invalid configuration").map_err(usage)?;
    Ok(cfg)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn prepare_out(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join("config.json"), cfg)?;
    Ok(dir)
}

fn cmd_verify_channels(args: &VerifyArgs) -> Outcome {
    let opts = VerifyOptions {
        seed: args.seed,
        cases: args.cases,
        tolerance: args.tolerance,
        variance_scale: args.variance_scale,
    };
    let report = verify_channels(&opts).map_err(|e| usage(anyhow!(e)))?;
    for s in &report.suites {
        println!(
            "{:<22} {:>4} cases  max deviation {:.3e}  {}",
            s.name,
            s.cases,
            s.max_deviation,
            if s.passed { "PASS" } else { "FAIL" }
        );
    }
    if let Some(out) = &args.out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        write_json(&out.join("verify_channels.json"), &report)?;
    }
    Ok(report.passed())
}

fn mean_by_value(record: &RunRecord, field: impl Fn(&vqa_noise::harness::PointResult) -> f64) -> Vec<(f64, f64)> {
    let mut groups: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for (i, v) in record.config.values.iter().enumerate() {
        groups.insert(i, (*v, 0.0, 0));
    }
    for p in record.points.iter().filter(|p| p.error.is_none()) {
        if let Some(i) = record.config.values.iter().position(|v| *v == p.sweep_value) {
            let g = groups.get_mut(&i).expect("inserted");
            g.1 += field(p);
            g.2 += 1;
        }
    }
    groups
        .into_values()
        .filter(|g| g.2 > 0)
        .map(|(v, sum, n)| (v, sum / n as f64))
        .collect()
}

fn sweep_charts(record: &RunRecord) -> Vec<(&'static str, Chart)> {
    let rate = record.config.variable == SweepVariable::Rate;
    let x_label = if rate { "single-qubit error rate q" } else { "gap E1 - E0" };
    let scatter: Vec<(f64, f64)> = record
        .points
        .iter()
        .filter(|p| p.error.is_none())
        .map(|p| (p.sweep_value, p.epsilon))
        .collect();
    let error = Chart {
        title: "Error at the noisy optimum".into(),
        x_label: x_label.into(),
        y_label: "epsilon".into(),
        log_x: rate,
        log_y: true,
        series: vec![
            Series::line("epsilon (mean)", mean_by_value(record, |p| p.epsilon)),
            Series::markers("epsilon (seeds)", scatter),
            Series::dashed("rough lower", mean_by_value(record, |p| p.rough_lower)),
            Series::dashed("rough upper", mean_by_value(record, |p| p.rough_upper)),
            Series::line("leading term", mean_by_value(record, |p| p.thm1_leading)),
        ],
    };
    let relative = Chart {
        title: "Relative error".into(),
        x_label: x_label.into(),
        y_label: "relative error".into(),
        log_x: rate,
        log_y: true,
        series: vec![
            Series::line("R1", mean_by_value(record, |p| p.r1)),
            Series::line("Rmax", mean_by_value(record, |p| p.rmax)),
            Series::dashed("sum sigma^2 / 4", mean_by_value(record, |p| p.total_variance / 4.0)),
        ],
    };
    vec![("epsilon.svg", error), ("relative.svg", relative)]
}

fn cmd_sweep(args: &RunArgs) -> Outcome {
    let cfg = load_config(args, true)?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| usage(anyhow!("config has no \"sweep\" section")))?;
    let dir = prepare_out(&cfg)?;
    let record = run_sweep(&cfg.toy_model, sweep, cfg.seed).map_err(|e| anyhow!(e))?;
    let csv = fs::File::create(dir.join("sweep.csv")).context("creating sweep.csv")?;
    record.write_csv(csv).context("writing sweep.csv")?;
    write_json(&dir.join("record.json"), &record)?;
    for (name, chart) in sweep_charts(&record) {
        fs::write(dir.join(name), chart.to_svg()).with_context(|| format!("writing {name}"))?;
    }
    let s = &record.summary;
    println!(
        "points {}  failures {}  bracketed {}/{}",
        s.points,
        s.failures,
        s.bracketed,
        s.points - s.failures
    );
    if let Some(fit) = s.log_log {
        println!("log-log slope {:.4}  r2 {:.5}", fit.slope, fit.r2);
    }
    if let Some(r) = s.spearman {
        println!("spearman(value, epsilon) {r:.4}");
    }
    if let Some(r) = s.max_r1_ratio {
        println!("max R1 / (sum sigma^2 / 4) ratio {r:.3}");
    }
    if sweep.variable == SweepVariable::Gap {
        let means = mean_by_value(&record, |p| p.epsilon);
        let rises = means.windows(2).filter(|w| w[1].1 > w[0].1).count();
        let trend = match s.spearman {
            Some(r) if r > 0.0 => "increases",
            Some(r) if r < 0.0 => "decreases",
            _ => "shows no trend",
        };
        println!(
            "monotonicity: mean epsilon rises on {rises} of {} gap steps; error {trend} with the gap",
            means.len().saturating_sub(1)
        );
    }
    println!("wrote {}", dir.display());
    Ok(s.failures == 0)
}

fn parse_scaling(pairs: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut map = BTreeMap::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(anyhow!("expected KEY=VALUE, got {pair:?}")))?;
        let key = match k {
            "r" | "n" | "eps" | "q" => k.to_string(),
            "M" | "m" => "M".to_string(),
            _ => return Err(usage(anyhow!("unknown scaling key {k:?}"))),
        };
        let value: f64 = v.parse().map_err(|_| usage(anyhow!("bad number {v:?} for {k}")))?;
        map.insert(key, value);
    }
    Ok(map)
}

fn cmd_predict(args: &PredictArgs) -> Outcome {
    if let Some(pairs) = &args.scaling {
        let kv = parse_scaling(pairs)?;
        let get = |k: &str| kv.get(k).copied().ok_or_else(|| usage(anyhow!("missing {k}=")));
        let (n, m, r) = (get("n")?, get("M")?, get("r")?);
        let (label, estimate) = match (kv.get("eps"), kv.get("q")) {
            (Some(&eps), None) => ("error rate", scaling_helpers(n, m, r, eps)),
            (None, Some(&q)) => ("precision", precision_at_rate(n, m, r, q)),
            _ => return Err(usage(anyhow!("give exactly one of eps= or q="))),
        };
        let e = estimate.map_err(|e| usage(anyhow!(e)))?;
        println!("{}", serde_json::to_string_pretty(&e).map_err(|e| anyhow!(e))?);
        println!("sufficient {label}: {:.0e}", e.sufficient);
        println!("sufficient {label} with mitigation: {:.0e}", e.sufficient_mitigated);
        println!("necessary {label}: {:.0e}", e.necessary);
        return Ok(true);
    }
    let cfg = load_config(&args.run, false)?;
    let dir = prepare_out(&cfg)?;
    let prediction = predict_bounds(&cfg).map_err(|e| anyhow!(e))?;
    write_json(&dir.join("predict.json"), &prediction)?;
    println!("{}", serde_json::to_string_pretty(&prediction.bounds).map_err(|e| anyhow!(e))?);
    Ok(true)
}

fn cmd_mitigate_demo(args: &RunArgs) -> Outcome {
    let cfg = load_config(args, false)?;
    let dir = prepare_out(&cfg)?;
    let demo = mitigation_demo(&cfg).map_err(|e| anyhow!(e))?;
    if let Some(w) = &demo.warning {
        log::warn!("{w}");
    }
    write_json(&dir.join("mitigation.json"), &demo)?;
    println!("{}", serde_json::to_string_pretty(&demo).map_err(|e| anyhow!(e))?);
    Ok(true)
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage(anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!(e))?;
    }
    match &cli.command {
        Command::VerifyChannels(a) => cmd_verify_channels(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Predict(a) => cmd_predict(a),
        Command::MitigateDemo(a) => cmd_mitigate_demo(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

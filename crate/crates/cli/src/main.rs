mod args;
mod manifest;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use bigdecimal::{BigDecimal, Zero};
use clap::Parser;
use serde_json::json;

use args::{BaselineArgs, ClassifierArgs, Cli, Command, EtwlArgs, Format, GateArgs, InputArgs, SwapArgs};
use lsis_core::counterfactual::report::{analysis_to_json, report_json, reports_from_csv, reports_to_csv};
use lsis_core::counterfactual::{relabel, run_analysis, run_analysis_with_swaps, AnalysisConfig, ClassifierConfig};
use lsis_core::etwl::{compute_etwl_with, lambda_sweep, rank_lps, ranking_to_csv, sweep_to_csv, EtwlOptions};
use lsis_core::gatekeeper::GateThresholds;
use lsis_core::ingest::jsonl::to_jsonl;
use lsis_core::ingest::{ingest_jsonl, IngestOptions, IngestReport};
use lsis_core::liquidity::LiquidityProfile;
use lsis_core::swap_math::{generate_synthetic_swaps, swaps_from_jsonl, swaps_to_jsonl, SwapGrid};
use manifest::Manifest;

pub const BUILD_ID: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("LSIS_GIT_REV"), ")");

/// Exit 1: bad flags, failed preconditions, rejected input. Exit 2: anything
/// that failed after validation.
enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

type Outcome<T> = std::result::Result<T, Failure>;

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

/// Input-side core errors are the caller's fault; the rest are runtime.
fn classify_core(e: lsis_core::Error) -> Failure {
    use lsis_core::Error as E;
    match e {
        E::InvalidArgument(_) | E::StrictValidation { .. } | E::EmptyDataset | E::Schema { .. } | E::TickOutOfRange(_) => {
            invalid(e)
        }
        other => runtime(other),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid(anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(runtime)?;
    }
    match cli.command {
        Command::Ingest { input, out_dir } => ingest(&input, &out_dir),
        Command::Rank { input, etwl, output } => rank(&input, &etwl, &output.out_dir, output.format),
        Command::Analyze {
            input,
            etwl,
            swaps,
            classifier,
            baselines,
            swaps_file,
            output,
        } => {
            let config = analysis_config(&etwl, &swaps, &classifier, &baselines)?;
            analyze(&input, config, swaps_file.as_deref(), &output.out_dir, output.format)
        }
        Command::Classify {
            reports,
            classifier,
            output,
        } => classify(&reports, &classifier, &output.out_dir, output.format),
        Command::SweepLambda {
            input,
            from,
            to,
            step,
            k,
            close_at_max_block,
            output,
        } => {
            let lambdas = lambda_range(&from, &to, &step).map_err(invalid)?;
            sweep(&input, &lambdas, k, close_at_max_block, &output.out_dir, output.format)
        }
        Command::Serve {
            input,
            etwl,
            swaps,
            classifier,
            baselines,
            gate,
            reports,
            bind,
            out_dir,
        } => {
            let config = analysis_config(&etwl, &swaps, &classifier, &baselines)?;
            let thresholds = gate_thresholds(&gate)?;
            serve(&input, config, thresholds, reports, bind, &out_dir)
        }
        Command::ExportSwaps { input, swaps, out_dir } => export_swaps(&input, &swaps, &out_dir),
    }
}

fn classifier_config(c: &ClassifierArgs) -> Outcome<ClassifierConfig> {
    let cfg = ClassifierConfig {
        lsis_epsilon: c.lsis_epsilon.clone(),
        lsis_significant: c.lsis_significant.clone(),
        lsis_linchpin: c.lsis_linchpin.clone(),
        active_rank_max: c.active_rank_max,
    };
    cfg.validate().map_err(invalid)?;
    Ok(cfg)
}

fn analysis_config(e: &EtwlArgs, s: &SwapArgs, c: &ClassifierArgs, b: &BaselineArgs) -> Outcome<AnalysisConfig> {
    let grid = SwapGrid::parse(&s.grid).map_err(invalid)?;
    let config = AnalysisConfig {
        k: e.k,
        lambda: e.lambda.clone(),
        grid_start: grid.start,
        grid_end: grid.end,
        grid_step: grid.step,
        seed: s.seed,
        classifier: classifier_config(c)?,
        model: s.model.into(),
        averaging: s.averaging.into(),
        etwl: EtwlOptions {
            close_at_max_block: e.close_at_max_block,
        },
        b2_share: b.b2_share.clone(),
        top_percentile: b.top_percentile.clone(),
    };
    config.validate().map_err(invalid)?;
    warn_lambda(&config.lambda);
    Ok(config)
}

fn gate_thresholds(g: &GateArgs) -> Outcome<GateThresholds> {
    let t = GateThresholds {
        allow: g.allow.clone(),
        deny: g.deny.clone(),
        min_depth: g
            .min_depth
            .trim()
            .parse()
            .map_err(|e| invalid(anyhow!("--min-depth {:?}: {e}", g.min_depth)))?,
        depth_window: g.depth_window,
    };
    t.validate().map_err(invalid)?;
    Ok(t)
}

fn warn_lambda(lambda: &BigDecimal) {
    if *lambda >= BigDecimal::zero() {
        log::warn!("lambda {lambda} is not negative; older liquidity will not be discounted");
    }
}

/// `from, from ± step, …` up to and including `to` when it lands exactly.
fn lambda_range(from: &BigDecimal, to: &BigDecimal, step: &BigDecimal) -> anyhow::Result<Vec<BigDecimal>> {
    if *step <= BigDecimal::zero() {
        return Err(anyhow!("--step must be positive (got {step})"));
    }
    let descending = to < from;
    let mut out = Vec::new();
    let mut cur = from.clone();
    loop {
        let past = if descending { cur < *to } else { cur > *to };
        if past {
            break;
        }
        out.push(cur.normalized());
        if out.len() > 10_000 {
            return Err(anyhow!("sweep would produce more than 10000 values"));
        }
        cur = if descending { &cur - step } else { &cur + step };
    }
    if out.len() < 2 {
        return Err(anyhow!("sweep from {from} to {to} by {step} yields fewer than two values"));
    }
    Ok(out)
}

fn load(input: &InputArgs) -> Outcome<IngestReport> {
    if !input.input.is_file() {
        return Err(invalid(anyhow!("input file {} does not exist", input.input.display())));
    }
    let report = ingest_jsonl(&input.input, input.pool, IngestOptions { strict: input.strict }).map_err(classify_core)?;
    if report.skipped_count() > 0 {
        log::warn!(
            "{} line(s) skipped ({} invalid, {} zero liquidity)",
            report.skipped_count(),
            report.skipped.len(),
            report.zero_liquidity
        );
    }
    Ok(report)
}

fn prepare_dir(dir: &Path) -> Outcome<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(runtime)
}

fn input_json(input: &InputArgs) -> serde_json::Value {
    json!({
        "input": input.input.display().to_string(),
        "pool": input.pool.to_string(),
        "strict": input.strict,
    })
}

fn ingest(input: &InputArgs, out_dir: &Path) -> Outcome<()> {
    let report = load(input)?;
    prepare_dir(out_dir)?;
    let d = &report.dataset;
    let mut m = Manifest::new("ingest", json!({ "input": input_json(input) }));
    m.dataset(d);
    m.write(out_dir, "events.jsonl", to_jsonl(d))?;
    m.write(out_dir, "profile.csv", LiquidityProfile::build(d, None).to_csv())?;
    let skipped: Vec<_> = report
        .skipped
        .iter()
        .map(|s| json!({ "line": s.line, "reason": s.reason }))
        .collect();
    let summary = json!({
        "dataset_hash": d.content_hash(),
        "events": d.len(),
        "owners": d.owners().len(),
        "min_block": d.min_block(),
        "max_block": d.max_block(),
        "zero_liquidity_dropped": report.zero_liquidity,
        "skipped": skipped,
    });
    m.write(out_dir, "ingest-summary.json", pretty(&summary))?;
    m.finish(out_dir)
}

fn rank(input: &InputArgs, e: &EtwlArgs, out_dir: &Path, format: Format) -> Outcome<()> {
    if e.k == 0 {
        return Err(invalid(anyhow!("--k must be at least 1")));
    }
    warn_lambda(&e.lambda);
    let report = load(input)?;
    prepare_dir(out_dir)?;
    let opts = EtwlOptions {
        close_at_max_block: e.close_at_max_block,
    };
    let scores = compute_etwl_with(&report.dataset, &e.lambda, opts);
    let ranking = rank_lps(&scores, e.k).map_err(classify_core)?;
    let mut m = Manifest::new(
        "rank",
        json!({
            "input": input_json(input),
            "k": e.k,
            "lambda": e.lambda.normalized().to_string(),
            "close_at_max_block": e.close_at_max_block,
            "format": format_name(format),
        }),
    );
    m.dataset(&report.dataset);
    match format {
        Format::Csv => m.write(out_dir, "ranking.csv", ranking_to_csv(&ranking))?,
        Format::Json => m.write(out_dir, "ranking.json", pretty(&ranking))?,
    }
    m.finish(out_dir)
}

fn analyze(
    input: &InputArgs,
    config: AnalysisConfig,
    swaps_file: Option<&Path>,
    out_dir: &Path,
    format: Format,
) -> Outcome<()> {
    let report = load(input)?;
    let swaps = match swaps_file {
        Some(path) => {
            let file = fs::File::open(path)
                .with_context(|| format!("opening {}", path.display()))
                .map_err(invalid)?;
            let (swaps, _) = swaps_from_jsonl(BufReader::new(file)).map_err(invalid)?;
            Some(swaps)
        }
        None => None,
    };
    prepare_dir(out_dir)?;
    let analysis = match swaps {
        Some(s) => run_analysis_with_swaps(&report.dataset, s, &config),
        None => run_analysis(&report.dataset, &config),
    }
    .map_err(classify_core)?;
    let mut m = Manifest::new(
        "analyze",
        json!({
            "input": input_json(input),
            "analysis": config,
            "swaps_file": swaps_file.map(|p| p.display().to_string()),
            "format": format_name(format),
        }),
    );
    m.dataset(&report.dataset);
    if let Some(p) = swaps_file {
        m.input_file("swaps", p)?;
    }
    match format {
        Format::Csv => m.write(out_dir, "lsis.csv", reports_to_csv(&analysis.reports))?,
        Format::Json => m.write(out_dir, "lsis.json", analysis_to_json(&analysis))?,
    }
    m.finish(out_dir)
}

fn classify(reports: &Path, c: &ClassifierArgs, out_dir: &Path, format: Format) -> Outcome<()> {
    let cfg = classifier_config(c)?;
    let file = fs::File::open(reports)
        .with_context(|| format!("opening {}", reports.display()))
        .map_err(invalid)?;
    let mut rows = reports_from_csv(file).map_err(invalid)?;
    prepare_dir(out_dir)?;
    relabel(&mut rows, &cfg);
    let mut m = Manifest::new(
        "classify",
        json!({
            "reports": reports.display().to_string(),
            "classifier": cfg,
            "format": format_name(format),
        }),
    );
    m.input_file("reports", reports)?;
    match format {
        Format::Csv => m.write(out_dir, "classified.csv", reports_to_csv(&rows))?,
        Format::Json => {
            let doc: Vec<_> = rows.iter().map(report_json).collect();
            m.write(out_dir, "classified.json", pretty(&doc))?
        }
    }
    m.finish(out_dir)
}

fn sweep(
    input: &InputArgs,
    lambdas: &[BigDecimal],
    k: usize,
    close_at_max_block: bool,
    out_dir: &Path,
    format: Format,
) -> Outcome<()> {
    if k == 0 {
        return Err(invalid(anyhow!("--k must be at least 1")));
    }
    let report = load(input)?;
    prepare_dir(out_dir)?;
    let rows = lambda_sweep(&report.dataset, lambdas, k, EtwlOptions { close_at_max_block }).map_err(classify_core)?;
    let mut m = Manifest::new(
        "sweep-lambda",
        json!({
            "input": input_json(input),
            "lambdas": lambdas.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "k": k,
            "close_at_max_block": close_at_max_block,
            "format": format_name(format),
        }),
    );
    m.dataset(&report.dataset);
    match format {
        Format::Csv => m.write(out_dir, "sweep.csv", sweep_to_csv(&rows))?,
        Format::Json => m.write(out_dir, "sweep.json", pretty(&rows))?,
    }
    m.finish(out_dir)
}

fn export_swaps(input: &InputArgs, s: &SwapArgs, out_dir: &Path) -> Outcome<()> {
    let grid = SwapGrid::parse(&s.grid).map_err(invalid)?;
    let report = load(input)?;
    prepare_dir(out_dir)?;
    let profile = LiquidityProfile::build(&report.dataset, None);
    let swaps = generate_synthetic_swaps(&profile, &grid, s.seed);
    let mut m = Manifest::new(
        "export-swaps",
        json!({ "input": input_json(input), "grid": grid.to_string(), "seed": s.seed }),
    );
    m.dataset(&report.dataset);
    m.write(out_dir, "swaps.jsonl", swaps_to_jsonl(&swaps, s.seed))?;
    m.finish(out_dir)
}

fn serve(
    input: &InputArgs,
    config: AnalysisConfig,
    thresholds: GateThresholds,
    reports: Option<PathBuf>,
    bind: std::net::SocketAddr,
    out_dir: &Path,
) -> Outcome<()> {
    if !input.input.is_file() {
        return Err(invalid(anyhow!("input file {} does not exist", input.input.display())));
    }
    prepare_dir(out_dir)?;
    let loader = lsis_gatekeeper::FileLoader {
        events: input.input.clone(),
        pool: input.pool,
        reports: reports.clone(),
        analysis: config.clone(),
        strict: input.strict,
    };
    let state = lsis_gatekeeper::AppState::new(Box::new(loader), thresholds.clone()).map_err(runtime)?;
    let mut m = Manifest::new(
        "serve",
        json!({
            "input": input_json(input),
            "analysis": config,
            "thresholds": thresholds,
            "reports": reports.map(|p| p.display().to_string()),
            "bind": bind.to_string(),
        }),
    );
    m.dataset_hash(state.snapshot().gate.dataset_hash());
    m.finish(out_dir)?;
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(runtime)?;
    rt.block_on(lsis_gatekeeper::serve(bind, state))
        .with_context(|| format!("serving on {bind}"))
        .map_err(runtime)
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

//! `performa`: batch driver for expected performative scores, properness
//! surfaces, estimator experiments, retraining and separation queries.

mod numfmt;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use performa_core::distributions::ConditionalForecast;
use performa_core::experiment::{run_estimator_experiment, ExperimentConfig, ModelSource};
use performa_core::fixtures::{graph_fixture, model_fixture, Fixture};
use performa_core::graph::{d_separated, Admg, SeparationQuery};
use performa_core::mechanisms::CausalModel;
use performa_core::performative::{action_utilities, correctness_class};
use performa_core::retraining::{run_retraining, ParametricFamily, RiskMetric, DEFAULT_TOL};
use performa_core::scoring::ScoringRule;
use performa_core::surface::{
    classify_properness, scan_surface, GridSpec, SurfaceMetric, DEFAULT_RESOLUTION, DEFAULT_TOLERANCE,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "performa", version, about = "Scoring rules for performative forecasts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Shipped fixture name.
    #[arg(long)]
    fixture: Option<String>,
    /// Fixture or bare model JSON file; overrides --fixture.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Expected scores and correctness classes of a fixture's forecasts.
    Example {
        /// Fixture name (same as --fixture).
        name: Option<String>,
        #[command(flatten)]
        source: ModelArgs,
        #[arg(long, default_value = "brier_score")]
        metric: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Also write the JSON document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan a metric over the forecast grid and classify its optimizers.
    Surface {
        #[command(flatten)]
        source: ModelArgs,
        #[arg(long, default_value = "brier_score")]
        metric: String,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        /// Use the half-step grid that avoids 0 and 1.
        #[arg(long)]
        offset: bool,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        /// Surface CSV path; the report goes next to it as `<stem>.report.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stdout format without --out: json prints the report, csv the table.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Plugin and unbiased estimator experiment.
    Estimate {
        /// Experiment config JSON; every field optional.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        source: ModelArgs,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated retraining from an initial parameter.
    Retrain {
        #[command(flatten)]
        source: ModelArgs,
        /// Comma-separated initial parameter.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        theta: Vec<f64>,
        /// `divergence:<rule>` or `neg_score:<rule>`.
        #[arg(long, default_value = "divergence:brier")]
        metric: String,
        /// `saturated` or `grid:<resolution>`.
        #[arg(long, default_value = "saturated")]
        family: String,
        #[arg(long, default_value_t = 100)]
        max_steps: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// d-separation query; exit code 0 when separated, 1 when connected.
    Dsep {
        /// Graph fixture name or JSON file.
        #[arg(long)]
        graph: String,
        /// Comma-separated first vertex set.
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<String>,
        /// Comma-separated second vertex set.
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<String>,
        /// Comma-separated conditioning set.
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<performa_core::Error> for CliError {
    fn from(e: performa_core::Error) -> Self {
        match e {
            performa_core::Error::Io(_) => CliError::Io(e.to_string()),
            performa_core::Error::Csv(ref c) if c.is_io_error() => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, contents.as_bytes()),
        None => io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Deserializes with the failing field path in the message.
fn parse_json<T: serde::de::DeserializeOwned>(origin: &str, text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{origin}: invalid value at `{path}`: {}", e.inner()))
    })
}

fn load_fixture(source: &ModelArgs, positional: Option<&str>) -> CliResult<Fixture> {
    if let Some(path) = &source.model {
        let text = read_file(path)?;
        let value: serde_json::Value = parse_json(&path.display().to_string(), &text)?;
        let origin = path.display().to_string();
        let mut fx = if value.get("model").is_some() {
            parse_json::<Fixture>(&origin, &text)?
        } else {
            Fixture {
                name: String::new(),
                description: String::new(),
                model: parse_json::<CausalModel>(&origin, &text)?,
                forecasts: Vec::new(),
            }
        };
        fx.model.validate()?;
        if fx.name.is_empty() {
            fx.name = origin;
        }
        return Ok(fx);
    }
    let name = positional
        .or(source.fixture.as_deref())
        .ok_or_else(|| CliError::Config("give a fixture name or --model <path>".into()))?;
    Ok(model_fixture(name)?)
}

fn parse_metric(name: &str, delta: Option<f64>) -> CliResult<SurfaceMetric> {
    let m: SurfaceMetric = name.parse()?;
    Ok(match delta {
        Some(d) => m.with_delta(d),
        None => m,
    })
}

#[derive(Serialize)]
struct ExampleRow {
    label: String,
    forecast: ConditionalForecast,
    value: f64,
    decimal: String,
    exact: Option<String>,
    class: String,
    action_probs: Vec<f64>,
}

#[derive(Serialize)]
struct ExampleDoc {
    fixture: String,
    metric: String,
    rows: Vec<ExampleRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    action_utilities: Option<Vec<f64>>,
}

fn cmd_example(
    name: Option<&str>,
    source: &ModelArgs,
    metric: &str,
    delta: Option<f64>,
    format: Format,
    out: Option<&Path>,
) -> CliResult<()> {
    let fx = load_fixture(source, name)?;
    let metric = parse_metric(metric, delta)?;
    let mut rows = Vec::new();
    for lf in &fx.forecasts {
        let value = metric.evaluate(&fx.model, &lf.forecast)?;
        rows.push(ExampleRow {
            label: lf.label.clone(),
            forecast: lf.forecast.clone(),
            value,
            decimal: numfmt::decimal(value),
            exact: numfmt::rational_string(value),
            class: correctness_class(&lf.forecast, &fx.model)?.to_string(),
            action_probs: fx.model.action_distribution(&lf.forecast)?.probabilities().to_vec(),
        });
    }
    let utilities = match &fx.model.utility {
        Some(u) if fx.model.kernel.is_forecast_invariant() => Some(action_utilities(u, &fx.model)?),
        _ => None,
    };
    let doc = ExampleDoc {
        fixture: fx.name.clone(),
        metric: metric.to_string(),
        rows,
        action_utilities: utilities,
    };
    if let Some(p) = out {
        write_file(p, json(&doc).as_bytes())?;
    }
    let text = match format {
        Format::Json => json(&doc),
        Format::Csv => {
            let mut s = String::from("label,forecast,value,exact,class\n");
            for r in &doc.rows {
                s += &format!(
                    "{},{},{},{},{}\n",
                    r.label,
                    forecast_str(&r.forecast, ";"),
                    r.decimal,
                    r.exact.as_deref().unwrap_or(""),
                    r.class
                );
            }
            s
        }
        Format::Table => {
            let mut s = format!("{} ({})\n", doc.fixture, doc.metric);
            s += &format!("{:<12} {:<22} {:>16} {:>12}  {}\n", "label", "forecast", "value", "exact", "class");
            for r in &doc.rows {
                s += &format!(
                    "{:<12} {:<22} {:>16} {:>12}  {}\n",
                    r.label,
                    forecast_str(&r.forecast, ", "),
                    r.decimal,
                    r.exact.as_deref().unwrap_or("-"),
                    r.class
                );
            }
            if let Some(u) = &doc.action_utilities {
                let parts: Vec<String> = u
                    .iter()
                    .enumerate()
                    .map(|(a, v)| format!("{} at a={}", numfmt::decimal(*v), fx.model.actions[a]))
                    .collect();
                s += &format!("action utilities: {}\n", parts.join(", "));
            }
            s
        }
    };
    emit(None, &text)
}

fn forecast_str(cf: &ConditionalForecast, sep: &str) -> String {
    match cf.binary_probs() {
        Some(p) => format!("({})", p.iter().map(|x| numfmt::decimal(*x)).collect::<Vec<_>>().join(sep)),
        None => serde_json::to_string(cf).expect("serializable"),
    }
}

fn sidecar(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.report.json"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_surface(
    source: &ModelArgs,
    metric: &str,
    resolution: usize,
    offset: bool,
    delta: Option<f64>,
    tol: f64,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    let fx = load_fixture(source, None)?;
    let metric = parse_metric(metric, delta)?;
    let table = scan_surface(&metric, &fx.model, GridSpec { resolution, offset })?;
    let report = classify_properness(&table, &fx.model, tol)?;
    match out {
        Some(p) => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            write_file(p, &buf)?;
            let side = sidecar(p);
            write_file(&side, json(&report).as_bytes())?;
            println!(
                "{}: optimum {} at {} grid point(s); report in {}",
                report.metric,
                numfmt::decimal(report.optimum),
                report.maximizers.len(),
                side.display()
            );
            Ok(())
        }
        None => match format {
            Format::Csv => emit(None, &table.to_csv_string()?),
            _ => emit(None, &json(&report)),
        },
    }
}

fn cmd_estimate(
    config: Option<&Path>,
    source: &ModelArgs,
    replications: Option<usize>,
    seed: Option<u64>,
    format: Format,
    out: Option<&Path>,
) -> CliResult<()> {
    let mut cfg: ExperimentConfig = match config {
        Some(p) => parse_json(&p.display().to_string(), &read_file(p)?)?,
        None => ExperimentConfig::default(),
    };
    if source.model.is_some() {
        cfg.model = ModelSource::Inline(Box::new(load_fixture(source, None)?.model));
    } else if let Some(name) = &source.fixture {
        model_fixture(name)?;
        cfg.model = ModelSource::Fixture(name.clone());
    }
    if let Some(r) = replications {
        cfg.replications = r;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let summary = run_estimator_experiment(&cfg)?;
    let text = match format {
        Format::Json => json(&summary),
        _ => summary.to_csv_string()?,
    };
    emit(out, &text)
}

fn parse_risk(s: &str) -> CliResult<RiskMetric> {
    let (head, rule) = s
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("unknown risk `{s}` (expected divergence:<rule> or neg_score:<rule>)")))?;
    let rule: ScoringRule = rule.parse()?;
    match head {
        "divergence" => Ok(RiskMetric::Divergence(rule)),
        "neg_score" => Ok(RiskMetric::NegScore(rule)),
        _ => Err(CliError::Config(format!("unknown risk `{s}`"))),
    }
}

fn parse_family(s: &str, n_actions: usize) -> CliResult<ParametricFamily> {
    if s == "saturated" {
        return Ok(ParametricFamily::saturated(n_actions));
    }
    let r = s
        .strip_prefix("grid:")
        .and_then(|r| r.parse::<usize>().ok())
        .ok_or_else(|| CliError::Config(format!("unknown family `{s}` (expected saturated or grid:<resolution>)")))?;
    Ok(ParametricFamily::uniform_grid(n_actions, r)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_retrain(
    source: &ModelArgs,
    theta: &[f64],
    metric: &str,
    family: &str,
    max_steps: usize,
    tol: f64,
    format: Format,
    out: Option<&Path>,
) -> CliResult<()> {
    let fx = load_fixture(source, None)?;
    let metric = parse_risk(metric)?;
    let family = parse_family(family, fx.model.n_actions())?;
    let t = run_retraining(&metric, theta, &family, &fx.model, max_steps, tol)?;
    let text = match format {
        Format::Json => json(&t),
        _ => t.to_csv_string()?,
    };
    emit(out, &text)?;
    match t.stable_at {
        Some(s) => eprintln!("stable at step {s}"),
        None => eprintln!("not stable after {max_steps} steps"),
    }
    Ok(())
}

fn load_graph(spec: &str) -> CliResult<Admg> {
    let path = Path::new(spec);
    if path.is_file() {
        return parse_json(spec, &read_file(path)?);
    }
    Ok(graph_fixture(spec)?)
}

fn cmd_dsep(graph: &str, a: &[String], b: &[String], given: &[String]) -> CliResult<bool> {
    let g = load_graph(graph)?;
    let q = SeparationQuery::new(a.iter().cloned(), b.iter().cloned(), given.iter().cloned());
    let sep = d_separated(&g, &q)?;
    println!("{}", if sep { "separated" } else { "connected" });
    Ok(sep)
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("PERFORMA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("PERFORMA_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Example { name, source, metric, delta, format, out } => {
            cmd_example(name.as_deref(), &source, &metric, delta, format, out.as_deref())?
        }
        Command::Surface { source, metric, resolution, offset, delta, tol, out, format } => {
            cmd_surface(&source, &metric, resolution, offset, delta, tol, out.as_deref(), format)?
        }
        Command::Estimate { config, source, replications, seed, format, out } => {
            cmd_estimate(config.as_deref(), &source, replications, seed, format, out.as_deref())?
        }
        Command::Retrain { source, theta, metric, family, max_steps, tol, format, out } => {
            cmd_retrain(&source, &theta, &metric, &family, max_steps, tol, format, out.as_deref())?
        }
        Command::Dsep { graph, a, b, given } => {
            return Ok(if cmd_dsep(&graph, &a, &b, &given)? { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hrv_core::copulas::SurvivalCopulaFamily;
use hrv_core::estimators::{
    empirical_mes_variant_with_floor, empirical_mes_with_floor, empirical_mme_with_floor, empirical_var, Conditioning,
    RiskMeasure, DEFAULT_MIN_EXCEEDANCES,
};
use hrv_core::harness::{
    read_json, run_and_write, Cell, ConfigError, ExperimentConfig, HarnessError, ModelSpec, Table,
};
use hrv_core::limits::{
    condition_diagnostic, k_constant, nu0_analytic, nu0_transformed, Condition, DiagnosticTarget, LimitKind,
    DEFAULT_M_GRID, DEFAULT_S_GRID, DEFAULT_T_GRID,
};
use hrv_core::models::{sample_transformed, validate_model, BivariateModel, Transform};

#[derive(Parser)]
#[command(
    name = "hrv",
    version,
    about = "Hidden regular variation: sampling, limit constants and convergence runs"
)]
struct Cli {
    /// Seed for sampling; overrides the config seed for `experiment`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Draw pairs from a model.
    Sample {
        /// JSON model spec.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_transform, default_value = "identity")]
        transform: Transform,
    },
    /// Empirical risk measures of a pairs file.
    Estimate {
        /// CSV with a header and two numeric columns `z1,z2`.
        #[arg(long)]
        pairs: PathBuf,
        /// Comma-separated levels.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        /// Comma-separated subset of var, mes, mme, mes_plus, mes_min, mes_max.
        #[arg(long, value_delimiter = ',', value_parser = parse_measure, default_value = "var,mes,mme")]
        measures: Vec<RiskMeasure>,
        #[arg(long, default_value_t = DEFAULT_MIN_EXCEEDANCES)]
        min_exceedances: usize,
    },
    /// Limit measure on a grid, K constants and tail order data.
    Limits {
        #[arg(long)]
        model: PathBuf,
        /// `RxC`: nu0 at x = 2^i, y = 2^j for i < R, j < C.
        #[arg(long, default_value = "4x4", value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long, value_parser = parse_transform, default_value = "identity")]
        transform: Transform,
    },
    /// Tail integral condition tables.
    Diagnose {
        #[arg(long)]
        model: PathBuf,
        /// upper-tail, both-tails, copula-upper-tail or copula-both-tails.
        #[arg(long, value_parser = parse_condition)]
        condition: Condition,
        #[arg(long, value_delimiter = ',')]
        m_grid: Option<Vec<f64>>,
        /// Levels t (model conditions) or s (copula conditions).
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
    },
    /// Full convergence run from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_transform(s: &str) -> Result<Transform, String> {
    Transform::ALL
        .into_iter()
        .find(|t| t.as_str() == s)
        .ok_or_else(|| format!("unknown transform `{s}`"))
}

fn parse_measure(s: &str) -> Result<RiskMeasure, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown measure `{s}`"))
}

fn parse_condition(s: &str) -> Result<Condition, String> {
    Condition::parse(s).ok_or_else(|| format!("unknown condition `{s}`"))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once('x')
        .ok_or_else(|| format!("grid `{s}` is not of the form RxC"))?;
    let dim = |v: &str| {
        v.parse::<usize>()
            .ok()
            .filter(|d| *d > 0)
            .ok_or_else(|| format!("bad grid size in `{s}`"))
    };
    Ok((dim(r)?, dim(c)?))
}

enum CliError {
    /// Bad flags, config or input files: exit 2.
    Usage(String),
    /// Numerical or I/O failure while running: exit 1.
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(c) => c.into(),
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<hrv_core::Error> for CliError {
    fn from(e: hrv_core::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn load_model(path: &Path) -> CliResult<(ModelSpec, BivariateModel)> {
    let spec: ModelSpec = read_json(path)?;
    let model = spec
        .build()
        .map_err(|e| CliError::Usage(format!("invalid model in `{}`: {e}", path.display())))?;
    Ok((spec, model))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write `{}`: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(table: &Table, header: &serde_json::Value, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv_string(),
        Format::Json => table.to_json_string(header),
    }
}

fn sample(cli: &Cli, model_path: &Path, n: usize, transform: Transform) -> CliResult<String> {
    let (spec, model) = load_model(model_path)?;
    let seed = cli.seed.unwrap_or(0);
    let pairs = sample_transformed(&model, transform, n, seed)?;
    let mut table = Table::new(&["z1", "z2"]);
    table.rows = pairs.iter().map(|&(a, b)| vec![Cell::Num(a), Cell::Num(b)]).collect();
    let header = json!({ "model": spec, "transform": transform, "n": n, "seed": seed });
    Ok(render(&table, &header, cli.format))
}

fn read_pairs(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let bad = |msg: String| CliError::Usage(format!("`{}`: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut pairs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        if record.len() != 2 {
            return Err(bad(format!("line {line} has {} fields, expected 2", record.len())));
        }
        let num = |k: usize| {
            record[k]
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("line {line}: `{}` is not a number", &record[k])))
        };
        pairs.push((num(0)?, num(1)?));
    }
    if pairs.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(pairs)
}

fn estimate(cli: &Cli, path: &Path, levels: &[f64], measures: &[RiskMeasure], floor: usize) -> CliResult<String> {
    let pairs = read_pairs(path)?;
    let mut table = Table::new(&["measure", "p", "value", "threshold", "exceedances", "se"]);
    for &p in levels {
        for &m in measures {
            let est = match m {
                RiskMeasure::Var => {
                    let z2: Vec<f64> = pairs.iter().map(|z| z.1).collect();
                    let v = empirical_var(&z2, p)?;
                    table.push(vec![
                        Cell::Text(m.as_str().into()),
                        Cell::Num(p),
                        Cell::Num(v),
                        Cell::Num(v),
                        Cell::Empty,
                        Cell::Empty,
                    ]);
                    continue;
                }
                RiskMeasure::Mes => empirical_mes_with_floor(&pairs, p, floor)?,
                RiskMeasure::Mme => empirical_mme_with_floor(&pairs, p, floor)?,
                RiskMeasure::MesPlus => empirical_mes_variant_with_floor(&pairs, p, Conditioning::Sum, floor)?,
                RiskMeasure::MesMin => empirical_mes_variant_with_floor(&pairs, p, Conditioning::Min, floor)?,
                RiskMeasure::MesMax => empirical_mes_variant_with_floor(&pairs, p, Conditioning::Max, floor)?,
            };
            table.push(vec![
                Cell::Text(m.as_str().into()),
                Cell::Num(p),
                Cell::Num(est.value),
                Cell::Num(est.threshold),
                Cell::Int(est.exceedance_count as u64),
                Cell::Num(est.standard_error),
            ]);
        }
    }
    let header = json!({ "pairs": path, "n": pairs.len(), "min_exceedances": floor });
    Ok(render(&table, &header, cli.format))
}

fn quantity(name: &str, x: Option<f64>, y: Option<f64>, value: Cell) -> Vec<Cell> {
    vec![
        Cell::Text(name.into()),
        x.map_or(Cell::Empty, Cell::Num),
        y.map_or(Cell::Empty, Cell::Num),
        value,
    ]
}

fn limits(cli: &Cli, path: &Path, (rows, cols): (usize, usize), transform: Transform) -> CliResult<String> {
    let (spec, model) = load_model(path)?;
    let grid = |k: usize| (0..k).map(|i| 2f64.powi(i as i32)).collect::<Vec<_>>();
    let (xs, ys) = (grid(rows), grid(cols));
    let mut table = Table::new(&["quantity", "x", "y", "value"]);
    let mut notes = Vec::new();
    match nu0_analytic(&model).and_then(|nu0| nu0_transformed(&nu0, &model, transform)) {
        Ok(nu) => {
            table.push(quantity("alpha0", None, None, Cell::Num(nu.alpha0())));
            for &x in &xs {
                for &y in &ys {
                    table.push(quantity("nu0", Some(x), Some(y), Cell::Num(nu.eval(x, y))));
                }
            }
            for (name, kind) in [("k_mes", LimitKind::Mes), ("k_mme", LimitKind::Mme)] {
                let value = match k_constant(&nu, kind) {
                    Ok(k) => Cell::Num(k.value),
                    Err(hrv_core::Error::Divergent(reason)) => {
                        notes.push(format!("{name}: {reason}"));
                        Cell::Text("divergent".into())
                    }
                    Err(e) => {
                        notes.push(format!("{name}: {e}"));
                        Cell::Text("unavailable".into())
                    }
                };
                table.push(quantity(name, None, None, value));
            }
        }
        Err(e) => notes.push(format!("nu0: {e}")),
    }
    if let BivariateModel::CopulaCoupled(m) = &model {
        copula_rows(&mut table, &mut notes, &m.family, m.tau(), &xs, &ys);
    }
    let header = json!({
        "model": spec,
        "transform": transform,
        "validation": validate_model(&model),
        "notes": notes,
    });
    Ok(render(&table, &header, cli.format))
}

fn copula_rows(
    table: &mut Table,
    notes: &mut Vec<String>,
    family: &SurvivalCopulaFamily,
    tau: f64,
    xs: &[f64],
    ys: &[f64],
) {
    match family.tail_order_pair(tau) {
        Ok(pair) => {
            table.push(quantity("kappa", None, None, Cell::Num(pair.kappa)));
            table.push(quantity("tau", None, None, Cell::Num(pair.tau)));
        }
        Err(e) => notes.push(format!("tail order pair: {e}")),
    }
    for &x in xs {
        for &y in ys {
            match family.tail_order_function(x, y, tau) {
                Ok(t) => table.push(quantity("tail_order", Some(x), Some(y), Cell::Num(t))),
                Err(e) => {
                    notes.push(format!("tail order function: {e}"));
                    return;
                }
            }
        }
    }
}

fn diagnose(
    cli: &Cli,
    path: &Path,
    condition: Condition,
    m_grid: Option<&[f64]>,
    levels: Option<&[f64]>,
) -> CliResult<String> {
    let (spec, model) = load_model(path)?;
    let copula = matches!(condition, Condition::CopulaUpperTail | Condition::CopulaBothTails);
    let default_levels: &[f64] = if copula { &DEFAULT_S_GRID } else { &DEFAULT_T_GRID };
    let table = condition_diagnostic(
        DiagnosticTarget::Model(&model),
        condition,
        m_grid.unwrap_or(&DEFAULT_M_GRID),
        levels.unwrap_or(default_levels),
    )
    .map_err(|e| match e {
        hrv_core::Error::InvalidParameter { .. } | hrv_core::Error::Unsupported(_) => CliError::Usage(e.to_string()),
        other => other.into(),
    })?;
    let mut out = Table::new(&[
        "condition",
        "m",
        table.level_name,
        "lower",
        "upper",
        "remainder",
        "verdict",
    ]);
    for r in &table.rows {
        out.push(vec![
            Cell::Text(condition.as_str().into()),
            Cell::Num(r.m),
            Cell::Num(r.level),
            r.lower.map_or(Cell::Empty, Cell::Num),
            Cell::Num(r.upper),
            Cell::Num(r.remainder),
            Cell::Text(table.verdict.as_str().into()),
        ]);
    }
    let header = json!({
        "model": spec,
        "condition": condition,
        "level": table.level_name,
        "verdict": table.verdict,
    });
    Ok(render(&out, &header, cli.format))
}

fn experiment(cli: &Cli, path: &Path) -> CliResult<String> {
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    let report = run_and_write(&config)?;
    Ok(match cli.format {
        Format::Csv => report.to_csv_string(),
        Format::Json => report.to_json_string(),
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    let text = match &cli.command {
        Command::Sample { model, n, transform } => sample(cli, model, *n, *transform)?,
        Command::Estimate {
            pairs,
            p,
            measures,
            min_exceedances,
        } => estimate(cli, pairs, p, measures, *min_exceedances)?,
        Command::Limits { model, grid, transform } => limits(cli, model, *grid, *transform)?,
        Command::Diagnose {
            model,
            condition,
            m_grid,
            levels,
        } => diagnose(cli, model, *condition, m_grid.as_deref(), levels.as_deref())?,
        Command::Experiment { config } => experiment(cli, config)?,
    };
    emit(cli.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

//! Convergence experiments: sample a model once, estimate the requested risk
//! measures along a grid of levels and set the scaled estimates against the
//! limit constants.

mod config;
mod report;

use serde::Serialize;

pub use config::{
    read_json, ConfigError, ExperimentConfig, ExperimentSection, FamilySpec, MarginSpec, ModelSpec, OutputSpec,
    RAtomSpec, RLawSpec, Real, VKindSpec,
};
pub use report::{format_f64, Cell, Table, SCHEMA_VERSION};

use crate::error::Error;
use crate::estimators::{
    empirical_mes_variant_with_floor, empirical_mes_with_floor, empirical_mme_with_floor, Conditioning, RiskEstimate,
    RiskMeasure,
};
use crate::limits::{k_constant, nu0_analytic, nu0_transformed, LimitKind, ScalingA};
use crate::models::{results, sample_transformed, validate_model, BivariateModel, Transform, ValidationReport};

/// Measures in report column order.
pub const MEASURE_ORDER: [RiskMeasure; 5] = [
    RiskMeasure::Mes,
    RiskMeasure::Mme,
    RiskMeasure::MesPlus,
    RiskMeasure::MesMin,
    RiskMeasure::MesMax,
];

pub const SAMPLING_NOTE: &str = "one sample of n pairs is drawn once and reused at every level, \
so estimates at different levels are positively correlated";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

/// Theoretical constant for one measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum KStatus {
    Value {
        value: f64,
        error_bound: f64,
    },
    /// The defining integral diverges; the scaled product has no finite limit.
    Divergent {
        reason: String,
    },
    /// No closed-form limit measure or the quadrature did not converge.
    Unavailable {
        reason: String,
    },
}

impl KStatus {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn marker(&self) -> &'static str {
        match self {
            Self::Value { .. } => "value",
            Self::Divergent { .. } => "divergent",
            Self::Unavailable { .. } => "unavailable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureHeader {
    pub measure: RiskMeasure,
    /// Pair whose MES or MME the measure is: the configured transform for
    /// `mes` and `mme`, the matching coordinate map for the variants.
    pub pair: Transform,
    pub k: KStatus,
    pub qualified: bool,
    pub qualification: String,
    pub expected_k: Option<f64>,
    pub expected_k_matches: Option<bool>,
    pub scaling: ScalingA,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportHeader {
    pub schema_version: u32,
    pub model: ModelSpec,
    pub model_description: String,
    pub transform: Transform,
    pub seed: u64,
    pub n: usize,
    pub min_exceedances: usize,
    pub p_grid: Vec<f64>,
    pub sampling: &'static str,
    pub validation: ValidationReport,
    pub measures: Vec<MeasureHeader>,
    pub columns: Vec<String>,
}

/// One measure at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureCell {
    pub measure: RiskMeasure,
    /// Empirical VaR of the conditioning variable.
    pub var: f64,
    pub estimate: f64,
    pub standard_error: f64,
    pub exceedances: usize,
    pub a: f64,
    pub scaled: f64,
    pub k: Option<f64>,
    pub rel_gap: Option<f64>,
    /// `p^(1/alpha0)` times the estimate.
    pub p_scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub p: f64,
    pub cells: Vec<MeasureCell>,
}

impl ReportRow {
    pub fn cell(&self, measure: RiskMeasure) -> Option<&MeasureCell> {
        self.cells.iter().find(|c| c.measure == measure)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub header: ReportHeader,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    pub fn measure(&self, measure: RiskMeasure) -> Option<&MeasureHeader> {
        self.header.measures.iter().find(|m| m.measure == measure)
    }

    /// `(p, cell)` for one measure across the grid.
    pub fn series(&self, measure: RiskMeasure) -> Vec<(f64, MeasureCell)> {
        self.rows
            .iter()
            .filter_map(|r| r.cell(measure).map(|c| (r.p, *c)))
            .collect()
    }
}

/// Coordinate map whose MES gives the measure on the untransformed pair.
pub(crate) fn measure_pair(measure: RiskMeasure, transform: Transform) -> Transform {
    match measure {
        RiskMeasure::MesPlus => Transform::FirstWithSum,
        RiskMeasure::MesMin => Transform::MinSecond,
        RiskMeasure::MesMax => Transform::FirstWithMax,
        _ => transform,
    }
}

fn limit_kind(measure: RiskMeasure) -> LimitKind {
    if measure == RiskMeasure::Mme {
        LimitKind::Mme
    } else {
        LimitKind::Mes
    }
}

fn k_status(model: &BivariateModel, measure: RiskMeasure, pair: Transform) -> KStatus {
    let result = nu0_analytic(model)
        .and_then(|nu0| nu0_transformed(&nu0, model, pair))
        .and_then(|nu| k_constant(&nu, limit_kind(measure)));
    match result {
        Ok(k) => KStatus::Value {
            value: k.value,
            error_bound: k.error_bound,
        },
        Err(Error::Divergent(reason)) => KStatus::Divergent { reason },
        Err(e) => KStatus::Unavailable { reason: e.to_string() },
    }
}

fn qualification(report: &ValidationReport, measure: RiskMeasure, pair: Transform) -> (bool, String) {
    let base = if measure == RiskMeasure::Mme {
        results::MME_LIMIT
    } else {
        results::MES_LIMIT
    };
    let transform = results::transform_limit(pair);
    let holds = report.qualifies(base) && report.qualifies(&transform);
    (holds, format!("{base} and {transform}"))
}

fn estimate(pairs: &[(f64, f64)], measure: RiskMeasure, p: f64, floor: usize) -> crate::Result<RiskEstimate> {
    match measure {
        RiskMeasure::Mes => empirical_mes_with_floor(pairs, p, floor),
        RiskMeasure::Mme => empirical_mme_with_floor(pairs, p, floor),
        RiskMeasure::MesPlus => empirical_mes_variant_with_floor(pairs, p, Conditioning::Sum, floor),
        RiskMeasure::MesMin => empirical_mes_variant_with_floor(pairs, p, Conditioning::Min, floor),
        RiskMeasure::MesMax => empirical_mes_variant_with_floor(pairs, p, Conditioning::Max, floor),
        RiskMeasure::Var => Err(Error::Unsupported("var is not a conditional measure".into())),
    }
}

/// Requested measures in canonical order.
pub fn ordered_measures(requested: &[RiskMeasure]) -> Vec<RiskMeasure> {
    MEASURE_ORDER.into_iter().filter(|m| requested.contains(m)).collect()
}

/// Sample once, estimate every requested measure at every level and attach
/// the scaling `a(1/p)` and the constant `K`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport, HarnessError> {
    let model = config.check()?;
    let e = &config.experiment;
    let floor = config.min_exceedances();
    let p_grid = config.p_grid();
    let measures = ordered_measures(&e.measures);
    let validation = validate_model(&model);

    let mut headers = Vec::with_capacity(measures.len());
    for &measure in &measures {
        let pair = measure_pair(measure, config.transform);
        let k = k_status(&model, measure, pair);
        let (qualified, qualification) = qualification(&validation, measure, pair);
        let expected_k = e.expected_k.get(&measure).map(|r| r.get());
        let expected_k_matches = match (expected_k, k.value()) {
            (Some(want), Some(got)) => Some((got - want).abs() <= 1e-6 * want.abs().max(1.0)),
            (Some(_), None) => Some(false),
            _ => None,
        };
        headers.push(MeasureHeader {
            measure,
            pair,
            k,
            qualified,
            qualification,
            expected_k,
            expected_k_matches,
            scaling: ScalingA::new(&model, pair)?,
        });
    }

    let pairs = sample_transformed(&model, config.transform, e.n, e.seed)?;
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in &p_grid {
        let mut cells = Vec::with_capacity(headers.len());
        for h in &headers {
            let est = estimate(&pairs, h.measure, p, floor)?;
            let a = h.scaling.eval(p)?;
            let scaled = a * est.value;
            if !scaled.is_finite() {
                return Err(
                    Error::Degenerate(format!("scaled {} at p = {p} is not finite", h.measure.as_str())).into(),
                );
            }
            let k = h.k.value();
            cells.push(MeasureCell {
                measure: h.measure,
                var: est.threshold,
                estimate: est.value,
                standard_error: est.standard_error,
                exceedances: est.exceedance_count,
                a,
                scaled,
                k,
                rel_gap: k.map(|k| (scaled - k).abs() / k),
                p_scaled: p.powf(1.0 / h.scaling.alpha0) * est.value,
            });
        }
        rows.push(ReportRow { p, cells });
    }

    let header = ReportHeader {
        schema_version: SCHEMA_VERSION,
        model: config.model.clone(),
        model_description: model.to_string(),
        transform: config.transform,
        seed: e.seed,
        n: e.n,
        min_exceedances: floor,
        p_grid,
        sampling: SAMPLING_NOTE,
        validation,
        columns: report::columns(&measures),
        measures: headers,
    };
    Ok(ConvergenceReport { header, rows })
}

/// Run the experiment and write the report files named in the config.
pub fn run_and_write(config: &ExperimentConfig) -> Result<ConvergenceReport, HarnessError> {
    let report = run_experiment(config)?;
    if let Some(out) = &config.experiment.output {
        if let Some(path) = &out.csv {
            report.write_csv_file(path)?;
        }
        if let Some(path) = &out.json {
            report.write_json_file(path)?;
        }
    }
    Ok(report)
}

//! Experiment configuration: a JSON document with `model`, `transform` and
//! `experiment` sections. Unknown fields are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::copulas::{GumbelGenerator, SurvivalCopulaFamily};
use crate::estimators::RiskMeasure;
use crate::margins::Margin;
use crate::models::{
    validate_model, AdditiveModel, BernoulliMixtureModel, BivariateModel, CopulaCoupledModel, RAtom, RLaw, Transform,
    VKind,
};

/// A number written as a JSON number, a decimal string or an exact ratio `"5/3"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Real(pub f64);

impl Real {
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn parse(s: &str) -> Result<f64, String> {
        let s = s.trim();
        let value = match s.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
                let den: f64 = den.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
                if den == 0.0 {
                    return Err(format!("zero denominator in `{s}`"));
                }
                num / den
            }
            None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(format!("`{s}` is not finite"))
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RealVisitor;

        impl Visitor<'_> for RealVisitor {
            type Value = Real;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a string such as \"2.5\" or \"5/3\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                Real::parse(v).map(Real).map_err(E::custom)
            }
        }

        d.deserialize_any(RealVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginSpec {
    pub alpha: Real,
    /// Survival prefactor; 1 when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Real>,
}

impl MarginSpec {
    pub fn build(&self) -> crate::Result<Margin> {
        match self.scale {
            None => Margin::pareto(self.alpha.get()),
            Some(c) => Margin::scaled_pareto(self.alpha.get(), c.get()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RAtomSpec {
    pub r1: Real,
    pub r2: Real,
    pub prob: Real,
}

/// Law of the multipliers `(R1, R2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RLawSpec {
    Deterministic { r1: Real, r2: Real },
    Discrete { atoms: Vec<RAtomSpec> },
}

impl RLawSpec {
    pub fn build(&self) -> crate::Result<RLaw> {
        let law = match self {
            Self::Deterministic { r1, r2 } => RLaw::Deterministic {
                r1: r1.get(),
                r2: r2.get(),
            },
            Self::Discrete { atoms } => RLaw::Discrete {
                atoms: atoms
                    .iter()
                    .map(|a| RAtom {
                        r1: a.r1.get(),
                        r2: a.r2.get(),
                        prob: a.prob.get(),
                    })
                    .collect(),
            },
        };
        law.validate()?;
        Ok(law)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VKindSpec {
    Comonotone,
    Multiplicative(RLawSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Independence,
    Gaussian { rho: Real },
    MarshallOlkin { gamma1: Real, gamma2: Real },
    Morgenstern { theta: Real },
    Clayton { theta: Real },
    Frank { theta: Real },
    Gumbel { theta: Real },
}

impl FamilySpec {
    pub fn build(&self) -> crate::Result<SurvivalCopulaFamily> {
        match self {
            Self::Independence => Ok(SurvivalCopulaFamily::Independence),
            Self::Gaussian { rho } => SurvivalCopulaFamily::gaussian(rho.get()),
            Self::MarshallOlkin { gamma1, gamma2 } => SurvivalCopulaFamily::marshall_olkin(gamma1.get(), gamma2.get()),
            Self::Morgenstern { theta } => SurvivalCopulaFamily::morgenstern(theta.get()),
            Self::Clayton { theta } => SurvivalCopulaFamily::clayton(theta.get()),
            Self::Frank { theta } => SurvivalCopulaFamily::frank(theta.get()),
            Self::Gumbel { theta } => SurvivalCopulaFamily::archimedean(GumbelGenerator { theta: theta.get() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Additive {
        y1: MarginSpec,
        /// Omitted or null means `Y2 = 0`.
        #[serde(default)]
        y2: Option<MarginSpec>,
        v: MarginSpec,
        v_kind: VKindSpec,
    },
    Mixture {
        q: Real,
        alpha: Real,
        alpha0: Real,
        gamma: Real,
        r_law: RLawSpec,
    },
    Copula {
        family: FamilySpec,
        margin1: MarginSpec,
        margin2: MarginSpec,
    },
}

impl ModelSpec {
    pub fn build(&self) -> crate::Result<BivariateModel> {
        Ok(match self {
            Self::Additive { y1, y2, v, v_kind } => BivariateModel::Additive(AdditiveModel::new(
                y1.build()?,
                y2.as_ref().map(MarginSpec::build).transpose()?,
                v.build()?,
                match v_kind {
                    VKindSpec::Comonotone => VKind::Comonotone,
                    VKindSpec::Multiplicative(law) => VKind::Multiplicative(law.build()?),
                },
            )?),
            Self::Mixture {
                q,
                alpha,
                alpha0,
                gamma,
                r_law,
            } => BivariateModel::Mixture(BernoulliMixtureModel::new(
                q.get(),
                alpha.get(),
                alpha0.get(),
                gamma.get(),
                r_law.build()?,
            )?),
            Self::Copula {
                family,
                margin1,
                margin2,
            } => BivariateModel::CopulaCoupled(CopulaCoupledModel::new(
                family.build()?,
                margin1.build()?,
                margin2.build()?,
            )?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Strictly decreasing levels in `(0, 1)`.
    pub p_grid: Vec<Real>,
    pub n: usize,
    pub seed: u64,
    pub measures: Vec<RiskMeasure>,
    /// Floor on conditioning exceedances; the estimators' default when omitted.
    #[serde(default)]
    pub min_exceedances: Option<usize>,
    /// Reference values of K to compare against the quadrature.
    #[serde(default)]
    pub expected_k: BTreeMap<RiskMeasure, Real>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub transform: Transform,
    pub experiment: ExperimentSection,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn bad(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Read a JSON document from a file, naming the path on failure.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let cfg: Self = read_json(path)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn min_exceedances(&self) -> usize {
        self.experiment
            .min_exceedances
            .unwrap_or(crate::estimators::DEFAULT_MIN_EXCEEDANCES)
    }

    pub fn p_grid(&self) -> Vec<f64> {
        self.experiment.p_grid.iter().map(|p| p.get()).collect()
    }

    /// Semantic checks beyond the schema; returns the built model.
    pub fn check(&self) -> Result<BivariateModel, ConfigError> {
        let model = self.model.build().map_err(|e| bad("model", e.to_string()))?;
        let report = validate_model(&model);
        if !report.ok() {
            let names: Vec<String> = report
                .violations()
                .iter()
                .map(|c| format!("{} ({})", c.name, c.detail))
                .collect();
            return Err(bad("model", format!("assumptions violated: {}", names.join("; "))));
        }
        let e = &self.experiment;
        if e.n == 0 {
            return Err(bad("experiment.n", "must be at least 1"));
        }
        let ps = self.p_grid();
        if ps.is_empty() {
            return Err(bad("experiment.p_grid", "must not be empty"));
        }
        if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(bad("experiment.p_grid", format!("{p} is outside (0, 1)")));
        }
        if ps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("experiment.p_grid", "levels must be strictly decreasing"));
        }
        let floor = self.min_exceedances();
        if let Some(p) = ps.iter().find(|p| (e.n as f64) * **p < floor as f64) {
            return Err(bad(
                "experiment.p_grid",
                format!(
                    "n p = {} at p = {p} is below the exceedance floor {floor}",
                    e.n as f64 * p
                ),
            ));
        }
        if e.measures.is_empty() {
            return Err(bad("experiment.measures", "must not be empty"));
        }
        if e.measures.contains(&RiskMeasure::Var) {
            return Err(bad(
                "experiment.measures",
                "`var` is reported with every measure and cannot be requested alone",
            ));
        }
        let mut seen = e.measures.clone();
        seen.sort_by_key(|m| m.as_str());
        seen.dedup();
        if seen.len() != e.measures.len() {
            return Err(bad("experiment.measures", "contains duplicates"));
        }
        let variant = e
            .measures
            .iter()
            .any(|m| matches!(m, RiskMeasure::MesPlus | RiskMeasure::MesMin | RiskMeasure::MesMax));
        if variant && self.transform != Transform::Identity {
            return Err(bad(
                "transform",
                "mes_plus, mes_min and mes_max are defined on the untransformed pair",
            ));
        }
        for &m in &e.measures {
            let pair = super::measure_pair(m, self.transform);
            if let Err(err) = crate::limits::ScalingA::new(&model, pair) {
                return Err(bad(
                    "transform",
                    format!("no scaling a(1/p) for `{}`: {err}", m.as_str()),
                ));
            }
        }
        if let Some(m) = e.expected_k.keys().find(|m| !e.measures.contains(m)) {
            return Err(bad(
                "experiment.expected_k",
                format!("`{}` is not a requested measure", m.as_str()),
            ));
        }
        Ok(model)
    }
}

//! Finite-grid evidence for the integral conditions behind the MES and MME limits.

use serde::{Deserialize, Serialize};

use crate::copulas::SurvivalCopulaFamily;
use crate::error::{invalid, Error, Result};
use crate::margins::Margin;
use crate::models::{BivariateModel, CopulaCoupledModel};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// `int_M^inf P(Z1 > x t, Z2 > t) / P(Z1 > t, Z2 > t) dx`.
    UpperTail,
    /// The upper-tail remainder plus `int_0^(1/M)` of the same ratio.
    BothTails,
    /// `int_M^inf C^(x^-alpha s, s^tau) / C^(s, s^tau) dx`.
    CopulaUpperTail,
    /// The copula upper-tail remainder plus `int_0^(1/M)` of the same ratio.
    CopulaBothTails,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Self::UpperTail,
        Self::BothTails,
        Self::CopulaUpperTail,
        Self::CopulaBothTails,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::UpperTail => "upper-tail",
            Self::BothTails => "both-tails",
            Self::CopulaUpperTail => "copula-upper-tail",
            Self::CopulaBothTails => "copula-both-tails",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    fn is_copula(self) -> bool {
        matches!(self, Self::CopulaUpperTail | Self::CopulaBothTails)
    }

    fn has_lower(self) -> bool {
        matches!(self, Self::BothTails | Self::CopulaBothTails)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum DiagnosticTarget<'a> {
    Model(&'a BivariateModel),
    /// Copula with Pareto margins of indices `alpha` and `tau alpha`.
    Family {
        family: &'a SurvivalCopulaFamily,
        alpha: f64,
        tau: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub m: f64,
    /// `t` for the model conditions, `s` for the copula ones.
    pub level: f64,
    pub lower: Option<f64>,
    pub upper: f64,
    pub remainder: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// At every level the remainder shrinks at least 2x per decade of `M`.
    Passing,
    /// Not passing, and some row grows more than 2x along the level grid or is infinite.
    DivergingInT,
    NotShrinking,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Passing => "passing",
            Self::DivergingInT => "diverging-in-t",
            Self::NotShrinking => "not-shrinking",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticTable {
    pub condition: Condition,
    /// `"t"` or `"s"`.
    pub level_name: &'static str,
    pub rows: Vec<DiagnosticRow>,
    pub verdict: Verdict,
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid(name, "grid is empty"));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid(name, "grid values must be finite and > 0"));
    }
    Ok(())
}

/// Split points `10^k / scale` inside `(0, end)`.
fn decade_breaks(scale: f64, end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut b = 1.0 / scale;
    while b < end && out.len() < 400 {
        out.push(b);
        b *= 10.0;
    }
    out
}

/// Default grids: `M` over three decades, `t` far enough out that the
/// additive models have left their pre-asymptotic bump, and `s` deep enough
/// that the Gaussian and Gumbel ratios have settled near their limits.
pub const DEFAULT_M_GRID: [f64; 3] = [10.0, 100.0, 1000.0];
pub const DEFAULT_T_GRID: [f64; 3] = [1e6, 1e8, 1e10];
pub const DEFAULT_S_GRID: [f64; 3] = [1e-4, 1e-20, 1e-60];

/// Integral remainders on the `(M, level)` grid with a verdict.
///
/// Levels are ordered toward the limit: `t` increasing, `s` decreasing.
pub fn condition_diagnostic(
    target: DiagnosticTarget<'_>,
    condition: Condition,
    m_grid: &[f64],
    level_grid: &[f64],
) -> Result<DiagnosticTable> {
    check_grid("m_grid", m_grid)?;
    check_grid("level_grid", level_grid)?;
    let mut ms = m_grid.to_vec();
    ms.sort_by(f64::total_cmp);
    let mut levels = level_grid.to_vec();
    if condition.is_copula() {
        if levels.iter().any(|s| *s >= 1.0) {
            return Err(invalid("level_grid", "copula levels s must lie in (0, 1)"));
        }
        levels.sort_by(|a, b| b.total_cmp(a));
    } else {
        levels.sort_by(f64::total_cmp);
    }

    let quad = Quadrature::with_rel_tol(1e-6);
    let mut rows = Vec::with_capacity(ms.len() * levels.len());
    for &m in &ms {
        for &level in &levels {
            let (lower, upper) = if condition.is_copula() {
                let (family, alpha, tau) = match target {
                    DiagnosticTarget::Family { family, alpha, tau } => (family.clone(), alpha, tau),
                    DiagnosticTarget::Model(BivariateModel::CopulaCoupled(c)) => {
                        (c.family.clone(), c.margin1.alpha(), c.tau())
                    }
                    DiagnosticTarget::Model(other) => {
                        return Err(Error::Unsupported(format!(
                            "copula conditions need a copula-coupled model, got {}",
                            other.kind_name()
                        )))
                    }
                };
                copula_integrals(&quad, &family, alpha, tau, level, m, condition.has_lower())?
            } else {
                let owned;
                let model = match target {
                    DiagnosticTarget::Model(model) => model,
                    DiagnosticTarget::Family { family, alpha, tau } => {
                        owned = BivariateModel::CopulaCoupled(CopulaCoupledModel::new(
                            family.clone(),
                            Margin::pareto(alpha)?,
                            Margin::pareto(tau * alpha)?,
                        )?);
                        &owned
                    }
                };
                model_integrals(model, level, m, condition.has_lower())?
            };
            let remainder = upper + lower.unwrap_or(0.0);
            rows.push(DiagnosticRow {
                m,
                level,
                lower,
                upper,
                remainder,
            });
        }
    }
    let verdict = verdict(&rows, &ms, levels.len());
    Ok(DiagnosticTable {
        condition,
        level_name: if condition.is_copula() { "s" } else { "t" },
        rows,
        verdict,
    })
}

fn verdict(rows: &[DiagnosticRow], ms: &[f64], n_levels: usize) -> Verdict {
    let finite = rows.iter().all(|r| r.remainder.is_finite());
    let by_m: Vec<&[DiagnosticRow]> = rows.chunks(n_levels).collect();
    let shrinking = finite
        && (0..n_levels).all(|j| {
            ms.windows(2).zip(by_m.windows(2)).all(|(m, pair)| {
                let decades = (m[1] / m[0]).log10();
                pair[1][j].remainder <= pair[0][j].remainder * 0.5f64.powf(decades)
            })
        });
    if shrinking {
        return Verdict::Passing;
    }
    let growing = by_m
        .iter()
        .any(|row| row[n_levels - 1].remainder > 2.0 * row[0].remainder);
    if !finite || growing {
        Verdict::DivergingInT
    } else {
        Verdict::NotShrinking
    }
}

fn model_integrals(model: &BivariateModel, t: f64, m: f64, lower: bool) -> Result<(Option<f64>, f64)> {
    let den = model.joint_survival(t, t)?;
    if !(den > 0.0) {
        return Err(Error::Underflow(format!(
            "P(Z1 > t, Z2 > t) vanishes at t = {t}; use a smaller t"
        )));
    }
    // int_A^B P(Z1 > x t, Z2 > t) dx = (1/t) int_{At}^{Bt} P(Z1 > a, Z2 > t) da
    let scaled =
        |lo: f64, hi: f64| -> Result<f64> { Ok(model.integrated_joint_survival(lo * t, hi * t, t)? / (t * den)) };
    let upper = scaled(m, f64::INFINITY)?;
    let low = if lower { Some(scaled(0.0, 1.0 / m)?) } else { None };
    Ok((low, upper))
}

fn copula_integrals(
    quad: &Quadrature,
    family: &SurvivalCopulaFamily,
    alpha: f64,
    tau: f64,
    s: f64,
    m: f64,
    lower: bool,
) -> Result<(Option<f64>, f64)> {
    family.validate()?;
    let st = s.powf(tau);
    let den = family.survival_unchecked(s, st);
    if !(den > 0.0) {
        return Err(Error::Underflow(format!(
            "C^(s, s^tau) vanishes at s = {s}; use a larger s"
        )));
    }
    let ratio = |x: f64| family.survival_unchecked((x.powf(-alpha) * s).min(1.0), st) / den;
    let upper = quad.integrate_to_infinity_with_breaks(ratio, m, &[10.0 * m])?.value;
    let low = if lower {
        let plateau = s.powf(1.0 / alpha);
        Some(
            quad.integrate_with_breaks(ratio, 0.0, 1.0 / m, &decade_breaks(1.0 / plateau, 1.0 / m))?
                .value,
        )
    } else {
        None
    };
    Ok((low, upper))
}

//! Hidden-regular-variation limit measures, scaling functions and the
//! asymptotic constants of MES and MME.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::copulas::SurvivalCopulaFamily;
use crate::error::{invalid, Error, Result};
use crate::models::{BivariateModel, Transform};
use crate::quadrature::Quadrature;

pub mod diagnostics;

pub use diagnostics::{
    condition_diagnostic, Condition, DiagnosticRow, DiagnosticTable, DiagnosticTarget, Verdict, DEFAULT_M_GRID,
    DEFAULT_S_GRID, DEFAULT_T_GRID,
};

type Evaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Upper-quadrant evaluator `(x, y) -> nu0((x, inf) x (y, inf))`, homogeneous of
/// order `-alpha0`, computed under `b0(t) = b0_prefactor * t^(1/alpha0)`.
#[derive(Clone)]
pub struct LimitMeasure {
    alpha0: f64,
    b0_prefactor: f64,
    /// Points where `x -> eval(x, 1)` is not smooth.
    kinks: Vec<f64>,
    description: String,
    eval: Evaluator,
}

impl fmt::Debug for LimitMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LimitMeasure")
            .field("alpha0", &self.alpha0)
            .field("b0_prefactor", &self.b0_prefactor)
            .field("description", &self.description)
            .finish()
    }
}

impl LimitMeasure {
    /// Wrap an evaluator under the canonical normalization `b0(t) = t^(1/alpha0)`.
    pub fn new(
        alpha0: f64,
        description: impl Into<String>,
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(invalid("alpha0", format!("must be finite and > 0, got {alpha0}")));
        }
        Ok(Self {
            alpha0,
            b0_prefactor: 1.0,
            kinks: vec![1.0],
            description: description.into(),
            eval: Arc::new(eval),
        })
    }

    fn with_kinks(mut self, kinks: impl IntoIterator<Item = f64>) -> Self {
        self.kinks
            .extend(kinks.into_iter().filter(|k| k.is_finite() && *k > 0.0));
        self.kinks.sort_by(f64::total_cmp);
        self.kinks.dedup();
        self
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn b0_prefactor(&self) -> f64 {
        self.b0_prefactor
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }

    pub fn b0(&self, t: f64) -> f64 {
        self.b0_prefactor * t.powf(1.0 / self.alpha0)
    }

    /// `b0^<-(x) = (x / prefactor)^alpha0`.
    pub fn b0_inverse(&self, x: f64) -> f64 {
        (x / self.b0_prefactor).powf(self.alpha0)
    }
}

/// `coef * sum_i prob_i * min(g1_i / x, g2_i / y)^alpha0`: the limit of `W (G1, G2)`
/// with `P(W > t) ~ coef t^-alpha0`.
fn multiplier_measure(
    coef: f64,
    alpha0: f64,
    atoms: Vec<(f64, f64, f64)>,
    description: String,
) -> Result<LimitMeasure> {
    let kinks: Vec<f64> = atoms.iter().map(|a| a.0 / a.1).collect();
    let m = LimitMeasure::new(alpha0, description, move |x, y| {
        coef * atoms
            .iter()
            .map(|&(g1, g2, p)| p * (g1 / x).min(g2 / y).powf(alpha0))
            .sum::<f64>()
    })?;
    Ok(m.with_kinks(kinks))
}

/// Analytic limit measure of the model.
pub fn nu0_analytic(model: &BivariateModel) -> Result<LimitMeasure> {
    match model {
        BivariateModel::Additive(m) => {
            let atoms = m.r_law().atoms().iter().map(|a| (a.r1, a.r2, a.prob)).collect();
            multiplier_measure(
                m.v.scale(),
                m.alpha0(),
                atoms,
                format!("additive: limit of V = W (R1, R2), {model}"),
            )
        }
        BivariateModel::Mixture(m) => {
            let atoms = m.r_law.atoms().iter().map(|a| (a.r1, a.r2, a.prob)).collect();
            multiplier_measure(
                1.0 - m.q,
                m.alpha0,
                atoms,
                format!("mixture: (1 - q) E min(R1/x, R2/y)^alpha0, {model}"),
            )
        }
        BivariateModel::CopulaCoupled(m) => {
            let asym = m.family.tail_asymptotics(m.tau())?;
            let (alpha, tau, eta) = (m.margin1.alpha(), m.tau(), m.eta());
            let coef = asym.scale * m.margin1.scale().powf(asym.kappa);
            let alpha0 = alpha * asym.kappa;
            LimitMeasure::new(
                alpha0,
                format!("copula: L c1^kappa T(x^-alpha, eta y^-(tau alpha)), {model}"),
                move |x, y| coef * asym.shape(x.powf(-alpha), eta * y.powf(-tau * alpha)),
            )
        }
    }
}

/// Scale of `V`, `alpha0`, and the mapped atoms `(g1, g2, prob)`.
type Pushforward = (f64, f64, Vec<(f64, f64, f64)>);

/// Image of `(r1, r2)` under a positively homogeneous coordinate map.
fn pushforward_atoms(model: &BivariateModel, transform: Transform) -> Result<Pushforward> {
    let BivariateModel::Additive(m) = model else {
        return Err(Error::Unsupported(format!(
            "transformed limit measures need an additive model, got {}",
            model.kind_name()
        )));
    };
    let atoms = m
        .r_law()
        .atoms()
        .iter()
        .map(|a| {
            let (g1, g2) = transform.apply(a.r1, a.r2);
            (g1, g2, a.prob)
        })
        .collect();
    Ok((m.v.scale(), m.alpha0(), atoms))
}

/// Limit measure of the transformed vector, as the push-forward of the
/// model's limit through the transform.
pub fn nu0_transformed(measure: &LimitMeasure, model: &BivariateModel, transform: Transform) -> Result<LimitMeasure> {
    if transform == Transform::Identity {
        return Ok(measure.clone());
    }
    let (coef, alpha0, atoms) = pushforward_atoms(model, transform)?;
    if (alpha0 - measure.alpha0).abs() > 1e-12 * alpha0 {
        return Err(Error::Domain(format!(
            "measure index {} does not belong to the model (alpha0 = {alpha0})",
            measure.alpha0
        )));
    }
    multiplier_measure(
        coef,
        alpha0,
        atoms,
        format!("{} pushed through {}", measure.description, transform.as_str()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// `int_1^inf nu0((x, inf) x (1, inf)) dx`.
    Mme,
    /// `int_0^inf nu0((x, inf) x (1, inf)) dx`.
    Mes,
}

impl LimitKind {
    fn lower(self) -> f64 {
        match self {
            Self::Mme => 1.0,
            Self::Mes => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticConstant {
    pub value: f64,
    pub kind: LimitKind,
    pub error_bound: f64,
}

/// Local power of `f` between `a` and `b`; `None` when `f` vanishes there.
fn log_slope(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Option<f64> {
    let (fa, fb) = (f(a), f(b));
    if fa > 0.0 && fb > 0.0 {
        Some((fb / fa).ln() / (b / a).ln())
    } else {
        None
    }
}

/// Asymptotic constant `K` by adaptive quadrature of `x -> eval(x, 1)`.
pub fn k_constant(measure: &LimitMeasure, kind: LimitKind) -> Result<AsymptoticConstant> {
    let f = |x: f64| measure.eval(x, 1.0);
    // A power tail x^-s integrates only for s > 1 at infinity and s < 1 at zero.
    if let Some(s) = log_slope(f, 1e10, 1e12) {
        if s >= -1.0 - 1e-9 {
            return Err(Error::Divergent(format!("nu0(x, 1) decays like x^{s:.4} at infinity")));
        }
    }
    if kind == LimitKind::Mes {
        if let Some(s) = log_slope(f, 1e-12, 1e-10) {
            if s <= -1.0 + 1e-9 {
                return Err(Error::Divergent(format!(
                    "nu0(x, 1) grows like x^{s:.4} at zero: the both-tail integral condition fails"
                )));
            }
        }
    }
    let quad = Quadrature::with_rel_tol(1e-10);
    let r = quad.integrate_to_infinity_with_breaks(f, kind.lower(), &measure.kinks)?;
    if !r.converged || !(r.value.is_finite()) || r.error > 1e-6 * r.value.abs() {
        return Err(Error::Degenerate(format!(
            "quadrature for K did not reach 1e-6 (value {}, error {})",
            r.value, r.error
        )));
    }
    if !(r.value > 0.0) {
        return Err(Error::Degenerate(format!("K = {} is not positive", r.value)));
    }
    Ok(AsymptoticConstant {
        value: r.value,
        kind,
        error_bound: r.error,
    })
}

/// `coef * t^-index`, one power term of a survival function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailTerm {
    pub coef: f64,
    pub index: f64,
}

fn additive_coordinate_terms(m: &crate::models::AdditiveModel, map: impl Fn(f64, f64) -> f64) -> (Vec<TailTerm>, f64) {
    let law = m.r_law();
    let v = TailTerm {
        coef: m.v.scale() * law.expect(|r1, r2| map(r1, r2).powf(m.alpha0())),
        index: m.alpha0(),
    };
    (vec![v], law.expect(map))
}

/// Leading power terms of the survival function of the transformed second coordinate.
pub fn z2_tail_terms(model: &BivariateModel, transform: Transform) -> Result<Vec<TailTerm>> {
    use Transform::*;
    match model {
        BivariateModel::Additive(m) => {
            let y1 = TailTerm {
                coef: m.y1.scale(),
                index: m.alpha(),
            };
            let y2 = m.y2.map(|y| TailTerm {
                coef: y.scale(),
                index: y.alpha(),
            });
            let (mut terms, _) = match transform {
                Identity | SumWithSecond | MaxFirst => additive_coordinate_terms(m, |_, r2| r2),
                SumWithFirst | Swap => additive_coordinate_terms(m, |r1, _| r1),
                FirstWithSum => additive_coordinate_terms(m, |r1, r2| r1 + r2),
                MinSecond => additive_coordinate_terms(m, f64::min),
                SecondWithMax | FirstWithMax => additive_coordinate_terms(m, f64::max),
            };
            match transform {
                Identity | SumWithSecond | MaxFirst => terms.extend(y2),
                SumWithFirst | Swap => terms.push(y1),
                FirstWithSum | SecondWithMax | FirstWithMax => {
                    terms.push(y1);
                    terms.extend(y2);
                }
                MinSecond => terms.extend(y2.map(|y| TailTerm {
                    coef: y1.coef * y.coef,
                    index: y1.index + y.index,
                })),
            }
            Ok(terms)
        }
        BivariateModel::Mixture(m) if transform == Identity => Ok(vec![
            TailTerm {
                coef: m.q,
                index: m.gamma,
            },
            TailTerm {
                coef: (1.0 - m.q) * m.r_law.expect(|_, r2| r2.powf(m.alpha0)),
                index: m.alpha0,
            },
        ]),
        BivariateModel::CopulaCoupled(m) if transform == Identity => Ok(vec![TailTerm {
            coef: m.margin2.scale(),
            index: m.margin2.alpha(),
        }]),
        _ => Err(Error::Unsupported(format!(
            "no analytic tail for the second coordinate of a {} model under {}",
            model.kind_name(),
            transform.as_str()
        ))),
    }
}

/// Heaviest term, merging terms that share its index.
pub fn dominant_term(terms: &[TailTerm]) -> Result<TailTerm> {
    let index = terms
        .iter()
        .filter(|t| t.coef > 0.0)
        .map(|t| t.index)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::Domain("no tail term with positive weight".into()))?;
    let coef = terms
        .iter()
        .filter(|t| (t.index - index).abs() <= 1e-12 * index)
        .map(|t| t.coef)
        .sum();
    Ok(TailTerm { coef, index })
}

/// Scaling function `a(1/p) = p b0^<-(VaR_{1-p}(Z2)) / VaR_{1-p}(Z2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingA {
    pub alpha0: f64,
    pub b0_prefactor: f64,
    /// Dominant tail of the second coordinate.
    pub z2_tail: TailTerm,
}

impl ScalingA {
    /// Needs only the hidden index, so it also covers copulas whose limit
    /// measure has no closed form.
    pub fn new(model: &BivariateModel, transform: Transform) -> Result<Self> {
        let z2_tail = dominant_term(&z2_tail_terms(model, transform)?)?;
        Ok(Self {
            alpha0: hidden_index(model)?,
            b0_prefactor: 1.0,
            z2_tail,
        })
    }

    pub fn from_measure(measure: &LimitMeasure, model: &BivariateModel, transform: Transform) -> Result<Self> {
        let z2_tail = dominant_term(&z2_tail_terms(model, transform)?)?;
        Ok(Self {
            alpha0: measure.alpha0,
            b0_prefactor: measure.b0_prefactor,
            z2_tail,
        })
    }

    /// Index of regular variation of `t -> a(t)`.
    pub fn rv_index(&self) -> f64 {
        let a = self.z2_tail.index;
        (self.alpha0 - a - 1.0) / a
    }

    /// `VaR_{1-p}(Z2)` from the dominant tail term.
    pub fn var(&self, p: f64) -> f64 {
        (self.z2_tail.coef / p).powf(1.0 / self.z2_tail.index)
    }

    pub fn eval(&self, p: f64) -> Result<f64> {
        self.eval_with_var(p, self.var(p))
    }

    /// `a(1/p)` with a caller-supplied VaR.
    pub fn eval_with_var(&self, p: f64, var: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("p", format!("{p} is outside (0, 1)")));
        }
        if !(var > 0.0 && var.is_finite()) {
            return Err(Error::Domain(format!("VaR must be finite and > 0, got {var}")));
        }
        Ok(p * (var / self.b0_prefactor).powf(self.alpha0) / var)
    }
}

/// Index `alpha0` of the hidden regular variation.
pub fn hidden_index(model: &BivariateModel) -> Result<f64> {
    match model {
        BivariateModel::Additive(m) => Ok(m.alpha0()),
        BivariateModel::Mixture(m) => Ok(m.alpha0),
        BivariateModel::CopulaCoupled(m) => {
            let kappa = match m.family.tail_asymptotics(m.tau()) {
                Ok(asym) => asym.kappa,
                Err(_) => m.family.tail_order_pair(m.tau())?.kappa,
            };
            Ok(kappa * m.margin1.alpha())
        }
    }
}

/// `a(1/p)` for the model itself.
pub fn scaling_a(model: &BivariateModel, p: f64) -> Result<f64> {
    ScalingA::new(model, Transform::Identity)?.eval(p)
}

/// Tail order function recovered from a limit measure:
/// `T(x, y) = C nu0((x^(-1/alpha), inf) x (eta^(1/(tau alpha)) y^(-1/(tau alpha)), inf))`.
#[derive(Debug, Clone)]
pub struct TailOrderFromMeasure {
    pub measure: LimitMeasure,
    pub alpha: f64,
    pub tau: f64,
    pub eta: f64,
    /// `1 / nu0((1, inf) x (eta^(1/(tau alpha)), inf))`.
    pub c: f64,
}

impl TailOrderFromMeasure {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let ta = self.tau * self.alpha;
        self.c
            * self
                .measure
                .eval(x.powf(-1.0 / self.alpha), self.eta.powf(1.0 / ta) * y.powf(-1.0 / ta))
    }
}

fn check_conversion(alpha: f64, tau: f64, eta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must be finite and > 0, got {alpha}")));
    }
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("must be finite and >= 1, got {tau}")));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid("eta", format!("must be finite and > 0, got {eta}")));
    }
    Ok(())
}

pub fn tail_order_from_nu0(measure: &LimitMeasure, alpha: f64, tau: f64, eta: f64) -> Result<TailOrderFromMeasure> {
    check_conversion(alpha, tau, eta)?;
    if tau > measure.alpha0 / alpha + 1e-12 {
        return Err(invalid(
            "tau",
            format!("{tau} exceeds alpha0 / alpha = {}", measure.alpha0 / alpha),
        ));
    }
    let norm = measure.eval(1.0, eta.powf(1.0 / (tau * alpha)));
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Degenerate(format!("nu0 at the normalization point is {norm}")));
    }
    Ok(TailOrderFromMeasure {
        measure: measure.clone(),
        alpha,
        tau,
        eta,
        c: 1.0 / norm,
    })
}

/// `nu0((x, inf) x (y, inf)) = T(x^-alpha, eta^(tau alpha) y^-(tau alpha))` with
/// `alpha0 = alpha kappa`, where `kappa` is read off `T(2, 2^tau) = 2^kappa T(1, 1)`.
/// The copula-coupled branch of `nu0_analytic` uses `eta y^-(tau alpha)` instead,
/// which is what the joint survival of that model gives; the two agree at `eta = 1`.
pub fn nu0_from_tail_function(
    t: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    alpha: f64,
    tau: f64,
    eta: f64,
    description: impl Into<String>,
) -> Result<LimitMeasure> {
    check_conversion(alpha, tau, eta)?;
    let (t11, t22) = (t(1.0, 1.0), t(2.0, 2f64.powf(tau)));
    if !(t11 > 0.0 && t22 > 0.0 && t11.is_finite() && t22.is_finite()) {
        return Err(Error::Degenerate(format!(
            "tail order function is degenerate: T(1, 1) = {t11}"
        )));
    }
    let kappa = (t22 / t11).log2();
    let ta = tau * alpha;
    let scale = eta.powf(ta);
    LimitMeasure::new(alpha * kappa, description, move |x, y| {
        t(x.powf(-alpha), scale * y.powf(-ta))
    })
}

/// Limit measure from a family's tabulated tail order function.
pub fn nu0_from_tail_order(family: &SurvivalCopulaFamily, alpha: f64, tau: f64, eta: f64) -> Result<LimitMeasure> {
    family.validate()?;
    family.tail_order_pair(tau)?;
    if matches!(family, SurvivalCopulaFamily::Archimedean(_)) {
        return Err(Error::Unsupported(format!(
            "{} has no tabulated tail order function",
            family.name()
        )));
    }
    let fam = family.clone();
    nu0_from_tail_function(
        move |x, y| fam.tail_order_function(x, y, tau).unwrap_or(f64::NAN),
        alpha,
        tau,
        eta,
        format!("{} tail order function", family.name()),
    )
}

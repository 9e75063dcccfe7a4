//! Generative bivariate models, their assumption checks, and risk-vector transforms.

use std::fmt;

use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use crate::copulas::{EllKind, SurvivalCopulaFamily};
use crate::error::{invalid, Error, Result};
use crate::margins::Margin;
use crate::quadrature::Quadrature;
use crate::rng::{par_generate, Stream};

/// Law of the multiplier pair `(R1, R2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RLaw {
    Deterministic {
        r1: f64,
        r2: f64,
    },
    /// Finitely many atoms `(r1, r2)` with probabilities summing to one.
    Discrete {
        atoms: Vec<RAtom>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RAtom {
    pub r1: f64,
    pub r2: f64,
    pub prob: f64,
}

impl RLaw {
    pub const UNIT: RLaw = RLaw::Deterministic { r1: 1.0, r2: 1.0 };

    pub fn validate(&self) -> Result<()> {
        let check = |r1: f64, r2: f64| {
            if r1.is_finite() && r2.is_finite() && r1 >= 1.0 && r2 >= 1.0 {
                Ok(())
            } else {
                Err(invalid(
                    "r_law",
                    format!("multipliers must be finite and >= 1, got ({r1}, {r2})"),
                ))
            }
        };
        match self {
            Self::Deterministic { r1, r2 } => check(*r1, *r2),
            Self::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(invalid("r_law", "discrete law needs at least one atom"));
                }
                for a in atoms {
                    check(a.r1, a.r2)?;
                    if !(a.prob > 0.0 && a.prob <= 1.0) {
                        return Err(invalid(
                            "r_law",
                            format!("atom probability {} is outside (0, 1]", a.prob),
                        ));
                    }
                }
                let total: f64 = atoms.iter().map(|a| a.prob).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid("r_law", format!("atom probabilities sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    /// `E[f(R1, R2)]`.
    pub fn expect(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        match self {
            Self::Deterministic { r1, r2 } => f(*r1, *r2),
            Self::Discrete { atoms } => atoms.iter().map(|a| a.prob * f(a.r1, a.r2)).sum(),
        }
    }

    /// Support points with their weights.
    pub fn atoms(&self) -> Vec<RAtom> {
        match self {
            Self::Deterministic { r1, r2 } => vec![RAtom {
                r1: *r1,
                r2: *r2,
                prob: 1.0,
            }],
            Self::Discrete { atoms } => atoms.clone(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self {
            Self::Deterministic { r1, r2 } => (*r1, *r2),
            Self::Discrete { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.prob;
                    if u < acc {
                        return (a.r1, a.r2);
                    }
                }
                let last = atoms[atoms.len() - 1];
                (last.r1, last.r2)
            }
        }
    }
}

/// Dependence of the tail-dependent summand `V = (R1 W, R2 W)`.
#[derive(Debug, Clone, PartialEq)]
pub enum VKind {
    /// `R1 = R2 = 1`.
    Comonotone,
    Multiplicative(RLaw),
}

impl VKind {
    pub fn r_law(&self) -> RLaw {
        match self {
            Self::Comonotone => RLaw::UNIT,
            Self::Multiplicative(law) => law.clone(),
        }
    }
}

/// `Z = Y + V` with independent heavy-tailed `Y` and tail-dependent, lighter `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveModel {
    pub y1: Margin,
    /// `None` means `Y2 = 0`.
    pub y2: Option<Margin>,
    pub v: Margin,
    pub v_kind: VKind,
}

impl AdditiveModel {
    pub fn new(y1: Margin, y2: Option<Margin>, v: Margin, v_kind: VKind) -> Result<Self> {
        if let VKind::Multiplicative(law) = &v_kind {
            law.validate()?;
        }
        Ok(Self { y1, y2, v, v_kind })
    }

    pub fn alpha(&self) -> f64 {
        self.y1.alpha()
    }

    /// Index of `Y2`, infinite when `Y2 = 0`.
    pub fn alpha_star(&self) -> f64 {
        self.y2.map_or(f64::INFINITY, |m| m.alpha())
    }

    pub fn alpha0(&self) -> f64 {
        self.v.alpha()
    }

    pub fn r_law(&self) -> RLaw {
        self.v_kind.r_law()
    }

    /// `P(Z1 > a, Z2 > b)` by conditioning on `W` and `R`; either level may be `-inf`.
    pub fn joint_survival(&self, a: f64, b: f64) -> Result<f64> {
        let quad = Quadrature::with_rel_tol(1e-10);
        let lw = self.v.lower_endpoint();
        let mut total = 0.0;
        for atom in self.r_law().atoms() {
            let (r1, r2) = (atom.r1, atom.r2);
            let s1 = |w: f64| self.y1.survival_unchecked(a - r1 * w);
            let s2 = |w: f64| match &self.y2 {
                Some(m) => m.survival_unchecked(b - r2 * w),
                None if r2 * w > b => 1.0,
                None => 0.0,
            };
            let l2 = self.y2.map_or(0.0, |m| m.lower_endpoint());
            let breaks = [
                (a - self.y1.lower_endpoint()) / r1,
                (b - l2) / r2,
                0.5 * a / r1,
                0.5 * b / r2,
            ];
            let r = quad.integrate_to_infinity_with_breaks(|w| self.v.density(w) * s1(w) * s2(w), lw, &breaks)?;
            total += atom.prob * r.value;
        }
        Ok(total)
    }

    /// `int_lo^hi P(Z1 > a, Z2 > b) da`, integrating `a` in closed form given `W` and `R`.
    pub fn integrated_joint_survival(&self, lo: f64, hi: f64, b: f64) -> Result<f64> {
        let quad = Quadrature::with_rel_tol(1e-10);
        let lw = self.v.lower_endpoint();
        let mut total = 0.0;
        for atom in self.r_law().atoms() {
            let (r1, r2) = (atom.r1, atom.r2);
            let s2 = |w: f64| match &self.y2 {
                Some(m) => m.survival_unchecked(b - r2 * w),
                None if r2 * w > b => 1.0,
                None => 0.0,
            };
            let l2 = self.y2.map_or(0.0, |m| m.lower_endpoint());
            let l1 = self.y1.lower_endpoint();
            let mut breaks = vec![(b - l2) / r2, 0.5 * b / r2, (lo - l1) / r1, 0.5 * lo / r1];
            if hi.is_finite() {
                breaks.extend([(hi - l1) / r1, 0.5 * hi / r1]);
            }
            let r = quad.integrate_to_infinity_with_breaks(
                |w| {
                    let shift = r1 * w;
                    self.v.density(w) * s2(w) * self.y1.survival_integral(lo - shift, hi - shift)
                },
                lw,
                &breaks,
            )?;
            total += atom.prob * r.value;
        }
        Ok(total)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let y1 = self.y1.draw(rng);
        let y2 = self.y2.map_or(0.0, |m| m.draw(rng));
        let w = self.v.draw(rng);
        let (r1, r2) = match &self.v_kind {
            VKind::Comonotone => (1.0, 1.0),
            VKind::Multiplicative(law) => law.draw(rng),
        };
        (y1 + r1 * w, y2 + r2 * w)
    }
}

/// `Z = B (X1, X3) + (1 - B) (R1 X2, R2 X2)` with standard Pareto `X1, X2, X3`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliMixtureModel {
    pub q: f64,
    pub alpha: f64,
    pub alpha0: f64,
    pub gamma: f64,
    pub r_law: RLaw,
}

impl BernoulliMixtureModel {
    pub fn new(q: f64, alpha: f64, alpha0: f64, gamma: f64, r_law: RLaw) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(invalid("q", format!("{q} is outside [0, 1]")));
        }
        for (name, a) in [("alpha", alpha), ("alpha0", alpha0), ("gamma", gamma)] {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid(name, format!("must be finite and > 0, got {a}")));
            }
        }
        r_law.validate()?;
        Ok(Self {
            q,
            alpha,
            alpha0,
            gamma,
            r_law,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let b: f64 = rng.sample(Open01);
        let pareto = |rng: &mut R, a: f64| rng.sample::<f64, _>(Open01).powf(-1.0 / a);
        if b < self.q {
            (pareto(rng, self.alpha), pareto(rng, self.gamma))
        } else {
            let (r1, r2) = self.r_law.draw(rng);
            let x2 = pareto(rng, self.alpha0);
            (r1 * x2, r2 * x2)
        }
    }

    /// `P(Z1 > a, Z2 > b)`.
    pub fn joint_survival(&self, a: f64, b: f64) -> f64 {
        let s = |t: f64, idx: f64| if t <= 1.0 { 1.0 } else { t.powf(-idx) };
        let mixed = self.r_law.expect(|r1, r2| s((a / r1).max(b / r2), self.alpha0));
        self.q * s(a, self.alpha) * s(b, self.gamma) + (1.0 - self.q) * mixed
    }
}

/// Pareto margins joined by a survival copula: `P(Z1 > x, Z2 > y) = C^(F1(x), F2(y))`.
#[derive(Debug, Clone)]
pub struct CopulaCoupledModel {
    pub family: SurvivalCopulaFamily,
    pub margin1: Margin,
    pub margin2: Margin,
    tau: f64,
    eta: f64,
}

impl CopulaCoupledModel {
    /// The balance `tau = alpha2 / alpha1` must be at least one; `eta = c2 / c1^tau`.
    pub fn new(family: SurvivalCopulaFamily, margin1: Margin, margin2: Margin) -> Result<Self> {
        family.validate()?;
        let tau = margin2.alpha() / margin1.alpha();
        let tau = if (tau - tau.round()).abs() < 1e-12 {
            tau.round()
        } else {
            tau
        };
        if tau < 1.0 {
            return Err(invalid(
                "margin2",
                format!(
                    "tail index {} is below the first margin's {}",
                    margin2.alpha(),
                    margin1.alpha()
                ),
            ));
        }
        let eta = margin2.scale() / margin1.scale().powf(tau);
        Ok(Self {
            family,
            margin1,
            margin2,
            tau,
            eta,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let (w1, w2) = self.family.draw(rng);
        (self.margin1.inverse_survival(w1), self.margin2.inverse_survival(w2))
    }

    pub fn joint_survival(&self, a: f64, b: f64) -> f64 {
        self.family
            .survival_unchecked(self.margin1.survival_unchecked(a), self.margin2.survival_unchecked(b))
    }
}

#[derive(Debug, Clone)]
pub enum BivariateModel {
    Additive(AdditiveModel),
    Mixture(BernoulliMixtureModel),
    CopulaCoupled(CopulaCoupledModel),
}

impl BivariateModel {
    /// Independent `Pareto(alpha1, c1) x Pareto(alpha2, c2)` pair, as a copula-coupled model.
    pub fn independent_pareto(m1: Margin, m2: Margin) -> Result<Self> {
        Ok(Self::CopulaCoupled(CopulaCoupledModel::new(
            SurvivalCopulaFamily::Independence,
            m1,
            m2,
        )?))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Additive(_) => "additive",
            Self::Mixture(_) => "mixture",
            Self::CopulaCoupled(_) => "copula",
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self {
            Self::Additive(m) => m.draw(rng),
            Self::Mixture(m) => m.draw(rng),
            Self::CopulaCoupled(m) => m.draw(rng),
        }
    }

    /// `int_lo^hi P(Z1 > a, Z2 > b) da`.
    pub fn integrated_joint_survival(&self, lo: f64, hi: f64, b: f64) -> Result<f64> {
        match self {
            Self::Additive(m) => m.integrated_joint_survival(lo, hi, b),
            _ => {
                let quad = Quadrature::with_rel_tol(1e-10);
                let f = |a: f64| self.joint_survival(a, b).unwrap_or(f64::NAN);
                let mut breaks = vec![1.0, b];
                if let Self::CopulaCoupled(m) = self {
                    breaks.push(m.margin1.lower_endpoint());
                }
                let r = if hi.is_finite() {
                    quad.integrate_with_breaks(f, lo, hi, &breaks)?
                } else {
                    quad.integrate_to_infinity_with_breaks(f, lo, &breaks)?
                };
                Ok(r.value)
            }
        }
    }

    /// `P(Z1 > a, Z2 > b)`; either level may be `-inf` for a marginal tail.
    pub fn joint_survival(&self, a: f64, b: f64) -> Result<f64> {
        match self {
            Self::Additive(m) => m.joint_survival(a, b),
            Self::Mixture(m) => Ok(m.joint_survival(a, b)),
            Self::CopulaCoupled(m) => Ok(m.joint_survival(a, b)),
        }
    }

    /// `VaR_{1-p}(Z2)` by bisection on the exact marginal tail.
    pub fn exact_var_second(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("p", format!("{p} is outside (0, 1)")));
        }
        let tail = |v: f64| self.joint_survival(f64::NEG_INFINITY, v);
        let mut hi = 2.0;
        while tail(hi)? > p {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Domain(format!("no finite VaR at p = {p}")));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if tail(mid)? > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// Exact `E[Z1 | Z2 > VaR_{1-p}(Z2)]` for the nonnegative pairs of the shipped models.
    pub fn exact_mes(&self, p: f64) -> Result<f64> {
        let v = self.exact_var_second(p)?;
        Ok(self.integrated_joint_survival(0.0, f64::INFINITY, v)? / p)
    }

    /// Exact `E[(Z1 - VaR_{1-p}(Z2))+ | Z2 > VaR_{1-p}(Z2)]`.
    pub fn exact_mme(&self, p: f64) -> Result<f64> {
        let v = self.exact_var_second(p)?;
        Ok(self.integrated_joint_survival(v, f64::INFINITY, v)? / p)
    }
}

impl fmt::Display for BivariateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let margin = |m: &Margin| format!("pareto(alpha={}, scale={})", m.alpha(), m.scale());
        match self {
            Self::Additive(m) => write!(
                f,
                "additive(y1={}, y2={}, v={}, v_kind={})",
                margin(&m.y1),
                m.y2.as_ref().map_or("none".to_string(), margin),
                margin(&m.v),
                match &m.v_kind {
                    VKind::Comonotone => "comonotone".to_string(),
                    VKind::Multiplicative(law) => format!("multiplicative({law:?})"),
                }
            ),
            Self::Mixture(m) => write!(
                f,
                "mixture(q={}, alpha={}, alpha0={}, gamma={}, r_law={:?})",
                m.q, m.alpha, m.alpha0, m.gamma, m.r_law
            ),
            Self::CopulaCoupled(m) => write!(
                f,
                "copula(family={}, margin1={}, margin2={})",
                m.family.name(),
                margin(&m.margin1),
                margin(&m.margin2)
            ),
        }
    }
}

/// Deterministic coordinate maps of the risk vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// `(Z1 + Z2, Z2)`.
    SumWithSecond,
    /// `(Z1 + Z2, Z1)`.
    SumWithFirst,
    /// `(Z1, Z1 + Z2)`.
    FirstWithSum,
    /// `(Z1, min(Z1, Z2))`.
    MinSecond,
    /// `(max(Z1, Z2), Z2)`.
    MaxFirst,
    /// `(Z2, max(Z1, Z2))`.
    SecondWithMax,
    /// `(Z1, max(Z1, Z2))`.
    FirstWithMax,
    /// `(Z2, Z1)`.
    Swap,
}

impl Transform {
    pub const ALL: [Transform; 9] = [
        Self::Identity,
        Self::SumWithSecond,
        Self::SumWithFirst,
        Self::FirstWithSum,
        Self::MinSecond,
        Self::MaxFirst,
        Self::SecondWithMax,
        Self::FirstWithMax,
        Self::Swap,
    ];

    pub fn apply(self, z1: f64, z2: f64) -> (f64, f64) {
        match self {
            Self::Identity => (z1, z2),
            Self::SumWithSecond => (z1 + z2, z2),
            Self::SumWithFirst => (z1 + z2, z1),
            Self::FirstWithSum => (z1, z1 + z2),
            Self::MinSecond => (z1, z1.min(z2)),
            Self::MaxFirst => (z1.max(z2), z2),
            Self::SecondWithMax => (z2, z1.max(z2)),
            Self::FirstWithMax => (z1, z1.max(z2)),
            Self::Swap => (z2, z1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::SumWithSecond => "sum_with_second",
            Self::SumWithFirst => "sum_with_first",
            Self::FirstWithSum => "first_with_sum",
            Self::MinSecond => "min_second",
            Self::MaxFirst => "max_first",
            Self::SecondWithMax => "second_with_max",
            Self::FirstWithMax => "first_with_max",
            Self::Swap => "swap",
        }
    }
}

/// Elementwise coordinate map.
pub fn apply_transform(pairs: &[(f64, f64)], transform: Transform) -> Vec<(f64, f64)> {
    pairs.iter().map(|&(a, b)| transform.apply(a, b)).collect()
}

/// Draw `n` pairs; chunk `c` uses substream `(seed, c)` so the output does not
/// depend on the number of threads.
pub fn sample_model(model: &BivariateModel, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(invalid("n", "sample size must be at least 1"));
    }
    if let BivariateModel::CopulaCoupled(m) = model {
        m.family.validate()?;
    }
    Ok(par_generate(n, seed, |rng: &mut Stream| model.draw(rng)))
}

/// Draw `n` pairs and map them through `transform`.
pub fn sample_transformed(
    model: &BivariateModel,
    transform: Transform,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(invalid("n", "sample size must be at least 1"));
    }
    if let BivariateModel::CopulaCoupled(m) = model {
        m.family.validate()?;
    }
    Ok(par_generate(n, seed, |rng: &mut Stream| {
        let (a, b) = model.draw(rng);
        transform.apply(a, b)
    }))
}

/// One named assumption and whether it holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

/// Downstream result and whether the model meets its premises.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Qualification {
    pub result: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
    pub qualifications: Vec<Qualification>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn violations(&self) -> Vec<&ConditionCheck> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }

    pub fn check(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn qualifies(&self, result: &str) -> bool {
        self.qualifications.iter().any(|q| q.result == result && q.holds)
    }

    pub fn require_ok(&self) -> Result<()> {
        if self.ok() {
            return Ok(());
        }
        let names: Vec<String> = self
            .violations()
            .iter()
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        Err(Error::InvalidModel(names.join("; ")))
    }

    fn push(&mut self, name: &'static str, holds: bool, detail: String) {
        self.checks.push(ConditionCheck { name, holds, detail });
    }

    fn qualify(&mut self, result: impl Into<String>, holds: bool, detail: String) {
        self.qualifications.push(Qualification {
            result: result.into(),
            holds,
            detail,
        });
    }
}

/// Names of the downstream results reported by [`validate_model`].
pub mod results {
    pub const HIDDEN_REGULAR_VARIATION: &str = "hidden regular variation";
    pub const MME_LIMIT: &str = "mme limit";
    pub const MES_LIMIT: &str = "mes limit";

    pub fn transform_limit(t: crate::models::Transform) -> String {
        format!("limits under {}", t.as_str())
    }
}

fn fmt_index(a: f64) -> String {
    if a.is_infinite() {
        "inf".into()
    } else {
        format!("{a}")
    }
}

/// Check every named assumption of the model and which results it qualifies for.
pub fn validate_model(model: &BivariateModel) -> ValidationReport {
    let mut r = ValidationReport {
        checks: Vec::new(),
        qualifications: Vec::new(),
    };
    match model {
        BivariateModel::Additive(m) => validate_additive(m, &mut r),
        BivariateModel::Mixture(m) => validate_mixture(m, &mut r),
        BivariateModel::CopulaCoupled(m) => validate_copula(m, &mut r),
    }
    r
}

fn validate_additive(m: &AdditiveModel, r: &mut ValidationReport) {
    let (a, a_star, a0) = (m.alpha(), m.alpha_star(), m.alpha0());
    r.push(
        "independent regularly varying Y",
        true,
        format!(
            "Y1, Y2 independent Pareto by construction (alpha = {a}, alpha* = {})",
            fmt_index(a_star)
        ),
    );
    r.push(
        "V lighter than Y",
        a0 > a,
        format!("alpha0 = {a0} must exceed alpha = {a}"),
    );
    r.push(
        "V tail dependent",
        true,
        "V = (R1 W, R2 W) shares W by construction".into(),
    );
    r.push("Y independent of V", true, "drawn independently by construction".into());
    r.push(
        "Y2 tail light enough",
        a_star > a0 - a,
        format!("alpha* = {} must exceed alpha0 - alpha = {}", fmt_index(a_star), a0 - a),
    );
    let base = r.ok();
    r.qualify(
        results::HIDDEN_REGULAR_VARIATION,
        base,
        format!("index alpha0 = {a0} with limit inherited from V"),
    );
    let integrable = a > 1.0;
    let risk = base && integrable && a0 < 1.0 + a_star;
    let risk_detail = format!(
        "needs E Z1 finite (alpha = {a} > 1) and alpha <= alpha0 < 1 + alpha* ({a0} < {})",
        fmt_index(1.0 + a_star)
    );
    r.qualify(results::MME_LIMIT, risk, risk_detail.clone());
    r.qualify(results::MES_LIMIT, risk, risk_detail);
    let y2_zero = m.y2.is_none();
    for t in Transform::ALL {
        let (holds, detail) = match t {
            Transform::Identity => (risk, "the model itself".to_string()),
            Transform::SumWithSecond | Transform::SumWithFirst | Transform::FirstWithSum => {
                let shares = matches!(t, Transform::SumWithFirst | Transform::FirstWithSum);
                if shares {
                    (
                        false,
                        "both coordinates carry Y1, so the pair is asymptotically dependent".to_string(),
                    )
                } else {
                    (risk && y2_zero, "needs Y2 = 0".to_string())
                }
            }
            Transform::MinSecond => (
                risk && a <= a_star,
                "needs alpha <= alpha* (Y1 not lighter than Y2)".to_string(),
            ),
            Transform::MaxFirst | Transform::SecondWithMax => (risk && y2_zero, "needs Y2 = 0".to_string()),
            Transform::FirstWithMax => (
                false,
                "both coordinates carry Y1, so the pair is asymptotically dependent".to_string(),
            ),
            Transform::Swap => (
                a_star > 1.0 && a_star < a0 && a > a0 - a_star && a0 < 1.0 + a,
                "roles of Y1 and Y2 exchanged: needs 1 < alpha* < alpha0 < 1 + alpha and alpha > alpha0 - alpha*"
                    .to_string(),
            ),
        };
        r.qualify(results::transform_limit(t), holds, detail);
    }
}

fn validate_mixture(m: &BernoulliMixtureModel, r: &mut ValidationReport) {
    r.push(
        "mixing probability inside (0, 1)",
        m.q > 0.0 && m.q < 1.0,
        format!("q = {}", m.q),
    );
    r.push(
        "index chain",
        1.0 < m.alpha && m.alpha < m.alpha0 && m.alpha0 < m.gamma,
        format!(
            "needs 1 < alpha < alpha0 < gamma, got {} < {} < {}",
            m.alpha, m.alpha0, m.gamma
        ),
    );
    r.push(
        "independent branch lighter jointly",
        m.alpha + m.gamma > m.alpha0,
        format!("needs alpha + gamma > alpha0, got {} > {}", m.alpha + m.gamma, m.alpha0),
    );
    r.push(
        "multiplier moment finite",
        true,
        "discrete multipliers have every moment".into(),
    );
    let ok = r.ok();
    r.qualify(
        results::HIDDEN_REGULAR_VARIATION,
        ok,
        format!("index alpha0 = {}", m.alpha0),
    );
    r.qualify(
        results::MME_LIMIT,
        ok,
        "both-tail integral condition holds for the mixture".into(),
    );
    r.qualify(
        results::MES_LIMIT,
        ok,
        "both-tail integral condition holds for the mixture".into(),
    );
    for t in Transform::ALL {
        let holds = ok && t == Transform::Identity;
        r.qualify(
            results::transform_limit(t),
            holds,
            if t == Transform::Identity {
                "the model itself".into()
            } else {
                "no transform result covers the mixture".into()
            },
        );
    }
}

fn validate_copula(m: &CopulaCoupledModel, r: &mut ValidationReport) {
    let a = m.margin1.alpha();
    r.push(
        "margin balance",
        m.tau >= 1.0,
        format!("tau = alpha2 / alpha1 = {}", m.tau),
    );
    let pair = m.family.tail_order_pair(m.tau);
    r.push(
        "tail order pair available",
        pair.is_ok(),
        match &pair {
            Ok(p) => format!("kappa = {}, tau = {}", p.kappa, p.tau),
            Err(e) => e.to_string(),
        },
    );
    let Ok(pair) = pair else { return };
    let indep_tail = pair.kappa > 1.0;
    r.push(
        "asymptotic tail independence",
        indep_tail,
        format!("kappa = {} > 1", pair.kappa),
    );
    let ell_const = matches!(pair.ell, EllKind::Constant(_)) && m.family.tail_asymptotics(m.tau).is_ok();
    r.qualify(
        results::HIDDEN_REGULAR_VARIATION,
        r.ok() && ell_const,
        format!(
            "index alpha kappa = {}; needs a constant slowly varying factor ({:?})",
            a * pair.kappa,
            pair.ell
        ),
    );
    r.qualify(
        results::MME_LIMIT,
        r.ok() && a > 1.0,
        format!("upper-tail integral condition holds for the shipped families; needs alpha = {a} > 1"),
    );
    r.qualify(
        results::MES_LIMIT,
        false,
        "the both-tail integral condition fails for copula families with these tail orders".into(),
    );
    for t in Transform::ALL {
        r.qualify(
            results::transform_limit(t),
            false,
            "transform limits are stated for additive models only".into(),
        );
    }
}

#[cfg(test)]
mod tests;

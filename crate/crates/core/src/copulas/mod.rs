//! Survival copula families: evaluation, sampling and upper tail orders.
//!
//! Every family is described by its survival copula `C^`, the joint CDF of
//! `(W1, W2) = (1 - F1(Z1), 1 - F2(Z2))`. Small arguments of `C^` therefore
//! correspond to the joint upper tail of `Z`.

mod archimedean;
pub mod normal;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};

use archimedean::{kendall_inverse, OrdinaryGenerator};
pub use archimedean::{ArchimedeanGenerator, GumbelGenerator};

use crate::error::{invalid, Error, Result};

/// Parametric survival copula family.
#[derive(Clone)]
pub enum SurvivalCopulaFamily {
    Independence,
    Gaussian {
        rho: f64,
    },
    MarshallOlkin {
        gamma1: f64,
        gamma2: f64,
    },
    Morgenstern {
        theta: f64,
    },
    /// Clayton copula for `(U, V)`; the survival copula follows by duality.
    Clayton {
        theta: f64,
    },
    /// Frank copula for `(U, V)`; the survival copula follows by duality.
    Frank {
        theta: f64,
    },
    /// Survival copula `phi_inv(phi(u) + phi(v))` for a user-supplied generator.
    Archimedean(Arc<dyn ArchimedeanGenerator>),
}

impl fmt::Debug for SurvivalCopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Independence => write!(f, "Independence"),
            Self::Gaussian { rho } => write!(f, "Gaussian {{ rho: {rho} }}"),
            Self::MarshallOlkin { gamma1, gamma2 } => {
                write!(f, "MarshallOlkin {{ gamma1: {gamma1}, gamma2: {gamma2} }}")
            }
            Self::Morgenstern { theta } => write!(f, "Morgenstern {{ theta: {theta} }}"),
            Self::Clayton { theta } => write!(f, "Clayton {{ theta: {theta} }}"),
            Self::Frank { theta } => write!(f, "Frank {{ theta: {theta} }}"),
            Self::Archimedean(g) => write!(f, "Archimedean({})", g.name()),
        }
    }
}

/// Coarse description of the slowly varying factor in `C^(s, s^tau) ~ s^kappa l(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllKind {
    Constant(f64),
    LogType,
    Unspecified,
}

/// Upper tail order pair `(kappa, tau)` with its slowly varying factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOrderPair {
    pub kappa: f64,
    pub tau: f64,
    pub ell: EllKind,
}

/// Exact first-order behaviour `C^(s x, s^tau y) ~ scale * s^kappa * shape(x, y)`
/// with `shape(1, 1) = 1`. Only available when the slowly varying factor is a
/// constant.
#[derive(Debug, Clone)]
pub struct TailAsymptotics {
    pub kappa: f64,
    pub scale: f64,
    pub tau: f64,
    family: SurvivalCopulaFamily,
}

impl TailAsymptotics {
    pub fn shape(&self, x: f64, y: f64) -> f64 {
        self.family.tail_order_limit(x, y, self.tau)
    }
}

fn check_unit(name: &'static str, u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(invalid(name, format!("{u} is outside [0, 1]")))
    }
}

impl SurvivalCopulaFamily {
    pub fn gaussian(rho: f64) -> Result<Self> {
        let f = Self::Gaussian { rho };
        f.validate()?;
        Ok(f)
    }

    pub fn marshall_olkin(gamma1: f64, gamma2: f64) -> Result<Self> {
        let f = Self::MarshallOlkin { gamma1, gamma2 };
        f.validate()?;
        Ok(f)
    }

    pub fn morgenstern(theta: f64) -> Result<Self> {
        let f = Self::Morgenstern { theta };
        f.validate()?;
        Ok(f)
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        let f = Self::Clayton { theta };
        f.validate()?;
        Ok(f)
    }

    pub fn frank(theta: f64) -> Result<Self> {
        let f = Self::Frank { theta };
        f.validate()?;
        Ok(f)
    }

    pub fn archimedean(generator: impl ArchimedeanGenerator + 'static) -> Result<Self> {
        let f = Self::Archimedean(Arc::new(generator));
        f.validate()?;
        Ok(f)
    }

    pub fn name(&self) -> String {
        match self {
            Self::Independence => "independence".into(),
            Self::Gaussian { rho } => format!("gaussian(rho={rho})"),
            Self::MarshallOlkin { gamma1, gamma2 } => {
                format!("marshall_olkin(gamma1={gamma1}, gamma2={gamma2})")
            }
            Self::Morgenstern { theta } => format!("morgenstern(theta={theta})"),
            Self::Clayton { theta } => format!("clayton(theta={theta})"),
            Self::Frank { theta } => format!("frank(theta={theta})"),
            Self::Archimedean(g) => format!("archimedean({})", g.name()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Independence => Ok(()),
            Self::Gaussian { rho } if !(rho > -1.0 && rho < 1.0) => {
                Err(invalid("rho", format!("{rho} is outside (-1, 1)")))
            }
            Self::MarshallOlkin { gamma1, gamma2 } => {
                for (name, g) in [("gamma1", gamma1), ("gamma2", gamma2)] {
                    if !(g > 0.0 && g < 1.0) {
                        return Err(invalid(name, format!("{g} is outside (0, 1)")));
                    }
                }
                Ok(())
            }
            Self::Morgenstern { theta } if !(-1.0..=1.0).contains(&theta) => {
                Err(invalid("theta", format!("{theta} is outside [-1, 1]")))
            }
            Self::Clayton { theta } if !(theta > 0.0 && theta.is_finite()) => {
                Err(invalid("theta", format!("clayton needs theta > 0, got {theta}")))
            }
            Self::Frank { theta } if !(theta != 0.0 && theta.is_finite()) => {
                Err(invalid("theta", format!("frank needs theta != 0, got {theta}")))
            }
            Self::Archimedean(ref g) => {
                let rho = g.rv_index();
                if !(rho <= 1.0) {
                    return Err(invalid("rv_index", format!("{rho} exceeds 1")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn ordinary_generator(&self) -> Option<OrdinaryGenerator> {
        match *self {
            Self::Clayton { theta } => Some(OrdinaryGenerator::Clayton(theta)),
            Self::Frank { theta } => Some(OrdinaryGenerator::Frank(theta)),
            _ => None,
        }
    }

    /// Survival copula `C^(u, v)`.
    pub fn survival(&self, u: f64, v: f64) -> Result<f64> {
        self.validate()?;
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.survival_unchecked(u, v))
    }

    /// `C^(u, v)` without argument or parameter checks.
    pub fn survival_unchecked(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        match self {
            Self::Independence => u * v,
            Self::Gaussian { rho } => normal::bivariate_cdf(normal::quantile(u), normal::quantile(v), *rho),
            Self::MarshallOlkin { gamma1, gamma2 } => (u.powf(1.0 - gamma1) * v).min(u * v.powf(1.0 - gamma2)),
            // 1 + theta (1 - u)(1 - v) without cancelling at theta = -1
            Self::Morgenstern { theta } => u * v * ((1.0 + theta) - theta * (u + v - u * v)),
            Self::Clayton { .. } | Self::Frank { .. } => self.ordinary_generator().unwrap().survival(u, v),
            Self::Archimedean(g) => g.phi_inv(g.phi(u) + g.phi(v)),
        }
    }

    /// Ordinary copula `C(u, v) = u + v - 1 + C^(1 - u, 1 - v)`.
    pub fn copula(&self, u: f64, v: f64) -> Result<f64> {
        self.validate()?;
        check_unit("u", u)?;
        check_unit("v", v)?;
        if u <= 0.0 || v <= 0.0 {
            return Ok(0.0);
        }
        if u >= 1.0 || v >= 1.0 {
            return Ok(u.min(v));
        }
        Ok(match self.ordinary_generator() {
            Some(g) => g.copula(u, v).clamp(0.0, u.min(v)),
            None => match self {
                Self::Gaussian { rho } => normal::bivariate_cdf(normal::quantile(u), normal::quantile(v), *rho),
                _ => (u + v - 1.0 + self.survival_unchecked(1.0 - u, 1.0 - v)).clamp(0.0, u.min(v)),
            },
        })
    }

    fn require_unit_tau(&self, tau: f64) -> Result<()> {
        if tau != 1.0 {
            return Err(Error::Unsupported(format!(
                "{} supports tau = 1 only, got {tau}",
                self.name()
            )));
        }
        Ok(())
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        self.validate()?;
        if !(tau >= 1.0 && tau.is_finite()) {
            return Err(invalid("tau", format!("{tau} is below 1")));
        }
        match self {
            Self::Independence | Self::MarshallOlkin { .. } | Self::Morgenstern { .. } => Ok(()),
            _ => self.require_unit_tau(tau),
        }
    }

    /// Upper tail order pair for the balance `tau`, as tabulated for each family.
    pub fn tail_order_pair(&self, tau: f64) -> Result<TailOrderPair> {
        self.check_tau(tau)?;
        let pair = |kappa, ell| TailOrderPair { kappa, tau, ell };
        Ok(match self {
            Self::Independence => pair(1.0 + tau, EllKind::Constant(1.0)),
            Self::Gaussian { rho } => {
                let ell = if *rho == 0.0 {
                    EllKind::Constant(1.0)
                } else {
                    EllKind::LogType
                };
                pair(2.0 / (1.0 + rho), ell)
            }
            Self::MarshallOlkin { gamma1, gamma2 } => pair(
                (tau + 1.0 - gamma1).max(tau + 1.0 - tau * gamma2),
                EllKind::Constant(1.0),
            ),
            Self::Morgenstern { theta } if *theta > -1.0 => pair(tau + 1.0, EllKind::Constant(1.0 + theta)),
            Self::Morgenstern { .. } if tau == 1.0 => pair(3.0, EllKind::Constant(1.0)),
            // Tabulated boundary value; the exact decay of C^(s, s^tau) is s^(2 + tau).
            Self::Morgenstern { .. } => pair(1.0 + 2.0 * tau, EllKind::Constant(1.0)),
            Self::Clayton { .. } | Self::Frank { .. } => pair(
                2.0,
                EllKind::Constant(self.ordinary_generator().unwrap().quadratic_constant()),
            ),
            Self::Archimedean(g) => pair(2f64.powf(1.0 - g.rv_index()), EllKind::Unspecified),
        })
    }

    /// Upper tail order function `T(x, y)` in its tabulated closed form.
    ///
    /// For Morgenstern with `tau > 1` the tabulated forms differ from the
    /// numeric limit of `C^(s x, s^tau y) / C^(s, s^tau)`; see
    /// [`Self::tail_order_limit`] for the latter.
    pub fn tail_order_function(&self, x: f64, y: f64, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        if !(x > 0.0 && y > 0.0) {
            return Err(Error::Domain(format!("T needs x, y > 0, got ({x}, {y})")));
        }
        Ok(match self {
            Self::Morgenstern { theta } if *theta > -1.0 => x * y.powf(tau),
            Self::Morgenstern { .. } if tau == 1.0 => x * y * (x + y),
            Self::Morgenstern { .. } => x * y * y,
            _ => self.tail_order_limit(x, y, tau),
        })
    }

    /// `lim C^(s x, s^tau y) / C^(s, s^tau)` as `s -> 0`.
    pub fn tail_order_limit(&self, x: f64, y: f64, tau: f64) -> f64 {
        match self {
            Self::Independence | Self::Clayton { .. } | Self::Frank { .. } => x * y,
            Self::Gaussian { rho } => (x * y).powf(1.0 / (1.0 + rho)),
            Self::MarshallOlkin { gamma1, gamma2 } => {
                let first = x.powf(1.0 - gamma1) * y;
                let second = x * y.powf(1.0 - gamma2);
                let gap = gamma1 - tau * gamma2;
                if gap.abs() <= 1e-12 {
                    first.min(second)
                } else if gap < 0.0 {
                    first
                } else {
                    second
                }
            }
            Self::Morgenstern { theta } if *theta > -1.0 => x * y,
            Self::Morgenstern { .. } if tau == 1.0 => 0.5 * x * y * (x + y),
            Self::Morgenstern { .. } => x * x * y,
            Self::Archimedean(g) => (x * y).powf(2f64.powf(-g.rv_index())),
        }
    }

    /// Exact first-order tail behaviour, when the slowly varying factor is constant.
    pub fn tail_asymptotics(&self, tau: f64) -> Result<TailAsymptotics> {
        let pair = self.tail_order_pair(tau)?;
        let (kappa, scale) = match (self, pair.ell) {
            (Self::Morgenstern { theta }, _) if *theta == -1.0 && tau == 1.0 => (3.0, 2.0),
            (Self::Morgenstern { theta }, _) if *theta == -1.0 => (2.0 + tau, 1.0),
            (_, EllKind::Constant(c)) => (pair.kappa, c),
            (_, kind) => {
                return Err(Error::Unsupported(format!(
                    "{} has a non-constant slowly varying factor ({kind:?})",
                    self.name()
                )))
            }
        };
        Ok(TailAsymptotics {
            kappa,
            scale,
            tau,
            family: self.clone(),
        })
    }

    /// Ratios `C^(s x, s^tau y) / C^(s, s^tau)` along `s_grid`.
    pub fn estimate_tail_order_numeric(&self, x: f64, y: f64, tau: f64, s_grid: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if !(x > 0.0 && y > 0.0 && tau >= 1.0) {
            return Err(Error::Domain(format!(
                "need x, y > 0 and tau >= 1, got ({x}, {y}, {tau})"
            )));
        }
        s_grid
            .iter()
            .map(|&s| {
                let (a, b) = (s * x, s.powf(tau) * y);
                if !(s > 0.0 && s * x.max(1.0) < 1.0 && s.powf(tau) * y.max(1.0) < 1.0) {
                    return Err(Error::Domain(format!("s = {s} leaves the unit square")));
                }
                let den = self.survival_unchecked(s, s.powf(tau));
                if !(den > 0.0) {
                    return Err(Error::Underflow(format!("C^(s, s^tau) vanishes at s = {s}")));
                }
                Ok(self.survival_unchecked(a, b) / den)
            })
            .collect()
    }

    /// Least-squares slope of `log C^(s, s^tau)` against `log s`.
    pub fn estimate_kappa_slope(&self, tau: f64, s_grid: &[f64]) -> Result<f64> {
        self.validate()?;
        if s_grid.len() < 2 {
            return Err(Error::InsufficientSample(
                "kappa slope needs at least two grid points".into(),
            ));
        }
        let mut points = Vec::with_capacity(s_grid.len());
        for &s in s_grid {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::Domain(format!("s = {s} is outside (0, 1)")));
            }
            let c = self.survival_unchecked(s, s.powf(tau));
            if !(c > 0.0) {
                return Err(Error::Underflow(format!("C^(s, s^tau) vanishes at s = {s}")));
            }
            points.push((s.ln(), c.ln()));
        }
        least_squares_slope(&points)
    }

    /// One draw `(W1, W2)` whose joint CDF is `C^`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self {
            Self::Independence => (rng.sample(Open01), rng.sample(Open01)),
            Self::Gaussian { rho } => {
                let x: f64 = rng.sample(StandardNormal);
                let z: f64 = rng.sample(StandardNormal);
                let y = rho * x + (1.0 - rho * rho).sqrt() * z;
                (normal::cdf(x), normal::cdf(y))
            }
            Self::MarshallOlkin { gamma1, gamma2 } => {
                // Shocks with rates (1 - g1)/g1, (1 - g2)/g2 and a common unit rate.
                let e12: f64 = rng.sample(Exp1);
                let e1: f64 = rng.sample::<f64, _>(Exp1) * gamma1 / (1.0 - gamma1);
                let e2: f64 = rng.sample::<f64, _>(Exp1) * gamma2 / (1.0 - gamma2);
                ((-e1.min(e12) / gamma1).exp(), (-e2.min(e12) / gamma2).exp())
            }
            Self::Morgenstern { theta } => {
                let u: f64 = rng.sample(Open01);
                let t: f64 = rng.sample(Open01);
                let a = theta * (1.0 - 2.0 * u);
                let disc = ((1.0 + a) * (1.0 + a) - 4.0 * a * t).max(0.0);
                (u, 2.0 * t / ((1.0 + a) + disc.sqrt()))
            }
            Self::Clayton { .. } | Self::Frank { .. } => {
                let w1: f64 = rng.sample(Open01);
                let e: f64 = rng.sample(Open01);
                self.ordinary_generator().unwrap().survival_pair_from_uniforms(w1, e)
            }
            Self::Archimedean(g) => {
                let t: f64 = rng.sample(Open01);
                let s: f64 = rng.sample(Open01);
                let w = kendall_inverse(g.as_ref(), t);
                let level = g.phi(w);
                (g.phi_inv(s * level), g.phi_inv((1.0 - s) * level))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        if n == 0 {
            return Err(invalid("n", "sample size must be at least 1"));
        }
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> Result<f64> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("regression abscissae are all equal".into()));
    }
    Ok(sxy / sxx)
}

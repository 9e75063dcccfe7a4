//! Archimedean generators.
//!
//! Clayton and Frank are shipped as ordinary copulas `C = g(phi(u) + phi(v))`
//! with `g` the generator inverse; their survival copula is obtained by
//! duality and evaluated through a cancellation-free integral. A
//! user-supplied generator instead defines the survival copula directly.

use std::fmt::Debug;

use crate::quadrature::Quadrature;

/// A strict Archimedean generator used to define a survival copula
/// `C^(u,v) = phi_inv(phi(u) + phi(v))`.
pub trait ArchimedeanGenerator: Debug + Send + Sync {
    fn name(&self) -> String;
    fn phi(&self, t: f64) -> f64;
    fn phi_inv(&self, x: f64) -> f64;
    fn phi_derivative(&self, t: f64) -> f64;
    /// Regular-variation index of `-1 / (log phi_inv)'` at infinity.
    fn rv_index(&self) -> f64;
}

/// Gumbel generator `phi(t) = (-ln t)^theta`, `theta >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelGenerator {
    pub theta: f64,
}

impl ArchimedeanGenerator for GumbelGenerator {
    fn name(&self) -> String {
        format!("gumbel(theta={})", self.theta)
    }

    fn phi(&self, t: f64) -> f64 {
        (-t.ln()).powf(self.theta)
    }

    fn phi_inv(&self, x: f64) -> f64 {
        (-x.powf(1.0 / self.theta)).exp()
    }

    fn phi_derivative(&self, t: f64) -> f64 {
        -self.theta * (-t.ln()).powf(self.theta - 1.0) / t
    }

    fn rv_index(&self) -> f64 {
        1.0 - 1.0 / self.theta
    }
}

/// Generators of the shipped ordinary Archimedean copulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum OrdinaryGenerator {
    Clayton(f64),
    Frank(f64),
}

impl OrdinaryGenerator {
    /// Ordinary copula value `C(u, v)`.
    pub(crate) fn copula(self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u.min(v) > 0.5 {
            // The closed forms lose digits near (1, 1); go through the survival side.
            return u + v - 1.0 + self.survival(1.0 - u, 1.0 - v);
        }
        self.copula_closed_form(u, v)
    }

    fn copula_closed_form(self, u: f64, v: f64) -> f64 {
        match self {
            Self::Clayton(th) => (u.powf(-th) + v.powf(-th) - 1.0).powf(-1.0 / th),
            Self::Frank(th) => {
                let num = (-th * u).exp_m1() * (-th * v).exp_m1();
                -(num / (-th).exp_m1()).ln_1p() / th
            }
        }
    }

    /// `phi(1 - a)` without forming `1 - a`.
    fn phi_of_complement(self, a: f64) -> f64 {
        match self {
            Self::Clayton(th) => (-th * (-a).ln_1p()).exp_m1() / th,
            Self::Frank(th) => -((-th).exp() * (th * a).exp_m1() / (-th).exp_m1()).ln_1p(),
        }
    }

    /// `g'(x + t) - g'(t) >= 0`, with `g = phi^{-1}`.
    fn derivative_gap(self, x: f64, t: f64) -> f64 {
        match self {
            Self::Clayton(th) => {
                let kappa = 1.0 + 1.0 / th;
                let base = (1.0 + th * t).powf(-kappa);
                if x.is_infinite() {
                    return base;
                }
                base * -(-kappa * (th * x / (1.0 + th * t)).ln_1p()).exp_m1()
            }
            Self::Frank(th) => {
                // With q(t) = expm1(-th) e^-t, 1 + q(t) = -expm1(-t) + e^(-th-t) has no cancellation.
                let q0 = (-th).exp_m1() * (-t).exp();
                let one_plus_q0 = -(-t).exp_m1() + (-th - t).exp();
                if x.is_infinite() {
                    return -q0 / (th * one_plus_q0);
                }
                let one_plus_q1 = -(-t - x).exp_m1() + (-th - t - x).exp();
                q0 * (-x).exp_m1() / (th * one_plus_q1 * one_plus_q0)
            }
        }
    }

    /// Survival copula `C^(a, b) = a + b - 1 + C(1 - a, 1 - b)`.
    pub(crate) fn survival(self, a: f64, b: f64) -> f64 {
        if a <= 0.0 || b <= 0.0 {
            return 0.0;
        }
        if a >= 1.0 {
            return b.min(1.0);
        }
        if b >= 1.0 {
            return a;
        }
        if a.min(b) >= 0.5 {
            return a + b - 1.0 + self.copula_closed_form(1.0 - a, 1.0 - b);
        }
        // C^(a,b) = int_0^y [g'(x+t) - g'(t)] dt, integrating along the shorter side.
        let (xa, xb) = (self.phi_of_complement(a), self.phi_of_complement(b));
        let (x, y) = if xa >= xb { (xa, xb) } else { (xb, xa) };
        Quadrature::with_rel_tol(1e-13)
            .integrate(|t| self.derivative_gap(x, t), 0.0, y)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }

    /// `lim C^(s,s) / s^2`: `g''(0) / g'(0)^2`.
    pub(crate) fn quadratic_constant(self) -> f64 {
        match self {
            Self::Clayton(th) => 1.0 + th,
            Self::Frank(th) => th * th.exp() / th.exp_m1(),
        }
    }

    /// Draw `(1 - U, 1 - V)` for `(U, V) ~ C` by conditional inversion.
    /// Inputs are two independent uniforms `w1` (already `1 - U`) and `e`.
    pub(crate) fn survival_pair_from_uniforms(self, w1: f64, e: f64) -> (f64, f64) {
        match self {
            Self::Clayton(th) => {
                // V = (1 + D)^(-1/th), D = U^-th (t^(-th/(1+th)) - 1), t = 1 - e.
                let u_pow = (-th * (-w1).ln_1p()).exp();
                let d = u_pow * (-th / (1.0 + th) * (-e).ln_1p()).exp_m1();
                let w2 = -(-(d.ln_1p()) / th).exp_m1();
                (w1, w2)
            }
            Self::Frank(th) => {
                // Radially symmetric: (U, V) and (1-U, 1-V) have the same law.
                let u = w1;
                let t = e;
                let c = (-th).exp_m1();
                let v = -(t * c / (t + (1.0 - t) * (-th * u).exp())).ln_1p() / th;
                (u, v)
            }
        }
    }
}

/// Kendall distribution `K(w) = w - phi(w) / phi'(w)` inverted by bisection.
pub(crate) fn kendall_inverse(generator: &dyn ArchimedeanGenerator, target: f64) -> f64 {
    let kendall = |w: f64| w - generator.phi(w) / generator.phi_derivative(w);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else if lo == 0.0 && hi > 1e-300 {
            hi * 1e-3
        } else {
            0.5 * (lo + hi)
        };
        if kendall(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

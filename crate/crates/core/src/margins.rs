//! Univariate regularly varying margins and the Hill estimator.
//!
//! Every margin is an exact Pareto law with survival function
//! `min(1, c * t^-alpha)`: `c = 1` is the standard Pareto on `[1, inf)`,
//! other prefactors shift the lower endpoint to `c^(1/alpha)`.

use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginKind {
    Pareto,
    ScaledPareto,
}

/// Exact Pareto margin with tail index `alpha` and survival prefactor `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin {
    kind: MarginKind,
    alpha: f64,
    scale: f64,
}

impl Margin {
    /// Standard Pareto: `P(X > t) = t^-alpha` for `t >= 1`.
    pub fn pareto(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            kind: MarginKind::Pareto,
            alpha,
            scale: 1.0,
        })
    }

    /// Pareto with survival function `scale * t^-alpha` above `scale^(1/alpha)`.
    pub fn scaled_pareto(alpha: f64, scale: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid("scale", format!("must be finite and > 0, got {scale}")));
        }
        Ok(Self {
            kind: MarginKind::ScaledPareto,
            alpha,
            scale,
        })
    }

    pub fn kind(&self) -> MarginKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Left end of the support, `scale^(1/alpha)`.
    pub fn lower_endpoint(&self) -> f64 {
        self.scale.powf(1.0 / self.alpha)
    }

    pub fn survival(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("survival needs t > 0, got {t}")));
        }
        Ok(self.survival_unchecked(t))
    }

    /// Survival function extended to the whole real line (1 below the support).
    pub fn survival_unchecked(&self, t: f64) -> f64 {
        if t <= self.lower_endpoint() {
            1.0
        } else {
            (self.scale * t.powf(-self.alpha)).min(1.0)
        }
    }

    /// `int_lo^hi P(X > y) dy`; `hi` may be infinite when `alpha > 1`.
    pub fn survival_integral(&self, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        let l = self.lower_endpoint();
        let flat = (hi.min(l) - lo).max(0.0);
        let a = lo.max(l);
        if hi <= a {
            return flat;
        }
        let tail = if (self.alpha - 1.0).abs() < 1e-12 {
            self.scale * (hi / a).ln()
        } else {
            let k = 1.0 - self.alpha;
            // hi^k vanishes for hi = inf when alpha > 1
            self.scale * (hi.powf(k) - a.powf(k)) / k
        };
        flat + tail
    }

    /// Density on the support.
    pub fn density(&self, t: f64) -> f64 {
        if t < self.lower_endpoint() {
            0.0
        } else {
            self.alpha * self.scale * t.powf(-self.alpha - 1.0)
        }
    }

    /// Generalized inverse of the distribution function.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0,1), got {q}")));
        }
        Ok(self.inverse_survival(1.0 - q))
    }

    /// `t` with `survival(t) = p`, for `p` in `(0, 1]`. Avoids forming `1 - p`,
    /// which loses the digits that matter deep in the tail.
    pub fn inverse_survival(&self, p: f64) -> f64 {
        (self.scale / p).powf(1.0 / self.alpha)
    }

    /// `E[X^order]`, finite iff `order < alpha`.
    pub fn moment(&self, order: f64) -> Option<f64> {
        if order >= self.alpha {
            return None;
        }
        let l = self.lower_endpoint();
        Some(self.alpha / (self.alpha - order) * l.powf(order))
    }

    pub fn mean(&self) -> Option<f64> {
        self.moment(1.0)
    }

    /// One draw by inversion of an open-interval uniform.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.inverse_survival(u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(invalid("n", "sample size must be at least 1"));
        }
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            "alpha",
            format!("tail index must be finite and > 0, got {alpha}"),
        ))
    }
}

/// Hill estimate of the extreme-value index `1/alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailIndexEstimate {
    pub xi_hat: f64,
    pub k: usize,
    pub n: usize,
}

impl TailIndexEstimate {
    pub fn alpha_hat(&self) -> f64 {
        1.0 / self.xi_hat
    }
}

/// Default number of upper order statistics: `ceil(sqrt(n))`.
pub fn default_hill_k(n: usize) -> usize {
    (n as f64).sqrt().ceil() as usize
}

/// Hill estimator over the `k` largest observations.
pub fn hill_estimate(data: &[f64], k: usize) -> Result<TailIndexEstimate> {
    let n = data.len();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("hill needs 1 <= k < n, got k={k}, n={n}")));
    }
    if let Some(bad) = data.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("hill needs positive finite data, found {bad}")));
    }
    let mut buf = data.to_vec();
    // After selection, buf[n-k-1] is X_(n-k) and everything to its right is larger.
    let pivot = n - k - 1;
    let (_, threshold, top) = buf.select_nth_unstable_by(pivot, f64::total_cmp);
    let threshold = *threshold;
    let ln_threshold = threshold.ln();
    let xi_hat = top.iter().map(|x| x.ln() - ln_threshold).sum::<f64>() / k as f64;
    if xi_hat <= 0.0 {
        return Err(Error::Degenerate("all top order statistics equal the threshold".into()));
    }
    Ok(TailIndexEstimate { xi_hat, k, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;

    #[test]
    fn survival_values() {
        assert_relative_eq!(Margin::pareto(2.0).unwrap().survival(10.0).unwrap(), 0.01);
        assert_eq!(Margin::pareto(1.0).unwrap().survival(1.0).unwrap(), 1.0);
        let m = Margin::scaled_pareto(2.0, 0.5).unwrap();
        assert_relative_eq!(m.survival(10.0).unwrap(), 0.005, max_relative = 1e-15);
        assert!(m.survival(0.0).is_err());
        assert!(m.survival(-1.0).is_err());
    }

    #[test]
    fn quantile_values() {
        assert_relative_eq!(
            Margin::pareto(1.0).unwrap().quantile(0.99).unwrap(),
            100.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            Margin::pareto(2.0).unwrap().quantile(0.96).unwrap(),
            5.0,
            max_relative = 1e-12
        );
        let m = Margin::scaled_pareto(2.0, 0.5).unwrap();
        assert_relative_eq!(m.quantile(1.0 - 0.005).unwrap(), 10.0, max_relative = 1e-10);
        assert!(m.quantile(0.0).is_err());
        assert!(m.quantile(1.0).is_err());
    }

    #[test]
    fn inversion_round_trip() {
        for m in [
            Margin::pareto(1.0).unwrap(),
            Margin::pareto(2.5).unwrap(),
            Margin::scaled_pareto(3.0, 0.2).unwrap(),
        ] {
            for e in 1..=6 {
                let p = 10f64.powi(-e);
                let t = m.inverse_survival(p);
                let back = m.survival(t).unwrap();
                assert!(((back - p) / p).abs() <= 1e-12, "{m:?} p={p} back={back}");
            }
        }
    }

    #[test]
    fn scaling_self_similarity() {
        let m = Margin::scaled_pareto(1.7, 3.0).unwrap();
        let t0 = m.lower_endpoint();
        for t in [t0, 2.0 * t0, 50.0 * t0] {
            for x in [1.0, 1.5, 10.0, 1e3] {
                let ratio = m.survival(t * x).unwrap() / m.survival(t).unwrap();
                assert_relative_eq!(ratio, x.powf(-1.7), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn tail_prefactor_and_mean() {
        let m = Margin::scaled_pareto(2.0, 0.5).unwrap();
        let t: f64 = 1e6;
        assert_relative_eq!(t.powf(2.0) * m.survival(t).unwrap(), 0.5, max_relative = 1e-12);
        assert_eq!(Margin::pareto(1.0).unwrap().mean(), None);
        assert_relative_eq!(Margin::pareto(2.0).unwrap().mean().unwrap(), 2.0);
    }

    #[test]
    fn sampling_matches_survival() {
        let m = Margin::pareto(2.0).unwrap();
        let xs = m.sample(1_000_000, &mut stream(1)).unwrap();
        let frac = xs.iter().filter(|x| **x > 10.0).count() as f64 / xs.len() as f64;
        assert!((frac - 0.01).abs() < 5e-4, "frac={frac}");
    }

    #[test]
    fn sampling_edge_cases() {
        let m = Margin::pareto(3.0).unwrap();
        assert_eq!(m.sample(1, &mut stream(0)).unwrap().len(), 1);
        assert!(m.sample(0, &mut stream(0)).is_err());
        assert_eq!(
            m.sample(100, &mut stream(42)).unwrap(),
            m.sample(100, &mut stream(42)).unwrap()
        );
    }

    #[test]
    fn hill_hand_value() {
        let est = hill_estimate(&[8.0, 4.0, 2.0, 1.0], 3).unwrap();
        assert_relative_eq!(est.xi_hat, 2.0 * 2f64.ln(), max_relative = 1e-14);
        assert_eq!((est.k, est.n), (3, 4));
    }

    #[test]
    fn hill_errors() {
        assert!(matches!(hill_estimate(&[3.0; 10], 4), Err(Error::Degenerate(_))));
        assert!(hill_estimate(&[1.0, 2.0, 3.0], 0).is_err());
        assert!(hill_estimate(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(hill_estimate(&[1.0, -2.0, 3.0], 1).is_err());
    }

    #[test]
    fn hill_on_pareto_sample() {
        let m = Margin::pareto(2.0).unwrap();
        let xs = m.sample(100_000, &mut stream(5)).unwrap();
        let est = hill_estimate(&xs, 316).unwrap();
        assert!((est.xi_hat - 0.5).abs() < 0.05, "xi_hat={}", est.xi_hat);
    }

    #[test]
    fn hill_consistency_over_replications() {
        // On exact Pareto data k * xi_hat / xi is Gamma(k, 1), so the chance of a
        // 10% relative error band is fixed by k alone (about 0.925 for k = 317).
        use statrs::distribution::{ContinuousCDF, Gamma};
        let alpha = 2.0;
        let m = Margin::pareto(alpha).unwrap();
        let n = 100_000;
        let k = default_hill_k(n);
        let reps = 100;
        let hits = (0..reps as u64)
            .filter(|seed| {
                let xs = m.sample(n, &mut stream(1000 + seed)).unwrap();
                let xi = hill_estimate(&xs, k).unwrap().xi_hat;
                (xi - 1.0 / alpha).abs() <= 0.1 / alpha
            })
            .count();
        let g = Gamma::new(k as f64, 1.0).unwrap();
        let coverage = g.cdf(1.1 * k as f64) - g.cdf(0.9 * k as f64);
        let se = (coverage * (1.0 - coverage) / reps as f64).sqrt();
        let observed = hits as f64 / reps as f64;
        assert!(
            observed >= coverage - 3.0 * se,
            "hits={hits}, theoretical coverage={coverage:.4}"
        );
    }
}

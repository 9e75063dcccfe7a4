//! Empirical risk measures and tail-dependence estimators on samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copulas::least_squares_slope;
use crate::error::{invalid, Error, Result};
use crate::margins::{hill_estimate, TailIndexEstimate};
use crate::rng::stable_sum;

/// Default floor on the number of conditioning exceedances.
pub const DEFAULT_MIN_EXCEEDANCES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMeasure {
    Var,
    Mes,
    Mme,
    MesPlus,
    MesMin,
    MesMax,
}

impl RiskMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Var => "var",
            Self::Mes => "mes",
            Self::Mme => "mme",
            Self::MesPlus => "mes_plus",
            Self::MesMin => "mes_min",
            Self::MesMax => "mes_max",
        }
    }
}

/// How the conditioning variable of an MES variant is built from `(Z1, Z2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    Sum,
    Min,
    Max,
}

impl Conditioning {
    pub fn apply(self, z1: f64, z2: f64) -> f64 {
        match self {
            Self::Sum => z1 + z2,
            Self::Min => z1.min(z2),
            Self::Max => z1.max(z2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub measure: RiskMeasure,
    pub p: f64,
    pub value: f64,
    /// Empirical VaR of the conditioning variable.
    pub threshold: f64,
    pub exceedance_count: usize,
    pub standard_error: f64,
}

fn check_level(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid("p", format!("{p} is outside (0, 1)")))
    }
}

/// 1-based index `ceil(n (1 - p))`, robust to `n p` landing a hair off an integer.
fn upper_index(n: usize, p: f64) -> usize {
    let np = n as f64 * p;
    let snapped = if (np - np.round()).abs() <= 1e-9 * np.max(1.0) {
        np.round()
    } else {
        np.floor()
    };
    n - snapped as usize
}

/// Lower empirical quantile at level `1 - p`: the order statistic with
/// 1-based index `ceil(n (1 - p))`.
pub fn empirical_var(values: &[f64], p: f64) -> Result<f64> {
    check_level(p)?;
    let n = values.len();
    if (n as f64) * p < 1.0 {
        return Err(Error::InsufficientSample(format!("n p = {} is below 1", n as f64 * p)));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("sample contains NaN".into()));
    }
    let idx = upper_index(n, p).max(1);
    let mut work = values.to_vec();
    let (_, v, _) = work.select_nth_unstable_by(idx - 1, f64::total_cmp);
    Ok(*v)
}

/// Mean and standard error of `value(i)` over indices where `cond[i] > threshold`.
fn conditional_mean(
    pairs: &[(f64, f64)],
    cond: impl Fn(&(f64, f64)) -> f64 + Sync,
    value: impl Fn(&(f64, f64), f64) -> f64 + Sync,
    p: f64,
    measure: RiskMeasure,
    min_exceedances: usize,
) -> Result<RiskEstimate> {
    check_level(p)?;
    let conditioning: Vec<f64> = pairs.par_iter().map(&cond).collect();
    let threshold = empirical_var(&conditioning, p)?;
    let terms: Vec<f64> = pairs
        .par_iter()
        .zip(conditioning.par_iter())
        .filter(|(_, &c)| c > threshold)
        .map(|(z, _)| value(z, threshold))
        .collect();
    let count = terms.len();
    if count < min_exceedances.max(2) {
        return Err(Error::TooFewExceedances {
            found: count,
            required: min_exceedances.max(2),
        });
    }
    let mean = stable_sum(&terms, |&t| t) / count as f64;
    let var = stable_sum(&terms, |&t| (t - mean) * (t - mean)) / (count - 1) as f64;
    Ok(RiskEstimate {
        measure,
        p,
        value: mean,
        threshold,
        exceedance_count: count,
        standard_error: (var / count as f64).sqrt(),
    })
}

/// `E[Z1 | Z2 > VaR(Z2)]` with the strict exceedance convention.
pub fn empirical_mes(pairs: &[(f64, f64)], p: f64) -> Result<RiskEstimate> {
    empirical_mes_with_floor(pairs, p, DEFAULT_MIN_EXCEEDANCES)
}

pub fn empirical_mes_with_floor(pairs: &[(f64, f64)], p: f64, min_exceedances: usize) -> Result<RiskEstimate> {
    conditional_mean(pairs, |z| z.1, |z, _| z.0, p, RiskMeasure::Mes, min_exceedances)
}

/// `E[(Z1 - VaR(Z2))+ | Z2 > VaR(Z2)]`.
pub fn empirical_mme(pairs: &[(f64, f64)], p: f64) -> Result<RiskEstimate> {
    empirical_mme_with_floor(pairs, p, DEFAULT_MIN_EXCEEDANCES)
}

pub fn empirical_mme_with_floor(pairs: &[(f64, f64)], p: f64, min_exceedances: usize) -> Result<RiskEstimate> {
    conditional_mean(
        pairs,
        |z| z.1,
        |z, v| (z.0 - v).max(0.0),
        p,
        RiskMeasure::Mme,
        min_exceedances,
    )
}

/// `E[Z1 | S > VaR(S)]` for `S` the sum, minimum or maximum of the pair.
pub fn empirical_mes_variant(pairs: &[(f64, f64)], p: f64, kind: Conditioning) -> Result<RiskEstimate> {
    empirical_mes_variant_with_floor(pairs, p, kind, DEFAULT_MIN_EXCEEDANCES)
}

pub fn empirical_mes_variant_with_floor(
    pairs: &[(f64, f64)],
    p: f64,
    kind: Conditioning,
    min_exceedances: usize,
) -> Result<RiskEstimate> {
    let measure = match kind {
        Conditioning::Sum => RiskMeasure::MesPlus,
        Conditioning::Min => RiskMeasure::MesMin,
        Conditioning::Max => RiskMeasure::MesMax,
    };
    conditional_mean(pairs, |z| kind.apply(z.0, z.1), |z, _| z.0, p, measure, min_exceedances)
}

/// Coordinatewise maximal ranks of a sample, for repeated rank-based queries.
#[derive(Debug, Clone)]
pub struct RankedSample {
    ranks: Vec<(u32, u32)>,
}

fn max_ranks(values: Vec<f64>) -> Vec<u32> {
    let mut order: Vec<(f64, u32)> = values.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
    order.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks = vec![0u32; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && order[end].0 == order[start].0 {
            end += 1;
        }
        // Ties share the largest rank of their block.
        for &(_, i) in &order[start..end] {
            ranks[i as usize] = end as u32;
        }
        start = end;
    }
    ranks
}

impl RankedSample {
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InsufficientSample("empty sample".into()));
        }
        if pairs.len() > u32::MAX as usize {
            return Err(Error::InsufficientSample("sample too large for rank storage".into()));
        }
        if pairs.iter().any(|z| z.0.is_nan() || z.1.is_nan()) {
            return Err(Error::Domain("sample contains NaN".into()));
        }
        let r1 = max_ranks(pairs.iter().map(|z| z.0).collect());
        let r2 = max_ranks(pairs.iter().map(|z| z.1).collect());
        Ok(Self {
            ranks: r1.into_iter().zip(r2).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Number of pairs with `rank1 > n (1 - u)` and `rank2 > n (1 - v)`.
    pub fn joint_upper_count(&self, u: f64, v: f64) -> usize {
        let n = self.ranks.len() as f64;
        let (a, b) = (n * (1.0 - u), n * (1.0 - v));
        self.ranks
            .par_iter()
            .filter(|&&(r1, r2)| r1 as f64 > a && r2 as f64 > b)
            .count()
    }

    pub fn survival_copula(&self, u: f64, v: f64) -> Result<f64> {
        for (name, w) in [("u", u), ("v", v)] {
            if !(w > 0.0 && w <= 1.0) {
                return Err(invalid(name, format!("{w} is outside (0, 1]")));
            }
        }
        Ok(self.joint_upper_count(u, v) as f64 / self.len() as f64)
    }
}

/// Rank-based empirical survival copula `C^_n(u, v)`.
pub fn empirical_survival_copula(pairs: &[(f64, f64)], u: f64, v: f64) -> Result<f64> {
    RankedSample::new(pairs)?.survival_copula(u, v)
}

/// Hill estimate on the pointwise minima, whose index is the joint tail index.
pub fn joint_tail_index(pairs: &[(f64, f64)], k: usize) -> Result<TailIndexEstimate> {
    let minima: Vec<f64> = pairs.iter().map(|z| z.0.min(z.1)).collect();
    hill_estimate(&minima, k)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaEstimate {
    pub kappa: f64,
    /// `(s, joint upper count)` for each grid point.
    pub counts: Vec<(f64, usize)>,
}

/// Least-squares slope of `log C^_n(s, s)` against `log s`.
pub fn kappa_empirical(pairs: &[(f64, f64)], s_grid: &[f64]) -> Result<KappaEstimate> {
    kappa_empirical_ranked(&RankedSample::new(pairs)?, s_grid)
}

pub fn kappa_empirical_ranked(sample: &RankedSample, s_grid: &[f64]) -> Result<KappaEstimate> {
    if s_grid.len() < 2 {
        return Err(Error::InsufficientSample(
            "kappa slope needs at least two grid points".into(),
        ));
    }
    let n = sample.len() as f64;
    let mut counts = Vec::with_capacity(s_grid.len());
    let mut points = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("s = {s} is outside (0, 1)")));
        }
        let c = sample.joint_upper_count(s, s);
        if c == 0 {
            return Err(Error::Underflow(format!("no joint exceedances at s = {s}")));
        }
        counts.push((s, c));
        points.push((s.ln(), (c as f64 / n).ln()));
    }
    Ok(KappaEstimate {
        kappa: least_squares_slope(&points)?,
        counts,
    })
}

/// Kendall's tau-b in `O(n log n)` (Knight's algorithm).
pub fn kendall_tau(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::InsufficientSample("kendall tau needs two pairs".into()));
    }
    let mut v: Vec<(f64, f64)> = pairs.to_vec();
    v.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let ties = |eq: &dyn Fn(usize, usize) -> bool, v: &[(f64, f64)]| -> u64 {
        let (mut total, mut run) = (0u64, 1u64);
        for i in 1..v.len() {
            if eq(i - 1, i) {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };
    let tied_x = ties(&|i, j| v[i].0 == v[j].0, &v);
    let tied_xy = ties(&|i, j| v[i] == v[j], &v);
    let mut ys: Vec<f64> = v.iter().map(|z| z.1).collect();
    let swaps = merge_sort_swaps(&mut ys);
    let tied_y = {
        let (mut total, mut run) = (0u64, 1u64);
        for i in 1..n {
            if ys[i - 1] == ys[i] {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let concordant_minus_discordant = n0 as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    let den = ((n0 - tied_x) as f64 * (n0 - tied_y) as f64).sqrt();
    if den == 0.0 {
        return Err(Error::Degenerate("a coordinate is constant".into()));
    }
    Ok(concordant_minus_discordant / den)
}

fn merge_sort_swaps(v: &mut [f64]) -> u64 {
    let n = v.len();
    let mut buf = v.to_vec();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if v[j] < v[i] {
                    buf[k] = v[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + end - j].copy_from_slice(&v[j..end]);
            start = end;
        }
        v.copy_from_slice(&buf);
        width *= 2;
    }
    swaps
}

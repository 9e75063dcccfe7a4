//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite and
//! semi-infinite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut values = [(0.0, 0.0); 7];
    for (j, node) in XGK.iter().take(7).enumerate() {
        let dx = half * node;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() {
        return Err(Error::Domain(format!("integrand is not finite on [{a}, {b}]")));
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    // Floor the estimate at rounding level so the loop can terminate.
    err = err.max(50.0 * f64::EPSILON * value.abs());
    Ok((value, err))
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<QuadResult> {
        if a == b {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
                converged: true,
            });
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!("finite bounds required, got [{a}, {b}]")));
        }
        let (v0, e0) = gk15(&mut f, a, b)?;
        let mut heap = BinaryHeap::new();
        heap.push(Segment {
            a,
            b,
            value: v0,
            error: e0,
        });
        let mut total = v0;
        let mut total_err = e0;
        let mut evaluations = 15;
        let mut converged = false;
        while heap.len() < self.max_intervals {
            if total_err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                converged = true;
                break;
            }
            let seg = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                // Interval collapsed to machine resolution.
                heap.push(seg);
                break;
            }
            let (lv, le) = gk15(&mut f, seg.a, mid)?;
            let (rv, re) = gk15(&mut f, mid, seg.b)?;
            evaluations += 30;
            total += lv + rv - seg.value;
            total_err += le + re - seg.error;
            heap.push(Segment {
                a: seg.a,
                b: mid,
                value: lv,
                error: le,
            });
            heap.push(Segment {
                a: mid,
                b: seg.b,
                value: rv,
                error: re,
            });
        }
        // Re-sum to shed accumulated update drift.
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !converged {
            converged = error <= self.abs_tol.max(self.rel_tol * value.abs());
        }
        Ok(QuadResult {
            value,
            error,
            evaluations,
            converged,
        })
    }

    /// Integral of `f` over `[a, inf)` via `x = a + (1 - u) / u`.
    pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64) -> Result<QuadResult> {
        self.integrate(
            |u| {
                let x = a + (1.0 - u) / u;
                let v = f(x);
                if v == 0.0 {
                    0.0
                } else {
                    v / (u * u)
                }
            },
            0.0,
            1.0,
        )
    }

    /// Integral over `[a, inf)` split at the given interior breakpoints.
    pub fn integrate_to_infinity_with_breaks<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        breaks: &[f64],
    ) -> Result<QuadResult> {
        let mut points: Vec<f64> = breaks.iter().copied().filter(|b| *b > a && b.is_finite()).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut acc = QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
        let mut lo = a;
        for &p in &points {
            let r = self.integrate(&mut f, lo, p)?;
            acc = combine(acc, r);
            lo = p;
        }
        let r = self.integrate_to_infinity(&mut f, lo)?;
        Ok(combine(acc, r))
    }

    /// Integral over `[a, b]` split at interior breakpoints.
    pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<QuadResult> {
        let mut points: Vec<f64> = breaks.iter().copied().filter(|p| *p > a && *p < b).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        points.push(b);
        let mut acc = QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
        let mut lo = a;
        for &p in &points {
            let r = self.integrate(&mut f, lo, p)?;
            acc = combine(acc, r);
            lo = p;
        }
        Ok(acc)
    }
}

fn combine(a: QuadResult, b: QuadResult) -> QuadResult {
    QuadResult {
        value: a.value + b.value,
        error: a.error + b.error,
        evaluations: a.evaluations + b.evaluations,
        converged: a.converged && b.converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0).unwrap();
        assert_relative_eq!(r.value, 63.0 / 6.0 - 9.0, max_relative = 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn kinks_are_resolved() {
        let q = Quadrature::with_rel_tol(1e-12);
        let r = q.integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0).unwrap();
        assert_relative_eq!(r.value, 0.5 * 0.09 + 0.5 * 0.49, max_relative = 1e-11);
    }

    #[test]
    fn power_tails() {
        let q = Quadrature::with_rel_tol(1e-12);
        let r = q.integrate_to_infinity(|x| x.powf(-2.5), 1.0).unwrap();
        assert_relative_eq!(r.value, 1.0 / 1.5, max_relative = 1e-10);
        let r = q.integrate_to_infinity(|x: f64| (-x).exp(), 0.0).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-10);
        let r = q
            .integrate_to_infinity_with_breaks(|x: f64| x.max(1.0).powf(-2.5), 0.0, &[1.0])
            .unwrap();
        assert_relative_eq!(r.value, 5.0 / 3.0, max_relative = 1e-10);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let q = Quadrature::default();
        assert!(q.integrate(|_| f64::NAN, 0.0, 1.0).is_err());
    }
}

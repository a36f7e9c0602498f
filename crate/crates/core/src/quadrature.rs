//! Adaptive Gauss–Kronrod quadrature of `g(x)·x^{-s-1}` and a dyadic-block
//! convergence classifier for generic non-negative integrands.
//!
//! This module is an oracle: it knows where the staircase breaks but nothing
//! about the closed forms in [`crate::transform`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::StaircaseFamily;
use crate::sum::{CompensatedSum, ComplexSum};

/// Subdivision budget per call.
pub const MAX_SUBDIVISIONS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("tolerance unreachable after {subdivisions} subdivisions (error estimate {achieved:e})")]
    ToleranceUnreachable { achieved: f64, subdivisions: usize },
    #[error("no decisive trend after {blocks} dyadic blocks (fitted ratio {ratio})")]
    Undecidable { blocks: usize, ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub subdivisions: usize,
}

/// Outcome of a convergence test on an improper integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VerdictKind {
    /// The tail vanishes; `value` is the extrapolated integral.
    Converged { value: Complex64 },
    /// Partial sums settle at block boundaries but the integral still swings
    /// by at least `swing_floor` inside blocks.
    Oscillating { swing_floor: f64 },
    /// Blocks stay bounded below (`floor`) or grow by `growth_rate` per block.
    Diverging { growth_rate: f64, floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub kind: VerdictKind,
    pub blocks_examined: usize,
}

impl ConvergenceVerdict {
    pub fn is_converged(&self) -> bool {
        matches!(self.kind, VerdictKind::Converged { .. })
    }
}

// Kronrod 15-point nodes/weights with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
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
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        resk += pair * WGK[j];
        if j % 2 == 1 {
            resg += pair * WG[j / 2];
        }
    }
    Segment {
        a,
        b,
        value: resk * half,
        error: ((resk - resg) * half).norm(),
    }
}

/// Globally adaptive G7/K15 on `[a, b]`: repeatedly bisects the segment with
/// the largest error estimate until the total estimate drops below
/// `tol·|value|` (or the rounding floor of the summed magnitudes).
pub fn adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    if !(tol > 0.0) {
        return Err(QuadratureError::InvalidTolerance(tol));
    }
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(QuadratureError::InvalidRange { lo: a, hi: b });
    }
    if a == b {
        return Ok(QuadratureResult {
            value: Complex64::new(0.0, 0.0),
            abs_error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(f, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut magnitude = first.value.norm();
    heap.push(first);
    let mut subdivisions = 1;

    loop {
        let target = (tol * total.norm()).max(32.0 * f64::EPSILON * magnitude);
        if total_err <= target {
            break;
        }
        let worst = match heap.peek() {
            Some(seg) => *seg,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if subdivisions >= MAX_SUBDIVISIONS || mid <= worst.a || mid >= worst.b {
            return Err(QuadratureError::ToleranceUnreachable {
                achieved: total_err,
                subdivisions,
            });
        }
        heap.pop();
        let left = kronrod(f, worst.a, mid);
        let right = kronrod(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        magnitude += left.value.norm() + right.value.norm() - worst.value.norm();
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }

    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: ComplexSum = segments.iter().map(|s| s.value).collect();
    let error: CompensatedSum = segments.iter().map(|s| s.error).collect();
    Ok(QuadratureResult {
        value: value.value(),
        abs_error_estimate: error.value().max(0.0),
        subdivisions,
    })
}

/// `x^{-s-1}` for real `x > 0`.
#[inline]
pub(crate) fn kernel(x: f64, s: Complex64) -> Complex64 {
    ((-s - 1.0) * x.ln()).exp()
}

/// `∫_{x_lo}^{x_hi} g(x) x^{-s-1} dx` for a staircase family.
///
/// The range is cut at every breakpoint so that each piece carries a linear
/// `g`. Pieces are laid out relative to the interval centre, so jump heights
/// are the exact `h′, h″` rather than the rounded levels `x_i ± h`, and each
/// piece is integrated in a shifted variable `v` with `g = A·(offset − v)`.
pub fn integrate_piecewise(
    family: &StaircaseFamily,
    s: Complex64,
    x_lo: f64,
    x_hi: f64,
    tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    if !(x_lo >= 1.0 && x_lo < x_hi && x_hi <= family.horizon()) {
        return Err(QuadratureError::InvalidRange { lo: x_lo, hi: x_hi });
    }
    if !(tol > 0.0) {
        return Err(QuadratureError::InvalidTolerance(tol));
    }
    let a_coeff = family.a_coeff();
    let mut value = ComplexSum::new();
    let mut error = CompensatedSum::new();
    let mut subdivisions = 0;
    if a_coeff == 0.0 {
        return Ok(QuadratureResult {
            value: Complex64::new(0.0, 0.0),
            abs_error_estimate: 0.0,
            subdivisions: 0,
        });
    }

    let ln_b = family.ln_base();
    let first = ((x_lo.ln() / ln_b).floor() as i64 - 1).max(i64::from(family.i_start()));
    let last = ((x_hi.ln() / ln_b).ceil() as i64 + 1).min(i64::from(family.i_cap()));
    for i in first..=last {
        let geo = family.geometry(i as u32);
        let center = geo.center;
        // pieces in t = x − x_i, where the level is x_i + (level offset) exactly
        let mut pieces: Vec<(f64, f64, f64)> = Vec::with_capacity(2);
        if geo.h_down > 0.0 {
            pieces.push((-geo.h_down, 0.0, -geo.h_down));
        }
        if geo.h_up > 0.0 {
            pieces.push((0.0, geo.h_up, geo.h_up));
        }
        for (t_lo, t_hi, level) in pieces {
            let ta = t_lo.max(x_lo - center);
            let tb = t_hi.min(x_hi - center);
            if ta >= tb {
                continue;
            }
            let offset = level - ta;
            let start = center + ta;
            let integrand = |v: f64| kernel(start + v, s) * (a_coeff * (offset - v));
            let r = adaptive(&integrand, 0.0, tb - ta, tol)?;
            value.add(r.value);
            error.add(r.abs_error_estimate);
            subdivisions += r.subdivisions;
        }
    }
    Ok(QuadratureResult {
        value: value.value(),
        abs_error_estimate: error.value(),
        subdivisions,
    })
}

/// `∫_{x_lo}^{x_hi} fn(x) x^{-s-1} dx` for a caller-supplied real factor.
pub fn integrate_generic<F: Fn(f64) -> f64>(
    func: F,
    s: Complex64,
    x_lo: f64,
    x_hi: f64,
    tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    if !(x_lo >= 1.0 && x_lo < x_hi && x_hi.is_finite()) {
        return Err(QuadratureError::InvalidRange { lo: x_lo, hi: x_hi });
    }
    let integrand = |x: f64| kernel(x, s) * func(x);
    adaptive(&integrand, x_lo, x_hi, tol)
}

/// Consecutive small blocks required before declaring convergence.
pub const RUN_LENGTH: usize = 8;
/// A block counts as small below this fraction of the largest earlier block.
pub const SMALL_FRACTION: f64 = 1e-3;
/// Window used to fit the per-block geometric ratio.
pub const RATIO_WINDOW: usize = 16;
/// Fitted ratio must be below this for convergence ...
pub const CONVERGED_RATIO: f64 = 0.98;
/// ... and above this for geometric divergence.
pub const DIVERGING_RATIO: f64 = 1.02;

const BLOCK_TOL: f64 = 1e-12;

/// Least-squares geometric ratio of a positive sequence.
pub(crate) fn fitted_ratio(values: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| (k as f64, v.ln()))
        .collect();
    slope(&points).map(f64::exp)
}

/// Ordinary least-squares slope and RMS residual.
pub(crate) fn regression(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Some((slope, intercept, (rss / n).sqrt()))
}

pub(crate) fn slope(points: &[(f64, f64)]) -> Option<f64> {
    regression(points).map(|r| r.0)
}

/// Cauchy-criterion test on dyadic blocks `[2^k, 2^{k+1}]`, `k < block_budget`,
/// for `∫_1^∞ fn(x) x^{-s-1} dx` with `fn ≥ 0` non-decreasing.
///
/// * Converged: the last [`RUN_LENGTH`] blocks are each below
///   [`SMALL_FRACTION`] of every earlier block and the fitted ratio over the
///   last [`RATIO_WINDOW`] blocks is below [`CONVERGED_RATIO`].
/// * Diverging: at the end of the budget either the fitted ratio exceeds
///   [`DIVERGING_RATIO`], or the last [`RUN_LENGTH`] blocks never drop below
///   the first of them (bounded below by a positive floor).
/// * Otherwise [`QuadratureError::Undecidable`].
pub fn classify_convergence_generic<F: Fn(f64) -> f64>(
    func: F,
    s: f64,
    block_budget: usize,
) -> Result<ConvergenceVerdict, QuadratureError> {
    let s = Complex64::new(s, 0.0);
    let mut blocks: Vec<f64> = Vec::with_capacity(block_budget);
    let mut total = CompensatedSum::new();
    for k in 0..block_budget {
        let lo = (k as f64).exp2();
        if !(2.0 * lo).is_finite() {
            break;
        }
        // x = 2^k·y keeps the kernel accurate however large x gets
        let scaled = |y: f64| kernel(y, s) * func(lo * y);
        let block = adaptive(&scaled, 1.0, 2.0, BLOCK_TOL)?.value.re * (-(k as f64) * s.re).exp2();
        blocks.push(block);
        total.add(block);

        let n = blocks.len();
        if n < RUN_LENGTH + 1 || n < RATIO_WINDOW {
            continue;
        }
        let (earlier, run) = blocks.split_at(n - RUN_LENGTH);
        let peak = earlier.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !run.iter().all(|v| v.abs() <= SMALL_FRACTION * peak) {
            continue;
        }
        let window = &blocks[n - RATIO_WINDOW..];
        let last = *blocks.last().unwrap();
        let converged_value = match fitted_ratio(window) {
            _ if run.iter().all(|v| *v == 0.0) => Some(total.value()),
            Some(r) if r < CONVERGED_RATIO => Some(total.value() + last * r / (1.0 - r)),
            _ => None,
        };
        if let Some(v) = converged_value {
            return Ok(ConvergenceVerdict {
                kind: VerdictKind::Converged {
                    value: Complex64::new(v, 0.0),
                },
                blocks_examined: n,
            });
        }
    }

    let n = blocks.len();
    if n < RATIO_WINDOW {
        return Err(QuadratureError::Undecidable { blocks: n, ratio: f64::NAN });
    }
    let ratio = fitted_ratio(&blocks[n - RATIO_WINDOW..]).unwrap_or(f64::NAN);
    let run = &blocks[n - RUN_LENGTH..];
    let floor = run.iter().copied().fold(f64::INFINITY, f64::min);
    let bounded_below = run[0] > 0.0 && run.iter().all(|v| *v >= run[0] * (1.0 - 1e-9));
    if ratio > DIVERGING_RATIO || bounded_below {
        return Ok(ConvergenceVerdict {
            kind: VerdictKind::Diverging {
                growth_rate: ratio,
                floor,
            },
            blocks_examined: n,
        });
    }
    Err(QuadratureError::Undecidable { blocks: n, ratio })
}

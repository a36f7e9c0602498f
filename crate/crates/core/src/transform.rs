//! Interval-by-interval evaluation of `G(s) = ∫ g(x) x^{-s-1} dx`.
//!
//! Writing `x = x_i (1 + v)` turns the `i`-th interval integral into
//!
//! ```text
//! x_i^{1−s} · Σ_{j≥2} b_j(s) · (u′^j − (−u″)^j),
//! b_j(s) = (1/j!) · ∏_{m=1}^{j−2} (−m − s),
//! ```
//!
//! in which the first-order terms of the two half-integrals have already
//! cancelled. The series has no singularity at `s ∈ {0, 1}` and keeps full
//! relative precision however small `u` is, unlike the raw antiderivative.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::model::{IntervalGeometry, ModelError, StaircaseFamily};
use crate::quadrature::{self, ConvergenceVerdict, VerdictKind};
use crate::sum::ComplexSum;

/// Half-width of the undecidable band around a vanishing fitted exponent.
pub const DEAD_ZONE: f64 = 0.02;
/// Leading intervals excluded from exponent fits.
pub const TRANSIENT: u32 = 5;

const SERIES_REL_TOL: f64 = 1e-17;
const SERIES_MAX_TERMS: u32 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("requested {requested} intervals but only {available} are available")]
    Range { requested: u32, available: u32 },
    #[error("antiderivative form is unstable here ({0})")]
    Unstable(&'static str),
    #[error("undecidable at s = {s}: fitted swing exponent {exponent:.4} is inside the dead zone")]
    Undecidable { s: f64, exponent: f64 },
    #[error("not enough active intervals ({0}) for a trend fit")]
    TooFewIntervals(u32),
    #[error("tolerance {0} is below the resolvable 0.05")]
    InvalidTolerance(f64),
    #[error("no abscissa in [{lo}, {hi}]: {reason}")]
    NoAbscissa { lo: f64, hi: f64, reason: String },
}

/// One row of a [`PartialSumTrace`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalTerm {
    pub index: u32,
    pub center: f64,
    pub contribution: Complex64,
    pub swing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSumTrace {
    pub s: Complex64,
    pub per_interval: Vec<IntervalTerm>,
    /// Compensated running sums, ascending in `i`.
    pub cumulative: Vec<Complex64>,
    pub n_intervals: u32,
}

impl PartialSumTrace {
    pub fn total(&self) -> Complex64 {
        self.cumulative.last().copied().unwrap_or_default()
    }
}

/// `x_i^{1−s} · u_max² · A`, formed in the exponent so it cannot overflow.
fn interval_scale(family: &StaircaseFamily, geo: &IntervalGeometry, s: Complex64) -> Complex64 {
    let ln_x = f64::from(geo.index) * family.ln_base();
    let log = (1.0 - s) * ln_x + 2.0 * geo.u_max().ln();
    log.exp() * family.a_coeff()
}

/// `Σ_{j≥2} b_j(s) · ρ^{j−2} · (p^j − (−q)^j)` with `p, q ∈ [0, 1]`, `ρ < 1`.
///
/// Stops once the remaining terms are certified below
/// [`SERIES_REL_TOL`]·|sum| using
/// `|b_{j+1}/b_j| ≤ (j − 1 + |s|)/(j + 1)` and `|p^j − (−q)^j| ≤ 2`.
fn difference_series(s: Complex64, rho: f64, p: f64, q: f64) -> Complex64 {
    difference_series_tracked(s, rho, p, q).0
}

/// [`difference_series`] together with the largest term magnitude seen.
fn difference_series_tracked(s: Complex64, rho: f64, p: f64, q: f64) -> (Complex64, f64) {
    let s_abs = s.norm();
    let mut largest = 0.0f64;
    let mut acc = ComplexSum::new();
    let mut b = Complex64::new(0.5, 0.0);
    let mut rho_pow = 1.0;
    let mut p_pow = p * p;
    let mut q_pow = q * q;
    let mut j = 2u32;
    loop {
        let amp = p_pow - q_pow;
        if amp != 0.0 {
            let term = b * (rho_pow * amp);
            largest = largest.max(term.norm());
            acc.add(term);
        }
        let jf = f64::from(j);
        let ratio = rho * ((jf - 1.0 + s_abs) / (jf + 1.0)).max(1.0);
        if ratio < 1.0 {
            let tail = 2.0 * b.norm() * rho_pow * ratio / (1.0 - ratio);
            let sum = acc.value().norm();
            if tail <= SERIES_REL_TOL * sum || tail == 0.0 || (sum == 0.0 && tail < 1e-300) {
                break;
            }
        }
        if j >= SERIES_MAX_TERMS {
            break;
        }
        b *= (-(jf - 1.0) - s) / (jf + 1.0);
        rho_pow *= rho;
        p_pow *= p;
        q_pow *= -q;
        j += 1;
    }
    (acc.value(), largest)
}

/// `H(w, v)/ρ² = ρ^{-2}·∫_0^{v} (w − t)(1 + t)^{-s-1} dt` with `w = ρŵ`, `v = ρv̂`.
fn partial_series(s: Complex64, rho: f64, w_hat: f64, v_hat: f64) -> Complex64 {
    // Σ_k C(−s−1, k) ρ^k (ŵ v̂^{k+1}/(k+1) − v̂^{k+2}/(k+2))
    let s_abs = s.norm();
    let mut acc = ComplexSum::new();
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut rho_pow = 1.0;
    let mut v_pow = v_hat;
    let mut k = 0u32;
    loop {
        let kf = f64::from(k);
        let term = w_hat * v_pow / (kf + 1.0) - v_pow * v_hat / (kf + 2.0);
        acc.add(coeff * (rho_pow * term));
        let ratio = rho * v_hat.abs() * ((kf + 1.0 + s_abs) / (kf + 1.0)).max(1.0);
        if ratio < 1.0 {
            let bound = coeff.norm() * rho_pow * v_pow.abs() * (w_hat.abs() + v_hat.abs());
            let tail = bound * ratio / (1.0 - ratio);
            let sum = acc.value().norm();
            if tail <= SERIES_REL_TOL * sum || tail == 0.0 || (sum == 0.0 && tail < 1e-300) {
                break;
            }
        }
        if k >= SERIES_MAX_TERMS {
            break;
        }
        coeff *= (-s - 1.0 - kf) / (kf + 1.0);
        rho_pow *= rho;
        v_pow *= v_hat;
        k += 1;
    }
    acc.value()
}

/// `∫ g(x) x^{-s-1} dx` over the whole `i`-th interval, via the stable series.
pub fn interval_contribution(
    family: &StaircaseFamily,
    i: u32,
    s: Complex64,
) -> Result<Complex64, TransformError> {
    let geo = family.interval(i)?;
    Ok(contribution_of(family, &geo, s))
}

pub(crate) fn contribution_of(family: &StaircaseFamily, geo: &IntervalGeometry, s: Complex64) -> Complex64 {
    let u = geo.u_max();
    if u == 0.0 || family.a_coeff() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (series, largest) = difference_series_tracked(s, u, geo.u_up / u, geo.u_down / u);
    if largest > CANCELLATION_LIMIT * series.norm() && u > 0.25 && s.norm() > 1e-3 && (s - 1.0).norm() > 1e-3 {
        return closed_form_of(family, geo, s);
    }
    interval_scale(family, geo, s) * series
}

/// Term growth beyond which the series hands over to the closed form.
const CANCELLATION_LIMIT: f64 = 1e3;

/// Closed form in the relative variable `τ = t/x_i − 1`, used for wide
/// intervals at large `|s|` where the power series cancels badly.
///
/// Up half `∫_0^{u′} (u′ − τ)(1+τ)^{-s-1} dτ`, down half
/// `∫_{-u″}^0 (−u″ − τ)(1+τ)^{-s-1} dτ`, both scaled by `A·x_i^{1−s}`.
fn closed_form_of(family: &StaircaseFamily, geo: &IntervalGeometry, s: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let pow = |v: f64, e: Complex64| (e * v.ln_1p()).exp();
    let mut total = Complex64::new(0.0, 0.0);
    if geo.u_up > 0.0 {
        let w = 1.0 + geo.u_up;
        total += (one - pow(geo.u_up, -s)) * w / s - (pow(geo.u_up, one - s) - 1.0) / (one - s);
    }
    if geo.u_down > 0.0 {
        let w = 1.0 - geo.u_down;
        total -= (one - pow(-geo.u_down, one - s)) / (one - s) - (pow(-geo.u_down, -s) - 1.0) * w / s;
    }
    let ln_x = f64::from(geo.index) * family.ln_base();
    ((one - s) * ln_x).exp() * family.a_coeff() * total
}

/// Same integral from the raw antiderivative
/// `K(a^{-s} − b^{-s})/s − (b^{1−s} − a^{1−s})/(1−s)` on each half.
///
/// Loses digits like `1/u`; refused for `u ≤ 0.25` and near `s ∈ {0, 1}`.
pub fn interval_contribution_antiderivative(
    family: &StaircaseFamily,
    i: u32,
    s: Complex64,
) -> Result<Complex64, TransformError> {
    let geo = family.interval(i)?;
    if geo.u_max() <= 0.25 {
        return Err(TransformError::Unstable("relative width u ≤ 0.25"));
    }
    if s.norm() < 1e-6 || (s - 1.0).norm() < 1e-6 {
        return Err(TransformError::Unstable("s too close to 0 or 1"));
    }
    let piece = |level: f64, a: f64, b: f64| -> Complex64 {
        let pa = (-s * a.ln()).exp();
        let pb = (-s * b.ln()).exp();
        (pa - pb) * level / s - (pb * b - pa * a) / (1.0 - s)
    };
    let mut total = Complex64::new(0.0, 0.0);
    if geo.h_down > 0.0 {
        total += piece(geo.lower(), geo.lower(), geo.center);
    }
    if geo.h_up > 0.0 {
        total += piece(geo.upper(), geo.center, geo.upper());
    }
    Ok(total * family.a_coeff())
}

/// Number of interior points per half-interval probed for complex `s`.
const SWING_SAMPLES: u32 = 16;

/// `max_t |∫_{x_i − h″}^{t} g(x) x^{-s-1} dx|` over the `i`-th interval.
///
/// For real `s` the partial integral is monotone on each half, so the maximum
/// is attained at the centre or the right end and is exact. For complex `s`
/// interior points are probed as well.
pub fn swing(family: &StaircaseFamily, i: u32, s: Complex64) -> Result<f64, TransformError> {
    let geo = family.interval(i)?;
    Ok(swing_of(family, &geo, s))
}

fn swing_of(family: &StaircaseFamily, geo: &IntervalGeometry, s: Complex64) -> f64 {
    let u = geo.u_max();
    if u == 0.0 || family.a_coeff() == 0.0 {
        return 0.0;
    }
    let scale = interval_scale(family, geo, s);
    let (p, q) = (geo.u_up / u, geo.u_down / u);
    // Φ(−u″) = Σ b_j (−u″)^j; the down half equals −Φ(−u″).
    let down = difference_series(s, u, 0.0, q) * scale;
    let whole = contribution_of(family, geo, s);
    let mut best = down.norm().max(whole.norm());
    if s.im != 0.0 {
        let h_down_full = partial_series(s, u, -q, -q);
        for k in 1..SWING_SAMPLES {
            let t = f64::from(k) / f64::from(SWING_SAMPLES);
            if q > 0.0 {
                let v = -q * (1.0 - t);
                let val = (partial_series(s, u, -q, v) - h_down_full) * scale;
                best = best.max(val.norm());
            }
            if p > 0.0 {
                let val = down + partial_series(s, u, p, p * t) * scale;
                best = best.max(val.norm());
            }
        }
    }
    best
}

/// Contributions, swings and compensated running sums for the first
/// `n_intervals` active intervals.
pub fn partial_sum(
    family: &StaircaseFamily,
    s: Complex64,
    n_intervals: u32,
) -> Result<PartialSumTrace, TransformError> {
    partial_sum_with(family, s, n_intervals, Execution::default())
}

pub fn partial_sum_with(
    family: &StaircaseFamily,
    s: Complex64,
    n_intervals: u32,
    exec: Execution,
) -> Result<PartialSumTrace, TransformError> {
    let available = family.i_cap() - family.i_start();
    if n_intervals > available {
        return Err(TransformError::Range {
            requested: n_intervals,
            available,
        });
    }
    let indices: Vec<u32> = (family.i_start()..family.i_start() + n_intervals).collect();
    let per_interval = exec::map(exec, &indices, |&i| {
        let geo = family.geometry(i);
        IntervalTerm {
            index: i,
            center: geo.center,
            contribution: contribution_of(family, &geo, s),
            swing: swing_of(family, &geo, s),
        }
    });
    let mut acc = ComplexSum::new();
    let cumulative = per_interval
        .iter()
        .map(|t| {
            acc.add(t.contribution);
            acc.value()
        })
        .collect();
    Ok(PartialSumTrace {
        s,
        per_interval,
        cumulative,
        n_intervals,
    })
}

/// Slope of `ln |value_i|` against `i·ln b`, skipping zeros.
pub fn fitted_exponent<I>(family: &StaircaseFamily, values: I) -> Option<f64>
where
    I: IntoIterator<Item = (u32, f64)>,
{
    let ln_b = family.ln_base();
    let points: Vec<(f64, f64)> = values
        .into_iter()
        .filter(|(_, v)| *v > 0.0 && v.is_finite())
        .map(|(i, v)| (f64::from(i) * ln_b, v.ln()))
        .collect();
    quadrature::slope(&points)
}

/// Classifies convergence of the improper integral at real `s`.
///
/// Swings and contributions are fitted to power laws `x_i^e` over all active
/// intervals after the first [`TRANSIENT`]:
///
/// * swing exponent `< −DEAD_ZONE`: Converged (contributions are bounded by
///   swings for real `s`);
/// * swing exponent `> DEAD_ZONE`: Oscillating if contributions still decay,
///   Diverging otherwise;
/// * in between: [`TransformError::Undecidable`].
pub fn classify_convergence(
    family: &StaircaseFamily,
    s: f64,
) -> Result<ConvergenceVerdict, TransformError> {
    let n = family.i_cap() - family.i_start();
    if family.is_trivial() {
        return Ok(ConvergenceVerdict {
            kind: VerdictKind::Converged {
                value: Complex64::new(0.0, 0.0),
            },
            blocks_examined: 0,
        });
    }
    if n < TRANSIENT + 8 {
        return Err(TransformError::TooFewIntervals(n));
    }
    let trace = partial_sum(family, Complex64::new(s, 0.0), n)?;
    let window = &trace.per_interval[TRANSIENT as usize..];
    let swing_exp = fitted_exponent(family, window.iter().map(|t| (t.index, t.swing)))
        .ok_or(TransformError::TooFewIntervals(n))?;
    if swing_exp.abs() <= DEAD_ZONE {
        return Err(TransformError::Undecidable { s, exponent: swing_exp });
    }
    let contribution_exp =
        fitted_exponent(family, window.iter().map(|t| (t.index, t.contribution.norm())));
    let kind = if swing_exp < -DEAD_ZONE {
        let tail = match contribution_exp {
            Some(e) if e < 0.0 => {
                let r = family.base().powf(e);
                window.last().unwrap().contribution * (r / (1.0 - r))
            }
            _ => Complex64::new(0.0, 0.0),
        };
        VerdictKind::Converged {
            value: trace.total() + tail,
        }
    } else {
        let tail_len = window.len().min(8);
        let tail = &window[window.len() - tail_len..];
        match contribution_exp {
            Some(e) if e < -DEAD_ZONE => VerdictKind::Oscillating {
                swing_floor: tail.iter().map(|t| t.swing).fold(f64::INFINITY, f64::min),
            },
            e => VerdictKind::Diverging {
                growth_rate: family.base().powf(e.unwrap_or(0.0)),
                floor: tail
                    .iter()
                    .map(|t| t.contribution.norm())
                    .fold(f64::INFINITY, f64::min),
            },
        }
    };
    Ok(ConvergenceVerdict {
        kind,
        blocks_examined: trace.per_interval.len(),
    })
}

/// Result of the bisection for the abscissa of conditional convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaEstimate {
    pub sigma_c: f64,
    pub bracket: (f64, f64),
    /// The bisection stopped on an undecidable midpoint.
    pub dead_zone: bool,
}

/// Initial bracket for the bisection.
pub const SIGMA_SEARCH: (f64, f64) = (-1.5, 1.5);

/// Bisects on [`classify_convergence`] until the bracket is narrower than
/// `tol`. An undecidable midpoint pins the abscissa to within [`DEAD_ZONE`]
/// of that midpoint and ends the search.
pub fn estimate_sigma_c(family: &StaircaseFamily, tol: f64) -> Result<SigmaEstimate, TransformError> {
    if !(tol >= 0.05) {
        return Err(TransformError::InvalidTolerance(tol));
    }
    let (mut lo, mut hi) = SIGMA_SEARCH;
    let no_abscissa = |reason: String| TransformError::NoAbscissa {
        lo: SIGMA_SEARCH.0,
        hi: SIGMA_SEARCH.1,
        reason,
    };
    if !classify_convergence(family, hi)?.is_converged() {
        return Err(no_abscissa(format!("not convergent at s = {hi}")));
    }
    if classify_convergence(family, lo)?.is_converged() {
        return Err(no_abscissa(format!("already convergent at s = {lo}")));
    }
    let mut dead_zone = false;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match classify_convergence(family, mid) {
            Ok(v) if v.is_converged() => hi = mid,
            Ok(_) => lo = mid,
            Err(TransformError::Undecidable { .. }) => {
                lo = lo.max(mid - DEAD_ZONE);
                hi = hi.min(mid + DEAD_ZONE);
                dead_zone = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SigmaEstimate {
        sigma_c: 0.5 * (lo + hi),
        bracket: (lo, hi),
        dead_zone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::coeff_b;
    use crate::model::Variant;
    use crate::quadrature::integrate_piecewise;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn symmetric_leading_term() {
        let f = StaircaseFamily::symmetric(0.5).unwrap();
        for s in [c(2.0, 0.0), c(0.3, 1.0), c(-0.5, 9.0)] {
            for i in [30u32, 40] {
                let geo = f.interval(i).unwrap();
                let lead = -(s + 1.0) / 3.0 * ((1.0 - s) * geo.center.ln()).exp() * geo.u_up.powi(3);
                let got = interval_contribution(&f, i, s).unwrap();
                // next term is O(u²) relative
                assert!(rel(got, lead) < 10.0 * geo.u_up.powi(2) * (1.0 + s.norm()).powi(2));
            }
            assert!(((coeff_b(3, s) * 2.0) - (-(s + 1.0) / 3.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn one_sided_matches_quadrature() {
        let f = StaircaseFamily::one_sided(0.5).unwrap();
        let geo = f.interval(4).unwrap();
        let q = integrate_piecewise(&f, c(2.0, 0.0), geo.lower(), geo.upper(), 1e-14).unwrap();
        let got = interval_contribution(&f, 4, c(2.0, 0.0)).unwrap();
        assert!(rel(got, q.value) < 1e-10);
    }

    #[test]
    fn antiderivative_agrees_where_stable() {
        let f = StaircaseFamily::symmetric(0.5).unwrap();
        // i = 3: u = 2^{-1.5} ≈ 0.354
        for s in [c(2.0, 0.0), c(-0.5, 1.0), c(1.5, 9.06)] {
            let a = interval_contribution_antiderivative(&f, 3, s).unwrap();
            let b = interval_contribution(&f, 3, s).unwrap();
            assert!(rel(a, b) < 1e-12, "{s}: {a} vs {b}");
        }
        assert!(interval_contribution_antiderivative(&f, 10, c(2.0, 0.0)).is_err());
        assert!(interval_contribution_antiderivative(&f, 3, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn finite_and_smooth_at_zero_and_one() {
        for f in [
            StaircaseFamily::symmetric(0.5).unwrap(),
            StaircaseFamily::asymmetric(0.5).unwrap(),
            StaircaseFamily::one_sided(0.5).unwrap(),
        ] {
            for s0 in [0.0, 1.0] {
                let centre = interval_contribution(&f, 8, c(s0, 0.0)).unwrap();
                assert!(centre.norm().is_finite() && centre.norm() > 0.0);
                for d in [1e-6, -1e-6] {
                    let near = interval_contribution(&f, 8, c(s0 + d, 0.0)).unwrap();
                    assert!(rel(near, centre) < 1e-5);
                }
            }
        }
    }

    #[test]
    fn symmetric_vanishes_at_minus_one() {
        // s = −1: ∫ g dx over a symmetric interval is zero.
        let f = StaircaseFamily::symmetric(0.5).unwrap();
        assert_eq!(interval_contribution(&f, 5, c(-1.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn first_order_cancellation() {
        let s = c(0.5, 0.0);
        for (f, second_order_survives) in [
            (StaircaseFamily::symmetric(0.5).unwrap(), false),
            (StaircaseFamily::asymmetric(0.5).unwrap(), true),
        ] {
            let ratios: Vec<(f64, f64)> = (f.i_start() + 20..f.i_start() + 40)
                .map(|i| {
                    let geo = f.interval(i).unwrap();
                    let scale = geo.center.powf(1.0 - s.re);
                    let g = interval_contribution(&f, i, s).unwrap().norm();
                    (g / (scale * geo.u_max()), g / (scale * geo.u_max().powi(2)))
                })
                .collect();
            assert!(ratios.last().unwrap().0 < 1e-5);
            let second = ratios.last().unwrap().1;
            if second_order_survives {
                // (c_up² − c_down²)/(2 c_up²) = 3/8
                assert!((second - 0.375).abs() < 1e-3, "{second}");
            } else {
                assert!(second < 1e-5, "{second}");
            }
        }
    }

    #[test]
    fn partial_sum_matches_quadrature() {
        let f = StaircaseFamily::one_sided(0.5).unwrap();
        let s = c(2.0, 0.0);
        let trace = partial_sum(&f, s, 40).unwrap();
        let end = f.interval(40).unwrap().upper();
        let q = integrate_piecewise(&f, s, 1.0, end, 1e-14).unwrap();
        assert!(rel(trace.total(), q.value) < 1e-9);

        let empty = partial_sum(&f, s, 0).unwrap();
        assert!(empty.per_interval.is_empty());
        assert_eq!(empty.total(), c(0.0, 0.0));
        assert!(partial_sum(&f, s, 60).is_err());
    }

    #[test]
    fn contribution_decay_rate() {
        let f = StaircaseFamily::one_sided(0.5).unwrap();
        let s = c(2.0, 0.0);
        let trace = partial_sum(&f, s, 40).unwrap();
        let e = fitted_exponent(
            &f,
            trace.per_interval.iter().map(|t| (t.index, t.contribution.norm())),
        )
        .unwrap();
        let expected = 2.0 * 0.5 - 1.0 - 2.0;
        assert!((e - expected).abs() <= 0.02 * expected.abs(), "{e}");
    }

    #[test]
    fn swing_behaviour() {
        let f = StaircaseFamily::symmetric(0.75).unwrap();
        // at s = 2γ − 1 the swing tends to 1/2 (the down half ≈ x^{1−s}u²/2)
        let at_abscissa: Vec<f64> = (f.i_start() + 20..f.i_cap())
            .map(|i| swing(&f, i, c(0.5, 0.0)).unwrap())
            .collect();
        let last = *at_abscissa.last().unwrap();
        assert!((last - 0.5).abs() < 0.01, "{last}");

        // corrections of relative size u_i = x_i^{γ−1} bend the fit near i_start
        let idx: Vec<u32> = (f.i_start() + 20..f.i_start() + 45).collect();
        for s in [0.6, 1.3, -0.2] {
            let e = fitted_exponent(&f, idx.iter().map(|&i| (i, swing(&f, i, c(s, 0.0)).unwrap()))).unwrap();
            let expected = 2.0 * 0.75 - 1.0 - s;
            assert!((e - expected).abs() <= 0.02 * expected.abs(), "s = {s}: {e} vs {expected}");
        }
    }

    #[test]
    fn swing_dominates_contribution_for_complex_s() {
        let f = StaircaseFamily::asymmetric(0.6).unwrap();
        for i in f.i_start()..f.i_start() + 10 {
            let s = c(0.3, 4.0);
            let sw = swing(&f, i, s).unwrap();
            let whole = interval_contribution(&f, i, s).unwrap().norm();
            assert!(sw >= whole);
            let geo = f.interval(i).unwrap();
            // brute-force the partial integral on a fine grid of right ends
            let mut best: f64 = 0.0;
            for k in 1..=64 {
                let t = geo.lower() + (geo.upper() - geo.lower()) * k as f64 / 64.0;
                let v = integrate_piecewise(&f, s, geo.lower(), t, 1e-12).unwrap().value.norm();
                best = best.max(v);
            }
            assert!(sw >= best * (1.0 - 2e-2), "i = {i}: {sw} vs {best}");
            assert!(sw <= best * (1.0 + 1e-9) + 1e-300, "i = {i}: {sw} vs {best}");
        }
    }

    #[test]
    fn classification_examples() {
        let sym = StaircaseFamily::symmetric(0.5).unwrap();
        assert!(classify_convergence(&sym, 0.2).unwrap().is_converged());
        let v = classify_convergence(&sym, -0.1).unwrap();
        assert!(matches!(v.kind, VerdictKind::Oscillating { .. }), "{v:?}");
        assert!(matches!(
            classify_convergence(&sym, 0.01),
            Err(TransformError::Undecidable { .. })
        ));

        let one = StaircaseFamily::one_sided(0.5).unwrap();
        let v = classify_convergence(&one, -0.1).unwrap();
        match v.kind {
            VerdictKind::Diverging { growth_rate, .. } => assert!(growth_rate > 1.0),
            other => panic!("{other:?}"),
        }
        let trace = partial_sum(&one, c(-0.1, 0.0), 59).unwrap();
        assert!(trace.per_interval.iter().all(|t| t.contribution.re > 0.0));
        assert!(trace.cumulative.windows(2).all(|w| w[1].re > w[0].re));
    }

    #[test]
    fn converged_value_matches_long_partial_sum() {
        let f = StaircaseFamily::one_sided(0.5).unwrap();
        let long = f.with_i_cap(600).unwrap();
        let s = 0.8;
        let reference = partial_sum(&long, c(s, 0.0), 599).unwrap().total();
        match classify_convergence(&f, s).unwrap().kind {
            VerdictKind::Converged { value } => assert!(rel(value, reference) < 1e-3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sigma_c_examples() {
        for (f, expected) in [
            (StaircaseFamily::one_sided(0.7).unwrap(), 0.4),
            (StaircaseFamily::symmetric(0.5).unwrap(), 0.0),
            (StaircaseFamily::symmetric(0.9).unwrap(), 0.8),
        ] {
            let est = estimate_sigma_c(&f, 0.05).unwrap();
            assert!((est.sigma_c - expected).abs() <= 0.05, "{est:?}");
            assert!(est.bracket.0 <= est.sigma_c && est.sigma_c <= est.bracket.1);
        }
        let f = StaircaseFamily::symmetric(0.5).unwrap();
        assert!(estimate_sigma_c(&f, 0.01).is_err());
        let trivial = StaircaseFamily::with_defaults(Variant::Symmetric, 0.5, 0.0, 0.0).unwrap();
        assert!(estimate_sigma_c(&trivial, 0.05).is_err());
    }
}

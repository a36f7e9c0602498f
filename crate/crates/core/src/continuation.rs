//! Meromorphic continuation of `G` and its pole lattice.
//!
//! Summing the interval series over `i` first gives
//!
//! ```text
//! G(s) = A · Σ_{j≥2} b_j(s) · κ_j · ρ_j(s)^{i₀} / (1 − ρ_j(s)),
//! κ_j = c_up^j − (−c_down)^j,   ρ_j(s) = b^{1 − s + j(γ − 1)},
//! ```
//!
//! which converges off the lattice `ρ_j = 1`, i.e. away from
//! `s = 1 + j(γ − 1) + 2πim / ln b`. A lattice point is cancelled when
//! `κ_j = 0` (even `j` for equal widths) or when `b_j` has a root there.
//!
//! The exchange of the `i` and `j` sums is only justified a priori where the
//! interval series converges absolutely; elsewhere the formula is the
//! continuation, and agreement with direct partial sums is what the overlap
//! tests check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::model::StaircaseFamily;
use crate::sum::ComplexSum;

/// Largest `j` tried before giving up on certifying the tail.
pub const MAX_J: u32 = 400;
/// `|1 − ρ_j|` below this is treated as sitting on the lattice.
pub const LATTICE_EPS: f64 = 1e-12;
/// Minimum distance from an uncancelled pole for [`continue_g`].
pub const POLE_GUARD: f64 = 1e-9;
/// Default relative tail tolerance.
pub const DEFAULT_TOL: f64 = 1e-13;

pub const FIT_SAMPLES: usize = 64;
pub const FIT_RADIUS_FRACTION: f64 = 0.01;
pub const ORDER_RESIDUAL_MAX: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("s = {s} hits the lattice of j = {j}")]
    PoleHit { j: u32, s: Complex64 },
    #[error("s = {s} is within {POLE_GUARD:e} of the uncancelled pole {pole} (j = {j})")]
    PoleProximity { j: u32, s: Complex64, pole: Complex64 },
    #[error("tail bound not certified by j = {j_max} at s = {s} (bound {bound:e})")]
    TailStall { s: Complex64, j_max: u32, bound: f64 },
    #[error("{p} is not within 0.1 of an uncancelled pole")]
    NotNearPole { p: Complex64 },
    #[error("contour fit around {center} failed: {reason}")]
    FitFailure { center: Complex64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuationValue {
    pub s: Complex64,
    pub value: Complex64,
    pub j_max: u32,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleInfo {
    pub j: u32,
    pub m: i64,
    pub location: Complex64,
    /// 1 for a live simple pole, 0 when cancelled.
    pub expected_order: u32,
    pub cancelled: bool,
    pub fitted_residue: Option<Complex64>,
    pub order_ok: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleFit {
    pub location: Complex64,
    pub residue: Complex64,
    pub order_ok: bool,
    /// `|μ₂ − μ₁²/μ₀| / (|μ₀| r²)`; zero for an exact simple pole.
    pub residual: f64,
    pub radius: f64,
}

/// `b_j(s) = (1/j!) ∏_{m=1}^{j−2} (−m − s)`, via `b₂ = 1/2`,
/// `b_{j+1} = b_j · (−(j − 1) − s)/(j + 1)`.
pub fn coeff_b(j: u32, s: Complex64) -> Complex64 {
    assert!(j >= 2, "b_j is defined for j ≥ 2");
    let mut b = Complex64::new(0.5, 0.0);
    for k in 2..j {
        let kf = f64::from(k);
        b *= (-(kf - 1.0) - s) / (kf + 1.0);
    }
    b
}

/// `d b_j / ds`, by the product rule over the linear factors.
pub fn coeff_b_derivative(j: u32, s: Complex64) -> Complex64 {
    assert!(j >= 2, "b_j is defined for j ≥ 2");
    let factorial: f64 = (1..=j).map(f64::from).product();
    let roots: Vec<Complex64> = (1..=j - 2).map(|m| -f64::from(m) - s).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for skip in 0..roots.len() {
        let prod: Complex64 = roots
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .map(|(_, r)| *r)
            .product();
        total -= prod;
    }
    total / factorial
}

/// `κ_j = c_up^j − (−c_down)^j`.
fn amplitude(family: &StaircaseFamily, j: u32) -> f64 {
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    family.c_up().powi(j as i32) - sign * family.c_down().powi(j as i32)
}

fn rho_exponent(family: &StaircaseFamily, j: u32, s: Complex64) -> Complex64 {
    (1.0 - s + f64::from(j) * (family.gamma() - 1.0)) * family.ln_base()
}

/// `Σ_{i ≥ i_start} ρ_j^i = ρ_j^{i_start} / (1 − ρ_j)`.
pub fn geom_factor(family: &StaircaseFamily, j: u32, s: Complex64) -> Result<Complex64, ContinuationError> {
    let log_rho = rho_exponent(family, j, s);
    let rho = log_rho.exp();
    if (1.0 - rho).norm() < LATTICE_EPS {
        return Err(ContinuationError::PoleHit { j, s });
    }
    Ok((log_rho * f64::from(family.i_start())).exp() / (1.0 - rho))
}

/// Real part of the `j`-th lattice column.
pub fn lattice_re(family: &StaircaseFamily, j: u32) -> f64 {
    1.0 + f64::from(j) * (family.gamma() - 1.0)
}

/// Spacing of the lattice along the imaginary axis.
pub fn lattice_period(family: &StaircaseFamily) -> f64 {
    2.0 * PI / family.ln_base()
}

fn lattice_point(family: &StaircaseFamily, j: u32, m: i64) -> Complex64 {
    Complex64::new(lattice_re(family, j), m as f64 * lattice_period(family))
}

/// Whether the residue at lattice point `(j, m)` vanishes identically.
pub fn is_cancelled(family: &StaircaseFamily, j: u32, m: i64) -> bool {
    if family.a_coeff() == 0.0 || amplitude(family, j) == 0.0 {
        return true;
    }
    // b_j vanishes at s = −1, …, −(j − 2).
    if m == 0 {
        let re = lattice_re(family, j);
        let k = (-re).round();
        if k >= 1.0 && k <= f64::from(j) - 2.0 && (re + k).abs() < LATTICE_EPS {
            return true;
        }
    }
    false
}

/// Lattice column and row closest to `s`.
fn nearest_lattice(family: &StaircaseFamily, s: Complex64) -> Option<(u32, i64)> {
    let j = ((1.0 - s.re) / (1.0 - family.gamma())).round();
    if !(j >= 2.0 && j.is_finite()) {
        return None;
    }
    let m = (s.im / lattice_period(family)).round() as i64;
    Some((j as u32, m))
}

/// Largest ratio `C · b^{i(γ−1)}` allowed where the `j`-expansion takes over.
const SPLIT_RATIO: f64 = 0.25;

/// First interval handled by the `j`-expansion; earlier ones are summed directly.
fn split_index(family: &StaircaseFamily) -> u32 {
    let big_c = family.c_up().max(family.c_down());
    let step = (1.0 - family.gamma()) * family.ln_base();
    let needed = ((big_c / SPLIT_RATIO).ln() / step).ceil();
    let start = family.i_start();
    if needed.is_finite() && needed > f64::from(start) {
        needed as u32
    } else {
        start
    }
}

/// Continued `G(s)` with a certified bound on the neglected `j`-tail.
///
/// Intervals `i_start ≤ i < i₀` are summed directly (each is entire in `s`);
/// from `i₀` on, where `C · b^{i₀(γ−1)} ≤ 1/4`, the sum over `i` is done in
/// closed form for every power `j`. The tail after term `J` is bounded with `|b_{j+1}/b_j| ≤ (j − 1 + |s|)/(j + 1)`,
/// `|κ_j| ≤ 2 C^j` and `|ρ_j^{i₀}/(1 − ρ_j)| ≤ ρ̂_j^{i₀}/(1 − ρ̂_j)` for
/// `ρ̂_j = |ρ_j| < 1`, which together decay like `U₀^j` with
/// `U₀ = C · b^{i₀(γ−1)} < 1`.
pub fn continue_g(
    family: &StaircaseFamily,
    s: Complex64,
    tol: f64,
) -> Result<ContinuationValue, ContinuationError> {
    if family.is_trivial() {
        return Ok(ContinuationValue {
            s,
            value: Complex64::new(0.0, 0.0),
            j_max: 3,
            tail_bound: 0.0,
        });
    }
    if let Some((j, m)) = nearest_lattice(family, s) {
        let pole = lattice_point(family, j, m);
        if (s - pole).norm() < POLE_GUARD && !is_cancelled(family, j, m) {
            return Err(ContinuationError::PoleProximity { j, s, pole });
        }
    }

    let gamma = family.gamma();
    let ln_b = family.ln_base();
    let split = split_index(family);
    let i0 = f64::from(split);
    let mut acc = ComplexSum::new();
    for i in family.i_start()..split {
        acc.add(crate::transform::contribution_of(family, &family.geometry(i), s) / family.a_coeff());
    }
    let big_c = family.c_up().max(family.c_down());
    let u0 = big_c * (i0 * (gamma - 1.0) * ln_b).exp();
    let s_abs = s.norm();

    let mut b = Complex64::new(0.5, 0.0);
    let mut j = 2u32;
    let mut bound = f64::INFINITY;
    loop {
        let kappa = amplitude(family, j);
        if kappa != 0.0 {
            let log_rho = rho_exponent(family, j, s);
            let rho = log_rho.exp();
            let lead = (log_rho * i0).exp();
            let term = if (1.0 - rho).norm() < LATTICE_EPS {
                // removable: b_j vanishes on this lattice point
                coeff_b_derivative(j, s) * lead / ln_b
            } else {
                b * lead / (1.0 - rho)
            };
            acc.add(term * kappa);
        }

        // bound on Σ_{k > j} |term_k|
        let jn = j + 1;
        let jf = f64::from(jn);
        let b_next = b * (-(jf - 2.0) - s) / jf;
        let rho_hat = ((1.0 - s.re + jf * (gamma - 1.0)) * ln_b).exp();
        if rho_hat < 1.0 {
            let q = u0 * ((jf - 1.0 + s_abs) / (jf + 1.0)).max(1.0);
            if q < 1.0 {
                let first = b_next.norm()
                    * 2.0
                    * big_c.powi(jn as i32)
                    * (rho_hat.ln() * i0).exp()
                    / (1.0 - rho_hat);
                bound = first / (1.0 - q);
                let value = acc.value().norm();
                if j >= 3 && (bound <= tol * value || bound <= 1e-300) {
                    break;
                }
            }
        }
        if j >= MAX_J {
            return Err(ContinuationError::TailStall { s, j_max: j, bound });
        }
        b = b_next;
        j = jn;
    }
    Ok(ContinuationValue {
        s,
        value: acc.value() * family.a_coeff(),
        j_max: j,
        tail_bound: bound * family.a_coeff(),
    })
}

/// [`continue_g`] over a batch of points, in input order.
pub fn continue_grid(
    family: &StaircaseFamily,
    points: &[Complex64],
    tol: f64,
    exec: Execution,
) -> Vec<Result<ContinuationValue, ContinuationError>> {
    exec::map(exec, points, |&s| continue_g(family, s, tol))
}

/// Lattice points in `[re.0, re.1] × [im.0, im.1]`, sorted by real part
/// descending then imaginary part ascending, with cancellation flags.
pub fn poles(family: &StaircaseFamily, re: (f64, f64), im: (f64, f64)) -> Vec<PoleInfo> {
    let mut out = Vec::new();
    let period = lattice_period(family);
    let m_lo = (im.0 / period - 1e-12).ceil() as i64;
    let m_hi = (im.1 / period + 1e-12).floor() as i64;
    let mut j = 2u32;
    loop {
        let x = lattice_re(family, j);
        if x < re.0 - 1e-12 {
            break;
        }
        if x <= re.1 + 1e-12 {
            for m in m_lo..=m_hi {
                let cancelled = is_cancelled(family, j, m);
                out.push(PoleInfo {
                    j,
                    m,
                    location: lattice_point(family, j, m),
                    expected_order: if cancelled { 0 } else { 1 },
                    cancelled,
                    fitted_residue: None,
                    order_ok: None,
                });
            }
        }
        j += 1;
    }
    out
}

/// Fills `fitted_residue` and `order_ok` for every uncancelled entry.
pub fn fit_poles(family: &StaircaseFamily, poles: &[PoleInfo], exec: Execution) -> Vec<PoleInfo> {
    exec::map(exec, poles, |p| {
        let mut p = *p;
        if !p.cancelled {
            if let Ok(fit) = fit_pole(family, p.location) {
                p.fitted_residue = Some(fit.residue);
                p.order_ok = Some(fit.order_ok);
            } else {
                p.order_ok = Some(false);
            }
        }
        p
    })
}

/// The first uncancelled pole on the real axis, which is the rightmost pole
/// overall since every row of the lattice shares the same real parts.
pub fn rightmost_pole(family: &StaircaseFamily) -> Option<PoleInfo> {
    if family.is_trivial() {
        return None;
    }
    (2..=MAX_J)
        .find(|&j| !is_cancelled(family, j, 0))
        .map(|j| PoleInfo {
            j,
            m: 0,
            location: lattice_point(family, j, 0),
            expected_order: 1,
            cancelled: false,
            fitted_residue: None,
            order_ok: None,
        })
}

/// Exact residue at an uncancelled lattice point:
/// `A · κ_j · b_j(p) / ln b` (since `1 − ρ_j(s) ≈ ln b · (s − p)`).
pub fn analytic_residue(family: &StaircaseFamily, j: u32, m: i64) -> Complex64 {
    let p = lattice_point(family, j, m);
    coeff_b(j, p) * amplitude(family, j) * family.a_coeff() / family.ln_base()
}

/// Contour-moment fit of the pole nearest `p`.
///
/// Samples `G` at [`FIT_SAMPLES`] points on a circle of radius
/// `0.01 · min(1 − γ, 2π/ln b)` around the lattice point and forms the
/// trapezoidal moments `μ_n = (1/2πi) ∮ G(z)(z − c)^n dz`. A simple pole at
/// `p₀` with residue `R` gives `μ_n = R (p₀ − c)^n`, so `p₀ = c + μ₁/μ₀` and
/// `μ₂ − μ₁²/μ₀` measures any higher-order part.
pub fn fit_pole(family: &StaircaseFamily, p: Complex64) -> Result<PoleFit, ContinuationError> {
    let (j, m) = nearest_lattice(family, p).ok_or(ContinuationError::NotNearPole { p })?;
    let center = lattice_point(family, j, m);
    if (center - p).norm() > 0.1 || is_cancelled(family, j, m) {
        return Err(ContinuationError::NotNearPole { p });
    }
    let spacing = (1.0 - family.gamma()).min(lattice_period(family));
    let radius = FIT_RADIUS_FRACTION * spacing;
    let offsets: Vec<Complex64> = (0..FIT_SAMPLES)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / FIT_SAMPLES as f64))
        .collect();
    let samples = exec::try_map(Execution::default(), &offsets, |&d| {
        continue_g(family, center + d, DEFAULT_TOL).map(|v| v.value)
    })?;

    let moment = |n: i32| -> Complex64 {
        let acc: ComplexSum = samples
            .iter()
            .zip(&offsets)
            .map(|(g, d)| g * d.powi(n + 1))
            .collect();
        acc.value() / FIT_SAMPLES as f64
    };
    let (mu0, mu1, mu2) = (moment(0), moment(1), moment(2));
    let fail = |reason: String| ContinuationError::FitFailure { center, reason };
    if !(mu0.norm() > 0.0) || !mu0.norm().is_finite() {
        return Err(fail(format!("zeroth moment is {mu0}")));
    }
    let shift = mu1 / mu0;
    if shift.norm() > 0.5 * radius {
        return Err(fail(format!("fitted pole moved by {} (radius {radius})", shift.norm())));
    }
    let residual = (mu2 - mu1 * mu1 / mu0).norm() / (mu0.norm() * radius * radius);
    Ok(PoleFit {
        location: center + shift,
        residue: mu0,
        order_ok: residual < ORDER_RESIDUAL_MAX,
        residual,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variant;
    use crate::transform::partial_sum;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coefficient_examples() {
        for s in [c(0.0, 0.0), c(-3.0, 2.0), c(7.5, -1.0)] {
            assert_eq!(coeff_b(2, s), c(0.5, 0.0));
            assert!((coeff_b(3, s) - (-(s + 1.0) / 6.0)).norm() < 1e-15);
        }
        assert_eq!(coeff_b(3, c(-1.0, 0.0)), c(0.0, 0.0));
        for j in 3..12 {
            assert_eq!(coeff_b(j, c(-1.0, 0.0)), c(0.0, 0.0));
        }
    }

    #[test]
    fn coefficients_match_binomial_definition() {
        // b_j = C(−s−1, j−2) / (j(j−1))
        let s = c(0.37, -1.2);
        let mut binom = c(1.0, 0.0);
        for j in 2u32..20 {
            let k = j - 2;
            if k > 0 {
                binom *= (-s - 1.0 - f64::from(k - 1)) / f64::from(k);
            }
            let expected = binom / f64::from(j * (j - 1));
            assert!((coeff_b(j, s) - expected).norm() <= 1e-14 * expected.norm());
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for j in [3u32, 5, 8] {
            let s = c(-1.3, 0.4);
            let h = 1e-6;
            let fd = (coeff_b(j, s + h) - coeff_b(j, s - h)) / (2.0 * h);
            assert!((coeff_b_derivative(j, s) - fd).norm() < 1e-8 * fd.norm().max(1.0));
        }
    }

    #[test]
    fn geom_factor_examples() {
        let f = StaircaseFamily::symmetric(0.5).unwrap();
        assert!(matches!(geom_factor(&f, 3, c(-0.5, 0.0)), Err(ContinuationError::PoleHit { .. })));
        let shifted = c(-0.5, lattice_period(&f));
        assert!(matches!(geom_factor(&f, 3, shifted), Err(ContinuationError::PoleHit { .. })));
        let far = geom_factor(&f, 3, c(200.0, 0.0)).unwrap();
        assert!(far.norm() < 1e-100);
        // ρ = 1/2 at s = 0.5 − 1 ... direct check of the closed sum
        let s = c(0.7, 0.3);
        let direct: ComplexSum = (f.i_start()..400)
            .map(|i| (rho_exponent(&f, 3, s) * f64::from(i)).exp())
            .collect();
        let g = geom_factor(&f, 3, s).unwrap();
        assert!((g - direct.value()).norm() < 1e-14 * g.norm());
    }

    #[test]
    fn trivial_family_continues_to_zero() {
        let f = StaircaseFamily::with_defaults(Variant::Symmetric, 0.5, 0.0, 0.0).unwrap();
        let v = continue_g(&f, c(-0.5, 0.0), DEFAULT_TOL).unwrap();
        assert_eq!(v.value, c(0.0, 0.0));
        assert!(rightmost_pole(&f).is_none());
    }

    #[test]
    fn agrees_with_partial_sums_inside_convergence_region() {
        let f = StaircaseFamily::symmetric(0.5).unwrap();
        let s = c(0.5, 0.0);
        let trace = partial_sum(&f, s, 50).unwrap();
        let last = trace.per_interval.last().unwrap().contribution;
        // contributions shrink by 2^{3γ−2−s} = 1/2 per interval
        let limit = trace.total() + last;
        let v = continue_g(&f, s, DEFAULT_TOL).unwrap();
        assert!((v.value - limit).norm() <= 1e-8 * limit.norm(), "{} vs {limit}", v.value);
        assert!(v.tail_bound <= 1e-12 * v.value.norm());
        assert!(v.j_max >= 3);
    }

    #[test]
    fn finite_between_pole_and_abscissa_and_blows_up_at_pole() {
        let f = StaircaseFamily::symmetric(0.5).unwrap();
        let v = continue_g(&f, c(-0.4, 0.0), DEFAULT_TOL).unwrap();
        assert!(v.value.norm().is_finite());
        let mags: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|d| continue_g(&f, c(-0.5 + d, 0.0), DEFAULT_TOL).unwrap().value.norm())
            .collect();
        assert!(mags.windows(2).all(|w| w[1] > 5.0 * w[0]), "{mags:?}");
        assert!(matches!(
            continue_g(&f, c(-0.5 + 1e-10, 0.0), DEFAULT_TOL),
            Err(ContinuationError::PoleProximity { .. })
        ));
    }

    #[test]
    fn cancelled_lattice_point_is_regular() {
        let f = StaircaseFamily::symmetric(0.5).unwrap();
        // j = 2 column at s = 0 has κ₂ = 0
        let at = continue_g(&f, c(0.0, 0.0), DEFAULT_TOL).unwrap().value;
        let near = continue_g(&f, c(1e-7, 0.0), DEFAULT_TOL).unwrap().value;
        assert!((at - near).norm() < 1e-5 * at.norm());
        // b_4 vanishes at s = −1 = 1 + 4(γ − 1) for γ = 1/2 (also κ₄ = 0 here),
        // and for a one-sided family with γ = 1/2 the j = 4 point is cancelled by b_4 alone
        let one = StaircaseFamily::one_sided(0.5).unwrap();
        assert!(is_cancelled(&one, 4, 0));
        assert!(!is_cancelled(&one, 4, 1));
        let at = continue_g(&one, c(-1.0, 0.0), DEFAULT_TOL).unwrap().value;
        let near = continue_g(&one, c(-1.0 + 1e-6, 1e-6), DEFAULT_TOL).unwrap().value;
        assert!((at - near).norm() < 1e-4 * at.norm().max(1.0), "{at} vs {near}");
    }

    #[test]
    fn pole_enumeration_examples() {
        let sym = StaircaseFamily::symmetric(0.5).unwrap();
        let ps = poles(&sym, (-1.0, 0.0), (0.0, 0.0));
        let live: Vec<_> = ps.iter().filter(|p| !p.cancelled).collect();
        assert_eq!(live.len(), 1);
        assert_eq!((live[0].j, live[0].m), (3, 0));
        assert_eq!(live[0].location, c(-0.5, 0.0));
        let j2 = ps.iter().find(|p| p.j == 2).unwrap();
        assert!(j2.cancelled && j2.location == c(0.0, 0.0));
        assert!(ps.windows(2).all(|w| w[0].location.re >= w[1].location.re));

        let one = StaircaseFamily::one_sided(0.5).unwrap();
        assert_eq!(rightmost_pole(&one).unwrap().location, c(0.0, 0.0));
        let asym = StaircaseFamily::asymmetric(0.5).unwrap();
        let first = rightmost_pole(&asym).unwrap();
        assert_eq!((first.j, first.location), (2, c(0.0, 0.0)));

        let with_rows = poles(&sym, (-1.0, 0.0), (0.0, 10.0));
        let live: Vec<_> = with_rows.iter().filter(|p| !p.cancelled).collect();
        assert_eq!(live.len(), 2);
        assert!((live[1].location.im - 2.0 * PI / std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn fit_examples() {
        let one = StaircaseFamily::one_sided(0.5).unwrap();
        let fit = fit_pole(&one, c(0.0, 0.0)).unwrap();
        assert!(fit.order_ok, "{fit:?}");
        assert!(fit.location.norm() < 1e-6);
        let expected = analytic_residue(&one, 2, 0);
        assert!((fit.residue - expected).norm() < 1e-8 * expected.norm());

        let sym = StaircaseFamily::symmetric(0.5).unwrap();
        let fit = fit_pole(&sym, c(-0.52, 0.01)).unwrap();
        let hand = -1.0 / (6.0 * std::f64::consts::LN_2);
        assert!((fit.residue - hand).norm() < 1e-8, "{}", fit.residue);
        assert!((analytic_residue(&sym, 3, 0).re - hand).abs() < 1e-15);
        assert!(fit_pole(&sym, c(0.0, 0.0)).is_err());
        assert!(fit_pole(&sym, c(-0.3, 0.0)).is_err());
    }

    #[test]
    fn coefficient_zero_on_lattice_is_flagged() {
        // γ = 1/3: the j = 3 column sits at s = −1 where b_3 vanishes
        let f = StaircaseFamily::symmetric(1.0 / 3.0).unwrap();
        assert!(is_cancelled(&f, 3, 0));
        assert!(!is_cancelled(&f, 3, 1));
        assert_eq!(rightmost_pole(&f).unwrap().j, 5);
    }
}

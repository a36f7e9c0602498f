//! Estimators tying the numerics back to growth statements about `f`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::continuation;
use crate::exec::{self, Execution};
use crate::model::{pow_base, ModelError, StaircaseFamily, Variant};
use crate::quadrature::{self, integrate_piecewise, QuadratureError};
use crate::transform::{self, TransformError};

/// Leading blocks dropped from exponent regressions.
pub const TRANSIENT_BLOCKS: u32 = 5;
/// Minimum number of active intervals for [`estimate_exponent`].
pub const MIN_ACTIVE: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("degenerate family: g vanishes identically")]
    Degenerate,
    #[error("need at least {needed} active intervals, have {have}")]
    TooFewIntervals { needed: u32, have: u32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("x1 = {0} is not an interval centre of the witness family")]
    NotAWitness(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub gamma_emp: f64,
    pub blocks_used: u32,
    pub fit_residual: f64,
}

fn fit_blocks(maxima: &[(u32, f64)], ln_b: f64) -> Option<ExponentEstimate> {
    let points: Vec<(f64, f64)> = maxima
        .iter()
        .filter(|(_, m)| *m > 0.0 && m.is_finite())
        .map(|&(k, m)| (f64::from(k) * ln_b, m.ln()))
        .collect();
    quadrature::regression(&points).map(|(slope, _, residual)| ExponentEstimate {
        gamma_emp: slope,
        blocks_used: points.len() as u32,
        fit_residual: residual,
    })
}

/// Growth exponent of `g` from per-block maxima `M_k = sup |g|` over
/// breakpoint-adjacent samples in `[b^k, b^{k+1}]`, regressed against `k ln b`.
pub fn estimate_exponent(family: &StaircaseFamily) -> Result<ExponentEstimate, DiagnosticsError> {
    if family.is_trivial() {
        return Err(DiagnosticsError::Degenerate);
    }
    if family.active_count() < MIN_ACTIVE {
        return Err(DiagnosticsError::TooFewIntervals {
            needed: MIN_ACTIVE,
            have: family.active_count(),
        });
    }
    let base = family.base();
    let mut maxima = Vec::new();
    for k in family.i_start() + TRANSIENT_BLOCKS..family.i_cap() {
        let lo = pow_base(base, f64::from(k));
        let hi = pow_base(base, f64::from(k + 1));
        let mut sup: f64 = 0.0;
        for x in family.breakpoint_samples(lo, hi) {
            sup = sup.max(family.eval_g(x)?.abs());
        }
        maxima.push((k, sup));
    }
    fit_blocks(&maxima, family.ln_base()).ok_or(DiagnosticsError::Degenerate)
}

/// Points per block sampled by [`estimate_exponent_generic`].
const GENERIC_SAMPLES: u32 = 9;

/// Growth exponent of `func(x) − a·x` over dyadic blocks `k ∈ blocks`,
/// from the maximum over log-spaced samples in each block.
pub fn estimate_exponent_generic<F: Fn(f64) -> f64>(
    func: F,
    a_coeff: f64,
    blocks: std::ops::Range<u32>,
) -> Result<ExponentEstimate, DiagnosticsError> {
    let mut maxima = Vec::new();
    for k in blocks {
        let mut sup: f64 = 0.0;
        for p in 0..GENERIC_SAMPLES {
            let x = (f64::from(k) + f64::from(p) / f64::from(GENERIC_SAMPLES - 1)).exp2();
            if !x.is_finite() {
                return Err(DiagnosticsError::Precondition(format!("block {k} overflows")));
            }
            sup = sup.max((func(x) - a_coeff * x).abs());
        }
        maxima.push((k, sup));
    }
    fit_blocks(&maxima, std::f64::consts::LN_2).ok_or(DiagnosticsError::Degenerate)
}

/// Median of `f(x)/x` over the probes.
pub fn estimate_a<F: Fn(f64) -> f64>(func: F, probes: &[f64]) -> f64 {
    let mut ratios: Vec<f64> = probes.iter().map(|&x| func(x) / x).collect();
    if ratios.is_empty() {
        return f64::NAN;
    }
    ratios.sort_by(f64::total_cmp);
    let n = ratios.len();
    if n % 2 == 1 {
        ratios[n / 2]
    } else {
        0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
    }
}

/// [`estimate_a`] for a staircase family.
pub fn estimate_a_family(family: &StaircaseFamily, probes: &[f64]) -> Result<f64, DiagnosticsError> {
    for &x in probes {
        family.eval_f(x)?;
    }
    Ok(estimate_a(|x| family.eval_f(x).unwrap_or(f64::NAN), probes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaBound {
    pub x1: f64,
    pub x2: f64,
    pub integral: Complex64,
    pub bound: f64,
    pub pass: bool,
}

/// Lower bound for `∫_{x1}^{x2} (f − A x) x^{-s-1} dx` on the interval that
/// follows a jump `f(x1) − A x1 ≥ C x1^γ` of a non-decreasing `f`.
///
/// With `x2 = x1 + C x1^γ / (2A)`, `f − A x ≥ C x1^γ / 2` on `[x1, x2]`,
/// hence the integral is at least `C²/(8A) · x1^{2γ−s−1}` for
/// `−1 ≤ s ≤ 2γ − 1`. The witness `f` is the one-sided staircase scaled by
/// `A` with upward amplitude `C/A`, and `x1` must be one of its centres.
pub fn omega_lower_bound(
    a_coeff: f64,
    c: f64,
    gamma: f64,
    x1: f64,
    s: f64,
) -> Result<OmegaBound, DiagnosticsError> {
    if !(a_coeff > 0.0 && a_coeff.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(DiagnosticsError::Precondition(format!(
            "need A > 0 and C > 0 (A = {a_coeff}, C = {c})"
        )));
    }
    if !(s <= 2.0 * gamma - 1.0 && s >= -1.0) {
        return Err(DiagnosticsError::Precondition(format!(
            "s = {s} is outside [-1, 2γ − 1] = [-1, {}]",
            2.0 * gamma - 1.0
        )));
    }
    let k = x1.log2().round();
    if !(k >= 1.0 && k.exp2() == x1) {
        return Err(DiagnosticsError::NotAWitness(x1));
    }
    let i_cap = (k as u32).max(crate::model::DEFAULT_I_CAP);
    let family = StaircaseFamily::new(Variant::OneSided, gamma, c / a_coeff, 0.0, 2.0, i_cap)?
        .with_a_coeff(a_coeff)?;
    if (k as u32) < family.i_start() {
        return Err(DiagnosticsError::NotAWitness(x1));
    }
    let jump = family.eval_g(x1)?;
    // the level x1 + h is stored rounded to a multiple of ulp(x1)
    if jump + 4.0 * f64::EPSILON * a_coeff * x1 < c * x1.powf(gamma) {
        return Err(DiagnosticsError::NotAWitness(x1));
    }
    let x2 = x1 + c * x1.powf(gamma) / (2.0 * a_coeff);
    let integral = integrate_piecewise(&family, Complex64::new(s, 0.0), x1, x2, 1e-12)?.value;
    let bound = c * c / (8.0 * a_coeff) * x1.powf(2.0 * gamma - s - 1.0);
    Ok(OmegaBound {
        x1,
        x2,
        integral,
        bound,
        pass: integral.re >= bound * (1.0 - 1e-6),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub gamma: f64,
    pub variant: Variant,
    pub sigma_c: f64,
    /// Real part of the rightmost uncancelled pole.
    pub alpha_holo: f64,
    /// `(α + 1)/2`: the exponent a pole at `α` implies when the leading
    /// interval term is quadratic in `u`.
    pub implied_gamma_2: f64,
    /// `(α + 2)/3`: the same for a cubic leading term.
    pub implied_gamma_3: f64,
    pub gamma_emp: Option<f64>,
    pub flags: Vec<String>,
}

/// The family used by the scan for each variant.
pub fn scan_family(variant: Variant, gamma: f64) -> Result<StaircaseFamily, ModelError> {
    match variant {
        Variant::OneSided => StaircaseFamily::one_sided(gamma),
        Variant::Symmetric => StaircaseFamily::symmetric(gamma),
        Variant::Asymmetric => StaircaseFamily::asymmetric(gamma),
    }
}

fn scan_row(gamma: f64, variant: Variant) -> ScanRow {
    let mut row = ScanRow {
        gamma,
        variant,
        sigma_c: f64::NAN,
        alpha_holo: f64::NAN,
        implied_gamma_2: f64::NAN,
        implied_gamma_3: f64::NAN,
        gamma_emp: None,
        flags: Vec::new(),
    };
    let family = match scan_family(variant, gamma) {
        Ok(f) => f,
        Err(e) => {
            row.flags.push(format!("invalid_family: {e}"));
            return row;
        }
    };
    match transform::estimate_sigma_c(&family, 0.05) {
        Ok(est) => {
            row.sigma_c = est.sigma_c;
            if est.dead_zone {
                row.flags.push("dead_zone".into());
            }
        }
        Err(e) => row.flags.push(format!("sigma_c: {e}")),
    }
    if let Some(pole) = continuation::rightmost_pole(&family) {
        let alpha = pole.location.re;
        row.alpha_holo = alpha;
        row.implied_gamma_2 = (alpha + 1.0) / 2.0;
        row.implied_gamma_3 = (alpha + 2.0) / 3.0;
    } else {
        row.flags.push("no_pole".into());
    }
    match estimate_exponent(&family) {
        Ok(e) => row.gamma_emp = Some(e.gamma_emp),
        Err(e) => row.flags.push(format!("exponent: {e}")),
    }
    if row.alpha_holo > row.sigma_c + 1e-9 {
        row.flags.push("sigma_c_measured_below_alpha_holo".into());
    }
    row
}

/// Rightmost pole, measured abscissa and the two exponent predictions for
/// every `(γ, variant)` pair, in grid order (γ outer, variant inner).
pub fn exponent_scan(gammas: &[f64], variants: &[Variant]) -> Vec<ScanRow> {
    exponent_scan_with(gammas, variants, Execution::default())
}

pub fn exponent_scan_with(gammas: &[f64], variants: &[Variant], exec: Execution) -> Vec<ScanRow> {
    let grid: Vec<(f64, Variant)> = gammas
        .iter()
        .flat_map(|&g| variants.iter().map(move |&v| (g, v)))
        .collect();
    exec::map(exec, &grid, |&(g, v)| scan_row(g, v))
}

/// One line of [`verify_family`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

fn row(check: &str, outcome: Result<String, String>) -> VerifyRow {
    let (pass, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    VerifyRow {
        check: check.into(),
        pass,
        detail,
    }
}

fn ensure(ok: bool, detail: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail())
    }
}

/// Runs every structural check that applies to `family`: abscissa, first
/// pole and its order, lattice periodicity, continuation, cancellation
/// order, closed form vs quadrature, continuation vs partial sums, the
/// intra-interval lower bound and the growth exponent.
pub fn verify_family(family: &StaircaseFamily, exec: Execution) -> Vec<VerifyRow> {
    let gamma = family.gamma();
    let abscissa = 2.0 * gamma - 1.0;
    let order = if family.c_up() == family.c_down() { 3.0 } else { 2.0 };
    let expected_pole = 1.0 - order * (1.0 - gamma);
    let mut rows = Vec::new();
    if family.is_trivial() {
        rows.push(row("family is non-trivial", Err("g vanishes identically".into())));
        return rows;
    }

    rows.push(row(
        "abscissa of convergence equals 2γ−1 (±0.05)",
        transform::estimate_sigma_c(family, 0.05)
            .map_err(|e| e.to_string())
            .and_then(|est| {
                ensure((est.sigma_c - abscissa).abs() <= 0.05, || {
                    format!("σ_c = {:.4}, expected {abscissa:.4}", est.sigma_c)
                })?;
                Ok(format!("σ_c = {:.4} in [{:.4}, {:.4}]", est.sigma_c, est.bracket.0, est.bracket.1))
            }),
    ));

    let pole = continuation::rightmost_pole(family);
    let pole_name = if order == 3.0 {
        "rightmost pole at 3γ−2, simple"
    } else {
        "rightmost pole at 2γ−1, simple"
    };
    rows.push(row(
        pole_name,
        pole.ok_or_else(|| "no uncancelled pole".to_string()).and_then(|p| {
            ensure((p.location.re - expected_pole).abs() <= 1e-9, || {
                format!("pole at {} (j = {}), expected {expected_pole:.6}", p.location, p.j)
            })?;
            let fit = continuation::fit_pole(family, p.location).map_err(|e| e.to_string())?;
            let offset = (fit.location - p.location).norm();
            ensure(fit.order_ok && offset <= 1e-4, || format!("fit {fit:?}"))?;
            Ok(format!("p = {:.6}, fit offset {offset:.1e}, residue {:.6}", p.location.re, fit.residue))
        }),
    ));

    rows.push(row(
        "poles repeat with period 2πi/ln b",
        pole.ok_or_else(|| "no uncancelled pole".to_string()).and_then(|p| {
            let shifted = p.location + Complex64::new(0.0, continuation::lattice_period(family));
            let fit = continuation::fit_pole(family, shifted).map_err(|e| e.to_string())?;
            let offset = (fit.location - shifted).norm();
            ensure(fit.order_ok && offset <= 1e-4, || format!("fit {fit:?}"))?;
            Ok(format!("simple pole at {shifted:.4}, fit offset {offset:.1e}"))
        }),
    ));

    let alpha = pole.map_or(expected_pole, |p| p.location.re);
    let mid = if alpha < abscissa - 1e-9 {
        0.5 * (alpha + abscissa)
    } else {
        alpha - 0.5 * (1.0 - gamma)
    };
    rows.push(row(
        "continuation finite left of the abscissa",
        continuation::continue_g(family, Complex64::new(mid, 0.0), continuation::DEFAULT_TOL)
            .map_err(|e| e.to_string())
            .and_then(|v| {
                ensure(v.value.re.is_finite() && v.value.im.is_finite(), || format!("G({mid}) = {}", v.value))?;
                Ok(format!("G({mid:.4}) = {:.6e}", v.value.re))
            }),
    ));

    rows.push(row(
        if order == 3.0 {
            "contributions scale as x^{1−s+3(γ−1)} (2%)"
        } else {
            "contributions scale as x^{1−s+2(γ−1)} (2%)"
        },
        check_slopes(family, order),
    ));
    rows.push(row("closed form matches quadrature (1e−9)", check_oracle(family, exec)));
    rows.push(row("continuation matches partial sums (1e−8)", check_overlap(family, exec)));
    rows.push(row("intra-interval lower bound C²/(8A)·x^{2γ−s−1}", check_omega(family)));
    rows.push(row(
        "growth exponent of g equals γ (±0.02)",
        estimate_exponent(family).map_err(|e| e.to_string()).and_then(|e| {
            ensure((e.gamma_emp - gamma).abs() <= 0.02, || format!("γ_emp = {:.4}", e.gamma_emp))?;
            Ok(format!("γ_emp = {:.4} over {} blocks", e.gamma_emp, e.blocks_used))
        }),
    ));
    rows
}

fn check_slopes(family: &StaircaseFamily, order: f64) -> Result<String, String> {
    // a long family pushes the window past the x^{γ−1} corrections
    let long = family.with_i_cap(family.i_cap().max(120)).map_err(|e| e.to_string())?;
    let hi = long.i_cap();
    let lo = hi.saturating_sub(24).max(long.i_start());
    let mut worst: f64 = 0.0;
    for re in [-0.25, 0.25, 1.0, 1.5, 2.0] {
        let expected = 1.0 - re + order * (family.gamma() - 1.0);
        if expected.abs() < 0.05 {
            continue;
        }
        let s = Complex64::new(re, 0.0);
        let mut values = Vec::new();
        for i in lo..=hi {
            values.push((i, transform::interval_contribution(&long, i, s).map_err(|e| e.to_string())?.norm()));
        }
        let e = transform::fitted_exponent(&long, values).ok_or("slope fit failed")?;
        let rel = (e - expected).abs() / expected.abs();
        worst = worst.max(rel);
        ensure(rel <= 0.02, || format!("s = {re}: slope {e:.5}, expected {expected:.5}"))?;
    }
    Ok(format!("max relative slope error {:.3}%", 100.0 * worst))
}

fn check_oracle(family: &StaircaseFamily, exec: Execution) -> Result<String, String> {
    let last = family.i_cap().min(family.i_start() + 25);
    let indices: Vec<u32> = (family.i_start()..=last).collect();
    let grid: Vec<Complex64> = [-0.5, 0.0, 0.5, 1.0, 1.5, 2.0]
        .iter()
        .flat_map(|&re| [0.0, 1.0, 9.06].map(move |im| Complex64::new(re, im)))
        .collect();
    let worst = exec::try_map(exec, &indices, |&i| {
        let geo = family.interval(i).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for &s in &grid {
            let closed = transform::interval_contribution(family, i, s).map_err(|e| e.to_string())?;
            let quad = integrate_piecewise(family, s, geo.lower(), geo.upper(), 1e-13)
                .map_err(|e| e.to_string())?
                .value;
            let rel = (closed - quad).norm() / quad.norm().max(1e-14);
            ensure(rel <= 1e-9, || format!("i = {i}, s = {s}: {closed} vs {quad}"))?;
            worst = worst.max(rel);
        }
        Ok::<f64, String>(worst)
    })?
    .into_iter()
    .fold(0.0, f64::max);
    Ok(format!("{} cases, max relative error {worst:.1e}", indices.len() * grid.len()))
}

fn check_overlap(family: &StaircaseFamily, exec: Execution) -> Result<String, String> {
    let abscissa = 2.0 * family.gamma() - 1.0;
    let points: Vec<Complex64> = [0.1, 0.5, 1.0]
        .iter()
        .flat_map(|&d| [0.0, 3.0, 9.06].map(move |im| Complex64::new(abscissa + d, im)))
        .collect();
    let long = family.with_i_cap(1000).map_err(|e| e.to_string())?;
    let worst = exec::try_map(exec, &points, |&s| {
        let limit = transform::partial_sum_with(&long, s, long.i_cap() - long.i_start(), Execution::Sequential)
            .map_err(|e| e.to_string())?
            .total();
        let g = continuation::continue_g(family, s, 1e-14).map_err(|e| e.to_string())?.value;
        let err = (g - limit).norm() / g.norm().max(1.0);
        ensure(err <= 1e-8, || format!("s = {s}: {g} vs {limit}"))?;
        Ok::<f64, String>(err)
    })?
    .into_iter()
    .fold(0.0, f64::max);
    Ok(format!("{} points, max error {worst:.1e}", points.len()))
}

fn check_omega(family: &StaircaseFamily) -> Result<String, String> {
    let gamma = family.gamma();
    let c = family.c_up().max(family.c_down());
    let mut cases = 0;
    let mut margin = f64::INFINITY;
    for k in 10..=30 {
        for s in [2.0 * gamma - 1.0, 2.0 * gamma - 1.25, 2.0 * gamma - 1.5] {
            if s < -1.0 {
                continue;
            }
            match omega_lower_bound(1.0, c, gamma, f64::from(k).exp2(), s) {
                Ok(r) => {
                    ensure(r.pass, || format!("k = {k}, s = {s}: {r:?}"))?;
                    margin = margin.min(r.integral.re / r.bound);
                    cases += 1;
                }
                Err(DiagnosticsError::NotAWitness(_)) => continue,
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    ensure(cases > 0, || "no admissible witness interval".into())?;
    Ok(format!("{cases} cases, min integral/bound {margin:.4}"))
}

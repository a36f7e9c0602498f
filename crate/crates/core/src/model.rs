//! Staircase families.
//!
//! A family is determined by an exponent `γ ∈ (0,1)`, a breakpoint ratio `b`
//! and two amplitudes. Around each centre `x_i = b^i` the function is locally
//! constant:
//!
//! ```text
//! f(x) = A·(x_i − h″_i)   for x ∈ [x_i − h″_i, x_i]
//! f(x) = A·(x_i + h′_i)   for x ∈ (x_i, x_i + h′_i]
//! f(x) = A·x              otherwise
//! ```
//!
//! with `h′_i = c_up·x_i^γ` and `h″_i = c_down·x_i^γ`. When `h″_i = 0` the
//! upper step is closed on the left, so `f(x_i) = A·(x_i + h′_i)`.
//!
//! Intervals below `i_start` are dropped; `i_start` is the first index from
//! which consecutive intervals are disjoint and stay inside `[1, ∞)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("gamma must lie in (0, 1), got {0}")]
    GammaOutOfRange(f64),
    #[error("base must be a finite number > 1, got {0}")]
    InvalidBase(f64),
    #[error("amplitudes must be finite and non-negative (c_up = {c_up}, c_down = {c_down})")]
    InvalidAmplitude { c_up: f64, c_down: f64 },
    #[error("linear coefficient must be finite and non-negative, got {0}")]
    InvalidCoefficient(f64),
    #[error("{variant} family requires {rule} (c_up = {c_up}, c_down = {c_down})")]
    VariantMismatch {
        variant: Variant,
        rule: &'static str,
        c_up: f64,
        c_down: f64,
    },
    #[error("i_cap = {0} is outside the representable range")]
    InvalidCap(u32),
    #[error("no start index ≤ i_cap = {i_cap} keeps the intervals disjoint")]
    NoAdmissibleStart { i_cap: u32 },
    #[error("x = {x} is outside the evaluation domain [1, {horizon}]")]
    OutsideDomain { x: f64, horizon: f64 },
    #[error("interval index {index} is outside the active range [{i_start}, {i_cap}]")]
    IndexOutOfRange { index: u32, i_start: u32, i_cap: u32 },
    #[error("{0}")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Upward steps only: `f ≥ A·x` everywhere.
    OneSided,
    /// Equal downward and upward widths around every centre.
    Symmetric,
    /// Independent downward and upward widths.
    Asymmetric,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::OneSided, Variant::Symmetric, Variant::Asymmetric];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::OneSided => "one_sided",
            Variant::Symmetric => "symmetric",
            Variant::Asymmetric => "asymmetric",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "one_sided" | "onesided" => Ok(Variant::OneSided),
            "symmetric" => Ok(Variant::Symmetric),
            "asymmetric" => Ok(Variant::Asymmetric),
            other => Err(ModelError::Spec(format!("unknown variant '{other}'"))),
        }
    }
}

pub const DEFAULT_BASE: f64 = 2.0;
pub const DEFAULT_I_CAP: u32 = 60;

/// A fully parameterized staircase. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseFamily {
    variant: Variant,
    gamma: f64,
    c_up: f64,
    c_down: f64,
    base: f64,
    i_start: u32,
    i_cap: u32,
    a_coeff: f64,
}

/// Geometry of the `i`-th perturbation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalGeometry {
    pub index: u32,
    pub center: f64,
    pub h_up: f64,
    pub h_down: f64,
    pub u_up: f64,
    pub u_down: f64,
}

impl IntervalGeometry {
    pub fn lower(&self) -> f64 {
        self.center - self.h_down
    }

    pub fn upper(&self) -> f64 {
        self.center + self.h_up
    }

    /// Largest relative width, `max(u′, u″)`.
    pub fn u_max(&self) -> f64 {
        self.u_up.max(self.u_down)
    }
}

/// A point where `|g(x)| / x^γ` attains its per-interval maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaWitness {
    pub index: u32,
    pub x: f64,
    pub ratio: f64,
}

/// JSON form of a family: `{"variant","gamma","c_up","c_down","base","i_cap"}`.
///
/// `i_start` is written on output and ignored on input, since it is always
/// recomputed from the other parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub variant: Variant,
    pub gamma: f64,
    #[serde(default = "one")]
    pub c_up: f64,
    #[serde(default)]
    pub c_down: Option<f64>,
    #[serde(default = "default_base")]
    pub base: f64,
    #[serde(default = "default_i_cap")]
    pub i_cap: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_start: Option<u32>,
}

fn one() -> f64 {
    1.0
}

fn default_base() -> f64 {
    DEFAULT_BASE
}

fn default_i_cap() -> u32 {
    DEFAULT_I_CAP
}

impl FamilySpec {
    /// Resolves the downward width from the variant when it is not given.
    pub fn build(&self) -> Result<StaircaseFamily, ModelError> {
        let c_down = match (self.c_down, self.variant) {
            (Some(c), _) => c,
            (None, Variant::OneSided) => 0.0,
            (None, Variant::Symmetric) => self.c_up,
            (None, Variant::Asymmetric) => {
                return Err(ModelError::Spec(
                    "asymmetric family needs an explicit c_down".into(),
                ))
            }
        };
        StaircaseFamily::new(
            self.variant,
            self.gamma,
            self.c_up,
            c_down,
            self.base,
            self.i_cap,
        )
    }
}

impl StaircaseFamily {
    /// Builds a family with `A = 1`, choosing the smallest admissible `i_start`.
    pub fn new(
        variant: Variant,
        gamma: f64,
        c_up: f64,
        c_down: f64,
        base: f64,
        i_cap: u32,
    ) -> Result<Self, ModelError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(ModelError::GammaOutOfRange(gamma));
        }
        if !(base.is_finite() && base > 1.0) {
            return Err(ModelError::InvalidBase(base));
        }
        if !(c_up.is_finite() && c_down.is_finite() && c_up >= 0.0 && c_down >= 0.0) {
            return Err(ModelError::InvalidAmplitude { c_up, c_down });
        }
        match variant {
            Variant::OneSided if c_down != 0.0 => {
                return Err(ModelError::VariantMismatch {
                    variant,
                    rule: "c_down = 0",
                    c_up,
                    c_down,
                })
            }
            Variant::Symmetric if c_up != c_down => {
                return Err(ModelError::VariantMismatch {
                    variant,
                    rule: "c_up = c_down",
                    c_up,
                    c_down,
                })
            }
            _ => {}
        }
        if i_cap == 0 || !pow_base(base, f64::from(i_cap) + 1.0).is_finite() {
            return Err(ModelError::InvalidCap(i_cap));
        }

        let mut family = StaircaseFamily {
            variant,
            gamma,
            c_up,
            c_down,
            base,
            i_start: 1,
            i_cap,
            a_coeff: 1.0,
        };
        family.i_start = family.find_start()?;
        Ok(family)
    }

    /// Base 2 and the default cap.
    pub fn with_defaults(variant: Variant, gamma: f64, c_up: f64, c_down: f64) -> Result<Self, ModelError> {
        Self::new(variant, gamma, c_up, c_down, DEFAULT_BASE, DEFAULT_I_CAP)
    }

    pub fn one_sided(gamma: f64) -> Result<Self, ModelError> {
        Self::with_defaults(Variant::OneSided, gamma, 1.0, 0.0)
    }

    pub fn symmetric(gamma: f64) -> Result<Self, ModelError> {
        Self::with_defaults(Variant::Symmetric, gamma, 1.0, 1.0)
    }

    /// `c_up = 2, c_down = 1`, the standard unequal-width example.
    pub fn asymmetric(gamma: f64) -> Result<Self, ModelError> {
        Self::with_defaults(Variant::Asymmetric, gamma, 2.0, 1.0)
    }

    /// Scales the whole function by `A`, so that `f(x) = A·x` off the intervals.
    pub fn with_a_coeff(mut self, a_coeff: f64) -> Result<Self, ModelError> {
        if !(a_coeff.is_finite() && a_coeff >= 0.0) {
            return Err(ModelError::InvalidCoefficient(a_coeff));
        }
        self.a_coeff = a_coeff;
        Ok(self)
    }

    /// Rebuilds the family with a different evaluation horizon.
    pub fn with_i_cap(&self, i_cap: u32) -> Result<Self, ModelError> {
        Self::new(self.variant, self.gamma, self.c_up, self.c_down, self.base, i_cap)?
            .with_a_coeff(self.a_coeff)
    }

    fn find_start(&self) -> Result<u32, ModelError> {
        // (x_{i+1} - x_i) / x_i^γ grows with i, so the first index that
        // separates from its successor separates every later pair as well.
        let start = (1..=self.i_cap).find(|&i| self.separated(i) && self.above_one(i));
        match start {
            Some(i) if (i..self.i_cap).all(|k| self.separated(k)) => Ok(i),
            _ => Err(ModelError::NoAdmissibleStart { i_cap: self.i_cap }),
        }
    }

    fn separated(&self, i: u32) -> bool {
        let a = self.geometry(i);
        let b = self.geometry(i + 1);
        a.upper() <= b.lower()
    }

    fn above_one(&self, i: u32) -> bool {
        self.geometry(i).lower() >= 1.0
    }

    pub(crate) fn geometry(&self, i: u32) -> IntervalGeometry {
        let fi = f64::from(i);
        let center = pow_base(self.base, fi);
        let grow = pow_base(self.base, fi * self.gamma);
        let shrink = pow_base(self.base, fi * (self.gamma - 1.0));
        IntervalGeometry {
            index: i,
            center,
            h_up: self.c_up * grow,
            h_down: self.c_down * grow,
            u_up: self.c_up * shrink,
            u_down: self.c_down * shrink,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn c_up(&self) -> f64 {
        self.c_up
    }
    pub fn c_down(&self) -> f64 {
        self.c_down
    }
    pub fn base(&self) -> f64 {
        self.base
    }
    pub fn i_start(&self) -> u32 {
        self.i_start
    }
    pub fn i_cap(&self) -> u32 {
        self.i_cap
    }
    pub fn a_coeff(&self) -> f64 {
        self.a_coeff
    }

    pub fn ln_base(&self) -> f64 {
        self.base.ln()
    }

    /// `g ≡ 0`: no amplitude or a zero coefficient.
    pub fn is_trivial(&self) -> bool {
        self.a_coeff == 0.0 || (self.c_up == 0.0 && self.c_down == 0.0)
    }

    /// Number of active intervals, `i_cap − i_start + 1`.
    pub fn active_count(&self) -> u32 {
        self.i_cap - self.i_start + 1
    }

    /// Right end of the last representable interval.
    pub fn horizon(&self) -> f64 {
        self.geometry(self.i_cap).upper()
    }

    pub fn spec(&self) -> FamilySpec {
        FamilySpec {
            variant: self.variant,
            gamma: self.gamma,
            c_up: self.c_up,
            c_down: Some(self.c_down),
            base: self.base,
            i_cap: self.i_cap,
            i_start: Some(self.i_start),
        }
    }

    pub fn interval(&self, i: u32) -> Result<IntervalGeometry, ModelError> {
        self.check_index(i)?;
        Ok(self.geometry(i))
    }

    pub(crate) fn check_index(&self, i: u32) -> Result<(), ModelError> {
        if i < self.i_start || i > self.i_cap {
            return Err(ModelError::IndexOutOfRange {
                index: i,
                i_start: self.i_start,
                i_cap: self.i_cap,
            });
        }
        Ok(())
    }

    /// Active intervals that may contain `x`, located by index arithmetic.
    fn candidates(&self, x: f64) -> impl Iterator<Item = IntervalGeometry> + '_ {
        let nearest = (x.ln() / self.ln_base()).round() as i64;
        let lo = (nearest - 1).max(i64::from(self.i_start));
        let hi = (nearest + 1).min(i64::from(self.i_cap));
        (lo..=hi).map(|i| self.geometry(i as u32))
    }

    /// Staircase value `f(x)`.
    pub fn eval_f(&self, x: f64) -> Result<f64, ModelError> {
        let horizon = self.horizon();
        if !(x >= 1.0 && x <= horizon) {
            return Err(ModelError::OutsideDomain { x, horizon });
        }
        Ok(self.a_coeff * self.level(x))
    }

    /// Unscaled staircase value at an in-domain point.
    fn level(&self, x: f64) -> f64 {
        for geo in self.candidates(x) {
            if geo.h_down > 0.0 {
                if x >= geo.lower() && x <= geo.center {
                    return geo.lower();
                }
                if x > geo.center && x <= geo.upper() {
                    return geo.upper();
                }
            } else if geo.h_up > 0.0 && x >= geo.center && x <= geo.upper() {
                return geo.upper();
            }
        }
        x
    }

    /// `g(x) = f(x) − A·x`.
    pub fn eval_g(&self, x: f64) -> Result<f64, ModelError> {
        Ok(self.eval_f(x)? - self.a_coeff * x)
    }

    /// One witness per interval for `i_start ≤ i < i_start + n`: the side of
    /// the centre carrying the larger jump.
    pub fn omega_witnesses(&self, n: u32) -> Result<Vec<OmegaWitness>, ModelError> {
        let available = self.i_cap - self.i_start;
        if n > available {
            return Err(ModelError::IndexOutOfRange {
                index: self.i_start + n,
                i_start: self.i_start,
                i_cap: self.i_cap,
            });
        }
        (self.i_start..self.i_start + n)
            .map(|i| {
                let geo = self.geometry(i);
                let x = if self.c_up >= self.c_down && geo.h_down > 0.0 {
                    geo.center.next_up()
                } else {
                    geo.center
                };
                let g = self.eval_g(x)?;
                Ok(OmegaWitness {
                    index: i,
                    x,
                    ratio: g.abs() / x.powf(self.gamma),
                })
            })
            .collect()
    }

    /// Points adjacent to every breakpoint of active intervals inside `[lo, hi]`,
    /// including one-ulp neighbours on both sides of each jump.
    pub fn breakpoint_samples(&self, lo: f64, hi: f64) -> Vec<f64> {
        let lo = lo.max(1.0);
        let hi = hi.min(self.horizon());
        let mut out = Vec::new();
        if lo > hi {
            return out;
        }
        for i in self.i_start..=self.i_cap {
            let geo = self.geometry(i);
            if geo.upper() < lo || geo.lower() > hi {
                continue;
            }
            for p in [geo.lower(), geo.center, geo.upper()] {
                for q in [p.next_down(), p, p.next_up()] {
                    if q >= lo && q <= hi {
                        out.push(q);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// `base^e`, exact for integer `e` when the base is 2.
pub(crate) fn pow_base(base: f64, e: f64) -> f64 {
    if base == 2.0 {
        e.exp2()
    } else {
        base.powf(e)
    }
}

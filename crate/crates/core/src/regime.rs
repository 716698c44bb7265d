//! Parameter validation, critical exponents and regime classification for
//! `∂t ρ = Δ_p ρ + λ div((K_α * ρ) ρ)`.
//!
//! All arithmetic here is generic over [`Exponent`], so it can be carried out
//! exactly with [`num_rational::Rational64`] as well as in floating point.
//! With exact inputs the fair-competition test `α = α_p` is an equality.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use num_rational::Rational64;

use crate::scalar::Exponent;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegimeError {
    #[error("dimension must be at least 1, got {d}")]
    InvalidDimension { d: u32 },
    #[error("p out of range ({lo}, {hi}): got {p}")]
    POutOfRange { p: String, lo: String, hi: String },
    #[error("alpha out of range (0, {d}): got {alpha}")]
    AlphaOutOfRange { alpha: String, d: u32 },
    #[error("alpha_p + alpha must exceed 1: alpha_p = {alpha_p}, alpha = {alpha}")]
    AlphaSumTooSmall { alpha_p: String, alpha: String },
    #[error("lambda must be positive: got {lambda}")]
    NonPositiveLambda { lambda: String },
    #[error("moment window ({lo}, {hi}) is empty")]
    EmptyMomentWindow { lo: String, hi: String },
}

/// Non-fatal remarks attached to a validated parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeWarning {
    /// `d = 1`: the existence theory assumes `d >= 2`; formulas are still
    /// evaluated verbatim.
    BelowTheoremDimension,
    /// `λ = 0`: pure p-Laplacian diffusion, outside the aggregation theory.
    NoAggregation,
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::BelowTheoremDimension => {
                f.write_str("d = 1 lies outside the existence theorem (d >= 2)")
            }
            RegimeWarning::NoAggregation => f.write_str("lambda = 0: p-heat equation"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    DiffusionDominated,
    FairCompetition,
    AggregationDominated,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::DiffusionDominated => "DiffusionDominated",
            Regime::FairCompetition => "FairCompetition",
            Regime::AggregationDominated => "AggregationDominated",
        };
        f.write_str(s)
    }
}

/// `α_p = p(d + 1) - 2d`, the kernel exponent at which aggregation and
/// p-diffusion scale identically.
pub fn alpha_p<T: Exponent>(d: u32, p: T) -> T {
    p * T::from_int(d + 1) - T::from_int(2 * d)
}

/// Open window `(2d/(d+1), 3d/(d+1))` of admissible diffusion exponents.
pub fn p_window<T: Exponent>(d: u32) -> (T, T) {
    let den = T::from_int(d + 1);
    (T::from_int(2 * d) / den.clone(), T::from_int(3 * d) / den)
}

/// `p' = p / (p - 1)`.
pub fn conjugate<T: Exponent>(p: T) -> T {
    p.clone() / (p - T::one())
}

/// Trichotomy on `α` against `α_p` without any validation.
pub fn classify_point<T: Exponent>(d: u32, p: T, alpha: T) -> Regime {
    let ap = alpha_p(d, p);
    if alpha.fair_eq(&ap) {
        Regime::FairCompetition
    } else if alpha < ap {
        Regime::DiffusionDominated
    } else {
        Regime::AggregationDominated
    }
}

/// The planar point `(d, p, α) = (2, 2, 2)` is the parabolic-elliptic
/// Keller-Segel equation, where the power-law, fractional and p-Laplacian
/// notions of fair competition coincide.
pub fn is_keller_segel_point<T: Exponent>(d: u32, p: T, alpha: T) -> bool {
    let two = T::from_int(2);
    d == 2
        && p.fair_eq(&two)
        && alpha.fair_eq(&two)
        && classify_point(d, p, alpha) == Regime::FairCompetition
}

/// Validated `(d, p, α, λ)` with its derived exponents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeParams<T> {
    pub d: u32,
    pub p: T,
    pub alpha: T,
    pub lambda: T,
    /// `p' = p/(p-1)`
    pub p_conj: T,
    /// `p* = dp/(d-p)`; `None` when `p >= d` (no Sobolev embedding).
    pub p_star: Option<T>,
    /// `r = p*/p'`
    pub r: Option<T>,
    pub alpha_p: T,
    pub warnings: Vec<RegimeWarning>,
}

impl<T: Exponent> RegimeParams<T> {
    /// Checks every hypothesis of the existence theorem. `d = 1` is accepted
    /// with [`RegimeWarning::BelowTheoremDimension`].
    pub fn validate(d: u32, p: T, alpha: T, lambda: T) -> Result<Self, RegimeError> {
        if d == 0 {
            return Err(RegimeError::InvalidDimension { d });
        }
        let (lo, hi) = p_window::<T>(d);
        if !(p > lo && p < hi) {
            return Err(RegimeError::POutOfRange {
                p: p.to_string(),
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        let d_t = T::from_int(d);
        if !(alpha > T::zero() && alpha < d_t) {
            return Err(RegimeError::AlphaOutOfRange {
                alpha: alpha.to_string(),
                d,
            });
        }
        if !(lambda > T::zero()) {
            return Err(RegimeError::NonPositiveLambda {
                lambda: lambda.to_string(),
            });
        }
        let ap = alpha_p(d, p.clone());
        if !(ap.clone() + alpha.clone() > T::one()) {
            return Err(RegimeError::AlphaSumTooSmall {
                alpha_p: ap.to_string(),
                alpha: alpha.to_string(),
            });
        }
        // Unreachable once α_p + α > 1 and α > 0 hold, kept as a guard.
        let (k_lo, k_hi) = moment_window(ap.clone(), alpha.clone());
        if k_lo >= k_hi {
            return Err(RegimeError::EmptyMomentWindow {
                lo: k_lo.to_string(),
                hi: k_hi.to_string(),
            });
        }

        let p_conj = conjugate(p.clone());
        let (p_star, r) = if p < d_t {
            let ps = d_t.clone() * p.clone() / (d_t - p.clone());
            let r = ps.clone() / p_conj.clone();
            (Some(ps), Some(r))
        } else {
            (None, None)
        };
        let mut warnings = Vec::new();
        if d == 1 {
            warnings.push(RegimeWarning::BelowTheoremDimension);
        }
        Ok(Self {
            d,
            p,
            alpha,
            lambda,
            p_conj,
            p_star,
            r,
            alpha_p: ap,
            warnings,
        })
    }

    pub fn regime(&self) -> Regime {
        classify_point(self.d, self.p.clone(), self.alpha.clone())
    }

    /// Admissible moment exponents `((1-α)_+, α_p ∧ 1)`.
    pub fn moment_window(&self) -> (T, T) {
        moment_window(self.alpha_p.clone(), self.alpha.clone())
    }

    /// Same parameters in another numeric type (e.g. exact → `f64`).
    pub fn convert<U: Exponent>(&self, f: impl Fn(&T) -> U) -> RegimeParams<U> {
        RegimeParams {
            d: self.d,
            p: f(&self.p),
            alpha: f(&self.alpha),
            lambda: f(&self.lambda),
            p_conj: f(&self.p_conj),
            p_star: self.p_star.as_ref().map(&f),
            r: self.r.as_ref().map(&f),
            alpha_p: f(&self.alpha_p),
            warnings: self.warnings.clone(),
        }
    }

    /// Same `(d, p, α)` with `λ = 0`, for the p-heat equation. This is the
    /// only way to obtain a parameter set without aggregation.
    pub fn p_heat(&self) -> Self {
        let mut out = self.clone();
        out.lambda = T::zero();
        if !out.warnings.contains(&RegimeWarning::NoAggregation) {
            out.warnings.push(RegimeWarning::NoAggregation);
        }
        out
    }

    /// Same `(d, p, α)` with a different aggregation strength.
    pub fn with_lambda(&self, lambda: T) -> Result<Self, RegimeError> {
        Self::validate(self.d, self.p.clone(), self.alpha.clone(), lambda)
    }
}

/// Classification of validated parameters.
pub fn classify<T: Exponent>(params: &RegimeParams<T>) -> Regime {
    params.regime()
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("cannot parse `{input}` as a number: {reason}")]
pub struct ParseExponentError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses `a/b`, a decimal or a float in exponent notation.
///
/// A decimal with `k >= 4` fractional digits is read as the simplest
/// rational within half a unit of its last digit, provided that rational
/// has denominator at most `10^(k-3)`; otherwise as the exact decimal. So
/// `1.6666667` is `5/3` while `0.3` stays `3/10`.
pub fn parse_exponent(input: &str) -> Result<Rational64, ParseExponentError> {
    let err = |reason| ParseExponentError {
        input: input.to_string(),
        reason,
    };
    let s = input.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let den: i64 = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if den == 0 {
            return Err(err("zero denominator"));
        }
        return Ok(Rational64::new(num, den));
    }
    if s.contains(['e', 'E']) {
        let v: f64 = s.parse().map_err(|_| err("not a number"))?;
        return Rational64::approximate_float(v).ok_or(err("not representable"));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(err("not a number"));
    }
    let k = frac.len() as u32;
    let scale = 10i64.checked_pow(k).ok_or(err("too many digits"))?;
    let digits: i64 = format!("{int}{frac}").parse().map_err(|_| err("too many digits"))?;
    let exact = Rational64::new(digits, scale);
    let mut value = exact;
    if k >= 4 {
        let half = Rational64::new(1, 2 * scale);
        let snapped = simplest_between(exact - half, exact + half);
        if *snapped.denom() <= 10i64.pow(k - 3) {
            value = snapped;
        }
    }
    Ok(if neg { -value } else { value })
}

/// Rational with the smallest denominator in the open interval `(lo, hi)`,
/// `0 <= lo < hi`.
fn simplest_between(lo: Rational64, hi: Rational64) -> Rational64 {
    let fl = lo.floor();
    let next = fl + Rational64::from_integer(1);
    if next < hi {
        return next;
    }
    // (lo, hi) lies inside (fl, fl + 1): recurse on the reciprocal of the
    // fractional part.
    let (a, b) = (lo - fl, hi - fl);
    let lo_inv = b.recip();
    let y = if a == Rational64::from_integer(0) {
        lo_inv.floor() + Rational64::from_integer(1)
    } else {
        simplest_between(lo_inv, a.recip())
    };
    fl + y.recip()
}

fn moment_window<T: Exponent>(alpha_p: T, alpha: T) -> (T, T) {
    let lo = T::max_of(T::one() - alpha, T::zero());
    let hi = T::min_of(alpha_p, T::one());
    (lo, hi)
}

//! Sharp Sobolev and Hardy-Littlewood-Sobolev constants and the critical mass
//! of the fair-competition regime.
//!
//! The closed forms are the classical Aubin-Talenti and Lieb values. The
//! [`oracle`] submodule evaluates the same constants independently, as
//! extremal ratios computed by radial quadrature.

use serde::Serialize;
use thiserror::Error;

use crate::numerics::ln_gamma;
use crate::regime::RegimeParams;
use crate::scalar::{lit, Exponent, Scalar};

pub mod oracle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantError {
    #[error("Sobolev exponent must satisfy 1 < q < d = {d}: got q = {q}")]
    SobolevExponent { d: u32, q: f64 },
    #[error("HLS exponent must satisfy 0 < alpha < d = {d}: got alpha = {alpha}")]
    HlsExponent { d: u32, alpha: f64 },
    #[error("alpha_p = {alpha_p} is outside (0, {d}); the HLS constant is undefined")]
    AlphaPOutOfRange { d: u32, alpha_p: f64 },
    #[error("p = {p} >= d = {d}: no Sobolev embedding, the critical mass is undefined")]
    NoSobolevEmbedding { d: u32, p: f64 },
    #[error("oracle quadrature failed: {0}")]
    Oracle(String),
}

/// Best constant `C` in `‖u‖_{L^{q*}} <= C ‖∇u‖_{L^q}`, `q* = dq/(d-q)`.
pub fn sobolev_constant<T: Scalar>(d: u32, q: T) -> Result<T, ConstantError> {
    let d_t = T::from_int(d);
    if !(q > T::one() && q < d_t) {
        return Err(ConstantError::SobolevExponent { d, q: q.as_f64() });
    }
    let one = T::one();
    let log_ratio = ln_gamma(one + d_t / lit(2.0)) + ln_gamma(d_t)
        - ln_gamma(d_t / q)
        - ln_gamma(one + d_t - d_t / q);
    let c = T::PI().powf(lit(-0.5))
        * d_t.powf(-one / q)
        * ((q - one) / (d_t - q)).powf(one - one / q)
        * (log_ratio / d_t).exp();
    Ok(c)
}

/// Best constant in the diagonal HLS inequality
/// `∬ f(x) |x-y|^{-α} f(y) dx dy <= C ‖f‖²_{L^q}`, `q = 2d/(2d-α)`.
pub fn hls_constant<T: Scalar>(d: u32, alpha: T) -> Result<T, ConstantError> {
    let d_t = T::from_int(d);
    if !(alpha > T::zero() && alpha < d_t) {
        return Err(ConstantError::HlsExponent {
            d,
            alpha: alpha.as_f64(),
        });
    }
    let half = lit::<T>(0.5);
    let log_c = alpha * half * T::PI().ln() + ln_gamma(half * (d_t - alpha))
        - ln_gamma(d_t - half * alpha)
        + (alpha / d_t - T::one()) * (ln_gamma(half * d_t) - ln_gamma(d_t));
    Ok(log_c.exp())
}

/// HLS exponent `q = 2d/(2d - α)`.
pub fn hls_exponent<T: Scalar>(d: u32, alpha: T) -> T {
    let two_d = T::from_int(2 * d);
    two_d / (two_d - alpha)
}

/// Critical mass and the constants it is assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalMass<T> {
    /// `C_{d,p}`, the mass threshold at `λ = 1`.
    pub c_dp: T,
    /// `M_c = C_{d,p} λ^{-1/(3-p)}`.
    pub m_c: T,
    pub sobolev: T,
    pub hls: T,
}

/// `C_{d,p} = ((d - α_p) C^HLS_{d,α_p} (C^S_{d,p}/p')^p)^{-1/(3-p)}`.
pub fn critical_constant<T: Scalar>(d: u32, p: T) -> Result<(T, T, T), ConstantError> {
    let d_t = T::from_int(d);
    let ap = crate::regime::alpha_p(d, p);
    if !(ap > T::zero() && ap < d_t) {
        return Err(ConstantError::AlphaPOutOfRange {
            d,
            alpha_p: ap.as_f64(),
        });
    }
    if p >= d_t {
        return Err(ConstantError::NoSobolevEmbedding { d, p: p.as_f64() });
    }
    let three = lit::<T>(3.0);
    assert!(p < three, "p = 3 cannot occur for p < d and alpha_p < d");
    let cs = sobolev_constant(d, p)?;
    let chls = hls_constant(d, ap)?;
    let p_conj = p / (p - T::one());
    let base = (d_t - ap) * chls * (cs / p_conj).powf(p);
    Ok((base.powf(-T::one() / (three - p)), cs, chls))
}

/// Mass threshold of the fair-competition case for the given parameters.
pub fn critical_mass<T: Scalar, Q: Exponent>(
    params: &RegimeParams<Q>,
) -> Result<CriticalMass<T>, ConstantError> {
    let p = lit::<T>(params.p.as_f64());
    let lambda = lit::<T>(params.lambda.as_f64());
    let (c_dp, sobolev, hls) = critical_constant(params.d, p)?;
    let m_c = c_dp * lambda.powf(-T::one() / (lit::<T>(3.0) - p));
    Ok(CriticalMass {
        c_dp,
        m_c,
        sobolev,
        hls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_rational::Rational64 as Q;

    // High-precision values (30-digit Gamma evaluations of the same formulas).
    #[test]
    fn sobolev_reference_values() {
        assert_relative_eq!(
            sobolev_constant(3, 2.0f64).unwrap(),
            0.427_260_542_862_526_63,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            sobolev_constant(2, 1.5f64).unwrap(),
            0.395_853_998_666_190_35,
            max_relative = 1e-13
        );
    }

    #[test]
    fn sobolev_three_dim_classic() {
        // d = 3, q = 2: C = S^{-1/2} with S = 3 (π/2)^{4/3}.
        let s = 3.0 * (std::f64::consts::PI / 2.0).powf(4.0 / 3.0);
        assert_relative_eq!(sobolev_constant(3, 2.0f64).unwrap(), 1.0 / s.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn hls_reference_values() {
        // d = 2, α = 1: π^{1/2} Γ(1/2) / Γ(3/2) * (Γ(1)/Γ(2))^{-1/2} = 2 sqrt(π)
        assert_relative_eq!(
            hls_constant(2, 1.0f64).unwrap(),
            2.0 * std::f64::consts::PI.sqrt(),
            max_relative = 1e-13
        );
        assert_relative_eq!(hls_constant(3, 2.0f64).unwrap(), 7.303_872_119_375_109, max_relative = 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            sobolev_constant(3, 0.5f64),
            Err(ConstantError::SobolevExponent { .. })
        ));
        assert!(sobolev_constant(2, 2.0f64).is_err());
        assert!(matches!(hls_constant(2, 2.0f64), Err(ConstantError::HlsExponent { .. })));
        assert!(hls_constant(2, 0.0f64).is_err());
    }

    #[test]
    fn critical_constant_fair_point() {
        let params = RegimeParams::validate(2, Q::new(5, 3), Q::new(1, 1), Q::new(1, 1)).unwrap();
        let cm = critical_mass::<f64, _>(&params).unwrap();
        assert_relative_eq!(cm.c_dp, 2.683_672_169_669_775, max_relative = 1e-12);
        assert_relative_eq!(cm.m_c, cm.c_dp, max_relative = 1e-15);
    }

    #[test]
    fn lambda_scaling_law() {
        for &(d, p, alpha) in &[(2u32, 5.0f64 / 3.0, 1.0f64), (2, 1.8, 0.5), (3, 2.0, 1.5)] {
            let a = RegimeParams::validate(d, p, alpha, 1.0).unwrap();
            let b = a.with_lambda(2.0).unwrap();
            let ma = critical_mass::<f64, _>(&a).unwrap().m_c;
            let mb = critical_mass::<f64, _>(&b).unwrap().m_c;
            assert_relative_eq!(mb / ma, 2f64.powf(-1.0 / (3.0 - p)), max_relative = 1e-14);
            assert!(ma.is_finite() && ma > 0.0);
        }
    }

    #[test]
    fn one_dimension_has_no_critical_mass() {
        let params = RegimeParams::validate(1, 1.4f64, 0.8, 1.0).unwrap();
        assert!(matches!(
            critical_mass::<f64, _>(&params),
            Err(ConstantError::NoSobolevEmbedding { .. })
        ));
    }

    #[test]
    fn f32_constants() {
        let c = sobolev_constant(3, 2.0f32).unwrap();
        assert_relative_eq!(c, 0.427_260_54, max_relative = 1e-5);
    }
}

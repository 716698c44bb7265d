//! Quadrature evaluation of the sharp constants on their extremal profiles.
//!
//! These never touch the Gamma-function closed forms: every value is a ratio
//! of radial integrals computed by adaptive Gauss-Kronrod quadrature.

use crate::numerics::{golden_section_max, unit_sphere_area, Quadrature, QuadratureError};

use super::ConstantError;

fn oracle_err(e: QuadratureError) -> ConstantError {
    ConstantError::Oracle(e.to_string())
}

fn quad(rel: f64) -> Quadrature<f64> {
    Quadrature::new(1e-300, rel).with_max_intervals(20_000)
}

/// `‖h_b‖_{q*} / ‖∇h_b‖_q` for `h_b(x) = (1 + b|x|^{q'})^{1 - d/q}`.
pub fn sobolev_ratio(d: u32, q: f64, b: f64) -> Result<f64, ConstantError> {
    let d_f = d as f64;
    if !(q > 1.0 && q < d_f) {
        return Err(ConstantError::SobolevExponent { d, q });
    }
    let q_star = d_f * q / (d_f - q);
    let q_conj = q / (q - 1.0);
    let omega = unit_sphere_area::<f64>(d);
    let scale = b.powf(-1.0 / q_conj);
    let qd = quad(1e-12);

    // ln(1 + b r^{q'}) without overflow for large r
    let log_base = |r: f64| {
        let x = b * r.powf(q_conj);
        if x.is_finite() {
            x.ln_1p()
        } else {
            b.ln() + q_conj * r.ln()
        }
    };
    let h = |r: f64| ((1.0 - d_f / q) * log_base(r)).exp();
    let dh = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        let log_mag = ((d_f / q - 1.0) * b * q_conj).ln() + (q_conj - 1.0) * r.ln() - d_f / q * log_base(r);
        log_mag.exp()
    };
    let num = qd
        .integrate_radial(|r| h(r).powf(q_star) * r.powi(d as i32 - 1), scale)
        .map_err(oracle_err)?
        .value;
    let den = qd
        .integrate_radial(|r| dh(r).powf(q) * r.powi(d as i32 - 1), scale)
        .map_err(oracle_err)?
        .value;
    Ok((omega * num).powf(1.0 / q_star) / (omega * den).powf(1.0 / q))
}

/// Maximum of [`sobolev_ratio`] over the dilation parameter `b`.
pub fn sobolev_constant(d: u32, q: f64) -> Result<f64, ConstantError> {
    // probe once so domain and quadrature errors surface as errors
    sobolev_ratio(d, q, 1.0)?;
    let (_, best) = golden_section_max(
        |log_b: f64| sobolev_ratio(d, q, log_b.exp()).unwrap_or(f64::NEG_INFINITY),
        (0.25f64).ln(),
        4f64.ln(),
        1e-3,
    );
    Ok(best)
}

/// Mean of `f(|x + ρω|)` over unit directions `ω`, times the sphere area,
/// for `|x| = r`.
pub fn spherical_shell_integral(
    d: u32,
    f: impl Fn(f64) -> f64,
    r: f64,
    rho: f64,
) -> Result<f64, ConstantError> {
    if d == 1 {
        return Ok(f((r + rho).abs()) + f((r - rho).abs()));
    }
    let omega_low = unit_sphere_area::<f64>(d - 1);
    let integrand = |theta: f64| {
        let half_cos = (0.5 * theta).cos();
        let dist2 = (r - rho) * (r - rho) + 4.0 * r * rho * half_cos * half_cos;
        f(dist2.sqrt()) * theta.sin().powi(d as i32 - 2)
    };
    let v = quad(1e-12)
        .integrate(integrand, 0.0, std::f64::consts::PI)
        .map_err(oracle_err)?
        .value;
    Ok(omega_low * v)
}

/// `∬ f(x) |x-y|^{-α} f(y) / ‖f‖²_q` for `f(x) = (1 + |x|²)^{-(2d-α)/2}`.
///
/// The potential is written in polar coordinates around the evaluation
/// point, `∫|z|^{-α} f(x+z) dz = (d-α)^{-1} ∫_0^∞ S(r, u^{1/(d-α)}) du`,
/// which removes the singularity of the kernel from every integrand.
pub fn hls_constant(d: u32, alpha: f64) -> Result<f64, ConstantError> {
    let d_f = d as f64;
    if !(alpha > 0.0 && alpha < d_f) {
        return Err(ConstantError::HlsExponent { d, alpha });
    }
    let f = |r: f64| (1.0 + r * r).powf(-0.5 * (2.0 * d_f - alpha));
    let omega = unit_sphere_area::<f64>(d);
    let q = 2.0 * d_f / (2.0 * d_f - alpha);
    let dm1 = d as i32 - 1;
    let gamma = 1.0 / (d_f - alpha);

    let potential = |r: f64| -> Result<f64, ConstantError> {
        let mut failure = None;
        let mut body = |u: f64| match spherical_shell_integral(d, f, r, u.powf(gamma)) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let qd = quad(1e-10);
        let head = qd.integrate(&mut body, 0.0, 1.0).map_err(oracle_err)?.value;
        let tail = qd
            .integrate_to_infinity(&mut body, 1.0, 1.0 + r.powf(d_f - alpha))
            .map_err(oracle_err)?
            .value;
        match failure {
            Some(e) => Err(e),
            None => Ok(gamma * (head + tail)),
        }
    };

    let mut failure = None;
    let numerator = quad(1e-9)
        .integrate_to_infinity(
            |r| match potential(r) {
                Ok(v) => f(r) * r.powi(dm1) * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
        )
        .map_err(oracle_err)?
        .value;
    if let Some(e) = failure {
        return Err(e);
    }
    let norm_q = quad(1e-13)
        .integrate_to_infinity(|r| f(r).powf(q) * r.powi(dm1), 0.0, 1.0)
        .map_err(oracle_err)?
        .value;
    let norm = (omega * norm_q).powf(1.0 / q);
    Ok(omega * numerator / (norm * norm))
}

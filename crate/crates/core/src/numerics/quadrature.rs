//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error meets `max(abs_tol, rel_tol * |I|)`. Error estimates use the QUADPACK
//! rescaling of `|K15 - G7|`. Semi-infinite ranges are mapped onto `[0, 1)`
//! with `x = a + s t / (1 - t)`; nodes are interior so the singular endpoint
//! is never evaluated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::scalar::{lit, Scalar};

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

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {intervals} intervals")]
    NotConverged {
        value: f64,
        error: f64,
        intervals: usize,
    },
    #[error("integrand returned a non-finite value at x = {at:e}")]
    NonFinite { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Scalar> Default for Quadrature<T> {
    fn default() -> Self {
        Self {
            abs_tol: lit(1e-14),
            rel_tol: lit(1e-11),
            max_intervals: 4000,
        }
    }
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Scalar> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Scalar> Eq for Segment<T> {}
impl<T: Scalar> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn rescale_error<T: Scalar>(err: T, res_abs: T, res_asc: T) -> T {
    let mut scaled = err.abs();
    if res_asc != T::zero() && scaled != T::zero() {
        let scale = (lit::<T>(200.0) * scaled / res_asc).powf(lit(1.5));
        scaled = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let tiny = T::min_positive_value() / (lit::<T>(50.0) * T::epsilon());
    if res_abs > tiny {
        let floor = lit::<T>(50.0) * T::epsilon() * res_abs;
        if floor > scaled {
            scaled = floor;
        }
    }
    scaled
}

fn gauss_kronrod<T, F>(f: &mut F, a: T, b: T) -> Result<(T, T), QuadratureError>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let center = lit::<T>(0.5) * (a + b);
    let half = lit::<T>(0.5) * (b - a);
    let mut eval = |x: T| -> Result<T, QuadratureError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite { at: x.as_f64() })
        }
    };

    let f_center = eval(center)?;
    let mut res_k = f_center * lit::<T>(WGK[7]);
    let mut res_g = f_center * lit::<T>(WG[3]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * lit::<T>(XGK[j]);
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let w = lit::<T>(WGK[j]);
        res_k += w * (f1 + f2);
        res_abs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += lit::<T>(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * lit(0.5);
    let mut res_asc = lit::<T>(WGK[7]) * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += lit::<T>(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let habs = half.abs();
    let err = rescale_error((res_k - res_g) * half, res_abs * habs, res_asc * habs);
    Ok((res_k * half, err))
}

impl<T: Scalar> Quadrature<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    /// Integrates `f` over the finite interval `[a, b]`.
    pub fn integrate<F>(&self, mut f: F, a: T, b: T) -> Result<QuadEstimate<T>, QuadratureError>
    where
        F: FnMut(T) -> T,
    {
        if a == b {
            return Ok(QuadEstimate {
                value: T::zero(),
                error: T::zero(),
                evaluations: 0,
            });
        }
        let (value, error) = gauss_kronrod(&mut f, a, b)?;
        let mut evaluations = 15;
        let mut heap = BinaryHeap::new();
        heap.push(Segment { a, b, value, error });
        let mut total = value;
        let mut total_err = error;

        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= tol {
                break;
            }
            if heap.len() >= self.max_intervals {
                return Err(QuadratureError::NotConverged {
                    value: total.as_f64(),
                    error: total_err.as_f64(),
                    intervals: heap.len(),
                });
            }
            let seg = heap.pop().expect("heap is never empty");
            let mid = lit::<T>(0.5) * (seg.a + seg.b);
            if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
                // interval exhausted at machine precision; accept what we have
                heap.push(Segment {
                    error: T::zero(),
                    ..seg
                });
                total_err = heap.iter().map(|s| s.error).fold(T::zero(), |x, y| x + y);
                continue;
            }
            let (v1, e1) = gauss_kronrod(&mut f, seg.a, mid)?;
            let (v2, e2) = gauss_kronrod(&mut f, mid, seg.b)?;
            evaluations += 30;
            total = total - seg.value + v1 + v2;
            total_err = total_err - seg.error + e1 + e2;
            heap.push(Segment {
                a: seg.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: mid,
                b: seg.b,
                value: v2,
                error: e2,
            });
            // refresh the running sums now and then to avoid drift
            if heap.len() % 64 == 0 {
                total = heap.iter().map(|s| s.value).fold(T::zero(), |x, y| x + y);
                total_err = heap.iter().map(|s| s.error).fold(T::zero(), |x, y| x + y);
            }
        }
        let value = heap.iter().map(|s| s.value).fold(T::zero(), |x, y| x + y);
        Ok(QuadEstimate {
            value,
            error: total_err,
            evaluations,
        })
    }

    /// Integrates over `[a, ∞)`. `scale` should be of the order of the length
    /// scale on which `f` decays.
    pub fn integrate_to_infinity<F>(
        &self,
        mut f: F,
        a: T,
        scale: T,
    ) -> Result<QuadEstimate<T>, QuadratureError>
    where
        F: FnMut(T) -> T,
    {
        let one = T::one();
        self.integrate(
            |t: T| {
                let s = one - t;
                if s <= T::zero() {
                    // node rounded onto the point at infinity
                    return T::zero();
                }
                let x = a + scale * t / s;
                let y = f(x);
                if y == T::zero() {
                    T::zero()
                } else {
                    y * scale / (s * s)
                }
            },
            T::zero(),
            one,
        )
    }

    /// `∫_0^∞ f` for algebraically decaying `f`: the range beyond `scale` is
    /// integrated in `ln x`, where an algebraic tail decays exponentially.
    pub fn integrate_radial<F>(&self, f: F, scale: T) -> Result<QuadEstimate<T>, QuadratureError>
    where
        F: Fn(T) -> T,
    {
        let head = self.integrate(&f, T::zero(), scale)?;
        // beyond x = e^{cutoff} powers of x overflow and the tail is negligible
        let cutoff = lit::<T>(0.25) * T::max_value().ln();
        let tail = self.integrate_to_infinity(
            |s: T| {
                if s > cutoff {
                    return T::zero();
                }
                let x = s.exp();
                f(x) * x
            },
            scale.ln(),
            lit(4.0),
        )?;
        Ok(QuadEstimate {
            value: head.value + tail.value,
            error: head.error + tail.error,
            evaluations: head.evaluations + tail.evaluations,
        })
    }

    /// Integrates over consecutive pieces `[b_0, b_1], [b_1, b_2], ...`.
    pub fn integrate_pieces<F>(
        &self,
        mut f: F,
        breaks: &[T],
    ) -> Result<QuadEstimate<T>, QuadratureError>
    where
        F: FnMut(T) -> T,
    {
        let mut acc = QuadEstimate {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        };
        for w in breaks.windows(2) {
            let part = self.integrate(&mut f, w[0], w[1])?;
            acc.value += part.value;
            acc.error += part.error;
            acc.evaluations += part.evaluations;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let q = Quadrature::<f64>::default();
        let r = q.integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0).unwrap();
        assert_relative_eq!(r.value, 63.0 / 6.0 - 9.0, max_relative = 1e-14);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn endpoint_singularity() {
        let q = Quadrature::<f64>::default();
        let r = q.integrate(|x| x.powf(-0.5), 0.0, 1.0).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-10);
        let r = q.integrate(|x| x.ln(), 0.0, 1.0).unwrap();
        assert_relative_eq!(r.value, -1.0, max_relative = 1e-10);
    }

    #[test]
    fn semi_infinite() {
        let q = Quadrature::<f64>::default();
        let r = q.integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1.0).unwrap();
        assert_relative_eq!(r.value, 0.5 * std::f64::consts::PI.sqrt(), max_relative = 1e-11);
        // algebraic tail
        let r = q.integrate_to_infinity(|x| 1.0 / (1.0 + x).powf(2.5), 0.0, 1.0).unwrap();
        assert_relative_eq!(r.value, 1.0 / 1.5, max_relative = 1e-10);
    }

    #[test]
    fn slow_algebraic_tail() {
        let q = Quadrature::<f64>::new(1e-300, 1e-12);
        // ∫_0^∞ (1+x)^{-4/3} = 3
        let r = q.integrate_radial(|x| (1.0 + x).powf(-4.0 / 3.0), 1.0).unwrap();
        assert_relative_eq!(r.value, 3.0, max_relative = 1e-10);
    }

    #[test]
    fn f32_works() {
        let q = Quadrature::<f32>::new(1e-6, 1e-5);
        let r = q.integrate(|x| x.sin(), 0.0, std::f32::consts::PI).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-5);
    }

    #[test]
    fn non_finite_is_reported() {
        let q = Quadrature::<f64>::default();
        let err = q.integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0).unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. }));
    }

    #[test]
    fn budget_exhaustion() {
        let q = Quadrature::<f64>::new(0.0, 1e-15).with_max_intervals(4);
        let err = q.integrate(|x| (1.0 / x).sin(), 1e-3, 1.0).unwrap_err();
        assert!(matches!(err, QuadratureError::NotConverged { .. }));
    }
}

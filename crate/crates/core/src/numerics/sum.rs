use crate::scalar::Scalar;

const BLOCK: usize = 32;

/// Pairwise (tree) summation with a fixed split pattern, so the result only
/// depends on the input order and length.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    if xs.len() <= BLOCK {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beats_naive_on_many_small_terms() {
        let xs = vec![0.1f32; 1 << 20];
        let naive: f32 = xs.iter().fold(0.0, |a, &b| a + b);
        let tree = pairwise_sum(&xs);
        let exact = 0.1f64 * (1 << 20) as f64;
        assert!(((tree as f64) - exact).abs() < ((naive as f64) - exact).abs());
        assert!(((tree as f64) - exact).abs() / exact < 1e-6);
    }
}

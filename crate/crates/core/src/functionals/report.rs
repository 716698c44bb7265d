use crate::fields::{ConvolutionMethod, DensityField, KernelSpec};
use crate::scalar::Scalar;

use super::{entropy, interaction_energy, lq_norm, moment, p_fisher, FunctionalError};

/// Diagnostic functionals of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalReport<T> {
    pub mass: T,
    pub entropy: T,
    pub p_fisher: T,
    pub moment_k: T,
    /// `(q, ‖ρ‖_q)` pairs
    pub lq_norms: Vec<(T, T)>,
    pub interaction_energy: T,
}

impl<T: Scalar> FunctionalReport<T> {
    pub fn evaluate(
        field: &DensityField<T>,
        p: T,
        k: T,
        qs: &[T],
        kernel: &KernelSpec<T>,
        method: ConvolutionMethod,
    ) -> Result<Self, FunctionalError> {
        Ok(Self {
            mass: field.mass(),
            entropy: entropy(field),
            p_fisher: p_fisher(field, p),
            moment_k: moment(field, k),
            lq_norms: qs.iter().map(|&q| (q, lq_norm(field, q))).collect(),
            interaction_energy: interaction_energy(field, kernel, method)?,
        })
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["mass".to_string(), "entropy".into(), "p_fisher".into(), "moment_k".into()];
        cols.extend(self.lq_norms.iter().map(|(q, _)| format!("lq_{}", q.as_f64())));
        cols.push("interaction_energy".into());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut vals = vec![self.mass, self.entropy, self.p_fisher, self.moment_k];
        vals.extend(self.lq_norms.iter().map(|&(_, v)| v));
        vals.push(self.interaction_energy);
        vals.iter().map(|v| v.as_f64().to_string()).collect::<Vec<_>>().join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{discretize, Grid, Profile};

    #[test]
    fn one_csv_row() {
        let g = Grid::new(1, 6.0f64, 128).unwrap();
        let f = discretize(&Profile::gaussian(&[0.0], 1.0, 1.0), &g).unwrap();
        let k = KernelSpec::for_grid(0.5, &g).unwrap();
        let r = FunctionalReport::evaluate(&f, 1.4, 0.5, &[1.0, 2.0], &k, ConvolutionMethod::Direct).unwrap();
        assert_eq!(r.csv_header(), "mass,entropy,p_fisher,moment_k,lq_1,lq_2,interaction_energy");
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), 7);
        assert!((r.lq_norms[0].1 - r.mass).abs() < 1e-14);
    }
}

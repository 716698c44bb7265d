//! Closed-form sharp constants against their extremal-profile quadratures.

use plad::constants::{self, oracle};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn sobolev_closed_form_matches_oracle() {
    for &(d, q) in &[(3u32, 2.0), (2, 1.5), (2, 5.0 / 3.0), (3, 1.5), (4, 2.0), (3, 2.5), (2, 1.2)] {
        let closed = constants::sobolev_constant(d, q).unwrap();
        let quad = oracle::sobolev_constant(d, q).unwrap_or_else(|e| panic!("d={d} q={q}: {e}"));
        assert!(rel(closed, quad) <= 1e-6, "d={d} q={q}: {closed} vs {quad}");
    }
}

#[test]
fn hls_closed_form_matches_oracle() {
    for &(d, alpha) in &[(2u32, 1.0), (3, 2.0), (2, 0.5), (2, 1.5), (3, 1.0), (1, 0.5), (4, 2.0)] {
        let closed = constants::hls_constant(d, alpha).unwrap();
        let quad = oracle::hls_constant(d, alpha).unwrap();
        assert!(rel(closed, quad) <= 1e-5, "d={d} alpha={alpha}: {closed} vs {quad}");
    }
}

//! Fock-basis amplitude tables of single-mode Schroedinger-cat states
//! N [ |alpha> + eps |-alpha> ] and truncation selection.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::log_factorial;

/// One mode's cat-state parameters: complex amplitude and superposition sign.
///
/// eps = 0 is a plain coherent state, +1 an even cat, -1 an odd cat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatStateSpec {
    pub alpha: Complex64,
    pub epsilon: i8,
}

impl CatStateSpec {
    pub fn new(alpha: Complex64, epsilon: i8) -> Result<Self> {
        if !matches!(epsilon, -1 | 0 | 1) {
            return Err(Error::InvalidConfig {
                key: "epsilon",
                reason: format!("must be -1, 0 or 1, got {epsilon}"),
            });
        }
        if epsilon == -1 && alpha.norm() == 0.0 {
            return Err(Error::InvalidConfig {
                key: "alpha",
                reason: "odd cat of the vacuum is the null vector".into(),
            });
        }
        Ok(Self { alpha, epsilon })
    }

    pub fn coherent(alpha: f64) -> Self {
        Self {
            alpha: Complex64::new(alpha, 0.0),
            epsilon: 0,
        }
    }

    pub fn cat(alpha: f64, epsilon: i8) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0), epsilon)
    }
}

/// Normalization constant N = [1 + eps^2 + 2 eps exp(-2|alpha|^2)]^{-1/2}.
pub fn normalization(spec: &CatStateSpec) -> f64 {
    let eps = spec.epsilon as f64;
    let a2 = spec.alpha.norm_sqr();
    1.0 / (1.0 + eps * eps + 2.0 * eps * (-2.0 * a2).exp()).sqrt()
}

/// Fock amplitude C_n = N exp(-|alpha|^2/2) alpha^n / sqrt(n!) [1 + (-1)^n eps].
///
/// The magnitude is formed in log space so truncation dims beyond ~170 stay
/// finite.
pub fn amplitude(spec: &CatStateSpec, n: u32) -> Complex64 {
    let parity = 1.0 + if n % 2 == 0 { 1.0 } else { -1.0 } * spec.epsilon as f64;
    if parity == 0.0 {
        return Complex64::ZERO;
    }
    let r = spec.alpha.norm();
    if r == 0.0 {
        return if n == 0 {
            Complex64::new(normalization(spec) * parity, 0.0)
        } else {
            Complex64::ZERO
        };
    }
    let log_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * log_factorial(n as u64);
    let phase = (spec.alpha / r).powu(n);
    normalization(spec) * parity * log_mag.exp() * phase
}

/// Truncated amplitude list of one mode, with its captured norm.
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    pub coeffs: Vec<Complex64>,
    pub dim: usize,
}

impl AmplitudeTable {
    /// Sum of |C_n|^2 over the table; approaches 1 as dim grows.
    pub fn captured_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

pub fn amplitude_table(spec: &CatStateSpec, dim: usize) -> AmplitudeTable {
    let coeffs = (0..dim as u32).map(|n| amplitude(spec, n)).collect();
    AmplitudeTable { coeffs, dim }
}

/// Safety margin added on top of the Poisson tail cut; downstream index
/// shifts by k1, k2 consume a few extra levels.
const TRUNCATION_MARGIN: usize = 8;
const TRUNCATION_FLOOR: usize = 16;

/// Smallest dim (plus margin, never below 16) whose Poisson(|alpha|^2) tail
/// mass is below `tail_tol`.
pub fn choose_truncation(alpha: Complex64, tail_tol: f64) -> usize {
    assert!(tail_tol > 0.0 && tail_tol < 1.0, "tail_tol must be in (0, 1)");
    let lambda = alpha.norm_sqr();
    if lambda == 0.0 {
        return TRUNCATION_FLOOR;
    }
    // Walk the Poisson pmf until the remaining tail drops below tail_tol.
    let mut log_p = -lambda; // ln P(0)
    let mut cdf = log_p.exp();
    let mut n = 0u64;
    while 1.0 - cdf >= tail_tol && n < 10_000 {
        n += 1;
        log_p += lambda.ln() - (n as f64).ln();
        cdf += log_p.exp();
    }
    ((n as usize + 1) + TRUNCATION_MARGIN).max(TRUNCATION_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalization(&CatStateSpec::coherent(3.7)), 1.0);
        let even_vac = CatStateSpec::cat(0.0, 1).unwrap();
        assert_eq!(normalization(&even_vac), 0.5);
        // alpha = 2, eps = +1: direct scalar evaluation of the defining formula.
        let spec = CatStateSpec::cat(2.0, 1).unwrap();
        let expected = 1.0 / (2.0f64 + 2.0 * (-8.0f64).exp()).sqrt();
        assert_abs_diff_eq!(normalization(&spec), expected, epsilon = 1e-15);
    }

    #[test]
    fn amplitude_parity_zeros() {
        let even = CatStateSpec::cat(3.0, 1).unwrap();
        assert_eq!(amplitude(&even, 5), Complex64::ZERO);
        let odd = CatStateSpec::cat(3.0, -1).unwrap();
        assert_eq!(amplitude(&odd, 4), Complex64::ZERO);
        let even_vac = CatStateSpec::cat(0.0, 1).unwrap();
        assert_eq!(amplitude(&even_vac, 0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn vacuum_table() {
        let table = amplitude_table(&CatStateSpec::coherent(0.0), 4);
        assert_eq!(table.coeffs[0], Complex64::new(1.0, 0.0));
        assert!(table.coeffs[1..].iter().all(|c| *c == Complex64::ZERO));
    }

    #[test]
    fn coherent_table_matches_poisson_law() {
        let spec = CatStateSpec::coherent(2.5);
        let lambda = 6.25f64;
        let table = amplitude_table(&spec, 40);
        let mode = lambda.floor() as usize;
        let expected =
            (-lambda + mode as f64 * lambda.ln() - log_factorial(mode as u64)).exp();
        let got = table.coeffs[mode].norm_sqr();
        assert!(((got - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn even_cat_table_has_zero_odd_entries() {
        let spec = CatStateSpec::cat(5.0, 1).unwrap();
        let table = amplitude_table(&spec, 80);
        for n in (1..80).step_by(2) {
            assert_eq!(table.coeffs[n], Complex64::ZERO);
        }
    }

    /// Independent Poisson tail summation used to pin choose_truncation.
    fn poisson_tail(lambda: f64, from: usize) -> f64 {
        let mut log_p = -lambda;
        let mut head = 0.0;
        for n in 0..from {
            head += log_p.exp();
            log_p += lambda.ln() - ((n + 1) as f64).ln();
        }
        1.0 - head
    }

    #[test]
    fn choose_truncation_floor_and_tail() {
        assert_eq!(choose_truncation(Complex64::ZERO, 1e-6), 16);
        for alpha in [3.0, 5.0] {
            let dim = choose_truncation(Complex64::new(alpha, 0.0), 1e-12);
            // tail beyond dim - margin - 1 is below tolerance
            assert!(poisson_tail(alpha * alpha, dim - 8) < 1e-12, "alpha = {alpha}, dim = {dim}");
        }
        let dim5 = choose_truncation(Complex64::new(5.0, 0.0), 1e-12);
        assert!((75..=90).contains(&dim5), "dim5 = {dim5}");
    }

    #[test]
    fn captured_norm_reaches_tolerance() {
        let spec = CatStateSpec::coherent(5.0);
        let dim = choose_truncation(spec.alpha, 1e-12);
        let table = amplitude_table(&spec, dim);
        assert!(table.captured_norm() >= 1.0 - 1e-12);
        assert!(table.captured_norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn rejects_odd_vacuum_cat() {
        assert!(CatStateSpec::cat(0.0, -1).is_err());
        assert!(CatStateSpec::new(Complex64::new(1.0, 0.0), 2).is_err());
    }

    proptest! {
        #[test]
        fn norm_convergence_is_monotone(alpha in 0.1f64..4.0, eps in -1i8..=1) {
            let spec = CatStateSpec::new(Complex64::new(alpha, 0.0), eps).unwrap();
            let mut prev = 0.0;
            for dim in [4usize, 8, 16, 32, 64] {
                let norm = amplitude_table(&spec, dim).captured_norm();
                prop_assert!(norm >= prev - 1e-15);
                prev = norm;
            }
            prop_assert!(prev <= 1.0 + 1e-12);
        }

        #[test]
        fn complex_alpha_norm_matches(re in -3.0f64..3.0, im in -3.0f64..3.0, eps in -1i8..=1) {
            let alpha = Complex64::new(re, im);
            prop_assume!(alpha.norm() > 1e-6 || eps != -1);
            let spec = CatStateSpec::new(alpha, eps).unwrap();
            let dim = choose_truncation(alpha, 1e-13);
            let table = amplitude_table(&spec, dim);
            prop_assert!((table.captured_norm() - 1.0).abs() < 1e-10);
        }
    }
}

//! Wigner-function values of the field modes: phase-space-origin values,
//! the parity identities tying them to the atomic inversion, and pointwise
//! grid evaluation through the Fock-basis kernel.
//!
//! Convention: single-mode values carry prefactor 1/pi (so W_j(0) =
//! <(-1)^{n_j}>/pi) and the joint value carries 1/pi^2; the coordinate chi
//! is sqrt(2) times the coherent displacement, i.e. a coherent state |a>
//! has W(chi) = exp(-|chi - sqrt(2) a|^2)/pi.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::analysis::TimeSeries;
use crate::dynamics::{
    atomic_inversion, initial_state, rabi_frequency, reduced_density, EvolvedState, FieldMode,
    SystemConfig,
};
use crate::error::{Error, Result};
use crate::numerics::{assoc_laguerre, log_factorial};
use crate::states::amplitude_table;

/// W values at the phase-space origin: both single modes and the joint one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerOriginValues {
    pub w1: f64,
    pub w2: f64,
    pub joint: f64,
}

/// Origin values as parity expectations over the field occupation.
pub fn wigner_origin(state: &EvolvedState) -> WignerOriginValues {
    let mut v = WignerOriginValues {
        w1: 0.0,
        w2: 0.0,
        joint: 0.0,
    };
    for ((n1, n2), _) in state.psi_plus.indexed_iter() {
        let p = state.field_probability(n1, n2);
        let s1 = if n1 % 2 == 0 { 1.0 } else { -1.0 };
        let s2 = if n2 % 2 == 0 { 1.0 } else { -1.0 };
        v.w1 += s1 * p;
        v.w2 += s2 * p;
        v.joint += s1 * s2 * p;
    }
    v.w1 /= PI;
    v.w2 /= PI;
    v.joint /= PI * PI;
    v
}

/// Kernel entry <n| parity-displaced |n'> for n >= n', without the 1/pi
/// prefactor; the lower triangle is its conjugate.
fn kernel_upper(n: usize, np: usize, chi: Complex64) -> Complex64 {
    debug_assert!(n >= np);
    let x = 2.0 * chi.norm_sqr();
    let sign = if np % 2 == 0 { 1.0 } else { -1.0 };
    let ratio = (0.5 * (log_factorial(np as u64) - log_factorial(n as u64))).exp();
    let lag = assoc_laguerre(np as u32, (n - np) as i32, x).expect("nonnegative upper index");
    let power = (2.0f64.sqrt() * chi.conj()).powu((n - np) as u32);
    sign * ratio * lag * (-chi.norm_sqr()).exp() * power
}

/// Full kernel matrix indexed [n][n'].
fn kernel_matrix(dim: usize, chi: Complex64) -> Array2<Complex64> {
    let mut k = Array2::zeros((dim, dim));
    for n in 0..dim {
        for np in 0..=n {
            let v = kernel_upper(n, np, chi);
            k[[n, np]] = v;
            k[[np, n]] = v.conj();
        }
    }
    k
}

/// Single-mode Wigner values at the listed phase-space points.
pub fn wigner_mode_points(
    state: &EvolvedState,
    mode: FieldMode,
    points: &[Complex64],
) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let rho = reduced_density(state, mode);
    let dim = rho.nrows();
    Ok(points
        .iter()
        .map(|&chi| {
            let mut acc = 0.0;
            for n in 0..dim {
                acc += (rho[[n, n]] * kernel_upper(n, n, chi)).re;
                for np in 0..n {
                    acc += 2.0 * (rho[[n, np]] * kernel_upper(n, np, chi)).re;
                }
            }
            acc / PI
        })
        .collect())
}

/// Joint Wigner values at the listed (chi1, chi2) points.
pub fn wigner_joint_points(
    state: &EvolvedState,
    points: &[(Complex64, Complex64)],
) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let (d1, d2) = state.psi_plus.dim();
    Ok(points
        .iter()
        .map(|&(chi1, chi2)| {
            let k1 = kernel_matrix(d1, chi1);
            let k2 = kernel_matrix(d2, chi2);
            let mut acc = Complex64::ZERO;
            for psi in [&state.psi_plus, &state.psi_minus] {
                // sum over (n,m,n',m') of psi[n,m] conj(psi[n',m'])
                // K1[n,n'] K2[m,m'], contracted as K1 . (psi K2 psi^dagger)
                let s = psi.dot(&k2);
                let g = s.dot(&psi.mapv(|c| c.conj()).t());
                acc += (&k1 * &g).sum();
            }
            acc.re / (PI * PI)
        })
        .collect())
}

/// Which parity identity links the origin W values to the inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityKind {
    /// Even cats, k1 and k2 odd: pi W1 = pi W2 = <sigma_z>, pi^2 W = 1.
    CatOddOdd,
    /// Even cats, k1 and k2 even: pi W1 = pi W2 = 1, pi^2 W = 1.
    CatEvenEven,
    /// Even cats, k1 odd / k2 even: pi W1 = pi^2 W = <sigma_z>, pi W2 = 1.
    CatOddEven,
    /// Even cats, k1 even / k2 odd: pi W2 = pi^2 W = <sigma_z>, pi W1 = 1.
    CatEvenOdd,
    /// Coherent inputs, both k odd: W(0,T) is frozen at W1(0,0) W2(0,0).
    CoherentOddOdd,
}

/// Report of an origin-identity sweep: the identity that applies and the
/// worst residual (over the identity's relations) at each grid time.
#[derive(Debug, Clone)]
pub struct OriginIdentityReport {
    pub kind: IdentityKind,
    pub residuals: TimeSeries,
}

/// Picks the parity identity implied by the configuration, if any.
///
/// All identities need the atom excited: a ground-state admixture scatters
/// amplitude into the opposite number-parity class and breaks the
/// single-mode relations.
pub fn classify_origin_identity(config: &SystemConfig) -> Result<IdentityKind> {
    let no_identity = |why: &str| Err(Error::Unsupported(format!("no origin identity applies: {why}")));
    if config.varphi.sin().abs() > 1e-12 {
        return no_identity("the atom must start in the excited state");
    }
    let (odd1, odd2) = (config.k1 % 2 == 1, config.k2 % 2 == 1);
    match (config.mode1.epsilon, config.mode2.epsilon) {
        (1, 1) => Ok(match (odd1, odd2) {
            (true, true) => IdentityKind::CatOddOdd,
            (false, false) => IdentityKind::CatEvenEven,
            (true, false) => IdentityKind::CatOddEven,
            (false, true) => IdentityKind::CatEvenOdd,
        }),
        (0, 0) if odd1 && odd2 => Ok(IdentityKind::CoherentOddOdd),
        _ => no_identity("needs even cats in both modes, or coherent inputs with both k odd"),
    }
}

/// Sweeps the applicable origin identity over a time grid.
///
/// The relations are derived from number-parity conservation of the
/// interaction (each transition shifts n1 by k1 and n2 by k2), so they hold
/// to rounding even for the truncation-frozen amplitudes. In the odd-odd
/// cases the conserved joint parity makes W(0,T) time independent and
/// positive; for even cats this gives pi W2 = +<sigma_z> and
/// pi^2 W = +1, and for coherent inputs W(0,T) = +W1(0,0) W2(0,0).
pub fn origin_inversion_identity(
    config: &SystemConfig,
    t_grid: &[f64],
) -> Result<OriginIdentityReport> {
    if t_grid.is_empty() {
        return Err(Error::Unsupported("empty time grid".into()));
    }
    let kind = classify_origin_identity(config)?;
    let init = initial_state(config)?;
    let origin0 = wigner_origin(&init);
    let mut state = init;
    let mut prev = 0.0;
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        state = state.evolved_by(t - prev);
        prev = t;
        let w = wigner_origin(&state);
        let sz = atomic_inversion(&state);
        let r = match kind {
            IdentityKind::CatOddOdd => [
                (PI * w.w1 - sz).abs(),
                (PI * w.w2 - sz).abs(),
                (PI * PI * w.joint - 1.0).abs(),
            ],
            IdentityKind::CatEvenEven => [
                (PI * w.w1 - 1.0).abs(),
                (PI * w.w2 - 1.0).abs(),
                (PI * PI * w.joint - 1.0).abs(),
            ],
            IdentityKind::CatOddEven => [
                (PI * w.w1 - sz).abs(),
                (PI * PI * w.joint - sz).abs(),
                (PI * w.w2 - 1.0).abs(),
            ],
            IdentityKind::CatEvenOdd => [
                (PI * w.w2 - sz).abs(),
                (PI * PI * w.joint - sz).abs(),
                (PI * w.w1 - 1.0).abs(),
            ],
            IdentityKind::CoherentOddOdd => [
                PI * PI * (w.joint - origin0.joint).abs(),
                PI * PI * (w.joint - origin0.w1 * origin0.w2).abs(),
                0.0,
            ],
        };
        values.push(r.into_iter().fold(0.0f64, f64::max));
    }
    Ok(OriginIdentityReport {
        kind,
        residuals: TimeSeries::new(t_grid.to_vec(), values)?,
    })
}

/// Closed-form origin value of W1 for coherent inputs with the atom excited
/// and k1 odd: (1/pi) sum C^2_{n,m+k2} cos(2 T Lambda_{n,m} + n pi),
/// covering the coupled pairs only (frozen amplitudes excluded).
pub fn coherent_origin_w1(config: &SystemConfig, t: f64) -> f64 {
    let t1 = amplitude_table(&config.mode1, config.dim1 + config.k1);
    let t2 = amplitude_table(&config.mode2, config.dim2 + config.k2);
    let mut acc = 0.0;
    for n in 0..config.dim1 {
        for m in 0..config.dim2 {
            let c2 = (t1.coeffs[n] * t2.coeffs[m + config.k2]).norm_sqr();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += c2 * sign * (2.0 * t * rabi_frequency(config.k1, config.k2, n, m)).cos();
        }
    }
    acc / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, lin_grid};
    use crate::states::CatStateSpec;
    use approx::assert_abs_diff_eq;

    fn cfg(e1: i8, e2: i8, k1: usize, k2: usize, alpha: f64) -> SystemConfig {
        SystemConfig::excited(
            CatStateSpec::cat(alpha, e1).unwrap(),
            CatStateSpec::cat(alpha, e2).unwrap(),
            k1,
            k2,
        )
        .unwrap()
    }

    #[test]
    fn cat_odd_odd_identity_is_exact() {
        // alpha = 2 keeps a visible frozen weight (~2%); the parity
        // relations must still hold to rounding because frozen amplitudes
        // keep their parity.
        let c = cfg(1, 1, 1, 1, 2.0);
        for t in [0.0, 1.8, 4.4, 9.0] {
            let state = evolve(&c, t).unwrap();
            let w = wigner_origin(&state);
            let sz = atomic_inversion(&state);
            assert_abs_diff_eq!(PI * w.w1, sz, epsilon = 1e-11);
            assert_abs_diff_eq!(PI * w.w2, sz, epsilon = 1e-11);
            assert_abs_diff_eq!(PI * PI * w.joint, 1.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn cat_even_even_identity_is_exact() {
        let c = cfg(1, 1, 2, 2, 2.0);
        for t in [0.0, 2.5, 5.0] {
            let w = wigner_origin(&evolve(&c, t).unwrap());
            assert_abs_diff_eq!(PI * w.w1, 1.0, epsilon = 1e-11);
            assert_abs_diff_eq!(PI * w.w2, 1.0, epsilon = 1e-11);
            assert_abs_diff_eq!(PI * PI * w.joint, 1.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn cat_mixed_parity_identity_is_exact() {
        let c = cfg(1, 1, 1, 2, 2.0);
        for t in [0.7, 3.1] {
            let state = evolve(&c, t).unwrap();
            let w = wigner_origin(&state);
            let sz = atomic_inversion(&state);
            assert_abs_diff_eq!(PI * w.w1, sz, epsilon = 1e-11);
            assert_abs_diff_eq!(PI * PI * w.joint, sz, epsilon = 1e-11);
            assert_abs_diff_eq!(PI * w.w2, 1.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn coherent_odd_joint_origin_is_frozen() {
        let c = cfg(0, 0, 1, 1, 2.0);
        let w0 = wigner_origin(&evolve(&c, 0.0).unwrap());
        assert!(w0.joint > 0.0);
        assert_abs_diff_eq!(w0.joint, w0.w1 * w0.w2, epsilon = 1e-13);
        for t in [1.3, 4.7, 9.9] {
            let w = wigner_origin(&evolve(&c, t).unwrap());
            assert_abs_diff_eq!(w.joint, w0.joint, epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_origin_w1_matches_up_to_frozen_weight() {
        let c = cfg(0, 0, 1, 1, 2.0);
        // The closed-form sum omits the frozen plus amplitudes with
        // n2 < k2; add their exact parity contribution back.
        let t1 = amplitude_table(&c.mode1, c.dim1 + c.k1);
        let t2 = amplitude_table(&c.mode2, c.dim2 + c.k2);
        let parity1: f64 = t1
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, a)| if n % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum();
        let frozen: f64 = parity1 * (0..c.k2).map(|m| t2.coeffs[m].norm_sqr()).sum::<f64>() / PI;
        for t in [0.0, 2.2, 6.1] {
            let w = wigner_origin(&evolve(&c, t).unwrap());
            assert_abs_diff_eq!(w.w1, coherent_origin_w1(&c, t) + frozen, epsilon = 1e-11);
        }
    }

    #[test]
    fn identity_report_classification() {
        let grid = lin_grid(0.0, 3.0, 4);
        let kinds = [
            (cfg(1, 1, 1, 1, 2.0), IdentityKind::CatOddOdd),
            (cfg(1, 1, 2, 2, 2.0), IdentityKind::CatEvenEven),
            (cfg(1, 1, 1, 2, 2.0), IdentityKind::CatOddEven),
            (cfg(1, 1, 2, 1, 2.0), IdentityKind::CatEvenOdd),
            (cfg(0, 0, 1, 1, 2.0), IdentityKind::CoherentOddOdd),
        ];
        for (c, kind) in kinds {
            let report = origin_inversion_identity(&c, &grid).unwrap();
            assert_eq!(report.kind, kind);
            for r in &report.residuals.values {
                assert!(*r < 1e-10, "{kind:?}: residual {r}");
            }
        }
        // mixed cat/coherent inputs and tilted atoms carry no identity
        assert!(origin_inversion_identity(&cfg(0, 1, 1, 1, 2.0), &grid).is_err());
        let mut tilted = cfg(1, 1, 1, 1, 2.0);
        tilted.varphi = 0.5;
        assert!(origin_inversion_identity(&tilted, &grid).is_err());
        assert!(origin_inversion_identity(&cfg(0, 0, 1, 2, 2.0), &grid).is_err());
    }

    #[test]
    fn grid_origin_matches_origin_values() {
        let c = cfg(1, 0, 1, 2, 2.0);
        let state = evolve(&c, 2.3).unwrap();
        let w = wigner_origin(&state);
        let zero = Complex64::ZERO;
        let w1 = wigner_mode_points(&state, FieldMode::One, &[zero]).unwrap()[0];
        let w2 = wigner_mode_points(&state, FieldMode::Two, &[zero]).unwrap()[0];
        let wj = wigner_joint_points(&state, &[(zero, zero)]).unwrap()[0];
        assert_abs_diff_eq!(w1, w.w1, epsilon = 1e-12);
        assert_abs_diff_eq!(w2, w.w2, epsilon = 1e-12);
        assert_abs_diff_eq!(wj, w.joint, epsilon = 1e-12);
    }

    #[test]
    fn coherent_state_is_a_displaced_gaussian() {
        let alpha = 2.0;
        let c = cfg(0, 0, 1, 1, alpha);
        let state = evolve(&c, 0.0).unwrap();
        let points = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.5),
            Complex64::new(2.0f64.sqrt() * alpha, 0.0),
            Complex64::new(-0.7, 1.2),
        ];
        let got = wigner_mode_points(&state, FieldMode::One, &points).unwrap();
        for (chi, w) in points.iter().zip(got) {
            let expected = (-(chi - 2.0f64.sqrt() * alpha).norm_sqr()).exp() / PI;
            assert_abs_diff_eq!(w, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn joint_factorizes_for_product_states() {
        let c = SystemConfig::excited(
            CatStateSpec::cat(1.5, 1).unwrap(),
            CatStateSpec::coherent(2.0),
            1,
            1,
        )
        .unwrap();
        let state = evolve(&c, 0.0).unwrap();
        let p1 = Complex64::new(0.8, -0.3);
        let p2 = Complex64::new(-1.1, 0.4);
        let w1 = wigner_mode_points(&state, FieldMode::One, &[p1]).unwrap()[0];
        let w2 = wigner_mode_points(&state, FieldMode::Two, &[p2]).unwrap()[0];
        let wj = wigner_joint_points(&state, &[(p1, p2)]).unwrap()[0];
        assert_abs_diff_eq!(wj, w1 * w2, epsilon = 1e-10);
    }

    /// Series-form Laguerre polynomial with integer binomials; independent
    /// of the recurrence used in production.
    fn laguerre_series(n: usize, a: usize, x: f64) -> f64 {
        let binom = |top: usize, k: usize| -> f64 {
            let mut v = 1.0;
            for i in 0..k {
                v *= (top - i) as f64 / (k - i) as f64;
            }
            v
        };
        let mut acc = 0.0;
        let mut fact = 1.0;
        for i in 0..=n {
            if i > 0 {
                fact *= i as f64;
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom(n + a, n - i) * x.powi(i as i32) / fact;
        }
        acc
    }

    fn brute_kernel(n: usize, np: usize, chi: Complex64) -> Complex64 {
        if n < np {
            return brute_kernel(np, n, chi).conj();
        }
        let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
        let sign = if np % 2 == 0 { 1.0 } else { -1.0 };
        sign * (fact(np) / fact(n)).sqrt()
            * (-chi.norm_sqr()).exp()
            * (2.0f64.sqrt() * chi.conj()).powu((n - np) as u32)
            * laguerre_series(np, n - np, 2.0 * chi.norm_sqr())
    }

    #[test]
    fn brute_force_kernel_sums_match() {
        // small hand-built two-branch state
        let mut state = evolve(&cfg(0, 0, 1, 1, 0.5), 0.0).unwrap();
        let (d1, d2) = state.psi_plus.dim();
        let mut seed = 0.61f64;
        for arr in [&mut state.psi_plus, &mut state.psi_minus] {
            for v in arr.iter_mut() {
                seed = (seed * 877.41).fract();
                *v = Complex64::new(seed - 0.5, seed * seed - 0.3);
            }
        }
        let chi1 = Complex64::new(0.6, -0.4);
        let chi2 = Complex64::new(-0.2, 0.9);

        let rho1 = reduced_density(&state, FieldMode::One);
        let mut w1_brute = Complex64::ZERO;
        for n in 0..d1 {
            for np in 0..d1 {
                w1_brute += rho1[[n, np]] * brute_kernel(n, np, chi1);
            }
        }
        assert!(w1_brute.im.abs() < 1e-12);
        let w1 = wigner_mode_points(&state, FieldMode::One, &[chi1]).unwrap()[0];
        assert_abs_diff_eq!(w1, w1_brute.re / PI, epsilon = 1e-10);

        let mut wj_brute = Complex64::ZERO;
        for psi in [&state.psi_plus, &state.psi_minus] {
            for n in 0..d1 {
                for m in 0..d2 {
                    for np in 0..d1 {
                        for mp in 0..d2 {
                            wj_brute += psi[[n, m]]
                                * psi[[np, mp]].conj()
                                * brute_kernel(n, np, chi1)
                                * brute_kernel(m, mp, chi2);
                        }
                    }
                }
            }
        }
        assert!(wj_brute.im.abs() < 1e-10);
        let wj = wigner_joint_points(&state, &[(chi1, chi2)]).unwrap()[0];
        assert_abs_diff_eq!(wj, wj_brute.re / (PI * PI), epsilon = 1e-9);
    }

    #[test]
    fn empty_point_lists_are_rejected() {
        let state = evolve(&cfg(0, 0, 1, 1, 1.0), 0.0).unwrap();
        assert!(matches!(
            wigner_mode_points(&state, FieldMode::One, &[]),
            Err(Error::EmptyPoints)
        ));
        assert!(matches!(wigner_joint_points(&state, &[]), Err(Error::EmptyPoints)));
    }
}

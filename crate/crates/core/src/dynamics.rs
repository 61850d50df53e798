//! Exact time evolution of the atom + two-mode state in the interaction
//! picture, atomic inversion and photon-number statistics.
//!
//! The interaction couples the pairs {|+, n, m+k2>, |-, n+k1, m>} with Rabi
//! frequency Lambda_{n,m}; everything else (excited atom with fewer than k2
//! photons in mode 2, ground atom with fewer than k1 in mode 1) is
//! annihilated by the interaction and stays frozen. Pairs whose partner
//! falls outside the truncation are kept frozen as well, so the map is
//! exactly unitary on the stored amplitudes.

use ndarray::Array2;
use num_complex::Complex64;

use crate::analysis::TimeSeries;
use crate::error::{Error, Result};
use crate::numerics::log_factorial;
use crate::states::{amplitude_table, choose_truncation, CatStateSpec};

/// Full experiment definition: both cat specs, transition parameters,
/// atomic angles and truncation dims.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub mode1: CatStateSpec,
    pub mode2: CatStateSpec,
    /// Photons of mode 1 emitted per atomic transition.
    pub k1: usize,
    /// Photons of mode 2 absorbed per atomic transition.
    pub k2: usize,
    /// Atomic mixing angle: cos(varphi)|+> + e^{i phi} sin(varphi)|->.
    pub varphi: f64,
    /// Atomic relative phase.
    pub phi: f64,
    pub dim1: usize,
    pub dim2: usize,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k1 + self.k2 < 1 {
            return Err(Error::InvalidConfig {
                key: "k1",
                reason: "k1 + k2 must be at least 1".into(),
            });
        }
        if self.dim1 <= self.k1 {
            return Err(Error::InvalidConfig {
                key: "dim1",
                reason: format!("dim1 = {} must exceed k1 = {}", self.dim1, self.k1),
            });
        }
        if self.dim2 <= self.k2 {
            return Err(Error::InvalidConfig {
                key: "dim2",
                reason: format!("dim2 = {} must exceed k2 = {}", self.dim2, self.k2),
            });
        }
        Ok(())
    }

    /// Config with truncation dims chosen from the Poisson tails.
    pub fn with_auto_dims(
        mode1: CatStateSpec,
        mode2: CatStateSpec,
        k1: usize,
        k2: usize,
        varphi: f64,
        phi: f64,
        tail_tol: f64,
    ) -> Result<Self> {
        let cfg = Self {
            mode1,
            mode2,
            k1,
            k2,
            varphi,
            phi,
            dim1: choose_truncation(mode1.alpha, tail_tol),
            dim2: choose_truncation(mode2.alpha, tail_tol),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Excited atom, both field phases zero.
    pub fn excited(mode1: CatStateSpec, mode2: CatStateSpec, k1: usize, k2: usize) -> Result<Self> {
        Self::with_auto_dims(mode1, mode2, k1, k2, 0.0, 0.0, 1e-12)
    }
}

/// Rabi frequency Lambda_{n,m} = sqrt[(m+k2)! (n+k1)! / (n! m!)].
pub fn rabi_frequency(k1: usize, k2: usize, n: usize, m: usize) -> f64 {
    (0.5 * (log_factorial((m + k2) as u64) + log_factorial((n + k1) as u64)
        - log_factorial(n as u64)
        - log_factorial(m as u64)))
        .exp()
}

/// Field amplitudes at scaled time T, split over the two atomic branches.
///
/// `psi_plus[[n1, n2]]` rides on the atom-excited branch, `psi_minus` on the
/// atom-ground branch; array shapes are (dim1 + k1, dim2 + k2).
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub t: f64,
    pub k1: usize,
    pub k2: usize,
    pub dim1: usize,
    pub dim2: usize,
    pub psi_plus: Array2<Complex64>,
    pub psi_minus: Array2<Complex64>,
}

impl EvolvedState {
    pub fn total_norm(&self) -> f64 {
        self.psi_plus.iter().map(|c| c.norm_sqr()).sum::<f64>()
            + self.psi_minus.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Occupation probability of |n1, n2> irrespective of the atom.
    pub fn field_probability(&self, n1: usize, n2: usize) -> f64 {
        self.psi_plus[[n1, n2]].norm_sqr() + self.psi_minus[[n1, n2]].norm_sqr()
    }

    /// Applies the interaction unitary for an additional scaled time `dt`.
    pub fn evolved_by(&self, dt: f64) -> EvolvedState {
        let mut out = self.clone();
        propagate(
            &mut out.psi_plus,
            &mut out.psi_minus,
            self.k1,
            self.k2,
            self.dim1,
            self.dim2,
            dt,
        );
        out.t = self.t + dt;
        out
    }

    pub fn fidelity_with(&self, other: &EvolvedState) -> f64 {
        let dot: Complex64 = self
            .psi_plus
            .iter()
            .zip(other.psi_plus.iter())
            .chain(self.psi_minus.iter().zip(other.psi_minus.iter()))
            .map(|(a, b)| a.conj() * b)
            .sum();
        dot.norm_sqr() / (self.total_norm() * other.total_norm())
    }
}

fn propagate(
    plus: &mut Array2<Complex64>,
    minus: &mut Array2<Complex64>,
    k1: usize,
    k2: usize,
    dim1: usize,
    dim2: usize,
    dt: f64,
) {
    for n in 0..dim1 {
        for m in 0..dim2 {
            let lambda = rabi_frequency(k1, k2, n, m);
            let (s, c) = (dt * lambda).sin_cos();
            let a = plus[[n, m + k2]];
            let b = minus[[n + k1, m]];
            plus[[n, m + k2]] = c * a - Complex64::I * s * b;
            minus[[n + k1, m]] = c * b - Complex64::I * s * a;
        }
    }
}

/// Initial product state |cat1> x |cat2> x (cos(varphi)|+> + e^{i phi} sin(varphi)|->).
pub fn initial_state(config: &SystemConfig) -> Result<EvolvedState> {
    config.validate()?;
    let d1 = config.dim1 + config.k1;
    let d2 = config.dim2 + config.k2;
    let t1 = amplitude_table(&config.mode1, d1);
    let t2 = amplitude_table(&config.mode2, d2);
    let cp = Complex64::new(config.varphi.cos(), 0.0);
    let cm = Complex64::from_polar(config.varphi.sin(), config.phi);
    let mut plus = Array2::zeros((d1, d2));
    let mut minus = Array2::zeros((d1, d2));
    for n1 in 0..d1 {
        for n2 in 0..d2 {
            let c = t1.coeffs[n1] * t2.coeffs[n2];
            plus[[n1, n2]] = cp * c;
            minus[[n1, n2]] = cm * c;
        }
    }
    Ok(EvolvedState {
        t: 0.0,
        k1: config.k1,
        k2: config.k2,
        dim1: config.dim1,
        dim2: config.dim2,
        psi_plus: plus,
        psi_minus: minus,
    })
}

/// Exact analytic state at scaled time T.
pub fn evolve(config: &SystemConfig, t: f64) -> Result<EvolvedState> {
    Ok(initial_state(config)?.evolved_by(t).with_time(t))
}

impl EvolvedState {
    fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}

/// Selects one of the two field modes in observables that act on a single
/// mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    One,
    Two,
}

/// Reduced density matrix of one field mode, tracing out the atom and the
/// other mode.
pub fn reduced_density(state: &EvolvedState, mode: FieldMode) -> Array2<Complex64> {
    let rho_of = |psi: &Array2<Complex64>| -> Array2<Complex64> {
        let conj = psi.mapv(|c| c.conj());
        match mode {
            FieldMode::One => psi.dot(&conj.t()),
            FieldMode::Two => psi.t().dot(&conj),
        }
    };
    rho_of(&state.psi_plus) + rho_of(&state.psi_minus)
}

/// Population difference between the excited and ground atomic branches.
pub fn atomic_inversion(state: &EvolvedState) -> f64 {
    state.psi_plus.iter().map(|c| c.norm_sqr()).sum::<f64>()
        - state.psi_minus.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// Precomputed per-pair data for sweeping the inversion over time without
/// re-materializing the state: sigma_z(T) = frozen + sum_j [w_j cos(2 T L_j)
/// - 2 v_j sin(2 T L_j)].
pub struct InversionKernel {
    frozen: f64,
    terms: Vec<(f64, f64, f64)>, // (lambda, w, v)
}

impl InversionKernel {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        let init = initial_state(config)?;
        let (d1, d2) = (config.dim1 + config.k1, config.dim2 + config.k2);
        let mut paired = Array2::from_elem((d1, d2), (false, false));
        let mut terms = Vec::with_capacity(config.dim1 * config.dim2);
        for n in 0..config.dim1 {
            for m in 0..config.dim2 {
                let a = init.psi_plus[[n, m + config.k2]];
                let b = init.psi_minus[[n + config.k1, m]];
                paired[[n, m + config.k2]].0 = true;
                paired[[n + config.k1, m]].1 = true;
                let w = a.norm_sqr() - b.norm_sqr();
                let v = (a * b.conj()).im;
                if w != 0.0 || v != 0.0 {
                    terms.push((rabi_frequency(config.k1, config.k2, n, m), w, v));
                }
            }
        }
        let mut frozen = 0.0;
        for n1 in 0..d1 {
            for n2 in 0..d2 {
                let (p, q) = paired[[n1, n2]];
                if !p {
                    frozen += init.psi_plus[[n1, n2]].norm_sqr();
                }
                if !q {
                    frozen -= init.psi_minus[[n1, n2]].norm_sqr();
                }
            }
        }
        Ok(Self { frozen, terms })
    }

    pub fn inversion_at(&self, t: f64) -> f64 {
        let mut acc = self.frozen;
        for &(lambda, w, v) in &self.terms {
            let (s, c) = (2.0 * t * lambda).sin_cos();
            acc += w * c - 2.0 * v * s;
        }
        acc
    }
}

/// Atomic inversion swept over a time grid (closed-form fast path).
pub fn inversion_series(config: &SystemConfig, t_grid: &[f64]) -> Result<TimeSeries> {
    if t_grid.is_empty() {
        return Err(Error::Unsupported("empty time grid".into()));
    }
    let kernel = InversionKernel::new(config)?;
    TimeSeries::new(
        t_grid.to_vec(),
        t_grid.iter().map(|&t| kernel.inversion_at(t)).collect(),
    )
}

/// First and second moments of the photon-number operators of both modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMoments {
    pub mean1: f64,
    pub mean2: f64,
    pub mean_sq1: f64,
    pub mean_sq2: f64,
    pub cross: f64,
}

impl PhotonMoments {
    pub fn var1(&self) -> f64 {
        self.mean_sq1 - self.mean1 * self.mean1
    }
    pub fn var2(&self) -> f64 {
        self.mean_sq2 - self.mean2 * self.mean2
    }
    pub fn covariance(&self) -> f64 {
        self.cross - self.mean1 * self.mean2
    }
    /// Variance of n1 + n2.
    pub fn var_sum(&self) -> f64 {
        self.var1() + self.var2() + 2.0 * self.covariance()
    }
    /// Variance of n1 - n2.
    pub fn var_diff(&self) -> f64 {
        self.var1() + self.var2() - 2.0 * self.covariance()
    }
}

pub fn photon_moments(state: &EvolvedState) -> PhotonMoments {
    let mut m = PhotonMoments {
        mean1: 0.0,
        mean2: 0.0,
        mean_sq1: 0.0,
        mean_sq2: 0.0,
        cross: 0.0,
    };
    for ((n1, n2), _) in state.psi_plus.indexed_iter() {
        let p = state.field_probability(n1, n2);
        let (x, y) = (n1 as f64, n2 as f64);
        m.mean1 += x * p;
        m.mean2 += y * p;
        m.mean_sq1 += x * x * p;
        m.mean_sq2 += y * y * p;
        m.cross += x * y * p;
    }
    m
}

/// Uniformly spaced time grid with `steps` points covering [t_min, t_max].
pub fn lin_grid(t_min: f64, t_max: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 2, "need at least two sweep points");
    let dt = (t_max - t_min) / (steps - 1) as f64;
    (0..steps).map(|i| t_min + dt * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::amplitude;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn coherent_config(a1: f64, a2: f64, k1: usize, k2: usize) -> SystemConfig {
        SystemConfig::excited(CatStateSpec::coherent(a1), CatStateSpec::coherent(a2), k1, k2)
            .unwrap()
    }

    #[test]
    fn rabi_examples() {
        assert_eq!(rabi_frequency(1, 1, 0, 0), 1.0);
        assert_abs_diff_eq!(rabi_frequency(1, 1, 3, 8), 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rabi_frequency(2, 1, 1, 0), 6.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn time_zero_is_product_state() {
        let cfg = SystemConfig::with_auto_dims(
            CatStateSpec::cat(2.0, 1).unwrap(),
            CatStateSpec::coherent(1.5),
            1,
            1,
            0.3,
            0.7,
            1e-12,
        )
        .unwrap();
        let state = evolve(&cfg, 0.0).unwrap();
        assert_abs_diff_eq!(state.total_norm(), 1.0, epsilon = 1e-10);
        let c00 = amplitude(&cfg.mode1, 0) * amplitude(&cfg.mode2, 0);
        assert_abs_diff_eq!(
            (state.psi_plus[[0, 0]] - c00 * cfg.varphi.cos()).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn unitarity_over_long_times() {
        let cfg = SystemConfig::with_auto_dims(
            CatStateSpec::cat(5.0, 1).unwrap(),
            CatStateSpec::cat(5.0, -1).unwrap(),
            2,
            1,
            FRAC_PI_4,
            0.4,
            1e-12,
        )
        .unwrap();
        for t in [0.0, 3.3, 17.0, 50.0] {
            let state = evolve(&cfg, t).unwrap();
            assert_abs_diff_eq!(state.total_norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn norm_bookkeeping_across_branches() {
        // Fig. 1a curve A parameters; phi_at = 0 so psi_minus starts empty.
        let cfg = coherent_config(5.0, 5.0, 1, 1);
        let state = evolve(&cfg, 2.7).unwrap();
        // frozen weight on the excited branch: mode-2 occupation below k2
        let frozen: f64 = (0..cfg.dim1 + cfg.k1)
            .map(|n1| state.psi_plus[[n1, 0]].norm_sqr())
            .sum();
        let coupled: f64 = state.total_norm() - frozen;
        assert!(frozen < 1e-9);
        assert_abs_diff_eq!(coupled + frozen, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn inversion_at_time_zero() {
        let cfg = coherent_config(1.0, 2.0, 1, 1);
        assert_abs_diff_eq!(
            atomic_inversion(&evolve(&cfg, 0.0).unwrap()),
            1.0,
            epsilon = 1e-12
        );
        let mut balanced = cfg.clone();
        balanced.varphi = FRAC_PI_4;
        assert_abs_diff_eq!(
            atomic_inversion(&evolve(&balanced, 0.0).unwrap()),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_fock_pair_oscillates_exactly() {
        // Put all weight on |+, 0, 1> with k = (1, 1); the inversion must be
        // cos(2 T Lambda_{0,0}) = cos(2T).
        let cfg = coherent_config(0.5, 0.5, 1, 1);
        let mut state = initial_state(&cfg).unwrap();
        state.psi_plus.fill(Complex64::ZERO);
        state.psi_minus.fill(Complex64::ZERO);
        state.psi_plus[[0, 1]] = Complex64::new(1.0, 0.0);
        for t in [0.3, 1.1, PI] {
            let evolved = state.evolved_by(t);
            assert_abs_diff_eq!(atomic_inversion(&evolved), (2.0 * t).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn time_reversal_inverts_evolution() {
        let cfg = SystemConfig::with_auto_dims(
            CatStateSpec::cat(2.0, -1).unwrap(),
            CatStateSpec::coherent(1.0),
            2,
            2,
            0.9,
            1.3,
            1e-12,
        )
        .unwrap();
        let init = initial_state(&cfg).unwrap();
        let back = evolve(&cfg, 4.2).unwrap().evolved_by(-4.2);
        let err: f64 = init
            .psi_plus
            .iter()
            .zip(back.psi_plus.iter())
            .chain(init.psi_minus.iter().zip(back.psi_minus.iter()))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        assert!(err.sqrt() < 1e-12);
    }

    #[test]
    fn excitation_is_conserved() {
        // Each transition shifts n1 by +k1, n2 by -k2 and the excited-state
        // projector by -1, so <n1 - n2 + (k1 + k2) P_excited> is constant.
        let cfg = SystemConfig::with_auto_dims(
            CatStateSpec::cat(2.0, 1).unwrap(),
            CatStateSpec::coherent(2.0),
            2,
            1,
            FRAC_PI_4,
            PI / 3.0,
            1e-12,
        )
        .unwrap();
        let observable = |state: &EvolvedState| {
            let m = photon_moments(state);
            let excited: f64 = state.psi_plus.iter().map(|c| c.norm_sqr()).sum();
            m.mean1 - m.mean2 + (cfg.k1 + cfg.k2) as f64 * excited
        };
        let reference = observable(&evolve(&cfg, 0.0).unwrap());
        for t in [0.9, 4.4, 12.0] {
            let got = observable(&evolve(&cfg, t).unwrap());
            assert_abs_diff_eq!(got, reference, epsilon = 1e-9);
        }
    }

    /// Literal double sum of the closed-form inversion plus the exact
    /// contribution of the frozen amplitudes (excited with n2 < k2, ground
    /// with n1 < k1), which the double sum does not cover. The frozen weight
    /// is about exp(-|alpha|^2), far from negligible at alpha = 2.
    fn inversion_closed_form(cfg: &SystemConfig, t: f64) -> f64 {
        let d1 = cfg.dim1 + cfg.k1;
        let d2 = cfg.dim2 + cfg.k2;
        let c1 = amplitude_table(&cfg.mode1, d1);
        let c2 = amplitude_table(&cfg.mode2, d2);
        let (cv, sv) = (cfg.varphi.cos(), cfg.varphi.sin());
        let low2: f64 = (0..cfg.k2).map(|n| c2.coeffs[n].norm_sqr()).sum();
        let low1: f64 = (0..cfg.k1).map(|n| c1.coeffs[n].norm_sqr()).sum();
        let mut acc = cv * cv * c1.captured_norm() * low2 - sv * sv * low1 * c2.captured_norm();
        for n in 0..cfg.dim1 {
            for m in 0..cfg.dim2 {
                let ca = (c1.coeffs[n] * c2.coeffs[m + cfg.k2]).norm();
                let cb = (c1.coeffs[n + cfg.k1] * c2.coeffs[m]).norm();
                let lambda = rabi_frequency(cfg.k1, cfg.k2, n, m);
                acc += (ca * ca * cv * cv - cb * cb * sv * sv) * (2.0 * t * lambda).cos()
                    + cfg.phi.sin() * (2.0 * cfg.varphi).sin() * ca * cb
                        * (2.0 * t * lambda).sin();
            }
        }
        acc
    }

    #[test]
    fn inversion_matches_closed_form() {
        for varphi in [0.0, FRAC_PI_2] {
            let mut cfg = coherent_config(2.0, 2.0, 1, 1);
            cfg.varphi = varphi;
            let bound = 1e-9; // only truncation-boundary weight (< 1e-12) is unmodeled
            for t in [0.8, 3.7] {
                let exact = atomic_inversion(&evolve(&cfg, t).unwrap());
                let closed = inversion_closed_form(&cfg, t);
                assert!(
                    (exact - closed).abs() < bound,
                    "varphi = {varphi}, t = {t}: {exact} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn inversion_series_fast_path_matches_evolve() {
        let cfg = SystemConfig::with_auto_dims(
            CatStateSpec::cat(2.0, 1).unwrap(),
            CatStateSpec::coherent(1.5),
            1,
            2,
            0.6,
            0.9,
            1e-12,
        )
        .unwrap();
        let grid = lin_grid(0.0, 6.0, 7);
        let series = inversion_series(&cfg, &grid).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let direct = atomic_inversion(&evolve(&cfg, t).unwrap());
            assert_abs_diff_eq!(series.values[i], direct, epsilon = 1e-10);
        }
        // constant grid [0] -> [cos(2 varphi)]
        let at_zero = inversion_series(&cfg, &[0.0]).unwrap();
        assert_abs_diff_eq!(at_zero.values[0], (2.0 * cfg.varphi).cos(), epsilon = 1e-10);
    }

    #[test]
    fn photon_moments_coherent_initial() {
        let cfg = coherent_config(5.0, 5.0, 1, 1);
        let m = photon_moments(&evolve(&cfg, 0.0).unwrap());
        assert_abs_diff_eq!(m.var1(), 25.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.var_sum(), 50.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.var_diff(), 50.0, epsilon = 1e-8);
    }

    #[test]
    fn photon_moments_even_cat_brute_force() {
        let spec = CatStateSpec::cat(5.0, 1).unwrap();
        let cfg = SystemConfig::excited(spec, spec, 1, 1).unwrap();
        let m = photon_moments(&evolve(&cfg, 0.0).unwrap());
        // direct summation over the single-mode amplitude table
        let table = amplitude_table(&spec, cfg.dim1 + cfg.k1);
        let mean: f64 = table
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum();
        let mean_sq: f64 = table
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| (n * n) as f64 * c.norm_sqr())
            .sum();
        assert_abs_diff_eq!(m.var1(), mean_sq - mean * mean, epsilon = 1e-9);
        assert!(m.mean_sq1 >= m.mean1 * m.mean1);
    }

    #[test]
    fn config_validation() {
        let bad = SystemConfig {
            mode1: CatStateSpec::coherent(1.0),
            mode2: CatStateSpec::coherent(1.0),
            k1: 0,
            k2: 0,
            varphi: 0.0,
            phi: 0.0,
            dim1: 8,
            dim2: 8,
        };
        assert!(bad.validate().is_err());
        let too_small = SystemConfig { k1: 2, k2: 1, dim1: 2, ..bad.clone() };
        assert!(too_small.validate().is_err());
        let ok = SystemConfig { k1: 0, k2: 1, ..bad };
        assert!(ok.validate().is_ok());
    }
}

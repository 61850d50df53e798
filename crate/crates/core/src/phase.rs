//! Pegg-Barnett phase distributions and phase moments.
//!
//! In the continuum limit the joint phase distribution is
//! P(Theta1, Theta2) = (1/4pi^2) [ |Phi_+|^2 + |Phi_-|^2 ] with
//! Phi_{+-}(Theta1, Theta2) = sum_{n1, n2} psi_{+-}[n1, n2]
//! exp(-i n1 Theta1 - i n2 Theta2). On the uniform grid
//! Theta_g = -pi + 2 pi g / G this is a zero-padded forward DFT of the
//! amplitudes scaled by (-1)^{n1 + n2}, so all distributions here are exact
//! up to rounding whenever the grid resolves the truncation.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::analysis::TimeSeries;
use crate::dynamics::{initial_state, reduced_density, EvolvedState, FieldMode, SystemConfig};
use crate::error::{Error, Result};
use crate::numerics::{periodic_integral, PeriodicGrid};

/// Samples of a single-mode phase distribution P(Theta) on a periodic grid.
#[derive(Debug, Clone)]
pub struct PhaseDistribution1D {
    pub grid: PeriodicGrid,
    pub values: Vec<f64>,
}

impl PhaseDistribution1D {
    /// Rectangle-rule integral; exact for resolved truncations.
    pub fn total(&self) -> f64 {
        periodic_integral(&self.grid, &self.values).expect("grid and values share a length")
    }
}

/// Samples of the joint phase distribution P(Theta1, Theta2);
/// `values[[g1, g2]]` lives at (grid1.point(g1), grid2.point(g2)).
#[derive(Debug, Clone)]
pub struct PhaseDistribution2D {
    pub grid1: PeriodicGrid,
    pub grid2: PeriodicGrid,
    pub values: Array2<f64>,
}

impl PhaseDistribution2D {
    pub fn total(&self) -> f64 {
        self.grid1.step() * self.grid2.step() * self.values.sum()
    }
}

/// First and second angular moments of both modes plus the cross moment
/// <Theta1 Theta2>, all in the window [-pi, pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMoments {
    pub mean1: f64,
    pub mean2: f64,
    pub mean_sq1: f64,
    pub mean_sq2: f64,
    pub cross: f64,
}

impl PhaseMoments {
    pub fn var1(&self) -> f64 {
        self.mean_sq1 - self.mean1 * self.mean1
    }
    pub fn var2(&self) -> f64 {
        self.mean_sq2 - self.mean2 * self.mean2
    }
    pub fn covariance(&self) -> f64 {
        self.cross - self.mean1 * self.mean2
    }
    /// Variance of Theta1 + Theta2.
    pub fn var_sum(&self) -> f64 {
        self.var1() + self.var2() + 2.0 * self.covariance()
    }
    /// Variance of Theta1 - Theta2.
    pub fn var_diff(&self) -> f64 {
        self.var1() + self.var2() - 2.0 * self.covariance()
    }
}

fn require_resolving(grid: &PeriodicGrid, dim: usize) -> Result<()> {
    if grid.count() < dim {
        return Err(Error::GridTooCoarse {
            count: grid.count(),
            dim,
        });
    }
    Ok(())
}

fn fft_rows(arr: &mut Array2<Complex64>, planner: &mut FftPlanner<f64>) {
    let cols = arr.ncols();
    let fft = planner.plan_fft_forward(cols);
    let flat = arr.as_slice_mut().expect("standard layout");
    for row in flat.chunks_exact_mut(cols) {
        fft.process(row);
    }
}

fn fft_cols(arr: &mut Array2<Complex64>, planner: &mut FftPlanner<f64>) {
    let (rows, cols) = arr.dim();
    let fft = planner.plan_fft_forward(rows);
    let mut scratch = vec![Complex64::ZERO; rows];
    for j in 0..cols {
        for i in 0..rows {
            scratch[i] = arr[[i, j]];
        }
        fft.process(&mut scratch);
        for i in 0..rows {
            arr[[i, j]] = scratch[i];
        }
    }
}

fn padded_transform(
    psi: &Array2<Complex64>,
    g1: usize,
    g2: usize,
    planner: &mut FftPlanner<f64>,
) -> Array2<Complex64> {
    let mut out = Array2::zeros((g1, g2));
    for ((n1, n2), &c) in psi.indexed_iter() {
        let sign = if (n1 + n2) % 2 == 0 { 1.0 } else { -1.0 };
        out[[n1, n2]] = sign * c;
    }
    fft_rows(&mut out, planner);
    fft_cols(&mut out, planner);
    out
}

/// Phase-space amplitudes Phi_+ and Phi_- sampled on the grid product;
/// entry [g1, g2] is Phi(grid1.point(g1), grid2.point(g2)).
pub fn branch_phase_transform(
    state: &EvolvedState,
    grid1: &PeriodicGrid,
    grid2: &PeriodicGrid,
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    let (d1, d2) = state.psi_plus.dim();
    require_resolving(grid1, d1)?;
    require_resolving(grid2, d2)?;
    let mut planner = FftPlanner::new();
    let plus = padded_transform(&state.psi_plus, grid1.count(), grid2.count(), &mut planner);
    let minus = padded_transform(&state.psi_minus, grid1.count(), grid2.count(), &mut planner);
    Ok((plus, minus))
}

/// Joint phase distribution P(Theta1, Theta2) on the grid product.
pub fn joint_distribution(
    state: &EvolvedState,
    grid1: &PeriodicGrid,
    grid2: &PeriodicGrid,
) -> Result<PhaseDistribution2D> {
    let (plus, minus) = branch_phase_transform(state, grid1, grid2)?;
    let norm = 1.0 / (4.0 * PI * PI);
    let mut values = Array2::zeros(plus.dim());
    for ((g1, g2), v) in values.indexed_iter_mut() {
        *v = (norm * (plus[[g1, g2]].norm_sqr() + minus[[g1, g2]].norm_sqr())).max(0.0);
    }
    Ok(PhaseDistribution2D {
        grid1: grid1.clone(),
        grid2: grid2.clone(),
        values,
    })
}

/// Single-mode phase distribution P(Theta_mode), the other mode and the atom
/// traced out.
pub fn marginal_distribution(
    state: &EvolvedState,
    mode: FieldMode,
    grid: &PeriodicGrid,
) -> Result<PhaseDistribution1D> {
    let (d1, d2) = state.psi_plus.dim();
    let (own, other) = match mode {
        FieldMode::One => (d1, d2),
        FieldMode::Two => (d2, d1),
    };
    require_resolving(grid, own)?;
    let g = grid.count();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(g);
    let mut values = vec![0.0f64; g];
    let mut line = vec![Complex64::ZERO; g];
    for psi in [&state.psi_plus, &state.psi_minus] {
        for j in 0..other {
            line.iter_mut().for_each(|c| *c = Complex64::ZERO);
            for n in 0..own {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                line[n] = sign
                    * match mode {
                        FieldMode::One => psi[[n, j]],
                        FieldMode::Two => psi[[j, n]],
                    };
            }
            fft.process(&mut line);
            for (v, c) in values.iter_mut().zip(&line) {
                *v += c.norm_sqr();
            }
        }
    }
    let norm = 1.0 / (2.0 * PI);
    values.iter_mut().for_each(|v| *v *= norm);
    Ok(PhaseDistribution1D {
        grid: grid.clone(),
        values,
    })
}

/// Integrates the joint distribution over the other mode's angle.
pub fn marginalize(dist: &PhaseDistribution2D, keep: FieldMode) -> PhaseDistribution1D {
    let (grid, step, axis) = match keep {
        FieldMode::One => (dist.grid1.clone(), dist.grid2.step(), 1),
        FieldMode::Two => (dist.grid2.clone(), dist.grid1.step(), 0),
    };
    let values = dist
        .values
        .sum_axis(ndarray::Axis(axis))
        .iter()
        .map(|s| s * step)
        .collect();
    PhaseDistribution1D { grid, values }
}

/// Fourier coefficient of the first angular moment:
/// integral of Theta e^{i k Theta} over [-pi, pi) divided by 2 pi.
fn g1(k: i64) -> Complex64 {
    debug_assert!(k != 0);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(0.0, -sign / k as f64)
}

/// Fourier coefficient of the second angular moment (k != 0), over 2 pi.
fn g2(k: i64) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    2.0 * sign / (k * k) as f64
}

fn single_mode_moments(rho: &Array2<Complex64>) -> (f64, f64) {
    let d = rho.nrows();
    let mut mean = Complex64::ZERO;
    let mut mean_sq = Complex64::new(PI * PI / 3.0, 0.0) * rho.diag().sum();
    for n in 0..d {
        for np in 0..d {
            if n == np {
                continue;
            }
            let k = np as i64 - n as i64;
            mean += rho[[n, np]] * g1(k);
            mean_sq += rho[[n, np]] * g2(k);
        }
    }
    (mean.re, mean_sq.re)
}

/// Phase moments by analytic Fourier contraction of the reduced density
/// matrices; no quadrature grid is involved.
pub fn phase_moments(state: &EvolvedState) -> PhaseMoments {
    let rho1 = reduced_density(state, FieldMode::One);
    let rho2 = reduced_density(state, FieldMode::Two);
    let (mean1, mean_sq1) = single_mode_moments(&rho1);
    let (mean2, mean_sq2) = single_mode_moments(&rho2);

    // <Theta1 Theta2> = sum over branches of
    // sum_{n,n',m,m'} psi[n,m] conj(psi[n',m']) g1(n'-n) g1(m'-m),
    // contracted one index at a time.
    let (d1, d2) = state.psi_plus.dim();
    let mut cross = Complex64::ZERO;
    for psi in [&state.psi_plus, &state.psi_minus] {
        let mut a: Array2<Complex64> = Array2::zeros((d1, d2));
        for np in 0..d1 {
            for n in 0..d1 {
                if n == np {
                    continue;
                }
                let w = g1(np as i64 - n as i64);
                for m in 0..d2 {
                    a[[np, m]] += w * psi[[n, m]];
                }
            }
        }
        for np in 0..d1 {
            for mp in 0..d2 {
                let mut b = Complex64::ZERO;
                for m in 0..d2 {
                    if m == mp {
                        continue;
                    }
                    b += a[[np, m]] * g1(mp as i64 - m as i64);
                }
                cross += b * psi[[np, mp]].conj();
            }
        }
    }

    PhaseMoments {
        mean1,
        mean2,
        mean_sq1,
        mean_sq2,
        cross: cross.re,
    }
}

/// Quadrature weights that integrate Theta^order against samples on the
/// grid; trigonometrically exact for distributions whose angular spectrum
/// stays below count/2.
pub fn moment_weights(grid: &PeriodicGrid, order: u8) -> Vec<f64> {
    assert!(order == 1 || order == 2, "orders 1 and 2 are supported");
    let g = grid.count();
    let gf = g as f64;
    (0..g)
        .map(|i| {
            let theta = grid.point(i);
            let mut w = if order == 2 { 2.0 * PI.powi(3) / (3.0 * gf) } else { 0.0 };
            for k in 1..g / 2 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let kf = k as f64;
                w += if order == 1 {
                    -4.0 * PI * sign * (kf * theta).sin() / (kf * gf)
                } else {
                    8.0 * PI * sign * (kf * theta).cos() / (kf * kf * gf)
                };
            }
            w
        })
        .collect()
}

/// Phase moments by quadrature of the sampled distributions; exact (and
/// therefore matching `phase_moments` to rounding) once both grids hold at
/// least twice the truncated dimensions.
pub fn phase_moments_quadrature(
    state: &EvolvedState,
    grid1: &PeriodicGrid,
    grid2: &PeriodicGrid,
) -> Result<PhaseMoments> {
    let (d1, d2) = state.psi_plus.dim();
    require_resolving(grid1, 2 * d1)?;
    require_resolving(grid2, 2 * d2)?;
    let p1 = marginal_distribution(state, FieldMode::One, grid1)?;
    let p2 = marginal_distribution(state, FieldMode::Two, grid2)?;
    let joint = joint_distribution(state, grid1, grid2)?;
    let (w11, w12) = (moment_weights(grid1, 1), moment_weights(grid1, 2));
    let (w21, w22) = (moment_weights(grid2, 1), moment_weights(grid2, 2));
    let dot = |w: &[f64], p: &[f64]| w.iter().zip(p).map(|(a, b)| a * b).sum::<f64>();
    let mut cross = 0.0;
    for (g1_idx, row) in joint.values.outer_iter().enumerate() {
        let inner: f64 = row.iter().zip(&w21).map(|(p, w)| p * w).sum();
        cross += w11[g1_idx] * inner;
    }
    Ok(PhaseMoments {
        mean1: dot(&w11, &p1.values),
        mean2: dot(&w21, &p2.values),
        mean_sq1: dot(&w12, &p1.values),
        mean_sq2: dot(&w22, &p2.values),
        cross,
    })
}

/// Single-mode phase variance swept over a time grid.
///
/// Uses the marginal-distribution route with an exact spectral quadrature,
/// which costs far less per time point than the density-matrix contraction.
pub fn phase_variance_series(
    config: &SystemConfig,
    mode: FieldMode,
    t_grid: &[f64],
) -> Result<TimeSeries> {
    if t_grid.is_empty() {
        return Err(Error::Unsupported("empty time grid".into()));
    }
    let dim = match mode {
        FieldMode::One => config.dim1 + config.k1,
        FieldMode::Two => config.dim2 + config.k2,
    };
    let grid = PeriodicGrid::new((2 * dim).next_power_of_two().max(PeriodicGrid::MIN_COUNT))?;
    let w1 = moment_weights(&grid, 1);
    let w2 = moment_weights(&grid, 2);
    let mut state = initial_state(config)?;
    let mut prev = 0.0;
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        state = state.evolved_by(t - prev);
        prev = t;
        let p = marginal_distribution(&state, mode, &grid)?;
        let mean: f64 = w1.iter().zip(&p.values).map(|(a, b)| a * b).sum();
        let mean_sq: f64 = w2.iter().zip(&p.values).map(|(a, b)| a * b).sum();
        values.push(mean_sq - mean * mean);
    }
    TimeSeries::new(t_grid.to_vec(), values)
}

/// Full phase moments swept over a time grid (needed when the cross moment
/// or both modes are wanted); heavier than `phase_variance_series`.
pub fn phase_moments_series(config: &SystemConfig, t_grid: &[f64]) -> Result<Vec<PhaseMoments>> {
    if t_grid.is_empty() {
        return Err(Error::Unsupported("empty time grid".into()));
    }
    let mut state = initial_state(config)?;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        state = state.evolved_by(t - prev);
        prev = t;
        out.push(phase_moments(&state));
    }
    Ok(out)
}

//! Stable elementary kernels shared by the rest of the crate: log-factorials,
//! associated Laguerre polynomials and rectangle-rule quadrature on periodic
//! grids.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const TABLE_LEN: usize = 1024;

fn build_table() -> [f64; TABLE_LEN] {
    let mut t = [0.0f64; TABLE_LEN];
    let mut acc = 0.0f64;
    for n in 1..TABLE_LEN {
        acc += (n as f64).ln();
        t[n] = acc;
    }
    t
}

fn lnfac_table() -> &'static [f64; TABLE_LEN] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

/// ln(n!), exact at 0 and 1, relative error below 1e-13 everywhere.
///
/// Small n comes from a cumulative table; larger n uses the Stirling series,
/// whose truncation error at n >= 1024 is far below double precision.
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        lnfac_table()[n as usize]
    } else {
        let x = n as f64;
        (x + 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
    }
}

/// Associated Laguerre polynomial L_n^a(x) by the three-term recurrence in n.
///
/// Negative upper index is reduced through
/// L_n^{-k}(x) = (-x)^k (n-k)!/n! L_{n-k}^k(x), valid for n >= k.
pub fn assoc_laguerre(n: u32, a: i32, x: f64) -> Result<f64> {
    if a < 0 {
        let k = (-a) as u32;
        if n < k {
            return Err(Error::LaguerreIndices { n, a });
        }
        let scale = (-x).powi(k as i32)
            * (log_factorial((n - k) as u64) - log_factorial(n as u64)).exp();
        return Ok(scale * laguerre_recurrence(n - k, k as f64, x));
    }
    Ok(laguerre_recurrence(n, a as f64, x))
}

fn laguerre_recurrence(n: u32, a: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Uniform grid over [-pi, pi), endpoint excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    count: usize,
}

impl PeriodicGrid {
    pub const MIN_COUNT: usize = 8;
    pub const DEFAULT_COUNT: usize = 512;

    pub fn new(count: usize) -> Result<Self> {
        if count < Self::MIN_COUNT {
            return Err(Error::GridTooSmall {
                count,
                min: Self::MIN_COUNT,
            });
        }
        Ok(Self { count })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Angle of the i-th grid point: -pi + 2*pi*i/count.
    pub fn point(&self, i: usize) -> f64 {
        -PI + 2.0 * PI * i as f64 / self.count as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.count as f64
    }
}

/// Rectangle rule on the periodic grid: (2*pi/count) * sum(values).
///
/// Spectrally accurate for smooth 2*pi-periodic integrands.
pub fn periodic_integral(grid: &PeriodicGrid, values: &[f64]) -> Result<f64> {
    if values.len() != grid.count() {
        return Err(Error::LengthMismatch {
            expected: grid.count(),
            got: values.len(),
        });
    }
    Ok(grid.step() * values.iter().sum::<f64>())
}

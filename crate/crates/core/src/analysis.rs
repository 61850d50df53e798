//! Revival-collapse analysis: envelope-based revival detection for any time
//! series, and the closed-form revival-time and harmonic-approximation
//! predictors.

use std::f64::consts::PI;

use crate::dynamics::SystemConfig;
use crate::error::{Error, Result};
use crate::states::amplitude_table;

/// (T, value) pairs for a scalar observable swept over scaled time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Unsupported(
                "time grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

/// Revival structure extracted from a series: envelope peaks and collapse
/// windows.
#[derive(Debug, Clone)]
pub struct RevivalReport {
    /// T positions of envelope peaks above threshold, sorted.
    pub centers: Vec<f64>,
    /// Envelope value at each center.
    pub center_heights: Vec<f64>,
    /// Moving-RMS envelope of the mean-removed series.
    pub envelope: TimeSeries,
    /// Maximal (T_start, T_end) windows where the envelope stays below
    /// threshold * max(envelope).
    pub collapse_intervals: Vec<(f64, f64)>,
}

impl RevivalReport {
    /// Centers whose envelope reaches at least half of the strongest center;
    /// the rest are classified as secondary revivals.
    pub fn primary_centers(&self) -> Vec<f64> {
        let cut = 0.5
            * self
                .center_heights
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
        self.centers
            .iter()
            .zip(&self.center_heights)
            .filter(|(_, &h)| h >= cut)
            .map(|(&c, _)| c)
            .collect()
    }

    /// Median spacing between consecutive primary centers, if at least two.
    pub fn primary_spacing(&self) -> Option<f64> {
        let primaries = self.primary_centers();
        if primaries.len() < 2 {
            return None;
        }
        let mut gaps: Vec<f64> = primaries.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(|a, b| a.total_cmp(b));
        Some(gaps[gaps.len() / 2])
    }
}

/// Moving-RMS envelope peak detection.
///
/// The envelope is the root-mean-square of the mean-removed series over a
/// centered window of width `window` (in T units); centers are interior
/// local maxima of the envelope above `threshold * max(envelope)`, with
/// ties broken toward smaller T.
pub fn detect_revivals(series: &TimeSeries, window: f64, threshold: f64) -> Result<RevivalReport> {
    if series.len() < 16 {
        return Err(Error::SeriesTooShort { len: series.len() });
    }
    if !(0.0..1.0).contains(&threshold) || threshold == 0.0 {
        return Err(Error::BadThreshold(threshold));
    }
    let mut dts: Vec<f64> = series.times.windows(2).map(|w| w[1] - w[0]).collect();
    dts.sort_by(|a, b| a.total_cmp(b));
    let median_dt = dts[dts.len() / 2];
    if window <= 2.0 * median_dt {
        return Err(Error::WindowTooNarrow {
            window,
            median_dt,
        });
    }

    let mean = series.mean();
    let sq: Vec<f64> = series.values.iter().map(|v| (v - mean).powi(2)).collect();
    let n = series.len();
    let half = window / 2.0;
    let mut env = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut acc = 0.0;
    for i in 0..n {
        let t = series.times[i];
        while hi < n && series.times[hi] <= t + half {
            acc += sq[hi];
            hi += 1;
        }
        while series.times[lo] < t - half {
            acc -= sq[lo];
            lo += 1;
        }
        env.push((acc.max(0.0) / (hi - lo) as f64).sqrt());
    }

    let max_env = env.iter().cloned().fold(0.0f64, f64::max);
    let cut = threshold * max_env;
    // candidate peaks: interior local maxima above threshold ...
    let mut candidates = Vec::new();
    for i in 1..n - 1 {
        if env[i] >= cut && env[i] > env[i - 1] && env[i] >= env[i + 1] {
            candidates.push((series.times[i], env[i]));
        }
    }
    // ... clustered so that envelope ripple within one revival packet does
    // not split it: candidates closer than `window` merge into their
    // tallest member.
    let mut centers: Vec<f64> = Vec::new();
    let mut center_heights: Vec<f64> = Vec::new();
    let mut last_candidate = f64::NEG_INFINITY;
    for (t, h) in candidates {
        if t - last_candidate < window {
            if h > *center_heights.last().unwrap() {
                *centers.last_mut().unwrap() = t;
                *center_heights.last_mut().unwrap() = h;
            }
        } else {
            centers.push(t);
            center_heights.push(h);
        }
        last_candidate = t;
    }

    let mut collapse_intervals = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..n {
        if env[i] < cut {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            collapse_intervals.push((series.times[s], series.times[i - 1]));
        }
    }
    if let Some(s) = start {
        collapse_intervals.push((series.times[s], series.times[n - 1]));
    }

    Ok(RevivalReport {
        centers,
        center_heights,
        envelope: TimeSeries::new(series.times.clone(), env)?,
        collapse_intervals,
    })
}

/// Closed-form revival-time estimate for k1 = k2 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalPrediction {
    /// Estimated revival time; calibrated only up to the integer multiple
    /// the strong-intensity argument leaves free, so ratios between
    /// predictions are the meaningful output.
    pub time: f64,
    /// Set when either |alpha_j| < 3, where the strong-intensity
    /// approximation degrades.
    pub low_intensity: bool,
}

/// Strong-intensity revival-time estimate: T_R = pi / sqrt(nbar * mbar) for
/// coherent inputs, halved for cat inputs (whose photon distributions live
/// on every second Fock level).
pub fn predict_revival_time(config: &SystemConfig) -> Result<RevivalPrediction> {
    if config.k1 != 1 || config.k2 != 1 {
        return Err(Error::Unsupported(format!(
            "revival-time estimate requires k1 = k2 = 1, got ({}, {})",
            config.k1, config.k2
        )));
    }
    let nbar = config.mode1.alpha.norm_sqr();
    let mbar = config.mode2.alpha.norm_sqr();
    if nbar == 0.0 || mbar == 0.0 {
        return Err(Error::Unsupported(
            "revival-time estimate needs nonzero field amplitudes".into(),
        ));
    }
    let base = PI / (nbar * mbar).sqrt();
    let time = match (config.mode1.epsilon, config.mode2.epsilon) {
        (0, 0) => base,
        (e1, e2) if e1 != 0 && e2 != 0 => base / 2.0,
        _ => {
            return Err(Error::Unsupported(
                "revival-time estimate supports coherent or cat inputs in both modes".into(),
            ))
        }
    };
    Ok(RevivalPrediction {
        time,
        low_intensity: nbar.sqrt() < 3.0 || mbar.sqrt() < 3.0,
    })
}

/// Harmonic-approximation phase variance of mode 1 for strong coherent
/// fields with the atom initially excited (k1 = k2 = 1).
pub fn harmonic_variance_approx(config: &SystemConfig, t: f64) -> Result<f64> {
    if config.k1 != 1 || config.k2 != 1 {
        return Err(Error::Unsupported("harmonic approximation requires k1 = k2 = 1".into()));
    }
    if config.mode1.epsilon != 0 || config.mode2.epsilon != 0 {
        return Err(Error::Unsupported("harmonic approximation requires coherent inputs".into()));
    }
    if config.varphi != 0.0 || config.phi != 0.0 {
        return Err(Error::Unsupported(
            "harmonic approximation requires the excited atom (varphi = phi = 0)".into(),
        ));
    }
    let mbar = config.mode2.alpha.norm_sqr();
    let sqrt_m = mbar.sqrt();
    let c1: Vec<f64> = amplitude_table(&config.mode1, config.dim1)
        .coeffs
        .iter()
        .map(|c| c.re)
        .collect();
    let mut acc = PI * PI / 3.0;
    for n in 1..c1.len() {
        for np in 0..n {
            let z = ((n + 1) as f64).sqrt() - ((np + 1) as f64).sqrt();
            let sign = if (n - np) % 2 == 0 { 1.0 } else { -1.0 };
            let damp = (-2.0 * mbar * (t * z / (4.0 * sqrt_m)).sin().powi(2)).exp();
            let osc = (0.5 * t * sqrt_m * z + mbar * (t * z / (4.0 * sqrt_m)).sin()).cos();
            acc += 4.0 * c1[n] * c1[np] * sign / ((n - np) as f64).powi(2) * damp * osc;
        }
    }
    Ok(acc)
}

/// Local maxima of a circular sequence with prominence at least
/// `prominence_frac * (max - min)`, as indices into `values`.
///
/// Prominence of a peak is its height above the higher of the two minima
/// separating it from strictly taller terrain in either direction.
pub fn circular_peaks(values: &[f64], prominence_frac: f64) -> Vec<usize> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let need = prominence_frac * (max - min);
    let mut peaks = Vec::new();
    for i in 0..n {
        let prev = values[(i + n - 1) % n];
        let next = values[(i + 1) % n];
        // ties broken toward smaller index
        if !(values[i] > prev && values[i] >= next) {
            continue;
        }
        let walk = |dir: isize| -> f64 {
            let mut low = values[i];
            let mut j = i as isize;
            for _ in 0..n {
                j = (j + dir).rem_euclid(n as isize);
                let v = values[j as usize];
                if v > values[i] {
                    return low;
                }
                low = low.min(v);
            }
            low
        };
        let saddle = walk(-1).max(walk(1));
        if values[i] - saddle >= need {
            peaks.push(i);
        }
    }
    peaks
}

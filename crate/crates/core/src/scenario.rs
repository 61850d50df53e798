//! Named scenario presets reproducing the data behind the figures, the flat
//! `key = value` config-file format, and deterministic CSV emission.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::analysis::{circular_peaks, detect_revivals, TimeSeries};
use crate::dynamics::{
    initial_state, inversion_series, lin_grid, photon_moments, FieldMode, SystemConfig,
};
use crate::error::{Error, Result};
use crate::numerics::PeriodicGrid;
use crate::phase::{joint_distribution, marginal_distribution, phase_variance_series};
use crate::states::CatStateSpec;
use crate::wigner::wigner_origin;

/// Observables a scenario can emit; each sweep observable becomes one CSV
/// column group, each snapshot observable one CSV per snapshot time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Inversion,
    Phase1d,
    Phase2d,
    PhaseVariances,
    PhotonVariances,
    WignerOrigin,
}

/// Time grid specification: a uniform sweep or a list of snapshot times.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeSpec {
    Sweep { t_min: f64, t_max: f64, steps: usize },
    Snapshots(Vec<f64>),
}

impl TimeSpec {
    pub fn times(&self) -> Vec<f64> {
        match self {
            TimeSpec::Sweep { t_min, t_max, steps } => lin_grid(*t_min, *t_max, *steps),
            TimeSpec::Snapshots(ts) => ts.clone(),
        }
    }
}

/// One curve of a scenario: a config plus an optional label that
/// distinguishes multiple curves within the same figure.
#[derive(Debug, Clone)]
pub struct Run {
    pub label: Option<&'static str>,
    pub config: SystemConfig,
    pub times: TimeSpec,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub runs: Vec<Run>,
    pub observables: Vec<Observable>,
}

fn cat(alpha: f64, eps: i8) -> CatStateSpec {
    CatStateSpec::cat(alpha, eps).expect("valid preset cat spec")
}

fn excited(e1: i8, e2: i8, k1: usize, k2: usize, alpha: f64) -> SystemConfig {
    SystemConfig::excited(cat(alpha, e1), cat(alpha, e2), k1, k2).expect("valid preset config")
}

fn sweep(t_max: f64, steps: usize) -> TimeSpec {
    TimeSpec::Sweep {
        t_min: 0.0,
        t_max,
        steps,
    }
}

/// The preset registry; names follow the figures whose data they reproduce.
pub fn presets() -> Vec<Scenario> {
    let snap = |ts: &[f64]| TimeSpec::Snapshots(ts.to_vec());
    vec![
        Scenario {
            name: "fig1a",
            description: "atomic inversion sweep, |alpha|=5, k=(1,1): coherent inputs \
                          (curve_a) vs even cats (curve_b); the source figure draws \
                          curve B offset by +2, the CSV holds raw values",
            runs: vec![
                Run {
                    label: Some("curve_a"),
                    config: excited(0, 0, 1, 1, 5.0),
                    times: sweep(20.0, 2001),
                },
                Run {
                    label: Some("curve_b"),
                    config: excited(1, 1, 1, 1, 5.0),
                    times: sweep(20.0, 2001),
                },
            ],
            observables: vec![Observable::Inversion],
        },
        Scenario {
            name: "fig1b",
            description: "atomic inversion sweep, |alpha|=5: cat/coherent mix at k=(1,1) \
                          (curve_a) vs even cats at k=(2,2) (curve_b); raw values, no \
                          display offset",
            runs: vec![
                Run {
                    label: Some("curve_a"),
                    config: excited(1, 0, 1, 1, 5.0),
                    times: sweep(20.0, 2001),
                },
                Run {
                    label: Some("curve_b"),
                    config: excited(1, 1, 2, 2, 5.0),
                    times: sweep(20.0, 2001),
                },
            ],
            observables: vec![Observable::Inversion],
        },
        Scenario {
            name: "fig2a",
            description: "mode-1 phase distribution snapshots, coherent inputs, \
                          |alpha|=5, k=(1,1), at collapse/revival/secondary-revival \
                          times",
            runs: vec![Run {
                label: None,
                config: excited(0, 0, 1, 1, 5.0),
                times: snap(&[4.42, 6.2999, 9.32]),
            }],
            observables: vec![Observable::Phase1d],
        },
        Scenario {
            name: "fig2b",
            description: "mode-1 phase distribution snapshots, even cats, |alpha|=5, \
                          k=(1,1); the star curve uses (eps1, eps2) = (0, 1) at its \
                          revival time",
            runs: vec![
                Run {
                    label: None,
                    config: excited(1, 1, 1, 1, 5.0),
                    times: snap(&[1.8, 3.22, 4.4]),
                },
                Run {
                    label: Some("star"),
                    config: excited(0, 1, 1, 1, 5.0),
                    times: snap(&[6.3]),
                },
            ],
            observables: vec![Observable::Phase1d],
        },
        Scenario {
            name: "fig3",
            description: "single-mode limit k=(0,1): mode 2 carries the even cat with \
                          |alpha|=5 and is the only active mode (mode 1 is a spectator \
                          vacuum), so the physical distribution is the p_theta2 column",
            runs: vec![Run {
                label: None,
                config: SystemConfig::excited(CatStateSpec::coherent(0.0), cat(5.0, 1), 0, 1)
                    .expect("valid preset config"),
                times: snap(&[7.0, 16.4]),
            }],
            observables: vec![Observable::Phase1d],
        },
        Scenario {
            name: "fig4",
            description: "joint phase distribution snapshots, even cats, |alpha|=5, \
                          k=(1,1), at collapse/secondary-revival/revival times",
            runs: vec![Run {
                label: None,
                config: excited(1, 1, 1, 1, 5.0),
                times: snap(&[1.8, 4.4, 3.22]),
            }],
            observables: vec![Observable::Phase2d],
        },
        Scenario {
            name: "fig5",
            description: "mode-1 phase distribution at T=5, |alpha|=5, k=(2,2): \
                          coherent inputs (solid) vs even cats (dashed)",
            runs: vec![
                Run {
                    label: Some("solid"),
                    config: excited(0, 0, 2, 2, 5.0),
                    times: snap(&[5.0]),
                },
                Run {
                    label: Some("dashed"),
                    config: excited(1, 1, 2, 2, 5.0),
                    times: snap(&[5.0]),
                },
            ],
            observables: vec![Observable::Phase1d],
        },
        Scenario {
            name: "fig6a",
            description: "mode-1 phase variance sweep, coherent inputs, |alpha|=5, \
                          k=(1,1); oscillates about the random-phase value pi^2/3",
            runs: vec![Run {
                label: None,
                config: excited(0, 0, 1, 1, 5.0),
                times: sweep(30.0, 1201),
            }],
            observables: vec![Observable::PhaseVariances],
        },
        Scenario {
            name: "fig6b",
            description: "mode-1 phase variance sweep, even cats, |alpha|=5, k=(1,1)",
            runs: vec![Run {
                label: None,
                config: excited(1, 1, 1, 1, 5.0),
                times: sweep(30.0, 1201),
            }],
            observables: vec![Observable::PhaseVariances],
        },
        Scenario {
            name: "fig7a",
            description: "mode-1 phase variance sweep, even cats, |alpha|=5, k=(2,2); \
                          revivals recur with period pi/2 independently of the \
                          intensities",
            runs: vec![Run {
                label: None,
                config: excited(1, 1, 2, 2, 5.0),
                times: sweep(7.0, 1401),
            }],
            observables: vec![Observable::PhaseVariances],
        },
        Scenario {
            name: "fig7b",
            description: "mode-1 phase variance sweep, even cats, |alpha|=5, k=(1,2)",
            runs: vec![Run {
                label: None,
                config: excited(1, 1, 1, 2, 5.0),
                times: sweep(7.0, 1401),
            }],
            observables: vec![Observable::PhaseVariances],
        },
        Scenario {
            name: "fig8a",
            description: "photon-number variance sweep, even cats, |alpha|=5, k=(1,1); \
                          single-mode column var_n1",
            runs: vec![Run {
                label: None,
                config: excited(1, 1, 1, 1, 5.0),
                times: sweep(20.0, 2001),
            }],
            observables: vec![Observable::PhotonVariances],
        },
        Scenario {
            name: "fig8b",
            description: "photon-number variance sweep, even cats, |alpha|=5, k=(1,1); \
                          sum-mode column var_sum",
            runs: vec![Run {
                label: None,
                config: excited(1, 1, 1, 1, 5.0),
                times: sweep(20.0, 2001),
            }],
            observables: vec![Observable::PhotonVariances],
        },
        Scenario {
            name: "fig8c",
            description: "photon-number variance sweep, even cats, |alpha|=5, k=(1,1); \
                          difference-mode column var_diff",
            runs: vec![Run {
                label: None,
                config: excited(1, 1, 1, 1, 5.0),
                times: sweep(20.0, 2001),
            }],
            observables: vec![Observable::PhotonVariances],
        },
    ]
}

pub fn find_preset(name: &str) -> Option<Scenario> {
    presets().into_iter().find(|s| s.name == name)
}

// ---------------------------------------------------------------------------
// config-file format

/// Serializes one run (config plus time grid) in the flat key = value format.
pub fn emit_config(config: &SystemConfig, times: &TimeSpec) -> String {
    let (t_min, t_max, steps) = match times {
        TimeSpec::Sweep { t_min, t_max, steps } => (*t_min, *t_max, *steps),
        // snapshot lists are approximated by a sweep from zero to the last
        // snapshot; snapshots proper are a CLI flag, not a config-file concept
        TimeSpec::Snapshots(ts) => (
            0.0,
            ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(1.0),
            ts.len().max(2),
        ),
    };
    let mut s = String::new();
    let _ = writeln!(s, "alpha1_re = {:e}", config.mode1.alpha.re);
    let _ = writeln!(s, "alpha1_im = {:e}", config.mode1.alpha.im);
    let _ = writeln!(s, "eps1 = {}", config.mode1.epsilon);
    let _ = writeln!(s, "alpha2_re = {:e}", config.mode2.alpha.re);
    let _ = writeln!(s, "alpha2_im = {:e}", config.mode2.alpha.im);
    let _ = writeln!(s, "eps2 = {}", config.mode2.epsilon);
    let _ = writeln!(s, "k1 = {}", config.k1);
    let _ = writeln!(s, "k2 = {}", config.k2);
    let _ = writeln!(s, "varphi = {:e}", config.varphi);
    let _ = writeln!(s, "phi = {:e}", config.phi);
    let _ = writeln!(s, "dim1 = {}", config.dim1);
    let _ = writeln!(s, "dim2 = {}", config.dim2);
    let _ = writeln!(s, "t_min = {:e}", t_min);
    let _ = writeln!(s, "t_max = {:e}", t_max);
    let _ = writeln!(s, "steps = {}", steps);
    s
}

fn bad_key(key: &str, why: &str) -> Error {
    Error::ConfigFile(format!("key '{key}': {why}"))
}

/// Parses the flat key = value format; every key must be known, and the
/// resulting config must validate. dim1/dim2 = 0 requests automatic
/// truncation from the field intensities.
pub fn parse_config(text: &str) -> Result<(SystemConfig, TimeSpec)> {
    const KEYS: [&str; 15] = [
        "alpha1_re", "alpha1_im", "eps1", "alpha2_re", "alpha2_im", "eps2", "k1", "k2",
        "varphi", "phi", "dim1", "dim2", "t_min", "t_max", "steps",
    ];
    let mut seen: Vec<(usize, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::ConfigFile(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let key = key.trim();
        let idx = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| bad_key(key, "unknown key"))?;
        if seen.iter().any(|(i, _)| *i == idx) {
            return Err(bad_key(key, "duplicate key"));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| bad_key(key, "not a number"))?;
        seen.push((idx, value));
    }
    let get = |idx: usize| -> Result<f64> {
        seen.iter()
            .find(|(i, _)| *i == idx)
            .map(|(_, v)| *v)
            .ok_or_else(|| bad_key(KEYS[idx], "missing"))
    };
    let int = |idx: usize| -> Result<i64> {
        let v = get(idx)?;
        if v.fract() != 0.0 {
            return Err(bad_key(KEYS[idx], "must be an integer"));
        }
        Ok(v as i64)
    };
    let nonneg = |idx: usize| -> Result<usize> {
        let v = int(idx)?;
        if v < 0 {
            return Err(bad_key(KEYS[idx], "must be nonnegative"));
        }
        Ok(v as usize)
    };

    let check_eps = |key: &str, v: i64| -> Result<i8> {
        if !(-1..=1).contains(&v) {
            return Err(bad_key(key, "must be -1, 0 or 1"));
        }
        Ok(v as i8)
    };
    let eps1 = check_eps("eps1", int(2)?)?;
    let mode1 = CatStateSpec::new(Complex64::new(get(0)?, get(1)?), eps1)
        .map_err(|e| bad_key("eps1", &e.to_string()))?;
    let eps2 = check_eps("eps2", int(5)?)?;
    let mode2 = CatStateSpec::new(Complex64::new(get(3)?, get(4)?), eps2)
        .map_err(|e| bad_key("eps2", &e.to_string()))?;

    let k1 = nonneg(6)?;
    let k2 = nonneg(7)?;
    let mut dim1 = nonneg(10)?;
    let mut dim2 = nonneg(11)?;
    if dim1 == 0 {
        dim1 = crate::states::choose_truncation(mode1.alpha, 1e-12).max(k1 + 1);
    }
    if dim2 == 0 {
        dim2 = crate::states::choose_truncation(mode2.alpha, 1e-12).max(k2 + 1);
    }
    let config = SystemConfig {
        mode1,
        mode2,
        k1,
        k2,
        varphi: get(8)?,
        phi: get(9)?,
        dim1,
        dim2,
    };
    config
        .validate()
        .map_err(|e| Error::ConfigFile(e.to_string()))?;

    let steps = nonneg(14)?;
    if steps < 2 {
        return Err(bad_key("steps", "need at least 2 sweep points"));
    }
    let (t_min, t_max) = (get(12)?, get(13)?);
    if !(t_max > t_min) {
        return Err(bad_key("t_max", "must exceed t_min"));
    }
    Ok((
        config,
        TimeSpec::Sweep {
            t_min,
            t_max,
            steps,
        },
    ))
}

// ---------------------------------------------------------------------------
// CSV emission

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut body = String::with_capacity(rows.len() * header.len() * 24);
    body.push_str(&header.join(","));
    body.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let mut first = true;
        for v in row {
            if !first {
                body.push(',');
            }
            body.push_str(&fmt(*v));
            first = false;
        }
        body.push('\n');
    }
    let mut file = fs::File::create(path)
        .map_err(|e| Error::Unsupported(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(body.as_bytes())
        .map_err(|e| Error::Unsupported(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Outcome of a scenario run: written files and human-readable summary lines.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

fn col_name(base: &str, label: Option<&str>) -> String {
    match label {
        Some(l) => format!("{base}_{l}"),
        None => base.to_string(),
    }
}

fn file_name(base: &str, label: Option<&str>, t: Option<f64>) -> String {
    let mut s = base.to_string();
    if let Some(l) = label {
        s.push('_');
        s.push_str(l);
    }
    if let Some(t) = t {
        let _ = write!(s, "_T{t}");
    }
    s.push_str(".csv");
    s
}

fn stats_line(path: &Path, rows: usize, cols: &[(String, f64, f64)]) -> String {
    let mut s = format!("{}: {rows} rows", path.file_name().unwrap().to_string_lossy());
    for (name, lo, hi) in cols {
        let _ = write!(s, "; {name} in [{lo:.4}, {hi:.4}]");
    }
    s
}

fn col_stats(header: &[String], rows: &[Vec<f64>]) -> Vec<(String, f64, f64)> {
    (1..header.len())
        .map(|j| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for row in rows {
                lo = lo.min(row[j]);
                hi = hi.max(row[j]);
            }
            (header[j].clone(), lo, hi)
        })
        .collect()
}

/// Sweep observable values for one run, as named columns over its grid.
fn sweep_columns(
    config: &SystemConfig,
    grid: &[f64],
    obs: Observable,
    label: Option<&str>,
) -> Result<Vec<(String, Vec<f64>)>> {
    match obs {
        Observable::Inversion => {
            let series = inversion_series(config, grid)?;
            Ok(vec![(col_name("sigma_z", label), series.values)])
        }
        Observable::PhaseVariances => {
            let series = phase_variance_series(config, FieldMode::One, grid)?;
            Ok(vec![(col_name("phase_var1", label), series.values)])
        }
        Observable::PhotonVariances => {
            let mut state = initial_state(config)?;
            let mut prev = 0.0;
            let mut cols = vec![Vec::with_capacity(grid.len()); 4];
            for &t in grid {
                state = state.evolved_by(t - prev);
                prev = t;
                let m = photon_moments(&state);
                cols[0].push(m.var1());
                cols[1].push(m.var2());
                cols[2].push(m.var_sum());
                cols[3].push(m.var_diff());
            }
            let names = ["var_n1", "var_n2", "var_sum", "var_diff"];
            Ok(names
                .iter()
                .zip(cols)
                .map(|(n, c)| (col_name(n, label), c))
                .collect())
        }
        Observable::WignerOrigin => {
            let mut state = initial_state(config)?;
            let mut prev = 0.0;
            let mut cols = vec![Vec::with_capacity(grid.len()); 3];
            for &t in grid {
                state = state.evolved_by(t - prev);
                prev = t;
                let w = wigner_origin(&state);
                cols[0].push(w.w1);
                cols[1].push(w.w2);
                cols[2].push(w.joint);
            }
            let names = ["w1", "w2", "w_joint"];
            Ok(names
                .iter()
                .zip(cols)
                .map(|(n, c)| (col_name(n, label), c))
                .collect())
        }
        _ => Err(Error::Unsupported(
            "phase distributions are snapshot observables".into(),
        )),
    }
}

fn obs_base(obs: Observable) -> &'static str {
    match obs {
        Observable::Inversion => "inversion",
        Observable::Phase1d => "phase1d",
        Observable::Phase2d => "phase2d",
        Observable::PhaseVariances => "phase_variances",
        Observable::PhotonVariances => "photon_variances",
        Observable::WignerOrigin => "wigner_origin",
    }
}

const GRID_1D: usize = 512;
const GRID_2D: usize = 256;

fn emit_snapshots(
    run: &Run,
    obs: Observable,
    out: &Path,
    snapshot_override: Option<&[f64]>,
    summary: &mut RunSummary,
) -> Result<()> {
    let times = match snapshot_override {
        Some(ts) => ts.to_vec(),
        None => run.times.times(),
    };
    for &t in &times {
        let state = crate::dynamics::evolve(&run.config, t)?;
        match obs {
            Observable::Phase1d => {
                let grid = PeriodicGrid::new(GRID_1D)?;
                let p1 = marginal_distribution(&state, FieldMode::One, &grid)?;
                let p2 = marginal_distribution(&state, FieldMode::Two, &grid)?;
                let header = ["theta", "p_theta1", "p_theta2"]
                    .map(String::from)
                    .to_vec();
                let rows: Vec<Vec<f64>> = (0..grid.count())
                    .map(|i| vec![grid.point(i), p1.values[i], p2.values[i]])
                    .collect();
                let path = out.join(file_name(obs_base(obs), run.label, Some(t)));
                write_csv(&path, &header, &rows)?;
                let peaks1 = circular_peaks(&p1.values, 0.1);
                let locs: Vec<String> = peaks1
                    .iter()
                    .map(|&i| format!("{:.3}", grid.point(i)))
                    .collect();
                summary.lines.push(format!(
                    "{} p_theta1 peaks (>=10% prominence): {} at [{}]",
                    stats_line(&path, rows.len(), &col_stats(&header, &rows)),
                    peaks1.len(),
                    locs.join(", ")
                ));
                summary.files.push(path);
            }
            Observable::Phase2d => {
                let grid = PeriodicGrid::new(GRID_2D)?;
                let dist = joint_distribution(&state, &grid, &grid)?;
                let header = ["theta1", "theta2", "p"].map(String::from).to_vec();
                let mut rows = Vec::with_capacity(grid.count() * grid.count());
                for i in 0..grid.count() {
                    for j in 0..grid.count() {
                        rows.push(vec![grid.point(i), grid.point(j), dist.values[[i, j]]]);
                    }
                }
                let path = out.join(file_name(obs_base(obs), run.label, Some(t)));
                write_csv(&path, &header, &rows)?;
                summary.lines.push(format!(
                    "{}; integral = {:.12}",
                    stats_line(&path, rows.len(), &col_stats(&header, &rows)),
                    dist.total()
                ));
                summary.files.push(path);
            }
            _ => {
                return Err(Error::Unsupported(
                    "sweep observables need a time sweep".into(),
                ))
            }
        }
    }
    Ok(())
}

fn revival_note(name: &str, series: &TimeSeries) -> Option<String> {
    let span = series.times.last()? - series.times.first()?;
    let report = detect_revivals(series, span / 12.0, 0.2).ok()?;
    let centers: Vec<String> = report
        .primary_centers()
        .iter()
        .map(|c| format!("{c:.3}"))
        .collect();
    let spacing = report
        .primary_spacing()
        .map(|s| format!("; spacing {s:.3}"))
        .unwrap_or_default();
    Some(format!(
        "{name}: revival centers at [{}]{spacing}",
        centers.join(", ")
    ))
}

/// Runs a scenario, writing one CSV per observable (sweeps) or per
/// observable and snapshot time, plus summary lines.
pub fn run_scenario(
    scenario: &Scenario,
    out: &Path,
    snapshot_override: Option<&[f64]>,
    gnuplot: bool,
) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    summary
        .lines
        .push(format!("{}: {}", scenario.name, scenario.description));

    let runs = &scenario.runs;
    for &obs in &scenario.observables {
        match obs {
            Observable::Phase1d | Observable::Phase2d => {
                for run in runs {
                    emit_snapshots(run, obs, out, snapshot_override, &mut summary)?;
                }
            }
            _ => {
                // sweep observables: merge runs sharing a grid into one CSV
                let grid = runs[0].times.times();
                let shared = runs.iter().all(|r| r.times.times() == grid);
                if shared {
                    let mut header = vec!["T".to_string()];
                    let mut columns: Vec<Vec<f64>> = Vec::new();
                    for run in runs {
                        for (name, col) in
                            sweep_columns(&run.config, &grid, obs, run.label)?
                        {
                            if let Ok(series) = TimeSeries::new(grid.clone(), col.clone()) {
                                if let Some(note) = revival_note(&name, &series) {
                                    summary.lines.push(note);
                                }
                            }
                            header.push(name);
                            columns.push(col);
                        }
                    }
                    let rows: Vec<Vec<f64>> = (0..grid.len())
                        .map(|i| {
                            let mut row = vec![grid[i]];
                            row.extend(columns.iter().map(|c| c[i]));
                            row
                        })
                        .collect();
                    let path = out.join(file_name(obs_base(obs), None, None));
                    write_csv(&path, &header, &rows)?;
                    summary
                        .lines
                        .push(stats_line(&path, rows.len(), &col_stats(&header, &rows)));
                    summary.files.push(path);
                } else {
                    for run in runs {
                        let grid = run.times.times();
                        let mut header = vec!["T".to_string()];
                        let mut columns = Vec::new();
                        for (name, col) in sweep_columns(&run.config, &grid, obs, None)? {
                            header.push(name);
                            columns.push(col);
                        }
                        let rows: Vec<Vec<f64>> = (0..grid.len())
                            .map(|i| {
                                let mut row = vec![grid[i]];
                                row.extend(columns.iter().map(|c| c[i]));
                                row
                            })
                            .collect();
                        let path = out.join(file_name(obs_base(obs), run.label, None));
                        write_csv(&path, &header, &rows)?;
                        summary
                            .lines
                            .push(stats_line(&path, rows.len(), &col_stats(&header, &rows)));
                        summary.files.push(path);
                    }
                }
            }
        }
    }

    if gnuplot {
        let path = out.join(format!("{}.gp", scenario.name));
        let mut script = String::from("set datafile separator ','\nset key autotitle columnhead\n");
        for f in &summary.files {
            let name = f.file_name().unwrap().to_string_lossy();
            if name.starts_with("phase2d") {
                let _ = writeln!(script, "# splot '{name}' using 1:2:3 with pm3d");
            } else {
                let _ = writeln!(script, "plot '{name}' using 1:2 with lines\npause -1");
            }
        }
        fs::write(&path, script)
            .map_err(|e| Error::Unsupported(format!("cannot write {}: {e}", path.display())))?;
        summary.files.push(path);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique_and_complete() {
        let names: Vec<&str> = presets().iter().map(|s| s.name).collect();
        let expected = [
            "fig1a", "fig1b", "fig2a", "fig2b", "fig3", "fig4", "fig5", "fig6a", "fig6b",
            "fig7a", "fig7b", "fig8a", "fig8b", "fig8c",
        ];
        assert_eq!(names, expected);
        let mut dedup = names.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
        for s in presets() {
            for run in &s.runs {
                assert!(run.config.validate().is_ok(), "{}", s.name);
                if let TimeSpec::Sweep { steps, .. } = run.times {
                    assert!(steps >= 2);
                }
            }
        }
    }

    #[test]
    fn config_round_trips_for_every_preset_run() {
        for scenario in presets() {
            for run in &scenario.runs {
                let text = emit_config(&run.config, &run.times);
                let (config, times) = parse_config(&text).unwrap();
                assert_eq!(config, run.config, "{}", scenario.name);
                if let TimeSpec::Sweep { t_min, t_max, steps } = run.times {
                    assert_eq!(
                        times,
                        TimeSpec::Sweep { t_min, t_max, steps },
                        "{}",
                        scenario.name
                    );
                }
            }
        }
    }

    #[test]
    fn parser_rejects_bad_input() {
        let base = emit_config(
            &excited(0, 0, 1, 1, 1.0),
            &TimeSpec::Sweep {
                t_min: 0.0,
                t_max: 1.0,
                steps: 10,
            },
        );
        let with_unknown = format!("{base}\nbogus = 1\n");
        let err = parse_config(&with_unknown).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");

        let broken = base.replace("k1 = 1", "k1 = -2");
        assert!(parse_config(&broken).is_err());
        let missing = base.replace("steps = 10", "");
        assert!(parse_config(&missing).unwrap_err().to_string().contains("steps"));
        // comments and blank lines are fine
        let commented = format!("# header comment\n\n{base}");
        assert!(parse_config(&commented).is_ok());
    }

    #[test]
    fn auto_dims_from_zero() {
        let base = emit_config(
            &excited(0, 0, 1, 1, 2.0),
            &TimeSpec::Sweep {
                t_min: 0.0,
                t_max: 1.0,
                steps: 10,
            },
        );
        let auto = base
            .lines()
            .map(|l| {
                if l.starts_with("dim1") || l.starts_with("dim2") {
                    format!("{} = 0", l.split('=').next().unwrap().trim())
                } else {
                    l.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        let (config, _) = parse_config(&auto).unwrap();
        assert!(config.dim1 > 1 && config.validate().is_ok());
    }

    #[test]
    fn csv_format_is_stable() {
        assert_eq!(fmt(1.0), "1.0000000000000000e0");
        assert_eq!(fmt(-0.5), "-5.0000000000000000e-1");
        // 17 significant digits round-trip f64 exactly
        let v = std::f64::consts::PI;
        let parsed: f64 = fmt(v).parse().unwrap();
        assert_eq!(parsed, v);
    }

    #[test]
    fn file_names_follow_convention() {
        assert_eq!(file_name("phase1d", None, Some(4.42)), "phase1d_T4.42.csv");
        assert_eq!(
            file_name("phase1d", Some("star"), Some(6.3)),
            "phase1d_star_T6.3.csv"
        );
        assert_eq!(file_name("inversion", None, None), "inversion.csv");
    }
}

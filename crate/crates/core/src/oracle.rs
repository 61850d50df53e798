//! Independent verification path: the interaction Hamiltonian as a sparse
//! matrix action on the dense |atom, n1, n2> product basis, integrated with
//! classical fixed-step Runge-Kutta. Shares no evolution code with
//! `dynamics::evolve`, so agreement between the two pins both.

use num_complex::Complex64;

use crate::dynamics::{initial_state, rabi_frequency, EvolvedState, SystemConfig};
use crate::error::{Error, Result};

/// Atom-major flat state vector: index = atom * d1 * d2 + n1 * d2 + n2 with
/// atom 0 = excited, 1 = ground.
#[derive(Debug, Clone)]
pub struct DenseStateVector {
    pub amplitudes: Vec<Complex64>,
    pub d1: usize,
    pub d2: usize,
}

impl DenseStateVector {
    pub fn index(&self, atom: usize, n1: usize, n2: usize) -> usize {
        atom * self.d1 * self.d2 + n1 * self.d2 + n2
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Sparse action of H_I / g: a list of coupled index pairs with their Rabi
/// frequencies. Every basis state appears in at most one pair; the rest have
/// all-zero rows.
pub struct HamiltonianAction {
    pairs: Vec<(usize, usize, f64)>, // (plus index, minus index, Lambda)
    pub d1: usize,
    pub d2: usize,
}

impl HamiltonianAction {
    /// Couplings on total per-mode dims (d1, d2):
    /// <-, n+k1, m| H/g |+, n, m+k2> = Lambda_{n,m} for every (n, m) whose
    /// partner indices stay inside the truncation.
    pub fn new(k1: usize, k2: usize, d1: usize, d2: usize) -> Self {
        let block = d1 * d2;
        let mut pairs = Vec::new();
        for n in 0..d1.saturating_sub(k1) {
            for m in 0..d2.saturating_sub(k2) {
                let ip = n * d2 + (m + k2);
                let im = block + (n + k1) * d2 + m;
                pairs.push((ip, im, rabi_frequency(k1, k2, n, m)));
            }
        }
        Self { pairs, d1, d2 }
    }

    pub fn dim(&self) -> usize {
        2 * self.d1 * self.d2
    }

    pub fn max_rabi(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).fold(0.0, f64::max)
    }

    /// out = (H/g) psi. Untouched rows are zero.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|c| *c = Complex64::ZERO);
        for &(ip, im, lambda) in &self.pairs {
            out[ip] = lambda * psi[im];
            out[im] = lambda * psi[ip];
        }
    }

    /// <psi| H/g |psi>.
    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        self.pairs
            .iter()
            .map(|&(ip, im, lambda)| 2.0 * lambda * (psi[ip].conj() * psi[im]).re)
            .sum()
    }
}

pub fn build_hamiltonian(config: &SystemConfig) -> Result<HamiltonianAction> {
    config.validate()?;
    Ok(HamiltonianAction::new(
        config.k1,
        config.k2,
        config.dim1 + config.k1,
        config.dim2 + config.k2,
    ))
}

/// Flattens the analytic initial state into the dense ordering.
pub fn initial_dense(config: &SystemConfig) -> Result<DenseStateVector> {
    Ok(flatten(&initial_state(config)?))
}

fn flatten(state: &EvolvedState) -> DenseStateVector {
    let (d1, d2) = state.psi_plus.dim();
    let mut amplitudes = Vec::with_capacity(2 * d1 * d2);
    amplitudes.extend(state.psi_plus.iter().copied());
    amplitudes.extend(state.psi_minus.iter().copied());
    DenseStateVector { amplitudes, d1, d2 }
}

/// Largest step the integrator accepts: 0.01 periods of the fastest block.
pub fn max_stable_step(action: &HamiltonianAction) -> f64 {
    0.01 / action.max_rabi().max(f64::MIN_POSITIVE)
}

struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        let z = vec![Complex64::ZERO; dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// One step of y' = -i H y.
    fn step(&mut self, action: &HamiltonianAction, y: &mut [Complex64], h: f64) {
        let deriv = |action: &HamiltonianAction, src: &[Complex64], dst: &mut [Complex64]| {
            // dst = -i H src, written directly from the pair structure
            dst.iter_mut().for_each(|c| *c = Complex64::ZERO);
            for &(ip, im, lambda) in &action.pairs {
                dst[ip] = -Complex64::I * lambda * src[im];
                dst[im] = -Complex64::I * lambda * src[ip];
            }
        };
        let axpy = |dst: &mut [Complex64], y: &[Complex64], s: f64, k: &[Complex64]| {
            for i in 0..y.len() {
                dst[i] = y[i] + s * k[i];
            }
        };
        deriv(action, y, &mut self.k1);
        axpy(&mut self.tmp, y, 0.5 * h, &self.k1);
        deriv(action, &self.tmp, &mut self.k2);
        axpy(&mut self.tmp, y, 0.5 * h, &self.k2);
        deriv(action, &self.tmp, &mut self.k3);
        axpy(&mut self.tmp, y, h, &self.k3);
        deriv(action, &self.tmp, &mut self.k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] += w * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

fn check_step(action: &HamiltonianAction, step: f64) -> Result<()> {
    let bound = max_stable_step(action);
    if !(step > 0.0) || step > bound {
        return Err(Error::StepTooLarge { step, bound });
    }
    Ok(())
}

/// Runge-Kutta solution of i dpsi/dT = (H/g) psi at scaled time `t`.
pub fn integrate(config: &SystemConfig, t: f64, step: f64) -> Result<DenseStateVector> {
    Ok(integrate_checkpoints(config, &[t], step)?.pop().expect("one checkpoint"))
}

/// Integrates once through an increasing list of times, recording the state
/// at each of them.
pub fn integrate_checkpoints(
    config: &SystemConfig,
    checkpoints: &[f64],
    step: f64,
) -> Result<Vec<DenseStateVector>> {
    if checkpoints.is_empty() {
        return Err(Error::Unsupported("no checkpoints requested".into()));
    }
    if checkpoints[0] < 0.0 || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Unsupported(
            "checkpoints must be nonnegative and strictly increasing".into(),
        ));
    }
    let action = build_hamiltonian(config)?;
    check_step(&action, step)?;
    let mut state = initial_dense(config)?;
    let mut rk = Rk4::new(action.dim());
    let mut now = 0.0;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        let span = target - now;
        if span > 0.0 {
            let n_steps = (span / step).ceil() as usize;
            let h = span / n_steps as f64;
            for _ in 0..n_steps {
                rk.step(&action, &mut state.amplitudes, h);
            }
        }
        now = target;
        out.push(state.clone());
    }
    Ok(out)
}

/// |<dense|analytic>|^2 / (norms), mapping the analytic branch arrays onto
/// the dense ordering.
pub fn fidelity(dense: &DenseStateVector, analytic: &EvolvedState) -> f64 {
    let other = flatten(analytic);
    assert_eq!(dense.amplitudes.len(), other.amplitudes.len(), "dimension mismatch");
    let dot: Complex64 = dense
        .amplitudes
        .iter()
        .zip(&other.amplitudes)
        .map(|(a, b)| a.conj() * b)
        .sum();
    dot.norm_sqr() / (dense.norm().powi(2) * other.norm().powi(2))
}

//! Fixed-step RK4 for small complex linear systems dx/dτ = M x + b.
//!
//! This is the independent reference that every closed form in the crate is
//! compared against; it knows nothing about the physics beyond the matrix.

use num_complex::Complex64;

use crate::error::{KondoError, Result};

pub const MAX_DIMENSION: usize = 12;

/// Largest step accepted relative to the row-sum norm of the matrix.
pub const STABILITY_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    dim: usize,
    matrix: Vec<Complex64>,
    inhomogeneity: Vec<Complex64>,
    initial: Vec<Complex64>,
}

impl LinearSystem {
    /// `matrix` is row-major, dim × dim.
    pub fn new(
        matrix: Vec<Complex64>,
        inhomogeneity: Vec<Complex64>,
        initial: Vec<Complex64>,
    ) -> Result<Self> {
        let dim = initial.len();
        if dim == 0 || dim > MAX_DIMENSION {
            return Err(KondoError::InvalidInput(format!("system dimension {dim} outside 1..={MAX_DIMENSION}")));
        }
        if matrix.len() != dim * dim || inhomogeneity.len() != dim {
            return Err(KondoError::InvalidInput("matrix or inhomogeneity has the wrong shape".into()));
        }
        let all_finite = matrix
            .iter()
            .chain(&inhomogeneity)
            .chain(&initial)
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !all_finite {
            return Err(KondoError::InvalidInput("system contains non-finite entries".into()));
        }
        Ok(Self { dim, matrix, inhomogeneity, initial })
    }

    /// Recovers M and b from an affine right-hand side by probing it at the
    /// origin and at each unit vector.
    pub fn from_affine<F>(rhs: F, initial: Vec<Complex64>) -> Result<Self>
    where
        F: Fn(&[Complex64]) -> Vec<Complex64>,
    {
        let dim = initial.len();
        let zero = vec![Complex64::new(0.0, 0.0); dim];
        let b = rhs(&zero);
        let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            let mut e = zero.clone();
            e[k] = Complex64::new(1.0, 0.0);
            let col = rhs(&e);
            for i in 0..dim {
                matrix[i * dim + k] = col[i] - b[i];
            }
        }
        Self::new(matrix, b, initial)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn initial(&self) -> &[Complex64] {
        &self.initial
    }

    pub fn with_initial(&self, initial: Vec<Complex64>) -> Result<Self> {
        Self::new(self.matrix.clone(), self.inhomogeneity.clone(), initial)
    }

    pub fn rhs(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.inhomogeneity.clone();
        self.accumulate(x, 1.0, &mut out);
        out
    }

    fn accumulate(&self, x: &[Complex64], scale: f64, out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.matrix[i * self.dim..(i + 1) * self.dim];
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, xk) in row.iter().zip(x) {
                acc += m * xk;
            }
            *o += acc * scale;
        }
    }

    /// max_i Σ_k |M_ik|, an upper bound on every eigenvalue modulus.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.matrix[i * self.dim..(i + 1) * self.dim].iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_step(&self) -> f64 {
        let norm = self.row_sum_norm();
        if norm > 0.0 {
            STABILITY_FACTOR / norm
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub taus: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[Complex64] {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Default step min(1/Γ, 1/Ω)/200 for a problem with rates Γ and Ω.
pub fn default_step(gamma: f64, omega: f64) -> f64 {
    let fastest = gamma.max(omega);
    1.0 / (200.0 * fastest)
}

fn step_count(tau_max: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(KondoError::InvalidInput(format!("step must be positive, got {step}")));
    }
    if !(tau_max >= step) || !tau_max.is_finite() {
        return Err(KondoError::InvalidInput(format!("tau_max {tau_max} must be at least one step {step}")));
    }
    // a step that divides tau_max up to rounding should not add a sliver step
    let n = (tau_max / step * (1.0 - 1e-12)).ceil();
    Ok(n as usize)
}

/// Classical RK4 on a uniform grid ending exactly at `tau_max`; the step is
/// shrunk slightly when it does not divide `tau_max`.
pub fn integrate_rk4(system: &LinearSystem, tau_max: f64, step: f64) -> Result<Trajectory> {
    let bound = system.max_step();
    if step > bound {
        return Err(KondoError::StepTooLarge { step, bound });
    }
    let n = step_count(tau_max, step)?;
    let h = tau_max / n as f64;
    let dim = system.dim;
    let mut taus = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut x = system.initial.clone();
    taus.push(0.0);
    states.push(x.clone());

    let mut k1 = vec![Complex64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let eval = |x: &[Complex64], out: &mut [Complex64]| {
        out.copy_from_slice(&system.inhomogeneity);
        system.accumulate(x, 1.0, out);
    };
    for step_index in 1..=n {
        eval(&x, &mut k1);
        for i in 0..dim {
            tmp[i] = x[i] + k1[i] * (0.5 * h);
        }
        eval(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = x[i] + k2[i] * (0.5 * h);
        }
        eval(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = x[i] + k3[i] * h;
        }
        eval(&tmp, &mut k4);
        for i in 0..dim {
            x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        taus.push(if step_index == n { tau_max } else { h * step_index as f64 });
        states.push(x.clone());
    }
    Ok(Trajectory { taus, states })
}

/// Endpoint of an RK4 run, without storing the path.
pub fn integrate_rk4_endpoint(system: &LinearSystem, tau_max: f64, step: f64) -> Result<Vec<Complex64>> {
    Ok(integrate_rk4(system, tau_max, step)?.last().to_vec())
}

/// Error estimate at `tau` from runs at `step` and `step/2`:
/// max |x_h − x_{h/2}| / 15, the standard fourth-order Richardson factor.
pub fn richardson_check_with_step(system: &LinearSystem, tau: f64, step: f64) -> Result<f64> {
    let coarse = integrate_rk4_endpoint(system, tau, step)?;
    let fine = integrate_rk4_endpoint(system, tau, 0.5 * step)?;
    Ok(coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / 15.0)
}

/// Richardson estimate using a step of one fifth of the stability bound.
pub fn richardson_check(system: &LinearSystem, tau: f64) -> Result<f64> {
    let step = (0.2 * system.max_step()).min(tau);
    richardson_check_with_step(system, tau, step)
}

//! θ-method and symplectic Euler integrators with per-step energy accounting.

use std::io::Write;

use nalgebra::{Cholesky, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{loads, Discretization, GlobalSystem, Loads, MaterialField};
use crate::linalg::{CsrMatrix, LinalgError, SparseSolver};
use crate::problem::{InitialVelocity, ProblemData};
use crate::space::{fortin_interpolate, project_scalar};

#[derive(Debug, thiserror::Error)]
pub enum SteppingError {
    #[error("invalid stepping configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("pressure mass block of cell {0} is not positive definite")]
    PressureBlock(usize),
    #[error("linear solve residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Residual { residual: f64, tolerance: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Theta,
    Symplectic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteppingConfig {
    pub scheme: Scheme,
    #[serde(default = "half")]
    pub theta: f64,
    pub tau: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Relative residual above which a solve is rejected.
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

fn half() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-8
}

impl SteppingConfig {
    pub fn theta(theta: f64, tau: f64, t_final: f64) -> Self {
        Self { scheme: Scheme::Theta, theta, tau, t_final, tolerance: default_tol() }
    }

    pub fn symplectic(tau: f64, t_final: f64) -> Self {
        Self { scheme: Scheme::Symplectic, theta: 0.5, tau, t_final, tolerance: default_tol() }
    }

    /// `round(T / τ)`, checked against `T` to `1e-12` relative.
    pub fn num_steps(&self) -> Result<usize, SteppingError> {
        if !(self.tau > 0.0) {
            return Err(SteppingError::Config(format!("tau = {} must be positive", self.tau)));
        }
        if !(self.t_final >= 0.0) {
            return Err(SteppingError::Config(format!("T = {} must be non-negative", self.t_final)));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(SteppingError::Config(format!("theta = {} outside [0, 1]", self.theta)));
        }
        let n = (self.t_final / self.tau).round();
        if (n * self.tau - self.t_final).abs() > 1e-12 * self.t_final.max(self.tau) {
            return Err(SteppingError::Config(format!("T = {} is not a multiple of tau = {}", self.t_final, self.tau)));
        }
        Ok(n as usize)
    }
}

/// Velocity DoFs, pressure coefficients, time and `uᵀMu + pᵀNp`.
#[derive(Clone, Debug)]
pub struct WaveState {
    pub u: DVector<f64>,
    pub p: DVector<f64>,
    pub t: f64,
    pub energy: f64,
}

impl WaveState {
    pub fn new(system: &GlobalSystem, u: DVector<f64>, p: DVector<f64>, t: f64) -> Self {
        let energy = system.energy(&u, &p);
        Self { u, p, t, energy }
    }

    /// `‖(u, p)‖_{E_h} = sqrt(energy)`.
    pub fn norm(&self) -> f64 {
        self.energy.max(0.0).sqrt()
    }
}

/// Order of the rules used to interpolate initial data.
pub const INITIAL_DATA_ORDER_BOOST: usize = 6;

/// `u = Π^F u_0`, `p = Π⁰_k p_0`, essential DoFs overwritten with the
/// boundary data at `t = 0` so the state satisfies the constraint.
pub fn init_state(disc: &Discretization, system: &GlobalSystem, material: &MaterialField, data: &dyn ProblemData) -> WaveState {
    let order = disc.quadrature_order() + INITIAL_DATA_ORDER_BOOST;
    let mut u = fortin_interpolate(&disc.mesh, &disc.dofs, &disc.elements, &InitialVelocity(data), order);
    let p = project_scalar(&disc.mesh, &disc.dofs, &disc.elements, &|x| data.initial_pressure(x), order);
    let l0 = loads(disc, material, data, 0.0);
    for (i, &d) in system.essential.iter().enumerate() {
        u[d] = l0.essential_values[i];
    }
    WaveState::new(system, u, p, 0.0)
}

/// `|E^{n+1} + (2θ-1) ‖Δ‖²_{E_h} - E^n|`.
pub fn energy_identity_residual(system: &GlobalSystem, s0: &WaveState, s1: &WaveState, theta: f64) -> f64 {
    let du = &s1.u - &s0.u;
    let dp = &s1.p - &s0.p;
    (s1.energy + (2.0 * theta - 1.0) * system.energy(&du, &dp) - s0.energy).abs()
}

/// Instrumentation of the factorization reuse.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Counters {
    pub factorizations: usize,
    pub solves: usize,
    pub steps: usize,
}

enum Factors {
    Theta { k: SparseSolver, kfe: CsrMatrix },
    Symplectic { m: SparseSolver, n_blocks: Vec<Cholesky<f64, Dyn>> },
}

/// Steps one discretization forward in time. Factorizations are computed
/// once in [`Stepper::new`] and reused by every step.
pub struct Stepper<'a> {
    disc: &'a Discretization,
    system: &'a GlobalSystem,
    material: &'a MaterialField,
    data: &'a dyn ProblemData,
    pub config: SteppingConfig,
    factors: Factors,
    counters: Counters,
    current_loads: Option<(f64, Loads)>,
    /// `Bᵀ`, kept for the symplectic update.
    bt: CsrMatrix,
}

impl<'a> Stepper<'a> {
    pub fn new(
        disc: &'a Discretization,
        system: &'a GlobalSystem,
        material: &'a MaterialField,
        data: &'a dyn ProblemData,
        config: SteppingConfig,
    ) -> Result<Self, SteppingError> {
        config.num_steps()?;
        let tau = config.tau;
        let nf = system.free.len();
        let np = system.n.nrows;
        let mut counters = Counters::default();
        let bt = system.b.transpose();
        let factors = match config.scheme {
            Scheme::Theta => {
                let th = config.theta;
                let a = system.m.scaled(1.0 / tau).combine(1.0, &system.r, th);
                let mut t = Vec::new();
                for (i, j, v) in a.select(&system.free, &system.free).triplets() {
                    t.push((i, j, v));
                }
                let b_free = system.b.select(&(0..np).collect::<Vec<_>>(), &system.free);
                for (i, j, v) in b_free.triplets() {
                    t.push((j, nf + i, th * v));
                    t.push((nf + i, j, -th * v));
                }
                for (i, j, v) in system.n.triplets() {
                    t.push((nf + i, nf + j, v / tau));
                }
                let k = CsrMatrix::from_triplets(nf + np, nf + np, t);
                counters.factorizations += 1;
                let kfe = a.select(&system.free, &system.essential);
                Factors::Theta { k: SparseSolver::lu(&k)?, kfe }
            }
            Scheme::Symplectic => {
                let mff = system.m.select(&system.free, &system.free);
                counters.factorizations += 1;
                let m = SparseSolver::cholesky(&mff)?;
                let n_blocks = system
                    .n_blocks
                    .iter()
                    .enumerate()
                    .map(|(c, b)| Cholesky::new(b.clone()).ok_or(SteppingError::PressureBlock(c)))
                    .collect::<Result<Vec<_>, _>>()?;
                counters.factorizations += 1;
                Factors::Symplectic { m, n_blocks }
            }
        };
        Ok(Self { disc, system, material, data, config, factors, counters, current_loads: None, bt })
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    fn loads_at(&mut self, t: f64) -> Loads {
        if let Some((tc, l)) = &self.current_loads {
            if *tc == t {
                return l.clone();
            }
        }
        loads(self.disc, self.material, self.data, t)
    }

    fn check(&self, solver: &SparseSolver, x: &[f64], b: &[f64]) -> Result<(), SteppingError> {
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let residual = solver.residual(x, b) / scale;
        if residual > self.config.tolerance {
            return Err(SteppingError::Residual { residual, tolerance: self.config.tolerance });
        }
        Ok(())
    }

    /// Advances `state` by one step of the configured scheme.
    pub fn step(&mut self, state: &WaveState) -> Result<WaveState, SteppingError> {
        let t0 = state.t;
        let t1 = t0 + self.config.tau;
        let l0 = self.loads_at(t0);
        let l1 = loads(self.disc, self.material, self.data, t1);
        let next = match self.config.scheme {
            Scheme::Theta => self.theta_step(state, &l0, &l1, t1)?,
            Scheme::Symplectic => self.symplectic_step(state, &l0, &l1, t1)?,
        };
        self.current_loads = Some((t1, l1));
        self.counters.steps += 1;
        Ok(next)
    }

    fn theta_step(&mut self, s: &WaveState, l0: &Loads, l1: &Loads, t1: f64) -> Result<WaveState, SteppingError> {
        let sys = self.system;
        let (tau, th) = (self.config.tau, self.config.theta);
        let nf = sys.free.len();
        // Velocity rows: (M/τ - (1-θ) R) u0 - (1-θ) Bᵀ p0 + θ G1 + (1-θ) G0.
        let mu0 = sys.m.mul(&s.u) / tau;
        let ru0 = sys.r.mul(&s.u);
        let btp0 = self.bt.mul(&s.p);
        let ru = &mu0 - ru0 * (1.0 - th) - btp0 * (1.0 - th) + &l1.g * th + &l0.g * (1.0 - th);
        // Pressure rows: (N/τ) p0 + (1-θ) B u0 + θ F1 + (1-θ) F0.
        let rp = sys.n.mul(&s.p) / tau + sys.b.mul(&s.u) * (1.0 - th) + &l1.f * th + &l0.f * (1.0 - th);
        let mut rhs = vec![0.0; nf + sys.n.nrows];
        for (i, &f) in sys.free.iter().enumerate() {
            rhs[i] = ru[f];
        }
        rhs[nf..].copy_from_slice(rp.as_slice());
        let mut u1 = DVector::zeros(sys.m.nrows);
        for (i, &e) in sys.essential.iter().enumerate() {
            u1[e] = l1.essential_values[i];
        }
        if !sys.essential.is_empty() {
            let Factors::Theta { kfe, .. } = &self.factors else { unreachable!() };
            let ue = l1.essential_values.as_slice();
            let lift = kfe.mul(&DVector::from_column_slice(ue));
            for i in 0..nf {
                rhs[i] -= lift[i];
            }
            let be = sys.b.select(&(0..sys.n.nrows).collect::<Vec<_>>(), &sys.essential).mul(&DVector::from_column_slice(ue));
            for i in 0..sys.n.nrows {
                rhs[nf + i] += th * be[i];
            }
        }
        let Factors::Theta { k, .. } = &self.factors else { unreachable!() };
        let b = rhs.clone();
        k.solve_in_place(&mut rhs, 2);
        self.counters.solves += 1;
        self.check(k, &rhs, &b)?;
        for (i, &f) in sys.free.iter().enumerate() {
            u1[f] = rhs[i];
        }
        let p1 = DVector::from_column_slice(&rhs[nf..]);
        Ok(WaveState::new(sys, u1, p1, t1))
    }

    fn symplectic_step(&mut self, s: &WaveState, l0: &Loads, l1: &Loads, t1: f64) -> Result<WaveState, SteppingError> {
        let sys = self.system;
        let tau = self.config.tau;
        let Factors::Symplectic { m, n_blocks } = &self.factors else { unreachable!() };
        // p1 = p0 + τ N⁻¹ (B u0 + F0), cell by cell.
        let rhs_p = sys.b.mul(&s.u) + &l0.f;
        let dofs = &self.disc.dofs;
        let parts: Vec<DVector<f64>> = n_blocks
            .par_iter()
            .enumerate()
            .map(|(c, ch)| ch.solve(&rhs_p.rows(dofs.pressure_dofs(c).start, ch.l().nrows()).into_owned()))
            .collect();
        let mut p1 = s.p.clone();
        for (c, v) in parts.iter().enumerate() {
            let r = dofs.pressure_dofs(c);
            for (i, x) in r.zip(v.iter()) {
                p1[i] += tau * x;
            }
        }
        // M (u1 - u0) = -τ (Bᵀ p1 + R u0 - G1) on the free rows.
        let mut u1 = s.u.clone();
        for (i, &e) in sys.essential.iter().enumerate() {
            u1[e] = l1.essential_values[i];
        }
        let du_e = &u1 - &s.u;
        let force = (self.bt.mul(&p1) + sys.r.mul(&s.u) - &l1.g) * (-tau) - sys.m.mul(&du_e);
        let mut rhs: Vec<f64> = sys.free.iter().map(|&f| force[f]).collect();
        let b = rhs.clone();
        m.solve_in_place(&mut rhs, 1);
        self.counters.solves += 1;
        self.check(m, &rhs, &b)?;
        for (i, &f) in sys.free.iter().enumerate() {
            u1[f] += rhs[i];
        }
        Ok(WaveState::new(sys, u1, p1, t1))
    }
}

/// Runs `n` steps and returns every state, the initial one included.
pub fn integrate(stepper: &mut Stepper, initial: WaveState, mut observer: impl FnMut(usize, &WaveState)) -> Result<WaveState, SteppingError> {
    let n = stepper.config.num_steps()?;
    observer(0, &initial);
    let mut s = initial;
    for i in 1..=n {
        s = stepper.step(&s)?;
        observer(i, &s);
    }
    Ok(s)
}

/// CSV energy trace `step,t,energy,energy_minus_initial`.
pub fn write_energy_trace(w: impl Write, rows: &[(usize, f64, f64)]) -> std::io::Result<()> {
    write_trace(w, rows, false)
}

/// [`write_energy_trace`] plus an `energy_minus_initial_x1e4` column.
pub fn write_energy_trace_magnified(w: impl Write, rows: &[(usize, f64, f64)]) -> std::io::Result<()> {
    write_trace(w, rows, true)
}

fn write_trace(mut w: impl Write, rows: &[(usize, f64, f64)], magnified: bool) -> std::io::Result<()> {
    write!(w, "step,t,energy,energy_minus_initial")?;
    writeln!(w, "{}", if magnified { ",energy_minus_initial_x1e4" } else { "" })?;
    let e0 = rows.first().map(|r| r.2).unwrap_or(0.0);
    for &(s, t, e) in rows {
        write!(w, "{s},{t:.12e},{e:.16e},{:.16e}", e - e0)?;
        if magnified {
            write!(w, ",{:.16e}", 1e4 * (e - e0))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

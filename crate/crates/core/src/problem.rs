//! Problem data: sources, boundary data, initial conditions and, when known,
//! the exact solution. The built-in cases are selected by name.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point, Vector};
use crate::space::VectorField;

/// Data of the first-order system `u_t - ∇p = 0`, `c⁻² p_t - div u = f`.
pub trait ProblemData: Sync + Send {
    fn source(&self, _x: &Point, _t: f64) -> f64 {
        0.0
    }
    /// Pressure on Dirichlet edges.
    fn dirichlet(&self, _x: &Point, _t: f64) -> f64 {
        0.0
    }
    /// Normal velocity on Neumann edges.
    fn neumann(&self, _x: &Point, _t: f64) -> f64 {
        0.0
    }
    /// `g_R` in `u·n + α⁻¹c⁻¹ p = g_R`.
    fn robin(&self, _x: &Point, _t: f64) -> f64 {
        0.0
    }
    fn initial_velocity(&self, _x: &Point) -> Vector {
        Vector::zeros()
    }
    fn initial_velocity_divergence(&self, _x: &Point) -> f64 {
        0.0
    }
    fn initial_pressure(&self, _x: &Point) -> f64 {
        0.0
    }
    /// Exact `(u, p)` at `(x, t)`, if known.
    fn exact(&self, _x: &Point, _t: f64) -> Option<(Vector, f64)> {
        None
    }
    fn has_exact(&self) -> bool {
        false
    }
    /// `true` when the source vanishes identically.
    fn is_unforced(&self) -> bool {
        false
    }
}

/// The initial velocity as a [`VectorField`].
pub struct InitialVelocity<'a>(pub &'a dyn ProblemData);

impl VectorField for InitialVelocity<'_> {
    fn value(&self, x: &Point) -> Vector {
        self.0.initial_velocity(x)
    }
    fn divergence(&self, x: &Point) -> f64 {
        self.0.initial_velocity_divergence(x)
    }
}

/// Smooth solution on the unit square with pressure
/// `p = sin(2πx) cos(2πy) cos t` and velocity `u = sin t ∇(sin(2πx) cos(2πy))`.
#[derive(Clone, Debug)]
pub struct Manufactured {
    pub c: f64,
}

impl Manufactured {
    fn s(x: &Point) -> f64 {
        (2.0 * PI * x.x).sin() * (2.0 * PI * x.y).cos()
    }
    fn grad_s(x: &Point) -> Vector {
        let (sx, cx) = (2.0 * PI * x.x).sin_cos();
        let (sy, cy) = (2.0 * PI * x.y).sin_cos();
        Vector::new(2.0 * PI * cx * cy, -2.0 * PI * sx * sy)
    }
}

impl ProblemData for Manufactured {
    fn source(&self, x: &Point, t: f64) -> f64 {
        (8.0 * PI * PI - 1.0 / (self.c * self.c)) * t.sin() * Self::s(x)
    }
    fn dirichlet(&self, x: &Point, t: f64) -> f64 {
        Self::s(x) * t.cos()
    }
    fn neumann(&self, _x: &Point, _t: f64) -> f64 {
        // Only meaningful with the outward normal; the scenario uses Γ_D = ∂Ω.
        0.0
    }
    fn initial_pressure(&self, x: &Point) -> f64 {
        Self::s(x)
    }
    fn exact(&self, x: &Point, t: f64) -> Option<(Vector, f64)> {
        Some((Self::grad_s(x) * t.sin(), Self::s(x) * t.cos()))
    }
    fn has_exact(&self) -> bool {
        true
    }
}

/// Unforced case with `u0 = (sin x, cos y)`, `p0 = cos(2πy) sin(2πx)`.
#[derive(Clone, Debug, Default)]
pub struct EnergyCase;

impl ProblemData for EnergyCase {
    fn initial_velocity(&self, x: &Point) -> Vector {
        Vector::new(x.x.sin(), x.y.cos())
    }
    fn initial_velocity_divergence(&self, x: &Point) -> f64 {
        x.x.cos() - x.y.sin()
    }
    fn initial_pressure(&self, x: &Point) -> f64 {
        (2.0 * PI * x.y).cos() * (2.0 * PI * x.x).sin()
    }
    fn is_unforced(&self) -> bool {
        true
    }
}

/// Gaussian pulse source `A e^{-(t-t0)²/σ1} e^{-|x-x_c|²/σ2}`, zero initial state.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSource {
    pub amplitude: f64,
    pub t0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub centre: [f64; 2],
}

impl Default for GaussianSource {
    fn default() -> Self {
        Self { amplitude: 10.0, t0: 1.0, sigma1: 0.01, sigma2: 0.00125, centre: [0.5, 0.5] }
    }
}

impl ProblemData for GaussianSource {
    fn source(&self, x: &Point, t: f64) -> f64 {
        let d2 = (x.x - self.centre[0]).powi(2) + (x.y - self.centre[1]).powi(2);
        self.amplitude * (-(t - self.t0).powi(2) / self.sigma1).exp() * (-d2 / self.sigma2).exp()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Zero;

impl ProblemData for Zero {
    fn exact(&self, _x: &Point, _t: f64) -> Option<(Vector, f64)> {
        Some((Vector::zeros(), 0.0))
    }
    fn has_exact(&self) -> bool {
        true
    }
    fn is_unforced(&self) -> bool {
        true
    }
}

/// Initial pressure sampled on a uniform `nx x ny` grid over `[0,1]²`
/// (row-major, `y` slowest), bilinearly interpolated; everything else zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tabulated {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl Tabulated {
    pub fn validate(&self) -> Result<(), String> {
        if self.nx < 2 || self.ny < 2 {
            return Err("tabulated grid needs at least 2x2 samples".into());
        }
        if self.values.len() != self.nx * self.ny {
            return Err(format!("tabulated grid has {} values, expected {}", self.values.len(), self.nx * self.ny));
        }
        Ok(())
    }

    fn sample(&self, x: &Point) -> f64 {
        let fx = x.x.clamp(0.0, 1.0) * (self.nx - 1) as f64;
        let fy = x.y.clamp(0.0, 1.0) * (self.ny - 1) as f64;
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (s, t) = (fx - i as f64, fy - j as f64);
        let v = |i: usize, j: usize| self.values[j * self.nx + i];
        (1.0 - s) * (1.0 - t) * v(i, j) + s * (1.0 - t) * v(i + 1, j) + (1.0 - s) * t * v(i, j + 1) + s * t * v(i + 1, j + 1)
    }
}

impl ProblemData for Tabulated {
    fn initial_pressure(&self, x: &Point) -> f64 {
        self.sample(x)
    }
    fn is_unforced(&self) -> bool {
        true
    }
}

/// Registry entry as written in scenario files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSpec {
    Manufactured,
    Energy,
    Scattering(GaussianSourceSpec),
    Zero,
    Tabulated(Tabulated),
}

/// Optional overrides of the pulse parameters.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSourceSpec {
    pub amplitude: Option<f64>,
    pub t0: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub centre: Option<[f64; 2]>,
}

impl DataSpec {
    /// Instantiates the data; `c` is the wave speed the manufactured case is built for.
    pub fn build(&self, c: f64) -> Result<Box<dyn ProblemData>, String> {
        Ok(match self {
            DataSpec::Manufactured => Box::new(Manufactured { c }),
            DataSpec::Energy => Box::new(EnergyCase),
            DataSpec::Scattering(o) => {
                let d = GaussianSource::default();
                Box::new(GaussianSource {
                    amplitude: o.amplitude.unwrap_or(d.amplitude),
                    t0: o.t0.unwrap_or(d.t0),
                    sigma1: o.sigma1.unwrap_or(d.sigma1),
                    sigma2: o.sigma2.unwrap_or(d.sigma2),
                    centre: o.centre.unwrap_or(d.centre),
                })
            }
            DataSpec::Zero => Box::new(Zero),
            DataSpec::Tabulated(t) => {
                t.validate()?;
                Box::new(t.clone())
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            DataSpec::Manufactured => "manufactured",
            DataSpec::Energy => "energy",
            DataSpec::Scattering(_) => "scattering",
            DataSpec::Zero => "zero",
            DataSpec::Tabulated(_) => "tabulated",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(d: &dyn ProblemData, x: Point, t: f64, c: f64) {
        // u_t - ∇p = 0 and c⁻² p_t - div u = f by central differences.
        let e = 1e-5;
        let ex = |x: Point, t: f64| d.exact(&x, t).unwrap();
        let ut = (ex(x, t + e).0 - ex(x, t - e).0) / (2.0 * e);
        let px = (ex(Point::new(x.x + e, x.y), t).1 - ex(Point::new(x.x - e, x.y), t).1) / (2.0 * e);
        let py = (ex(Point::new(x.x, x.y + e), t).1 - ex(Point::new(x.x, x.y - e), t).1) / (2.0 * e);
        assert!((ut - Vector::new(px, py)).norm() < 1e-6);
        let pt = (ex(x, t + e).1 - ex(x, t - e).1) / (2.0 * e);
        let div = (ex(Point::new(x.x + e, x.y), t).0.x - ex(Point::new(x.x - e, x.y), t).0.x) / (2.0 * e)
            + (ex(Point::new(x.x, x.y + e), t).0.y - ex(Point::new(x.x, x.y - e), t).0.y) / (2.0 * e);
        assert!((pt / (c * c) - div - d.source(&x, t)).abs() < 1e-5);
    }

    #[test]
    fn manufactured_solves_the_system() {
        for c in [1.0, 0.7] {
            let d = Manufactured { c };
            for (x, t) in [(Point::new(0.3, 0.7), 0.4), (Point::new(0.11, 0.52), 1.3)] {
                fd_check(&d, x, t, c);
            }
            let b = Point::new(0.0, 0.3);
            assert_eq!(d.dirichlet(&b, 0.2), d.exact(&b, 0.2).unwrap().1);
        }
    }

    #[test]
    fn energy_case_divergence() {
        let d = EnergyCase;
        let x = Point::new(0.4, 0.8);
        let e = 1e-6;
        let div = (d.initial_velocity(&Point::new(x.x + e, x.y)).x - d.initial_velocity(&Point::new(x.x - e, x.y)).x) / (2.0 * e)
            + (d.initial_velocity(&Point::new(x.x, x.y + e)).y - d.initial_velocity(&Point::new(x.x, x.y - e)).y) / (2.0 * e);
        assert!((div - d.initial_velocity_divergence(&x)).abs() < 1e-8);
    }

    #[test]
    fn gaussian_peak() {
        let g = GaussianSource::default();
        assert!((g.source(&Point::new(0.5, 0.5), 1.0) - 10.0).abs() < 1e-14);
    }

    #[test]
    fn tabulated_bilinear() {
        let t = Tabulated { nx: 2, ny: 2, values: vec![0.0, 1.0, 2.0, 3.0] };
        assert!((t.initial_pressure(&Point::new(0.5, 0.5)) - 1.5).abs() < 1e-15);
        assert!((t.initial_pressure(&Point::new(1.0, 0.0)) - 1.0).abs() < 1e-15);
        let spec: DataSpec = serde_json::from_str(r#"{"name":"tabulated","nx":2,"ny":2,"values":[0,1,2,3]}"#).unwrap();
        assert!(spec.build(1.0).is_ok());
        let spec: DataSpec = serde_json::from_str(r#"{"name":"scattering","sigma1":0.02}"#).unwrap();
        assert_eq!(spec.name(), "scattering");
        assert!(serde_json::from_str::<DataSpec>(r#"{"name":"nosuch"}"#).is_err());
    }
}

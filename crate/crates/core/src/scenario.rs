//! Scenario files and the drivers behind the command-line front-end.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, ConvergenceTable, ErrorReport};
use crate::assembly::{assemble, Discretization, GlobalSystem, MaterialField};
use crate::geometry::Point;
use crate::mesh::{self, rules, BoundaryTag, HoleConfig, MeshFamily, PolygonalMesh};
use crate::output;
use crate::problem::{DataSpec, ProblemData};
use crate::space::ElementOptions;
use crate::timestepping::{
    init_state, integrate, write_energy_trace, write_energy_trace_magnified, Scheme, SteppingConfig, Stepper, WaveState,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_ORDER: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ScenarioError {
    /// 2 for configuration errors, 3 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => 2,
            _ => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io { path: path.to_path_buf(), source }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeshSpec {
    Generated {
        family: MeshFamily,
        n: usize,
        #[serde(default)]
        seed: u64,
    },
    File {
        path: PathBuf,
    },
    Holes {
        config: HoleConfig,
        #[serde(default = "default_holes_n")]
        n: usize,
        #[serde(default)]
        refine: u32,
    },
}

fn default_holes_n() -> usize {
    38
}

/// How boundary edges receive their condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BoundaryRule {
    AllDirichlet,
    DirichletTopBottomNeumannSides,
    RobinOuterNeumannInner,
    /// Keep the tags stored in the mesh file.
    FromFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub vtk: bool,
    /// Snapshot every `stride` steps; the last step is always written.
    #[serde(default = "one")]
    pub stride: usize,
}

fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, vtk: true, stride: 1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub families: Vec<MeshFamily>,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NamedScheme {
    ExplicitEuler,
    ImplicitEuler,
    CrankNicolson,
    SymplecticEuler,
}

impl NamedScheme {
    pub const ALL: [NamedScheme; 4] =
        [NamedScheme::ExplicitEuler, NamedScheme::ImplicitEuler, NamedScheme::CrankNicolson, NamedScheme::SymplecticEuler];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedScheme::ExplicitEuler => "explicitEuler",
            NamedScheme::ImplicitEuler => "implicitEuler",
            NamedScheme::CrankNicolson => "crankNicolson",
            NamedScheme::SymplecticEuler => "symplecticEuler",
        }
    }

    pub fn stepping(self, tau: f64, t_final: f64) -> SteppingConfig {
        match self {
            NamedScheme::ExplicitEuler => SteppingConfig::theta(0.0, tau, t_final),
            NamedScheme::ImplicitEuler => SteppingConfig::theta(1.0, tau, t_final),
            NamedScheme::CrankNicolson => SteppingConfig::theta(0.5, tau, t_final),
            NamedScheme::SymplecticEuler => SteppingConfig::symplectic(tau, t_final),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    #[serde(default = "all_schemes")]
    pub schemes: Vec<NamedScheme>,
}

fn all_schemes() -> Vec<NamedScheme> {
    NamedScheme::ALL.to_vec()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub mesh: MeshSpec,
    pub k: usize,
    #[serde(default)]
    pub material: MaterialField,
    /// Defaults to all-Dirichlet for generated meshes, Robin outside and
    /// Neumann on holes for hole meshes, and the stored tags for files.
    #[serde(default)]
    pub boundary: Option<BoundaryRule>,
    pub data: DataSpec,
    pub stepping: SteppingConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub elements: ElementOptions,
    #[serde(default)]
    pub convergence: Option<ConvergenceSpec>,
    #[serde(default)]
    pub energy: Option<EnergySpec>,
    /// Probe points where the pressure is sampled at the final time.
    #[serde(default)]
    pub probes: Vec<[f64; 2]>,
}

impl ScenarioConfig {
    /// Parses and validates; serde diagnostics carry line and column.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|e| ScenarioError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            ScenarioError::Config(m) => ScenarioError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Config(m));
        if self.version != SCHEMA_VERSION {
            return bad(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.version));
        }
        if self.k > MAX_ORDER {
            return bad(format!("k = {} outside [0, {MAX_ORDER}]", self.k));
        }
        self.stepping.num_steps().map_err(|e| ScenarioError::Config(e.to_string()))?;
        if self.output.stride == 0 {
            return bad("output.stride must be at least 1".into());
        }
        if self.material.c <= 0.0 || self.material.regions.values().any(|&c| c <= 0.0) || self.material.alpha <= 0.0 {
            return bad("wave speeds and alpha must be positive".into());
        }
        if let Some(c) = &self.convergence {
            if c.families.is_empty() || c.n.is_empty() || c.k.is_empty() {
                return bad("convergence.families, n and k must be non-empty".into());
            }
            if let Some(k) = c.k.iter().find(|&&k| k > MAX_ORDER) {
                return bad(format!("convergence k = {k} outside [0, {MAX_ORDER}]"));
            }
        }
        self.data.build(self.material.c).map_err(ScenarioError::Config)?;
        Ok(())
    }

    pub fn boundary_rule(&self) -> BoundaryRule {
        self.boundary.unwrap_or(match self.mesh {
            MeshSpec::Generated { .. } => BoundaryRule::AllDirichlet,
            MeshSpec::File { .. } => BoundaryRule::FromFile,
            MeshSpec::Holes { .. } => BoundaryRule::RobinOuterNeumannInner,
        })
    }

    /// Output directory: `override_dir`, then `output.dir`, then `./out`.
    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        override_dir.map(Path::to_path_buf).or_else(|| self.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn apply_rule(mesh: PolygonalMesh, rule: BoundaryRule) -> Result<PolygonalMesh, ScenarioError> {
    let tagged = match rule {
        BoundaryRule::AllDirichlet => mesh.tag_boundary(rules::all_dirichlet),
        BoundaryRule::DirichletTopBottomNeumannSides => mesh.tag_boundary(rules::dirichlet_top_bottom_neumann_sides),
        BoundaryRule::RobinOuterNeumannInner => mesh.tag_boundary(rules::robin_outer_neumann_inner),
        BoundaryRule::FromFile => Ok(mesh),
    };
    tagged.map_err(|e| ScenarioError::Config(e.to_string()))
}

/// Builds and tags the mesh; `seed` overrides the configured one.
pub fn build_mesh(spec: &MeshSpec, rule: BoundaryRule, seed: Option<u64>) -> Result<PolygonalMesh, ScenarioError> {
    let cfg = |e: mesh::MeshError| ScenarioError::Config(e.to_string());
    let m = match spec {
        MeshSpec::Generated { family, n, seed: s } => mesh::generate(*family, *n, seed.unwrap_or(*s)).map_err(cfg)?,
        MeshSpec::File { path } => {
            let f = fs::File::open(path).map_err(|e| ScenarioError::Config(format!("{}: {e}", path.display())))?;
            mesh::read_polymesh(std::io::BufReader::new(f)).map_err(cfg)?
        }
        MeshSpec::Holes { config, n, refine } => mesh::build_holes_mesh(*config, *n, *refine).map_err(cfg)?,
    };
    if rule == BoundaryRule::FromFile && m.edges.iter().any(|e| e.tag == BoundaryTag::Untagged) {
        return Err(ScenarioError::Config("mesh has untagged boundary edges and no boundary rule".into()));
    }
    apply_rule(m, rule)
}

/// A discretized scenario, ready to run.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub disc: Discretization,
    pub system: GlobalSystem,
    pub material: MaterialField,
    pub data: Box<dyn ProblemData>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig, seed: Option<u64>) -> Result<Self, ScenarioError> {
        config.validate()?;
        let mesh = build_mesh(&config.mesh, config.boundary_rule(), seed)?;
        Self::from_mesh(config, mesh)
    }

    pub fn from_mesh(config: ScenarioConfig, mesh: PolygonalMesh) -> Result<Self, ScenarioError> {
        let material = config.material.clone();
        material.validate(&mesh).map_err(|e| ScenarioError::Config(e.to_string()))?;
        let data = config.data.build(material.c).map_err(ScenarioError::Config)?;
        let disc = Discretization::new(mesh, config.k, config.elements).map_err(|e| ScenarioError::Solver(e.to_string()))?;
        let system = assemble(&disc, &material).map_err(|e| ScenarioError::Solver(e.to_string()))?;
        Ok(Self { config, disc, system, material, data })
    }

    pub fn initial_state(&self) -> WaveState {
        init_state(&self.disc, &self.system, &self.material, self.data.as_ref())
    }

    /// Runs the configured scheme. With `out` set, writes the energy trace,
    /// VTK snapshots (if enabled) and `summary.json` there.
    pub fn run(&self, out: Option<&Path>) -> Result<RunOutcome, ScenarioError> {
        self.run_with(self.config.stepping.clone(), out, |_, _| {})
    }

    pub fn run_with(
        &self,
        stepping: SteppingConfig,
        out: Option<&Path>,
        mut observer: impl FnMut(usize, &WaveState),
    ) -> Result<RunOutcome, ScenarioError> {
        let start = Instant::now();
        let steps = stepping.num_steps().map_err(|e| ScenarioError::Config(e.to_string()))?;
        if let Some(dir) = out {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut stepper = Stepper::new(&self.disc, &self.system, &self.material, self.data.as_ref(), stepping)
            .map_err(|e| ScenarioError::Solver(e.to_string()))?;
        let initial = self.initial_state();
        let initial_energy = initial.energy;
        let mut trace = Vec::with_capacity(steps + 1);
        let mut manifest = Vec::new();
        let mut write_error = None;
        let stride = self.config.output.stride;
        let vtk = self.config.output.vtk;
        let last = integrate(&mut stepper, initial, |i, s| {
            trace.push((i, s.t, s.energy));
            observer(i, s);
            if let (Some(dir), true) = (out, vtk) {
                if (i % stride == 0 || i == steps) && write_error.is_none() {
                    match write_snapshot(dir, i, &self.disc, s) {
                        Ok(files) => manifest.extend(files),
                        Err(e) => write_error = Some(e),
                    }
                }
            }
        })
        .map_err(|e| ScenarioError::Solver(e.to_string()))?;
        if let Some(e) = write_error {
            return Err(e);
        }
        let errors = if self.data.has_exact() {
            Some(analysis::compute_errors(&self.disc, &self.material, &last, self.data.as_ref()).map_err(|e| ScenarioError::Solver(e.to_string()))?)
        } else {
            None
        };
        let probes: Vec<Point> = self.config.probes.iter().map(|p| Point::new(p[0], p[1])).collect();
        let probe_values = analysis::sample_pressure(&self.disc, &last.p, &probes);
        let mut summary = RunSummary {
            config: self.config.clone(),
            steps,
            initial_energy,
            final_energy: last.energy,
            relative_energy_error: if initial_energy > 0.0 { (last.norm() - initial_energy.sqrt()) / initial_energy.sqrt() } else { 0.0 },
            errors,
            probe_values,
            counters: stepper.counters(),
            wall_time: 0.0,
            manifest,
        };
        if let Some(dir) = out {
            let path = dir.join("energy.csv");
            let f = fs::File::create(&path).map_err(io_err(&path))?;
            write_energy_trace(BufWriter::new(f), &trace).map_err(io_err(&path))?;
            summary.manifest.push(path);
        }
        summary.wall_time = start.elapsed().as_secs_f64();
        if let Some(e) = summary.errors.as_mut() {
            e.wall_time = summary.wall_time;
        }
        if let Some(dir) = out {
            let path = dir.join("summary.json");
            summary.manifest.push(path.clone());
            write_json(&path, &summary)?;
        }
        Ok(RunOutcome { summary, trace, last })
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), ScenarioError> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(BufWriter::new(f), value).map_err(|e| ScenarioError::Io { path: path.to_path_buf(), source: e.into() })
}

fn write_snapshot(dir: &Path, step: usize, disc: &Discretization, s: &WaveState) -> Result<Vec<PathBuf>, ScenarioError> {
    let cells = dir.join(format!("cells_{step:05}.vtk"));
    let points = dir.join(format!("pressure_{step:05}.vtk"));
    let f = fs::File::create(&cells).map_err(io_err(&cells))?;
    output::write_cells(BufWriter::new(f), disc, s).map_err(io_err(&cells))?;
    let f = fs::File::create(&points).map_err(io_err(&points))?;
    output::write_pressure_points(BufWriter::new(f), disc, s).map_err(io_err(&points))?;
    Ok(vec![cells, points])
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub steps: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// `(‖s_T‖ - ‖s_0‖) / ‖s_0‖` in the discrete energy norm.
    pub relative_energy_error: f64,
    pub errors: Option<ErrorReport>,
    pub probe_values: Vec<Option<f64>>,
    pub counters: crate::timestepping::Counters,
    pub wall_time: f64,
    pub manifest: Vec<PathBuf>,
}

pub struct RunOutcome {
    pub summary: RunSummary,
    /// `(step, t, energy)` for every step, the initial state included.
    pub trace: Vec<(usize, f64, f64)>,
    pub last: WaveState,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceVerdict {
    pub family: MeshFamily,
    pub k: usize,
    pub table: ConvergenceTable,
    pub eoc_u: Option<f64>,
    pub eoc_p: Option<f64>,
    pub eoc_energy: Option<f64>,
    /// Largest relative change of `e_u`, `e_p` between the default and the
    /// elevated error quadrature.
    pub quadrature_drift: f64,
    /// Least-squares rates of `e_u` and `e_p` in `[k + 0.8, k + 1.4]`.
    pub pass: Option<bool>,
}

pub const EOC_LOWER_MARGIN: f64 = 0.8;
pub const EOC_UPPER_MARGIN: f64 = 1.4;

/// Runs the refinement study for every family and order in `spec`.
pub fn run_convergence(config: &ScenarioConfig, spec: &ConvergenceSpec) -> Result<Vec<ConvergenceVerdict>, ScenarioError> {
    let mut verdicts = Vec::new();
    for &family in &spec.families {
        for &k in &spec.k {
            let mut table = ConvergenceTable::default();
            let mut drift = 0.0_f64;
            for &n in &spec.n {
                let mut cfg = config.clone();
                cfg.k = k;
                cfg.mesh = MeshSpec::Generated { family, n, seed: spec.seed };
                let sc = Scenario::new(cfg, None)?;
                let outcome = sc.run(None)?;
                let mut report = outcome.summary.errors.ok_or_else(|| ScenarioError::Config("convergence needs data with an exact solution".into()))?;
                let low = analysis::compute_errors_with_order(&sc.disc, &sc.material, &outcome.last, sc.data.as_ref(), sc.disc.quadrature_order())
                    .map_err(|e| ScenarioError::Solver(e.to_string()))?;
                drift = drift.max(((low.e_u - report.e_u) / report.e_u).abs()).max(((low.e_p - report.e_p) / report.e_p).abs());
                report.family = family.as_str().to_string();
                table.rows.push(report);
            }
            let (eoc_u, eoc_p, eoc_energy) = match (table.eoc_u(), table.eoc_p(), table.eoc_energy()) {
                (Ok(u), Ok(p), Ok(e)) => (Some(u.fit), Some(p.fit), Some(e.fit)),
                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                    log::warn!("{} k={k}: no convergence rates ({e})", family.as_str());
                    (None, None, None)
                }
            };
            let within = |r: f64| r >= k as f64 + EOC_LOWER_MARGIN && r <= k as f64 + EOC_UPPER_MARGIN;
            let pass = eoc_u.zip(eoc_p).map(|(u, p)| within(u) && within(p));
            verdicts.push(ConvergenceVerdict { family, k, table, eoc_u, eoc_p, eoc_energy, quadrature_drift: drift, pass });
        }
    }
    Ok(verdicts)
}

/// Writes one CSV per verdict plus `convergence.json`.
pub fn write_convergence(dir: &Path, verdicts: &[ConvergenceVerdict]) -> Result<Vec<PathBuf>, ScenarioError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();
    for v in verdicts {
        let path = dir.join(format!("convergence_{}_k{}.csv", v.family.as_str(), v.k));
        let f = fs::File::create(&path).map_err(io_err(&path))?;
        v.table.write_csv(BufWriter::new(f)).map_err(io_err(&path))?;
        files.push(path);
    }
    let path = dir.join("convergence.json");
    write_json(&path, &verdicts)?;
    files.push(path);
    Ok(files)
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemeDrift {
    pub scheme: NamedScheme,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// `max_n |E^n - E^0|`.
    pub max_drift: f64,
    pub relative_energy_error: f64,
    pub monotone_nonincreasing: bool,
    pub monotone_nondecreasing: bool,
}

/// Runs every scheme on the same discretization; traces are returned in
/// scheme order.
pub fn run_energy(
    scenario: &Scenario,
    schemes: &[NamedScheme],
    out: Option<&Path>,
) -> Result<(Vec<SchemeDrift>, Vec<Vec<(usize, f64, f64)>>), ScenarioError> {
    if !scenario.data.is_unforced() {
        return Err(ScenarioError::Config(format!("energy study needs unforced data, `{}` has a source", scenario.config.data.name())));
    }
    let (tau, t_final) = (scenario.config.stepping.tau, scenario.config.stepping.t_final);
    let mut drifts = Vec::new();
    let mut traces = Vec::new();
    for &scheme in schemes {
        let outcome = scenario.run_with(scheme.stepping(tau, t_final), None, |_, _| {})?;
        let e0 = outcome.summary.initial_energy;
        let slack = 1e-13 * e0;
        let tr = &outcome.trace;
        drifts.push(SchemeDrift {
            scheme,
            initial_energy: e0,
            final_energy: outcome.summary.final_energy,
            max_drift: tr.iter().map(|r| (r.2 - e0).abs()).fold(0.0, f64::max),
            relative_energy_error: outcome.summary.relative_energy_error,
            monotone_nonincreasing: tr.windows(2).all(|w| w[1].2 <= w[0].2 + slack),
            monotone_nondecreasing: tr.windows(2).all(|w| w[1].2 >= w[0].2 - slack),
        });
        if let Some(dir) = out {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join(format!("energy_{}.csv", scheme.as_str()));
            let f = fs::File::create(&path).map_err(io_err(&path))?;
            write_energy_trace_magnified(BufWriter::new(f), tr).map_err(io_err(&path))?;
        }
        traces.push(outcome.trace);
    }
    if let Some(dir) = out {
        write_json(&dir.join("energy_drift.json"), &drifts)?;
    }
    Ok((drifts, traces))
}

/// `max |p(x, y) - p(y, x)| / max |p|` over the probe points whose mirror
/// image is also inside the mesh.
pub fn diagonal_symmetry_defect(disc: &Discretization, p: &nalgebra::DVector<f64>, probes: &[Point]) -> f64 {
    let mirrored: Vec<Point> = probes.iter().map(|x| Point::new(x.y, x.x)).collect();
    let a = analysis::sample_pressure(disc, p, probes);
    let b = analysis::sample_pressure(disc, p, &mirrored);
    let pairs: Vec<(f64, f64)> = a.into_iter().zip(b).filter_map(|(x, y)| x.zip(y)).collect();
    let scale = pairs.iter().map(|(x, _)| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    pairs.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Short label of a stepping configuration for logs.
pub fn describe_scheme(s: &SteppingConfig) -> String {
    match s.scheme {
        Scheme::Theta => format!("theta={}", s.theta),
        Scheme::Symplectic => "symplectic".into(),
    }
}

#[cfg(test)]
mod tests;

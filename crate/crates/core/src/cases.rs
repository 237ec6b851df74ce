//! Built-in test cases: initial conditions, solver assembly and the run loop.

use std::time::{Duration, Instant};

use crate::basis::SpectralBasis;
use crate::blending::BlendingParams;
use crate::config::{CaseId, EdgeRecovery, RunConfig, StopRule, WallSweepConfig};
use crate::error::{SolverError, WallModelError};
use crate::field::{node_position, ConservativeField};
use crate::mesh::CartesianMesh;
use crate::operator::SpatialOperator;
use crate::perf::PerfRecord;
use crate::physics::{Conserved, Gas};
use crate::solver::{BlendingMode, HybridSolver, StepDiagnostics};
use crate::timestep::RK_STAGES;
use crate::wall;

/// Density, velocity and pressure of the uniform flow used by the freestream
/// and scaling cases. The velocity is oblique so both flux directions work.
pub const FREESTREAM: (f64, [f64; 2], f64) = (1.0, [0.5, 0.25], 1.0);

pub const SOD_LEFT: (f64, f64, f64) = (1.0, 0.0, 1.0);
pub const SOD_RIGHT: (f64, f64, f64) = (0.125, 0.0, 0.1);
pub const SOD_INTERFACE: f64 = 0.5;

pub fn freestream_state(gas: &Gas, dims: usize) -> Conserved {
    let (rho, mut vel, p) = FREESTREAM;
    if dims == 1 {
        vel[1] = 0.0;
    }
    gas.conserved(rho, vel, p)
}

pub fn freestream_field(mesh: &CartesianMesh, basis: &SpectralBasis, gas: &Gas) -> ConservativeField {
    let u = freestream_state(gas, mesh.dims());
    ConservativeField::from_fn(mesh, basis, |_| u)
}

/// Sod states sampled pointwise: left state for `x < interface`, right state
/// otherwise, including a node sitting exactly on the interface.
pub fn sod_field(mesh: &CartesianMesh, basis: &SpectralBasis, gas: &Gas, interface: f64) -> ConservativeField {
    let mut field = ConservativeField::zeros(mesh, basis);
    let npe = field.nodes_per_element();
    for e in 0..mesh.n_elements() {
        for k in 0..npe {
            let x = node_position(mesh, basis, e, k)[0];
            let (rho, u, p) = if x < interface { SOD_LEFT } else { SOD_RIGHT };
            field.element_mut(e)[k] = gas.conserved(rho, [u, 0.0], p);
        }
    }
    field
}

/// Isentropic vortex on a uniform background `rho = p = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsentropicVortex {
    pub strength: f64,
    pub center: [f64; 2],
    pub velocity: [f64; 2],
}

impl Default for IsentropicVortex {
    fn default() -> Self {
        Self {
            strength: 5.0,
            center: [0.0, 0.0],
            velocity: [1.0, 1.0],
        }
    }
}

impl IsentropicVortex {
    /// Exact solution at time `t` on the periodic box `[lower, upper]`; the
    /// nearest periodic image of the centre is used.
    pub fn state(&self, gas: &Gas, x: [f64; 2], t: f64, lower: [f64; 2], upper: [f64; 2]) -> Conserved {
        let g = gas.gamma;
        let mut r = [0.0; 2];
        for d in 0..2 {
            let len = upper[d] - lower[d];
            let c = self.center[d] + self.velocity[d] * t;
            let mut dx = (x[d] - c).rem_euclid(len);
            if dx > 0.5 * len {
                dx -= len;
            }
            r[d] = dx;
        }
        let r2 = r[0] * r[0] + r[1] * r[1];
        let b = self.strength;
        let f = (0.5 * (1.0 - r2)).exp() * b / (2.0 * std::f64::consts::PI);
        let temp = 1.0 - (g - 1.0) * b * b / (8.0 * g * std::f64::consts::PI.powi(2)) * (1.0 - r2).exp();
        let rho = temp.powf(1.0 / (g - 1.0));
        let p = rho.powf(g);
        gas.conserved(rho, [self.velocity[0] - f * r[1], self.velocity[1] + f * r[0]], p)
    }

    pub fn field(&self, mesh: &CartesianMesh, basis: &SpectralBasis, gas: &Gas, t: f64) -> ConservativeField {
        ConservativeField::from_fn(mesh, basis, |x| self.state(gas, x, t, mesh.lower(), mesh.upper()))
    }
}

pub fn build_mesh(config: &RunConfig) -> Result<CartesianMesh, SolverError> {
    let m = &config.mesh;
    CartesianMesh::new(m.dims, m.elements, m.lower, m.upper, m.periodic)
}

pub fn blending_mode(config: &RunConfig, n_elements: usize) -> BlendingMode {
    let b = &config.blending;
    if let Some(a) = b.fixed_alpha {
        return BlendingMode::Fixed(vec![a; n_elements]);
    }
    if !b.enabled {
        return BlendingMode::Off;
    }
    BlendingMode::Indicator(BlendingParams {
        sharpness: b.sharpness,
        alpha_min: b.alpha_min,
        alpha_max: b.alpha_max,
        propagate: b.propagate,
        variable: b.variable,
    })
}

/// Initial field of a flow case.
pub fn initial_field(config: &RunConfig, mesh: &CartesianMesh, basis: &SpectralBasis) -> Result<ConservativeField, SolverError> {
    let gas = &config.gas;
    match config.case {
        CaseId::Freestream | CaseId::Scaling => Ok(freestream_field(mesh, basis, gas)),
        CaseId::Sod => Ok(sod_field(mesh, basis, gas, SOD_INTERFACE)),
        CaseId::Vortex => Ok(IsentropicVortex::default().field(mesh, basis, gas, 0.0)),
        CaseId::WallSweep => Err(SolverError::Setup("the wall-sweep case has no flow field".into())),
    }
}

pub fn build_solver(config: &RunConfig) -> Result<HybridSolver, SolverError> {
    let mesh = build_mesh(config)?;
    let basis = SpectralBasis::new(config.degree)?;
    let field = initial_field(config, &mesh, &basis)?;
    let mode = blending_mode(config, mesh.n_elements());
    HybridSolver::new(SpatialOperator::new(basis, mesh, config.gas), mode, field)
}

pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, SolverError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| SolverError::Setup(format!("cannot start thread pool: {e}")))
}

/// Peak and final blending activity over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlendingSummary {
    pub peak_max_alpha: f64,
    pub peak_active_elements: usize,
    pub final_max_alpha: f64,
    pub final_active_elements: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub solver: HybridSolver,
    /// Step 0 (initial state) followed by one row per step.
    pub diagnostics: Vec<StepDiagnostics>,
    pub summary: BlendingSummary,
    pub perf: PerfRecord,
}

/// Runs a flow case `config.repeats` times and returns the last run; the
/// timing covers the time loop only.
pub fn run_case(config: &RunConfig) -> Result<RunOutput, SolverError> {
    let pool = thread_pool(config.threads)?;
    let cores = pool.current_num_threads();
    pool.install(|| {
        let mut wall_clocks = Vec::with_capacity(config.repeats);
        let mut last = None;
        for _ in 0..config.repeats {
            let (output, elapsed) = run_once(config)?;
            wall_clocks.push(elapsed.as_secs_f64());
            last = Some(output);
        }
        let (solver, diagnostics, summary) = last.expect("at least one repeat");
        let field = solver.field();
        let perf = PerfRecord {
            case: config.case.name().to_string(),
            n_elements: field.n_elements(),
            degree: config.degree,
            dof_points: field.dof_points(),
            dof_variables: field.dof_variables(),
            cores,
            steps: solver.steps(),
            rk_stages: RK_STAGES,
            wall_clocks,
        };
        Ok(RunOutput {
            solver,
            diagnostics,
            summary,
            perf,
        })
    })
}

type RunParts = (HybridSolver, Vec<StepDiagnostics>, BlendingSummary);

fn run_once(config: &RunConfig) -> Result<(RunParts, Duration), SolverError> {
    let mut solver = build_solver(config)?;
    let mut diagnostics = vec![solver.diagnostics(0.0)];
    let mut summary = BlendingSummary::default();
    let mut elapsed = Duration::ZERO;
    loop {
        let t0 = Instant::now();
        let dt = match config.time.stop {
            StopRule::Steps(n) if solver.steps() >= n => None,
            StopRule::Steps(_) => Some(config.time.dt.unwrap_or_else(|| solver.stable_dt(config.time.cfl))),
            StopRule::EndTime(t_end) => {
                let remaining = t_end - solver.time();
                if remaining <= 1e-12 * t_end {
                    None
                } else {
                    let dt = config.time.dt.unwrap_or_else(|| solver.stable_dt(config.time.cfl));
                    Some(dt.min(remaining))
                }
            }
        };
        let Some(dt) = dt else { break };
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SolverError::Setup(format!("time step estimate {dt} at t = {}", solver.time())));
        }
        solver.step(dt)?;
        elapsed += t0.elapsed();
        let d = solver.diagnostics(dt);
        summary.peak_max_alpha = summary.peak_max_alpha.max(d.max_alpha);
        summary.peak_active_elements = summary.peak_active_elements.max(d.active_elements);
        summary.final_max_alpha = d.max_alpha;
        summary.final_active_elements = d.active_elements;
        diagnostics.push(d);
    }
    Ok(((solver, diagnostics, summary), elapsed))
}

/// One sample of the wall-model sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub y_plus: f64,
    /// Incompressible Spalding velocity.
    pub u_plus: f64,
    /// Compressible velocity whose freestream-form transform is `u_plus`.
    pub u_plus_van_driest: f64,
    /// Same through the edge form; `None` where the temperature ratio leaves
    /// the transform's domain.
    pub u_plus_edge: Option<f64>,
}

/// `T_aw / T_e` consistent with the freestream coefficient `b`.
pub fn matched_recovery_ratio(ma: f64, gamma: f64, prandtl: f64) -> f64 {
    1.0 + 0.5 * (gamma - 1.0) * ma * ma * prandtl.cbrt()
}

/// Samples the three wall-law variants on log-spaced `y+`.
///
/// Velocities are in viscous units with edge velocity `u_inf_plus`; the
/// compressible columns invert the respective transform of the Spalding
/// velocity.
pub fn wall_sweep(w: &WallSweepConfig, gas: &Gas) -> Result<Vec<SweepRow>, WallModelError> {
    let ratio = match w.edge_recovery {
        EdgeRecovery::Matched => matched_recovery_ratio(w.ma_inf, gas.gamma, gas.prandtl),
        EdgeRecovery::Printed => wall::recovery_ratio(w.ma_inf, gas.gamma, gas.prandtl),
    };
    // edge form: u_eq = u_e / a asin(a u / u_e), inverted as for the freestream form
    let edge_a = (ratio >= 1.0).then(|| (1.0 - 1.0 / ratio).sqrt());
    let (lo, hi) = (w.y_plus_min.ln(), w.y_plus_max.ln());
    let n = w.points;
    (0..n)
        .map(|i| {
            let y_plus = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
            let u_plus = wall::spalding_u_plus(y_plus)?;
            let u_plus_van_driest = wall::van_driest_inverse(u_plus, w.u_inf_plus, w.ma_inf, gas.gamma, gas.prandtl);
            let u_plus_edge = edge_a.map(|a| {
                if a < 1e-6 {
                    u_plus
                } else {
                    w.u_inf_plus / a * (a * u_plus / w.u_inf_plus).sin()
                }
            });
            Ok(SweepRow {
                y_plus,
                u_plus,
                u_plus_van_driest,
                u_plus_edge,
            })
        })
        .collect()
}

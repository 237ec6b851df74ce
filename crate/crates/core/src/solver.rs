//! Time loop of the hybrid scheme: blending refresh, operator evaluation and
//! low-storage RK stepping.

use crate::blending::{BlendingParams, BlendingState};
use crate::error::SolverError;
use crate::field::ConservativeField;
use crate::operator::SpatialOperator;
use crate::physics::Conserved;
use crate::timestep::{LowStorageRk, RK_STAGES};

/// How the per-element FV weights are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum BlendingMode {
    /// Pure DG everywhere.
    Off,
    /// Modal indicator, recomputed before every stage.
    Indicator(BlendingParams),
    /// Prescribed weights, constant in time.
    Fixed(Vec<f64>),
}

/// Scalars recorded after each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub totals: Conserved,
    pub max_alpha: f64,
    pub active_elements: usize,
}

#[derive(Debug, Clone)]
pub struct HybridSolver {
    op: SpatialOperator,
    mode: BlendingMode,
    field: ConservativeField,
    rk: LowStorageRk,
    blending: BlendingState,
    time: f64,
    steps: usize,
    rhs_evaluations: usize,
}

impl HybridSolver {
    pub fn new(op: SpatialOperator, mode: BlendingMode, field: ConservativeField) -> Result<Self, SolverError> {
        let n_elem = op.mesh().n_elements();
        if let BlendingMode::Fixed(alpha) = &mode {
            if alpha.len() != n_elem {
                return Err(SolverError::Setup(format!(
                    "{} fixed blending weights for {n_elem} elements",
                    alpha.len()
                )));
            }
            if let Some(a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                return Err(SolverError::Setup(format!("blending weight {a} outside [0, 1]")));
            }
        }
        if matches!(mode, BlendingMode::Indicator(_)) && op.basis().degree() == 0 {
            return Err(SolverError::Setup("the modal indicator needs degree >= 1".into()));
        }
        op.validate(&field)?;
        let blending = evaluate_blending(&op, &mode, &field);
        Ok(Self {
            rk: LowStorageRk::new(&field),
            op,
            mode,
            field,
            blending,
            time: 0.0,
            steps: 0,
            rhs_evaluations: 0,
        })
    }

    pub fn operator(&self) -> &SpatialOperator {
        &self.op
    }

    pub fn field(&self) -> &ConservativeField {
        &self.field
    }

    pub fn into_field(self) -> ConservativeField {
        self.field
    }

    /// Blending weights used in the most recent stage.
    pub fn blending(&self) -> &BlendingState {
        &self.blending
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rhs_evaluations(&self) -> usize {
        self.rhs_evaluations
    }

    pub fn stable_dt(&self, cfl: f64) -> f64 {
        self.op.stable_dt(&self.field, cfl)
    }

    pub fn totals(&self) -> Conserved {
        self.field.totals(self.op.mesh(), self.op.basis())
    }

    /// One RK step of size `dt`; blending is refreshed before every stage.
    pub fn step(&mut self, dt: f64) -> Result<(), SolverError> {
        let step_no = self.steps + 1;
        let wrap = |e: SolverError| SolverError::Step {
            step: step_no,
            source: Box::new(e),
        };
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(wrap(SolverError::Setup(format!("time step {dt} is not positive"))));
        }
        let Self {
            op,
            mode,
            field,
            rk,
            blending,
            rhs_evaluations,
            ..
        } = self;
        rk.step(field, dt, |state, out, _stage| {
            *blending = evaluate_blending(op, mode, state);
            *rhs_evaluations += 1;
            op.hybrid_rhs_into(state, &blending.alpha, out)
        })
        .map_err(wrap)?;
        self.op.validate(&self.field).map_err(|e| {
            wrap(SolverError::Stage {
                stage: RK_STAGES,
                source: Box::new(e),
            })
        })?;
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    pub fn diagnostics(&self, dt: f64) -> StepDiagnostics {
        StepDiagnostics {
            step: self.steps,
            time: self.time,
            dt,
            totals: self.totals(),
            max_alpha: self.blending.max_alpha(),
            active_elements: self.blending.active_elements(),
        }
    }
}

fn evaluate_blending(op: &SpatialOperator, mode: &BlendingMode, field: &ConservativeField) -> BlendingState {
    let n_elem = op.mesh().n_elements();
    let degree = op.basis().degree();
    match mode {
        BlendingMode::Off => BlendingState::zeros(n_elem, degree),
        BlendingMode::Indicator(params) => op.compute_blending(field, params),
        BlendingMode::Fixed(alpha) => {
            let mut state = BlendingState::zeros(n_elem, degree);
            state.alpha.clone_from(alpha);
            state
        }
    }
}

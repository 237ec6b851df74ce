use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("LGL node {node} of degree {degree} did not converge within 100 Newton steps")]
    NodeIteration { degree: usize, node: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("non-physical state: density {rho}, pressure {pressure}")]
    NonPhysical { rho: f64, pressure: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("non-physical state in element {element}, node {node}: density {rho}, pressure {pressure}")]
    InvalidState {
        element: usize,
        node: usize,
        rho: f64,
        pressure: f64,
    },
    #[error("RK stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<SolverError>,
    },
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<SolverError>,
    },
    #[error("invalid setup: {0}")]
    Setup(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WallModelError {
    #[error("u+ = {u_plus} overflows the exponential in Spalding's law")]
    Range { u_plus: f64 },
    #[error("transform argument {argument} outside arcsin domain [0, 1]")]
    Domain { argument: f64 },
    #[error("invalid wall-model input: {0}")]
    Input(String),
    #[error("wall-stress iteration did not converge after {iterations} iterations, bracket [{lo}, {hi}]")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("invalid performance record: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

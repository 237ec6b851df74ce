//! Modal troubled-cell indicator and the DG/FV blending coefficient.
//!
//! Per element, a nodal indicator quantity is projected onto Legendre modes,
//! the share of energy in the highest modes gives `E`, and a logistic map
//! centred on the degree-dependent threshold `T(N)` turns it into the FV
//! weight `alpha`. The raw weights are then capped, spread to face neighbours
//! at half strength and finally zeroed below the floor.

use crate::basis::SpectralBasis;
use crate::mesh::CartesianMesh;
use crate::physics::{Conserved, Gas};

/// `ln(9999)`: puts `alpha(E = 0)` at exactly `1e-4`.
pub const DEFAULT_SHARPNESS: f64 = 9.210_240_366_975_85;
pub const DEFAULT_ALPHA_MIN: f64 = 0.01;
pub const DEFAULT_ALPHA_MAX: f64 = 0.7;

/// Nodal quantity fed to the modal indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndicatorVariable {
    #[default]
    DensityPressure,
    Density,
    Pressure,
}

impl IndicatorVariable {
    #[inline]
    pub fn evaluate(self, gas: &Gas, u: &Conserved) -> f64 {
        match self {
            IndicatorVariable::DensityPressure => u[0] * gas.pressure(u),
            IndicatorVariable::Density => u[0],
            IndicatorVariable::Pressure => gas.pressure(u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendingParams {
    pub sharpness: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub propagate: bool,
    pub variable: IndicatorVariable,
}

impl Default for BlendingParams {
    fn default() -> Self {
        Self {
            sharpness: DEFAULT_SHARPNESS,
            alpha_min: DEFAULT_ALPHA_MIN,
            alpha_max: DEFAULT_ALPHA_MAX,
            propagate: true,
            variable: IndicatorVariable::DensityPressure,
        }
    }
}

/// Per-element blending weights together with the indicator data that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendingState {
    pub alpha: Vec<f64>,
    pub energy: Vec<f64>,
    pub threshold: f64,
    pub sharpness: f64,
}

impl BlendingState {
    /// Pure DG everywhere.
    pub fn zeros(n_elements: usize, degree: usize) -> Self {
        Self {
            alpha: vec![0.0; n_elements],
            energy: vec![0.0; n_elements],
            threshold: threshold(degree),
            sharpness: DEFAULT_SHARPNESS,
        }
    }

    pub fn max_alpha(&self) -> f64 {
        self.alpha.iter().copied().fold(0.0, f64::max)
    }

    pub fn active_elements(&self) -> usize {
        self.alpha.iter().filter(|&&a| a > 0.0).count()
    }
}

/// Indicator threshold `T(N) = 0.5 * 10^(-1.8 (N+1)^0.25)`.
pub fn threshold(degree: usize) -> f64 {
    0.5 * 10f64.powf(-1.8 * ((degree + 1) as f64).powf(0.25))
}

/// Raw blending coefficient `1 / (1 + exp(-s/T (E - T)))`.
pub fn blending_coefficient(energy: f64, degree: usize, sharpness: f64) -> f64 {
    let t = threshold(degree);
    1.0 / (1.0 + (-sharpness / t * (energy - t)).exp())
}

/// Highest-mode energy share of one line of nodal values.
fn line_energy(basis: &SpectralBasis, values: &[f64], modes: &mut [f64]) -> f64 {
    let n = basis.degree();
    if n == 0 {
        return 0.0;
    }
    if values.iter().all(|&v| v == values[0]) {
        return 0.0;
    }
    basis.nodal_to_modal_into(values, modes);
    let mut cumulative = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    for m in modes.iter() {
        acc += m * m;
        cumulative.push(acc);
    }
    // j = 0 would always report 1, so the lower candidate is clamped to mode 1
    let lower = n.saturating_sub(1).max(1);
    let mut energy: f64 = 0.0;
    for j in lower..=n {
        if cumulative[j] > 0.0 {
            energy = energy.max(modes[j] * modes[j] / cumulative[j]);
        }
    }
    energy.clamp(0.0, 1.0)
}

/// Modal indicator energy `E` of one element.
///
/// In 2D every x-line and every y-line of nodes is analysed separately and
/// the maximum is taken.
pub fn indicator_energy(
    basis: &SpectralBasis,
    element: &[Conserved],
    dims: usize,
    gas: &Gas,
    variable: IndicatorVariable,
) -> f64 {
    let q: Vec<f64> = element.iter().map(|u| variable.evaluate(gas, u)).collect();
    indicator_energy_scalar(basis, &q, dims)
}

/// [`indicator_energy`] on an already evaluated scalar nodal field.
pub fn indicator_energy_scalar(basis: &SpectralBasis, q: &[f64], dims: usize) -> f64 {
    let np = basis.len();
    let mut modes = vec![0.0; np];
    if dims == 1 {
        return line_energy(basis, q, &mut modes);
    }
    let mut line = vec![0.0; np];
    let mut energy: f64 = 0.0;
    for j in 0..np {
        line.copy_from_slice(&q[j * np..(j + 1) * np]);
        energy = energy.max(line_energy(basis, &line, &mut modes));
    }
    for i in 0..np {
        for (j, l) in line.iter_mut().enumerate() {
            *l = q[i + j * np];
        }
        energy = energy.max(line_energy(basis, &line, &mut modes));
    }
    energy
}

/// Cap at `alpha_max`, one neighbour pass at half strength using the capped
/// values, then zero everything below `alpha_min`.
pub fn clip_and_propagate(raw: &[f64], mesh: &CartesianMesh, params: &BlendingParams) -> Vec<f64> {
    let capped: Vec<f64> = raw.iter().map(|&a| a.min(params.alpha_max)).collect();
    let mut alpha = capped.clone();
    if params.propagate {
        for (e, a) in alpha.iter_mut().enumerate() {
            let spread = mesh
                .neighbors(e)
                .iter()
                .flatten()
                .map(|&nb| 0.5 * capped[nb])
                .fold(0.0, f64::max);
            *a = a.max(spread);
        }
    }
    for a in alpha.iter_mut() {
        if *a < params.alpha_min {
            *a = 0.0;
        }
    }
    alpha
}

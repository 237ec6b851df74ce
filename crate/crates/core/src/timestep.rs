//! Five-stage, fourth-order low-storage Runge–Kutta (Carpenter & Kennedy,
//! 2N-storage form).

use crate::error::SolverError;
use crate::field::ConservativeField;
use crate::physics::NVAR;

pub const RK_STAGES: usize = 5;

const RK_A: [f64; RK_STAGES] = [
    0.0,
    -567_301_805_773.0 / 1_357_537_059_087.0,
    -2_404_267_990_393.0 / 2_016_746_695_238.0,
    -3_550_918_686_646.0 / 2_091_501_179_385.0,
    -1_275_806_237_668.0 / 842_570_457_699.0,
];

const RK_B: [f64; RK_STAGES] = [
    1_432_997_174_477.0 / 9_575_080_441_755.0,
    5_161_836_677_717.0 / 13_612_068_292_357.0,
    1_720_146_321_549.0 / 2_090_206_949_498.0,
    3_134_564_353_537.0 / 4_481_467_310_338.0,
    2_277_821_191_437.0 / 14_882_151_754_819.0,
];

/// Stage abscissae, kept for time-dependent right-hand sides.
pub const RK_C: [f64; RK_STAGES] = [
    0.0,
    1_432_997_174_477.0 / 9_575_080_441_755.0,
    2_526_269_341_429.0 / 6_820_363_962_896.0,
    2_006_345_519_317.0 / 3_224_310_063_776.0,
    2_802_321_613_138.0 / 2_924_317_926_251.0,
];

/// Register pair of the 2N-storage scheme.
#[derive(Debug, Clone)]
pub struct LowStorageRk {
    residual: ConservativeField,
    rhs: ConservativeField,
}

impl LowStorageRk {
    pub fn new(template: &ConservativeField) -> Self {
        let mut residual = template.clone();
        residual.as_mut_slice().iter_mut().for_each(|u| *u = [0.0; NVAR]);
        Self {
            rhs: residual.clone(),
            residual,
        }
    }

    /// Advances `state` by `dt`.
    ///
    /// `rhs(state, out, stage)` must fill `out` with the time derivative of
    /// `state`; the stage index (0-based) is passed so callers can refresh
    /// stage-dependent data such as blending weights. Errors are tagged with
    /// the 1-based stage number.
    pub fn step<F>(&mut self, state: &mut ConservativeField, dt: f64, mut rhs: F) -> Result<(), SolverError>
    where
        F: FnMut(&ConservativeField, &mut ConservativeField, usize) -> Result<(), SolverError>,
    {
        for stage in 0..RK_STAGES {
            rhs(state, &mut self.rhs, stage).map_err(|e| SolverError::Stage {
                stage: stage + 1,
                source: Box::new(e),
            })?;
            let a = RK_A[stage];
            let b = RK_B[stage];
            for ((u, r), k) in state
                .as_mut_slice()
                .iter_mut()
                .zip(self.residual.as_mut_slice())
                .zip(self.rhs.as_slice())
            {
                for v in 0..NVAR {
                    r[v] = a * r[v] + dt * k[v];
                    u[v] += b * r[v];
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SpectralBasis;
    use crate::mesh::CartesianMesh;

    fn scalar_field(value: f64) -> ConservativeField {
        let mesh = CartesianMesh::new_1d(1, 0.0, 1.0, true).unwrap();
        let basis = SpectralBasis::new(0).unwrap();
        ConservativeField::from_fn(&mesh, &basis, |_| [value, value, value, value])
    }

    #[test]
    fn coefficients_are_consistent() {
        // du/dt = 1 must be integrated exactly
        let mut t = scalar_field(0.0);
        let mut rk = LowStorageRk::new(&t);
        rk.step(&mut t, 0.37, |_, out, _| {
            out.as_mut_slice()[0] = [1.0; NVAR];
            Ok(())
        })
        .unwrap();
        assert!((t.as_slice()[0][0] - 0.37).abs() < 1e-15);
    }

    #[test]
    fn stage_abscissae_match_clock() {
        let mut t = scalar_field(0.0);
        let mut rk = LowStorageRk::new(&t);
        let mut seen = Vec::new();
        rk.step(&mut t, 1.0, |s, out, stage| {
            seen.push((stage, s.as_slice()[0][0]));
            out.as_mut_slice()[0] = [1.0; NVAR];
            Ok(())
        })
        .unwrap();
        for (stage, time) in seen {
            assert!((time - RK_C[stage]).abs() < 1e-14, "stage {stage}: {time}");
        }
    }

    fn decay_error(dt: f64) -> f64 {
        let mut u = scalar_field(1.0);
        let mut rk = LowStorageRk::new(&u);
        let steps = (1.0 / dt).round() as usize;
        for _ in 0..steps {
            rk.step(&mut u, dt, |s, out, _| {
                for (o, v) in out.as_mut_slice().iter_mut().zip(s.as_slice()) {
                    for k in 0..NVAR {
                        o[k] = -2.0 * v[k];
                    }
                }
                Ok(())
            })
            .unwrap();
        }
        (u.as_slice()[0][0] - (-2.0f64).exp()).abs()
    }

    #[test]
    fn fourth_order_convergence() {
        let errors: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&dt| decay_error(dt)).collect();
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(order > 3.8 && order < 4.3, "observed order {order}, errors {errors:?}");
        }
    }

    #[test]
    fn errors_carry_stage_number() {
        let mut u = scalar_field(1.0);
        let mut rk = LowStorageRk::new(&u);
        let err = rk
            .step(&mut u, 0.1, |_, _, stage| {
                if stage == 2 {
                    Err(SolverError::Setup("boom".into()))
                } else {
                    Ok(())
                }
            })
            .unwrap_err();
        assert!(matches!(err, SolverError::Stage { stage: 3, .. }));
    }
}

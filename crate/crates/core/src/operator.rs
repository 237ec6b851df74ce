//! Semi-discrete operators: split-form DGSEM, first-order FV on LGL subcells,
//! and their element-wise convex blend.
//!
//! Both operators share the same Rusanov flux on element faces, so the blend
//! only changes the volume contribution. Every evaluation runs in two phases:
//! face fluxes are computed from a read-only snapshot of the field, then each
//! element is updated independently. Per-element arithmetic is fixed, so the
//! result does not depend on the number of worker threads.

use rayon::prelude::*;

use crate::basis::SpectralBasis;
use crate::blending::{blending_coefficient, clip_and_propagate, indicator_energy, BlendingParams, BlendingState};
use crate::error::SolverError;
use crate::field::ConservativeField;
use crate::mesh::CartesianMesh;
use crate::physics::{flux_from_primitive, two_point_flux, Axis, Conserved, Gas, Primitive, NVAR};

/// Largest polynomial degree the line kernels are sized for.
pub const MAX_DEGREE: usize = 31;

/// Which parts of the hybrid update an element needs.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Blend {
    Dg,
    Fv,
    Mixed(f64),
}

impl Blend {
    fn from_alpha(alpha: f64) -> Self {
        if alpha == 0.0 {
            Blend::Dg
        } else if alpha == 1.0 {
            Blend::Fv
        } else {
            Blend::Mixed(alpha)
        }
    }
}

/// Interface fluxes of one evaluation, laid out per axis as
/// `[line][face][face node]`, where face `f` is the lower face of element `f`
/// along that line and `f = n` closes the last element.
struct FaceFluxes {
    x: Vec<Conserved>,
    y: Vec<Conserved>,
}

/// Scratch reused across the elements handled by one worker.
struct ElementScratch {
    prim: Vec<Primitive>,
    dg: Vec<Conserved>,
    fv: Vec<Conserved>,
    line_flux: Vec<Conserved>,
}

/// Spatial discretisation on a Cartesian mesh.
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    basis: SpectralBasis,
    mesh: CartesianMesh,
    gas: Gas,
}

impl SpatialOperator {
    pub fn new(basis: SpectralBasis, mesh: CartesianMesh, gas: Gas) -> Self {
        assert!(basis.degree() <= MAX_DEGREE, "degree above {MAX_DEGREE} is not supported");
        Self { basis, mesh, gas }
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn mesh(&self) -> &CartesianMesh {
        &self.mesh
    }

    pub fn gas(&self) -> &Gas {
        &self.gas
    }

    fn nodes_per_face(&self) -> usize {
        if self.mesh.dims() == 1 {
            1
        } else {
            self.basis.len()
        }
    }

    /// Reports the first node with non-positive density or pressure.
    pub fn validate(&self, field: &ConservativeField) -> Result<(), SolverError> {
        let npe = field.nodes_per_element();
        let bad = field
            .as_slice()
            .par_iter()
            .position_first(|u| self.gas.validate(u).is_err());
        match bad {
            None => Ok(()),
            Some(idx) => {
                let u = field.as_slice()[idx];
                Err(SolverError::InvalidState {
                    element: idx / npe,
                    node: idx % npe,
                    rho: u[0],
                    pressure: if u[0] > 0.0 { self.gas.pressure(&u) } else { f64::NAN },
                })
            }
        }
    }

    /// Split-form DGSEM time derivative.
    pub fn dg_rhs(&self, field: &ConservativeField) -> Result<ConservativeField, SolverError> {
        let alpha = vec![0.0; self.mesh.n_elements()];
        let mut out = ConservativeField::zeros(&self.mesh, &self.basis);
        self.hybrid_rhs_into(field, &alpha, &mut out)?;
        Ok(out)
    }

    /// First-order subcell finite-volume time derivative.
    pub fn fv_rhs(&self, field: &ConservativeField) -> Result<ConservativeField, SolverError> {
        let alpha = vec![1.0; self.mesh.n_elements()];
        let mut out = ConservativeField::zeros(&self.mesh, &self.basis);
        self.hybrid_rhs_into(field, &alpha, &mut out)?;
        Ok(out)
    }

    /// `alpha * FV + (1 - alpha) * DG`, element by element.
    pub fn hybrid_rhs(&self, field: &ConservativeField, alpha: &[f64]) -> Result<ConservativeField, SolverError> {
        let mut out = ConservativeField::zeros(&self.mesh, &self.basis);
        self.hybrid_rhs_into(field, alpha, &mut out)?;
        Ok(out)
    }

    /// Allocation-light form of [`Self::hybrid_rhs`] writing into `out`.
    pub fn hybrid_rhs_into(
        &self,
        field: &ConservativeField,
        alpha: &[f64],
        out: &mut ConservativeField,
    ) -> Result<(), SolverError> {
        assert_eq!(alpha.len(), self.mesh.n_elements(), "one alpha per element");
        assert_eq!(field.nodes_per_axis(), self.basis.len(), "field degree does not match basis");
        self.validate(field)?;
        let faces = self.face_fluxes(field);
        let npe = field.nodes_per_element();
        let np = self.basis.len();
        out.as_mut_slice()
            .par_chunks_mut(npe)
            .enumerate()
            .for_each_init(
                || ElementScratch {
                    prim: Vec::with_capacity(npe),
                    dg: vec![[0.0; NVAR]; npe],
                    fv: vec![[0.0; NVAR]; npe],
                    line_flux: vec![[0.0; NVAR]; np + 1],
                },
                |scratch, (e, out_e)| {
                    self.element_rhs(field.element(e), e, &faces, Blend::from_alpha(alpha[e]), scratch, out_e);
                },
            );
        Ok(())
    }

    /// Indicator pass followed by capping, propagation and the floor.
    pub fn compute_blending(&self, field: &ConservativeField, params: &BlendingParams) -> BlendingState {
        let n = self.basis.degree();
        let dims = self.mesh.dims();
        let (energy, raw): (Vec<f64>, Vec<f64>) = (0..self.mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let en = indicator_energy(&self.basis, field.element(e), dims, &self.gas, params.variable);
                (en, blending_coefficient(en, n, params.sharpness))
            })
            .unzip();
        let alpha = clip_and_propagate(&raw, &self.mesh, params);
        BlendingState {
            alpha,
            energy,
            threshold: crate::blending::threshold(n),
            sharpness: params.sharpness,
        }
    }

    /// Explicit time step `cfl / max_nodes sum_d (|u_d| + c) / dx_min_d`,
    /// with `dx_min_d` the smallest physical LGL spacing along axis `d`.
    pub fn stable_dt(&self, field: &ConservativeField, cfl: f64) -> f64 {
        let dims = self.mesh.dims();
        let spacing: Vec<f64> = (0..dims)
            .map(|d| 0.5 * self.mesh.element_size(d) * self.basis.min_spacing())
            .collect();
        let rate = field
            .as_slice()
            .par_iter()
            .map(|u| {
                (0..dims)
                    .map(|d| self.gas.max_wave_speed(u, Axis::from_index(d)) / spacing[d])
                    .sum::<f64>()
            })
            .reduce(|| 0.0, f64::max);
        cfl / rate
    }

    fn face_fluxes(&self, field: &ConservativeField) -> FaceFluxes {
        let [nx, ny] = self.mesh.counts();
        let periodic = self.mesh.periodic();
        let np = self.basis.len();
        let n = np - 1;
        let nfp = self.nodes_per_face();
        let gas = &self.gas;

        let mut x = vec![[0.0; NVAR]; ny * (nx + 1) * nfp];
        x.par_chunks_mut(nfp).enumerate().for_each(|(idx, chunk)| {
            let iy = idx / (nx + 1);
            let f = idx % (nx + 1);
            let left_elem = if f > 0 {
                Some(f - 1)
            } else if periodic[0] {
                Some(nx - 1)
            } else {
                None
            };
            let right_elem = if f < nx {
                Some(f)
            } else if periodic[0] {
                Some(0)
            } else {
                None
            };
            for (t, out) in chunk.iter_mut().enumerate() {
                let left = left_elem.map(|ix| field.element(ix + nx * iy)[n + np * t]);
                let right = right_elem.map(|ix| field.element(ix + nx * iy)[np * t]);
                *out = interface_flux(gas, left, right, Axis::X);
            }
        });

        let mut y = Vec::new();
        if self.mesh.dims() == 2 {
            y = vec![[0.0; NVAR]; nx * (ny + 1) * nfp];
            y.par_chunks_mut(nfp).enumerate().for_each(|(idx, chunk)| {
                let ix = idx / (ny + 1);
                let f = idx % (ny + 1);
                let lower_elem = if f > 0 {
                    Some(f - 1)
                } else if periodic[1] {
                    Some(ny - 1)
                } else {
                    None
                };
                let upper_elem = if f < ny {
                    Some(f)
                } else if periodic[1] {
                    Some(0)
                } else {
                    None
                };
                for (t, out) in chunk.iter_mut().enumerate() {
                    let lower = lower_elem.map(|iy| field.element(ix + nx * iy)[t + np * n]);
                    let upper = upper_elem.map(|iy| field.element(ix + nx * iy)[t]);
                    *out = interface_flux(gas, lower, upper, Axis::Y);
                }
            });
        }
        FaceFluxes { x, y }
    }

    fn element_rhs(
        &self,
        u: &[Conserved],
        e: usize,
        faces: &FaceFluxes,
        blend: Blend,
        scratch: &mut ElementScratch,
        out: &mut [Conserved],
    ) {
        let dims = self.mesh.dims();
        let np = self.basis.len();
        let [nx, ny] = self.mesh.counts();
        let [ix, iy] = self.mesh.element_coords(e);
        let nfp = self.nodes_per_face();

        scratch.prim.clear();
        scratch.prim.extend(u.iter().map(|s| self.gas.primitive_unchecked(s)));

        let need_dg = !matches!(blend, Blend::Fv);
        let need_fv = !matches!(blend, Blend::Dg);
        for v in scratch.dg.iter_mut() {
            *v = [0.0; NVAR];
        }
        for v in scratch.fv.iter_mut() {
            *v = [0.0; NVAR];
        }

        for d in 0..dims {
            let axis = Axis::from_index(d);
            let inv_jac = 2.0 / self.mesh.element_size(d);
            let (line_count, stride, line_stride) = if d == 0 { (if dims == 1 { 1 } else { np }, 1, np) } else { (np, np, 1) };
            for line in 0..line_count {
                let base = line * line_stride;
                // face fluxes for this line: lower face of this element, upper face
                let (lower_flux, upper_flux) = if d == 0 {
                    let row = iy * (nx + 1);
                    (
                        faces.x[(row + ix) * nfp + line],
                        faces.x[(row + ix + 1) * nfp + line],
                    )
                } else {
                    let col = ix * (ny + 1);
                    (
                        faces.y[(col + iy) * nfp + line],
                        faces.y[(col + iy + 1) * nfp + line],
                    )
                };
                if need_dg {
                    self.dg_line(u, &scratch.prim, base, stride, axis, inv_jac, lower_flux, upper_flux, &mut scratch.dg);
                }
                if need_fv {
                    self.fv_line(u, base, stride, axis, inv_jac, lower_flux, upper_flux, &mut scratch.line_flux, &mut scratch.fv);
                }
            }
        }

        match blend {
            Blend::Dg => out.copy_from_slice(&scratch.dg),
            Blend::Fv => out.copy_from_slice(&scratch.fv),
            Blend::Mixed(a) => {
                for ((o, dg), fv) in out.iter_mut().zip(&scratch.dg).zip(&scratch.fv) {
                    for k in 0..NVAR {
                        o[k] = a * fv[k] + (1.0 - a) * dg[k];
                    }
                }
            }
        }
    }

    /// Flux-differencing volume term plus SBP surface correction along one
    /// line of nodes, accumulated into `acc` with the sign of a time derivative.
    #[allow(clippy::too_many_arguments)]
    fn dg_line(
        &self,
        u: &[Conserved],
        prim: &[Primitive],
        base: usize,
        stride: usize,
        axis: Axis,
        inv_jac: f64,
        lower_flux: Conserved,
        upper_flux: Conserved,
        acc: &mut [Conserved],
    ) {
        let np = self.basis.len();
        let n = np - 1;
        let w = self.basis.weights();
        let mut local = [[0.0; NVAR]; MAX_DEGREE + 1];
        let local = &mut local[..np];
        for a in 0..np {
            let ka = base + a * stride;
            let fa = flux_from_primitive(&u[ka], &prim[ka], axis);
            let daa = 2.0 * self.basis.diff(a, a);
            for k in 0..NVAR {
                local[a][k] += daa * fa[k];
            }
            for b in a + 1..np {
                let kb = base + b * stride;
                let f = two_point_flux(&prim[ka], &prim[kb], axis);
                let dab = 2.0 * self.basis.diff(a, b);
                let dba = 2.0 * self.basis.diff(b, a);
                for k in 0..NVAR {
                    local[a][k] += dab * f[k];
                    local[b][k] += dba * f[k];
                }
            }
        }
        let k0 = base;
        let kn = base + n * stride;
        let f0 = flux_from_primitive(&u[k0], &prim[k0], axis);
        let fnn = flux_from_primitive(&u[kn], &prim[kn], axis);
        for k in 0..NVAR {
            local[n][k] += (upper_flux[k] - fnn[k]) / w[n];
            local[0][k] -= (lower_flux[k] - f0[k]) / w[0];
        }
        for (a, l) in local.iter().enumerate() {
            let ka = base + a * stride;
            for k in 0..NVAR {
                acc[ka][k] -= inv_jac * l[k];
            }
        }
    }

    /// First-order FV along one line of subcells whose widths are the LGL weights.
    #[allow(clippy::too_many_arguments)]
    fn fv_line(
        &self,
        u: &[Conserved],
        base: usize,
        stride: usize,
        axis: Axis,
        inv_jac: f64,
        lower_flux: Conserved,
        upper_flux: Conserved,
        fluxes: &mut [Conserved],
        acc: &mut [Conserved],
    ) {
        let np = self.basis.len();
        let w = self.basis.weights();
        fluxes[0] = lower_flux;
        fluxes[np] = upper_flux;
        for a in 0..np - 1 {
            let ka = base + a * stride;
            let kb = ka + stride;
            fluxes[a + 1] = self.gas.rusanov_unchecked(&u[ka], &u[kb], axis);
        }
        for a in 0..np {
            let ka = base + a * stride;
            let scale = inv_jac / w[a];
            for k in 0..NVAR {
                acc[ka][k] -= scale * (fluxes[a + 1][k] - fluxes[a][k]);
            }
        }
    }
}

/// Rusanov flux between two face states; a missing side is an open
/// (zero-gradient) boundary and takes the physical flux of the other side.
fn interface_flux(gas: &Gas, left: Option<Conserved>, right: Option<Conserved>, axis: Axis) -> Conserved {
    match (left, right) {
        (Some(l), Some(r)) => gas.rusanov_unchecked(&l, &r, axis),
        (Some(s), None) | (None, Some(s)) => gas.flux_unchecked(&s, axis),
        (None, None) => unreachable!("face without adjacent element"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn operator_1d(n_elem: usize, degree: usize, periodic: bool) -> SpatialOperator {
        SpatialOperator::new(
            SpectralBasis::new(degree).unwrap(),
            CartesianMesh::new_1d(n_elem, 0.0, 1.0, periodic).unwrap(),
            Gas::default(),
        )
    }

    fn operator_2d(n: usize, degree: usize) -> SpatialOperator {
        SpatialOperator::new(
            SpectralBasis::new(degree).unwrap(),
            CartesianMesh::new_2d([n, n + 1], [0.0, 0.0], [1.0, 2.0], [true, true]).unwrap(),
            Gas::default(),
        )
    }

    fn max_abs(f: &ConservativeField) -> f64 {
        f.as_slice().iter().flat_map(|u| u.iter()).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn smooth_2d(op: &SpatialOperator) -> ConservativeField {
        let gas = *op.gas();
        ConservativeField::from_fn(op.mesh(), op.basis(), |[x, y]| {
            let s = (2.0 * std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).cos();
            gas.conserved(1.0 + 0.2 * s, [0.3 + 0.1 * s, -0.2], 1.0 + 0.1 * s)
        })
    }

    #[test]
    fn freestream_is_preserved_by_both_operators() {
        for op in [operator_1d(5, 4, true), operator_1d(3, 3, false), operator_2d(3, 5)] {
            let gas = *op.gas();
            let state = gas.conserved(1.2, [0.7, -0.3], 0.9);
            let field = ConservativeField::from_fn(op.mesh(), op.basis(), |_| state);
            assert!(max_abs(&op.dg_rhs(&field).unwrap()) < 1e-12);
            assert!(max_abs(&op.fv_rhs(&field).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn periodic_operators_conserve() {
        let op = operator_2d(4, 3);
        let field = smooth_2d(&op);
        for rhs in [op.dg_rhs(&field).unwrap(), op.fv_rhs(&field).unwrap()] {
            let t = rhs.totals(op.mesh(), op.basis());
            for v in t {
                assert!(v.abs() < 1e-12, "{t:?}");
            }
        }
    }

    #[test]
    fn zero_alpha_is_bitwise_dg() {
        let op = operator_2d(3, 4);
        let field = smooth_2d(&op);
        let alpha = vec![0.0; op.mesh().n_elements()];
        assert_eq!(op.hybrid_rhs(&field, &alpha).unwrap(), op.dg_rhs(&field).unwrap());
    }

    #[test]
    fn single_blended_element_is_convex_combination() {
        let op = operator_2d(3, 4);
        let field = smooth_2d(&op);
        let mut alpha = vec![0.0; op.mesh().n_elements()];
        alpha[4] = 0.7;
        let hybrid = op.hybrid_rhs(&field, &alpha).unwrap();
        let dg = op.dg_rhs(&field).unwrap();
        let fv = op.fv_rhs(&field).unwrap();
        for e in 0..op.mesh().n_elements() {
            for ((h, d), f) in hybrid.element(e).iter().zip(dg.element(e)).zip(fv.element(e)) {
                for k in 0..NVAR {
                    let expected = if e == 4 { 0.7 * f[k] + (1.0 - 0.7) * d[k] } else { d[k] };
                    assert_eq!(h[k], expected);
                }
            }
        }
    }

    #[test]
    fn fv_jump_interface_carries_rusanov_flux() {
        // one element, N = 3, Sod states split between nodes 1 and 2; open ends
        let op = operator_1d(1, 3, false);
        let gas = *op.gas();
        let l = gas.conserved(1.0, [0.0, 0.0], 1.0);
        let r = gas.conserved(0.125, [0.0, 0.0], 0.1);
        let mut field = ConservativeField::zeros(op.mesh(), op.basis());
        field.element_mut(0).copy_from_slice(&[l, l, r, r]);
        let rhs = op.fv_rhs(&field).unwrap();
        let w = op.basis().weights();
        let jac = 0.5;
        let flux = gas.rusanov_flux(&l, &r, Axis::X).unwrap();
        let fl = gas.physical_flux(&l, Axis::X).unwrap();
        let fr = gas.physical_flux(&r, Axis::X).unwrap();
        for k in 0..NVAR {
            // node 1: flux in from uniform left state, out through the jump
            let n1 = -(flux[k] - fl[k]) / (jac * w[1]);
            let n2 = -(fr[k] - flux[k]) / (jac * w[2]);
            assert!((rhs.element(0)[1][k] - n1).abs() < 1e-13);
            assert!((rhs.element(0)[2][k] - n2).abs() < 1e-13);
            assert!(rhs.element(0)[0][k].abs() < 1e-13);
            assert!(rhs.element(0)[3][k].abs() < 1e-13);
        }
    }

    #[test]
    fn invalid_state_reports_location() {
        let op = operator_1d(4, 2, true);
        let gas = *op.gas();
        let mut field = ConservativeField::from_fn(op.mesh(), op.basis(), |_| gas.conserved(1.0, [0.0; 2], 1.0));
        field.element_mut(2)[1] = [1.0, 0.0, 0.0, -1.0];
        match op.dg_rhs(&field) {
            Err(SolverError::InvalidState { element, node, .. }) => assert_eq!((element, node), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let op = operator_2d(5, 5);
        let field = smooth_2d(&op);
        let alpha: Vec<f64> = (0..op.mesh().n_elements()).map(|e| (e % 3) as f64 * 0.3).collect();
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = serial.install(|| op.hybrid_rhs(&field, &alpha).unwrap());
        let b = parallel.install(|| op.hybrid_rhs(&field, &alpha).unwrap());
        assert_eq!(a, b);
    }
}

//! Nodal solution storage.

use crate::basis::SpectralBasis;
use crate::mesh::CartesianMesh;
use crate::physics::{Conserved, NVAR};

/// Conservative state at the `(N+1)^dims` LGL nodes of every element.
///
/// Nodes within an element are numbered x-fastest: `i + (N+1) * j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservativeField {
    dims: usize,
    nodes_per_axis: usize,
    nodes_per_element: usize,
    data: Vec<Conserved>,
}

impl ConservativeField {
    pub fn zeros(mesh: &CartesianMesh, basis: &SpectralBasis) -> Self {
        let dims = mesh.dims();
        let np = basis.len();
        let npe = np.pow(dims as u32);
        Self {
            dims,
            nodes_per_axis: np,
            nodes_per_element: npe,
            data: vec![[0.0; NVAR]; npe * mesh.n_elements()],
        }
    }

    /// Samples `init(x, y)` at every node.
    pub fn from_fn<F>(mesh: &CartesianMesh, basis: &SpectralBasis, mut init: F) -> Self
    where
        F: FnMut([f64; 2]) -> Conserved,
    {
        let mut field = Self::zeros(mesh, basis);
        for e in 0..mesh.n_elements() {
            for k in 0..field.nodes_per_element {
                let x = node_position(mesh, basis, e, k);
                field.data[e * field.nodes_per_element + k] = init(x);
            }
        }
        field
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn nodes_per_element(&self) -> usize {
        self.nodes_per_element
    }

    pub fn n_elements(&self) -> usize {
        self.data.len() / self.nodes_per_element
    }

    /// Solution points, the "DOF per element times elements" count.
    pub fn dof_points(&self) -> usize {
        self.data.len()
    }

    /// Solution points times the number of conserved variables of the
    /// physical system (`dims + 2`).
    pub fn dof_variables(&self) -> usize {
        self.data.len() * (self.dims + 2)
    }

    pub fn element(&self, e: usize) -> &[Conserved] {
        let n = self.nodes_per_element;
        &self.data[e * n..(e + 1) * n]
    }

    pub fn element_mut(&mut self, e: usize) -> &mut [Conserved] {
        let n = self.nodes_per_element;
        &mut self.data[e * n..(e + 1) * n]
    }

    pub fn as_slice(&self) -> &[Conserved] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Conserved] {
        &mut self.data
    }

    /// Domain integrals of the conserved variables by LGL quadrature.
    pub fn totals(&self, mesh: &CartesianMesh, basis: &SpectralBasis) -> Conserved {
        let w = basis.weights();
        let np = self.nodes_per_axis;
        let jac = mesh.element_volume() / 2f64.powi(self.dims as i32);
        let mut total = [0.0; NVAR];
        for e in 0..self.n_elements() {
            let mut local = [0.0; NVAR];
            for (k, u) in self.element(e).iter().enumerate() {
                let wk = if self.dims == 1 { w[k] } else { w[k % np] * w[k / np] };
                for v in 0..NVAR {
                    local[v] += wk * u[v];
                }
            }
            for v in 0..NVAR {
                total[v] += jac * local[v];
            }
        }
        total
    }

    /// Largest absolute componentwise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "field shapes differ");
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Physical coordinates of node `k` in element `e`.
pub fn node_position(mesh: &CartesianMesh, basis: &SpectralBasis, e: usize, k: usize) -> [f64; 2] {
    let np = basis.len();
    let origin = mesh.element_origin(e);
    let xi = basis.nodes();
    let (i, j) = if mesh.dims() == 1 { (k, 0) } else { (k % np, k / np) };
    let x = origin[0] + 0.5 * (xi[i] + 1.0) * mesh.element_size(0);
    let y = if mesh.dims() == 1 {
        0.0
    } else {
        origin[1] + 0.5 * (xi[j] + 1.0) * mesh.element_size(1)
    };
    [x, y]
}

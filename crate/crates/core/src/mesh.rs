//! Structured Cartesian meshes in one or two dimensions.

use crate::error::SolverError;

/// Uniform Cartesian mesh. Elements are numbered x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianMesh {
    dims: usize,
    counts: [usize; 2],
    lower: [f64; 2],
    upper: [f64; 2],
    periodic: [bool; 2],
    adjacency: Vec<[Option<usize>; 4]>,
}

impl CartesianMesh {
    /// One-dimensional mesh of `n` elements on `[lower, upper]`.
    pub fn new_1d(n: usize, lower: f64, upper: f64, periodic: bool) -> Result<Self, SolverError> {
        Self::new(1, [n, 1], [lower, 0.0], [upper, 1.0], [periodic, true])
    }

    /// Two-dimensional mesh of `nx * ny` elements on a rectangle.
    pub fn new_2d(
        counts: [usize; 2],
        lower: [f64; 2],
        upper: [f64; 2],
        periodic: [bool; 2],
    ) -> Result<Self, SolverError> {
        Self::new(2, counts, lower, upper, periodic)
    }

    pub fn new(
        dims: usize,
        counts: [usize; 2],
        lower: [f64; 2],
        upper: [f64; 2],
        periodic: [bool; 2],
    ) -> Result<Self, SolverError> {
        if dims != 1 && dims != 2 {
            return Err(SolverError::Setup(format!("dims must be 1 or 2, got {dims}")));
        }
        for d in 0..dims {
            if counts[d] == 0 {
                return Err(SolverError::Setup(format!("axis {d} has zero elements")));
            }
            if !(upper[d] > lower[d]) {
                return Err(SolverError::Setup(format!(
                    "axis {d} extent [{}, {}] is empty",
                    lower[d], upper[d]
                )));
            }
        }
        let counts = if dims == 1 { [counts[0], 1] } else { counts };
        let [nx, ny] = counts;
        let mut adjacency = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let step = |i: usize, n: usize, periodic: bool, forward: bool| -> Option<usize> {
                    match (forward, periodic) {
                        (false, _) if i > 0 => Some(i - 1),
                        (false, true) => Some(n - 1),
                        (true, _) if i + 1 < n => Some(i + 1),
                        (true, true) => Some(0),
                        _ => None,
                    }
                };
                let left = step(ix, nx, periodic[0], false).map(|j| j + nx * iy);
                let right = step(ix, nx, periodic[0], true).map(|j| j + nx * iy);
                let (bottom, top) = if dims == 2 {
                    (
                        step(iy, ny, periodic[1], false).map(|j| ix + nx * j),
                        step(iy, ny, periodic[1], true).map(|j| ix + nx * j),
                    )
                } else {
                    (None, None)
                };
                adjacency.push([left, right, bottom, top]);
            }
        }
        Ok(Self {
            dims,
            counts,
            lower,
            upper,
            periodic,
            adjacency,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Elements per axis; the y count is 1 in one dimension.
    pub fn counts(&self) -> [usize; 2] {
        self.counts
    }

    pub fn n_elements(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    /// Physical element size along `axis`.
    pub fn element_size(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.counts[axis] as f64
    }

    /// Element volume (length in 1D, area in 2D).
    pub fn element_volume(&self) -> f64 {
        (0..self.dims).map(|d| self.element_size(d)).product()
    }

    /// Face neighbours ordered `[-x, +x, -y, +y]`, truncated to `2 * dims`.
    /// `None` marks a non-periodic boundary.
    pub fn neighbors(&self, element: usize) -> &[Option<usize>] {
        &self.adjacency[element][..2 * self.dims]
    }

    /// Per-axis element coordinates of `element`.
    pub fn element_coords(&self, element: usize) -> [usize; 2] {
        [element % self.counts[0], element / self.counts[0]]
    }

    /// Lower-left corner of `element`.
    pub fn element_origin(&self, element: usize) -> [f64; 2] {
        let c = self.element_coords(element);
        [
            self.lower[0] + c[0] as f64 * self.element_size(0),
            self.lower[1] + c[1] as f64 * self.element_size(1),
        ]
    }

    /// Centre of `element`.
    pub fn element_center(&self, element: usize) -> [f64; 2] {
        let o = self.element_origin(element);
        [o[0] + 0.5 * self.element_size(0), o[1] + 0.5 * self.element_size(1)]
    }
}

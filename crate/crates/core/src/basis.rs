//! Legendre–Gauss–Lobatto collocation on the reference interval [-1, 1].
//!
//! Everything here is computed once per polynomial degree and then shared
//! read-only by the operators. Matrices are stored row-major in flat vectors.

use crate::error::BasisError;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-14;

/// Legendre polynomial `P_n(x)` and `P_{n-1}(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    (p, p_prev)
}

/// Legendre polynomial `P_n(x)` (unnormalised, `P_n(1) = 1`).
pub fn legendre(n: usize, x: f64) -> f64 {
    legendre_pair(n, x).0
}

/// Nodal collocation machinery for one polynomial degree.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    diff: Vec<f64>,
    vandermonde: Vec<f64>,
    inv_vandermonde: Vec<f64>,
}

impl SpectralBasis {
    /// Builds the LGL basis of degree `n`.
    ///
    /// Degree 0 yields the single midpoint node with weight 2, which is only
    /// meaningful for pure finite-volume use.
    pub fn new(n: usize) -> Result<Self, BasisError> {
        let (nodes, weights) = lgl_nodes_weights(n)?;
        let diff = differentiation_matrix(&nodes);
        let np = n + 1;

        let mut vandermonde = vec![0.0; np * np];
        for (i, &x) in nodes.iter().enumerate() {
            for j in 0..np {
                vandermonde[i * np + j] = legendre(j, x);
            }
        }

        // Discrete L2 projection with the LGL rule. The rule integrates
        // P_j P_k exactly except for j = k = N, whose discrete norm is 2/N
        // instead of 2/(2N+1).
        let mut inv_vandermonde = vec![0.0; np * np];
        for j in 0..np {
            let norm = if j == n && n > 0 {
                2.0 / n as f64
            } else {
                2.0 / (2 * j + 1) as f64
            };
            for i in 0..np {
                inv_vandermonde[j * np + i] = weights[i] * vandermonde[i * np + j] / norm;
            }
        }

        Ok(Self {
            degree: n,
            nodes,
            weights,
            diff,
            vandermonde,
            inv_vandermonde,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of nodes per axis, `N + 1`.
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Entry `D_ij` of the differentiation matrix.
    #[inline]
    pub fn diff(&self, i: usize, j: usize) -> f64 {
        self.diff[i * self.len() + j]
    }

    /// Row-major differentiation matrix.
    pub fn diff_matrix(&self) -> &[f64] {
        &self.diff
    }

    /// Row-major modal Vandermonde matrix, `V_ij = P_j(x_i)`.
    pub fn vandermonde(&self) -> &[f64] {
        &self.vandermonde
    }

    /// Row-major inverse of [`Self::vandermonde`].
    pub fn inv_vandermonde(&self) -> &[f64] {
        &self.inv_vandermonde
    }

    /// Smallest distance between neighbouring nodes on the reference element.
    pub fn min_spacing(&self) -> f64 {
        if self.degree == 0 {
            return 2.0;
        }
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Legendre coefficients of the interpolant through `u`.
    pub fn nodal_to_modal(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.nodal_to_modal_into(u, &mut out);
        out
    }

    /// Allocation-free variant of [`Self::nodal_to_modal`].
    pub fn nodal_to_modal_into(&self, u: &[f64], modes: &mut [f64]) {
        let np = self.len();
        assert_eq!(u.len(), np, "nodal vector length must be N+1");
        assert_eq!(modes.len(), np, "modal vector length must be N+1");
        for (j, m) in modes.iter_mut().enumerate() {
            let row = &self.inv_vandermonde[j * np..(j + 1) * np];
            *m = row.iter().zip(u).map(|(a, b)| a * b).sum();
        }
    }

    /// Nodal values of the Legendre expansion with coefficients `modes`.
    pub fn modal_to_nodal(&self, modes: &[f64]) -> Vec<f64> {
        let np = self.len();
        assert_eq!(modes.len(), np, "modal vector length must be N+1");
        (0..np)
            .map(|i| {
                let row = &self.vandermonde[i * np..(i + 1) * np];
                row.iter().zip(modes).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// LGL nodes by Newton iteration on `(1 - x^2) P_N'(x)`, started from the
/// Chebyshev–Lobatto points.
fn lgl_nodes_weights(n: usize) -> Result<(Vec<f64>, Vec<f64>), BasisError> {
    if n == 0 {
        return Ok((vec![0.0], vec![2.0]));
    }
    let np = n + 1;
    let nf = n as f64;
    let mut nodes = vec![0.0; np];
    for (i, node) in nodes.iter_mut().enumerate() {
        let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            // (1 - x^2) P_N' = N (P_{N-1} - x P_N); its Newton step collapses
            // to the update below, valid at the endpoints as well.
            let (p, p_prev) = legendre_pair(n, x);
            let dx = (x * p - p_prev) / ((nf + 1.0) * p);
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(BasisError::NodeIteration { degree: n, node: i });
        }
        *node = x;
    }
    // pin endpoints and enforce exact symmetry
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for i in 0..np / 2 {
        let avg = 0.5 * (nodes[n - i] - nodes[i]);
        nodes[i] = -avg;
        nodes[n - i] = avg;
    }
    if np % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let weights = nodes
        .iter()
        .map(|&x| {
            let p = legendre(n, x);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    Ok((nodes, weights))
}

/// Lagrange differentiation matrix via barycentric weights, with the
/// diagonal set by the negative row sum so that `D 1 = 0` holds to rounding.
fn differentiation_matrix(nodes: &[f64]) -> Vec<f64> {
    let np = nodes.len();
    let mut bary = vec![1.0; np];
    for (j, b) in bary.iter_mut().enumerate() {
        for k in 0..np {
            if k != j {
                *b *= nodes[j] - nodes[k];
            }
        }
        *b = 1.0 / *b;
    }
    let mut d = vec![0.0; np * np];
    for i in 0..np {
        let mut row_sum = 0.0;
        for j in 0..np {
            if i != j {
                let v = bary[j] / (bary[i] * (nodes[i] - nodes[j]));
                d[i * np + j] = v;
                row_sum += v;
            }
        }
        d[i * np + i] = -row_sum;
    }
    d
}

use crate::error::{Error, Result};

/// Structured right-diagonal triangulation of the unit square.
///
/// Cell `(i, j)` is split along its `(i,j)–(i+1,j+1)` diagonal. Boundary
/// nodes carry no equation index (homogeneous Dirichlet data).
#[derive(Clone, Debug)]
pub struct Mesh2D {
    n_div: usize,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    equation: Vec<Option<usize>>,
    interior: Vec<usize>,
}

impl Mesh2D {
    pub fn new(n_div: usize) -> Result<Self> {
        if n_div < 2 {
            return Err(Error::InvalidParameter(format!("n_div must be >= 2, got {n_div}")));
        }
        let np = n_div + 1;
        let hc = 1.0 / n_div as f64;
        let id = |i: usize, j: usize| j * np + i;
        let mut nodes = Vec::with_capacity(np * np);
        let mut equation = Vec::with_capacity(np * np);
        let mut interior = Vec::new();
        for j in 0..np {
            for i in 0..np {
                nodes.push([i as f64 * hc, j as f64 * hc]);
                if i == 0 || j == 0 || i == n_div || j == n_div {
                    equation.push(None);
                } else {
                    equation.push(Some(interior.len()));
                    interior.push(id(i, j));
                }
            }
        }
        let mut triangles = Vec::with_capacity(2 * n_div * n_div);
        for j in 0..n_div {
            for i in 0..n_div {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Ok(Self {
            n_div,
            nodes,
            triangles,
            equation,
            interior,
        })
    }

    pub fn n_div(&self) -> usize {
        self.n_div
    }

    /// Mesh parameter `h = √2/n_div` (cell diagonal).
    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.n_div as f64
    }

    /// Cell side `1/n_div`.
    pub fn cell_size(&self) -> f64 {
        1.0 / self.n_div as f64
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Number of unknowns `m`.
    pub fn dofs(&self) -> usize {
        self.interior.len()
    }

    /// Equation index of a node, `None` on the boundary.
    pub fn equation(&self, node: usize) -> Option<usize> {
        self.equation[node]
    }

    /// Node index of each unknown.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn vertices(&self, tri: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[tri];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    /// Signed area (positive for counter-clockwise triangles).
    pub fn signed_area(&self, tri: usize) -> f64 {
        let [p0, p1, p2] = self.vertices(tri);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }
}

/// `build_mesh(n_div)`.
pub fn build_mesh(n_div: usize) -> Result<Mesh2D> {
    Mesh2D::new(n_div)
}

/// 7-point rule on a triangle, exact for polynomials of degree 5.
/// Entries are barycentric coordinates and weights summing to one.
pub(crate) fn quadrature_rule() -> [([f64; 3], f64); 7] {
    let r15 = 15f64.sqrt();
    let a1 = (6.0 - r15) / 21.0;
    let b1 = 1.0 - 2.0 * a1;
    let w1 = (155.0 - r15) / 1200.0;
    let a2 = (6.0 + r15) / 21.0;
    let b2 = 1.0 - 2.0 * a2;
    let w2 = (155.0 + r15) / 1200.0;
    let c = 1.0 / 3.0;
    [
        ([c, c, c], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

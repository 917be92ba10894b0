use std::fmt;
use std::sync::Arc;

use super::mesh::{quadrature_rule, Mesh2D};
use crate::error::{Error, Result};
use crate::la::{EnvelopeCholesky, SparseCsr};

type Scalar2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Vector2 = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
type Tensor2 = Arc<dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync>;

/// Second-order part of a bilinear form.
#[derive(Clone, Default)]
pub enum Diffusion {
    /// `D = I`.
    #[default]
    Unit,
    None,
    Variable(Tensor2),
}

/// Coefficients of a bilinear form
/// `(D∇u, ∇v) + (c·∇u, v) + (r u, v)`.
#[derive(Clone, Default)]
pub struct FormCoeffs {
    pub diffusion: Diffusion,
    pub convection: Option<Vector2>,
    pub reaction: Option<Scalar2>,
}

impl FormCoeffs {
    /// `(∇u, ∇v)`.
    pub fn laplacian() -> Self {
        Self::default()
    }

    /// The zero form.
    pub fn zero() -> Self {
        Self {
            diffusion: Diffusion::None,
            ..Self::default()
        }
    }

    pub fn with_diffusion(mut self, d: impl Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync + 'static) -> Self {
        self.diffusion = Diffusion::Variable(Arc::new(d));
        self
    }

    pub fn with_convection(mut self, c: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.convection = Some(Arc::new(c));
        self
    }

    pub fn with_reaction(mut self, r: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.reaction = Some(Arc::new(r));
        self
    }
}

impl fmt::Debug for FormCoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormCoeffs")
            .field(
                "diffusion",
                &match self.diffusion {
                    Diffusion::Unit => "unit",
                    Diffusion::None => "none",
                    Diffusion::Variable(_) => "variable",
                },
            )
            .field("convection", &self.convection.is_some())
            .field("reaction", &self.reaction.is_some())
            .finish()
    }
}

/// Coefficients of `𝒜` and `ℬ`; both default to `−Δ`.
#[derive(Clone, Debug, Default)]
pub struct OperatorCoeffs {
    pub a: FormCoeffs,
    pub b: FormCoeffs,
}

impl OperatorCoeffs {
    pub fn laplacian() -> Self {
        Self::default()
    }
}

/// `M`, `A`, `B` restricted to interior unknowns.
///
/// Row `i` holds the test function `φᵢ`: `B[i][j] = ℬ(φⱼ, φᵢ)`.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub m: SparseCsr,
    pub a: SparseCsr,
    pub b: SparseCsr,
}

impl AssembledSystem {
    pub fn dofs(&self) -> usize {
        self.m.rows()
    }
}

/// Gradients of the three barycentric functions (constant per triangle).
fn barycentric_gradients(v: &[[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let g = [
        [(v[1][1] - v[2][1]) / det, (v[2][0] - v[1][0]) / det],
        [(v[2][1] - v[0][1]) / det, (v[0][0] - v[2][0]) / det],
        [(v[0][1] - v[1][1]) / det, (v[1][0] - v[0][0]) / det],
    ];
    (g, 0.5 * det.abs())
}

fn point(v: &[[f64; 2]; 3], l: &[f64; 3]) -> (f64, f64) {
    (
        l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
        l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
    )
}

fn element_form(c: &FormCoeffs, v: &[[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let (g, area) = barycentric_gradients(v);
    let rule = quadrature_rule();
    let mut k = [[0.0; 3]; 3];
    // k[i][j]: test i, trial j
    match &c.diffusion {
        Diffusion::None => {}
        Diffusion::Unit => {
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
        Diffusion::Variable(d) => {
            for (l, w) in &rule {
                let (x, y) = point(v, l);
                let dm = d(x, y);
                for i in 0..3 {
                    for j in 0..3 {
                        let dg = [
                            dm[0][0] * g[j][0] + dm[0][1] * g[j][1],
                            dm[1][0] * g[j][0] + dm[1][1] * g[j][1],
                        ];
                        k[i][j] += w * area * (dg[0] * g[i][0] + dg[1] * g[i][1]);
                    }
                }
            }
        }
    }
    if let Some(cv) = &c.convection {
        for (l, w) in &rule {
            let (x, y) = point(v, l);
            let b = cv(x, y);
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] += w * area * (b[0] * g[j][0] + b[1] * g[j][1]) * l[i];
                }
            }
        }
    }
    if let Some(r) = &c.reaction {
        for (l, w) in &rule {
            let (x, y) = point(v, l);
            let rv = r(x, y);
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] += w * area * rv * l[i] * l[j];
                }
            }
        }
    }
    k
}

fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

fn scatter(mesh: &Mesh2D, element: impl Fn(usize) -> [[f64; 3]; 3]) -> Result<SparseCsr> {
    let mut trip = Vec::with_capacity(mesh.triangles().len() * 9);
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let k = element(e);
        for a in 0..3 {
            let Some(i) = mesh.equation(tri[a]) else { continue };
            for b in 0..3 {
                if let Some(j) = mesh.equation(tri[b]) {
                    trip.push((i, j, k[a][b]));
                }
            }
        }
    }
    SparseCsr::from_triplets(mesh.dofs(), mesh.dofs(), &trip)
}

/// Mass matrix over all nodes, boundary included.
pub fn full_mass(mesh: &Mesh2D) -> Result<SparseCsr> {
    let n = mesh.nodes().len();
    let mut trip = Vec::with_capacity(mesh.triangles().len() * 9);
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let k = element_mass(mesh.signed_area(e).abs());
        for a in 0..3 {
            for b in 0..3 {
                trip.push((tri[a], tri[b], k[a][b]));
            }
        }
    }
    SparseCsr::from_triplets(n, n, &trip)
}

/// Assembles `M`, `A`, `B` with Dirichlet rows and columns eliminated.
pub fn assemble(mesh: &Mesh2D, coeffs: &OperatorCoeffs) -> Result<AssembledSystem> {
    let m = scatter(mesh, |e| element_mass(mesh.signed_area(e).abs()))?;
    let a = scatter(mesh, |e| element_form(&coeffs.a, &mesh.vertices(e)))?;
    let b = scatter(mesh, |e| element_form(&coeffs.b, &mesh.vertices(e)))?;
    Ok(AssembledSystem { m, a, b })
}

/// `(f, φⱼ)` for every unknown `j`.
pub fn assemble_load(mesh: &Mesh2D, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let rule = quadrature_rule();
    let mut out = vec![0.0; mesh.dofs()];
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let v = mesh.vertices(e);
        let area = mesh.signed_area(e).abs();
        let eq = [mesh.equation(tri[0]), mesh.equation(tri[1]), mesh.equation(tri[2])];
        if eq.iter().all(Option::is_none) {
            continue;
        }
        for (l, w) in &rule {
            let (x, y) = point(&v, l);
            let fv = w * area * f(x, y);
            for a in 0..3 {
                if let Some(i) = eq[a] {
                    out[i] += fv * l[a];
                }
            }
        }
    }
    out
}

/// Load at time `t` of a space-time source.
pub fn assemble_load_at(mesh: &Mesh2D, f: &(impl Fn(f64, f64, f64) -> f64 + ?Sized), t: f64) -> Vec<f64> {
    assemble_load(mesh, |x, y| f(x, y, t))
}

/// `((f(t₀) + f(t₁))/2, φⱼ)`.
pub fn bar_load(mesh: &Mesh2D, f: &(impl Fn(f64, f64, f64) -> f64 + ?Sized), t0: f64, t1: f64) -> Vec<f64> {
    assemble_load(mesh, |x, y| 0.5 * (f(x, y, t0) + f(x, y, t1)))
}

/// L2 projection of `u0` onto the discrete space.
pub fn project_initial(mesh: &Mesh2D, mass: &SparseCsr, u0: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    let rhs = assemble_load(mesh, u0);
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(rhs);
    }
    let chol = EnvelopeCholesky::factor(mass)?;
    let mut x = chol.solve(&rhs);
    // one refinement sweep
    let r = mass.matvec(&x)?;
    let res: Vec<f64> = rhs.iter().zip(&r).map(|(b, ax)| b - ax).collect();
    let dx = chol.solve(&res);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    Ok(x)
}

/// Nodal interpolant at the interior nodes.
pub fn interpolate(mesh: &Mesh2D, u: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    mesh.interior_nodes()
        .iter()
        .map(|&n| {
            let [x, y] = mesh.nodes()[n];
            u(x, y)
        })
        .collect()
}

/// `‖u_h − u‖_{L²(Ω)}` by element quadrature.
pub fn l2_error(mesh: &Mesh2D, coeffs: &[f64], exact: impl Fn(f64, f64) -> f64) -> Result<f64> {
    if coeffs.len() != mesh.dofs() {
        return Err(Error::DimensionMismatch {
            context: "l2_error",
            expected: mesh.dofs(),
            found: coeffs.len(),
        });
    }
    let rule = quadrature_rule();
    let mut acc = 0.0;
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let v = mesh.vertices(e);
        let area = mesh.signed_area(e).abs();
        let c = [0, 1, 2].map(|a| mesh.equation(tri[a]).map_or(0.0, |i| coeffs[i]));
        for (l, w) in &rule {
            let (x, y) = point(&v, l);
            let uh = l[0] * c[0] + l[1] * c[1] + l[2] * c[2];
            let d = uh - exact(x, y);
            acc += w * area * d * d;
        }
    }
    Ok(acc.sqrt())
}

/// `‖u_h‖_{L²}` of a discrete function, `√(cᵀMc)`.
pub fn mass_norm(mass: &SparseCsr, c: &[f64]) -> Result<f64> {
    let mc = mass.matvec(c)?;
    Ok(c.iter().zip(&mc).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_mesh;

    #[test]
    fn closed_form_entries() {
        let mesh = build_mesh(2).unwrap();
        let sys = assemble(&mesh, &OperatorCoeffs::laplacian()).unwrap();
        assert!((sys.a.get(0, 0) - 4.0).abs() < 1e-14);
        assert_eq!(sys.a, sys.b);
        let mesh = build_mesh(8).unwrap();
        let sys = assemble(&mesh, &OperatorCoeffs::laplacian()).unwrap();
        let hc = mesh.cell_size();
        for i in 0..mesh.dofs() {
            assert!((sys.m.get(i, i) - hc * hc / 2.0).abs() < 1e-15);
            assert!((sys.a.get(i, i) - 4.0).abs() < 1e-13);
        }
        assert!(sys.m.asymmetry() <= 1e-15 && sys.a.asymmetry() <= 1e-15);
        assert!(EnvelopeCholesky::factor(&sys.m).is_ok());
    }

    #[test]
    fn full_mass_partition_of_unity() {
        let mesh = build_mesh(7).unwrap();
        let m = full_mass(&mesh).unwrap();
        let ones = vec![1.0; mesh.nodes().len()];
        let s: f64 = m.matvec(&ones).unwrap().iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unit_load_is_patch_area_over_three() {
        let mesh = build_mesh(6).unwrap();
        let hc = mesh.cell_size();
        let b = assemble_load(&mesh, |_, _| 1.0);
        assert!(b.iter().all(|v| (v - hc * hc).abs() < 1e-15));
        assert!(assemble_load(&mesh, |_, _| 0.0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_coeffs_norm_of_bubble() {
        // degree-8 integrand: the degree-5 rule converges at O(h⁶)
        let mesh = build_mesh(32).unwrap();
        let z = vec![0.0; mesh.dofs()];
        let e = l2_error(&mesh, &z, |x, y| x * (1.0 - x) * y * (1.0 - y)).unwrap();
        assert!((e - 1.0 / 30.0).abs() < 1e-12, "{e}");
    }

    #[test]
    fn interpolant_of_discrete_function_is_exact() {
        let mesh = build_mesh(4).unwrap();
        // piecewise-linear hat at the centre node
        let sys = assemble(&mesh, &OperatorCoeffs::laplacian()).unwrap();
        let mut c = vec![0.0; mesh.dofs()];
        c[mesh.dofs() / 2] = 1.0;
        let rhs = sys.m.matvec(&c).unwrap();
        let chol = EnvelopeCholesky::factor(&sys.m).unwrap();
        let back = chol.solve(&rhs);
        for (a, b) in back.iter().zip(&c) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn convection_term_is_transposed_form() {
        // (c·∇u, v) with c = (1, 0): skew part only, since ∫∂ₓ(uv) = 0 with Dirichlet data
        let mesh = build_mesh(5).unwrap();
        let coeffs = OperatorCoeffs {
            a: FormCoeffs::laplacian(),
            b: FormCoeffs::laplacian().with_convection(|_, _| [1.0, 0.0]),
        };
        let sys = assemble(&mesh, &coeffs).unwrap();
        let lap = assemble(&mesh, &OperatorCoeffs::laplacian()).unwrap();
        let skew = SparseCsr::linear_combination(&[(1.0, &sys.b), (-1.0, &lap.a)]).unwrap();
        let t = skew.transpose();
        let sum = SparseCsr::linear_combination(&[(1.0, &skew), (1.0, &t)]).unwrap();
        assert!(sum.values().iter().all(|v| v.abs() < 1e-14));
    }
}

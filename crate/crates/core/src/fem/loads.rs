use super::assembly::assemble_load;
use super::mesh::Mesh2D;
use super::problems::Source;

/// Evaluates load vectors `(f(·, t), φⱼ)` for one source on one mesh.
///
/// Separable sources cost one assembly per spatial factor up front and a
/// length-`m` combination per call.
pub struct LoadAssembler<'a> {
    mesh: &'a Mesh2D,
    source: &'a Source,
    basis: Vec<Vec<f64>>,
}

impl<'a> LoadAssembler<'a> {
    pub fn new(mesh: &'a Mesh2D, source: &'a Source) -> Self {
        let basis = match source {
            Source::General(_) => Vec::new(),
            Source::Separable(terms) => terms.iter().map(|(_, s)| assemble_load(mesh, |x, y| s(x, y))).collect(),
        };
        Self { mesh, source, basis }
    }

    /// `(f(·, t), φⱼ)`.
    pub fn at(&self, t: f64) -> Vec<f64> {
        match self.source {
            Source::General(f) => assemble_load(self.mesh, |x, y| f(x, y, t)),
            Source::Separable(terms) => {
                let mut out = vec![0.0; self.mesh.dofs()];
                for ((g, _), b) in terms.iter().zip(&self.basis) {
                    let c = g(t);
                    for (o, v) in out.iter_mut().zip(b) {
                        *o += c * v;
                    }
                }
                out
            }
        }
    }

    /// `((f(t₀) + f(t₁))/2, φⱼ)`.
    pub fn bar(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self.source {
            Source::General(f) => assemble_load(self.mesh, |x, y| 0.5 * (f(x, y, t0) + f(x, y, t1))),
            Source::Separable(_) => {
                let a = self.at(t0);
                let b = self.at(t1);
                a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()
            }
        }
    }
}

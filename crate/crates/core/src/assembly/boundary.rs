//! Robin boundary terms on exterior faces.
//!
//! For a face `F` the contributions are `alpha * int_F N_i N_j` to the
//! matrix and `beta * int_F N_i` to the right-hand side. Faces are
//! two-node lines (2D meshes), three-node triangles or four-node quads.

use crate::elements::reference_element;
use crate::error::{Error, Result};
use crate::mesh::{ElementType, Mesh};
use crate::sparse::CsrMatrix;

use super::scatter::node_pattern;

const LINE_GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Gauss rule and shape functions of a face parameterisation.
#[derive(Debug, Clone)]
struct FaceReference {
    nnodes: usize,
    pdim: usize,
    weights: Vec<f64>,
    /// `ig * nnodes + in`
    shape: Vec<f64>,
    /// `(ig * nnodes + in) * pdim + b`
    dshape: Vec<f64>,
}

impl FaceReference {
    fn line() -> Self {
        let mut shape = Vec::new();
        let mut dshape = Vec::new();
        for s in LINE_GAUSS {
            shape.extend([0.5 * (1.0 - s), 0.5 * (1.0 + s)]);
            dshape.extend([-0.5, 0.5]);
        }
        Self {
            nnodes: 2,
            pdim: 1,
            weights: vec![1.0; 2],
            shape,
            dshape,
        }
    }

    fn surface(kind: ElementType) -> Self {
        let re = reference_element(kind);
        let mut shape = Vec::new();
        let mut dshape = Vec::new();
        for ig in 0..re.ngauss {
            shape.extend_from_slice(re.shape_at(ig));
            dshape.extend_from_slice(re.dshape_at(ig));
        }
        Self {
            nnodes: re.nnodes,
            pdim: 2,
            weights: re.gauss_weights.clone(),
            shape,
            dshape,
        }
    }

    fn ngauss(&self) -> usize {
        self.weights.len()
    }

    /// Surface measure times weight at each Gauss point.
    fn metric(&self, x: &[f64], dim: usize, out: &mut [f64]) {
        let nn = self.nnodes;
        for (ig, o) in out.iter_mut().enumerate() {
            let mut t = [[0.0; 3]; 2];
            for inode in 0..nn {
                for b in 0..self.pdim {
                    let s = self.dshape[(ig * nn + inode) * self.pdim + b];
                    for a in 0..dim {
                        t[b][a] += x[inode * dim + a] * s;
                    }
                }
            }
            let m = if self.pdim == 1 {
                (t[0][0] * t[0][0] + t[0][1] * t[0][1]).sqrt()
            } else {
                let c = [
                    t[0][1] * t[1][2] - t[0][2] * t[1][1],
                    t[0][2] * t[1][0] - t[0][0] * t[1][2],
                    t[0][0] * t[1][1] - t[0][1] * t[1][0],
                ];
                (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
            };
            *o = m * self.weights[ig];
        }
    }
}

/// Exterior faces with precomputed scatter positions.
#[derive(Debug, Clone)]
pub struct BoundaryAssembler {
    dim: usize,
    /// Face node lists.
    faces: Vec<Vec<usize>>,
    /// Index into `refs` per face.
    face_ref: Vec<usize>,
    refs: Vec<FaceReference>,
    /// CSR value positions, `nnodes^2` per face, row-major.
    csr_index: Vec<Vec<usize>>,
}

impl BoundaryAssembler {
    /// Uses the mesh's recorded boundary faces and its node pattern.
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let pattern = node_pattern(mesh);
        let faces: Vec<Vec<usize>> = mesh.boundary_faces().iter().map(|f| f.nodes.clone()).collect();
        Self::with_faces(mesh, faces, &pattern)
    }

    pub fn with_faces(mesh: &Mesh, faces: Vec<Vec<usize>>, pattern: &CsrMatrix) -> Result<Self> {
        let dim = mesh.dim();
        let refs = if dim == 2 {
            vec![FaceReference::line()]
        } else {
            vec![
                FaceReference::surface(ElementType::Tri03),
                FaceReference::surface(ElementType::Quad04),
            ]
        };
        let mut face_ref = Vec::with_capacity(faces.len());
        let mut csr_index = Vec::with_capacity(faces.len());
        for f in &faces {
            let r = match (dim, f.len()) {
                (2, 2) => 0,
                (3, 3) => 0,
                (3, 4) => 1,
                (d, n) => return Err(Error::config(format!("unsupported {n}-node face in {d}D mesh"))),
            };
            if let Some(&bad) = f.iter().find(|&&n| n >= mesh.nnode()) {
                return Err(Error::config(format!("face node {bad} out of range")));
            }
            let mut idx = Vec::with_capacity(f.len() * f.len());
            for &i in f {
                for &j in f {
                    idx.push(pattern.find(i, j).ok_or(Error::PatternMismatch { row: i, col: j })?);
                }
            }
            face_ref.push(r);
            csr_index.push(idx);
        }
        Ok(Self {
            dim,
            faces,
            face_ref,
            refs,
            csr_index,
        })
    }

    pub fn nfaces(&self) -> usize {
        self.faces.len()
    }

    /// Adds `alpha * int N_i N_j` into `matrix` and `beta * int N_i` into
    /// `rhs`, either of which may be omitted.
    pub fn assemble(
        &self,
        coords: &[f64],
        alpha: f64,
        beta: f64,
        mut matrix: Option<&mut CsrMatrix>,
        mut rhs: Option<&mut [f64]>,
    ) -> Result<()> {
        if let Some(b) = rhs.as_deref() {
            if b.len() * self.dim != coords.len() {
                return Err(Error::DimensionMismatch {
                    expected: coords.len() / self.dim,
                    got: b.len(),
                });
            }
        }
        let mut x = Vec::new();
        let mut jw = Vec::new();
        for (f, nodes) in self.faces.iter().enumerate() {
            let fr = &self.refs[self.face_ref[f]];
            let nn = fr.nnodes;
            self.face_metric(fr, nodes, coords, &mut x, &mut jw);
            for ig in 0..fr.ngauss() {
                let n = &fr.shape[ig * nn..(ig + 1) * nn];
                if let Some(m) = matrix.as_deref_mut() {
                    for i in 0..nn {
                        for j in 0..nn {
                            m.vals[self.csr_index[f][i * nn + j]] += alpha * jw[ig] * n[i] * n[j];
                        }
                    }
                }
                if let Some(b) = rhs.as_deref_mut() {
                    for i in 0..nn {
                        b[nodes[i]] += beta * jw[ig] * n[i];
                    }
                }
            }
        }
        Ok(())
    }

    /// Adds the explicit Robin flux `int N_i (beta - alpha phi_h)` for the
    /// nodal field `phi` into `out`.
    pub fn assemble_flux(&self, coords: &[f64], alpha: f64, beta: f64, phi: &[f64], out: &mut [f64]) -> Result<()> {
        let nnode = coords.len() / self.dim;
        for len in [phi.len(), out.len()] {
            if len != nnode {
                return Err(Error::DimensionMismatch {
                    expected: nnode,
                    got: len,
                });
            }
        }
        let mut x = Vec::new();
        let mut jw = Vec::new();
        for (f, nodes) in self.faces.iter().enumerate() {
            let fr = &self.refs[self.face_ref[f]];
            let nn = fr.nnodes;
            self.face_metric(fr, nodes, coords, &mut x, &mut jw);
            for ig in 0..fr.ngauss() {
                let n = &fr.shape[ig * nn..(ig + 1) * nn];
                let mut ph = 0.0;
                for i in 0..nn {
                    ph += n[i] * phi[nodes[i]];
                }
                let q = jw[ig] * (beta - alpha * ph);
                for i in 0..nn {
                    out[nodes[i]] += q * n[i];
                }
            }
        }
        Ok(())
    }

    fn face_metric(&self, fr: &FaceReference, nodes: &[usize], coords: &[f64], x: &mut Vec<f64>, jw: &mut Vec<f64>) {
        x.clear();
        for &n in nodes {
            x.extend_from_slice(&coords[n * self.dim..(n + 1) * self.dim]);
        }
        jw.clear();
        jw.resize(fr.ngauss(), 0.0);
        fr.metric(x, self.dim, jw);
    }

    /// Total measure of the boundary.
    pub fn area(&self, coords: &[f64]) -> f64 {
        let nnode = coords.len() / self.dim;
        let mut ones = vec![0.0; nnode];
        self.assemble(coords, 0.0, 1.0, None, Some(&mut ones)).expect("sizes match");
        ones.iter().sum()
    }
}

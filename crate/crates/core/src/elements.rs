//! Reference elements: shape functions, reference gradients and Gauss rules,
//! plus the per-Gauss-point Jacobian evaluation of physical elements.
//!
//! Reference domains: TRI03 and TET04 are unit simplices with the corner
//! at the origin, QUAD04 and HEX08 are `[-1,1]^d`, PYR05 has the base
//! `[-1,1]^2` at `z = 0` and the apex at `(0,0,1)`.

use crate::error::{Error, Result};
use crate::mesh::ElementType;

const GAUSS2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Tabulated element data at the Gauss points of its rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    pub kind: ElementType,
    pub dim: usize,
    pub nnodes: usize,
    pub ngauss: usize,
    /// `ngauss x dim`
    pub gauss_points: Vec<f64>,
    pub gauss_weights: Vec<f64>,
    /// `N(in, ig)` stored at `ig * nnodes + in`.
    shape: Vec<f64>,
    /// `dN(d, in, ig)` stored at `(ig * nnodes + in) * dim + d`.
    dshape: Vec<f64>,
}

impl ReferenceElement {
    #[inline(always)]
    pub fn n(&self, inode: usize, ig: usize) -> f64 {
        self.shape[ig * self.nnodes + inode]
    }

    #[inline(always)]
    pub fn dn(&self, d: usize, inode: usize, ig: usize) -> f64 {
        self.dshape[(ig * self.nnodes + inode) * self.dim + d]
    }

    /// Shape values at one Gauss point.
    #[inline(always)]
    pub fn shape_at(&self, ig: usize) -> &[f64] {
        &self.shape[ig * self.nnodes..(ig + 1) * self.nnodes]
    }

    /// Reference gradients at one Gauss point, node-major.
    #[inline(always)]
    pub fn dshape_at(&self, ig: usize) -> &[f64] {
        let s = self.nnodes * self.dim;
        &self.dshape[ig * s..(ig + 1) * s]
    }

    pub fn measure(&self) -> f64 {
        reference_measure(self.kind)
    }

    /// Applies the rule to `f` over the reference domain.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.gauss_points
            .chunks_exact(self.dim)
            .zip(&self.gauss_weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

pub fn reference_measure(kind: ElementType) -> f64 {
    match kind {
        ElementType::Tri03 => 0.5,
        ElementType::Quad04 => 4.0,
        ElementType::Tet04 => 1.0 / 6.0,
        ElementType::Pyr05 => 4.0 / 3.0,
        ElementType::Hex08 => 8.0,
    }
}

/// Polynomial degree the Gauss rule of `kind` integrates exactly.
pub fn exactness_degree(kind: ElementType) -> usize {
    match kind {
        ElementType::Tri03 | ElementType::Tet04 => 2,
        ElementType::Quad04 | ElementType::Hex08 => 3,
        ElementType::Pyr05 => 3,
    }
}

/// Shape values and reference gradients (node-major, `dim` per node) at a
/// reference point.
pub fn shape_functions(kind: ElementType, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    match kind {
        ElementType::Tri03 => {
            let (x, y) = (p[0], p[1]);
            (
                vec![1.0 - x - y, x, y],
                vec![-1.0, -1.0, 1.0, 0.0, 0.0, 1.0],
            )
        }
        ElementType::Quad04 => {
            let (x, y) = (p[0], p[1]);
            let sign = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
            let mut n = Vec::with_capacity(4);
            let mut dn = Vec::with_capacity(8);
            for (sx, sy) in sign {
                n.push(0.25 * (1.0 + sx * x) * (1.0 + sy * y));
                dn.push(0.25 * sx * (1.0 + sy * y));
                dn.push(0.25 * sy * (1.0 + sx * x));
            }
            (n, dn)
        }
        ElementType::Tet04 => {
            let (x, y, z) = (p[0], p[1], p[2]);
            (
                vec![1.0 - x - y - z, x, y, z],
                vec![
                    -1.0, -1.0, -1.0, //
                    1.0, 0.0, 0.0, //
                    0.0, 1.0, 0.0, //
                    0.0, 0.0, 1.0,
                ],
            )
        }
        ElementType::Hex08 => {
            let (x, y, z) = (p[0], p[1], p[2]);
            let mut n = Vec::with_capacity(8);
            let mut dn = Vec::with_capacity(24);
            for (sx, sy, sz) in HEX_SIGNS {
                let (fx, fy, fz) = (1.0 + sx * x, 1.0 + sy * y, 1.0 + sz * z);
                n.push(0.125 * fx * fy * fz);
                dn.push(0.125 * sx * fy * fz);
                dn.push(0.125 * sy * fx * fz);
                dn.push(0.125 * sz * fx * fy);
            }
            (n, dn)
        }
        ElementType::Pyr05 => {
            // Rational basis; the xy/(1-z) term keeps the base bilinear and the
            // triangular faces linear.
            let (x, y, z) = (p[0], p[1], p[2]);
            let r = 1.0 / (1.0 - z);
            let sign = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
            let mut n = Vec::with_capacity(5);
            let mut dn = Vec::with_capacity(15);
            for (sx, sy) in sign {
                let sxy = sx * sy;
                n.push(0.25 * (1.0 + sx * x + sy * y - z + sxy * x * y * r));
                dn.push(0.25 * (sx + sxy * y * r));
                dn.push(0.25 * (sy + sxy * x * r));
                dn.push(0.25 * (-1.0 + sxy * x * y * r * r));
            }
            n.push(z);
            dn.extend_from_slice(&[0.0, 0.0, 1.0]);
            (n, dn)
        }
    }
}

const HEX_SIGNS: [(f64, f64, f64); 8] = [
    (-1.0, -1.0, -1.0),
    (1.0, -1.0, -1.0),
    (1.0, 1.0, -1.0),
    (-1.0, 1.0, -1.0),
    (-1.0, -1.0, 1.0),
    (1.0, -1.0, 1.0),
    (1.0, 1.0, 1.0),
    (-1.0, 1.0, 1.0),
];

/// Two-point Gauss-Jacobi rule on `[0,1]` for the weight `(1-z)^2`.
fn gauss_jacobi_collapsed() -> ([f64; 2], [f64; 2]) {
    // With s = 1 - z the orthogonal quadratic is s^2 - 4/3 s + 2/5.
    let h = (8.0f64 / 45.0).sqrt() / 2.0;
    let s = [2.0 / 3.0 - h, 2.0 / 3.0 + h];
    // Moments of s^2 on [0,1]: 1/3 and 1/4.
    let w1 = (0.25 - s[0] / 3.0) / (s[1] - s[0]);
    let w0 = 1.0 / 3.0 - w1;
    ([1.0 - s[0], 1.0 - s[1]], [w0, w1])
}

fn gauss_rule(kind: ElementType) -> (Vec<f64>, Vec<f64>) {
    match kind {
        ElementType::Tri03 => (
            vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            vec![1.0 / 6.0; 3],
        ),
        ElementType::Quad04 => {
            let mut p = Vec::new();
            for y in GAUSS2 {
                for x in GAUSS2 {
                    p.extend_from_slice(&[x, y]);
                }
            }
            (p, vec![1.0; 4])
        }
        ElementType::Tet04 => {
            let a = 0.585_410_196_624_968_5;
            let b = 0.138_196_601_125_010_5;
            (
                vec![b, b, b, a, b, b, b, a, b, b, b, a],
                vec![1.0 / 24.0; 4],
            )
        }
        ElementType::Hex08 => {
            let mut p = Vec::new();
            for z in GAUSS2 {
                for y in GAUSS2 {
                    for x in GAUSS2 {
                        p.extend_from_slice(&[x, y, z]);
                    }
                }
            }
            (p, vec![1.0; 8])
        }
        ElementType::Pyr05 => {
            let (zs, zw) = gauss_jacobi_collapsed();
            let mut p = Vec::new();
            let mut w = Vec::new();
            for (z, wz) in zs.iter().zip(zw) {
                for b in GAUSS2 {
                    for a in GAUSS2 {
                        p.extend_from_slice(&[a * (1.0 - z), b * (1.0 - z), *z]);
                        w.push(wz);
                    }
                }
            }
            (p, w)
        }
    }
}

pub fn reference_element(kind: ElementType) -> ReferenceElement {
    let dim = kind.dim();
    let nnodes = kind.nnodes();
    let (gauss_points, gauss_weights) = gauss_rule(kind);
    let ngauss = gauss_weights.len();
    let mut shape = Vec::with_capacity(ngauss * nnodes);
    let mut dshape = Vec::with_capacity(ngauss * nnodes * dim);
    for p in gauss_points.chunks_exact(dim) {
        let (n, dn) = shape_functions(kind, p);
        shape.extend(n);
        dshape.extend(dn);
    }
    ReferenceElement {
        kind,
        dim,
        nnodes,
        ngauss,
        gauss_points,
        gauss_weights,
        shape,
        dshape,
    }
}

/// Quadrature value of `prod_d x_d^exps[d]` over the reference element.
pub fn quadrature_exactness_check(kind: ElementType, exps: &[u32]) -> f64 {
    let re = reference_element(kind);
    re.integrate(|p| p.iter().zip(exps).map(|(x, &e)| x.powi(e as i32)).product())
}

/// Per-Gauss-point geometry of one physical element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub dim: usize,
    pub nnodes: usize,
    /// `|det J(ig)| * w(ig)`
    pub detjw: Vec<f64>,
    /// Physical gradients at `(ig * nnodes + in) * dim + d`.
    pub grad: Vec<f64>,
}

impl ElementGeometry {
    pub fn for_reference(re: &ReferenceElement) -> Self {
        Self {
            dim: re.dim,
            nnodes: re.nnodes,
            detjw: vec![0.0; re.ngauss],
            grad: vec![0.0; re.ngauss * re.nnodes * re.dim],
        }
    }

    #[inline(always)]
    pub fn grad_at(&self, ig: usize) -> &[f64] {
        let s = self.nnodes * self.dim;
        &self.grad[ig * s..(ig + 1) * s]
    }

    pub fn volume(&self) -> f64 {
        self.detjw.iter().sum()
    }
}

/// Determinant and inverse of a `D x D` matrix, `D` in {2, 3}.
#[inline(always)]
pub(crate) fn det_inv<const D: usize>(j: &[[f64; D]; D]) -> (f64, [[f64; D]; D]) {
    let mut inv = [[0.0; D]; D];
    if D == 2 {
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let r = 1.0 / det;
        inv[0][0] = j[1][1] * r;
        inv[0][1] = -j[0][1] * r;
        inv[1][0] = -j[1][0] * r;
        inv[1][1] = j[0][0] * r;
        (det, inv)
    } else {
        let c00 = j[1][1] * j[2][2] - j[1][2] * j[2][1];
        let c01 = j[1][2] * j[2][0] - j[1][0] * j[2][2];
        let c02 = j[1][0] * j[2][1] - j[1][1] * j[2][0];
        let det = j[0][0] * c00 + j[0][1] * c01 + j[0][2] * c02;
        let r = 1.0 / det;
        inv[0][0] = c00 * r;
        inv[0][1] = (j[0][2] * j[2][1] - j[0][1] * j[2][2]) * r;
        inv[0][2] = (j[0][1] * j[1][2] - j[0][2] * j[1][1]) * r;
        inv[1][0] = c01 * r;
        inv[1][1] = (j[0][0] * j[2][2] - j[0][2] * j[2][0]) * r;
        inv[1][2] = (j[0][2] * j[1][0] - j[0][0] * j[1][2]) * r;
        inv[2][0] = c02 * r;
        inv[2][1] = (j[0][1] * j[2][0] - j[0][0] * j[2][1]) * r;
        inv[2][2] = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) * r;
        (det, inv)
    }
}

/// Geometry of the element with node coordinates `coords` (node-major).
pub fn compute_geometry(re: &ReferenceElement, coords: &[f64]) -> Result<ElementGeometry> {
    let mut g = ElementGeometry::for_reference(re);
    compute_geometry_into(re, coords, &mut g)?;
    Ok(g)
}

/// In-place variant of [`compute_geometry`] for sweeps that reuse storage.
pub fn compute_geometry_into(
    re: &ReferenceElement,
    coords: &[f64],
    out: &mut ElementGeometry,
) -> Result<()> {
    if coords.len() != re.nnodes * re.dim {
        return Err(Error::DimensionMismatch {
            expected: re.nnodes * re.dim,
            got: coords.len(),
        });
    }
    match re.dim {
        2 => geometry_dim::<2>(re, coords, out),
        _ => geometry_dim::<3>(re, coords, out),
    }
}

fn geometry_dim<const D: usize>(
    re: &ReferenceElement,
    coords: &[f64],
    out: &mut ElementGeometry,
) -> Result<()> {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let dn = re.dshape_at(ig);
        let mut jac = [[0.0; D]; D];
        for inode in 0..nn {
            for a in 0..D {
                for b in 0..D {
                    jac[a][b] += coords[inode * D + a] * dn[inode * D + b];
                }
            }
        }
        let (det, inv) = det_inv::<D>(&jac);
        if !(det > 0.0) {
            return Err(Error::InvertedElement {
                element: None,
                pack: None,
                lane: None,
                gauss: ig,
                det,
            });
        }
        out.detjw[ig] = det * re.gauss_weights[ig];
        let grad = &mut out.grad[ig * nn * D..(ig + 1) * nn * D];
        for inode in 0..nn {
            for a in 0..D {
                let mut g = 0.0;
                for b in 0..D {
                    g += dn[inode * D + b] * inv[b][a];
                }
                grad[inode * D + a] = g;
            }
        }
    }
    Ok(())
}

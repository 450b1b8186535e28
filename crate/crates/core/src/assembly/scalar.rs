//! Element-at-a-time kernels.
//!
//! Loops run `ig -> jn -> in` over one element with the Jacobian weight of
//! the current Gauss point. The packed kernels perform the same arithmetic
//! in the same order per lane.

use super::pointwise::momentum_point;
use crate::elements::{ElementGeometry, ReferenceElement};

pub(crate) fn mass(re: &ReferenceElement, geo: &ElementGeometry, ae: &mut [f64]) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = geo.detjw[ig];
        let n = re.shape_at(ig);
        for jn in 0..nn {
            for inode in 0..nn {
                ae[inode * nn + jn] += jac * n[inode] * n[jn];
            }
        }
    }
}

pub(crate) fn laplacian<const D: usize>(re: &ReferenceElement, geo: &ElementGeometry, ae: &mut [f64]) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = geo.detjw[ig];
        let gr = geo.grad_at(ig);
        for jn in 0..nn {
            for inode in 0..nn {
                let mut k = 0.0;
                for d in 0..D {
                    k += gr[inode * D + d] * gr[jn * D + d];
                }
                ae[inode * nn + jn] += jac * k;
            }
        }
    }
}

/// `a` holds the advecting velocity at the element nodes, node-major.
pub(crate) fn convection<const D: usize>(
    re: &ReferenceElement,
    geo: &ElementGeometry,
    a: &[f64],
    ae: &mut [f64],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = geo.detjw[ig];
        let n = re.shape_at(ig);
        let gr = geo.grad_at(ig);
        let mut ag = [0.0; D];
        for inode in 0..nn {
            for d in 0..D {
                ag[d] += n[inode] * a[inode * D + d];
            }
        }
        for jn in 0..nn {
            let mut adv = 0.0;
            for d in 0..D {
                adv += ag[d] * gr[jn * D + d];
            }
            for inode in 0..nn {
                ae[inode * nn + jn] += jac * n[inode] * adv;
            }
        }
    }
}

/// `ae(i, j) += w N_i dN_j/dx_c`
pub(crate) fn gradient_coupling<const D: usize>(
    re: &ReferenceElement,
    geo: &ElementGeometry,
    component: usize,
    ae: &mut [f64],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = geo.detjw[ig];
        let n = re.shape_at(ig);
        let gr = geo.grad_at(ig);
        for jn in 0..nn {
            for inode in 0..nn {
                ae[inode * nn + jn] += jac * n[inode] * gr[jn * D + component];
            }
        }
    }
}

#[inline(always)]
fn gauss_velocity<const D: usize>(n: &[f64], gr: &[f64], u: &[f64]) -> ([f64; D], [[f64; D]; D]) {
    let mut ug = [0.0; D];
    let mut g = [[0.0; D]; D];
    for inode in 0..n.len() {
        for c in 0..D {
            ug[c] += n[inode] * u[inode * D + c];
            for d in 0..D {
                g[c][d] += gr[inode * D + d] * u[inode * D + c];
            }
        }
    }
    (ug, g)
}

/// Momentum residual, `D` components per node.
pub(crate) fn momentum<const D: usize>(
    re: &ReferenceElement,
    geo: &ElementGeometry,
    u: &[f64],
    rho: f64,
    mu: f64,
    r: &mut [f64],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = geo.detjw[ig];
        let n = re.shape_at(ig);
        let gr = geo.grad_at(ig);
        let (ug, g) = gauss_velocity::<D>(n, gr, u);
        let (conv, stress) = momentum_point::<D>(&ug, &g, rho, mu);
        for inode in 0..nn {
            for c in 0..D {
                let mut t = n[inode] * conv[c];
                for d in 0..D {
                    t += stress[c][d] * gr[inode * D + d];
                }
                r[inode * D + c] -= jac * t;
            }
        }
    }
}

/// Convection-diffusion residual of a transported scalar.
pub(crate) fn scalar_transport<const D: usize>(
    re: &ReferenceElement,
    geo: &ElementGeometry,
    phi: &[f64],
    u: &[f64],
    kappa: f64,
    r: &mut [f64],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = geo.detjw[ig];
        let n = re.shape_at(ig);
        let gr = geo.grad_at(ig);
        let mut ug = [0.0; D];
        let mut gphi = [0.0; D];
        for inode in 0..nn {
            for d in 0..D {
                ug[d] += n[inode] * u[inode * D + d];
                gphi[d] += gr[inode * D + d] * phi[inode];
            }
        }
        let mut adv = 0.0;
        for d in 0..D {
            adv += ug[d] * gphi[d];
        }
        for inode in 0..nn {
            let mut diff = 0.0;
            for d in 0..D {
                diff += gr[inode * D + d] * gphi[d];
            }
            r[inode] -= jac * (n[inode] * adv + kappa * diff);
        }
    }
}

/// `r_i += w N_i div(u)`
pub(crate) fn divergence<const D: usize>(re: &ReferenceElement, geo: &ElementGeometry, u: &[f64], r: &mut [f64]) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = geo.detjw[ig];
        let n = re.shape_at(ig);
        let gr = geo.grad_at(ig);
        let mut div = 0.0;
        for inode in 0..nn {
            for c in 0..D {
                div += gr[inode * D + c] * u[inode * D + c];
            }
        }
        for inode in 0..nn {
            r[inode] += jac * n[inode] * div;
        }
    }
}

/// `r_ic += w N_i dp/dx_c`
pub(crate) fn gradient<const D: usize>(re: &ReferenceElement, geo: &ElementGeometry, p: &[f64], r: &mut [f64]) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = geo.detjw[ig];
        let n = re.shape_at(ig);
        let gr = geo.grad_at(ig);
        let mut gp = [0.0; D];
        for inode in 0..nn {
            for d in 0..D {
                gp[d] += gr[inode * D + d] * p[inode];
            }
        }
        for inode in 0..nn {
            for c in 0..D {
                r[inode * D + c] += jac * n[inode] * gp[c];
            }
        }
    }
}

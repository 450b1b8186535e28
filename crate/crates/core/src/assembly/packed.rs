//! Pack-at-a-time kernels: the element loops of `scalar` with a trailing
//! lane loop, so `Ae(1:VS, in, jn) += Jac(1:VS, ig) * N(in, ig) * N(jn, ig)`
//! runs as one vector operation per `(in, jn)`.
//!
//! Per lane the arithmetic matches `scalar` operation for operation.

use super::pointwise::momentum_point;
use crate::elements::ReferenceElement;

pub(crate) fn mass<const VS: usize>(re: &ReferenceElement, detjw: &[[f64; VS]], ae: &mut [[f64; VS]]) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = &detjw[ig];
        let n = re.shape_at(ig);
        for jn in 0..nn {
            for inode in 0..nn {
                let a = &mut ae[inode * nn + jn];
                for l in 0..VS {
                    a[l] += jac[l] * n[inode] * n[jn];
                }
            }
        }
    }
}

pub(crate) fn laplacian<const VS: usize, const D: usize>(
    re: &ReferenceElement,
    detjw: &[[f64; VS]],
    grad: &[[f64; VS]],
    ae: &mut [[f64; VS]],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = &detjw[ig];
        let gr = &grad[ig * nn * D..(ig + 1) * nn * D];
        for jn in 0..nn {
            for inode in 0..nn {
                let mut k = [0.0; VS];
                for d in 0..D {
                    let (gi, gj) = (&gr[inode * D + d], &gr[jn * D + d]);
                    for l in 0..VS {
                        k[l] += gi[l] * gj[l];
                    }
                }
                let a = &mut ae[inode * nn + jn];
                for l in 0..VS {
                    a[l] += jac[l] * k[l];
                }
            }
        }
    }
}

pub(crate) fn convection<const VS: usize, const D: usize>(
    re: &ReferenceElement,
    detjw: &[[f64; VS]],
    grad: &[[f64; VS]],
    a_nodal: &[[f64; VS]],
    ae: &mut [[f64; VS]],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = &detjw[ig];
        let n = re.shape_at(ig);
        let gr = &grad[ig * nn * D..(ig + 1) * nn * D];
        let mut ag = [[0.0; VS]; D];
        for inode in 0..nn {
            for d in 0..D {
                let av = &a_nodal[inode * D + d];
                for l in 0..VS {
                    ag[d][l] += n[inode] * av[l];
                }
            }
        }
        for jn in 0..nn {
            let mut adv = [0.0; VS];
            for d in 0..D {
                let gj = &gr[jn * D + d];
                for l in 0..VS {
                    adv[l] += ag[d][l] * gj[l];
                }
            }
            for inode in 0..nn {
                let a = &mut ae[inode * nn + jn];
                for l in 0..VS {
                    a[l] += jac[l] * n[inode] * adv[l];
                }
            }
        }
    }
}

pub(crate) fn gradient_coupling<const VS: usize, const D: usize>(
    re: &ReferenceElement,
    detjw: &[[f64; VS]],
    grad: &[[f64; VS]],
    component: usize,
    ae: &mut [[f64; VS]],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = &detjw[ig];
        let n = re.shape_at(ig);
        let gr = &grad[ig * nn * D..(ig + 1) * nn * D];
        for jn in 0..nn {
            let gj = &gr[jn * D + component];
            for inode in 0..nn {
                let a = &mut ae[inode * nn + jn];
                for l in 0..VS {
                    a[l] += jac[l] * n[inode] * gj[l];
                }
            }
        }
    }
}

#[inline(always)]
fn gauss_velocity<const VS: usize, const D: usize>(
    n: &[f64],
    gr: &[[f64; VS]],
    u: &[[f64; VS]],
) -> ([[f64; VS]; D], [[[f64; VS]; D]; D]) {
    let mut ug = [[0.0; VS]; D];
    let mut g = [[[0.0; VS]; D]; D];
    for inode in 0..n.len() {
        for c in 0..D {
            let uc = &u[inode * D + c];
            for l in 0..VS {
                ug[c][l] += n[inode] * uc[l];
            }
            for d in 0..D {
                let gd = &gr[inode * D + d];
                for l in 0..VS {
                    g[c][d][l] += gd[l] * uc[l];
                }
            }
        }
    }
    (ug, g)
}

pub(crate) fn momentum<const VS: usize, const D: usize>(
    re: &ReferenceElement,
    detjw: &[[f64; VS]],
    grad: &[[f64; VS]],
    u: &[[f64; VS]],
    rho: f64,
    mu: f64,
    r: &mut [[f64; VS]],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = &detjw[ig];
        let n = re.shape_at(ig);
        let gr = &grad[ig * nn * D..(ig + 1) * nn * D];
        let (ug, g) = gauss_velocity::<VS, D>(n, gr, u);
        let mut conv = [[0.0; VS]; D];
        let mut stress = [[[0.0; VS]; D]; D];
        for l in 0..VS {
            let mut ul = [0.0; D];
            let mut gl = [[0.0; D]; D];
            for c in 0..D {
                ul[c] = ug[c][l];
                for d in 0..D {
                    gl[c][d] = g[c][d][l];
                }
            }
            let (cv, st) = momentum_point::<D>(&ul, &gl, rho, mu);
            for c in 0..D {
                conv[c][l] = cv[c];
                for d in 0..D {
                    stress[c][d][l] = st[c][d];
                }
            }
        }
        for inode in 0..nn {
            for c in 0..D {
                let mut t = [0.0; VS];
                for l in 0..VS {
                    t[l] = n[inode] * conv[c][l];
                }
                for d in 0..D {
                    let gd = &gr[inode * D + d];
                    for l in 0..VS {
                        t[l] += stress[c][d][l] * gd[l];
                    }
                }
                let rv = &mut r[inode * D + c];
                for l in 0..VS {
                    rv[l] -= jac[l] * t[l];
                }
            }
        }
    }
}

pub(crate) fn scalar_transport<const VS: usize, const D: usize>(
    re: &ReferenceElement,
    detjw: &[[f64; VS]],
    grad: &[[f64; VS]],
    phi: &[[f64; VS]],
    u: &[[f64; VS]],
    kappa: f64,
    r: &mut [[f64; VS]],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = &detjw[ig];
        let n = re.shape_at(ig);
        let gr = &grad[ig * nn * D..(ig + 1) * nn * D];
        let mut ug = [[0.0; VS]; D];
        let mut gphi = [[0.0; VS]; D];
        for inode in 0..nn {
            for d in 0..D {
                let (uv, gd, pv) = (&u[inode * D + d], &gr[inode * D + d], &phi[inode]);
                for l in 0..VS {
                    ug[d][l] += n[inode] * uv[l];
                    gphi[d][l] += gd[l] * pv[l];
                }
            }
        }
        let mut adv = [0.0; VS];
        for d in 0..D {
            for l in 0..VS {
                adv[l] += ug[d][l] * gphi[d][l];
            }
        }
        for inode in 0..nn {
            let mut diff = [0.0; VS];
            for d in 0..D {
                let gd = &gr[inode * D + d];
                for l in 0..VS {
                    diff[l] += gd[l] * gphi[d][l];
                }
            }
            let rv = &mut r[inode];
            for l in 0..VS {
                rv[l] -= jac[l] * (n[inode] * adv[l] + kappa * diff[l]);
            }
        }
    }
}

pub(crate) fn divergence<const VS: usize, const D: usize>(
    re: &ReferenceElement,
    detjw: &[[f64; VS]],
    grad: &[[f64; VS]],
    u: &[[f64; VS]],
    r: &mut [[f64; VS]],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = &detjw[ig];
        let n = re.shape_at(ig);
        let gr = &grad[ig * nn * D..(ig + 1) * nn * D];
        let mut div = [0.0; VS];
        for inode in 0..nn {
            for c in 0..D {
                let (gd, uc) = (&gr[inode * D + c], &u[inode * D + c]);
                for l in 0..VS {
                    div[l] += gd[l] * uc[l];
                }
            }
        }
        for inode in 0..nn {
            let rv = &mut r[inode];
            for l in 0..VS {
                rv[l] += jac[l] * n[inode] * div[l];
            }
        }
    }
}

pub(crate) fn gradient<const VS: usize, const D: usize>(
    re: &ReferenceElement,
    detjw: &[[f64; VS]],
    grad: &[[f64; VS]],
    p: &[[f64; VS]],
    r: &mut [[f64; VS]],
) {
    let nn = re.nnodes;
    for ig in 0..re.ngauss {
        let jac = &detjw[ig];
        let n = re.shape_at(ig);
        let gr = &grad[ig * nn * D..(ig + 1) * nn * D];
        let mut gp = [[0.0; VS]; D];
        for inode in 0..nn {
            for d in 0..D {
                let (gd, pv) = (&gr[inode * D + d], &p[inode]);
                for l in 0..VS {
                    gp[d][l] += gd[l] * pv[l];
                }
            }
        }
        for inode in 0..nn {
            for c in 0..D {
                let rv = &mut r[inode * D + c];
                for l in 0..VS {
                    rv[l] += jac[l] * n[inode] * gp[c][l];
                }
            }
        }
    }
}

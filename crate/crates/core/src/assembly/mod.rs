//! Element and boundary assembly into CSR matrices and nodal vectors.
//!
//! [`Assembler`] runs a whole-mesh sweep in one of two layouts:
//!
//! * [`Layout::Scalar`]: one element at a time, geometry and element
//!   matrix computed on per-element scratch, then scattered.
//! * [`Layout::Packed`]: one pack of `vector_size` same-type elements at a
//!   time, every loop carrying a trailing lane index.
//!
//! Both layouts scatter through a precomputed [`ScatterMap`] in element
//! order, so for a given mesh the assembled values agree bit for bit
//! across layouts and lane widths.

pub mod boundary;
mod packed;
mod pointwise;
mod scalar;
pub mod scatter;

use std::ops::Range;

use rayon::prelude::*;

use crate::elements::{compute_geometry_into, reference_element, ElementGeometry, ReferenceElement};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::packing::{
    build_packs, dispatch_lanes, geometry_pack, inverted, lanes, lanes_mut, LaneBuf, PackConfig,
    PackSet, PackedGeometry,
};
use crate::sparse::CsrMatrix;

pub use boundary::BoundaryAssembler;
pub use scatter::{build_scatter_map, node_pattern, ScatterMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Scalar,
    Packed(PackConfig),
}

impl Layout {
    pub fn packed(vector_size: usize) -> Result<Self> {
        Ok(Layout::Packed(PackConfig::new(vector_size)?))
    }

    pub fn vector_size(&self) -> usize {
        match self {
            Layout::Scalar => 1,
            Layout::Packed(cfg) => cfg.vector_size,
        }
    }
}

/// Kernels producing an `nnodes x nnodes` element matrix.
#[derive(Debug, Clone, Copy)]
pub enum MatrixKernel<'a> {
    /// `sum_g w N_i N_j`
    Mass,
    /// `sum_g w grad N_i . grad N_j`
    Laplacian,
    /// `sum_g w N_i (a . grad N_j)`, `a` a nodal vector field.
    Convection { velocity: &'a [f64] },
    /// `sum_g w N_i dN_j/dx_c`; the transpose-free building block of the
    /// discrete divergence and gradient.
    GradientCoupling { component: usize },
}

/// Kernels producing an element vector (`ncomp` values per node).
#[derive(Debug, Clone, Copy)]
pub enum VectorKernel<'a> {
    /// Weak momentum residual in the energy/momentum-conserving form
    /// `-(N_i rho (2 u.S + (div u) u - 1/2 grad|u|^2) + 2 mu S : grad N_i)`.
    Momentum { velocity: &'a [f64], rho: f64, mu: f64 },
    /// `-(N_i u.grad phi + kappa grad N_i . grad phi)`
    ScalarTransport { phi: &'a [f64], velocity: &'a [f64], kappa: f64 },
    /// `N_i div u`
    Divergence { velocity: &'a [f64] },
    /// `N_i grad p`
    Gradient { pressure: &'a [f64] },
}

impl VectorKernel<'_> {
    pub fn ncomp(&self, dim: usize) -> usize {
        match self {
            VectorKernel::Momentum { .. } | VectorKernel::Gradient { .. } => dim,
            _ => 1,
        }
    }

    fn check(&self, nnode: usize, dim: usize) -> Result<()> {
        let need = |f: &[f64], n: usize| {
            if f.len() == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: n,
                    got: f.len(),
                })
            }
        };
        match *self {
            VectorKernel::Momentum { velocity, .. } | VectorKernel::Divergence { velocity } => {
                need(velocity, nnode * dim)
            }
            VectorKernel::ScalarTransport { phi, velocity, .. } => {
                need(phi, nnode)?;
                need(velocity, nnode * dim)
            }
            VectorKernel::Gradient { pressure } => need(pressure, nnode),
        }
    }
}

impl MatrixKernel<'_> {
    fn check(&self, nnode: usize, dim: usize) -> Result<()> {
        match *self {
            MatrixKernel::Convection { velocity } if velocity.len() != nnode * dim => {
                Err(Error::DimensionMismatch {
                    expected: nnode * dim,
                    got: velocity.len(),
                })
            }
            MatrixKernel::GradientCoupling { component } if component >= dim => {
                Err(Error::config(format!("component {component} out of range for {dim}D")))
            }
            _ => Ok(()),
        }
    }
}

/// Whole-mesh assembly in a fixed layout.
#[derive(Debug, Clone)]
pub struct Assembler<'m> {
    mesh: &'m Mesh,
    layout: Layout,
    refs: Vec<ReferenceElement>,
    packs: Vec<PackSet>,
    maps: Vec<ScatterMap>,
    pattern: CsrMatrix,
    threads: usize,
}

impl<'m> Assembler<'m> {
    /// Packs the mesh and precomputes the scatter maps. The mesh must be
    /// grouped by type (see [`crate::mesh::renumber_by_type`]).
    pub fn new(mesh: &'m Mesh, layout: Layout) -> Result<Self> {
        let cfg = match layout {
            Layout::Scalar => PackConfig { vector_size: 1 },
            Layout::Packed(cfg) => cfg,
        };
        let packs = build_packs(mesh, cfg)?;
        let pattern = node_pattern(mesh);
        let maps = packs
            .iter()
            .map(|p| build_scatter_map(p, &pattern))
            .collect::<Result<Vec<_>>>()?;
        let refs = packs.iter().map(|p| reference_element(p.kind)).collect();
        Ok(Self {
            mesh,
            layout,
            refs,
            packs,
            maps,
            pattern,
            threads: 1,
        })
    }

    /// Worker count for sweeps; above one, packs are split into contiguous
    /// ranges that accumulate into private copies merged in range order.
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn packs(&self) -> &[PackSet] {
        &self.packs
    }

    pub fn scatter_maps(&self) -> &[ScatterMap] {
        &self.maps
    }

    pub fn reference(&self, group: usize) -> &ReferenceElement {
        &self.refs[group]
    }

    /// Zero-valued matrix with the mesh's node-adjacency pattern.
    pub fn matrix(&self) -> CsrMatrix {
        self.pattern.clone()
    }

    /// Adds the kernel's element matrices of every group into `out`.
    pub fn assemble_matrix(&self, kernel: &MatrixKernel, out: &mut CsrMatrix) -> Result<()> {
        for g in 0..self.packs.len() {
            self.assemble_matrix_group(g, kernel, out)?;
        }
        Ok(())
    }

    /// Adds the kernel's element vectors of every group into `out`
    /// (`ncomp` interleaved values per node).
    pub fn assemble_vector(&self, kernel: &VectorKernel, out: &mut [f64]) -> Result<()> {
        for g in 0..self.packs.len() {
            self.assemble_vector_group(g, kernel, out)?;
        }
        Ok(())
    }

    pub fn assemble_matrix_group(&self, group: usize, kernel: &MatrixKernel, out: &mut CsrMatrix) -> Result<()> {
        if !out.same_pattern(&self.pattern) {
            return Err(Error::config("target matrix does not carry the mesh pattern"));
        }
        kernel.check(self.mesh.nnode(), self.mesh.dim())?;
        let pack = &self.packs[group];
        let map = &self.maps[group];
        let re = &self.refs[group];
        let nn = re.nnodes;
        self.run_split(pack.npacks, &mut out.vals, |range, vals| match self.layout {
            Layout::Scalar => dispatch_dim(re.dim, |d| match d {
                2 => element_matrices::<2>(self.mesh, re, pack, kernel, range, |e, ae| {
                    scatter_element(map.pack(e), ae, vals)
                }),
                _ => element_matrices::<3>(self.mesh, re, pack, kernel, range, |e, ae| {
                    scatter_element(map.pack(e), ae, vals)
                }),
            }),
            Layout::Packed(_) => dispatch_lanes!(
                pack.vector_size,
                re.dim,
                pack_matrices::<_, _>(self.mesh.coords(), re, pack, kernel, range, &mut |p: usize,
                                                                                           ae: &[f64]| {
                    scatter_lanes(pack.vector_size, map.pack(p), nn, ae, vals)
                })
            ),
        })
    }

    pub fn assemble_vector_group(&self, group: usize, kernel: &VectorKernel, out: &mut [f64]) -> Result<()> {
        let dim = self.mesh.dim();
        kernel.check(self.mesh.nnode(), dim)?;
        let ncomp = kernel.ncomp(dim);
        if out.len() != self.mesh.nnode() * ncomp {
            return Err(Error::DimensionMismatch {
                expected: self.mesh.nnode() * ncomp,
                got: out.len(),
            });
        }
        let pack = &self.packs[group];
        let re = &self.refs[group];
        let nn = re.nnodes;
        self.run_split(pack.npacks, out, |range, out| match self.layout {
            Layout::Scalar => dispatch_dim(dim, |d| {
                let mut sink = |e: usize, r: &[f64]| {
                    for (i, &node) in pack.pack_connectivity(e).iter().enumerate() {
                        for c in 0..ncomp {
                            out[node * ncomp + c] += r[i * ncomp + c];
                        }
                    }
                };
                match d {
                    2 => element_vectors::<2>(self.mesh, re, pack, kernel, range, &mut sink),
                    _ => element_vectors::<3>(self.mesh, re, pack, kernel, range, &mut sink),
                }
            }),
            Layout::Packed(_) => dispatch_lanes!(
                pack.vector_size,
                dim,
                pack_vectors::<_, _>(self.mesh.coords(), re, pack, kernel, range, &mut |p: usize,
                                                                                          r: &[f64]| {
                    scatter_vector_lanes(pack.vector_size, pack.pack_connectivity(p), nn, ncomp, r, out)
                })
            ),
        })
    }

    /// Element matrices of one group in element order, `nnodes^2` values
    /// each (row-major), computed with this assembler's layout.
    pub fn element_matrices(&self, group: usize, kernel: &MatrixKernel) -> Result<Vec<f64>> {
        kernel.check(self.mesh.nnode(), self.mesh.dim())?;
        let pack = &self.packs[group];
        let re = &self.refs[group];
        let nn = re.nnodes;
        let mut out = vec![0.0; pack.nelem * nn * nn];
        let range = 0..pack.npacks;
        match self.layout {
            Layout::Scalar => dispatch_dim(re.dim, |d| {
                let sink = |e: usize, ae: &[f64]| out[e * nn * nn..(e + 1) * nn * nn].copy_from_slice(ae);
                match d {
                    2 => element_matrices::<2>(self.mesh, re, pack, kernel, range, sink),
                    _ => element_matrices::<3>(self.mesh, re, pack, kernel, range, sink),
                }
            }),
            Layout::Packed(_) => {
                let vs = pack.vector_size;
                dispatch_lanes!(
                    vs,
                    re.dim,
                    pack_matrices::<_, _>(self.mesh.coords(), re, pack, kernel, range, &mut |p: usize,
                                                                                               ae: &[f64]| {
                        for l in 0..pack.active_lanes(p) {
                            let e = p * vs + l;
                            for ij in 0..nn * nn {
                                out[e * nn * nn + ij] = ae[ij * vs + l];
                            }
                        }
                    })
                )
            }
        }?;
        Ok(out)
    }

    fn run_split<F>(&self, npacks: usize, out: &mut [f64], work: F) -> Result<()>
    where
        F: Fn(Range<usize>, &mut [f64]) -> Result<()> + Sync,
    {
        if self.threads == 1 || npacks < 2 * self.threads {
            return work(0..npacks, out);
        }
        let chunk = npacks.div_ceil(self.threads);
        let len = out.len();
        let replicas = (0..self.threads)
            .into_par_iter()
            .map(|t| {
                let mut local = vec![0.0; len];
                let range = (t * chunk).min(npacks)..((t + 1) * chunk).min(npacks);
                work(range, &mut local).map(|_| local)
            })
            .collect::<Result<Vec<_>>>()?;
        for local in replicas {
            for (o, v) in out.iter_mut().zip(local) {
                *o += v;
            }
        }
        Ok(())
    }
}

fn dispatch_dim<T>(dim: usize, f: impl FnOnce(usize) -> T) -> T {
    f(dim)
}

#[inline(always)]
fn scatter_element(map: &[usize], ae: &[f64], vals: &mut [f64]) {
    for (&k, &v) in map.iter().zip(ae) {
        vals[k] += v;
    }
}

fn scatter_lanes(vs: usize, map: &[usize], nn: usize, ae: &[f64], vals: &mut [f64]) {
    macro_rules! go {
        ($($w:literal),*) => {
            match vs {
                $($w => scatter::scatter_matrix_pack::<$w>(map, nn, lanes::<$w>(ae), vals),)*
                _ => unreachable!(),
            }
        };
    }
    go!(1, 2, 4, 8, 16, 32)
}

fn scatter_vector_lanes(vs: usize, conn: &[usize], nn: usize, ncomp: usize, r: &[f64], out: &mut [f64]) {
    macro_rules! go {
        ($($w:literal),*) => {
            match vs {
                $($w => scatter::scatter_vector_pack::<$w>(conn, nn, ncomp, lanes::<$w>(r), out),)*
                _ => unreachable!(),
            }
        };
    }
    go!(1, 2, 4, 8, 16, 32)
}

fn element_error(pack: &PackSet, e: usize, err: Error) -> Error {
    match err {
        Error::InvertedElement { gauss, det, .. } => Error::InvertedElement {
            element: Some(pack.first_element + e),
            pack: None,
            lane: None,
            gauss,
            det,
        },
        other => other,
    }
}

fn gather_element(nodes: &[usize], field: &[f64], ncomp: usize, out: &mut Vec<f64>) {
    out.clear();
    for &n in nodes {
        out.extend_from_slice(&field[n * ncomp..(n + 1) * ncomp]);
    }
}

/// Element-at-a-time sweep over elements `range` of one group; `sink`
/// receives each element matrix.
fn element_matrices<const D: usize>(
    mesh: &Mesh,
    re: &ReferenceElement,
    pack: &PackSet,
    kernel: &MatrixKernel,
    range: Range<usize>,
    mut sink: impl FnMut(usize, &[f64]),
) -> Result<()> {
    let nn = re.nnodes;
    let mut xs = Vec::with_capacity(nn * D);
    let mut field = Vec::with_capacity(nn * D);
    let mut geo = ElementGeometry::for_reference(re);
    let mut ae = vec![0.0; nn * nn];
    for e in range {
        let nodes = pack.pack_connectivity(e);
        mesh.gather_coords(nodes, &mut xs);
        compute_geometry_into(re, &xs, &mut geo).map_err(|err| element_error(pack, e, err))?;
        ae.fill(0.0);
        match *kernel {
            MatrixKernel::Mass => scalar::mass(re, &geo, &mut ae),
            MatrixKernel::Laplacian => scalar::laplacian::<D>(re, &geo, &mut ae),
            MatrixKernel::Convection { velocity } => {
                gather_element(nodes, velocity, D, &mut field);
                scalar::convection::<D>(re, &geo, &field, &mut ae)
            }
            MatrixKernel::GradientCoupling { component } => {
                scalar::gradient_coupling::<D>(re, &geo, component, &mut ae)
            }
        }
        sink(e, &ae);
    }
    Ok(())
}

fn element_vectors<const D: usize>(
    mesh: &Mesh,
    re: &ReferenceElement,
    pack: &PackSet,
    kernel: &VectorKernel,
    range: Range<usize>,
    sink: &mut impl FnMut(usize, &[f64]),
) -> Result<()> {
    let nn = re.nnodes;
    let ncomp = kernel.ncomp(D);
    let mut xs = Vec::with_capacity(nn * D);
    let mut f1 = Vec::with_capacity(nn * D);
    let mut f2 = Vec::with_capacity(nn);
    let mut geo = ElementGeometry::for_reference(re);
    let mut r = vec![0.0; nn * ncomp];
    for e in range {
        let nodes = pack.pack_connectivity(e);
        mesh.gather_coords(nodes, &mut xs);
        compute_geometry_into(re, &xs, &mut geo).map_err(|err| element_error(pack, e, err))?;
        r.fill(0.0);
        match *kernel {
            VectorKernel::Momentum { velocity, rho, mu } => {
                gather_element(nodes, velocity, D, &mut f1);
                scalar::momentum::<D>(re, &geo, &f1, rho, mu, &mut r)
            }
            VectorKernel::ScalarTransport { phi, velocity, kappa } => {
                gather_element(nodes, velocity, D, &mut f1);
                gather_element(nodes, phi, 1, &mut f2);
                scalar::scalar_transport::<D>(re, &geo, &f2, &f1, kappa, &mut r)
            }
            VectorKernel::Divergence { velocity } => {
                gather_element(nodes, velocity, D, &mut f1);
                scalar::divergence::<D>(re, &geo, &f1, &mut r)
            }
            VectorKernel::Gradient { pressure } => {
                gather_element(nodes, pressure, 1, &mut f2);
                scalar::gradient::<D>(re, &geo, &f2, &mut r)
            }
        }
        sink(e, &r);
    }
    Ok(())
}

/// Gathers a nodal field into lane rows: `out[i * ncomp + c][l]`.
#[inline(always)]
fn gather_lanes<const VS: usize>(conn: &[usize], field: &[f64], ncomp: usize, out: &mut [[f64; VS]]) {
    let nn = conn.len() / VS;
    for i in 0..nn {
        for c in 0..ncomp {
            let row = &mut out[i * ncomp + c];
            for l in 0..VS {
                row[l] = field[conn[i * VS + l] * ncomp + c];
            }
        }
    }
}

struct PackScratch {
    x: LaneBuf,
    detjw: LaneBuf,
    grad: LaneBuf,
    f1: LaneBuf,
    f2: LaneBuf,
    out: LaneBuf,
}

impl PackScratch {
    fn new(re: &ReferenceElement, vs: usize, out_len: usize) -> Self {
        let (nn, d, ng) = (re.nnodes, re.dim, re.ngauss);
        Self {
            x: LaneBuf::zeros(nn * d * vs),
            detjw: LaneBuf::zeros(ng * vs),
            grad: LaneBuf::zeros(ng * nn * d * vs),
            f1: LaneBuf::zeros(nn * d * vs),
            f2: LaneBuf::zeros(nn * vs),
            out: LaneBuf::zeros(out_len * vs),
        }
    }
}

/// Pack-at-a-time sweep; `sink` receives each pack's element matrices as
/// a flat `[in * nn + jn][lane]` buffer.
fn pack_matrices<const VS: usize, const D: usize>(
    coords: &[f64],
    re: &ReferenceElement,
    pack: &PackSet,
    kernel: &MatrixKernel,
    range: Range<usize>,
    sink: &mut dyn FnMut(usize, &[f64]),
) -> Result<()> {
    let nn = re.nnodes;
    let mut s = PackScratch::new(re, VS, nn * nn);
    for p in range {
        let conn = pack.pack_connectivity(p);
        let detjw = lanes_mut::<VS>(&mut s.detjw);
        let grad = lanes_mut::<VS>(&mut s.grad);
        geometry_pack::<VS, D>(re, coords, conn, pack.active_lanes(p), lanes_mut(&mut s.x), detjw, grad)
            .map_err(|f| inverted(pack, p, f))?;
        s.out.fill(0.0);
        let ae = lanes_mut::<VS>(&mut s.out);
        match *kernel {
            MatrixKernel::Mass => packed::mass::<VS>(re, detjw, ae),
            MatrixKernel::Laplacian => packed::laplacian::<VS, D>(re, detjw, grad, ae),
            MatrixKernel::Convection { velocity } => {
                let a = lanes_mut::<VS>(&mut s.f1);
                gather_lanes::<VS>(conn, velocity, D, a);
                packed::convection::<VS, D>(re, detjw, grad, a, ae)
            }
            MatrixKernel::GradientCoupling { component } => {
                packed::gradient_coupling::<VS, D>(re, detjw, grad, component, ae)
            }
        }
        sink(p, &s.out);
    }
    Ok(())
}

fn pack_vectors<const VS: usize, const D: usize>(
    coords: &[f64],
    re: &ReferenceElement,
    pack: &PackSet,
    kernel: &VectorKernel,
    range: Range<usize>,
    sink: &mut dyn FnMut(usize, &[f64]),
) -> Result<()> {
    let nn = re.nnodes;
    let ncomp = kernel.ncomp(D);
    let mut s = PackScratch::new(re, VS, nn * ncomp);
    for p in range {
        let conn = pack.pack_connectivity(p);
        let detjw = lanes_mut::<VS>(&mut s.detjw);
        let grad = lanes_mut::<VS>(&mut s.grad);
        geometry_pack::<VS, D>(re, coords, conn, pack.active_lanes(p), lanes_mut(&mut s.x), detjw, grad)
            .map_err(|f| inverted(pack, p, f))?;
        s.out.fill(0.0);
        let r = lanes_mut::<VS>(&mut s.out);
        let f1 = lanes_mut::<VS>(&mut s.f1);
        let f2 = lanes_mut::<VS>(&mut s.f2);
        match *kernel {
            VectorKernel::Momentum { velocity, rho, mu } => {
                gather_lanes::<VS>(conn, velocity, D, f1);
                packed::momentum::<VS, D>(re, detjw, grad, f1, rho, mu, r)
            }
            VectorKernel::ScalarTransport { phi, velocity, kappa } => {
                gather_lanes::<VS>(conn, velocity, D, f1);
                gather_lanes::<VS>(conn, phi, 1, f2);
                packed::scalar_transport::<VS, D>(re, detjw, grad, f2, f1, kappa, r)
            }
            VectorKernel::Divergence { velocity } => {
                gather_lanes::<VS>(conn, velocity, D, f1);
                packed::divergence::<VS, D>(re, detjw, grad, f1, r)
            }
            VectorKernel::Gradient { pressure } => {
                gather_lanes::<VS>(conn, pressure, 1, f2);
                packed::gradient::<VS, D>(re, detjw, grad, f2, r)
            }
        }
        sink(p, &s.out);
    }
    Ok(())
}

/// Element matrix of one element from precomputed geometry (element loop).
pub fn assemble_element_scalar(
    kernel: &MatrixKernel,
    re: &ReferenceElement,
    geo: &ElementGeometry,
    nodes: &[usize],
) -> Result<Vec<f64>> {
    let nn = re.nnodes;
    if nodes.len() != nn {
        return Err(Error::DimensionMismatch {
            expected: nn,
            got: nodes.len(),
        });
    }
    let mut ae = vec![0.0; nn * nn];
    let mut field = Vec::new();
    macro_rules! run {
        ($d:literal) => {
            match *kernel {
                MatrixKernel::Mass => scalar::mass(re, geo, &mut ae),
                MatrixKernel::Laplacian => scalar::laplacian::<$d>(re, geo, &mut ae),
                MatrixKernel::Convection { velocity } => {
                    gather_element(nodes, velocity, $d, &mut field);
                    scalar::convection::<$d>(re, geo, &field, &mut ae)
                }
                MatrixKernel::GradientCoupling { component } => {
                    scalar::gradient_coupling::<$d>(re, geo, component, &mut ae)
                }
            }
        };
    }
    if re.dim == 2 {
        run!(2)
    } else {
        run!(3)
    }
    Ok(ae)
}

/// Element matrices of every pack from precomputed packed geometry, laid
/// out `((pack * nn + in) * nn + jn) * vs + lane`. Padded lanes are zero.
pub fn assemble_element_packed(
    kernel: &MatrixKernel,
    packs: &PackSet,
    re: &ReferenceElement,
    geom: &PackedGeometry,
) -> Result<LaneBuf> {
    let (vs, nn) = (packs.vector_size, re.nnodes);
    let mut out = LaneBuf::zeros(packs.npacks * nn * nn * vs);
    dispatch_lanes!(vs, re.dim, packed_from_geometry::<_, _>(kernel, packs, re, geom, &mut out));
    Ok(out)
}

fn packed_from_geometry<const VS: usize, const D: usize>(
    kernel: &MatrixKernel,
    packs: &PackSet,
    re: &ReferenceElement,
    geom: &PackedGeometry,
    out: &mut LaneBuf,
) {
    let nn = re.nnodes;
    let mut a = LaneBuf::zeros(nn * D * VS);
    let all = lanes_mut::<VS>(out);
    for p in 0..packs.npacks {
        let detjw = lanes::<VS>(geom.detjw_pack(p));
        let grad = lanes::<VS>(geom.grad_pack(p));
        let ae = &mut all[p * nn * nn..(p + 1) * nn * nn];
        match *kernel {
            MatrixKernel::Mass => packed::mass::<VS>(re, detjw, ae),
            MatrixKernel::Laplacian => packed::laplacian::<VS, D>(re, detjw, grad, ae),
            MatrixKernel::Convection { velocity } => {
                let av = lanes_mut::<VS>(&mut a);
                gather_lanes::<VS>(packs.pack_connectivity(p), velocity, D, av);
                packed::convection::<VS, D>(re, detjw, grad, av, ae)
            }
            MatrixKernel::GradientCoupling { component } => {
                packed::gradient_coupling::<VS, D>(re, detjw, grad, component, ae)
            }
        }
    }
}

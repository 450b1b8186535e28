//! Lane-packed element storage.
//!
//! Each type group is cut into packs of `vector_size` consecutive elements.
//! Every per-element tensor gains a trailing lane index that varies
//! fastest, so for a fixed `(node, pack)` the lanes of one pack sit in one
//! contiguous, aligned run and a kernel can process the whole pack with
//! unit-stride vector instructions. The tail of the last pack is padded:
//! padded lanes repeat the connectivity of the last real element of their
//! pack and carry a zero Jacobian weight, so every downstream contribution
//! from them is an exact zero and scatter can run without a lane test.

use std::ops::{Deref, DerefMut};

use crate::elements::{det_inv, ReferenceElement};
use crate::error::{Error, Result};
use crate::mesh::{ElementType, Mesh};

pub const SUPPORTED_VECTOR_SIZES: [usize; 6] = [1, 2, 4, 8, 16, 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PackConfig {
    pub vector_size: usize,
}

impl Default for PackConfig {
    fn default() -> Self {
        Self { vector_size: 8 }
    }
}

impl PackConfig {
    pub fn new(vector_size: usize) -> Result<Self> {
        if SUPPORTED_VECTOR_SIZES.contains(&vector_size) {
            Ok(Self { vector_size })
        } else {
            Err(Error::config(format!(
                "vector size must be one of {SUPPORTED_VECTOR_SIZES:?}, got {vector_size}"
            )))
        }
    }
}

/// Widest supported lane run, in bytes.
pub const LANE_ALIGN: usize = 256;

#[derive(Clone, Copy)]
#[repr(C, align(256))]
struct Block([f64; 32]);

/// `f64` buffer whose start is aligned to [`LANE_ALIGN`] bytes.
#[derive(Clone)]
pub struct LaneBuf {
    blocks: Vec<Block>,
    len: usize,
}

impl LaneBuf {
    pub fn zeros(len: usize) -> Self {
        Self {
            blocks: vec![Block([0.0; 32]); len.div_ceil(32)],
            len,
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.iter_mut().for_each(|x| *x = v);
    }
}

impl Deref for LaneBuf {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        // SAFETY: `Block` is `repr(C)` over `[f64; 32]`, so the blocks form a
        // contiguous run of initialised f64 at least `len` long.
        unsafe { std::slice::from_raw_parts(self.blocks.as_ptr().cast::<f64>(), self.len) }
    }
}

impl DerefMut for LaneBuf {
    fn deref_mut(&mut self) -> &mut [f64] {
        // SAFETY: as in `deref`, with unique access through `&mut self`.
        unsafe { std::slice::from_raw_parts_mut(self.blocks.as_mut_ptr().cast::<f64>(), self.len) }
    }
}

impl std::fmt::Debug for LaneBuf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl PartialEq for LaneBuf {
    fn eq(&self, other: &Self) -> bool {
        self[..] == other[..]
    }
}

/// One type group cut into packs.
#[derive(Debug, Clone, PartialEq)]
pub struct PackSet {
    pub kind: ElementType,
    pub vector_size: usize,
    pub npacks: usize,
    pub nelem: usize,
    /// Global id of the group's first element.
    pub first_element: usize,
    /// Node ids at `(pack * nnodes + node) * vector_size + lane`.
    connectivity: Vec<usize>,
    /// `pack * vector_size + lane`
    active: Vec<bool>,
}

impl PackSet {
    pub fn nnodes(&self) -> usize {
        self.kind.nnodes()
    }

    /// Lane-major connectivity of all packs.
    pub fn connectivity(&self) -> &[usize] {
        &self.connectivity
    }

    /// Connectivity of one pack, `nnodes * vector_size` entries.
    #[inline(always)]
    pub fn pack_connectivity(&self, pack: usize) -> &[usize] {
        let s = self.nnodes() * self.vector_size;
        &self.connectivity[pack * s..(pack + 1) * s]
    }

    /// Node of `(pack, node, lane)`.
    pub fn node(&self, pack: usize, node: usize, lane: usize) -> usize {
        self.connectivity[(pack * self.nnodes() + node) * self.vector_size + lane]
    }

    pub fn is_active(&self, pack: usize, lane: usize) -> bool {
        self.active[pack * self.vector_size + lane]
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    pub fn active_lanes(&self, pack: usize) -> usize {
        (self.nelem - pack * self.vector_size).min(self.vector_size)
    }

    pub fn padded_lanes(&self) -> usize {
        self.npacks * self.vector_size - self.nelem
    }

    /// Global element id held by an active lane.
    pub fn element_id(&self, pack: usize, lane: usize) -> Option<usize> {
        self.is_active(pack, lane)
            .then(|| self.first_element + pack * self.vector_size + lane)
    }
}

/// Packs every non-empty group of a type-grouped mesh.
pub fn build_packs(mesh: &Mesh, cfg: PackConfig) -> Result<Vec<PackSet>> {
    PackConfig::new(cfg.vector_size)?;
    if !mesh.is_type_grouped() {
        return Err(Error::config("mesh must be renumbered by type before packing"));
    }
    let vs = cfg.vector_size;
    let offsets = mesh.group_offsets();
    let mut out = Vec::new();
    for (g, &first) in mesh.groups().iter().zip(&offsets) {
        let nelem = g.nelem();
        if nelem == 0 {
            continue;
        }
        let nn = g.kind.nnodes();
        let npacks = nelem.div_ceil(vs);
        let mut connectivity = vec![0; npacks * nn * vs];
        let mut active = vec![false; npacks * vs];
        for p in 0..npacks {
            let last = (p * vs + vs).min(nelem) - 1;
            for l in 0..vs {
                let e = (p * vs + l).min(last);
                active[p * vs + l] = p * vs + l < nelem;
                for (i, &node) in g.element(e).iter().enumerate() {
                    connectivity[(p * nn + i) * vs + l] = node;
                }
            }
        }
        out.push(PackSet {
            kind: g.kind,
            vector_size: vs,
            npacks,
            nelem,
            first_element: first,
            connectivity,
            active,
        });
    }
    Ok(out)
}

/// Geometry of every pack of one [`PackSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct PackedGeometry {
    pub vector_size: usize,
    pub npacks: usize,
    pub ngauss: usize,
    pub nnodes: usize,
    pub dim: usize,
    /// `(pack * ngauss + ig) * vs + lane`; exactly zero on padded lanes.
    pub detjw: LaneBuf,
    /// `(((pack * ngauss + ig) * nnodes + in) * dim + d) * vs + lane`
    pub grad: LaneBuf,
}

impl PackedGeometry {
    pub fn detjw_pack(&self, pack: usize) -> &[f64] {
        let s = self.ngauss * self.vector_size;
        &self.detjw[pack * s..(pack + 1) * s]
    }

    pub fn grad_pack(&self, pack: usize) -> &[f64] {
        let s = self.ngauss * self.nnodes * self.dim * self.vector_size;
        &self.grad[pack * s..(pack + 1) * s]
    }
}

/// Failure inside a pack: `(lane, gauss point, det J)`.
pub(crate) type LaneFailure = (usize, usize, f64);

pub(crate) fn inverted(pack: &PackSet, p: usize, (lane, gauss, det): LaneFailure) -> Error {
    Error::InvertedElement {
        element: pack.element_id(p, lane),
        pack: Some(p),
        lane: Some(lane),
        gauss,
        det,
    }
}

/// Jacobians of one pack in lane-major layout, lanes `nactive..` zeroed.
///
/// `x` receives the gathered node coordinates, `nnodes * D` lane rows.
#[inline(always)]
pub(crate) fn geometry_pack<const VS: usize, const D: usize>(
    re: &ReferenceElement,
    coords: &[f64],
    conn: &[usize],
    nactive: usize,
    x: &mut [[f64; VS]],
    detjw: &mut [[f64; VS]],
    grad: &mut [[f64; VS]],
) -> std::result::Result<(), LaneFailure> {
    let nn = re.nnodes;
    for inode in 0..nn {
        let nodes = &conn[inode * VS..(inode + 1) * VS];
        for a in 0..D {
            let row = &mut x[inode * D + a];
            for l in 0..VS {
                row[l] = coords[nodes[l] * D + a];
            }
        }
    }
    let mut mask = [0.0; VS];
    for (l, m) in mask.iter_mut().enumerate() {
        *m = if l < nactive { 1.0 } else { 0.0 };
    }
    for ig in 0..re.ngauss {
        let dn = re.dshape_at(ig);
        let mut jac = [[[0.0; VS]; D]; D];
        for inode in 0..nn {
            for a in 0..D {
                let xa = &x[inode * D + a];
                for b in 0..D {
                    let s = dn[inode * D + b];
                    for l in 0..VS {
                        jac[a][b][l] += xa[l] * s;
                    }
                }
            }
        }
        let mut det = [0.0; VS];
        let mut inv = [[[0.0; VS]; D]; D];
        for l in 0..VS {
            let mut j = [[0.0; D]; D];
            for a in 0..D {
                for b in 0..D {
                    j[a][b] = jac[a][b][l];
                }
            }
            let (d, iv) = det_inv::<D>(&j);
            det[l] = d;
            for a in 0..D {
                for b in 0..D {
                    inv[a][b][l] = iv[a][b];
                }
            }
        }
        if let Some(l) = (0..nactive).find(|&l| !(det[l] > 0.0)) {
            return Err((l, ig, det[l]));
        }
        let w = re.gauss_weights[ig];
        for l in 0..VS {
            detjw[ig][l] = det[l] * w * mask[l];
        }
        for inode in 0..nn {
            for a in 0..D {
                let mut g = [0.0; VS];
                for b in 0..D {
                    let s = dn[inode * D + b];
                    for l in 0..VS {
                        g[l] += s * inv[b][a][l];
                    }
                }
                grad[(ig * nn + inode) * D + a] = g;
            }
        }
    }
    Ok(())
}

/// Lane view of a flat buffer whose length is a multiple of `VS`.
#[inline(always)]
pub(crate) fn lanes<const VS: usize>(s: &[f64]) -> &[[f64; VS]] {
    let (v, rest) = s.as_chunks::<VS>();
    debug_assert!(rest.is_empty());
    v
}

#[inline(always)]
pub(crate) fn lanes_mut<const VS: usize>(s: &mut [f64]) -> &mut [[f64; VS]] {
    let (v, rest) = s.as_chunks_mut::<VS>();
    debug_assert!(rest.is_empty());
    v
}

/// Dispatches a const-generic `VS` (and `D`) call on runtime values.
macro_rules! dispatch_lanes {
    ($vs:expr, $dim:expr, $f:ident :: <_, _>($($arg:expr),* $(,)?)) => {
        match ($vs, $dim) {
            (1, 2) => $f::<1, 2>($($arg),*),
            (2, 2) => $f::<2, 2>($($arg),*),
            (4, 2) => $f::<4, 2>($($arg),*),
            (8, 2) => $f::<8, 2>($($arg),*),
            (16, 2) => $f::<16, 2>($($arg),*),
            (32, 2) => $f::<32, 2>($($arg),*),
            (1, 3) => $f::<1, 3>($($arg),*),
            (2, 3) => $f::<2, 3>($($arg),*),
            (4, 3) => $f::<4, 3>($($arg),*),
            (8, 3) => $f::<8, 3>($($arg),*),
            (16, 3) => $f::<16, 3>($($arg),*),
            (32, 3) => $f::<32, 3>($($arg),*),
            (vs, dim) => unreachable!("unsupported lane width {vs} / dim {dim}"),
        }
    };
}
pub(crate) use dispatch_lanes;

/// Jacobian weights and physical gradients for every pack of `packs`.
pub fn pack_geometry(packs: &PackSet, re: &ReferenceElement, coords: &[f64]) -> Result<PackedGeometry> {
    if re.kind != packs.kind {
        return Err(Error::config(format!(
            "reference element {} does not match pack type {}",
            re.kind, packs.kind
        )));
    }
    let dim = re.dim;
    let vs = packs.vector_size;
    let mut out = PackedGeometry {
        vector_size: vs,
        npacks: packs.npacks,
        ngauss: re.ngauss,
        nnodes: re.nnodes,
        dim,
        detjw: LaneBuf::zeros(packs.npacks * re.ngauss * vs),
        grad: LaneBuf::zeros(packs.npacks * re.ngauss * re.nnodes * dim * vs),
    };
    dispatch_lanes!(vs, dim, fill_geometry::<_, _>(packs, re, coords, &mut out))?;
    Ok(out)
}

fn fill_geometry<const VS: usize, const D: usize>(
    packs: &PackSet,
    re: &ReferenceElement,
    coords: &[f64],
    out: &mut PackedGeometry,
) -> Result<()> {
    let ng = re.ngauss;
    let gstride = ng * re.nnodes * D;
    let mut x = vec![[0.0; VS]; re.nnodes * D];
    let detjw = lanes_mut::<VS>(&mut out.detjw);
    let grad = lanes_mut::<VS>(&mut out.grad);
    for p in 0..packs.npacks {
        geometry_pack::<VS, D>(
            re,
            coords,
            packs.pack_connectivity(p),
            packs.active_lanes(p),
            &mut x,
            &mut detjw[p * ng..(p + 1) * ng],
            &mut grad[p * gstride..(p + 1) * gstride],
        )
        .map_err(|f| inverted(packs, p, f))?;
    }
    Ok(())
}

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::packing::PackSet;
use crate::sparse::CsrMatrix;

/// Node-to-node adjacency of the mesh as a zero-valued CSR matrix.
/// Every row holds its diagonal.
pub fn node_pattern(mesh: &Mesh) -> CsrMatrix {
    let mut rows: Vec<Vec<usize>> = (0..mesh.nnode()).map(|i| vec![i]).collect();
    for (_, _, nodes) in mesh.elements() {
        for &i in nodes {
            rows[i].extend_from_slice(nodes);
        }
    }
    CsrMatrix::from_rows(rows).expect("adjacency rows are in range")
}

/// Destination of every element-matrix entry in CSR value storage.
///
/// Vector scatter needs no extra table: the destination of `(lane, in)` is
/// the pack connectivity itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterMap {
    pub vector_size: usize,
    pub nnodes: usize,
    /// `((pack * nnodes + in) * nnodes + jn) * vector_size + lane`
    pub csr_index: Vec<usize>,
}

impl ScatterMap {
    #[inline(always)]
    pub fn pack(&self, pack: usize) -> &[usize] {
        let s = self.nnodes * self.nnodes * self.vector_size;
        &self.csr_index[pack * s..(pack + 1) * s]
    }

    pub fn index(&self, pack: usize, lane: usize, inode: usize, jnode: usize) -> usize {
        self.csr_index[((pack * self.nnodes + inode) * self.nnodes + jnode) * self.vector_size + lane]
    }
}

pub fn build_scatter_map(packs: &PackSet, csr: &CsrMatrix) -> Result<ScatterMap> {
    let (vs, nn) = (packs.vector_size, packs.nnodes());
    let mut csr_index = vec![0; packs.npacks * nn * nn * vs];
    for p in 0..packs.npacks {
        for i in 0..nn {
            for j in 0..nn {
                for l in 0..vs {
                    let (row, col) = (packs.node(p, i, l), packs.node(p, j, l));
                    csr_index[((p * nn + i) * nn + j) * vs + l] =
                        csr.find(row, col).ok_or(Error::PatternMismatch { row, col })?;
                }
            }
        }
    }
    Ok(ScatterMap {
        vector_size: vs,
        nnodes: nn,
        csr_index,
    })
}

/// Adds a pack of element matrices, lane by lane, in element order.
#[inline(always)]
pub(crate) fn scatter_matrix_pack<const VS: usize>(
    map: &[usize],
    nn: usize,
    ae: &[[f64; VS]],
    vals: &mut [f64],
) {
    for l in 0..VS {
        for ij in 0..nn * nn {
            vals[map[ij * VS + l]] += ae[ij][l];
        }
    }
}

/// Adds a pack of element vectors with `ncomp` components per node.
#[inline(always)]
pub(crate) fn scatter_vector_pack<const VS: usize>(
    conn: &[usize],
    nn: usize,
    ncomp: usize,
    r: &[[f64; VS]],
    out: &mut [f64],
) {
    for l in 0..VS {
        for i in 0..nn {
            let node = conn[i * VS + l];
            for c in 0..ncomp {
                out[node * ncomp + c] += r[i * ncomp + c][l];
            }
        }
    }
}

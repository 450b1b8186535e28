//! Unstructured mixed-element meshes.
//!
//! A [`Mesh`] stores node coordinates, element connectivity split into
//! per-type groups, and the exterior faces. Generators for structured
//! boxes live in [`generate`], the text format in [`io`], and the
//! type-grouping renumbering in [`renumber`].

pub mod generate;
pub mod io;
pub mod renumber;
pub mod samples;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use generate::{generate_box_mesh, generate_mixed_mesh};
pub use io::{mesh_to_string, read_mesh, write_mesh};
pub use renumber::{renumber_by_type, Permutation};

/// Supported element geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementType {
    Tri03,
    Quad04,
    Tet04,
    Pyr05,
    Hex08,
}

impl ElementType {
    pub const ALL: [ElementType; 5] = [
        ElementType::Tri03,
        ElementType::Quad04,
        ElementType::Tet04,
        ElementType::Pyr05,
        ElementType::Hex08,
    ];

    pub const fn nnodes(self) -> usize {
        match self {
            ElementType::Tri03 => 3,
            ElementType::Quad04 => 4,
            ElementType::Tet04 => 4,
            ElementType::Pyr05 => 5,
            ElementType::Hex08 => 8,
        }
    }

    pub const fn dim(self) -> usize {
        match self {
            ElementType::Tri03 | ElementType::Quad04 => 2,
            _ => 3,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            ElementType::Tri03 => "TRI03",
            ElementType::Quad04 => "QUAD04",
            ElementType::Tet04 => "TET04",
            ElementType::Pyr05 => "PYR05",
            ElementType::Hex08 => "HEX08",
        }
    }

    /// Local faces (edges in 2D), each ordered so that its right-hand normal
    /// points out of a positively oriented element.
    pub fn faces(self) -> &'static [&'static [usize]] {
        match self {
            ElementType::Tri03 => &[&[0, 1], &[1, 2], &[2, 0]],
            ElementType::Quad04 => &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
            ElementType::Tet04 => &[&[0, 2, 1], &[0, 1, 3], &[0, 3, 2], &[1, 2, 3]],
            ElementType::Pyr05 => &[
                &[0, 3, 2, 1],
                &[0, 1, 4],
                &[1, 2, 4],
                &[2, 3, 4],
                &[3, 0, 4],
            ],
            ElementType::Hex08 => &[
                &[0, 3, 2, 1],
                &[4, 5, 6, 7],
                &[0, 1, 5, 4],
                &[1, 2, 6, 5],
                &[2, 3, 7, 6],
                &[3, 0, 4, 7],
            ],
        }
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ElementType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ElementType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown element type `{s}`")))
    }
}

/// A run of elements sharing one [`ElementType`].
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGroup {
    pub kind: ElementType,
    /// Node indices, `nnodes(kind)` per element, element-major.
    pub connectivity: Vec<usize>,
}

impl ElementGroup {
    pub fn new(kind: ElementType, connectivity: Vec<usize>) -> Self {
        Self { kind, connectivity }
    }

    pub fn nelem(&self) -> usize {
        self.connectivity.len() / self.kind.nnodes()
    }

    pub fn element(&self, i: usize) -> &[usize] {
        let nn = self.kind.nnodes();
        &self.connectivity[i * nn..(i + 1) * nn]
    }

    pub fn elements(&self) -> std::slice::ChunksExact<'_, usize> {
        self.connectivity.chunks_exact(self.kind.nnodes())
    }
}

/// Exterior face with the global id of the element that owns it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryFace {
    pub nodes: Vec<usize>,
    pub owner: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    coords: Vec<f64>,
    groups: Vec<ElementGroup>,
    boundary: Vec<BoundaryFace>,
}

impl Mesh {
    /// Builds a mesh, validating index ranges and group sizes.
    ///
    /// Groups may repeat an element type (a "loose" ordering as read from
    /// a file); [`Mesh::is_type_grouped`] reports whether they do not.
    pub fn new(
        dim: usize,
        coords: Vec<f64>,
        groups: Vec<ElementGroup>,
        boundary: Vec<BoundaryFace>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::config(format!("mesh dimension must be 2 or 3, got {dim}")));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::config("coordinate array length is not a multiple of dim"));
        }
        let nnode = coords.len() / dim;
        for g in &groups {
            if g.kind.dim() != dim {
                return Err(Error::config(format!("{} elements in a {dim}D mesh", g.kind)));
            }
            if g.connectivity.len() % g.kind.nnodes() != 0 {
                return Err(Error::config(format!(
                    "{} connectivity length {} is not a multiple of {}",
                    g.kind,
                    g.connectivity.len(),
                    g.kind.nnodes()
                )));
            }
            if let Some(&bad) = g.connectivity.iter().find(|&&n| n >= nnode) {
                return Err(Error::config(format!("node index {bad} out of range (nnode = {nnode})")));
            }
        }
        let nelem: usize = groups.iter().map(ElementGroup::nelem).sum();
        for f in &boundary {
            if f.owner >= nelem {
                return Err(Error::config(format!("boundary face owner {} out of range", f.owner)));
            }
            if let Some(&bad) = f.nodes.iter().find(|&&n| n >= nnode) {
                return Err(Error::config(format!("boundary node index {bad} out of range")));
            }
        }
        Ok(Self {
            dim,
            coords,
            groups,
            boundary,
        })
    }

    /// Like [`Mesh::new`] but derives the boundary from unmatched faces.
    pub fn with_derived_boundary(
        dim: usize,
        coords: Vec<f64>,
        groups: Vec<ElementGroup>,
    ) -> Result<Self> {
        let mut mesh = Self::new(dim, coords, groups, Vec::new())?;
        mesh.boundary = mesh.exterior_faces();
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnode(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn nelem(&self) -> usize {
        self.groups.iter().map(ElementGroup::nelem).sum()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn groups(&self) -> &[ElementGroup] {
        &self.groups
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary
    }

    /// Global id of the first element of each group.
    pub fn group_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.groups
            .iter()
            .map(|g| {
                let start = acc;
                acc += g.nelem();
                start
            })
            .collect()
    }

    /// Element by global id (groups in order).
    pub fn element(&self, mut id: usize) -> (ElementType, &[usize]) {
        for g in &self.groups {
            let n = g.nelem();
            if id < n {
                return (g.kind, g.element(id));
            }
            id -= n;
        }
        panic!("element id out of range");
    }

    /// Iterates `(global id, type, nodes)` in storage order.
    pub fn elements(&self) -> impl Iterator<Item = (usize, ElementType, &[usize])> + '_ {
        self.groups
            .iter()
            .flat_map(|g| g.elements().map(move |c| (g.kind, c)))
            .enumerate()
            .map(|(i, (k, c))| (i, k, c))
    }

    /// Gathers node coordinates of `nodes`, node-major.
    pub fn gather_coords(&self, nodes: &[usize], out: &mut Vec<f64>) {
        out.clear();
        for &n in nodes {
            out.extend_from_slice(self.node(n));
        }
    }

    /// True when each element type occupies exactly one group.
    pub fn is_type_grouped(&self) -> bool {
        let mut seen = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            if seen.contains(&g.kind) {
                return false;
            }
            seen.push(g.kind);
        }
        true
    }

    /// Nodes touched by at least one boundary face.
    pub fn boundary_node_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nnode()];
        for f in &self.boundary {
            for &n in &f.nodes {
                mask[n] = true;
            }
        }
        mask
    }

    /// Faces that belong to exactly one element, in first-seen order.
    pub fn exterior_faces(&self) -> Vec<BoundaryFace> {
        let census = self.face_census();
        let mut out = Vec::new();
        for (id, kind, conn) in self.elements() {
            for lf in kind.faces() {
                let nodes: Vec<usize> = lf.iter().map(|&i| conn[i]).collect();
                if census.count(&nodes) == 1 {
                    out.push(BoundaryFace { nodes, owner: id });
                }
            }
        }
        out
    }

    /// Counts every element face keyed by its node set.
    pub fn face_census(&self) -> FaceCensus {
        let mut faces: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
        for (_, kind, conn) in self.elements() {
            for lf in kind.faces() {
                let nodes: Vec<usize> = lf.iter().map(|&i| conn[i]).collect();
                let mut key = nodes.clone();
                key.sort_unstable();
                faces.entry(key).or_default().push(nodes);
            }
        }
        FaceCensus { faces }
    }
}

/// Face multiplicities of a mesh, used for boundary extraction and the
/// conformity check.
#[derive(Debug)]
pub struct FaceCensus {
    faces: HashMap<Vec<usize>, Vec<Vec<usize>>>,
}

impl FaceCensus {
    pub fn count(&self, nodes: &[usize]) -> usize {
        let mut key = nodes.to_vec();
        key.sort_unstable();
        self.faces.get(&key).map_or(0, Vec::len)
    }

    pub fn exterior(&self) -> usize {
        self.faces.values().filter(|v| v.len() == 1).count()
    }

    pub fn interior(&self) -> usize {
        self.faces.values().filter(|v| v.len() == 2).count()
    }

    /// Faces that appear more than twice, or twice with the same
    /// orientation. Empty for a conforming, consistently oriented mesh.
    pub fn defects(&self) -> Vec<Vec<usize>> {
        self.faces
            .iter()
            .filter(|(_, v)| v.len() > 2 || (v.len() == 2 && !opposite_orientation(&v[0], &v[1])))
            .map(|(k, _)| k.clone())
            .collect()
    }
}

fn canonical_cycle(face: &[usize]) -> Vec<usize> {
    let start = face
        .iter()
        .enumerate()
        .min_by_key(|&(_, n)| *n)
        .map(|(i, _)| i)
        .unwrap_or(0);
    face[start..].iter().chain(&face[..start]).copied().collect()
}

fn opposite_orientation(a: &[usize], b: &[usize]) -> bool {
    let reversed: Vec<usize> = b.iter().rev().copied().collect();
    canonical_cycle(a) == canonical_cycle(&reversed)
}

use super::{BoundaryFace, ElementGroup, ElementType, Mesh};

/// Element renumbering: `forward[old] = new`, `inverse[new] = old`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub forward: Vec<usize>,
    pub inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let ids: Vec<usize> = (0..n).collect();
        Self {
            forward: ids.clone(),
            inverse: ids,
        }
    }

    pub fn from_inverse(inverse: Vec<usize>) -> Self {
        let mut forward = vec![0; inverse.len()];
        for (new, &old) in inverse.iter().enumerate() {
            forward[old] = new;
        }
        Self { forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &f)| i == f)
    }
}

/// Stable partition of the elements by type.
///
/// Types keep the order of their first appearance; elements of one type
/// keep their relative order. Node numbering is untouched and boundary
/// face owners are remapped.
pub fn renumber_by_type(mesh: &Mesh) -> (Mesh, Permutation) {
    let mut kinds: Vec<ElementType> = Vec::new();
    for g in mesh.groups() {
        if !kinds.contains(&g.kind) {
            kinds.push(g.kind);
        }
    }

    let mut inverse = Vec::with_capacity(mesh.nelem());
    let mut groups = Vec::with_capacity(kinds.len());
    for &kind in &kinds {
        let mut conn = Vec::new();
        for (id, k, nodes) in mesh.elements() {
            if k == kind {
                inverse.push(id);
                conn.extend_from_slice(nodes);
            }
        }
        groups.push(ElementGroup::new(kind, conn));
    }

    let perm = Permutation::from_inverse(inverse);
    let boundary = mesh
        .boundary_faces()
        .iter()
        .map(|f| BoundaryFace {
            nodes: f.nodes.clone(),
            owner: perm.forward[f.owner],
        })
        .collect();
    let out = Mesh::new(mesh.dim(), mesh.coords().to_vec(), groups, boundary)
        .expect("renumbering preserves mesh validity");
    (out, perm)
}

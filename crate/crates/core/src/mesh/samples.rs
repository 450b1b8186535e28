//! Small hand-built meshes used by tests and the bench harness.

use super::{ElementGroup, ElementType, Mesh};

/// Conforming 2D mesh of 18 QUAD04 over `[0,6] x [0,3]` on top of a
/// 25-triangle strip over `[0,6] x [-1,0]`, stored with the two types
/// interleaved one element per group (an ungrouped input).
pub fn mixed_tri_quad_strip() -> Mesh {
    let mut coords = Vec::new();
    // Quad grid nodes: 7 x 4, row y = 0 is shared with the strip.
    for j in 0..4 {
        for i in 0..7 {
            coords.extend_from_slice(&[i as f64, j as f64]);
        }
    }
    let quad_node = |i: usize, j: usize| i + 7 * j;
    let nbottom = 20;
    let bottom0 = coords.len() / 2;
    for i in 0..nbottom {
        coords.extend_from_slice(&[6.0 * i as f64 / (nbottom - 1) as f64, -1.0]);
    }

    let mut quads = Vec::new();
    for j in 0..3 {
        for i in 0..6 {
            quads.push(vec![
                quad_node(i, j),
                quad_node(i + 1, j),
                quad_node(i + 1, j + 1),
                quad_node(i, j + 1),
            ]);
        }
    }

    // Zipper triangulation between the 20 bottom and 7 top nodes.
    let mut tris = Vec::new();
    let (mut b, mut t) = (0usize, 0usize);
    while b + 1 < nbottom || t + 1 < 7 {
        let next_b = (b + 1 < nbottom).then(|| coords[2 * (bottom0 + b + 1)]);
        let next_t = (t + 1 < 7).then(|| (t + 1) as f64);
        let advance_bottom = match (next_b, next_t) {
            (Some(xb), Some(xt)) => xb <= xt,
            (Some(_), None) => true,
            _ => false,
        };
        if advance_bottom {
            tris.push(vec![bottom0 + b, bottom0 + b + 1, quad_node(t, 0)]);
            b += 1;
        } else {
            tris.push(vec![bottom0 + b, quad_node(t + 1, 0), quad_node(t, 0)]);
            t += 1;
        }
    }

    let mut groups = Vec::new();
    let (mut qi, mut ti) = (quads.into_iter(), tris.into_iter());
    loop {
        let t = ti.next();
        let q = qi.next();
        if t.is_none() && q.is_none() {
            break;
        }
        if let Some(t) = t {
            groups.push(ElementGroup::new(ElementType::Tri03, t));
        }
        if let Some(q) = q {
            groups.push(ElementGroup::new(ElementType::Quad04, q));
        }
    }
    Mesh::with_derived_boundary(2, coords, groups).expect("sample mesh is valid")
}

/// Two right triangles tiling the unit square.
pub fn unit_square_two_triangles() -> Mesh {
    let coords = vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
    let groups = vec![ElementGroup::new(ElementType::Tri03, vec![0, 1, 2, 0, 2, 3])];
    Mesh::with_derived_boundary(2, coords, groups).expect("sample mesh is valid")
}

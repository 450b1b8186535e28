//! Structured generators over axis-aligned boxes.

use super::{ElementGroup, ElementType, Mesh};
use crate::error::{Error, Result};

// Hex corner offsets in local node order.
const HEX_CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

// Six tets per hex around the 0-6 diagonal: one per axis permutation.
const KUHN_PATHS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

struct Grid {
    n: [usize; 3],
    len: [f64; 3],
}

impl Grid {
    fn node(&self, i: usize, j: usize, k: usize) -> usize {
        i + (self.n[0] + 1) * (j + (self.n[1] + 1) * k)
    }

    fn coords(&self, dim: usize) -> Vec<f64> {
        let nz = if dim == 3 { self.n[2] } else { 0 };
        let mut out = Vec::with_capacity((self.n[0] + 1) * (self.n[1] + 1) * (nz + 1) * dim);
        for k in 0..=nz {
            for j in 0..=self.n[1] {
                for i in 0..=self.n[0] {
                    out.push(self.len[0] * i as f64 / self.n[0] as f64);
                    out.push(self.len[1] * j as f64 / self.n[1] as f64);
                    if dim == 3 {
                        out.push(self.len[2] * k as f64 / self.n[2] as f64);
                    }
                }
            }
        }
        out
    }

    fn hex(&self, i: usize, j: usize, k: usize) -> [usize; 8] {
        HEX_CORNERS.map(|[a, b, c]| self.node(i + a, j + b, k + c))
    }

    fn quad(&self, i: usize, j: usize) -> [usize; 4] {
        [
            self.node(i, j, 0),
            self.node(i + 1, j, 0),
            self.node(i + 1, j + 1, 0),
            self.node(i, j + 1, 0),
        ]
    }
}

fn check_counts(kind: ElementType, nx: usize, ny: usize, nz: usize, lengths: [f64; 3]) -> Result<()> {
    let dim = kind.dim();
    if nx == 0 || ny == 0 || (dim == 3 && nz == 0) {
        return Err(Error::config(format!("cell counts must be >= 1, got {nx}x{ny}x{nz}")));
    }
    if lengths[..dim].iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::config(format!("box extents must be positive, got {lengths:?}")));
    }
    Ok(())
}

fn sub(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn triple(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn point(coords: &[f64], n: usize) -> &[f64] {
    &coords[3 * n..3 * n + 3]
}

fn push_hex_pyramids(hex: &[usize; 8], apex: usize, coords: &[f64], conn: &mut Vec<usize>) {
    for face in ElementType::Hex08.faces() {
        // Outward face reversed: counter-clockwise seen from the interior apex.
        let mut base = [hex[face[3]], hex[face[2]], hex[face[1]], hex[face[0]]];
        let c0 = point(coords, base[0]);
        let vol = triple(
            sub(point(coords, base[1]), c0),
            sub(point(coords, base[2]), c0),
            sub(point(coords, apex), c0),
        );
        if vol < 0.0 {
            base.swap(1, 3);
        }
        conn.extend_from_slice(&base);
        conn.push(apex);
    }
}

fn push_hex_tets(hex: &[usize; 8], coords: &[f64], conn: &mut Vec<usize>) {
    for path in KUHN_PATHS {
        let mut corner = [0usize; 3];
        let mut tet = [hex[0]; 4];
        for (step, &axis) in path.iter().enumerate() {
            corner[axis] = 1;
            let local = HEX_CORNERS.iter().position(|c| *c == corner).unwrap();
            tet[step + 1] = hex[local];
        }
        let c0 = point(coords, tet[0]);
        let vol = triple(
            sub(point(coords, tet[1]), c0),
            sub(point(coords, tet[2]), c0),
            sub(point(coords, tet[3]), c0),
        );
        if vol < 0.0 {
            tet.swap(2, 3);
        }
        conn.extend_from_slice(&tet);
    }
}

fn hex_center(hex: &[usize; 8], coords: &[f64]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for &n in hex {
        for a in 0..3 {
            c[a] += coords[3 * n + a];
        }
    }
    c.map(|v| v / 8.0)
}

/// Conforming single-type mesh of `[0,lx] x [0,ly] (x [0,lz])`.
///
/// `nz` is ignored for 2D types. Tets come from a six-way split of every
/// hex around the same diagonal; pyramids from a six-way split around an
/// added body-center node.
pub fn generate_box_mesh(
    kind: ElementType,
    nx: usize,
    ny: usize,
    nz: usize,
    lengths: [f64; 3],
) -> Result<Mesh> {
    check_counts(kind, nx, ny, nz, lengths)?;
    let grid = Grid {
        n: [nx, ny, if kind.dim() == 3 { nz } else { 1 }],
        len: lengths,
    };
    let dim = kind.dim();
    let mut coords = grid.coords(dim);
    let mut conn = Vec::new();
    match kind {
        ElementType::Quad04 | ElementType::Tri03 => {
            for j in 0..ny {
                for i in 0..nx {
                    let q = grid.quad(i, j);
                    if kind == ElementType::Quad04 {
                        conn.extend_from_slice(&q);
                    } else {
                        conn.extend_from_slice(&[q[0], q[1], q[2], q[0], q[2], q[3]]);
                    }
                }
            }
        }
        ElementType::Hex08 | ElementType::Tet04 | ElementType::Pyr05 => {
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        let hex = grid.hex(i, j, k);
                        match kind {
                            ElementType::Hex08 => conn.extend_from_slice(&hex),
                            ElementType::Tet04 => push_hex_tets(&hex, &coords, &mut conn),
                            _ => {
                                let apex = coords.len() / 3;
                                coords.extend_from_slice(&hex_center(&hex, &coords));
                                push_hex_pyramids(&hex, apex, &coords, &mut conn);
                            }
                        }
                    }
                }
            }
        }
    }
    Mesh::with_derived_boundary(dim, coords, vec![ElementGroup::new(kind, conn)])
}

/// Unit-cube hex mesh whose first `ceil(fraction * nx)` layers along x are
/// split into pyramids. Split hexes keep their quad faces, so the result
/// conforms across the pyramid/hex interface.
pub fn generate_mixed_mesh(nx: usize, ny: usize, nz: usize, pyramid_fraction: f64) -> Result<Mesh> {
    check_counts(ElementType::Hex08, nx, ny, nz, [1.0; 3])?;
    if !(0.0..=1.0).contains(&pyramid_fraction) {
        return Err(Error::config(format!(
            "pyramid fraction must lie in [0, 1], got {pyramid_fraction}"
        )));
    }
    let grid = Grid {
        n: [nx, ny, nz],
        len: [1.0; 3],
    };
    let layers = ((pyramid_fraction * nx as f64).ceil() as usize).min(nx);
    let mut coords = grid.coords(3);
    let mut pyr = Vec::new();
    let mut hexes = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let hex = grid.hex(i, j, k);
                if i < layers {
                    let apex = coords.len() / 3;
                    coords.extend_from_slice(&hex_center(&hex, &coords));
                    push_hex_pyramids(&hex, apex, &coords, &mut pyr);
                } else {
                    hexes.extend_from_slice(&hex);
                }
            }
        }
    }
    let mut groups = Vec::new();
    if !pyr.is_empty() {
        groups.push(ElementGroup::new(ElementType::Pyr05, pyr));
    }
    if !hexes.is_empty() {
        groups.push(ElementGroup::new(ElementType::Hex08, hexes));
    }
    Mesh::with_derived_boundary(3, coords, groups)
}

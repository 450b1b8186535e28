use packfem::elements::{compute_geometry, exactness_degree, quadrature_exactness_check, reference_element};
use packfem::mesh::{
    generate_box_mesh, generate_mixed_mesh, read_mesh, renumber_by_type, samples, write_mesh, ElementGroup,
    ElementType, Mesh,
};
use packfem::packing::{build_packs, pack_geometry, PackConfig, SUPPORTED_VECTOR_SIZES};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = ElementType> {
    prop::sample::select(ElementType::ALL.to_vec())
}

fn element_coords(re_kind: ElementType) -> Vec<f64> {
    // first element of a unit box of the given kind
    let m = generate_box_mesh(re_kind, 1, 1, 1, [1.0; 3]).unwrap();
    let (_, nodes) = m.element(0);
    let mut out = Vec::new();
    m.gather_coords(nodes, &mut out);
    out
}

/// Exact integral of `x^a y^b (z^c)` over the reference element.
fn exact_monomial(kind: ElementType, e: &[u32]) -> Option<f64> {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let interval = |k: u32| if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
    match kind {
        ElementType::Quad04 => Some(interval(e[0]) * interval(e[1])),
        ElementType::Hex08 => Some(interval(e[0]) * interval(e[1]) * interval(e[2])),
        ElementType::Tri03 => Some(fact(e[0]) * fact(e[1]) / fact(e[0] + e[1] + 2)),
        ElementType::Tet04 => Some(fact(e[0]) * fact(e[1]) * fact(e[2]) / fact(e[0] + e[1] + e[2] + 3)),
        ElementType::Pyr05 => None,
    }
}

#[test]
fn quadrature_integrates_monomials_to_declared_degree() {
    for kind in ElementType::ALL {
        let deg = exactness_degree(kind) as u32;
        let dim = kind.dim();
        for a in 0..=deg {
            for b in 0..=deg - a {
                let cs: Vec<u32> = if dim == 3 { (0..=deg - a - b).collect() } else { vec![0] };
                for c in cs {
                    let e = [a, b, c];
                    let Some(exact) = exact_monomial(kind, &e[..dim]) else { continue };
                    let q = quadrature_exactness_check(kind, &e[..dim]);
                    assert!((q - exact).abs() < 1e-13, "{kind} {e:?}: {q} vs {exact}");
                }
            }
        }
    }
}

#[test]
fn quadrature_examples() {
    assert!((quadrature_exactness_check(ElementType::Quad04, &[2, 2]) - 4.0 / 9.0).abs() < 1e-13);
    assert!((quadrature_exactness_check(ElementType::Hex08, &[0, 0, 0]) - 8.0).abs() < 1e-13);
    assert!((quadrature_exactness_check(ElementType::Tet04, &[1, 0, 0]) - 1.0 / 24.0).abs() < 1e-13);
    // pyramid [-1,1]^2 x [0,1] collapsed: volume 4/3
    assert!((quadrature_exactness_check(ElementType::Pyr05, &[0, 0, 0]) - 4.0 / 3.0).abs() < 1e-10);
}

#[test]
fn reference_tables_partition_unity() {
    for kind in ElementType::ALL {
        let re = reference_element(kind);
        for ig in 0..re.ngauss {
            let s: f64 = (0..re.nnodes).map(|i| re.n(i, ig)).sum();
            assert!((s - 1.0).abs() < 1e-14, "{kind}");
            for d in 0..re.dim {
                let g: f64 = (0..re.nnodes).map(|i| re.dn(d, i, ig)).sum();
                assert!(g.abs() < 1e-12, "{kind}");
            }
        }
        let w: f64 = re.gauss_weights.iter().sum();
        assert!((w - re.measure()).abs() < 1e-14, "{kind}");
    }
}

proptest! {
    #[test]
    fn geometry_translation_invariant(kind in kind(), shift in prop::array::uniform3(-5.0f64..5.0)) {
        let re = reference_element(kind);
        let x = element_coords(kind);
        let dim = kind.dim();
        let moved: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + shift[i % dim]).collect();
        let a = compute_geometry(&re, &x).unwrap();
        let b = compute_geometry(&re, &moved).unwrap();
        for (p, q) in a.detjw.iter().zip(&b.detjw) {
            prop_assert!((p - q).abs() < 1e-14);
        }
        for (p, q) in a.grad.iter().zip(&b.grad) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn geometry_scaling(kind in kind(), s in 0.1f64..10.0) {
        let re = reference_element(kind);
        let x = element_coords(kind);
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        let a = compute_geometry(&re, &x).unwrap();
        let b = compute_geometry(&re, &scaled).unwrap();
        let f = s.powi(kind.dim() as i32);
        for (p, q) in a.detjw.iter().zip(&b.detjw) {
            prop_assert!((p * f - q).abs() <= 1e-12 * q.abs());
        }
        for (p, q) in a.grad.iter().zip(&b.grad) {
            prop_assert!((p / s - q).abs() <= 1e-12 * p.abs().max(1.0) / s);
        }
    }

    #[test]
    fn generator_volume_matches_box(
        kind in kind(),
        n in prop::array::uniform3(1usize..4),
        len in prop::array::uniform3(0.5f64..3.0),
    ) {
        let m = generate_box_mesh(kind, n[0], n[1], n[2], len).unwrap();
        let expected: f64 = len[..kind.dim()].iter().product();
        let vol = mesh_volume(&m);
        prop_assert!((vol - expected).abs() <= 1e-10 * expected);
        prop_assert_eq!(m.face_census().defects().len(), 0);
    }

    #[test]
    fn mixed_generator_is_conforming(n in prop::array::uniform3(1usize..4), frac in 0.0f64..=1.0) {
        let m = generate_mixed_mesh(n[0], n[1], n[2], frac).unwrap();
        prop_assert!(m.face_census().defects().is_empty());
        prop_assert!((mesh_volume(&m) - 1.0).abs() < 1e-10);
        let kinds: Vec<_> = m.groups().iter().map(|g| g.kind).collect();
        let mut dedup = kinds.clone();
        dedup.dedup();
        prop_assert_eq!(kinds.len(), dedup.len());
    }

    #[test]
    fn renumbering_is_a_stable_partition(order in prop::collection::vec(prop::bool::ANY, 1..30)) {
        let m = interleaved(&order);
        let (r, perm) = renumber_by_type(&m);
        prop_assert!(r.is_type_grouped());
        for old in 0..m.nelem() {
            prop_assert_eq!(perm.inverse[perm.forward[old]], old);
            prop_assert_eq!(m.element(old), r.element(perm.forward[old]));
        }
        for w in perm.inverse.windows(2) {
            if m.element(w[0]).0 == m.element(w[1]).0 {
                prop_assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn mesh_text_round_trip(kind in kind(), n in prop::array::uniform3(1usize..3)) {
        let m = generate_box_mesh(kind, n[0], n[1], n[2], [1.0, 2.0, 0.5]).unwrap();
        let mut text = Vec::new();
        write_mesh(&m, &mut text).unwrap();
        let back = read_mesh(text.as_slice()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn packs_cover_every_element_once(order in prop::collection::vec(prop::bool::ANY, 0..40), vsi in 0usize..6) {
        let vs = SUPPORTED_VECTOR_SIZES[vsi];
        let m = renumber_by_type(&interleaved(&order)).0;
        let packs = build_packs(&m, PackConfig::new(vs).unwrap()).unwrap();
        let mut seen = vec![0; m.nelem()];
        for p in &packs {
            prop_assert_eq!(p.npacks, p.nelem.div_ceil(vs));
            prop_assert_eq!(p.padded_lanes(), p.npacks * vs - p.nelem);
            for k in 0..p.npacks {
                for lane in 0..vs {
                    if let Some(e) = p.element_id(k, lane) {
                        seen[e] += 1;
                        let nodes: Vec<usize> = (0..p.nnodes()).map(|i| p.node(k, i, lane)).collect();
                        prop_assert_eq!(&nodes[..], m.element(e).1);
                    }
                }
            }
            let re = reference_element(p.kind);
            let g = pack_geometry(p, &re, m.coords()).unwrap();
            for k in 0..p.npacks {
                for lane in p.active_lanes(k)..vs {
                    for ig in 0..re.ngauss {
                        prop_assert_eq!(g.detjw_pack(k)[ig * vs + lane], 0.0);
                    }
                }
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }
}

fn mesh_volume(m: &Mesh) -> f64 {
    let mut x = Vec::new();
    m.elements()
        .map(|(_, kind, nodes)| {
            m.gather_coords(nodes, &mut x);
            compute_geometry(&reference_element(kind), &x).unwrap().volume()
        })
        .sum()
}

/// Strip of unit cells, `true` giving a quad and `false` two triangles.
fn interleaved(order: &[bool]) -> Mesh {
    let n = order.len();
    let mut coords = Vec::new();
    for i in 0..=n {
        coords.extend([i as f64, 0.0, i as f64, 1.0]);
    }
    let mut groups = Vec::new();
    for (i, &quad) in order.iter().enumerate() {
        let (a, b, c, d) = (2 * i, 2 * i + 2, 2 * i + 3, 2 * i + 1);
        if quad {
            groups.push(ElementGroup::new(ElementType::Quad04, vec![a, b, c, d]));
        } else {
            groups.push(ElementGroup::new(ElementType::Tri03, vec![a, b, c, a, c, d]));
        }
    }
    Mesh::with_derived_boundary(2, coords, groups).unwrap()
}

#[test]
fn fig3_strip_packs() {
    let m = samples::mixed_tri_quad_strip();
    let (m, _) = renumber_by_type(&m);
    let packs = build_packs(&m, PackConfig::new(4).unwrap()).unwrap();
    let summary: Vec<_> = packs.iter().map(|p| (p.kind, p.nelem, p.npacks, p.padded_lanes())).collect();
    assert_eq!(
        summary,
        vec![(ElementType::Tri03, 25, 7, 3), (ElementType::Quad04, 18, 5, 2)]
    );
}

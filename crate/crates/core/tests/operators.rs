use packfem::assembly::{Assembler, BoundaryAssembler, Layout, MatrixKernel, VectorKernel};
use packfem::krylov::{pcg_solve, SolverConfig};
use packfem::mesh::{generate_box_mesh, generate_mixed_mesh, samples, ElementType, Mesh};
use packfem::sparse::{self, CsrMatrix};
use packfem::timeloop::{discrete_divergence, discrete_gradient};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn small_mesh(pick: usize) -> Mesh {
    match pick % 6 {
        0 => generate_box_mesh(ElementType::Tri03, 4, 3, 0, [1.0, 1.0, 0.0]).unwrap(),
        1 => generate_box_mesh(ElementType::Quad04, 4, 3, 0, [1.0, 0.5, 0.0]).unwrap(),
        2 => generate_box_mesh(ElementType::Tet04, 2, 2, 3, [1.0; 3]).unwrap(),
        3 => generate_box_mesh(ElementType::Pyr05, 2, 2, 2, [1.0; 3]).unwrap(),
        4 => generate_box_mesh(ElementType::Hex08, 3, 2, 2, [1.0; 3]).unwrap(),
        _ => generate_mixed_mesh(3, 2, 2, 0.5).unwrap(),
    }
}

fn random_field(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn assembled(asm: &Assembler, k: &MatrixKernel) -> CsrMatrix {
    let mut m = asm.matrix();
    asm.assemble_matrix(k, &mut m).unwrap();
    m
}

/// Nodal field vanishing on the boundary.
fn interior_field(mesh: &Mesh, rng: &mut StdRng, ncomp: usize) -> Vec<f64> {
    let mask = mesh.boundary_node_mask();
    let mut v = random_field(rng, mesh.nnode() * ncomp);
    for (i, &b) in mask.iter().enumerate() {
        if b {
            v[i * ncomp..(i + 1) * ncomp].fill(0.0);
        }
    }
    v
}

fn random_spd(rng: &mut StdRng, n: usize) -> Vec<Vec<f64>> {
    let b: Vec<Vec<f64>> = (0..n).map(|_| random_field(rng, n)).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: f64 = (0..n).map(|k| b[k][i] * b[k][j]).sum();
                    s + if i == j { n as f64 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn packed_matches_scalar(pick in 0usize..6, vsi in 0usize..6, seed in any::<u64>()) {
        let mesh = small_mesh(pick);
        let vs = [1, 2, 4, 8, 16, 32][vsi];
        let mut rng = StdRng::seed_from_u64(seed);
        let (n, dim) = (mesh.nnode(), mesh.dim());
        let u = random_field(&mut rng, n * dim);
        let phi = random_field(&mut rng, n);
        let scalar = Assembler::new(&mesh, Layout::Scalar).unwrap();
        let packed = Assembler::new(&mesh, Layout::packed(vs).unwrap()).unwrap();
        for k in [MatrixKernel::Mass, MatrixKernel::Laplacian, MatrixKernel::Convection { velocity: &u }] {
            let a = assembled(&scalar, &k);
            let b = assembled(&packed, &k);
            prop_assert!(max_diff(&a.vals, &b.vals) <= 1e-12);
        }
        let kernels = [
            VectorKernel::Momentum { velocity: &u, rho: 1.2, mu: 0.03 },
            VectorKernel::ScalarTransport { phi: &phi, velocity: &u, kappa: 0.01 },
        ];
        for k in kernels {
            let len = n * k.ncomp(dim);
            let (mut a, mut b) = (vec![0.0; len], vec![0.0; len]);
            scalar.assemble_vector(&k, &mut a).unwrap();
            packed.assemble_vector(&k, &mut b).unwrap();
            prop_assert!(max_diff(&a, &b) <= 1e-12);
        }
    }

    #[test]
    fn mass_and_laplacian_structure(pick in 0usize..6, seed in any::<u64>()) {
        let mesh = small_mesh(pick);
        let asm = Assembler::new(&mesh, Layout::packed(4).unwrap()).unwrap();
        let m = assembled(&asm, &MatrixKernel::Mass);
        let l = assembled(&asm, &MatrixKernel::Laplacian);
        prop_assert!(m.is_symmetric(1e-15));
        prop_assert!(l.is_symmetric(1e-13));
        let vol: f64 = m.vals.iter().sum();
        let expected = if mesh.dim() == 2 && pick % 6 == 1 { 0.5 } else { 1.0 };
        prop_assert!((vol - expected).abs() < 1e-12);
        prop_assert!(sparse::jacobi_diagonal(&m).unwrap().iter().all(|&d| d > 0.0));

        let mut rng = StdRng::seed_from_u64(seed);
        let x = random_field(&mut rng, mesh.nnode());
        let mut y = vec![0.0; x.len()];
        sparse::spmv(&l, &x, &mut y).unwrap();
        let energy = sparse::dot(&x, &y).unwrap();
        prop_assert!(energy >= -1e-12);
        sparse::spmv(&l, &vec![1.0; x.len()], &mut y).unwrap();
        prop_assert!(sparse::norm2(&y) < 1e-10);
    }

    #[test]
    fn divergence_and_gradient_are_adjoint(pick in 0usize..6, seed in any::<u64>()) {
        let mesh = small_mesh(pick);
        let asm = Assembler::new(&mesh, Layout::packed(8).unwrap()).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let u = interior_field(&mesh, &mut rng, mesh.dim());
        let p = random_field(&mut rng, mesh.nnode());
        let du = discrete_divergence(&asm, &u).unwrap();
        let gp = discrete_gradient(&asm, &p).unwrap();
        let lhs = sparse::dot(&du, &p).unwrap();
        let rhs = sparse::dot(&u, &gp).unwrap();
        prop_assert!((lhs + rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn spmv_matches_dense_and_is_linear(n in 1usize..40, seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dense: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| if rng.gen_bool(0.3) { rng.gen_range(-2.0..2.0) } else { 0.0 }).collect())
            .collect();
        let a = CsrMatrix::from_dense(&dense).unwrap();
        prop_assert_eq!(a.rowptr()[0], 0);
        prop_assert_eq!(a.rowptr()[n], a.nnz());
        for i in 0..n {
            let (cols, _) = a.row(i);
            prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
        let x = random_field(&mut rng, n);
        let z = random_field(&mut rng, n);
        let mut y = vec![0.0; n];
        sparse::spmv(&a, &x, &mut y).unwrap();
        for i in 0..n {
            let e: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum();
            prop_assert!((y[i] - e).abs() <= 1e-13 * (1.0 + e.abs()));
        }
        let mut yp = vec![0.0; n];
        sparse::spmv_par(&a, &x, &mut yp).unwrap();
        prop_assert!(max_diff(&y, &yp) <= 1e-12);

        let comb: Vec<f64> = x.iter().zip(&z).map(|(a, b)| alpha * a + beta * b).collect();
        let (mut yc, mut yz) = (vec![0.0; n], vec![0.0; n]);
        sparse::spmv(&a, &comb, &mut yc).unwrap();
        sparse::spmv(&a, &z, &mut yz).unwrap();
        for i in 0..n {
            let e = alpha * y[i] + beta * yz[i];
            prop_assert!((yc[i] - e).abs() <= 1e-12 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn symmetric_spmv_is_self_adjoint(n in 1usize..30, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = CsrMatrix::from_dense(&random_spd(&mut rng, n)).unwrap();
        let x = random_field(&mut rng, n);
        let y = random_field(&mut rng, n);
        let (mut ax, mut ay) = (vec![0.0; n], vec![0.0; n]);
        sparse::spmv(&a, &x, &mut ax).unwrap();
        sparse::spmv(&a, &y, &mut ay).unwrap();
        let l = sparse::dot(&ax, &y).unwrap();
        let r = sparse::dot(&x, &ay).unwrap();
        prop_assert!((l - r).abs() <= 1e-11 * l.abs().max(1.0));
    }

    #[test]
    fn dot_is_nonnegative_square_norm(x in prop::collection::vec(-1e3f64..1e3, 0..200)) {
        let d = sparse::dot(&x, &x).unwrap();
        let n = sparse::norm2(&x);
        prop_assert!(d >= 0.0);
        prop_assert!((d - n * n).abs() <= 1e-13 * d.max(f64::MIN_POSITIVE));
        let dc = sparse::dot_chunked::<8>(&x, &x).unwrap();
        prop_assert!((d - dc).abs() <= 1e-12 * d.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn axpy_chunked_matches_plain(alpha in -5.0f64..5.0, x in prop::collection::vec(-1.0f64..1.0, 0..100)) {
        let y0: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        let (mut a, mut b) = (y0.clone(), y0);
        sparse::axpy(alpha, &x, &mut a).unwrap();
        sparse::axpy_chunked::<4>(alpha, &x, &mut b).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pcg_solves_random_spd(n in 1usize..=50, seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dense = random_spd(&mut rng, n);
        let a = CsrMatrix::from_dense(&dense).unwrap();
        let b = random_field(&mut rng, n);
        let d = sparse::jacobi_diagonal(&a).unwrap();
        let cfg = SolverConfig { rel_tolerance: 1e-10, max_iterations: n + 5 };
        let (x, stats) = pcg_solve(&a, &b, &vec![0.0; n], &d, &cfg).unwrap();
        prop_assert!(stats.converged, "{} iterations", stats.iterations);
        prop_assert!(stats.iterations <= n + 5);
        prop_assert!(stats.true_residual <= 1e-8);

        let bs: Vec<f64> = b.iter().map(|v| v * scale).collect();
        let (xs, s2) = pcg_solve(&a, &bs, &vec![0.0; n], &d, &cfg).unwrap();
        prop_assert!(s2.converged);
        for (p, q) in x.iter().zip(&xs) {
            prop_assert!((p * scale - q).abs() <= 1e-7 * scale * (1.0 + p.abs()));
        }
    }
}

#[test]
fn robin_edge_matrix_and_load() {
    let mesh = samples::unit_square_two_triangles();
    let pattern = Assembler::new(&mesh, Layout::Scalar).unwrap().matrix();
    let edge = BoundaryAssembler::with_faces(&mesh, vec![vec![0, 1]], &pattern).unwrap();
    let mut m = pattern.clone();
    let mut rhs = vec![0.0; 4];
    edge.assemble(mesh.coords(), 1.0, 1.0, Some(&mut m), Some(&mut rhs)).unwrap();
    let expected = [[2.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 6.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((m.get(i, j) - expected[i][j]).abs() < 1e-15);
        }
    }
    assert!((rhs[0] - 0.5).abs() < 1e-15 && (rhs[1] - 0.5).abs() < 1e-15);
    assert_eq!(&rhs[2..], &[0.0, 0.0]);
}

/// Explicit diffusion with a small step keeps values inside the initial range.
#[test]
fn diffusion_step_respects_bounds_on_tets() {
    let mesh = generate_box_mesh(ElementType::Tet04, 4, 4, 4, [1.0; 3]).unwrap();
    let asm = Assembler::new(&mesh, Layout::packed(8).unwrap()).unwrap();
    let ml = assembled(&asm, &MatrixKernel::Mass).row_sums();
    let mut rng = StdRng::seed_from_u64(3);
    let mut phi: Vec<f64> = (0..mesh.nnode()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let (lo, hi) = phi.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let zero = vec![0.0; mesh.nnode() * 3];
    let kappa = 0.01;
    let dt = 1e-3;
    for _ in 0..20 {
        let mut r = vec![0.0; phi.len()];
        asm.assemble_vector(&VectorKernel::ScalarTransport { phi: &phi, velocity: &zero, kappa }, &mut r)
            .unwrap();
        for ((p, ri), m) in phi.iter_mut().zip(&r).zip(&ml) {
            *p += dt * ri / m;
        }
        assert!(phi.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    }
}

//! Acceptance suite. Prints one line per criterion and exits non-zero when a
//! gating criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use packfem::assembly::{assemble_element_packed, assemble_element_scalar, Assembler, Layout, MatrixKernel, VectorKernel};
use packfem::elements::{compute_geometry, reference_element};
use packfem::krylov::{pcg_solve, SolverConfig};
use packfem::mesh::{generate_box_mesh, generate_mixed_mesh, renumber_by_type, samples, ElementType, Mesh};
use packfem::packing::{build_packs, pack_geometry, PackConfig};
use packfem::sparse::{self, CsrMatrix};
use packfem::timeloop::{integrate_scalar, observed_order, FlowConfig, FlowSolver, Preset};
use packfem_bench::{run_kernel_bench, run_profile, BenchConfig, KernelName, MeshGen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    /// Informational criterion outside its band.
    Warn,
    /// Target value unreachable by construction; reported, not gating.
    Unattainable,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { status, detail }
    }
}

type Criterion = (usize, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "scalar/packed equivalence", equivalence),
        (2, "element matrix oracles", element_oracles),
        (3, "tri/quad strip packing", strip_packing),
        (4, "Poisson convergence rate", poisson_rate),
        (5, "preconditioned CG", pcg),
        (6, "RK3 order and single step", rk3),
        (7, "projection on Taylor-Green", projection),
        (8, "packed mass speedup", speedup),
        (9, "layout-insensitive vector ops", vector_ops),
        (10, "profile structure", profile),
    ];
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        let t = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::check(false, format!("panicked: {msg}"))
        });
        let tag = match out.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
            Status::Unattainable => "FAIL (unattainable, not gating)",
        };
        println!(
            "criterion {id:>2} {tag}: {name} ({:.1}s) {}",
            t.elapsed().as_secs_f64(),
            out.detail
        );
        if out.status == Status::Fail {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}

fn smooth_velocity(mesh: &Mesh) -> Vec<f64> {
    let dim = mesh.dim();
    let mut u = Vec::with_capacity(mesh.nnode() * dim);
    for i in 0..mesh.nnode() {
        let x = mesh.node(i);
        for c in 0..dim {
            u.push((PI * x[c]).sin() + 0.3 * (2.0 * PI * x[(c + 1) % dim]).cos());
        }
    }
    u
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn equivalence() -> Outcome {
    let meshes = [
        ("TET04 6^3", generate_box_mesh(ElementType::Tet04, 6, 6, 6, [1.0; 3]).unwrap()),
        ("PYR05 6^3", generate_box_mesh(ElementType::Pyr05, 6, 6, 6, [1.0; 3]).unwrap()),
        ("HEX08 8^3", generate_box_mesh(ElementType::Hex08, 8, 8, 8, [1.0; 3]).unwrap()),
        ("mixed 8^3", generate_mixed_mesh(8, 8, 8, 0.5).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for (_, mesh) in &meshes {
        let u = smooth_velocity(mesh);
        let phi: Vec<f64> = (0..mesh.nnode()).map(|i| mesh.node(i)[0].powi(2)).collect();
        let n = mesh.nnode();
        let reference = Assembler::new(mesh, Layout::Scalar).unwrap();
        let outputs = |asm: &Assembler| {
            let mut out = Vec::new();
            for k in [MatrixKernel::Mass, MatrixKernel::Laplacian] {
                let mut m = asm.matrix();
                asm.assemble_matrix(&k, &mut m).unwrap();
                out.push(m.vals);
            }
            let mut mom = vec![0.0; n * mesh.dim()];
            let momentum = VectorKernel::Momentum { velocity: &u, rho: 1.0, mu: 0.01 };
            asm.assemble_vector(&momentum, &mut mom).unwrap();
            out.push(mom);
            let mut sc = vec![0.0; n];
            let transport = VectorKernel::ScalarTransport { phi: &phi, velocity: &u, kappa: 0.01 };
            asm.assemble_vector(&transport, &mut sc).unwrap();
            out.push(sc);
            out
        };
        let base = outputs(&reference);
        for vs in [1, 2, 4, 8] {
            let asm = Assembler::new(mesh, Layout::packed(vs).unwrap()).unwrap();
            for (a, b) in base.iter().zip(outputs(&asm)) {
                worst = worst.max(max_diff(a, &b));
                runs += 1;
            }
        }
    }
    Outcome::check(
        worst <= 1e-12,
        format!("max deviation {worst:.3e} over {runs} kernel/mesh/width runs"),
    )
}

fn element_oracles() -> Outcome {
    let dense = |rows: &[&[f64]], s: f64| -> Vec<f64> { rows.iter().flat_map(|r| r.iter().map(move |v| v * s)).collect() };
    let tri = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
    let quad = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
    let cases = [
        (
            "TRI03 mass",
            ElementType::Tri03,
            &tri[..],
            MatrixKernel::Mass,
            dense(&[&[2.0, 1.0, 1.0], &[1.0, 2.0, 1.0], &[1.0, 1.0, 2.0]], 1.0 / 24.0),
        ),
        (
            "TRI03 stiffness",
            ElementType::Tri03,
            &tri[..],
            MatrixKernel::Laplacian,
            dense(&[&[2.0, -1.0, -1.0], &[-1.0, 1.0, 0.0], &[-1.0, 0.0, 1.0]], 0.5),
        ),
        (
            "QUAD04 mass",
            ElementType::Quad04,
            &quad[..],
            MatrixKernel::Mass,
            dense(
                &[&[4.0, 2.0, 1.0, 2.0], &[2.0, 4.0, 2.0, 1.0], &[1.0, 2.0, 4.0, 2.0], &[2.0, 1.0, 2.0, 4.0]],
                1.0 / 36.0,
            ),
        ),
        (
            "QUAD04 stiffness",
            ElementType::Quad04,
            &quad[..],
            MatrixKernel::Laplacian,
            dense(
                &[
                    &[4.0, -1.0, -2.0, -1.0],
                    &[-1.0, 4.0, -1.0, -2.0],
                    &[-2.0, -1.0, 4.0, -1.0],
                    &[-1.0, -2.0, -1.0, 4.0],
                ],
                1.0 / 6.0,
            ),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (_, kind, coords, kernel, expected) in &cases {
        let re = reference_element(*kind);
        let geo = compute_geometry(&re, coords).unwrap();
        let nodes: Vec<usize> = (0..kind.nnodes()).collect();
        let ae = assemble_element_scalar(kernel, &re, &geo, &nodes).unwrap();
        worst = worst.max(max_diff(&ae, expected));
    }
    Outcome::check(worst <= 1e-13, format!("max deviation {worst:.3e} over {} matrices", cases.len()))
}

fn strip_packing() -> Outcome {
    let (mesh, _) = renumber_by_type(&samples::mixed_tri_quad_strip());
    let packs = build_packs(&mesh, PackConfig::new(4).unwrap()).unwrap();
    let shape: Vec<_> = packs.iter().map(|p| (p.kind, p.nelem, p.npacks, p.padded_lanes())).collect();
    let shape_ok = shape == [(ElementType::Tri03, 25, 7, 3), (ElementType::Quad04, 18, 5, 2)];

    let mut padding_zero = true;
    for p in &packs {
        let re = reference_element(p.kind);
        let geom = pack_geometry(p, &re, mesh.coords()).unwrap();
        let ae = assemble_element_packed(&MatrixKernel::Mass, p, &re, &geom).unwrap();
        let (vs, nn) = (p.vector_size, re.nnodes);
        let last = p.npacks - 1;
        for lane in p.active_lanes(last)..vs {
            for ij in 0..nn * nn {
                padding_zero &= ae[(last * nn * nn + ij) * vs + lane] == 0.0;
            }
        }
    }

    let global = |vs: usize| {
        let asm = Assembler::new(&mesh, Layout::packed(vs).unwrap()).unwrap();
        let mut m = asm.matrix();
        asm.assemble_matrix(&MatrixKernel::Mass, &mut m).unwrap();
        m.vals
    };
    let dev = max_diff(&global(4), &global(1));
    Outcome::check(
        shape_ok && padding_zero && dev <= 1e-12,
        format!("packs {shape:?}, padded lanes zero: {padding_zero}, vs4 vs vs1 deviation {dev:.1e}"),
    )
}

/// L2 error of the discrete Poisson solution on an `n^3` hex mesh.
fn poisson_error(n: usize) -> f64 {
    let exact = |x: &[f64]| (PI * x[0]).sin() * (PI * x[1]).sin() * (PI * x[2]).sin();
    let mesh = generate_box_mesh(ElementType::Hex08, n, n, n, [1.0; 3]).unwrap();
    let asm = Assembler::new(&mesh, Layout::packed(8).unwrap()).unwrap();
    let mut k = asm.matrix();
    asm.assemble_matrix(&MatrixKernel::Laplacian, &mut k).unwrap();
    let mut m = asm.matrix();
    asm.assemble_matrix(&MatrixKernel::Mass, &mut m).unwrap();
    let f: Vec<f64> = (0..mesh.nnode()).map(|i| 3.0 * PI * PI * exact(mesh.node(i))).collect();
    let mut b = vec![0.0; mesh.nnode()];
    sparse::spmv(&m, &f, &mut b).unwrap();
    let lift: Vec<(usize, f64)> = mesh
        .boundary_node_mask()
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(i, _)| (i, exact(mesh.node(i))))
        .collect();
    k.apply_dirichlet(&lift, Some(&mut b));
    let d = sparse::jacobi_diagonal(&k).unwrap();
    let cfg = SolverConfig { rel_tolerance: 1e-12, max_iterations: 10_000 };
    let (p, stats) = pcg_solve(&k, &b, &vec![0.0; b.len()], &d, &cfg).unwrap();
    assert!(stats.converged, "Poisson solve did not converge");

    let re = reference_element(ElementType::Hex08);
    let mut x = Vec::new();
    let mut err2 = 0.0;
    for (_, _, nodes) in mesh.elements() {
        mesh.gather_coords(nodes, &mut x);
        let geo = compute_geometry(&re, &x).unwrap();
        for ig in 0..re.ngauss {
            let mut xg = [0.0; 3];
            let mut ph = 0.0;
            for (a, &node) in nodes.iter().enumerate() {
                let na = re.n(a, ig);
                ph += na * p[node];
                for c in 0..3 {
                    xg[c] += na * x[a * 3 + c];
                }
            }
            err2 += geo.detjw[ig] * (ph - exact(&xg)).powi(2);
        }
    }
    err2.sqrt()
}

fn poisson_rate() -> Outcome {
    let (e8, e16) = (poisson_error(8), poisson_error(16));
    let rate = (e8 / e16).log2();
    Outcome::check(rate >= 1.8, format!("L2 errors {e8:.3e} -> {e16:.3e}, rate {rate:.3}"))
}

/// Iterations of PCG to 1e-10 with an `n + 5` cap, `None` if it stalls.
fn pcg_iterations(dense: &[Vec<f64>], rng: &mut StdRng) -> Option<usize> {
    let n = dense.len();
    let a = CsrMatrix::from_dense(dense).unwrap();
    let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let d = sparse::jacobi_diagonal(&a).unwrap();
    let cfg = SolverConfig { rel_tolerance: 1e-10, max_iterations: n + 5 };
    let (_, s) = pcg_solve(&a, &rhs, &vec![0.0; n], &d, &cfg).unwrap();
    s.converged.then_some(s.iterations)
}

fn pcg() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut gram_ok = 0;
    let mut spread_ok = 0;
    for n in 1..=50 {
        // B^T B + n I
        let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let gram: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>() + if i == j { n as f64 } else { 0.0 })
                    .collect()
            })
            .collect();
        gram_ok += usize::from(pcg_iterations(&gram, &mut rng).is_some());

        // Householder similarity of eigenvalues log-spaced over [1e-2, 1e2].
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let eig: Vec<f64> = (0..n)
            .map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / (n.max(2) - 1) as f64))
            .collect();
        let h = |i: usize, j: usize| f64::from(u8::from(i == j)) - 2.0 * v[i] * v[j] / vv;
        let spread: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| h(i, k) * eig[k] * h(k, j)).sum()).collect())
            .collect();
        spread_ok += usize::from(pcg_iterations(&spread, &mut rng).is_some());
    }
    let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
    let d = sparse::jacobi_diagonal(&a).unwrap();
    let (x, s) = pcg_solve(&a, &[1.0, 2.0], &[0.0, 0.0], &d, &SolverConfig::default()).unwrap();
    let dev = (x[0] - 1.0 / 11.0).abs().max((x[1] - 7.0 / 11.0).abs());
    Outcome::check(
        gram_ok == 50 && dev <= 1e-10 && s.iterations <= 2,
        format!(
            "random Gram SPD n = 1..50 within n+5: {gram_ok}/50; 2x2 deviation {dev:.1e} in {} iterations; \
             condition-1e4 spectra within n+5 (informational): {spread_ok}/50",
            s.iterations
        ),
    )
}

fn rk3() -> Outcome {
    let f = |u: f64| -u;
    let rate = observed_order(f, |t| (-t).exp(), 1.0, 1.0, &[0.1, 0.05, 0.025]);
    let u1 = integrate_scalar(f, 1.0, 0.1, 1);
    let taylor = 1.0 - 0.1 + 0.01 / 2.0 - 0.001 / 6.0;
    let target = 0.904_837_5;
    let rate_ok = (2.7..=3.3).contains(&rate);
    let oracle_ok = (u1 - taylor).abs() <= 1e-15;
    let target_ok = (u1 - target).abs() <= 1e-7;
    let detail = format!(
        "rate {rate:.3}; u1 = {u1:.10} (third-order polynomial 1-h+h^2/2-h^3/6 = {taylor:.10}); \
         target 0.9048375 off by {:.2e}",
        (u1 - target).abs()
    );
    let status = match (rate_ok && oracle_ok, target_ok) {
        (true, true) => Status::Pass,
        // Any three-stage third-order scheme reproduces the cubic Taylor
        // polynomial on a linear problem, so 0.9048375 cannot be reached.
        (true, false) => Status::Unattainable,
        _ => Status::Fail,
    };
    Outcome { status, detail }
}

fn projection() -> Outcome {
    let mesh = generate_box_mesh(ElementType::Quad04, 16, 16, 0, [1.0, 1.0, 0.0]).unwrap();
    let cfg = FlowConfig::default();
    let (mut state, bc) = Preset::TaylorGreen2d.initial(&mesh, &cfg.properties).unwrap();
    let asm = Assembler::new(&mesh, Layout::packed(8).unwrap()).unwrap();
    let mut solver = FlowSolver::new(asm, cfg, bc).unwrap();
    let tol = cfg.solver.rel_tolerance;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..10 {
        let r = solver.run_step(&mut state).unwrap();
        let ratio = r.divergence_after / r.divergence_before;
        worst = worst.max(ratio);
        ok &= r.divergence_after <= 10.0 * tol * r.divergence_before;
    }
    Outcome::check(ok, format!("worst ||Du||/||Du*|| = {worst:.3e} (bound {:.0e})", 10.0 * tol))
}

fn speedup() -> Outcome {
    let cfg = BenchConfig {
        mesh_gen: Some(MeshGen::Hex),
        nx: 32,
        ny: 32,
        nz: 32,
        kernel: KernelName::Mass,
        vector_size: 8,
        warmup: 3,
        reps: 20,
        ..BenchConfig::default()
    };
    let report = match run_kernel_bench(&cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::check(false, e.to_string()),
    };
    let scalar = report.kernels["mass/scalar"].median_us;
    let packed = report.kernels["mass/packed-vs8"].median_us;
    let ratio = scalar / packed;
    let width = report.environment["vector_width_bits"].clone();
    Outcome::check(
        ratio >= 1.10,
        format!(
            "median scalar {:.1} ms, packed {:.1} ms, speedup {ratio:.2}x ({width}-bit vectors)",
            scalar / 1e3,
            packed / 1e3
        ),
    )
}

fn vector_ops() -> Outcome {
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for kernel in [KernelName::Axpy, KernelName::Dot] {
        let cfg = BenchConfig {
            kernel,
            len: 1_000_000,
            ..BenchConfig::default()
        };
        let report = match run_kernel_bench(&cfg) {
            Ok(r) => r,
            Err(e) => return Outcome::check(false, e.to_string()),
        };
        let name = kernel.name();
        let a = report.kernels[&format!("{name}/scalar")].median_us;
        let b = report.kernels[&format!("{name}/packed-vs8")].median_us;
        let diff = (a - b).abs() / a.min(b);
        worst = worst.max(diff);
        parts.push(format!("{name} {a:.0} us vs {b:.0} us ({:.0}%)", 100.0 * diff));
    }
    let status = if worst < 0.25 { Status::Pass } else { Status::Warn };
    Outcome {
        status,
        detail: parts.join(", "),
    }
}

fn profile() -> Outcome {
    let cfg = BenchConfig {
        kernel: KernelName::Timeloop,
        nx: 16,
        ny: 16,
        steps: 3,
        ..BenchConfig::default()
    };
    let report = match run_profile(&cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::check(false, e.to_string()),
    };
    let names: Vec<&str> = report.categories.keys().map(String::as_str).collect();
    let shape_ok = names == ["MatrixAssembly", "BoundaryAssembly", "AlgebraicSolver", "Others"]
        && report.categories.values().all(|c| c.by_equation.len() == 3)
        && report.equations.len() == 3;
    let sum = report.percent_sum();
    let eq_sum: f64 = report.equations.values().sum();
    Outcome::check(
        shape_ok && (sum - 100.0).abs() <= 0.1 && (eq_sum - 100.0).abs() <= 0.1,
        format!("categories {names:?}, category total {sum:.3}%, equation total {eq_sum:.3}%"),
    )
}

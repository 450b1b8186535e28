use std::time::Instant;

use packfem::assembly::{Assembler, Layout, MatrixKernel, VectorKernel};
use packfem::krylov::pcg_solve;
use packfem::mesh::Mesh;
use packfem::sparse::{self, jacobi_diagonal, CsrMatrix};
use packfem::timeloop::{FlowConfig, FlowSolver, FlowState, Properties, TimeConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::config::{BenchConfig, KernelName, LayoutArg};
use crate::error::{BenchError, BenchResult};
use crate::report::{KernelTiming, Report, SolverSummary};

/// Relative tolerance of the scalar/packed checksum gate.
pub const CHECKSUM_TOLERANCE: f64 = 1e-9;

/// Validates the configuration and runs the selected kernel.
pub fn run(cfg: &BenchConfig) -> BenchResult<Report> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.kernel {
        KernelName::Timeloop => run_profile(cfg),
        _ => run_kernel_bench(cfg),
    })
}

fn base_report(cfg: &BenchConfig) -> Report {
    let mut r = Report::default();
    if let Ok(serde_json::Value::Object(m)) = serde_json::to_value(cfg) {
        r.config = m.into_iter().collect();
    }
    r.config.insert("mesh_gen".into(), serde_json::to_value(cfg.mesh_gen()).unwrap_or_default());
    r.environment = crate::env::environment();
    r
}

/// Runs `f` `warmup` times untimed, then `reps` times timed.
pub fn measure(warmup: usize, reps: usize, mut f: impl FnMut() -> BenchResult<()>) -> BenchResult<KernelTiming> {
    for _ in 0..warmup {
        f()?;
    }
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t0 = Instant::now();
        f()?;
        samples.push(t0.elapsed().as_secs_f64() * 1e6);
    }
    Ok(KernelTiming::from_samples(&samples))
}

/// Sum and absolute sum of produced values.
fn checksum(v: &[f64]) -> (f64, f64) {
    v.iter().fold((0.0, 0.0), |(s, a), x| (s + x, a + x.abs()))
}

/// Compares checksums relative to the larger of the sums and the absolute
/// sum, so that cancelling outputs (a Laplacian sums to zero) are judged
/// against their magnitude.
pub fn gate(kernel: &str, scalar: (f64, f64), packed: (f64, f64)) -> BenchResult<()> {
    let scale = scalar.0.abs().max(packed.0.abs()).max(scalar.1).max(packed.1);
    let diff = (scalar.0 - packed.0).abs();
    let relative = if scale > 0.0 { diff / scale } else { 0.0 };
    if relative.is_finite() && relative <= CHECKSUM_TOLERANCE {
        Ok(())
    } else {
        Err(BenchError::ChecksumMismatch {
            kernel: kernel.into(),
            scalar: scalar.0,
            packed: packed.0,
            relative,
        })
    }
}

pub fn layout_label(layout: Layout) -> String {
    match layout {
        Layout::Scalar => "scalar".into(),
        Layout::Packed(c) => format!("packed-vs{}", c.vector_size),
    }
}

fn random_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

enum Sweep<'a> {
    Matrix(MatrixKernel<'a>),
    Vector(VectorKernel<'a>),
}

impl Sweep<'_> {
    fn output_len(&self, asm: &Assembler) -> usize {
        let m = asm.mesh();
        match self {
            Sweep::Matrix(_) => asm.matrix().nnz(),
            Sweep::Vector(k) => m.nnode() * k.ncomp(m.dim()),
        }
    }

    /// One whole-mesh sweep (or one group) into `out`, zeroed first.
    fn run(&self, asm: &Assembler, group: Option<usize>, mat: &mut CsrMatrix, vec: &mut [f64]) -> BenchResult<()> {
        match self {
            Sweep::Matrix(k) => {
                mat.fill(0.0);
                match group {
                    Some(g) => asm.assemble_matrix_group(g, k, mat)?,
                    None => asm.assemble_matrix(k, mat)?,
                }
            }
            Sweep::Vector(k) => {
                vec.fill(0.0);
                match group {
                    Some(g) => asm.assemble_vector_group(g, k, vec)?,
                    None => asm.assemble_vector(k, vec)?,
                }
            }
        }
        Ok(())
    }

    fn output<'b>(&self, mat: &'b CsrMatrix, vec: &'b [f64]) -> &'b [f64] {
        match self {
            Sweep::Matrix(_) => &mat.vals,
            Sweep::Vector(_) => vec,
        }
    }
}

fn assembler<'m>(mesh: &'m Mesh, layout: Layout, threads: usize) -> BenchResult<Assembler<'m>> {
    Ok(Assembler::new(mesh, layout)?.with_threads(threads))
}

/// Times one kernel over the configured mesh and layouts after checking
/// that the scalar and packed paths agree.
pub fn run_kernel_bench(cfg: &BenchConfig) -> BenchResult<Report> {
    cfg.validate()?;
    let mut report = base_report(cfg);
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    match cfg.kernel {
        KernelName::Mass | KernelName::Laplacian | KernelName::Momentum => {
            let mesh = cfg.build_mesh()?;
            let velocity = random_vec(&mut rng, mesh.nnode() * mesh.dim());
            let sweep = match cfg.kernel {
                KernelName::Mass => Sweep::Matrix(MatrixKernel::Mass),
                KernelName::Laplacian => Sweep::Matrix(MatrixKernel::Laplacian),
                _ => Sweep::Vector(VectorKernel::Momentum {
                    velocity: &velocity,
                    rho: 1.0,
                    mu: 0.01,
                }),
            };
            assembly_bench(cfg, &mesh, &sweep, &mut report)?;
        }
        KernelName::Spmv => {
            let mesh = cfg.build_mesh()?;
            let a = laplacian(&mesh, cfg.packed_layout()?, cfg.threads)?;
            let x = random_vec(&mut rng, a.n());
            let mut y = vec![0.0; a.n()];
            sparse::spmv(&a, &x, &mut y)?;
            let serial = checksum(&y);
            sparse::spmv_par(&a, &x, &mut y)?;
            let parallel = checksum(&y);
            gate("spmv", serial, parallel)?;
            report.checksums.insert("spmv/serial".into(), serial.0);
            report.checksums.insert("spmv/parallel".into(), parallel.0);
            let t = measure(cfg.warmup, cfg.reps, || {
                if cfg.threads > 1 {
                    sparse::spmv_par(&a, &x, &mut y)?;
                } else {
                    sparse::spmv(&a, &x, &mut y)?;
                }
                Ok(())
            })?;
            report.kernels.insert("spmv".into(), t);
        }
        KernelName::Axpy | KernelName::Dot => {
            let x = random_vec(&mut rng, cfg.len);
            let y0 = random_vec(&mut rng, cfg.len);
            vector_bench(cfg, &x, &y0, &mut report)?;
        }
        KernelName::Cg => {
            let mesh = cfg.build_mesh()?;
            let mut solutions = Vec::new();
            let mut b = random_vec(&mut rng, mesh.nnode());
            b[0] = 0.0;
            for layout in [Layout::Scalar, cfg.packed_layout()?] {
                let mut a = laplacian(&mesh, layout, cfg.threads)?;
                a.pin(0);
                let diag = jacobi_diagonal(&a)?;
                let x0 = vec![0.0; a.n()];
                let (x, stats) = pcg_solve(&a, &b, &x0, &diag, &cfg.solver())?;
                report.solver = Some(SolverSummary::from(&stats));
                solutions.push((layout, a, diag, x));
            }
            let sums: Vec<(f64, f64)> = solutions.iter().map(|s| checksum(&s.3)).collect();
            gate("cg", sums[0], sums[1])?;
            for (s, sum) in solutions.iter().zip(&sums) {
                report.checksums.insert(format!("cg/{}", layout_label(s.0)), sum.0);
            }
            for (layout, a, diag, _) in &solutions {
                if !timed(cfg, *layout) {
                    continue;
                }
                let x0 = vec![0.0; a.n()];
                let t = measure(cfg.warmup, cfg.reps, || {
                    pcg_solve(a, &b, &x0, diag, &cfg.solver())?;
                    Ok(())
                })?;
                report.kernels.insert(format!("cg/{}", layout_label(*layout)), t);
            }
        }
        KernelName::Timeloop => return run_profile(cfg),
    }
    Ok(report)
}

fn timed(cfg: &BenchConfig, layout: Layout) -> bool {
    matches!(
        (cfg.layout, layout),
        (None, _) | (Some(LayoutArg::Scalar), Layout::Scalar) | (Some(LayoutArg::Packed), Layout::Packed(_))
    )
}

fn laplacian(mesh: &Mesh, layout: Layout, threads: usize) -> BenchResult<CsrMatrix> {
    let asm = assembler(mesh, layout, threads)?;
    let mut a = asm.matrix();
    asm.assemble_matrix(&MatrixKernel::Laplacian, &mut a)?;
    Ok(a)
}

fn assembly_bench(cfg: &BenchConfig, mesh: &Mesh, sweep: &Sweep, report: &mut Report) -> BenchResult<()> {
    let name = cfg.kernel.name();
    let scalar = assembler(mesh, Layout::Scalar, cfg.threads)?;
    let packed = assembler(mesh, cfg.packed_layout()?, cfg.threads)?;
    let mut sums = Vec::new();
    for asm in [&scalar, &packed] {
        let mut mat = asm.matrix();
        let mut vec = vec![0.0; sweep.output_len(asm)];
        sweep.run(asm, None, &mut mat, &mut vec)?;
        let sum = checksum(sweep.output(&mat, &vec));
        report
            .checksums
            .insert(format!("{name}/{}", layout_label(asm.layout())), sum.0);
        sums.push(sum);
    }
    gate(name, sums[0], sums[1])?;

    for asm in [&scalar, &packed] {
        if !timed(cfg, asm.layout()) {
            continue;
        }
        let label = format!("{name}/{}", layout_label(asm.layout()));
        let mut mat = asm.matrix();
        let mut vec = vec![0.0; sweep.output_len(asm)];
        let t = measure(cfg.warmup, cfg.reps, || sweep.run(asm, None, &mut mat, &mut vec))?;
        report.kernels.insert(label.clone(), t);
        if asm.packs().len() > 1 {
            for (g, pack) in asm.packs().iter().enumerate() {
                let t = measure(cfg.warmup, cfg.reps, || sweep.run(asm, Some(g), &mut mat, &mut vec))?;
                report.kernels.insert(format!("{label}/{}", pack.kind), t);
            }
        }
    }
    Ok(())
}

fn axpy_packed(vs: usize, alpha: f64, x: &[f64], y: &mut [f64]) -> packfem::Result<()> {
    match vs {
        1 => sparse::axpy_chunked::<1>(alpha, x, y),
        2 => sparse::axpy_chunked::<2>(alpha, x, y),
        4 => sparse::axpy_chunked::<4>(alpha, x, y),
        8 => sparse::axpy_chunked::<8>(alpha, x, y),
        16 => sparse::axpy_chunked::<16>(alpha, x, y),
        _ => sparse::axpy_chunked::<32>(alpha, x, y),
    }
}

fn dot_packed(vs: usize, x: &[f64], y: &[f64]) -> packfem::Result<f64> {
    match vs {
        1 => sparse::dot_chunked::<1>(x, y),
        2 => sparse::dot_chunked::<2>(x, y),
        4 => sparse::dot_chunked::<4>(x, y),
        8 => sparse::dot_chunked::<8>(x, y),
        16 => sparse::dot_chunked::<16>(x, y),
        _ => sparse::dot_chunked::<32>(x, y),
    }
}

fn vector_bench(cfg: &BenchConfig, x: &[f64], y0: &[f64], report: &mut Report) -> BenchResult<()> {
    let vs = cfg.vector_size;
    let alpha = 1e-3;
    let name = cfg.kernel.name();
    let scalar_label = format!("{name}/scalar");
    let packed_label = format!("{name}/packed-vs{vs}");
    let (s, p) = if cfg.kernel == KernelName::Axpy {
        let mut ys = y0.to_vec();
        let mut yp = y0.to_vec();
        sparse::axpy(alpha, x, &mut ys)?;
        axpy_packed(vs, alpha, x, &mut yp)?;
        (checksum(&ys), checksum(&yp))
    } else {
        let s = sparse::dot(x, y0)?;
        let p = dot_packed(vs, x, y0)?;
        let scale = checksum(x).1.max(checksum(y0).1);
        ((s, scale), (p, scale))
    };
    gate(name, s, p)?;
    report.checksums.insert(scalar_label.clone(), s.0);
    report.checksums.insert(packed_label.clone(), p.0);

    let mut y = y0.to_vec();
    let mut sink = 0.0;
    if cfg.layout != Some(LayoutArg::Packed) {
        let t = measure(cfg.warmup, cfg.reps, || {
            if cfg.kernel == KernelName::Axpy {
                sparse::axpy(alpha, x, &mut y)?;
            } else {
                sink += sparse::dot(x, &y)?;
            }
            Ok(())
        })?;
        report.kernels.insert(scalar_label, t);
    }
    if cfg.layout != Some(LayoutArg::Scalar) {
        let t = measure(cfg.warmup, cfg.reps, || {
            if cfg.kernel == KernelName::Axpy {
                axpy_packed(vs, alpha, x, &mut y)?;
            } else {
                sink += dot_packed(vs, x, &y)?;
            }
            Ok(())
        })?;
        report.kernels.insert(packed_label, t);
    }
    std::hint::black_box(sink);
    Ok(())
}

fn state_checksum(s: &FlowState) -> (f64, f64) {
    let mut acc = (0.0, 0.0);
    for v in [&s.velocity, &s.pressure, &s.heat, &s.species[0], &s.species[1]] {
        let c = checksum(v);
        acc = (acc.0 + c.0, acc.1 + c.1);
    }
    acc
}

fn flow_config(cfg: &BenchConfig) -> FlowConfig {
    FlowConfig {
        properties: Properties::default(),
        time: TimeConfig {
            dt: cfg.dt,
            nsteps: cfg.steps,
            cfl_check: true,
        },
        solver: cfg.solver(),
        ..FlowConfig::default()
    }
}

/// Profiles the coupled time loop and reports the category/equation
/// breakdown of the step.
pub fn run_profile(cfg: &BenchConfig) -> BenchResult<Report> {
    cfg.validate()?;
    let mut report = base_report(cfg);
    let mesh = cfg.build_mesh()?;
    let preset = cfg.preset()?;
    let fcfg = flow_config(cfg);
    let (initial, bc) = preset.initial(&mesh, &fcfg.properties)?;
    let packed_layout = cfg.packed_layout()?;

    let mut sums = Vec::new();
    for layout in [Layout::Scalar, packed_layout] {
        let asm = assembler(&mesh, layout, cfg.threads)?;
        let mut solver = FlowSolver::new(asm, fcfg, bc.clone())?;
        let mut state = initial.clone();
        solver.run_step(&mut state)?;
        let sum = state_checksum(&state);
        report.checksums.insert(format!("timeloop/{}", layout_label(layout)), sum.0);
        sums.push(sum);
    }
    gate("timeloop", sums[0], sums[1])?;

    let layout = match cfg.layout {
        Some(LayoutArg::Scalar) => Layout::Scalar,
        _ => packed_layout,
    };
    let asm = assembler(&mesh, layout, cfg.threads)?;
    let mut solver = FlowSolver::new(asm, fcfg, bc)?;
    let mut state = initial;
    let mut last = None;
    for _ in 0..cfg.steps {
        last = Some(solver.run_step(&mut state)?);
    }
    let profiler = solver.profiler();
    report.set_profile(&profiler.table());
    report.steps_us = profiler.step_times().iter().map(|d| d.as_secs_f64() * 1e6).collect();
    if !report.steps_us.is_empty() {
        report.kernels.insert(
            format!("timeloop/{}", layout_label(layout)),
            KernelTiming::from_samples(&report.steps_us),
        );
    }
    if let Some(step) = last {
        report.solver = Some(SolverSummary::from(&step.solver));
    }
    Ok(report)
}

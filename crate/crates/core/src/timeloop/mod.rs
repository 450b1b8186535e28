//! Fractional-step time integration of incompressible flow with a heat
//! field and two passive species.
//!
//! Each step runs three SSP-RK3 stages. A stage assembles the momentum,
//! heat and species right-hand sides, adds boundary contributions and
//! performs the lumped-mass explicit update. The momentum update carries
//! the previous step's pressure. After the stages one pressure increment
//! is solved with PCG and the velocity is corrected.

pub mod profile;
pub mod rk;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::assembly::{Assembler, BoundaryAssembler, MatrixKernel, VectorKernel};
use crate::error::{Error, Result};
use crate::krylov::{pcg_solve, SolverConfig, SolverStats};
use crate::mesh::Mesh;
use crate::sparse::{self, jacobi_diagonal, CsrMatrix};

pub use profile::{Category, Equation, ProfileTable, Profiler};
pub use rk::{integrate_scalar, observed_order, ssp_rk3_step, SSP_RK3};

/// Constant material data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Properties {
    pub rho: f64,
    pub mu: f64,
    /// Heat diffusivity.
    pub kappa: f64,
    /// Species diffusivity.
    pub diffusivity: f64,
}

impl Default for Properties {
    fn default() -> Self {
        Self {
            rho: 1.0,
            mu: 0.01,
            kappa: 0.01,
            diffusivity: 0.005,
        }
    }
}

impl Properties {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(self.rho > 0.0 && self.mu > 0.0 && self.rho.is_finite() && self.mu.is_finite()) {
            return Err(Error::config("rho and mu must be positive"));
        }
        if !ok(self.kappa) || !ok(self.diffusivity) {
            return Err(Error::config("diffusivities must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub nsteps: usize,
    pub cfl_check: bool,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            nsteps: 10,
            cfl_check: true,
        }
    }
}

/// Robin data for a scalar: boundary flux `beta - alpha * phi`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Robin {
    pub alpha: f64,
    pub beta: f64,
}

/// Pressure operator used by the projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMode {
    /// `sum_c D_c M_L^-1 D_c^T` restricted to free velocity values; the
    /// corrected velocity's discrete divergence equals the solver residual.
    #[default]
    Compatible,
    /// Element Laplacian; an approximate projection.
    Laplacian,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowConfig {
    pub properties: Properties,
    pub time: TimeConfig,
    pub solver: SolverConfig,
    pub projection: ProjectionMode,
    pub heat_bc: Robin,
    pub species_bc: [Robin; 2],
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        self.properties.validate()?;
        self.solver.validate()?;
        if !(self.time.dt > 0.0 && self.time.dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {}", self.time.dt)));
        }
        Ok(())
    }
}

/// Nodal unknowns. `velocity` is node-major with `dim` components.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub heat: Vec<f64>,
    pub species: [Vec<f64>; 2],
}

impl FlowState {
    pub fn zeros(nnode: usize, dim: usize) -> Self {
        Self {
            velocity: vec![0.0; nnode * dim],
            pressure: vec![0.0; nnode],
            heat: vec![0.0; nnode],
            species: [vec![0.0; nnode], vec![0.0; nnode]],
        }
    }

    fn check_finite(&self, step: usize) -> Result<()> {
        let fields: [(&'static str, &[f64]); 5] = [
            ("velocity", &self.velocity),
            ("pressure", &self.pressure),
            ("heat", &self.heat),
            ("species 1", &self.species[0]),
            ("species 2", &self.species[1]),
        ];
        for (field, v) in fields {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { field, step });
            }
        }
        Ok(())
    }
}

/// Strongly imposed velocity values, one flag per node and component.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityBc {
    pub fixed: Vec<bool>,
    pub values: Vec<f64>,
}

impl VelocityBc {
    pub fn none(n: usize) -> Self {
        Self {
            fixed: vec![false; n],
            values: vec![0.0; n],
        }
    }

    /// Every component of every boundary node held at `velocity`.
    pub fn walls(mesh: &Mesh, velocity: &[f64]) -> Self {
        let dim = mesh.dim();
        let mask = mesh.boundary_node_mask();
        let fixed: Vec<bool> = mask.iter().flat_map(|&b| std::iter::repeat_n(b, dim)).collect();
        let values = fixed.iter().zip(velocity).map(|(&f, &v)| if f { v } else { 0.0 }).collect();
        Self { fixed, values }
    }

    /// Zero normal velocity on the faces of the mesh's bounding box.
    pub fn slip_box(mesh: &Mesh) -> Self {
        let dim = mesh.dim();
        let (lo, hi) = bounding_box(mesh);
        let mut bc = Self::none(mesh.nnode() * dim);
        for i in 0..mesh.nnode() {
            let x = mesh.node(i);
            for c in 0..dim {
                let tol = 1e-10 * (hi[c] - lo[c]).max(1.0);
                if (x[c] - lo[c]).abs() <= tol || (x[c] - hi[c]).abs() <= tol {
                    bc.fixed[i * dim + c] = true;
                }
            }
        }
        bc
    }
}

fn bounding_box(mesh: &Mesh) -> ([f64; 3], [f64; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for x in mesh.coords().chunks(mesh.dim()) {
        for (c, &v) in x.iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    (lo, hi)
}

/// Named initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Fluid at rest between no-slip walls; every field zero.
    Rest,
    /// Taylor-Green vortex on the unit square with free-slip walls, plus a
    /// heat gradient and two species blobs.
    TaylorGreen2d,
    /// Uniform stream along x, held on the whole boundary.
    Uniform,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Rest, Preset::TaylorGreen2d, Preset::Uniform];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Rest => "rest",
            Preset::TaylorGreen2d => "taylor-green-2d",
            Preset::Uniform => "uniform",
        }
    }

    pub fn initial(self, mesh: &Mesh, props: &Properties) -> Result<(FlowState, VelocityBc)> {
        let dim = mesh.dim();
        let n = mesh.nnode();
        let mut s = FlowState::zeros(n, dim);
        let bc = match self {
            Preset::Rest => VelocityBc::walls(mesh, &s.velocity),
            Preset::Uniform => {
                for i in 0..n {
                    s.velocity[i * dim] = 1.0;
                }
                VelocityBc::walls(mesh, &s.velocity)
            }
            Preset::TaylorGreen2d => {
                if dim != 2 {
                    return Err(Error::config("taylor-green-2d needs a 2D mesh"));
                }
                use std::f64::consts::PI;
                for i in 0..n {
                    let x = mesh.node(i);
                    let (sx, cx) = (PI * x[0]).sin_cos();
                    let (sy, cy) = (PI * x[1]).sin_cos();
                    s.velocity[2 * i] = sx * cy;
                    s.velocity[2 * i + 1] = -cx * sy;
                    s.pressure[i] = 0.25 * props.rho * ((2.0 * PI * x[0]).cos() + (2.0 * PI * x[1]).cos());
                    s.heat[i] = x[0];
                    let blob = |cx: f64, cy: f64| (-((x[0] - cx).powi(2) + (x[1] - cy).powi(2)) / 0.02).exp();
                    s.species[0][i] = blob(0.3, 0.5);
                    s.species[1][i] = blob(0.7, 0.5);
                }
                VelocityBc::slip_box(mesh)
            }
        };
        Ok((s, bc))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::config(format!("unknown preset '{s}'")))
    }
}

/// Pressure Laplacian assembled once and pinned at node 0.
pub fn preassemble_laplacian(asm: &Assembler) -> Result<CsrMatrix> {
    let mut l = asm.matrix();
    asm.assemble_matrix(&MatrixKernel::Laplacian, &mut l)?;
    l.pin(0);
    Ok(l)
}

/// `int N_i div(u_h)` for each node.
pub fn discrete_divergence(asm: &Assembler, u: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; asm.mesh().nnode()];
    asm.assemble_vector(&VectorKernel::Divergence { velocity: u }, &mut out)?;
    Ok(out)
}

/// `int N_i grad(p_h)` for each node, node-major components.
pub fn discrete_gradient(asm: &Assembler, p: &[f64]) -> Result<Vec<f64>> {
    let mesh = asm.mesh();
    let mut out = vec![0.0; mesh.nnode() * mesh.dim()];
    asm.assemble_vector(&VectorKernel::Gradient { pressure: p }, &mut out)?;
    Ok(out)
}

fn divergence_with_scale(coupling: &[CsrMatrix], u: &[f64]) -> (Vec<f64>, f64) {
    let dim = coupling.len();
    let n = coupling[0].n();
    let mut div = vec![0.0; n];
    let mut mag = vec![0.0; n];
    for (c, d) in coupling.iter().enumerate() {
        for i in 0..n {
            let (cols, vals) = d.row(i);
            let (mut s, mut a) = (0.0, 0.0);
            for (&j, &v) in cols.iter().zip(vals) {
                let t = v * u[j * dim + c];
                s += t;
                a += t.abs();
            }
            div[i] += s;
            mag[i] += a;
        }
    }
    (div, sparse::norm2(&mag))
}

/// Outcome of one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub solver: SolverStats,
    /// `||D u*||` before the correction.
    pub divergence_before: f64,
    /// `||D u||` after the correction.
    pub divergence_after: f64,
    pub cfl: f64,
}

/// Step driver holding the assembled operators.
pub struct FlowSolver<'m> {
    asm: Assembler<'m>,
    boundary: BoundaryAssembler,
    cfg: FlowConfig,
    bc: VelocityBc,
    lumped: Vec<f64>,
    /// `D_c[i][j] = int N_i dN_j/dx_c`
    coupling: Vec<CsrMatrix>,
    coupling_t: Vec<CsrMatrix>,
    /// Per component, `1 / M_L` on free values and 0 on fixed ones.
    inv_mass_free: Vec<Vec<f64>>,
    pressure_op: CsrMatrix,
    pressure_diag: Vec<f64>,
    constrained: Vec<usize>,
    node_h: Vec<f64>,
    profiler: Profiler,
    steps_done: usize,
}

impl<'m> FlowSolver<'m> {
    pub fn new(asm: Assembler<'m>, cfg: FlowConfig, bc: VelocityBc) -> Result<Self> {
        cfg.validate()?;
        let mesh = asm.mesh();
        let (n, dim) = (mesh.nnode(), mesh.dim());
        if bc.fixed.len() != n * dim || bc.values.len() != n * dim {
            return Err(Error::DimensionMismatch {
                expected: n * dim,
                got: bc.fixed.len(),
            });
        }
        let boundary = BoundaryAssembler::new(mesh)?;
        let mut mass = asm.matrix();
        asm.assemble_matrix(&MatrixKernel::Mass, &mut mass)?;
        let lumped = mass.row_sums();
        if let Some((row, &value)) = lumped.iter().enumerate().find(|(_, &m)| !(m > 0.0)) {
            return Err(Error::SingularPreconditioner { row, value });
        }
        let mut coupling = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut d = asm.matrix();
            asm.assemble_matrix(&MatrixKernel::GradientCoupling { component: c }, &mut d)?;
            coupling.push(d);
        }
        let coupling_t: Vec<CsrMatrix> = coupling.iter().map(CsrMatrix::transpose).collect();
        let inv_mass_free: Vec<Vec<f64>> = (0..dim)
            .map(|c| {
                (0..n)
                    .map(|j| if bc.fixed[j * dim + c] { 0.0 } else { 1.0 / lumped[j] })
                    .collect()
            })
            .collect();
        let mut pressure_op = match cfg.projection {
            ProjectionMode::Compatible => {
                let w: Vec<&[f64]> = inv_mass_free.iter().map(Vec::as_slice).collect();
                CsrMatrix::weighted_gram(&coupling, &w)?
            }
            ProjectionMode::Laplacian => {
                let mut l = asm.matrix();
                asm.assemble_matrix(&MatrixKernel::Laplacian, &mut l)?;
                l
            }
        };
        // Pin node 0 and decouple rows that no free velocity value reaches.
        let mut constrained = vec![0];
        constrained.extend((1..n).filter(|&i| pressure_op.get(i, i) <= 0.0));
        let fixed: Vec<(usize, f64)> = constrained.iter().map(|&i| (i, 0.0)).collect();
        pressure_op.apply_dirichlet(&fixed, None);
        let pressure_diag = jacobi_diagonal(&pressure_op)?;
        let node_h = lumped.iter().map(|m| m.powf(1.0 / dim as f64)).collect();
        Ok(Self {
            asm,
            boundary,
            cfg,
            bc,
            lumped,
            coupling,
            coupling_t,
            inv_mass_free,
            pressure_op,
            pressure_diag,
            constrained,
            node_h,
            profiler: Profiler::new(),
            steps_done: 0,
        })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    pub fn assembler(&self) -> &Assembler<'m> {
        &self.asm
    }

    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped
    }

    pub fn pressure_operator(&self) -> &CsrMatrix {
        &self.pressure_op
    }

    pub fn profiler(&self) -> &Profiler {
        &self.profiler
    }

    pub fn reset_profile(&mut self) {
        self.profiler.reset();
    }

    /// `sum_c D_c u_c` together with the norm of its term-wise absolute
    /// sum, the scale below which the divergence is rounding noise.
    pub fn divergence(&self, u: &[f64]) -> (Vec<f64>, f64) {
        divergence_with_scale(&self.coupling, u)
    }

    /// CFL surrogate `dt |u_i| / h_i` with `h_i = M_L[i]^(1/dim)`.
    pub fn cfl(&self, u: &[f64]) -> f64 {
        let dim = self.coupling.len();
        u.chunks(dim)
            .zip(&self.node_h)
            .map(|(v, h)| v.iter().map(|x| x * x).sum::<f64>().sqrt() / h)
            .fold(0.0, f64::max)
            * self.cfg.time.dt
    }

    /// Runs `cfg.time.nsteps` steps.
    pub fn run(&mut self, state: &mut FlowState) -> Result<Vec<StepReport>> {
        (0..self.cfg.time.nsteps).map(|_| self.run_step(state)).collect()
    }

    /// One fractional step.
    pub fn run_step(&mut self, state: &mut FlowState) -> Result<StepReport> {
        let t_step = Instant::now();
        let mesh = self.asm.mesh();
        let (n, dim) = (mesh.nnode(), mesh.dim());
        for (len, want) in [
            (state.velocity.len(), n * dim),
            (state.pressure.len(), n),
            (state.heat.len(), n),
            (state.species[0].len(), n),
            (state.species[1].len(), n),
        ] {
            if len != want {
                return Err(Error::DimensionMismatch { expected: want, got: len });
            }
        }
        let step = self.steps_done;
        let dt = self.cfg.time.dt;
        let cfl = self.cfl(&state.velocity);
        if self.cfg.time.cfl_check && cfl > 1.0 {
            return Err(Error::Unstable { cfl });
        }
        let Properties {
            rho,
            mu,
            kappa,
            diffusivity,
        } = self.cfg.properties;

        let un = state.velocity.clone();
        let hn = state.heat.clone();
        let sn = state.species.clone();
        let mut ru = vec![0.0; n * dim];
        let mut rs = vec![0.0; n];
        let mut grad_p = vec![0.0; n];
        let prof = &mut self.profiler;

        for stage in 0..3 {
            let u_stage = state.velocity.clone();

            // Navier-Stokes
            ru.fill(0.0);
            prof.time(Category::MatrixAssembly, Equation::NavierStokes, || {
                self.asm.assemble_vector(
                    &VectorKernel::Momentum {
                        velocity: &u_stage,
                        rho,
                        mu,
                    },
                    &mut ru,
                )
            })?;
            prof.time(Category::Others, Equation::NavierStokes, || -> Result<()> {
                for c in 0..dim {
                    sparse::spmv(&self.coupling_t[c], &state.pressure, &mut grad_p)?;
                    for j in 0..n {
                        ru[j * dim + c] += grad_p[j];
                    }
                }
                for k in 0..n * dim {
                    let l = ru[k] / (rho * self.lumped[k / dim]);
                    state.velocity[k] = rk::combine(stage, un[k], u_stage[k], dt, l);
                }
                Ok(())
            })?;
            prof.time(Category::BoundaryAssembly, Equation::NavierStokes, || {
                for k in 0..n * dim {
                    if self.bc.fixed[k] {
                        state.velocity[k] = self.bc.values[k];
                    }
                }
            });

            // Heat and species share the stage velocity.
            let scalars: [(Equation, &mut Vec<f64>, &[f64], f64, Robin); 3] = {
                let [s0, s1] = &mut state.species;
                [
                    (Equation::Heat, &mut state.heat, &hn, kappa, self.cfg.heat_bc),
                    (Equation::Chemics, s0, &sn[0], diffusivity, self.cfg.species_bc[0]),
                    (Equation::Chemics, s1, &sn[1], diffusivity, self.cfg.species_bc[1]),
                ]
            };
            for (eq, phi, phin, kap, robin) in scalars {
                rs.fill(0.0);
                prof.time(Category::MatrixAssembly, eq, || {
                    self.asm.assemble_vector(
                        &VectorKernel::ScalarTransport {
                            phi,
                            velocity: &u_stage,
                            kappa: kap,
                        },
                        &mut rs,
                    )
                })?;
                if robin != Robin::default() {
                    prof.time(Category::BoundaryAssembly, eq, || {
                        self.boundary
                            .assemble_flux(mesh.coords(), robin.alpha, robin.beta, phi, &mut rs)
                    })?;
                }
                prof.time(Category::Others, eq, || {
                    for i in 0..n {
                        phi[i] = rk::combine(stage, phin[i], phi[i], dt, rs[i] / self.lumped[i]);
                    }
                });
            }
        }

        // Projection
        let (mut rhs, scale) = prof.time(Category::Others, Equation::NavierStokes, || {
            divergence_with_scale(&self.coupling, &state.velocity)
        });
        let divergence_before = sparse::norm2(&rhs);
        let solver = if divergence_before <= 1e-12 * scale {
            SolverStats {
                iterations: 0,
                residual_history: vec![0.0],
                true_residual: 0.0,
                converged: true,
            }
        } else {
            for v in rhs.iter_mut() {
                *v *= -rho / dt;
            }
            for &i in &self.constrained {
                rhs[i] = 0.0;
            }
            let zero = vec![0.0; n];
            let (dp, stats) = prof.time(Category::AlgebraicSolver, Equation::NavierStokes, || {
                pcg_solve(&self.pressure_op, &rhs, &zero, &self.pressure_diag, &self.cfg.solver)
            })?;
            if !stats.converged {
                return Err(Error::NotConverged { stats: Box::new(stats) });
            }
            prof.time(Category::Others, Equation::NavierStokes, || -> Result<()> {
                for c in 0..dim {
                    sparse::spmv(&self.coupling_t[c], &dp, &mut grad_p)?;
                    let w = &self.inv_mass_free[c];
                    for j in 0..n {
                        state.velocity[j * dim + c] += dt / rho * w[j] * grad_p[j];
                    }
                }
                for (p, d) in state.pressure.iter_mut().zip(&dp) {
                    *p += d;
                }
                Ok(())
            })?;
            stats
        };
        let divergence_after = prof.time(Category::Others, Equation::NavierStokes, || {
            sparse::norm2(&divergence_with_scale(&self.coupling, &state.velocity).0)
        });
        state.check_finite(step)?;
        self.steps_done += 1;
        self.profiler.record_step(t_step.elapsed());
        Ok(StepReport {
            step,
            solver,
            divergence_before,
            divergence_after,
            cfl,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Layout;
    use crate::mesh::samples::unit_square_two_triangles;
    use crate::mesh::{generate_box_mesh, ElementType};

    fn solver<'m>(mesh: &'m Mesh, preset: Preset, layout: Layout, cfg: FlowConfig) -> (FlowSolver<'m>, FlowState) {
        let (state, bc) = preset.initial(mesh, &cfg.properties).unwrap();
        let asm = Assembler::new(mesh, layout).unwrap();
        (FlowSolver::new(asm, cfg, bc).unwrap(), state)
    }

    #[test]
    fn laplacian_of_two_triangles() {
        let m = unit_square_two_triangles();
        let asm = Assembler::new(&m, Layout::Scalar).unwrap();
        let mut l = asm.matrix();
        asm.assemble_matrix(&MatrixKernel::Laplacian, &mut l).unwrap();
        assert_eq!(l.n(), 4);
        assert!(l.row_sums().iter().all(|r| r.abs() < 1e-14));
        let pinned = preassemble_laplacian(&asm).unwrap();
        // Row and column 0 become identity; other rows act unchanged on
        // vectors vanishing at the pinned node.
        let x = [0.0, 1.0, -2.0, 0.5];
        let (mut y, mut z) = (vec![0.0; 4], vec![0.0; 4]);
        sparse::spmv(&pinned, &x, &mut y).unwrap();
        sparse::spmv(&l, &x, &mut z).unwrap();
        assert_eq!(y[0], 0.0);
        assert_eq!(&y[1..], &z[1..]);
        sparse::spmv(&pinned, &[1.0, 0.0, 0.0, 0.0], &mut y).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(pinned, preassemble_laplacian(&asm).unwrap());
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let m = generate_box_mesh(ElementType::Hex08, 3, 3, 3, [1.0; 3]).unwrap();
        let (mut s, mut st) = solver(&m, Preset::Rest, Layout::packed(4).unwrap(), FlowConfig::default());
        let before = st.clone();
        for _ in 0..3 {
            let r = s.run_step(&mut st).unwrap();
            assert_eq!(r.solver.iterations, 0);
        }
        assert_eq!(st, before);
    }

    #[test]
    fn uniform_stream_stays_uniform() {
        let m = generate_box_mesh(ElementType::Tet04, 3, 3, 3, [1.0; 3]).unwrap();
        let (mut s, mut st) = solver(&m, Preset::Uniform, Layout::packed(8).unwrap(), FlowConfig::default());
        for _ in 0..3 {
            s.run_step(&mut st).unwrap();
            for v in st.velocity.chunks(3) {
                assert!((v[0] - 1.0).abs() < 1e-9 && v[1].abs() < 1e-9 && v[2].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn projection_removes_divergence() {
        let m = generate_box_mesh(ElementType::Quad04, 12, 12, 0, [1.0, 1.0, 0.0]).unwrap();
        let cfg = FlowConfig {
            time: TimeConfig {
                dt: 0.01,
                nsteps: 3,
                cfl_check: true,
            },
            ..FlowConfig::default()
        };
        let (mut s, mut st) = solver(&m, Preset::TaylorGreen2d, Layout::packed(4).unwrap(), cfg);
        for r in s.run(&mut st).unwrap() {
            assert!(r.solver.converged);
            assert!(r.divergence_after <= 10.0 * 1e-8 * r.divergence_before, "{r:?}");
        }
    }

    #[test]
    fn layouts_give_identical_steps() {
        let m = generate_box_mesh(ElementType::Tri03, 8, 8, 0, [1.0, 1.0, 0.0]).unwrap();
        let cfg = FlowConfig {
            time: TimeConfig {
                dt: 0.01,
                nsteps: 2,
                cfl_check: true,
            },
            ..FlowConfig::default()
        };
        let (mut a, mut sa) = solver(&m, Preset::TaylorGreen2d, Layout::Scalar, cfg);
        let (mut b, mut sb) = solver(&m, Preset::TaylorGreen2d, Layout::packed(8).unwrap(), cfg);
        a.run(&mut sa).unwrap();
        b.run(&mut sb).unwrap();
        for (x, y) in sa.velocity.iter().zip(&sb.velocity) {
            assert!((x - y).abs() <= 1e-12);
        }
        assert_eq!(sa.heat, sb.heat);
    }

    #[test]
    fn divergence_and_gradient_examples() {
        let m = generate_box_mesh(ElementType::Quad04, 4, 4, 0, [1.0, 1.0, 0.0]).unwrap();
        let asm = Assembler::new(&m, Layout::packed(2).unwrap()).unwrap();
        let lin: Vec<f64> = m.coords().chunks(2).flat_map(|x| [x[0], -x[1]]).collect();
        assert!(discrete_divergence(&asm, &lin).unwrap().iter().all(|v| v.abs() < 1e-10));
        let g = discrete_gradient(&asm, &vec![2.5; m.nnode()]).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn excessive_time_step_is_rejected() {
        let m = generate_box_mesh(ElementType::Quad04, 8, 8, 0, [1.0, 1.0, 0.0]).unwrap();
        let cfg = FlowConfig {
            time: TimeConfig {
                dt: 10.0,
                nsteps: 1,
                cfl_check: true,
            },
            ..FlowConfig::default()
        };
        let (mut s, mut st) = solver(&m, Preset::TaylorGreen2d, Layout::Scalar, cfg);
        assert!(matches!(s.run_step(&mut st), Err(Error::Unstable { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        let m = generate_box_mesh(ElementType::Quad04, 6, 6, 0, [1.0, 1.0, 0.0]).unwrap();
        let cfg = FlowConfig {
            time: TimeConfig {
                dt: 0.5,
                nsteps: 200,
                cfl_check: false,
            },
            ..FlowConfig::default()
        };
        let (mut s, mut st) = solver(&m, Preset::TaylorGreen2d, Layout::Scalar, cfg);
        let err = s.run(&mut st).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. } | Error::NotConverged { .. } | Error::Breakdown { .. }), "{err:?}");
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("vortex".parse::<Preset>().is_err());
    }
}

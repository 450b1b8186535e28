use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use packfem::assembly::Layout;
use packfem::krylov::SolverConfig;
use packfem::mesh::{generate_box_mesh, generate_mixed_mesh, read_mesh, renumber_by_type, ElementType, Mesh};
use packfem::packing::SUPPORTED_VECTOR_SIZES;
use packfem::timeloop::Preset;
use serde::Serialize;

use crate::error::{BenchError, BenchResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshGen {
    Hex,
    Tet,
    Pyr,
    Mixed,
    Quad,
    Tri,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelName {
    Mass,
    Laplacian,
    Momentum,
    Spmv,
    Axpy,
    Dot,
    Cg,
    Timeloop,
}

impl KernelName {
    pub fn name(self) -> &'static str {
        match self {
            KernelName::Mass => "mass",
            KernelName::Laplacian => "laplacian",
            KernelName::Momentum => "momentum",
            KernelName::Spmv => "spmv",
            KernelName::Axpy => "axpy",
            KernelName::Dot => "dot",
            KernelName::Cg => "cg",
            KernelName::Timeloop => "timeloop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutArg {
    Scalar,
    Packed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Json,
    Csv,
}

/// Benchmark configuration, parsed from the command line.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "packfem-bench", version, about = "Times packed and scalar finite-element kernels")]
pub struct BenchConfig {
    /// Structured mesh generator; defaults to quad for timeloop and hex otherwise.
    #[arg(long, value_enum)]
    pub mesh_gen: Option<MeshGen>,
    #[arg(long, default_value_t = 20)]
    pub nx: usize,
    #[arg(long, default_value_t = 20)]
    pub ny: usize,
    #[arg(long, default_value_t = 20)]
    pub nz: usize,
    /// Pyramid fraction of the mixed generator.
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    /// Mesh file, overrides the generator.
    #[arg(long)]
    pub mesh_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KernelName::Mass)]
    pub kernel: KernelName,
    /// Time a single layout; both are timed when omitted.
    #[arg(long, value_enum)]
    pub layout: Option<LayoutArg>,
    #[arg(long, default_value_t = 8)]
    pub vector_size: usize,
    #[arg(long, default_value_t = 3)]
    pub warmup: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Relative tolerance of the CG solver.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// Time steps of the timeloop kernel.
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value = "taylor-green-2d")]
    pub preset: String,
    /// Vector length of axpy and dot.
    #[arg(long, default_value_t = 1_000_000)]
    pub len: usize,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    pub out: OutFormat,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig::parse_from(["packfem-bench"])
    }
}

impl BenchConfig {
    pub fn validate(&self) -> BenchResult<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.reps < 1 {
            return bad("--reps must be at least 1".into());
        }
        if !SUPPORTED_VECTOR_SIZES.contains(&self.vector_size) {
            return bad(format!(
                "--vector-size {} not in {:?}",
                self.vector_size, SUPPORTED_VECTOR_SIZES
            ));
        }
        if self.threads < 1 {
            return bad("--threads must be at least 1".into());
        }
        if self.mesh_file.is_none() && (self.nx == 0 || self.ny == 0 || self.nz == 0) {
            return bad("--nx, --ny and --nz must be positive".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("--dt must be positive, got {}", self.dt));
        }
        if !(0.0..=1.0).contains(&self.fraction) {
            return bad(format!("--fraction must lie in [0, 1], got {}", self.fraction));
        }
        if self.len == 0 {
            return bad("--len must be positive".into());
        }
        self.solver().validate()?;
        self.preset()?;
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            rel_tolerance: self.tol,
            max_iterations: self.max_iter,
        }
    }

    pub fn preset(&self) -> BenchResult<Preset> {
        Ok(self.preset.parse::<Preset>()?)
    }

    pub fn packed_layout(&self) -> BenchResult<Layout> {
        Ok(Layout::packed(self.vector_size)?)
    }

    /// Layouts to time, scalar first.
    pub fn timed_layouts(&self) -> BenchResult<Vec<Layout>> {
        Ok(match self.layout {
            Some(LayoutArg::Scalar) => vec![Layout::Scalar],
            Some(LayoutArg::Packed) => vec![self.packed_layout()?],
            None => vec![Layout::Scalar, self.packed_layout()?],
        })
    }

    pub fn mesh_gen(&self) -> MeshGen {
        self.mesh_gen.unwrap_or(match self.kernel {
            KernelName::Timeloop => MeshGen::Quad,
            _ => MeshGen::Hex,
        })
    }

    /// Builds (or reads) the mesh and groups it by element type.
    pub fn build_mesh(&self) -> BenchResult<Mesh> {
        let mesh = if let Some(path) = &self.mesh_file {
            let file = std::fs::File::open(path)
                .map_err(|e| BenchError::Config(format!("cannot open {}: {e}", path.display())))?;
            read_mesh(std::io::BufReader::new(file))?
        } else {
            let (nx, ny, nz) = (self.nx, self.ny, self.nz);
            match self.mesh_gen() {
                MeshGen::Hex => generate_box_mesh(ElementType::Hex08, nx, ny, nz, [1.0; 3])?,
                MeshGen::Tet => generate_box_mesh(ElementType::Tet04, nx, ny, nz, [1.0; 3])?,
                MeshGen::Pyr => generate_box_mesh(ElementType::Pyr05, nx, ny, nz, [1.0; 3])?,
                MeshGen::Mixed => generate_mixed_mesh(nx, ny, nz, self.fraction)?,
                MeshGen::Quad => generate_box_mesh(ElementType::Quad04, nx, ny, 0, [1.0, 1.0, 0.0])?,
                MeshGen::Tri => generate_box_mesh(ElementType::Tri03, nx, ny, 0, [1.0, 1.0, 0.0])?,
            }
        };
        Ok(if mesh.is_type_grouped() {
            mesh
        } else {
            renumber_by_type(&mesh).0
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = BenchConfig::default();
        c.validate().unwrap();
        assert_eq!(c.reps, 20);
        assert_eq!(c.warmup, 3);
        assert_eq!(c.mesh_gen(), MeshGen::Hex);
    }

    #[test]
    fn flags_parse() {
        let c = BenchConfig::try_parse_from([
            "packfem-bench",
            "--mesh-gen",
            "tet",
            "--nx",
            "3",
            "--kernel",
            "laplacian",
            "--layout",
            "packed",
            "--vector-size",
            "4",
            "--out",
            "csv",
            "--seed",
            "7",
        ])
        .unwrap();
        assert_eq!(c.mesh_gen(), MeshGen::Tet);
        assert_eq!(c.kernel, KernelName::Laplacian);
        assert_eq!(c.timed_layouts().unwrap(), vec![Layout::packed(4).unwrap()]);
        assert_eq!(c.out, OutFormat::Csv);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for args in [
            &["x", "--reps", "0"][..],
            &["x", "--vector-size", "3"],
            &["x", "--tol", "2"],
            &["x", "--dt", "0"],
            &["x", "--preset", "nope"],
            &["x", "--nx", "0"],
        ] {
            let c = BenchConfig::try_parse_from(args).unwrap();
            assert!(matches!(c.validate(), Err(BenchError::Config(_))), "{args:?}");
        }
    }
}

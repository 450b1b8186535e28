//! Benchmark and verification harness for the `packfem` kernels.
//!
//! Every timing is preceded by a correctness gate comparing the scalar and
//! packed paths on the same input.

pub mod config;
pub mod env;
pub mod error;
pub mod report;
pub mod run;

pub use config::{BenchConfig, KernelName, LayoutArg, MeshGen, OutFormat};
pub use error::{BenchError, BenchResult};
pub use report::{emit_report, KernelTiming, Report};
pub use run::{run, run_kernel_bench, run_profile};

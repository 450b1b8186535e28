use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use packfem_bench::{emit_report, run, BenchConfig};

fn main() -> ExitCode {
    let cfg = match BenchConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cfg) {
        Ok(report) => {
            let bytes = emit_report(&report, cfg.out);
            if std::io::stdout().write_all(&bytes).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("packfem-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

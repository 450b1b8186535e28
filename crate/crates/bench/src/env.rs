//! Host and build description recorded with each report.

use indexmap::IndexMap;

pub fn cpu_model() -> String {
    std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| "unknown".into())
}

/// Widest SIMD register width the CPU reports, in bits.
pub fn vector_width_bits() -> Option<u32> {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            return Some(512);
        }
        if std::arch::is_x86_feature_detected!("avx") {
            return Some(256);
        }
        Some(128)
    }
    #[cfg(target_arch = "aarch64")]
    {
        Some(128)
    }
    #[cfg(not(any(target_arch = "x86_64", target_arch = "aarch64")))]
    {
        None
    }
}

/// Widest SIMD width the binary was compiled for.
pub fn compiled_vector_width_bits() -> u32 {
    if cfg!(target_feature = "avx512f") {
        512
    } else if cfg!(target_feature = "avx") {
        256
    } else {
        128
    }
}

pub fn environment() -> IndexMap<String, String> {
    let mut m = IndexMap::new();
    m.insert("cpu_model".into(), cpu_model());
    m.insert(
        "logical_cpus".into(),
        std::thread::available_parallelism().map_or(1, |n| n.get()).to_string(),
    );
    m.insert(
        "vector_width_bits".into(),
        vector_width_bits().map_or("unknown".into(), |b| b.to_string()),
    );
    m.insert("compiled_vector_width_bits".into(), compiled_vector_width_bits().to_string());
    m.insert("rustc".into(), env!("PACKFEM_RUSTC").into());
    m.insert("rustflags".into(), env!("PACKFEM_RUSTFLAGS").into());
    m.insert("profile".into(), env!("PACKFEM_PROFILE").into());
    m.insert("opt_level".into(), env!("PACKFEM_OPT_LEVEL").into());
    m.insert("target".into(), env!("PACKFEM_TARGET").into());
    m.insert("os".into(), std::env::consts::OS.into());
    m.insert("arch".into(), std::env::consts::ARCH.into());
    m
}

use indexmap::IndexMap;
use packfem::krylov::SolverStats;
use packfem::timeloop::{Category, Equation, ProfileTable};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::OutFormat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryEntry {
    pub time_us: f64,
    pub percent: f64,
    /// Share of the whole step, per equation.
    pub by_equation: IndexMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelTiming {
    pub median_us: f64,
    pub mean_us: f64,
    pub min_us: f64,
    pub reps: usize,
}

impl KernelTiming {
    pub fn from_samples(samples_us: &[f64]) -> Self {
        let mut s = samples_us.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n == 0 {
            0.0
        } else if n % 2 == 1 {
            s[n / 2]
        } else {
            0.5 * (s[n / 2 - 1] + s[n / 2])
        };
        Self {
            median_us: median,
            mean_us: if n == 0 { 0.0 } else { s.iter().sum::<f64>() / n as f64 },
            min_us: s.first().copied().unwrap_or(0.0),
            reps: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub iterations: usize,
    pub converged: bool,
    pub true_residual: f64,
    pub residuals: Vec<f64>,
}

impl From<&SolverStats> for SolverSummary {
    fn from(s: &SolverStats) -> Self {
        Self {
            iterations: s.iterations,
            converged: s.converged,
            true_residual: s.true_residual,
            residuals: s.residual_history.clone(),
        }
    }
}

/// Benchmark or profile results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: IndexMap<String, Value>,
    pub environment: IndexMap<String, String>,
    pub categories: IndexMap<String, CategoryEntry>,
    pub equations: IndexMap<String, f64>,
    pub kernels: IndexMap<String, KernelTiming>,
    pub checksums: IndexMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSummary>,
    /// Wall time of each profiled step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps_us: Vec<f64>,
}

impl Default for Report {
    fn default() -> Self {
        let zero_eq = || Equation::ALL.iter().map(|e| (e.name().to_string(), 0.0)).collect();
        Self {
            config: IndexMap::new(),
            environment: IndexMap::new(),
            categories: Category::ALL
                .iter()
                .map(|c| {
                    let entry = CategoryEntry {
                        time_us: 0.0,
                        percent: 0.0,
                        by_equation: zero_eq(),
                    };
                    (c.name().to_string(), entry)
                })
                .collect(),
            equations: zero_eq(),
            kernels: IndexMap::new(),
            checksums: IndexMap::new(),
            solver: None,
            steps_us: Vec::new(),
        }
    }
}

impl Report {
    pub fn set_profile(&mut self, table: &ProfileTable) {
        for row in &table.rows {
            let by_equation = Equation::ALL
                .iter()
                .zip(row.by_equation_percent)
                .map(|(e, p)| (e.name().to_string(), p))
                .collect();
            self.categories.insert(
                row.category.name().to_string(),
                CategoryEntry {
                    time_us: row.time_us,
                    percent: row.percent,
                    by_equation,
                },
            );
        }
        for (e, p) in Equation::ALL.iter().zip(table.equation_percent) {
            self.equations.insert(e.name().to_string(), p);
        }
    }

    pub fn percent_sum(&self) -> f64 {
        self.categories.values().map(|c| c.percent).sum()
    }

    /// Long-format rows `(section, name, field, value)` in schema order.
    pub fn rows(&self) -> Vec<[String; 4]> {
        let mut out = Vec::new();
        let mut push = |s: &str, n: &str, f: &str, v: String| out.push([s.into(), n.into(), f.into(), v]);
        let num = |v: f64| v.to_string();
        for (k, v) in &self.config {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            push("config", k, "value", text);
        }
        for (k, v) in &self.environment {
            push("environment", k, "value", v.clone());
        }
        for (k, c) in &self.categories {
            push("categories", k, "time_us", num(c.time_us));
            push("categories", k, "percent", num(c.percent));
            for (e, p) in &c.by_equation {
                push("categories", k, &format!("percent_{e}"), num(*p));
            }
        }
        for (k, v) in &self.equations {
            push("equations", k, "percent", num(*v));
        }
        for (k, t) in &self.kernels {
            push("kernels", k, "median_us", num(t.median_us));
            push("kernels", k, "mean_us", num(t.mean_us));
            push("kernels", k, "min_us", num(t.min_us));
            push("kernels", k, "reps", t.reps.to_string());
        }
        for (k, v) in &self.checksums {
            push("checksums", k, "value", num(*v));
        }
        if let Some(s) = &self.solver {
            push("solver", "pcg", "iterations", s.iterations.to_string());
            push("solver", "pcg", "converged", s.converged.to_string());
            push("solver", "pcg", "true_residual", num(s.true_residual));
            for (i, r) in s.residuals.iter().enumerate() {
                push("solver", "pcg", &format!("residual_{i}"), num(*r));
            }
        }
        for (i, t) in self.steps_us.iter().enumerate() {
            push("steps", &i.to_string(), "time_us", num(*t));
        }
        out
    }
}

pub const CSV_HEADER: [&str; 4] = ["section", "name", "field", "value"];

/// Serializes the report. Identical reports give identical bytes.
pub fn emit_report(report: &Report, format: OutFormat) -> Vec<u8> {
    match format {
        OutFormat::Json => {
            let mut v = serde_json::to_vec_pretty(report).expect("report is serializable");
            v.push(b'\n');
            v
        }
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for row in report.rows() {
                w.write_record(&row).expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
    }
}

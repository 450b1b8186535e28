//! Wall-clock attribution of the time step to operation categories and
//! equations.

use std::fmt;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    MatrixAssembly,
    BoundaryAssembly,
    AlgebraicSolver,
    Others,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::MatrixAssembly,
        Category::BoundaryAssembly,
        Category::AlgebraicSolver,
        Category::Others,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::MatrixAssembly => "MatrixAssembly",
            Category::BoundaryAssembly => "BoundaryAssembly",
            Category::AlgebraicSolver => "AlgebraicSolver",
            Category::Others => "Others",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Equation {
    NavierStokes,
    Heat,
    Chemics,
}

impl Equation {
    pub const ALL: [Equation; 3] = [Equation::NavierStokes, Equation::Heat, Equation::Chemics];

    pub fn name(self) -> &'static str {
        match self {
            Equation::NavierStokes => "NavierStokes",
            Equation::Heat => "Heat",
            Equation::Chemics => "Chemics",
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accumulated time per `(category, equation)` cell.
#[derive(Debug, Clone, Default)]
pub struct Profiler {
    cells: [[Duration; 3]; 4],
    steps: Vec<Duration>,
}

impl Profiler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs `f`, charging its wall time to one cell.
    #[inline]
    pub fn time<T>(&mut self, cat: Category, eq: Equation, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.add(cat, eq, t0.elapsed());
        out
    }

    pub fn add(&mut self, cat: Category, eq: Equation, d: Duration) {
        self.cells[cat as usize][eq as usize] += d;
    }

    pub fn record_step(&mut self, d: Duration) {
        self.steps.push(d);
    }

    /// Wall time of each completed step.
    pub fn step_times(&self) -> &[Duration] {
        &self.steps
    }

    pub fn cell(&self, cat: Category, eq: Equation) -> Duration {
        self.cells[cat as usize][eq as usize]
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn table(&self) -> ProfileTable {
        let us = |d: Duration| d.as_secs_f64() * 1e6;
        let total: f64 = self.cells.iter().flatten().map(|&d| us(d)).sum();
        let pct = |x: f64| if total > 0.0 { 100.0 * x / total } else { 0.0 };
        let rows = Category::ALL
            .iter()
            .map(|&c| {
                let by_equation: [f64; 3] = std::array::from_fn(|e| us(self.cells[c as usize][e]));
                let time_us = by_equation.iter().sum();
                ProfileRow {
                    category: c,
                    time_us,
                    percent: pct(time_us),
                    by_equation_us: by_equation,
                    by_equation_percent: by_equation.map(pct),
                }
            })
            .collect::<Vec<_>>();
        let equation_percent =
            std::array::from_fn(|e| pct(Category::ALL.iter().map(|&c| us(self.cells[c as usize][e])).sum()));
        ProfileTable {
            rows,
            total_us: total,
            equation_percent,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub category: Category,
    pub time_us: f64,
    /// Share of the whole step.
    pub percent: f64,
    pub by_equation_us: [f64; 3],
    /// Share of the whole step, per equation.
    pub by_equation_percent: [f64; 3],
}

/// Category x equation breakdown with totals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub rows: Vec<ProfileRow>,
    pub total_us: f64,
    pub equation_percent: [f64; 3],
}

impl ProfileTable {
    pub fn percent_sum(&self) -> f64 {
        self.rows.iter().map(|r| r.percent).sum()
    }
}

impl fmt::Display for ProfileTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<18}", "")?;
        for e in Equation::ALL {
            write!(f, "{:>14}", e.name())?;
        }
        writeln!(f, "{:>10}", "Total")?;
        for r in &self.rows {
            write!(f, "{:<18}", r.category.name())?;
            for p in r.by_equation_percent {
                write!(f, "{:>13.2}%", p)?;
            }
            writeln!(f, "{:>9.2}%", r.percent)?;
        }
        write!(f, "{:<18}", "Total")?;
        for p in self.equation_percent {
            write!(f, "{:>13.2}%", p)?;
        }
        writeln!(f, "{:>9.2}%", self.percent_sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_profile_is_all_zero() {
        let t = Profiler::new().table();
        assert_eq!(t.rows.len(), 4);
        assert!(t.rows.iter().all(|r| r.percent == 0.0 && r.time_us == 0.0));
        assert_eq!(t.total_us, 0.0);
    }

    #[test]
    fn percentages_sum_to_hundred() {
        let mut p = Profiler::new();
        p.add(Category::MatrixAssembly, Equation::NavierStokes, Duration::from_micros(700));
        p.add(Category::AlgebraicSolver, Equation::NavierStokes, Duration::from_micros(200));
        p.add(Category::Others, Equation::Chemics, Duration::from_micros(100));
        let t = p.table();
        assert!((t.percent_sum() - 100.0).abs() < 1e-9);
        assert!((t.rows[0].percent - 70.0).abs() < 1e-9);
        assert!((t.equation_percent[0] - 90.0).abs() < 1e-9);
        assert!(t.to_string().contains("MatrixAssembly"));
    }
}

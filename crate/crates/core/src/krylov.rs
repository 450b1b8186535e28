//! Jacobi-preconditioned conjugate gradient.

use crate::error::{Error, Result};
use crate::sparse::{self, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-8,
            max_iterations: 5000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(Error::config(format!(
                "solver tolerance must lie in (0, 1), got {}",
                self.rel_tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub iterations: usize,
    /// `||r_k|| / ||b||` from the recurrence, starting with `k = 0`.
    pub residual_history: Vec<f64>,
    /// `||b - A x|| / ||b||` recomputed at exit.
    pub true_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` from `x0` with the diagonal preconditioner `diag`.
///
/// Stops when the recurrence residual drops to `rel_tolerance * ||b||` or
/// after `max_iterations`; in the latter case the iterate with the smallest
/// recurrence residual is returned with `converged = false`.
pub fn pcg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    diag: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolverStats)> {
    cfg.validate()?;
    let n = a.n();
    for len in [b.len(), x0.len(), diag.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(Error::SingularPreconditioner { row, value });
    }

    let bnorm = sparse::norm2(b);
    if bnorm == 0.0 {
        let stats = SolverStats {
            iterations: 0,
            residual_history: vec![0.0],
            true_residual: 0.0,
            converged: true,
        };
        return Ok((vec![0.0; n], stats));
    }

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    sparse::spmv(a, &x, &mut r)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = sparse::dot(&r, &z)?;

    let mut history = vec![sparse::norm2(&r) / bnorm];
    let mut best = (history[0], x.clone());
    let mut iterations = 0;
    let mut converged = history[0] <= cfg.rel_tolerance;

    while !converged && iterations < cfg.max_iterations {
        sparse::spmv(a, &p, &mut q)?;
        let curvature = sparse::dot(&p, &q)?;
        if !(curvature > 0.0) {
            return Err(Error::Breakdown {
                iteration: iterations,
                curvature,
            });
        }
        let alpha = rz / curvature;
        sparse::axpy(alpha, &p, &mut x)?;
        sparse::axpy(-alpha, &q, &mut r)?;
        iterations += 1;

        let rel = sparse::norm2(&r) / bnorm;
        history.push(rel);
        if rel <= cfg.rel_tolerance {
            converged = true;
            break;
        }
        if rel < best.0 {
            best.0 = rel;
            best.1.copy_from_slice(&x);
        }

        for ((zi, ri), d) in z.iter_mut().zip(&r).zip(diag) {
            *zi = ri / d;
        }
        let rz_new = sparse::dot(&r, &z)?;
        let beta = rz_new / rz;
        rz = rz_new;
        sparse::xpby(&z, beta, &mut p)?;
    }

    if !converged {
        x = best.1;
    }
    sparse::spmv(a, &x, &mut q)?;
    let true_res = q.iter().zip(b).map(|(ax, bi)| (bi - ax) * (bi - ax)).sum::<f64>().sqrt() / bnorm;
    let stats = SolverStats {
        iterations,
        residual_history: history,
        true_residual: true_res,
        converged,
    };
    Ok((x, stats))
}

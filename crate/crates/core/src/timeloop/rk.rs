//! Three-stage strong-stability-preserving Runge-Kutta scheme in Shu-Osher
//! form: `u_k = a_k u_n + b_k (u_{k-1} + dt L(u_{k-1}))`.

use crate::error::Result;

/// `(a_k, b_k)` per stage.
pub const SSP_RK3: [(f64, f64); 3] = [(0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0)];

/// Stage combination `out = a * un + b * (v + dt * l)`.
#[inline]
pub fn combine(stage: usize, un: f64, v: f64, dt: f64, l: f64) -> f64 {
    let (a, b) = SSP_RK3[stage];
    a * un + b * (v + dt * l)
}

/// Advances `u` by one step. `rhs(v, l)` writes `L(v)` into `l`.
pub fn ssp_rk3_step(
    u: &mut [f64],
    dt: f64,
    mut rhs: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
) -> Result<()> {
    let un = u.to_vec();
    let mut l = vec![0.0; u.len()];
    for stage in 0..3 {
        rhs(u, &mut l)?;
        for i in 0..u.len() {
            u[i] = combine(stage, un[i], u[i], dt, l[i]);
        }
    }
    Ok(())
}

/// Integrates the scalar ODE `du/dt = f(u)` for `nsteps` steps.
pub fn integrate_scalar(f: impl Fn(f64) -> f64, u0: f64, dt: f64, nsteps: usize) -> f64 {
    let mut u = [u0];
    for _ in 0..nsteps {
        ssp_rk3_step(&mut u, dt, |v, l| {
            l[0] = f(v[0]);
            Ok(())
        })
        .expect("scalar right-hand side cannot fail");
    }
    u[0]
}

/// Observed order from final-time errors on successively halved steps:
/// the mean of `log2(e_k / e_{k+1})`.
pub fn observed_order(
    f: impl Fn(f64) -> f64,
    exact: impl Fn(f64) -> f64,
    u0: f64,
    t_end: f64,
    dts: &[f64],
) -> f64 {
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let n = (t_end / dt).round() as usize;
            (integrate_scalar(&f, u0, dt, n) - exact(t_end)).abs()
        })
        .collect();
    let rates: Vec<f64> = errs
        .windows(2)
        .zip(dts.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    rates.iter().sum::<f64>() / rates.len() as f64
}

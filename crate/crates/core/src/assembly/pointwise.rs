//! Gauss-point physics shared by the scalar and packed kernels.

/// Convective term and viscous stress of the momentum equation at one
/// Gauss point. `g[c][d]` is `d u_c / d x_d`.
///
/// Returns `rho (2 u.S + (div u) u - 1/2 grad |u|^2)` and `2 mu S`.
#[inline(always)]
pub(crate) fn momentum_point<const D: usize>(
    u: &[f64; D],
    g: &[[f64; D]; D],
    rho: f64,
    mu: f64,
) -> ([f64; D], [[f64; D]; D]) {
    let mut div = 0.0;
    for c in 0..D {
        div += g[c][c];
    }
    let mut s = [[0.0; D]; D];
    for c in 0..D {
        for d in 0..D {
            s[c][d] = 0.5 * (g[c][d] + g[d][c]);
        }
    }
    let mut conv = [0.0; D];
    let mut stress = [[0.0; D]; D];
    for c in 0..D {
        let mut us = 0.0;
        let mut ug = 0.0;
        for d in 0..D {
            us += u[d] * s[d][c];
            ug += u[d] * g[d][c];
        }
        conv[c] = rho * (2.0 * us + div * u[c] - ug);
        for d in 0..D {
            stress[c][d] = 2.0 * mu * s[c][d];
        }
    }
    (conv, stress)
}

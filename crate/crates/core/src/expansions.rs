//! Time-ordered Dyson integrals `P_1..P_4` of an interaction-picture
//! perturbation, the matching Magnus terms, the fidelity expansion at
//! critical points, and numerical verification that the two expansions
//! agree with the directly propagated operator.
//!
//! The nested integrals are computed in the recursive cumulative form
//! `P_n(t) = int_0^t dH(s) P_{n-1}(s) ds` with the trapezoid rule on a
//! uniform grid, one `O(grid)` pass per order.

use num_complex::Complex64 as C64;

use crate::su2::{
    antihermitian_part, hermitian_part, log_unitary, propagate_piecewise, Complex2x2, Hermitian2,
    Unitary2, IDENTITY,
};
use crate::{Error, Result};

/// Smallest admissible quadrature grid.
pub const MIN_GRID: usize = 16;
/// Critical-point residual above which the fidelity expansion is refused.
pub const CRITICAL_POINT_TOL: f64 = 1e-8;

/// Time-ordered integrals `P_1..P_order` evaluated at the end of the interval.
#[derive(Debug, Clone)]
pub struct DysonStack {
    /// `p[n-1]` holds `P_n`.
    pub p: Vec<Complex2x2>,
    /// Number of uniform grid intervals used for the quadrature.
    pub grid: usize,
}

impl DysonStack {
    pub fn order(&self) -> usize {
        self.p.len()
    }
}

/// Magnus terms stored as the anti-Hermitian products `i Omega_k`,
/// the form entering `log V = sum_k i Omega_k`.
#[derive(Debug, Clone)]
pub struct MagnusStack {
    /// `i_omega[k-1]` holds `i Omega_k`.
    pub i_omega: Vec<Complex2x2>,
}

impl MagnusStack {
    pub fn order(&self) -> usize {
        self.i_omega.len()
    }

    pub fn sum(&self) -> Complex2x2 {
        self.i_omega
            .iter()
            .fold(crate::su2::ZERO, |acc, m| acc + *m)
    }
}

/// Conjugates a constant perturbation into the interaction picture:
/// `theta -> U^dag(theta) dH U(theta)`.
pub fn interaction_hamiltonian<U>(u: U, dh: Hermitian2) -> impl Fn(f64) -> Hermitian2
where
    U: Fn(f64) -> Unitary2,
{
    move |theta| dh.conjugated_by(&u(theta))
}

/// Computes `P_1..P_order` on `[0, theta_end]` by cumulative trapezoid
/// quadrature. Deterministic for a fixed grid; scaling the input by `eps`
/// scales `P_n` by `eps^n` exactly.
pub fn dyson_terms(
    dh: impl Fn(f64) -> Hermitian2,
    theta_end: f64,
    order: usize,
    grid: usize,
) -> Result<DysonStack> {
    if !(1..=4).contains(&order) {
        return Err(Error::BadOrder(order));
    }
    if grid < MIN_GRID {
        return Err(Error::GridTooSmall { got: grid, min: MIN_GRID });
    }
    if !theta_end.is_finite() {
        return Err(Error::NonFinite("integration interval"));
    }
    let dt = theta_end / grid as f64;
    let mut samples = Vec::with_capacity(grid + 1);
    for j in 0..=grid {
        let sample = dh(j as f64 * dt);
        if !sample.matrix().is_finite() {
            return Err(Error::NonFinite("interaction Hamiltonian sample"));
        }
        samples.push(*sample.matrix());
    }
    let mut stack = Vec::with_capacity(order);
    // prev[j] = P_{n-1}(t_j), starting from P_0 = 1
    let mut prev = vec![IDENTITY; grid + 1];
    for _ in 0..order {
        let mut cum = Vec::with_capacity(grid + 1);
        cum.push(crate::su2::ZERO);
        let mut acc = crate::su2::ZERO;
        for j in 1..=grid {
            let f_lo = samples[j - 1] * prev[j - 1];
            let f_hi = samples[j] * prev[j];
            acc = acc + (f_lo + f_hi).scale_re(dt * 0.5);
            cum.push(acc);
        }
        stack.push(acc);
        prev = cum;
    }
    Ok(DysonStack { p: stack, grid })
}

/// Closed-form Magnus terms from the Dyson stack.
///
/// `i O1 = -i P1`, `i O2 = -P2 + P1^2/2`,
/// `i O3 = i P3 + (i/3) P1^3 - (i/2)(P1 P2 + P2 P1)`,
/// `i O4 = P4 - (P1 P3 + P3 P1)/2 - P2^2/2
///        + (P1^2 P2 + P1 P2 P1 + P2 P1^2)/3 - P1^4/4`.
/// Stacks of lower order yield the available prefix.
pub fn magnus_terms(d: &DysonStack) -> MagnusStack {
    let i = C64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(d.order());
    let p1 = d.p[0];
    out.push(p1.scale(-i));
    if d.order() >= 2 {
        let p2 = d.p[1];
        out.push(-p2 + (p1 * p1).scale_re(0.5));
        if d.order() >= 3 {
            let p3 = d.p[2];
            let t = p3 + (p1 * p1 * p1).scale_re(1.0 / 3.0)
                - (p1 * p2 + p2 * p1).scale_re(0.5);
            out.push(t.scale(i));
            if d.order() >= 4 {
                let p4 = d.p[3];
                let t = p4 - (p1 * p3 + p3 * p1).scale_re(0.5)
                    - (p2 * p2).scale_re(0.5)
                    + (p1 * p1 * p2 + p1 * p2 * p1 + p2 * p1 * p1).scale_re(1.0 / 3.0)
                    - (p1 * p1 * p1 * p1).scale_re(0.25);
                out.push(t);
            }
        }
    }
    MagnusStack { i_omega: out }
}

/// Residuals from comparing the two series against direct propagation.
#[derive(Debug, Clone)]
pub struct MagnusDysonReport {
    /// `|log V - sum_k i Omega_k|` (Frobenius).
    pub residual_log_magnus: f64,
    /// `|1 + sum_n (-i)^n P_n - V|` (Frobenius).
    pub residual_dyson_sum: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Propagates `eps * dh` over `[0, theta_end]` and checks that
/// (a) the principal log matches the summed Magnus terms and
/// (b) the truncated Dyson sum matches the propagator, both to the
/// truncation order `O(eps^5)` plus quadrature error.
pub fn verify_magnus_dyson(
    dh: impl Fn(f64) -> Hermitian2,
    theta_end: f64,
    eps: f64,
    grid: usize,
    tol: f64,
) -> Result<MagnusDysonReport> {
    if grid < MIN_GRID {
        return Err(Error::GridTooSmall { got: grid, min: MIN_GRID });
    }
    let dt = theta_end / grid as f64;
    let mut sup = 0.0_f64;
    for j in 0..=grid {
        sup = sup.max(dh(j as f64 * dt).operator_norm());
    }
    let bound = eps.abs() * theta_end.abs() * sup;
    if bound >= 0.5 {
        return Err(Error::ScaleTooLarge(bound));
    }
    let scaled = |t: f64| dh(t).scale(eps);
    let stack = dyson_terms(scaled, theta_end, 4, grid)?;
    let magnus = magnus_terms(&stack);
    let v = propagate_piecewise(scaled, 0.0, theta_end, grid)?;
    let log_v = log_unitary(&v)?;
    let residual_log_magnus = (log_v - magnus.sum()).frobenius_norm();
    let minus_i = C64::new(0.0, -1.0);
    let mut dyson_sum = IDENTITY;
    let mut coeff = C64::new(1.0, 0.0);
    for p in &stack.p {
        coeff *= minus_i;
        dyson_sum = dyson_sum + p.scale(coeff);
    }
    let residual_dyson_sum = (dyson_sum - *v.matrix()).frobenius_norm();
    let pass = residual_log_magnus <= tol && residual_dyson_sum <= tol;
    Ok(MagnusDysonReport { residual_log_magnus, residual_dyson_sum, tol, pass })
}

/// Frobenius norms of the leading robustness functionals.
#[derive(Debug, Clone)]
pub struct RobustnessFunctionals {
    /// `|P_1|`.
    pub norm_p1: f64,
    /// `|<(-i)^2 P_2>_H|`.
    pub norm_herm_p2: f64,
    /// `|P_2|`.
    pub norm_p2: f64,
}

/// Evaluates `|P_1|`, `|<(-i)^2 P_2>_H|` and `|P_2|` for the perturbation
/// `dh` seen through the trajectory `u`.
pub fn robustness_functionals(
    u: impl Fn(f64) -> Unitary2,
    dh: &Hermitian2,
    theta_end: f64,
    grid: usize,
) -> Result<RobustnessFunctionals> {
    let dhhat = interaction_hamiltonian(u, *dh);
    let stack = dyson_terms(dhhat, theta_end, 2, grid)?;
    let p2_scaled = stack.p[1].scale_re(-1.0); // (-i)^2 P_2
    Ok(RobustnessFunctionals {
        norm_p1: stack.p[0].frobenius_norm(),
        norm_herm_p2: hermitian_part(&p2_scaled).frobenius_norm(),
        norm_p2: stack.p[1].frobenius_norm(),
    })
}

/// `|<W^dag U>_A|`: zero exactly when the first-order fidelity variation
/// vanishes for every perturbation.
pub fn critical_point_residual(w: &Unitary2, u_final: &Unitary2) -> f64 {
    let wu = w.matrix().dagger() * *u_final.matrix();
    antihermitian_part(&wu).frobenius_norm()
}

/// Terms `n = 2..=max_order` of the fidelity expansion at a critical point:
/// `Re Tr[<W^dag U>_H <(-i)^n P_n>_H] / 2`.
pub fn fidelity_expansion_terms(
    w: &Unitary2,
    u_final: &Unitary2,
    d: &DysonStack,
    max_order: usize,
) -> Result<Vec<f64>> {
    if !(2..=4).contains(&max_order) || max_order > d.order() {
        return Err(Error::BadOrder(max_order));
    }
    let residual = critical_point_residual(w, u_final);
    if residual > CRITICAL_POINT_TOL {
        return Err(Error::NotAtCriticalPoint(residual));
    }
    let wu = w.matrix().dagger() * *u_final.matrix();
    let wu_h = hermitian_part(&wu);
    let minus_i = C64::new(0.0, -1.0);
    let mut coeff = minus_i;
    let mut terms = Vec::new();
    for n in 2..=max_order {
        coeff *= minus_i;
        let pn_h = hermitian_part(&d.p[n - 1].scale(coeff));
        terms.push((wu_h * pn_h).re_trace() * 0.5);
    }
    Ok(terms)
}

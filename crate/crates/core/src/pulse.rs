//! The harmonic NOT-gate pulse family.
//!
//! The propagator factorizes as `U(theta) = exp(i theta sigma_1/2) V(theta)`
//! with `V = exp(i L sigma_1/2) exp(i R sigma_3/2)` and trigonometric
//! controls `L`, `R` that vanish at both ends of `[0, pi]`, so `U(pi)` equals
//! `i sigma_1` (a NOT up to global phase) for every admissible coefficient
//! set. Everything here is closed form; no ODE integration is involved.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::su2::{exp_su2, Hermitian2, Unitary2};
use crate::{Error, Result};

/// Shared uniform grid used for accumulated-phase quadrature and profile
/// export refinement.
pub const DEFAULT_GRID: usize = 4096;
/// Coefficient magnitude bound `|a_k|, |b_k| <= 2 pi`.
pub const COEFF_BOUND: f64 = 2.0 * std::f64::consts::PI;
/// Default threshold on `|cos(omega_0 theta)|` below which the lab-frame
/// Rabi frequency is flagged as unreliable.
pub const SINGULARITY_TOL: f64 = 1e-3;

const PI: f64 = std::f64::consts::PI;

/// Whether the last `a` coefficient is derived from the sum constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientMode {
    /// `a_n = 1 - sum(a_1..a_{n-1})`, so `sum a_k = 1` by construction.
    Constrained,
    /// All coefficients given explicitly; the sum constraint is only checked.
    #[default]
    Raw,
}

/// Harmonic amplitudes `{a_k}`, `{b_k}` defining the controls
/// `L(theta) = -sum a_k/(2k) sin(2k theta)` and
/// `R(theta) = sum b_k sin(2k theta)` (or `sin(k theta)` in asymmetric mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PulseFile", into = "PulseFile")]
pub struct PulseCoefficients {
    a: Vec<f64>,
    b: Vec<f64>,
    mode: CoefficientMode,
    symmetric: bool,
}

/// On-disk JSON form. In constrained mode `a` lists only the free
/// coefficients `a_1..a_{n-1}`; the last one is derived.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PulseFile {
    a: Vec<f64>,
    b: Vec<f64>,
    #[serde(default)]
    mode: CoefficientMode,
    #[serde(default = "default_true")]
    symmetric: bool,
}

fn default_true() -> bool {
    true
}

impl TryFrom<PulseFile> for PulseCoefficients {
    type Error = Error;
    fn try_from(f: PulseFile) -> Result<Self> {
        let c = match f.mode {
            CoefficientMode::Constrained => PulseCoefficients::constrained(&f.a, &f.b)?,
            CoefficientMode::Raw => PulseCoefficients::raw(&f.a, &f.b)?,
        };
        Ok(if f.symmetric { c } else { c.with_symmetry(false) })
    }
}

impl From<PulseCoefficients> for PulseFile {
    fn from(c: PulseCoefficients) -> Self {
        let a = match c.mode {
            CoefficientMode::Constrained => c.a[..c.a.len() - 1].to_vec(),
            CoefficientMode::Raw => c.a.clone(),
        };
        PulseFile { a, b: c.b, mode: c.mode, symmetric: c.symmetric }
    }
}

/// Control values at one angle.
#[derive(Debug, Clone, Copy)]
pub struct ControlValues {
    pub l: f64,
    pub lp: f64,
    pub r: f64,
    pub rp: f64,
}

/// Pulse profile at one angle: controls, Rabi modulation, chirp and
/// accumulated phase.
#[derive(Debug, Clone, Copy)]
pub struct PulseProfile {
    pub theta: f64,
    pub l: f64,
    pub lp: f64,
    pub r: f64,
    pub rp: f64,
    /// `Omega = sqrt((1+L')^2 + sin^2(theta+L) R'^2) >= 0`.
    pub omega: f64,
    /// `nu = -cos(theta+L) R'`.
    pub nu: f64,
    /// `Phi(theta) = int_0^theta nu`, cumulative trapezoid on the shared grid.
    pub phi: f64,
}

/// Lab-frame Rabi frequency with its singularity flag.
#[derive(Debug, Clone, Copy)]
pub struct LabFrameRabi {
    pub omega_lab: f64,
    /// Set when `|cos(omega_0 theta)|` falls below the tolerance; the value
    /// is reported but unreliable.
    pub singular: bool,
}

/// One bound violation found by [`PulseCoefficients::validate`].
#[derive(Debug, Clone)]
pub struct BoundViolation {
    /// Coefficient name, e.g. `a1` or `b3`.
    pub coefficient: String,
    pub value: f64,
}

/// Validation outcome; informational, never a hard failure.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub sum_a: f64,
    /// `|sum a_k - 1| <= 1e-9`.
    pub sum_constraint_ok: bool,
    pub bound_violations: Vec<BoundViolation>,
    /// `L'(0) = -sum a_k`; equals -1 exactly when the sum constraint holds.
    pub lprime_at_zero: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.sum_constraint_ok && self.bound_violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ControlDerivs {
    pub l: f64,
    pub lp: f64,
    pub lpp: f64,
    pub lppp: f64,
    pub r: f64,
    pub rp: f64,
    pub rpp: f64,
    pub rppp: f64,
}

impl PulseCoefficients {
    /// Constrained coefficients: `a_head` lists `a_1..a_{n-1}` and the last
    /// entry is derived as `1 - sum(a_head)`, so the sum constraint holds by
    /// construction. `b` must have length `n >= 1`.
    pub fn constrained(a_head: &[f64], b: &[f64]) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidCoefficients("need at least one harmonic".into()));
        }
        if a_head.len() + 1 != b.len() {
            return Err(Error::InvalidCoefficients(format!(
                "constrained mode expects {} free a-coefficients for {} harmonics, got {}",
                b.len() - 1,
                b.len(),
                a_head.len()
            )));
        }
        check_finite(a_head)?;
        check_finite(b)?;
        let mut a = a_head.to_vec();
        a.push(1.0 - a_head.iter().sum::<f64>());
        Ok(Self { a, b: b.to_vec(), mode: CoefficientMode::Constrained, symmetric: true })
    }

    /// Raw coefficients, used verbatim; `a` and `b` must have equal nonzero
    /// length. The sum constraint is reported by [`Self::validate`] rather
    /// than enforced.
    pub fn raw(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidCoefficients(format!(
                "raw mode expects equal nonzero coefficient counts, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        check_finite(a)?;
        check_finite(b)?;
        Ok(Self { a: a.to_vec(), b: b.to_vec(), mode: CoefficientMode::Raw, symmetric: true })
    }

    /// Decision-vector layout used by the optimizer:
    /// `(a_1..a_{n-1}, b_1..b_n)` with `a_n` derived.
    pub fn from_decision_vector(x: &[f64], n_harmonics: usize) -> Result<Self> {
        if n_harmonics == 0 || x.len() != 2 * n_harmonics - 1 {
            return Err(Error::InvalidCoefficients(format!(
                "decision vector of length {} does not match {} harmonics",
                x.len(),
                n_harmonics
            )));
        }
        Self::constrained(&x[..n_harmonics - 1], &x[n_harmonics - 1..])
    }

    /// Switches between the symmetric form `R = sum b_k sin(2k theta)` and
    /// the asymmetric form `R = sum b_k sin(k theta)`.
    pub fn with_symmetry(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn n_harmonics(&self) -> usize {
        self.a.len()
    }

    pub fn mode(&self) -> CoefficientMode {
        self.mode
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Checks the sum constraint, the coefficient bounds and reports the
    /// implied boundary slope `L'(0)`.
    pub fn validate(&self) -> ValidationReport {
        let sum_a: f64 = self.a.iter().sum();
        let mut bound_violations = Vec::new();
        for (name, list) in [("a", &self.a), ("b", &self.b)] {
            for (k, &v) in list.iter().enumerate() {
                if v.abs() > COEFF_BOUND {
                    bound_violations.push(BoundViolation {
                        coefficient: format!("{}{}", name, k + 1),
                        value: v,
                    });
                }
            }
        }
        ValidationReport {
            sum_a,
            sum_constraint_ok: (sum_a - 1.0).abs() <= 1e-9,
            bound_violations,
            lprime_at_zero: -sum_a,
        }
    }

    pub(crate) fn derivs(&self, theta: f64) -> ControlDerivs {
        let (mut l, mut lp, mut lpp, mut lppp) = (0.0, 0.0, 0.0, 0.0);
        for (i, &ak) in self.a.iter().enumerate() {
            let k = (i + 1) as f64;
            let (s, c) = (2.0 * k * theta).sin_cos();
            l -= ak / (2.0 * k) * s;
            lp -= ak * c;
            lpp += 2.0 * k * ak * s;
            lppp += 4.0 * k * k * ak * c;
        }
        let (mut r, mut rp, mut rpp, mut rppp) = (0.0, 0.0, 0.0, 0.0);
        for (i, &bk) in self.b.iter().enumerate() {
            let m = if self.symmetric { 2.0 * (i as f64 + 1.0) } else { i as f64 + 1.0 };
            let (s, c) = (m * theta).sin_cos();
            r += bk * s;
            rp += m * bk * c;
            rpp -= m * m * bk * s;
            rppp -= m * m * m * bk * c;
        }
        ControlDerivs { l, lp, lpp, lppp, r, rp, rpp, rppp }
    }

    /// `L`, `L'`, `R`, `R'` at `theta in [0, pi]`, all exact trigonometric
    /// evaluations.
    pub fn control_functions(&self, theta: f64) -> Result<ControlValues> {
        check_theta(theta)?;
        let d = self.derivs(theta);
        Ok(ControlValues { l: d.l, lp: d.lp, r: d.r, rp: d.rp })
    }

    /// Exact propagator `U(theta) = e^{i theta sigma_1/2} e^{i L sigma_1/2}
    /// e^{i R sigma_3/2}`.
    pub fn propagator(&self, theta: f64) -> Result<Unitary2> {
        check_theta(theta)?;
        Ok(self.propagator_unchecked(theta))
    }

    pub(crate) fn propagator_unchecked(&self, theta: f64) -> Unitary2 {
        let d = self.derivs(theta);
        let u = exp_su2([theta + d.l, 0.0, 0.0]) * exp_su2([0.0, 0.0, d.r]);
        Unitary2::new_unchecked(u)
    }

    /// Rotating-frame generator
    /// `H = -(1+L')/2 sigma_1 - sin(theta+L) R'/2 sigma_2
    ///      - cos(theta+L) R'/2 sigma_3`.
    pub fn hamiltonian(&self, theta: f64) -> Result<Hermitian2> {
        check_theta(theta)?;
        Ok(self.hamiltonian_unchecked(theta))
    }

    pub(crate) fn hamiltonian_unchecked(&self, theta: f64) -> Hermitian2 {
        let d = self.derivs(theta);
        let phi = theta + d.l;
        Hermitian2::from_bloch(
            0.0,
            [
                -0.5 * (1.0 + d.lp),
                -0.5 * phi.sin() * d.rp,
                -0.5 * phi.cos() * d.rp,
            ],
        )
    }

    /// Rabi modulation `Omega(theta)`.
    pub fn omega(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        let d = self.derivs(theta);
        Ok(omega_from(&d, theta))
    }

    /// `Omega`, `Omega'`, `Omega''` by analytic differentiation.
    pub(crate) fn omega_derivs(&self, theta: f64) -> (f64, f64, f64) {
        let d = self.derivs(theta);
        let phi = theta + d.l;
        let one_lp = 1.0 + d.lp;
        let (sin_phi, cos_phi) = phi.sin_cos();
        let sin2 = 2.0 * sin_phi * cos_phi;
        let cos2 = cos_phi * cos_phi - sin_phi * sin_phi;
        let g = one_lp * one_lp;
        let gp = 2.0 * one_lp * d.lpp;
        let gpp = 2.0 * d.lpp * d.lpp + 2.0 * one_lp * d.lppp;
        let h = sin_phi * sin_phi * d.rp * d.rp;
        let hp = sin2 * one_lp * d.rp * d.rp + 2.0 * sin_phi * sin_phi * d.rp * d.rpp;
        let hpp = 2.0 * cos2 * g * d.rp * d.rp
            + sin2 * d.lpp * d.rp * d.rp
            + 4.0 * sin2 * one_lp * d.rp * d.rpp
            + 2.0 * sin_phi * sin_phi * (d.rpp * d.rpp + d.rp * d.rppp);
        let om = (g + h).sqrt();
        let omp = (gp + hp) / (2.0 * om);
        let ompp = (gpp + hpp) / (2.0 * om) - (gp + hp) * (gp + hp) / (4.0 * om * om * om);
        (om, omp, ompp)
    }

    /// Chirp second derivative `nu''(theta)`, analytic.
    pub(crate) fn nu_second(&self, theta: f64) -> f64 {
        let d = self.derivs(theta);
        let phi = theta + d.l;
        let one_lp = 1.0 + d.lp;
        phi.cos() * (one_lp * one_lp * d.rp - d.rppp)
            + phi.sin() * (d.lpp * d.rp + 2.0 * one_lp * d.rpp)
    }

    /// Full profile at `theta`; the accumulated phase is integrated on the
    /// shared [`DEFAULT_GRID`] (it feeds plots and lab-frame reconstruction,
    /// not objectives).
    pub fn profile(&self, theta: f64) -> Result<PulseProfile> {
        check_theta(theta)?;
        let d = self.derivs(theta);
        let steps = ((DEFAULT_GRID as f64 * theta / PI).ceil() as usize).max(1);
        let dt = theta / steps as f64;
        let mut phi_acc = 0.0;
        let mut prev = self.nu_at(0.0);
        for j in 1..=steps {
            let cur = self.nu_at(j as f64 * dt);
            phi_acc += dt * 0.5 * (prev + cur);
            prev = cur;
        }
        let angle = theta + d.l;
        Ok(PulseProfile {
            theta,
            l: d.l,
            lp: d.lp,
            r: d.r,
            rp: d.rp,
            omega: omega_from(&d, theta),
            nu: -angle.cos() * d.rp,
            phi: phi_acc,
        })
    }

    fn nu_at(&self, theta: f64) -> f64 {
        let d = self.derivs(theta);
        -(theta + d.l).cos() * d.rp
    }

    /// Exact lab-frame Rabi frequency `Omega / |cos(omega_0 theta)|`.
    /// Near zeros of the cosine the division is singular; the value is
    /// still returned with `singular` set.
    pub fn lab_frame_rabi(&self, theta: f64, omega0: f64, tol: f64) -> Result<LabFrameRabi> {
        check_theta(theta)?;
        if !omega0.is_finite() || omega0 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "carrier frequency must be positive, got {omega0}"
            )));
        }
        let d = self.derivs(theta);
        let denom = (omega0 * theta).cos().abs();
        Ok(LabFrameRabi {
            omega_lab: omega_from(&d, theta) / denom,
            singular: denom < tol,
        })
    }
}

fn omega_from(d: &ControlDerivs, theta: f64) -> f64 {
    let one_lp = 1.0 + d.lp;
    let s = (theta + d.l).sin();
    (one_lp * one_lp + s * s * d.rp * d.rp).sqrt()
}

fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    Ok(())
}

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("pulse coefficients"))
    }
}

/// Writes the profile CSV (`theta,L,R,Omega,nu,Phi`) at `samples` rows
/// covering `[0, pi]` inclusive. The accumulated phase is integrated on a
/// refinement of the output grid.
pub fn write_profile_csv<W: Write>(
    c: &PulseCoefficients,
    samples: usize,
    w: &mut W,
) -> io::Result<()> {
    let samples = samples.max(2);
    writeln!(w, "# schema=1")?;
    writeln!(w, "theta,L,R,Omega,nu,Phi")?;
    let refine = DEFAULT_GRID.div_ceil(samples - 1).max(1);
    let fine = (samples - 1) * refine;
    let dt = PI / fine as f64;
    let mut phi_acc = 0.0;
    let mut prev = c.nu_at(0.0);
    for j in 0..=fine {
        let theta = j as f64 * dt;
        let nu = c.nu_at(theta);
        if j > 0 {
            phi_acc += dt * 0.5 * (prev + nu);
        }
        prev = nu;
        if j % refine == 0 {
            let d = c.derivs(theta);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                theta,
                d.l,
                d.r,
                omega_from(&d, theta),
                nu,
                phi_acc
            )?;
        }
    }
    Ok(())
}

/// Coefficient sets used as fixed references across the crate.
pub mod presets {
    use super::PulseCoefficients;

    /// Square pulse: `L = R = 0`, constant unit Rabi frequency.
    pub fn square() -> PulseCoefficients {
        PulseCoefficients::raw(&[0.0], &[0.0]).expect("static coefficients")
    }

    /// Robust knee-point pulse (three harmonics, strong chirp): the
    /// coherent-average functional drops by more than three orders of
    /// magnitude against the square pulse.
    pub fn robust_knee() -> PulseCoefficients {
        PulseCoefficients::raw(&[0.896833, 0.302287, -0.207685], &[3.0578, 0.429276, 0.0881475])
            .expect("static coefficients")
    }

    /// Robust pulse with negligible chirp (`b ~ 1e-7`), found when the
    /// chirp-linearity objective shows no conflict with robustness.
    pub fn robust_chirp_free() -> PulseCoefficients {
        PulseCoefficients::raw(&[2.35701, -1.56989, 0.21289], &[5e-7, 1e-7, 1e-8])
            .expect("static coefficients")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{fidelity, propagate_piecewise, su2_exp, IDENTITY, SIGMA_X};
    use num_complex::Complex64 as C64;

    fn single() -> PulseCoefficients {
        PulseCoefficients::raw(&[1.0], &[0.0]).unwrap()
    }

    #[test]
    fn control_values_single_harmonic() {
        // L = -sin(2 theta)/2, L' = -cos(2 theta)
        let c = single();
        let v = c.control_functions(PI / 2.0).unwrap();
        assert!(v.l.abs() < 1e-15);
        assert!((v.lp - 1.0).abs() < 1e-15);
        assert_eq!(v.r, 0.0);
        assert_eq!(v.rp, 0.0);
        let at_zero = c.control_functions(0.0).unwrap();
        assert!((at_zero.lp + 1.0).abs() < 1e-15);
    }

    #[test]
    fn controls_vanish_at_pi() {
        let c = PulseCoefficients::constrained(&[0.4, -0.3], &[1.0, 0.5, 0.2]).unwrap();
        let v = c.control_functions(PI).unwrap();
        assert!(v.l.abs() < 1e-12);
        assert!(v.r.abs() < 1e-12);
    }

    #[test]
    fn theta_out_of_range_is_rejected() {
        assert!(matches!(
            single().control_functions(3.5),
            Err(Error::ThetaOutOfRange(_))
        ));
    }

    #[test]
    fn propagator_boundary_values() {
        let c = PulseCoefficients::constrained(&[0.2, 0.3], &[0.5, -0.4, 0.1]).unwrap();
        let u0 = c.propagator(0.0).unwrap();
        assert!(u0.matrix().approx_eq(&IDENTITY, 1e-14));
        let u1 = c.propagator(PI).unwrap();
        let target = su2_exp([PI, 0.0, 0.0]).unwrap();
        assert!(u1.matrix().approx_eq(target.matrix(), 1e-12));
    }

    #[test]
    fn propagator_of_single_harmonic_at_half_pi() {
        // L(pi/2) = 0, R = 0: U = exp(i pi sigma_1/4)
        let u = single().propagator(PI / 2.0).unwrap();
        let expected = su2_exp([PI / 2.0, 0.0, 0.0]).unwrap();
        assert!(u.matrix().approx_eq(expected.matrix(), 1e-14));
    }

    #[test]
    fn hamiltonian_values_single_harmonic() {
        let c = single();
        let h0 = c.hamiltonian(0.0).unwrap();
        assert!(h0.matrix().frobenius_norm() < 1e-15);
        let h = c.hamiltonian(PI / 2.0).unwrap();
        assert!(h.matrix().approx_eq(&SIGMA_X.scale_re(-1.0), 1e-14));
    }

    #[test]
    fn hamiltonian_has_no_sigma23_parts_without_chirp() {
        let c = PulseCoefficients::raw(&[0.7, 0.2], &[0.0, 0.0]).unwrap();
        for theta in [0.3, 1.1, 2.9] {
            let (_, v) = c.hamiltonian(theta).unwrap().bloch();
            assert_eq!(v[1], 0.0);
            assert_eq!(v[2], 0.0);
        }
    }

    #[test]
    fn hamiltonian_is_consistent_with_propagator_derivative() {
        // i (dU/dtheta) U^dag compared against the closed form by central
        // differences.
        let c = PulseCoefficients::constrained(&[0.5], &[0.8, -0.3]).unwrap();
        let eps = 1e-5;
        for theta in [0.4, 1.3, 2.2] {
            let up = c.propagator(theta + eps).unwrap();
            let um = c.propagator(theta - eps).unwrap();
            let du = (*up.matrix() - *um.matrix()).scale_re(1.0 / (2.0 * eps));
            let h_fd = (du * c.propagator(theta).unwrap().matrix().dagger())
                .scale(C64::new(0.0, 1.0));
            let h = c.hamiltonian(theta).unwrap();
            assert!(
                h_fd.approx_eq(h.matrix(), 1e-8),
                "finite-difference mismatch {:.2e}",
                h_fd.dist(h.matrix())
            );
        }
    }

    #[test]
    fn propagated_hamiltonian_matches_exact_propagator() {
        let c = PulseCoefficients::constrained(&[0.4, -0.2], &[1.2, 0.3, -0.5]).unwrap();
        let u_exact = c.propagator(PI).unwrap();
        let u_num =
            propagate_piecewise(|t| c.hamiltonian_unchecked(t), 0.0, PI, 8192).unwrap();
        assert!(
            u_exact.matrix().approx_eq(u_num.matrix(), 1e-6),
            "distance {:.2e}",
            u_exact.matrix().dist(u_num.matrix())
        );
    }

    #[test]
    fn profile_single_harmonic() {
        let c = single();
        let p = c.profile(PI / 2.0).unwrap();
        assert!((p.omega - 2.0).abs() < 1e-14);
        assert_eq!(p.nu, 0.0);
        assert_eq!(p.phi, 0.0);
        let p0 = c.profile(0.0).unwrap();
        assert!(p0.omega.abs() < 1e-15);
    }

    #[test]
    fn omega_symmetry_about_half_pi() {
        let c = PulseCoefficients::constrained(&[0.7, -0.1], &[2.0, 0.4, 0.05]).unwrap();
        for frac in [0.1, 0.25, 0.4] {
            let theta = frac * PI;
            let a = c.omega(theta).unwrap();
            let b = c.omega(PI - theta).unwrap();
            assert!((a - b).abs() < 1e-10, "asymmetry {:.2e}", (a - b).abs());
        }
    }

    #[test]
    fn boundary_fidelity_is_exact_for_constrained_coefficients() {
        let c = PulseCoefficients::constrained(&[0.9, 0.3], &[3.0, 0.4, 0.09]).unwrap();
        let target = su2_exp([PI, 0.0, 0.0]).unwrap();
        let f = fidelity(&target, &c.propagator(PI).unwrap());
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lab_frame_rabi_behaviour() {
        let c = single();
        // theta = 0: cos(0) = 1, lab frame equals rotating frame
        let l0 = c.lab_frame_rabi(0.0, 100.0, SINGULARITY_TOL).unwrap();
        assert!(!l0.singular);
        assert!((l0.omega_lab - c.omega(0.0).unwrap()).abs() < 1e-15);
        // omega_0 theta = pi/2: singular
        let ls = c
            .lab_frame_rabi(PI / 2.0, 1.0, SINGULARITY_TOL)
            .unwrap();
        assert!(ls.singular);
        // generic point: |cos| <= 1 so the lab value dominates
        let lg = c.lab_frame_rabi(1.0, 100.0, SINGULARITY_TOL).unwrap();
        assert!(lg.omega_lab >= c.omega(1.0).unwrap() - 1e-12);
        assert!(c.lab_frame_rabi(0.5, 0.0, SINGULARITY_TOL).is_err());
    }

    #[test]
    fn validate_reports() {
        assert!(single().validate().is_valid());
        let half = PulseCoefficients::raw(&[0.5, 0.5], &[0.0, 0.0]).unwrap();
        assert!(half.validate().is_valid());
        let over = PulseCoefficients::raw(&[7.0], &[0.0]).unwrap();
        let report = over.validate();
        assert!(!report.is_valid());
        assert_eq!(report.bound_violations.len(), 1);
        assert_eq!(report.bound_violations[0].coefficient, "a1");
        let knee = presets::robust_knee().validate();
        assert!(!knee.sum_constraint_ok); // printed values sum to 0.991435
        assert!(knee.bound_violations.is_empty());
    }

    #[test]
    fn constrained_sum_is_exactly_one() {
        let c = PulseCoefficients::constrained(&[0.3, -1.2], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(c.a().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn asymmetric_mode_uses_single_frequency_harmonics() {
        let b = [0.8, -0.3];
        let sym = PulseCoefficients::raw(&[0.5, 0.5], &b).unwrap();
        let asym = sym.clone().with_symmetry(false);
        // R = sum b_k sin(k theta): still zero at both ends
        let v = asym.control_functions(PI).unwrap();
        assert!(v.r.abs() < 1e-12);
        // at pi/2 the symmetric form gives R = 0 (sin(k pi) = 0) while the
        // asymmetric one keeps the odd harmonics
        let sym_mid = sym.control_functions(PI / 2.0).unwrap();
        let asym_mid = asym.control_functions(PI / 2.0).unwrap();
        assert!(sym_mid.r.abs() < 1e-12);
        assert!((asym_mid.r - 0.8).abs() < 1e-12);
        // the target is still reached exactly
        let target = su2_exp([PI, 0.0, 0.0]).unwrap();
        let f = fidelity(&target, &asym.propagator(PI).unwrap());
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        let c = PulseCoefficients::constrained(&[0.25, 0.5], &[1.0, 2.0, 3.0]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: PulseCoefficients = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
        let raw: PulseCoefficients =
            serde_json::from_str(r#"{"a":[0.1],"b":[0.2]}"#).unwrap();
        assert_eq!(raw.mode(), CoefficientMode::Raw);
        assert!(raw.is_symmetric());
    }

    #[test]
    fn profile_csv_has_schema_and_columns() {
        let mut buf = Vec::new();
        write_profile_csv(&presets::robust_knee(), 8, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# schema=1"));
        assert_eq!(lines.next(), Some("theta,L,R,Omega,nu,Phi"));
        assert_eq!(lines.count(), 8);
    }
}

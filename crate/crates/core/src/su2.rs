//! Exact 2x2 complex matrix algebra: Pauli basis, closed-form SU(2)
//! exponentials and logarithms, the Hermitian/anti-Hermitian/real-trace
//! brackets, gate fidelity, and piecewise-constant propagation.
//!
//! Propagation multiplies closed-form matrix exponentials of midpoint samples,
//! so every intermediate operator is exactly unitary and the global error is
//! `O(dtheta^2)`.

use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Default absolute tolerance for matrix equality checks.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Frobenius tolerance for the unitarity invariant `U^dag U = 1`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Frobenius tolerance for the Hermiticity invariant `X = X^dag`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues closer than this to -1 make the principal log ambiguous.
pub const LOG_BRANCH_TOL: f64 = 1e-8;

const ZERO_C: C64 = C64::new(0.0, 0.0);
const ONE_C: C64 = C64::new(1.0, 0.0);
const I_C: C64 = C64::new(0.0, 1.0);

/// Dense 2x2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex2x2 {
    pub m: [[C64; 2]; 2],
}

/// Zero matrix.
pub const ZERO: Complex2x2 = Complex2x2 { m: [[ZERO_C, ZERO_C], [ZERO_C, ZERO_C]] };
/// Identity matrix.
pub const IDENTITY: Complex2x2 = Complex2x2 { m: [[ONE_C, ZERO_C], [ZERO_C, ONE_C]] };
/// Pauli sigma_1.
pub const SIGMA_X: Complex2x2 = Complex2x2 { m: [[ZERO_C, ONE_C], [ONE_C, ZERO_C]] };
/// Pauli sigma_2.
pub const SIGMA_Y: Complex2x2 = Complex2x2 {
    m: [[ZERO_C, C64::new(0.0, -1.0)], [I_C, ZERO_C]],
};
/// Pauli sigma_3.
pub const SIGMA_Z: Complex2x2 = Complex2x2 {
    m: [[ONE_C, ZERO_C], [ZERO_C, C64::new(-1.0, 0.0)]],
};

impl Complex2x2 {
    pub fn new(m: [[C64; 2]; 2]) -> Self {
        Self { m }
    }

    /// Hermitian conjugate.
    pub fn dagger(&self) -> Self {
        Self::new([
            [self.m[0][0].conj(), self.m[1][0].conj()],
            [self.m[0][1].conj(), self.m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Re(Tr X).
    pub fn re_trace(&self) -> f64 {
        self.m[0][0].re + self.m[1][1].re
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|x| x * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|x| x * s)
    }

    fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::new([
            [f(self.m[0][0]), f(self.m[0][1])],
            [f(self.m[1][0]), f(self.m[1][1])],
        ])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// Frobenius distance `|self - other|`.
    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).frobenius_norm()
    }

    /// Tolerance-based equality (Frobenius distance, absolute).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dist(other) <= tol
    }

    /// Decomposition `X = c0*1 + c1*sigma_1 + c2*sigma_2 + c3*sigma_3`.
    pub fn pauli_components(&self) -> (C64, [C64; 3]) {
        let c0 = (self.m[0][0] + self.m[1][1]) * 0.5;
        let c1 = (self.m[0][1] + self.m[1][0]) * 0.5;
        let c2 = (self.m[0][1] - self.m[1][0]) * 0.5 * I_C;
        let c3 = (self.m[0][0] - self.m[1][1]) * 0.5;
        (c0, [c1, c2, c3])
    }

    /// Inverse of [`Complex2x2::pauli_components`].
    pub fn from_pauli(c0: C64, c: [C64; 3]) -> Self {
        Self::new([
            [c0 + c[2], c[0] - I_C * c[1]],
            [c[0] + I_C * c[1], c0 - c[2]],
        ])
    }
}

impl std::ops::Add for Complex2x2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new([
            [self.m[0][0] + rhs.m[0][0], self.m[0][1] + rhs.m[0][1]],
            [self.m[1][0] + rhs.m[1][0], self.m[1][1] + rhs.m[1][1]],
        ])
    }
}

impl std::ops::Sub for Complex2x2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new([
            [self.m[0][0] - rhs.m[0][0], self.m[0][1] - rhs.m[0][1]],
            [self.m[1][0] - rhs.m[1][0], self.m[1][1] - rhs.m[1][1]],
        ])
    }
}

impl std::ops::Neg for Complex2x2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl std::ops::Mul for Complex2x2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        Self::new([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Unitary 2x2 matrix: `U^dag U = 1` within [`UNITARY_TOL`], `|det U| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(Complex2x2);

impl Unitary2 {
    /// Validates the unitarity invariant.
    pub fn new(m: Complex2x2) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("unitary matrix entries"));
        }
        let dev = (m.dagger() * m - IDENTITY).frobenius_norm();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        let det_dev = (m.det().norm() - 1.0).abs();
        if det_dev > UNITARY_TOL {
            return Err(Error::NotUnitary(det_dev));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is unitary by construction.
    pub(crate) fn new_unchecked(m: Complex2x2) -> Self {
        debug_assert!((m.dagger() * m - IDENTITY).frobenius_norm() <= 1e-8);
        Self(m)
    }

    pub fn identity() -> Self {
        Self(IDENTITY)
    }

    pub fn matrix(&self) -> &Complex2x2 {
        &self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.dagger())
    }
}

impl std::ops::Mul for Unitary2 {
    type Output = Unitary2;
    fn mul(self, rhs: Unitary2) -> Unitary2 {
        Unitary2(self.0 * rhs.0)
    }
}

/// Hermitian 2x2 matrix: `X = X^dag` within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hermitian2(Complex2x2);

impl Hermitian2 {
    /// Validates the Hermiticity invariant.
    pub fn new(m: Complex2x2) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("Hermitian matrix entries"));
        }
        let dev = (m - m.dagger()).frobenius_norm();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    pub fn zero() -> Self {
        Self(ZERO)
    }

    /// `alpha*1 + v.sigma`, Hermitian by construction.
    pub fn from_bloch(alpha: f64, v: [f64; 3]) -> Self {
        Self(Complex2x2::new([
            [C64::new(alpha + v[2], 0.0), C64::new(v[0], -v[1])],
            [C64::new(v[0], v[1]), C64::new(alpha - v[2], 0.0)],
        ]))
    }

    /// Inverse of [`Hermitian2::from_bloch`].
    pub fn bloch(&self) -> (f64, [f64; 3]) {
        let m = &self.0.m;
        let alpha = (m[0][0].re + m[1][1].re) * 0.5;
        let v = [
            m[0][1].re,
            -m[0][1].im,
            (m[0][0].re - m[1][1].re) * 0.5,
        ];
        (alpha, v)
    }

    pub fn matrix(&self) -> &Complex2x2 {
        &self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale_re(s))
    }

    /// Spectral norm `max |eigenvalue| = |alpha| + |v|`.
    pub fn operator_norm(&self) -> f64 {
        let (alpha, v) = self.bloch();
        alpha.abs() + (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    /// `U^dag X U`, symmetrized so the result is Hermitian to the last bit.
    pub fn conjugated_by(&self, u: &Unitary2) -> Self {
        let m = u.matrix().dagger() * self.0 * *u.matrix();
        Self((m + m.dagger()).scale_re(0.5))
    }
}

/// Hermitian/anti-Hermitian/real-trace decomposition of a matrix.
#[derive(Debug, Clone, Copy)]
pub struct Brackets {
    /// `<X>_H = (X + X^dag)/2`.
    pub herm: Hermitian2,
    /// `<X>_A = (X - X^dag)/2`.
    pub antiherm: Complex2x2,
    /// `<X>_0 = Re(Tr X)/2`.
    pub real_trace: f64,
}

/// Splits `X` into its Hermitian and anti-Hermitian parts plus the real trace.
/// The parts sum back to `X` exactly.
pub fn brackets(x: &Complex2x2) -> Result<Brackets> {
    if !x.is_finite() {
        return Err(Error::NonFinite("brackets input"));
    }
    let d = x.dagger();
    let herm = (*x + d).scale_re(0.5);
    let antiherm = (*x - d).scale_re(0.5);
    Ok(Brackets {
        herm: Hermitian2(herm),
        antiherm,
        real_trace: x.re_trace() * 0.5,
    })
}

/// Hermitian part `(X + X^dag)/2` without the full decomposition.
pub fn hermitian_part(x: &Complex2x2) -> Complex2x2 {
    (*x + x.dagger()).scale_re(0.5)
}

/// Anti-Hermitian part `(X - X^dag)/2`.
pub fn antihermitian_part(x: &Complex2x2) -> Complex2x2 {
    (*x - x.dagger()).scale_re(0.5)
}

/// Closed-form `exp(i (c.sigma)/2)`; the zero vector maps to the identity.
pub fn su2_exp(c: [f64; 3]) -> Result<Unitary2> {
    if !c.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("su2_exp axis-angle vector"));
    }
    Ok(Unitary2(exp_su2(c)))
}

/// `exp(i (c.sigma)/2) = cos(|c|/2) 1 + i sin(|c|/2) (c_hat.sigma)`.
pub(crate) fn exp_su2(c: [f64; 3]) -> Complex2x2 {
    let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    if n == 0.0 {
        return IDENTITY;
    }
    let (s, co) = (n / 2.0).sin_cos();
    let k = s / n;
    // cos(n/2) 1 + i (k c).sigma
    Complex2x2::new([
        [
            C64::new(co, k * c[2]),
            C64::new(k * c[1], k * c[0]),
        ],
        [
            C64::new(-k * c[1], k * c[0]),
            C64::new(co, -k * c[2]),
        ],
    ])
}

/// Gate fidelity `Re(Tr[W^dag U])/2`, in `[-1, 1]`.
pub fn fidelity(w: &Unitary2, u: &Unitary2) -> f64 {
    (w.matrix().dagger() * *u.matrix()).re_trace() * 0.5
}

/// Time-ordered product of midpoint piecewise-constant exponentials:
/// each step contributes `exp(-i h(mid) dt)`, so the result is exactly
/// unitary and converges at second order in the step width.
pub fn propagate_piecewise(
    h: impl Fn(f64) -> Hermitian2,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Unitary2> {
    if steps == 0 {
        return Err(Error::ZeroSteps);
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::NonFinite("propagation interval"));
    }
    let dt = (t1 - t0) / steps as f64;
    let mut u = IDENTITY;
    for k in 0..steps {
        let mid = t0 + (k as f64 + 0.5) * dt;
        let sample = h(mid);
        if !sample.matrix().is_finite() {
            return Err(Error::NonFinite("Hamiltonian sample"));
        }
        let (alpha, v) = sample.bloch();
        // exp(-i (alpha + v.sigma) dt) = e^{-i alpha dt} exp(i (-2 dt v).sigma / 2)
        let rot = exp_su2([-2.0 * dt * v[0], -2.0 * dt * v[1], -2.0 * dt * v[2]]);
        let phase = C64::from_polar(1.0, -alpha * dt);
        u = rot.scale(phase) * u;
    }
    Ok(Unitary2::new_unchecked(u))
}

/// Principal anti-Hermitian logarithm of a unitary.
///
/// The result `A` satisfies `exp(A) = U` (see [`exp_antihermitian`]) with the
/// SU(2) rotation angle in `[0, pi)` and the determinant phase in
/// `(-pi/2, pi/2]`. Eigenvalues within [`LOG_BRANCH_TOL`] of -1 make the
/// principal branch ambiguous and are rejected.
pub fn log_unitary(u: &Unitary2) -> Result<Complex2x2> {
    let m = u.matrix();
    let phi = m.det().arg() / 2.0;
    // Eigenvalues are e^{i(phi +- t)}; reject the branch cut at -1.
    let v = m.scale(C64::from_polar(1.0, -phi));
    let (c0, c) = v.pauli_components();
    let w = [c[0].im, c[1].im, c[2].im];
    let s = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let t = s.atan2(c0.re);
    for lambda in [
        C64::from_polar(1.0, phi + t),
        C64::from_polar(1.0, phi - t),
    ] {
        if (lambda + ONE_C).norm() < LOG_BRANCH_TOL {
            return Err(Error::LogBranchAmbiguous);
        }
    }
    let axis = if s < 1e-15 {
        // Near the identity, sin t ~ t and the components are already t*n.
        Complex2x2::from_pauli(ZERO_C, [w[0] * I_C, w[1] * I_C, w[2] * I_C])
    } else {
        let k = t / s;
        Complex2x2::from_pauli(
            ZERO_C,
            [w[0] * k * I_C, w[1] * k * I_C, w[2] * k * I_C],
        )
    };
    Ok(Complex2x2::from_pauli(C64::new(0.0, phi), [ZERO_C, ZERO_C, ZERO_C]) + axis)
}

/// Exponential of an anti-Hermitian matrix, the inverse of [`log_unitary`].
pub fn exp_antihermitian(a: &Complex2x2) -> Result<Unitary2> {
    if !a.is_finite() {
        return Err(Error::NonFinite("exp_antihermitian input"));
    }
    let dev = (*a + a.dagger()).frobenius_norm();
    if dev > 1e-9 {
        return Err(Error::NotHermitian(dev));
    }
    let (c0, c) = a.pauli_components();
    // a = i beta 1 + i (v.sigma) with beta, v real
    let beta = c0.im;
    let v = [c[0].im, c[1].im, c[2].im];
    let rot = exp_su2([2.0 * v[0], 2.0 * v[1], 2.0 * v[2]]);
    Ok(Unitary2::new_unchecked(rot.scale(C64::from_polar(1.0, beta))))
}

//! The four-cavity Hamiltonian, its basis changes and derived quantities.
//!
//! Amplitudes live in three bases:
//!
//! * `A`: the cavity amplitudes `a_1..a_4` evolved by [`hamiltonian`];
//! * `B`: `b_i = exp(∫_0^t (Γ̄ + iω̄) ds) a_i`, which strips the mean
//!   frequency and mean loss (the integral starts at `t = 0`);
//! * `C`: `c_1 = b_1 + i b_2`, `c_2 = b_1 - i b_2`, `c_3 = b_3 + i b_4`,
//!   `c_4 = b_3 - i b_4`, the diabatic basis.
//!
//! In the `C` basis the diagonal carries `∓Re Ω` with
//! `Ω = (Δω + iΔΓ)/2`, `Δω = ω_1 - ω_2`, `ΔΓ = Γ - Γ_0`. A parabolic sweep
//! drives that half-splitting directly, `Re Ω(t) = α + βt²`, which is
//! realised by cavity frequencies `ω̄ ∓ (α + βt²)`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);
const PT_TOL: f64 = 1e-12;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{0} must be non-negative, got {1}")]
    Negative(&'static str, f64),
    #[error("{0} must be finite")]
    NotFinite(&'static str),
    #[error("sweep rate beta must be non-zero")]
    ZeroBeta,
    #[error("expected a state in basis {expected:?}, got {got:?}")]
    WrongBasis { expected: Basis, got: Basis },
    #[error("the quartic reduction needs Γ0 == Γ (ΔΓ = {0})")]
    NotPtSymmetric(f64),
}

/// Physical inputs of the two coupled cavity pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega1: f64,
    pub omega2: f64,
    pub kappa: f64,
    pub eta: f64,
    pub gamma0: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(
        omega1: f64,
        omega2: f64,
        kappa: f64,
        eta: f64,
        gamma0: f64,
        gamma: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            omega1,
            omega2,
            kappa,
            eta,
            gamma0,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("kappa", self.kappa),
            ("eta", self.eta),
            ("gamma0", self.gamma0),
            ("gamma", self.gamma),
        ] {
            if !v.is_finite() {
                return Err(ModelError::NotFinite(name));
            }
        }
        if self.kappa < 0.0 {
            return Err(ModelError::Negative("kappa", self.kappa));
        }
        if self.eta < 0.0 {
            return Err(ModelError::Negative("eta", self.eta));
        }
        Ok(())
    }

    pub fn delta_gamma(&self) -> f64 {
        self.gamma - self.gamma0
    }

    pub fn is_pt_symmetric(&self) -> bool {
        self.delta_gamma().abs() <= PT_TOL
    }

    pub fn omega_bar(&self) -> f64 {
        0.5 * (self.omega1 + self.omega2)
    }

    pub fn gamma_bar(&self) -> f64 {
        0.5 * (self.gamma0 + self.gamma)
    }
}

/// Parabolic sweep `α + βt²` of the diabatic half-splitting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub alpha: f64,
    pub beta: f64,
}

impl SweepParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        if !alpha.is_finite() {
            return Err(ModelError::NotFinite("alpha"));
        }
        if !beta.is_finite() {
            return Err(ModelError::NotFinite("beta"));
        }
        if beta == 0.0 {
            return Err(ModelError::ZeroBeta);
        }
        Ok(Self { alpha, beta })
    }

    pub fn detuning(&self, t: f64) -> f64 {
        self.alpha + self.beta * t * t
    }

    pub fn detuning_rate(&self, t: f64) -> f64 {
        2.0 * self.beta * t
    }
}

/// How the cavity frequencies depend on time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Drive {
    /// `ω_1`, `ω_2` fixed at the values in [`ModelParams`].
    Static,
    /// `ω_{1,2}(t) = ω̄ ± (α + βt²)`.
    Parabolic(SweepParams),
}

impl Drive {
    pub fn frequencies(&self, p: &ModelParams, t: f64) -> (f64, f64) {
        match self {
            Drive::Static => (p.omega1, p.omega2),
            Drive::Parabolic(s) => {
                let d = s.detuning(t);
                (p.omega_bar() + d, p.omega_bar() - d)
            }
        }
    }

    /// `Re Ω(t) = (ω_1 - ω_2)/2` and its time derivative.
    pub fn half_splitting(&self, p: &ModelParams, t: f64) -> (f64, f64) {
        match self {
            Drive::Static => (0.5 * (p.omega1 - p.omega2), 0.0),
            Drive::Parabolic(s) => (s.detuning(t), s.detuning_rate(t)),
        }
    }
}

/// Couplings entering the b- and c-basis equations at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedCouplings {
    pub delta_omega: f64,
    pub delta_gamma: f64,
    pub omega_bar: f64,
    pub gamma_bar: f64,
    /// `Ω = (Δω + iΔΓ)/2`.
    pub omega: Complex64,
    /// `γ = Im Ω + κ`.
    pub gamma_plus: f64,
    /// `γ' = Im Ω - κ`.
    pub gamma_minus: f64,
}

impl DerivedCouplings {
    pub fn at(p: &ModelParams, drive: &Drive, t: f64) -> Self {
        let (w1, w2) = drive.frequencies(p, t);
        let delta_omega = w1 - w2;
        let delta_gamma = p.delta_gamma();
        let omega = Complex64::new(delta_omega, delta_gamma) * 0.5;
        Self {
            delta_omega,
            delta_gamma,
            omega_bar: p.omega_bar(),
            gamma_bar: p.gamma_bar(),
            omega,
            gamma_plus: omega.im + p.kappa,
            gamma_minus: omega.im - p.kappa,
        }
    }
}

/// Coefficients of `Q(t) = Σ_k A_k t^k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub a: [Complex64; 5],
}

impl QuarticCoeffs {
    pub fn new(a: [Complex64; 5]) -> Self {
        Self { a }
    }

    pub fn from_re(a: [f64; 5]) -> Self {
        Self::new(a.map(re))
    }

    /// `Q = β² t⁴`.
    pub fn pure_quartic(beta: f64) -> Self {
        Self::from_re([0.0, 0.0, 0.0, 0.0, beta * beta])
    }

    /// `Q = A_1 t + A_0`.
    pub fn linear(a0: Complex64, a1: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new([a0, a1, z, z, z])
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.a.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    pub fn eval_re(&self, t: f64) -> Complex64 {
        self.eval(re(t))
    }

    pub fn derivative(&self, t: Complex64) -> Complex64 {
        (1..5)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, k| acc * t + self.a[k] * k as f64)
    }

    /// Highest power with a non-zero coefficient.
    pub fn degree(&self) -> usize {
        (0..5).rev().find(|&k| self.a[k] != re(0.0)).unwrap_or(0)
    }
}

/// `Q(t)` for the parabolic PT-symmetric model:
/// `(β², 0, 2αβ, -2iβ, α² + η² - κ²)` from the top power down.
pub fn quartic_coeffs(sweep: &SweepParams, p: &ModelParams) -> Result<QuarticCoeffs, ModelError> {
    if !p.is_pt_symmetric() {
        return Err(ModelError::NotPtSymmetric(p.delta_gamma()));
    }
    let (al, be) = (sweep.alpha, sweep.beta);
    Ok(QuarticCoeffs::new([
        re(al * al + p.eta * p.eta - p.kappa * p.kappa),
        Complex64::new(0.0, -2.0 * be),
        re(2.0 * al * be),
        re(0.0),
        re(be * be),
    ]))
}

/// `Q(t) = η² - κ² + (Re Ω)² - i d(Re Ω)/dt` for any drive (PT case).
pub fn potential(p: &ModelParams, drive: &Drive, t: f64) -> Complex64 {
    let (d, dd) = drive.half_splitting(p, t);
    Complex64::new(p.eta * p.eta - p.kappa * p.kappa + d * d, -dd)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    A,
    B,
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub basis: Basis,
    pub amps: [Complex64; 4],
}

impl StateVector {
    pub fn new(basis: Basis, amps: [Complex64; 4]) -> Self {
        Self { basis, amps }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Errors unless the state is expressed in `basis`.
    pub fn require_basis(&self, basis: Basis) -> Result<(), ModelError> {
        if self.basis == basis {
            Ok(())
        } else {
            Err(ModelError::WrongBasis {
                expected: basis,
                got: self.basis,
            })
        }
    }
}

/// `exp(∫_0^t (Γ̄ + iω̄) ds)`; both averages are time independent.
pub fn b_factor(p: &ModelParams, t: f64) -> Complex64 {
    (Complex64::new(p.gamma_bar(), p.omega_bar()) * t).exp()
}

pub fn to_b_basis(a: &StateVector, t: f64, p: &ModelParams) -> Result<StateVector, ModelError> {
    a.require_basis(Basis::A)?;
    let f = b_factor(p, t);
    Ok(StateVector::new(Basis::B, a.amps.map(|x| f * x)))
}

pub fn from_b_basis(b: &StateVector, t: f64, p: &ModelParams) -> Result<StateVector, ModelError> {
    b.require_basis(Basis::B)?;
    let f = b_factor(p, t).inv();
    Ok(StateVector::new(Basis::A, b.amps.map(|x| f * x)))
}

pub fn to_c_basis(b: &StateVector) -> Result<StateVector, ModelError> {
    b.require_basis(Basis::B)?;
    let [b1, b2, b3, b4] = b.amps;
    Ok(StateVector::new(
        Basis::C,
        [b1 + I * b2, b1 - I * b2, b3 + I * b4, b3 - I * b4],
    ))
}

pub fn from_c_basis(c: &StateVector) -> Result<StateVector, ModelError> {
    c.require_basis(Basis::C)?;
    let [c1, c2, c3, c4] = c.amps;
    Ok(StateVector::new(
        Basis::B,
        [
            0.5 * (c1 + c2),
            -0.5 * I * (c1 - c2),
            0.5 * (c3 + c4),
            -0.5 * I * (c3 - c4),
        ],
    ))
}

/// Four-level Hamiltonian with explicit per-pair frequencies.
pub fn hamiltonian(p: &ModelParams, omega1: f64, omega2: f64) -> Matrix4<Complex64> {
    let d2a = Complex64::new(omega2, -p.gamma0);
    let d2b = Complex64::new(omega2, -p.gamma);
    let d1a = Complex64::new(omega1, -p.gamma0);
    let d1b = Complex64::new(omega1, -p.gamma);
    let k = re(p.kappa);
    let e = re(p.eta);
    let z = re(0.0);
    Matrix4::new(
        d2a, k, z, e, //
        k, d2b, e, z, //
        z, e, d1a, k, //
        e, z, k, d1b,
    )
}

pub fn hamiltonian_at(p: &ModelParams, drive: &Drive, t: f64) -> Matrix4<Complex64> {
    let (w1, w2) = drive.frequencies(p, t);
    hamiltonian(p, w1, w2)
}

/// Hamiltonian in the c basis, `i dc/dt = H' c`.
pub fn c_hamiltonian(p: &ModelParams, drive: &Drive, t: f64) -> Matrix4<Complex64> {
    let dc = DerivedCouplings::at(p, drive, t);
    let d = re(dc.omega.re);
    let g = I * dc.gamma_plus;
    let gp = I * dc.gamma_minus;
    let e = I * p.eta;
    let z = re(0.0);
    Matrix4::new(
        -d, g, z, e, //
        gp, -d, -e, z, //
        z, e, d, g, //
        -e, z, gp, d,
    )
}

/// `dc/dt = -i H' c`.
pub fn c_derivative(p: &ModelParams, drive: &Drive, t: f64, c: &[Complex64; 4]) -> [Complex64; 4] {
    let h = c_hamiltonian(p, drive, t);
    let v = (h * Vector4::from_column_slice(c)) * (-I);
    [v[0], v[1], v[2], v[3]]
}

/// Recovers `c_3`, `c_4` from `c_1`, `c_2` and their derivatives by
/// inverting the first two c-basis equations. Needs `η > 0`.
pub fn eliminate_c34(
    p: &ModelParams,
    drive: &Drive,
    t: f64,
    c1: Complex64,
    c2: Complex64,
    c1_dot: Complex64,
    c2_dot: Complex64,
) -> (Complex64, Complex64) {
    let dc = DerivedCouplings::at(p, drive, t);
    let d = dc.omega.re;
    let c3 = -(c2_dot - I * d * c2 - dc.gamma_minus * c1) / p.eta;
    let c4 = (c1_dot - I * d * c1 - dc.gamma_plus * c2) / p.eta;
    (c3, c4)
}

/// `ċ_1 c_2 - ċ_2 c_1 - κ (c_1² + c_2²)`, constant along PT trajectories.
pub fn conserved_quantity(
    c1: Complex64,
    c2: Complex64,
    c1_dot: Complex64,
    c2_dot: Complex64,
    kappa: f64,
) -> Complex64 {
    c1_dot * c2 - c2_dot * c1 - kappa * (c1 * c1 + c2 * c2)
}

/// Instantaneous eigenvalues of the four-level Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: [Complex64; 4],
    /// `‖(H - λ)v‖ / ‖v‖` for a null vector of `H - λ`; `None` when the
    /// eigenvalue is (nearly) degenerate and the vector is not checked.
    pub residuals: [Option<f64>; 4],
}

impl Spectrum {
    pub fn near_defective(&self) -> bool {
        self.residuals.iter().any(Option::is_none)
    }
}

fn det3(m: &[[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Column of the adjugate of `m` with the largest norm; for a simple
/// eigenvalue this spans the null space of `m`.
fn adjugate_null_vector(m: &Matrix4<Complex64>) -> Vector4<Complex64> {
    let mut best = Vector4::zeros();
    let mut best_norm = -1.0;
    for col in 0..4 {
        // adj(m)[i][col] = cofactor(col, i)
        let mut v = Vector4::zeros();
        for i in 0..4 {
            let mut minor = [[re(0.0); 3]; 3];
            let rows: Vec<usize> = (0..4).filter(|&r| r != col).collect();
            let cols: Vec<usize> = (0..4).filter(|&c| c != i).collect();
            for (a, &r) in rows.iter().enumerate() {
                for (b, &c) in cols.iter().enumerate() {
                    minor[a][b] = m[(r, c)];
                }
            }
            let sign = if (i + col) % 2 == 0 { 1.0 } else { -1.0 };
            v[i] = det3(&minor) * sign;
        }
        let n = v.norm();
        if n > best_norm {
            best_norm = n;
            best = v;
        }
    }
    best
}

/// Eigenvalues of the instantaneous Hamiltonian with eigenvector checks.
pub fn spectrum(p: &ModelParams, drive: &Drive, t: f64) -> Spectrum {
    let h = hamiltonian_at(p, drive, t);
    let schur = nalgebra::Schur::new(h);
    let ev = schur.eigenvalues().expect("complex Schur always yields eigenvalues");
    let mut eigenvalues = [ev[0], ev[1], ev[2], ev[3]];
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let scale = h.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let mut residuals = [None; 4];
    for (i, &lam) in eigenvalues.iter().enumerate() {
        let isolated = eigenvalues
            .iter()
            .enumerate()
            .all(|(j, &mu)| j == i || (mu - lam).norm() > 1e-6 * scale);
        if !isolated {
            continue;
        }
        let shifted = h - Matrix4::identity() * lam;
        let v = adjugate_null_vector(&shifted);
        let vn = v.norm();
        if vn == 0.0 {
            continue;
        }
        residuals[i] = Some((shifted * v).norm() / vn);
    }
    Spectrum {
        eigenvalues,
        residuals,
    }
}

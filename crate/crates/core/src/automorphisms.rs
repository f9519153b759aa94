//! Free holomorphic automorphisms of the ball, `Ψ = Ψ_U ∘ Ψ_λ`, and the
//! classical Poincaré–Bergman distance on the scalar ball.
//!
//! `Ψ_U` mixes the generators by a unitary `U`; `Ψ_λ` is the involutive
//! Möbius map exchanging `0` and the scalar point `λ`. Both preserve `δ`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{inverse, op_norm, psd_sqrt, ComplexMatrix};
use crate::tuples::{gaussian_matrix, random_tuple, OperatorTuple};

/// Tolerance on `‖U*U - I‖`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest `‖Ψ^{-1}(Ψ(X)) - X‖` accepted by the inversion probe.
pub const PROBE_TOL: f64 = 1e-9;

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::NotUnitary(f64::INFINITY));
    }
    let err = op_norm(&(&(&u.adjoint() * u) - &ComplexMatrix::identity(u.rows())));
    if err.is_nan() || err > UNITARY_TOL {
        return Err(Error::NotUnitary(err));
    }
    Ok(())
}

fn norm2(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn check_point(lambda: &[Complex64]) -> Result<()> {
    let r = norm2(lambda);
    if r.is_nan() || r >= 1.0 {
        return Err(Error::OutsideBall(r));
    }
    Ok(())
}

/// `X'_j = Σ_i U_ij X_i`.
pub fn psi_unitary(u: &ComplexMatrix, x: &OperatorTuple) -> Result<OperatorTuple> {
    check_unitary(u)?;
    if u.rows() != x.n() {
        return Err(Error::ArityMismatch { expected: u.rows(), found: x.n() });
    }
    let mats = (0..x.n())
        .map(|j| {
            let mut acc = ComplexMatrix::zeros(x.d(), x.d());
            for (i, xi) in x.mats().iter().enumerate() {
                acc += &xi.scale_c(u.get(i, j));
            }
            acc
        })
        .collect();
    OperatorTuple::new(mats)
}

/// `Ψ_λ(X)_j = λ_j I - Δ_λ (I - Σ λ̄_i X_i)^{-1} Σ_i X_i (Δ_{λ*})_ij`.
pub fn psi_lambda(lambda: &[Complex64], x: &OperatorTuple) -> Result<OperatorTuple> {
    check_point(lambda)?;
    let n = lambda.len();
    if n != x.n() {
        return Err(Error::ArityMismatch { expected: n, found: x.n() });
    }
    let d = x.d();
    let delta = (1.0 - lambda.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
    // I_n - λ*λ for the row λ.
    let gram = ComplexMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) - lambda[i].conj() * lambda[j]
    });
    let delta_star = psd_sqrt(&gram)?;
    let mut pencil = ComplexMatrix::identity(d);
    for (l, xi) in lambda.iter().zip(x.mats()) {
        pencil = &pencil - &xi.scale_c(l.conj());
    }
    let resolvent = inverse(&pencil).map_err(|_| Error::ResolventSingular)?.scale(delta);
    let mats = (0..n)
        .map(|j| {
            let mut mix = ComplexMatrix::zeros(d, d);
            for (i, xi) in x.mats().iter().enumerate() {
                mix += &xi.scale_c(delta_star.get(i, j));
            }
            &ComplexMatrix::identity(d).scale_c(lambda[j]) - &(&resolvent * &mix)
        })
        .collect();
    OperatorTuple::new(mats)
}

/// `Ψ_U ∘ Ψ_λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallAutomorphism {
    u: ComplexMatrix,
    lambda: Vec<Complex64>,
}

impl BallAutomorphism {
    pub fn new(u: ComplexMatrix, lambda: Vec<Complex64>) -> Result<Self> {
        check_unitary(&u)?;
        check_point(&lambda)?;
        if u.rows() != lambda.len() {
            return Err(Error::ArityMismatch { expected: u.rows(), found: lambda.len() });
        }
        Ok(BallAutomorphism { u, lambda })
    }

    pub fn identity(n: usize) -> Self {
        BallAutomorphism { u: ComplexMatrix::identity(n), lambda: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn apply(&self, x: &OperatorTuple) -> Result<OperatorTuple> {
        psi_unitary(&self.u, &psi_lambda(&self.lambda, x)?)
    }

    /// `(Ψ_U ∘ Ψ_λ)^{-1} = Ψ_λ ∘ Ψ_{U*} = Ψ_{U*} ∘ Ψ_{λU}`, confirmed on
    /// seeded probes before it is returned.
    pub fn invert(&self) -> Result<Self> {
        let n = self.n();
        let lambda = (0..n)
            .map(|j| self.lambda.iter().enumerate().map(|(i, l)| l * self.u.get(i, j)).sum())
            .collect();
        let inv = BallAutomorphism { u: self.u.adjoint(), lambda };
        let mut worst: f64 = 0.0;
        for seed in 0..3 {
            let x = random_tuple(n, 2, 0.6, 0x5eed + seed)?;
            worst = worst.max(inv.apply(&self.apply(&x)?)?.max_abs_diff(&x));
            worst = worst.max(self.apply(&inv.apply(&x)?)?.max_abs_diff(&x));
        }
        if worst.is_nan() || worst > PROBE_TOL {
            return Err(Error::InversionProbeFailed(worst));
        }
        Ok(inv)
    }
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qr = gaussian_matrix(n, n, &mut rng).into_na().qr();
    let (q, r) = (qr.q(), qr.r());
    ComplexMatrix::from_fn(n, n, |i, j| {
        let p = r[(j, j)];
        let phase = if p.norm() > 0.0 { p / p.norm() } else { Complex64::new(1.0, 0.0) };
        q[(i, j)] * phase
    })
}

/// Random unitary and a random `λ` with `‖λ‖₂ ≤ lambda_max`.
pub fn random_automorphism(n: usize, lambda_max: f64, seed: u64) -> Result<BallAutomorphism> {
    if !(0.0..1.0).contains(&lambda_max) {
        return Err(Error::BadTarget(lambda_max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = gaussian_matrix(1, n, &mut rng).to_row_major();
    let radius = lambda_max * rng.random::<f64>();
    let norm = norm2(&dir);
    let lambda = dir.iter().map(|c| c * (radius / norm.max(f64::MIN_POSITIVE))).collect();
    BallAutomorphism::new(random_unitary(n, rng.random()), lambda)
}

/// `β(z, w) = atanh ‖ψ_z(w)‖₂`, with `ψ_z` the one-dimensional case of `Ψ_z`.
pub fn poincare_bergman(z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    check_point(z)?;
    check_point(w)?;
    if z.len() != w.len() {
        return Err(Error::ArityMismatch { expected: z.len(), found: w.len() });
    }
    if z == w {
        return Ok(0.0);
    }
    let image = psi_lambda(z, &OperatorTuple::scalar(w))?;
    let r = image.as_scalar().map(|v| norm2(&v)).expect("scalar input gives scalar output");
    Ok(r.min(1.0).atanh())
}

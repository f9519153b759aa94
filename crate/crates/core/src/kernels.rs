//! Operators on `C^d ⊗ Fock_m`: the reconstruction operator
//! `R_X = Σ X_i* ⊗ R_i`, the free pluriharmonic Poisson kernel
//! `P(rX, R) = I + Σ_k (r R_X)^k + adjoint`, its factor
//! `C_X = (Δ_X ⊗ I)(I - R_X)^{-1}` and that factor's inverse.
//!
//! `R_X` raises word length by exactly one, so on the truncated space it is
//! nilpotent and every resolvent is a finite sum. Compressing a product of
//! level-raising operators gives the product of the compressions, hence every
//! matrix built here is the exact corner of its infinite counterpart.
//!
//! Index convention: the matrix factor is outer, the Fock factor inner, so
//! row `a * dim + t` is matrix index `a` paired with basis word `t`.

use crate::error::{Error, Result};
use crate::fock::{right_creation, TruncatedFock};
use crate::linalg::{herm_eig, kron, op_norm, spectral_apply, ComplexMatrix};
use crate::tuples::{classify, defect, row_norm, MembershipTag, OperatorTuple, STRICT_TOL};

/// A matrix on `C^d ⊗ Fock_m` whose nonzero blocks only move word length by
/// `s` with `lo <= s <= hi`.
#[derive(Clone, Debug)]
pub struct GradedOperator {
    space: TruncatedFock,
    d: usize,
    matrix: ComplexMatrix,
    shift: (isize, isize),
}

impl GradedOperator {
    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn space(&self) -> &TruncatedFock {
        &self.space
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn level_shift_range(&self) -> (isize, isize) {
        self.shift
    }

    /// Word length of the Fock component of a row/column index.
    pub fn level(&self, index: usize) -> usize {
        self.space.level_of(index % self.space.dim())
    }

    /// Largest entry whose level jump falls outside the declared range.
    pub fn grading_violation(&self) -> f64 {
        let (lo, hi) = self.shift;
        let mut worst: f64 = 0.0;
        for j in 0..self.matrix.cols() {
            let lj = self.level(j) as isize;
            for i in 0..self.matrix.rows() {
                let s = self.level(i) as isize - lj;
                if s < lo || s > hi {
                    worst = worst.max(self.matrix.get(i, j).norm());
                }
            }
        }
        worst
    }
}

/// `R_X · Y` without forming `R_X`.
pub fn apply_reconstruction(x: &OperatorTuple, space: &TruncatedFock, y: &ComplexMatrix) -> ComplexMatrix {
    let (d, dim) = (x.d(), space.dim());
    assert_eq!(y.rows(), d * dim, "operand has wrong row count");
    let src = y.as_na();
    let mut out = nalgebra::DMatrix::zeros(d * dim, y.cols());
    let pairs: Vec<_> = (1..=x.n()).map(|i| space.right_shift_pairs(i).expect("generator in range")).collect();
    for col in 0..y.cols() {
        let s_col = src.column(col);
        let mut o_col = out.column_mut(col);
        for (xi, pairs) in x.mats().iter().zip(&pairs) {
            for a in 0..d {
                for b in 0..d {
                    // (X_i*)_{ab} = conj((X_i)_{ba})
                    let coef = xi.get(b, a).conj();
                    if coef.re == 0.0 && coef.im == 0.0 {
                        continue;
                    }
                    for &(s, t) in pairs {
                        o_col[a * dim + t] += coef * s_col[b * dim + s];
                    }
                }
            }
        }
    }
    ComplexMatrix::from_na(out)
}

/// `R_X = Σ kron(X_i*, R_i)` on words of length `≤ m`.
pub fn reconstruction(x: &OperatorTuple, m: usize) -> Result<GradedOperator> {
    let space = TruncatedFock::new(x.n(), m)?;
    let size = x.d() * space.dim();
    let mut acc = ComplexMatrix::zeros(size, size);
    for (i, xi) in x.mats().iter().enumerate() {
        acc += &kron(&xi.adjoint(), &right_creation(&space, i + 1)?);
    }
    Ok(GradedOperator { space, d: x.d(), matrix: acc, shift: (1, 1) })
}

/// `Σ_{k=1}^{m} (r R_X)^k`, the strictly level-raising half of the kernel.
pub fn kernel_series(x: &OperatorTuple, space: &TruncatedFock, r: f64) -> ComplexMatrix {
    let size = x.d() * space.dim();
    let id = ComplexMatrix::identity(size);
    let mut acc = ComplexMatrix::zeros(size, size);
    for _ in 0..space.m() {
        acc = apply_reconstruction(x, space, &(&id + &acc)).scale(r);
    }
    acc
}

/// Compression of `P(rX, R)` to words of length `≤ m`.
pub fn poisson_kernel(x: &OperatorTuple, m: usize, r: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::BadInput(format!("radius {r} outside [0, 1]")));
    }
    let rn = row_norm(x);
    if r * rn >= 1.0 && (r == 1.0 || classify(x).tag == MembershipTag::Outside) {
        return Err(Error::Divergent(format!("r = {r}, row norm {rn}")));
    }
    let space = TruncatedFock::new(x.n(), m)?;
    Ok(poisson_from_series(&kernel_series(x, &space, r)))
}

/// `I + K + K*`
pub fn poisson_from_series(k: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(k.rows());
    (&(&id + k) + &k.adjoint()).hermitian_part()
}

fn check_strict(x: &OperatorTuple) -> Result<f64> {
    let rn = row_norm(x);
    if rn >= 1.0 - STRICT_TOL {
        return Err(Error::NotStrict(rn));
    }
    Ok(rn)
}

/// `Δ_X^{-1}`, failing when the defect is (numerically) singular.
pub fn defect_inverse(x: &OperatorTuple) -> Result<ComplexMatrix> {
    let gap = &ComplexMatrix::identity(x.d()) - &x.row_gram();
    let eig = herm_eig(&gap)?;
    let min = eig.values[0];
    if min <= STRICT_TOL {
        return Err(Error::DefectSingular(min));
    }
    let inv_roots: Vec<f64> = eig.values.iter().map(|v| 1.0 / v.sqrt()).collect();
    Ok(spectral_apply(&eig.vectors, &inv_roots))
}

/// Corner of `C_X = (Δ_X ⊗ I)(I - R_X)^{-1}`.
pub fn kernel_factor(x: &OperatorTuple, m: usize) -> Result<GradedOperator> {
    check_strict(x)?;
    let space = TruncatedFock::new(x.n(), m)?;
    let size = x.d() * space.dim();
    let resolvent = &ComplexMatrix::identity(size) + &kernel_series(x, &space, 1.0);
    let delta = kron(&defect(x)?, &ComplexMatrix::identity(space.dim()));
    Ok(GradedOperator { d: x.d(), matrix: &delta * &resolvent, shift: (0, m as isize), space })
}

/// Corner of `C_X^{-1} = (I - R_X)(Δ_X^{-1} ⊗ I)`.
pub fn kernel_factor_inverse(x: &OperatorTuple, m: usize) -> Result<GradedOperator> {
    let inv = defect_inverse(x)?;
    let space = TruncatedFock::new(x.n(), m)?;
    let delta_inv = kron(&inv, &ComplexMatrix::identity(space.dim()));
    let matrix = &delta_inv - &apply_reconstruction(x, &space, &delta_inv);
    Ok(GradedOperator { d: x.d(), matrix, shift: (0, 1), space })
}

/// Norm bound on the graded components of `C_A C_B^{-1}` above level `m`.
pub fn tail_bound(a: &OperatorTuple, b: &OperatorTuple, m: usize) -> Result<f64> {
    let na = check_strict(a)?;
    let nb = check_strict(b)?;
    let da = op_norm(&defect(a)?);
    let db_inv = op_norm(&defect_inverse(b)?);
    Ok(da * db_inv * (na + nb) * na.powi(m as i32) / (1.0 - na))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{herm_eigenvalues, inverse};
    use crate::tuples::random_tuple;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    /// Word-indexed oracle: `Σ_{1≤|α|≤m} r^|α| X_α̃* ⊗ R_α`.
    fn series_by_words(x: &OperatorTuple, m: usize, r: f64) -> ComplexMatrix {
        let space = TruncatedFock::new(x.n(), m).unwrap();
        let rs: Vec<_> = (1..=x.n()).map(|i| right_creation(&space, i).unwrap()).collect();
        let size = x.d() * space.dim();
        let mut acc = ComplexMatrix::zeros(size, size);
        for word in space.words().filter(|w| !w.is_empty()) {
            let mut x_rev = ComplexMatrix::identity(x.d());
            for &l in word.reverse().letters() {
                x_rev = &x_rev * x.get(l - 1);
            }
            let mut r_word = ComplexMatrix::identity(space.dim());
            for &l in word.letters() {
                r_word = &r_word * &rs[l - 1];
            }
            acc += &kron(&x_rev.adjoint(), &r_word).scale(r.powi(word.len() as i32));
        }
        acc
    }

    fn corner(m: &ComplexMatrix, x: &OperatorTuple, big: &TruncatedFock, small: &TruncatedFock) -> ComplexMatrix {
        let (d, db, ds) = (x.d(), big.dim(), small.dim());
        ComplexMatrix::from_fn(d * ds, d * ds, |i, j| m.get((i / ds) * db + i % ds, (j / ds) * db + j % ds))
    }

    #[test]
    fn reconstruction_examples() {
        let zero = reconstruction(&OperatorTuple::zeros(2, 2), 3).unwrap();
        assert_eq!(zero.matrix().max_abs(), 0.0);

        let z = Complex64::new(0.3, -0.4);
        let r = reconstruction(&OperatorTuple::scalar(&[z]), 2).unwrap();
        let want = ComplexMatrix::from_fn(3, 3, |i, j| if i == j + 1 { z.conj() } else { Complex64::new(0.0, 0.0) });
        assert!(r.matrix().max_abs_diff(&want) == 0.0);

        for seed in 0..4 {
            let x = random_tuple(2, 2, 0.6, seed).unwrap();
            for m in 1..4 {
                let rx = reconstruction(&x, m).unwrap();
                assert_abs_diff_eq!(op_norm(rx.matrix()), row_norm(&x), epsilon = 1e-12);
                assert_eq!(rx.matrix().pow(m as u32 + 1).max_abs(), 0.0);
                assert_eq!(rx.grading_violation(), 0.0);
                let sparse = apply_reconstruction(&x, rx.space(), &ComplexMatrix::identity(rx.matrix().rows()));
                assert!(sparse.max_abs_diff(rx.matrix()) < 1e-15);
            }
        }
    }

    #[test]
    fn series_matches_word_oracle() {
        for (n, m) in [(1, 4), (2, 1), (2, 3), (3, 2)] {
            let x = random_tuple(n, 2, 0.8, (n * 10 + m) as u64).unwrap();
            let space = TruncatedFock::new(n, m).unwrap();
            for r in [0.4, 1.0] {
                let fast = kernel_series(&x, &space, r);
                assert!(fast.max_abs_diff(&series_by_words(&x, m, r)) <= 1e-12);
            }
        }
    }

    #[test]
    fn poisson_examples() {
        let p = poisson_kernel(&OperatorTuple::zeros(2, 2), 3, 0.7).unwrap();
        assert_eq!(p.max_abs_diff(&ComplexMatrix::identity(2 * 15)), 0.0);

        // Scalar symbol: sup (1 - |z|^2)/|1 - z e^{iθ}|^2 = 3 at z = 0.5.
        let half = OperatorTuple::scalar_real(&[0.5]);
        let mut prev = 0.0;
        for m in [4, 16, 64, 200] {
            let top = *herm_eigenvalues(&poisson_kernel(&half, m, 1.0).unwrap()).unwrap().last().unwrap();
            assert!(top >= prev - 1e-12 && top <= 3.0 + 1e-12);
            prev = top;
        }
        // Toeplitz sections reach the symbol maximum at rate 6(π/m)² here.
        assert!((3.0 - prev).abs() < 2e-3);

        assert!(matches!(poisson_kernel(&OperatorTuple::scalar_real(&[1.0]), 3, 1.0), Err(Error::Divergent(_))));
        assert!(poisson_kernel(&OperatorTuple::scalar_real(&[1.0]), 3, 0.9).is_ok());
        assert!(matches!(poisson_kernel(&OperatorTuple::scalar_real(&[2.0]), 3, 0.6), Err(Error::Divergent(_))));
    }

    #[test]
    fn corner_consistency() {
        for seed in 0..3 {
            let x = random_tuple(2, 2, 0.9, seed).unwrap();
            for m in 0..4 {
                let small = TruncatedFock::new(2, m).unwrap();
                let big = TruncatedFock::new(2, m + 1).unwrap();
                let p_small = poisson_kernel(&x, m, 0.8).unwrap();
                let p_big = poisson_kernel(&x, m + 1, 0.8).unwrap();
                assert!(corner(&p_big, &x, &big, &small).max_abs_diff(&p_small) <= 1e-13);
            }
        }
    }

    #[test]
    fn harnack_band_on_seeded_tuples() {
        for seed in 0..20u64 {
            let target = if seed % 5 == 0 { 1.0 } else { 0.2 + 0.04 * seed as f64 };
            let x = crate::tuples::rescale_to(&random_tuple(2, 2, 0.5, seed).unwrap(), target);
            for r in [0.3, 0.6, 0.9] {
                let lo = (1.0 - r) / (1.0 + r);
                let hi = (1.0 + r) / (1.0 - r);
                for m in [1, 3, 5] {
                    let ev = herm_eigenvalues(&poisson_kernel(&x, m, r).unwrap()).unwrap();
                    assert!(ev[0] >= lo - 1e-9 && *ev.last().unwrap() <= hi + 1e-9);
                }
            }
        }
    }

    #[test]
    fn kernel_factor_examples() {
        let f = kernel_factor(&OperatorTuple::zeros(2, 2), 2).unwrap();
        assert_eq!(f.matrix().max_abs_diff(&ComplexMatrix::identity(14)), 0.0);

        let z = Complex64::new(0.3, 0.2);
        let f = kernel_factor(&OperatorTuple::scalar(&[z]), 1).unwrap();
        let dz = (1.0 - z.norm_sqr()).sqrt();
        let want = ComplexMatrix::from_row_major(
            2,
            2,
            &[Complex64::new(dz, 0.0), Complex64::new(0.0, 0.0), z.conj() * dz, Complex64::new(dz, 0.0)],
        )
        .unwrap();
        assert!(f.matrix().max_abs_diff(&want) < 1e-15);

        for seed in 0..4 {
            let x = random_tuple(2, 2, 0.7, seed).unwrap();
            let m = 3;
            let c = kernel_factor(&x, m).unwrap();
            assert_eq!(c.grading_violation(), 0.0);
            let ci = kernel_factor_inverse(&x, m).unwrap();
            assert_eq!(ci.grading_violation(), 0.0);
            let id = ComplexMatrix::identity(c.matrix().rows());
            assert!((c.matrix() * ci.matrix()).max_abs_diff(&id) <= 1e-12);
            assert!(ci.matrix().max_abs_diff(&inverse(c.matrix()).unwrap()) <= 1e-10);
        }
        assert!(matches!(kernel_factor(&OperatorTuple::scalar_real(&[1.0]), 2), Err(Error::NotStrict(_))));
        assert!(matches!(
            kernel_factor_inverse(&OperatorTuple::scalar_real(&[1.0]), 2),
            Err(Error::DefectSingular(_))
        ));
    }

    /// `C*C = P` holds for the full operators; on a corner it is reached by
    /// truncating `C` much deeper than the level being compared.
    #[test]
    fn factorization_through_deep_truncation() {
        for seed in 0..3 {
            let x = random_tuple(1, 2, 0.7, seed).unwrap();
            let (m, deep) = (3, 90);
            let small = TruncatedFock::new(1, m).unwrap();
            let big = TruncatedFock::new(1, deep).unwrap();
            let c = kernel_factor(&x, deep).unwrap();
            let gram = &c.matrix().adjoint() * c.matrix();
            let p = poisson_kernel(&x, m, 1.0).unwrap();
            assert!(corner(&gram, &x, &big, &small).max_abs_diff(&p) <= 1e-10);
        }
    }

    #[test]
    fn inverse_factor_norm_approaches_sqrt3() {
        let half = OperatorTuple::scalar_real(&[0.5]);
        let mut prev = 0.0;
        for m in [2, 8, 32, 128] {
            let v = op_norm(kernel_factor_inverse(&half, m).unwrap().matrix());
            assert!(v >= prev - 1e-12 && v <= 3f64.sqrt() + 1e-12);
            prev = v;
        }
        assert!((prev - 3f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn tail_bound_examples() {
        let zero = OperatorTuple::zeros(2, 2);
        assert_eq!(tail_bound(&zero, &zero, 5).unwrap(), 0.0);
        let a = OperatorTuple::scalar_real(&[0.5]);
        let b = OperatorTuple::scalar_real(&[0.0, 0.5]);
        let a2 = OperatorTuple::scalar_real(&[0.5, 0.0]);
        // ‖Δ_A‖·‖Δ_B^{-1}‖ = 1 here, and ‖A‖ + ‖B‖ = 1.
        assert_abs_diff_eq!(tail_bound(&a2, &b, 10).unwrap(), 0.5f64.powi(10) / 0.5, epsilon = 1e-15);
        assert!(matches!(tail_bound(&OperatorTuple::scalar_real(&[1.0]), &a, 1), Err(Error::NotStrict(_))));
        for m in 0..30 {
            assert!(tail_bound(&a2, &b, m + 1).unwrap() <= tail_bound(&a2, &b, m).unwrap());
        }
    }

    /// The degree-k part of `C_A C_B^{-1}` (blocks jumping k levels) obeys the
    /// per-degree bound, so the tail bound dominates everything above `m`.
    #[test]
    fn tail_bound_dominates_graded_components() {
        let big_m = 6;
        for seed in 0..4 {
            let a = random_tuple(2, 2, 0.6, seed).unwrap();
            let b = random_tuple(2, 2, 0.5, seed + 100).unwrap();
            let prod = kernel_factor(&a, big_m).unwrap().matrix() * kernel_factor_inverse(&b, big_m).unwrap().matrix();
            let g = GradedOperator {
                space: TruncatedFock::new(2, big_m).unwrap(),
                d: 2,
                matrix: prod,
                shift: (0, 0),
            };
            let mut degree_norms = vec![0.0; big_m + 1];
            for (k, slot) in degree_norms.iter_mut().enumerate() {
                let part = ComplexMatrix::from_fn(g.matrix().rows(), g.matrix().cols(), |i, j| {
                    if g.level(i) as isize - g.level(j) as isize == k as isize {
                        g.matrix().get(i, j)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                *slot = op_norm(&part);
            }
            for m in 0..big_m {
                let observed: f64 = degree_norms[m + 1..].iter().sum();
                assert!(observed <= tail_bound(&a, &b, m).unwrap() + 1e-12);
            }
        }
    }
}

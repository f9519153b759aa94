//! Points of the noncommutative ball: `n`-tuples of `d x d` complex matrices.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::{op_norm, psd_sqrt, ComplexMatrix};

/// Width of the band around 1 used when tagging ball membership.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Successive joint-spectral-radius estimates closer than this count as converged.
pub const JSR_TOL: f64 = 1e-6;
pub const JSR_KMAX: usize = 200;
/// Gate for "strictly inside the ball".
pub const STRICT_TOL: f64 = 1e-8;

/// `X = (X_1, ..., X_n)`, all square of the same size `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTuple {
    mats: Vec<ComplexMatrix>,
    d: usize,
}

impl OperatorTuple {
    pub fn new(mats: Vec<ComplexMatrix>) -> Result<Self> {
        let first = mats.first().ok_or_else(|| Error::BadDim("tuple needs at least one matrix".into()))?;
        let d = first.rows();
        if d == 0 {
            return Err(Error::BadDim("matrices must be at least 1x1".into()));
        }
        for (i, x) in mats.iter().enumerate() {
            if x.rows() != d || x.cols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "entry {} is {}x{}, expected {d}x{d}",
                    i + 1,
                    x.rows(),
                    x.cols()
                )));
            }
            if !x.is_finite() {
                return Err(Error::BadInput(format!("entry {} has non-finite values", i + 1)));
            }
        }
        Ok(OperatorTuple { mats, d })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        assert!(n >= 1 && d >= 1);
        OperatorTuple { mats: vec![ComplexMatrix::zeros(d, d); n], d }
    }

    /// A point of the scalar ball `B_n` as a tuple of 1x1 matrices.
    pub fn scalar(z: &[Complex64]) -> Self {
        assert!(!z.is_empty(), "scalar point needs at least one coordinate");
        OperatorTuple { mats: z.iter().map(|&c| ComplexMatrix::scalar(c)).collect(), d: 1 }
    }

    pub fn scalar_real(z: &[f64]) -> Self {
        let z: Vec<Complex64> = z.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::scalar(&z)
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Zero-based access to `X_{i+1}`.
    pub fn get(&self, i: usize) -> &ComplexMatrix {
        &self.mats[i]
    }

    pub fn mats(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    pub fn into_mats(self) -> Vec<ComplexMatrix> {
        self.mats
    }

    /// Scalar coordinates of a tuple of 1x1 matrices.
    pub fn as_scalar(&self) -> Option<Vec<Complex64>> {
        (self.d == 1).then(|| self.mats.iter().map(|x| x.get(0, 0)).collect())
    }

    pub fn scale(&self, r: f64) -> Self {
        OperatorTuple { mats: self.mats.iter().map(|x| x.scale(r)).collect(), d: self.d }
    }

    pub fn map(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        OperatorTuple { mats: self.mats.iter().map(f).collect(), d: self.d }
    }

    /// Simultaneous unitary conjugation `X_i -> V X_i V*`.
    pub fn conjugate(&self, v: &ComplexMatrix) -> Self {
        let vs = v.adjoint();
        self.map(|x| &(v * x) * &vs)
    }

    /// Entrywise difference `X - Y`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(OperatorTuple {
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a - b).collect(),
            d: self.d,
        })
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() || self.d != other.d {
            return Err(Error::DimensionMismatch(format!(
                "tuples of shape (n={}, d={}) and (n={}, d={})",
                self.n(),
                self.d,
                other.n(),
                other.d
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mats.iter().zip(&other.mats).fold(0.0, |acc, (a, b)| acc.max(a.max_abs_diff(b)))
    }

    /// Bitwise equality of all entries.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.n() == other.n()
            && self.d == other.d
            && self.mats.iter().zip(&other.mats).all(|(a, b)| {
                a.as_na()
                    .iter()
                    .zip(b.as_na().iter())
                    .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
            })
    }

    /// Sequence of all entry bit patterns; gives a total order on tuples.
    pub fn bit_key(&self) -> Vec<u64> {
        let mut key = vec![self.n() as u64, self.d as u64];
        for x in &self.mats {
            for z in x.as_na().iter() {
                key.push(z.re.to_bits());
                key.push(z.im.to_bits());
            }
        }
        key
    }

    /// `Σ X_i X_i*`
    pub fn row_gram(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.d, self.d);
        for x in &self.mats {
            acc += &(x * &x.adjoint());
        }
        acc.hermitian_part()
    }

    /// `[X_1 ... X_n]` as a `d x nd` matrix.
    pub fn row_matrix(&self) -> ComplexMatrix {
        let d = self.d;
        ComplexMatrix::from_fn(d, d * self.n(), |i, j| self.mats[j / d].get(i, j % d))
    }

    /// `Φ(Y) = Σ X_i Y X_i*`
    pub fn cp_map(&self, y: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.d, self.d);
        for x in &self.mats {
            acc += &(&(x * y) * &x.adjoint());
        }
        acc.hermitian_part()
    }
}

/// Where a tuple sits relative to the noncommutative ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MembershipTag {
    OpenBall,
    SpectralInterior,
    ClosedBallBoundary,
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallMembership {
    pub tag: MembershipTag,
    pub row_norm: f64,
    pub spectral_radius: f64,
}

/// Joint spectral radius estimate with its Gelfand-sequence diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralRadius {
    /// Smallest `‖Φ^k(I)‖^{1/2k}` seen; every such value bounds the true radius from above.
    pub estimate: f64,
    /// Running estimates at the last three steps, oldest first.
    pub last_three: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
}

pub fn row_norm(x: &OperatorTuple) -> f64 {
    op_norm(&x.row_gram()).sqrt()
}

/// `Δ_X = (I - Σ X_i X_i*)^{1/2}`
pub fn defect(x: &OperatorTuple) -> Result<ComplexMatrix> {
    let m = &ComplexMatrix::identity(x.d) - &x.row_gram();
    psd_sqrt(&m)
}

/// Power iteration of the completely positive map `Φ` from `I`, renormalized
/// each step with the scale kept as a log-sum.
pub fn joint_spectral_radius(x: &OperatorTuple, kmax: usize) -> SpectralRadius {
    let kmax = kmax.max(4);
    let mut y = ComplexMatrix::identity(x.d);
    let mut log_scale = 0.0;
    let mut best = f64::INFINITY;
    let mut history = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        y = x.cp_map(&y);
        let s = op_norm(&y);
        if s == 0.0 {
            return SpectralRadius { estimate: 0.0, last_three: vec![0.0; 3], steps: k, converged: true };
        }
        log_scale += s.ln();
        y = y.scale(1.0 / s);
        best = best.min((log_scale / (2.0 * k as f64)).exp());
        history.push(best);
    }
    let last_three = history[history.len() - 3..].to_vec();
    let converged = (last_three[2] - last_three[0]).abs() <= JSR_TOL;
    SpectralRadius { estimate: best, last_three, steps: kmax, converged }
}

pub fn classify(x: &OperatorTuple) -> BallMembership {
    let rn = row_norm(x);
    let sr = joint_spectral_radius(x, JSR_KMAX).estimate;
    let tag = if rn < 1.0 - BOUNDARY_TOL {
        MembershipTag::OpenBall
    } else if rn > 1.0 + BOUNDARY_TOL {
        MembershipTag::Outside
    } else if sr < 1.0 - BOUNDARY_TOL {
        MembershipTag::SpectralInterior
    } else {
        MembershipTag::ClosedBallBoundary
    };
    BallMembership { tag, row_norm: rn, spectral_radius: sr }
}

/// Standard complex Gaussian matrix drawn from `rng`.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid sigma");
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(normal.sample(rng), normal.sample(rng)))
}

/// Gaussian tuple rescaled to row norm `target`.
pub fn random_tuple(n: usize, d: usize, target: f64, seed: u64) -> Result<OperatorTuple> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::BadTarget(target));
    }
    if n == 0 || d == 0 {
        return Err(Error::BadDim(format!("n={n}, d={d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = OperatorTuple::new((0..n).map(|_| gaussian_matrix(d, d, &mut rng)).collect())?;
    Ok(rescale_to(&raw, target))
}

/// Rescales so the row norm is `target`; the zero tuple is returned unchanged.
pub fn rescale_to(x: &OperatorTuple, target: f64) -> OperatorTuple {
    let rn = row_norm(x);
    if rn == 0.0 {
        return x.clone();
    }
    x.scale(target / rn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn nilpotent() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    fn coisometry() -> OperatorTuple {
        OperatorTuple::new(vec![nilpotent(), ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]])]).unwrap()
    }

    #[test]
    fn row_norm_examples() {
        assert_eq!(row_norm(&OperatorTuple::zeros(2, 3)), 0.0);
        assert_abs_diff_eq!(row_norm(&OperatorTuple::scalar_real(&[0.6, 0.0])), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(row_norm(&coisometry()), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn defect_examples() {
        let d = defect(&OperatorTuple::zeros(1, 3)).unwrap();
        assert!(d.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        let d = defect(&OperatorTuple::scalar_real(&[0.6])).unwrap();
        assert_abs_diff_eq!(d.get(0, 0).re, 0.8, epsilon = 1e-15);
        assert!(defect(&coisometry()).unwrap().max_abs() < 1e-15);
        assert!(matches!(defect(&OperatorTuple::scalar_real(&[1.2])), Err(Error::NotPsd(_))));
    }

    #[test]
    fn spectral_radius_examples() {
        let nil = OperatorTuple::new(vec![nilpotent()]).unwrap();
        let sr = joint_spectral_radius(&nil, 200);
        assert_eq!(sr.estimate, 0.0);
        assert!(sr.converged);

        let sr = joint_spectral_radius(&OperatorTuple::scalar_real(&[0.3, 0.4]), 200);
        assert_abs_diff_eq!(sr.estimate, 0.5, epsilon = 1e-12);
        assert!(sr.converged);

        let diag = OperatorTuple::new(vec![ComplexMatrix::diag_real(&[0.3, 0.7])]).unwrap();
        let sr = joint_spectral_radius(&diag, 200);
        assert_abs_diff_eq!(sr.estimate, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&OperatorTuple::scalar_real(&[0.5])).tag, MembershipTag::OpenBall);
        let nil = classify(&OperatorTuple::new(vec![nilpotent()]).unwrap());
        assert_eq!(nil.tag, MembershipTag::SpectralInterior);
        assert_abs_diff_eq!(nil.row_norm, 1.0, epsilon = 1e-15);
        assert_eq!(nil.spectral_radius, 0.0);
        assert_eq!(classify(&OperatorTuple::scalar_real(&[1.0])).tag, MembershipTag::ClosedBallBoundary);
        assert_eq!(classify(&OperatorTuple::scalar_real(&[0.8, 0.8])).tag, MembershipTag::Outside);
        assert_eq!(classify(&coisometry()).tag, MembershipTag::ClosedBallBoundary);
    }

    #[test]
    fn random_tuple_examples() {
        let x = random_tuple(2, 2, 0.7, 1).unwrap();
        assert!((row_norm(&x) - 0.7).abs() <= 1e-12);
        let z = random_tuple(1, 1, 0.5, 7).unwrap();
        assert_abs_diff_eq!(z.get(0).get(0, 0).norm(), 0.5, epsilon = 1e-12);
        assert!(random_tuple(3, 2, 0.4, 99).unwrap().bit_eq(&random_tuple(3, 2, 0.4, 99).unwrap()));
        assert!(!random_tuple(3, 2, 0.4, 99).unwrap().bit_eq(&random_tuple(3, 2, 0.4, 100).unwrap()));
        assert!(matches!(random_tuple(2, 2, 1.0, 0), Err(Error::BadTarget(_))));
        assert!(matches!(random_tuple(2, 2, 0.0, 0), Err(Error::BadTarget(_))));
    }

    #[test]
    fn tuple_shape_checks() {
        let bad = OperatorTuple::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)]);
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
        assert!(OperatorTuple::new(vec![]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn radius_below_row_norm(seed in 0u64..100_000, n in 1usize..4, d in 1usize..4, t in 0.05f64..0.99) {
            let x = random_tuple(n, d, t, seed).unwrap();
            let sr = joint_spectral_radius(&x, JSR_KMAX);
            prop_assert!(sr.estimate <= row_norm(&x) + JSR_TOL);
            prop_assert_eq!(classify(&x).tag, MembershipTag::OpenBall);
        }

        #[test]
        fn radius_unitarily_invariant(seed in 0u64..100_000, n in 1usize..3, d in 2usize..4) {
            let x = random_tuple(n, d, 0.8, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
            let v = ComplexMatrix::from_na(gaussian_matrix(d, d, &mut rng).into_na().qr().q());
            let a = joint_spectral_radius(&x, JSR_KMAX).estimate;
            let b = joint_spectral_radius(&x.conjugate(&v), JSR_KMAX).estimate;
            prop_assert!((a - b).abs() <= JSR_TOL);
        }

        #[test]
        fn defect_identity(seed in 0u64..100_000, n in 1usize..4, d in 1usize..5, t in 0.0f64..1.0) {
            let x = rescale_to(&random_tuple(n, d, 0.5, seed).unwrap(), t);
            let df = defect(&x).unwrap();
            let back = &(&df * &df) + &x.row_gram();
            prop_assert!(back.max_abs_diff(&ComplexMatrix::identity(d)) <= 1e-10);
        }
    }
}

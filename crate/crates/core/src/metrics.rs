//! The Harnack gauge `ω`, the hyperbolic metric `δ = ln ω`, the kernel metric
//! `d_H(A, B) = ‖P(A, R) - P(B, R)‖`, Harnack domination tests and a sampled
//! lower bound for `δ`.
//!
//! For points of the open ball `ω(A, B) = max(‖C_A C_B^{-1}‖, ‖C_B C_A^{-1}‖)`.
//! Each norm is the threshold of a bounded-real test on a realization of the
//! product, and `d_H` and `‖P(X, R)^{±1}‖` are thresholds of positive-real
//! tests. Bisection on the threshold yields an [`Enclosure`] whose lower end
//! is exceeded by a finite compression and whose upper end carries a
//! dissipation certificate.
//!
//! Pairs of tuples with row norm one and joint spectral radius below one take
//! the radial path: `ω(A, B) = sup_r ω(rA, rB)`, bounded below on an `r`-grid
//! and above by a positive-real certificate of `P(A, R) ≤ c² P(B, R)` and its
//! mirror at `r = 1`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dissipation::{bracket_threshold, test_dissipative, Bracket, Realization, Scale, Supply, Verdict};
use crate::error::{Error, Result};
use crate::fock::TruncatedFock;
use crate::kernels::{defect_inverse, kernel_factor, kernel_factor_inverse, kernel_series, poisson_from_series};
use crate::linalg::{cholesky_lower, herm_eig, herm_eigenvalues, kron, op_norm, ComplexMatrix};
use crate::parallel::{map_indexed, Execution};
use crate::tuples::{classify, defect, gaussian_matrix, row_norm, MembershipTag, OperatorTuple};

/// Default `r`-grid for domination tests and the radial path.
pub const DEFAULT_R_GRID: [f64; 3] = [0.5, 0.9, 0.99];
/// Positivity verdicts tolerate eigenvalues down to `-CERT_TOL * scale`.
pub const CERT_TOL: f64 = 1e-10;
/// Largest Harnack constant probed.
pub const C_MAX: f64 = 1e6;

/// Two-sided bound on a real quantity. `m_used` is the deepest truncation
/// level any test reached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Enclosure {
    pub lower: f64,
    pub upper: f64,
    pub m_used: usize,
    pub converged: bool,
}

impl Enclosure {
    pub fn exact(value: f64) -> Self {
        Enclosure { lower: value, upper: value, m_used: 0, converged: true }
    }

    pub fn mid(&self) -> f64 {
        if self.upper.is_finite() {
            0.5 * (self.lower + self.upper)
        } else {
            self.lower
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Image under an increasing map.
    pub fn map_monotone(&self, f: impl Fn(f64) -> f64) -> Self {
        Enclosure { lower: f(self.lower), upper: f(self.upper), ..*self }
    }

    fn from_bracket(b: Bracket) -> Self {
        Enclosure { lower: b.lo, upper: b.hi, m_used: b.steps, converged: b.converged }
    }
}

/// Controls for the enclosure searches.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricOptions {
    /// Target width: of `ln ω` (equivalently of `δ`) and of `ln ‖P^{±1}‖`; an
    /// absolute width for `d_H`.
    pub tol: f64,
    /// Budget of value-iteration steps per test, i.e. the deepest truncation
    /// level examined.
    pub m_max: usize,
    pub r_grid: Vec<f64>,
    pub cert_tol: f64,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions { tol: 1e-6, m_max: 20_000, r_grid: DEFAULT_R_GRID.to_vec(), cert_tol: CERT_TOL }
    }
}

/// Controls for dense-compression domination tests.
#[derive(Clone, Debug, PartialEq)]
pub struct HarnackOptions {
    pub r_grid: Vec<f64>,
    pub m_max: usize,
    pub cert_tol: f64,
    /// Levels whose compression would exceed this matrix size are skipped.
    pub max_size: usize,
}

impl Default for HarnackOptions {
    fn default() -> Self {
        HarnackOptions { r_grid: DEFAULT_R_GRID.to_vec(), m_max: 6, cert_tol: CERT_TOL, max_size: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HarnackVerdict {
    /// `c² P(rB) - P(rA) ≥ -cert_tol` on every tested compression, up to level `m`.
    DominatedUpTo { m: usize, r_grid: Vec<f64> },
    /// Unit vector `witness` with `⟨(c² P(rB) - P(rA)) v, v⟩ = value < -cert_tol·scale`
    /// at level `m`.
    Refuted { m: usize, r: f64, witness: Vec<Complex64>, value: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarnackCertificate {
    pub verdict: HarnackVerdict,
    pub c: f64,
}

impl HarnackCertificate {
    pub fn is_refuted(&self) -> bool {
        matches!(self.verdict, HarnackVerdict::Refuted { .. })
    }
}

fn kernel_pair(a: &OperatorTuple, b: &OperatorTuple, m: usize, r: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let space = TruncatedFock::new(a.n(), m)?;
    Ok((
        poisson_from_series(&kernel_series(a, &space, r)),
        poisson_from_series(&kernel_series(b, &space, r)),
    ))
}

fn harnack_size(x: &OperatorTuple, m: usize) -> Option<usize> {
    TruncatedFock::new(x.n(), m).ok().map(|s| s.dim() * x.d())
}

/// Tests `P(rA) ≤ c² P(rB)` on compressions to words of length `≤ m` for
/// every `r` in the grid and `m ≤ opts.m_max`.
///
/// Compressions of a positive operator are positive, so a refutation is
/// genuine; passing every test is only a necessary condition.
pub fn harnack_dominated(
    a: &OperatorTuple,
    b: &OperatorTuple,
    c: f64,
    opts: &HarnackOptions,
) -> Result<HarnackCertificate> {
    a.check_same_shape(b)?;
    if !(c >= 1.0) {
        return Err(Error::BadInput(format!("Harnack constant {c} must be at least 1")));
    }
    for x in [a, b] {
        let tag = classify(x).tag;
        if tag == MembershipTag::Outside {
            return Err(Error::NotComparable(format!("tuple outside the closed ball ({tag:?})")));
        }
    }
    let mut deepest = 0;
    for &r in &opts.r_grid {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::BadInput(format!("grid radius {r} outside [0, 1)")));
        }
        for m in 0..=opts.m_max {
            if harnack_size(a, m).is_none_or(|s| s > opts.max_size) {
                break;
            }
            deepest = deepest.max(m);
            let (pa, pb) = kernel_pair(a, b, m, r)?;
            let diff = &pb.scale(c * c) - &pa;
            let scale = 1.0 + c * c * pb.max_abs() + pa.max_abs();
            let eig = herm_eig(&diff)?;
            if eig.values[0] < -opts.cert_tol * scale {
                let witness = eig.vectors.column(0);
                let value = diff.quadratic_form(&witness).re;
                // Re-check the witness on the quadratic form itself.
                if value < -opts.cert_tol * scale {
                    return Ok(HarnackCertificate { verdict: HarnackVerdict::Refuted { m, r, witness, value }, c });
                }
            }
        }
    }
    Ok(HarnackCertificate { verdict: HarnackVerdict::DominatedUpTo { m: deepest, r_grid: opts.r_grid.clone() }, c })
}

/// Smallest `c` in `[1, C_MAX]` (geometric bisection, 40 steps) for which
/// [`harnack_dominated`] passes; `None` if it fails even at `C_MAX`.
pub fn minimal_harnack_constant(a: &OperatorTuple, b: &OperatorTuple, opts: &HarnackOptions) -> Result<Option<f64>> {
    if harnack_dominated(a, b, C_MAX, opts)?.is_refuted() {
        return Ok(None);
    }
    if !harnack_dominated(a, b, 1.0, opts)?.is_refuted() {
        return Ok(Some(1.0));
    }
    let (mut lo, mut hi) = (1.0f64, C_MAX);
    for _ in 0..40 {
        let mid = (lo * hi).sqrt();
        if harnack_dominated(a, b, mid, opts)?.is_refuted() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}

fn adjoints(x: &OperatorTuple) -> Vec<ComplexMatrix> {
    x.mats().iter().map(|m| m.adjoint()).collect()
}

/// Realization of `C_A C_B^{-1} = Δ_A Δ_B^{-1} + Δ_A (I - R_A)^{-1} Σ (A_j* - B_j*) Δ_B^{-1} ⊗ R_j`.
fn ratio_system(a: &OperatorTuple, b: &OperatorTuple) -> Result<Realization> {
    let da = defect(a)?;
    let db_inv = defect_inverse(b)?;
    let bs = a.mats().iter().zip(b.mats()).map(|(x, y)| &(x - y).adjoint() * &db_inv).collect();
    Ok(Realization { a: adjoints(a), b: bs, d: &da * &db_inv, c: da })
}

fn block_diag(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (x.rows(), y.rows());
    ComplexMatrix::from_fn(p + q, p + q, |i, j| match (i < p, j < p) {
        (true, true) => x.get(i, j),
        (false, false) => y.get(i - p, j - p),
        _ => Complex64::new(0.0, 0.0),
    })
}

fn stack(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    let p = x.rows();
    ComplexMatrix::from_fn(p + y.rows(), x.cols(), |i, j| if i < p { x.get(i, j) } else { y.get(i - p, j) })
}

/// Realization of `D + ca·K_A + cb·K_B` with `K_X = Σ_{k≥1} R_X^k` and `D = dval·I`.
fn kernel_pair_system(a: &OperatorTuple, b: &OperatorTuple, ca: f64, cb: f64, dval: f64) -> Realization {
    let d = a.d();
    let id = ComplexMatrix::identity(d);
    let (aa, ba) = (adjoints(a), adjoints(b));
    Realization {
        a: aa.iter().zip(&ba).map(|(x, y)| block_diag(x, y)).collect(),
        b: aa.iter().zip(&ba).map(|(x, y)| stack(x, y)).collect(),
        c: ComplexMatrix::from_fn(d, 2 * d, |i, j| {
            let s = if j < d { ca } else { cb };
            id.get(i, j % d) * s
        }),
        d: id.scale(dval),
    }
}

/// Realization of `dval·I + cval·K_X`.
fn kernel_system(x: &OperatorTuple, cval: f64, dval: f64) -> Realization {
    let id = ComplexMatrix::identity(x.d());
    Realization { a: adjoints(x), b: adjoints(x), c: id.scale(cval), d: id.scale(dval) }
}

fn check_radius_below_one(x: &OperatorTuple) -> Result<MembershipTag> {
    let cls = classify(x);
    match cls.tag {
        MembershipTag::OpenBall | MembershipTag::SpectralInterior => Ok(cls.tag),
        tag => Err(Error::Divergent(format!(
            "kernel series needs joint spectral radius < 1 ({tag:?}, row norm {}, radius {})",
            cls.row_norm, cls.spectral_radius
        ))),
    }
}

/// Canonical order so that symmetric quantities are bitwise symmetric.
fn ordered<'a>(a: &'a OperatorTuple, b: &'a OperatorTuple) -> (&'a OperatorTuple, &'a OperatorTuple) {
    if a.bit_key() <= b.bit_key() {
        (a, b)
    } else {
        (b, a)
    }
}

fn combine_max(x: Enclosure, y: Enclosure) -> Enclosure {
    Enclosure {
        lower: x.lower.max(y.lower),
        upper: x.upper.max(y.upper),
        m_used: x.m_used.max(y.m_used),
        converged: x.converged && y.converged,
    }
}

/// Threshold of two monotone test families whose maximum is wanted. The
/// second family is first probed at the first one's lower end; a certificate
/// there means it cannot raise the maximum.
fn max_of_thresholds(
    mut first: impl FnMut(f64) -> Verdict,
    first_init: (f64, f64),
    mut second: impl FnMut(f64) -> Verdict,
    second_init: (f64, f64),
    cap: f64,
    scale: Scale,
) -> Enclosure {
    let b1 = bracket_threshold(&mut first, first_init.0, first_init.1, cap, scale);
    let e1 = Enclosure::from_bracket(b1);
    if b1.lo > second_init.0 {
        let probe = second(b1.lo);
        if let Verdict::Certified { steps } = probe {
            return Enclosure { m_used: e1.m_used.max(steps), ..e1 };
        }
    }
    let b2 = bracket_threshold(&mut second, second_init.0, second_init.1.max(second_init.0), cap, scale);
    combine_max(e1, Enclosure::from_bracket(b2))
}

/// `ω` for two points of the open ball via bounded-real thresholds.
fn omega_open(a: &OperatorTuple, b: &OperatorTuple, opts: &MetricOptions) -> Result<Enclosure> {
    let (a, b) = ordered(a, b);
    let s1 = ratio_system(a, b)?;
    let s2 = ratio_system(b, a)?;
    // ‖C_X‖ ≤ ‖Δ_X‖/(1 - ‖X‖) and ‖C_X^{-1}‖ ≤ (1 + ‖X‖)‖Δ_X^{-1}‖.
    let bound = |x: &OperatorTuple, y: &OperatorTuple, sys: &Realization| -> Result<(f64, f64)> {
        let lo = op_norm(&sys.d).max(f64::MIN_POSITIVE);
        let hi = op_norm(&sys.c) / (1.0 - row_norm(x)) * (1.0 + row_norm(y)) * op_norm(&defect_inverse(y)?);
        Ok((lo, hi.max(lo) * (1.0 + 1e-12)))
    };
    let i1 = bound(a, b, &s1)?;
    let i2 = bound(b, a, &s2)?;
    let horizon = opts.m_max;
    let enc = max_of_thresholds(
        |g| test_dissipative(&s1, Supply::BoundedReal(g), horizon),
        i1,
        |g| test_dissipative(&s2, Supply::BoundedReal(g), horizon),
        i2,
        C_MAX.max(4.0 * i1.1.max(i2.1)),
        Scale::Logarithmic(opts.tol),
    );
    // ω ≥ 1 always.
    Ok(Enclosure { lower: enc.lower.max(1.0), upper: enc.upper.max(1.0), ..enc })
}

/// `ω` at `r = 1` through positive-real tests of `P(A) ≤ c² P(B)` and its
/// mirror; valid whenever both joint spectral radii are below one.
pub fn omega_positive_real(a: &OperatorTuple, b: &OperatorTuple, opts: &MetricOptions) -> Result<Enclosure> {
    a.check_same_shape(b)?;
    check_radius_below_one(a)?;
    check_radius_below_one(b)?;
    if a.bit_eq(b) {
        return Ok(Enclosure::exact(1.0));
    }
    let (a, b) = ordered(a, b);
    let horizon = opts.m_max;
    let test = |x: &OperatorTuple, y: &OperatorTuple, c: f64| {
        let c2 = c * c;
        // Re(c² F_Y - F_X) ≥ 0 with F = I/2 + K.
        let sys = kernel_pair_system(x, y, -1.0, c2, 0.5 * (c2 - 1.0));
        test_dissipative(&sys, Supply::PositiveReal, horizon)
    };
    let enc = max_of_thresholds(
        |c| test(a, b, c),
        (1.0, 2.0),
        |c| test(b, a, c),
        (1.0, 2.0),
        C_MAX,
        Scale::Logarithmic(opts.tol),
    );
    Ok(enc)
}

/// Lower bounds `ω(rA, rB)` on a radial grid, with an extrapolation of the
/// trend towards `r = 1` reported separately.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialOmega {
    pub enclosure: Enclosure,
    pub grid: Vec<(f64, Enclosure)>,
    /// Grid values are nondecreasing in `r` (midpoints, slack `tol`).
    pub monotone: bool,
    /// Aitken Δ² extrapolation of the last three grid midpoints; a heuristic,
    /// not part of the enclosure.
    pub extrapolated: Option<f64>,
}

/// Radial path for tuples with row norm one and joint spectral radius < 1.
pub fn omega_radial(a: &OperatorTuple, b: &OperatorTuple, opts: &MetricOptions) -> Result<RadialOmega> {
    a.check_same_shape(b)?;
    for x in [a, b] {
        check_radius_below_one(x)?;
    }
    let probe = HarnackOptions { r_grid: opts.r_grid.clone(), ..HarnackOptions::default() };
    if harnack_dominated(a, b, C_MAX, &probe)?.is_refuted() || harnack_dominated(b, a, C_MAX, &probe)?.is_refuted() {
        return Err(Error::NotComparable(format!("domination refuted at c = {C_MAX:e}")));
    }
    let mut grid = Vec::with_capacity(opts.r_grid.len());
    for &r in &opts.r_grid {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::BadInput(format!("grid radius {r} outside [0, 1)")));
        }
        grid.push((r, omega_open(&a.scale(r), &b.scale(r), opts)?));
    }
    let monotone = grid.windows(2).all(|w| w[1].1.mid() >= w[0].1.mid() - opts.tol);
    let extrapolated = match grid.as_slice() {
        [.., (_, x0), (_, x1), (_, x2)] => {
            let (x0, x1, x2) = (x0.mid(), x1.mid(), x2.mid());
            let denom = x2 - 2.0 * x1 + x0;
            (denom.abs() > f64::EPSILON).then(|| x2 - (x2 - x1).powi(2) / denom)
        }
        _ => None,
    };
    let grid_lower = grid.iter().fold(1.0f64, |acc, (_, e)| acc.max(e.lower));
    let at_one = omega_positive_real(a, b, opts)?;
    let lower = grid_lower.max(at_one.lower);
    let upper = at_one.upper;
    let converged = upper.is_finite() && (upper / lower).ln() <= opts.tol;
    let m_used = grid.iter().fold(at_one.m_used, |acc, (_, e)| acc.max(e.m_used));
    Ok(RadialOmega { enclosure: Enclosure { lower, upper, m_used, converged }, grid, monotone, extrapolated })
}

/// Enclosure of the Harnack gauge `ω(A, B)`.
pub fn omega(a: &OperatorTuple, b: &OperatorTuple, opts: &MetricOptions) -> Result<Enclosure> {
    a.check_same_shape(b)?;
    if a.bit_eq(b) {
        return Ok(Enclosure::exact(1.0));
    }
    let (ta, tb) = (classify(a).tag, classify(b).tag);
    match (ta, tb) {
        (MembershipTag::OpenBall, MembershipTag::OpenBall) => omega_open(a, b, opts),
        (MembershipTag::SpectralInterior, MembershipTag::SpectralInterior) => {
            Ok(omega_radial(a, b, opts)?.enclosure)
        }
        _ => Err(Error::NotComparable(format!("{ta:?} and {tb:?} lie in different Harnack parts"))),
    }
}

/// Enclosure of the hyperbolic distance `δ = ln ω`.
pub fn delta(a: &OperatorTuple, b: &OperatorTuple, opts: &MetricOptions) -> Result<Enclosure> {
    Ok(omega(a, b, opts)?.map_monotone(f64::ln))
}

/// `δ` for many pairs, scheduled by `exec`; results keep input order.
pub fn delta_many(
    pairs: &[(OperatorTuple, OperatorTuple)],
    opts: &MetricOptions,
    exec: Execution,
) -> Vec<Result<Enclosure>> {
    map_indexed(exec, pairs.len(), |i| delta(&pairs[i].0, &pairs[i].1, opts))
}

/// Enclosure of `d_H(A, B) = ‖P(A, R) - P(B, R)‖` as the larger of the
/// thresholds for `±(K + K*) ≤ γ`, `K = K_A - K_B`.
pub fn kernel_metric(a: &OperatorTuple, b: &OperatorTuple, opts: &MetricOptions) -> Result<Enclosure> {
    a.check_same_shape(b)?;
    check_radius_below_one(a)?;
    check_radius_below_one(b)?;
    if a.bit_eq(b) {
        return Ok(Enclosure::exact(0.0));
    }
    let (a, b) = ordered(a, b);
    let horizon = opts.m_max;
    let upper_side = |g: f64| {
        test_dissipative(&kernel_pair_system(a, b, -1.0, 1.0, 0.5 * g), Supply::PositiveReal, horizon)
    };
    let lower_side = |g: f64| {
        test_dissipative(&kernel_pair_system(a, b, 1.0, -1.0, 0.5 * g), Supply::PositiveReal, horizon)
    };
    Ok(max_of_thresholds(upper_side, (0.0, 1.0), lower_side, (0.0, 1.0), 1e12, Scale::Absolute(opts.tol)))
}

/// Enclosure of `‖P(X, R)‖ = λ_max(P(X, R))`.
pub fn kernel_norm(x: &OperatorTuple, opts: &MetricOptions) -> Result<Enclosure> {
    check_radius_below_one(x)?;
    let horizon = opts.m_max;
    // λ_max ≤ γ  ⟺  Re((γ - 1)/2 - K_X) ≥ 0; ⟨P e_∅, e_∅⟩ = 1 gives γ ≥ 1.
    let b = bracket_threshold(
        |g| test_dissipative(&kernel_system(x, -1.0, 0.5 * (g - 1.0)), Supply::PositiveReal, horizon),
        1.0,
        2.0,
        1e12,
        Scale::Logarithmic(opts.tol),
    );
    Ok(Enclosure::from_bracket(b))
}

/// Enclosure of `‖P(X, R)^{-1}‖ = 1/λ_min(P(X, R))`; the upper end is `+inf`
/// when `P(X, R)` is not certified invertible.
pub fn kernel_inverse_norm(x: &OperatorTuple, opts: &MetricOptions) -> Result<Enclosure> {
    check_radius_below_one(x)?;
    let horizon = opts.m_max;
    // λ_min ≥ 1/t  ⟺  Re((1 - 1/t)/2 + K_X) ≥ 0.
    let b = bracket_threshold(
        |t| test_dissipative(&kernel_system(x, 1.0, 0.5 * (1.0 - 1.0 / t)), Supply::PositiveReal, horizon),
        1.0,
        2.0,
        1e12,
        Scale::Logarithmic(opts.tol),
    );
    Ok(Enclosure::from_bracket(b))
}

/// `max(‖C_A C_B^{-1}‖, ‖C_B C_A^{-1}‖)` on words of length `≤ m`: a lower
/// bound on `ω(A, B)`, nondecreasing in `m`.
pub fn omega_corner(a: &OperatorTuple, b: &OperatorTuple, m: usize) -> Result<f64> {
    a.check_same_shape(b)?;
    let (ca, cb) = (kernel_factor(a, m)?, kernel_factor(b, m)?);
    let (ia, ib) = (kernel_factor_inverse(a, m)?, kernel_factor_inverse(b, m)?);
    Ok(op_norm(&(ca.matrix() * ib.matrix())).max(op_norm(&(cb.matrix() * ia.matrix()))).max(1.0))
}

/// `‖P(A) - P(B)‖` on words of length `≤ m`: a lower bound on `d_H`.
pub fn kernel_metric_corner(a: &OperatorTuple, b: &OperatorTuple, m: usize) -> Result<f64> {
    a.check_same_shape(b)?;
    check_radius_below_one(a)?;
    check_radius_below_one(b)?;
    let (pa, pb) = kernel_pair(a, b, m, 1.0)?;
    Ok(op_norm(&(&pa - &pb)))
}

/// A positive free pluriharmonic polynomial `u(X) = (I ⊗ V)* P(X, R^(m)) (I ⊗ V)`
/// of degree `≤ m`, with `V` an isometry into `Fock_m` and `u(0) = I`.
#[derive(Clone, Debug)]
pub struct PluriharmonicSample {
    space: TruncatedFock,
    v: ComplexMatrix,
}

impl PluriharmonicSample {
    pub fn out_dim(&self) -> usize {
        self.v.cols()
    }

    pub fn isometry(&self) -> &ComplexMatrix {
        &self.v
    }

    /// `u(rX)`, a `d·out_dim` square matrix.
    pub fn eval(&self, x: &OperatorTuple, r: f64) -> Result<ComplexMatrix> {
        if x.n() != self.space.n() {
            return Err(Error::ArityMismatch { expected: self.space.n(), found: x.n() });
        }
        let p = poisson_from_series(&kernel_series(x, &self.space, r));
        let lift = kron(&ComplexMatrix::identity(x.d()), &self.v);
        Ok((&(&lift.adjoint() * &p) * &lift).hermitian_part())
    }
}

pub fn sample_positive_pluriharmonic(n: usize, m: usize, out_dim: usize, seed: u64) -> Result<PluriharmonicSample> {
    let space = TruncatedFock::new(n, m)?;
    if out_dim == 0 || out_dim > space.dim() {
        return Err(Error::BadDim(format!("out_dim {out_dim} must lie in 1..={}", space.dim())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(space.dim(), out_dim, &mut rng);
    let q = g.into_na().qr().q();
    Ok(PluriharmonicSample { space, v: ComplexMatrix::from_na(q) })
}

/// Sampler truncation: the deepest level whose Fock space has at most 64 words.
fn sampler_level(n: usize) -> usize {
    if n == 1 {
        return 12;
    }
    let mut m = 0;
    while TruncatedFock::new(n, m + 1).map(|s| s.dim() <= 64).unwrap_or(false) {
        m += 1;
    }
    m
}

/// `½ max |ln λ|` over the pencil `u(A) v = λ u(B) v` for sampled positive
/// pluriharmonic `u`; never exceeds `δ(A, B)`.
pub fn delta_lower_bound_sample(a: &OperatorTuple, b: &OperatorTuple, trials: usize, seed: u64) -> Result<f64> {
    a.check_same_shape(b)?;
    if a.bit_eq(b) {
        return Ok(0.0);
    }
    for x in [a, b] {
        defect_inverse(x).map_err(|_| Error::NotStrict(row_norm(x)))?;
    }
    let m = sampler_level(a.n());
    let dim = TruncatedFock::new(a.n(), m)?.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let out_dim = rng.random_range(1..=dim.min(8));
        let u = sample_positive_pluriharmonic(a.n(), m, out_dim, rng.random())?;
        let (ua, ub) = (u.eval(a, 1.0)?, u.eval(b, 1.0)?);
        let Some(l) = cholesky_lower(ub.as_na()) else { continue };
        let l_inv = ComplexMatrix::from_na(
            l.solve_lower_triangular(&nalgebra::DMatrix::identity(l.nrows(), l.nrows())).expect("positive diagonal"),
        );
        let pencil = &(&l_inv * &ua) * &l_inv.adjoint();
        for lambda in herm_eigenvalues(&pencil.hermitian_part())? {
            if lambda > 0.0 {
                best = best.max(0.5 * lambda.ln().abs());
            }
        }
    }
    Ok(best)
}

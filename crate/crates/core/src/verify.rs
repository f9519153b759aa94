//! Seeded property suites, one per module, for batch verification.
//!
//! Every trial derives its own seed from `(seed, property, trial)`, so a run
//! is reproducible bit for bit whatever the scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automorphisms::{poincare_bergman, psi_lambda, random_automorphism, random_unitary};
use crate::error::Error;
use crate::fock::{reversal_permutation, TruncatedFock};
use crate::freeholo::{normalize_certified, random_map, schwarz_pick_check, sup_norm_estimate, FreePolyMap, SP_TOL};
use crate::kernels::{kernel_factor, kernel_factor_inverse, poisson_kernel, reconstruction};
use crate::linalg::{herm_eig, kron, op_norm, psd_sqrt, spectral_apply, spectrum_within, ComplexMatrix};
use crate::metrics::{delta, kernel_inverse_norm, kernel_metric, kernel_norm, omega, Enclosure, MetricOptions};
use crate::parallel::{map_indexed, Execution};
use crate::tuples::{
    classify, defect, gaussian_matrix, joint_spectral_radius, random_tuple, row_norm, MembershipTag, OperatorTuple,
    JSR_KMAX, JSR_TOL,
};

type Check = fn(u64) -> std::result::Result<(), String>;

/// A named randomized check.
#[derive(Clone, Copy)]
pub struct Property {
    pub suite: &'static str,
    pub name: &'static str,
    check: Check,
}

impl std::fmt::Debug for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}::{}", self.suite, self.name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Trial seed and message of the first failing trial.
    pub first_failure: Option<(u64, String)>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub const SUITES: [&str; 7] = ["linalg", "fock", "tuples", "kernels", "metrics", "automorphisms", "freeholo"];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn trial_seed(seed: u64, property: usize, trial: usize) -> u64 {
    mix(mix(seed ^ ((property as u64) << 40)) ^ trial as u64)
}

fn opts() -> MetricOptions {
    MetricOptions::default()
}

/// Open-ball tuple with `n = d = 2` and row norm in `[0.05, max]`.
fn ball_tuple(r: &mut ChaCha8Rng, max: f64) -> OperatorTuple {
    let t = r.random_range(0.05..max);
    random_tuple(2, 2, t, r.random()).expect("valid target")
}

// linalg

fn submultiplicative(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b) = (gaussian_matrix(4, 3, &mut r), gaussian_matrix(3, 5, &mut r));
    let (na, nb) = (op_norm(&a), op_norm(&b));
    let nab = op_norm(&(&a * &b));
    ensure(nab <= na * nb + 1e-12 * (1.0 + na * nb), || format!("‖AB‖ = {nab} > {}", na * nb))
}

fn psd_sqrt_squares_back(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let g = gaussian_matrix(4, 2, &mut r);
    let m = &g * &g.adjoint();
    let s = psd_sqrt(&m).map_err(err)?;
    let e = (&s * &s).max_abs_diff(&m);
    ensure(e <= 1e-10 * op_norm(&m).max(1.0), || format!("‖√M² - M‖ = {e}"))
}

fn kron_norm_multiplies(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b) = (gaussian_matrix(3, 2, &mut r), gaussian_matrix(2, 4, &mut r));
    let (lhs, rhs) = (op_norm(&kron(&a, &b)), op_norm(&a) * op_norm(&b));
    ensure((lhs - rhs).abs() <= 1e-10 * rhs, || format!("{lhs} vs {rhs}"))
}

fn herm_eig_reconstructs(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let g = gaussian_matrix(5, 5, &mut r);
    let m = (&g + &g.adjoint()).scale(0.5);
    let eig = herm_eig(&m).map_err(err)?;
    let e = spectral_apply(&eig.vectors, &eig.values).max_abs_diff(&m);
    ensure(e <= 1e-10 * op_norm(&m), || format!("reconstruction error {e}"))
}

// fock

fn small_space(seed: u64) -> TruncatedFock {
    let mut r = rng(seed);
    TruncatedFock::new(r.random_range(1..=3), r.random_range(1..=4)).expect("small space")
}

fn creation_isometries(seed: u64) -> std::result::Result<(), String> {
    let s = small_space(seed);
    let below = s.level_range(s.m()).start;
    for i in 1..=s.n() {
        let ri = s.right_creation(i).map_err(err)?;
        for j in 1..=s.n() {
            let g = &ri.adjoint() * &s.right_creation(j).map_err(err)?;
            let want = ComplexMatrix::from_fn(s.dim(), s.dim(), |a, b| {
                Complex64::new(if i == j && a == b && a < below { 1.0 } else { 0.0 }, 0.0)
            });
            ensure(g == want, || format!("R_{i}* R_{j} differs from the truncated identity"))?;
        }
    }
    Ok(())
}

fn creation_row_contraction(seed: u64) -> std::result::Result<(), String> {
    let s = small_space(seed);
    let mut sum = ComplexMatrix::zeros(s.dim(), s.dim());
    for i in 1..=s.n() {
        let ri = s.right_creation(i).map_err(err)?;
        sum += &(&ri * &ri.adjoint());
    }
    let ok = (0..s.dim()).all(|a| {
        (0..s.dim()).all(|b| {
            let v = sum.get(a, b);
            v.im == 0.0 && (v.re == 0.0 || (a == b && v.re == 1.0))
        })
    });
    ensure(ok, || "Σ R_i R_i* is not a 0/1 diagonal projection".into())
}

fn creation_nilpotent(seed: u64) -> std::result::Result<(), String> {
    let s = small_space(seed);
    for i in 1..=s.n() {
        let p = s.right_creation(i).map_err(err)?.pow(s.m() as u32 + 1);
        ensure(p.max_abs() == 0.0, || format!("R_{i}^(m+1) ≠ 0"))?;
    }
    Ok(())
}

fn left_is_reversed_right(seed: u64) -> std::result::Result<(), String> {
    let s = small_space(seed);
    let pi = reversal_permutation(&s);
    for i in 1..=s.n() {
        let conj = &(&pi * &s.right_creation(i).map_err(err)?) * &pi.adjoint();
        ensure(conj == s.left_creation(i).map_err(err)?, || format!("S_{i} ≠ Π R_{i} Π⁻¹"))?;
    }
    Ok(())
}

// tuples

fn closed_ball_tuple(seed: u64) -> OperatorTuple {
    let mut r = rng(seed);
    let (n, d) = (r.random_range(1..=3), r.random_range(1..=3));
    random_tuple(n, d, r.random_range(0.05..0.999), r.random()).expect("valid target")
}

fn jsr_below_row_norm(seed: u64) -> std::result::Result<(), String> {
    let x = closed_ball_tuple(seed);
    let (rho, rn) = (joint_spectral_radius(&x, JSR_KMAX).estimate, row_norm(&x));
    ensure(rho <= rn + JSR_TOL, || format!("r(X) = {rho} > ‖X‖ = {rn}"))
}

fn jsr_unitary_invariant(seed: u64) -> std::result::Result<(), String> {
    let x = closed_ball_tuple(seed);
    let v = random_unitary(x.d(), mix(seed));
    let (a, b) = (joint_spectral_radius(&x, JSR_KMAX).estimate, joint_spectral_radius(&x.conjugate(&v), JSR_KMAX).estimate);
    ensure((a - b).abs() <= JSR_TOL, || format!("{a} vs {b}"))
}

fn defect_identity(seed: u64) -> std::result::Result<(), String> {
    let x = closed_ball_tuple(seed);
    let dx = defect(&x).map_err(err)?;
    let e = (&(&dx * &dx) + &x.row_gram()).max_abs_diff(&ComplexMatrix::identity(x.d()));
    ensure(e <= 1e-10, || format!("Δ² + ΣXX* - I = {e}"))
}

fn classify_open_ball(seed: u64) -> std::result::Result<(), String> {
    let x = closed_ball_tuple(seed);
    let tag = classify(&x).tag;
    ensure(tag == MembershipTag::OpenBall, || format!("{tag:?}"))
}

// kernels

fn reconstruction_nilpotent(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let m = r.random_range(1..=3);
    let x = random_tuple(2, 2, 0.8, r.random()).map_err(err)?;
    let p = reconstruction(&x, m).map_err(err)?.into_matrix().pow(m as u32 + 1);
    ensure(p.max_abs() == 0.0, || "R_X^(m+1) ≠ 0".into())
}

fn poisson_corner_consistency(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let m = r.random_range(0..=3);
    let rad = r.random_range(0.0..1.0);
    let x = random_tuple(2, 2, 0.9, r.random()).map_err(err)?;
    let small = poisson_kernel(&x, m, rad).map_err(err)?;
    let big = poisson_kernel(&x, m + 1, rad).map_err(err)?;
    // Index (a, w) ↦ a·dim + w: the corner keeps w < dim_m inside each block.
    let (ds, db) = (small.rows() / x.d(), big.rows() / x.d());
    let pick = |i: usize| (i / ds) * db + i % ds;
    let corner = ComplexMatrix::from_fn(small.rows(), small.cols(), |i, j| big.get(pick(i), pick(j)));
    let e = corner.max_abs_diff(&small);
    ensure(e <= 1e-13, || format!("corner mismatch {e}"))
}

fn corner_products_increase(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b) = (ball_tuple(&mut r, 0.8), ball_tuple(&mut r, 0.8));
    let mut prev = 0.0;
    for m in 0..=4 {
        let v = op_norm(&(kernel_factor(&a, m).map_err(err)?.matrix() * kernel_factor_inverse(&b, m).map_err(err)?.matrix()));
        ensure(v >= prev - 1e-12, || format!("corner norm fell from {prev} to {v} at m = {m}"))?;
        prev = v;
    }
    Ok(())
}

fn harnack_band(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let x = random_tuple(2, 2, r.random_range(0.05..1.0), r.random()).map_err(err)?;
    for rad in [0.3, 0.6, 0.9] {
        let p = poisson_kernel(&x, 5, rad).map_err(err)?;
        let (lo, hi) = ((1.0 - rad) / (1.0 + rad), (1.0 + rad) / (1.0 - rad));
        ensure(spectrum_within(&p, lo - 1e-9, hi + 1e-9), || format!("spectrum leaves the band at r = {rad}"))?;
    }
    Ok(())
}

// metrics

fn delta_symmetric(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b) = (ball_tuple(&mut r, 0.7), ball_tuple(&mut r, 0.7));
    let (ab, ba) = (delta(&a, &b, &opts()).map_err(err)?, delta(&b, &a, &opts()).map_err(err)?);
    ensure((ab.mid() - ba.mid()).abs() <= 1e-9, || format!("{ab:?} vs {ba:?}"))
}

fn delta_triangle(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b, c) = (ball_tuple(&mut r, 0.7), ball_tuple(&mut r, 0.7), ball_tuple(&mut r, 0.7));
    let ac = delta(&a, &c, &opts()).map_err(err)?;
    let ab = delta(&a, &b, &opts()).map_err(err)?;
    let bc = delta(&b, &c, &opts()).map_err(err)?;
    ensure(ac.lower <= ab.upper + bc.upper + 1e-7, || format!("{} > {} + {}", ac.lower, ab.upper, bc.upper))
}

fn delta_separates(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b) = (ball_tuple(&mut r, 0.7), ball_tuple(&mut r, 0.7));
    ensure(delta(&a, &a, &opts()).map_err(err)? == Enclosure::exact(0.0), || "δ(A, A) ≠ 0".into())?;
    let dab = delta(&a, &b, &opts()).map_err(err)?;
    let gap = a.max_abs_diff(&b);
    ensure(gap <= 1e-8 || dab.lower > 0.0, || format!("‖A - B‖ = {gap} but δ lower end {}", dab.lower))
}

fn radial_monotone(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b) = (ball_tuple(&mut r, 0.9), ball_tuple(&mut r, 0.9));
    let (s, t) = {
        let s = r.random_range(0.1..0.9);
        (s, r.random_range(s..1.0))
    };
    let (ws, wt) = (omega(&a.scale(s), &b.scale(s), &opts()).map_err(err)?, omega(&a.scale(t), &b.scale(t), &opts()).map_err(err)?);
    ensure(ws.lower <= wt.upper, || format!("ω fell between r = {s} and r = {t}"))?;
    let (hs, ht) =
        (kernel_metric(&a.scale(s), &b.scale(s), &opts()).map_err(err)?, kernel_metric(&a.scale(t), &b.scale(t), &opts()).map_err(err)?);
    ensure(hs.lower <= ht.upper, || format!("d_H fell between r = {s} and r = {t}"))
}

fn delta_defect_bound(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (x, y) = (ball_tuple(&mut r, 0.9), ball_tuple(&mut r, 0.9));
    let d = delta(&x, &y, &opts()).map_err(err)?;
    let side = |t: &OperatorTuple| defect(t).map(|dt| op_norm(&dt) / (1.0 - row_norm(t)));
    let bound = (side(&x).map_err(err)? * side(&y).map_err(err)?).ln();
    ensure(d.lower <= bound + 1e-8, || format!("δ ≥ {} exceeds {bound}", d.lower))
}

fn delta_kernel_sandwich(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b) = (ball_tuple(&mut r, 0.7), ball_tuple(&mut r, 0.7));
    let s = sandwich(&a, &b, &opts()).map_err(err)?;
    ensure(s.lower_gap >= -1e-8 && s.upper_gap >= -1e-8, || format!("{s:?}"))
}

fn kernel_metric_two_sided(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b) = (ball_tuple(&mut r, 0.7), ball_tuple(&mut r, 0.7));
    let s = kernel_metric_bounds(&a, &b, &opts()).map_err(err)?;
    ensure(s.lower_gap >= -1e-8 && s.upper_gap >= -1e-8, || format!("{s:?}"))
}

fn scalar_oracle_inside(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (z, w) = (scalar_point(&mut r, 2, 0.8), scalar_point(&mut r, 2, 0.8));
    let d = delta(&OperatorTuple::scalar(&z), &OperatorTuple::scalar(&w), &opts()).map_err(err)?;
    let beta = poincare_bergman(&z, &w).map_err(err)?;
    ensure(d.contains(beta), || format!("{beta} outside {d:?}"))
}

// automorphisms

fn delta_invariant(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (a, b) = (ball_tuple(&mut r, 0.7), ball_tuple(&mut r, 0.7));
    let psi = random_automorphism(2, 0.5, r.random()).map_err(err)?;
    let before = delta(&a, &b, &opts()).map_err(err)?;
    let after = delta(&psi.apply(&a).map_err(err)?, &psi.apply(&b).map_err(err)?, &opts()).map_err(err)?;
    let gap = (after.mid() - before.mid()).abs();
    ensure(gap <= before.width() + after.width() + 1e-6, || format!("|Δδ| = {gap}"))
}

fn scalar_agreement(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let n = r.random_range(1..=3);
    let (z, w) = (scalar_point(&mut r, n, 0.9), scalar_point(&mut r, n, 0.9));
    let d = delta(&OperatorTuple::scalar(&z), &OperatorTuple::scalar(&w), &opts()).map_err(err)?;
    let beta = poincare_bergman(&z, &w).map_err(err)?;
    ensure((d.mid() - beta).abs() <= d.width().max(f64::EPSILON), || format!("{beta} vs {d:?}"))
}

fn mobius_keeps_ball(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let x = random_tuple(2, 2, r.random_range(0.05..0.999), r.random()).map_err(err)?;
    let lambda = scalar_point(&mut r, 2, 0.99);
    let y = psi_lambda(&lambda, &x).map_err(err)?;
    ensure(row_norm(&y) < 1.0, || format!("‖Ψ_λ(X)‖ = {}", row_norm(&y)))
}

// freeholo

fn schwarz_pick(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let f = normalize_certified(&random_map(2, 2, 1, 2, r.random()).map_err(err)?, 0.05, &opts()).map_err(err)?;
    let (x, y) = (ball_tuple(&mut r, 0.7), ball_tuple(&mut r, 0.7));
    let rep = schwarz_pick_check(&f, &x, &y, &opts()).map_err(err)?;
    ensure(rep.holds, || format!("{} > {} + {SP_TOL}", rep.lhs.lower, rep.rhs.upper))
}

fn identity_attains(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let (x, y) = (ball_tuple(&mut r, 0.7), ball_tuple(&mut r, 0.7));
    let rep = schwarz_pick_check(&FreePolyMap::identity(2), &x, &y, &opts()).map_err(err)?;
    ensure(rep.lhs == rep.rhs, || format!("{:?} vs {:?}", rep.lhs, rep.rhs))
}

fn precompose_consistent(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let f = random_map(2, 2, 2, 2, r.random()).map_err(err)?;
    let u = random_unitary(2, r.random());
    let x = random_tuple(2, 2, 0.8, r.random()).map_err(err)?;
    let lhs = f.precompose_unitary(&u).map_err(err)?.eval(&x).map_err(err)?;
    let rhs = f.eval(&crate::automorphisms::psi_unitary(&u, &x).map_err(err)?).map_err(err)?;
    let e = lhs.max_abs_diff(&rhs);
    ensure(e <= 1e-10, || format!("difference {e}"))
}

fn ladder_monotone(seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed);
    let f = random_map(2, 2, 1, 2, r.random()).map_err(err)?;
    let est = sup_norm_estimate(&f, 6).map_err(err)?;
    ensure(est.ladder.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-13), || format!("{:?}", est.ladder))
}

/// Uniform-radius point of the scalar ball with `‖z‖₂ ≤ max`.
pub fn scalar_point(r: &mut ChaCha8Rng, n: usize, max: f64) -> Vec<Complex64> {
    let dir = gaussian_matrix(1, n, r).to_row_major();
    let norm = dir.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let radius = max * r.random::<f64>();
    dir.iter().map(|c| c * (radius / norm)).collect()
}

/// Margins of `½ ln(1 + d_H / max‖P‖) ≤ δ ≤ ½ ln(1 + d_H · max‖P^{-1}‖)`,
/// each evaluated at the enclosure ends least favourable to a violation
/// report; a negative gap is a demonstrated violation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityGaps {
    pub lower_gap: f64,
    pub upper_gap: f64,
}

pub fn sandwich(a: &OperatorTuple, b: &OperatorTuple, opts: &MetricOptions) -> crate::Result<InequalityGaps> {
    let d = delta(a, b, opts)?;
    let dh = kernel_metric(a, b, opts)?;
    let (pa, pb) = (kernel_norm(a, opts)?, kernel_norm(b, opts)?);
    let (ia, ib) = (kernel_inverse_norm(a, opts)?, kernel_inverse_norm(b, opts)?);
    let left = 0.5 * (1.0 + dh.lower / pa.upper.max(pb.upper)).ln();
    let right = 0.5 * (1.0 + dh.upper * ia.upper.max(ib.upper)).ln();
    Ok(InequalityGaps { lower_gap: d.upper - left, upper_gap: right - d.lower })
}

/// Margins of `‖A - B‖ ≤ d_H ≤ 2‖A - B‖ / ((1 - ‖A‖)(1 - ‖B‖))`.
pub fn kernel_metric_bounds(a: &OperatorTuple, b: &OperatorTuple, opts: &MetricOptions) -> crate::Result<InequalityGaps> {
    let dh = kernel_metric(a, b, opts)?;
    let diff = row_norm(&a.sub(b)?);
    let right = 2.0 * diff / ((1.0 - row_norm(a)) * (1.0 - row_norm(b)));
    Ok(InequalityGaps { lower_gap: dh.upper - diff, upper_gap: right - dh.lower })
}

pub fn properties() -> Vec<Property> {
    let p = |suite, name, check| Property { suite, name, check };
    vec![
        p("linalg", "op_norm_submultiplicative", submultiplicative as Check),
        p("linalg", "psd_sqrt_squares_back", psd_sqrt_squares_back),
        p("linalg", "kron_norm_multiplies", kron_norm_multiplies),
        p("linalg", "herm_eig_reconstructs", herm_eig_reconstructs),
        p("fock", "creation_isometries", creation_isometries),
        p("fock", "creation_row_contraction", creation_row_contraction),
        p("fock", "creation_nilpotent", creation_nilpotent),
        p("fock", "left_is_reversed_right", left_is_reversed_right),
        p("tuples", "jsr_below_row_norm", jsr_below_row_norm),
        p("tuples", "jsr_unitary_invariant", jsr_unitary_invariant),
        p("tuples", "defect_identity", defect_identity),
        p("tuples", "classify_open_ball", classify_open_ball),
        p("kernels", "reconstruction_nilpotent", reconstruction_nilpotent),
        p("kernels", "poisson_corner_consistency", poisson_corner_consistency),
        p("kernels", "corner_products_increase", corner_products_increase),
        p("kernels", "harnack_band", harnack_band),
        p("metrics", "delta_symmetric", delta_symmetric),
        p("metrics", "delta_triangle", delta_triangle),
        p("metrics", "delta_separates", delta_separates),
        p("metrics", "radial_monotone", radial_monotone),
        p("metrics", "delta_defect_bound", delta_defect_bound),
        p("metrics", "delta_kernel_sandwich", delta_kernel_sandwich),
        p("metrics", "kernel_metric_two_sided", kernel_metric_two_sided),
        p("metrics", "scalar_oracle_inside", scalar_oracle_inside),
        p("automorphisms", "delta_invariant", delta_invariant),
        p("automorphisms", "scalar_agreement", scalar_agreement),
        p("automorphisms", "mobius_keeps_ball", mobius_keeps_ball),
        p("freeholo", "schwarz_pick", schwarz_pick),
        p("freeholo", "identity_attains", identity_attains),
        p("freeholo", "precompose_consistent", precompose_consistent),
        p("freeholo", "ladder_monotone", ladder_monotone),
    ]
}

/// Runs every property of `suite` (`"all"` for every suite) for `trials`
/// trials; `None` when the suite name is unknown.
pub fn run(suite: &str, seed: u64, trials: usize, exec: Execution) -> Option<Vec<PropertyOutcome>> {
    if suite != "all" && !SUITES.contains(&suite) {
        return None;
    }
    let outcomes = properties()
        .into_iter()
        .enumerate()
        .filter(|(_, p)| suite == "all" || p.suite == suite)
        .map(|(k, p)| {
            let results = map_indexed(exec, trials, |t| {
                let s = trial_seed(seed, k, t);
                (s, (p.check)(s))
            });
            let failures = results.iter().filter(|(_, r)| r.is_err()).count();
            let first_failure = results.into_iter().find_map(|(s, r)| r.err().map(|m| (s, m)));
            PropertyOutcome { suite: p.suite, name: p.name, trials, failures, first_failure }
        })
        .collect();
    Some(outcomes)
}

//! Dissipation inequalities for noncommutative state-space systems.
//!
//! A realization `(A_j, B_j, C, D)` describes the operator
//!
//! ```text
//! T = D ⊗ I + (C ⊗ I)(I - Σ A_j ⊗ R_j)^{-1} Σ B_j ⊗ R_j
//! ```
//!
//! on `C^p ⊗ F²(H_n)`, whose coefficient at the word `j_1 ... j_N` is
//! `C A_{j_1} ... A_{j_{N-1}} B_{j_N}`. For a Hermitian supply matrix `Q` on
//! `state ⊕ input`, the system is dissipative when some `H ≥ 0` satisfies
//!
//! ```text
//! Σ_j M_j* H M_j - Q ≤ diag(H, 0),   M_j = [A_j  B_j].
//! ```
//!
//! Two supplies are used: bounded real, `‖T‖ ≤ γ`, and positive real,
//! `Re T ≥ 0`. The smallest storage matrix is the limit of the value iteration
//! `H ← G11 - G12 G22^{-1} G21` started at `H = 0`, where `G` is the left-hand
//! side above. The iteration either
//!
//! * reaches a fixed point, which is then checked against the inequality
//!   directly (a certificate),
//! * finds `G22` not negative definite at step `k`, which happens exactly when
//!   the compression of the inequality to words of length `≤ k` already fails
//!   (a refutation), or
//! * runs out of budget.
//!
//! Close to the threshold the value iteration converges slowly, so at
//! steps `4^k` the current iterate seeds a Newton solve of the fixed
//! point equation. Newton's answer is only trusted after the same direct
//! check, so it can shorten a certificate but never create a false one.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{cholesky_lower, cholesky_solve, ComplexMatrix};

type CMat = DMatrix<Complex64>;

const CONVERGENCE_TOL: f64 = 1e-13;
const LMI_TOL: f64 = 1e-11;
const BLOWUP: f64 = 1e14;
const NEWTON_FIRST: usize = 16;
const NEWTON_ITERS: usize = 40;
/// Largest `nx²` for which the Newton polish is attempted.
const NEWTON_MAX_UNKNOWNS: usize = 1600;

/// State-space data; `A_j` is `nx x nx`, `B_j` is `nx x nu`, `C` is `ny x nx`,
/// `D` is `ny x nu`.
#[derive(Clone, Debug)]
pub struct Realization {
    pub a: Vec<ComplexMatrix>,
    pub b: Vec<ComplexMatrix>,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
}

impl Realization {
    pub fn state_dim(&self) -> usize {
        self.c.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.d.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.d.rows()
    }

    /// Coefficient of the word `letters` (1-based) in the transfer operator.
    pub fn coefficient(&self, letters: &[usize]) -> ComplexMatrix {
        let Some((&last, head)) = letters.split_last() else {
            return self.d.clone();
        };
        let mut acc = self.c.clone();
        for &j in head {
            acc = &acc * &self.a[j - 1];
        }
        &acc * &self.b[last - 1]
    }

    fn check_shapes(&self) {
        let (nx, nu, ny) = (self.state_dim(), self.input_dim(), self.output_dim());
        assert_eq!(self.a.len(), self.b.len(), "one A_j and one B_j per generator");
        assert!(self.a.iter().all(|a| a.rows() == nx && a.cols() == nx), "A_j must be nx x nx");
        assert!(self.b.iter().all(|b| b.rows() == nx && b.cols() == nu), "B_j must be nx x nu");
        assert_eq!(self.c.rows(), ny, "C and D must share output dimension");
    }
}

/// Which inequality to test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Supply {
    /// `‖T‖ ≤ γ`
    BoundedReal(f64),
    /// `Re T ≥ 0`; needs `ny == nu`.
    PositiveReal,
}

/// Outcome of one dissipativity test; `steps` counts value-iteration steps,
/// which equals the truncation level examined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified { steps: usize },
    Violated { steps: usize },
    Undecided { steps: usize },
}

impl Verdict {
    pub fn steps(self) -> usize {
        match self {
            Verdict::Certified { steps } | Verdict::Violated { steps } | Verdict::Undecided { steps } => steps,
        }
    }
}

fn supply_matrix(sys: &Realization, supply: Supply) -> CMat {
    let (nx, nu) = (sys.state_dim(), sys.input_dim());
    let c = sys.c.as_na();
    let d = sys.d.as_na();
    let mut q = CMat::zeros(nx + nu, nx + nu);
    match supply {
        Supply::BoundedReal(gamma) => {
            let cc = c.adjoint() * c;
            let cd = c.adjoint() * d;
            let dd = d.adjoint() * d;
            q.view_mut((0, 0), (nx, nx)).copy_from(&(-cc));
            q.view_mut((0, nx), (nx, nu)).copy_from(&(-&cd));
            q.view_mut((nx, 0), (nu, nx)).copy_from(&(-cd.adjoint()));
            let g2 = Complex64::new(gamma * gamma, 0.0);
            q.view_mut((nx, nx), (nu, nu)).copy_from(&(CMat::identity(nu, nu) * g2 - dd));
        }
        Supply::PositiveReal => {
            assert_eq!(sys.output_dim(), nu, "positive-real supply needs a square system");
            q.view_mut((0, nx), (nx, nu)).copy_from(&c.adjoint());
            q.view_mut((nx, 0), (nu, nx)).copy_from(c);
            q.view_mut((nx, nx), (nu, nu)).copy_from(&(d + d.adjoint()));
        }
    }
    symmetrize(&mut q);
    q
}

fn symmetrize(m: &mut CMat) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Reusable buffers for the value iteration.
struct Workspace {
    ms: Vec<CMat>,
    q: CMat,
    g: CMat,
    tmp: CMat,
    nx: usize,
    nu: usize,
}

impl Workspace {
    fn new(sys: &Realization, supply: Supply) -> Self {
        sys.check_shapes();
        let (nx, nu) = (sys.state_dim(), sys.input_dim());
        let ms = sys
            .a
            .iter()
            .zip(&sys.b)
            .map(|(a, b)| {
                let mut m = CMat::zeros(nx, nx + nu);
                m.view_mut((0, 0), (nx, nx)).copy_from(a.as_na());
                m.view_mut((0, nx), (nx, nu)).copy_from(b.as_na());
                m
            })
            .collect();
        Workspace {
            ms,
            q: supply_matrix(sys, supply),
            g: CMat::zeros(nx + nu, nx + nu),
            tmp: CMat::zeros(nx, nx + nu),
            nx,
            nu,
        }
    }

    /// `g = Σ M_j* H M_j - Q`
    fn assemble(&mut self, h: &CMat) {
        let one = Complex64::new(1.0, 0.0);
        self.g.copy_from(&self.q);
        self.g.neg_mut();
        for m in &self.ms {
            self.tmp.gemm(one, h, m, Complex64::new(0.0, 0.0));
            self.g.gemm_ad(one, m, &self.tmp, one);
        }
        symmetrize(&mut self.g);
    }
}

/// Runs the value iteration for at most `horizon` steps.
pub fn test_dissipative(sys: &Realization, supply: Supply, horizon: usize) -> Verdict {
    let mut ws = Workspace::new(sys, supply);
    let nx = ws.nx;
    let mut h = CMat::zeros(nx, nx);
    for step in 0..=horizon {
        let Some((next, _)) = riccati_step(&mut ws, &h) else {
            return Verdict::Violated { steps: step };
        };
        let size = max_abs(&next);
        if !size.is_finite() || size > BLOWUP {
            return Verdict::Undecided { steps: step };
        }
        let change = max_abs(&(&next - &h));
        h = next;
        if change <= CONVERGENCE_TOL * (1.0 + size) {
            return if lmi_holds(&mut ws, &h) {
                Verdict::Certified { steps: step }
            } else {
                Verdict::Undecided { steps: step }
            };
        }
        if step >= NEWTON_FIRST && step.is_power_of_two() && step.trailing_zeros() % 2 == 0 && nx * nx <= NEWTON_MAX_UNKNOWNS {
            if let Some(fixed) = newton_polish(&mut ws, &h) {
                if lmi_holds(&mut ws, &fixed) {
                    return Verdict::Certified { steps: step };
                }
            }
        }
    }
    Verdict::Undecided { steps: horizon }
}

/// One Riccati step `H ↦ G11 + G12 (-G22)^{-1} G21` together with the
/// feedback `K = (-G22)^{-1} G21`; `None` when `-G22` is not positive definite.
fn riccati_step(ws: &mut Workspace, h: &CMat) -> Option<(CMat, CMat)> {
    let (nx, nu) = (ws.nx, ws.nu);
    ws.assemble(h);
    let neg_g22 = -ws.g.view((nx, nx), (nu, nu)).into_owned();
    let chol = cholesky_lower(&neg_g22)?;
    let g12 = ws.g.view((0, nx), (nx, nu)).into_owned();
    let k = cholesky_solve(&chol, &g12.adjoint());
    let mut next = ws.g.view((0, 0), (nx, nx)) + &g12 * &k;
    symmetrize(&mut next);
    Some((next, k))
}

/// Newton iteration for `H = F(H)`. The derivative of `F` is the closed-loop
/// Stein map `E ↦ Σ (A_j + B_j K)* E (A_j + B_j K)`.
fn newton_polish(ws: &mut Workspace, start: &CMat) -> Option<CMat> {
    let nx = ws.nx;
    let one = Complex64::new(1.0, 0.0);
    let mut h = start.clone();
    let mut last = f64::INFINITY;
    for _ in 0..NEWTON_ITERS {
        let (fh, k) = riccati_step(ws, &h)?;
        let residual = &fh - &h;
        let size = max_abs(&fh);
        if !size.is_finite() || size > BLOWUP {
            return None;
        }
        let res = max_abs(&residual);
        if res <= CONVERGENCE_TOL * (1.0 + size) {
            return Some(fh);
        }
        // Converging Newton at least halves the residual.
        if res > 0.75 * last {
            return None;
        }
        last = res;
        // vec(X* E X) = (X^T ⊗ X*) vec(E), column-major.
        let mut lhs = CMat::identity(nx * nx, nx * nx);
        for m in &ws.ms {
            let closed = m.view((0, 0), (nx, nx)) + m.view((0, nx), (nx, ws.nu)) * &k;
            lhs -= closed.transpose().kronecker(&closed.adjoint());
        }
        let rhs = CMat::from_column_slice(nx * nx, 1, residual.as_slice());
        let step = lhs.lu().solve(&rhs)?;
        let mut next = &h + CMat::from_column_slice(nx, nx, step.as_slice()) * one;
        symmetrize(&mut next);
        h = next;
    }
    None
}

/// Direct check of `G(H) - diag(H, 0) ≤ 0` and `H ≥ 0` up to roundoff.
fn lmi_holds(ws: &mut Workspace, h: &CMat) -> bool {
    ws.assemble(h);
    let nx = ws.nx;
    let mut l = ws.g.clone();
    let mut sub = l.view_mut((0, 0), (nx, nx));
    sub -= h;
    symmetrize(&mut l);
    let scale = 1.0 + max_abs(&ws.g).max(max_abs(h));
    let top = l.symmetric_eigenvalues().max();
    if top > LMI_TOL * scale {
        return false;
    }
    nx == 0 || h.clone().symmetric_eigenvalues().min() >= -LMI_TOL * scale
}

/// Two-sided bracket on the threshold of a monotone family of tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    /// Largest parameter known to be at or below the threshold.
    pub lo: f64,
    /// Smallest certified parameter; `+inf` when none was found.
    pub hi: f64,
    /// Largest number of value-iteration steps used by any test.
    pub steps: usize,
    /// True when the stopping rule was met; false when undecided tests stalled
    /// the search or no certificate was found below `cap`.
    pub converged: bool,
}

/// How the bisection measures and splits the bracket.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scale {
    /// Stop when `hi - lo ≤ tol`; split at the arithmetic mean.
    Absolute(f64),
    /// Stop when `ln(hi / lo) ≤ tol`; split at the geometric mean (`lo > 0`).
    Logarithmic(f64),
}

impl Scale {
    fn done(self, lo: f64, hi: f64) -> bool {
        match self {
            Scale::Absolute(tol) => hi - lo <= tol,
            Scale::Logarithmic(tol) => (hi / lo).ln() <= tol,
        }
    }

    fn split(self, lo: f64, hi: f64) -> f64 {
        match self {
            Scale::Absolute(_) => 0.5 * (lo + hi),
            Scale::Logarithmic(_) => (lo * hi).sqrt(),
        }
    }
}

/// Finds the threshold of `test`, which must be monotone: certified at `t`
/// implies certified at every `t' > t`.
///
/// `lo` must be known not to exceed the threshold. The upper end starts at
/// `hi` and doubles (while violated or undecided) up to `cap`.
pub fn bracket_threshold(
    mut test: impl FnMut(f64) -> Verdict,
    lo: f64,
    hi: f64,
    cap: f64,
    scale: Scale,
) -> Bracket {
    let mut lo = lo;
    let mut hi = hi.max(lo);
    let mut steps = 0;
    loop {
        let v = test(hi);
        steps = steps.max(v.steps());
        match v {
            Verdict::Certified { .. } => break,
            Verdict::Violated { .. } => lo = lo.max(hi),
            Verdict::Undecided { .. } => {}
        }
        if hi >= cap {
            return Bracket { lo, hi: f64::INFINITY, steps, converged: false };
        }
        hi = (2.0 * hi).max(f64::MIN_POSITIVE).min(cap);
    }
    let mut converged = true;
    while !scale.done(lo, hi) {
        let mid = scale.split(lo, hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let v = test(mid);
        steps = steps.max(v.steps());
        match v {
            Verdict::Certified { .. } => hi = mid,
            Verdict::Violated { .. } => lo = mid,
            Verdict::Undecided { .. } => {
                // The threshold is probably very close to `mid`; probe both halves.
                let upper = scale.split(mid, hi);
                let lower = scale.split(lo, mid);
                let mut moved = false;
                let vu = test(upper);
                steps = steps.max(vu.steps());
                match vu {
                    Verdict::Certified { .. } => {
                        hi = upper;
                        moved = true;
                    }
                    Verdict::Violated { .. } => {
                        lo = upper;
                        moved = true;
                    }
                    Verdict::Undecided { .. } => {}
                }
                if lo < mid {
                    let vl = test(lower);
                    steps = steps.max(vl.steps());
                    match vl {
                        Verdict::Certified { .. } => {
                            hi = hi.min(lower);
                            moved = true;
                        }
                        Verdict::Violated { .. } => {
                            lo = lo.max(lower);
                            moved = true;
                        }
                        Verdict::Undecided { .. } => {}
                    }
                }
                if !moved {
                    converged = false;
                    break;
                }
            }
        }
    }
    Bracket { lo, hi, steps, converged: converged && scale.done(lo, hi) }
}

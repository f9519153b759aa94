//! Free polynomial maps `F = (F_1, …, F_q)` with `e × e` matrix coefficients,
//! `F_j(X) = Σ_α X_α ⊗ A_(α,j)`, and the Schwarz–Pick comparison of `δ`
//! before and after applying a contractive map.
//!
//! `‖F‖_∞` is the row norm of `(F_1(S), …, F_q(S))` at the left creation
//! operators. Compressions to `Fock_m` give lower estimates, nondecreasing in
//! `m`; a bounded-real certificate on a realization of `F` gives the upper
//! bound that [`normalize_contractive`] relies on.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dissipation::{bracket_threshold, test_dissipative, Realization, Scale, Supply};
use crate::error::{Error, Result};
use crate::fock::{TruncatedFock, Word};
use crate::linalg::{herm_eigenvalues, kron, op_norm, ComplexMatrix};
use crate::metrics::{delta, Enclosure, MetricOptions};
use crate::tuples::{gaussian_matrix, OperatorTuple};

/// Slack allowed in `δ(F(X), F(Y)) ≤ δ(X, Y)`.
pub const SP_TOL: f64 = 1e-7;
/// Ladder entries closer than this count as stabilized.
pub const LADDER_TOL: f64 = 1e-6;
pub const DEFAULT_MARGIN: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct FreePolyMap {
    n_in: usize,
    q_out: usize,
    e: usize,
    /// Keyed by (0-based component, word); zero coefficients are dropped.
    coeffs: BTreeMap<(usize, Word), ComplexMatrix>,
}

impl FreePolyMap {
    /// Builds a map from `(component, word, coefficient)` terms; repeated
    /// keys are summed.
    pub fn new(n_in: usize, q_out: usize, e: usize, terms: Vec<(usize, Word, ComplexMatrix)>) -> Result<Self> {
        if n_in == 0 || q_out == 0 || e == 0 {
            return Err(Error::BadDim(format!("n_in={n_in}, q_out={q_out}, e={e}")));
        }
        let mut coeffs: BTreeMap<(usize, Word), ComplexMatrix> = BTreeMap::new();
        for (j, w, a) in terms {
            if j >= q_out {
                return Err(Error::BadDim(format!("component {j} with q_out={q_out}")));
            }
            if let Some(&index) = w.letters().iter().find(|&&l| l == 0 || l > n_in) {
                return Err(Error::BadGenerator { index, n: n_in });
            }
            if a.rows() != e || a.cols() != e {
                return Err(Error::DimensionMismatch(format!("coefficient {}x{} with e={e}", a.rows(), a.cols())));
            }
            if !a.is_finite() {
                return Err(Error::BadInput("non-finite coefficient".into()));
            }
            let slot = coeffs.entry((j, w)).or_insert_with(|| ComplexMatrix::zeros(e, e));
            *slot += &a;
        }
        coeffs.retain(|_, a| a.max_abs() > 0.0);
        Ok(FreePolyMap { n_in, q_out, e, coeffs })
    }

    /// `X ↦ X`.
    pub fn identity(n: usize) -> Self {
        let terms = (0..n).map(|j| (j, Word::new(vec![j + 1]), ComplexMatrix::identity(1))).collect();
        Self::new(n, n, 1, terms).expect("valid identity")
    }

    /// `X ↦ X_i` (1-based `i`).
    pub fn coordinate(n: usize, i: usize) -> Result<Self> {
        Self::new(n, 1, 1, vec![(0, Word::new(vec![i]), ComplexMatrix::identity(1))])
    }

    /// Constant map with scalar components `values`.
    pub fn constant(n_in: usize, values: &[Complex64]) -> Result<Self> {
        let terms = values.iter().enumerate().map(|(j, &v)| (j, Word::empty(), ComplexMatrix::scalar(v))).collect();
        Self::new(n_in, values.len(), 1, terms)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn q_out(&self) -> usize {
        self.q_out
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    /// `(component, word, coefficient)` in key order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Word, &ComplexMatrix)> {
        self.coeffs.iter().map(|((j, w), a)| (*j, w, a))
    }

    pub fn scale(&self, s: f64) -> Self {
        let terms = self.terms().map(|(j, w, a)| (j, w.clone(), a.scale(s))).collect();
        Self::new(self.n_in, self.q_out, self.e, terms).expect("scaling keeps shapes")
    }

    /// Component `j` evaluated at `X`, a `d·e` square matrix.
    fn eval_component(&self, j: usize, x: &[ComplexMatrix]) -> ComplexMatrix {
        let d = x[0].rows();
        let mut acc = ComplexMatrix::zeros(d * self.e, d * self.e);
        for ((_, w), a) in self.coeffs.range((j, Word::empty())..).take_while(|((k, _), _)| *k == j) {
            let mut mono = ComplexMatrix::identity(d);
            for &l in w.letters() {
                mono = &mono * &x[l - 1];
            }
            acc += &kron(&mono, a);
        }
        acc
    }

    /// `F(X)`: component `j` is `Σ_α X_α ⊗ A_(α,j)`.
    pub fn eval(&self, x: &OperatorTuple) -> Result<OperatorTuple> {
        if x.n() != self.n_in {
            return Err(Error::ArityMismatch { expected: self.n_in, found: x.n() });
        }
        OperatorTuple::new((0..self.q_out).map(|j| self.eval_component(j, x.mats())).collect())
    }

    /// `X ↦ F(Ψ_U(X))` with `Ψ_U(X)_i = Σ_k U_ki X_k`: the coefficient of
    /// `X_β` collects `Π_l U_(β_l, α_l) A_(α,j)` over `|α| = |β|`.
    pub fn precompose_unitary(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.n_in || u.cols() != self.n_in {
            return Err(Error::ArityMismatch { expected: self.n_in, found: u.rows() });
        }
        let mut terms = Vec::new();
        for (j, alpha, a) in self.terms() {
            let k = alpha.len();
            let space = TruncatedFock::new(self.n_in, k)?;
            for beta in space.words().filter(|b| b.len() == k) {
                let weight: Complex64 =
                    beta.letters().iter().zip(alpha.letters()).map(|(&b, &al)| u.get(b - 1, al - 1)).product();
                terms.push((j, beta, a.scale_c(weight)));
            }
        }
        Self::new(self.n_in, self.q_out, self.e, terms)
    }

    /// Row operator `T_w = [A_(w,1) … A_(w,q)]`.
    fn row_coefficient(&self, w: &Word) -> ComplexMatrix {
        let e = self.e;
        let mut out = ComplexMatrix::zeros(e, self.q_out * e);
        for j in 0..self.q_out {
            if let Some(a) = self.coeffs.get(&(j, w.clone())) {
                for r in 0..e {
                    for c in 0..e {
                        out.set(r, j * e + c, a.get(r, c));
                    }
                }
            }
        }
        out
    }

    /// Realization of `T = Σ_w T_w ⊗ R_{j_1} ⋯ R_{j_N}` (`w = j_1 ⋯ j_N`).
    /// `R_{j_1} ⋯ R_{j_N}` appends `w̃`, so reversing basis words carries it to
    /// `S_w` and `T` is unitarily equivalent to the row `[F_1(S), …, F_q(S)]`. The state stores the input in one slot per
    /// nonempty word of length `≤ deg`; `B_j` loads slot `j`, `A_i` moves
    /// slot `v` to slot `iv` and `C` reads slot `v` through `T_v`.
    fn realization(&self) -> Result<Realization> {
        let (n, deg) = (self.n_in, self.degree());
        let nu = self.q_out * self.e;
        let slots = TruncatedFock::new(n, deg)?;
        let count = slots.dim() - 1;
        let nx = count * nu;
        let slot = |w: &Word| slots.word_index(w).map(|i| (i - 1) * nu);
        let mut a = vec![ComplexMatrix::zeros(nx, nx); n];
        let mut b = vec![ComplexMatrix::zeros(nx, nu); n];
        let mut c = ComplexMatrix::zeros(self.e, nx);
        let one = Complex64::new(1.0, 0.0);
        for v in slots.words().filter(|v| !v.is_empty()) {
            let src = slot(&v)?;
            let tv = self.row_coefficient(&v);
            for r in 0..self.e {
                for k in 0..nu {
                    c.set(r, src + k, tv.get(r, k));
                }
            }
            if v.len() < deg {
                for (i, ai) in a.iter_mut().enumerate() {
                    let dst = slot(&v.prepend(i + 1))?;
                    for k in 0..nu {
                        ai.set(dst + k, src + k, one);
                    }
                }
            }
        }
        if deg > 0 {
            for (j, bj) in b.iter_mut().enumerate() {
                let dst = slot(&Word::new(vec![j + 1]))?;
                for k in 0..nu {
                    bj.set(dst + k, k, one);
                }
            }
        }
        Ok(Realization { a, b, c, d: self.row_coefficient(&Word::empty()) })
    }
}

/// `‖(F_1(S^(m)), …, F_q(S^(m)))‖_row` at levels `m - 2, m - 1, m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupNormEstimate {
    pub value: f64,
    pub ladder: Vec<(usize, f64)>,
}

impl SupNormEstimate {
    pub fn stabilized(&self) -> bool {
        let first = self.ladder.first().map_or(self.value, |&(_, v)| v);
        self.value - first <= LADDER_TOL
    }
}

/// `Σ_j F_j(S^(m)) F_j(S^(m))*` assembled column by column: column `e_β ⊗ u`
/// of `F_j(S)` is `Σ_α e_(αβ) ⊗ A_(α,j) u`, truncated at length `m`.
fn creation_gram(f: &FreePolyMap, m: usize) -> Result<ComplexMatrix> {
    let space = TruncatedFock::new(f.n_in, m)?;
    let e = f.e;
    let mut gram = ComplexMatrix::zeros(space.dim() * e, space.dim() * e);
    let mut column: Vec<(usize, &ComplexMatrix)> = Vec::new();
    for j in 0..f.q_out {
        for beta in space.words() {
            column.clear();
            for ((k, alpha), a) in &f.coeffs {
                if *k == j && alpha.len() + beta.len() <= m {
                    let mut letters = alpha.letters().to_vec();
                    letters.extend_from_slice(beta.letters());
                    column.push((space.word_index(&Word::new(letters))?, a));
                }
            }
            // Block (r, s) of the Gram gains A_r A_s*.
            for &(r, ar) in &column {
                for &(t, at) in &column {
                    let block = ar * &at.adjoint();
                    for x in 0..e {
                        for y in 0..e {
                            let (i, k) = (r * e + x, t * e + y);
                            gram.set(i, k, gram.get(i, k) + block.get(x, y));
                        }
                    }
                }
            }
        }
    }
    Ok(gram)
}

fn compressed_row_norm(f: &FreePolyMap, m: usize) -> Result<f64> {
    let top = herm_eigenvalues(&creation_gram(f, m)?)?.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Lower estimate of `‖F‖_∞` from the compression to words of length `≤ m`.
pub fn sup_norm_estimate(f: &FreePolyMap, m: usize) -> Result<SupNormEstimate> {
    let ladder = (m.saturating_sub(2)..=m)
        .map(|k| compressed_row_norm(f, k).map(|v| (k, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SupNormEstimate { value: ladder.last().expect("nonempty ladder").1, ladder })
}

/// Enclosure of `‖F‖_∞`: the lower end is a compression value and the upper
/// end carries a bounded-real certificate.
pub fn sup_norm_bound(f: &FreePolyMap, opts: &MetricOptions) -> Result<Enclosure> {
    let deg = f.degree();
    let lo = compressed_row_norm(f, deg)?;
    if f.coeffs.is_empty() {
        return Ok(Enclosure::exact(0.0));
    }
    if deg == 0 {
        return Ok(Enclosure::exact(lo));
    }
    let sys = f.realization()?;
    let slots = TruncatedFock::new(f.n_in, deg)?;
    let triangle: f64 = slots.words().map(|w| op_norm(&f.row_coefficient(&w))).sum();
    let horizon = opts.m_max;
    let b = bracket_threshold(
        |g| test_dissipative(&sys, Supply::BoundedReal(g), horizon),
        lo,
        triangle.max(lo) * (1.0 + 1e-12),
        4.0 * triangle.max(lo) + 1.0,
        Scale::Logarithmic(opts.tol),
    );
    Ok(Enclosure { lower: b.lo, upper: b.hi, m_used: b.steps, converged: b.converged })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedMap {
    pub map: FreePolyMap,
    /// Estimate of the normalized map at the requested level.
    pub estimate: SupNormEstimate,
    /// Certified upper bound on `‖map‖_∞`.
    pub certified_bound: f64,
    /// Set unless `certified_bound ≤ 1`.
    pub unverified_contractivity: bool,
}

/// Rescales so that the level-`m` estimate equals `1 - margin`, then bounds
/// the result from above to decide whether it is provably contractive.
pub fn normalize_contractive(f: &FreePolyMap, m: usize, margin: f64, opts: &MetricOptions) -> Result<NormalizedMap> {
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::BadInput(format!("margin {margin} outside [0, 1)")));
    }
    let raw = sup_norm_estimate(f, m)?;
    if raw.value <= 0.0 {
        return Err(Error::ZeroMap);
    }
    let map = f.scale((1.0 - margin) / raw.value);
    let estimate = sup_norm_estimate(&map, m)?;
    let certified_bound = sup_norm_bound(&map, opts)?.upper;
    Ok(NormalizedMap { map, estimate, unverified_contractivity: !(certified_bound <= 1.0), certified_bound })
}

/// Rescales by the certified upper bound, so `‖result‖_∞ ≤ 1 - margin`.
pub fn normalize_certified(f: &FreePolyMap, margin: f64, opts: &MetricOptions) -> Result<FreePolyMap> {
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::BadInput(format!("margin {margin} outside [0, 1)")));
    }
    let bound = sup_norm_bound(f, opts)?.upper;
    if bound == 0.0 {
        return Err(Error::ZeroMap);
    }
    if !bound.is_finite() {
        return Err(Error::NoConvergence);
    }
    Ok(f.scale((1.0 - margin) / bound))
}

/// Gaussian coefficients on every word of length `≤ deg`.
pub fn random_map(n_in: usize, q_out: usize, e: usize, deg: usize, seed: u64) -> Result<FreePolyMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = TruncatedFock::new(n_in, deg)?;
    let mut terms = Vec::new();
    for j in 0..q_out {
        for w in space.words() {
            terms.push((j, w, gaussian_matrix(e, e, &mut rng)));
        }
    }
    FreePolyMap::new(n_in, q_out, e, terms)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchwarzPickReport {
    /// `δ(F(X), F(Y))`
    pub lhs: Enclosure,
    /// `δ(X, Y)`
    pub rhs: Enclosure,
    pub holds: bool,
}

/// Compares `δ(F(X), F(Y))` with `δ(X, Y)`; `holds` when
/// `lhs.lower ≤ rhs.upper + SP_TOL`.
pub fn schwarz_pick_check(
    f: &FreePolyMap,
    x: &OperatorTuple,
    y: &OperatorTuple,
    opts: &MetricOptions,
) -> Result<SchwarzPickReport> {
    let lhs = delta(&f.eval(x)?, &f.eval(y)?, opts)?;
    let rhs = delta(x, y, opts)?;
    Ok(SchwarzPickReport { lhs, rhs, holds: lhs.lower <= rhs.upper + SP_TOL })
}

//! n-th order coefficients of a simple singular value under a polynomial
//! perturbation family `A(x) = A0 + x A1 + ... + x^J AJ`.
//!
//! The coefficient `sigma_k^(n)` of `x^n` in the branch `sigma_k(x)` is
//! obtained from the eigenvalue expansion of the dilation
//! `T(x) = T0 + sum_j x^j Tj` at `+sigma_k`:
//!
//! ```text
//! sigma^(n) = sum_{p=1..n} (-1)^p / p
//!             sum_{nu_1 + .. + nu_p = n, nu_j >= 1}
//!             sum_{k_1 + .. + k_p = p - 1, k_j >= 0}
//!             tr[ T^(nu_1) S^(k_1) T^(nu_2) S^(k_2) ... T^(nu_p) S^(k_p) ]
//! ```
//!
//! with `S^(0) = -P` (`P = w w^T` the target projector) and `S^(k) = S_k^k`
//! the k-th power of the reduced resolvent. Every term contains at least
//! one `-P`, so each trace collapses to a single inner product
//! `<w, ... w>` evaluated as a chain of matrix-vector products.
//!
//! The terms with exactly one projector sum to the familiar chain
//! `(-1)^(p-1) <w, T^(nu_1) S T^(nu_2) S ... S T^(nu_p) w>`, reported per
//! composition as [`CompositionTerm::chain_term`]. For `n ≤ 2` that chain is
//! the whole coefficient; from `n = 3` on, the terms carrying higher powers
//! of `S` and extra projectors contribute as well.
//!
//! The Fréchet derivative along `dA` is `D^n sigma_k[dA, ..., dA] = n! sigma_k^(n)`
//! for the linear family `A + x dA`.

use crate::dilation::{apply_direction, BlockVector};
use crate::error::{Error, Result};
use crate::matrix::RealMatrix;
use crate::resolvent::{Branch, ReducedResolvent};
use crate::svd::{FullSvd, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};

/// Default cap on the expansion order; the number of compositions grows as
/// `2^(n-1)`.
pub const DEFAULT_MAX_ORDER: usize = 8;

/// `A(x) = base + sum_{j=1..J} x^j terms[j-1]`.
#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    base: RealMatrix,
    terms: Vec<RealMatrix>,
}

impl PerturbationFamily {
    pub fn new(base: RealMatrix, terms: Vec<RealMatrix>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument(
                "a perturbation family needs at least one term".into(),
            ));
        }
        if let Some(bad) = terms.iter().find(|t| t.shape() != base.shape()) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", base.rows(), base.cols()),
                found: format!("{}x{}", bad.rows(), bad.cols()),
            });
        }
        Ok(Self { base, terms })
    }

    /// `A + x dA`.
    pub fn linear(base: RealMatrix, direction: RealMatrix) -> Result<Self> {
        Self::new(base, vec![direction])
    }

    pub fn base(&self) -> &RealMatrix {
        &self.base
    }

    /// Truncation order `J`.
    pub fn order(&self) -> usize {
        self.terms.len()
    }

    /// `A^(j)` for `j ≥ 1`; `None` beyond the truncation order (a zero term).
    pub fn term(&self, j: usize) -> Option<&RealMatrix> {
        j.checked_sub(1).and_then(|i| self.terms.get(i))
    }

    /// `A(x)`.
    pub fn evaluate(&self, x: f64) -> Result<RealMatrix> {
        let mut out = self.base.clone();
        let mut xp = 1.0;
        for t in &self.terms {
            xp *= x;
            out = out.add_scaled(xp, t)?;
        }
        Ok(out)
    }
}

/// Ordered tuple of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    parts: Vec<usize>,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "invalid composition {parts:?}"
            )));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Sum of the parts.
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of parts.
    pub fn p(&self) -> usize {
        self.parts.len()
    }

    pub fn is_all_ones(&self) -> bool {
        self.parts.iter().all(|&x| x == 1)
    }
}

/// All `2^(n-1)` compositions of `n`, grouped by length and lexicographic
/// within a group.
pub fn enumerate_compositions(n: usize) -> Result<Vec<Composition>> {
    enumerate_compositions_up_to(n, DEFAULT_MAX_ORDER)
}

pub fn enumerate_compositions_up_to(n: usize, max_order: usize) -> Result<Vec<Composition>> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if n > max_order {
        return Err(Error::OrderTooLarge { n, max: max_order });
    }
    let mut out = Vec::with_capacity(1 << (n - 1));
    let mut current = Vec::with_capacity(n);
    collect_compositions(n, &mut current, &mut out);
    out.sort_by(|a, b| a.p().cmp(&b.p()).then_with(|| a.parts.cmp(&b.parts)));
    Ok(out)
}

fn collect_compositions(rest: usize, current: &mut Vec<usize>, out: &mut Vec<Composition>) {
    if rest == 0 {
        out.push(Composition {
            parts: current.clone(),
        });
        return;
    }
    for first in 1..=rest {
        current.push(first);
        collect_compositions(rest - first, current, out);
        current.pop();
    }
}

/// Weak compositions of `total` into `slots` nonnegative parts.
fn weak_compositions(slots: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(slots: usize, total: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=total {
            cur.push(a);
            rec(slots - 1, total - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(slots, total, &mut Vec::with_capacity(slots), &mut out);
    out
}

/// Signed contribution of one composition `(nu_1, ..., nu_p)`.
#[derive(Debug, Clone)]
pub struct CompositionTerm {
    pub composition: Composition,
    /// Sum over all resolvent-power distributions for this composition.
    pub contribution: f64,
    /// The single-projector part `(-1)^(p-1) <w, T S T ... S T w>`.
    pub chain_term: f64,
}

#[derive(Debug, Clone)]
pub struct ExpansionResult {
    pub k: usize,
    pub n: usize,
    /// `sigma_k^(n)`.
    pub sigma_n: f64,
    /// `n! * sigma_k^(n)`.
    pub frechet_n: f64,
    pub per_composition: Vec<CompositionTerm>,
}

impl ExpansionResult {
    /// Sum of the per-composition chain terms.
    pub fn chain_sum(&self) -> f64 {
        compensated_sum(self.per_composition.iter().map(|t| t.chain_term).collect())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExpansionConfig {
    pub gap_tol: f64,
    pub max_order: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            gap_tol: DEFAULT_GAP_TOL,
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

/// `sigma_k^(n)` for `family`, whose base must be the matrix decomposed in `svd`.
pub fn sigma_order_n(
    family: &PerturbationFamily,
    svd: &FullSvd,
    k: usize,
    n: usize,
) -> Result<ExpansionResult> {
    sigma_order_n_with(family, svd, k, n, &ExpansionConfig::default())
}

pub fn sigma_order_n_with(
    family: &PerturbationFamily,
    svd: &FullSvd,
    k: usize,
    n: usize,
    config: &ExpansionConfig,
) -> Result<ExpansionResult> {
    sigma_order_n_on_branch(family, svd, k, n, config, Branch::Positive)
}

/// Same expansion for the eigenvalue `-sigma_k` of the dilation.
#[doc(hidden)]
pub fn sigma_order_n_on_branch(
    family: &PerturbationFamily,
    svd: &FullSvd,
    k: usize,
    n: usize,
    config: &ExpansionConfig,
    branch: Branch,
) -> Result<ExpansionResult> {
    if family.base().shape() != (svd.rows(), svd.cols()) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", svd.rows(), svd.cols()),
            found: format!("{}x{}", family.base().rows(), family.base().cols()),
        });
    }
    let compositions = enumerate_compositions_up_to(n, config.max_order)?;
    let resolvent = ReducedResolvent::with_branch(svd, k, config.gap_tol, branch)?;
    let engine = ChainEngine {
        family,
        resolvent: &resolvent,
    };

    let per_composition: Vec<CompositionTerm> = compositions
        .into_iter()
        .map(|composition| {
            let (contribution, chain_term) = if composition
                .parts()
                .iter()
                .all(|&j| family.term(j).is_some())
            {
                (
                    engine.composition_total(&composition),
                    engine.chain_term(&composition),
                )
            } else {
                (0.0, 0.0)
            };
            CompositionTerm {
                composition,
                contribution,
                chain_term,
            }
        })
        .collect();

    let sigma_n = compensated_sum(per_composition.iter().map(|t| t.contribution).collect());
    Ok(ExpansionResult {
        k,
        n,
        sigma_n,
        frechet_n: factorial(n) * sigma_n,
        per_composition,
    })
}

/// `D^n sigma_k[dA, ..., dA]` at `a`, with default tolerances.
pub fn directional_derivative(
    a: &RealMatrix,
    direction: &RealMatrix,
    k: usize,
    n: usize,
) -> Result<f64> {
    let svd = FullSvd::new(a, DEFAULT_RANK_TOL)?;
    directional_derivative_with(&svd, a, direction, k, n, &ExpansionConfig::default())
}

/// As [`directional_derivative`], reusing a precomputed decomposition of `a`.
pub fn directional_derivative_with(
    svd: &FullSvd,
    a: &RealMatrix,
    direction: &RealMatrix,
    k: usize,
    n: usize,
    config: &ExpansionConfig,
) -> Result<f64> {
    let family = PerturbationFamily::linear(a.clone(), direction.clone())?;
    Ok(sigma_order_n_with(&family, svd, k, n, config)?.frechet_n)
}

struct ChainEngine<'a> {
    family: &'a PerturbationFamily,
    resolvent: &'a ReducedResolvent,
}

enum Factor {
    Term(usize),
    /// `S^k` for `k ≥ 1`, `-P` for `k = 0`.
    Resolvent(usize),
}

impl ChainEngine<'_> {
    fn apply_term(&self, j: usize, z: &BlockVector) -> BlockVector {
        let t = self
            .family
            .term(j)
            .expect("composition part within truncation order");
        apply_direction(t, z)
    }

    /// All trace terms belonging to `composition`, weighted by `(-1)^p / p`.
    fn composition_total(&self, composition: &Composition) -> f64 {
        let nu = composition.parts();
        let p = nu.len();
        let weight = if p.is_multiple_of(2) { 1.0 } else { -1.0 } / p as f64;
        let terms = weak_compositions(p, p - 1)
            .into_iter()
            .map(|powers| weight * self.trace(nu, &powers))
            .collect();
        compensated_sum(terms)
    }

    /// `tr[T^(nu_1) S^(k_1) ... T^(nu_p) S^(k_p)]`.
    fn trace(&self, nu: &[usize], powers: &[usize]) -> f64 {
        let p = nu.len();
        // Rotate cyclically so the product ends with a projector factor.
        let last_projector = powers
            .iter()
            .rposition(|&k| k == 0)
            .expect("at least one projector");
        let mut factors = Vec::with_capacity(2 * p - 1);
        for step in 1..p {
            let idx = (last_projector + step) % p;
            factors.push(Factor::Term(nu[idx]));
            factors.push(Factor::Resolvent(powers[idx]));
        }
        factors.push(Factor::Term(nu[last_projector]));

        // tr[F (-P)] = -<w, F w>
        let w = self.resolvent.target();
        let mut z = w.clone();
        for factor in factors.iter().rev() {
            z = match *factor {
                Factor::Term(j) => self.apply_term(j, &z),
                Factor::Resolvent(0) => w.scale(-w.dot(&z)),
                Factor::Resolvent(k) => self.resolvent.apply_power(&z, k),
            };
        }
        -w.dot(&z)
    }

    /// `(-1)^(p-1) <w, T^(nu_1) S T^(nu_2) ... S T^(nu_p) w>`.
    fn chain_term(&self, composition: &Composition) -> f64 {
        let nu = composition.parts();
        let w = self.resolvent.target();
        let mut z = self.apply_term(nu[nu.len() - 1], w);
        for &j in nu[..nu.len() - 1].iter().rev() {
            z = self.apply_term(j, &self.resolvent.apply(&z));
        }
        let sign = if nu.len() % 2 == 1 { 1.0 } else { -1.0 };
        sign * w.dot(&z)
    }
}

/// Neumaier summation after sorting by descending magnitude.
fn compensated_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

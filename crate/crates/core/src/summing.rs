//! Block images `T̂_B`, block values, and the summing-norm search.
//!
//! The summing norm is the supremum of the block value over all input
//! sequences in the unit balls of the classes `X₁, …, Xₙ`. It is searched over
//! sequences of length at most a truncation `k` and reported as a lower bound
//! attained at explicit witness sequences.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::Block;
use crate::error::{Error, Result};
use crate::multilinear::{contract_axis, sup_norm, MultiOperator};
use crate::rng;
use crate::seqnorms::{class_norm, nested_norm, ClassSpec, ClassStack, JaggedArray, JaggedNode, VecSequence};
use crate::spaces::{unit_ball_extreme_points, Estimate, FiniteLpSpace, Vector};

fn check_inputs(t: &MultiOperator, b: &Block, seqs: &[VecSequence]) -> Result<()> {
    let n = t.arity();
    if b.arity() != n || seqs.len() != n {
        return Err(Error::Shape(format!(
            "operator of arity {n}, block of arity {}, {} sequences",
            b.arity(),
            seqs.len()
        )));
    }
    for (k, s) in seqs.iter().enumerate() {
        if s.space != t.domains[k] {
            return Err(Error::Shape(format!("sequence {k} lives in {:?}, slot expects {:?}", s.space, t.domains[k])));
        }
        if s.len() > b.bounds()[k] {
            return Err(Error::Shape(format!(
                "sequence {k} has length {} beyond the block bound {}",
                s.len(),
                b.bounds()[k]
            )));
        }
    }
    Ok(())
}

/// `T̂_B` at the given sequences: branches over `j₁, …, j_{n-1}` (each up to
/// the block bound), leaves `[T(x_{j₁}, …, x_{jₙ}) : jₙ ∈ B^{j₁,…,j_{n-1}}]`.
/// Sequences shorter than the bound are zero padded.
pub fn block_image(t: &MultiOperator, b: &Block, seqs: &[VecSequence]) -> Result<JaggedArray> {
    check_inputs(t, b, seqs)?;
    let mut prefix = Vec::with_capacity(t.arity());
    let root = image_node(b, seqs, &t.coeffs, &t.shape(), &mut prefix)?;
    JaggedArray::new(t.codomain, t.arity(), root)
}

fn image_node(
    b: &Block,
    seqs: &[VecSequence],
    data: &[f64],
    dims: &[usize],
    prefix: &mut Vec<usize>,
) -> Result<JaggedNode> {
    let n = b.arity();
    let level = prefix.len();
    let contract = |j: usize| match seqs[level].get(j) {
        Some(x) => contract_axis(data, dims, 0, x),
        None => vec![0.0; dims[1..].iter().product()],
    };
    if level == n - 1 {
        let leaf = b.fiber(prefix)?.into_iter().map(contract).collect();
        return Ok(JaggedNode::Leaf(leaf));
    }
    let mut children = Vec::with_capacity(b.bounds()[level]);
    for j in 0..b.bounds()[level] {
        let next = contract(j);
        prefix.push(j);
        children.push(image_node(b, seqs, &next, &dims[1..], prefix)?);
        prefix.pop();
    }
    Ok(JaggedNode::Branch(children))
}

/// `‖T̂_B(seqs)‖` in `Y₁(⋯ Yₙ(F)⋯)`. `budget` and `seed` only matter for weak
/// innermost classes whose norm is not computed exactly.
pub fn block_value(
    t: &MultiOperator,
    b: &Block,
    stack: &ClassStack,
    seqs: &[VecSequence],
    budget: usize,
    seed: u64,
) -> Result<Estimate> {
    if stack.depth() != t.arity() {
        return Err(Error::DepthMismatch { expected: t.arity(), found: stack.depth() });
    }
    nested_norm(stack, &block_image(t, b, seqs)?, budget, seed)
}

/// Knobs of the summing-norm search beyond budget and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Run the vertex enumeration family when every input ball is a polytope.
    pub enumerate_vertices: bool,
    /// Largest number of vertex tuples enumerated per truncation rung.
    pub max_vertex_tuples: usize,
    /// Ascent starts for weak norms that have no exact evaluation.
    pub leaf_budget: usize,
    /// Number of step halvings in coordinate hill-climbing.
    pub climb_levels: usize,
    /// Sweeps over all coordinates per step size.
    pub climb_sweeps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { enumerate_vertices: true, max_vertex_tuples: 1 << 16, leaf_budget: 8, climb_levels: 4, climb_sweeps: 2 }
    }
}

/// A certified lower bound on the summing norm at truncation `truncation`.
///
/// `value` is the block value at `witness` (recomputable with
/// [`block_value`] using `leaf_budget` and `seed`). `exact` means that value
/// and the input-class norms of the witness were computed exactly, so the
/// witness lies in the product of unit balls. `attains_sup` means every
/// vertex tuple of those balls was enumerated; since the block value is
/// convex in each sequence the value is then the truncated supremum itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummingEstimate {
    pub value: f64,
    pub witness: Vec<VecSequence>,
    pub exact: bool,
    pub attains_sup: bool,
    pub budget: usize,
    pub seed: u64,
    pub truncation: usize,
    pub leaf_budget: usize,
}

#[derive(Debug, Clone)]
struct Candidate {
    value: f64,
    exact: bool,
    seqs: Vec<Vec<Vec<f64>>>,
}

impl Candidate {
    fn key(&self) -> impl Iterator<Item = f64> + '_ {
        self.seqs.iter().flat_map(|s| {
            std::iter::once(s.len() as f64).chain(s.iter().flat_map(|e| e.iter().copied()))
        })
    }

    /// Larger value first, then the lexicographically smaller encoding.
    fn cmp_rank(&self, other: &Candidate) -> Ordering {
        match self.value.total_cmp(&other.value) {
            Ordering::Equal => {
                for (a, b) in self.key().zip(other.key()) {
                    match b.total_cmp(&a) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
            ord => ord,
        }
    }
}

fn best_of(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.cmp_rank(&a) == Ordering::Greater { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

struct Problem<'a> {
    t: &'a MultiOperator,
    b: &'a Block,
    xspecs: &'a [ClassSpec],
    stack: &'a ClassStack,
    leaf_budget: usize,
    seed: u64,
}

impl Problem<'_> {
    fn sequences(&self, seqs: &[Vec<Vec<f64>>]) -> Vec<VecSequence> {
        seqs.iter()
            .zip(&self.t.domains)
            .map(|(e, s)| VecSequence { space: *s, entries: e.clone() })
            .collect()
    }

    fn evaluate(&self, seqs: Vec<Vec<Vec<f64>>>, inputs_exact: bool) -> Candidate {
        let est = block_value(self.t, self.b, self.stack, &self.sequences(&seqs), self.leaf_budget, self.seed)
            .expect("inputs validated before the search");
        Candidate { value: est.value, exact: est.exact && inputs_exact, seqs }
    }

    /// Rescales a sequence to unit norm in its input class.
    fn normalize(&self, k: usize, entries: Vec<Vec<f64>>) -> Option<(Vec<Vec<f64>>, bool)> {
        let seq = VecSequence { space: self.t.domains[k], entries };
        let est = class_norm(self.xspecs[k], &seq, self.leaf_budget, self.seed);
        if !(est.value > 0.0) || !est.value.is_finite() {
            return None;
        }
        Some((seq.scaled(1.0 / est.value).entries, est.exact))
    }
}

/// Lower bound on `‖T‖_{B; X₁,…,Xₙ; Y₁,…,Yₙ}` over sequences of length at
/// most `k` in the unit balls of `xspecs`.
///
/// Three families are evaluated, for each length `ℓ = 1, …, k` in turn:
/// (i) the single-point sequences `x⁽ᵏ⁾·e_{j'_k}` at the witness of
/// [`sup_norm`] and a member `j'` of `B`, whose block value is `‖T(x)‖`;
/// (ii) when every input ball is a polytope with few enough vertex tuples,
/// all vertex tuples; (iii) `budget` Gaussian restarts normalized in the
/// input classes and improved by coordinate hill-climbing. Restart `r` at
/// length `ℓ` draws from its own derived stream, so the families for a
/// smaller budget or truncation are literally contained in those for a larger
/// one.
pub fn summing_norm(
    t: &MultiOperator,
    b: &Block,
    xspecs: &[ClassSpec],
    stack: &ClassStack,
    k: usize,
    budget: usize,
    seed: u64,
) -> Result<SummingEstimate> {
    summing_norm_with(t, b, xspecs, stack, k, budget, seed, &SearchConfig::default())
}

#[allow(clippy::too_many_arguments)]
pub fn summing_norm_with(
    t: &MultiOperator,
    b: &Block,
    xspecs: &[ClassSpec],
    stack: &ClassStack,
    k: usize,
    budget: usize,
    seed: u64,
    config: &SearchConfig,
) -> Result<SummingEstimate> {
    let n = t.arity();
    if xspecs.len() != n || b.arity() != n {
        return Err(Error::Shape(format!(
            "operator of arity {n}, block of arity {}, {} input classes",
            b.arity(),
            xspecs.len()
        )));
    }
    if stack.depth() != n {
        return Err(Error::DepthMismatch { expected: n, found: stack.depth() });
    }
    xspecs.iter().try_for_each(|s| s.validate())?;
    let problem = Problem { t, b, xspecs, stack, leaf_budget: config.leaf_budget, seed };

    let mut best: Option<Candidate> = None;
    let mut attains_sup = false;
    let mut last_lens: Option<Vec<usize>> = None;
    for len in 1..=k {
        let lens: Vec<usize> = b.bounds().iter().map(|bound| len.min(*bound)).collect();
        if last_lens.as_ref() == Some(&lens) {
            continue;
        }
        last_lens = Some(lens.clone());
        let Some(reachable) = b.truncated(&lens) else { continue };
        let rung_seed = rng::derive_seed(seed, len as u64);

        if best.is_none() {
            best = Some(single_point(&problem, &reachable, budget));
        }
        attains_sup = false;
        if config.enumerate_vertices {
            if let Some((cand, complete)) = enumerate_vertices(&problem, &lens, config.max_vertex_tuples) {
                attains_sup = complete && cand.as_ref().is_none_or(|c| c.exact);
                best = best_of(best, cand);
            }
        }
        let restarts: Vec<Option<Candidate>> = (0..budget)
            .into_par_iter()
            .map(|r| random_restart(&problem, &lens, rng::derive_seed(rung_seed, r as u64), config))
            .collect();
        for cand in restarts {
            best = best_of(best, cand);
        }
    }

    let best = best.unwrap_or_else(|| Candidate {
        value: 0.0,
        exact: true,
        seqs: vec![Vec::new(); n],
    });
    Ok(SummingEstimate {
        value: best.value,
        witness: problem.sequences(&best.seqs),
        exact: best.exact,
        attains_sup: attains_sup && best.exact,
        budget,
        seed,
        truncation: k,
        leaf_budget: config.leaf_budget,
    })
}

fn single_point(problem: &Problem, reachable: &Block, budget: usize) -> Candidate {
    let t = problem.t;
    let norm = sup_norm(t, budget, problem.seed);
    let member = reachable.members().next().expect("truncated blocks are nonvoid").clone();
    let seqs: Vec<Vec<Vec<f64>>> = norm
        .witness
        .iter()
        .zip(&member)
        .zip(&t.domains)
        .map(|((x, &j), space)| {
            let mut entries = vec![vec![0.0; space.dim]; j + 1];
            entries[j] = x.clone();
            entries
        })
        .collect();
    // ‖x·e_j‖_X = ‖x‖ ≤ 1 for every class
    problem.evaluate(seqs, true)
}

fn ball_vertices(space: &FiniteLpSpace) -> Option<Vec<Vec<f64>>> {
    if space.dim == 1 {
        return Some(vec![vec![1.0], vec![-1.0]]);
    }
    unit_ball_extreme_points(space)
}

fn checked_count(base: usize, exp: usize) -> Option<usize> {
    base.checked_pow(u32::try_from(exp).ok()?)
}

/// Number of vertices of the unit ball of sequences of length `len` in the
/// class `spec` over `space`, or `None` when that ball is not a polytope of
/// a supported shape.
fn vertex_count(spec: ClassSpec, space: &FiniteLpSpace, len: usize) -> Option<usize> {
    let ext = ball_vertices(space)?.len();
    match spec {
        ClassSpec::Strong(p) if p == 1.0 => ext.checked_mul(len),
        ClassSpec::Sup => checked_count(ext, len),
        ClassSpec::Weak(p) if p == 1.0 && (space.dim == 1 || space.exp.is_infinite()) => {
            checked_count(2 * len, space.dim)
        }
        _ => None,
    }
}

/// Vertex `idx` of that ball, in a fixed mixed-radix order.
///
/// `ℓ₁(E)` has vertices `v·e_j`; `ℓ_∞(E)` the products of vertices of `B_E`;
/// weak `ℓ₁` over `ℓ_∞^m` is the product over coordinates `i` of the ℓ₁ balls
/// of the columns `(x_j(i))_j`, with vertices `±e_{j_i}` in each column.
fn vertex(spec: ClassSpec, space: &FiniteLpSpace, len: usize, mut idx: usize) -> Vec<Vec<f64>> {
    let ext = ball_vertices(space).expect("polytope checked by vertex_count");
    let mut entries = vec![vec![0.0; space.dim]; len];
    match spec {
        ClassSpec::Strong(_) => {
            entries[idx / ext.len()] = ext[idx % ext.len()].clone();
        }
        ClassSpec::Sup => {
            for e in entries.iter_mut() {
                *e = ext[idx % ext.len()].clone();
                idx /= ext.len();
            }
        }
        ClassSpec::Weak(_) => {
            for i in 0..space.dim {
                let choice = idx % (2 * len);
                idx /= 2 * len;
                entries[choice / 2][i] = if choice % 2 == 0 { 1.0 } else { -1.0 };
            }
        }
    }
    entries
}

/// Best vertex tuple and whether the enumeration covered all of them.
fn enumerate_vertices(problem: &Problem, lens: &[usize], cap: usize) -> Option<(Option<Candidate>, bool)> {
    let counts: Vec<usize> = problem
        .xspecs
        .iter()
        .zip(&problem.t.domains)
        .zip(lens)
        .map(|((spec, space), len)| vertex_count(*spec, space, *len))
        .collect::<Option<_>>()?;
    let total = counts.iter().try_fold(1usize, |acc, c| acc.checked_mul(*c))?;
    if total > cap {
        return None;
    }
    let best = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let seqs = (0..counts.len())
                .map(|k| {
                    let local = idx % counts[k];
                    idx /= counts[k];
                    vertex(problem.xspecs[k], &problem.t.domains[k], lens[k], local)
                })
                .collect();
            problem.evaluate(seqs, true)
        })
        .map(Some)
        .reduce(|| None, best_of);
    Some((best, true))
}

fn random_restart(problem: &Problem, lens: &[usize], seed: u64, config: &SearchConfig) -> Option<Candidate> {
    let mut g = rng::stream(seed, 0);
    let mut seqs = Vec::with_capacity(lens.len());
    let mut inputs_exact = true;
    for (k, (&len, space)) in lens.iter().zip(&problem.t.domains).enumerate() {
        let flat = rng::gaussian_vec(&mut g, len * space.dim);
        let entries = flat.chunks(space.dim).map(|c| c.to_vec()).collect();
        let (entries, exact) = problem.normalize(k, entries)?;
        inputs_exact &= exact;
        seqs.push(entries);
    }
    let mut current = problem.evaluate(seqs, inputs_exact);
    let mut step = 0.5;
    for _ in 0..config.climb_levels {
        for _ in 0..config.climb_sweeps {
            let mut improved = false;
            for k in 0..lens.len() {
                for j in 0..lens[k] {
                    for i in 0..problem.t.domains[k].dim {
                        for sign in [1.0, -1.0] {
                            let mut entries = current.seqs[k].clone();
                            entries[j][i] += sign * step;
                            let Some((entries, exact)) = problem.normalize(k, entries) else { continue };
                            let mut seqs = current.seqs.clone();
                            seqs[k] = entries;
                            let cand = problem.evaluate(seqs, inputs_exact && exact);
                            if cand.value > current.value {
                                current = cand;
                                improved = true;
                            }
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step *= 0.5;
    }
    Some(current)
}

/// Outcome of a sampled B-compatibility test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub passed: bool,
    /// Largest `‖(λ⁽¹⁾_{j₁}⋯λ⁽ⁿ⁾_{jₙ})_B‖_{Y₁(⋯Yₙ)} − ∏_k ‖λ⁽ᵏ⁾‖_{X_k}` seen.
    pub worst_margin: f64,
    /// The scalar sequences attaining it.
    pub witness: Vec<Vec<f64>>,
    pub samples: usize,
    pub exact: bool,
}

/// Margin of one tuple of scalar sequences:
/// nested block norm of the product array minus the product of input norms.
pub fn compat_margin(
    xspecs: &[ClassSpec],
    stack: &ClassStack,
    b: &Block,
    lambdas: &[Vec<f64>],
) -> Result<Estimate> {
    let n = b.arity();
    if xspecs.len() != n || lambdas.len() != n {
        return Err(Error::Shape(format!(
            "block of arity {n}, {} input classes, {} sequences",
            xspecs.len(),
            lambdas.len()
        )));
    }
    let t = MultiOperator::scalar_product(n);
    let seqs: Vec<VecSequence> = lambdas.iter().map(|l| VecSequence::scalars(l)).collect();
    let nested = block_value(&t, b, stack, &seqs, 0, 0)?;
    let mut product = 1.0;
    let mut exact = nested.exact;
    for (spec, s) in xspecs.iter().zip(&seqs) {
        let e = class_norm(*spec, s, 0, 0);
        product *= e.value;
        exact &= e.exact;
    }
    Ok(Estimate { value: nested.value - product, exact })
}

/// Tests the B-compatibility inequality on each sampled tuple of scalar
/// sequences; passes iff every margin is at most `tol`.
pub fn check_compatibility(
    xspecs: &[ClassSpec],
    stack: &ClassStack,
    b: &Block,
    samples: &[Vec<Vec<f64>>],
    tol: f64,
) -> Result<CompatReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("compatibility check needs at least one sample".into()));
    }
    let mut report = CompatReport {
        passed: true,
        worst_margin: f64::NEG_INFINITY,
        witness: Vec::new(),
        samples: samples.len(),
        exact: true,
    };
    for lambdas in samples {
        let m = compat_margin(xspecs, stack, b, lambdas)?;
        report.exact &= m.exact;
        if m.value > report.worst_margin {
            report.worst_margin = m.value;
            report.witness = lambdas.clone();
        }
    }
    report.passed = report.worst_margin <= tol;
    Ok(report)
}

/// Outcome of a sampled diagonalizability test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagReport {
    pub passed: bool,
    /// Largest `|‖(y_j·e_j)_j‖_{Y(Z(F))} − ‖(y_j)_j‖_{Y(F)}|` seen.
    pub worst_deviation: f64,
    /// Index of the sample attaining it.
    pub witness: usize,
    pub exact: bool,
}

/// Compares `‖(y_j·e_j)_j‖_{Y(Z(F))}` with `‖(y_j)_j‖_{Y(F)}` on each sample.
pub fn check_diagonalizable(
    yspec: ClassSpec,
    zspec: ClassSpec,
    space: FiniteLpSpace,
    samples: &[VecSequence],
    tol: f64,
    budget: usize,
    seed: u64,
) -> Result<DiagReport> {
    let stack = ClassStack::new(vec![yspec, zspec])?;
    let mut report = DiagReport { passed: true, worst_deviation: 0.0, witness: 0, exact: true };
    for (idx, seq) in samples.iter().enumerate() {
        if seq.space != space {
            return Err(Error::MixedSpaces);
        }
        let children = seq
            .entries
            .iter()
            .enumerate()
            .map(|(j, y)| JaggedNode::Leaf(VecSequence::single(&Vector { coords: y.clone(), space }, j).entries))
            .collect();
        let arr = JaggedArray::new(space, 2, JaggedNode::Branch(children))?;
        let lhs = nested_norm(&stack, &arr, budget, seed)?;
        let rhs = class_norm(yspec, seq, budget, seed);
        report.exact &= lhs.exact && rhs.exact;
        let dev = (lhs.value - rhs.value).abs();
        if dev > report.worst_deviation {
            report.worst_deviation = dev;
            report.witness = idx;
        }
    }
    report.passed = report.worst_deviation <= tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multilinear::finite_type;
    use crate::spaces::Exponent;

    fn sp(dim: usize, p: Exponent) -> FiniteLpSpace {
        FiniteLpSpace::new(dim, p).unwrap()
    }

    fn strong(ps: &[f64]) -> ClassStack {
        ClassStack::new(ps.iter().map(|p| ClassSpec::strong(*p).unwrap()).collect()).unwrap()
    }

    fn ones() -> VecSequence {
        VecSequence::scalars(&[1.0, 1.0])
    }

    #[test]
    fn block_value_examples() {
        let t = MultiOperator::scalar_product(2);
        let full = Block::full(&[2, 2]).unwrap();
        let diag = Block::diagonal(&[2, 2]).unwrap();
        let seqs = [ones(), ones()];
        assert_eq!(block_value(&t, &full, &strong(&[1.0, 1.0]), &seqs, 0, 0).unwrap().value, 4.0);
        assert_eq!(block_value(&t, &diag, &strong(&[1.0, 1.0]), &seqs, 0, 0).unwrap().value, 2.0);
    }

    #[test]
    fn image_shapes() {
        let t = MultiOperator::scalar_product(2);
        let x = VecSequence::scalars(&[1.0, 2.0]);
        let y = VecSequence::scalars(&[3.0, 5.0]);
        let full = block_image(&t, &Block::full(&[2, 2]).unwrap(), &[x.clone(), y.clone()]).unwrap();
        assert_eq!(
            full.root,
            JaggedNode::Branch(vec![
                JaggedNode::Leaf(vec![vec![3.0], vec![5.0]]),
                JaggedNode::Leaf(vec![vec![6.0], vec![10.0]]),
            ])
        );
        let diag = block_image(&t, &Block::diagonal(&[2, 2]).unwrap(), &[x, y]).unwrap();
        assert_eq!(
            diag.root,
            JaggedNode::Branch(vec![JaggedNode::Leaf(vec![vec![3.0]]), JaggedNode::Leaf(vec![vec![10.0]])])
        );
    }

    #[test]
    fn zero_operator_image_and_norm() {
        let e = sp(2, Exponent::TWO);
        let t = MultiOperator::zero(vec![e, e], e);
        let b = Block::full(&[2, 2]).unwrap();
        let seqs = vec![VecSequence::new(e, vec![vec![1.0, 2.0]]).unwrap(); 2];
        assert!(block_image(&t, &b, &seqs).unwrap().leaves().iter().all(|v| v.iter().all(|c| *c == 0.0)));
        let xs = [ClassSpec::strong(2.0).unwrap(); 2];
        let est = summing_norm(&t, &b, &xs, &strong(&[1.0, 1.0]), 2, 3, 1).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn rejects_long_sequences_and_bad_arity() {
        let t = MultiOperator::scalar_product(2);
        let b = Block::full(&[1, 1]).unwrap();
        assert!(block_image(&t, &b, &[ones(), ones()]).is_err());
        assert!(block_image(&t, &b, &[VecSequence::scalars(&[1.0])]).is_err());
        assert!(block_value(&t, &b, &strong(&[1.0]), &[VecSequence::scalars(&[1.0]), VecSequence::scalars(&[1.0])], 0, 0).is_err());
    }

    #[test]
    fn finite_type_attains_product_of_norms() {
        let e = sp(2, Exponent::ONE);
        let f = sp(2, Exponent::TWO);
        let t = finite_type(
            &[Vector::new(e, vec![1.0, 0.0]).unwrap(), Vector::new(e, vec![0.0, 2.0]).unwrap()],
            &Vector::new(f, vec![3.0, 0.0]).unwrap(),
        )
        .unwrap();
        let b = Block::full(&[3, 3]).unwrap();
        let xs = [ClassSpec::Strong(1.0); 2];
        let est = summing_norm(&t, &b, &xs, &strong(&[2.0, 2.0]), 3, 4, 5).unwrap();
        assert!((est.value - 6.0).abs() < 1e-12);
        assert!(est.exact && est.attains_sup);
        let again = block_value(&t, &b, &strong(&[2.0, 2.0]), &est.witness, est.leaf_budget, est.seed).unwrap();
        assert_eq!(again.value, est.value);
    }

    #[test]
    fn compatibility_examples() {
        let b = Block::full(&[4, 4]).unwrap();
        let lam = vec![vec![0.5; 4], vec![0.5; 4]];
        let xs = [ClassSpec::Strong(2.0); 2];
        let rep = check_compatibility(&xs, &strong(&[1.0, 1.0]), &b, &[lam], 1e-12).unwrap();
        assert!(!rep.passed);
        assert!((rep.worst_margin - 3.0).abs() < 1e-12);

        let xs = [ClassSpec::Strong(1.0); 2];
        let lam = vec![vec![0.3, -0.2, 0.1], vec![1.0, 2.0]];
        let rep = check_compatibility(&xs, &strong(&[2.0, 3.0]), &b, &[lam], 1e-12).unwrap();
        assert!(rep.passed);

        // arity one: ‖λ‖_{Y} ≤ ‖λ‖_{X}
        let b1 = Block::full(&[3]).unwrap();
        let m = compat_margin(&[ClassSpec::Strong(2.0)], &strong(&[1.0]), &b1, &[vec![1.0, 1.0, 1.0]]).unwrap();
        assert!((m.value - (3.0 - 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn diagonalizable_examples() {
        let e = sp(3, Exponent::Finite(1.5));
        let seq = VecSequence::new(e, vec![vec![1.0, -2.0, 0.5], vec![0.0, 0.0, 0.0], vec![3.0, 1.0, 1.0]]).unwrap();
        for y in [ClassSpec::Strong(1.0), ClassSpec::Strong(2.5), ClassSpec::Sup] {
            for z in [ClassSpec::Strong(1.0), ClassSpec::Strong(3.0), ClassSpec::Sup, ClassSpec::Weak(2.0)] {
                let rep = check_diagonalizable(y, z, e, std::slice::from_ref(&seq), 1e-12, 4, 0).unwrap();
                assert!(rep.passed, "{y} {z}: {}", rep.worst_deviation);
            }
        }
    }
}

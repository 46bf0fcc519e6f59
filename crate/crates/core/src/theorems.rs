//! Executable checks of the reduction identities and norm inequalities.
//!
//! Every check works on explicit sample sequences and re-executes the
//! pointwise computation behind a statement, so identities are compared to a
//! tight tolerance and inequalities are never stated between two stochastic
//! estimates.
//!
//! Identities record the slack `|L − R| / max(1, |R|)`; inequalities record
//! `L − R`. A comparison fails when its slack exceeds its tolerance.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::blocks::Block;
use crate::error::{Error, Result};
use crate::multilinear::{compose, finite_type, functional_norm, sup_norm, MultiOperator};
use crate::rng;
use crate::seqnorms::{class_norm, ClassSpec, ClassStack, VecSequence};
use crate::spaces::{linear_map_norm, Estimate, LinearMap, Vector};
use crate::summing::{block_image, block_value, check_compatibility, compat_margin, summing_norm, CompatReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped(String),
}

/// One recorded comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckWitness {
    pub instance: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub data: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    pub status: CheckStatus,
    pub worst_slack: f64,
    /// The comparison whose slack most exceeds its tolerance.
    pub worst: Option<CheckWitness>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn skipped(name: &str, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            instances: 0,
            status: CheckStatus::Skipped(reason.into()),
            worst_slack: 0.0,
            worst: None,
        }
    }

    /// Combines two reports on the same statement; a failure wins over a
    /// pass, and a pass over a skip.
    pub fn merge(self, other: CheckReport) -> CheckReport {
        let status = match (&self.status, &other.status) {
            (CheckStatus::Fail, _) | (_, CheckStatus::Fail) => CheckStatus::Fail,
            (CheckStatus::Pass, _) | (_, CheckStatus::Pass) => CheckStatus::Pass,
            _ => self.status.clone(),
        };
        let worst = match (self.worst, other.worst) {
            (Some(a), Some(b)) => Some(if excess(&b) > excess(&a) { b } else { a }),
            (a, b) => a.or(b),
        };
        CheckReport {
            name: self.name,
            instances: self.instances + other.instances,
            status,
            worst_slack: worst.as_ref().map_or(0.0, |w| w.slack),
            worst,
        }
    }
}

fn excess(w: &CheckWitness) -> f64 {
    w.slack - w.tolerance
}

/// Tolerances and search parameters shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub tol_identity: f64,
    pub tol_chain: f64,
    pub budget: usize,
    pub seed: u64,
    pub truncation: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { tol_identity: 1e-12, tol_chain: 1e-9, budget: 8, seed: 0, truncation: 2 }
    }
}

struct Recorder {
    name: &'static str,
    instances: usize,
    failed: bool,
    worst: Option<CheckWitness>,
}

impl Recorder {
    fn new(name: &'static str) -> Self {
        Self { name, instances: 0, failed: false, worst: None }
    }

    fn push(&mut self, w: CheckWitness) {
        self.failed |= !(w.slack <= w.tolerance);
        if self.worst.as_ref().is_none_or(|cur| excess(&w) > excess(cur)) {
            self.worst = Some(w);
        }
    }

    fn identity(&mut self, instance: usize, lhs: f64, rhs: f64, tolerance: f64, data: impl FnOnce() -> Value) {
        let slack = (lhs - rhs).abs() / rhs.abs().max(1.0);
        self.push(CheckWitness { instance, lhs, rhs, slack, tolerance, data: data() });
    }

    fn inequality(&mut self, instance: usize, lhs: f64, rhs: f64, tolerance: f64, data: impl FnOnce() -> Value) {
        self.push(CheckWitness { instance, lhs, rhs, slack: lhs - rhs, tolerance, data: data() });
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            name: self.name.into(),
            instances: self.instances,
            status: if self.failed { CheckStatus::Fail } else { CheckStatus::Pass },
            worst_slack: self.worst.as_ref().map_or(0.0, |w| w.slack),
            worst: self.worst,
        }
    }
}

fn exact_or(est: Estimate, what: &str) -> Result<f64> {
    if est.exact {
        Ok(est.value)
    } else {
        Err(Error::Precondition(format!("{what} has no exact evaluation here")))
    }
}

fn bounds_of(seqs: &[VecSequence]) -> Vec<usize> {
    seqs.iter().map(|s| s.len().max(1)).collect()
}

fn norm_of_value(t: &MultiOperator, xs: &[&[f64]]) -> f64 {
    t.codomain.norm(&t.apply_slices(xs))
}

/// Value of `T` at position `js`, zero when any sequence is exhausted.
fn value_at(t: &MultiOperator, seqs: &[VecSequence], js: &[usize]) -> f64 {
    let xs: Option<Vec<&[f64]>> = seqs.iter().zip(js).map(|(s, j)| s.get(*j)).collect();
    xs.map_or(0.0, |xs| norm_of_value(t, &xs))
}

/// Single-point sequences `x⁽ᵏ⁾·e_{j'_k}` have block value `‖T(x)‖` for
/// every `j' ∈ B`, whence `‖T‖ ≤ ‖T‖_{B;X;Y}`.
///
/// Each sample is one input tuple `x`. When [`sup_norm`] is exact the check
/// also compares it with the summing-norm search, whose single-point family
/// realizes it.
pub fn check_norm_domination(
    t: &MultiOperator,
    b: &Block,
    xspecs: &[ClassSpec],
    stack: &ClassStack,
    samples: &[Vec<Vector>],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let mut rec = Recorder::new("norm_domination");
    for (i, xs) in samples.iter().enumerate() {
        rec.instances += 1;
        let rhs = t.apply(xs)?.norm();
        for member in b.members() {
            let seqs: Vec<VecSequence> = xs.iter().zip(member).map(|(x, j)| VecSequence::single(x, *j)).collect();
            let lhs = block_value(t, b, stack, &seqs, opts.budget, opts.seed)?.value;
            rec.identity(i, lhs, rhs, opts.tol_identity, || json!({ "x": xs, "member": member }));
        }
    }
    let norm = sup_norm(t, opts.budget, opts.seed);
    if norm.exact {
        rec.instances += 1;
        let est = summing_norm(t, b, xspecs, stack, opts.truncation, opts.budget, opts.seed)?;
        rec.inequality(samples.len(), norm.value, est.value, opts.tol_chain, || {
            json!({ "sup_norm_witness": norm.witness, "summing_witness": est.witness })
        });
    }
    Ok(rec.finish())
}

/// The two pointwise steps of the ideal inequality for `v ∘ T ∘ (u₁, …, uₙ)`:
/// (i) `‖(v∘T∘u)^_B(x)‖ ≤ ‖v‖·‖T̂_B(u x)‖`; (ii) `‖(u_k x_j)_j‖_{X_k} ≤
/// ‖u_k‖·‖(x_j)_j‖_{X_k}`. Map norms and all compared values must be exact.
#[allow(clippy::too_many_arguments)]
pub fn check_ideal_inequality(
    v: &LinearMap,
    t: &MultiOperator,
    us: &[LinearMap],
    b: &Block,
    xspecs: &[ClassSpec],
    stack: &ClassStack,
    samples: &[Vec<VecSequence>],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let composed = compose(v, t, us)?;
    let exact_norm = |m: &LinearMap| {
        let est = linear_map_norm(m, opts.budget, opts.seed);
        exact_or(Estimate { value: est.value, exact: est.exact }, "linear map norm")
    };
    let v_norm = exact_norm(v)?;
    let u_norms: Vec<f64> = us.iter().map(exact_norm).collect::<Result<_>>()?;
    if xspecs.len() != us.len() {
        return Err(Error::Shape(format!("{} input classes for {} maps", xspecs.len(), us.len())));
    }

    let mut rec = Recorder::new("ideal_inequality");
    for (i, seqs) in samples.iter().enumerate() {
        rec.instances += 1;
        let mapped: Vec<VecSequence> = seqs
            .iter()
            .zip(us)
            .map(|(s, u)| {
                if s.space != u.domain {
                    return Err(Error::Shape(format!("sequence in {:?}, map expects {:?}", s.space, u.domain)));
                }
                Ok(VecSequence { space: u.codomain, entries: s.entries.iter().map(|e| u.apply_slice(e)).collect() })
            })
            .collect::<Result<_>>()?;
        let lhs = exact_or(block_value(&composed, b, stack, seqs, opts.budget, opts.seed)?, "block value")?;
        let inner = exact_or(block_value(t, b, stack, &mapped, opts.budget, opts.seed)?, "block value")?;
        rec.inequality(i, lhs, v_norm * inner, opts.tol_chain, || json!({ "step": "outer", "seqs": seqs }));
        for (k, (s, m)) in seqs.iter().zip(&mapped).enumerate() {
            let l = exact_or(class_norm(xspecs[k], m, opts.budget, opts.seed), "input class norm")?;
            let r = exact_or(class_norm(xspecs[k], s, opts.budget, opts.seed), "input class norm")?;
            rec.inequality(i, l, u_norms[k] * r, opts.tol_chain, || json!({ "step": "stability", "slot": k, "seq": s }));
        }
    }
    Ok(rec.finish())
}

/// Deterministic scalar-sequence samples for a compatibility pre-check:
/// constant sequences, single units, and seeded Gaussian tuples.
pub fn compat_samples(b: &Block, k: usize, count: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let lens: Vec<usize> = b.bounds().iter().map(|bound| k.min(*bound).max(1)).collect();
    let mut out = vec![lens.iter().map(|l| vec![1.0; *l]).collect(), lens.iter().map(|_| vec![1.0]).collect()];
    let mut g = rng::stream(seed, u64::MAX);
    for _ in 0..count {
        out.push(lens.iter().map(|l| rng::gaussian_vec(&mut g, *l)).collect());
    }
    out
}

/// `‖φ₁⊗⋯⊗φₙ⊗b‖_{B;X;Y} = ‖b‖·∏‖φ_k‖` for B-compatible classes, compared
/// against the summing-norm search. Skipped when sampled scalar sequences
/// already violate compatibility.
pub fn check_finite_type_norm(
    phis: &[Vector],
    bvec: &Vector,
    b: &Block,
    xspecs: &[ClassSpec],
    stack: &ClassStack,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let name = "finite_type_norm";
    let compat = check_compatibility(xspecs, stack, b, &compat_samples(b, opts.truncation, 32, opts.seed), opts.tol_identity)?;
    if !compat.passed {
        return Ok(CheckReport::skipped(
            name,
            format!("classes are not B-compatible: margin {} at {:?}", compat.worst_margin, compat.witness),
        ));
    }
    let t = finite_type(phis, bvec)?;
    let rhs = bvec.norm() * phis.iter().map(functional_norm).product::<f64>();
    let est = summing_norm(&t, b, xspecs, stack, opts.truncation, opts.budget, opts.seed)?;
    let mut rec = Recorder::new(name);
    rec.instances = 1;
    rec.identity(0, est.value, rhs, opts.tol_chain, || json!({ "phis": phis, "b": bvec, "witness": est.witness }));
    Ok(rec.finish())
}

/// The diagonal block value with stack `[ℓ_q, Z, …, Z]` equals
/// `(Σ_j ‖T(x_j⁽¹⁾, …, x_j⁽ⁿ⁾)‖^q)^{1/q}`.
pub fn check_diagonal_reduction(
    t: &MultiOperator,
    q: f64,
    zspec: ClassSpec,
    samples: &[Vec<VecSequence>],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let mut specs = vec![ClassSpec::strong(q)?];
    specs.extend(std::iter::repeat_n(zspec, t.arity() - 1));
    let stack = ClassStack::new(specs)?;
    let mut rec = Recorder::new("diagonal_reduction");
    for (i, seqs) in samples.iter().enumerate() {
        rec.instances += 1;
        let diag = Block::diagonal(&bounds_of(seqs))?;
        let lhs = block_value(t, &diag, &stack, seqs, opts.budget, opts.seed)?.value;
        let m = seqs.iter().map(|s| s.len()).min().unwrap_or(0);
        let sum: f64 = (0..m).map(|j| value_at(t, seqs, &vec![j; seqs.len()]).powf(q)).sum();
        let rhs = sum.powf(1.0 / q);
        rec.identity(i, lhs, rhs, opts.tol_identity, || json!({ "seqs": seqs, "z": zspec }));
    }
    Ok(rec.finish())
}

/// Iterated sum over the full grid, written out directly:
/// `(Σ_{j₁}(Σ_{j₂}⋯(Σ_{jₙ}‖T(…)‖^{qₙ})^{q_{n-1}/qₙ}⋯)^{q₁/q₂})^{1/q₁}`.
fn iterated_sum(t: &MultiOperator, seqs: &[VecSequence], qs: &[f64], js: &mut Vec<usize>) -> f64 {
    let level = js.len();
    let bound = seqs[level].len().max(1);
    let q = qs[level];
    let mut sum = 0.0;
    for j in 0..bound {
        js.push(j);
        let inner = if level + 1 == qs.len() {
            value_at(t, seqs, js)
        } else {
            iterated_sum(t, seqs, qs, js)
        };
        js.pop();
        sum += inner.powf(q);
    }
    sum.powf(1.0 / q)
}

/// The full-block value with stack `[ℓ_{q₁}, …, ℓ_{qₙ}]` equals the directly
/// coded iterated sum.
pub fn check_multiple_formula(
    t: &MultiOperator,
    qs: &[f64],
    samples: &[Vec<VecSequence>],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    if qs.len() != t.arity() {
        return Err(Error::Shape(format!("{} exponents for arity {}", qs.len(), t.arity())));
    }
    let stack = ClassStack::new(qs.iter().map(|q| ClassSpec::strong(*q)).collect::<Result<_>>()?)?;
    let mut rec = Recorder::new("multiple_formula");
    for (i, seqs) in samples.iter().enumerate() {
        rec.instances += 1;
        let full = Block::full(&bounds_of(seqs))?;
        let lhs = block_value(t, &full, &stack, seqs, opts.budget, opts.seed)?.value;
        let rhs = iterated_sum(t, seqs, qs, &mut Vec::new());
        rec.identity(i, lhs, rhs, opts.tol_identity, || json!({ "seqs": seqs, "q": qs }));
    }
    Ok(rec.finish())
}

/// Stack whose value on the block `{j₁ = j₂}` is the double sum
/// `(Σ_{j₁}(Σ_{j₂}‖T(x_{j₁}, y_{j₁}, z_{j₂})‖^{q₂})^{q₁/q₂})^{1/q₁}`.
///
/// The middle level only ever sees one nonzero entry (the fiber over `j₁` in
/// the second slot is `{j₁}`), so any class works there; `ℓ_∞` is used. The
/// outer level carries the sum over `j₁` and must be `ℓ_{q₁}`.
pub fn partition_stack(q1: f64, q2: f64) -> Result<ClassStack> {
    ClassStack::new(vec![ClassSpec::strong(q1)?, ClassSpec::Sup, ClassSpec::strong(q2)?])
}

/// The value on the block `{j₁ = j₂}` with [`partition_stack`] equals the
/// directly coded double sum.
pub fn check_partition_formula(
    t: &MultiOperator,
    q1: f64,
    q2: f64,
    samples: &[Vec<VecSequence>],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    check_partition_identity(t, &partition_stack(q1, q2)?, q1, q2, samples, opts)
}

/// Compares the value on the block `{j₁ = j₂}` under an arbitrary `stack`
/// with the double sum for `(q₁, q₂)`.
pub fn check_partition_identity(
    t: &MultiOperator,
    stack: &ClassStack,
    q1: f64,
    q2: f64,
    samples: &[Vec<VecSequence>],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    if t.arity() != 3 {
        return Err(Error::Shape(format!("partition formula needs a trilinear operator, got arity {}", t.arity())));
    }
    let mut rec = Recorder::new("partition_formula");
    for (i, seqs) in samples.iter().enumerate() {
        rec.instances += 1;
        let block = Block::equality(0, 1, &bounds_of(seqs))?;
        let lhs = block_value(t, &block, stack, seqs, opts.budget, opts.seed)?.value;
        let m = seqs[0].len().min(seqs[1].len());
        let mut outer = 0.0;
        for j1 in 0..m {
            let inner: f64 = (0..seqs[2].len()).map(|j2| value_at(t, seqs, &[j1, j1, j2]).powf(q2)).sum();
            outer += inner.powf(q1 / q2);
        }
        let rhs = outer.powf(1.0 / q1);
        rec.identity(i, lhs, rhs, opts.tol_identity, || json!({ "seqs": seqs, "q1": q1, "q2": q2, "stack": stack }));
    }
    Ok(rec.finish())
}

/// Constants `C₁, C₂` of the coincidence bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceConstants {
    pub c1: f64,
    pub c2: f64,
}

impl CoincidenceConstants {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite() {
            Ok(Self { c1, c2 })
        } else {
            Err(Error::Precondition(format!("coincidence constants must be positive, got ({c1}, {c2})")))
        }
    }

    /// The regime `X₁ = X₂ = Y = ℓ₁(·)`, where `‖Σ_j ‖u x_j‖‖ ≤ ‖u‖ Σ_j ‖x_j‖`
    /// gives `C₁ = C₂ = 1` for all spaces.
    pub fn builtin(xspecs: &[ClassSpec], stack: &ClassStack) -> Option<Self> {
        let l1 = ClassSpec::Strong(1.0);
        (xspecs == [l1, l1] && stack.specs == [l1, l1]).then_some(Self { c1: 1.0, c2: 1.0 })
    }
}

/// Coincidence for a bilinear `A` on the full block: (i) the rows of `Â`
/// agree with the curried maps `y ↦ A(x_{j₁}, y)` applied to the second
/// sequence; (ii) `‖Â(x, y)‖ ≤ C₁C₂·‖A‖·‖x‖_{X₁}·‖y‖_{X₂}`.
///
/// Without caller constants only the built-in `ℓ₁` regime is accepted.
pub fn check_coincidence(
    a: &MultiOperator,
    xspecs: &[ClassSpec],
    stack: &ClassStack,
    constants: Option<CoincidenceConstants>,
    samples: &[Vec<VecSequence>],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    if a.arity() != 2 || xspecs.len() != 2 || stack.depth() != 2 {
        return Err(Error::Shape("coincidence needs a bilinear operator, two input classes and two stack levels".into()));
    }
    let c = constants.or_else(|| CoincidenceConstants::builtin(xspecs, stack)).ok_or_else(|| {
        Error::Precondition("no coincidence constants asserted for this regime; refusing to check".into())
    })?;
    let norm = sup_norm(a, opts.budget, opts.seed);
    let a_norm = exact_or(Estimate { value: norm.value, exact: norm.exact }, "operator norm")?;

    let mut rec = Recorder::new("coincidence");
    for (i, seqs) in samples.iter().enumerate() {
        rec.instances += 1;
        let full = Block::full(&bounds_of(seqs))?;
        let image = block_image(a, &full, seqs)?;
        let rows = match &image.root {
            crate::seqnorms::JaggedNode::Branch(rows) => rows,
            crate::seqnorms::JaggedNode::Leaf(_) => unreachable!("depth-two image"),
        };
        let zero_x = vec![0.0; a.domains[0].dim];
        let zero_y = vec![0.0; a.domains[1].dim];
        let mut gap: f64 = 0.0;
        for (j1, row) in rows.iter().enumerate() {
            let crate::seqnorms::JaggedNode::Leaf(entries) = row else { unreachable!("depth-two image") };
            let curried = a.curry_first(seqs[0].get(j1).unwrap_or(&zero_x))?;
            for (j2, entry) in entries.iter().enumerate() {
                let direct = curried.apply_slice(seqs[1].get(j2).unwrap_or(&zero_y));
                for (p, q) in entry.iter().zip(&direct) {
                    gap = gap.max((p - q).abs());
                }
            }
        }
        rec.identity(i, gap, 0.0, opts.tol_identity, || json!({ "step": "curry", "seqs": seqs }));

        let lhs = exact_or(block_value(a, &full, stack, seqs, opts.budget, opts.seed)?, "block value")?;
        let mut rhs = c.c1 * c.c2 * a_norm;
        for (spec, s) in xspecs.iter().zip(seqs) {
            rhs *= exact_or(class_norm(*spec, s, opts.budget, opts.seed), "input class norm")?;
        }
        rec.inequality(i, lhs, rhs, opts.tol_chain, || json!({ "step": "bound", "seqs": seqs, "constants": c }));
    }
    Ok(rec.finish())
}

/// Searches scalar sequences of length at most `k` for a positive
/// compatibility margin: constant sequences over a ladder of lengths, then
/// the summing-norm search for the product form `(λ₁, …, λₙ) ↦ λ₁⋯λₙ`
/// (whose block value at normalized inputs is the nested norm of the product
/// array). A positive margin certifies that the classes are not
/// B-compatible.
pub fn find_incompatibility_witness(
    xspecs: &[ClassSpec],
    stack: &ClassStack,
    b: &Block,
    k: usize,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<CompatReport> {
    let n = b.arity();
    if xspecs.len() != n {
        return Err(Error::Shape(format!("block of arity {n}, {} input classes", xspecs.len())));
    }
    let maxlens: Vec<usize> = b.bounds().iter().map(|bound| k.min(*bound).max(1)).collect();
    let all: usize = maxlens.iter().product();
    let ladders: Vec<Vec<usize>> = maxlens
        .iter()
        .map(|&m| {
            if all <= 4096 {
                (1..=m).collect()
            } else {
                let mut v: Vec<usize> = std::iter::successors(Some(1usize), |l| Some(l * 2)).take_while(|l| *l < m).collect();
                v.push(m);
                v
            }
        })
        .collect();

    let mut candidates: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut idx = vec![0usize; n];
    'outer: loop {
        let lambdas = (0..n)
            .map(|s| {
                let ones = VecSequence::scalars(&vec![1.0; ladders[s][idx[s]]]);
                let c = 1.0 / class_norm(xspecs[s], &ones, 0, 0).value;
                vec![c; ladders[s][idx[s]]]
            })
            .collect();
        candidates.push(lambdas);
        for s in 0..n {
            idx[s] += 1;
            if idx[s] < ladders[s].len() {
                continue 'outer;
            }
            idx[s] = 0;
        }
        break;
    }
    let product = MultiOperator::scalar_product(n);
    let searched = summing_norm(&product, b, xspecs, stack, k, budget, seed)?;
    candidates.push(searched.witness.iter().map(|s| s.entries.iter().map(|e| e[0]).collect()).collect());

    let mut report = CompatReport {
        passed: true,
        worst_margin: f64::NEG_INFINITY,
        witness: Vec::new(),
        samples: candidates.len(),
        exact: true,
    };
    for lambdas in candidates {
        let m = compat_margin(xspecs, stack, b, &lambdas)?;
        report.exact &= m.exact;
        if m.value > report.worst_margin {
            report.worst_margin = m.value;
            report.witness = lambdas;
        }
    }
    report.passed = report.worst_margin <= tol;
    Ok(report)
}

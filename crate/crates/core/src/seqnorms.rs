//! Sequence-class norms of finite vector sequences, and the iterated norm of
//! nested (jagged) arrays `Y₁(Y₂(⋯ Y_d(F)⋯))`.
//!
//! A finite sequence stands for the infinite sequence obtained by zero
//! padding. All supported classes are invariant under permutations of the
//! entries and under appending zeros, so the positions of the entries never
//! matter, only the multiset of entries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spaces::{lp_norm, linear_map_norm, Estimate, Exponent, FiniteLpSpace, LinearMap, Vector};

/// A sequence class: `ℓ_p(·)`, weak `ℓ_p^w(·)`, or `ℓ_∞(·)`.
///
/// At finite truncation `c₀(·)` has the same norm as `ℓ_∞(·)`, so `Sup`
/// stands for both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassSpec {
    Strong(f64),
    Weak(f64),
    Sup,
}

impl ClassSpec {
    pub fn strong(p: f64) -> Result<Self> {
        Self::check(p).map(ClassSpec::Strong)
    }

    pub fn weak(p: f64) -> Result<Self> {
        Self::check(p).map(ClassSpec::Weak)
    }

    fn check(p: f64) -> Result<f64> {
        if p.is_finite() && p >= 1.0 {
            Ok(p)
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassSpec::Strong(p) | ClassSpec::Weak(p) => Self::check(*p).map(|_| ()),
            ClassSpec::Sup => Ok(()),
        }
    }

    pub fn is_weak(&self) -> bool {
        matches!(self, ClassSpec::Weak(_))
    }

    /// The exponent of the scalar sequence space `X(ℝ)`. Over the scalars the
    /// weak and strong ℓ_p norms coincide.
    pub fn scalar_exponent(&self) -> Exponent {
        match self {
            ClassSpec::Strong(p) | ClassSpec::Weak(p) => Exponent::Finite(*p),
            ClassSpec::Sup => Exponent::Infinity,
        }
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassSpec::Strong(p) => write!(f, "strong:{p}"),
            ClassSpec::Weak(p) => write!(f, "weak:{p}"),
            ClassSpec::Sup => f.write_str("sup"),
        }
    }
}

impl FromStr for ClassSpec {
    type Err = Error;

    /// Parses `strong:P`, `weak:P`, `sup`, `inf` or `c0`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if matches!(s.as_str(), "sup" | "inf" | "c0") {
            return Ok(ClassSpec::Sup);
        }
        let (kind, p) = s
            .split_once(':')
            .ok_or_else(|| Error::Precondition(format!("unrecognised class {s:?}")))?;
        let p: f64 = p
            .parse()
            .map_err(|_| Error::Precondition(format!("bad exponent in class {s:?}")))?;
        match kind {
            "strong" => ClassSpec::strong(p),
            "weak" => ClassSpec::weak(p),
            _ => Err(Error::Precondition(format!("unrecognised class {s:?}"))),
        }
    }
}

/// A finite sequence of vectors of one space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VecSequence {
    pub space: FiniteLpSpace,
    pub entries: Vec<Vec<f64>>,
}

impl VecSequence {
    pub fn new(space: FiniteLpSpace, entries: Vec<Vec<f64>>) -> Result<Self> {
        for e in &entries {
            if e.len() != space.dim {
                return Err(Error::DimensionMismatch { expected: space.dim, found: e.len() });
            }
        }
        Ok(Self { space, entries })
    }

    pub fn from_vectors(space: FiniteLpSpace, vectors: &[Vector]) -> Result<Self> {
        if vectors.iter().any(|v| v.space != space) {
            return Err(Error::MixedSpaces);
        }
        Ok(Self { space, entries: vectors.iter().map(|v| v.coords.clone()).collect() })
    }

    pub fn scalars(values: &[f64]) -> Self {
        Self { space: FiniteLpSpace::scalars(), entries: values.iter().map(|v| vec![*v]).collect() }
    }

    /// `x · e_j`: the sequence with `x` at position `j` and zeros before it.
    pub fn single(x: &Vector, j: usize) -> Self {
        let mut entries = vec![vec![0.0; x.space.dim]; j + 1];
        entries[j] = x.coords.clone();
        Self { space: x.space, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            space: self.space,
            entries: self.entries.iter().map(|e| e.iter().map(|c| c * s).collect()).collect(),
        }
    }

    /// Entry `j`, or `None` past the end (the zero tail).
    pub fn get(&self, j: usize) -> Option<&[f64]> {
        self.entries.get(j).map(|e| e.as_slice())
    }
}

/// Norm of a sequence in the class `spec`.
///
/// `Strong` and `Sup` are exact. `Weak(p)` is the norm of the operator
/// `φ ↦ (φ(x_j))_j` from `E*` to `ℓ_p^k`; it is exact when the dual ball of
/// the space is a polytope and otherwise a seeded ascent lower bound.
pub fn class_norm(spec: ClassSpec, seq: &VecSequence, budget: usize, seed: u64) -> Estimate {
    entries_norm(spec, &seq.space, &seq.entries, budget, seed)
}

pub(crate) fn entries_norm(
    spec: ClassSpec,
    space: &FiniteLpSpace,
    entries: &[Vec<f64>],
    budget: usize,
    seed: u64,
) -> Estimate {
    match spec {
        ClassSpec::Strong(p) => {
            let norms: Vec<f64> = entries.iter().map(|e| space.norm(e)).collect();
            Estimate::exact(lp_norm(&norms, Exponent::Finite(p)))
        }
        ClassSpec::Sup => Estimate::exact(entries.iter().map(|e| space.norm(e)).fold(0.0, f64::max)),
        ClassSpec::Weak(p) => {
            let nonzero: Vec<&Vec<f64>> =
                entries.iter().filter(|e| e.iter().any(|c| *c != 0.0)).collect();
            if nonzero.is_empty() {
                return Estimate::exact(0.0);
            }
            let target = FiniteLpSpace { dim: nonzero.len(), exp: Exponent::Finite(p) };
            let matrix: Vec<f64> = nonzero.iter().flat_map(|e| e.iter().copied()).collect();
            let op = LinearMap { matrix, domain: space.dual(), codomain: target };
            let est = linear_map_norm(&op, budget, seed);
            Estimate { value: est.value, exact: est.exact }
        }
    }
}

/// An ordered list of classes `[Y₁, …, Y_d]`, outermost first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassStack {
    pub specs: Vec<ClassSpec>,
}

impl ClassStack {
    /// Rejects empty stacks, invalid exponents and weak classes anywhere but
    /// the innermost position.
    pub fn new(specs: Vec<ClassSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Precondition("class stack must not be empty".into()));
        }
        for s in &specs {
            s.validate()?;
        }
        let depth = specs.len();
        if let Some(position) = specs[..depth - 1].iter().position(|s| s.is_weak()) {
            return Err(Error::UnsupportedClassPosition { position, depth });
        }
        Ok(Self { specs })
    }

    pub fn uniform(spec: ClassSpec, depth: usize) -> Result<Self> {
        Self::new(vec![spec; depth])
    }

    pub fn depth(&self) -> usize {
        self.specs.len()
    }
}

/// A node of a [`JaggedArray`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JaggedNode {
    Branch(Vec<JaggedNode>),
    Leaf(Vec<Vec<f64>>),
}

/// A depth-`d` nested array of vectors of one space: `d - 1` levels of
/// branches over indices, then leaf lists of varying length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JaggedArray {
    pub space: FiniteLpSpace,
    pub depth: usize,
    pub root: JaggedNode,
}

impl JaggedArray {
    pub fn new(space: FiniteLpSpace, depth: usize, root: JaggedNode) -> Result<Self> {
        fn walk(node: &JaggedNode, level: usize, depth: usize, dim: usize) -> Result<()> {
            match node {
                JaggedNode::Leaf(entries) => {
                    if level != depth {
                        return Err(Error::DepthMismatch { expected: depth, found: level });
                    }
                    for e in entries {
                        if e.len() != dim {
                            return Err(Error::DimensionMismatch { expected: dim, found: e.len() });
                        }
                    }
                    Ok(())
                }
                JaggedNode::Branch(children) => {
                    if level >= depth {
                        return Err(Error::DepthMismatch { expected: depth, found: level + 1 });
                    }
                    children.iter().try_for_each(|c| walk(c, level + 1, depth, dim))
                }
            }
        }
        if depth == 0 {
            return Err(Error::DepthMismatch { expected: 1, found: 0 });
        }
        walk(&root, 1, depth, space.dim)?;
        Ok(Self { space, depth, root })
    }

    /// All leaf entries in traversal order.
    pub fn leaves(&self) -> Vec<&Vec<f64>> {
        fn collect<'a>(node: &'a JaggedNode, out: &mut Vec<&'a Vec<f64>>) {
            match node {
                JaggedNode::Leaf(es) => out.extend(es.iter()),
                JaggedNode::Branch(cs) => cs.iter().for_each(|c| collect(c, out)),
            }
        }
        let mut out = Vec::new();
        collect(&self.root, &mut out);
        out
    }
}

/// Iterated norm of a nested array.
///
/// The innermost class is applied to each leaf list; each outer class `Y_i`
/// is applied to the scalar sequence of child norms. An empty leaf list is the
/// zero sequence and has norm 0. Exactness flags combine by conjunction.
pub fn nested_norm(stack: &ClassStack, arr: &JaggedArray, budget: usize, seed: u64) -> Result<Estimate> {
    if stack.depth() != arr.depth {
        return Err(Error::DepthMismatch { expected: stack.depth(), found: arr.depth });
    }
    let depth = stack.depth();
    if let Some(position) = stack.specs[..depth - 1].iter().position(|s| s.is_weak()) {
        return Err(Error::UnsupportedClassPosition { position, depth });
    }
    let mut leaf_counter = 0u64;
    Ok(node_norm(&stack.specs, &arr.root, &arr.space, budget, seed, &mut leaf_counter))
}

fn node_norm(
    specs: &[ClassSpec],
    node: &JaggedNode,
    space: &FiniteLpSpace,
    budget: usize,
    seed: u64,
    leaf_counter: &mut u64,
) -> Estimate {
    match node {
        JaggedNode::Leaf(entries) => {
            let leaf_seed = rng::derive_seed(seed, *leaf_counter);
            *leaf_counter += 1;
            entries_norm(specs[0], space, entries, budget, leaf_seed)
        }
        JaggedNode::Branch(children) => {
            let mut exact = true;
            let values: Vec<f64> = children
                .iter()
                .map(|c| {
                    let e = node_norm(&specs[1..], c, space, budget, seed, leaf_counter);
                    exact &= e.exact;
                    e.value
                })
                .collect();
            Estimate { value: lp_norm(&values, specs[0].scalar_exponent()), exact }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(dim: usize, p: Exponent) -> FiniteLpSpace {
        FiniteLpSpace::new(dim, p).unwrap()
    }

    #[test]
    fn class_norm_examples() {
        // sup over |φ| ≤ 1 of Σ|φ x_j| = 1 + 2 + 3
        let s = VecSequence::scalars(&[1.0, -2.0, 3.0]);
        let e = class_norm(ClassSpec::Weak(1.0), &s, 0, 0);
        assert!(e.exact);
        assert_eq!(e.value, 6.0);

        let l2 = space(2, Exponent::TWO);
        let s = VecSequence::new(l2, vec![vec![3.0, 4.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(class_norm(ClassSpec::Strong(2.0), &s, 0, 0).value, 5.0);

        // dual ℓ_1²: max over ±e_i of the ℓ_2 norm of (φ(e_1), φ(e_2)) is 1
        let linf = space(2, Exponent::Infinity);
        let s = VecSequence::new(linf, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let e = class_norm(ClassSpec::Weak(2.0), &s, 0, 0);
        assert!(e.exact);
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn weak_norm_on_euclidean_space_is_a_lower_bound() {
        // Weak ℓ_2 norm of (e1, e2) in ℓ_2² is the spectral norm of I, i.e. 1.
        let l2 = space(2, Exponent::TWO);
        let s = VecSequence::new(l2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let e = class_norm(ClassSpec::Weak(2.0), &s, 4, 9);
        assert!(!e.exact);
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_axiom() {
        let x = [0.5, -1.5, 2.0];
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinity] {
            let sp = space(3, p);
            let s = VecSequence::new(sp, vec![x.to_vec()]).unwrap();
            for spec in [ClassSpec::Strong(1.0), ClassSpec::Strong(3.0), ClassSpec::Weak(2.0), ClassSpec::Sup] {
                let e = class_norm(spec, &s, 3, 0);
                assert!((e.value - sp.norm(&x)).abs() < 1e-12, "{spec} {p}");
            }
        }
    }

    #[test]
    fn empty_sequence_has_zero_norm() {
        let s = VecSequence::new(space(2, Exponent::TWO), vec![]).unwrap();
        for spec in [ClassSpec::Strong(1.0), ClassSpec::Weak(2.0), ClassSpec::Sup] {
            assert_eq!(class_norm(spec, &s, 0, 0).value, 0.0);
        }
    }

    #[test]
    fn nested_norm_examples() {
        let r = FiniteLpSpace::scalars();
        let stack = ClassStack::new(vec![ClassSpec::Strong(1.0), ClassSpec::Strong(2.0)]).unwrap();
        let leaf = |v: &[f64]| JaggedNode::Leaf(v.iter().map(|x| vec![*x]).collect());
        let root = JaggedNode::Branch(vec![leaf(&[3.0, 4.0]), leaf(&[0.0, 0.0]), leaf(&[5.0, 12.0])]);
        let arr = JaggedArray::new(r, 2, root).unwrap();
        // inner ℓ_2 norms 5, 0, 13; outer ℓ_1 gives 18
        assert_eq!(nested_norm(&stack, &arr, 0, 0).unwrap().value, 18.0);

        let l2 = space(2, Exponent::TWO);
        let stack = ClassStack::new(vec![ClassSpec::Sup, ClassSpec::Strong(1.0)]).unwrap();
        let root = JaggedNode::Branch(vec![JaggedNode::Leaf(vec![vec![3.0, 4.0]]), JaggedNode::Leaf(vec![])]);
        let arr = JaggedArray::new(l2, 2, root).unwrap();
        assert_eq!(nested_norm(&stack, &arr, 0, 0).unwrap().value, 5.0);
    }

    #[test]
    fn diagonal_shaped_array_reduces_to_lq() {
        // depth 3, one nonzero leaf per level-1 index, at branch (j, j)
        let r = FiniteLpSpace::scalars();
        let vals = [1.0, -2.0, 2.0];
        let root = JaggedNode::Branch(
            (0..3)
                .map(|j| {
                    JaggedNode::Branch(
                        (0..3)
                            .map(|k| JaggedNode::Leaf(if j == k { vec![vec![vals[j]]] } else { vec![] }))
                            .collect(),
                    )
                })
                .collect(),
        );
        let arr = JaggedArray::new(r, 3, root).unwrap();
        let stack = ClassStack::uniform(ClassSpec::Strong(2.0), 3).unwrap();
        // (1 + 4 + 4)^{1/2}
        assert_eq!(nested_norm(&stack, &arr, 0, 0).unwrap().value, 3.0);
    }

    #[test]
    fn weak_outside_innermost_rejected() {
        let err = ClassStack::new(vec![ClassSpec::Weak(1.0), ClassSpec::Strong(1.0)]).unwrap_err();
        assert_eq!(err, Error::UnsupportedClassPosition { position: 0, depth: 2 });
        assert!(ClassStack::new(vec![ClassSpec::Strong(1.0), ClassSpec::Weak(1.0)]).is_ok());
        assert!(ClassStack::new(vec![]).is_err());
        assert!(ClassSpec::strong(0.5).is_err());
    }

    #[test]
    fn depth_mismatch_rejected() {
        let r = FiniteLpSpace::scalars();
        assert!(JaggedArray::new(r, 2, JaggedNode::Leaf(vec![])).is_err());
        let arr = JaggedArray::new(r, 1, JaggedNode::Leaf(vec![vec![1.0]])).unwrap();
        let stack = ClassStack::uniform(ClassSpec::Sup, 2).unwrap();
        assert!(matches!(nested_norm(&stack, &arr, 0, 0), Err(Error::DepthMismatch { .. })));
    }

    #[test]
    fn mixed_spaces_rejected() {
        let a = Vector::new(space(2, Exponent::ONE), vec![1.0, 0.0]).unwrap();
        let b = Vector::new(space(2, Exponent::TWO), vec![1.0, 0.0]).unwrap();
        assert_eq!(VecSequence::from_vectors(a.space, &[a.clone(), b]), Err(Error::MixedSpaces));
    }

    #[test]
    fn class_spec_parsing() {
        assert_eq!("strong:2".parse::<ClassSpec>().unwrap(), ClassSpec::Strong(2.0));
        assert_eq!("weak:1.5".parse::<ClassSpec>().unwrap(), ClassSpec::Weak(1.5));
        assert_eq!("sup".parse::<ClassSpec>().unwrap(), ClassSpec::Sup);
        assert!("strong:0".parse::<ClassSpec>().is_err());
        assert!("cohen:2".parse::<ClassSpec>().is_err());
        let json = serde_json::to_string(&vec![ClassSpec::Strong(1.0), ClassSpec::Sup]).unwrap();
        assert_eq!(json, r#"[{"strong":1.0},"sup"]"#);
    }
}

//! Dense n-linear operators `E₁ × ⋯ × Eₙ → F`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spaces::{align, lp_norm, unit_ball_extreme_points, FiniteLpSpace, LinearMap, Vector};

/// Largest number of extreme-point tuples enumerated by [`sup_norm`] before it
/// falls back to ascent.
pub const MAX_ENUM_TUPLES: usize = 1 << 20;

/// An n-linear operator stored as a dense row-major coefficient tensor of
/// shape `m₁ × ⋯ × mₙ × m_F` (codomain index last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiOperator {
    pub domains: Vec<FiniteLpSpace>,
    pub codomain: FiniteLpSpace,
    pub coeffs: Vec<f64>,
}

/// Contracts `axis` of a row-major tensor with `v`.
pub(crate) fn contract_axis(data: &[f64], dims: &[usize], axis: usize, v: &[f64]) -> Vec<f64> {
    let m = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut out = vec![0.0; outer * inner];
    for o in 0..outer {
        let dst = &mut out[o * inner..(o + 1) * inner];
        for (i, vi) in v.iter().enumerate().take(m) {
            if *vi == 0.0 {
                continue;
            }
            let src = &data[(o * m + i) * inner..(o * m + i + 1) * inner];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += vi * s;
            }
        }
    }
    out
}

/// Replaces `axis` (old length `dims[axis]`) by a new axis of length
/// `new_len`, with `new[.., a, ..] = Σ_i w(a, i) · old[.., i, ..]`.
fn transform_axis(
    data: &[f64],
    dims: &[usize],
    axis: usize,
    new_len: usize,
    w: impl Fn(usize, usize) -> f64,
) -> Vec<f64> {
    let m = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut out = vec![0.0; outer * new_len * inner];
    for o in 0..outer {
        for a in 0..new_len {
            let dst = (o * new_len + a) * inner;
            for i in 0..m {
                let wi = w(a, i);
                if wi == 0.0 {
                    continue;
                }
                let src = (o * m + i) * inner;
                for r in 0..inner {
                    out[dst + r] += wi * data[src + r];
                }
            }
        }
    }
    out
}

impl MultiOperator {
    pub fn new(domains: Vec<FiniteLpSpace>, codomain: FiniteLpSpace, coeffs: Vec<f64>) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::Precondition("an operator needs at least one slot".into()));
        }
        let expected = domains.iter().map(|s| s.dim).product::<usize>() * codomain.dim;
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: coeffs.len() });
        }
        Ok(Self { domains, codomain, coeffs })
    }

    pub fn zero(domains: Vec<FiniteLpSpace>, codomain: FiniteLpSpace) -> Self {
        let len = domains.iter().map(|s| s.dim).product::<usize>() * codomain.dim;
        Self { domains, codomain, coeffs: vec![0.0; len] }
    }

    /// The product form `(λ₁, …, λₙ) ↦ λ₁⋯λₙ` on `ℝⁿ`.
    pub fn scalar_product(arity: usize) -> Self {
        let r = FiniteLpSpace::scalars();
        Self { domains: vec![r; arity], codomain: r, coeffs: vec![1.0] }
    }

    pub fn arity(&self) -> usize {
        self.domains.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.domains.iter().map(|d| d.dim).collect();
        s.push(self.codomain.dim);
        s
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect(), ..self.clone() }
    }

    /// `T(x₁, …, xₙ)` on raw coordinates; the caller guarantees the lengths.
    pub fn apply_slices(&self, xs: &[&[f64]]) -> Vec<f64> {
        let mut dims = self.shape();
        let mut data = self.coeffs.clone();
        for x in xs {
            data = contract_axis(&data, &dims, 0, x);
            dims.remove(0);
        }
        data
    }

    pub fn apply(&self, xs: &[Vector]) -> Result<Vector> {
        self.check_inputs(xs.iter().map(|x| &x.space))?;
        let slices: Vec<&[f64]> = xs.iter().map(|x| x.coords.as_slice()).collect();
        Ok(Vector { coords: self.apply_slices(&slices), space: self.codomain })
    }

    fn check_inputs<'a>(&self, spaces: impl ExactSizeIterator<Item = &'a FiniteLpSpace>) -> Result<()> {
        if spaces.len() != self.arity() {
            return Err(Error::Shape(format!("{} inputs for an operator of arity {}", spaces.len(), self.arity())));
        }
        for (k, (s, d)) in spaces.zip(&self.domains).enumerate() {
            if s != d {
                return Err(Error::Shape(format!("slot {k}: input in {s:?}, operator expects {d:?}")));
            }
        }
        Ok(())
    }

    /// The vector `c` with `⟨c, y⟩ = φ(T(x₁, …, y, …, xₙ))` (y in slot `k`).
    pub fn slot_gradient(&self, k: usize, xs: &[Vec<f64>], phi: &[f64]) -> Vec<f64> {
        let n = self.arity();
        let mut dims = self.shape();
        let mut data = contract_axis(&self.coeffs, &dims, n, phi);
        dims.pop();
        for slot in (0..n).rev() {
            if slot != k {
                data = contract_axis(&data, &dims, slot, &xs[slot]);
                dims.remove(slot);
            }
        }
        data
    }

    /// The linear map `y ↦ T(x, y)` of a bilinear operator with the first slot
    /// frozen at `x`.
    pub fn curry_first(&self, x: &[f64]) -> Result<LinearMap> {
        if self.arity() != 2 {
            return Err(Error::Precondition("currying needs a bilinear operator".into()));
        }
        let dims = self.shape();
        let partial = contract_axis(&self.coeffs, &dims, 0, x);
        // partial is m₂ × m_F; a LinearMap stores m_F rows of m₂ columns
        let (m2, mf) = (dims[1], dims[2]);
        let mut matrix = vec![0.0; m2 * mf];
        for i in 0..m2 {
            for c in 0..mf {
                matrix[c * m2 + i] = partial[i * mf + c];
            }
        }
        LinearMap::new(self.domains[1], self.codomain, matrix)
    }
}

/// `φ₁ ⊗ ⋯ ⊗ φₙ ⊗ b`. Each functional is given by its coordinates in the
/// canonical pairing; its `space` is the domain slot it acts on.
pub fn finite_type(functionals: &[Vector], b: &Vector) -> Result<MultiOperator> {
    if functionals.is_empty() {
        return Err(Error::Precondition("finite-type operator needs at least one functional".into()));
    }
    let mut coeffs = vec![1.0];
    for phi in functionals {
        coeffs = coeffs.iter().flat_map(|c| phi.coords.iter().map(move |p| c * p)).collect();
    }
    let coeffs = coeffs.iter().flat_map(|c| b.coords.iter().map(move |v| c * v)).collect();
    MultiOperator::new(functionals.iter().map(|f| f.space).collect(), b.space, coeffs)
}

/// Norm of a functional given by coordinates on `space`, i.e. the dual norm.
pub fn functional_norm(phi: &Vector) -> f64 {
    lp_norm(&phi.coords, phi.space.exp.dual())
}

/// `v ∘ T ∘ (u₁, …, uₙ)`.
pub fn compose(v: &LinearMap, t: &MultiOperator, us: &[LinearMap]) -> Result<MultiOperator> {
    if us.len() != t.arity() {
        return Err(Error::Shape(format!("{} inner maps for an operator of arity {}", us.len(), t.arity())));
    }
    if v.domain != t.codomain {
        return Err(Error::Shape(format!("outer map domain {:?} differs from codomain {:?}", v.domain, t.codomain)));
    }
    for (k, (u, e)) in us.iter().zip(&t.domains).enumerate() {
        if u.codomain != *e {
            return Err(Error::Shape(format!("slot {k}: inner map lands in {:?}, operator expects {e:?}", u.codomain)));
        }
    }
    let mut dims = t.shape();
    let mut data = t.coeffs.clone();
    for (k, u) in us.iter().enumerate() {
        data = transform_axis(&data, &dims, k, u.domain.dim, |a, i| u.entry(i, a));
        dims[k] = u.domain.dim;
    }
    let last = dims.len() - 1;
    data = transform_axis(&data, &dims, last, v.codomain.dim, |h, c| v.entry(h, c));
    MultiOperator::new(us.iter().map(|u| u.domain).collect(), v.codomain, data)
}

/// Sup norm with the attaining point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiNormEstimate {
    pub value: f64,
    pub exact: bool,
    pub witness: Vec<Vec<f64>>,
}

/// `‖T‖ = sup ‖T(x₁, …, xₙ)‖` over the product of closed unit balls.
///
/// When every domain ball is a polytope the supremum is attained at a tuple
/// of extreme points (the map is convex in each slot) and is enumerated.
/// Otherwise: alternating ascent on `φ(T(x₁, …, xₙ))` over `B_{F*} × ∏ B_{E_k}`,
/// each slot solved in closed form, from one fixed start plus `budget`
/// seeded random starts. The returned value is always attained at the
/// witness.
pub fn sup_norm(t: &MultiOperator, budget: usize, seed: u64) -> MultiNormEstimate {
    if let Some(est) = enumerate_sup(t) {
        return est;
    }
    let n = t.arity();
    let mut best = MultiNormEstimate { value: -1.0, exact: false, witness: Vec::new() };
    for r in 0..=budget {
        let start: Vec<Vec<f64>> = if r == 0 {
            t.domains.iter().map(|d| vec![1.0; d.dim]).collect()
        } else {
            let mut g = rng::stream(seed, r as u64 - 1);
            t.domains.iter().map(|d| rng::gaussian_vec(&mut g, d.dim)).collect()
        };
        let (x, v) = ascend(t, start);
        if v > best.value {
            best = MultiNormEstimate { value: v, exact: false, witness: x };
        }
    }
    debug_assert_eq!(best.witness.len(), n);
    best
}

fn enumerate_sup(t: &MultiOperator) -> Option<MultiNormEstimate> {
    let sets: Vec<Vec<Vec<f64>>> =
        t.domains.iter().map(unit_ball_extreme_points).collect::<Option<_>>()?;
    let count = sets.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.len()))?;
    if count > MAX_ENUM_TUPLES {
        return None;
    }
    let mut best = MultiNormEstimate { value: -1.0, exact: true, witness: Vec::new() };
    let mut chosen = Vec::with_capacity(t.arity());
    enumerate_rec(t, &sets, t.coeffs.clone(), t.shape(), &mut chosen, &mut best);
    Some(best)
}

fn enumerate_rec(
    t: &MultiOperator,
    sets: &[Vec<Vec<f64>>],
    data: Vec<f64>,
    dims: Vec<usize>,
    chosen: &mut Vec<usize>,
    best: &mut MultiNormEstimate,
) {
    let slot = chosen.len();
    if slot == sets.len() {
        let v = t.codomain.norm(&data);
        if v > best.value {
            best.value = v;
            best.witness = chosen.iter().enumerate().map(|(k, &i)| sets[k][i].clone()).collect();
        }
        return;
    }
    let rest = dims[1..].to_vec();
    for (i, pt) in sets[slot].iter().enumerate() {
        let next = contract_axis(&data, &dims, 0, pt);
        chosen.push(i);
        enumerate_rec(t, sets, next, rest.clone(), chosen, best);
        chosen.pop();
    }
}

fn ascend(t: &MultiOperator, start: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, f64) {
    let mut x: Vec<Vec<f64>> = start
        .into_iter()
        .zip(&t.domains)
        .map(|(v, d)| {
            let s = d.norm(&v);
            if s > 0.0 {
                v.iter().map(|c| c / s).collect()
            } else {
                d.basis(0).coords
            }
        })
        .collect();
    let eval = |x: &[Vec<f64>]| {
        let slices: Vec<&[f64]> = x.iter().map(|v| v.as_slice()).collect();
        t.apply_slices(&slices)
    };
    let mut best = t.codomain.norm(&eval(&x));
    let mut best_x = x.clone();
    for _ in 0..500 {
        for k in 0..t.arity() {
            let (phi, _) = align(&eval(&x), t.codomain.exp.dual());
            let c = t.slot_gradient(k, &x, &phi);
            x[k] = align(&c, t.domains[k].exp).0;
        }
        let v = t.codomain.norm(&eval(&x));
        if v > best * (1.0 + 1e-14) {
            best = v;
            best_x = x.clone();
        } else {
            if v > best {
                best = v;
                best_x = x.clone();
            }
            break;
        }
    }
    (best_x, best)
}

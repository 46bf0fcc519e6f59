//! Finite-dimensional real ℓ_p spaces, their vectors and linear maps.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng;

/// Largest dimension for which the 2^m sign vectors of a cube are enumerated.
pub const MAX_SIGN_ENUM_DIM: usize = 16;

/// An exponent in `[1, ∞]`. The infinite exponent is its own variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    /// The conjugate exponent p' with 1/p + 1/p' = 1.
    pub fn dual(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::ONE,
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            // 1 / (1 - 1/p) keeps dyadic cases such as 4/3 <-> 4 exact.
            Exponent::Finite(p) => Exponent::Finite(1.0 / (1.0 - 1.0 / p)),
        }
    }

    pub fn is_one(self) -> bool {
        self == Exponent::ONE
    }

    pub fn is_infinite(self) -> bool {
        self == Exponent::Infinity
    }

    /// True when the unit ball is a polytope (p = 1 or p = ∞).
    pub fn is_polytope(self) -> bool {
        self.is_one() || self.is_infinite()
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::finite(p).map_err(serde::de::Error::custom),
            Raw::Str(s) if s.eq_ignore_ascii_case("inf") => Ok(Exponent::Infinity),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "exponent must be a number >= 1 or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Free-function form of [`Exponent::dual`].
pub fn dual_exponent(p: Exponent) -> Exponent {
    p.dual()
}

/// ℓ_p norm of a coordinate slice.
///
/// Finite exponents are evaluated as `max · (Σ (|x_i|/max)^p)^{1/p}`, which
/// avoids overflow and returns `|x_i|` exactly for a single nonzero entry.
pub fn lp_norm(x: &[f64], p: Exponent) -> f64 {
    let max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    match p {
        Exponent::Infinity => max,
        Exponent::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(p) => {
            let s: f64 = x.iter().map(|v| (v.abs() / max).powf(p)).sum();
            max * s.powf(1.0 / p)
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizer of `⟨c, x⟩` over the closed unit ball of ℓ_p, together with the
/// maximum `‖c‖_{p'}`.
pub fn align(c: &[f64], p: Exponent) -> (Vec<f64>, f64) {
    let m = c.len();
    let value = lp_norm(c, p.dual());
    let mut x = vec![0.0; m];
    if value == 0.0 {
        if m > 0 {
            x[0] = 1.0;
        }
        return (x, 0.0);
    }
    match p {
        Exponent::Finite(p1) if p1 == 1.0 => {
            let (i, _) = c
                .iter()
                .enumerate()
                .fold((0, -1.0), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best });
            x[i] = c[i].signum();
        }
        Exponent::Infinity => {
            for (xi, ci) in x.iter_mut().zip(c) {
                *xi = if *ci < 0.0 { -1.0 } else { 1.0 };
            }
        }
        Exponent::Finite(_) => {
            let q = match p.dual() {
                Exponent::Finite(q) => q,
                Exponent::Infinity => unreachable!("dual of p > 1 is finite"),
            };
            for (xi, ci) in x.iter_mut().zip(c) {
                *xi = ci.signum() * (ci.abs() / value).powf(q - 1.0);
            }
        }
    }
    (x, value)
}

/// ℝ^m with the ℓ_p norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteLpSpace {
    pub dim: usize,
    #[serde(rename = "p")]
    pub exp: Exponent,
}

impl FiniteLpSpace {
    pub fn new(dim: usize, exp: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { dim, exp })
    }

    /// The scalar field ℝ. All exponents give the same norm in dimension one.
    pub fn scalars() -> Self {
        Self { dim: 1, exp: Exponent::ONE }
    }

    pub fn dual(self) -> Self {
        Self { dim: self.dim, exp: self.exp.dual() }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        lp_norm(x, self.exp)
    }

    pub fn zero(&self) -> Vector {
        Vector { coords: vec![0.0; self.dim], space: *self }
    }

    /// The canonical vector e_i (zero-based).
    pub fn basis(&self, i: usize) -> Vector {
        let mut v = self.zero();
        v.coords[i] = 1.0;
        v
    }
}

/// A vector of a [`FiniteLpSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector {
    pub coords: Vec<f64>,
    pub space: FiniteLpSpace,
}

impl Vector {
    pub fn new(space: FiniteLpSpace, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dim {
            return Err(Error::DimensionMismatch { expected: space.dim, found: coords.len() });
        }
        Ok(Self { coords, space })
    }

    pub fn norm(&self) -> f64 {
        vec_norm(self)
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector { coords: self.coords.iter().map(|c| c * s).collect(), space: self.space }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0.0)
    }
}

pub fn vec_norm(x: &Vector) -> f64 {
    lp_norm(&x.coords, x.space.exp)
}

/// Extreme points of the closed unit ball of ℓ_p^m for p ∈ {1, ∞}.
pub fn unit_ball_extreme_points(space: &FiniteLpSpace) -> Option<Vec<Vec<f64>>> {
    let m = space.dim;
    match space.exp {
        Exponent::Infinity if m <= MAX_SIGN_ENUM_DIM => Some(
            (0..1usize << m)
                .map(|mask| (0..m).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
                .collect(),
        ),
        Exponent::Finite(p) if p == 1.0 => Some(
            (0..m)
                .flat_map(|i| {
                    [1.0, -1.0].into_iter().map(move |s| {
                        let mut v = vec![0.0; m];
                        v[i] = s;
                        v
                    })
                })
                .collect(),
        ),
        _ => None,
    }
}

/// Extreme points of the dual unit ball `B_{E*}`, or `None` when the dual
/// ball has no finite extreme set (or the cube is too large to enumerate).
pub fn dual_ball_extreme_points(space: &FiniteLpSpace) -> Option<Vec<Vector>> {
    let dual = space.dual();
    unit_ball_extreme_points(&dual)
        .map(|pts| pts.into_iter().map(|coords| Vector { coords, space: dual }).collect())
}

/// A value together with whether it is exact or only a certified lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub exact: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, exact: true }
    }
}

/// A norm value with the point that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub exact: bool,
    pub witness: Vec<f64>,
}

/// A linear map `domain -> codomain`, stored row-major (`codomain.dim` rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub matrix: Vec<f64>,
    pub domain: FiniteLpSpace,
    pub codomain: FiniteLpSpace,
}

impl LinearMap {
    pub fn new(domain: FiniteLpSpace, codomain: FiniteLpSpace, matrix: Vec<f64>) -> Result<Self> {
        let expected = domain.dim * codomain.dim;
        if matrix.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: matrix.len() });
        }
        Ok(Self { matrix, domain, codomain })
    }

    /// Builds a map from its columns, i.e. the images of the canonical vectors.
    pub fn from_columns(
        domain: FiniteLpSpace,
        codomain: FiniteLpSpace,
        columns: &[Vec<f64>],
    ) -> Result<Self> {
        if columns.len() != domain.dim {
            return Err(Error::DimensionMismatch { expected: domain.dim, found: columns.len() });
        }
        let mut matrix = vec![0.0; domain.dim * codomain.dim];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != codomain.dim {
                return Err(Error::DimensionMismatch { expected: codomain.dim, found: col.len() });
            }
            for (i, v) in col.iter().enumerate() {
                matrix[i * domain.dim + j] = *v;
            }
        }
        Ok(Self { matrix, domain, codomain })
    }

    pub fn identity(space: FiniteLpSpace) -> Self {
        Self::scalar(space, 1.0)
    }

    pub fn scalar(space: FiniteLpSpace, s: f64) -> Self {
        let m = space.dim;
        let mut matrix = vec![0.0; m * m];
        for i in 0..m {
            matrix[i * m + i] = s;
        }
        Self { matrix, domain: space, codomain: space }
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.domain.dim + col]
    }

    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.chunks(self.domain.dim).map(|row| dot(row, x)).collect()
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.space != self.domain {
            return Err(Error::Shape(format!(
                "vector of {:?} applied to map with domain {:?}",
                x.space, self.domain
            )));
        }
        Ok(Vector { coords: self.apply_slice(&x.coords), space: self.codomain })
    }

    fn apply_transpose(&self, g: &[f64]) -> Vec<f64> {
        let n = self.domain.dim;
        let mut out = vec![0.0; n];
        for (row, gi) in self.matrix.chunks(n).zip(g) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * gi;
            }
        }
        out
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &LinearMap) -> Result<LinearMap> {
        if inner.codomain.dim != self.domain.dim {
            return Err(Error::DimensionMismatch { expected: self.domain.dim, found: inner.codomain.dim });
        }
        let (rows, mid, cols) = (self.codomain.dim, self.domain.dim, inner.domain.dim);
        let mut matrix = vec![0.0; rows * cols];
        for r in 0..rows {
            for k in 0..mid {
                let a = self.entry(r, k);
                for c in 0..cols {
                    matrix[r * cols + c] += a * inner.entry(k, c);
                }
            }
        }
        Ok(LinearMap { matrix, domain: inner.domain, codomain: self.codomain })
    }
}

/// Operator norm `sup_{‖x‖ ≤ 1} ‖u x‖`.
///
/// Exact when the domain ball is a polytope: `x ↦ ‖u x‖` is convex, so the
/// maximum sits at an extreme point. Otherwise alternating ascent on
/// `(g, x) ↦ ⟨g, u x⟩` over `B_{F*} × B_E` from one fixed start and `budget`
/// seeded random starts; the result is then an attained lower bound.
pub fn linear_map_norm(u: &LinearMap, budget: usize, seed: u64) -> NormEstimate {
    if let Some(points) = unit_ball_extreme_points(&u.domain) {
        let mut best = NormEstimate { value: -1.0, exact: true, witness: Vec::new() };
        for e in points {
            let v = u.codomain.norm(&u.apply_slice(&e));
            if v > best.value {
                best.value = v;
                best.witness = e;
            }
        }
        return best;
    }

    let m = u.domain.dim;
    let mut starts = vec![vec![1.0; m]];
    for r in 0..budget {
        starts.push(rng::gaussian_vec(&mut rng::stream(seed, r as u64), m));
    }
    let mut best = NormEstimate { value: -1.0, exact: false, witness: Vec::new() };
    for start in starts {
        let (x, v) = ascend_linear(u, start);
        if v > best.value {
            best.value = v;
            best.witness = x;
        }
    }
    best
}

fn ascend_linear(u: &LinearMap, start: Vec<f64>) -> (Vec<f64>, f64) {
    let scale = u.domain.norm(&start);
    let mut x: Vec<f64> = if scale > 0.0 {
        start.iter().map(|v| v / scale).collect()
    } else {
        u.domain.basis(0).coords
    };
    let mut best_x = x.clone();
    let mut best = u.codomain.norm(&u.apply_slice(&x));
    for _ in 0..200 {
        let y = u.apply_slice(&x);
        let (g, _) = align(&y, u.codomain.exp.dual());
        let (next, _) = align(&u.apply_transpose(&g), u.domain.exp);
        let v = u.codomain.norm(&u.apply_slice(&next));
        x = next;
        if v > best * (1.0 + 1e-15) {
            best = v;
            best_x = x.clone();
        } else {
            break;
        }
    }
    (best_x, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(dim: usize, p: Exponent) -> FiniteLpSpace {
        FiniteLpSpace::new(dim, p).unwrap()
    }

    #[test]
    fn dual_exponent_examples() {
        assert_eq!(dual_exponent(Exponent::ONE), Exponent::Infinity);
        assert_eq!(dual_exponent(Exponent::Infinity), Exponent::ONE);
        assert_eq!(dual_exponent(Exponent::TWO), Exponent::TWO);
        // 1/(4/3) + 1/4 = 3/4 + 1/4 = 1
        assert_eq!(dual_exponent(Exponent::Finite(4.0 / 3.0)), Exponent::Finite(4.0));
        assert_eq!(dual_exponent(Exponent::Finite(4.0)), Exponent::Finite(4.0 / 3.0));
    }

    #[test]
    fn invalid_exponents_rejected() {
        assert!(Exponent::finite(0.5).is_err());
        assert!(Exponent::finite(f64::NAN).is_err());
        assert_eq!(Exponent::finite(f64::INFINITY).unwrap(), Exponent::Infinity);
    }

    #[test]
    fn exponent_json() {
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(e, Exponent::Infinity);
        let e: Exponent = serde_json::from_str("1.5").unwrap();
        assert_eq!(e, Exponent::Finite(1.5));
        assert!(serde_json::from_str::<Exponent>("0.2").is_err());
        assert_eq!(serde_json::to_string(&Exponent::Infinity).unwrap(), "\"inf\"");
    }

    #[test]
    fn vec_norm_examples() {
        let v = Vector::new(sp(2, Exponent::TWO), vec![3.0, 4.0]).unwrap();
        assert_eq!(vec_norm(&v), 5.0);
        let v = Vector::new(sp(3, Exponent::ONE), vec![1.0, -2.0, 3.0]).unwrap();
        assert_eq!(vec_norm(&v), 6.0);
        let v = Vector::new(sp(3, Exponent::Infinity), vec![1.0, -2.0, 3.0]).unwrap();
        assert_eq!(vec_norm(&v), 3.0);
        assert!(Vector::new(sp(3, Exponent::ONE), vec![1.0]).is_err());
    }

    #[test]
    fn dual_ball_extreme_point_examples() {
        let pts = dual_ball_extreme_points(&sp(2, Exponent::ONE)).unwrap();
        assert_eq!(pts.len(), 4);
        for v in &pts {
            assert!(v.coords.iter().all(|c| c.abs() == 1.0));
            assert_eq!(v.space.exp, Exponent::Infinity);
        }
        let pts = dual_ball_extreme_points(&sp(3, Exponent::Infinity)).unwrap();
        assert_eq!(pts.len(), 6);
        for v in &pts {
            assert_eq!(vec_norm(v), 1.0);
            assert_eq!(v.coords.iter().filter(|c| **c != 0.0).count(), 1);
        }
        assert!(dual_ball_extreme_points(&sp(2, Exponent::TWO)).is_none());
    }

    #[test]
    fn align_attains_dual_norm() {
        let c = [0.5, -2.0, 1.0];
        for p in [Exponent::ONE, Exponent::Finite(1.5), Exponent::TWO, Exponent::Finite(3.0), Exponent::Infinity] {
            let (x, v) = align(&c, p);
            assert!((lp_norm(&x, p) - 1.0).abs() < 1e-12, "{p}");
            assert!((dot(&c, &x) - v).abs() < 1e-12, "{p}");
            assert!((v - lp_norm(&c, p.dual())).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_map_norm_examples() {
        let l1 = sp(2, Exponent::ONE);
        let u = LinearMap::from_columns(l1, l1, &[vec![1.0, 2.0], vec![0.0, -3.0]]).unwrap();
        let est = linear_map_norm(&u, 0, 0);
        assert!(est.exact);
        assert_eq!(est.value, 3.0);

        for p in [Exponent::ONE, Exponent::TWO, Exponent::Finite(3.0), Exponent::Infinity] {
            let id = LinearMap::identity(sp(3, p));
            let est = linear_map_norm(&id, 4, 1);
            assert!(est.value >= 1.0 - 1e-12 && est.value <= 1.0 + 1e-12);
            assert_eq!(est.exact, p.is_polytope());
        }

        let zero = LinearMap::scalar(sp(2, Exponent::TWO), 0.0);
        assert_eq!(linear_map_norm(&zero, 3, 0).value, 0.0);
    }

    #[test]
    fn exact_linear_norm_dominates_every_extreme_point() {
        let e = sp(3, Exponent::Infinity);
        let f = sp(2, Exponent::Finite(1.5));
        let u = LinearMap::new(e, f, vec![1.0, -0.5, 2.0, 0.3, 0.0, -1.0]).unwrap();
        let est = linear_map_norm(&u, 0, 0);
        assert!(est.exact);
        for pt in unit_ball_extreme_points(&e).unwrap() {
            assert!(f.norm(&u.apply_slice(&pt)) <= est.value);
        }
        assert_eq!(f.norm(&u.apply_slice(&est.witness)), est.value);
    }

    #[test]
    fn spectral_norm_by_ascent() {
        // [[2, 1], [1, 2]] has spectral norm 3.
        let l2 = sp(2, Exponent::TWO);
        let u = LinearMap::new(l2, l2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let est = linear_map_norm(&u, 5, 3);
        assert!(!est.exact);
        assert!((est.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn composition_matches_pointwise() {
        let a = sp(2, Exponent::ONE);
        let b = sp(3, Exponent::TWO);
        let u = LinearMap::new(a, b, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let v = LinearMap::new(b, a, vec![1.0, 0.0, -1.0, 2.0, 1.0, 0.5]).unwrap();
        let vu = v.after(&u).unwrap();
        let x = [0.3, -0.7];
        let direct = v.apply_slice(&u.apply_slice(&x));
        for (p, q) in vu.apply_slice(&x).iter().zip(&direct) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}

//! Seeded random instances: operators, maps, vectors and sequences with
//! standard Gaussian coordinates.

use rand::Rng;

use crate::multilinear::MultiOperator;
use crate::rng::{gaussian_vec, SearchRng};
use crate::seqnorms::VecSequence;
use crate::spaces::{FiniteLpSpace, LinearMap, Vector};

pub fn random_vector(rng: &mut SearchRng, space: FiniteLpSpace) -> Vector {
    Vector { coords: gaussian_vec(rng, space.dim), space }
}

/// A Gaussian vector rescaled onto the unit sphere of its space.
pub fn random_unit_vector(rng: &mut SearchRng, space: FiniteLpSpace) -> Vector {
    loop {
        let v = random_vector(rng, space);
        let n = v.norm();
        if n > 0.0 {
            return v.scaled(1.0 / n);
        }
    }
}

pub fn random_operator(rng: &mut SearchRng, domains: &[FiniteLpSpace], codomain: FiniteLpSpace) -> MultiOperator {
    let len = domains.iter().map(|d| d.dim).product::<usize>() * codomain.dim;
    MultiOperator { domains: domains.to_vec(), codomain, coeffs: gaussian_vec(rng, len) }
}

pub fn random_linear_map(rng: &mut SearchRng, domain: FiniteLpSpace, codomain: FiniteLpSpace) -> LinearMap {
    LinearMap { matrix: gaussian_vec(rng, domain.dim * codomain.dim), domain, codomain }
}

pub fn random_sequence(rng: &mut SearchRng, space: FiniteLpSpace, len: usize) -> VecSequence {
    VecSequence { space, entries: (0..len).map(|_| gaussian_vec(rng, space.dim)).collect() }
}

/// A sequence of uniformly random length in `1..=max_len`.
pub fn random_sequence_upto(rng: &mut SearchRng, space: FiniteLpSpace, max_len: usize) -> VecSequence {
    let len = rng.random_range(1..=max_len.max(1));
    random_sequence(rng, space, len)
}

pub fn random_scalars(rng: &mut SearchRng, len: usize) -> Vec<f64> {
    gaussian_vec(rng, len)
}

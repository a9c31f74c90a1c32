//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use supdiff_core::rational::{dot, int, is_zero_vec, ivec};
use supdiff_core::{
    AffinePiece, ConvexFunction, ConvexProgram, FunctionFamily, Halfspace, Polyhedron, Rational,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int_vec(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Vec<Rational> {
    (0..n).map(|_| int(rng.gen_range(lo..=hi))).collect()
}

pub fn nonzero_vec(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Vec<Rational> {
    loop {
        let v = int_vec(rng, n, lo, hi);
        if !is_zero_vec(&v) {
            return v;
        }
    }
}

/// A nonempty polyhedron given by generators, possibly unbounded.
pub fn polyhedron(rng: &mut ChaCha8Rng, n: usize) -> Polyhedron {
    let nv = rng.gen_range(1..=4);
    let nr = rng.gen_range(0..=2);
    let vertices = (0..nv).map(|_| int_vec(rng, n, -3, 3)).collect();
    let rays = (0..nr).map(|_| nonzero_vec(rng, n, -2, 2)).collect();
    Polyhedron::from_vrep(vertices, rays, n).unwrap()
}

pub fn polytope(rng: &mut ChaCha8Rng, n: usize) -> Polyhedron {
    let nv = rng.gen_range(1..=4);
    let vertices = (0..nv).map(|_| int_vec(rng, n, -3, 3)).collect();
    Polyhedron::from_vrep(vertices, vec![], n).unwrap()
}

/// One or two halfspaces containing `x`, some of them tight at `x`.
pub fn domain_through(rng: &mut ChaCha8Rng, x: &[Rational]) -> Polyhedron {
    let n = x.len();
    let k = rng.gen_range(1..=2);
    let h = (0..k)
        .map(|_| {
            let a = nonzero_vec(rng, n, -2, 2);
            let slack = int(*[0, 0, 1, 2].choose(rng).unwrap());
            let b = dot(&a, x) + slack;
            Halfspace::new(a, b)
        })
        .collect();
    Polyhedron::from_hrep(h, n).unwrap()
}

/// An affine piece whose value at `x` is a small nonpositive integer, so
/// that ties and near-ties in the active set are common.
pub fn piece_at(rng: &mut ChaCha8Rng, x: &[Rational]) -> AffinePiece {
    let a = int_vec(rng, x.len(), -2, 2);
    let target = int(-rng.gen_range(0..=3));
    let b = dot(&a, x) - target;
    AffinePiece::new(a, b)
}

pub fn proper_function(rng: &mut ChaCha8Rng, x: &[Rational]) -> ConvexFunction {
    match rng.gen_range(0..10) {
        0..=3 => ConvexFunction::Affine(piece_at(rng, x)),
        4..=6 => {
            let k = rng.gen_range(1..=3);
            ConvexFunction::max_affine((0..k).map(|_| piece_at(rng, x)).collect()).unwrap()
        }
        7..=8 => {
            let k = rng.gen_range(0..=2);
            let pieces = (0..k).map(|_| piece_at(rng, x)).collect();
            ConvexFunction::restricted(pieces, domain_through(rng, x)).unwrap()
        }
        _ => ConvexFunction::indicator(domain_through(rng, x)),
    }
}

pub fn random_x(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    int_vec(rng, n, -1, 1)
}

/// A family of proper entries whose every domain contains `x`.
pub fn proper_family(rng: &mut ChaCha8Rng, n: usize, m: usize, x: &[Rational]) -> FunctionFamily {
    FunctionFamily::new(n, (0..m).map(|i| (format!("t{i}"), proper_function(rng, x)))).unwrap()
}

/// As [`proper_family`], with one or two improper entries whose domains
/// contain `x`.
pub fn mixed_family(rng: &mut ChaCha8Rng, n: usize, m: usize, x: &[Rational]) -> FunctionFamily {
    let k = rng.gen_range(1..=2).min(m - 1);
    let mut entries: Vec<(String, ConvexFunction)> =
        (0..m - k).map(|i| (format!("t{i}"), proper_function(rng, x))).collect();
    for j in 0..k {
        let f = ConvexFunction::improper(domain_through(rng, x)).unwrap();
        entries.push((format!("u{j}"), f));
    }
    FunctionFamily::new(n, entries).unwrap()
}

/// Instance draw used by the family suites: `(n, m, x, family)`.
pub fn family_instance(rng: &mut ChaCha8Rng, improper: bool) -> (usize, Vec<Rational>, FunctionFamily) {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(2..=8);
    let x = random_x(rng, n);
    let f = if improper { mixed_family(rng, n, m, &x) } else { proper_family(rng, n, m, &x) };
    (n, x, f)
}

/// `max_i ±x_i - r`, a single constraint entry bounding the feasible set.
pub fn box_constraint(n: usize, r: i64) -> ConvexFunction {
    let mut pieces = Vec::new();
    for i in 0..n {
        for s in [1, -1] {
            let mut a = vec![0; n];
            a[i] = s;
            pieces.push(AffinePiece::new(ivec(&a), int(r)));
        }
    }
    ConvexFunction::max_affine(pieces).unwrap()
}

/// A bounded program with the origin as a Slater point.
pub fn slater_program(rng: &mut ChaCha8Rng) -> ConvexProgram {
    let n = rng.gen_range(1..=3);
    let mut entries = vec![("box".to_string(), box_constraint(n, 3))];
    for i in 0..rng.gen_range(1..=4) {
        let k = rng.gen_range(1..=2);
        let pieces: Vec<AffinePiece> =
            (0..k).map(|_| AffinePiece::new(nonzero_vec(rng, n, -3, 3), int(rng.gen_range(1..=4)))).collect();
        let f = if pieces.len() == 1 {
            ConvexFunction::Affine(pieces[0].clone())
        } else {
            ConvexFunction::max_affine(pieces).unwrap()
        };
        entries.push((format!("c{i}"), f));
    }
    let constraints = FunctionFamily::new(n, entries).unwrap();
    let k = rng.gen_range(1..=3);
    let pieces: Vec<AffinePiece> =
        (0..k).map(|_| AffinePiece::new(int_vec(rng, n, -3, 3), int(rng.gen_range(-2..=2)))).collect();
    let objective = if pieces.len() == 1 {
        ConvexFunction::Affine(pieces[0].clone())
    } else {
        ConvexFunction::max_affine(pieces).unwrap()
    };
    ConvexProgram::new(objective, constraints).unwrap()
}

/// The worked family `f_t(x) = t x - t` for `t = 0, …, max_t`.
pub fn ramp_family(max_t: i64) -> FunctionFamily {
    FunctionFamily::new(1, (0..=max_t).map(|t| (t.to_string(), ConvexFunction::affine(ivec(&[t]), int(t)))))
        .unwrap()
}

pub fn abs_family() -> FunctionFamily {
    FunctionFamily::new(
        1,
        [
            ("+", ConvexFunction::affine(ivec(&[1]), int(0))),
            ("-", ConvexFunction::affine(ivec(&[-1]), int(0))),
        ],
    )
    .unwrap()
}

/// `{x, -∞ on (-∞, 0]}`.
pub fn improper_family() -> FunctionFamily {
    let down = Polyhedron::from_hrep(vec![Halfspace::new(ivec(&[1]), int(0))], 1).unwrap();
    FunctionFamily::new(
        1,
        [
            ("lin", ConvexFunction::affine(ivec(&[1]), int(0))),
            ("imp", ConvexFunction::improper(down).unwrap()),
        ],
    )
    .unwrap()
}

//! Double description for homogeneous cones `{y : A y <= 0}` over the integers.
//!
//! The incremental scheme keeps a lineality basis next to the extreme rays.
//! Constraints not orthogonal to some line pivot that line into a ray; all
//! other constraints split the rays and combine adjacent pairs, with
//! adjacency decided combinatorially from zero sets.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::rational::primitive_int;

#[derive(Clone, Debug, Default)]
pub(crate) struct Cone {
    pub lines: Vec<Vec<BigInt>>,
    pub rays: Vec<Vec<BigInt>>,
}

#[derive(Clone)]
struct Ray {
    v: Vec<BigInt>,
    zeros: Vec<u64>,
}

fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

fn combine(c1: &BigInt, v1: &[BigInt], c2: &BigInt, v2: &[BigInt]) -> Vec<BigInt> {
    primitive_int(v1.iter().zip(v2).map(|(x, y)| c1 * x + c2 * y).collect())
}

fn set_bit(bits: &mut [u64], k: usize) {
    bits[k / 64] |= 1 << (k % 64);
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn popcount(a: &[u64]) -> usize {
    a.iter().map(|w| w.count_ones() as usize).sum()
}

pub(crate) fn double_description(dim: usize, rows: &[Vec<BigInt>]) -> Cone {
    let words = rows.len().div_ceil(64).max(1);
    let mut lines: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| {
            let mut e = vec![BigInt::zero(); dim];
            e[i] = BigInt::from(1);
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (k, a) in rows.iter().enumerate() {
        debug_assert_eq!(a.len(), dim);
        if a.iter().all(Zero::is_zero) {
            for r in rays.iter_mut() {
                set_bit(&mut r.zeros, k);
            }
            continue;
        }

        if let Some(p) = lines.iter().position(|l| !idot(a, l).is_zero()) {
            let l = lines.remove(p);
            let al = idot(a, &l);
            let abs_al = al.abs();
            for m in lines.iter_mut() {
                let am = idot(a, m);
                if !am.is_zero() {
                    *m = combine(&al, m, &-am, &l);
                }
            }
            for r in rays.iter_mut() {
                let ar = idot(a, &r.v);
                if !ar.is_zero() {
                    let coef = if al.is_positive() { -ar } else { ar };
                    r.v = combine(&abs_al, &r.v, &coef, &l);
                }
                set_bit(&mut r.zeros, k);
            }
            let v = if al.is_positive() { l.iter().map(|x| -x).collect() } else { l };
            let mut zeros = vec![0u64; words];
            for j in 0..k {
                set_bit(&mut zeros, j);
            }
            rays.push(Ray { v, zeros });
            continue;
        }

        let values: Vec<BigInt> = rays.iter().map(|r| idot(a, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
        if pos.is_empty() {
            for (r, val) in rays.iter_mut().zip(&values) {
                if val.is_zero() {
                    set_bit(&mut r.zeros, k);
                }
            }
            continue;
        }

        let needed = dim.saturating_sub(lines.len() + 2);
        let mut fresh: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common: Vec<u64> = rays[p].zeros.iter().zip(&rays[n].zeros).map(|(x, y)| x & y).collect();
                if popcount(&common) < needed {
                    continue;
                }
                let adjacent =
                    rays.iter().enumerate().all(|(i, r)| i == p || i == n || !subset(&common, &r.zeros));
                if !adjacent {
                    continue;
                }
                let v = combine(&values[p], &rays[n].v, &-values[n].clone(), &rays[p].v);
                let mut zeros = common;
                set_bit(&mut zeros, k);
                fresh.push(Ray { v, zeros });
            }
        }

        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() - pos.len() + fresh.len());
        for (mut r, val) in rays.into_iter().zip(values) {
            if val.is_positive() {
                continue;
            }
            if val.is_zero() {
                set_bit(&mut r.zeros, k);
            }
            kept.push(r);
        }
        kept.extend(fresh);
        rays = kept;
    }

    Cone { lines, rays: rays.into_iter().map(|r| r.v).collect() }
}

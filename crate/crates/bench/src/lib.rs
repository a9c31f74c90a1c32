//! Fixed instances for the criterion benchmarks.

use supdiff_core::rational::{int, ivec, unit};
use supdiff_core::{ConvexFunction, ConvexProgram, FunctionFamily, Halfspace, Rational};

/// `[-1, 1]^n` as `2n` halfspaces.
pub fn cube_halfspaces(n: usize) -> Vec<Halfspace> {
    (0..n)
        .flat_map(|i| {
            let e = unit(n, i);
            let minus: Vec<Rational> = e.iter().map(|c| -c).collect();
            [Halfspace::new(e, int(1)), Halfspace::new(minus, int(1))]
        })
        .collect()
}

/// The `2n` vertices `±e_i` of the cross-polytope.
pub fn cross_vertices(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .flat_map(|i| {
            let e = unit(n, i);
            let minus: Vec<Rational> = e.iter().map(|c| -c).collect();
            [e, minus]
        })
        .collect()
}

/// `f_t(x) = t x - t` for `t = first, …, last`.
pub fn ramp_family(first: i64, last: i64) -> FunctionFamily {
    FunctionFamily::new(
        1,
        (first..=last).map(|t| (format!("t{t:03}"), ConvexFunction::affine(ivec(&[t]), int(t)))),
    )
    .expect("valid family")
}

/// Affine pieces `⟨a, x⟩ - 1` with `a` running over the nonzero `{-1,0,1}^n`
/// vectors, so the sublevel set `f <= 0` is a polytope around the origin.
pub fn octant_family(n: usize) -> FunctionFamily {
    let mut entries = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let a: Vec<i64> = (0..n)
            .map(|_| {
                let d = (c % 3) as i64 - 1;
                c /= 3;
                d
            })
            .collect();
        if a.iter().all(|&d| d == 0) {
            continue;
        }
        entries.push((format!("a{code:03}"), ConvexFunction::affine(ivec(&a), int(1))));
    }
    FunctionFamily::new(n, entries).expect("valid family")
}

/// `min -x` subject to `t x - t <= 0`, `t = 1, …, m`.
pub fn silp_ramp(m: i64) -> ConvexProgram {
    ConvexProgram::new(ConvexFunction::affine(ivec(&[-1]), int(0)), ramp_family(1, m)).expect("valid program")
}

/// `min -Σ x_i` over the sublevel set of [`octant_family`].
pub fn octant_program(n: usize) -> ConvexProgram {
    ConvexProgram::new(ConvexFunction::affine(vec![int(-1); n], int(0)), octant_family(n))
        .expect("valid program")
}

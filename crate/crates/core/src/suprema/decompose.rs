//! Small-support convex combinations `f_λ = Σ λ_t f_t` carrying a given
//! ε-subgradient of `f = max_t f_t`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::{assembled_function, sup_value, FunctionFamily, SupError};
use crate::convexfn::ConvexFunction;
use crate::lp::{Cmp, LinearProgram};
use crate::rational::{dot, ExtReal, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaratheodoryDecomposition {
    pub lambda: BTreeMap<String, Rational>,
    /// Labels with positive weight.
    pub support: Vec<String>,
}

impl CaratheodoryDecomposition {
    /// `f_λ` as a single function.
    pub fn combined(&self, family: &FunctionFamily) -> Result<ConvexFunction, SupError> {
        let terms: Vec<(Rational, &ConvexFunction)> = self
            .support
            .iter()
            .map(|t| (self.lambda[t].clone(), family.get(t).expect("label from this family")))
            .collect();
        Ok(ConvexFunction::weighted_sum(&terms)?)
    }
}

/// Finds `λ` in the simplex with at most `n + 1` nonzero weights such that
/// `f_λ(x) >= f(x) - ε` and `g ∈ ∂_ε f_λ(x)`. Supports are tried in
/// increasing size, and in label order within a size.
pub fn caratheodory_decompose(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
    g: &[Rational],
) -> Result<CaratheodoryDecomposition, SupError> {
    family.check_point(x)?;
    if g.len() != family.dim() {
        return Err(SupError::PointDimension { expected: family.dim(), found: g.len() });
    }
    if eps.is_negative() {
        return Err(SupError::NonPositiveEpsilon);
    }
    if let Some((t, _)) = family.improper().next() {
        return Err(SupError::ImproperEntry(t.to_string()));
    }
    let fx = match sup_value(family, x) {
        ExtReal::Finite(v) => v,
        _ => return Err(SupError::NotSubgradient),
    };
    let f = assembled_function(family).expect("all entries proper");
    if !f.subgradient_membership(x, eps, g)? {
        return Err(SupError::NotSubgradient);
    }

    let labels: Vec<&str> = family.entries().map(|(t, _)| t).collect();
    let max_support = (family.dim() + 1).min(labels.len());
    for size in 1..=max_support {
        let mut found = None;
        for_each_subset(labels.len(), size, &mut |idx| {
            if found.is_some() {
                return;
            }
            let support: Vec<&str> = idx.iter().map(|&i| labels[i]).collect();
            if let Some(lambda) = solve_support(family, &support, x, &fx, eps, g) {
                let d = decomposition(lambda);
                if verify(family, &d, x, &fx, eps, g) {
                    found = Some(d);
                }
            }
        });
        if let Some(d) = found {
            return Ok(d);
        }
    }
    Err(SupError::DecompositionNotFound(max_support))
}

fn decomposition(lambda: BTreeMap<String, Rational>) -> CaratheodoryDecomposition {
    let support = lambda.iter().filter(|(_, v)| v.is_positive()).map(|(k, _)| k.clone()).collect();
    CaratheodoryDecomposition { lambda, support }
}

fn verify(
    family: &FunctionFamily,
    d: &CaratheodoryDecomposition,
    x: &[Rational],
    fx: &Rational,
    eps: &Rational,
    g: &[Rational],
) -> bool {
    let Ok(f_lambda) = d.combined(family) else {
        return false;
    };
    let floor = ExtReal::Finite(fx - eps);
    f_lambda.evaluate(x) >= floor && f_lambda.subgradient_membership(x, eps, g).unwrap_or(false)
}

fn for_each_subset(m: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, visit);
            cur.pop();
        }
    }
    rec(0, m, k, &mut Vec::with_capacity(k), visit);
}

/// Feasibility LP for a fixed support. With `f_i = max_j ⟨a_ij,·⟩ - b_ij`
/// on `D_i`, the conjugate of `λ_i f_i` at `g_i` is the least
/// `Σ_j ν_ij b_ij + σ_{D_i}(w_i)` over `Σ_j ν_ij = λ_i`,
/// `Σ_j ν_ij a_ij + w_i = g_i`, so the Fenchel-Young test for `f_λ`
/// becomes linear in `(ν, w, s)`.
fn solve_support(
    family: &FunctionFamily,
    support: &[&str],
    x: &[Rational],
    fx: &Rational,
    eps: &Rational,
    g: &[Rational],
) -> Option<BTreeMap<String, Rational>> {
    let n = family.dim();
    struct Block {
        lambda: usize,
        nu: Vec<usize>,
        w: Option<usize>,
        s: usize,
    }
    let mut next = 0usize;
    let mut alloc = |k: usize| {
        let start = next;
        next += k;
        start
    };
    let mut blocks = Vec::new();
    for t in support {
        let f = family.get(t).expect("label from this family");
        let lambda = alloc(1);
        let nu = (0..f.effective_pieces().len()).map(|_| alloc(1)).collect();
        let w = f.domain_set().map(|_| alloc(n));
        let s = alloc(1);
        blocks.push(Block { lambda, nu, w, s });
    }
    let mut lp = LinearProgram::new(next);

    let mut simplex = Vec::new();
    let mut value_terms = Vec::new();
    let mut slope_terms: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    let mut conj_terms = Vec::new();
    for (t, b) in support.iter().zip(&blocks) {
        let f = family.get(t).expect("label from this family");
        let pieces = f.effective_pieces();
        let ft = f.evaluate(x).finite().cloned().expect("proper entry finite at x");

        simplex.push((b.lambda, Rational::from_integer(1.into())));
        value_terms.push((b.lambda, ft.clone()));
        conj_terms.push((b.lambda, ft));
        conj_terms.push((b.s, Rational::from_integer(1.into())));
        lp.set_free(b.s);

        let mut tie: Vec<(usize, Rational)> =
            b.nu.iter().map(|&j| (j, Rational::from_integer(1.into()))).collect();
        tie.push((b.lambda, Rational::from_integer((-1).into())));
        lp.add_terms(&tie, Cmp::Eq, Rational::zero());

        for (p, &j) in pieces.iter().zip(&b.nu) {
            conj_terms.push((j, p.offset.clone()));
            for (terms, a) in slope_terms.iter_mut().zip(&p.slope) {
                terms.push((j, a.clone()));
            }
        }
        match (b.w, f.domain_set()) {
            (Some(w), Some(dom)) => {
                lp.set_free_range(w..w + n);
                for (k, terms) in slope_terms.iter_mut().enumerate() {
                    terms.push((w + k, Rational::from_integer(1.into())));
                }
                let v = dom.vrep();
                for vert in &v.vertices {
                    let mut row: Vec<(usize, Rational)> = (0..n).map(|k| (w + k, vert[k].clone())).collect();
                    row.push((b.s, Rational::from_integer((-1).into())));
                    lp.add_terms(&row, Cmp::Le, Rational::zero());
                }
                for ray in &v.rays {
                    let row: Vec<(usize, Rational)> = (0..n).map(|k| (w + k, ray[k].clone())).collect();
                    lp.add_terms(&row, Cmp::Le, Rational::zero());
                }
            }
            _ => lp.add_terms(&[(b.s, Rational::from_integer(1.into()))], Cmp::Eq, Rational::zero()),
        }
    }
    lp.add_terms(&simplex, Cmp::Eq, Rational::from_integer(1.into()));
    lp.add_terms(&value_terms, Cmp::Ge, fx - eps);
    for (k, terms) in slope_terms.iter().enumerate() {
        lp.add_terms(terms, Cmp::Eq, g[k].clone());
    }
    lp.add_terms(&conj_terms, Cmp::Le, eps + dot(g, x));

    let outcome = lp.solve();
    let (point, _) = outcome.optimal()?;
    Some(
        support
            .iter()
            .zip(&blocks)
            .map(|(t, b)| (t.to_string(), point[b.lambda].clone()))
            .chain(
                family
                    .entries()
                    .filter(|(t, _)| !support.contains(t))
                    .map(|(t, _)| (t.to_string(), Rational::zero())),
            )
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedron::{Halfspace, Polyhedron};
    use crate::rational::{int, ivec, rat};

    fn three_lines() -> FunctionFamily {
        FunctionFamily::new(
            1,
            [
                ("a", ConvexFunction::affine(ivec(&[1]), int(0))),
                ("b", ConvexFunction::affine(ivec(&[-1]), int(0))),
                ("c", ConvexFunction::affine(vec![rat(1, 2)], int(0))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_subgradient_needs_two_lines() {
        let d = caratheodory_decompose(&three_lines(), &[int(0)], &int(0), &[int(0)]).unwrap();
        assert_eq!(d.support, vec!["a", "b"]);
        assert_eq!(d.lambda["a"], rat(1, 2));
        assert_eq!(d.lambda["b"], rat(1, 2));
        assert_eq!(d.lambda["c"], int(0));
    }

    #[test]
    fn vertex_subgradient_is_a_single_line() {
        let d = caratheodory_decompose(&three_lines(), &[int(0)], &int(0), &[int(1)]).unwrap();
        assert_eq!(d.support, vec!["a"]);
        assert_eq!(d.lambda["a"], int(1));
    }

    #[test]
    fn non_subgradient_is_rejected() {
        assert_eq!(
            caratheodory_decompose(&three_lines(), &[int(0)], &int(0), &[int(2)]),
            Err(SupError::NotSubgradient)
        );
    }

    #[test]
    fn small_family_passes_through() {
        let f = FunctionFamily::new(
            1,
            [
                ("a", ConvexFunction::affine(ivec(&[1]), int(0))),
                ("b", ConvexFunction::affine(ivec(&[-1]), int(0))),
            ],
        )
        .unwrap();
        let d = caratheodory_decompose(&f, &[int(0)], &int(0), &[rat(1, 3)]).unwrap();
        assert_eq!(d.lambda["a"], rat(2, 3));
        assert_eq!(d.lambda["b"], rat(1, 3));
    }

    #[test]
    fn domain_entries_contribute_normal_directions() {
        let half = Polyhedron::from_hrep(vec![Halfspace::new(ivec(&[1]), int(0))], 1).unwrap();
        let f = FunctionFamily::new(
            1,
            [("lin", ConvexFunction::affine(ivec(&[1]), int(0))), ("dom", ConvexFunction::indicator(half))],
        )
        .unwrap();
        let d = caratheodory_decompose(&f, &[int(0)], &int(0), &[int(5)]).unwrap();
        let fl = d.combined(&f).unwrap();
        assert!(fl.subgradient_membership(&[int(0)], &int(0), &[int(5)]).unwrap());
    }
}

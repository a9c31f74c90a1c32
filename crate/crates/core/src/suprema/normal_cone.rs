//! Normal cone to `dom f` from the data of the individual `f_t`.

use num_traits::Zero;

use super::{
    applicable_hints, component_sets, finite_value, improper_normal_sets, rho_weights, scheme_weights,
    EpsSchedule, FunctionFamily, SetResult, SupError, WeightScheme,
};
use crate::polyhedron::Polyhedron;
use crate::rational::{ExtReal, Rational};

fn require_positive(eps: &Rational) -> Result<(), SupError> {
    if eps > &Rational::zero() {
        Ok(())
    } else {
        Err(SupError::NonPositiveEpsilon)
    }
}

fn require_all_proper(family: &FunctionFamily) -> Result<(), SupError> {
    match family.improper().next() {
        Some((t, _)) => Err(SupError::ImproperEntry(t.to_string())),
        None => Ok(()),
    }
}

fn require_domain(family: &FunctionFamily, x: &[Rational]) -> Result<(), SupError> {
    family.check_point(x)?;
    if family.domain_contains(x) {
        Ok(())
    } else {
        Err(SupError::NotInDomain)
    }
}

/// Hull of the weighted ε-subdifferentials over the proper indices.
fn weighted_hull(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
    scheme: &WeightScheme,
) -> Result<Vec<Polyhedron>, SupError> {
    let alpha = scheme_weights(family, x, eps, scheme)?;
    let mut parts = Vec::new();
    for (t, f) in family.proper() {
        parts.push(f.eps_subdifferential_scaled(&alpha[t], x, eps)?);
    }
    Ok(parts)
}

fn recession_of_hull(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
    parts: &[Polyhedron],
) -> Result<(Polyhedron, bool), SupError> {
    let hull = Polyhedron::hull_union(family.dim(), parts);
    let hints = applicable_hints(family, x, eps)?;
    let hint_used = !hints.is_empty() && !hull.is_empty();
    Ok((hull.hull_with_rays(&hints).recession_cone(), hint_used))
}

/// `N_{dom f}(x)` as the recession cone of the hull of `∂_ε(α_t f_t)(x)`,
/// for families of proper functions.
pub fn normal_cone_dom_proper(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
    scheme: &WeightScheme,
) -> Result<SetResult, SupError> {
    require_positive(eps)?;
    require_all_proper(family)?;
    require_domain(family, x)?;
    finite_value(family, x)?;
    let parts = weighted_hull(family, x, eps, scheme)?;
    let (cone, hint_used) = recession_of_hull(family, x, eps, &parts)?;
    let mut r = SetResult::new(cone, "normal-cone:weighted-recession", vec![eps.clone()], Some(scheme));
    r.hint_used = hint_used;
    Ok(r)
}

/// As [`normal_cone_dom_proper`], with the ε-normal sets of the improper
/// domains joining the hull.
pub fn normal_cone_dom(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
    scheme: &WeightScheme,
) -> Result<SetResult, SupError> {
    require_positive(eps)?;
    require_domain(family, x)?;
    let mut parts =
        if family.proper().next().is_some() { weighted_hull(family, x, eps, scheme)? } else { Vec::new() };
    parts.extend(improper_normal_sets(family, x, eps)?);
    let (cone, hint_used) = recession_of_hull(family, x, eps, &parts)?;
    let tag = if family.all_proper() {
        "normal-cone:weighted-recession"
    } else {
        "normal-cone:weighted-recession+improper"
    };
    let mut r = SetResult::new(cone, tag, vec![eps.clone()], Some(scheme));
    r.hint_used = hint_used;
    Ok(r)
}

/// The intersection over the schedule of `A_ε = cl co ⋃_t ∂_ε(ε α_t f_t)(x)`,
/// with `α_t = ρ_{t,ε₀}` taken at the first scheduled ε, reported through
/// its recession cone, or `{0}` when the intersection is empty.
///
/// Each `A_ε` has recession cone `N_{dom f}(x)`, so a nonempty intersection
/// yields the normal cone exactly. An empty one does not imply the cone is
/// trivial: for `f_1 = ⟨(1,0),·⟩` and `f_2 = ⟨(1,0),·⟩ - 1` restricted to
/// `y <= 0`, at the origin every `A_ε` lies in `x >= ε/3` while
/// `N_{dom f} = cone{(0,1)}`. The empty branch still returns `{0}`.
pub fn normal_cone_dom_scaled_limit(
    family: &FunctionFamily,
    x: &[Rational],
    schedule: &EpsSchedule,
) -> Result<SetResult, SupError> {
    require_all_proper(family)?;
    require_domain(family, x)?;
    finite_value(family, x)?;
    let n = family.dim();
    let mut acc: Option<Polyhedron> = None;
    let mut prev_cone: Option<Polyhedron> = None;
    let mut used = Vec::new();
    let mut stabilized = false;
    let mut hint_used = false;
    // Weights frozen at the largest ε dominate ρ at every smaller ε and
    // make the members homothetic: A_{λε} = λ A_ε.
    let rho = rho_weights(family, x, schedule.first())?;
    for eps in schedule.values() {
        used.push(eps.clone());
        let mut parts = Vec::new();
        for (t, f) in family.proper() {
            parts.push(f.eps_subdifferential_scaled(&(eps * &rho[t]), x, eps)?);
        }
        let hull = Polyhedron::hull_union(n, &parts);
        let hints = applicable_hints(family, x, eps)?;
        hint_used |= !hints.is_empty() && !hull.is_empty();
        let hull = hull.hull_with_rays(&hints);
        let next = match acc {
            None => hull,
            Some(a) => a.intersect(&hull).minimized(),
        };
        let cone = next.recession_cone();
        acc = Some(next);
        if let Some(p) = &prev_cone {
            if p.set_equal(&cone) {
                stabilized = true;
                prev_cone = Some(cone);
                break;
            }
        }
        prev_cone = Some(cone);
    }
    let cone = prev_cone.unwrap_or_else(|| Polyhedron::origin(n));
    let mut r = SetResult::new(cone, "normal-cone:scaled-intersection", used, Some(&WeightScheme::Rho));
    r.stabilized = stabilized;
    r.hint_used = hint_used;
    if acc.is_some_and(|a| a.is_empty()) {
        r.note = Some("intersection empty; recession cone taken as {0}".into());
    }
    Ok(r)
}

/// Recession cone of the hull of `∂_ε f_t(x)` over `T_ε(x)`, of
/// `∂_ε max{f_t, f(x) - ε}(x)` over the other proper indices, and of the
/// ε-normal sets of the improper domains. No weights are involved.
pub fn normal_cone_dom_parameterfree(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
) -> Result<SetResult, SupError> {
    require_positive(eps)?;
    require_domain(family, x)?;
    let mut parts = Vec::new();
    if family.proper().next().is_some() {
        let fx = finite_value(family, x)?;
        let floor = &fx - eps;
        let floor_ext = ExtReal::Finite(floor.clone());
        for (_, f) in family.proper() {
            if f.evaluate(x) >= floor_ext {
                parts.push(f.eps_subdifferential(x, eps)?);
            } else {
                parts.push(f.with_floor(&floor).eps_subdifferential(x, eps)?);
            }
        }
    }
    parts.extend(improper_normal_sets(family, x, eps)?);
    let (cone, hint_used) = recession_of_hull(family, x, eps, &parts)?;
    let mut r = SetResult::new(cone, "normal-cone:floored", vec![eps.clone()], None);
    r.hint_used = hint_used;
    Ok(r)
}

/// `N_{∩ C_t}(x)` as the recession cone of the hull of the ε-normal sets.
pub fn normal_cone_intersection(
    sets: &[Polyhedron],
    x: &[Rational],
    eps: &Rational,
) -> Result<SetResult, SupError> {
    require_positive(eps)?;
    let n = x.len();
    let mut parts = Vec::new();
    for (i, c) in sets.iter().enumerate() {
        if c.dim() != n {
            return Err(SupError::PointDimension { expected: c.dim(), found: n });
        }
        if !c.contains_point(x) {
            return Err(SupError::NotInSet(i));
        }
        parts.push(c.eps_normal_set(x, eps)?);
    }
    let cone = Polyhedron::hull_union(n, &parts).recession_cone();
    Ok(SetResult::new(cone, "normal-cone:set-intersection", vec![eps.clone()], None))
}

#[derive(Clone, Debug)]
pub struct NormalConeSplit {
    pub part_a: Polyhedron,
    pub part_b: Polyhedron,
    pub part_c: Polyhedron,
    pub total: SetResult,
}

/// Requires a common interior point of the entry domains.
pub(crate) fn require_continuity(family: &FunctionFamily) -> Result<(), SupError> {
    if family.domain().has_interior() {
        Ok(())
    } else {
        Err(SupError::ContinuityHypothesis)
    }
}

/// The normal cone as the sum of the recession cones of the three
/// component sets, valid when `f` is continuous somewhere.
pub fn normal_cone_split(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
    scheme: &WeightScheme,
) -> Result<NormalConeSplit, SupError> {
    require_positive(eps)?;
    require_domain(family, x)?;
    require_continuity(family)?;
    let comps = component_sets(family, x, eps, scheme)?;
    let part_a = comps.a.recession_cone();
    let part_b = comps.b.recession_cone();
    let part_c = comps.c.recession_cone();
    let sum = part_a.minkowski_sum(&part_b).minkowski_sum(&part_c);
    let mut total = SetResult::new(sum, "normal-cone:three-part-sum", vec![eps.clone()], Some(scheme));
    total.hint_used = comps.hint_used;
    Ok(NormalConeSplit { part_a, part_b, part_c, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexfn::ConvexFunction;
    use crate::polyhedron::Halfspace;
    use crate::rational::{int, ivec, rat};
    use crate::suprema::oracle_normal_cone_dom;
    use crate::suprema::tests::ramp_family;

    fn below(b: i64) -> Polyhedron {
        Polyhedron::from_hrep(vec![Halfspace::new(ivec(&[1]), int(b))], 1).unwrap()
    }

    fn above(b: i64) -> Polyhedron {
        Polyhedron::from_hrep(vec![Halfspace::new(ivec(&[-1]), int(-b))], 1).unwrap()
    }

    fn up() -> Polyhedron {
        Polyhedron::from_vrep(vec![ivec(&[0])], vec![ivec(&[1])], 1).unwrap()
    }

    fn lin_plus_indicator() -> FunctionFamily {
        FunctionFamily::new(
            1,
            [
                ("lin", ConvexFunction::affine(ivec(&[1]), int(0))),
                ("dom", ConvexFunction::indicator(below(1))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn scaled_limit_empty_branch_can_miss_the_domain_normal() {
        let below = Polyhedron::from_hrep(vec![Halfspace::new(ivec(&[0, 1]), int(0))], 2).unwrap();
        let f = FunctionFamily::new(
            2,
            [
                ("a", ConvexFunction::affine(ivec(&[1, 0]), int(0))),
                (
                    "b",
                    ConvexFunction::restricted(
                        vec![crate::convexfn::AffinePiece::new(ivec(&[1, 0]), int(1))],
                        below,
                    )
                    .unwrap(),
                ),
            ],
        )
        .unwrap();
        let x = ivec(&[0, 0]);
        let truth = Polyhedron::from_vrep(vec![ivec(&[0, 0])], vec![ivec(&[0, 1])], 2).unwrap();
        assert!(oracle_normal_cone_dom(&f, &x).unwrap().set_equal(&truth));
        let r = normal_cone_dom_scaled_limit(&f, &x, &EpsSchedule::default()).unwrap();
        assert!(r.note.is_some());
        assert!(r.set.set_equal(&Polyhedron::origin(2)));
        let proper = normal_cone_dom_proper(&f, &x, &int(1), &WeightScheme::Rho).unwrap();
        assert!(proper.set.set_equal(&truth));
    }

    #[test]
    fn ramp_truncated_normal_cone_is_trivial() {
        let f = ramp_family(2);
        let r = normal_cone_dom_proper(&f, &[int(0)], &int(1), &WeightScheme::Rho).unwrap();
        assert!(r.set.set_equal(&Polyhedron::origin(1)));
        assert!(!r.hint_used);
        let r = normal_cone_dom_scaled_limit(&f, &[int(0)], &EpsSchedule::default()).unwrap();
        assert!(r.set.set_equal(&Polyhedron::origin(1)));
        let r = normal_cone_dom_parameterfree(&f, &[int(0)], &int(1)).unwrap();
        assert!(r.set.set_equal(&Polyhedron::origin(1)));
    }

    #[test]
    fn hints_apply_only_where_the_extreme_entry_is_active() {
        let f = ramp_family(10).with_closure_hints(vec![ivec(&[1])]).unwrap();
        let at_one = normal_cone_dom(&f, &[int(1)], &int(1), &WeightScheme::Rho).unwrap();
        assert!(at_one.hint_used);
        assert!(at_one.set.set_equal(&up()));
        // At 0 only t = 0, 1 are ε-active and t = 10 reaches furthest.
        let at_zero = normal_cone_dom(&f, &[int(0)], &int(1), &WeightScheme::Rho).unwrap();
        assert!(!at_zero.hint_used);
        assert!(at_zero.set.set_equal(&Polyhedron::origin(1)));
        assert_eq!(at_zero.provenance.tag, "normal-cone:weighted-recession");
    }

    #[test]
    fn boundary_of_indicator_domain() {
        let f = lin_plus_indicator();
        for eps in [int(1), rat(1, 3)] {
            let r = normal_cone_dom_proper(&f, &[int(1)], &eps, &WeightScheme::Unit).unwrap();
            assert!(r.set.set_equal(&up()));
        }
        let r = normal_cone_dom_proper(&f, &[int(0)], &int(1), &WeightScheme::Unit).unwrap();
        assert!(r.set.set_equal(&Polyhedron::origin(1)));
        let r = normal_cone_dom_scaled_limit(&f, &[int(1)], &EpsSchedule::default()).unwrap();
        assert!(r.set.set_equal(&up()));
        assert!(r.stabilized);
    }

    #[test]
    fn single_affine_scaled_limit_is_trivial() {
        let f = FunctionFamily::new(1, [("a", ConvexFunction::affine(ivec(&[1]), int(0)))]).unwrap();
        let r = normal_cone_dom_scaled_limit(&f, &[int(0)], &EpsSchedule::default()).unwrap();
        assert!(r.set.set_equal(&Polyhedron::origin(1)));
    }

    #[test]
    fn improper_entries() {
        let f = FunctionFamily::new(
            1,
            [
                ("lin", ConvexFunction::affine(ivec(&[1]), int(0))),
                ("imp", ConvexFunction::improper(below(0)).unwrap()),
            ],
        )
        .unwrap();
        assert!(matches!(
            normal_cone_dom_proper(&f, &[int(0)], &int(1), &WeightScheme::Rho),
            Err(SupError::ImproperEntry(_))
        ));
        let r = normal_cone_dom(&f, &[int(0)], &int(1), &WeightScheme::Rho).unwrap();
        assert!(r.set.set_equal(&up()));
        assert!(r.set.set_equal(&oracle_normal_cone_dom(&f, &[int(0)]).unwrap()));

        let only = FunctionFamily::new(
            1,
            [(
                "imp",
                ConvexFunction::improper(
                    Polyhedron::from_vrep(vec![ivec(&[0]), ivec(&[1])], vec![], 1).unwrap(),
                )
                .unwrap(),
            )],
        )
        .unwrap();
        let r = normal_cone_dom(&only, &[int(1)], &int(1), &WeightScheme::Rho).unwrap();
        assert!(r.set.set_equal(&up()));
    }

    #[test]
    fn set_intersections() {
        let r = normal_cone_intersection(&[below(1), above(0)], &[int(0)], &int(1)).unwrap();
        let down = Polyhedron::from_vrep(vec![ivec(&[0])], vec![ivec(&[-1])], 1).unwrap();
        assert!(r.set.set_equal(&down));
        let unit = Polyhedron::from_vrep(vec![ivec(&[0]), ivec(&[1])], vec![], 1).unwrap();
        let r = normal_cone_intersection(&[unit.clone(), unit], &[rat(1, 2)], &int(1)).unwrap();
        assert!(r.set.set_equal(&Polyhedron::origin(1)));
        // two crossing lines through the origin in the plane
        let l1 = Polyhedron::from_vrep(vec![ivec(&[0, 0])], vec![ivec(&[1, 1]), ivec(&[-1, -1])], 2).unwrap();
        let l2 = Polyhedron::from_vrep(vec![ivec(&[0, 0])], vec![ivec(&[1, -1]), ivec(&[-1, 1])], 2).unwrap();
        let r = normal_cone_intersection(&[l1, l2], &ivec(&[0, 0]), &int(1)).unwrap();
        assert!(r.set.set_equal(&Polyhedron::whole(2)));
        assert!(matches!(
            normal_cone_intersection(&[below(1)], &[int(2)], &int(1)),
            Err(SupError::NotInSet(0))
        ));
    }

    #[test]
    fn split_parts() {
        let f = ramp_family(2);
        let s = normal_cone_split(&f, &[int(0)], &int(1), &WeightScheme::Rho).unwrap();
        for p in [&s.part_a, &s.part_b, &s.part_c, &s.total.set] {
            assert!(p.set_equal(&Polyhedron::origin(1)));
        }
        let g = lin_plus_indicator();
        let s = normal_cone_split(&g, &[int(1)], &int(1), &WeightScheme::Rho).unwrap();
        assert!(s.total.set.set_equal(&up()));
        let flat = FunctionFamily::new(
            1,
            [("a", ConvexFunction::indicator(below(0))), ("b", ConvexFunction::indicator(above(0)))],
        )
        .unwrap();
        assert!(matches!(
            normal_cone_split(&flat, &[int(0)], &int(1), &WeightScheme::Rho),
            Err(SupError::ContinuityHypothesis)
        ));
    }
}

//! Subdifferential of `f = sup_t f_t` from the data of the individual `f_t`.
//!
//! Each formula is an intersection over all ε > 0. Over a finite schedule
//! the intersection generally keeps points that only disappear in the limit
//! (a non-active affine entry contributes a point of norm O(ε²), an active
//! max-affine entry an ε-thick face), so the schedule result is intersected
//! with the ε → 0 limit of the same expression. For polyhedral data every
//! ε-subdifferential is a compact part moving continuously with ε plus a
//! fixed recession cone, which makes that limit explicit:
//! `∂f_t(x)` for the exactly active indices and `N_{dom f_t}(x)` (the
//! recession cone of any `∂_δ f_t(x)`) for the others.

use num_traits::Zero;

use super::normal_cone::require_continuity;
use super::{
    active_set, applicable_hints, below_activity_gap, component_sets, finite_value, normal_cone_dom,
    sup_value, EpsSchedule, FunctionFamily, SetResult, SupError, WeightScheme,
};
use crate::polyhedron::Polyhedron;
use crate::rational::{ExtReal, Rational};

struct Limit {
    /// Hull of `∂f_t(x)` over `T(x)`, plus closure hints.
    a0: Polyhedron,
    /// Hull of `N_{dom f_t}(x)` over the proper indices outside `T(x)`.
    b_cone: Polyhedron,
    /// Hull of `N_{dom f_t}(x)` over the improper indices.
    c_cone: Polyhedron,
}

fn limit_parts(family: &FunctionFamily, x: &[Rational]) -> Result<Limit, SupError> {
    let n = family.dim();
    let zero = Rational::zero();
    let active = active_set(family, x, &zero)?;
    let mut a = Vec::new();
    let mut b = vec![Polyhedron::origin(n)];
    for (t, f) in family.proper() {
        if active.iter().any(|s| s == t) {
            a.push(f.eps_subdifferential(x, &zero)?);
        } else {
            b.push(f.domain().eps_normal_set(x, &zero)?);
        }
    }
    let mut c = vec![Polyhedron::origin(n)];
    for (_, f) in family.improper() {
        c.push(f.domain().eps_normal_set(x, &zero)?);
    }
    Ok(Limit {
        a0: Polyhedron::hull_union(n, &a).hull_with_rays(&applicable_hints(family, x, &zero)?),
        b_cone: Polyhedron::hull_union(n, &b),
        c_cone: Polyhedron::hull_union(n, &c),
    })
}

/// Hull of `∂_ε f_t(x)` over the given indices (all ε-active ones when
/// `only` is `None`), plus closure hints.
fn active_hull(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
    only: Option<&[String]>,
) -> Result<(Polyhedron, bool), SupError> {
    let owned;
    let labels = match only {
        Some(l) => l,
        None => {
            owned = active_set(family, x, eps)?;
            &owned
        }
    };
    let mut parts = Vec::new();
    for t in labels {
        let f = family.get(t).expect("label from this family");
        parts.push(f.eps_subdifferential(x, eps)?);
    }
    let hull = Polyhedron::hull_union(family.dim(), &parts);
    let hints = applicable_hints(family, x, eps)?;
    let hinted = !hints.is_empty() && !hull.is_empty();
    Ok((hull.hull_with_rays(&hints), hinted))
}

struct Schedule {
    set: Polyhedron,
    used: Vec<Rational>,
    stabilized: bool,
}

/// Successive intersections over the schedule, stopping at the first pair
/// of refinements that agree.
fn intersect_over<F>(schedule: &EpsSchedule, mut member: F) -> Result<Schedule, SupError>
where
    F: FnMut(&Rational) -> Result<Polyhedron, SupError>,
{
    let mut acc: Option<Polyhedron> = None;
    let mut used = Vec::new();
    for eps in schedule.values() {
        used.push(eps.clone());
        let s = member(eps)?;
        let next = match &acc {
            None => s.minimized(),
            Some(a) => a.intersect(&s).minimized(),
        };
        if let Some(prev) = &acc {
            if prev.set_equal(&next) {
                return Ok(Schedule { set: next, used, stabilized: true });
            }
        }
        acc = Some(next);
    }
    Ok(Schedule { set: acc.expect("nonempty schedule"), used, stabilized: false })
}

fn finish(
    sched: Schedule,
    limit: &Polyhedron,
    tag: &str,
    scheme: Option<&WeightScheme>,
    hint_used: bool,
) -> SetResult {
    let set = sched.set.intersect(limit).minimized();
    let limit_closure = !set.set_equal(&sched.set);
    let mut r = SetResult::new(set, tag, sched.used, scheme);
    r.stabilized = sched.stabilized;
    r.limit_closure = limit_closure;
    r.hint_used = hint_used;
    r
}

fn not_finite(family: &FunctionFamily, tag: &str, scheme: Option<&WeightScheme>) -> SetResult {
    let mut r = SetResult::new(Polyhedron::empty(family.dim()), tag, Vec::new(), scheme);
    r.note = Some("f(x) is not finite".into());
    r
}

/// `∂f(x) = ∩_ε cl co(A_ε + ε(B_ε ∪ C_ε ∪ {0}))`.
pub fn subdifferential_sup(
    family: &FunctionFamily,
    x: &[Rational],
    schedule: &EpsSchedule,
    scheme: &WeightScheme,
) -> Result<SetResult, SupError> {
    const TAG: &str = "subdiff:penalized-sum";
    family.check_point(x)?;
    if !sup_value(family, x).is_finite() {
        return Ok(not_finite(family, TAG, Some(scheme)));
    }
    let n = family.dim();
    let origin = Polyhedron::origin(n);
    let mut hint_used = false;
    let sched = intersect_over(schedule, |eps| {
        let c = component_sets(family, x, eps, scheme)?;
        hint_used |= c.hint_used;
        let tail = Polyhedron::hull_union(n, [&c.b, &c.c, &origin]).scale(eps)?;
        Ok(c.a.minkowski_sum(&tail))
    })?;
    let lim = limit_parts(family, x)?;
    let limit = lim.a0.minkowski_sum(&Polyhedron::hull_union(n, [&lim.b_cone, &lim.c_cone]));
    Ok(finish(sched, &limit, TAG, Some(scheme), hint_used))
}

/// `∂f(x) = ∩_ε cl co(A_ε + N_{dom f}(x))`, with the normal cone taken from
/// [`normal_cone_dom`] at the first scheduled ε.
pub fn subdifferential_active_normal(
    family: &FunctionFamily,
    x: &[Rational],
    schedule: &EpsSchedule,
) -> Result<SetResult, SupError> {
    const TAG: &str = "subdiff:active-plus-normal-cone";
    family.check_point(x)?;
    if !sup_value(family, x).is_finite() {
        return Ok(not_finite(family, TAG, None));
    }
    let normal = normal_cone_dom(family, x, schedule.first(), &WeightScheme::Rho)?;
    let mut hint_used = normal.hint_used;
    let sched = intersect_over(schedule, |eps| {
        let (a, hinted) = active_hull(family, x, eps, None)?;
        hint_used |= hinted;
        Ok(a.minkowski_sum(&normal.set))
    })?;
    let lim = limit_parts(family, x)?;
    let limit = lim.a0.minkowski_sum(&normal.set);
    Ok(finish(sched, &limit, TAG, None, hint_used))
}

/// `∂f(x) = ∩_ε cl co ⋃_t ∂_ε f_t(x)` when every `f_t(x) = f(x)`.
pub fn subdifferential_brondsted(
    family: &FunctionFamily,
    x: &[Rational],
    schedule: &EpsSchedule,
) -> Result<SetResult, SupError> {
    family.check_point(x)?;
    let fx = match sup_value(family, x) {
        ExtReal::Finite(v) => v,
        _ => {
            return Err(SupError::BrondstedHypothesis("f(x) is not finite".into()));
        }
    };
    let target = ExtReal::Finite(fx);
    for (t, f) in family.entries() {
        let v = f.evaluate(x);
        if v != target {
            return Err(SupError::BrondstedHypothesis(format!(
                "f_{t}(x) = {v} differs from f(x) = {target}"
            )));
        }
    }
    let labels: Vec<String> = family.entries().map(|(t, _)| t.to_string()).collect();
    let mut hint_used = false;
    let sched = intersect_over(schedule, |eps| {
        let (a, hinted) = active_hull(family, x, eps, Some(&labels))?;
        hint_used |= hinted;
        Ok(a)
    })?;
    let lim = limit_parts(family, x)?;
    Ok(finish(sched, &lim.a0, "subdiff:active-hull", None, hint_used))
}

/// Three-term decomposition of `∂f(x)` under the continuity hypothesis:
/// the active part, the recession cone of the penalized part below the
/// activity gap, and the improper part.
pub fn subdifferential_split(
    family: &FunctionFamily,
    x: &[Rational],
    schedule: &EpsSchedule,
    scheme: &WeightScheme,
    exact_active: bool,
) -> Result<SetResult, SupError> {
    let tag = if exact_active { "subdiff:three-part-sum-exact-active" } else { "subdiff:three-part-sum" };
    family.check_point(x)?;
    require_continuity(family)?;
    if !sup_value(family, x).is_finite() {
        return Ok(not_finite(family, tag, Some(scheme)));
    }
    let n = family.dim();
    let lim = limit_parts(family, x)?;
    let exact = if exact_active { Some(active_set(family, x, &Rational::zero())?) } else { None };

    let mut hint_used = false;
    let part_a = intersect_over(schedule, |eps| {
        let (a, hinted) = active_hull(family, x, eps, exact.as_deref())?;
        hint_used |= hinted;
        Ok(a)
    })?;
    let a_stable = part_a.stabilized;
    let mut used = part_a.used.clone();
    let a_sched = part_a.set.clone();
    let a_final = part_a.set.intersect(&lim.a0).minimized();

    finite_value(family, x)?;
    let eps_star = below_activity_gap(family, x, schedule.last())?;
    if !used.contains(&eps_star) {
        used.push(eps_star.clone());
    }
    let comps = component_sets(family, x, &eps_star, scheme)?;
    let part_b = comps.b.recession_cone();

    let (c_sched, c_final, c_stable) = if family.improper().next().is_some() {
        let origin = Polyhedron::origin(n);
        let part_c = intersect_over(schedule, |eps| {
            let c = component_sets(family, x, eps, scheme)?;
            Ok(Polyhedron::hull_union(n, [&c.c, &origin]))
        })?;
        let fin = part_c.set.intersect(&lim.c_cone).minimized();
        (part_c.set, fin, part_c.stabilized)
    } else {
        (Polyhedron::origin(n), Polyhedron::origin(n), true)
    };

    let total = a_final.minkowski_sum(&part_b).minkowski_sum(&c_final).minimized();
    let before = a_sched.minkowski_sum(&part_b).minkowski_sum(&c_sched);
    let mut r = SetResult::new(total, tag, used, Some(scheme));
    r.stabilized = a_stable && c_stable;
    r.limit_closure = !r.set.set_equal(&before);
    r.hint_used = hint_used;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexfn::ConvexFunction;
    use crate::polyhedron::Halfspace;
    use crate::rational::{int, ivec};
    use crate::suprema::oracle_subdifferential;
    use crate::suprema::tests::ramp_family;

    fn abs_family() -> FunctionFamily {
        FunctionFamily::new(
            1,
            [
                ("+", ConvexFunction::affine(ivec(&[1]), int(0))),
                ("-", ConvexFunction::affine(ivec(&[-1]), int(0))),
            ],
        )
        .unwrap()
    }

    fn interval(lo: i64, hi: i64) -> Polyhedron {
        Polyhedron::from_vrep(vec![ivec(&[lo]), ivec(&[hi])], vec![], 1).unwrap()
    }

    fn improper_family() -> FunctionFamily {
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

    fn all_formulas(f: &FunctionFamily, x: &[Rational]) -> Vec<SetResult> {
        let s = EpsSchedule::default();
        let mut out = vec![
            subdifferential_sup(f, x, &s, &WeightScheme::Rho).unwrap(),
            subdifferential_active_normal(f, x, &s).unwrap(),
            subdifferential_split(f, x, &s, &WeightScheme::Rho, false).unwrap(),
            subdifferential_split(f, x, &s, &WeightScheme::Rho, true).unwrap(),
        ];
        if let Ok(b) = subdifferential_brondsted(f, x, &s) {
            out.push(b);
        }
        out
    }

    #[test]
    fn abs_at_zero() {
        let f = abs_family();
        for r in all_formulas(&f, &[int(0)]) {
            assert!(r.set.set_equal(&interval(-1, 1)), "{}", r.provenance.tag);
        }
        let r = subdifferential_sup(&f, &[int(0)], &EpsSchedule::default(), &WeightScheme::Rho).unwrap();
        assert!(r.stabilized);
        assert!(!r.limit_closure);
    }

    #[test]
    fn ramp_all_active() {
        let f = ramp_family(2);
        for r in all_formulas(&f, &[int(1)]) {
            assert!(r.set.set_equal(&interval(0, 2)), "{}", r.provenance.tag);
        }
        assert!(matches!(
            subdifferential_brondsted(&f, &[int(0)], &EpsSchedule::default()),
            Err(SupError::BrondstedHypothesis(_))
        ));
    }

    #[test]
    fn ramp_at_zero_needs_the_limit() {
        let f = ramp_family(2);
        let oracle = oracle_subdifferential(&f, &[int(0)]).unwrap();
        assert!(oracle.set_equal(&Polyhedron::origin(1)));
        for r in all_formulas(&f, &[int(0)]) {
            assert!(r.set.set_equal(&oracle), "{}", r.provenance.tag);
        }
    }

    #[test]
    fn improper_family_subdifferential() {
        let f = improper_family();
        let up_from_one = Polyhedron::from_vrep(vec![ivec(&[1])], vec![ivec(&[1])], 1).unwrap();
        for r in all_formulas(&f, &[int(0)]) {
            assert!(r.set.set_equal(&up_from_one), "{}", r.provenance.tag);
        }
    }

    #[test]
    fn restricted_boundary_point() {
        let below = Polyhedron::from_hrep(vec![Halfspace::new(ivec(&[1]), int(1))], 1).unwrap();
        let f = FunctionFamily::new(
            1,
            [("lin", ConvexFunction::affine(ivec(&[1]), int(0))), ("dom", ConvexFunction::indicator(below))],
        )
        .unwrap();
        let expected = Polyhedron::from_vrep(vec![ivec(&[1])], vec![ivec(&[1])], 1).unwrap();
        let r = subdifferential_active_normal(&f, &[int(1)], &EpsSchedule::default()).unwrap();
        assert!(r.set.set_equal(&expected));
        let r = subdifferential_sup(&f, &[int(1)], &EpsSchedule::default(), &WeightScheme::Rho).unwrap();
        assert!(r.set.set_equal(&expected));
    }

    #[test]
    fn value_outside_domain_gives_empty() {
        let below = Polyhedron::from_hrep(vec![Halfspace::new(ivec(&[1]), int(1))], 1).unwrap();
        let f = FunctionFamily::new(1, [("dom", ConvexFunction::indicator(below))]).unwrap();
        let r = subdifferential_sup(&f, &[int(2)], &EpsSchedule::default(), &WeightScheme::Rho).unwrap();
        assert!(r.set.is_empty());
        assert!(r.note.is_some());
    }
}

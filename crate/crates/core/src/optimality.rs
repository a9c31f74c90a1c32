//! Optimality certificates for `min f₀(x)` subject to `f_t(x) <= 0` over a
//! finite family of polyhedral constraints.
//!
//! A feasible point is either certified optimal (through the normal cone to
//! `dom f` or through a multiplier on `∂f(x)`) or refuted by an explicit
//! descent step that stays feasible.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::convexfn::{ConvexFunction, FunctionError};
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::polyhedron::{Halfspace, Polyhedron, VRep};
use crate::rational::{add, dot, fmt_rational, scaled, ExtReal, Rational};
use crate::suprema::{
    normal_cone_dom, oracle_normal_cone_dom, oracle_subdifferential, subdifferential_sup, sup_value,
    EpsSchedule, FunctionFamily, SupError, WeightScheme,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KktError {
    #[error("objective must be a proper function")]
    ImproperObjective,
    #[error("objective has dimension {objective}, constraints have dimension {constraints}")]
    DimensionMismatch { objective: usize, constraints: usize },
    #[error("point has dimension {found}, expected {expected}")]
    PointDimension { expected: usize, found: usize },
    #[error("point is not feasible")]
    Infeasible,
    #[error("Slater condition fails: no point of dom f₀ with sup_t f_t < 0")]
    NoSlaterPoint,
    #[error("continuity hypothesis fails: neither domain has interior points meeting the other")]
    Continuity,
    #[error("normal cone differs between ε = {0} and ε = {1}")]
    ConeMismatch(String, String),
    #[error("constraint `{0}` is not affine")]
    NotAffine(String),
    #[error("no certificate and no descent direction found")]
    Inconclusive,
    #[error(transparent)]
    Sup(#[from] SupError),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

impl KktError {
    /// Whether the error names a hypothesis the program or point fails.
    pub fn is_hypothesis(&self) -> bool {
        match self {
            KktError::Infeasible
            | KktError::NoSlaterPoint
            | KktError::Continuity
            | KktError::ImproperObjective
            | KktError::NotAffine(_) => true,
            KktError::Sup(e) => e.is_hypothesis(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvexProgram {
    objective: ConvexFunction,
    constraints: FunctionFamily,
}

impl ConvexProgram {
    pub fn new(objective: ConvexFunction, constraints: FunctionFamily) -> Result<Self, KktError> {
        if !objective.is_proper() {
            return Err(KktError::ImproperObjective);
        }
        if objective.dim() != constraints.dim() {
            return Err(KktError::DimensionMismatch {
                objective: objective.dim(),
                constraints: constraints.dim(),
            });
        }
        Ok(ConvexProgram { objective, constraints })
    }

    pub fn dim(&self) -> usize {
        self.constraints.dim()
    }

    pub fn objective(&self) -> &ConvexFunction {
        &self.objective
    }

    pub fn constraints(&self) -> &FunctionFamily {
        &self.constraints
    }

    fn check_point(&self, x: &[Rational]) -> Result<(), KktError> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(KktError::PointDimension { expected: self.dim(), found: x.len() })
        }
    }

    /// The feasible set intersected with `dom f₀`, as halfspaces.
    fn feasible_rows(&self) -> Vec<Halfspace> {
        let mut rows = Vec::new();
        for (_, f) in self.constraints.entries() {
            if f.is_proper() {
                for p in f.effective_pieces() {
                    rows.push(Halfspace::new(p.slope, p.offset));
                }
            }
            if let Some(d) = f.domain_set() {
                rows.extend(d.hrep_any().iter().cloned());
            }
        }
        if let Some(d) = self.objective.domain_set() {
            rows.extend(d.hrep_any().iter().cloned());
        }
        rows
    }
}

/// `ε`, a subgradient `g₀ ∈ ∂f₀(x)` and a normal `n ∈ N_{dom f}(x)` with
/// `g₀ + n = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsWitness {
    pub eps: Rational,
    pub subgradient: Vec<Rational>,
    pub normal: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KktCertificate {
    NormalCone {
        witnesses: Vec<EpsWitness>,
    },
    /// `λ g₀ + s = 0` with `g₀ ∈ ∂f₀(x)`, `s ∈ ∂f(x)`, `λ > 0`.
    Multiplier {
        lambda: Rational,
        subgradient: Vec<Rational>,
        s: Vec<Rational>,
    },
    /// `x + step·direction` is feasible and lowers the objective by `decrease`.
    Refutation {
        direction: Vec<Rational>,
        step: Rational,
        decrease: Rational,
    },
}

impl KktCertificate {
    pub fn kind(&self) -> &'static str {
        match self {
            KktCertificate::NormalCone { .. } => "normal_cone",
            KktCertificate::Multiplier { .. } => "multiplier",
            KktCertificate::Refutation { .. } => "refutation",
        }
    }

    pub fn certifies_optimality(&self) -> bool {
        !matches!(self, KktCertificate::Refutation { .. })
    }

    /// Re-checks the certificate against the program by exact substitution,
    /// using directly assembled subdifferentials and normal cones.
    pub fn verify(&self, prog: &ConvexProgram, x: &[Rational]) -> Result<bool, KktError> {
        prog.check_point(x)?;
        if !check_feasible(prog, x) {
            return Ok(false);
        }
        let zero = Rational::zero();
        match self {
            KktCertificate::NormalCone { witnesses } => {
                if witnesses.is_empty() {
                    return Ok(false);
                }
                let cone = oracle_normal_cone_dom(&prog.constraints, x)?;
                for w in witnesses {
                    let sums_to_zero = add(&w.subgradient, &w.normal).iter().all(Zero::is_zero);
                    if !sums_to_zero
                        || !cone.contains_point(&w.normal)
                        || !prog.objective.subgradient_membership(x, &zero, &w.subgradient)?
                    {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            KktCertificate::Multiplier { lambda, subgradient, s } => {
                if !lambda.is_positive() {
                    return Ok(false);
                }
                let identity = add(&scaled(subgradient, lambda), s).iter().all(Zero::is_zero);
                let sub_f = oracle_subdifferential(&prog.constraints, x)?;
                Ok(identity
                    && sub_f.contains_point(s)
                    && prog.objective.subgradient_membership(x, &zero, subgradient)?)
            }
            KktCertificate::Refutation { direction, step, decrease } => {
                if !step.is_positive() || !decrease.is_positive() {
                    return Ok(false);
                }
                let y = add(x, &scaled(direction, step));
                let (ExtReal::Finite(fx), ExtReal::Finite(fy)) =
                    (prog.objective.evaluate(x), prog.objective.evaluate(&y))
                else {
                    return Ok(false);
                };
                Ok(check_feasible(prog, &y) && fx - fy == *decrease)
            }
        }
    }
}

/// `sup_t f_t(x) <= 0` and `f₀(x) < +∞`.
pub fn check_feasible(prog: &ConvexProgram, x: &[Rational]) -> bool {
    if x.len() != prog.dim() {
        return false;
    }
    sup_value(&prog.constraints, x) <= ExtReal::zero() && prog.objective.evaluate(x) < ExtReal::PosInf
}

/// A point of `dom f₀` (and of every constraint domain) where every
/// constraint piece is strictly negative.
pub fn slater_point(prog: &ConvexProgram) -> Option<Vec<Rational>> {
    let n = prog.dim();
    let mut lp = LinearProgram::new(n + 1);
    lp.set_free_range(0..n);
    let with_margin = |normal: &[Rational], margin: bool| {
        let mut row = normal.to_vec();
        row.push(if margin { Rational::one() } else { Rational::zero() });
        row
    };
    for (_, f) in prog.constraints.entries() {
        if f.is_proper() {
            for p in f.effective_pieces() {
                lp.add_row(with_margin(&p.slope, true), Cmp::Le, p.offset.clone());
            }
        }
        if let Some(d) = f.domain_set() {
            for h in d.hrep_any() {
                lp.add_row(with_margin(&h.normal, false), Cmp::Le, h.offset.clone());
            }
        }
    }
    if let Some(d) = prog.objective.domain_set() {
        for h in d.hrep_any() {
            lp.add_row(with_margin(&h.normal, false), Cmp::Le, h.offset.clone());
        }
    }
    let mut cap = vec![Rational::zero(); n + 1];
    cap[n] = Rational::one();
    lp.add_row(cap.clone(), Cmp::Le, Rational::one());
    lp.maximize(cap);
    match lp.solve() {
        LpOutcome::Optimal { mut point, value } if value.is_positive() => {
            point.pop();
            Some(point)
        }
        _ => None,
    }
}

/// Whether `int(dom f₀)` meets `dom f` or `int(dom f)` meets `dom f₀`.
pub fn continuity_hypothesis(prog: &ConvexProgram) -> bool {
    let d0 = prog.objective.domain();
    let d = prog.constraints.domain();
    d0.interior_point_meeting(&d).is_some() || d.interior_point_meeting(&d0).is_some()
}

fn require_hypotheses(prog: &ConvexProgram, x: &[Rational]) -> Result<(), KktError> {
    prog.check_point(x)?;
    if !check_feasible(prog, x) {
        return Err(KktError::Infeasible);
    }
    if slater_point(prog).is_none() {
        return Err(KktError::NoSlaterPoint);
    }
    if !continuity_hypothesis(prog) {
        return Err(KktError::Continuity);
    }
    Ok(())
}

/// LP columns for the weights of `Σ η_i v_i + Σ κ_j r_j`.
struct Combination {
    vertices: Vec<usize>,
    rays: Vec<usize>,
}

fn combination(lp_cols: &mut usize, v: &VRep) -> Combination {
    let mut take = || {
        *lp_cols += 1;
        *lp_cols - 1
    };
    Combination {
        vertices: v.vertices.iter().map(|_| take()).collect(),
        rays: v.rays.iter().map(|_| take()).collect(),
    }
}

fn coordinate_terms(v: &VRep, c: &Combination, k: usize) -> Vec<(usize, Rational)> {
    v.vertices
        .iter()
        .zip(&c.vertices)
        .chain(v.rays.iter().zip(&c.rays))
        .map(|(g, &j)| (j, g[k].clone()))
        .collect()
}

fn evaluate_combination(point: &[Rational], v: &VRep, c: &Combination, n: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); n];
    for (g, &j) in v.vertices.iter().zip(&c.vertices).chain(v.rays.iter().zip(&c.rays)) {
        out = add(&out, &scaled(g, &point[j]));
    }
    out
}

/// `g ∈ P`, `m ∈ Q` with `g + m = 0`, if any.
fn opposite_pair(p: &Polyhedron, q: &Polyhedron) -> Option<(Vec<Rational>, Vec<Rational>)> {
    let n = p.dim();
    let (pv, qv) = (p.vrep(), q.vrep());
    if pv.vertices.is_empty() || qv.vertices.is_empty() {
        return None;
    }
    let mut cols = 0;
    let cp = combination(&mut cols, pv);
    let cq = combination(&mut cols, qv);
    let mut lp = LinearProgram::new(cols);
    for c in [&cp, &cq] {
        let ones: Vec<(usize, Rational)> = c.vertices.iter().map(|&j| (j, Rational::one())).collect();
        lp.add_terms(&ones, Cmp::Eq, Rational::one());
    }
    for k in 0..n {
        let mut row = coordinate_terms(pv, &cp, k);
        row.extend(coordinate_terms(qv, &cq, k));
        lp.add_terms(&row, Cmp::Eq, Rational::zero());
    }
    let outcome = lp.solve();
    let (point, _) = outcome.optimal()?;
    let g = evaluate_combination(point, pv, &cp, n);
    let m = evaluate_combination(point, qv, &cq, n);
    Some((g, m))
}

/// `λ > 0`, `g₀ ∈ P` and `s ∈ S` with `λ g₀ + s = 0`. The columns carry
/// `λ g₀` directly, so the LP is linear in `λ`. The largest `λ <= 1` is
/// preferred; failing that, the smallest `λ > 1`.
fn multiplier(p: &Polyhedron, s: &Polyhedron) -> Option<(Rational, Vec<Rational>, Vec<Rational>)> {
    let n = p.dim();
    let (pv, sv) = (p.vrep(), s.vrep());
    if pv.vertices.is_empty() || sv.vertices.is_empty() {
        return None;
    }
    let mut cols = 0;
    let cp = combination(&mut cols, pv);
    let cs = combination(&mut cols, sv);
    let lambda = cols;
    let mut lp = LinearProgram::new(cols + 1);
    let mut mass: Vec<(usize, Rational)> = cp.vertices.iter().map(|&j| (j, Rational::one())).collect();
    mass.push((lambda, -Rational::one()));
    lp.add_terms(&mass, Cmp::Eq, Rational::zero());
    let ones: Vec<(usize, Rational)> = cs.vertices.iter().map(|&j| (j, Rational::one())).collect();
    lp.add_terms(&ones, Cmp::Eq, Rational::one());
    for k in 0..n {
        let mut row = coordinate_terms(pv, &cp, k);
        row.extend(coordinate_terms(sv, &cs, k));
        lp.add_terms(&row, Cmp::Eq, Rational::zero());
    }
    let mut objective = vec![Rational::zero(); cols + 1];
    objective[lambda] = Rational::one();

    let mut capped = lp.clone();
    capped.add_terms(&[(lambda, Rational::one())], Cmp::Le, Rational::one());
    capped.maximize(objective.clone());
    let outcome = match capped.solve() {
        found @ LpOutcome::Optimal { .. } if found.optimal().is_some_and(|(_, v)| v.is_positive()) => found,
        _ => {
            lp.minimize(objective);
            lp.solve()
        }
    };
    let (point, value) = outcome.optimal()?;
    if !value.is_positive() {
        return None;
    }
    let g0 = scaled(&evaluate_combination(point, pv, &cp, n), &value.recip());
    let s = evaluate_combination(point, sv, &cs, n);
    Some((value.clone(), g0, s))
}

/// A direction `d` in the box `[-1, 1]^n` minimizing `max_{g ∈ ∂f₀(x)} ⟨g, d⟩`
/// over the cone polar to `normals`; `None` unless that value is negative.
fn descent_direction(sub0: &Polyhedron, normals: &Polyhedron) -> Option<Vec<Rational>> {
    let n = sub0.dim();
    let tau = n;
    let mut lp = LinearProgram::new(n + 1);
    lp.set_free_range(0..n + 1);
    let row = |g: &[Rational], with_tau: bool| {
        let mut r = g.to_vec();
        r.push(if with_tau { -Rational::one() } else { Rational::zero() });
        r
    };
    let v0 = sub0.vrep();
    for v in &v0.vertices {
        lp.add_row(row(v, true), Cmp::Le, Rational::zero());
    }
    for r in &v0.rays {
        lp.add_row(row(r, false), Cmp::Le, Rational::zero());
    }
    let vn = normals.vrep();
    for w in vn.vertices.iter().chain(&vn.rays) {
        lp.add_row(row(w, false), Cmp::Le, Rational::zero());
    }
    for k in 0..n {
        lp.add_terms(&[(k, Rational::one())], Cmp::Le, Rational::one());
        lp.add_terms(&[(k, Rational::one())], Cmp::Ge, -Rational::one());
    }
    let mut objective = vec![Rational::zero(); n + 1];
    objective[tau] = Rational::one();
    lp.minimize(objective);
    match lp.solve() {
        LpOutcome::Optimal { mut point, value } if value.is_negative() => {
            point.pop();
            Some(point)
        }
        _ => None,
    }
}

fn refute(
    prog: &ConvexProgram,
    x: &[Rational],
    sub0: &Polyhedron,
    normals: &Polyhedron,
) -> Result<KktCertificate, KktError> {
    let d = descent_direction(sub0, normals).ok_or(KktError::Inconclusive)?;
    let mut step = Rational::one();
    for h in prog.feasible_rows() {
        let rate = dot(&h.normal, &d);
        if rate.is_positive() {
            let room = (&h.offset - dot(&h.normal, x)) / &rate;
            if room < step {
                step = room;
            }
        }
    }
    if !step.is_positive() {
        return Err(KktError::Inconclusive);
    }
    let ExtReal::Finite(fx) = prog.objective.evaluate(x) else {
        return Err(KktError::Inconclusive);
    };
    let half = Rational::new(1.into(), 2.into());
    for _ in 0..64 {
        let y = add(x, &scaled(&d, &step));
        if let ExtReal::Finite(fy) = prog.objective.evaluate(&y) {
            if fy < fx {
                return Ok(KktCertificate::Refutation { direction: d, step, decrease: fx - fy });
            }
        }
        step *= &half;
    }
    Err(KktError::Inconclusive)
}

/// Certifies or refutes optimality of the feasible point `x`.
///
/// With `f(x) < 0` the test is `0 ∈ ∂f₀(x) + N_{dom f}(x)`, run at the first
/// two scheduled ε as a consistency check on the cone. With `f(x) = 0` that
/// test is tried first and then `0 ∈ λ ∂f₀(x) + ∂f(x)` for some `λ > 0`.
pub fn kkt_certify(
    prog: &ConvexProgram,
    x: &[Rational],
    schedule: &EpsSchedule,
) -> Result<KktCertificate, KktError> {
    require_hypotheses(prog, x)?;
    let family = &prog.constraints;
    let zero = Rational::zero();
    let sub0 = prog.objective.eps_subdifferential(x, &zero)?;

    let probes: Vec<&Rational> = schedule.values().iter().take(2).collect();
    let mut cone: Option<Polyhedron> = None;
    for eps in &probes {
        let next = normal_cone_dom(family, x, eps, &WeightScheme::Rho)?.set;
        if let Some(prev) = &cone {
            if !prev.set_equal(&next) {
                return Err(KktError::ConeMismatch(fmt_rational(probes[0]), fmt_rational(eps)));
            }
        }
        cone = Some(next);
    }
    let cone = cone.expect("nonempty schedule");

    if let Some((g0, normal)) = opposite_pair(&sub0, &cone) {
        let witnesses = probes
            .iter()
            .map(|eps| EpsWitness { eps: (*eps).clone(), subgradient: g0.clone(), normal: normal.clone() })
            .collect();
        return Ok(KktCertificate::NormalCone { witnesses });
    }

    if sup_value(family, x) == ExtReal::zero() {
        let s_set = subdifferential_sup(family, x, schedule, &WeightScheme::Rho)?.set;
        if let Some((lambda, subgradient, s)) = multiplier(&sub0, &s_set) {
            return Ok(KktCertificate::Multiplier { lambda, subgradient, s });
        }
        return refute(prog, x, &sub0, &hull_cone(&s_set));
    }
    refute(prog, x, &sub0, &cone)
}

/// The cone generated by a polyhedron's vertices and rays.
fn hull_cone(p: &Polyhedron) -> Polyhedron {
    let v = p.vrep();
    let mut rays = v.vertices.clone();
    rays.extend(v.rays.iter().cloned());
    Polyhedron::origin(p.dim()).hull_with_rays(&rays)
}

/// `min ⟨c, x⟩` subject to affine constraints.
pub fn silp_certify(
    c: &[Rational],
    constraints: &FunctionFamily,
    x: &[Rational],
    schedule: &EpsSchedule,
) -> Result<KktCertificate, KktError> {
    for (t, f) in constraints.entries() {
        if !matches!(f, ConvexFunction::Affine(_)) {
            return Err(KktError::NotAffine(t.to_string()));
        }
    }
    let prog = ConvexProgram::new(ConvexFunction::affine(c.to_vec(), Rational::zero()), constraints.clone())?;
    kkt_certify(&prog, x, schedule)
}

/// Optimal value and a minimizer, by the epigraph linear program.
/// Infeasible programs have value `+∞`, unbounded ones `-∞`.
pub fn oracle_solve(prog: &ConvexProgram) -> (ExtReal, Option<Vec<Rational>>) {
    let n = prog.dim();
    let z = n;
    let mut lp = LinearProgram::new(n + 1);
    lp.set_free_range(0..n + 1);
    for p in prog.objective.effective_pieces() {
        let mut row = p.slope.clone();
        row.push(-Rational::one());
        lp.add_row(row, Cmp::Le, p.offset.clone());
    }
    for h in prog.feasible_rows() {
        let mut row = h.normal.clone();
        row.push(Rational::zero());
        lp.add_row(row, Cmp::Le, h.offset.clone());
    }
    let mut objective = vec![Rational::zero(); n + 1];
    objective[z] = Rational::one();
    lp.minimize(objective);
    match lp.solve() {
        LpOutcome::Optimal { mut point, value } => {
            point.pop();
            (ExtReal::Finite(value), Some(point))
        }
        LpOutcome::Infeasible => (ExtReal::PosInf, None),
        LpOutcome::Unbounded => (ExtReal::NegInf, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexfn::AffinePiece;
    use crate::rational::{int, ivec};

    fn abs() -> ConvexFunction {
        ConvexFunction::max_affine(vec![
            AffinePiece::new(ivec(&[1]), int(0)),
            AffinePiece::new(ivec(&[-1]), int(0)),
        ])
        .unwrap()
    }

    fn line_family(ts: &[i64]) -> FunctionFamily {
        FunctionFamily::new(
            1,
            ts.iter().map(|&t| (t.to_string(), ConvexFunction::affine(ivec(&[t]), int(t)))),
        )
        .unwrap()
    }

    fn abs_below_one() -> ConvexProgram {
        ConvexProgram::new(abs(), line_family(&[1])).unwrap()
    }

    fn silp() -> ConvexProgram {
        ConvexProgram::new(ConvexFunction::affine(ivec(&[-1]), int(0)), line_family(&[1, 2])).unwrap()
    }

    #[test]
    fn feasibility() {
        let p = abs_below_one();
        assert!(check_feasible(&p, &[int(0)]));
        assert!(!check_feasible(&p, &[int(2)]));
        assert!(check_feasible(&p, &[int(1)]));
    }

    #[test]
    fn slater_points() {
        let p = abs_below_one();
        let x0 = slater_point(&p).unwrap();
        assert!(x0[0] < int(1));
        let pinned = FunctionFamily::new(
            1,
            [
                ("up", ConvexFunction::affine(ivec(&[1]), int(0))),
                ("down", ConvexFunction::affine(ivec(&[-1]), int(0))),
            ],
        )
        .unwrap();
        let p = ConvexProgram::new(abs(), pinned).unwrap();
        assert!(slater_point(&p).is_none());
        assert_eq!(kkt_certify(&p, &[int(0)], &EpsSchedule::default()), Err(KktError::NoSlaterPoint));
    }

    #[test]
    fn continuity_checks() {
        assert!(continuity_hypothesis(&abs_below_one()));
        let line = |c: i64| {
            Polyhedron::from_hrep(
                vec![Halfspace::new(ivec(&[0, 1]), int(c)), Halfspace::new(ivec(&[0, -1]), int(-c))],
                2,
            )
            .unwrap()
        };
        let cons = FunctionFamily::new(2, [("d", ConvexFunction::indicator(line(1)))]).unwrap();
        let p = ConvexProgram::new(ConvexFunction::indicator(line(0)), cons).unwrap();
        assert!(!continuity_hypothesis(&p));
        let segment = Polyhedron::from_vrep(vec![ivec(&[0, 0]), ivec(&[1, 0])], vec![], 2).unwrap();
        let cons = FunctionFamily::new(2, [("c", ConvexFunction::affine(ivec(&[1, 1]), int(5)))]).unwrap();
        let p = ConvexProgram::new(ConvexFunction::indicator(segment), cons).unwrap();
        assert!(continuity_hypothesis(&p));
    }

    #[test]
    fn interior_optimum_is_a_normal_cone_case() {
        let p = abs_below_one();
        let c = kkt_certify(&p, &[int(0)], &EpsSchedule::default()).unwrap();
        assert_eq!(c.kind(), "normal_cone");
        assert!(c.verify(&p, &[int(0)]).unwrap());
        assert_eq!(oracle_solve(&p), (ExtReal::Finite(int(0)), Some(ivec(&[0]))));
    }

    #[test]
    fn boundary_optimum_has_unit_multiplier() {
        let p = silp();
        let c = kkt_certify(&p, &[int(1)], &EpsSchedule::default()).unwrap();
        match &c {
            KktCertificate::Multiplier { lambda, .. } => assert_eq!(lambda, &int(1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(c.verify(&p, &[int(1)]).unwrap());
        assert_eq!(oracle_solve(&p).0, ExtReal::Finite(int(-1)));
    }

    #[test]
    fn suboptimal_point_is_refuted() {
        let p = silp();
        let c = kkt_certify(&p, &[int(0)], &EpsSchedule::default()).unwrap();
        match &c {
            KktCertificate::Refutation { direction, .. } => assert!(direction[0].is_positive()),
            other => panic!("unexpected {other:?}"),
        }
        assert!(c.verify(&p, &[int(0)]).unwrap());
    }

    #[test]
    fn silp_variants() {
        let fam = line_family(&[1, 2]);
        let s = EpsSchedule::default();
        let c = silp_certify(&ivec(&[-1]), &fam, &[int(1)], &s).unwrap();
        assert!(matches!(c, KktCertificate::Multiplier { ref lambda, .. } if *lambda == int(1)));
        let c = silp_certify(&ivec(&[1]), &fam, &[int(1)], &s).unwrap();
        match c {
            KktCertificate::Refutation { direction, .. } => assert!(direction[0].is_negative()),
            other => panic!("unexpected {other:?}"),
        }
        let c = silp_certify(&ivec(&[0]), &fam, &[int(1)], &s).unwrap();
        assert!(c.certifies_optimality());
        let bad = FunctionFamily::new(1, [("m", abs())]).unwrap();
        assert!(matches!(silp_certify(&ivec(&[1]), &bad, &[int(0)], &s), Err(KktError::NotAffine(_))));
        let unbounded = ConvexProgram::new(ConvexFunction::affine(ivec(&[1]), int(0)), fam).unwrap();
        assert_eq!(oracle_solve(&unbounded), (ExtReal::NegInf, None));
    }

    #[test]
    fn infeasible_point_is_refused() {
        let p = abs_below_one();
        assert_eq!(kkt_certify(&p, &[int(3)], &EpsSchedule::default()), Err(KktError::Infeasible));
    }
}

//! Normal cones to the domain and subdifferentials of `f = sup_t f_t` for
//! finite families of polyhedral convex functions.
//!
//! Every routine here works from the per-index pieces (ε-subdifferentials,
//! ε-normal sets, penalization weights) and never from an assembled `f`,
//! except the `oracle_*` functions which do exactly that as an independent
//! check.

mod decompose;
mod normal_cone;
mod subdiff;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::convexfn::{ConvexFunction, FunctionError};
use crate::polyhedron::{PolyError, Polyhedron, MAX_DIM};
use crate::rational::{rat, ExtReal, Rational};

pub use decompose::{caratheodory_decompose, CaratheodoryDecomposition};
pub use normal_cone::{
    normal_cone_dom, normal_cone_dom_parameterfree, normal_cone_dom_proper, normal_cone_dom_scaled_limit,
    normal_cone_intersection, normal_cone_split, NormalConeSplit,
};
pub use subdiff::{
    subdifferential_active_normal, subdifferential_brondsted, subdifferential_split, subdifferential_sup,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SupError {
    #[error("function family must have at least one entry")]
    EmptyFamily,
    #[error("entry `{label}` has dimension {found}, family dimension is {expected}")]
    EntryDimension { label: String, expected: usize, found: usize },
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("point has dimension {found}, expected {expected}")]
    PointDimension { expected: usize, found: usize },
    #[error("active set undefined: f(x) is not finite")]
    ActiveSetUndefined,
    #[error("improper entry `{0}` present; use normal_cone_dom")]
    ImproperEntry(String),
    #[error("invalid weight scheme: {0}")]
    InvalidScheme(String),
    #[error("point is outside dom f")]
    NotInDomain,
    #[error("point is outside set number {0}")]
    NotInSet(usize),
    #[error("Brøndsted hypothesis violated: {0}")]
    BrondstedHypothesis(String),
    #[error("continuity hypothesis not verified: the entry domains have no common interior point")]
    ContinuityHypothesis,
    #[error("not an ε-subgradient")]
    NotSubgradient,
    #[error("no decomposition with support at most {0} was found")]
    DecompositionNotFound(usize),
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("schedule must be a nonempty strictly decreasing list of positive values")]
    BadSchedule,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

impl SupError {
    /// Whether the error reports a theorem hypothesis the input fails, as
    /// opposed to malformed input.
    pub fn is_hypothesis(&self) -> bool {
        matches!(
            self,
            SupError::BrondstedHypothesis(_)
                | SupError::ContinuityHypothesis
                | SupError::ImproperEntry(_)
                | SupError::InvalidScheme(_)
                | SupError::NotInDomain
                | SupError::NotInSet(_)
                | SupError::ActiveSetUndefined
                | SupError::NotSubgradient
        )
    }
}

/// A finite indexed family `{f_t}` with optional declared recession
/// directions for truncated infinite families.
#[derive(Clone, Debug)]
pub struct FunctionFamily {
    dim: usize,
    entries: BTreeMap<String, ConvexFunction>,
    closure_hints: Vec<Vec<Rational>>,
}

impl FunctionFamily {
    pub fn new<I, S>(dim: usize, entries: I) -> Result<Self, SupError>
    where
        I: IntoIterator<Item = (S, ConvexFunction)>,
        S: Into<String>,
    {
        if dim > MAX_DIM {
            return Err(SupError::DimensionTooLarge(dim));
        }
        let mut map = BTreeMap::new();
        for (label, f) in entries {
            let label = label.into();
            if f.dim() != dim {
                return Err(SupError::EntryDimension { label, expected: dim, found: f.dim() });
            }
            map.insert(label, f);
        }
        if map.is_empty() {
            return Err(SupError::EmptyFamily);
        }
        Ok(FunctionFamily { dim, entries: map, closure_hints: Vec::new() })
    }

    pub fn with_closure_hints(mut self, hints: Vec<Vec<Rational>>) -> Result<Self, SupError> {
        for h in &hints {
            if h.len() != self.dim {
                return Err(SupError::EntryDimension {
                    label: "closure_hints".into(),
                    expected: self.dim,
                    found: h.len(),
                });
            }
        }
        self.closure_hints = hints.into_iter().filter(|h| h.iter().any(|c| !c.is_zero())).collect();
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &ConvexFunction)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn get(&self, label: &str) -> Option<&ConvexFunction> {
        self.entries.get(label)
    }

    pub fn closure_hints(&self) -> &[Vec<Rational>] {
        &self.closure_hints
    }

    pub fn has_hints(&self) -> bool {
        !self.closure_hints.is_empty()
    }

    pub fn proper(&self) -> impl Iterator<Item = (&str, &ConvexFunction)> {
        self.entries().filter(|(_, f)| f.is_proper())
    }

    pub fn improper(&self) -> impl Iterator<Item = (&str, &ConvexFunction)> {
        self.entries().filter(|(_, f)| !f.is_proper())
    }

    pub fn all_proper(&self) -> bool {
        self.entries.values().all(ConvexFunction::is_proper)
    }

    pub(crate) fn check_point(&self, x: &[Rational]) -> Result<(), SupError> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(SupError::PointDimension { expected: self.dim, found: x.len() })
        }
    }

    /// `∩_t dom f_t`.
    pub fn domain(&self) -> Polyhedron {
        let mut acc: Option<Polyhedron> = None;
        for f in self.entries.values() {
            if let Some(d) = f.domain_set() {
                acc = Some(match acc {
                    None => d.clone(),
                    Some(a) => a.intersect(d),
                });
            }
        }
        acc.unwrap_or_else(|| Polyhedron::whole(self.dim))
    }

    pub fn domain_contains(&self, x: &[Rational]) -> bool {
        self.entries.values().all(|f| f.domain_set().is_none_or(|d| d.contains_point(x)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightScheme {
    Rho,
    Unit,
    Custom(BTreeMap<String, Rational>),
}

impl WeightScheme {
    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::Rho => "rho",
            WeightScheme::Unit => "unit",
            WeightScheme::Custom(_) => "custom",
        }
    }
}

/// Decreasing positive ε values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsSchedule(Vec<Rational>);

impl EpsSchedule {
    pub fn new(values: Vec<Rational>) -> Result<Self, SupError> {
        if values.is_empty()
            || !values[0].is_positive()
            || values.windows(2).any(|w| w[1] >= w[0] || !w[1].is_positive())
        {
            return Err(SupError::BadSchedule);
        }
        Ok(EpsSchedule(values))
    }

    /// `ε_k = ε₀ 2^{-k}` for `k < depth`.
    pub fn geometric(eps0: Rational, depth: usize) -> Result<Self, SupError> {
        let mut v = Vec::with_capacity(depth);
        let mut e = eps0;
        for _ in 0..depth {
            v.push(e.clone());
            e /= Rational::from_integer(2.into());
        }
        Self::new(v)
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn first(&self) -> &Rational {
        &self.0[0]
    }

    pub fn last(&self) -> &Rational {
        self.0.last().expect("nonempty schedule")
    }
}

impl Default for EpsSchedule {
    fn default() -> Self {
        Self::geometric(Rational::one(), 8).expect("valid default schedule")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certification {
    Equal,
    Mismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    /// Which characterization produced the set.
    pub tag: String,
    pub eps: Vec<Rational>,
    pub scheme: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SetResult {
    pub set: Polyhedron,
    pub provenance: Provenance,
    /// Two successive schedule refinements agreed.
    pub stabilized: bool,
    pub certified: Option<Certification>,
    pub hint_used: bool,
    /// The ε → 0 limit set removed points the finite schedule kept.
    pub limit_closure: bool,
    pub note: Option<String>,
}

impl SetResult {
    pub(crate) fn new(set: Polyhedron, tag: &str, eps: Vec<Rational>, scheme: Option<&WeightScheme>) -> Self {
        SetResult {
            set,
            provenance: Provenance {
                tag: tag.to_string(),
                eps,
                scheme: scheme.map(|s| s.name().to_string()),
            },
            stabilized: true,
            certified: None,
            hint_used: false,
            limit_closure: false,
            note: None,
        }
    }

    /// Compares against an oracle set. Results relying on closure hints are
    /// never certified.
    pub fn certify(mut self, oracle: &Polyhedron) -> Self {
        self.certified = if self.hint_used {
            None
        } else if self.set.set_equal(oracle) {
            Some(Certification::Equal)
        } else {
            Some(Certification::Mismatch)
        };
        self
    }
}

impl fmt::Display for SetResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.set.describe(), self.provenance.tag)
    }
}

pub fn sup_value(family: &FunctionFamily, x: &[Rational]) -> ExtReal {
    family.entries.values().map(|f| f.evaluate(x)).max().expect("nonempty family")
}

pub(crate) fn finite_value(family: &FunctionFamily, x: &[Rational]) -> Result<Rational, SupError> {
    family.check_point(x)?;
    match sup_value(family, x) {
        ExtReal::Finite(v) => Ok(v),
        _ => Err(SupError::ActiveSetUndefined),
    }
}

/// `T_ε(x) = {t proper : f_t(x) >= f(x) - ε}`; `ε = 0` gives the exactly
/// active indices.
pub fn active_set(family: &FunctionFamily, x: &[Rational], eps: &Rational) -> Result<Vec<String>, SupError> {
    if eps.is_negative() {
        return Err(SupError::NonPositiveEpsilon);
    }
    let fx = finite_value(family, x)?;
    let floor = ExtReal::Finite(&fx - eps);
    Ok(family.proper().filter(|(_, f)| f.evaluate(x) >= floor).map(|(t, _)| t.to_string()).collect())
}

/// The closure hints that bear on `x` at level `ε`. A hint `h` declares a
/// recession direction of `t ↦ ∂f_t` past the truncation, so it applies only
/// when an entry reaching furthest along `h`, by `σ_{∂_ε f_t(x)}(h)`, is
/// ε-active. A point where `f` is not finite takes no hints.
pub(crate) fn applicable_hints(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
) -> Result<Vec<Vec<Rational>>, SupError> {
    if !family.has_hints() || !sup_value(family, x).is_finite() {
        return Ok(Vec::new());
    }
    let active = active_set(family, x, eps)?;
    let subs = family
        .proper()
        .map(|(t, f)| Ok((active.iter().any(|s| s == t), f.eps_subdifferential(x, eps)?)))
        .collect::<Result<Vec<_>, SupError>>()?;
    let mut out = Vec::new();
    for h in &family.closure_hints {
        let reach: Vec<(bool, ExtReal)> = subs.iter().map(|(a, d)| (*a, d.support_value(h))).collect();
        let Some(top) = reach.iter().map(|(_, s)| s).max().cloned() else {
            continue;
        };
        if reach.iter().any(|(a, s)| *a && *s == top) {
            out.push(h.clone());
        }
    }
    Ok(out)
}

/// Penalization weights: 1 on `T_ε(x)`, `-ε / (2 f_t(x) - 2 f(x) + ε)` elsewhere.
pub fn rho_weights(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
) -> Result<BTreeMap<String, Rational>, SupError> {
    if !eps.is_positive() {
        return Err(SupError::NonPositiveEpsilon);
    }
    let fx = finite_value(family, x)?;
    let two = Rational::from_integer(2.into());
    let mut out = BTreeMap::new();
    for (t, f) in family.proper() {
        let ft = f.evaluate(x);
        let ft = ft.finite().expect("proper entry finite where f is finite");
        let w = if *ft >= &fx - eps { Rational::one() } else { -eps / (&two * ft - &two * &fx + eps) };
        out.insert(t.to_string(), w);
    }
    Ok(out)
}

/// Weights `α_t` on the proper indices, checked against `α_t >= ρ_{t,ε}`
/// and positivity.
pub fn scheme_weights(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
    scheme: &WeightScheme,
) -> Result<BTreeMap<String, Rational>, SupError> {
    if family.proper().next().is_none() {
        return Ok(BTreeMap::new());
    }
    let rho = rho_weights(family, x, eps)?;
    match scheme {
        WeightScheme::Rho => Ok(rho),
        WeightScheme::Unit => Ok(rho.into_keys().map(|k| (k, Rational::one())).collect()),
        WeightScheme::Custom(map) => {
            if family.has_hints() {
                return Err(SupError::InvalidScheme(
                    "custom weights on a family with closure hints: inf α_t f_t(x) > -inf cannot be verified"
                        .into(),
                ));
            }
            let mut out = BTreeMap::new();
            for (t, r) in rho {
                let a = map
                    .get(&t)
                    .ok_or_else(|| SupError::InvalidScheme(format!("no weight for index `{t}`")))?;
                if !a.is_positive() {
                    return Err(SupError::InvalidScheme(format!("weight of `{t}` must be positive")));
                }
                if *a < r {
                    return Err(SupError::InvalidScheme(format!(
                        "weight of `{t}` is below ρ = {}",
                        crate::rational::fmt_rational(&r)
                    )));
                }
                out.insert(t, a.clone());
            }
            Ok(out)
        }
    }
}

/// The three component sets at one ε.
#[derive(Clone, Debug)]
pub struct ComponentSets {
    /// Hull of `∂_ε f_t(x)` over the ε-active indices, with any closure hints.
    pub a: Polyhedron,
    /// Hull of `∂_ε(α_t f_t)(x)` over the remaining proper indices.
    pub b: Polyhedron,
    /// Hull of the ε-normal sets to the improper domains.
    pub c: Polyhedron,
    pub hint_used: bool,
}

pub fn component_sets(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
    scheme: &WeightScheme,
) -> Result<ComponentSets, SupError> {
    family.check_point(x)?;
    if !eps.is_positive() {
        return Err(SupError::NonPositiveEpsilon);
    }
    let n = family.dim;
    let (a, b) = if family.proper().next().is_some() {
        let active = active_set(family, x, eps)?;
        let alpha = scheme_weights(family, x, eps, scheme)?;
        let mut a_parts = Vec::new();
        let mut b_parts = Vec::new();
        for (t, f) in family.proper() {
            if active.iter().any(|s| s == t) {
                a_parts.push(f.eps_subdifferential(x, eps)?);
            } else {
                b_parts.push(f.eps_subdifferential_scaled(&alpha[t], x, eps)?);
            }
        }
        (Polyhedron::hull_union(n, &a_parts), Polyhedron::hull_union(n, &b_parts))
    } else {
        (Polyhedron::empty(n), Polyhedron::empty(n))
    };
    let c_parts = improper_normal_sets(family, x, eps)?;
    let hints = applicable_hints(family, x, eps)?;
    let hint_used = !hints.is_empty() && !a.is_empty();
    Ok(ComponentSets { a: a.hull_with_rays(&hints), b, c: Polyhedron::hull_union(n, &c_parts), hint_used })
}

pub(crate) fn improper_normal_sets(
    family: &FunctionFamily,
    x: &[Rational],
    eps: &Rational,
) -> Result<Vec<Polyhedron>, SupError> {
    let mut out = Vec::new();
    for (_, f) in family.improper() {
        out.push(f.domain().eps_normal_set(x, eps)?);
    }
    Ok(out)
}

/// `f` assembled as a single function: all effective pieces of the proper
/// entries on the intersection of every domain. `None` if no entry is proper.
pub fn assembled_function(family: &FunctionFamily) -> Option<ConvexFunction> {
    let mut pieces = Vec::new();
    for (_, f) in family.proper() {
        pieces.extend(f.effective_pieces());
    }
    if pieces.is_empty() {
        return None;
    }
    pieces.sort();
    pieces.dedup();
    let has_domain = family.entries.values().any(|f| f.domain_set().is_some());
    if !has_domain {
        return Some(ConvexFunction::MaxAffine(pieces));
    }
    Some(ConvexFunction::Restricted { pieces, domain: family.domain() })
}

/// `N_{dom f}(x)` straight from the intersected domain.
pub fn oracle_normal_cone_dom(family: &FunctionFamily, x: &[Rational]) -> Result<Polyhedron, SupError> {
    family.check_point(x)?;
    if !family.domain_contains(x) {
        return Err(SupError::NotInDomain);
    }
    Ok(family.domain().eps_normal_set(x, &Rational::zero())?)
}

/// `∂f(x)` of the assembled function; empty unless `f(x)` is finite.
pub fn oracle_subdifferential(family: &FunctionFamily, x: &[Rational]) -> Result<Polyhedron, SupError> {
    family.check_point(x)?;
    if !sup_value(family, x).is_finite() {
        return Ok(Polyhedron::empty(family.dim));
    }
    let f = assembled_function(family).expect("finite value implies a proper entry");
    Ok(f.eps_subdifferential(x, &Rational::zero())?)
}

/// An ε small enough that `T_ε(x) = T(x)`: half the distance from `f(x)`
/// to the best non-active value, capped by `cap`.
pub(crate) fn below_activity_gap(
    family: &FunctionFamily,
    x: &[Rational],
    cap: &Rational,
) -> Result<Rational, SupError> {
    let fx = finite_value(family, x)?;
    let mut eps = cap.clone();
    for (_, f) in family.proper() {
        if let ExtReal::Finite(v) = f.evaluate(x) {
            if v < fx {
                let half = (&fx - &v) * rat(1, 2);
                if half < eps {
                    eps = half;
                }
            }
        }
    }
    Ok(eps)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::convexfn::AffinePiece;
    use crate::rational::{int, ivec};

    pub(crate) fn ramp_family(max_t: i64) -> FunctionFamily {
        FunctionFamily::new(
            1,
            (0..=max_t).map(|t| (t.to_string(), ConvexFunction::affine(ivec(&[t]), int(t)))),
        )
        .unwrap()
    }

    #[test]
    fn sup_values() {
        let f = ramp_family(2);
        assert_eq!(sup_value(&f, &[int(0)]), ExtReal::Finite(int(0)));
        assert_eq!(sup_value(&f, &[int(2)]), ExtReal::Finite(int(2)));
        let imp =
            FunctionFamily::new(1, [("d", ConvexFunction::improper(Polyhedron::whole(1)).unwrap())]).unwrap();
        assert_eq!(sup_value(&imp, &[int(0)]), ExtReal::NegInf);
    }

    #[test]
    fn active_sets_and_weights() {
        let f = ramp_family(2);
        assert_eq!(active_set(&f, &[int(0)], &int(1)).unwrap(), vec!["0", "1"]);
        assert_eq!(active_set(&f, &[int(0)], &int(3)).unwrap().len(), 3);
        assert_eq!(active_set(&f, &[int(1)], &rat(1, 10)).unwrap().len(), 3);
        let f10 = ramp_family(10);
        let w = rho_weights(&f10, &[int(0)], &int(1)).unwrap();
        assert_eq!(w["2"], rat(1, 3));
        assert_eq!(w["10"], rat(1, 19));
        assert_eq!(w["0"], int(1));
        assert_eq!(w["1"], int(1));
    }

    #[test]
    fn ramp_components() {
        let f = ramp_family(2);
        let c = component_sets(&f, &[int(0)], &int(1), &WeightScheme::Rho).unwrap();
        let unit = Polyhedron::from_vrep(vec![ivec(&[0]), ivec(&[1])], vec![], 1).unwrap();
        assert!(c.a.set_equal(&unit));
        assert!(c.b.set_equal(&Polyhedron::point(vec![rat(2, 3)])));
        assert!(c.c.is_empty());
    }

    #[test]
    fn improper_component() {
        let down =
            Polyhedron::from_hrep(vec![crate::polyhedron::Halfspace::new(ivec(&[1]), int(0))], 1).unwrap();
        let f = FunctionFamily::new(
            1,
            [
                ("lin", ConvexFunction::affine(ivec(&[1]), int(0))),
                ("imp", ConvexFunction::improper(down).unwrap()),
            ],
        )
        .unwrap();
        let c = component_sets(&f, &[int(0)], &int(1), &WeightScheme::Rho).unwrap();
        let up = Polyhedron::from_vrep(vec![ivec(&[0])], vec![ivec(&[1])], 1).unwrap();
        assert!(c.c.set_equal(&up));
        assert!(c.b.is_empty());
    }

    #[test]
    fn custom_weights_are_validated() {
        let f = ramp_family(2);
        let low: BTreeMap<String, Rational> = [("0", int(1)), ("1", int(1)), ("2", rat(1, 4))]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert!(matches!(
            scheme_weights(&f, &[int(0)], &int(1), &WeightScheme::Custom(low)),
            Err(SupError::InvalidScheme(_))
        ));
        let ok: BTreeMap<String, Rational> = [("0", int(2)), ("1", int(1)), ("2", rat(1, 2))]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert!(scheme_weights(&f, &[int(0)], &int(1), &WeightScheme::Custom(ok.clone())).is_ok());
        let hinted = ramp_family(2).with_closure_hints(vec![ivec(&[1])]).unwrap();
        assert!(scheme_weights(&hinted, &[int(0)], &int(1), &WeightScheme::Custom(ok)).is_err());
    }

    #[test]
    fn oracles() {
        let f = ramp_family(2);
        assert!(oracle_normal_cone_dom(&f, &[int(0)]).unwrap().set_equal(&Polyhedron::origin(1)));
        let s = oracle_subdifferential(&f, &[int(1)]).unwrap();
        assert!(s.set_equal(&Polyhedron::from_vrep(vec![ivec(&[0]), ivec(&[2])], vec![], 1).unwrap()));
        let abs = FunctionFamily::new(
            1,
            [
                ("+", ConvexFunction::affine(ivec(&[1]), int(0))),
                ("-", ConvexFunction::MaxAffine(vec![AffinePiece::new(ivec(&[-1]), int(0))])),
            ],
        )
        .unwrap();
        let s = oracle_subdifferential(&abs, &[int(0)]).unwrap();
        assert!(s.set_equal(&Polyhedron::from_vrep(vec![ivec(&[-1]), ivec(&[1])], vec![], 1).unwrap()));
    }

    #[test]
    fn schedules() {
        let s = EpsSchedule::default();
        assert_eq!(s.values().len(), 8);
        assert_eq!(s.last(), &rat(1, 128));
        assert!(EpsSchedule::new(vec![int(1), int(1)]).is_err());
        assert!(EpsSchedule::new(vec![]).is_err());
    }
}

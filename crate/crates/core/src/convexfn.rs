//! Polyhedral lower semicontinuous convex functions.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::polyhedron::{Halfspace, PolyError, Polyhedron, VRep};
use crate::rational::{dot, is_zero_vec, zeros, ExtReal, Rational};

/// `x ↦ ⟨slope, x⟩ - offset`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffinePiece {
    pub slope: Vec<Rational>,
    pub offset: Rational,
}

impl AffinePiece {
    pub fn new(slope: Vec<Rational>, offset: Rational) -> Self {
        AffinePiece { slope, offset }
    }

    pub fn constant(dim: usize, value: Rational) -> Self {
        AffinePiece { slope: zeros(dim), offset: -value }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.slope, x) - &self.offset
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctionError {
    #[error("max-affine function needs at least one piece")]
    NoPieces,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("restricted function needs a nonempty domain")]
    EmptyDomain,
    #[error("conjugate of improper function not supported")]
    ImproperConjugate,
    #[error("epsilon must be nonnegative")]
    NegativeEpsilon,
    #[error("scaling factor must be positive")]
    NonPositiveScale,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Debug)]
pub enum ConvexFunction {
    Affine(AffinePiece),
    MaxAffine(Vec<AffinePiece>),
    /// Max of the pieces (zero when there are none) plus the indicator of `domain`.
    Restricted {
        pieces: Vec<AffinePiece>,
        domain: Polyhedron,
    },
    Indicator(Polyhedron),
    /// `-inf` on the domain and `+inf` elsewhere.
    ImproperNegInf(Polyhedron),
}

fn same_dim(expected: usize, found: usize) -> Result<(), FunctionError> {
    if expected == found {
        Ok(())
    } else {
        Err(FunctionError::DimensionMismatch { expected, found })
    }
}

impl ConvexFunction {
    pub fn affine(slope: Vec<Rational>, offset: Rational) -> Self {
        ConvexFunction::Affine(AffinePiece::new(slope, offset))
    }

    pub fn max_affine(pieces: Vec<AffinePiece>) -> Result<Self, FunctionError> {
        let dim = pieces.first().ok_or(FunctionError::NoPieces)?.slope.len();
        for p in &pieces {
            same_dim(dim, p.slope.len())?;
        }
        Ok(ConvexFunction::MaxAffine(pieces))
    }

    pub fn restricted(pieces: Vec<AffinePiece>, domain: Polyhedron) -> Result<Self, FunctionError> {
        for p in &pieces {
            same_dim(domain.dim(), p.slope.len())?;
        }
        if domain.is_empty() {
            return Err(FunctionError::EmptyDomain);
        }
        Ok(ConvexFunction::Restricted { pieces, domain })
    }

    pub fn indicator(domain: Polyhedron) -> Self {
        ConvexFunction::Indicator(domain)
    }

    pub fn improper(domain: Polyhedron) -> Result<Self, FunctionError> {
        if domain.is_empty() {
            return Err(FunctionError::EmptyDomain);
        }
        Ok(ConvexFunction::ImproperNegInf(domain))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFunction::Affine(p) => p.slope.len(),
            ConvexFunction::MaxAffine(ps) => ps[0].slope.len(),
            ConvexFunction::Restricted { domain, .. }
            | ConvexFunction::Indicator(domain)
            | ConvexFunction::ImproperNegInf(domain) => domain.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConvexFunction::Affine(_) => "affine",
            ConvexFunction::MaxAffine(_) => "max_affine",
            ConvexFunction::Restricted { .. } => "restricted",
            ConvexFunction::Indicator(_) => "indicator",
            ConvexFunction::ImproperNegInf(_) => "improper",
        }
    }

    /// The explicit domain polyhedron, if the function has one.
    pub fn domain_set(&self) -> Option<&Polyhedron> {
        match self {
            ConvexFunction::Affine(_) | ConvexFunction::MaxAffine(_) => None,
            ConvexFunction::Restricted { domain, .. }
            | ConvexFunction::Indicator(domain)
            | ConvexFunction::ImproperNegInf(domain) => Some(domain),
        }
    }

    pub fn domain(&self) -> Polyhedron {
        match self.domain_set() {
            Some(d) => d.clone(),
            None => Polyhedron::whole(self.dim()),
        }
    }

    /// Affine pieces whose maximum gives the function on its domain. An
    /// indicator contributes the zero piece; an improper function has none.
    pub fn effective_pieces(&self) -> Vec<AffinePiece> {
        let dim = self.dim();
        match self {
            ConvexFunction::Affine(p) => vec![p.clone()],
            ConvexFunction::MaxAffine(ps) => ps.clone(),
            ConvexFunction::Restricted { pieces, .. } if !pieces.is_empty() => pieces.clone(),
            ConvexFunction::Restricted { .. } | ConvexFunction::Indicator(_) => {
                vec![AffinePiece::constant(dim, Rational::zero())]
            }
            ConvexFunction::ImproperNegInf(_) => Vec::new(),
        }
    }

    pub fn is_proper(&self) -> bool {
        match self {
            ConvexFunction::Affine(_) | ConvexFunction::MaxAffine(_) => true,
            ConvexFunction::Restricted { domain, .. } | ConvexFunction::Indicator(domain) => {
                !domain.is_empty()
            }
            ConvexFunction::ImproperNegInf(_) => false,
        }
    }

    pub fn evaluate(&self, x: &[Rational]) -> ExtReal {
        assert_eq!(x.len(), self.dim(), "dimension mismatch in evaluate");
        if let Some(d) = self.domain_set() {
            if !d.contains_point(x) {
                return ExtReal::PosInf;
            }
        }
        if let ConvexFunction::ImproperNegInf(_) = self {
            return ExtReal::NegInf;
        }
        let best =
            self.effective_pieces().iter().map(|p| p.eval(x)).max().expect("proper variants have pieces");
        ExtReal::Finite(best)
    }

    /// Generators of the epigraph of the conjugate in `(g, r)` space.
    fn conjugate_epigraph(&self) -> VRep {
        let n = self.dim();
        let up = {
            let mut e = zeros(n + 1);
            e[n] = Rational::one();
            e
        };
        let piece_part = |pieces: &[AffinePiece]| -> VRep {
            VRep {
                vertices: pieces
                    .iter()
                    .map(|p| {
                        let mut v = p.slope.clone();
                        v.push(p.offset.clone());
                        v
                    })
                    .collect(),
                rays: vec![up.clone()],
            }
        };
        let support_part = |d: &Polyhedron| -> VRep {
            let g = d.vrep_any();
            let mut h: Vec<Halfspace> = g
                .vertices
                .iter()
                .map(|v| {
                    let mut a = v.clone();
                    a.push(-Rational::one());
                    Halfspace::new(a, Rational::zero())
                })
                .collect();
            h.extend(g.rays.iter().map(|r| {
                let mut a = r.clone();
                a.push(Rational::zero());
                Halfspace::new(a, Rational::zero())
            }));
            Polyhedron::raw_h(n + 1, h).vrep().clone()
        };
        match self {
            ConvexFunction::Affine(p) => piece_part(std::slice::from_ref(p)),
            ConvexFunction::MaxAffine(ps) => piece_part(ps),
            ConvexFunction::Restricted { pieces, domain } => {
                let mut sigma = support_part(domain);
                if pieces.is_empty() {
                    return sigma;
                }
                let base = piece_part(pieces);
                // the support-function epigraph is a cone with apex 0
                sigma.rays.extend(base.rays);
                VRep { vertices: base.vertices, rays: sigma.rays }
            }
            ConvexFunction::Indicator(domain) => support_part(domain),
            ConvexFunction::ImproperNegInf(_) => VRep::default(),
        }
    }

    pub fn eps_subdifferential(&self, x: &[Rational], eps: &Rational) -> Result<Polyhedron, FunctionError> {
        same_dim(self.dim(), x.len())?;
        if eps.is_negative() {
            return Err(FunctionError::NegativeEpsilon);
        }
        let n = self.dim();
        let fx = match self.evaluate(x) {
            ExtReal::Finite(v) => v,
            _ => return Ok(Polyhedron::empty(n)),
        };
        if let ConvexFunction::Affine(p) = self {
            return Ok(Polyhedron::point(p.slope.clone()));
        }
        // r - ⟨g, x⟩ <= eps - f(x)
        let mut normal: Vec<Rational> = x.iter().map(|c| -c).collect();
        normal.push(Rational::one());
        let cut = Polyhedron::cut_generators(&self.conjugate_epigraph(), &normal, &(eps - fx));
        let vertices = cut.vertices.into_iter().map(|mut v| {
            v.pop();
            v
        });
        let rays = cut.rays.into_iter().filter_map(|mut r| {
            r.pop();
            (!is_zero_vec(&r)).then_some(r)
        });
        Ok(Polyhedron::from_raw_vrep(n, VRep { vertices: vertices.collect(), rays: rays.collect() }))
    }

    /// `∂_ε(α f)(x) = α ∂_{ε/α} f(x)`.
    pub fn eps_subdifferential_scaled(
        &self,
        alpha: &Rational,
        x: &[Rational],
        eps: &Rational,
    ) -> Result<Polyhedron, FunctionError> {
        if !alpha.is_positive() {
            return Err(FunctionError::NonPositiveScale);
        }
        let inner = self.eps_subdifferential(x, &(eps / alpha))?;
        Ok(inner.scale(alpha)?)
    }

    /// `f*(g)` by the linear program `max ⟨g,y⟩ - z` over the epigraph.
    pub fn conjugate_value(&self, g: &[Rational]) -> Result<ExtReal, FunctionError> {
        same_dim(self.dim(), g.len())?;
        let n = self.dim();
        match self {
            ConvexFunction::ImproperNegInf(_) => return Err(FunctionError::ImproperConjugate),
            ConvexFunction::Affine(p) => {
                return Ok(if p.slope.as_slice() == g {
                    ExtReal::Finite(p.offset.clone())
                } else {
                    ExtReal::PosInf
                });
            }
            _ => {}
        }
        let mut lp = LinearProgram::new(n + 1);
        lp.set_free_range(0..n + 1);
        for p in self.effective_pieces() {
            let mut row = p.slope.clone();
            row.push(-Rational::one());
            lp.add_row(row, Cmp::Le, p.offset.clone());
        }
        if let Some(d) = self.domain_set() {
            for h in d.hrep_any() {
                let mut row = h.normal.clone();
                row.push(Rational::zero());
                lp.add_row(row, Cmp::Le, h.offset.clone());
            }
        }
        let mut obj = g.to_vec();
        obj.push(-Rational::one());
        lp.maximize(obj);
        Ok(match lp.solve() {
            LpOutcome::Optimal { value, .. } => ExtReal::Finite(value),
            LpOutcome::Unbounded => ExtReal::PosInf,
            LpOutcome::Infeasible => ExtReal::NegInf,
        })
    }

    /// Fenchel-Young test `f*(g) + f(x) - ⟨g,x⟩ <= ε`.
    pub fn subgradient_membership(
        &self,
        x: &[Rational],
        eps: &Rational,
        g: &[Rational],
    ) -> Result<bool, FunctionError> {
        if let ConvexFunction::ImproperNegInf(_) = self {
            return Err(FunctionError::ImproperConjugate);
        }
        same_dim(self.dim(), x.len())?;
        let fx = match self.evaluate(x) {
            ExtReal::Finite(v) => v,
            _ => return Ok(false),
        };
        Ok(match self.conjugate_value(g)? {
            ExtReal::Finite(c) => c + fx - dot(g, x) <= *eps,
            ExtReal::PosInf => false,
            ExtReal::NegInf => true,
        })
    }

    /// `max{f, c}`.
    pub fn with_floor(&self, c: &Rational) -> ConvexFunction {
        let n = self.dim();
        let floor = AffinePiece::constant(n, c.clone());
        match self {
            ConvexFunction::Affine(p) => ConvexFunction::MaxAffine(vec![p.clone(), floor]),
            ConvexFunction::MaxAffine(ps) => {
                let mut ps = ps.clone();
                ps.push(floor);
                ConvexFunction::MaxAffine(ps)
            }
            ConvexFunction::Restricted { domain, .. } | ConvexFunction::Indicator(domain) => {
                let mut ps = self.effective_pieces();
                ps.push(floor);
                ConvexFunction::Restricted { pieces: ps, domain: domain.clone() }
            }
            ConvexFunction::ImproperNegInf(domain) => {
                ConvexFunction::Restricted { pieces: vec![floor], domain: domain.clone() }
            }
        }
    }

    /// `Σ λ_i f_i` over proper functions with positive weights; terms with
    /// zero weight are dropped.
    pub fn weighted_sum(terms: &[(Rational, &ConvexFunction)]) -> Result<ConvexFunction, FunctionError> {
        let active: Vec<&(Rational, &ConvexFunction)> = terms.iter().filter(|(l, _)| !l.is_zero()).collect();
        let first = active.first().ok_or(FunctionError::NoPieces)?;
        let n = first.1.dim();
        let mut pieces = vec![AffinePiece::constant(n, Rational::zero())];
        let mut domain: Option<Polyhedron> = None;
        for (lambda, f) in active {
            same_dim(n, f.dim())?;
            if lambda.is_negative() {
                return Err(FunctionError::NonPositiveScale);
            }
            if !f.is_proper() {
                return Err(FunctionError::ImproperConjugate);
            }
            let fp = f.effective_pieces();
            let mut next = Vec::with_capacity(pieces.len() * fp.len());
            for p in &pieces {
                for q in &fp {
                    next.push(AffinePiece::new(
                        p.slope.iter().zip(&q.slope).map(|(a, b)| a + lambda * b).collect(),
                        &p.offset + lambda * &q.offset,
                    ));
                }
            }
            next.sort();
            next.dedup();
            pieces = next;
            if let Some(d) = f.domain_set() {
                domain = Some(match domain {
                    None => d.clone(),
                    Some(acc) => acc.intersect(d),
                });
            }
        }
        match domain {
            None if pieces.len() == 1 => Ok(ConvexFunction::Affine(pieces.pop().unwrap())),
            None => Ok(ConvexFunction::MaxAffine(pieces)),
            Some(d) => ConvexFunction::restricted(pieces, d),
        }
    }
}

//! Closed convex polyhedra with lazily synchronized V- and H-representations.
//!
//! A polyhedron may be created from either representation. Generator lists
//! produced internally are allowed to be redundant; the canonical forms are
//! computed on demand by double description and cached.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::dd::double_description;
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::rational::{
    dot, fmt_vector, from_ints, integer_row, is_zero_vec, primitive, scaled, sub, unit, zeros, ExtReal,
    Rational,
};

/// Largest ambient dimension accepted from callers.
pub const MAX_DIM: usize = 6;

/// Internal epigraph computations work one dimension higher.
const INTERNAL_MAX_DIM: usize = MAX_DIM + 1;

/// `⟨normal, x⟩ <= offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Halfspace {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl Halfspace {
    pub fn new(normal: Vec<Rational>, offset: Rational) -> Self {
        Halfspace { normal, offset }
    }

    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        dot(&self.normal, x) <= self.offset
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VRep {
    pub vertices: Vec<Vec<Rational>>,
    pub rays: Vec<Vec<Rational>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("rays must be nonzero")]
    ZeroRay,
    #[error("scaling factor must be nonnegative")]
    NegativeScale,
    #[error("epsilon must be nonnegative")]
    NegativeEpsilon,
    #[error("the given H- and V-representations describe different sets")]
    InconsistentRepresentations,
}

#[derive(Clone)]
pub struct Polyhedron {
    dim: usize,
    h_any: OnceLock<Arc<Vec<Halfspace>>>,
    v_any: OnceLock<Arc<VRep>>,
    h_canon: OnceLock<Arc<Vec<Halfspace>>>,
    v_canon: OnceLock<Arc<VRep>>,
}

fn check_dim(dim: usize, cap: usize) -> Result<(), PolyError> {
    if dim == 0 {
        Err(PolyError::ZeroDimension)
    } else if dim > cap {
        Err(PolyError::DimensionTooLarge(dim))
    } else {
        Ok(())
    }
}

fn check_len(expected: usize, v: &[Rational]) -> Result<(), PolyError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(PolyError::DimensionMismatch { expected, found: v.len() })
    }
}

impl Polyhedron {
    fn blank(dim: usize) -> Self {
        Polyhedron {
            dim,
            h_any: OnceLock::new(),
            v_any: OnceLock::new(),
            h_canon: OnceLock::new(),
            v_canon: OnceLock::new(),
        }
    }

    pub(crate) fn raw_h(dim: usize, h: Vec<Halfspace>) -> Self {
        debug_assert!(dim <= INTERNAL_MAX_DIM);
        let p = Self::blank(dim);
        let _ = p.h_any.set(Arc::new(h));
        p
    }

    /// Builds from generators that may be redundant. Rays must be nonzero.
    pub(crate) fn raw_v(dim: usize, mut v: VRep) -> Self {
        debug_assert!(dim <= INTERNAL_MAX_DIM);
        if v.vertices.is_empty() {
            v.rays.clear();
        }
        for r in v.rays.iter_mut() {
            *r = primitive(r);
        }
        v.rays.sort();
        v.rays.dedup();
        v.vertices.sort();
        v.vertices.dedup();
        let p = Self::blank(dim);
        let _ = p.v_any.set(Arc::new(v));
        p
    }

    pub fn from_hrep(constraints: Vec<Halfspace>, dim: usize) -> Result<Self, PolyError> {
        check_dim(dim, MAX_DIM)?;
        for h in &constraints {
            check_len(dim, &h.normal)?;
        }
        Ok(Self::raw_h(dim, constraints))
    }

    pub fn from_vrep(
        vertices: Vec<Vec<Rational>>,
        rays: Vec<Vec<Rational>>,
        dim: usize,
    ) -> Result<Self, PolyError> {
        check_dim(dim, MAX_DIM)?;
        for v in vertices.iter().chain(&rays) {
            check_len(dim, v)?;
        }
        if rays.iter().any(|r| is_zero_vec(r)) {
            return Err(PolyError::ZeroRay);
        }
        Ok(Self::raw_v(dim, VRep { vertices, rays }))
    }

    /// Builds from both representations after checking they agree.
    pub fn from_both(
        constraints: Vec<Halfspace>,
        vertices: Vec<Vec<Rational>>,
        rays: Vec<Vec<Rational>>,
        dim: usize,
    ) -> Result<Self, PolyError> {
        let h = Self::from_hrep(constraints, dim)?;
        let v = Self::from_vrep(vertices, rays, dim)?;
        if !h.set_equal(&v) {
            return Err(PolyError::InconsistentRepresentations);
        }
        let _ = v.h_any.set(Arc::new(h.hrep_any().to_vec()));
        Ok(v)
    }

    pub fn whole(dim: usize) -> Self {
        Self::raw_h(dim, Vec::new())
    }

    pub fn empty(dim: usize) -> Self {
        let p = Self::raw_v(dim, VRep::default());
        let _ = p.h_any.set(Arc::new(vec![Halfspace::new(zeros(dim), -Rational::one())]));
        p
    }

    pub fn point(x: Vec<Rational>) -> Self {
        let dim = x.len();
        Self::raw_v(dim, VRep { vertices: vec![x], rays: Vec::new() })
    }

    pub fn origin(dim: usize) -> Self {
        Self::point(zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Some valid (possibly redundant) H-representation.
    pub fn hrep_any(&self) -> &[Halfspace] {
        if let Some(h) = self.h_canon.get() {
            return h;
        }
        if let Some(h) = self.h_any.get() {
            return h;
        }
        self.to_hrep()
    }

    /// Some valid (possibly redundant) generator list.
    pub fn vrep_any(&self) -> &VRep {
        if let Some(v) = self.v_canon.get() {
            return v;
        }
        if let Some(v) = self.v_any.get() {
            return v;
        }
        self.vrep()
    }

    /// Canonical V-representation: minimal vertices and rays, lines listed
    /// as opposite ray pairs, everything sorted.
    pub fn vrep(&self) -> &VRep {
        self.v_canon.get_or_init(|| {
            let h: Vec<Halfspace> = match (self.h_canon.get(), self.h_any.get()) {
                (Some(h), _) => h.to_vec(),
                (None, Some(h)) => h.to_vec(),
                (None, None) => self.to_hrep().to_vec(),
            };
            Arc::new(canonical_vrep(self.dim, &h))
        })
    }

    pub fn to_vrep(&self) -> VRep {
        self.vrep().clone()
    }

    /// Canonical H-representation: facets plus equalities (as inequality
    /// pairs), normals reduced modulo the equality space, integer-primitive.
    pub fn to_hrep(&self) -> &[Halfspace] {
        self.h_canon.get_or_init(|| {
            let v: &VRep = match (self.v_canon.get(), self.v_any.get()) {
                (Some(v), _) => v,
                (None, Some(v)) => v,
                (None, None) => self.vrep(),
            };
            Arc::new(canonical_hrep(self.dim, v))
        })
    }

    /// A copy whose generator list is minimal.
    pub fn minimized(&self) -> Polyhedron {
        let p = Self::blank(self.dim);
        let _ = p.v_canon.set(Arc::new(self.vrep().clone()));
        if let Some(h) = self.h_canon.get() {
            let _ = p.h_canon.set(h.clone());
        }
        p
    }

    pub fn is_empty(&self) -> bool {
        self.vrep_any().vertices.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.vrep_any().rays.is_empty()
    }

    pub fn contains_point(&self, x: &[Rational]) -> bool {
        assert_eq!(x.len(), self.dim, "dimension mismatch in contains_point");
        self.hrep_any().iter().all(|h| h.satisfied_by(x))
    }

    pub fn contains_direction(&self, r: &[Rational]) -> bool {
        self.hrep_any().iter().all(|h| !dot(&h.normal, r).is_positive())
    }

    pub fn minkowski_sum(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim, "dimension mismatch in minkowski_sum");
        if self.is_empty() || other.is_empty() {
            return Self::empty(self.dim);
        }
        let (a, b) = (self.vrep_any(), other.vrep_any());
        let (a, b) =
            if a.vertices.len() * b.vertices.len() > 64 { (self.vrep(), other.vrep()) } else { (a, b) };
        let mut vertices = Vec::with_capacity(a.vertices.len() * b.vertices.len());
        for u in &a.vertices {
            for w in &b.vertices {
                vertices.push(crate::rational::add(u, w));
            }
        }
        let rays = a.rays.iter().chain(&b.rays).cloned().collect();
        Self::raw_v(self.dim, VRep { vertices, rays })
    }

    /// Closed convex hull of a union. Empty members are ignored.
    pub fn hull_union<'a, I>(dim: usize, sets: I) -> Polyhedron
    where
        I: IntoIterator<Item = &'a Polyhedron>,
    {
        let mut v = VRep::default();
        for p in sets {
            assert_eq!(p.dim, dim, "dimension mismatch in hull_union");
            let g = p.vrep_any();
            v.vertices.extend(g.vertices.iter().cloned());
            v.rays.extend(g.rays.iter().cloned());
        }
        if v.vertices.is_empty() {
            return Self::empty(dim);
        }
        Self::raw_v(dim, v)
    }

    pub fn hull_with_rays(&self, rays: &[Vec<Rational>]) -> Polyhedron {
        if self.is_empty() || rays.is_empty() {
            return self.clone();
        }
        let mut v = self.vrep_any().clone();
        v.rays.extend(rays.iter().filter(|r| !is_zero_vec(r)).cloned());
        Self::raw_v(self.dim, v)
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Polyhedron, PolyError> {
        if lambda.is_negative() {
            return Err(PolyError::NegativeScale);
        }
        if self.is_empty() {
            return Ok(Self::empty(self.dim));
        }
        if lambda.is_zero() {
            return Ok(Self::origin(self.dim));
        }
        if lambda.is_one() {
            return Ok(self.clone());
        }
        let g = self.vrep_any();
        let v =
            VRep { vertices: g.vertices.iter().map(|x| scaled(x, lambda)).collect(), rays: g.rays.clone() };
        let p = Self::raw_v(self.dim, v);
        if let Some(h) = self.h_canon.get().or(self.h_any.get()) {
            let h: Vec<Halfspace> =
                h.iter().map(|hs| Halfspace::new(hs.normal.clone(), &hs.offset * lambda)).collect();
            let _ = p.h_any.set(Arc::new(h));
        }
        Ok(p)
    }

    /// Cone of rays of the polyhedron; `{0}` for the empty set.
    pub fn recession_cone(&self) -> Polyhedron {
        if self.is_empty() {
            return Self::origin(self.dim);
        }
        let v = VRep { vertices: vec![zeros(self.dim)], rays: self.vrep_any().rays.clone() };
        Self::raw_v(self.dim, v)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim, "dimension mismatch in intersect");
        let mut h = self.hrep_any().to_vec();
        h.extend(other.hrep_any().iter().cloned());
        Self::raw_h(self.dim, h)
    }

    pub fn intersect_halfspaces(&self, extra: &[Halfspace]) -> Polyhedron {
        let mut h = self.hrep_any().to_vec();
        h.extend(extra.iter().cloned());
        Self::raw_h(self.dim, h)
    }

    pub fn subset_of(&self, other: &Polyhedron) -> bool {
        assert_eq!(self.dim, other.dim, "dimension mismatch in subset_of");
        if self.is_empty() {
            return true;
        }
        if other.is_empty() {
            return false;
        }
        let g = self.vrep_any();
        g.vertices.iter().all(|v| other.contains_point(v))
            && g.rays.iter().all(|r| other.contains_direction(r))
    }

    pub fn set_equal(&self, other: &Polyhedron) -> bool {
        self.dim == other.dim && self.subset_of(other) && other.subset_of(self)
    }

    pub fn support_value(&self, u: &[Rational]) -> ExtReal {
        if self.is_empty() {
            return ExtReal::NegInf;
        }
        let g = self.vrep_any();
        if g.rays.iter().any(|r| dot(r, u).is_positive()) {
            return ExtReal::PosInf;
        }
        let best = g.vertices.iter().map(|v| dot(v, u)).max().expect("nonempty");
        ExtReal::Finite(best)
    }

    /// `{g : ⟨g, y - x⟩ <= eps for all y in P}`; empty when `x ∉ P`.
    pub fn eps_normal_set(&self, x: &[Rational], eps: &Rational) -> Result<Polyhedron, PolyError> {
        check_len(self.dim, x)?;
        if eps.is_negative() {
            return Err(PolyError::NegativeEpsilon);
        }
        if !self.contains_point(x) {
            return Ok(Self::empty(self.dim));
        }
        let g = self.vrep_any();
        let mut h: Vec<Halfspace> =
            g.vertices.iter().map(|v| Halfspace::new(sub(v, x), eps.clone())).collect();
        h.extend(g.rays.iter().map(|r| Halfspace::new(r.clone(), Rational::zero())));
        Ok(Self::raw_h(self.dim, h))
    }

    /// A point of `int(self) ∩ other`, if there is one.
    pub fn interior_point_meeting(&self, other: &Polyhedron) -> Option<Vec<Rational>> {
        assert_eq!(self.dim, other.dim, "dimension mismatch in interior_point_meeting");
        let n = self.dim;
        let mut lp = LinearProgram::new(n + 1);
        lp.set_free_range(0..n);
        for (h, margin) in
            self.hrep_any().iter().map(|h| (h, true)).chain(other.hrep_any().iter().map(|h| (h, false)))
        {
            let mut row = h.normal.clone();
            let slack = margin && !is_zero_vec(&h.normal);
            row.push(if slack { Rational::one() } else { Rational::zero() });
            lp.add_row(row, Cmp::Le, h.offset.clone());
        }
        let mut cap = zeros(n + 1);
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

    pub fn has_interior(&self) -> bool {
        self.interior_point_meeting(&Polyhedron::whole(self.dim)).is_some()
    }

    /// Lineality space dimension and the canonical line directions.
    pub fn lineality(&self) -> Vec<Vec<Rational>> {
        let v = self.vrep();
        let mut lines = Vec::new();
        for r in &v.rays {
            let opp: Vec<Rational> = r.iter().map(|x| -x).collect();
            if r > &opp && v.rays.contains(&opp) {
                lines.push(r.clone());
            }
        }
        lines
    }

    /// One step of generator splitting by a halfspace; the result may be
    /// redundant but generates `P ∩ {⟨a, z⟩ <= b}`.
    pub(crate) fn cut_generators(v: &VRep, a: &[Rational], b: &Rational) -> VRep {
        // homogenized values: vertex (v,1) -> ⟨a,v⟩ - b, ray (r,0) -> ⟨a,r⟩
        let vals_v: Vec<Rational> = v.vertices.iter().map(|x| dot(a, x) - b).collect();
        let vals_r: Vec<Rational> = v.rays.iter().map(|r| dot(a, r)).collect();
        let mut out = VRep::default();
        for (x, s) in v.vertices.iter().zip(&vals_v) {
            if !s.is_positive() {
                out.vertices.push(x.clone());
            }
        }
        for (r, s) in v.rays.iter().zip(&vals_r) {
            if !s.is_positive() {
                out.rays.push(r.clone());
            }
        }
        // positive/negative pairs
        for (xp, sp) in v.vertices.iter().zip(&vals_v).filter(|(_, s)| s.is_positive()) {
            for (xn, sn) in v.vertices.iter().zip(&vals_v).filter(|(_, s)| s.is_negative()) {
                // t xp + (1-t) xn on the boundary: t = -sn / (sp - sn)
                let t = -sn / (sp - sn);
                let p: Vec<Rational> = xp.iter().zip(xn).map(|(a1, a0)| a0 + &t * (a1 - a0)).collect();
                out.vertices.push(p);
            }
            for (r, s) in v.rays.iter().zip(&vals_r).filter(|(_, s)| s.is_negative()) {
                let t = -sp / s;
                out.vertices.push(crate::rational::add(xp, &scaled(r, &t)));
            }
        }
        for (rp, sp) in v.rays.iter().zip(&vals_r).filter(|(_, s)| s.is_positive()) {
            for (xn, sn) in v.vertices.iter().zip(&vals_v).filter(|(_, s)| s.is_negative()) {
                let t = -sn / sp;
                out.vertices.push(crate::rational::add(xn, &scaled(rp, &t)));
            }
            for (rn, sn) in v.rays.iter().zip(&vals_r).filter(|(_, s)| s.is_negative()) {
                let r: Vec<Rational> = rn.iter().zip(rp).map(|(n, p)| n * sp - p * sn).collect();
                if !is_zero_vec(&r) {
                    out.rays.push(r);
                }
            }
        }
        if out.vertices.is_empty() {
            out.rays.clear();
        }
        out
    }

    pub(crate) fn from_raw_vrep(dim: usize, v: VRep) -> Self {
        Self::raw_v(dim, v)
    }

    pub fn describe(&self) -> String {
        if self.is_empty() {
            return "empty".to_string();
        }
        let v = self.vrep();
        let verts: Vec<String> = v.vertices.iter().map(|x| fmt_vector(x)).collect();
        if v.rays.is_empty() {
            format!("conv{{{}}}", verts.join(", "))
        } else {
            let rays: Vec<String> = v.rays.iter().map(|x| fmt_vector(x)).collect();
            format!("conv{{{}}} + cone{{{}}}", verts.join(", "), rays.join(", "))
        }
    }
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polyhedron[{}]({})", self.dim, self.describe())
    }
}

/// Orthogonal basis of the span of `rows` by exact Gram-Schmidt.
fn orthogonal_basis(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    for r in rows {
        let mut v = r.clone();
        for q in &basis {
            let c = dot(&v, q) / dot(q, q);
            v = sub(&v, &scaled(q, &c));
        }
        if !is_zero_vec(&v) {
            basis.push(v);
        }
    }
    basis
}

fn project_out(v: &[Rational], ortho: &[Vec<Rational>]) -> Vec<Rational> {
    let mut out = v.to_vec();
    for q in ortho {
        let c = dot(&out, q) / dot(q, q);
        if !c.is_zero() {
            out = sub(&out, &scaled(q, &c));
        }
    }
    out
}

/// Reduced row echelon form; zero rows removed, each row integer-primitive.
fn rref_primitive(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        m[r] = scaled(&m[r], &inv);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pr = scaled(&m[r], &f);
                m[i] = sub(&m[i], &pr);
            }
        }
        r += 1;
    }
    m.truncate(r);
    m.iter().map(|row| primitive(row)).collect()
}

fn canonical_vrep(dim: usize, h: &[Halfspace]) -> VRep {
    let mut rows: Vec<Vec<BigInt>> = h
        .iter()
        .map(|hs| {
            let mut r = hs.normal.clone();
            r.push(-hs.offset.clone());
            integer_row(&r)
        })
        .collect();
    let mut s_row = vec![BigInt::zero(); dim + 1];
    s_row[dim] = BigInt::from(-1);
    rows.push(s_row);
    let cone = double_description(dim + 1, &rows);

    let mut vertices = Vec::new();
    let mut rays = Vec::new();
    for r in &cone.rays {
        let s = &r[dim];
        let x = from_ints(&r[..dim]);
        if s.is_positive() {
            let s = Rational::from_integer(s.clone());
            vertices.push(x.iter().map(|c| c / &s).collect::<Vec<_>>());
        } else {
            rays.push(x);
        }
    }
    if vertices.is_empty() {
        return VRep::default();
    }
    let lines: Vec<Vec<Rational>> = cone.lines.iter().map(|l| from_ints(&l[..dim])).collect();
    let lines = rref_primitive(&lines);
    let ortho = orthogonal_basis(&lines);

    let mut vertices: Vec<Vec<Rational>> = vertices.iter().map(|v| project_out(v, &ortho)).collect();
    vertices.sort();
    vertices.dedup();
    let mut rays: Vec<Vec<Rational>> =
        rays.iter().map(|r| primitive(&project_out(r, &ortho))).filter(|r| !is_zero_vec(r)).collect();
    for l in &lines {
        rays.push(l.clone());
        rays.push(l.iter().map(|x| -x).collect());
    }
    rays.sort();
    rays.dedup();
    VRep { vertices, rays }
}

fn canonical_hrep(dim: usize, v: &VRep) -> Vec<Halfspace> {
    if v.vertices.is_empty() {
        return vec![Halfspace::new(zeros(dim), -Rational::one())];
    }
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for x in &v.vertices {
        let mut r = x.clone();
        r.push(Rational::one());
        rows.push(integer_row(&r));
    }
    for x in &v.rays {
        let mut r = x.clone();
        r.push(Rational::zero());
        rows.push(integer_row(&r));
    }
    let cone = double_description(dim + 1, &rows);
    let eq: Vec<Vec<Rational>> = cone.lines.iter().map(|l| from_ints(l)).collect();
    let eq = rref_primitive(&eq);
    let ortho = orthogonal_basis(&eq);

    let split = |w: &[Rational]| -> Halfspace { Halfspace::new(w[..dim].to_vec(), -w[dim].clone()) };
    let mut out: Vec<Halfspace> = Vec::new();
    for r in &cone.rays {
        let w = primitive(&project_out(&from_ints(r), &ortho));
        if is_zero_vec(&w[..dim]) {
            continue;
        }
        out.push(split(&w));
    }
    for e in &eq {
        out.push(split(e));
        let neg: Vec<Rational> = e.iter().map(|x| -x).collect();
        out.push(split(&neg));
    }
    out.sort();
    out.dedup();
    out
}

/// Standard basis rays `±e_i`, handy for whole-space generators.
pub fn coordinate_lines(dim: usize) -> Vec<Vec<Rational>> {
    let mut rays = Vec::new();
    for i in 0..dim {
        let e = unit(dim, i);
        rays.push(e.iter().map(|x| -x).collect());
        rays.push(e);
    }
    rays
}

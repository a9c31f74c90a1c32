//! JSON encodings of polyhedra, functions, families, programs and results.
//!
//! Rationals are `[numerator, denominator]` pairs. Each component is a JSON
//! integer when it fits in 64 bits and a decimal string otherwise; parsing
//! accepts either, and also a bare integer or a `"p/q"` string. Parse errors
//! carry the path of the offending field, e.g. `entries.t1.pieces[0][1]`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::convexfn::{AffinePiece, ConvexFunction};
use crate::optimality::{ConvexProgram, EpsWitness, KktCertificate};
use crate::polyhedron::{Halfspace, Polyhedron};
use crate::rational::{parse_rational, Rational};
use crate::suprema::{CaratheodoryDecomposition, Certification, FunctionFamily, SetResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{path}: {message}")]
pub struct JsonError {
    pub path: String,
    pub message: String,
}

fn err<T>(path: &str, message: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError { path: path.to_string(), message: message.into() })
}

fn field(path: &str, name: &str) -> String {
    if path.is_empty() {
        name.to_string()
    } else {
        format!("{path}.{name}")
    }
}

fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, JsonError> {
    v.as_object().map_or_else(|| err(path, "expected an object"), Ok)
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, JsonError> {
    v.as_array().map_or_else(|| err(path, "expected an array"), Ok)
}

fn required<'a>(obj: &'a Map<String, Value>, path: &str, name: &str) -> Result<&'a Value, JsonError> {
    obj.get(name).map_or_else(|| err(&field(path, name), "missing field"), Ok)
}

fn big_to_json(b: &BigInt) -> Value {
    match b.to_i64() {
        Some(i) => Value::from(i),
        None => Value::from(b.to_string()),
    }
}

fn big_from_json(v: &Value, path: &str) -> Result<BigInt, JsonError> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(BigInt::from(i)),
            None => err(path, "expected an integer"),
        },
        Value::String(s) => s.trim().parse().map_or_else(|_| err(path, "expected an integer string"), Ok),
        _ => err(path, "expected an integer"),
    }
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::Array(vec![big_to_json(r.numer()), big_to_json(r.denom())])
}

pub fn rational_from_json(v: &Value, path: &str) -> Result<Rational, JsonError> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            let n = big_from_json(&parts[0], &index(path, 0))?;
            let d = big_from_json(&parts[1], &index(path, 1))?;
            if d.is_zero() {
                return err(path, "zero denominator");
            }
            Ok(Rational::new(n, d))
        }
        Value::Array(_) => err(path, "a rational is a [numerator, denominator] pair"),
        Value::Number(_) => Ok(Rational::from_integer(big_from_json(v, path)?)),
        Value::String(s) => {
            parse_rational(s).map_or_else(|| err(path, format!("malformed rational `{s}`")), Ok)
        }
        _ => err(path, "expected a rational"),
    }
}

pub fn vector_to_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational_to_json).collect())
}

pub fn vector_from_json(v: &Value, path: &str, dim: Option<usize>) -> Result<Vec<Rational>, JsonError> {
    let items = array(v, path)?;
    if let Some(n) = dim {
        if items.len() != n {
            return err(path, format!("expected {n} coordinates, found {}", items.len()));
        }
    }
    items.iter().enumerate().map(|(i, x)| rational_from_json(x, &index(path, i))).collect()
}

fn vectors_from_json(v: &Value, path: &str, dim: usize) -> Result<Vec<Vec<Rational>>, JsonError> {
    array(v, path)?.iter().enumerate().map(|(i, x)| vector_from_json(x, &index(path, i), Some(dim))).collect()
}

fn vectors_to_json(vs: &[Vec<Rational>]) -> Value {
    Value::Array(vs.iter().map(|v| vector_to_json(v)).collect())
}

fn dim_from_json(obj: &Map<String, Value>, path: &str) -> Result<usize, JsonError> {
    let p = field(path, "dim");
    match required(obj, path, "dim")?.as_u64() {
        Some(n) if n > 0 => Ok(n as usize),
        _ => err(&p, "expected a positive integer"),
    }
}

/// Canonical form: minimal generators and irredundant inequalities.
pub fn polyhedron_to_json(p: &Polyhedron) -> Value {
    let v = p.vrep();
    let h: Vec<Value> = p
        .to_hrep()
        .iter()
        .map(|h| json!({"normal": vector_to_json(&h.normal), "offset": rational_to_json(&h.offset)}))
        .collect();
    json!({
        "dim": p.dim(),
        "vertices": vectors_to_json(&v.vertices),
        "rays": vectors_to_json(&v.rays),
        "inequalities": h,
    })
}

/// Reads either representation; when both are given they must agree.
pub fn polyhedron_from_json(v: &Value, path: &str) -> Result<Polyhedron, JsonError> {
    let obj = object(v, path)?;
    let dim = dim_from_json(obj, path)?;
    let h = match obj.get("inequalities") {
        None => None,
        Some(list) => {
            let p = field(path, "inequalities");
            let mut out = Vec::new();
            for (i, item) in array(list, &p)?.iter().enumerate() {
                let ip = index(&p, i);
                let o = object(item, &ip)?;
                let normal = vector_from_json(required(o, &ip, "normal")?, &field(&ip, "normal"), Some(dim))?;
                let offset = rational_from_json(required(o, &ip, "offset")?, &field(&ip, "offset"))?;
                out.push(Halfspace::new(normal, offset));
            }
            Some(out)
        }
    };
    let has_v = obj.contains_key("vertices") || obj.contains_key("rays");
    let gen = |name: &str| -> Result<Vec<Vec<Rational>>, JsonError> {
        match obj.get(name) {
            Some(list) => vectors_from_json(list, &field(path, name), dim),
            None => Ok(Vec::new()),
        }
    };
    let built = match (h, has_v) {
        (Some(h), true) => Polyhedron::from_both(h, gen("vertices")?, gen("rays")?, dim),
        (Some(h), false) => Polyhedron::from_hrep(h, dim),
        (None, true) => {
            let (vertices, rays) = (gen("vertices")?, gen("rays")?);
            if vertices.is_empty() && !rays.is_empty() {
                return err(&field(path, "vertices"), "rays given without a vertex");
            }
            Polyhedron::from_vrep(vertices, rays, dim)
        }
        (None, false) => return err(path, "needs `vertices` and `rays` or `inequalities`"),
    };
    built.or_else(|e| err(path, e.to_string()))
}

fn pieces_to_json(pieces: &[AffinePiece]) -> Value {
    Value::Array(
        pieces
            .iter()
            .map(|p| {
                let mut row: Vec<Value> = p.slope.iter().map(rational_to_json).collect();
                row.push(rational_to_json(&p.offset));
                Value::Array(row)
            })
            .collect(),
    )
}

fn pieces_from_json(v: &Value, path: &str, dim: Option<usize>) -> Result<Vec<AffinePiece>, JsonError> {
    let mut out = Vec::new();
    let mut width = dim.map(|n| n + 1);
    for (i, row) in array(v, path)?.iter().enumerate() {
        let rp = index(path, i);
        let mut coeffs = vector_from_json(row, &rp, width)?;
        if coeffs.len() < 2 {
            return err(&rp, "a piece is [slope..., offset] with at least one slope coordinate");
        }
        width = Some(coeffs.len());
        let offset = coeffs.pop().expect("nonempty");
        out.push(AffinePiece::new(coeffs, offset));
    }
    Ok(out)
}

pub fn function_to_json(f: &ConvexFunction) -> Value {
    match f {
        ConvexFunction::Affine(p) => {
            json!({"kind": "affine", "pieces": pieces_to_json(std::slice::from_ref(p))})
        }
        ConvexFunction::MaxAffine(ps) => json!({"kind": "max_affine", "pieces": pieces_to_json(ps)}),
        ConvexFunction::Restricted { pieces, domain } => json!({
            "kind": "restricted",
            "pieces": pieces_to_json(pieces),
            "domain": polyhedron_to_json(domain),
        }),
        ConvexFunction::Indicator(d) => json!({"kind": "indicator", "domain": polyhedron_to_json(d)}),
        ConvexFunction::ImproperNegInf(d) => json!({"kind": "improper", "domain": polyhedron_to_json(d)}),
    }
}

/// `dim`, when known, is checked against the function's own dimension.
pub fn function_from_json(v: &Value, path: &str, dim: Option<usize>) -> Result<ConvexFunction, JsonError> {
    let obj = object(v, path)?;
    let kp = field(path, "kind");
    let kind = required(obj, path, "kind")?.as_str().map_or_else(|| err(&kp, "expected a string"), Ok)?;
    let domain = || -> Result<Polyhedron, JsonError> {
        let d = polyhedron_from_json(required(obj, path, "domain")?, &field(path, "domain"))?;
        if let Some(n) = dim {
            if d.dim() != n {
                return err(&field(path, "domain"), format!("dimension {} differs from {n}", d.dim()));
            }
        }
        Ok(d)
    };
    let pieces = |min: usize| -> Result<Vec<AffinePiece>, JsonError> {
        let pp = field(path, "pieces");
        let ps = match obj.get("pieces") {
            Some(list) => pieces_from_json(list, &pp, dim)?,
            None if min == 0 => Vec::new(),
            None => return err(&pp, "missing field"),
        };
        if ps.len() < min {
            return err(&pp, format!("needs at least {min} piece(s)"));
        }
        Ok(ps)
    };
    let f = match kind {
        "affine" => {
            let mut ps = pieces(1)?;
            if ps.len() != 1 {
                return err(&field(path, "pieces"), "an affine function has exactly one piece");
            }
            ConvexFunction::Affine(ps.pop().expect("one piece"))
        }
        "max_affine" => ConvexFunction::max_affine(pieces(1)?).or_else(|e| err(path, e.to_string()))?,
        "restricted" => {
            let ps = pieces(0)?;
            let d = domain()?;
            if let Some(p) = ps.first() {
                if p.slope.len() != d.dim() {
                    return err(&field(path, "pieces"), "piece and domain dimensions differ");
                }
            }
            ConvexFunction::restricted(ps, d).or_else(|e| err(path, e.to_string()))?
        }
        "indicator" => ConvexFunction::indicator(domain()?),
        "improper" => ConvexFunction::improper(domain()?).or_else(|e| err(path, e.to_string()))?,
        other => return err(&kp, format!("unknown kind `{other}`")),
    };
    if let Some(n) = dim {
        if f.dim() != n {
            return err(path, format!("dimension {} differs from {n}", f.dim()));
        }
    }
    Ok(f)
}

pub fn family_to_json(f: &FunctionFamily) -> Value {
    let entries: Map<String, Value> =
        f.entries().map(|(t, g)| (t.to_string(), function_to_json(g))).collect();
    json!({
        "dim": f.dim(),
        "entries": entries,
        "closure_hints": vectors_to_json(f.closure_hints()),
    })
}

pub fn family_from_json(v: &Value, path: &str) -> Result<FunctionFamily, JsonError> {
    let obj = object(v, path)?;
    let dim = dim_from_json(obj, path)?;
    let ep = field(path, "entries");
    let entries = object(required(obj, path, "entries")?, &ep)?;
    let mut fs = Vec::new();
    for (t, f) in entries {
        fs.push((t.clone(), function_from_json(f, &field(&ep, t), Some(dim))?));
    }
    let family = FunctionFamily::new(dim, fs).or_else(|e| err(path, e.to_string()))?;
    match obj.get("closure_hints") {
        Some(h) => {
            let hp = field(path, "closure_hints");
            let hints = vectors_from_json(h, &hp, dim)?;
            family.with_closure_hints(hints).or_else(|e| err(&hp, e.to_string()))
        }
        None => Ok(family),
    }
}

pub fn program_to_json(p: &ConvexProgram) -> Value {
    json!({
        "objective": function_to_json(p.objective()),
        "constraints": family_to_json(p.constraints()),
    })
}

pub fn program_from_json(v: &Value, path: &str) -> Result<ConvexProgram, JsonError> {
    let obj = object(v, path)?;
    let constraints = family_from_json(required(obj, path, "constraints")?, &field(path, "constraints"))?;
    let objective = function_from_json(
        required(obj, path, "objective")?,
        &field(path, "objective"),
        Some(constraints.dim()),
    )?;
    ConvexProgram::new(objective, constraints).or_else(|e| err(path, e.to_string()))
}

/// Label to weight map, as used by custom weight schemes.
pub fn weights_from_json(v: &Value, path: &str) -> Result<BTreeMap<String, Rational>, JsonError> {
    object(v, path)?.iter().map(|(t, w)| Ok((t.clone(), rational_from_json(w, &field(path, t))?))).collect()
}

pub fn weights_to_json(w: &BTreeMap<String, Rational>) -> Value {
    Value::Object(w.iter().map(|(t, r)| (t.clone(), rational_to_json(r))).collect())
}

pub fn set_result_to_json(r: &SetResult) -> Value {
    let certified = match &r.certified {
        None => Value::Null,
        Some(Certification::Equal) => Value::from("equal"),
        Some(Certification::Mismatch) => Value::from("mismatch"),
    };
    json!({
        "set": polyhedron_to_json(&r.set),
        "provenance": {
            "tag": r.provenance.tag,
            "eps": vector_to_json(&r.provenance.eps),
            "scheme": r.provenance.scheme,
        },
        "stabilized": r.stabilized,
        "limit_closure": r.limit_closure,
        "hint_used": r.hint_used,
        "certified": certified,
        "note": r.note,
    })
}

pub fn decomposition_to_json(d: &CaratheodoryDecomposition) -> Value {
    json!({"lambda": weights_to_json(&d.lambda), "support": d.support})
}

pub fn certificate_to_json(c: &KktCertificate) -> Value {
    match c {
        KktCertificate::NormalCone { witnesses } => json!({
            "kind": c.kind(),
            "witnesses": witnesses
                .iter()
                .map(|w| json!({
                    "eps": rational_to_json(&w.eps),
                    "subgradient": vector_to_json(&w.subgradient),
                    "normal": vector_to_json(&w.normal),
                }))
                .collect::<Vec<_>>(),
        }),
        KktCertificate::Multiplier { lambda, subgradient, s } => json!({
            "kind": c.kind(),
            "lambda": rational_to_json(lambda),
            "subgradient": vector_to_json(subgradient),
            "s": vector_to_json(s),
        }),
        KktCertificate::Refutation { direction, step, decrease } => json!({
            "kind": c.kind(),
            "direction": vector_to_json(direction),
            "step": rational_to_json(step),
            "decrease": rational_to_json(decrease),
        }),
    }
}

pub fn certificate_from_json(v: &Value, path: &str) -> Result<KktCertificate, JsonError> {
    let obj = object(v, path)?;
    let kp = field(path, "kind");
    let kind = required(obj, path, "kind")?.as_str().map_or_else(|| err(&kp, "expected a string"), Ok)?;
    let vec_field = |o: &Map<String, Value>, p: &str, name: &str| {
        vector_from_json(required(o, p, name)?, &field(p, name), None)
    };
    let rat_field = |o: &Map<String, Value>, p: &str, name: &str| {
        rational_from_json(required(o, p, name)?, &field(p, name))
    };
    match kind {
        "normal_cone" => {
            let wp = field(path, "witnesses");
            let mut witnesses = Vec::new();
            for (i, w) in array(required(obj, path, "witnesses")?, &wp)?.iter().enumerate() {
                let ip = index(&wp, i);
                let o = object(w, &ip)?;
                witnesses.push(EpsWitness {
                    eps: rat_field(o, &ip, "eps")?,
                    subgradient: vec_field(o, &ip, "subgradient")?,
                    normal: vec_field(o, &ip, "normal")?,
                });
            }
            Ok(KktCertificate::NormalCone { witnesses })
        }
        "multiplier" => Ok(KktCertificate::Multiplier {
            lambda: rat_field(obj, path, "lambda")?,
            subgradient: vec_field(obj, path, "subgradient")?,
            s: vec_field(obj, path, "s")?,
        }),
        "refutation" => Ok(KktCertificate::Refutation {
            direction: vec_field(obj, path, "direction")?,
            step: rat_field(obj, path, "step")?,
            decrease: rat_field(obj, path, "decrease")?,
        }),
        other => err(&kp, format!("unknown certificate kind `{other}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ivec, rat};

    #[test]
    fn rationals_in_all_spellings() {
        assert_eq!(rational_from_json(&json!([3, -6]), "x").unwrap(), rat(-1, 2));
        assert_eq!(rational_from_json(&json!(["3", "4"]), "x").unwrap(), rat(3, 4));
        assert_eq!(rational_from_json(&json!(5), "x").unwrap(), int(5));
        assert_eq!(rational_from_json(&json!("2/3"), "x").unwrap(), rat(2, 3));
        let huge = rat(1, 3) * Rational::from_integer(BigInt::from(10).pow(30));
        assert_eq!(rational_from_json(&rational_to_json(&huge), "x").unwrap(), huge);
        let e = rational_from_json(&json!([1, 0]), "a.b[2]").unwrap_err();
        assert_eq!(e.path, "a.b[2]");
    }

    #[test]
    fn polyhedron_round_trip() {
        let p = Polyhedron::from_vrep(vec![ivec(&[0, 0]), ivec(&[1, 0])], vec![ivec(&[0, 1])], 2).unwrap();
        let j = polyhedron_to_json(&p);
        let q = polyhedron_from_json(&j, "").unwrap();
        assert!(p.set_equal(&q));
        let e = Polyhedron::empty(2);
        assert!(polyhedron_from_json(&polyhedron_to_json(&e), "").unwrap().is_empty());
    }

    #[test]
    fn inconsistent_representations_are_rejected() {
        let j = json!({
            "dim": 1,
            "vertices": [[[0, 1]]],
            "inequalities": [{"normal": [[1, 1]], "offset": [1, 1]}]
        });
        assert!(polyhedron_from_json(&j, "d").is_err());
    }

    #[test]
    fn family_errors_name_the_field() {
        let j = json!({
            "dim": 1,
            "entries": {
                "a": {"kind": "affine", "pieces": [[[1, 1], [0, 1]]]},
                "b": {"kind": "max_affine", "pieces": [[[1, 1], "oops"]]}
            }
        });
        let e = family_from_json(&j, "family").unwrap_err();
        assert_eq!(e.path, "family.entries.b.pieces[0][1]");
        let j = json!({"dim": 1, "entries": {"a": {"kind": "cubic"}}});
        assert_eq!(family_from_json(&j, "").unwrap_err().path, "entries.a.kind");
    }

    #[test]
    fn family_round_trip() {
        let half = Polyhedron::from_hrep(vec![Halfspace::new(ivec(&[1]), int(0))], 1).unwrap();
        let f = FunctionFamily::new(
            1,
            [
                ("lin", ConvexFunction::affine(ivec(&[2]), int(1))),
                ("imp", ConvexFunction::improper(half.clone()).unwrap()),
                ("res", ConvexFunction::restricted(vec![], half).unwrap()),
            ],
        )
        .unwrap()
        .with_closure_hints(vec![ivec(&[1])])
        .unwrap();
        let j = family_to_json(&f);
        let g = family_from_json(&j, "").unwrap();
        assert_eq!(family_to_json(&g), j);
    }

    #[test]
    fn certificate_round_trip() {
        let c = KktCertificate::Refutation { direction: ivec(&[1]), step: rat(1, 2), decrease: rat(1, 2) };
        assert_eq!(certificate_from_json(&certificate_to_json(&c), "").unwrap(), c);
    }
}

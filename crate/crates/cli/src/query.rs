//! Running one query against a family or program, optional oracle
//! certification, and comparison with an expectation block.

use anyhow::Result;
use num_traits::Zero;
use serde_json::{json, Value};
use supdiff_core::json::{
    certificate_to_json, decomposition_to_json, polyhedron_to_json, rational_to_json, set_result_to_json,
    weights_to_json,
};
use supdiff_core::optimality::{kkt_certify, oracle_solve, silp_certify};
use supdiff_core::rational::{fmt_rational, fmt_vector, ExtReal};
use supdiff_core::suprema::{
    assembled_function, caratheodory_decompose, normal_cone_dom, normal_cone_dom_scaled_limit,
    normal_cone_split, oracle_normal_cone_dom, oracle_subdifferential, subdifferential_brondsted,
    subdifferential_split, subdifferential_sup, CaratheodoryDecomposition, Certification, NormalConeSplit,
};
use supdiff_core::{
    ConvexFunction, ConvexProgram, EpsSchedule, FunctionFamily, KktCertificate, KktError, SetResult, SupError,
};

use crate::scenario::{usage, Command, Expectation, Params, Subject, Usage};

pub enum Computed {
    Set(SetResult),
    Split(Box<NormalConeSplit>),
    Decomposition(CaratheodoryDecomposition),
    Certificate(KktCertificate),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// A theorem hypothesis fails for this input.
    Hypothesis,
    /// The computation ran but could not conclude, or tripped a consistency check.
    Failure,
    Usage,
}

impl ErrorClass {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorClass::Failure => 1,
            ErrorClass::Usage => 2,
            ErrorClass::Hypothesis => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::Hypothesis => "hypothesis",
            ErrorClass::Failure => "failure",
            ErrorClass::Usage => "usage",
        }
    }
}

pub fn classify(e: &anyhow::Error) -> ErrorClass {
    for cause in e.chain() {
        if let Some(k) = cause.downcast_ref::<KktError>() {
            return match k {
                _ if k.is_hypothesis() => ErrorClass::Hypothesis,
                KktError::ConeMismatch(..) | KktError::Inconclusive => ErrorClass::Failure,
                _ => ErrorClass::Usage,
            };
        }
        if let Some(s) = cause.downcast_ref::<SupError>() {
            return if s.is_hypothesis() { ErrorClass::Hypothesis } else { ErrorClass::Usage };
        }
        if cause.downcast_ref::<Usage>().is_some() {
            return ErrorClass::Usage;
        }
    }
    ErrorClass::Usage
}

fn family(subject: &Subject, command: Command) -> Result<&FunctionFamily> {
    match subject {
        Subject::Family(f) => Ok(f),
        Subject::Program(_) => {
            usage(format!("{} needs a family, the scenario holds a program", command.name()))
        }
    }
}

fn program(subject: &Subject, command: Command) -> Result<&ConvexProgram> {
    match subject {
        Subject::Program(p) => Ok(p),
        Subject::Family(_) => {
            usage(format!("{} needs a program, the scenario holds a family", command.name()))
        }
    }
}

pub fn execute(subject: &Subject, command: Command, p: &Params) -> Result<Computed> {
    let x = &p.point;
    if x.len() != subject.dim() {
        return usage(format!("point has dimension {}, expected {}", x.len(), subject.dim()));
    }
    let schedule = || EpsSchedule::geometric(p.eps.clone(), p.depth);
    Ok(match command {
        Command::NormalCone => {
            Computed::Set(normal_cone_dom(family(subject, command)?, x, &p.eps, &p.weights)?)
        }
        Command::NormalConeLimit => {
            Computed::Set(normal_cone_dom_scaled_limit(family(subject, command)?, x, &schedule()?)?)
        }
        Command::NormalConeSplit => {
            Computed::Split(Box::new(normal_cone_split(family(subject, command)?, x, &p.eps, &p.weights)?))
        }
        Command::Subdiff => {
            Computed::Set(subdifferential_sup(family(subject, command)?, x, &schedule()?, &p.weights)?)
        }
        Command::SubdiffSplit => Computed::Set(subdifferential_split(
            family(subject, command)?,
            x,
            &schedule()?,
            &p.weights,
            p.exact_active,
        )?),
        Command::Brondsted => {
            Computed::Set(subdifferential_brondsted(family(subject, command)?, x, &schedule()?)?)
        }
        Command::Decompose => {
            let g = p.g.as_ref().map_or_else(|| usage("decompose needs --g"), Ok)?;
            Computed::Decomposition(caratheodory_decompose(family(subject, command)?, x, &p.eps, g)?)
        }
        Command::Kkt => Computed::Certificate(kkt_certify(program(subject, command)?, x, &schedule()?)?),
        Command::Silp => {
            let prog = program(subject, command)?;
            let ConvexFunction::Affine(c) = prog.objective() else {
                return usage("silp needs an affine objective");
            };
            Computed::Certificate(silp_certify(&c.slope, prog.constraints(), x, &schedule()?)?)
        }
    })
}

/// Compares with the brute-force oracles and returns what disagreed.
pub fn certify(
    subject: &Subject,
    command: Command,
    p: &Params,
    computed: &mut Computed,
) -> Result<Vec<String>> {
    let x = &p.point;
    let mut problems = Vec::new();
    let set_check = |r: &mut SetResult, oracle: &supdiff_core::Polyhedron, problems: &mut Vec<String>| {
        *r = r.clone().certify(oracle);
        if r.certified == Some(Certification::Mismatch) {
            problems.push(format!("oracle gives {}, computed {}", oracle.describe(), r.set.describe()));
        }
    };
    match computed {
        Computed::Set(r) => {
            let f = family(subject, command)?;
            let oracle = match command {
                Command::NormalCone | Command::NormalConeLimit => oracle_normal_cone_dom(f, x)?,
                _ => oracle_subdifferential(f, x)?,
            };
            set_check(r, &oracle, &mut problems);
        }
        Computed::Split(s) => {
            let oracle = oracle_normal_cone_dom(family(subject, command)?, x)?;
            set_check(&mut s.total, &oracle, &mut problems);
        }
        Computed::Decomposition(d) => {
            let f = family(subject, command)?;
            let g = p.g.as_ref().expect("decompose carries g");
            if d.support.len() > f.dim() + 1 {
                problems.push(format!("support size {} exceeds {}", d.support.len(), f.dim() + 1));
            }
            let combined = d.combined(f)?;
            if !combined.subgradient_membership(x, &p.eps, g)? {
                problems.push("g is not an ε-subgradient of the combination".into());
            }
            let whole = assembled_function(f).expect("decomposition implies proper entries");
            if let (ExtReal::Finite(fl), ExtReal::Finite(fx)) = (combined.evaluate(x), whole.evaluate(x)) {
                if fl < fx - &p.eps {
                    problems.push("combination falls more than ε below f at x".into());
                }
            }
        }
        Computed::Certificate(c) => {
            let prog = program(subject, command)?;
            if !c.verify(prog, x)? {
                problems.push("certificate does not verify by substitution".into());
            }
            let (value, _) = oracle_solve(prog);
            let fx = prog.objective().evaluate(x);
            if c.certifies_optimality() != (fx == value) {
                problems.push(format!(
                    "certificate says {}, linear program gives optimal value {value}",
                    c.kind()
                ));
            }
        }
    }
    Ok(problems)
}

pub fn to_json(c: &Computed) -> Value {
    match c {
        Computed::Set(r) => set_result_to_json(r),
        Computed::Split(s) => json!({
            "parts": {
                "a": polyhedron_to_json(&s.part_a),
                "b": polyhedron_to_json(&s.part_b),
                "c": polyhedron_to_json(&s.part_c),
            },
            "total": set_result_to_json(&s.total),
        }),
        Computed::Decomposition(d) => decomposition_to_json(d),
        Computed::Certificate(k) => certificate_to_json(k),
    }
}

fn flags(r: &SetResult) -> String {
    let mut out = Vec::new();
    if !r.stabilized {
        out.push("not stabilized".to_string());
    }
    if r.limit_closure {
        out.push("limit closure applied".to_string());
    }
    if r.hint_used {
        out.push("closure hints used".to_string());
    }
    match r.certified {
        Some(Certification::Equal) => out.push("oracle: equal".to_string()),
        Some(Certification::Mismatch) => out.push("oracle: MISMATCH".to_string()),
        None => {}
    }
    if let Some(n) = &r.note {
        out.push(n.clone());
    }
    if out.is_empty() {
        String::new()
    } else {
        format!(" ({})", out.join("; "))
    }
}

pub fn to_text(c: &Computed) -> String {
    match c {
        Computed::Set(r) => format!("{r}{}", flags(r)),
        Computed::Split(s) => format!(
            "{}{}\n  a: {}\n  b: {}\n  c: {}",
            s.total,
            flags(&s.total),
            s.part_a.describe(),
            s.part_b.describe(),
            s.part_c.describe()
        ),
        Computed::Decomposition(d) => {
            let terms: Vec<String> =
                d.support.iter().map(|t| format!("{t}: {}", fmt_rational(&d.lambda[t]))).collect();
            format!("lambda {{{}}}", terms.join(", "))
        }
        Computed::Certificate(k) => match k {
            KktCertificate::NormalCone { witnesses } => {
                let w = &witnesses[0];
                format!(
                    "optimal: normal-cone case, g0 = {}, normal = {} at eps = {}",
                    fmt_vector(&w.subgradient),
                    fmt_vector(&w.normal),
                    witnesses.iter().map(|w| fmt_rational(&w.eps)).collect::<Vec<_>>().join(", ")
                )
            }
            KktCertificate::Multiplier { lambda, subgradient, s } => format!(
                "optimal: multiplier case, lambda = {}, g0 = {}, s = {}",
                fmt_rational(lambda),
                fmt_vector(subgradient),
                fmt_vector(s)
            ),
            KktCertificate::Refutation { direction, step, decrease } => format!(
                "not optimal: direction {}, step {}, objective drops by {}",
                fmt_vector(direction),
                fmt_rational(step),
                fmt_rational(decrease)
            ),
        },
    }
}

/// Mismatches between a computed result and an expectation.
pub fn compare(e: &Expectation, c: &Computed) -> Vec<String> {
    let mut out = Vec::new();
    let set_result = match c {
        Computed::Set(r) => Some(r),
        Computed::Split(s) => Some(&s.total),
        _ => None,
    };
    let need =
        |what: &str, out: &mut Vec<String>| out.push(format!("expected {what}, but the result has none"));

    if let Some(want) = &e.set {
        match set_result {
            Some(r) if r.set.set_equal(want) => {}
            Some(r) => out.push(format!("set: expected {}, got {}", want.describe(), r.set.describe())),
            None => need("a set", &mut out),
        }
    }
    if let Some(want) = &e.tag {
        match set_result {
            Some(r) if &r.provenance.tag == want => {}
            Some(r) => out.push(format!("tag: expected {want}, got {}", r.provenance.tag)),
            None => need("a tag", &mut out),
        }
    }
    if let Some(want) = e.hint_used {
        match set_result {
            Some(r) if r.hint_used == want => {}
            Some(r) => out.push(format!("hint_used: expected {want}, got {}", r.hint_used)),
            None => need("hint_used", &mut out),
        }
    }
    if let Some(want) = e.stabilized {
        match set_result {
            Some(r) if r.stabilized == want => {}
            Some(r) => out.push(format!("stabilized: expected {want}, got {}", r.stabilized)),
            None => need("stabilized", &mut out),
        }
    }
    if let Some(want) = &e.parts {
        match c {
            Computed::Split(s) => {
                for ((name, want), got) in
                    ["a", "b", "c"].iter().zip(want).zip([&s.part_a, &s.part_b, &s.part_c])
                {
                    if !got.set_equal(want) {
                        out.push(format!(
                            "part {name}: expected {}, got {}",
                            want.describe(),
                            got.describe()
                        ));
                    }
                }
            }
            _ => need("split parts", &mut out),
        }
    }
    if let Some(want) = &e.kind {
        match c {
            Computed::Certificate(k) if k.kind() == want => {}
            Computed::Certificate(k) => out.push(format!("kind: expected {want}, got {}", k.kind())),
            _ => need("a certificate", &mut out),
        }
    }
    if let Some(want) = &e.lambda {
        match c {
            Computed::Certificate(KktCertificate::Multiplier { lambda, .. }) if lambda == want => {}
            Computed::Certificate(KktCertificate::Multiplier { lambda, .. }) => {
                out.push(format!("lambda: expected {}, got {}", fmt_rational(want), fmt_rational(lambda)))
            }
            _ => need("a multiplier", &mut out),
        }
    }
    if let Some(want) = &e.weights {
        match c {
            Computed::Decomposition(d) => {
                let got: std::collections::BTreeMap<_, _> = d
                    .lambda
                    .iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let want: std::collections::BTreeMap<_, _> =
                    want.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k.clone(), v.clone())).collect();
                if got != want {
                    out.push(format!(
                        "lambda: expected {}, got {}",
                        weights_to_json(&want),
                        weights_to_json(&got)
                    ));
                }
            }
            _ => need("a decomposition", &mut out),
        }
    }
    if let Some(max) = e.max_support {
        match c {
            Computed::Decomposition(d) if d.support.len() <= max => {}
            Computed::Decomposition(d) => out.push(format!("support size {} exceeds {max}", d.support.len())),
            _ => need("a decomposition", &mut out),
        }
    }
    if e.error.is_some() {
        out.push("expected the computation to be refused on a hypothesis, but it ran".into());
    }
    out
}

/// Echo of the point and parameters for reports.
pub fn params_json(command: Command, p: &Params) -> Value {
    let mut v = json!({
        "command": command.name(),
        "point": supdiff_core::json::vector_to_json(&p.point),
        "eps": rational_to_json(&p.eps),
        "schedule": p.depth,
        "weights": crate::scenario::weights_json(&p.weights),
    });
    if p.exact_active {
        v["exact_active"] = Value::Bool(true);
    }
    if p.certify {
        v["certify"] = Value::Bool(true);
    }
    if let Some(g) = &p.g {
        v["g"] = supdiff_core::json::vector_to_json(g);
    }
    v
}

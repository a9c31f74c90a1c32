//! Scenario files: a family or a program, plus a list of queries with
//! optional expectations.
//!
//! ```json
//! {
//!   "name": "abs",
//!   "family": { "dim": 1, "entries": { ... } },
//!   "queries": [
//!     { "command": "subdiff", "point": [0], "expected": { "set": { ... } } }
//!   ]
//! }
//! ```
//!
//! A bare family or program object is also accepted; its name is the file
//! stem and it has no queries.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use serde_json::{Map, Value};
use supdiff_core::json::{
    family_from_json, polyhedron_from_json, program_from_json, rational_from_json, vector_from_json,
    weights_from_json,
};
use supdiff_core::rational::{int, parse_rational};
use supdiff_core::{ConvexProgram, FunctionFamily, JsonError, Polyhedron, Rational, WeightScheme, MAX_DIM};

/// Malformed input: bad flags, schema violations, unreadable files.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    NormalCone,
    NormalConeLimit,
    NormalConeSplit,
    Subdiff,
    SubdiffSplit,
    Brondsted,
    Decompose,
    Kkt,
    Silp,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::NormalCone,
        Command::NormalConeLimit,
        Command::NormalConeSplit,
        Command::Subdiff,
        Command::SubdiffSplit,
        Command::Brondsted,
        Command::Decompose,
        Command::Kkt,
        Command::Silp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::NormalCone => "normal-cone",
            Command::NormalConeLimit => "normal-cone-limit",
            Command::NormalConeSplit => "normal-cone-split",
            Command::Subdiff => "subdiff",
            Command::SubdiffSplit => "subdiff-split",
            Command::Brondsted => "brondsted",
            Command::Decompose => "decompose",
            Command::Kkt => "kkt",
            Command::Silp => "silp",
        }
    }

    pub fn needs_program(self) -> bool {
        matches!(self, Command::Kkt | Command::Silp)
    }
}

impl FromStr for Command {
    type Err = Usage;

    fn from_str(s: &str) -> Result<Self, Usage> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Usage(format!("unknown command `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub enum Subject {
    Family(FunctionFamily),
    Program(ConvexProgram),
}

impl Subject {
    pub fn dim(&self) -> usize {
        match self {
            Subject::Family(f) => f.dim(),
            Subject::Program(p) => p.dim(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Params {
    pub point: Vec<Rational>,
    pub eps: Rational,
    pub depth: usize,
    pub weights: WeightScheme,
    pub exact_active: bool,
    pub certify: bool,
    pub g: Option<Vec<Rational>>,
}

/// Checks a query's result. Every field is optional.
#[derive(Clone, Debug, Default)]
pub struct Expectation {
    pub set: Option<Polyhedron>,
    /// Normal-cone split parts `a`, `b`, `c`.
    pub parts: Option<[Polyhedron; 3]>,
    pub tag: Option<String>,
    pub hint_used: Option<bool>,
    pub stabilized: Option<bool>,
    pub kind: Option<String>,
    pub lambda: Option<Rational>,
    pub weights: Option<BTreeMap<String, Rational>>,
    pub max_support: Option<usize>,
    /// Only `"hypothesis"` is meaningful: the computation must be refused.
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Query {
    pub command: Command,
    pub params: Params,
    pub expected: Option<Expectation>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub subject: Subject,
    pub queries: Vec<Query>,
}

/// The dimension cap: `SUPDIFF_MAX_DIM` if set, never above the kernel's.
pub fn max_dim() -> Result<usize> {
    match std::env::var("SUPDIFF_MAX_DIM") {
        Err(_) => Ok(MAX_DIM),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(d) if d >= 1 => Ok(d.min(MAX_DIM)),
            _ => usage(format!("SUPDIFF_MAX_DIM must be a positive integer, got `{v}`")),
        },
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| Usage(format!("{}: invalid JSON: {e}", path.display())))?;
    let stem = path.file_stem().map_or_else(|| "scenario".to_string(), |s| s.to_string_lossy().into_owned());
    parse_scenario(&v, &stem).with_context(|| format!("in {}", path.display()))
}

fn schema(e: JsonError) -> anyhow::Error {
    Usage(e.to_string()).into()
}

pub fn parse_scenario(v: &Value, default_name: &str) -> Result<Scenario> {
    let Some(obj) = v.as_object() else {
        return usage("top level: expected an object");
    };
    let (name, subject, queries) = if obj.contains_key("entries") {
        (default_name.to_string(), Subject::Family(family_from_json(v, "").map_err(schema)?), Vec::new())
    } else if obj.contains_key("objective") {
        (default_name.to_string(), Subject::Program(program_from_json(v, "").map_err(schema)?), Vec::new())
    } else {
        let name = match obj.get("name") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return usage("name: expected a string"),
            None => default_name.to_string(),
        };
        let subject = match (obj.get("family"), obj.get("program")) {
            (Some(f), None) => Subject::Family(family_from_json(f, "family").map_err(schema)?),
            (None, Some(p)) => Subject::Program(program_from_json(p, "program").map_err(schema)?),
            (Some(_), Some(_)) => return usage("scenario has both `family` and `program`"),
            (None, None) => return usage("scenario needs `family` or `program`"),
        };
        let queries = match obj.get("queries") {
            None => Vec::new(),
            Some(Value::Array(qs)) => qs
                .iter()
                .enumerate()
                .map(|(i, q)| parse_query(q, &format!("queries[{i}]"), subject.dim()))
                .collect::<Result<_>>()?,
            Some(_) => return usage("queries: expected an array"),
        };
        let is_program = matches!(subject, Subject::Program(_));
        if let Some((i, q)) =
            queries.iter().enumerate().find(|(_, q)| q.command.needs_program() != is_program)
        {
            let holds = if is_program { "a program" } else { "a family" };
            return usage(format!("queries[{i}].command: `{}` cannot run on {holds}", q.command.name()));
        }
        (name, subject, queries)
    };
    let cap = max_dim()?;
    if subject.dim() > cap {
        return usage(format!("dimension {} exceeds the cap of {cap}", subject.dim()));
    }
    Ok(Scenario { name, subject, queries })
}

const QUERY_KEYS: [&str; 9] =
    ["command", "point", "eps", "schedule", "weights", "exact_active", "certify", "g", "expected"];

fn parse_query(v: &Value, path: &str, dim: usize) -> Result<Query> {
    let Some(obj) = v.as_object() else {
        return usage(format!("{path}: expected an object"));
    };
    if let Some(k) = obj.keys().find(|k| !QUERY_KEYS.contains(&k.as_str())) {
        return usage(format!("{path}.{k}: unknown field"));
    }
    let command: Command = match obj.get("command") {
        Some(Value::String(s)) => s.parse().map_err(|e: Usage| Usage(format!("{path}.command: {e}")))?,
        _ => return usage(format!("{path}.command: expected a command name")),
    };
    let point = match obj.get("point") {
        Some(p) => vector_from_json(p, &format!("{path}.point"), Some(dim)).map_err(schema)?,
        None => return usage(format!("{path}.point: missing field")),
    };
    let eps = match obj.get("eps") {
        Some(e) => rational_from_json(e, &format!("{path}.eps")).map_err(schema)?,
        None => int(1),
    };
    let depth = match obj.get("schedule") {
        None => 8,
        Some(d) => match d.as_u64() {
            Some(d) if d >= 1 => d as usize,
            _ => return usage(format!("{path}.schedule: expected a positive depth")),
        },
    };
    let weights = match obj.get("weights") {
        None => WeightScheme::Rho,
        Some(w) => weights_value(w, &format!("{path}.weights"))?,
    };
    let flag = |name: &str| -> Result<bool> {
        match obj.get(name) {
            None => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(_) => usage(format!("{path}.{name}: expected a boolean")),
        }
    };
    let g = match obj.get("g") {
        None => None,
        Some(g) => Some(vector_from_json(g, &format!("{path}.g"), Some(dim)).map_err(schema)?),
    };
    if command == Command::Decompose && g.is_none() {
        return usage(format!("{path}.g: decompose needs a subgradient"));
    }
    let expected = match obj.get("expected") {
        None => None,
        Some(e) => Some(parse_expectation(e, &format!("{path}.expected"))?),
    };
    Ok(Query {
        command,
        params: Params {
            point,
            eps,
            depth,
            weights,
            exact_active: flag("exact_active")?,
            certify: flag("certify")?,
            g,
        },
        expected,
    })
}

fn weights_value(v: &Value, path: &str) -> Result<WeightScheme> {
    match v {
        Value::String(s) if s == "rho" => Ok(WeightScheme::Rho),
        Value::String(s) if s == "unit" => Ok(WeightScheme::Unit),
        Value::Object(o) if o.len() == 1 && o.contains_key("custom") => Ok(WeightScheme::Custom(
            weights_from_json(&o["custom"], &format!("{path}.custom")).map_err(schema)?,
        )),
        _ => usage(format!("{path}: expected \"rho\", \"unit\" or {{\"custom\": {{...}}}}")),
    }
}

fn parse_expectation(v: &Value, path: &str) -> Result<Expectation> {
    let Some(obj) = v.as_object() else {
        return usage(format!("{path}: expected an object"));
    };
    let mut e = Expectation::default();
    for (k, val) in obj {
        let p = format!("{path}.{k}");
        match k.as_str() {
            "set" => e.set = Some(polyhedron_from_json(val, &p).map_err(schema)?),
            "parts" => e.parts = Some(parse_parts(val, &p)?),
            "tag" => e.tag = Some(string(val, &p)?),
            "kind" => e.kind = Some(string(val, &p)?),
            "error" => {
                let s = string(val, &p)?;
                if s != "hypothesis" {
                    return usage(format!("{p}: only \"hypothesis\" is supported"));
                }
                e.error = Some(s);
            }
            "hint_used" => e.hint_used = Some(boolean(val, &p)?),
            "stabilized" => e.stabilized = Some(boolean(val, &p)?),
            "lambda" if val.is_object() => e.weights = Some(weights_from_json(val, &p).map_err(schema)?),
            "lambda" => e.lambda = Some(rational_from_json(val, &p).map_err(schema)?),
            "max_support" => match val.as_u64() {
                Some(n) => e.max_support = Some(n as usize),
                None => return usage(format!("{p}: expected a nonnegative integer")),
            },
            _ => return usage(format!("{p}: unknown field")),
        }
    }
    Ok(e)
}

fn parse_parts(v: &Value, path: &str) -> Result<[Polyhedron; 3]> {
    let Some(o) = v.as_object() else {
        return usage(format!("{path}: expected an object with `a`, `b`, `c`"));
    };
    let part = |k: &str| -> Result<Polyhedron> {
        match o.get(k) {
            Some(p) => polyhedron_from_json(p, &format!("{path}.{k}")).map_err(schema),
            None => usage(format!("{path}.{k}: missing field")),
        }
    };
    Ok([part("a")?, part("b")?, part("c")?])
}

fn string(v: &Value, path: &str) -> Result<String> {
    v.as_str().map(str::to_string).map_or_else(|| usage(format!("{path}: expected a string")), Ok)
}

fn boolean(v: &Value, path: &str) -> Result<bool> {
    v.as_bool().map_or_else(|| usage(format!("{path}: expected a boolean")), Ok)
}

/// `"1,-1/2"` as a vector.
pub fn parse_vector_arg(s: &str, what: &str) -> Result<Vec<Rational>> {
    s.split(',').map(|c| parse_scalar_arg(c, what)).collect()
}

pub fn parse_scalar_arg(s: &str, what: &str) -> Result<Rational> {
    match parse_rational(s.trim()) {
        Some(r) => Ok(r),
        None => usage(format!("{what}: `{s}` is not a rational number")),
    }
}

/// `rho`, `unit` or `custom:<file>` with a JSON label-to-weight object.
pub fn parse_weights_arg(s: &str) -> Result<WeightScheme> {
    match s {
        "rho" => Ok(WeightScheme::Rho),
        "unit" => Ok(WeightScheme::Unit),
        _ => match s.strip_prefix("custom:") {
            Some(file) => {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| Usage(format!("cannot read weights file {file}: {e}")))?;
                let v: Value =
                    serde_json::from_str(&text).map_err(|e| Usage(format!("{file}: invalid JSON: {e}")))?;
                Ok(WeightScheme::Custom(weights_from_json(&v, "weights").map_err(schema)?))
            }
            None => usage(format!("--weights: expected rho, unit or custom:<file>, got `{s}`")),
        },
    }
}

/// Used by report emission to echo a scheme back.
pub fn weights_json(w: &WeightScheme) -> Value {
    match w {
        WeightScheme::Custom(m) => {
            let mut o = Map::new();
            o.insert("custom".into(), supdiff_core::json::weights_to_json(m));
            Value::Object(o)
        }
        other => Value::from(other.name()),
    }
}

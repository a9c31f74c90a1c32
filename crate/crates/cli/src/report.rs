//! Per-query records and the suite report. Records are ordered by scenario
//! name and query index; `timing_ms` is the only field that varies between
//! runs of the same input.

use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use serde_json::{json, Value};

use crate::query::{certify, classify, compare, execute, params_json, to_json, to_text, ErrorClass};
use crate::scenario::{load_scenario, usage, Command, Expectation, Params, Scenario, Subject};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Ran without an expectation or certification to check against.
    Unchecked,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unchecked => "unchecked",
        }
    }
}

pub struct QueryRecord {
    pub index: usize,
    pub command: Command,
    pub params: Value,
    pub result: Option<Value>,
    pub text: String,
    pub error: Option<(ErrorClass, String)>,
    pub problems: Vec<String>,
    pub status: Status,
    pub timing_ms: f64,
}

impl QueryRecord {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "index": self.index,
            "query": self.params,
            "status": self.status.name(),
            "result": self.result,
            "problems": self.problems,
            "timing_ms": self.timing_ms,
        });
        if let Some((class, msg)) = &self.error {
            v["error"] = json!({"class": class.name(), "message": msg});
        }
        v
    }

    /// The exit code this query alone would produce.
    pub fn exit_code(&self) -> u8 {
        match (&self.error, self.status) {
            (Some((class, _)), Status::Fail) => class.exit_code(),
            (_, Status::Fail) => 1,
            _ => 0,
        }
    }
}

pub fn run_query(
    subject: &Subject,
    index: usize,
    command: Command,
    params: &Params,
    expected: Option<&Expectation>,
) -> QueryRecord {
    let start = Instant::now();
    let mut problems = Vec::new();
    let (result, text, error) = match execute(subject, command, params) {
        Ok(mut computed) => {
            if params.certify {
                match certify(subject, command, params, &mut computed) {
                    Ok(p) => problems.extend(p),
                    Err(e) => problems.push(format!("certification failed: {e:#}")),
                }
            }
            if let Some(e) = expected {
                problems.extend(compare(e, &computed));
            }
            (Some(to_json(&computed)), to_text(&computed), None)
        }
        Err(e) => {
            let class = classify(&e);
            let msg = format!("{e:#}");
            let wanted = expected.and_then(|x| x.error.as_deref()) == Some(class.name());
            if !wanted {
                problems.push(format!("{} error: {msg}", class.name()));
            }
            (None, format!("refused ({}): {msg}", class.name()), Some((class, msg)))
        }
    };
    let status = if !problems.is_empty() {
        Status::Fail
    } else if expected.is_some() || params.certify {
        Status::Pass
    } else {
        Status::Unchecked
    };
    QueryRecord {
        index,
        command,
        params: params_json(command, params),
        result,
        text,
        error,
        problems,
        status,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

pub struct ScenarioReport {
    pub name: String,
    pub file: String,
    pub queries: Vec<QueryRecord>,
}

pub struct SuiteReport {
    pub scenarios: Vec<ScenarioReport>,
    pub load_errors: Vec<(String, String)>,
}

impl SuiteReport {
    fn count(&self, s: Status) -> usize {
        self.scenarios.iter().flat_map(|r| &r.queries).filter(|q| q.status == s).count()
    }

    /// 2 if any scenario failed to load, else 1 if any query failed.
    pub fn exit_code(&self) -> u8 {
        if !self.load_errors.is_empty() {
            2
        } else if self.count(Status::Fail) > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "scenarios": self.scenarios.iter().map(|s| json!({
                "name": s.name,
                "file": s.file,
                "queries": s.queries.iter().map(QueryRecord::to_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "load_errors": self.load_errors.iter().map(|(f, m)| json!({"file": f, "message": m})).collect::<Vec<_>>(),
            "summary": {
                "scenarios": self.scenarios.len(),
                "queries": self.scenarios.iter().map(|s| s.queries.len()).sum::<usize>(),
                "passed": self.count(Status::Pass),
                "failed": self.count(Status::Fail),
                "unchecked": self.count(Status::Unchecked),
                "load_errors": self.load_errors.len(),
            },
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.scenarios {
            for q in &s.queries {
                let status = match q.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Unchecked => "----",
                };
                out.push_str(&format!("{status} {}#{} {}: {}\n", s.name, q.index, q.command.name(), q.text));
                for p in &q.problems {
                    out.push_str(&format!("       {p}\n"));
                }
            }
        }
        for (f, m) in &self.load_errors {
            out.push_str(&format!("LOAD {f}: {m}\n"));
        }
        out.push_str(&format!(
            "{} passed, {} failed, {} unchecked, {} load errors\n",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Unchecked),
            self.load_errors.len()
        ));
        out
    }

    /// One line per failed query, naming scenario, index and command.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.scenarios {
            for q in s.queries.iter().filter(|q| q.status == Status::Fail) {
                out.push(format!(
                    "FAIL {}#{} {}: {}",
                    s.name,
                    q.index,
                    q.command.name(),
                    q.problems.join("; ")
                ));
            }
        }
        out.extend(self.load_errors.iter().map(|(f, m)| format!("LOAD {f}: {m}")));
        out
    }
}

fn run_scenario(s: &Scenario, file: String) -> ScenarioReport {
    let queries = s
        .queries
        .iter()
        .enumerate()
        .map(|(i, q)| run_query(&s.subject, i, q.command, &q.params, q.expected.as_ref()))
        .collect();
    ScenarioReport { name: s.name.clone(), file, queries }
}

/// Runs every `*.json` scenario in `dir`. Scenarios run on separate threads;
/// the report is sorted by scenario name, then file name.
pub fn run_suite(dir: &Path) -> Result<SuiteReport> {
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) => return usage(format!("cannot read directory {}: {e}", dir.display())),
    };
    let mut files: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return usage(format!("no scenario files in {}", dir.display()));
    }

    let mut load_errors = Vec::new();
    let mut loaded = Vec::new();
    for path in &files {
        let file = path.file_name().expect("file").to_string_lossy().into_owned();
        match load_scenario(path) {
            Ok(s) => loaded.push((s, file)),
            Err(e) => load_errors.push((file, format!("{e:#}"))),
        }
    }

    let mut scenarios: Vec<ScenarioReport> = std::thread::scope(|scope| {
        let handles: Vec<_> =
            loaded.iter().map(|(s, file)| scope.spawn(move || run_scenario(s, file.clone()))).collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    scenarios.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.file.cmp(&b.file)));
    Ok(SuiteReport { scenarios, load_errors })
}

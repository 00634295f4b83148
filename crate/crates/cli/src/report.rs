//! JSON reports.  Keys are sorted and timings are opt-in, so identical
//! inputs give byte-identical output.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use homred_core::algebra::TruncationPolicy;
use homred_core::rational::fmt_q;
use homred_core::setup::Setup;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// A negative verdict that matches the catalog expectation.
    ExpectedFail,
    /// A verdict with nothing to compare against.
    Info,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub stage: String,
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<bool>,
    pub data: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub expected_fail: usize,
    pub info: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub setup: Value,
    pub policy: Value,
    pub pipeline: Vec<String>,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub exit_code: i32,
}

/// SHA-256 over a canonical rendering of the setup data.
pub fn setup_hash(s: &Setup) -> String {
    let mut text = format!("base_dim {}\n", s.base_dim());
    for (i, j, e) in s.poisson.entries() {
        text.push_str(&format!("pi {i} {j} {e}\n"));
    }
    let l = s.l();
    for a in 0..l {
        for b in 0..l {
            for c in 0..l {
                let v = s.lie.c(a, b, c);
                if v != homred_core::rational::zero() {
                    text.push_str(&format!("f {a} {b} {c} {}\n", fmt_q(&v)));
                }
            }
        }
    }
    for j in &s.moment {
        text.push_str(&format!("J {j}\n"));
    }
    text.push_str(&format!("weights {:?}\ntorus {:?}\n", s.base_weights, s.torus_weights));
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn setup_json(s: &Setup, params: Value) -> Value {
    json!({
        "name": s.name,
        "hash": setup_hash(s),
        "base_dim": s.base_dim(),
        "constraints": s.l(),
        "moment": s.moment.iter().map(|j| j.to_string()).collect::<Vec<_>>(),
        "params": params,
    })
}

pub fn policy_json(p: &TruncationPolicy) -> Value {
    json!({
        "nu_order": p.nu_order,
        "degree": p.poly_degree,
        "level": p.level,
        "filtration": p.filtration,
    })
}

impl Report {
    pub fn finish(mut self, error: Option<String>, cap_exhausted: bool) -> Report {
        let count = |st: Status| self.checks.iter().filter(|c| c.status == st).count();
        self.summary = Summary {
            pass: count(Status::Pass),
            fail: count(Status::Fail),
            expected_fail: count(Status::ExpectedFail),
            info: count(Status::Info),
            skipped: count(Status::Skipped),
        };
        self.exit_code = if cap_exhausted {
            3
        } else if self.summary.fail > 0 || error.is_some() {
            1
        } else {
            0
        };
        self.error = error;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name = self.setup["name"].as_str().unwrap_or("");
        out.push_str(&format!("setup {name} ({})\n", &self.setup["hash"].as_str().unwrap_or("")[..12]));
        for c in &self.checks {
            let st = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::ExpectedFail => "XFAIL",
                Status::Info => "INFO",
                Status::Skipped => "SKIP",
            };
            let t = c.elapsed_ms.map(|ms| format!(" [{ms} ms]")).unwrap_or_default();
            out.push_str(&format!("{st:5} {}.{}{t}\n", c.stage, c.name));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        let s = &self.summary;
        out.push_str(&format!(
            "{} pass, {} fail, {} expected-fail, {} info, {} skipped\n",
            s.pass, s.fail, s.expected_fail, s.info, s.skipped
        ));
        out
    }
}

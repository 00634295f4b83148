//! Declarative setup files (TOML) and the textual polynomial syntax.

use std::sync::Arc;

use homred_core::algebra::{GeneratorTable, GradedElement, Lie, Poisson, TruncationPolicy};
use homred_core::hypotheses::Expected;
use homred_core::rational::{parse_q, Q};
use homred_core::setup::Setup;
use serde::Deserialize;

pub const SCHEMA: u32 = 1;

/// A rational written as an integer or a string such as `"-3/2"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Rat {
    Int(i64),
    Text(String),
}

impl Rat {
    fn value(&self, at: &str) -> Result<Q, String> {
        match self {
            Rat::Int(n) => Ok(Q::from_integer((*n).into())),
            Rat::Text(s) => parse_q(s).ok_or_else(|| format!("{at}: '{s}' is not a rational number")),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PoissonSpec {
    /// `"canonical"` on `(q_1..q_n, p_1..p_n)`.
    Named(String),
    Matrix(Vec<Vec<Rat>>),
}

#[derive(Clone, Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LieSpec {
    pub dim: usize,
    /// Nonzero `[a, b, c, value]` with `a < b`, one-based: `[e_a, e_b] = value e_c`.
    #[serde(default)]
    pub brackets: Vec<(usize, usize, usize, Rat)>,
}

#[derive(Clone, Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub nu_order: Option<u32>,
    pub degree: Option<u32>,
    pub level: Option<u32>,
    pub filtration: Option<u32>,
}

#[derive(Clone, Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExpectedSpec {
    pub nonpositivity: Option<bool>,
    pub generating: Option<bool>,
    pub complete_intersection: Option<bool>,
    pub regular_stratum: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupFile {
    pub schema: u32,
    #[serde(default = "default_name")]
    pub name: String,
    pub base_dim: usize,
    pub poisson: PoissonSpec,
    pub lie: LieSpec,
    pub moment: Vec<String>,
    pub torus_weights: Option<Vec<Vec<i64>>>,
    pub base_weights: Option<Vec<u32>>,
    #[serde(default)]
    pub policy: PolicySpec,
    pub pipeline: Option<Vec<String>>,
    #[serde(default)]
    pub expected: ExpectedSpec,
}

fn default_name() -> String {
    "setup".into()
}

/// Everything a run needs from a file.
pub struct Loaded {
    pub setup: Setup,
    pub policy: PolicySpec,
    pub pipeline: Option<Vec<String>>,
    pub expected: Expected,
    /// Complex cone weights at the origin, when torus weights are given.
    pub cone_weights: Option<Vec<Vec<i64>>>,
}

pub fn load(text: &str, origin: &str) -> Result<Loaded, String> {
    let file: SetupFile = toml::from_str(text).map_err(|e| format!("{origin}: {e}"))?;
    if file.schema != SCHEMA {
        return Err(format!("{origin}: unsupported schema version {} (expected {SCHEMA})", file.schema));
    }
    let n = file.base_dim;
    let poisson = match &file.poisson {
        PoissonSpec::Named(s) if s == "canonical" => {
            if n % 2 != 0 {
                return Err(format!("{origin}: poisson: canonical structure needs an even base_dim"));
            }
            Poisson::canonical(n / 2)
        }
        PoissonSpec::Named(s) => return Err(format!("{origin}: poisson: unknown structure '{s}'")),
        PoissonSpec::Matrix(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(format!("{origin}: poisson: matrix must be {n} x {n}"));
            }
            let mut m = Vec::new();
            for (i, r) in rows.iter().enumerate() {
                let row: Result<Vec<Q>, String> =
                    r.iter().enumerate().map(|(j, v)| v.value(&format!("{origin}: poisson[{}][{}]", i + 1, j + 1))).collect();
                m.push(row?);
            }
            Poisson::constant(&m).map_err(|e| format!("{origin}: poisson: {e}"))?
        }
    };
    let mut entries = Vec::new();
    for (k, (a, b, c, v)) in file.lie.brackets.iter().enumerate() {
        let at = format!("{origin}: lie.brackets[{}]", k + 1);
        if *a == 0 || *b == 0 || *c == 0 {
            return Err(format!("{at}: indices are one-based"));
        }
        entries.push((a - 1, b - 1, c - 1, v.value(&at)?));
    }
    let lie = Lie::from_brackets(file.lie.dim, &entries).map_err(|e| format!("{origin}: lie: {e}"))?;
    let table = GeneratorTable::base(n);
    let mut moment = Vec::new();
    for (k, src) in file.moment.iter().enumerate() {
        let p = parse_polynomial(src, &table).map_err(|e| format!("{origin}: moment[{}]: {e}", k + 1))?;
        moment.push(p);
    }
    let mut setup = Setup::new(&file.name, poisson, lie, moment).map_err(|e| format!("{origin}: {e}"))?;
    if let Some(w) = &file.base_weights {
        setup = setup.with_base_weights(w.clone()).map_err(|e| format!("{origin}: base_weights: {e}"))?;
    }
    if let Some(w) = &file.torus_weights {
        setup = setup.with_torus_weights(w.clone()).map_err(|e| format!("{origin}: torus_weights: {e}"))?;
    }
    let e = &file.expected;
    Ok(Loaded {
        cone_weights: file.torus_weights.clone(),
        setup,
        policy: file.policy,
        pipeline: file.pipeline,
        expected: Expected {
            nonpositivity: e.nonpositivity,
            generating: e.generating,
            complete_intersection: e.complete_intersection,
            regular_stratum: e.regular_stratum,
        },
    })
}

impl PolicySpec {
    pub fn apply(&self, p: &mut TruncationPolicy) {
        if let Some(v) = self.nu_order {
            p.nu_order = v;
        }
        if let Some(v) = self.degree {
            p.poly_degree = Some(v);
        }
        if let Some(v) = self.level {
            p.level = v;
        }
        if let Some(v) = self.filtration {
            p.filtration = v;
        }
    }
}

/// Parse integer/rational coefficients, variables `x1..xN`, `+ - * /`,
/// `^` with a nonnegative integer exponent, and parentheses.
pub fn parse_polynomial(src: &str, table: &Arc<GeneratorTable>) -> Result<GradedElement, String> {
    let mut p = Parser { s: src.as_bytes(), pos: 0, table };
    let e = p.expr()?;
    p.ws();
    if p.pos < p.s.len() {
        return Err(p.err("unexpected character"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    table: &'a Arc<GeneratorTable>,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> String {
        match self.s.get(self.pos) {
            Some(c) => format!("column {}: {msg} '{}'", self.pos + 1, *c as char),
            None => format!("column {}: {msg} (end of input)", self.pos + 1),
        }
    }

    fn ws(&mut self) {
        while self.s.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<GradedElement, String> {
        let mut acc = if self.eat(b'-') {
            -&self.term()?
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<GradedElement, String> {
        let mut acc = self.power()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.power()?;
            } else if self.eat(b'/') {
                let start = self.pos;
                let d = self.integer()?;
                if d == 0 {
                    self.pos = start;
                    return Err(self.err("division by zero at"));
                }
                acc = acc.scale(&Q::new(1.into(), d.into()));
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<GradedElement, String> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.integer()?;
            let mut out = GradedElement::one(self.table);
            for _ in 0..e {
                out = &out * &base;
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64, String> {
        self.ws();
        let start = self.pos;
        while self.s.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer, found"));
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().map_err(|_| {
            self.pos = start;
            self.err("integer out of range at")
        })
    }

    fn atom(&mut self) -> Result<GradedElement, String> {
        self.ws();
        match self.s.get(self.pos) {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')', found"));
                }
                Ok(e)
            }
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                let i = self.integer()?;
                let n = self.table.base_dim() as u64;
                if i == 0 || i > n {
                    self.pos = start;
                    return Err(self.err(&format!("variable index outside x1..x{n} at")));
                }
                Ok(GradedElement::base_var(self.table, i as usize - 1))
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                Ok(GradedElement::one(self.table).scale(&Q::from_integer(v.into())))
            }
            _ => Err(self.err("unexpected")),
        }
    }
}

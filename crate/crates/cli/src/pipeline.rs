//! Pipeline stages: hypotheses, koszul, tate, charge, reduce.

use std::time::Instant;

use rand::seq::SliceRandom;
use serde_json::{json, Value};

use homred_core::algebra::{GeneratorTable, GradedElement, TruncationPolicy};
use homred_core::brst::{
    charge_recursion, classical_charge_ci, classical_differential, quantum_charge, quantum_differentials,
    representation_residual, slice_probes,
};
use homred_core::hypotheses::{cone_test, equivariance_first_class, quadratic_sign_test, rank_probe, Example, Expected};
use homred_core::koszul::{
    base_monomials, euler_consistent, first_non_acyclic, homology_table, linear_contraction, slice_contraction,
    verified_contraction, Complement, KoszulComplex,
};
use homred_core::rational::{fmt_q, q, Q};
use homred_core::reduction::{
    classical_contraction, classical_reduced_bracket, dirac_bracket, normal_forms, quantum_contraction, reduced_star,
    semiclassical_bracket, torus_invariants, ReducedProductTable,
};
use homred_core::sampling::rng;
use homred_core::setup::Setup;
use homred_core::tate::{poincare_check, TateResolution};
use homred_core::Error;

use crate::report::{Check, Status};

pub const STAGES: [&str; 5] = ["hypotheses", "koszul", "tate", "charge", "reduce"];

/// What the pipeline runs on.
pub struct Subject {
    pub setup: Setup,
    pub expected: Expected,
    pub cone_weights: Option<Vec<Vec<i64>>>,
    pub example: Option<Example>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triples {
    All,
    Sample(usize),
}

pub struct Options {
    pub policy: TruncationPolicy,
    pub seed: u64,
    pub timings: bool,
    pub triples: Triples,
    /// Probe degree for operator identities.
    pub probe_degree: u32,
}

/// Stage failure that aborts the run.
pub struct CapExhausted(pub String);

struct Run<'a> {
    subject: &'a Subject,
    opts: &'a Options,
    checks: Vec<Check>,
    acyclic: Option<bool>,
}

fn verdict(computed: bool, expected: Option<bool>) -> Status {
    match expected {
        Some(e) if e != computed => Status::Fail,
        Some(_) if !computed => Status::ExpectedFail,
        None if !computed => Status::Info,
        _ => Status::Pass,
    }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn pt(p: &[Q]) -> Vec<String> {
    p.iter().map(fmt_q).collect()
}

impl Run<'_> {
    fn record(&mut self, stage: &str, name: &str, status: Status, expected: Option<bool>, data: Value, t0: Instant) {
        self.checks.push(Check {
            stage: stage.into(),
            name: name.into(),
            status,
            expected,
            data,
            elapsed_ms: self.opts.timings.then(|| t0.elapsed().as_millis()),
        });
    }

    /// Record a core error; cap exhaustion aborts.
    fn error(&mut self, stage: &str, name: &str, e: Error, t0: Instant) -> Result<(), CapExhausted> {
        if let Error::CapExhausted(m) = &e {
            self.record(stage, name, Status::Fail, None, json!({ "error": e.to_string() }), t0);
            return Err(CapExhausted(m.clone()));
        }
        self.record(stage, name, Status::Fail, None, json!({ "error": e.to_string() }), t0);
        Ok(())
    }

    fn setup(&self) -> &Setup {
        &self.subject.setup
    }

    fn degree(&self) -> u32 {
        self.opts.policy.poly_degree.unwrap_or(6)
    }

    fn koszul_complex(&self) -> KoszulComplex {
        let s = self.setup();
        let t = GeneratorTable::koszul(s.base_dim(), s.l());
        KoszulComplex::from_setup(s, &t).expect("koszul table matches setup")
    }

    fn is_acyclic(&mut self) -> bool {
        if let Some(a) = self.acyclic {
            return a;
        }
        let a = self.setup().is_homogeneous() && first_non_acyclic(&self.koszul_complex(), self.degree(), 1).is_none();
        self.acyclic = Some(a);
        a
    }

    fn hypotheses(&mut self) -> Result<(), CapExhausted> {
        let st = "hypotheses";
        let t0 = Instant::now();
        let eq = equivariance_first_class(self.setup());
        let residuals: Vec<Value> =
            eq.residuals.iter().map(|(a, b, r)| json!({ "a": a + 1, "b": b + 1, "residual": r.to_string() })).collect();
        self.record(st, "equivariance", pass_if(eq.holds), None, json!({ "holds": eq.holds, "residuals": residuals }), t0);

        let t0 = Instant::now();
        let want = self.subject.expected.nonpositivity;
        if let Some(w) = self.subject.cone_weights.clone() {
            let v = cone_test(&w);
            self.record(st, "nonpositivity", verdict(v.spans, want), want, json!({ "method": "cone", "weights": w, "spans": v.spans, "witness": v.witness.map(|k| k + 1) }), t0);
        } else if let Some(ok) = quadratic_sign_test(self.setup()).filter(|_| self.setup().l() == 1) {
            self.record(st, "nonpositivity", verdict(ok, want), want, json!({ "method": "quadratic-sign", "holds": ok }), t0);
        } else {
            self.record(st, "nonpositivity", Status::Skipped, want, json!({ "reason": "no torus weights and not a single quadratic constraint" }), t0);
        }

        let t0 = Instant::now();
        let mut points = vec![vec![q(0); self.setup().base_dim()]];
        if let Some(ex) = &self.subject.example {
            points.extend(ex.sample(&mut rng(self.opts.seed), 8));
        }
        let want = self.subject.expected.regular_stratum;
        match rank_probe(self.setup(), &points) {
            Ok(tab) => {
                let rows: Vec<Value> = tab.rows.iter().map(|r| json!({ "point": pt(&r.point), "rank": r.rank })).collect();
                let data = json!({ "rows": rows, "max_rank": tab.max_rank, "full_rank": tab.full_rank, "full_rank_attained": tab.full_rank_attained });
                self.record(st, "rank-probe", verdict(tab.full_rank_attained, want), want, data, t0);
            }
            Err(e) => self.error(st, "rank-probe", e, t0)?,
        }
        Ok(())
    }

    fn koszul(&mut self) -> Result<(), CapExhausted> {
        let st = "koszul";
        let t0 = Instant::now();
        if !self.setup().is_homogeneous() {
            self.record(st, "homology", Status::Skipped, None, json!({ "reason": "moment map is not homogeneous" }), t0);
            return Ok(());
        }
        let d = self.degree();
        let rows = homology_table(&self.koszul_complex(), d);
        let euler = euler_consistent(&rows);
        let nonzero: Vec<Value> = rows
            .iter()
            .filter(|r| r.k > 0 && r.dim > 0)
            .map(|r| json!({ "slice": r.slice, "k": r.k, "dim": r.dim }))
            .collect();
        let acyclic = nonzero.is_empty();
        self.acyclic = Some(acyclic);
        self.record(st, "euler-characteristic", pass_if(euler), None, json!({ "slices": d + 1 }), t0);
        let want = self.subject.expected.complete_intersection;
        let data = json!({ "max_slice": d, "acyclic": acyclic, "nonzero_higher_homology": nonzero });
        self.record(st, "complete-intersection", verdict(acyclic, want), want, data, t0);
        if !acyclic {
            return Ok(());
        }
        let t0 = Instant::now();
        let s = self.setup().clone();
        let t = GeneratorTable::koszul(s.base_dim(), s.l());
        match slice_contraction(&s, &t, &self.opts.policy, Complement::Fischer).and_then(|k| verified_contraction(&k)) {
            Ok(c) => {
                let r = c.verify();
                self.record(st, "contraction", pass_if(r.identities_hold()), None, json!({ "identities": r.identities_hold(), "failure": r.failure }), t0);
            }
            Err(e) => self.error(st, "contraction", e, t0)?,
        }
        let t0 = Instant::now();
        if let Ok(lc) = linear_contraction(&s, &t, d) {
            let mut bad = None;
            for w in 0..=d.min(4) {
                for m in base_monomials(&t, &s.base_weights, w) {
                    let x = GradedElement::term(&t, m, q(1));
                    if !lc.h(&lc.prol(&lc.res(&x))).is_zero() || !lc.h(&lc.h(&x)).is_zero() {
                        bad.get_or_insert_with(|| x.to_string());
                    }
                }
            }
            self.record(st, "linear-contraction", pass_if(bad.is_none()), None, json!({ "side_conditions": bad.is_none(), "failure": bad }), t0);
        }
        Ok(())
    }

    fn tate(&mut self) -> Result<(), CapExhausted> {
        let st = "tate";
        let t0 = Instant::now();
        let level = self.opts.policy.level.max(1);
        match TateResolution::through(self.setup(), level, &self.opts.policy) {
            Ok(r) => {
                let counts = r.counts();
                let higher: usize = counts.iter().skip(1).sum();
                let want = self.subject.expected.complete_intersection;
                let data = json!({ "levels": level, "generators": counts, "cap": r.cap });
                self.record(st, "generators", verdict(higher == 0, want), want, data, t0);
                let t0 = Instant::now();
                let p = poincare_check(&r, self.degree());
                self.record(st, "poincare-series", pass_if(p.holds), None, json!({ "chain_ranks": p.chain_ranks, "product": p.product }), t0);
            }
            Err(e) => self.error(st, "resolution", e, t0)?,
        }
        Ok(())
    }

    fn charge(&mut self) -> Result<(), CapExhausted> {
        let st = "charge";
        let t0 = Instant::now();
        let s = self.setup().clone();
        let pd = self.opts.probe_degree;
        let equivariant = equivariance_first_class(&s).holds;
        if self.is_acyclic() && equivariant {
            match classical_charge_ci(&s) {
                Ok(c) => {
                    self.record(st, "classical-nilpotent", pass_if(c.is_nilpotent()), None, json!({ "charge": c.element.to_string() }), t0);
                    let t0 = Instant::now();
                    match classical_differential(&s, &c) {
                        Ok(ops) => {
                            let r = ops.verify(&slice_probes(c.table(), pd));
                            self.record(st, "classical-identities", pass_if(r.holds()), None, json!({ "checks": r.checks, "probes": r.probes, "failure": r.failure, "probe_degree": pd }), t0);
                        }
                        Err(e) => self.error(st, "classical-identities", e, t0)?,
                    }
                }
                Err(e) => self.error(st, "classical-nilpotent", e, t0)?,
            }
        } else {
            let level = self.opts.policy.level.max(2);
            match TateResolution::through(&s, level, &self.opts.policy).and_then(|t| charge_recursion(&s, &t, &self.opts.policy)) {
                Ok(c) => {
                    let f = c.residual_filtration;
                    let ok = f.is_none_or(|f| f >= self.opts.policy.filtration);
                    let data = json!({ "steps": c.parts.len(), "residual_filtration": f, "nilpotent": c.is_nilpotent() });
                    self.record(st, "recursive-charge", pass_if(ok), None, data, t0);
                }
                Err(e) => self.error(st, "recursive-charge", e, t0)?,
            }
        }
        let t0 = Instant::now();
        let quadratic = s.moment_degrees().is_some_and(|d| d.iter().all(|&k| k <= 2)) && s.base_weights.iter().all(|&w| w == 1);
        if !s.poisson.is_constant() || !quadratic {
            self.record(st, "quantum", Status::Skipped, None, json!({ "reason": "quantum charge needs a constant Poisson tensor and a quadratic moment map" }), t0);
            return Ok(());
        }
        let n = self.opts.policy.nu_order;
        match representation_residual(&s, &s.moment, n) {
            Ok(Some(r)) => {
                self.record(st, "quantum", Status::Fail, None, json!({ "representation_residual": r.to_string() }), t0);
                return Ok(());
            }
            Err(e) => return self.error(st, "quantum", e, t0),
            Ok(None) => {}
        }
        match quantum_charge(&s, &s.moment, n) {
            Ok(c) => {
                self.record(st, "quantum-square", Status::Pass, None, json!({ "nu_order": n, "charge": c.element.to_string() }), t0);
                let t0 = Instant::now();
                let p = TruncationPolicy { nu_order: n, poly_degree: None, ..self.opts.policy };
                match quantum_differentials(&s, &c, &s.moment, &p) {
                    Ok(ops) if self.is_acyclic() => {
                        let r = ops.verify(&slice_probes(c.table(), pd));
                        self.record(st, "quantum-identities", pass_if(r.holds()), None, json!({ "checks": r.checks, "probes": r.probes, "failure": r.failure, "probe_degree": pd }), t0);
                    }
                    Ok(_) => self.record(st, "quantum-identities", Status::Skipped, None, json!({ "reason": "not a complete intersection on the checked slices" }), t0),
                    Err(e) => self.error(st, "quantum-identities", e, t0)?,
                }
            }
            Err(e) => self.error(st, "quantum-square", e, t0)?,
        }
        Ok(())
    }

    fn reduce(&mut self) -> Result<(), CapExhausted> {
        let st = "reduce";
        let t0 = Instant::now();
        let s = self.setup().clone();
        let reason = if !s.poisson.is_constant() {
            Some("reduction needs a constant Poisson tensor")
        } else if s.torus_weights.is_none() {
            Some("invariants are enumerated for torus actions only")
        } else if !self.is_acyclic() {
            Some("the Koszul complex is not acyclic on the checked slices")
        } else {
            None
        };
        if let Some(r) = reason {
            self.record(st, "reduced-product", Status::Skipped, None, json!({ "reason": r }), t0);
            return Ok(());
        }
        let p = self.opts.policy;
        let kt = GeneratorTable::koszul(s.base_dim(), s.l());
        let built = slice_contraction(&s, &kt, &p, Complement::Fischer)
            .and_then(|kos| quantum_contraction(&s, &kos, &s.moment, &p).map(|qc| (kos, qc)));
        let (kos, qc) = match built {
            Ok(x) => x,
            Err(e) => return self.error(st, "reduced-product", e, t0),
        };
        let gens = match torus_invariants(&s, 2) {
            Ok(v) => normal_forms(&kos, &v),
            Err(e) => return self.error(st, "reduced-product", e, t0),
        };
        let n = gens.len();
        let all: Vec<(usize, usize, usize)> =
            (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k)))).collect();
        let triples = match self.opts.triples {
            Triples::All => all,
            Triples::Sample(k) => {
                let mut r = rng(self.opts.seed);
                let mut v: Vec<_> = all.choose_multiple(&mut r, k.min(all.len())).cloned().collect();
                v.sort();
                v
            }
        };
        match ReducedProductTable::build(&qc, gens.clone(), Some(triples)) {
            Ok(tab) => {
                let first = tab.residuals.first().map(|(t, r)| json!({ "triple": [t.0 + 1, t.1 + 1, t.2 + 1], "associator": r.to_string() }));
                let data = json!({
                    "nu_order": p.nu_order,
                    "generators": gens.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                    "triples_checked": tab.triples_checked,
                    "associativity_residuals": tab.residuals.len(),
                    "first_residual": first,
                });
                self.record(st, "associativity", pass_if(tab.associative()), None, data, t0);
            }
            Err(e) => return self.error(st, "associativity", e, t0),
        }
        let t0 = Instant::now();
        let one = GradedElement::one(s.base_table());
        let mut unit_ok = true;
        let mut bracket_bad = None;
        for f in &gens {
            unit_ok &= reduced_star(&qc, f, &one).map(|x| &x == f).unwrap_or(false);
            for g in &gens {
                let sc = semiclassical_bracket(&qc, f, g);
                let db = dirac_bracket(&kos, &s, f, g).embed(s.base_table());
                if !matches!((&sc, &db), (Ok(a), Ok(b)) if a == b) {
                    bracket_bad.get_or_insert_with(|| format!("{f} , {g}"));
                }
            }
        }
        self.record(st, "unit", pass_if(unit_ok), None, json!({}), t0);
        self.record(st, "semiclassical-bracket", pass_if(bracket_bad.is_none()), None, json!({ "pairs": n * n, "failure": bracket_bad }), t0);
        let t0 = Instant::now();
        let bt = GeneratorTable::brst(s.base_dim(), s.l());
        let cc = slice_contraction(&s, &bt, &p, Complement::Fischer).and_then(|k| classical_contraction(&s, &k).map(|c| (k, c)));
        match cc {
            Ok((k, cc)) => {
                let mut bad = None;
                for f in &gens {
                    for g in &gens {
                        let a = classical_reduced_bracket(&cc, f, g);
                        if !matches!(&a, Ok(a) if *a == dirac_bracket(&k, &s, f, g)) {
                            bad.get_or_insert_with(|| format!("{f} , {g}"));
                        }
                    }
                }
                self.record(st, "classical-bracket", pass_if(bad.is_none()), None, json!({ "pairs": n * n, "failure": bad }), t0);
            }
            Err(e) => self.error(st, "classical-bracket", e, t0)?,
        }
        Ok(())
    }
}

/// Run the selected stages in pipeline order.
pub fn run(subject: &Subject, stages: &[String], opts: &Options) -> (Vec<Check>, Option<CapExhausted>) {
    let mut r = Run { subject, opts, checks: Vec::new(), acyclic: None };
    for st in STAGES {
        if !stages.iter().any(|s| s == st) {
            continue;
        }
        let out = match st {
            "hypotheses" => r.hypotheses(),
            "koszul" => r.koszul(),
            "tate" => r.tate(),
            "charge" => r.charge(),
            _ => r.reduce(),
        };
        if let Err(e) = out {
            return (r.checks, Some(e));
        }
    }
    (r.checks, None)
}

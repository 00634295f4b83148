//! `homred`: run reduction pipelines on catalog examples or setup files.

mod pipeline;
mod report;
mod setup_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use homred_core::algebra::TruncationPolicy;
use homred_core::hypotheses::{example, Example, Params, KEYS};

use pipeline::{Options, Subject, Triples, STAGES};
use report::{policy_json, setup_json, Report, Summary, REPORT_SCHEMA};

const EXIT_PARSE: u8 = 2;

#[derive(Parser)]
#[command(name = "homred", version, about = "Exact homological reduction of polynomial moment maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Stage {
    Hypotheses,
    Koszul,
    Tate,
    Charge,
    Reduce,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run pipeline stages on a catalog example or a setup file.
    Run(RunArgs),
    /// List catalog examples whose key contains FILTER.
    List {
        filter: Option<String>,
        /// Write the listing as JSON to this path (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Catalog key, see `homred list`.
    #[arg(long, conflicts_with = "setup", required_unless_present = "setup")]
    example: Option<String>,
    /// TOML setup file.
    #[arg(long)]
    setup: Option<PathBuf>,
    /// Stages to run; repeat or separate with commas.
    #[arg(long, value_enum, value_delimiter = ',')]
    pipeline: Vec<Stage>,
    #[arg(long)]
    nu_order: Option<u32>,
    /// Slice degree cap.
    #[arg(long)]
    degree: Option<u32>,
    /// Highest Tate level.
    #[arg(long)]
    level: Option<u32>,
    /// Write the JSON report to this path (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dimension parameter of parametric examples.
    #[arg(long)]
    n: Option<usize>,
    /// Particle count for the planar example.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<i64>,
    /// Associativity triples: a count to sample, or `all`.
    #[arg(long, default_value = "64")]
    triples: String,
    /// Degree of probe monomials for operator identities.
    #[arg(long, default_value_t = 3)]
    probe_degree: u32,
    /// Include wall-clock timings (makes reports nondeterministic).
    #[arg(long)]
    timings: bool,
}

fn configure_threads() {
    if let Some(n) = std::env::var("HOMRED_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        // A second initialization only happens in tests; ignore it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn write_out(path: &PathBuf, text: &str) -> std::io::Result<()> {
    if path.as_os_str() == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text)
    }
}

fn expected_json(e: &homred_core::hypotheses::Expected) -> serde_json::Value {
    json!({
        "nonpositivity": e.nonpositivity,
        "generating": e.generating,
        "complete_intersection": e.complete_intersection,
        "regular_stratum": e.regular_stratum,
    })
}

fn params_json(ex: &Example) -> serde_json::Value {
    match ex.key {
        "angular-momentum" | "commuting-variety" => json!({ "n": ex.params.n }),
        "planar-particles" => json!({ "m": ex.params.m }),
        "torus-t2" => json!({ "alpha": ex.params.alpha, "beta": ex.params.beta }),
        _ => json!({}),
    }
}

fn list(filter: Option<String>, json_out: Option<PathBuf>) -> ExitCode {
    let f = filter.unwrap_or_default();
    let mut entries = Vec::new();
    for key in KEYS.iter().filter(|k| k.contains(f.as_str())) {
        let p = if *key == "commuting-variety" { Params { n: 2, ..Default::default() } } else { Params::default() };
        let ex = example(key, &p).expect("catalog entries build");
        entries.push(json!({
            "key": ex.key,
            "title": ex.title,
            "parametric": ex.is_parametric(),
            "params": params_json(&ex),
            "base_dim": ex.setup.base_dim(),
            "constraints": ex.setup.l(),
            "expected": expected_json(&ex.expected),
        }));
    }
    match json_out {
        Some(path) => {
            let mut s = serde_json::to_string_pretty(&json!({ "schema": REPORT_SCHEMA, "examples": entries })).unwrap();
            s.push('\n');
            if let Err(e) = write_out(&path, &s) {
                eprintln!("homred: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_PARSE);
            }
        }
        None => {
            for e in &entries {
                println!("{:20} {}", e["key"].as_str().unwrap(), e["title"].as_str().unwrap());
            }
        }
    }
    ExitCode::SUCCESS
}

fn run(args: RunArgs) -> ExitCode {
    let mut policy = TruncationPolicy::default();
    let mut file_stages = None;
    let (subject, params) = if let Some(key) = &args.example {
        let d = Params::default();
        let p = Params {
            n: args.n.unwrap_or(if key == "commuting-variety" { 2 } else { d.n }),
            m: args.m.unwrap_or(d.m),
            alpha: args.alpha.unwrap_or(d.alpha),
            beta: args.beta.unwrap_or(d.beta),
        };
        match example(key, &p) {
            Ok(ex) => {
                let params = params_json(&ex);
                let s = Subject {
                    setup: ex.setup.clone(),
                    expected: ex.expected.clone(),
                    cone_weights: ex.cone_weights.clone(),
                    example: Some(ex),
                };
                (s, params)
            }
            Err(e) => {
                eprintln!("homred: {e}");
                return ExitCode::from(EXIT_PARSE);
            }
        }
    } else {
        let path = args.setup.as_ref().expect("clap requires --example or --setup");
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("homred: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_PARSE);
            }
        };
        match setup_file::load(&text, &path.display().to_string()) {
            Ok(l) => {
                l.policy.apply(&mut policy);
                file_stages = l.pipeline;
                (Subject { setup: l.setup, expected: l.expected, cone_weights: l.cone_weights, example: None }, json!({}))
            }
            Err(e) => {
                eprintln!("homred: {e}");
                return ExitCode::from(EXIT_PARSE);
            }
        }
    };
    if let Some(v) = args.nu_order {
        policy.nu_order = v;
    }
    if let Some(v) = args.degree {
        policy.poly_degree = Some(v);
    }
    if let Some(v) = args.level {
        policy.level = v;
    }
    let triples = match args.triples.as_str() {
        "all" => Triples::All,
        s => match s.parse() {
            Ok(k) => Triples::Sample(k),
            Err(_) => {
                eprintln!("homred: --triples expects a count or 'all', got '{s}'");
                return ExitCode::from(EXIT_PARSE);
            }
        },
    };
    let stages: Vec<String> = if !args.pipeline.is_empty() {
        if args.pipeline.contains(&Stage::All) {
            STAGES.iter().map(|s| s.to_string()).collect()
        } else {
            args.pipeline.iter().map(|s| format!("{s:?}").to_lowercase()).collect()
        }
    } else if let Some(fs) = file_stages {
        if let Some(bad) = fs.iter().find(|s| *s != "all" && !STAGES.contains(&s.as_str())) {
            eprintln!("homred: unknown pipeline stage '{bad}' in setup file");
            return ExitCode::from(EXIT_PARSE);
        }
        if fs.iter().any(|s| s == "all") {
            STAGES.iter().map(|s| s.to_string()).collect()
        } else {
            fs
        }
    } else {
        vec!["hypotheses".into()]
    };
    let opts = Options { policy, seed: args.seed, timings: args.timings, triples, probe_degree: args.probe_degree };
    let (checks, cap) = pipeline::run(&subject, &stages, &opts);
    let report = Report {
        schema: REPORT_SCHEMA,
        tool: format!("homred {}", env!("CARGO_PKG_VERSION")),
        setup: setup_json(&subject.setup, params),
        policy: policy_json(&policy),
        pipeline: STAGES.iter().filter(|s| stages.iter().any(|t| t == *s)).map(|s| s.to_string()).collect(),
        seed: args.seed,
        checks,
        summary: Summary { pass: 0, fail: 0, expected_fail: 0, info: 0, skipped: 0 },
        error: None,
        exit_code: 0,
    };
    let cap_hit = cap.is_some();
    let report = report.finish(cap.map(|c| format!("cap exhausted: {}", c.0)), cap_hit);
    print!("{}", report.to_text());
    if let Some(path) = &args.json {
        if let Err(e) = write_out(path, &report.to_json()) {
            eprintln!("homred: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_PARSE);
        }
    }
    ExitCode::from(report.exit_code as u8)
}

fn main() -> ExitCode {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run(args) => run(args),
        Command::List { filter, json } => list(filter, json),
    }
}

//! Command-line front end: enumerate stable graphs, compute counterterm
//! tables by either construction, assemble effective interactions, and run
//! the verification suites. JSON on stdout, logs on stderr; exit status 0 on
//! success, 1 on verification failure, 2 on configuration errors.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use renorm_core::amplitude::w_graph;
use renorm_core::config::{
    bphz_table_to_json, equality_report_to_json, graded_to_json, indexed_counterterms_to_json,
    ModelSetup, RunConfig,
};
use renorm_core::graph::{
    enumerate_subgraphs, index_closure, orbit_count_check, reassemble_triple, GraphCatalog,
};
use renorm_core::model::propagator;
use renorm_core::oracle::w_oracle;
use renorm_core::renorm::{
    bphz_counterterms, bphz_effective, indexed_counterterms, indexed_effective,
    verify_counterterm_equality,
};
use renorm_core::scale::ScaleContext;
use renorm_core::{Error, Result};

#[derive(Parser)]
#[command(name = "renorm-duel", version, about = "Exact comparison of two effective-interaction constructions over a finite field model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List isomorphism classes of connected stable graphs.
    Enumerate(EnumerateArgs),
    /// Compute a counterterm table by the chosen construction.
    Counterterms(CountertermArgs),
    /// Compute the effective interaction by the chosen construction.
    Effective(EffectiveArgs),
    /// Run a verification suite and report pass/fail.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    genus: u32,
    #[arg(long)]
    legs: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Recursion over the well-ordered index set.
    Costello,
    /// Recursion over graphs by edge count.
    Bphz,
}

#[derive(Args)]
struct CountertermArgs {
    #[arg(long)]
    config: String,
    #[arg(long, value_enum)]
    method: Method,
}

#[derive(Args)]
struct EffectiveArgs {
    #[arg(long)]
    config: String,
    #[arg(long, value_enum)]
    method: Method,
    /// Evaluate the length-scale symbol numerically for reporting.
    #[arg(long)]
    at_l: Option<f64>,
    /// Keep the length scale symbolic (the default).
    #[arg(long, conflicts_with = "at_l")]
    symbolic_l: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckSuite {
    MainTheorem,
    Rge,
    Oracle,
    OrbitCount,
    Roundtrip,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: String,
    #[arg(long, value_enum, default_value = "all")]
    check: CheckSuite,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &str) -> Result<ModelSetup> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read `{path}`: {e}")))?;
    RunConfig::from_json(&text)?.build()
}

fn emit(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Enumerate(args) => {
            let catalog = GraphCatalog::new();
            let graphs = catalog.connected(args.genus, args.legs);
            let listed: Vec<String> = graphs.iter().map(|g| g.to_string()).collect();
            emit(&json!({
                "genus": args.genus,
                "legs": args.legs,
                "count": listed.len(),
                "graphs": listed,
            }));
            Ok(true)
        }
        Command::Counterterms(args) => {
            let setup = load(&args.config)?;
            let catalog = GraphCatalog::new();
            let p = propagator(&setup.model, &setup.ctx, setup.regulator, setup.length)?;
            match args.method {
                Method::Costello => {
                    let ct =
                        indexed_counterterms(&setup.interaction, &p, &catalog, &setup.indices)?;
                    emit(&indexed_counterterms_to_json(&ct));
                }
                Method::Bphz => {
                    let table =
                        bphz_counterterms(&setup.interaction, &p, &catalog, &setup.indices)?;
                    emit(&bphz_table_to_json(&table));
                }
            }
            Ok(true)
        }
        Command::Effective(args) => {
            let setup = load(&args.config)?;
            let catalog = GraphCatalog::new();
            let p = propagator(&setup.model, &setup.ctx, setup.regulator, setup.length)?;
            let eff = match args.method {
                Method::Costello => {
                    let ct =
                        indexed_counterterms(&setup.interaction, &p, &catalog, &setup.indices)?;
                    indexed_effective(&setup.interaction, &p, &catalog, &ct, &setup.indices)?
                }
                Method::Bphz => {
                    let table =
                        bphz_counterterms(&setup.interaction, &p, &catalog, &setup.indices)?;
                    bphz_effective(&setup.interaction, &p, &catalog, &table, &setup.indices)?
                }
            }
            .truncate(setup.indices.clone());
            match args.at_l {
                None => emit(&graded_to_json(&eff)),
                Some(l) => {
                    if l <= 0.0 {
                        return Err(Error::Config("--at-l must be positive".into()));
                    }
                    let mut assignment = vec![1.0; setup.ctx.symbols().len()];
                    assignment[setup.length] = l;
                    let comps: Vec<_> = eff
                        .components()
                        .map(|(&(i, j), part)| {
                            let terms: Vec<_> = part
                                .terms()
                                .map(|(alpha, v)| {
                                    Ok(json!({
                                        "multi_index": alpha,
                                        "value": v.eval_numeric(&assignment)?,
                                    }))
                                })
                                .collect::<Result<_>>()?;
                            Ok(json!({ "i": i, "j": j, "terms": terms }))
                        })
                        .collect::<Result<_>>()?;
                    emit(&json!({ "at_l": l, "components": comps }));
                }
            }
            Ok(true)
        }
        Command::Verify(args) => {
            let setup = load(&args.config)?;
            let mut checks: Vec<serde_json::Value> = Vec::new();
            let mut all_pass = true;
            let suite = args.check;
            let want = |c: CheckSuite| suite == c || suite == CheckSuite::All;
            if want(CheckSuite::Oracle) {
                let pass = check_oracle(&setup, &mut checks)?;
                all_pass &= pass;
            }
            if want(CheckSuite::MainTheorem) {
                let pass = check_main_theorem(&setup, &mut checks)?;
                all_pass &= pass;
            }
            if want(CheckSuite::Rge) {
                let pass = check_rge(&setup, &mut checks)?;
                all_pass &= pass;
            }
            if want(CheckSuite::OrbitCount) {
                let pass = check_orbit_counts(&setup, &mut checks)?;
                all_pass &= pass;
            }
            if want(CheckSuite::Roundtrip) {
                let pass = check_roundtrips(&setup, &mut checks)?;
                all_pass &= pass;
            }
            emit(&json!({ "pass": all_pass, "checks": checks }));
            Ok(all_pass)
        }
    }
}

fn check_oracle(setup: &ModelSetup, checks: &mut Vec<serde_json::Value>) -> Result<bool> {
    let catalog = GraphCatalog::new();
    let p = propagator(&setup.model, &setup.ctx, setup.regulator, setup.length)?;
    let a = w_graph(&setup.interaction, &p, &catalog, &setup.indices)?;
    let b = w_oracle(&setup.interaction, &p, &setup.indices, None)?;
    let pass = a == b;
    checks.push(json!({
        "name": "oracle",
        "status": if pass { "pass" } else { "fail" },
        "detail": "graph expansion of the flow against the formal-series evaluation",
    }));
    eprintln!("oracle: {}", if pass { "pass" } else { "fail" });
    Ok(pass)
}

fn check_main_theorem(setup: &ModelSetup, checks: &mut Vec<serde_json::Value>) -> Result<bool> {
    let catalog = GraphCatalog::new();
    let p = propagator(&setup.model, &setup.ctx, setup.regulator, setup.length)?;
    let ct = indexed_counterterms(&setup.interaction, &p, &catalog, &setup.indices)?;
    let table = bphz_counterterms(&setup.interaction, &p, &catalog, &setup.indices)?;
    let report =
        verify_counterterm_equality(&setup.interaction, &p, &catalog, &ct, &table, &setup.indices)?;
    let eff_a = indexed_effective(&setup.interaction, &p, &catalog, &ct, &setup.indices)?
        .truncate(setup.indices.clone());
    let eff_b = bphz_effective(&setup.interaction, &p, &catalog, &table, &setup.indices)?
        .truncate(setup.indices.clone());
    let eff_pass = eff_a == eff_b;
    let pass = report.all_pass() && eff_pass;
    checks.push(json!({
        "name": "main-theorem",
        "status": if pass { "pass" } else { "fail" },
        "counterterm_identities": equality_report_to_json(&report),
        "effective_interactions_equal": eff_pass,
    }));
    eprintln!("main-theorem: {}", if pass { "pass" } else { "fail" });
    Ok(pass)
}

fn check_rge(setup: &ModelSetup, checks: &mut Vec<serde_json::Value>) -> Result<bool> {
    // Rebuild the model in a three-symbol context: regulator plus two
    // length scales.
    let ctx = ScaleContext::new(&["eps", "L1", "L2"], 0)?;
    let cfgdim = setup.interaction.dim();
    let mut interaction = renorm_core::model::GradedFunctional::new(
        Arc::clone(&ctx),
        cfgdim,
        setup.indices.clone(),
    );
    for (&(i, j), part) in setup.interaction.components() {
        let moved = part.try_map(|v| {
            let c = v.as_constant().ok_or(Error::Config(
                "interaction coefficients must be constants".into(),
            ))?;
        Ok(renorm_core::scale::ScaleFunction::constant(&ctx, c))
        })?;
        interaction.set_component(i, j, moved)?;
    }
    let model = &setup.model;
    let catalog = GraphCatalog::new();
    let closed = index_closure(&catalog, &setup.indices);
    let p1 = propagator(model, &ctx, 0, 1)?;
    let p2 = propagator(model, &ctx, 0, 2)?;
    let p12 = propagator(model, &ctx, 1, 2)?;

    let ct = indexed_counterterms(&interaction, &p1, &catalog, &setup.indices)?;
    let eff1 = indexed_effective(&interaction, &p1, &catalog, &ct, &setup.indices)?;
    let eff2 = indexed_effective(&interaction, &p2, &catalog, &ct, &setup.indices)?;
    let flowed = w_graph(&eff1, &p12, &catalog, &closed)?;
    let costello_pass = flowed.truncate(setup.indices.clone()) == eff2.truncate(setup.indices.clone());

    let table = bphz_counterterms(&interaction, &p1, &catalog, &setup.indices)?;
    let beff1 = bphz_effective(&interaction, &p1, &catalog, &table, &setup.indices)?;
    let beff2 = bphz_effective(&interaction, &p2, &catalog, &table, &setup.indices)?;
    let bflowed = w_graph(&beff1, &p12, &catalog, &closed)?;
    let bphz_pass = bflowed.truncate(setup.indices.clone()) == beff2.truncate(setup.indices.clone());

    let pass = costello_pass && bphz_pass;
    checks.push(json!({
        "name": "rge",
        "status": if pass { "pass" } else { "fail" },
        "costello": costello_pass,
        "bphz": bphz_pass,
    }));
    eprintln!("rge: {}", if pass { "pass" } else { "fail" });
    Ok(pass)
}

fn check_orbit_counts(setup: &ModelSetup, checks: &mut Vec<serde_json::Value>) -> Result<bool> {
    let catalog = GraphCatalog::new();
    let mut pass = true;
    let mut tested = 0u64;
    for &(gi, gj) in &setup.indices {
        for g in catalog.connected(gi, gj).iter() {
            if g.edge_count() == 0 || g.edge_count() > 3 {
                continue;
            }
            for sub in enumerate_subgraphs(g, true) {
                let (lhs, rhs) = orbit_count_check(g, &sub)?;
                tested += 1;
                if lhs != rhs {
                    pass = false;
                }
            }
        }
    }
    checks.push(json!({
        "name": "orbit-count",
        "status": if pass { "pass" } else { "fail" },
        "cases": tested,
    }));
    eprintln!("orbit-count: {} ({tested} cases)", if pass { "pass" } else { "fail" });
    Ok(pass)
}

fn check_roundtrips(setup: &ModelSetup, checks: &mut Vec<serde_json::Value>) -> Result<bool> {
    let catalog = GraphCatalog::new();
    let mut pass = true;
    let mut tested = 0u64;
    let closed: BTreeSet<(u32, u32)> = index_closure(&catalog, &setup.indices);
    for &(gi, gj) in &closed {
        for g in catalog.connected(gi, gj).iter() {
            if g.edge_count() == 0 || g.edge_count() > 4 {
                continue;
            }
            for sub in enumerate_subgraphs(g, true) {
                // Contract, rebuild the nested pair, and check insertion
                // reproduces the original graph.
                let c = g.contract_subgraph(&sub)?;
                let triple = reassemble_triple(&c)?;
                let back = renorm_core::graph::insert(&triple)?;
                let orig_cert = renorm_core::graph::canonical_form(g).cert;
                let back_cert = renorm_core::graph::canonical_form(&back.graph).cert;
                tested += 1;
                if orig_cert != back_cert {
                    pass = false;
                }
            }
        }
    }
    checks.push(json!({
        "name": "roundtrip",
        "status": if pass { "pass" } else { "fail" },
        "cases": tested,
    }));
    eprintln!("roundtrip: {} ({tested} cases)", if pass { "pass" } else { "fail" });
    Ok(pass)
}

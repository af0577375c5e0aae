use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use capelli_core::combinatorics::{
    check_involution_properties_with, combinatorial_lhs, contraction_sets, enumerate_objects, good_guy_sum, is_good,
    links_of, weight_of, weight_of_pair, GMatrix, ObjectFamily, PairGK,
};
use capelli_core::identities::{lhs_polynomial, rhs_polynomial_with, verify_identity_with};
use capelli_core::{IdentityKind, Limits, NormalPolynomial};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const RESIDUAL_HEAD: usize = 20;

#[derive(Parser)]
#[command(name = "capelli", version, about = "Exact verification of Capelli-type identities in the Weyl algebra")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an identity and report the residual.
    Verify {
        #[arg(long, value_enum)]
        identity: Identity,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::Algebraic)]
        mode: Mode,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Print the normal form of one side of an identity.
    Expand {
        #[arg(long, value_enum)]
        identity: Identity,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        side: Side,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// List the objects of a family as JSON lines.
    Objects {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Filter::All)]
        filter: Filter,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Run the sign-reversing involution over every bad pair.
    Involution {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Show the links and weights of a single object read from JSON.
    Weight {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct LimitArgs {
    /// Largest n accepted before refusing the computation.
    #[arg(long, default_value_t = Limits::VERIFY.max_n)]
    max_n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    Cap,
    Tur,
    TurAnti,
    HuKs,
}

impl From<Identity> for IdentityKind {
    fn from(i: Identity) -> Self {
        match i {
            Identity::Cap => IdentityKind::Cap,
            Identity::Tur => IdentityKind::Tur,
            Identity::TurAnti => IdentityKind::TurAnti,
            Identity::HuKs => IdentityKind::Huks,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Capelli,
    Turnbull,
}

impl From<Family> for ObjectFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Capelli => ObjectFamily::Capelli,
            Family::Turnbull => ObjectFamily::Turnbull,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Algebraic,
    Combinatorial,
    Cross,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Lhs,
    Rhs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Filter {
    All,
    Good,
    Bad,
}

#[derive(Serialize)]
struct Report {
    identity: String,
    n: usize,
    mode: String,
    equal: bool,
    lhs_terms: usize,
    rhs_terms: usize,
    residual_head: Vec<String>,
    elapsed_ms: u128,
}

type Outcome = Result<ExitCode, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Verify { identity, n, mode, json, limits } => verify(identity.into(), n, mode, json, &limits.get()),
        Command::Expand { identity, n, side, limits } => expand(identity.into(), n, side, &limits.get()),
        Command::Objects { family, n, filter, limits } => objects(family.into(), n, filter, &limits.get()),
        Command::Involution { family, n, limits } => involution(family.into(), n, &limits.get()),
        Command::Weight { family, input } => weight(family.into(), &input),
    }
}

impl LimitArgs {
    fn get(&self) -> Limits {
        Limits::new(self.max_n)
    }
}

fn verify(kind: IdentityKind, n: usize, mode: Mode, json: bool, limits: &Limits) -> Outcome {
    let start = Instant::now();
    let (mode_name, equal, lhs, rhs, residual) = match mode {
        Mode::Algebraic => {
            let r = verify_identity_with(kind, n, limits).map_err(|e| e.to_string())?;
            ("algebraic", r.equal, r.lhs_term_count, r.rhs_term_count, r.residual)
        }
        Mode::Combinatorial => {
            let family = family_for(kind, "combinatorial")?;
            let good = good_guy_sum(family, n, limits).map_err(|e| e.to_string())?;
            let rhs = rhs_polynomial_with(kind, n, limits).map_err(|e| e.to_string())?;
            let report = check_involution_properties_with(family, n, limits, false).map_err(|e| e.to_string())?;
            let residual = good.sub(&rhs);
            let equal = residual.is_zero() && report.passed();
            ("combinatorial", equal, good.len(), rhs.len(), residual)
        }
        Mode::Cross => {
            let family = family_for(kind, "cross")?;
            let comb = combinatorial_lhs(family, n, limits).map_err(|e| e.to_string())?;
            let det = lhs_polynomial(kind, n, limits).map_err(|e| e.to_string())?;
            let residual = comb.sub(&det);
            ("cross", residual.is_zero(), comb.len(), det.len(), residual)
        }
    };
    let report = Report {
        identity: kind.name().to_string(),
        n,
        mode: mode_name.to_string(),
        equal,
        lhs_terms: lhs,
        rhs_terms: rhs,
        residual_head: residual.head(RESIDUAL_HEAD),
        elapsed_ms: start.elapsed().as_millis(),
    };
    if json {
        println!("{}", serde_json::to_string(&report).map_err(|e| e.to_string())?);
    } else {
        print_report(&report, &residual);
    }
    Ok(if equal { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn print_report(r: &Report, residual: &NormalPolynomial) {
    println!("identity: {}", r.identity);
    println!("n: {}", r.n);
    println!("mode: {}", r.mode);
    println!("result: {}", if r.equal { "equal" } else { "NOT equal" });
    println!("lhs terms: {}", r.lhs_terms);
    println!("rhs terms: {}", r.rhs_terms);
    if !residual.is_zero() {
        println!("residual terms: {}", residual.len());
        for term in &r.residual_head {
            println!("  {term}");
        }
        if residual.len() > r.residual_head.len() {
            println!("  ...");
        }
    }
    println!("elapsed: {} ms", r.elapsed_ms);
}

fn family_for(kind: IdentityKind, mode: &str) -> Result<ObjectFamily, String> {
    ObjectFamily::for_identity(kind).ok_or_else(|| {
        format!("{mode} mode is only available for cap and tur; {} has no combinatorial model", kind.name())
    })
}

fn expand(kind: IdentityKind, n: usize, side: Side, limits: &Limits) -> Outcome {
    let poly = match side {
        Side::Lhs => lhs_polynomial(kind, n, limits),
        Side::Rhs => rhs_polynomial_with(kind, n, limits),
    }
    .map_err(|e| e.to_string())?;
    println!("{}", poly.format_canonical());
    Ok(ExitCode::SUCCESS)
}

fn objects(family: ObjectFamily, n: usize, filter: Filter, limits: &Limits) -> Outcome {
    let all = enumerate_objects(family, n, limits).map_err(|e| e.to_string())?;
    let mut count = 0;
    for g in all {
        let keep = match filter {
            Filter::All => true,
            Filter::Good => is_good(&PairGK::new(g.clone(), Default::default())),
            Filter::Bad => has_bad_pair(&g, family)?,
        };
        if keep {
            println!("{}", serde_json::to_string(&g).map_err(|e| e.to_string())?);
            count += 1;
        }
    }
    println!("count={count}");
    Ok(ExitCode::SUCCESS)
}

fn has_bad_pair(g: &GMatrix, family: ObjectFamily) -> Result<bool, String> {
    let sets = contraction_sets(g, family).map_err(|e| e.to_string())?;
    Ok(sets.into_iter().any(|k| !is_good(&PairGK::new(g.clone(), k))))
}

fn involution(family: ObjectFamily, n: usize, limits: &Limits) -> Outcome {
    let mut report = check_involution_properties_with(family, n, limits, true).map_err(|e| e.to_string())?;
    report.orbit_list.sort_by(|x, y| x.pair.cmp(&y.pair));
    for o in &report.orbit_list {
        println!(
            "{} case {} w={}  <->  {} case {} w={}",
            o.pair, o.case, o.weight, o.image, o.image_case, o.image_weight
        );
    }
    println!("family: {family}, n: {n}");
    println!("objects: {}", report.objects);
    println!("good pairs: {}", report.good_pairs);
    println!("bad pairs: {}", report.bad_pairs);
    println!("orbits: {}", report.orbits);
    let cases: Vec<String> = report.case_counts.iter().map(|(c, k)| format!("{c}:{k}")).collect();
    println!("cases: {}", if cases.is_empty() { "none".to_string() } else { cases.join(" ") });
    for (property, ok) in report.property_summary() {
        println!("{property}: {}", if ok { "PASS" } else { "FAIL" });
    }
    for v in report.violations.iter().take(RESIDUAL_HEAD) {
        println!("violation: {} at {}: {}", v.property, v.pair, v.detail);
    }
    let passed = report.passed();
    println!("overall: {}", if passed { "PASS" } else { "FAIL" });
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn weight(family: ObjectFamily, input: &PathBuf) -> Outcome {
    let text = std::fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let g: GMatrix = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", input.display()))?;
    let violations = g.violations(family);
    if !violations.is_empty() {
        let mut msg = format!("{} is not a valid {family} object", input.display());
        for v in violations {
            msg.push_str("\n  ");
            msg.push_str(&v);
        }
        return Err(msg);
    }
    let e = |e: capelli_core::Error| e.to_string();
    let links: Vec<String> = links_of(&g, family).map_err(e)?.iter().map(|l| l.to_string()).collect();
    println!("G: {g}");
    println!("links: [{}]", links.join(","));
    println!("w(G) = {}", weight_of(&g, family).map_err(e)?);
    for k in contraction_sets(&g, family).map_err(e)? {
        println!("w(G,{k}) = {}", weight_of_pair(&g, &k, family).map_err(e)?);
    }
    Ok(ExitCode::SUCCESS)
}

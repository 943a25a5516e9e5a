use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use maxchains::compression::{compress_system, left_compress_traced};
use maxchains::constructions::{generalized_tower, tower_of_cubes};
use maxchains::count::{check_lemma2, count_maximal_chains, count_maximal_chains_oracle, layer_bound};
use maxchains::exact::{parse_ratio, ratio_string};
use maxchains::format::{parse_any, to_json, to_text};
use maxchains::fraction::{least_n, realize, theorem3_plan};
use maxchains::grid::{count_grid_chains, grid_max_chains, parse_grid, GridSystem};
use maxchains::poset::{count_antichains, count_linear_extensions, parse_poset, poset_search, Poset};
use maxchains::search::{max_chains, CheckpointConfig, SearchOptions, SearchReport, WITNESS_CAP};
use maxchains::verify::{run_suite, SuiteReport, VerifyParams, SUITES};
use maxchains::SetSystem;

mod manifest;

use manifest::{InputDigest, RunManifest};

#[derive(Parser)]
#[command(name = "maxchains", version, about = "Exact counting and extremal search for maximal chains of the Boolean lattice")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Also write a run manifest (command, parameters, input digests, result) to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Count the maximal chains contained in a set system.
    Count(CountArgs),
    /// Build a tower of cubes.
    #[command(subcommand)]
    Construct(Construct),
    /// Apply an ij-compression or full left-compression.
    Compress(CompressArgs),
    /// Exact maximum of c(A) over systems of a given size.
    Search(SearchArgs),
    /// Plan and check the constant-fraction construction.
    Theorem3(Theorem3Args),
    /// Linear extensions and antichains of posets.
    #[command(subcommand)]
    Poset(PosetCommand),
    /// Monotone chains in [k]^n.
    #[command(subcommand)]
    Grid(GridCommand),
    /// Run a named verification suite, or `all`.
    Verify(VerifyArgs),
}

#[derive(Args, Serialize)]
struct CountArgs {
    /// Set-system file, text or JSON; `-` reads standard input.
    file: String,
    /// Cross-check against permutation enumeration (n ≤ 9).
    #[arg(long)]
    oracle: bool,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Construct {
    /// Tower of t-cubes on n elements (t divides n).
    Tower {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
    },
    /// Tower with consecutive blocks of the given sizes.
    Gentower {
        #[arg(long, alias = "blocks", value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
}

#[derive(Args, Serialize)]
#[command(group(ArgGroup::new("mode").required(true).args(["i", "left"])))]
struct CompressArgs {
    file: String,
    #[arg(long, requires = "j")]
    i: Option<usize>,
    #[arg(long, requires = "i")]
    j: Option<usize>,
    /// Compress repeatedly over all pairs i < j until nothing changes.
    #[arg(long, conflicts_with_all = ["i", "j"])]
    left: bool,
}

#[derive(Args, Serialize)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    /// System size; defaults to 2n with --two-per-layer.
    #[arg(long, required_unless_present = "two_per_layer")]
    m: Option<usize>,
    /// Search all systems, not only left-compressed ones.
    #[arg(long)]
    no_compress_restrict: bool,
    /// Do not require ∅ and X to be members.
    #[arg(long)]
    no_endpoints: bool,
    /// Exactly two sets in every layer other than ∅ and X.
    #[arg(long)]
    two_per_layer: bool,
    /// Start from zero instead of the best tower that fits.
    #[arg(long)]
    no_tower_seed: bool,
    /// Lift the n ≤ 7 guard.
    #[arg(long)]
    allow_large: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = WITNESS_CAP)]
    witness_cap: usize,
    /// Resumable checkpoint file; a manifest is written next to it.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Completed subtrees between checkpoint writes.
    #[arg(long, default_value_t = 16)]
    checkpoint_interval: usize,
}

#[derive(Args, Serialize)]
struct Theorem3Args {
    /// Target fraction, as `a/b` or a decimal.
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    epsilon: String,
    /// Evaluate the construction exactly at this ground size.
    #[arg(long)]
    n: Option<usize>,
    /// Report the least n up to this bound from which the construction meets its targets.
    #[arg(long)]
    least_n: Option<usize>,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PosetCommand {
    /// Number of linear extensions.
    CountExt { file: String },
    /// Number of antichains, ∅ included.
    CountAntichains { file: String },
    /// Most linear extensions among posets with at most m antichains (n ≤ 6).
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GridCommand {
    /// Number of maximal chains inside a grid system.
    Count { file: String },
    /// Most chains over m-cell subsets of [k]^2 (k ≤ 5).
    Search {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// One of the suite names, or `all`.
    suite: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<maxchains::Error> for Failure {
    fn from(e: maxchains::Error) -> Self {
        match e {
            maxchains::Error::Inconsistent(_) => Failure::Verification(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

#[derive(Default)]
struct Output {
    json: Value,
    text: String,
    /// Scheduling-dependent counters.
    stats: Value,
    inputs: Vec<InputDigest>,
    /// Set when a checked claim failed.
    violation: Option<String>,
    extra_manifest: Option<PathBuf>,
}

fn read_input(path: &str, inputs: &mut Vec<InputDigest>) -> Result<String, Failure> {
    let bytes = if path == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(|e| Failure::Usage(format!("reading stdin: {e}")))?;
        buf
    } else {
        fs::read(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?
    };
    inputs.push(InputDigest::of(path, &bytes));
    String::from_utf8(bytes).map_err(|_| Failure::Usage(format!("{path}: not UTF-8")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialise")
}

fn show_system(s: &SetSystem) -> String {
    let members: Vec<String> = s.sorted_members().iter().map(ToString::to_string).collect();
    format!("{{{}}}", members.join(", "))
}

fn show_poset(p: &Poset) -> String {
    let covers: Vec<String> = p.cover_relations().iter().map(|(a, b)| format!("{a}<{b}")).collect();
    if covers.is_empty() {
        "antichain".to_string()
    } else {
        covers.join(" ")
    }
}

fn show_grid(g: &GridSystem) -> String {
    let pts: Vec<String> = g
        .points()
        .iter()
        .map(|p| format!("({})", p.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    pts.join(" ")
}

/// Moves `nodes_explored` out of a report so the payload is reproducible.
fn split_stats(mut v: Value) -> (Value, Value) {
    let nodes = v.as_object_mut().and_then(|o| o.remove("nodes_explored")).unwrap_or(Value::Null);
    let stats = if nodes.is_null() { Value::Null } else { json!({ "nodes_explored": nodes }) };
    (v, stats)
}

fn system_output(system: &SetSystem, format: Format) -> Output {
    let text = match format {
        Format::Text => to_text(system),
        Format::Json => String::new(),
    };
    let json: Value = serde_json::from_str(&to_json(system)).expect("own JSON parses");
    Output { json, text, ..Output::default() }
}

fn count(args: &CountArgs) -> Result<Output, Failure> {
    let mut out = Output::default();
    let system = parse_any(&read_input(&args.file, &mut out.inputs)?)?;
    let chains = count_maximal_chains(&system);
    let lemma = check_lemma2(&system);
    let mut json = json!({
        "n": system.n(),
        "size": system.len(),
        "chains": chains.to_string(),
        "layer_bound": layer_bound(&system).to_string(),
        "lemma2": to_value(&lemma),
    });
    out.text = format!("{chains}\n");
    if args.oracle {
        let oracle = count_maximal_chains_oracle(&system)?;
        json["oracle"] = Value::String(oracle.to_string());
        if oracle != chains {
            out.violation = Some(format!("dynamic programme gives {chains}, permutation enumeration gives {oracle}"));
        }
    }
    if !lemma.holds {
        out.violation = Some(format!("c(A) = {chains} exceeds α·n! = {}", ratio_string(&lemma.bound)));
    }
    out.json = json;
    Ok(out)
}

fn construct(cmd: &Construct, format: Format) -> Result<Output, Failure> {
    let system = match cmd {
        Construct::Tower { n, t } => tower_of_cubes(*n, *t)?,
        Construct::Gentower { sizes } => generalized_tower(sizes)?,
    };
    Ok(system_output(&system, format))
}

fn compress(args: &CompressArgs, format: Format) -> Result<Output, Failure> {
    let mut inputs = Vec::new();
    let system = parse_any(&read_input(&args.file, &mut inputs)?)?;
    let result = if args.left {
        left_compress_traced(&system).0
    } else {
        let (i, j) = (args.i.expect("clap group"), args.j.expect("clap requires"));
        compress_system(&system, i, j)?
    };
    let mut out = system_output(&result, format);
    out.inputs = inputs;
    Ok(out)
}

fn search_text(r: &SearchReport) -> String {
    let mut class = Vec::new();
    if r.restricted.left_compressed {
        class.push("left-compressed");
    }
    if r.restricted.endpoints_required {
        class.push("containing ∅ and X");
    }
    if r.restricted.two_per_layer {
        class.push("two sets per layer");
    }
    let class = if class.is_empty() { "all systems".to_string() } else { class.join(", ") };
    let mut s = format!("n = {}, m = {} ({class})\nmax chains: {}\n", r.n, r.m, r.max_chains);
    let _ = writeln!(s, "optimal systems: {} (showing {})", r.witness_count, r.witnesses.len());
    for w in &r.witnesses {
        let _ = writeln!(s, "  {}", show_system(w));
    }
    s
}

fn search(args: &SearchArgs) -> Result<Output, Failure> {
    let m = args.m.unwrap_or(2 * args.n);
    let options = SearchOptions {
        left_compressed: !args.no_compress_restrict,
        require_endpoints: !args.no_endpoints,
        two_per_layer: args.two_per_layer,
        allow_large: args.allow_large,
        seed_with_towers: !args.no_tower_seed,
        workers: args.workers,
        witness_cap: args.witness_cap,
        checkpoint: args
            .checkpoint
            .as_ref()
            .map(|path| CheckpointConfig { path: path.clone(), interval: args.checkpoint_interval }),
    };
    let report = max_chains(args.n, m, &options).map_err(|e| match e {
        maxchains::Error::TooLarge(msg) => Failure::Usage(format!("{msg} (--allow-large)")),
        e => e.into(),
    })?;
    let (json, stats) = split_stats(to_value(&report));
    Ok(Output {
        text: search_text(&report),
        json,
        stats,
        extra_manifest: args.checkpoint.as_ref().map(|p| p.with_extension("manifest.json")),
        ..Output::default()
    })
}

fn theorem3(args: &Theorem3Args) -> Result<Output, Failure> {
    let alpha = parse_ratio(&args.alpha)?;
    let epsilon = parse_ratio(&args.epsilon)?;
    let plan = theorem3_plan(&alpha, &epsilon)?;
    let t = &plan.threshold;
    let mut text = format!(
        "alpha = {}, epsilon = {}\nk = {}, |U| = {}, beta = {}\nU = {}\np in [{}, {}], p ≈ {:.12} after {} bisection steps\n",
        ratio_string(&plan.alpha),
        ratio_string(&plan.epsilon),
        plan.k,
        plan.upset.len(),
        ratio_string(&plan.beta),
        show_system(&plan.upset),
        ratio_string(&t.lo),
        ratio_string(&t.hi),
        plan.p_approx,
        t.iterations
    );
    let mut json = json!({ "plan": to_value(&plan) });
    if let Some(n) = args.n {
        let r = realize(&plan, n)?;
        let _ = writeln!(
            text,
            "n = {n}, m = {}: P = {}, |B| = {}, union = {}, size ≤ (α+ε)2^n: {}, |B| ≥ α·n!: {}, |B| ≥ (α−ε)·n!: {}",
            r.m,
            ratio_string(&r.probability),
            r.family_size,
            r.union.as_ref().map_or("n/a (m < k)".to_string(), |u| u.exact.to_string()),
            r.size_ok,
            r.chains_at_least_alpha,
            r.chains_at_least_alpha_minus_epsilon
        );
        json["realization"] = to_value(&r);
    }
    if let Some(max) = args.least_n {
        let least = least_n(&plan, max)?;
        let _ = writeln!(
            text,
            "least n ≤ {max} from which the targets hold: {}",
            least.map_or("none".to_string(), |n| n.to_string())
        );
        json["least_n"] = to_value(&least);
    }
    Ok(Output { json, text, ..Output::default() })
}

fn poset(cmd: &PosetCommand) -> Result<Output, Failure> {
    let mut out = Output::default();
    match cmd {
        PosetCommand::CountExt { file } | PosetCommand::CountAntichains { file } => {
            let p = parse_poset(&read_input(file, &mut out.inputs)?)?;
            let (key, value) = match cmd {
                PosetCommand::CountExt { .. } => ("linear_extensions", count_linear_extensions(&p)),
                _ => ("antichains", count_antichains(&p)),
            };
            out.text = format!("{value}\n");
            out.json = json!({ "n": p.n(), key: value.to_string() });
        }
        PosetCommand::Search { n, m, workers } => {
            let r = poset_search(*n, *m, *workers)?;
            let mut text = format!(
                "n = {n}, m = {m}\nmax linear extensions: {}\nclasses: {} ({} with at most {m} antichains)\noptimal posets: {}\n",
                r.max_extensions,
                r.classes,
                r.qualifying,
                r.witnesses.len()
            );
            for w in &r.witnesses {
                let _ = writeln!(text, "  {}", show_poset(w));
            }
            out.text = text;
            out.json = to_value(&r);
        }
    }
    Ok(out)
}

fn grid(cmd: &GridCommand) -> Result<Output, Failure> {
    let mut out = Output::default();
    match cmd {
        GridCommand::Count { file } => {
            let g = parse_grid(&read_input(file, &mut out.inputs)?)?;
            let c = count_grid_chains(&g);
            out.text = format!("{c}\n");
            out.json = json!({ "k": g.k(), "n": g.n(), "size": g.len(), "chains": c.to_string() });
        }
        GridCommand::Search { k, m, workers } => {
            let r = grid_max_chains(*k, *m, *workers)?;
            let mut text = format!(
                "k = {k}, m = {m}\nmax chains: {}\noptimal systems: {} (showing {} up to transpose)\n",
                r.max_chains,
                r.witness_count,
                r.representatives.len()
            );
            for g in &r.representatives {
                let _ = writeln!(text, "  {}", show_grid(g));
            }
            out.text = text;
            (out.json, out.stats) = split_stats(to_value(&r));
        }
    }
    Ok(out)
}

fn verify(args: &VerifyArgs) -> Result<Output, Failure> {
    let params = VerifyParams { trials: args.trials, n: args.n, seed: args.seed, workers: args.workers };
    let names: Vec<&str> = if args.suite == "all" { SUITES.to_vec() } else { vec![args.suite.as_str()] };
    let reports = names.iter().map(|s| run_suite(s, &params)).collect::<Result<Vec<SuiteReport>, _>>()?;
    let mut text = String::new();
    for r in &reports {
        let _ = writeln!(text, "{} {}", r.suite, if r.passed { "PASS" } else { "FAIL" });
        for c in &r.checks {
            let _ = writeln!(text, "  [{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
        }
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.suite.as_str()).collect();
    let violation = (!failed.is_empty()).then(|| format!("verification failed: {}", failed.join(", ")));
    let json = if reports.len() == 1 { to_value(&reports[0]) } else { to_value(&reports) };
    Ok(Output { json, text, violation, ..Output::default() })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Count(a) => count(a),
        Command::Construct(c) => construct(c, cli.format),
        Command::Compress(a) => compress(a, cli.format),
        Command::Search(a) => search(a),
        Command::Theorem3(a) => theorem3(a),
        Command::Poset(c) => poset(c),
        Command::Grid(c) => grid(c),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(out) => out,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failure: {msg}");
            return ExitCode::from(1);
        }
    };
    match cli.format {
        Format::Json => {
            let mut payload = out.json.clone();
            if let (Some(obj), Some(stats)) = (payload.as_object_mut(), out.stats.as_object()) {
                obj.extend(stats.clone());
            }
            println!("{}", serde_json::to_string_pretty(&payload).expect("results serialise"));
        }
        Format::Text => print!("{}", out.text),
    }
    let targets = cli.manifest.iter().chain(out.extra_manifest.iter());
    for path in targets {
        let manifest = RunManifest::new(
            std::env::args().skip(1).collect(),
            to_value(&cli.command),
            out.inputs.clone(),
            out.json.clone(),
            out.stats.clone(),
        );
        if let Err(e) = manifest.write(path) {
            eprintln!("error: writing manifest {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if let Some(msg) = out.violation {
        eprintln!("verification failure: {msg}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

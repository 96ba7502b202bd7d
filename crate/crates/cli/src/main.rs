use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use confbetti::cohomology::{tables_to_csv, tables_to_json};
use confbetti::golden::{compare, emit_golden, parse_golden, GoldenTable};
use confbetti::presets::PRESETS;
use confbetti::stability::{analyze, detect_shifted, PolySequence};
use confbetti::{load_raw_model, parse_ring, preset, BettiTable2, Engine, Error, Source};

#[derive(Parser)]
#[command(
    name = "confbetti",
    version,
    about = "Rational Betti numbers of unordered configuration spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Betti tables of C_k(M) over a range of k.
    Run(RunArgs),
    /// List the built-in manifolds.
    Presets {
        /// Print the listing as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("input").required(true).args(["preset", "ring", "raw_model"])))]
struct RunArgs {
    /// Built-in manifold, e.g. `sphere,2`, `cpn(3)` or `p1p1`.
    #[arg(long, value_name = "NAME[,params]")]
    preset: Option<String>,
    /// Cohomology ring description (JSON).
    #[arg(long, value_name = "PATH")]
    ring: Option<PathBuf>,
    /// Raw model description (JSON) for an even-dimensional manifold.
    #[arg(long = "raw-model", value_name = "PATH")]
    raw_model: Option<PathBuf>,
    /// Range of k, `MIN..MAX` or a single value.
    #[arg(long, value_name = "MIN..MAX", default_value = "1..6")]
    k: String,
    /// Output formats, in the order given.
    #[arg(long = "out", value_enum)]
    outputs: Vec<Output>,
    /// Golden table to compare the computed tables against.
    #[arg(long, value_name = "PATH")]
    compare: Option<PathBuf>,
    /// Largest k accepted.
    #[arg(long = "horizon-cap", value_name = "N", default_value_t = 20)]
    horizon_cap: usize,
    /// Worker threads for the k-range (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Report shifted stability for this truncation length instead of the longest one found.
    #[arg(long, value_name = "Q")]
    length: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Table,
    Json,
    Csv,
    Report,
}

enum Failure {
    Usage(String),
    Computation(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Computation(_) => 2,
            Failure::Mismatch(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Computation(m) | Failure::Mismatch(m) => m,
        }
    }
}

fn usage(err: impl std::fmt::Display) -> Failure {
    Failure::Usage(err.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(&args),
        Command::Presets { json } => Ok(list_presets(json)),
    };
    match result {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

/// `name`, `name,1,2` or `name(1,2)`.
fn parse_preset_spec(spec: &str) -> Result<(String, Vec<i64>), Failure> {
    let spec = spec.trim();
    let (name, rest) = match spec.find(['(', ',']) {
        Some(pos) if spec.as_bytes()[pos] == b'(' => {
            let inner = spec[pos + 1..]
                .strip_suffix(')')
                .ok_or_else(|| usage(format!("unbalanced parentheses in preset `{spec}`")))?;
            (&spec[..pos], inner)
        }
        Some(pos) => (&spec[..pos], &spec[pos + 1..]),
        None => (spec, ""),
    };
    let params = rest
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<i64>()
                .map_err(|_| usage(format!("preset parameter `{p}` is not an integer")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((name.trim().to_string(), params))
}

fn parse_k_range(text: &str, cap: usize) -> Result<(usize, usize), Failure> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("invalid k range `{text}`: expected MIN..MAX")))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let k = parse(text)?;
            (k, k)
        }
    };
    if lo == 0 || lo > hi {
        return Err(usage(format!("invalid k range `{text}`: need 1 <= MIN <= MAX")));
    }
    if hi > cap {
        return Err(usage(format!("k = {hi} exceeds the horizon cap {cap}")));
    }
    Ok((lo, hi))
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_source(args: &RunArgs) -> Result<Source, Failure> {
    let with_path = |path: &PathBuf, e: Error| usage(format!("{}: {e}", path.display()));
    if let Some(spec) = &args.preset {
        let (name, params) = parse_preset_spec(spec)?;
        return preset(&name, &params).map(Source::Ring).map_err(usage);
    }
    if let Some(path) = &args.ring {
        return parse_ring(&read(path)?)
            .map(Source::Ring)
            .map_err(|e| with_path(path, e));
    }
    let path = args.raw_model.as_ref().expect("clap enforces one input");
    load_raw_model(&read(path)?)
        .map(Source::Model)
        .map_err(|e| with_path(path, e))
}

fn run(args: &RunArgs) -> Result<String, Failure> {
    let (k_min, k_max) = parse_k_range(&args.k, args.horizon_cap)?;
    let source = load_source(args)?;
    let engine = Engine::new(&source).map_err(usage)?;
    let golden = match &args.compare {
        Some(path) => Some(parse_golden(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?),
        None => None,
    };
    if let Some(g) = &golden {
        if let Some(k) = g.ks().into_iter().find(|k| !(k_min..=k_max).contains(k)) {
            return Err(usage(format!(
                "golden table has k = {k}, outside the computed range {k_min}..{k_max}"
            )));
        }
    }

    let mut outputs: Vec<Output> = Vec::new();
    for o in &args.outputs {
        if !outputs.contains(o) {
            outputs.push(*o);
        }
    }
    if outputs.is_empty() {
        outputs.push(Output::Table);
    }
    if outputs.contains(&Output::Report) && (k_min != 1 || k_max < 3) {
        return Err(usage("a report needs a range 1..MAX with MAX >= 3"));
    }

    let tables = compute(&engine, k_min, k_max, args.jobs)?;
    let mut out = String::new();
    for (n, o) in outputs.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        match o {
            Output::Table => out.push_str(&emit_golden(&GoldenTable::from_tables(&tables))),
            Output::Json => {
                out.push_str(&tables_to_json(&tables));
                out.push('\n');
            }
            Output::Csv => out.push_str(&tables_to_csv(&tables)),
            Output::Report => out.push_str(&report(&tables, args.length)?),
        }
    }

    if let Some(g) = golden {
        let mismatches = compare(&g, &GoldenTable::from_tables(&tables));
        if !mismatches.is_empty() {
            print!("{out}");
            let mut msg = format!("{} entries differ from the golden table", mismatches.len());
            for m in &mismatches {
                let _ = write!(msg, "\n  {m}");
            }
            return Err(Failure::Mismatch(msg));
        }
    }
    Ok(out)
}

fn compute(engine: &Engine, k_min: usize, k_max: usize, jobs: Option<usize>) -> Result<Vec<BettiTable2>, Failure> {
    let work = || {
        engine
            .tables(k_min, k_max)
            .map_err(|e| Failure::Computation(e.to_string()))
    };
    match jobs {
        Some(0) => Err(usage("--jobs must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Computation(e.to_string()))?
            .install(work),
        None => work(),
    }
}

fn report(tables: &[BettiTable2], length: Option<u32>) -> Result<String, Failure> {
    let seq = PolySequence::from_tables(tables).map_err(|e| Failure::Computation(e.to_string()))?;
    let mut report = analyze(&seq);
    if let Some(q) = length {
        if q == 0 {
            return Err(usage("--length must be positive"));
        }
        report.shifted = detect_shifted(&seq, q);
    }
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Computation(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn list_presets(json: bool) -> String {
    if json {
        let mut text = serde_json::to_string_pretty(PRESETS).expect("presets serialize");
        text.push('\n');
        return text;
    }
    let mut out = String::new();
    for p in PRESETS {
        let aliases: BTreeSet<&str> = p.aliases.iter().copied().collect();
        let aliases = aliases.into_iter().collect::<Vec<_>>().join(", ");
        let params = if p.params.is_empty() { "-" } else { p.params };
        let _ = writeln!(out, "{}", p.name);
        let _ = writeln!(out, "  aliases:  {aliases}");
        let _ = writeln!(out, "  params:   {params}");
        let _ = writeln!(out, "  P_M(t):   {}", p.poincare);
        let _ = writeln!(out, "  note:     {}", p.note);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_specs() {
        assert_eq!(parse_preset_spec("sphere,2").ok().unwrap(), ("sphere".into(), vec![2]));
        assert_eq!(parse_preset_spec("cpn(3)").ok().unwrap(), ("cpn".into(), vec![3]));
        assert_eq!(parse_preset_spec("p1p1").ok().unwrap(), ("p1p1".into(), vec![]));
        assert!(parse_preset_spec("cpn(3").is_err());
        assert!(parse_preset_spec("sphere,x").is_err());
    }

    #[test]
    fn k_ranges() {
        assert_eq!(parse_k_range("1..7", 20).ok(), Some((1, 7)));
        assert_eq!(parse_k_range("1..=7", 20).ok(), Some((1, 7)));
        assert_eq!(parse_k_range("4", 20).ok(), Some((4, 4)));
        assert!(parse_k_range("0..3", 20).is_err());
        assert!(parse_k_range("5..3", 20).is_err());
        assert!(parse_k_range("1..21", 20).is_err());
        assert!(parse_k_range("a..b", 20).is_err());
    }
}

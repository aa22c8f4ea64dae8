//! Command-line surface: build indexes, search them, benchmark the engines
//! against each other, and check them against the brute-force reference.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pfts::bench::{self, BenchConfig};
use pfts::index::format::Family;
use pfts::index::{build_index, BuildOptions, Families, Index, IndexConfig};
use pfts::lexicon::Dictionary;
use pfts::query::{brute_force_query, evaluate_query, EngineKind, EvalOptions, TokenizedCorpus};
use pfts::Error;

const EXIT_OK: u8 = 0;
const EXIT_NO_RESULTS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_DIVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(name = "pfts", version, about = "Proximity full-text search with multi-component key indexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index directory from a directory of text files.
    Build(BuildArgs),
    /// Search an index.
    Search(SearchArgs),
    /// Show manifest and per-family statistics of an index.
    Stats(StatsArgs),
    /// Generate a corpus, build its indexes, and compare the engines.
    Bench(BenchArgs),
    /// Check the multi-component engines against the brute-force reference.
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Directory of UTF-8 text files, one document per file.
    #[arg(long)]
    input: PathBuf,
    /// Output index directory.
    #[arg(long)]
    out: PathBuf,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    force: bool,
    #[arg(long, default_value_t = 5)]
    max_distance: u32,
    #[arg(long, default_value_t = 700)]
    sw_count: u32,
    #[arg(long, default_value_t = 2100)]
    fu_count: u32,
    /// Comma-separated families to build: ordinary,pair,triple.
    #[arg(long, default_value = "ordinary,pair,triple")]
    families: String,
    /// Lemma dictionary, TSV: word<TAB>lemma1,lemma2.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Worker threads for posting generation; 0 = all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Documents per spill batch; 0 = default.
    #[arg(long, default_value_t = 0)]
    batch_size: usize,
}

#[derive(Args)]
struct SearchArgs {
    /// Query words.
    query: String,
    /// Index directory (defaults to $FTS_INDEX).
    #[arg(long, env = "FTS_INDEX")]
    index: PathBuf,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    engine: EngineArg,
    /// Print at most this many fragments.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Also print evaluation metrics as JSON.
    #[arg(long)]
    metrics: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, env = "FTS_INDEX")]
    index: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark config JSON; defaults to the desk-scale benchmark.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Where to build the benchmark index (a temporary directory if unset).
    #[arg(long)]
    work_dir: Option<PathBuf>,
    /// Write the JSON report here in addition to the stdout table.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Evaluate queries in parallel (throughput mode; latencies get noisy).
    #[arg(long)]
    parallel: bool,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[arg(long, env = "FTS_INDEX")]
    index: PathBuf,
    /// The directory of text files the index was built from.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Expected max_distance; fails fast when the manifest disagrees.
    #[arg(long)]
    max_distance: Option<u32>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Triple,
    Pair,
    Ordinary,
}

impl From<EngineArg> for EngineKind {
    fn from(e: EngineArg) -> EngineKind {
        match e {
            EngineArg::Auto => EngineKind::Auto,
            EngineArg::Triple => EngineKind::Triple,
            EngineArg::Pair => EngineKind::Pair,
            EngineArg::Ordinary => EngineKind::Ordinary,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Build(args) => run(cmd_build(args)),
        Command::Search(args) => run(cmd_search(args)),
        Command::Stats(args) => run(cmd_stats(args)),
        Command::Bench(args) => run(cmd_bench(args)),
        Command::OracleCheck(args) => run(cmd_oracle_check(args)),
    };
    ExitCode::from(code)
}

fn run(result: Result<u8, Error>) -> u8 {
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::EmptyQuery
                | Error::TooManySubqueries { .. }
                | Error::InvalidConfig(_)
                | Error::MissingFamily { .. } => EXIT_USAGE,
                Error::EngineMismatch { .. } => EXIT_DIVERGENCE,
                _ => EXIT_DATA,
            }
        }
    }
}

/// One document per file, document id = lexicographic file order.
fn read_corpus_dir(dir: &Path) -> Result<Vec<String>, Error> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|e| e.path().is_file())
        .map(|e| e.path())
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| std::fs::read_to_string(p).map_err(Error::from))
        .collect()
}

fn parse_families(spec: &str) -> Result<Families, Error> {
    let mut families = Families {
        ordinary: false,
        pair: false,
        triple: false,
    };
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "ordinary" => families.ordinary = true,
            "pair" => families.pair = true,
            "triple" => families.triple = true,
            other => {
                return Err(Error::InvalidConfig(format!("unknown family {other:?}")));
            }
        }
    }
    if !families.ordinary && !families.pair && !families.triple {
        return Err(Error::InvalidConfig("no families selected".into()));
    }
    Ok(families)
}

fn cmd_build(args: BuildArgs) -> Result<u8, Error> {
    let families = parse_families(&args.families)?;
    eprintln!(
        "config: command=build input={} out={} max_distance={} sw_count={} fu_count={} families={} dict={} threads={} batch_size={}",
        args.input.display(),
        args.out.display(),
        args.max_distance,
        args.sw_count,
        args.fu_count,
        args.families,
        args.dict.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "-".into()),
        args.threads,
        args.batch_size,
    );
    if args.out.exists() && args.out.read_dir()?.next().is_some() && !args.force {
        return Err(Error::InvalidConfig(format!(
            "output directory {} is not empty (use --force)",
            args.out.display()
        )));
    }
    let dict = match &args.dict {
        None => Dictionary::new(),
        Some(path) => Dictionary::from_tsv(std::io::BufReader::new(std::fs::File::open(path)?))?,
    };
    let docs = read_corpus_dir(&args.input)?;
    let cfg = IndexConfig {
        max_distance: args.max_distance,
        sw_count: args.sw_count,
        fu_count: args.fu_count,
        families,
    };
    let opts = BuildOptions {
        batch_size: args.batch_size,
        threads: args.threads,
    };
    let summary = build_index(&docs, &dict, &cfg, &opts, &args.out)?;
    println!("documents\t{}", summary.doc_count);
    println!("lemmas\t{}", summary.lemma_count);
    for (family, stats) in &summary.families {
        println!(
            "{}\tkeys={}\tpostings={}\tbytes={}",
            family.name(),
            stats.key_count,
            stats.posting_count,
            stats.bytes
        );
    }
    Ok(EXIT_OK)
}

fn cmd_search(args: SearchArgs) -> Result<u8, Error> {
    eprintln!(
        "config: command=search index={} engine={} limit={} format={:?} metrics={}",
        args.index.display(),
        EngineKind::from(args.engine).name(),
        args.limit.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
        args.format,
        args.metrics,
    );
    let index = Index::open(&args.index)?;
    let opts = EvalOptions {
        engine: args.engine.into(),
        emit_final_fragment: true,
    };
    let outcome = evaluate_query(&index, &args.query, &opts)?;
    for notice in &outcome.notices {
        eprintln!("notice: {notice}");
    }
    let shown = match args.limit {
        Some(limit) => &outcome.results.as_slice()[..limit.min(outcome.results.len())],
        None => outcome.results.as_slice(),
    };
    match args.format {
        FormatArg::Text => {
            for f in shown {
                let snippet = index.repo().snippet(f.did, f.s, f.e, 2)?;
                println!("{}\t{}\t{}\t{}", f.did, f.s, f.e, snippet);
            }
            if args.metrics {
                println!("{}", outcome.metrics.to_json());
            }
        }
        FormatArg::Json => {
            let fragments: Vec<serde_json::Value> = shown
                .iter()
                .map(|f| {
                    let snippet = index.repo().snippet(f.did, f.s, f.e, 2)?;
                    Ok(serde_json::json!({
                        "did": f.did, "s": f.s, "e": f.e, "snippet": snippet,
                    }))
                })
                .collect::<Result<_, Error>>()?;
            if args.metrics {
                let doc = serde_json::json!({
                    "fragments": fragments,
                    "metrics": outcome.metrics.to_json(),
                });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("{}", serde_json::to_string_pretty(&fragments)?);
            }
        }
    }
    if outcome.results.is_empty() {
        return Ok(EXIT_NO_RESULTS);
    }
    Ok(EXIT_OK)
}

fn cmd_stats(args: StatsArgs) -> Result<u8, Error> {
    eprintln!(
        "config: command=stats index={} format={:?}",
        args.index.display(),
        args.format
    );
    let index = Index::open(&args.index)?;
    let manifest = index.manifest();

    // Counts re-derived from the key tables rather than echoed from the
    // manifest, so stats double as a consistency check.
    let mut families = serde_json::Map::new();
    for family in [Family::Ordinary, Family::Pair, Family::Triple] {
        if !index.has_family(family) {
            continue;
        }
        let table = index.family_table(family)?;
        let bytes = std::fs::metadata(args.index.join(family.file_name()))?.len();
        families.insert(
            family.name().to_owned(),
            serde_json::json!({
                "key_count": table.entries.len(),
                "posting_count": table.posting_count(),
                "bytes": bytes,
            }),
        );
    }
    let doc = serde_json::json!({
        "format_version": manifest.format_version,
        "max_distance": manifest.max_distance,
        "sw_count": manifest.sw_count,
        "fu_count": manifest.fu_count,
        "doc_count": manifest.doc_count,
        "lemma_count": manifest.lemma_count,
        "families": serde_json::Value::Object(families.clone()),
    });
    match args.format {
        FormatArg::Json => println!("{}", serde_json::to_string_pretty(&doc)?),
        FormatArg::Text => {
            println!("format_version\t{}", manifest.format_version);
            println!("max_distance\t{}", manifest.max_distance);
            println!("sw_count\t{}", manifest.sw_count);
            println!("fu_count\t{}", manifest.fu_count);
            println!("doc_count\t{}", manifest.doc_count);
            println!("lemma_count\t{}", manifest.lemma_count);
            for (name, stats) in &families {
                println!(
                    "{}\tkeys={}\tpostings={}\tbytes={}",
                    name, stats["key_count"], stats["posting_count"], stats["bytes"]
                );
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_bench(args: BenchArgs) -> Result<u8, Error> {
    let config: BenchConfig = match &args.config {
        None => BenchConfig::default(),
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
    };
    eprintln!(
        "config: command=bench corpus={{docs={} words={}..{} vocab={} zipf={} seed={}}} max_distance={} sw_count={} fu_count={} queries={} seed={} engines={:?} parallel={}",
        config.corpus.doc_count,
        config.corpus.words_per_doc.0,
        config.corpus.words_per_doc.1,
        config.corpus.vocab_size,
        config.corpus.zipf_exponent,
        config.corpus.rng_seed,
        config.max_distance,
        config.sw_count,
        config.fu_count,
        config.query_count,
        config.query_seed,
        config.engines,
        args.parallel,
    );
    let engines = config.engine_kinds()?;

    let tmp;
    let work_dir = match &args.work_dir {
        Some(dir) => dir.clone(),
        None => {
            tmp = tempfile::tempdir()?;
            tmp.path().to_owned()
        }
    };
    eprintln!("generating corpus...");
    let docs = bench::generate_corpus(&config.corpus)?;
    eprintln!("building indexes in {}...", work_dir.display());
    let cfg = IndexConfig {
        max_distance: config.max_distance,
        sw_count: config.sw_count,
        fu_count: config.fu_count,
        families: Families::default(),
    };
    let opts = BuildOptions {
        batch_size: 0,
        threads: args.threads,
    };
    build_index(&docs, &Dictionary::new(), &cfg, &opts, &work_dir)?;
    let index = Index::open(&work_dir)?;
    eprintln!("running {} queries...", config.query_count);
    let queries = bench::generate_queries(&index, config.query_count, config.query_length, config.query_seed)?;
    let report = bench::run_benchmark(&index, &queries, &engines, args.parallel)?;
    print!("{}", report.text_table());
    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
        eprintln!("report written to {}", path.display());
    }
    Ok(EXIT_OK)
}

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<u8, Error> {
    eprintln!(
        "config: command=oracle-check index={} corpus={} trials={} seed={} max_distance={}",
        args.index.display(),
        args.corpus.display(),
        args.trials,
        args.seed,
        args.max_distance.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
    );
    let index = Index::open(&args.index)?;
    if let Some(expected) = args.max_distance {
        if expected != index.max_distance() {
            return Err(Error::InvalidConfig(format!(
                "index manifest has max_distance={}, but the check expects {}",
                index.max_distance(),
                expected
            )));
        }
    }
    let docs = read_corpus_dir(&args.corpus)?;
    if docs.len() as u32 != index.manifest().doc_count {
        return Err(Error::InvalidConfig(format!(
            "corpus has {} documents but the index manifest says {}",
            docs.len(),
            index.manifest().doc_count
        )));
    }
    let corpus = TokenizedCorpus::build(&docs, index.dictionary(), index.lexicon())?;
    let queries = bench::generate_queries(&index, args.trials, (3, 5), args.seed)?;
    for (trial, query) in queries.iter().enumerate() {
        let expected = brute_force_query(
            query,
            &corpus,
            index.dictionary(),
            index.lexicon(),
            index.max_distance(),
            true,
        )?;
        for engine in [EngineKind::Triple, EngineKind::Pair] {
            let opts = EvalOptions {
                engine,
                emit_final_fragment: true,
            };
            let outcome = evaluate_query(&index, query, &opts)?;
            if outcome.results != expected {
                println!(
                    "DIVERGENCE trial={trial} seed={} engine={} query={query:?}: engine returned {} fragments, reference {}",
                    args.seed,
                    engine.name(),
                    outcome.results.len(),
                    expected.len()
                );
                return Ok(EXIT_DIVERGENCE);
            }
        }
        if (trial + 1) % 100 == 0 {
            eprintln!("{} trials passed", trial + 1);
        }
    }
    println!("PASS: {} trials, no divergence", args.trials);
    Ok(EXIT_OK)
}

//! `facetforge` command line.
//!
//! Exit status: 0 on success, 1 when error findings were reported, 2 on
//! usage, input or IO errors. Diagnostics go to stderr, payloads to stdout
//! unless `--out` is given.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "facetforge", version, about = "Faceted classification and entity-graph toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classification schedules
    #[command(subcommand)]
    Schedule(ScheduleCommand),
    /// Synthesize a class number from facet assignments
    Classify(ClassifyArgs),
    /// Derive subject headings from a class number
    ChainIndex(ChainIndexArgs),
    /// Catalogue records
    #[command(subcommand)]
    Record(RecordCommand),
    /// Lightweight ontologies
    #[command(subcommand)]
    Ontology(OntologyCommand),
    /// Entity Type Graphs
    #[command(subcommand)]
    Etg(EtgCommand),
    /// ETG repository
    #[command(subcommand)]
    Repo(RepoCommand),
    /// Ground a lightweight ontology in an ETG
    Ground(GroundArgs),
    /// Entity graphs
    #[command(subcommand)]
    Eg(EgCommand),
}

#[derive(Subcommand)]
enum ScheduleCommand {
    /// Check a schedule against the canons
    Lint {
        schedule: PathBuf,
        /// Lint configuration (exhaustive arrays, disabled rules)
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScheduleFormula {
    #[arg(long)]
    schedule: PathBuf,
    /// Facet formula, e.g. "[B],[P]:[E].[S]'[T?]"
    #[arg(long)]
    formula: String,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    target: ScheduleFormula,
    /// Facet assignment CODE=NOTATION, repeatable
    #[arg(long = "facet", value_name = "CODE=NOTATION")]
    facets: Vec<String>,
}

#[derive(Args)]
struct ChainIndexArgs {
    #[command(flatten)]
    target: ScheduleFormula,
    class_number: String,
}

#[derive(Subcommand)]
enum RecordCommand {
    /// Build a catalogue record with call number and chain-index headings
    Build(RecordBuildArgs),
    /// Check records against a catalogue code
    Lint {
        #[arg(long)]
        code: PathBuf,
        /// JSON array of records
        records: PathBuf,
    },
}

#[derive(Args)]
struct RecordBuildArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long = "type", value_name = "RESOURCE_TYPE")]
    resource_type: String,
    /// Imprint field KEY=VALUE, repeatable
    #[arg(long = "field", value_name = "KEY=VALUE")]
    fields: Vec<String>,
    #[command(flatten)]
    target: ScheduleFormula,
    #[arg(long = "class")]
    class_number: String,
    /// Defaults to the last word of the author field
    #[arg(long)]
    surname: Option<String>,
    /// Defaults to the first four digits of the date field
    #[arg(long)]
    year: Option<u32>,
    #[arg(long)]
    accession: u64,
    /// JSON array of existing records whose call numbers must not collide
    #[arg(long)]
    register: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OntologyInputs {
    #[arg(long)]
    lexsem: PathBuf,
    #[arg(long, default_value = "en")]
    language: String,
    /// Dataset schema
    #[arg(long)]
    schema: PathBuf,
}

#[derive(Subcommand)]
enum OntologyCommand {
    /// Build the lightweight ontology of a dataset schema
    Build {
        #[command(flatten)]
        inputs: OntologyInputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EtgCommand {
    /// Check an ETG against the canons
    Lint {
        etg: PathBuf,
        /// Canon configuration (stoplist, disabled rules)
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RepoDir {
    #[arg(long, env = "FACETFORGE_REPO")]
    repo: PathBuf,
}

#[derive(Subcommand)]
enum RepoCommand {
    /// Admit a lint-clean ETG
    Add {
        #[command(flatten)]
        repo: RepoDir,
        #[arg(long = "tag")]
        tags: Vec<String>,
        #[arg(long, default_value = "1")]
        version: String,
        etg: PathBuf,
    },
    /// List entries sharing a tag (all entries without tags)
    Find {
        #[command(flatten)]
        repo: RepoDir,
        #[arg(long = "tag")]
        tags: Vec<String>,
    },
}

#[derive(Args)]
struct EtgSource {
    /// ETG file
    #[arg(long, conflicts_with = "from_repo", required_unless_present = "from_repo")]
    etg: Option<PathBuf>,
    /// Repository entry ID@VERSION
    #[arg(long, value_name = "ID@VERSION", requires = "repo")]
    from_repo: Option<String>,
    #[arg(long, env = "FACETFORGE_REPO")]
    repo: Option<PathBuf>,
}

#[derive(Args)]
struct GroundArgs {
    #[command(flatten)]
    inputs: OntologyInputs,
    #[command(flatten)]
    etg: EtgSource,
    /// JSON object from node id or class name to entity type
    #[arg(long)]
    grounding: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Nt,
    Json,
    Fca,
}

#[derive(Subcommand)]
enum EgCommand {
    /// Build an entity graph from mapped datasets
    Build(Box<EgBuildArgs>),
    /// Run a conjunctive triple-pattern query
    Query {
        #[arg(long)]
        graph: PathBuf,
        query: String,
    },
    /// Export a graph
    Export {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a digest-stamped snapshot
    Snapshot {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args)]
struct EgBuildArgs {
    #[command(flatten)]
    inputs: OntologyInputs,
    #[command(flatten)]
    etg: EtgSource,
    #[arg(long)]
    grounding: Option<PathBuf>,
    /// Dataset mapping; dataset sources resolve relative to its directory
    #[arg(long)]
    mapping: PathBuf,
    /// Base IRI for minted entities
    #[arg(long)]
    base: String,
    /// Build timestamp (UTC, seconds); defaults to now
    #[arg(long)]
    at: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};

use facetforge_core::catalogue::{build_record, lint_records, load_catalogue_code, make_call_number};
use facetforge_core::eg::{build_from_sources, load_mapping_spec, snapshot, BuildError, PipelineError};
use facetforge_core::etg::{
    ground, lint_etg, load_etg, load_grounding_map, read_etg, CanonConfig, GroundError, RepoError,
};
use facetforge_core::export::ExportFormat;
use facetforge_core::facet::{chain_index, parse_class_number, parse_formula, synthesize_class_number};
use facetforge_core::lexsem::load_lexsem;
use facetforge_core::model::has_errors;
use facetforge_core::ontology::{build_lightweight_ontology, load_dataset_schema};
use facetforge_core::query::{parse_query, run_query};
use facetforge_core::schedule::{load_schedule, LintConfig};
use facetforge_core::{
    CatalogueRecord, ClassificationSchedule, EntityGraph, EntityTypeGraph, EtgRepository,
    FacetFormula, Finding, Iri, LightweightOntology, SchemaGraph, Timestamp,
};

use crate::{
    ChainIndexArgs, ClassifyArgs, Command, EgBuildArgs, EgCommand, EtgCommand, EtgSource, Format,
    GroundArgs, OntologyCommand, OntologyInputs, RecordBuildArgs, RecordCommand, RepoCommand,
    ScheduleCommand, ScheduleFormula,
};

const FINDINGS_EXIT: u8 = 1;

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Schedule(ScheduleCommand::Lint { schedule, config }) => {
            let schedule = read_schedule(&schedule)?;
            let config = match config {
                Some(path) => LintConfig::from_json(&read(&path)?)
                    .with_context(|| format!("{}", path.display()))?,
                None => LintConfig::default(),
            };
            Ok(report(&schedule.lint(&config)))
        }
        Command::Classify(args) => classify(args),
        Command::ChainIndex(args) => chain(args),
        Command::Record(RecordCommand::Build(args)) => record_build(args),
        Command::Record(RecordCommand::Lint { code, records }) => {
            let code = load_catalogue_code(&read(&code)?)?;
            let records = read_records(&records)?;
            Ok(report(&lint_records(&code, &records)))
        }
        Command::Ontology(OntologyCommand::Build { inputs, out }) => {
            let (ontology, findings) = ontology(&inputs)?;
            print_findings(&findings);
            emit(out.as_deref(), ontology.to_canonical_json().as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Etg(EtgCommand::Lint { etg, config }) => {
            let etg = read_etg(&read(&etg)?)?;
            let config = read_canon_config(config.as_deref())?;
            Ok(report(&lint_etg(&etg, &config)))
        }
        Command::Repo(RepoCommand::Add {
            repo,
            tags,
            version,
            etg,
        }) => {
            let etg = load_etg(&read(&etg)?)?;
            let mut repo = EtgRepository::open(repo.repo)?;
            match repo.add(&etg, &tags, &version, &CanonConfig::default()) {
                Ok(entry) => {
                    println!("{}\t{}", entry.id, entry.version);
                    Ok(ExitCode::SUCCESS)
                }
                Err(RepoError::Lint(findings)) => {
                    eprintln!("error: {} refused: lint errors", etg.id);
                    Ok(report(&findings))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Repo(RepoCommand::Find { repo, tags }) => {
            let repo = EtgRepository::open(repo.repo)?;
            for e in repo.find(&tags) {
                let status = serde_json::to_value(e.lint_status)?;
                println!(
                    "{}\t{}\t{}\t{}",
                    e.id,
                    e.version,
                    e.tags.join(","),
                    status.as_str().unwrap_or_default()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Ground(args) => ground_command(args),
        Command::Eg(EgCommand::Build(args)) => eg_build(*args),
        Command::Eg(EgCommand::Query { graph, query }) => {
            let eg = read_graph(&graph)?;
            let query = parse_query(&query)?;
            let table = run_query(&eg, &query)?;
            if table.columns.is_empty() {
                println!("{}", table.holds());
            } else {
                print!("{}", table.render());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eg(EgCommand::Export { graph, format, out }) => {
            let eg = read_graph(&graph)?;
            let format = match format {
                Format::Nt => ExportFormat::NTriples,
                Format::Json => ExportFormat::Json,
                Format::Fca => ExportFormat::Fca,
            };
            emit(out.as_deref(), &format.export(&eg))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eg(EgCommand::Snapshot {
            graph,
            out_dir,
            force,
        }) => {
            let eg = read_graph(&graph)?;
            let snap = snapshot(&eg, &out_dir, force)?;
            for f in &snap.manifest.files {
                println!("{}\t{}", f.sha256, snap.directory.join(&f.name).display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            if !bytes.ends_with(b"\n") {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn print_findings(findings: &[Finding]) {
    for f in findings {
        eprintln!("{f}");
    }
}

fn report(findings: &[Finding]) -> ExitCode {
    print_findings(findings);
    if has_errors(findings) {
        ExitCode::from(FINDINGS_EXIT)
    } else {
        ExitCode::SUCCESS
    }
}

fn read_schedule(path: &Path) -> Result<ClassificationSchedule> {
    load_schedule(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn schedule_and_formula(target: &ScheduleFormula) -> Result<(ClassificationSchedule, FacetFormula)> {
    let schedule = read_schedule(&target.schedule)?;
    let formula = parse_formula(&target.formula, &schedule)?;
    Ok((schedule, formula))
}

fn key_value(text: &str) -> Result<(&str, &str)> {
    text.split_once('=')
        .ok_or_else(|| anyhow!("expected KEY=VALUE, got `{text}`"))
}

fn classify(args: ClassifyArgs) -> Result<ExitCode> {
    let (schedule, formula) = schedule_and_formula(&args.target)?;
    let mut assignments = BTreeMap::new();
    for facet in &args.facets {
        let (code, notation) = key_value(facet)?;
        let mut chars = code.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            bail!("facet code must be one character, got `{code}`");
        };
        if assignments.insert(c, notation.to_string()).is_some() {
            bail!("facet {c} assigned twice");
        }
    }
    let (_, text) = synthesize_class_number(&schedule, &formula, &assignments)?;
    println!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn chain(args: ChainIndexArgs) -> Result<ExitCode> {
    let (schedule, formula) = schedule_and_formula(&args.target)?;
    let number = parse_class_number(&schedule, &formula, &args.class_number)?;
    for h in chain_index(&schedule, &number)? {
        println!("{}\t{}", h.heading, h.reference);
    }
    Ok(ExitCode::SUCCESS)
}

fn read_records(path: &Path) -> Result<Vec<CatalogueRecord>> {
    serde_json::from_str(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn record_build(args: RecordBuildArgs) -> Result<ExitCode> {
    let code = load_catalogue_code(&read(&args.code)?)?;
    let (schedule, formula) = schedule_and_formula(&args.target)?;
    let number = parse_class_number(&schedule, &formula, &args.class_number)?;
    let headings = chain_index(&schedule, &number)?;
    let mut imprint = BTreeMap::new();
    for field in &args.fields {
        let (k, v) = key_value(field)?;
        imprint.insert(k.to_string(), v.to_string());
    }
    let surname = match &args.surname {
        Some(s) => s.clone(),
        None => imprint
            .get("author")
            .and_then(|a| a.split_whitespace().last())
            .map(str::to_string)
            .ok_or_else(|| anyhow!("no --surname and no author field"))?,
    };
    let year = match args.year {
        Some(y) => y,
        None => imprint
            .get("date")
            .and_then(|d| d.get(..4))
            .and_then(|y| y.parse().ok())
            .ok_or_else(|| anyhow!("no --year and no date field starting with a year"))?,
    };
    let existing: BTreeSet<_> = match &args.register {
        Some(path) => read_records(path)?.into_iter().map(|r| r.call_number).collect(),
        None => BTreeSet::new(),
    };
    let call = make_call_number(&args.class_number, &surname, year, args.accession, &existing)?;
    let record = build_record(
        &code,
        &args.resource_type,
        &imprint,
        headings,
        call,
        args.accession,
    )?;
    emit(args.out.as_deref(), record.to_json().as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn read_canon_config(path: Option<&Path>) -> Result<CanonConfig> {
    match path {
        Some(path) => {
            CanonConfig::from_json(&read(path)?).with_context(|| format!("{}", path.display()))
        }
        None => Ok(CanonConfig::default()),
    }
}

fn ontology(inputs: &OntologyInputs) -> Result<(LightweightOntology, Vec<Finding>)> {
    let lexsem = load_lexsem(&read(&inputs.lexsem)?)?;
    let schema = load_dataset_schema(&read(&inputs.schema)?)?;
    Ok(build_lightweight_ontology(&lexsem, &inputs.language, &schema)?)
}

fn source_etg(source: &EtgSource) -> Result<EntityTypeGraph> {
    if let Some(path) = &source.etg {
        return Ok(load_etg(&read(path)?)?);
    }
    let spec = source.from_repo.as_deref().unwrap_or_default();
    let (id, version) = spec
        .split_once('@')
        .ok_or_else(|| anyhow!("expected ID@VERSION, got `{spec}`"))?;
    let dir = source
        .repo
        .clone()
        .ok_or_else(|| anyhow!("--from-repo needs --repo"))?;
    Ok(EtgRepository::open(dir)?.load(id, version)?)
}

/// Grounds, or returns the exit code when grounding was refused on findings.
fn schema_graph(
    inputs: &OntologyInputs,
    etg: &EtgSource,
    grounding: Option<&PathBuf>,
) -> Result<std::result::Result<(SchemaGraph, Vec<Finding>), ExitCode>> {
    let (ontology, mut findings) = ontology(inputs)?;
    let etg = source_etg(etg)?;
    let mapping = match grounding {
        Some(path) => load_grounding_map(&read(path)?)?,
        None => BTreeMap::new(),
    };
    match ground(&ontology, &etg, &mapping) {
        Ok((sg, f)) => {
            findings.extend(f);
            Ok(Ok((sg, findings)))
        }
        Err(GroundError::InvalidOntology(f)) => {
            eprintln!("error: ontology is not a valid backbone");
            print_findings(&findings);
            Ok(Err(report(&f)))
        }
        Err(GroundError::EtgNotClean(f)) => {
            eprintln!("error: ETG {} has lint errors", etg.id);
            Ok(Err(report(&f)))
        }
        Err(e) => Err(e.into()),
    }
}

fn ground_command(args: GroundArgs) -> Result<ExitCode> {
    let (sg, findings) = match schema_graph(&args.inputs, &args.etg, args.grounding.as_ref())? {
        Ok(v) => v,
        Err(code) => return Ok(code),
    };
    print_findings(&findings);
    emit(args.out.as_deref(), sg.to_json().as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn eg_build(args: EgBuildArgs) -> Result<ExitCode> {
    let (sg, mut findings) = match schema_graph(&args.inputs, &args.etg, args.grounding.as_ref())? {
        Ok(v) => v,
        Err(code) => return Ok(code),
    };
    let spec = load_mapping_spec(&read(&args.mapping)?, &sg)?;
    let base = Iri::parse(&args.base)?;
    let at = match &args.at {
        Some(text) => Timestamp::parse(text)?,
        None => Timestamp::now(),
    };
    let source_dir = args
        .mapping
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    match build_from_sources(&sg, &spec, source_dir, &base, at) {
        Ok((eg, f)) => {
            findings.extend(f);
            let code = report(&findings);
            emit(args.out.as_deref(), &ExportFormat::Json.export(&eg))?;
            Ok(code)
        }
        Err(PipelineError::Build(BuildError::Dangling(f))) => {
            print_findings(&findings);
            eprintln!("error: dangling links; no graph written");
            Ok(report(&f))
        }
        Err(e) => Err(e.into()),
    }
}

fn read_graph(path: &Path) -> Result<EntityGraph> {
    EntityGraph::from_json(&read(path)?).with_context(|| format!("{}", path.display()))
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ontomod::align::{compute_mappings, MappingSet, SimilarityOptions};
use ontomod::extract::{extract_module, EnrichFields};
use ontomod::integrate::{bridge_file_name, build_bridge, merge, pairwise_merges};
use ontomod::matching::{match_terms, MatchMode};
use ontomod::obo::{module_file_name, serialize_module, serialize_obo, ParsedObo};
use ontomod::sat::{
    check_pairs, explain, explain_all, explanations_json, find_unsat, pairs_tsv, repair,
    unsat_report, unsat_report_tsv, RepairPlan,
};
use ontomod::{EntityId, OntologyId, SatError, TermSet};
use ontomod_cli::{
    document_id, load_merged, load_module, load_obo, load_sources, parse_ontology_arg,
    run_pipeline, write_fixpoint, write_mappings, write_merge, ArtifactWriter, PipelineConfig,
    Status, REPAIR_ITERATIONS,
};

#[derive(Parser)]
#[command(
    name = "ontomod",
    version,
    about = "Seed-driven ontology modules, alignment and integration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write all artifacts
    Pipeline(PipelineArgs),
    /// Parse an OBO file and print it normalized
    Parse {
        file: PathBuf,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List seed-term hits in one ontology
    Match {
        file: PathBuf,
        #[command(flatten)]
        seeds: SeedArgs,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the module of the seed-matched classes of one ontology
    Extract {
        file: PathBuf,
        #[command(flatten)]
        seeds: SeedArgs,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enrich the signature across ontologies until stable and write the modules
    Fixpoint {
        #[command(flatten)]
        seeds: SeedArgs,
        #[arg(long = "ontology", value_name = "ID=PATH", required = true)]
        ontologies: Vec<String>,
        #[arg(long, value_name = "FIELDS")]
        enrich_fields: Option<EnrichFields>,
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long)]
        order_audit: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Align module files and write the mapping set
    Map {
        #[arg(required = true)]
        modules: Vec<PathBuf>,
        #[arg(long, default_value_t = ontomod_cli::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        no_def_similarity: bool,
        #[arg(long)]
        label: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the bridge document for a mapping set
    Bridge {
        #[arg(required = true)]
        modules: Vec<PathBuf>,
        #[arg(long)]
        mappings: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Materialize a bridge and its imports into one merged ontology
    Merge {
        bridge: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report unsatisfiable classes of a merged or bridge file; exits 2 on clashes
    Check {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-pair counts (bridge input only)
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Print minimal explanations as JSON
    Explain {
        file: PathBuf,
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Propose a repair plan; exits 2 when it cannot be verified
    Repair {
        file: PathBuf,
        #[arg(long, default_value_t = REPAIR_ITERATIONS)]
        max_iterations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a repair plan and re-check; exits 2 if clashes remain
    ApplyRepair {
        file: PathBuf,
        plan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SeedArgs {
    #[arg(long = "seed", value_name = "TERM")]
    seeds: Vec<String>,
    #[arg(long, value_name = "MODE")]
    match_mode: Option<MatchMode>,
    #[arg(long)]
    label: Option<String>,
}

impl SeedArgs {
    fn terms(&self) -> Result<TermSet> {
        if self.seeds.is_empty() {
            bail!("at least one --seed is required");
        }
        Ok(TermSet::new(&self.seeds)?)
    }

    fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            self.seeds
                .first()
                .cloned()
                .unwrap_or_default()
                .to_ascii_lowercase()
        })
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "seed", value_name = "TERM")]
    seeds: Vec<String>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long = "ontology", value_name = "ID=PATH")]
    ontologies: Vec<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_name = "MODE")]
    match_mode: Option<MatchMode>,
    #[arg(long, value_name = "FIELDS")]
    enrich_fields: Option<EnrichFields>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    order_audit: bool,
    #[arg(long)]
    auto_repair: bool,
    #[arg(long)]
    no_def_similarity: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl PipelineArgs {
    /// Config file values overridden by flags.
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        if self.label.is_some() {
            cfg.seed_label = self.label.clone();
        }
        if !self.ontologies.is_empty() {
            cfg.ontologies = self
                .ontologies
                .iter()
                .map(|o| parse_ontology_arg(o))
                .collect::<Result<_>>()?;
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(m) = self.match_mode {
            cfg.match_mode = m;
        }
        if let Some(f) = self.enrich_fields {
            cfg.enrich_fields = f;
        }
        if let Some(n) = self.max_rounds {
            cfg.max_rounds = n;
        }
        cfg.order_audit |= self.order_audit;
        cfg.auto_repair |= self.auto_repair;
        if self.no_def_similarity {
            cfg.def_similarity = false;
        }
        if self.out.is_some() {
            cfg.output_dir = self.out.clone();
        }
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses a user-supplied file under `id` (or its own id), echoing warnings.
fn load_input(id: &Option<String>, file: &Path) -> Result<ParsedObo> {
    let id = match id {
        Some(id) => OntologyId::new(id.clone()),
        None => document_id(file)?,
    };
    let parsed = load_obo(file, id)?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", file.display());
    }
    Ok(parsed)
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Pipeline(args) => {
            let run = run_pipeline(&args.config()?)?;
            for w in &run.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "{} artifacts written, {} mappings, {} unsatisfiable classes",
                run.written.len(),
                run.mappings,
                run.unsatisfiable
            );
            Ok(run.status)
        }
        Command::Parse { file, id, out } => {
            let parsed = load_input(&id, &file)?;
            emit(out.as_deref(), &serialize_obo(&parsed.ontology))?;
            Ok(Status::Clean)
        }
        Command::Match {
            file,
            seeds,
            id,
            out,
        } => {
            let parsed = load_input(&id, &file)?;
            let report = match_terms(
                &parsed.ontology,
                &seeds.terms()?,
                seeds.match_mode.unwrap_or_default(),
            )?;
            emit(out.as_deref(), &report.to_tsv())?;
            Ok(Status::Clean)
        }
        Command::Extract {
            file,
            seeds,
            id,
            out,
        } => {
            let parsed = load_input(&id, &file)?;
            let o = &parsed.ontology;
            let hits = match_terms(o, &seeds.terms()?, seeds.match_mode.unwrap_or_default())?;
            let module = extract_module(o, &hits.matched);
            let mut w = ArtifactWriter::new(&out)?;
            w.write(
                &module_file_name(&seeds.label(), o.id()),
                &serialize_module(&module),
            )?;
            Ok(Status::Clean)
        }
        Command::Fixpoint {
            seeds,
            ontologies,
            enrich_fields,
            max_rounds,
            order_audit,
            out,
        } => {
            let cfg = PipelineConfig {
                seeds: seeds.seeds.clone(),
                ontologies: ontologies
                    .iter()
                    .map(|o| parse_ontology_arg(o))
                    .collect::<Result<_>>()?,
                match_mode: seeds.match_mode.unwrap_or_default(),
                enrich_fields: enrich_fields.unwrap_or_default(),
                max_rounds: max_rounds.unwrap_or(PipelineConfig::default().max_rounds),
                ..Default::default()
            };
            let (sources, warnings) = load_sources(&cfg)?;
            warnings.iter().for_each(|w| eprintln!("warning: {w}"));
            let mut w = ArtifactWriter::new(&out)?;
            write_fixpoint(
                &mut w,
                &seeds.label(),
                &sources,
                &seeds.terms()?,
                &cfg.fixpoint_options(),
                order_audit,
            )?;
            Ok(Status::Clean)
        }
        Command::Map {
            modules,
            threshold,
            no_def_similarity,
            label,
            out,
        } => {
            let modules = modules
                .iter()
                .map(|m| load_module(m))
                .collect::<Result<Vec<_>>>()?;
            let opts = SimilarityOptions {
                use_definitions: !no_def_similarity,
            };
            let maps = compute_mappings(&modules, threshold, opts)?;
            write_mappings(&mut ArtifactWriter::new(&out)?, &label, &maps)?;
            Ok(Status::Clean)
        }
        Command::Bridge {
            modules,
            mappings,
            label,
            out,
        } => {
            let modules = modules
                .iter()
                .map(|m| load_module(m))
                .collect::<Result<Vec<_>>>()?;
            let text = fs::read_to_string(&mappings)
                .with_context(|| format!("reading {}", mappings.display()))?;
            let maps =
                MappingSet::from_json(&text).map_err(|e| anyhow!("{}: {e}", mappings.display()))?;
            let bridge = build_bridge(&modules, &maps, &label)?;
            for i in &bridge.imports {
                if !out.join(i).exists() {
                    eprintln!("warning: import {i} is not present next to the bridge");
                }
            }
            ArtifactWriter::new(&out)?.write(&bridge_file_name(&label), &bridge.to_obo())?;
            Ok(Status::Clean)
        }
        Command::Merge { bridge, out } => {
            let (b, modules) = ontomod_cli::load_bridge(&bridge)?;
            write_merge(
                &mut ArtifactWriter::new(&out)?,
                &b.label,
                &merge(&modules, &b),
            )?;
            Ok(Status::Clean)
        }
        Command::Check { file, out, pairs } => {
            let merged = load_merged(&file)?;
            if let Some(pairs) = pairs {
                let (b, modules) = ontomod_cli::load_bridge(&file)?;
                let rows = check_pairs(&pairwise_merges(&modules, &b)?);
                emit(Some(&pairs), &pairs_tsv(&rows))?;
            }
            let rows = unsat_report(&merged);
            emit(out.as_deref(), &unsat_report_tsv(&rows))?;
            Ok(if rows.is_empty() {
                Status::Clean
            } else {
                Status::ClashesRemain
            })
        }
        Command::Explain { file, class, out } => {
            let merged = load_merged(&file)?;
            let explanations = match class {
                Some(c) => {
                    let c: EntityId = c.parse()?;
                    explain(&merged, &c)?
                }
                None => explain_all(&merged),
            };
            emit(out.as_deref(), &explanations_json(&explanations))?;
            Ok(Status::Clean)
        }
        Command::Repair {
            file,
            max_iterations,
            out,
        } => {
            let merged = load_merged(&file)?;
            match repair(&merged, max_iterations) {
                Ok(outcome) => {
                    emit(out.as_deref(), &outcome.plan.to_text())?;
                    Ok(Status::Clean)
                }
                Err(e @ SatError::RepairIncomplete { .. }) => {
                    eprintln!("{e}");
                    Ok(Status::ClashesRemain)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::ApplyRepair { file, plan, out } => {
            let merged = load_merged(&file)?;
            let text =
                fs::read_to_string(&plan).with_context(|| format!("reading {}", plan.display()))?;
            let removals = RepairPlan::parse_removals(&text)
                .map_err(|e| anyhow!("{}: {e}", plan.display()))?;
            let present = merged.axiom_set();
            for r in &removals {
                if !present.contains(r) {
                    eprintln!("warning: {r} is not in {}", file.display());
                }
            }
            let repaired = merged.without(&removals);
            emit(out.as_deref(), &serialize_obo(&repaired.to_ontology()))?;
            let remaining = find_unsat(&repaired).len();
            if remaining > 0 {
                eprintln!("{remaining} unsatisfiable classes remain");
                return Ok(Status::ClashesRemain);
            }
            Ok(Status::Clean)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! Pipeline driver: configuration, the end-to-end run and the single-stage
//! commands behind the `ontomod` binary.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ontomod::align::{check_threshold, compute_mappings, MappingSet, SimilarityOptions};
use ontomod::extract::{order_audit, run_fixpoint, EnrichFields, FixpointOptions, FixpointOutcome};
use ontomod::integrate::{
    bridge_file_name, build_bridge, merge, merged_file_name, pairwise_merges, BridgeOntology,
    MergedOntology,
};
use ontomod::matching::MatchMode;
use ontomod::obo::{module_file_name, parse_obo_bytes, serialize_module, serialize_obo, ParsedObo};
use ontomod::sat::{
    check_pairs, explain_all, pairs_tsv, repair, unsat_report, unsat_report_tsv, RepairPlan,
};
use ontomod::{Module, Ontology, OntologyId, SatError, TermSet};

pub const DEFAULT_THRESHOLD: f64 = 0.95;
pub const REPAIR_ITERATIONS: usize = 16;

/// Process exit status of a finished run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Clean,
    ClashesRemain,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Clean => 0,
            Status::ClashesRemain => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub seed_label: Option<String>,
    pub seeds: Vec<String>,
    pub ontologies: Vec<(OntologyId, PathBuf)>,
    pub threshold: f64,
    pub match_mode: MatchMode,
    pub enrich_fields: EnrichFields,
    pub max_rounds: usize,
    pub output_dir: Option<PathBuf>,
    pub def_similarity: bool,
    pub order_audit: bool,
    pub auto_repair: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed_label: None,
            seeds: Vec::new(),
            ontologies: Vec::new(),
            threshold: DEFAULT_THRESHOLD,
            match_mode: MatchMode::default(),
            enrich_fields: EnrichFields::default(),
            max_rounds: FixpointOptions::default().max_rounds,
            output_dir: None,
            def_similarity: true,
            order_audit: false,
            auto_repair: false,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

/// `id=path`
pub fn parse_ontology_arg(v: &str) -> Result<(OntologyId, PathBuf)> {
    let (id, path) = v
        .split_once('=')
        .ok_or_else(|| anyhow!("expected <id>=<path>, got {v:?}"))?;
    let (id, path) = (id.trim(), path.trim());
    if id.is_empty() || path.is_empty() || id.contains(char::is_whitespace) {
        bail!("expected <id>=<path>, got {v:?}");
    }
    Ok((OntologyId::new(id), PathBuf::from(path)))
}

impl PipelineConfig {
    /// Reads the flat `key = value` format. `#` starts a comment; relative
    /// paths are resolved against `base`. `ontology` may repeat.
    pub fn parse(text: &str, base: &Path, origin: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = || format!("{origin}:{}", i + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}: expected 'key = value'", at()))?;
            let (key, value) = (key.trim(), value.trim());
            if key != "ontology" && !seen.insert(key.to_string()) {
                bail!("{}: duplicate key {key:?}", at());
            }
            let bad = |what: &str| anyhow!("{}: invalid {what} {value:?}", at());
            match key {
                "seed_label" => cfg.seed_label = Some(value.to_string()),
                "seeds" => {
                    cfg.seeds = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect()
                }
                "ontology" => {
                    let (id, path) =
                        parse_ontology_arg(value).map_err(|e| anyhow!("{}: {e}", at()))?;
                    cfg.ontologies.push((id, base.join(path)));
                }
                "threshold" => cfg.threshold = value.parse().map_err(|_| bad("threshold"))?,
                "match_mode" => cfg.match_mode = value.parse().map_err(|_| bad("match mode"))?,
                "enrich_fields" => {
                    cfg.enrich_fields = value.parse().map_err(|_| bad("field list"))?
                }
                "max_rounds" => cfg.max_rounds = value.parse().map_err(|_| bad("round count"))?,
                "output_dir" => cfg.output_dir = Some(base.join(value)),
                "def_similarity" => {
                    cfg.def_similarity = parse_bool(value).ok_or_else(|| bad("boolean"))?
                }
                "order_audit" => {
                    cfg.order_audit = parse_bool(value).ok_or_else(|| bad("boolean"))?
                }
                "auto_repair" => {
                    cfg.auto_repair = parse_bool(value).ok_or_else(|| bad("boolean"))?
                }
                other => bail!("{}: unknown key {other:?}", at()),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    /// The label used in artifact names; defaults to the first seed.
    pub fn label(&self) -> String {
        self.seed_label.clone().unwrap_or_else(|| {
            self.seeds
                .first()
                .cloned()
                .unwrap_or_default()
                .to_ascii_lowercase()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("config: at least one seed term is required");
        }
        if let Some(s) = self.seeds.iter().find(|s| s.trim().chars().count() < 3) {
            bail!("config: seed term {s:?} is shorter than 3 characters");
        }
        check_threshold(self.threshold).map_err(|e| anyhow!("config: {e}"))?;
        if self.ontologies.is_empty() {
            bail!("config: no ontologies given");
        }
        let mut ids = BTreeSet::new();
        let mut paths = BTreeSet::new();
        for (id, path) in &self.ontologies {
            if !ids.insert(id) {
                bail!("config: ontology id {id} given twice");
            }
            let key = fs::canonicalize(path).unwrap_or_else(|_| path.clone());
            if !paths.insert(key) {
                bail!("config: ontology path {} given twice", path.display());
            }
        }
        let label = self.label();
        if label.is_empty() || label.contains(['/', '\\']) || label.contains(char::is_whitespace) {
            bail!("config: seed label {label:?} is not usable in file names");
        }
        if self.max_rounds == 0 {
            bail!("config: max_rounds must be positive");
        }
        if self.output_dir.is_none() {
            bail!("config: no output directory (use --out)");
        }
        Ok(())
    }

    pub fn fixpoint_options(&self) -> FixpointOptions {
        FixpointOptions {
            max_rounds: self.max_rounds,
            match_mode: self.match_mode,
            enrich_fields: self.enrich_fields,
        }
    }

    pub fn similarity(&self) -> SimilarityOptions {
        SimilarityOptions {
            use_definitions: self.def_similarity,
        }
    }
}

/// Parses an OBO file. Errors carry the path and line; warnings are left in
/// the result.
pub fn load_obo(path: &Path, id: OntologyId) -> Result<ParsedObo> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = parse_obo_bytes(id, &bytes).map_err(|e| {
        let line = e.line();
        let msg = e.to_string();
        let msg = msg
            .strip_prefix(&format!("line {line}: "))
            .unwrap_or(&msg)
            .to_string();
        anyhow!("{}:{line}: {msg}", path.display())
    })?;
    Ok(parsed)
}

/// Id recorded in a document's `ontology:` header, else the file stem.
pub fn document_id(path: &Path) -> Result<OntologyId> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = String::from_utf8_lossy(&bytes);
    let from_header = text
        .lines()
        .take_while(|l| !l.trim_start().starts_with('['))
        .find_map(|l| l.strip_prefix("ontology:"))
        .map(|v| v.split('!').next().unwrap_or("").trim().to_string())
        .filter(|v| !v.is_empty());
    let id = from_header.or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()));
    id.map(OntologyId::new)
        .ok_or_else(|| anyhow!("{}: cannot determine an ontology id", path.display()))
}

pub fn load_module(path: &Path) -> Result<Module> {
    let parsed = load_obo(path, document_id(path)?)?;
    Ok(Module::from_ontology(&parsed.ontology))
}

/// Label of a bridge document: its id without the `_bridge` suffix.
fn bridge_label(parsed: &ParsedObo, path: &Path) -> String {
    let id = parsed.ontology.id().as_str();
    id.strip_suffix("_bridge")
        .map(str::to_string)
        .or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().trim_end_matches("_bridge").to_string())
        })
        .unwrap_or_else(|| id.to_string())
}

/// Modules named by a bridge's imports, resolved relative to the bridge.
pub fn load_bridge(path: &Path) -> Result<(BridgeOntology, Vec<Module>)> {
    let parsed = load_obo(path, document_id(path)?)?;
    let bridge = BridgeOntology::from_parsed(&bridge_label(&parsed, path), &parsed);
    let dir = path.parent().unwrap_or(Path::new("."));
    let modules = bridge
        .imports
        .iter()
        .map(|i| load_module(&dir.join(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok((bridge, modules))
}

fn is_bridge(parsed: &ParsedObo) -> bool {
    parsed.document.header_values("import").next().is_some()
}

/// Reads a merged ontology, materializing it first when `path` is a bridge.
pub fn load_merged(path: &Path) -> Result<MergedOntology> {
    let parsed = load_obo(path, document_id(path)?)?;
    if is_bridge(&parsed) {
        let (bridge, modules) = load_bridge(path)?;
        Ok(merge(&modules, &bridge))
    } else {
        Ok(MergedOntology::from_ontology(&parsed.ontology))
    }
}

/// Writes `contents` to `dir/name` and records the path.
pub struct ArtifactWriter {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }
}

/// Source ontologies in configured order, with their parse warnings
/// prefixed by file name.
pub fn load_sources(cfg: &PipelineConfig) -> Result<(Vec<Ontology>, Vec<String>)> {
    let mut sources = Vec::new();
    let mut warnings = Vec::new();
    for (id, path) in &cfg.ontologies {
        let parsed = load_obo(path, id.clone())?;
        warnings.extend(
            parsed
                .warnings
                .iter()
                .map(|w| format!("{}: {w}", path.display())),
        );
        sources.push(parsed.ontology);
    }
    Ok((sources, warnings))
}

/// Fixpoint stage: writes one module file per ontology, the trace and
/// optionally the order audit.
pub fn write_fixpoint(
    out: &mut ArtifactWriter,
    label: &str,
    sources: &[Ontology],
    seeds: &TermSet,
    opts: &FixpointOptions,
    audit: bool,
) -> Result<FixpointOutcome> {
    let outcome = run_fixpoint(sources, seeds, opts)?;
    for m in &outcome.modules {
        out.write(&module_file_name(label, m.source()), &serialize_module(m))?;
    }
    out.write(&format!("{label}_trace.tsv"), &outcome.trace.to_tsv())?;
    if audit {
        let audit = order_audit(sources, seeds, opts)?;
        out.write(&format!("{label}_order_audit.tsv"), &audit.to_tsv())?;
    }
    Ok(outcome)
}

pub fn write_mappings(out: &mut ArtifactWriter, label: &str, maps: &MappingSet) -> Result<()> {
    out.write(&format!("{label}_mappings.json"), &maps.to_json())?;
    out.write(&format!("{label}_mappings.tsv"), &maps.to_tsv())?;
    Ok(())
}

/// Merge stage: the materialized merge and its conflict notes.
pub fn write_merge(out: &mut ArtifactWriter, label: &str, merged: &MergedOntology) -> Result<()> {
    out.write(
        &merged_file_name(label),
        &serialize_obo(&merged.to_ontology()),
    )?;
    out.write(&format!("{label}_conflicts.tsv"), &merged.conflicts_tsv())?;
    Ok(())
}

/// Check, explain and repair on one merge. Writes the unsat report, the
/// explanations and a repair plan (empty when clash-free); with
/// `auto_repair` also the repaired merge.
pub fn write_diagnosis(
    out: &mut ArtifactWriter,
    label: &str,
    merged: &MergedOntology,
    auto_repair: bool,
) -> Result<Status> {
    let rows = unsat_report(merged);
    out.write(&format!("{label}_unsat.tsv"), &unsat_report_tsv(&rows))?;
    let explanations = explain_all(merged);
    out.write(
        &format!("{label}_explanations.json"),
        &ontomod::sat::explanations_json(&explanations),
    )?;
    let outcome = match repair(merged, REPAIR_ITERATIONS) {
        Ok(o) => o,
        Err(e @ SatError::RepairIncomplete { .. }) => {
            eprintln!("{e}");
            out.write(
                &format!("{label}_repair_plan.txt"),
                &RepairPlan::default().to_text(),
            )?;
            return Ok(Status::ClashesRemain);
        }
        Err(e) => return Err(e.into()),
    };
    out.write(&format!("{label}_repair_plan.txt"), &outcome.plan.to_text())?;
    if auto_repair {
        let mut repaired = outcome.repaired;
        repaired.id = OntologyId::new(format!("{label}_repaired"));
        out.write(
            &format!("{label}_repaired.obo"),
            &serialize_obo(&repaired.to_ontology()),
        )?;
    }
    Ok(Status::Clean)
}

pub struct PipelineRun {
    pub status: Status,
    pub warnings: Vec<String>,
    pub written: Vec<PathBuf>,
    pub unsatisfiable: usize,
    pub mappings: usize,
}

/// parse → fixpoint → map → bridge → merge → pairwise check → full check →
/// repair plan.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let label = cfg.label();
    let seeds = TermSet::new(&cfg.seeds)?;
    let (sources, warnings) = load_sources(cfg)?;
    let mut out = ArtifactWriter::new(cfg.output_dir.as_deref().expect("validated"))?;

    let outcome = write_fixpoint(
        &mut out,
        &label,
        &sources,
        &seeds,
        &cfg.fixpoint_options(),
        cfg.order_audit,
    )?;
    let modules = outcome.modules;
    let maps = compute_mappings(&modules, cfg.threshold, cfg.similarity())?;
    write_mappings(&mut out, &label, &maps)?;
    let bridge = build_bridge(&modules, &maps, &label)?;
    out.write(&bridge_file_name(&label), &bridge.to_obo())?;
    let merged = merge(&modules, &bridge);
    write_merge(&mut out, &label, &merged)?;
    if modules.len() >= 2 {
        let rows = check_pairs(&pairwise_merges(&modules, &bridge)?);
        out.write(&format!("{label}_pairs.tsv"), &pairs_tsv(&rows))?;
    }
    let unsatisfiable = ontomod::sat::find_unsat(&merged).len();
    let status = write_diagnosis(&mut out, &label, &merged, cfg.auto_repair)?;
    Ok(PipelineRun {
        status,
        warnings,
        written: out.written,
        unsatisfiable,
        mappings: maps.mappings.len(),
    })
}

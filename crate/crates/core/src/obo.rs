//! Reading and writing the supported subset of the OBO flat-file format.
//!
//! Logical tags (`is_a`, `relationship`, `intersection_of`, `disjoint_from`,
//! `equivalent_to`) become normalized [`Axiom`]s; `id`, `name`, `def`,
//! `synonym`, `alt_id` and `is_obsolete` become [`Annotations`]. Every other
//! tag is dropped and reported once per tag name in the warning list.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::OboError;
use crate::model::{
    Annotations, Axiom, ClassExpr, EntityId, Module, Ontology, OntologyId, Synonym, SynonymScope,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StanzaKind {
    Term,
    Typedef,
    Other(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagLine {
    pub tag: String,
    /// Raw value, trailing `! comment` removed.
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stanza {
    pub kind: StanzaKind,
    pub line: usize,
    pub tags: Vec<TagLine>,
}

/// Line-level structure of an OBO document: header tags followed by stanzas,
/// both in document order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OboDocument {
    pub header: Vec<TagLine>,
    pub stanzas: Vec<Stanza>,
}

impl OboDocument {
    pub fn parse(text: &str) -> Result<Self, OboError> {
        let mut doc = OboDocument::default();
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('!') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') && line.len() >= 2 {
                let name = line[1..line.len() - 1].trim();
                let kind = match name {
                    "Term" => StanzaKind::Term,
                    "Typedef" => StanzaKind::Typedef,
                    other => StanzaKind::Other(other.to_string()),
                };
                doc.stanzas.push(Stanza {
                    kind,
                    line: line_no,
                    tags: Vec::new(),
                });
                continue;
            }
            let Some((tag, value)) = line.split_once(": ") else {
                return Err(OboError::MalformedLine {
                    line: line_no,
                    text: line.to_string(),
                });
            };
            let tag_line = TagLine {
                tag: tag.trim().to_string(),
                value: strip_comment(value.trim()).to_string(),
                line: line_no,
            };
            match doc.stanzas.last_mut() {
                Some(stanza) => stanza.tags.push(tag_line),
                None => doc.header.push(tag_line),
            }
        }
        Ok(doc)
    }

    pub fn header_value(&self, tag: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|t| t.tag == tag)
            .map(|t| t.value.as_str())
    }

    pub fn header_values<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.header
            .iter()
            .filter(move |t| t.tag == tag)
            .map(|t| t.value.as_str())
    }
}

/// Removes a trailing `! comment`: the first `!` that sits outside a leading
/// quoted string and is preceded by whitespace.
fn strip_comment(value: &str) -> &str {
    let bytes = value.as_bytes();
    let mut in_quote = false;
    let mut escaped = false;
    let quoted = value.starts_with('"');
    for (i, &b) in bytes.iter().enumerate() {
        if quoted {
            if escaped {
                escaped = false;
                continue;
            }
            match b {
                b'\\' if in_quote => {
                    escaped = true;
                    continue;
                }
                b'"' => {
                    in_quote = !in_quote;
                    continue;
                }
                _ => {}
            }
            if in_quote {
                continue;
            }
        }
        if b == b'!' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return value[..i].trim_end();
        }
    }
    value
}

/// Removes a trailing `{...}` qualifier block from an unquoted reference value.
fn strip_qualifiers(value: &str) -> &str {
    let v = value.trim_end();
    if v.ends_with('}') {
        if let Some(open) = v.rfind('{') {
            return v[..open].trim_end();
        }
    }
    v
}

/// Reads a leading quoted string honoring `\"`, `\\` and `\n`. Returns the
/// unescaped text and the remainder after the closing quote, or `None` if the
/// value does not start with a quote.
fn read_quoted(value: &str) -> Option<(String, &str, bool)> {
    let rest = value.strip_prefix('"')?;
    let mut out = String::new();
    let mut chars = rest.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '"' => return Some((out, &rest[i + 1..], true)),
            '\\' => match chars.next() {
                Some((_, '"')) => out.push('"'),
                Some((_, '\\')) => out.push('\\'),
                Some((_, 'n')) => out.push('\n'),
                Some((_, other)) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            },
            c => out.push(c),
        }
    }
    Some((out, "", false))
}

fn escape_quoted(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Result of parsing one OBO document.
#[derive(Clone, Debug)]
pub struct ParsedObo {
    pub ontology: Ontology,
    pub warnings: Vec<String>,
    pub document: OboDocument,
}

#[derive(Default)]
struct Warnings {
    list: Vec<String>,
    ignored_tags: BTreeMap<String, usize>,
}

impl Warnings {
    fn push(&mut self, line: usize, msg: impl std::fmt::Display) {
        self.list.push(format!("line {line}: {msg}"));
    }

    fn finish(mut self) -> Vec<String> {
        for (tag, count) in self.ignored_tags {
            self.list
                .push(format!("tag '{tag}' ignored ({count} occurrences)"));
        }
        self.list
    }
}

fn parse_ref(value: &str, line: usize, warnings: &mut Warnings) -> Option<EntityId> {
    let v = strip_qualifiers(value);
    match v.parse() {
        Ok(id) => Some(id),
        Err(_) => {
            warnings.push(line, format!("invalid identifier {v:?} skipped"));
            None
        }
    }
}

fn parse_ref_pair(
    value: &str,
    line: usize,
    warnings: &mut Warnings,
) -> Option<(EntityId, EntityId)> {
    let v = strip_qualifiers(value);
    let mut parts = v.split_whitespace();
    let (Some(r), Some(f), None) = (parts.next(), parts.next(), parts.next()) else {
        warnings.push(line, format!("expected '<relation> <id>', got {v:?}"));
        return None;
    };
    match (r.parse(), f.parse()) {
        (Ok(r), Ok(f)) => Some((r, f)),
        _ => {
            warnings.push(line, format!("invalid identifier in {v:?}"));
            None
        }
    }
}

fn parse_synonym(value: &str, default_scope: SynonymScope) -> Option<Synonym> {
    let (text, rest, _) = read_quoted(value)?;
    let scope = rest
        .split_whitespace()
        .next()
        .and_then(SynonymScope::from_keyword)
        .unwrap_or(default_scope);
    Some(Synonym::new(text, scope))
}

/// Parses OBO text into an ontology named `id`.
pub fn parse_obo(id: OntologyId, text: &str) -> Result<ParsedObo, OboError> {
    let document = OboDocument::parse(text)?;
    let mut warnings = Warnings::default();
    let mut classes: BTreeMap<EntityId, Annotations> = BTreeMap::new();
    let mut relations: BTreeMap<EntityId, Annotations> = BTreeMap::new();
    let mut axioms = Vec::new();

    for stanza in &document.stanzas {
        if let StanzaKind::Other(name) = &stanza.kind {
            warnings.push(stanza.line, format!("[{name}] stanza ignored"));
            continue;
        }
        let is_term = stanza.kind == StanzaKind::Term;
        let id_line = stanza
            .tags
            .iter()
            .find(|t| t.tag == "id")
            .ok_or(OboError::MissingId { line: stanza.line })?;
        let subject: EntityId =
            strip_qualifiers(&id_line.value)
                .parse()
                .map_err(|_| OboError::MalformedLine {
                    line: id_line.line,
                    text: format!("id: {}", id_line.value),
                })?;
        let target = if is_term {
            &mut classes
        } else {
            &mut relations
        };
        let fresh = !target.contains_key(&subject);
        let ann = target.entry(subject.clone()).or_default();
        if !fresh {
            warnings.push(
                stanza.line,
                format!("{subject} declared more than once; stanzas merged"),
            );
        }
        let mut intersection = Vec::new();
        let mut intersection_line = stanza.line;

        for tag in &stanza.tags {
            let line = tag.line;
            let value = tag.value.as_str();
            match tag.tag.as_str() {
                "id" => {
                    if tag.line != id_line.line {
                        warnings.push(line, "additional id line ignored");
                    }
                }
                "name" => {
                    if !value.is_empty() {
                        if ann.name.is_none() {
                            ann.name = Some(value.to_string());
                        } else if ann.name.as_deref() != Some(value) {
                            warnings.push(line, "additional name ignored");
                        }
                    }
                }
                "def" => {
                    let text = match read_quoted(value) {
                        Some((text, _, closed)) => {
                            if !closed {
                                warnings.push(line, "unterminated quoted definition");
                            }
                            text
                        }
                        None => value.to_string(),
                    };
                    if ann.definition.is_none() && !text.is_empty() {
                        ann.definition = Some(text);
                    }
                }
                "synonym" | "exact_synonym" | "broad_synonym" | "narrow_synonym"
                | "related_synonym" => {
                    let default = match tag.tag.as_str() {
                        "exact_synonym" => SynonymScope::Exact,
                        "broad_synonym" => SynonymScope::Broad,
                        "narrow_synonym" => SynonymScope::Narrow,
                        _ => SynonymScope::Related,
                    };
                    match parse_synonym(value, default) {
                        Some(s) if !s.text.is_empty() => {
                            ann.push_synonym(s);
                        }
                        Some(_) => {}
                        None => warnings.push(line, "synonym without quoted text skipped"),
                    }
                }
                "alt_id" => {
                    if let Some(alt) = parse_ref(value, line, &mut warnings) {
                        ann.push_alt_id(alt);
                    }
                }
                "is_obsolete" => ann.is_obsolete = value.trim() == "true",
                "is_a" | "relationship" | "intersection_of" | "disjoint_from" | "equivalent_to"
                    if !is_term =>
                {
                    *warnings
                        .ignored_tags
                        .entry(format!("Typedef {}", tag.tag))
                        .or_default() += 1;
                }
                "is_a" => {
                    if let Some(sup) = parse_ref(value, line, &mut warnings) {
                        axioms.push(Axiom::sub_class(subject.clone(), sup));
                    }
                }
                "relationship" => {
                    if let Some((r, f)) = parse_ref_pair(value, line, &mut warnings) {
                        axioms.push(Axiom::sub_some(subject.clone(), r, f));
                    }
                }
                "intersection_of" => {
                    intersection_line = line;
                    let v = strip_qualifiers(value);
                    if v.split_whitespace().count() == 1 {
                        if let Some(c) = parse_ref(v, line, &mut warnings) {
                            intersection.push(ClassExpr::Named(c));
                        }
                    } else if let Some((r, f)) = parse_ref_pair(v, line, &mut warnings) {
                        intersection.push(ClassExpr::some(r, f));
                    }
                }
                "disjoint_from" => {
                    if let Some(other) = parse_ref(value, line, &mut warnings) {
                        axioms.push(Axiom::disjoint(subject.clone(), other));
                    }
                }
                "equivalent_to" => {
                    if let Some(other) = parse_ref(value, line, &mut warnings) {
                        axioms.push(Axiom::equivalent(subject.clone(), other));
                    }
                }
                other => *warnings.ignored_tags.entry(other.to_string()).or_default() += 1,
            }
        }

        if !intersection.is_empty() {
            match Axiom::intersection(subject.clone(), intersection) {
                Ok(a) => axioms.push(a),
                Err(_) => {
                    return Err(OboError::DanglingIntersection {
                        id: subject,
                        line: intersection_line,
                    })
                }
            }
        }
    }

    let (ontology, auto) = Ontology::assemble(id, classes, relations, axioms);
    for e in auto {
        warnings.list.push(format!(
            "{e} referenced but not declared; declared with no annotations"
        ));
    }
    Ok(ParsedObo {
        ontology,
        warnings: warnings.finish(),
        document,
    })
}

/// Parses raw bytes, replacing invalid UTF-8 sequences.
pub fn parse_obo_bytes(id: OntologyId, bytes: &[u8]) -> Result<ParsedObo, OboError> {
    let text = String::from_utf8_lossy(bytes);
    let lossy = matches!(text, std::borrow::Cow::Owned(_));
    let mut parsed = parse_obo(id, &text)?;
    if lossy {
        parsed
            .warnings
            .insert(0, "invalid UTF-8 sequences replaced".to_string());
    }
    Ok(parsed)
}

/// Writes `o` as OBO text. Output is deterministic: classes then relations,
/// each sorted by identifier, with a fixed tag order.
pub fn serialize_obo(o: &Ontology) -> String {
    serialize_with_header(o, &[])
}

/// Like [`serialize_obo`], adding `(tag, value)` lines to the header after
/// the standard ones.
pub fn serialize_with_header(o: &Ontology, extra_header: &[(String, String)]) -> String {
    let mut out = String::new();
    out.push_str("format-version: 1.2\n");
    let _ = writeln!(
        out,
        "auto-generated-by: ontomod {}",
        env!("CARGO_PKG_VERSION")
    );
    let _ = writeln!(out, "ontology: {}", o.id());
    for (tag, value) in extra_header {
        let _ = writeln!(out, "{tag}: {value}");
    }

    let mut by_subject: BTreeMap<&EntityId, Vec<&Axiom>> = BTreeMap::new();
    for a in o.axioms() {
        by_subject.entry(a.subject()).or_default().push(a);
    }

    let mut written: BTreeSet<&EntityId> = BTreeSet::new();
    for (kind, map) in [("Term", o.classes()), ("Typedef", o.relations())] {
        for (id, ann) in map {
            written.insert(id);
            out.push('\n');
            write_stanza(&mut out, kind, id, Some(ann), by_subject.get(id));
        }
    }
    // axioms whose subject is undeclared cannot occur in an assembled
    // ontology, but keep them rather than silently dropping
    for (id, axioms) in &by_subject {
        if !written.contains(id) {
            out.push('\n');
            write_stanza(&mut out, "Term", id, None, Some(axioms));
        }
    }
    out
}

fn write_stanza(
    out: &mut String,
    kind: &str,
    id: &EntityId,
    ann: Option<&Annotations>,
    axioms: Option<&Vec<&Axiom>>,
) {
    let _ = writeln!(out, "[{kind}]");
    let _ = writeln!(out, "id: {id}");
    if let Some(ann) = ann {
        if let Some(name) = &ann.name {
            let _ = writeln!(out, "name: {name}");
        }
        if let Some(def) = &ann.definition {
            let _ = writeln!(out, "def: {} []", escape_quoted(def));
        }
        for s in ann.synonyms() {
            let _ = writeln!(
                out,
                "synonym: {} {} []",
                escape_quoted(&s.text),
                s.scope.as_str()
            );
        }
        for alt in ann.alt_ids() {
            let _ = writeln!(out, "alt_id: {alt}");
        }
    }
    let axioms: &[&Axiom] = axioms.map(Vec::as_slice).unwrap_or(&[]);
    for a in axioms {
        if let Axiom::SubClassOf {
            sup: ClassExpr::Named(sup),
            ..
        } = a
        {
            let _ = writeln!(out, "is_a: {sup}");
        }
    }
    for a in axioms {
        if let Axiom::EquivalentToIntersection { conjuncts, .. } = a {
            for c in conjuncts {
                match c {
                    ClassExpr::Named(n) => {
                        let _ = writeln!(out, "intersection_of: {n}");
                    }
                    ClassExpr::Some { relation, filler } => {
                        let _ = writeln!(out, "intersection_of: {relation} {filler}");
                    }
                    ClassExpr::And(_) => {}
                }
            }
        }
    }
    for a in axioms {
        if let Axiom::SubClassOf {
            sup: ClassExpr::Some { relation, filler },
            ..
        } = a
        {
            let _ = writeln!(out, "relationship: {relation} {filler}");
        }
    }
    for a in axioms {
        if let Axiom::Disjoint(_, b) = a {
            let _ = writeln!(out, "disjoint_from: {b}");
        }
    }
    for a in axioms {
        if let Axiom::Equivalent(_, b) = a {
            let _ = writeln!(out, "equivalent_to: {b}");
        }
    }
    if ann.is_some_and(|a| a.is_obsolete) {
        out.push_str("is_obsolete: true\n");
    }
}

/// Serializes a module under its source ontology id.
pub fn serialize_module(m: &Module) -> String {
    serialize_obo(&m.to_ontology())
}

/// `<seedLabel>_from_<ontologyId>.obo`
pub fn module_file_name(seed_label: &str, ontology: &OntologyId) -> String {
    format!("{seed_label}_from_{ontology}.obo")
}

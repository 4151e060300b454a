//! Immutable ontology model shared by every pipeline stage.
//!
//! Entities are addressed by [`EntityId`] (`prefix:local`). Logical content is
//! normalized into the four [`Axiom`] forms the OBO subset can express, so two
//! axioms are equal exactly when their canonical forms are.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Identifier of an entity, canonically written `prefix:local`.
///
/// Identifiers without a colon (common for OBO relations such as `part_of`)
/// have an empty prefix and print as the bare local part.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EntityId {
    prefix: String,
    local: String,
}

impl EntityId {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Self {
        Self {
            prefix: prefix.into(),
            local: local.into(),
        }
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn local(&self) -> &str {
        &self.local
    }

    /// Parses an identifier, panicking on invalid input. Intended for
    /// literals in tests and fixtures.
    pub fn of(text: &str) -> Self {
        text.parse()
            .unwrap_or_else(|e| panic!("invalid entity id {text:?}: {e}"))
    }
}

impl FromStr for EntityId {
    type Err = ModelError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        if text.is_empty() {
            return Err(ModelError::InvalidEntityId(text.to_string()));
        }
        if text
            .chars()
            .any(|c| c.is_whitespace() || c == '(' || c == ')')
        {
            return Err(ModelError::InvalidEntityId(text.to_string()));
        }
        match text.split_once(':') {
            Some((prefix, local)) if !prefix.is_empty() => Ok(Self::new(prefix, local)),
            _ => Ok(Self::new("", text)),
        }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.is_empty() {
            f.write_str(&self.local)
        } else {
            write!(f, "{}:{}", self.prefix, self.local)
        }
    }
}

impl TryFrom<String> for EntityId {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<EntityId> for String {
    fn from(value: EntityId) -> Self {
        value.to_string()
    }
}

/// Short name of a source ontology, e.g. `pathway`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OntologyId(String);

impl OntologyId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OntologyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for OntologyId {
    fn from(value: &str) -> Self {
        Self::new(value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SynonymScope {
    Exact,
    Broad,
    Narrow,
    Related,
}

impl SynonymScope {
    pub fn as_str(self) -> &'static str {
        match self {
            SynonymScope::Exact => "EXACT",
            SynonymScope::Broad => "BROAD",
            SynonymScope::Narrow => "NARROW",
            SynonymScope::Related => "RELATED",
        }
    }

    pub fn from_keyword(keyword: &str) -> Option<Self> {
        match keyword {
            "EXACT" => Some(SynonymScope::Exact),
            "BROAD" => Some(SynonymScope::Broad),
            "NARROW" => Some(SynonymScope::Narrow),
            "RELATED" => Some(SynonymScope::Related),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Synonym {
    pub text: String,
    pub scope: SynonymScope,
}

impl Synonym {
    pub fn new(text: impl Into<String>, scope: SynonymScope) -> Self {
        Self {
            text: text.into(),
            scope,
        }
    }
}

/// Non-logical information attached to an entity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotations {
    pub name: Option<String>,
    pub definition: Option<String>,
    synonyms: Vec<Synonym>,
    alt_ids: Vec<EntityId>,
    pub is_obsolete: bool,
}

impl Annotations {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: Some(name.into()),
            ..Self::default()
        }
    }

    pub fn with_synonym(mut self, text: impl Into<String>, scope: SynonymScope) -> Self {
        self.push_synonym(Synonym::new(text, scope));
        self
    }

    pub fn with_definition(mut self, def: impl Into<String>) -> Self {
        self.definition = Some(def.into());
        self
    }

    pub fn obsolete(mut self) -> Self {
        self.is_obsolete = true;
        self
    }

    /// Appends a synonym unless the same (text, scope) is already present.
    pub fn push_synonym(&mut self, synonym: Synonym) -> bool {
        if self.synonyms.contains(&synonym) {
            return false;
        }
        self.synonyms.push(synonym);
        true
    }

    pub fn push_alt_id(&mut self, id: EntityId) -> bool {
        if self.alt_ids.contains(&id) {
            return false;
        }
        self.alt_ids.push(id);
        true
    }

    pub fn synonyms(&self) -> &[Synonym] {
        &self.synonyms
    }

    pub fn alt_ids(&self) -> &[EntityId] {
        &self.alt_ids
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Class expression of the supported grammar: a named class, an existential
/// restriction over a named filler, or a conjunction of those.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassExpr {
    Named(EntityId),
    Some {
        relation: EntityId,
        filler: EntityId,
    },
    And(Vec<ClassExpr>),
}

impl ClassExpr {
    pub fn named(id: EntityId) -> Self {
        ClassExpr::Named(id)
    }

    pub fn some(relation: EntityId, filler: EntityId) -> Self {
        ClassExpr::Some { relation, filler }
    }

    /// Builds a canonical conjunction: nested conjunctions are flattened,
    /// conjuncts sorted and deduplicated. Fewer than two distinct conjuncts
    /// is an error.
    pub fn and(conjuncts: impl IntoIterator<Item = ClassExpr>) -> Result<Self, ModelError> {
        let mut flat = BTreeSet::new();
        for c in conjuncts {
            match c.canonical() {
                ClassExpr::And(inner) => flat.extend(inner),
                other => {
                    flat.insert(other);
                }
            }
        }
        if flat.len() < 2 {
            return Err(ModelError::TooFewConjuncts(flat.len()));
        }
        Ok(ClassExpr::And(flat.into_iter().collect()))
    }

    pub fn canonical(&self) -> Self {
        match self {
            ClassExpr::And(cs) => {
                let mut flat = BTreeSet::new();
                for c in cs {
                    match c.canonical() {
                        ClassExpr::And(inner) => flat.extend(inner),
                        other => {
                            flat.insert(other);
                        }
                    }
                }
                if flat.len() == 1 {
                    flat.into_iter().next().unwrap()
                } else {
                    ClassExpr::And(flat.into_iter().collect())
                }
            }
            other => other.clone(),
        }
    }

    pub fn collect_signature(&self, into: &mut Signature) {
        match self {
            ClassExpr::Named(e) => {
                into.insert(e.clone());
            }
            ClassExpr::Some { relation, filler } => {
                into.insert(relation.clone());
                into.insert(filler.clone());
            }
            ClassExpr::And(cs) => cs.iter().for_each(|c| c.collect_signature(into)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ClassExpr::Named(_) => 0,
            ClassExpr::Some { .. } => 1,
            ClassExpr::And(cs) => 1 + cs.iter().map(ClassExpr::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassExpr::Named(e) => write!(f, "{e}"),
            ClassExpr::Some { relation, filler } => {
                write!(f, "ObjectSomeValuesFrom({relation} {filler})")
            }
            ClassExpr::And(cs) => {
                f.write_str("ObjectIntersectionOf(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Normalized logical statement.
///
/// The derived ordering is the canonical axiom order used wherever
/// deterministic output matters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    SubClassOf {
        sub: EntityId,
        sup: ClassExpr,
    },
    /// `lhs ≡ conjunct_1 ⊓ … ⊓ conjunct_n`, n ≥ 2, conjuncts sorted.
    EquivalentToIntersection {
        lhs: EntityId,
        conjuncts: Vec<ClassExpr>,
    },
    /// Stored with the smaller identifier first.
    Disjoint(EntityId, EntityId),
    /// Stored with the smaller identifier first.
    Equivalent(EntityId, EntityId),
}

impl Axiom {
    pub fn sub_class(sub: EntityId, sup: EntityId) -> Self {
        Axiom::SubClassOf {
            sub,
            sup: ClassExpr::Named(sup),
        }
    }

    pub fn sub_some(sub: EntityId, relation: EntityId, filler: EntityId) -> Self {
        Axiom::SubClassOf {
            sub,
            sup: ClassExpr::some(relation, filler),
        }
    }

    pub fn intersection(
        lhs: EntityId,
        conjuncts: impl IntoIterator<Item = ClassExpr>,
    ) -> Result<Self, ModelError> {
        match ClassExpr::and(conjuncts)? {
            ClassExpr::And(conjuncts) => Ok(Axiom::EquivalentToIntersection { lhs, conjuncts }),
            _ => unreachable!("ClassExpr::and always yields a conjunction"),
        }
    }

    pub fn disjoint(a: EntityId, b: EntityId) -> Self {
        if a <= b {
            Axiom::Disjoint(a, b)
        } else {
            Axiom::Disjoint(b, a)
        }
    }

    /// Equivalence between two named classes. Both sides equal is a
    /// tautology and still representable.
    pub fn equivalent(a: EntityId, b: EntityId) -> Self {
        if a <= b {
            Axiom::Equivalent(a, b)
        } else {
            Axiom::Equivalent(b, a)
        }
    }

    pub fn canonical(&self) -> Self {
        match self {
            Axiom::SubClassOf { sub, sup } => Axiom::SubClassOf {
                sub: sub.clone(),
                sup: sup.canonical(),
            },
            Axiom::EquivalentToIntersection { lhs, conjuncts } => {
                match ClassExpr::And(conjuncts.clone()).canonical() {
                    ClassExpr::And(conjuncts) => Axiom::EquivalentToIntersection {
                        lhs: lhs.clone(),
                        conjuncts,
                    },
                    // degenerate single conjunct; keep as written
                    _ => self.clone(),
                }
            }
            Axiom::Disjoint(a, b) => Axiom::disjoint(a.clone(), b.clone()),
            Axiom::Equivalent(a, b) => Axiom::equivalent(a.clone(), b.clone()),
        }
    }

    /// Every entity occurring in the axiom, relations included.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        self.collect_signature(&mut sig);
        sig
    }

    pub fn collect_signature(&self, into: &mut Signature) {
        match self {
            Axiom::SubClassOf { sub, sup } => {
                into.insert(sub.clone());
                sup.collect_signature(into);
            }
            Axiom::EquivalentToIntersection { lhs, conjuncts } => {
                into.insert(lhs.clone());
                conjuncts.iter().for_each(|c| c.collect_signature(into));
            }
            Axiom::Disjoint(a, b) | Axiom::Equivalent(a, b) => {
                into.insert(a.clone());
                into.insert(b.clone());
            }
        }
    }

    /// The entity whose OBO stanza carries this axiom.
    pub fn subject(&self) -> &EntityId {
        match self {
            Axiom::SubClassOf { sub, .. } => sub,
            Axiom::EquivalentToIntersection { lhs, .. } => lhs,
            Axiom::Disjoint(a, _) | Axiom::Equivalent(a, _) => a,
        }
    }

    /// Entities used in relation position.
    pub fn relations(&self) -> Vec<&EntityId> {
        fn walk<'a>(c: &'a ClassExpr, out: &mut Vec<&'a EntityId>) {
            match c {
                ClassExpr::Named(_) => {}
                ClassExpr::Some { relation, .. } => out.push(relation),
                ClassExpr::And(cs) => cs.iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        match self {
            Axiom::SubClassOf { sup, .. } => walk(sup, &mut out),
            Axiom::EquivalentToIntersection { conjuncts, .. } => {
                conjuncts.iter().for_each(|c| walk(c, &mut out))
            }
            _ => {}
        }
        out
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::SubClassOf { sub, sup } => write!(f, "SubClassOf({sub} {sup})"),
            Axiom::EquivalentToIntersection { lhs, conjuncts } => {
                write!(
                    f,
                    "EquivalentClasses({lhs} {})",
                    ClassExpr::And(conjuncts.clone())
                )
            }
            Axiom::Disjoint(a, b) => write!(f, "DisjointClasses({a} {b})"),
            Axiom::Equivalent(a, b) => write!(f, "EquivalentClasses({a} {b})"),
        }
    }
}

impl FromStr for Axiom {
    type Err = ModelError;

    /// Parses the functional-style text produced by `Display`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let axiom = parse_axiom(&tokens, &mut pos)
            .ok_or_else(|| ModelError::MalformedAxiom(text.to_string()))?;
        if pos != tokens.len() {
            return Err(ModelError::MalformedAxiom(text.to_string()));
        }
        Ok(axiom)
    }
}

fn tokenize(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(&text[s..i]);
            }
            if !c.is_whitespace() {
                tokens.push(&text[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(&text[s..]);
    }
    tokens
}

fn expect(tokens: &[&str], pos: &mut usize, want: &str) -> Option<()> {
    (tokens.get(*pos)? == &want).then(|| *pos += 1)
}

fn parse_id(tokens: &[&str], pos: &mut usize) -> Option<EntityId> {
    let tok = tokens.get(*pos)?;
    if *tok == "(" || *tok == ")" {
        return None;
    }
    *pos += 1;
    tok.parse().ok()
}

fn parse_expr(tokens: &[&str], pos: &mut usize) -> Option<ClassExpr> {
    match *tokens.get(*pos)? {
        "ObjectSomeValuesFrom" => {
            *pos += 1;
            expect(tokens, pos, "(")?;
            let relation = parse_id(tokens, pos)?;
            let filler = parse_id(tokens, pos)?;
            expect(tokens, pos, ")")?;
            Some(ClassExpr::some(relation, filler))
        }
        "ObjectIntersectionOf" => {
            *pos += 1;
            expect(tokens, pos, "(")?;
            let mut cs = Vec::new();
            while tokens.get(*pos)? != &")" {
                cs.push(parse_expr(tokens, pos)?);
            }
            *pos += 1;
            ClassExpr::and(cs).ok()
        }
        _ => parse_id(tokens, pos).map(ClassExpr::Named),
    }
}

fn parse_axiom(tokens: &[&str], pos: &mut usize) -> Option<Axiom> {
    let head = *tokens.get(*pos)?;
    *pos += 1;
    expect(tokens, pos, "(")?;
    let axiom = match head {
        "SubClassOf" => {
            let sub = parse_id(tokens, pos)?;
            let sup = parse_expr(tokens, pos)?;
            Axiom::SubClassOf { sub, sup }
        }
        "DisjointClasses" => {
            let a = parse_id(tokens, pos)?;
            let b = parse_id(tokens, pos)?;
            Axiom::disjoint(a, b)
        }
        "EquivalentClasses" => {
            let a = parse_id(tokens, pos)?;
            match parse_expr(tokens, pos)? {
                ClassExpr::Named(b) => Axiom::equivalent(a, b),
                ClassExpr::And(conjuncts) => Axiom::EquivalentToIntersection { lhs: a, conjuncts },
                ClassExpr::Some { .. } => return None,
            }
        }
        _ => return None,
    };
    expect(tokens, pos, ")")?;
    Some(axiom)
}

/// A set of entity identifiers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature(BTreeSet<EntityId>);

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: EntityId) -> bool {
        self.0.insert(id)
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.0.contains(id)
    }

    pub fn extend_from(&mut self, other: &Signature) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn union(&self, other: &Signature) -> Signature {
        Signature(self.0.union(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &Signature) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EntityId> {
        self.0.iter()
    }
}

impl FromIterator<EntityId> for Signature {
    fn from_iter<T: IntoIterator<Item = EntityId>>(iter: T) -> Self {
        Signature(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Signature {
    type Item = &'a EntityId;
    type IntoIter = std::collections::btree_set::Iter<'a, EntityId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Lowercase strings driving signature matching.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TermSet(BTreeSet<String>);

impl TermSet {
    /// Builds a term set, folding every term to ASCII lowercase. Empty terms
    /// are rejected.
    pub fn new<I, S>(terms: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = TermSet::default();
        for t in terms {
            if !set.insert(t.as_ref()) && t.as_ref().trim().is_empty() {
                return Err(ModelError::EmptyTerm);
            }
        }
        Ok(set)
    }

    /// Inserts the lowercase, trimmed form of `term`; returns false when the
    /// term was empty or already present.
    pub fn insert(&mut self, term: &str) -> bool {
        let folded = term.trim().to_ascii_lowercase();
        if folded.is_empty() {
            return false;
        }
        self.0.insert(folded)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn is_subset(&self, other: &TermSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Class,
    Relation,
}

/// A parsed source ontology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ontology {
    id: OntologyId,
    classes: BTreeMap<EntityId, Annotations>,
    relations: BTreeMap<EntityId, Annotations>,
    axioms: Vec<Axiom>,
}

impl Ontology {
    /// Assembles an ontology, canonicalizing and deduplicating axioms.
    /// Entities referenced by axioms but not declared are declared with empty
    /// annotations (as relations when used in relation position, otherwise as
    /// classes); their identifiers are returned alongside.
    pub fn assemble(
        id: OntologyId,
        mut classes: BTreeMap<EntityId, Annotations>,
        mut relations: BTreeMap<EntityId, Annotations>,
        axioms: impl IntoIterator<Item = Axiom>,
    ) -> (Self, Vec<EntityId>) {
        let axioms: BTreeSet<Axiom> = axioms.into_iter().map(|a| a.canonical()).collect();
        let mut auto = Vec::new();
        for axiom in &axioms {
            let rels: BTreeSet<&EntityId> = axiom.relations().into_iter().collect();
            for e in axiom.signature().iter() {
                if classes.contains_key(e) || relations.contains_key(e) {
                    continue;
                }
                if rels.contains(e) {
                    relations.insert(e.clone(), Annotations::default());
                } else {
                    classes.insert(e.clone(), Annotations::default());
                }
                auto.push(e.clone());
            }
        }
        auto.sort();
        let ontology = Ontology {
            id,
            classes,
            relations,
            axioms: axioms.into_iter().collect(),
        };
        (ontology, auto)
    }

    /// Convenience constructor: classes declared with the given names, plus
    /// auto-declared axiom entities.
    pub fn from_axioms(
        id: impl Into<OntologyId>,
        classes: impl IntoIterator<Item = (EntityId, Annotations)>,
        axioms: impl IntoIterator<Item = Axiom>,
    ) -> Self {
        Self::assemble(
            id.into(),
            classes.into_iter().collect(),
            BTreeMap::new(),
            axioms,
        )
        .0
    }

    pub fn empty(id: impl Into<OntologyId>) -> Self {
        Self::from_axioms(id, [], [])
    }

    pub fn id(&self) -> &OntologyId {
        &self.id
    }

    pub fn classes(&self) -> &BTreeMap<EntityId, Annotations> {
        &self.classes
    }

    pub fn relations(&self) -> &BTreeMap<EntityId, Annotations> {
        &self.relations
    }

    /// Axioms in canonical order, duplicate-free.
    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn kind_of(&self, id: &EntityId) -> Option<EntityKind> {
        if self.classes.contains_key(id) {
            Some(EntityKind::Class)
        } else if self.relations.contains_key(id) {
            Some(EntityKind::Relation)
        } else {
            None
        }
    }

    pub fn annotations(&self, id: &EntityId) -> Option<&Annotations> {
        self.classes.get(id).or_else(|| self.relations.get(id))
    }

    pub fn is_declared(&self, id: &EntityId) -> bool {
        self.kind_of(id).is_some()
    }

    /// Same content under another identifier.
    pub fn with_id(mut self, id: OntologyId) -> Self {
        self.id = id;
        self
    }
}

impl From<String> for OntologyId {
    fn from(value: String) -> Self {
        Self(value)
    }
}

/// A subset of one ontology's axioms together with the annotations of every
/// entity in its signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Module {
    source: OntologyId,
    seed_signature: Signature,
    axioms: Vec<Axiom>,
    classes: BTreeMap<EntityId, Annotations>,
    relations: BTreeMap<EntityId, Annotations>,
}

impl Module {
    /// Builds a module over `source`, carrying annotations for every entity
    /// of `sig(axioms) ∪ seed` that the ontology declares. Axioms are stored
    /// in canonical order.
    pub fn from_source(source: &Ontology, seed_signature: Signature, axioms: Vec<Axiom>) -> Self {
        let mut axioms: Vec<Axiom> = axioms.into_iter().map(|a| a.canonical()).collect();
        axioms.sort();
        axioms.dedup();
        let mut sig = seed_signature.clone();
        axioms.iter().for_each(|a| a.collect_signature(&mut sig));
        let mut classes = BTreeMap::new();
        let mut relations = BTreeMap::new();
        for e in sig.iter() {
            if let Some(ann) = source.classes().get(e) {
                classes.insert(e.clone(), ann.clone());
            } else if let Some(ann) = source.relations().get(e) {
                relations.insert(e.clone(), ann.clone());
            }
        }
        Module {
            source: source.id().clone(),
            seed_signature,
            axioms,
            classes,
            relations,
        }
    }

    /// Reinterprets a parsed module document as a module: every declared
    /// entity is carried and the seed signature is the set of declared
    /// classes that no axiom mentions.
    pub fn from_ontology(o: &Ontology) -> Self {
        let mut axiom_sig = Signature::new();
        o.axioms()
            .iter()
            .for_each(|a| a.collect_signature(&mut axiom_sig));
        let seed = o
            .classes()
            .keys()
            .filter(|e| !axiom_sig.contains(e))
            .cloned()
            .collect();
        Module {
            source: o.id().clone(),
            seed_signature: seed,
            axioms: o.axioms().to_vec(),
            classes: o.classes().clone(),
            relations: o.relations().clone(),
        }
    }

    pub fn source(&self) -> &OntologyId {
        &self.source
    }

    pub fn seed_signature(&self) -> &Signature {
        &self.seed_signature
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn classes(&self) -> &BTreeMap<EntityId, Annotations> {
        &self.classes
    }

    pub fn relations(&self) -> &BTreeMap<EntityId, Annotations> {
        &self.relations
    }

    /// Carried annotations for classes and relations alike.
    pub fn carried_annotations(&self) -> impl Iterator<Item = (&EntityId, &Annotations)> {
        self.classes.iter().chain(self.relations.iter())
    }

    /// `Sig(M)`: the union of all axiom signatures and the seed signature.
    pub fn signature(&self) -> Signature {
        let mut sig = self.seed_signature.clone();
        self.axioms
            .iter()
            .for_each(|a| a.collect_signature(&mut sig));
        sig
    }

    /// The module as a standalone ontology named after its source.
    pub fn to_ontology(&self) -> Ontology {
        Ontology::assemble(
            self.source.clone(),
            self.classes.clone(),
            self.relations.clone(),
            self.axioms.iter().cloned(),
        )
        .0
    }
}

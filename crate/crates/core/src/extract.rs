//! Syntactic ⊥-locality module extraction and the cross-ontology
//! enriched-signature fixpoint.
//!
//! An axiom is ⊥-local w.r.t. Σ when replacing every class and relation
//! outside Σ by the empty concept/relation turns it into a tautology. The
//! ⊥-module for a seed is the least set of axioms closed under "add every
//! axiom that is not local w.r.t. seed ∪ sig(module)".

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::ExtractError;
use crate::matching::{match_terms, MatchMode};
use crate::model::{Axiom, ClassExpr, EntityId, Module, Ontology, OntologyId, Signature, TermSet};

fn is_bot(expr: &ClassExpr, sigma: &Signature) -> bool {
    match expr {
        ClassExpr::Named(e) => !sigma.contains(e),
        ClassExpr::Some { relation, filler } => {
            !sigma.contains(relation) || !sigma.contains(filler)
        }
        ClassExpr::And(cs) => cs.iter().any(|c| is_bot(c, sigma)),
    }
}

/// No expression of the supported grammar is equivalent to ⊤ under the
/// ⊥-substitution, so only the ⊥ side is ever tested.
pub fn is_bot_local(a: &Axiom, sigma: &Signature) -> bool {
    match a {
        Axiom::SubClassOf { sub, .. } => !sigma.contains(sub),
        Axiom::EquivalentToIntersection { lhs, conjuncts } => {
            !sigma.contains(lhs) && conjuncts.iter().any(|c| is_bot(c, sigma))
        }
        Axiom::Disjoint(a, b) => !sigma.contains(a) || !sigma.contains(b),
        Axiom::Equivalent(a, b) => !sigma.contains(a) && !sigma.contains(b),
    }
}

/// Extracts the ⊥-module of `o` for `seed`. Seed entities not declared by
/// `o` are dropped.
pub fn extract_module(o: &Ontology, seed: &Signature) -> Module {
    let mut index: BTreeMap<&EntityId, Vec<usize>> = BTreeMap::new();
    let signatures: Vec<Signature> = o.axioms().iter().map(Axiom::signature).collect();
    for (i, sig) in signatures.iter().enumerate() {
        for e in sig {
            index.entry(e).or_default().push(i);
        }
    }

    let seed: Signature = seed.iter().filter(|e| o.is_declared(e)).cloned().collect();
    let mut sigma = seed.clone();
    let mut pending: VecDeque<EntityId> = seed.iter().cloned().collect();
    let mut selected = vec![false; o.axioms().len()];

    // An axiom can only become non-local when one of its own symbols enters
    // Σ, so it is enough to revisit the axioms of each newly added symbol.
    while let Some(e) = pending.pop_front() {
        let Some(candidates) = index.get(&e) else {
            continue;
        };
        for &i in candidates {
            if selected[i] || is_bot_local(&o.axioms()[i], &sigma) {
                continue;
            }
            selected[i] = true;
            for s in &signatures[i] {
                if sigma.insert(s.clone()) {
                    pending.push_back(s.clone());
                }
            }
        }
    }

    let axioms = o
        .axioms()
        .iter()
        .zip(&selected)
        .filter(|(_, keep)| **keep)
        .map(|(a, _)| a.clone())
        .collect();
    Module::from_source(o, seed, axioms)
}

/// Which strings of a module's classes enter the term set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnrichFields {
    pub id: bool,
    pub name: bool,
    pub synonym: bool,
}

impl Default for EnrichFields {
    fn default() -> Self {
        Self {
            id: true,
            name: true,
            synonym: false,
        }
    }
}

impl FromStr for EnrichFields {
    type Err = String;

    /// Comma-separated subset of `id`, `name`, `synonym`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut fields = EnrichFields {
            id: false,
            name: false,
            synonym: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "id" => fields.id = true,
                "name" => fields.name = true,
                "synonym" => fields.synonym = true,
                other => return Err(format!("unknown enrich field {other:?}")),
            }
        }
        if fields
            == (EnrichFields {
                id: false,
                name: false,
                synonym: false,
            })
        {
            return Err("no enrich fields given".into());
        }
        Ok(fields)
    }
}

impl fmt::Display for EnrichFields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [
            (self.id, "id"),
            (self.name, "name"),
            (self.synonym, "synonym"),
        ]
        .into_iter()
        .filter_map(|(on, n)| on.then_some(n))
        .collect();
        f.write_str(&parts.join(","))
    }
}

/// `T ∪ Sig(M)`, where each class symbol of the module contributes its
/// lowercase identifier and name (and synonyms when enabled).
pub fn enrich_terms(t: &TermSet, m: &Module, fields: EnrichFields) -> TermSet {
    let mut out = t.clone();
    for e in m.signature().iter() {
        let Some(ann) = m.classes().get(e) else {
            continue;
        };
        if fields.id {
            out.insert(&e.to_string());
        }
        if fields.name {
            if let Some(n) = &ann.name {
                out.insert(n);
            }
        }
        if fields.synonym {
            for s in ann.synonyms() {
                out.insert(&s.text);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct FixpointOptions {
    pub max_rounds: usize,
    pub match_mode: MatchMode,
    pub enrich_fields: EnrichFields,
}

impl Default for FixpointOptions {
    fn default() -> Self {
        Self {
            max_rounds: 32,
            match_mode: MatchMode::Substring,
            enrich_fields: EnrichFields::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub ontology: OntologyId,
    /// Size of the term set used to match this ontology.
    pub term_count: usize,
    pub signature_size: usize,
    pub axiom_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRound {
    pub index: usize,
    pub entries: Vec<TraceEntry>,
    /// `∪_k Sig(M_k)` at the end of the round.
    pub union_signature: Signature,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FixpointTrace {
    pub rounds: Vec<TraceRound>,
}

impl FixpointTrace {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("round\tontology\tterm_count\tsignature_size\taxiom_count\n");
        for r in &self.rounds {
            for e in &r.entries {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    r.index, e.ontology, e.term_count, e.signature_size, e.axiom_count
                ));
            }
        }
        out
    }

    /// Per-ontology signature sizes never shrink from one round to the next.
    pub fn is_monotone(&self) -> bool {
        self.rounds.windows(2).all(|w| {
            w[0].entries
                .iter()
                .zip(&w[1].entries)
                .all(|(a, b)| a.ontology == b.ontology && a.signature_size <= b.signature_size)
        })
    }
}

#[derive(Clone, Debug)]
pub struct FixpointOutcome {
    /// One module per input ontology, in input order.
    pub modules: Vec<Module>,
    pub trace: FixpointTrace,
    /// The enriched term set after the last round.
    pub terms: TermSet,
}

/// Iterates matching, extraction and term enrichment over all ontologies
/// until a complete round leaves every module signature unchanged.
///
/// Within a round ontologies are processed in the given order and the term
/// set is enriched after each extraction, so later ontologies see the
/// symbols of earlier modules in the same round. The first round can never
/// be the last: the second one verifies stability.
pub fn run_fixpoint(
    ontologies: &[Ontology],
    seeds: &TermSet,
    opts: &FixpointOptions,
) -> Result<FixpointOutcome, ExtractError> {
    if ontologies.is_empty() {
        return Err(ExtractError::NoOntologies);
    }
    let mut terms = seeds.clone();
    let mut previous: Vec<Option<Signature>> = vec![None; ontologies.len()];
    let mut trace = FixpointTrace::default();

    for round in 1..=opts.max_rounds {
        let mut changed = false;
        let mut modules = Vec::with_capacity(ontologies.len());
        let mut entries = Vec::with_capacity(ontologies.len());
        let mut union_signature = Signature::new();
        for (k, o) in ontologies.iter().enumerate() {
            let term_count = terms.len();
            let mut seed = match_terms(o, &terms, opts.match_mode)?.matched;
            if let Some(prev) = &previous[k] {
                seed.extend_from(prev);
            }
            let module = extract_module(o, &seed);
            terms = enrich_terms(&terms, &module, opts.enrich_fields);
            let sig = module.signature();
            if previous[k].as_ref() != Some(&sig) {
                changed = true;
            }
            entries.push(TraceEntry {
                ontology: o.id().clone(),
                term_count,
                signature_size: sig.len(),
                axiom_count: module.axioms().len(),
            });
            union_signature.extend_from(&sig);
            previous[k] = Some(sig);
            modules.push(module);
        }
        trace.rounds.push(TraceRound {
            index: round,
            entries,
            union_signature,
        });
        if !changed {
            return Ok(FixpointOutcome {
                modules,
                trace,
                terms,
            });
        }
    }
    Err(ExtractError::MaxRoundsExceeded {
        max_rounds: opts.max_rounds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditRow {
    pub ontology: OntologyId,
    pub forward_axioms: usize,
    pub reverse_axioms: usize,
    pub identical: bool,
}

/// Comparison of fixpoint results for the configured ontology order and its
/// reverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderAudit {
    pub rows: Vec<AuditRow>,
    pub union_signature_equal: bool,
}

impl OrderAudit {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("ontology\tforward_axioms\treverse_axioms\tidentical\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                r.ontology, r.forward_axioms, r.reverse_axioms, r.identical
            ));
        }
        out.push_str(&format!(
            "# union signature equal: {}\n",
            self.union_signature_equal
        ));
        out
    }
}

pub fn order_audit(
    ontologies: &[Ontology],
    seeds: &TermSet,
    opts: &FixpointOptions,
) -> Result<OrderAudit, ExtractError> {
    let forward = run_fixpoint(ontologies, seeds, opts)?;
    let reversed: Vec<Ontology> = ontologies.iter().rev().cloned().collect();
    let backward = run_fixpoint(&reversed, seeds, opts)?;
    let union = |o: &FixpointOutcome| {
        let mut s = Signature::new();
        o.modules.iter().for_each(|m| s.extend_from(&m.signature()));
        s
    };
    let rows = forward
        .modules
        .iter()
        .map(|f| {
            let b = backward
                .modules
                .iter()
                .find(|b| b.source() == f.source())
                .expect("same ontologies in both runs");
            AuditRow {
                ontology: f.source().clone(),
                forward_axioms: f.axioms().len(),
                reverse_axioms: b.axioms().len(),
                identical: f == b,
            }
        })
        .collect();
    Ok(OrderAudit {
        rows,
        union_signature_equal: union(&forward) == union(&backward),
    })
}

//! Told-clash detection over merged ontologies.
//!
//! A class is reported unsatisfiable when its told subsumers (through
//! `SubClassOf` edges, the named conjuncts of defined classes and
//! equivalence groups) include both sides of a disjointness axiom. This is
//! told-clash detection only: existential restrictions never propagate
//! unsatisfiability and no completeness w.r.t. OWL-DL is claimed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{ModelError, SatError};
use crate::integrate::{MergedAxiom, MergedOntology, PairMerge, Provenance};
use crate::model::{Axiom, ClassExpr, EntityId, OntologyId};

pub const REPORT_HEADER: &str = "# told-clash detection only";

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index wins so that representatives are deterministic
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Named told-subsumption edges `sub → sup` contributed by one axiom.
fn named_edges(a: &Axiom) -> Vec<(&EntityId, &EntityId)> {
    match a {
        Axiom::SubClassOf {
            sub,
            sup: ClassExpr::Named(sup),
        } => vec![(sub, sup)],
        Axiom::SubClassOf {
            sub,
            sup: ClassExpr::And(cs),
        }
        | Axiom::EquivalentToIntersection {
            lhs: sub,
            conjuncts: cs,
        } => cs
            .iter()
            .filter_map(|c| match c {
                ClassExpr::Named(n) => Some((sub, n)),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Equivalence groups, reflexive-transitive told subsumers and disjoint
/// pairs, all over group representatives (the smallest member of a group).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToldClosure {
    pub representative: BTreeMap<EntityId, EntityId>,
    pub groups: BTreeMap<EntityId, Vec<EntityId>>,
    pub subsumers: BTreeMap<EntityId, BTreeSet<EntityId>>,
    pub disjoint_pairs: BTreeSet<(EntityId, EntityId)>,
}

impl ToldClosure {
    pub fn rep<'a>(&'a self, e: &'a EntityId) -> &'a EntityId {
        self.representative.get(e).unwrap_or(e)
    }

    /// Reflexive-transitive told subsumers of `e`'s representative.
    pub fn subsumers_of(&self, e: &EntityId) -> Option<&BTreeSet<EntityId>> {
        self.subsumers.get(self.rep(e))
    }
}

/// Every class-position entity of the merge: declared classes plus axiom
/// symbols outside relation position.
fn class_universe(m: &MergedOntology) -> BTreeSet<EntityId> {
    let mut all: BTreeSet<EntityId> = m.classes.keys().cloned().collect();
    for ma in &m.axioms {
        let rels: BTreeSet<&EntityId> = ma.axiom.relations().into_iter().collect();
        for e in ma.axiom.signature().iter() {
            if !rels.contains(e) {
                all.insert(e.clone());
            }
        }
    }
    all
}

pub fn build_closure(m: &MergedOntology) -> ToldClosure {
    let entities: Vec<EntityId> = class_universe(m).into_iter().collect();
    let index: BTreeMap<&EntityId, usize> =
        entities.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut uf = UnionFind::new(entities.len());
    for ma in &m.axioms {
        if let Axiom::Equivalent(a, b) = &ma.axiom {
            uf.union(index[a], index[b]);
        }
    }
    // indices follow sorted order, so each root is its group's smallest member
    let rep_idx: Vec<usize> = (0..entities.len()).map(|i| uf.find(i)).collect();

    let mut edges: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for ma in &m.axioms {
        for (sub, sup) in named_edges(&ma.axiom) {
            let (s, t) = (rep_idx[index[sub]], rep_idx[index[sup]]);
            if s != t {
                edges.entry(s).or_default().insert(t);
            }
        }
    }

    let mut representative = BTreeMap::new();
    let mut groups: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
    for (i, e) in entities.iter().enumerate() {
        let r = entities[rep_idx[i]].clone();
        representative.insert(e.clone(), r.clone());
        groups.entry(r).or_default().push(e.clone());
    }

    let mut subsumers = BTreeMap::new();
    for r in groups.keys() {
        let start = index[r];
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in edges.get(&x).into_iter().flatten() {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        subsumers.insert(
            r.clone(),
            seen.into_iter().map(|i| entities[i].clone()).collect(),
        );
    }

    let mut disjoint_pairs = BTreeSet::new();
    for ma in &m.axioms {
        if let Axiom::Disjoint(a, b) = &ma.axiom {
            let (ra, rb) = (
                entities[rep_idx[index[a]]].clone(),
                entities[rep_idx[index[b]]].clone(),
            );
            disjoint_pairs.insert(if ra <= rb { (ra, rb) } else { (rb, ra) });
        }
    }

    ToldClosure {
        representative,
        groups,
        subsumers,
        disjoint_pairs,
    }
}

/// An unsatisfiable class and the disjointness axiom (as written) that it
/// violates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Unsat {
    pub class: EntityId,
    pub witness: (EntityId, EntityId),
}

/// Disjointness axioms both of whose sides subsume `class`, in canonical
/// order.
fn witnesses<'a>(
    m: &'a MergedOntology,
    closure: &ToldClosure,
    class: &EntityId,
) -> Vec<&'a MergedAxiom> {
    let Some(subs) = closure.subsumers_of(class) else {
        return Vec::new();
    };
    m.axioms
        .iter()
        .filter(|ma| match &ma.axiom {
            Axiom::Disjoint(a, b) => subs.contains(closure.rep(a)) && subs.contains(closure.rep(b)),
            _ => false,
        })
        .collect()
}

pub fn find_unsat(m: &MergedOntology) -> Vec<Unsat> {
    let closure = build_closure(m);
    let mut out = Vec::new();
    for members in closure.groups.values() {
        let Some(first) = witnesses(m, &closure, &members[0]).into_iter().next() else {
            continue;
        };
        let Axiom::Disjoint(a, b) = &first.axiom else {
            unreachable!()
        };
        for c in members {
            out.push(Unsat {
                class: c.clone(),
                witness: (a.clone(), b.clone()),
            });
        }
    }
    out.sort();
    out
}

/// A minimal set of merged axioms from which the clash of `clash_class`
/// with `witness` follows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub clash_class: EntityId,
    pub witness: (EntityId, EntityId),
    /// Sorted canonically.
    pub axioms: Vec<MergedAxiom>,
}

impl Explanation {
    pub fn axiom_set(&self) -> BTreeSet<&Axiom> {
        self.axioms.iter().map(|m| &m.axiom).collect()
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ExplanationJson<'a> {
    clash_class: String,
    witness: [String; 2],
    axioms: Vec<AxiomJson<'a>>,
}

#[derive(Serialize)]
struct AxiomJson<'a> {
    axiom: String,
    provenance: &'a BTreeSet<Provenance>,
}

pub fn explanations_json(explanations: &[Explanation]) -> String {
    let docs: Vec<ExplanationJson> = explanations
        .iter()
        .map(|x| ExplanationJson {
            clash_class: x.clash_class.to_string(),
            witness: [x.witness.0.to_string(), x.witness.1.to_string()],
            axioms: x
                .axioms
                .iter()
                .map(|m| AxiomJson {
                    axiom: m.axiom.to_string(),
                    provenance: &m.provenance,
                })
                .collect(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&docs).expect("explanations always serialize");
    s.push('\n');
    s
}

/// Told-subsumption graph over original entities, edges labeled with the
/// index of the axiom that licenses them. Equivalences run both ways.
struct AxiomGraph<'a> {
    edges: BTreeMap<&'a EntityId, Vec<(&'a EntityId, usize)>>,
}

impl<'a> AxiomGraph<'a> {
    fn new(axioms: &'a [MergedAxiom]) -> Self {
        let mut edges: BTreeMap<&EntityId, Vec<(&EntityId, usize)>> = BTreeMap::new();
        for (i, ma) in axioms.iter().enumerate() {
            if let Axiom::Equivalent(a, b) = &ma.axiom {
                edges.entry(a).or_default().push((b, i));
                edges.entry(b).or_default().push((a, i));
            }
            for (s, t) in named_edges(&ma.axiom) {
                edges.entry(s).or_default().push((t, i));
            }
        }
        Self { edges }
    }

    /// Axiom indices along a shortest path from `from` to `to` using only
    /// axioms accepted by `allowed`, or `None` when unreachable.
    fn path(
        &self,
        from: &'a EntityId,
        to: &EntityId,
        allowed: &dyn Fn(usize) -> bool,
    ) -> Option<Vec<usize>> {
        let mut parent: BTreeMap<&EntityId, (&EntityId, usize)> = BTreeMap::new();
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                let mut path = Vec::new();
                let mut cur = x;
                while let Some(&(prev, ax)) = parent.get(cur) {
                    path.push(ax);
                    cur = prev;
                }
                return Some(path);
            }
            for &(y, ax) in self.edges.get(x).into_iter().flatten() {
                if allowed(ax) && seen.insert(y) {
                    parent.insert(y, (x, ax));
                    queue.push_back(y);
                }
            }
        }
        None
    }
}

/// One minimal explanation per disjointness axiom violated by `clash`.
///
/// Each starts from the union of shortest paths to both disjoint classes
/// plus the disjointness axiom, then drops axioms in canonical order while
/// the clash remains derivable.
pub fn explain(m: &MergedOntology, clash: &EntityId) -> Result<Vec<Explanation>, SatError> {
    let closure = build_closure(m);
    let found = witnesses(m, &closure, clash);
    if found.is_empty() {
        return Err(SatError::NotAClash(clash.clone()));
    }
    let graph = AxiomGraph::new(&m.axioms);
    let index_of: BTreeMap<&Axiom, usize> = m
        .axioms
        .iter()
        .enumerate()
        .map(|(i, ma)| (&ma.axiom, i))
        .collect();

    let mut out: Vec<Explanation> = Vec::new();
    for d in found {
        let Axiom::Disjoint(a, b) = &d.axiom else {
            unreachable!()
        };
        let d_idx = index_of[&d.axiom];
        let derivable = |set: &BTreeSet<usize>| {
            let allowed = |i: usize| set.contains(&i);
            set.contains(&d_idx)
                && graph.path(clash, a, &allowed).is_some()
                && graph.path(clash, b, &allowed).is_some()
        };
        let all = |_: usize| true;
        let mut set: BTreeSet<usize> = BTreeSet::from([d_idx]);
        set.extend(graph.path(clash, a, &all).expect("witness is reachable"));
        set.extend(graph.path(clash, b, &all).expect("witness is reachable"));

        // m.axioms is sorted, so index order is canonical axiom order
        for i in set.clone() {
            set.remove(&i);
            if !derivable(&set) {
                set.insert(i);
            }
        }
        let explanation = Explanation {
            clash_class: clash.clone(),
            witness: (a.clone(), b.clone()),
            axioms: set.into_iter().map(|i| m.axioms[i].clone()).collect(),
        };
        if !out.iter().any(|x| x.axioms == explanation.axioms) {
            out.push(explanation);
        }
    }
    Ok(out)
}

/// Whether `axioms` alone make `class` unsatisfiable.
pub fn entails_clash(axioms: &[MergedAxiom], class: &EntityId) -> bool {
    let mut sorted = axioms.to_vec();
    sorted.sort();
    let m = MergedOntology {
        id: OntologyId::new("probe"),
        classes: BTreeMap::new(),
        relations: BTreeMap::new(),
        axioms: sorted,
        conflicts: Vec::new(),
    };
    find_unsat(&m).iter().any(|u| &u.class == class)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub axiom: Axiom,
    pub rationale: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RepairPlan {
    pub removals: Vec<Removal>,
}

impl RepairPlan {
    pub fn axioms(&self) -> Vec<Axiom> {
        self.removals.iter().map(|r| r.axiom.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.removals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removals.is_empty()
    }

    /// One `REMOVE <axiom>` line per removal, each preceded by a `#`
    /// rationale comment.
    pub fn to_text(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for r in &self.removals {
            out.push_str(&format!("# {}\nREMOVE {}\n", r.rationale, r.axiom));
        }
        out
    }

    /// Reads the axioms of `REMOVE` lines; comments and blank lines are
    /// skipped.
    pub fn parse_removals(text: &str) -> Result<Vec<Axiom>, ModelError> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| match l.strip_prefix("REMOVE ") {
                Some(rest) => rest.trim().parse(),
                None => Err(ModelError::MalformedAxiom(l.to_string())),
            })
            .collect()
    }
}

/// Bridge axioms first, then disjointness, then everything else.
fn preference(ma: &MergedAxiom) -> (u8, &'static str) {
    if ma.is_bridge() || matches!(ma.axiom, Axiom::Equivalent(..)) {
        (0, "bridge equivalence")
    } else if matches!(ma.axiom, Axiom::Disjoint(..)) {
        (1, "disjointness")
    } else {
        (2, "subsumption")
    }
}

/// Greedy hitting set over the explanations: repeatedly removes the axiom
/// contained in the most unresolved explanations, breaking ties by
/// preference and then canonical axiom order.
pub fn propose_repair(explanations: &[Explanation]) -> Result<RepairPlan, SatError> {
    if explanations.is_empty() {
        return Err(SatError::NoExplanations);
    }
    let mut unresolved: Vec<&Explanation> = explanations.iter().collect();
    let mut plan = RepairPlan::default();
    while !unresolved.is_empty() {
        let mut counts: BTreeMap<&MergedAxiom, usize> = BTreeMap::new();
        for x in &unresolved {
            for ma in &x.axioms {
                *counts.entry(ma).or_default() += 1;
            }
        }
        let (&chosen, &hits) = counts
            .iter()
            .min_by(|(a, ca), (b, cb)| {
                cb.cmp(ca)
                    .then(preference(a).0.cmp(&preference(b).0))
                    .then(a.axiom.cmp(&b.axiom))
            })
            .expect("explanations are never empty");
        plan.removals.push(Removal {
            axiom: chosen.axiom.clone(),
            rationale: format!("{} hitting {hits} explanation(s)", preference(chosen).1),
        });
        unresolved.retain(|x| !x.axioms.iter().any(|ma| ma.axiom == chosen.axiom));
    }
    Ok(plan)
}

/// Every explanation of every unsatisfiable class, deduplicated by axiom
/// set (the first class in canonical order keeps it).
pub fn explain_all(m: &MergedOntology) -> Vec<Explanation> {
    let mut out: Vec<Explanation> = Vec::new();
    let mut seen: BTreeSet<Vec<MergedAxiom>> = BTreeSet::new();
    for u in find_unsat(m) {
        if let Ok(xs) = explain(m, &u.class) {
            for x in xs {
                if seen.insert(x.axioms.clone()) {
                    out.push(x);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct RepairOutcome {
    pub plan: RepairPlan,
    pub repaired: MergedOntology,
    pub iterations: usize,
}

/// Iterates explain → propose → apply until no told clash remains, at most
/// `max_iterations` times. A single iteration suffices unless a clash has
/// several independent derivations.
pub fn repair(m: &MergedOntology, max_iterations: usize) -> Result<RepairOutcome, SatError> {
    let mut current = m.clone();
    let mut plan = RepairPlan::default();
    for iteration in 0..=max_iterations {
        let remaining = find_unsat(&current).len();
        if remaining == 0 {
            return Ok(RepairOutcome {
                plan,
                repaired: current,
                iterations: iteration,
            });
        }
        if iteration == max_iterations {
            return Err(SatError::RepairIncomplete {
                remaining,
                iterations: iteration,
            });
        }
        let step = propose_repair(&explain_all(&current))?;
        current = current.without(&step.axioms());
        plan.removals.extend(step.removals);
    }
    unreachable!("loop returns on its last iteration")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnsatRow {
    pub class: EntityId,
    pub witness: (EntityId, EntityId),
    pub explanations: usize,
}

/// Unsatisfiable classes with their witness and explanation count.
pub fn unsat_report(m: &MergedOntology) -> Vec<UnsatRow> {
    find_unsat(m)
        .into_iter()
        .map(|u| UnsatRow {
            explanations: explain(m, &u.class).map(|x| x.len()).unwrap_or(0),
            class: u.class,
            witness: u.witness,
        })
        .collect()
}

pub fn unsat_report_tsv(rows: &[UnsatRow]) -> String {
    let mut out = format!("{REPORT_HEADER}\nclass\tdisjoint_a\tdisjoint_b\texplanations\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.class, r.witness.0, r.witness.1, r.explanations
        ));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRow {
    pub pair: (OntologyId, OntologyId),
    pub unsat: usize,
}

/// Unsatisfiable-class count of every pairwise merge.
pub fn check_pairs(pairs: &[PairMerge]) -> Vec<PairRow> {
    pairs
        .iter()
        .map(|p| PairRow {
            pair: p.pair.clone(),
            unsat: find_unsat(&p.merged).len(),
        })
        .collect()
}

pub fn pairs_tsv(rows: &[PairRow]) -> String {
    let mut out = format!("{REPORT_HEADER}\nontology_a\tontology_b\tunsatisfiable\n");
    for r in rows {
        out.push_str(&format!("{}\t{}\t{}\n", r.pair.0, r.pair.1, r.unsat));
    }
    out
}

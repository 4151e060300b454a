//! Independent oracles and seeded generators shared by integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ontomod::integrate::{MergedAxiom, MergedOntology, Provenance};
use ontomod::{Annotations, Axiom, ClassExpr, EntityId, Ontology, OntologyId, Signature};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn e(s: &str) -> EntityId {
    EntityId::of(s)
}

/// Textbook full-matrix edit distance.
pub fn oracle_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 0..=a.len() {
        d[i][0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

pub fn oracle_metric(a: &str, b: &str) -> f64 {
    let (a, b) = (a.to_ascii_lowercase(), b.to_ascii_lowercase());
    let n = a.chars().count().max(b.chars().count());
    if n == 0 {
        1.0
    } else {
        1.0 - oracle_distance(&a, &b) as f64 / n as f64
    }
}

pub fn random_string(r: &mut ChaCha8Rng, max_len: usize, alphabet: &[u8]) -> String {
    let n = r.gen_range(0..=max_len);
    (0..n)
        .map(|_| *alphabet.choose(r).unwrap() as char)
        .collect()
}

/// Whether `c` is interpreted as the empty class once every symbol outside
/// `sigma` is.
fn is_empty_under(c: &ClassExpr, sigma: &BTreeSet<EntityId>) -> bool {
    match c {
        ClassExpr::Named(x) => !sigma.contains(x),
        ClassExpr::Some { relation, filler } => {
            !sigma.contains(relation) || !sigma.contains(filler)
        }
        ClassExpr::And(cs) => cs.iter().any(|c| is_empty_under(c, sigma)),
    }
}

/// The axiom is a tautology when out-of-signature symbols are empty.
fn tautology(a: &Axiom, sigma: &BTreeSet<EntityId>) -> bool {
    let named = |x: &EntityId| ClassExpr::Named(x.clone());
    match a {
        Axiom::SubClassOf { sub, .. } => is_empty_under(&named(sub), sigma),
        Axiom::EquivalentToIntersection { lhs, conjuncts } => {
            is_empty_under(&named(lhs), sigma)
                && is_empty_under(&ClassExpr::And(conjuncts.clone()), sigma)
        }
        Axiom::Disjoint(x, y) => {
            is_empty_under(&named(x), sigma) || is_empty_under(&named(y), sigma)
        }
        Axiom::Equivalent(x, y) => {
            is_empty_under(&named(x), sigma) && is_empty_under(&named(y), sigma)
        }
    }
}

/// Module by repeated full rescans until a pass adds nothing.
pub fn naive_module(o: &Ontology, seed: &BTreeSet<EntityId>) -> BTreeSet<Axiom> {
    let mut sigma = seed.clone();
    let mut module = BTreeSet::new();
    loop {
        let mut changed = false;
        for a in o.axioms() {
            if !module.contains(a) && !tautology(a, &sigma) {
                module.insert(a.clone());
                sigma.extend(a.signature().iter().cloned());
                changed = true;
            }
        }
        if !changed {
            return module;
        }
    }
}

const CLASSES: [&str; 8] = ["C:0", "C:1", "C:2", "C:3", "C:4", "C:5", "C:6", "C:7"];
const RELATIONS: [&str; 2] = ["r", "s"];

fn class_expr(r: &mut ChaCha8Rng, classes: &[&str]) -> ClassExpr {
    if r.gen_bool(0.7) {
        ClassExpr::named(e(classes.choose(r).unwrap()))
    } else {
        ClassExpr::some(
            e(RELATIONS.choose(r).unwrap()),
            e(classes.choose(r).unwrap()),
        )
    }
}

/// Random axiom over up to 8 classes and 2 relations, all five shapes.
pub fn random_axiom(r: &mut ChaCha8Rng, classes: &[&str]) -> Axiom {
    let c = |r: &mut ChaCha8Rng| e(classes.choose(r).unwrap());
    loop {
        let a = match r.gen_range(0..5) {
            0 => Axiom::sub_class(c(r), c(r)),
            1 => Axiom::sub_some(c(r), e(RELATIONS.choose(r).unwrap()), c(r)),
            2 => {
                let n = r.gen_range(2..=3);
                let conj: Vec<ClassExpr> = (0..n).map(|_| class_expr(r, classes)).collect();
                match Axiom::intersection(c(r), conj) {
                    Ok(a) => a,
                    Err(_) => continue,
                }
            }
            3 => Axiom::disjoint(c(r), c(r)),
            _ => Axiom::equivalent(c(r), c(r)),
        };
        return a;
    }
}

/// At most `max_axioms` axioms over at most 10 entities.
pub fn random_ontology(r: &mut ChaCha8Rng, max_axioms: usize) -> Ontology {
    let n_classes = r.gen_range(2..=CLASSES.len());
    let classes = &CLASSES[..n_classes];
    let n = r.gen_range(0..=max_axioms);
    let axioms: Vec<Axiom> = (0..n).map(|_| random_axiom(r, classes)).collect();
    let decls = classes.iter().map(|c| (e(c), Annotations::default()));
    Ontology::from_axioms("rand", decls, axioms)
}

/// Random subset of the declared entities.
pub fn random_seed(r: &mut ChaCha8Rng, o: &Ontology) -> BTreeSet<EntityId> {
    let all: Vec<EntityId> = o
        .classes()
        .keys()
        .chain(o.relations().keys())
        .cloned()
        .collect();
    all.into_iter().filter(|_| r.gen_bool(0.3)).collect()
}

pub fn signature(set: &BTreeSet<EntityId>) -> Signature {
    set.iter().cloned().collect()
}

/// Merge with random provenance over only the axiom shapes that matter to
/// told reasoning.
pub fn random_merge(r: &mut ChaCha8Rng, max_axioms: usize) -> MergedOntology {
    let n_classes = r.gen_range(2..=CLASSES.len());
    let classes = &CLASSES[..n_classes];
    let n = r.gen_range(0..=max_axioms);
    let mut axioms: BTreeMap<Axiom, BTreeSet<Provenance>> = BTreeMap::new();
    for _ in 0..n {
        let a = random_axiom(r, classes);
        let p = if matches!(a, Axiom::Equivalent(..)) && r.gen_bool(0.7) {
            Provenance::Bridge
        } else {
            Provenance::Source(OntologyId::new(
                ["m1", "m2", "m3"].choose(r).unwrap().to_string(),
            ))
        };
        axioms.entry(a).or_default().insert(p);
    }
    MergedOntology {
        id: OntologyId::new("rand_merged"),
        classes: classes
            .iter()
            .map(|c| (e(c), Annotations::default()))
            .collect(),
        relations: RELATIONS
            .iter()
            .map(|c| (e(c), Annotations::default()))
            .collect(),
        axioms: axioms
            .into_iter()
            .map(|(axiom, provenance)| MergedAxiom { axiom, provenance })
            .collect(),
        conflicts: Vec::new(),
    }
}

/// Told edges read straight off the axioms: subclass to named superclass,
/// defined class to named conjunct, equivalence both ways.
fn told_edges(axioms: &[&Axiom]) -> Vec<(EntityId, EntityId)> {
    let mut edges = Vec::new();
    for a in axioms {
        match a {
            Axiom::SubClassOf {
                sub,
                sup: ClassExpr::Named(sup),
            } => edges.push((sub.clone(), sup.clone())),
            Axiom::EquivalentToIntersection { lhs, conjuncts } => {
                for c in conjuncts {
                    if let ClassExpr::Named(n) = c {
                        edges.push((lhs.clone(), n.clone()));
                    }
                }
            }
            Axiom::Equivalent(x, y) => {
                edges.push((x.clone(), y.clone()));
                edges.push((y.clone(), x.clone()));
            }
            _ => {}
        }
    }
    edges
}

/// Endpoints of every simple path from `start`, enumerated by DFS.
fn path_endpoints(start: &EntityId, edges: &[(EntityId, EntityId)]) -> BTreeSet<EntityId> {
    fn walk(
        at: &EntityId,
        edges: &[(EntityId, EntityId)],
        on_path: &mut Vec<EntityId>,
        out: &mut BTreeSet<EntityId>,
    ) {
        out.insert(at.clone());
        for (s, t) in edges {
            if s == at && !on_path.contains(t) {
                on_path.push(t.clone());
                walk(t, edges, on_path, out);
                on_path.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(start, edges, &mut vec![start.clone()], &mut out);
    out
}

/// Classes with a told path to both sides of some disjointness axiom.
pub fn oracle_unsat(axioms: &[&Axiom]) -> BTreeSet<EntityId> {
    let edges = told_edges(axioms);
    let mut classes = BTreeSet::new();
    for a in axioms {
        let rels: BTreeSet<&EntityId> = a.relations().into_iter().collect();
        for x in a.signature().iter() {
            if !rels.contains(x) {
                classes.insert(x.clone());
            }
        }
    }
    let disjoint: Vec<(&EntityId, &EntityId)> = axioms
        .iter()
        .filter_map(|a| match a {
            Axiom::Disjoint(x, y) => Some((x, y)),
            _ => None,
        })
        .collect();
    classes
        .into_iter()
        .filter(|c| {
            let reach = path_endpoints(c, &edges);
            disjoint
                .iter()
                .any(|(x, y)| reach.contains(*x) && reach.contains(*y))
        })
        .collect()
}

/// Whether `class` clashes with the witness pair using only `axioms`.
pub fn oracle_clash_with(
    axioms: &[&Axiom],
    class: &EntityId,
    witness: (&EntityId, &EntityId),
) -> bool {
    let has_disjoint = axioms
        .iter()
        .any(|a| **a == Axiom::disjoint(witness.0.clone(), witness.1.clone()));
    let reach = path_endpoints(class, &told_edges(axioms));
    has_disjoint && reach.contains(witness.0) && reach.contains(witness.1)
}

/// Smallest hitting set size by exhaustive search over subsets of the
/// universe.
pub fn min_hitting_set(sets: &[BTreeSet<usize>]) -> usize {
    let universe: Vec<usize> = sets
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(universe.len() <= 20, "exhaustive search only");
    let mut best = universe.len();
    for mask in 0u32..(1 << universe.len()) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let chosen: BTreeSet<usize> = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, x)| *x)
            .collect();
        if sets.iter().all(|s| !s.is_disjoint(&chosen)) {
            best = size;
        }
    }
    best
}

/// Yields every subset of `items` as a vector of references, smallest first.
pub fn subsets<T>(items: &[T]) -> Vec<Vec<&T>> {
    assert!(items.len() <= 16);
    (0u32..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, x)| x)
                .collect()
        })
        .collect()
}

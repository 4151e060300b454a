//! Class alignment between modules with a normalized Levenshtein metric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::AlignError;
use crate::model::{Annotations, EntityId, Module, OntologyId};

/// Slack used when comparing a score with the threshold, so that rational
/// scores such as 19/20 are not lost to floating-point rounding of `1 - d/n`.
pub const SCORE_EPSILON: f64 = 1e-9;

/// Unit-cost insert/delete/substitute distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    distance_chars(&a, &b)
}

fn distance_chars(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(ca != cb);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

fn fold(s: &str) -> Vec<char> {
    s.chars().map(|c| c.to_ascii_lowercase()).collect()
}

fn metric_chars(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - distance_chars(a, b) as f64 / longest as f64
}

/// `1 − d(a, b) / max(|a|, |b|)` on ASCII-lowercased input, in `[0, 1]`.
pub fn lev_metric(a: &str, b: &str) -> f64 {
    metric_chars(&fold(a), &fold(b))
}

/// True when strings of these lengths could still reach `threshold`: the
/// edit distance is at least the length difference.
fn within_band(la: usize, lb: usize, threshold: f64) -> bool {
    let longest = la.max(lb);
    let diff = la.abs_diff(lb);
    diff as f64 <= ((1.0 - threshold) * longest as f64).ceil()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldKind {
    Id,
    Name,
    Synonym,
    Def,
}

impl FieldKind {
    fn as_str(self) -> &'static str {
        match self {
            FieldKind::Id => "ID",
            FieldKind::Name => "NAME",
            FieldKind::Synonym => "SYNONYM",
            FieldKind::Def => "DEF",
        }
    }
}

/// The pair of fields (source side, target side) that produced a score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FieldPair(pub FieldKind, pub FieldKind);

impl fmt::Display for FieldPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.0.as_str(), self.1.as_str())
    }
}

impl FromStr for FieldPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = |k: &str| match k {
            "ID" => Ok(FieldKind::Id),
            "NAME" => Ok(FieldKind::Name),
            "SYNONYM" => Ok(FieldKind::Synonym),
            "DEF" => Ok(FieldKind::Def),
            other => Err(format!("unknown field kind {other:?}")),
        };
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("malformed field pair {s:?}"))?;
        Ok(FieldPair(kind(a)?, kind(b)?))
    }
}

impl TryFrom<String> for FieldPair {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<FieldPair> for String {
    fn from(value: FieldPair) -> Self {
        value.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimilarityOptions {
    pub use_definitions: bool,
}

impl Default for SimilarityOptions {
    fn default() -> Self {
        Self {
            use_definitions: true,
        }
    }
}

/// Lowercased character vectors of one class's comparable fields.
struct Prepared {
    id: Vec<char>,
    name: Option<Vec<char>>,
    synonyms: Vec<Vec<char>>,
    def: Option<Vec<char>>,
}

impl Prepared {
    fn new(id: &EntityId, ann: &Annotations) -> Self {
        Self {
            id: fold(id.local()),
            name: ann.name.as_deref().map(fold),
            synonyms: ann.synonyms().iter().map(|s| fold(&s.text)).collect(),
            def: ann.definition.as_deref().map(fold),
        }
    }
}

/// Best-scoring field pair, visiting pairs in priority order (ID, NAME×NAME,
/// NAME×SYNONYM both ways, SYNONYM×SYNONYM, DEF×DEF) so that ties keep the
/// higher-priority pair. With a threshold, string pairs that provably cannot
/// reach it are skipped; the result is then exact whenever it reaches the
/// threshold.
fn best_pair(
    a: &Prepared,
    b: &Prepared,
    opts: SimilarityOptions,
    threshold: Option<f64>,
) -> Option<(f64, FieldPair)> {
    use FieldKind::*;
    let mut best: Option<(f64, FieldPair)> = None;
    let mut consider = |x: &[char], y: &[char], pair: FieldPair| {
        if let Some(t) = threshold {
            if !within_band(x.len(), y.len(), t) {
                return;
            }
        }
        let score = metric_chars(x, y);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, pair));
        }
    };
    consider(&a.id, &b.id, FieldPair(Id, Id));
    if let (Some(x), Some(y)) = (&a.name, &b.name) {
        consider(x, y, FieldPair(Name, Name));
    }
    if let Some(x) = &a.name {
        for y in &b.synonyms {
            consider(x, y, FieldPair(Name, Synonym));
        }
    }
    if let Some(y) = &b.name {
        for x in &a.synonyms {
            consider(x, y, FieldPair(Synonym, Name));
        }
    }
    for x in &a.synonyms {
        for y in &b.synonyms {
            consider(x, y, FieldPair(Synonym, Synonym));
        }
    }
    if opts.use_definitions {
        if let (Some(x), Some(y)) = (&a.def, &b.def) {
            consider(x, y, FieldPair(Def, Def));
        }
    }
    best
}

/// Maximum metric over the comparable field pairs of two classes.
pub fn class_similarity(
    c1: (&EntityId, &Annotations),
    c2: (&EntityId, &Annotations),
    opts: SimilarityOptions,
) -> (f64, FieldPair) {
    let a = Prepared::new(c1.0, c1.1);
    let b = Prepared::new(c2.0, c2.1);
    best_pair(&a, &b, opts, None).expect("identifiers are always compared")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Mapping {
    pub source_ontology: OntologyId,
    pub source_id: EntityId,
    pub target_ontology: OntologyId,
    pub target_id: EntityId,
    pub score: f64,
    pub field: FieldPair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingSet {
    pub threshold: f64,
    pub mappings: Vec<Mapping>,
}

impl MappingSet {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("mapping sets always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("source_ontology\tsource_id\ttarget_ontology\ttarget_id\tscore\tfield\n");
        for m in &self.mappings {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                m.source_ontology, m.source_id, m.target_ontology, m.target_id, m.score, m.field
            ));
        }
        out
    }
}

pub fn check_threshold(threshold: f64) -> Result<f64, AlignError> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(threshold)
    } else {
        Err(AlignError::InvalidThreshold(threshold))
    }
}

/// Whether `score` clears `threshold` (inclusive, up to [`SCORE_EPSILON`]).
pub fn clears(score: f64, threshold: f64) -> bool {
    score >= threshold - SCORE_EPSILON
}

/// Maps every non-obsolete class of the canonically smaller ontology of each
/// module pair to its best-scoring non-obsolete class in the other module,
/// keeping the mapping when the score clears the threshold. Ties between
/// targets go to the smallest identifier. A class is never mapped to a class
/// with the same identifier.
pub fn compute_mappings(
    modules: &[Module],
    threshold: f64,
    opts: SimilarityOptions,
) -> Result<MappingSet, AlignError> {
    let threshold = check_threshold(threshold)?;
    let mut order: Vec<&Module> = modules.iter().collect();
    order.sort_by(|a, b| a.source().cmp(b.source()));

    let prepared: Vec<Vec<(&EntityId, Prepared)>> = order
        .iter()
        .map(|m| {
            m.classes()
                .iter()
                .filter(|(_, ann)| !ann.is_obsolete)
                .map(|(id, ann)| (id, Prepared::new(id, ann)))
                .collect()
        })
        .collect();

    let mut mappings = Vec::new();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i].source() == order[j].source() {
                continue;
            }
            for (sid, sp) in &prepared[i] {
                let mut best: Option<(f64, FieldPair, &EntityId)> = None;
                for (tid, tp) in &prepared[j] {
                    if sid == tid {
                        continue;
                    }
                    if let Some((score, field)) = best_pair(sp, tp, opts, Some(threshold)) {
                        if best.is_none_or(|(s, _, _)| score > s) {
                            best = Some((score, field, tid));
                        }
                    }
                }
                if let Some((score, field, tid)) = best {
                    if clears(score, threshold) {
                        mappings.push(Mapping {
                            source_ontology: order[i].source().clone(),
                            source_id: (*sid).clone(),
                            target_ontology: order[j].source().clone(),
                            target_id: (*tid).clone(),
                            score,
                            field,
                        });
                    }
                }
            }
        }
    }
    Ok(MappingSet {
        threshold,
        mappings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ontology, Signature, SynonymScope};

    fn e(s: &str) -> EntityId {
        EntityId::of(s)
    }

    /// Full-matrix Wagner–Fischer, independent of the two-row version.
    fn oracle_distance(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
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

    #[test]
    fn metric_examples() {
        assert_eq!(lev_metric("toll", "toll"), 1.0);
        assert_eq!(oracle_distance("kitten", "sitting"), 3);
        assert!((lev_metric("kitten", "sitting") - (1.0 - 3.0 / 7.0)).abs() < 1e-12);
        assert_eq!(lev_metric("TLR4", "tlr4"), 1.0);
        assert_eq!(lev_metric("", ""), 1.0);
        assert_eq!(lev_metric("", "x"), 0.0);
    }

    #[test]
    fn class_similarity_examples() {
        let opts = SimilarityOptions::default();
        let a = Annotations::named("toll-like receptor 4");
        assert_eq!(
            class_similarity((&e("A:1"), &a), (&e("B:77"), &a), opts),
            (1.0, FieldPair(FieldKind::Name, FieldKind::Name))
        );

        let a = Annotations::named("TLR4");
        let b =
            Annotations::named("completely different").with_synonym("TLR4", SynonymScope::Exact);
        assert_eq!(
            class_similarity((&e("A:1"), &a), (&e("B:77"), &b), opts),
            (1.0, FieldPair(FieldKind::Name, FieldKind::Synonym))
        );

        let none = Annotations::default();
        let (score, field) = class_similarity((&e("X:0001"), &none), (&e("Y:0002"), &none), opts);
        assert_eq!(oracle_distance("0001", "0002"), 1);
        assert!((score - 0.75).abs() < 1e-12);
        assert_eq!(field, FieldPair(FieldKind::Id, FieldKind::Id));
    }

    #[test]
    fn ties_prefer_id_then_names() {
        let opts = SimilarityOptions::default();
        let a = Annotations::named("x1");
        let (_, field) = class_similarity((&e("A:7"), &a), (&e("B:7"), &a), opts);
        assert_eq!(field, FieldPair(FieldKind::Id, FieldKind::Id));
    }

    #[test]
    fn definitions_can_be_disabled() {
        let a = Annotations::named("aaaa").with_definition("same long definition");
        let b = Annotations::named("zzzz").with_definition("same long definition");
        let on = class_similarity(
            (&e("A:1"), &a),
            (&e("B:9"), &b),
            SimilarityOptions::default(),
        );
        assert_eq!(on, (1.0, FieldPair(FieldKind::Def, FieldKind::Def)));
        let off = class_similarity(
            (&e("A:1"), &a),
            (&e("B:9"), &b),
            SimilarityOptions {
                use_definitions: false,
            },
        );
        assert!(off.0 < 1.0);
    }

    fn module(id: &str, classes: &[(&str, Annotations)]) -> Module {
        let o = Ontology::from_axioms(id, classes.iter().map(|(c, a)| (e(c), a.clone())), []);
        let seed: Signature = o.classes().keys().cloned().collect();
        Module::from_source(&o, seed, vec![])
    }

    #[test]
    fn identical_labels_map_at_default_threshold() {
        let m1 = module(
            "nci",
            &[("NCI:C1", Annotations::named("Toll-like Receptor 4"))],
        );
        let m2 = module(
            "go",
            &[("GO:0001", Annotations::named("toll-like receptor 4"))],
        );
        let set = compute_mappings(&[m1, m2], 0.95, SimilarityOptions::default()).unwrap();
        assert_eq!(set.mappings.len(), 1);
        let m = &set.mappings[0];
        // go < nci canonically, so go is the source side
        assert_eq!(m.source_ontology.as_str(), "go");
        assert_eq!(m.source_id, e("GO:0001"));
        assert_eq!(m.target_id, e("NCI:C1"));
        assert_eq!(m.score, 1.0);
    }

    #[test]
    fn boundary_scores() {
        // 20 chars, one substitution: exactly 0.95
        let m1 = module("a", &[("A:x", Annotations::named("abcdefghijklmnopqrst"))]);
        let m2 = module("b", &[("B:y", Annotations::named("abcdefghijklmnopqrsX"))]);
        let set = compute_mappings(&[m1, m2], 0.95, SimilarityOptions::default()).unwrap();
        assert_eq!(set.mappings.len(), 1);
        // 50 chars, three substitutions: 0.94
        let base = "a".repeat(50);
        let other = format!("{}bbb", "a".repeat(47));
        let m1 = module("a", &[("A:x", Annotations::named(base))]);
        let m2 = module("b", &[("B:y", Annotations::named(other))]);
        let set = compute_mappings(&[m1, m2], 0.95, SimilarityOptions::default()).unwrap();
        assert!(set.mappings.is_empty());
    }

    #[test]
    fn invalid_thresholds() {
        for t in [0.0, -0.1, 1.01, f64::NAN] {
            assert!(compute_mappings(&[], t, SimilarityOptions::default()).is_err());
        }
    }

    #[test]
    fn ties_go_to_smallest_target() {
        let m1 = module("a", &[("A:1", Annotations::named("receptor"))]);
        let m2 = module(
            "b",
            &[
                ("B:2", Annotations::named("receptor")),
                ("B:1", Annotations::named("receptor")),
            ],
        );
        let set = compute_mappings(&[m2, m1], 0.95, SimilarityOptions::default()).unwrap();
        assert_eq!(set.mappings.len(), 1);
        assert_eq!(set.mappings[0].target_id, e("B:1"));
    }

    #[test]
    fn obsolete_and_same_ontology_are_skipped() {
        let m1 = module("a", &[("A:1", Annotations::named("receptor").obsolete())]);
        let m2 = module("b", &[("B:1", Annotations::named("receptor"))]);
        let m3 = module("b", &[("B:2", Annotations::named("receptor"))]);
        let set = compute_mappings(&[m1, m2, m3], 0.95, SimilarityOptions::default()).unwrap();
        assert!(set.mappings.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let m1 = module("a", &[("A:10", Annotations::named("receptor"))]);
        let m2 = module("b", &[("B:27", Annotations::named("receptor"))]);
        let set = compute_mappings(&[m1, m2], 0.95, SimilarityOptions::default()).unwrap();
        let json = set.to_json();
        assert!(json.contains("\"sourceOntology\": \"a\""));
        assert!(json.contains("\"field\": \"NAME:NAME\""), "{json}");
        assert_eq!(MappingSet::from_json(&json).unwrap(), set);
        assert_eq!(
            set.to_tsv().lines().nth(1),
            Some("a\tA:10\tb\tB:27\t1\tNAME:NAME")
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn label() -> impl Strategy<Value = String> {
            "[abAB]{0,6}"
        }

        fn classes(prefix: &'static str) -> impl Strategy<Value = Vec<(String, Annotations)>> {
            prop::collection::vec(
                (
                    label(),
                    prop::collection::vec(label(), 0..2),
                    prop::option::of(label()),
                ),
                0..8,
            )
            .prop_map(move |v| {
                v.into_iter()
                    .enumerate()
                    .map(|(i, (n, syns, d))| {
                        let mut a = Annotations::named(n);
                        for s in syns {
                            a = a.with_synonym(s, SynonymScope::Exact);
                        }
                        a.definition = d;
                        (format!("{prefix}:{i}"), a)
                    })
                    .collect()
            })
        }

        fn to_module(id: &str, cs: &[(String, Annotations)]) -> Module {
            let cs: Vec<(&str, Annotations)> =
                cs.iter().map(|(i, a)| (i.as_str(), a.clone())).collect();
            module(id, &cs)
        }

        proptest! {
            #[test]
            fn metric_symmetric_and_bounded(a in "[a-cA-C]{0,10}", b in "[a-cA-C]{0,10}") {
                let x = lev_metric(&a, &b);
                prop_assert_eq!(x, lev_metric(&b, &a));
                prop_assert!((0.0..=1.0).contains(&x));
                prop_assert_eq!(x == 1.0, a.eq_ignore_ascii_case(&b));
            }

            #[test]
            fn triangle_inequality(a in "[ab]{0,8}", b in "[ab]{0,8}", c in "[ab]{0,8}") {
                prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
                prop_assert_eq!(edit_distance(&a, &b), oracle_distance(&a, &b));
            }

            #[test]
            fn threshold_monotone_and_partial(
                c1 in classes("A"), c2 in classes("B"), t1 in 0.3f64..1.0, dt in 0.0f64..0.5,
            ) {
                let ms = [to_module("a", &c1), to_module("b", &c2)];
                let t2 = (t1 + dt).min(1.0);
                let low = compute_mappings(&ms, t1, SimilarityOptions::default()).unwrap();
                let high = compute_mappings(&ms, t2, SimilarityOptions::default()).unwrap();
                for m in &high.mappings {
                    prop_assert!(low.mappings.iter().any(|l| l.source_id == m.source_id && l.target_id == m.target_id));
                }
                let mut sources: Vec<_> = low.mappings.iter().map(|m| (&m.source_id, &m.target_ontology)).collect();
                let n = sources.len();
                sources.dedup();
                prop_assert_eq!(n, sources.len());
                for m in &low.mappings {
                    prop_assert!(m.source_ontology < m.target_ontology);
                    prop_assert!(clears(m.score, t1));
                }
            }
        }
    }
}

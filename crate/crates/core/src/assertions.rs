//! Turning selected rules into assertions, then deduplicating, filtering
//! by tag plausibility and adding relations implied by type restrictions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Corpus, Listing, Page};
use crate::error::{Error, Result};
use crate::kg::{KnowledgeGraph, Predicate};
use crate::rules::{build_context, frequency_baseline, resolve_placeholder, ContextPattern, Rule, Target};
use crate::stats::Summary;
use crate::tagger::TagModel;
use crate::text::normalize_title;

/// Default tag filter threshold: at most two tags survive for any type.
pub const DEFAULT_TAU_TAG: f64 = 1.0 / 3.0;

/// Overlap factor between distinct minted ids and real-world entities.
pub const NOVEL_OVERLAP_FACTOR: f64 = 1.07;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Raw,
    DuplicateOfKg,
    FilteredTag,
    Accepted,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Raw => "raw",
            Status::DuplicateOfKg => "duplicate_of_kg",
            Status::FilteredTag => "filtered_tag",
            Status::Accepted => "accepted",
        }
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Status::Raw, Status::DuplicateOfKg, Status::FilteredTag, Status::Accepted]
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown assertion status `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// Index into the rule list the assertions were generated from.
    Rule(usize),
    Baseline,
    Restriction,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Rule(i) => write!(f, "r{i}"),
            Source::Baseline => f.write_str("baseline"),
            Source::Restriction => f.write_str("restriction"),
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Source::Baseline),
            "restriction" => Ok(Source::Restriction),
            _ => s
                .strip_prefix('r')
                .and_then(|n| n.parse().ok())
                .map(Source::Rule)
                .ok_or_else(|| Error::Usage(format!("unknown provenance `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Provenance {
    pub source: Source,
    pub listing_id: String,
}

/// An assertion about a subject entity. The subject is always the listing's
/// subject entity, so the predicate may be an inverse one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub subject: String,
    pub predicate: Predicate,
    pub object: String,
    pub status: Status,
    pub provenance: Vec<Provenance>,
}

impl Assertion {
    pub fn is_type(&self) -> bool {
        self.predicate.is_type()
    }

    /// The triple in forward direction.
    pub fn triple(&self) -> (&str, &str, &str) {
        if self.predicate.is_inverse() {
            (&self.object, self.predicate.base(), &self.subject)
        } else {
            (&self.subject, self.predicate.base(), &self.object)
        }
    }

    fn key(&self) -> (String, String, String) {
        let (s, p, o) = self.triple();
        (s.to_string(), p.to_string(), o.to_string())
    }

    pub fn is_live(&self) -> bool {
        matches!(self.status, Status::Raw | Status::Accepted)
    }
}

/// Diagnostics of a generation run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenerationReport {
    /// Listing and rule pairs skipped because a placeholder resolved to nothing.
    pub unresolved: usize,
    /// Listing and rule pairs whose placeholder resolved to several entities.
    pub multi_resolved: usize,
    pub raw: usize,
}

type Emitted = BTreeMap<(String, Predicate, String), (bool, BTreeSet<Provenance>)>;

fn generate_listing(
    page: &Page,
    listing: &Listing,
    kg: &KnowledgeGraph,
    rules: &[Rule],
    by_pattern: &HashMap<&ContextPattern, Vec<usize>>,
    max_size: usize,
    report: &mut GenerationReport,
) -> Vec<Assertion> {
    let subjects = listing.subject_ids(&page.page_id);
    if subjects.is_empty() {
        return Vec::new();
    }
    let context = build_context(listing, kg);
    let mut matched: Vec<usize> = context
        .subpatterns(max_size)
        .iter()
        .filter_map(|p| by_pattern.get(p))
        .flatten()
        .copied()
        .collect();
    matched.sort_unstable();

    // placeholder-derived facts win over concrete rules for the same triple
    let mut emitted: Emitted = BTreeMap::new();
    for i in matched {
        let rule = &rules[i];
        let (objects, via_placeholder): (Vec<&str>, bool) = match &rule.consequent.target {
            Target::Type(t) | Target::Entity(t) => (vec![t.as_str()], false),
            Target::Placeholder(x) => {
                let resolved = resolve_placeholder(*x, listing, Some(&rule.antecedent), kg);
                if resolved.is_empty() {
                    report.unresolved += 1;
                    continue;
                }
                if resolved.len() > 1 {
                    report.multi_resolved += 1;
                }
                (resolved, true)
            }
        };
        let prov = Provenance {
            source: Source::Rule(i),
            listing_id: listing.listing_id.clone(),
        };
        for s in &subjects {
            for o in &objects {
                let entry = emitted
                    .entry((s.clone(), rule.consequent.predicate.clone(), o.to_string()))
                    .or_default();
                if via_placeholder && !entry.0 {
                    entry.0 = true;
                    entry.1.clear();
                }
                if via_placeholder == entry.0 {
                    entry.1.insert(prov.clone());
                }
            }
        }
    }
    emitted
        .into_iter()
        .map(|((subject, predicate, object), (_, prov))| Assertion {
            subject,
            predicate,
            object,
            status: Status::Raw,
            provenance: prov.into_iter().collect(),
        })
        .collect()
}

/// Applies every rule to every listing it matches, one assertion per subject
/// entity and resolved object.
pub fn generate(corpus: &Corpus, kg: &KnowledgeGraph, rules: &[Rule]) -> (Vec<Assertion>, GenerationReport) {
    let mut by_pattern: HashMap<&ContextPattern, Vec<usize>> = HashMap::new();
    for (i, r) in rules.iter().enumerate() {
        by_pattern.entry(&r.antecedent).or_default().push(i);
    }
    let max_size = rules.iter().map(|r| r.antecedent.len()).max().unwrap_or(0);
    let listings: Vec<_> = corpus.listings().collect();
    let parts: Vec<(Vec<Assertion>, GenerationReport)> = listings
        .par_iter()
        .map(|(page, listing)| {
            let mut report = GenerationReport::default();
            let out = generate_listing(page, listing, kg, rules, &by_pattern, max_size, &mut report);
            (out, report)
        })
        .collect();
    let mut report = GenerationReport::default();
    let mut out = Vec::new();
    for (a, r) in parts {
        report.unresolved += r.unresolved;
        report.multi_resolved += r.multi_resolved;
        out.extend(a);
    }
    report.raw = out.len();
    (out, report)
}

/// Frequency baseline assertions for every listing with enough subjects.
pub fn generate_baseline(corpus: &Corpus, kg: &KnowledgeGraph, tau_freq: f64, min_se: usize) -> Vec<Assertion> {
    let listings: Vec<_> = corpus.listings().collect();
    listings
        .par_iter()
        .flat_map_iter(|(page, listing)| {
            let subjects = listing.subject_ids(&page.page_id);
            let consequents = frequency_baseline(&subjects, kg, tau_freq, min_se);
            let mut out = Vec::new();
            for c in consequents {
                for s in &subjects {
                    out.push(Assertion {
                        subject: s.clone(),
                        predicate: c.predicate.clone(),
                        object: c.object_text().to_string(),
                        status: Status::Raw,
                        provenance: vec![Provenance {
                            source: Source::Baseline,
                            listing_id: listing.listing_id.clone(),
                        }],
                    });
                }
            }
            out
        })
        .collect()
}

/// Collapses identical triples, merging provenance, and marks those already
/// in the graph. Output is sorted by forward triple.
pub fn dedupe_and_subtract(assertions: Vec<Assertion>, kg: &KnowledgeGraph) -> Vec<Assertion> {
    let mut merged: BTreeMap<(String, String, String), Assertion> = BTreeMap::new();
    for a in assertions {
        match merged.entry(a.key()) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let existing = e.get_mut();
                existing.provenance.extend(a.provenance);
                if existing.predicate.is_inverse() && !a.predicate.is_inverse() {
                    existing.subject = a.subject;
                    existing.predicate = a.predicate;
                    existing.object = a.object;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(a);
            }
        }
    }
    merged
        .into_values()
        .map(|mut a| {
            a.provenance.sort();
            a.provenance.dedup();
            a.status = if kg.has_fact(&a.subject, &a.predicate, &a.object) {
                Status::DuplicateOfKg
            } else {
                Status::Raw
            };
            a
        })
        .collect()
}

/// tagprob of an assertion given its subject's tag; `None` when the
/// subject is untagged or the type/domain has no tag distribution.
pub fn assertion_tagprob(a: &Assertion, model: &TagModel, kg: &KnowledgeGraph) -> Option<f64> {
    let tag = model.entity_tag(&a.subject)?;
    if a.is_type() {
        model.tagprob(&a.object, tag)
    } else {
        model.tagprob(&kg.domain_of(&a.predicate)?, tag)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub accepted: usize,
    pub filtered: usize,
    /// Filtered because the subject had no tag.
    pub untagged: usize,
}

/// Marks raw assertions with tagprob at or below `tau_tag` as filtered and
/// accepts the rest.
pub fn tag_filter(
    assertions: Vec<Assertion>,
    model: &TagModel,
    kg: &KnowledgeGraph,
    tau_tag: f64,
) -> (Vec<Assertion>, FilterReport) {
    let mut report = FilterReport::default();
    let out = assertions
        .into_iter()
        .map(|mut a| {
            if a.status != Status::Raw {
                return a;
            }
            if model.entity_tag(&a.subject).is_none() {
                report.untagged += 1;
            }
            match assertion_tagprob(&a, model, kg) {
                Some(p) if p > tau_tag => {
                    a.status = Status::Accepted;
                    report.accepted += 1;
                }
                _ => {
                    a.status = Status::FilteredTag;
                    report.filtered += 1;
                }
            }
            a
        })
        .collect();
    (out, report)
}

/// Adds accepted relation assertions implied by restrictions on the types
/// (and their supertypes) of accepted type assertions. Triples already in
/// the graph or already accepted are not added again.
pub fn infer_from_restrictions(assertions: Vec<Assertion>, kg: &KnowledgeGraph) -> (Vec<Assertion>, usize) {
    let mut implied: BTreeMap<(String, String, String), BTreeSet<Provenance>> = BTreeMap::new();
    for a in assertions.iter().filter(|a| a.status == Status::Accepted && a.is_type()) {
        for ty in kg.ancestors(&a.object) {
            for (p, o) in kg.restrictions_of(&ty) {
                if kg.has_fact(&a.subject, &Predicate::new(p), o) {
                    continue;
                }
                implied
                    .entry((a.subject.clone(), p.to_string(), o.to_string()))
                    .or_default()
                    .extend(a.provenance.iter().map(|pr| Provenance {
                        source: Source::Restriction,
                        listing_id: pr.listing_id.clone(),
                    }));
            }
        }
    }
    let mut by_key: BTreeMap<(String, String, String), Assertion> =
        assertions.into_iter().map(|a| (a.key(), a)).collect();
    let mut added = 0;
    for (key, prov) in implied {
        match by_key.get_mut(&key) {
            Some(existing) if existing.status == Status::Accepted => {}
            Some(existing) => {
                existing.status = Status::Accepted;
                existing.provenance.extend(prov);
                existing.provenance.sort();
                existing.provenance.dedup();
                added += 1;
            }
            None => {
                let (s, p, o) = key.clone();
                by_key.insert(
                    key,
                    Assertion {
                        subject: s,
                        predicate: Predicate::new(p),
                        object: o,
                        status: Status::Accepted,
                        provenance: prov.into_iter().collect(),
                    },
                );
                added += 1;
            }
        }
    }
    (by_key.into_values().collect(), added)
}

/// A subject entity without a counterpart in the graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NovelEntity {
    pub id: String,
    pub surface: String,
    pub page_id: String,
    pub mentions: usize,
}

pub fn novel_entities(corpus: &Corpus, kg: &KnowledgeGraph) -> Vec<NovelEntity> {
    let mut out: BTreeMap<String, NovelEntity> = BTreeMap::new();
    for (page, l) in corpus.listings() {
        for m in l.mentions().filter(|m| m.is_subject.is_yes()) {
            let id = m.subject_id(&page.page_id);
            if kg.contains_entity(&id) {
                continue;
            }
            out.entry(id.clone())
                .or_insert_with(|| NovelEntity {
                    id,
                    surface: m.surface.clone(),
                    page_id: page.page_id.clone(),
                    mentions: 0,
                })
                .mentions += 1;
        }
    }
    out.into_values().collect()
}

/// Normalized surface form to the novel ids carrying it, across pages.
pub fn surface_index(novel: &[NovelEntity]) -> BTreeMap<String, Vec<String>> {
    let mut index: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for n in novel {
        index.entry(normalize_title(&n.surface)).or_default().push(n.id.clone());
    }
    index
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntityReport {
    pub assertions: usize,
    pub subjects: usize,
    pub novel_subjects: usize,
    pub novel_estimate: f64,
    pub per_novel: Option<Summary>,
}

/// Summary over live (raw or accepted) assertions.
pub fn entity_report(assertions: &[Assertion], kg: &KnowledgeGraph) -> EntityReport {
    let mut per_subject: BTreeMap<&str, usize> = BTreeMap::new();
    let mut live = 0;
    for a in assertions.iter().filter(|a| a.is_live()) {
        live += 1;
        *per_subject.entry(&a.subject).or_default() += 1;
    }
    let novel: Vec<usize> = per_subject
        .iter()
        .filter(|(s, _)| !kg.contains_entity(s))
        .map(|(_, &n)| n)
        .collect();
    EntityReport {
        assertions: live,
        subjects: per_subject.len(),
        novel_subjects: novel.len(),
        novel_estimate: novel.len() as f64 / NOVEL_OVERLAP_FACTOR,
        per_novel: Summary::of(&novel),
    }
}

/// One line per provenance entry:
/// `subject, predicate, object, status, rule_id, listing_id`.
pub fn write_assertions(assertions: &[Assertion], mut w: impl Write) -> std::io::Result<()> {
    for a in assertions {
        for p in &a.provenance {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                a.subject,
                a.predicate,
                a.object,
                a.status.name(),
                p.source,
                p.listing_id
            )?;
        }
    }
    Ok(())
}

pub fn read_assertions(reader: impl BufRead) -> Result<Vec<Assertion>> {
    let mut out: Vec<Assertion> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| Error::record(n, "line", e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(Error::record(n, "line", format!("expected 6 fields, found {}", f.len())));
        }
        let status: Status = f[3].parse().map_err(|e: Error| Error::record(n, "status", e.to_string()))?;
        let source: Source = f[4].parse().map_err(|e: Error| Error::record(n, "rule_id", e.to_string()))?;
        let predicate: Predicate = f[1].parse().map_err(|_| Error::record(n, "predicate", "invalid"))?;
        let prov = Provenance {
            source,
            listing_id: f[5].to_string(),
        };
        match out.last_mut() {
            Some(last) if last.subject == f[0] && last.predicate == predicate && last.object == f[2] && last.status == status => {
                last.provenance.push(prov)
            }
            _ => out.push(Assertion {
                subject: f[0].to_string(),
                predicate,
                object: f[2].to_string(),
                status,
                provenance: vec![prov],
            }),
        }
    }
    Ok(out)
}

pub fn write_novel_entities(novel: &[NovelEntity], mut w: impl Write) -> std::io::Result<()> {
    for n in novel {
        writeln!(w, "{}\t{}\t{}", n.id, n.surface, n.page_id)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LinkKind, ListingContext, ListingKind, Mention, Row, SubjectMark};
    use crate::kg::KgBuilder;
    use crate::rules::{Consequent, Placeholder};
    use std::sync::Arc;

    fn gilby_kg() -> KnowledgeGraph {
        let mut b = KgBuilder::new();
        b.subclass("Album", "MusicalWork")
            .triple("Gilby Clarke", "rdf:type", "Person")
            .triple("Guns N' Roses", "rdf:type", "Band")
            .triple("Use Your Illusion I", "rdf:type", "Album")
            .triple("Use Your Illusion I", "artist", "Guns N' Roses");
        b.build()
    }

    fn subject(surface: &str, entity: Option<&str>) -> Mention {
        let mut m = match entity {
            Some(e) => Mention::linked(surface, e, LinkKind::Blue),
            None => Mention::plain(surface),
        };
        m.is_subject = SubjectMark::Yes;
        m
    }

    fn gilby_corpus() -> Corpus {
        let listing = Listing {
            listing_id: "Gilby Clarke::0".into(),
            kind: ListingKind::List,
            rows: vec![
                Row::new(vec![subject("Use Your Illusion I", Some("Use Your Illusion I"))]),
                Row::new(vec![subject("The Spaghetti Incident?", Some("The Spaghetti Incident?"))]),
                Row::new(vec![subject("Swag", None)]),
            ],
            context: ListingContext {
                page_entity: "Gilby Clarke".into(),
                top_section: "discography".into(),
                section: "albums with guns n' roses".into(),
                top_section_entities: vec![],
                section_entities: vec!["Guns N' Roses".into()],
            },
            headers: vec![],
        };
        Corpus {
            pages: vec![Page {
                page_id: "Gilby Clarke".into(),
                title: "Gilby Clarke".into(),
                page_entity: "Gilby Clarke".into(),
                listings: vec![listing],
            }],
            ..Default::default()
        }
    }

    fn rule(pattern: &str, consequent: Consequent) -> Rule {
        Rule {
            antecedent: Arc::new(pattern.parse().unwrap()),
            consequent,
            supp: 3,
            conf: 1.0,
            cons: 1.0,
            hits: 1,
            total: 1,
            covered_listing_ids: Arc::new(vec![]),
        }
    }

    fn section_rule() -> Rule {
        rule(
            "topSection=discography;sectionEntityType=Band",
            Consequent::relation(Predicate::new("artist"), Target::Placeholder(Placeholder::SectionEntity)),
        )
    }

    fn has(out: &[Assertion], s: &str, p: &str, o: &str) -> bool {
        out.iter().any(|a| a.subject == s && a.predicate.to_string() == p && a.object == o)
    }

    #[test]
    fn section_entity_rule_yields_spaghetti_incident() {
        let (out, report) = generate(&gilby_corpus(), &gilby_kg(), &[section_rule()]);
        assert!(has(&out, "The Spaghetti Incident?", "artist", "Guns N' Roses"));
        assert!(has(&out, "Gilby Clarke#swag", "artist", "Guns N' Roses"));
        assert_eq!(report.unresolved, 0);
    }

    #[test]
    fn type_rule_covers_every_subject() {
        let r = rule("topSection=discography", Consequent::has_type("MusicalWork"));
        let (out, _) = generate(&gilby_corpus(), &gilby_kg(), &[r]);
        assert_eq!(out.len(), 3);
        let out = dedupe_and_subtract(out, &gilby_kg());
        let dup: Vec<_> = out.iter().filter(|a| a.status == Status::DuplicateOfKg).collect();
        assert_eq!(dup.len(), 1);
        assert_eq!(dup[0].subject, "Use Your Illusion I");
    }

    #[test]
    fn unresolvable_placeholder_is_counted() {
        let r = rule(
            "topSection=discography",
            Consequent::relation(Predicate::new("artist"), Target::Placeholder(Placeholder::TopSectionEntity)),
        );
        let (out, report) = generate(&gilby_corpus(), &gilby_kg(), &[r]);
        assert!(out.is_empty());
        assert_eq!(report.unresolved, 1);
    }

    #[test]
    fn placeholder_provenance_wins_over_concrete() {
        let concrete = rule(
            "topSection=discography",
            Consequent::relation(Predicate::new("artist"), Target::Entity("Guns N' Roses".into())),
        );
        let (out, _) = generate(&gilby_corpus(), &gilby_kg(), &[concrete, section_rule()]);
        let a = out.iter().find(|a| a.subject == "Gilby Clarke#swag").unwrap();
        assert_eq!(a.provenance.len(), 1);
        assert_eq!(a.provenance[0].source, Source::Rule(1));
    }

    #[test]
    fn duplicates_merge_provenance() {
        let mk = |src| Assertion {
            subject: "a".into(),
            predicate: Predicate::new("p"),
            object: "b".into(),
            status: Status::Raw,
            provenance: vec![Provenance { source: src, listing_id: "l".into() }],
        };
        let inverse = Assertion {
            subject: "b".into(),
            predicate: Predicate::inverse_of("p"),
            object: "a".into(),
            ..mk(Source::Rule(2))
        };
        let out = dedupe_and_subtract(vec![mk(Source::Rule(0)), mk(Source::Rule(1)), inverse], &gilby_kg());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].provenance.len(), 3);
        assert_eq!(out[0].subject, "a");
    }

    #[test]
    fn restriction_inference_is_closed() {
        let mut b = KgBuilder::new();
        b.subclass("Pop_rock_song", "Song")
            .restriction("Pop_rock_song", "genre", "Pop music")
            .triple("Known", "genre", "Pop music")
            .triple("Known", "rdf:type", "Song");
        let kg = b.build();
        let typed = |s: &str| Assertion {
            subject: s.into(),
            predicate: Predicate::rdf_type(),
            object: "Pop_rock_song".into(),
            status: Status::Accepted,
            provenance: vec![Provenance { source: Source::Rule(0), listing_id: "l".into() }],
        };
        let (out, added) = infer_from_restrictions(vec![typed("At My Window"), typed("Known")], &kg);
        assert_eq!(added, 1);
        assert!(has(&out, "At My Window", "genre", "Pop music"));
        assert!(!has(&out, "Known", "genre", "Pop music"));
        let (again, added) = infer_from_restrictions(out.clone(), &kg);
        assert_eq!(added, 0);
        assert_eq!(again, out);
    }

    #[test]
    fn tag_filter_rejects_at_one_third() {
        let tagged = |s: &str, tag: &str| {
            let mut m = subject(s, Some(s));
            m.ne_tag = Some(tag.into());
            Row::new(vec![m])
        };
        let mut corpus = gilby_corpus();
        corpus.pages[0].listings[0].rows = vec![
            tagged("A", "WORK_OF_ART"),
            tagged("B", "WORK_OF_ART"),
            tagged("C", "PERSON"),
            tagged("New", "PERSON"),
            Row::new(vec![subject("Untagged", Some("Untagged"))]),
        ];
        let mut b = KgBuilder::new();
        for s in ["A", "B", "C"] {
            b.triple(s, "rdf:type", "Album");
        }
        let kg = b.build();
        let model = crate::tagger::build_tagprob(&corpus, &kg);
        assert_eq!(model.tagprob("Album", "PERSON"), Some(1.0 / 3.0));

        let typed = |s: &str, status| Assertion {
            subject: s.into(),
            predicate: Predicate::rdf_type(),
            object: "Album".into(),
            status,
            provenance: vec![],
        };
        let input = vec![
            typed("New", Status::Raw),
            typed("Untagged", Status::Raw),
            typed("Other", Status::DuplicateOfKg),
            typed("B", Status::Raw),
        ];
        let (out, report) = tag_filter(input, &model, &kg, DEFAULT_TAU_TAG);
        let statuses: Vec<Status> = out.iter().map(|a| a.status).collect();
        assert_eq!(
            statuses,
            [Status::FilteredTag, Status::FilteredTag, Status::DuplicateOfKg, Status::Accepted]
        );
        assert_eq!(report, FilterReport { accepted: 1, filtered: 2, untagged: 1 });
    }

    #[test]
    fn entity_report_counts() {
        let kg = gilby_kg();
        assert_eq!(entity_report(&[], &kg), EntityReport::default());
        let a = |s: &str, i: usize| Assertion {
            subject: s.into(),
            predicate: Predicate::new("p"),
            object: format!("o{i}"),
            status: Status::Accepted,
            provenance: vec![],
        };
        let list: Vec<_> = (0..12).map(|i| a("p#new", i)).chain([a("Gilby Clarke", 0)]).collect();
        let r = entity_report(&list, &kg);
        assert_eq!((r.subjects, r.novel_subjects), (2, 1));
        assert_eq!(r.per_novel.unwrap().mean, 12.0);
        let many: Vec<_> = (0..214).map(|i| a(&format!("p#{i}"), 0)).collect();
        assert!((entity_report(&many, &kg).novel_estimate - 200.0).abs() < 1e-9);
    }

    #[test]
    fn file_round_trip() {
        let (out, _) = generate(&gilby_corpus(), &gilby_kg(), &[section_rule()]);
        let out = dedupe_and_subtract(out, &gilby_kg());
        let mut buf = Vec::new();
        write_assertions(&out, &mut buf).unwrap();
        assert_eq!(read_assertions(buf.as_slice()).unwrap(), out);
    }

    #[test]
    fn novel_ids_are_page_scoped() {
        let novel = novel_entities(&gilby_corpus(), &gilby_kg());
        let ids: Vec<_> = novel.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, vec!["Gilby Clarke#swag", "The Spaghetti Incident?"]);
        assert_eq!(surface_index(&novel)["swag"], vec!["Gilby Clarke#swag"]);
    }
}

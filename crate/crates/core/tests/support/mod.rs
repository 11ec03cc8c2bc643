#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use listing_rules::corpus::{Corpus, LinkKind, Listing, ListingContext, ListingKind, Mention, Page, Row, SubjectMark};
use listing_rules::kg::{KgBuilder, KnowledgeGraph, Predicate};
use listing_rules::rules::{Atom, Consequent, ContextPattern, Placeholder, Slot, Target};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

const LEAVES: [&str; 4] = ["A1", "A2", "B1", "C"];
const PREDICATES: [&str; 2] = ["r", "s"];
const TOP_SECTIONS: [&str; 3] = ["", "works", "career"];
const SECTIONS: [&str; 3] = ["", "albums", "films"];

fn entity(i: usize) -> String {
    format!("E{i}")
}

/// A small random corpus over a random graph. Subjects are often related to
/// their page or section entities so placeholder rules show up.
pub fn random_world(seed: u64, n_listings: usize) -> (Corpus, KnowledgeGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_entities = 150;
    let mut kg = KgBuilder::new();
    kg.subclass("A1", "A").subclass("A2", "A").subclass("B1", "B");
    kg.subclass("A", "Root").subclass("B", "Root");
    for i in 0..n_entities {
        if rng.gen_bool(0.85) {
            kg.triple(&entity(i), "rdf:type", LEAVES.choose(&mut rng).unwrap());
        }
        for _ in 0..rng.gen_range(0..=1) {
            let o = entity(rng.gen_range(0..n_entities));
            kg.triple(&entity(i), PREDICATES.choose(&mut rng).unwrap(), &o);
        }
    }
    let n_pages = (n_listings / 4).max(1);
    let mut pages: Vec<Page> = (0..n_pages)
        .map(|k| {
            let page_entity = if rng.gen_bool(0.9) {
                entity(rng.gen_range(0..n_entities))
            } else {
                String::new()
            };
            Page {
                page_id: format!("P{k}"),
                title: format!("P{k}"),
                page_entity,
                listings: Vec::new(),
            }
        })
        .collect();
    for n in 0..n_listings {
        let k = rng.gen_range(0..n_pages);
        let page_entity = pages[k].page_entity.clone();
        let pick = |rng: &mut ChaCha8Rng, max: usize| -> Vec<String> {
            let n = rng.gen_range(0..=max);
            (0..n).map(|_| entity(rng.gen_range(0..n_entities))).collect()
        };
        let context = ListingContext {
            page_entity: page_entity.clone(),
            top_section: TOP_SECTIONS.choose(&mut rng).unwrap().to_string(),
            section: SECTIONS.choose(&mut rng).unwrap().to_string(),
            top_section_entities: pick(&mut rng, 1),
            section_entities: pick(&mut rng, 1),
        };
        let mut rows = Vec::new();
        for j in 0..rng.gen_range(2..=4) {
            let mut m = if rng.gen_bool(0.8) {
                let e = entity(rng.gen_range(0..n_entities));
                let anchors: Vec<&String> = std::iter::once(&page_entity)
                    .chain(&context.section_entities)
                    .chain(&context.top_section_entities)
                    .filter(|a| !a.is_empty())
                    .collect();
                if !anchors.is_empty() && rng.gen_bool(0.25) {
                    kg.triple(&e, PREDICATES.choose(&mut rng).unwrap(), anchors.choose(&mut rng).unwrap());
                }
                Mention::linked(e.clone(), e, LinkKind::Blue)
            } else {
                Mention::plain(format!("novel {j}"))
            };
            m.is_subject = if rng.gen_bool(0.9) { SubjectMark::Yes } else { SubjectMark::No };
            rows.push(Row::new(vec![m]));
        }
        pages[k].listings.push(Listing {
            listing_id: format!("L{n}"),
            kind: ListingKind::List,
            rows,
            context,
            headers: Vec::new(),
        });
    }
    let (corpus, _) = Corpus::from_pages(pages).expect("unique listing ids");
    (corpus, kg.build())
}

/// Metrics of one rule computed straight from the definitions.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRule {
    pub supp: usize,
    pub conf: f64,
    pub cons: f64,
}

fn slot_values(listing: &Listing, kg: &KnowledgeGraph) -> Vec<(Slot, Vec<String>)> {
    let types = |entities: &[String]| -> Vec<String> {
        let mut out = BTreeSet::new();
        for e in entities {
            if let Some(ts) = kg.types_of(e) {
                out.extend(ts.iter().cloned());
            }
        }
        out.into_iter().collect()
    };
    let ctx = &listing.context;
    let page: Vec<String> = if ctx.page_entity.is_empty() { vec![] } else { vec![ctx.page_entity.clone()] };
    let text = |s: &str| if s.is_empty() { vec![] } else { vec![s.to_string()] };
    vec![
        (Slot::PageEntityType, types(&page)),
        (Slot::TopSection, text(&ctx.top_section)),
        (Slot::Section, text(&ctx.section)),
        (Slot::TopSectionEntityType, types(&ctx.top_section_entities)),
        (Slot::SectionEntityType, types(&ctx.section_entities)),
    ]
}

fn patterns_of(values: &[(Slot, Vec<String>)], max_size: usize) -> Vec<ContextPattern> {
    let mut partial: Vec<Vec<Atom>> = vec![vec![]];
    for (slot, vals) in values {
        let mut next = partial.clone();
        for p in &partial {
            if p.len() == max_size {
                continue;
            }
            for v in vals {
                let mut q = p.clone();
                q.push(Atom::new(*slot, v.clone()));
                next.push(q);
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .filter(|p| !p.is_empty())
        .map(|p| ContextPattern::new(p).unwrap())
        .collect()
}

fn resolve(x: Placeholder, listing: &Listing, pattern: &ContextPattern, kg: &KnowledgeGraph) -> BTreeSet<String> {
    let ctx = &listing.context;
    let (entities, slot) = match x {
        Placeholder::PageEntity => {
            return std::iter::once(ctx.page_entity.clone()).filter(|e| !e.is_empty()).collect()
        }
        Placeholder::TopSectionEntity => (&ctx.top_section_entities, Slot::TopSectionEntityType),
        Placeholder::SectionEntity => (&ctx.section_entities, Slot::SectionEntityType),
    };
    let required = pattern.atoms().iter().find(|a| a.slot == slot).map(|a| a.value.clone());
    entities
        .iter()
        .filter(|e| match &required {
            Some(t) => kg.types_of(e).is_some_and(|ts| ts.contains(t)),
            None => true,
        })
        .cloned()
        .collect()
}

/// The facts of one listing's subject entities, type facts included.
struct ListingFacts {
    per_subject: Vec<BTreeSet<(Predicate, String)>>,
    count_p: HashMap<Predicate, usize>,
    /// count_po of every concrete consequent with at least one hit.
    count_po: HashMap<Consequent, usize>,
}

impl ListingFacts {
    fn new(subjects: &BTreeSet<String>, kg: &KnowledgeGraph) -> Self {
        let per_subject: Vec<BTreeSet<(Predicate, String)>> = subjects
            .iter()
            .map(|s| kg.entity(s).map(|v| v.pairs).unwrap_or_default())
            .collect();
        let mut count_p = HashMap::new();
        let mut count_po = HashMap::new();
        for facts in &per_subject {
            let predicates: BTreeSet<&Predicate> = facts.iter().map(|f| &f.0).collect();
            for p in predicates {
                *count_p.entry(p.clone()).or_default() += 1;
            }
            for (p, o) in facts {
                *count_po.entry(concrete(p, o)).or_default() += 1;
            }
        }
        ListingFacts {
            per_subject,
            count_p,
            count_po,
        }
    }
}

fn concrete(p: &Predicate, o: &str) -> Consequent {
    if p.is_type() {
        Consequent::has_type(o)
    } else {
        Consequent::relation(p.clone(), Target::Entity(o.to_string()))
    }
}

/// `(count_po, count_p)` of a consequent on one listing, or `None` when the
/// listing does not take part in the consequent's sums.
fn counts(
    c: &Consequent,
    facts: &ListingFacts,
    listing: &Listing,
    pattern: &ContextPattern,
    kg: &KnowledgeGraph,
) -> Option<(usize, usize)> {
    let p = &c.predicate;
    let n = facts.count_p.get(p).copied().unwrap_or(0);
    if n == 0 {
        return None;
    }
    let Target::Placeholder(x) = &c.target else {
        return Some((facts.count_po.get(c).copied().unwrap_or(0), n));
    };
    let objects = resolve(*x, listing, pattern, kg);
    if objects.is_empty() {
        return None;
    }
    let h = facts
        .per_subject
        .iter()
        .filter(|f| f.iter().any(|(q, o)| q == p && objects.contains(o)))
        .count();
    Some((h, n))
}

/// Every rule with at least one hit, by brute force over all patterns of all
/// listings.
pub fn oracle_rules(corpus: &Corpus, kg: &KnowledgeGraph, max_size: usize) -> BTreeMap<(ContextPattern, Consequent), OracleRule> {
    let listings: Vec<(&Page, &Listing)> = corpus.listings().collect();
    let mut covered: BTreeMap<ContextPattern, Vec<usize>> = BTreeMap::new();
    for (i, (_, l)) in listings.iter().enumerate() {
        for p in patterns_of(&slot_values(l, kg), max_size) {
            covered.entry(p).or_default().push(i);
        }
    }
    let facts: Vec<ListingFacts> = listings
        .iter()
        .map(|(p, l)| ListingFacts::new(&l.subject_ids(&p.page_id), kg))
        .collect();
    let mut out = BTreeMap::new();
    for (pattern, idx) in covered {
        let mut candidates = BTreeSet::new();
        for &i in &idx {
            for (p, o) in facts[i].per_subject.iter().flatten() {
                candidates.insert(concrete(p, o));
                if p.is_type() {
                    continue;
                }
                for x in Placeholder::ALL {
                    candidates.insert(Consequent::relation(p.clone(), Target::Placeholder(x)));
                }
            }
        }
        for c in candidates {
            let per: Vec<(usize, usize)> = idx
                .iter()
                .filter_map(|&i| counts(&c, &facts[i], listings[i].1, &pattern, kg))
                .collect();
            let hits: usize = per.iter().map(|x| x.0).sum();
            let total: usize = per.iter().map(|x| x.1).sum();
            if hits == 0 {
                continue;
            }
            let conf = hits as f64 / total as f64;
            let dev: f64 = per.iter().map(|&(h, n)| (h as f64 / n as f64 - conf).abs()).sum();
            out.insert(
                (pattern.clone(), c),
                OracleRule {
                    supp: idx.len(),
                    conf,
                    cons: 1.0 - dev / per.len() as f64,
                },
            );
        }
    }
    out
}

pub fn type_predicate() -> Predicate {
    Predicate::rdf_type()
}

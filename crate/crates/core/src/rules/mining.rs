use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use super::context::{build_context, resolve_placeholder, ContextAtoms};
use super::{sort_rules, Consequent, ContextPattern, Placeholder, Rule, RuleKind, Target};
use crate::corpus::{Corpus, Listing};
use crate::kg::{KnowledgeGraph, Predicate};

#[derive(Debug, Clone, PartialEq)]
pub struct MiningConfig {
    /// Largest number of atoms in an antecedent.
    pub max_pattern_size: usize,
    /// Drop a type rule when a same-antecedent rule for a subtype has
    /// confidence and consistency at least as high.
    pub prune_subsumed_types: bool,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            max_pattern_size: 5,
            prune_subsumed_types: true,
        }
    }
}

/// KG counts for the subject entities of one listing.
struct ListingFacts<'a> {
    listing: &'a Listing,
    /// count_p per predicate.
    pred_counts: HashMap<Predicate, usize>,
    /// count_po per concrete consequent, non-zero only.
    concrete: Vec<(Consequent, usize)>,
    /// Subjects (by index) holding `(p, o)` for `o` a context entity.
    context_hits: HashMap<(Predicate, &'a str), Vec<usize>>,
    placeholders: BTreeSet<(Predicate, Placeholder)>,
}

impl<'a> ListingFacts<'a> {
    fn new(page_id: &str, listing: &'a Listing, kg: &KnowledgeGraph) -> Self {
        let ctx = &listing.context;
        let slots: [(Placeholder, Vec<&'a str>); 3] = [
            (
                Placeholder::PageEntity,
                if ctx.page_entity.is_empty() { vec![] } else { vec![ctx.page_entity.as_str()] },
            ),
            (
                Placeholder::TopSectionEntity,
                ctx.top_section_entities.iter().map(String::as_str).collect(),
            ),
            (
                Placeholder::SectionEntity,
                ctx.section_entities.iter().map(String::as_str).collect(),
            ),
        ];
        let mut pred_counts: HashMap<Predicate, usize> = HashMap::new();
        let mut concrete: HashMap<Consequent, usize> = HashMap::new();
        let mut context_hits: HashMap<(Predicate, &'a str), Vec<usize>> = HashMap::new();
        let mut placeholders = BTreeSet::new();
        for (i, s) in listing.subject_ids(page_id).iter().enumerate() {
            if let Some(types) = kg.types_of(s).filter(|ts| !ts.is_empty()) {
                *pred_counts.entry(Predicate::rdf_type()).or_default() += 1;
                for t in types {
                    *concrete.entry(Consequent::has_type(t.clone())).or_default() += 1;
                }
            }
            let mut seen = BTreeSet::new();
            for (p, o) in kg.relation_pairs(s) {
                for (x, entities) in &slots {
                    if let Some(&e) = entities.iter().find(|&&e| e == o) {
                        placeholders.insert((p.clone(), *x));
                        let hits = context_hits.entry((p.clone(), e)).or_default();
                        if hits.last() != Some(&i) {
                            hits.push(i);
                        }
                    }
                }
                *concrete
                    .entry(Consequent::relation(p.clone(), Target::Entity(o.to_string())))
                    .or_default() += 1;
                seen.insert(p);
            }
            for p in seen {
                *pred_counts.entry(p).or_default() += 1;
            }
        }
        let mut concrete: Vec<_> = concrete.into_iter().collect();
        concrete.sort();
        ListingFacts {
            listing,
            pred_counts,
            concrete,
            context_hits,
            placeholders,
        }
    }

    fn count_p(&self, p: &Predicate) -> usize {
        self.pred_counts.get(p).copied().unwrap_or(0)
    }

    /// count_po for a placeholder consequent under `pattern`, or `None`
    /// when the placeholder resolves to nothing on this listing.
    fn placeholder_hits(
        &self,
        p: &Predicate,
        x: Placeholder,
        pattern: &ContextPattern,
        kg: &KnowledgeGraph,
    ) -> Option<usize> {
        let resolved = resolve_placeholder(x, self.listing, Some(pattern), kg);
        if resolved.is_empty() {
            return None;
        }
        let mut subjects = BTreeSet::new();
        for o in resolved {
            if let Some(hits) = self.context_hits.get(&(p.clone(), o)) {
                subjects.extend(hits.iter().copied());
            }
        }
        Some(subjects.len())
    }
}

/// Accumulated per-listing `(count_po, count_p)` pairs of one candidate.
#[derive(Default)]
struct Tally {
    hits: usize,
    total: usize,
    defined: usize,
    /// Frequencies of listings with non-zero count_po.
    nonzero: Vec<(usize, usize)>,
}

impl Tally {
    fn metrics(&self) -> Option<(f64, f64)> {
        if self.hits == 0 || self.total == 0 {
            return None;
        }
        let conf = self.hits as f64 / self.total as f64;
        let mut dev: f64 = self
            .nonzero
            .iter()
            .map(|&(h, n)| (h as f64 / n as f64 - conf).abs())
            .sum();
        dev += (self.defined - self.nonzero.len()) as f64 * conf;
        let cons = 1.0 - dev / self.defined as f64;
        Some((conf, cons.clamp(0.0, 1.0)))
    }
}

fn mine_pattern(
    pattern: ContextPattern,
    covered: &[usize],
    facts: &[ListingFacts<'_>],
    kg: &KnowledgeGraph,
) -> Vec<Rule> {
    let antecedent = Arc::new(pattern);
    let covered_ids: Arc<Vec<String>> =
        Arc::new(covered.iter().map(|&i| facts[i].listing.listing_id.clone()).collect());
    let supp = covered.len();

    let mut per_predicate: HashMap<&Predicate, (usize, usize)> = HashMap::new();
    let mut concrete: HashMap<&Consequent, Tally> = HashMap::new();
    let mut placeholders: BTreeSet<&(Predicate, Placeholder)> = BTreeSet::new();
    for &i in covered {
        let f = &facts[i];
        for (p, &n) in &f.pred_counts {
            let e = per_predicate.entry(p).or_default();
            e.0 += n;
            e.1 += 1;
        }
        for (c, po) in &f.concrete {
            let t = concrete.entry(c).or_default();
            t.hits += po;
            t.nonzero.push((*po, f.count_p(&c.predicate)));
        }
        placeholders.extend(f.placeholders.iter());
    }

    let mut rules = Vec::new();
    let mut emit = |consequent: Consequent, tally: &Tally| {
        if let Some((conf, cons)) = tally.metrics() {
            rules.push(Rule {
                antecedent: Arc::clone(&antecedent),
                consequent,
                supp,
                conf,
                cons,
                hits: tally.hits,
                total: tally.total,
                covered_listing_ids: Arc::clone(&covered_ids),
            });
        }
    };

    for (c, mut tally) in concrete {
        let (total, defined) = per_predicate[&c.predicate];
        tally.total = total;
        tally.defined = defined;
        emit(c.clone(), &tally);
    }
    for (p, x) in placeholders {
        let mut tally = Tally::default();
        for &i in covered {
            let f = &facts[i];
            let n = f.count_p(p);
            if n == 0 {
                continue;
            }
            let Some(h) = f.placeholder_hits(p, *x, &antecedent, kg) else {
                continue;
            };
            tally.hits += h;
            tally.total += n;
            tally.defined += 1;
            if h > 0 {
                tally.nonzero.push((h, n));
            }
        }
        emit(Consequent::relation(p.clone(), Target::Placeholder(*x)), &tally);
    }
    rules
}

fn prune_subsumed_types(rules: Vec<Rule>, kg: &KnowledgeGraph) -> Vec<Rule> {
    let mut keep = vec![true; rules.len()];
    let mut start = 0;
    while start < rules.len() {
        let mut end = start;
        while end < rules.len() && rules[end].antecedent == rules[start].antecedent {
            end += 1;
        }
        let group: Vec<usize> = (start..end).filter(|&i| rules[i].kind() == RuleKind::Type).collect();
        for &i in &group {
            let Target::Type(t) = &rules[i].consequent.target else { continue };
            keep[i] = !group.iter().any(|&j| {
                let Target::Type(sub) = &rules[j].consequent.target else { return false };
                sub != t
                    && kg.is_subtype_of(sub, t)
                    && rules[j].conf >= rules[i].conf
                    && rules[j].cons >= rules[i].cons
            });
        }
        start = end;
    }
    rules
        .into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect()
}

/// Mines every rule whose antecedent matches at least one listing and whose
/// consequent is observed for at least one covered subject entity.
pub fn mine_rules(corpus: &Corpus, kg: &KnowledgeGraph, config: &MiningConfig) -> Vec<Rule> {
    let listings: Vec<_> = corpus.listings().collect();
    let prepared: Vec<(ListingFacts<'_>, ContextAtoms)> = listings
        .par_iter()
        .map(|(page, listing)| (ListingFacts::new(&page.page_id, listing, kg), build_context(listing, kg)))
        .collect();

    let per_listing: Vec<Vec<ContextPattern>> = prepared
        .par_iter()
        .map(|(_, ctx)| ctx.subpatterns(config.max_pattern_size))
        .collect();
    let mut covered: HashMap<ContextPattern, Vec<usize>> = HashMap::new();
    for (i, patterns) in per_listing.into_iter().enumerate() {
        for p in patterns {
            covered.entry(p).or_default().push(i);
        }
    }
    let mut patterns: Vec<(ContextPattern, Vec<usize>)> = covered.into_iter().collect();
    patterns.sort_by(|a, b| a.0.cmp(&b.0));

    let facts: Vec<ListingFacts<'_>> = prepared.into_iter().map(|(f, _)| f).collect();
    let mut rules: Vec<Rule> = patterns
        .into_par_iter()
        .flat_map_iter(|(pattern, idx)| mine_pattern(pattern, &idx, &facts, kg))
        .collect();
    sort_rules(&mut rules);
    if config.prune_subsumed_types {
        rules = prune_subsumed_types(rules, kg);
    }
    rules
}

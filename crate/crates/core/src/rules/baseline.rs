use std::collections::{BTreeMap, BTreeSet};

use super::{Consequent, Target};
use crate::kg::{KnowledgeGraph, Predicate};

/// Consequents whose frequency among `subjects` exceeds `tau_freq`. Sets
/// smaller than `min_se` yield nothing.
pub fn frequency_baseline(
    subjects: &BTreeSet<String>,
    kg: &KnowledgeGraph,
    tau_freq: f64,
    min_se: usize,
) -> BTreeSet<Consequent> {
    if subjects.len() < min_se {
        return BTreeSet::new();
    }
    let mut count_p: BTreeMap<Predicate, usize> = BTreeMap::new();
    let mut count_po: BTreeMap<Consequent, usize> = BTreeMap::new();
    for s in subjects {
        if let Some(types) = kg.types_of(s).filter(|ts| !ts.is_empty()) {
            *count_p.entry(Predicate::rdf_type()).or_default() += 1;
            for t in types {
                *count_po.entry(Consequent::has_type(t.clone())).or_default() += 1;
            }
        }
        let mut seen = BTreeSet::new();
        for (p, o) in kg.relation_pairs(s) {
            *count_po
                .entry(Consequent::relation(p.clone(), Target::Entity(o.to_string())))
                .or_default() += 1;
            seen.insert(p);
        }
        for p in seen {
            *count_p.entry(p).or_default() += 1;
        }
    }
    count_po
        .into_iter()
        .filter(|(c, n)| *n as f64 / count_p[&c.predicate] as f64 > tau_freq)
        .map(|(c, _)| c)
        .collect()
}

//! Subject entity detection.
//!
//! Lists: the first entity mention of each row. Tables: the column whose
//! entity mentions share one KG type most often. Explicit marks in the input
//! are kept; anything still unknown afterwards becomes `No`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, Listing, ListingKind, SubjectMark};
use crate::kg::KnowledgeGraph;
use crate::stats::Summary;

pub fn detect_subject_entities(corpus: &Corpus, kg: &KnowledgeGraph) -> Corpus {
    let mut out = corpus.clone();
    out.pages.par_iter_mut().for_each(|page| {
        let page_id = page.page_id.clone();
        let page_entity = page.page_entity.clone();
        for l in &mut page.listings {
            let has_explicit = l.mentions().any(|m| m.is_subject != SubjectMark::Unknown);
            if !has_explicit {
                match l.kind {
                    ListingKind::List => mark_list(l, &page_id, &page_entity),
                    ListingKind::Table => mark_table(l, &page_id, &page_entity, kg),
                }
            }
            for m in l.mentions_mut() {
                if m.is_subject == SubjectMark::Unknown {
                    m.is_subject = SubjectMark::No;
                }
            }
        }
    });
    out
}

fn mark_list(l: &mut Listing, page_id: &str, page_entity: &str) {
    for row in &mut l.rows {
        if let Some(m) = row
            .mentions
            .iter_mut()
            .find(|m| m.is_linked() && m.subject_id(page_id) != page_entity)
        {
            m.is_subject = SubjectMark::Yes;
        }
    }
}

/// Fraction of a column's entity mentions sharing its most common direct type.
fn homogeneity(ids: &[String], kg: &KnowledgeGraph) -> f64 {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for id in ids {
        for t in kg.direct_types_of(id).into_iter().flatten() {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let best = counts.values().copied().max().unwrap_or(0);
    best as f64 / ids.len() as f64
}

fn mark_table(l: &mut Listing, page_id: &str, page_entity: &str, kg: &KnowledgeGraph) {
    let mut columns: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for m in l.mentions() {
        if m.is_linked() {
            let id = m.subject_id(page_id);
            if id != page_entity {
                columns.entry(m.column.unwrap_or(0)).or_default().push(id);
            }
        }
    }
    let mut best: Option<(usize, f64)> = None;
    for (col, ids) in &columns {
        let score = homogeneity(ids, kg);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((*col, score));
        }
    }
    let Some((subject_col, _)) = best else { return };
    for m in l.mentions_mut() {
        if m.is_linked() && m.column.unwrap_or(0) == subject_col && m.subject_id(page_id) != page_entity {
            m.is_subject = SubjectMark::Yes;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectStats {
    pub listings: usize,
    pub listings_with_subjects: usize,
    pub subjects: usize,
    pub per_listing: Option<Summary>,
}

pub fn se_stats(corpus: &Corpus) -> SubjectStats {
    let counts: Vec<usize> = corpus.listings().map(|(_, l)| l.subject_count()).collect();
    SubjectStats {
        listings: counts.len(),
        listings_with_subjects: counts.iter().filter(|&&c| c > 0).count(),
        subjects: counts.iter().sum(),
        per_listing: Summary::of(&counts),
    }
}

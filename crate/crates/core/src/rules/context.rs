use std::collections::BTreeSet;

use super::{Atom, ContextPattern, Placeholder, Slot};
use crate::corpus::Listing;
use crate::kg::{KnowledgeGraph, Predicate};

/// The materialized context of one listing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextAtoms {
    atoms: BTreeSet<Atom>,
}

impl ContextAtoms {
    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        ContextAtoms {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn values(&self, slot: Slot) -> impl Iterator<Item = &str> {
        self.atoms
            .iter()
            .filter(move |a| a.slot == slot)
            .map(|a| a.value.as_str())
    }

    /// Every pattern with at most one atom per slot drawn from this
    /// context, up to `max_size` atoms.
    pub fn subpatterns(&self, max_size: usize) -> Vec<ContextPattern> {
        let by_slot: Vec<Vec<&Atom>> = Slot::ALL
            .iter()
            .map(|&s| self.atoms.iter().filter(|a| a.slot == s).collect())
            .filter(|v: &Vec<&Atom>| !v.is_empty())
            .collect();
        let mut out = Vec::new();
        let mut current: Vec<Atom> = Vec::new();
        fn walk(
            by_slot: &[Vec<&Atom>],
            i: usize,
            max_size: usize,
            current: &mut Vec<Atom>,
            out: &mut Vec<ContextPattern>,
        ) {
            if i == by_slot.len() {
                if !current.is_empty() {
                    out.push(ContextPattern::new(current.clone()).expect("one atom per slot"));
                }
                return;
            }
            walk(by_slot, i + 1, max_size, current, out);
            if current.len() < max_size {
                for atom in &by_slot[i] {
                    current.push((*atom).clone());
                    walk(by_slot, i + 1, max_size, current, out);
                    current.pop();
                }
            }
        }
        walk(&by_slot, 0, max_size, &mut current, &mut out);
        out
    }
}

fn closed_types<'a>(kg: &'a KnowledgeGraph, entity: &str) -> impl Iterator<Item = &'a String> {
    kg.types_of(entity).into_iter().flatten()
}

pub fn build_context(listing: &Listing, kg: &KnowledgeGraph) -> ContextAtoms {
    let ctx = &listing.context;
    let mut atoms = BTreeSet::new();
    if !ctx.page_entity.is_empty() {
        for t in closed_types(kg, &ctx.page_entity) {
            atoms.insert(Atom::new(Slot::PageEntityType, t.clone()));
        }
    }
    if !ctx.top_section.is_empty() {
        atoms.insert(Atom::new(Slot::TopSection, ctx.top_section.clone()));
    }
    if !ctx.section.is_empty() {
        atoms.insert(Atom::new(Slot::Section, ctx.section.clone()));
    }
    for e in &ctx.top_section_entities {
        for t in closed_types(kg, e) {
            atoms.insert(Atom::new(Slot::TopSectionEntityType, t.clone()));
        }
    }
    for e in &ctx.section_entities {
        for t in closed_types(kg, e) {
            atoms.insert(Atom::new(Slot::SectionEntityType, t.clone()));
        }
    }
    ContextAtoms { atoms }
}

/// Context entities a placeholder stands for on `listing`. Title entities
/// are narrowed to those carrying the pattern's entity-type atom, if any.
pub fn resolve_placeholder<'a>(
    placeholder: Placeholder,
    listing: &'a Listing,
    pattern: Option<&ContextPattern>,
    kg: &KnowledgeGraph,
) -> Vec<&'a str> {
    let ctx = &listing.context;
    let entities = match placeholder {
        Placeholder::PageEntity => {
            return if ctx.page_entity.is_empty() {
                Vec::new()
            } else {
                vec![ctx.page_entity.as_str()]
            }
        }
        Placeholder::TopSectionEntity => &ctx.top_section_entities,
        Placeholder::SectionEntity => &ctx.section_entities,
    };
    let required = placeholder
        .type_slot()
        .and_then(|slot| pattern.and_then(|p| p.get(slot)));
    let mut out: Vec<&str> = entities
        .iter()
        .filter(|e| match required {
            Some(t) => kg.types_of(e).is_some_and(|ts| ts.contains(t)),
            None => true,
        })
        .map(String::as_str)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Placeholder-abstracted relation pairs of the listing's subject entities:
/// every `(p, X)` such that some subject has `(p, o)` with `o` in slot `X`.
pub fn abstract_targets(listing: &Listing, page_id: &str, kg: &KnowledgeGraph) -> BTreeSet<(Predicate, Placeholder)> {
    let mut out = BTreeSet::new();
    for s in listing.subject_ids(page_id) {
        for (p, o) in kg.relation_pairs(&s) {
            for x in Placeholder::ALL {
                if resolve_placeholder(x, listing, None, kg).contains(&o) {
                    out.insert((p.clone(), x));
                }
            }
        }
    }
    out
}

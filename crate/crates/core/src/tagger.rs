//! Named-entity tagging of mentions, per-type tag harmonization and the
//! `tagprob(type, tag)` table.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Corpus, LinkKind, Mention};
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;

pub const PERSON: &str = "PERSON";
pub const ORG: &str = "ORG";
pub const NUMBER: &str = "NUMBER";
pub const OTHER: &str = "OTHER";

/// Surface form to tag lookup.
pub type Gazetteer = BTreeMap<String, String>;

pub fn load_gazetteer(path: impl AsRef<Path>) -> Result<Gazetteer> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut g = Gazetteer::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (surface, tag) = line
            .split_once('\t')
            .filter(|(s, t)| !s.is_empty() && !t.is_empty())
            .ok_or_else(|| Error::record(idx + 1, "gazetteer", "expected `surface<TAB>tag`"))?;
        g.insert(surface.to_string(), tag.trim().to_string());
    }
    Ok(g)
}

/// Tagger used for mentions that carry no tag and are not in the gazetteer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    /// Capitalization and digit shape classes.
    Shape,
    None,
}

impl FromStr for Fallback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shape" => Ok(Fallback::Shape),
            "none" => Ok(Fallback::None),
            other => Err(Error::UnknownFallback(other.to_string())),
        }
    }
}

const ORG_WORDS: &[&str] = &[
    "Inc", "Inc.", "Ltd", "Ltd.", "Corp", "Corp.", "Records", "Band", "FC", "University", "Company", "Group",
    "Orchestra", "Club", "Association", "Institute", "Party",
];

/// Crude shape classifier: NUMBER, ORG, PERSON or OTHER.
pub fn shape_tag(surface: &str) -> &'static str {
    let has_digit = surface.chars().any(|c| c.is_ascii_digit());
    if has_digit && surface.chars().all(|c| c.is_ascii_digit() || " -–/.,".contains(c)) {
        return NUMBER;
    }
    let tokens: Vec<&str> = surface.split_whitespace().collect();
    let capitalized = |t: &str| t.chars().next().is_some_and(char::is_uppercase);
    if tokens.is_empty() || !tokens.iter().all(|t| capitalized(t)) {
        return OTHER;
    }
    let acronym = |t: &str| t.len() >= 2 && t.chars().all(|c| c.is_ascii_uppercase());
    if tokens.iter().any(|t| ORG_WORDS.contains(t) || acronym(t)) {
        return ORG;
    }
    let name_like = |t: &str| {
        let mut cs = t.chars();
        cs.next().is_some_and(char::is_uppercase) && cs.all(|c| c.is_lowercase() || "'.-".contains(c))
    };
    if (2..=3).contains(&tokens.len()) && tokens.iter().all(|t| name_like(t)) {
        return PERSON;
    }
    OTHER
}

fn tag_mention(m: &mut Mention, gazetteer: &Gazetteer, fallback: Fallback) {
    if m.ne_tag.is_some() {
        return;
    }
    if let Some(tag) = gazetteer.get(&m.surface) {
        m.ne_tag = Some(tag.clone());
        if m.link_kind == LinkKind::None {
            m.link_kind = LinkKind::Tagged;
        }
        return;
    }
    if fallback == Fallback::Shape {
        let tag = shape_tag(&m.surface);
        m.ne_tag = Some(tag.to_string());
        let proper = m.surface.chars().next().is_some_and(char::is_uppercase);
        if m.link_kind == LinkKind::None && tag != NUMBER && proper {
            m.link_kind = LinkKind::Tagged;
        }
    }
}

/// Assigns at most one tag per mention. Existing tags win over the
/// gazetteer, which wins over the fallback. Untagged plain spans that the
/// gazetteer or a proper-noun shape recognizes become `tagged` entity
/// mentions.
pub fn tag_corpus(corpus: &Corpus, gazetteer: &Gazetteer, fallback: &str) -> Result<Corpus> {
    let fallback: Fallback = fallback.parse()?;
    let mut out = corpus.clone();
    out.pages.par_iter_mut().for_each(|page| {
        for l in &mut page.listings {
            for m in l.mentions_mut() {
                tag_mention(m, gazetteer, fallback);
            }
        }
    });
    Ok(out)
}

fn majority<'a>(counts: impl IntoIterator<Item = (&'a str, usize)>) -> Option<&'a str> {
    // ties go to the lexicographically smaller tag
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
        .map(|(t, _)| t)
}

/// Majority tag of each entity over its entity mentions.
pub fn entity_tags(corpus: &Corpus) -> BTreeMap<String, String> {
    let mut votes: BTreeMap<String, BTreeMap<&str, usize>> = BTreeMap::new();
    for (page, l) in corpus.listings() {
        for m in l.mentions().filter(|m| m.is_linked()) {
            if let Some(tag) = &m.ne_tag {
                *votes
                    .entry(m.subject_id(&page.page_id))
                    .or_default()
                    .entry(tag.as_str())
                    .or_default() += 1;
            }
        }
    }
    votes
        .into_iter()
        .filter_map(|(e, v)| majority(v).map(|t| (e, t.to_string())))
        .collect()
}

/// Makes tags consistent per type: every linked entity is assigned to its
/// most specific KG type (fewest linked entities, ties lexicographic), and
/// all mentions of entities sharing that type get the group's majority tag.
pub fn harmonize_tags(corpus: &Corpus, kg: &KnowledgeGraph) -> Corpus {
    let tags = entity_tags(corpus);
    let linked: BTreeSet<&str> = corpus
        .listings()
        .flat_map(|(_, l)| l.mentions().filter_map(|m| m.entity_ref.as_deref()))
        .collect();
    let mut members: HashMap<&str, usize> = HashMap::new();
    for e in &linked {
        for t in kg.types_of(e).into_iter().flatten() {
            *members.entry(t.as_str()).or_default() += 1;
        }
    }
    let key_type = |e: &str| -> Option<&str> {
        kg.types_of(e)?
            .iter()
            .map(String::as_str)
            .min_by(|a, b| members[a].cmp(&members[b]).then(a.cmp(b)))
    };
    let mut group_votes: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    let mut group_of: HashMap<&str, &str> = HashMap::new();
    for e in &linked {
        if let Some(t) = key_type(e) {
            group_of.insert(e, t);
            if let Some(tag) = tags.get(*e) {
                *group_votes.entry(t).or_default().entry(tag.as_str()).or_default() += 1;
            }
        }
    }
    let winners: HashMap<&str, String> = group_votes
        .into_iter()
        .filter_map(|(t, v)| majority(v).map(|w| (t, w.to_string())))
        .collect();

    let mut out = corpus.clone();
    out.pages.par_iter_mut().for_each(|page| {
        for l in &mut page.listings {
            for m in l.mentions_mut() {
                let Some(e) = m.entity_ref.as_deref() else { continue };
                if let Some(tag) = group_of.get(e).and_then(|t| winners.get(t)) {
                    m.ne_tag = Some(tag.clone());
                }
            }
        }
    });
    out
}

/// Empirical distribution of tags over the subject entities of each type.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TagModel {
    tagprob: BTreeMap<String, BTreeMap<String, f64>>,
    entity_tag: BTreeMap<String, String>,
    tag_alphabet: BTreeSet<String>,
}

impl TagModel {
    /// `None` when no tagged subject entity has type `ty`; an unseen tag for
    /// a known type is `Some(0.0)`.
    pub fn tagprob(&self, ty: &str, tag: &str) -> Option<f64> {
        self.tagprob
            .get(ty)
            .map(|dist| dist.get(tag).copied().unwrap_or(0.0))
    }

    pub fn distribution(&self, ty: &str) -> Option<&BTreeMap<String, f64>> {
        self.tagprob.get(ty)
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.tagprob.keys().map(String::as_str)
    }

    pub fn entity_tag(&self, entity: &str) -> Option<&str> {
        self.entity_tag.get(entity).map(String::as_str)
    }

    pub fn tag_alphabet(&self) -> &BTreeSet<String> {
        &self.tag_alphabet
    }
}

/// Counts each distinct subject entity once per type it has (upward closed),
/// under its majority tag.
pub fn build_tagprob(corpus: &Corpus, kg: &KnowledgeGraph) -> TagModel {
    let entity_tag = entity_tags(corpus);
    let tag_alphabet: BTreeSet<String> = corpus
        .listings()
        .flat_map(|(_, l)| l.mentions().filter_map(|m| m.ne_tag.clone()))
        .collect();
    let subjects: BTreeSet<String> = corpus
        .listings()
        .flat_map(|(p, l)| l.subject_ids(&p.page_id))
        .collect();
    let mut counts: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    for e in &subjects {
        let (Some(types), Some(tag)) = (kg.types_of(e), entity_tag.get(e)) else {
            continue;
        };
        for t in types {
            *counts.entry(t.as_str()).or_default().entry(tag.as_str()).or_default() += 1;
        }
    }
    let tagprob = counts
        .into_iter()
        .map(|(t, dist)| {
            let total: usize = dist.values().sum();
            let probs = dist
                .into_iter()
                .map(|(tag, c)| (tag.to_string(), c as f64 / total as f64))
                .collect();
            (t.to_string(), probs)
        })
        .collect();
    TagModel {
        tagprob,
        entity_tag,
        tag_alphabet,
    }
}

//! Listing corpus data model and the newline-delimited page file format.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Summary;
use crate::text::{collapse_whitespace, normalize_title};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Blue,
    Red,
    Expanded,
    Tagged,
    None,
}

/// Whether a mention is one of its listing's subject entities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SubjectMark {
    Yes,
    No,
    #[default]
    Unknown,
}

impl SubjectMark {
    pub fn is_yes(self) -> bool {
        self == SubjectMark::Yes
    }
}

impl From<Option<bool>> for SubjectMark {
    fn from(v: Option<bool>) -> Self {
        match v {
            Some(true) => SubjectMark::Yes,
            Some(false) => SubjectMark::No,
            None => SubjectMark::Unknown,
        }
    }
}

impl From<SubjectMark> for Option<bool> {
    fn from(m: SubjectMark) -> Self {
        match m {
            SubjectMark::Yes => Some(true),
            SubjectMark::No => Some(false),
            SubjectMark::Unknown => None,
        }
    }
}

mod subject_mark_serde {
    use super::SubjectMark;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &SubjectMark, s: S) -> Result<S::Ok, S::Error> {
        Option::<bool>::from(*m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SubjectMark, D::Error> {
        Option::<bool>::deserialize(d).map(SubjectMark::from)
    }

    pub fn is_unknown(m: &SubjectMark) -> bool {
        *m == SubjectMark::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mention {
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_ref: Option<String>,
    pub link_kind: LinkKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ne_tag: Option<String>,
    #[serde(
        default,
        with = "subject_mark_serde",
        skip_serializing_if = "subject_mark_serde::is_unknown"
    )]
    pub is_subject: SubjectMark,
    /// Table column of the cell holding this mention.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl Mention {
    pub fn plain(surface: impl Into<String>) -> Self {
        Mention {
            surface: surface.into(),
            entity_ref: None,
            link_kind: LinkKind::None,
            ne_tag: None,
            is_subject: SubjectMark::Unknown,
            column: None,
        }
    }

    pub fn linked(surface: impl Into<String>, entity: impl Into<String>, kind: LinkKind) -> Self {
        Mention {
            entity_ref: Some(entity.into()),
            link_kind: kind,
            ..Mention::plain(surface)
        }
    }

    pub fn with_column(mut self, column: usize) -> Self {
        self.column = Some(column);
        self
    }

    /// Links, expanded links and tagger-recognized spans all denote entities.
    pub fn is_linked(&self) -> bool {
        self.link_kind != LinkKind::None
    }

    /// The entity this mention denotes: its link target, or an id minted from
    /// the page and surface for spans the tagger recognized.
    pub fn subject_id(&self, page_id: &str) -> String {
        match &self.entity_ref {
            Some(e) => e.clone(),
            None => mint_entity_id(page_id, &self.surface),
        }
    }
}

/// Page-scoped id for an entity without a link target: `page_id#surface`.
pub fn mint_entity_id(page_id: &str, surface: &str) -> String {
    format!("{page_id}#{}", normalize_title(surface))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Row {
    pub mentions: Vec<Mention>,
}

impl Row {
    pub fn new(mentions: Vec<Mention>) -> Self {
        Row { mentions }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ListingKind {
    List,
    Table,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ListingContext {
    pub page_entity: String,
    pub top_section: String,
    pub section: String,
    pub top_section_entities: Vec<String>,
    pub section_entities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Listing {
    pub listing_id: String,
    pub kind: ListingKind,
    pub rows: Vec<Row>,
    pub context: ListingContext,
    /// Header cells of tables; not rows, kept for reference.
    pub headers: Vec<String>,
}

impl Listing {
    pub fn mentions(&self) -> impl Iterator<Item = &Mention> {
        self.rows.iter().flat_map(|r| r.mentions.iter())
    }

    pub fn mentions_mut(&mut self) -> impl Iterator<Item = &mut Mention> {
        self.rows.iter_mut().flat_map(|r| r.mentions.iter_mut())
    }

    /// Distinct ids of the subject entities.
    pub fn subject_ids(&self, page_id: &str) -> BTreeSet<String> {
        self.mentions()
            .filter(|m| m.is_subject.is_yes())
            .map(|m| m.subject_id(page_id))
            .collect()
    }

    pub fn subject_count(&self) -> usize {
        self.mentions().filter(|m| m.is_subject.is_yes()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Page {
    pub page_id: String,
    pub title: String,
    pub page_entity: String,
    pub listings: Vec<Listing>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub pages: Vec<Page>,
    pub entity_universe: BTreeSet<String>,
}

/// Counts reported while admitting pages into a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub pages: usize,
    pub listings_kept: usize,
    pub listings_dropped: usize,
}

impl Corpus {
    /// Admits pages: rejects duplicate listing ids and drops listings with
    /// fewer than two rows.
    pub fn from_pages(pages: Vec<Page>) -> Result<(Corpus, IngestReport)> {
        let mut seen = HashSet::new();
        let mut report = IngestReport {
            pages: pages.len(),
            ..Default::default()
        };
        let mut kept_pages = Vec::with_capacity(pages.len());
        for mut page in pages {
            for l in &page.listings {
                if !seen.insert(l.listing_id.clone()) {
                    return Err(Error::DuplicateListing(l.listing_id.clone()));
                }
            }
            let before = page.listings.len();
            page.listings.retain(|l| l.rows.len() >= 2);
            report.listings_dropped += before - page.listings.len();
            report.listings_kept += page.listings.len();
            kept_pages.push(page);
        }
        let mut corpus = Corpus {
            pages: kept_pages,
            entity_universe: BTreeSet::new(),
        };
        corpus.refresh_universe();
        Ok((corpus, report))
    }

    /// Recomputes the entity universe from page entities, title entities and
    /// linked mentions.
    pub fn refresh_universe(&mut self) {
        let mut universe = BTreeSet::new();
        for page in &self.pages {
            universe.insert(page.page_entity.clone());
            for l in &page.listings {
                universe.extend(l.context.top_section_entities.iter().cloned());
                universe.extend(l.context.section_entities.iter().cloned());
                universe.extend(l.mentions().filter_map(|m| m.entity_ref.clone()));
            }
        }
        self.entity_universe = universe;
    }

    pub fn listings(&self) -> impl Iterator<Item = (&Page, &Listing)> {
        self.pages
            .iter()
            .flat_map(|p| p.listings.iter().map(move |l| (p, l)))
    }

    pub fn listing_count(&self) -> usize {
        self.pages.iter().map(|p| p.listings.len()).sum()
    }

    pub fn find_listing(&self, listing_id: &str) -> Option<(&Page, &Listing)> {
        self.listings().find(|(_, l)| l.listing_id == listing_id)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageRecord {
    page_id: String,
    title: String,
    page_entity: String,
    listings: Vec<ListingRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ListingRecord {
    listing_id: String,
    kind: ListingKind,
    top_section: String,
    section: String,
    top_section_entities: Vec<String>,
    section_entities: Vec<String>,
    rows: Vec<Row>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    headers: Vec<String>,
}

impl From<&Page> for PageRecord {
    fn from(p: &Page) -> Self {
        PageRecord {
            page_id: p.page_id.clone(),
            title: p.title.clone(),
            page_entity: p.page_entity.clone(),
            listings: p
                .listings
                .iter()
                .map(|l| ListingRecord {
                    listing_id: l.listing_id.clone(),
                    kind: l.kind,
                    top_section: l.context.top_section.clone(),
                    section: l.context.section.clone(),
                    top_section_entities: l.context.top_section_entities.clone(),
                    section_entities: l.context.section_entities.clone(),
                    rows: l.rows.clone(),
                    headers: l.headers.clone(),
                })
                .collect(),
        }
    }
}

impl PageRecord {
    fn into_page(self, line: usize) -> Result<Page> {
        let page_entity = self.page_entity;
        let mut listings = Vec::with_capacity(self.listings.len());
        for rec in self.listings {
            let mut rows = rec.rows;
            for m in rows.iter_mut().flat_map(|r| r.mentions.iter_mut()) {
                m.surface = collapse_whitespace(&m.surface);
                if m.surface.is_empty() {
                    return Err(Error::record(line, "surface", "empty after whitespace normalization"));
                }
                if m.link_kind == LinkKind::Red && m.entity_ref.is_none() {
                    return Err(Error::record(line, "entity_ref", "red link without a target"));
                }
            }
            listings.push(Listing {
                listing_id: rec.listing_id,
                kind: rec.kind,
                rows,
                context: ListingContext {
                    page_entity: page_entity.clone(),
                    top_section: normalize_title(&rec.top_section),
                    section: normalize_title(&rec.section),
                    top_section_entities: rec.top_section_entities,
                    section_entities: rec.section_entities,
                },
                headers: rec.headers,
            });
        }
        Ok(Page {
            page_id: self.page_id,
            title: self.title,
            page_entity,
            listings,
        })
    }
}

fn field_of(err: &serde_json::Error) -> String {
    let msg = err.to_string();
    msg.split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "record".to_string())
}

/// Parses pages from newline-delimited records. Blank lines are skipped.
pub fn read_pages(reader: impl BufRead) -> Result<Vec<Page>> {
    let mut pages = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::record(lineno, "record", e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PageRecord = serde_json::from_str(&line)
            .map_err(|e| Error::record(lineno, field_of(&e), e.to_string()))?;
        pages.push(rec.into_page(lineno)?);
    }
    Ok(pages)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<(Corpus, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_pages(read_pages(BufReader::new(file))?)
}

pub fn write_corpus(corpus: &Corpus, mut w: impl Write) -> std::io::Result<()> {
    for page in &corpus.pages {
        let line = serde_json::to_string(&PageRecord::from(page)).map_err(std::io::Error::other)?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub pages: usize,
    pub listings: usize,
    pub lists: usize,
    pub tables: usize,
    pub rows: Option<Summary>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let rows: Vec<usize> = corpus.listings().map(|(_, l)| l.rows.len()).collect();
    let tables = corpus
        .listings()
        .filter(|(_, l)| l.kind == ListingKind::Table)
        .count();
    CorpusStats {
        pages: corpus.pages.len(),
        listings: rows.len(),
        lists: rows.len() - tables,
        tables,
        rows: Summary::of(&rows),
    }
}

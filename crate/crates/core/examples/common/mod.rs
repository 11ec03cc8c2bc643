//! Loading the bundled Gilby Clarke fixture.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use listing_rules::corpus::Corpus;
use listing_rules::kg::{load_kg, KgPaths, KnowledgeGraph};
use listing_rules::tagger::{load_gazetteer, Gazetteer};
use listing_rules::wikitext::{expand_links, extract_from_wikitext};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/gilby_clarke")
}

pub fn kg() -> KnowledgeGraph {
    let dir = fixture_dir();
    load_kg(&KgPaths {
        triples: Some(&dir.join("kg.tsv")),
        schema: Some(&dir.join("schema.tsv")),
        hierarchy: Some(&dir.join("hierarchy.tsv")),
        restrictions: Some(&dir.join("restrictions.tsv")),
    })
    .expect("fixture graph loads")
}

pub fn gazetteer() -> Gazetteer {
    load_gazetteer(fixture_dir().join("gazetteer.tsv")).expect("fixture gazetteer loads")
}

/// The markup page as a corpus, links colored by the graph's entities.
pub fn corpus(kg: &KnowledgeGraph) -> Corpus {
    let markup = std::fs::read_to_string(fixture_dir().join("markup/Gilby_Clarke.wiki")).expect("markup");
    let mut known: BTreeSet<String> = kg.relation_triples().iter().map(|t| t.0.clone()).collect();
    known.extend(kg.type_triples().iter().map(|t| t.0.clone()));
    known.insert("Gilby Clarke".into());
    let page = expand_links(&extract_from_wikitext(&markup, "Gilby Clarke", &known).page);
    Corpus::from_pages(vec![page]).expect("one page").0
}

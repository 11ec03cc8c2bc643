//! Tags the fixture with a gazetteer plus the shape fallback, then shows
//! the per-type tag distributions.

mod common;

use listing_rules::subjects::detect_subject_entities;
use listing_rules::tagger::{build_tagprob, harmonize_tags, shape_tag, tag_corpus};

fn main() {
    let kg = common::kg();
    let corpus = common::corpus(&kg);
    for s in ["Gilby Clarke", "1994", "Geffen Records", "swag"] {
        println!("shape({s:?}) = {}", shape_tag(s));
    }
    let tagged = tag_corpus(&corpus, &common::gazetteer(), "shape").expect("known fallback");
    let tagged = harmonize_tags(&tagged, &kg);
    let with_se = detect_subject_entities(&tagged, &kg);
    let model = build_tagprob(&with_se, &kg);
    for t in model.types() {
        let dist = model.distribution(t).expect("listed type");
        let sum: f64 = dist.values().sum();
        println!("{t}: {dist:?} (sum {sum})");
    }
    println!("tagprob(Album, PERSON) = {:?}", model.tagprob("Album", "PERSON"));
}

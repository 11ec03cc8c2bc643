//! Generates, filters and completes assertions for the fixture.

mod common;

use listing_rules::assertions::{infer_from_restrictions, novel_entities, Status};
use listing_rules::pipeline::{filter_stage, generate_stage, prepare_corpus, Settings};
use listing_rules::rules::mine_rules;

fn main() {
    let kg = common::kg();
    let settings = Settings::default();
    let corpus = prepare_corpus(&common::corpus(&kg), &kg, &common::gazetteer(), "none", false).expect("tagging");
    let rules = mine_rules(&corpus, &kg, &settings.mining());
    let (generated, report) = generate_stage(&corpus, &kg, &rules, &settings.thresholds);
    println!("{} assertions, {:?}", generated.len(), report);
    let (filtered, report) = filter_stage(generated, &corpus, &kg, settings.tau_tag);
    println!("{report:?}");
    let (done, inferred) = infer_from_restrictions(filtered, &kg);
    println!("{inferred} inferred from restrictions");
    for a in done.iter().filter(|a| a.status == Status::Accepted) {
        let (s, p, o) = a.triple();
        println!("  {s} {p} {o}");
    }
    for n in novel_entities(&corpus, &kg) {
        println!("novel: {} ({:?}, {} mentions)", n.id, n.surface, n.mentions);
    }
}

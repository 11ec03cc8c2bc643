//! Mines rules on the fixture and prints the selected ones in the rules
//! file format.

mod common;

use listing_rules::pipeline::{prepare_corpus, Settings};
use listing_rules::rules::{mine_rules, select_rules, write_rules};

fn main() {
    let kg = common::kg();
    let corpus = prepare_corpus(&common::corpus(&kg), &kg, &common::gazetteer(), "none", false).expect("tagging");
    let settings = Settings::default();
    let rules = mine_rules(&corpus, &kg, &settings.mining());
    let selected = select_rules(&rules, &settings.thresholds);
    println!("{} rules mined, {} selected", rules.len(), selected.len());
    let discography: Vec<_> = selected
        .into_iter()
        .filter(|r| r.antecedent.to_string() == "topSection=discography")
        .collect();
    write_rules(&discography, std::io::stdout().lock()).expect("stdout");
}

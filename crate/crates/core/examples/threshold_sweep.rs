//! Sweeps type-rule confidence on a synthetic world with low-confidence
//! noise contexts and prints the tagfit curve.

use listing_rules::rules::{mine_rules, MiningConfig, RuleKind};
use listing_rules::synth::{generate_world, WorldConfig};
use listing_rules::tagger::build_tagprob;
use listing_rules::thresholds::{sweep_thresholds, write_curve, Metric};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let w = generate_world(&WorldConfig::sweep(seed)).expect("valid preset");
    let rules = mine_rules(&w.corpus, &w.kg, &MiningConfig::default());
    let model = build_tagprob(&w.corpus, &w.kg);
    let sweep = sweep_thresholds(&rules, &w.corpus, &w.kg, &model, Metric::Conf, RuleKind::Type, 0.05, 0)
        .expect("some bin has assertions");
    write_curve(&sweep, std::io::stdout().lock()).expect("stdout");
}

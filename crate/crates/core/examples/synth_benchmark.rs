//! Plants rules in a synthetic world, mines them back and compares the
//! rule path with the frequency baseline.

use std::time::Instant;

use listing_rules::assertions::{entity_report, Assertion, Status};
use listing_rules::pipeline::{baseline_stage, filter_stage, generate_stage, Settings};
use listing_rules::rules::{mine_rules, select_rules};
use listing_rules::synth::{generate_world, score, score_rules, WorldConfig};

fn accepted(a: &[Assertion]) -> Vec<Assertion> {
    a.iter().filter(|a| a.status == Status::Accepted).cloned().collect()
}

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let start = Instant::now();
    let w = generate_world(&WorldConfig { seed, ..Default::default() }).expect("valid config");
    let settings = Settings::default();
    let rules = mine_rules(&w.corpus, &w.kg, &settings.mining());
    let selected = select_rules(&rules, &settings.thresholds);
    let rec = score_rules(&selected, &w.corpus, &w.kg, &w.truth);
    println!(
        "{} listings: {}/{} planted rules recovered, {} of {} selected spurious, {:.1?}",
        w.corpus.listing_count(),
        rec.recovered,
        rec.planted,
        rec.spurious.len(),
        rec.selected,
        start.elapsed()
    );

    let (generated, _) = generate_stage(&w.corpus, &w.kg, &rules, &settings.thresholds);
    let (by_rules, _) = filter_stage(generated, &w.corpus, &w.kg, settings.tau_tag);
    let (by_baseline, _) = filter_stage(baseline_stage(&w.corpus, &w.kg, &settings), &w.corpus, &w.kg, settings.tau_tag);
    for (name, a) in [("rules", &by_rules), ("baseline", &by_baseline)] {
        let m = score(a, &w.truth, &w.kg);
        let e = entity_report(&accepted(a), &w.kg);
        println!(
            "{name}: {} accepted, correctness {:.3}, {} novel subjects",
            e.assertions,
            m.correctness.unwrap_or(f64::NAN),
            e.novel_subjects
        );
    }
}

//! Marks subject entities in the fixture's lists and table.

mod common;

use listing_rules::subjects::{detect_subject_entities, se_stats};

fn main() {
    let kg = common::kg();
    let corpus = detect_subject_entities(&common::corpus(&kg), &kg);
    for (page, l) in corpus.listings() {
        println!("{} {:?}: {:?}", l.listing_id, l.context.section, l.subject_ids(&page.page_id));
    }
    println!("{:?}", se_stats(&corpus));
}

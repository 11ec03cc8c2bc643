mod support;

use std::collections::BTreeMap;

use listing_rules::assertions::{assertion_tagprob, dedupe_and_subtract, generate, tag_filter, Status};
use listing_rules::kg::Predicate;
use listing_rules::rules::{build_context, mine_rules, select_rules, ContextPattern, MiningConfig, RuleKind};
use listing_rules::synth::{generate_world, score_rules, WorldConfig};
use listing_rules::tagger::build_tagprob;
use listing_rules::thresholds::{sweep_thresholds, Metric};
use listing_rules::wikitext::expand_links;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn small() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(small())]

    #[test]
    fn kg_counts_are_bounded(seed in 0u64..1000, n in 2usize..60) {
        let (corpus, kg) = support::random_world(seed, n);
        for (page, l) in corpus.listings() {
            let se = l.subject_ids(&page.page_id);
            for s in &se {
                for (p, o) in kg.relation_pairs(s) {
                    let f = kg.freq(&se, &p, o).expect("p is present");
                    prop_assert!(f.hits >= 1 && f.hits <= f.total && f.total <= se.len());
                    prop_assert!((0.0..=1.0).contains(&f.value()));
                }
            }
            prop_assert!(kg.count_p(&se, &Predicate::rdf_type()) <= se.len());
        }
    }

    #[test]
    fn expanding_links_twice_changes_nothing(seed in 0u64..1000, n in 2usize..40) {
        let (corpus, _) = support::random_world(seed, n);
        for page in &corpus.pages {
            let once = expand_links(page);
            prop_assert_eq!(expand_links(&once), once);
        }
    }

    #[test]
    fn patterns_match_the_contexts_they_come_from(seed in 0u64..1000, n in 2usize..40) {
        let (corpus, kg) = support::random_world(seed, n);
        for (_, l) in corpus.listings() {
            let ctx = build_context(l, &kg);
            for p in ctx.subpatterns(5) {
                prop_assert!(p.matches(&ctx));
                prop_assert!(p.len() <= 5);
            }
        }
    }

    #[test]
    fn support_shrinks_as_patterns_grow(seed in 0u64..1000, n in 2usize..80) {
        let (corpus, kg) = support::random_world(seed, n);
        let rules = mine_rules(&corpus, &kg, &MiningConfig::default());
        let supp: BTreeMap<&ContextPattern, usize> = rules.iter().map(|r| (&*r.antecedent, r.supp)).collect();
        for (pattern, &s) in &supp {
            for i in 0..pattern.len() {
                let mut atoms = pattern.atoms().to_vec();
                atoms.remove(i);
                if atoms.is_empty() {
                    continue;
                }
                let parent = ContextPattern::new(atoms).unwrap();
                if let Some(&ps) = supp.get(&parent) {
                    prop_assert!(ps >= s, "{parent} has {ps}, {pattern} has {s}");
                }
            }
        }
    }

    #[test]
    fn mining_ignores_thread_count(seed in 0u64..1000, n in 2usize..80) {
        let (corpus, kg) = support::random_world(seed, n);
        let mine = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mine_rules(&corpus, &kg, &MiningConfig::default()))
        };
        prop_assert_eq!(mine(1), mine(4));
    }

    #[test]
    fn metrics_stay_in_range(seed in 0u64..1000, n in 2usize..80) {
        let (corpus, kg) = support::random_world(seed, n);
        for r in mine_rules(&corpus, &kg, &MiningConfig::default()) {
            prop_assert!(r.supp >= 1 && r.hits >= 1 && r.hits <= r.total);
            prop_assert!(r.conf > 0.0 && r.conf <= 1.0);
            prop_assert!((0.0..=1.0).contains(&r.cons));
            prop_assert_eq!(r.covered_listing_ids.len(), r.supp);
        }
    }

    #[test]
    fn tagprob_sums_to_one(seed in 0u64..200) {
        let w = generate_world(&WorldConfig { n_pages: 30, n_noise_listings: 10, seed, ..Default::default() }).unwrap();
        let model = build_tagprob(&w.corpus, &w.kg);
        for t in model.types() {
            let sum: f64 = model.distribution(t).unwrap().values().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn tag_filter_accepts_exactly_above_tau(seed in 0u64..200, tau in 0.0f64..1.0) {
        let w = generate_world(&WorldConfig { n_pages: 30, n_noise_listings: 10, seed, ..Default::default() }).unwrap();
        let rules = mine_rules(&w.corpus, &w.kg, &MiningConfig::default());
        let selected = select_rules(&rules, &Default::default());
        let (raw, _) = generate(&w.corpus, &w.kg, &selected);
        let model = build_tagprob(&w.corpus, &w.kg);
        let (filtered, report) = tag_filter(dedupe_and_subtract(raw, &w.kg), &model, &w.kg, tau);
        let mut accepted = 0;
        for a in filtered.iter().filter(|a| a.status != Status::DuplicateOfKg) {
            let above = assertion_tagprob(a, &model, &w.kg).is_some_and(|p| p > tau);
            prop_assert_eq!(a.status == Status::Accepted, above);
            accepted += above as usize;
        }
        prop_assert_eq!(report.accepted, accepted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sweep_is_order_invariant_and_cumulative(seed in 0u64..100, shuffle in 0u64..1000) {
        let w = generate_world(&WorldConfig { n_pages: 60, n_noise_contexts: 4, n_noise_listings: 20, seed, ..WorldConfig::sweep(seed) }).unwrap();
        let mut rules = mine_rules(&w.corpus, &w.kg, &MiningConfig::default());
        let model = build_tagprob(&w.corpus, &w.kg);
        let sweep = |rules: &[_]| sweep_thresholds(rules, &w.corpus, &w.kg, &model, Metric::Conf, RuleKind::Type, 0.05, 0).unwrap();
        let a = sweep(&rules);
        rules.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle));
        prop_assert_eq!(&a, &sweep(&rules));

        let (mut sum, mut count) = (0.0, 0usize);
        for b in &a.bins {
            if let Some(t) = b.tagfit {
                sum += t * b.count as f64;
                count += b.count;
            }
            match b.cumulative {
                Some(c) => prop_assert!((c - sum / count as f64).abs() < 1e-12),
                None => prop_assert_eq!(count, 0),
            }
        }
    }

    #[test]
    /// No noise of any kind and nothing hidden from the graph.
    fn clean_worlds_give_back_their_rules(seed in 0u64..100) {
        let w = generate_world(&WorldConfig {
            n_pages: 120,
            kg_visibility: 1.0,
            se_noise: 0.0,
            tag_noise: 0.0,
            novel_rate: 0.0,
            fresh_rate: 0.0,
            n_noise_listings: 0,
            generic_section_rate: 0.0,
            seed,
            ..Default::default()
        })
        .unwrap();
        let rules = mine_rules(&w.corpus, &w.kg, &MiningConfig::default());
        let rec = score_rules(&select_rules(&rules, &Default::default()), &w.corpus, &w.kg, &w.truth);
        prop_assert_eq!(rec.recovered, rec.planted, "missing {:?}", rec.missing);
        prop_assert!(rec.spurious.is_empty(), "spurious {:?}", rec.spurious.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::world::{GroundTruth, PlantedRule};
use crate::assertions::{Assertion, Status};
use crate::corpus::{Corpus, Listing};
use crate::kg::KnowledgeGraph;
use crate::rules::{build_context, resolve_placeholder, ContextAtoms, Rule, Target};

/// Correctness of accepted assertions against the complete graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub assessed: usize,
    pub correct: usize,
    pub correctness: Option<f64>,
    /// Half width of the 95% normal interval around `correctness`.
    pub interval: Option<f64>,
    pub novel_assessed: usize,
    pub novel_correct: usize,
    pub novel_precision: Option<f64>,
    /// Wrong because the subject is not a true subject of its listing.
    pub wrong_subject: usize,
    /// Wrong although the subject is right.
    pub rule_misapplied: usize,
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

pub fn score(assertions: &[Assertion], truth: &GroundTruth, kg: &KnowledgeGraph) -> Metrics {
    let mut m = Metrics::default();
    for a in assertions.iter().filter(|a| a.status == Status::Accepted) {
        m.assessed += 1;
        let novel = !kg.contains_entity(&a.subject);
        let ok = truth.holds(&a.subject, &a.predicate, &a.object);
        if novel {
            m.novel_assessed += 1;
            m.novel_correct += usize::from(ok);
        }
        if ok {
            m.correct += 1;
        } else if a
            .provenance
            .iter()
            .any(|p| truth.is_true_subject(&p.listing_id, &a.subject))
        {
            m.rule_misapplied += 1;
        } else {
            m.wrong_subject += 1;
        }
    }
    m.correctness = ratio(m.correct, m.assessed);
    m.interval = m
        .correctness
        .map(|p| 1.96 * (p * (1.0 - p) / m.assessed as f64).sqrt());
    m.novel_precision = ratio(m.novel_correct, m.novel_assessed);
    m
}

pub fn write_metrics(m: &Metrics, mut w: impl Write) -> std::io::Result<()> {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "NA".into());
    writeln!(w, "assessed\t{}", m.assessed)?;
    writeln!(w, "correct\t{}", m.correct)?;
    writeln!(w, "correctness\t{}", opt(m.correctness))?;
    writeln!(w, "interval\t{}", opt(m.interval))?;
    writeln!(w, "novel_assessed\t{}", m.novel_assessed)?;
    writeln!(w, "novel_precision\t{}", opt(m.novel_precision))?;
    writeln!(w, "error_wrong_subject\t{}", m.wrong_subject)?;
    writeln!(w, "error_rule_misapplied\t{}", m.rule_misapplied)?;
    writeln!(w, "error_parse\tNA")?;
    writeln!(w, "error_complex_semantics\tNA")
}

/// Whether the rule's consequent holds in the complete graph for every
/// true subject of every listing it matches. Listings where a placeholder
/// resolves to nothing are skipped.
pub fn rule_holds(
    rule: &Rule,
    contexts: &[(&Listing, ContextAtoms)],
    kg: &KnowledgeGraph,
    truth: &GroundTruth,
) -> bool {
    let p = &rule.consequent.predicate;
    contexts
        .iter()
        .filter(|(_, ctx)| rule.antecedent.matches(ctx))
        .all(|(listing, _)| {
            let objects: Vec<&str> = match &rule.consequent.target {
                Target::Type(t) | Target::Entity(t) => vec![t.as_str()],
                Target::Placeholder(x) => resolve_placeholder(*x, listing, Some(&rule.antecedent), kg),
            };
            let empty = BTreeSet::new();
            let subjects = truth.subjects.get(&listing.listing_id).unwrap_or(&empty);
            subjects
                .iter()
                .all(|s| objects.iter().all(|o| truth.holds(s, p, o)))
        })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleRecovery {
    pub planted: usize,
    pub recovered: usize,
    pub missing: Vec<PlantedRule>,
    pub selected: usize,
    pub spurious: Vec<Rule>,
}

impl RuleRecovery {
    pub fn recall(&self) -> f64 {
        ratio(self.recovered, self.planted).unwrap_or(1.0)
    }

    pub fn spurious_rate(&self) -> f64 {
        ratio(self.spurious.len(), self.selected).unwrap_or(0.0)
    }
}

/// Compares selected rules with the planted ones and finds selected rules
/// contradicted by the complete graph.
pub fn score_rules(selected: &[Rule], corpus: &Corpus, kg: &KnowledgeGraph, truth: &GroundTruth) -> RuleRecovery {
    use rayon::prelude::*;
    let contexts: Vec<(&Listing, ContextAtoms)> = corpus
        .listings()
        .map(|(_, l)| (l, build_context(l, kg)))
        .collect();
    let keys: BTreeSet<_> = selected
        .iter()
        .map(|r| ((*r.antecedent).clone(), r.consequent.clone()))
        .collect();
    let missing: Vec<PlantedRule> = truth
        .planted
        .iter()
        .filter(|p| !keys.contains(&(p.antecedent.clone(), p.consequent.clone())))
        .cloned()
        .collect();
    let spurious = selected
        .par_iter()
        .filter(|r| !rule_holds(r, &contexts, kg, truth))
        .cloned()
        .collect();
    RuleRecovery {
        planted: truth.planted.len(),
        recovered: truth.planted.len() - missing.len(),
        missing,
        selected: selected.len(),
        spurious,
    }
}

/// Proportional allocation over strata (largest remainder), uniform within
/// each stratum. Returns the sample and whether `n` exceeded the population.
pub fn stratified_sample<T: Clone>(
    items: &[T],
    stratum: impl Fn(&T) -> String,
    n: usize,
    seed: u64,
) -> (Vec<T>, bool) {
    if n >= items.len() {
        return (items.to_vec(), n > items.len());
    }
    let mut strata: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, it) in items.iter().enumerate() {
        strata.entry(stratum(it)).or_default().push(i);
    }
    let total = items.len();
    let mut alloc: Vec<(usize, usize, f64)> = strata
        .values()
        .enumerate()
        .map(|(k, v)| {
            let exact = n as f64 * v.len() as f64 / total as f64;
            (k, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut left = n - alloc.iter().map(|a| a.1).sum::<usize>();
    let mut order: Vec<usize> = (0..alloc.len()).collect();
    order.sort_by(|&a, &b| alloc[b].2.total_cmp(&alloc[a].2).then(a.cmp(&b)));
    for i in order {
        if left == 0 {
            break;
        }
        alloc[i].1 += 1;
        left -= 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for ((_, members), (_, take, _)) in strata.iter().zip(alloc) {
        let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, members.len(), take)
            .into_iter()
            .map(|j| members[j])
            .collect();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|i| items[i].clone()));
    }
    (out, false)
}

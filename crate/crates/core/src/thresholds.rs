//! Choosing confidence and consistency thresholds from the tag plausibility
//! (tagfit) of the assertions each band of rules produces.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::assertions::{assertion_tagprob, dedupe_and_subtract, generate, Assertion, Status};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;
use crate::rules::{Rule, RuleKind};
use crate::tagger::TagModel;

pub const DEFAULT_BIN_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Conf,
    Cons,
}

impl Metric {
    pub fn of(self, rule: &Rule) -> f64 {
        match self {
            Metric::Conf => rule.conf,
            Metric::Cons => rule.cons,
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conf" => Ok(Metric::Conf),
            "cons" => Ok(Metric::Cons),
            other => Err(Error::Usage(format!("unknown metric `{other}` (conf|cons)"))),
        }
    }
}

/// Mean tagprob over the assertions; unknown entries count as zero.
/// `None` for an empty set.
pub fn tagfit(assertions: &[Assertion], model: &TagModel, kg: &KnowledgeGraph) -> Option<f64> {
    if assertions.is_empty() {
        return None;
    }
    let sum: f64 = assertions
        .iter()
        .map(|a| assertion_tagprob(a, model, kg).unwrap_or(0.0))
        .sum();
    Some(sum / assertions.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub rules: usize,
    pub count: usize,
    pub tagfit: Option<f64>,
    /// tagfit over all assertions from this bin up to 1.0.
    pub cumulative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub metric: Metric,
    pub kind: &'static str,
    pub bin_width: f64,
    /// Highest bin first.
    pub bins: Vec<Bin>,
    pub recommended: f64,
    pub no_clear_drop: bool,
}

fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// 1-based bin index for the half-open bins `((k-1)w, kw]`; values at or
/// below zero land in the first bin.
pub fn bin_index(value: f64, width: f64, bins: usize) -> usize {
    ((value / width - 1e-9).ceil() as i64).clamp(1, bins as i64) as usize
}

/// Per-bin tagfit values in, recommendation out: the lower edge of the bin
/// just above the largest drop between adjacent non-empty bins.
pub fn steepest_drop(bins: &[Bin]) -> Result<(f64, bool)> {
    let filled: Vec<(&Bin, f64)> = bins.iter().filter_map(|b| b.tagfit.map(|t| (b, t))).collect();
    if filled.is_empty() {
        return Err(Error::EmptySweep);
    }
    let mut best: Option<(f64, f64)> = None;
    for w in filled.windows(2) {
        let drop = w[0].1 - w[1].1;
        if drop > 1e-12 && best.is_none_or(|(d, _)| drop > d + 1e-12) {
            best = Some((drop, w[0].0.lower));
        }
    }
    Ok(match best {
        Some((_, edge)) => (edge, false),
        None => (filled.last().expect("non-empty").0.lower, true),
    })
}

/// Bins rules of one kind by `metric`, generates each bin's assertions
/// (deduplicated, minus those already in the graph) and scores them.
/// Only rules above `min_support` take part.
#[allow(clippy::too_many_arguments)]
pub fn sweep_thresholds(
    rules: &[Rule],
    corpus: &Corpus,
    kg: &KnowledgeGraph,
    model: &TagModel,
    metric: Metric,
    kind: RuleKind,
    bin_width: f64,
    min_support: usize,
) -> Result<Sweep> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::InvalidConfig(format!("bin width must be in (0, 1], got {bin_width}")));
    }
    let n = (1.0 / bin_width).round().max(1.0) as usize;
    let mut grouped: Vec<Vec<Rule>> = vec![Vec::new(); n];
    for r in rules.iter().filter(|r| r.kind() == kind && r.supp > min_support) {
        grouped[bin_index(metric.of(r), bin_width, n) - 1].push(r.clone());
    }
    let mut bins = Vec::with_capacity(n);
    let (mut cum_sum, mut cum_count) = (0.0, 0usize);
    for k in (1..=n).rev() {
        let group = &grouped[k - 1];
        let (raw, _) = generate(corpus, kg, group);
        let fresh: Vec<Assertion> = dedupe_and_subtract(raw, kg)
            .into_iter()
            .filter(|a| a.status == Status::Raw)
            .collect();
        let fit = tagfit(&fresh, model, kg);
        if let Some(t) = fit {
            cum_sum += t * fresh.len() as f64;
            cum_count += fresh.len();
        }
        bins.push(Bin {
            lower: round9((k - 1) as f64 * bin_width),
            upper: round9((k as f64 * bin_width).min(1.0)),
            rules: group.len(),
            count: fresh.len(),
            tagfit: fit,
            cumulative: (cum_count > 0).then(|| cum_sum / cum_count as f64),
        });
    }
    let (recommended, no_clear_drop) = steepest_drop(&bins)?;
    Ok(Sweep {
        metric,
        kind: match kind {
            RuleKind::Type => "type",
            RuleKind::Relation => "relation",
        },
        bin_width,
        bins,
        recommended,
        no_clear_drop,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "NA".into())
}

/// `bin_lower, bin_upper, count, tagfit, cumulative_tagfit` per bin, then
/// a recommendation line.
pub fn write_curve(sweep: &Sweep, mut w: impl Write) -> std::io::Result<()> {
    for b in &sweep.bins {
        writeln!(
            w,
            "{:.2}\t{:.2}\t{}\t{}\t{}",
            b.lower,
            b.upper,
            b.count,
            opt(b.tagfit),
            opt(b.cumulative)
        )?;
    }
    let metric = match sweep.metric {
        Metric::Conf => "conf",
        Metric::Cons => "cons",
    };
    write!(w, "# recommended {} {metric} threshold: {:.2}", sweep.kind, sweep.recommended)?;
    if sweep.no_clear_drop {
        write!(w, " (no clear drop)")?;
    }
    writeln!(w)
}

pub fn write_chart_json(sweep: &Sweep, w: impl Write) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(w, sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertions::Provenance;
    use crate::corpus::{LinkKind, Listing, ListingContext, ListingKind, Mention, Page, Row, SubjectMark};
    use crate::kg::{KgBuilder, Predicate};
    use crate::tagger::build_tagprob;

    fn bin(lower: f64, tagfit: Option<f64>) -> Bin {
        Bin {
            lower,
            upper: lower + 0.05,
            rules: 1,
            count: 1,
            tagfit,
            cumulative: None,
        }
    }

    #[test]
    fn recommendation_sits_above_the_drop() {
        let bins = vec![
            bin(0.95, Some(0.85)),
            bin(0.9, Some(0.82)),
            bin(0.85, Some(0.8)),
            bin(0.8, Some(0.4)),
            bin(0.75, None),
            bin(0.7, Some(0.35)),
        ];
        assert_eq!(steepest_drop(&bins).unwrap(), (0.85, false));
    }

    #[test]
    fn flat_curve_flags_no_drop() {
        let bins = vec![bin(0.9, Some(0.5)), bin(0.85, Some(0.5)), bin(0.8, None)];
        assert_eq!(steepest_drop(&bins).unwrap(), (0.85, true));
        assert!(matches!(steepest_drop(&[bin(0.9, None)]), Err(Error::EmptySweep)));
    }

    #[test]
    fn half_open_bins() {
        assert_eq!(bin_index(0.8, 0.05, 20), 16);
        assert_eq!(bin_index(0.8000001, 0.05, 20), 17);
        assert_eq!(bin_index(1.0, 0.05, 20), 20);
        assert_eq!(bin_index(0.0, 0.05, 20), 1);
    }

    // Album/Person tag distributions built from distinct tagged subjects.
    fn tagged_world() -> (Corpus, KnowledgeGraph) {
        let mut b = KgBuilder::new();
        b.schema("artist", Some("Person"), None);
        let mut rows = Vec::new();
        let mut add = |id: &str, ty: &str, tag: &str| {
            b.triple(id, "rdf:type", ty);
            let mut m = Mention::linked(id, id, LinkKind::Blue);
            m.is_subject = SubjectMark::Yes;
            m.ne_tag = Some(tag.into());
            rows.push(Row::new(vec![m]));
        };
        add("a1", "Album", "WORK_OF_ART");
        add("a2", "Album", "WORK_OF_ART");
        add("a3", "Album", "PERSON");
        add("a4", "Album", "ORG");
        add("p1", "Person", "PERSON");
        add("p2", "Person", "PERSON");
        add("p3", "Person", "PERSON");
        add("p4", "Person", "ORG");
        let listing = Listing {
            listing_id: "x::0".into(),
            kind: ListingKind::List,
            rows,
            context: ListingContext::default(),
            headers: vec![],
        };
        let corpus = Corpus {
            pages: vec![Page {
                page_id: "x".into(),
                title: "x".into(),
                page_entity: "x".into(),
                listings: vec![listing],
            }],
            ..Default::default()
        };
        (corpus, b.build())
    }

    fn assertion(s: &str, p: Predicate, o: &str) -> Assertion {
        Assertion {
            subject: s.into(),
            predicate: p,
            object: o.into(),
            status: Status::Raw,
            provenance: Vec::<Provenance>::new(),
        }
    }

    #[test]
    fn tagfit_means_tagprobs() {
        let (corpus, kg) = tagged_world();
        let model = build_tagprob(&corpus, &kg);
        // WORK_OF_ART given Album is 0.5, PERSON given Person is 0.75.
        let set = vec![
            assertion("a1", Predicate::rdf_type(), "Album"),
            assertion("p1", Predicate::rdf_type(), "Person"),
        ];
        assert!((tagfit(&set, &model, &kg).unwrap() - 0.625).abs() < 1e-12);
        let rel = vec![assertion("p2", Predicate::new("artist"), "a1")];
        assert!((tagfit(&rel, &model, &kg).unwrap() - 0.75).abs() < 1e-12);
        let unknown = vec![assertion("p2", Predicate::new("label"), "a1")];
        assert_eq!(tagfit(&unknown, &model, &kg), Some(0.0));
        assert_eq!(tagfit(&[], &model, &kg), None);
    }
}

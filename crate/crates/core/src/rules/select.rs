use super::{Rule, RuleKind};

/// Strict lower bounds on a rule's metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub supp: usize,
    pub conf: f64,
    pub cons: f64,
}

impl Thresholds {
    pub fn admits(&self, rule: &Rule) -> bool {
        rule.supp > self.supp && rule.conf > self.conf && rule.cons > self.cons
    }
}

/// Separate thresholds for type and relation rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionThresholds {
    pub types: Thresholds,
    pub relations: Thresholds,
}

impl SelectionThresholds {
    pub fn for_kind(&self, kind: RuleKind) -> &Thresholds {
        match kind {
            RuleKind::Type => &self.types,
            RuleKind::Relation => &self.relations,
        }
    }

    pub fn for_kind_mut(&mut self, kind: RuleKind) -> &mut Thresholds {
        match kind {
            RuleKind::Type => &mut self.types,
            RuleKind::Relation => &mut self.relations,
        }
    }
}

impl Default for SelectionThresholds {
    fn default() -> Self {
        SelectionThresholds {
            types: Thresholds {
                supp: 0,
                conf: 0.85,
                cons: 0.75,
            },
            relations: Thresholds {
                supp: 2,
                conf: 0.80,
                cons: 0.85,
            },
        }
    }
}

pub fn select_rules(rules: &[Rule], thresholds: &SelectionThresholds) -> Vec<Rule> {
    rules
        .iter()
        .filter(|r| thresholds.for_kind(r.kind()).admits(r))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{Consequent, ContextPattern};
    use crate::kg::Predicate;
    use crate::rules::{Placeholder, Target};
    use std::sync::Arc;

    fn rule(supp: usize, conf: f64, cons: f64) -> Rule {
        Rule {
            antecedent: Arc::new("topSection=discography".parse::<ContextPattern>().unwrap()),
            consequent: Consequent::relation(Predicate::new("artist"), Target::Placeholder(Placeholder::PageEntity)),
            supp,
            conf,
            cons,
            hits: 0,
            total: 0,
            covered_listing_ids: Arc::new(vec![]),
        }
    }

    #[test]
    fn strict_bounds() {
        let t = SelectionThresholds::default();
        assert_eq!(select_rules(&[rule(5, 0.9, 0.9)], &t).len(), 1);
        assert!(select_rules(&[rule(5, 0.8, 0.9)], &t).is_empty());
        assert!(select_rules(&[rule(2, 0.9, 0.9)], &t).is_empty());
        assert_eq!(select_rules(&[rule(3, 0.9, 0.86)], &t).len(), 1);
    }
}

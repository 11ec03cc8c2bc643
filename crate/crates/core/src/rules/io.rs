use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{Consequent, ContextPattern, Rule};
use crate::error::{Error, Result};

/// One rule per line: pattern, predicate, object, supp, conf, cons.
pub fn write_rules(rules: &[Rule], mut w: impl Write) -> std::io::Result<()> {
    for r in rules {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{:.6}\t{:.6}",
            r.antecedent,
            r.consequent.predicate,
            r.consequent.object_text(),
            r.supp,
            r.conf,
            r.cons
        )?;
    }
    Ok(())
}

/// Reads a rules file. Covered listings and exact counts are not part of
/// the format and come back empty.
pub fn read_rules(reader: impl BufRead) -> Result<Vec<Rule>> {
    let mut patterns: BTreeMap<String, Arc<ContextPattern>> = BTreeMap::new();
    let mut rules = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| Error::record(n, "line", e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(Error::record(n, "line", format!("expected 6 fields, found {}", fields.len())));
        }
        let antecedent = match patterns.get(fields[0]) {
            Some(p) => Arc::clone(p),
            None => {
                let p = Arc::new(
                    fields[0]
                        .parse::<ContextPattern>()
                        .map_err(|e| Error::record(n, "pattern", e.to_string()))?,
                );
                patterns.insert(fields[0].to_string(), Arc::clone(&p));
                p
            }
        };
        let supp = fields[3]
            .parse()
            .map_err(|_| Error::record(n, "supp", format!("not an integer: {}", fields[3])))?;
        let metric = |k: usize, name: &str| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .ok()
                .filter(|v| (0.0..=1.0).contains(v))
                .ok_or_else(|| Error::record(n, name, format!("not a value in [0,1]: {}", fields[k])))
        };
        rules.push(Rule {
            antecedent,
            consequent: Consequent::parse(fields[1], fields[2]),
            supp,
            conf: metric(4, "conf")?,
            cons: metric(5, "cons")?,
            hits: 0,
            total: 0,
            covered_listing_ids: Arc::new(Vec::new()),
        });
    }
    Ok(rules)
}

//! Descriptive rules: context patterns over listing contexts implying a
//! `(predicate, object)` consequent for every subject entity of a listing.

mod baseline;
mod context;
mod io;
mod mining;
mod select;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use baseline::frequency_baseline;
pub use context::{abstract_targets, build_context, resolve_placeholder, ContextAtoms};
pub use io::{read_rules, write_rules};
pub use mining::{mine_rules, MiningConfig};
pub use select::{select_rules, SelectionThresholds, Thresholds};

use crate::error::{Error, Result};
use crate::kg::Predicate;
use crate::text::{escape_field, unescape_field};

/// One of the five context dimensions a pattern can constrain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    PageEntityType,
    TopSection,
    Section,
    TopSectionEntityType,
    SectionEntityType,
}

impl Slot {
    pub const ALL: [Slot; 5] = [
        Slot::PageEntityType,
        Slot::TopSection,
        Slot::Section,
        Slot::TopSectionEntityType,
        Slot::SectionEntityType,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Slot::PageEntityType => "pageEntityType",
            Slot::TopSection => "topSection",
            Slot::Section => "section",
            Slot::TopSectionEntityType => "topSectionEntityType",
            Slot::SectionEntityType => "sectionEntityType",
        }
    }
}

impl FromStr for Slot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Slot::ALL
            .into_iter()
            .find(|slot| slot.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown context slot `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub slot: Slot,
    pub value: String,
}

impl Atom {
    pub fn new(slot: Slot, value: impl Into<String>) -> Self {
        Atom {
            slot,
            value: value.into(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.slot.name(), escape_field(&self.value))
    }
}

/// A rule antecedent: at most one value per slot, at least one slot set.
/// Atoms are kept sorted so equal patterns compare and hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextPattern {
    atoms: Vec<Atom>,
}

impl ContextPattern {
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self> {
        atoms.sort();
        atoms.dedup();
        if atoms.is_empty() {
            return Err(Error::Usage("a context pattern needs at least one atom".into()));
        }
        if atoms.windows(2).any(|w| w[0].slot == w[1].slot) {
            return Err(Error::Usage("a context pattern sets each slot at most once".into()));
        }
        Ok(ContextPattern { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn get(&self, slot: Slot) -> Option<&str> {
        self.atoms
            .iter()
            .find(|a| a.slot == slot)
            .map(|a| a.value.as_str())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The listing context must comprise every atom of the pattern.
    pub fn matches(&self, context: &ContextAtoms) -> bool {
        self.atoms.iter().all(|a| context.contains(a))
    }

    /// Whether every atom of `self` is also in `other`.
    pub fn is_subpattern_of(&self, other: &ContextPattern) -> bool {
        self.atoms.iter().all(|a| other.atoms.contains(a))
    }
}

impl fmt::Display for ContextPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for ContextPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let atoms = s
            .split(';')
            .map(|pair| {
                let (slot, value) = pair
                    .split_once('=')
                    .ok_or_else(|| Error::Usage(format!("malformed pattern atom `{pair}`")))?;
                Ok(Atom::new(slot.parse()?, unescape_field(value)))
            })
            .collect::<Result<Vec<_>>>()?;
        ContextPattern::new(atoms)
    }
}

/// Context entities a consequent object can stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Placeholder {
    PageEntity,
    TopSectionEntity,
    SectionEntity,
}

impl Placeholder {
    pub const ALL: [Placeholder; 3] = [
        Placeholder::PageEntity,
        Placeholder::TopSectionEntity,
        Placeholder::SectionEntity,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Placeholder::PageEntity => "<PageEntity>",
            Placeholder::TopSectionEntity => "<TopSectionEntity>",
            Placeholder::SectionEntity => "<SectionEntity>",
        }
    }

    /// The entity-type slot that narrows which title entities qualify.
    pub fn type_slot(self) -> Option<Slot> {
        match self {
            Placeholder::PageEntity => None,
            Placeholder::TopSectionEntity => Some(Slot::TopSectionEntityType),
            Placeholder::SectionEntity => Some(Slot::SectionEntityType),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Type(String),
    Entity(String),
    Placeholder(Placeholder),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Consequent {
    pub predicate: Predicate,
    pub target: Target,
}

impl Consequent {
    pub fn has_type(ty: impl Into<String>) -> Self {
        Consequent {
            predicate: Predicate::rdf_type(),
            target: Target::Type(ty.into()),
        }
    }

    pub fn relation(predicate: Predicate, target: Target) -> Self {
        Consequent { predicate, target }
    }

    pub fn kind(&self) -> RuleKind {
        if self.predicate.is_type() {
            RuleKind::Type
        } else {
            RuleKind::Relation
        }
    }

    pub fn object_text(&self) -> &str {
        match &self.target {
            Target::Type(t) | Target::Entity(t) => t,
            Target::Placeholder(p) => p.token(),
        }
    }

    pub fn parse(predicate: &str, object: &str) -> Self {
        let predicate: Predicate = predicate.parse().expect("infallible");
        let target = if let Some(p) = Placeholder::ALL.into_iter().find(|p| p.token() == object) {
            Target::Placeholder(p)
        } else if predicate.is_type() {
            Target::Type(object.to_string())
        } else {
            Target::Entity(object.to_string())
        };
        Consequent { predicate, target }
    }
}

impl fmt::Display for Consequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.predicate, self.object_text())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Type,
    Relation,
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "type" => Ok(RuleKind::Type),
            "relation" => Ok(RuleKind::Relation),
            other => Err(Error::Usage(format!("unknown rule kind `{other}` (type|relation)"))),
        }
    }
}

/// A mined rule with its support, confidence and consistency.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub antecedent: Arc<ContextPattern>,
    pub consequent: Consequent,
    pub supp: usize,
    pub conf: f64,
    pub cons: f64,
    /// Numerator and denominator of `conf`.
    pub hits: usize,
    pub total: usize,
    pub covered_listing_ids: Arc<Vec<String>>,
}

impl Rule {
    pub fn kind(&self) -> RuleKind {
        self.consequent.kind()
    }

    pub fn sort_key(&self) -> (&ContextPattern, &Consequent) {
        (&self.antecedent, &self.consequent)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} => {} [supp={}, conf={:.3}, cons={:.3}]",
            self.antecedent, self.consequent, self.supp, self.conf, self.cons
        )
    }
}

pub fn sort_rules(rules: &mut [Rule]) {
    rules.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_text_round_trip_is_sorted() {
        let p = ContextPattern::new(vec![
            Atom::new(Slot::Section, "a;b"),
            Atom::new(Slot::PageEntityType, "Person"),
        ])
        .unwrap();
        let text = p.to_string();
        assert_eq!(text, "pageEntityType=Person;section=a%3Bb");
        assert_eq!(text.parse::<ContextPattern>().unwrap(), p);
    }

    #[test]
    fn pattern_invariants() {
        assert!(ContextPattern::new(vec![]).is_err());
        assert!(ContextPattern::new(vec![Atom::new(Slot::Section, "a"), Atom::new(Slot::Section, "b")]).is_err());
    }

    #[test]
    fn consequent_parsing() {
        let c = Consequent::parse("artist", "<PageEntity>");
        assert_eq!(c.target, Target::Placeholder(Placeholder::PageEntity));
        assert_eq!(Consequent::parse("rdf:type", "Album"), Consequent::has_type("Album"));
        assert_eq!(Consequent::parse("artist", "X").target, Target::Entity("X".into()));
        assert_eq!(Consequent::parse("artist^-1", "X").predicate, Predicate::inverse_of("artist"));
    }
}

//! In-memory knowledge graph with schema metadata and the PCA-based
//! count/frequency statistics used throughout rule mining.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const RDF_TYPE: &str = "rdf:type";
pub const SUBCLASS_OF: &str = "rdfs:subClassOf";
const INVERSE_SUFFIX: &str = "^-1";

/// A predicate, possibly read in the inverse direction (`artist^-1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    name: String,
    inverse: bool,
}

impl Predicate {
    pub fn new(name: impl Into<String>) -> Self {
        Predicate {
            name: name.into(),
            inverse: false,
        }
    }

    pub fn inverse_of(name: impl Into<String>) -> Self {
        Predicate {
            name: name.into(),
            inverse: true,
        }
    }

    pub fn rdf_type() -> Self {
        Predicate::new(RDF_TYPE)
    }

    pub fn is_type(&self) -> bool {
        !self.inverse && self.name == RDF_TYPE
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    /// The predicate name without the inverse marker.
    pub fn base(&self) -> &str {
        &self.name
    }

    pub fn inverted(&self) -> Self {
        Predicate {
            name: self.name.clone(),
            inverse: !self.inverse,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}{INVERSE_SUFFIX}", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

impl FromStr for Predicate {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.strip_suffix(INVERSE_SUFFIX) {
            Some(base) => Predicate::inverse_of(base),
            None => Predicate::new(s),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredicateSchema {
    pub domain: Option<String>,
    pub range: Option<String>,
}

/// `count_po / count_p` kept as its two integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frequency {
    pub hits: usize,
    pub total: usize,
}

impl Frequency {
    pub fn value(self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}

/// Read-only view of one entity: its upward-closed types and all
/// `(predicate, object)` pairs, inverse ones included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityView {
    pub id: String,
    pub types: BTreeSet<String>,
    pub pairs: BTreeSet<(Predicate, String)>,
}

type EdgeIndex = HashMap<String, BTreeMap<String, BTreeSet<String>>>;

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    direct_types: HashMap<String, BTreeSet<String>>,
    closed_types: HashMap<String, BTreeSet<String>>,
    ancestors: HashMap<String, BTreeSet<String>>,
    parents: BTreeMap<String, BTreeSet<String>>,
    types: BTreeSet<String>,
    out_edges: EdgeIndex,
    in_edges: EdgeIndex,
    by_pred_obj: HashMap<(String, String), BTreeSet<String>>,
    predicates: BTreeSet<String>,
    schema: BTreeMap<String, PredicateSchema>,
    restrictions: BTreeMap<String, BTreeSet<(String, String)>>,
    relation_triples: Vec<(String, String, String)>,
    type_triples: Vec<(String, String)>,
    entities: HashSet<String>,
    warnings: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct KgBuilder {
    relations: BTreeSet<(String, String, String)>,
    types: BTreeSet<(String, String)>,
    subclass: BTreeSet<(String, String)>,
    schema: BTreeMap<String, PredicateSchema>,
    schema_given: bool,
    restrictions: BTreeSet<(String, String, String)>,
}

impl KgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// `rdf:type` and `rdfs:subClassOf` triples are routed to the type and
    /// hierarchy stores.
    pub fn triple(&mut self, s: &str, p: &str, o: &str) -> &mut Self {
        match p {
            RDF_TYPE => {
                self.types.insert((s.to_string(), o.to_string()));
            }
            SUBCLASS_OF => {
                self.subclass.insert((s.to_string(), o.to_string()));
            }
            _ => {
                self.relations.insert((s.to_string(), p.to_string(), o.to_string()));
            }
        }
        self
    }

    pub fn schema(&mut self, predicate: &str, domain: Option<&str>, range: Option<&str>) -> &mut Self {
        self.schema_given = true;
        self.schema.insert(
            predicate.to_string(),
            PredicateSchema {
                domain: domain.map(str::to_string),
                range: range.map(str::to_string),
            },
        );
        self
    }

    pub fn subclass(&mut self, child: &str, parent: &str) -> &mut Self {
        self.subclass.insert((child.to_string(), parent.to_string()));
        self
    }

    pub fn restriction(&mut self, ty: &str, predicate: &str, object: &str) -> &mut Self {
        self.restrictions
            .insert((ty.to_string(), predicate.to_string(), object.to_string()));
        self
    }

    pub fn build(&self) -> KnowledgeGraph {
        let mut kg = KnowledgeGraph::default();
        for (child, parent) in &self.subclass {
            kg.parents.entry(child.clone()).or_default().insert(parent.clone());
            kg.types.insert(child.clone());
            kg.types.insert(parent.clone());
        }
        for (s, t) in &self.types {
            kg.direct_types.entry(s.clone()).or_default().insert(t.clone());
            kg.types.insert(t.clone());
            kg.entities.insert(s.clone());
            kg.type_triples.push((s.clone(), t.clone()));
        }
        for (s, p, o) in &self.relations {
            kg.out_edges
                .entry(s.clone())
                .or_default()
                .entry(p.clone())
                .or_default()
                .insert(o.clone());
            kg.in_edges
                .entry(o.clone())
                .or_default()
                .entry(p.clone())
                .or_default()
                .insert(s.clone());
            kg.by_pred_obj
                .entry((p.clone(), o.clone()))
                .or_default()
                .insert(s.clone());
            kg.predicates.insert(p.clone());
            kg.entities.insert(s.clone());
            kg.entities.insert(o.clone());
            kg.relation_triples.push((s.clone(), p.clone(), o.clone()));
        }
        for (p, sch) in &self.schema {
            kg.predicates.insert(p.clone());
            kg.types.extend(sch.domain.iter().cloned());
            kg.types.extend(sch.range.iter().cloned());
        }
        kg.schema = self.schema.clone();
        if self.schema_given {
            let missing: BTreeSet<&String> = kg
                .predicates
                .iter()
                .filter(|p| !self.schema.contains_key(*p))
                .collect();
            for p in missing {
                kg.warnings
                    .push(format!("predicate `{p}` has no schema entry; domain and range unknown"));
            }
        }
        for (t, p, o) in &self.restrictions {
            kg.types.insert(t.clone());
            kg.restrictions
                .entry(t.clone())
                .or_default()
                .insert((p.clone(), o.clone()));
        }
        let all_types: Vec<String> = kg.types.iter().cloned().collect();
        for t in all_types {
            let anc = kg.compute_ancestors(&t);
            kg.ancestors.insert(t, anc);
        }
        let closed: HashMap<String, BTreeSet<String>> = kg
            .direct_types
            .iter()
            .map(|(e, ts)| {
                let mut all = BTreeSet::new();
                for t in ts {
                    all.extend(kg.ancestors[t].iter().cloned());
                }
                (e.clone(), all)
            })
            .collect();
        kg.closed_types = closed;
        kg
    }
}

impl KnowledgeGraph {
    fn compute_ancestors(&self, t: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![t.to_string()];
        while let Some(cur) = stack.pop() {
            if seen.insert(cur.clone()) {
                if let Some(ps) = self.parents.get(&cur) {
                    stack.extend(ps.iter().cloned());
                }
            }
        }
        seen
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn types(&self) -> &BTreeSet<String> {
        &self.types
    }

    pub fn predicates(&self) -> &BTreeSet<String> {
        &self.predicates
    }

    /// Types of `t` and all its ancestors, `t` included.
    pub fn ancestors(&self, t: &str) -> BTreeSet<String> {
        self.ancestors
            .get(t)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([t.to_string()]))
    }

    pub fn is_subtype_of(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.ancestors.get(sub).is_some_and(|a| a.contains(sup))
    }

    /// Upward-closed types of an entity.
    pub fn types_of(&self, entity: &str) -> Option<&BTreeSet<String>> {
        self.closed_types.get(entity)
    }

    pub fn direct_types_of(&self, entity: &str) -> Option<&BTreeSet<String>> {
        self.direct_types.get(entity)
    }

    pub fn contains_entity(&self, entity: &str) -> bool {
        self.entities.contains(entity)
    }

    pub fn schema_of(&self, p: &Predicate) -> PredicateSchema {
        let base = self.schema.get(p.base()).cloned().unwrap_or_default();
        if p.is_inverse() {
            PredicateSchema {
                domain: base.range,
                range: base.domain,
            }
        } else {
            base
        }
    }

    /// Domain of `p`, or for an inverse predicate the range of the original.
    pub fn domain_of(&self, p: &Predicate) -> Option<String> {
        self.schema_of(p).domain
    }

    pub fn restrictions(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.restrictions
            .iter()
            .flat_map(|(t, set)| set.iter().map(move |(p, o)| (t.as_str(), p.as_str(), o.as_str())))
    }

    pub fn restrictions_of(&self, ty: &str) -> impl Iterator<Item = (&str, &str)> {
        self.restrictions
            .get(ty)
            .into_iter()
            .flat_map(|set| set.iter().map(|(p, o)| (p.as_str(), o.as_str())))
    }

    /// Raw relation triples in sorted order.
    pub fn relation_triples(&self) -> &[(String, String, String)] {
        &self.relation_triples
    }

    /// Raw `(entity, type)` assertions in sorted order.
    pub fn type_triples(&self) -> &[(String, String)] {
        &self.type_triples
    }

    pub fn subclass_pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parents
            .iter()
            .flat_map(|(c, ps)| ps.iter().map(move |p| (c.as_str(), p.as_str())))
    }

    fn edges(&self, s: &str, p: &Predicate) -> Option<&BTreeSet<String>> {
        let index = if p.is_inverse() { &self.in_edges } else { &self.out_edges };
        index.get(s).and_then(|m| m.get(p.base()))
    }

    /// Whether `(s, p, o)` holds; type facts are checked against the
    /// upward-closed types.
    pub fn has_fact(&self, s: &str, p: &Predicate, o: &str) -> bool {
        if p.is_type() {
            return self.types_of(s).is_some_and(|ts| ts.contains(o));
        }
        self.edges(s, p).is_some_and(|os| os.contains(o))
    }

    pub fn has_predicate(&self, s: &str, p: &Predicate) -> bool {
        if p.is_type() {
            return self.types_of(s).is_some_and(|ts| !ts.is_empty());
        }
        self.edges(s, p).is_some_and(|os| !os.is_empty())
    }

    pub fn objects(&self, s: &str, p: &Predicate) -> Vec<&str> {
        if p.is_type() {
            return self
                .types_of(s)
                .map(|ts| ts.iter().map(String::as_str).collect())
                .unwrap_or_default();
        }
        self.edges(s, p)
            .map(|os| os.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// Subjects `s` with `(s, p, o)` for a non-type predicate.
    pub fn subjects_with(&self, p: &Predicate, o: &str) -> Vec<&str> {
        if p.is_inverse() {
            return self
                .out_edges
                .get(o)
                .and_then(|m| m.get(p.base()))
                .map(|ss| ss.iter().map(String::as_str).collect())
                .unwrap_or_default();
        }
        self.by_pred_obj
            .get(&(p.base().to_string(), o.to_string()))
            .map(|ss| ss.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// All `(predicate, object)` pairs of an entity, inverse pairs included,
    /// `rdf:type` excluded.
    pub fn relation_pairs(&self, s: &str) -> Vec<(Predicate, &str)> {
        let mut out = Vec::new();
        if let Some(m) = self.out_edges.get(s) {
            for (p, os) in m {
                out.extend(os.iter().map(|o| (Predicate::new(p.clone()), o.as_str())));
            }
        }
        if let Some(m) = self.in_edges.get(s) {
            for (p, ss) in m {
                out.extend(ss.iter().map(|o| (Predicate::inverse_of(p.clone()), o.as_str())));
            }
        }
        out
    }

    pub fn entity(&self, id: &str) -> Option<EntityView> {
        if !self.contains_entity(id) {
            return None;
        }
        let mut pairs: BTreeSet<(Predicate, String)> = self
            .relation_pairs(id)
            .into_iter()
            .map(|(p, o)| (p, o.to_string()))
            .collect();
        let types = self.types_of(id).cloned().unwrap_or_default();
        pairs.extend(types.iter().map(|t| (Predicate::rdf_type(), t.clone())));
        Some(EntityView {
            id: id.to_string(),
            types,
            pairs,
        })
    }

    pub fn count_po<'a>(&self, entities: impl IntoIterator<Item = &'a String>, p: &Predicate, o: &str) -> usize {
        entities.into_iter().filter(|s| self.has_fact(s, p, o)).count()
    }

    pub fn count_p<'a>(&self, entities: impl IntoIterator<Item = &'a String>, p: &Predicate) -> usize {
        entities.into_iter().filter(|s| self.has_predicate(s, p)).count()
    }

    /// `None` when no entity of the set has any `p` edge.
    pub fn freq(&self, entities: &BTreeSet<String>, p: &Predicate, o: &str) -> Option<Frequency> {
        let total = self.count_p(entities, p);
        (total > 0).then(|| Frequency {
            hits: self.count_po(entities, p, o),
            total,
        })
    }

    pub fn write_triples(&self, mut w: impl Write) -> std::io::Result<()> {
        for (s, t) in &self.type_triples {
            writeln!(w, "{s}\t{RDF_TYPE}\t{t}")?;
        }
        for (s, p, o) in &self.relation_triples {
            writeln!(w, "{s}\t{p}\t{o}")?;
        }
        Ok(())
    }

    pub fn write_schema(&self, mut w: impl Write) -> std::io::Result<()> {
        for (p, sch) in &self.schema {
            writeln!(
                w,
                "{p}\t{}\t{}",
                sch.domain.as_deref().unwrap_or(""),
                sch.range.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }

    pub fn write_hierarchy(&self, mut w: impl Write) -> std::io::Result<()> {
        for (c, p) in self.subclass_pairs() {
            writeln!(w, "{c}\t{p}")?;
        }
        Ok(())
    }

    pub fn write_restrictions(&self, mut w: impl Write) -> std::io::Result<()> {
        for (t, p, o) in self.restrictions() {
            writeln!(w, "{t}\t{p}\t{o}")?;
        }
        Ok(())
    }
}

/// Locations of the flat files making up a knowledge graph. Only the triples
/// file is required.
#[derive(Debug, Clone, Default)]
pub struct KgPaths<'a> {
    pub triples: Option<&'a Path>,
    pub schema: Option<&'a Path>,
    pub hierarchy: Option<&'a Path>,
    pub restrictions: Option<&'a Path>,
}

fn for_each_record(
    path: &Path,
    arity: &[usize],
    what: &str,
    mut f: impl FnMut(Vec<&str>),
) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !arity.contains(&fields.len()) || fields[0].is_empty() {
            return Err(Error::record(
                idx + 1,
                what,
                format!("{}: expected {:?} tab-separated fields, got {}", path.display(), arity, fields.len()),
            ));
        }
        f(fields);
    }
    Ok(())
}

pub fn read_into(builder: &mut KgBuilder, paths: &KgPaths<'_>) -> Result<()> {
    if let Some(p) = paths.triples {
        for_each_record(p, &[3], "triple", |f| {
            builder.triple(f[0], f[1], f[2]);
        })?;
    }
    if let Some(p) = paths.schema {
        builder.schema_given = true;
        for_each_record(p, &[1, 2, 3], "schema", |f| {
            let opt = |i: usize| f.get(i).copied().filter(|s| !s.is_empty());
            builder.schema(f[0], opt(1), opt(2));
        })?;
    }
    if let Some(p) = paths.hierarchy {
        for_each_record(p, &[2], "hierarchy", |f| {
            builder.subclass(f[0], f[1]);
        })?;
    }
    if let Some(p) = paths.restrictions {
        for_each_record(p, &[3], "restriction", |f| {
            builder.restriction(f[0], f[1], f[2]);
        })?;
    }
    Ok(())
}

pub fn load_kg(paths: &KgPaths<'_>) -> Result<KnowledgeGraph> {
    let mut builder = KgBuilder::new();
    read_into(&mut builder, paths)?;
    Ok(builder.build())
}

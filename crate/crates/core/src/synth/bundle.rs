use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::world::{GroundTruth, PlantedRule, World};
use crate::corpus::write_corpus;
use crate::error::{Error, Result};
use crate::kg::{load_kg, KgPaths};
use crate::rules::{Consequent, ContextPattern};

/// File layout of a world bundle directory.
#[derive(Debug, Clone)]
pub struct WorldPaths {
    pub corpus: PathBuf,
    pub triples: PathBuf,
    pub schema: PathBuf,
    pub hierarchy: PathBuf,
    pub restrictions: PathBuf,
    pub truth_triples: PathBuf,
    pub planted_rules: PathBuf,
    pub true_subjects: PathBuf,
}

impl WorldPaths {
    pub fn in_dir(dir: &Path) -> Self {
        WorldPaths {
            corpus: dir.join("corpus.jsonl"),
            triples: dir.join("kg.tsv"),
            schema: dir.join("schema.tsv"),
            hierarchy: dir.join("hierarchy.tsv"),
            restrictions: dir.join("restrictions.tsv"),
            truth_triples: dir.join("truth.tsv"),
            planted_rules: dir.join("planted_rules.tsv"),
            true_subjects: dir.join("true_subjects.tsv"),
        }
    }

    pub fn files(&self) -> [&Path; 8] {
        [
            &self.corpus,
            &self.triples,
            &self.schema,
            &self.hierarchy,
            &self.restrictions,
            &self.truth_triples,
            &self.planted_rules,
            &self.true_subjects,
        ]
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_world(world: &World, dir: &Path) -> Result<WorldPaths> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = WorldPaths::in_dir(dir);
    write_file(&paths.corpus, |w| write_corpus(&world.corpus, w))?;
    write_file(&paths.triples, |w| world.kg.write_triples(w))?;
    write_file(&paths.schema, |w| world.kg.write_schema(w))?;
    write_file(&paths.hierarchy, |w| world.kg.write_hierarchy(w))?;
    write_file(&paths.restrictions, |w| world.kg.write_restrictions(w))?;
    write_file(&paths.truth_triples, |w| world.truth.complete.write_triples(w))?;
    write_file(&paths.planted_rules, |w| {
        for r in &world.truth.planted {
            writeln!(w, "{}\t{}\t{}", r.antecedent, r.consequent.predicate, r.consequent.object_text())?;
        }
        Ok(())
    })?;
    write_file(&paths.true_subjects, |w| {
        for (listing, subjects) in &world.truth.subjects {
            for s in subjects {
                writeln!(w, "{listing}\t{s}")?;
            }
        }
        Ok(())
    })?;
    Ok(paths)
}

fn read_lines(path: &Path, arity: usize, mut f: impl FnMut(usize, Vec<&str>) -> Result<()>) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != arity {
            return Err(Error::record(
                i + 1,
                "line",
                format!("{}: expected {arity} fields, found {}", path.display(), fields.len()),
            ));
        }
        f(i + 1, fields)?;
    }
    Ok(())
}

pub fn read_ground_truth(paths: &WorldPaths) -> Result<GroundTruth> {
    let complete = load_kg(&KgPaths {
        triples: Some(&paths.truth_triples),
        schema: Some(&paths.schema),
        hierarchy: Some(&paths.hierarchy),
        restrictions: Some(&paths.restrictions),
    })?;
    let mut planted = Vec::new();
    read_lines(&paths.planted_rules, 3, |n, f| {
        let antecedent: ContextPattern = f[0].parse().map_err(|e: Error| Error::record(n, "pattern", e.to_string()))?;
        planted.push(PlantedRule {
            antecedent,
            consequent: Consequent::parse(f[1], f[2]),
        });
        Ok(())
    })?;
    let mut subjects: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    read_lines(&paths.true_subjects, 2, |_, f| {
        subjects.entry(f[0].to_string()).or_default().insert(f[1].to_string());
        Ok(())
    })?;
    Ok(GroundTruth {
        complete,
        planted,
        subjects,
    })
}

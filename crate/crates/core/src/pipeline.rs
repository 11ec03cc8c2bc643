//! Settings, config files, atomic outputs and the stage functions behind
//! the command line. Each stage is a pure function of its inputs.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::assertions::{
    dedupe_and_subtract, generate, generate_baseline, infer_from_restrictions, novel_entities, tag_filter,
    Assertion, FilterReport, GenerationReport, NovelEntity, Source, DEFAULT_TAU_TAG,
};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;
use crate::rules::{mine_rules, MiningConfig, Rule, RuleKind, SelectionThresholds};
use crate::subjects::detect_subject_entities;
use crate::tagger::{build_tagprob, harmonize_tags, tag_corpus, Gazetteer};
use crate::thresholds::{sweep_thresholds, Metric, Sweep, DEFAULT_BIN_WIDTH};

/// Every tunable of the pipeline. Config files, environment variables and
/// flags all end up here.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub thresholds: SelectionThresholds,
    pub tau_tag: f64,
    pub tau_freq: f64,
    pub min_se: usize,
    pub bin_width: f64,
    pub max_pattern_size: usize,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        let thresholds = SelectionThresholds::default();
        Settings {
            tau_freq: thresholds.relations.conf,
            thresholds,
            tau_tag: DEFAULT_TAU_TAG,
            min_se: 3,
            bin_width: DEFAULT_BIN_WIDTH,
            max_pattern_size: MiningConfig::default().max_pattern_size,
            seed: 0,
        }
    }
}

/// Keys accepted by [`Settings::set`], in manifest order.
pub const SETTING_KEYS: &[&str] = &[
    "tau_conf",
    "tau_cons",
    "tau_conf_type",
    "tau_cons_type",
    "tau_supp_type",
    "tau_conf_rel",
    "tau_cons_rel",
    "tau_supp_rel",
    "tau_tag",
    "tau_freq",
    "min_se",
    "bin_width",
    "max_pattern_size",
    "seed",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("invalid value `{value}` for `{key}`")))
}

fn unit(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse(key, value)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Usage(format!("`{key}` must lie in [0, 1], got {v}")));
    }
    Ok(v)
}

impl Settings {
    /// Sets one key. Dashes and underscores are interchangeable; `tau_conf`
    /// and `tau_cons` set both rule kinds at once.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let k = key.as_str();
        let th = &mut self.thresholds;
        match k {
            "tau_conf" => {
                let v = unit(k, value)?;
                th.types.conf = v;
                th.relations.conf = v;
            }
            "tau_cons" => {
                let v = unit(k, value)?;
                th.types.cons = v;
                th.relations.cons = v;
            }
            "tau_conf_type" => th.types.conf = unit(k, value)?,
            "tau_cons_type" => th.types.cons = unit(k, value)?,
            "tau_supp_type" => th.types.supp = parse(k, value)?,
            "tau_conf_rel" => th.relations.conf = unit(k, value)?,
            "tau_cons_rel" => th.relations.cons = unit(k, value)?,
            "tau_supp_rel" => th.relations.supp = parse(k, value)?,
            "tau_tag" => self.tau_tag = unit(k, value)?,
            "tau_freq" => self.tau_freq = unit(k, value)?,
            "min_se" => self.min_se = parse(k, value)?,
            "bin_width" => {
                let w: f64 = parse(k, value)?;
                if !(w > 0.0 && w <= 1.0) {
                    return Err(Error::Usage(format!("`bin_width` must lie in (0, 1], got {w}")));
                }
                self.bin_width = w;
            }
            "max_pattern_size" => {
                self.max_pattern_size = parse(k, value)?;
                if self.max_pattern_size == 0 {
                    return Err(Error::Usage("`max_pattern_size` must be positive".into()));
                }
            }
            "seed" => self.seed = parse(k, value)?,
            _ => return Err(Error::Usage(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::record(i + 1, "config", "expected `key = value`"))?;
            self.set(k, v).map_err(|e| Error::record(i + 1, k.trim(), e.to_string()))?;
        }
        Ok(())
    }

    pub fn load_config(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_config(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    pub fn mining(&self) -> MiningConfig {
        MiningConfig {
            max_pattern_size: self.max_pattern_size,
            ..MiningConfig::default()
        }
    }

    /// Effective values, one per concrete key.
    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let th = &self.thresholds;
        BTreeMap::from([
            ("tau_conf_type", th.types.conf.to_string()),
            ("tau_cons_type", th.types.cons.to_string()),
            ("tau_supp_type", th.types.supp.to_string()),
            ("tau_conf_rel", th.relations.conf.to_string()),
            ("tau_cons_rel", th.relations.cons.to_string()),
            ("tau_supp_rel", th.relations.supp.to_string()),
            ("tau_tag", self.tau_tag.to_string()),
            ("tau_freq", self.tau_freq.to_string()),
            ("min_se", self.min_se.to_string()),
            ("bin_width", self.bin_width.to_string()),
            ("max_pattern_size", self.max_pattern_size.to_string()),
            ("seed", self.seed.to_string()),
        ])
    }
}

/// Files written by one command. On failure everything written so far is
/// removed again.
#[derive(Debug, Default)]
pub struct Outputs {
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes through a temporary sibling file and renames it into place.
    pub fn write(&mut self, path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let tmp = path.with_file_name(format!(".{name}.partial"));
        let result = File::create(&tmp).and_then(|file| {
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()
        });
        if let Err(e) = result.and_then(|_| fs::rename(&tmp, path)) {
            let _ = fs::remove_file(&tmp);
            return Err(Error::io(path, e));
        }
        self.written.push(path.to_path_buf());
        Ok(())
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

/// Run record written next to the outputs. Thread counts are left out
/// since they never change results.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: &'static str,
    pub settings: BTreeMap<&'static str, String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub extra: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, settings: &Settings) -> Self {
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            settings: settings.entries(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, name: &str, path: Option<&Path>) {
        if let Some(p) = path {
            self.inputs.insert(name.to_string(), p.display().to_string());
        }
    }

    pub fn write(&self, w: &mut dyn Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, self).map_err(std::io::Error::other)?;
        writeln!(w)
    }
}

/// Metrics as they read back from a rules file, so that in-memory runs and
/// file-based runs select the same rules.
pub fn as_written(mut rules: Vec<Rule>) -> Vec<Rule> {
    let round = |x: f64| format!("{x:.6}").parse::<f64>().expect("formatted float parses");
    for r in &mut rules {
        r.conf = round(r.conf);
        r.cons = round(r.cons);
    }
    rules
}

/// Tags mentions, optionally harmonizes tags per type, then marks subject
/// entities.
pub fn prepare_corpus(
    corpus: &Corpus,
    kg: &KnowledgeGraph,
    gazetteer: &Gazetteer,
    fallback: &str,
    harmonize: bool,
) -> Result<Corpus> {
    let mut tagged = tag_corpus(corpus, gazetteer, fallback)?;
    if harmonize {
        tagged = harmonize_tags(&tagged, kg);
    }
    Ok(detect_subject_entities(&tagged, kg))
}

/// Applies the selection thresholds and generates deduplicated assertions.
/// Rule ids in the provenance index into `rules`, not into the selection.
pub fn generate_stage(
    corpus: &Corpus,
    kg: &KnowledgeGraph,
    rules: &[Rule],
    thresholds: &SelectionThresholds,
) -> (Vec<Assertion>, GenerationReport) {
    let (ids, selected): (Vec<usize>, Vec<Rule>) = rules
        .iter()
        .enumerate()
        .filter(|(_, r)| thresholds.for_kind(r.kind()).admits(r))
        .map(|(i, r)| (i, r.clone()))
        .unzip();
    let (mut raw, report) = generate(corpus, kg, &selected);
    for a in &mut raw {
        for p in &mut a.provenance {
            if let Source::Rule(i) = p.source {
                p.source = Source::Rule(ids[i]);
            }
        }
    }
    (dedupe_and_subtract(raw, kg), report)
}

pub fn baseline_stage(corpus: &Corpus, kg: &KnowledgeGraph, settings: &Settings) -> Vec<Assertion> {
    dedupe_and_subtract(generate_baseline(corpus, kg, settings.tau_freq, settings.min_se), kg)
}

pub fn filter_stage(
    assertions: Vec<Assertion>,
    corpus: &Corpus,
    kg: &KnowledgeGraph,
    tau_tag: f64,
) -> (Vec<Assertion>, FilterReport) {
    let model = build_tagprob(corpus, kg);
    tag_filter(assertions, &model, kg, tau_tag)
}

/// One threshold sweep per rule kind and metric.
pub fn sweep_all(corpus: &Corpus, kg: &KnowledgeGraph, rules: &[Rule], settings: &Settings) -> Result<Vec<Sweep>> {
    let model = build_tagprob(corpus, kg);
    let mut out = Vec::new();
    for kind in [RuleKind::Type, RuleKind::Relation] {
        for metric in [Metric::Conf, Metric::Cons] {
            let min_support = settings.thresholds.for_kind(kind).supp;
            out.push(sweep_thresholds(
                rules,
                corpus,
                kg,
                &model,
                metric,
                kind,
                settings.bin_width,
                min_support,
            )?);
        }
    }
    Ok(out)
}

/// Everything the end-to-end pipeline produces.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub corpus: Corpus,
    pub rules: Vec<Rule>,
    pub assertions: Vec<Assertion>,
    pub novel: Vec<NovelEntity>,
    pub generation: GenerationReport,
    pub filter: FilterReport,
    pub inferred: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    pub gazetteer: Gazetteer,
    pub fallback: String,
    pub harmonize: bool,
}

/// Tagging, subject detection, mining, generation, tag filtering and
/// restriction inference in one go.
pub fn run_pipeline(
    corpus: &Corpus,
    kg: &KnowledgeGraph,
    settings: &Settings,
    options: &PipelineOptions,
) -> Result<PipelineRun> {
    let fallback = if options.fallback.is_empty() { "shape" } else { &options.fallback };
    let corpus = prepare_corpus(corpus, kg, &options.gazetteer, fallback, options.harmonize)?;
    let rules = as_written(mine_rules(&corpus, kg, &settings.mining()));
    let (assertions, generation) = generate_stage(&corpus, kg, &rules, &settings.thresholds);
    let (assertions, filter) = filter_stage(assertions, &corpus, kg, settings.tau_tag);
    let (assertions, inferred) = infer_from_restrictions(assertions, kg);
    let novel = novel_entities(&corpus, kg);
    Ok(PipelineRun {
        corpus,
        rules,
        assertions,
        novel,
        generation,
        filter,
        inferred,
    })
}

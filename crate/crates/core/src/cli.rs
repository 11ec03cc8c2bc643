//! Command line front end. Every flag can also come from an environment
//! variable named `LISTING_RULES_<FLAG>`, and tuning values from a
//! `key = value` config file. Flags and environment win over the file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::assertions::{
    entity_report, infer_from_restrictions, novel_entities, read_assertions, write_assertions,
    write_novel_entities, Assertion, Status,
};
use crate::corpus::{corpus_stats, load_corpus, write_corpus, Corpus};
use crate::error::{Error, Result};
use crate::kg::{load_kg, KgPaths, KnowledgeGraph};
use crate::pipeline::{
    baseline_stage, filter_stage, generate_stage, run_pipeline, sweep_all, Manifest, Outputs, PipelineOptions,
    Settings,
};
use crate::rules::{mine_rules, read_rules, select_rules, write_rules, Rule, RuleKind};
use crate::subjects::{detect_subject_entities, se_stats};
use crate::synth::{generate_world, read_ground_truth, score, score_rules, stratified_sample, write_metrics, write_world, WorldConfig, WorldPaths};
use crate::tagger::{build_tagprob, harmonize_tags, load_gazetteer, tag_corpus, Gazetteer};
use crate::thresholds::{sweep_thresholds, write_chart_json, write_curve, Metric, Sweep};
use crate::wikitext::{expand_links, extract_from_wikitext};

#[derive(Debug, Parser)]
#[command(name = "listing-rules", version, about = "Mine descriptive rules from wiki listings and complete a knowledge graph")]
pub struct Cli {
    /// Settings file with `key = value` lines.
    #[arg(long, global = true, env = "LISTING_RULES_CONFIG")]
    pub config: Option<PathBuf>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "LISTING_RULES_THREADS")]
    pub threads: Option<usize>,

    /// Also write a JSON run manifest to this path.
    #[arg(long, global = true, env = "LISTING_RULES_MANIFEST")]
    pub manifest: Option<PathBuf>,

    #[command(flatten)]
    pub tuning: Tuning,

    #[command(subcommand)]
    pub command: Command,
}

/// Overrides for [`Settings`]; unset flags keep the config or default value.
#[derive(Debug, Clone, Default, Args)]
pub struct Tuning {
    /// Confidence threshold for both rule kinds.
    #[arg(long, global = true, env = "LISTING_RULES_TAU_CONF")]
    pub tau_conf: Option<f64>,
    /// Consistency threshold for both rule kinds.
    #[arg(long, global = true, env = "LISTING_RULES_TAU_CONS")]
    pub tau_cons: Option<f64>,
    #[arg(long, global = true, env = "LISTING_RULES_TAU_CONF_TYPE")]
    pub tau_conf_type: Option<f64>,
    #[arg(long, global = true, env = "LISTING_RULES_TAU_CONS_TYPE")]
    pub tau_cons_type: Option<f64>,
    #[arg(long, global = true, env = "LISTING_RULES_TAU_SUPP_TYPE")]
    pub tau_supp_type: Option<usize>,
    #[arg(long, global = true, env = "LISTING_RULES_TAU_CONF_REL")]
    pub tau_conf_rel: Option<f64>,
    #[arg(long, global = true, env = "LISTING_RULES_TAU_CONS_REL")]
    pub tau_cons_rel: Option<f64>,
    /// Support threshold for relation rules (strict).
    #[arg(long, global = true, env = "LISTING_RULES_TAU_SUPP_REL")]
    pub tau_supp_rel: Option<usize>,
    /// Tag filter threshold [default: 0.333333].
    #[arg(long, global = true, env = "LISTING_RULES_TAU_TAG")]
    pub tau_tag: Option<f64>,
    /// Frequency threshold of the baseline [default: relation confidence].
    #[arg(long, global = true, env = "LISTING_RULES_TAU_FREQ")]
    pub tau_freq: Option<f64>,
    /// Fewest subject entities a listing needs for the baseline [default: 3].
    #[arg(long, global = true, env = "LISTING_RULES_MIN_SE")]
    pub min_se: Option<usize>,
    /// Threshold sweep bin width [default: 0.05].
    #[arg(long, global = true, env = "LISTING_RULES_BIN_WIDTH")]
    pub bin_width: Option<f64>,
    #[arg(long, global = true, env = "LISTING_RULES_MAX_PATTERN_SIZE")]
    pub max_pattern_size: Option<usize>,
    #[arg(long, global = true, env = "LISTING_RULES_SEED")]
    pub seed: Option<u64>,
}

impl Tuning {
    fn apply(&self, s: &mut Settings) -> Result<()> {
        let pairs: [(&str, Option<String>); 14] = [
            ("tau_conf", self.tau_conf.map(|v| v.to_string())),
            ("tau_cons", self.tau_cons.map(|v| v.to_string())),
            ("tau_conf_type", self.tau_conf_type.map(|v| v.to_string())),
            ("tau_cons_type", self.tau_cons_type.map(|v| v.to_string())),
            ("tau_supp_type", self.tau_supp_type.map(|v| v.to_string())),
            ("tau_conf_rel", self.tau_conf_rel.map(|v| v.to_string())),
            ("tau_cons_rel", self.tau_cons_rel.map(|v| v.to_string())),
            ("tau_supp_rel", self.tau_supp_rel.map(|v| v.to_string())),
            ("tau_tag", self.tau_tag.map(|v| v.to_string())),
            ("tau_freq", self.tau_freq.map(|v| v.to_string())),
            ("min_se", self.min_se.map(|v| v.to_string())),
            ("bin_width", self.bin_width.map(|v| v.to_string())),
            ("max_pattern_size", self.max_pattern_size.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                s.set(k, &v)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct KgArgs {
    /// Triples file: subject, predicate, object.
    #[arg(long, env = "LISTING_RULES_KG")]
    pub kg: Option<PathBuf>,
    /// Predicate schema: predicate, domain, range.
    #[arg(long, env = "LISTING_RULES_SCHEMA")]
    pub schema: Option<PathBuf>,
    /// Type hierarchy: type, parent.
    #[arg(long, env = "LISTING_RULES_HIERARCHY")]
    pub hierarchy: Option<PathBuf>,
    /// Value restrictions: type, predicate, object.
    #[arg(long, env = "LISTING_RULES_RESTRICTIONS")]
    pub restrictions: Option<PathBuf>,
}

impl KgArgs {
    fn load(&self) -> Result<KnowledgeGraph> {
        let triples = self.kg.as_deref().ok_or_else(|| Error::Usage("missing --kg".into()))?;
        self.load_with(triples)
    }

    fn load_with(&self, triples: &Path) -> Result<KnowledgeGraph> {
        let kg = load_kg(&KgPaths {
            triples: Some(triples),
            schema: self.schema.as_deref(),
            hierarchy: self.hierarchy.as_deref(),
            restrictions: self.restrictions.as_deref(),
        })?;
        for w in kg.warnings() {
            eprintln!("warning: {w}");
        }
        Ok(kg)
    }

    fn record(&self, m: &mut Manifest) {
        m.input("kg", self.kg.as_deref());
        m.input("schema", self.schema.as_deref());
        m.input("hierarchy", self.hierarchy.as_deref());
        m.input("restrictions", self.restrictions.as_deref());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Conf,
    Cons,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Type,
    Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 2,000 listings with 50 planted rules.
    Default,
    /// Clean contexts above confidence 0.8 and noise contexts below.
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse wiki markup files (one per page, file name = title) into a corpus.
    Extract {
        /// A markup file or a directory of them.
        #[arg(long, env = "LISTING_RULES_MARKUP")]
        markup: PathBuf,
        /// Entities of this graph count as existing pages for link colours.
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: PathBuf,
    },
    /// Assign named entity tags to mentions.
    Tag {
        #[arg(long, env = "LISTING_RULES_CORPUS")]
        corpus: PathBuf,
        /// surface, tag
        #[arg(long, env = "LISTING_RULES_GAZETTEER")]
        gazetteer: Option<PathBuf>,
        /// Tagger for mentions the gazetteer misses: shape or none.
        #[arg(long, default_value = "shape", env = "LISTING_RULES_FALLBACK")]
        fallback: String,
        /// Make tags consistent per KG type (needs --kg).
        #[arg(long)]
        harmonize: bool,
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: PathBuf,
    },
    /// Mark the subject entities of every listing.
    DetectSe {
        #[arg(long, env = "LISTING_RULES_CORPUS")]
        corpus: PathBuf,
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: PathBuf,
    },
    /// Mine rules with support, confidence and consistency.
    Mine {
        #[arg(long, env = "LISTING_RULES_CORPUS")]
        corpus: PathBuf,
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: PathBuf,
    },
    /// Sweep a rule metric and recommend a threshold from the tagfit curve.
    Thresholds {
        #[arg(long, env = "LISTING_RULES_CORPUS")]
        corpus: PathBuf,
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, env = "LISTING_RULES_RULES")]
        rules: PathBuf,
        #[arg(long, value_enum, default_value = "conf")]
        metric: MetricArg,
        #[arg(long, value_enum, default_value = "type")]
        kind: KindArg,
        /// Curve report; standard output when absent.
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: Option<PathBuf>,
        /// Same numbers as JSON for plotting.
        #[arg(long)]
        chart: Option<PathBuf>,
    },
    /// Select rules and generate assertions not yet in the graph.
    Generate {
        #[arg(long, env = "LISTING_RULES_CORPUS")]
        corpus: PathBuf,
        #[command(flatten)]
        kg: KgArgs,
        /// Required unless --baseline is given.
        #[arg(long, env = "LISTING_RULES_RULES")]
        rules: Option<PathBuf>,
        /// Use the per-listing frequency baseline instead of rules.
        #[arg(long)]
        baseline: bool,
        /// Also list subject entities missing from the graph.
        #[arg(long)]
        novel: Option<PathBuf>,
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: PathBuf,
    },
    /// Accept or reject raw assertions by tag plausibility.
    Filter {
        #[arg(long, env = "LISTING_RULES_CORPUS")]
        corpus: PathBuf,
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, env = "LISTING_RULES_ASSERTIONS")]
        assertions: PathBuf,
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: PathBuf,
    },
    /// Add relations implied by restrictions on accepted types.
    Infer {
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, env = "LISTING_RULES_ASSERTIONS")]
        assertions: PathBuf,
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: PathBuf,
    },
    /// Score accepted assertions against a synthetic world's ground truth.
    Evaluate {
        #[arg(long, env = "LISTING_RULES_ASSERTIONS")]
        assertions: PathBuf,
        /// World bundle directory written by `synth`.
        #[arg(long, env = "LISTING_RULES_WORLD")]
        world: PathBuf,
        /// Also report planted rule recovery for the rules selected from this file.
        #[arg(long, env = "LISTING_RULES_RULES")]
        rules: Option<PathBuf>,
        /// Score a page-type stratified sample of this size.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: Option<PathBuf>,
    },
    /// Write a synthetic world bundle with hidden ground truth.
    Synth {
        #[arg(long, value_enum, default_value = "default")]
        preset: Preset,
        /// Subject entity and tag noise rate.
        #[arg(long)]
        noise: Option<f64>,
        /// Share of true triples visible in the graph.
        #[arg(long)]
        visibility: Option<f64>,
        #[arg(long)]
        pages: Option<usize>,
        /// Bundle directory.
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: PathBuf,
    },
    /// Corpus and subject entity statistics as key/value lines.
    Stats {
        #[arg(long, env = "LISTING_RULES_CORPUS")]
        corpus: PathBuf,
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: Option<PathBuf>,
    },
    /// tag, detect-se, mine, generate, filter and infer in one run.
    Pipeline {
        #[arg(long, env = "LISTING_RULES_CORPUS")]
        corpus: PathBuf,
        #[command(flatten)]
        kg: KgArgs,
        #[arg(long, env = "LISTING_RULES_GAZETTEER")]
        gazetteer: Option<PathBuf>,
        #[arg(long, default_value = "shape", env = "LISTING_RULES_FALLBACK")]
        fallback: String,
        #[arg(long)]
        harmonize: bool,
        /// Also write the four threshold curves.
        #[arg(long)]
        sweep: bool,
        /// Output directory.
        #[arg(long, env = "LISTING_RULES_OUT")]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Extract { .. } => "extract",
            Command::Tag { .. } => "tag",
            Command::DetectSe { .. } => "detect-se",
            Command::Mine { .. } => "mine",
            Command::Thresholds { .. } => "thresholds",
            Command::Generate { .. } => "generate",
            Command::Filter { .. } => "filter",
            Command::Infer { .. } => "infer",
            Command::Evaluate { .. } => "evaluate",
            Command::Synth { .. } => "synth",
            Command::Stats { .. } => "stats",
            Command::Pipeline { .. } => "pipeline",
        }
    }
}

pub fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Usage(e.to_string()))?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<()> {
    let mut settings = Settings::default();
    if let Some(path) = &cli.config {
        settings.load_config(path)?;
    }
    cli.tuning.apply(&mut settings)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Usage(format!("thread pool: {e}")))?;

    let mut outputs = Outputs::new();
    let mut manifest = Manifest::new(cli.command.name(), &settings);
    let result = pool.install(|| execute(&cli.command, &settings, &mut outputs, &mut manifest));
    let result = result.and_then(|()| match &cli.manifest {
        Some(path) => {
            if manifest.outputs.is_empty() {
                manifest.outputs = outputs.paths().iter().map(|p| p.display().to_string()).collect();
            }
            outputs.write(path, |w| manifest.write(w))
        }
        None => Ok(()),
    });
    if result.is_err() {
        outputs.discard();
    }
    result
}

fn open_corpus(path: &Path, m: &mut Manifest) -> Result<Corpus> {
    m.input("corpus", Some(path));
    let (corpus, report) = load_corpus(path)?;
    if report.listings_dropped > 0 {
        eprintln!("note: dropped {} listings with fewer than two rows", report.listings_dropped);
    }
    Ok(corpus)
}

fn open_rules(path: &Path, m: &mut Manifest) -> Result<Vec<Rule>> {
    m.input("rules", Some(path));
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_rules(BufReader::new(file))
}

fn open_assertions(path: &Path, m: &mut Manifest) -> Result<Vec<Assertion>> {
    m.input("assertions", Some(path));
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_assertions(BufReader::new(file))
}

fn open_gazetteer(path: Option<&Path>, m: &mut Manifest) -> Result<Gazetteer> {
    m.input("gazetteer", path);
    path.map(load_gazetteer).transpose().map(Option::unwrap_or_default)
}

/// Writes to `out` or, without a path, to standard output.
fn emit(outputs: &mut Outputs, out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match out {
        Some(path) => outputs.write(path, f),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn count_status(assertions: &[Assertion]) -> BTreeMap<&'static str, usize> {
    let mut counts = BTreeMap::new();
    for a in assertions {
        *counts.entry(a.status.name()).or_default() += 1;
    }
    counts
}

fn markup_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    files.sort();
    Ok(files)
}

fn page_title(path: &Path) -> String {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    stem.replace('_', " ")
}

fn execute(cmd: &Command, settings: &Settings, outputs: &mut Outputs, m: &mut Manifest) -> Result<()> {
    match cmd {
        Command::Extract { markup, kg, out } => {
            m.input("markup", Some(markup));
            let files = markup_files(markup)?;
            let mut known: BTreeSet<String> = files.iter().map(|f| page_title(f)).collect();
            if kg.kg.is_some() {
                kg.record(m);
                let graph = kg.load()?;
                known.extend(graph.relation_triples().iter().map(|(s, _, _)| s.clone()));
                known.extend(graph.type_triples().iter().map(|(s, _)| s.clone()));
            }
            let mut pages = Vec::with_capacity(files.len());
            for f in &files {
                let text = fs::read_to_string(f).map_err(|e| Error::io(f, e))?;
                let ex = extract_from_wikitext(&text, &page_title(f), &known);
                for w in &ex.warnings {
                    eprintln!("warning: {}: {w}", f.display());
                }
                pages.push(expand_links(&ex.page));
            }
            let (corpus, report) = Corpus::from_pages(pages)?;
            eprintln!("extracted {} pages, {} listings", report.pages, report.listings_kept);
            outputs.write(out, |w| write_corpus(&corpus, w))?;
        }
        Command::Tag {
            corpus,
            gazetteer,
            fallback,
            harmonize,
            kg,
            out,
        } => {
            let c = open_corpus(corpus, m)?;
            let g = open_gazetteer(gazetteer.as_deref(), m)?;
            m.extra.insert("fallback".into(), fallback.clone());
            let mut tagged = tag_corpus(&c, &g, fallback)?;
            if *harmonize {
                kg.record(m);
                tagged = harmonize_tags(&tagged, &kg.load()?);
            }
            outputs.write(out, |w| write_corpus(&tagged, w))?;
        }
        Command::DetectSe { corpus, kg, out } => {
            let c = open_corpus(corpus, m)?;
            kg.record(m);
            let marked = detect_subject_entities(&c, &kg.load()?);
            let st = se_stats(&marked);
            eprintln!("{} subject entities in {} listings", st.subjects, st.listings_with_subjects);
            outputs.write(out, |w| write_corpus(&marked, w))?;
        }
        Command::Mine { corpus, kg, out } => {
            let c = open_corpus(corpus, m)?;
            kg.record(m);
            let rules = mine_rules(&c, &kg.load()?, &settings.mining());
            eprintln!("mined {} rules", rules.len());
            outputs.write(out, |w| write_rules(&rules, w))?;
        }
        Command::Thresholds {
            corpus,
            kg,
            rules,
            metric,
            kind,
            out,
            chart,
        } => {
            let c = open_corpus(corpus, m)?;
            kg.record(m);
            let graph = kg.load()?;
            let rules = open_rules(rules, m)?;
            let kind = match kind {
                KindArg::Type => RuleKind::Type,
                KindArg::Relation => RuleKind::Relation,
            };
            let metric = match metric {
                MetricArg::Conf => Metric::Conf,
                MetricArg::Cons => Metric::Cons,
            };
            let model = build_tagprob(&c, &graph);
            let min_support = settings.thresholds.for_kind(kind).supp;
            let sweep = sweep_thresholds(&rules, &c, &graph, &model, metric, kind, settings.bin_width, min_support)?;
            emit(outputs, out.as_deref(), |w| write_curve(&sweep, w))?;
            if out.is_some() {
                print_recommendation(&sweep);
            }
            if let Some(path) = chart {
                outputs.write(path, |w| write_chart_json(&sweep, w).map_err(io::Error::other))?;
            }
        }
        Command::Generate {
            corpus,
            kg,
            rules,
            baseline,
            novel,
            out,
        } => {
            let c = open_corpus(corpus, m)?;
            kg.record(m);
            let graph = kg.load()?;
            let assertions = if *baseline {
                m.extra.insert("source".into(), "baseline".into());
                baseline_stage(&c, &graph, settings)
            } else {
                let path = rules
                    .as_deref()
                    .ok_or_else(|| Error::Usage("generate needs --rules or --baseline".into()))?;
                let rules = open_rules(path, m)?;
                let (assertions, report) = generate_stage(&c, &graph, &rules, &settings.thresholds);
                eprintln!(
                    "{} raw assertions, {} listing/rule pairs with unresolved placeholders",
                    report.raw, report.unresolved
                );
                assertions
            };
            eprintln!("{:?}", count_status(&assertions));
            outputs.write(out, |w| write_assertions(&assertions, w))?;
            if let Some(path) = novel {
                let ents = novel_entities(&c, &graph);
                outputs.write(path, |w| write_novel_entities(&ents, w))?;
            }
        }
        Command::Filter {
            corpus,
            kg,
            assertions,
            out,
        } => {
            let c = open_corpus(corpus, m)?;
            kg.record(m);
            let graph = kg.load()?;
            let a = open_assertions(assertions, m)?;
            let (filtered, report) = filter_stage(a, &c, &graph, settings.tau_tag);
            eprintln!(
                "accepted {}, filtered {} ({} without a tag)",
                report.accepted, report.filtered, report.untagged
            );
            outputs.write(out, |w| write_assertions(&filtered, w))?;
        }
        Command::Infer { kg, assertions, out } => {
            kg.record(m);
            let graph = kg.load()?;
            let a = open_assertions(assertions, m)?;
            let (inferred, added) = infer_from_restrictions(a, &graph);
            eprintln!("inferred {added} relations from restrictions");
            outputs.write(out, |w| write_assertions(&inferred, w))?;
        }
        Command::Evaluate {
            assertions,
            world,
            rules,
            sample,
            out,
        } => {
            let paths = WorldPaths::in_dir(world);
            m.input("world", Some(world));
            let truth = read_ground_truth(&paths)?;
            let graph = KgArgs {
                kg: Some(paths.triples.clone()),
                schema: Some(paths.schema.clone()),
                hierarchy: Some(paths.hierarchy.clone()),
                restrictions: Some(paths.restrictions.clone()),
            }
            .load()?;
            let a = open_assertions(assertions, m)?;
            let c = if rules.is_some() || sample.is_some() {
                Some(load_corpus(&paths.corpus)?.0)
            } else {
                None
            };
            let accepted: Vec<Assertion> = a.iter().filter(|x| x.status == Status::Accepted).cloned().collect();
            let scored = match (sample, &c) {
                (Some(n), Some(c)) => {
                    let (s, short) = stratified_sample(&accepted, |x| page_stratum(x, c, &graph), *n, settings.seed);
                    if short {
                        eprintln!("warning: sample size {n} exceeds {} accepted assertions", accepted.len());
                    }
                    s
                }
                _ => accepted,
            };
            let metrics = score(&scored, &truth, &graph);
            let report = entity_report(&scored, &graph);
            let recovery = match (rules, &c) {
                (Some(path), Some(c)) => {
                    let selected = select_rules(&open_rules(path, m)?, &settings.thresholds);
                    Some(score_rules(&selected, c, &graph, &truth))
                }
                _ => None,
            };
            emit(outputs, out.as_deref(), |w| {
                write_metrics(&metrics, &mut *w)?;
                writeln!(w, "subjects\t{}", report.subjects)?;
                writeln!(w, "novel_subjects\t{}", report.novel_subjects)?;
                if let Some(r) = &recovery {
                    writeln!(w, "planted_rules\t{}", r.planted)?;
                    writeln!(w, "recovered_rules\t{}", r.recovered)?;
                    writeln!(w, "selected_rules\t{}", r.selected)?;
                    writeln!(w, "spurious_rules\t{}", r.spurious.len())?;
                    writeln!(w, "spurious_rate\t{:.6}", r.spurious_rate())?;
                }
                Ok(())
            })?;
        }
        Command::Synth {
            preset,
            noise,
            visibility,
            pages,
            out,
        } => {
            let mut cfg = match preset {
                Preset::Default => WorldConfig::default(),
                Preset::Sweep => WorldConfig::sweep(settings.seed),
            };
            cfg.seed = settings.seed;
            if let Some(n) = noise {
                cfg.se_noise = *n;
                cfg.tag_noise = *n;
            }
            if let Some(v) = visibility {
                cfg.kg_visibility = *v;
            }
            if let Some(p) = pages {
                cfg.n_pages = *p;
            }
            m.extra.insert("world".into(), format!("{cfg:?}"));
            let world = generate_world(&cfg)?;
            let paths = if out.exists() {
                write_world(&world, out)?
            } else {
                let staging = staging_dir(out);
                let written = write_world(&world, &staging)
                    .and_then(|_| fs::rename(&staging, out).map_err(|e| Error::io(out, e)));
                if let Err(e) = written {
                    let _ = fs::remove_dir_all(&staging);
                    return Err(e);
                }
                WorldPaths::in_dir(out)
            };
            m.outputs.extend(paths.files().iter().map(|p| {
                p.file_name().unwrap_or_default().to_string_lossy().into_owned()
            }));
            eprintln!(
                "wrote {} listings and {} planted rules to {}",
                world.corpus.listing_count(),
                world.truth.planted.len(),
                out.display()
            );
            outputs.write(&out.join("manifest.json"), |w| m.write(w))?;
        }
        Command::Stats { corpus, kg, out } => {
            let c = open_corpus(corpus, m)?;
            let cs = corpus_stats(&c);
            let ss = se_stats(&c);
            let graph = match kg.kg {
                Some(_) => Some(kg.load()?),
                None => None,
            };
            emit(outputs, out.as_deref(), |w| {
                writeln!(w, "pages\t{}", cs.pages)?;
                writeln!(w, "listings\t{}", cs.listings)?;
                writeln!(w, "lists\t{}", cs.lists)?;
                writeln!(w, "tables\t{}", cs.tables)?;
                if let Some(r) = &cs.rows {
                    writeln!(w, "rows_median\t{}", r.median)?;
                    writeln!(w, "rows_mean\t{:.6}", r.mean)?;
                }
                writeln!(w, "listings_with_subjects\t{}", ss.listings_with_subjects)?;
                writeln!(w, "subject_mentions\t{}", ss.subjects)?;
                if let Some(s) = &ss.per_listing {
                    writeln!(w, "subjects_per_listing_median\t{}", s.median)?;
                    writeln!(w, "subjects_per_listing_mean\t{:.6}", s.mean)?;
                }
                if let Some(g) = &graph {
                    let novel = novel_entities(&c, g);
                    writeln!(w, "novel_subjects\t{}", novel.len())?;
                    writeln!(w, "kg_types\t{}", g.types().len())?;
                    writeln!(w, "kg_predicates\t{}", g.predicates().len())?;
                    writeln!(w, "kg_type_triples\t{}", g.type_triples().len())?;
                    writeln!(w, "kg_relation_triples\t{}", g.relation_triples().len())?;
                }
                Ok(())
            })?;
        }
        Command::Pipeline {
            corpus,
            kg,
            gazetteer,
            fallback,
            harmonize,
            sweep,
            out,
        } => {
            let c = open_corpus(corpus, m)?;
            kg.record(m);
            let graph = kg.load()?;
            let options = PipelineOptions {
                gazetteer: open_gazetteer(gazetteer.as_deref(), m)?,
                fallback: fallback.clone(),
                harmonize: *harmonize,
            };
            m.extra.insert("fallback".into(), fallback.clone());
            m.extra.insert("harmonize".into(), harmonize.to_string());
            let run = run_pipeline(&c, &graph, settings, &options)?;
            let dir = out.as_path();
            let files = [
                "corpus.jsonl",
                "rules.tsv",
                "assertions.tsv",
                "novel_entities.tsv",
            ];
            outputs.write(&dir.join(files[0]), |w| write_corpus(&run.corpus, w))?;
            outputs.write(&dir.join(files[1]), |w| write_rules(&run.rules, w))?;
            outputs.write(&dir.join(files[2]), |w| write_assertions(&run.assertions, w))?;
            outputs.write(&dir.join(files[3]), |w| write_novel_entities(&run.novel, w))?;
            m.outputs.extend(files.iter().map(|f| f.to_string()));
            if *sweep {
                for s in sweep_all(&run.corpus, &graph, &run.rules, settings)? {
                    let name = format!("curve_{}_{}.tsv", s.kind, metric_name(s.metric));
                    outputs.write(&dir.join(&name), |w| write_curve(&s, w))?;
                    print_recommendation(&s);
                    m.outputs.push(name);
                }
            }
            let counts = count_status(&run.assertions);
            for (k, v) in &counts {
                m.extra.insert(format!("assertions_{k}"), v.to_string());
            }
            m.extra.insert("rules".into(), run.rules.len().to_string());
            m.extra.insert("inferred".into(), run.inferred.to_string());
            eprintln!(
                "{} rules, {} accepted assertions ({} inferred), {} novel entities",
                run.rules.len(),
                counts.get("accepted").copied().unwrap_or(0),
                run.inferred,
                run.novel.len()
            );
            outputs.write(&dir.join("manifest.json"), |w| m.write(w))?;
        }
    }
    Ok(())
}

fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::Conf => "conf",
        Metric::Cons => "cons",
    }
}

fn print_recommendation(s: &Sweep) {
    let flag = if s.no_clear_drop { " (no clear drop)" } else { "" };
    println!(
        "recommended {} {} threshold: {:.2}{flag}",
        s.kind,
        metric_name(s.metric),
        s.recommended
    );
}

/// Page type stratum of an assertion: the most specific direct type of the
/// page entity of its first listing.
fn page_stratum(a: &Assertion, corpus: &Corpus, kg: &KnowledgeGraph) -> String {
    a.provenance
        .first()
        .and_then(|p| corpus.find_listing(&p.listing_id))
        .and_then(|(page, _)| kg.direct_types_of(&page.page_entity))
        .and_then(|ts| ts.iter().next().cloned())
        .unwrap_or_else(|| "unknown".into())
}

fn staging_dir(out: &Path) -> PathBuf {
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!(".{name}.partial"))
}

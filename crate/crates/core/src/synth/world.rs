use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    mint_entity_id, Corpus, LinkKind, Listing, ListingContext, ListingKind, Mention, Page, Row, SubjectMark,
};
use crate::error::{Error, Result};
use crate::kg::{KgBuilder, KnowledgeGraph, Predicate};
use crate::rules::{Atom, Consequent, ContextPattern, Placeholder, Slot, Target};
use crate::tagger::{ORG, PERSON};

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub n_pages: usize,
    /// Contexts carrying planted rules, two rules each.
    pub n_contexts: usize,
    pub listings_per_page: usize,
    /// Inclusive bounds on rows per listing.
    pub rows_range: (usize, usize),
    pub kg_visibility: f64,
    pub se_noise: f64,
    pub tag_noise: f64,
    /// Listings of unrelated items under generic titles; they match no
    /// planted rule.
    pub n_noise_listings: usize,
    /// Share of items missing from the visible graph.
    pub novel_rate: f64,
    /// Share of context listings whose items are all missing from the
    /// visible graph.
    pub fresh_rate: f64,
    /// Chance that a row also mentions a guest agent next to its item.
    pub contributor_rate: f64,
    /// Upper bound of the per-context share of items that also carry their
    /// group's root type as a direct type.
    pub extra_type_rate: f64,
    /// Put both item groups under a common `Item` type that is also the
    /// domain of every item relation. Without it the relations have no
    /// domain.
    pub item_root: bool,
    /// Chance that a listing outside an entity section gets one of the
    /// generic section titles shared by all contexts.
    pub generic_section_rate: f64,
    /// Contexts whose items only partly share a type.
    pub n_noise_contexts: usize,
    /// Range of the share of the dominant type in noise contexts.
    pub noise_purity: (f64, f64),
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            n_pages: 400,
            n_contexts: 25,
            listings_per_page: 5,
            rows_range: (2, 12),
            kg_visibility: 0.8,
            se_noise: 0.05,
            tag_noise: 0.05,
            n_noise_listings: 200,
            novel_rate: 0.1,
            fresh_rate: 0.05,
            contributor_rate: 0.3,
            extra_type_rate: 0.0,
            item_root: true,
            generic_section_rate: 1.0,
            n_noise_contexts: 0,
            noise_purity: (0.55, 0.72),
            seed: 0,
        }
    }
}

impl WorldConfig {
    /// A world for threshold sweeps: clean contexts with confidences spread
    /// above 0.8 and noise contexts below.
    pub fn sweep(seed: u64) -> Self {
        WorldConfig {
            n_pages: 240,
            extra_type_rate: 1.0,
            item_root: false,
            n_noise_contexts: 12,
            n_noise_listings: 60,
            novel_rate: 0.0,
            fresh_rate: 0.0,
            contributor_rate: 0.0,
            seed,
            ..WorldConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let rates = [
            ("kg_visibility", self.kg_visibility),
            ("se_noise", self.se_noise),
            ("tag_noise", self.tag_noise),
            ("novel_rate", self.novel_rate),
            ("fresh_rate", self.fresh_rate),
            ("contributor_rate", self.contributor_rate),
            ("extra_type_rate", self.extra_type_rate),
            ("generic_section_rate", self.generic_section_rate),
            ("noise_purity", self.noise_purity.0),
            ("noise_purity", self.noise_purity.1),
        ];
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1], got {r}")));
            }
        }
        if self.n_contexts == 0 {
            return Err(Error::InvalidConfig("a world needs at least one context with planted rules".into()));
        }
        if self.rows_range.0 < 2 || self.rows_range.0 > self.rows_range.1 {
            return Err(Error::InvalidConfig(format!(
                "rows_range must satisfy 2 <= min <= max, got {:?}",
                self.rows_range
            )));
        }
        if self.n_pages < 2 || self.listings_per_page == 0 {
            return Err(Error::InvalidConfig("a world needs at least two pages with listings".into()));
        }
        if self.n_noise_listings > self.n_pages * self.listings_per_page {
            return Err(Error::InvalidConfig("more noise listings than listing slots".into()));
        }
        Ok(())
    }
}

/// A rule the generator guarantees on every covered listing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlantedRule {
    pub antecedent: ContextPattern,
    pub consequent: Consequent,
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub complete: KnowledgeGraph,
    pub planted: Vec<PlantedRule>,
    /// True subject entities per listing id.
    pub subjects: BTreeMap<String, BTreeSet<String>>,
}

impl GroundTruth {
    pub fn holds(&self, s: &str, p: &Predicate, o: &str) -> bool {
        self.complete.has_fact(s, p, o)
    }

    pub fn is_true_subject(&self, listing_id: &str, entity: &str) -> bool {
        self.subjects.get(listing_id).is_some_and(|s| s.contains(entity))
    }
}

pub struct World {
    pub corpus: Corpus,
    pub kg: KnowledgeGraph,
    pub truth: GroundTruth,
}

const PAGE_CLASSES: [(&str, &str); 8] = [
    ("Musician", "Person"),
    ("Writer", "Person"),
    ("Athlete", "Person"),
    ("Politician", "Person"),
    ("Company", "Organisation"),
    ("Club", "Organisation"),
    ("Band", "Organisation"),
    ("University", "Organisation"),
];

struct ItemGroup {
    root: &'static str,
    tag: &'static str,
    noun: &'static str,
    leaves: [&'static str; 5],
}

const GROUPS: [ItemGroup; 2] = [
    ItemGroup {
        root: "Work",
        tag: "WORK_OF_ART",
        noun: "Opus",
        leaves: ["Album", "Book", "Film", "Single", "Painting"],
    },
    ItemGroup {
        root: "Event",
        tag: "EVENT",
        noun: "Cup",
        leaves: ["Tournament", "Festival", "Election", "Conference", "Race"],
    },
];

const RELATIONS: [&str; 4] = ["creator", "producer", "publisher", "owner"];
const GENRE: &str = "genre";
const N_GENRES: usize = 12;
const N_FILLERS: usize = 150;
const N_GUESTS: usize = 60;
const TAGS: [&str; 4] = [PERSON, ORG, "WORK_OF_ART", "EVENT"];

const TITLE_WORDS: [&str; 8] = [
    "discography", "works", "filmography", "bibliography", "honours", "productions", "releases", "events",
];
const SECTIONS: [&str; 6] = ["", "", "early years", "later years", "selected", "overview"];
const NOISE_TITLES: [&str; 4] = ["see also", "members", "related people", "further reading"];

fn class_tag(class: usize) -> &'static str {
    if PAGE_CLASSES[class].1 == "Person" {
        PERSON
    } else {
        ORG
    }
}

/// Leaf item types are numbered group-major.
fn leaf(t: usize) -> &'static str {
    GROUPS[t / 5].leaves[t % 5]
}

fn group_of(t: usize) -> usize {
    t / 5
}

fn restricted_genre(t: usize) -> Option<String> {
    t.is_multiple_of(3).then(|| format!("Genre {}", leaf(t)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// Title alone implies type and page-entity relation.
    Title,
    /// Page class plus shared title; two contexts share the title.
    ClassTitle { class: usize },
    /// Title implies type; title plus section entity type implies a
    /// relation to the section entity.
    Section { section_class: usize },
    /// No planted rule; the dominant type covers only part of the items.
    Noise { purity: f64 },
}

#[derive(Debug, Clone)]
struct Context {
    title: String,
    kind: Kind,
    item_type: usize,
    predicate: &'static str,
    classes: Vec<usize>,
    extra_rate: f64,
}

fn pattern(atoms: Vec<Atom>) -> ContextPattern {
    ContextPattern::new(atoms).expect("planted patterns are well formed")
}

impl Context {
    fn planted(&self) -> Vec<PlantedRule> {
        let title = Atom::new(Slot::TopSection, self.title.clone());
        let ty = Consequent::has_type(leaf(self.item_type));
        let p = Predicate::new(self.predicate);
        match self.kind {
            Kind::Title => vec![
                PlantedRule {
                    antecedent: pattern(vec![title.clone()]),
                    consequent: ty,
                },
                PlantedRule {
                    antecedent: pattern(vec![title]),
                    consequent: Consequent::relation(p, Target::Placeholder(Placeholder::PageEntity)),
                },
            ],
            Kind::ClassTitle { class } => {
                let a = pattern(vec![Atom::new(Slot::PageEntityType, PAGE_CLASSES[class].0), title]);
                vec![
                    PlantedRule {
                        antecedent: a.clone(),
                        consequent: ty,
                    },
                    PlantedRule {
                        antecedent: a,
                        consequent: Consequent::relation(p, Target::Placeholder(Placeholder::PageEntity)),
                    },
                ]
            }
            Kind::Section { section_class } => vec![
                PlantedRule {
                    antecedent: pattern(vec![title.clone()]),
                    consequent: ty,
                },
                PlantedRule {
                    antecedent: pattern(vec![
                        title,
                        Atom::new(Slot::SectionEntityType, PAGE_CLASSES[section_class].0),
                    ]),
                    consequent: Consequent::relation(p, Target::Placeholder(Placeholder::SectionEntity)),
                },
            ],
            Kind::Noise { .. } => Vec::new(),
        }
    }
}

fn spread(i: usize) -> Vec<usize> {
    let n = PAGE_CLASSES.len();
    vec![i % n, (i + 3) % n, (i + 5) % n]
}

fn make_contexts(cfg: &WorldConfig, rng: &mut ChaCha8Rng) -> Vec<Context> {
    let mut out = Vec::new();
    let mut i = 0;
    let title = |i: usize| format!("{} {}", TITLE_WORDS[i % TITLE_WORDS.len()], i);
    while i < cfg.n_contexts {
        let group = i % 2;
        let item_type = group * 5 + rng.gen_range(0..5);
        let predicate = *RELATIONS.choose(rng).expect("non-empty");
        let extra_rate = rng.gen_range(0.0..=cfg.extra_type_rate);
        let base = Context {
            title: title(i),
            kind: Kind::Title,
            item_type,
            predicate,
            classes: spread(i),
            extra_rate,
        };
        match i % 5 {
            2 => {
                let section_class = rng.gen_range(0..PAGE_CLASSES.len());
                out.push(Context {
                    kind: Kind::Section { section_class },
                    ..base
                });
                i += 1;
            }
            3 if i + 1 < cfg.n_contexts => {
                let classes = [i % PAGE_CLASSES.len(), (i + 1) % PAGE_CLASSES.len()];
                let second = (1 - group) * 5 + rng.gen_range(0..5);
                for (class, ty) in classes.into_iter().zip([item_type, second]) {
                    out.push(Context {
                        kind: Kind::ClassTitle { class },
                        item_type: ty,
                        classes: vec![class],
                        ..base.clone()
                    });
                }
                i += 2;
            }
            _ => {
                out.push(base);
                i += 1;
            }
        }
    }
    for j in 0..cfg.n_noise_contexts {
        let (lo, hi) = cfg.noise_purity;
        out.push(Context {
            title: format!("miscellany {j}"),
            kind: Kind::Noise {
                purity: rng.gen_range(lo..=hi),
            },
            item_type: rng.gen_range(0..GROUPS.len() * 5),
            predicate: RELATIONS[0],
            classes: spread(j + 1),
            extra_rate: 0.0,
        });
    }
    out
}

struct Builder<'a> {
    cfg: &'a WorldConfig,
    rng: ChaCha8Rng,
    complete: Vec<(String, String, String)>,
    /// Entities absent from the visible graph.
    novel: BTreeSet<String>,
    subjects: BTreeMap<String, BTreeSet<String>>,
    fillers: Vec<(String, usize)>,
    /// Agents mentioned next to items; never objects of item relations.
    guests: Vec<(String, usize)>,
    pages: Vec<(String, usize)>,
    next_item: usize,
}

impl Builder<'_> {
    fn fact(&mut self, s: &str, p: &str, o: &str) {
        self.complete.push((s.to_string(), p.to_string(), o.to_string()));
    }

    fn tag(&mut self, tag: &str) -> String {
        if self.rng.gen_bool(self.cfg.tag_noise) {
            let others: Vec<&str> = TAGS.iter().copied().filter(|t| *t != tag).collect();
            others.choose(&mut self.rng).expect("non-empty").to_string()
        } else {
            tag.to_string()
        }
    }

    fn mark(&mut self, truth: bool) -> SubjectMark {
        let flip = self.rng.gen_bool(self.cfg.se_noise);
        if truth != flip {
            SubjectMark::Yes
        } else {
            SubjectMark::No
        }
    }

    fn filler(&mut self) -> (String, usize) {
        self.fillers.choose(&mut self.rng).expect("fillers exist").clone()
    }

    fn agent_mention(&mut self, id: &str, class: usize, subject: bool) -> Mention {
        let mut m = Mention::linked(id, id, LinkKind::Blue);
        m.ne_tag = Some(self.tag(class_tag(class)));
        m.is_subject = self.mark(subject);
        m
    }

    /// Emits one item with its complete-graph facts and returns its mention
    /// and id.
    fn item(
        &mut self,
        page_id: &str,
        ctx: &Context,
        novel_rate: f64,
        related: Option<&str>,
    ) -> (Mention, String) {
        let mut ty = ctx.item_type;
        if let Kind::Noise { purity } = ctx.kind {
            if !self.rng.gen_bool(purity) {
                let other = (group_of(ty) + 1) % GROUPS.len();
                ty = other * 5 + self.rng.gen_range(0..5);
            }
        }
        let group = &GROUPS[group_of(ty)];
        let surface = format!("{} {}", group.noun, self.next_item);
        self.next_item += 1;
        let novel = self.rng.gen_bool(novel_rate);
        let (id, mut mention) = if !novel {
            (surface.clone(), Mention::linked(surface.clone(), surface.clone(), LinkKind::Blue))
        } else if self.rng.gen_bool(0.5) {
            (surface.clone(), Mention::linked(surface.clone(), surface.clone(), LinkKind::Red))
        } else {
            let id = mint_entity_id(page_id, &surface);
            let mut m = Mention::plain(surface.clone());
            m.link_kind = LinkKind::Tagged;
            (id, m)
        };
        if novel {
            self.novel.insert(id.clone());
        }
        mention.ne_tag = Some(self.tag(group.tag));
        mention.is_subject = self.mark(true);

        self.fact(&id, "rdf:type", leaf(ty));
        if self.rng.gen_bool(ctx.extra_rate) {
            self.fact(&id, "rdf:type", group.root);
        }
        let genre = restricted_genre(ty).unwrap_or_else(|| format!("Genre {}", self.rng.gen_range(0..N_GENRES)));
        self.fact(&id, GENRE, &genre);
        let planted = !matches!(ctx.kind, Kind::Noise { .. });
        for p in RELATIONS {
            let object = match related {
                Some(o) if planted && p == ctx.predicate => o.to_string(),
                _ => self.filler().0,
            };
            self.fact(&id, p, &object);
        }
        (mention, id)
    }

    fn context_listing(&mut self, page_id: &str, page_entity: &str, ctx: &Context) -> (ListingContext, Vec<Row>) {
        let mut context = ListingContext {
            page_entity: page_entity.to_string(),
            top_section: ctx.title.clone(),
            ..Default::default()
        };
        let related = match ctx.kind {
            Kind::Section { section_class } => {
                let candidates: Vec<String> = self
                    .pages
                    .iter()
                    .filter(|(id, c)| *c == section_class && id != page_entity)
                    .map(|(id, _)| id.clone())
                    .collect();
                let x = candidates.choose(&mut self.rng).expect("every class has pages").clone();
                context.section = format!("{}s with {}", leaf(ctx.item_type), x).to_lowercase();
                context.section_entities = vec![x.clone()];
                Some(x)
            }
            _ => {
                if self.rng.gen_bool(self.cfg.generic_section_rate) {
                    context.section = SECTIONS.choose(&mut self.rng).expect("non-empty").to_string();
                }
                Some(page_entity.to_string())
            }
        };
        let novel_rate = if self.rng.gen_bool(self.cfg.fresh_rate) {
            1.0
        } else {
            self.cfg.novel_rate
        };
        let n = self.rng.gen_range(self.cfg.rows_range.0..=self.cfg.rows_range.1);
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (item, id) = self.item(page_id, ctx, novel_rate, related.as_deref());
            self.subjects.entry(String::new()).or_default().insert(id);
            let mut mentions = vec![item];
            if self.rng.gen_bool(0.5) {
                let year = format!("{}", self.rng.gen_range(1950..2020));
                let mut m = Mention::plain(year);
                m.is_subject = self.mark(false);
                mentions.push(m);
            }
            if self.rng.gen_bool(self.cfg.contributor_rate) {
                let (g, gc) = self.guests.choose(&mut self.rng).expect("guests exist").clone();
                mentions.push(self.agent_mention(&g, gc, false));
            }
            rows.push(Row::new(mentions));
        }
        (context, rows)
    }

    fn noise_listing(&mut self, page_id: &str, page_entity: &str) -> (ListingContext, Vec<Row>) {
        let context = ListingContext {
            page_entity: page_entity.to_string(),
            top_section: NOISE_TITLES.choose(&mut self.rng).expect("non-empty").to_string(),
            ..Default::default()
        };
        let n = self.rng.gen_range(self.cfg.rows_range.0..=self.cfg.rows_range.1);
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let ctx = Context {
                title: String::new(),
                kind: Kind::Noise { purity: 1.0 },
                item_type: self.rng.gen_range(0..GROUPS.len() * 5),
                predicate: RELATIONS[0],
                classes: Vec::new(),
                extra_rate: 0.0,
            };
            let (item, id) = self.item(page_id, &ctx, self.cfg.novel_rate, None);
            self.subjects.entry(String::new()).or_default().insert(id);
            rows.push(Row::new(vec![item]));
        }
        (context, rows)
    }
}

/// Builds a corpus, its visible graph and the ground truth from `cfg`.
/// The same config always yields the same world.
pub fn generate_world(cfg: &WorldConfig) -> Result<World> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let contexts = make_contexts(cfg, &mut rng);
    let fillers: Vec<(String, usize)> = (0..N_FILLERS)
        .map(|i| (format!("Agent {i}"), rng.gen_range(0..PAGE_CLASSES.len())))
        .collect();
    let guests: Vec<(String, usize)> = (0..N_GUESTS)
        .map(|i| (format!("Guest {i}"), rng.gen_range(0..PAGE_CLASSES.len())))
        .collect();
    let pages: Vec<(String, usize)> = (0..cfg.n_pages)
        .map(|i| (format!("Page {i}"), i % PAGE_CLASSES.len()))
        .collect();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); PAGE_CLASSES.len()];
    for (ci, c) in contexts.iter().enumerate() {
        for &class in &c.classes {
            by_class[class].push(ci);
        }
    }
    let slots = cfg.n_pages * cfg.listings_per_page;
    let noise_slots: BTreeSet<usize> = rand::seq::index::sample(&mut rng, slots, cfg.n_noise_listings)
        .into_iter()
        .collect();

    let mut b = Builder {
        cfg,
        rng,
        complete: Vec::new(),
        novel: BTreeSet::new(),
        subjects: BTreeMap::new(),
        fillers: fillers.clone(),
        guests: guests.clone(),
        pages: pages.clone(),
        next_item: 0,
    };
    for (id, class) in fillers.iter().chain(&guests).chain(&pages) {
        b.fact(id, "rdf:type", PAGE_CLASSES[*class].0);
    }

    let mut out_pages = Vec::with_capacity(cfg.n_pages);
    let mut subjects = BTreeMap::new();
    for (pi, (page_entity, class)) in pages.iter().enumerate() {
        let mut allowed = by_class[*class].clone();
        allowed.shuffle(&mut b.rng);
        let mut listings = Vec::with_capacity(cfg.listings_per_page);
        for li in 0..cfg.listings_per_page {
            let (context, rows) = if noise_slots.contains(&(pi * cfg.listings_per_page + li)) || allowed.is_empty() {
                b.noise_listing(page_entity, page_entity)
            } else {
                let ctx = &contexts[allowed[li % allowed.len()]];
                b.context_listing(page_entity, page_entity, ctx)
            };
            let listing_id = format!("{page_entity}::{li}");
            subjects.insert(listing_id.clone(), b.subjects.remove("").unwrap_or_default());
            let kind = if b.rng.gen_bool(0.2) { ListingKind::Table } else { ListingKind::List };
            let rows = if kind == ListingKind::Table {
                rows.into_iter()
                    .map(|r| Row::new(r.mentions.into_iter().enumerate().map(|(c, m)| m.with_column(c)).collect()))
                    .collect()
            } else {
                rows
            };
            listings.push(Listing {
                listing_id,
                kind,
                rows,
                context,
                headers: Vec::new(),
            });
        }
        out_pages.push(Page {
            page_id: page_entity.clone(),
            title: page_entity.clone(),
            page_entity: page_entity.clone(),
            listings,
        });
    }

    let mut visible = KgBuilder::new();
    let mut complete = KgBuilder::new();
    for builder in [&mut visible, &mut complete] {
        for (class, parent) in PAGE_CLASSES {
            builder.subclass(class, parent);
        }
        for g in &GROUPS {
            if cfg.item_root {
                builder.subclass(g.root, "Item");
            }
            for l in g.leaves {
                builder.subclass(l, g.root);
            }
        }
        let domain = cfg.item_root.then_some("Item");
        for p in RELATIONS.iter().chain([&GENRE]) {
            builder.schema(p, domain, None);
        }
        for t in 0..GROUPS.len() * 5 {
            if let Some(g) = restricted_genre(t) {
                builder.restriction(leaf(t), GENRE, &g);
            }
        }
    }
    let mut rng = b.rng;
    for (s, p, o) in &b.complete {
        complete.triple(s, p, o);
        if !b.novel.contains(s) && rng.gen_bool(cfg.kg_visibility) {
            visible.triple(s, p, o);
        }
    }

    let (corpus, _) = Corpus::from_pages(out_pages)?;
    let mut planted: Vec<PlantedRule> = contexts.iter().flat_map(Context::planted).collect();
    planted.sort();
    Ok(World {
        corpus,
        kg: visible.build(),
        truth: GroundTruth {
            complete: complete.build(),
            planted,
            subjects,
        },
    })
}

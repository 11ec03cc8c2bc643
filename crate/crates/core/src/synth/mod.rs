//! Seeded synthetic worlds with a hidden complete graph, and scoring of
//! pipeline output against it.

mod bundle;
mod score;
mod world;

pub use bundle::{read_ground_truth, write_world, WorldPaths};
pub use score::{
    rule_holds, score, score_rules, stratified_sample, write_metrics, Metrics, RuleRecovery,
};
pub use world::{generate_world, GroundTruth, PlantedRule, World, WorldConfig};

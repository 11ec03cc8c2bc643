//! Writes a synthetic world to disk, runs the whole pipeline on it and
//! writes the usual output files, like `listing-rules pipeline` does.

use listing_rules::assertions::write_assertions;
use listing_rules::corpus::load_corpus;
use listing_rules::kg::{load_kg, KgPaths};
use listing_rules::pipeline::{run_pipeline, PipelineOptions, Settings};
use listing_rules::rules::write_rules;
use listing_rules::synth::{generate_world, write_world, WorldConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("listing-rules-example");
    let world = generate_world(&WorldConfig { n_pages: 100, n_noise_listings: 50, ..Default::default() })?;
    let paths = write_world(&world, &dir.join("world"))?;

    let (corpus, report) = load_corpus(&paths.corpus)?;
    let kg = load_kg(&KgPaths {
        triples: Some(&paths.triples),
        schema: Some(&paths.schema),
        hierarchy: Some(&paths.hierarchy),
        restrictions: Some(&paths.restrictions),
    })?;
    println!("{} pages, {} listings", report.pages, report.listings_kept);

    let mut settings = Settings::default();
    settings.apply_config("tau_conf = 0.85\n")?;
    let run = run_pipeline(&corpus, &kg, &settings, &PipelineOptions::default())?;
    write_rules(&run.rules, std::fs::File::create(dir.join("rules.tsv"))?)?;
    write_assertions(&run.assertions, std::fs::File::create(dir.join("assertions.tsv"))?)?;
    println!(
        "{} rules, {:?}, {} inferred, {} novel entities; files in {}",
        run.rules.len(),
        run.filter,
        run.inferred,
        run.novel.len(),
        dir.display()
    );
    Ok(())
}

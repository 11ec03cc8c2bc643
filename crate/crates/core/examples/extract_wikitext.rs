//! Parses the fixture page and prints every listing with its context.

mod common;

use listing_rules::wikitext::extract_from_wikitext;

fn main() {
    let kg = common::kg();
    let corpus = common::corpus(&kg);
    for (page, l) in corpus.listings() {
        let ctx = &l.context;
        println!("{} [{:?}] on {}", l.listing_id, l.kind, page.title);
        println!("  top section {:?}, section {:?}", ctx.top_section, ctx.section);
        println!("  section entities {:?}", ctx.section_entities);
        for row in &l.rows {
            let cells: Vec<String> = row
                .mentions
                .iter()
                .map(|m| match &m.entity_ref {
                    Some(e) => format!("[{e}] ({:?})", m.link_kind),
                    None => m.surface.clone(),
                })
                .collect();
            println!("    {}", cells.join(" | "));
        }
    }

    let broken = "== Works ==\n{| class=\"wikitable\"\n|-\n| [[A]] || 1990\n";
    let x = extract_from_wikitext(broken, "Broken", &Default::default());
    println!("unterminated table: {} listings, warnings {:?}", x.page.listings.len(), x.warnings);
}

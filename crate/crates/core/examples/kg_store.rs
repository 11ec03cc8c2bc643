//! Queries against the fixture graph: closed types, facts, frequencies.

mod common;

use std::collections::BTreeSet;

use listing_rules::kg::Predicate;

fn main() {
    let kg = common::kg();
    println!("types of Use Your Illusion I: {:?}", kg.types_of("Use Your Illusion I"));
    println!("Hard_rock_album below Work: {}", kg.is_subtype_of("Hard_rock_album", "Work"));
    println!("domain of artist: {:?}", kg.domain_of(&Predicate::new("artist")));
    println!("restrictions: {:?}", kg.restrictions().collect::<Vec<_>>());

    let artist = Predicate::new("artist");
    let albums: BTreeSet<String> = ["Use Your Illusion I", "Use Your Illusion II", "Pawnshop Guitars"]
        .map(String::from)
        .into();
    for o in ["Gilby Clarke", "Guns N' Roses"] {
        let f = kg.freq(&albums, &artist, o).expect("albums have artists");
        println!("freq(albums, artist, {o}) = {}/{} = {:.3}", f.hits, f.total, f.value());
    }
    println!("works by Gilby Clarke: {:?}", kg.subjects_with(&artist, "Gilby Clarke"));
    println!("inverse view: {:?}", kg.objects("Gilby Clarke", &artist.inverted()));
}

use std::path::PathBuf;

use wander_core::nav::plan_path;
use wander_core::text::normalize_name;
use wander_core::world::{distance, ArtworkFilter, MuseumWorld, SortBy, VIEWING_RADIUS};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn museum() -> MuseumWorld {
    MuseumWorld::load(fixture("museum35.json")).expect("fixture loads")
}

#[test]
fn thirty_five_artworks_all_reachable() {
    let w = museum();
    assert_eq!(w.artworks.len(), 35);
    let reach = w.grid.flood_fill(w.grid.cell_of(w.spawn));
    for a in &w.artworks {
        let cell = w.viewing_cell(&a.id).unwrap();
        assert!(w.grid.is_traversable(cell));
        assert!(reach[(cell.row * w.grid.width() + cell.col) as usize], "{}", a.id);
        let p = w.viewing_point(&a.id).unwrap();
        let d = distance(p, a.floor_position());
        assert!(d <= VIEWING_RADIUS, "{} viewing point {d} m away", a.id);
        let facing = ((p[0] - a.position[0]) * a.facing[0] + (p[1] - a.position[1]) * a.facing[1]) / d;
        assert!(facing >= 0.5 - 1e-9, "{} viewed from the side", a.id);
        assert!(plan_path(&w, w.spawn, a).is_ok(), "{}", a.id);
    }
}

#[test]
fn loading_is_deterministic() {
    assert_eq!(museum().to_canonical_json(), museum().to_canonical_json());
}

#[test]
fn every_artwork_resolves_by_name_and_id() {
    let w = museum();
    for a in &w.artworks {
        assert_eq!(w.find_artwork(&a.id).map(|x| &x.id), Some(&a.id));
        assert_eq!(w.find_artwork(&a.name).map(|x| &x.id), Some(&a.id));
        assert_eq!(w.find_artwork(&a.name.to_uppercase()).map(|x| &x.id), Some(&a.id));
    }
    assert_eq!(w.find_artwork("the birth of venus").unwrap().id, "painting 007");
    assert_eq!(w.find_artwork("painting 007").unwrap().name, "The Birth of Venus");
    assert!(w.find_artwork("Girl with a Pearl Ring").is_none());
}

/// Linear scan, then a stable sort, as an independent reference.
fn oracle<'a>(w: &'a MuseumWorld, f: &ArtworkFilter) -> Vec<&'a str> {
    let mut v: Vec<_> = w
        .artworks
        .iter()
        .filter(|a| f.style.as_ref().is_none_or(|s| normalize_name(&a.style) == normalize_name(s)))
        .filter(|a| f.author.as_ref().is_none_or(|s| normalize_name(&a.author) == normalize_name(s)))
        .collect();
    v.sort_by(|a, b| a.id.cmp(&b.id));
    match f.sort_by {
        SortBy::Id => {}
        SortBy::Popularity => v.sort_by(|a, b| b.popularity.partial_cmp(&a.popularity).unwrap()),
        SortBy::Distance(p) => v.sort_by(|a, b| {
            distance(a.floor_position(), p)
                .partial_cmp(&distance(b.floor_position(), p))
                .unwrap()
        }),
    }
    v.into_iter().take(f.limit).map(|a| a.id.as_str()).collect()
}

#[test]
fn filters_match_brute_force() {
    let w = museum();
    let styles = [None, Some("Renaissance"), Some("chinese painting"), Some("Abstract"), Some("Cubism")];
    let authors = [None, Some("Leonardo da Vinci"), Some("pablo picasso")];
    let sorts = [SortBy::Id, SortBy::Popularity, SortBy::Distance(w.spawn), SortBy::Distance([35.0, 3.0])];
    for style in styles {
        for author in authors {
            for sort_by in sorts {
                for limit in [1, 3, 8, 50] {
                    let f = ArtworkFilter {
                        style: style.map(str::to_string),
                        author: author.map(str::to_string),
                        sort_by,
                        limit,
                    };
                    let got: Vec<&str> = w.artworks_by_filter(&f).unwrap().iter().map(|a| a.id.as_str()).collect();
                    assert_eq!(got, oracle(&w, &f), "{f:?}");
                }
            }
        }
    }
}

#[test]
fn documented_filter_examples() {
    let w = museum();
    let top = w.artworks_by_filter(&ArtworkFilter::sorted(SortBy::Popularity, 1)).unwrap();
    assert_eq!(top[0].id, "painting 000");
    let mut f = ArtworkFilter::sorted(SortBy::Id, 50);
    f.style = Some("Renaissance".into());
    let ids: Vec<&str> = w.artworks_by_filter(&f).unwrap().iter().map(|a| a.id.as_str()).collect();
    assert_eq!(ids, ["painting 000", "painting 001", "painting 007", "painting 010", "painting 011"]);
    assert!(w.artworks_by_filter(&ArtworkFilter::sorted(SortBy::Id, 0)).is_err());
}

#[test]
fn document_round_trip() {
    let w = museum();
    let text = serde_json::to_string(&w.document()).unwrap();
    let again = MuseumWorld::from_json(&text).unwrap();
    assert_eq!(again.to_canonical_json(), w.to_canonical_json());
}

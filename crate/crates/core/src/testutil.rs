use crate::world::{Artwork, Bounds, MuseumDocument, MuseumWorld, Rect, Region};

fn art(id: &str, name: &str, style: &str, pos: [f64; 3], facing: [f64; 2], popularity: f64) -> Artwork {
    Artwork {
        id: id.into(),
        name: name.into(),
        author: "Test Author".into(),
        year: 1500,
        style: style.into(),
        description: format!("{name} is a test artwork."),
        position: pos,
        facing,
        popularity,
        visit_count: 0,
        regions: vec![],
    }
}

/// Two artworks on opposite walls of a 10 x 6 m room.
pub fn tiny_world() -> MuseumWorld {
    let mut venus = art("painting 001", "The Birth of Venus", "Renaissance", [9.7, 3.0, 1.5], [-1.0, 0.0], 50.0);
    venus.regions = vec![
        Region { name: "Goddess Venus".into(), rect: Rect { x: 0.38, y: 0.1, w: 0.24, h: 0.8 }, note: "centre".into() },
        Region { name: "Zephyr and Aura".into(), rect: Rect { x: 0.0, y: 0.05, w: 0.33, h: 0.6 }, note: "left".into() },
    ];
    let doc = MuseumDocument {
        schema: 1,
        bounds: Bounds { w: 10.0, h: 6.0 },
        spawn: [5.0, 3.0],
        obstacles: vec![],
        artworks: vec![
            art("painting 000", "Mona Lisa", "Renaissance", [0.3, 3.0, 1.5], [1.0, 0.0], 90.0),
            venus,
        ],
    };
    MuseumWorld::from_document(doc).expect("tiny world is valid")
}

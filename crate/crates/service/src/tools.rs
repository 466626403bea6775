//! The `validate` and `route` verbs.

use std::path::Path;

use serde::Serialize;
use wander_core::nav::{plan_path, Path as NavPath};
use wander_core::world::WorldError;
use wander_core::MuseumWorld;

/// Exit code for unreadable input files.
pub const EXIT_IO: i32 = 2;
/// Exit code for content violations and failed checks.
pub const EXIT_INVALID: i32 = 1;

pub struct Outcome {
    pub code: i32,
    pub message: String,
}

pub fn validate(path: &Path) -> Outcome {
    match MuseumWorld::load(path) {
        Ok(w) => Outcome {
            code: 0,
            message: format!(
                "{} artworks, all reachable ({} free cells at {} m)",
                w.artworks.len(),
                w.grid.traversable_count(),
                w.grid.resolution()
            ),
        },
        Err(e @ WorldError::Io { .. }) => Outcome {
            code: EXIT_IO,
            message: e.to_string(),
        },
        Err(e) => Outcome {
            code: EXIT_INVALID,
            message: format!("invalid museum: {e}"),
        },
    }
}

#[derive(Debug, Serialize)]
pub struct RouteDump<'a> {
    pub to: &'a str,
    pub name: &'a str,
    pub from: [f64; 2],
    #[serde(flatten)]
    pub path: NavPath,
}

pub fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y] => {
            let x: f64 = x.parse().map_err(|_| format!("bad x coordinate `{x}`"))?;
            let y: f64 = y.parse().map_err(|_| format!("bad y coordinate `{y}`"))?;
            Ok([x, y])
        }
        _ => Err(format!("expected X,Y but got `{s}`")),
    }
}

pub fn route(museum: &Path, from: [f64; 2], to: &str) -> Outcome {
    let world = match MuseumWorld::load(museum) {
        Ok(w) => w,
        Err(e) => return validate_error(e),
    };
    let Some(art) = world.find_artwork(to) else {
        return Outcome {
            code: EXIT_INVALID,
            message: format!("no artwork matches `{to}`"),
        };
    };
    match plan_path(&world, from, art) {
        Ok(path) => {
            let dump = RouteDump {
                to: &art.id,
                name: &art.name,
                from,
                path,
            };
            Outcome {
                code: 0,
                message: serde_json::to_string_pretty(&dump).expect("route serializes"),
            }
        }
        Err(e) => Outcome {
            code: EXIT_INVALID,
            message: e.to_string(),
        },
    }
}

fn validate_error(e: WorldError) -> Outcome {
    let code = if matches!(e, WorldError::Io { .. }) { EXIT_IO } else { EXIT_INVALID };
    Outcome {
        code,
        message: e.to_string(),
    }
}

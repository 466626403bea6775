//! Museum content: artworks, floor geometry and the derived occupancy grid.
//!
//! A museum is loaded from a single JSON document (`"schema": 1`). Loading
//! validates every artwork, rasterises walls and artwork footprints into an
//! [`OccupancyGrid`], inflates them by the agent radius and picks one viewing
//! cell per artwork that is reachable from the spawn point.

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize_name;

/// Metres per grid cell.
pub const GRID_RESOLUTION: f64 = 0.25;
/// Radius of the walking avatars, used to inflate blocked cells.
pub const AGENT_RADIUS: f64 = 0.3;
/// Maximum distance between an artwork and its viewing cell.
pub const VIEWING_RADIUS: f64 = 2.0;
/// Width of the wall segment an artwork occupies on the floor plan.
pub const ARTWORK_SPAN: f64 = 1.0;

const SCHEMA_VERSION: u32 = 1;
const FACING_TOLERANCE: f64 = 1e-6;
// Viewing cells must lie within 60 degrees of the facing direction.
const VIEWING_COS: f64 = 0.5;

pub type Vec2 = [f64; 2];

/// Number of cells an obstacle is grown by: `ceil(radius / resolution)`.
pub fn inflation_cells() -> i32 {
    (AGENT_RADIUS / GRID_RESOLUTION).ceil() as i32
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("cannot read museum file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed museum document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// A content violation. Every variant names the offending entity.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("unsupported schema version {0} (expected 1)")]
    Schema(u32),
    #[error("museum bounds must be positive, got {w} x {h}")]
    Bounds { w: f64, h: f64 },
    #[error("obstacle {0} has fewer than 3 vertices")]
    DegenerateObstacle(usize),
    #[error("duplicate artwork id `{0}`")]
    DuplicateId(String),
    #[error("artwork `{0}` lies outside the museum bounds")]
    OutOfBounds(String),
    #[error("artwork `{id}` is placed inside obstacle {obstacle}")]
    InsideObstacle { id: String, obstacle: usize },
    #[error("artwork `{0}` has a facing vector that is not unit length")]
    Facing(String),
    #[error("artwork `{0}` has negative popularity")]
    Popularity(String),
    #[error("artwork `{artwork}` region `{region}`: {reason}")]
    Region {
        artwork: String,
        region: String,
        reason: &'static str,
    },
    #[error("spawn point ({0}, {1}) is not on a traversable cell")]
    SpawnBlocked(f64, f64),
    #[error("artwork `{0}` has no viewing cell reachable from the spawn point")]
    Unreachable(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("filter limit must be at least 1")]
    ZeroLimit,
}

/// Normalised rectangle in artwork image space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for Rect {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Rect { x, y, w, h }
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x, r.y, r.w, r.h]
    }
}

impl Rect {
    fn is_normalized(&self) -> bool {
        self.x >= 0.0
            && self.y >= 0.0
            && self.w >= 0.0
            && self.h >= 0.0
            && self.x + self.w <= 1.0
            && self.y + self.h <= 1.0
    }
}

/// A highlightable region of interest on an artwork.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub rect: Rect,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artwork {
    pub id: String,
    pub name: String,
    pub author: String,
    pub year: i32,
    pub style: String,
    #[serde(default)]
    pub description: String,
    /// `[x, y, z]` in metres; `x`/`y` on the floor plan, `z` is hanging height.
    pub position: [f64; 3],
    pub facing: Vec2,
    #[serde(default)]
    pub popularity: f64,
    /// Visit count at load time; live counts are kept in [`VisitStats`].
    #[serde(default)]
    pub visit_count: u64,
    #[serde(default)]
    pub regions: Vec<Region>,
}

impl Artwork {
    pub fn floor_position(&self) -> Vec2 {
        [self.position[0], self.position[1]]
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        let key = normalize_name(name);
        self.regions.iter().find(|r| normalize_name(&r.name) == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub w: f64,
    pub h: f64,
}

/// The on-disk museum document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuseumDocument {
    pub schema: u32,
    pub bounds: Bounds,
    pub spawn: Vec2,
    #[serde(default)]
    pub obstacles: Vec<Vec<Vec2>>,
    pub artworks: Vec<Artwork>,
}

/// Integer grid coordinate `(col, row)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: i32,
    pub row: i32,
}

impl Cell {
    pub const fn new(col: i32, row: i32) -> Self {
        Cell { col, row }
    }
}

/// Traversability bitmap over the floor plan.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    resolution: f64,
    width: i32,
    height: i32,
    traversable: Vec<bool>,
}

impl OccupancyGrid {
    /// Builds a grid from a row-major traversability mask.
    pub fn from_mask(width: i32, height: i32, resolution: f64, traversable: Vec<bool>) -> Self {
        assert_eq!(traversable.len(), (width * height) as usize, "mask size mismatch");
        OccupancyGrid {
            resolution,
            width,
            height,
            traversable,
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.col >= 0 && cell.row >= 0 && cell.col < self.width && cell.row < self.height
    }

    /// Out-of-bounds cells are never traversable.
    pub fn is_traversable(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && self.traversable[(cell.row * self.width + cell.col) as usize]
    }

    pub fn cell_of(&self, p: Vec2) -> Cell {
        Cell::new(
            (p[0] / self.resolution).floor() as i32,
            (p[1] / self.resolution).floor() as i32,
        )
    }

    pub fn center(&self, cell: Cell) -> Vec2 {
        [
            (cell.col as f64 + 0.5) * self.resolution,
            (cell.row as f64 + 0.5) * self.resolution,
        ]
    }

    pub fn point_traversable(&self, p: Vec2) -> bool {
        self.is_traversable(self.cell_of(p))
    }

    pub fn traversable_count(&self) -> usize {
        self.traversable.iter().filter(|t| **t).count()
    }

    /// 8-connected neighbours with their step cost. Diagonal steps are only
    /// offered when both orthogonal cells they pass between are traversable.
    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = (Cell, f64)> + '_ {
        const STEPS: [(i32, i32); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        STEPS.iter().filter_map(move |&(dc, dr)| {
            let next = Cell::new(cell.col + dc, cell.row + dr);
            if !self.is_traversable(next) {
                return None;
            }
            if dc != 0 && dr != 0 {
                let side_a = Cell::new(cell.col + dc, cell.row);
                let side_b = Cell::new(cell.col, cell.row + dr);
                if !self.is_traversable(side_a) || !self.is_traversable(side_b) {
                    return None;
                }
                Some((next, std::f64::consts::SQRT_2))
            } else {
                Some((next, 1.0))
            }
        })
    }

    /// Cells reachable from `start` under the same moves as [`Self::neighbors`].
    pub fn flood_fill(&self, start: Cell) -> Vec<bool> {
        let mut seen = vec![false; self.traversable.len()];
        if !self.is_traversable(start) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen[self.index(start)] = true;
        while let Some(cell) = queue.pop_front() {
            for (next, _) in self.neighbors(cell) {
                let i = self.index(next);
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    pub(crate) fn index(&self, cell: Cell) -> usize {
        (cell.row * self.width + cell.col) as usize
    }

    /// One string per row, `.` traversable and `#` blocked, row 0 first.
    pub fn rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|row| {
                (0..self.width)
                    .map(|col| {
                        if self.is_traversable(Cell::new(col, row)) {
                            '.'
                        } else {
                            '#'
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

impl Serialize for OccupancyGrid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("OccupancyGrid", 4)?;
        s.serialize_field("resolution", &self.resolution)?;
        s.serialize_field("width", &self.width)?;
        s.serialize_field("height", &self.height)?;
        s.serialize_field("rows", &self.rows())?;
        s.end()
    }
}

/// Live per-artwork visit counters, shared by all sessions.
#[derive(Debug)]
pub struct VisitStats {
    ids: Vec<String>,
    counts: Vec<AtomicU64>,
}

impl VisitStats {
    pub fn new(world: &MuseumWorld) -> Self {
        VisitStats {
            ids: world.artworks.iter().map(|a| a.id.clone()).collect(),
            counts: world
                .artworks
                .iter()
                .map(|a| AtomicU64::new(a.visit_count))
                .collect(),
        }
    }

    pub fn increment(&self, id: &str) -> Option<u64> {
        let i = self.ids.iter().position(|x| x == id)?;
        Some(self.counts[i].fetch_add(1, Ordering::Relaxed) + 1)
    }

    pub fn get(&self, id: &str) -> Option<u64> {
        let i = self.ids.iter().position(|x| x == id)?;
        Some(self.counts[i].load(Ordering::Relaxed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SortBy {
    Popularity,
    Distance(Vec2),
    Id,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArtworkFilter {
    pub style: Option<String>,
    pub author: Option<String>,
    pub sort_by: SortBy,
    pub limit: usize,
}

impl ArtworkFilter {
    pub fn sorted(sort_by: SortBy, limit: usize) -> Self {
        ArtworkFilter {
            style: None,
            author: None,
            sort_by,
            limit,
        }
    }
}

/// Immutable, validated museum. Safe to share across sessions.
#[derive(Debug, Clone, Serialize)]
pub struct MuseumWorld {
    pub bounds: Bounds,
    pub spawn: Vec2,
    pub obstacles: Vec<Vec<Vec2>>,
    /// Sorted by id.
    pub artworks: Vec<Artwork>,
    pub grid: OccupancyGrid,
    /// Viewing cell per artwork, parallel to `artworks`.
    viewing: Vec<Cell>,
    #[serde(skip)]
    by_id: HashMap<String, usize>,
}

impl MuseumWorld {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        let doc: MuseumDocument = serde_json::from_str(text)?;
        Ok(Self::from_document(doc)?)
    }

    pub fn from_document(doc: MuseumDocument) -> Result<Self, ValidationError> {
        if doc.schema != SCHEMA_VERSION {
            return Err(ValidationError::Schema(doc.schema));
        }
        let Bounds { w, h } = doc.bounds;
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(ValidationError::Bounds { w, h });
        }
        if let Some(i) = doc.obstacles.iter().position(|p| p.len() < 3) {
            return Err(ValidationError::DegenerateObstacle(i));
        }

        let mut artworks = doc.artworks;
        artworks.sort_by(|a, b| a.id.cmp(&b.id));
        let mut by_id = HashMap::new();
        for (i, art) in artworks.iter().enumerate() {
            if by_id.insert(art.id.clone(), i).is_some() {
                return Err(ValidationError::DuplicateId(art.id.clone()));
            }
            validate_artwork(art, doc.bounds, &doc.obstacles)?;
        }

        let grid = rasterize(doc.bounds, &doc.obstacles, &artworks);
        let spawn_cell = grid.cell_of(doc.spawn);
        if !grid.is_traversable(spawn_cell) {
            return Err(ValidationError::SpawnBlocked(doc.spawn[0], doc.spawn[1]));
        }
        let reachable = grid.flood_fill(spawn_cell);
        let viewing = artworks
            .iter()
            .map(|art| {
                viewing_cell(&grid, &reachable, art)
                    .ok_or_else(|| ValidationError::Unreachable(art.id.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;

        Ok(MuseumWorld {
            bounds: doc.bounds,
            spawn: doc.spawn,
            obstacles: doc.obstacles,
            artworks,
            grid,
            viewing,
            by_id,
        })
    }

    /// The content as a museum document, e.g. for clients.
    pub fn document(&self) -> MuseumDocument {
        MuseumDocument {
            schema: SCHEMA_VERSION,
            bounds: self.bounds,
            spawn: self.spawn,
            obstacles: self.obstacles.clone(),
            artworks: self.artworks.clone(),
        }
    }

    pub fn artwork(&self, id: &str) -> Option<&Artwork> {
        self.by_id.get(id).map(|&i| &self.artworks[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn viewing_cell(&self, id: &str) -> Option<Cell> {
        self.by_id.get(id).map(|&i| self.viewing[i])
    }

    /// Centre of the viewing cell: where a visitor stands to look at `id`.
    pub fn viewing_point(&self, id: &str) -> Option<Vec2> {
        self.viewing_cell(id).map(|c| self.grid.center(c))
    }

    /// Resolves an id or a display name to an artwork.
    ///
    /// An exact id wins; otherwise names (and ids) are compared after
    /// case folding, punctuation stripping and whitespace collapsing. Ties go
    /// to the lowest id.
    pub fn find_artwork(&self, query: &str) -> Option<&Artwork> {
        if let Some(art) = self.artwork(query) {
            return Some(art);
        }
        let key = normalize_name(query);
        if key.is_empty() {
            return None;
        }
        // artworks are id-sorted, so the first hit is the lowest id
        self.artworks
            .iter()
            .find(|a| normalize_name(&a.name) == key || normalize_name(&a.id) == key)
    }

    pub fn artworks_by_filter(&self, filter: &ArtworkFilter) -> Result<Vec<&Artwork>, FilterError> {
        if filter.limit == 0 {
            return Err(FilterError::ZeroLimit);
        }
        let style = filter.style.as_deref().map(normalize_name);
        let author = filter.author.as_deref().map(normalize_name);
        let mut hits: Vec<&Artwork> = self
            .artworks
            .iter()
            .filter(|a| style.as_ref().is_none_or(|s| normalize_name(&a.style) == *s))
            .filter(|a| author.as_ref().is_none_or(|s| normalize_name(&a.author) == *s))
            .collect();
        match filter.sort_by {
            SortBy::Id => {}
            SortBy::Popularity => {
                hits.sort_by(|a, b| b.popularity.total_cmp(&a.popularity));
            }
            SortBy::Distance(from) => {
                hits.sort_by(|a, b| {
                    distance(a.floor_position(), from).total_cmp(&distance(b.floor_position(), from))
                });
            }
        }
        hits.truncate(filter.limit);
        Ok(hits)
    }

    /// Serialized form used for determinism checks and debugging.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("world serialization is infallible")
    }
}

pub fn distance(a: Vec2, b: Vec2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn validate_artwork(
    art: &Artwork,
    bounds: Bounds,
    obstacles: &[Vec<Vec2>],
) -> Result<(), ValidationError> {
    let [x, y, _] = art.position;
    if !(x >= 0.0 && y >= 0.0 && x <= bounds.w && y <= bounds.h) {
        return Err(ValidationError::OutOfBounds(art.id.clone()));
    }
    if let Some(obstacle) = obstacles.iter().position(|poly| point_in_polygon([x, y], poly)) {
        return Err(ValidationError::InsideObstacle {
            id: art.id.clone(),
            obstacle,
        });
    }
    let norm = art.facing[0].hypot(art.facing[1]);
    if (norm - 1.0).abs() > FACING_TOLERANCE {
        return Err(ValidationError::Facing(art.id.clone()));
    }
    if art.popularity.is_nan() || art.popularity < 0.0 {
        return Err(ValidationError::Popularity(art.id.clone()));
    }
    let mut names: Vec<String> = Vec::with_capacity(art.regions.len());
    for region in &art.regions {
        let err = |reason| ValidationError::Region {
            artwork: art.id.clone(),
            region: region.name.clone(),
            reason,
        };
        if !region.rect.is_normalized() {
            return Err(err("rectangle is not inside the unit square"));
        }
        let key = normalize_name(&region.name);
        if names.contains(&key) {
            return Err(err("duplicate region name"));
        }
        names.push(key);
    }
    Ok(())
}

fn rasterize(bounds: Bounds, obstacles: &[Vec<Vec2>], artworks: &[Artwork]) -> OccupancyGrid {
    let res = GRID_RESOLUTION;
    let width = (bounds.w / res).ceil() as i32;
    let height = (bounds.h / res).ceil() as i32;
    let mut blocked = vec![false; (width * height) as usize];

    for row in 0..height {
        for col in 0..width {
            let lo = [col as f64 * res, row as f64 * res];
            let hi = [lo[0] + res, lo[1] + res];
            let covered = obstacles.iter().any(|poly| polygon_touches_box(poly, lo, hi))
                || artworks.iter().any(|art| {
                    let (a, b) = artwork_segment(art);
                    segment_touches_box(a, b, lo, hi)
                });
            if covered {
                blocked[(row * width + col) as usize] = true;
            }
        }
    }

    let r = inflation_cells();
    let mut traversable = vec![true; blocked.len()];
    for row in 0..height {
        for col in 0..width {
            if !blocked[(row * width + col) as usize] {
                continue;
            }
            for dr in -r..=r {
                for dc in -r..=r {
                    if dr * dr + dc * dc > r * r {
                        continue;
                    }
                    let (c, rr) = (col + dc, row + dr);
                    if c >= 0 && rr >= 0 && c < width && rr < height {
                        traversable[(rr * width + c) as usize] = false;
                    }
                }
            }
        }
    }
    OccupancyGrid::from_mask(width, height, res, traversable)
}

/// The wall segment an artwork hangs on, perpendicular to its facing.
fn artwork_segment(art: &Artwork) -> (Vec2, Vec2) {
    let [x, y, _] = art.position;
    let along = [-art.facing[1], art.facing[0]];
    let half = ARTWORK_SPAN / 2.0;
    (
        [x - along[0] * half, y - along[1] * half],
        [x + along[0] * half, y + along[1] * half],
    )
}

fn viewing_cell(grid: &OccupancyGrid, reachable: &[bool], art: &Artwork) -> Option<Cell> {
    let p = art.floor_position();
    let reach = (VIEWING_RADIUS / grid.resolution()).ceil() as i32 + 1;
    let origin = grid.cell_of(p);
    let mut best: Option<(f64, Cell)> = None;
    for row in origin.row - reach..=origin.row + reach {
        for col in origin.col - reach..=origin.col + reach {
            let cell = Cell::new(col, row);
            if !grid.is_traversable(cell) || !reachable[grid.index(cell)] {
                continue;
            }
            let c = grid.center(cell);
            let d = [c[0] - p[0], c[1] - p[1]];
            let dist = d[0].hypot(d[1]);
            if dist > VIEWING_RADIUS || dist == 0.0 {
                continue;
            }
            if d[0] * art.facing[0] + d[1] * art.facing[1] < VIEWING_COS * dist {
                continue;
            }
            let better = match best {
                None => true,
                Some((bd, bc)) => dist < bd || (dist == bd && (cell.row, cell.col) < (bc.row, bc.col)),
            };
            if better {
                best = Some((dist, cell));
            }
        }
    }
    best.map(|(_, c)| c)
}

pub(crate) fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn polygon_touches_box(poly: &[Vec2], lo: Vec2, hi: Vec2) -> bool {
    let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    if point_in_polygon(center, poly) {
        return true;
    }
    let n = poly.len();
    (0..n).any(|i| segment_touches_box(poly[i], poly[(i + 1) % n], lo, hi))
}

/// Liang-Barsky clip of segment `a-b` against the closed box `[lo, hi]`.
fn segment_touches_box(a: Vec2, b: Vec2, lo: Vec2, hi: Vec2) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for axis in 0..2 {
        if d[axis] == 0.0 {
            if a[axis] < lo[axis] || a[axis] > hi[axis] {
                return false;
            }
            continue;
        }
        let mut ta = (lo[axis] - a[axis]) / d[axis];
        let mut tb = (hi[axis] - a[axis]) / d[axis];
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn artwork(id: &str, name: &str, pos: [f64; 3], facing: Vec2) -> Artwork {
        Artwork {
            id: id.into(),
            name: name.into(),
            author: "Anon".into(),
            year: 1500,
            style: "Renaissance".into(),
            description: String::new(),
            position: pos,
            facing,
            popularity: 1.0,
            visit_count: 0,
            regions: vec![],
        }
    }

    fn open_room(artworks: Vec<Artwork>, obstacles: Vec<Vec<Vec2>>) -> MuseumDocument {
        MuseumDocument {
            schema: 1,
            bounds: Bounds { w: 10.0, h: 10.0 },
            spawn: [1.0, 1.0],
            obstacles,
            artworks,
        }
    }

    #[test]
    fn inflation_is_two_cells() {
        assert_eq!(inflation_cells(), 2);
    }

    #[test]
    fn empty_room_blocks_only_around_artwork_segment() {
        let doc = open_room(vec![artwork("painting 000", "Solo", [5.0, 5.0, 1.5], [0.0, 1.0])], vec![]);
        let world = MuseumWorld::from_document(doc).unwrap();
        let g = &world.grid;
        assert_eq!((g.width(), g.height()), (40, 40));
        // segment spans x in [4.5, 5.5] at y = 5.0; touches rows 19 and 20
        for row in 0..40 {
            for col in 0..40 {
                let c = Cell::new(col, row);
                let near_row = (17..=22).contains(&row);
                let near_col = (15..=24).contains(&col);
                if !(near_row && near_col) {
                    assert!(g.is_traversable(c), "{c:?} should be free");
                }
            }
        }
        assert!(!g.is_traversable(Cell::new(20, 20)));
        assert!(!g.is_traversable(Cell::new(20, 18)));
        assert!(g.is_traversable(Cell::new(20, 23)));
        let view = world.viewing_cell("painting 000").unwrap();
        let vp = g.center(view);
        assert!(vp[1] > 5.0, "viewing cell should be in front of the artwork");
        assert!(distance(vp, [5.0, 5.0]) <= VIEWING_RADIUS);
    }

    #[test]
    fn artwork_inside_wall_is_rejected() {
        let wall = vec![[4.0, 0.0], [6.0, 0.0], [6.0, 10.0], [4.0, 10.0]];
        let doc = open_room(
            vec![
                artwork("painting 000", "Ok", [2.0, 5.0, 1.5], [1.0, 0.0]),
                artwork("painting 001", "Buried", [5.0, 5.0, 1.5], [1.0, 0.0]),
            ],
            vec![wall],
        );
        let err = MuseumWorld::from_document(doc).unwrap_err();
        assert_eq!(
            err,
            ValidationError::InsideObstacle {
                id: "painting 001".into(),
                obstacle: 0
            }
        );
        assert!(err.to_string().contains("painting 001"));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let doc = open_room(
            vec![
                artwork("painting 000", "A", [2.0, 5.0, 1.5], [1.0, 0.0]),
                artwork("painting 000", "B", [8.0, 5.0, 1.5], [-1.0, 0.0]),
            ],
            vec![],
        );
        assert_eq!(
            MuseumWorld::from_document(doc).unwrap_err(),
            ValidationError::DuplicateId("painting 000".into())
        );
    }

    #[test]
    fn out_of_bounds_and_bad_facing() {
        let doc = open_room(vec![artwork("painting 004", "Far", [12.0, 5.0, 1.5], [1.0, 0.0])], vec![]);
        assert_eq!(
            MuseumWorld::from_document(doc).unwrap_err(),
            ValidationError::OutOfBounds("painting 004".into())
        );
        let doc = open_room(vec![artwork("painting 004", "Skew", [2.0, 5.0, 1.5], [1.0, 1.0])], vec![]);
        assert_eq!(
            MuseumWorld::from_document(doc).unwrap_err(),
            ValidationError::Facing("painting 004".into())
        );
    }

    #[test]
    fn walled_off_artwork_is_unreachable() {
        // closed box around (8, 8)
        let box_walls = vec![
            vec![[6.0, 6.0], [10.0, 6.0], [10.0, 6.2], [6.0, 6.2]],
            vec![[6.0, 6.0], [6.2, 6.0], [6.2, 10.0], [6.0, 10.0]],
        ];
        let doc = open_room(
            vec![artwork("painting 009", "Locked", [8.0, 8.0, 1.5], [0.0, 1.0])],
            box_walls,
        );
        assert_eq!(
            MuseumWorld::from_document(doc).unwrap_err(),
            ValidationError::Unreachable("painting 009".into())
        );
    }

    #[test]
    fn bad_region_rect() {
        let mut art = artwork("painting 000", "A", [2.0, 5.0, 1.5], [1.0, 0.0]);
        art.regions.push(Region {
            name: "Sky".into(),
            rect: Rect { x: 0.5, y: 0.0, w: 0.6, h: 0.2 },
            note: String::new(),
        });
        let err = MuseumWorld::from_document(open_room(vec![art], vec![])).unwrap_err();
        assert!(matches!(err, ValidationError::Region { ref region, .. } if region == "Sky"));
    }

    #[test]
    fn find_artwork_normalizes_and_prefers_ids() {
        let doc = open_room(
            vec![
                artwork("painting 000", "Composition No. 10", [2.0, 5.0, 1.5], [1.0, 0.0]),
                artwork("painting 001", "The Birth of Venus", [8.0, 5.0, 1.5], [-1.0, 0.0]),
            ],
            vec![],
        );
        let world = MuseumWorld::from_document(doc).unwrap();
        assert_eq!(world.find_artwork("painting 001").unwrap().name, "The Birth of Venus");
        assert_eq!(world.find_artwork("the birth of venus").unwrap().id, "painting 001");
        assert_eq!(world.find_artwork("  'The Birth  of Venus!' ").unwrap().id, "painting 001");
        assert_eq!(world.find_artwork("composition no.10").unwrap().id, "painting 000");
        assert!(world.find_artwork("Girl with a Pearl Ring").is_none());
        assert!(world.find_artwork("").is_none());
    }

    #[test]
    fn zero_limit_is_rejected() {
        let doc = open_room(vec![artwork("painting 000", "A", [2.0, 5.0, 1.5], [1.0, 0.0])], vec![]);
        let world = MuseumWorld::from_document(doc).unwrap();
        assert_eq!(
            world.artworks_by_filter(&ArtworkFilter::sorted(SortBy::Id, 0)),
            Err(FilterError::ZeroLimit)
        );
    }

    #[test]
    fn visit_stats_increment() {
        let doc = open_room(vec![artwork("painting 000", "A", [2.0, 5.0, 1.5], [1.0, 0.0])], vec![]);
        let world = MuseumWorld::from_document(doc).unwrap();
        let stats = VisitStats::new(&world);
        assert_eq!(stats.increment("painting 000"), Some(1));
        assert_eq!(stats.get("painting 000"), Some(1));
        assert_eq!(stats.increment("painting 404"), None);
    }

    #[test]
    fn segment_box_clip() {
        assert!(segment_touches_box([0.0, 0.0], [2.0, 2.0], [0.9, 0.9], [1.1, 1.1]));
        assert!(!segment_touches_box([0.0, 0.0], [2.0, 0.0], [0.0, 0.5], [1.0, 1.0]));
        assert!(segment_touches_box([0.5, -1.0], [0.5, 3.0], [0.0, 0.0], [1.0, 1.0]));
    }
}

//! Spatial computation: grid A*, string pulling, follow kinematics,
//! signpost bearings and minimap projection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::Session;
use crate::world::{distance, Artwork, Cell, MuseumWorld, OccupancyGrid, Vec2};

/// Guide walking speed in m/s.
pub const DEFAULT_SPEED: f64 = 1.2;
/// Distance the visitor keeps behind the guide, measured along the path.
pub const FOLLOW_DISTANCE: f64 = 1.0;
/// The visitor counts as arrived within this radius of the final waypoint.
pub const ARRIVAL_RADIUS: f64 = 1.5;
pub const TRAIL_CAPACITY: usize = 200;

const CORNER_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NavError {
    #[error("no path to artwork `{0}`")]
    Unreachable(String),
    #[error("start point ({0}, {1}) is not on a traversable cell")]
    StartBlocked(f64, f64),
    #[error("visitor and destination coincide")]
    DegenerateDirection,
    #[error("time step and speed must be positive")]
    NonPositiveStep,
    #[error("session is not walking")]
    NotWalking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Vec2>,
    /// Polyline length of `waypoints`, metres.
    pub length: f64,
    /// Length of the unsmoothed 8-connected cell path, metres.
    pub grid_length: f64,
}

impl Path {
    fn from_waypoints(waypoints: Vec<Vec2>, grid_length: f64) -> Self {
        let length = polyline_length(&waypoints);
        Path {
            waypoints,
            length,
            grid_length,
        }
    }

    pub fn start(&self) -> Vec2 {
        self.waypoints[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.waypoints.last().expect("paths are never empty")
    }

    /// Point at arc length `s`, clamped to the path.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let mut remaining = s.max(0.0);
        for w in self.waypoints.windows(2) {
            let seg = distance(w[0], w[1]);
            if remaining <= seg {
                if seg == 0.0 {
                    return w[1];
                }
                let t = remaining / seg;
                return [w[0][0] + (w[1][0] - w[0][0]) * t, w[0][1] + (w[1][1] - w[0][1]) * t];
            }
            remaining -= seg;
        }
        self.end()
    }
}

pub fn polyline_length(points: &[Vec2]) -> f64 {
    points.windows(2).map(|w| distance(w[0], w[1])).sum()
}

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    cell: Cell,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then prefer deeper nodes, then cell order for determinism
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(a: Cell, b: Cell) -> f64 {
    let dx = (a.col - b.col).abs() as f64;
    let dy = (a.row - b.row).abs() as f64;
    dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy)
}

/// A* over the 8-connected grid with the octile heuristic.
///
/// Returns the cell sequence (start and goal inclusive) and its cost in cell
/// units, or `None` when the goal cannot be reached.
pub fn astar(grid: &OccupancyGrid, start: Cell, goal: Cell) -> Option<(Vec<Cell>, f64)> {
    if !grid.is_traversable(start) || !grid.is_traversable(goal) {
        return None;
    }
    let n = (grid.width() * grid.height()) as usize;
    let mut g_score = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<Cell>> = vec![None; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    g_score[grid.index(start)] = 0.0;
    open.push(Open {
        f: octile(start, goal),
        g: 0.0,
        cell: start,
    });

    while let Some(Open { g, cell, .. }) = open.pop() {
        let i = grid.index(cell);
        if closed[i] {
            continue;
        }
        closed[i] = true;
        if cell == goal {
            let mut cells = vec![cell];
            let mut cur = cell;
            while let Some(p) = parent[grid.index(cur)] {
                cells.push(p);
                cur = p;
            }
            cells.reverse();
            return Some((cells, g));
        }
        for (next, step) in grid.neighbors(cell) {
            let j = grid.index(next);
            if closed[j] {
                continue;
            }
            let tentative = g + step;
            if tentative < g_score[j] {
                g_score[j] = tentative;
                parent[j] = Some(cell);
                open.push(Open {
                    f: tentative + octile(next, goal),
                    g: tentative,
                    cell: next,
                });
            }
        }
    }
    None
}

/// True when the straight segment `a-b` only crosses traversable cells.
///
/// Walks the grid cells along the segment; when the segment passes exactly
/// through a cell corner both side cells must be traversable as well.
pub fn line_of_sight(grid: &OccupancyGrid, a: Vec2, b: Vec2) -> bool {
    let res = grid.resolution();
    let mut cell = grid.cell_of(a);
    let end = grid.cell_of(b);
    if !grid.is_traversable(cell) || !grid.is_traversable(end) {
        return false;
    }
    let d = [b[0] - a[0], b[1] - a[1]];
    let step_c = if d[0] > 0.0 { 1 } else { -1 };
    let step_r = if d[1] > 0.0 { 1 } else { -1 };
    let boundary = |idx: i32, step: i32| -> f64 {
        if step > 0 {
            (idx + 1) as f64 * res
        } else {
            idx as f64 * res
        }
    };
    let mut t_max_c = if d[0] != 0.0 {
        (boundary(cell.col, step_c) - a[0]) / d[0]
    } else {
        f64::INFINITY
    };
    let mut t_max_r = if d[1] != 0.0 {
        (boundary(cell.row, step_r) - a[1]) / d[1]
    } else {
        f64::INFINITY
    };
    let t_delta_c = if d[0] != 0.0 { res / d[0].abs() } else { f64::INFINITY };
    let t_delta_r = if d[1] != 0.0 { res / d[1].abs() } else { f64::INFINITY };

    let max_steps = ((cell.col - end.col).abs() + (cell.row - end.row).abs() + 2) as usize;
    for _ in 0..max_steps {
        if cell == end {
            return true;
        }
        if (t_max_c - t_max_r).abs() <= CORNER_EPS {
            let side_c = Cell::new(cell.col + step_c, cell.row);
            let side_r = Cell::new(cell.col, cell.row + step_r);
            if !grid.is_traversable(side_c) || !grid.is_traversable(side_r) {
                return false;
            }
            cell = Cell::new(cell.col + step_c, cell.row + step_r);
            t_max_c += t_delta_c;
            t_max_r += t_delta_r;
        } else if t_max_c < t_max_r {
            cell.col += step_c;
            t_max_c += t_delta_c;
        } else {
            cell.row += step_r;
            t_max_r += t_delta_r;
        }
        if !grid.is_traversable(cell) {
            return false;
        }
    }
    cell == end
}

/// Greedy string pulling: drops waypoint `k` whenever the previous kept point
/// sees waypoint `k + 1` directly.
pub fn string_pull(grid: &OccupancyGrid, points: &[Vec2]) -> Vec<Vec2> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut out = vec![points[0]];
    for k in 1..points.len() - 1 {
        let anchor = *out.last().unwrap();
        if !line_of_sight(grid, anchor, points[k + 1]) {
            out.push(points[k]);
        }
    }
    out.push(*points.last().unwrap());
    out
}

/// Shortest collision-free path from a continuous point to a goal cell.
pub fn plan_to_cell(grid: &OccupancyGrid, from: Vec2, goal: Cell) -> Result<Path, NavError> {
    let start = grid.cell_of(from);
    if !grid.is_traversable(start) {
        return Err(NavError::StartBlocked(from[0], from[1]));
    }
    let (cells, cost) = astar(grid, start, goal).ok_or_else(|| NavError::Unreachable(format!("{goal:?}")))?;
    let mut raw = Vec::with_capacity(cells.len() + 1);
    raw.push(from);
    for c in &cells {
        let p = grid.center(*c);
        if *raw.last().unwrap() != p {
            raw.push(p);
        }
    }
    let waypoints = string_pull(grid, &raw);
    Ok(Path::from_waypoints(waypoints, cost * grid.resolution()))
}

/// Path from `from` to the viewing cell of `artwork`.
pub fn plan_path(world: &MuseumWorld, from: Vec2, artwork: &Artwork) -> Result<Path, NavError> {
    let goal = world
        .viewing_cell(&artwork.id)
        .ok_or_else(|| NavError::Unreachable(artwork.id.clone()))?;
    plan_to_cell(&world.grid, from, goal).map_err(|e| match e {
        NavError::Unreachable(_) => NavError::Unreachable(artwork.id.clone()),
        other => other,
    })
}

/// An in-progress guided walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Walk {
    pub destination: String,
    pub path: Path,
    /// Arc length the guide has covered.
    pub guide_s: f64,
    /// Arc length the visitor has covered.
    pub visitor_s: f64,
}

impl Walk {
    pub fn new(destination: impl Into<String>, path: Path) -> Self {
        Walk {
            destination: destination.into(),
            path,
            guide_s: 0.0,
            visitor_s: 0.0,
        }
    }

    pub fn guide_position(&self) -> Vec2 {
        self.path.point_at(self.guide_s)
    }

    pub fn visitor_position(&self) -> Vec2 {
        self.path.point_at(self.visitor_s)
    }

    fn step(&mut self, dt: f64, speed: f64) -> bool {
        self.guide_s = (self.guide_s + speed * dt).min(self.path.length);
        let target = (self.guide_s - FOLLOW_DISTANCE).max(0.0);
        self.visitor_s = self.visitor_s.max(target);
        self.arrived()
    }

    pub fn arrived(&self) -> bool {
        self.guide_s >= self.path.length
            && distance(self.visitor_position(), self.path.end()) <= ARRIVAL_RADIUS
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advance {
    pub guide: Vec2,
    pub visitor: Vec2,
    pub arrived: bool,
}

/// Moves the guide along the session's active path by `speed * dt`; the
/// visitor trails one metre behind along the same path. Both positions stay
/// on the path, so they never leave traversable cells.
pub fn advance(session: &mut Session, dt: f64, speed: f64) -> Result<Advance, NavError> {
    if !(dt > 0.0 && speed > 0.0) {
        return Err(NavError::NonPositiveStep);
    }
    let walk = session.walk.as_mut().ok_or(NavError::NotWalking)?;
    let arrived = walk.step(dt, speed);
    let (guide, visitor) = (walk.guide_position(), walk.visitor_position());
    session.guide_pos = guide;
    session.visitor_pos = visitor;
    session.clock += dt;
    session.trail.push_back(visitor);
    while session.trail.len() > TRAIL_CAPACITY {
        session.trail.pop_front();
    }
    Ok(Advance {
        guide,
        visitor,
        arrived,
    })
}

/// Direction arrow from the visitor toward a destination. `bearing` is in
/// radians, clockwise from +y, within (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignpostState {
    pub bearing: f64,
    pub distance: f64,
}

pub fn signpost(visitor: Vec2, dest: Vec2) -> Result<SignpostState, NavError> {
    let dx = dest[0] - visitor[0];
    let dy = dest[1] - visitor[1];
    let dist = dx.hypot(dy);
    if dist == 0.0 {
        return Err(NavError::DegenerateDirection);
    }
    let mut bearing = dx.atan2(dy);
    if bearing <= -std::f64::consts::PI {
        bearing = std::f64::consts::PI;
    }
    Ok(SignpostState {
        bearing,
        distance: dist,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimapState {
    pub visible: bool,
    /// Visitor position normalised to the museum bounds.
    pub marker: Vec2,
    pub trail: Vec<Vec2>,
}

pub fn project(world: &MuseumWorld, p: Vec2) -> Vec2 {
    [
        (p[0] / world.bounds.w).clamp(0.0, 1.0),
        (p[1] / world.bounds.h).clamp(0.0, 1.0),
    ]
}

pub fn minimap(world: &MuseumWorld, session: &Session) -> MinimapState {
    let visible = session.is_walking();
    MinimapState {
        visible,
        marker: project(world, session.visitor_pos),
        trail: if visible {
            session.trail.iter().map(|p| project(world, *p)).collect()
        } else {
            Vec::new()
        },
    }
}

/// Breadth-first reachability, exposed for diagnostics.
pub fn reachable_cells(grid: &OccupancyGrid, from: Cell) -> usize {
    let seen = grid.flood_fill(from);
    seen.iter().filter(|s| **s).count()
}

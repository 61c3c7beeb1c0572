//! Lattice geometry for orthogonal equilateral chains.
//!
//! Once the first edge is placed on an axis, every vertex of an orthogonal
//! equilateral chain lands on the integer lattice, so all coordinates here
//! are integers.

use std::fmt;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::model::{Angle, ChainError, Color, FixedAngleChain, Topology, Turn, TurnSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    pub fn step(self, dir: Dir, len: i64) -> Point {
        let (dx, dy) = dir.delta();
        Point { x: self.x + dx * len, y: self.y + dy * len }
    }

    pub fn l1(self, other: Point) -> i64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn neighbors(self) -> [Point; 4] {
        Dir::ALL.map(|d| self.step(d, 1))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis direction. `E` is `+x`, `N` is `+y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    E,
    N,
    W,
    S,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::E, Dir::N, Dir::W, Dir::S];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Dir::E => (1, 0),
            Dir::N => (0, 1),
            Dir::W => (-1, 0),
            Dir::S => (0, -1),
        }
    }

    pub fn left(self) -> Dir {
        match self {
            Dir::E => Dir::N,
            Dir::N => Dir::W,
            Dir::W => Dir::S,
            Dir::S => Dir::E,
        }
    }

    pub fn right(self) -> Dir {
        self.left().opposite()
    }

    pub fn opposite(self) -> Dir {
        self.left().left()
    }

    pub fn turn(self, t: Turn) -> Dir {
        match t {
            Turn::Left => self.left(),
            Turn::Right => self.right(),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Dir::E | Dir::W)
    }

    /// Direction of the unit step `a -> b`, if it is one.
    pub fn between(a: Point, b: Point) -> Option<Dir> {
        match (b.x - a.x, b.y - a.y) {
            (1, 0) => Some(Dir::E),
            (0, 1) => Some(Dir::N),
            (-1, 0) => Some(Dir::W),
            (0, -1) => Some(Dir::S),
            _ => None,
        }
    }

    /// The turn taking heading `self` to `next`, if they are perpendicular.
    pub fn turn_to(self, next: Dir) -> Option<Turn> {
        if self.left() == next {
            Some(Turn::Left)
        } else if self.right() == next {
            Some(Turn::Right)
        } else {
            None
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Dir::E => "+x",
            Dir::N => "+y",
            Dir::W => "-x",
            Dir::S => "-y",
        }
    }
}

/// Placement of the first vertex and direction of the first edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pose {
    pub origin: Point,
    pub heading: Dir,
}

impl Default for Pose {
    fn default() -> Self {
        Pose { origin: Point::ORIGIN, heading: Dir::E }
    }
}

impl Pose {
    pub fn new(origin: Point, heading: Dir) -> Self {
        Pose { origin, heading }
    }
}

/// Axis-aligned box of lattice points, inclusive on both corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Box2 {
    pub min: Point,
    pub max: Point,
}

impl Box2 {
    pub fn new(min: Point, max: Point) -> Self {
        assert!(min.x <= max.x && min.y <= max.y, "box corners out of order");
        Box2 { min, max }
    }

    /// Square of side length `s` (that is `s + 1` lattice points per side).
    pub fn square(s: i64) -> Self {
        Box2::new(Point::ORIGIN, Point::new(s, s))
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> i64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> i64 {
        self.max.y - self.min.y
    }

    pub fn bounding(points: &[Point]) -> Option<Box2> {
        let first = *points.first()?;
        let mut b = Box2 { min: first, max: first };
        for p in points {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        Some(b)
    }
}

/// Lattice point per vertex, in chain order.
///
/// For closed chains the list carries one extra trailing point: where the
/// walk ends after the last edge, which equals `points[0]` exactly when the
/// chain closes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeConfiguration {
    pub topology: Topology,
    pub points: Vec<Point>,
}

impl LatticeConfiguration {
    /// Points of the distinct vertices (the trailing closure point dropped).
    pub fn vertices(&self) -> &[Point] {
        match self.topology {
            Topology::Open => &self.points,
            Topology::Closed => &self.points[..self.points.len().saturating_sub(1)],
        }
    }

    pub fn bounding_box(&self) -> Option<Box2> {
        Box2::bounding(&self.points)
    }
}

/// Walks the chain from `pose`, turning at every corner as `turns` says.
///
/// For a closed chain the turn entry of `v_0` (if it is a corner) does not
/// move any vertex; it is checked against the closing edge by
/// [`closing_turn_matches`].
pub fn embed(
    chain: &FixedAngleChain,
    turns: &TurnSequence,
    pose: Pose,
) -> Result<LatticeConfiguration, ChainError> {
    chain.check_turns(turns)?;
    let edges = chain.edge_count();
    let mut points = Vec::with_capacity(edges + 1);
    let mut p = pose.origin;
    let mut dir = pose.heading;
    points.push(p);
    let mut next_turn = turns.turns().iter();
    if chain.is_closed() && chain.is_corner(0) {
        next_turn.next();
    }
    for e in 0..edges {
        if e > 0 && chain.is_corner(e) {
            dir = dir.turn(*next_turn.next().expect("turn count checked"));
        }
        p = p.step(dir, 1);
        points.push(p);
    }
    Ok(LatticeConfiguration { topology: chain.topology(), points })
}

/// Recovers the turn sequence of a configuration; `None` when the points
/// violate unit-edge or angle constraints.
pub fn turns_of(chain: &FixedAngleChain, config: &LatticeConfiguration) -> Option<TurnSequence> {
    let edges = chain.edge_count();
    if config.points.len() != edges + 1 {
        return None;
    }
    let dirs: Vec<Dir> = config
        .points
        .windows(2)
        .map(|w| Dir::between(w[0], w[1]))
        .collect::<Option<_>>()?;
    let mut turns = Vec::with_capacity(chain.corner_count());
    if chain.is_closed() {
        let closing = vertex_turn(chain, 0, dirs[edges - 1], dirs[0])?;
        turns.extend(closing);
    }
    for v in 1..edges {
        turns.extend(vertex_turn(chain, v, dirs[v - 1], dirs[v])?);
    }
    Some(TurnSequence(turns))
}

fn vertex_turn(chain: &FixedAngleChain, v: usize, din: Dir, dout: Dir) -> Option<Option<Turn>> {
    match chain.angle_at(v) {
        Some(Angle::Corner) => din.turn_to(dout).map(Some),
        Some(Angle::Straight) => (din == dout).then_some(None),
        None => Some(None),
    }
}

/// Structural re-check: unit axis edges and the angle at every constrained
/// vertex (closing vertex excluded; see [`check_closure`]).
pub fn satisfies_angles(chain: &FixedAngleChain, config: &LatticeConfiguration) -> bool {
    let edges = chain.edge_count();
    if config.points.len() != edges + 1 || config.topology != chain.topology() {
        return false;
    }
    let Some(dirs) = config
        .points
        .windows(2)
        .map(|w| Dir::between(w[0], w[1]))
        .collect::<Option<Vec<_>>>()
    else {
        return false;
    };
    (1..edges).all(|v| vertex_turn(chain, v, dirs[v - 1], dirs[v]).is_some())
}

/// Injectivity of vertex placement (closed chains identify `v_n` with `v_0`).
///
/// Unit axis-aligned lattice edges can only meet at lattice points, and
/// every lattice point on such an edge is one of its endpoints, so two edges
/// share a point that is not a common vertex exactly when two vertices
/// are placed on the same point.
pub fn is_noncrossing(config: &LatticeConfiguration) -> bool {
    let mut seen = FxHashSet::default();
    config.vertices().iter().all(|p| seen.insert(*p))
}

/// Brute-force edge-pair test: every two edges may intersect only in a
/// common endpoint. Quadratic; kept as an oracle for [`is_noncrossing`].
pub fn geometric_noncrossing_oracle(config: &LatticeConfiguration) -> bool {
    let n = config.points.len();
    if n < 2 {
        return true;
    }
    let closed = config.topology == Topology::Closed;
    // Vertex ids of the points; the closing point is v_0 again.
    let id = |i: usize| if closed && i == n - 1 { 0 } else { i };
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (id(i), id(i + 1))).collect();
    for a in 0..edges.len() {
        for b in a + 1..edges.len() {
            let (a0, a1) = edges[a];
            let (b0, b1) = edges[b];
            let shared: Vec<usize> = [a0, a1].into_iter().filter(|v| *v == b0 || *v == b1).collect();
            let pa = (config.points[a], config.points[a + 1]);
            let pb = (config.points[b], config.points[b + 1]);
            match segment_intersection(pa, pb) {
                Intersection::None => {}
                Intersection::Point(q) => {
                    let ok = shared.iter().any(|&v| {
                        let pv = if v == 0 { config.points[0] } else { config.points[v] };
                        pv == q
                    });
                    if !ok {
                        return false;
                    }
                }
                Intersection::Overlap => return false,
            }
        }
    }
    true
}

enum Intersection {
    None,
    Point(Point),
    Overlap,
}

/// Exact intersection of two closed axis-aligned segments.
fn segment_intersection(a: (Point, Point), b: (Point, Point)) -> Intersection {
    let (ax0, ax1) = (a.0.x.min(a.1.x), a.0.x.max(a.1.x));
    let (ay0, ay1) = (a.0.y.min(a.1.y), a.0.y.max(a.1.y));
    let (bx0, bx1) = (b.0.x.min(b.1.x), b.0.x.max(b.1.x));
    let (by0, by1) = (b.0.y.min(b.1.y), b.0.y.max(b.1.y));
    let x0 = ax0.max(bx0);
    let x1 = ax1.min(bx1);
    let y0 = ay0.max(by0);
    let y1 = ay1.min(by1);
    if x0 > x1 || y0 > y1 {
        Intersection::None
    } else if x0 == x1 && y0 == y1 {
        Intersection::Point(Point::new(x0, y0))
    } else {
        Intersection::Overlap
    }
}

/// Endpoint closure plus the angle at `v_0` formed by the closing edges.
pub fn check_closure(chain: &FixedAngleChain, config: &LatticeConfiguration) -> bool {
    let pts = &config.points;
    if !chain.is_closed() || pts.len() != chain.edge_count() + 1 || pts.len() < 3 {
        return false;
    }
    if pts[0] != pts[pts.len() - 1] {
        return false;
    }
    let (Some(last), Some(first)) = (
        Dir::between(pts[pts.len() - 2], pts[pts.len() - 1]),
        Dir::between(pts[0], pts[1]),
    ) else {
        return false;
    };
    vertex_turn(chain, 0, last, first).is_some()
}

/// Whether the `v_0` entry of a closed chain's turn sequence agrees with the
/// turn the closing edges actually make.
pub fn closing_turn_matches(
    chain: &FixedAngleChain,
    turns: &TurnSequence,
    config: &LatticeConfiguration,
) -> bool {
    if !chain.is_closed() || !chain.is_corner(0) {
        return true;
    }
    let pts = &config.points;
    let (Some(last), Some(first)) = (
        Dir::between(pts[pts.len() - 2], pts[pts.len() - 1]),
        Dir::between(pts[0], pts[1]),
    ) else {
        return false;
    };
    turns.turns().first().copied() == last.turn_to(first)
}

/// Zig-zag folding of an open chain: corners alternate left and right,
/// starting with a left turn, so `x + y` increases along the chain from
/// the default pose.
pub fn zigzag_turns(chain: &FixedAngleChain) -> Result<TurnSequence, ChainError> {
    if chain.is_closed() {
        return Err(ChainError::WrongTopology(Topology::Open));
    }
    Ok(TurnSequence(
        (0..chain.corner_count())
            .map(|i| if i % 2 == 0 { Turn::Left } else { Turn::Right })
            .collect(),
    ))
}

/// Number of H–H contacts: unordered pairs of H vertices at unit distance
/// that are not joined by a chain edge.
pub fn count_hh_contacts(
    chain: &FixedAngleChain,
    config: &LatticeConfiguration,
) -> Result<usize, ChainError> {
    let colors = chain.colors().ok_or(ChainError::MissingColors)?;
    let verts = config.vertices();
    let n = verts.len();
    let mut at: FxHashMap<Point, usize> = FxHashMap::default();
    for (i, p) in verts.iter().enumerate() {
        if colors.get(i) == Some(&Color::H) {
            at.insert(*p, i);
        }
    }
    let closed = chain.is_closed();
    let is_edge = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d == 1 || (closed && d == n - 1)
    };
    let mut count = 0;
    for (&p, &i) in &at {
        for q in p.neighbors() {
            if let Some(&j) = at.get(&q) {
                if i < j && !is_edge(i, j) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

pub fn within_box(config: &LatticeConfiguration, bx: &Box2) -> bool {
    config.points.iter().all(|p| bx.contains(*p))
}

/// Applies a lattice isometry fixing the origin: rotation by `quarter`
/// counterclockwise quarter turns, then optional reflection in the x axis.
pub fn transform_point(p: Point, quarter: u8, reflect: bool) -> Point {
    let mut q = p;
    for _ in 0..quarter % 4 {
        q = Point::new(-q.y, q.x);
    }
    if reflect {
        q.y = -q.y;
    }
    q
}

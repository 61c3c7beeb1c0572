//! Corner-level geometry for chains that are too long to expand.
//!
//! A [`Polyline`] stores only the corner points of a folded chain. Segment
//! lengths, turns and the noncrossing test are all computed per segment, so
//! chains with hundreds of millions of edges stay cheap as long as they
//! have few corners.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fold::{Box2, Dir, LatticeConfiguration, Point, Pose};
use crate::model::{ChainError, SegmentDecomposition, Topology, Turn, TurnSequence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("segment {0} is not axis-aligned or has zero length")]
    NotAxis(usize),
    #[error("segment {0} doubles back on the previous one")]
    Reversal(usize),
    #[error("segments {0} and {1} are collinear; corners must turn")]
    Collinear(usize, usize),
    #[error("closed polyline needs at least 4 corners")]
    TooShort,
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Corner points of a folded chain, in chain order.
///
/// Open: first point, corners, last point. Closed: every corner once, the
/// closing segment runs from the last point back to the first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polyline {
    pub topology: Topology,
    pub points: Vec<Point>,
}

/// Builds a polyline move by move, merging straight continuations.
#[derive(Debug, Clone)]
pub struct PathBuilder {
    points: Vec<Point>,
    last_dir: Option<Dir>,
}

impl PathBuilder {
    pub fn new(start: Point) -> Self {
        PathBuilder { points: vec![start], last_dir: None }
    }

    pub fn at(&self) -> Point {
        *self.points.last().unwrap()
    }

    pub fn go(&mut self, dir: Dir, len: i64) -> &mut Self {
        assert!(len > 0, "move length must be positive");
        let next = self.at().step(dir, len);
        if self.last_dir == Some(dir) {
            *self.points.last_mut().unwrap() = next;
        } else {
            assert!(self.last_dir != Some(dir.opposite()), "path doubles back at {}", self.at());
            self.points.push(next);
            self.last_dir = Some(dir);
        }
        self
    }

    /// Axis-aligned move to `p`; a no-op when already there.
    pub fn to(&mut self, p: Point) -> &mut Self {
        let a = self.at();
        if a == p {
            return self;
        }
        assert!(a.x == p.x || a.y == p.y, "move {a} -> {p} is not axis-aligned");
        let dir = Dir::between(a, a.step(sign_dir(a, p), 1)).unwrap();
        self.go(dir, a.l1(p))
    }

    /// Appends another builder's moves (it must start where this one ends).
    pub fn extend(&mut self, other: &Polyline) -> &mut Self {
        assert_eq!(other.points.first().copied(), Some(self.at()), "extension does not start here");
        for &p in &other.points[1..] {
            self.to(p);
        }
        self
    }

    pub fn open(self) -> Polyline {
        Polyline { topology: Topology::Open, points: self.points }
    }

    /// Closes the path; it must end where it started.
    pub fn closed(mut self) -> Polyline {
        assert_eq!(self.points.first(), self.points.last(), "closed path must return to its start");
        self.points.pop();
        let mut pl = Polyline { topology: Topology::Closed, points: self.points };
        pl.merge_closing();
        pl
    }
}

fn sign_dir(a: Point, b: Point) -> Dir {
    if b.x > a.x {
        Dir::E
    } else if b.x < a.x {
        Dir::W
    } else if b.y > a.y {
        Dir::N
    } else {
        Dir::S
    }
}

impl Polyline {
    pub fn open(points: Vec<Point>) -> Result<Self, PolyError> {
        let pl = Polyline { topology: Topology::Open, points };
        pl.check()?;
        Ok(pl)
    }

    pub fn closed(points: Vec<Point>) -> Result<Self, PolyError> {
        let pl = Polyline { topology: Topology::Closed, points };
        pl.check()?;
        Ok(pl)
    }

    // A closed path built from its start may begin mid-segment; rotate so
    // the first point is a genuine corner.
    fn merge_closing(&mut self) {
        loop {
            let n = self.points.len();
            if n < 3 {
                return;
            }
            let (a, b, c) = (self.points[n - 1], self.points[0], self.points[1]);
            if Dir::between(a, a.step(sign_dir(a, b), 1)) == Dir::between(b, b.step(sign_dir(b, c), 1)) {
                self.points.remove(0);
            } else {
                return;
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.topology == Topology::Closed
    }

    pub fn segment_count(&self) -> usize {
        match self.topology {
            Topology::Open => self.points.len().saturating_sub(1),
            Topology::Closed => self.points.len(),
        }
    }

    /// Endpoints of segment `i`.
    pub fn segment(&self, i: usize) -> (Point, Point) {
        let n = self.points.len();
        (self.points[i], self.points[(i + 1) % n])
    }

    pub fn dir(&self, i: usize) -> Dir {
        let (a, b) = self.segment(i);
        sign_dir(a, b)
    }

    pub fn lengths(&self) -> Vec<u64> {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                a.l1(b) as u64
            })
            .collect()
    }

    pub fn total_length(&self) -> u64 {
        self.lengths().iter().sum()
    }

    pub fn check(&self) -> Result<(), PolyError> {
        let m = self.segment_count();
        if self.is_closed() && m < 4 {
            return Err(PolyError::TooShort);
        }
        for i in 0..m {
            let (a, b) = self.segment(i);
            if a == b || (a.x != b.x && a.y != b.y) {
                return Err(PolyError::NotAxis(i));
            }
        }
        let pairs: Box<dyn Iterator<Item = (usize, usize)>> = match self.topology {
            Topology::Open => Box::new((1..m).map(|i| (i - 1, i))),
            Topology::Closed => Box::new((0..m).map(move |i| ((i + m - 1) % m, i))),
        };
        for (i, j) in pairs {
            let (d0, d1) = (self.dir(i), self.dir(j));
            if d0 == d1 {
                return Err(PolyError::Collinear(i, j));
            }
            if d0 == d1.opposite() {
                return Err(PolyError::Reversal(j));
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> Result<SegmentDecomposition, PolyError> {
        Ok(SegmentDecomposition::new(self.topology, self.lengths())?)
    }

    /// Turns at every corner, in the order used by
    /// [`crate::model::chain_from_segments`] (closed: the corner at the first
    /// point comes first).
    pub fn turns(&self) -> TurnSequence {
        let m = self.segment_count();
        let mut out = Vec::new();
        let turn = |i: usize, j: usize| self.dir(i).turn_to(self.dir(j)).expect("perpendicular");
        match self.topology {
            Topology::Open => {
                for j in 1..m {
                    out.push(turn(j - 1, j));
                }
            }
            Topology::Closed => {
                for j in 0..m {
                    out.push(turn((j + m - 1) % m, j));
                }
            }
        }
        TurnSequence(out)
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.points[0], self.dir(0))
    }

    /// Segment-level embedding: places every corner for the given turns.
    ///
    /// Closed chains return an open-style point list whose last point is the
    /// walk's end; use [`closes_up`] to test closure.
    pub fn embed(seg: &SegmentDecomposition, turns: &TurnSequence, pose: Pose) -> Result<Vec<Point>, ChainError> {
        let m = seg.lengths.len();
        let expected = match seg.topology {
            Topology::Open => m - 1,
            Topology::Closed => m,
        };
        if turns.len() != expected {
            return Err(ChainError::TurnCount { expected, got: turns.len() });
        }
        let mut it = turns.turns().iter();
        if seg.topology == Topology::Closed {
            it.next();
        }
        let mut p = pose.origin;
        let mut d = pose.heading;
        let mut pts = Vec::with_capacity(m + 1);
        pts.push(p);
        for (i, &len) in seg.lengths.iter().enumerate() {
            if i > 0 {
                d = d.turn(*it.next().unwrap());
            }
            p = p.step(d, len as i64);
            pts.push(p);
        }
        Ok(pts)
    }

    /// Embeds and, for closed chains, checks closure and the turn at the
    /// first corner.
    pub fn from_turns(seg: &SegmentDecomposition, turns: &TurnSequence, pose: Pose) -> Result<Option<Polyline>, ChainError> {
        let mut pts = Self::embed(seg, turns, pose)?;
        match seg.topology {
            Topology::Open => Ok(Some(Polyline { topology: Topology::Open, points: pts })),
            Topology::Closed => {
                let end = pts.pop().unwrap();
                if end != pts[0] {
                    return Ok(None);
                }
                let pl = Polyline { topology: Topology::Closed, points: pts };
                if pl.segment_count() < 4 || pl.check().is_err() {
                    return Ok(None);
                }
                let first: Turn = turns.turns()[0];
                Ok((pl.turns().turns()[0] == first).then_some(pl))
            }
        }
    }

    pub fn bounding_box(&self) -> Option<Box2> {
        Box2::bounding(&self.points)
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Polyline {
        Polyline { topology: self.topology, points: self.points.iter().map(|&p| f(p)).collect() }
    }

    pub fn reversed(&self) -> Polyline {
        let mut points = self.points.clone();
        points.reverse();
        if self.is_closed() {
            points.rotate_right(1);
        }
        Polyline { topology: self.topology, points }
    }

    /// Every lattice point, one per vertex (closed: with trailing closure point).
    pub fn expand(&self) -> LatticeConfiguration {
        let mut pts = vec![self.points[0]];
        for i in 0..self.segment_count() {
            let (a, b) = self.segment(i);
            let d = sign_dir(a, b);
            for k in 1..=a.l1(b) {
                pts.push(a.step(d, k));
            }
        }
        LatticeConfiguration { topology: self.topology, points: pts }
    }

    /// Whether the chain touches itself anywhere other than the shared corner
    /// of consecutive segments.
    pub fn is_noncrossing(&self) -> bool {
        self.first_crossing().is_none()
    }

    /// A pair of segments that meet illegally, if any.
    pub fn first_crossing(&self) -> Option<(usize, usize)> {
        let m = self.segment_count();
        let closed = self.is_closed();
        let adjacent = |i: usize, j: usize| {
            let (i, j) = (i.min(j), i.max(j));
            j == i + 1 || (closed && i == 0 && j == m - 1 && m > 2)
        };
        let mut horiz = Vec::new();
        let mut vert = Vec::new();
        for i in 0..m {
            let (a, b) = self.segment(i);
            if a.y == b.y {
                horiz.push((a.y, a.x.min(b.x), a.x.max(b.x), i));
            } else {
                vert.push((a.x, a.y.min(b.y), a.y.max(b.y), i));
            }
        }
        for list in [&mut horiz, &mut vert] {
            list.sort_unstable();
            for w in list.windows(2) {
                let (l0, l1) = (w[0], w[1]);
                if l0.0 == l1.0 && l1.1 <= l0.2 {
                    return Some((l0.3, l1.3));
                }
            }
        }
        // sweep over x: horizontals enter at x1 and leave after x2
        enum Ev {
            Add(usize),
            Query(usize),
            Remove(usize),
        }
        let mut events: Vec<(i64, u8, Ev)> = Vec::with_capacity(2 * horiz.len() + vert.len());
        for (k, h) in horiz.iter().enumerate() {
            events.push((h.1, 0, Ev::Add(k)));
            events.push((h.2, 2, Ev::Remove(k)));
        }
        for (k, v) in vert.iter().enumerate() {
            events.push((v.0, 1, Ev::Query(k)));
        }
        events.sort_by_key(|e| (e.0, e.1));
        let mut active: BTreeMap<i64, usize> = BTreeMap::new();
        for (x, _, ev) in events {
            match ev {
                Ev::Add(k) => {
                    active.insert(horiz[k].0, k);
                }
                Ev::Remove(k) => {
                    active.remove(&horiz[k].0);
                }
                Ev::Query(k) => {
                    let (_, y1, y2, vi) = vert[k];
                    for (&y, &hk) in active.range(y1..=y2) {
                        let hi = horiz[hk].3;
                        let shared = Point::new(x, y);
                        let ok = adjacent(vi, hi) && {
                            let (a, b) = self.segment(vi);
                            (a == shared || b == shared) && {
                                let (c, d) = self.segment(hi);
                                c == shared || d == shared
                            }
                        };
                        if !ok {
                            return Some((vi.min(hi), vi.max(hi)));
                        }
                    }
                }
            }
        }
        None
    }
}

/// Whether a segment-level embedding of an open chain, or the end of a
/// closed one, returns to its start.
pub fn closes_up(points: &[Point]) -> bool {
    points.first() == points.last()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold::{embed, is_noncrossing};
    use crate::model::chain_from_segments;

    fn square_ring(s: i64) -> Polyline {
        let mut b = PathBuilder::new(Point::new(0, 0));
        b.go(Dir::E, s).go(Dir::N, s).go(Dir::W, s).go(Dir::S, s);
        b.closed()
    }

    #[test]
    fn builder_merges_and_closes() {
        let mut b = PathBuilder::new(Point::new(0, 0));
        b.go(Dir::E, 2).go(Dir::E, 3).go(Dir::N, 1).to(Point::new(0, 1)).to(Point::new(0, 0));
        let pl = b.closed();
        assert_eq!(pl.lengths(), vec![5, 1, 5, 1]);
        assert!(pl.check().is_ok());
    }

    #[test]
    fn closing_mid_segment_is_rotated_to_a_corner() {
        let mut b = PathBuilder::new(Point::new(1, 0));
        b.go(Dir::E, 1).go(Dir::N, 2).go(Dir::W, 2).go(Dir::S, 2).go(Dir::E, 1);
        let pl = b.closed();
        assert_eq!(pl.segment_count(), 4);
        assert!(pl.check().is_ok());
    }

    #[test]
    fn turns_round_trip_through_embedding() {
        let pl = square_ring(3);
        let seg = pl.segments().unwrap();
        let back = Polyline::from_turns(&seg, &pl.turns(), pl.pose()).unwrap().unwrap();
        assert_eq!(back, pl);
    }

    #[test]
    fn crossing_detection_matches_vertex_level() {
        // a path that touches itself at one point
        let touching = Polyline::open(vec![
            Point::new(0, 0),
            Point::new(2, 0),
            Point::new(2, 2),
            Point::new(1, 2),
            Point::new(1, -1),
        ])
        .unwrap();
        assert!(!touching.is_noncrossing());
        assert!(square_ring(4).is_noncrossing());
        let u = Polyline::open(vec![Point::new(0, 0), Point::new(0, 2), Point::new(1, 2), Point::new(1, 0)]).unwrap();
        assert!(u.is_noncrossing());
        let overlap = Polyline::open(vec![
            Point::new(0, 0),
            Point::new(3, 0),
            Point::new(3, 1),
            Point::new(2, 1),
            Point::new(2, 0),
        ]);
        assert!(overlap.is_err() || !overlap.unwrap().is_noncrossing());
    }

    #[test]
    fn expansion_agrees_with_vertex_embedding() {
        let pl = square_ring(2);
        let seg = pl.segments().unwrap();
        let chain = chain_from_segments(&seg, None).unwrap();
        let cfg = embed(&chain, &pl.turns(), pl.pose()).unwrap();
        assert_eq!(cfg, pl.expand());
        assert!(is_noncrossing(&cfg));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_walk(dirs: &[u8], lens: &[u8]) -> Option<Polyline> {
            let mut b = PathBuilder::new(Point::new(0, 0));
            let mut last: Option<Dir> = None;
            for (&d, &l) in dirs.iter().zip(lens) {
                let d = [Dir::E, Dir::N, Dir::W, Dir::S][(d % 4) as usize];
                if last == Some(d) || last == Some(d.opposite()) {
                    continue;
                }
                b.go(d, 1 + (l % 3) as i64);
                last = Some(d);
            }
            let pl = b.open();
            (pl.segment_count() > 0).then_some(pl)
        }

        proptest! {
            #[test]
            fn segment_crossing_test_agrees_with_vertex_injectivity(
                dirs in proptest::collection::vec(any::<u8>(), 1..12),
                lens in proptest::collection::vec(any::<u8>(), 12),
            ) {
                if let Some(pl) = random_walk(&dirs, &lens) {
                    prop_assert_eq!(pl.is_noncrossing(), is_noncrossing(&pl.expand()));
                }
            }
        }
    }
}

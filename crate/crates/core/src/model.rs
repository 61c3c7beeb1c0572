//! Chains, turn sequences and segment decompositions.
//!
//! A [`FixedAngleChain`] records only combinatorial data: whether the chain
//! is open or closed, the fixed angle at every constrained vertex and an
//! optional H/P coloring. Every edge has unit length. Geometry lives in
//! [`crate::fold`].

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("closed chain needs at least one vertex")]
    EmptyClosed,
    #[error("expected {expected} colors (one per vertex), got {got}")]
    ColorCount { expected: usize, got: usize },
    #[error("closed chain has no corner vertex")]
    NoCorner,
    #[error("segment length must be positive (index {0})")]
    ZeroSegment(usize),
    #[error("closed decomposition needs at least one segment")]
    EmptySegments,
    #[error("expected {expected} turns, got {got}")]
    TurnCount { expected: usize, got: usize },
    #[error("operation requires an {0} chain")]
    WrongTopology(Topology),
    #[error("chain has no colors")]
    MissingColors,
    #[error("invalid character {ch:?} at column {col}")]
    BadChar { ch: char, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Open,
    Closed,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Open => "open",
            Topology::Closed => "closed",
        })
    }
}

impl FromStr for Topology {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(Topology::Open),
            "closed" => Ok(Topology::Closed),
            other => Err(format!("expected `open` or `closed`, got `{other}`")),
        }
    }
}

/// Fixed angle at a vertex: 180° (`S`) or 90° (`C`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Angle {
    Straight,
    Corner,
}

impl Angle {
    pub fn symbol(self) -> char {
        match self {
            Angle::Straight => 'S',
            Angle::Corner => 'C',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    H,
    P,
}

impl Color {
    pub fn symbol(self) -> char {
        match self {
            Color::H => 'H',
            Color::P => 'P',
        }
    }
}

/// Sense of a 90° turn. `Left` rotates the heading counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Turn {
    Left,
    Right,
}

impl Turn {
    pub fn flipped(self) -> Turn {
        match self {
            Turn::Left => Turn::Right,
            Turn::Right => Turn::Left,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Turn::Left => 'L',
            Turn::Right => 'R',
        }
    }
}

/// One turn per corner vertex, in chain order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct TurnSequence(pub Vec<Turn>);

impl TurnSequence {
    pub fn new(turns: Vec<Turn>) -> Self {
        TurnSequence(turns)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn turns(&self) -> &[Turn] {
        &self.0
    }

    /// Mirror image: every turn flipped.
    pub fn reflected(&self) -> TurnSequence {
        TurnSequence(self.0.iter().map(|t| t.flipped()).collect())
    }
}

impl fmt::Display for TurnSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            write!(f, "{}", t.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for TurnSequence {
    type Err = ChainError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .enumerate()
            .map(|(col, ch)| match ch {
                'L' => Ok(Turn::Left),
                'R' => Ok(Turn::Right),
                _ => Err(ChainError::BadChar { ch, col: col + 1 }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(TurnSequence)
    }
}

/// A fixed-angle orthogonal equilateral chain.
///
/// For an open chain on `n` vertices `angles` has `n - 2` entries (interior
/// vertices `v_1..v_{n-2}`); for a closed chain with `n` edges it has `n`
/// entries (`v_0..v_{n-1}`). Colors, when present, are one per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedAngleChain {
    topology: Topology,
    angles: Vec<Angle>,
    colors: Option<Vec<Color>>,
}

impl FixedAngleChain {
    pub fn new(
        topology: Topology,
        angles: Vec<Angle>,
        colors: Option<Vec<Color>>,
    ) -> Result<Self, ChainError> {
        if topology == Topology::Closed && angles.is_empty() {
            return Err(ChainError::EmptyClosed);
        }
        let chain = FixedAngleChain { topology, angles, colors: None };
        if let Some(c) = &colors {
            if c.len() != chain.vertex_count() {
                return Err(ChainError::ColorCount { expected: chain.vertex_count(), got: c.len() });
            }
        }
        Ok(FixedAngleChain { colors, ..chain })
    }

    pub fn open(angles: Vec<Angle>) -> Self {
        FixedAngleChain { topology: Topology::Open, angles, colors: None }
    }

    pub fn closed(angles: Vec<Angle>) -> Result<Self, ChainError> {
        Self::new(Topology::Closed, angles, None)
    }

    pub fn with_colors(self, colors: Vec<Color>) -> Result<Self, ChainError> {
        Self::new(self.topology, self.angles, Some(colors))
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_closed(&self) -> bool {
        self.topology == Topology::Closed
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn colors(&self) -> Option<&[Color]> {
        self.colors.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        match self.topology {
            Topology::Open => self.angles.len() + 2,
            Topology::Closed => self.angles.len(),
        }
    }

    pub fn edge_count(&self) -> usize {
        match self.topology {
            Topology::Open => self.angles.len() + 1,
            Topology::Closed => self.angles.len(),
        }
    }

    /// Angle constraint at vertex `v`, `None` for the endpoints of an open chain.
    pub fn angle_at(&self, v: usize) -> Option<Angle> {
        match self.topology {
            Topology::Open => {
                if v == 0 || v + 1 >= self.vertex_count() {
                    None
                } else {
                    Some(self.angles[v - 1])
                }
            }
            Topology::Closed => self.angles.get(v).copied(),
        }
    }

    pub fn is_corner(&self, v: usize) -> bool {
        self.angle_at(v) == Some(Angle::Corner)
    }

    /// Vertex indices carrying a 90° angle, in chain order.
    pub fn corner_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| self.is_corner(v)).collect()
    }

    pub fn corner_count(&self) -> usize {
        self.angles.iter().filter(|a| **a == Angle::Corner).count()
    }

    pub fn h_count(&self) -> usize {
        self.colors
            .as_ref()
            .map_or(0, |c| c.iter().filter(|c| **c == Color::H).count())
    }

    /// Angle string over `{C, S}`.
    pub fn angle_string(&self) -> String {
        self.angles.iter().map(|a| a.symbol()).collect()
    }

    pub fn check_turns(&self, turns: &TurnSequence) -> Result<(), ChainError> {
        let expected = self.corner_count();
        if turns.len() != expected {
            return Err(ChainError::TurnCount { expected, got: turns.len() });
        }
        Ok(())
    }
}

/// Maximal straight runs of a chain.
///
/// For open chains the runs are listed from `v_0`. For closed chains the
/// list starts at the first corner at or after `v_0`; equality and hashing
/// use the lexicographically smallest rotation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentDecomposition {
    pub topology: Topology,
    pub lengths: Vec<u64>,
}

impl SegmentDecomposition {
    pub fn new(topology: Topology, lengths: Vec<u64>) -> Result<Self, ChainError> {
        if let Some(i) = lengths.iter().position(|&l| l == 0) {
            return Err(ChainError::ZeroSegment(i));
        }
        if lengths.is_empty() {
            return Err(ChainError::EmptySegments);
        }
        Ok(SegmentDecomposition { topology, lengths })
    }

    pub fn open(lengths: Vec<u64>) -> Result<Self, ChainError> {
        Self::new(Topology::Open, lengths)
    }

    pub fn closed(lengths: Vec<u64>) -> Result<Self, ChainError> {
        Self::new(Topology::Closed, lengths)
    }

    pub fn total_length(&self) -> u64 {
        self.lengths.iter().sum()
    }

    /// Canonical form: open lists unchanged, closed lists rotated to the
    /// lexicographically smallest rotation.
    pub fn canonical_lengths(&self) -> Vec<u64> {
        match self.topology {
            Topology::Open => self.lengths.clone(),
            Topology::Closed => min_rotation(&self.lengths),
        }
    }
}

impl PartialEq for SegmentDecomposition {
    fn eq(&self, other: &Self) -> bool {
        self.topology == other.topology && self.canonical_lengths() == other.canonical_lengths()
    }
}

impl Eq for SegmentDecomposition {}

impl Hash for SegmentDecomposition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.topology.hash(state);
        self.canonical_lengths().hash(state);
    }
}

fn min_rotation(xs: &[u64]) -> Vec<u64> {
    (0..xs.len())
        .map(|r| xs[r..].iter().chain(&xs[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// Splits a chain into maximal straight runs between corners.
pub fn segments_of(chain: &FixedAngleChain) -> Result<SegmentDecomposition, ChainError> {
    let corners = chain.corner_vertices();
    match chain.topology() {
        Topology::Open => {
            let last = chain.vertex_count() - 1;
            let mut cuts = vec![0];
            cuts.extend(corners);
            cuts.push(last);
            let lengths = cuts.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
            Ok(SegmentDecomposition { topology: Topology::Open, lengths })
        }
        Topology::Closed => {
            if corners.is_empty() {
                return Err(ChainError::NoCorner);
            }
            let n = chain.edge_count();
            let lengths = (0..corners.len())
                .map(|i| {
                    let a = corners[i];
                    let b = corners[(i + 1) % corners.len()];
                    (if b > a { b - a } else { b + n - a }) as u64
                })
                .collect();
            Ok(SegmentDecomposition { topology: Topology::Closed, lengths })
        }
    }
}

/// Inverse of [`segments_of`]. A closed chain starts at a corner vertex.
pub fn chain_from_segments(
    segments: &SegmentDecomposition,
    colors: Option<Vec<Color>>,
) -> Result<FixedAngleChain, ChainError> {
    if let Some(i) = segments.lengths.iter().position(|&l| l == 0) {
        return Err(ChainError::ZeroSegment(i));
    }
    if segments.lengths.is_empty() {
        return Err(ChainError::EmptySegments);
    }
    let mut angles = Vec::with_capacity(segments.total_length() as usize);
    match segments.topology {
        Topology::Open => {
            for (i, &len) in segments.lengths.iter().enumerate() {
                if i > 0 {
                    angles.push(Angle::Corner);
                }
                angles.extend(std::iter::repeat(Angle::Straight).take(len as usize - 1));
            }
        }
        Topology::Closed => {
            for &len in &segments.lengths {
                angles.push(Angle::Corner);
                angles.extend(std::iter::repeat(Angle::Straight).take(len as usize - 1));
            }
        }
    }
    FixedAngleChain::new(segments.topology, angles, colors)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    /// Closed chain with an odd number of edges has no planar configuration.
    OddClosedParity { edges: usize },
    /// Closed chain without a 90° vertex cannot close.
    ClosedWithoutCorner,
    /// Open chain with no edges.
    EmptyOpen,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::OddClosedParity { edges } => {
                write!(f, "closed chain with {edges} edges: no 2D configuration exists (odd parity)")
            }
            Issue::ClosedWithoutCorner => {
                f.write_str("closed chain without corners: no 2D configuration exists")
            }
            Issue::EmptyOpen => f.write_str("open chain without edges"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

pub fn validate(chain: &FixedAngleChain) -> ValidationReport {
    let mut issues = Vec::new();
    match chain.topology() {
        Topology::Closed => {
            if chain.edge_count() % 2 == 1 {
                issues.push(Issue::OddClosedParity { edges: chain.edge_count() });
            }
            if chain.corner_count() == 0 {
                issues.push(Issue::ClosedWithoutCorner);
            }
        }
        Topology::Open => {
            if chain.edge_count() == 0 {
                issues.push(Issue::EmptyOpen);
            }
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bowtie() -> FixedAngleChain {
        let angles = "CCSCCCSC".chars().map(|c| if c == 'C' { Angle::Corner } else { Angle::Straight });
        FixedAngleChain::closed(angles.collect()).unwrap()
    }

    #[test]
    fn bowtie_segments() {
        let d = segments_of(&bowtie()).unwrap();
        assert_eq!(d.lengths, vec![1, 2, 1, 1, 2, 1]);
        assert_eq!(d, SegmentDecomposition::closed(vec![2, 1, 1, 2, 1, 1]).unwrap());
    }

    #[test]
    fn small_segments() {
        let open = FixedAngleChain::open(vec![Angle::Straight]);
        assert_eq!(segments_of(&open).unwrap().lengths, vec![2]);
        let square = FixedAngleChain::closed(vec![Angle::Corner; 4]).unwrap();
        assert_eq!(segments_of(&square).unwrap().lengths, vec![1, 1, 1, 1]);
    }

    #[test]
    fn closed_without_corner_errors() {
        let c = FixedAngleChain::closed(vec![Angle::Straight; 4]).unwrap();
        assert_eq!(segments_of(&c), Err(ChainError::NoCorner));
    }

    #[test]
    fn from_segments() {
        let sq = chain_from_segments(&SegmentDecomposition::closed(vec![1; 4]).unwrap(), None).unwrap();
        assert_eq!(sq.angles(), &[Angle::Corner; 4]);
        let f2 = chain_from_segments(&SegmentDecomposition::closed(vec![1, 2, 1, 1, 2, 1]).unwrap(), None)
            .unwrap();
        assert_eq!(segments_of(&f2).unwrap(), segments_of(&bowtie()).unwrap());
        let three = chain_from_segments(&SegmentDecomposition::open(vec![3]).unwrap(), None).unwrap();
        assert_eq!(three.angles(), &[Angle::Straight, Angle::Straight]);
        assert_eq!(three.edge_count(), 3);
        assert!(SegmentDecomposition::open(vec![1, 0]).is_err());
        let bad = SegmentDecomposition { topology: Topology::Open, lengths: vec![2, 0] };
        assert_eq!(chain_from_segments(&bad, None), Err(ChainError::ZeroSegment(1)));
    }

    #[test]
    fn validation() {
        let odd = FixedAngleChain::closed(vec![Angle::Corner; 5]).unwrap();
        assert_eq!(validate(&odd).issues, vec![Issue::OddClosedParity { edges: 5 }]);
        assert!(validate(&FixedAngleChain::closed(vec![Angle::Corner; 4]).unwrap()).is_ok());
        let open = FixedAngleChain::open(vec![Angle::Corner, Angle::Straight, Angle::Corner, Angle::Corner, Angle::Straight, Angle::Corner, Angle::Corner]);
        assert_eq!(open.edge_count(), 8);
        assert!(validate(&open).is_ok());
    }

    #[test]
    fn color_count_checked() {
        let c = FixedAngleChain::open(vec![Angle::Corner, Angle::Corner]);
        assert!(c.clone().with_colors(vec![Color::H; 4]).is_ok());
        assert_eq!(
            c.with_colors(vec![Color::H; 3]),
            Err(ChainError::ColorCount { expected: 4, got: 3 })
        );
    }

    #[test]
    fn turn_parse() {
        let t: TurnSequence = "LRLRL".parse().unwrap();
        assert_eq!(t.to_string(), "LRLRL");
        assert!("LXR".parse::<TurnSequence>().is_err());
    }

    fn arb_angles() -> impl Strategy<Value = Vec<Angle>> {
        prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { Angle::Corner } else { Angle::Straight }), 0..60)
    }

    proptest! {
        #[test]
        fn segment_sum_is_edge_count(angles in arb_angles(), closed in any::<bool>()) {
            let chain = if closed {
                match FixedAngleChain::closed(angles) { Ok(c) => c, Err(_) => return Ok(()) }
            } else {
                FixedAngleChain::open(angles)
            };
            if let Ok(d) = segments_of(&chain) {
                prop_assert_eq!(d.total_length() as usize, chain.edge_count());
                let back = chain_from_segments(&d, None).unwrap();
                if closed {
                    prop_assert_eq!(segments_of(&back).unwrap(), d);
                    prop_assert_eq!(back.edge_count(), chain.edge_count());
                } else {
                    prop_assert_eq!(back, chain);
                }
            } else {
                prop_assert!(closed && chain.corner_count() == 0);
            }
        }

        #[test]
        fn validate_flags_exactly_bad_closed(angles in arb_angles()) {
            if let Ok(chain) = FixedAngleChain::closed(angles) {
                let bad = chain.edge_count() % 2 == 1 || chain.corner_count() == 0;
                prop_assert_eq!(!validate(&chain).is_ok(), bad);
            }
        }
    }
}

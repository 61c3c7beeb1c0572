//! Chain fragments for the hardness construction.
//!
//! Builders work in gadget units with the first vertex at a fixed local
//! origin; insulation works on the half grid and is emitted with every
//! length doubled. A fragment stores each intended folding as a corner
//! polyline, and all foldings of one fragment share a segment decomposition.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fold::{Box2, Dir, Point, Pose};
use crate::model::{chain_from_segments, Color, FixedAngleChain, SegmentDecomposition, TurnSequence};
use crate::poly::{PathBuilder, Polyline};
use crate::search::{enumerate_foldings, Constraints};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error("insulation: {0}")]
    Insulation(String),
    #[error("hook: {0}")]
    Hook(String),
    #[error("clause: {0}")]
    Clause(String),
    #[error("variable gadget needs at least one occurrence")]
    NoOccurrences,
    #[error("frame: {0}")]
    Frame(String),
    #[error("intended foldings disagree on segment lengths ({0})")]
    Inconsistent(String),
    #[error("intended folding {0} is not noncrossing")]
    SelfCrossing(String),
    #[error("certificate search: {0}")]
    Search(String),
}

/// Minimum hook vertical length for a formula with `m` clauses.
pub fn ell_min(m: usize) -> i64 {
    50.max(16 * m as i64 + 21)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GadgetKind {
    Frame,
    Insulation,
    Choice,
    Hook,
    ChoiceChain,
    TopSheath,
    BottomSheath,
    Variable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Folding {
    pub label: String,
    pub path: Polyline,
    pub anchors: BTreeMap<String, Point>,
}

impl Folding {
    fn new(label: impl Into<String>, path: Polyline) -> Self {
        let mut anchors = BTreeMap::new();
        anchors.insert("start".into(), path.points[0]);
        anchors.insert("end".into(), *path.points.last().unwrap());
        Folding { label: label.into(), path, anchors }
    }

    fn anchor(mut self, name: impl Into<String>, p: Point) -> Self {
        self.anchors.insert(name.into(), p);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetFragment {
    pub kind: GadgetKind,
    pub params: BTreeMap<String, i64>,
    pub segments: SegmentDecomposition,
    pub intended: Vec<Folding>,
}

impl GadgetFragment {
    fn new(kind: GadgetKind, params: &[(&str, i64)], intended: Vec<Folding>) -> Result<Self, GadgetError> {
        let first = intended.first().expect("at least one intended folding");
        let segments = first.path.segments().map_err(|e| GadgetError::Inconsistent(e.to_string()))?;
        for f in &intended {
            if f.path.lengths() != segments.lengths {
                return Err(GadgetError::Inconsistent(f.label.clone()));
            }
            if !f.path.is_noncrossing() {
                return Err(GadgetError::SelfCrossing(f.label.clone()));
            }
        }
        Ok(GadgetFragment {
            kind,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            segments,
            intended,
        })
    }

    pub fn turns(&self, i: usize) -> TurnSequence {
        self.intended[i].path.turns()
    }

    pub fn pose(&self, i: usize) -> Pose {
        self.intended[i].path.pose()
    }

    pub fn folding(&self, label: &str) -> Option<&Folding> {
        self.intended.iter().find(|f| f.label == label)
    }

    /// Vertex-level chain; only sensible for small fragments.
    pub fn chain(&self) -> FixedAngleChain {
        chain_from_segments(&self.segments, None).expect("fragment segments are positive")
    }
}

fn reflect_y(p: Point) -> Point {
    Point::new(p.x, -p.y)
}

// ---------------------------------------------------------------- insulation

/// Insulation row: grilles separated by tabs. `width` and `tabs` are in
/// gadget units; a tab at `c` occupies columns `c` and `c + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsulationSpec {
    pub h: i64,
    pub width: i64,
    pub tabs: Vec<i64>,
}

/// A grille on the half grid: left column and repetition count `k`
/// (width `k + 1` units).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grille {
    pub x0: i64,
    pub k: i64,
}

impl InsulationSpec {
    pub fn validate(&self) -> Result<(), GadgetError> {
        let err = |s: String| Err(GadgetError::Insulation(s));
        if self.h < 1 {
            return err(format!("half-height must be at least 1, got {}", self.h));
        }
        if self.width < 2 {
            return err(format!("width must be at least 2, got {}", self.width));
        }
        let mut prev: Option<i64> = None;
        for &c in &self.tabs {
            if c < 2 || c > self.width - 3 {
                return err(format!("tab at {c} touches the edge of a width-{} row", self.width));
            }
            if let Some(p) = prev {
                if c < p + 3 {
                    return err(format!("tabs at {p} and {c} are consecutive"));
                }
            }
            prev = Some(c);
        }
        Ok(())
    }

    /// Grilles in half-grid coordinates, left to right.
    pub fn grilles(&self) -> Vec<Grille> {
        let mut out = Vec::new();
        let mut x = 1;
        for &c in &self.tabs {
            out.push(Grille { x0: x, k: (2 * c - 1 - x) / 2 - 1 });
            x = 2 * c + 3;
        }
        out.push(Grille { x0: x, k: (2 * self.width - 1 - x) / 2 - 1 });
        out
    }

    /// Sum of vertical lengths (gadget units).
    pub fn vertical_total(&self) -> i64 {
        let grilles: i64 = self.grilles().iter().map(|g| 4 * self.h * (g.k + 1)).sum();
        grilles + self.tabs.len() as i64 * 2 * (self.h + 2)
    }
}

/// Insulation path on the half grid, axis at y = 0, from (0,0) to
/// (2·width, 0). `up[i]` chooses the reflection of grille `i` (first
/// vertical upward), `tab_up[j]` whether tab `j` points up.
pub fn insulation_path(spec: &InsulationSpec, up: &[bool], tab_up: &[bool]) -> Polyline {
    let h2 = 2 * spec.h;
    let grilles = spec.grilles();
    let mut b = PathBuilder::new(Point::ORIGIN);
    for (i, g) in grilles.iter().enumerate() {
        b.go(Dir::E, 1);
        let (u, d) = if up[i] { (Dir::N, Dir::S) } else { (Dir::S, Dir::N) };
        b.go(u, h2).go(Dir::E, 1).go(d, 2 * h2);
        for _ in 0..g.k {
            b.go(Dir::E, 1).go(u, 2 * h2).go(Dir::E, 1).go(d, 2 * h2);
        }
        b.go(Dir::E, 1).go(u, h2).go(Dir::E, 1);
        if let Some(&c) = spec.tabs.get(i) {
            debug_assert_eq!(b.at().x, 2 * c);
            let (u, d) = if tab_up[i] { (Dir::N, Dir::S) } else { (Dir::S, Dir::N) };
            b.go(u, h2 + 4).go(Dir::E, 2).go(d, h2 + 4);
        }
    }
    b.open()
}

fn insulation_folding(spec: &InsulationSpec, up: &[bool], tab_up: &[bool]) -> Folding {
    let h2 = 2 * spec.h;
    let mut f = Folding::new(
        format!(
            "g{}-t{}",
            up.iter().map(|&u| if u { 'u' } else { 'd' }).collect::<String>(),
            tab_up.iter().map(|&u| if u { 'u' } else { 'd' }).collect::<String>()
        ),
        insulation_path(spec, up, tab_up),
    );
    for (i, g) in spec.grilles().iter().enumerate() {
        f = f
            .anchor(format!("grille{i}.min"), Point::new(g.x0, -h2))
            .anchor(format!("grille{i}.max"), Point::new(g.x0 + 2 * g.k + 2, h2));
    }
    for (j, &c) in spec.tabs.iter().enumerate() {
        let y = if tab_up[j] { h2 + 4 } else { -h2 - 4 };
        f = f.anchor(format!("tab{j}"), Point::new(2 * c, y));
    }
    f
}

/// Every reflection choice is an intended folding; rows with more than ten
/// flippable parts only store the all-up folding and the all-tabs-down one.
pub fn build_insulation(spec: &InsulationSpec) -> Result<GadgetFragment, GadgetError> {
    spec.validate()?;
    let g = spec.grilles().len();
    let t = spec.tabs.len();
    let mut foldings = Vec::new();
    if g + t <= 10 {
        for mask in 0u32..(1 << (g + t)) {
            let up: Vec<bool> = (0..g).map(|i| mask >> i & 1 == 0).collect();
            let tab_up: Vec<bool> = (0..t).map(|j| mask >> (g + j) & 1 == 0).collect();
            foldings.push(insulation_folding(spec, &up, &tab_up));
        }
    } else {
        foldings.push(insulation_folding(spec, &vec![true; g], &vec![true; t]));
        foldings.push(insulation_folding(spec, &vec![true; g], &vec![false; t]));
    }
    GadgetFragment::new(
        GadgetKind::Insulation,
        &[("h", spec.h), ("width", spec.width), ("tabs", t as i64), ("grilles", g as i64)],
        foldings,
    )
}

// -------------------------------------------------------------------- choice

/// Segment lengths of the choice gadget, left side, tab, right side.
pub const CHOICE_SEGMENTS: [u64; 19] = [1, 1, 1, 2, 1, 2, 1, 1, 4, 1, 4, 1, 1, 2, 1, 2, 1, 1, 1];

/// The five downward foldings from the left endpoint (heading down) with
/// their tab shifts relative to the left endpoint.
const CHOICE_DOWN: [(&str, i64); 5] = [
    ("RLRLRLLRLLRLRLRLLR", -4),
    ("RLLRRLLRLLRLRLLRLR", 0),
    ("RLRLLRLRLLRLLRRLLR", 0),
    ("RLRLLRLRLLRLRLLRLR", 0),
    ("RLLRLRLRLLRLLRLRLR", 4),
];

/// Depth of the tab below (or above) the endpoints.
pub const CHOICE_DEPTH: i64 = 8;
/// Horizontal tab shifts relative to the left endpoint.
pub const CHOICE_SHIFTS: [i64; 3] = [-4, 0, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn sign(self) -> i64 {
        match self {
            Side::Above => 1,
            Side::Below => -1,
        }
    }
}

/// Choice gadget path from `(0,0)` to `(1,0)` with its tab on `side` at
/// shift index `shift`; `variant` picks among foldings with the same shift.
pub fn choice_paths() -> Vec<(Side, usize, Polyline)> {
    let seg = SegmentDecomposition::open(CHOICE_SEGMENTS.to_vec()).unwrap();
    let mut out = Vec::new();
    for side in [Side::Below, Side::Above] {
        for (turns, shift) in CHOICE_DOWN {
            let t: TurnSequence = turns.parse().unwrap();
            let pts = Polyline::embed(&seg, &t, Pose::new(Point::ORIGIN, Dir::S)).unwrap();
            let mut pl = Polyline::open(pts).unwrap();
            if side == Side::Above {
                pl = pl.map(reflect_y);
            }
            let idx = CHOICE_SHIFTS.iter().position(|&s| s == shift).unwrap();
            out.push((side, idx, pl));
        }
    }
    out
}

/// Left point of the tab (the bottom or top horizontal of length 1).
pub fn choice_tab(pl: &Polyline) -> Point {
    let p = pl.points[9];
    let q = pl.points[10];
    if p.x < q.x {
        p
    } else {
        q
    }
}

pub fn build_choice() -> GadgetFragment {
    let mut seen: BTreeMap<(Side, usize), usize> = BTreeMap::new();
    let foldings = choice_paths()
        .into_iter()
        .map(|(side, shift, pl)| {
            let n = seen.entry((side, shift)).or_default();
            *n += 1;
            let tab = choice_tab(&pl);
            Folding::new(format!("{side:?}{shift}.{n}").to_lowercase(), pl).anchor("tab", tab)
        })
        .collect();
    GadgetFragment::new(GadgetKind::Choice, &[("depth", CHOICE_DEPTH)], foldings).expect("choice gadget is consistent")
}

// ---------------------------------------------------------------------- hook

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HookRole {
    Stabilizing,
    Tab,
}

/// Seven-segment hook: `first` away from the sheath, `horizontal` to the
/// right, `middle` further out, one unit right, then back along the inside
/// with lengths `middle + 1`, `horizontal`, `first - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HookSpec {
    pub direction: Side,
    pub first: i64,
    pub middle: i64,
    pub horizontal: i64,
    pub role: HookRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HookLimits {
    pub ell_min: i64,
    /// How much longer the outer verticals must be than the inner ones.
    pub margin: i64,
    /// The horizontal must be strictly longer than this.
    pub min_horizontal: i64,
}

impl HookLimits {
    pub fn production(m: usize, width: i64) -> Self {
        HookLimits { ell_min: ell_min(m), margin: 50, min_horizontal: width / 2 }
    }
}

impl HookSpec {
    pub fn last(&self) -> i64 {
        self.first - 1
    }

    pub fn check(&self, limits: &HookLimits) -> Result<(), GadgetError> {
        let err = |s: String| Err(GadgetError::Hook(s));
        if self.middle < limits.ell_min {
            return err(format!("middle vertical {} is shorter than l_min = {}", self.middle, limits.ell_min));
        }
        if self.last() < self.middle + 1 + limits.margin {
            return err(format!(
                "outer verticals ({}, {}) must exceed the inner ones ({}, {}) by at least {}",
                self.first,
                self.last(),
                self.middle,
                self.middle + 1,
                limits.margin
            ));
        }
        if self.horizontal <= limits.min_horizontal {
            return err(format!(
                "horizontal {} is not longer than half the construction width ({})",
                self.horizontal, limits.min_horizontal
            ));
        }
        Ok(())
    }

    /// Offset from the hook's start to the left tip point.
    pub fn tip_offset(&self) -> Point {
        Point::new(self.horizontal, self.direction.sign() * (self.first + self.middle))
    }

    /// Vertical extent measured from the start.
    pub fn depth(&self) -> i64 {
        self.first + self.middle
    }

    pub fn vertical_total(&self) -> i64 {
        self.first + self.middle + (self.middle + 1) + self.last()
    }
}

/// Appends a hook starting at the builder's current point.
fn push_hook(b: &mut PathBuilder, spec: &HookSpec) {
    let (out, back) = match spec.direction {
        Side::Below => (Dir::S, Dir::N),
        Side::Above => (Dir::N, Dir::S),
    };
    b.go(out, spec.first)
        .go(Dir::E, spec.horizontal)
        .go(out, spec.middle)
        .go(Dir::E, 1)
        .go(back, spec.middle + 1)
        .go(Dir::W, spec.horizontal)
        .go(back, spec.last());
}

pub fn hook_path(spec: &HookSpec, start: Point) -> Polyline {
    let mut b = PathBuilder::new(start);
    push_hook(&mut b, spec);
    b.open()
}

pub fn build_hook(spec: &HookSpec, limits: &HookLimits) -> Result<GadgetFragment, GadgetError> {
    spec.check(limits)?;
    let f = Folding::new("n", hook_path(spec, Point::ORIGIN)).anchor("tip", spec.tip_offset());
    GadgetFragment::new(
        GadgetKind::Hook,
        &[("first", spec.first), ("middle", spec.middle), ("horizontal", spec.horizontal)],
        vec![f],
    )
}

// -------------------------------------------------------------------- clause

/// Horizontal distance between consecutive clauses in a row.
pub const CLAUSE_PITCH: i64 = 21;
/// Left column of each tab-hook slot (clause-local), one per choice shift.
pub const SLOT_X: [i64; 3] = [5, 9, 13];
/// Clause-local left endpoint of the choice gadget proper.
pub const CHOICE_X: i64 = 10;
/// Height of the sheath line (below the choice row) and hook start offsets.
pub const SHEATH_DEPTH: i64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub side: Side,
    pub shift: usize,
}

/// Hook lengths for both sheaths, each in chain order:
/// left stabilizing hook, tab hooks by increasing shift, right stabilizing hook.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseHooks {
    pub top: Vec<HookSpec>,
    pub bottom: Vec<HookSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseFragments {
    pub choice: GadgetFragment,
    pub top: GadgetFragment,
    pub bottom: GadgetFragment,
}

fn side_shifts(conns: &[Connection], side: Side) -> Vec<usize> {
    let mut s: Vec<usize> = conns.iter().filter(|c| c.side == side).map(|c| c.shift).collect();
    s.sort_unstable();
    s
}

pub fn check_connections(conns: &[Connection]) -> Result<(), GadgetError> {
    if conns.len() > 3 {
        return Err(GadgetError::Clause(format!("{} connections; at most 3 fit the choice gadget", conns.len())));
    }
    let mut used = [false; 3];
    for c in conns {
        if c.shift > 2 {
            return Err(GadgetError::Clause(format!("shift index {} out of range", c.shift)));
        }
        if used[c.shift] {
            return Err(GadgetError::Clause(format!("shift {} assigned twice", c.shift)));
        }
        used[c.shift] = true;
    }
    Ok(())
}

/// Start point (sheath-local, retracted), role and tip column of one hook.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HookSite {
    pub start: Point,
    pub role: HookRole,
    pub tip_x: i64,
}

/// Deepest retracted tab-tip level that still leaves room above it for the
/// stacked horizontals, for downward hooks listed in chain order.
///
/// Hook `j`'s outer horizontal sits at `T + c + 4j` where `c` keeps every
/// middle vertical at least `l_min`; tab tips end at `T`, stabilizing tips
/// two lower (against the grille).
pub fn max_tip_level(sites: &[HookSite], limits: &HookLimits) -> i64 {
    let c = stack_offset(sites, limits);
    sites
        .iter()
        .enumerate()
        .map(|(j, s)| s.start.y - 2 * c - 8 * j as i64 + tip_drop(s.role) - 2 - limits.margin)
        .min()
        .unwrap_or(0)
}

fn tip_drop(role: HookRole) -> i64 {
    match role {
        HookRole::Tab => 0,
        HookRole::Stabilizing => -2,
    }
}

fn stack_offset(sites: &[HookSite], limits: &HookLimits) -> i64 {
    sites
        .iter()
        .enumerate()
        .map(|(j, s)| limits.ell_min + tip_drop(s.role) - 4 * j as i64)
        .max()
        .unwrap_or(limits.ell_min)
}

/// Hook lengths for downward hooks with tab tips at level `t` (at most
/// [`max_tip_level`]); the top sheath uses the mirror image.
pub fn stack_hooks(sites: &[HookSite], t: i64, direction: Side, limits: &HookLimits) -> Result<Vec<HookSpec>, GadgetError> {
    let c = stack_offset(sites, limits);
    let specs: Vec<HookSpec> = sites
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let yh = t + c + 4 * j as i64;
            HookSpec {
                direction,
                first: s.start.y - yh,
                middle: yh - (t + tip_drop(s.role)),
                horizontal: s.tip_x - s.start.x,
                role: s.role,
            }
        })
        .collect();
    for w in sites.windows(2) {
        if w[1].tip_x < w[0].tip_x + 2 {
            return Err(GadgetError::Hook(format!("tips at columns {} and {} overlap", w[0].tip_x, w[1].tip_x)));
        }
    }
    for h in &specs {
        h.check(limits)?;
    }
    Ok(specs)
}

/// Clause-local hook sites of one sheath (drawn as the bottom sheath).
pub fn sheath_sites(shifts: &[usize], tip_x: &[i64]) -> Vec<HookSite> {
    let mut starts = vec![(Point::new(1, -1), HookRole::Stabilizing)];
    for &s in shifts {
        starts.push((Point::new(SLOT_X[s] + 1, -SHEATH_DEPTH + 1), HookRole::Tab));
    }
    starts.push((Point::new(19, -1), HookRole::Stabilizing));
    starts
        .into_iter()
        .zip(tip_x)
        .map(|((start, role), &tip_x)| HookSite { start, role, tip_x })
        .collect()
}

/// Smallest legal hook lengths for an isolated clause.
pub fn default_clause_hooks(conns: &[Connection], limits: &HookLimits) -> ClauseHooks {
    let mk = |side: Side| {
        let shifts = side_shifts(conns, side);
        let n = shifts.len() + 2;
        let far = 30 + limits.min_horizontal;
        let tips: Vec<i64> = (0..n as i64).map(|j| far + 2 * j).collect();
        let sites = sheath_sites(&shifts, &tips);
        let t = max_tip_level(&sites, limits);
        stack_hooks(&sites, t, side, limits).expect("default hooks are legal")
    };
    ClauseHooks { top: mk(Side::Above), bottom: mk(Side::Below) }
}

/// Bottom sheath from `(0,-1)` to `(21,-1)`; `slots[s]` holds the tab hook
/// for shift `s` and whether it is extended. Mirror for the top sheath.
pub fn sheath_path(stab: (&HookSpec, &HookSpec), slots: &[Option<(HookSpec, bool)>; 3]) -> Polyline {
    let d = SHEATH_DEPTH;
    let mut b = PathBuilder::new(Point::new(0, -1));
    b.go(Dir::E, 1);
    push_hook(&mut b, &HookSpec { direction: Side::Below, ..*stab.0 });
    b.go(Dir::E, 1).to(Point::new(3, -d));
    for (s, slot) in slots.iter().enumerate() {
        let a = SLOT_X[s];
        if let Some((spec, extended)) = slot {
            b.to(Point::new(a, -d));
            let y0 = if *extended { -d - 1 } else { -d + 1 };
            b.to(Point::new(a, y0)).go(Dir::E, 1);
            push_hook(&mut b, &HookSpec { direction: Side::Below, ..*spec });
            b.go(Dir::E, 1).to(Point::new(a + 3, -d));
        }
    }
    b.to(Point::new(18, -d)).to(Point::new(18, -1)).go(Dir::E, 1);
    push_hook(&mut b, &HookSpec { direction: Side::Below, ..*stab.1 });
    b.go(Dir::E, 1);
    b.open()
}

/// Chain-order tip positions (left tip point) of a sheath's hooks.
pub fn sheath_tips(stab: (&HookSpec, &HookSpec), slots: &[Option<(HookSpec, bool)>; 3]) -> Vec<Point> {
    let below = |p: Point, h: &HookSpec| Point::new(p.x + h.horizontal, p.y - h.depth());
    let mut out = vec![below(Point::new(1, -1), stab.0)];
    for (s, slot) in slots.iter().enumerate() {
        if let Some((spec, ext)) = slot {
            let y0 = if *ext { -SHEATH_DEPTH - 1 } else { -SHEATH_DEPTH + 1 };
            out.push(below(Point::new(SLOT_X[s] + 1, y0), spec));
        }
    }
    out.push(below(Point::new(19, -1), stab.1));
    out
}

fn sheath_fragment(side: Side, shifts: &[usize], hooks: &[HookSpec]) -> Result<GadgetFragment, GadgetError> {
    let t = shifts.len();
    let stab = (&hooks[0], &hooks[t + 1]);
    let mut foldings = Vec::new();
    for mask in 0u32..(1 << t) {
        let mut slots: [Option<(HookSpec, bool)>; 3] = [None; 3];
        for (j, &s) in shifts.iter().enumerate() {
            slots[s] = Some((hooks[j + 1], mask >> j & 1 == 1));
        }
        let mut pl = sheath_path(stab, &slots);
        let mut tips = sheath_tips(stab, &slots);
        if side == Side::Above {
            pl = pl.map(reflect_y);
            tips.iter_mut().for_each(|p| *p = reflect_y(*p));
        }
        let label: String = (0..t).map(|j| if mask >> j & 1 == 1 { 'x' } else { 'r' }).collect();
        let mut f = Folding::new(if label.is_empty() { "flat".to_string() } else { label }, pl);
        for (j, p) in tips.into_iter().enumerate() {
            f = f.anchor(format!("hook{j}.tip"), p);
        }
        foldings.push(f);
    }
    let kind = if side == Side::Above { GadgetKind::TopSheath } else { GadgetKind::BottomSheath };
    GadgetFragment::new(kind, &[("tab_hooks", t as i64)], foldings)
}

/// Choice chain (left endpoint `(1,0)`, right endpoint `(20,0)`) and both
/// sheaths (`(0,∓1)` to `(21,∓1)`), all clause-local.
pub fn build_clause(conns: &[Connection], hooks: &ClauseHooks, limits: &HookLimits) -> Result<ClauseFragments, GadgetError> {
    check_connections(conns)?;
    let top_shifts = side_shifts(conns, Side::Above);
    let bottom_shifts = side_shifts(conns, Side::Below);
    for (name, list, n) in [("top", &hooks.top, top_shifts.len()), ("bottom", &hooks.bottom, bottom_shifts.len())] {
        if list.len() != n + 2 {
            return Err(GadgetError::Clause(format!("{name} sheath needs {} hooks, got {}", n + 2, list.len())));
        }
        for (j, h) in list.iter().enumerate() {
            let want = if j == 0 || j == n + 1 { HookRole::Stabilizing } else { HookRole::Tab };
            if h.role != want {
                return Err(GadgetError::Clause(format!("{name} hook {j} should be {want:?}")));
            }
            h.check(limits)?;
        }
    }
    let choice = choice_chain_fragment()?;
    let top = sheath_fragment(Side::Above, &top_shifts, &hooks.top)?;
    let bottom = sheath_fragment(Side::Below, &bottom_shifts, &hooks.bottom)?;
    Ok(ClauseFragments { choice, top, bottom })
}

/// Choice chain with its tab on `side` at shift index `shift` (first
/// matching folding), clause-local.
pub fn choice_chain_path(side: Side, shift: usize) -> Polyline {
    let (_, _, pl) = choice_paths().into_iter().find(|(s, k, _)| *s == side && *k == shift).unwrap();
    choice_chain_from(&pl)
}

fn choice_chain_from(gadget: &Polyline) -> Polyline {
    let mut b = PathBuilder::new(Point::new(1, 0));
    b.to(Point::new(CHOICE_X, 0));
    b.extend(&gadget.map(|p| Point::new(p.x + CHOICE_X, p.y)));
    b.to(Point::new(20, 0));
    b.open()
}

fn choice_chain_fragment() -> Result<GadgetFragment, GadgetError> {
    let base = build_choice();
    let foldings = base
        .intended
        .iter()
        .map(|f| {
            let tab = f.anchors["tab"];
            Folding::new(f.label.clone(), choice_chain_from(&f.path)).anchor("tab", Point::new(tab.x + CHOICE_X, tab.y))
        })
        .collect();
    GadgetFragment::new(GadgetKind::ChoiceChain, &[("width", 19)], foldings)
}

// ------------------------------------------------------------------ variable

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Occurrence {
    Null,
    Literal { positive: bool, side: Side },
}

/// Width between the endpoints of a variable gadget with `k` occurrences.
pub fn variable_width(k: usize) -> i64 {
    3 * k as i64 + 18
}

/// Left tab column of occurrence `i` (variable-local).
pub fn variable_tab_column(i: usize) -> i64 {
    10 + 3 * i as i64
}

/// Upper zig-zag heights per occurrence in the true folding (1 or 3).
pub fn occurrence_heights(occ: &[Occurrence]) -> Vec<i64> {
    let mut prev = 3;
    occ.iter()
        .map(|o| {
            let h = match *o {
                Occurrence::Null => prev,
                Occurrence::Literal { positive, side } => {
                    if positive == (side == Side::Above) {
                        1
                    } else {
                        3
                    }
                }
            };
            prev = h;
            h
        })
        .collect()
}

/// Variable gadget from `(0,0)` to `(3k+18, 0)`; `value = false` is the
/// reflection through the baseline.
pub fn variable_path(occ: &[Occurrence], value: bool) -> Polyline {
    let k = occ.len() as i64;
    let hs = occurrence_heights(occ);
    let mut b = PathBuilder::new(Point::ORIGIN);
    // left bookend
    b.go(Dir::E, 2).go(Dir::N, 3).go(Dir::E, 2).go(Dir::S, 6).go(Dir::E, 2).go(Dir::N, 4).go(Dir::E, 3);
    // upper zig-zag, starting at height 1 and leaving at height 3
    let mut x = 9;
    for &h in &hs {
        b.to(Point::new(x, h)).to(Point::new(x + 3, h));
        x += 3;
    }
    b.to(Point::new(x, 3)).to(Point::new(x + 2, 3));
    // cap, baseline, cap
    b.to(Point::new(x + 2, 0)).to(Point::new(7, 0)).to(Point::new(7, -3));
    // lower zig-zag
    let mut x = 9;
    b.to(Point::new(9, -3));
    for &h in &hs {
        b.to(Point::new(x, h - 4)).to(Point::new(x + 3, h - 4));
        x += 3;
    }
    b.to(Point::new(x, -1)).to(Point::new(x + 3, -1));
    // right bookend
    let x = 3 * k + 12;
    b.to(Point::new(x, 3)).go(Dir::E, 2).go(Dir::S, 6).go(Dir::E, 2).go(Dir::N, 3).go(Dir::E, 2);
    let pl = b.open();
    if value {
        pl
    } else {
        pl.map(reflect_y)
    }
}

pub fn build_variable(occ: &[Occurrence]) -> Result<GadgetFragment, GadgetError> {
    if occ.is_empty() {
        return Err(GadgetError::NoOccurrences);
    }
    let hs = occurrence_heights(occ);
    let foldings = [true, false]
        .into_iter()
        .map(|value| {
            let mut f = Folding::new(if value { "true" } else { "false" }, variable_path(occ, value));
            let s = if value { 1 } else { -1 };
            for (i, &h) in hs.iter().enumerate() {
                let x = variable_tab_column(i);
                f = f.anchor(format!("occ{i}.upper"), Point::new(x, s * h)).anchor(format!("occ{i}.lower"), Point::new(x, s * (h - 4)));
            }
            f
        })
        .collect();
    GadgetFragment::new(GadgetKind::Variable, &[("k", occ.len() as i64)], foldings)
}

// --------------------------------------------------------------------- frame

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameVariant {
    Closed,
    Hp,
    Square,
}

impl std::str::FromStr for FrameVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed" => Ok(FrameVariant::Closed),
            "hp" => Ok(FrameVariant::Hp),
            "square" => Ok(FrameVariant::Square),
            other => Err(format!("unknown variant `{other}` (expected closed, hp or square)")),
        }
    }
}

/// Frame around the ×5 inner chain `5C`, attached at `p` (lower-left corner
/// of the inner box) and `q = p + (5, 0)`. The inner chain runs from `p` to
/// `q` without the attach edge.
///
/// * closed: `trail` runs from `q` back to `p`.
/// * hp: `lead` ends at `p`, `trail` starts at `q`; both free ends are H.
/// * square: `lead` ends at `q`, the inner chain is traversed from `q` to
///   `p`, and `trail` starts at `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameGadget {
    pub variant: FrameVariant,
    pub p: Point,
    pub q: Point,
    pub lead: Option<Polyline>,
    pub trail: Polyline,
    pub reverse_inner: bool,
    /// Square side (square variant) or tail overhang (hp variant).
    pub size: i64,
    /// Bounding square for the square variant.
    pub square: Option<Box2>,
}

impl FrameGadget {
    /// Attaches the frame to the inner chain given from `p` to `q`.
    pub fn assemble(&self, inner: &Polyline) -> Polyline {
        assert_eq!(inner.points.first(), Some(&self.p));
        assert_eq!(inner.points.last(), Some(&self.q));
        let mid = if self.reverse_inner { inner.reversed() } else { inner.clone() };
        let mut b = PathBuilder::new(match &self.lead {
            Some(l) => l.points[0],
            None => mid.points[0],
        });
        if let Some(l) = &self.lead {
            b.extend(l);
        }
        b.extend(&mid);
        b.extend(&self.trail);
        match self.variant {
            FrameVariant::Closed => b.closed(),
            _ => b.open(),
        }
    }

    /// Colors for the assembled chain: H only at the two hp endpoints.
    pub fn colors(&self, vertex_count: usize) -> Option<Vec<Color>> {
        (self.variant == FrameVariant::Hp).then(|| {
            let mut c = vec![Color::P; vertex_count];
            c[0] = Color::H;
            c[vertex_count - 1] = Color::H;
            c
        })
    }
}

/// Nonzero residues mod 5 of a closed polyline's segments, split into
/// (horizontal, vertical).
pub fn residues(pl: &Polyline) -> (Vec<u64>, Vec<u64>) {
    let mut h = Vec::new();
    let mut v = Vec::new();
    for (i, len) in pl.lengths().into_iter().enumerate() {
        if len % 5 != 0 {
            if pl.dir(i).is_horizontal() {
                h.push(len % 5);
            } else {
                v.push(len % 5);
            }
        }
    }
    h.sort_unstable();
    v.sort_unstable();
    (h, v)
}

/// `inner` is the ×5 inner box; `total` the length `L` of the ×5 inner chain.
pub fn build_frame(variant: FrameVariant, inner: Box2, total: u64) -> Result<FrameGadget, GadgetError> {
    let aligned = [inner.min.x, inner.min.y, inner.max.x, inner.max.y].iter().all(|v| v.rem_euclid(5) == 0);
    if !aligned {
        return Err(GadgetError::Frame(format!("inner box {inner:?} is not aligned to the ×5 grid")));
    }
    if inner.width() < 5 || inner.height() < 5 {
        return Err(GadgetError::Frame("inner box must be at least one scaled unit wide and tall".into()));
    }
    let (x0, y0, x1, y1) = (inner.min.x, inner.min.y, inner.max.x, inner.max.y);
    let p = Point::new(x0, y0);
    let q = Point::new(x0 + 5, y0);
    let l = total as i64;
    // inner ring from q: down 5, around clockwise-from-inside to the left side
    let inner_ring = |b: &mut PathBuilder, left_stop: i64| {
        b.to(Point::new(x0 + 5, y0 - 5))
            .to(Point::new(x1 + 5, y0 - 5))
            .to(Point::new(x1 + 5, y1 + 5))
            .to(Point::new(x0 - 5, y1 + 5))
            .to(Point::new(x0 - 5, left_stop));
    };
    match variant {
        FrameVariant::Closed => {
            let mut b = PathBuilder::new(q);
            inner_ring(&mut b, y0 - 5);
            b.to(Point::new(x0 - 6, y0 - 5))
                .to(Point::new(x0 - 6, y1 + 6))
                .to(Point::new(x1 + 6, y1 + 6))
                .to(Point::new(x1 + 6, y0 - 6))
                .to(Point::new(x0, y0 - 6))
                .to(p);
            Ok(FrameGadget { variant, p, q, lead: None, trail: b.open(), reverse_inner: false, size: 0, square: None })
        }
        FrameVariant::Hp => {
            let d = 10 * l + 1;
            let mut lead = PathBuilder::new(Point::new(x0 - d, y0 - 5));
            lead.to(Point::new(x0, y0 - 5)).to(p);
            let mut b = PathBuilder::new(q);
            inner_ring(&mut b, y0 - 4);
            b.to(Point::new(x0 - 6, y0 - 4))
                .to(Point::new(x0 - 6, y1 + 6))
                .to(Point::new(x1 + 6, y1 + 6))
                .to(Point::new(x1 + 6, y0 - 6))
                .to(Point::new(x0 - d, y0 - 6));
            Ok(FrameGadget {
                variant,
                p,
                q,
                lead: Some(lead.open()),
                trail: b.open(),
                reverse_inner: false,
                size: d,
                square: None,
            })
        }
        FrameVariant::Square => {
            // the square is placed so the inner box sits at its lower right
            let s = 10 * l + 1;
            let w = x1 - x0;
            let ox = x0 - (s - w - 10);
            let oy = y0 - 11;
            if s - w - 10 - 1 <= 9 * l {
                return Err(GadgetError::Frame(format!("inner box width {w} too large for L = {l}")));
            }
            if y1 + 6 - oy >= s {
                return Err(GadgetError::Frame(format!("inner box height {} too large for L = {l}", y1 - y0)));
            }
            let at = |x: i64, y: i64| Point::new(ox + x, oy + y);
            let mut lead = PathBuilder::new(at(0, s));
            lead.to(at(0, 0))
                .to(at(s, 0))
                .to(Point::new(ox + s, y1 + 6))
                .to(Point::new(x0 - 6, y1 + 6))
                .to(Point::new(x0 - 6, y0 - 5))
                .to(Point::new(x0 - 5, y0 - 5))
                .to(Point::new(x0 - 5, y1 + 5))
                .to(Point::new(x1 + 5, y1 + 5))
                .to(Point::new(x1 + 5, y0 - 5))
                .to(Point::new(x0 + 5, y0 - 5))
                .to(q);
            let mut trail = PathBuilder::new(p);
            trail.to(Point::new(x0, oy + 1)).to(at(1, 1)).to(at(1, s));
            Ok(FrameGadget {
                variant,
                p,
                q,
                lead: Some(lead.open()),
                trail: trail.open(),
                reverse_inner: true,
                size: s,
                square: Some(Box2::new(at(0, 0), at(s, s))),
            })
        }
    }
}

// -------------------------------------------------------------- certificates

/// Every folding of a fragment under the constraints its neighbours impose,
/// next to the foldings the construction intends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub found: Vec<TurnSequence>,
    pub intended: Vec<TurnSequence>,
}

impl Certificate {
    /// The enumeration found exactly the intended foldings.
    pub fn exact(&self) -> bool {
        let a: BTreeSet<&TurnSequence> = self.found.iter().collect();
        let b: BTreeSet<&TurnSequence> = self.intended.iter().collect();
        a == b && a.len() == self.found.len()
    }
}

fn enumerate(chain: &FixedAngleChain, c: &Constraints, budget: u64) -> Result<Vec<TurnSequence>, GadgetError> {
    enumerate_foldings(chain, c, budget).map_err(|e| GadgetError::Search(e.to_string()))
}

fn all_intended(frag: &GadgetFragment) -> Vec<TurnSequence> {
    (0..frag.intended.len()).map(|i| frag.turns(i)).collect()
}

/// Insulation row with both endpoints pinned on the axis and the rows
/// above and below standing `3h + 1` away.
pub fn certify_insulation(spec: &InsulationSpec, budget: u64) -> Result<Certificate, GadgetError> {
    let frag = build_insulation(spec)?;
    let chain = frag.chain();
    let mut c = Constraints::with_pose(frag.pose(0));
    let end = *frag.intended[0].path.points.last().unwrap();
    c.pinned = vec![(chain.vertex_count() - 1, end)];
    let r = 3 * spec.h + 1;
    c.bounds = Some(Box2::new(Point::new(0, -r), Point::new(end.x, r)));
    Ok(Certificate { found: enumerate(&chain, &c, budget)?, intended: all_intended(&frag) })
}

/// Choice gadget between its two arms, both ends pinned, heading toward
/// `side`. Also returns the tab's left point for every folding found.
pub fn certify_choice(side: Side, budget: u64) -> Result<(Certificate, Vec<Point>), GadgetError> {
    let frag = build_choice();
    let chain = frag.chain();
    let n = chain.vertex_count();
    let s = side.sign();
    let mut c = Constraints::with_pose(Pose::new(Point::ORIGIN, if s < 0 { Dir::S } else { Dir::N }));
    c.pinned = vec![(n - 1, Point::new(1, 0)), (n - 2, Point::new(1, s))];
    c.obstacles = (-9..0).chain(2..11).map(|x| Point::new(x, 0)).collect();
    let found = enumerate(&chain, &c, budget)?;
    let seg = SegmentDecomposition::open(CHOICE_SEGMENTS.to_vec()).expect("positive lengths");
    let tabs = found
        .iter()
        .map(|t| {
            let pts = Polyline::embed(&seg, t, c.pose).expect("turn count matches");
            choice_tab(&Polyline::open(pts).expect("embedded walk"))
        })
        .collect();
    let intended = frag
        .intended
        .iter()
        .filter(|f| f.anchors["tab"].y.signum() == s)
        .map(|f| f.path.turns())
        .collect();
    Ok((Certificate { found, intended }, tabs))
}

/// Hook confined to the rectangle its intended folding spans.
pub fn certify_hook(spec: &HookSpec, limits: &HookLimits, budget: u64) -> Result<Certificate, GadgetError> {
    let frag = build_hook(spec, limits)?;
    let chain = frag.chain();
    let mut c = Constraints::with_pose(frag.pose(0));
    c.bounds = frag.intended[0].path.bounding_box();
    Ok(Certificate { found: enumerate(&chain, &c, budget)?, intended: all_intended(&frag) })
}

/// Variable gadget with its endpoint pinned, confined to the band between
/// the neighbouring insulation rows.
pub fn certify_variable(occ: &[Occurrence], budget: u64) -> Result<Certificate, GadgetError> {
    let frag = build_variable(occ)?;
    let chain = frag.chain();
    let w = variable_width(occ.len());
    let mut c = Constraints::with_pose(frag.pose(0));
    c.pinned = vec![(chain.vertex_count() - 1, Point::new(w, 0))];
    c.bounds = Some(Box2::new(Point::new(0, -3), Point::new(w, 3)));
    Ok(Certificate { found: enumerate(&chain, &c, budget)?, intended: all_intended(&frag) })
}

// ------------------------------------------------------------------- gallery

/// One instance of every gadget at small parameters, for visual inspection.
/// Frames are shown around a short stand-in inner chain.
pub fn gallery() -> Vec<(String, GadgetFragment)> {
    let lim = HookLimits { ell_min: 3, margin: 2, min_horizontal: 4 };
    let mut out = Vec::new();
    let ins = build_insulation(&InsulationSpec { h: 3, width: 5, tabs: vec![2] }).expect("valid insulation");
    out.push(("insulation".to_string(), ins));
    out.push(("choice".to_string(), build_choice()));
    let hook = HookSpec { direction: Side::Below, first: 8, middle: 3, horizontal: 5, role: HookRole::Tab };
    out.push(("hook".to_string(), build_hook(&hook, &lim).expect("valid hook")));
    let conns = [Connection { side: Side::Below, shift: 0 }, Connection { side: Side::Below, shift: 1 }, Connection { side: Side::Above, shift: 2 }];
    let clause = build_clause(&conns, &default_clause_hooks(&conns, &lim), &lim).expect("valid clause");
    out.push(("choice-chain".to_string(), clause.choice));
    out.push(("top-sheath".to_string(), clause.top));
    out.push(("bottom-sheath".to_string(), clause.bottom));
    let occ = [
        Occurrence::Literal { positive: true, side: Side::Above },
        Occurrence::Literal { positive: false, side: Side::Below },
    ];
    out.push(("variable".to_string(), build_variable(&occ).expect("valid variable")));
    let inner = Box2::new(Point::new(0, 0), Point::new(50, 50));
    for variant in [FrameVariant::Closed, FrameVariant::Hp, FrameVariant::Square] {
        let fr = build_frame(variant, inner, 100).expect("valid frame");
        let mut b = PathBuilder::new(fr.p);
        b.go(Dir::N, 10).go(Dir::E, 5).go(Dir::S, 10);
        let whole = fr.assemble(&b.open());
        let name = format!("frame-{}", format!("{variant:?}").to_lowercase());
        let frag = GadgetFragment::new(GadgetKind::Frame, &[("size", fr.size)], vec![Folding::new(name.clone(), whole)])
            .expect("frame folding is noncrossing");
        out.push((name, frag));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold::{embed, is_noncrossing};
    use crate::search::{enumerate_foldings, Constraints};
    use std::collections::BTreeSet;

    #[test]
    fn insulation_certificate_h3_one_tab() {
        let spec = InsulationSpec { h: 3, width: 5, tabs: vec![2] };
        let cert = certify_insulation(&spec, 1 << 22).unwrap();
        assert_eq!(cert.found.len(), 8);
        assert!(cert.exact());
    }

    #[test]
    fn insulation_tab_reaches_two_beyond_grilles() {
        let spec = InsulationSpec { h: 3, width: 5, tabs: vec![2] };
        let f = &build_insulation(&spec).unwrap().intended[0];
        let tab = f.anchors["tab0"].y.abs();
        let grille = f.anchors["grille0.max"].y;
        assert_eq!(tab - grille, 4); // 2 units on the half grid
    }

    #[test]
    fn zero_repetition_grille_pattern() {
        let spec = InsulationSpec { h: 2, width: 2, tabs: vec![] };
        let pl = insulation_path(&spec, &[true], &[]);
        // [1/2 connector], h, 1/2, 2h, 1/2, h, [1/2 connector], doubled
        assert_eq!(pl.lengths(), vec![1, 4, 1, 8, 1, 4, 1]);
        assert_eq!(spec.grilles(), vec![Grille { x0: 1, k: 0 }]);
    }

    #[test]
    fn insulation_rejects_bad_tabs() {
        for tabs in [vec![1], vec![2, 4], vec![5]] {
            let spec = InsulationSpec { h: 1, width: 7, tabs };
            assert!(build_insulation(&spec).is_err(), "{:?}", spec.tabs);
        }
        assert!(build_insulation(&InsulationSpec { h: 0, width: 5, tabs: vec![] }).is_err());
    }

    fn choice_constraints(side: Side) -> (FixedAngleChain, Constraints) {
        let frag = build_choice();
        let chain = frag.chain();
        let n = chain.vertex_count();
        let s = side.sign();
        let mut c = Constraints::with_pose(Pose::new(Point::ORIGIN, if s < 0 { Dir::S } else { Dir::N }));
        c.pinned = vec![(n - 1, Point::new(1, 0)), (n - 2, Point::new(1, s))];
        c.obstacles = (-9..0).chain(2..11).map(|x| Point::new(x, 0)).collect();
        (chain, c)
    }

    #[test]
    fn choice_certificate_five_downward() {
        let (cert, tabs) = certify_choice(Side::Below, 1 << 22).unwrap();
        assert_eq!(cert.found.len(), 5);
        assert!(cert.exact());
        let shifts: BTreeSet<i64> = tabs.iter().map(|p| p.x).collect();
        assert_eq!(shifts.len(), 3);
    }

    #[test]
    fn choice_tab_has_six_locations() {
        let frag = build_choice();
        let mut locs = BTreeSet::new();
        let mut shifts = BTreeSet::new();
        for side in [Side::Below, Side::Above] {
            let (chain, c) = choice_constraints(side);
            for t in enumerate_foldings(&chain, &c, 1 << 22).unwrap() {
                let cfg = embed(&chain, &t, c.pose).unwrap();
                // the tab is the horizontal edge at full depth
                let tab = cfg.points.iter().filter(|p| p.y.abs() == CHOICE_DEPTH).min().copied().unwrap();
                locs.insert(tab);
                shifts.insert(tab.x);
            }
        }
        assert_eq!(locs.len(), 6);
        assert_eq!(shifts.len(), 3);
        assert_eq!(frag.intended.len(), 10);
    }

    #[test]
    fn choice_l4_l6_never_turn_up() {
        let (chain, c) = choice_constraints(Side::Below);
        for t in enumerate_foldings(&chain, &c, 1 << 22).unwrap() {
            let pts = Polyline::embed(&SegmentDecomposition::open(CHOICE_SEGMENTS.to_vec()).unwrap(), &t, c.pose).unwrap();
            let pl = Polyline::open(pts).unwrap();
            assert_eq!(pl.dir(4), Dir::S);
            assert_eq!(pl.dir(6), Dir::S);
        }
    }

    fn small_limits() -> HookLimits {
        HookLimits { ell_min: 3, margin: 2, min_horizontal: 4 }
    }

    #[test]
    fn hook_certificate_unique_in_rectangle() {
        let spec = HookSpec { direction: Side::Below, first: 8, middle: 3, horizontal: 5, role: HookRole::Tab };
        let frag = build_hook(&spec, &small_limits()).unwrap();
        assert_eq!(frag.intended[0].path.bounding_box(), Some(Box2::new(Point::new(0, -11), Point::new(6, 0))));
        let cert = certify_hook(&spec, &small_limits(), 1 << 20).unwrap();
        assert_eq!(cert.found, vec![frag.turns(0)]);
    }

    #[test]
    fn hook_limits_are_enforced() {
        let lim = HookLimits::production(1, 100);
        let ok = HookSpec { direction: Side::Below, first: 102, middle: 50, horizontal: 51, role: HookRole::Stabilizing };
        assert!(build_hook(&ok, &lim).is_ok());
        let short = HookSpec { middle: 49, ..ok };
        assert!(build_hook(&short, &lim).unwrap_err().to_string().contains("l_min"));
        let shallow = HookSpec { first: 101, ..ok };
        assert!(build_hook(&shallow, &lim).unwrap_err().to_string().contains("exceed"));
        let narrow = HookSpec { horizontal: 50, ..ok };
        assert!(build_hook(&narrow, &lim).unwrap_err().to_string().contains("half"));
    }

    #[test]
    fn ell_min_values() {
        assert_eq!(ell_min(1), 50);
        assert_eq!(ell_min(3), 69);
    }

    fn conns(v: &[(Side, usize)]) -> Vec<Connection> {
        v.iter().map(|&(side, shift)| Connection { side, shift }).collect()
    }

    #[test]
    fn clause_three_below_has_seven_hooks() {
        let c = conns(&[(Side::Below, 0), (Side::Below, 1), (Side::Below, 2)]);
        let lim = small_limits();
        let hooks = default_clause_hooks(&c, &lim);
        let f = build_clause(&c, &hooks, &lim).unwrap();
        assert_eq!(hooks.bottom.len() + hooks.top.len(), 7);
        assert_eq!(f.bottom.intended.len(), 8);
        assert_eq!(f.top.intended.len(), 1);
        let ch = &f.choice.intended[0].path;
        assert_eq!(ch.points.last().unwrap().x - ch.points[0].x, 19);
    }

    #[test]
    fn clause_split_one_above_two_below() {
        let c = conns(&[(Side::Below, 0), (Side::Below, 1), (Side::Above, 2)]);
        let lim = small_limits();
        let f = build_clause(&c, &default_clause_hooks(&c, &lim), &lim).unwrap();
        assert_eq!(f.bottom.params["tab_hooks"], 2);
        assert_eq!(f.top.params["tab_hooks"], 1);
    }

    #[test]
    fn clause_rejects_duplicate_shift() {
        let c = conns(&[(Side::Below, 0), (Side::Above, 0)]);
        let lim = small_limits();
        assert!(build_clause(&c, &default_clause_hooks(&c, &lim), &lim).is_err());
    }

    #[test]
    fn tab_hook_start_heights() {
        let spec = HookSpec { direction: Side::Below, first: 8, middle: 3, horizontal: 5, role: HookRole::Tab };
        let stab = HookSpec { role: HookRole::Stabilizing, ..spec };
        for (ext, y) in [(false, -7), (true, -9)] {
            let slots = [Some((spec, ext)), None, None];
            let pl = sheath_path((&stab, &stab), &slots);
            let start = Point::new(SLOT_X[0] + 1, y);
            assert!(pl.points.contains(&start), "{ext}");
        }
    }

    #[test]
    fn sheath_tabs_line_up_with_choice_tabs() {
        for (side, shift, pl) in choice_paths() {
            let tab = choice_tab(&pl);
            assert_eq!(tab.x + CHOICE_X, SLOT_X[shift] + 1, "{side:?}");
            assert_eq!(tab.y, side.sign() * CHOICE_DEPTH);
        }
    }

    fn lit(positive: bool, side: Side) -> Occurrence {
        Occurrence::Literal { positive, side }
    }

    #[test]
    fn variable_height_pattern_example() {
        use Side::*;
        let occ = [lit(true, Below), lit(true, Above), lit(false, Above), lit(false, Below), lit(true, Above), lit(false, Above)];
        let pairs: Vec<(i64, i64)> = occurrence_heights(&occ).iter().map(|&h| (h, h - 4)).collect();
        assert_eq!(pairs, vec![(3, -1), (1, -3), (3, -1), (1, -3), (1, -3), (3, -1)]);
    }

    #[test]
    fn variable_matching_heights_need_no_transition() {
        let occ = [lit(true, Side::Above), lit(true, Side::Above)];
        let pl = variable_path(&occ, true);
        // the two occurrences form one horizontal of length 6
        assert!(pl.lengths().contains(&6));
        let frag = build_variable(&occ).unwrap();
        assert_eq!(frag.segments.lengths.iter().filter(|&&l| l == 2).count() > 0, true);
    }

    #[test]
    fn variable_dimensions() {
        let occ = [lit(false, Side::Above), lit(true, Side::Above), Occurrence::Null];
        let pl = variable_path(&occ, true);
        let lens = pl.lengths();
        assert_eq!(&lens[..7], &[2, 3, 2, 6, 2, 4, 3]);
        assert!(lens.contains(&(3 * 3 + 4))); // baseline
        let bb = pl.bounding_box().unwrap();
        assert_eq!((bb.min.y, bb.max.y), (-3, 3));
        assert_eq!(*pl.points.last().unwrap(), Point::new(variable_width(3), 0));
    }

    #[test]
    fn variable_certificate_two_foldings() {
        let occ = [lit(true, Side::Above), lit(true, Side::Below)];
        let cert = certify_variable(&occ, 1 << 24).unwrap();
        assert_eq!(cert.found.len(), 2);
        assert!(cert.exact());
    }

    #[test]
    fn variable_rejects_empty() {
        assert_eq!(build_variable(&[]), Err(GadgetError::NoOccurrences));
    }

    fn toy_inner(fr: &FrameGadget) -> Polyline {
        // a small staircase from p up, across and down to q, inside the box
        let mut b = PathBuilder::new(fr.p);
        b.go(Dir::N, 10).go(Dir::E, 5).go(Dir::S, 10);
        b.open()
    }

    #[test]
    fn closed_frame_residues() {
        let inner = Box2::new(Point::new(0, 0), Point::new(50, 50));
        let fr = build_frame(FrameVariant::Closed, inner, 100).unwrap();
        let whole = fr.assemble(&toy_inner(&fr));
        assert!(whole.is_noncrossing());
        let (h, v) = residues(&whole);
        assert_eq!(h, vec![1, 1, 2]);
        assert_eq!(v, vec![1, 1, 2]);
    }

    #[test]
    fn hp_frame_tails() {
        let inner = Box2::new(Point::new(0, 0), Point::new(50, 50));
        let fr = build_frame(FrameVariant::Hp, inner, 100).unwrap();
        let whole = fr.assemble(&toy_inner(&fr));
        assert!(whole.is_noncrossing());
        let lens = whole.lengths();
        assert!(lens[0] > 1000 && *lens.last().unwrap() > 1000);
        let a = whole.points[0];
        let b = *whole.points.last().unwrap();
        assert_eq!(a.l1(b), 1);
        let cfg = whole.expand();
        let colors = fr.colors(cfg.points.len()).unwrap();
        assert_eq!(colors.iter().filter(|&&c| c == Color::H).count(), 2);
    }

    #[test]
    fn square_frame_fits() {
        let inner = Box2::new(Point::new(0, 0), Point::new(50, 50));
        let fr = build_frame(FrameVariant::Square, inner, 100).unwrap();
        assert_eq!(fr.size, 1001);
        let whole = fr.assemble(&toy_inner(&fr));
        assert!(whole.is_noncrossing());
        let sq = fr.square.unwrap();
        assert!(whole.points.iter().all(|&p| sq.contains(p)));
        assert!(whole.total_length() <= 4800, "{}", whole.total_length());
        let lens = whole.lengths();
        assert_eq!(&lens[..2], &[1001, 1001]);
        assert_eq!(*lens.last().unwrap(), 1000);
    }

    #[test]
    fn frame_rejects_unaligned_box() {
        let inner = Box2::new(Point::new(0, 0), Point::new(52, 50));
        assert!(build_frame(FrameVariant::Closed, inner, 100).is_err());
    }

    #[test]
    fn gallery_covers_every_kind() {
        let kinds: BTreeSet<GadgetKind> = gallery().iter().map(|(_, f)| f.kind).collect();
        assert_eq!(kinds.len(), 8);
    }

    #[test]
    fn every_intended_folding_is_noncrossing_in_isolation() {
        let lim = small_limits();
        let mut frags = vec![build_choice()];
        for tabs in [vec![], vec![2], vec![2, 5], vec![3, 7]] {
            frags.push(build_insulation(&InsulationSpec { h: 2, width: 11, tabs }).unwrap());
        }
        let c = conns(&[(Side::Below, 0), (Side::Above, 1), (Side::Below, 2)]);
        let f = build_clause(&c, &default_clause_hooks(&c, &lim), &lim).unwrap();
        frags.extend([f.choice, f.top, f.bottom]);
        frags.push(build_variable(&[lit(true, Side::Above), Occurrence::Null, lit(false, Side::Below)]).unwrap());
        for frag in &frags {
            for (i, f) in frag.intended.iter().enumerate() {
                let chain = frag.chain();
                let cfg = embed(&chain, &frag.turns(i), frag.pose(i)).unwrap();
                assert!(is_noncrossing(&cfg), "{:?} {}", frag.kind, f.label);
                for (name, p) in &f.anchors {
                    if name == "start" || name == "end" || name.starts_with("hook") || name.starts_with("occ") {
                        assert!(cfg.points.contains(p), "{:?} {} anchor {name}", frag.kind, f.label);
                    }
                }
            }
        }
    }
}

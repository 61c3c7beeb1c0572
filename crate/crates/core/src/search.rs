//! Depth-first search over turn sequences.
//!
//! The engine walks the chain one straight run at a time and branches only
//! at 90° vertices, so a long segment costs one node. Problem-specific
//! bookkeeping (contact counts, bounding boxes, objective bounds) plugs in
//! through [`Hooks`].

use std::sync::atomic::{AtomicU64, Ordering};

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::fold::{Box2, Dir, Point, Pose};
use crate::model::{FixedAngleChain, Turn, TurnSequence};

/// Geometric constraints shared by every search.
#[derive(Debug, Clone, Default)]
pub struct Constraints {
    pub pose: Pose,
    pub bounds: Option<Box2>,
    /// Vertex index and the point it must occupy.
    pub pinned: Vec<(usize, Point)>,
    /// Lattice points no vertex may occupy.
    pub obstacles: Vec<Point>,
}

impl Constraints {
    pub fn with_pose(pose: Pose) -> Self {
        Constraints { pose, ..Default::default() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("node budget of {budget} exceeded after {found} results")]
    BudgetExceeded { budget: u64, found: usize },
    #[error(transparent)]
    Chain(#[from] crate::model::ChainError),
    #[error("pinned vertex {0} is out of range")]
    PinOutOfRange(usize),
}

/// What the walk looks like at a decision point.
pub struct Ctx<'a> {
    /// Placed vertex points, `path[i]` for vertex `i`.
    pub path: &'a [Point],
    /// Heading of the edge that ended at the current corner.
    pub heading: Dir,
    /// Number of edges not yet walked.
    pub remaining_edges: usize,
    /// Corner turns decided so far (geometric corners only).
    pub turns: &'a [Turn],
}

pub enum Flow {
    Continue,
    Stop,
}

pub trait Hooks {
    fn on_place(&mut self, _v: usize, _p: Point, _occupied: &FxHashMap<Point, u32>) {}
    fn on_unplace(&mut self, _v: usize, _p: Point) {}
    /// Return `true` to cut the subtree below the current corner.
    fn prune(&self, _ctx: &Ctx<'_>) -> bool {
        false
    }
    fn on_complete(&mut self, ctx: &Ctx<'_>, turns: TurnSequence) -> Flow;
}

/// Pruning switches. Turning any of them off never changes answers, only
/// the amount of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pruning {
    /// Closed chains: distance, parity and per-axis subset-sum reachability
    /// of the start point.
    pub closure: bool,
    /// Pinned vertices: distance and parity reachability.
    pub pins: bool,
    /// Problem-specific bounds supplied by the hooks.
    pub hooks: bool,
}

impl Default for Pruning {
    fn default() -> Self {
        Pruning { closure: true, pins: true, hooks: true }
    }
}

/// Shared node budget.
pub struct Budget {
    limit: u64,
    used: AtomicU64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit: limit.max(1), used: AtomicU64::new(0) }
    }

    fn tick(&self) -> bool {
        self.used.fetch_add(1, Ordering::Relaxed) < self.limit
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed).min(self.limit)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }
}

pub enum Outcome {
    /// Every branch was explored (or the hooks stopped the walk).
    Done,
    BudgetExceeded,
}

/// Per-chain search data that does not change between runs.
pub struct Walk<'c> {
    chain: &'c FixedAngleChain,
    edges: usize,
    corner: Vec<bool>,
    pins: Vec<Option<Point>>,
    next_pin: Vec<Option<usize>>,
    obstacles: rustc_hash::FxHashSet<Point>,
    pose: Pose,
    bounds: Option<Box2>,
    pruning: Pruning,
    closure_sets: Option<ClosureSets>,
}

impl<'c> Walk<'c> {
    pub fn new(
        chain: &'c FixedAngleChain,
        constraints: &Constraints,
        pruning: Pruning,
    ) -> Result<Self, SearchError> {
        let edges = chain.edge_count();
        let corner: Vec<bool> = (0..=edges).map(|v| v > 0 && v < edges && chain.is_corner(v)).collect();
        let mut pins = vec![None; edges + 1];
        for &(v, p) in &constraints.pinned {
            if v >= chain.vertex_count() {
                return Err(SearchError::PinOutOfRange(v));
            }
            pins[v] = Some(p);
        }
        pins[0] = match pins[0] {
            Some(p) if p != constraints.pose.origin => {
                // Contradictory pin: keep it, the first placement fails.
                Some(p)
            }
            _ => Some(constraints.pose.origin),
        };
        if chain.is_closed() {
            pins[edges] = Some(constraints.pose.origin);
        }
        let mut next_pin = vec![None; edges + 1];
        let mut upcoming = None;
        for v in (0..=edges).rev() {
            if pins[v].is_some() {
                upcoming = Some(v);
            }
            next_pin[v] = upcoming;
        }
        let closure_sets = if chain.is_closed() && pruning.closure {
            ClosureSets::build(&corner)
        } else {
            None
        };
        Ok(Walk {
            chain,
            edges,
            corner,
            pins,
            next_pin,
            obstacles: constraints.obstacles.iter().copied().collect(),
            pose: constraints.pose,
            bounds: constraints.bounds,
            pruning,
            closure_sets,
        })
    }

    pub fn chain(&self) -> &FixedAngleChain {
        self.chain
    }

    /// Number of corners the walk branches on.
    pub fn branching_corners(&self) -> usize {
        self.corner.iter().filter(|c| **c).count()
    }

    /// Runs the depth-first search to completion, the budget, or a stop.
    pub fn run<H: Hooks>(&self, hooks: &mut H, budget: &Budget) -> Outcome {
        self.run_with_prefix(&[], hooks, budget)
    }

    /// Like [`Walk::run`] with the first `prefix.len()` branching turns forced.
    pub fn run_with_prefix<H: Hooks>(&self, prefix: &[Turn], hooks: &mut H, budget: &Budget) -> Outcome {
        let mut st = State {
            path: Vec::with_capacity(self.edges + 1),
            occupied: FxHashMap::default(),
            turns: Vec::new(),
        };
        struct Frame {
            v: usize,
            din: Dir,
            next: u8,
        }
        let mut stack: Vec<Frame> = Vec::new();
        if !budget.tick() {
            return Outcome::BudgetExceeded;
        }
        let mut dir = self.pose.heading;
        let mut res = if self.place(&mut st, 0, self.pose.origin, hooks) {
            self.run_segment(&mut st, dir, hooks)
        } else {
            Step::Fail
        };
        loop {
            match res {
                Step::Corner => {
                    let v = st.path.len() - 1;
                    let ctx = Ctx {
                        path: &st.path,
                        heading: dir,
                        remaining_edges: self.edges - v,
                        turns: &st.turns,
                    };
                    let cut = (self.pruning.closure && !self.closure_reachable(&ctx))
                        || (self.pruning.hooks && hooks.prune(&ctx));
                    if !cut {
                        stack.push(Frame { v, din: dir, next: 0 });
                    }
                }
                Step::Complete => {
                    if self.closes(&st.path, dir) {
                        let ctx = Ctx { path: &st.path, heading: dir, remaining_edges: 0, turns: &st.turns };
                        let turns = self.full_turns(&st.turns, dir);
                        if let Flow::Stop = hooks.on_complete(&ctx, turns) {
                            self.unwind(&mut st, 0, hooks);
                            return Outcome::Done;
                        }
                    }
                }
                Step::Fail => {}
            }
            // Next branch.
            loop {
                let depth = stack.len();
                let Some(top) = stack.last_mut() else {
                    self.unwind(&mut st, 0, hooks);
                    return Outcome::Done;
                };
                let forced = prefix.get(depth - 1).copied();
                let choice = match (top.next, forced) {
                    (0, Some(t)) => {
                        top.next = 2;
                        Some(t)
                    }
                    (0, None) => {
                        top.next = 1;
                        Some(Turn::Left)
                    }
                    (1, None) => {
                        top.next = 2;
                        Some(Turn::Right)
                    }
                    _ => None,
                };
                let (v, din) = (top.v, top.din);
                match choice {
                    None => {
                        stack.pop();
                        self.unwind(&mut st, v + 1, hooks);
                        st.turns.truncate(depth - 1);
                    }
                    Some(t) => {
                        self.unwind(&mut st, v + 1, hooks);
                        st.turns.truncate(depth - 1);
                        st.turns.push(t);
                        if !budget.tick() {
                            self.unwind(&mut st, 0, hooks);
                            return Outcome::BudgetExceeded;
                        }
                        dir = din.turn(t);
                        res = self.run_segment(&mut st, dir, hooks);
                        break;
                    }
                }
            }
        }
    }

    fn unwind<H: Hooks>(&self, st: &mut State, keep: usize, hooks: &mut H) {
        while st.path.len() > keep {
            let v = st.path.len() - 1;
            let p = st.path.pop().expect("nonempty");
            if !(self.chain.is_closed() && v == self.edges) {
                st.occupied.remove(&p);
            }
            hooks.on_unplace(v, p);
        }
    }

    /// Places vertex `v` at `p` if every local constraint allows it.
    fn place<H: Hooks>(&self, st: &mut State, v: usize, p: Point, hooks: &mut H) -> bool {
        if let Some(pin) = self.pins[v] {
            if pin != p {
                return false;
            }
        }
        let closing = self.chain.is_closed() && v == self.edges;
        if !closing {
            if st.occupied.contains_key(&p) || self.obstacles.contains(&p) {
                return false;
            }
            if let Some(b) = &self.bounds {
                if !b.contains(p) {
                    return false;
                }
            }
        }
        if self.pruning.pins {
            if let Some(w) = self.next_pin[v] {
                let target = self.pins[w].expect("pin");
                let d = p.l1(target);
                let budget = (w - v) as i64;
                if d > budget || (budget - d) % 2 != 0 {
                    return false;
                }
            }
        }
        st.path.push(p);
        if !closing {
            st.occupied.insert(p, v as u32);
        }
        hooks.on_place(v, p, &st.occupied);
        true
    }

    /// Walks straight from the last placed vertex until a corner or the end.
    fn run_segment<H: Hooks>(&self, st: &mut State, dir: Dir, hooks: &mut H) -> Step {
        loop {
            let v = st.path.len();
            let p = st.path[v - 1].step(dir, 1);
            if !self.place(st, v, p, hooks) {
                return Step::Fail;
            }
            if v == self.edges {
                return Step::Complete;
            }
            if self.corner[v] {
                return Step::Corner;
            }
        }
    }

    fn closes(&self, path: &[Point], last_dir: Dir) -> bool {
        if !self.chain.is_closed() {
            return true;
        }
        if path[self.edges] != path[0] {
            return false;
        }
        if self.chain.is_corner(0) {
            last_dir.turn_to(self.pose.heading).is_some()
        } else {
            last_dir == self.pose.heading
        }
    }

    fn full_turns(&self, turns: &[Turn], last_dir: Dir) -> TurnSequence {
        let mut out = Vec::with_capacity(turns.len() + 1);
        if self.chain.is_closed() && self.chain.is_corner(0) {
            out.push(last_dir.turn_to(self.pose.heading).expect("closure checked"));
        }
        out.extend_from_slice(turns);
        TurnSequence(out)
    }

    fn closure_reachable(&self, ctx: &Ctx<'_>) -> bool {
        if !self.chain.is_closed() {
            return true;
        }
        let cur = *ctx.path.last().expect("placed");
        let start = ctx.path[0];
        let d = cur.l1(start);
        let rem = ctx.remaining_edges as i64;
        if d > rem || (rem - d) % 2 != 0 {
            return false;
        }
        match &self.closure_sets {
            Some(sets) => {
                let corner_idx = ctx.turns.len();
                // The next run is perpendicular to the current heading.
                let next_horizontal = !ctx.heading.is_horizontal();
                let (need_h, need_v) = (start.x - cur.x, start.y - cur.y);
                sets.reachable(corner_idx + 1, next_horizontal, need_h, need_v)
            }
            None => true,
        }
    }
}

struct State {
    path: Vec<Point>,
    occupied: FxHashMap<Point, u32>,
    turns: Vec<Turn>,
}

enum Step {
    Corner,
    Complete,
    Fail,
}

/// Signed-sum reachability of the remaining runs of a closed chain, split
/// by axis. Runs alternate axes, so run `j` shares its axis with run 0
/// exactly when `j` is even.
struct ClosureSets {
    total: i64,
    /// `even[j]` / `odd[j]`: reachable sums of runs `k >= j` of that parity.
    even: Vec<Vec<u64>>,
    odd: Vec<Vec<u64>>,
}

impl ClosureSets {
    const MAX_BITS: usize = 1 << 27;

    fn build(corner: &[bool]) -> Option<Self> {
        let edges = corner.len() - 1;
        let mut runs = Vec::new();
        let mut len = 0i64;
        for v in 1..=edges {
            len += 1;
            if v == edges || corner[v] {
                runs.push(len);
                len = 0;
            }
        }
        let total: i64 = runs.iter().sum();
        let width = (2 * total + 1) as usize;
        let words = width.div_ceil(64);
        if (runs.len() + 1) * words * 64 * 2 > Self::MAX_BITS {
            return None;
        }
        let mut even = vec![vec![0u64; words]; runs.len() + 1];
        let mut odd = vec![vec![0u64; words]; runs.len() + 1];
        let zero = total as usize;
        even[runs.len()][zero / 64] |= 1 << (zero % 64);
        odd[runs.len()][zero / 64] |= 1 << (zero % 64);
        for j in (0..runs.len()).rev() {
            let (same, other) = if j % 2 == 0 { (&mut even, &mut odd) } else { (&mut odd, &mut even) };
            other[j] = other[j + 1].clone();
            let src = same[j + 1].clone();
            let shifted_up = shift(&src, runs[j] as usize, true, width);
            let shifted_down = shift(&src, runs[j] as usize, false, width);
            same[j] = shifted_up.iter().zip(&shifted_down).map(|(a, b)| a | b).collect();
        }
        Some(ClosureSets { total, even, odd })
    }

    fn reachable(&self, from_run: usize, next_horizontal: bool, need_h: i64, need_v: i64) -> bool {
        if from_run >= self.even.len() {
            return need_h == 0 && need_v == 0;
        }
        // Run `from_run` is horizontal iff `next_horizontal`.
        let (h_sets, v_sets) = if (from_run % 2 == 0) == next_horizontal {
            (&self.even, &self.odd)
        } else {
            (&self.odd, &self.even)
        };
        self.has(&h_sets[from_run], need_h) && self.has(&v_sets[from_run], need_v)
    }

    fn has(&self, bits: &[u64], value: i64) -> bool {
        if value.abs() > self.total {
            return false;
        }
        let i = (value + self.total) as usize;
        bits[i / 64] >> (i % 64) & 1 == 1
    }
}

fn shift(bits: &[u64], by: usize, up: bool, width: usize) -> Vec<u64> {
    let words = bits.len();
    let mut out = vec![0u64; words];
    let (ws, bs) = (by / 64, by % 64);
    for i in 0..words {
        if up {
            // out[k] gets bit from k - by.
            let k = i + ws;
            if k < words {
                out[k] |= bits[i] << bs;
                if bs > 0 && k + 1 < words {
                    out[k + 1] |= bits[i] >> (64 - bs);
                }
            }
        } else if i >= ws {
            let k = i - ws;
            out[k] |= bits[i] >> bs;
            if bs > 0 && k >= 1 {
                out[k - 1] |= bits[i] << (64 - bs);
            }
        }
    }
    let extra = words * 64 - width;
    if extra > 0 {
        out[words - 1] &= u64::MAX >> extra;
    }
    out
}

/// Collects every turn sequence whose embedding is noncrossing and meets
/// the constraints (closed chains must also close).
pub struct Collect {
    pub found: Vec<TurnSequence>,
}

impl Hooks for Collect {
    fn on_complete(&mut self, _ctx: &Ctx<'_>, turns: TurnSequence) -> Flow {
        self.found.push(turns);
        Flow::Continue
    }
}

/// Exhaustive enumeration of constrained noncrossing foldings.
///
/// The pose is fixed by the constraints, so the result is duplicate-free.
pub fn enumerate_foldings(
    chain: &FixedAngleChain,
    constraints: &Constraints,
    budget: u64,
) -> Result<Vec<TurnSequence>, SearchError> {
    let walk = Walk::new(chain, constraints, Pruning::default())?;
    let mut sink = Collect { found: Vec::new() };
    let b = Budget::new(budget);
    match walk.run(&mut sink, &b) {
        Outcome::Done => Ok(sink.found),
        Outcome::BudgetExceeded => Err(SearchError::BudgetExceeded { budget, found: sink.found.len() }),
    }
}

/// Streaming variant of [`enumerate_foldings`]; the callback returns
/// `false` to stop early.
pub fn for_each_folding<F: FnMut(&TurnSequence, &[Point]) -> bool>(
    chain: &FixedAngleChain,
    constraints: &Constraints,
    budget: u64,
    f: F,
) -> Result<u64, SearchError> {
    struct Each<F>(F, usize);
    impl<F: FnMut(&TurnSequence, &[Point]) -> bool> Hooks for Each<F> {
        fn on_complete(&mut self, ctx: &Ctx<'_>, turns: TurnSequence) -> Flow {
            self.1 += 1;
            if (self.0)(&turns, ctx.path) {
                Flow::Continue
            } else {
                Flow::Stop
            }
        }
    }
    let walk = Walk::new(chain, constraints, Pruning::default())?;
    let b = Budget::new(budget);
    let mut each = Each(f, 0);
    match walk.run(&mut each, &b) {
        Outcome::Done => Ok(b.used()),
        Outcome::BudgetExceeded => Err(SearchError::BudgetExceeded { budget, found: each.1 }),
    }
}

//! Exact solvers: flattening closed chains, HP-optimal folding and packing
//! open chains into squares.
//!
//! All three run the same per-segment depth-first search from
//! [`crate::search`]. Parallel runs split the tree on the first few turns
//! and merge results in depth-first order, so the reported witness is the
//! one a sequential run would find.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::fold::{embed, zigzag_turns, Box2, Dir, Point, Pose};
use crate::model::{ChainError, Color, FixedAngleChain, Topology, Turn, TurnSequence};
use crate::search::{Budget, Constraints, Ctx, Flow, Hooks, Outcome, Pruning, SearchError, Walk};

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub budget: u64,
    /// Parallel runs report the witness a sequential run would find. When
    /// off, parallel HP search also prunes ties (faster, witness may vary).
    pub deterministic: bool,
    pub bounds: Option<Box2>,
    pub parallel: Option<usize>,
    pub pruning: Pruning,
    /// Quotient mirror images by fixing the first turn to `Left`.
    pub symmetry: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: 50_000_000,
            deterministic: true,
            bounds: None,
            parallel: None,
            pruning: Pruning::default(),
            symmetry: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Found,
    Exhausted,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    pub witness: Option<TurnSequence>,
    /// Pose the witness is meant to be embedded with.
    pub pose: Option<Pose>,
    pub nodes: u64,
    /// Best objective value (HP contacts) for optimisation problems.
    pub objective: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("expected an {0} chain")]
    Topology(Topology),
    #[error("chain has no H/P colors")]
    MissingColors,
    #[error("square side must be positive, got {0}")]
    BadSide(i64),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Turn prefixes for the parallel split, in depth-first order.
fn prefixes(corners: usize, opts: &SearchOptions, symmetric: bool) -> Vec<Vec<Turn>> {
    let width = opts.parallel.unwrap_or(1).max(1);
    if width == 1 {
        return vec![if symmetric { vec![Turn::Left] } else { vec![] }];
    }
    let mut depth = 0;
    while (1usize << depth) < width * 4 {
        depth += 1;
    }
    let free = if symmetric { corners.saturating_sub(1) } else { corners };
    let depth = depth.min(free);
    (0..1u64 << depth)
        .map(|mask| {
            let mut p = if symmetric { vec![Turn::Left] } else { vec![] };
            p.extend((0..depth).map(|i| {
                if mask >> (depth - 1 - i) & 1 == 0 {
                    Turn::Left
                } else {
                    Turn::Right
                }
            }));
            p
        })
        .collect()
}

fn run_split<H, F>(
    walk: &Walk<'_>,
    prefixes: Vec<Vec<Turn>>,
    budget: &Budget,
    opts: &SearchOptions,
    make: F,
) -> Vec<(H, bool)>
where
    H: Hooks + Send,
    F: Fn() -> H + Sync,
{
    let go = |p: Vec<Turn>| {
        let mut h = make();
        let exceeded = matches!(walk.run_with_prefix(&p, &mut h, budget), Outcome::BudgetExceeded);
        (h, exceeded)
    };
    if opts.parallel.unwrap_or(1) > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.parallel.unwrap_or(1))
            .build()
            .expect("thread pool");
        pool.install(|| prefixes.into_par_iter().map(go).collect())
    } else {
        prefixes.into_iter().map(go).collect()
    }
}

/// Stops at the first complete folding.
struct FirstHit {
    witness: Option<TurnSequence>,
    stop: bool,
}

impl Hooks for FirstHit {
    fn on_complete(&mut self, _ctx: &Ctx<'_>, turns: TurnSequence) -> Flow {
        self.witness = Some(turns);
        if self.stop {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

/// Decides whether a closed chain has a noncrossing planar configuration.
pub fn solve_flatten(chain: &FixedAngleChain, opts: &SearchOptions) -> Result<SolveResult, SolveError> {
    if !chain.is_closed() {
        return Err(SolveError::Topology(Topology::Closed));
    }
    if chain.edge_count() % 2 == 1 || chain.corner_count() == 0 {
        return Ok(SolveResult { status: Status::Exhausted, witness: None, pose: None, nodes: 0, objective: None });
    }
    // Anchor the walk at a corner so the mirror quotient acts on a real turn.
    let pose = Pose::default();
    let constraints = Constraints { pose, bounds: opts.bounds, ..Default::default() };
    let walk = Walk::new(chain, &constraints, opts.pruning)?;
    let symmetric = opts.symmetry && opts.bounds.is_none() && walk.branching_corners() > 0;
    let budget = Budget::new(opts.budget);
    let results = run_split(&walk, prefixes(walk.branching_corners(), opts, symmetric), &budget, opts, || {
        FirstHit { witness: None, stop: true }
    });
    let witness = results.iter().find_map(|(h, _)| h.witness.clone());
    let exceeded = results.iter().any(|(_, e)| *e);
    let status = match (&witness, exceeded) {
        (Some(_), _) => Status::Found,
        (None, true) => Status::BudgetExceeded,
        (None, false) => Status::Exhausted,
    };
    Ok(SolveResult {
        status,
        pose: witness.as_ref().map(|_| pose),
        witness,
        nodes: budget.used(),
        objective: None,
    })
}

/// Bounding-box bookkeeping for packing.
struct PackHooks {
    side: i64,
    boxes: Vec<Box2>,
    hit: Option<(TurnSequence, Box2)>,
}

impl PackHooks {
    fn fits(&self) -> bool {
        self.boxes.last().is_none_or(|b| b.width() <= self.side && b.height() <= self.side)
    }
}

impl Hooks for PackHooks {
    fn on_place(&mut self, _v: usize, p: Point, _occ: &FxHashMap<Point, u32>) {
        let b = match self.boxes.last() {
            None => Box2 { min: p, max: p },
            Some(b) => Box2 {
                min: Point::new(b.min.x.min(p.x), b.min.y.min(p.y)),
                max: Point::new(b.max.x.max(p.x), b.max.y.max(p.y)),
            },
        };
        self.boxes.push(b);
    }

    fn on_unplace(&mut self, _v: usize, _p: Point) {
        self.boxes.pop();
    }

    fn prune(&self, _ctx: &Ctx<'_>) -> bool {
        !self.fits()
    }

    fn on_complete(&mut self, _ctx: &Ctx<'_>, turns: TurnSequence) -> Flow {
        if self.fits() {
            self.hit = Some((turns, *self.boxes.last().expect("placed")));
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

/// Decides whether an open chain packs into an `s x s` square (side length
/// `s`, so `s + 1` lattice points per side).
///
/// Translation is quotiented out by tracking the bounding box, rotation by
/// fixing the first heading, and reflection by fixing the first turn.
pub fn solve_pack(chain: &FixedAngleChain, side: i64, opts: &SearchOptions) -> Result<SolveResult, SolveError> {
    if chain.is_closed() {
        return Err(SolveError::Topology(Topology::Open));
    }
    if side <= 0 {
        return Err(SolveError::BadSide(side));
    }
    if chain.edge_count() as i64 <= side {
        let witness = zigzag_turns(chain)?;
        return Ok(SolveResult {
            status: Status::Found,
            witness: Some(witness),
            pose: Some(Pose::default()),
            nodes: 0,
            objective: None,
        });
    }
    let walk = Walk::new(chain, &Constraints::default(), opts.pruning)?;
    let symmetric = opts.symmetry && walk.branching_corners() > 0;
    let budget = Budget::new(opts.budget);
    let results = run_split(&walk, prefixes(walk.branching_corners(), opts, symmetric), &budget, opts, || PackHooks {
        side,
        boxes: Vec::new(),
        hit: None,
    });
    let hit = results.iter().find_map(|(h, _)| h.hit.clone());
    let exceeded = results.iter().any(|(_, e)| *e);
    let (status, witness, pose) = match (hit, exceeded) {
        (Some((t, b)), _) => {
            let origin = Point::new(-b.min.x, -b.min.y);
            (Status::Found, Some(t), Some(Pose::new(origin, Dir::E)))
        }
        (None, true) => (Status::BudgetExceeded, None, None),
        (None, false) => (Status::Exhausted, None, None),
    };
    Ok(SolveResult { status, witness, pose, nodes: budget.used(), objective: None })
}

/// Branch-and-bound state for HP folding.
struct HpHooks<'a> {
    h: &'a [bool],
    /// `pairs_before[k]`: contact-capable H pairs among vertices `< k`.
    pairs_before: &'a [u64],
    slots_from: &'a [u64],
    total_pairs: u64,
    deltas: Vec<u64>,
    contacts: u64,
    best: Option<(u64, TurnSequence)>,
    shared: &'a AtomicU64,
    /// Prune on ties too (sequential runs); parallel deterministic runs
    /// keep ties so the earliest witness survives the merge.
    prune_ties: bool,
}

impl HpHooks<'_> {
    fn bound(&self, placed: usize) -> u64 {
        let by_slots = self.slots_from[placed];
        let by_pairs = self.total_pairs - self.pairs_before[placed];
        self.contacts + by_slots.min(by_pairs)
    }

    fn incumbent(&self) -> Option<u64> {
        let local = self.best.as_ref().map(|b| b.0);
        let global = match self.shared.load(Ordering::Relaxed) {
            0 => None,
            g => Some(g - 1),
        };
        local.max(global)
    }
}

impl Hooks for HpHooks<'_> {
    fn on_place(&mut self, v: usize, p: Point, occupied: &FxHashMap<Point, u32>) {
        let mut d = 0;
        if self.h[v] {
            for q in p.neighbors() {
                if let Some(&u) = occupied.get(&q) {
                    let u = u as usize;
                    if u + 1 < v && self.h[u] {
                        d += 1;
                    }
                }
            }
        }
        self.deltas.push(d);
        self.contacts += d;
    }

    fn on_unplace(&mut self, _v: usize, _p: Point) {
        self.contacts -= self.deltas.pop().expect("balanced");
    }

    fn prune(&self, ctx: &Ctx<'_>) -> bool {
        let Some(best) = self.incumbent() else { return false };
        let bound = self.bound(ctx.path.len());
        if self.prune_ties {
            bound <= best
        } else {
            bound < best
        }
    }

    fn on_complete(&mut self, _ctx: &Ctx<'_>, turns: TurnSequence) -> Flow {
        let better = self.best.as_ref().is_none_or(|b| self.contacts > b.0);
        if better {
            self.best = Some((self.contacts, turns));
            self.shared.fetch_max(self.contacts + 1, Ordering::Relaxed);
        }
        Flow::Continue
    }
}

/// Vertices `u < v` can touch on the square lattice only if `v - u` is odd
/// and at least 3.
fn hp_tables(h: &[bool], open: bool) -> (Vec<u64>, Vec<u64>, u64) {
    let n = h.len();
    let mut pairs_before = vec![0u64; n + 1];
    let mut even_h = 0u64;
    let mut odd_h = 0u64;
    let mut recent: Vec<usize> = Vec::new();
    for v in 0..n {
        let mut add = 0;
        if h[v] {
            let opposite = if v % 2 == 0 { odd_h } else { even_h };
            // Remove the opposite-parity H at distance exactly 1.
            let near = recent.iter().filter(|&&u| v - u == 1).count() as u64;
            add = opposite - near;
        }
        pairs_before[v + 1] = pairs_before[v] + add;
        if h[v] {
            if v % 2 == 0 {
                even_h += 1;
            } else {
                odd_h += 1;
            }
            recent.push(v);
            if recent.len() > 2 {
                recent.remove(0);
            }
        }
    }
    let mut slots_from = vec![0u64; n + 1];
    for v in (0..n).rev() {
        let slots = if h[v] {
            if open && (v == 0 || v == n - 1) {
                3
            } else {
                2
            }
        } else {
            0
        };
        slots_from[v] = slots_from[v + 1] + slots;
    }
    let total = pairs_before[n];
    (pairs_before, slots_from, total)
}

/// Number of H pairs at chain distance at least 2: a ceiling for the optimum.
pub fn hp_pair_ceiling(chain: &FixedAngleChain) -> u64 {
    let Some(colors) = chain.colors() else { return 0 };
    let hs: Vec<usize> = colors.iter().enumerate().filter(|(_, c)| **c == Color::H).map(|(i, _)| i).collect();
    let mut n = 0;
    for (a, &u) in hs.iter().enumerate() {
        for &v in &hs[a + 1..] {
            if v - u >= 2 {
                n += 1;
            }
        }
    }
    n
}

/// Maximises H–H contacts over noncrossing embeddings of an open chain.
pub fn solve_hp(chain: &FixedAngleChain, opts: &SearchOptions) -> Result<SolveResult, SolveError> {
    if chain.is_closed() {
        return Err(SolveError::Topology(Topology::Open));
    }
    let colors = chain.colors().ok_or(SolveError::MissingColors)?;
    let h: Vec<bool> = colors.iter().map(|c| *c == Color::H).collect();
    let (pairs_before, slots_from, total_pairs) = hp_tables(&h, true);
    let constraints = Constraints { bounds: opts.bounds, ..Default::default() };
    let walk = Walk::new(chain, &constraints, opts.pruning)?;
    let symmetric = opts.symmetry && opts.bounds.is_none() && walk.branching_corners() > 0;
    let budget = Budget::new(opts.budget);
    let shared = AtomicU64::new(0);
    let parallel = opts.parallel.unwrap_or(1) > 1;
    let results = run_split(&walk, prefixes(walk.branching_corners(), opts, symmetric), &budget, opts, || HpHooks {
        h: &h,
        pairs_before: &pairs_before,
        slots_from: &slots_from,
        total_pairs,
        deltas: Vec::new(),
        contacts: 0,
        best: None,
        shared: &shared,
        prune_ties: !parallel || !opts.deterministic,
    });
    let exceeded = results.iter().any(|(_, e)| *e);
    let mut best: Option<(u64, TurnSequence)> = None;
    for (hk, _) in results {
        if let Some((v, t)) = hk.best {
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, t));
            }
        }
    }
    let status = match (&best, exceeded) {
        (_, true) => Status::BudgetExceeded,
        (Some(_), false) => Status::Found,
        (None, false) => Status::Exhausted,
    };
    let pose = best.as_ref().map(|_| Pose::default());
    let objective = best.as_ref().map(|b| b.0);
    Ok(SolveResult { status, witness: best.map(|b| b.1), pose, nodes: budget.used(), objective })
}

/// Embeds a solver witness with its pose.
pub fn witness_config(
    chain: &FixedAngleChain,
    result: &SolveResult,
) -> Option<crate::fold::LatticeConfiguration> {
    let w = result.witness.as_ref()?;
    embed(chain, w, result.pose.unwrap_or_default()).ok()
}

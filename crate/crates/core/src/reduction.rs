//! Compiles leveled planar 3SAT instances into chain folding instances and
//! translates between assignments and foldings.
//!
//! Artifacts are kept at the segment level: production chains are far too
//! long to list vertex by vertex, but they have few corners.

mod compile;
mod formula;
mod toy;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use toy::{enumerate_inner, inner_reference, InnerEnumeration};
pub use compile::{spiral, InsulationRow, Plan, Row, RowKind, State, TabOwner, TOY_H};
pub use formula::{
    normalize_to_adjacent_rows, random_instance, ClauseSlot, CnfFormula, GridPos, LeveledDrawing, Level, LinkedLayout, Literal, OccSlot,
    VarOrigin, VarSlot,
};

use crate::fold::{Box2, Point, Pose};
use crate::gadgets::{build_frame, ell_min, residues, FrameVariant, GadgetError};
use crate::model::{chain_from_segments, ChainError, FixedAngleChain, SegmentDecomposition, Topology, Turn, TurnSequence};
use crate::poly::{PolyError, Polyline};

pub const BLUEPRINT_VERSION: u32 = 1;

/// Constant in the size audit `L <= SIZE_CONSTANT * (n + m)^3`, where `n`
/// and `m` count variables and clauses after normalization (copies and
/// equality clauses included) and `L` is the inner chain length.
pub const SIZE_CONSTANT: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("formula: {0}")]
    Formula(String),
    #[error("drawing: {0}")]
    Drawing(String),
    #[error("layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("assignment leaves clause {0} unsatisfied")]
    Unsatisfied(usize),
    #[error("assignment has {got} values, expected {expected}")]
    AssignmentSize { expected: usize, got: usize },
    #[error("variable {0} is in neither intended folding")]
    NotIntended(usize),
    #[error("invalid folding ({0})")]
    InvalidFolding(String),
    #[error("witness does not reproduce the artifact's segments")]
    SegmentMismatch,
    #[error("blueprint version {0} is not supported")]
    Version(u32),
}

/// Where a variable gadget sits in the final turn sequence and how its
/// true folding turns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarProbe {
    pub var: usize,
    /// Inclusive range of turn indices.
    pub first_turn: usize,
    pub last_turn: usize,
    pub true_turns: TurnSequence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blueprint {
    pub version: u32,
    pub variant: FrameVariant,
    pub toy: bool,
    pub formula: CnfFormula,
    pub layout: LinkedLayout,
    pub plan: Plan,
    /// Length of the scaled inner chain, attach edge included.
    pub inner_length: u64,
    /// Square side (square), tail overhang (hp), 0 (closed).
    pub frame_size: i64,
    pub square: Option<Box2>,
    pub probes: Vec<VarProbe>,
    /// A rigid corner used to detect a mirrored embedding.
    pub reference_turn: (usize, Turn),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionArtifact {
    pub blueprint: Blueprint,
    pub segments: SegmentDecomposition,
    pub pose: Pose,
    /// Intended folding for the all-true reference state.
    pub reference: Polyline,
    pub bounds: Box2,
}

impl ReductionArtifact {
    pub fn variant(&self) -> FrameVariant {
        self.blueprint.variant
    }

    pub fn total_length(&self) -> u64 {
        self.segments.total_length()
    }

    pub fn vertex_count(&self) -> u64 {
        match self.segments.topology {
            Topology::Open => self.total_length() + 1,
            Topology::Closed => self.total_length(),
        }
    }

    /// Vertex-level chain; refuses chains longer than `limit` edges.
    pub fn chain(&self, limit: u64) -> Option<FixedAngleChain> {
        if self.total_length() > limit {
            return None;
        }
        let colors = (self.variant() == FrameVariant::Hp).then(|| {
            let n = self.vertex_count() as usize;
            let mut c = vec![crate::model::Color::P; n];
            c[0] = crate::model::Color::H;
            c[n - 1] = crate::model::Color::H;
            c
        });
        chain_from_segments(&self.segments, colors).ok()
    }

    pub fn check_version(&self) -> Result<(), ReductionError> {
        if self.blueprint.version != BLUEPRINT_VERSION {
            return Err(ReductionError::Version(self.blueprint.version));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileOptions {
    pub variant: FrameVariant,
    /// Small hooks and insulation; keeps the geometry but not the forcing
    /// lengths, so chains stay small enough to enumerate.
    pub toy: bool,
}

fn state_for(layout: &LinkedLayout, values: Vec<bool>) -> State {
    let choice = (0..layout.formula.num_clauses())
        .map(|ci| {
            let conns = compile::layout_connections(layout, ci);
            let lits = &layout.formula.clauses[ci];
            let k = lits.iter().position(|l| l.eval(&values)).unwrap_or(0);
            conns[k]
        })
        .collect();
    State { values, choice }
}

fn assemble(plan: &Plan, layout: &LinkedLayout, st: &State, variant: FrameVariant) -> Result<(Polyline, i64, Option<Box2>, u64), ReductionError> {
    let c = plan.inner_chain(layout, st);
    let c5 = c.map(|p| Point::new(5 * p.x, 5 * p.y));
    let bx = plan.spiral_box;
    let inner = Box2::new(Point::new(5 * bx.min.x, 5 * bx.min.y), Point::new(5 * bx.max.x, 5 * bx.max.y));
    let total = c5.total_length() + 5;
    let frame = build_frame(variant, inner, total)?;
    Ok((frame.assemble(&c5), frame.size, frame.square, total))
}

/// Builds the chain instance for a normalized layout.
pub fn compile(layout: &LinkedLayout, formula: &CnfFormula, opts: CompileOptions) -> Result<ReductionArtifact, ReductionError> {
    let plan = Plan::new(layout, opts.toy)?;
    let st = state_for(layout, vec![true; layout.formula.num_vars]);
    let (pl, frame_size, square, inner_length) = assemble(&plan, layout, &st, opts.variant)?;
    let segments = pl.segments()?;
    let turns = pl.turns();
    let index: HashMap<Point, usize> = pl.points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let turn_of = |i: usize| match pl.topology {
        Topology::Open => i - 1,
        Topology::Closed => i,
    };
    let mut probes = Vec::new();
    for v in 0..layout.formula.num_vars {
        let k = layout
            .levels
            .iter()
            .find_map(|l| match l {
                Level::Variables(vs) => vs.iter().find(|s| s.var == v).map(|s| s.occurrences.len()),
                _ => None,
            })
            .unwrap() as i64;
        let (x, y) = (plan.var_x[v], plan.var_y[v]);
        let at = |ux: i64| Point::new(10 * ux, 10 * y);
        let a = index[&at(x + 2)];
        let b = index[&at(x + 3 * k + 16)];
        let (lo, hi) = (turn_of(a.min(b)), turn_of(a.max(b)));
        probes.push(VarProbe { var: v, first_turn: lo, last_turn: hi, true_turns: TurnSequence(turns.turns()[lo..=hi].to_vec()) });
    }
    let bounds = pl.bounding_box().unwrap();
    let blueprint = Blueprint {
        version: BLUEPRINT_VERSION,
        variant: opts.variant,
        toy: opts.toy,
        formula: formula.clone(),
        layout: layout.clone(),
        plan,
        inner_length,
        frame_size,
        square,
        probes,
        reference_turn: (0, turns.turns()[0]),
    };
    Ok(ReductionArtifact { blueprint, segments, pose: pl.pose(), reference: pl, bounds })
}

/// Normalizes and compiles in one step.
pub fn reduce(formula: &CnfFormula, drawing: &LeveledDrawing, opts: CompileOptions) -> Result<ReductionArtifact, ReductionError> {
    let layout = normalize_to_adjacent_rows(formula, drawing)?;
    compile(&layout, formula, opts)
}

/// Intended folding for a satisfying assignment of the original variables
/// (or of all variables including copies).
pub fn make_witness_polyline(artifact: &ReductionArtifact, assignment: &[bool]) -> Result<Polyline, ReductionError> {
    let bp = &artifact.blueprint;
    let layout = &bp.layout;
    let full = if assignment.len() == bp.formula.num_vars {
        layout.extend_assignment(assignment)
    } else if assignment.len() == layout.formula.num_vars {
        assignment.to_vec()
    } else {
        return Err(ReductionError::AssignmentSize { expected: bp.formula.num_vars, got: assignment.len() });
    };
    if assignment.len() == bp.formula.num_vars {
        if let Some(c) = bp.formula.first_unsatisfied(assignment) {
            return Err(ReductionError::Unsatisfied(c + 1));
        }
    }
    if let Some(c) = layout.formula.first_unsatisfied(&full) {
        return Err(ReductionError::Unsatisfied(c + 1));
    }
    let st = state_for(layout, full);
    let (pl, ..) = assemble(&bp.plan, layout, &st, bp.variant)?;
    if pl.lengths() != artifact.segments.lengths || pl.pose() != artifact.pose {
        return Err(ReductionError::SegmentMismatch);
    }
    Ok(pl)
}

pub fn make_witness(artifact: &ReductionArtifact, assignment: &[bool]) -> Result<TurnSequence, ReductionError> {
    Ok(make_witness_polyline(artifact, assignment)?.turns())
}

/// Reads every variable (copies included) from a turn sequence. The
/// folding must be valid for the artifact's variant.
pub fn extract_full_assignment(artifact: &ReductionArtifact, turns: &TurnSequence) -> Result<Vec<bool>, ReductionError> {
    let mut r = Report::default();
    if fold_checks(artifact, turns, &mut r).is_none() {
        let bad = r.checks.iter().find(|c| !c.passed).expect("a failed check");
        return Err(ReductionError::InvalidFolding(format!("{}: {}", bad.name, bad.detail)));
    }
    read_probes(artifact, turns)
}

fn read_probes(artifact: &ReductionArtifact, turns: &TurnSequence) -> Result<Vec<bool>, ReductionError> {
    let bp = &artifact.blueprint;
    let expected = match artifact.segments.topology {
        Topology::Open => artifact.segments.lengths.len() - 1,
        Topology::Closed => artifact.segments.lengths.len(),
    };
    if turns.len() != expected {
        return Err(ChainError::TurnCount { expected, got: turns.len() }.into());
    }
    let t = turns.turns();
    let (ri, rt) = bp.reference_turn;
    let mirrored = t[ri] != rt;
    bp.probes
        .iter()
        .map(|p| {
            let got = t[p.first_turn..=p.last_turn].iter().map(|&x| if mirrored { x.flipped() } else { x });
            let want = p.true_turns.turns();
            let got: Vec<Turn> = got.collect();
            if got == want {
                Ok(true)
            } else if got.iter().zip(want).all(|(a, b)| *a == b.flipped()) {
                Ok(false)
            } else {
                Err(ReductionError::NotIntended(p.var + 1))
            }
        })
        .collect()
}

/// Assignment of the original variables read from a folding.
pub fn extract_assignment(artifact: &ReductionArtifact, turns: &TurnSequence) -> Result<Vec<bool>, ReductionError> {
    let full = extract_full_assignment(artifact, turns)?;
    Ok(full[..artifact.blueprint.formula.num_vars].to_vec())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<12} {}  {}", c.name, if c.passed { "ok" } else { "FAIL" }, c.detail)?;
        }
        Ok(())
    }
}

/// Embeds `turns` at the segment level and records the geometric checks
/// (closure, noncrossing, variant predicate). Returns the folding when every
/// check passed.
fn fold_checks(artifact: &ReductionArtifact, turns: &TurnSequence, r: &mut Report) -> Option<Polyline> {
    let seg = &artifact.segments;
    let pts = match Polyline::embed(seg, turns, artifact.pose) {
        Ok(p) => {
            r.push("turns", true, format!("{} turns", turns.len()));
            p
        }
        Err(e) => {
            r.push("turns", false, e.to_string());
            return None;
        }
    };
    let pl = match seg.topology {
        Topology::Open => Polyline { topology: Topology::Open, points: pts },
        Topology::Closed => {
            let closes = pts.first() == pts.last();
            let mut pts = pts;
            pts.pop();
            let pl = Polyline { topology: Topology::Closed, points: pts };
            let ok = closes && pl.check().is_ok() && pl.turns().turns().first() == turns.turns().first();
            r.push("closure", ok, if ok { "closes up".to_string() } else { "walk does not close with the given turns".to_string() });
            if !ok {
                return None;
            }
            pl
        }
    };
    let mut ok = true;
    match pl.first_crossing() {
        None => r.push("noncrossing", true, format!("{} segments", seg.lengths.len())),
        Some((i, j)) => {
            ok = false;
            r.push("noncrossing", false, format!("segments {i} and {j} meet"))
        }
    }
    match artifact.variant() {
        FrameVariant::Closed => {}
        FrameVariant::Hp => {
            // the only H vertices are the two endpoints
            let a = pl.points[0];
            let b = *pl.points.last().unwrap();
            let contacts = usize::from(a.l1(b) == 1 && artifact.total_length() > 1);
            ok &= contacts == 1;
            r.push("hp", contacts == 1, format!("contacts={contacts}"));
        }
        FrameVariant::Square => {
            let bb = pl.bounding_box().unwrap();
            let s = artifact.blueprint.frame_size;
            let fits = bb.width() <= s && bb.height() <= s;
            ok &= fits;
            r.push("square", fits, format!("{}x{} within side {s}", bb.width(), bb.height()));
        }
    }
    ok.then_some(pl)
}

/// Embeds `turns` at the segment level and checks the folding and the
/// assignment it encodes.
pub fn verify_artifact(artifact: &ReductionArtifact, turns: &TurnSequence) -> Report {
    let mut r = Report::default();
    if fold_checks(artifact, turns, &mut r).is_none() && r.checks.last().is_some_and(|c| c.name == "turns" || c.name == "closure") {
        return r;
    }
    match read_probes(artifact, turns) {
        Ok(full) => {
            let bp = &artifact.blueprint;
            let orig = &full[..bp.formula.num_vars];
            match bp.layout.formula.first_unsatisfied(&full) {
                None => r.push("assignment", true, format_assignment(orig)),
                Some(c) => r.push("assignment", false, format!("clause {} unsatisfied by {}", c + 1, format_assignment(orig))),
            }
        }
        Err(e) => r.push("assignment", false, e.to_string()),
    }
    r
}

pub fn format_assignment(a: &[bool]) -> String {
    a.iter().enumerate().map(|(i, &v)| format!("x{}={}", i + 1, u8::from(v))).collect::<Vec<_>>().join(" ")
}

/// Structural audits of a compiled artifact.
pub fn audit(artifact: &ReductionArtifact) -> Report {
    let mut r = Report::default();
    let bp = &artifact.blueprint;
    let plan = &bp.plan;
    if bp.variant == FrameVariant::Closed {
        let (h, v) = residues(&artifact.reference);
        let ok = h == vec![1, 1, 2] && v == vec![1, 1, 2];
        r.push("residues", ok, format!("horizontal {h:?}, vertical {v:?}"));
    }
    let m = bp.layout.formula.num_clauses();
    let want = if bp.toy { plan.limits.ell_min } else { ell_min(m) };
    let mut worst = i64::MAX;
    let mut bad = None;
    for (ci, h) in plan.hooks.iter().enumerate() {
        for spec in h.top.iter().chain(&h.bottom) {
            worst = worst.min(spec.middle);
            if let Err(e) = spec.check(&plan.limits) {
                bad.get_or_insert(format!("clause {}: {e}", ci + 1));
            }
        }
    }
    let ok = bad.is_none() && worst >= want && plan.limits.ell_min >= want;
    r.push("hooks", ok, bad.unwrap_or(format!("shortest middle vertical {worst} >= {want}")));
    let q = plan.quarter;
    let clauses_left = plan.clause_x.iter().all(|&x| x + 21 <= q);
    let vars_right = plan.var_x.iter().all(|&x| x >= 3 * q);
    r.push("quarters", clauses_left && vars_right, format!("width {} (quarter {q})", plan.width));
    if bp.variant == FrameVariant::Hp {
        // H sits on the two endpoints; they must be the leftmost points of
        // the bottom doubled run
        let pts = &artifact.reference.points;
        let (a, b) = (pts[0], *pts.last().unwrap());
        let bottom = artifact.bounds.min.y;
        let ok = a.l1(b) == 1 && a.x == artifact.bounds.min.x && b.x == a.x && a.y.min(b.y) == bottom && artifact.vertex_count() >= 2;
        r.push("hp-ends", ok, format!("2 H vertices at {a} and {b}"));
    }
    if bp.variant == FrameVariant::Square {
        let s = bp.frame_size as u64;
        let l = bp.inner_length;
        let ok = s == 10 * l + 1 && artifact.total_length() <= 48 * l;
        r.push("square", ok, format!("side {s}, length {} <= 48*{l}", artifact.total_length()));
    }
    let nm = (bp.layout.formula.num_vars + bp.layout.formula.num_clauses()) as u64;
    let bound = SIZE_CONSTANT.saturating_mul(nm.pow(3));
    let len = bp.inner_length;
    r.push("size", len <= bound, format!("inner length {len}, bound {bound}"));
    r
}

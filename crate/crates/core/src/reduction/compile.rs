//! Geometry: places gadgets in rows, threads the rows into one spiral and
//! attaches the frame.
//!
//! Unit geometry (gadget units) is doubled onto the half grid, then every
//! coordinate is multiplied by 5 before the frame is attached.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::formula::{Level, LinkedLayout};
use super::ReductionError;
use crate::fold::{Box2, Point};
use crate::gadgets::{
    choice_chain_path, ell_min, insulation_path, max_tip_level, sheath_path, sheath_sites, stack_hooks, variable_path,
    variable_tab_column, variable_width, ClauseHooks, Connection, HookLimits, HookSpec, InsulationSpec,
    Occurrence, Side, CLAUSE_PITCH,
};
use crate::poly::{PathBuilder, Polyline};

/// Insulation half-height used by toy builds.
pub const TOY_H: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum RowKind {
    /// Index into the plan's insulation list.
    Insulation(usize),
    Variables(usize),
    TopSheath(usize),
    Choice(usize),
    BottomSheath(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub kind: RowKind,
    /// Endpoint height in gadget units.
    pub y: i64,
}

/// Who owns a tab: the clause whose hook reaches it and the connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabOwner {
    pub clause: usize,
    pub connection: Connection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsulationRow {
    pub spec: InsulationSpec,
    pub owners: Vec<TabOwner>,
    /// Axis height in gadget units.
    pub axis: i64,
}

/// Everything about the construction that does not depend on the folding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub toy: bool,
    pub width: i64,
    pub quarter: i64,
    pub limits: HookLimits,
    pub rows: Vec<Row>,
    pub insulation: Vec<InsulationRow>,
    /// Clause-local origin per (normalized) clause.
    pub clause_x: Vec<i64>,
    /// Choice-row height per clause.
    pub clause_y: Vec<i64>,
    pub var_x: Vec<i64>,
    pub var_y: Vec<i64>,
    pub hooks: Vec<ClauseHooks>,
    /// Half-grid box holding the spiral.
    pub spiral_box: Box2,
}

/// Folding state: variable values and, per clause, the connection whose
/// hook is extended.
#[derive(Debug, Clone)]
pub struct State {
    pub values: Vec<bool>,
    pub choice: Vec<Connection>,
}

fn side_shifts(conns: &[Connection], side: Side) -> Vec<usize> {
    let mut s: Vec<usize> = conns.iter().filter(|c| c.side == side).map(|c| c.shift).collect();
    s.sort_unstable();
    s
}

/// One hook of a sheath row while tips are being placed.
#[derive(Debug, Clone, Copy)]
struct TipSlot {
    /// Fixed tab column (relative to the right quarter) and the position
    /// of its variable in the level.
    fixed: Option<(i64, usize)>,
}

/// Leftmost placement of tips; `Err(i)` names the variable whose tab
/// came too early.
fn place_tips(slots: &[TipSlot], blocked: &BTreeSet<i64>) -> Result<Vec<i64>, usize> {
    let mut prev = -2;
    let mut out = Vec::with_capacity(slots.len());
    for s in slots {
        match s.fixed {
            Some((c, vi)) => {
                if c < prev + 2 {
                    return Err(vi);
                }
                prev = c;
            }
            None => {
                let mut x = prev + 2;
                while blocked.contains(&x) || blocked.contains(&(x + 1)) {
                    x += 1;
                }
                prev = x;
            }
        }
        out.push(prev);
    }
    Ok(out)
}

fn level_clauses(layout: &LinkedLayout, li: Option<usize>) -> Option<&[super::formula::ClauseSlot]> {
    match layout.levels.get(li?) {
        Some(Level::Clauses(cs)) => Some(cs),
        _ => None,
    }
}

fn level_vars(layout: &LinkedLayout, li: Option<usize>) -> Option<&[super::formula::VarSlot]> {
    match layout.levels.get(li?) {
        Some(Level::Variables(vs)) => Some(vs),
        _ => None,
    }
}

/// Hook slots of one sheath row of clause level `cl` facing `side`, with tab
/// columns taken from the variable level on that side.
fn sheath_slots(layout: &LinkedLayout, cl: usize, side: Side, var_rel: &HashMap<usize, (usize, i64)>) -> Vec<TipSlot> {
    let cs = level_clauses(layout, Some(cl)).unwrap();
    let vl = match side {
        Side::Above => cl.checked_sub(1),
        Side::Below => Some(cl + 1),
    };
    let vars = level_vars(layout, vl);
    let mut out = Vec::new();
    for c in cs {
        out.push(TipSlot { fixed: None });
        for s in side_shifts(&c.connections, side) {
            let li = c.connections.iter().position(|k| k.side == side && k.shift == s).unwrap();
            let var = layout.formula.clauses[c.clause][li].var;
            let slot = vars.unwrap().iter().find(|v| v.var == var).unwrap();
            let occ = slot.occurrences.iter().position(|o| o.clause == Some(c.clause)).unwrap();
            let (vi, rel) = var_rel[&var];
            out.push(TipSlot { fixed: Some((rel + variable_tab_column(occ), vi)) });
        }
        out.push(TipSlot { fixed: None });
    }
    out
}

fn tab_columns(slots: &[TipSlot]) -> BTreeSet<i64> {
    slots.iter().filter_map(|s| s.fixed).flat_map(|(c, _)| [c, c + 1]).collect()
}

fn vertical_sum(pl: &Polyline) -> i64 {
    let lengths = pl.lengths();
    (0..pl.segment_count()).filter(|&i| !pl.dir(i).is_horizontal()).map(|i| lengths[i] as i64).sum()
}

impl Plan {
    pub fn new(layout: &LinkedLayout, toy: bool) -> Result<Plan, ReductionError> {
        layout.check()?;
        let nl = layout.levels.len();
        let m = layout.formula.num_clauses();

        // horizontal placement of variables (relative to the right quarter)
        let mut var_rel: HashMap<usize, (usize, i64)> = HashMap::new();
        let mut region = 0i64;
        let mut tips_rel: HashMap<(usize, Side), Vec<i64>> = HashMap::new();
        for li in 0..nl {
            let Some(vs) = level_vars(layout, Some(li)) else { continue };
            let mut gaps = vec![2i64; vs.len()];
            loop {
                let mut x = 0;
                for (i, v) in vs.iter().enumerate() {
                    x += gaps[i];
                    var_rel.insert(v.var, (i, x));
                    x += variable_width(v.occurrences.len());
                }
                let mut failed = None;
                let mut placed = Vec::new();
                for (cl, side) in [(li.checked_sub(1), Side::Below), (Some(li + 1), Side::Above)] {
                    let Some(cl) = cl.filter(|&c| level_clauses(layout, Some(c)).is_some()) else { continue };
                    let slots = sheath_slots(layout, cl, side, &var_rel);
                    match place_tips(&slots, &tab_columns(&slots)) {
                        Ok(t) => placed.push(((cl, side), t)),
                        Err(vi) => {
                            failed = Some(vi);
                            break;
                        }
                    }
                }
                match failed {
                    Some(vi) => gaps[vi] += 2,
                    None => {
                        for (k, t) in placed {
                            region = region.max(t.last().copied().unwrap_or(0) + 4);
                            tips_rel.insert(k, t);
                        }
                        region = region.max(x + 2);
                        break;
                    }
                }
            }
        }
        // sheath rows facing no variables only carry stabilizing tips
        for li in 0..nl {
            if level_clauses(layout, Some(li)).is_none() {
                continue;
            }
            for side in [Side::Above, Side::Below] {
                if tips_rel.contains_key(&(li, side)) {
                    continue;
                }
                let slots = sheath_slots(layout, li, side, &var_rel);
                let t = place_tips(&slots, &BTreeSet::new()).expect("no fixed tips");
                region = region.max(t.last().copied().unwrap_or(0) + 4);
                tips_rel.insert((li, side), t);
            }
        }
        let clause_need = (0..nl)
            .filter_map(|li| level_clauses(layout, Some(li)))
            .map(|cs| 2 + CLAUSE_PITCH * cs.len() as i64 + 2)
            .max()
            .unwrap_or(0);
        let quarter = clause_need.max(region) + 1;
        let width = 4 * quarter;
        let limits = if toy {
            HookLimits { ell_min: 2, margin: 1, min_horizontal: width / 2 }
        } else {
            HookLimits { ell_min: ell_min(m), margin: 50, min_horizontal: width / 2 }
        };

        let mut var_x = vec![0; layout.formula.num_vars];
        for (&v, &(_, rel)) in &var_rel {
            var_x[v] = 3 * quarter + rel;
        }
        let mut clause_x = vec![0; m];
        for li in 0..nl {
            if let Some(cs) = level_clauses(layout, Some(li)) {
                for (i, c) in cs.iter().enumerate() {
                    clause_x[c.clause] = 2 + CLAUSE_PITCH * i as i64;
                }
            }
        }

        // hooks per sheath row, stacked across the whole row
        let mut hooks: Vec<ClauseHooks> = vec![ClauseHooks { top: Vec::new(), bottom: Vec::new() }; m];
        let mut reach = HashMap::new(); // (level, side) -> tip depth below/above the choice row
        for li in 0..nl {
            let Some(cs) = level_clauses(layout, Some(li)) else { continue };
            for side in [Side::Above, Side::Below] {
                let tips = &tips_rel[&(li, side)];
                let mut sites = Vec::new();
                let mut counts = Vec::new();
                let mut k = 0;
                for c in cs {
                    let shifts = side_shifts(&c.connections, side);
                    let n = shifts.len() + 2;
                    let tx: Vec<i64> = tips[k..k + n].iter().map(|t| 3 * quarter + t).collect();
                    k += n;
                    for mut s in sheath_sites(&shifts, &tx) {
                        s.start.x += clause_x[c.clause];
                        sites.push(s);
                    }
                    counts.push((c.clause, n));
                }
                let t = max_tip_level(&sites, &limits);
                let specs = stack_hooks(&sites, t, side, &limits)?;
                let mut it = specs.into_iter();
                for (ci, n) in counts {
                    let list: Vec<HookSpec> = it.by_ref().take(n).collect();
                    match side {
                        Side::Above => hooks[ci].top = list,
                        Side::Below => hooks[ci].bottom = list,
                    }
                }
                reach.insert((li, side), -t);
            }
        }

        // row verticals in gadget units, for the insulation heights
        let reference = State {
            values: vec![true; layout.formula.num_vars],
            choice: layout.formula.clauses.iter().enumerate().map(|(ci, _)| first_connection(layout, ci)).collect(),
        };
        let mut plan = Plan {
            toy,
            width,
            quarter,
            limits,
            rows: Vec::new(),
            insulation: Vec::new(),
            clause_x,
            clause_y: vec![0; m],
            var_x,
            var_y: vec![0; layout.formula.num_vars],
            hooks,
            spiral_box: Box2::new(Point::ORIGIN, Point::ORIGIN),
        };
        let level_vertical = |plan: &Plan, li: usize, side: Side| -> i64 {
            match &layout.levels[li] {
                Level::Variables(vs) => vs.iter().map(|v| vertical_sum(&variable_path(&occs(v), true))).sum(),
                Level::Clauses(cs) => cs.iter().map(|c| vertical_sum(&plan.sheath_unit(layout, c.clause, side, &reference))).sum(),
            }
        };

        // insulation rows and tabs
        let mut ins_specs = Vec::new();
        for gap in 0..=nl {
            let above = gap.checked_sub(1);
            let below = (gap < nl).then_some(gap);
            let mut v = 1;
            if let Some(a) = above {
                v += level_vertical(&plan, a, Side::Below);
            }
            if let Some(b) = below {
                v += level_vertical(&plan, b, Side::Above);
            }
            let h = if toy { TOY_H } else { v };
            let mut tabs = Vec::new();
            // tabs belong to variables facing a clause level across this row
            let facing = [(below, above, Side::Above), (above, below, Side::Below)];
            for (vl, cl, occ_side) in facing {
                let (Some(vs), Some(cs)) = (level_vars(layout, vl), level_clauses(layout, cl)) else { continue };
                let _ = cs;
                for vslot in vs {
                    for (i, o) in vslot.occurrences.iter().enumerate() {
                        if let (Occurrence::Literal { side, .. }, Some(ci)) = (o.occ, o.clause) {
                            if side == occ_side {
                                let li = layout.formula.clauses[ci].iter().position(|l| l.var == vslot.var).unwrap();
                                let conn = layout_connections(layout, ci)[li];
                                tabs.push((plan.var_x[vslot.var] + variable_tab_column(i), TabOwner { clause: ci, connection: conn }));
                            }
                        }
                    }
                }
            }
            tabs.sort_by_key(|t| t.0);
            let spec = InsulationSpec { h, width, tabs: tabs.iter().map(|t| t.0).collect() };
            spec.validate()?;
            ins_specs.push(InsulationRow { spec, owners: tabs.into_iter().map(|t| t.1).collect(), axis: 0 });
        }

        // vertical stacking, top to bottom
        let mut rows = Vec::new();
        let mut y = 0; // axis of the first insulation row
        ins_specs[0].axis = 0;
        rows.push(Row { kind: RowKind::Insulation(0), y: 0 });
        for li in 0..nl {
            let h_above = ins_specs[li].spec.h;
            let h_below = ins_specs[li + 1].spec.h;
            match &layout.levels[li] {
                Level::Variables(vs) => {
                    let yv = y - h_above - 4;
                    for v in vs {
                        plan.var_y[v.var] = yv;
                    }
                    rows.push(Row { kind: RowKind::Variables(li), y: yv });
                    y = yv - 4 - h_below;
                }
                Level::Clauses(cs) => {
                    let yc = y - reach[&(li, Side::Above)] - h_above - 3;
                    for c in cs {
                        plan.clause_y[c.clause] = yc;
                    }
                    rows.push(Row { kind: RowKind::TopSheath(li), y: yc + 1 });
                    rows.push(Row { kind: RowKind::Choice(li), y: yc });
                    rows.push(Row { kind: RowKind::BottomSheath(li), y: yc - 1 });
                    y = yc - reach[&(li, Side::Below)] - h_below - 3;
                }
            }
            ins_specs[li + 1].axis = y;
            rows.push(Row { kind: RowKind::Insulation(li + 1), y });
        }
        plan.rows = rows;
        plan.insulation = ins_specs;

        // spiral box on the half grid
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for r in 0..plan.rows.len() {
            let b = plan.row_path(layout, r, &reference).bounding_box().unwrap();
            lo = lo.min(b.min.y);
            hi = hi.max(b.max.y);
        }
        // variables, tabs and hooks move by a few units between foldings
        lo -= 8;
        hi += 8;
        let nr = plan.rows.len() as i64;
        plan.spiral_box = Box2::new(Point::new(-nr - 1, lo - nr - 1), Point::new(2 * width + nr + 1, hi));
        Ok(plan)
    }

    /// Sheath of clause `ci` in clause-local units (endpoints `(0, ±1)`).
    fn sheath_unit(&self, layout: &LinkedLayout, ci: usize, side: Side, st: &State) -> Polyline {
        let conns = layout_connections(layout, ci);
        let shifts = side_shifts(&conns, side);
        let hooks = match side {
            Side::Above => &self.hooks[ci].top,
            Side::Below => &self.hooks[ci].bottom,
        };
        let n = shifts.len();
        let mut slots: [Option<(HookSpec, bool)>; 3] = [None; 3];
        for (j, &s) in shifts.iter().enumerate() {
            let extended = st.choice[ci] == Connection { side, shift: s };
            slots[s] = Some((hooks[j + 1], extended));
        }
        let pl = sheath_path((&hooks[0], &hooks[n + 1]), &slots);
        match side {
            Side::Below => pl,
            Side::Above => pl.map(|p| Point::new(p.x, -p.y)),
        }
    }

    /// Row `r` on the half grid, from `(0, 2y)` to `(2W, 2y)`.
    pub fn row_path(&self, layout: &LinkedLayout, r: usize, st: &State) -> Polyline {
        let row = &self.rows[r];
        let y2 = 2 * row.y;
        let scale = |dx: i64, dy: i64| move |p: Point| Point::new(2 * (p.x + dx), 2 * (p.y + dy));
        let mut b = PathBuilder::new(Point::new(0, y2));
        match row.kind {
            RowKind::Insulation(i) => {
                let ins = &self.insulation[i];
                let up = vec![true; ins.spec.grilles().len()];
                let tab_up: Vec<bool> = ins
                    .owners
                    .iter()
                    .map(|o| {
                        let extended = st.choice[o.clause] == o.connection;
                        // the variable sits on the side the clause connects to
                        let toward_variable_is_up = o.connection.side == Side::Above;
                        extended == toward_variable_is_up
                    })
                    .collect();
                let pl = insulation_path(&ins.spec, &up, &tab_up);
                return pl.map(|p| Point::new(p.x, p.y + y2));
            }
            RowKind::Variables(li) => {
                let Level::Variables(vs) = &layout.levels[li] else { unreachable!() };
                for v in vs {
                    let x = self.var_x[v.var];
                    b.to(Point::new(2 * x, y2));
                    b.extend(&variable_path(&occs(v), st.values[v.var]).map(scale(x, row.y)));
                }
            }
            RowKind::Choice(li) => {
                let Level::Clauses(cs) = &layout.levels[li] else { unreachable!() };
                for c in cs {
                    let x = self.clause_x[c.clause];
                    let ch = st.choice[c.clause];
                    b.to(Point::new(2 * (x + 1), y2));
                    b.extend(&choice_chain_path(ch.side, ch.shift).map(scale(x, row.y)));
                }
            }
            RowKind::TopSheath(li) | RowKind::BottomSheath(li) => {
                let side = if matches!(row.kind, RowKind::TopSheath(_)) { Side::Above } else { Side::Below };
                let Level::Clauses(cs) = &layout.levels[li] else { unreachable!() };
                let yc = row.y + if side == Side::Above { -1 } else { 1 };
                for c in cs {
                    let x = self.clause_x[c.clause];
                    b.to(Point::new(2 * x, y2));
                    b.extend(&self.sheath_unit(layout, c.clause, side, st).map(scale(x, yc)));
                }
            }
        }
        b.to(Point::new(2 * self.width, y2));
        b.open()
    }

    /// Inner chain on the half grid from `p` to `q` (the attach edge
    /// `q -> p` is left out).
    pub fn inner_chain(&self, layout: &LinkedLayout, st: &State) -> Polyline {
        let rows: Vec<Polyline> = (0..self.rows.len()).map(|r| self.row_path(layout, r, st)).collect();
        let ys: Vec<i64> = self.rows.iter().map(|r| 2 * r.y).collect();
        spiral(&rows, &ys, 2 * self.width, self.spiral_box)
    }

    pub fn p(&self) -> Point {
        self.spiral_box.min
    }
}

fn occs(v: &super::formula::VarSlot) -> Vec<Occurrence> {
    v.occurrences.iter().map(|o| o.occ).collect()
}

pub(crate) fn layout_connections(layout: &LinkedLayout, ci: usize) -> Vec<Connection> {
    for l in &layout.levels {
        if let Level::Clauses(cs) = l {
            if let Some(c) = cs.iter().find(|c| c.clause == ci) {
                return c.connections.clone();
            }
        }
    }
    panic!("clause {ci} has no gadget")
}

pub(crate) fn first_connection(layout: &LinkedLayout, ci: usize) -> Connection {
    layout_connections(layout, ci)[0]
}

/// Threads the rows into a single path from `p = (xmin, ymin)` to
/// `q = p + (1, 0)`. Even rows are visited on the way out from `p`, odd rows
/// on the way back to `q`; entry columns sit left of the rows, exit columns
/// right, and each row's return run sits one level below the previous.
pub fn spiral(rows: &[Polyline], ys: &[i64], w2: i64, bx: Box2) -> Polyline {
    let n = rows.len();
    assert!(n >= 2, "spiral needs at least two rows");
    let (xmin, ymin, xmax, ymax) = (bx.min.x, bx.min.y, bx.max.x, bx.max.y);
    let a = |r: usize| xmin + r as i64;
    let x = |r: usize| xmax - r as i64;
    let bot = |r: usize| ymin + r as i64;
    let top = |r: usize| if r == 0 { ymax } else { ys[r - 1] - 1 };
    let round = |b: &mut PathBuilder, r: usize| {
        let (t, y) = (top(r), ys[r]);
        assert!(t > y, "rows too close for the spiral");
        b.to(Point::new(a(r), t)).to(Point::new(a(r + 1), t)).to(Point::new(a(r + 1), y)).to(Point::new(0, y));
        b.extend(&rows[r]);
        b.to(Point::new(x(r + 1), y)).to(Point::new(x(r + 1), t)).to(Point::new(x(r), t)).to(Point::new(x(r), bot(r)));
        let stop = if r == n - 1 { a(n) } else { a(r + 2) };
        b.to(Point::new(stop, bot(r)));
    };
    let p = Point::new(xmin, ymin);
    let q = Point::new(xmin + 1, ymin);
    let mut front = PathBuilder::new(p);
    let mut back = PathBuilder::new(q);
    for r in 0..n {
        if r % 2 == 0 {
            round(&mut front, r);
        } else {
            round(&mut back, r);
        }
    }
    let back = back.open().reversed();
    // the path holding the last row ends one level higher
    front.to(back.points[0]);
    front.extend(&back);
    let _ = w2;
    front.open()
}

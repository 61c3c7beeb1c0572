//! Formulas, leveled drawings and the normalization to adjacent rows.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ReductionError;
use crate::gadgets::{Connection, Occurrence, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    /// Zero-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }

    pub fn eval(&self, a: &[bool]) -> bool {
        a[self.var] == self.positive
    }

    /// DIMACS-style signed, one-based integer.
    pub fn to_dimacs(&self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self, ReductionError> {
        for (i, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(ReductionError::Formula(format!("clause {} is empty", i + 1)));
            }
            if c.len() > 3 {
                return Err(ReductionError::Formula(format!("clause {} has {} literals (at most 3)", i + 1, c.len())));
            }
            for (j, l) in c.iter().enumerate() {
                if l.var >= num_vars {
                    return Err(ReductionError::Formula(format!(
                        "clause {} uses variable {} but only {num_vars} are declared",
                        i + 1,
                        l.var + 1
                    )));
                }
                if c[..j].iter().any(|o| o.var == l.var) {
                    return Err(ReductionError::Formula(format!("clause {} mentions variable {} twice", i + 1, l.var + 1)));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn eval(&self, a: &[bool]) -> bool {
        self.first_unsatisfied(a).is_none()
    }

    pub fn first_unsatisfied(&self, a: &[bool]) -> Option<usize> {
        self.clauses.iter().position(|c| !c.iter().any(|l| l.eval(a)))
    }

    /// Brute force over all assignments (small formulas only).
    pub fn satisfying_assignments(&self) -> Vec<Vec<bool>> {
        assert!(self.num_vars <= 24, "brute force limited to 24 variables");
        (0u64..1 << self.num_vars)
            .map(|bits| (0..self.num_vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|a| self.eval(a))
            .collect()
    }

    pub fn is_satisfiable(&self) -> bool {
        (0u64..1 << self.num_vars).any(|bits| {
            let a: Vec<bool> = (0..self.num_vars).map(|i| bits >> i & 1 == 1).collect();
            self.eval(&a)
        })
    }
}

/// Grid position of a drawing vertex: variables on odd rows, clauses on
/// even rows, rows numbered downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPos {
    pub row: i64,
    pub x: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeveledDrawing {
    pub vars: Vec<GridPos>,
    pub clauses: Vec<GridPos>,
}

/// Exact-rational point `(x / den, row)` used for crossing tests.
#[derive(Debug, Clone, Copy)]
struct P {
    x: i128,
    y: i128,
}

fn orient(a: P, b: P, c: P) -> i128 {
    ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)).signum()
}

fn on_segment(a: P, b: P, p: P) -> bool {
    orient(a, b, p) == 0 && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Whether closed segments `ab` and `cd` share any point.
fn segments_meet(a: P, b: P, c: P, d: P) -> bool {
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0 && (o1 != 0 || o2 != 0) {
        return true;
    }
    on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b)
}

impl LeveledDrawing {
    pub fn validate(&self, f: &CnfFormula) -> Result<(), ReductionError> {
        let bad = |s: String| Err(ReductionError::Drawing(s));
        if self.vars.len() != f.num_vars {
            return bad(format!("drawing places {} variables, formula has {}", self.vars.len(), f.num_vars));
        }
        if self.clauses.len() != f.num_clauses() {
            return bad(format!("drawing places {} clauses, formula has {}", self.clauses.len(), f.num_clauses()));
        }
        for (i, p) in self.vars.iter().enumerate() {
            if p.row.rem_euclid(2) != 1 {
                return bad(format!("variable {} is on even row {}", i + 1, p.row));
            }
        }
        for (i, p) in self.clauses.iter().enumerate() {
            if p.row.rem_euclid(2) != 0 {
                return bad(format!("clause {} is on odd row {}", i + 1, p.row));
            }
        }
        let mut seen = BTreeMap::new();
        for (name, p) in self.named() {
            if let Some(other) = seen.insert((p.row, p.x), name.clone()) {
                return bad(format!("{other} and {name} share position row {} x {}", p.row, p.x));
            }
        }
        let edges = self.edges(f);
        let pt = |g: GridPos| P { x: g.x as i128, y: g.row as i128 };
        for (i, e) in edges.iter().enumerate() {
            let (a, b) = (pt(e.0), pt(e.1));
            for (name, v) in self.named() {
                if v != e.0 && v != e.1 && on_segment(a, b, pt(v)) {
                    return bad(format!("edge {} passes through {name}", e.2));
                }
            }
            for e2 in &edges[i + 1..] {
                let (c, d) = (pt(e2.0), pt(e2.1));
                let shared = e.0 == e2.0 || e.0 == e2.1 || e.1 == e2.0 || e.1 == e2.1;
                if shared {
                    // sharing an endpoint is fine unless they overlap
                    let other = |x: P, y: P, s: GridPos, t: GridPos| (s != e.0 && s != e.1 && on_segment(x, y, pt(s))) || (t != e.0 && t != e.1 && on_segment(x, y, pt(t)));
                    let back = (e.0 != e2.0 && e.0 != e2.1 && on_segment(c, d, a)) || (e.1 != e2.0 && e.1 != e2.1 && on_segment(c, d, b));
                    if other(a, b, e2.0, e2.1) || back {
                        return bad(format!("edges {} and {} overlap", e.2, e2.2));
                    }
                    continue;
                }
                if segments_meet(a, b, c, d) {
                    return bad(format!("edges {} and {} cross", e.2, e2.2));
                }
            }
        }
        Ok(())
    }

    fn named(&self) -> impl Iterator<Item = (String, GridPos)> + '_ {
        let v = self.vars.iter().enumerate().map(|(i, &p)| (format!("variable {}", i + 1), p));
        let c = self.clauses.iter().enumerate().map(|(i, &p)| (format!("clause {}", i + 1), p));
        v.chain(c)
    }

    fn edges(&self, f: &CnfFormula) -> Vec<(GridPos, GridPos, String)> {
        let mut out = Vec::new();
        for (ci, c) in f.clauses.iter().enumerate() {
            for l in c {
                out.push((self.clauses[ci], self.vars[l.var], format!("c{}-v{}", ci + 1, l.var + 1)));
            }
        }
        out
    }
}

/// Where a post-normalization variable comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "of")]
pub enum VarOrigin {
    Original(usize),
    Copy(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseSlot {
    pub clause: usize,
    /// Connection per literal, in the clause's literal order.
    pub connections: Vec<Connection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccSlot {
    pub occ: Occurrence,
    /// Clause using this occurrence (`None` for nulls).
    pub clause: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarSlot {
    pub var: usize,
    pub occurrences: Vec<OccSlot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "items")]
pub enum Level {
    Variables(Vec<VarSlot>),
    Clauses(Vec<ClauseSlot>),
}

/// Rows of gadgets top to bottom with every connection between adjacent
/// levels. The normalized formula uses copies where the drawing needed them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkedLayout {
    pub formula: CnfFormula,
    pub origin: Vec<VarOrigin>,
    pub original_vars: usize,
    pub original_clauses: usize,
    pub levels: Vec<Level>,
}

impl LinkedLayout {
    /// Extends an assignment of the original variables to the copies.
    pub fn extend_assignment(&self, a: &[bool]) -> Vec<bool> {
        self.origin
            .iter()
            .map(|o| match *o {
                VarOrigin::Original(i) | VarOrigin::Copy(i) => a[i],
            })
            .collect()
    }

    pub fn copies(&self) -> usize {
        self.origin.iter().filter(|o| matches!(o, VarOrigin::Copy(_))).count()
    }

    /// Checks the structural invariants the compiler relies on.
    pub fn check(&self) -> Result<(), ReductionError> {
        let bad = |s: String| Err(ReductionError::Layout(s));
        let mut var_level = vec![None; self.formula.num_vars];
        let mut clause_level = vec![None; self.formula.num_clauses()];
        for (li, level) in self.levels.iter().enumerate() {
            match level {
                Level::Variables(vs) => vs.iter().for_each(|v| var_level[v.var] = Some(li)),
                Level::Clauses(cs) => cs.iter().for_each(|c| clause_level[c.clause] = Some(li)),
            }
        }
        for (ci, c) in self.formula.clauses.iter().enumerate() {
            let Some(cl) = clause_level[ci] else { return bad(format!("clause {} has no gadget", ci + 1)) };
            let Level::Clauses(slots) = &self.levels[cl] else { unreachable!() };
            let slot = slots.iter().find(|s| s.clause == ci).unwrap();
            crate::gadgets::check_connections(&slot.connections).map_err(|e| ReductionError::Layout(e.to_string()))?;
            for (l, conn) in c.iter().zip(&slot.connections) {
                let Some(vl) = var_level[l.var] else { return bad(format!("variable {} has no gadget", l.var + 1)) };
                let want = match conn.side {
                    Side::Above => cl.checked_sub(1),
                    Side::Below => Some(cl + 1),
                };
                if want != Some(vl) {
                    return bad(format!("clause {} reaches variable {} across more than one row", ci + 1, l.var + 1));
                }
            }
        }
        if let Some(v) = var_level.iter().position(|l| l.is_none()) {
            return bad(format!("variable {} has no gadget", v + 1));
        }
        Ok(())
    }
}

fn lcm(a: i128, b: i128) -> i128 {
    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Introduces copy variables so every clause touches only variables in the
/// rows directly above and below it, then orders rows and occurrences.
pub fn normalize_to_adjacent_rows(formula: &CnfFormula, drawing: &LeveledDrawing) -> Result<LinkedLayout, ReductionError> {
    drawing.validate(formula)?;
    let max_gap = formula
        .clauses
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| c.iter().map(move |l| (drawing.clauses[ci].row - drawing.vars[l.var].row).abs()))
        .max()
        .unwrap_or(1) as i128;
    let scale = 4 * (1..=max_gap).fold(1, lcm);
    // scaled positions; the two equality clauses sit 1 apart
    let mut var_pos: Vec<(i64, i128)> = drawing.vars.iter().map(|p| (p.row, p.x as i128 * scale)).collect();
    let mut clause_pos: Vec<(i64, i128)> = drawing.clauses.iter().map(|p| (p.row, p.x as i128 * scale)).collect();
    let mut origin: Vec<VarOrigin> = (0..formula.num_vars).map(VarOrigin::Original).collect();
    let mut clauses = formula.clauses.clone();

    for ci in 0..formula.num_clauses() {
        for li in 0..clauses[ci].len() {
            let lit = clauses[ci][li];
            let (rc, xc) = clause_pos[ci];
            let (rv, xv) = var_pos[lit.var];
            let d = rc - rv;
            if d.abs() == 1 {
                continue;
            }
            let s = d.signum();
            let at = |r: i64| xv + (xc - xv) * (r - rv) as i128 / d as i128;
            let root = match origin[lit.var] {
                VarOrigin::Original(i) | VarOrigin::Copy(i) => i,
            };
            let mut prev = lit.var;
            let mut r = rv + 2 * s;
            loop {
                let copy = origin.len();
                origin.push(VarOrigin::Copy(root));
                var_pos.push((r, at(r)));
                let mid = r - s;
                clauses.push(vec![Literal::neg(prev), Literal::pos(copy)]);
                clause_pos.push((mid, at(mid)));
                clauses.push(vec![Literal::neg(copy), Literal::pos(prev)]);
                clause_pos.push((mid, at(mid) + 1));
                prev = copy;
                if r == rc - s {
                    break;
                }
                r += 2 * s;
            }
            clauses[ci][li] = Literal { var: prev, positive: lit.positive };
        }
    }
    let nf = CnfFormula { num_vars: origin.len(), clauses };

    // positions must stay distinct within a row
    let mut taken = BTreeMap::new();
    for (i, p) in var_pos.iter().enumerate() {
        if taken.insert(*p, format!("variable {}", i + 1)).is_some() {
            return Err(ReductionError::Drawing(format!("copy of variable {} collides with another vertex", i + 1)));
        }
    }
    for (i, p) in clause_pos.iter().enumerate() {
        if let Some(o) = taken.insert(*p, format!("clause {}", i + 1)) {
            return Err(ReductionError::Drawing(format!("clause {} collides with {o}", i + 1)));
        }
    }

    let mut rows: BTreeMap<i64, Vec<(i128, bool, usize)>> = BTreeMap::new();
    for (i, &(r, x)) in var_pos.iter().enumerate() {
        rows.entry(r).or_default().push((x, true, i));
    }
    for (i, &(r, x)) in clause_pos.iter().enumerate() {
        rows.entry(r).or_default().push((x, false, i));
    }
    let row_ids: Vec<i64> = rows.keys().copied().collect();
    let level_of_row: BTreeMap<i64, usize> = row_ids.iter().enumerate().map(|(i, &r)| (r, i)).collect();

    let mut levels = Vec::new();
    for &r in &row_ids {
        let mut items = rows[&r].clone();
        items.sort();
        if r.rem_euclid(2) == 0 {
            let slots = items
                .iter()
                .map(|&(_, _, ci)| clause_slot(&nf, ci, r, &var_pos))
                .collect::<Result<Vec<_>, _>>()?;
            levels.push(Level::Clauses(slots));
        } else {
            levels.push(Level::Variables(Vec::new()));
        }
    }
    // occurrences need the clause order of the neighbouring levels
    for (li, &r) in row_ids.iter().enumerate() {
        if r.rem_euclid(2) == 0 {
            continue;
        }
        let mut items = rows[&r].clone();
        items.sort();
        let neighbour = |dr: i64| -> Vec<usize> {
            match level_of_row.get(&(r + dr)).map(|&l| &levels[l]) {
                Some(Level::Clauses(cs)) => cs.iter().map(|c| c.clause).collect(),
                _ => Vec::new(),
            }
        };
        let above = neighbour(-1);
        let below = neighbour(1);
        let slots = items
            .iter()
            .map(|&(_, _, v)| VarSlot { var: v, occurrences: occurrences(&nf, v, &above, &below) })
            .collect();
        levels[li] = Level::Variables(slots);
    }
    let layout = LinkedLayout {
        formula: nf,
        origin,
        original_vars: formula.num_vars,
        original_clauses: formula.num_clauses(),
        levels,
    };
    layout.check()?;
    Ok(layout)
}

fn clause_slot(f: &CnfFormula, ci: usize, row: i64, var_pos: &[(i64, i128)]) -> Result<ClauseSlot, ReductionError> {
    let lits = &f.clauses[ci];
    let side_of = |l: &Literal| if var_pos[l.var].0 < row { Side::Above } else { Side::Below };
    let mut below: Vec<usize> = (0..lits.len()).filter(|&i| side_of(&lits[i]) == Side::Below).collect();
    let mut above: Vec<usize> = (0..lits.len()).filter(|&i| side_of(&lits[i]) == Side::Above).collect();
    below.sort_by_key(|&i| var_pos[lits[i].var].1);
    above.sort_by_key(|&i| var_pos[lits[i].var].1);
    let mut conns = vec![Connection { side: Side::Below, shift: 0 }; lits.len()];
    for (shift, &i) in below.iter().chain(&above).enumerate() {
        conns[i] = Connection { side: side_of(&lits[i]), shift };
    }
    Ok(ClauseSlot { clause: ci, connections: conns })
}

/// Occurrence list of variable `v`: clauses above and below, each in
/// clause order, interleaved so that two same-side occurrences from
/// different clauses have enough tab-free slots between them for the
/// stabilizing hooks of those clauses and of any clauses in between.
fn occurrences(f: &CnfFormula, v: usize, above: &[usize], below: &[usize]) -> Vec<OccSlot> {
    let uses = |order: &[usize], side: Side| -> Vec<(usize, usize, OccSlot)> {
        order
            .iter()
            .enumerate()
            .filter_map(|(pos, &ci)| {
                f.clauses[ci].iter().find(|l| l.var == v).map(|l| {
                    (pos, ci, OccSlot { occ: Occurrence::Literal { positive: l.positive, side }, clause: Some(ci) })
                })
            })
            .collect()
    };
    let lists = [uses(above, Side::Above), uses(below, Side::Below)];
    // slots required before the i-th entry of each list
    let need = |list: &[(usize, usize, OccSlot)], i: usize| -> usize {
        if i == 0 {
            return 0;
        }
        let between = list[i].0 - list[i - 1].0 - 1;
        1 + (4 * between).div_ceil(3)
    };
    let mut out = Vec::new();
    let mut next = [0usize; 2];
    let mut since = [usize::MAX / 2; 2];
    while next[0] < lists[0].len() || next[1] < lists[1].len() {
        let pick = (0..2).find(|&s| next[s] < lists[s].len() && since[s] >= need(&lists[s], next[s]));
        match pick {
            Some(s) => {
                out.push(lists[s][next[s]].2.clone());
                next[s] += 1;
                since[s] = 0;
                since[1 - s] += 1;
            }
            None => {
                out.push(OccSlot { occ: Occurrence::Null, clause: None });
                since[0] += 1;
                since[1] += 1;
            }
        }
    }
    if out.is_empty() {
        out.push(OccSlot { occ: Occurrence::Null, clause: None });
    }
    out
}

/// Random formula with a valid leveled drawing: `n` variables, `m`
/// clauses, every variable used. Clauses pick literals among nearby
/// variables; candidates are redrawn until the drawing validates.
pub fn random_instance(seed: u64, n: usize, m: usize) -> (CnfFormula, LeveledDrawing) {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    assert!(n >= 1 && m >= 1 && n <= 3 * m, "{n} variables cannot all occur in {m} clauses");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let span = (n + m) as i64;
    loop {
        let var_rows = rng.gen_range(1..=3i64);
        let mut taken = BTreeSet::new();
        let mut place = |rng: &mut rand_chacha::ChaCha8Rng, odd: bool| loop {
            let row = if odd { 2 * rng.gen_range(0..var_rows) + 1 } else { 2 * rng.gen_range(0..=var_rows) };
            let g = GridPos { row, x: rng.gen_range(0..span) };
            if taken.insert((g.row, g.x)) {
                return g;
            }
        };
        let vars: Vec<GridPos> = (0..n).map(|_| place(&mut rng, true)).collect();
        let clauses: Vec<GridPos> = (0..m).map(|_| place(&mut rng, false)).collect();
        let mut lits = Vec::new();
        for c in &clauses {
            let mut near: Vec<usize> = (0..n).collect();
            near.shuffle(&mut rng);
            near.sort_by_key(|&v| (vars[v].row - c.row).abs() + (vars[v].x - c.x).abs());
            near.truncate(4);
            near.shuffle(&mut rng);
            let k = [1, 2, 2, 3, 3, 3][rng.gen_range(0..6)].min(near.len());
            lits.push(near[..k].iter().map(|&v| Literal { var: v, positive: rng.gen() }).collect::<Vec<_>>());
        }
        let used: BTreeSet<usize> = lits.iter().flatten().map(|l| l.var).collect();
        if used.len() != n {
            continue;
        }
        let f = CnfFormula::new(n, lits).expect("distinct variables per clause");
        let d = LeveledDrawing { vars, clauses };
        if d.validate(&f).is_ok() {
            return (f, d);
        }
    }
}

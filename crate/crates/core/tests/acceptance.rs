//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p chainfold --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use chainfold::fold::{
    check_closure, closing_turn_matches, count_hh_contacts, embed, geometric_noncrossing_oracle, is_noncrossing,
    zigzag_turns, LatticeConfiguration, Pose,
};
use chainfold::gadgets::{
    certify_choice, certify_hook, certify_insulation, certify_variable, ell_min, FrameVariant, HookLimits, HookRole,
    HookSpec, InsulationSpec, Occurrence, Side,
};
use chainfold::model::{chain_from_segments, Color, FixedAngleChain, SegmentDecomposition};
use chainfold::reduction::{
    audit, enumerate_inner, extract_assignment, make_witness, reduce, verify_artifact, CnfFormula, CompileOptions,
    GridPos, LeveledDrawing, Literal, ReductionArtifact, ReductionError,
};
use chainfold::solvers::{solve_flatten, solve_hp, solve_pack, witness_config, SearchOptions, Status};
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(limit: Duration, t: Instant) -> Result<(), String> {
    let e = t.elapsed();
    if e > limit {
        return Err(format!("took {e:.2?}, limit {limit:?}"));
    }
    Ok(())
}

fn c1_zigzag() -> Outcome {
    let t = Instant::now();
    let mut rng = common::rng(1);
    for i in 0..1000 {
        let edges = rng.gen_range(1..=200);
        let chain = common::random_open_chain(&mut rng, edges, edges);
        let turns = zigzag_turns(&chain).map_err(|e| e.to_string())?;
        let cfg = embed(&chain, &turns, Pose::default()).map_err(|e| e.to_string())?;
        ensure!(is_noncrossing(&cfg), "chain {i} ({}) crosses", chain.angle_string());
        let monotone = cfg.points.windows(2).all(|w| w[1].x + w[1].y == w[0].x + w[0].y + 1);
        ensure!(monotone, "chain {i}: x+y not strictly increasing");
    }
    within(Duration::from_secs(5), t)?;
    Ok(format!("1000 chains, {:.2?}", t.elapsed()))
}

fn c2_bowtie() -> Outcome {
    let t = Instant::now();
    let seg = SegmentDecomposition::closed(vec![1, 2, 1, 1, 2, 1]).unwrap();
    let chain = chain_from_segments(&seg, None).unwrap();
    let mut closed = 0;
    let mut noncrossing = 0;
    let mut considered = 0;
    for (turns, cfg) in common::all_embeddings(&chain) {
        // reflection quotient: the first turn is always Left
        if turns.turns()[0] != chainfold::model::Turn::Left {
            continue;
        }
        considered += 1;
        if check_closure(&chain, &cfg) && closing_turn_matches(&chain, &turns, &cfg) {
            closed += 1;
            if is_noncrossing(&cfg) {
                noncrossing += 1;
            }
        }
    }
    ensure!(considered == 32, "{considered} sequences considered");
    ensure!(noncrossing == 0, "{noncrossing} noncrossing closed foldings");
    ensure!(closed >= 1, "no closed folding at all");
    within(Duration::from_secs(1), t)?;
    Ok(format!("{considered} sequences, {closed} close, 0 noncrossing"))
}

fn c3_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = common::rng(3);
    let mut crossing = 0;
    for i in 0..10_000 {
        let cfg: LatticeConfiguration = if i % 10 == 9 {
            let chain = common::random_staircase(&mut rng, 30);
            let turns = common::random_turns(&mut rng, chain.corner_count());
            let cfg = embed(&chain, &turns, Pose::default()).unwrap();
            if !check_closure(&chain, &cfg) {
                continue;
            }
            cfg
        } else {
            let edges = rng.gen_range(1..=30);
            let chain = common::random_open_chain(&mut rng, edges, edges);
            let turns = common::random_turns(&mut rng, chain.corner_count());
            embed(&chain, &turns, Pose::default()).unwrap()
        };
        let fast = is_noncrossing(&cfg);
        ensure!(fast == geometric_noncrossing_oracle(&cfg), "disagreement on configuration {i}: {:?}", cfg.points);
        crossing += usize::from(!fast);
    }
    within(Duration::from_secs(10), t)?;
    Ok(format!("10000 configurations ({crossing} crossing), {:.2?}", t.elapsed()))
}

fn c4_certificates() -> Outcome {
    let budget = 1 << 26;
    let limit = Duration::from_secs(60);
    let err = |e: chainfold::gadgets::GadgetError| e.to_string();

    let t = Instant::now();
    let ins = certify_insulation(&InsulationSpec { h: 3, width: 5, tabs: vec![2] }, budget).map_err(err)?;
    ensure!(ins.found.len() == 8 && ins.exact(), "insulation: {} foldings", ins.found.len());
    within(limit, t)?;

    let t = Instant::now();
    let (down, down_tabs) = certify_choice(Side::Below, budget).map_err(err)?;
    let (up, up_tabs) = certify_choice(Side::Above, budget).map_err(err)?;
    ensure!(down.found.len() == 5 && down.exact(), "choice: {} downward foldings", down.found.len());
    ensure!(up.found.len() == 5 && up.exact(), "choice: {} upward foldings", up.found.len());
    let shifts: BTreeSet<i64> = down_tabs.iter().map(|p| p.x).collect();
    let locations: BTreeSet<_> = down_tabs.iter().chain(&up_tabs).collect();
    ensure!(shifts.len() == 3, "choice: {} tab shifts", shifts.len());
    ensure!(locations.len() == 6, "choice: {} tab locations", locations.len());
    within(limit, t)?;

    let t = Instant::now();
    let lim = HookLimits { ell_min: 3, margin: 2, min_horizontal: 4 };
    let spec = HookSpec { direction: Side::Below, first: 8, middle: 3, horizontal: 5, role: HookRole::Tab };
    let hook = certify_hook(&spec, &lim, budget).map_err(err)?;
    ensure!(hook.found.len() == 1 && hook.exact(), "hook: {} foldings", hook.found.len());
    within(limit, t)?;

    let t = Instant::now();
    let occ = [
        Occurrence::Literal { positive: true, side: Side::Above },
        Occurrence::Literal { positive: true, side: Side::Below },
    ];
    let var = certify_variable(&occ, budget).map_err(err)?;
    ensure!(var.found.len() == 2 && var.exact(), "variable: {} foldings", var.found.len());
    within(limit, t)?;
    Ok("insulation 8, choice 5 down (3 shifts, 6 locations), hook 1, variable 2".into())
}

const VARIANTS: [FrameVariant; 3] = [FrameVariant::Closed, FrameVariant::Hp, FrameVariant::Square];

fn check_witness(art: &ReductionArtifact, a: &[bool]) -> Result<(), String> {
    let w = make_witness(art, a).map_err(|e| e.to_string())?;
    let report = verify_artifact(art, &w);
    ensure!(report.passed(), "{a:?} does not verify:\n{report}");
    if art.variant() == FrameVariant::Hp {
        let hp = report.checks.iter().find(|c| c.name == "hp").map(|c| c.detail.as_str());
        ensure!(hp == Some("contacts=1"), "hp check reads {hp:?}");
    }
    if art.variant() == FrameVariant::Square {
        let l = art.blueprint.inner_length;
        ensure!(art.blueprint.frame_size as u64 == 10 * l + 1, "square side {}", art.blueprint.frame_size);
        ensure!(art.total_length() <= 48 * l, "length {} > 48L", art.total_length());
    }
    let back = extract_assignment(art, &w).map_err(|e| e.to_string())?;
    ensure!(back == a, "extracted {back:?} from the witness for {a:?}");
    Ok(())
}

fn c5_witnesses() -> Outcome {
    let t = Instant::now();
    let corpus = common::corpus();
    ensure!(corpus.len() >= 20, "corpus has {} instances", corpus.len());
    ensure!(corpus.iter().any(|i| i.name == "four_clause"), "corpus lacks four_clause");
    let mut witnesses = 0;
    for inst in &corpus {
        ensure!(inst.formula.num_vars <= 6 && inst.formula.num_clauses() <= 5, "{} too large", inst.name);
        let sat = inst.formula.satisfying_assignments();
        for variant in VARIANTS {
            let art = reduce(&inst.formula, &inst.drawing, CompileOptions { variant, toy: false })
                .map_err(|e| format!("{}: {e}", inst.name))?;
            for a in &sat {
                check_witness(&art, a).map_err(|e| format!("{} {variant:?}: {e}", inst.name))?;
                witnesses += 1;
            }
            if sat.is_empty() {
                let a = vec![true; inst.formula.num_vars];
                let failure = make_witness(&art, &a);
                ensure!(
                    matches!(failure, Err(ReductionError::Unsatisfied(_))),
                    "{}: unsatisfiable instance produced {failure:?}",
                    inst.name
                );
            }
        }
    }
    let inst = corpus.iter().find(|i| i.name == "four_clause").unwrap();
    let art = reduce(&inst.formula, &inst.drawing, CompileOptions { variant: FrameVariant::Hp, toy: false }).unwrap();
    check_witness(&art, &[true, false, true, true]).map_err(|e| format!("four_clause known assignment: {e}"))?;
    within(Duration::from_secs(600), t)?;
    Ok(format!("{} instances, {witnesses} witnesses, {:.2?}", corpus.len(), t.elapsed()))
}

fn c6_audits() -> Outcome {
    let t = Instant::now();
    let mut artifacts = 0;
    for inst in common::corpus() {
        for variant in VARIANTS {
            for toy in [false, true] {
                let art = reduce(&inst.formula, &inst.drawing, CompileOptions { variant, toy })
                    .map_err(|e| format!("{}: {e}", inst.name))?;
                let report = audit(&art);
                ensure!(report.passed(), "{} {variant:?} toy={toy}:\n{report}", inst.name);
                let names: BTreeSet<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
                match variant {
                    FrameVariant::Closed => ensure!(names.contains("residues"), "no residue audit"),
                    FrameVariant::Hp => ensure!(names.contains("hp-ends"), "no hp audit"),
                    FrameVariant::Square => ensure!(names.contains("square"), "no square audit"),
                }
                if !toy {
                    let m = art.blueprint.layout.formula.num_clauses();
                    ensure!(art.blueprint.plan.limits.ell_min == ell_min(m), "{}: l_min not max(50, 16m+21)", inst.name);
                }
                if variant == FrameVariant::Hp {
                    if let Some(chain) = art.chain(5_000_000) {
                        let h = chain.colors().unwrap().iter().filter(|&&c| c == Color::H).count();
                        ensure!(h == 2, "{}: {h} H vertices", inst.name);
                    }
                }
                artifacts += 1;
            }
        }
    }
    Ok(format!("{artifacts} artifacts, {:.2?}", t.elapsed()))
}

fn c7_toy() -> Outcome {
    let t = Instant::now();
    let (p, n) = (Literal::pos, Literal::neg);
    let g = |row, x| GridPos { row, x };
    let builds = [
        (CnfFormula::new(1, vec![vec![p(0)]]).unwrap(), LeveledDrawing { vars: vec![g(1, 0)], clauses: vec![g(2, 0)] }),
        (CnfFormula::new(1, vec![vec![n(0)]]).unwrap(), LeveledDrawing { vars: vec![g(3, 0)], clauses: vec![g(2, 0)] }),
        (
            CnfFormula::new(2, vec![vec![p(0), n(1)]]).unwrap(),
            LeveledDrawing { vars: vec![g(1, 0), g(1, 1)], clauses: vec![g(2, 0)] },
        ),
    ];
    let limit = 1 << 24;
    let mut counts = Vec::new();
    for (f, d) in &builds {
        let art = reduce(f, d, CompileOptions { variant: FrameVariant::Closed, toy: true }).map_err(|e| e.to_string())?;
        let r = enumerate_inner(&art, true, limit);
        ensure!(r.complete, "enumeration incomplete after {} nodes", r.nodes);
        ensure!(!r.foldings.is_empty(), "satisfiable build has no folding");
        for a in &r.assignments {
            let a = a.as_ref().map_err(|e| format!("folding does not extract: {e}"))?;
            ensure!(f.eval(a), "folding extracts to {a:?}, which does not satisfy");
        }
        counts.push(format!("{}/{}", r.foldings.len(), r.nodes));
    }
    let f = CnfFormula::new(1, vec![vec![p(0)], vec![n(0)]]).unwrap();
    let d = LeveledDrawing { vars: vec![g(1, 0)], clauses: vec![g(0, 0), g(2, 0)] };
    let art = reduce(&f, &d, CompileOptions { variant: FrameVariant::Closed, toy: true }).map_err(|e| e.to_string())?;
    let r = enumerate_inner(&art, true, limit);
    ensure!(r.complete, "contradiction enumeration incomplete after {} nodes", r.nodes);
    ensure!(r.foldings.is_empty(), "(x)(-x) has {} foldings", r.foldings.len());
    within(Duration::from_secs(1800), t)?;
    Ok(format!("foldings/nodes {}; (x)(-x): 0/{}", counts.join(", "), r.nodes))
}

fn brute_flatten(chain: &FixedAngleChain) -> bool {
    common::all_embeddings(chain)
        .any(|(t, cfg)| check_closure(chain, &cfg) && closing_turn_matches(chain, &t, &cfg) && is_noncrossing(&cfg))
}

fn brute_hp(chain: &FixedAngleChain) -> usize {
    common::all_embeddings(chain)
        .filter(|(_, cfg)| is_noncrossing(cfg))
        .map(|(_, cfg)| count_hh_contacts(chain, &cfg).unwrap())
        .max()
        .unwrap()
}

fn brute_pack(chain: &FixedAngleChain, side: i64) -> bool {
    common::all_embeddings(chain).any(|(_, cfg)| {
        let b = cfg.bounding_box().unwrap();
        b.width() <= side && b.height() <= side && is_noncrossing(&cfg)
    })
}

fn c8_solvers() -> Outcome {
    let t = Instant::now();
    let mut rng = common::rng(8);
    let opts = SearchOptions::default();
    let (mut found, mut exhausted) = (0, 0);
    for i in 0..200 {
        match i % 3 {
            0 => {
                let chain = if rng.gen() {
                    common::random_staircase(&mut rng, 18)
                } else {
                    common::random_closed_chain(&mut rng, 18)
                };
                let r = solve_flatten(&chain, &opts).map_err(|e| e.to_string())?;
                let want = brute_flatten(&chain);
                ensure!(r.status == if want { Status::Found } else { Status::Exhausted }, "flatten {}: {:?}", chain.angle_string(), r.status);
                if want {
                    let cfg = witness_config(&chain, &r).ok_or("flatten witness does not embed")?;
                    ensure!(check_closure(&chain, &cfg) && is_noncrossing(&cfg), "flatten witness invalid");
                    found += 1;
                } else {
                    exhausted += 1;
                }
            }
            1 => {
                let edges = rng.gen_range(2..=24);
                let open = common::random_open_chain(&mut rng, edges, 18);
                let chain = common::random_colors(&mut rng, open);
                let r = solve_hp(&chain, &opts).map_err(|e| e.to_string())?;
                let want = brute_hp(&chain);
                ensure!(r.status == Status::Found, "hp status {:?}", r.status);
                ensure!(r.objective == Some(want as u64), "hp {}: {:?} vs {want}", chain.angle_string(), r.objective);
                let cfg = witness_config(&chain, &r).ok_or("hp witness does not embed")?;
                ensure!(is_noncrossing(&cfg) && count_hh_contacts(&chain, &cfg).unwrap() == want, "hp witness invalid");
                found += 1;
            }
            _ => {
                let edges = rng.gen_range(2..=24);
                let chain = common::random_open_chain(&mut rng, edges, 18);
                let side = rng.gen_range(1..=4);
                let r = solve_pack(&chain, side, &opts).map_err(|e| e.to_string())?;
                let want = brute_pack(&chain, side);
                ensure!(r.status == if want { Status::Found } else { Status::Exhausted }, "pack {} in {side}: {:?}", chain.angle_string(), r.status);
                if want {
                    let cfg = witness_config(&chain, &r).ok_or("pack witness does not embed")?;
                    let b = cfg.bounding_box().unwrap();
                    ensure!(is_noncrossing(&cfg) && b.width() <= side && b.height() <= side, "pack witness invalid");
                    found += 1;
                } else {
                    exhausted += 1;
                }
            }
        }
    }
    within(Duration::from_secs(300), t)?;
    Ok(format!("200 chains ({found} found, {exhausted} exhausted), {:.2?}", t.elapsed()))
}

fn main() {
    // libtest flags (e.g. --nocapture) are accepted and ignored
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("zig-zag embeddings of random open chains", c1_zigzag),
        ("chain [1,2,1,1,2,1] has no noncrossing closed folding", c2_bowtie),
        ("fast noncrossing check agrees with geometric oracle", c3_oracle),
        ("gadget forcing certificates", c4_certificates),
        ("reduction witnesses over the corpus", c5_witnesses),
        ("structural audits of compiled artifacts", c6_audits),
        ("toy-parameter completeness spot-check", c7_toy),
        ("solvers agree with exhaustive enumeration", c8_solvers),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

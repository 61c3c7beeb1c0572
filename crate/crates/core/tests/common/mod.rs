#![allow(dead_code)]

use std::path::PathBuf;

use chainfold::fold::{embed, Dir, Point, Pose};
use chainfold::io::{parse_dimacs, parse_drawing};
use chainfold::model::{Angle, Color, FixedAngleChain, Turn, TurnSequence};
use chainfold::reduction::{CnfFormula, LeveledDrawing};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Seed for every randomized check; `CHAINFOLD_SEED` overrides it.
pub fn seed() -> u64 {
    std::env::var("CHAINFOLD_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20_240_601)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub struct Instance {
    pub name: String,
    pub formula: CnfFormula,
    pub drawing: LeveledDrawing,
}

/// Every `<name>.cnf` with a `<name>.draw` sidecar, by name.
pub fn corpus() -> Vec<Instance> {
    let dir = corpus_dir();
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "cnf").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let cnf = std::fs::read_to_string(dir.join(format!("{name}.cnf"))).unwrap();
            let draw = std::fs::read_to_string(dir.join(format!("{name}.draw"))).unwrap();
            let formula = parse_dimacs(&cnf).unwrap_or_else(|e| panic!("{name}.cnf: {e}"));
            let drawing = parse_drawing(&draw).unwrap_or_else(|e| panic!("{name}.draw: {e}"));
            Instance { name, formula, drawing }
        })
        .collect()
}

pub fn random_turns(rng: &mut ChaCha8Rng, n: usize) -> TurnSequence {
    TurnSequence((0..n).map(|_| if rng.gen() { Turn::Left } else { Turn::Right }).collect())
}

/// Open chain with `edges` edges and at most `max_corners` corners.
pub fn random_open_chain(rng: &mut ChaCha8Rng, edges: usize, max_corners: usize) -> FixedAngleChain {
    let interior = edges.saturating_sub(1);
    let target = rng.gen_range(0..=max_corners.min(interior));
    let mut angles = vec![Angle::Straight; interior];
    let mut placed = 0;
    while placed < target {
        let i = rng.gen_range(0..interior);
        if angles[i] == Angle::Straight {
            angles[i] = Angle::Corner;
            placed += 1;
        }
    }
    FixedAngleChain::open(angles)
}

pub fn random_colors(rng: &mut ChaCha8Rng, chain: FixedAngleChain) -> FixedAngleChain {
    let n = chain.vertex_count();
    let colors = (0..n).map(|_| if rng.gen_bool(0.4) { Color::H } else { Color::P }).collect();
    chain.with_colors(colors).unwrap()
}

/// Closed chain read off a random staircase polygon: two monotone paths
/// from `(0,0)` to `(a,b)` meeting only at their ends. Always flattenable.
pub fn random_staircase(rng: &mut ChaCha8Rng, max_corners: usize) -> FixedAngleChain {
    loop {
        let a = rng.gen_range(1..=4usize);
        let b = rng.gen_range(1..=4usize);
        let walk = |rng: &mut ChaCha8Rng, first: Dir, last: Dir| {
            let mut steps = vec![Dir::E; a];
            steps.extend(vec![Dir::N; b]);
            for i in (1..steps.len()).rev() {
                steps.swap(i, rng.gen_range(0..=i));
            }
            (steps[0] == first && steps[steps.len() - 1] == last).then_some(steps)
        };
        let (Some(up), Some(down)) = (walk(rng, Dir::N, Dir::E), walk(rng, Dir::E, Dir::N)) else { continue };
        let trace = |steps: &[Dir]| {
            let mut p = Point::ORIGIN;
            let mut pts = vec![p];
            for &d in steps {
                p = p.step(d, 1);
                pts.push(p);
            }
            pts
        };
        let (pu, pd) = (trace(&up), trace(&down));
        if pu[1..pu.len() - 1].iter().any(|p| pd.contains(p)) {
            continue;
        }
        // counterclockwise: along the lower path, back along the upper one
        let mut dirs = down.clone();
        dirs.extend(up.iter().rev().map(|d| d.opposite()));
        let n = dirs.len();
        let angles: Vec<Angle> = (0..n)
            .map(|v| if dirs[(v + n - 1) % n] == dirs[v] { Angle::Straight } else { Angle::Corner })
            .collect();
        let corners = angles.iter().filter(|&&x| x == Angle::Corner).count();
        if corners <= max_corners {
            return FixedAngleChain::closed(angles).unwrap();
        }
    }
}

/// Closed chain from random segment lengths; usually not flattenable.
pub fn random_closed_chain(rng: &mut ChaCha8Rng, max_corners: usize) -> FixedAngleChain {
    let k = 2 * rng.gen_range(2..=max_corners / 2);
    let lengths: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
    let seg = chainfold::model::SegmentDecomposition::closed(lengths).unwrap();
    chainfold::model::chain_from_segments(&seg, None).unwrap()
}

/// Every turn sequence of `chain`, embedded from the default pose.
pub fn all_embeddings(chain: &FixedAngleChain) -> impl Iterator<Item = (TurnSequence, chainfold::fold::LatticeConfiguration)> + '_ {
    let c = chain.corner_count();
    (0..1u64 << c).map(move |mask| {
        let t = TurnSequence((0..c).map(|i| if mask >> i & 1 == 0 { Turn::Left } else { Turn::Right }).collect());
        let cfg = embed(chain, &t, Pose::default()).unwrap();
        (t, cfg)
    })
}

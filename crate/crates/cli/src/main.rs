//! `chainfold` command-line front end.
//!
//! Exit codes: 0 success, 1 no folding / failed witness or verification,
//! 2 usage or input error, 3 node budget exceeded.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{debug, info};

use chainfold::gadgets::{gallery, FrameVariant};
use chainfold::io;
use chainfold::model::{FixedAngleChain, TurnSequence};
use chainfold::poly::Polyline;
use chainfold::reduction::{
    audit, make_witness, random_instance, reduce, verify_artifact, CompileOptions, ReductionArtifact,
    ReductionError,
};
use chainfold::render::{render_configuration, render_fragment, render_polyline, RenderStyle};
use chainfold::search::{for_each_folding, Constraints, SearchError};
use chainfold::solvers::{solve_flatten, solve_hp, solve_pack, witness_config, SearchOptions, SolveResult, Status};

/// Longest chain written out vertex by vertex; longer artifacts use the
/// segment format.
const CHAIN_TEXT_LIMIT: u64 = 10_000_000;

#[derive(Parser)]
#[command(name = "chainfold", version, about = "Fold fixed-angle orthogonal chains and compile 3SAT into them")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Search node budget.
    #[arg(long, global = true, default_value_t = 50_000_000)]
    budget: u64,
    /// Seed for anything random (`reduce --random`).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the solvers.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Parallel solvers report the same witness as a sequential run.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Output file (or directory for `gallery`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether a closed chain has a noncrossing configuration.
    SolveFlatten { chain: PathBuf },
    /// Maximize H-H contacts of a colored open chain.
    SolveHp { chain: PathBuf },
    /// Decide whether an open chain fits in a square box.
    SolvePack {
        chain: PathBuf,
        /// Box size `WxH` in unit lengths; must be square.
        #[arg(long = "box", value_parser = parse_box)]
        bx: (i64, i64),
    },
    /// Compile a leveled 3SAT instance into a chain artifact.
    Reduce {
        /// DIMACS CNF file.
        #[arg(required_unless_present = "random")]
        formula: Option<PathBuf>,
        /// Leveled drawing sidecar (`v`/`c` lines).
        #[arg(required_unless_present = "random")]
        drawing: Option<PathBuf>,
        #[arg(long, default_value = "closed")]
        variant: FrameVariant,
        /// Shrink gadget constants for enumeration; forfeits forcing.
        #[arg(long)]
        toy_parameters: bool,
        /// Random instance `N,M` (variables, clauses) from `--seed`.
        #[arg(long, value_parser = parse_pair, conflicts_with_all = ["formula", "drawing"])]
        random: Option<(usize, usize)>,
    },
    /// Turn sequence of the intended folding for a satisfying assignment.
    Witness { artifact: PathBuf, assignment: PathBuf },
    /// Check a turn sequence against an artifact.
    Verify { artifact: PathBuf, turns: PathBuf },
    /// SVG of a configuration dump or an artifact folding.
    Render {
        /// Configuration dump, or artifact JSON.
        input: PathBuf,
        /// Chain file supplying H/P colors for a configuration.
        #[arg(long)]
        chain: Option<PathBuf>,
        /// Turns to embed an artifact with (default: its reference folding).
        #[arg(long)]
        turns: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        scale: u32,
        #[arg(long)]
        labels: bool,
    },
    /// List every noncrossing folding of a chain, first vertex at the origin
    /// heading east.
    Enumerate { chain: PathBuf },
    /// Render each gadget's intended foldings to `<out>/<name>.svg`.
    Gallery,
}

/// Failure with its exit code.
struct Fail(u8, String);

impl Fail {
    fn usage(msg: impl Into<String>) -> Self {
        Fail(2, msg.into())
    }
}

type Res = Result<u8, Fail>;

fn parse_box(s: &str) -> Result<(i64, i64), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    let w: i64 = w.parse().map_err(|_| format!("bad width `{w}`"))?;
    let h: i64 = h.parse().map_err(|_| format!("bad height `{h}`"))?;
    if w <= 0 || h <= 0 {
        return Err("box sides must be positive".into());
    }
    Ok((w, h))
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected N,M")?;
    Ok((a.parse().map_err(|_| format!("bad count `{a}`"))?, b.parse().map_err(|_| format!("bad count `{b}`"))?))
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> Result<T, io::ParseError>) -> Result<T, Fail> {
    parse(&read(path)?).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Fail::usage(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Fail(2, e.to_string())),
    }
}

fn options(g: &Global) -> SearchOptions {
    SearchOptions { budget: g.budget, parallel: g.parallel, deterministic: g.deterministic, ..SearchOptions::default() }
}

fn solved(g: &Global, r: SolveResult, chain: &FixedAngleChain, none: &str) -> Res {
    info!("{} search nodes", r.nodes);
    match r.status {
        Status::Found => {
            let w = r.witness.as_ref().expect("found has a witness");
            if let Some(v) = r.objective {
                println!("contacts={v}");
            }
            emit(&g.out, &io::emit_turns(w))?;
            if let Some(cfg) = witness_config(chain, &r) {
                debug!("configuration:\n{}", io::emit_configuration(&cfg));
            }
            Ok(0)
        }
        Status::Exhausted => {
            println!("{none}");
            Ok(1)
        }
        Status::BudgetExceeded => Err(Fail(3, format!("node budget of {} exceeded", g.budget))),
    }
}

fn write_artifact(g: &Global, art: &ReductionArtifact) -> Result<(), Fail> {
    let Some(out) = &g.out else {
        return emit(&None, &io::emit_artifact(art));
    };
    emit(&g.out, &io::emit_artifact(art))?;
    let (ext, text) = match art.chain(CHAIN_TEXT_LIMIT) {
        Some(c) => ("chain", io::emit_chain(&c)),
        None => ("segments", io::emit_segments(&art.segments)),
    };
    let side = out.with_extension(ext);
    fs::write(&side, text).map_err(|e| Fail::usage(format!("{}: {e}", side.display())))?;
    eprintln!("wrote {} and {}", out.display(), side.display());
    Ok(())
}

fn run(cli: Cli) -> Res {
    let g = &cli.global;
    match cli.cmd {
        Cmd::SolveFlatten { chain } => {
            let c = load(&chain, io::parse_chain)?;
            let r = solve_flatten(&c, &options(g)).map_err(|e| Fail::usage(e.to_string()))?;
            solved(g, r, &c, "no noncrossing closed configuration")
        }
        Cmd::SolveHp { chain } => {
            let c = load(&chain, io::parse_chain)?;
            let r = solve_hp(&c, &options(g)).map_err(|e| Fail::usage(e.to_string()))?;
            solved(g, r, &c, "no noncrossing configuration")
        }
        Cmd::SolvePack { chain, bx: (w, h) } => {
            if w != h {
                return Err(Fail::usage(format!("packing box must be square, got {w}x{h}")));
            }
            let c = load(&chain, io::parse_chain)?;
            let r = solve_pack(&c, w, &options(g)).map_err(|e| Fail::usage(e.to_string()))?;
            solved(g, r, &c, &format!("does not fit in a {w}x{h} box"))
        }
        Cmd::Reduce { formula, drawing, variant, toy_parameters, random } => {
            let (f, d) = match random {
                Some((n, m)) => {
                    if n == 0 || m == 0 || n > 3 * m {
                        return Err(Fail::usage(format!("cannot use {n} variables in {m} clauses")));
                    }
                    random_instance(g.seed, n, m)
                }
                None => {
                    let (fp, dp) = (formula.expect("required by clap"), drawing.expect("required by clap"));
                    (load(&fp, io::parse_dimacs)?, load(&dp, io::parse_drawing)?)
                }
            };
            let art = reduce(&f, &d, CompileOptions { variant, toy: toy_parameters }).map_err(|e| Fail::usage(e.to_string()))?;
            info!(
                "{} segments, inner length {}, total length {}",
                art.segments.lengths.len(),
                art.blueprint.inner_length,
                art.total_length()
            );
            let report = audit(&art);
            debug!("audit:\n{report}");
            write_artifact(g, &art)?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Cmd::Witness { artifact, assignment } => {
            let art = load(&artifact, io::parse_artifact)?;
            let a = load(&assignment, io::parse_assignment)?;
            match make_witness(&art, &a) {
                Ok(t) => {
                    emit(&g.out, &io::emit_turns(&t))?;
                    Ok(0)
                }
                Err(e @ ReductionError::Unsatisfied(_)) => {
                    println!("no witness: {e}");
                    Ok(1)
                }
                Err(e) => Err(Fail::usage(e.to_string())),
            }
        }
        Cmd::Verify { artifact, turns } => {
            let art = load(&artifact, io::parse_artifact)?;
            let t = load(&turns, io::parse_turns)?;
            let report = verify_artifact(&art, &t);
            emit(&g.out, &report.to_string())?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Cmd::Render { input, chain, turns, scale, labels } => {
            let style = RenderStyle { scale, show_labels: labels, ..RenderStyle::default() };
            let text = read(&input)?;
            let svg = if text.trim_start().starts_with('{') {
                let art = io::parse_artifact(&text).map_err(|e| Fail::usage(format!("{}: {e}", input.display())))?;
                let pl = match turns {
                    None => art.reference.clone(),
                    Some(tp) => artifact_polyline(&art, &load(&tp, io::parse_turns)?)?,
                };
                render_polyline(&pl, art.variant() == FrameVariant::Hp, &style)
            } else {
                let cfg = io::parse_configuration(&text).map_err(|e| Fail::usage(format!("{}: {e}", input.display())))?;
                let c = chain.map(|p| load(&p, io::parse_chain)).transpose()?;
                render_configuration(c.as_ref(), &cfg, &style)
            };
            emit(&g.out, &svg.map_err(|e| Fail::usage(e.to_string()))?)?;
            Ok(0)
        }
        Cmd::Enumerate { chain } => {
            let c = load(&chain, io::parse_chain)?;
            let mut listing = String::new();
            let mut count = 0u64;
            let res = for_each_folding(&c, &Constraints::default(), g.budget, |t, _| {
                count += 1;
                listing.push_str(&io::emit_turns(t));
                true
            });
            match res {
                Ok(nodes) => {
                    info!("{nodes} search nodes");
                    emit(&g.out, &listing)?;
                    eprintln!("{count} foldings");
                    Ok(if count > 0 { 0 } else { 1 })
                }
                Err(SearchError::BudgetExceeded { budget, found }) => {
                    Err(Fail(3, format!("node budget of {budget} exceeded after {found} foldings")))
                }
                Err(e) => Err(Fail::usage(e.to_string())),
            }
        }
        Cmd::Gallery => {
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("gallery"));
            fs::create_dir_all(&dir).map_err(|e| Fail::usage(format!("{}: {e}", dir.display())))?;
            let style = RenderStyle { scale: 8, show_labels: true, ..RenderStyle::default() };
            for (name, frag) in gallery() {
                let svg = render_fragment(&frag, &style).map_err(|e| Fail(2, e.to_string()))?;
                let path = dir.join(format!("{name}.svg"));
                fs::write(&path, svg).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))?;
                println!("{} ({} foldings)", path.display(), frag.intended.len());
            }
            Ok(0)
        }
    }
}

fn artifact_polyline(art: &ReductionArtifact, turns: &TurnSequence) -> Result<Polyline, Fail> {
    let pts = Polyline::embed(&art.segments, turns, art.pose).map_err(|e| Fail::usage(e.to_string()))?;
    Ok(Polyline { topology: chainfold::model::Topology::Open, points: pts })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CHAINFOLD_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

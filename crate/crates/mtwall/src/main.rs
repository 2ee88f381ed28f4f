use clap::{Args, Parser, Subcommand, ValueEnum};
use mtwall::{load_path, run, Command, Failure, Format, Params};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Filtration, strata with PF data, direction map and illegal turns.
    Analyze,
    /// Train track and improvement conditions (--bound: path length).
    Verify,
    /// Mapping torus of φ^L and its Euler characteristic.
    Torus,
    /// Ball of --radius around the identity in the universal cover.
    Ball,
    /// Canonical wall: busts, nuclei, cocycle, zones (--bound: max period).
    Wall,
    /// Wall approximation inside --radius: acyclicity and distortion.
    Approx,
    /// Crossing parity against sides on seeded sampled geodesics.
    Cut,
    /// Dual cube complex of the canonical wall and --level walls.
    Dual,
    /// Periodic Nielsen paths (--bound: length, --iter: period).
    Nielsen,
    /// Periodic conjugacy classes (--bound: word length, --iter: power).
    Atoroidal,
    /// Orbit, preimages, tunnel and periodic points of --point.
    Flow,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Fmt {
    Json,
    Dot,
}

#[derive(Args, Debug)]
struct Opts {
    /// Input map (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Directory receiving <command>.json or <command>.dot instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tunnel length or torus power.
    #[arg(short = 'L', global = true)]
    l: Option<usize>,
    /// Ball or analysis radius.
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Hyperbolicity constant used by cut.
    #[arg(long, global = true, default_value_t = 1.0)]
    delta: f64,
    /// Search bound (meaning depends on the command).
    #[arg(long, global = true)]
    bound: Option<usize>,
    /// Iteration depth (meaning depends on the command).
    #[arg(long, global = true)]
    iter: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Json)]
    format: Fmt,
    /// Seed for sampled pairs, recorded in the output header.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sampled pairs for approx and cut.
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,
    /// Point as edge:num/den, e.g. a:2/3.
    #[arg(long, global = true)]
    point: Option<String>,
    /// Height of a level wall for dual (repeatable).
    #[arg(long = "level", global = true, allow_negative_numbers = true)]
    levels: Vec<i64>,
    /// Leave the canonical wall out of dual.
    #[arg(long, global = true)]
    no_canonical: bool,
}

#[derive(Parser, Debug)]
#[command(
    name = "mtwall",
    version,
    about = "Analyses of graph self-maps, mapping tori and immersed walls"
)]
struct Top {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

fn command(c: Cmd) -> Command {
    match c {
        Cmd::Analyze => Command::Analyze,
        Cmd::Verify => Command::Verify,
        Cmd::Torus => Command::Torus,
        Cmd::Ball => Command::Ball,
        Cmd::Wall => Command::Wall,
        Cmd::Approx => Command::Approx,
        Cmd::Cut => Command::Cut,
        Cmd::Dual => Command::Dual,
        Cmd::Nielsen => Command::Nielsen,
        Cmd::Atoroidal => Command::Atoroidal,
        Cmd::Flow => Command::Flow,
    }
}

fn main() -> ExitCode {
    let top = match Top::try_parse() {
        Ok(t) => t,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let o = top.opts;
    let cmd = command(top.command);
    let params = Params {
        l: o.l,
        radius: o.radius,
        delta: o.delta,
        bound: o.bound,
        iter: o.iter,
        seed: o.seed,
        samples: o.samples,
        point: o.point,
        levels: o.levels,
        no_canonical: o.no_canonical,
        format: if o.format == Fmt::Dot {
            Format::Dot
        } else {
            Format::Json
        },
    };
    let Some(input) = o.input else {
        eprintln!("mtwall {}: --input is required", cmd.name());
        return ExitCode::from(2);
    };
    let result = load_path(&input)
        .map_err(Failure::from)
        .and_then(|l| run(cmd, &l, &params));
    let out = match result {
        Ok(out) => out,
        Err(f) => {
            eprintln!("mtwall {}: {f}", cmd.name());
            return ExitCode::from(f.exit_code() as u8);
        }
    };
    let written = match &o.out {
        Some(dir) => {
            let ext = if params.format == Format::Dot { "dot" } else { "json" };
            std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(dir.join(format!("{}.{ext}", cmd.name())), &out.text))
        }
        None => std::io::stdout().lock().write_all(out.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("mtwall {}: cannot write output: {e}", cmd.name());
        return ExitCode::from(2);
    }
    ExitCode::from(u8::from(out.flagged))
}

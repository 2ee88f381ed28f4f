//! The subcommands.
//!
//! Each command reads what it needs from [`Params`], falling back to the
//! documented defaults, and returns a report plus a flag telling the binary
//! whether an invariant was violated or a witness was found.

use crate::{dot, fjson, header, qjson, Failure, Format, Loaded};
use mtwall_core::ball::{BallComplex, BallConfig, NONE};
use mtwall_core::cutting::{
    crossing_parity, cut_check, deviation_classify, dual_cube_complex, geodesic_within, CuttingConfig, Deviation,
};
use mtwall_core::flow::{self, PointX};
use mtwall_core::graph::{direction_map, illegal_turns, GraphMap};
use mtwall_core::rational;
use mtwall_core::strata::{
    atoroidal_heuristic, compute_maximal_filtration, edge_weights, find_nielsen_paths, strata, verify_improved,
    verify_rtt, Filtration, ImprovedBounds, Status, Stratum, VerificationReport,
};
use mtwall_core::torus::build_torus_l;
use mtwall_core::walls::{
    approximate, build_immersed_wall, bust_label, bust_separation_check, canonical_busts, distortion_report,
    exceptional_zones, lift_wall, lift_wall_seeds, Atom, BustSet, ImmersedWall, NucleusType, SideAssignment,
    TraceOptions, WallTrace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// A subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Filtration, strata, PF data and illegal turns.
    Analyze,
    /// Train track and improvement conditions.
    Verify,
    /// Cells of the mapping torus of `φ^L`.
    Torus,
    /// A ball in the universal cover.
    Ball,
    /// Canonical immersed wall: busts, nuclei, cocycle, zones, separation.
    Wall,
    /// Wall trace approximation, acyclicity and distortion.
    Approx,
    /// Crossing parity against side assignment on sampled geodesics.
    Cut,
    /// Dual cube complex of several walls.
    Dual,
    /// Periodic Nielsen paths.
    Nielsen,
    /// Bounded search for periodic conjugacy classes.
    Atoroidal,
    /// Orbit, preimages, tunnel and periodic points of a point.
    Flow,
}

impl Command {
    /// Name used on the command line and in the schema id.
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Verify => "verify",
            Command::Torus => "torus",
            Command::Ball => "ball",
            Command::Wall => "wall",
            Command::Approx => "approx",
            Command::Cut => "cut",
            Command::Dual => "dual",
            Command::Nielsen => "nielsen",
            Command::Atoroidal => "atoroidal",
            Command::Flow => "flow",
        }
    }

    fn supports_dot(self) -> bool {
        matches!(self, Command::Ball | Command::Wall | Command::Dual | Command::Flow)
    }
}

/// Command parameters. `None` selects the per-command default.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    /// Tunnel length or power `L`.
    pub l: Option<usize>,
    /// Ball or analysis radius.
    pub radius: Option<f64>,
    /// Hyperbolicity constant for deviation checks.
    pub delta: f64,
    /// Search bound (path length, word length or period).
    pub bound: Option<usize>,
    /// Iterate bound for Nielsen and conjugacy searches.
    pub iter: Option<usize>,
    /// Seed for every random choice.
    pub seed: u64,
    /// Number of sampled pairs.
    pub samples: usize,
    /// Point for `flow`, as `edge:num/den`.
    pub point: Option<String>,
    /// Heights of horizontal level walls for `dual`.
    pub levels: Vec<i64>,
    /// Leave the canonical wall out of `dual`.
    pub no_canonical: bool,
    /// Output format.
    pub format: Format,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            l: None,
            radius: None,
            delta: 1.0,
            bound: None,
            iter: None,
            seed: 0,
            samples: 20,
            point: None,
            levels: Vec::new(),
            no_canonical: false,
            format: Format::Json,
        }
    }
}

/// What a command produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    /// Rendered report (JSON or DOT).
    pub text: String,
    /// The JSON report, also when DOT was requested.
    pub report: Value,
    /// An invariant was violated or a witness was found.
    pub flagged: bool,
}

struct Ctx<'a> {
    phi: &'a GraphMap,
    filt: Filtration,
    from_input: bool,
    p: &'a Params,
}

impl Ctx<'_> {
    fn strata(&self) -> Result<Vec<Stratum>, Failure> {
        Ok(strata(self.phi, &self.filt)?)
    }

    fn weights(&self) -> Result<Vec<f64>, Failure> {
        Ok(edge_weights(self.phi.graph(), &self.strata()?))
    }

    fn name(&self, k: usize) -> String {
        self.phi.graph().name(2 * k).to_string()
    }
}

/// Runs `cmd` on a loaded map.
pub fn run(cmd: Command, loaded: &Loaded, p: &Params) -> Result<Output, Failure> {
    if p.format == Format::Dot && !cmd.supports_dot() {
        return Err(Failure::Usage(format!("{} has no DOT output", cmd.name())));
    }
    if !(p.delta.is_finite() && p.delta >= 0.0) {
        return Err(Failure::Usage("--delta must be finite and nonnegative".into()));
    }
    if let Some(r) = p.radius {
        if !(r.is_finite() && r > 0.0) {
            return Err(Failure::Usage("--radius must be positive".into()));
        }
    }
    if p.l == Some(0) {
        return Err(Failure::Usage("-L must be at least 1".into()));
    }
    let ctx = Ctx {
        phi: &loaded.phi,
        filt: loaded
            .filtration
            .clone()
            .unwrap_or_else(|| compute_maximal_filtration(&loaded.phi)),
        from_input: loaded.filtration.is_some(),
        p,
    };
    let (body, dot_text, flagged) = match cmd {
        Command::Analyze => analyze(&ctx)?,
        Command::Verify => verify(&ctx)?,
        Command::Torus => torus(&ctx)?,
        Command::Ball => ball(&ctx)?,
        Command::Wall => wall(&ctx)?,
        Command::Approx => approx(&ctx)?,
        Command::Cut => cut(&ctx)?,
        Command::Dual => dual(&ctx)?,
        Command::Nielsen => nielsen(&ctx)?,
        Command::Atoroidal => atoroidal(&ctx)?,
        Command::Flow => flow_cmd(&ctx)?,
    };
    let mut report = header(cmd.name(), p.seed);
    if let (Value::Object(h), Value::Object(b)) = (&mut report, body) {
        h.extend(b);
    }
    let text = match (p.format, dot_text) {
        (Format::Dot, Some(d)) => d,
        _ => crate::to_pretty(&report),
    };
    Ok(Output { text, report, flagged })
}

type Res = Result<(Value, Option<String>, bool), Failure>;

fn stratum_json(ctx: &Ctx, s: &Stratum) -> Value {
    json!({
        "index": s.index,
        "edges": s.edges.iter().map(|&k| ctx.name(k)).collect::<Vec<_>>(),
        "kind": s.kind.label(),
        "lambda": s.lambda.map_or(Value::Null, fjson),
        "weights": s.weights.iter().map(|&w| fjson(w)).collect::<Vec<_>>(),
        "matrix": s.matrix,
    })
}

fn analyze(ctx: &Ctx) -> Res {
    let g = ctx.phi.graph();
    let st = ctx.strata()?;
    let dmap = direction_map(ctx.phi);
    let turns: Vec<Value> = illegal_turns(ctx.phi)
        .iter()
        .map(|t| json!([g.name(t.a), g.name(t.b)]))
        .collect();
    let dmap: serde_json::Map<String, Value> = dmap
        .iter()
        .enumerate()
        .map(|(d, &e)| (g.name(d).to_string(), json!(g.name(e))))
        .collect();
    let body = json!({
        "filtration": if ctx.from_input { "input" } else { "maximal" },
        "strata": st.iter().map(|s| stratum_json(ctx, s)).collect::<Vec<_>>(),
        "edge_weights": edge_weights(g, &st).into_iter().map(fjson).collect::<Vec<_>>(),
        "direction_map": dmap,
        "illegal_turns": turns,
    });
    Ok((body, None, false))
}

fn report_json(r: &VerificationReport) -> Value {
    let items: Vec<Value> = r
        .items
        .iter()
        .map(|a| {
            let (status, extra) = match &a.status {
                Status::Verified => ("verified", Value::Null),
                Status::Violated(w) => ("violated", json!(w)),
                Status::UnknownUpToBound(b) => ("unknown", json!(b)),
            };
            json!({ "id": a.id, "status": status, "detail": extra, "note": a.note })
        })
        .collect();
    json!({ "ok": r.ok(), "items": items })
}

fn verify(ctx: &Ctx) -> Res {
    let bound = ctx.p.bound.unwrap_or(6);
    let rtt = verify_rtt(ctx.phi, &ctx.filt, bound);
    let mut ib = ImprovedBounds::default();
    if let Some(i) = ctx.p.iter {
        ib.nielsen_iter = i;
    }
    let imp = verify_improved(ctx.phi, &ctx.filt, ib);
    let flagged = !rtt.ok() || !imp.ok();
    let body = json!({
        "path_bound": bound,
        "nielsen_len": ib.nielsen_len,
        "nielsen_iter": ib.nielsen_iter,
        "rtt": report_json(&rtt),
        "improved": report_json(&imp),
    });
    Ok((body, None, flagged))
}

fn torus(ctx: &Ctx) -> Res {
    let l = ctx.p.l.unwrap_or(1);
    let t = build_torus_l(ctx.phi, l)?;
    let chi = t.euler_characteristic();
    let closed = t.boundaries_closed(ctx.phi);
    let cells: Vec<String> = (0..t.two_cells.len()).map(|k| t.render(ctx.phi, k)).collect();
    let body = json!({
        "power": t.power,
        "zero_cells": t.zero_cells,
        "vertical_cells": t.vertical_cells,
        "horizontal_cells": t.horizontal_cells,
        "two_cells": cells,
        "euler_characteristic": chi,
        "boundaries_closed": closed,
    });
    Ok((body, None, chi != 0 || !closed))
}

fn ball_json(b: &BallComplex) -> Value {
    let g = b.phi().graph();
    let vertices: Vec<Value> = (0..b.vertex_count() as u32)
        .map(|v| json!({ "id": v, "height": b.vertex_height(v), "word": g.word(b.word(v)), "dist": fjson(b.dist_from_base(v)) }))
        .collect();
    let vertical: Vec<Value> = b
        .vedges()
        .iter()
        .enumerate()
        .map(|(i, e)| json!({ "id": i, "src": e.src, "dst": e.dst, "edge": g.name(2 * e.edge), "weight": fjson(b.vedge_weight(i as u32)) }))
        .collect();
    let horizontal: Vec<Value> = (0..b.vertex_count() as u32)
        .filter(|&v| b.up(v) != NONE)
        .map(|v| json!([v, b.up(v)]))
        .collect();
    let cells: Vec<Value> = (0..b.vertical_count() as u32)
        .filter(|&i| b.has_cell(i))
        .map(|i| json!({ "bottom": i, "top": b.top(i).iter().map(|&(e, f)| json!([e, f])).collect::<Vec<_>>() }))
        .collect();
    json!({
        "radius": fjson(b.radius()),
        "base": b.base(),
        "truncated": b.truncated(),
        "upward_only": b.upward_only(),
        "vertices": vertices,
        "vertical": vertical,
        "horizontal": horizontal,
        "cells": cells,
    })
}

fn build_ball(ctx: &Ctx, radius: f64) -> Result<BallComplex, Failure> {
    Ok(BallComplex::around_identity(
        ctx.phi,
        &ctx.weights()?,
        BallConfig::radius(radius),
    )?)
}

fn ball(ctx: &Ctx) -> Res {
    let b = build_ball(ctx, ctx.p.radius.unwrap_or(3.0))?;
    let d = (ctx.p.format == Format::Dot).then(|| dot::ball(&b));
    Ok((ball_json(&b), d, false))
}

struct WallSetup {
    st: Vec<Stratum>,
    busts: BustSet,
    wall: ImmersedWall,
}

fn canonical_wall(ctx: &Ctx) -> Result<WallSetup, Failure> {
    let st = ctx.strata()?;
    let cb = canonical_busts(ctx.phi, &st, ctx.p.bound.unwrap_or(6))?;
    let l = ctx.p.l.unwrap_or(cb.lcm);
    let busts = BustSet::new(ctx.phi, &cb.as_points(), l)?;
    busts.check_exponential(&st)?;
    let wall = build_immersed_wall(ctx.phi, &busts, None)?;
    Ok(WallSetup { st, busts, wall })
}

fn nucleus_type(t: NucleusType) -> &'static str {
    match t {
        NucleusType::PrimarySecondary => "primary-secondary",
        NucleusType::SecondarySecondary => "secondary-secondary",
        NucleusType::VertexSubgraph => "vertex-subgraph",
    }
}

fn wall(ctx: &Ctx) -> Res {
    let WallSetup { st, busts, wall } = canonical_wall(ctx)?;
    let _ = st;
    let g = ctx.phi.graph();
    let primaries: Vec<Value> = busts
        .primaries()
        .iter()
        .enumerate()
        .map(|(i, (e, s))| json!({ "index": i, "edge": ctx.name(*e), "s": qjson(s), "periodic": busts.is_periodic(i) }))
        .collect();
    let secondaries: Vec<Value> = busts
        .secondaries()
        .iter()
        .map(|s| json!({ "edge": ctx.name(s.edge), "s": qjson(&s.s), "primary": s.primary, "forward": s.forward }))
        .collect();
    let ef = wall.eflat();
    let eflat: serde_json::Map<String, Value> = (0..g.edge_count())
        .map(|k| {
            let list: Vec<Value> = ef
                .busts(k)
                .iter()
                .map(|b| json!({ "s": qjson(&b.s), "role": bust_label(b) }))
                .collect();
            (ctx.name(k), Value::Array(list))
        })
        .collect();
    let classes = ef.classify()?;
    let nuclei: Vec<Value> = ef
        .nuclei()
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let (_, ty, trivial) = classes[i];
            json!({
                "index": i,
                "type": nucleus_type(ty),
                "trivial": trivial,
                "vertices": n.vertices.iter().map(|&v| g.vertex_names()[v].clone()).collect::<Vec<_>>(),
                "segments": n.segments.iter().map(|&(e, idx)| json!([ctx.name(e), idx])).collect::<Vec<_>>(),
                "extra": n.extra,
            })
        })
        .collect();
    let cocycle = wall.cocycle_check(ctx.phi);
    let nontrivial = cocycle.holonomy.iter().filter(|h| h.nontrivial).count();
    let zones = exceptional_zones(ctx.phi, &wall)?;
    let sep = bust_separation_check(ctx.phi, &busts, &[])?;
    let twisted = wall.edges().iter().filter(|e| e.twist).count();
    let flagged = !cocycle.ok() || !sep.ok();
    let body = json!({
        "l": busts.l(),
        "primaries": primaries,
        "secondaries": secondaries,
        "eflat": eflat,
        "nuclei": nuclei,
        "graph": {
            "nodes": wall.nodes().len(),
            "edges": wall.edges().len(),
            "twisted_edges": twisted,
            "components": wall.component_count(),
            "tunnels": wall.tunnel_count(),
        },
        "cocycle": {
            "ok": cocycle.ok(),
            "cell_counts": cocycle.cell_counts,
            "odd_cells": cocycle.odd_cells.iter().map(|&k| ctx.name(k)).collect::<Vec<_>>(),
            "cycles": cocycle.holonomy.len(),
            "nontrivial_holonomy": nontrivial,
        },
        "zones": zones.iter().map(|z| json!({
            "nucleus": z.nucleus, "exceptional": z.exceptional, "degenerate": z.degenerate, "narrow": z.narrow,
        })).collect::<Vec<_>>(),
        "separation": { "ok": sep.ok(), "first_failure": sep.first_failure.map(|(a, b)| json!([a, b])) },
    });
    let d = (ctx.p.format == Format::Dot).then(|| dot::wall(ctx.phi, &wall));
    Ok((body, d, flagged))
}

/// Analysis radius and the larger radius of the ball it is measured in.
fn radii(ctx: &Ctx, l: usize) -> (f64, f64) {
    let r = ctx.p.radius.unwrap_or(3.0 * l as f64);
    (r, r + 2.0)
}

fn canonical_trace(ctx: &Ctx) -> Result<(WallSetup, BallComplex, WallTrace, f64), Failure> {
    let setup = canonical_wall(ctx)?;
    let (r, big) = radii(ctx, setup.busts.l());
    let b = build_ball(ctx, big)?;
    let tr = lift_wall(&setup.wall, &b, Atom::V(b.base()), TraceOptions::default())?;
    Ok((setup, b, tr, r))
}

fn trace_json(tr: &WallTrace) -> Value {
    let (v, s, d, n) = tr.kind_counts();
    json!({ "atoms": tr.atoms().len(), "vertices": v, "segments": s, "extras": d, "tunnel_points": n, "truncated": tr.truncated() })
}

fn approx(ctx: &Ctx) -> Res {
    let (setup, b, tr, r) = canonical_trace(ctx)?;
    let a = approximate(&tr, &b, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.p.seed);
    let dist = distortion_report(&a, &b, r, ctx.p.samples, |n| rng.gen_range(0..n));
    let mut bands: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
    for (band, size) in tr.knockouts(&b) {
        let e = bands.entry(band).or_default();
        e.0 += 1;
        e.1 += size;
    }
    let knock: Vec<Value> = bands
        .iter()
        .map(|(band, (n, atoms))| json!({ "band": band, "pieces": n, "atoms": atoms }))
        .collect();
    let body = json!({
        "l": setup.busts.l(),
        "radius": fjson(r),
        "ball_radius": fjson(b.radius()),
        "trace": trace_json(&tr),
        "knockouts": knock,
        "approximation": {
            "nodes": a.nodes.len(),
            "edges": a.edges.len(),
            "components": a.components,
            "betti1": a.betti1(),
            "acyclic": a.is_acyclic(),
            "truncated_pieces": a.truncated_pieces,
        },
        "distortion": { "pairs": dist.pairs, "max_ratio": fjson(dist.max_ratio), "max_difference": fjson(dist.max_difference) },
    });
    Ok((body, None, !a.is_acyclic()))
}

fn sides_json(s: &SideAssignment) -> Value {
    let counts = [0u8, 1].map(|c| s.side.iter().filter(|&&x| x == Some(c)).count());
    json!({ "classes": s.classes, "regions": s.regions, "consistent": s.consistent, "side_sizes": counts })
}

fn cut(ctx: &Ctx) -> Res {
    let (_, b, tr, r) = canonical_trace(ctx)?;
    let cd = tr.crossings(&b, r);
    let (checked, odd) = cd.cell_parities(&b);
    let sides = cd.side_assignment(&b);
    let cfg = CuttingConfig {
        delta: ctx.p.delta,
        ..CuttingConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.p.seed);
    let sided: Vec<u32> = (0..b.vertex_count() as u32)
        .filter(|&v| sides.side[v as usize].is_some())
        .collect();
    let mut samples = Vec::new();
    let mut mismatches = 0usize;
    if sides.classes == 2 && sides.consistent && sided.len() >= 2 {
        for _ in 0..ctx.p.samples {
            let x = sided[rng.gen_range(0..sided.len())];
            let y = sided[rng.gen_range(0..sided.len())];
            let path = geodesic_within(&b, x, y, r)?;
            let (count, odd_parity) = crossing_parity(&b, &cd, &path)?;
            let separated = cut_check(&sides, x, y)?;
            let (run, verdict) = deviation_classify(&b, &path, &cfg)?;
            if odd_parity != separated {
                mismatches += 1;
            }
            samples.push(json!({
                "x": x, "y": y, "length": path.len() - 1, "crossings": count,
                "separated": separated, "agree": odd_parity == separated,
                "leaflike_run": run, "leaflike": matches!(verdict, Deviation::Leaflike { .. }),
            }));
        }
    }
    let flagged = !odd.is_empty() || sides.classes != 2 || !sides.consistent || mismatches > 0;
    let body = json!({
        "radius": fjson(r),
        "delta": fjson(ctx.p.delta),
        "trace": trace_json(&tr),
        "cells_checked": checked,
        "odd_cells": odd.len(),
        "sides": sides_json(&sides),
        "samples": samples,
        "mismatches": mismatches,
    });
    Ok((body, None, flagged))
}

fn dual(ctx: &Ctx) -> Res {
    let levels = if ctx.p.levels.is_empty() {
        vec![0]
    } else {
        ctx.p.levels.clone()
    };
    let canonical = if ctx.p.no_canonical {
        None
    } else {
        Some(canonical_wall(ctx)?)
    };
    let l = canonical.as_ref().map_or(ctx.p.l.unwrap_or(3), |c| c.busts.l());
    let (r, big) = radii(ctx, l);
    let b = build_ball(ctx, big)?;
    let mut walls = Vec::new();
    let mut sides = Vec::new();
    if let Some(c) = &canonical {
        let tr = lift_wall(&c.wall, &b, Atom::V(b.base()), TraceOptions::default())?;
        sides.push(tr.crossings(&b, r).side_assignment(&b));
        walls.push(json!({ "kind": "canonical", "l": l }));
    }
    let level_wall = build_immersed_wall(ctx.phi, &BustSet::new(ctx.phi, &[], 1)?, None)?;
    for &h in &levels {
        let seeds: Vec<Atom> = (0..b.vertex_count() as u32)
            .filter(|&v| b.vertex_height(v) == h)
            .map(Atom::V)
            .collect();
        if seeds.is_empty() {
            return Err(Failure::Usage(format!("no ball vertex at height {h}")));
        }
        let tr = lift_wall_seeds(&level_wall, &b, &seeds, TraceOptions::default())?;
        sides.push(tr.crossings(&b, r).side_assignment(&b));
        walls.push(json!({ "kind": "level", "height": h }));
    }
    for (w, s) in walls.iter_mut().zip(&sides) {
        if let Value::Object(m) = w {
            m.insert("sides".into(), sides_json(s));
        }
    }
    let d = dual_cube_complex(&sides)?;
    let vertex_labels: Vec<String> = d
        .vertices
        .iter()
        .map(|v| v.iter().map(|s| char::from(b'0' + s)).collect())
        .collect();
    let body = json!({
        "radius": fjson(r),
        "walls": walls,
        "vertices": vertex_labels,
        "edges": d.edges.iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
        "cubes": d.cubes.iter().map(|(w, c)| json!({ "walls": w, "corners": c })).collect::<Vec<_>>(),
        "squares": d.squares(),
        "connected": d.connected(),
    });
    let text = (ctx.p.format == Format::Dot).then(|| dot::dual(&d));
    Ok((body, text, false))
}

fn nielsen(ctx: &Ctx) -> Res {
    let len = ctx.p.bound.unwrap_or(4);
    let iter = ctx.p.iter.unwrap_or(6);
    let g = ctx.phi.graph();
    let paths: Vec<Value> = find_nielsen_paths(ctx.phi, len, iter)
        .iter()
        .map(|n| json!({ "path": n.path.word(g), "start": g.vertex_names()[n.path.start()], "period": n.period }))
        .collect();
    Ok((json!({ "max_len": len, "max_iter": iter, "paths": paths }), None, false))
}

fn atoroidal(ctx: &Ctx) -> Res {
    let bound = ctx.p.bound.unwrap_or(4);
    let iter = ctx.p.iter.unwrap_or(2);
    let rep = atoroidal_heuristic(ctx.phi, bound, iter)?;
    let pair = |w: &Option<(String, usize)>| w.as_ref().map_or(Value::Null, |(w, k)| json!({ "word": w, "k": k }));
    let body = json!({
        "word_bound": rep.word_bound,
        "iter_bound": rep.iter_bound,
        "witness": pair(&rep.witness),
        "inversion": pair(&rep.inversion),
    });
    Ok((body, None, rep.witness.is_some()))
}

/// Parses `edge:num/den`, e.g. `a:2/3`.
pub fn parse_point(phi: &GraphMap, text: &str) -> Result<PointX, Failure> {
    let usage = || Failure::Usage(format!("bad point {text:?}; expected edge:num/den such as a:2/3"));
    let (e, s) = text.split_once(':').ok_or_else(usage)?;
    let d = phi.graph().dir(e.trim()).map_err(|_| usage())?;
    if d % 2 == 1 {
        return Err(usage());
    }
    let s = rational::parse(s).map_err(|_| usage())?;
    PointX::interior(d / 2, s).map_err(|_| usage())
}

fn flow_cmd(ctx: &Ctx) -> Res {
    let text = ctx
        .p
        .point
        .as_deref()
        .ok_or_else(|| Failure::Usage("flow needs --point".into()))?;
    let p = parse_point(ctx.phi, text)?;
    let l = ctx.p.l.unwrap_or(3);
    let max_period = ctx.p.bound.unwrap_or(3);
    let mut orbit = vec![p.render(ctx.phi)];
    let mut cur = p.clone();
    let mut singular = false;
    for _ in 0..l {
        cur = flow::flow_step(ctx.phi, &cur)?;
        orbit.push(cur.render(ctx.phi));
        if matches!(cur, PointX::Vertex(_)) {
            singular = true;
            break;
        }
    }
    let PointX::Interior { edge, .. } = p else {
        unreachable!("parse_point returns interior points")
    };
    let pre: Vec<Value> = flow::preimages(ctx.phi, &p)?
        .iter()
        .map(|q| json!({ "edge": ctx.name(q.edge), "s": qjson(&q.s), "forward": q.forward }))
        .collect();
    let periodic = flow::periodic_points(ctx.phi, edge, max_period)?;
    let (tunnel_json, tunnel_dot) = if singular {
        (Value::Null, None)
    } else {
        let t = flow::tunnel(ctx.phi, &p, l)?;
        let nodes: Vec<Value> = t
            .nodes
            .iter()
            .map(|n| json!({ "edge": ctx.name(n.edge), "s": qjson(&n.s), "depth": n.depth, "parent": n.parent, "forward": n.forward }))
            .collect();
        let d = (ctx.p.format == Format::Dot).then(|| dot::tunnel(ctx.phi, &t));
        (json!({ "depth": t.depth, "leaves": t.leaf_count(), "nodes": nodes }), d)
    };
    if ctx.p.format == Format::Dot && tunnel_dot.is_none() {
        return Err(Failure::Core(mtwall_core::Error::Singular(format!(
            "orbit of {text} meets a vertex"
        ))));
    }
    let body = json!({
        "point": p.render(ctx.phi),
        "steps": l,
        "orbit": orbit,
        "singular": singular,
        "preimages": pre,
        "tunnel": tunnel_json,
        "periodic": {
            "edge": ctx.name(edge),
            "max_period": max_period,
            "periodic_edge": periodic.periodic_edge,
            "points": periodic.points.iter().map(|q| json!({ "s": qjson(&q.s), "period": q.period })).collect::<Vec<_>>(),
        },
    });
    Ok((body, tunnel_dot, false))
}

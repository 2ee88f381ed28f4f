//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, followed by
//! the measured quantities.
//!
//! Every criterion is checked against an oracle written here from the
//! definitions, not against other library calls where that can be avoided:
//! a rewriting-based free reduction, the closed-form golden ratio, a brute
//! force search over iterates of the direction map, letter counts of
//! explicitly expanded substitutions, hand-computed affine branches, cell
//! counts from the graph, an abelianized semidirect product, crossing counts
//! recomputed from raw trace atoms, a union-find cycle scan, side vectors
//! enumerated by hand, an independent Dijkstra, and a brute-force
//! conjugacy search.
//!
//! Criterion 10 is expected to fail at desk scale: the approximation of the
//! canonical wall of the golden-ratio example has first Betti number 1189
//! inside the radius-9 region at `L = 3`. The process exits nonzero when
//! any criterion fails.

use mtwall_core::ball::{BallComplex, BallConfig, NONE};
use mtwall_core::cutting::dual_cube_complex;
use mtwall_core::flow::{self, PointX};
use mtwall_core::graph::{illegal_turns, inv, positive, tighten, Dir, EdgePath, Graph, GraphMap, Turn};
use mtwall_core::rational::q;
use mtwall_core::strata::{
    atoroidal_heuristic, compute_maximal_filtration, edge_weight_limit_check, edge_weights, strata, StratumKind,
};
use mtwall_core::torus::{build_torus_l, multiply, phi_power, GroupElement};
use mtwall_core::walls::{
    approximate, build_immersed_wall, canonical_busts, lift_wall, lift_wall_seeds, Atom, BustSet, Sheet,
    SideAssignment, TraceOptions, WallTrace,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::time::Instant;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- fixtures

fn ex1() -> GraphMap {
    GraphMap::rose_from_words(&[("a", "a"), ("b", "ba")])
        .unwrap()
        .with_inverse_words(&[("a", "a"), ("b", "bA")])
        .unwrap()
}

fn ex2() -> GraphMap {
    GraphMap::rose_from_words(&[("a", "b"), ("b", "ab")])
        .unwrap()
        .with_inverse_words(&[("a", "bA"), ("b", "a")])
        .unwrap()
}

const NAMES: [&str; 3] = ["a", "b", "c"];

fn random_reduced(rng: &mut impl Rng, rank: usize, len: usize) -> Vec<Dir> {
    let mut w: Vec<Dir> = Vec::with_capacity(len);
    while w.len() < len {
        let d = rng.gen_range(0..2 * rank);
        if w.last().is_some_and(|&l| l == inv(d)) {
            continue;
        }
        w.push(d);
    }
    w
}

fn random_rose_map(rng: &mut impl Rng) -> GraphMap {
    let rank = rng.gen_range(1..=3);
    let g = Graph::rose(&NAMES[..rank]).unwrap();
    let images = (0..rank)
        .map(|_| {
            let len = rng.gen_range(1..=4);
            random_reduced(rng, rank, len)
        })
        .collect();
    GraphMap::new(g, vec![0], images).unwrap()
}

/// Theta graph: three edges from `p` to `q`, vertex map the identity.
fn random_theta_map(rng: &mut impl Rng) -> GraphMap {
    let g = Graph::new(
        vec!["p".into(), "q".into()],
        ["x", "y", "z"]
            .iter()
            .map(|n| (n.to_string(), "p".to_string(), "q".to_string()))
            .collect(),
    )
    .unwrap();
    let images = (0..3)
        .map(|_| {
            let half = rng.gen_range(0..=2);
            let mut w = vec![2 * rng.gen_range(0..3)];
            for _ in 0..half {
                let back = 2 * rng.gen_range(0..3) + 1;
                let mut fwd = 2 * rng.gen_range(0..3);
                while fwd == inv(back) {
                    fwd = 2 * rng.gen_range(0..3);
                }
                if *w.last().unwrap() == inv(back) {
                    continue;
                }
                w.push(back);
                w.push(fwd);
            }
            w
        })
        .collect();
    GraphMap::new(g, vec![0, 1], images).unwrap()
}

// ------------------------------------------------------- 1: tightening

/// Free reduction by rewriting: delete the leftmost cancelling pair until
/// none is left.
fn reduce_by_rewriting(w: &[Dir]) -> Vec<Dir> {
    let mut w = w.to_vec();
    'again: loop {
        for i in 0..w.len().saturating_sub(1) {
            if w[i + 1] == inv(w[i]) {
                w.drain(i..i + 2);
                continue 'again;
            }
        }
        return w;
    }
}

fn c1_tightening() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cancelled = 0usize;
    for trial in 0..1000 {
        let rank = rng.gen_range(1..=3);
        let g = Graph::rose(&NAMES[..rank]).unwrap();
        let len = rng.gen_range(0..=24);
        let dirs: Vec<Dir> = (0..len).map(|_| rng.gen_range(0..2 * rank)).collect();
        let p = EdgePath::new(&g, 0, dirs.clone()).unwrap();
        let t = tighten(&p);
        let oracle = reduce_by_rewriting(&dirs);
        ensure(t.edges() == oracle.as_slice(), || {
            format!("path {trial}: tighten disagrees with rewriting")
        })?;
        ensure(tighten(&t) == t, || format!("path {trial}: not idempotent"))?;
        ensure(t.edges().windows(2).all(|w| w[1] != inv(w[0])), || {
            format!("path {trial}: not reduced")
        })?;
        ensure(t.len() <= p.len(), || format!("path {trial}: length grew"))?;
        let pp = p.concat(&p.inverse()).unwrap();
        ensure(tighten(&pp).is_empty(), || {
            format!("path {trial}: p·p⁻¹ does not vanish")
        })?;
        cancelled += p.len() - t.len();
    }
    Ok(format!("1000 paths, {cancelled} letters cancelled in total"))
}

// ----------------------------------------------------------- 2: PF data

fn c2_perron_frobenius() -> Verdict {
    let phi = ex2();
    let st = strata(&phi, &compute_maximal_filtration(&phi)).map_err(|e| e.to_string())?;
    ensure(st.len() == 1 && st[0].kind == StratumKind::Exponential, || {
        "expected one exponential stratum".into()
    })?;
    let s = &st[0];
    let lambda = s.lambda.ok_or("no eigenvalue")?;
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    ensure((lambda - 1.618_033_988_7).abs() <= 1e-9, || format!("λ = {lambda}"))?;
    ensure((lambda - golden).abs() <= 1e-12, || {
        format!("λ = {lambda} vs closed form {golden}")
    })?;
    let m = &s.matrix;
    let (tr, det) = (
        (m[0][0] + m[1][1]) as f64,
        (m[0][0] * m[1][1]) as f64 - (m[0][1] * m[1][0]) as f64,
    );
    let root = (tr + (tr * tr - 4.0 * det).sqrt()) / 2.0;
    ensure((lambda - root).abs() <= 1e-12, || {
        format!("λ = {lambda}, characteristic root {root}")
    })?;
    let w = &s.weights;
    let mut worst = 0f64;
    for j in 0..w.len() {
        let mw: f64 = (0..w.len()).map(|k| m[j][k] as f64 * w[k]).sum();
        let rel = (mw - lambda * w[j]).abs() / (lambda * w[j]).abs();
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-9, || format!("𝔐ω = λω off by {worst:e}"))?;
    let mut spread = 0f64;
    for &e in &s.edges {
        let seq = edge_weight_limit_check(&phi, s, e, 20).map_err(|e| e.to_string())?;
        let (lo, hi) = seq
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        spread = spread.max(hi - lo);
    }
    ensure(spread <= 1e-6, || format!("weight limit sequence varies by {spread:e}"))?;
    Ok(format!(
        "λ = {lambda:.12}, eigen residual {worst:.1e}, limit spread {spread:.1e}"
    ))
}

// ----------------------------------------------------------- 3: legality

/// `D` computed from the images of positive edges: the first letter of
/// `φ(e)` for `e`, the inverse of the last letter for `ē`.
fn derivative(phi: &GraphMap) -> Vec<Dir> {
    let n = phi.graph().edge_count();
    let mut d = vec![0; 2 * n];
    for k in 0..n {
        let img = phi.image(2 * k);
        d[2 * k] = img[0];
        d[2 * k + 1] = inv(*img.last().unwrap());
    }
    d
}

fn c3_legality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0usize;
    for trial in 0..50 {
        let phi = random_rose_map(&mut rng);
        let g = phi.graph();
        let dmap = derivative(&phi);
        let dirs = g.dir_count();
        let bound = dirs * dirs;
        let mut oracle = BTreeSet::new();
        for x in 0..dirs {
            for y in (x + 1)..dirs {
                if g.src(x) != g.src(y) {
                    continue;
                }
                let (mut p, mut r) = (x, y);
                for _ in 0..=bound {
                    if p == r {
                        oracle.insert(Turn::new(x, y));
                        break;
                    }
                    p = dmap[p];
                    r = dmap[r];
                }
            }
        }
        let got = illegal_turns(&phi);
        ensure(got == oracle, || {
            format!("map {trial}: {got:?} vs brute force {oracle:?}")
        })?;
        total += got.len();
    }
    Ok(format!("50 maps, {total} illegal turns, sets equal"))
}

// ------------------------------------------------- 4: preimages, tunnels

/// `φ^L(e)` as an unreduced word, by substitution.
fn expand(phi: &GraphMap, e: usize, l: usize) -> Vec<Dir> {
    let mut w = vec![2 * e];
    for _ in 0..l {
        w = w
            .iter()
            .flat_map(|&d| {
                let img = phi.image(2 * positive(d)).to_vec();
                if d % 2 == 0 {
                    img
                } else {
                    img.iter().rev().map(|&x| inv(x)).collect()
                }
            })
            .collect();
    }
    w
}

fn c4_preimage_counts() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0usize;
    let mut leaves_total = 0usize;
    while checked < 200 {
        let phi = random_rose_map(&mut rng);
        let n = phi.graph().edge_count();
        let f = rng.gen_range(0..n);
        let den = rng.gen_range(2..=60i128);
        let num = rng.gen_range(1..den);
        let p = PointX::interior(f, q(num, den)).unwrap();
        let l = rng.gen_range(1..=3);
        let occurrences = |l: usize| -> usize {
            (0..n)
                .map(|e| expand(&phi, e, l).iter().filter(|&&d| positive(d) == f).count())
                .sum()
        };
        let pre = flow::preimages(&phi, &p).map_err(|e| e.to_string())?;
        ensure(pre.len() == occurrences(1), || {
            format!("point {checked}: {} preimages", pre.len())
        })?;
        for x in &pre {
            let back = flow::flow_step(&phi, &PointX::Interior { edge: x.edge, s: x.s }).unwrap();
            ensure(back == p, || format!("point {checked}: preimage does not flow back"))?;
        }
        let t = flow::tunnel(&phi, &p, l).map_err(|e| e.to_string())?;
        ensure(t.leaf_count() == occurrences(l), || {
            format!(
                "point {checked}: {} leaves at depth {l} vs {} occurrences",
                t.leaf_count(),
                occurrences(l)
            )
        })?;
        leaves_total += t.leaf_count();
        checked += 1;
    }
    Ok(format!("200 points, {leaves_total} tunnel leaves in total"))
}

// ------------------------------------------------------ 5: periodic orbit

fn c5_periodic_orbit() -> Verdict {
    let phi = ex2();
    let start = PointX::interior(0, q(2, 3)).unwrap();
    // a ↦ b is one letter, so s ↦ s on b; b ↦ ab doubles, landing on a
    // for s < 1/2 and on b otherwise.
    let oracle = [(1, q(2, 3)), (1, q(1, 3)), (0, q(2, 3))];
    let mut cur = start.clone();
    for (i, (e, s)) in oracle.iter().enumerate() {
        cur = flow::flow_step(&phi, &cur).map_err(|e| e.to_string())?;
        let want = PointX::Interior { edge: *e, s: *s };
        ensure(cur == want, || format!("step {}: {cur:?}", i + 1))?;
        ensure(i == 2 || cur != start, || format!("returned early at step {}", i + 1))?;
    }
    ensure(flow::flow_n(&phi, &start, 3).unwrap() == start, || "ψ₃ differs".into())?;
    Ok("(a, 2/3) → (b, 2/3) → (b, 1/3) → (a, 2/3)".into())
}

// --------------------------------------------------- 6: Euler characteristic

fn c6_euler() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut maps = vec![ex1(), ex2()];
    for i in 0..40 {
        maps.push(if i % 2 == 0 {
            random_rose_map(&mut rng)
        } else {
            random_theta_map(&mut rng)
        });
    }
    let mut count = 0;
    for (i, phi) in maps.iter().enumerate() {
        let g = phi.graph();
        for l in 1..=3 {
            let x = build_torus_l(phi, l).map_err(|e| e.to_string())?;
            let cells = (x.zero_cells, x.vertical_cells, x.horizontal_cells, x.two_cells.len());
            let want = (g.vertex_count(), g.edge_count(), g.vertex_count(), g.edge_count());
            ensure(cells == want, || {
                format!("map {i}, L={l}: cells {cells:?}, expected {want:?}")
            })?;
            let chi = x.zero_cells as i64 - (x.vertical_cells + x.horizontal_cells) as i64 + x.two_cells.len() as i64;
            ensure(chi == 0 && x.euler_characteristic() == 0, || {
                format!("map {i}, L={l}: χ = {chi}")
            })?;
            ensure(x.boundaries_closed(phi), || {
                format!("map {i}, L={l}: open 2-cell boundary")
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} tori (roses and theta graphs, L = 1..3), χ = 0"))
}

// ----------------------------------------------------------- 7: normal forms

type Sub = Vec<Vec<Dir>>;

fn apply(sub: &Sub, w: &[Dir]) -> Vec<Dir> {
    let out: Vec<Dir> = w
        .iter()
        .flat_map(|&d| {
            let img = sub[positive(d)].clone();
            if d % 2 == 0 {
                img
            } else {
                img.iter().rev().map(|&x| inv(x)).collect()
            }
        })
        .collect();
    reduce_by_rewriting(&out)
}

/// Random automorphism of `F_r` with its inverse, as a product of Nielsen
/// moves.
fn random_automorphism(rng: &mut impl Rng, rank: usize, moves: usize) -> (Sub, Sub) {
    let id: Sub = (0..rank).map(|k| vec![2 * k]).collect();
    let (mut f, mut finv) = (id.clone(), id.clone());
    for _ in 0..moves {
        let i = rng.gen_range(0..rank);
        let (m, minv): (Sub, Sub) = match rng.gen_range(0..3) {
            0 if rank > 1 => {
                let mut j = rng.gen_range(0..rank);
                while j == i {
                    j = rng.gen_range(0..rank);
                }
                let (mut m, mut mi) = (id.clone(), id.clone());
                m[i] = vec![2 * i, 2 * j];
                mi[i] = vec![2 * i, 2 * j + 1];
                (m, mi)
            }
            1 => {
                let mut m = id.clone();
                m[i] = vec![2 * i + 1];
                (m.clone(), m)
            }
            _ => {
                let j = rng.gen_range(0..rank);
                let mut m = id.clone();
                m.swap(i, j);
                (m.clone(), m)
            }
        };
        f = (0..rank).map(|k| apply(&f, &m[k])).collect();
        finv = (0..rank).map(|k| apply(&minv, &finv[k])).collect();
    }
    (f, finv)
}

type Mat = Vec<Vec<i128>>;

fn abelianize(sub: &Sub) -> Mat {
    let r = sub.len();
    let mut a = vec![vec![0i128; r]; r];
    for (j, img) in sub.iter().enumerate() {
        for &d in img {
            a[positive(d)][j] += if d % 2 == 0 { 1 } else { -1 };
        }
    }
    a
}

fn mat_vec(a: &Mat, v: &[i128]) -> Vec<i128> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Image of `u·tⁿ` in `ℤ^r ⋊ ℤ`.
fn ab_element(rank: usize, e: &GroupElement) -> (Vec<i128>, i64) {
    let mut v = vec![0i128; rank];
    for &d in &e.u {
        v[positive(d)] += if d % 2 == 0 { 1 } else { -1 };
    }
    (v, e.n)
}

/// `(v, n)(w, m) = (v + Aⁿw, n + m)`.
fn ab_multiply(a: &Mat, ainv: &Mat, x: &(Vec<i128>, i64), y: &(Vec<i128>, i64)) -> (Vec<i128>, i64) {
    let mut w = y.0.clone();
    let m = if x.1 >= 0 { a } else { ainv };
    for _ in 0..x.1.unsigned_abs() {
        w = mat_vec(m, &w);
    }
    (x.0.iter().zip(&w).map(|(p, q)| p + q).collect(), x.1 + y.1)
}

fn c7_normal_forms() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut systems: Vec<(GraphMap, Sub, Sub)> = Vec::new();
    for phi in [ex1(), ex2()] {
        let n = phi.graph().edge_count();
        let f: Sub = (0..n).map(|k| phi.image(2 * k).to_vec()).collect();
        let fi: Sub = (0..n).map(|k| phi.inverse_image(2 * k).unwrap().to_vec()).collect();
        systems.push((phi, f, fi));
    }
    for rank in [2, 3] {
        let (f, fi) = random_automorphism(&mut rng, rank, 6);
        let g = Graph::rose(&NAMES[..rank]).unwrap();
        let phi = GraphMap::new(g, vec![0], f.clone())
            .unwrap()
            .with_inverse(vec![0], fi.clone())
            .map_err(|e| e.to_string())?;
        systems.push((phi, f, fi));
    }
    let mut triples = 0;
    for (s, (phi, f, fi)) in systems.iter().enumerate() {
        let rank = phi.graph().edge_count();
        for k in 0..rank {
            let there = phi_power(phi, &[2 * k], 1).map_err(|e| e.to_string())?;
            ensure(phi_power(phi, &there, -1).unwrap() == vec![2 * k], || {
                format!("system {s}: Φ⁻¹Φ ≠ id")
            })?;
            let back = phi_power(phi, &[2 * k], -1).map_err(|e| e.to_string())?;
            ensure(phi_power(phi, &back, 1).unwrap() == vec![2 * k], || {
                format!("system {s}: ΦΦ⁻¹ ≠ id")
            })?;
            ensure(apply(f, &apply(fi, &[2 * k])) == vec![2 * k], || {
                format!("system {s}: oracle inverse is wrong")
            })?;
        }
        let (a, ainv) = (abelianize(f), abelianize(fi));
        let count = if s < 2 { 300 } else { 200 };
        for t in 0..count {
            let mut el = || {
                let len = rng.gen_range(0..=5);
                GroupElement {
                    u: random_reduced(&mut rng, rank, len),
                    n: rng.gen_range(-3..=3),
                }
            };
            let (x, y, z) = (el(), el(), el());
            let m = |p: &GroupElement, q: &GroupElement| multiply(phi, p, q).map_err(|e| e.to_string());
            let left = m(&m(&x, &y)?, &z)?;
            let right = m(&x, &m(&y, &z)?)?;
            ensure(left == right, || format!("system {s}, triple {t}: not associative"))?;
            let xy = m(&x, &y)?;
            let want = ab_multiply(&a, &ainv, &ab_element(rank, &x), &ab_element(rank, &y));
            ensure(ab_element(rank, &xy) == want, || {
                format!("system {s}, triple {t}: abelianized product differs")
            })?;
            triples += 1;
        }
    }
    Ok(format!(
        "{triples} triples over {} automorphisms, Φ∘Φ⁻¹ = id on generators",
        systems.len()
    ))
}

// ----------------------------------------------------- walls in one ball

struct WallCase {
    ball: BallComplex,
    trace: WallTrace,
    mutated: WallTrace,
    level: Vec<(i64, WallTrace)>,
    radius: f64,
}

const L: usize = 3;

fn wall_case() -> Result<WallCase, String> {
    let phi = ex2();
    let st = strata(&phi, &compute_maximal_filtration(&phi)).map_err(|e| e.to_string())?;
    let cb = canonical_busts(&phi, &st, 6).map_err(|e| e.to_string())?;
    let busts = BustSet::new(&phi, &cb.as_points(), L).map_err(|e| e.to_string())?;
    let wall = build_immersed_wall(&phi, &busts, None).map_err(|e| e.to_string())?;
    let radius = 3.0 * L as f64;
    let ball = BallComplex::around_identity(&phi, &edge_weights(phi.graph(), &st), BallConfig::radius(radius + 2.0))
        .map_err(|e| e.to_string())?;
    let seed = Atom::V(ball.base());
    let trace = lift_wall(&wall, &ball, seed.clone(), TraceOptions::default()).map_err(|e| e.to_string())?;
    let opts = TraceOptions {
        deleted: Some((Sheet::Left, 0)),
        atom_cap: 0,
    };
    let mutated = lift_wall(&wall, &ball, seed, opts).map_err(|e| e.to_string())?;
    let flat = build_immersed_wall(&phi, &BustSet::new(&phi, &[], 1).unwrap(), None).map_err(|e| e.to_string())?;
    let mut level = Vec::new();
    for h in [-1, 0, 1] {
        let seeds: Vec<Atom> = (0..ball.vertex_count() as u32)
            .filter(|&v| ball.vertex_height(v) == h)
            .map(Atom::V)
            .collect();
        level.push((
            h,
            lift_wall_seeds(&flat, &ball, &seeds, TraceOptions::default()).map_err(|e| e.to_string())?,
        ));
    }
    Ok(WallCase {
        ball,
        trace,
        mutated,
        level,
        radius,
    })
}

/// Crossing counts recomputed from the atoms of a trace: `V(x)` meets the
/// horizontal edge above `x`, a tunnel point meets its vertical edge.
struct Counts {
    horizontal: HashMap<u32, u32>,
    vertical: HashMap<u32, u32>,
}

fn counts(trace: &WallTrace) -> Counts {
    let mut c = Counts {
        horizontal: HashMap::new(),
        vertical: HashMap::new(),
    };
    for a in trace.atoms() {
        match a {
            Atom::V(x) => *c.horizontal.entry(*x).or_default() += 1,
            Atom::N { p, .. } => *c.vertical.entry(p.edge).or_default() += 1,
            _ => {}
        }
    }
    c
}

fn inside(ball: &BallComplex, r: f64, v: u32) -> bool {
    v != NONE && ball.dist_from_base(v) <= r + 1e-9
}

/// Boundary crossing count of every 2-cell inside the radius, and the
/// number of odd ones.
fn odd_cells(ball: &BallComplex, r: f64, c: &Counts) -> (usize, usize) {
    let h = |v: u32| c.horizontal.get(&v).copied().unwrap_or(0);
    let vc = |e: u32| c.vertical.get(&e).copied().unwrap_or(0);
    let (mut checked, mut odd) = (0, 0);
    for id in 0..ball.vertical_count() as u32 {
        if !ball.has_cell(id) {
            continue;
        }
        let e = ball.vedge(id);
        let mut corners = vec![e.src, e.dst, ball.up(e.src), ball.up(e.dst)];
        for &(t, _) in ball.top(id) {
            corners.push(ball.vedge(t).src);
            corners.push(ball.vedge(t).dst);
        }
        if !corners.iter().all(|&v| inside(ball, r, v)) {
            continue;
        }
        checked += 1;
        let total = h(e.src) + h(e.dst) + vc(id) + ball.top(id).iter().map(|&(t, _)| vc(t)).sum::<u32>();
        odd += (total % 2) as usize;
    }
    (checked, odd)
}

fn c8_cocycle(case: &WallCase) -> Verdict {
    let (ball, r) = (&case.ball, case.radius);
    let (checked, odd) = odd_cells(ball, r, &counts(&case.trace));
    ensure(checked > 1000, || format!("only {checked} cells inside the radius"))?;
    ensure(odd == 0, || {
        format!("{odd} of {checked} cells cross the wall an odd number of times")
    })?;
    let lib = case.trace.crossings(ball, r).cell_parities(ball);
    ensure(lib == (checked, vec![]), || {
        "library cell check disagrees with the oracle".into()
    })?;
    let (_, odd_mut) = odd_cells(ball, r, &counts(&case.mutated));
    let lib_mut = case.mutated.crossings(ball, r).cell_parities(ball).1.len();
    ensure(odd_mut > 0 && lib_mut == odd_mut, || {
        format!("mutation: oracle {odd_mut}, library {lib_mut} odd cells")
    })?;
    Ok(format!(
        "{checked} cells even; deleting tunnel ←T₀ leaves {odd_mut} odd cells"
    ))
}

fn neighbours_inside(ball: &BallComplex, r: f64, v: u32) -> Vec<u32> {
    ball.neighbours(v)
        .map(|(u, _)| u)
        .filter(|&u| inside(ball, r, u))
        .collect()
}

/// Crossings along a vertex path from the raw counts.
fn path_count(ball: &BallComplex, c: &Counts, path: &[u32]) -> u32 {
    let mut total = 0;
    for w in path.windows(2) {
        let (x, y) = (w[0], w[1]);
        if ball.up(x) == y {
            total += c.horizontal.get(&x).copied().unwrap_or(0);
        } else if ball.up(y) == x {
            total += c.horizontal.get(&y).copied().unwrap_or(0);
        } else {
            let id = (0..ball.phi().graph().edge_count())
                .flat_map(|k| [ball.out_edge(x, k), ball.in_edge(x, k)])
                .find(|&id| {
                    id != NONE && {
                        let e = ball.vedge(id);
                        (e.src, e.dst) == (x, y) || (e.src, e.dst) == (y, x)
                    }
                })
                .expect("adjacent vertices");
            total += c.vertical.get(&id).copied().unwrap_or(0);
        }
    }
    total
}

fn c9_separation(case: &WallCase) -> Verdict {
    let (ball, r) = (&case.ball, case.radius);
    let sides = case.trace.crossings(ball, r).side_assignment(ball);
    ensure(sides.consistent, || "side assignment has an odd cycle".into())?;
    ensure(sides.classes == 2, || format!("{} classes", sides.classes))?;
    let c = counts(&case.trace);
    let sided: Vec<u32> = (0..ball.vertex_count() as u32)
        .filter(|&v| sides.side[v as usize].is_some())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut flips, mut longest) = (0, 0);
    for i in 0..20 {
        let mut path = vec![*sided.choose(&mut rng).unwrap()];
        let steps = rng.gen_range(4..=40);
        for _ in 0..steps {
            let nb = neighbours_inside(ball, r, *path.last().unwrap());
            path.push(*nb.choose(&mut rng).unwrap());
        }
        let (x, y) = (path[0], *path.last().unwrap());
        let crossings = path_count(ball, &c, &path);
        let flip = sides.side[x as usize] != sides.side[y as usize];
        ensure((crossings % 2 == 1) == flip, || {
            format!("path {i}: {crossings} crossings, side flip {flip}")
        })?;
        flips += flip as usize;
        longest = longest.max(crossings);
    }
    Ok(format!(
        "2 classes over {} vertices; 20 random walks agree ({flips} flips, up to {longest} crossings)",
        sided.len()
    ))
}

fn c10_acyclic(case: &WallCase) -> Verdict {
    let a = approximate(&case.trace, &case.ball, case.radius).map_err(|e| e.to_string())?;
    let mut parent: Vec<usize> = (0..a.nodes.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut cycles = 0usize;
    for &(x, y, _) in &a.edges {
        let (rx, ry) = (find(&mut parent, x as usize), find(&mut parent, y as usize));
        if rx == ry {
            cycles += 1;
        } else {
            parent[rx] = ry;
        }
    }
    ensure(cycles == a.betti1(), || {
        format!("cycle scan {cycles} vs betti1 {}", a.betti1())
    })?;
    let detail = format!(
        "{} nodes, {} edges, {} independent cycles",
        a.nodes.len(),
        a.edges.len(),
        cycles
    );
    if cycles == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Realized side vectors, Hamming-1 edges and squares, enumerated directly.
fn cube_oracle(sides: &[&SideAssignment]) -> (usize, usize, usize) {
    let n = sides[0].side.len();
    let vecs: BTreeSet<Vec<u8>> = (0..n)
        .filter_map(|v| sides.iter().map(|s| s.side[v]).collect::<Option<Vec<u8>>>())
        .collect();
    let list: Vec<&Vec<u8>> = vecs.iter().collect();
    let dist = |a: &[u8], b: &[u8]| a.iter().zip(b).filter(|(x, y)| x != y).count();
    let edges = (0..list.len())
        .flat_map(|i| (i + 1..list.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| dist(list[i], list[j]) == 1)
        .count();
    let mut squares = HashSet::new();
    for v in &vecs {
        for i in 0..sides.len() {
            for j in i + 1..sides.len() {
                let corners: Vec<Vec<u8>> = [(false, false), (true, false), (false, true), (true, true)]
                    .iter()
                    .map(|&(fi, fj)| {
                        let mut w = v.clone();
                        w[i] ^= fi as u8;
                        w[j] ^= fj as u8;
                        w
                    })
                    .collect();
                if corners.iter().all(|w| vecs.contains(w)) {
                    let mut key = corners.clone();
                    key.sort();
                    squares.insert(key);
                }
            }
        }
    }
    (vecs.len(), edges, squares.len())
}

fn c11_dual(case: &WallCase) -> Verdict {
    let (ball, r) = (&case.ball, case.radius);
    let canonical = case.trace.crossings(ball, r).side_assignment(ball);
    let levels: Vec<SideAssignment> = case
        .level
        .iter()
        .map(|(_, t)| t.crossings(ball, r).side_assignment(ball))
        .collect();
    let zero = &levels[1];
    let crossing = dual_cube_complex(&[canonical.clone(), zero.clone()]).map_err(|e| e.to_string())?;
    let got = (crossing.vertices.len(), crossing.edges.len(), crossing.squares());
    ensure(got == cube_oracle(&[&canonical, zero]), || {
        format!("crossing pair {got:?} vs oracle")
    })?;
    ensure(got == (4, 4, 1), || format!("crossing pair gives {got:?}"))?;
    let nested = dual_cube_complex(&levels).map_err(|e| e.to_string())?;
    let got_n = (nested.vertices.len(), nested.edges.len(), nested.squares());
    ensure(got_n == cube_oracle(&levels.iter().collect::<Vec<_>>()), || {
        format!("nested {got_n:?} vs oracle")
    })?;
    ensure(got_n == (4, 3, 0) && nested.connected(), || {
        format!("nested walls give {got_n:?}")
    })?;
    Ok(format!(
        "canonical × level 0 → {got:?}; levels −1, 0, 1 → {got_n:?} path"
    ))
}

// ----------------------------------------------------------- 12: metric

fn dijkstra(ball: &BallComplex, x: u32) -> Vec<f64> {
    #[derive(PartialEq)]
    struct Item(f64, u32);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    let mut d = vec![f64::INFINITY; ball.vertex_count()];
    let mut heap = BinaryHeap::from([Item(0.0, x)]);
    d[x as usize] = 0.0;
    while let Some(Item(dx, v)) = heap.pop() {
        if dx > d[v as usize] {
            continue;
        }
        for (u, w) in ball.neighbours(v) {
            if dx + w < d[u as usize] {
                d[u as usize] = dx + w;
                heap.push(Item(dx + w, u));
            }
        }
    }
    d
}

fn c12_metric() -> Verdict {
    let phi = ex2();
    let st = strata(&phi, &compute_maximal_filtration(&phi)).map_err(|e| e.to_string())?;
    let r = 9.0;
    let ball = BallComplex::around_identity(&phi, &edge_weights(phi.graph(), &st), BallConfig::radius(r))
        .map_err(|e| e.to_string())?;
    let from_base = dijkstra(&ball, ball.base());
    let near: Vec<u32> = (0..ball.vertex_count() as u32)
        .filter(|&v| from_base[v as usize] <= r / 2.0)
        .collect();
    ensure(
        near.iter()
            .all(|&v| (ball.dist_from_base(v) - from_base[v as usize]).abs() <= 1e-12),
        || "base distances differ".into(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut cache: HashMap<u32, Vec<f64>> = HashMap::new();
    let mut worst = 0f64;
    for t in 0..500 {
        let xyz = [
            *near.choose(&mut rng).unwrap(),
            *near.choose(&mut rng).unwrap(),
            *near.choose(&mut rng).unwrap(),
        ];
        for &v in &xyz {
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(v) {
                let lib = ball.distances_from(v);
                let own = dijkstra(&ball, v);
                let diff = lib
                    .iter()
                    .zip(&own)
                    .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
                    .fold(0.0, f64::max);
                ensure(diff <= 1e-12, || format!("triple {t}: Dijkstra disagreement {diff:e}"))?;
                e.insert(lib);
            }
        }
        let d = |a: u32, b: u32| cache[&a][b as usize];
        let [x, y, z] = xyz;
        let asym = (d(x, y) - d(y, x)).abs();
        let excess = d(x, z) - d(x, y) - d(y, z);
        ensure(asym <= 1e-12, || format!("triple {t}: asymmetry {asym:e}"))?;
        ensure(excess <= 1e-12, || format!("triple {t}: triangle excess {excess:e}"))?;
        worst = worst.max(asym).max(excess);
    }
    Ok(format!(
        "500 triples among {} vertices (ball of {}), worst defect {worst:.1e}",
        near.len(),
        ball.vertex_count()
    ))
}

// ------------------------------------------------------- 13: atoroidality

/// First `(w, k)` in (length, word order `a < A < b < B`, k) order with
/// `Φᵏ(w)` cyclically equal to `w`, and separately to `w⁻¹`.
type Hit = Option<(String, usize)>;

fn conjugacy_oracle(phi: &GraphMap, bound: usize, iters: usize) -> (Hit, Hit) {
    let g = phi.graph();
    let rank = g.edge_count();
    let sub: Sub = (0..rank).map(|k| phi.image(2 * k).to_vec()).collect();
    let cyc = |w: &[Dir]| -> Vec<Dir> {
        let mut w = reduce_by_rewriting(w);
        while w.len() > 1 && w[0] == inv(*w.last().unwrap()) {
            w = w[1..w.len() - 1].to_vec();
        }
        w
    };
    let rotations = |u: &[Dir], v: &[Dir]| {
        u.len() == v.len() && (0..u.len().max(1)).any(|r| u.iter().cycle().skip(r).take(u.len()).eq(v.iter()))
    };
    let (mut witness, mut inversion) = (None, None);
    let mut layer: Vec<Vec<Dir>> = vec![vec![]];
    for _ in 0..bound {
        let mut next = Vec::new();
        for w in &layer {
            for d in 0..2 * rank {
                if w.last().is_some_and(|&l| l == inv(d)) {
                    continue;
                }
                let mut x = w.clone();
                x.push(d);
                next.push(x);
            }
        }
        for w in &next {
            if w.len() > 1 && w[0] == inv(*w.last().unwrap()) {
                continue;
            }
            let winv: Vec<Dir> = w.iter().rev().map(|&d| inv(d)).collect();
            let mut img = w.clone();
            for k in 1..=iters {
                img = apply(&sub, &img);
                let c = cyc(&img);
                if witness.is_none() && rotations(&c, w) {
                    witness = Some((g.word(w), k));
                }
                if inversion.is_none() && rotations(&c, &winv) {
                    inversion = Some((g.word(w), k));
                }
            }
        }
        layer = next;
    }
    (witness, inversion)
}

fn c13_atoroidal() -> Verdict {
    let r1 = atoroidal_heuristic(&ex1(), 4, 2).map_err(|e| e.to_string())?;
    ensure(r1.witness == Some(("a".into(), 1)), || {
        format!("EX1 witness {:?}", r1.witness)
    })?;
    let phi = ex2();
    let r2 = atoroidal_heuristic(&phi, 4, 2).map_err(|e| e.to_string())?;
    let (w, i) = conjugacy_oracle(&phi, 4, 2);
    ensure(r2.witness == w && r2.inversion == i, || {
        format!("EX2: {:?}/{:?} vs oracle {w:?}/{i:?}", r2.witness, r2.inversion)
    })?;
    let (w1, _) = conjugacy_oracle(&ex1(), 4, 2);
    ensure(w1 == r1.witness, || format!("EX1 oracle {w1:?}"))?;
    Ok(format!(
        "EX1 → (a, 1); EX2 at B=4, m=2 → {:?}, inversion {:?}",
        r2.witness, r2.inversion
    ))
}

// ---------------------------------------------------------------- driver

fn main() {
    let names = [
        "tightening",
        "PF identity",
        "legality oracle",
        "preimage/tunnel counts",
        "periodic orbit",
        "Euler characteristic",
        "normal forms",
        "wall cocycle",
        "separation",
        "approximation tree",
        "dual cube complex",
        "ball metric",
        "atoroidality heuristic",
    ];
    let mut results: Vec<(Verdict, f64)> = Vec::new();
    fn timed(results: &mut Vec<(Verdict, f64)>, f: &dyn Fn() -> Verdict) {
        let t = Instant::now();
        let v = f();
        results.push((v, t.elapsed().as_secs_f64()));
    }
    timed(&mut results, &c1_tightening);
    timed(&mut results, &c2_perron_frobenius);
    timed(&mut results, &c3_legality);
    timed(&mut results, &c4_preimage_counts);
    timed(&mut results, &c5_periodic_orbit);
    timed(&mut results, &c6_euler);
    timed(&mut results, &c7_normal_forms);
    let t = Instant::now();
    let case = wall_case();
    let setup = t.elapsed().as_secs_f64();
    match &case {
        Ok(c) => {
            timed(&mut results, &|| c8_cocycle(c));
            timed(&mut results, &|| c9_separation(c));
            timed(&mut results, &|| c10_acyclic(c));
            timed(&mut results, &|| c11_dual(c));
        }
        Err(e) => {
            for _ in 0..4 {
                results.push((Err(format!("wall setup failed: {e}")), 0.0));
            }
        }
    }
    timed(&mut results, &c12_metric);
    timed(&mut results, &c13_atoroidal);

    let mut failed = 0;
    println!("acceptance (wall setup {setup:.2}s)");
    for (i, ((verdict, secs), name)) in results.iter().zip(names).enumerate() {
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name:<24} {secs:>6.2}s  {detail}", i + 1);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

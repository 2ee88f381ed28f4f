//! The forward flow `ψ` on points of vertical edges.
//!
//! On the interior of an edge `e` with `φ(e) = f₁⋯f_k` the flow is the
//! linear map `s ↦ k·s` onto the unreduced image path: a point at `s` with
//! `j < k·s < j + 1` lands on `f_{j+1}` at `k·s − j` (or `1 − (k·s − j)` when
//! the letter is inverted). Positions are exact rationals throughout.

use crate::ball::{BallComplex, NONE};
use crate::graph::{inv, is_positive, positive, Dir, GraphMap};
use crate::rational::{self, Q};
use crate::strata::{Stratum, StratumKind};
use crate::{Error, Result};
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::{One, Zero};

/// A point of `V`: a vertex or an interior point of a positive edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointX {
    /// A vertex.
    Vertex(usize),
    /// Interior point `s ∈ (0, 1)` of the positive edge with rank `edge`.
    Interior {
        /// Positive edge rank.
        edge: usize,
        /// Position along the edge orientation.
        s: Q,
    },
}

impl PointX {
    /// Interior point, checking `0 < s < 1`.
    pub fn interior(edge: usize, s: Q) -> Result<PointX> {
        if !rational::is_interior(&s) {
            return Err(Error::Structural(format!(
                "position {} is not interior",
                rational::to_string(&s)
            )));
        }
        Ok(PointX::Interior { edge, s })
    }

    /// Renders as `(a, 2/3)` or `vertex v`.
    pub fn render(&self, phi: &GraphMap) -> String {
        let g = phi.graph();
        match self {
            PointX::Vertex(v) => format!("vertex {}", g.vertex_names()[*v]),
            PointX::Interior { edge, s } => format!("({}, {})", g.name(2 * edge), rational::to_string(s)),
        }
    }
}

/// Where one step of the flow takes an interior point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Landing {
    /// Interior point of `edge` at `s`; `forward` tells whether the letter
    /// that was hit is the positive edge.
    Interior {
        /// Positive edge rank.
        edge: usize,
        /// New position.
        s: Q,
        /// Orientation of the letter.
        forward: bool,
        /// Index of the letter in the image path.
        letter: usize,
    },
    /// The point hit the vertex between letters (singular).
    Vertex(usize),
}

/// One flow step from `(edge, s)`, exposing the branch data.
pub fn land(phi: &GraphMap, edge: usize, s: &Q) -> Result<Landing> {
    let img = phi.image(2 * edge);
    let k = img.len() as i128;
    let x = rational::mul_int(s, k)?;
    let j = x.floor();
    let ji = *j.numer();
    if x == j {
        let g = phi.graph();
        let v = if ji as usize >= img.len() {
            g.dst(img[img.len() - 1])
        } else {
            g.src(img[ji as usize])
        };
        return Ok(Landing::Vertex(v));
    }
    let frac = rational::sub(&x, &j)?;
    let d = img[ji as usize];
    let forward = is_positive(d);
    Ok(Landing::Interior {
        edge: positive(d),
        s: if forward { frac } else { rational::flip(&frac) },
        forward,
        letter: ji as usize,
    })
}

/// `ψ₁(p)`. A vertex goes to its image; an interior point landing between
/// two letters becomes a vertex, which callers treat as singular.
pub fn flow_step(phi: &GraphMap, p: &PointX) -> Result<PointX> {
    match p {
        PointX::Vertex(v) => Ok(PointX::Vertex(phi.vertex_image(*v))),
        PointX::Interior { edge, s } => Ok(match land(phi, *edge, s)? {
            Landing::Vertex(v) => PointX::Vertex(v),
            Landing::Interior { edge, s, .. } => PointX::Interior { edge, s },
        }),
    }
}

/// `ψₙ(p)`.
pub fn flow_n(phi: &GraphMap, p: &PointX, n: usize) -> Result<PointX> {
    let mut cur = p.clone();
    for _ in 0..n {
        cur = flow_step(phi, &cur)?;
    }
    Ok(cur)
}

/// A preimage together with the orientation of the branch that hits it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Preimage {
    /// Positive edge rank of the preimage.
    pub edge: usize,
    /// Position on that edge.
    pub s: Q,
    /// True when the branch preserves orientation.
    pub forward: bool,
}

/// All `(e, s)` with `ψ₁(e, s) = p`, ordered by edge then position. The
/// count equals the number of occurrences of `host(p)^{±1}` in all images.
/// A vertex has no well-defined preimage set here and is reported singular.
pub fn preimages(phi: &GraphMap, p: &PointX) -> Result<Vec<Preimage>> {
    let (f, s) = match p {
        PointX::Vertex(v) => {
            return Err(Error::Singular(format!(
                "vertex {} has no interior preimage branch",
                phi.graph().vertex_names()[*v]
            )))
        }
        PointX::Interior { edge, s } => (*edge, s),
    };
    let mut out = Vec::new();
    for e in 0..phi.graph().edge_count() {
        let img = phi.image(2 * e);
        for (j, &d) in img.iter().enumerate() {
            if positive(d) != f {
                continue;
            }
            let forward = is_positive(d);
            let sp = if forward { *s } else { rational::flip(s) };
            out.push(Preimage {
                edge: e,
                s: rational::branch_inverse(j, &sp, img.len())?,
                forward,
            });
        }
    }
    out.sort();
    Ok(out)
}

/// Node of a tunnel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TunnelNode {
    /// Positive edge rank.
    pub edge: usize,
    /// Position.
    pub s: Q,
    /// Depth below the root.
    pub depth: usize,
    /// Parent index (`None` for the root).
    pub parent: Option<usize>,
    /// Orientation of the branch from this node to its parent.
    pub forward: bool,
}

/// The backward preimage tree `T_L(x)` of depth `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tunnel {
    /// Nodes in breadth-first order, children sorted by edge then position.
    pub nodes: Vec<TunnelNode>,
    /// Depth `L`.
    pub depth: usize,
}

impl Tunnel {
    /// Indices of nodes at depth `L`.
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.depth == self.depth)
            .map(|(i, _)| i)
    }

    /// Number of nodes at depth `L`.
    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Orientation of the composite branch from a node up to the root.
    pub fn sign_to_root(&self, mut i: usize) -> bool {
        let mut fwd = true;
        while let Some(p) = self.nodes[i].parent {
            fwd ^= !self.nodes[i].forward;
            i = p;
        }
        fwd
    }
}

/// Builds `T_L(root)` by iterated preimages.
pub fn tunnel(phi: &GraphMap, root: &PointX, l: usize) -> Result<Tunnel> {
    let (edge, s) = match root {
        PointX::Interior { edge, s } => (*edge, *s),
        PointX::Vertex(_) => return Err(Error::Singular("tunnel root is a vertex".into())),
    };
    let mut nodes = vec![TunnelNode {
        edge,
        s,
        depth: 0,
        parent: None,
        forward: true,
    }];
    let mut frontier = vec![0usize];
    for depth in 1..=l {
        let mut next = Vec::new();
        for &i in &frontier {
            let p = PointX::Interior {
                edge: nodes[i].edge,
                s: nodes[i].s,
            };
            for pre in preimages(phi, &p)? {
                next.push(nodes.len());
                nodes.push(TunnelNode {
                    edge: pre.edge,
                    s: pre.s,
                    depth,
                    parent: Some(i),
                    forward: pre.forward,
                });
            }
        }
        frontier = next;
    }
    Ok(Tunnel { nodes, depth: l })
}

/// A periodic point and its exact period.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PeriodicPoint {
    /// Positive edge rank.
    pub edge: usize,
    /// Position.
    pub s: Q,
    /// Least `d ≥ 1` with `ψ^d(x) = x`.
    pub period: usize,
}

/// Result of a periodic point search on one edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicSearch {
    /// Isolated interior points with `ψ^m(x) = x`, sorted by position.
    pub points: Vec<PeriodicPoint>,
    /// True when some itinerary of length `m` fixes a whole interval, which
    /// happens exactly when `φ^m(e) = e` (a periodic edge).
    pub periodic_edge: bool,
}

/// All regular interior points `x` of `edge` with `ψ^m(x) = x`, each tagged
/// with its exact period (a divisor of `m`). Every itinerary of length `m`
/// is an affine map `s ↦ α·s + β` on an open interval of `s`; its fixed point
/// is kept when it lies inside that interval, so orbits that touch a vertex
/// are excluded.
pub fn periodic_points(phi: &GraphMap, edge: usize, m: usize) -> Result<PeriodicSearch> {
    if m == 0 {
        return Err(Error::Structural("period must be at least 1".into()));
    }
    struct Branch {
        edge: usize,
        alpha: Q,
        beta: Q,
        lo: Q,
        hi: Q,
    }
    let mut stack = vec![(
        Branch {
            edge,
            alpha: Q::one(),
            beta: Q::zero(),
            lo: Q::zero(),
            hi: Q::one(),
        },
        0usize,
    )];
    let mut found = BTreeSet::new();
    let mut periodic_edge = false;
    while let Some((b, steps)) = stack.pop() {
        if steps == m {
            if b.edge != edge {
                continue;
            }
            if b.alpha == Q::one() {
                if b.beta.is_zero() {
                    periodic_edge = true;
                }
                continue;
            }
            let s = rational::sub(&Q::one(), &b.alpha).and_then(|den| rational::div(&b.beta, &den))?;
            if s > b.lo && s < b.hi {
                found.insert(s);
            }
            continue;
        }
        let img = phi.image(2 * b.edge);
        let k = img.len() as i128;
        for (j, &d) in img.iter().enumerate() {
            // current position x = α s + β must lie in (j/k, (j+1)/k)
            let a = Q::new(j as i128, k);
            let c = Q::new(j as i128 + 1, k);
            let (mut lo, mut hi) = (
                rational::div(&rational::sub(&a, &b.beta)?, &b.alpha)?,
                rational::div(&rational::sub(&c, &b.beta)?, &b.alpha)?,
            );
            if lo > hi {
                core::mem::swap(&mut lo, &mut hi);
            }
            let lo = if lo > b.lo { lo } else { b.lo };
            let hi = if hi < b.hi { hi } else { b.hi };
            if lo >= hi {
                continue;
            }
            // new position k x − j, flipped for inverted letters
            let ka = rational::mul_int(&b.alpha, k)?;
            let kb = rational::sub(&rational::mul_int(&b.beta, k)?, &Q::from_integer(j as i128))?;
            let (alpha, beta) = if is_positive(d) {
                (ka, kb)
            } else {
                (-ka, rational::sub(&Q::one(), &kb)?)
            };
            stack.push((
                Branch {
                    edge: positive(d),
                    alpha,
                    beta,
                    lo,
                    hi,
                },
                steps + 1,
            ));
        }
    }
    let mut points = Vec::new();
    for s in found {
        let start = PointX::Interior { edge, s };
        let mut cur = start.clone();
        let mut period = m;
        for d in 1..=m {
            cur = flow_step(phi, &cur)?;
            if cur == start {
                period = d;
                break;
            }
        }
        points.push(PeriodicPoint { edge, s, period });
    }
    Ok(PeriodicSearch { points, periodic_edge })
}

/// A point on a vertical edge of a ball.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BallPoint {
    /// Vertical edge id in the ball.
    pub edge: u32,
    /// Position in `(0, 1)`.
    pub s: Q,
}

/// One flow step inside a ball. `Ok(None)` means the 2-cell above is not in
/// the ball; hitting a vertex is a singular error.
pub fn ball_flow(ball: &BallComplex, p: &BallPoint) -> Result<Option<BallPoint>> {
    if !ball.has_cell(p.edge) {
        return Ok(None);
    }
    let top = ball.top(p.edge);
    let k = top.len() as i128;
    let x = rational::mul_int(&p.s, k)?;
    let j = x.floor();
    if x == j {
        return Err(Error::Singular(format!(
            "ball point on edge {} flows onto a vertex",
            p.edge
        )));
    }
    let frac = rational::sub(&x, &j)?;
    let (e, fwd) = top[*j.numer() as usize];
    Ok(Some(BallPoint {
        edge: e,
        s: if fwd { frac } else { rational::flip(&frac) },
    }))
}

/// `ψ₁`-preimages inside the ball (only from 2-cells present in the ball).
pub fn ball_preimages(ball: &BallComplex, p: &BallPoint) -> Result<Vec<BallPoint>> {
    let mut out = Vec::new();
    for slot in ball.slots(p.edge) {
        let sp = if slot.forward { p.s } else { rational::flip(&p.s) };
        out.push(BallPoint {
            edge: slot.cell,
            s: rational::branch_inverse(slot.j as usize, &sp, slot.k as usize)?,
        });
    }
    Ok(out)
}

/// Whether the ball holds every preimage of a point: a vertical edge has as
/// many preimage slots in `X̃` as occurrences of its edge in all images.
pub fn ball_preimages_complete(ball: &BallComplex, p: &BallPoint) -> bool {
    let phi = ball.phi();
    let k = ball.vedge(p.edge).edge;
    let expected: usize = (0..phi.graph().edge_count())
        .map(|e| phi.image(2 * e).iter().filter(|&&d| positive(d) == k).count())
        .sum();
    ball.slots(p.edge).len() == expected
}

/// A finite portion of a leaf inside a ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafTrace {
    /// Points of the leaf on vertical edges.
    pub nodes: Vec<BallPoint>,
    /// Height of each node.
    pub heights: Vec<i64>,
    /// Index of the node reached by the outgoing midsegment, if traced.
    pub out: Vec<Option<usize>>,
    /// Index of the base point.
    pub base: usize,
    /// True when the trace was clipped by the ball.
    pub truncated: bool,
}

impl LeafTrace {
    /// Checks the directed-tree invariants: at most one outgoing midsegment
    /// per node, heights increasing by one along it, and exactly one node
    /// (the top of the forward orbit) without a traced successor.
    pub fn is_directed_tree(&self) -> bool {
        let tops = self.out.iter().filter(|o| o.is_none()).count();
        tops == 1
            && self.out.iter().enumerate().all(|(i, o)| match o {
                Some(j) => self.heights[*j] == self.heights[i] + 1,
                None => true,
            })
    }
}

/// Traces `F` steps forward and `B` levels of preimages from `p`.
pub fn leaf_trace(ball: &BallComplex, p: &BallPoint, fwd: usize, back: usize) -> Result<LeafTrace> {
    let h0 = ball.vertex_height(ball.vedge(p.edge).src);
    let mut t = LeafTrace {
        nodes: vec![p.clone()],
        heights: vec![h0],
        out: vec![None],
        base: 0,
        truncated: false,
    };
    let mut cur = 0usize;
    for _ in 0..fwd {
        match ball_flow(ball, &t.nodes[cur])? {
            Some(q) => {
                let j = t.nodes.len();
                t.heights.push(t.heights[cur] + 1);
                t.nodes.push(q);
                t.out.push(None);
                t.out[cur] = Some(j);
                cur = j;
            }
            None => {
                t.truncated = true;
                break;
            }
        }
    }
    let mut frontier = vec![0usize];
    for _ in 0..back {
        let mut next = Vec::new();
        for &i in &frontier {
            if !ball_preimages_complete(ball, &t.nodes[i]) {
                t.truncated = true;
            }
            for q in ball_preimages(ball, &t.nodes[i].clone())? {
                let j = t.nodes.len();
                t.heights.push(t.heights[i] - 1);
                t.nodes.push(q);
                t.out.push(Some(i));
                next.push(j);
            }
        }
        frontier = next;
    }
    Ok(t)
}

/// Forward orbit of length `n` from a ball point; `None` if it leaves the ball.
pub fn forward_path(ball: &BallComplex, p: &BallPoint, n: usize) -> Result<Option<Vec<BallPoint>>> {
    let mut out = vec![p.clone()];
    for _ in 0..n {
        match ball_flow(ball, out.last().expect("nonempty"))? {
            Some(q) => out.push(q),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Intersections of a leaf portion with an edge path `γ` of the ball given
/// as a vertex sequence. Leaves meet the 1-skeleton only in their nodes on
/// vertical edges, so the intersection is the multiset of nodes lying on
/// the vertical edges traversed by `γ` (with multiplicity). Returns the hit
/// positions as `(step of γ, node index)` and the count's parity.
pub fn leaf_intersections(
    ball: &BallComplex,
    sigma: &[BallPoint],
    gamma: &[u32],
) -> Result<(Vec<(usize, usize)>, bool)> {
    let mut on_edge: hashbrown::HashMap<u32, Vec<usize>> = hashbrown::HashMap::new();
    for (i, p) in sigma.iter().enumerate() {
        if !rational::is_interior(&p.s) {
            return Err(Error::Degenerate("leaf point sits on a vertex of the ball".into()));
        }
        on_edge.entry(p.edge).or_default().push(i);
    }
    let mut hits = Vec::new();
    for (step, w) in gamma.windows(2).enumerate() {
        if let Some(id) = vertical_between(ball, w[0], w[1]) {
            if let Some(list) = on_edge.get(&id) {
                hits.extend(list.iter().map(|&i| (step, i)));
            }
        }
    }
    let odd = hits.len() % 2 == 1;
    Ok((hits, odd))
}

/// The vertical edge joining two adjacent vertices, if any.
pub fn vertical_between(ball: &BallComplex, x: u32, y: u32) -> Option<u32> {
    let ne = ball.weights().len();
    for k in 0..ne {
        let a = ball.out_edge(x, k);
        if a != NONE && ball.vedge(a).dst == y {
            return Some(a);
        }
        let b = ball.in_edge(x, k);
        if b != NONE && ball.vedge(b).src == y {
            return Some(b);
        }
    }
    None
}

/// A point of the level tree `Ṽ_m` inside the interior of an edge: the
/// edge runs from the vertex labelled `word` along `edge`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreePoint {
    /// Height `m`.
    pub height: i64,
    /// Reduced path from the base vertex to the edge's source.
    pub word: Vec<Dir>,
    /// Positive edge rank.
    pub edge: usize,
    /// Position along the edge.
    pub s: Q,
}

/// `ψ₁` on level-tree points.
pub fn tree_flow(phi: &GraphMap, p: &TreePoint) -> Result<TreePoint> {
    match land(phi, p.edge, &p.s)? {
        Landing::Vertex(_) => Err(Error::Singular("tree point flows onto a vertex".into())),
        Landing::Interior {
            edge,
            s,
            forward,
            letter,
        } => {
            let mut w = phi.tight_image(&p.word);
            crate::graph::reduce_onto(&mut w, &phi.image(2 * p.edge)[..letter]);
            if !forward {
                crate::graph::reduce_onto(&mut w, &[inv(2 * edge)]);
            }
            Ok(TreePoint {
                height: p.height + 1,
                word: w,
                edge,
                s,
            })
        }
    }
}

/// Measure `μ_e([0, s])` of the invariant length on an edge: `ψ` scales it
/// by `λ` and `μ_e([0, 1]) = ω_e`. Unrolled `depth` times, then linear.
fn pf_measure(phi: &GraphMap, lambda: f64, weight: &[f64], e: usize, s: &Q, depth: usize) -> Result<f64> {
    if weight[e] == 0.0 || s.is_zero() {
        return Ok(0.0);
    }
    if *s == Q::one() {
        return Ok(weight[e]);
    }
    if depth == 0 {
        return Ok(rational::to_f64(s) * weight[e]);
    }
    let img = phi.image(2 * e);
    let x = rational::mul_int(s, img.len() as i128)?;
    let j = *x.floor().numer() as usize;
    let frac = rational::sub(&x, &Q::from_integer(j as i128))?;
    let before: f64 = img[..j].iter().map(|&d| weight[positive(d)]).sum();
    let d = img[j];
    let f = positive(d);
    let part = if is_positive(d) {
        pf_measure(phi, lambda, weight, f, &frac, depth - 1)?
    } else {
        weight[f] - pf_measure(phi, lambda, weight, f, &rational::flip(&frac), depth - 1)?
    };
    Ok((before + part) / lambda)
}

fn pf_depth(lambda: f64) -> usize {
    let mut d = 0usize;
    let mut scale = 1.0;
    while scale >= 1e-15 && d < 200 {
        scale /= lambda;
        d += 1;
    }
    d
}

/// Weighted length of the tree geodesic between two points of one level,
/// counting `S^i` edges with `ω` (partial edges by the invariant measure)
/// and other edges of `V^i` as 0. Fails if the geodesic leaves `V^i`.
fn tree_length(
    phi: &GraphMap,
    lambda: f64,
    weight: &[f64],
    in_level: &[bool],
    p: &TreePoint,
    q: &TreePoint,
) -> Result<f64> {
    let depth = pf_depth(lambda);
    let mu = |e: usize, s: &Q| pf_measure(phi, lambda, weight, e, s, depth);
    if !in_level[p.edge] || !in_level[q.edge] {
        return Err(Error::Structural("points must lie in the level subgraph".into()));
    }
    if p.word == q.word && p.edge == q.edge {
        let (a, b) = if p.s <= q.s { (&p.s, &q.s) } else { (&q.s, &p.s) };
        return Ok(mu(p.edge, b)? - mu(p.edge, a)?);
    }
    let mut w: Vec<Dir> = p.word.iter().rev().map(|&d| inv(d)).collect();
    crate::graph::reduce_onto(&mut w, &q.word);
    let mut inner: &[Dir] = &w;
    let first = if inner.first() == Some(&(2 * p.edge)) {
        inner = &inner[1..];
        weight[p.edge] - mu(p.edge, &p.s)?
    } else {
        mu(p.edge, &p.s)?
    };
    let last = if inner.last() == Some(&inv(2 * q.edge)) {
        inner = &inner[..inner.len() - 1];
        weight[q.edge] - mu(q.edge, &q.s)?
    } else {
        mu(q.edge, &q.s)?
    };
    let mut total = first + last;
    for &d in inner {
        let k = positive(d);
        if !in_level[k] {
            return Err(Error::Structural(
                "level-tree geodesic leaves the level subgraph".into(),
            ));
        }
        total += weight[k];
    }
    Ok(total)
}

fn stratum_weights(phi: &GraphMap, st: &Stratum) -> Vec<f64> {
    let mut weight = vec![0.0; phi.graph().edge_count()];
    for (c, &k) in st.edges.iter().enumerate() {
        weight[k] = st.weights[c];
    }
    weight
}

/// Invariant measure `μ_e([0, s])` for an edge of an exponential stratum
/// (0 for edges outside it).
pub fn invariant_measure(phi: &GraphMap, st: &Stratum, edge: usize, s: &Q) -> Result<f64> {
    let lambda = st.lambda.unwrap_or(1.0);
    pf_measure(phi, lambda, &stratum_weights(phi, st), edge, s, pf_depth(lambda))
}

/// Estimate of the R-tree pseudometric for an exponential stratum:
/// `d_n = λ^{−n}·ℓ(ψ_n(p), ψ_n(q))` for `n = 0..=N`, where `ℓ` is the
/// ω-weighted `S^i`-length of the level-tree geodesic. Returns the sequence,
/// the estimate `d_N` and the gap `d₀ − d_N`.
pub fn rtree_distance_estimate(
    phi: &GraphMap,
    stratum: &Stratum,
    level: &[bool],
    p: &TreePoint,
    q: &TreePoint,
    n: usize,
) -> Result<(Vec<f64>, f64, f64)> {
    if stratum.kind != StratumKind::Exponential {
        return Err(Error::Structural("R-tree estimates need an exponential stratum".into()));
    }
    if p.height != q.height {
        return Err(Error::Structural("points must lie in one level".into()));
    }
    let lambda = stratum.lambda.unwrap_or(1.0);
    let weight = stratum_weights(phi, stratum);
    let (mut a, mut b) = (p.clone(), q.clone());
    let mut seq = Vec::with_capacity(n + 1);
    let mut scale = 1.0;
    for step in 0..=n {
        if step > 0 {
            a = tree_flow(phi, &a)?;
            b = tree_flow(phi, &b)?;
            scale /= lambda;
        }
        seq.push(scale * tree_length(phi, lambda, &weight, level, &a, &b)?);
    }
    let last = *seq.last().expect("n + 1 entries");
    let gap = seq[0] - last;
    Ok((seq, last, gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn ex2() -> GraphMap {
        GraphMap::rose_from_words(&[("a", "b"), ("b", "ab")]).unwrap()
    }

    #[test]
    fn steps() {
        let phi = ex2();
        let a = PointX::interior(0, q(1, 2)).unwrap();
        assert_eq!(flow_step(&phi, &a).unwrap(), PointX::Interior { edge: 1, s: q(1, 2) });
        let b = PointX::interior(1, q(1, 4)).unwrap();
        assert_eq!(flow_step(&phi, &b).unwrap(), PointX::Interior { edge: 0, s: q(1, 2) });
        assert_eq!(flow_step(&phi, &PointX::Vertex(0)).unwrap(), PointX::Vertex(0));
        let half = PointX::interior(1, q(1, 2)).unwrap();
        assert_eq!(flow_step(&phi, &half).unwrap(), PointX::Vertex(0));
    }

    #[test]
    fn preimage_counts() {
        let phi = ex2();
        assert_eq!(
            preimages(&phi, &PointX::interior(1, q(1, 3)).unwrap()).unwrap().len(),
            2
        );
        assert_eq!(
            preimages(&phi, &PointX::interior(0, q(1, 3)).unwrap()).unwrap().len(),
            1
        );
        let t = tunnel(&phi, &PointX::interior(1, q(1, 3)).unwrap(), 2).unwrap();
        assert_eq!(t.leaf_count(), 3);
    }

    #[test]
    fn period_three() {
        let phi = ex2();
        let found = periodic_points(&phi, 0, 3).unwrap();
        assert!(found.points.iter().any(|p| p.s == q(2, 3) && p.period == 3));
        assert!(periodic_points(&phi, 0, 1).unwrap().points.is_empty());
        let ex1 = GraphMap::rose_from_words(&[("a", "a"), ("b", "ba")]).unwrap();
        let r = periodic_points(&ex1, 0, 2).unwrap();
        assert!(r.points.is_empty() && r.periodic_edge);
    }
}

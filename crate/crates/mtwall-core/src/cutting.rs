//! Separation checks inside a ball: crossing parity, sides, cuts,
//! push-crops, deviation, lifted augmentations and the dual cube complex.
//!
//! Every verdict here is a finite, ball-restricted proxy. In particular the
//! hyperbolicity constant `δ` and the deviation threshold `M` are inputs.

use crate::ball::{BallComplex, NONE};
use crate::walls::{CrossingData, SideAssignment};
use crate::{Error, Result};
use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

/// Parameters of the deviation and cutting checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuttingConfig {
    /// Hyperbolicity constant, supplied by the user.
    pub delta: f64,
    /// Deviation threshold in midsegments; `None` never counts as leaflike.
    pub m: Option<usize>,
    /// Push depth.
    pub n: usize,
    /// Extra fellow-travel tolerance `ξ`.
    pub xi: f64,
}

impl Default for CuttingConfig {
    fn default() -> Self {
        CuttingConfig {
            delta: 1.0,
            m: Some(4),
            n: 1,
            xi: 0.0,
        }
    }
}

impl CuttingConfig {
    /// Checks that all parameters are nonnegative.
    pub fn validate(&self) -> Result<()> {
        if self.delta < 0.0 || self.xi < 0.0 || !self.delta.is_finite() || !self.xi.is_finite() {
            return Err(Error::Structural("delta and xi must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Fellow-travel tolerance `2δ + ξ`.
    pub fn tolerance(&self) -> f64 {
        2.0 * self.delta + self.xi
    }
}

/// Number of times a vertex path crosses the trace, and its parity.
pub fn crossing_parity(ball: &BallComplex, crossings: &CrossingData, path: &[u32]) -> Result<(u32, bool)> {
    let c = crossings.path_crossings(ball, path)?;
    Ok((c, c % 2 == 1))
}

/// Sides of ball vertices with respect to a trace.
pub fn side_assignment(ball: &BallComplex, crossings: &CrossingData) -> SideAssignment {
    crossings.side_assignment(ball)
}

/// True when `x` and `y` lie on different sides. Requires a consistent
/// two-class assignment covering both vertices.
pub fn cut_check(sides: &SideAssignment, x: u32, y: u32) -> Result<bool> {
    if sides.classes != 2 || !sides.consistent {
        return Err(Error::Degenerate(format!(
            "side assignment has {} classes (consistent: {})",
            sides.classes, sides.consistent
        )));
    }
    let sx = sides.side.get(x as usize).copied().flatten();
    let sy = sides.side.get(y as usize).copied().flatten();
    match (sx, sy) {
        (Some(a), Some(b)) => Ok(a != b),
        _ => Err(Error::Truncated("vertex outside the analysis radius".into())),
    }
}

#[derive(Clone, Copy)]
struct Dist(f64);
impl PartialEq for Dist {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}
impl Eq for Dist {}
impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Dist {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Multi-source distances in the ball, using only vertices within `radius`
/// of the base.
pub fn distances_within(ball: &BallComplex, sources: &[u32], radius: f64) -> Vec<f64> {
    let inside = |v: u32| ball.dist_from_base(v) <= radius + 1e-9;
    let mut dist = vec![f64::INFINITY; ball.vertex_count()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if inside(s) {
            dist[s as usize] = 0.0;
            heap.push((Reverse(Dist(0.0)), s));
        }
    }
    while let Some((Reverse(Dist(d)), x)) = heap.pop() {
        if d > dist[x as usize] {
            continue;
        }
        for (y, w) in ball.neighbours(x) {
            let nd = d + w;
            if inside(y) && nd < dist[y as usize] {
                dist[y as usize] = nd;
                heap.push((Reverse(Dist(nd)), y));
            }
        }
    }
    dist
}

/// A geodesic between two vertices among vertices within `radius` of the base.
pub fn geodesic_within(ball: &BallComplex, x: u32, y: u32, radius: f64) -> Result<Vec<u32>> {
    let dist = distances_within(ball, &[x], radius);
    if !dist[y as usize].is_finite() {
        return Err(Error::Truncated(format!(
            "no path from {x} to {y} inside radius {radius}"
        )));
    }
    let mut path = vec![y];
    let mut at = y;
    while at != x {
        let d = dist[at as usize];
        let prev = ball
            .neighbours(at)
            .filter(|&(z, w)| (dist[z as usize] + w - d).abs() <= 1e-9 * (1.0 + d))
            .map(|(z, _)| z)
            .min()
            .expect("a predecessor on a shortest path");
        path.push(prev);
        at = prev;
    }
    path.reverse();
    Ok(path)
}

/// Vertex path of the ball image `ψ₁` of one edge step.
fn flow_step_path(ball: &BallComplex, x: u32, y: u32) -> Result<Vec<u32>> {
    let (ux, uy) = (ball.up(x), ball.up(y));
    if ux == NONE || uy == NONE {
        return Err(Error::Truncated("push-crop flowed out of the ball".into()));
    }
    if ball.up(x) == y || ball.up(y) == x {
        return Ok(vec![ux, uy]);
    }
    let id = crate::flow::vertical_between(ball, x, y)
        .ok_or_else(|| Error::Structural(format!("vertices {x} and {y} are not adjacent")))?;
    if !ball.has_cell(id) {
        return Err(Error::Truncated("push-crop flowed out of the ball".into()));
    }
    let mut verts = vec![ux];
    for &(t, fwd) in ball.top(id) {
        let ve = ball.vedge(t);
        verts.push(if fwd { ve.dst } else { ve.src });
    }
    if ball.vedge(id).src != x {
        verts.reverse();
    }
    Ok(verts)
}

/// Removes backtracks `x y x` and then erases loops, yielding an embedded
/// path with the same endpoints.
pub fn embed_path(path: &[u32]) -> Vec<u32> {
    let mut stack: Vec<u32> = Vec::with_capacity(path.len());
    for &v in path {
        if stack.last() == Some(&v) {
            continue;
        }
        if stack.len() >= 2 && stack[stack.len() - 2] == v {
            stack.pop();
            continue;
        }
        stack.push(v);
    }
    let mut out: Vec<u32> = Vec::with_capacity(stack.len());
    let mut pos: BTreeMap<u32, usize> = BTreeMap::new();
    for v in stack {
        if let Some(&i) = pos.get(&v) {
            for w in out.drain(i + 1..) {
                pos.remove(&w);
            }
        } else {
            pos.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

/// `γ*_p`: the image of a vertex path under `ψ_p`, made embedded.
pub fn push_crop(ball: &BallComplex, path: &[u32], p: usize) -> Result<Vec<u32>> {
    let mut cur: Vec<u32> = path.to_vec();
    for _ in 0..p {
        if cur.len() == 1 {
            let u = ball.up(cur[0]);
            if u == NONE {
                return Err(Error::Truncated("push-crop flowed out of the ball".into()));
            }
            cur = vec![u];
            continue;
        }
        let mut next = Vec::new();
        for w in cur.windows(2) {
            let seg = flow_step_path(ball, w[0], w[1])?;
            if next.last() == seg.first() {
                next.extend_from_slice(&seg[1..]);
            } else {
                next.extend_from_slice(&seg);
            }
        }
        cur = next;
    }
    Ok(embed_path(&cur))
}

/// True when no vertex repeats.
pub fn is_embedded(path: &[u32]) -> bool {
    let set: BTreeSet<u32> = path.iter().copied().collect();
    set.len() == path.len()
}

/// Outcome of [`deviation_classify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Deviation {
    /// Some forward path fellow-travels the path for at least `M` midsegments.
    Leaflike {
        /// Start vertex of the witness forward path.
        start: u32,
        /// Number of midsegments fellow-travelled.
        length: usize,
    },
    /// No forward path fellow-travels for `M` midsegments.
    Deviating,
}

/// Longest run of a forward path (through vertices near `γ`) staying within
/// `2δ + ξ` of `γ`, and the verdict at threshold `M`. Distances are
/// measured inside the ball, so this is a finite proxy relative to the
/// configured `δ`.
pub fn deviation_classify(ball: &BallComplex, path: &[u32], cfg: &CuttingConfig) -> Result<(usize, Deviation)> {
    cfg.validate()?;
    let tol = cfg.tolerance();
    let dist = distances_within(ball, path, f64::INFINITY);
    let near = |v: u32| v != NONE && dist[v as usize] <= tol + 1e-9;
    let mut best = (0usize, NONE);
    for v in 0..ball.vertex_count() as u32 {
        if !near(v) {
            continue;
        }
        if ball.down(v) != NONE && near(ball.down(v)) {
            continue;
        }
        let mut len = 0;
        let mut x = v;
        while near(ball.up(x)) {
            x = ball.up(x);
            len += 1;
        }
        if len > best.0 || (len == best.0 && v < best.1) {
            best = (len, v);
        }
    }
    let verdict = match cfg.m {
        Some(m) if best.0 >= m && best.1 != NONE => Deviation::Leaflike {
            start: best.1,
            length: best.0,
        },
        _ => Deviation::Deviating,
    };
    Ok((best.0, verdict))
}

/// A point of `X̃_L` over a ball vertex: vertices at heights in `Lℤ`, and
/// vertices on the horizontal 1-cells of `X̃_L`, lift uniquely
/// (`anchor = None`); other vertices are recorded together with the bottom
/// edge (height in `Lℤ`) of the `X̃_L` 2-cell they are lifted into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LiftedPoint {
    /// Ball vertex.
    pub vertex: u32,
    /// Bottom vertical edge of the chosen 2-cell of `X̃_L`.
    pub anchor: Option<u32>,
}

/// Result of [`lifted_augmentation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedPath {
    /// The lifted path, including the inserted backtracks.
    pub points: Vec<LiftedPoint>,
    /// `(index in points, apex vertex)` of each lifted backtrack.
    pub backtracks: Vec<(usize, u32)>,
}

impl LiftedPath {
    /// Projection to `X̃`.
    pub fn projection(&self) -> Vec<u32> {
        self.points.iter().map(|p| p.vertex).collect()
    }
}

fn anchor_of_edge(ball: &BallComplex, id: u32, l: i64) -> Result<Option<u32>> {
    let h = ball.vertex_height(ball.vedge(id).src);
    let r = h.rem_euclid(l);
    let mut e = id;
    for _ in 0..r {
        e = ball
            .slots(e)
            .iter()
            .map(|s| s.cell)
            .min()
            .ok_or_else(|| Error::Truncated("ball too small to lift into X_L".into()))?;
    }
    Ok((r != 0).then_some(e))
}

fn on_lifted_skeleton(ball: &BallComplex, v: u32, l: i64) -> bool {
    let r = ball.vertex_height(v).rem_euclid(l);
    let mut x = v;
    for _ in 0..r {
        x = ball.down(x);
        if x == NONE {
            return false;
        }
    }
    true
}

fn anchor_of_step(ball: &BallComplex, x: u32, y: u32, l: i64) -> Result<Option<u32>> {
    if ball.up(x) == y || ball.up(y) == x {
        let low = if ball.up(x) == y { x } else { y };
        if on_lifted_skeleton(ball, low, l) {
            return Ok(None);
        }
        for k in 0..ball.weights().len() {
            for id in [ball.out_edge(low, k), ball.in_edge(low, k)] {
                if id != NONE {
                    return anchor_of_edge(ball, id, l);
                }
            }
        }
        return Err(Error::Truncated("ball too small to lift into X_L".into()));
    }
    let id = crate::flow::vertical_between(ball, x, y)
        .ok_or_else(|| Error::Structural(format!("vertices {x} and {y} are not adjacent")))?;
    anchor_of_edge(ball, id, l)
}

/// Lifts a vertex path of `X̃` to `X̃_L`, inserting a lifted backtrack
/// (up a forward path to the next height in `Lℤ` and back) wherever two
/// consecutive steps are lifted into different 2-cells of `X̃_L`.
pub fn lifted_augmentation(ball: &BallComplex, path: &[u32], l: usize) -> Result<LiftedPath> {
    if l == 0 {
        return Err(Error::Structural("L must be at least 1".into()));
    }
    let li = l as i64;
    if path.len() < 2 {
        return Ok(LiftedPath {
            points: path
                .iter()
                .map(|&v| LiftedPoint {
                    vertex: v,
                    anchor: None,
                })
                .collect(),
            backtracks: Vec::new(),
        });
    }
    let anchors: Vec<Option<u32>> = path
        .windows(2)
        .map(|w| anchor_of_step(ball, w[0], w[1], li))
        .collect::<Result<_>>()?;
    let mut points = vec![LiftedPoint {
        vertex: path[0],
        anchor: anchors[0],
    }];
    let mut backtracks = Vec::new();
    for i in 1..path.len() {
        let v = path[i];
        if i < anchors.len() {
            let (a, b) = (anchors[i - 1], anchors[i]);
            if a.is_some() && b.is_some() && a != b && ball.vertex_height(v).rem_euclid(li) != 0 {
                points.push(LiftedPoint { vertex: v, anchor: a });
                let mut chain = vec![v];
                while ball.vertex_height(*chain.last().expect("nonempty")).rem_euclid(li) != 0 {
                    let u = ball.up(*chain.last().expect("nonempty"));
                    if u == NONE {
                        return Err(Error::Truncated("lifted backtrack leaves the ball".into()));
                    }
                    chain.push(u);
                }
                let apex = *chain.last().expect("nonempty");
                for &u in &chain[1..] {
                    points.push(LiftedPoint {
                        vertex: u,
                        anchor: a.filter(|_| ball.vertex_height(u).rem_euclid(li) != 0),
                    });
                }
                backtracks.push((points.len() - 1, apex));
                for &u in chain[..chain.len() - 1].iter().rev() {
                    points.push(LiftedPoint { vertex: u, anchor: b });
                }
                continue;
            }
        }
        points.push(LiftedPoint {
            vertex: v,
            anchor: anchors[(i).min(anchors.len() - 1)],
        });
    }
    Ok(LiftedPath { points, backtracks })
}

/// Sageev cube complex of finitely many walls, from side vectors realized
/// by ball vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCubeComplex {
    /// Realized side vectors, sorted.
    pub vertices: Vec<Vec<u8>>,
    /// Pairs of vertices at Hamming distance 1.
    pub edges: Vec<(usize, usize)>,
    /// Cubes of dimension at least 2 as `(walls, corner vertex indices)`.
    pub cubes: Vec<(Vec<usize>, Vec<usize>)>,
}

impl DualCubeComplex {
    /// Number of 2-dimensional cubes.
    pub fn squares(&self) -> usize {
        self.cubes.iter().filter(|c| c.0.len() == 2).count()
    }

    /// Whether the 1-skeleton is connected.
    pub fn connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &(a, b) in &self.edges {
                let y = if a == x {
                    b
                } else if b == x {
                    a
                } else {
                    continue;
                };
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Builds the dual cube complex of walls given by their side assignments
/// over one ball. Only vertices with a side for every wall contribute.
pub fn dual_cube_complex(sides: &[SideAssignment]) -> Result<DualCubeComplex> {
    for (i, s) in sides.iter().enumerate() {
        if s.classes != 2 || !s.consistent {
            return Err(Error::Degenerate(format!(
                "wall {i} does not have two consistent sides"
            )));
        }
    }
    let n = sides.iter().map(|s| s.side.len()).min().unwrap_or(0);
    let mut realized: BTreeSet<Vec<u8>> = BTreeSet::new();
    for v in 0..n {
        let vec: Option<Vec<u8>> = sides.iter().map(|s| s.side[v]).collect();
        if let Some(vec) = vec {
            realized.insert(vec);
        }
    }
    let vertices: Vec<Vec<u8>> = realized.into_iter().collect();
    let index: BTreeMap<&Vec<u8>, usize> = vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut edges = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        for w in 0..v.len() {
            let mut u = v.clone();
            u[w] ^= 1;
            if let Some(&j) = index.get(&u) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    let k = sides.len();
    let mut cubes = Vec::new();
    for mask in 0u64..(1u64 << k.min(20)) {
        let walls: Vec<usize> = (0..k).filter(|&w| mask >> w & 1 == 1).collect();
        if walls.len() < 2 {
            continue;
        }
        let mut bases: BTreeSet<Vec<u8>> = BTreeSet::new();
        for v in &vertices {
            let mut b = v.clone();
            for &w in &walls {
                b[w] = 0;
            }
            bases.insert(b);
        }
        for b in bases {
            let mut corners = Vec::with_capacity(1 << walls.len());
            for c in 0u64..(1u64 << walls.len()) {
                let mut u = b.clone();
                for (t, &w) in walls.iter().enumerate() {
                    u[w] = (c >> t & 1) as u8;
                }
                match index.get(&u) {
                    Some(&j) => corners.push(j),
                    None => break,
                }
            }
            if corners.len() == 1 << walls.len() {
                cubes.push((walls.clone(), corners));
            }
        }
    }
    cubes.sort();
    Ok(DualCubeComplex { vertices, edges, cubes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sides(v: &[Option<u8>]) -> SideAssignment {
        SideAssignment {
            side: v.to_vec(),
            classes: 2,
            regions: 2,
            consistent: true,
        }
    }

    #[test]
    fn embedding() {
        assert_eq!(embed_path(&[1, 2, 3, 2, 4]), vec![1, 2, 4]);
        assert_eq!(embed_path(&[1, 2, 3, 4, 2, 5]), vec![1, 2, 5]);
        assert!(is_embedded(&embed_path(&[5, 6, 5, 6, 7, 8, 6, 9])));
    }

    #[test]
    fn small_dual_complexes() {
        let a = sides(&[Some(0), Some(0), Some(1), Some(1)]);
        let b = sides(&[Some(0), Some(1), Some(0), Some(1)]);
        let d = dual_cube_complex(&[a.clone(), b]).unwrap();
        assert_eq!((d.vertices.len(), d.edges.len(), d.squares()), (4, 4, 1));
        let c = sides(&[Some(0), Some(0), Some(0), Some(1)]);
        let nested = dual_cube_complex(&[a, c]).unwrap();
        assert_eq!((nested.vertices.len(), nested.edges.len(), nested.squares()), (3, 2, 0));
        let bad = SideAssignment {
            side: vec![Some(0)],
            classes: 1,
            regions: 1,
            consistent: true,
        };
        assert!(dual_cube_complex(&[bad]).is_err());
    }
}

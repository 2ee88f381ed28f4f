//! Finite balls in the universal cover `X̃` of the mapping torus.
//!
//! A vertex of `X̃` is labelled `(m, w)`: `m` is its height and `w` is a
//! reduced edge path in `V` starting at the base vertex `b_m = φ^m(b_0)`,
//! naming a vertex of the tree `Ṽ_m`. Vertical edges append one edge to `w`;
//! the horizontal edge leaving `(m, w)` ends at `(m + 1, [φ(w)])`. Walking a
//! horizontal edge downwards needs the inverse map, and the vertex map must
//! be a bijection so that `b_{m−1}` exists.
//!
//! The metric is the weighted graph metric on the 1-skeleton: a vertical
//! edge over `e` has length `ω_e` and a horizontal edge has length 1.
//! A 2-cell is kept only when its whole boundary lies in the ball. Cells are
//! indexed like the vertical edge on their bottom side.

use crate::graph::{inv, positive, Dir, GraphMap};
use crate::torus::{element_of, label_of, multiply, GroupElement};
use crate::{Error, Result};
use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use hashbrown::HashMap;

/// Sentinel for a missing neighbour.
pub const NONE: u32 = u32::MAX;

/// Label of a vertex of `X̃`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BallLabel {
    /// Height `m`.
    pub height: i64,
    /// Reduced path from `b_m`.
    pub word: Vec<Dir>,
}

/// Ball construction parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallConfig {
    /// Metric radius.
    pub radius: f64,
    /// Largest number of vertices allowed.
    pub vertex_cap: usize,
    /// Return the explored part instead of an error when the cap is hit.
    pub allow_partial: bool,
}

impl BallConfig {
    /// Radius `r` with the default cap of one million vertices.
    pub fn radius(r: f64) -> BallConfig {
        BallConfig {
            radius: r,
            vertex_cap: 1_000_000,
            allow_partial: false,
        }
    }
}

/// A vertical edge of the ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VEdge {
    /// Source vertex id.
    pub src: u32,
    /// Target vertex id.
    pub dst: u32,
    /// Positive edge rank in `V`.
    pub edge: usize,
}

/// One occurrence of a vertical edge in the top of a 2-cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TopSlot {
    /// The 2-cell (indexed by its bottom edge).
    pub cell: u32,
    /// Position of the letter in the top path.
    pub j: u32,
    /// Length of the top path.
    pub k: u32,
    /// True when the top path crosses the edge along its orientation.
    pub forward: bool,
}

/// A cell of the ball, for height queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRef {
    /// 0-cell.
    Vertex(u32),
    /// Vertical 1-cell.
    Vertical(u32),
    /// Horizontal 1-cell leaving the given vertex upwards.
    Horizontal(u32),
    /// 2-cell with the given bottom edge.
    Square(u32),
}

/// A height in `½ℤ`, stored doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfHeight(pub i64);

impl HalfHeight {
    /// As a float.
    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

/// Finite radius-`R` portion of `X̃` around a base vertex.
#[derive(Clone, Debug)]
pub struct BallComplex {
    phi: GraphMap,
    weights: Vec<f64>,
    radius: f64,
    base: u32,
    base_vertex: usize,
    heights: Vec<i64>,
    words: Vec<Vec<Dir>>,
    dist: Vec<f64>,
    index: HashMap<BallLabel, u32>,
    up: Vec<u32>,
    down: Vec<u32>,
    out_edge: Vec<u32>,
    in_edge: Vec<u32>,
    vedges: Vec<VEdge>,
    has_cell: Vec<bool>,
    top_start: Vec<u32>,
    top: Vec<(u32, bool)>,
    slot_start: Vec<u32>,
    slots: Vec<TopSlot>,
    truncated: bool,
    upward_only: bool,
}

#[derive(PartialEq)]
struct Item(f64, u32);
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

struct Explorer<'a> {
    phi: &'a GraphMap,
    perm: Vec<usize>,
    perm_inv: Option<Vec<usize>>,
    base_vertex: usize,
}

impl Explorer<'_> {
    fn base_at(&self, m: i64) -> usize {
        let mut v = self.base_vertex;
        if m >= 0 {
            for _ in 0..m {
                v = self.perm[v];
            }
        } else if let Some(pi) = &self.perm_inv {
            for _ in 0..(-m) {
                v = pi[v];
            }
        }
        v
    }

    fn end_of(&self, m: i64, w: &[Dir]) -> usize {
        match w.last() {
            Some(&d) => self.phi.graph().dst(d),
            None => self.base_at(m),
        }
    }
}

impl BallComplex {
    /// Explores the ball of radius `cfg.radius` around `base` with Dijkstra
    /// and assembles its cells. Vertices are numbered by height, then label.
    /// `weights` are the per-edge lengths `ω_e` (positive edge ranks).
    pub fn build(
        phi: &GraphMap,
        weights: &[f64],
        base_vertex: usize,
        base: BallLabel,
        cfg: BallConfig,
    ) -> Result<BallComplex> {
        let g = phi.graph();
        if weights.len() != g.edge_count() || weights.iter().any(|&w| w.is_nan() || w <= 0.0) {
            return Err(Error::Structural("ball needs one positive weight per edge".into()));
        }
        if base_vertex >= g.vertex_count() {
            return Err(Error::IndexOutOfRange {
                what: "vertex",
                index: base_vertex,
                len: g.vertex_count(),
            });
        }
        let perm: Vec<usize> = (0..g.vertex_count()).map(|v| phi.vertex_image(v)).collect();
        let bijective = {
            let mut seen = vec![false; perm.len()];
            perm.iter().all(|&w| !core::mem::replace(&mut seen[w], true))
        };
        let perm_inv = bijective.then(|| {
            let mut pi = vec![0; perm.len()];
            for (v, &w) in perm.iter().enumerate() {
                pi[w] = v;
            }
            pi
        });
        let downward = phi.has_inverse() && bijective;
        let ex = Explorer {
            phi,
            perm,
            perm_inv,
            base_vertex,
        };
        if base.height < 0 && !downward {
            return Err(Error::InverseRequired("ball base below height 0"));
        }
        crate::graph::EdgePath::new(g, ex.base_at(base.height), base.word.clone())?;
        let base = BallLabel {
            height: base.height,
            word: crate::graph::reduce(&base.word),
        };

        let eps = 1e-9;
        let mut labels: Vec<BallLabel> = vec![base.clone()];
        let mut dist: Vec<f64> = vec![0.0];
        let mut settled: Vec<bool> = vec![false];
        let mut index: HashMap<BallLabel, u32> = HashMap::new();
        index.insert(base, 0);
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, 0));
        let mut count = 0usize;
        let mut truncated = false;
        while let Some(Item(d, id)) = heap.pop() {
            if settled[id as usize] || d > dist[id as usize] {
                continue;
            }
            settled[id as usize] = true;
            count += 1;
            if count > cfg.vertex_cap {
                if !cfg.allow_partial {
                    return Err(Error::ResourceCap {
                        what: "ball vertices",
                        limit: cfg.vertex_cap,
                    });
                }
                settled[id as usize] = false;
                truncated = true;
                break;
            }
            let BallLabel { height: m, word: w } = labels[id as usize].clone();
            let mut nbrs: Vec<(BallLabel, f64)> = Vec::with_capacity(2 * g.edge_count() + 2);
            let end = ex.end_of(m, &w);
            for e in (0..g.dir_count()).filter(|&e| g.src(e) == end) {
                let mut w2 = w.clone();
                crate::graph::reduce_onto(&mut w2, &[e]);
                nbrs.push((BallLabel { height: m, word: w2 }, weights[positive(e)]));
            }
            nbrs.push((
                BallLabel {
                    height: m + 1,
                    word: phi.tight_image(&w),
                },
                1.0,
            ));
            if downward {
                nbrs.push((
                    BallLabel {
                        height: m - 1,
                        word: phi.tight_inverse_image(&w)?,
                    },
                    1.0,
                ));
            }
            for (lab, c) in nbrs {
                let nd = d + c;
                if nd > cfg.radius + eps {
                    continue;
                }
                match index.get(&lab) {
                    Some(&j) => {
                        if nd < dist[j as usize] {
                            dist[j as usize] = nd;
                            heap.push(Item(nd, j));
                        }
                    }
                    None => {
                        let j = labels.len() as u32;
                        index.insert(lab.clone(), j);
                        labels.push(lab);
                        dist.push(nd);
                        settled.push(false);
                        heap.push(Item(nd, j));
                    }
                }
            }
        }

        let mut keep: Vec<(BallLabel, f64)> = labels
            .into_iter()
            .zip(dist)
            .zip(settled)
            .filter(|(_, s)| *s)
            .map(|(x, _)| x)
            .collect();
        keep.sort_by(|a, b| a.0.cmp(&b.0));
        let n = keep.len();
        let mut index: HashMap<BallLabel, u32> = HashMap::with_capacity(n);
        let mut heights = Vec::with_capacity(n);
        let mut words = Vec::with_capacity(n);
        let mut dist = Vec::with_capacity(n);
        for (i, (lab, d)) in keep.into_iter().enumerate() {
            heights.push(lab.height);
            words.push(lab.word.clone());
            dist.push(d);
            index.insert(lab, i as u32);
        }

        let ne = g.edge_count();
        let look = |m: i64, w: Vec<Dir>| index.get(&BallLabel { height: m, word: w }).copied().unwrap_or(NONE);
        let mut up = vec![NONE; n];
        let mut down = vec![NONE; n];
        let mut out_edge = vec![NONE; n * ne];
        let mut in_edge = vec![NONE; n * ne];
        let mut vedges = Vec::new();
        for v in 0..n {
            let (m, w) = (heights[v], &words[v]);
            up[v] = look(m + 1, phi.tight_image(w));
            if downward {
                down[v] = look(m - 1, phi.tight_inverse_image(w)?);
            }
            let end = ex.end_of(m, w);
            for k in (0..ne).filter(|&k| g.src(2 * k) == end) {
                let mut w2 = w.clone();
                crate::graph::reduce_onto(&mut w2, &[2 * k]);
                let t = look(m, w2);
                if t != NONE {
                    let id = vedges.len() as u32;
                    vedges.push(VEdge {
                        src: v as u32,
                        dst: t,
                        edge: k,
                    });
                    out_edge[v * ne + k] = id;
                    in_edge[t as usize * ne + k] = id;
                }
            }
        }
        if !downward {
            for v in 0..n {
                if up[v] != NONE {
                    down[up[v] as usize] = v as u32;
                }
            }
        }

        let mut has_cell = vec![false; vedges.len()];
        let mut top_start = Vec::with_capacity(vedges.len() + 1);
        let mut top = Vec::new();
        for (id, ve) in vedges.iter().enumerate() {
            top_start.push(top.len() as u32);
            let (a, b) = (up[ve.src as usize], up[ve.dst as usize]);
            if a == NONE || b == NONE {
                continue;
            }
            let mark = top.len();
            let mut at = a;
            let mut ok = true;
            for &f in phi.image(2 * ve.edge) {
                let k = positive(f);
                let id2 = if f == 2 * k {
                    out_edge[at as usize * ne + k]
                } else {
                    in_edge[at as usize * ne + k]
                };
                if id2 == NONE {
                    ok = false;
                    break;
                }
                let e2 = vedges[id2 as usize];
                at = if f == 2 * k { e2.dst } else { e2.src };
                top.push((id2, f == 2 * k));
            }
            if ok {
                debug_assert_eq!(at, b);
                has_cell[id] = true;
            } else {
                top.truncate(mark);
            }
        }
        top_start.push(top.len() as u32);

        let mut counts = vec![0u32; vedges.len() + 1];
        for &(e, _) in &top {
            counts[e as usize] += 1;
        }
        let mut slot_start = Vec::with_capacity(vedges.len() + 1);
        let mut acc = 0u32;
        for c in counts.iter().take(vedges.len()) {
            slot_start.push(acc);
            acc += c;
        }
        slot_start.push(acc);
        let mut fill = slot_start.clone();
        let mut slots = vec![
            TopSlot {
                cell: 0,
                j: 0,
                k: 0,
                forward: true
            };
            acc as usize
        ];
        for c in 0..vedges.len() {
            let (s, t) = (top_start[c] as usize, top_start[c + 1] as usize);
            for (j, &(e, fwd)) in top[s..t].iter().enumerate() {
                let pos = &mut fill[e as usize];
                slots[*pos as usize] = TopSlot {
                    cell: c as u32,
                    j: j as u32,
                    k: (t - s) as u32,
                    forward: fwd,
                };
                *pos += 1;
            }
        }

        let mut out = BallComplex {
            phi: phi.clone(),
            weights: weights.to_vec(),
            radius: cfg.radius,
            base: 0,
            base_vertex,
            heights,
            words,
            dist,
            index,
            up,
            down,
            out_edge,
            in_edge,
            vedges,
            has_cell,
            top_start,
            top,
            slot_start,
            slots,
            truncated,
            upward_only: !downward,
        };
        out.base = out.dist.iter().position(|&d| d == 0.0).unwrap_or(0) as u32;
        Ok(out)
    }

    /// Ball around the identity of `G` for a rose.
    pub fn around_identity(phi: &GraphMap, weights: &[f64], cfg: BallConfig) -> Result<BallComplex> {
        BallComplex::build(
            phi,
            weights,
            0,
            BallLabel {
                height: 0,
                word: Vec::new(),
            },
            cfg,
        )
    }

    /// Ball around a group element (rose only).
    pub fn around(phi: &GraphMap, weights: &[f64], base: &GroupElement, cfg: BallConfig) -> Result<BallComplex> {
        let (height, word) = label_of(phi, base)?;
        BallComplex::build(phi, weights, 0, BallLabel { height, word }, cfg)
    }

    /// The map the ball was built from.
    pub fn phi(&self) -> &GraphMap {
        &self.phi
    }

    /// Edge weights `ω_e`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Radius.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Base vertex id.
    pub fn base(&self) -> u32 {
        self.base
    }

    /// Graph vertex `b_0` the labels are anchored at.
    pub fn base_vertex(&self) -> usize {
        self.base_vertex
    }

    /// True when the vertex cap cut exploration short.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// True when downward horizontal moves were unavailable during search.
    pub fn upward_only(&self) -> bool {
        self.upward_only
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.heights.len()
    }

    /// Number of vertical edges.
    pub fn vertical_count(&self) -> usize {
        self.vedges.len()
    }

    /// Number of horizontal edges.
    pub fn horizontal_count(&self) -> usize {
        self.up.iter().filter(|&&u| u != NONE).count()
    }

    /// Number of 2-cells.
    pub fn cell_count(&self) -> usize {
        self.has_cell.iter().filter(|&&c| c).count()
    }

    /// Height of a vertex.
    pub fn vertex_height(&self, v: u32) -> i64 {
        self.heights[v as usize]
    }

    /// Label of a vertex.
    pub fn label(&self, v: u32) -> BallLabel {
        BallLabel {
            height: self.heights[v as usize],
            word: self.words[v as usize].clone(),
        }
    }

    /// Word of a vertex label.
    pub fn word(&self, v: u32) -> &[Dir] {
        &self.words[v as usize]
    }

    /// Distance from the base found during exploration.
    pub fn dist_from_base(&self, v: u32) -> f64 {
        self.dist[v as usize]
    }

    /// Vertex with the given label, if present.
    pub fn find(&self, label: &BallLabel) -> Option<u32> {
        self.index.get(label).copied()
    }

    /// Upper end of the horizontal edge at `v`, or [`NONE`].
    pub fn up(&self, v: u32) -> u32 {
        self.up[v as usize]
    }

    /// Lower end of the horizontal edge into `v`, or [`NONE`].
    pub fn down(&self, v: u32) -> u32 {
        self.down[v as usize]
    }

    /// Vertical edge record.
    pub fn vedge(&self, id: u32) -> VEdge {
        self.vedges[id as usize]
    }

    /// All vertical edges.
    pub fn vedges(&self) -> &[VEdge] {
        &self.vedges
    }

    /// Vertical edge leaving `v` along the positive edge `k`.
    pub fn out_edge(&self, v: u32, k: usize) -> u32 {
        self.out_edge[v as usize * self.weights.len() + k]
    }

    /// Vertical edge arriving at `v` along the positive edge `k`.
    pub fn in_edge(&self, v: u32, k: usize) -> u32 {
        self.in_edge[v as usize * self.weights.len() + k]
    }

    /// Vertical edge and far endpoint for a step along oriented edge `d`.
    pub fn step(&self, v: u32, d: Dir) -> Option<(u32, u32)> {
        let k = positive(d);
        if d == 2 * k {
            let id = self.out_edge(v, k);
            (id != NONE).then(|| (id, self.vedges[id as usize].dst))
        } else {
            let id = self.in_edge(v, k);
            (id != NONE).then(|| (id, self.vedges[id as usize].src))
        }
    }

    /// True when the 2-cell above vertical edge `id` lies in the ball.
    pub fn has_cell(&self, id: u32) -> bool {
        self.has_cell[id as usize]
    }

    /// Top path of the 2-cell above `id` as (edge, forward) pairs.
    pub fn top(&self, id: u32) -> &[(u32, bool)] {
        let i = id as usize;
        &self.top[self.top_start[i] as usize..self.top_start[i + 1] as usize]
    }

    /// Occurrences of `id` in tops of 2-cells of the ball.
    pub fn slots(&self, id: u32) -> &[TopSlot] {
        let i = id as usize;
        &self.slots[self.slot_start[i] as usize..self.slot_start[i + 1] as usize]
    }

    /// Weight of a vertical edge.
    pub fn vedge_weight(&self, id: u32) -> f64 {
        self.weights[self.vedges[id as usize].edge]
    }

    /// Height of a cell: integer on vertices and vertical edges, half-odd on
    /// horizontal edges and 2-cells (their mid-slices).
    pub fn height(&self, c: CellRef) -> HalfHeight {
        match c {
            CellRef::Vertex(v) => HalfHeight(2 * self.heights[v as usize]),
            CellRef::Vertical(e) => HalfHeight(2 * self.heights[self.vedges[e as usize].src as usize]),
            CellRef::Horizontal(v) | CellRef::Square(v) => {
                let base = match c {
                    CellRef::Horizontal(_) => self.heights[v as usize],
                    _ => self.heights[self.vedges[v as usize].src as usize],
                };
                HalfHeight(2 * base + 1)
            }
        }
    }

    /// Neighbours of `v` in the 1-skeleton with edge lengths.
    pub fn neighbours(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let ne = self.weights.len();
        let vi = v as usize;
        let outs = (0..ne).filter_map(move |k| {
            let id = self.out_edge[vi * ne + k];
            (id != NONE).then(|| (self.vedges[id as usize].dst, self.weights[k]))
        });
        let ins = (0..ne).filter_map(move |k| {
            let id = self.in_edge[vi * ne + k];
            (id != NONE).then(|| (self.vedges[id as usize].src, self.weights[k]))
        });
        let hor = [self.up[vi], self.down[vi]]
            .into_iter()
            .filter(|&u| u != NONE)
            .map(|u| (u, 1.0));
        outs.chain(ins).chain(hor)
    }

    /// Single-source distances inside the ball's 1-skeleton.
    pub fn distances_from(&self, x: u32) -> Vec<f64> {
        self.dijkstra(x, None).0
    }

    fn dijkstra(&self, x: u32, target: Option<u32>) -> (Vec<f64>, Vec<u32>) {
        let n = self.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![NONE; n];
        let mut heap = BinaryHeap::new();
        dist[x as usize] = 0.0;
        heap.push(Item(0.0, x));
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v as usize] {
                continue;
            }
            if Some(v) == target {
                break;
            }
            for (u, c) in self.neighbours(v) {
                let nd = d + c;
                if nd < dist[u as usize] {
                    dist[u as usize] = nd;
                    prev[u as usize] = v;
                    heap.push(Item(nd, u));
                }
            }
        }
        (dist, prev)
    }

    /// Weighted shortest path inside the ball. This bounds the distance in
    /// `X̃` from above and equals it when some geodesic stays in the ball.
    pub fn geodesic_in_ball(&self, x: u32, y: u32) -> Result<(Vec<u32>, f64)> {
        let n = self.vertex_count() as u32;
        if x >= n || y >= n {
            return Err(Error::IndexOutOfRange {
                what: "ball vertex",
                index: x.max(y) as usize,
                len: n as usize,
            });
        }
        let (dist, prev) = self.dijkstra(x, Some(y));
        if !dist[y as usize].is_finite() {
            return Err(Error::Structural(
                "ball vertices are not connected inside the ball".into(),
            ));
        }
        let mut path = vec![y];
        let mut at = y;
        while at != x {
            at = prev[at as usize];
            path.push(at);
        }
        path.reverse();
        Ok((path, dist[y as usize]))
    }

    /// Image of a vertex under left multiplication by `g` (rose only), if it
    /// lies in the ball.
    pub fn translate(&self, g: &GroupElement, v: u32) -> Result<Option<u32>> {
        let lab = self.label(v);
        let h = element_of(&self.phi, lab.height, &lab.word)?;
        let gh = multiply(&self.phi, g, &h)?;
        let (height, word) = label_of(&self.phi, &gh)?;
        Ok(self.find(&BallLabel { height, word }))
    }

    /// Vertical edge from `v` along `d` and whether it is traversed forward.
    pub fn edge_towards(&self, v: u32, d: Dir) -> Option<(u32, bool)> {
        self.step(v, d).map(|(id, _)| (id, d % 2 == 0))
    }

    /// Oriented edge of `V` for a vertical edge traversed forwards or not.
    pub fn dir_of(&self, id: u32, forward: bool) -> Dir {
        let d = 2 * self.vedges[id as usize].edge;
        if forward {
            d
        } else {
            inv(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex2() -> GraphMap {
        GraphMap::rose_from_words(&[("a", "b"), ("b", "ab")])
            .unwrap()
            .with_inverse_words(&[("a", "bA"), ("b", "a")])
            .unwrap()
    }

    fn weights() -> Vec<f64> {
        vec![1.0, (1.0 + 5f64.sqrt()) / 2.0]
    }

    #[test]
    fn tiny_balls() {
        let phi = ex2();
        let b0 = BallComplex::around_identity(&phi, &weights(), BallConfig::radius(0.0)).unwrap();
        assert_eq!(b0.vertex_count(), 1);
        let b1 = BallComplex::around_identity(&phi, &weights(), BallConfig::radius(1.0)).unwrap();
        // a, A, up, down, plus the base
        assert_eq!(b1.vertex_count(), 5);
        let (_, d) = b1.geodesic_in_ball(b1.base(), b1.base()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let phi = ex2();
        let cfg = BallConfig {
            radius: 6.0,
            vertex_cap: 50,
            allow_partial: false,
        };
        assert!(matches!(
            BallComplex::around_identity(&phi, &weights(), cfg),
            Err(Error::ResourceCap { .. })
        ));
        let cfg = BallConfig {
            allow_partial: true,
            ..cfg
        };
        assert!(BallComplex::around_identity(&phi, &weights(), cfg).unwrap().truncated());
    }

    #[test]
    fn heights_and_cells() {
        let phi = ex2();
        let b = BallComplex::around_identity(&phi, &weights(), BallConfig::radius(4.0)).unwrap();
        for v in 0..b.vertex_count() as u32 {
            let u = b.up(v);
            if u != NONE {
                assert_eq!(b.vertex_height(u), b.vertex_height(v) + 1);
            }
        }
        assert!(b.cell_count() > 0);
        for id in 0..b.vertical_count() as u32 {
            if b.has_cell(id) {
                assert_eq!(
                    b.height(CellRef::Square(id)),
                    HalfHeight(2 * b.vertex_height(b.vedge(id).src) + 1)
                );
            }
        }
    }
}

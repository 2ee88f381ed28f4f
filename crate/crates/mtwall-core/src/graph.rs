//! Finite graphs, edge paths with free reduction, graph self-maps and the
//! direction/turn calculus behind legality.
//!
//! Oriented edges are indices into an explicit table of paired records: the
//! positive edge with rank `k` sits at index `2k` and its inverse at `2k + 1`.
//! Positive edges are ordered lexicographically by name, so that index order
//! is the deterministic edge order used by transition matrices and reports.
//!
//! Words use one token per oriented edge. A token is a letter followed by
//! optional digits; a lowercase initial letter names the edge and an uppercase
//! initial letter its inverse, so `"aBa"` is `a · b⁻¹ · a`.

use crate::{Error, Result};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

/// Index of an oriented edge. `d ^ 1` is its inverse.
pub type Dir = usize;

/// Inverse of an oriented edge index.
#[inline]
pub fn inv(d: Dir) -> Dir {
    d ^ 1
}

/// Positive edge underlying an oriented edge.
#[inline]
pub fn positive(d: Dir) -> usize {
    d >> 1
}

/// True iff `d` is the positively oriented copy.
#[inline]
pub fn is_positive(d: Dir) -> bool {
    d & 1 == 0
}

/// One oriented edge record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    /// Token naming this orientation (`a` or `A`).
    pub name: String,
    /// Source vertex.
    pub src: usize,
    /// Target vertex.
    pub dst: usize,
    /// Index of the paired inverse record.
    pub inverse: Dir,
}

/// A finite graph with an explicit fixed-point-free involution on edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<EdgeRecord>,
    by_name: BTreeMap<String, Dir>,
    by_vertex: BTreeMap<String, usize>,
}

fn valid_edge_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

fn capitalize(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for (i, c) in name.chars().enumerate() {
        out.push(if i == 0 { c.to_ascii_uppercase() } else { c });
    }
    out
}

impl Graph {
    /// Builds a graph from vertex ids and `(name, src, dst)` triples naming
    /// the positive edges. Edge names must be a lowercase letter followed by
    /// optional digits.
    pub fn new(vertices: Vec<String>, edges: Vec<(String, String, String)>) -> Result<Graph> {
        let mut by_vertex = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if by_vertex.insert(v.clone(), i).is_some() {
                return Err(Error::Structural(format!("duplicate vertex {v:?}")));
            }
        }
        let mut sorted = edges;
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let mut records = Vec::with_capacity(2 * sorted.len());
        let mut by_name = BTreeMap::new();
        for (name, src, dst) in sorted {
            if !valid_edge_name(&name) {
                return Err(Error::Structural(format!(
                    "edge name {name:?} must be a lowercase letter plus optional digits"
                )));
            }
            let look = |v: &String| {
                by_vertex
                    .get(v)
                    .copied()
                    .ok_or_else(|| Error::Structural(format!("edge {name:?} uses unknown vertex {v:?}")))
            };
            let (s, t) = (look(&src)?, look(&dst)?);
            let k = records.len();
            if by_name.insert(name.clone(), k).is_some() {
                return Err(Error::Structural(format!("duplicate edge {name:?}")));
            }
            let upper = capitalize(&name);
            by_name.insert(upper.clone(), k + 1);
            records.push(EdgeRecord {
                name,
                src: s,
                dst: t,
                inverse: k + 1,
            });
            records.push(EdgeRecord {
                name: upper,
                src: t,
                dst: s,
                inverse: k,
            });
        }
        Ok(Graph {
            vertices,
            edges: records,
            by_name,
            by_vertex,
        })
    }

    /// The rose with one vertex `"v"` and the given loop names.
    pub fn rose(names: &[&str]) -> Result<Graph> {
        let v = String::from("v");
        Graph::new(
            vec![v.clone()],
            names.iter().map(|n| (n.to_string(), v.clone(), v.clone())).collect(),
        )
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of (unoriented) edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len() / 2
    }

    /// Number of oriented edges, i.e. directions.
    pub fn dir_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertex ids in input order.
    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    /// Looks up a vertex by id.
    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.by_vertex
            .get(name)
            .copied()
            .ok_or_else(|| Error::Structural(format!("unknown vertex {name:?}")))
    }

    /// The oriented edge record at `d`.
    pub fn edge(&self, d: Dir) -> &EdgeRecord {
        &self.edges[d]
    }

    /// Token for an oriented edge.
    pub fn name(&self, d: Dir) -> &str {
        &self.edges[d].name
    }

    /// Source vertex of an oriented edge.
    pub fn src(&self, d: Dir) -> usize {
        self.edges[d].src
    }

    /// Target vertex of an oriented edge.
    pub fn dst(&self, d: Dir) -> usize {
        self.edges[d].dst
    }

    /// Looks up an oriented edge by token.
    pub fn dir(&self, token: &str) -> Result<Dir> {
        self.by_name
            .get(token)
            .copied()
            .ok_or_else(|| Error::Structural(format!("unknown edge token {token:?}")))
    }

    /// True iff the graph has exactly one vertex.
    pub fn is_rose(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Splits a word into oriented edges. Whitespace is ignored.
    pub fn parse_word(&self, word: &str) -> Result<Vec<Dir>> {
        let mut out = Vec::new();
        let mut token = String::new();
        let flush = |token: &mut String, out: &mut Vec<Dir>| -> Result<()> {
            if !token.is_empty() {
                out.push(self.dir(token)?);
                token.clear();
            }
            Ok(())
        };
        for c in word.chars() {
            if c.is_whitespace() {
                flush(&mut token, &mut out)?;
            } else if c.is_ascii_alphabetic() {
                flush(&mut token, &mut out)?;
                token.push(c);
            } else if c.is_ascii_digit() && !token.is_empty() {
                token.push(c);
            } else {
                return Err(Error::Structural(format!("bad character {c:?} in word {word:?}")));
            }
        }
        flush(&mut token, &mut out)?;
        Ok(out)
    }

    /// Concatenates tokens.
    pub fn word(&self, dirs: &[Dir]) -> String {
        dirs.iter().map(|&d| self.name(d)).collect()
    }

    /// Parses a word into a path. An empty word needs `start`.
    pub fn path(&self, word: &str, start: Option<usize>) -> Result<EdgePath> {
        let dirs = self.parse_word(word)?;
        let start = match (dirs.first(), start) {
            (_, Some(v)) => v,
            (Some(&d), None) => self.src(d),
            (None, None) => return Err(Error::Structural("empty path needs a start vertex".into())),
        };
        EdgePath::new(self, start, dirs)
    }
}

/// A combinatorial edge path, possibly empty, with a fixed start vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgePath {
    start: usize,
    end: usize,
    edges: Vec<Dir>,
}

impl EdgePath {
    /// Validates endpoint compatibility.
    pub fn new(g: &Graph, start: usize, edges: Vec<Dir>) -> Result<EdgePath> {
        if start >= g.vertex_count() {
            return Err(Error::IndexOutOfRange {
                what: "vertex",
                index: start,
                len: g.vertex_count(),
            });
        }
        let mut at = start;
        for (i, &d) in edges.iter().enumerate() {
            if d >= g.dir_count() {
                return Err(Error::IndexOutOfRange {
                    what: "edge",
                    index: d,
                    len: g.dir_count(),
                });
            }
            if g.src(d) != at {
                return Err(Error::Structural(format!(
                    "edge {} at position {i} does not start where the path is",
                    g.name(d)
                )));
            }
            at = g.dst(d);
        }
        Ok(EdgePath { start, end: at, edges })
    }

    /// Empty path at `v`.
    pub fn empty(v: usize) -> EdgePath {
        EdgePath {
            start: v,
            end: v,
            edges: Vec::new(),
        }
    }

    /// Start vertex.
    pub fn start(&self) -> usize {
        self.start
    }

    /// End vertex.
    pub fn end(&self) -> usize {
        self.end
    }

    /// Oriented edges in order.
    pub fn edges(&self) -> &[Dir] {
        &self.edges
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// True iff there are no edges.
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// True iff no edge is followed by its inverse.
    pub fn is_reduced(&self) -> bool {
        self.edges.windows(2).all(|w| w[1] != inv(w[0]))
    }

    /// The reverse path.
    pub fn inverse(&self) -> EdgePath {
        EdgePath {
            start: self.end,
            end: self.start,
            edges: self.edges.iter().rev().map(|&d| inv(d)).collect(),
        }
    }

    /// Concatenation; fails if `self` does not end where `other` starts.
    pub fn concat(&self, other: &EdgePath) -> Result<EdgePath> {
        if self.end != other.start {
            return Err(Error::Structural("concatenated paths do not meet".into()));
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Ok(EdgePath {
            start: self.start,
            end: other.end,
            edges,
        })
    }

    /// Turns taken at interior vertices, as pairs of directions there.
    pub fn turns(&self) -> impl Iterator<Item = Turn> + '_ {
        self.edges.windows(2).map(|w| Turn::new(inv(w[0]), w[1]))
    }

    /// Renders with the graph's tokens.
    pub fn word(&self, g: &Graph) -> String {
        g.word(&self.edges)
    }
}

/// Free reduction of a slice of oriented edges.
pub fn reduce(dirs: &[Dir]) -> Vec<Dir> {
    let mut out: Vec<Dir> = Vec::with_capacity(dirs.len());
    for &d in dirs {
        if out.last() == Some(&inv(d)) {
            out.pop();
        } else {
            out.push(d);
        }
    }
    out
}

/// Appends `dirs` to an already reduced `acc`, cancelling at the seam.
pub fn reduce_onto(acc: &mut Vec<Dir>, dirs: &[Dir]) {
    for &d in dirs {
        if acc.last() == Some(&inv(d)) {
            acc.pop();
        } else {
            acc.push(d);
        }
    }
}

/// The unique reduced path freely equal to `p`.
pub fn tighten(p: &EdgePath) -> EdgePath {
    EdgePath {
        start: p.start,
        end: p.end,
        edges: reduce(&p.edges),
    }
}

/// A graph self-map: vertices to vertices, edges to nonempty paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMap {
    graph: Graph,
    vertex_map: Vec<usize>,
    images: Vec<Vec<Dir>>,
    inverse: Option<InverseMap>,
}

/// Inverse data: a vertex bijection and edge images for the inverse map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseMap {
    vertex_map: Vec<usize>,
    images: Vec<Vec<Dir>>,
}

fn orient_images(g: &Graph, positive_images: Vec<Vec<Dir>>) -> Vec<Vec<Dir>> {
    let mut images = vec![Vec::new(); g.dir_count()];
    for (k, img) in positive_images.into_iter().enumerate() {
        images[2 * k + 1] = img.iter().rev().map(|&d| inv(d)).collect();
        images[2 * k] = img;
    }
    images
}

impl GraphMap {
    /// Builds a map from a vertex assignment and the images of positive
    /// edges (indexed by positive rank). Checks that every image is a
    /// nonempty path from `φ(src e)` to `φ(dst e)`.
    pub fn new(graph: Graph, vertex_map: Vec<usize>, edge_images: Vec<Vec<Dir>>) -> Result<GraphMap> {
        if vertex_map.len() != graph.vertex_count() || edge_images.len() != graph.edge_count() {
            return Err(Error::Structural("map must assign every vertex and edge".into()));
        }
        if let Some(&v) = vertex_map.iter().find(|&&v| v >= graph.vertex_count()) {
            return Err(Error::IndexOutOfRange {
                what: "vertex",
                index: v,
                len: graph.vertex_count(),
            });
        }
        for (k, img) in edge_images.iter().enumerate() {
            let e = 2 * k;
            if img.is_empty() {
                return Err(Error::Structural(format!("image of {} is empty", graph.name(e))));
            }
            let p = EdgePath::new(&graph, vertex_map[graph.src(e)], img.clone())?;
            if p.end() != vertex_map[graph.dst(e)] {
                return Err(Error::Structural(format!(
                    "image of {} does not end at the image of its target",
                    graph.name(e)
                )));
            }
        }
        let images = orient_images(&graph, edge_images);
        Ok(GraphMap {
            graph,
            vertex_map,
            images,
            inverse: None,
        })
    }

    /// Builds a map on a rose from words, e.g. `[("a", "b"), ("b", "ab")]`.
    pub fn rose_from_words(pairs: &[(&str, &str)]) -> Result<GraphMap> {
        let names: Vec<&str> = pairs.iter().map(|p| p.0).collect();
        let g = Graph::rose(&names)?;
        let mut images = vec![Vec::new(); g.edge_count()];
        for (name, word) in pairs {
            images[positive(g.dir(name)?)] = g.parse_word(word)?;
        }
        GraphMap::new(g, vec![0], images)
    }

    /// Attaches inverse data and verifies it: the vertex maps must be
    /// mutually inverse bijections and `φ(ψ(e))`, `ψ(φ(e))` must both
    /// tighten to `e` for every edge.
    pub fn with_inverse(mut self, vertex_map: Vec<usize>, edge_images: Vec<Vec<Dir>>) -> Result<GraphMap> {
        let g = &self.graph;
        if vertex_map.len() != g.vertex_count() || edge_images.len() != g.edge_count() {
            return Err(Error::Structural("inverse must assign every vertex and edge".into()));
        }
        for v in 0..g.vertex_count() {
            let w = *vertex_map
                .get(v)
                .filter(|&&w| w < g.vertex_count())
                .ok_or_else(|| Error::Structural("inverse vertex map out of range".into()))?;
            if self.vertex_map[w] != v || vertex_map[self.vertex_map[v]] != v {
                return Err(Error::Structural("vertex maps are not mutually inverse".into()));
            }
        }
        for (k, img) in edge_images.iter().enumerate() {
            let e = 2 * k;
            let p = EdgePath::new(g, vertex_map[g.src(e)], img.clone())?;
            if p.end() != vertex_map[g.dst(e)] {
                return Err(Error::Structural(format!(
                    "inverse image of {} does not end at the image of its target",
                    g.name(e)
                )));
            }
        }
        let inverse = InverseMap {
            vertex_map,
            images: orient_images(g, edge_images),
        };
        for k in 0..g.edge_count() {
            let e = 2 * k;
            let there_and_back = reduce(&substitute(&self.images, &inverse.images[e]));
            let back_and_there = reduce(&substitute(&inverse.images, &self.images[e]));
            if there_and_back != [e] || back_and_there != [e] {
                return Err(Error::Structural(format!(
                    "inverse map does not invert the map on {}",
                    g.name(e)
                )));
            }
        }
        self.inverse = Some(inverse);
        Ok(self)
    }

    /// Like [`GraphMap::with_inverse`] for roses, from words.
    pub fn with_inverse_words(self, pairs: &[(&str, &str)]) -> Result<GraphMap> {
        let g = &self.graph;
        let mut images = vec![Vec::new(); g.edge_count()];
        for (name, word) in pairs {
            images[positive(g.dir(name)?)] = g.parse_word(word)?;
        }
        let vm = (0..g.vertex_count())
            .map(|v| self.vertex_map.iter().position(|&w| w == v).unwrap_or(usize::MAX))
            .collect();
        self.with_inverse(vm, images)
    }

    /// The underlying graph.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Image of a vertex.
    pub fn vertex_image(&self, v: usize) -> usize {
        self.vertex_map[v]
    }

    /// Unreduced image of an oriented edge.
    pub fn image(&self, d: Dir) -> &[Dir] {
        &self.images[d]
    }

    /// True iff inverse data is loaded.
    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// Vertex image under the inverse map.
    pub fn inverse_vertex_image(&self, v: usize) -> Result<usize> {
        Ok(self.inverse_data("inverse vertex image")?.vertex_map[v])
    }

    /// Unreduced image of an oriented edge under the inverse map.
    pub fn inverse_image(&self, d: Dir) -> Result<&[Dir]> {
        Ok(&self.inverse_data("inverse edge image")?.images[d])
    }

    fn inverse_data(&self, op: &'static str) -> Result<&InverseMap> {
        self.inverse.as_ref().ok_or(Error::InverseRequired(op))
    }

    /// The map `φ^L` obtained by unreduced substitution; inverse data is
    /// dropped.
    pub fn power(&self, l: usize) -> Result<GraphMap> {
        if l == 0 {
            return Err(Error::Structural("power must be at least 1".into()));
        }
        let mut vm: Vec<usize> = (0..self.graph.vertex_count()).collect();
        let mut imgs: Vec<Vec<Dir>> = (0..self.graph.edge_count()).map(|k| vec![2 * k]).collect();
        for _ in 0..l {
            vm = vm.iter().map(|&v| self.vertex_map[v]).collect();
            imgs = imgs.iter().map(|w| substitute(&self.images, w)).collect();
        }
        GraphMap::new(self.graph.clone(), vm, imgs)
    }

    /// Reduced image of a reduced word starting anywhere, used for
    /// label arithmetic in the universal cover.
    pub fn tight_image(&self, dirs: &[Dir]) -> Vec<Dir> {
        let mut out = Vec::with_capacity(dirs.len() * 2);
        for &d in dirs {
            reduce_onto(&mut out, &self.images[d]);
        }
        out
    }

    /// Reduced image under the inverse map.
    pub fn tight_inverse_image(&self, dirs: &[Dir]) -> Result<Vec<Dir>> {
        let inverse = self.inverse_data("downward move")?;
        let mut out = Vec::with_capacity(dirs.len() * 2);
        for &d in dirs {
            reduce_onto(&mut out, &inverse.images[d]);
        }
        Ok(out)
    }
}

fn substitute(images: &[Vec<Dir>], dirs: &[Dir]) -> Vec<Dir> {
    dirs.iter().flat_map(|&d| images[d].iter().copied()).collect()
}

/// Concatenation of edge images, not reduced.
pub fn apply_map(phi: &GraphMap, p: &EdgePath) -> EdgePath {
    let edges = substitute(&phi.images, &p.edges);
    EdgePath {
        start: phi.vertex_map[p.start],
        end: phi.vertex_map[p.end],
        edges,
    }
}

/// `tighten(φⁿ(p))`, reducing after every substitution.
pub fn iterate_tight(phi: &GraphMap, p: &EdgePath, n: usize) -> EdgePath {
    let mut cur = tighten(p);
    for _ in 0..n {
        cur = EdgePath {
            start: phi.vertex_map[cur.start],
            end: phi.vertex_map[cur.end],
            edges: phi.tight_image(&cur.edges),
        };
    }
    cur
}

/// A turn: an unordered pair of directions at a common vertex, stored with
/// `a <= b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Turn {
    /// Smaller direction.
    pub a: Dir,
    /// Larger direction.
    pub b: Dir,
}

impl Turn {
    /// Normalizes the order.
    pub fn new(x: Dir, y: Dir) -> Turn {
        if x <= y {
            Turn { a: x, b: y }
        } else {
            Turn { a: y, b: x }
        }
    }
}

/// `D(d)`: the first edge of `φ(d)`, for every direction.
pub fn direction_map(phi: &GraphMap) -> Vec<Dir> {
    phi.images.iter().map(|img| img[0]).collect()
}

/// First `n` and direction with `Dⁿ(x) = Dⁿ(y)`, or `None` if the pair never
/// collides. Exact: pairs are iterated until they repeat.
pub fn first_collision(dmap: &[Dir], x: Dir, y: Dir) -> Option<(usize, Dir)> {
    let mut seen = BTreeSet::new();
    let (mut p, mut q) = (x, y);
    let mut n = 0;
    loop {
        if p == q {
            return Some((n, p));
        }
        if !seen.insert((p, q)) {
            return None;
        }
        p = dmap[p];
        q = dmap[q];
        n += 1;
    }
}

/// All turns `{d₁, d₂}` (distinct directions at a common vertex) with
/// `Dⁿ(d₁) = Dⁿ(d₂)` for some `n ≥ 0`.
pub fn illegal_turns(phi: &GraphMap) -> BTreeSet<Turn> {
    let g = &phi.graph;
    let dmap = direction_map(phi);
    let mut out = BTreeSet::new();
    for x in 0..g.dir_count() {
        for y in (x + 1)..g.dir_count() {
            if g.src(x) == g.src(y) && first_collision(&dmap, x, y).is_some() {
                out.insert(Turn { a: x, b: y });
            }
        }
    }
    out
}

/// Legality of a reduced path. With `filtration = Some((levels, i))`, an
/// illegal turn is tolerated when its collision direction lies in `V^{i-1}`,
/// where `levels[j]` is the positive-edge membership of `V^{j+1}`.
pub fn path_legal(phi: &GraphMap, p: &EdgePath, filtration: Option<(&[Vec<bool>], usize)>) -> Result<bool> {
    let lower: Option<&[bool]> = match filtration {
        None => None,
        Some((levels, i)) => {
            if i == 0 || i > levels.len() {
                return Err(Error::IndexOutOfRange {
                    what: "stratum",
                    index: i,
                    len: levels.len(),
                });
            }
            if i == 1 {
                Some(&[])
            } else {
                Some(&levels[i - 2])
            }
        }
    };
    let dmap = direction_map(phi);
    for t in p.turns() {
        if let Some((_, f)) = first_collision(&dmap, t.a, t.b) {
            let tolerated = lower.is_some_and(|low| low.get(positive(f)).copied().unwrap_or(false));
            if !tolerated {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex2() -> GraphMap {
        GraphMap::rose_from_words(&[("a", "b"), ("b", "ab")]).unwrap()
    }

    #[test]
    fn tighten_examples() {
        let g = Graph::rose(&["a", "b", "c"]).unwrap();
        assert!(tighten(&g.path("aA", None).unwrap()).is_empty());
        assert_eq!(tighten(&g.path("abBa", None).unwrap()).word(&g), "aa");
        assert_eq!(tighten(&g.path("baABc", None).unwrap()).word(&g), "c");
    }

    #[test]
    fn substitution_examples() {
        let phi = ex2();
        let g = phi.graph().clone();
        assert_eq!(apply_map(&phi, &g.path("a", None).unwrap()).word(&g), "b");
        assert_eq!(apply_map(&phi, &g.path("ab", None).unwrap()).word(&g), "bab");
        assert!(apply_map(&phi, &EdgePath::empty(0)).is_empty());
        assert_eq!(iterate_tight(&phi, &g.path("a", None).unwrap(), 3).word(&g), "bab");
    }

    #[test]
    fn directions_and_turns() {
        let phi = ex2();
        let g = phi.graph();
        let d = direction_map(&phi);
        assert_eq!(d[g.dir("a").unwrap()], g.dir("b").unwrap());
        assert_eq!(d[g.dir("b").unwrap()], g.dir("a").unwrap());
        let only = Turn::new(g.dir("A").unwrap(), g.dir("B").unwrap());
        assert_eq!(illegal_turns(&phi).into_iter().collect::<Vec<_>>(), vec![only]);
        let fold = GraphMap::rose_from_words(&[("a", "ab"), ("b", "ab")]).unwrap();
        let g2 = fold.graph();
        let bad = Turn::new(g2.dir("a").unwrap(), g2.dir("b").unwrap());
        assert!(illegal_turns(&fold).contains(&bad));
        assert!(!path_legal(&fold, &g2.path("Ab", None).unwrap(), None).unwrap());
    }

    #[test]
    fn inverse_is_checked() {
        let phi = ex2().with_inverse_words(&[("a", "bA"), ("b", "a")]).unwrap();
        assert!(phi.has_inverse());
        assert!(ex2().with_inverse_words(&[("a", "b"), ("b", "a")]).is_err());
    }

    #[test]
    fn malformed_paths_rejected() {
        let g = Graph::new(vec!["x".into(), "y".into()], vec![("e".into(), "x".into(), "y".into())]).unwrap();
        assert!(g.path("ee", None).is_err());
        assert_eq!(g.path("eE", None).unwrap().end(), 0);
    }
}

//! Immersed walls built from busts and tunnels, their lifts into balls of
//! `X̃`, approximations and zone bookkeeping.
//!
//! A wall is assembled in two layers. At the level of `X` the graph `E` (a
//! copy of `V` at height `½`) is punctured at the primary busts `d_i` and
//! at the secondary busts `d_ij ∈ (φ^L)⁻¹(d_i)`; the components of the
//! result are the nuclei. Each primary carries two tunnels `←T_i`, `→T_i`
//! (copies of `T_L(d_i)`) whose roots and leaves are glued to end vertices
//! of `E♭`. Inside a ball the same recipe is replayed locally by
//! [`WallTrace`], which walks the preimage of the wall from a seed.
//!
//! Orientation conventions: `←d` is the end of the segment to the left of a
//! bust (smaller position), `→d` the end to its right. A secondary bust
//! reached through an orientation-reversing branch swaps the two ends.

use crate::ball::{BallComplex, NONE};
use crate::flow::{self, BallPoint, PointX, Tunnel};
use crate::graph::{positive, GraphMap};
use crate::rational::{self, Q};
use crate::strata::{Stratum, StratumKind};
use crate::{Error, Result};
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use hashbrown::HashMap;
use num_integer::Integer;
use num_traits::{One, Zero};

/// A secondary bust.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Secondary {
    /// Positive edge rank.
    pub edge: usize,
    /// Position.
    pub s: Q,
    /// Index of the primary bust it maps to under `ψ_L`.
    pub primary: usize,
    /// Orientation of the branch of `ψ_L` through this point.
    pub forward: bool,
}

/// Primary busts, the tunnel length and derived secondary busts.
#[derive(Clone, Debug)]
pub struct BustSet {
    primaries: Vec<(usize, Q)>,
    l: usize,
    periodic: Vec<bool>,
    secondaries: Vec<Secondary>,
}

impl BustSet {
    /// Validates the primary busts and derives the secondary ones.
    ///
    /// Fails when a primary orbit meets a vertex within `L` steps, when two
    /// primaries share a point or a forward orbit (up to `L` steps), when a
    /// secondary bust of one primary coincides with a bust of another, and
    /// when an `L`-periodic primary is reversed by `ψ_L` (its own secondary
    /// copy would then have no consistent side).
    pub fn new(phi: &GraphMap, primaries: &[PointX], l: usize) -> Result<BustSet> {
        if l == 0 {
            return Err(Error::Bust("tunnel length L must be at least 1".into()));
        }
        let mut prim = Vec::with_capacity(primaries.len());
        for p in primaries {
            match p {
                PointX::Interior { edge, s } if rational::is_interior(s) => prim.push((*edge, *s)),
                _ => {
                    return Err(Error::Bust(format!(
                        "primary bust {} is not an interior point",
                        p.render(phi)
                    )))
                }
            }
        }
        let mut orbits: Vec<Vec<PointX>> = Vec::new();
        for (i, (e, s)) in prim.iter().enumerate() {
            let mut orbit = vec![PointX::Interior { edge: *e, s: *s }];
            for _ in 0..l {
                let next = flow::flow_step(phi, orbit.last().expect("nonempty"))?;
                if let PointX::Vertex(v) = next {
                    return Err(Error::Singular(format!(
                        "orbit of primary bust {i} hits vertex {}",
                        phi.graph().vertex_names()[v]
                    )));
                }
                orbit.push(next);
            }
            orbits.push(orbit);
        }
        for i in 0..prim.len() {
            for j in 0..i {
                if let Some(n) = (0..=l).find(|&n| orbits[i][n] == orbits[j][n]) {
                    return Err(Error::Bust(format!("primary busts {j} and {i} meet after {n} steps")));
                }
            }
        }
        let periodic: Vec<bool> = orbits.iter().map(|o| o[l] == o[0]).collect();
        let mut secondaries = Vec::new();
        for (i, (e, s)) in prim.iter().enumerate() {
            let t = flow::tunnel(phi, &PointX::Interior { edge: *e, s: *s }, l)?;
            for leaf in t.leaves() {
                let n = &t.nodes[leaf];
                secondaries.push(Secondary {
                    edge: n.edge,
                    s: n.s,
                    primary: i,
                    forward: t.sign_to_root(leaf),
                });
            }
        }
        secondaries.sort();
        let mut seen: BTreeMap<(usize, Q), usize> = BTreeMap::new();
        for sec in &secondaries {
            if let Some(&other) = seen.get(&(sec.edge, sec.s)) {
                return Err(Error::Bust(format!(
                    "secondary busts of primaries {other} and {} coincide on {}",
                    sec.primary,
                    phi.graph().name(2 * sec.edge)
                )));
            }
            seen.insert((sec.edge, sec.s), sec.primary);
            for (i, (e, s)) in prim.iter().enumerate() {
                if *e == sec.edge && *s == sec.s {
                    if i != sec.primary {
                        return Err(Error::Bust(format!(
                            "primary bust {i} is a secondary bust of primary {}",
                            sec.primary
                        )));
                    }
                    if !sec.forward {
                        return Err(Error::Bust(format!(
                            "L-periodic primary bust {i} is reversed by the flow; use an even multiple of L"
                        )));
                    }
                }
            }
        }
        Ok(BustSet {
            primaries: prim,
            l,
            periodic,
            secondaries,
        })
    }

    /// Checks that every primary lies in an edge of an exponential stratum.
    pub fn check_exponential(&self, strata: &[Stratum]) -> Result<()> {
        for (i, (e, _)) in self.primaries.iter().enumerate() {
            let ok = strata
                .iter()
                .any(|st| st.kind == StratumKind::Exponential && st.edges.contains(e));
            if !ok {
                return Err(Error::Bust(format!("primary bust {i} is not in an exponential edge")));
            }
        }
        Ok(())
    }

    /// Primary busts as `(edge, s)`.
    pub fn primaries(&self) -> &[(usize, Q)] {
        &self.primaries
    }

    /// Tunnel length `L`.
    pub fn l(&self) -> usize {
        self.l
    }

    /// `ψ_L(d_i) = d_i`.
    pub fn is_periodic(&self, i: usize) -> bool {
        self.periodic[i]
    }

    /// All secondary busts, sorted by edge and position.
    pub fn secondaries(&self) -> &[Secondary] {
        &self.secondaries
    }
}

/// Canonical primary busts: one periodic regular point per exponential edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalBusts {
    /// Chosen points in edge order.
    pub points: Vec<flow::PeriodicPoint>,
    /// Least common multiple of the periods.
    pub lcm: usize,
}

impl CanonicalBusts {
    /// The chosen points as [`PointX`] values.
    pub fn as_points(&self) -> Vec<PointX> {
        self.points
            .iter()
            .map(|p| PointX::Interior { edge: p.edge, s: p.s })
            .collect()
    }
}

/// For each edge of an exponential stratum, the periodic regular interior
/// point of least period, ties broken by least position. Searches periods
/// `1..=max_period`.
pub fn canonical_busts(phi: &GraphMap, strata: &[Stratum], max_period: usize) -> Result<CanonicalBusts> {
    let mut edges: Vec<usize> = strata
        .iter()
        .filter(|s| s.kind == StratumKind::Exponential)
        .flat_map(|s| s.edges.iter().copied())
        .collect();
    edges.sort_unstable();
    let mut points = Vec::new();
    let mut lcm = 1usize;
    'edges: for e in edges {
        for m in 1..=max_period {
            let found = flow::periodic_points(phi, e, m)?;
            if let Some(p) = found
                .points
                .into_iter()
                .filter(|p| p.period == m)
                .min_by(|a, b| a.s.cmp(&b.s))
            {
                lcm = lcm.lcm(&m);
                points.push(p);
                continue 'edges;
            }
        }
        return Err(Error::Bust(format!(
            "no periodic regular point in {} with period at most {max_period}",
            phi.graph().name(2 * e)
        )));
    }
    Ok(CanonicalBusts { points, lcm })
}

/// Secondary busts of a single primary point at depth `L`, with signs.
pub fn secondary_busts(phi: &GraphMap, d: &PointX, l: usize) -> Result<Vec<Secondary>> {
    let t = flow::tunnel(phi, d, l)?;
    let mut out: Vec<Secondary> = t
        .leaves()
        .map(|i| Secondary {
            edge: t.nodes[i].edge,
            s: t.nodes[i].s,
            primary: 0,
            forward: t.sign_to_root(i),
        })
        .collect();
    out.sort();
    Ok(out)
}

/// A bust point on an edge with its roles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BustPoint {
    /// Position.
    pub s: Q,
    /// Primary index if this is a primary bust.
    pub primary: Option<usize>,
    /// `(primary, forward)` if this is a secondary bust.
    pub secondary: Option<(usize, bool)>,
}

/// A component of `E♭`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nucleus {
    /// Graph vertices contained in it.
    pub vertices: Vec<usize>,
    /// Segments `(edge, index)` contained in it.
    pub segments: Vec<(usize, usize)>,
    /// `Some(i)` for the isolated extra vertex `d̈_i`.
    pub extra: Option<usize>,
}

/// `E` punctured at all busts, compactified by end and extra vertices.
///
/// Segment `(e, k)` of edge `e` runs from bust `k − 1` to bust `k` (from
/// the source vertex when `k = 0`, to the target when `k` is the bust count).
#[derive(Clone, Debug)]
pub struct EFlat {
    busts: Vec<Vec<BustPoint>>,
    nucleus_of_vertex: Vec<usize>,
    nucleus_of_segment: Vec<Vec<usize>>,
    extra: Vec<Option<usize>>,
    nuclei: Vec<Nucleus>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Builds `E♭` for a bust set.
pub fn build_eflat(phi: &GraphMap, busts: &BustSet) -> EFlat {
    let g = phi.graph();
    let ne = g.edge_count();
    let mut per_edge: Vec<BTreeMap<Q, BustPoint>> = vec![BTreeMap::new(); ne];
    for (i, (e, s)) in busts.primaries.iter().enumerate() {
        per_edge[*e]
            .entry(*s)
            .or_insert(BustPoint {
                s: *s,
                primary: None,
                secondary: None,
            })
            .primary = Some(i);
    }
    for sec in &busts.secondaries {
        per_edge[sec.edge]
            .entry(sec.s)
            .or_insert(BustPoint {
                s: sec.s,
                primary: None,
                secondary: None,
            })
            .secondary = Some((sec.primary, sec.forward));
    }
    let bl: Vec<Vec<BustPoint>> = per_edge.into_iter().map(|m| m.into_values().collect()).collect();
    let nv = g.vertex_count();
    let mut seg_id = Vec::with_capacity(ne);
    let mut total = nv;
    for b in &bl {
        seg_id.push(total);
        total += b.len() + 1;
    }
    let mut uf = UnionFind::new(total);
    for k in 0..ne {
        let nb = bl[k].len();
        uf.union(seg_id[k], g.src(2 * k));
        uf.union(seg_id[k] + nb, g.dst(2 * k));
    }
    let mut root_to_nucleus: BTreeMap<usize, usize> = BTreeMap::new();
    let mut nuclei: Vec<Nucleus> = Vec::new();
    let mut id_of = |root: usize, nuclei: &mut Vec<Nucleus>| -> usize {
        *root_to_nucleus.entry(root).or_insert_with(|| {
            nuclei.push(Nucleus {
                vertices: Vec::new(),
                segments: Vec::new(),
                extra: None,
            });
            nuclei.len() - 1
        })
    };
    let mut nucleus_of_vertex = vec![0; nv];
    for v in 0..nv {
        let r = uf.find(v);
        let n = id_of(r, &mut nuclei);
        nuclei[n].vertices.push(v);
        nucleus_of_vertex[v] = n;
    }
    let mut nucleus_of_segment = Vec::with_capacity(ne);
    for k in 0..ne {
        let mut row = Vec::with_capacity(bl[k].len() + 1);
        for idx in 0..=bl[k].len() {
            let r = uf.find(seg_id[k] + idx);
            let n = id_of(r, &mut nuclei);
            nuclei[n].segments.push((k, idx));
            row.push(n);
        }
        nucleus_of_segment.push(row);
    }
    let mut extra = vec![None; busts.primaries.len()];
    for (i, x) in extra.iter_mut().enumerate() {
        if busts.periodic[i] {
            nuclei.push(Nucleus {
                vertices: Vec::new(),
                segments: Vec::new(),
                extra: Some(i),
            });
            *x = Some(nuclei.len() - 1);
        }
    }
    EFlat {
        busts: bl,
        nucleus_of_vertex,
        nucleus_of_segment,
        extra,
        nuclei,
    }
}

/// Type of a nucleus in the three-way classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NucleusType {
    /// Interval between a primary and a secondary bust (or an extra vertex).
    PrimarySecondary,
    /// Interval between two secondary busts.
    SecondarySecondary,
    /// Contains a vertex of `E`.
    VertexSubgraph,
}

impl EFlat {
    /// Sorted bust points on a positive edge.
    pub fn busts(&self, edge: usize) -> &[BustPoint] {
        &self.busts[edge]
    }

    /// Index of the bust at `s` on `edge`.
    pub fn bust_index(&self, edge: usize, s: &Q) -> Option<usize> {
        self.busts[edge].binary_search_by(|b| b.s.cmp(s)).ok()
    }

    /// All nuclei.
    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    /// Nucleus containing a graph vertex.
    pub fn nucleus_of_vertex(&self, v: usize) -> usize {
        self.nucleus_of_vertex[v]
    }

    /// Nucleus containing segment `(edge, idx)`.
    pub fn nucleus_of_segment(&self, edge: usize, idx: usize) -> usize {
        self.nucleus_of_segment[edge][idx]
    }

    /// Nucleus holding `←d` for the bust with index `idx` on `edge`.
    pub fn left_end(&self, edge: usize, idx: usize) -> usize {
        self.nucleus_of_segment[edge][idx]
    }

    /// Nucleus holding `→d` for the bust with index `idx` on `edge`.
    pub fn right_end(&self, edge: usize, idx: usize) -> usize {
        self.nucleus_of_segment[edge][idx + 1]
    }

    /// The extra vertex `d̈_i` of an `L`-periodic primary.
    pub fn extra(&self, i: usize) -> Option<usize> {
        self.extra[i]
    }

    /// Classifies every nucleus; the flag marks trivial nuclei (extra vertices).
    pub fn classify(&self) -> Result<Vec<(usize, NucleusType, bool)>> {
        let mut out = Vec::with_capacity(self.nuclei.len());
        for (n, nu) in self.nuclei.iter().enumerate() {
            if nu.extra.is_some() {
                out.push((n, NucleusType::PrimarySecondary, true));
                continue;
            }
            if !nu.vertices.is_empty() {
                out.push((n, NucleusType::VertexSubgraph, false));
                continue;
            }
            let (e, idx) = match nu.segments.as_slice() {
                [one] => *one,
                _ => {
                    return Err(Error::Structural(format!(
                        "nucleus {n} has no vertex but several segments"
                    )))
                }
            };
            let lo = &self.busts[e][idx - 1];
            let hi = &self.busts[e][idx];
            let prim = usize::from(lo.primary.is_some()) + usize::from(hi.primary.is_some());
            let sec = lo.secondary.is_some() && hi.secondary.is_some();
            let t = match prim {
                1 => NucleusType::PrimarySecondary,
                0 if sec => NucleusType::SecondarySecondary,
                _ => return Err(Error::Structural(format!("nucleus {n} matches no nucleus type"))),
            };
            out.push((n, t, false));
        }
        Ok(out)
    }
}

/// One of the two tunnel copies of a primary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sheet {
    /// `←T_i`.
    Left,
    /// `→T_i`.
    Right,
}

/// Node of the wall graph `W•`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WallNode {
    /// A nucleus of `E♭`.
    Nucleus(usize),
    /// A node of tunnel `(sheet, primary)`.
    Tunnel {
        /// Which copy.
        sheet: Sheet,
        /// Primary index.
        primary: usize,
        /// Index in [`Tunnel::nodes`].
        node: usize,
    },
}

/// Kind of an edge of `W•`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WallEdgeKind {
    /// Between a tunnel node and its parent.
    Tunnel,
    /// Tunnel root glued to an end or extra vertex.
    Root,
    /// Tunnel leaf glued to an end or extra vertex.
    Leaf,
}

/// An edge of `W•` carrying the `ℤ/2` twist of the `I`-bundle across it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WallEdge {
    /// Endpoint node index.
    pub a: usize,
    /// Endpoint node index.
    pub b: usize,
    /// Edge kind.
    pub kind: WallEdgeKind,
    /// True when the two sides of the bundle swap across this edge.
    pub twist: bool,
}

/// The immersed wall `W•` as a graph of nuclei and tunnel nodes.
#[derive(Clone, Debug)]
pub struct ImmersedWall {
    busts: BustSet,
    eflat: EFlat,
    tunnels: Vec<Tunnel>,
    nodes: Vec<WallNode>,
    edges: Vec<WallEdge>,
    component: Vec<usize>,
    components: usize,
    deleted: Option<(Sheet, usize)>,
}

/// Assembles `W•`. `deleted` removes one tunnel, which is useful only for
/// checking that the cocycle tests detect a broken wall.
pub fn build_immersed_wall(phi: &GraphMap, busts: &BustSet, deleted: Option<(Sheet, usize)>) -> Result<ImmersedWall> {
    let eflat = build_eflat(phi, busts);
    let l = busts.l;
    let mut tunnels = Vec::with_capacity(busts.primaries.len());
    for (e, s) in &busts.primaries {
        tunnels.push(flow::tunnel(phi, &PointX::Interior { edge: *e, s: *s }, l)?);
    }
    let mut nodes: Vec<WallNode> = (0..eflat.nuclei.len()).map(WallNode::Nucleus).collect();
    let mut edges = Vec::new();
    for (i, t) in tunnels.iter().enumerate() {
        let (pe, ps) = &busts.primaries[i];
        let pidx = eflat.bust_index(*pe, ps).expect("primary is a bust");
        for sheet in [Sheet::Left, Sheet::Right] {
            if deleted == Some((sheet, i)) {
                continue;
            }
            let base = nodes.len();
            nodes.extend((0..t.nodes.len()).map(|node| WallNode::Tunnel {
                sheet,
                primary: i,
                node,
            }));
            for (k, n) in t.nodes.iter().enumerate() {
                if let Some(p) = n.parent {
                    edges.push(WallEdge {
                        a: base + k,
                        b: base + p,
                        kind: WallEdgeKind::Tunnel,
                        twist: !n.forward,
                    });
                }
            }
            let (root_at, twist) = match sheet {
                Sheet::Left => (eflat.left_end(*pe, pidx), false),
                Sheet::Right => match eflat.extra(i) {
                    Some(x) => (x, false),
                    None => (eflat.right_end(*pe, pidx), true),
                },
            };
            edges.push(WallEdge {
                a: base,
                b: root_at,
                kind: WallEdgeKind::Root,
                twist,
            });
            for leaf in t.leaves() {
                let n = &t.nodes[leaf];
                let idx = eflat.bust_index(n.edge, &n.s).expect("leaf is a secondary bust");
                let bp = &eflat.busts[n.edge][idx];
                let (target, twist) = if bp.primary == Some(i) && busts.periodic[i] {
                    match sheet {
                        Sheet::Left => (eflat.right_end(n.edge, idx), false),
                        Sheet::Right => (eflat.extra(i).expect("periodic primary has an extra vertex"), false),
                    }
                } else {
                    let to_left = (sheet == Sheet::Right) == t.sign_to_root(leaf);
                    if to_left {
                        (eflat.left_end(n.edge, idx), true)
                    } else {
                        (eflat.right_end(n.edge, idx), false)
                    }
                };
                edges.push(WallEdge {
                    a: base + leaf,
                    b: target,
                    kind: WallEdgeKind::Leaf,
                    twist,
                });
            }
        }
    }
    let mut uf = UnionFind::new(nodes.len());
    for e in &edges {
        uf.union(e.a, e.b);
    }
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let component: Vec<usize> = (0..nodes.len())
        .map(|x| {
            let r = uf.find(x);
            let next = ids.len();
            *ids.entry(r).or_insert(next)
        })
        .collect();
    Ok(ImmersedWall {
        busts: busts.clone(),
        eflat,
        tunnels,
        nodes,
        edges,
        components: ids.len(),
        component,
        deleted,
    })
}

/// `ℤ/2` holonomy of the `I`-bundle along one fundamental cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleHolonomy {
    /// The non-tree edge closing the cycle.
    pub edge: usize,
    /// True when going once around swaps the two sides.
    pub nontrivial: bool,
}

/// Outcome of [`ImmersedWall::cocycle_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleReport {
    /// Crossing count of `W` with the boundary of each 2-cell `R_e`.
    pub cell_counts: Vec<usize>,
    /// Cells with an odd count.
    pub odd_cells: Vec<usize>,
    /// Holonomy along a cycle basis of `W•`.
    pub holonomy: Vec<CycleHolonomy>,
}

impl CocycleReport {
    /// All cells even and all holonomies trivial.
    pub fn ok(&self) -> bool {
        self.odd_cells.is_empty() && self.holonomy.iter().all(|h| !h.nontrivial)
    }
}

impl ImmersedWall {
    /// The bust data.
    pub fn busts(&self) -> &BustSet {
        &self.busts
    }

    /// `E♭`.
    pub fn eflat(&self) -> &EFlat {
        &self.eflat
    }

    /// Tunnel `T_L(d_i)` (both sheets are copies of it).
    pub fn tunnel(&self, i: usize) -> &Tunnel {
        &self.tunnels[i]
    }

    /// Nodes of `W•`.
    pub fn nodes(&self) -> &[WallNode] {
        &self.nodes
    }

    /// Edges of `W•`.
    pub fn edges(&self) -> &[WallEdge] {
        &self.edges
    }

    /// Number of connected components of `W•`.
    pub fn component_count(&self) -> usize {
        self.components
    }

    /// Component index of each node.
    pub fn component_of(&self, node: usize) -> usize {
        self.component[node]
    }

    /// Number of tunnels present (two per primary unless one was deleted).
    pub fn tunnel_count(&self) -> usize {
        2 * self.tunnels.len() - usize::from(self.deleted.is_some())
    }

    /// The deleted tunnel, if any.
    pub fn deleted(&self) -> Option<(Sheet, usize)> {
        self.deleted
    }

    /// Number of tunnel leaves glued to each nucleus, keyed by nucleus.
    pub fn leaf_attachments(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for e in self.edges.iter().filter(|e| e.kind == WallEdgeKind::Leaf) {
            *out.entry(e.b).or_insert(0) += 1;
        }
        out
    }

    /// Crossing parity of `W` with each 2-cell of `X`, and the bundle
    /// holonomy along a cycle basis of `W•`.
    ///
    /// `W` meets the horizontal 1-cell `t_v` once (through the nucleus of
    /// `v`) and meets a vertical 1-cell at every tunnel node of depth less
    /// than `L` on it. The count for `R_e` adds these over the cell's
    /// boundary word, with multiplicity.
    pub fn cocycle_check(&self, phi: &GraphMap) -> CocycleReport {
        let g = phi.graph();
        let mut vc = vec![0usize; g.edge_count()];
        for n in &self.nodes {
            if let WallNode::Tunnel { primary, node, .. } = *n {
                let tn = &self.tunnels[primary].nodes[node];
                if tn.depth < self.busts.l {
                    vc[tn.edge] += 1;
                }
            }
        }
        let cell_counts: Vec<usize> = (0..g.edge_count())
            .map(|k| 2 + vc[k] + phi.image(2 * k).iter().map(|&d| vc[positive(d)]).sum::<usize>())
            .collect();
        let odd_cells = (0..cell_counts.len()).filter(|&k| cell_counts[k] % 2 == 1).collect();
        CocycleReport {
            cell_counts,
            odd_cells,
            holonomy: self.holonomy(),
        }
    }

    fn holonomy(&self) -> Vec<CycleHolonomy> {
        let n = self.nodes.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, k));
            adj[e.b].push((e.a, k));
        }
        let mut parity = vec![None::<bool>; n];
        let mut tree_edge = vec![false; self.edges.len()];
        for start in 0..n {
            if parity[start].is_some() {
                continue;
            }
            parity[start] = Some(false);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &(y, k) in &adj[x] {
                    if parity[y].is_none() {
                        parity[y] = Some(parity[x].expect("visited") ^ self.edges[k].twist);
                        tree_edge[k] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        self.edges
            .iter()
            .enumerate()
            .filter(|(k, _)| !tree_edge[*k])
            .map(|(k, e)| CycleHolonomy {
                edge: k,
                nontrivial: parity[e.a].expect("visited") ^ parity[e.b].expect("visited") ^ e.twist,
            })
            .collect()
    }
}

/// Separation of primary busts from vertices and extra target points by
/// secondary busts inside `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationReport {
    /// `separated[i][t]` for primary `i` and target `t` (vertices first).
    pub separated: Vec<Vec<bool>>,
    /// First failing `(primary, target)` pair.
    pub first_failure: Option<(usize, usize)>,
}

impl SeparationReport {
    /// True when every pair is separated.
    pub fn ok(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// For each primary `d_i` and each target (all vertices, then the extra
/// points), whether every path in `E` from `d_i` to the target passes
/// through a secondary bust other than `d_i` itself.
pub fn bust_separation_check(phi: &GraphMap, busts: &BustSet, extra_targets: &[PointX]) -> Result<SeparationReport> {
    let g = phi.graph();
    let ne = g.edge_count();
    let nv = g.vertex_count();
    let mut cuts: Vec<Vec<Q>> = vec![Vec::new(); ne];
    for sec in &busts.secondaries {
        cuts[sec.edge].push(sec.s);
    }
    let mut seg = Vec::with_capacity(ne);
    let mut total = nv;
    for c in &cuts {
        seg.push(total);
        total += c.len() + 1;
    }
    let mut uf = UnionFind::new(total);
    for k in 0..ne {
        uf.union(seg[k], g.src(2 * k));
        uf.union(seg[k] + cuts[k].len(), g.dst(2 * k));
    }
    let locate = |uf: &mut UnionFind, e: usize, s: &Q| -> Vec<usize> {
        match cuts[e].binary_search(s) {
            Ok(i) => vec![uf.find(seg[e] + i), uf.find(seg[e] + i + 1)],
            Err(i) => vec![uf.find(seg[e] + i)],
        }
    };
    let mut targets: Vec<Option<usize>> = (0..nv).map(|v| Some(uf.find(v))).collect();
    for t in extra_targets {
        match t {
            PointX::Vertex(v) => targets.push(Some(uf.find(*v))),
            PointX::Interior { edge, s } => {
                let parts = locate(&mut uf, *edge, s);
                targets.push(if parts.len() == 1 { Some(parts[0]) } else { None });
            }
        }
    }
    let mut separated = Vec::new();
    let mut first_failure = None;
    for (i, (e, s)) in busts.primaries.iter().enumerate() {
        let near = locate(&mut uf, *e, s);
        let row: Vec<bool> = targets.iter().map(|t| t.map_or(true, |r| !near.contains(&r))).collect();
        if first_failure.is_none() {
            if let Some(t) = row.iter().position(|&ok| !ok) {
                first_failure = Some((i, t));
            }
        }
        separated.push(row);
    }
    Ok(SeparationReport {
        separated,
        first_failure,
    })
}

/// A discrepancy zone of one nucleus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zone {
    /// The nucleus.
    pub nucleus: usize,
    /// A tunnel root is glued to this nucleus, so its approximation bounds
    /// the zone.
    pub exceptional: bool,
    /// The nucleus is an extra vertex and the zone has empty interior.
    pub degenerate: bool,
    /// No vertex lies in the height window `[½, 3L/4]` of the zone.
    pub narrow: bool,
}

/// Discrepancy zones of `W`, one per nucleus. Narrowness is decided by
/// flowing the nucleus exactly and checking for vertices at heights
/// `1..=⌊3L/4⌋`.
pub fn exceptional_zones(phi: &GraphMap, wall: &ImmersedWall) -> Result<Vec<Zone>> {
    let l = wall.busts.l;
    let window = (3 * l) / 4;
    let mut rooted = BTreeSet::new();
    for e in wall.edges.iter().filter(|e| e.kind == WallEdgeKind::Root) {
        if let WallNode::Nucleus(n) = wall.nodes[e.b] {
            rooted.insert(n);
        }
    }
    let mut out = Vec::new();
    for (n, nu) in wall.eflat.nuclei.iter().enumerate() {
        let degenerate = nu.extra.is_some();
        let narrow = if degenerate {
            true
        } else if !nu.vertices.is_empty() {
            window == 0
        } else {
            let (e, idx) = nu.segments[0];
            let lo = wall.eflat.busts[e][idx - 1].s;
            let hi = wall.eflat.busts[e][idx].s;
            !interval_hits_vertex(phi, e, lo, hi, window)?
        };
        out.push(Zone {
            nucleus: n,
            exceptional: rooted.contains(&n),
            degenerate,
            narrow,
        });
    }
    Ok(out)
}

/// Whether `ψ_t` of the open interval `(lo, hi)` on `edge` contains a vertex
/// for some `1 ≤ t ≤ steps`.
pub fn interval_hits_vertex(phi: &GraphMap, edge: usize, lo: Q, hi: Q, steps: usize) -> Result<bool> {
    let mut pieces = vec![(edge, lo, hi)];
    for _ in 0..steps {
        let mut next = Vec::new();
        for (e, a, b) in pieces {
            let img = phi.image(2 * e);
            let k = img.len() as i128;
            let (ka, kb) = (rational::mul_int(&a, k)?, rational::mul_int(&b, k)?);
            for (j, &d) in img.iter().enumerate() {
                let jq = Q::from_integer(j as i128);
                let jq1 = Q::from_integer(j as i128 + 1);
                let l = if ka > jq { ka } else { jq };
                let h = if kb < jq1 { kb } else { jq1 };
                if l >= h {
                    continue;
                }
                let (sl, sh) = (rational::sub(&l, &jq)?, rational::sub(&h, &jq)?);
                if sl.is_zero() || sh == Q::one() {
                    return Ok(true);
                }
                let f = positive(d);
                if d == 2 * f {
                    next.push((f, sl, sh));
                } else {
                    next.push((f, rational::flip(&sh), rational::flip(&sl)));
                }
            }
        }
        pieces = next;
    }
    Ok(false)
}

/// An element of a wall trace inside a ball.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// The vertex of `E` on the horizontal edge above a ball vertex.
    V(u32),
    /// Segment `idx` of `E` inside the 2-cell above a vertical edge.
    S {
        /// Bottom vertical edge of the 2-cell.
        cell: u32,
        /// Segment index.
        idx: u32,
    },
    /// An extra vertex `d̈`, stored at the lift of its primary bust.
    D(BallPoint),
    /// A tunnel point on a vertical edge.
    N {
        /// Tunnel copy.
        sheet: Sheet,
        /// Primary index.
        primary: u32,
        /// Height of the tunnel root.
        root: i64,
        /// Point.
        p: BallPoint,
    },
}

/// The component of the preimage of a wall in a ball through a seed.
#[derive(Clone, Debug)]
pub struct WallTrace {
    atoms: Vec<Atom>,
    index: HashMap<Atom, u32>,
    links: Vec<(u32, u32)>,
    truncated: bool,
    l: usize,
    busts: Vec<Vec<Q>>,
}

struct TraceCtx<'a> {
    ball: &'a BallComplex,
    eflat: &'a EFlat,
    periodic: &'a [bool],
    l: i64,
    deleted: Option<(Sheet, usize)>,
    truncated: bool,
}

impl TraceCtx<'_> {
    fn h(&self, p: &BallPoint) -> i64 {
        self.ball.vertex_height(self.ball.vedge(p.edge).src)
    }

    fn bust(&self, p: &BallPoint) -> Option<(usize, &BustPoint)> {
        let e = self.ball.vedge(p.edge).edge;
        self.eflat.bust_index(e, &p.s).map(|i| (i, &self.eflat.busts[e][i]))
    }

    fn flow(&mut self, p: &BallPoint) -> Result<Option<BallPoint>> {
        let r = flow::ball_flow(self.ball, p)?;
        if r.is_none() {
            self.truncated = true;
        }
        Ok(r)
    }

    fn push_n(&self, out: &mut Vec<Atom>, sheet: Sheet, primary: usize, root: i64, p: BallPoint) {
        if self.deleted != Some((sheet, primary)) {
            out.push(Atom::N {
                sheet,
                primary: primary as u32,
                root,
                p,
            });
        }
    }

    fn seg(&self, p: &BallPoint, right: bool) -> Atom {
        let e = self.ball.vedge(p.edge).edge;
        let idx = self.eflat.bust_index(e, &p.s).expect("bust point") as u32;
        Atom::S {
            cell: p.edge,
            idx: idx + u32::from(right),
        }
    }

    fn neighbours(&mut self, a: &Atom) -> Result<Vec<Atom>> {
        let ball = self.ball;
        let mut out = Vec::new();
        match a {
            Atom::V(x) => {
                for k in 0..ball.weights().len() {
                    let o = ball.out_edge(*x, k);
                    if o != NONE && ball.has_cell(o) {
                        out.push(Atom::S { cell: o, idx: 0 });
                    } else {
                        self.truncated = true;
                    }
                    let i = ball.in_edge(*x, k);
                    if i != NONE && ball.has_cell(i) {
                        out.push(Atom::S {
                            cell: i,
                            idx: self.eflat.busts[k].len() as u32,
                        });
                    } else {
                        self.truncated = true;
                    }
                }
            }
            Atom::S { cell, idx } => {
                let ve = ball.vedge(*cell);
                let n = ball.vertex_height(ve.src);
                let bl = &self.eflat.busts[ve.edge];
                let idx = *idx as usize;
                if idx == 0 {
                    out.push(Atom::V(ve.src));
                }
                if idx == bl.len() {
                    out.push(Atom::V(ve.dst));
                }
                let mut sides = Vec::new();
                if idx > 0 {
                    sides.push((&bl[idx - 1], false));
                }
                if idx < bl.len() {
                    sides.push((&bl[idx], true));
                }
                for (b, on_left) in sides {
                    let p = BallPoint { edge: *cell, s: b.s };
                    if let Some(i) = b.primary {
                        if on_left {
                            self.push_n(&mut out, Sheet::Left, i, n, p);
                        } else if !self.periodic[i] {
                            self.push_n(&mut out, Sheet::Right, i, n, p);
                        } else if let Some(q) = self.flow(&p)? {
                            self.push_n(&mut out, Sheet::Left, i, n + self.l, q);
                        }
                        continue;
                    }
                    if let Some((i, fwd)) = b.secondary {
                        let to_right_sheet = on_left == fwd;
                        if let Some(q) = self.flow(&p)? {
                            let sheet = if to_right_sheet { Sheet::Right } else { Sheet::Left };
                            self.push_n(&mut out, sheet, i, n + self.l, q);
                        }
                    }
                }
            }
            Atom::D(p) => {
                let n = self.h(p);
                let i = self
                    .bust(p)
                    .and_then(|(_, b)| b.primary)
                    .expect("extra vertex sits on a primary");
                self.push_n(&mut out, Sheet::Right, i, n, p.clone());
                if let Some(q) = self.flow(p)? {
                    self.push_n(&mut out, Sheet::Right, i, n + self.l, q);
                }
            }
            Atom::N {
                sheet,
                primary,
                root,
                p,
            } => {
                let (sheet, i, rl) = (*sheet, *primary as usize, *root);
                let k = self.h(p);
                if k == rl {
                    if sheet == Sheet::Left {
                        out.push(self.seg(p, false));
                    } else if self.periodic[i] {
                        out.push(Atom::D(p.clone()));
                    } else {
                        out.push(self.seg(p, true));
                    }
                } else if let Some(q) = self.flow(p)? {
                    out.push(Atom::N {
                        sheet,
                        primary: i as u32,
                        root: rl,
                        p: q,
                    });
                }
                if !flow::ball_preimages_complete(ball, p) {
                    self.truncated = true;
                }
                let pre = flow::ball_preimages(ball, p)?;
                if k > rl - self.l + 1 {
                    for q in pre {
                        out.push(Atom::N {
                            sheet,
                            primary: i as u32,
                            root: rl,
                            p: q,
                        });
                    }
                } else {
                    for q in pre {
                        let (_, b) = self
                            .bust(&q)
                            .ok_or_else(|| Error::Structural("tunnel leaf is not a bust".into()))?;
                        let (_, fwd) = b
                            .secondary
                            .ok_or_else(|| Error::Structural("tunnel leaf is not secondary".into()))?;
                        if sheet == Sheet::Right && b.primary == Some(i) && self.periodic[i] {
                            out.push(Atom::D(q));
                            continue;
                        }
                        let mut left = (sheet == Sheet::Right) == fwd;
                        if b.primary.is_some() && sheet == Sheet::Left {
                            left = false;
                        }
                        out.push(self.seg(&q, !left));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Height bucket of an atom: twice the height of the point where it meets
/// the 1-skeleton, plus one for atoms living at half-integer heights.
fn atom_half_height(ball: &BallComplex, a: &Atom) -> i64 {
    match a {
        Atom::V(x) => 2 * ball.vertex_height(*x) + 1,
        Atom::S { cell, .. } => 2 * ball.vertex_height(ball.vedge(*cell).src) + 1,
        Atom::D(p) => 2 * ball.vertex_height(ball.vedge(p.edge).src) + 1,
        Atom::N { p, .. } => 2 * ball.vertex_height(ball.vedge(p.edge).src),
    }
}

/// Options for [`lift_wall`].
#[derive(Clone, Copy, Debug, Default)]
pub struct TraceOptions {
    /// Leave out one tunnel everywhere (mutation experiments).
    pub deleted: Option<(Sheet, usize)>,
    /// Stop after this many atoms (0 means 5 000 000).
    pub atom_cap: usize,
}

/// Lifts the wall into a ball: the connected component of the preimage of
/// `W` containing `seed`.
pub fn lift_wall(wall: &ImmersedWall, ball: &BallComplex, seed: Atom, opts: TraceOptions) -> Result<WallTrace> {
    lift_wall_seeds(wall, ball, &[seed], opts)
}

/// Union of the components of the preimage of `W` in the ball through
/// several seeds.
pub fn lift_wall_seeds(
    wall: &ImmersedWall,
    ball: &BallComplex,
    seeds: &[Atom],
    opts: TraceOptions,
) -> Result<WallTrace> {
    let cap = if opts.atom_cap == 0 { 5_000_000 } else { opts.atom_cap };
    let deleted = opts.deleted.or(wall.deleted);
    let mut ctx = TraceCtx {
        ball,
        eflat: &wall.eflat,
        periodic: &wall.busts.periodic,
        l: wall.busts.l as i64,
        deleted,
        truncated: false,
    };
    let mut atoms = Vec::new();
    let mut index: HashMap<Atom, u32> = HashMap::new();
    for seed in seeds {
        validate_seed(&ctx, seed)?;
        if !index.contains_key(seed) {
            index.insert(seed.clone(), atoms.len() as u32);
            atoms.push(seed.clone());
        }
    }
    if atoms.is_empty() {
        return Err(Error::Structural("no seed given".into()));
    }
    let mut links = Vec::new();
    let mut head = 0usize;
    while head < atoms.len() {
        let a = atoms[head].clone();
        for b in ctx.neighbours(&a)? {
            let id = match index.get(&b) {
                Some(&id) => id,
                None => {
                    if atoms.len() >= cap {
                        return Err(Error::ResourceCap {
                            what: "wall trace atoms",
                            limit: cap,
                        });
                    }
                    let id = atoms.len() as u32;
                    index.insert(b.clone(), id);
                    atoms.push(b);
                    id
                }
            };
            let (x, y) = (head as u32, id);
            if x != y {
                links.push((x.min(y), x.max(y)));
            }
        }
        head += 1;
    }
    links.sort_unstable();
    links.dedup();
    let busts = wall
        .eflat
        .busts
        .iter()
        .map(|b| b.iter().map(|p| p.s).collect())
        .collect();
    Ok(WallTrace {
        atoms,
        index,
        links,
        truncated: ctx.truncated,
        l: wall.busts.l,
        busts,
    })
}

fn validate_seed(ctx: &TraceCtx<'_>, seed: &Atom) -> Result<()> {
    let ok = match seed {
        Atom::V(x) => (*x as usize) < ctx.ball.vertex_count(),
        Atom::S { cell, idx } => {
            (*cell as usize) < ctx.ball.vertical_count()
                && (*idx as usize) <= ctx.eflat.busts[ctx.ball.vedge(*cell).edge].len()
        }
        Atom::D(p) => ctx
            .bust(p)
            .is_some_and(|(_, b)| b.primary.is_some_and(|i| ctx.periodic[i])),
        Atom::N { .. } => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Structural("seed does not lie on the wall".into()))
    }
}

/// Crossing counts of a trace with the 1-skeleton, restricted to vertices
/// within an analysis radius of the ball's base.
#[derive(Clone, Debug)]
pub struct CrossingData {
    radius: f64,
    hc: HashMap<u32, u32>,
    vc: HashMap<u32, u32>,
}

/// Result of the side assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideAssignment {
    /// Side (0 or 1) per ball vertex inside the analysis radius.
    pub side: Vec<Option<u8>>,
    /// Number of sides used.
    pub classes: usize,
    /// Number of regions joined by even edges.
    pub regions: usize,
    /// False when an odd cycle of crossings prevents a 2-coloring.
    pub consistent: bool,
}

impl WallTrace {
    /// Atoms in discovery order (the seed first).
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Index of an atom.
    pub fn find(&self, a: &Atom) -> Option<u32> {
        self.index.get(a).copied()
    }

    /// Adjacent atom pairs.
    pub fn links(&self) -> &[(u32, u32)] {
        &self.links
    }

    /// True when some part of the wall near the trace was outside the ball.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Positions bounding segment `idx` of the `E` copy above `cell`.
    pub fn segment_bounds(&self, ball: &BallComplex, cell: u32, idx: usize) -> (Q, Q) {
        let b = &self.busts[ball.vedge(cell).edge];
        let lo = if idx == 0 { Q::zero() } else { b[idx - 1] };
        let hi = if idx == b.len() { Q::one() } else { b[idx] };
        (lo, hi)
    }

    /// Counts per atom kind: `(V, S, D, N)`.
    pub fn kind_counts(&self) -> (usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0);
        for a in &self.atoms {
            match a {
                Atom::V(_) => c.0 += 1,
                Atom::S { .. } => c.1 += 1,
                Atom::D(_) => c.2 += 1,
                Atom::N { .. } => c.3 += 1,
            }
        }
        c
    }

    /// Crossing counts with horizontal and vertical edges of the ball whose
    /// endpoints lie within `radius` of the base.
    pub fn crossings(&self, ball: &BallComplex, radius: f64) -> CrossingData {
        let inside = |v: u32| ball.dist_from_base(v) <= radius + 1e-9;
        let mut hc = HashMap::new();
        let mut vc = HashMap::new();
        for a in &self.atoms {
            match a {
                Atom::V(x) if inside(*x) && ball.up(*x) != NONE && inside(ball.up(*x)) => {
                    *hc.entry(*x).or_insert(0) += 1
                }
                Atom::N { p, .. } => {
                    let ve = ball.vedge(p.edge);
                    if inside(ve.src) && inside(ve.dst) {
                        *vc.entry(p.edge).or_insert(0) += 1;
                    }
                }
                _ => {}
            }
        }
        CrossingData { radius, hc, vc }
    }

    /// Knockouts: components of the trace after cutting every link between
    /// atoms of different bands `𝔮⁻¹([nL+½, (n+1)L])`. Returns `(band, atom
    /// count)` per knockout, sorted.
    pub fn knockouts(&self, ball: &BallComplex) -> Vec<(i64, usize)> {
        let l = self.l as i64;
        let band = |a: &Atom| -> i64 {
            let hh = atom_half_height(ball, a);
            if hh % 2 == 0 {
                (hh / 2 - 1).div_euclid(l)
            } else {
                ((hh - 1) / 2).div_euclid(l)
            }
        };
        let bands: Vec<i64> = self.atoms.iter().map(band).collect();
        let mut uf = UnionFind::new(self.atoms.len());
        for &(a, b) in &self.links {
            if bands[a as usize] == bands[b as usize] {
                uf.union(a as usize, b as usize);
            }
        }
        let mut comps: BTreeMap<usize, (i64, usize)> = BTreeMap::new();
        for i in 0..self.atoms.len() {
            let r = uf.find(i);
            comps.entry(r).or_insert((bands[i], 0)).1 += 1;
        }
        let mut out: Vec<(i64, usize)> = comps.into_values().collect();
        out.sort_unstable();
        out
    }
}

impl CrossingData {
    /// Analysis radius.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Crossings with the horizontal edge above `v`.
    pub fn horizontal(&self, v: u32) -> u32 {
        self.hc.get(&v).copied().unwrap_or(0)
    }

    /// Crossings with vertical edge `id`.
    pub fn vertical(&self, id: u32) -> u32 {
        self.vc.get(&id).copied().unwrap_or(0)
    }

    fn inside(&self, ball: &BallComplex, v: u32) -> bool {
        v != NONE && ball.dist_from_base(v) <= self.radius + 1e-9
    }

    /// Crossing count of the boundary of every 2-cell whose closure lies in
    /// the analysis radius. Returns `(cells checked, odd cells)`.
    pub fn cell_parities(&self, ball: &BallComplex) -> (usize, Vec<u32>) {
        let mut checked = 0;
        let mut odd = Vec::new();
        for id in 0..ball.vertical_count() as u32 {
            if !ball.has_cell(id) {
                continue;
            }
            let ve = ball.vedge(id);
            let corners = [ve.src, ve.dst, ball.up(ve.src), ball.up(ve.dst)];
            if !corners.iter().all(|&v| self.inside(ball, v)) {
                continue;
            }
            if !ball.top(id).iter().all(|&(t, _)| {
                let te = ball.vedge(t);
                self.inside(ball, te.src) && self.inside(ball, te.dst)
            }) {
                continue;
            }
            checked += 1;
            let total = self.horizontal(ve.src)
                + self.horizontal(ve.dst)
                + self.vertical(id)
                + ball.top(id).iter().map(|&(t, _)| self.vertical(t)).sum::<u32>();
            if total % 2 == 1 {
                odd.push(id);
            }
        }
        (checked, odd)
    }

    /// Crossing count along a vertex path of the ball.
    pub fn path_crossings(&self, ball: &BallComplex, path: &[u32]) -> Result<u32> {
        let mut total = 0;
        for w in path.windows(2) {
            let (x, y) = (w[0], w[1]);
            if ball.up(x) == y {
                total += self.horizontal(x);
            } else if ball.up(y) == x {
                total += self.horizontal(y);
            } else if let Some(id) = flow::vertical_between(ball, x, y) {
                total += self.vertical(id);
            } else {
                return Err(Error::Structural(format!("vertices {x} and {y} are not adjacent")));
            }
        }
        Ok(total)
    }

    /// Two-sided labelling of ball vertices: vertices joined by an edge
    /// crossed an even number of times share a region, regions joined by an
    /// odd edge get opposite sides. The side of the least vertex is 0.
    pub fn side_assignment(&self, ball: &BallComplex) -> SideAssignment {
        let n = ball.vertex_count();
        let mut uf = UnionFind::new(n);
        let mut odd_edges = Vec::new();
        for v in 0..n as u32 {
            if !self.inside(ball, v) {
                continue;
            }
            let u = ball.up(v);
            if self.inside(ball, u) {
                if self.horizontal(v) % 2 == 0 {
                    uf.union(v as usize, u as usize);
                } else {
                    odd_edges.push((v, u));
                }
            }
        }
        for (id, ve) in ball.vedges().iter().enumerate() {
            if self.inside(ball, ve.src) && self.inside(ball, ve.dst) {
                if self.vertical(id as u32) % 2 == 0 {
                    uf.union(ve.src as usize, ve.dst as usize);
                } else {
                    odd_edges.push((ve.src, ve.dst));
                }
            }
        }
        let mut radj: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut consistent = true;
        for &(a, b) in &odd_edges {
            let (ra, rb) = (uf.find(a as usize), uf.find(b as usize));
            if ra == rb {
                consistent = false;
            }
            radj.entry(ra).or_default().push(rb);
            radj.entry(rb).or_default().push(ra);
        }
        let mut color: HashMap<usize, u8> = HashMap::new();
        let mut side = vec![None; n];
        let mut used = [false; 2];
        for v in 0..n {
            if !self.inside(ball, v as u32) {
                continue;
            }
            let r = uf.find(v);
            if !color.contains_key(&r) {
                color.insert(r, 0);
                let mut stack = vec![r];
                while let Some(x) = stack.pop() {
                    let cx = color[&x];
                    for &y in radj.get(&x).map(Vec::as_slice).unwrap_or(&[]) {
                        match color.get(&y) {
                            None => {
                                color.insert(y, 1 - cx);
                                stack.push(y);
                            }
                            Some(&cy) if cy == cx => consistent = false,
                            _ => {}
                        }
                    }
                }
            }
            let c = color[&r];
            used[c as usize] = true;
            side[v] = Some(c);
        }
        let regions = color.len();
        SideAssignment {
            side,
            classes: used.iter().filter(|&&u| u).count(),
            regions,
            consistent,
        }
    }
}

/// A node of an approximation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ApproxNode {
    /// A ball vertex.
    Vertex(u32),
    /// An interior point of a vertical edge.
    Point(BallPoint),
}

/// `ψ_{L−½}` image of a trace as a 1-complex with the `d_A` metric.
#[derive(Clone, Debug)]
pub struct Approximation {
    /// Nodes.
    pub nodes: Vec<ApproxNode>,
    /// Edges `(a, b, length)`: vertical pieces weigh `ω·Δs`, midsegments 1.
    pub edges: Vec<(u32, u32, f64)>,
    /// Number of connected components.
    pub components: usize,
    /// Pieces of the trace whose image left the ball.
    pub truncated_pieces: usize,
}

impl Approximation {
    /// First Betti number `E − V + C`.
    pub fn betti1(&self) -> usize {
        self.edges.len() + self.components - self.nodes.len()
    }

    /// True when the approximation has no cycle.
    pub fn is_acyclic(&self) -> bool {
        self.betti1() == 0
    }

    /// Intrinsic distances from one node.
    pub fn distances_from(&self, start: usize) -> Vec<f64> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.nodes.len()];
        for &(a, b, w) in &self.edges {
            adj[a as usize].push((b as usize, w));
            adj[b as usize].push((a as usize, w));
        }
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        dist[start] = 0.0;
        let mut heap = alloc::collections::BinaryHeap::new();
        heap.push((core::cmp::Reverse(OrdF64(0.0)), start));
        while let Some((core::cmp::Reverse(OrdF64(d)), x)) = heap.pop() {
            if d > dist[x] {
                continue;
            }
            for &(y, w) in &adj[x] {
                let nd = d + w;
                if nd < dist[y] {
                    dist[y] = nd;
                    heap.push((core::cmp::Reverse(OrdF64(nd)), y));
                }
            }
        }
        dist
    }
}

#[derive(Clone, Copy)]
struct OrdF64(f64);
impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

type Piece = (u32, Q, Q);

fn push_interval(ball: &BallComplex, pieces: Vec<Piece>, steps: usize) -> Result<Option<Vec<Piece>>> {
    let mut pieces = pieces;
    for _ in 0..steps {
        let mut next = Vec::new();
        for (ed, lo, hi) in pieces {
            if !ball.has_cell(ed) {
                return Ok(None);
            }
            let top = ball.top(ed);
            let k = top.len() as i128;
            let (a, b) = (rational::mul_int(&lo, k)?, rational::mul_int(&hi, k)?);
            for (j, &(t, fwd)) in top.iter().enumerate() {
                let jq = Q::from_integer(j as i128);
                let jq1 = Q::from_integer(j as i128 + 1);
                let l = if a > jq { a } else { jq };
                let h = if b < jq1 { b } else { jq1 };
                if l >= h {
                    continue;
                }
                let (sl, sh) = (rational::sub(&l, &jq)?, rational::sub(&h, &jq)?);
                next.push(if fwd {
                    (t, sl, sh)
                } else {
                    (t, rational::flip(&sh), rational::flip(&sl))
                });
            }
        }
        pieces = next;
    }
    Ok(Some(pieces))
}

/// Pushes a trace forward by `L − ½`: every `E` segment is flowed `L`
/// steps as an interval, every `E` vertex climbs `L` horizontal edges, and
/// every tunnel is replaced by the forward path of length `L` from its root.
/// Only atoms within `radius` of the base are used.
pub fn approximate(trace: &WallTrace, ball: &BallComplex, radius: f64) -> Result<Approximation> {
    let l = trace.l;
    let inside = |v: u32| ball.dist_from_base(v) <= radius + 1e-9;
    let weights = ball.weights();
    let mut truncated = 0usize;
    let mut verts = BTreeSet::new();
    let mut level: BTreeMap<u32, Vec<(Q, Q)>> = BTreeMap::new();
    let mut paths: BTreeSet<Vec<BallPoint>> = BTreeSet::new();
    for a in &trace.atoms {
        match a {
            Atom::V(x) if inside(*x) => {
                let mut y = *x;
                for _ in 0..l {
                    y = if y == NONE { NONE } else { ball.up(y) };
                }
                if y == NONE {
                    truncated += 1;
                } else {
                    verts.insert(y);
                }
            }
            Atom::S { cell, idx } if inside(ball.vedge(*cell).src) => {
                let (lo, hi) = trace.segment_bounds(ball, *cell, *idx as usize);
                match push_interval(ball, vec![(*cell, lo, hi)], l)? {
                    None => truncated += 1,
                    Some(pieces) => {
                        for (ed, lo, hi) in pieces {
                            let ve = ball.vedge(ed);
                            if lo.is_zero() {
                                verts.insert(ve.src);
                            }
                            if hi == Q::one() {
                                verts.insert(ve.dst);
                            }
                            level.entry(ed).or_default().push((lo, hi));
                        }
                    }
                }
            }
            Atom::N { root, p, .. } if ball.vertex_height(ball.vedge(p.edge).src) == *root => {
                if !inside(ball.vedge(p.edge).src) {
                    continue;
                }
                match flow::forward_path(ball, p, l)? {
                    Some(path) => {
                        paths.insert(path);
                    }
                    None => truncated += 1,
                }
            }
            _ => {}
        }
    }
    let mut attach: BTreeMap<u32, BTreeSet<Q>> = BTreeMap::new();
    for p in &paths {
        for q in [&p[0], &p[p.len() - 1]] {
            attach.entry(q.edge).or_default().insert(q.s);
        }
    }
    let mut ids: BTreeMap<ApproxNode, u32> = BTreeMap::new();
    let mut nodes = Vec::new();
    let mut id = |n: ApproxNode, nodes: &mut Vec<ApproxNode>| -> u32 {
        *ids.entry(n.clone()).or_insert_with(|| {
            nodes.push(n);
            (nodes.len() - 1) as u32
        })
    };
    let mut edges: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let key = |ed: u32, s: &Q| -> ApproxNode {
        let ve = ball.vedge(ed);
        if s.is_zero() {
            ApproxNode::Vertex(ve.src)
        } else if *s == Q::one() {
            ApproxNode::Vertex(ve.dst)
        } else {
            ApproxNode::Point(BallPoint { edge: ed, s: *s })
        }
    };
    for (ed, mut ivs) in level {
        ivs.sort();
        let mut merged: Vec<(Q, Q)> = Vec::new();
        for (lo, hi) in ivs {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        let w = weights[ball.vedge(ed).edge];
        for (lo, hi) in merged {
            let mut pts: BTreeSet<Q> = BTreeSet::from([lo, hi]);
            if let Some(extra) = attach.get(&ed) {
                pts.extend(extra.iter().filter(|s| **s >= lo && **s <= hi).cloned());
            }
            let pts: Vec<Q> = pts.into_iter().collect();
            for pair in pts.windows(2) {
                let a = id(key(ed, &pair[0]), &mut nodes);
                let b = id(key(ed, &pair[1]), &mut nodes);
                let len = w * rational::to_f64(&rational::sub(&pair[1], &pair[0])?);
                edges.insert((a.min(b), a.max(b)), len);
            }
        }
    }
    for v in verts {
        id(ApproxNode::Vertex(v), &mut nodes);
    }
    for p in &paths {
        let ks: Vec<u32> = p.iter().map(|q| id(key(q.edge, &q.s), &mut nodes)).collect();
        for pair in ks.windows(2) {
            edges.insert((pair[0].min(pair[1]), pair[0].max(pair[1])), 1.0);
        }
    }
    let mut uf = UnionFind::new(nodes.len());
    for &(a, b) in edges.keys() {
        uf.union(a as usize, b as usize);
    }
    let components = (0..nodes.len()).filter(|&i| uf.find(i) == i).count();
    Ok(Approximation {
        nodes,
        edges: edges.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
        components,
        truncated_pieces: truncated,
    })
}

/// Distortion of the approximation metric against the ball metric over
/// sampled pairs of approximation vertices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DistortionReport {
    /// Pairs measured.
    pub pairs: usize,
    /// Largest `d_A(x, y) / d(x, y)`.
    pub max_ratio: f64,
    /// Largest `d_A(x, y) − d(x, y)`.
    pub max_difference: f64,
}

/// Compares `d_A` with ball distances on up to `samples` pairs of
/// approximation vertices within `radius` of the base, chosen by `pick`.
pub fn distortion_report(
    approx: &Approximation,
    ball: &BallComplex,
    radius: f64,
    samples: usize,
    mut pick: impl FnMut(usize) -> usize,
) -> DistortionReport {
    let candidates: Vec<usize> = approx
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| match n {
            ApproxNode::Vertex(v) if ball.dist_from_base(*v) <= radius + 1e-9 => Some(i),
            _ => None,
        })
        .collect();
    let mut rep = DistortionReport::default();
    if candidates.len() < 2 || samples == 0 {
        return rep;
    }
    for _ in 0..samples {
        let a = candidates[pick(candidates.len())];
        let b = candidates[pick(candidates.len())];
        if a == b {
            continue;
        }
        let da = approx.distances_from(a)[b];
        if !da.is_finite() {
            continue;
        }
        let (va, vb) = match (&approx.nodes[a], &approx.nodes[b]) {
            (ApproxNode::Vertex(x), ApproxNode::Vertex(y)) => (*x, *y),
            _ => unreachable!("candidates are vertices"),
        };
        let db = ball.distances_from(va)[vb as usize];
        if db <= 0.0 || !db.is_finite() {
            continue;
        }
        rep.pairs += 1;
        rep.max_ratio = rep.max_ratio.max(da / db);
        rep.max_difference = rep.max_difference.max(da - db);
    }
    rep
}

/// Human-readable role of a bust, e.g. `d0` or `d1,0-`.
pub fn bust_label(b: &BustPoint) -> String {
    match (b.primary, b.secondary) {
        (Some(i), Some(_)) => format!("d{i}=d{i}{i}"),
        (Some(i), None) => format!("d{i}"),
        (None, Some((i, fwd))) => format!("d{i}* ({})", if fwd { "+" } else { "-" }),
        (None, None) => String::from("?"),
    }
}

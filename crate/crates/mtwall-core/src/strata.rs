//! Invariant filtrations, transition matrices, Perron-Frobenius data and
//! checks of the (improved) relative train track axioms.
//!
//! Strata are numbered from 1. `V^i` is the union of strata `1..=i` and
//! `V^0` is empty. Matrices are row-major over the positive edges of a
//! stratum in index order, which is lexicographic by name.

use crate::graph::{
    direction_map, first_collision, inv, is_positive, iterate_tight, positive, reduce, Dir, EdgePath, Graph, GraphMap,
};
use crate::{Error, Result};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

/// Nonnegative integer matrix, row-major.
pub type Matrix = Vec<Vec<u64>>;

/// A filtration `∅ = V⁰ ⊊ V¹ ⊊ … ⊊ V^h = V`, stored as its strata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    strata: Vec<Vec<usize>>,
    stratum_of: Vec<usize>,
}

impl Filtration {
    /// Builds a filtration from strata given as positive edge ranks. The
    /// strata must be nonempty and partition the edges.
    pub fn new(g: &Graph, strata: Vec<Vec<usize>>) -> Result<Filtration> {
        let mut stratum_of = vec![0usize; g.edge_count()];
        for (i, s) in strata.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Structural(format!("stratum {} is empty", i + 1)));
            }
            for &k in s {
                if k >= g.edge_count() {
                    return Err(Error::IndexOutOfRange {
                        what: "edge",
                        index: k,
                        len: g.edge_count(),
                    });
                }
                if stratum_of[k] != 0 {
                    return Err(Error::Structural(format!("edge {} listed twice", g.name(2 * k))));
                }
                stratum_of[k] = i + 1;
            }
        }
        if let Some(k) = stratum_of.iter().position(|&s| s == 0) {
            return Err(Error::Structural(format!(
                "edge {} is in no stratum; the top level must be the whole graph",
                g.name(2 * k)
            )));
        }
        let strata = strata
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .collect();
        Ok(Filtration { strata, stratum_of })
    }

    /// Builds from edge names, stratum by stratum (bottom first).
    pub fn from_names(g: &Graph, strata: &[Vec<String>]) -> Result<Filtration> {
        let mut out = Vec::with_capacity(strata.len());
        for s in strata {
            let mut ranks = Vec::with_capacity(s.len());
            for name in s {
                let d = g.dir(name)?;
                if !is_positive(d) {
                    return Err(Error::Structural(format!("filtration lists inverse token {name:?}")));
                }
                ranks.push(positive(d));
            }
            out.push(ranks);
        }
        Filtration::new(g, out)
    }

    /// Single-stratum filtration.
    pub fn trivial(g: &Graph) -> Filtration {
        Filtration {
            strata: vec![(0..g.edge_count()).collect()],
            stratum_of: vec![1; g.edge_count()],
        }
    }

    /// Number of strata `h`.
    pub fn height(&self) -> usize {
        self.strata.len()
    }

    /// Positive edge ranks of stratum `i` (1-based).
    pub fn stratum(&self, i: usize) -> Result<&[usize]> {
        if i == 0 || i > self.strata.len() {
            return Err(Error::IndexOutOfRange {
                what: "stratum",
                index: i,
                len: self.strata.len(),
            });
        }
        Ok(&self.strata[i - 1])
    }

    /// Stratum index (1-based) containing a positive edge rank.
    pub fn stratum_of(&self, k: usize) -> usize {
        self.stratum_of[k]
    }

    /// Membership mask of `V^i` over positive edges; `i = 0` is empty.
    pub fn level_mask(&self, i: usize) -> Vec<bool> {
        self.stratum_of.iter().map(|&s| s <= i).collect()
    }

    /// Masks of `V¹ … V^h`, the shape [`crate::graph::path_legal`] expects.
    pub fn level_masks(&self) -> Vec<Vec<bool>> {
        (1..=self.height()).map(|i| self.level_mask(i)).collect()
    }

    /// First level that is not φ-invariant, with a witness edge.
    pub fn invariance_failure(&self, phi: &GraphMap) -> Option<(usize, usize)> {
        for k in 0..phi.graph().edge_count() {
            let s = self.stratum_of[k];
            if let Some(&d) = phi.image(2 * k).iter().find(|&&d| self.stratum_of[positive(d)] > s) {
                let _ = d;
                return Some((s, k));
            }
        }
        None
    }
}

/// Kind of a stratum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum StratumKind {
    /// Zero transition matrix.
    Zero,
    /// Irreducible with spectral radius 1.
    Polynomial,
    /// Irreducible with spectral radius above 1.
    Exponential,
}

impl StratumKind {
    /// Lowercase label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            StratumKind::Zero => "zero",
            StratumKind::Polynomial => "polynomial",
            StratumKind::Exponential => "exponential",
        }
    }
}

/// A classified stratum.
#[derive(Clone, Debug, PartialEq)]
pub struct Stratum {
    /// 1-based index.
    pub index: usize,
    /// Positive edge ranks in matrix order.
    pub edges: Vec<usize>,
    /// Transition matrix.
    pub matrix: Matrix,
    /// Classification.
    pub kind: StratumKind,
    /// Perron-Frobenius eigenvalue; `None` for zero strata.
    pub lambda: Option<f64>,
    /// Edge weights in matrix order, minimum entry 1.
    pub weights: Vec<f64>,
}

/// Entry `(j, k)` counts occurrences of the `k`-th stratum edge (either
/// orientation) in the image of the `j`-th.
pub fn transition_matrix(phi: &GraphMap, filt: &Filtration, i: usize) -> Result<Matrix> {
    let edges = filt.stratum(i)?;
    let col: BTreeMap<usize, usize> = edges.iter().enumerate().map(|(c, &k)| (k, c)).collect();
    Ok(edges
        .iter()
        .map(|&k| {
            let mut row = vec![0u64; edges.len()];
            for &d in phi.image(2 * k) {
                if let Some(&c) = col.get(&positive(d)) {
                    row[c] += 1;
                }
            }
            row
        })
        .collect())
}

/// Strongly connected components of a digraph on `0..n`, in an order where
/// every arc goes from a later component to an earlier one or stays inside
/// (dependencies first). Iterative Tarjan.
fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut it)) = call.last_mut() {
            if *it < adj[v].len() {
                let w = adj[v][*it];
                *it += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Condenses the edge-dependency digraph (`e → f` iff `φ(e)` crosses `f`)
/// into strongly connected components, ordered so that every level is
/// invariant. Among components whose dependencies are all placed, the one
/// containing the smallest edge goes first.
pub fn compute_maximal_filtration(phi: &GraphMap) -> Filtration {
    let g = phi.graph();
    let n = g.edge_count();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|k| {
            let set: BTreeSet<usize> = phi.image(2 * k).iter().map(|&d| positive(d)).collect();
            set.into_iter().collect()
        })
        .collect();
    let comps = tarjan(&adj);
    let mut comp_of = vec![0usize; n];
    for (c, comp) in comps.iter().enumerate() {
        for &k in comp {
            comp_of[k] = c;
        }
    }
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); comps.len()];
    for k in 0..n {
        for &f in &adj[k] {
            if comp_of[f] != comp_of[k] {
                deps[comp_of[k]].insert(comp_of[f]);
            }
        }
    }
    let mut placed = vec![false; comps.len()];
    let mut order = Vec::with_capacity(comps.len());
    while order.len() < comps.len() {
        let next = (0..comps.len())
            .filter(|&c| !placed[c] && deps[c].iter().all(|&d| placed[d]))
            .min_by_key(|&c| comps[c][0])
            .expect("condensation is acyclic");
        placed[next] = true;
        order.push(comps[next].clone());
    }
    Filtration::new(g, order).expect("condensation partitions the edges")
}

fn is_irreducible(m: &Matrix) -> bool {
    let n = m.len();
    let adj: Vec<Vec<usize>> = m.iter().map(|row| (0..n).filter(|&k| row[k] > 0).collect()).collect();
    tarjan(&adj).len() == 1 && (n > 1 || m[0][0] > 0)
}

/// Classifies a square nonnegative matrix as a stratum: kind, PF eigenvalue
/// and the right PF eigenvector scaled to minimum 1.
///
/// A nonzero irreducible integer matrix has spectral radius 1 exactly when it
/// is a permutation matrix, which is detected combinatorially. Otherwise the
/// eigenvalue comes from power iteration on `M + I` (which is primitive, so
/// iteration converges even for periodic `M`), started from the all-ones
/// vector.
pub fn classify_stratum(m: &Matrix) -> Result<(StratumKind, Option<f64>, Vec<f64>)> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::Structural(
            "transition matrix must be square and nonempty".into(),
        ));
    }
    if m.iter().all(|r| r.iter().all(|&x| x == 0)) {
        return Ok((StratumKind::Zero, None, vec![1.0; n]));
    }
    if !is_irreducible(m) {
        return Err(Error::FiltrationNotMaximal(
            "nonzero transition matrix is reducible".into(),
        ));
    }
    let row_ok = m.iter().all(|r| r.iter().sum::<u64>() == 1);
    let col_ok = (0..n).all(|k| m.iter().map(|r| r[k]).sum::<u64>() == 1);
    if row_ok && col_ok {
        return Ok((StratumKind::Polynomial, Some(1.0), vec![1.0; n]));
    }
    let mut v = vec![1.0f64; n];
    let mut rho = 0.0f64;
    for _ in 0..10_000 {
        let mut w: Vec<f64> = (0..n)
            .map(|j| v[j] + m[j].iter().zip(&v).map(|(&a, &x)| a as f64 * x).sum::<f64>())
            .collect();
        let norm = w.iter().cloned().fold(0.0, f64::max);
        for x in &mut w {
            *x /= norm;
        }
        let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let done = (norm - rho).abs() <= 1e-15 * norm && delta <= 1e-15;
        rho = norm;
        v = w;
        if done {
            break;
        }
    }
    let lambda = rho - 1.0;
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = v.iter().map(|x| x / min).collect();
    Ok((StratumKind::Exponential, Some(lambda), w))
}

/// Classifies every stratum of a filtration.
pub fn strata(phi: &GraphMap, filt: &Filtration) -> Result<Vec<Stratum>> {
    (1..=filt.height())
        .map(|i| {
            let matrix = transition_matrix(phi, filt, i)?;
            let (kind, lambda, weights) = classify_stratum(&matrix)?;
            Ok(Stratum {
                index: i,
                edges: filt.stratum(i)?.to_vec(),
                matrix,
                kind,
                lambda,
                weights,
            })
        })
        .collect()
}

/// Per positive edge weight `ω_e` collected from classified strata.
pub fn edge_weights(g: &Graph, strata: &[Stratum]) -> Vec<f64> {
    let mut w = vec![1.0; g.edge_count()];
    for s in strata {
        for (c, &k) in s.edges.iter().enumerate() {
            w[k] = s.weights[c];
        }
    }
    w
}

/// `λ^{-m}` times the ω-weighted stratum length of `φᵐ(e)`, for `m = 0..=n`.
/// Lengths are counted on unreduced images, matching the transition matrix.
pub fn edge_weight_limit_check(phi: &GraphMap, stratum: &Stratum, e: usize, n: usize) -> Result<Vec<f64>> {
    let c = stratum.edges.iter().position(|&k| k == e).ok_or_else(|| {
        Error::Structural(format!(
            "edge {} is not in stratum {}",
            phi.graph().name(2 * e),
            stratum.index
        ))
    })?;
    let lambda = match (stratum.kind, stratum.lambda) {
        (StratumKind::Zero, _) | (_, None) => {
            return Err(Error::Structural("weight limits need a nonzero stratum".into()))
        }
        (_, Some(l)) => l,
    };
    let mut counts = vec![0f64; stratum.edges.len()];
    counts[c] = 1.0;
    let mut out = Vec::with_capacity(n + 1);
    let mut scale = 1.0f64;
    for m in 0..=n {
        if m > 0 {
            counts = (0..counts.len())
                .map(|k| (0..counts.len()).map(|j| counts[j] * stratum.matrix[j][k] as f64).sum())
                .collect();
            scale /= lambda;
        }
        let len: f64 = counts.iter().zip(&stratum.weights).map(|(a, b)| a * b).sum();
        out.push(len * scale);
    }
    Ok(out)
}

/// Status of one axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    /// Checked exactly, or exhaustively within a finite search space.
    Verified,
    /// Fails, with a human-readable witness.
    Violated(String),
    /// No violation found, but the search was cut off at this bound.
    UnknownUpToBound(usize),
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomResult {
    /// Stable identifier such as `rtt.2`.
    pub id: String,
    /// Outcome.
    pub status: Status,
    /// Short note on how the status was reached.
    pub note: String,
}

/// Ordered list of axiom outcomes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    /// Results in axiom order, one per axiom.
    pub items: Vec<AxiomResult>,
}

impl VerificationReport {
    fn push(&mut self, id: &str, status: Status, note: impl Into<String>) {
        self.items.push(AxiomResult {
            id: id.to_string(),
            status,
            note: note.into(),
        });
    }

    /// True iff nothing is violated.
    pub fn ok(&self) -> bool {
        !self.items.iter().any(|r| matches!(r.status, Status::Violated(_)))
    }

    /// Looks up an axiom by id.
    pub fn get(&self, id: &str) -> Option<&Status> {
        self.items.iter().find(|r| r.id == id).map(|r| &r.status)
    }
}

fn classified(phi: &GraphMap, filt: &Filtration) -> core::result::Result<Vec<Stratum>, String> {
    strata(phi, filt).map_err(|e| e.to_string())
}

/// Checks the four relative train track conditions.
///
/// Conditions 1, 2 and 4 are exact. Condition 3 enumerates immersed paths in
/// `V^i` joining vertices of `S^{i+1} ∩ V^i`, up to `path_bound` edges; if
/// the enumeration runs out before the bound (or there is nothing to check)
/// the condition is verified, otherwise it is unknown up to the bound.
pub fn verify_rtt(phi: &GraphMap, filt: &Filtration, path_bound: usize) -> VerificationReport {
    let g = phi.graph();
    let mut rep = VerificationReport::default();
    match filt.invariance_failure(phi) {
        None => rep.push("rtt.1", Status::Verified, "every level is invariant"),
        Some((s, k)) => rep.push(
            "rtt.1",
            Status::Violated(format!("image of {} leaves V^{s}", g.name(2 * k))),
            "invariance",
        ),
    }
    let strata = match classified(phi, filt) {
        Ok(s) => s,
        Err(msg) => {
            for id in ["rtt.2", "rtt.3", "rtt.4"] {
                rep.push(id, Status::Violated(msg.clone()), "strata could not be classified");
            }
            return rep;
        }
    };

    let mut witness = None;
    'outer: for s in strata.iter().filter(|s| s.kind == StratumKind::Exponential) {
        for &k in &s.edges {
            let img = phi.image(2 * k);
            for d in [img[0], img[img.len() - 1]] {
                if filt.stratum_of(positive(d)) != s.index {
                    witness = Some(g.name(2 * k).to_string());
                    break 'outer;
                }
            }
        }
    }
    match witness {
        None => rep.push(
            "rtt.2",
            Status::Verified,
            "images of exponential edges start and end in their stratum",
        ),
        Some(e) => rep.push("rtt.2", Status::Violated(e), "image leaves the stratum at an end"),
    }

    rep.items.push(check_essential(phi, filt, &strata, path_bound));

    let dmap = direction_map(phi);
    let mut witness = None;
    'outer4: for s in strata.iter().filter(|s| s.kind == StratumKind::Exponential) {
        let lower = filt.level_mask(s.index - 1);
        for &k in &s.edges {
            for w in phi.image(2 * k).windows(2) {
                if let Some((_, f)) = first_collision(&dmap, inv(w[0]), w[1]) {
                    if !lower[positive(f)] {
                        witness = Some(format!(
                            "turn {}{} inside the image of {}",
                            g.name(w[0]),
                            g.name(w[1]),
                            g.name(2 * k)
                        ));
                        break 'outer4;
                    }
                }
            }
        }
    }
    match witness {
        None => rep.push(
            "rtt.4",
            Status::Verified,
            "all turns inside exponential edge images are i-legal",
        ),
        Some(w) => rep.push("rtt.4", Status::Violated(w), "illegal turn"),
    }
    rep
}

fn check_essential(phi: &GraphMap, filt: &Filtration, strata: &[Stratum], bound: usize) -> AxiomResult {
    let g = phi.graph();
    let mut cut_off = false;
    let mut checked = 0usize;
    for s in strata
        .iter()
        .filter(|s| s.kind == StratumKind::Exponential && s.index >= 2)
    {
        let i = s.index - 1;
        let below = filt.level_mask(i);
        let mut touches_s = vec![false; g.vertex_count()];
        let mut touches_v = vec![false; g.vertex_count()];
        for k in 0..g.edge_count() {
            let mark = if filt.stratum_of(k) == s.index {
                &mut touches_s
            } else if below[k] {
                &mut touches_v
            } else {
                continue;
            };
            mark[g.src(2 * k)] = true;
            mark[g.dst(2 * k)] = true;
        }
        let ends: Vec<bool> = (0..g.vertex_count()).map(|v| touches_s[v] && touches_v[v]).collect();
        let dirs: Vec<Dir> = (0..g.dir_count()).filter(|&d| below[positive(d)]).collect();
        for v in (0..g.vertex_count()).filter(|&v| ends[v]) {
            let mut stack: Vec<Vec<Dir>> = dirs.iter().filter(|&&d| g.src(d) == v).map(|&d| vec![d]).collect();
            while let Some(p) = stack.pop() {
                let last = *p.last().expect("nonempty");
                if ends[g.dst(last)] {
                    checked += 1;
                    if phi.tight_image(&p).is_empty() {
                        return AxiomResult {
                            id: "rtt.3".into(),
                            status: Status::Violated(format!("image of {} tightens to a point", g.word(&p))),
                            note: "inessential path".into(),
                        };
                    }
                }
                if p.len() >= bound {
                    cut_off = true;
                    continue;
                }
                for &d in dirs.iter().filter(|&&d| g.src(d) == g.dst(last) && d != inv(last)) {
                    let mut q = p.clone();
                    q.push(d);
                    stack.push(q);
                }
            }
        }
    }
    let status = if cut_off {
        Status::UnknownUpToBound(bound)
    } else {
        Status::Verified
    };
    AxiomResult {
        id: "rtt.3".into(),
        status,
        note: format!("{checked} immersed paths checked"),
    }
}

/// Bounds for the searches inside [`verify_improved`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImprovedBounds {
    /// Longest path length for the periodic Nielsen path search.
    pub nielsen_len: usize,
    /// Largest period tried.
    pub nielsen_iter: usize,
}

impl Default for ImprovedBounds {
    fn default() -> Self {
        ImprovedBounds {
            nielsen_len: 4,
            nielsen_iter: 6,
        }
    }
}

fn component_is_tree(g: &Graph, mask: &[bool], start: usize) -> (Vec<usize>, bool) {
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    seen.insert(start);
    let mut edges = 0usize;
    let mut comp = Vec::new();
    while let Some(v) = stack.pop() {
        comp.push(v);
        for d in (0..g.dir_count()).filter(|&d| mask[positive(d)] && g.src(d) == v) {
            if is_positive(d) {
                edges += 1;
            }
            if g.dst(d) == v && !is_positive(d) {
                continue;
            }
            if seen.insert(g.dst(d)) {
                stack.push(g.dst(d));
            }
        }
    }
    let tree = edges + 1 == comp.len();
    (comp, tree)
}

/// Checks the five improvement conditions. Eg-aperiodicity is read as
/// primitivity of every exponential transition matrix; the periodic Nielsen
/// path condition is a bounded search.
pub fn verify_improved(phi: &GraphMap, filt: &Filtration, bounds: ImprovedBounds) -> VerificationReport {
    let g = phi.graph();
    let mut rep = VerificationReport::default();
    let strata = match classified(phi, filt) {
        Ok(s) => s,
        Err(msg) => {
            for id in ["improved.1", "improved.2", "improved.3", "improved.4", "improved.5"] {
                rep.push(id, Status::Violated(msg.clone()), "strata could not be classified");
            }
            return rep;
        }
    };

    let bad = strata.iter().find(|s| {
        s.kind == StratumKind::Zero && strata.get(s.index).map_or(true, |n| n.kind != StratumKind::Exponential)
    });
    match bad {
        None => rep.push(
            "improved.1",
            Status::Verified,
            "every zero stratum sits below an exponential one",
        ),
        Some(s) => rep.push(
            "improved.1",
            Status::Violated(format!("stratum {}", s.index)),
            "zero stratum not followed by an exponential stratum",
        ),
    }

    let mut witness = None;
    for s in strata.iter().filter(|s| s.kind == StratumKind::Zero) {
        let mask = filt.level_mask(s.index);
        let mut tree_edges = BTreeSet::new();
        let mut has_edge = vec![false; g.vertex_count()];
        for k in (0..g.edge_count()).filter(|&k| mask[k]) {
            has_edge[g.src(2 * k)] = true;
            has_edge[g.dst(2 * k)] = true;
        }
        let mut done = vec![false; g.vertex_count()];
        for v in 0..g.vertex_count() {
            if done[v] || !has_edge[v] {
                continue;
            }
            let (comp, tree) = component_is_tree(g, &mask, v);
            for &w in &comp {
                done[w] = true;
            }
            if tree {
                for k in (0..g.edge_count()).filter(|&k| mask[k] && comp.contains(&g.src(2 * k))) {
                    tree_edges.insert(k);
                }
            }
        }
        let own: BTreeSet<usize> = s.edges.iter().copied().collect();
        if own != tree_edges {
            witness = Some(format!("stratum {}", s.index));
            break;
        }
    }
    match witness {
        None => rep.push(
            "improved.2",
            Status::Verified,
            "zero strata are the tree components of their level",
        ),
        Some(w) => rep.push(
            "improved.2",
            Status::Violated(w),
            "zero stratum differs from the contractible components",
        ),
    }

    let mut witness = None;
    let mut periodic_edges = Vec::new();
    for s in strata.iter().filter(|s| s.kind == StratumKind::Polynomial) {
        if s.edges.len() != 1 {
            witness = Some(format!("stratum {} has {} edges", s.index, s.edges.len()));
            break;
        }
        let e = 2 * s.edges[0];
        let img = phi.image(e);
        let lower = filt.level_mask(s.index - 1);
        let tail = &img[1..];
        let t = g.dst(e);
        if img[0] != e {
            witness = Some(format!("image of {} does not start with it", g.name(e)));
        } else if !tail.iter().all(|&d| lower[positive(d)]) {
            witness = Some(format!("image of {} leaves V^{}", g.name(e), s.index - 1));
        } else if phi.vertex_image(t) != t {
            witness = Some(format!("terminal vertex of {} is not fixed", g.name(e)));
        } else if tail.is_empty() {
            periodic_edges.push(g.name(e).to_string());
        }
        if witness.is_some() {
            break;
        }
    }
    match witness {
        None => {
            let note = if periodic_edges.is_empty() {
                String::from("polynomial strata are single edges e with image eP")
            } else {
                format!("periodic edges: {}", periodic_edges.join(","))
            };
            rep.push("improved.3", Status::Verified, note)
        }
        Some(w) => rep.push("improved.3", Status::Violated(w), "polynomial stratum shape"),
    }

    let mut witness = None;
    for s in strata.iter().filter(|s| s.kind == StratumKind::Exponential) {
        if !is_primitive(&s.matrix) {
            witness = Some(format!("stratum {}", s.index));
            break;
        }
    }
    match witness {
        None => rep.push(
            "improved.4",
            Status::Verified,
            "exponential matrices are primitive (read as eg-aperiodicity)",
        ),
        Some(w) => rep.push("improved.4", Status::Violated(w), "transition matrix is not primitive"),
    }

    let found = find_nielsen_paths(phi, bounds.nielsen_len, bounds.nielsen_iter);
    match found.iter().find(|n| n.period > 1) {
        Some(n) => rep.push(
            "improved.5",
            Status::Violated(format!("{} has minimal period {}", n.path.word(g), n.period)),
            "periodic Nielsen path that is not Nielsen",
        ),
        None => rep.push(
            "improved.5",
            Status::UnknownUpToBound(bounds.nielsen_len),
            format!(
                "searched lengths up to {} and periods up to {}",
                bounds.nielsen_len, bounds.nielsen_iter
            ),
        ),
    }
    rep
}

/// True iff some power up to `(n−1)² + 1` is entrywise positive.
pub fn is_primitive(m: &Matrix) -> bool {
    let n = m.len();
    let pattern: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
    let mut p = pattern.clone();
    for _ in 0..((n - 1) * (n - 1) + 1) {
        if p.iter().all(|r| r.iter().all(|&x| x)) {
            return true;
        }
        p = (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|k| p[i][k] && pattern[k][j])).collect())
            .collect();
    }
    p.iter().all(|r| r.iter().all(|&x| x))
}

/// A path fixed by a power of the map.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct NielsenPath {
    /// The reduced path.
    pub path: EdgePath,
    /// Minimal `k ≥ 1` with `tighten(φᵏ(P)) = P`.
    pub period: usize,
}

/// All nonempty reduced paths of length at most `max_len` with
/// `tighten(φᵏ(P)) = P` for some `1 ≤ k ≤ max_iter`, in order of length
/// then edge indices.
pub fn find_nielsen_paths(phi: &GraphMap, max_len: usize, max_iter: usize) -> Vec<NielsenPath> {
    let g = phi.graph();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Dir>> = (0..g.dir_count()).map(|d| vec![d]).collect();
    for _ in 0..max_len {
        for p in &layer {
            let path = EdgePath::new(g, g.src(p[0]), p.clone()).expect("enumerated path");
            let mut cur = path.clone();
            for k in 1..=max_iter {
                cur = iterate_tight(phi, &cur, 1);
                if cur.len() > p.len() * 64 + 64 {
                    break;
                }
                if cur == path {
                    out.push(NielsenPath { path, period: k });
                    break;
                }
            }
        }
        let mut next = Vec::new();
        for p in &layer {
            let last = *p.last().expect("nonempty");
            for d in (0..g.dir_count()).filter(|&d| g.src(d) == g.dst(last) && d != inv(last)) {
                let mut q = p.clone();
                q.push(d);
                next.push(q);
            }
        }
        layer = next;
    }
    out
}

/// Candidate splitting points of `Q = tighten(φ^{n0}(P))`: for each interior
/// position `j` (between `Q[j−1]` and `Q[j]`), whether the seam survives,
/// i.e. `tighten(φⁿ(Q[..j]))·tighten(φⁿ(Q[j..]))` is reduced with both
/// halves nonempty for every `1 ≤ n ≤ bound`.
pub fn split_path(phi: &GraphMap, p: &EdgePath, n0: usize, bound: usize) -> Result<(EdgePath, Vec<(usize, bool)>)> {
    if !p.is_reduced() {
        return Err(Error::Structural("split_path needs a reduced path".into()));
    }
    let q = iterate_tight(phi, p, n0);
    let g = phi.graph();
    let mut out = Vec::new();
    for j in 1..q.len() {
        let mut a = q.edges()[..j].to_vec();
        let mut b = q.edges()[j..].to_vec();
        let mut persistent = true;
        for _ in 0..bound {
            a = phi.tight_image(&a);
            b = phi.tight_image(&b);
            match (a.last(), b.first()) {
                (Some(&x), Some(&y)) if y != inv(x) => {}
                _ => {
                    persistent = false;
                    break;
                }
            }
        }
        out.push((j, persistent));
    }
    let _ = g;
    Ok((q, out))
}

/// Outcome of the bounded conjugacy-class periodicity search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtoroidalReport {
    /// First `(w, k)` with `Φᵏ(w)` conjugate to `w`.
    pub witness: Option<(String, usize)>,
    /// First `(w, k)` with `Φᵏ(w)` conjugate to `w⁻¹`, reported separately.
    pub inversion: Option<(String, usize)>,
    /// Word length bound used.
    pub word_bound: usize,
    /// Iterate bound used.
    pub iter_bound: usize,
}

/// Cyclic reduction of a reduced word.
pub fn cyclic_reduce(w: &[Dir]) -> Vec<Dir> {
    let w = reduce(w);
    let mut i = 0;
    let mut j = w.len();
    while j > i + 1 && w[j - 1] == inv(w[i]) {
        i += 1;
        j -= 1;
    }
    w[i..j].to_vec()
}

/// True iff `u` and `v` are cyclic permutations of one another.
pub fn cyclically_equal(u: &[Dir], v: &[Dir]) -> bool {
    if u.len() != v.len() {
        return false;
    }
    if u.is_empty() {
        return true;
    }
    (0..u.len()).any(|r| u[r..].iter().chain(&u[..r]).eq(v.iter()))
}

/// Searches cyclically reduced words `w` with `|w| ≤ word_bound` for
/// `Φᵏ(w) ~ w` with `k ≤ iter_bound`, in order of length, then
/// lexicographically with `a < A < b < B < …`, then `k`. Needs a rose so that
/// edges are the free generators.
pub fn atoroidal_heuristic(phi: &GraphMap, word_bound: usize, iter_bound: usize) -> Result<AtoroidalReport> {
    let g = phi.graph();
    if !g.is_rose() {
        return Err(Error::Structural("conjugacy search needs a rose marking".into()));
    }
    let mut rep = AtoroidalReport {
        witness: None,
        inversion: None,
        word_bound,
        iter_bound,
    };
    let mut layer: Vec<Vec<Dir>> = vec![Vec::new()];
    for _ in 0..word_bound {
        let mut next = Vec::new();
        for w in &layer {
            for d in 0..g.dir_count() {
                if w.last() == Some(&inv(d)) {
                    continue;
                }
                let mut u = w.clone();
                u.push(d);
                next.push(u);
            }
        }
        layer = next;
        for w in layer.iter().filter(|w| w.len() < 2 || w[w.len() - 1] != inv(w[0])) {
            let winv: Vec<Dir> = w.iter().rev().map(|&d| inv(d)).collect();
            let mut cur = w.clone();
            for k in 1..=iter_bound {
                cur = cyclic_reduce(&phi.tight_image(&cur));
                if rep.witness.is_none() && cyclically_equal(&cur, w) {
                    rep.witness = Some((g.word(w), k));
                }
                if rep.inversion.is_none() && cyclically_equal(&cur, &winv) {
                    rep.inversion = Some((g.word(w), k));
                }
            }
            if rep.witness.is_some() {
                return Ok(rep);
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> GraphMap {
        GraphMap::rose_from_words(&[("a", "a"), ("b", "ba")]).unwrap()
    }
    fn ex2() -> GraphMap {
        GraphMap::rose_from_words(&[("a", "b"), ("b", "ab")]).unwrap()
    }

    #[test]
    fn matrices_and_filtrations() {
        let phi = ex2();
        let f = compute_maximal_filtration(&phi);
        assert_eq!(f.height(), 1);
        assert_eq!(transition_matrix(&phi, &f, 1).unwrap(), vec![vec![0, 1], vec![1, 1]]);
        let phi1 = ex1();
        let f1 = compute_maximal_filtration(&phi1);
        assert_eq!(f1.height(), 2);
        assert_eq!(f1.stratum(1).unwrap(), &[0]);
        assert_eq!(transition_matrix(&phi1, &f1, 2).unwrap(), vec![vec![1]]);
        let id = GraphMap::rose_from_words(&[("a", "a"), ("b", "b")]).unwrap();
        let fi = compute_maximal_filtration(&id);
        assert_eq!(fi.height(), 2);
        for s in strata(&id, &fi).unwrap() {
            assert_eq!(s.kind, StratumKind::Polynomial);
        }
    }

    #[test]
    fn golden_ratio() {
        let (kind, l, w) = classify_stratum(&vec![vec![0, 1], vec![1, 1]]).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(kind, StratumKind::Exponential);
        assert!((l.unwrap() - phi).abs() < 1e-12);
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - phi).abs() < 1e-12);
        assert_eq!(classify_stratum(&vec![vec![0]]).unwrap().0, StratumKind::Zero);
        assert!(matches!(
            classify_stratum(&vec![vec![1, 1], vec![0, 1]]),
            Err(Error::FiltrationNotMaximal(_))
        ));
    }

    #[test]
    fn periodic_matrix_is_exponential_but_not_primitive() {
        let (kind, l, _) = classify_stratum(&vec![vec![0, 2], vec![2, 0]]).unwrap();
        assert_eq!(kind, StratumKind::Exponential);
        assert!((l.unwrap() - 2.0).abs() < 1e-12);
        assert!(!is_primitive(&vec![vec![0, 1], vec![1, 0]]));
        assert!(is_primitive(&vec![vec![0, 1], vec![1, 1]]));
    }

    #[test]
    fn rtt_reports() {
        let phi = ex2();
        let rep = verify_rtt(&phi, &Filtration::trivial(phi.graph()), 6);
        assert!(rep.items.iter().all(|r| r.status == Status::Verified), "{rep:?}");
        let phi1 = ex1();
        let rep1 = verify_rtt(&phi1, &compute_maximal_filtration(&phi1), 6);
        assert!(rep1.items.iter().all(|r| r.status == Status::Verified), "{rep1:?}");
        let imp = verify_improved(&phi1, &compute_maximal_filtration(&phi1), ImprovedBounds::default());
        assert_eq!(imp.get("improved.3"), Some(&Status::Verified));
    }

    #[test]
    fn split_ex1() {
        let phi = ex1();
        let g = phi.graph();
        let (q, pos) = split_path(&phi, &g.path("b", None).unwrap(), 1, 5).unwrap();
        assert_eq!(q.word(g), "ba");
        assert_eq!(pos, vec![(1, true)]);
    }

    #[test]
    fn atoroidal_ex1() {
        let rep = atoroidal_heuristic(&ex1(), 2, 2).unwrap();
        assert_eq!(rep.witness, Some(("a".into(), 1)));
    }
}

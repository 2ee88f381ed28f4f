//! Graphviz export.

use mtwall_core::ball::{BallComplex, NONE};
use mtwall_core::cutting::DualCubeComplex;
use mtwall_core::flow::Tunnel;
use mtwall_core::graph::GraphMap;
use mtwall_core::rational;
use mtwall_core::walls::{bust_label, ImmersedWall, Sheet, WallEdgeKind, WallNode};
use std::fmt::Write;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// 1-skeleton of a ball: solid vertical edges labelled by their edge name,
/// dashed horizontal edges.
pub fn ball(b: &BallComplex) -> String {
    let g = b.phi().graph();
    let mut out = String::from("digraph ball {\n  node [shape=point];\n");
    for v in 0..b.vertex_count() as u32 {
        let label = format!("{}:{}", b.vertex_height(v), g.word(b.word(v)));
        let _ = writeln!(out, "  v{v} [xlabel={}];", quote(&label));
    }
    for e in b.vedges() {
        let _ = writeln!(out, "  v{} -> v{} [label={}];", e.src, e.dst, quote(g.name(2 * e.edge)));
    }
    for v in 0..b.vertex_count() as u32 {
        let u = b.up(v);
        if u != NONE {
            let _ = writeln!(out, "  v{v} -> v{u} [style=dashed];");
        }
    }
    out.push_str("}\n");
    out
}

/// Tunnel as a tree with edges pointing towards the root.
pub fn tunnel(phi: &GraphMap, t: &Tunnel) -> String {
    let g = phi.graph();
    let mut out = String::from("digraph tunnel {\n");
    for (i, n) in t.nodes.iter().enumerate() {
        let label = format!("{} {} @{}", g.name(2 * n.edge), rational::to_string(&n.s), n.depth);
        let _ = writeln!(out, "  t{i} [label={}];", quote(&label));
    }
    for (i, n) in t.nodes.iter().enumerate() {
        if let Some(p) = n.parent {
            let style = if n.forward { "solid" } else { "dashed" };
            let _ = writeln!(out, "  t{i} -> t{p} [style={style}];");
        }
    }
    out.push_str("}\n");
    out
}

/// Wall graph: one cluster per nucleus listing its pieces of `E`, tunnel
/// nodes as plain nodes, twisted edges drawn bold.
pub fn wall(phi: &GraphMap, w: &ImmersedWall) -> String {
    let g = phi.graph();
    let ef = w.eflat();
    let mut out = String::from("graph wall {\n  compound=true;\n");
    for (i, node) in w.nodes().iter().enumerate() {
        match *node {
            WallNode::Nucleus(n) => {
                let nuc = &ef.nuclei()[n];
                let _ = writeln!(out, "  subgraph cluster_n{n} {{\n    label=\"nucleus {n}\";");
                let _ = writeln!(out, "    w{i} [shape=box,label=\"N{n}\"];");
                for &v in &nuc.vertices {
                    let _ = writeln!(
                        out,
                        "    n{n}_v{v} [shape=circle,label={}];",
                        quote(&g.vertex_names()[v])
                    );
                }
                for &(e, idx) in &nuc.segments {
                    let busts = ef.busts(e);
                    let lo = if idx == 0 {
                        "0".to_string()
                    } else {
                        bust_label(&busts[idx - 1])
                    };
                    let hi = if idx == busts.len() {
                        "1".to_string()
                    } else {
                        bust_label(&busts[idx])
                    };
                    let label = format!("{}[{lo}, {hi}]", g.name(2 * e));
                    let _ = writeln!(out, "    n{n}_s{e}_{idx} [shape=plaintext,label={}];", quote(&label));
                }
                out.push_str("  }\n");
            }
            WallNode::Tunnel { sheet, primary, node } => {
                let t = w.tunnel(primary);
                let tn = &t.nodes[node];
                let arrow = if sheet == Sheet::Left { "←" } else { "→" };
                let label = format!(
                    "{arrow}T{primary} {} {}",
                    g.name(2 * tn.edge),
                    rational::to_string(&tn.s)
                );
                let _ = writeln!(out, "  w{i} [label={}];", quote(&label));
            }
        }
    }
    for e in w.edges() {
        let style = match e.kind {
            WallEdgeKind::Tunnel => "solid",
            WallEdgeKind::Root => "dotted",
            WallEdgeKind::Leaf => "dashed",
        };
        let width = if e.twist { ",penwidth=2" } else { "" };
        let _ = writeln!(out, "  w{} -- w{} [style={style}{width}];", e.a, e.b);
    }
    out.push_str("}\n");
    out
}

/// 1-skeleton of a dual cube complex, vertices labelled by side vectors.
pub fn dual(d: &DualCubeComplex) -> String {
    let mut out = String::from("graph dual {\n");
    for (i, v) in d.vertices.iter().enumerate() {
        let label: String = v.iter().map(|s| char::from(b'0' + s)).collect();
        let _ = writeln!(out, "  c{i} [label={}];", quote(&label));
    }
    for &(a, b) in &d.edges {
        let _ = writeln!(out, "  c{a} -- c{b};");
    }
    out.push_str("}\n");
    out
}

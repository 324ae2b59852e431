//! Text and DOT views of a process graph.

use std::fmt::Write;

use crate::graph::{Def, Graph, Kind, NodeId};

fn edge_label(g: &Graph, n: NodeId) -> String {
    g.nodes[n].edge.iter().map(|(v, t)| format!("{v}={t}")).collect::<Vec<_>>().join(",")
}

fn describe(g: &Graph, n: NodeId) -> String {
    let node = &g.nodes[n];
    let stack = node.word.render_grouped(&node.tracker.reg);
    let extra = match &node.kind {
        Kind::Let { defs, .. } => {
            let d: Vec<String> = defs
                .iter()
                .map(|(v, d)| match d {
                    Def::Static(t) => format!("{v}={t}"),
                    Def::Node(k) => format!("{v}=#{k}"),
                })
                .collect();
            format!(" let {}", d.join(", "))
        }
        Kind::Fold { holes, .. } => {
            format!(" fold {}", holes.iter().map(|h| format!("#{}", h.target)).collect::<Vec<_>>().join(","))
        }
        Kind::Decompose { skeleton, .. } => format!(" split {skeleton}"),
        Kind::Stuck => " stuck".into(),
        Kind::Frontier => " frontier".into(),
        _ => String::new(),
    };
    format!("#{n} {}  [{stack}]{extra}", node.config.term)
}

/// One line per reachable node, indented by depth, with narrowing labels.
pub fn render_tree(g: &Graph) -> String {
    let mut out = String::new();
    fn go(g: &Graph, n: NodeId, depth: usize, out: &mut String) {
        let label = edge_label(g, n);
        let prefix = if label.is_empty() { String::new() } else { format!("{label} => ") };
        let _ = writeln!(out, "{}{prefix}{}", "  ".repeat(depth), describe(g, n));
        for k in g.children(n) {
            go(g, k, depth + 1, out);
        }
    }
    go(g, g.root, 0, &mut out);
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn render_dot(g: &Graph) -> String {
    let mut out = String::from("digraph process {\n  node [shape=box];\n");
    for n in g.reachable() {
        let node = &g.nodes[n];
        let label = format!("{}\\n{}", escape(&node.config.term.to_string()), escape(&node.word.visible.plain_string()));
        let _ = writeln!(out, "  n{n} [label=\"{label}\"];");
        for k in g.children(n) {
            let _ = writeln!(out, "  n{n} -> n{k} [label=\"{}\"];", escape(&edge_label(g, k)));
        }
        if let Kind::Fold { holes, .. } = &node.kind {
            for h in holes {
                let _ = writeln!(out, "  n{n} -> n{} [style=dashed];", h.target);
            }
        }
    }
    out.push_str("}\n");
    out
}

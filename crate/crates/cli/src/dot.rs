//! Graphviz rendering of curve chains: one node per curve, boxes for block
//! members, circles for kept curves, edges for intersections, labels
//! carrying the self-intersections.

use singcalc_core::mmp::FamilyState;
use singcalc_core::resolutions::DecoratedResolution;

fn graph(name: &str, nodes: &[(i64, bool)]) -> String {
    let mut out = String::new();
    out.push_str(&format!("graph {name} {{\n"));
    out.push_str("  rankdir=LR;\n");
    for (i, (selfint, boxed)) in nodes.iter().enumerate() {
        let shape = if *boxed { "box" } else { "circle" };
        out.push_str(&format!("  c{i} [label=\"{selfint}\", shape={shape}];\n"));
    }
    for i in 1..nodes.len() {
        out.push_str(&format!("  c{} -- c{};\n", i - 1, i));
    }
    out.push_str("}\n");
    out
}

/// The dual graph of a decorated resolution.
pub fn decoration_graph(name: &str, dec: &DecoratedResolution) -> String {
    let nodes: Vec<(i64, bool)> = dec
        .nodes
        .iter()
        .map(|n| (n.selfint, n.block.is_some()))
        .collect();
    graph(name, &nodes)
}

/// One snapshot of the compactified central chain during a program run.
pub fn frame_graph(name: &str, state: &FamilyState) -> String {
    let nodes: Vec<(i64, bool)> = state
        .curves
        .iter()
        .map(|c| (c.selfint, c.block.is_some()))
        .collect();
    graph(name, &nodes)
}

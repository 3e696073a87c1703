//! DOT export for elaborated graphs.
//!
//! Two granularities: `Grouped` collapses vertices sharing an owner label
//! (one rendered node per EQU/HDL node or interface port, mirroring the
//! source structure), `Operators` renders every vertex. Output is
//! deterministic: stable vertex ordering, sorted groups.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dfg::{Dfg, EdgeKind, VertexKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotStyle {
    Grouped,
    Operators,
}

pub fn export_dot(dfg: &Dfg, style: DotStyle) -> String {
    match style {
        DotStyle::Grouped => grouped(dfg),
        DotStyle::Operators => operators(dfg),
    }
}

fn kind_word(kind: &VertexKind) -> String {
    match kind {
        VertexKind::Input { .. } => "in".into(),
        VertexKind::ConstInput { .. } => "creg".into(),
        VertexKind::BranchInput { .. } => "brch_in".into(),
        VertexKind::Output { .. } => "out".into(),
        VertexKind::BranchOutput { .. } => "brch_out".into(),
        VertexKind::Op(op) => op.name().into(),
        VertexKind::Const(bits) => format!("{:?}", f32::from_bits(*bits)),
        VertexKind::Prim(p) => p.name().into(),
        VertexKind::Instance { module, .. } => module.clone(),
    }
}

fn shape(kind: &VertexKind) -> &'static str {
    match kind {
        VertexKind::Input { .. }
        | VertexKind::ConstInput { .. }
        | VertexKind::BranchInput { .. }
        | VertexKind::Output { .. }
        | VertexKind::BranchOutput { .. } => "ellipse",
        VertexKind::Instance { .. } | VertexKind::Prim(_) => "box",
        _ => "plaintext",
    }
}

fn operators(dfg: &Dfg) -> String {
    let mut out = String::from("digraph dfg {\n  rankdir=TB;\n");
    for (i, v) in dfg.vertices.iter().enumerate() {
        out.push_str(&format!(
            "  v{} [label=\"{}\\n{} ({})\" shape={}];\n",
            i,
            v.label,
            kind_word(&v.kind),
            v.latency,
            shape(&v.kind)
        ));
    }
    for e in &dfg.edges {
        let style = if e.kind == EdgeKind::Branch {
            " style=dashed"
        } else {
            ""
        };
        let label = if e.delay > 0 {
            format!(" label=\"z{}\"", e.delay)
        } else {
            String::new()
        };
        out.push_str(&format!(
            "  v{} -> v{} [{}{}];\n",
            e.src,
            e.dst,
            label.trim_start(),
            style
        ));
    }
    out.push_str("}\n");
    out
}

fn grouped(dfg: &Dfg) -> String {
    // Group key: the vertex label (owner node or port).
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, v) in dfg.vertices.iter().enumerate() {
        groups.entry(v.label.as_str()).or_default().push(i);
    }
    let mut out = String::from("digraph dfg {\n  rankdir=TB;\n");
    for (label, members) in &groups {
        let v = &dfg.vertices[members[0]];
        let latency: u64 = if members.len() == 1 {
            v.latency
        } else {
            // A formula's depth within the group is not shown; the box
            // lists its operator mix instead.
            0
        };
        let desc = if members.len() == 1 {
            format!("{} ({})", kind_word(&v.kind), v.latency)
        } else {
            let mut words: Vec<String> =
                members.iter().map(|&m| kind_word(&dfg.vertices[m].kind)).collect();
            words.sort();
            let _ = latency;
            format!("{} ops", words.len())
        };
        out.push_str(&format!(
            "  \"{}\" [label=\"{}\\n{}\" shape={}];\n",
            label,
            label,
            desc,
            shape(&v.kind)
        ));
    }
    // One edge per ordered group pair; intra-group edges are implicit.
    let mut seen: BTreeSet<(String, String, EdgeKindTag)> = BTreeSet::new();
    for e in &dfg.edges {
        let a = dfg.vertices[e.src].label.clone();
        let b = dfg.vertices[e.dst].label.clone();
        if a == b {
            continue;
        }
        let tag = if e.kind == EdgeKind::Branch {
            EdgeKindTag::Branch
        } else {
            EdgeKindTag::Main
        };
        if seen.insert((a.clone(), b.clone(), tag)) {
            let style = if tag == EdgeKindTag::Branch {
                " [style=dashed]"
            } else {
                ""
            };
            out.push_str(&format!("  \"{}\" -> \"{}\"{};\n", a, b, style));
        }
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKindTag {
    Main,
    Branch,
}

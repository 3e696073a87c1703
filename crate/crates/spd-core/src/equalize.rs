//! Delay equalization: levelize the main-edge subgraph so every input-to-
//! output path has identical latency.
//!
//! For each vertex, inserted delays on its incoming main edges are chosen
//! so all predecessors arrive on the same cycle; output ports are then
//! padded to the global maximum. All slack lands on the edge entering the
//! join vertex. Branch edges are left untouched. The transform is
//! idempotent: existing inserted delays are part of the path length it
//! balances.

use alloc::format;
use alloc::vec::Vec;

use crate::dfg::{Dfg, EdgeKind};
use crate::diag::Diagnostic;

/// Equalize path delays in place and set the pipeline depth.
pub fn equalize_delays(mut dfg: Dfg) -> Result<Dfg, Diagnostic> {
    let n = dfg.vertices.len();

    let order = match dfg.main_topo_order() {
        Some(o) => o,
        None => {
            let cycle = dfg.main_cycle_vertices();
            let labels: Vec<&str> = cycle
                .iter()
                .take(8)
                .map(|&v| dfg.vertices[v].label.as_str())
                .collect();
            return Err(Diagnostic::new(format!(
                "main stream contains a cycle through: {}",
                labels.join(", ")
            )));
        }
    };

    // Incoming main edges per vertex.
    let mut incoming: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (i, e) in dfg.edges.iter().enumerate() {
        if e.kind == EdgeKind::Main {
            incoming[e.dst].push(i);
        }
    }

    let mut arrival = alloc::vec![0u64; n];
    for &v in &order {
        let mut t = 0u64;
        for &ei in &incoming[v] {
            let e = &dfg.edges[ei];
            t = t.max(arrival[e.src] + dfg.vertices[e.src].latency + e.delay);
        }
        arrival[v] = t;
    }

    // Pad output ports to the global maximum arrival among them, skipping
    // outputs fed purely over branch edges.
    let padded: Vec<usize> = dfg
        .output_vertices()
        .filter(|&v| !incoming[v].is_empty())
        .collect();
    if let Some(d) = padded.iter().map(|&v| arrival[v]).max() {
        for &v in &padded {
            arrival[v] = d;
        }
    }

    for v in 0..n {
        for &ei in &incoming[v] {
            let e = &mut dfg.edges[ei];
            let ready = arrival[e.src] + dfg.vertices[e.src].latency;
            debug_assert!(arrival[v] >= ready);
            e.delay = arrival[v] - ready;
        }
    }

    // Depth: longest input-to-output latency; without explicit outputs the
    // longest path anywhere.
    let outputs: Vec<usize> = dfg.output_vertices().collect();
    dfg.depth = if outputs.is_empty() {
        (0..n).map(|v| arrival[v] + dfg.vertices[v].latency).max().unwrap_or(0)
    } else {
        outputs
            .iter()
            .map(|&v| arrival[v] + dfg.vertices[v].latency)
            .max()
            .unwrap_or(0)
    };
    dfg.equalized = true;
    Ok(dfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfg::{Edge, EdgeKind, VertexKind};

    fn edge(src: usize, dst: usize) -> Edge {
        Edge {
            src,
            src_port: 0,
            dst,
            dst_port: 0,
            delay: 0,
            kind: EdgeKind::Main,
        }
    }

    /// Diamond a->b->d, a->c->d with latency(b)=5, latency(c)=2: the c->d
    /// edge gains 3 delay stages.
    #[test]
    fn diamond_levelization() {
        let mut dfg = Dfg::default();
        let a = dfg.add_vertex(VertexKind::Input { port: "a".into() }, 0, "a".into());
        let b = dfg.add_vertex(VertexKind::Op(crate::dfg::OpKind::Add), 5, "b".into());
        let c = dfg.add_vertex(VertexKind::Op(crate::dfg::OpKind::Add), 2, "c".into());
        let d = dfg.add_vertex(VertexKind::Op(crate::dfg::OpKind::Add), 1, "d".into());
        dfg.add_edge(edge(a, b));
        dfg.add_edge(edge(a, c));
        dfg.add_edge(edge(b, d));
        let mut e_cd = edge(c, d);
        e_cd.dst_port = 1;
        dfg.add_edge(e_cd);
        let dfg = equalize_delays(dfg).unwrap();
        let cd = dfg
            .edges
            .iter()
            .find(|e| e.src == c && e.dst == d)
            .unwrap();
        assert_eq!(cd.delay, 3);
        let bd = dfg
            .edges
            .iter()
            .find(|e| e.src == b && e.dst == d)
            .unwrap();
        assert_eq!(bd.delay, 0);
        assert_eq!(dfg.depth, 6);
    }

    #[test]
    fn idempotent() {
        let mut dfg = Dfg::default();
        let a = dfg.add_vertex(VertexKind::Input { port: "a".into() }, 0, "a".into());
        let b = dfg.add_vertex(VertexKind::Op(crate::dfg::OpKind::Mul), 7, "b".into());
        let c = dfg.add_vertex(VertexKind::Op(crate::dfg::OpKind::Mul), 3, "c".into());
        let z = dfg.add_vertex(VertexKind::Output { port: "z".into() }, 0, "z".into());
        dfg.add_edge(edge(a, b));
        dfg.add_edge(edge(a, c));
        dfg.add_edge(edge(b, z));
        let mut e = edge(c, z);
        e.dst_port = 0;
        dfg.add_edge(e);
        let once = equalize_delays(dfg).unwrap();
        let twice = equalize_delays(once.clone()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn cycle_is_reported() {
        let mut dfg = Dfg::default();
        let a = dfg.add_vertex(VertexKind::Op(crate::dfg::OpKind::Add), 1, "looper".into());
        let b = dfg.add_vertex(VertexKind::Op(crate::dfg::OpKind::Add), 1, "loopee".into());
        dfg.add_edge(edge(a, b));
        dfg.add_edge(edge(b, a));
        let err = equalize_delays(dfg).unwrap_err();
        assert!(err.message.contains("cycle"));
        assert!(err.message.contains("looper"));
    }

    #[test]
    fn branch_edges_excluded() {
        let mut dfg = Dfg::default();
        let a = dfg.add_vertex(VertexKind::Input { port: "a".into() }, 0, "a".into());
        let b = dfg.add_vertex(VertexKind::Op(crate::dfg::OpKind::Add), 5, "b".into());
        let c = dfg.add_vertex(VertexKind::Op(crate::dfg::OpKind::Add), 0, "c".into());
        dfg.add_edge(edge(a, b));
        let mut br = edge(b, c);
        br.kind = EdgeKind::Branch;
        dfg.add_edge(br);
        let mut m = edge(a, c);
        m.dst_port = 1;
        dfg.add_edge(m);
        let dfg = equalize_delays(dfg).unwrap();
        let br = dfg
            .edges
            .iter()
            .find(|e| e.kind == EdgeKind::Branch)
            .unwrap();
        assert_eq!(br.delay, 0, "branch edges carry no inserted delay");
    }
}

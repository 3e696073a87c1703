//! Floating-point operator census over a flattened graph.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dfg::{Dfg, OpCensus, OpKind, VertexKind};
use crate::diag::Diagnostic;

/// Count operator vertices per class. `+` and `-` are both adders.
/// Buffer primitives and constants contribute nothing. Opaque module
/// instances make the census incomplete and are reported as an error.
pub fn census(dfg: &Dfg) -> Result<OpCensus, Diagnostic> {
    let opaque: Vec<&str> = dfg
        .vertices
        .iter()
        .filter(|v| matches!(v.kind, VertexKind::Instance { .. }))
        .map(|v| v.label.as_str())
        .collect();
    if !opaque.is_empty() {
        return Err(Diagnostic::new(format!(
            "census incomplete, opaque instances present: {}",
            opaque.join(", ")
        )));
    }
    let mut c = OpCensus::default();
    for v in &dfg.vertices {
        if let VertexKind::Op(op) = v.kind {
            match op {
                OpKind::Add | OpKind::Sub => c.adders += 1,
                OpKind::Mul => c.multipliers += 1,
                OpKind::Div => c.dividers += 1,
                OpKind::Sqrt => c.sqrts += 1,
            }
        }
    }
    Ok(c)
}

/// Total stencil/delay buffer bits held by primitives, for resource models.
pub fn buffer_bits(dfg: &Dfg) -> u64 {
    dfg.vertices
        .iter()
        .map(|v| match &v.kind {
            VertexKind::Prim(p) => p.buffer_bits(),
            _ => 0,
        })
        .sum::<u64>()
        + dfg.edges.iter().map(|e| e.delay * 32).sum::<u64>()
}

/// Short human summary, e.g. `adders 3, multipliers 2, dividers 1, sqrts 0, total 6`.
pub fn describe(c: &OpCensus) -> String {
    format!(
        "adders {}, multipliers {}, dividers {}, sqrts {}, total {}",
        c.adders,
        c.multipliers,
        c.dividers,
        c.sqrts,
        c.n_flops()
    )
}

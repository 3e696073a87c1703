//! Structured-text netlist: a machine-readable record of vertices,
//! latencies, edges, and inserted delays sufficient to rebuild the graph
//! bit-exactly.
//!
//! Format (version 1), one record per line, space separated:
//!
//! ```text
//! spd-netlist 1
//! depth <cycles>
//! equalized <0|1>
//! vertex <id> <latency> <label> <kind...>
//! edge <src> <src_port> <dst> <dst_port> <delay> <m|b>
//! ```
//!
//! Vertex kinds: `in|creg|brin|out|brout <port>`, `const <hex32>`,
//! `op <add|sub|mul|div|sqrt>`,
//! `inst <module> <main_ins> <brch_ins> <main_outs> <brch_outs>`,
//! `prim delay <k> <width>`, `prim mux <ways>`, `prim cmp <rel>`,
//! `prim elim`, `prim fwd <k>`, `prim bwd <k>`,
//! `prim stencil <lanes> <row_len> <margin> <pad_hex> <offset...>`.
//! Labels and ports never contain whitespace.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dfg::{Dfg, Edge, EdgeKind, OpKind, Vertex, VertexKind};
use crate::diag::Diagnostic;
use crate::primitives::{PrimConfig, Relation};

pub const NETLIST_VERSION: u32 = 1;

pub fn export_netlist(dfg: &Dfg) -> String {
    let mut out = String::new();
    out.push_str(&format!("spd-netlist {}\n", NETLIST_VERSION));
    out.push_str(&format!("depth {}\n", dfg.depth));
    out.push_str(&format!("equalized {}\n", u8::from(dfg.equalized)));
    for (i, v) in dfg.vertices.iter().enumerate() {
        out.push_str(&format!(
            "vertex {} {} {} {}\n",
            i,
            v.latency,
            v.label,
            kind_text(&v.kind)
        ));
    }
    for e in &dfg.edges {
        out.push_str(&format!(
            "edge {} {} {} {} {} {}\n",
            e.src,
            e.src_port,
            e.dst,
            e.dst_port,
            e.delay,
            if e.kind == EdgeKind::Branch { "b" } else { "m" }
        ));
    }
    out
}

fn kind_text(kind: &VertexKind) -> String {
    match kind {
        VertexKind::Input { port } => format!("in {}", port),
        VertexKind::ConstInput { port } => format!("creg {}", port),
        VertexKind::BranchInput { port } => format!("brin {}", port),
        VertexKind::Output { port } => format!("out {}", port),
        VertexKind::BranchOutput { port } => format!("brout {}", port),
        VertexKind::Const(bits) => format!("const {:08x}", bits),
        VertexKind::Op(op) => format!("op {}", op.name()),
        VertexKind::Instance {
            module,
            main_ins,
            brch_ins,
            main_outs,
            brch_outs,
        } => format!(
            "inst {} {} {} {} {}",
            module, main_ins, brch_ins, main_outs, brch_outs
        ),
        VertexKind::Prim(p) => match p {
            PrimConfig::Delay { k, width } => format!("prim delay {} {}", k, width),
            PrimConfig::SyncMux { ways } => format!("prim mux {}", ways),
            PrimConfig::Comparator { rel } => format!("prim cmp {}", rel.name()),
            PrimConfig::Eliminator => "prim elim".to_string(),
            PrimConfig::Forward { k } => format!("prim fwd {}", k),
            PrimConfig::Backward { k } => format!("prim bwd {}", k),
            PrimConfig::Stencil {
                lanes,
                row_len,
                margin,
                pad,
                offsets,
            } => {
                let mut s = format!("prim stencil {} {} {} {:08x}", lanes, row_len, margin, pad);
                for o in offsets {
                    s.push_str(&format!(" {}", o));
                }
                s
            }
        },
    }
}

pub fn import_netlist(text: &str) -> Result<Dfg, Diagnostic> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| Diagnostic::new("empty netlist"))?
        .1;
    let mut hp = header.split_whitespace();
    if hp.next() != Some("spd-netlist") {
        return Err(Diagnostic::new("not a netlist file"));
    }
    let version: u32 = hp
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Diagnostic::new("missing netlist version"))?;
    if version != NETLIST_VERSION {
        return Err(Diagnostic::new(format!(
            "unsupported netlist version {}",
            version
        )));
    }

    let mut dfg = Dfg::default();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut f = line.split_whitespace();
        let at = |msg: &str| Diagnostic::at(lineno as u32 + 1, msg.to_string());
        match f.next() {
            Some("depth") => {
                dfg.depth = parse_field(f.next(), lineno, "depth")?;
            }
            Some("equalized") => {
                let v: u8 = parse_field(f.next(), lineno, "equalized flag")?;
                dfg.equalized = v != 0;
            }
            Some("vertex") => {
                let id: usize = parse_field(f.next(), lineno, "vertex id")?;
                let latency: u64 = parse_field(f.next(), lineno, "vertex latency")?;
                let label = f
                    .next()
                    .ok_or_else(|| at("missing vertex label"))?
                    .to_string();
                let rest: Vec<&str> = f.collect();
                let kind = parse_kind(&rest, lineno)?;
                if id != dfg.vertices.len() {
                    return Err(at("vertex ids must be dense and ordered"));
                }
                dfg.vertices.push(Vertex {
                    kind,
                    latency,
                    label,
                });
            }
            Some("edge") => {
                let src: usize = parse_field(f.next(), lineno, "edge src")?;
                let src_port: usize = parse_field(f.next(), lineno, "edge src port")?;
                let dst: usize = parse_field(f.next(), lineno, "edge dst")?;
                let dst_port: usize = parse_field(f.next(), lineno, "edge dst port")?;
                let delay: u64 = parse_field(f.next(), lineno, "edge delay")?;
                let kind = match f.next() {
                    Some("m") => EdgeKind::Main,
                    Some("b") => EdgeKind::Branch,
                    _ => return Err(at("edge kind must be 'm' or 'b'")),
                };
                if src >= dfg.vertices.len() || dst >= dfg.vertices.len() {
                    return Err(at("edge references unknown vertex"));
                }
                dfg.edges.push(Edge {
                    src,
                    src_port,
                    dst,
                    dst_port,
                    delay,
                    kind,
                });
            }
            Some(other) => {
                return Err(at(&format!("unknown record '{}'", other)));
            }
            None => {}
        }
    }
    Ok(dfg)
}

fn parse_field<T: core::str::FromStr>(
    field: Option<&str>,
    lineno: usize,
    what: &str,
) -> Result<T, Diagnostic> {
    field
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Diagnostic::at(lineno as u32 + 1, format!("missing or invalid {}", what)))
}

fn parse_kind(fields: &[&str], lineno: usize) -> Result<VertexKind, Diagnostic> {
    let at = |msg: String| Diagnostic::at(lineno as u32 + 1, msg);
    let port = |i: usize| -> Result<String, Diagnostic> {
        fields
            .get(i)
            .map(|s| s.to_string())
            .ok_or_else(|| at("missing port name".to_string()))
    };
    match fields.first().copied() {
        Some("in") => Ok(VertexKind::Input { port: port(1)? }),
        Some("creg") => Ok(VertexKind::ConstInput { port: port(1)? }),
        Some("brin") => Ok(VertexKind::BranchInput { port: port(1)? }),
        Some("out") => Ok(VertexKind::Output { port: port(1)? }),
        Some("brout") => Ok(VertexKind::BranchOutput { port: port(1)? }),
        Some("const") => {
            let bits = fields
                .get(1)
                .and_then(|s| u32::from_str_radix(s, 16).ok())
                .ok_or_else(|| at("invalid const bits".to_string()))?;
            Ok(VertexKind::Const(bits))
        }
        Some("op") => {
            let op = match fields.get(1).copied() {
                Some("add") => OpKind::Add,
                Some("sub") => OpKind::Sub,
                Some("mul") => OpKind::Mul,
                Some("div") => OpKind::Div,
                Some("sqrt") => OpKind::Sqrt,
                other => return Err(at(format!("unknown operator {:?}", other))),
            };
            Ok(VertexKind::Op(op))
        }
        Some("inst") => {
            let module = port(1)?;
            let nums: Vec<usize> = fields[2..]
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| at("invalid instance arity".to_string()))?;
            if nums.len() != 4 {
                return Err(at("instance needs 4 arity fields".to_string()));
            }
            Ok(VertexKind::Instance {
                module,
                main_ins: nums[0],
                brch_ins: nums[1],
                main_outs: nums[2],
                brch_outs: nums[3],
            })
        }
        Some("prim") => {
            let int = |i: usize| -> Result<u64, Diagnostic> {
                fields
                    .get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| at("invalid primitive field".to_string()))
            };
            let config = match fields.get(1).copied() {
                Some("delay") => PrimConfig::Delay {
                    k: int(2)?,
                    width: int(3)? as usize,
                },
                Some("mux") => PrimConfig::SyncMux {
                    ways: int(2)? as usize,
                },
                Some("cmp") => {
                    let rel = fields
                        .get(2)
                        .and_then(|s| Relation::parse(s))
                        .ok_or_else(|| at("invalid comparator relation".to_string()))?;
                    PrimConfig::Comparator { rel }
                }
                Some("elim") => PrimConfig::Eliminator,
                Some("fwd") => PrimConfig::Forward { k: int(2)? },
                Some("bwd") => PrimConfig::Backward { k: int(2)? },
                Some("stencil") => {
                    let lanes = int(2)? as u32;
                    let row_len = int(3)? as u32;
                    let margin = int(4)? as u32;
                    let pad = fields
                        .get(5)
                        .and_then(|s| u32::from_str_radix(s, 16).ok())
                        .ok_or_else(|| at("invalid stencil pad".to_string()))?;
                    let offsets: Vec<i64> = fields[6..]
                        .iter()
                        .map(|s| s.parse())
                        .collect::<Result<_, _>>()
                        .map_err(|_| at("invalid stencil offset".to_string()))?;
                    PrimConfig::Stencil {
                        lanes,
                        row_len,
                        margin,
                        pad,
                        offsets,
                    }
                }
                other => return Err(at(format!("unknown primitive {:?}", other))),
            };
            Ok(VertexKind::Prim(config))
        }
        other => Err(at(format!("unknown vertex kind {:?}", other))),
    }
}

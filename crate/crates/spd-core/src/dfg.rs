//! Elaborated data-flow graphs.
//!
//! A `Dfg` is the hardware view of a module: vertices carry pipeline
//! latencies, edges carry inserted delay registers. After equalization
//! every main-edge path from an input to an output has the same total
//! latency, the pipeline depth `d`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::primitives::PrimConfig;

pub type VertexId = usize;

/// Floating-point operator classes produced by lowering EQU formulae.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::Div => "div",
            OpKind::Sqrt => "sqrt",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            OpKind::Sqrt => 1,
            _ => 2,
        }
    }
}

/// Pipeline latencies for lowered operators, in cycles. The defaults are
/// calibration knobs; declared HDL delays always win for aggregate checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpLatencies {
    pub add: u64,
    pub mul: u64,
    pub div: u64,
    pub sqrt: u64,
}

impl Default for OpLatencies {
    fn default() -> Self {
        OpLatencies {
            add: 7,
            mul: 5,
            div: 14,
            sqrt: 14,
        }
    }
}

impl OpLatencies {
    pub fn of(&self, op: OpKind) -> u64 {
        match op {
            OpKind::Add | OpKind::Sub => self.add,
            OpKind::Mul => self.mul,
            OpKind::Div => self.div,
            OpKind::Sqrt => self.sqrt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VertexKind {
    /// Main stream input port of the top module.
    Input { port: String },
    /// Constant-register input of the top module: holds one word for an
    /// entire stream pass.
    ConstInput { port: String },
    /// Branch input port of the top module.
    BranchInput { port: String },
    /// Main stream output port of the top module.
    Output { port: String },
    /// Branch output port of the top module.
    BranchOutput { port: String },
    /// Lowered floating-point operator.
    Op(OpKind),
    /// Literal constant (raw 32-bit pattern).
    Const(u32),
    /// Library primitive instance.
    Prim(PrimConfig),
    /// Opaque module instance (not flattened).
    Instance {
        module: String,
        main_ins: usize,
        brch_ins: usize,
        main_outs: usize,
        brch_outs: usize,
    },
}

impl VertexKind {
    pub fn n_inputs(&self) -> usize {
        match self {
            VertexKind::Input { .. }
            | VertexKind::ConstInput { .. }
            | VertexKind::BranchInput { .. }
            | VertexKind::Const(_) => 0,
            VertexKind::Output { .. } | VertexKind::BranchOutput { .. } => 1,
            VertexKind::Op(op) => op.arity(),
            VertexKind::Prim(p) => p.n_inputs(),
            VertexKind::Instance {
                main_ins, brch_ins, ..
            } => main_ins + brch_ins,
        }
    }

    pub fn n_outputs(&self) -> usize {
        match self {
            VertexKind::Output { .. } | VertexKind::BranchOutput { .. } => 0,
            VertexKind::Op(_) | VertexKind::Const(_) => 1,
            VertexKind::Input { .. }
            | VertexKind::ConstInput { .. }
            | VertexKind::BranchInput { .. } => 1,
            VertexKind::Prim(p) => p.n_outputs(),
            VertexKind::Instance {
                main_outs,
                brch_outs,
                ..
            } => main_outs + brch_outs,
        }
    }

    pub fn is_output(&self) -> bool {
        matches!(
            self,
            VertexKind::Output { .. } | VertexKind::BranchOutput { .. }
        )
    }

    /// First output index that is a branch port (instances only).
    pub fn branch_out_start(&self) -> Option<usize> {
        match self {
            VertexKind::Instance { main_outs, .. } => Some(*main_outs),
            _ => None,
        }
    }

    /// First input index that is a branch port (instances only).
    pub fn branch_in_start(&self) -> Option<usize> {
        match self {
            VertexKind::Instance { main_ins, .. } => Some(*main_ins),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub kind: VertexKind,
    /// Pipeline latency through this vertex, in cycles.
    pub latency: u64,
    /// Owner path for grouping and diagnostics, e.g. `Core_1.uCalc0`.
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Main,
    /// Branch connections may form feedback between sibling instances and
    /// are excluded from delay equalization.
    Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: VertexId,
    pub src_port: usize,
    pub dst: VertexId,
    pub dst_port: usize,
    /// Delay registers inserted on this edge by equalization.
    pub delay: u64,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dfg {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Pipeline depth in cycles; meaningful once `equalized`.
    pub depth: u64,
    pub equalized: bool,
}

impl Dfg {
    pub fn add_vertex(&mut self, kind: VertexKind, latency: u64, label: String) -> VertexId {
        let id = self.vertices.len();
        self.vertices.push(Vertex {
            kind,
            latency,
            label,
        });
        id
    }

    pub fn add_edge(&mut self, edge: Edge) {
        self.edges.push(edge);
    }

    pub fn main_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Main)
    }

    /// Output vertices (main and branch) of the top module.
    pub fn output_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind.is_output())
            .map(|(id, _)| id)
    }

    /// Arrival time of each vertex over main edges: the cycle at which all
    /// its inputs are available, taking inserted delays into account.
    /// Returns `None` if the main-edge subgraph has a cycle.
    pub fn arrival_times(&self) -> Option<Vec<u64>> {
        let order = self.main_topo_order()?;
        let mut arrival = alloc::vec![0u64; self.vertices.len()];
        for &v in &order {
            let mut t = 0u64;
            for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Main) {
                if e.dst == v {
                    t = t.max(arrival[e.src] + self.vertices[e.src].latency + e.delay);
                }
            }
            arrival[v] = t;
        }
        Some(arrival)
    }

    /// Topological order over main edges, or `None` on a cycle.
    pub fn main_topo_order(&self) -> Option<Vec<VertexId>> {
        let n = self.vertices.len();
        let mut indeg = alloc::vec![0usize; n];
        for e in self.main_edges() {
            indeg[e.dst] += 1;
        }
        let mut queue: Vec<VertexId> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            order.push(v);
            for e in self.main_edges() {
                if e.src == v {
                    indeg[e.dst] -= 1;
                    if indeg[e.dst] == 0 {
                        queue.push(e.dst);
                    }
                }
            }
        }
        if order.len() == n {
            Some(order)
        } else {
            None
        }
    }

    /// Vertices on some main-edge cycle, for error reporting.
    pub fn main_cycle_vertices(&self) -> Vec<VertexId> {
        let n = self.vertices.len();
        let mut indeg = alloc::vec![0usize; n];
        for e in self.main_edges() {
            indeg[e.dst] += 1;
        }
        let mut queue: Vec<VertexId> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut removed = alloc::vec![false; n];
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            removed[v] = true;
            for e in self.main_edges() {
                if e.src == v {
                    indeg[e.dst] -= 1;
                    if indeg[e.dst] == 0 {
                        queue.push(e.dst);
                    }
                }
            }
        }
        (0..n).filter(|&v| !removed[v]).collect()
    }
}

/// Floating-point operator counts of a fully flattened pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCensus {
    pub adders: u64,
    pub multipliers: u64,
    pub dividers: u64,
    pub sqrts: u64,
}

impl OpCensus {
    pub fn n_flops(&self) -> u64 {
        self.adders + self.multipliers + self.dividers + self.sqrts
    }
}

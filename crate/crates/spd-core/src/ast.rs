//! AST for one SPD compilation unit.
//!
//! Source line numbers are carried for diagnostics but are not part of
//! structural identity: `PartialEq` ignores them, so a module compares
//! equal to its canonically printed-and-reparsed form.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A port reference, optionally qualified by its interface name
/// (`Mi::sop` vs. plain `sop`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PortRef {
    pub iface: Option<String>,
    pub name: String,
}

impl PortRef {
    pub fn bare(name: impl Into<String>) -> Self {
        PortRef {
            iface: None,
            name: name.into(),
        }
    }

    pub fn qualified(iface: impl Into<String>, name: impl Into<String>) -> Self {
        PortRef {
            iface: Some(iface.into()),
            name: name.into(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.iface {
            Some(i) => write!(f, "{}::{}", i, self.name),
            None => write!(f, "{}", self.name),
        }
    }
}

/// One interface declaration: a named group of ordered ports.
/// Port order is significant; module calls bind positionally.
#[derive(Debug, Clone, Eq)]
pub struct InterfaceDecl {
    pub if_name: String,
    pub ports: Vec<String>,
    pub line: u32,
}

impl PartialEq for InterfaceDecl {
    fn eq(&self, other: &Self) -> bool {
        self.if_name == other.if_name && self.ports == other.ports
    }
}

/// Binary arithmetic operators available in EQU formulae.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// An EQU formula. All values are single-precision floats; literal
/// equality is bit-level so NaN never appears (the parser rejects
/// non-finite literals).
#[derive(Debug, Clone)]
pub enum Expr {
    Literal(f32),
    Port(PortRef),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Literal(a), Expr::Literal(b)) => a.to_bits() == b.to_bits(),
            (Expr::Port(a), Expr::Port(b)) => a == b,
            (Expr::Binary(op_a, la, ra), Expr::Binary(op_b, lb, rb)) => {
                op_a == op_b && la == lb && ra == rb
            }
            (Expr::Sqrt(a), Expr::Sqrt(b)) => a == b,
            _ => false,
        }
    }
}

impl Expr {
    /// Number of arithmetic operator nodes in the formula.
    pub fn op_count(&self) -> usize {
        match self {
            Expr::Literal(_) | Expr::Port(_) => 0,
            Expr::Binary(_, l, r) => 1 + l.op_count() + r.op_count(),
            Expr::Sqrt(e) => 1 + e.op_count(),
        }
    }

    /// All port references in evaluation order.
    pub fn ports(&self) -> Vec<&PortRef> {
        let mut out = Vec::new();
        self.collect_ports(&mut out);
        out
    }

    fn collect_ports<'a>(&'a self, out: &mut Vec<&'a PortRef>) {
        match self {
            Expr::Literal(_) => {}
            Expr::Port(p) => out.push(p),
            Expr::Binary(_, l, r) => {
                l.collect_ports(out);
                r.collect_ports(out);
            }
            Expr::Sqrt(e) => e.collect_ports(out),
        }
    }
}

/// A value in an HDL node's parameter list. Parameter lists are passed
/// through to the instantiated module; only library primitives interpret
/// them.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f32),
    Ident(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{}", v),
            ParamValue::Float(v) => write!(f, "{:?}", v),
            ParamValue::Ident(s) => write!(f, "{}", s),
        }
    }
}

/// `EQU <name>, <port> = <formula>;` — a single-assignment equation node.
#[derive(Debug, Clone)]
pub struct EquNode {
    pub name: String,
    pub output: PortRef,
    pub expr: Expr,
    pub line: u32,
}

/// `HDL <name>, <delay>, (outs)(bouts) = <module>(ins)(bins), params...;`
#[derive(Debug, Clone)]
pub struct HdlNode {
    pub name: String,
    pub delay: u64,
    pub module: String,
    pub main_outs: Vec<PortRef>,
    pub brch_outs: Vec<PortRef>,
    pub main_ins: Vec<PortRef>,
    pub brch_ins: Vec<PortRef>,
    pub params: Vec<ParamValue>,
    pub line: u32,
}

/// `DRCT (dsts) = (srcs);` — zero-latency port wiring.
#[derive(Debug, Clone)]
pub struct DrctLink {
    pub dsts: Vec<PortRef>,
    pub srcs: Vec<PortRef>,
    pub line: u32,
}

/// A node declaration in declaration order.
#[derive(Debug, Clone)]
pub enum NodeDecl {
    Equ(EquNode),
    Hdl(HdlNode),
    Drct(DrctLink),
}

impl NodeDecl {
    pub fn line(&self) -> u32 {
        match self {
            NodeDecl::Equ(n) => n.line,
            NodeDecl::Hdl(n) => n.line,
            NodeDecl::Drct(n) => n.line,
        }
    }

    /// Node name, if the variant has one (DRCT links are anonymous).
    pub fn name(&self) -> Option<&str> {
        match self {
            NodeDecl::Equ(n) => Some(&n.name),
            NodeDecl::Hdl(n) => Some(&n.name),
            NodeDecl::Drct(_) => None,
        }
    }
}

impl PartialEq for EquNode {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.output == other.output && self.expr == other.expr
    }
}

impl PartialEq for HdlNode {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.delay == other.delay
            && self.module == other.module
            && self.main_outs == other.main_outs
            && self.brch_outs == other.brch_outs
            && self.main_ins == other.main_ins
            && self.brch_ins == other.brch_ins
            && self.params == other.params
    }
}

impl PartialEq for DrctLink {
    fn eq(&self, other: &Self) -> bool {
        self.dsts == other.dsts && self.srcs == other.srcs
    }
}

impl PartialEq for NodeDecl {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (NodeDecl::Equ(a), NodeDecl::Equ(b)) => a == b,
            (NodeDecl::Hdl(a), NodeDecl::Hdl(b)) => a == b,
            (NodeDecl::Drct(a), NodeDecl::Drct(b)) => a == b,
            _ => false,
        }
    }
}

/// Parsed AST of one SPD source file.
#[derive(Debug, Clone, Default)]
pub struct SpdModule {
    pub name: String,
    pub main_in: Option<InterfaceDecl>,
    pub main_out: Option<InterfaceDecl>,
    pub brch_in: Vec<InterfaceDecl>,
    pub brch_out: Vec<InterfaceDecl>,
    /// Constant-input interfaces: their ports behave as main inputs whose
    /// value is held for an entire stream pass.
    pub append_regs: Vec<InterfaceDecl>,
    /// Parameters consumed by the preprocessor, kept for printing.
    pub params: BTreeMap<String, f32>,
    pub nodes: Vec<NodeDecl>,
}

impl PartialEq for SpdModule {
    fn eq(&self, other: &Self) -> bool {
        let params_eq = self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(other.params.iter())
                .all(|((ka, va), (kb, vb))| ka == kb && va.to_bits() == vb.to_bits());
        self.name == other.name
            && self.main_in == other.main_in
            && self.main_out == other.main_out
            && self.brch_in == other.brch_in
            && self.brch_out == other.brch_out
            && self.append_regs == other.append_regs
            && params_eq
            && self.nodes == other.nodes
    }
}

impl SpdModule {
    /// Main input ports in declaration order, including constant registers
    /// (which stream as held constants after the real main inputs).
    pub fn main_in_ports(&self) -> impl Iterator<Item = (&str, &str)> {
        self.main_in
            .iter()
            .chain(self.append_regs.iter())
            .flat_map(|i| i.ports.iter().map(move |p| (i.if_name.as_str(), p.as_str())))
    }

    pub fn main_out_ports(&self) -> impl Iterator<Item = (&str, &str)> {
        self.main_out
            .iter()
            .flat_map(|i| i.ports.iter().map(move |p| (i.if_name.as_str(), p.as_str())))
    }
}

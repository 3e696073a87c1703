//! Hierarchical elaboration of SPD modules into data-flow graphs.
//!
//! EQU formulae lower to one operator vertex per arithmetic operation;
//! HDL nodes become library-primitive vertices, opaque instance vertices
//! carrying their declared delay, or are inlined when flattening is
//! requested; DRCT is zero-latency renaming. Name binding is order-free:
//! forward references between nodes are resolved after all producers are
//! known.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::*;
use crate::dfg::*;
use crate::diag::Diagnostic;
use crate::library::ModuleLibrary;
use crate::primitives;
use crate::validate::{name_table, validate, NameTable, Resolution};

/// How deep to inline SPD module instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flatten {
    /// Inline up to this many hierarchy levels (0 keeps instances opaque).
    Levels(u32),
    Full,
}

impl Flatten {
    fn inlines(&self) -> bool {
        match self {
            Flatten::Levels(n) => *n > 0,
            Flatten::Full => true,
        }
    }

    fn descend(&self) -> Flatten {
        match self {
            Flatten::Levels(n) => Flatten::Levels(n.saturating_sub(1)),
            Flatten::Full => Flatten::Full,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ElabOptions {
    pub flatten: Flatten,
    pub latencies: OpLatencies,
    /// Register stages at the elaborated core's output boundary, realized
    /// as latency on the output-port vertices.
    pub io_register_stages: u64,
}

impl Default for ElabOptions {
    fn default() -> Self {
        ElabOptions {
            flatten: Flatten::Levels(0),
            latencies: OpLatencies::default(),
            io_register_stages: 1,
        }
    }
}

pub struct Elaborated {
    pub dfg: Dfg,
    pub warnings: Vec<String>,
}

/// Elaborate `top` against `lib`. The result is not yet delay-equalized.
pub fn elaborate(
    top: &SpdModule,
    lib: &ModuleLibrary,
    opts: &ElabOptions,
) -> Result<Elaborated, Diagnostic> {
    let mut b = Builder {
        lib,
        opts,
        dfg: Dfg::default(),
        sources: BTreeMap::new(),
        aliases: BTreeMap::new(),
        branch_names: BTreeSet::new(),
        pending: Vec::new(),
        warnings: Vec::new(),
        stack: Vec::new(),
        depth_memo: BTreeMap::new(),
    };

    // Top-level interface vertices.
    if let Some(decl) = &top.main_in {
        for p in &decl.ports {
            let q = qualify(&decl.if_name, p);
            let v = b
                .dfg
                .add_vertex(VertexKind::Input { port: q.clone() }, 0, q.clone());
            b.sources.insert(q, (v, 0));
        }
    }
    for decl in &top.append_regs {
        for p in &decl.ports {
            let q = qualify(&decl.if_name, p);
            let v = b
                .dfg
                .add_vertex(VertexKind::ConstInput { port: q.clone() }, 0, q.clone());
            b.sources.insert(q, (v, 0));
        }
    }
    for decl in &top.brch_in {
        for p in &decl.ports {
            let q = qualify(&decl.if_name, p);
            let v = b
                .dfg
                .add_vertex(VertexKind::BranchInput { port: q.clone() }, 0, q.clone());
            b.sources.insert(q, (v, 0));
        }
    }

    b.build_module(top, "", opts.flatten)?;

    // Top-level output vertices pull the driven values.
    if let Some(decl) = &top.main_out {
        for p in &decl.ports {
            let q = qualify(&decl.if_name, p);
            let v = b.dfg.add_vertex(
                VertexKind::Output { port: q.clone() },
                opts.io_register_stages,
                q.clone(),
            );
            b.pending.push(Pending {
                dst: v,
                dst_port: 0,
                src_name: q,
                kind: EdgeKind::Main,
                line: decl.line,
            });
        }
    }
    for decl in &top.brch_out {
        for p in &decl.ports {
            let q = qualify(&decl.if_name, p);
            let v = b.dfg.add_vertex(
                VertexKind::BranchOutput { port: q.clone() },
                opts.io_register_stages,
                q.clone(),
            );
            b.pending.push(Pending {
                dst: v,
                dst_port: 0,
                src_name: q,
                kind: EdgeKind::Main,
                line: decl.line,
            });
        }
    }

    b.resolve_pending()?;
    b.check_zero_latency_cycles()?;

    Ok(Elaborated {
        dfg: b.dfg,
        warnings: b.warnings,
    })
}

fn qualify(iface: &str, port: &str) -> String {
    format!("{}::{}", iface, port)
}

struct Pending {
    dst: VertexId,
    dst_port: usize,
    src_name: String,
    kind: EdgeKind,
    line: u32,
}

enum Lowered {
    Value(VertexId, usize),
    Alias(String),
}

struct Builder<'a> {
    lib: &'a ModuleLibrary,
    opts: &'a ElabOptions,
    dfg: Dfg,
    /// Fully-prefixed value name -> producing vertex output.
    sources: BTreeMap<String, (VertexId, usize)>,
    /// Fully-prefixed value name -> the name it renames.
    aliases: BTreeMap<String, String>,
    /// Names whose values crossed a branch interface boundary.
    branch_names: BTreeSet<String>,
    pending: Vec<Pending>,
    warnings: Vec<String>,
    stack: Vec<String>,
    depth_memo: BTreeMap<String, Option<u64>>,
}

impl<'a> Builder<'a> {
    fn resolve_name(
        &self,
        table: &NameTable,
        prefix: &str,
        p: &PortRef,
        line: u32,
    ) -> Result<String, Diagnostic> {
        match table.resolve(p) {
            Resolution::One(c) => Ok(format!("{}{}", prefix, c)),
            Resolution::None => Err(Diagnostic::at(line, format!("{} unresolved", p))),
            Resolution::Ambiguous => Err(Diagnostic::at(
                line,
                format!("{} is ambiguous (qualify with 'IF::')", p),
            )),
        }
    }

    fn define(&mut self, name: String, lowered: Lowered, line: u32) -> Result<(), Diagnostic> {
        let clash = match &lowered {
            Lowered::Value(v, p) => self.sources.insert(name.clone(), (*v, *p)).is_some(),
            Lowered::Alias(target) => self
                .aliases
                .insert(name.clone(), target.clone())
                .is_some(),
        } || (self.sources.contains_key(&name) && self.aliases.contains_key(&name));
        if clash {
            return Err(Diagnostic::at(
                line,
                format!("{} driven multiple times", name),
            ));
        }
        Ok(())
    }

    fn build_module(
        &mut self,
        m: &SpdModule,
        prefix: &str,
        budget: Flatten,
    ) -> Result<(), Diagnostic> {
        let diags = validate(m);
        if let Some(d) = diags.first() {
            return Err(Diagnostic {
                line: d.line,
                message: format!("module '{}' is not well formed: {}", m.name, d.message),
            });
        }
        let table = name_table(m);

        for node in &m.nodes {
            match node {
                NodeDecl::Equ(n) => self.lower_equ(n, &table, prefix)?,
                NodeDecl::Hdl(n) => self.lower_hdl(n, &table, prefix, budget)?,
                NodeDecl::Drct(n) => {
                    for (dst, src) in n.dsts.iter().zip(n.srcs.iter()) {
                        let dst_name = self.resolve_name(&table, prefix, dst, n.line)?;
                        let src_name = self.resolve_name(&table, prefix, src, n.line)?;
                        self.define(dst_name, Lowered::Alias(src_name), n.line)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn lower_equ(
        &mut self,
        n: &EquNode,
        table: &NameTable,
        prefix: &str,
    ) -> Result<(), Diagnostic> {
        let label = format!("{}{}", prefix, n.name);
        let lowered = self.lower_expr(&n.expr, &label, table, prefix, n.line)?;
        let out_name = self.resolve_name(table, prefix, &n.output, n.line)?;
        self.define(out_name, lowered, n.line)
    }

    fn lower_expr(
        &mut self,
        e: &Expr,
        label: &str,
        table: &NameTable,
        prefix: &str,
        line: u32,
    ) -> Result<Lowered, Diagnostic> {
        match e {
            Expr::Literal(v) => {
                let id = self
                    .dfg
                    .add_vertex(VertexKind::Const(v.to_bits()), 0, label.to_string());
                Ok(Lowered::Value(id, 0))
            }
            Expr::Port(p) => Ok(Lowered::Alias(self.resolve_name(table, prefix, p, line)?)),
            Expr::Binary(op, l, r) => {
                let kind = match op {
                    BinOp::Add => OpKind::Add,
                    BinOp::Sub => OpKind::Sub,
                    BinOp::Mul => OpKind::Mul,
                    BinOp::Div => OpKind::Div,
                };
                let lhs = self.lower_expr(l, label, table, prefix, line)?;
                let rhs = self.lower_expr(r, label, table, prefix, line)?;
                let id = self.dfg.add_vertex(
                    VertexKind::Op(kind),
                    self.opts.latencies.of(kind),
                    label.to_string(),
                );
                self.connect(id, 0, lhs, line);
                self.connect(id, 1, rhs, line);
                Ok(Lowered::Value(id, 0))
            }
            Expr::Sqrt(inner) => {
                let arg = self.lower_expr(inner, label, table, prefix, line)?;
                let id = self.dfg.add_vertex(
                    VertexKind::Op(OpKind::Sqrt),
                    self.opts.latencies.of(OpKind::Sqrt),
                    label.to_string(),
                );
                self.connect(id, 0, arg, line);
                Ok(Lowered::Value(id, 0))
            }
        }
    }

    fn connect(&mut self, dst: VertexId, dst_port: usize, src: Lowered, line: u32) {
        match src {
            Lowered::Value(v, p) => self.dfg.add_edge(Edge {
                src: v,
                src_port: p,
                dst,
                dst_port,
                delay: 0,
                kind: EdgeKind::Main,
            }),
            Lowered::Alias(name) => self.pending.push(Pending {
                dst,
                dst_port,
                src_name: name,
                kind: EdgeKind::Main,
                line,
            }),
        }
    }

    fn lower_hdl(
        &mut self,
        n: &HdlNode,
        table: &NameTable,
        prefix: &str,
        budget: Flatten,
    ) -> Result<(), Diagnostic> {
        if self.lib.is_primitive(&n.module) {
            return self.lower_primitive(n, table, prefix);
        }
        let callee = self.lib.get(&n.module).ok_or_else(|| {
            Diagnostic::at(n.line, format!("unresolved module '{}'", n.module))
        })?;

        // Callee main inputs: Main_In ports then Append_Reg ports.
        let callee_ins: Vec<String> = callee
            .main_in
            .iter()
            .chain(callee.append_regs.iter())
            .flat_map(|d| d.ports.iter().map(|p| qualify(&d.if_name, p)))
            .collect();
        let callee_outs: Vec<String> = callee
            .main_out
            .iter()
            .flat_map(|d| d.ports.iter().map(|p| qualify(&d.if_name, p)))
            .collect();
        let callee_bins: Vec<String> = callee
            .brch_in
            .iter()
            .flat_map(|d| d.ports.iter().map(|p| qualify(&d.if_name, p)))
            .collect();
        let callee_bouts: Vec<String> = callee
            .brch_out
            .iter()
            .flat_map(|d| d.ports.iter().map(|p| qualify(&d.if_name, p)))
            .collect();

        if n.main_ins.len() != callee_ins.len() {
            return Err(Diagnostic::at(
                n.line,
                format!(
                    "'{}' takes {} main inputs, call provides {}",
                    n.module,
                    callee_ins.len(),
                    n.main_ins.len()
                ),
            ));
        }
        if n.main_outs.len() != callee_outs.len() {
            return Err(Diagnostic::at(
                n.line,
                format!(
                    "'{}' produces {} main outputs, call binds {}",
                    n.module,
                    callee_outs.len(),
                    n.main_outs.len()
                ),
            ));
        }
        if n.brch_ins.len() > callee_bins.len() || n.brch_outs.len() > callee_bouts.len() {
            return Err(Diagnostic::at(
                n.line,
                format!(
                    "'{}' has {} branch inputs and {} branch outputs, call binds {} and {}",
                    n.module,
                    callee_bins.len(),
                    callee_bouts.len(),
                    n.brch_ins.len(),
                    n.brch_outs.len()
                ),
            ));
        }

        if budget.inlines() {
            self.inline_instance(n, table, prefix, budget, callee, &callee_ins, &callee_outs, &callee_bins, &callee_bouts)
        } else {
            self.opaque_instance(n, table, prefix, callee_ins.len(), callee_bins.len(), &callee_outs, &callee_bouts)
        }
    }

    fn opaque_instance(
        &mut self,
        n: &HdlNode,
        table: &NameTable,
        prefix: &str,
        n_main_ins: usize,
        n_brch_ins: usize,
        callee_outs: &[String],
        callee_bouts: &[String],
    ) -> Result<(), Diagnostic> {
        let label = format!("{}{}", prefix, n.name);
        let id = self.dfg.add_vertex(
            VertexKind::Instance {
                module: n.module.clone(),
                main_ins: n_main_ins,
                brch_ins: n_brch_ins,
                main_outs: callee_outs.len(),
                brch_outs: callee_bouts.len(),
            },
            n.delay,
            label,
        );
        for (i, arg) in n.main_ins.iter().enumerate() {
            let name = self.resolve_name(table, prefix, arg, n.line)?;
            self.pending.push(Pending {
                dst: id,
                dst_port: i,
                src_name: name,
                kind: EdgeKind::Main,
                line: n.line,
            });
        }
        for (i, arg) in n.brch_ins.iter().enumerate() {
            let name = self.resolve_name(table, prefix, arg, n.line)?;
            self.pending.push(Pending {
                dst: id,
                dst_port: n_main_ins + i,
                src_name: name,
                kind: EdgeKind::Branch,
                line: n.line,
            });
        }
        for (i, out) in n.main_outs.iter().enumerate() {
            let name = self.resolve_name(table, prefix, out, n.line)?;
            self.define(name, Lowered::Value(id, i), n.line)?;
        }
        for (i, out) in n.brch_outs.iter().enumerate() {
            let name = self.resolve_name(table, prefix, out, n.line)?;
            self.branch_names.insert(name.clone());
            self.define(name, Lowered::Value(id, callee_outs.len() + i), n.line)?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn inline_instance(
        &mut self,
        n: &HdlNode,
        table: &NameTable,
        prefix: &str,
        budget: Flatten,
        callee: &SpdModule,
        callee_ins: &[String],
        callee_outs: &[String],
        callee_bins: &[String],
        callee_bouts: &[String],
    ) -> Result<(), Diagnostic> {
        if self.stack.iter().any(|s| s == &callee.name) {
            return Err(Diagnostic::at(
                n.line,
                format!(
                    "recursive instantiation: {} -> {}",
                    self.stack.join(" -> "),
                    callee.name
                ),
            ));
        }

        // Trusting the declared delay is only safe while the instance stays
        // opaque; when inlining replaces it, disagreement is flagged.
        if let Some(actual) = self.standalone_depth(&callee.name)? {
            if actual != n.delay {
                self.warnings.push(format!(
                    "instance '{}{}': declared delay {} but '{}' elaborates to depth {}",
                    prefix, n.name, n.delay, callee.name, actual
                ));
            }
        }

        let inner = format!("{}{}.", prefix, n.name);

        for (arg, callee_port) in n.main_ins.iter().zip(callee_ins) {
            let src = self.resolve_name(table, prefix, arg, n.line)?;
            self.define(format!("{}{}", inner, callee_port), Lowered::Alias(src), n.line)?;
        }
        for (arg, callee_port) in n.brch_ins.iter().zip(callee_bins) {
            let src = self.resolve_name(table, prefix, arg, n.line)?;
            let name = format!("{}{}", inner, callee_port);
            self.branch_names.insert(name.clone());
            self.define(name, Lowered::Alias(src), n.line)?;
        }
        // Unbound branch inputs are tied to a constant zero word.
        for callee_port in callee_bins.iter().skip(n.brch_ins.len()) {
            let name = format!("{}{}", inner, callee_port);
            let v = self
                .dfg
                .add_vertex(VertexKind::Const(0), 0, format!("{}{}", prefix, n.name));
            self.define(name, Lowered::Value(v, 0), n.line)?;
        }

        self.stack.push(callee.name.clone());
        self.build_module(callee, &inner, budget.descend())?;
        self.stack.pop();

        for (out, callee_port) in n.main_outs.iter().zip(callee_outs) {
            let name = self.resolve_name(table, prefix, out, n.line)?;
            self.define(
                name,
                Lowered::Alias(format!("{}{}", inner, callee_port)),
                n.line,
            )?;
        }
        for (out, callee_port) in n.brch_outs.iter().zip(callee_bouts) {
            let name = self.resolve_name(table, prefix, out, n.line)?;
            self.branch_names.insert(name.clone());
            self.define(
                name,
                Lowered::Alias(format!("{}{}", inner, callee_port)),
                n.line,
            )?;
        }
        Ok(())
    }

    fn lower_primitive(
        &mut self,
        n: &HdlNode,
        table: &NameTable,
        prefix: &str,
    ) -> Result<(), Diagnostic> {
        if !n.brch_ins.is_empty() || !n.brch_outs.is_empty() {
            return Err(Diagnostic::at(
                n.line,
                format!("primitive '{}' has no branch interfaces", n.module),
            ));
        }
        let config = primitives::instantiate(
            &n.module,
            n.delay,
            &n.params,
            n.main_ins.len(),
            n.main_outs.len(),
        )
        .map_err(|d| Diagnostic {
            line: Some(n.line),
            message: d.message,
        })?;
        let natural = config.latency();
        if natural != n.delay {
            self.warnings.push(format!(
                "instance '{}{}': declared delay {} but primitive '{}' realizes latency {}",
                prefix, n.name, n.delay, n.module, natural
            ));
        }
        let label = format!("{}{}", prefix, n.name);
        let id = self
            .dfg
            .add_vertex(VertexKind::Prim(config), natural, label);
        for (i, arg) in n.main_ins.iter().enumerate() {
            let name = self.resolve_name(table, prefix, arg, n.line)?;
            self.pending.push(Pending {
                dst: id,
                dst_port: i,
                src_name: name,
                kind: EdgeKind::Main,
                line: n.line,
            });
        }
        for (i, out) in n.main_outs.iter().enumerate() {
            let name = self.resolve_name(table, prefix, out, n.line)?;
            self.define(name, Lowered::Value(id, i), n.line)?;
        }
        Ok(())
    }

    /// Depth of a module elaborated standalone with opaque children, used
    /// to cross-check declared instance delays. `None` when the module
    /// cannot be elaborated in isolation.
    fn standalone_depth(&mut self, name: &str) -> Result<Option<u64>, Diagnostic> {
        if let Some(d) = self.depth_memo.get(name) {
            return Ok(*d);
        }
        let result = match self.lib.get(name) {
            Some(m) => {
                let opts = ElabOptions {
                    flatten: Flatten::Levels(0),
                    latencies: self.opts.latencies,
                    io_register_stages: 0,
                };
                match elaborate(m, self.lib, &opts) {
                    Ok(e) => match crate::equalize::equalize_delays(e.dfg) {
                        Ok(d) => Some(d.depth),
                        Err(_) => None,
                    },
                    Err(_) => None,
                }
            }
            None => None,
        };
        self.depth_memo.insert(name.to_string(), result);
        Ok(result)
    }

    fn resolve_source(&self, name: &str, line: u32) -> Result<((VertexId, usize), bool), Diagnostic> {
        let mut cur = name;
        let mut tainted = false;
        let mut hops = 0usize;
        loop {
            if self.branch_names.contains(cur) {
                tainted = true;
            }
            if let Some(&(v, p)) = self.sources.get(cur) {
                return Ok(((v, p), tainted));
            }
            match self.aliases.get(cur) {
                Some(next) => {
                    cur = next;
                    hops += 1;
                    if hops > self.aliases.len() + 1 {
                        return Err(Diagnostic::at(
                            line,
                            format!("circular DRCT wiring through {}", name),
                        ));
                    }
                }
                None => {
                    return Err(Diagnostic::at(
                        line,
                        format!("no producer for {}", cur),
                    ))
                }
            }
        }
    }

    fn resolve_pending(&mut self) -> Result<(), Diagnostic> {
        let pending = core::mem::take(&mut self.pending);
        for p in pending {
            let ((src, src_port), tainted) = self.resolve_source(&p.src_name, p.line)?;
            let from_branch_out = self.dfg.vertices[src]
                .kind
                .branch_out_start()
                .is_some_and(|start| src_port >= start);
            let kind = if p.kind == EdgeKind::Branch || tainted || from_branch_out {
                EdgeKind::Branch
            } else {
                EdgeKind::Main
            };
            self.dfg.add_edge(Edge {
                src,
                src_port,
                dst: p.dst,
                dst_port: p.dst_port,
                delay: 0,
                kind,
            });
        }
        Ok(())
    }

    /// Reject cycles whose total latency is zero: they are not realizable
    /// in hardware and cannot be evaluated cycle by cycle.
    fn check_zero_latency_cycles(&self) -> Result<(), Diagnostic> {
        let n = self.dfg.vertices.len();
        let zero = |v: VertexId| self.dfg.vertices[v].latency == 0;
        let mut indeg = alloc::vec![0usize; n];
        let mut adj: Vec<Vec<VertexId>> = alloc::vec![Vec::new(); n];
        for e in &self.dfg.edges {
            if e.delay == 0 && zero(e.src) && zero(e.dst) {
                adj[e.src].push(e.dst);
                indeg[e.dst] += 1;
            }
        }
        let mut queue: Vec<VertexId> = (0..n).filter(|&v| indeg[v] == 0 || !zero(v)).collect();
        let mut seen = alloc::vec![false; n];
        for &v in &queue {
            seen[v] = true;
        }
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for &w in &adj[v] {
                if !seen[w] {
                    indeg[w] -= 1;
                    if indeg[w] == 0 {
                        seen[w] = true;
                        queue.push(w);
                    }
                }
            }
        }
        let stuck: Vec<&str> = (0..n)
            .filter(|&v| !seen[v])
            .map(|v| self.dfg.vertices[v].label.as_str())
            .collect();
        if stuck.is_empty() {
            Ok(())
        } else {
            Err(Diagnostic::new(format!(
                "zero-latency cycle through: {}",
                stuck.join(", ")
            )))
        }
    }
}

//! Per-module name resolution checks.
//!
//! A module is well formed when every referenced port resolves to exactly
//! one value, every declared output port is driven exactly once, and no
//! other name is assigned more than once (static single assignment).
//! Value producers are main/branch input ports, constant registers, EQU
//! outputs, HDL outputs, and DRCT destinations that are not declared sinks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::*;
use crate::diag::Diagnostic;

/// Resolved name table for one module, reused by the elaborator.
pub struct NameTable {
    /// All canonical names ("IF::port" for interface ports, the written
    /// form for node outputs).
    defs: BTreeSet<String>,
    /// Bare name -> canonical names that end in it.
    by_bare: BTreeMap<String, BTreeSet<String>>,
    /// Declared sink ports (Main_Out / Brch_Out), canonical.
    sinks: BTreeSet<String>,
}

pub fn qualified(iface: &str, port: &str) -> String {
    format!("{}::{}", iface, port)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    One(String),
    None,
    Ambiguous,
}

impl NameTable {
    fn define(&mut self, canonical: String, bare: &str) {
        self.defs.insert(canonical.clone());
        self.by_bare
            .entry(String::from(bare))
            .or_default()
            .insert(canonical);
    }

    fn canonical_of(p: &PortRef) -> String {
        match &p.iface {
            Some(i) => qualified(i, &p.name),
            None => p.name.clone(),
        }
    }

    /// Resolve a reference to the canonical defined name.
    pub fn resolve(&self, p: &PortRef) -> Resolution {
        match &p.iface {
            Some(iface) => {
                let q = qualified(iface, &p.name);
                if self.defs.contains(&q) {
                    Resolution::One(q)
                } else {
                    Resolution::None
                }
            }
            None => {
                if self.defs.contains(&p.name) {
                    return Resolution::One(p.name.clone());
                }
                match self.by_bare.get(&p.name) {
                    Some(set) if set.len() == 1 => {
                        Resolution::One(set.iter().next().unwrap().clone())
                    }
                    Some(set) if set.len() > 1 => Resolution::Ambiguous,
                    _ => Resolution::None,
                }
            }
        }
    }

    pub fn is_sink(&self, canonical: &str) -> bool {
        self.sinks.contains(canonical)
    }

    pub fn sinks(&self) -> impl Iterator<Item = &String> {
        self.sinks.iter()
    }
}

/// Build the name table: interface ports first, then node outputs that do
/// not resolve to an already-declared name (assigning to a declared name
/// is a drive, not a fresh definition).
pub fn name_table(m: &SpdModule) -> NameTable {
    let mut t = NameTable {
        defs: BTreeSet::new(),
        by_bare: BTreeMap::new(),
        sinks: BTreeSet::new(),
    };
    for decl in m
        .main_in
        .iter()
        .chain(m.append_regs.iter())
        .chain(m.brch_in.iter())
    {
        for p in &decl.ports {
            t.define(qualified(&decl.if_name, p), p);
        }
    }
    for decl in m.main_out.iter().chain(m.brch_out.iter()) {
        for p in &decl.ports {
            let q = qualified(&decl.if_name, p);
            t.sinks.insert(q.clone());
            t.define(q, p);
        }
    }
    let fresh = |t: &mut NameTable, p: &PortRef| {
        if let Resolution::None = t.resolve(p) {
            t.define(NameTable::canonical_of(p), &p.name);
        }
    };
    for node in &m.nodes {
        match node {
            NodeDecl::Equ(n) => fresh(&mut t, &n.output),
            NodeDecl::Hdl(n) => {
                for p in n.main_outs.iter().chain(n.brch_outs.iter()) {
                    fresh(&mut t, p);
                }
            }
            NodeDecl::Drct(n) => {
                for p in &n.dsts {
                    fresh(&mut t, p);
                }
            }
        }
    }
    t
}

/// Validate one module. An empty result means the module is well formed.
pub fn validate(m: &SpdModule) -> Vec<Diagnostic> {
    let table = name_table(m);
    let mut diags = Vec::new();

    let check_ref = |p: &PortRef, line: u32, diags: &mut Vec<Diagnostic>| match table
        .resolve(p)
    {
        Resolution::One(_) => {}
        Resolution::None => diags.push(Diagnostic::at(line, format!("{} unresolved", p))),
        Resolution::Ambiguous => diags.push(Diagnostic::at(
            line,
            format!("{} is ambiguous (qualify with 'IF::')", p),
        )),
    };

    // Drive counting: input ports are implicitly driven by the stream.
    let mut driven: BTreeMap<String, u32> = BTreeMap::new();
    for decl in m
        .main_in
        .iter()
        .chain(m.append_regs.iter())
        .chain(m.brch_in.iter())
    {
        for p in &decl.ports {
            driven.insert(qualified(&decl.if_name, p), 1);
        }
    }

    let drive = |p: &PortRef, line: u32, driven: &mut BTreeMap<String, u32>,
                     diags: &mut Vec<Diagnostic>| {
        match table.resolve(p) {
            Resolution::One(c) => *driven.entry(c).or_insert(0) += 1,
            Resolution::Ambiguous => diags.push(Diagnostic::at(
                line,
                format!("assignment target {} is ambiguous", p),
            )),
            // Unreachable: unresolved targets were defined fresh.
            Resolution::None => {}
        }
    };

    for node in &m.nodes {
        match node {
            NodeDecl::Equ(n) => {
                for p in n.expr.ports() {
                    check_ref(p, n.line, &mut diags);
                }
                drive(&n.output, n.line, &mut driven, &mut diags);
            }
            NodeDecl::Hdl(n) => {
                for p in n.main_ins.iter().chain(n.brch_ins.iter()) {
                    check_ref(p, n.line, &mut diags);
                }
                for p in n.main_outs.iter().chain(n.brch_outs.iter()) {
                    drive(p, n.line, &mut driven, &mut diags);
                }
            }
            NodeDecl::Drct(n) => {
                for p in &n.srcs {
                    check_ref(p, n.line, &mut diags);
                }
                for p in &n.dsts {
                    drive(p, n.line, &mut driven, &mut diags);
                }
            }
        }
    }

    for sink in &table.sinks {
        match driven.get(sink).copied().unwrap_or(0) {
            0 => {
                let bare = sink.rsplit("::").next().unwrap_or(sink);
                diags.push(Diagnostic::new(format!("{} undriven", bare)));
            }
            1 => {}
            n => diags.push(Diagnostic::new(format!("{} driven {} times", sink, n))),
        }
    }
    for (name, count) in &driven {
        if *count > 1 && !table.sinks.contains(name) {
            diags.push(Diagnostic::new(format!("{} driven {} times", name, count)));
        }
    }

    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_module;

    const FIG_DEMO: &str = "\
Name core;
Main_In   {main_i::x1,x2,x3,x4};
Main_Out  {main_o::z1,z2};
Brch_In   {brch_i::bin1};
Brch_Out  {brch_o::bout1};
Param     c = 123.456;
EQU Node1, t1 = x1 * x2;
EQU Node2, t2 = x3 + x4;
EQU Node3, z1 = t1 - t2 * bin1;
EQU Node4, z2 = t1 / t2 + c;
DRCT (bout1) = (t2);
";

    #[test]
    fn complete_core_is_clean() {
        let m = parse_module(FIG_DEMO).unwrap();
        assert_eq!(validate(&m), alloc::vec![]);
    }

    #[test]
    fn undriven_output_reported() {
        let src = FIG_DEMO.replace("DRCT (bout1) = (t2);\n", "");
        let m = parse_module(&src).unwrap();
        let diags = validate(&m);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].message, "bout1 undriven");
    }

    #[test]
    fn unresolved_port_reported() {
        let src = FIG_DEMO.replace("t2 * bin1", "t2 * q9");
        let m = parse_module(&src).unwrap();
        let diags = validate(&m);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("q9 unresolved"));
    }

    #[test]
    fn double_drive_reported() {
        let src = alloc::format!("{}EQU Node5, t2 = x1 + x1;\n", FIG_DEMO);
        let m = parse_module(&src).unwrap();
        let diags = validate(&m);
        assert!(diags.iter().any(|d| d.message.contains("t2 driven 2 times")));
    }

    #[test]
    fn driving_an_input_port_reported() {
        let src = alloc::format!("{}EQU Node5, x1 = t1 + t1;\n", FIG_DEMO);
        let m = parse_module(&src).unwrap();
        let diags = validate(&m);
        assert!(diags
            .iter()
            .any(|d| d.message.contains("main_i::x1 driven 2 times")));
    }

    #[test]
    fn forward_references_are_legal() {
        let src = "\
Name fwd;
Main_In {Mi::a};
Main_Out {Mo::z};
EQU n2, z = t + a;
EQU n1, t = a * 2.0;
";
        let m = parse_module(src).unwrap();
        assert_eq!(validate(&m), alloc::vec![]);
    }

    #[test]
    fn ambiguous_bare_reference() {
        let src = "\
Name amb;
Main_In {Mi::x, sop};
Brch_In {Bi::sop};
Main_Out {Mo::z};
EQU n, z = sop + x;
";
        let m = parse_module(src).unwrap();
        let diags = validate(&m);
        assert!(diags.iter().any(|d| d.message.contains("ambiguous")));
    }

    #[test]
    fn qualified_duplicate_port_names_coexist() {
        // sop exists on both interfaces; qualified access keeps it legal.
        let src = "\
Name q;
Main_In {Mi::x, sop};
Main_Out {Mo::z, sop};
EQU n, z = x * 2.0;
DRCT (Mo::sop) = (Mi::sop);
";
        let m = parse_module(src).unwrap();
        assert_eq!(validate(&m), alloc::vec![]);
    }
}

//! Canonical printing of parsed modules.
//!
//! The printer is the inverse of the parser up to structural equality:
//! `parse(print(parse(s))) == parse(s)` for every valid source. Parameters
//! already substituted into formulae are re-emitted as `Param` lines so the
//! reparsed module carries the same table.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::*;

pub fn print_module(m: &SpdModule) -> String {
    let mut out = String::new();
    out.push_str(&format!("Name       {};\n", m.name));
    if let Some(i) = &m.main_in {
        print_interface(&mut out, "Main_In", i);
    }
    if let Some(i) = &m.main_out {
        print_interface(&mut out, "Main_Out", i);
    }
    for i in &m.brch_in {
        print_interface(&mut out, "Brch_In", i);
    }
    for i in &m.brch_out {
        print_interface(&mut out, "Brch_Out", i);
    }
    for i in &m.append_regs {
        print_interface(&mut out, "Append_Reg", i);
    }
    for (name, value) in &m.params {
        out.push_str(&format!("Param      {} = {:?};\n", name, value));
    }
    for node in &m.nodes {
        match node {
            NodeDecl::Equ(n) => {
                out.push_str(&format!(
                    "EQU        {}, {} = {};\n",
                    n.name,
                    n.output,
                    print_expr(&n.expr)
                ));
            }
            NodeDecl::Hdl(n) => {
                out.push_str(&format!("HDL        {}, {}, ", n.name, n.delay));
                out.push_str(&port_list(&n.main_outs));
                if !n.brch_outs.is_empty() {
                    out.push(' ');
                    out.push_str(&port_list(&n.brch_outs));
                }
                out.push_str(&format!(" = {}", n.module));
                out.push_str(&port_list(&n.main_ins));
                if !n.brch_ins.is_empty() {
                    out.push(' ');
                    out.push_str(&port_list(&n.brch_ins));
                }
                for p in &n.params {
                    out.push_str(&format!(", {}", p));
                }
                out.push_str(";\n");
            }
            NodeDecl::Drct(n) => {
                out.push_str(&format!(
                    "DRCT       {} = {};\n",
                    port_list(&n.dsts),
                    port_list(&n.srcs)
                ));
            }
        }
    }
    out
}

fn print_interface(out: &mut String, keyword: &str, i: &InterfaceDecl) {
    out.push_str(&format!(
        "{:<10} {{{}::{}}};\n",
        keyword,
        i.if_name,
        i.ports.join(",")
    ));
}

fn port_list(ports: &[PortRef]) -> String {
    let items: Vec<String> = ports.iter().map(|p| format!("{}", p)).collect();
    format!("({})", items.join(","))
}

/// Render a formula with minimal parentheses.
pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    render(e, 0, &mut s);
    s
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        _ => 3,
    }
}

fn render(e: &Expr, min_prec: u8, out: &mut String) {
    let prec = precedence(e);
    let need_parens = prec < min_prec;
    if need_parens {
        out.push('(');
    }
    match e {
        Expr::Literal(v) => out.push_str(&format!("{:?}", v)),
        Expr::Port(p) => out.push_str(&format!("{}", p)),
        Expr::Binary(op, l, r) => {
            render(l, prec, out);
            out.push_str(&format!(" {} ", op.symbol()));
            // Left associativity: the right operand needs strictly higher
            // binding to print without parentheses.
            render(r, prec + 1, out);
        }
        Expr::Sqrt(inner) => {
            out.push_str("sqrt(");
            render(inner, 0, out);
            out.push(')');
        }
    }
    if need_parens {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_module};

    #[test]
    fn expr_round_trip_minimal_parens() {
        for src in [
            "t1 - t2 * bin1",
            "t1 / t2 + 123.456",
            "a - (b + c)",
            "(a + b) * c",
            "a - b - c",
            "a / (b / c)",
            "sqrt(a + b) * 2.0",
            "a * -2.5",
        ] {
            let e = parse_expr(src).unwrap();
            let printed = print_expr(&e);
            let reparsed = parse_expr(&printed).unwrap();
            assert_eq!(e, reparsed, "{} -> {}", src, printed);
        }
    }

    #[test]
    fn module_round_trip() {
        let src = "\
Name core; # demo
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
        let m1 = parse_module(src).unwrap();
        let m2 = parse_module(&print_module(&m1)).unwrap();
        assert_eq!(m1, m2);
        // Idempotence of print itself.
        assert_eq!(print_module(&m1), print_module(&m2));
    }
}

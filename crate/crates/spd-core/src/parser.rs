//! Statement and expression parser for SPD sources.
//!
//! Grammar summary (whitespace and newlines are insignificant, every
//! statement ends with `;`):
//!
//! ```text
//! Name       <ident> ;
//! Main_In    { <IF>::p1, p2, ... } ;
//! Main_Out   { <IF>::p1, p2, ... } ;
//! Brch_In    { <IF>::p1, ... } ;
//! Brch_Out   { <IF>::p1, ... } ;
//! Append_Reg { <IF>::p1, ... } ;
//! EQU  <node>, <port> = <formula> ;
//! HDL  <node>, <delay>, (outs) [(bouts)] = <module>(ins) [(bins)] [, params] ;
//! DRCT (dsts) = (srcs) ;
//! ```
//!
//! Formulae use `+ - * /`, parentheses, and `sqrt()`, with the usual
//! precedence and left associativity.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::*;
use crate::diag::Diagnostic;
use crate::lexer::{lex, SpannedTok, Tok};
use crate::preprocess::preprocess_full;

const MAX_EXPR_DEPTH: u32 = 200;

/// Parse one SPD compilation unit (preprocessing included).
pub fn parse_module(source: &str) -> Result<SpdModule, Diagnostic> {
    let pre = preprocess_full(source)?;
    let toks = lex(&pre.text)?;
    let mut p = Parser::new(&toks);
    let mut module = p.module()?;
    module.params = pre.params;
    Ok(module)
}

/// Parse a formula in isolation (text must already be preprocessed).
pub fn parse_expr(text: &str) -> Result<Expr, Diagnostic> {
    let toks = lex(text)?;
    let mut p = Parser::new(&toks);
    let expr = p.expr(0)?;
    if let Some((tok, line)) = p.peek_spanned() {
        return Err(Diagnostic::at(
            line,
            format!("unexpected {} after expression", tok.describe()),
        ));
    }
    Ok(expr)
}

struct Parser<'t> {
    toks: &'t [SpannedTok],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn new(toks: &'t [SpannedTok]) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_spanned(&self) -> Option<(&Tok, u32)> {
        self.toks.get(self.pos).map(|(t, l)| (t, *l))
    }

    fn line(&self) -> u32 {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|&(_, l)| l)
            .unwrap_or(1)
    }

    fn bump(&mut self) -> Option<&'t Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t);
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::at(self.line(), msg)
    }

    fn expect(&mut self, want: &Tok) -> Result<(), Diagnostic> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected {}, found {}", want.describe(), t.describe()))),
            None => Err(self.err(format!("expected {}, found end of input", want.describe()))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, Diagnostic> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => Err(self.err(format!("expected {}, found {}", what, t.describe()))),
            None => Err(self.err(format!("expected {}, found end of input", what))),
        }
    }

    /// `ident` or `ident::ident`.
    fn port_ref(&mut self) -> Result<PortRef, Diagnostic> {
        let first = self.ident("port name")?;
        if self.peek() == Some(&Tok::ColonColon) {
            self.pos += 1;
            let name = self.ident("port name after '::'")?;
            Ok(PortRef::qualified(first, name))
        } else {
            Ok(PortRef::bare(first))
        }
    }

    fn module(&mut self) -> Result<SpdModule, Diagnostic> {
        let mut m = SpdModule::default();
        let mut saw_name = false;
        while self.peek().is_some() {
            self.statement(&mut m, &mut saw_name)?;
        }
        if !saw_name {
            return Err(Diagnostic::new("module has no 'Name' declaration"));
        }
        Ok(m)
    }

    fn statement(&mut self, m: &mut SpdModule, saw_name: &mut bool) -> Result<(), Diagnostic> {
        let line = self.line();
        let keyword = self.ident("statement keyword")?;
        match keyword.as_str() {
            "Name" => {
                if *saw_name {
                    return Err(Diagnostic::at(line, "duplicate 'Name' declaration"));
                }
                m.name = self.ident("core name")?;
                *saw_name = true;
                self.expect(&Tok::Semi)
            }
            "Main_In" => {
                let decl = self.interface_decl(line)?;
                if m.main_in.is_some() {
                    return Err(Diagnostic::at(line, "duplicate 'Main_In' declaration"));
                }
                m.main_in = Some(decl);
                Ok(())
            }
            "Main_Out" => {
                let decl = self.interface_decl(line)?;
                if m.main_out.is_some() {
                    return Err(Diagnostic::at(line, "duplicate 'Main_Out' declaration"));
                }
                m.main_out = Some(decl);
                Ok(())
            }
            "Brch_In" => {
                let decl = self.interface_decl(line)?;
                m.brch_in.push(decl);
                Ok(())
            }
            "Brch_Out" => {
                let decl = self.interface_decl(line)?;
                m.brch_out.push(decl);
                Ok(())
            }
            "Append_Reg" => {
                let decl = self.interface_decl(line)?;
                m.append_regs.push(decl);
                Ok(())
            }
            "EQU" => self.equ_node(m, line),
            "HDL" => self.hdl_node(m, line),
            "DRCT" => self.drct_link(m, line),
            "Param" => Err(Diagnostic::at(
                line,
                "'Param' must appear as a whole statement (consumed by the preprocessor)",
            )),
            other => Err(Diagnostic::at(
                line,
                format!("unknown function keyword '{}'", other),
            )),
        }
    }

    /// `{ IF::p1, p2, ... } ;`
    fn interface_decl(&mut self, line: u32) -> Result<InterfaceDecl, Diagnostic> {
        self.expect(&Tok::LBrace)?;
        let if_name = self.ident("interface name")?;
        self.expect(&Tok::ColonColon)?;
        let mut ports = Vec::new();
        loop {
            ports.push(self.ident("port name")?);
            match self.peek() {
                Some(Tok::Comma) => {
                    self.pos += 1;
                }
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(t) => {
                    return Err(self.err(format!(
                        "expected ',' or '}}' in interface port list, found {}",
                        t.describe()
                    )))
                }
                None => return Err(self.err("unterminated interface port list")),
            }
        }
        self.expect(&Tok::Semi)?;
        Ok(InterfaceDecl {
            if_name,
            ports,
            line,
        })
    }

    fn check_node_name(&self, m: &SpdModule, name: &str, line: u32) -> Result<(), Diagnostic> {
        if m.nodes.iter().any(|n| n.name() == Some(name)) {
            return Err(Diagnostic::at(
                line,
                format!("duplicate node name '{}'", name),
            ));
        }
        Ok(())
    }

    /// `EQU <node>, <port> = <formula> ;`
    fn equ_node(&mut self, m: &mut SpdModule, line: u32) -> Result<(), Diagnostic> {
        let name = self.ident("node name")?;
        self.check_node_name(m, &name, line)?;
        self.expect(&Tok::Comma)?;
        let output = self.port_ref()?;
        if self.peek() == Some(&Tok::Comma) {
            return Err(self.err("EQU assigns exactly one output port"));
        }
        self.expect(&Tok::Eq)?;
        let expr = self.expr(0)?;
        match self.peek() {
            Some(Tok::Semi) => {
                self.pos += 1;
            }
            Some(Tok::Eq) => return Err(self.err("EQU allows a single assignment")),
            Some(t) => {
                return Err(self.err(format!("expected ';' after formula, found {}", t.describe())))
            }
            None => return Err(self.err("expected ';' after formula, found end of input")),
        }
        m.nodes.push(NodeDecl::Equ(EquNode {
            name,
            output,
            expr,
            line,
        }));
        Ok(())
    }

    /// `( p1, p2, ... )` — possibly empty.
    fn paren_port_list(&mut self) -> Result<Vec<PortRef>, Diagnostic> {
        self.expect(&Tok::LParen)?;
        let mut ports = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(ports);
        }
        loop {
            ports.push(self.port_ref()?);
            match self.peek() {
                Some(Tok::Comma) => {
                    self.pos += 1;
                }
                Some(Tok::RParen) => {
                    self.pos += 1;
                    break;
                }
                Some(t) => {
                    return Err(self.err(format!(
                        "expected ',' or ')' in port list, found {}",
                        t.describe()
                    )))
                }
                None => return Err(self.err("unterminated port list")),
            }
        }
        Ok(ports)
    }

    fn number_u64(&mut self, what: &str) -> Result<u64, Diagnostic> {
        match self.peek() {
            Some(Tok::Number(s)) => {
                let v = s
                    .parse::<u64>()
                    .map_err(|_| self.err(format!("{} must be a non-negative integer", what)))?;
                self.pos += 1;
                Ok(v)
            }
            Some(t) => Err(self.err(format!("expected {}, found {}", what, t.describe()))),
            None => Err(self.err(format!("expected {}, found end of input", what))),
        }
    }

    fn param_value(&mut self) -> Result<ParamValue, Diagnostic> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.bump() {
            Some(Tok::Number(s)) => {
                if s.contains('.') || s.contains('e') {
                    let v: f32 = s
                        .parse()
                        .map_err(|_| self.err(format!("invalid number '{}'", s)))?;
                    Ok(ParamValue::Float(if neg { -v } else { v }))
                } else {
                    let v: i64 = s
                        .parse()
                        .map_err(|_| self.err(format!("invalid integer '{}'", s)))?;
                    Ok(ParamValue::Int(if neg { -v } else { v }))
                }
            }
            Some(Tok::Ident(s)) if !neg => Ok(ParamValue::Ident(s.clone())),
            Some(t) => Err(self.err(format!("invalid parameter value {}", t.describe()))),
            None => Err(self.err("expected parameter value, found end of input")),
        }
    }

    /// `HDL <node>, <delay>, (outs) [(bouts)] = <module>(ins) [(bins)] [, params] ;`
    fn hdl_node(&mut self, m: &mut SpdModule, line: u32) -> Result<(), Diagnostic> {
        let name = self.ident("node name")?;
        self.check_node_name(m, &name, line)?;
        self.expect(&Tok::Comma)?;
        let delay = self.number_u64("pipeline delay")?;
        self.expect(&Tok::Comma)?;
        let main_outs = self.paren_port_list()?;
        let brch_outs = if self.peek() == Some(&Tok::LParen) {
            self.paren_port_list()?
        } else {
            Vec::new()
        };
        self.expect(&Tok::Eq)?;
        let module = self.ident("module name")?;
        let main_ins = self.paren_port_list()?;
        let brch_ins = if self.peek() == Some(&Tok::LParen) {
            self.paren_port_list()?
        } else {
            Vec::new()
        };
        let mut params = Vec::new();
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            params.push(self.param_value()?);
        }
        self.expect(&Tok::Semi)?;
        m.nodes.push(NodeDecl::Hdl(HdlNode {
            name,
            delay,
            module,
            main_outs,
            brch_outs,
            main_ins,
            brch_ins,
            params,
            line,
        }));
        Ok(())
    }

    /// `DRCT (dsts) = (srcs) ;`
    fn drct_link(&mut self, m: &mut SpdModule, line: u32) -> Result<(), Diagnostic> {
        let dsts = self.paren_port_list()?;
        self.expect(&Tok::Eq)?;
        let srcs = self.paren_port_list()?;
        self.expect(&Tok::Semi)?;
        if dsts.len() != srcs.len() {
            return Err(Diagnostic::at(
                line,
                format!(
                    "DRCT connects {} destinations to {} sources",
                    dsts.len(),
                    srcs.len()
                ),
            ));
        }
        if dsts.is_empty() {
            return Err(Diagnostic::at(line, "DRCT port lists are empty"));
        }
        m.nodes.push(NodeDecl::Drct(DrctLink { dsts, srcs, line }));
        Ok(())
    }

    // -- Expressions ------------------------------------------------------

    fn expr(&mut self, depth: u32) -> Result<Expr, Diagnostic> {
        if depth > MAX_EXPR_DEPTH {
            return Err(self.err("formula nesting too deep"));
        }
        let mut lhs = self.term(depth + 1)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term(depth + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self, depth: u32) -> Result<Expr, Diagnostic> {
        let mut lhs = self.factor(depth + 1)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor(depth + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn literal(&mut self, text: &str, negative: bool) -> Result<Expr, Diagnostic> {
        let v: f32 = text
            .parse()
            .map_err(|_| self.err(format!("invalid number '{}'", text)))?;
        if !v.is_finite() {
            return Err(self.err(format!("literal '{}' out of single-precision range", text)));
        }
        Ok(Expr::Literal(if negative { -v } else { v }))
    }

    fn factor(&mut self, depth: u32) -> Result<Expr, Diagnostic> {
        if depth > MAX_EXPR_DEPTH {
            return Err(self.err("formula nesting too deep"));
        }
        match self.peek() {
            Some(Tok::Number(_)) => {
                let s = match self.bump() {
                    Some(Tok::Number(s)) => s.clone(),
                    _ => unreachable!(),
                };
                self.literal(&s, false)
            }
            Some(Tok::Minus) => {
                // A sign is only accepted on a numeric literal, so Param
                // substitution of negative constants parses.
                self.pos += 1;
                match self.peek() {
                    Some(Tok::Number(_)) => {
                        let s = match self.bump() {
                            Some(Tok::Number(s)) => s.clone(),
                            _ => unreachable!(),
                        };
                        self.literal(&s, true)
                    }
                    _ => Err(self.err("'-' must be followed by a numeric literal here")),
                }
            }
            Some(Tok::Ident(s)) if s == "sqrt" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let inner = self.expr(depth + 1)?;
                self.expect(&Tok::RParen)?;
                Ok(Expr::Sqrt(Box::new(inner)))
            }
            Some(Tok::Ident(_)) => {
                let p = self.port_ref()?;
                if self.peek() == Some(&Tok::LParen) {
                    return Err(self.err(format!(
                        "unknown function '{}' (only sqrt is available)",
                        p
                    )));
                }
                Ok(Expr::Port(p))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr(depth + 1)?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Some(t) => Err(self.err(format!("expected operand, found {}", t.describe()))),
            None => Err(self.err("expected operand, found end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn port(name: &str) -> Expr {
        Expr::Port(PortRef::bare(name))
    }

    #[test]
    fn expr_precedence() {
        // t1 - t2 * bin1 == Sub(t1, Mul(t2, bin1))
        let e = parse_expr("t1 - t2 * bin1").unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Sub,
                Box::new(port("t1")),
                Box::new(Expr::Binary(
                    BinOp::Mul,
                    Box::new(port("t2")),
                    Box::new(port("bin1"))
                ))
            )
        );
    }

    #[test]
    fn expr_div_binds_before_add() {
        let e = parse_expr("t1 / t2 + 123.456").unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Binary(
                    BinOp::Div,
                    Box::new(port("t1")),
                    Box::new(port("t2"))
                )),
                Box::new(Expr::Literal(123.456)),
            )
        );
    }

    #[test]
    fn expr_sqrt() {
        let e = parse_expr("sqrt(in4)").unwrap();
        assert_eq!(e, Expr::Sqrt(Box::new(port("in4"))));
    }

    #[test]
    fn expr_left_associative() {
        let e = parse_expr("a - b - c").unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Sub,
                Box::new(Expr::Binary(
                    BinOp::Sub,
                    Box::new(port("a")),
                    Box::new(port("b"))
                )),
                Box::new(port("c")),
            )
        );
    }

    #[test]
    fn expr_errors() {
        assert!(parse_expr("(a + b").is_err());
        assert!(parse_expr("foo(a)").is_err());
        assert!(parse_expr("a +").is_err());
        assert!(parse_expr("a b").is_err());
    }

    #[test]
    fn expr_negative_literal() {
        let e = parse_expr("a * -2.5").unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Mul,
                Box::new(port("a")),
                Box::new(Expr::Literal(-2.5))
            )
        );
        assert!(parse_expr("-a").is_err());
    }

    #[test]
    fn minimal_module() {
        let m = parse_module("Name x;").unwrap();
        assert_eq!(m.name, "x");
        assert!(m.main_in.is_none());
        assert!(m.nodes.is_empty());
    }

    #[test]
    fn unknown_keyword() {
        let err = parse_module("Name x;\nBogus y;").unwrap_err();
        assert!(err.message.contains("unknown function keyword"));
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn duplicate_node_name_rejected() {
        let src = "Name x;\nEQU n, a = 1.0;\nEQU n, b = 2.0;";
        let err = parse_module(src).unwrap_err();
        assert!(err.message.contains("duplicate node name"));
    }

    #[test]
    fn equ_multiple_assignment_rejected() {
        let err = parse_module("Name x;\nEQU n, a = b = c;").unwrap_err();
        assert!(err.message.contains("single assignment"));
        let err = parse_module("Name x;\nEQU n, a, b = c;").unwrap_err();
        assert!(err.message.contains("exactly one output"));
    }

    #[test]
    fn trailing_garbage_rejected() {
        assert!(parse_module("Name x; stray").is_err());
        assert!(parse_module("Name x").is_err());
    }

    #[test]
    fn hdl_with_branches_and_params() {
        let src = "Name a;\nHDL n, 14, (t1,t2) (b_a) = core(i1,i2,i3,i4) (b_b), 256, -3, lt;";
        let m = parse_module(src).unwrap();
        match &m.nodes[0] {
            NodeDecl::Hdl(h) => {
                assert_eq!(h.delay, 14);
                assert_eq!(h.module, "core");
                assert_eq!(h.main_outs.len(), 2);
                assert_eq!(h.brch_outs, vec![PortRef::bare("b_a")]);
                assert_eq!(h.brch_ins, vec![PortRef::bare("b_b")]);
                assert_eq!(
                    h.params,
                    vec![
                        ParamValue::Int(256),
                        ParamValue::Int(-3),
                        ParamValue::Ident("lt".into())
                    ]
                );
            }
            other => panic!("expected HDL node, got {:?}", other),
        }
    }

    #[test]
    fn hdl_empty_branch_group() {
        let src = "Name a;\nHDL n, 40, (o1) = Boundary(i1)();";
        let m = parse_module(src).unwrap();
        match &m.nodes[0] {
            NodeDecl::Hdl(h) => assert!(h.brch_ins.is_empty()),
            _ => panic!(),
        }
    }

    #[test]
    fn drct_length_mismatch() {
        let err = parse_module("Name a;\nDRCT (x, y) = (z);").unwrap_err();
        assert!(err.message.contains("2 destinations to 1 sources"));
    }

    #[test]
    fn qualified_ports() {
        let src = "Name a;\nMain_In {Mi::x, sop};\nMain_Out {Mo::z, sop};\nDRCT (Mo::sop, z) = (Mi::sop, x);";
        let m = parse_module(src).unwrap();
        match &m.nodes[0] {
            NodeDecl::Drct(d) => {
                assert_eq!(d.dsts[0], PortRef::qualified("Mo", "sop"));
                assert_eq!(d.srcs[0], PortRef::qualified("Mi", "sop"));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn statements_span_lines() {
        let src = "Name a;\nMain_In\n  {Mi::x1,\n   x2};\nEQU n, z =\n  x1 + x2;\nMain_Out {Mo::z};";
        let m = parse_module(src).unwrap();
        assert_eq!(m.main_in.as_ref().unwrap().ports.len(), 2);
        assert_eq!(m.nodes.len(), 1);
    }
}

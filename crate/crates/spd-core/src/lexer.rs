//! Tokenizer for preprocessed SPD text.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Raw number text; numeric interpretation happens at parse time.
    Number(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    ColonColon,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{}'", s),
            Tok::Number(s) => format!("number '{}'", s),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Semi => "';'".into(),
            Tok::Eq => "'='".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::ColonColon => "'::'".into(),
        }
    }
}

/// A token and the 1-based source line it starts on.
pub type SpannedTok = (Tok, u32);

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokenize `text`. Numbers are plain decimals with an optional fraction
/// and optional exponent (`123`, `0.18`, `1e-7`); a leading sign is a
/// separate `-` token resolved by the parser.
pub fn lex(text: &str) -> Result<Vec<SpannedTok>, Diagnostic> {
    let mut toks = Vec::new();
    let mut line = 1u32;
    let mut chars = text.char_indices().peekable();

    while let Some(&(_, c)) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '{' => {
                toks.push((Tok::LBrace, line));
                chars.next();
            }
            '}' => {
                toks.push((Tok::RBrace, line));
                chars.next();
            }
            '(' => {
                toks.push((Tok::LParen, line));
                chars.next();
            }
            ')' => {
                toks.push((Tok::RParen, line));
                chars.next();
            }
            ',' => {
                toks.push((Tok::Comma, line));
                chars.next();
            }
            ';' => {
                toks.push((Tok::Semi, line));
                chars.next();
            }
            '=' => {
                toks.push((Tok::Eq, line));
                chars.next();
            }
            '+' => {
                toks.push((Tok::Plus, line));
                chars.next();
            }
            '-' => {
                toks.push((Tok::Minus, line));
                chars.next();
            }
            '*' => {
                toks.push((Tok::Star, line));
                chars.next();
            }
            '/' => {
                toks.push((Tok::Slash, line));
                chars.next();
            }
            ':' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, ':')) => {
                        chars.next();
                        toks.push((Tok::ColonColon, line));
                    }
                    _ => return Err(Diagnostic::at(line, "expected '::'")),
                }
            }
            c if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if is_ident_continue(c) {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), line));
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if let Some(&(_, '.')) = chars.peek() {
                    s.push('.');
                    chars.next();
                    let mut any = false;
                    while let Some(&(_, c)) = chars.peek() {
                        if c.is_ascii_digit() {
                            s.push(c);
                            chars.next();
                            any = true;
                        } else {
                            break;
                        }
                    }
                    if !any {
                        return Err(Diagnostic::at(line, format!("malformed number '{}.'", s)));
                    }
                }
                if let Some(&(_, e)) = chars.peek() {
                    if e == 'e' || e == 'E' {
                        s.push('e');
                        chars.next();
                        if let Some(&(_, sign)) = chars.peek() {
                            if sign == '+' || sign == '-' {
                                s.push(sign);
                                chars.next();
                            }
                        }
                        let mut any = false;
                        while let Some(&(_, c)) = chars.peek() {
                            if c.is_ascii_digit() {
                                s.push(c);
                                chars.next();
                                any = true;
                            } else {
                                break;
                            }
                        }
                        if !any {
                            return Err(Diagnostic::at(
                                line,
                                format!("malformed exponent in '{}'", s),
                            ));
                        }
                    }
                }
                toks.push((Tok::Number(s), line));
            }
            other => {
                return Err(Diagnostic::at(
                    line,
                    format!("unexpected character '{}'", other),
                ))
            }
        }
    }
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_statement() {
        let toks = lex("EQU Node1, t1 = x1 * x2;").unwrap();
        assert_eq!(toks.len(), 9);
        assert_eq!(toks[0].0, Tok::Ident("EQU".into()));
        assert_eq!(toks[5].0, Tok::Ident("x1".into()));
        assert_eq!(toks[8].0, Tok::Semi);
    }

    #[test]
    fn lexes_qualified_port_and_number() {
        let toks = lex("Mi::sop 123.456").unwrap();
        assert_eq!(
            toks.iter().map(|(t, _)| t.clone()).collect::<Vec<_>>(),
            alloc::vec![
                Tok::Ident("Mi".into()),
                Tok::ColonColon,
                Tok::Ident("sop".into()),
                Tok::Number("123.456".into()),
            ]
        );
    }

    #[test]
    fn tracks_lines() {
        let toks = lex("a\nb\n\nc").unwrap();
        let lines: Vec<u32> = toks.iter().map(|&(_, l)| l).collect();
        assert_eq!(lines, alloc::vec![1, 2, 4]);
    }

    #[test]
    fn rejects_single_colon() {
        assert!(lex("a : b").is_err());
    }

    #[test]
    fn rejects_trailing_dot() {
        assert!(lex("1.").is_err());
    }
}

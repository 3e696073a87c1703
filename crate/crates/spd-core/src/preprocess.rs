//! Textual preprocessing: comment stripping and `Param` substitution.
//!
//! `#` starts a comment running to end of line. `Param name = value;`
//! statements are consumed; every later whole-identifier occurrence of
//! `name` inside an EQU formula is replaced by the literal text of
//! `value`. Newlines are preserved so diagnostics keep their lines.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diag::Diagnostic;

pub struct PreprocessOutput {
    pub text: String,
    /// Parameter name -> literal value (single precision).
    pub params: BTreeMap<String, f32>,
}

/// Strip comments and apply `Param` substitution, returning only the text.
pub fn preprocess(source: &str) -> Result<String, Diagnostic> {
    preprocess_full(source).map(|o| o.text)
}

/// Full preprocessing, also returning the consumed parameter table.
pub fn preprocess_full(source: &str) -> Result<PreprocessOutput, Diagnostic> {
    let stripped = strip_comments(source);
    substitute_params(&stripped)
}

fn strip_comments(source: &str) -> String {
    let mut out = String::with_capacity(source.len());
    for (i, line) in source.split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match line.find('#') {
            Some(pos) => out.push_str(line[..pos].trim_end()),
            None => out.push_str(line),
        }
    }
    out
}

/// One `;`-terminated statement span, possibly spanning lines.
struct Stmt<'a> {
    text: &'a str,
    line: u32,
    terminated: bool,
}

fn split_statements(text: &str) -> Vec<Stmt<'_>> {
    let mut stmts = Vec::new();
    let mut start = 0usize;
    let mut line = 1u32;
    let mut stmt_line = 1u32;
    let mut seen_content = false;
    for (i, c) in text.char_indices() {
        if c == '\n' {
            line += 1;
        }
        if !seen_content && !c.is_whitespace() {
            seen_content = true;
            stmt_line = line;
        }
        if c == ';' {
            stmts.push(Stmt {
                text: &text[start..=i],
                line: stmt_line,
                terminated: true,
            });
            start = i + 1;
            seen_content = false;
        }
    }
    if start < text.len() {
        stmts.push(Stmt {
            text: &text[start..],
            line: stmt_line,
            terminated: false,
        });
    }
    stmts
}

fn first_word(text: &str) -> Option<&str> {
    let t = text.trim_start();
    let end = t
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(t.len());
    if end == 0 {
        None
    } else {
        Some(&t[..end])
    }
}

/// Replace whole-identifier occurrences of keys in `params` by their
/// literal text.
fn replace_idents(text: &str, params: &BTreeMap<String, String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut it = text.char_indices().peekable();
    while let Some(&(start, c)) = it.peek() {
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start;
            while let Some(&(i, c)) = it.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    end = i + c.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            let ident = &text[start..end];
            match params.get(ident) {
                Some(value) => out.push_str(value),
                None => out.push_str(ident),
            }
        } else {
            out.push(c);
            it.next();
        }
    }
    out
}

fn newlines_of(text: &str) -> String {
    text.chars().filter(|&c| c == '\n').collect()
}

fn substitute_params(text: &str) -> Result<PreprocessOutput, Diagnostic> {
    let mut raw: BTreeMap<String, String> = BTreeMap::new();
    let mut parsed: BTreeMap<String, f32> = BTreeMap::new();
    let mut out = String::with_capacity(text.len());

    for stmt in split_statements(text) {
        match first_word(stmt.text) {
            Some("Param") => {
                if !stmt.terminated {
                    return Err(Diagnostic::at(stmt.line, "Param statement missing ';'"));
                }
                let body = stmt.text.trim().trim_end_matches(';');
                let rest = body.trim_start()["Param".len()..].trim();
                let (name, value) = match rest.split_once('=') {
                    Some((n, v)) => (n.trim(), v.trim()),
                    None => {
                        return Err(Diagnostic::at(stmt.line, "Param requires 'name = value'"))
                    }
                };
                if name.is_empty()
                    || !name
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    return Err(Diagnostic::at(
                        stmt.line,
                        format!("invalid parameter name '{}'", name),
                    ));
                }
                let num: f32 = value.parse().map_err(|_| {
                    Diagnostic::at(stmt.line, format!("invalid parameter value '{}'", value))
                })?;
                if raw.contains_key(name) {
                    return Err(Diagnostic::at(
                        stmt.line,
                        format!("duplicate parameter '{}'", name),
                    ));
                }
                raw.insert(name.to_string(), value.to_string());
                parsed.insert(name.to_string(), num);
                // Keep the line structure, drop the statement text.
                out.push_str(&newlines_of(stmt.text));
            }
            Some("EQU") if !raw.is_empty() => {
                // Substitute only in the formula (after the first '=').
                match stmt.text.split_once('=') {
                    Some((head, formula)) => {
                        out.push_str(head);
                        out.push('=');
                        out.push_str(&replace_idents(formula, &raw));
                    }
                    None => out.push_str(stmt.text),
                }
            }
            _ => out.push_str(stmt.text),
        }
    }

    Ok(PreprocessOutput {
        text: out,
        params: parsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitutes_param_in_formula() {
        let src = "Param c = 123.456;\nEQU Node4, z = x + c # add\n;";
        let out = preprocess(src).unwrap();
        assert!(out.contains("z = x + 123.456"));
        assert!(!out.contains("Param"));
        assert!(!out.contains('#'));
    }

    #[test]
    fn whole_line_comment_becomes_empty_line() {
        assert_eq!(preprocess("# only comment").unwrap(), "");
        assert_eq!(preprocess("# c1\nName x;").unwrap(), "\nName x;");
    }

    #[test]
    fn identity_without_comments_or_params() {
        let src = "Name core;\nMain_In {m::a,b};\nEQU n, z = a + b;\n";
        assert_eq!(preprocess(src).unwrap(), src);
    }

    #[test]
    fn duplicate_param_rejected() {
        let src = "Param c = 1.0;\nParam c = 2.0;";
        let err = preprocess(src).unwrap_err();
        assert!(err.message.contains("duplicate parameter"));
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn whole_identifier_matching_only() {
        let src = "Param c = 9.0;\nEQU n, z = cc + c + c2;";
        let out = preprocess(src).unwrap();
        assert!(out.contains("z = cc + 9.0 + c2"));
    }

    #[test]
    fn param_after_use_is_not_substituted() {
        let src = "EQU n, z = c + 1.0;\nParam c = 9.0;";
        let out = preprocess(src).unwrap();
        assert!(out.contains("z = c + 1.0"));
    }

    #[test]
    fn preserves_line_count() {
        let src = "Param c = 1.5; # x\nEQU n, z =\n  c + q;\n";
        let out = preprocess(src).unwrap();
        assert_eq!(
            src.chars().filter(|&c| c == '\n').count(),
            out.chars().filter(|&c| c == '\n').count()
        );
        assert!(out.contains("1.5 + q"));
    }

    #[test]
    fn substitution_applies_only_to_formula_side() {
        // A pathological module where the output port shadows a param name.
        let src = "Param c = 2.0;\nEQU n, c = c + 1.0;";
        let out = preprocess(src).unwrap();
        assert!(out.contains("c = 2.0 + 1.0"));
    }
}

use num_bigint::BigInt;

use crate::ast::Span;
use crate::value::{parse_decimal, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Decimal(Rational),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Decimal(r) => format!("number `{r}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub msg: String,
}

// longest first
const SYMBOLS: &[&str] = &[
    "->", "=>", "<=", ">=", "(", ")", "[", "]", "{", "}", ",", ";", ":", "=", "<", ">", "+", "-", "*", "/",
];

pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, '/');
            advance(&mut i, &mut line, &mut col, '*');
            loop {
                if i >= chars.len() {
                    return Err(LexError { span, msg: "unterminated block comment".into() });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, '/');
                    break;
                }
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            loop {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
                }
                // dotted hierarchical names: `w.out`
                if i + 1 < chars.len()
                    && chars[i] == '.'
                    && (chars[i + 1].is_ascii_alphabetic() || chars[i + 1] == '_')
                {
                    s.push('.');
                    advance(&mut i, &mut line, &mut col, '.');
                    continue;
                }
                break;
            }
            out.push(Token { tok: Tok::Ident(s), span });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                s.push('.');
                advance(&mut i, &mut line, &mut col, '.');
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
                }
                let r = parse_decimal(&s).ok_or_else(|| LexError { span, msg: format!("bad number `{s}`") })?;
                out.push(Token { tok: Tok::Decimal(r), span });
            } else {
                let n: BigInt = s.parse().map_err(|_| LexError { span, msg: format!("bad number `{s}`") })?;
                out.push(Token { tok: Tok::Int(n), span });
            }
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(LexError { span, msg: "unterminated string".into() }),
                    Some('"') => {
                        advance(&mut i, &mut line, &mut col, '"');
                        break;
                    }
                    Some('\\') => {
                        advance(&mut i, &mut line, &mut col, '\\');
                        let e = *chars.get(i).ok_or(LexError { span, msg: "unterminated string".into() })?;
                        s.push(match e {
                            'n' => '\n',
                            other => other,
                        });
                        advance(&mut i, &mut line, &mut col, e);
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), span });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                for ch in sym.chars() {
                    advance(&mut i, &mut line, &mut col, ch);
                }
                out.push(Token { tok: Tok::Sym(sym), span });
            }
            None => return Err(LexError { span, msg: format!("unexpected character `{c}`") }),
        }
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = lex("x : int; // c\n w.out -> 10.5").unwrap();
        let kinds: Vec<Tok> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[0], Tok::Ident("x".into()));
        assert_eq!(kinds[1], Tok::Sym(":"));
        assert_eq!(kinds[4], Tok::Ident("w.out".into()));
        assert_eq!(toks[4].span, Span { line: 2, col: 2 });
        assert_eq!(kinds[5], Tok::Sym("->"));
        assert!(matches!(kinds[6], Tok::Decimal(_)));
    }

    #[test]
    fn bad_character() {
        assert_eq!(lex("x # y").unwrap_err().span, Span { line: 1, col: 3 });
    }
}

use super::diag::{DiagCode, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Colon,
    ColonEq,
    Semi,
    Comma,
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Eq,
    Ne,
    Star,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (sl, sc) = (line, col);
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(Diagnostic::error(
                        DiagCode::SyntaxError,
                        (sl, sc),
                        "unterminated comment",
                    ));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let tok = if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                col: tc,
            });
            continue;
        } else if two == ":=" {
            bump!();
            Tok::ColonEq
        } else if two == "=>" {
            bump!();
            Tok::Implies
        } else if two == "!=" {
            bump!();
            Tok::Ne
        } else if two == "&&" {
            bump!();
            Tok::And
        } else if two == "||" {
            bump!();
            Tok::Or
        } else if two == "==" {
            bump!();
            Tok::Eq
        } else {
            match c {
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '!' | '¬' | '~' => Tok::Not,
                '&' | '∧' => Tok::And,
                '|' | '∨' => Tok::Or,
                '⇒' => Tok::Implies,
                '=' => Tok::Eq,
                '≠' => Tok::Ne,
                '*' => Tok::Star,
                _ => {
                    return Err(Diagnostic::error(
                        DiagCode::SyntaxError,
                        (tl, tc),
                        format!("unexpected character '{c}'"),
                    ))
                }
            }
        };
        bump!();
        out.push(Token {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

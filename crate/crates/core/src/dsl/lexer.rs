use super::diag::{ParseDiagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Numeric literal, kept as written.
    Number(String),
    Punct(char),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

const PUNCT: &str = "{}()[];,:=+-*/|";

/// Split `src` into tokens. `//` and `#` start comments running to the end
/// of the line.
pub fn lex(src: &str, file: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = |end: usize| SourceSpan::new(file, ln + 1, i + 1, end + 1);
            if c.is_whitespace() {
                i += 1;
            } else if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
                break;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[i..j].iter().collect()),
                    span: span(j),
                });
                i = j;
            } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '-' || chars[k] == '+') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                out.push(Token {
                    tok: Tok::Number(chars[i..j].iter().collect()),
                    span: span(j),
                });
                i = j;
            } else if PUNCT.contains(c) {
                out.push(Token {
                    tok: Tok::Punct(c),
                    span: span(i + 1),
                });
                i += 1;
            } else {
                return Err(ParseDiagnostic::error(
                    "syntax",
                    format!("unexpected character '{c}'"),
                    span(i + 1),
                ));
            }
        }
    }
    let last = src.lines().count().max(1);
    let col = src.lines().last().map_or(0, |l| l.chars().count()) + 1;
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(file, last, col, col),
    });
    Ok(out)
}

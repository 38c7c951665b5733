use super::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Null,
    Eq,
    LParen,
    RParen,
    Comma,
    Dot,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Str(_) => "string literal".into(),
            Tok::Null => "NULL".into(),
            Tok::Eq => "'='".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub span: Span,
    pub message: String,
}

/// Tokenizes the whole input, collecting every lexical error. Bad characters
/// are skipped so later statements can still be parsed.
pub(crate) fn lex(src: &str) -> (Vec<Token>, Vec<LexError>) {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let single = |tok| Token {
            tok,
            span: Span::new(i, i + c.len_utf8()),
        };
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '=' | '(' | ')' | ',' | '.' => {
                chars.next();
                tokens.push(single(match c {
                    '=' => Tok::Eq,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    _ => Tok::Dot,
                }));
            }
            '"' => {
                chars.next();
                let mut text = String::new();
                let mut end = None;
                while let Some((j, d)) = chars.next() {
                    match d {
                        '"' => {
                            end = Some(j + 1);
                            break;
                        }
                        '\\' => match chars.next() {
                            Some((_, e @ ('"' | '\\'))) => text.push(e),
                            Some((_, e)) => {
                                text.push('\\');
                                text.push(e);
                            }
                            None => break,
                        },
                        _ => text.push(d),
                    }
                }
                match end {
                    Some(end) => tokens.push(Token {
                        tok: Tok::Str(text),
                        span: Span::new(i, end),
                    }),
                    None => errors.push(LexError {
                        span: Span::new(i, src.len()),
                        message: "unterminated string literal".into(),
                    }),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let word = &src[i..end];
                let tok = if word.eq_ignore_ascii_case("null") {
                    Tok::Null
                } else {
                    Tok::Ident(word.to_string())
                };
                tokens.push(Token {
                    tok,
                    span: Span::new(i, end),
                });
            }
            _ => {
                chars.next();
                errors.push(LexError {
                    span: Span::new(i, i + c.len_utf8()),
                    message: format!("unexpected character {c:?}"),
                });
            }
        }
    }
    (tokens, errors)
}

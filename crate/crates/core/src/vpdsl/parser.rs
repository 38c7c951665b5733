use super::lexer::{lex, Tok, Token};
use super::{Arg, Diagnostic, DiagnosticKind, Ident, Span, Statement, Value, VisualProgram};

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    src_len: usize,
}

type PResult<T> = Result<T, (Span, String)>;

impl Cursor<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn eof_span(&self) -> Span {
        Span::new(self.src_len, self.src_len)
    }

    fn fail<T>(&self, expected: &str) -> PResult<T> {
        match self.peek() {
            Some(t) => Err((t.span, format!("expected {expected}, found {}", t.tok.describe()))),
            None => Err((self.eof_span(), format!("expected {expected}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(name),
                span,
            }) => {
                let id = Ident {
                    name: name.clone(),
                    span: *span,
                };
                self.pos += 1;
                Ok(id)
            }
            _ => self.fail(what),
        }
    }

    fn punct(&mut self, tok: Tok) -> PResult<Span> {
        match self.peek() {
            Some(t) if t.tok == tok => {
                let span = t.span;
                self.pos += 1;
                Ok(span)
            }
            _ => self.fail(&tok.describe()),
        }
    }

    fn value(&mut self) -> PResult<Value> {
        match self.peek().cloned() {
            Some(Token {
                tok: Tok::Str(text),
                span,
            }) => {
                self.pos += 1;
                Ok(Value::Str { text, span })
            }
            Some(Token { tok: Tok::Null, span }) => {
                self.pos += 1;
                Ok(Value::Null { span })
            }
            Some(Token { tok: Tok::Ident(_), .. }) => {
                let ident = self.ident("identifier")?;
                let attr = if matches!(self.peek(), Some(t) if t.tok == Tok::Dot) {
                    self.pos += 1;
                    Some(self.ident("attribute name")?)
                } else {
                    None
                };
                Ok(Value::Ref { ident, attr })
            }
            _ => self.fail("a string, identifier or NULL"),
        }
    }

    fn statement(&mut self) -> PResult<Statement> {
        let target = self.ident("assignment target")?;
        self.punct(Tok::Eq)?;
        let cell = self.ident("cell name")?;
        self.punct(Tok::LParen)?;
        let mut args = Vec::new();
        let end = if let Some(Token { tok: Tok::RParen, span }) = self.peek() {
            let s = *span;
            self.pos += 1;
            s
        } else {
            loop {
                let name = self.ident("argument name")?;
                self.punct(Tok::Eq)?;
                let value = self.value()?;
                args.push(Arg { name, value });
                match self.peek() {
                    Some(Token { tok: Tok::Comma, .. }) => self.pos += 1,
                    Some(Token { tok: Tok::RParen, span }) => {
                        let s = *span;
                        self.pos += 1;
                        break s;
                    }
                    _ => return self.fail("',' or ')'"),
                }
            }
        };
        Ok(Statement {
            span: target.span.join(end),
            target,
            cell,
            args,
        })
    }
}

/// Token index where a statement plausibly starts: `IDENT = IDENT (`.
fn is_statement_start(toks: &[Token], i: usize) -> bool {
    matches!(
        toks.get(i..i + 4),
        Some([
            Token { tok: Tok::Ident(_), .. },
            Token { tok: Tok::Eq, .. },
            Token { tok: Tok::Ident(_), .. },
            Token { tok: Tok::LParen, .. },
        ])
    )
}

/// Parses a program, recovering after errors at the next statement start so
/// that every malformed statement is reported.
pub fn parse_program(text: &str) -> Result<VisualProgram, Vec<Diagnostic>> {
    let (toks, lex_errors) = lex(text);
    let mut diags = Vec::new();
    let mut statements = Vec::new();
    let mut cur = Cursor {
        toks: &toks,
        pos: 0,
        src_len: text.len(),
    };
    let mut index = 0;
    let mut starts = Vec::new();
    while cur.pos < toks.len() {
        let begin = cur.pos;
        starts.push(toks[begin].span.start);
        match cur.statement() {
            Ok(s) => statements.push(s),
            Err((span, message)) => {
                diags.push(Diagnostic::new(DiagnosticKind::ParseError, index, span, message));
                cur.pos = (begin + 1..toks.len())
                    .find(|&i| is_statement_start(&toks, i))
                    .unwrap_or(toks.len());
            }
        }
        index += 1;
    }
    for e in lex_errors {
        let stmt = starts.iter().filter(|&&s| s <= e.span.start).count().saturating_sub(1);
        diags.push(Diagnostic::new(DiagnosticKind::ParseError, stmt, e.span, e.message));
    }
    if statements.is_empty() && diags.is_empty() {
        diags.push(Diagnostic::new(
            DiagnosticKind::ParseError,
            0,
            Span::new(0, text.len()),
            "no statements",
        ));
    }
    if diags.is_empty() {
        Ok(VisualProgram {
            statements,
            source: text.to_string(),
        })
    } else {
        diags.sort_by_key(|d| (d.statement, d.span.start));
        Err(diags)
    }
}

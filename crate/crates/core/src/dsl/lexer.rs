use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident(String),
    Nat(u64),
    Str(String),
    LBrace,
    RBrace,
    Semi,
    Colon,
    Dot,
    Arrow,
    Eof,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Nat(n) => format!("number `{n}`"),
            TokenKind::Str(_) => "string literal".to_owned(),
            TokenKind::LBrace => "`{`".to_owned(),
            TokenKind::RBrace => "`}`".to_owned(),
            TokenKind::Semi => "`;`".to_owned(),
            TokenKind::Colon => "`:`".to_owned(),
            TokenKind::Dot => "`.`".to_owned(),
            TokenKind::Arrow => "`->`".to_owned(),
            TokenKind::Eof => "end of input".to_owned(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.text[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, u32, u32) {
        (self.pos, self.line, self.column)
    }

    fn span_from(&self, (start, line, column): (usize, u32, u32)) -> SourceSpan {
        SourceSpan {
            start,
            end: self.pos,
            line,
            column,
        }
    }
}

/// Splits `text` into tokens. Lexical errors are collected and the offending
/// input skipped, so the token stream always ends with `Eof`.
pub(crate) fn tokenize(text: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut cur = Cursor {
        text,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    while let Some(c) = cur.peek() {
        let mark = cur.mark();
        match c {
            c if c.is_whitespace() => {
                cur.bump();
            }
            '#' => {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            '{' | '}' | ';' | ':' | '.' => {
                cur.bump();
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    ';' => TokenKind::Semi,
                    ':' => TokenKind::Colon,
                    _ => TokenKind::Dot,
                };
                tokens.push(Token {
                    kind,
                    span: cur.span_from(mark),
                });
            }
            '-' if cur.peek2() == Some('>') => {
                cur.bump();
                cur.bump();
                tokens.push(Token {
                    kind: TokenKind::Arrow,
                    span: cur.span_from(mark),
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    cur.bump();
                }
                let word = &text[mark.0..cur.pos];
                tokens.push(Token {
                    kind: TokenKind::Ident(word.to_owned()),
                    span: cur.span_from(mark),
                });
            }
            c if c.is_ascii_digit() => {
                while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    cur.bump();
                }
                let span = cur.span_from(mark);
                let digits = &text[mark.0..cur.pos];
                match digits.parse::<u64>() {
                    Ok(n) => tokens.push(Token {
                        kind: TokenKind::Nat(n),
                        span,
                    }),
                    Err(_) => errors.push(ParseError::new(
                        span,
                        format!("invalid number `{digits}`"),
                        vec!["natural number".to_owned()],
                    )),
                }
            }
            '"' => {
                cur.bump();
                let mut value = String::new();
                let mut closed = false;
                while let Some(c) = cur.bump() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => {
                            let esc_mark = (cur.pos - 1, cur.line, cur.column - 1);
                            match cur.bump() {
                                Some('"') => value.push('"'),
                                Some('\\') => value.push('\\'),
                                other => {
                                    let found = other.map(String::from).unwrap_or_default();
                                    errors.push(ParseError::new(
                                        cur.span_from(esc_mark),
                                        format!("unknown escape `\\{found}` in string"),
                                        vec!["`\\\"`".to_owned(), "`\\\\`".to_owned()],
                                    ));
                                }
                            }
                        }
                        c => value.push(c),
                    }
                }
                let span = cur.span_from(mark);
                if closed {
                    tokens.push(Token {
                        kind: TokenKind::Str(value),
                        span,
                    });
                } else {
                    errors.push(ParseError::new(
                        span,
                        "unterminated string literal".to_owned(),
                        vec!["`\"`".to_owned()],
                    ));
                }
            }
            other => {
                cur.bump();
                errors.push(ParseError::new(
                    cur.span_from(mark),
                    format!("unexpected character `{}`", other.escape_default()),
                    Vec::new(),
                ));
            }
        }
    }

    let mark = cur.mark();
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: cur.span_from(mark),
    });
    (tokens, errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        let (tokens, errors) = tokenize(text);
        assert!(errors.is_empty(), "{errors:?}");
        tokens.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn punctuation_and_words() {
        assert_eq!(
            kinds("wire a.b -> c.d;"),
            vec![
                TokenKind::Ident("wire".into()),
                TokenKind::Ident("a".into()),
                TokenKind::Dot,
                TokenKind::Ident("b".into()),
                TokenKind::Arrow,
                TokenKind::Ident("c".into()),
                TokenKind::Dot,
                TokenKind::Ident("d".into()),
                TokenKind::Semi,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn strings_with_escapes() {
        assert_eq!(
            kinds(r#""a \"b\" \\ c""#),
            vec![TokenKind::Str(r#"a "b" \ c"#.into()), TokenKind::Eof]
        );
    }

    #[test]
    fn comments_skipped() {
        assert_eq!(kinds("# hi\n{ # there\n}"), vec![
            TokenKind::LBrace,
            TokenKind::RBrace,
            TokenKind::Eof
        ]);
    }

    #[test]
    fn spans_track_lines_and_columns() {
        let (tokens, _) = tokenize("a\n  bc");
        assert_eq!(tokens[1].span, SourceSpan {
            start: 4,
            end: 6,
            line: 2,
            column: 3
        });
    }

    #[test]
    fn reports_bad_input() {
        let (_, errors) = tokenize("a $ \"x\\n\" \"open");
        let messages: Vec<_> = errors.iter().map(|e| e.message.as_str()).collect();
        assert_eq!(messages, vec![
            "unexpected character `$`",
            "unknown escape `\\n` in string",
            "unterminated string literal"
        ]);
        let (_, errors) = tokenize("99999999999999999999999");
        assert_eq!(errors.len(), 1);
        let (_, errors) = tokenize("12ab");
        assert_eq!(errors.len(), 1);
    }
}

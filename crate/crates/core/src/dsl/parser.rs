use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseError, SourceMap, SourceSpan};
use crate::metamodel::{
    DataTypeDecl, Direction, ElementPath, LineDecl, LineRef, Modifier, ModifierKind, ModuleDecl,
    QualifiedName, SystemModel, Wire, KEYWORDS,
};

type PResult<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
    spans: SourceMap,
}

pub(crate) fn parse_text(text: &str) -> Result<(SystemModel, SourceMap), Vec<ParseError>> {
    let (tokens, lex_errors) = tokenize(text);
    let mut parser = Parser {
        tokens,
        pos: 0,
        errors: lex_errors,
        spans: SourceMap::default(),
    };
    let model = parser.file();
    let mut errors = parser.errors;
    match model {
        Ok(model) if errors.is_empty() => Ok((model, parser.spans)),
        Ok(_) => {
            errors.sort_by_key(|e| e.span.start);
            Err(errors)
        }
        Err(e) => {
            errors.push(e);
            errors.sort_by_key(|e| e.span.start);
            Err(errors)
        }
    }
}

fn join(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    SourceSpan {
        start: a.start,
        end: b.end,
        line: a.line,
        column: a.column,
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == kw)
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        let list = expected.join(" or ");
        ParseError::new(
            tok.span,
            format!("expected {list}, found {}", tok.kind.describe()),
            expected.iter().map(|s| (*s).to_owned()).collect(),
        )
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Token> {
        if self.at_keyword(kw) {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&[&format!("`{kw}`")]))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match &self.peek().kind {
            TokenKind::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                let tok = self.peek();
                Err(ParseError::new(
                    tok.span,
                    format!("expected identifier, found keyword `{s}`"),
                    vec!["identifier".to_owned()],
                ))
            }
            TokenKind::Ident(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn nat(&mut self) -> PResult<u64> {
        match self.peek().kind {
            TokenKind::Nat(n) => {
                self.advance();
                Ok(n)
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn opt_string(&mut self) -> Option<String> {
        if let TokenKind::Str(s) = &self.peek().kind {
            let s = s.clone();
            self.advance();
            Some(s)
        } else {
            None
        }
    }

    fn qname(&mut self) -> PResult<QualifiedName> {
        let module = self.ident()?;
        self.expect(TokenKind::Dot, "`.`")?;
        let line = self.ident()?;
        Ok(QualifiedName::new(module, line))
    }

    fn file(&mut self) -> PResult<SystemModel> {
        self.keyword("system")?;
        let name_span = self.peek().span;
        let name = self.ident()?;
        let mut model = SystemModel::new(name);
        model.description = self.opt_string();
        self.spans.insert(ElementPath::System, name_span);
        self.expect(TokenKind::LBrace, "`{`")?;

        loop {
            match &self.peek().kind {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    return Err(self.unexpected(&["`}`"]));
                }
                _ => {
                    let start = self.pos;
                    if let Err(e) = self.item(&mut model) {
                        self.errors.push(e);
                        self.recover(start);
                    }
                }
            }
        }
        if self.peek().kind != TokenKind::Eof {
            return Err(self.unexpected(&["end of input"]));
        }
        Ok(model)
    }

    /// Skips to the next plausible item start after a syntax error.
    fn recover(&mut self, start: usize) {
        if self.pos == start {
            self.advance();
        }
        loop {
            match &self.peek().kind {
                TokenKind::Eof | TokenKind::RBrace => return,
                TokenKind::Semi => {
                    self.advance();
                    return;
                }
                TokenKind::LBrace => {
                    self.skip_block();
                    return;
                }
                TokenKind::Ident(s)
                    if matches!(
                        s.as_str(),
                        "type" | "module" | "wire" | "suppress" | "inhibit"
                    ) =>
                {
                    return
                }
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn skip_block(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.advance().kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
                TokenKind::Eof => return,
                _ => {}
            }
        }
    }

    fn item(&mut self, model: &mut SystemModel) -> PResult<()> {
        let start = self.peek().span;
        let kw = match &self.peek().kind {
            TokenKind::Ident(s) => s.clone(),
            _ => String::new(),
        };
        match kw.as_str() {
            "type" => {
                self.advance();
                let name = self.ident()?;
                let description = self.opt_string();
                self.expect(TokenKind::Semi, "`;`")?;
                self.spans.insert(
                    ElementPath::DataType(model.data_types.len()),
                    join(start, self.prev_span()),
                );
                model.data_types.push(DataTypeDecl { name, description });
            }
            "module" => {
                self.advance();
                let index = model.modules.len();
                let module = self.module(index, start)?;
                model.modules.push(module);
            }
            "wire" => {
                self.advance();
                let source = self.qname()?;
                self.expect(TokenKind::Arrow, "`->`")?;
                let sink = self.qname()?;
                self.expect(TokenKind::Semi, "`;`")?;
                self.spans.insert(
                    ElementPath::Wire(model.wires.len()),
                    join(start, self.prev_span()),
                );
                model.wires.push(Wire { source, sink });
            }
            "suppress" | "inhibit" => {
                self.advance();
                let kind = if kw == "suppress" {
                    ModifierKind::Suppressor
                } else {
                    ModifierKind::Inhibitor
                };
                let target = self.qname()?;
                self.keyword("by")?;
                let controlled_by = self.qname()?;
                self.keyword("for")?;
                let time_span = self.peek().span;
                let time = self.nat()?;
                let time_ms = i64::try_from(time).map_err(|_| {
                    ParseError::new(
                        time_span,
                        format!("time {time} ms is too large"),
                        vec!["number".to_owned()],
                    )
                })?;
                self.keyword("ms")?;
                self.expect(TokenKind::Semi, "`;`")?;
                self.spans.insert(
                    ElementPath::Modifier(model.modifiers.len()),
                    join(start, self.prev_span()),
                );
                model.modifiers.push(Modifier {
                    kind,
                    target,
                    controlled_by,
                    time_ms,
                });
            }
            _ => {
                return Err(self.unexpected(&[
                    "`type`",
                    "`module`",
                    "`wire`",
                    "`suppress`",
                    "`inhibit`",
                    "`}`",
                ]))
            }
        }
        Ok(())
    }

    fn module(&mut self, index: usize, start: SourceSpan) -> PResult<ModuleDecl> {
        let name = self.ident()?;
        self.keyword("layer")?;
        let layer_span = self.peek().span;
        let layer = self.nat()?;
        let layer = u32::try_from(layer).map_err(|_| {
            ParseError::new(
                layer_span,
                format!("layer {layer} is too large"),
                vec!["number".to_owned()],
            )
        })?;
        let mut decl = ModuleDecl::new(name, layer);
        decl.description = self.opt_string();
        self.expect(TokenKind::LBrace, "`{`")?;
        self.spans.insert(ElementPath::Module(index), join(start, self.prev_span()));

        loop {
            match &self.peek().kind {
                TokenKind::RBrace => {
                    self.advance();
                    return Ok(decl);
                }
                TokenKind::Eof => return Err(self.unexpected(&["`}`"])),
                _ => {
                    let before = self.pos;
                    if let Err(e) = self.line_decl(index, &mut decl) {
                        self.errors.push(e);
                        self.recover_line(before);
                    }
                }
            }
        }
    }

    fn recover_line(&mut self, start: usize) {
        if self.pos == start {
            self.advance();
        }
        loop {
            match &self.peek().kind {
                TokenKind::Eof | TokenKind::RBrace => return,
                TokenKind::Semi => {
                    self.advance();
                    return;
                }
                TokenKind::Ident(s) if s == "in" || s == "out" => return,
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn line_decl(&mut self, module: usize, decl: &mut ModuleDecl) -> PResult<()> {
        let start = self.peek().span;
        let direction = if self.at_keyword("in") {
            Direction::Input
        } else if self.at_keyword("out") {
            Direction::Output
        } else {
            return Err(self.unexpected(&["`in`", "`out`", "`}`"]));
        };
        self.advance();
        let name = self.ident()?;
        self.expect(TokenKind::Colon, "`:`")?;
        let data_type = self.ident()?;
        let description = self.opt_string();
        self.expect(TokenKind::Semi, "`;`")?;
        let line = LineDecl {
            name,
            description,
            data_type,
        };
        let list = match direction {
            Direction::Input => &mut decl.inputs,
            Direction::Output => &mut decl.outputs,
        };
        self.spans.insert(
            ElementPath::Line(LineRef {
                module,
                direction,
                index: list.len(),
            }),
            join(start, self.prev_span()),
        );
        list.push(line);
        Ok(())
    }
}

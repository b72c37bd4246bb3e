//! A restricted recursive-descent parser for Java.
//!
//! It understands declarations (package, imports, types, fields, methods,
//! constructors, enum constants, records), block statements and the full
//! expression precedence ladder, but performs no name or type resolution.
//! While parsing it records candidate mutation sites ([`RawSite`]) and a
//! [`MethodContext`] per method or constructor.
//!
//! Type-versus-expression ambiguities (local declarations, casts, lambdas)
//! are resolved by bounded speculation: try the type reading, and rewind if
//! the tokens that follow cannot belong to it.

use serde::{Deserialize, Serialize};

use super::lexer::{self, Token, TokenKind};
use super::{SiteKind, SourceFile, Span};

pub const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    /// Declared type as written, whitespace removed; varargs end in `...`.
    pub ty: String,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodContext {
    pub file: String,
    pub name: String,
    /// `None` for constructors.
    pub return_type: Option<String>,
    pub params: Vec<Param>,
    /// `{` through `}` inclusive; `None` for abstract and interface methods.
    pub body: Option<Span>,
    pub is_constructor: bool,
    pub is_abstract_or_interface_stub: bool,
    /// Token after which a new first statement can be inserted: the opening
    /// brace, or the `;` closing an explicit `this(...)`/`super(...)` call.
    pub insertion_anchor: Option<Span>,
}

impl MethodContext {
    pub fn returns_reference(&self) -> bool {
        self.return_type.as_deref().is_some_and(is_reference_type)
    }
}

/// Lexical reference-type test. Generic arguments are stripped first; array
/// and varargs types are references whatever their element type.
pub fn is_reference_type(ty: &str) -> bool {
    let ty = ty.trim();
    if ty.ends_with("[]") || ty.ends_with("...") {
        return true;
    }
    let base = ty.split('<').next().unwrap_or(ty).trim();
    !(PRIMITIVES.contains(&base) || base == "void" || base.is_empty())
}

/// A candidate site recorded during parsing, before operator assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawSite {
    pub kind: SiteKind,
    pub span: Span,
    /// Enclosing method for `return` statements.
    pub method: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}:{line}: {message}")]
pub struct ParseError {
    pub path: String,
    pub line: usize,
    pub offset: usize,
    pub message: String,
}

/// Result of parsing one file: its methods plus the raw site index.
#[derive(Debug, Clone)]
pub struct ParsedFile<'a> {
    pub file: &'a SourceFile,
    pub methods: Vec<MethodContext>,
    pub raw_sites: Vec<RawSite>,
    /// Comment and string/char literal regions.
    pub masks: Vec<Span>,
}

pub fn parse_source(file: &SourceFile) -> Result<ParsedFile<'_>, ParseError> {
    let to_error = |offset: usize, message: String| ParseError {
        path: file.path.clone(),
        line: file.line_col(offset.min(file.text.len())).0,
        offset,
        message,
    };
    let lexed = lexer::tokenize(&file.text).map_err(|e| to_error(e.offset, e.message))?;
    let mut parser = Parser {
        text: &file.text,
        path: &file.path,
        toks: &lexed.tokens,
        matching: &lexed.matching,
        pos: 0,
        methods: Vec::new(),
        sites: Vec::new(),
        frames: Vec::new(),
        masks: &lexed.masks,
    };
    parser.compilation_unit().map_err(|e| to_error(e.offset, e.message))?;
    Ok(ParsedFile { file, methods: parser.methods, raw_sites: parser.sites, masks: lexed.masks })
}

#[derive(Debug)]
struct Failure {
    offset: usize,
    message: String,
}

type PResult<T> = Result<T, Failure>;

#[derive(Debug, Clone, Copy)]
enum Frame {
    Method(usize),
    Lambda,
    Other,
}

#[derive(Debug, Clone, Copy)]
struct Ex {
    start: usize,
    end: usize,
    is_null: bool,
}

#[derive(Debug, Default)]
struct Modifiers {
    is_final: bool,
}

struct Parser<'a> {
    text: &'a str,
    path: &'a str,
    toks: &'a [Token],
    matching: &'a [usize],
    pos: usize,
    methods: Vec<MethodContext>,
    sites: Vec<RawSite>,
    frames: Vec<Frame>,
    masks: &'a [Span],
}

const MODIFIER_KEYWORDS: &[&str] =
    &["public", "protected", "private", "static", "final", "abstract", "native", "transient", "volatile", "strictfp"];

impl<'a> Parser<'a> {
    // ---- token helpers ----

    fn tok(&self, i: usize) -> Option<&'a Token> {
        self.toks.get(i)
    }

    fn text_at(&self, i: usize) -> &'a str {
        self.tok(i).map_or("", |t| t.span.slice(self.text))
    }

    fn cur(&self) -> &'a str {
        self.text_at(self.pos)
    }

    fn kind_at(&self, i: usize) -> Option<TokenKind> {
        self.tok(i).map(|t| t.kind)
    }

    fn at(&self, s: &str) -> bool {
        self.tok(self.pos).is_some_and(|t| t.kind != TokenKind::Literal && t.span.slice(self.text) == s)
    }

    fn peek_is(&self, n: usize, s: &str) -> bool {
        self.tok(self.pos + n).is_some_and(|t| t.kind != TokenKind::Literal && t.span.slice(self.text) == s)
    }

    fn at_ident(&self) -> bool {
        self.kind_at(self.pos) == Some(TokenKind::Ident)
    }

    fn eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn offset(&self) -> usize {
        self.tok(self.pos).map_or(self.text.len(), |t| t.span.start)
    }

    fn prev_end(&self) -> usize {
        self.pos.checked_sub(1).and_then(|i| self.tok(i)).map_or(0, |t| t.span.end)
    }

    fn bump(&mut self) -> usize {
        let i = self.pos;
        self.pos += 1;
        i
    }

    fn fail<T>(&self, message: impl Into<String>) -> PResult<T> {
        let found = if self.eof() { "end of file".to_string() } else { format!("`{}`", self.cur()) };
        Err(Failure { offset: self.offset(), message: format!("{}, found {found}", message.into()) })
    }

    fn expect(&mut self, s: &str) -> PResult<usize> {
        if self.at(s) {
            Ok(self.bump())
        } else {
            self.fail(format!("expected `{s}`"))
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.at(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<&'a str> {
        if self.at_ident() {
            let i = self.bump();
            Ok(self.text_at(i))
        } else {
            self.fail("expected identifier")
        }
    }

    /// Index of the token after the bracket group opening at `self.pos`.
    fn skip_group(&mut self) {
        let close = self.matching[self.pos];
        self.pos = close + 1;
    }

    /// Adjacent in the source with no whitespace between tokens `i` and `i + 1`.
    fn glued(&self, i: usize) -> bool {
        matches!((self.tok(i), self.tok(i + 1)), (Some(a), Some(b)) if a.span.end == b.span.start)
    }

    fn speculate<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let (pos, sites, methods) = (self.pos, self.sites.len(), self.methods.len());
        match f(self) {
            Ok(v) => Some(v),
            Err(_) => {
                self.pos = pos;
                self.sites.truncate(sites);
                self.methods.truncate(methods);
                None
            }
        }
    }

    fn site(&mut self, kind: SiteKind, span: Span) {
        self.sites.push(RawSite { kind, span, method: None });
    }

    // ---- declarations ----

    fn compilation_unit(&mut self) -> PResult<()> {
        if self.path.ends_with("module-info.java") {
            return Ok(());
        }
        while !self.eof() {
            if self.eat(";") {
                continue;
            }
            let save = self.pos;
            self.modifiers()?;
            if self.at("package") || self.at("import") {
                while !self.eof() && !self.at(";") {
                    self.pos += 1;
                }
                self.expect(";")?;
            } else if self.is_type_decl_start() {
                self.type_decl()?;
            } else {
                self.pos = save;
                return self.fail("expected type declaration");
            }
        }
        Ok(())
    }

    fn annotation(&mut self) -> PResult<()> {
        self.expect("@")?;
        self.ident()?;
        while self.at(".") && self.kind_at(self.pos + 1) == Some(TokenKind::Ident) {
            self.pos += 2;
        }
        if self.at("(") {
            self.skip_group();
        }
        Ok(())
    }

    fn at_annotation(&self) -> bool {
        self.at("@") && !self.peek_is(1, "interface")
    }

    fn modifiers(&mut self) -> PResult<Modifiers> {
        let mut mods = Modifiers::default();
        loop {
            let t = self.cur();
            if self.at_annotation() {
                self.annotation()?;
            } else if self.kind_at(self.pos) == Some(TokenKind::Keyword) && MODIFIER_KEYWORDS.contains(&t) {
                mods.is_final |= t == "final";
                self.pos += 1;
            } else if (t == "synchronized" && !self.peek_is(1, "("))
                || (t == "default" && !self.peek_is(1, ":") && !self.peek_is(1, "->"))
                || (t == "sealed" && self.at_ident() && self.next_is_decl_word(1))
            {
                self.pos += 1;
            } else if t == "non" && self.peek_is(1, "-") && self.peek_is(2, "sealed") {
                self.pos += 3;
            } else {
                return Ok(mods);
            }
        }
    }

    fn next_is_decl_word(&self, n: usize) -> bool {
        let t = self.text_at(self.pos + n);
        matches!(
            t,
            "class"
                | "interface"
                | "abstract"
                | "public"
                | "protected"
                | "private"
                | "static"
                | "final"
                | "strictfp"
                | "sealed"
                | "non"
        )
    }

    fn is_type_decl_start(&self) -> bool {
        self.at("class")
            || self.at("interface")
            || self.at("enum")
            || (self.at("@") && self.peek_is(1, "interface"))
            || (self.at("record")
                && self.at_ident()
                && self.kind_at(self.pos + 1) == Some(TokenKind::Ident)
                && (self.peek_is(2, "(") || self.peek_is(2, "<")))
    }

    fn type_decl(&mut self) -> PResult<()> {
        if self.eat("class") {
            let name = self.ident()?;
            self.opt_type_params()?;
            if self.eat("extends") {
                self.ty()?;
            }
            if self.eat("implements") {
                self.type_list()?;
            }
            if self.at("permits") {
                self.pos += 1;
                self.type_list()?;
            }
            self.class_body(name, false)
        } else if self.eat("interface") {
            let name = self.ident()?;
            self.opt_type_params()?;
            if self.eat("extends") {
                self.type_list()?;
            }
            if self.at("permits") {
                self.pos += 1;
                self.type_list()?;
            }
            self.class_body(name, false)
        } else if self.eat("enum") {
            let name = self.ident()?;
            if self.eat("implements") {
                self.type_list()?;
            }
            self.enum_body(name)
        } else if self.at("@") {
            self.pos += 2;
            self.ident()?;
            if !self.at("{") {
                return self.fail("expected `{`");
            }
            self.skip_group();
            Ok(())
        } else if self.at("record") {
            self.pos += 1;
            let name = self.ident()?;
            self.opt_type_params()?;
            if !self.at("(") {
                return self.fail("expected record header");
            }
            self.skip_group();
            if self.eat("implements") {
                self.type_list()?;
            }
            self.class_body(name, true)
        } else {
            self.fail("expected type declaration")
        }
    }

    fn type_list(&mut self) -> PResult<()> {
        self.ty()?;
        while self.eat(",") {
            self.ty()?;
        }
        Ok(())
    }

    fn opt_type_params(&mut self) -> PResult<()> {
        if !self.eat("<") {
            return Ok(());
        }
        loop {
            while self.at_annotation() {
                self.annotation()?;
            }
            self.ident()?;
            if self.eat("extends") {
                self.ty()?;
                while self.eat("&") {
                    self.ty()?;
                }
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(">")?;
        Ok(())
    }

    fn class_body(&mut self, class_name: &str, is_record: bool) -> PResult<()> {
        self.expect("{")?;
        while !self.at("}") {
            if self.eof() {
                return self.fail("unterminated class body");
            }
            self.member(class_name, is_record)?;
        }
        self.expect("}")?;
        Ok(())
    }

    fn enum_body(&mut self, name: &str) -> PResult<()> {
        self.expect("{")?;
        while self.at_ident() || self.at_annotation() {
            while self.at_annotation() {
                self.annotation()?;
            }
            self.ident()?;
            if self.at("(") {
                self.frames.push(Frame::Other);
                self.arguments()?;
                self.frames.pop();
            }
            if self.at("{") {
                self.class_body("", false)?;
            }
            if !self.eat(",") {
                break;
            }
        }
        if self.eat(";") {
            while !self.at("}") {
                if self.eof() {
                    return self.fail("unterminated enum body");
                }
                self.member(name, false)?;
            }
        }
        self.expect("}")?;
        Ok(())
    }

    fn member(&mut self, class_name: &str, is_record: bool) -> PResult<()> {
        if self.eat(";") {
            return Ok(());
        }
        if self.at("{") || (self.at("static") && self.peek_is(1, "{")) {
            self.eat("static");
            self.frames.push(Frame::Other);
            let r = self.block();
            self.frames.pop();
            return r;
        }
        self.modifiers()?;
        if self.is_type_decl_start() {
            return self.type_decl();
        }
        self.opt_type_params()?;
        if self.at_ident() && self.cur() == class_name && self.peek_is(1, "(") {
            let name = self.ident()?.to_string();
            return self.method_rest(name, None);
        }
        if is_record && self.at_ident() && self.cur() == class_name && self.peek_is(1, "{") {
            // compact canonical constructor
            let name = self.ident()?.to_string();
            return self.method_body_or_stub(name, None, Vec::new());
        }
        let ty = self.ty()?;
        let name = self.ident()?.to_string();
        if self.at("(") {
            return self.method_rest(name, Some(ty));
        }
        self.frames.push(Frame::Other);
        let r = self.declarators_rest();
        self.frames.pop();
        r?;
        self.expect(";")?;
        Ok(())
    }

    fn method_rest(&mut self, name: String, mut return_type: Option<String>) -> PResult<()> {
        let params = self.formal_params()?;
        while self.at("[") && self.peek_is(1, "]") {
            self.pos += 2;
            if let Some(rt) = return_type.as_mut() {
                rt.push_str("[]");
            }
        }
        if self.eat("throws") {
            self.type_list()?;
        }
        self.method_body_or_stub(name, return_type, params)
    }

    fn method_body_or_stub(&mut self, name: String, return_type: Option<String>, params: Vec<Param>) -> PResult<()> {
        let is_constructor = return_type.is_none();
        if self.eat("default") {
            // annotation element default value
            while !self.eof() && !self.at(";") {
                self.pos += 1;
            }
        }
        if self.eat(";") {
            self.methods.push(MethodContext {
                file: self.path.to_string(),
                name,
                return_type,
                params,
                body: None,
                is_constructor,
                is_abstract_or_interface_stub: true,
                insertion_anchor: None,
            });
            return Ok(());
        }
        if !self.at("{") {
            return self.fail("expected method body");
        }
        let open = self.pos;
        let close = self.matching[open];
        let body = Span::new(self.toks[open].span.start, self.toks[close].span.end);
        let mut anchor = self.toks[open].span;
        if is_constructor && (self.peek_is(1, "this") || self.peek_is(1, "super")) && self.peek_is(2, "(") {
            let after = self.matching[open + 2] + 1;
            if self.text_at(after) == ";" {
                anchor = self.toks[after].span;
            }
        }
        let idx = self.methods.len();
        self.methods.push(MethodContext {
            file: self.path.to_string(),
            name,
            return_type,
            params,
            body: Some(body),
            is_constructor,
            is_abstract_or_interface_stub: false,
            insertion_anchor: Some(anchor),
        });
        self.frames.push(Frame::Method(idx));
        let r = self.block();
        self.frames.pop();
        r
    }

    fn formal_params(&mut self) -> PResult<Vec<Param>> {
        self.expect("(")?;
        let mut params: Vec<Param> = Vec::new();
        while !self.at(")") {
            let mods = self.modifiers()?;
            let mut ty = self.ty()?;
            if self.eat("...") {
                ty.push_str("...");
            }
            if self.eat("this") {
                // receiver parameter
            } else {
                let name = self.ident()?.to_string();
                while self.at("[") && self.peek_is(1, "]") {
                    self.pos += 2;
                    ty.push_str("[]");
                }
                if params.iter().any(|p| p.name == name) {
                    return self.fail(format!("duplicate parameter `{name}`"));
                }
                params.push(Param { name, ty, is_final: mods.is_final });
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(params)
    }

    /// After the first declarator name: `[]`s, initializer, further declarators.
    fn declarators_rest(&mut self) -> PResult<()> {
        loop {
            while self.at("[") && self.peek_is(1, "]") {
                self.pos += 2;
            }
            if self.eat("=") {
                self.var_init()?;
            }
            if !self.eat(",") {
                return Ok(());
            }
            self.ident()?;
        }
    }

    fn var_init(&mut self) -> PResult<()> {
        if self.at("{") {
            self.array_initializer()
        } else {
            self.expr().map(|_| ())
        }
    }

    fn array_initializer(&mut self) -> PResult<()> {
        self.expect("{")?;
        while !self.at("}") {
            self.var_init()?;
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(())
    }

    // ---- types ----

    /// Parses a type and returns its text with whitespace removed.
    fn ty(&mut self) -> PResult<String> {
        let first = self.pos;
        while self.at_annotation() {
            self.annotation()?;
        }
        let start = self.pos;
        let t = self.cur();
        if self.kind_at(self.pos) == Some(TokenKind::Keyword) && (PRIMITIVES.contains(&t) || t == "void") {
            self.pos += 1;
        } else {
            self.ident()?;
            if self.at("<") {
                self.type_args()?;
            }
            while self.at(".") && (self.kind_at(self.pos + 1) == Some(TokenKind::Ident) || self.peek_is(1, "@")) {
                self.pos += 1;
                while self.at_annotation() {
                    self.annotation()?;
                }
                self.ident()?;
                if self.at("<") {
                    self.type_args()?;
                }
            }
        }
        loop {
            if self.at("[") && self.peek_is(1, "]") {
                self.pos += 2;
            } else if self.at_annotation() && self.first_non_annotation_is("[") {
                self.annotation()?;
            } else {
                break;
            }
        }
        debug_assert!(first <= start);
        Ok((start..self.pos).map(|i| self.text_at(i)).collect())
    }

    fn first_non_annotation_is(&self, s: &str) -> bool {
        let mut i = self.pos;
        while self.text_at(i) == "@" {
            i += 2;
            while self.text_at(i) == "." {
                i += 2;
            }
            if self.text_at(i) == "(" {
                i = self.matching[i] + 1;
            }
        }
        self.text_at(i) == s
    }

    fn type_args(&mut self) -> PResult<()> {
        self.expect("<")?;
        if self.eat(">") {
            return Ok(());
        }
        loop {
            while self.at_annotation() {
                self.annotation()?;
            }
            if self.eat("?") {
                if self.eat("extends") || self.eat("super") {
                    self.ty()?;
                }
            } else {
                self.ty()?;
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(">")?;
        Ok(())
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<()> {
        self.expect("{")?;
        while !self.at("}") {
            if self.eof() {
                return self.fail("unterminated block");
            }
            self.block_statement()?;
        }
        self.expect("}")?;
        Ok(())
    }

    fn block_statement(&mut self) -> PResult<()> {
        if self.starts_plain_statement() {
            return self.statement();
        }
        let save = self.pos;
        self.modifiers()?;
        let had_modifiers = self.pos != save;
        if self.is_type_decl_start() {
            return self.type_decl();
        }
        if self.speculate(|p| p.local_decl_head()).is_some() {
            self.declarators_rest()?;
            self.expect(";")?;
            return Ok(());
        }
        if had_modifiers {
            return self.fail("expected declaration");
        }
        self.pos = save;
        self.statement()
    }

    fn starts_plain_statement(&self) -> bool {
        matches!(
            self.cur(),
            "{" | ";"
                | "if"
                | "while"
                | "do"
                | "for"
                | "try"
                | "switch"
                | "return"
                | "throw"
                | "break"
                | "continue"
                | "assert"
                | "this"
                | "super"
                | "new"
                | "("
                | "++"
                | "--"
        ) || (self.at("synchronized") && self.peek_is(1, "("))
            || self.at_yield()
            || (self.at_ident() && self.peek_is(1, ":"))
    }

    fn at_yield(&self) -> bool {
        self.at("yield")
            && self.at_ident()
            && !matches!(self.text_at(self.pos + 1), "=" | "." | "[" | "++" | "--" | "->" | ";" | ":" | "+=" | "-=")
    }

    /// `Type name` followed by something that can only continue a declaration.
    fn local_decl_head(&mut self) -> PResult<()> {
        self.ty()?;
        self.ident()?;
        if matches!(self.cur(), "=" | ";" | "," | "[" | ":") {
            Ok(())
        } else {
            self.fail("not a declaration")
        }
    }

    fn paren_expr(&mut self) -> PResult<Ex> {
        self.expect("(")?;
        let e = self.expr()?;
        self.expect(")")?;
        Ok(e)
    }

    fn statement(&mut self) -> PResult<()> {
        match self.cur() {
            "{" => self.block(),
            ";" => {
                self.pos += 1;
                Ok(())
            }
            "if" => {
                self.pos += 1;
                self.paren_expr()?;
                self.statement()?;
                if self.eat("else") {
                    self.statement()?;
                }
                Ok(())
            }
            "while" => {
                self.pos += 1;
                self.paren_expr()?;
                self.statement()
            }
            "do" => {
                self.pos += 1;
                self.statement()?;
                self.expect("while")?;
                self.paren_expr()?;
                self.expect(";").map(|_| ())
            }
            "for" => self.for_statement(),
            "try" => self.try_statement(),
            "switch" => {
                self.pos += 1;
                self.paren_expr()?;
                self.switch_body()
            }
            "return" => self.return_statement(),
            "throw" => {
                self.pos += 1;
                self.expr()?;
                self.expect(";").map(|_| ())
            }
            "break" | "continue" => {
                self.pos += 1;
                if self.at_ident() {
                    self.pos += 1;
                }
                self.expect(";").map(|_| ())
            }
            "synchronized" if self.peek_is(1, "(") => {
                self.pos += 1;
                self.paren_expr()?;
                self.block()
            }
            "assert" => {
                self.pos += 1;
                self.expr()?;
                if self.eat(":") {
                    self.expr()?;
                }
                self.expect(";").map(|_| ())
            }
            _ if self.at_yield() => {
                self.pos += 1;
                self.expr()?;
                self.expect(";").map(|_| ())
            }
            _ if self.at_ident() && self.peek_is(1, ":") => {
                self.pos += 2;
                self.statement()
            }
            _ => {
                let sites_before = self.sites.len();
                let e = self.expr()?;
                // `new Foo();` as a whole statement cannot become `null;`.
                if let Some(pos) = self.sites[sites_before..]
                    .iter()
                    .position(|s| s.kind == SiteKind::NewExpr && s.span == Span::new(e.start, e.end))
                {
                    self.sites.remove(sites_before + pos);
                }
                self.expect(";").map(|_| ())
            }
        }
    }

    fn return_statement(&mut self) -> PResult<()> {
        let start = self.offset();
        self.pos += 1;
        if self.eat(";") {
            return Ok(());
        }
        let e = self.expr()?;
        self.expect(";")?;
        if let Some(Frame::Method(idx)) = self.frames.last().copied() {
            if !e.is_null {
                self.sites.push(RawSite {
                    kind: SiteKind::ReturnStmt,
                    span: Span::new(start, self.prev_end()),
                    method: Some(idx),
                });
            }
        }
        Ok(())
    }

    fn for_statement(&mut self) -> PResult<()> {
        self.pos += 1;
        self.expect("(")?;
        if !self.eat(";") {
            let save = self.pos;
            self.modifiers()?;
            if self.speculate(|p| p.local_decl_head()).is_some() {
                if self.eat(":") {
                    self.expr()?;
                    self.expect(")")?;
                    return self.statement();
                }
                self.declarators_rest()?;
            } else {
                self.pos = save;
                self.expr_list()?;
            }
            self.expect(";")?;
        }
        if !self.at(";") {
            self.expr()?;
        }
        self.expect(";")?;
        if !self.at(")") {
            self.expr_list()?;
        }
        self.expect(")")?;
        self.statement()
    }

    fn expr_list(&mut self) -> PResult<()> {
        self.expr()?;
        while self.eat(",") {
            self.expr()?;
        }
        Ok(())
    }

    fn try_statement(&mut self) -> PResult<()> {
        self.pos += 1;
        if self.eat("(") {
            while !self.at(")") {
                let save = self.pos;
                self.modifiers()?;
                if self.speculate(|p| p.local_decl_head()).is_some() {
                    self.expect("=")?;
                    self.expr()?;
                } else {
                    self.pos = save;
                    self.expr()?;
                }
                if !self.eat(";") {
                    break;
                }
            }
            self.expect(")")?;
        }
        self.block()?;
        while self.eat("catch") {
            self.expect("(")?;
            self.modifiers()?;
            self.ty()?;
            while self.eat("|") {
                self.ty()?;
            }
            self.ident()?;
            self.expect(")")?;
            self.block()?;
        }
        if self.eat("finally") {
            self.block()?;
        }
        Ok(())
    }

    fn switch_body(&mut self) -> PResult<()> {
        self.expect("{")?;
        while !self.at("}") {
            if self.eat("case") {
                self.case_items()?;
            } else if !self.eat("default") {
                return self.fail("expected `case` or `default`");
            }
            if self.eat("->") {
                if self.at("{") {
                    self.block()?;
                } else if self.at("throw") {
                    self.statement()?;
                } else {
                    self.expr()?;
                    self.expect(";")?;
                }
            } else {
                self.expect(":")?;
                while !self.at("case") && !self.at("default") && !self.at("}") {
                    if self.eof() {
                        return self.fail("unterminated switch");
                    }
                    self.block_statement()?;
                }
            }
        }
        self.expect("}")?;
        Ok(())
    }

    fn case_items(&mut self) -> PResult<()> {
        loop {
            if !self.eat("default") && self.speculate(|p| p.case_pattern()).is_none() {
                self.ternary()?;
            }
            if !self.eat(",") {
                break;
            }
        }
        if self.at("when") && self.at_ident() {
            self.pos += 1;
            self.ternary()?;
        }
        Ok(())
    }

    fn case_pattern(&mut self) -> PResult<()> {
        self.modifiers()?;
        self.ty()?;
        if self.at("(") {
            self.skip_group();
            if self.at_ident() && !self.at("when") {
                self.pos += 1;
            }
        } else {
            self.ident()?;
        }
        if matches!(self.cur(), "->" | ":" | "," | "when") {
            Ok(())
        } else {
            self.fail("not a pattern")
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Ex> {
        if self.lambda_ahead() {
            return self.lambda();
        }
        let lhs = self.ternary()?;
        if let Some(n) = self.assign_op_len() {
            self.pos += n;
            let rhs = self.expr()?;
            return Ok(Ex { start: lhs.start, end: rhs.end, is_null: false });
        }
        Ok(lhs)
    }

    fn assign_op_len(&self) -> Option<usize> {
        match self.cur() {
            "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" => Some(1),
            ">" if self.peek_is(1, ">") && self.glued(self.pos) => {
                if self.peek_is(2, "=") && self.glued(self.pos + 1) {
                    Some(3)
                } else if self.peek_is(2, ">")
                    && self.peek_is(3, "=")
                    && self.glued(self.pos + 1)
                    && self.glued(self.pos + 2)
                {
                    Some(4)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn lambda_ahead(&self) -> bool {
        if self.at_ident() && self.peek_is(1, "->") {
            return true;
        }
        self.at("(") && self.text_at(self.matching[self.pos] + 1) == "->"
    }

    fn lambda(&mut self) -> PResult<Ex> {
        let start = self.offset();
        if self.at("(") {
            self.skip_group();
        } else {
            self.ident()?;
        }
        self.expect("->")?;
        if self.at("{") {
            self.frames.push(Frame::Lambda);
            let r = self.block();
            self.frames.pop();
            r?;
        } else {
            self.frames.push(Frame::Lambda);
            let r = self.expr();
            self.frames.pop();
            r?;
        }
        Ok(Ex { start, end: self.prev_end(), is_null: false })
    }

    fn ternary(&mut self) -> PResult<Ex> {
        let cond = self.binary(1)?;
        if !self.eat("?") {
            return Ok(cond);
        }
        self.expr()?;
        self.expect(":")?;
        let other = if self.lambda_ahead() { self.lambda()? } else { self.ternary()? };
        Ok(Ex { start: cond.start, end: other.end, is_null: false })
    }

    /// Binary operator at the cursor: (operator text, precedence, token count).
    fn peek_binop(&self) -> Option<(&'static str, u8, usize)> {
        let op: &'static str = match self.cur() {
            "||" => "||",
            "&&" => "&&",
            "|" => "|",
            "^" => "^",
            "&" => "&",
            "==" => "==",
            "!=" => "!=",
            "<" => "<",
            "<=" => "<=",
            "<<" => "<<",
            "+" => "+",
            "-" => "-",
            "*" => "*",
            "/" => "/",
            "%" => "%",
            "instanceof" => "instanceof",
            ">" => return self.peek_greater(),
            _ => return None,
        };
        let prec = match op {
            "||" => 1,
            "&&" => 2,
            "|" => 3,
            "^" => 4,
            "&" => 5,
            "==" | "!=" => 6,
            "<" | "<=" | "instanceof" => 7,
            "<<" => 8,
            "+" | "-" => 9,
            _ => 10,
        };
        Some((op, prec, 1))
    }

    fn peek_greater(&self) -> Option<(&'static str, u8, usize)> {
        let p = self.pos;
        let gt = |i: usize| self.text_at(i) == ">";
        let eq = |i: usize| self.text_at(i) == "=";
        if gt(p + 1) && self.glued(p) {
            if gt(p + 2) && self.glued(p + 1) {
                if eq(p + 3) && self.glued(p + 2) {
                    return None;
                }
                return Some((">>>", 8, 3));
            }
            if eq(p + 2) && self.glued(p + 1) {
                return None;
            }
            return Some((">>", 8, 2));
        }
        if eq(p + 1) && self.glued(p) {
            return Some((">=", 7, 2));
        }
        Some((">", 7, 1))
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Ex> {
        let mut lhs = self.unary()?;
        while let Some((op, prec, ntoks)) = self.peek_binop() {
            if prec < min_prec {
                break;
            }
            let op_span = Span::new(self.toks[self.pos].span.start, self.toks[self.pos + ntoks - 1].span.end);
            self.pos += ntoks;
            if op == "instanceof" {
                self.modifiers()?;
                self.ty()?;
                if self.at("(") {
                    self.skip_group();
                }
                if self.at_ident() {
                    self.pos += 1;
                }
                lhs = Ex { start: lhs.start, end: self.prev_end(), is_null: false };
                continue;
            }
            let rhs = self.binary(prec + 1)?;
            self.binary_site(op, op_span, &lhs, &rhs);
            lhs = Ex { start: lhs.start, end: rhs.end, is_null: false };
        }
        Ok(lhs)
    }

    fn binary_site(&mut self, op: &str, op_span: Span, lhs: &Ex, rhs: &Ex) {
        let kind = match op {
            "+" | "-" | "*" | "/" | "%" => SiteKind::BinaryArith,
            "&" | "|" | "^" => SiteKind::Logical,
            "<<" | ">>" | ">>>" => SiteKind::Shift,
            "&&" | "||" => SiteKind::Conditional,
            "<" | ">" | "<=" | ">=" => SiteKind::Relational,
            _ if lhs.is_null || rhs.is_null => {
                // Cover the operator and the `null` literal when nothing but
                // whitespace separates them; otherwise the operator alone.
                let wide =
                    if rhs.is_null { Span::new(op_span.start, rhs.end) } else { Span::new(lhs.start, op_span.end) };
                let span = if self.masks.iter().any(|m| m.overlaps(&wide)) { op_span } else { wide };
                self.site(SiteKind::NullCheck, span);
                return;
            }
            _ => SiteKind::Relational,
        };
        self.site(kind, op_span);
    }

    fn unary(&mut self) -> PResult<Ex> {
        let start = self.offset();
        match self.cur() {
            "++" | "--" => {
                let op = self.toks[self.pos].span;
                self.pos += 1;
                self.site(SiteKind::ShortcutArith, op);
                let e = self.unary()?;
                Ok(Ex { start, end: e.end, is_null: false })
            }
            "+" | "-" => {
                let op = self.toks[self.pos].span;
                self.pos += 1;
                self.site(SiteKind::UnaryArith, op);
                let e = self.unary()?;
                Ok(Ex { start, end: e.end, is_null: false })
            }
            "!" | "~" => {
                self.pos += 1;
                let e = self.unary()?;
                Ok(Ex { start, end: e.end, is_null: false })
            }
            "(" if self.kind_at(self.pos) == Some(TokenKind::Punct) && self.cast_ahead() => {
                self.pos += 1;
                self.ty()?;
                while self.eat("&") {
                    self.ty()?;
                }
                self.expect(")")?;
                let e = if self.lambda_ahead() { self.lambda()? } else { self.unary()? };
                Ok(Ex { start, end: e.end, is_null: false })
            }
            _ => self.postfix(),
        }
    }

    fn cast_ahead(&mut self) -> bool {
        let save = self.pos;
        let close = self.matching[self.pos];
        let result = self
            .speculate(|p| {
                p.pos += 1;
                let ty = p.ty()?;
                while p.eat("&") {
                    p.ty()?;
                }
                if p.pos != close {
                    return p.fail("not a cast");
                }
                p.pos += 1;
                Ok(ty)
            })
            .is_some_and(|ty| {
                let base = ty.trim_end_matches("[]");
                if PRIMITIVES.contains(&base) {
                    return true;
                }
                match self.kind_at(self.pos) {
                    Some(TokenKind::Ident | TokenKind::Literal | TokenKind::Null) => true,
                    Some(TokenKind::Keyword) => {
                        matches!(self.cur(), "this" | "super" | "new" | "switch") || PRIMITIVES.contains(&self.cur())
                    }
                    Some(TokenKind::Punct) => matches!(self.cur(), "(" | "!" | "~"),
                    None => false,
                }
            });
        self.pos = save;
        result
    }

    fn postfix(&mut self) -> PResult<Ex> {
        let mut e = self.primary()?;
        loop {
            if self.at(".") {
                self.pos += 1;
                if self.at("<") {
                    self.type_args()?;
                }
                if self.at("new") {
                    // qualified inner creation `outer.new Inner()`: not a site
                    self.creator(false)?;
                } else if self.eat("this") || self.eat("class") {
                } else if self.eat("super") {
                    if self.at("(") {
                        self.arguments()?;
                    }
                } else {
                    self.ident()?;
                    if self.at("(") {
                        self.arguments()?;
                    }
                }
            } else if self.at("[") {
                if self.peek_is(1, "]") {
                    self.pos += 2;
                } else {
                    self.pos += 1;
                    self.expr()?;
                    self.expect("]")?;
                }
            } else if self.eat("::") {
                if self.at("<") {
                    self.type_args()?;
                }
                if !self.eat("new") {
                    self.ident()?;
                }
            } else {
                break;
            }
            e = Ex { start: e.start, end: self.prev_end(), is_null: false };
        }
        while self.at("++") || self.at("--") {
            let op = self.toks[self.pos].span;
            self.site(SiteKind::ShortcutArith, op);
            self.pos += 1;
            e = Ex { start: e.start, end: self.prev_end(), is_null: false };
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Ex> {
        let start = self.offset();
        let ex = |p: &Self, is_null| Ok(Ex { start, end: p.prev_end(), is_null });
        match self.kind_at(self.pos) {
            None => self.fail("expected expression"),
            Some(TokenKind::Literal) => {
                self.pos += 1;
                ex(self, false)
            }
            Some(TokenKind::Null) => {
                self.pos += 1;
                ex(self, true)
            }
            Some(TokenKind::Ident) => {
                self.pos += 1;
                if self.at("(") {
                    self.arguments()?;
                }
                ex(self, false)
            }
            Some(TokenKind::Keyword | TokenKind::Punct) => match self.cur() {
                "(" => {
                    self.pos += 1;
                    let inner = self.expr()?;
                    self.expect(")")?;
                    ex(self, inner.is_null)
                }
                "this" | "super" => {
                    self.pos += 1;
                    if self.at("(") {
                        self.arguments()?;
                    }
                    ex(self, false)
                }
                "new" => {
                    self.creator(true)?;
                    ex(self, false)
                }
                "switch" => {
                    self.pos += 1;
                    self.paren_expr()?;
                    self.switch_body()?;
                    ex(self, false)
                }
                t if PRIMITIVES.contains(&t) || t == "void" => {
                    // `int.class`, `int[]::new`
                    self.pos += 1;
                    while self.at("[") && self.peek_is(1, "]") {
                        self.pos += 2;
                    }
                    if !(self.at(".") || self.at("::")) {
                        return self.fail("expected `.class` or `::`");
                    }
                    ex(self, false)
                }
                _ => self.fail("expected expression"),
            },
        }
    }

    fn arguments(&mut self) -> PResult<()> {
        self.expect("(")?;
        while !self.at(")") {
            self.expr()?;
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(())
    }

    /// `new` expression; records a site covering the whole creation.
    fn creator(&mut self, record: bool) -> PResult<()> {
        let start = self.offset();
        self.expect("new")?;
        if self.at("<") {
            self.type_args()?;
        }
        while self.at_annotation() {
            self.annotation()?;
        }
        if self.kind_at(self.pos) == Some(TokenKind::Keyword) && PRIMITIVES.contains(&self.cur()) {
            self.pos += 1;
        } else {
            self.ident()?;
            if self.at("<") {
                self.type_args()?;
            }
            while self.eat(".") {
                while self.at_annotation() {
                    self.annotation()?;
                }
                self.ident()?;
                if self.at("<") {
                    self.type_args()?;
                }
            }
        }
        if self.at("[") {
            while self.eat("[") {
                if !self.eat("]") {
                    self.expr()?;
                    self.expect("]")?;
                }
            }
            if self.at("{") {
                self.array_initializer()?;
            }
        } else {
            self.arguments()?;
            if self.at("{") {
                self.frames.push(Frame::Other);
                let r = self.class_body("", false);
                self.frames.pop();
                r?;
            }
        }
        if record {
            self.site(SiteKind::NewExpr, Span::new(start, self.prev_end()));
        }
        Ok(())
    }
}

//! Tokenizer for Java source.
//!
//! Comments and string/char literals are recorded as mask regions so no
//! mutation site can ever be placed inside them. The `>` character is always
//! emitted as a single-character token; the expression parser glues adjacent
//! `>` tokens back into shift and comparison operators, which keeps nested
//! generic arguments (`List<List<String>>`) trivial to close.

use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    /// Numeric, string, char, text-block and boolean literals.
    Literal,
    Null,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("lexical error at byte {offset}: {message}")]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    /// Comment and string/char literal regions, in source order.
    pub masks: Vec<Span>,
    /// For every bracket token (`(`, `[`, `{` and their closers), the index
    /// of the matching bracket token. `usize::MAX` for non-brackets.
    pub matching: Vec<usize>,
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

// Longest first so that maximal munch works with a linear scan.
const PUNCTS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&",
    "|", "^", "%",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

pub fn tokenize(text: &str) -> Result<Lexed, LexError> {
    let bytes = text.as_bytes();
    let mut out = Lexed::default();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b == b'/' && bytes.get(i + 1) == Some(&b'/') {
            let end = text[i..].find('\n').map_or(bytes.len(), |n| i + n);
            out.masks.push(Span::new(i, end));
            i = end;
            continue;
        }
        if b == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let end =
                text[i + 2..].find("*/").map(|n| i + 2 + n + 2).ok_or_else(|| err(i, "unterminated block comment"))?;
            out.masks.push(Span::new(i, end));
            i = end;
            continue;
        }
        if text[i..].starts_with("\"\"\"") {
            let end = scan_text_block(bytes, i)?;
            push_masked(&mut out, TokenKind::Literal, i, end);
            i = end;
            continue;
        }
        if b == b'"' || b == b'\'' {
            let end = scan_quoted(bytes, i, b)?;
            push_masked(&mut out, TokenKind::Literal, i, end);
            i = end;
            continue;
        }
        if b.is_ascii_digit() || (b == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let end = scan_number(bytes, i);
            out.tokens.push(Token { kind: TokenKind::Literal, span: Span::new(i, end) });
            i = end;
            continue;
        }
        let ch = text[i..].chars().next().expect("in bounds");
        if is_ident_start(ch) {
            let mut end = i + ch.len_utf8();
            for c in text[end..].chars() {
                if is_ident_part(c) {
                    end += c.len_utf8();
                } else {
                    break;
                }
            }
            let word = &text[i..end];
            let kind = match word {
                "null" => TokenKind::Null,
                "true" | "false" => TokenKind::Literal,
                w if is_keyword(w) => TokenKind::Keyword,
                _ => TokenKind::Ident,
            };
            out.tokens.push(Token { kind, span: Span::new(i, end) });
            i = end;
            continue;
        }
        match PUNCTS.iter().find(|p| text[i..].starts_with(**p)) {
            Some(p) => {
                out.tokens.push(Token { kind: TokenKind::Punct, span: Span::new(i, i + p.len()) });
                i += p.len();
            }
            None => return Err(err(i, &format!("unexpected character {ch:?}"))),
        }
    }
    out.matching = match_brackets(text, &out.tokens)?;
    Ok(out)
}

fn push_masked(out: &mut Lexed, kind: TokenKind, start: usize, end: usize) {
    let span = Span::new(start, end);
    out.tokens.push(Token { kind, span });
    out.masks.push(span);
}

fn err(offset: usize, message: &str) -> LexError {
    LexError { offset, message: message.to_string() }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_part(c: char) -> bool {
    is_ident_start(c) || c.is_alphanumeric()
}

fn scan_quoted(bytes: &[u8], start: usize, quote: u8) -> Result<usize, LexError> {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => break,
            c if c == quote => return Ok(i + 1),
            _ => i += 1,
        }
    }
    Err(err(start, "unterminated literal"))
}

fn scan_text_block(bytes: &[u8], start: usize) -> Result<usize, LexError> {
    let mut i = start + 3;
    while i < bytes.len() {
        if bytes[i] == b'\\' {
            i += 2;
            continue;
        }
        if bytes[i..].starts_with(b"\"\"\"") {
            return Ok(i + 3);
        }
        i += 1;
    }
    Err(err(start, "unterminated text block"))
}

fn scan_number(bytes: &[u8], start: usize) -> usize {
    let mut i = start;
    let hex = bytes[i] == b'0' && matches!(bytes.get(i + 1), Some(b'x' | b'X'));
    if hex {
        i += 2;
    }
    while i < bytes.len() {
        let c = bytes[i];
        let exponent = if hex { matches!(c, b'p' | b'P') } else { matches!(c, b'e' | b'E') };
        if exponent && matches!(bytes.get(i + 1), Some(b'+' | b'-')) {
            i += 2;
        } else if c.is_ascii_alphanumeric() || c == b'_' || (c == b'.' && !hex && fraction_follows(bytes.get(i + 1))) {
            i += 1;
        } else {
            break;
        }
    }
    i
}

// `1.5` and `1.` are numbers; `1..` and `1.foo` are not.
fn fraction_follows(next: Option<&u8>) -> bool {
    match next {
        None => true,
        Some(n) => n.is_ascii_digit() || !(n.is_ascii_alphabetic() || *n == b'_' || *n == b'.'),
    }
}

fn match_brackets(text: &str, tokens: &[Token]) -> Result<Vec<usize>, LexError> {
    let mut matching = vec![usize::MAX; tokens.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (idx, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Punct {
            continue;
        }
        let s = tok.span.slice(text);
        match s {
            "(" | "[" | "{" => stack.push(idx),
            ")" | "]" | "}" => {
                let open = stack.pop().ok_or_else(|| err(tok.span.start, &format!("unbalanced `{s}`")))?;
                let expected = match tokens[open].span.slice(text) {
                    "(" => ")",
                    "[" => "]",
                    _ => "}",
                };
                if expected != s {
                    return Err(err(tok.span.start, &format!("expected `{expected}`, found `{s}`")));
                }
                matching[open] = idx;
                matching[idx] = open;
            }
            _ => {}
        }
    }
    if let Some(open) = stack.pop() {
        return Err(err(tokens[open].span.start, "unclosed bracket"));
    }
    Ok(matching)
}

//! Tokenizer for G source.
//!
//! Comments (`//`, `/* */`) and whitespace are dropped; every token carries
//! the location of its first character. The token stream always ends with a
//! single `Eof` token.

use crate::diag::{Diagnostic, Loc};
use std::rc::Rc;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Kw(Kw),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Assign,
    Comma,
    Semi,
    Colon,
    Question,
    Dot,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    PlusPlus,
    MinusMinus,
    Shl,
    Amp,
    At,
    Bang,
    Tilde,
    OpenInst,
    CloseInst,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    Fun,
    Concept,
    Model,
    Where,
    Refines,
    Require,
    Type,
    Let,
    While,
    For,
    Return,
    Struct,
    Class,
    Union,
    Module,
    Scope,
    Import,
    Public,
    Private,
    New,
    Use,
    If,
    Else,
    And,
    Or,
    Not,
    True,
    False,
}

impl Kw {
    pub fn as_str(self) -> &'static str {
        match self {
            Kw::Fun => "fun",
            Kw::Concept => "concept",
            Kw::Model => "model",
            Kw::Where => "where",
            Kw::Refines => "refines",
            Kw::Require => "require",
            Kw::Type => "type",
            Kw::Let => "let",
            Kw::While => "while",
            Kw::For => "for",
            Kw::Return => "return",
            Kw::Struct => "struct",
            Kw::Class => "class",
            Kw::Union => "union",
            Kw::Module => "module",
            Kw::Scope => "scope",
            Kw::Import => "import",
            Kw::Public => "public",
            Kw::Private => "private",
            Kw::New => "new",
            Kw::Use => "use",
            Kw::If => "if",
            Kw::Else => "else",
            Kw::And => "and",
            Kw::Or => "or",
            Kw::Not => "not",
            Kw::True => "true",
            Kw::False => "false",
        }
    }
}

fn keyword(s: &str) -> Option<Kw> {
    Some(match s {
        "fun" => Kw::Fun,
        "concept" => Kw::Concept,
        "model" => Kw::Model,
        "where" => Kw::Where,
        "refines" => Kw::Refines,
        "require" => Kw::Require,
        "type" => Kw::Type,
        "let" => Kw::Let,
        "while" => Kw::While,
        "for" => Kw::For,
        "return" => Kw::Return,
        "struct" => Kw::Struct,
        "class" => Kw::Class,
        "union" => Kw::Union,
        "module" => Kw::Module,
        "scope" => Kw::Scope,
        "import" => Kw::Import,
        "public" => Kw::Public,
        "private" => Kw::Private,
        "new" => Kw::New,
        "use" => Kw::Use,
        "if" => Kw::If,
        "else" => Kw::Else,
        "and" => Kw::And,
        "or" => Kw::Or,
        "not" => Kw::Not,
        "true" => Kw::True,
        "false" => Kw::False,
        _ => return None,
    })
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.tok {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer literal `{n}`"),
            Tok::Float(x) => format!("float literal `{x}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Kw(k) => format!("`{}`", k.as_str()),
            Tok::Eof => "end of input".to_string(),
            t => format!("`{}`", punct_str(t)),
        }
    }
}

pub fn punct_str(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Lt => "<",
        Tok::Gt => ">",
        Tok::Le => "<=",
        Tok::Ge => ">=",
        Tok::EqEq => "==",
        Tok::Ne => "!=",
        Tok::Assign => "=",
        Tok::Comma => ",",
        Tok::Semi => ";",
        Tok::Colon => ":",
        Tok::Question => "?",
        Tok::Dot => ".",
        Tok::Arrow => "->",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Percent => "%",
        Tok::PlusPlus => "++",
        Tok::MinusMinus => "--",
        Tok::Shl => "<<",
        Tok::Amp => "&",
        Tok::At => "@",
        Tok::Bang => "!",
        Tok::Tilde => "~",
        Tok::OpenInst => "<|",
        Tok::CloseInst => "|>",
        _ => "?",
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    file: Rc<str>,
}

impl<'a> Lexer<'a> {
    fn loc(&self) -> Loc {
        Loc::new(self.file.clone(), self.line, self.col)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'/') if self.peek2() == Some(b'*') => {
                    let start = self.loc();
                    self.bump();
                    self.bump();
                    let mut closed = false;
                    while let Some(c) = self.bump() {
                        if c == b'*' && self.peek() == Some(b'/') {
                            self.bump();
                            closed = true;
                            break;
                        }
                    }
                    if !closed {
                        return Err(Diagnostic::error(start, "unterminated comment"));
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn lex_string(&mut self, start: Loc) -> Result<Tok, Diagnostic> {
        // opening quote already consumed
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(Diagnostic::error(start, "unterminated string literal")),
                Some(b'"') => return Ok(Tok::Str(s)),
                Some(b'\n') => return Err(Diagnostic::error(start, "unterminated string literal")),
                Some(b'\\') => match self.bump() {
                    Some(b'n') => s.push('\n'),
                    Some(b't') => s.push('\t'),
                    Some(b'r') => s.push('\r'),
                    Some(b'\\') => s.push('\\'),
                    Some(b'"') => s.push('"'),
                    Some(b'0') => s.push('\0'),
                    other => {
                        return Err(Diagnostic::error(
                            start,
                            format!(
                                "illegal escape sequence `\\{}` in string literal",
                                other.map(|c| c as char).unwrap_or(' ')
                            ),
                        ))
                    }
                },
                Some(c) => s.push(c as char),
            }
        }
    }

    fn lex_number(&mut self, first: u8, loc: Loc) -> Result<Tok, Diagnostic> {
        let mut text = String::new();
        text.push(first as char);
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                text.push(c as char);
                self.bump();
            } else {
                break;
            }
        }
        // A decimal point makes a float literal, but only when followed by a
        // digit so member access on an integer-valued expression stays intact.
        if self.peek() == Some(b'.') && self.peek2().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            text.push('.');
            self.bump();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    text.push(c as char);
                    self.bump();
                } else {
                    break;
                }
            }
            let v: f64 = text
                .parse()
                .map_err(|_| Diagnostic::error(loc.clone(), "malformed float literal"))?;
            Ok(Tok::Float(v))
        } else {
            let v: i64 = text
                .parse()
                .map_err(|_| Diagnostic::error(loc.clone(), "integer literal out of range"))?;
            Ok(Tok::Int(v))
        }
    }
}

/// Tokenizes `source`. On success the result ends with an `Eof` token.
pub fn tokenize(file: &str, source: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lx = Lexer {
        src: source.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
        file: Rc::from(file),
    };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia()?;
        let loc = lx.loc();
        let c = match lx.bump() {
            None => {
                out.push(Token { tok: Tok::Eof, loc });
                return Ok(out);
            }
            Some(c) => c,
        };
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b',' => Tok::Comma,
            b';' => Tok::Semi,
            b'?' => Tok::Question,
            b'.' => Tok::Dot,
            b'~' => Tok::Tilde,
            b'@' => Tok::At,
            b'&' => Tok::Amp,
            b'%' => Tok::Percent,
            b'/' => Tok::Slash,
            b'*' => Tok::Star,
            b':' => Tok::Colon,
            b'+' => {
                if lx.peek() == Some(b'+') {
                    lx.bump();
                    Tok::PlusPlus
                } else {
                    Tok::Plus
                }
            }
            b'-' => {
                if lx.peek() == Some(b'-') {
                    lx.bump();
                    Tok::MinusMinus
                } else if lx.peek() == Some(b'>') {
                    lx.bump();
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            b'=' => {
                if lx.peek() == Some(b'=') {
                    lx.bump();
                    Tok::EqEq
                } else {
                    Tok::Assign
                }
            }
            b'!' => {
                if lx.peek() == Some(b'=') {
                    lx.bump();
                    Tok::Ne
                } else {
                    Tok::Bang
                }
            }
            b'<' => {
                if lx.peek() == Some(b'=') {
                    lx.bump();
                    Tok::Le
                } else if lx.peek() == Some(b'<') {
                    lx.bump();
                    Tok::Shl
                } else if lx.peek() == Some(b'|') {
                    lx.bump();
                    Tok::OpenInst
                } else {
                    Tok::Lt
                }
            }
            b'>' => {
                if lx.peek() == Some(b'=') {
                    lx.bump();
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            b'|' => {
                if lx.peek() == Some(b'>') {
                    lx.bump();
                    Tok::CloseInst
                } else {
                    return Err(Diagnostic::error(loc, "illegal character `|`"));
                }
            }
            b'"' => lx.lex_string(loc.clone())?,
            c if c.is_ascii_digit() => lx.lex_number(c, loc.clone())?,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut s = String::new();
                s.push(c as char);
                while let Some(c) = lx.peek() {
                    if c.is_ascii_alphanumeric() || c == b'_' {
                        s.push(c as char);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                match keyword(&s) {
                    Some(k) => Tok::Kw(k),
                    None => Tok::Ident(s),
                }
            }
            other => {
                return Err(Diagnostic::error(
                    loc,
                    format!("illegal character `{}`", other as char),
                ))
            }
        };
        out.push(Token { tok, loc });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_the_identity_function() {
        let toks = tokenize("t.g", "fun id<U>(U a) -> U { return a; }").unwrap();
        // 16 content tokens plus the terminating Eof.
        assert_eq!(toks.len(), 17);
        assert_eq!(toks[0].tok, Tok::Kw(Kw::Fun));
        assert_eq!(toks[1].tok, Tok::Ident("id".into()));
        assert_eq!(toks[2].tok, Tok::Lt);
        assert_eq!(toks.last().unwrap().tok, Tok::Eof);
    }

    #[test]
    fn empty_input_has_no_content_tokens() {
        let toks = tokenize("t.g", "").unwrap();
        assert!(toks.iter().all(|t| t.tok == Tok::Eof));
        assert_eq!(toks.len(), 1);
    }

    #[test]
    fn unterminated_comment_is_a_lexical_error() {
        let err = tokenize("t.g", "/* open").unwrap_err();
        assert!(err.message.contains("unterminated comment"));
    }

    #[test]
    fn multi_char_operators() {
        let toks = tokenize("t.g", "-> <| |> == != ++ -- << <= >=").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Arrow,
                Tok::OpenInst,
                Tok::CloseInst,
                Tok::EqEq,
                Tok::Ne,
                Tok::PlusPlus,
                Tok::MinusMinus,
                Tok::Shl,
                Tok::Le,
                Tok::Ge,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn adjacent_angle_brackets_are_separate_tokens() {
        let toks = tokenize("t.g", "list<list<int>>").unwrap();
        let gts = toks.iter().filter(|t| t.tok == Tok::Gt).count();
        assert_eq!(gts, 2);
    }

    #[test]
    fn locations_are_one_based() {
        let toks = tokenize("t.g", "a\n  b").unwrap();
        assert_eq!((toks[0].loc.line, toks[0].loc.column), (1, 1));
        assert_eq!((toks[1].loc.line, toks[1].loc.column), (2, 3));
    }

    #[test]
    fn float_and_int_literals() {
        let toks = tokenize("t.g", "1 2.0 -1.5").unwrap();
        assert_eq!(toks[0].tok, Tok::Int(1));
        assert_eq!(toks[1].tok, Tok::Float(2.0));
        assert_eq!(toks[2].tok, Tok::Minus);
        assert_eq!(toks[3].tok, Tok::Float(1.5));
    }
}

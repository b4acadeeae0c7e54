use crate::error::{ParseError, Pos};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Numeric literal kept as text; the parser decides integer vs real.
    Number(String),
    Arrow,
    Bang,
    Question,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Diamond,
    AndAnd,
    OrOr,
    Plus,
    Minus,
    Star,
    Slash,
    Dot,
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Arrow => "->",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Diamond => "<>",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Dot => ".",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Splits `src` into tokens. `#` starts a comment, `;` acts as a line break,
/// and `\r` is plain whitespace so CRLF and LF inputs lex identically.
pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let next = chars.get(i + 1).copied();
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, pos });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                out.push(Token { tok: Tok::Newline, pos });
                i += 1;
                line += 1;
                col = 1;
            }
            ';' => push(Tok::Newline, 1, &mut i, &mut col),
            ' ' | '\t' | '\r' | '\u{feff}' => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token { tok: Tok::Ident(s), pos });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token { tok: Tok::Number(s), pos });
            }
            '-' if next == Some('>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '<' if next == Some('>') => push(Tok::Diamond, 2, &mut i, &mut col),
            '<' if next == Some('=') => push(Tok::Le, 2, &mut i, &mut col),
            '>' if next == Some('=') => push(Tok::Ge, 2, &mut i, &mut col),
            '=' if next == Some('=') => push(Tok::EqEq, 2, &mut i, &mut col),
            '!' if next == Some('=') => push(Tok::NotEq, 2, &mut i, &mut col),
            '&' if next == Some('&') => push(Tok::AndAnd, 2, &mut i, &mut col),
            '|' if next == Some('|') => push(Tok::OrOr, 2, &mut i, &mut col),
            _ => {
                let tok = match c {
                    '!' => Tok::Bang,
                    '?' => Tok::Question,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '=' => Tok::Assign,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '.' => Tok::Dot,
                    other => return Err(ParseError::syntax(pos, format!("unexpected character `{other}`"))),
                };
                push(tok, 1, &mut i, &mut col);
            }
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

/// Token cursor shared by the model and query parsers.
pub struct Cursor {
    toks: Vec<Token>,
    at: usize,
    /// Newlines are skipped while this is positive (inside braces).
    pub skip_newlines: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, at: 0, skip_newlines: 0 }
    }

    fn settle(&mut self) {
        if self.skip_newlines > 0 {
            while self.toks[self.at].tok == Tok::Newline {
                self.at += 1;
            }
        }
    }

    pub fn peek(&mut self) -> &Token {
        self.settle();
        &self.toks[self.at]
    }

    pub fn pos(&mut self) -> Pos {
        self.peek().pos
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Token {
        self.settle();
        let t = self.toks[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    pub fn at(&mut self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    pub fn at_keyword(&mut self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn unexpected(&mut self, wanted: &str) -> ParseError {
        let t = self.peek().clone();
        ParseError::syntax(t.pos, format!("expected {wanted}, found {}", t.tok.describe()))
    }

    pub fn expect(&mut self, tok: &Tok, wanted: &str) -> Result<Pos, ParseError> {
        if self.at(tok) {
            Ok(self.next().pos)
        } else {
            Err(self.unexpected(wanted))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        if self.at_keyword(kw) {
            Ok(self.next().pos)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self, wanted: &str) -> Result<(String, Pos), ParseError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                let pos = self.next().pos;
                Ok((s, pos))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    pub fn nat(&mut self, wanted: &str) -> Result<u64, ParseError> {
        match self.peek().tok.clone() {
            Tok::Number(s) => {
                let pos = self.pos();
                let v =
                    s.parse::<u64>().map_err(|_| ParseError::syntax(pos, format!("expected {wanted}, found `{s}`")))?;
                self.next();
                Ok(v)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    /// Integer literal with optional leading minus.
    pub fn int(&mut self, wanted: &str) -> Result<i64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        let pos = self.pos();
        let v = self.nat(wanted)?;
        let v = i64::try_from(v).map_err(|_| ParseError::syntax(pos, "integer too large"))?;
        Ok(if neg { -v } else { v })
    }

    pub fn real(&mut self, wanted: &str) -> Result<f64, ParseError> {
        match self.peek().tok.clone() {
            Tok::Number(s) => {
                let pos = self.pos();
                let v =
                    s.parse::<f64>().map_err(|_| ParseError::syntax(pos, format!("expected {wanted}, found `{s}`")))?;
                self.next();
                Ok(v)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    pub fn end_of_line(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Newline => {
                self.next();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of line")),
        }
    }

    pub fn skip_blank_lines(&mut self) {
        while self.at(&Tok::Newline) {
            self.next();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_comments() {
        assert_eq!(
            kinds("a->b <> <= # hi\n[]"),
            vec![
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("b".into()),
                Tok::Diamond,
                Tok::Le,
                Tok::Newline,
                Tok::LBracket,
                Tok::RBracket,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn crlf_matches_lf() {
        let a: Vec<Tok> = kinds("x y\r\nz\r\n");
        let b: Vec<Tok> = kinds("x y\nz\n");
        assert_eq!(a, b);
    }

    #[test]
    fn dotted_names_and_reals() {
        assert_eq!(
            kinds("T.T3 0.5 1e-3"),
            vec![
                Tok::Ident("T".into()),
                Tok::Dot,
                Tok::Ident("T3".into()),
                Tok::Number("0.5".into()),
                Tok::Number("1e-3".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn bad_character_reports_position() {
        let err = lex("ok\n  $").unwrap_err();
        assert_eq!(err, ParseError::syntax(Pos { line: 2, col: 3 }, "unexpected character `$`"));
    }
}

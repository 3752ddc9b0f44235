//! Tokenizer for the `.geo` format. Every token carries the 1-based line and
//! column of its first character.

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Unsigned integer or decimal literal, kept as source text.
    Number(String),
    /// A `d/d<coord>` basis symbol, holding the coordinate name.
    Partial(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl Tok {
    /// Source-ish rendering for error messages.
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Number(s) => format!("'{s}'"),
            Tok::Partial(s) => format!("'d/d{s}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Semi => "';'".into(),
            Tok::Colon => "':'".into(),
            Tok::Eq => "'='".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    column: usize,
}

impl Scanner<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<u8> {
        self.src.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

/// Tokenize the whole source. The returned stream always ends with `Eof`.
pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut s = Scanner {
        src: src.as_bytes(),
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    loop {
        s.skip_trivia();
        let (line, column) = (s.line, s.column);
        let Some(c) = s.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                line,
                column,
            });
            return Ok(out);
        };
        let tok = match c {
            b'(' => {
                s.bump();
                Tok::LParen
            }
            b')' => {
                s.bump();
                Tok::RParen
            }
            b'{' => {
                s.bump();
                Tok::LBrace
            }
            b'}' => {
                s.bump();
                Tok::RBrace
            }
            b'[' => {
                s.bump();
                Tok::LBracket
            }
            b']' => {
                s.bump();
                Tok::RBracket
            }
            b',' => {
                s.bump();
                Tok::Comma
            }
            b';' => {
                s.bump();
                Tok::Semi
            }
            b':' => {
                s.bump();
                Tok::Colon
            }
            b'=' => {
                s.bump();
                Tok::Eq
            }
            b'+' => {
                s.bump();
                Tok::Plus
            }
            b'-' => {
                s.bump();
                Tok::Minus
            }
            b'*' => {
                s.bump();
                Tok::Star
            }
            b'/' => {
                s.bump();
                Tok::Slash
            }
            b'^' => {
                s.bump();
                Tok::Caret
            }
            b'0'..=b'9' => {
                let mut text = String::new();
                while let Some(c) = s.peek() {
                    if c.is_ascii_digit() {
                        text.push(c as char);
                        s.bump();
                    } else {
                        break;
                    }
                }
                if s.peek() == Some(b'.') && s.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
                    text.push('.');
                    s.bump();
                    while let Some(c) = s.peek() {
                        if c.is_ascii_digit() {
                            text.push(c as char);
                            s.bump();
                        } else {
                            break;
                        }
                    }
                }
                Tok::Number(text)
            }
            c if is_ident_start(c) => {
                // `d/d<coord>` is a single basis token when written without
                // spaces; a bare `d` followed by `/` stays an identifier.
                if c == b'd'
                    && s.peek_at(1) == Some(b'/')
                    && s.peek_at(2) == Some(b'd')
                    && s.peek_at(3).is_some_and(is_ident_start)
                {
                    s.bump();
                    s.bump();
                    s.bump();
                    let mut name = String::new();
                    while let Some(c) = s.peek() {
                        if is_ident_char(c) {
                            name.push(c as char);
                            s.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Partial(name)
                } else {
                    let mut name = String::new();
                    while let Some(c) = s.peek() {
                        if is_ident_char(c) {
                            name.push(c as char);
                            s.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(name)
                }
            }
            other => {
                return Err(ParseError {
                    message: format!("unexpected character '{}'", other as char),
                    line,
                    column,
                    token: format!("'{}'", other as char),
                });
            }
        };
        out.push(Token { tok, line, column });
    }
}

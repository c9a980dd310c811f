use crate::frontend::token::{keyword, Token, TokenKind};
use crate::span::{FileId, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

struct Lexer<'s> {
    src: &'s [u8],
    pos: usize,
    line: u32,
    col: u32,
    file: FileId,
}

/// Splits a source file into tokens, skipping `//` and `/* */` comments
/// as trivia. The stream always ends with an end-of-input token.
pub fn lex(file: FileId, source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        src: source.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
        file,
    };
    let mut tokens = Vec::new();
    loop {
        lx.skip_trivia()?;
        let span = lx.span();
        let offset = lx.pos;
        let Some(c) = lx.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                lexeme: String::new(),
                span,
                offset,
            });
            return Ok(tokens);
        };
        let kind = match c {
            b'{' => lx.single(TokenKind::LBrace),
            b'}' => lx.single(TokenKind::RBrace),
            b'(' => lx.single(TokenKind::LParen),
            b')' => lx.single(TokenKind::RParen),
            b',' => lx.single(TokenKind::Comma),
            b';' => lx.single(TokenKind::Semi),
            b'.' => lx.single(TokenKind::Dot),
            b'+' => lx.single(TokenKind::Plus),
            b'=' => {
                lx.bump();
                if lx.peek() == Some(b'=') {
                    lx.bump();
                    TokenKind::EqEq
                } else {
                    TokenKind::Assign
                }
            }
            b'!' => {
                lx.bump();
                if lx.peek() == Some(b'=') {
                    lx.bump();
                    TokenKind::NotEq
                } else {
                    return Err(lx.error_at(span, "unexpected character '!'"));
                }
            }
            b'"' => {
                lx.string(span)?;
                TokenKind::StrLit
            }
            b'0'..=b'9' => {
                while matches!(lx.peek(), Some(b'0'..=b'9')) {
                    lx.bump();
                }
                let text = &source[offset..lx.pos];
                if text.parse::<i64>().is_err() {
                    return Err(lx.error_at(span, "integer literal out of range"));
                }
                TokenKind::IntLit
            }
            c if c == b'_' || c.is_ascii_alphabetic() => {
                while matches!(lx.peek(), Some(b'_') | Some(b'0'..=b'9')) || lx.peek_alpha() {
                    lx.bump();
                }
                let word = &source[offset..lx.pos];
                keyword(word).unwrap_or(TokenKind::Ident)
            }
            other => {
                return Err(lx.error_at(span, &format!("unexpected character '{}'", other as char)));
            }
        };
        tokens.push(Token {
            kind,
            lexeme: source[offset..lx.pos].to_string(),
            span,
            offset,
        });
    }
}

impl<'s> Lexer<'s> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_alpha(&self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_alphabetic())
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += 1;
            if c == b'\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }

    fn span(&self) -> Span {
        Span::new(self.file, self.line, self.col)
    }

    fn single(&mut self, kind: TokenKind) -> TokenKind {
        self.bump();
        kind
    }

    fn error_at(&self, span: Span, message: &str) -> LexError {
        LexError {
            message: message.to_string(),
            span,
        }
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match self.peek() {
                Some(b' ') | Some(b'\t') | Some(b'\r') | Some(b'\n') => self.bump(),
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while !matches!(self.peek(), None | Some(b'\n')) {
                        self.bump();
                    }
                }
                Some(b'/') if self.peek2() == Some(b'*') => {
                    let start = self.span();
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek() {
                            None => return Err(self.error_at(start, "unterminated block comment")),
                            Some(b'*') if self.peek2() == Some(b'/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            _ => self.bump(),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn string(&mut self, start: Span) -> Result<(), LexError> {
        self.bump(); // opening quote
        loop {
            match self.peek() {
                None | Some(b'\n') => {
                    return Err(self.error_at(start, "unterminated string literal"))
                }
                Some(b'"') => {
                    self.bump();
                    return Ok(());
                }
                Some(b'\\') => {
                    self.bump();
                    match self.peek() {
                        Some(b'"') | Some(b'\\') | Some(b'n') | Some(b't') => self.bump(),
                        _ => return Err(self.error_at(start, "unknown escape in string literal")),
                    }
                }
                Some(_) => self.bump(),
            }
        }
    }
}

/// Decodes the escapes of a string literal lexeme (quotes included).
pub fn unescape(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

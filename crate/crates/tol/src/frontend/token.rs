use crate::span::Span;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TokenKind {
    Ident,
    IntLit,
    StrLit,
    // keywords
    Package,
    Class,
    Extends,
    Test,
    For,
    Resolve,
    Rename,
    Select,
    Unify,
    As,
    Public,
    Private,
    If,
    Else,
    Return,
    Assert,
    Print,
    New,
    Null,
    True,
    False,
    Instanceof,
    Super,
    Current,
    KwInt,
    KwBool,
    KwString,
    KwColor,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Assign,
    EqEq,
    NotEq,
    Plus,
    Eof,
}

impl TokenKind {
    /// Human-readable name used in "expected ..." diagnostics.
    pub fn describe(self) -> &'static str {
        match self {
            TokenKind::Ident => "identifier",
            TokenKind::IntLit => "integer literal",
            TokenKind::StrLit => "string literal",
            TokenKind::Package => "'package'",
            TokenKind::Class => "'class'",
            TokenKind::Extends => "'extends'",
            TokenKind::Test => "'test'",
            TokenKind::For => "'for'",
            TokenKind::Resolve => "'resolve'",
            TokenKind::Rename => "'rename'",
            TokenKind::Select => "'select'",
            TokenKind::Unify => "'unify'",
            TokenKind::As => "'as'",
            TokenKind::Public => "'public'",
            TokenKind::Private => "'private'",
            TokenKind::If => "'if'",
            TokenKind::Else => "'else'",
            TokenKind::Return => "'return'",
            TokenKind::Assert => "'assert'",
            TokenKind::Print => "'print'",
            TokenKind::New => "'new'",
            TokenKind::Null => "'null'",
            TokenKind::True => "'true'",
            TokenKind::False => "'false'",
            TokenKind::Instanceof => "'instanceof'",
            TokenKind::Super => "'super'",
            TokenKind::Current => "'Current'",
            TokenKind::KwInt => "'int'",
            TokenKind::KwBool => "'bool'",
            TokenKind::KwString => "'string'",
            TokenKind::KwColor => "'Color'",
            TokenKind::LBrace => "'{'",
            TokenKind::RBrace => "'}'",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::Comma => "','",
            TokenKind::Semi => "';'",
            TokenKind::Dot => "'.'",
            TokenKind::Assign => "'='",
            TokenKind::EqEq => "'=='",
            TokenKind::NotEq => "'!='",
            TokenKind::Plus => "'+'",
            TokenKind::Eof => "end of input",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
    /// Byte offset of the lexeme in its source file.
    pub offset: usize,
}

pub fn keyword(word: &str) -> Option<TokenKind> {
    let kind = match word {
        "package" => TokenKind::Package,
        "class" => TokenKind::Class,
        "extends" => TokenKind::Extends,
        "test" => TokenKind::Test,
        "for" => TokenKind::For,
        "resolve" => TokenKind::Resolve,
        "rename" => TokenKind::Rename,
        "select" => TokenKind::Select,
        "unify" => TokenKind::Unify,
        "as" => TokenKind::As,
        "public" => TokenKind::Public,
        "private" => TokenKind::Private,
        "if" => TokenKind::If,
        "else" => TokenKind::Else,
        "return" => TokenKind::Return,
        "assert" => TokenKind::Assert,
        "print" => TokenKind::Print,
        "new" => TokenKind::New,
        "null" => TokenKind::Null,
        "true" => TokenKind::True,
        "false" => TokenKind::False,
        "instanceof" => TokenKind::Instanceof,
        "super" => TokenKind::Super,
        "Current" => TokenKind::Current,
        "int" => TokenKind::KwInt,
        "bool" => TokenKind::KwBool,
        "string" => TokenKind::KwString,
        "Color" => TokenKind::KwColor,
        _ => return None,
    };
    Some(kind)
}

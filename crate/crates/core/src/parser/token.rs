use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Number,
    String,
    Operator,
    Newline,
    Indent,
    Dedent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Source text. For strings this is the unescaped value.
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Operator && self.text == op
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == kw
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Newline => f.write_str("end of line"),
            TokenKind::Indent => f.write_str("indent"),
            TokenKind::Dedent => f.write_str("dedent"),
            TokenKind::String => write!(f, "{:?}", self.text),
            _ => write!(f, "`{}`", self.text),
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "def", "for", "in", "if", "elif", "else", "with", "as", "and", "or", "not", "True", "False", "pass",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

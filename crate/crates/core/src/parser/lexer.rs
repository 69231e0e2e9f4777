//! Line-oriented tokenizer with Python-style indentation tracking.

use super::token::{is_keyword, Token, TokenKind};
use super::ParseError;

const MULTI_OPS: &[&str] = &["**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "->"];
const SINGLE_OPS: &str = "()[]{},:.+-*/%<>=@;";

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    tokens: Vec<Token>,
    indents: Vec<usize>,
    depth: usize,
}

/// Tokenizes kernel source.
///
/// Comments are dropped, newlines inside brackets are ignored and a trailing
/// backslash joins the next physical line. Indentation must use spaces.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        tokens: Vec::new(),
        indents: vec![0],
        depth: 0,
    };
    lx.run()?;
    Ok(lx.tokens)
}

impl Lexer {
    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, text: impl Into<String>, line: usize, column: usize) {
        self.tokens.push(Token {
            kind,
            text: text.into(),
            line,
            column,
        });
    }

    fn run(&mut self) -> Result<(), ParseError> {
        let mut line_start = true;
        while self.pos < self.chars.len() {
            if line_start && self.depth == 0 {
                line_start = false;
                if !self.handle_indent()? {
                    line_start = true;
                    continue;
                }
            }
            let c = self.peek(0).unwrap();
            let (line, col) = (self.line, self.col);
            match c {
                '#' => {
                    while let Some(ch) = self.peek(0) {
                        if ch == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '\\' if self.peek(1) == Some('\n') || (self.peek(1) == Some('\r') && self.peek(2) == Some('\n')) => {
                    self.bump();
                    if self.peek(0) == Some('\r') {
                        self.bump();
                    }
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    if self.depth == 0 {
                        self.end_logical_line(line, col);
                        line_start = true;
                    }
                }
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut word = String::new();
                    while let Some(ch) = self.peek(0) {
                        if ch.is_alphanumeric() || ch == '_' {
                            word.push(ch);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let kind = if is_keyword(&word) {
                        TokenKind::Keyword
                    } else {
                        TokenKind::Identifier
                    };
                    self.push(kind, word, line, col);
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) => {
                    let text = self.number();
                    self.push(TokenKind::Number, text, line, col);
                }
                '"' | '\'' => {
                    let s = self.string(c, line, col)?;
                    self.push(TokenKind::String, s, line, col);
                }
                _ => {
                    let two: String = self.chars[self.pos..(self.pos + 2).min(self.chars.len())].iter().collect();
                    if MULTI_OPS.contains(&two.as_str()) {
                        self.bump();
                        self.bump();
                        self.push(TokenKind::Operator, two, line, col);
                    } else if SINGLE_OPS.contains(c) {
                        self.bump();
                        match c {
                            '(' | '[' | '{' => self.depth += 1,
                            ')' | ']' | '}' => {
                                if self.depth == 0 {
                                    return Err(ParseError::Syntax {
                                        line,
                                        column: col,
                                        message: format!("unmatched `{c}`"),
                                    });
                                }
                                self.depth -= 1;
                            }
                            _ => {}
                        }
                        self.push(TokenKind::Operator, c.to_string(), line, col);
                    } else {
                        return Err(ParseError::UnexpectedChar { ch: c, line, column: col });
                    }
                }
            }
        }
        if self.depth > 0 {
            return Err(ParseError::Syntax {
                line: self.line,
                column: self.col,
                message: "unexpected end of input inside brackets".into(),
            });
        }
        let (line, col) = (self.line, self.col);
        self.end_logical_line(line, col);
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(TokenKind::Dedent, "", line, col);
        }
        Ok(())
    }

    fn end_logical_line(&mut self, line: usize, col: usize) {
        let needs = matches!(self.tokens.last(), Some(t) if !matches!(t.kind, TokenKind::Newline | TokenKind::Indent | TokenKind::Dedent));
        if needs {
            self.push(TokenKind::Newline, "", line, col);
        }
    }

    /// Measures indentation at the start of a physical line. Returns false
    /// for blank and comment-only lines, which are consumed entirely.
    fn handle_indent(&mut self) -> Result<bool, ParseError> {
        let line = self.line;
        let mut width = 0;
        let mut saw_tab = false;
        while let Some(ch) = self.peek(0) {
            match ch {
                ' ' => width += 1,
                '\t' => saw_tab = true,
                '\r' | '\x0c' => {}
                _ => break,
            }
            self.bump();
        }
        match self.peek(0) {
            None => return Ok(false),
            Some('\n') => {
                self.bump();
                return Ok(false);
            }
            Some('#') => {
                while let Some(ch) = self.bump() {
                    if ch == '\n' {
                        break;
                    }
                }
                return Ok(false);
            }
            _ => {}
        }
        if saw_tab {
            return Err(ParseError::TabSpaceMix { line });
        }
        let top = *self.indents.last().unwrap();
        if width > top {
            self.indents.push(width);
            self.push(TokenKind::Indent, "", line, 1);
        } else if width < top {
            while *self.indents.last().unwrap() > width {
                self.indents.pop();
                self.push(TokenKind::Dedent, "", line, 1);
            }
            if *self.indents.last().unwrap() != width {
                return Err(ParseError::Indentation { line });
            }
        }
        Ok(true)
    }

    fn number(&mut self) -> String {
        let mut s = String::new();
        let digits = |lx: &mut Self, s: &mut String| {
            while let Some(ch) = lx.peek(0) {
                if ch.is_ascii_digit() || ch == '_' {
                    if ch != '_' {
                        s.push(ch);
                    }
                    lx.bump();
                } else {
                    break;
                }
            }
        };
        digits(self, &mut s);
        if self.peek(0) == Some('.') {
            s.push('.');
            self.bump();
            digits(self, &mut s);
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            let sign = self.peek(1);
            let has_digits = match sign {
                Some('+' | '-') => self.peek(2).is_some_and(|d| d.is_ascii_digit()),
                Some(d) => d.is_ascii_digit(),
                None => false,
            };
            if has_digits {
                s.push('e');
                self.bump();
                if matches!(sign, Some('+' | '-')) {
                    s.push(self.bump().unwrap());
                }
                digits(self, &mut s);
            }
        }
        if matches!(self.peek(0), Some('j' | 'J')) {
            s.push('j');
            self.bump();
        }
        s
    }

    fn string(&mut self, quote: char, line: usize, column: usize) -> Result<String, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(ParseError::UnterminatedString { line, column }),
                Some(c) if c == quote => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some('0') => s.push('\0'),
                    Some('\n') => {}
                    Some(c @ ('\\' | '\'' | '"')) => s.push(c),
                    Some(c) => {
                        s.push('\\');
                        s.push(c);
                    }
                    None => return Err(ParseError::UnterminatedString { line, column }),
                },
                Some(c) => s.push(c),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn texts(src: &str) -> Vec<String> {
        tokenize(src).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn bell_kernel_tokens() {
        use TokenKind::*;
        let src = "def bell(q : qreg):\n    H(q[0])\n";
        assert_eq!(
            kinds(src),
            vec![
                Keyword, Identifier, Operator, Identifier, Operator, Identifier, Operator, Operator,
                Newline, Indent, Identifier, Operator, Identifier, Operator, Number, Operator,
                Operator, Newline, Dedent
            ]
        );
    }

    #[test]
    fn comments_and_blank_lines_vanish() {
        let src = "x = 1  # trailing\n\n   # indented comment\ny = 2\n";
        assert_eq!(texts(src), vec!["x", "=", "1", "", "y", "=", "2", ""]);
    }

    #[test]
    fn brackets_join_lines() {
        let src = "f(a,\n      b)\n";
        assert_eq!(texts(src), vec!["f", "(", "a", ",", "b", ")", ""]);
    }

    #[test]
    fn backslash_continues() {
        let src = "H = 1 \\\n    + 2\n";
        assert_eq!(texts(src), vec!["H", "=", "1", "+", "2", ""]);
    }

    #[test]
    fn number_forms() {
        assert_eq!(texts("2. .5 1e-3 3j 1_000 4.5E+2"), vec!["2.", ".5", "1e-3", "3j", "1000", "4.5e+2", ""]);
    }

    #[test]
    fn tab_indent_is_rejected() {
        let err = tokenize("def k(q: qreg):\n\tH(q[0])\n").unwrap_err();
        assert!(matches!(err, ParseError::TabSpaceMix { line: 2 }));
    }

    #[test]
    fn bad_dedent_is_rejected() {
        let err = tokenize("if a:\n    x = 1\n  y = 2\n").unwrap_err();
        assert!(matches!(err, ParseError::Indentation { line: 3 }));
    }

    #[test]
    fn strings_unescape() {
        let toks = tokenize("print(\"a\\\"b\", 'c')").unwrap();
        assert_eq!(toks[2].text, "a\"b");
        assert_eq!(toks[4].text, "c");
        assert!(matches!(tokenize("'abc"), Err(ParseError::UnterminatedString { .. })));
    }

    #[test]
    fn dedents_close_at_eof() {
        let src = "def a(q: qreg):\n    if x:\n        H(q[0])";
        let toks = tokenize(src).unwrap();
        let dedents = toks.iter().filter(|t| t.kind == TokenKind::Dedent).count();
        assert_eq!(dedents, 2);
        assert_eq!(toks[toks.len() - 3].kind, TokenKind::Newline);
    }

    #[test]
    fn unexpected_character() {
        assert!(matches!(tokenize("x = $"), Err(ParseError::UnexpectedChar { ch: '$', .. })));
        assert!(matches!(tokenize("f(a"), Err(ParseError::Syntax { .. })));
        assert!(matches!(tokenize("a)"), Err(ParseError::Syntax { .. })));
    }
}

use super::{ErrorKind, ParseError, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Const,
    Enum,
    Var,
    Init,
    Action,
    When,
    Invariant,
    Liveness,
    Fairness,
    Weak,
    If,
    Then,
    Else,
    In,
    True,
    False,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Keyword> {
        Some(match s {
            "const" => Keyword::Const,
            "enum" => Keyword::Enum,
            "var" => Keyword::Var,
            "init" => Keyword::Init,
            "action" => Keyword::Action,
            "when" => Keyword::When,
            "invariant" => Keyword::Invariant,
            "liveness" => Keyword::Liveness,
            "fairness" => Keyword::Fairness,
            "weak" => Keyword::Weak,
            "if" => Keyword::If,
            "then" => Keyword::Then,
            "else" => Keyword::Else,
            "in" => Keyword::In,
            "true" | "TRUE" => Keyword::True,
            "false" | "FALSE" => Keyword::False,
            _ => return None,
        })
    }

    /// Keywords that start a top-level item; used for error recovery.
    pub fn starts_item(self) -> bool {
        matches!(
            self,
            Keyword::Const
                | Keyword::Enum
                | Keyword::Var
                | Keyword::Init
                | Keyword::Action
                | Keyword::Invariant
                | Keyword::Liveness
                | Keyword::Fairness
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Kw(Keyword),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Not,
    And,
    Or,
    Implies,
    LeadsTo,
    Prime,
    DotDot,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Kw(k) => format!("keyword `{}`", format!("{k:?}").to_lowercase()),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Not => "!",
            Tok::And => "&&",
            Tok::Or => "||",
            Tok::Implies => "=>",
            Tok::LeadsTo => "~>",
            Tok::Prime => "'",
            Tok::DotDot => "..",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

/// Splits `text` into tokens. Lexical errors are collected and the
/// offending character is skipped. The last token is always `Eof`.
pub fn lex(text: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, col) = (cur.line, cur.col);
        let span_to = |cur: &Cursor| SourceSpan::new(line, col, cur.col.saturating_sub(col).max(1));

        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            let tok = match Keyword::from_ident(&s) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(s),
            };
            tokens.push(Token {
                tok,
                span: span_to(&cur),
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            let span = span_to(&cur);
            let value = s.parse::<i64>().unwrap_or_else(|_| {
                errors.push(ParseError::new(
                    span,
                    ErrorKind::Lexical,
                    format!("integer literal `{s}` is too large"),
                ));
                0
            });
            tokens.push(Token {
                tok: Tok::Int(value),
                span,
            });
            continue;
        }

        cur.bump();
        let tok = match c {
            '\\' if cur.peek() == Some('*') => {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
                continue;
            }
            '\\' if cur.eat('/') => Some(Tok::Or),
            '/' if cur.eat('\\') => Some(Tok::And),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '\'' => Some(Tok::Prime),
            '=' if cur.eat('>') => Some(Tok::Implies),
            '=' => Some(Tok::Eq),
            '!' if cur.eat('=') => Some(Tok::Ne),
            '!' => Some(Tok::Not),
            '<' if cur.eat('=') => Some(Tok::Le),
            '<' => Some(Tok::Lt),
            '>' if cur.eat('=') => Some(Tok::Ge),
            '>' => Some(Tok::Gt),
            '&' if cur.eat('&') => Some(Tok::And),
            '|' if cur.eat('|') => Some(Tok::Or),
            '~' if cur.eat('>') => Some(Tok::LeadsTo),
            '.' if cur.eat('.') => Some(Tok::DotDot),
            '∧' => Some(Tok::And),
            '∨' => Some(Tok::Or),
            '¬' => Some(Tok::Not),
            '⇒' => Some(Tok::Implies),
            '≠' => Some(Tok::Ne),
            '≤' => Some(Tok::Le),
            '≥' => Some(Tok::Ge),
            '⤳' | '↝' => Some(Tok::LeadsTo),
            '∈' => Some(Tok::Kw(Keyword::In)),
            _ => None,
        };
        let span = span_to(&cur);
        match tok {
            Some(tok) => tokens.push(Token { tok, span }),
            None => errors.push(ParseError::new(
                span,
                ErrorKind::Lexical,
                format!("unexpected character `{}`", c.escape_default()),
            )),
        }
    }

    tokens.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(cur.line, cur.col, 0),
    });
    (tokens, errors)
}

use super::{ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Call(String),
    Number(f64),
    /// Raw text between `[` and `]`, trimmed.
    Unit(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
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
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Call(s) => format!("`{s}`"),
            Tok::Number(v) => format!("number {v}"),
            Tok::Unit(u) => format!("unit [{u}]"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self) -> (usize, usize) {
        (self.line, self.column)
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out: Vec<Token> = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c == '#' {
                while !matches!(cur.peek(), None | Some('\n')) {
                    cur.bump();
                }
            } else if c.is_whitespace() {
                cur.bump();
            } else {
                break;
            }
        }
        let (line, column) = cur.here();
        let Some(c) = cur.peek() else {
            // end-of-input errors point just past the last token
            let span = out
                .last()
                .map(|t| SourceSpan::new(t.span.line, t.span.column + t.span.length, 0))
                .unwrap_or(SourceSpan::new(1, 1, 0));
            out.push(Token { tok: Tok::Eof, span });
            return Ok(out);
        };
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            _ => None,
        };
        if let Some(tok) = simple {
            cur.bump();
            out.push(Token {
                tok,
                span: SourceSpan::new(line, column, 1),
            });
            continue;
        }
        if c == '[' {
            cur.bump();
            let mut raw = String::new();
            loop {
                match cur.bump() {
                    Some(']') => break,
                    Some('\n') | None => {
                        return Err(ParseError::new(
                            SourceSpan::new(line, column, 1),
                            "unterminated unit",
                            vec!["`]`".into()],
                        ))
                    }
                    Some(ch) => raw.push(ch),
                }
            }
            let length = cur.here().1.saturating_sub(column);
            out.push(Token {
                tok: Tok::Unit(raw.trim().to_string()),
                span: SourceSpan::new(line, column, length),
            });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut s = String::new();
            while let Some(d) = cur.peek() {
                if d.is_ascii_digit() || d == '.' {
                    s.push(d);
                    cur.bump();
                } else {
                    break;
                }
            }
            if matches!(cur.peek(), Some('e' | 'E')) {
                s.push('e');
                cur.bump();
                if let Some(sign @ ('+' | '-')) = cur.peek() {
                    s.push(sign);
                    cur.bump();
                }
                while let Some(d) = cur.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    cur.bump();
                }
            }
            let span = SourceSpan::new(line, column, s.chars().count());
            let valid = s.chars().filter(|&ch| ch == '.').count() <= 1
                && s.chars().any(|ch| ch.is_ascii_digit())
                && !s.ends_with(['e', '+', '-']);
            let value = valid.then(|| s.parse::<f64>().ok()).flatten();
            match value {
                Some(v) => out.push(Token {
                    tok: Tok::Number(v),
                    span,
                }),
                None => return Err(ParseError::new(span, format!("malformed number `{s}`"), vec!["number".into()])),
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(d) = cur.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(d);
                    cur.bump();
                } else {
                    break;
                }
            }
            let span = SourceSpan::new(line, column, s.len());
            let tok = if s.chars().all(|ch| ch.is_ascii_uppercase() || ch.is_ascii_digit()) {
                Tok::Call(s)
            } else if crate::model::is_identifier(&s) {
                Tok::Ident(s)
            } else {
                return Err(ParseError::new(
                    span,
                    format!("`{s}` is neither an identifier ([a-z_][a-z0-9_]*) nor a builtin name"),
                    vec!["identifier".into()],
                ));
            };
            out.push(Token { tok, span });
            continue;
        }
        return Err(ParseError::new(
            SourceSpan::new(line, column, 1),
            format!("unexpected character `{c}`"),
            Vec::new(),
        ));
    }
}

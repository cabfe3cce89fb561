//! Tokenizer shared by the program parser and the test-suite parser.

use crate::ast::CompareOp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semicolon,
    Period,
    Colon,
    /// `:-`
    If,
    /// `:~`
    WeakIf,
    Bar,
    Minus,
    At,
    Cmp(CompareOp),
    /// `#name`, e.g. `#count`
    Directive(String),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semicolon => "`;`".into(),
            Tok::Period => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::If => "`:-`".into(),
            Tok::WeakIf => "`:~`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Minus => "`-`".into(),
            Tok::At => "`@`".into(),
            Tok::Cmp(op) => format!("`{op}`"),
            Tok::Directive(d) => format!("`#{d}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    /// Text after the comment marker, untrimmed.
    pub text: String,
    pub line: usize,
    /// Nothing but whitespace precedes the comment on its line.
    pub starts_line: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
}

/// Splits `src` into tokens. `%` starts a line comment; with
/// `slash_comments` so does `//`.
pub fn lex(src: &str, slash_comments: bool) -> Result<Lexed, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut line_has_token = false;

    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {{
            tokens.push(Token {
                tok: $tok,
                line: $l,
                col: $c,
            });
            line_has_token = true;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let peek = chars.get(i + 1).copied();
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            line_has_token = false;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let comment_len = if c == '%' {
            Some(1)
        } else if slash_comments && c == '/' && peek == Some('/') {
            Some(2)
        } else {
            None
        };
        if let Some(skip) = comment_len {
            let start = i + skip;
            let mut end = start;
            while end < chars.len() && chars[end] != '\n' {
                end += 1;
            }
            comments.push(Comment {
                text: chars[start..end].iter().collect(),
                line: tl,
                starts_line: !line_has_token,
            });
            col += end - i;
            i = end;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            push!(Tok::Ident(chars[start..i].iter().collect()), tl, tc);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<i64>().map_err(|_| LexError {
                message: format!("integer literal `{text}` out of range"),
                line: tl,
                col: tc,
            })?;
            push!(Tok::Int(v), tl, tc);
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(LexError {
                            message: "unterminated string literal".into(),
                            line: tl,
                            col: tc,
                        })
                    }
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some('\\') => {
                        let esc = chars.get(i + 1).copied();
                        match esc {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            _ => {
                                return Err(LexError {
                                    message: "invalid escape sequence in string".into(),
                                    line,
                                    col,
                                })
                            }
                        }
                        i += 2;
                        col += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            push!(Tok::Str(s), tl, tc);
            continue;
        }
        if c == '#' {
            let start = i + 1;
            let mut end = start;
            while end < chars.len() && chars[end].is_ascii_alphanumeric() {
                end += 1;
            }
            if end == start {
                return Err(LexError {
                    message: "expected directive name after `#`".into(),
                    line: tl,
                    col: tc,
                });
            }
            col += end - i;
            i = end;
            push!(Tok::Directive(chars[start..end].iter().collect()), tl, tc);
            continue;
        }
        let (tok, len) = match (c, peek) {
            (':', Some('-')) => (Tok::If, 2),
            (':', Some('~')) => (Tok::WeakIf, 2),
            (':', _) => (Tok::Colon, 1),
            ('<', Some('=')) => (Tok::Cmp(CompareOp::Le), 2),
            ('<', Some('>')) => (Tok::Cmp(CompareOp::Ne), 2),
            ('<', _) => (Tok::Cmp(CompareOp::Lt), 1),
            ('>', Some('=')) => (Tok::Cmp(CompareOp::Ge), 2),
            ('>', _) => (Tok::Cmp(CompareOp::Gt), 1),
            ('=', Some('=')) => (Tok::Cmp(CompareOp::Eq), 2),
            ('=', _) => (Tok::Cmp(CompareOp::Eq), 1),
            ('!', Some('=')) => (Tok::Cmp(CompareOp::Ne), 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semicolon, 1),
            ('.', _) => (Tok::Period, 1),
            ('|', _) => (Tok::Bar, 1),
            ('-', _) => (Tok::Minus, 1),
            ('@', _) => (Tok::At, 1),
            _ => {
                return Err(LexError {
                    message: format!("unexpected character `{c}`"),
                    line: tl,
                    col: tc,
                })
            }
        };
        i += len;
        col += len;
        push!(tok, tl, tc);
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(Lexed { tokens, comments })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src, false).unwrap().tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn rule_tokens() {
        assert_eq!(
            kinds("a :- not b, X<=3."),
            vec![
                Tok::Ident("a".into()),
                Tok::If,
                Tok::Ident("not".into()),
                Tok::Ident("b".into()),
                Tok::Comma,
                Tok::Ident("X".into()),
                Tok::Cmp(CompareOp::Le),
                Tok::Int(3),
                Tok::Period,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_record_line_start() {
        let l = lex("% r1\na. % trailing\n", false).unwrap();
        assert_eq!(l.comments.len(), 2);
        assert!(l.comments[0].starts_line);
        assert_eq!(l.comments[0].text, " r1");
        assert!(!l.comments[1].starts_line);
    }

    #[test]
    fn string_escapes() {
        assert_eq!(kinds(r#""a\"b""#)[0], Tok::Str("a\"b".into()));
        assert!(lex("\"open", false).is_err());
    }

    #[test]
    fn positions_are_one_based() {
        let l = lex("a.\n  bb.", false).unwrap();
        assert_eq!((l.tokens[2].line, l.tokens[2].col), (2, 3));
    }
}

use super::diag::{DiagKind, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Kw(Kw),
    Assign,
    Semi,
    Comma,
    Colon,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Star,
    Plus,
    Minus,
    Slash,
    Percent,
    Bang,
    EqEq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    Process,
    Init,
    Begin,
    End,
    Atomic,
    Assume,
    Assert,
    Call,
    Return,
    While,
    Do,
    Od,
    If,
    Then,
    Else,
    Fi,
    Skip,
    Bool,
    Int,
    Void,
    True,
    False,
    And,
    Or,
    Not,
}

fn keyword(word: &str) -> Option<Kw> {
    Some(match word {
        "process" => Kw::Process,
        "init" => Kw::Init,
        "begin" => Kw::Begin,
        "end" => Kw::End,
        "atomic" => Kw::Atomic,
        "assume" => Kw::Assume,
        "assert" => Kw::Assert,
        "call" => Kw::Call,
        "return" => Kw::Return,
        "while" => Kw::While,
        "do" => Kw::Do,
        "od" => Kw::Od,
        "if" => Kw::If,
        "then" => Kw::Then,
        "else" => Kw::Else,
        "fi" => Kw::Fi,
        "skip" => Kw::Skip,
        "bool" => Kw::Bool,
        "int" => Kw::Int,
        "void" => Kw::Void,
        "T" | "true" => Kw::True,
        "F" | "false" => Kw::False,
        "and" => Kw::And,
        "or" => Kw::Or,
        "not" => Kw::Not,
        _ => return None,
    })
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Kw(k) => format!("`{}`", format!("{k:?}").to_lowercase()),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", punct_text(other)),
        }
    }
}

fn punct_text(t: &Tok) -> &'static str {
    match t {
        Tok::Assign => ":=",
        Tok::Semi => ";",
        Tok::Comma => ",",
        Tok::Colon => ":",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Star => "*",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Slash => "/",
        Tok::Percent => "%",
        Tok::Bang => "!",
        Tok::EqEq => "==",
        Tok::Neq => "!=",
        Tok::Lt => "<",
        Tok::Le => "<=",
        Tok::Gt => ">",
        Tok::Ge => ">=",
        Tok::AndAnd => "&&",
        Tok::OrOr => "||",
        _ => "?",
    }
}

pub fn lex(src: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let bump = |i: &mut usize, col: &mut u32, n: usize| {
        *i += n;
        *col += n as u32;
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            bump(&mut i, &mut col, 1);
            continue;
        }
        // comments: `//` to end of line
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            out.push((
                keyword(&word).map(Tok::Kw).unwrap_or(Tok::Ident(word)),
                span,
            ));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let v = text.parse::<i64>().map_err(|_| {
                Diagnostic::new(DiagKind::Syntax, span, format!("integer literal `{text}` out of range"))
            })?;
            out.push((Tok::Int(v), span));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            (':', Some('=')) => (Tok::Assign, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::Neq, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('=', _) => (Tok::EqEq, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('*', _) => (Tok::Star, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('/', _) => (Tok::Slash, 1),
            ('%', _) => (Tok::Percent, 1),
            ('!', _) | ('¬', _) => (Tok::Bang, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            _ => {
                return Err(Diagnostic::new(
                    DiagKind::Syntax,
                    span,
                    format!("unexpected character `{c}`"),
                ))
            }
        };
        bump(&mut i, &mut col, len);
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

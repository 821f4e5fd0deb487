use std::fmt;

/// Line/column position of a token, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(u64),
    // Keywords.
    Sort,
    Struct,
    Act,
    Proc,
    Init,
    Sum,
    Tau,
    True,
    False,
    If,
    Allow,
    Comm,
    Hide,
    Composition,
    // Punctuation and operators.
    Semi,
    Comma,
    Colon,
    Hash,
    Dot,
    Plus,
    Minus,
    Bang,
    Pipe,
    PipePipe,
    Arrow,    // ->
    FatArrow, // =>
    Assign,   // =
    EqEq,
    Lt,
    Le,
    Gt,
    Ge,
    AmpAmp,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Number(n) => write!(f, "number {n}"),
            Tok::Sort => write!(f, "'sort'"),
            Tok::Struct => write!(f, "'struct'"),
            Tok::Act => write!(f, "'act'"),
            Tok::Proc => write!(f, "'proc'"),
            Tok::Init => write!(f, "'init'"),
            Tok::Sum => write!(f, "'sum'"),
            Tok::Tau => write!(f, "'tau'"),
            Tok::True => write!(f, "'true'"),
            Tok::False => write!(f, "'false'"),
            Tok::If => write!(f, "'if'"),
            Tok::Allow => write!(f, "'allow'"),
            Tok::Comm => write!(f, "'comm'"),
            Tok::Hide => write!(f, "'hide'"),
            Tok::Composition => write!(f, "'composition'"),
            Tok::Semi => write!(f, "';'"),
            Tok::Comma => write!(f, "','"),
            Tok::Colon => write!(f, "':'"),
            Tok::Hash => write!(f, "'#'"),
            Tok::Dot => write!(f, "'.'"),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Bang => write!(f, "'!'"),
            Tok::Pipe => write!(f, "'|'"),
            Tok::PipePipe => write!(f, "'||'"),
            Tok::Arrow => write!(f, "'->'"),
            Tok::FatArrow => write!(f, "'=>'"),
            Tok::Assign => write!(f, "'='"),
            Tok::EqEq => write!(f, "'=='"),
            Tok::Lt => write!(f, "'<'"),
            Tok::Le => write!(f, "'<='"),
            Tok::Gt => write!(f, "'>'"),
            Tok::Ge => write!(f, "'>='"),
            Tok::AmpAmp => write!(f, "'&&'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::LBrace => write!(f, "'{{'"),
            Tok::RBrace => write!(f, "'}}'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "sort" => Tok::Sort,
        "struct" => Tok::Struct,
        "act" => Tok::Act,
        "proc" => Tok::Proc,
        "init" => Tok::Init,
        "sum" => Tok::Sum,
        "tau" => Tok::Tau,
        "true" => Tok::True,
        "false" => Tok::False,
        "if" => Tok::If,
        "allow" => Tok::Allow,
        "comm" => Tok::Comm,
        "hide" => Tok::Hide,
        "composition" => Tok::Composition,
        _ => return None,
    })
}

/// Tokenises an input document. `%` starts a line comment.
pub fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, (Pos, String)> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let c = match chars.peek().copied() {
            Some(c) => c,
            None => {
                tokens.push((Tok::Eof, pos));
                return Ok(tokens);
            }
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            ';' => {
                bump!();
                tokens.push((Tok::Semi, pos));
            }
            ',' => {
                bump!();
                tokens.push((Tok::Comma, pos));
            }
            ':' => {
                bump!();
                tokens.push((Tok::Colon, pos));
            }
            '#' => {
                bump!();
                tokens.push((Tok::Hash, pos));
            }
            '.' => {
                bump!();
                tokens.push((Tok::Dot, pos));
            }
            '+' => {
                bump!();
                tokens.push((Tok::Plus, pos));
            }
            '!' => {
                bump!();
                tokens.push((Tok::Bang, pos));
            }
            '(' => {
                bump!();
                tokens.push((Tok::LParen, pos));
            }
            ')' => {
                bump!();
                tokens.push((Tok::RParen, pos));
            }
            '{' => {
                bump!();
                tokens.push((Tok::LBrace, pos));
            }
            '}' => {
                bump!();
                tokens.push((Tok::RBrace, pos));
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    tokens.push((Tok::Arrow, pos));
                } else {
                    tokens.push((Tok::Minus, pos));
                }
            }
            '=' => {
                bump!();
                match chars.peek() {
                    Some('=') => {
                        bump!();
                        tokens.push((Tok::EqEq, pos));
                    }
                    Some('>') => {
                        bump!();
                        tokens.push((Tok::FatArrow, pos));
                    }
                    _ => tokens.push((Tok::Assign, pos)),
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    tokens.push((Tok::Le, pos));
                } else {
                    tokens.push((Tok::Lt, pos));
                }
            }
            '>' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    tokens.push((Tok::Ge, pos));
                } else {
                    tokens.push((Tok::Gt, pos));
                }
            }
            '|' => {
                bump!();
                if chars.peek() == Some(&'|') {
                    bump!();
                    tokens.push((Tok::PipePipe, pos));
                } else {
                    tokens.push((Tok::Pipe, pos));
                }
            }
            '&' => {
                bump!();
                if chars.peek() == Some(&'&') {
                    bump!();
                    tokens.push((Tok::AmpAmp, pos));
                } else {
                    return Err((pos, "expected '&&'".into()));
                }
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    digits.push(d);
                    bump!();
                }
                let value: u64 = digits
                    .parse()
                    .map_err(|_| (pos, format!("number '{digits}' out of range")))?;
                tokens.push((Tok::Number(value), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&d) = chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_') {
                        break;
                    }
                    word.push(d);
                    bump!();
                }
                match keyword(&word) {
                    Some(tok) => tokens.push((tok, pos)),
                    None => tokens.push((Tok::Ident(word), pos)),
                }
            }
            other => {
                return Err((pos, format!("unexpected character '{other}'")));
            }
        }
    }
}

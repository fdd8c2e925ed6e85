use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Int(i64),
    Var(String),
    /// Identifier or quoted atom. `quoted` atoms are never keywords or
    /// alphanumeric operators.
    Atom {
        name: String,
        quoted: bool,
    },
    Str(String),
    /// Symbolic operator such as `=>`, `#<=>` or `..`.
    Op(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Bar,
    Dollar,
    /// `.` directly followed by an identifier: attribute or method access.
    Dot,
    /// Clause terminator.
    End,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Whitespace or a comment separates this token from the previous one.
    pub spaced: bool,
}

/// Symbolic operators, longest first so that maximal munch picks the
/// longest known operator.
const OPS: &[&str] = &[
    "#<=>", "?=>", "#=>", "#\\/", "#/\\", "#!=", "#>=", "#=<", "#<=", "!==", "=:=", "=\\=", "@>=",
    "@=<", "#^", "#~", "#=", "#>", "#<", "=>", ":=", "::", ":-", "==", "!=", "=<", ">=", "@<",
    "@>", "++", "**", "//", "/\\", "\\/", "\\+", "..", "->", "<<", ">>", "=", "<", ">", "+", "-",
    "*", "/", "\\", "^", "@", ":", "~", ";",
];

fn is_symbol_char(c: char) -> bool {
    "+-*/\\^<>=~:.?@#&!;".contains(c)
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let mut spaced = true;

    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!(1);
            spaced = true;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            spaced = true;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            advance!(2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(ParseError::new(l0, c0, "unterminated block comment"));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance!(2);
                    break;
                }
                advance!(1);
            }
            spaced = true;
            continue;
        }
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok: Tok, spaced: bool| {
            out.push(Token {
                tok,
                line: tl,
                col: tc,
                spaced,
            })
        };

        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                advance!(1);
            }
            let text: String = chars[start..i].iter().filter(|&&ch| ch != '_').collect();
            let n: i64 = text.parse().map_err(|_| {
                ParseError::new(tl, tc, format!("integer literal out of range: {text}"))
            })?;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                return Err(ParseError::new(
                    tl,
                    tc,
                    "floating-point literals are not supported",
                ));
            }
            push(&mut out, Tok::Int(n), spaced);
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance!(1);
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if c.is_uppercase() || c == '_' {
                Tok::Var(text)
            } else {
                Tok::Atom {
                    name: text,
                    quoted: false,
                }
            };
            push(&mut out, tok, spaced);
        } else if c == '\'' || c == '"' {
            let quote = c;
            advance!(1);
            let mut text = String::new();
            loop {
                let Some(&ch) = chars.get(i) else {
                    return Err(ParseError::new(tl, tc, "unterminated quoted literal"));
                };
                if ch == quote {
                    if chars.get(i + 1) == Some(&quote) {
                        text.push(quote);
                        advance!(2);
                        continue;
                    }
                    advance!(1);
                    break;
                }
                if ch == '\\' {
                    let Some(&esc) = chars.get(i + 1) else {
                        return Err(ParseError::new(line, col, "dangling escape"));
                    };
                    text.push(match esc {
                        'n' => '\n',
                        't' => '\t',
                        '\\' => '\\',
                        '\'' => '\'',
                        '"' => '"',
                        other => {
                            return Err(ParseError::new(
                                line,
                                col,
                                format!("unknown escape \\{other}"),
                            ))
                        }
                    });
                    advance!(2);
                    continue;
                }
                text.push(ch);
                advance!(1);
            }
            let tok = if quote == '"' {
                Tok::Str(text)
            } else {
                Tok::Atom {
                    name: text,
                    quoted: true,
                }
            };
            push(&mut out, tok, spaced);
        } else if c == '.' {
            let next = chars.get(i + 1).copied();
            match next {
                None => {
                    advance!(1);
                    push(&mut out, Tok::End, spaced);
                }
                Some(n) if n.is_whitespace() || n == '%' => {
                    advance!(1);
                    push(&mut out, Tok::End, spaced);
                }
                Some('.') => {
                    advance!(2);
                    push(&mut out, Tok::Op("..".into()), spaced);
                }
                Some(n) if n.is_alphabetic() && !spaced => {
                    advance!(1);
                    push(&mut out, Tok::Dot, spaced);
                }
                Some(_) => {
                    return Err(ParseError::new(tl, tc, "unexpected '.'"));
                }
            }
        } else {
            let single = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '[' => Some(Tok::LBracket),
                ']' => Some(Tok::RBracket),
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                ',' => Some(Tok::Comma),
                '|' => Some(Tok::Bar),
                '$' => Some(Tok::Dollar),
                _ => None,
            };
            if let Some(tok) = single {
                advance!(1);
                push(&mut out, tok, spaced);
            } else if is_symbol_char(c) {
                let rest: String = chars[i..chars.len().min(i + 4)].iter().collect();
                let Some(op) = OPS.iter().find(|op| rest.starts_with(*op)) else {
                    return Err(ParseError::new(
                        tl,
                        tc,
                        format!("unknown operator starting with '{c}'"),
                    ));
                };
                advance!(op.chars().count());
                push(&mut out, Tok::Op((*op).to_string()), spaced);
            } else {
                return Err(ParseError::new(
                    tl,
                    tc,
                    format!("unexpected character '{c}'"),
                ));
            }
        }
        spaced = false;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
        spaced: true,
    });
    Ok(out)
}

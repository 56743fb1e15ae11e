//! Line-oriented tokenizer with Python's INDENT/DEDENT discipline.

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const OPS: &[&str] = &[
    "**=", "//=", "**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "->", "+", "-",
    "*", "/", "%", "<", ">", "=", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "@", "&", "|",
    "^", "~",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut indents: Vec<usize> = vec![0];
    let mut depth = 0usize; // bracket nesting; newlines inside brackets are ignored
    let mut indent_char: Option<char> = None;

    let lines: Vec<&str> = src.split('\n').collect();
    for (ln0, raw) in lines.iter().enumerate() {
        let line_no = ln0 + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;

        if depth == 0 {
            // Measure indentation.
            let mut width = 0;
            while i < chars.len() && (chars[i] == ' ' || chars[i] == '\t') {
                match indent_char {
                    None => indent_char = Some(chars[i]),
                    Some(c) if c != chars[i] => {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            column: i + 1,
                            message: "inconsistent use of tabs and spaces in indentation".into(),
                        })
                    }
                    _ => {}
                }
                width += 1;
                i += 1;
            }
            if i == chars.len() || chars[i] == '#' {
                continue; // blank or comment-only line
            }
            let cur = *indents.last().unwrap();
            if width > cur {
                indents.push(width);
                out.push(Token {
                    tok: Tok::Indent,
                    line: line_no,
                    col: 1,
                });
            } else {
                while width < *indents.last().unwrap() {
                    indents.pop();
                    out.push(Token {
                        tok: Tok::Dedent,
                        line: line_no,
                        col: 1,
                    });
                }
                if width != *indents.last().unwrap() {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        column: 1,
                        message: "unindent does not match any outer indentation level".into(),
                    });
                }
            }
        }

        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == ' ' || c == '\t' {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            if c == '\\' && i + 1 == chars.len() {
                // explicit line continuation
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push(Token {
                    tok: Tok::Name(word),
                    line: line_no,
                    col,
                });
                continue;
            }
            if c.is_ascii_digit()
                || (c == '.' && i + 1 < chars.len() && chars[i + 1].is_ascii_digit())
            {
                let start = i;
                let mut is_float = false;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    is_float = true;
                    i += 1;
                    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        is_float = true;
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().filter(|c| **c != '_').collect();
                let tok = if is_float {
                    Tok::Float(text.parse().map_err(|_| ParseError::Syntax {
                        line: line_no,
                        column: col,
                        message: format!("invalid float literal '{text}'"),
                    })?)
                } else {
                    Tok::Int(text.parse().map_err(|_| ParseError::Syntax {
                        line: line_no,
                        column: col,
                        message: format!("integer literal '{text}' out of range"),
                    })?)
                };
                out.push(Token {
                    tok,
                    line: line_no,
                    col,
                });
                continue;
            }
            if c == '"' || c == '\'' {
                let quote = c;
                if i + 2 < chars.len() && chars[i + 1] == quote && chars[i + 2] == quote {
                    return Err(ParseError::Unsupported {
                        line: line_no,
                        construct: "triple-quoted string".into(),
                    });
                }
                i += 1;
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            column: col,
                            message: "unterminated string literal".into(),
                        });
                    }
                    let ch = chars[i];
                    if ch == quote {
                        i += 1;
                        break;
                    }
                    if ch == '\\' && i + 1 < chars.len() {
                        let e = chars[i + 1];
                        let decoded = match e {
                            'n' => Some('\n'),
                            't' => Some('\t'),
                            'r' => Some('\r'),
                            '0' => Some('\0'),
                            '\\' => Some('\\'),
                            '\'' => Some('\''),
                            '"' => Some('"'),
                            _ => None,
                        };
                        match decoded {
                            Some(c) => s.push(c),
                            None => {
                                s.push('\\');
                                s.push(e);
                            }
                        }
                        i += 2;
                        continue;
                    }
                    s.push(ch);
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Str(s),
                    line: line_no,
                    col,
                });
                continue;
            }
            let rest: String = chars[i..].iter().take(3).collect();
            let Some(op) = OPS.iter().find(|op| rest.starts_with(**op)) else {
                return Err(ParseError::Syntax {
                    line: line_no,
                    column: col,
                    message: format!("unexpected character '{c}'"),
                });
            };
            match *op {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth = depth.saturating_sub(1),
                _ => {}
            }
            i += op.len();
            out.push(Token {
                tok: Tok::Op(op),
                line: line_no,
                col,
            });
        }

        let continued = raw.trim_end().ends_with('\\');
        if depth == 0 && !continued && out.last().is_some_and(|t| t.tok != Tok::Newline) {
            out.push(Token {
                tok: Tok::Newline,
                line: line_no,
                col: chars.len() + 1,
            });
        }
    }

    let last_line = lines.len();
    if out
        .last()
        .is_some_and(|t| !matches!(t.tok, Tok::Newline | Tok::Dedent))
    {
        out.push(Token {
            tok: Tok::Newline,
            line: last_line,
            col: 1,
        });
    }
    while indents.len() > 1 {
        indents.pop();
        out.push(Token {
            tok: Tok::Dedent,
            line: last_line,
            col: 1,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line: last_line,
        col: 1,
    });
    Ok(out)
}

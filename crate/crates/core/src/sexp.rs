//! Minimal s-expression reader shared by every textual format.
//!
//! Atoms are maximal runs of characters other than whitespace, parentheses
//! and `;`. A `;` starts a comment that runs to the end of the line.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Line/column of a token, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a, _) => Some(a),
            Sexp::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a, _) => f.write_str(a),
            Sexp::List(items, _) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SexpError {
    #[error("{0}: unexpected ')'")]
    UnexpectedClose(Pos),
    #[error("{0}: unclosed '('")]
    Unclosed(Pos),
    #[error("unexpected end of input")]
    Eof,
    #[error("{0}: trailing input after expression")]
    Trailing(Pos),
}

struct Reader<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, col: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.chars.peek().is_none()
    }

    fn read(&mut self) -> Result<Sexp, SexpError> {
        self.skip_ws();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Err(SexpError::Eof),
            Some(')') => Err(SexpError::UnexpectedClose(start)),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(SexpError::Unclosed(start)),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let mut atom = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    self.bump();
                }
                Ok(Sexp::Atom(atom, start))
            }
        }
    }
}

/// Reads exactly one expression; anything but trailing whitespace/comments
/// after it is an error.
pub fn parse_one(text: &str) -> Result<Sexp, SexpError> {
    let mut r = Reader::new(text);
    let e = r.read()?;
    if !r.at_end() {
        return Err(SexpError::Trailing(r.pos));
    }
    Ok(e)
}

/// Reads every top-level expression in `text`.
pub fn parse_many(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut r = Reader::new(text);
    let mut out = Vec::new();
    while !r.at_end() {
        out.push(r.read()?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn reads_nested_lists_and_comments() {
        let e = parse_one("(trans ; comment\n (refl x) (sym (refl eps)))").unwrap();
        assert_eq!(e.to_string(), "(trans (refl x) (sym (refl eps)))");
        assert_eq!(parse_many("(fun d 1)\n(axiom a (d eps) eps)").unwrap().len(), 2);
    }

    #[test]
    fn reports_positions() {
        assert_eq!(parse_one("(a\n  (b"), Err(SexpError::Unclosed(Pos { line: 2, col: 3 })));
        assert_eq!(parse_one(")"), Err(SexpError::UnexpectedClose(Pos { line: 1, col: 1 })));
        assert_eq!(parse_one("a b"), Err(SexpError::Trailing(Pos { line: 1, col: 3 })));
        assert_eq!(parse_one("  ; only a comment"), Err(SexpError::Eof));
    }
}

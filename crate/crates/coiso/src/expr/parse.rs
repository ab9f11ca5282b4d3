//! Recursive-descent parser for
//! `expr := term (("+"|"-") term)*`, `term := factor ("*" factor)*`,
//! `factor := base ("^" uint)?`, `base := rational | ident | "(" expr ")"`.
//!
//! In [`Mode::Form`] a `^` followed by anything other than an unsigned integer
//! is a wedge, and wedges may be chained.

use num_bigint::BigInt;

use super::{ExprError, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Scalar,
    Form,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(Rational),
    Ident { name: String, pos: usize },
    Neg(Box<Node>),
    Add { lhs: Box<Node>, rhs: Box<Node>, pos: usize },
    Sub { lhs: Box<Node>, rhs: Box<Node>, pos: usize },
    Mul { lhs: Box<Node>, rhs: Box<Node>, pos: usize },
    Pow { base: Box<Node>, exp: u32, pos: usize },
    Wedge { lhs: Box<Node>, rhs: Box<Node>, pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(text[start..i].parse().expect("digits")), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(ExprError::Syntax {
                    pos: start,
                    expected: vec!["number".into(), "identifier".into(), "operator".into()],
                })
            }
        };
        out.push((tok, start));
        i += c.len_utf8();
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    mode: Mode,
    depth: usize,
}

fn expected(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, list: &[&str]) -> ExprError {
        ExprError::Syntax {
            pos: self.pos(),
            expected: expected(list),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = match self.peek() {
            Tok::Minus => {
                self.bump();
                Node::Neg(Box::new(self.term()?))
            }
            Tok::Plus => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    let (_, pos) = self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Add { lhs: Box::new(lhs), rhs: Box::new(rhs), pos };
                }
                Tok::Minus => {
                    let (_, pos) = self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Sub { lhs: Box::new(lhs), rhs: Box::new(rhs), pos };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            let (_, pos) = self.bump();
            let rhs = self.factor()?;
            lhs = Node::Mul { lhs: Box::new(lhs), rhs: Box::new(rhs), pos };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        let mut node = self.base()?;
        while *self.peek() == Tok::Caret {
            let (_, pos) = self.bump();
            match (self.peek().clone(), self.mode) {
                (Tok::Int(n), _) => {
                    self.bump();
                    let exp = u32::try_from(n).map_err(|_| ExprError::Syntax {
                        pos,
                        expected: expected(&["exponent below 2^32"]),
                    })?;
                    node = Node::Pow { base: Box::new(node), exp, pos };
                    if self.mode == Mode::Scalar {
                        break;
                    }
                }
                (_, Mode::Scalar) => return Err(self.err(&["unsigned integer"])),
                (_, Mode::Form) => {
                    let rhs = self.base()?;
                    node = Node::Wedge { lhs: Box::new(node), rhs: Box::new(rhs), pos };
                }
            }
        }
        Ok(node)
    }

    fn base(&mut self) -> Result<Node, ExprError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if *self.peek() == Tok::Slash {
                    self.bump();
                    match self.peek().clone() {
                        Tok::Int(d) if d != BigInt::from(0) => {
                            self.bump();
                            Ok(Node::Num(Rational::new(n, d)))
                        }
                        _ => Err(self.err(&["positive integer denominator"])),
                    }
                } else {
                    Ok(Node::Num(Rational::from_integer(n)))
                }
            }
            Tok::Ident(name) => {
                let (_, pos) = self.bump();
                Ok(Node::Ident { name, pos })
            }
            Tok::LParen => {
                self.bump();
                self.depth += 1;
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.err(&["\"+\"", "\"-\"", "\"*\"", "\"^\"", "\")\""]));
                }
                self.bump();
                self.depth -= 1;
                Ok(inner)
            }
            _ => Err(self.err(&["number", "identifier", "\"(\""])),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse_ast(text: &str, mode: Mode) -> Result<Node, ExprError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        mode,
        depth: 0,
    };
    let node = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.err(&["\"+\"", "\"-\"", "\"*\"", "\"^\"", "end of input"]));
    }
    debug_assert_eq!(p.depth, 0);
    Ok(node)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syntax_pos(r: Result<Node, ExprError>) -> usize {
        match r {
            Err(ExprError::Syntax { pos, .. }) => pos,
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn scalar_mode_requires_integer_exponent() {
        assert_eq!(syntax_pos(parse_ast("q^p", Mode::Scalar)), 2);
        assert!(parse_ast("q^p", Mode::Form).is_ok());
        assert!(parse_ast("q^2^3", Mode::Scalar).is_err());
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(syntax_pos(parse_ast("q + ", Mode::Scalar)), 4);
        assert_eq!(syntax_pos(parse_ast("(q + p", Mode::Scalar)), 6);
        assert_eq!(syntax_pos(parse_ast("q p", Mode::Scalar)), 2);
        assert_eq!(syntax_pos(parse_ast("1/0", Mode::Scalar)), 2);
        assert_eq!(syntax_pos(parse_ast("q $ p", Mode::Scalar)), 2);
    }

    #[test]
    fn rational_literals_and_unary_minus() {
        assert_eq!(
            parse_ast("-3/4", Mode::Scalar).unwrap(),
            Node::Neg(Box::new(Node::Num(Rational::new(3.into(), 4.into()))))
        );
    }

    #[test]
    fn wedge_binds_tighter_than_product() {
        let n = parse_ast("2*dq^dp", Mode::Form).unwrap();
        assert!(matches!(n, Node::Mul { ref rhs, .. } if matches!(**rhs, Node::Wedge { .. })));
    }
}

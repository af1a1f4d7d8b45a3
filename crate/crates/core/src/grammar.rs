//! Textual grammar for trees and positive-basis elements.
//!
//! ```text
//! term   := factor (ws factor)*
//! factor := "1" | "Xi" | "X" ["^" midx]
//!         | "I"  ["_" midx] "[" term "]"
//!         | "I+" ["_" midx] "[" term "]"        (positive context only)
//!         | "o[" int "," int "," int "]"
//! midx   := "(" int ("," int)* ")"
//! ```
//!
//! Juxtaposition is the tree product. `o[a,b,c]` sets the extended decoration
//! `a·α + b·β + c` at the current root. A bare `X` is `X^(1)`. The unicode
//! minus sign is accepted wherever `-` is.

use crate::degree::Degree;
use crate::error::CoreError;
use crate::index::MultiIndex;
use crate::tree::{DecoratedTree, EdgeLabel, PlusTree};

pub fn parse_tree(input: &str) -> Result<DecoratedTree, CoreError> {
    let mut p = Parser::new(input);
    let t = p.term_tree()?;
    p.expect_end()?;
    Ok(t)
}

pub fn parse_plus(input: &str) -> Result<PlusTree, CoreError> {
    let mut p = Parser::new(input);
    let t = p.term_plus()?;
    p.expect_end()?;
    Ok(t)
}

pub fn print_tree(t: &DecoratedTree) -> String {
    let mut parts: Vec<String> = Vec::new();
    if !t.root_poly.is_zero() {
        parts.push(print_x(&t.root_poly));
    }
    if !t.root_ext.is_zero() {
        let e = t.root_ext;
        parts.push(format!("o[{},{},{}]", e.alpha_coef, e.beta_coef, e.int_part));
    }
    for (label, child) in t.children() {
        match label {
            EdgeLabel::Noise => parts.push("Xi".to_string()),
            EdgeLabel::Kernel(a) => {
                parts.push(format!("I{}[{}]", print_sub(a), print_tree(child)))
            }
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join(" ")
    }
}

pub fn print_plus(t: &PlusTree) -> String {
    let mut parts: Vec<String> = Vec::new();
    if !t.poly.is_zero() {
        parts.push(print_x(&t.poly));
    }
    for (a, arg) in t.factors() {
        parts.push(format!("I+{}[{}]", print_sub(a), print_tree(arg)));
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join(" ")
    }
}

fn print_x(k: &MultiIndex) -> String {
    if *k == MultiIndex::unit(0) {
        "X".to_string()
    } else {
        format!("X^{}", print_midx(k))
    }
}

fn print_midx(k: &MultiIndex) -> String {
    let inner: Vec<String> = if k.is_zero() {
        vec!["0".to_string()]
    } else {
        k.entries().iter().map(|e| e.to_string()).collect()
    };
    format!("({})", inner.join(","))
}

fn print_sub(a: &MultiIndex) -> String {
    if a.is_zero() {
        String::new()
    } else {
        format!("_{}", print_midx(a))
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(input: &str) -> Self {
        Parser {
            chars: input.replace('\u{2212}', "-").chars().collect(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CoreError> {
        Err(CoreError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> Result<(), CoreError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {c:?}"))
        }
    }

    fn expect_end(&mut self) -> Result<(), CoreError> {
        self.skip_ws();
        if self.pos == self.chars.len() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn at_factor_start(&self) -> bool {
        matches!(self.peek(), Some('1' | 'X' | 'I' | 'o'))
    }

    fn term_tree(&mut self) -> Result<DecoratedTree, CoreError> {
        self.skip_ws();
        if !self.at_factor_start() {
            return self.err("expected a factor");
        }
        let mut acc = DecoratedTree::one();
        loop {
            self.skip_ws();
            if !self.at_factor_start() {
                break;
            }
            let f = self.factor_tree()?;
            acc = acc.product(&f);
        }
        Ok(acc)
    }

    fn term_plus(&mut self) -> Result<PlusTree, CoreError> {
        self.skip_ws();
        if !self.at_factor_start() {
            return self.err("expected a factor");
        }
        let mut acc = PlusTree::one();
        loop {
            self.skip_ws();
            if !self.at_factor_start() {
                break;
            }
            let f = self.factor_plus()?;
            acc = acc.product(&f);
        }
        Ok(acc)
    }

    fn factor_tree(&mut self) -> Result<DecoratedTree, CoreError> {
        match self.peek() {
            Some('1') => {
                self.pos += 1;
                Ok(DecoratedTree::one())
            }
            Some('X') => {
                self.pos += 1;
                if self.peek() == Some('i') {
                    self.pos += 1;
                    Ok(DecoratedTree::xi())
                } else {
                    Ok(DecoratedTree::x_pow(self.x_exponent()?))
                }
            }
            Some('o') => {
                self.pos += 1;
                self.eat('[')?;
                let a = self.int()?;
                self.eat(',')?;
                let b = self.int()?;
                self.eat(',')?;
                let c = self.int()?;
                self.eat(']')?;
                Ok(DecoratedTree::ext_node(Degree::new(a, b, c)))
            }
            Some('I') => {
                self.pos += 1;
                if self.peek() == Some('+') {
                    return self.err("I+ factors are only legal in a T+ expression");
                }
                let a = self.optional_sub()?;
                self.eat('[')?;
                let arg = self.term_tree()?;
                self.skip_ws();
                self.eat(']')?;
                Ok(DecoratedTree::planted(a, arg))
            }
            _ => self.err("expected a factor"),
        }
    }

    fn factor_plus(&mut self) -> Result<PlusTree, CoreError> {
        match self.peek() {
            Some('1') => {
                self.pos += 1;
                Ok(PlusTree::one())
            }
            Some('X') => {
                self.pos += 1;
                if self.peek() == Some('i') {
                    return self.err("Xi is not an element of T+");
                }
                Ok(PlusTree::x_pow(self.x_exponent()?))
            }
            Some('o') => self.err("extended decorations are not legal at a T+ root"),
            Some('I') => {
                self.pos += 1;
                if self.peek() != Some('+') {
                    return self.err("a T+ expression uses I+ factors");
                }
                self.pos += 1;
                let a = self.optional_sub()?;
                self.eat('[')?;
                let arg = self.term_tree()?;
                self.skip_ws();
                self.eat(']')?;
                Ok(PlusTree::planted(a, arg))
            }
            _ => self.err("expected a factor"),
        }
    }

    /// After an `X`: either `^midx` or the implicit exponent `e_1`.
    fn x_exponent(&mut self) -> Result<MultiIndex, CoreError> {
        if self.peek() == Some('^') {
            self.pos += 1;
            self.midx()
        } else {
            Ok(MultiIndex::unit(0))
        }
    }

    fn optional_sub(&mut self) -> Result<MultiIndex, CoreError> {
        if self.peek() == Some('_') {
            self.pos += 1;
            self.midx()
        } else {
            Ok(MultiIndex::zero())
        }
    }

    fn midx(&mut self) -> Result<MultiIndex, CoreError> {
        self.eat('(')?;
        let mut entries = Vec::new();
        loop {
            let v = self.int()?;
            if v < 0 {
                return self.err("multi-index entries must be non-negative");
            }
            entries.push(v as u32);
            match self.bump() {
                Some(',') => continue,
                Some(')') => break,
                _ => return self.err("expected ',' or ')' in multi-index"),
            }
        }
        Ok(MultiIndex::new(entries))
    }

    fn int(&mut self) -> Result<i64, CoreError> {
        self.skip_ws();
        let neg = if self.peek() == Some('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let v: i64 = match text.parse() {
            Ok(v) => v,
            Err(_) => return self.err("integer out of range"),
        };
        Ok(if neg { -v } else { v })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_atoms() {
        assert_eq!(parse_tree("Xi").unwrap(), DecoratedTree::xi());
        assert_eq!(parse_tree("1").unwrap(), DecoratedTree::one());
        assert_eq!(parse_tree("X").unwrap(), DecoratedTree::x_i(0));
        assert_eq!(
            parse_tree("X^(2)").unwrap(),
            DecoratedTree::x_pow(MultiIndex::new(vec![2]))
        );
    }

    #[test]
    fn grammar_example() {
        // "X^(2) I_(1)[Xi]": root poly (2), one Kernel(1) child Xi.
        let t = parse_tree("X^(2) I_(1)[Xi]").unwrap();
        let direct = DecoratedTree::x_pow(MultiIndex::new(vec![2]))
            .product(&DecoratedTree::planted(MultiIndex::unit(0), DecoratedTree::xi()));
        assert_eq!(t, direct);
    }

    #[test]
    fn ext_decoration() {
        let t = parse_tree("o[2,1,0]").unwrap();
        assert_eq!(t, DecoratedTree::ext_node(Degree::new(2, 1, 0)));
        let t = parse_tree("X o[-1,0,3]").unwrap();
        assert_eq!(t.root_ext, Degree::new(-1, 0, 3));
        // Unicode minus accepted.
        let t2 = parse_tree("X o[\u{2212}1,0,3]").unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn plus_context() {
        let s = parse_plus("X^(2) I+_(1)[Xi I[Xi]]").unwrap();
        assert_eq!(s.poly, MultiIndex::new(vec![2]));
        assert_eq!(s.factors().len(), 1);
        assert!(parse_tree("I+[Xi]").is_err());
        assert!(parse_plus("Xi").is_err());
    }

    #[test]
    fn error_positions() {
        match parse_tree("X^(2) I_(1)[Xi").unwrap_err() {
            CoreError::Parse { pos, .. } => assert_eq!(pos, 14),
            other => panic!("unexpected error {other}"),
        }
        assert!(parse_tree("").is_err());
        assert!(parse_tree("Q").is_err());
    }

    #[test]
    fn round_trip_is_identity_on_canonical_trees() {
        let exprs = [
            "1",
            "Xi",
            "X",
            "X^(3)",
            "I[Xi] Xi",
            "X o[2,1,0] I_(1)[X^(2) Xi] I_(1)[X^(2) Xi]",
            "I[I[Xi] Xi] Xi Xi",
        ];
        for e in exprs {
            let t = parse_tree(e).unwrap();
            assert_eq!(parse_tree(&print_tree(&t)).unwrap(), t);
        }
        let p = parse_plus("X^(2) I+[Xi] I+_(2)[I[Xi] Xi]").unwrap();
        assert_eq!(parse_plus(&print_plus(&p)).unwrap(), p);
    }
}

//! Evaluator for exact values written with radicals, e.g.
//! `(3+sqrt(5)+sqrt(94+30*sqrt(5)))/40` or `√(31+12√5)/15`.
//!
//! Grammar: `+ - * /`, parentheses, unsigned decimal literals, `sqrt(..)`
//! and the prefix `√`, which binds tighter than `*` and applies to the next
//! literal, parenthesised group or nested root. A root or parenthesis
//! directly after a factor multiplies it, as in `3√5` or `2(1+√3)`.

use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, chars: src.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(), pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn err(&self, what: &str) -> Error {
        let at = self.chars.get(self.pos).map_or(self.src.len(), |&(i, _)| i);
        Error::Parse(format!("radical {:?}: {what} at byte {at}", self.src))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v += self.term()?;
            } else if self.eat('-') || self.eat('−') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') || self.eat('×') {
                v *= self.unary()?;
            } else if self.eat('/') || self.eat('÷') {
                let den = self.unary()?;
                if den == 0.0 {
                    return Err(self.err("division by zero"));
                }
                v /= den;
            } else if matches!(self.peek(), Some('√' | 's' | '(')) {
                v *= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat('-') || self.eat('−') {
            return Ok(-self.unary()?);
        }
        self.atom()
    }

    fn root_of(&self, v: f64) -> Result<f64> {
        if v < 0.0 {
            return Err(self.err("square root of a negative value"));
        }
        Ok(v.sqrt())
    }

    fn atom(&mut self) -> Result<f64> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(v)
            }
            Some('√') => {
                self.pos += 1;
                let v = self.atom()?;
                self.root_of(v)
            }
            Some('s') => {
                for c in "sqrt".chars() {
                    if !self.eat(c) {
                        return Err(self.err("unknown identifier"));
                    }
                }
                if !self.eat('(') {
                    return Err(self.err("expected '(' after sqrt"));
                }
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                self.root_of(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                self.pos += 1;
                // Whitespace ends a literal: the byte offsets must be contiguous.
                while matches!(self.chars.get(self.pos), Some(&(i, c)) if (c.is_ascii_digit() || c == '.') && i == self.chars[self.pos - 1].0 + 1)
                {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
                text.parse().map_err(|_| self.err("bad number"))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end")),
        }
    }
}

pub fn eval_radical(src: &str) -> Result<f64> {
    let mut p = Parser::new(src);
    let v = p.expr()?;
    if p.pos != p.chars.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" integer ] ;
//! integer = [ "-" ] digit { digit } ;
//! primary = number | "x" | "pi" | "e" | ident
//!         | ("sin" | "cos" | "exp" | "sqrt") "(" expr ")"
//!         | "shift" "(" expr "," [ "-" ] number ")"
//!         | "(" expr ")" ;
//! ```
//!
//! Any identifier other than the reserved words is a named parameter
//! (for example `eps` in a net generator).

use super::expr::{Expr, Func};
use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, expected: &[&str]) -> Error {
        Error::Syntax {
            position: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            let s = (c as char).to_string();
            Err(self.error(&[s.as_str()]))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let n = self.integer()?;
            Ok(Expr::Pow(Box::new(base), n))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.error(&["integer exponent"]));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<i32>().map_err(|_| {
            self.pos = start;
            self.error(&["integer exponent in i32 range"])
        })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digit = |p: &Self, i: usize| p.src.get(i).is_some_and(|c| c.is_ascii_digit());
        while digit(self, self.pos) {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while digit(self, self.pos) {
                self.pos += 1;
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let mut q = self.pos + 1;
            if matches!(self.src.get(q), Some(b'+') | Some(b'-')) {
                q += 1;
            }
            if digit(self, q) {
                self.pos = q;
                while digit(self, self.pos) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.error(&["number"]))
            }
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8(self.src[start..self.pos].to_vec()).expect("ascii")
    }

    fn call_arg(&mut self) -> Result<Expr> {
        self.expect(b'(')?;
        let e = self.expr()?;
        self.expect(b')')?;
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr> {
        const START: &[&str] = &["number", "x", "identifier", "function call", "("];
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let at = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "x" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => Ok(Expr::Const(std::f64::consts::E)),
                    "sin" => Ok(Expr::Func(Func::Sin, Box::new(self.call_arg()?))),
                    "cos" => Ok(Expr::Func(Func::Cos, Box::new(self.call_arg()?))),
                    "exp" => Ok(Expr::Func(Func::Exp, Box::new(self.call_arg()?))),
                    "sqrt" => {
                        let arg_at = self.pos;
                        let arg = self.call_arg()?;
                        if arg.depends_on_x() || !arg.params().is_empty() {
                            self.pos = arg_at;
                            return Err(self.error(&["constant argument to sqrt"]));
                        }
                        match arg.eval(0.0) {
                            Ok(v) if v > 0.0 => Ok(Expr::Sqrt(Box::new(arg))),
                            _ => {
                                self.pos = arg_at;
                                Err(self.error(&["positive argument to sqrt"]))
                            }
                        }
                    }
                    "shift" => {
                        self.expect(b'(')?;
                        let e = self.expr()?;
                        self.expect(b',')?;
                        let neg = self.eat(b'-');
                        let w = self.number()?;
                        self.expect(b')')?;
                        Ok(Expr::Shift(Box::new(e), if neg { -w } else { w }))
                    }
                    _ => {
                        if self.peek() == Some(b'(') {
                            self.pos = at;
                            return Err(self.error(&["sin", "cos", "exp", "sqrt", "shift"]));
                        }
                        Ok(Expr::Param(name))
                    }
                }
            }
            _ => Err(self.error(START)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sine() {
        assert_eq!(parse("sin(x)").unwrap(), Expr::Var.sin());
    }

    #[test]
    fn parses_classical_almost_automorphic_example() {
        let e = parse("sin(1/(2+cos(x)+cos(sqrt(2)*x)))").unwrap();
        let x: f64 = 0.8;
        let expected = (1.0 / (2.0 + x.cos() + (2f64.sqrt() * x).cos())).sin();
        assert!((e.eval(x).unwrap() - expected).abs() < 1e-15);
        assert!(matches!(e, Expr::Func(Func::Sin, _)));
    }

    #[test]
    fn double_caret_fails_at_offset_two() {
        match parse("x^^2") {
            Err(Error::Syntax { position, expected }) => {
                assert_eq!(position, 2);
                assert!(expected.iter().any(|s| s.contains("integer")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("1 - 2 - 3").unwrap().eval(0.0).unwrap(), -4.0);
        assert_eq!(parse("2 * 3 ^ 2").unwrap().eval(0.0).unwrap(), 18.0);
        assert_eq!(parse("-x^2").unwrap().eval(3.0).unwrap(), -9.0);
        assert_eq!(parse("x^-2").unwrap().eval(2.0).unwrap(), 0.25);
        assert_eq!(parse("8 / 4 / 2").unwrap().eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn parameters_and_constants() {
        let e = parse("exp(-1/eps) * sin(x/eps)").unwrap();
        assert_eq!(e.params().into_iter().collect::<Vec<_>>(), vec!["eps".to_string()]);
        assert_eq!(parse("pi").unwrap(), Expr::Const(std::f64::consts::PI));
        assert_eq!(parse("2e-3").unwrap(), Expr::Const(0.002));
        assert!(parse("2*e").is_ok());
    }

    #[test]
    fn shift_syntax() {
        let e = parse("shift(sin(x), -1.5)").unwrap();
        assert_eq!(e, Expr::Shift(Box::new(Expr::Var.sin()), -1.5));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "sin x", "sqrt(x)", "sqrt(-2)", "foo(x)", "(x", "x +", "1..2", "x 2"] {
            assert!(parse(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn print_then_parse_round_trips() {
        for src in [
            "sin(1/(2+cos(x)+cos(sqrt(2)*x)))",
            "-x^2 - -x * (x - 1) / (x + 2)",
            "(x^2)^3 + exp(-(x))",
            "shift(sin(x) * eps, -0.25) + 1e-7",
            "x - (x - x) - --x",
        ] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
    }
}

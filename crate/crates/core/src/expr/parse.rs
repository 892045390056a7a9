//! Infix expression syntax.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)?
//! exponent := integer | '-' integer | '(' '-'? integer ')'
//! atom     := number | 'pi' | variable | call | '(' expr ')'
//! variable := 'x' digits            (1-based real coordinate)
//! call     := ('exp' | 'log' | 'sqrt') '(' expr ')'
//!           | ('re' | 'im' | 'absq') '(' 'z' digits ')'
//!           | 'flat' '(' expr (',' integer)? ')'
//! ```
//!
//! `re(zj)`, `im(zj)` and `absq(zj)` expand to `x{2j-1}`, `x{2j}` and
//! `x{2j-1}^2 + x{2j}^2`. `flat(u, p)` is `exp(-1/u) * u^(-p)` for `u > 0` and
//! `0` otherwise (`p` defaults to 0). Whitespace, including newlines, is free.

use super::Expr;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: tl,
                column: tc,
            })
        };
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                line: tl,
                column: tc,
                message: format!("malformed number '{text}'"),
            })?;
            col += i - start;
            push(&mut out, Tok::Num(v));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            push(&mut out, Tok::Ident(text));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                return Err(Error::Parse {
                    line: tl,
                    column: tc,
                    message: format!("unexpected character '{c}'"),
                })
            }
        };
        push(&mut out, tok);
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, tok: &Token, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: tok.line,
            column: tok.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            self.error(&t, format!("expected {what}, found {}", describe(&t.tok)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Op('+') => {
                    self.next();
                    lhs = lhs + self.term()?;
                }
                Tok::Op('-') => {
                    self.next();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Op('*') => {
                    self.next();
                    lhs = lhs * self.unary()?;
                }
                Tok::Op('/') => {
                    self.next();
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().tok == Tok::Op('-') {
            self.next();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Op('^') {
            return Ok(base);
        }
        self.next();
        let n = self.exponent()?;
        if self.peek().tok == Tok::Op('^') {
            let t = self.peek().clone();
            return self.error(&t, "chained '^' is ambiguous; add parentheses");
        }
        Ok(base.powi(n))
    }

    fn integer(&mut self) -> Result<i64> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => Ok(v as i64),
            Tok::Num(_) => self.error(&t, "exponent must be an integer (use sqrt for 1/2)"),
            _ => self.error(&t, format!("expected integer, found {}", describe(&t.tok))),
        }
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = self.peek().tok == Tok::LParen;
        if paren {
            self.next();
        }
        let neg = self.peek().tok == Tok::Op('-');
        if neg {
            self.next();
        }
        let n = self.integer()?;
        if paren {
            self.expect(Tok::RParen, "')'")?;
        }
        Ok(if neg { -(n as i32) } else { n as i32 })
    }

    fn complex_index(&mut self) -> Result<usize> {
        let t = self.next();
        if let Tok::Ident(name) = &t.tok {
            if let Some(j) = name.strip_prefix('z').and_then(|d| d.parse::<usize>().ok()) {
                if j >= 1 {
                    return Ok(j - 1);
                }
            }
        }
        self.error(&t, "expected a complex coordinate z1, z2, ...")
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::constant(*v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name == "pi" {
                    return Ok(Expr::constant(std::f64::consts::PI));
                }
                if let Some(k) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if k == 0 {
                        return self.error(&t, "variables are numbered from x1");
                    }
                    return Ok(Expr::var(k - 1));
                }
                match name.as_str() {
                    "exp" | "log" | "sqrt" => {
                        self.expect(Tok::LParen, "'('")?;
                        let a = self.expr()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(match name.as_str() {
                            "exp" => a.exp(),
                            "log" => a.ln(),
                            _ => a.sqrt(),
                        })
                    }
                    "re" | "im" | "absq" => {
                        self.expect(Tok::LParen, "'('")?;
                        let j = self.complex_index()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(match name.as_str() {
                            "re" => Expr::re_z(j),
                            "im" => Expr::im_z(j),
                            _ => Expr::abs_sq_z(j),
                        })
                    }
                    "flat" => {
                        self.expect(Tok::LParen, "'('")?;
                        let a = self.expr()?;
                        let mut p = 0;
                        if self.peek().tok == Tok::Comma {
                            self.next();
                            let pt = self.peek().clone();
                            let v = self.integer()?;
                            if v < 0 {
                                return self.error(&pt, "flat power must be non-negative");
                            }
                            p = v as u32;
                        }
                        self.expect(Tok::RParen, "')'")?;
                        Ok(a.flat(p))
                    }
                    _ => self.error(&t, format!("unknown identifier '{name}'")),
                }
            }
            other => self.error(&t, format!("unexpected {}", describe(other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Op(c) => format!("'{c}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses an expression in the infix syntax described in the module docs.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return p.error(&t, format!("unexpected {} after expression", describe(&t.tok)));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, x: &[f64]) -> f64 {
        parse(src).unwrap().eval(x).unwrap()
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(eval("1 + 2*3", &[]), 7.0);
        assert_eq!(eval("-x1^2", &[3.0]), -9.0);
        assert_eq!(eval("2^(-1)", &[]), 0.5);
        assert_eq!(eval("2^-2", &[]), 0.25);
        assert_eq!(eval("8/2/2", &[]), 2.0);
        assert_eq!(eval("1 - 2 - 3", &[]), -4.0);
        assert_eq!(eval("1.5e1 + .5", &[]), 15.5);
    }

    #[test]
    fn complex_helpers() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(eval("re(z2)", &x), 3.0);
        assert_eq!(eval("im(z1)", &x), 2.0);
        assert_eq!(eval("absq(z2)", &x), 25.0);
        assert_eq!(eval("2*re(z2) + absq(z1)^2", &x), 31.0);
    }

    #[test]
    fn functions() {
        assert_eq!(eval("exp(0) + log(1) + sqrt(4)", &[]), 3.0);
        assert_eq!(eval("flat(0 - 1)", &[]), 0.0);
        assert!((eval("flat(x1, 1)", &[0.5]) - 2.0 * (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn errors_report_position() {
        match parse("x1 +\n  * 2") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match parse("x1^0.5") {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!((line, column), (1, 4));
                assert!(message.contains("integer"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("foo(x1)").is_err());
        assert!(parse("re(x1)").is_err());
        assert!(parse("(x1 + 1").is_err());
        assert!(parse("x1 x2").is_err());
        assert!(parse("x0").is_err());
        assert!(parse("x1 $ 2").is_err());
    }
}

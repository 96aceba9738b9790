//! Line-oriented surface definition format.
//!
//! ```text
//! # Clifford torus
//! const s2 = sqrt(2);
//! x1 = cos(u)/s2; x2 = sin(u)/s2;
//! x3 = cos(v)/s2; x4 = sin(v)/s2;
//! domain periodic u in [0, 2*pi], v in [0, 2*pi]
//! ```
//!
//! Statements end with `;` or a newline. `const` bindings are numbers (they
//! may use earlier constants and `pi`), `let` bindings are local
//! subexpressions in `u` and `v`. `domain periodic ...` marks both axes
//! periodic; a single axis is marked with a trailing `periodic`, as in
//! `v in [0, 2*pi] periodic`.

use super::ast::{BinOp, Expr, Func, Param};
use super::ExprError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Newline,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let mut out = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        let line_no = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let ch = chars[i];
            let col = i + 1;
            if ch == '#' {
                break;
            }
            if ch.is_whitespace() {
                i += 1;
                continue;
            }
            if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
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
                let value = text.parse::<f64>().map_err(|_| ExprError::Syntax {
                    line: line_no,
                    col,
                    msg: format!("malformed number `{text}`"),
                })?;
                out.push(Token {
                    tok: Tok::Num(value),
                    line: line_no,
                    col,
                });
                continue;
            }
            if ch.is_alphabetic() || ch == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: line_no,
                    col,
                });
                continue;
            }
            if "+-*/^(),;=[]".contains(ch) {
                out.push(Token {
                    tok: Tok::Op(ch),
                    line: line_no,
                    col,
                });
                i += 1;
                continue;
            }
            return Err(ExprError::Syntax {
                line: line_no,
                col,
                msg: format!("unexpected character `{ch}`"),
            });
        }
        out.push(Token {
            tok: Tok::Newline,
            line: line_no,
            col: chars.len() + 1,
        });
    }
    let line = src.lines().count().max(1);
    out.push(Token {
        tok: Tok::Eof,
        line,
        col: 1,
    });
    Ok(out)
}

/// Raw result of parsing, before names are checked and resolved.
#[derive(Clone, Debug, Default)]
pub struct ParsedSurface {
    pub consts: Vec<(String, Expr)>,
    pub lets: Vec<(String, Expr)>,
    pub components: Vec<(usize, Expr)>,
    pub domain: Option<ParsedDomain>,
    /// Source position of every name reference, for error reporting.
    pub name_positions: Vec<(String, usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct ParsedDomain {
    pub u: (Expr, Expr, bool),
    pub v: (Expr, Expr, bool),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    names: Vec<(String, usize, usize)>,
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

    fn err<T>(&self, t: &Token, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn expect_op(&mut self, op: char) -> Result<(), ExprError> {
        let t = self.next();
        if t.tok == Tok::Op(op) {
            Ok(())
        } else {
            self.err(&t, format!("expected `{op}`, found {}", describe(&t.tok)))
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.next();
        }
    }

    fn is_op(&self, op: char) -> bool {
        self.peek().tok == Tok::Op(op)
    }

    fn end_statement(&mut self) -> Result<(), ExprError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Op(';') | Tok::Newline => {
                self.next();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.err(&t, format!("expected `;` or end of line, found {}", describe(&t.tok))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek().tok {
            Tok::Op('-') => {
                self.next();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.is_op('^') {
            self.next();
            // Right associative, and binds tighter than a unary minus on its left.
            let exp = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let t = self.next();
        match t.tok {
            Tok::Num(x) => Ok(Expr::Num(x)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::Ident(ref name) => {
                if self.is_op('(') {
                    let Some(func) = Func::from_name(name) else {
                        return Err(ExprError::UnknownIdentifier {
                            name: name.clone(),
                            line: t.line,
                            col: t.col,
                        });
                    };
                    self.next();
                    let mut args = Vec::new();
                    if !self.is_op(')') {
                        loop {
                            args.push(self.expr()?);
                            if self.is_op(',') {
                                self.next();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect_op(')')?;
                    if args.len() != func.arity() {
                        return Err(ExprError::Arity {
                            func: func.name().to_string(),
                            expected: func.arity(),
                            found: args.len(),
                            line: t.line,
                            col: t.col,
                        });
                    }
                    return Ok(Expr::Call(func, args));
                }
                match name.as_str() {
                    "u" => Ok(Expr::Param(Param::U)),
                    "v" => Ok(Expr::Param(Param::V)),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    _ => {
                        self.names.push((name.clone(), t.line, t.col));
                        Ok(Expr::Name(name.clone()))
                    }
                }
            }
            _ => self.err(&t, format!("expected an expression, found {}", describe(&t.tok))),
        }
    }

    fn ident(&mut self) -> Result<(String, Token), ExprError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            _ => self.err(&t, format!("expected a name, found {}", describe(&t.tok))),
        }
    }

    fn interval(&mut self) -> Result<(Expr, Expr), ExprError> {
        self.expect_op('[')?;
        let a = self.expr()?;
        self.expect_op(',')?;
        let b = self.expr()?;
        self.expect_op(']')?;
        Ok((a, b))
    }

    fn axis(&mut self, all_periodic: bool) -> Result<(Param, (Expr, Expr, bool)), ExprError> {
        let mut periodic = all_periodic;
        let (mut name, mut tok) = self.ident()?;
        if name == "periodic" {
            periodic = true;
            (name, tok) = self.ident()?;
        }
        let param = match name.as_str() {
            "u" => Param::U,
            "v" => Param::V,
            _ => return self.err(&tok, format!("expected axis `u` or `v`, found `{name}`")),
        };
        let (kw, kwtok) = self.ident()?;
        if kw != "in" {
            return self.err(&kwtok, format!("expected `in`, found `{kw}`"));
        }
        let (a, b) = self.interval()?;
        if let Tok::Ident(s) = &self.peek().tok {
            if s == "periodic" {
                self.next();
                periodic = true;
            }
        }
        Ok((param, (a, b, periodic)))
    }

    fn domain(&mut self, start: &Token) -> Result<ParsedDomain, ExprError> {
        let mut all_periodic = false;
        if let Tok::Ident(s) = &self.peek().tok {
            if s == "periodic" {
                all_periodic = true;
                self.next();
            }
        }
        let (p1, a1) = self.axis(all_periodic)?;
        self.expect_op(',')?;
        let (p2, a2) = self.axis(all_periodic)?;
        match (p1, p2) {
            (Param::U, Param::V) => Ok(ParsedDomain { u: a1, v: a2 }),
            (Param::V, Param::U) => Ok(ParsedDomain { u: a2, v: a1 }),
            _ => self.err(start, "domain must give one interval for `u` and one for `v`"),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(x) => format!("number `{x}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::Newline => "end of line".into(),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse(src: &str) -> Result<ParsedSurface, ExprError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        names: Vec::new(),
    };
    let mut out = ParsedSurface::default();
    loop {
        p.skip_newlines();
        if p.is_op(';') {
            p.next();
            continue;
        }
        let t = p.next();
        let Tok::Ident(word) = &t.tok else {
            if t.tok == Tok::Eof {
                break;
            }
            return p.err(&t, format!("expected a statement, found {}", describe(&t.tok)));
        };
        match word.as_str() {
            "const" | "let" => {
                let (name, ntok) = p.ident()?;
                if matches!(name.as_str(), "u" | "v" | "pi") || Func::from_name(&name).is_some() {
                    return p.err(&ntok, format!("`{name}` is reserved"));
                }
                p.expect_op('=')?;
                let e = p.expr()?;
                p.end_statement()?;
                if word == "const" {
                    out.consts.push((name, e));
                } else {
                    out.lets.push((name, e));
                }
            }
            "domain" => {
                if out.domain.is_some() {
                    return p.err(&t, "duplicate domain statement");
                }
                out.domain = Some(p.domain(&t)?);
                p.end_statement()?;
            }
            w if w.len() == 2 && w.starts_with('x') && matches!(&w[1..], "1" | "2" | "3" | "4") => {
                let k: usize = w[1..].parse().unwrap();
                p.expect_op('=')?;
                let e = p.expr()?;
                p.end_statement()?;
                if out.components.iter().any(|(i, _)| *i == k) {
                    return p.err(&t, format!("component `{w}` defined twice"));
                }
                out.components.push((k, e));
            }
            _ => {
                return p.err(&t, format!("unknown statement `{word}`"));
            }
        }
    }
    out.name_positions = p.names;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let s = parse("x1 = -u^2 + 2*v/4 - 2^3^2").unwrap();
        let e = &s.components[0].1;
        let resolved = e.resolve(&|_| None);
        let u = 0.5_f64;
        let v = 3.0_f64;
        let f = resolved.resolve(&|_| None);
        let j = f.eval_jet(&crate::jet::Jet::constant(u), &crate::jet::Jet::constant(v), &[]);
        assert!((j.value() - (-(u * u) + 2.0 * v / 4.0 - 2f64.powf(9.0))).abs() < 1e-12);
    }

    #[test]
    fn reports_position_of_syntax_error() {
        let err = parse("x1 = u\nx2 = (v + ;\n").unwrap_err();
        match err {
            ExprError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 11);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arity_is_checked() {
        let err = parse("x1 = pow(u)").unwrap_err();
        assert!(matches!(err, ExprError::Arity { expected: 2, found: 1, .. }));
        let err = parse("x1 = sin(u, v)").unwrap_err();
        assert!(matches!(err, ExprError::Arity { expected: 1, found: 2, .. }));
    }

    #[test]
    fn domain_forms() {
        let s = parse("domain periodic u in [0, 2*pi], v in [0, 1]").unwrap();
        let d = s.domain.unwrap();
        assert!(d.u.2 && d.v.2);
        let s = parse("domain v in [0, 1] periodic, u in [-1, 1]").unwrap();
        let d = s.domain.unwrap();
        assert!(!d.u.2 && d.v.2);
    }

    #[test]
    fn display_round_trips_through_the_parser() {
        let src = "x1 = -(u - v)^2/(1 + u*u) - sin(-v)^-2 + pow(u, 0.5e-1)";
        let s = parse(src).unwrap();
        let printed = format!("x1 = {}", s.components[0].1);
        let again = parse(&printed).unwrap();
        assert_eq!(s.components[0].1, again.components[0].1);
    }
}

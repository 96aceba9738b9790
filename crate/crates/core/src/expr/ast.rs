use std::fmt;

use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Param {
    U,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
    Pow,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }

    fn apply_f64(self, args: &[f64]) -> f64 {
        match self {
            Func::Sin => args[0].sin(),
            Func::Cos => args[0].cos(),
            Func::Exp => args[0].exp(),
            Func::Log => args[0].ln(),
            Func::Sqrt => args[0].sqrt(),
            Func::Atan => args[0].atan(),
            Func::Pow => args[0].powf(args[1]),
        }
    }

    fn apply_jet(self, args: &[Jet]) -> Jet {
        match self {
            Func::Sin => args[0].sin(),
            Func::Cos => args[0].cos(),
            Func::Exp => args[0].exp(),
            Func::Log => args[0].ln(),
            Func::Sqrt => args[0].sqrt(),
            Func::Atan => args[0].atan(),
            Func::Pow => args[0].pow(&args[1]),
        }
    }
}

/// Expression tree of an immersion component.
///
/// `Name` nodes come straight from the parser; [`Expr::resolve`] turns them
/// into numbers (named constants) or `Slot` references (local definitions).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Param(Param),
    Name(String),
    Slot(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn u() -> Expr {
        Expr::Param(Param::U)
    }

    pub fn v() -> Expr {
        Expr::Param(Param::V)
    }

    pub fn name(s: &str) -> Expr {
        Expr::Name(s.to_string())
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Expr {
        Expr::Call(f, args)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Visits every unresolved name in the tree.
    pub fn for_each_name<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Name(n) => f(n),
            Expr::Neg(a) => a.for_each_name(f),
            Expr::Bin(_, a, b) => {
                a.for_each_name(f);
                b.for_each_name(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.for_each_name(f)),
            _ => {}
        }
    }

    pub fn uses_params(&self) -> bool {
        match self {
            Expr::Param(_) | Expr::Slot(_) => true,
            Expr::Neg(a) => a.uses_params(),
            Expr::Bin(_, a, b) => a.uses_params() || b.uses_params(),
            Expr::Call(_, args) => args.iter().any(Expr::uses_params),
            _ => false,
        }
    }

    /// Replaces names using `lookup`; names it does not know are left alone.
    pub fn resolve(&self, lookup: &impl Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Name(n) => lookup(n).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.resolve(lookup))),
            Expr::Bin(op, a, b) => {
                Expr::Bin(*op, Box::new(a.resolve(lookup)), Box::new(b.resolve(lookup)))
            }
            Expr::Call(f, args) => Expr::Call(*f, args.iter().map(|a| a.resolve(lookup)).collect()),
            _ => self.clone(),
        }
    }

    /// Replaces `u` and `v` by the given expressions.
    pub fn substitute_params(&self, u: &Expr, v: &Expr) -> Expr {
        match self {
            Expr::Param(Param::U) => u.clone(),
            Expr::Param(Param::V) => v.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute_params(u, v))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.substitute_params(u, v)), Box::new(b.substitute_params(u, v))),
            Expr::Call(f, args) => Expr::Call(*f, args.iter().map(|a| a.substitute_params(u, v)).collect()),
            _ => self.clone(),
        }
    }

    /// Evaluates a parameter-free expression. Returns `None` if the tree still
    /// refers to `u`, `v`, slots or names.
    pub fn eval_const(&self) -> Option<f64> {
        Some(match self {
            Expr::Num(x) => *x,
            Expr::Param(_) | Expr::Name(_) | Expr::Slot(_) => return None,
            Expr::Neg(a) => -a.eval_const()?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval_const()?, b.eval_const()?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let vals: Option<Vec<f64>> = args.iter().map(Expr::eval_const).collect();
                f.apply_f64(&vals?)
            }
        })
    }

    /// Evaluates the tree on jets. `slots` holds already-evaluated local
    /// definitions.
    pub fn eval_jet(&self, u: &Jet, v: &Jet, slots: &[Jet]) -> Jet {
        match self {
            Expr::Num(x) => Jet::constant(*x),
            Expr::Param(Param::U) => *u,
            Expr::Param(Param::V) => *v,
            Expr::Slot(k) => slots[*k],
            Expr::Name(n) => panic!("unresolved name `{n}` reached evaluation"),
            Expr::Neg(a) => -a.eval_jet(u, v, slots),
            Expr::Bin(op, a, b) => {
                let x = a.eval_jet(u, v, slots);
                match op {
                    BinOp::Pow => match b.eval_const() {
                        Some(p) => x.powf(p),
                        None => x.pow(&b.eval_jet(u, v, slots)),
                    },
                    _ => {
                        let y = b.eval_jet(u, v, slots);
                        match op {
                            BinOp::Add => x + y,
                            BinOp::Sub => x - y,
                            BinOp::Mul => x * y,
                            BinOp::Div => x / y,
                            BinOp::Pow => unreachable!(),
                        }
                    }
                }
            }
            Expr::Call(f, args) => {
                let vals: Vec<Jet> = args.iter().map(|a| a.eval_jet(u, v, slots)).collect();
                f.apply_jet(&vals)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(x) if *x < 0.0 => 3,
            _ => 5,
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Add, self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Mul, self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Div, self, rhs)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Param(Param::U) => write!(f, "u"),
            Expr::Param(Param::V) => write!(f, "v"),
            Expr::Name(n) => write!(f, "{n}"),
            Expr::Slot(k) => write!(f, "${k}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 4)
            }
            Expr::Bin(op, a, b) => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => ("+", 1, 2),
                    BinOp::Sub => ("-", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 4),
                };
                wrap(f, a, lp)?;
                write!(f, "{sym}")?;
                wrap(f, b, rp)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

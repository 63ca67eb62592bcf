//! Arithmetic expressions over `x` and `y` for source terms and boundary data.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x' | 'y' | 'pi' | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func   := abs | sqrt | sin | cos | exp | log | pow
//! ```

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{msg} at column {column}")]
pub struct ExprError {
    pub column: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Abs,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        if self == Func::Pow {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    Y,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression, evaluated with [`Expr::eval`].
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        let mut p = Parser {
            chars: source.char_indices().collect(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if let Some(&(i, c)) = p.chars.get(p.pos) {
            return Err(ExprError {
                column: i + 1,
                msg: format!("unexpected '{c}'"),
            });
        }
        Ok(Self {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        eval(&self.root, x, y)
    }

    /// True if the expression is a literal zero.
    pub fn is_zero(&self) -> bool {
        self.root == Node::Num(0.0)
    }
}

fn eval(n: &Node, x: f64, y: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X => x,
        Node::Y => y,
        Node::Neg(a) => -eval(a, x, y),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x, y), eval(b, x, y));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let a = eval(&args[0], x, y);
            match f {
                Func::Abs => a.abs(),
                Func::Sqrt => a.sqrt(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Pow => a.powf(eval(&args[1], x, y)),
            }
        }
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.1.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map_or_else(|| self.chars.last().map_or(1, |c| c.0 + 2), |c| c.0 + 1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            column: self.column(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: char) -> Result<(), ExprError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{want}'"))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.1.is_ascii_alphanumeric() || c.1 == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                match name.as_str() {
                    "x" => Ok(Node::X),
                    "y" => Ok(Node::Y),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    _ => {
                        let Some(f) = Func::lookup(&name) else {
                            self.pos = start;
                            return self.err(format!("unknown identifier '{name}'"));
                        };
                        self.expect('(')?;
                        let mut args = vec![self.expr()?];
                        while self.peek() == Some(',') {
                            self.pos += 1;
                            args.push(self.expr()?);
                        }
                        self.expect(')')?;
                        if args.len() != f.arity() {
                            self.pos = start;
                            return self.err(format!("{name} takes {} argument(s), got {}", f.arity(), args.len()));
                        }
                        Ok(Node::Call(f, args))
                    }
                }
            }
            Some(c) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let at = |p: &Self, i: usize| p.chars.get(i).map(|c| c.1);
        while at(self, self.pos).is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(at(self, self.pos), Some('e' | 'E')) {
            let mut look = self.pos + 1;
            if matches!(at(self, look), Some('+' | '-')) {
                look += 1;
            }
            if at(self, look).is_some_and(|c| c.is_ascii_digit()) {
                self.pos = look;
                while at(self, self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Num(v)),
            Err(_) => {
                self.pos = start;
                self.err(format!("malformed number '{text}'"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64, y: f64) -> f64 {
        Expr::parse(s).unwrap().eval(x, y)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-x^2", 3.0, 0.0), -9.0);
        assert_eq!(ev("x^2 - y^2", 1.5, 0.5), 2.0);
        assert_eq!(ev("(1 + x) * y", 2.0, 4.0), 12.0);
        assert_eq!(ev("2*-y", 0.0, 4.0), -8.0);
    }

    #[test]
    fn numbers_and_functions() {
        assert_eq!(ev("1e-3 * 2E2", 0.0, 0.0), 0.2);
        assert_eq!(ev(".5", 0.0, 0.0), 0.5);
        assert_eq!(ev("pow(abs(x), 1.5)", -4.0, 0.0), 8.0);
        assert_eq!(ev("exp(log(y))", 0.0, 2.5), 2.5f64.ln().exp());
        assert_eq!(
            ev("sin(x) * cos(y) + sqrt(4)", 0.3, 0.2),
            0.3f64.sin() * 0.2f64.cos() + 2.0
        );
        assert_eq!(ev("pi", 0.0, 0.0), std::f64::consts::PI);
        assert!(Expr::parse("0").unwrap().is_zero());
        assert!(!Expr::parse("x").unwrap().is_zero());
    }

    #[test]
    fn errors_report_columns() {
        let e = Expr::parse("x + z").unwrap_err();
        assert_eq!(e.column, 5);
        assert!(e.msg.contains("'z'"));
        assert_eq!(Expr::parse("pow(x)").unwrap_err().column, 1);
        assert_eq!(Expr::parse("(x + 1").unwrap_err().column, 7);
        assert_eq!(Expr::parse("x y").unwrap_err().column, 3);
        assert!(Expr::parse("").is_err());
        assert!(Expr::parse("1..2").is_err());
    }
}

use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, SourceSpan};
use crate::model::{
    AuxDef, BinOp, Builtin, Expr, LookupDef, ModelSpec, ParamDef, StockDef, VariableId,
};

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, what: &str, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::new(
            self.span(),
            format!("expected {what}, found {}", self.peek().describe()),
            expected.iter().map(|s| s.to_string()).collect(),
        ))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            let d = tok.describe();
            self.fail(&d, &[&d])
        }
    }

    fn ident(&mut self) -> Result<(VariableId, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((VariableId::new(s).expect("lexer checks identifiers"), span))
            }
            _ => self.fail("identifier", &["identifier"]),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == word => {
                self.bump();
                Ok(())
            }
            _ => {
                let d = format!("`{word}`");
                self.fail(&d, &[&d])
            }
        }
    }

    /// Number with an optional leading minus sign.
    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        match *self.peek() {
            Tok::Number(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => self.fail("number", &["number"]),
        }
    }

    fn unit(&mut self) -> String {
        match self.peek().clone() {
            Tok::Unit(u) => {
                self.bump();
                u
            }
            _ => String::new(),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.fail("end of input", &["end of input"])
        }
    }

    pub(crate) fn model(&mut self) -> Result<ModelSpec, ParseError> {
        self.keyword("model")?;
        let (name, _) = self.ident()?;
        let mut spec = ModelSpec::new(name.as_str());
        loop {
            let kw = match self.peek() {
                Tok::Eof => break,
                Tok::Ident(s) => s.clone(),
                _ => return self.fail("declaration", &["param", "lookup", "stock", "aux"]),
            };
            match kw.as_str() {
                "param" => {
                    self.bump();
                    let (id, _) = self.ident()?;
                    self.expect(Tok::Eq)?;
                    let value = self.signed_number()?;
                    let unit = self.unit();
                    spec.params.push(ParamDef::new(id, value, unit));
                }
                "lookup" => {
                    self.bump();
                    let (id, _) = self.ident()?;
                    self.expect(Tok::Eq)?;
                    let def = self.curve()?;
                    spec.lookups.insert(id, def);
                }
                "stock" => {
                    self.bump();
                    let (id, _) = self.ident()?;
                    self.expect(Tok::Eq)?;
                    let initial = self.expr()?;
                    let unit = self.unit();
                    self.expect(Tok::LBrace)?;
                    self.keyword("inflow")?;
                    self.expect(Tok::Colon)?;
                    let inflow = self.expr()?;
                    self.keyword("outflow")?;
                    self.expect(Tok::Colon)?;
                    let outflow = self.expr()?;
                    self.expect(Tok::RBrace)?;
                    spec.stocks.push(StockDef {
                        id,
                        initial,
                        inflow,
                        outflow,
                        unit,
                    });
                }
                "aux" => {
                    self.bump();
                    let (id, _) = self.ident()?;
                    self.expect(Tok::Eq)?;
                    let expr = self.expr()?;
                    let unit = self.unit();
                    spec.auxes.push(AuxDef { id, expr, unit });
                }
                _ => return self.fail("declaration", &["param", "lookup", "stock", "aux"]),
            }
        }
        Ok(spec)
    }

    fn curve(&mut self) -> Result<LookupDef, ParseError> {
        let kind = match self.peek() {
            Tok::Ident(s) if matches!(s.as_str(), "normal" | "lognormal" | "points") => s.clone(),
            _ => return self.fail("curve", &["normal(", "lognormal(", "points("]),
        };
        self.bump();
        self.expect(Tok::LParen)?;
        let def = if kind == "points" {
            let mut points = vec![self.point()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                points.push(self.point()?);
            }
            LookupDef::Points(points)
        } else {
            self.keyword("median")?;
            self.expect(Tok::Eq)?;
            let median = self.signed_number()?;
            self.expect(Tok::Comma)?;
            self.keyword("ratio90")?;
            self.expect(Tok::Eq)?;
            let ratio90 = self.signed_number()?;
            if kind == "normal" {
                LookupDef::Normal { median, ratio90 }
            } else {
                LookupDef::LogNormal { median, ratio90 }
            }
        };
        self.expect(Tok::RParen)?;
        Ok(def)
    }

    fn point(&mut self) -> Result<(f64, f64), ParseError> {
        self.expect(Tok::LParen)?;
        let x = self.signed_number()?;
        self.expect(Tok::Comma)?;
        let y = self.signed_number()?;
        self.expect(Tok::RParen)?;
        Ok((x, y))
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            // a minus directly on a numeric literal is a negative constant
            if let Tok::Number(v) = *self.peek() {
                if self.toks[self.pos + 1].tok != Tok::Caret {
                    self.bump();
                    return Ok(Expr::Const(-v));
                }
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?.0)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Call(name) => {
                let span = self.span();
                let Some(builtin) = Builtin::from_name(&name) else {
                    return Err(ParseError::new(
                        span,
                        format!("unknown function `{name}`"),
                        Builtin::ALL.iter().map(|b| b.name().to_string()).collect(),
                    ));
                };
                self.bump();
                self.expect(Tok::LParen)?;
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.expr()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                }
                self.expect(Tok::RParen)?;
                if !builtin.arity().accepts(args.len()) {
                    return Err(ParseError::new(
                        span,
                        format!(
                            "{name} expects {} argument(s), got {}",
                            builtin.arity(),
                            args.len()
                        ),
                        Vec::new(),
                    ));
                }
                Ok(Expr::Call(builtin, args))
            }
            _ => self.fail("expression", &["number", "identifier", "`(`", "`-`", "function call"]),
        }
    }
}

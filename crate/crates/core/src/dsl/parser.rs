use super::ast::{BundleDef, CmpOp, Expr, Located, Script, Statement, SweepParam, SweepValue};
use super::lexer::{tokenize, Tok, Token};
use super::{DslError, ErrorKind};

pub fn parse(text: &str) -> Result<Script, DslError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut statements = Vec::new();
    loop {
        parser.skip_newlines();
        if parser.peek() == &Tok::Eof {
            break;
        }
        let start = parser.current().clone();
        let node = parser.statement()?;
        parser.end_of_statement()?;
        statements.push(Located {
            node,
            line: start.line,
            column: start.column,
        });
    }
    Ok(Script { statements })
}

/// Parse a single expression, e.g. from a command-line argument.
pub fn parse_expr(text: &str) -> Result<Expr, DslError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    parser.skip_newlines();
    match parser.peek() {
        Tok::Eof => Ok(expr),
        _ => Err(parser.unexpected("end of expression")),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn current(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek(&self) -> &Tok {
        &self.current().tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn skip_newlines(&mut self) {
        while self.peek() == &Tok::Newline {
            self.bump();
        }
    }

    fn unexpected(&self, wanted: &str) -> DslError {
        let t = self.current();
        DslError::new(
            ErrorKind::Syntax,
            t.line,
            t.column,
            format!("expected {wanted}, found {}", t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, DslError> {
        if self.peek() == &tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), DslError> {
        match self.peek() {
            Tok::Ident(s) if s == word => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{word}`"))),
        }
    }

    fn key(&mut self, word: &str) -> Result<(), DslError> {
        self.keyword(word)?;
        self.expect(Tok::Assign)?;
        Ok(())
    }

    fn signed_int(&mut self) -> Result<i64, DslError> {
        let negative = if self.peek() == &Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn int_list(&mut self) -> Result<Vec<i64>, DslError> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if self.peek() != &Tok::RBracket {
            loop {
                out.push(self.signed_int()?);
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(out)
    }

    fn at_line_end(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof)
    }

    fn end_of_statement(&mut self) -> Result<(), DslError> {
        if self.at_line_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }

    fn statement(&mut self) -> Result<Statement, DslError> {
        let word = self.ident()?;
        match word.as_str() {
            "space" => self.space(),
            "let" => {
                let name = self.ident()?;
                self.expect(Tok::Assign)?;
                Ok(Statement::Let {
                    name,
                    value: self.expr()?,
                })
            }
            "bundle" => self.bundle(),
            "chi" => Ok(Statement::Chi(self.expr()?)),
            "dim" => Ok(Statement::Dim(self.expr()?)),
            "verify" => {
                let check = self.ident()?;
                let target = if self.at_line_end() {
                    None
                } else {
                    Some(self.expr()?)
                };
                Ok(Statement::Verify { check, target })
            }
            "sweep" => self.sweep(),
            "print" => Ok(Statement::Print(self.expr()?)),
            "assert" => {
                let lhs = self.expr()?;
                self.expect(Tok::EqEq)?;
                let rhs = self.expr()?;
                Ok(Statement::Assert { lhs, rhs })
            }
            other => {
                self.pos -= 1;
                Err(DslError::new(
                    ErrorKind::Syntax,
                    self.current().line,
                    self.current().column,
                    format!("unknown statement `{other}`"),
                ))
            }
        }
    }

    fn space(&mut self) -> Result<Statement, DslError> {
        self.key("n")?;
        let n = self.signed_int()?;
        let mut a = None;
        let mut c2 = None;
        while !self.at_line_end() {
            let key_token = self.current().clone();
            match self.ident()?.as_str() {
                "a" if a.is_none() => {
                    self.expect(Tok::Assign)?;
                    a = Some(self.int_list()?);
                }
                "c2" if c2.is_none() => {
                    self.expect(Tok::Assign)?;
                    let mode_token = self.current().clone();
                    let mode = self.ident()?;
                    if mode != "paper" && mode != "normalized" {
                        return Err(DslError::new(
                            ErrorKind::Syntax,
                            mode_token.line,
                            mode_token.column,
                            format!("c2 mode must be `paper` or `normalized`, found `{mode}`"),
                        ));
                    }
                    c2 = Some(mode);
                }
                other => {
                    return Err(DslError::new(
                        ErrorKind::Syntax,
                        key_token.line,
                        key_token.column,
                        format!("unexpected space option `{other}`"),
                    ))
                }
            }
        }
        Ok(Statement::Space { n, a, c2 })
    }

    fn bundle(&mut self) -> Result<Statement, DslError> {
        let name = self.ident()?;
        if self.peek() == &Tok::Assign {
            self.bump();
            self.keyword("bundle")?;
            self.expect(Tok::LParen)?;
            self.key("rank")?;
            let rank = self.signed_int()?;
            self.expect(Tok::Comma)?;
            self.key("c1")?;
            let c1 = self.int_list()?;
            self.expect(Tok::Comma)?;
            self.key("c2")?;
            let c2 = self.signed_int()?;
            self.expect(Tok::RParen)?;
            return Ok(Statement::Bundle {
                name,
                def: BundleDef::Pullback { rank, c1, c2 },
            });
        }
        self.key("rank")?;
        let rank = self.signed_int()?;
        self.key("c1")?;
        let c1 = self.expr()?;
        self.key("c2")?;
        let c2 = self.expr()?;
        let c3 = if self.at_line_end() {
            None
        } else {
            self.key("c3")?;
            Some(self.expr()?)
        };
        Ok(Statement::Bundle {
            name,
            def: BundleDef::General { rank, c1, c2, c3 },
        })
    }

    fn sweep(&mut self) -> Result<Statement, DslError> {
        let mut params = Vec::new();
        loop {
            let key = self.ident()?;
            if key == "verify" {
                let check = self.ident()?;
                return Ok(Statement::Sweep { params, check });
            }
            let op = match self.peek() {
                Tok::Le => CmpOp::Le,
                Tok::Ge => CmpOp::Ge,
                Tok::Assign => CmpOp::Eq,
                _ => return Err(self.unexpected("`<=`, `>=` or `=`")),
            };
            self.bump();
            let value = match self.peek() {
                Tok::Ident(w) => {
                    let w = w.clone();
                    self.bump();
                    SweepValue::Word(w)
                }
                _ => SweepValue::Int(self.signed_int()?),
            };
            params.push(SweepParam { key, op, value });
        }
    }

    pub fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        while self.peek() == &Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.peek() == &Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.postfix()?;
        if self.peek() != &Tok::Caret {
            return Ok(base);
        }
        self.bump();
        match *self.peek() {
            Tok::Int(k) => {
                let t = self.bump();
                let k = u32::try_from(k).map_err(|_| {
                    DslError::new(ErrorKind::Syntax, t.line, t.column, "exponent is too large")
                })?;
                Ok(Expr::Pow(Box::new(base), k))
            }
            _ => Err(self.unexpected("a non-negative integer exponent")),
        }
    }

    fn postfix(&mut self) -> Result<Expr, DslError> {
        let mut e = self.primary()?;
        while self.peek() == &Tok::LParen {
            self.bump();
            let arg = self.expr()?;
            self.expect(Tok::RParen)?;
            e = Expr::Apply(Box::new(e), Box::new(arg));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek() != &Tok::LParen {
                    return Ok(Expr::Name(name));
                }
                self.bump();
                let mut args = Vec::new();
                if self.peek() != &Tok::RParen {
                    loop {
                        args.push(self.expr()?);
                        if self.peek() == &Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(Expr::Call(name, args))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twist_sugar_is_postfix_application() {
        let e = parse_expr("End(V)(-S)").unwrap();
        assert_eq!(
            e,
            Expr::Apply(
                Box::new(Expr::Call("End".into(), vec![Expr::Name("V".into())])),
                Box::new(Expr::Neg(Box::new(Expr::Name("S".into()))))
            )
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse_expr("-w^2 + 3*e1*w").unwrap().to_string(),
            "-w^2 + 3*e1*w"
        );
        assert_eq!(parse_expr("(w + e1)^2").unwrap().to_string(), "(w + e1)^2");
        assert_eq!(
            parse_expr("w - (e1 - e2)").unwrap().to_string(),
            "w - (e1 - e2)"
        );
        assert_eq!(parse_expr("((w))").unwrap(), Expr::Name("w".into()));
    }

    #[test]
    fn bundle_forms() {
        let s = parse(
            "bundle V rank=2 c1=e1 - e2 c2=3*F\nbundle W = bundle(rank=2, c1=[1,-1], c2=3)\n",
        )
        .unwrap();
        assert_eq!(s.statements.len(), 2);
        assert!(matches!(
            s.statements[0].node,
            Statement::Bundle {
                def: BundleDef::General { c3: None, .. },
                ..
            }
        ));
        assert_eq!(s.statements[1].line, 2);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse("space n=2\nchi End(V)(-S").unwrap_err();
        assert_eq!((e.kind, e.line), (ErrorKind::Syntax, 2));
        let e = parse("space n=2 c2=other").unwrap_err();
        assert_eq!((e.kind, e.line, e.column), (ErrorKind::Syntax, 1, 14));
        let e = parse("frobnicate w").unwrap_err();
        assert_eq!((e.kind, e.column), (ErrorKind::Syntax, 1));
        let e = parse("print w w").unwrap_err();
        assert_eq!((e.kind, e.column), (ErrorKind::Syntax, 9));
    }

    #[test]
    fn sweep_parameters() {
        let s = parse("sweep n<=3 k>=-3 mode=both verify lemma2.5").unwrap();
        assert_eq!(
            s.to_string(),
            "sweep n<=3 k>=-3 mode=both verify lemma2.5\n"
        );
    }
}

use super::lexer::{tokenize, Token, TokenKind};
use super::{BinOp, Expr, Func, SyntaxError};

/// Largest accepted input.
pub const MAX_INPUT_BYTES: usize = 64 * 1024;
/// Tallest accepted expression tree, and deepest accepted nesting.
pub const MAX_DEPTH: usize = 512;

pub fn parse(text: &str) -> Result<Expr, SyntaxError> {
    if text.len() > MAX_INPUT_BYTES {
        return Err(SyntaxError::new(MAX_INPUT_BYTES, format!("at most {MAX_INPUT_BYTES} bytes of input")));
    }
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens: &tokens, pos: 0, depth: 0, end: text.len() };
    let (e, _) = p.expr()?;
    match p.peek() {
        None => Ok(e),
        Some(t) => Err(SyntaxError::new(t.offset, format!("an operator or end of input, found {}", t.kind.describe()))),
    }
}

/// [`parse`] for raw bytes, which must be UTF-8.
pub fn parse_bytes(bytes: &[u8]) -> Result<Expr, SyntaxError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => Err(SyntaxError::new(e.valid_up_to(), "UTF-8 text")),
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    depth: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), SyntaxError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(&kind.describe()))
        }
    }

    fn error(&self, expected: &str) -> SyntaxError {
        let found = self.peek().map_or("end of input".to_string(), |t| t.kind.describe());
        SyntaxError::new(self.offset(), format!("{expected}, found {found}"))
    }

    // Every node records the height of its subtree; trees taller than
    // MAX_DEPTH are rejected so that recursive evaluation stays shallow.
    fn node(&self, e: Expr, height: usize, at: usize) -> Result<(Expr, usize), SyntaxError> {
        if height > MAX_DEPTH {
            Err(SyntaxError::new(at, format!("an expression tree at most {MAX_DEPTH} levels deep")))
        } else {
            Ok((e, height))
        }
    }

    fn expr(&mut self) -> Result<(Expr, usize), SyntaxError> {
        let (mut lhs, mut h) = self.term()?;
        loop {
            let at = self.offset();
            let op = if self.eat(&TokenKind::Plus) {
                BinOp::Add
            } else if self.eat(&TokenKind::Minus) {
                BinOp::Sub
            } else {
                return Ok((lhs, h));
            };
            let (rhs, hr) = self.term()?;
            (lhs, h) = self.node(Expr::binary(op, lhs, rhs), h.max(hr) + 1, at)?;
        }
    }

    fn term(&mut self) -> Result<(Expr, usize), SyntaxError> {
        let (mut lhs, mut h) = self.unary()?;
        loop {
            let at = self.offset();
            let op = if self.eat(&TokenKind::Star) {
                BinOp::Mul
            } else if self.eat(&TokenKind::Slash) {
                BinOp::Div
            } else {
                return Ok((lhs, h));
            };
            let (rhs, hr) = self.unary()?;
            (lhs, h) = self.node(Expr::binary(op, lhs, rhs), h.max(hr) + 1, at)?;
        }
    }

    fn unary(&mut self) -> Result<(Expr, usize), SyntaxError> {
        let at = self.offset();
        if self.eat(&TokenKind::Minus) {
            self.descend(at)?;
            let (e, h) = self.unary()?;
            self.depth -= 1;
            self.node(Expr::Neg(Box::new(e)), h + 1, at)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<(Expr, usize), SyntaxError> {
        let (base, hb) = self.primary()?;
        let at = self.offset();
        if self.eat(&TokenKind::Caret) {
            self.descend(at)?;
            let (exponent, he) = self.unary()?;
            self.depth -= 1;
            self.node(Expr::binary(BinOp::Pow, base, exponent), hb.max(he) + 1, at)
        } else {
            Ok((base, hb))
        }
    }

    // Bounds parser recursion before any node exists to measure.
    fn descend(&mut self, at: usize) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(SyntaxError::new(at, format!("nesting at most {MAX_DEPTH} levels deep")))
        } else {
            Ok(())
        }
    }

    fn primary(&mut self) -> Result<(Expr, usize), SyntaxError> {
        let Some(token) = self.peek().cloned() else {
            return Err(self.error("a number, variable, function call or '('"));
        };
        match token.kind {
            TokenKind::Number(x) => {
                self.pos += 1;
                Ok((Expr::Num(x), 1))
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                match Func::from_name(&name) {
                    Some(func) => self.call(func, token.offset),
                    None => Ok((Expr::Var(name), 1)),
                }
            }
            TokenKind::LParen => {
                self.pos += 1;
                self.descend(token.offset)?;
                let e = self.expr()?;
                self.depth -= 1;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            _ => Err(self.error("a number, variable, function call or '('")),
        }
    }

    fn call(&mut self, func: Func, at: usize) -> Result<(Expr, usize), SyntaxError> {
        if !self.eat(&TokenKind::LParen) {
            return Err(self.error(&format!("'(' after function name '{}'", func.name())));
        }
        self.descend(at)?;
        let (first, mut h) = self.expr()?;
        let mut args = vec![first];
        while self.eat(&TokenKind::Comma) {
            let (a, ha) = self.expr()?;
            h = h.max(ha);
            args.push(a);
        }
        self.depth -= 1;
        self.expect(TokenKind::RParen)?;
        let (lo, hi) = func.arity();
        if args.len() < lo || args.len() > hi {
            let wanted = if lo == hi { format!("exactly {lo}") } else { format!("at least {lo}") };
            return Err(SyntaxError::new(at, format!("{wanted} argument(s) to {}, got {}", func.name(), args.len())));
        }
        self.node(Expr::Call(func, args), h + 1, at)
    }
}

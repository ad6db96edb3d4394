//! Recursive-descent parser from tokens to an unresolved syntax tree.
//!
//! Precedence, loosest first: `=>` (right associative), `||`, `&&`, `!`,
//! comparisons and `in` (non associative), `+ -`, unary minus. `if` is a
//! primary whose `else` branch extends as far as possible.

use super::lexer::{Keyword, Tok, Token};
use super::{ErrorKind, ParseError, SourceSpan};
use crate::kernel::BinOp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Name {
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct SynExpr {
    pub kind: SynKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub enum SynKind {
    Bool(bool),
    Int(i64),
    Name { name: String, primed: bool },
    Not(Box<SynExpr>),
    Neg(Box<SynExpr>),
    Binary(BinOp, Box<SynExpr>, Box<SynExpr>),
    In(Box<SynExpr>, SynSet),
    If(Box<SynExpr>, Box<SynExpr>, Box<SynExpr>),
}

#[derive(Debug, Clone)]
pub enum SynSet {
    List(Vec<SynExpr>),
    Range(Box<SynExpr>, Box<SynExpr>),
}

#[derive(Debug, Clone)]
pub enum SynBound {
    Int(i64),
    Name(Name),
}

#[derive(Debug, Clone)]
pub enum SynDomain {
    Named(Name),
    Range(SynBound, SynBound),
}

#[derive(Debug, Clone)]
pub enum SynEffect {
    Assign(Name, SynExpr),
    Choose(Name, SynSet),
}

#[derive(Debug, Clone)]
pub enum Item {
    Const {
        name: Name,
        value: i64,
    },
    Enum {
        name: Name,
        members: Vec<Name>,
    },
    Var {
        name: Name,
        domain: SynDomain,
    },
    Init {
        expr: SynExpr,
        span: SourceSpan,
    },
    Action {
        name: Name,
        guard: Option<SynExpr>,
        effects: Vec<SynEffect>,
    },
    Invariant {
        name: Name,
        expr: SynExpr,
    },
    Liveness {
        name: Name,
        p: SynExpr,
        q: SynExpr,
    },
    Fairness {
        names: Vec<Name>,
    },
}

type PResult<T> = Result<T, ParseError>;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    pub errors: Vec<ParseError>,
}

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            pos: 0,
            errors: Vec::new(),
        }
    }

    /// Parses all items, recovering at the next item keyword after an error.
    pub fn items(&mut self) -> Vec<Item> {
        let mut items = Vec::new();
        while !self.at(&Tok::Eof) {
            let start = self.pos;
            match self.item() {
                Ok(item) => items.push(item),
                Err(e) => {
                    self.errors.push(e);
                    self.recover(start);
                }
            }
        }
        items
    }

    fn recover(&mut self, item_start: usize) {
        // always make progress
        if self.pos == item_start && !self.at(&Tok::Eof) {
            self.pos += 1;
        }
        while !self.at(&Tok::Eof) {
            if let Tok::Kw(k) = self.peek() {
                if k.starts_item() {
                    return;
                }
            }
            self.pos += 1;
        }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    /// Error at the current token, or at the previous one when the input
    /// ended early.
    fn error(&self, what: &str) -> ParseError {
        let found = self.peek();
        let span = if *found == Tok::Eof && self.pos > 0 {
            self.prev_span()
        } else {
            self.span()
        };
        ParseError::new(
            span,
            ErrorKind::Syntactic,
            format!("expected {what}, found {}", found.describe()),
        )
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<Token> {
        if self.at(&t) {
            Ok(self.bump())
        } else {
            Err(self.error(what))
        }
    }

    fn name(&mut self, what: &str) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(text) => {
                let span = self.bump().span;
                Ok(Name { text, span })
            }
            _ => Err(self.error(what)),
        }
    }

    fn signed_int(&mut self, what: &str) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(i) => {
                self.bump();
                Ok(if neg { -i } else { i })
            }
            _ => Err(self.error(what)),
        }
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.span();
        let kw = match self.peek() {
            Tok::Kw(k) if k.starts_item() => *k,
            _ => {
                return Err(self.error(
                    "an item (const, enum, var, init, action, invariant, liveness, fairness)",
                ))
            }
        };
        self.bump();
        match kw {
            Keyword::Const => {
                let name = self.name("a constant name")?;
                self.expect(Tok::Eq, "`=`")?;
                let value = self.signed_int("an integer value")?;
                Ok(Item::Const { name, value })
            }
            Keyword::Enum => {
                let name = self.name("an enum name")?;
                self.expect(Tok::LBrace, "`{`")?;
                let mut members = vec![self.name("an enum member")?];
                while self.eat(&Tok::Comma) {
                    members.push(self.name("an enum member")?);
                }
                self.expect(Tok::RBrace, "`,` or `}`")?;
                Ok(Item::Enum { name, members })
            }
            Keyword::Var => {
                let name = self.name("a variable name")?;
                self.expect(Tok::Colon, "`:`")?;
                let domain =
                    if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) != Tok::DotDot {
                        SynDomain::Named(self.name("a type name")?)
                    } else {
                        let lo = self.bound("a lower bound")?;
                        self.expect(Tok::DotDot, "`..`")?;
                        let hi = self.bound("an upper bound after `..`")?;
                        SynDomain::Range(lo, hi)
                    };
                Ok(Item::Var { name, domain })
            }
            Keyword::Init => {
                self.expect(Tok::LBrace, "`{`")?;
                let expr = self.expr()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Item::Init { expr, span: start })
            }
            Keyword::Action => {
                let name = self.name("an action name")?;
                self.expect(Tok::LBrace, "`{`")?;
                let guard = if self.eat(&Tok::Kw(Keyword::When)) {
                    Some(self.expr()?)
                } else {
                    None
                };
                let mut effects = Vec::new();
                while !self.at(&Tok::RBrace) {
                    let target = self.name("an effect `x' = ...` or `}`")?;
                    self.expect(Tok::Prime, "`'` after the assigned variable")?;
                    if self.eat(&Tok::Eq) {
                        effects.push(SynEffect::Assign(target, self.expr()?));
                    } else if self.eat(&Tok::Kw(Keyword::In)) {
                        effects.push(SynEffect::Choose(target, self.set()?));
                    } else {
                        return Err(self.error("`=` or `in`"));
                    }
                }
                self.bump();
                Ok(Item::Action {
                    name,
                    guard,
                    effects,
                })
            }
            Keyword::Invariant => {
                let name = self.name("an invariant name")?;
                self.expect(Tok::LBrace, "`{`")?;
                let expr = self.expr()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Item::Invariant { name, expr })
            }
            Keyword::Liveness => {
                let name = self.name("a property name")?;
                self.expect(Tok::LBrace, "`{`")?;
                let p = self.expr()?;
                self.expect(Tok::LeadsTo, "`~>`")?;
                let q = self.expr()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Item::Liveness { name, p, q })
            }
            Keyword::Fairness => {
                self.expect(Tok::Kw(Keyword::Weak), "`weak`")?;
                let mut names = vec![self.name("an action name")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.name("an action name")?);
                }
                Ok(Item::Fairness { names })
            }
            _ => unreachable!("checked by starts_item"),
        }
    }

    fn bound(&mut self, what: &str) -> PResult<SynBound> {
        if let Tok::Ident(_) = self.peek() {
            return Ok(SynBound::Name(self.name(what)?));
        }
        Ok(SynBound::Int(self.signed_int(what)?))
    }

    fn set(&mut self) -> PResult<SynSet> {
        if self.eat(&Tok::LBrace) {
            let mut items = vec![self.expr()?];
            while self.eat(&Tok::Comma) {
                items.push(self.expr()?);
            }
            self.expect(Tok::RBrace, "`,` or `}`")?;
            return Ok(SynSet::List(items));
        }
        let lo = self.additive()?;
        self.expect(Tok::DotDot, "`..` or a set `{...}`")?;
        let hi = self.additive()?;
        Ok(SynSet::Range(Box::new(lo), Box::new(hi)))
    }

    pub fn expr(&mut self) -> PResult<SynExpr> {
        self.implies()
    }

    fn implies(&mut self) -> PResult<SynExpr> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            return Ok(binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<SynExpr> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<SynExpr> {
        let mut lhs = self.not()?;
        while self.eat(&Tok::And) {
            let rhs = self.not()?;
            lhs = binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<SynExpr> {
        if self.at(&Tok::Not) {
            let start = self.bump().span;
            let inner = self.not()?;
            let span = start.join(inner.span);
            return Ok(SynExpr {
                kind: SynKind::Not(Box::new(inner)),
                span,
            });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<SynExpr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Kw(Keyword::In) => {
                self.bump();
                let set = self.set()?;
                let span = lhs.span.join(self.prev_span());
                return Ok(SynExpr {
                    kind: SynKind::In(Box::new(lhs), set),
                    span,
                });
            }
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.additive()?;
        Ok(binary(op, lhs, rhs))
    }

    fn additive(&mut self) -> PResult<SynExpr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<SynExpr> {
        if self.at(&Tok::Minus) {
            let start = self.bump().span;
            // `-3` is a literal, `-(3)` and `-x` are negations
            if let Tok::Int(i) = *self.peek() {
                let end = self.bump().span;
                return Ok(SynExpr {
                    kind: SynKind::Int(-i),
                    span: start.join(end),
                });
            }
            let inner = self.unary()?;
            let span = start.join(inner.span);
            return Ok(SynExpr {
                kind: SynKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<SynExpr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                SynKind::Int(i)
            }
            Tok::Kw(Keyword::True) => {
                self.bump();
                SynKind::Bool(true)
            }
            Tok::Kw(Keyword::False) => {
                self.bump();
                SynKind::Bool(false)
            }
            Tok::Ident(name) => {
                self.bump();
                let primed = self.eat(&Tok::Prime);
                SynKind::Name { name, primed }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(SynExpr {
                    kind: inner.kind,
                    span: start.join(self.prev_span()),
                });
            }
            Tok::Kw(Keyword::If) => {
                self.bump();
                let c = self.expr()?;
                self.expect(Tok::Kw(Keyword::Then), "`then`")?;
                let a = self.expr()?;
                self.expect(Tok::Kw(Keyword::Else), "`else`")?;
                let b = self.expr()?;
                SynKind::If(Box::new(c), Box::new(a), Box::new(b))
            }
            _ => return Err(self.error("an expression")),
        };
        Ok(SynExpr {
            kind,
            span: start.join(self.prev_span()),
        })
    }
}

fn binary(op: BinOp, lhs: SynExpr, rhs: SynExpr) -> SynExpr {
    let span = lhs.span.join(rhs.span);
    SynExpr {
        kind: SynKind::Binary(op, Box::new(lhs), Box::new(rhs)),
        span,
    }
}

//! Recursive-descent parser for `.fuse` rule files.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::expr::IntExpr;
use super::lexer::{Tok, Token};
use super::ParseError;
use crate::rule::program::{
    Body, Grid, GridItem, LevelBlock, LevelSelector, Parity, PlacedItem, RuleProgram, Substitution,
    TemplateDef, WordItem,
};
use crate::rule::Shape;
use crate::scalar::Scalar;

/// A name reference and where it was written.
#[derive(Clone, Debug)]
pub(crate) struct RefSite {
    pub block: usize,
    pub name: String,
    pub line: usize,
    pub col: usize,
    /// Names produced by iterating a substitution, not written directly.
    pub via_subst: Option<String>,
}

#[derive(Clone, Debug)]
pub(crate) struct BodySite {
    pub block: usize,
    pub def: usize,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug)]
pub(crate) struct Parsed {
    pub dim: usize,
    pub dim_site: (usize, usize),
    pub tiles: Vec<(String, Shape, usize, usize)>,
    pub recognizable: bool,
    pub program: RuleProgram,
    pub refs: Vec<RefSite>,
    pub bodies: Vec<BodySite>,
    pub block_sites: Vec<(usize, usize)>,
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    dim: usize,
    refs: Vec<RefSite>,
    bodies: Vec<BodySite>,
    block: usize,
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser {
            toks,
            pos: 0,
            dim: 1,
            refs: Vec::new(),
            bodies: Vec::new(),
            block: 0,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            let sym = format!("`{}`", tok.symbol());
            self.fail(&[sym.as_str()])
        }
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, line, col))
            }
            _ => self.fail(&["a name"]),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            _ => self.fail(&["an integer"]),
        }
    }

    fn small_int(&mut self) -> Result<usize, ParseError> {
        let (line, col) = self.here();
        let v = self.int()?;
        v.try_into().map_err(|_| ParseError::Invalid {
            line,
            col,
            detail: "integer too large".into(),
        })
    }

    fn end_of_statement(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Newline | Tok::Eof => {
                self.skip_newlines();
                Ok(())
            }
            _ => self.fail(&["end of line"]),
        }
    }

    pub fn file(mut self) -> Result<Parsed, ParseError> {
        let mut dim_site = (1, 1);
        let mut tiles: Vec<(String, Shape, usize, usize)> = Vec::new();
        let mut recognizable = false;
        let mut program = RuleProgram::default();
        let mut block_sites = Vec::new();
        let mut seen_dim = false;
        self.skip_newlines();
        while *self.peek() != Tok::Eof {
            let (line, col) = self.here();
            let (kw, _, _) = self.ident().or_else(|_| {
                self.fail::<(String, usize, usize)>(&[
                    "`dim`",
                    "`tile`",
                    "`subst`",
                    "`level`",
                    "`recognizable`",
                ])
            })?;
            match kw.as_str() {
                "dim" => {
                    if seen_dim || !tiles.is_empty() {
                        return Err(ParseError::Invalid {
                            line,
                            col,
                            detail: "`dim` must come first and only once".into(),
                        });
                    }
                    let d = self.small_int()?;
                    if d != 1 && d != 2 {
                        return Err(ParseError::Invalid {
                            line,
                            col,
                            detail: format!("dimension {d} unsupported"),
                        });
                    }
                    self.dim = d;
                    seen_dim = true;
                    dim_site = (line, col);
                }
                "tile" => {
                    let (name, nl, nc) = self.ident()?;
                    let shape = if self.keyword("len") {
                        if self.dim != 1 {
                            return Err(ParseError::DimensionMismatch {
                                line: nl,
                                col: nc,
                                detail: "`len` in a 2-dimensional rule".into(),
                            });
                        }
                        Shape::Interval(self.number()?)
                    } else if self.keyword("size") {
                        if self.dim != 2 {
                            return Err(ParseError::DimensionMismatch {
                                line: nl,
                                col: nc,
                                detail: "`size` in a 1-dimensional rule".into(),
                            });
                        }
                        let w = self.number()?;
                        if !self.keyword("x") {
                            return self.fail(&["`x`"]);
                        }
                        let h = self.number()?;
                        Shape::Rect {
                            width: w,
                            height: h,
                        }
                    } else if self.dim == 1 {
                        Shape::Interval(Scalar::one())
                    } else {
                        Shape::Rect {
                            width: Scalar::one(),
                            height: Scalar::one(),
                        }
                    };
                    tiles.push((name, shape, nl, nc));
                }
                "recognizable" => {
                    recognizable = match self.peek() {
                        Tok::Ident(s) if s == "false" => {
                            self.bump();
                            false
                        }
                        Tok::Ident(s) if s == "true" => {
                            self.bump();
                            true
                        }
                        _ => true,
                    };
                }
                "subst" => program.substitutions.push(self.substitution()?),
                "level" => {
                    self.block = program.blocks.len();
                    block_sites.push((line, col));
                    program.blocks.push(self.level_block()?);
                    continue;
                }
                _ => {
                    self.pos -= 1;
                    return self.fail(&["`dim`", "`tile`", "`subst`", "`level`", "`recognizable`"]);
                }
            }
            self.end_of_statement()?;
        }
        Ok(Parsed {
            dim: self.dim,
            dim_site,
            tiles,
            recognizable,
            program,
            refs: self.refs,
            bodies: self.bodies,
            block_sites,
        })
    }

    fn substitution(&mut self) -> Result<Substitution, ParseError> {
        let (name, _, _) = self.ident()?;
        self.expect(Tok::Colon)?;
        let mut images = Vec::new();
        loop {
            self.skip_newlines();
            let (letter, _, _) = self.ident()?;
            self.expect(Tok::Arrow)?;
            let mut img = Vec::new();
            while let Tok::Ident(_) = self.peek() {
                let (l, _, _) = self.ident()?;
                let count = self.repetition()?;
                img.push((l, count));
            }
            if img.is_empty() {
                return self.fail(&["a letter"]);
            }
            images.push((letter, img));
            if *self.peek() == Tok::Semi {
                self.bump();
                continue;
            }
            break;
        }
        Ok(Substitution { name, images })
    }

    fn level_block(&mut self) -> Result<LevelBlock, ParseError> {
        let selector = if *self.peek() == Tok::LParen {
            self.bump();
            if !self.keyword("n") {
                return self.fail(&["`n`"]);
            }
            self.expect(Tok::RParen)?;
            let mut start = 1;
            if self.keyword("from") {
                let (line, col) = self.here();
                start = self.small_int()?;
                if start == 0 {
                    return Err(ParseError::Invalid {
                        line,
                        col,
                        detail: "levels start at 1".into(),
                    });
                }
            }
            let parity = if self.keyword("odd") {
                Some(Parity::Odd)
            } else if self.keyword("even") {
                Some(Parity::Even)
            } else {
                None
            };
            LevelSelector::From { start, parity }
        } else {
            let (line, col) = self.here();
            let k = self.small_int()?;
            if k == 0 {
                return Err(ParseError::Invalid {
                    line,
                    col,
                    detail: "levels start at 1".into(),
                });
            }
            LevelSelector::Exact(k)
        };
        self.expect(Tok::Colon)?;
        let mut defs = Vec::new();
        loop {
            self.skip_newlines();
            defs.push(self.template_def(defs.len())?);
            if *self.peek() == Tok::Semi {
                self.bump();
                continue;
            }
            break;
        }
        self.end_of_statement()?;
        Ok(LevelBlock { selector, defs })
    }

    fn template_def(&mut self, index: usize) -> Result<TemplateDef, ParseError> {
        let (name, _, _) = self.ident()?;
        let label = match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Some(s)
            }
            _ => None,
        };
        self.expect(Tok::Arrow)?;
        let (line, col) = self.here();
        self.bodies.push(BodySite {
            block: self.block,
            def: index,
            line,
            col,
        });
        let body = match self.peek() {
            Tok::LBracket => {
                self.dim_check(2, "grid body")?;
                self.bump();
                Body::Grid(self.grid()?)
            }
            Tok::LBrace => {
                self.dim_check(2, "placement body")?;
                self.bump();
                Body::Placed(self.placed()?)
            }
            Tok::Ident(_) => {
                self.dim_check(1, "word body")?;
                Body::Word(self.word()?)
            }
            _ => return self.fail(&["a supertile body"]),
        };
        Ok(TemplateDef { name, label, body })
    }

    fn dim_check(&self, want: usize, what: &str) -> Result<(), ParseError> {
        if self.dim == want {
            return Ok(());
        }
        let (line, col) = self.here();
        Err(ParseError::DimensionMismatch {
            line,
            col,
            detail: format!("{what} in a {}-dimensional rule", self.dim),
        })
    }

    fn reference(&mut self, name: &str, line: usize, col: usize, via: Option<String>) {
        self.refs.push(RefSite {
            block: self.block,
            name: name.to_string(),
            line,
            col,
            via_subst: via,
        });
    }

    fn repetition(&mut self) -> Result<IntExpr, ParseError> {
        if *self.peek() != Tok::Caret {
            return Ok(IntExpr::lit(1));
        }
        self.bump();
        match self.peek() {
            Tok::Int(_) => Ok(IntExpr::Lit(self.int()?)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => self.fail(&["an integer", "`(`"]),
        }
    }

    fn word(&mut self) -> Result<Vec<WordItem>, ParseError> {
        let mut items = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            let (name, line, col) = self.ident()?;
            let count = self.repetition()?;
            if *self.peek() == Tok::LBracket {
                self.bump();
                let (seed, _, _) = self.ident()?;
                self.expect(Tok::RBracket)?;
                self.reference(&seed, line, col, Some(name.clone()));
                items.push(WordItem::Iterate {
                    subst: name,
                    power: count,
                    seed,
                });
            } else {
                self.reference(&name, line, col, None);
                items.push(WordItem::Repeat { name, count });
            }
        }
        if items.is_empty() {
            return self.fail(&["a name"]);
        }
        Ok(items)
    }

    /// After the opening `[`.
    fn grid(&mut self) -> Result<Grid, ParseError> {
        let mut rows = Vec::new();
        let mut row = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::Ident(_) => {
                    let (name, line, col) = self.ident()?;
                    let count = self.repetition()?;
                    self.reference(&name, line, col, None);
                    row.push(GridItem::Repeat { name, count });
                }
                Tok::LBracket => {
                    self.bump();
                    row.push(GridItem::Block(self.grid()?));
                }
                Tok::Slash => {
                    if row.is_empty() {
                        return self.fail(&["a name", "`[`"]);
                    }
                    self.bump();
                    rows.push(std::mem::take(&mut row));
                }
                Tok::RBracket => {
                    if row.is_empty() {
                        return self.fail(&["a name", "`[`"]);
                    }
                    self.bump();
                    rows.push(row);
                    return Ok(Grid { rows });
                }
                _ => return self.fail(&["a name", "`[`", "`/`", "`]`"]),
            }
        }
    }

    /// After the opening `{`.
    fn placed(&mut self) -> Result<Vec<PlacedItem>, ParseError> {
        let mut items = Vec::new();
        loop {
            self.skip_newlines();
            if *self.peek() == Tok::RBrace {
                if items.is_empty() {
                    return self.fail(&["a placement"]);
                }
                self.bump();
                return Ok(items);
            }
            let (name, line, col) = self.ident()?;
            self.reference(&name, line, col, None);
            self.expect(Tok::At)?;
            self.expect(Tok::LParen)?;
            let x = self.number()?;
            self.expect(Tok::Comma)?;
            let y = self.number()?;
            self.expect(Tok::RParen)?;
            items.push(PlacedItem { name, x, y });
        }
    }

    /// Exact element of Q(φ): `3`, `1/2`, `phi`, `2+3phi`, `-1/2phi`.
    pub fn number(&mut self) -> Result<Scalar, ParseError> {
        let mut neg = false;
        if *self.peek() == Tok::Minus {
            self.bump();
            neg = true;
        }
        let mut acc = self.number_term()?;
        if neg {
            acc = -acc;
        }
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc + self.number_term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc - self.number_term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn number_term(&mut self) -> Result<Scalar, ParseError> {
        if self.keyword("phi") {
            return Ok(Scalar::phi());
        }
        let (line, col) = self.here();
        let num = self.int()?;
        let mut r = BigRational::from_integer(num);
        if *self.peek() == Tok::Slash && matches!(self.peek_at(1), Tok::Int(_)) {
            self.bump();
            let den = self.int()?;
            if den.is_zero() {
                return Err(ParseError::Invalid {
                    line,
                    col,
                    detail: "zero denominator".into(),
                });
            }
            r /= BigRational::from_integer(den);
        }
        if self.keyword("phi") {
            Ok(Scalar::new(BigRational::zero(), r))
        } else {
            Ok(Scalar::from_rational(r))
        }
    }

    pub fn expr(&mut self) -> Result<IntExpr, ParseError> {
        let mut lhs = self.expr_term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = IntExpr::add(lhs, self.expr_term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = IntExpr::sub(lhs, self.expr_term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn expr_term(&mut self) -> Result<IntExpr, ParseError> {
        let mut lhs = self.expr_factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = IntExpr::mul(lhs, self.expr_factor()?);
        }
        Ok(lhs)
    }

    fn expr_factor(&mut self) -> Result<IntExpr, ParseError> {
        let base = self.expr_unary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.expr_factor()?;
            return Ok(IntExpr::pow(base, exp));
        }
        Ok(base)
    }

    fn expr_unary(&mut self) -> Result<IntExpr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(match self.expr_unary()? {
                IntExpr::Lit(v) => IntExpr::Lit(-v),
                other => IntExpr::sub(IntExpr::lit(0), other),
            });
        }
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(IntExpr::Lit(v))
            }
            Tok::Ident(s) if s == "n" => {
                self.bump();
                Ok(IntExpr::Level)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => self.fail(&["an integer", "`n`", "`(`"]),
        }
    }
}

/// Parses a standalone integer expression such as `3*n` or `10^n + 2`.
pub fn parse_int_expr(text: &str) -> Result<IntExpr, ParseError> {
    let toks = super::lexer::tokenize(text)?;
    let mut p = Parser::new(toks);
    let e = p.expr()?;
    p.skip_newlines();
    if *p.peek() != Tok::Eof {
        return p.fail(&["end of expression"]);
    }
    Ok(e)
}

/// Parses a standalone element of Q(φ) such as `1/3`, `-2` or `2/5phi - 1/5`.
pub fn parse_scalar(text: &str) -> Result<Scalar, ParseError> {
    let toks = super::lexer::tokenize(text)?;
    let mut p = Parser::new(toks);
    let s = p.number()?;
    p.skip_newlines();
    if *p.peek() != Tok::Eof {
        return p.fail(&["end of number"]);
    }
    Ok(s)
}

//! Recursive-descent parser with precedence climbing for scalar expressions.
//! Resolution happens during the parse: the chart comes first, so every
//! later item is checked against the coordinates and the bindings above it.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use num::{BigInt, BigRational};

use super::lex::{lex, Tok, Token};
use super::{
    Binding, CheckDirective, Document, ParseError, StructureData, StructureDecl, StructureKind,
    Value,
};
use crate::calculus::{DiffOp, SkewFormD, XForm};
use crate::cas::ScalarExpr;
use crate::chart::Chart;

const KEYWORDS: &[&str] = &[
    "chart", "domain", "scalar", "field", "op", "form", "on", "with", "check", "lcs", "contact",
    "lrj", "lift", "u",
];

/// Which space a form expression lives on.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Space {
    X,
    D,
}

/// Parse a standalone scalar expression against a document's chart and
/// bindings. Used for command-line operands such as bracket arguments.
pub fn parse_scalar_operand(src: &str, doc: &Document) -> Result<ScalarExpr, ParseError> {
    let toks = lex(src)?;
    let mut by_name = HashMap::new();
    for (i, b) in doc.bindings.iter().enumerate() {
        by_name.insert(b.name.clone(), i);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        chart: Some(doc.chart.clone()),
        bindings: doc.bindings.clone(),
        by_name,
        structures: Vec::new(),
        checks: Vec::new(),
    };
    let e = p.scalar_expr(Stop::None)?;
    p.expect(Tok::Eof, "end of the expression")?;
    Ok(e)
}

pub fn parse_document(src: &str) -> Result<Document, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        chart: None,
        bindings: Vec::new(),
        by_name: HashMap::new(),
        structures: Vec::new(),
        checks: Vec::new(),
    };
    p.document()?;
    Ok(Document {
        chart: p.chart.expect("document() sets the chart"),
        bindings: p.bindings,
        structures: p.structures,
        checks: p.checks,
    })
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    chart: Option<Chart>,
    bindings: Vec<Binding>,
    by_name: HashMap<String, usize>,
    structures: Vec<StructureDecl>,
    checks: Vec<CheckDirective>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Token {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err_at(&self, t: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            message: message.into(),
            line: t.line,
            column: t.column,
            token: t.tok.describe(),
        }
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        self.err_at(self.peek(), message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if self.at(&tok) {
            Ok(self.bump())
        } else {
            Err(self.err_here(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let t = self.bump();
                Ok((s, t))
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn chart_ref(&self) -> &Chart {
        self.chart.as_ref().expect("chart parsed first")
    }

    fn dim(&self) -> usize {
        self.chart_ref().dim()
    }

    // ------------------------------------------------------------------
    // document structure

    fn document(&mut self) -> Result<(), ParseError> {
        self.chart_decl()?;
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => return Ok(()),
                Tok::Ident(kw) => match kw.as_str() {
                    "chart" => {
                        return Err(self.err_here("a document declares exactly one chart"));
                    }
                    "scalar" => self.let_scalar()?,
                    "field" => self.let_operator(false)?,
                    "op" => self.let_operator(true)?,
                    "form" => self.let_form()?,
                    "lcs" => self.structure(StructureKind::Lcs)?,
                    "contact" => self.structure(StructureKind::Contact)?,
                    "lrj" => self.structure(StructureKind::Lrj)?,
                    "lift" => self.structure(StructureKind::Lift)?,
                    "check" => self.check()?,
                    _ => {
                        return Err(self.err_here(
                            "expected 'scalar', 'field', 'op', 'form', a structure keyword, \
                             or 'check'",
                        ));
                    }
                },
                _ => {
                    return Err(self.err_here("expected a declaration"));
                }
            }
        }
    }

    fn chart_decl(&mut self) -> Result<(), ParseError> {
        let kw = self.peek().clone();
        match &kw.tok {
            Tok::Ident(s) if s == "chart" => {
                self.bump();
            }
            _ => return Err(self.err_here("a document starts with a chart declaration")),
        }
        let (name, _) = self.ident("a chart name")?;
        self.expect(Tok::LParen, "'(' before the coordinate list")?;
        let mut coords = Vec::new();
        loop {
            let (c, t) = self.ident("a coordinate name")?;
            if coords.contains(&c) {
                return Err(self.err_at(&t, format!("duplicate coordinate '{c}'")));
            }
            if c == "u" {
                return Err(self.err_at(&t, "'u' is reserved for the unit covector"));
            }
            coords.push(c);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen, "')' after the coordinate list")?;
        let domain = if matches!(&self.peek().tok, Tok::Ident(s) if s == "domain") {
            self.bump();
            Some(self.domain_box(coords.len())?)
        } else {
            None
        };
        self.expect(Tok::Semi, "';' after the chart declaration")?;
        let domain = domain.unwrap_or_else(|| vec![(-2.0, 2.0); coords.len()]);
        match Chart::new(name, coords, domain) {
            Ok(c) => {
                self.chart = Some(c);
                Ok(())
            }
            Err(e) => Err(self.err_at(&kw, format!("invalid chart: {e}"))),
        }
    }

    /// `[lo, hi]` or `[lo, hi; lo, hi; ...]` — one interval broadcasts to
    /// every coordinate, otherwise one interval per coordinate is required.
    fn domain_box(&mut self, arity: usize) -> Result<Vec<(f64, f64)>, ParseError> {
        let open = self.expect(Tok::LBracket, "'[' to open the domain box")?;
        let mut intervals = Vec::new();
        loop {
            let lo = self.signed_number()?;
            self.expect(Tok::Comma, "',' between interval endpoints")?;
            let hi = self.signed_number()?;
            intervals.push((lo, hi));
            if !self.eat(&Tok::Semi) {
                break;
            }
        }
        self.expect(Tok::RBracket, "']' to close the domain box")?;
        if intervals.len() == 1 {
            return Ok(vec![intervals[0]; arity]);
        }
        if intervals.len() != arity {
            return Err(self.err_at(
                &open,
                format!(
                    "domain lists {} intervals for {} coordinates",
                    intervals.len(),
                    arity
                ),
            ));
        }
        Ok(intervals)
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        match &self.peek().tok {
            Tok::Number(text) => {
                let v = f64::from_str(text)
                    .map_err(|_| self.err_here("malformed number"))?;
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.err_here("expected a number")),
        }
    }

    // ------------------------------------------------------------------
    // bindings

    fn declare(&mut self, name: String, t: &Token, value: Value) -> Result<(), ParseError> {
        if KEYWORDS.contains(&name.as_str()) {
            return Err(self.err_at(t, format!("'{name}' is a reserved word")));
        }
        if self.chart_ref().coord_index(&name).is_some() {
            return Err(self.err_at(t, format!("'{name}' already names a coordinate")));
        }
        if name.len() >= 2 {
            let (head, rest) = name.split_at(1);
            if head == "d" && self.chart_ref().coord_index(rest).is_some() {
                return Err(
                    self.err_at(t, format!("'{name}' collides with the covector d{rest}"))
                );
            }
        }
        if self.by_name.contains_key(&name) {
            return Err(self.err_at(t, format!("'{name}' is already bound")));
        }
        self.by_name.insert(name.clone(), self.bindings.len());
        self.bindings.push(Binding { name, value });
        Ok(())
    }

    fn let_scalar(&mut self) -> Result<(), ParseError> {
        self.bump(); // scalar
        let (name, t) = self.ident("a binding name")?;
        self.expect(Tok::Eq, "'=' in a scalar binding")?;
        let e = self.scalar_expr(Stop::None)?;
        self.expect(Tok::Semi, "';' after the scalar binding")?;
        self.declare(name, &t, Value::Scalar(e))
    }

    /// Shared parser for `field` (pure vector) and `op` (unit term allowed).
    fn let_operator(&mut self, allow_unit: bool) -> Result<(), ParseError> {
        self.bump(); // field | op
        let (name, t) = self.ident("a binding name")?;
        self.expect(Tok::Eq, "'=' in the binding")?;
        let op = self.op_expr(allow_unit)?;
        self.expect(Tok::Semi, "';' after the binding")?;
        let value = if allow_unit {
            Value::Op(op)
        } else {
            Value::Field(op)
        };
        self.declare(name, &t, value)
    }

    fn let_form(&mut self) -> Result<(), ParseError> {
        self.bump(); // form
        let (name, t) = self.ident("a binding name")?;
        self.expect(Tok::Colon, "':' before the declared degree")?;
        let deg_tok = self.peek().clone();
        let degree = match &deg_tok.tok {
            Tok::Number(text) if !text.contains('.') => {
                let d: usize = text
                    .parse()
                    .map_err(|_| self.err_here("degree out of range"))?;
                self.bump();
                d
            }
            _ => return Err(self.err_here("expected a nonnegative integer degree")),
        };
        match &self.peek().tok {
            Tok::Ident(s) if s == "on" => {
                self.bump();
            }
            _ => return Err(self.err_here("expected 'on'")),
        }
        let (space_name, space_tok) = self.ident("'X' or 'D'")?;
        let space = match space_name.as_str() {
            "X" => Space::X,
            "D" => Space::D,
            _ => return Err(self.err_at(&space_tok, "expected 'X' or 'D'")),
        };
        let frame = match space {
            Space::X => self.dim(),
            Space::D => self.dim() + 1,
        };
        if degree > frame {
            return Err(self.err_at(
                &deg_tok,
                format!("degree {degree} exceeds the frame size {frame}"),
            ));
        }
        self.expect(Tok::Eq, "'=' before the form expression")?;
        let value = match space {
            Space::X => Value::FormX(self.x_form_expr(degree)?),
            Space::D => Value::FormD(self.d_form_expr(degree)?),
        };
        self.expect(Tok::Semi, "';' after the form binding")?;
        self.declare(name, &t, value)
    }

    // ------------------------------------------------------------------
    // scalar expressions

    fn scalar_expr(&mut self, stop: Stop) -> Result<ScalarExpr, ParseError> {
        let mut acc = self.scalar_product(stop)?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc + self.scalar_product(stop)?;
            } else if self.eat(&Tok::Minus) {
                acc = acc - self.scalar_product(stop)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn scalar_product(&mut self, stop: Stop) -> Result<ScalarExpr, ParseError> {
        let mut acc = self.scalar_unary(stop)?;
        loop {
            if self.at(&Tok::Star) {
                // A '*' that attaches a basis symbol ends the scalar factor.
                if self.basis_follows(1, stop) {
                    return Ok(acc);
                }
                self.bump();
                acc = acc * self.scalar_unary(stop)?;
            } else if self.at(&Tok::Slash) {
                self.bump();
                let rhs = self.scalar_unary(stop)?;
                if rhs.is_zero_const() {
                    return Err(self.err_here("division by the constant zero"));
                }
                acc = acc / rhs;
            } else {
                return Ok(acc);
            }
        }
    }

    fn scalar_unary(&mut self, stop: Stop) -> Result<ScalarExpr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.scalar_unary(stop)?);
        }
        self.scalar_power(stop)
    }

    fn scalar_power(&mut self, stop: Stop) -> Result<ScalarExpr, ParseError> {
        let base = self.scalar_atom(stop)?;
        if !self.at(&Tok::Caret) {
            return Ok(base);
        }
        // '^' is a power only when an integer exponent follows; otherwise it
        // belongs to the wedge level above us.
        let exponent = match (&self.peek_at(1).tok, &self.peek_at(2).tok) {
            (Tok::Number(_), _) => {
                self.bump();
                self.integer_exponent(false)?
            }
            (Tok::LParen, Tok::Minus) | (Tok::LParen, Tok::Number(_)) => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let k = self.integer_exponent(true)?;
                self.expect(Tok::RParen, "')' after the exponent")?;
                k
            }
            _ => return Ok(base),
        };
        if exponent < 0 && base.normalized().is_exactly_zero() {
            return Err(self.err_here("zero raised to a negative power"));
        }
        Ok(ScalarExpr::Pow(Arc::new(base), exponent))
    }

    fn integer_exponent(&mut self, allow_sign: bool) -> Result<i32, ParseError> {
        let neg = allow_sign && self.eat(&Tok::Minus);
        match &self.peek().tok {
            Tok::Number(text) if !text.contains('.') => {
                let k: i32 = text
                    .parse()
                    .map_err(|_| self.err_here("exponent out of range"))?;
                self.bump();
                Ok(if neg { -k } else { k })
            }
            _ => Err(self.err_here("expected an integer exponent")),
        }
    }

    fn scalar_atom(&mut self, stop: Stop) -> Result<ScalarExpr, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Number(text) => {
                self.bump();
                Ok(ScalarExpr::constant(number_literal(text)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.scalar_expr(Stop::None)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let name = name.clone();
                if self.peek_at(1).tok == Tok::LParen {
                    if let Some(f) = function_by_name(&name) {
                        self.bump();
                        self.bump();
                        let arg = self.scalar_expr(Stop::None)?;
                        self.expect(Tok::RParen, "')' after the argument")?;
                        return Ok(f(arg));
                    }
                }
                self.bump();
                self.resolve_scalar(&name, &t, stop)
            }
            _ => Err(self.err_here("expected a number, coordinate, binding, or '('")),
        }
    }

    fn resolve_scalar(
        &self,
        name: &str,
        t: &Token,
        stop: Stop,
    ) -> Result<ScalarExpr, ParseError> {
        if let Some(i) = self.chart_ref().coord_index(name) {
            return Ok(ScalarExpr::coord(i));
        }
        if let Some(&i) = self.by_name.get(name) {
            return match &self.bindings[i].value {
                Value::Scalar(e) => Ok(e.clone()),
                other => Err(self.err_at(
                    t,
                    format!("'{name}' is a {}, not a scalar", other.kind_name()),
                )),
            };
        }
        // Inside form expressions an unbound d-identifier was meant as a
        // covector; report the missing coordinate, as that is the real error.
        if stop != Stop::None && name.len() >= 2 && name.starts_with('d') {
            return Err(self.err_at(t, format!("unknown coordinate {}", &name[1..])));
        }
        Err(self.err_at(t, format!("unresolved identifier '{name}'")))
    }

    /// Does the token `ahead` positions away begin a basis symbol for the
    /// current expression context?
    fn basis_follows(&self, ahead: usize, stop: Stop) -> bool {
        let t = self.peek_at(ahead);
        match stop {
            Stop::None => false,
            Stop::Partial => matches!(t.tok, Tok::Partial(_)),
            // 'u' counts as a basis symbol on X as well, so that the covector
            // parser can reject it with a message about the space.
            Stop::Covector { .. } => match &t.tok {
                Tok::Ident(s) if s == "u" => true,
                Tok::Ident(s) if s.len() >= 2 && s.starts_with('d') => {
                    let rest = &s[1..];
                    self.chart_ref().coord_index(rest).is_some() || !self.by_name.contains_key(s)
                }
                _ => false,
            },
        }
    }

    // ------------------------------------------------------------------
    // operator expressions (fields and ops)

    fn op_expr(&mut self, allow_unit: bool) -> Result<DiffOp, ParseError> {
        let dim = self.dim();
        let mut unit = ScalarExpr::zero();
        let mut coeffs = vec![ScalarExpr::zero(); dim];
        let mut negate = false;
        loop {
            let term_tok = self.peek().clone();
            let (scalar, coord) = self.op_term()?;
            let scalar = if negate { -scalar } else { scalar };
            match coord {
                Some(i) => {
                    coeffs[i] = std::mem::replace(&mut coeffs[i], ScalarExpr::zero()) + scalar;
                }
                None => {
                    if !allow_unit && !scalar.is_zero_const() {
                        return Err(self.err_at(
                            &term_tok,
                            "a field has no unit term; declare an 'op' instead",
                        ));
                    }
                    unit = unit + scalar;
                }
            }
            if self.eat(&Tok::Plus) {
                negate = false;
            } else if self.eat(&Tok::Minus) {
                negate = true;
            } else {
                break;
            }
        }
        Ok(DiffOp::from_parts(unit, coeffs))
    }

    /// One additive term: `d/dx`, `expr * d/dx`, or a bare scalar (unit part).
    /// Top-level `+`/`-` belongs to the caller; scalar sums need parentheses.
    fn op_term(&mut self) -> Result<(ScalarExpr, Option<usize>), ParseError> {
        if self.at(&Tok::Minus) && matches!(self.peek_at(1).tok, Tok::Partial(_)) {
            self.bump();
            let (s, i) = self.op_term()?;
            return Ok((-s, i));
        }
        if let Tok::Partial(name) = &self.peek().tok {
            let name = name.clone();
            let t = self.bump();
            let i = self.coord_for_partial(&name, &t)?;
            return Ok((ScalarExpr::one(), Some(i)));
        }
        let scalar = self.scalar_product(Stop::Partial)?;
        if self.at(&Tok::Star) {
            self.bump();
            if let Tok::Partial(name) = &self.peek().tok {
                let name = name.clone();
                let t = self.bump();
                let i = self.coord_for_partial(&name, &t)?;
                return Ok((scalar, Some(i)));
            }
            return Err(self.err_here("expected a d/d<coordinate> basis symbol"));
        }
        Ok((scalar, None))
    }

    fn coord_for_partial(&self, name: &str, t: &Token) -> Result<usize, ParseError> {
        self.chart_ref()
            .coord_index(name)
            .ok_or_else(|| self.err_at(t, format!("unknown coordinate {name}")))
    }

    // ------------------------------------------------------------------
    // form expressions

    fn x_form_expr(&mut self, degree: usize) -> Result<XForm, ParseError> {
        let dim = self.dim();
        let mut acc = XForm::zero(dim, degree);
        self.form_terms(Stop::Covector { on_d: false }, degree, |key, coeff| {
            let mut term = XForm::zero(dim, degree);
            term.set(key, coeff);
            acc = std::mem::replace(&mut acc, XForm::zero(dim, degree)) + term;
        })?;
        Ok(acc)
    }

    fn d_form_expr(&mut self, degree: usize) -> Result<SkewFormD, ParseError> {
        let dim = self.dim();
        let mut acc = SkewFormD::zero(dim, degree);
        self.form_terms(Stop::Covector { on_d: true }, degree, |key, coeff| {
            let mut term = SkewFormD::zero(dim, degree);
            term.set(key, coeff);
            acc = std::mem::replace(&mut acc, SkewFormD::zero(dim, degree)) + term;
        })?;
        Ok(acc)
    }

    /// Parse the sum of terms, handing each nonzero `(sorted key, coefficient)`
    /// to `emit`. Terms with a repeated covector vanish and are skipped.
    fn form_terms<F>(&mut self, stop: Stop, degree: usize, mut emit: F) -> Result<(), ParseError>
    where
        F: FnMut(&[u8], ScalarExpr),
    {
        let mut negate = false;
        loop {
            let term_tok = self.peek().clone();
            let (mut coeff, raw_key) = self.form_term(stop)?;
            if negate {
                coeff = -coeff;
            }
            if raw_key.len() != degree && !(raw_key.is_empty() && coeff.is_zero_const()) {
                return Err(self.err_at(
                    &term_tok,
                    format!(
                        "degree mismatch: term has degree {}, the binding declares {degree}",
                        raw_key.len()
                    ),
                ));
            }
            if !coeff.is_zero_const() {
                if let Some((key, sign)) = sort_key(&raw_key) {
                    emit(&key, if sign < 0 { -coeff } else { coeff });
                }
            }
            if self.eat(&Tok::Plus) {
                negate = false;
            } else if self.eat(&Tok::Minus) {
                negate = true;
            } else {
                return Ok(());
            }
        }
    }

    /// One additive term: `mono`, `expr * mono`, or a bare scalar (degree 0).
    /// Top-level `+`/`-` belongs to the caller; scalar sums need parentheses.
    fn form_term(&mut self, stop: Stop) -> Result<(ScalarExpr, Vec<u8>), ParseError> {
        if self.at(&Tok::Minus) && self.basis_follows(1, stop) {
            self.bump();
            let (coeff, key) = self.form_term(stop)?;
            return Ok((-coeff, key));
        }
        if self.basis_follows(0, stop) {
            let key = self.wedge_monomial(stop)?;
            return Ok((ScalarExpr::one(), key));
        }
        let scalar = self.scalar_product(stop)?;
        if self.at(&Tok::Star) && self.basis_follows(1, stop) {
            self.bump();
            let key = self.wedge_monomial(stop)?;
            return Ok((scalar, key));
        }
        if self.at(&Tok::Caret) {
            return Err(self.err_here("covector factors attach with '*', not '^'"));
        }
        Ok((scalar, Vec::new()))
    }

    fn wedge_monomial(&mut self, stop: Stop) -> Result<Vec<u8>, ParseError> {
        let mut key = vec![self.covector(stop)?];
        while self.at(&Tok::Caret) {
            self.bump();
            key.push(self.covector(stop)?);
        }
        Ok(key)
    }

    fn covector(&mut self, stop: Stop) -> Result<u8, ParseError> {
        let on_d = matches!(stop, Stop::Covector { on_d: true });
        let t = self.peek().clone();
        let Tok::Ident(name) = &t.tok else {
            return Err(self.err_here("expected a covector (d<coordinate> or u)"));
        };
        let name = name.clone();
        if name == "u" {
            self.bump();
            if !on_d {
                return Err(self.err_at(&t, "'u' denotes the unit covector; forms on X have none"));
            }
            return Ok(0);
        }
        if name.len() >= 2 && name.starts_with('d') {
            let rest = &name[1..];
            if let Some(i) = self.chart_ref().coord_index(rest) {
                self.bump();
                return Ok(if on_d { (i + 1) as u8 } else { i as u8 });
            }
            if !self.by_name.contains_key(&name) {
                self.bump();
                return Err(self.err_at(&t, format!("unknown coordinate {rest}")));
            }
        }
        Err(self.err_at(&t, "expected a covector (d<coordinate> or u)"))
    }

    // ------------------------------------------------------------------
    // structures and checks

    fn structure(&mut self, kind: StructureKind) -> Result<(), ParseError> {
        self.bump(); // keyword
        let (name, name_tok) = self.ident("a structure name")?;
        if self.structures.iter().any(|s| s.name == name) {
            return Err(self.err_at(&name_tok, format!("structure '{name}' is already declared")));
        }
        self.expect(Tok::LBrace, "'{' to open the structure body")?;
        let mut entries: Vec<(String, Token)> = Vec::new();
        let mut refs: Vec<(&'static str, String)> = Vec::new();
        let mut forms_x: HashMap<&'static str, XForm> = HashMap::new();
        let mut forms_d: HashMap<&'static str, SkewFormD> = HashMap::new();
        let mut fields: HashMap<&'static str, DiffOp> = HashMap::new();
        let mut contact_ref: Option<String> = None;
        let mut c_value: Option<BigRational> = None;
        let mut g_value: Option<ScalarExpr> = None;
        while !self.at(&Tok::RBrace) {
            let (key, key_tok) = self.ident("a structure key")?;
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(self.err_at(&key_tok, format!("duplicate key '{key}'")));
            }
            self.expect(Tok::Eq, "'=' after the key")?;
            match (kind, key.as_str()) {
                (StructureKind::Lcs, k @ ("alpha" | "omega")) => {
                    let expected = if k == "alpha" { 1 } else { 2 };
                    let (n, v) = self.form_x_ref(expected)?;
                    let k: &'static str = if k == "alpha" { "alpha" } else { "omega" };
                    refs.push((k, n));
                    forms_x.insert(k, v);
                }
                (StructureKind::Contact, k @ ("beta" | "omega")) => {
                    let expected = if k == "beta" { 1 } else { 2 };
                    let (n, v) = self.form_x_ref(expected)?;
                    let k: &'static str = if k == "beta" { "beta" } else { "omega" };
                    refs.push((k, n));
                    forms_x.insert(k, v);
                }
                (StructureKind::Contact, "reeb") => {
                    let (n, v) = self.field_ref()?;
                    refs.push(("reeb", n));
                    fields.insert("reeb", v);
                }
                (StructureKind::Lrj, k @ ("alpha" | "omega")) => {
                    let expected = if k == "alpha" { 1 } else { 2 };
                    let (n, v) = self.form_d_ref(expected)?;
                    let k: &'static str = if k == "alpha" { "alpha" } else { "omega" };
                    refs.push((k, n));
                    forms_d.insert(k, v);
                }
                (StructureKind::Lift, "contact") => {
                    let (n, n_tok) = self.ident("the name of a contact structure")?;
                    let found = self
                        .structures
                        .iter()
                        .find(|s| s.name == n)
                        .ok_or_else(|| {
                            self.err_at(&n_tok, format!("unresolved identifier '{n}'"))
                        })?;
                    if found.kind() != StructureKind::Contact {
                        return Err(self.err_at(
                            &n_tok,
                            format!("'{n}' is a {} structure, not contact", found.kind().keyword()),
                        ));
                    }
                    refs.push(("contact", n.clone()));
                    contact_ref = Some(n);
                }
                (StructureKind::Lift, "c") => {
                    let e_tok = self.peek().clone();
                    let e = self.scalar_expr(Stop::None)?;
                    let nf = e.normalized();
                    match nf.expr.as_rat() {
                        Some(q) if nf.caveats.is_empty() => c_value = Some(q.clone()),
                        _ => {
                            return Err(
                                self.err_at(&e_tok, "'c' must be a rational constant")
                            );
                        }
                    }
                }
                (StructureKind::Lift, "g") => {
                    g_value = Some(self.scalar_expr(Stop::None)?);
                }
                _ => {
                    return Err(self.err_at(
                        &key_tok,
                        format!("unknown key '{key}' in a {} block", kind.keyword()),
                    ));
                }
            }
            entries.push((key, key_tok));
            self.expect(Tok::Semi, "';' after the entry")?;
        }
        let close = self.expect(Tok::RBrace, "'}'")?;
        let missing = |what: &str| {
            self.err_at(
                &close,
                format!("{} '{}' is missing '{what}'", kind.keyword(), name),
            )
        };
        let data = match kind {
            StructureKind::Lcs => StructureData::Lcs {
                alpha: forms_x.remove("alpha").ok_or_else(|| missing("alpha"))?,
                omega: forms_x.remove("omega").ok_or_else(|| missing("omega"))?,
            },
            StructureKind::Contact => StructureData::Contact {
                beta: forms_x.remove("beta").ok_or_else(|| missing("beta"))?,
                omega: forms_x.remove("omega").ok_or_else(|| missing("omega"))?,
                reeb: fields.remove("reeb").ok_or_else(|| missing("reeb"))?,
            },
            StructureKind::Lrj => StructureData::Lrj {
                alpha: forms_d.remove("alpha").ok_or_else(|| missing("alpha"))?,
                omega: forms_d.remove("omega").ok_or_else(|| missing("omega"))?,
            },
            StructureKind::Lift => StructureData::Lift {
                contact: contact_ref.ok_or_else(|| missing("contact"))?,
                c: c_value.unwrap_or_else(|| BigRational::from(BigInt::from(0))),
                g: g_value.unwrap_or_else(ScalarExpr::zero),
            },
        };
        self.structures.push(StructureDecl { name, data, refs });
        Ok(())
    }

    fn form_x_ref(&mut self, degree: usize) -> Result<(String, XForm), ParseError> {
        let (n, t) = self.ident("the name of a form on X")?;
        let Some(&i) = self.by_name.get(&n) else {
            return Err(self.err_at(&t, format!("unresolved identifier '{n}'")));
        };
        match &self.bindings[i].value {
            Value::FormX(f) if f.degree() == degree => Ok((n, f.clone())),
            Value::FormX(f) => Err(self.err_at(
                &t,
                format!("'{n}' has degree {}, expected {degree}", f.degree()),
            )),
            other => Err(self.err_at(
                &t,
                format!("'{n}' is a {}, expected a form on X", other.kind_name()),
            )),
        }
    }

    fn form_d_ref(&mut self, degree: usize) -> Result<(String, SkewFormD), ParseError> {
        let (n, t) = self.ident("the name of a form on D")?;
        let Some(&i) = self.by_name.get(&n) else {
            return Err(self.err_at(&t, format!("unresolved identifier '{n}'")));
        };
        match &self.bindings[i].value {
            Value::FormD(f) if f.degree() == degree => Ok((n, f.clone())),
            Value::FormD(f) => Err(self.err_at(
                &t,
                format!("'{n}' has degree {}, expected {degree}", f.degree()),
            )),
            other => Err(self.err_at(
                &t,
                format!("'{n}' is a {}, expected a form on D", other.kind_name()),
            )),
        }
    }

    fn field_ref(&mut self) -> Result<(String, DiffOp), ParseError> {
        let (n, t) = self.ident("the name of a field")?;
        let Some(&i) = self.by_name.get(&n) else {
            return Err(self.err_at(&t, format!("unresolved identifier '{n}'")));
        };
        match &self.bindings[i].value {
            Value::Field(op) => Ok((n, op.clone())),
            other => Err(self.err_at(
                &t,
                format!("'{n}' is a {}, expected a field", other.kind_name()),
            )),
        }
    }

    fn check(&mut self) -> Result<(), ParseError> {
        self.bump(); // check
        let (target, t) = self.ident("the name of a declared structure")?;
        if !self.structures.iter().any(|s| s.name == target) {
            return Err(self.err_at(&t, format!("unresolved identifier '{target}'")));
        }
        let mut trials = None;
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "with") {
            self.bump();
            loop {
                let (key, key_tok) = self.ident("an option name")?;
                self.expect(Tok::Eq, "'=' after the option name")?;
                match key.as_str() {
                    "trials" => {
                        let v_tok = self.peek().clone();
                        match &v_tok.tok {
                            Tok::Number(text) if !text.contains('.') => {
                                let n: usize = text
                                    .parse()
                                    .map_err(|_| self.err_here("trial count out of range"))?;
                                if n == 0 {
                                    return Err(
                                        self.err_at(&v_tok, "trials must be at least 1")
                                    );
                                }
                                self.bump();
                                trials = Some(n);
                            }
                            _ => return Err(self.err_here("expected a positive integer")),
                        }
                    }
                    _ => {
                        return Err(
                            self.err_at(&key_tok, format!("unknown check option '{key}'"))
                        );
                    }
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::Semi, "';' after the check directive")?;
        self.checks.push(CheckDirective { target, trials });
        Ok(())
    }
}

/// Where a scalar subexpression must yield to a basis symbol.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Stop {
    None,
    Partial,
    Covector { on_d: bool },
}

fn function_by_name(name: &str) -> Option<fn(ScalarExpr) -> ScalarExpr> {
    match name {
        "sin" => Some(ScalarExpr::sin),
        "cos" => Some(ScalarExpr::cos),
        "exp" => Some(ScalarExpr::exp),
        _ => None,
    }
}

fn number_literal(text: &str) -> BigRational {
    match text.split_once('.') {
        None => BigRational::from(BigInt::from_str(text).expect("lexer validated digits")),
        Some((whole, frac)) => {
            let digits: String = [whole, frac].concat();
            let numer = BigInt::from_str(&digits).expect("lexer validated digits");
            let denom = BigInt::from(10).pow(frac.len() as u32);
            BigRational::new(numer, denom)
        }
    }
}

/// Sort a covector tuple, returning the sorted key and the permutation sign;
/// `None` when an index repeats (the term vanishes).
fn sort_key(raw: &[u8]) -> Option<(Vec<u8>, i8)> {
    let mut key = raw.to_vec();
    let mut sign = 1i8;
    for i in 1..key.len() {
        let mut j = i;
        while j > 0 && key[j] < key[j - 1] {
            key.swap(j, j - 1);
            sign = -sign;
            j -= 1;
        }
    }
    if key.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((key, sign))
}

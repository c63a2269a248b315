//! The parametric Weyl algebra A_n(Q)[s_1..s_p] in left normal form.
//!
//! An operator is stored as a commutative polynomial over the block order
//! `d, x, s`: the term `c * x^a * s^b * d^g` stands for the normal-ordered
//! `c x^a s^b ∂^g`. Descending lex over that order is the canonical term
//! order, i.e. by derivation multi-index first, then by coefficient monomial.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{ParseError, WeylError};
use crate::poly::{Monomial, MultiPoly, VarBlock, VarContext};
use crate::rational::Rational;

fn cached_context(key: (&'static str, usize, usize), make: impl FnOnce() -> Vec<VarBlock>) -> Arc<VarContext> {
    type Cache = Mutex<HashMap<(&'static str, usize, usize), Arc<VarContext>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
    map.entry(key)
        .or_insert_with(|| VarContext::new(make()).expect("context too large"))
        .clone()
}

/// Coefficient context `x1..xn, s1..sp`.
pub fn coeff_context(n: usize, p: usize) -> Arc<VarContext> {
    cached_context(("xs", n, p), || {
        vec![VarContext::numbered("x", "x", 1, n), VarContext::numbered("s", "s", 1, p)]
    })
}

/// Storage context `d1..dn, x1..xn, s1..sp`.
fn op_context(n: usize, p: usize) -> Arc<VarContext> {
    cached_context(("dxs", n, p), || {
        vec![
            VarContext::numbered("d", "d", 1, n),
            VarContext::numbered("x", "x", 1, n),
            VarContext::numbered("s", "s", 1, p),
        ]
    })
}

/// Symbol context `x1..xn, xi1..xin, s1..sp`.
pub fn symbol_context(n: usize, p: usize) -> Arc<VarContext> {
    cached_context(("xxis", n, p), || {
        vec![
            VarContext::numbered("x", "x", 1, n),
            VarContext::numbered("xi", "xi", 1, n),
            VarContext::numbered("s", "s", 1, p),
        ]
    })
}

/// Element of A_n(Q)[s_1..s_p], left normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylOp {
    n: usize,
    p: usize,
    poly: MultiPoly,
}

fn split(m: &Monomial, n: usize) -> (Monomial, Monomial) {
    let mut g = Monomial::one();
    let mut c = *m;
    for i in 0..n {
        g.0[i] = m.0[i];
        c.0[i] = 0;
    }
    (g, c)
}

fn binom(a: u16, b: u16) -> u64 {
    let mut r: u64 = 1;
    for t in 0..b as u64 {
        r = r * (a as u64 - t) / (t + 1);
    }
    r
}

fn falling(a: u16, b: u16) -> u64 {
    (0..b as u64).map(|t| a as u64 - t).product()
}

/// All multi-indices `g <= a` in the first `n` slots.
fn sub_indices(a: &Monomial, n: usize) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    for i in 0..n {
        let mut next = Vec::with_capacity(out.len() * (a.0[i] as usize + 1));
        for g in &out {
            for e in 0..=a.0[i] {
                let mut h = *g;
                h.0[i] = e;
                next.push(h);
            }
        }
        out = next;
    }
    out
}

impl WeylOp {
    pub fn zero(n: usize, p: usize) -> Self {
        WeylOp { n, p, poly: MultiPoly::zero(&op_context(n, p)) }
    }

    pub fn constant(n: usize, p: usize, c: Rational) -> Self {
        WeylOp { n, p, poly: MultiPoly::constant(&op_context(n, p), c) }
    }

    pub fn one(n: usize, p: usize) -> Self {
        Self::constant(n, p, Rational::one())
    }

    pub fn x(n: usize, p: usize, i: usize) -> Self {
        WeylOp { n, p, poly: MultiPoly::var(&op_context(n, p), n + i) }
    }

    pub fn s(n: usize, p: usize, i: usize) -> Self {
        WeylOp { n, p, poly: MultiPoly::var(&op_context(n, p), 2 * n + i) }
    }

    /// `∂/∂x_{i+1}`.
    pub fn d(n: usize, p: usize, i: usize) -> Self {
        WeylOp { n, p, poly: MultiPoly::var(&op_context(n, p), i) }
    }

    /// Multiplication operator by `f`, a polynomial in [`coeff_context`].
    pub fn from_coeff(n: usize, p: usize, f: &MultiPoly) -> Self {
        let map: Vec<Option<usize>> = (0..n + p).map(|k| Some(n + k)).collect();
        WeylOp { n, p, poly: f.embed(&op_context(n, p), &map) }
    }

    /// `sum_g coeffs[g] ∂^g`, coefficients in [`coeff_context`].
    pub fn from_parts<'a>(n: usize, p: usize, parts: impl IntoIterator<Item = (Monomial, &'a MultiPoly)>) -> Self {
        let ctx = op_context(n, p);
        let mut terms = Vec::new();
        for (g, f) in parts {
            for (m, c) in f.terms() {
                let mut t = g;
                for k in 0..n + p {
                    t.0[n + k] = m.0[k];
                }
                terms.push((t, c.clone()));
            }
        }
        WeylOp { n, p, poly: MultiPoly::from_terms(&ctx, terms) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn num_terms(&self) -> usize {
        self.poly.len()
    }

    /// Raw storage, terms `c * d^g x^a s^b` in canonical order.
    pub fn storage(&self) -> &MultiPoly {
        &self.poly
    }

    /// Highest derivation order.
    pub fn order(&self) -> u32 {
        self.poly.degree_in(0..self.n)
    }

    /// Left normal form as `g -> coefficient(x, s)`, ordered by `g` descending.
    pub fn left_terms(&self) -> Vec<(Monomial, MultiPoly)> {
        let cctx = coeff_context(self.n, self.p);
        let mut groups: BTreeMap<std::cmp::Reverse<Monomial>, Vec<(Monomial, Rational)>> = BTreeMap::new();
        for (m, c) in self.poly.terms() {
            let (g, rest) = split(m, self.n);
            let mut cm = Monomial::one();
            for k in 0..self.n + self.p {
                cm.0[k] = rest.0[self.n + k];
            }
            groups.entry(std::cmp::Reverse(g)).or_default().push((cm, c.clone()));
        }
        groups
            .into_iter()
            .map(|(g, ts)| (g.0, MultiPoly::from_terms(&cctx, ts)))
            .collect()
    }

    /// Coefficient of `∂^g` in left normal form.
    pub fn coefficient(&self, g: &Monomial) -> MultiPoly {
        self.left_terms()
            .into_iter()
            .find(|(h, _)| h == g)
            .map(|(_, f)| f)
            .unwrap_or_else(|| MultiPoly::zero(&coeff_context(self.n, self.p)))
    }

    /// Right normal form `sum_g ∂^g r_g`, ordered by `g` descending.
    pub fn right_terms(&self) -> Vec<(Monomial, MultiPoly)> {
        self.transpose()
            .left_terms()
            .into_iter()
            .map(|(g, b)| if g.degree() % 2 == 1 { (g, -b) } else { (g, b) })
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        WeylOp { n: self.n, p: self.p, poly: self.poly.scale(c) }
    }

    /// `f * self` for a coefficient polynomial `f`; no reordering needed.
    pub fn left_mul_coeff(&self, f: &MultiPoly) -> Self {
        let g = Self::from_coeff(self.n, self.p, f);
        WeylOp { n: self.n, p: self.p, poly: &g.poly * &self.poly }
    }

    fn check(&self, other: &Self) -> Result<(), WeylError> {
        if self.n != other.n || self.p != other.p {
            return Err(WeylError::DimensionMismatch(self.n, self.p, other.n, other.p));
        }
        Ok(())
    }

    fn mul_op(&self, other: &Self) -> Self {
        weyl_mul(self, other).expect("operator dimensions differ")
    }

    /// Formal adjoint: `x -> x`, `∂ -> -∂`, products reversed.
    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        // t(c x^a s^b ∂^g) = (-1)^|g| ∂^g x^a s^b, then reorder ∂^g past x^a
        for (m, c) in self.poly.terms() {
            let (g, coef) = split(m, n);
            let sign = if g.degree() % 2 == 1 { -c } else { c.clone() };
            for h in sub_indices(&g, n) {
                let mut k: u64 = 1;
                let mut out = coef;
                let mut ok = true;
                for i in 0..n {
                    let a = coef.0[n + i];
                    if h.0[i] > a {
                        ok = false;
                        break;
                    }
                    k *= binom(g.0[i], h.0[i]) * falling(a, h.0[i]);
                    out.0[n + i] = a - h.0[i];
                    out.0[i] = g.0[i] - h.0[i];
                }
                if !ok {
                    continue;
                }
                let v = &sign * &Rational::from_int(k as i64);
                *acc.entry(out).or_default() += &v;
            }
        }
        WeylOp { n, p: self.p, poly: MultiPoly::from_terms(self.poly.ctx(), acc) }
    }

    /// Parses operator text such as `x1^2*d1^2 + 4*x1*d1 + 2`.
    ///
    /// Grammar: sums and differences of products of factors; a factor is a
    /// unary minus applied to a factor, a parenthesised expression, a rational literal `a` or `a/b`, or one of
    /// `x#`, `s#`, `d#` (1-based), optionally raised to `^k`. Products are
    /// Weyl products in the written order.
    pub fn parse(text: &str, n: usize, p: usize) -> Result<Self, ParseError> {
        let mut ps = Parser { src: text.as_bytes(), pos: 0, n, p };
        let op = ps.expr()?;
        ps.skip_ws();
        if ps.pos != ps.src.len() {
            return Err(ps.err("trailing input"));
        }
        Ok(op)
    }
}

/// Normal-ordered product `a * b`.
///
/// Uses `∂^α b = sum_{γ<=α} C(α,γ) ∂^γ(b) ∂^{α-γ}` term by term.
pub fn weyl_mul(a: &WeylOp, b: &WeylOp) -> Result<WeylOp, WeylError> {
    a.check(b)?;
    let n = a.n;
    if a.is_zero() || b.is_zero() {
        return Ok(WeylOp::zero(n, a.p));
    }
    let mut acc: HashMap<Monomial, Rational> = HashMap::new();
    let mut subs: HashMap<Monomial, Vec<Monomial>> = HashMap::new();
    for (ma, ca) in a.poly.terms() {
        let (alpha, coef_a) = split(ma, n);
        let gammas = subs.entry(alpha).or_insert_with(|| sub_indices(&alpha, n));
        for (mb, cb) in b.poly.terms() {
            let cab = ca * cb;
            for g in gammas.iter() {
                let mut k: u64 = 1;
                let mut out = coef_a.mul(mb);
                let mut ok = true;
                for i in 0..n {
                    let xb = mb.0[n + i];
                    if g.0[i] > xb {
                        ok = false;
                        break;
                    }
                    k *= binom(alpha.0[i], g.0[i]) * falling(xb, g.0[i]);
                    out.0[n + i] -= g.0[i];
                    out.0[i] += alpha.0[i] - g.0[i];
                }
                if !ok {
                    continue;
                }
                let v = if k == 1 { cab.clone() } else { &cab * &Rational::from_int(k as i64) };
                *acc.entry(out).or_default() += &v;
            }
        }
    }
    Ok(WeylOp { n, p: a.p, poly: MultiPoly::from_terms(a.poly.ctx(), acc) })
}

/// Transpose; free-function alias of [`WeylOp::transpose`].
pub fn weyl_transpose(a: &WeylOp) -> WeylOp {
    a.transpose()
}

/// Top diesis-weight part with `∂ -> ξ`; weight is `|γ|` plus s-degree.
pub fn sharp_symbol(a: &WeylOp) -> Result<MultiPoly, WeylError> {
    if a.is_zero() {
        return Err(WeylError::ZeroOperator);
    }
    let (n, p) = (a.n, a.p);
    let weight = |m: &Monomial| m.degree_in(0..n) + m.degree_in(2 * n..2 * n + p);
    let top = a.poly.terms().iter().map(|(m, _)| weight(m)).max().unwrap();
    let ctx = symbol_context(n, p);
    let terms = a.poly.terms().iter().filter(|(m, _)| weight(m) == top).map(|(m, c)| {
        let mut out = Monomial::one();
        for i in 0..n {
            out.0[n + i] = m.0[i];
            out.0[i] = m.0[n + i];
        }
        for k in 0..p {
            out.0[2 * n + k] = m.0[2 * n + k];
        }
        (out, c.clone())
    });
    Ok(MultiPoly::from_terms(&ctx, terms))
}

/// Diesis weight of the top part.
pub fn sharp_degree(a: &WeylOp) -> Option<u32> {
    let (n, p) = (a.n, a.p);
    a.poly
        .terms()
        .iter()
        .map(|(m, _)| m.degree_in(0..n) + m.degree_in(2 * n..2 * n + p))
        .max()
}

/// `C_k^i` for all `|i| = k`, by the recurrence over removing one unit.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CkTable {
    pub n: usize,
    pub k: usize,
    pub entries: BTreeMap<Vec<u16>, u64>,
}

pub fn ck_table(n: usize, k: usize) -> CkTable {
    assert!(n >= 1 && k >= 1, "ck_table needs n, k >= 1");
    let mut layer: BTreeMap<Vec<u16>, u64> = BTreeMap::new();
    for j in 0..n {
        let mut e = vec![0u16; n];
        e[j] = 1;
        layer.insert(e, 1);
    }
    for _ in 1..k {
        let mut next: BTreeMap<Vec<u16>, u64> = BTreeMap::new();
        for (idx, v) in &layer {
            for j in 0..n {
                let mut up = idx.clone();
                up[j] += 1;
                let e = next.entry(up).or_insert(0);
                *e = e.checked_add(*v).expect("C_k overflow");
            }
        }
        layer = next;
    }
    CkTable { n, k, entries: layer }
}

impl CkTable {
    /// `sum C_k x^i ∂^i`.
    pub fn x_then_d(&self, p: usize) -> WeylOp {
        self.assemble(p, false)
    }

    /// `sum C_k ∂^i x^i`, normal ordered.
    pub fn d_then_x(&self, p: usize) -> WeylOp {
        self.assemble(p, true)
    }

    fn assemble(&self, p: usize, d_first: bool) -> WeylOp {
        let n = self.n;
        let mut acc = WeylOp::zero(n, p);
        for (idx, &c) in &self.entries {
            let mut xs = WeylOp::one(n, p);
            let mut ds = WeylOp::one(n, p);
            for (j, &e) in idx.iter().enumerate() {
                for _ in 0..e {
                    xs = &xs * &WeylOp::x(n, p, j);
                    ds = &ds * &WeylOp::d(n, p, j);
                }
            }
            let term = if d_first { &ds * &xs } else { &xs * &ds };
            acc = &acc + &term.scale(&Rational::from_int(c as i64));
        }
        acc
    }
}

/// Sign convention for [`euler_expand`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerOffset {
    /// factors `E - j`
    Minus,
    /// factors `E + j + n`
    PlusN,
}

/// `prod_{j=0}^{k-1} (E - j)` or `prod_{j=0}^{k-1} (E + j + n)`, `E = sum x_i ∂_i`.
pub fn euler_expand(n: usize, k: usize, offset: EulerOffset) -> WeylOp {
    let p = 0;
    let mut e = WeylOp::zero(n, p);
    for i in 0..n {
        e = &e + &(&WeylOp::x(n, p, i) * &WeylOp::d(n, p, i));
    }
    let mut acc = WeylOp::one(n, p);
    for j in 0..k {
        let shift = match offset {
            EulerOffset::Minus => -(j as i64),
            EulerOffset::PlusN => (j + n) as i64,
        };
        let f = &e + &WeylOp::constant(n, p, Rational::from_int(shift));
        acc = &acc * &f;
    }
    acc
}

impl<'a> Add<&'a WeylOp> for &'a WeylOp {
    type Output = WeylOp;
    fn add(self, rhs: &'a WeylOp) -> WeylOp {
        self.check(rhs).expect("operator dimensions differ");
        WeylOp { n: self.n, p: self.p, poly: &self.poly + &rhs.poly }
    }
}

impl<'a> Sub<&'a WeylOp> for &'a WeylOp {
    type Output = WeylOp;
    fn sub(self, rhs: &'a WeylOp) -> WeylOp {
        self.check(rhs).expect("operator dimensions differ");
        WeylOp { n: self.n, p: self.p, poly: &self.poly - &rhs.poly }
    }
}

impl<'a> Mul<&'a WeylOp> for &'a WeylOp {
    type Output = WeylOp;
    fn mul(self, rhs: &'a WeylOp) -> WeylOp {
        self.mul_op(rhs)
    }
}

impl Add for WeylOp {
    type Output = WeylOp;
    fn add(self, rhs: WeylOp) -> WeylOp {
        &self + &rhs
    }
}

impl Sub for WeylOp {
    type Output = WeylOp;
    fn sub(self, rhs: WeylOp) -> WeylOp {
        &self - &rhs
    }
}

impl Mul for WeylOp {
    type Output = WeylOp;
    fn mul(self, rhs: WeylOp) -> WeylOp {
        self.mul_op(&rhs)
    }
}

impl Neg for &WeylOp {
    type Output = WeylOp;
    fn neg(self) -> WeylOp {
        WeylOp { n: self.n, p: self.p, poly: -&self.poly }
    }
}

impl Neg for WeylOp {
    type Output = WeylOp;
    fn neg(self) -> WeylOp {
        -&self
    }
}

impl fmt::Display for WeylOp {
    /// Canonical text: terms in storage order, each `c*x..*s..*d..`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let names = self.poly.ctx().names();
        let (n, p) = (self.n, self.p);
        // x and s first, d last
        let order: Vec<usize> = (n..2 * n + p).chain(0..n).collect();
        for (k, (m, c)) in self.poly.terms().iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut parts = Vec::new();
            for &v in &order {
                match m.0[v] {
                    0 => {}
                    1 => parts.push(names[v].clone()),
                    e => parts.push(format!("{}^{e}", names[v])),
                }
            }
            if parts.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", parts.join("*"))?;
            } else {
                write!(f, "{a}*{}", parts.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
    p: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError::Operator { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn expr(&mut self) -> Result<WeylOp, ParseError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.product()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.product()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<WeylOp, ParseError> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<WeylOp, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let e: u32 = self
            .digits()
            .ok_or_else(|| self.err("expected exponent"))?
            .parse()
            .map_err(|_| self.err("exponent too large"))?;
        let mut acc = WeylOp::one(self.n, self.p);
        for _ in 0..e {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<WeylOp, ParseError> {
        let (n, p) = (self.n, self.p);
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.power()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.digits().unwrap();
                let mut lit = num;
                if self.src.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    let den = self.digits().ok_or_else(|| self.err("expected denominator"))?;
                    lit = format!("{lit}/{den}");
                }
                let r: Rational = lit.parse().map_err(|_| self.err("bad rational literal"))?;
                Ok(WeylOp::constant(n, p, r))
            }
            Some(c @ (b'x' | b's' | b'd')) => {
                self.pos += 1;
                let at = self.pos;
                let idx: usize = self
                    .digits()
                    .ok_or_else(|| self.err("expected variable index"))?
                    .parse()
                    .map_err(|_| self.err("bad variable index"))?;
                let bound = if c == b's' { p } else { n };
                if idx == 0 || idx > bound {
                    return Err(ParseError::Operator { pos: at, msg: format!("index {idx} out of range 1..={bound}") });
                }
                Ok(match c {
                    b'x' => WeylOp::x(n, p, idx - 1),
                    b's' => WeylOp::s(n, p, idx - 1),
                    _ => WeylOp::d(n, p, idx - 1),
                })
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn op(text: &str, n: usize, p: usize) -> WeylOp {
        WeylOp::parse(text, n, p).unwrap()
    }

    /// `x^m` under `op` in one variable, evaluated naively via repeated differentiation.
    fn act_1d(op: &WeylOp, m: u16) -> MultiPoly {
        let ctx = coeff_context(1, 0);
        let mut out = MultiPoly::zero(&ctx);
        let f = MultiPoly::var(&ctx, 0).pow(m as u32);
        for (g, c) in op.left_terms() {
            let mut h = f.clone();
            for _ in 0..g.0[0] {
                h = h.derivative(0);
            }
            out = out + &c * &h;
        }
        out
    }

    #[test]
    fn commutation_relation() {
        assert_eq!(op("d1*x1", 1, 0), op("x1*d1 + 1", 1, 0));
        assert_eq!(op("s1*d1", 1, 1), op("d1*s1", 1, 1));
    }

    #[test]
    fn second_order_product_agrees_with_action() {
        let lhs = op("d1^2*x1^2", 1, 0);
        assert_eq!(lhs.to_string(), "x1^2*d1^2 + 4*x1*d1 + 2");
        let rhs = op("x1^2*d1^2 + 4*x1*d1 + 2", 1, 0);
        for m in 0..4 {
            // act on x^m through the unexpanded composition
            let ctx = coeff_context(1, 0);
            let x = MultiPoly::var(&ctx, 0);
            let direct = (&(&x * &x) * &x.pow(m as u32)).derivative(0).derivative(0);
            assert_eq!(act_1d(&rhs, m), direct);
        }
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(op("d1", 1, 0).transpose(), op("-d1", 1, 0));
        assert_eq!(op("x1*d1", 1, 0).transpose(), op("-x1*d1 - 1", 1, 0));
    }

    #[test]
    fn right_normal_form_reassembles() {
        let a = op("x1^2*d1*s1 + 3*x2*d2^2 - x1", 2, 1);
        let mut back = WeylOp::zero(2, 1);
        for (g, r) in a.right_terms() {
            let mut d = WeylOp::one(2, 1);
            for i in 0..2 {
                for _ in 0..g.0[i] {
                    d = &d * &WeylOp::d(2, 1, i);
                }
            }
            back = &back + &(&d * &WeylOp::from_coeff(2, 1, &r));
        }
        assert_eq!(back, a);
    }

    #[test]
    fn sharp_symbol_examples() {
        let s = sharp_symbol(&op("s1 + x1", 1, 1)).unwrap();
        assert_eq!(s.to_string(), "s1");
        let e = sharp_symbol(&op("x1*d1 + x2*d2 - s1 - s2 - s3", 2, 3)).unwrap();
        assert_eq!(e.to_string(), "x1*xi1 + x2*xi2 - s1 - s2 - s3");
        assert_eq!(sharp_symbol(&WeylOp::zero(1, 1)), Err(WeylError::ZeroOperator));
    }

    fn multinomial(idx: &[u16]) -> u64 {
        let k: u16 = idx.iter().sum();
        let fact = |m: u16| (1..=m as u64).product::<u64>();
        fact(k) / idx.iter().map(|&e| fact(e)).product::<u64>()
    }

    #[test]
    fn ck_table_matches_multinomials_and_euler() {
        for n in 1..=3 {
            for k in 1..=4 {
                let t = ck_table(n, k);
                for (idx, &v) in &t.entries {
                    assert_eq!(v, multinomial(idx));
                }
                assert_eq!(euler_expand(n, k, EulerOffset::Minus), t.x_then_d(0));
                assert_eq!(euler_expand(n, k, EulerOffset::PlusN), t.d_then_x(0));
            }
        }
        assert_eq!(ck_table(2, 2).entries[&vec![1, 1]], 2);
        assert_eq!(euler_expand(2, 2, EulerOffset::Minus).to_string(), "x1^2*d1^2 + 2*x1*x2*d1*d2 + x2^2*d2^2");
    }

    #[test]
    fn transpose_of_euler_products() {
        // t(E - j) = -(E + n + j), and t reverses the factor order
        for n in 1..=3 {
            for k in 1..=3 {
                let sign = Rational::from_int(if k % 2 == 0 { 1 } else { -1 });
                let t = euler_expand(n, k, EulerOffset::Minus).transpose();
                assert_eq!(t, euler_expand(n, k, EulerOffset::PlusN).scale(&sign));
            }
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        assert!(matches!(WeylOp::parse("x1 + x3", 2, 0), Err(ParseError::Operator { pos: 6, .. })));
        assert!(matches!(WeylOp::parse("x1 +", 2, 0), Err(ParseError::Operator { .. })));
        assert!(matches!(WeylOp::parse("(x1", 2, 0), Err(ParseError::Operator { .. })));
        assert_eq!(op("1/2*x1 - 3/4", 1, 0).to_string(), "1/2*x1 - 3/4");
    }

    fn arb_op(n: usize, p: usize) -> impl Strategy<Value = WeylOp> {
        let width = 2 * n + p;
        prop::collection::vec((prop::collection::vec(0u16..3, width), -3i64..4), 0..4).prop_map(move |ts| {
            let ctx = op_context(n, p);
            let poly = MultiPoly::from_terms(
                &ctx,
                ts.into_iter().map(|(e, c)| (Monomial::from_slice(&e), Rational::from_int(c))),
            );
            WeylOp { n, p, poly }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn algebra_laws(a in arb_op(2, 1), b in arb_op(2, 1), c in arb_op(2, 1)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(a.transpose().transpose(), a.clone());
            prop_assert_eq!((&a * &b).transpose(), &b.transpose() * &a.transpose());
            let text = a.to_string();
            prop_assert_eq!(WeylOp::parse(&text, 2, 1).unwrap(), a.clone());
        }

        #[test]
        fn sharp_symbol_multiplicative(a in arb_op(2, 1), b in arb_op(2, 1)) {
            prop_assume!(!a.is_zero() && !b.is_zero());
            let ab = &a * &b;
            prop_assume!(sharp_degree(&ab) == Some(sharp_degree(&a).unwrap() + sharp_degree(&b).unwrap()));
            let lhs = sharp_symbol(&ab).unwrap();
            prop_assert_eq!(lhs, &sharp_symbol(&a).unwrap() * &sharp_symbol(&b).unwrap());
        }
    }
}

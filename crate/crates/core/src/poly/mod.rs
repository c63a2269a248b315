//! Sparse multivariate polynomials over exact rationals.
//!
//! Variables live in a [`VarContext`]: an ordered list of named blocks. The
//! term order is lex over the flattened variable list, so the first block is
//! the most significant and, inside a block, the lower index wins. Terms are
//! stored sorted in descending order.

mod groebner;

pub use groebner::{
    buchberger, buchberger_with_stats, ideal_member, normal_form, reduce_with_quotients,
    s_polynomial, BuchbergerStats, IdealBasis, Membership,
};

use std::collections::HashMap;

use rustc_hash::FxHashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::PolyError;
use crate::rational::Rational;

/// Hard cap on the number of variables of a context.
pub const MAX_VARS: usize = 16;

/// One named block of variables, e.g. `s` with members `s2, s3, s4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBlock {
    pub name: String,
    pub vars: Vec<String>,
}

/// Named variable blocks in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarContext {
    blocks: Vec<VarBlock>,
    names: Vec<String>,
}

impl VarContext {
    pub fn new(blocks: Vec<VarBlock>) -> Result<Arc<Self>, PolyError> {
        let names: Vec<String> = blocks.iter().flat_map(|b| b.vars.iter().cloned()).collect();
        if names.len() > MAX_VARS {
            return Err(PolyError::TooManyVariables(names.len()));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(PolyError::DuplicateVariable(a.clone()));
            }
        }
        Ok(Arc::new(VarContext { blocks, names }))
    }

    /// Block whose variables are `prefix{first}, ..., prefix{first+count-1}`.
    pub fn numbered(name: &str, prefix: &str, first: usize, count: usize) -> VarBlock {
        VarBlock {
            name: name.to_string(),
            vars: (first..first + count).map(|i| format!("{prefix}{i}")).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn blocks(&self) -> &[VarBlock] {
        &self.blocks
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|v| v == name)
    }

    /// Flat index range of the named block.
    pub fn block_range(&self, block: &str) -> Option<std::ops::Range<usize>> {
        let mut start = 0;
        for b in &self.blocks {
            if b.name == block {
                return Some(start..start + b.vars.len());
            }
            start += b.vars.len();
        }
        None
    }
}

fn same_ctx(a: &Arc<VarContext>, b: &Arc<VarContext>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Exponent vector. Derived `Ord` is lex with index 0 most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub [u16; MAX_VARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; MAX_VARS])
    }

    pub fn var(i: usize) -> Self {
        let mut m = Self::one();
        m.0[i] = 1;
        m
    }

    pub fn from_slice(e: &[u16]) -> Self {
        let mut m = Self::one();
        m.0[..e.len()].copy_from_slice(e);
        m
    }

    pub fn get(&self, i: usize) -> u16 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: u16) {
        self.0[i] = v;
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn degree_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.0[range].iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = *self;
        for (o, e) in out.0.iter_mut().zip(other.0.iter()) {
            *o = o.checked_add(*e).expect("exponent overflow");
        }
        out
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, if `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        let mut out = *other;
        for (o, e) in out.0.iter_mut().zip(self.0.iter()) {
            *o -= e;
        }
        Some(out)
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut out = *self;
        for (o, e) in out.0.iter_mut().zip(other.0.iter()) {
            *o = (*o).max(*e);
        }
        out
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn fmt_with(&self, ctx: &VarContext) -> String {
        let mut parts = Vec::new();
        for (i, name) in ctx.names().iter().enumerate() {
            match self.0[i] {
                0 => {}
                1 => parts.push(name.clone()),
                e => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// A polynomial in the variables of its context.
#[derive(Debug, Clone)]
pub struct MultiPoly {
    ctx: Arc<VarContext>,
    /// Sorted by descending monomial, no zero coefficients.
    terms: Vec<(Monomial, Rational)>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        same_ctx(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl MultiPoly {
    pub fn zero(ctx: &Arc<VarContext>) -> Self {
        MultiPoly { ctx: ctx.clone(), terms: Vec::new() }
    }

    pub fn constant(ctx: &Arc<VarContext>, c: Rational) -> Self {
        Self::monomial(ctx, Monomial::one(), c)
    }

    pub fn one(ctx: &Arc<VarContext>) -> Self {
        Self::constant(ctx, Rational::one())
    }

    pub fn var(ctx: &Arc<VarContext>, i: usize) -> Self {
        assert!(i < ctx.nvars(), "variable index out of range");
        Self::monomial(ctx, Monomial::var(i), Rational::one())
    }

    pub fn var_named(ctx: &Arc<VarContext>, name: &str) -> Self {
        let i = ctx.index_of(name).unwrap_or_else(|| panic!("no variable {name}"));
        Self::var(ctx, i)
    }

    pub fn monomial(ctx: &Arc<VarContext>, m: Monomial, c: Rational) -> Self {
        let terms = if c.is_zero() { Vec::new() } else { vec![(m, c)] };
        MultiPoly { ctx: ctx.clone(), terms }
    }

    /// Builds from arbitrary (possibly repeated, unsorted) terms.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(ctx: &Arc<VarContext>, it: I) -> Self {
        let mut acc: FxHashMap<Monomial, Rational> = FxHashMap::default();
        for (m, c) in it {
            *acc.entry(m).or_default() += &c;
        }
        Self::from_map(ctx, acc)
    }

    pub(crate) fn from_map(ctx: &Arc<VarContext>, acc: FxHashMap<Monomial, Rational>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        MultiPoly { ctx: ctx.clone(), terms }
    }

    /// Linear polynomial `sum coeffs[k] * var(offset + k)`.
    pub fn linear(ctx: &Arc<VarContext>, offset: usize, coeffs: &[Rational]) -> Self {
        Self::from_terms(
            ctx,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (Monomial::var(offset + k), c.clone())),
        )
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, Rational)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        match self.terms.binary_search_by(|t| m.cmp(&t.0)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Greatest term under the context's lex order.
    pub fn leading_term(&self) -> Result<(Monomial, Rational), PolyError> {
        self.terms.first().cloned().ok_or(PolyError::ZeroPolynomial)
    }

    pub fn leading_monomial(&self) -> Option<Monomial> {
        self.terms.first().map(|t| t.0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.0.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.terms.iter().map(|t| t.0.degree_in(range.clone())).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        MultiPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    /// `c * m * self`; order-preserving because lex is a monomial order.
    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        MultiPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect(),
        }
    }

    /// Makes the leading coefficient one (zero stays zero).
    pub fn monic(&self) -> Self {
        match self.terms.first() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        assert!(same_ctx(&self.ctx, &other.ctx), "context mismatch");
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0, c));
        }
        MultiPoly { ctx: self.ctx.clone(), terms: out }
    }

    /// `self - c * m * g`, the division step.
    pub fn sub_scaled(&self, g: &Self, m: &Monomial, c: &Rational) -> Self {
        self.merge(&g.mul_term(m, c), true)
    }

    pub fn mul_poly(&self, other: &Self) -> Self {
        assert!(same_ctx(&self.ctx, &other.ctx), "context mismatch");
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.ctx);
        }
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        if small.len() == 1 {
            let (m, c) = &small.terms[0];
            return big.mul_term(m, c);
        }
        let mut acc: FxHashMap<Monomial, Rational> =
            FxHashMap::with_capacity_and_hasher(big.len() * small.len(), Default::default());
        for (m1, c1) in &small.terms {
            for (m2, c2) in &big.terms {
                let c = c1 * c2;
                acc.entry(m1.mul(m2))
                    .and_modify(|e| *e += &c)
                    .or_insert(c);
            }
        }
        Self::from_map(&self.ctx, acc)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.ctx);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_poly(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_poly(&base);
            }
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = *m;
            m2.0[i] = e - 1;
            terms.push((m2, c * &Rational::from_int(e as i64)));
        }
        // lex is translation invariant, so the order survives
        MultiPoly { ctx: self.ctx.clone(), terms }
    }

    /// Substitutes `images[i]` for variable `i`; images live in `target`.
    pub fn substitute(&self, images: &[MultiPoly], target: &Arc<VarContext>) -> Self {
        assert_eq!(images.len(), self.ctx.nvars(), "one image per variable");
        let mut cache: HashMap<(usize, u16), MultiPoly> = HashMap::new();
        let mut acc: FxHashMap<Monomial, Rational> = FxHashMap::default();
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(target, c.clone());
            for (i, &e) in m.0[..self.ctx.nvars()].iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = cache
                    .entry((i, e))
                    .or_insert_with(|| images[i].pow(e as u32))
                    .clone();
                t = t.mul_poly(&p);
                if t.is_zero() {
                    break;
                }
            }
            for (m, c) in t.terms {
                *acc.entry(m).or_default() += &c;
            }
        }
        Self::from_map(target, acc)
    }

    /// Re-embeds into `target`, sending variable `i` to `map[i]`.
    /// Panics if a used variable has no image.
    pub fn embed(&self, target: &Arc<VarContext>, map: &[Option<usize>]) -> Self {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut out = Monomial::one();
            for (i, &e) in m.0[..self.ctx.nvars()].iter().enumerate() {
                if e > 0 {
                    let j = map[i].expect("variable has no image in target context");
                    out.0[j] += e;
                }
            }
            (out, c.clone())
        });
        Self::from_terms(target, terms)
    }

    /// Largest absolute numerator/denominator bit size among coefficients.
    pub fn max_coeff_bits(&self) -> u64 {
        self.terms
            .iter()
            .map(|(_, c)| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.merge(rhs, false)
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.merge(rhs, true)
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.mul_poly(rhs)
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: MultiPoly) -> MultiPoly {
        if self.is_zero() {
            return rhs;
        }
        self.merge(&rhs, false)
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        self.merge(&rhs, true)
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        self.mul_poly(&rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl fmt::Display for MultiPoly {
    /// Descending lex, e.g. `2*x1^2*s1 - 1/2*x2 + 5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", m.fmt_with(&self.ctx))?;
            } else {
                write!(f, "{a}*{}", m.fmt_with(&self.ctx))?;
            }
        }
        Ok(())
    }
}

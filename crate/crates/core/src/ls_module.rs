//! Exact action of `A_n(Q)[s]` on the module generated by `l^s = prod l_i^{s_i}`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::arrangement::Arrangement;
use crate::linalg;
use crate::poly::{reduce_with_quotients, Monomial, MultiPoly, VarContext};
use crate::rational::Rational;
use crate::weyl::{coeff_context, WeylOp};

/// `(numerator / prod l_i^{denom[i]}) * l^s`, numerator in `x, s`.
#[derive(Debug, Clone)]
pub struct LsElement {
    num: MultiPoly,
    denom: Vec<u32>,
}

impl LsElement {
    pub fn numerator(&self) -> &MultiPoly {
        &self.num
    }

    pub fn denominator(&self) -> &[u32] {
        &self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// The forms of one arrangement, prepared for differentiation.
#[derive(Debug, Clone)]
pub struct LsModule {
    n: usize,
    p: usize,
    forms: Vec<MultiPoly>,
    coeffs: Vec<Vec<Rational>>,
    /// for each `v`: forms involving `x_v`
    support: Vec<Vec<usize>>,
    s_vars: Vec<MultiPoly>,
}

impl LsModule {
    pub fn new(arr: &Arrangement) -> Self {
        let (n, p) = (arr.n(), arr.p());
        let forms: Vec<MultiPoly> = (0..p).map(|i| arr.form_poly(i)).collect();
        let coeffs: Vec<Vec<Rational>> = arr.forms().iter().map(|l| l.coeffs().to_vec()).collect();
        let support = (0..n).map(|v| (0..p).filter(|&i| !coeffs[i][v].is_zero()).collect()).collect();
        let ctx = coeff_context(n, p);
        let s_vars = (0..p).map(|i| MultiPoly::var(&ctx, n + i)).collect();
        LsModule { n, p, forms, coeffs, support, s_vars }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `f * l^s` for `f` in `x, s`.
    pub fn element(&self, f: MultiPoly) -> LsElement {
        LsElement { num: f, denom: vec![0; self.p] }
    }

    pub fn unit(&self) -> LsElement {
        self.element(MultiPoly::one(&coeff_context(self.n, self.p)))
    }

    /// `l_1 ... l_p * l^s`, i.e. `l^{s+1}`.
    pub fn shifted_unit(&self) -> LsElement {
        let f = self.forms.iter().fold(MultiPoly::one(&coeff_context(self.n, self.p)), |a, l| &a * l);
        self.element(f)
    }

    /// `prod l_i^{e_i} * l^s`.
    pub fn monomial(&self, e: &[u32]) -> LsElement {
        let mut f = MultiPoly::one(&coeff_context(self.n, self.p));
        for (i, &k) in e.iter().enumerate() {
            for _ in 0..k {
                f = &f * &self.forms[i];
            }
        }
        self.element(f)
    }

    /// Numerator of `e` over `prod l_i^{to_i}`; needs `to >= denominator`.
    pub fn lift(&self, e: &LsElement, to: &[u32]) -> MultiPoly {
        let mut f = e.num.clone();
        for i in 0..self.p {
            for _ in e.denom[i]..to[i] {
                f = &f * &self.forms[i];
            }
        }
        f
    }

    pub fn add(&self, a: &LsElement, b: &LsElement) -> LsElement {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let d: Vec<u32> = a.denom.iter().zip(&b.denom).map(|(x, y)| *x.max(y)).collect();
        LsElement { num: &self.lift(a, &d) + &self.lift(b, &d), denom: d }
    }

    pub fn sub(&self, a: &LsElement, b: &LsElement) -> LsElement {
        let neg = LsElement { num: -&b.num, denom: b.denom.clone() };
        self.add(a, &neg)
    }

    pub fn scale_poly(&self, f: &MultiPoly, e: &LsElement) -> LsElement {
        LsElement { num: f * &e.num, denom: e.denom.clone() }
    }

    /// `∂_v` of an element.
    pub fn derivative(&self, e: &LsElement, v: usize) -> LsElement {
        let sup = &self.support[v];
        if e.is_zero() {
            return e.clone();
        }
        let ctx = e.num.ctx().clone();
        let prod = |skip: Option<usize>| {
            sup.iter().filter(|&&i| Some(i) != skip).fold(MultiPoly::one(&ctx), |a, &i| &a * &self.forms[i])
        };
        // sum_i (s_i - d_i) c_iv prod_{S - i} l
        let mut weight = MultiPoly::zero(&ctx);
        for &i in sup {
            let shift = &self.s_vars[i] - &MultiPoly::constant(&ctx, Rational::from_int(e.denom[i] as i64));
            weight = &weight + &(&shift.scale(&self.coeffs[i][v]) * &prod(Some(i)));
        }
        let num = &(&e.num.derivative(v) * &prod(None)) + &(&e.num * &weight);
        let mut denom = e.denom.clone();
        for &i in sup {
            denom[i] += 1;
        }
        LsElement { num, denom }
    }

    /// Divides out every `l_i` that divides the numerator while `d_i > 0`.
    pub fn canonicalize(&self, e: &LsElement) -> LsElement {
        if e.is_zero() {
            return LsElement { num: e.num.clone(), denom: vec![0; self.p] };
        }
        let mut num = e.num.clone();
        let mut denom = e.denom.clone();
        for i in 0..self.p {
            while denom[i] > 0 {
                let (q, r) = reduce_with_quotients(&num, std::slice::from_ref(&self.forms[i]));
                if !r.is_zero() {
                    break;
                }
                num = q.into_iter().next().unwrap();
                denom[i] -= 1;
            }
        }
        LsElement { num, denom }
    }

    /// `P * e`, canonical.
    pub fn apply_op(&self, op: &WeylOp, e: &LsElement) -> LsElement {
        self.canonicalize(&self.apply_raw(op, e))
    }

    /// `P * e` without the final canonicalisation; zero iff the true result is.
    pub fn apply_raw(&self, op: &WeylOp, e: &LsElement) -> LsElement {
        assert_eq!((op.n(), op.p()), (self.n, self.p), "operator dimensions differ");
        let terms = op.left_terms();
        // every prefix obtained by peeling the last nonzero index, by order
        let mut levels: Vec<BTreeSet<Monomial>> = vec![BTreeSet::new(); op.order() as usize + 1];
        for (g, _) in &terms {
            let mut g = *g;
            while levels[g.degree() as usize].insert(g) && !g.is_one() {
                let v = (0..self.n).rev().find(|&v| g.get(v) > 0).unwrap();
                g.set(v, g.get(v) - 1);
            }
        }
        let mut derivs: HashMap<Monomial, LsElement> = HashMap::new();
        derivs.insert(Monomial::one(), e.clone());
        for level in levels.iter().skip(1) {
            let next: Vec<(Monomial, LsElement)> = level
                .par_iter()
                .map(|g| {
                    let v = (0..self.n).rev().find(|&v| g.get(v) > 0).unwrap();
                    let mut parent = *g;
                    parent.set(v, g.get(v) - 1);
                    (*g, self.derivative(&derivs[&parent], v))
                })
                .collect();
            derivs.extend(next);
        }
        let parts: Vec<LsElement> = terms.par_iter().map(|(g, a)| self.scale_poly(a, &derivs[g])).collect();
        drop(derivs);
        self.sum(parts)
    }

    /// Sum over a common denominator.
    ///
    /// Parts sharing a denominator are added first; the group sums are then
    /// lifted Horner-style in increasing order of total denominator.
    pub fn sum(&self, parts: Vec<LsElement>) -> LsElement {
        let ctx = coeff_context(self.n, self.p);
        let mut groups: BTreeMap<Vec<u32>, Vec<MultiPoly>> = BTreeMap::new();
        for e in parts {
            if !e.is_zero() {
                groups.entry(e.denom).or_default().push(e.num);
            }
        }
        let mut sums: Vec<(Vec<u32>, MultiPoly)> = groups
            .into_par_iter()
            .map(|(d, nums)| {
                let mut acc: FxHashMap<Monomial, Rational> = FxHashMap::default();
                for f in nums {
                    for (m, c) in f.into_terms() {
                        *acc.entry(m).or_default() += &c;
                    }
                }
                (d, MultiPoly::from_map(&ctx, acc))
            })
            .collect();
        sums.sort_by_key(|(d, _)| (d.iter().sum::<u32>(), d.clone()));
        let mut acc = LsElement { num: MultiPoly::zero(&ctx), denom: vec![0; self.p] };
        for (d, f) in sums {
            if acc.is_zero() {
                acc = LsElement { num: f, denom: d };
                continue;
            }
            let top: Vec<u32> = d.iter().zip(&acc.denom).map(|(x, y)| *x.max(y)).collect();
            let part = LsElement { num: f, denom: d };
            let lifted = &self.lift(&acc, &top) + &self.lift(&part, &top);
            acc = LsElement { num: lifted, denom: top };
        }
        acc
    }

    /// `P l^{s+shift} - target l^s`, cleared of denominators, in coordinates
    /// `y_i = l_i` (`i < n`) so that only the remaining forms need clearing.
    ///
    /// Zero iff the two sides agree. Needs `p >= n` with the first `n` forms
    /// independent; `None` otherwise.
    pub fn power_residual(&self, op: &WeylOp, shift: &[u32], target: &MultiPoly) -> Option<MultiPoly> {
        let (n, p) = (self.n, self.p);
        if p < n {
            return None;
        }
        let inv = linalg::inverse(&self.coeffs[..n].to_vec())?;
        let ctx = coeff_context(n, p);
        // x_r = sum_m inv[r][m] y_m; s unchanged
        let images: Vec<MultiPoly> = (0..n)
            .map(|r| MultiPoly::linear(&ctx, 0, &inv[r]))
            .chain((0..p).map(|i| MultiPoly::var(&ctx, n + i)))
            .collect();
        let tails: Vec<MultiPoly> = self.forms[n..].iter().map(|l| l.substitute(&images, &ctx)).collect();
        let zctx = VarContext::new(vec![VarContext::numbered("z", "z", 1, p)]).unwrap();
        // ∂_v acts on a product of forms through sum_i c_iv z_i
        let dz: Vec<MultiPoly> = (0..n)
            .map(|v| MultiPoly::linear(&zctx, 0, &(0..p).map(|i| self.coeffs[i][v].clone()).collect::<Vec<_>>()))
            .collect();
        let off = op.order() as i64;
        let mut groups: BTreeMap<Vec<i64>, FxHashMap<Monomial, Rational>> = BTreeMap::new();
        let mut falls: HashMap<Vec<u16>, MultiPoly> = HashMap::new();
        for (g, a) in op.left_terms() {
            let a = a.substitute(&images, &ctx);
            let zg = (0..n).fold(MultiPoly::one(&zctx), |acc, v| &acc * &dz[v].pow(g.get(v) as u32));
            for (k, mult) in zg.terms() {
                let key: Vec<u16> = (0..p).map(|i| k.get(i)).collect();
                let fall = falls.entry(key.clone()).or_insert_with(|| {
                    // prod_i (s_i + shift_i)(s_i + shift_i - 1)...(k_i factors)
                    let mut f = MultiPoly::one(&ctx);
                    for i in 0..p {
                        for t in 0..key[i] as i64 {
                            let c = Rational::from_int(shift[i] as i64 - t);
                            f = &f * &(&self.s_vars[i] + &MultiPoly::constant(&ctx, c));
                        }
                    }
                    f
                });
                let mut ym = Monomial::one();
                for i in 0..n {
                    ym.set(i, (shift[i] as i64 - key[i] as i64 + off) as u16);
                }
                let tail: Vec<i64> = (n..p).map(|j| shift[j] as i64 - key[j] as i64).collect();
                let part = (&a * &*fall).mul_term(&ym, mult);
                let acc = groups.entry(tail).or_default();
                for (m, c) in part.into_terms() {
                    *acc.entry(m).or_default() += &c;
                }
            }
        }
        let mut ym = Monomial::one();
        for i in 0..n {
            ym.set(i, off as u16);
        }
        let acc = groups.entry(vec![0; p - n]).or_default();
        for (m, c) in target.terms() {
            *acc.entry(m.mul(&ym)).or_default() -= c;
        }
        let low: Vec<i64> = (0..p - n).map(|j| groups.keys().map(|t| t[j]).min().unwrap_or(0)).collect();
        let mut out: FxHashMap<Monomial, Rational> = FxHashMap::default();
        for (t, acc) in groups {
            let mut f = MultiPoly::from_map(&ctx, acc);
            for j in 0..p - n {
                f = &f * &tails[j].pow((t[j] - low[j]) as u32);
            }
            for (m, c) in f.into_terms() {
                *out.entry(m).or_default() += &c;
            }
        }
        Some(MultiPoly::from_map(&ctx, out))
    }

    /// Exact equality of the represented elements.
    pub fn equal(&self, a: &LsElement, b: &LsElement) -> bool {
        self.sub(a, b).is_zero()
    }

    pub fn annihilates(&self, op: &WeylOp) -> bool {
        self.apply_raw(op, &self.unit()).is_zero()
    }

    pub fn display<'a>(&'a self, e: &'a LsElement) -> impl fmt::Display + 'a {
        DisplayLs(e)
    }
}

struct DisplayLs<'a>(&'a LsElement);

impl fmt::Display for DisplayLs<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let den: Vec<String> = self
            .0
            .denom
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(i, &d)| if d == 1 { format!("l{}", i + 1) } else { format!("l{}^{d}", i + 1) })
            .collect();
        if den.is_empty() {
            write!(f, "({}) * l^s", self.0.num)
        } else {
            write!(f, "({}) / ({}) * l^s", self.0.num, den.join("*"))
        }
    }
}

/// `P (l^s) = 0`.
pub fn annihilates(op: &WeylOp, arr: &Arrangement) -> bool {
    LsModule::new(arr).annihilates(op)
}

/// `P * e` in the module of `arr`.
pub fn apply_op(arr: &Arrangement, op: &WeylOp, e: &LsElement) -> LsElement {
    LsModule::new(arr).apply_op(op, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xy_sum() -> Arrangement {
        Arrangement::from_ints(2, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap()
    }

    fn poly(text: &str, n: usize, p: usize) -> MultiPoly {
        WeylOp::parse(text, n, p).unwrap().left_terms().into_iter().next().map(|(_, f)| f).unwrap()
    }

    #[test]
    fn chain_rule_example() {
        let a = xy_sum();
        let m = LsModule::new(&a);
        let r = m.apply_op(&WeylOp::d(2, 3, 0), &m.unit());
        // (s1 (x+y) + s3 x) / (x (x+y))
        let expect = LsElement { num: poly("x1*s1 + x2*s1 + x1*s3", 2, 3), denom: vec![1, 0, 1] };
        assert!(m.equal(&r, &expect));
        assert_eq!(r.denominator(), &[1, 0, 1]);
        assert_eq!(m.display(&r).to_string(), "(x1*s1 + x1*s3 + x2*s1) / (l1*l3) * l^s");
    }

    #[test]
    fn euler_tilde_and_fields() {
        let a = xy_sum();
        let m = LsModule::new(&a);
        assert!(m.annihilates(&a.euler_tilde()));
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(m.annihilates(&a.u_tilde_pair(i, j)));
                }
            }
        }
        assert!(!m.annihilates(&WeylOp::d(2, 3, 0)));
        let one = Arrangement::from_ints(1, &[&[1]]).unwrap();
        let m1 = LsModule::new(&one);
        let r = m1.apply_op(&WeylOp::parse("x1*d1", 1, 1).unwrap(), &m1.unit());
        assert!(m1.equal(&r, &m1.element(poly("s1", 1, 1))));
    }

    #[test]
    fn shift_convention() {
        let a = xy_sum();
        let m = LsModule::new(&a);
        let r = m.apply_op(&WeylOp::one(2, 3), &m.shifted_unit());
        assert!(m.equal(&r, &m.monomial(&[1, 1, 1])));
        let c = m.canonicalize(&LsElement { num: r.numerator().clone(), denom: vec![1, 1, 1] });
        assert!(c.numerator().is_constant() && c.denominator() == [0, 0, 0]);
    }

    fn arb_op() -> impl Strategy<Value = WeylOp> {
        let atoms = prop::sample::select(vec!["x1", "x2", "d1", "d2", "s1", "s3", "2", "-1/3", "d1*d2"]);
        prop::collection::vec(prop::collection::vec(atoms, 1..4), 1..4).prop_map(|ts| {
            let text = ts.iter().map(|t| t.join("*")).collect::<Vec<_>>().join(" + ");
            WeylOp::parse(&text, 2, 3).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn module_action_is_coherent(p in arb_op(), q in arb_op(), e in arb_op()) {
            let a = xy_sum();
            let m = LsModule::new(&a);
            let start = m.apply_op(&e, &m.unit());
            let lhs = m.apply_op(&(&p * &q), &start);
            let rhs = m.apply_op(&p, &m.apply_op(&q, &start));
            prop_assert!(m.equal(&lhs, &rhs));
            // order bound on denominators
            let r = m.apply_op(&p, &m.shifted_unit());
            prop_assert!(r.denominator().iter().all(|&d| d <= p.order()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn power_residual_matches_action(p in arb_op(), shift in prop::collection::vec(0u32..3, 3)) {
            let a = xy_sum();
            let m = LsModule::new(&a);
            let r = m.apply_op(&p, &m.monomial(&shift));
            // clear r's denominator on the left so the value is a polynomial
            let clear = (0..3).fold(MultiPoly::one(&coeff_context(2, 3)), |f, i| {
                (0..r.denominator()[i]).fold(f, |f, _| &f * &a.form_poly(i))
            });
            let q = p.left_mul_coeff(&clear);
            prop_assert!(m.power_residual(&q, &shift, r.numerator()).unwrap().is_zero());
            let off = r.numerator() + &MultiPoly::one(&coeff_context(2, 3));
            prop_assert!(!m.power_residual(&q, &shift, &off).unwrap().is_zero());
        }
    }
}

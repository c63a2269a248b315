//! Multivariate division and Buchberger's algorithm under the context lex order.

use std::sync::Arc;

use super::{same_ctx, Monomial, MultiPoly, VarContext};
use crate::error::PolyError;
use crate::rational::Rational;

/// A generator list sharing one context. `groebner` is set only when the list
/// was produced (or certified) by [`buchberger`].
#[derive(Debug, Clone, PartialEq)]
pub struct IdealBasis {
    ctx: Arc<VarContext>,
    gens: Vec<MultiPoly>,
    groebner: bool,
}

impl IdealBasis {
    /// Drops zero generators; panics if contexts differ.
    pub fn new(ctx: &Arc<VarContext>, gens: Vec<MultiPoly>) -> Self {
        for g in &gens {
            assert!(same_ctx(ctx, g.ctx()), "generator context mismatch");
        }
        let gens = gens.into_iter().filter(|g| !g.is_zero()).collect();
        IdealBasis { ctx: ctx.clone(), gens, groebner: false }
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn gens(&self) -> &[MultiPoly] {
        &self.gens
    }

    pub fn is_certified_groebner(&self) -> bool {
        self.groebner
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.gens.iter().filter_map(|g| g.leading_monomial()).collect()
    }

    /// Remainder of every S-polynomial `(i, j)`, `i < j`, divided by the list.
    pub fn s_pair_remainders(&self) -> Vec<(usize, usize, MultiPoly)> {
        let mut out = Vec::new();
        for i in 0..self.gens.len() {
            for j in i + 1..self.gens.len() {
                let sp = s_polynomial(&self.gens[i], &self.gens[j]);
                out.push((i, j, reduce_with_quotients(&sp, &self.gens).1));
            }
        }
        out
    }

    /// Buchberger's criterion on the list as given. On success the same
    /// generators, in the same order, are marked Groebner; otherwise the first
    /// pair with a nonzero remainder is returned.
    pub fn certify(&self) -> Result<IdealBasis, (usize, usize)> {
        match self.s_pair_remainders().into_iter().find(|(_, _, r)| !r.is_zero()) {
            Some((i, j, _)) => Err((i, j)),
            None => Ok(IdealBasis { groebner: true, ..self.clone() }),
        }
    }

    /// Appends generators; the result is no longer certified.
    pub fn extended(&self, extra: impl IntoIterator<Item = MultiPoly>) -> Self {
        let mut gens = self.gens.clone();
        gens.extend(extra);
        IdealBasis::new(&self.ctx, gens)
    }
}

/// Division with recorded quotients: `p = sum q_k g_k + r`.
///
/// Always reduces the greatest reducible term first, trying generators in
/// list order, so the output is a deterministic function of the input.
pub fn reduce_with_quotients(p: &MultiPoly, gens: &[MultiPoly]) -> (Vec<MultiPoly>, MultiPoly) {
    let ctx = p.ctx().clone();
    let leads: Vec<(Monomial, Rational)> = gens
        .iter()
        .map(|g| g.leading_term().expect("zero generator"))
        .collect();
    let mut quot: Vec<Vec<(Monomial, Rational)>> = vec![Vec::new(); gens.len()];
    let mut rem: Vec<(Monomial, Rational)> = Vec::new();
    let mut work = p.clone();
    loop {
        let mut hit = None;
        'scan: for (t, (m, _)) in work.terms().iter().enumerate() {
            for (k, (lm, _)) in leads.iter().enumerate() {
                if lm.divides(m) {
                    hit = Some((t, k));
                    break 'scan;
                }
            }
        }
        let Some((t, k)) = hit else {
            rem.extend(work.into_terms());
            break;
        };
        let terms = work.into_terms();
        rem.extend(terms[..t].iter().cloned());
        let tail = MultiPoly { ctx: ctx.clone(), terms: terms[t..].to_vec() };
        let (m, c) = &tail.terms()[0];
        let (lm, lc) = &leads[k];
        let q_m = lm.quotient_of(m).expect("divisibility checked");
        let q_c = c / lc;
        work = tail.sub_scaled(&gens[k], &q_m, &q_c);
        quot[k].push((q_m, q_c));
    }
    let quot = quot.into_iter().map(|ts| MultiPoly::from_terms(&ctx, ts)).collect();
    (quot, MultiPoly { ctx, terms: rem })
}

/// Remainder of `p` on division by the basis.
pub fn normal_form(p: &MultiPoly, basis: &IdealBasis) -> MultiPoly {
    assert!(same_ctx(p.ctx(), basis.ctx()), "context mismatch");
    reduce_with_quotients(p, basis.gens()).1
}

/// Monic S-polynomial of `f` and `g`.
pub fn s_polynomial(f: &MultiPoly, g: &MultiPoly) -> MultiPoly {
    let (mf, cf) = f.leading_term().expect("zero polynomial");
    let (mg, cg) = g.leading_term().expect("zero polynomial");
    let l = mf.lcm(&mg);
    let a = f.mul_term(&mf.quotient_of(&l).unwrap(), &cf.recip());
    let b = g.mul_term(&mg.quotient_of(&l).unwrap(), &cg.recip());
    &a - &b
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct BuchbergerStats {
    pub pairs_total: usize,
    pub pairs_skipped_coprime: usize,
    pub reductions_to_zero: usize,
    /// Nonzero S-polynomial remainders appended during the run.
    pub new_elements: usize,
}

/// Reduced Groebner basis, sorted by descending leading monomial.
pub fn buchberger(gens: &IdealBasis) -> IdealBasis {
    buchberger_with_stats(gens).0
}

pub fn buchberger_with_stats(input: &IdealBasis) -> (IdealBasis, BuchbergerStats) {
    let ctx = input.ctx().clone();
    let mut stats = BuchbergerStats::default();
    let mut basis: Vec<MultiPoly> = input.gens().iter().map(|g| g.monic()).collect();
    let mut pairs: Vec<(Monomial, usize, usize)> = Vec::new();
    let push_pairs = |pairs: &mut Vec<(Monomial, usize, usize)>, basis: &[MultiPoly], j: usize| {
        let lj = basis[j].leading_monomial().unwrap();
        for i in 0..j {
            let li = basis[i].leading_monomial().unwrap();
            pairs.push((li.lcm(&lj), i, j));
        }
    };
    for j in 0..basis.len() {
        push_pairs(&mut pairs, &basis, j);
    }
    while !pairs.is_empty() {
        // normal strategy: smallest lcm first, ties by index
        let pos = (0..pairs.len()).min_by(|&a, &b| pairs[a].cmp(&pairs[b])).unwrap();
        let (_, i, j) = pairs.swap_remove(pos);
        stats.pairs_total += 1;
        let (li, lj) = (basis[i].leading_monomial().unwrap(), basis[j].leading_monomial().unwrap());
        if li.coprime(&lj) {
            stats.pairs_skipped_coprime += 1;
            continue;
        }
        let s = s_polynomial(&basis[i], &basis[j]);
        let r = reduce_with_quotients(&s, &basis).1;
        if r.is_zero() {
            stats.reductions_to_zero += 1;
            continue;
        }
        stats.new_elements += 1;
        basis.push(r.monic());
        push_pairs(&mut pairs, &basis, basis.len() - 1);
    }

    // minimalise: drop generators whose leading monomial is a multiple of another's
    let leads: Vec<Monomial> = basis.iter().map(|g| g.leading_monomial().unwrap()).collect();
    let keep: Vec<usize> = (0..basis.len())
        .filter(|&i| {
            !(0..basis.len()).any(|j| {
                j != i && leads[j].divides(&leads[i]) && (leads[j] != leads[i] || j < i)
            })
        })
        .collect();
    let minimal: Vec<MultiPoly> = keep.iter().map(|&i| basis[i].clone()).collect();
    let mut reduced: Vec<MultiPoly> = (0..minimal.len())
        .map(|i| {
            let others: Vec<MultiPoly> = minimal
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, g)| g.clone())
                .collect();
            reduce_with_quotients(&minimal[i], &others).1.monic()
        })
        .collect();
    reduced.sort_by(|a, b| b.leading_monomial().cmp(&a.leading_monomial()));
    (IdealBasis { ctx, gens: reduced, groebner: true }, stats)
}

/// Result of an ideal membership query.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `p = sum cofactors[k] * gens[k]` when `member` holds.
    pub cofactors: Option<Vec<MultiPoly>>,
}

/// Membership via division. A nonzero remainder is only conclusive when the
/// basis is certified Groebner; otherwise `NotGroebner` is returned.
pub fn ideal_member(p: &MultiPoly, basis: &IdealBasis) -> Result<Membership, PolyError> {
    if !same_ctx(p.ctx(), basis.ctx()) {
        return Err(PolyError::ContextMismatch);
    }
    let (q, r) = reduce_with_quotients(p, basis.gens());
    if r.is_zero() {
        Ok(Membership { member: true, cofactors: Some(q) })
    } else if basis.is_certified_groebner() {
        Ok(Membership { member: false, cofactors: None })
    } else {
        Err(PolyError::NotGroebner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VarBlock;
    use proptest::prelude::*;

    fn ctx_xy() -> Arc<VarContext> {
        VarContext::new(vec![VarBlock { name: "v".into(), vars: vec!["x".into(), "y".into()] }]).unwrap()
    }

    fn int(k: i64) -> Rational {
        Rational::from_int(k)
    }

    #[test]
    fn leading_term_examples() {
        let ctx = ctx_xy();
        let five = MultiPoly::constant(&ctx, int(5));
        assert_eq!(five.leading_term().unwrap(), (Monomial::one(), int(5)));
        assert_eq!(MultiPoly::zero(&ctx).leading_term(), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn already_groebner_is_fixed() {
        let ctx = ctx_xy();
        let (x, y) = (MultiPoly::var(&ctx, 0), MultiPoly::var(&ctx, 1));
        let gb = buchberger(&IdealBasis::new(&ctx, vec![y.clone(), x.clone()]));
        assert_eq!(gb.gens(), &[x, y]);
    }

    #[test]
    fn hand_computed_s_polynomial_example() {
        // x^3 - x = x * (x^2 - 1), so the reduced basis is {x^2 - 1}.
        let ctx = ctx_xy();
        let x = MultiPoly::var(&ctx, 0);
        let one = MultiPoly::one(&ctx);
        let f = &(&x * &x) - &one;
        let g = &(&(&x * &x) * &x) - &x;
        let (gb, stats) = buchberger_with_stats(&IdealBasis::new(&ctx, vec![f.clone(), g]));
        assert_eq!(gb.gens(), &[f]);
        assert_eq!(stats.new_elements, 0);
    }

    #[test]
    fn membership_examples() {
        let ctx = ctx_xy();
        let (x, y) = (MultiPoly::var(&ctx, 0), MultiPoly::var(&ctx, 1));
        let g1 = &(&x * &x) + &y;
        let g2 = &(&x * &y) - &MultiPoly::one(&ctx);
        let gb = buchberger(&IdealBasis::new(&ctx, vec![g1.clone(), g2.clone()]));
        let prod = &g1 * &g2;
        let m = ideal_member(&prod, &gb).unwrap();
        assert!(m.member);
        let back = m
            .cofactors
            .unwrap()
            .iter()
            .zip(gb.gens())
            .fold(MultiPoly::zero(&ctx), |acc, (q, g)| acc + q * g);
        assert_eq!(back, prod);

        let xy = buchberger(&IdealBasis::new(&ctx, vec![x.clone(), y.clone()]));
        assert!(!ideal_member(&MultiPoly::one(&ctx), &xy).unwrap().member);
        // uncertified basis with nonzero remainder is not conclusive
        let raw = IdealBasis::new(&ctx, vec![x, y]);
        assert_eq!(ideal_member(&MultiPoly::one(&ctx), &raw), Err(PolyError::NotGroebner));
    }

    #[test]
    fn normal_form_fixed_points() {
        let ctx = ctx_xy();
        let (x, y) = (MultiPoly::var(&ctx, 0), MultiPoly::var(&ctx, 1));
        let basis = IdealBasis::new(&ctx, vec![&(&x * &x) - &y]);
        assert!(normal_form(&basis.gens()[0], &basis).is_zero());
        let p = &(&x * &y) + &y;
        assert_eq!(normal_form(&p, &basis), p);
    }

    fn poly3() -> impl Strategy<Value = Vec<((u16, u16, u16), i64)>> {
        prop::collection::vec(((0u16..3, 0u16..3, 0u16..3), -4i64..5), 1..5)
    }

    fn build(ctx: &Arc<VarContext>, ts: Vec<((u16, u16, u16), i64)>) -> MultiPoly {
        MultiPoly::from_terms(ctx, ts.into_iter().map(|((a, b, c), k)| (Monomial::from_slice(&[a, b, c]), int(k))))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn groebner_properties(a in poly3(), b in poly3(), c in poly3(), p in poly3()) {
            let ctx = VarContext::new(vec![VarContext::numbered("x", "x", 1, 3)]).unwrap();
            let gens: Vec<MultiPoly> = [a, b].into_iter().map(|t| build(&ctx, t)).filter(|g| !g.is_zero()).collect();
            prop_assume!(!gens.is_empty());
            let gb = buchberger(&IdealBasis::new(&ctx, gens.clone()));
            // S-pairs of the output reduce to zero
            for i in 0..gb.gens().len() {
                for j in i + 1..gb.gens().len() {
                    let s = s_polynomial(&gb.gens()[i], &gb.gens()[j]);
                    prop_assert!(normal_form(&s, &gb).is_zero());
                }
            }
            // original generators lie in the ideal
            for g in &gens {
                prop_assert!(ideal_member(g, &gb).unwrap().member);
            }
            let p = build(&ctx, p);
            let nf = normal_form(&p, &gb);
            prop_assert_eq!(normal_form(&nf, &gb), nf.clone());
            // determinism
            prop_assert_eq!(buchberger(&IdealBasis::new(&ctx, gens.clone())), gb.clone());
            // cofactor soundness on a constructed member
            let c = build(&ctx, c);
            let member = &(&c * &gens[0]) + &p.mul_poly(&gens[gens.len() - 1]);
            let m = ideal_member(&member, &gb).unwrap();
            prop_assert!(m.member);
            let back = m.cofactors.unwrap().iter().zip(gb.gens())
                .fold(MultiPoly::zero(&ctx), |acc, (q, g)| acc + q * g);
            prop_assert_eq!(back, member);
        }
    }
}

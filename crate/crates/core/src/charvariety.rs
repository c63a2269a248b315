//! The diesis-symbol ideal of `l^s` for `p = n + 1` forms, its Groebner
//! structure, annihilator membership by symbol lifting, and the pieces of
//! the characteristic variety over `H = 0` and over `s = 0`.
//!
//! Symbols live in `[s1..s_{n+1}, xi1..xin, l1..ln]` where `l_k` are the
//! first `n` forms used as coordinates and `xi_k` their conjugates.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arrangement::{subsets, Arrangement, ConstField};
use crate::error::CharVarError;
use crate::linalg::{self, Matrix};
use crate::poly::{buchberger, buchberger_with_stats, ideal_member, normal_form, reduce_with_quotients, BuchbergerStats, IdealBasis, Monomial, MultiPoly, VarContext};
use crate::rational::Rational;
use crate::weyl::{coeff_context, sharp_degree, sharp_symbol, symbol_context, WeylOp};

/// Variable context `[s, xi, l]` for dimension `n`.
pub fn l_adapted_context(n: usize) -> Arc<VarContext> {
    VarContext::new(vec![
        VarContext::numbered("s", "s", 1, n + 1),
        VarContext::numbered("xi", "xi", 1, n),
        VarContext::numbered("l", "l", 1, n),
    ])
    .expect("small context")
}

#[derive(Debug, Clone)]
pub struct SymbolIdeal {
    arr: Arrangement,
    ctx: Arc<VarContext>,
    /// rows: first `n` forms
    coords: Matrix,
    inv: Matrix,
    /// `σ♯(Ẽ)`
    pub euler: MultiPoly,
    /// `σ♯(Ũ_{i,j})`, `2 <= i < j <= n+1`, labels 1-based
    pub generators: Vec<((usize, usize), MultiPoly)>,
    /// generators after eliminating `s_1` with `σ♯(Ẽ)`
    pub reduced: Vec<MultiPoly>,
}

impl SymbolIdeal {
    pub fn n(&self) -> usize {
        self.arr.n()
    }

    pub fn ctx(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arr
    }

    fn s(&self, i: usize) -> MultiPoly {
        MultiPoly::var(&self.ctx, i)
    }

    fn xi_off(&self) -> usize {
        self.n() + 1
    }

    fn l_off(&self) -> usize {
        2 * self.n() + 1
    }

    /// Form `i` (0-based) as a linear polynomial in the coordinates.
    pub fn form(&self, i: usize) -> MultiPoly {
        let n = self.n();
        // coefficients of l_i against the first n forms
        let c = linalg::mat_vec(&linalg::transpose(&self.inv), self.arr.form(i).coeffs());
        MultiPoly::linear(&self.ctx, 2 * n + 1, &c)
    }

    /// Rewrites a polynomial of `symbol_context(n, n+1)` in these coordinates.
    pub fn from_symbol(&self, f: &MultiPoly) -> MultiPoly {
        let n = self.n();
        let mut images = Vec::with_capacity(3 * n + 1);
        for r in 0..n {
            images.push(MultiPoly::linear(&self.ctx, self.l_off(), &self.inv[r]));
        }
        for v in 0..n {
            let col: Vec<Rational> = (0..n).map(|k| self.coords[k][v].clone()).collect();
            images.push(MultiPoly::linear(&self.ctx, self.xi_off(), &col));
        }
        for i in 0..=n {
            images.push(self.s(i));
        }
        f.substitute(&images, &self.ctx)
    }

    /// Inverse of [`from_symbol`](Self::from_symbol).
    pub fn to_symbol(&self, f: &MultiPoly) -> MultiPoly {
        let n = self.n();
        let sctx = symbol_context(n, n + 1);
        let mut images = Vec::with_capacity(3 * n + 1);
        for i in 0..=n {
            images.push(MultiPoly::var(&sctx, 2 * n + i));
        }
        for k in 0..n {
            let col: Vec<Rational> = (0..n).map(|v| self.inv[v][k].clone()).collect();
            images.push(MultiPoly::linear(&sctx, n, &col));
        }
        for k in 0..n {
            images.push(MultiPoly::linear(&sctx, 0, &self.coords[k]));
        }
        f.substitute(&images, &sctx)
    }

    /// `σ♯` of an operator, in these coordinates.
    pub fn symbol_of(&self, op: &WeylOp) -> MultiPoly {
        match sharp_symbol(op) {
            Ok(f) => self.from_symbol(&f),
            Err(_) => MultiPoly::zero(&self.ctx),
        }
    }

    /// `σ(U)`, the ξ-linear symbol of a constant field.
    pub fn field_symbol(&self, u: &ConstField) -> MultiPoly {
        let n = self.n();
        self.from_symbol(&u.symbol(&symbol_context(n, n + 1), n))
    }

    /// `σ♯(Ũ_{i,j})` for any ordered pair, 0-based.
    pub fn pair_symbol(&self, i: usize, j: usize) -> MultiPoly {
        self.symbol_of(&self.arr.u_tilde_pair(i, j))
    }

    /// `σ♯(Ẽ)` together with the `σ♯(Ũ_{i,j})`, as a certified basis of J.
    pub fn full_basis(&self) -> Result<IdealBasis, CharVarError> {
        let mut gens = vec![self.euler.clone()];
        gens.extend(self.generators.iter().map(|(_, g)| g.clone()));
        IdealBasis::new(&self.ctx, gens)
            .certify()
            .map_err(|(a, b)| CharVarError::CheckFailed(format!("S-pair ({a}, {b}) of J does not reduce to zero")))
    }

    pub fn reduced_basis(&self) -> IdealBasis {
        IdealBasis::new(&self.ctx, self.reduced.clone())
    }

    /// `σ♯`-weight: total degree in `s` and `xi`.
    fn weight(&self, m: &Monomial) -> u32 {
        (0..self.l_off()).map(|v| m.get(v) as u32).sum()
    }
}

fn require_circuit(arr: &Arrangement) -> Result<(), CharVarError> {
    arr.require_generic()?;
    if arr.p() != arr.n() + 1 {
        return Err(CharVarError::WrongP { n: arr.n(), p: arr.p() });
    }
    Ok(())
}

pub fn symbol_ideal(arr: &Arrangement) -> Result<SymbolIdeal, CharVarError> {
    require_circuit(arr)?;
    let n = arr.n();
    let coords = arr.coordinate_matrix();
    let inv = linalg::inverse(&coords).expect("generic");
    let ctx = l_adapted_context(n);
    let mut s = SymbolIdeal {
        arr: arr.clone(),
        ctx: ctx.clone(),
        coords,
        inv,
        euler: MultiPoly::zero(&ctx),
        generators: Vec::new(),
        reduced: Vec::new(),
    };
    s.euler = s.symbol_of(&arr.euler_tilde());
    for i in 1..=n {
        for j in i + 1..=n {
            let g = s.pair_symbol(i, j);
            s.generators.push(((i + 1, j + 1), g));
        }
    }
    // σ♯(Ẽ) is monic up to sign in s_1, its leading variable
    let e = IdealBasis::new(&ctx, vec![s.euler.clone()]);
    s.reduced = s.generators.iter().map(|(_, g)| normal_form(g, &e)).collect();
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeadingCheck {
    pub pair: (usize, usize),
    pub found: String,
    pub expected: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SPairCheck {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub reduces_to_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroebnerReport {
    pub n: usize,
    pub only_reduced_variables: bool,
    pub leading: Vec<LeadingCheck>,
    pub buchberger: BuchbergerStats,
    pub adds_nothing: bool,
    pub s_pairs: Vec<SPairCheck>,
    pub syzygies: Vec<IdentityCheck>,
    pub passed: bool,
}

impl GroebnerReport {
    pub fn ensure(&self) -> Result<(), CharVarError> {
        if self.passed {
            return Ok(());
        }
        if let Some(c) = self.leading.iter().find(|c| !c.ok) {
            return Err(CharVarError::CheckFailed(format!("leading monomial of {:?}: {} != {}", c.pair, c.found, c.expected)));
        }
        if let Some(c) = self.s_pairs.iter().find(|c| !c.reduces_to_zero) {
            return Err(CharVarError::CheckFailed(format!("S-pair {:?} x {:?} does not reduce to zero", c.first, c.second)));
        }
        if let Some(c) = self.syzygies.iter().find(|c| !c.holds) {
            return Err(CharVarError::CheckFailed(format!("syzygy {} fails", c.name)));
        }
        Err(CharVarError::CheckFailed("Buchberger added elements or a variable outside s2.., xi, l appears".into()))
    }
}

pub fn groebner_check(s: &SymbolIdeal) -> GroebnerReport {
    let n = s.n();
    let ctx = s.ctx();
    let only_reduced_variables = s.reduced.iter().all(|g| g.degree_in(0..1) == 0);
    // l_j s_i for j <= n, l_1 s_i for j = n + 1
    let leading: Vec<LeadingCheck> = s
        .generators
        .iter()
        .zip(&s.reduced)
        .map(|(((i, j), _), g)| {
            let l = if *j <= n { *j } else { 1 };
            let expected = Monomial::var(s.l_off() + l - 1).mul(&Monomial::var(i - 1));
            let found = g.leading_monomial().unwrap_or_else(Monomial::one);
            LeadingCheck { pair: (*i, *j), found: found.fmt_with(ctx), expected: expected.fmt_with(ctx), ok: found == expected }
        })
        .collect();
    let basis = s.reduced_basis();
    let (gb, buchberger) = buchberger_with_stats(&basis);
    let mut before = basis.leading_monomials();
    before.sort();
    let mut after = gb.leading_monomials();
    after.sort();
    let adds_nothing = buchberger.new_elements == 0 && before == after;
    let labels: Vec<(usize, usize)> = s.generators.iter().map(|(k, _)| *k).collect();
    let s_pairs = basis
        .s_pair_remainders()
        .into_iter()
        .map(|(a, b, r)| SPairCheck { first: labels[a], second: labels[b], reduces_to_zero: r.is_zero() })
        .collect::<Vec<_>>();
    let syzygies = symbol_syzygies(s);
    let passed = only_reduced_variables
        && leading.iter().all(|c| c.ok)
        && adds_nothing
        && s_pairs.iter().all(|c| c.reduces_to_zero)
        && syzygies.iter().all(|c| c.holds);
    GroebnerReport { n, only_reduced_variables, leading, buchberger, adds_nothing, s_pairs, syzygies, passed }
}

/// The three S-pair families as exact polynomial identities, indices
/// `2 <= . <= n+1` (1-based in the names).
pub fn symbol_syzygies(s: &SymbolIdeal) -> Vec<IdentityCheck> {
    let n = s.n();
    let arr = &s.arr;
    let sym = |i: usize, j: usize| s.pair_symbol(i, j);
    let sig = |i: usize, j: usize| s.field_symbol(&arr.u_pair(i, j));
    let val = |i: usize, j: usize| {
        let u = arr.u_pair(i, j);
        MultiPoly::constant(s.ctx(), u.apply(arr.form(j)))
    };
    let l = |i: usize| s.form(i);
    let sv = |i: usize| s.s(i);
    let mut out = Vec::new();
    let idx: Vec<usize> = (1..=n).collect();
    for &i in &idx {
        for &j in idx.iter().filter(|&&j| j > i) {
            for &k in idx.iter().filter(|&&k| k > j) {
                // l_k σ♯Ũ_ij − l_j σ♯Ũ_ik = U_ij(l_j) l_i σ♯Ũ_jk
                let lhs = &(&l(k) * &sym(i, j)) - &(&l(j) * &sym(i, k));
                let rhs = &(&val(i, j) * &l(i)) * &sym(j, k);
                out.push(IdentityCheck { name: format!("shared_first_index({},{},{})", i + 1, j + 1, k + 1), holds: lhs == rhs });
                // s_j σ♯Ũ_ik − s_i σ♯Ũ_jk
                //   = l_k σ(U_jk) σ♯Ũ_ij − U_jk(l_k) s_k σ♯Ũ_ij − l_i σ(U_ij) σ♯Ũ_jk
                let lhs = &(&sv(j) * &sym(i, k)) - &(&sv(i) * &sym(j, k));
                let rhs = &(&(&(&l(k) * &sig(j, k)) * &sym(i, j)) - &(&(&val(j, k) * &sv(k)) * &sym(i, j)))
                    - &(&(&l(i) * &sig(i, j)) * &sym(j, k));
                out.push(IdentityCheck { name: format!("shared_last_index({},{},{})", i + 1, j + 1, k + 1), holds: lhs == rhs });
            }
        }
    }
    let pairs: Vec<(usize, usize)> =
        idx.iter().flat_map(|&i| idx.iter().filter(move |&&j| j > i).map(move |&j| (i, j))).collect();
    for &(i, j) in &pairs {
        for &(k, m) in &pairs {
            if k == i || m == j || (k, m) <= (i, j) {
                continue;
            }
            let head = |a: usize, b: usize| &(&(&l(a) * &l(b)) * &sig(a, b)) - &(&(&val(a, b) * &l(a)) * &sv(b));
            let lhs = &(&(&l(j) * &sv(i)) * &sym(k, m)) - &(&(&l(m) * &sv(k)) * &sym(i, j));
            let rhs = &(&head(i, j) * &sym(k, m)) - &(&head(k, m) * &sym(i, j));
            out.push(IdentityCheck {
                name: format!("disjoint_pairs({},{};{},{})", i + 1, j + 1, k + 1, m + 1),
                holds: lhs == rhs,
            });
        }
    }
    out
}

/// Outcome of annihilator membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnMembership {
    pub member: bool,
    /// generator labels, `E~` then `U~i,j`
    pub labels: Vec<String>,
    /// `P = sum cofactors[k] * generator[k]` when `member` holds
    pub cofactors: Option<Vec<WeylOp>>,
    /// symbol-division rounds performed
    pub rounds: usize,
}

/// Lifts `x^a xi^g s^b` to `x^a s^b ∂^g`.
fn lift_symbol(f: &MultiPoly, n: usize, p: usize) -> WeylOp {
    let cctx = coeff_context(n, p);
    let mut parts: BTreeMap<Monomial, Vec<(Monomial, Rational)>> = BTreeMap::new();
    for (m, c) in f.terms() {
        let mut g = Monomial::one();
        let mut rest = Monomial::one();
        for v in 0..n {
            g.set(v, m.get(n + v));
            rest.set(v, m.get(v));
        }
        for i in 0..p {
            rest.set(n + i, m.get(2 * n + i));
        }
        parts.entry(g).or_default().push((rest, c.clone()));
    }
    let polys: Vec<(Monomial, MultiPoly)> = parts.into_iter().map(|(g, ts)| (g, MultiPoly::from_terms(&cctx, ts))).collect();
    WeylOp::from_parts(n, p, polys.iter().map(|(g, f)| (*g, f)))
}

/// Membership in the left ideal generated by `Ẽ` and the `Ũ_{i,j}`,
/// `2 <= i < j <= n+1`, by division on the diesis filtration.
pub fn ann_membership(op: &WeylOp, arr: &Arrangement) -> Result<AnnMembership, CharVarError> {
    let s = symbol_ideal(arr)?;
    let (n, p) = (arr.n(), arr.p());
    let gens = arr.ann_generators()?;
    let labels: Vec<String> = gens.iter().map(|(l, _)| l.clone()).collect();
    let basis = s.full_basis()?;
    let mut cof = vec![WeylOp::zero(n, p); gens.len()];
    let mut rest = op.clone();
    let mut rounds = 0;
    while let Some(w) = sharp_degree(&rest) {
        rounds += 1;
        let sym = s.symbol_of(&rest);
        let m = ideal_member(&sym, &basis).map_err(|e| CharVarError::CheckFailed(e.to_string()))?;
        let Some(q) = m.cofactors else {
            return Ok(AnnMembership { member: false, labels, cofactors: None, rounds });
        };
        if w == 0 {
            return Err(CharVarError::CheckFailed("weight-zero symbol reported in J".into()));
        }
        for (k, qk) in q.iter().enumerate() {
            let top = MultiPoly::from_terms(s.ctx(), qk.terms().iter().filter(|(m, _)| s.weight(m) == w - 1).cloned());
            if top.is_zero() {
                continue;
            }
            let lifted = lift_symbol(&s.to_symbol(&top), n, p);
            rest = &rest - &(&lifted * &gens[k].1);
            cof[k] = &cof[k] + &lifted;
        }
        if sharp_degree(&rest).is_some_and(|w2| w2 >= w) {
            return Err(CharVarError::CheckFailed(format!("diesis degree did not drop below {w}")));
        }
    }
    let back = cof.iter().zip(&gens).fold(WeylOp::zero(n, p), |a, (q, (_, g))| &a + &(q * g));
    if back != *op {
        return Err(CharVarError::CheckFailed("cofactors do not reassemble the operator".into()));
    }
    Ok(AnnMembership { member: true, labels, cofactors: Some(cof), rounds })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub multiplier: String,
    pub samples: usize,
    pub skipped_in_ideal: usize,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// For seeded random `u` with nonzero normal form modulo J', checks that
/// `l_2 u` has nonzero normal form too.
pub fn regularity_check(s: &SymbolIdeal, samples: usize, seed: u64) -> Result<RegularityReport, CharVarError> {
    let n = s.n();
    let ctx = s.ctx();
    let basis = s.reduced_basis().certify().map_err(|(a, b)| CharVarError::CheckFailed(format!("J' S-pair ({a}, {b})")))?;
    let l2 = MultiPoly::var(ctx, s.l_off() + 1);
    let vars: Vec<usize> = (1..ctx.nvars()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut tested, mut skipped, mut failures) = (0, 0, Vec::new());
    while tested < samples {
        let terms = rng.gen_range(1..=5);
        let u = MultiPoly::from_terms(
            ctx,
            (0..terms).map(|_| {
                let mut m = Monomial::one();
                for _ in 0..rng.gen_range(0..=4) {
                    let v = vars[rng.gen_range(0..vars.len())];
                    m.set(v, m.get(v) + 1);
                }
                let c = loop {
                    let c: i64 = rng.gen_range(-5..=5);
                    if c != 0 {
                        break c;
                    }
                };
                (m, Rational::from_int(c))
            }),
        );
        if normal_form(&u, &basis).is_zero() {
            skipped += 1;
            continue;
        }
        tested += 1;
        if normal_form(&(&l2 * &u), &basis).is_zero() {
            failures.push(u.to_string());
        }
    }
    let _ = n;
    Ok(RegularityReport { multiplier: "l2".into(), samples: tested, skipped_in_ideal: skipped, passed: failures.is_empty(), failures })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DichotomyCheck {
    /// 1-based: `l_j s_i` modulo `J + (l_i)`
    pub i: usize,
    pub j: usize,
    pub congruent_to_symbol: bool,
    pub in_ideal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentCheck {
    /// `s{i}=0` or `central`
    pub name: String,
    pub generators: Vec<String>,
    pub contains_j_and_h: bool,
    /// 0-based positions in the slope list whose form lies in the ideal
    pub slope_forms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlopeReport {
    pub n: usize,
    /// integer coefficient vectors in `s`
    pub slopes: Vec<Vec<i64>>,
    pub dichotomy: Vec<DichotomyCheck>,
    pub components: Vec<ComponentCheck>,
    pub passed: bool,
}

impl SlopeReport {
    pub fn ensure(&self) -> Result<(), CharVarError> {
        if let Some(d) = self.dichotomy.iter().find(|d| !(d.congruent_to_symbol && d.in_ideal)) {
            return Err(CharVarError::CheckFailed(format!("dichotomy l{} s{} modulo l{}", d.j, d.i, d.i)));
        }
        if let Some(c) = self.components.iter().find(|c| !c.contains_j_and_h || c.slope_forms.len() != 1) {
            return Err(CharVarError::CheckFailed(format!("component {}", c.name)));
        }
        if !self.passed {
            return Err(CharVarError::CheckFailed("slope count".into()));
        }
        Ok(())
    }
}

fn contains_all(basis: &IdealBasis, polys: &[MultiPoly]) -> bool {
    polys.iter().all(|f| normal_form(f, basis).is_zero())
}

pub fn slopes_report(arr: &Arrangement) -> Result<SlopeReport, CharVarError> {
    let s = symbol_ideal(arr)?;
    let n = arr.n();
    let p = n + 1;
    let ctx = s.ctx().clone();
    let sigma = (0..p).fold(MultiPoly::zero(&ctx), |a, i| &a + &s.s(i));
    let h = (0..p).fold(MultiPoly::one(&ctx), |a, i| &a * &s.form(i));
    let j_gens: Vec<MultiPoly> = std::iter::once(s.euler.clone()).chain(s.generators.iter().map(|(_, g)| g.clone())).collect();
    let mut j_and_h = j_gens.clone();
    j_and_h.push(h);

    let mut dichotomy = Vec::new();
    for i in 0..p {
        let li = s.form(i);
        let gb = buchberger(&IdealBasis::new(&ctx, j_gens.iter().cloned().chain([li.clone()]).collect()));
        for j in (0..p).filter(|&j| j != i) {
            let target = &s.form(j) * &s.s(i);
            let (_, r) = reduce_with_quotients(&(&target + &s.pair_symbol(i, j)), std::slice::from_ref(&li));
            dichotomy.push(DichotomyCheck {
                i: i + 1,
                j: j + 1,
                congruent_to_symbol: r.is_zero(),
                in_ideal: normal_form(&target, &gb).is_zero(),
            });
        }
    }

    let mut slopes: Vec<Vec<i64>> = (0..p).map(|i| (0..p).map(|k| i64::from(k == i)).collect()).collect();
    slopes.push(vec![1; p]);
    let slope_polys: Vec<MultiPoly> = slopes
        .iter()
        .map(|v| v.iter().enumerate().fold(MultiPoly::zero(&ctx), |a, (k, &c)| &a + &s.s(k).scale(&Rational::from_int(c))))
        .collect();

    let mut ideals: Vec<(String, Vec<MultiPoly>)> = Vec::new();
    let euler_sym = s.symbol_of(&arr.euler());
    for i in 0..p {
        // W♯ of the restriction to H_i, times the line of the conjugate of l_i
        let mut g = vec![s.form(i), s.s(i), (0..p).filter(|&k| k != i).fold(euler_sym.clone(), |a, k| &a - &s.s(k))];
        for a in (0..p).filter(|&a| a != i) {
            for b in (0..p).filter(|&b| b != i && b != a) {
                g.push(s.pair_symbol(a, b));
            }
        }
        ideals.push((format!("s{}=0", i + 1), g));
    }
    let mut central: Vec<MultiPoly> = (0..n).map(|k| s.form(k)).collect();
    central.push(sigma);
    ideals.push(("central".into(), central));

    let components: Vec<ComponentCheck> = ideals
        .into_iter()
        .map(|(name, g)| {
            let gb = buchberger(&IdealBasis::new(&ctx, g.clone()));
            ComponentCheck {
                name,
                generators: g.iter().map(|f| f.to_string()).collect(),
                contains_j_and_h: contains_all(&gb, &j_and_h),
                slope_forms: slope_polys.iter().enumerate().filter(|(_, f)| normal_form(f, &gb).is_zero()).map(|(k, _)| k).collect(),
            }
        })
        .collect();
    let passed = slopes.len() == n + 2
        && dichotomy.iter().all(|d| d.congruent_to_symbol && d.in_ideal)
        && components.iter().all(|c| c.contains_j_and_h && c.slope_forms.len() == 1);
    Ok(SlopeReport { n, slopes, dichotomy, components, passed })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumCheck {
    /// `zero-section`, `origin`, or the 1-based indices of the hyperplanes cut
    pub stratum: String,
    pub codimension: usize,
    pub contains_symbols: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConormalReport {
    pub n: usize,
    /// generators of the symbol ideal at `s = 0`
    pub equations: Vec<String>,
    pub strata: Vec<StratumCheck>,
    pub passed: bool,
}

impl ConormalReport {
    pub fn ensure(&self) -> Result<(), CharVarError> {
        match self.strata.iter().find(|c| !c.contains_symbols) {
            Some(c) => Err(CharVarError::CheckFailed(format!("stratum {}", c.stratum))),
            None => Ok(()),
        }
    }
}

pub fn conormal_check(arr: &Arrangement) -> Result<ConormalReport, CharVarError> {
    let s = symbol_ideal(arr)?;
    let n = arr.n();
    let p = n + 1;
    let ctx = s.ctx().clone();
    // s = 0: substitute zero for the s block
    let kill_s = |f: &MultiPoly| {
        MultiPoly::from_terms(&ctx, f.terms().iter().filter(|(m, _)| (0..p).all(|i| m.get(i) == 0)).cloned())
    };
    let mut eqs = vec![kill_s(&s.euler)];
    for i in 0..p {
        for j in (0..p).filter(|&j| j != i) {
            eqs.push(kill_s(&s.pair_symbol(i, j)));
        }
    }
    let mut strata = Vec::new();
    let xi: Vec<MultiPoly> = (0..n).map(|k| MultiPoly::var(&ctx, s.xi_off() + k)).collect();
    let ls: Vec<MultiPoly> = (0..n).map(|k| MultiPoly::var(&ctx, s.l_off() + k)).collect();
    let check = |gens: Vec<MultiPoly>| contains_all(&buchberger(&IdealBasis::new(&ctx, gens)), &eqs);
    strata.push(StratumCheck { stratum: "zero-section".into(), codimension: 0, contains_symbols: check(xi) });
    for k in 1..n {
        for cut in subsets(p, k) {
            let rest: Vec<usize> = (0..p).filter(|i| !cut.contains(i)).collect();
            let mut gens: Vec<MultiPoly> = cut.iter().map(|&i| s.form(i)).collect();
            for (a, &u) in rest.iter().enumerate() {
                for &v in &rest[a + 1..] {
                    gens.push(s.field_symbol(&arr.u_pair(u, v)));
                }
            }
            let label = cut.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
            strata.push(StratumCheck { stratum: format!("H{{{label}}}"), codimension: k, contains_symbols: check(gens) });
        }
    }
    strata.push(StratumCheck { stratum: "origin".into(), codimension: n, contains_symbols: check(ls) });
    let passed = strata.iter().all(|c| c.contains_symbols);
    Ok(ConormalReport { n, equations: eqs.iter().map(|f| f.to_string()).collect(), strata, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy_sum() -> Arrangement {
        Arrangement::from_ints(2, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap()
    }

    #[test]
    fn euler_symbol_and_single_generator() {
        let s = symbol_ideal(&xy_sum()).unwrap();
        assert_eq!(s.euler.to_string(), "-s1 - s2 - s3 + xi1*l1 + xi2*l2");
        assert_eq!(s.generators.len(), 1);
        assert_eq!(s.generators[0].0, (2, 3));
        // the leading monomial for j = n + 1 is l1 s_i
        assert_eq!(s.reduced[0].leading_monomial().unwrap().fmt_with(s.ctx()), "s2*l1");
        let wrong = Arrangement::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        assert!(matches!(symbol_ideal(&wrong), Err(CharVarError::WrongP { n: 2, p: 2 })));
    }

    #[test]
    fn coordinate_changes_are_inverse() {
        let a = Arrangement::random_generic(3, 4, 2, 3);
        let s = symbol_ideal(&a).unwrap();
        for (_, g) in &s.generators {
            assert_eq!(&s.from_symbol(&s.to_symbol(g)), g);
        }
    }

    #[test]
    fn groebner_small_cases() {
        let r = groebner_check(&symbol_ideal(&xy_sum()).unwrap());
        assert!(r.passed, "{r:?}");
        let r = groebner_check(&symbol_ideal(&Arrangement::random_generic(3, 4, 11, 3)).unwrap());
        r.ensure().unwrap();
        let found: Vec<&str> = r.leading.iter().map(|c| c.found.as_str()).collect();
        assert_eq!(found, ["s2*l3", "s2*l1", "s3*l1"]);
    }

    #[test]
    fn membership_examples() {
        let a = xy_sum();
        let m = ann_membership(&a.u_tilde_pair(0, 1), &a).unwrap();
        assert!(m.member);
        let m = ann_membership(&WeylOp::d(2, 3, 0), &a).unwrap();
        assert!(!m.member);
        let q1 = WeylOp::parse("x1*d2 + s1", 2, 3).unwrap();
        let q2 = WeylOp::parse("d1^2 - 3*s2*x2", 2, 3).unwrap();
        let p = &(&q1 * &a.euler_tilde()) + &(&q2 * &a.u_tilde_pair(1, 2));
        assert!(ann_membership(&p, &a).unwrap().member);
    }

    #[test]
    fn regularity_holds() {
        let r = regularity_check(&symbol_ideal(&xy_sum()).unwrap(), 30, 4).unwrap();
        assert!(r.passed && r.samples == 30, "{r:?}");
    }

    #[test]
    fn slopes_for_the_triangle() {
        let r = slopes_report(&xy_sum()).unwrap();
        r.ensure().unwrap();
        assert_eq!(r.slopes, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 1]]);
        assert_eq!(r.components.last().unwrap().slope_forms, vec![3]);
    }

    #[test]
    fn conormals_for_the_triangle() {
        let r = conormal_check(&xy_sum()).unwrap();
        r.ensure().unwrap();
        assert_eq!(r.strata.len(), 5);
        assert_eq!(r.strata[1].stratum, "H{1}");
    }
}

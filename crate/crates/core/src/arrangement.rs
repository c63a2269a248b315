//! Central arrangements of rational linear forms, their dual constant fields
//! and the annihilating operators built from them.
//!
//! Indices are 0-based in the API; the JSON formats and all user-facing
//! witnesses are 1-based.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ArrangementError;
use crate::linalg::{self, Matrix};
use crate::poly::{MultiPoly, VarContext};
use crate::rational::Rational;
use crate::weyl::{coeff_context, WeylOp};

/// `sum coeffs[k] x_{k+1}`; never the zero vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearForm(Vec<Rational>);

impl LinearForm {
    pub fn new(coeffs: Vec<Rational>) -> Option<Self> {
        (!coeffs.iter().all(Rational::is_zero)).then_some(LinearForm(coeffs))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }
}

/// Constant vector field `sum a_k ∂_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstField(pub Vec<Rational>);

impl ConstField {
    /// Value on a linear form, i.e. the dot product.
    pub fn apply(&self, l: &LinearForm) -> Rational {
        self.0.iter().zip(l.coeffs()).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn to_op(&self, p: usize) -> WeylOp {
        let n = self.0.len();
        let mut acc = WeylOp::zero(n, p);
        for (k, a) in self.0.iter().enumerate() {
            acc = &acc + &WeylOp::d(n, p, k).scale(a);
        }
        acc
    }

    /// Principal symbol `sum a_k xi_k` in `ctx`, whose variables `xi_off..` are the ξ's.
    pub fn symbol(&self, ctx: &Arc<VarContext>, xi_off: usize) -> MultiPoly {
        MultiPoly::linear(ctx, xi_off, &self.0)
    }
}

/// Pass/fail of the genericity test, with evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenericityCertificate {
    pub generic: bool,
    /// 1-based dependent subset on failure.
    pub witness: Option<Vec<usize>>,
    /// 1-based n-subsets and their determinants, recorded on success.
    pub determinants: Vec<(Vec<usize>, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    n: usize,
    forms: Vec<LinearForm>,
}

/// On-disk form `{"n": 2, "forms": [["1","0"], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrangementFile {
    pub n: usize,
    pub forms: Vec<Vec<Rational>>,
}

/// All k-subsets of `0..m` in lex order.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

fn rank(rows: &Matrix) -> usize {
    let mut a = rows.clone();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        let inv = a[r][c].recip();
        for i in r + 1..a.len() {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..cols {
                let t = &f * &a[r][j];
                a[i][j] -= &t;
            }
        }
        r += 1;
    }
    r
}

impl Arrangement {
    pub fn new(n: usize, forms: Vec<Vec<Rational>>) -> Result<Self, ArrangementError> {
        let mut out = Vec::with_capacity(forms.len());
        for (i, f) in forms.into_iter().enumerate() {
            if f.len() != n {
                return Err(ArrangementError::BadForm(i + 1));
            }
            out.push(LinearForm::new(f).ok_or(ArrangementError::BadForm(i + 1))?);
        }
        if n == 0 || out.is_empty() {
            return Err(ArrangementError::BadIndices("need n >= 1 and at least one form".into()));
        }
        Ok(Arrangement { n, forms: out })
    }

    pub fn from_ints(n: usize, forms: &[&[i64]]) -> Result<Self, ArrangementError> {
        Self::new(n, forms.iter().map(|f| f.iter().map(|&k| Rational::from_int(k)).collect()).collect())
    }

    pub fn from_file(f: ArrangementFile) -> Result<Self, ArrangementError> {
        Self::new(f.n, f.forms)
    }

    pub fn to_file(&self) -> ArrangementFile {
        ArrangementFile { n: self.n, forms: self.forms.iter().map(|l| l.0.clone()).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[LinearForm] {
        &self.forms
    }

    pub fn form(&self, i: usize) -> &LinearForm {
        &self.forms[i]
    }

    /// Rescales form `i` by `factors[i]` (all nonzero).
    pub fn rescaled(&self, factors: &[Rational]) -> Self {
        assert_eq!(factors.len(), self.p());
        let forms = self
            .forms
            .iter()
            .zip(factors)
            .map(|(l, c)| {
                assert!(!c.is_zero(), "zero rescaling factor");
                LinearForm(l.0.iter().map(|a| a * c).collect())
            })
            .collect();
        Arrangement { n: self.n, forms }
    }

    /// Every n-subset of forms has rank n (p >= n); the forms are
    /// independent (p < n). Forms are also pairwise non-proportional.
    pub fn check_generic(&self) -> GenericityCertificate {
        let (n, p) = (self.n, self.p());
        let fail = |w: Vec<usize>| GenericityCertificate {
            generic: false,
            witness: Some(w.into_iter().map(|i| i + 1).collect()),
            determinants: Vec::new(),
        };
        for pair in subsets(p, 2) {
            let rows: Matrix = pair.iter().map(|&i| self.forms[i].0.clone()).collect();
            if rank(&rows) < 2 {
                return fail(pair);
            }
        }
        if p < n {
            let rows: Matrix = self.forms.iter().map(|l| l.0.clone()).collect();
            if rank(&rows) < p {
                return fail((0..p).collect());
            }
            return GenericityCertificate { generic: true, witness: None, determinants: Vec::new() };
        }
        let mut dets = Vec::new();
        for sub in subsets(p, n) {
            let m: Matrix = sub.iter().map(|&i| self.forms[i].0.clone()).collect();
            let d = linalg::det(&m);
            if d.is_zero() {
                return fail(sub);
            }
            dets.push((sub.iter().map(|i| i + 1).collect(), d));
        }
        GenericityCertificate { generic: true, witness: None, determinants: dets }
    }

    pub fn require_generic(&self) -> Result<(), ArrangementError> {
        match self.check_generic() {
            GenericityCertificate { generic: true, .. } => Ok(()),
            c => Err(ArrangementError::NotGeneric { witness: c.witness.unwrap_or_default() }),
        }
    }

    /// The constant field `U` with `U(l_i) = 1` and `U(l_k) = 0` for `k` in `others`.
    pub fn dual_field(&self, i: usize, others: &[usize]) -> Result<ConstField, ArrangementError> {
        if others.len() + 1 != self.n || others.contains(&i) || others.iter().chain([&i]).any(|&k| k >= self.p()) {
            return Err(ArrangementError::BadIndices(format!("i={i}, others={others:?}")));
        }
        let rows: Matrix = std::iter::once(i).chain(others.iter().copied()).map(|k| self.forms[k].0.clone()).collect();
        let mut rhs = vec![Rational::zero(); self.n];
        rhs[0] = Rational::one();
        linalg::solve(&rows, &rhs).map(ConstField).ok_or(ArrangementError::SingularSystem)
    }

    /// Complement of `{i} ∪ j_set` in `0..p`.
    fn complement(&self, i: usize, j_set: &[usize]) -> Vec<usize> {
        (0..self.p()).filter(|k| *k != i && !j_set.contains(k)).collect()
    }

    /// Field for the partition `({i}, rest, J)`; `|rest| = n - 1`.
    pub fn u_field(&self, i: usize, j_set: &[usize]) -> Result<ConstField, ArrangementError> {
        self.dual_field(i, &self.complement(i, j_set))
    }

    /// `U_{i,j}` for `p = n + 1`.
    pub fn u_pair(&self, i: usize, j: usize) -> ConstField {
        self.u_field(i, &[j]).expect("u_pair needs p = n + 1, i != j")
    }

    /// `l_i` as a polynomial in `x1..xn, s1..sp`.
    pub fn form_poly(&self, i: usize) -> MultiPoly {
        MultiPoly::linear(&coeff_context(self.n, self.p()), 0, &self.forms[i].0)
    }

    /// Multiplication by `l_i`.
    pub fn l_op(&self, i: usize) -> WeylOp {
        WeylOp::from_coeff(self.n, self.p(), &self.form_poly(i))
    }

    pub fn s_op(&self, i: usize) -> WeylOp {
        WeylOp::s(self.n, self.p(), i)
    }

    pub fn const_op(&self, c: &Rational) -> WeylOp {
        WeylOp::constant(self.n, self.p(), c.clone())
    }

    pub fn field_op(&self, u: &ConstField) -> WeylOp {
        u.to_op(self.p())
    }

    pub fn euler(&self) -> WeylOp {
        let (n, p) = (self.n, self.p());
        (0..n).fold(WeylOp::zero(n, p), |acc, i| &acc + &(&WeylOp::x(n, p, i) * &WeylOp::d(n, p, i)))
    }

    /// `E - s_1 - ... - s_p`.
    pub fn euler_tilde(&self) -> WeylOp {
        (0..self.p()).fold(self.euler(), |acc, k| &acc - &self.s_op(k))
    }

    fn l_prod(&self, idx: impl IntoIterator<Item = usize>) -> WeylOp {
        idx.into_iter().fold(WeylOp::one(self.n, self.p()), |acc, k| &acc * &self.l_op(k))
    }

    /// `l_i l_J U - l_J s_i - l_i sum_{j in J} l_{J-j} U(l_j) s_j`.
    pub fn u_tilde(&self, i: usize, j_set: &[usize]) -> Result<WeylOp, ArrangementError> {
        let u = self.u_field(i, j_set)?;
        let lj = self.l_prod(j_set.iter().copied());
        let mut out = &(&self.l_op(i) * &lj) * &self.field_op(&u);
        out = &out - &(&lj * &self.s_op(i));
        for &j in j_set {
            let rest = self.l_prod(j_set.iter().copied().filter(|&k| k != j));
            let t = (&(&self.l_op(i) * &rest) * &self.s_op(j)).scale(&u.apply(&self.forms[j]));
            out = &out - &t;
        }
        Ok(out)
    }

    /// `Ũ_{i,j}` for `p = n + 1`.
    pub fn u_tilde_pair(&self, i: usize, j: usize) -> WeylOp {
        self.u_tilde(i, &[j]).expect("u_tilde_pair needs p = n + 1, i != j")
    }

    /// Annihilating operators, labelled 1-based.
    ///
    /// `p = n + 1`: `Ẽ` then `Ũ_{i,j}` for `2 <= i < j <= n+1`.
    /// `p >= n`: `Ẽ` then `Ũ_{i,J}` over every partition, `J` a `(p-n)`-subset.
    /// `p < n`: `Ẽ` only.
    pub fn ann_generators(&self) -> Result<Vec<(String, WeylOp)>, ArrangementError> {
        self.require_generic()?;
        let (n, p) = (self.n, self.p());
        let mut out = vec![("E~".to_string(), self.euler_tilde())];
        if p == n + 1 {
            for i in 1..p {
                for j in i + 1..p {
                    out.push((format!("U~{},{}", i + 1, j + 1), self.u_tilde_pair(i, j)));
                }
            }
        } else if p >= n {
            for i in 0..p {
                let others: Vec<usize> = (0..p).filter(|&k| k != i).collect();
                for pick in subsets(others.len(), p - n) {
                    let j_set: Vec<usize> = pick.iter().map(|&t| others[t]).collect();
                    let label = j_set.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(",");
                    out.push((format!("U~{};{{{label}}}", i + 1), self.u_tilde(i, &j_set)?));
                }
            }
        }
        Ok(out)
    }

    /// Left cofactors expressing `Ũ_{i,j}` (`p = n + 1`, any `i != j`) over
    /// the reduced generator list of [`Arrangement::ann_generators`].
    pub fn reduced_cofactors(&self, i: usize, j: usize) -> Vec<WeylOp> {
        let (n, p) = (self.n, self.p());
        assert_eq!(p, n + 1);
        assert!(i != j && i < p && j < p);
        let mut pos = std::collections::HashMap::new();
        let mut count = 1;
        for a in 1..p {
            for b in a + 1..p {
                pos.insert((a, b), count);
                count += 1;
            }
        }
        let mut cof = vec![WeylOp::zero(n, p); count];
        // Ũ_{a,b} = U_{a,b}(l_b) Ũ_{b,a}
        let reduced = |a: usize, b: usize, scale: &Rational, cof: &mut Vec<WeylOp>| {
            let (k, c) = if a < b {
                (pos[&(a, b)], scale.clone())
            } else {
                (pos[&(b, a)], scale * &self.u_pair(a, b).apply(&self.forms[b]))
            };
            cof[k] = &cof[k] + &self.const_op(&c);
        };
        if i != 0 && j != 0 {
            reduced(i, j, &Rational::one(), &mut cof);
            return cof;
        }
        // Ũ_{0,k} = l_k Ẽ - sum_{a != 0,k} Ũ_{a,k}
        let (k, outer) = if i == 0 {
            (j, Rational::one())
        } else {
            (i, self.u_pair(i, 0).apply(&self.forms[0]))
        };
        cof[0] = self.l_op(k).scale(&outer);
        for a in 1..p {
            if a != k {
                reduced(a, k, &-&outer, &mut cof);
            }
        }
        cof
    }

    /// Matrix of forms `0..n` (rows); `l = M x` in those coordinates.
    pub fn coordinate_matrix(&self) -> Matrix {
        self.forms[..self.n].iter().map(|l| l.0.clone()).collect()
    }

    /// Seeded random generic arrangement with integer coefficients in `-r..=r`.
    pub fn random_generic(n: usize, p: usize, seed: u64, r: i64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let forms: Vec<Vec<Rational>> = (0..p)
                .map(|_| (0..n).map(|_| Rational::from_int(rng.gen_range(-r..=r))).collect())
                .collect();
            if let Ok(a) = Arrangement::new(n, forms) {
                if a.check_generic().generic {
                    return a;
                }
            }
        }
    }

    /// Exact operator and polynomial identities among the fields and
    /// annihilators, `p = n + 1`. Each entry is `(name, holds)`.
    pub fn identity_report(&self) -> Vec<(String, bool)> {
        let (n, p) = (self.n, self.p());
        assert_eq!(p, n + 1, "identity report needs p = n + 1");
        let mut out = Vec::new();
        let l = |i| self.l_op(i);
        let s = |i| self.s_op(i);
        let u = |i, j| self.field_op(&self.u_pair(i, j));
        let uv = |i: usize, j: usize, k: usize| self.u_pair(i, j).apply(&self.forms[k]);
        let ut = |i, j| self.u_tilde_pair(i, j);
        let c = |r: &Rational| self.const_op(r);
        let one = Rational::one();

        for k in 0..p {
            let e = (0..p).filter(|&i| i != k).fold(WeylOp::zero(n, p), |a, i| &a + &(&l(i) * &u(i, k)));
            out.push((format!("euler_decomposition k={}", k + 1), e == self.euler()));
            let lin = (0..p).filter(|&i| i != k).fold(WeylOp::zero(n, p), |a, i| &a + &l(i).scale(&uv(i, k, k)));
            out.push((format!("form_decomposition k={}", k + 1), lin == l(k)));
            let sum = (0..p).filter(|&i| i != k).fold(WeylOp::zero(n, p), |a, i| &a + &ut(i, k));
            out.push((format!("euler_tilde_decomposition k={}", k + 1), &l(k) * &self.euler_tilde() == sum));
        }
        for i in 0..p {
            for j in 0..p {
                if i == j {
                    continue;
                }
                let tag = format!("i={} j={}", i + 1, j + 1);
                out.push((format!("field_swap {tag}"), u(i, j) == u(j, i).scale(&uv(i, j, j))));
                out.push((format!("field_swap_value {tag}"), &uv(i, j, j) * &uv(j, i, i) == one));
                out.push((format!("annihilator_swap {tag}"), ut(i, j) == ut(j, i).scale(&uv(i, j, j))));
                let cof = self.reduced_cofactors(i, j);
                let gens = self.ann_generators().expect("generic");
                let back = cof.iter().zip(&gens).fold(WeylOp::zero(n, p), |a, (q, (_, g))| &a + &(q * g));
                out.push((format!("reduced_generators {tag}"), back == ut(i, j)));
            }
        }
        for (i, j, k) in triples(p) {
            let tag = format!("i={} j={} k={}", i + 1, j + 1, k + 1);
            // l_k Ũ_ij - l_j Ũ_ik = l_i U_ij(l_j) Ũ_jk
            let lhs = &(&l(k) * &ut(i, j)) - &(&l(j) * &ut(i, k));
            let rhs = (&l(i) * &ut(j, k)).scale(&uv(i, j, j));
            out.push((format!("l_syzygy {tag}"), lhs == rhs));
            // s_j Ũ_ik - s_i Ũ_jk = -l_i U_ik Ũ_jk + l_j U_jk Ũ_ik - U_jk(l_k)(s_k+1) Ũ_ij
            let lhs = &(&s(j) * &ut(i, k)) - &(&s(i) * &ut(j, k));
            let sk1 = &s(k) + &c(&one);
            let rhs = &(&-&(&(&l(i) * &u(i, k)) * &ut(j, k)) + &(&(&l(j) * &u(j, k)) * &ut(i, k)))
                - &(&sk1 * &ut(i, j)).scale(&uv(j, k, k));
            out.push((format!("s_syzygy {tag}"), lhs == rhs));
            // ... = -l_i U_ij Ũ_jk + l_k U_jk Ũ_ij - U_jk(l_k) s_k Ũ_ij - Ũ_ik
            let rhs2 = &(&(&-&(&(&l(i) * &u(i, j)) * &ut(j, k)) + &(&(&l(k) * &u(j, k)) * &ut(i, j)))
                - &(&s(k) * &ut(i, j)).scale(&uv(j, k, k)))
                - &ut(i, k);
            out.push((format!("s_syzygy_variant {tag}"), lhs == rhs2));
            // l_m s_j Ũ_ij - l_j s_i Ũ_jm with m := k
            let m = k;
            let lhs = &(&(&l(m) * &s(j)) * &ut(i, j)) - &(&(&l(j) * &s(i)) * &ut(j, m));
            let a_ij = &(&(&l(i) * &l(j)) * &u(i, j)) - &(&l(i) * &s(j)).scale(&uv(i, j, j));
            let a_jm = &(&(&l(j) * &l(m)) * &u(j, m)) - &(&l(j) * &s(m)).scale(&uv(j, m, m));
            let rhs = &(&(&a_jm * &ut(i, j)) - &(&a_ij * &ut(j, m))) - &(&l(j) * &ut(i, m));
            out.push((format!("shared_index_syzygy {tag}"), lhs == rhs));
        }
        if p >= 4 {
            for (i, j, k, m) in quadruples(p) {
                let tag = format!("i={} j={} k={} m={}", i + 1, j + 1, k + 1, m + 1);
                let lhs = &(&(&l(m) * &s(k)) * &ut(i, j)) - &(&(&l(j) * &s(i)) * &ut(k, m));
                let a_ij = &(&(&l(i) * &l(j)) * &u(i, j)) - &(&l(i) * &s(j)).scale(&uv(i, j, j));
                let a_km = &(&(&l(k) * &l(m)) * &u(k, m)) - &(&l(k) * &s(m)).scale(&uv(k, m, m));
                let rhs = &(&a_km * &ut(i, j)) - &(&a_ij * &ut(k, m));
                out.push((format!("disjoint_pair_syzygy {tag}"), lhs == rhs));
            }
        }
        out
    }
}

/// Ordered triples of distinct indices.
fn triples(p: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..p {
        for j in 0..p {
            for k in 0..p {
                if i != j && j != k && i != k {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

/// Ordered quadruples of distinct indices.
fn quadruples(p: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for (i, j, k) in triples(p) {
        for m in 0..p {
            if m != i && m != j && m != k {
                out.push((i, j, k, m));
            }
        }
    }
    out
}

impl Serialize for Arrangement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Arrangement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = ArrangementFile::deserialize(d)?;
        Arrangement::from_file(f).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(k: i64) -> Rational {
        Rational::from_int(k)
    }

    fn xy_sum() -> Arrangement {
        Arrangement::from_ints(2, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap()
    }

    #[test]
    fn genericity_examples() {
        let c = xy_sum().check_generic();
        assert!(c.generic);
        let dets: Vec<Rational> = c.determinants.iter().map(|d| d.1.clone()).collect();
        assert_eq!(dets, vec![q(1), q(1), q(-1)]);
        let bad = Arrangement::from_ints(2, &[&[1, 0], &[0, 1], &[2, 0]]).unwrap().check_generic();
        assert!(!bad.generic);
        assert_eq!(bad.witness, Some(vec![1, 3]));
        let four = Arrangement::from_ints(2, &[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]).unwrap().check_generic();
        assert!(four.generic && four.determinants.len() == 6);
        let dep = Arrangement::from_ints(3, &[&[1, 1, 0], &[2, 2, 0]]).unwrap().check_generic();
        assert!(!dep.generic);
        assert!(!Arrangement::from_ints(1, &[&[1], &[3]]).unwrap().check_generic().generic);
    }

    #[test]
    fn bad_forms_rejected() {
        assert_eq!(Arrangement::from_ints(2, &[&[1, 0], &[0, 0]]), Err(ArrangementError::BadForm(2)));
        assert_eq!(Arrangement::from_ints(2, &[&[1, 0, 0]]), Err(ArrangementError::BadForm(1)));
    }

    #[test]
    fn dual_field_examples() {
        let a = xy_sum();
        let u12 = a.u_pair(0, 1);
        assert_eq!(u12.0, vec![q(1), q(-1)]);
        assert_eq!(u12.apply(a.form(1)), q(-1));
        let u21 = a.u_pair(1, 0);
        assert_eq!(u21.0, vec![q(-1), q(1)]);
        let basis = Arrangement::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        assert_eq!(basis.dual_field(0, &[1]).unwrap().0, vec![q(1), q(0)]);
        assert!(matches!(a.dual_field(0, &[0]), Err(ArrangementError::BadIndices(_))));
    }

    #[test]
    fn euler_tilde_text() {
        assert_eq!(xy_sum().euler_tilde().to_string(), "x1*d1 + x2*d2 - s1 - s2 - s3");
    }

    #[test]
    fn identities_hold_on_small_arrangements() {
        for a in [xy_sum(), Arrangement::random_generic(2, 3, 7, 3), Arrangement::random_generic(3, 4, 11, 2)] {
            for (name, ok) in a.identity_report() {
                assert!(ok, "{name} fails for {a:?}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n":2,"forms":[["1","0"],["0","1"],["1/2","-3"]]}"#;
        let a: Arrangement = serde_json::from_str(text).unwrap();
        assert_eq!(a.form(2).coeffs(), &[Rational::new(1, 2), q(-3)]);
        assert_eq!(serde_json::to_string(&a).unwrap(), text);
        assert!(serde_json::from_str::<Arrangement>(r#"{"n":2,"forms":[["1"]]}"#).is_err());
    }

    #[test]
    fn random_generic_is_reproducible() {
        assert_eq!(Arrangement::random_generic(3, 5, 42, 3), Arrangement::random_generic(3, 5, 42, 3));
    }
}

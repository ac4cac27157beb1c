//! Exact graded multivariate polynomial arithmetic.
//!
//! A [`Form`] is a homogeneous polynomial of fixed degree in `X1..Xn`, stored
//! sparsely as a monomial -> coefficient map. The canonical dense layout of a
//! graded piece orders monomials by graded lexicographic order with
//! `X1 > X2 > ... > Xn`, largest first, so `(X1+X2)^2` in two variables
//! densifies to `(1, 2, 1)`. [`Monomial::rank`] and [`Monomial::unrank`] are
//! mutually inverse bijections onto `0..dim_graded_piece(n, d)` under that
//! order, which is what pins every matrix column index in the rest of the
//! crate.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::field::{Field, PrimeField, Rationals};
use crate::Error;

/// Number of monomials of degree `degree` in `n` variables,
/// i.e. binom(n - 1 + degree, n - 1), the dimension of the graded piece.
pub fn dim_graded_piece(n: usize, degree: u32) -> usize {
    assert!(n >= 1, "need at least one variable");
    binomial_u128(n as u128 - 1 + degree as u128, n as u128 - 1)
        .try_into()
        .expect("graded piece dimension fits usize")
}

/// Exact binomial coefficient in u128; panics on overflow, which cannot
/// happen for any matrix dimension that fits in memory.
pub(crate) fn binomial_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .expect("binomial coefficient overflows u128")
            / (i + 1);
    }
    acc
}

/// Exponent vector of a single monomial in `X1..Xn`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn constant(n: usize) -> Self {
        Monomial { exps: vec![0; n] }
    }

    /// The monomial `Xi^e` (zero-based variable index).
    pub fn power_of_var(n: usize, var: usize, e: u32) -> Self {
        assert!(var < n);
        let mut exps = vec![0; n];
        exps[var] = e;
        Monomial { exps }
    }

    pub fn n_vars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.n_vars(), other.n_vars(), "variable count mismatch");
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Position of this monomial in the canonical (descending graded-lex)
    /// enumeration of its graded piece.
    pub fn rank(&self) -> usize {
        let n = self.n_vars();
        let mut rank = 0usize;
        let mut rem = self.degree();
        for i in 0..n.saturating_sub(1) {
            for e in (self.exps[i] + 1)..=rem {
                rank += dim_graded_piece(n - i - 1, rem - e);
            }
            rem -= self.exps[i];
        }
        rank
    }

    /// Inverse of [`Monomial::rank`] for the graded piece `(n, degree)`.
    pub fn unrank(n: usize, degree: u32, mut rank: usize) -> Monomial {
        assert!(n >= 1);
        let mut exps = Vec::with_capacity(n);
        let mut rem = degree;
        for i in 0..n - 1 {
            let mut chosen = None;
            for e in (0..=rem).rev() {
                let count = dim_graded_piece(n - i - 1, rem - e);
                if rank < count {
                    chosen = Some(e);
                    break;
                }
                rank -= count;
            }
            let e = chosen.expect("rank within graded piece");
            exps.push(e);
            rem -= e;
        }
        exps.push(rem);
        Monomial { exps }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "X{}", i + 1)?;
            } else {
                write!(f, "X{}^{}", i + 1, e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// All monomials of the graded piece `(n, degree)` in canonical order.
pub fn monomials_of_degree(n: usize, degree: u32) -> Vec<Monomial> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(dim_graded_piece(n, degree));
    let mut prefix = Vec::with_capacity(n);
    descend(n, degree, &mut prefix, &mut out);
    out
}

fn descend(n: usize, rem: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if prefix.len() == n - 1 {
        prefix.push(rem);
        out.push(Monomial::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for e in (0..=rem).rev() {
        prefix.push(e);
        descend(n, rem - e, prefix, out);
        prefix.pop();
    }
}

/// A homogeneous polynomial with exact coefficients in a fixed graded piece.
///
/// Zero coefficients are never stored; two forms compare equal iff they have
/// the same field, variable count, degree and terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Form<F: Field> {
    field: F,
    n: usize,
    degree: u32,
    terms: BTreeMap<Monomial, F::Elem>,
}

impl<F: Field> Form<F> {
    pub fn zero(field: F, n: usize, degree: u32) -> Self {
        assert!(n >= 1);
        Form {
            field,
            n,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The constant form 1 (degree 0).
    pub fn one(field: F, n: usize) -> Self {
        let mut f = Form::zero(field, n, 0);
        let one = f.field.one();
        f.terms.insert(Monomial::constant(n), one);
        f
    }

    /// The degree-1 form `Xi` (zero-based index).
    pub fn variable(field: F, n: usize, var: usize) -> Self {
        let mut f = Form::zero(field, n, 1);
        let one = f.field.one();
        f.terms.insert(Monomial::power_of_var(n, var, 1), one);
        f
    }

    /// Builds a form from `(monomial, coefficient)` pairs, merging duplicates.
    /// Rejects terms whose degree differs from `degree`.
    pub fn from_terms<I>(field: F, n: usize, degree: u32, terms: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (Monomial, F::Elem)>,
    {
        let mut form = Form::zero(field, n, degree);
        for (m, c) in terms {
            if m.n_vars() != n {
                return Err(Error::InvalidInput(format!(
                    "monomial in {} variables in a {}-variable form",
                    m.n_vars(),
                    n
                )));
            }
            if m.degree() != degree {
                return Err(Error::InvalidInput(format!(
                    "degree-{} monomial in a degree-{} form",
                    m.degree(),
                    degree
                )));
            }
            form.add_term(m, c);
        }
        Ok(form)
    }

    /// The linear form `c1*X1 + ... + cn*Xn`.
    pub fn linear(field: F, coeffs: &[i64]) -> Self {
        let n = coeffs.len();
        let mut f = Form::zero(field, n, 1);
        for (i, &c) in coeffs.iter().enumerate() {
            let elem = f.field.from_i64(c);
            f.add_term(Monomial::power_of_var(n, i, 1), elem);
        }
        f
    }

    /// The quadratic `(Xi + Xj)^2` (zero-based indices), the building block
    /// of the binomial witness set.
    pub fn squared_binomial(field: F, n: usize, i: usize, j: usize) -> Self {
        let mut f = Form::zero(field, n, 2);
        let one = f.field.one();
        let two = f.field.from_i64(2);
        f.add_term(Monomial::power_of_var(n, i, 2), one.clone());
        f.add_term(Monomial::power_of_var(n, j, 2), one);
        let mut exps = vec![0; n];
        exps[i] = 1;
        exps[j] = 1;
        f.add_term(Monomial::new(exps), two);
        f
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (descending graded-lex) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F::Elem)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, m: &Monomial) -> F::Elem {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    fn add_term(&mut self, m: Monomial, c: F::Elem) {
        debug_assert_eq!(m.degree(), self.degree);
        debug_assert_eq!(m.n_vars(), self.n);
        if self.field.is_zero(&c) {
            return;
        }
        let field = self.field.clone();
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = field.add(e.get(), &c);
                if field.is_zero(&sum) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), Error> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(
                "forms live over different fields".into(),
            ));
        }
        if self.n != other.n {
            return Err(Error::InvalidInput(format!(
                "forms in {} and {} variables",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// Sum of two forms of the same degree.
    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::InvalidInput(format!(
                "cannot add forms of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Form::zero(self.field.clone(), self.n, self.degree);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), self.field.neg(c));
        }
        out
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &F::Elem) -> Self {
        let mut out = Form::zero(self.field.clone(), self.n, self.degree);
        if self.field.is_zero(c) {
            return out;
        }
        for (m, a) in &self.terms {
            out.terms.insert(m.clone(), self.field.mul(a, c));
        }
        out
    }

    /// Exact distributive product; the result has degree `deg a + deg b`.
    pub fn mul(&self, other: &Self) -> Result<Self, Error> {
        self.check_compatible(other)?;
        let mut out = Form::zero(self.field.clone(), self.n, self.degree + other.degree);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), self.field.mul(ca, cb));
            }
        }
        Ok(out)
    }

    /// `self^e` by binary exponentiation; `power(a, 0)` is the constant 1.
    pub fn power(&self, e: u32) -> Self {
        let mut acc = Form::one(self.field.clone(), self.n);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring by construction");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same ring by construction");
            }
        }
        acc
    }

    /// Image under the variable-to-variable substitution `Xi -> X(map[i]+1)`
    /// into the ring with `target_n` variables. Degree is preserved; terms
    /// may merge.
    pub fn substitute(&self, target_n: usize, map: &[usize]) -> Result<Self, Error> {
        if map.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "substitution map has {} entries for {} variables",
                map.len(),
                self.n
            )));
        }
        if let Some(&bad) = map.iter().find(|&&t| t >= target_n) {
            return Err(Error::InvalidInput(format!(
                "substitution target X{} outside a {}-variable ring",
                bad + 1,
                target_n
            )));
        }
        let mut out = Form::zero(self.field.clone(), target_n, self.degree);
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; target_n];
            for (i, &e) in m.exponents().iter().enumerate() {
                exps[map[i]] += e;
            }
            out.add_term(Monomial::new(exps), c.clone());
        }
        Ok(out)
    }

    /// Composition with an invertible linear change of variables:
    /// `Xi -> sum_j a[i][j] * Xj`.
    pub fn linear_change(&self, a: &[Vec<F::Elem>]) -> Result<Self, Error> {
        if a.len() != self.n || a.iter().any(|row| row.len() != self.n) {
            return Err(Error::DimensionMismatch(format!(
                "change-of-variables matrix must be {n}x{n}",
                n = self.n
            )));
        }
        let images: Vec<Form<F>> = a
            .iter()
            .map(|row| {
                let mut l = Form::zero(self.field.clone(), self.n, 1);
                for (j, c) in row.iter().enumerate() {
                    l.add_term(Monomial::power_of_var(self.n, j, 1), c.clone());
                }
                l
            })
            .collect();
        let mut out = Form::zero(self.field.clone(), self.n, self.degree);
        for (m, c) in &self.terms {
            let mut term = Form::one(self.field.clone(), self.n);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    term = term.mul(&images[i].power(e))?;
                }
            }
            out = out.add(&term.scale(c))?;
        }
        Ok(out)
    }

    /// Dense coefficient vector in canonical monomial order,
    /// length `dim_graded_piece(n, degree)`.
    pub fn densify(&self) -> Vec<F::Elem> {
        let mut out = vec![self.field.zero(); dim_graded_piece(self.n, self.degree)];
        for (m, c) in &self.terms {
            out[m.rank()] = c.clone();
        }
        out
    }

    /// Rebuilds a form from a dense coefficient vector in canonical order.
    pub fn from_dense(field: F, n: usize, degree: u32, coeffs: &[F::Elem]) -> Result<Self, Error> {
        let dim = dim_graded_piece(n, degree);
        if coeffs.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim} coefficients, got {}",
                coeffs.len()
            )));
        }
        let mut form = Form::zero(field, n, degree);
        for (r, c) in coeffs.iter().enumerate() {
            if !form.field.is_zero(c) {
                form.terms.insert(Monomial::unrank(n, degree, r), c.clone());
            }
        }
        Ok(form)
    }

    /// Evaluates the form at a point.
    pub fn eval(&self, point: &[F::Elem]) -> Result<F::Elem, Error> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates for {} variables",
                point.len(),
                self.n
            )));
        }
        let mut acc = self.field.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                for _ in 0..e {
                    t = self.field.mul(&t, &point[i]);
                }
            }
            acc = self.field.add(&acc, &t);
        }
        Ok(acc)
    }

    /// A form with independent uniform integer coefficients in
    /// `lo..=hi` on every monomial of the graded piece.
    pub fn random_integer<R: Rng>(
        field: F,
        n: usize,
        degree: u32,
        lo: i64,
        hi: i64,
        rng: &mut R,
    ) -> Self {
        let mut form = Form::zero(field, n, degree);
        for m in monomials_of_degree(n, degree) {
            let c = form.field.from_i64(rng.random_range(lo..=hi));
            form.add_term(m, c);
        }
        form
    }
}

impl Form<Rationals> {
    /// Reduces every coefficient mod p, mapping a rational form to F_p.
    /// Fails if some denominator is divisible by the modulus.
    pub fn specialize(&self, fp: PrimeField) -> Result<Form<PrimeField>, Error> {
        let mut out = Form::zero(fp, self.n, self.degree);
        for (m, c) in &self.terms {
            let den = fp.from_bigint(c.denom());
            if den == 0 {
                return Err(Error::InvalidInput(
                    "denominator divisible by the field modulus".into(),
                ));
            }
            let num = fp.from_bigint(c.numer());
            out.add_term(m.clone(), fp.mul(&num, &fp.inv(&den)));
        }
        Ok(out)
    }
}

impl<F: Field> fmt::Display for Form<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*{}", self.field.elem_string(c), m)?;
        }
        Ok(())
    }
}

// --- JSON schema shared by every module ------------------------------------
//
// {"n": int, "degree": int,
//  "terms": [{"exponents": [int...], "num": "...", "den": "..."}...]}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    n: usize,
    degree: u32,
    terms: Vec<TermRepr>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponents: Vec<u32>,
    num: String,
    den: String,
}

impl Serialize for Form<Rationals> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms = self
            .terms()
            .map(|(m, c)| TermRepr {
                exponents: m.exponents().to_vec(),
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect();
        FormRepr {
            n: self.n,
            degree: self.degree,
            terms,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Form<Rationals> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = FormRepr::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(repr.terms.len());
        for t in &repr.terms {
            let num: BigInt = t
                .num
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad numerator {:?}", t.num)))?;
            let den: BigInt = t
                .den
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad denominator {:?}", t.den)))?;
            if den == BigInt::from(0) {
                return Err(serde::de::Error::custom("zero denominator"));
            }
            terms.push((
                Monomial::new(t.exponents.clone()),
                BigRational::new(num, den),
            ));
        }
        Form::from_terms(Rationals, repr.n, repr.degree, terms)
            .map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

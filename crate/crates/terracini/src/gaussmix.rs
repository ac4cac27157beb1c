//! Moments of mixtures of centered Gaussians, exactly.
//!
//! The moment generating series of a Gaussian with mean form `l` and
//! covariance form `q` is `exp(l + q) = sum_d (l + q)^d / d!`, where the
//! covariance quadratic attached to a matrix `Sigma` is `q = 1/2 X' Sigma X`
//! (the 1/2 is what makes the directional law
//! `E[<x,Y>^{2d}] = (2d-1)!! (x' Sigma x)^d` come out exactly). For a
//! centered mixture with weights `lambda_i` the degree-2d moment form, in
//! the `q^d` normalization used throughout, is `sum_i lambda_i q_i^d`; the
//! homogeneous MGF part differs from it by `d!`.
//!
//! [`isserlis_oracle`] computes single moments by brute-force enumeration of
//! pair partitions and serves as the independent cross-check for the
//! generating-series route.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exactla::ExactMatrix;
use crate::field::Rationals;
use crate::polyring::{monomials_of_degree, Form, Monomial};
use crate::Error;

/// A symmetric covariance matrix with its quadratic form `q = 1/2 X'SX`.
/// The two representations determine each other exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceForm {
    sigma: Vec<Vec<BigRational>>,
    q: Form<Rationals>,
}

impl CovarianceForm {
    /// Builds from a symmetric matrix. Positive semidefiniteness is *not*
    /// required here; statistical containers ([`MixtureModel`]) enforce it.
    pub fn from_sigma(sigma: Vec<Vec<BigRational>>) -> Result<Self, Error> {
        let n = sigma.len();
        if n == 0 || sigma.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(
                "covariance matrix must be square and non-empty".into(),
            ));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if sigma[i][j] != sigma[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "covariance matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut terms = Vec::new();
        for i in 0..n {
            if !sigma[i][i].is_zero() {
                terms.push((Monomial::power_of_var(n, i, 2), &sigma[i][i] * &half));
            }
            for j in (i + 1)..n {
                if !sigma[i][j].is_zero() {
                    let mut exps = vec![0u32; n];
                    exps[i] = 1;
                    exps[j] = 1;
                    terms.push((Monomial::new(exps), sigma[i][j].clone()));
                }
            }
        }
        let q = Form::from_terms(Rationals, n, 2, terms)?;
        Ok(CovarianceForm { sigma, q })
    }

    /// Recovers the matrix from a quadratic form: `S_ii = 2 q_ii`,
    /// `S_ij = q_ij` for `i != j`.
    pub fn from_quadratic(q: &Form<Rationals>) -> Result<Self, Error> {
        if q.degree() != 2 {
            return Err(Error::InvalidInput(format!(
                "covariance form must have degree 2, got {}",
                q.degree()
            )));
        }
        let n = q.n_vars();
        let mut sigma = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            sigma[i][i] = q.coeff(&Monomial::power_of_var(n, i, 2)) * BigRational::from_integer(BigInt::from(2));
            for j in (i + 1)..n {
                let mut exps = vec![0u32; n];
                exps[i] = 1;
                exps[j] = 1;
                let c = q.coeff(&Monomial::new(exps));
                sigma[i][j] = c.clone();
                sigma[j][i] = c;
            }
        }
        Ok(CovarianceForm {
            sigma,
            q: q.clone(),
        })
    }

    pub fn n_vars(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[Vec<BigRational>] {
        &self.sigma
    }

    pub fn quadratic(&self) -> &Form<Rationals> {
        &self.q
    }

    /// Exact positive-semidefiniteness test by symmetrically pivoted
    /// rational Cholesky: repeatedly pivot on the largest diagonal entry
    /// and take Schur complements. A negative diagonal entry, or a zero
    /// diagonal with a nonzero residual row, disproves psd-ness.
    pub fn is_psd(&self) -> bool {
        is_psd_matrix(&self.sigma)
    }
}

fn is_psd_matrix(sigma: &[Vec<BigRational>]) -> bool {
    let n = sigma.len();
    let mut a: Vec<Vec<BigRational>> = sigma.to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let (pos, pivot_idx) = {
            let mut best = 0usize;
            for (t, &i) in active.iter().enumerate() {
                if a[i][i] > a[active[best]][active[best]] {
                    best = t;
                }
            }
            (best, active[best])
        };
        let pivot = a[pivot_idx][pivot_idx].clone();
        if pivot.is_negative() {
            return false;
        }
        if pivot.is_zero() {
            // A psd matrix with a zero diagonal block must vanish there.
            return active
                .iter()
                .all(|&i| active.iter().all(|&j| a[i][j].is_zero()));
        }
        active.remove(pos);
        for &i in &active {
            for &j in &active {
                let upd = &a[i][j] - &a[i][pivot_idx] * &a[pivot_idx][j] / &pivot;
                a[i][j] = upd;
            }
        }
    }
    true
}

/// A random integer Gram matrix `A'A` with entries of `A` uniform in
/// [-10, 10]: rational, psd by construction, dense enough to behave
/// generically.
pub fn random_psd_sigma<R: Rng>(n: usize, rng: &mut R) -> Vec<Vec<BigRational>> {
    let a: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-10..=10)).collect())
        .collect();
    let mut sigma = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0i64;
            for (row, _) in a.iter().enumerate() {
                acc += a[row][i] * a[row][j];
            }
            sigma[i][j] = BigRational::from_integer(BigInt::from(acc));
        }
    }
    sigma
}

/// A mixture of centered Gaussians: covariance forms with positive rational
/// mixing weights summing to one. Components are checked to be psd.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    components: Vec<CovarianceForm>,
    weights: Vec<BigRational>,
}

impl MixtureModel {
    pub fn new(components: Vec<CovarianceForm>, weights: Vec<BigRational>) -> Result<Self, Error> {
        if components.is_empty() {
            return Err(Error::InvalidInput("mixture needs a component".into()));
        }
        if components.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        let n = components[0].n_vars();
        if components.iter().any(|c| c.n_vars() != n) {
            return Err(Error::DimensionMismatch(
                "components have different variable counts".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        let total: BigRational = weights.iter().sum();
        if total != BigRational::one() {
            return Err(Error::InvalidInput(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        if let Some(bad) = components.iter().position(|c| !c.is_psd()) {
            return Err(Error::InvalidInput(format!(
                "component {bad} is not positive semidefinite"
            )));
        }
        Ok(MixtureModel {
            components,
            weights,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.components[0].n_vars()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[CovarianceForm] {
        &self.components
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }
}

/// The degree-`degree` homogeneous part of `exp(l + q)`:
/// `sum_b binom(degree-b, b) l^(degree-2b) q^b / (degree-b)!`.
/// For `l = 0` and even degree `2d` this is `q^d / d!`.
pub fn mgf_homogeneous_part(
    l: &Form<Rationals>,
    q: &Form<Rationals>,
    degree: u32,
) -> Result<Form<Rationals>, Error> {
    if l.n_vars() != q.n_vars() {
        return Err(Error::DimensionMismatch(
            "mean and covariance forms must share variables".into(),
        ));
    }
    if l.degree() != 1 || q.degree() != 2 {
        return Err(Error::InvalidInput(format!(
            "expected degrees (1, 2), got ({}, {})",
            l.degree(),
            q.degree()
        )));
    }
    let n = l.n_vars();
    let mut acc = Form::zero(Rationals, n, degree);
    for b in 0..=(degree / 2) {
        let a = degree - 2 * b; // exponent of l
        let coeff = BigRational::new(
            BigInt::from(crate::polyring::binomial_u128(
                (degree - b) as u128,
                b as u128,
            )),
            factorial(degree - b),
        );
        let term = l.power(a).mul(&q.power(b))?.scale(&coeff);
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n as u64 {
        acc *= BigInt::from(i);
    }
    acc
}

/// The order-`order` moment form of the mixture in the `q^d` normalization:
/// `sum_i lambda_i q_i^(order/2)`. Every odd-order moment of a centered
/// mixture vanishes, so odd orders yield the zero form.
pub fn mixture_moment_form(model: &MixtureModel, order: u32) -> Form<Rationals> {
    let n = model.n_vars();
    if order % 2 == 1 {
        return Form::zero(Rationals, n, order);
    }
    let d = order / 2;
    let mut acc = Form::zero(Rationals, n, order);
    for (c, w) in model.components().iter().zip(model.weights()) {
        acc = acc
            .add(&c.quadratic().power(d).scale(w))
            .expect("moment summands share the graded piece");
    }
    acc
}

/// The single moment `E[Y^alpha]` of the mixture, read off the moment
/// generating series: `alpha! / d!` times the `X^alpha` coefficient of the
/// degree-|alpha| moment form, zero for odd `|alpha|`.
pub fn moment_of_monomial(model: &MixtureModel, alpha: &Monomial) -> Result<BigRational, Error> {
    if alpha.n_vars() != model.n_vars() {
        return Err(Error::DimensionMismatch(format!(
            "monomial in {} variables against an {}-variate mixture",
            alpha.n_vars(),
            model.n_vars()
        )));
    }
    let order = alpha.degree();
    if order % 2 == 1 {
        return Ok(BigRational::zero());
    }
    let d = order / 2;
    let moment_form = mixture_moment_form(model, order);
    let mut scale = BigRational::new(BigInt::one(), factorial(d));
    for &e in alpha.exponents() {
        scale *= BigRational::from_integer(factorial(e));
    }
    Ok(moment_form.coeff(alpha) * scale)
}

/// Independent oracle for Gaussian moments: `E[Y^alpha]` as the sum over
/// all perfect matchings of the index multiset of products of covariance
/// entries. Exponential in the degree, hence the |alpha| <= 10 guard.
pub fn isserlis_oracle(
    sigma: &[Vec<BigRational>],
    alpha: &Monomial,
) -> Result<BigRational, Error> {
    if alpha.n_vars() != sigma.len() {
        return Err(Error::DimensionMismatch(
            "monomial and covariance matrix disagree on variables".into(),
        ));
    }
    if alpha.degree() > 10 {
        return Err(Error::InvalidInput(format!(
            "pair-partition enumeration is capped at degree 10, got {}",
            alpha.degree()
        )));
    }
    let mut indices = Vec::with_capacity(alpha.degree() as usize);
    for (i, &e) in alpha.exponents().iter().enumerate() {
        for _ in 0..e {
            indices.push(i);
        }
    }
    Ok(matching_sum(&indices, sigma))
}

fn matching_sum(indices: &[usize], sigma: &[Vec<BigRational>]) -> BigRational {
    if indices.is_empty() {
        return BigRational::one();
    }
    if indices.len() % 2 == 1 {
        return BigRational::zero();
    }
    let first = indices[0];
    let mut acc = BigRational::zero();
    for t in 1..indices.len() {
        let mut rest = Vec::with_capacity(indices.len() - 2);
        rest.extend_from_slice(&indices[1..t]);
        rest.extend_from_slice(&indices[t + 1..]);
        acc += &sigma[first][indices[t]] * matching_sum(&rest, sigma);
    }
    acc
}

/// `E[<x, Y>^order]` by multinomial expansion over single moments.
pub fn directional_moment(
    model: &MixtureModel,
    x: &[BigRational],
    order: u32,
) -> Result<BigRational, Error> {
    if x.len() != model.n_vars() {
        return Err(Error::DimensionMismatch(
            "direction vector has the wrong length".into(),
        ));
    }
    let mut acc = BigRational::zero();
    for alpha in monomials_of_degree(model.n_vars(), order) {
        let mut multinomial = BigRational::from_integer(factorial(order));
        let mut x_pow = BigRational::one();
        for (i, &e) in alpha.exponents().iter().enumerate() {
            multinomial /= BigRational::from_integer(factorial(e));
            for _ in 0..e {
                x_pow *= &x[i];
            }
        }
        if x_pow.is_zero() {
            continue;
        }
        acc += multinomial * x_pow * moment_of_monomial(model, &alpha)?;
    }
    Ok(acc)
}

/// A quadratic form carrying a scalar factor through its d-th power: the
/// pair `(t, f)` stands for `t^(1/d) * f`, so the scaled component stays
/// rational end to end even though the root itself is irrational.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledForm {
    pub scale_dth_power: BigRational,
    pub form: Form<Rationals>,
}

/// Result of the weight-recovery step.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRecovery {
    pub weights: Vec<BigRational>,
    pub representatives: Vec<Form<Rationals>>,
    /// False when some recovered scale is non-positive, which cannot come
    /// from a genuine mixture.
    pub statistical: bool,
}

/// Recovers mixing weights from two consecutive moment degrees.
///
/// The top-degree moment identifies the scaled components
/// `c_i = lambda_i^(1/d) q_i` (given here as [`ScaledForm`]s); the
/// degree-2(d-1) moment form `m_lower = sum_i lambda_i q_i^(d-1)` then
/// pins the weights: solving `sum_i u_i f_i^(d-1) = m_lower` for the
/// underlying forms `f_i` yields `mu_i = u_i^d / t_i^(d-1)` and the
/// representatives `p_i = (t_i / u_i) f_i`, the unique weights and
/// components consistent with both degrees.
///
/// Requires the powers `f_i^(d-1)` to be linearly independent; a
/// `m_lower` outside their span means the inputs do not come from a
/// genuine mixture.
pub fn recover_mixing_weights(
    scaled: &[ScaledForm],
    m_lower: &Form<Rationals>,
    d: u32,
) -> Result<WeightRecovery, Error> {
    if scaled.is_empty() {
        return Err(Error::InvalidInput("need at least one component".into()));
    }
    if d < 2 {
        return Err(Error::InvalidInput(format!("need d >= 2, got {d}")));
    }
    let n = scaled[0].form.n_vars();
    let k = scaled[0].form.degree();
    if scaled
        .iter()
        .any(|s| s.form.n_vars() != n || s.form.degree() != k)
    {
        return Err(Error::DimensionMismatch(
            "scaled components must share variables and degree".into(),
        ));
    }
    if m_lower.n_vars() != n || m_lower.degree() != k * (d - 1) {
        return Err(Error::DimensionMismatch(format!(
            "lower moment must have degree {}, got {}",
            k * (d - 1),
            m_lower.degree()
        )));
    }
    if scaled.iter().any(|s| s.scale_dth_power.is_zero()) {
        return Err(Error::InvalidInput(
            "scale factors must be nonzero".into(),
        ));
    }

    let m = scaled.len();
    let powers: Vec<Vec<BigRational>> = scaled
        .iter()
        .map(|s| s.form.power(d - 1).densify())
        .collect();
    let coef_matrix = ExactMatrix::from_columns(Rationals, powers)?;
    if coef_matrix.rank() < m {
        return Err(Error::Precondition(
            "the (d-1)-th powers of the components are linearly dependent".into(),
        ));
    }

    // Augment with the target and solve; full column rank makes every
    // component column a pivot column of the augmented system.
    let b = m_lower.densify();
    let rows = coef_matrix.rows();
    let mut augmented = ExactMatrix::zero(Rationals, rows, m + 1);
    for r in 0..rows {
        for c in 0..m {
            augmented.set(r, c, coef_matrix.get(r, c).clone());
        }
        augmented.set(r, m, b[r].clone());
    }
    let (rref, pivots) = augmented.rref();
    if pivots.contains(&m) {
        return Err(Error::Inconsistent(
            "the lower moment lies outside the span of the component powers".into(),
        ));
    }
    debug_assert_eq!(pivots, (0..m).collect::<Vec<_>>());
    let solution: Vec<BigRational> = (0..m).map(|i| rref.get(i, m).clone()).collect();

    let mut weights = Vec::with_capacity(m);
    let mut representatives = Vec::with_capacity(m);
    let mut statistical = true;
    for (u, s) in solution.iter().zip(scaled) {
        if !u.is_positive() {
            statistical = false;
        }
        let tau = &s.scale_dth_power;
        if u.is_zero() {
            weights.push(BigRational::zero());
            representatives.push(Form::zero(Rationals, n, k));
            continue;
        }
        let mut u_pow_d = BigRational::one();
        for _ in 0..d {
            u_pow_d *= u;
        }
        let mut tau_pow = BigRational::one();
        for _ in 0..(d - 1) {
            tau_pow *= tau;
        }
        weights.push(u_pow_d / tau_pow);
        representatives.push(s.form.scale(&(tau / u)));
    }
    Ok(WeightRecovery {
        weights,
        representatives,
        statistical,
    })
}

// --- model JSON -------------------------------------------------------------
//
// {"n": int,
//  "components": [{"sigma": [["num" or "num/den", ...], ...]}, ...],
//  "weights": ["num/den", ...]}

#[derive(Serialize, Deserialize)]
struct MixtureRepr {
    n: usize,
    components: Vec<ComponentRepr>,
    weights: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ComponentRepr {
    sigma: Vec<Vec<String>>,
}

/// Parses "a" or "a/b" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let bad = |_| Error::InvalidInput(format!("malformed rational {s:?}"));
    match s.split_once('/') {
        Some((num, den)) => {
            let num: BigInt = num.trim().parse().map_err(bad)?;
            let den: BigInt = den.trim().parse().map_err(bad)?;
            if den.is_zero() {
                return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(num, den))
        }
        None => {
            let num: BigInt = s.trim().parse().map_err(bad)?;
            Ok(BigRational::from_integer(num))
        }
    }
}

impl Serialize for MixtureModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MixtureRepr {
            n: self.n_vars(),
            components: self
                .components
                .iter()
                .map(|c| ComponentRepr {
                    sigma: c
                        .sigma()
                        .iter()
                        .map(|row| row.iter().map(|e| e.to_string()).collect())
                        .collect(),
                })
                .collect(),
            weights: self.weights.iter().map(|w| w.to_string()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MixtureModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MixtureRepr::deserialize(deserializer)?;
        let mut components = Vec::with_capacity(repr.components.len());
        for c in &repr.components {
            if c.sigma.len() != repr.n {
                return Err(serde::de::Error::custom(format!(
                    "component matrix must be {0}x{0}",
                    repr.n
                )));
            }
            let mut sigma = Vec::with_capacity(repr.n);
            for row in &c.sigma {
                let parsed: Result<Vec<_>, _> = row.iter().map(|s| parse_rational(s)).collect();
                sigma.push(parsed.map_err(|e| serde::de::Error::custom(e.to_string()))?);
            }
            components.push(
                CovarianceForm::from_sigma(sigma)
                    .map_err(|e| serde::de::Error::custom(e.to_string()))?,
            );
        }
        let weights: Result<Vec<_>, _> = repr.weights.iter().map(|s| parse_rational(s)).collect();
        let weights = weights.map_err(|e| serde::de::Error::custom(e.to_string()))?;
        MixtureModel::new(components, weights)
            .map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

/// (2d - 1)!! as a big integer, the number of perfect matchings of 2d items.
pub fn double_factorial_odd(d: u32) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = 1u64;
    while k < 2 * d as u64 {
        acc *= BigInt::from(k);
        k += 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn identity_sigma(n: usize) -> Vec<Vec<BigRational>> {
        let mut s = vec![vec![q(0); n]; n];
        for (i, row) in s.iter_mut().enumerate() {
            row[i] = q(1);
        }
        s
    }

    fn uniform_weights(m: usize) -> Vec<BigRational> {
        vec![BigRational::new(BigInt::one(), BigInt::from(m as i64)); m]
    }

    #[test]
    fn covariance_round_trip() {
        let sigma = vec![vec![q(2), q(3)], vec![q(3), q(5)]];
        let c = CovarianceForm::from_sigma(sigma.clone()).unwrap();
        let back = CovarianceForm::from_quadratic(c.quadratic()).unwrap();
        assert_eq!(back.sigma(), c.sigma());
        assert_eq!(c.sigma(), &sigma[..]);
    }

    #[test]
    fn asymmetric_sigma_rejected() {
        let sigma = vec![vec![q(1), q(2)], vec![q(3), q(1)]];
        assert!(CovarianceForm::from_sigma(sigma).is_err());
    }

    #[test]
    fn psd_checks() {
        assert!(CovarianceForm::from_sigma(identity_sigma(3))
            .unwrap()
            .is_psd());
        // Rank-one psd.
        let s = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert!(CovarianceForm::from_sigma(s).unwrap().is_psd());
        // Indefinite.
        let s = vec![vec![q(1), q(3)], vec![q(3), q(1)]];
        assert!(!CovarianceForm::from_sigma(s).unwrap().is_psd());
        // Zero diagonal with nonzero off-diagonal.
        let s = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        assert!(!CovarianceForm::from_sigma(s).unwrap().is_psd());
        // Negative definite.
        let s = vec![vec![q(-1), q(0)], vec![q(0), q(-1)]];
        assert!(!CovarianceForm::from_sigma(s).unwrap().is_psd());
        // The zero matrix is psd (a Dirac distribution).
        let s = vec![vec![q(0), q(0)], vec![q(0), q(0)]];
        assert!(CovarianceForm::from_sigma(s).unwrap().is_psd());
    }

    #[test]
    fn sampled_gram_matrices_are_psd() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        for n in 1..=4usize {
            for _ in 0..10 {
                let sigma = random_psd_sigma(n, &mut rng);
                assert!(CovarianceForm::from_sigma(sigma).unwrap().is_psd());
            }
        }
    }

    #[test]
    fn mgf_part_reduces_to_power_over_factorial() {
        let n = 2;
        let zero_l = Form::zero(Rationals, n, 1);
        let c = CovarianceForm::from_sigma(identity_sigma(n)).unwrap();
        let part = mgf_homogeneous_part(&zero_l, c.quadratic(), 6).unwrap();
        let direct = c
            .quadratic()
            .power(3)
            .scale(&BigRational::new(BigInt::one(), BigInt::from(6)));
        assert_eq!(part, direct);
    }

    #[test]
    fn mgf_part_of_pure_mean_is_power_over_factorial() {
        let l = Form::linear(Rationals, &[2, -1]);
        let zero_q = Form::zero(Rationals, 2, 2);
        let part = mgf_homogeneous_part(&l, &zero_q, 4).unwrap();
        assert_eq!(
            part,
            l.power(4)
                .scale(&BigRational::new(BigInt::one(), BigInt::from(24)))
        );
    }

    #[test]
    fn mgf_degree_six_matches_truncated_exponential() {
        // Oracle: the coefficient of t^6 in sum_{d<=6} (a t + b t^2)^d / d!
        // at a = l(x), b = q(x), against the homogeneous part evaluated at x.
        let mut rng = rand::rngs::StdRng::seed_from_u64(31);
        for _ in 0..20 {
            let l = Form::random_integer(Rationals, 3, 1, -5, 5, &mut rng);
            let qf = Form::random_integer(Rationals, 3, 2, -5, 5, &mut rng);
            let part = mgf_homogeneous_part(&l, &qf, 6).unwrap();
            let x: Vec<BigRational> = (0..3).map(|_| q(rng.random_range(-4i64..=4))).collect();
            let a = l.eval(&x).unwrap();
            let b = qf.eval(&x).unwrap();
            // Truncated univariate series in t.
            let mut series = vec![BigRational::zero(); 7];
            for d in 0..=6u32 {
                // (a t + b t^2)^d = sum_j binom(d,j) a^(d-j) b^j t^(d+j)
                for j in 0..=d {
                    let deg = (d + j) as usize;
                    if deg > 6 {
                        continue;
                    }
                    let mut term = BigRational::new(
                        BigInt::from(crate::polyring::binomial_u128(d as u128, j as u128)),
                        factorial(d),
                    );
                    for _ in 0..(d - j) {
                        term *= &a;
                    }
                    for _ in 0..j {
                        term *= &b;
                    }
                    series[deg] += term;
                }
            }
            assert_eq!(part.eval(&x).unwrap(), series[6]);
        }
    }

    #[test]
    fn moment_form_examples() {
        // Single standard component in one variable: q^3 = x^6 / 8.
        let c = CovarianceForm::from_sigma(identity_sigma(1)).unwrap();
        let model = MixtureModel::new(vec![c], uniform_weights(1)).unwrap();
        let m6 = mixture_moment_form(&model, 6);
        assert_eq!(
            m6.coeff(&Monomial::new(vec![6])),
            BigRational::new(BigInt::one(), BigInt::from(8))
        );
        // E[Y^6] = 15 = (2*3)!/3! * 1/8.
        assert_eq!(
            moment_of_monomial(&model, &Monomial::new(vec![6])).unwrap(),
            q(15)
        );

        // Odd order vanishes.
        assert!(mixture_moment_form(&model, 3).is_zero());

        // Uniform two-component mixture.
        let c1 = CovarianceForm::from_sigma(identity_sigma(2)).unwrap();
        let c2 =
            CovarianceForm::from_sigma(vec![vec![q(2), q(1)], vec![q(1), q(2)]]).unwrap();
        let model = MixtureModel::new(vec![c1.clone(), c2.clone()], uniform_weights(2)).unwrap();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let expected = c1
            .quadratic()
            .power(3)
            .scale(&half)
            .add(&c2.quadratic().power(3).scale(&half))
            .unwrap();
        assert_eq!(mixture_moment_form(&model, 6), expected);
    }

    #[test]
    fn moment_form_is_affine_in_weights_and_permutation_equivariant() {
        let c1 = CovarianceForm::from_sigma(identity_sigma(2)).unwrap();
        let c2 =
            CovarianceForm::from_sigma(vec![vec![q(2), q(1)], vec![q(1), q(2)]]).unwrap();
        let c3 =
            CovarianceForm::from_sigma(vec![vec![q(4), q(0)], vec![q(0), q(1)]]).unwrap();
        let w = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        let model = MixtureModel::new(
            vec![c1.clone(), c2.clone(), c3.clone()],
            vec![w(1, 6), w(2, 6), w(3, 6)],
        )
        .unwrap();

        // Affine in the weights: the form is the weight-combination of the
        // single-component forms.
        let combined = mixture_moment_form(&model, 6);
        let mut by_parts = Form::zero(Rationals, 2, 6);
        for (c, weight) in model.components().iter().zip(model.weights()) {
            let single =
                MixtureModel::new(vec![c.clone()], vec![BigRational::one()]).unwrap();
            by_parts = by_parts
                .add(&mixture_moment_form(&single, 6).scale(weight))
                .unwrap();
        }
        assert_eq!(combined, by_parts);

        // Permutation equivariance: reordering components with their
        // weights leaves the moment form unchanged.
        let permuted = MixtureModel::new(
            vec![c3, c1, c2],
            vec![w(3, 6), w(1, 6), w(2, 6)],
        )
        .unwrap();
        assert_eq!(mixture_moment_form(&permuted, 6), combined);
        assert_eq!(
            moment_of_monomial(&permuted, &Monomial::new(vec![4, 2])).unwrap(),
            moment_of_monomial(&model, &Monomial::new(vec![4, 2])).unwrap()
        );
    }

    #[test]
    fn single_moment_examples() {
        // n=2, identity covariance: E[Y1^4 Y2^2] = 3.
        let c = CovarianceForm::from_sigma(identity_sigma(2)).unwrap();
        let model = MixtureModel::new(vec![c], uniform_weights(1)).unwrap();
        assert_eq!(
            moment_of_monomial(&model, &Monomial::new(vec![4, 2])).unwrap(),
            q(3)
        );

        // Variance and covariance readouts.
        let s = vec![vec![q(5), q(7)], vec![q(7), q(11)]];
        let c = CovarianceForm::from_sigma(s).unwrap();
        let model = MixtureModel::new(vec![c], uniform_weights(1)).unwrap();
        assert_eq!(
            moment_of_monomial(&model, &Monomial::new(vec![2, 0])).unwrap(),
            q(5)
        );
        assert_eq!(
            moment_of_monomial(&model, &Monomial::new(vec![1, 1])).unwrap(),
            q(7)
        );
        // Odd total degree.
        assert_eq!(
            moment_of_monomial(&model, &Monomial::new(vec![2, 1])).unwrap(),
            q(0)
        );
    }

    #[test]
    fn isserlis_matches_series_route() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(37);
        for _ in 0..15 {
            let n = rng.random_range(1..=3);
            let sigma = random_psd_sigma(n, &mut rng);
            let c = CovarianceForm::from_sigma(sigma.clone()).unwrap();
            let model = MixtureModel::new(vec![c], uniform_weights(1)).unwrap();
            for degree in [2u32, 4, 6] {
                for alpha in monomials_of_degree(n, degree) {
                    assert_eq!(
                        moment_of_monomial(&model, &alpha).unwrap(),
                        isserlis_oracle(&sigma, &alpha).unwrap(),
                        "alpha = {alpha:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn isserlis_counts_matchings() {
        // One variable, unit variance: E[Y^6] = 5!! = 15 matchings.
        let sigma = identity_sigma(1);
        assert_eq!(
            isserlis_oracle(&sigma, &Monomial::new(vec![6])).unwrap(),
            q(15)
        );
        let sigma = vec![vec![q(9)]];
        assert_eq!(
            isserlis_oracle(&sigma, &Monomial::new(vec![2])).unwrap(),
            q(9)
        );
        assert!(isserlis_oracle(&identity_sigma(1), &Monomial::new(vec![12])).is_err());
    }

    #[test]
    fn directional_law() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(41);
        for _ in 0..5 {
            let n = rng.random_range(1..=3);
            let sigma = random_psd_sigma(n, &mut rng);
            let c = CovarianceForm::from_sigma(sigma.clone()).unwrap();
            let model = MixtureModel::new(vec![c], uniform_weights(1)).unwrap();
            let x: Vec<BigRational> = (0..n).map(|_| q(rng.random_range(-5i64..=5))).collect();
            // x' Sigma x
            let mut quad = BigRational::zero();
            for i in 0..n {
                for j in 0..n {
                    quad += &x[i] * &sigma[i][j] * &x[j];
                }
            }
            for d in 1..=4u32 {
                let lhs = directional_moment(&model, &x, 2 * d).unwrap();
                let mut rhs = BigRational::from_integer(double_factorial_odd(d));
                for _ in 0..d {
                    rhs *= &quad;
                }
                assert_eq!(lhs, rhs, "n = {n}, d = {d}");
            }
        }
    }

    #[test]
    fn weight_recovery_round_trip() {
        let q1 =
            CovarianceForm::from_sigma(vec![vec![q(2), q(1)], vec![q(1), q(3)]]).unwrap();
        let q2 =
            CovarianceForm::from_sigma(vec![vec![q(5), q(-2)], vec![q(-2), q(1)]]).unwrap();
        let third = BigRational::new(BigInt::one(), BigInt::from(3));
        let two_thirds = BigRational::new(BigInt::from(2), BigInt::from(3));
        let lambda = [third.clone(), two_thirds.clone()];
        let m_lower = q1
            .quadratic()
            .power(2)
            .scale(&lambda[0])
            .add(&q2.quadratic().power(2).scale(&lambda[1]))
            .unwrap();
        let scaled = vec![
            ScaledForm {
                scale_dth_power: lambda[0].clone(),
                form: q1.quadratic().clone(),
            },
            ScaledForm {
                scale_dth_power: lambda[1].clone(),
                form: q2.quadratic().clone(),
            },
        ];
        let rec = recover_mixing_weights(&scaled, &m_lower, 3).unwrap();
        assert_eq!(rec.weights, lambda.to_vec());
        assert_eq!(rec.representatives[0], *q1.quadratic());
        assert_eq!(rec.representatives[1], *q2.quadratic());
        assert!(rec.statistical);
    }

    #[test]
    fn weight_recovery_uniform_case() {
        let q1 = CovarianceForm::from_sigma(identity_sigma(2)).unwrap();
        let q2 =
            CovarianceForm::from_sigma(vec![vec![q(3), q(1)], vec![q(1), q(2)]]).unwrap();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let m_lower = q1
            .quadratic()
            .power(2)
            .scale(&half)
            .add(&q2.quadratic().power(2).scale(&half))
            .unwrap();
        let scaled: Vec<ScaledForm> = [&q1, &q2]
            .iter()
            .map(|c| ScaledForm {
                scale_dth_power: half.clone(),
                form: c.quadratic().clone(),
            })
            .collect();
        let rec = recover_mixing_weights(&scaled, &m_lower, 3).unwrap();
        assert_eq!(rec.weights, vec![half.clone(), half]);
        assert_eq!(rec.representatives[0], *q1.quadratic());
    }

    #[test]
    fn weight_recovery_detects_inconsistency() {
        let q1 =
            CovarianceForm::from_sigma(vec![vec![q(2), q(1)], vec![q(1), q(3)]]).unwrap();
        let q2 =
            CovarianceForm::from_sigma(vec![vec![q(5), q(-2)], vec![q(-2), q(1)]]).unwrap();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut m_lower = q1
            .quadratic()
            .power(2)
            .scale(&half)
            .add(&q2.quadratic().power(2).scale(&half))
            .unwrap();
        // Perturb outside span{q1^2, q2^2}: the span has dimension 2 in the
        // 5-dimensional quartics, so some basis monomial escapes it.
        for mono in monomials_of_degree(2, 4) {
            let bump = Form::from_terms(Rationals, 2, 4, [(mono, q(1))]).unwrap();
            let candidate = m_lower.add(&bump).unwrap();
            let scaled: Vec<ScaledForm> = [&q1, &q2]
                .iter()
                .map(|c| ScaledForm {
                    scale_dth_power: half.clone(),
                    form: c.quadratic().clone(),
                })
                .collect();
            if let Err(Error::Inconsistent(_)) = recover_mixing_weights(&scaled, &candidate, 3) {
                return;
            }
            m_lower = candidate;
        }
        panic!("no perturbation escaped the span");
    }

    #[test]
    fn weight_recovery_rejects_dependent_powers() {
        let q1 = CovarianceForm::from_sigma(identity_sigma(2)).unwrap();
        let doubled = q1.quadratic().scale(&q(2));
        let scaled = vec![
            ScaledForm {
                scale_dth_power: q(1),
                form: q1.quadratic().clone(),
            },
            ScaledForm {
                scale_dth_power: q(1),
                form: doubled,
            },
        ];
        let m_lower = q1.quadratic().power(2);
        assert!(matches!(
            recover_mixing_weights(&scaled, &m_lower, 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn mixture_model_validation() {
        let c = CovarianceForm::from_sigma(identity_sigma(2)).unwrap();
        assert!(MixtureModel::new(vec![c.clone()], vec![q(1)]).is_ok());
        assert!(MixtureModel::new(vec![c.clone()], vec![q(2)]).is_err());
        assert!(MixtureModel::new(vec![c.clone()], vec![q(-1), q(2)]).is_err());
        let indefinite =
            CovarianceForm::from_sigma(vec![vec![q(1), q(3)], vec![q(3), q(1)]]).unwrap();
        assert!(MixtureModel::new(vec![indefinite], vec![q(1)]).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let c1 = CovarianceForm::from_sigma(identity_sigma(2)).unwrap();
        let c2 =
            CovarianceForm::from_sigma(vec![vec![q(3), q(1)], vec![q(1), q(2)]]).unwrap();
        let model = MixtureModel::new(
            vec![c1, c2],
            vec![
                BigRational::new(BigInt::one(), BigInt::from(4)),
                BigRational::new(BigInt::from(3), BigInt::from(4)),
            ],
        )
        .unwrap();
        let js = serde_json::to_string(&model).unwrap();
        let back: MixtureModel = serde_json::from_str(&js).unwrap();
        assert_eq!(model, back);

        let bad = r#"{"n":2,"components":[{"sigma":[["1","0"],["0","-1"]]}],"weights":["1"]}"#;
        assert!(serde_json::from_str::<MixtureModel>(bad).is_err());
    }
}

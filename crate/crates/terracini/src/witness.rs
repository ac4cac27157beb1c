//! The binomial witness set and the two certificates built on it: tangent
//! skewness and a zero-dimensional tangential contact locus.
//!
//! The witness set `B_n` consists of `X1^2` together with `(Xi+Xj)^2` for
//! all `i < j`, giving `binom(n,2) + 1` quadratics. The contact locus of a
//! tuple with skew tangent spaces is the set of forms `p` whose whole
//! tangent space lies inside the span `W` of the tangent spaces at the
//! tuple. Writing `p = q_j + eps*v` and expanding `p^(d-1) * h` to first
//! order in `eps` turns "locally zero-dimensional at `q_j`" into a linear
//! condition: the kernel of
//!
//! ```text
//!     Phi_j : v  |->  ( q_j^(d-2) * v * m_t  mod W )  over degree-k monomials m_t
//! ```
//!
//! must be exactly the line spanned by `q_j` (its dimension is always at
//! least 1 because `q_j^(d-1) * m_t` lies in `W` by construction). Kernel
//! dimension 1 at every point of the tuple, together with skewness, is the
//! specific-witness criterion for generic identifiability: a single tuple
//! with these two properties certifies that a general sum of `m` d-th
//! powers has a unique decomposition.
//!
//! Both checks are exact. Over a prime field they remain sound as
//! certificates: the ranks involved specialize from the rationals, so full
//! tangent rank mod p forces full tangent rank over the rationals, and then
//! kernel dimension 1 mod p forces kernel dimension 1 over the rationals.
//! Only *failures* over a prime field are merely probabilistic evidence.

use serde::Serialize;

use crate::exactla::{span, ExactMatrix, SubspaceBasis};
use crate::field::Field;
use crate::polyring::{dim_graded_piece, monomials_of_degree, Form};
use crate::secant::{check_skewness, monomial_form, tangent_generators, ProblemParams};
use crate::Error;

/// The witness quadratics in dimension `n`: `X1^2` first, then `(Xi+Xj)^2`
/// in lexicographic `(i, j)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialSet<F: Field> {
    pub n: usize,
    pub forms: Vec<Form<F>>,
}

impl<F: Field> BinomialSet<F> {
    /// `binom(n,2) + 1`.
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Builds the binomial set `B_n`; requires `n >= 2`.
pub fn binomial_set<F: Field>(field: F, n: usize) -> Result<BinomialSet<F>, Error> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "the binomial set needs n >= 2, got {n}"
        )));
    }
    let mut forms = Vec::with_capacity(n * (n - 1) / 2 + 1);
    forms.push(Form::variable(field.clone(), n, 0).power(2));
    for i in 0..n {
        for j in (i + 1)..n {
            forms.push(Form::squared_binomial(field.clone(), n, i, j));
        }
    }
    Ok(BinomialSet { n, forms })
}

/// Result of the first-order contact-locus check at one base point.
#[derive(Debug, Clone, Serialize)]
pub struct ContactReport {
    pub base_point_index: usize,
    pub kernel_dim: usize,
    pub passes: bool,
    pub params: ProblemParams,
}

/// Three-valued certificate outcome. A tuple that fails the skewness
/// precondition is not a counterexample to identifiability, only an invalid
/// witness, so it gets its own verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "PRECONDITION-FAILED")]
    PreconditionFailed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "PASS"),
            Verdict::Fail => write!(f, "FAIL"),
            Verdict::PreconditionFailed => write!(f, "PRECONDITION-FAILED"),
        }
    }
}

/// Aggregate verdict of [`identifiability_certificate`].
#[derive(Debug, Clone, Serialize)]
pub struct CertificateVerdict {
    pub n: usize,
    pub m: usize,
    pub skew_rank: usize,
    pub expected: usize,
    pub contact_kernel_dims: Vec<usize>,
    pub verdict: Verdict,
}

impl CertificateVerdict {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Runs the first-order contact check at `points[index]`.
///
/// Requires the tangent spaces at the tuple to be skew and fails with a
/// precondition error otherwise (the contact locus is only defined for
/// tuples with skew tangent spaces). `kernel_dim == 1` certifies that the
/// tangential contact locus has local dimension zero at the base point.
pub fn contact_tangent_kernel<F: Field>(
    points: &[Form<F>],
    index: usize,
    d: u32,
) -> Result<ContactReport, Error> {
    if index >= points.len() {
        return Err(Error::InvalidInput(format!(
            "base point index {index} out of range for {} points",
            points.len()
        )));
    }
    let report = check_skewness(points, d)?;
    if !report.skew {
        return Err(Error::Precondition(format!(
            "tangent spaces are not skew (rank {} < expected {})",
            report.rank, report.expected
        )));
    }
    let w = tangent_span(points, d)?;
    contact_kernel_at(points, index, d, &w, report.params)
}

fn tangent_span<F: Field>(points: &[Form<F>], d: u32) -> Result<SubspaceBasis<F>, Error> {
    let field = points[0].field().clone();
    let n = points[0].n_vars();
    let k = points[0].degree();
    let ambient = dim_graded_piece(n, k * d);
    let mut vectors = Vec::with_capacity(points.len() * dim_graded_piece(n, k));
    for p in points {
        for g in tangent_generators(p, d)? {
            vectors.push(g.densify());
        }
    }
    span(field, ambient, &vectors)
}

fn contact_kernel_at<F: Field>(
    points: &[Form<F>],
    index: usize,
    d: u32,
    w: &SubspaceBasis<F>,
    params: ProblemParams,
) -> Result<ContactReport, Error> {
    let field = points[0].field().clone();
    let n = points[0].n_vars();
    let k = points[0].degree();
    let basis_k = monomials_of_degree(n, k);
    let dim_k = basis_k.len();

    // Residuals only carry information at the non-pivot coordinates of W.
    let free_cols: Vec<usize> = {
        let mut pivot = vec![false; w.ambient_dim()];
        for &p in w.pivot_cols() {
            pivot[p] = true;
        }
        (0..w.ambient_dim()).filter(|&c| !pivot[c]).collect()
    };

    // Phi is linear in v, so evaluate it on the monomial basis of S^k. Each
    // needed product q^(d-2) * (v_s * m_t) depends only on the degree-2k
    // monomial v_s * m_t; cache the reduced residuals by that monomial.
    let base = points[index].power(d - 2);
    let mut residuals = std::collections::BTreeMap::new();
    for u in monomials_of_degree(n, 2 * k) {
        let uf = monomial_form(field.clone(), n, u.clone());
        let product = base.mul(&uf)?;
        let reduced = w.reduce(&product.densify())?;
        let compact: Vec<F::Elem> = free_cols.iter().map(|&c| reduced[c].clone()).collect();
        residuals.insert(u, compact);
    }

    let mut columns = Vec::with_capacity(dim_k);
    for v in &basis_k {
        let mut col = Vec::with_capacity(dim_k * free_cols.len());
        for t in &basis_k {
            col.extend_from_slice(&residuals[&v.mul(t)]);
        }
        columns.push(col);
    }
    let phi = ExactMatrix::from_columns(field, columns)?;
    let kernel_dim = phi.kernel().dim();
    assert!(
        kernel_dim >= 1,
        "the base point itself always lies in the contact kernel"
    );
    Ok(ContactReport {
        base_point_index: index,
        kernel_dim,
        passes: kernel_dim == 1,
        params,
    })
}

/// Runs the full specific-witness certificate on the binomial set `B_n`
/// with `d = 3`: skewness of the tangent spaces, then the first-order
/// contact check at every point. `PASS` certifies generic identifiability
/// of sums of `binom(n,2) + 1` cubes of quadratics in `n` variables.
pub fn identifiability_certificate<F: Field>(
    field: F,
    n: usize,
) -> Result<CertificateVerdict, Error> {
    certificate_for_points(&binomial_set(field, n)?.forms, 3)
}

/// The same certificate for an arbitrary tuple of degree-k forms.
pub fn certificate_for_points<F: Field>(
    points: &[Form<F>],
    d: u32,
) -> Result<CertificateVerdict, Error> {
    let report = check_skewness(points, d)?;
    let n = report.params.n;
    let m = report.params.m;
    if !report.skew {
        return Ok(CertificateVerdict {
            n,
            m,
            skew_rank: report.rank,
            expected: report.expected,
            contact_kernel_dims: Vec::new(),
            verdict: Verdict::PreconditionFailed,
        });
    }
    // W is shared read-only across the per-point checks.
    let w = tangent_span(points, d)?;
    let mut dims = Vec::with_capacity(points.len());
    for index in 0..points.len() {
        dims.push(contact_kernel_at(points, index, d, &w, report.params)?.kernel_dim);
    }
    let verdict = if dims.iter().all(|&k| k == 1) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(CertificateVerdict {
        n,
        m,
        skew_rank: report.rank,
        expected: report.expected,
        contact_kernel_dims: dims,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};
    use num_rational::BigRational;

    #[test]
    fn binomial_set_sizes_and_order() {
        let b2 = binomial_set(Rationals, 2).unwrap();
        assert_eq!(b2.len(), 2);
        assert_eq!(b2.forms[0], Form::variable(Rationals, 2, 0).power(2));
        assert_eq!(b2.forms[1], Form::squared_binomial(Rationals, 2, 0, 1));

        let b3 = binomial_set(Rationals, 3).unwrap();
        assert_eq!(b3.len(), 4);
        assert_eq!(b3.forms[1], Form::squared_binomial(Rationals, 3, 0, 1));
        assert_eq!(b3.forms[2], Form::squared_binomial(Rationals, 3, 0, 2));
        assert_eq!(b3.forms[3], Form::squared_binomial(Rationals, 3, 1, 2));

        let b5 = binomial_set(Rationals, 5).unwrap();
        assert_eq!(b5.len(), 11);

        assert!(binomial_set(Rationals, 1).is_err());
    }

    #[test]
    fn substitution_stability_of_the_witness_set() {
        // {p(X1,...,X(n-1),X1) : p in B_n} = B_(n-1) u {4 X1^2} as sets.
        for n in 3..=6usize {
            let bn = binomial_set(Rationals, n).unwrap();
            let mut map: Vec<usize> = (0..n - 1).collect();
            map.push(0);
            let mut images: Vec<Vec<BigRational>> = bn
                .forms
                .iter()
                .map(|f| f.substitute(n - 1, &map).unwrap().densify())
                .collect();
            images.sort();
            images.dedup();

            let mut expected: Vec<Vec<BigRational>> = binomial_set(Rationals, n - 1)
                .unwrap()
                .forms
                .iter()
                .map(|f| f.densify())
                .collect();
            let four_x1sq = Form::variable(Rationals, n - 1, 0)
                .power(2)
                .scale(&Rationals.from_i64(4));
            expected.push(four_x1sq.densify());
            expected.sort();
            expected.dedup();
            assert_eq!(images, expected, "stability fails at n = {n}");
        }
    }

    #[test]
    fn base_point_always_in_kernel() {
        let b3 = binomial_set(Rationals, 3).unwrap();
        let w = tangent_span(&b3.forms, 3).unwrap();
        // q_j^(d-2) * q_j * m_t = q_j^(d-1) * m_t lies in W by construction.
        for q in &b3.forms {
            for t in monomials_of_degree(3, 2) {
                let tf = monomial_form(Rationals, 3, t);
                let v = q.power(2).mul(&tf).unwrap().densify();
                let (inside, _) = w.contains(&v).unwrap();
                assert!(inside);
            }
        }
    }

    #[test]
    fn contact_check_small_cases() {
        for n in 2..=3usize {
            let bn = binomial_set(Rationals, n).unwrap();
            for j in 0..bn.len() {
                let report = contact_tangent_kernel(&bn.forms, j, 3).unwrap();
                assert_eq!(report.kernel_dim, 1, "n = {n}, point {j}");
                assert!(report.passes);
            }
        }
    }

    #[test]
    fn generic_rational_pair_has_trivial_contact_kernel() {
        // Two generic quadratics in two variables sit inside the
        // identifiable range m = 2 = binom(2,2) + 1.
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(53);
        for _ in 0..5 {
            let p1 = Form::random_integer(Rationals, 2, 2, -9, 9, &mut rng);
            let p2 = Form::random_integer(Rationals, 2, 2, -9, 9, &mut rng);
            if p1.is_zero() || p2.is_zero() {
                continue;
            }
            let points = [p1, p2];
            match contact_tangent_kernel(&points, 0, 3) {
                Ok(report) => {
                    assert_eq!(report.kernel_dim, 1);
                    assert!(report.passes);
                }
                // A degenerate draw may fail skewness; genericity only
                // promises almost-always.
                Err(Error::Precondition(_)) => continue,
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn non_skew_tuple_is_a_precondition_error() {
        let q = Form::squared_binomial(Rationals, 2, 0, 1);
        let doubled = q.scale(&Rationals.from_i64(2));
        let err = contact_tangent_kernel(&[q, doubled], 0, 3).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn certificate_small_cases_pass() {
        for n in 2..=3usize {
            let v = identifiability_certificate(Rationals, n).unwrap();
            assert!(v.passed(), "n = {n}");
            assert_eq!(v.m, n * (n - 1) / 2 + 1);
            assert_eq!(v.skew_rank, v.expected);
            assert!(v.contact_kernel_dims.iter().all(|&k| k == 1));
        }
    }

    #[test]
    fn certificate_precondition_failed_verdict() {
        let q = Form::squared_binomial(PrimeField::default_witness(), 2, 0, 1);
        let doubled = q.scale(&PrimeField::default_witness().from_i64(2));
        let v = certificate_for_points(&[q, doubled], 3).unwrap();
        assert_eq!(v.verdict, Verdict::PreconditionFailed);
        assert!(v.contact_kernel_dims.is_empty());
    }

    #[test]
    fn certificate_invariant_under_permutation_and_scaling() {
        let b3 = binomial_set(Rationals, 3).unwrap();
        let baseline = certificate_for_points(&b3.forms, 3).unwrap();
        assert!(baseline.passed());

        let mut permuted = b3.forms.clone();
        permuted.rotate_left(2);
        let v = certificate_for_points(&permuted, 3).unwrap();
        assert_eq!(v.verdict, Verdict::Pass);
        assert_eq!(v.skew_rank, baseline.skew_rank);

        let scaled: Vec<_> = b3
            .forms
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.scale(&BigRational::new(
                    num_bigint::BigInt::from(2 + i as i64),
                    num_bigint::BigInt::from(3),
                ))
            })
            .collect();
        let v = certificate_for_points(&scaled, 3).unwrap();
        assert_eq!(v.verdict, Verdict::Pass);
        assert_eq!(v.skew_rank, baseline.skew_rank);
    }

    #[test]
    fn verdict_json_shape() {
        let v = identifiability_certificate(PrimeField::default_witness(), 2).unwrap();
        let js = serde_json::to_value(&v).unwrap();
        assert_eq!(js["n"], 2);
        assert_eq!(js["m"], 2);
        assert_eq!(js["verdict"], "PASS");
        assert_eq!(js["contact_kernel_dims"].as_array().unwrap().len(), 2);
    }
}

//! Tangent spaces of the power variety and Terracini rank computations.
//!
//! The variety `V_{k,d}` of d-th powers of degree-k forms has tangent space
//! `{h * p^(d-1) : h in S^k}` at `p^d`. By Terracini's lemma the tangent
//! space of the m-th secant variety at a general point of the span of
//! `p_1^d, ..., p_m^d` is the sum of the individual tangent spaces, so the
//! secant has the expected dimension exactly when the stacked tangent
//! matrix has rank `m * dim S^k`. A tuple realizing that rank is a witness
//! that the parameterizing sum map is generically finite.

use rand::SeedableRng;
use serde::Serialize;

use crate::exactla::ExactMatrix;
use crate::field::{Field, FieldChoice, FieldLabel, PrimeField, Rationals};
use crate::polyring::{dim_graded_piece, monomials_of_degree, Form, Monomial};
use crate::Error;

/// The integers governing every dimension formula: forms of degree `k` in
/// `n` variables, raised to the `d`-th power, `m` summands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProblemParams {
    pub n: usize,
    pub k: u32,
    pub d: u32,
    pub m: usize,
}

impl ProblemParams {
    pub fn new(n: usize, k: u32, d: u32, m: usize) -> Result<Self, Error> {
        if n < 1 || k < 1 || d < 2 || m < 1 {
            return Err(Error::InvalidInput(format!(
                "need n >= 1, k >= 1, d >= 2, m >= 1; got n={n}, k={k}, d={d}, m={m}"
            )));
        }
        Ok(ProblemParams { n, k, d, m })
    }

    /// dim S^k, the dimension of one tangent space.
    pub fn dim_k(&self) -> usize {
        dim_graded_piece(self.n, self.k)
    }

    /// dim S^{kd}, the ambient graded piece of the powers.
    pub fn dim_kd(&self) -> usize {
        dim_graded_piece(self.n, self.k * self.d)
    }

    /// `m * dim S^k`, the rank certifying skew tangent spaces.
    pub fn expected_rank(&self) -> usize {
        self.m * self.dim_k()
    }
}

/// Outcome of a tangent-space rank computation.
#[derive(Debug, Clone, Serialize)]
pub struct TangentReport {
    pub params: ProblemParams,
    pub rank: usize,
    pub expected: usize,
    pub skew: bool,
    pub field_used: FieldLabel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Spanning set of the tangent space to `V_{k,d}` at `p^d`: the products
/// `p^(d-1) * m_j` over the degree-k monomials in canonical order.
pub fn tangent_generators<F: Field>(p: &Form<F>, d: u32) -> Result<Vec<Form<F>>, Error> {
    if p.is_zero() {
        return Err(Error::InvalidInput(
            "tangent space is undefined at the zero form".into(),
        ));
    }
    if d < 2 {
        return Err(Error::InvalidInput(format!("need d >= 2, got {d}")));
    }
    let k = p.degree();
    let base = p.power(d - 1);
    let field = p.field().clone();
    monomials_of_degree(p.n_vars(), k)
        .into_iter()
        .map(|m| {
            let mf = Form::from_terms(field.clone(), p.n_vars(), k, [(m, field.one())])?;
            base.mul(&mf)
        })
        .collect()
}

/// The stacked tangent matrix at the given points: `dim S^{kd}` rows,
/// `m * dim S^k` columns, with column block `i` the densified tangent
/// generators at `points[i]`.
pub fn terracini_matrix<F: Field>(points: &[Form<F>], d: u32) -> Result<ExactMatrix<F>, Error> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidInput("need at least one point".into()))?;
    let n = first.n_vars();
    let k = first.degree();
    let field = first.field().clone();
    for p in points {
        if p.n_vars() != n || p.degree() != k {
            return Err(Error::InvalidInput(
                "all points must share the variable count and degree".into(),
            ));
        }
        if *p.field() != field {
            return Err(Error::FieldMismatch(
                "points live over different fields".into(),
            ));
        }
    }
    let mut columns = Vec::with_capacity(points.len() * dim_graded_piece(n, k));
    for p in points {
        for g in tangent_generators(p, d)? {
            columns.push(g.densify());
        }
    }
    ExactMatrix::from_columns(field, columns)
}

/// Decides whether the tangent spaces at the given forms are skew, i.e.
/// whether their sum has the full expected dimension `m * dim S^k`. A `skew`
/// verdict certifies that the m-th secant fiber map is generically finite
/// at this tuple.
pub fn check_skewness<F: Field>(points: &[Form<F>], d: u32) -> Result<TangentReport, Error> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidInput("need at least one point".into()))?;
    let params = ProblemParams::new(first.n_vars(), first.degree(), d, points.len())?;
    let matrix = terracini_matrix(points, d)?;
    let rank = matrix.rank();
    let expected = params.expected_rank();
    Ok(TangentReport {
        params,
        rank,
        expected,
        skew: rank == expected,
        field_used: first.field().label(),
        seed: None,
    })
}

/// Samples `trials` random m-tuples of forms with independent uniform
/// integer coefficients in [-50, 50] and reports the maximal Terracini rank
/// observed. Rank is lower-semicontinuous, so the maximum over trials is a
/// valid lower bound for the generic rank, and reaching the expected rank
/// certifies non-defectivity for these parameters.
pub fn random_terracini_probe(
    params: ProblemParams,
    trials: u32,
    seed: u64,
    field: FieldChoice,
) -> Result<TangentReport, Error> {
    if trials < 1 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let expected = params.expected_rank();
    let mut best = 0usize;
    for trial in 0..trials {
        let trial_seed = seed.wrapping_add(trial as u64);
        let rank = match field {
            FieldChoice::Rational => probe_trial(Rationals, params, trial_seed)?,
            FieldChoice::Prime(p) => probe_trial(PrimeField::new(p)?, params, trial_seed)?,
        };
        best = best.max(rank);
        if best == expected {
            break;
        }
    }
    Ok(TangentReport {
        params,
        rank: best,
        expected,
        skew: best == expected,
        field_used: field.label(),
        seed: Some(seed),
    })
}

fn probe_trial<F: Field>(field: F, params: ProblemParams, seed: u64) -> Result<usize, Error> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(params.m);
    while points.len() < params.m {
        let f = Form::random_integer(field.clone(), params.n, params.k, -50, 50, &mut rng);
        if !f.is_zero() {
            points.push(f);
        }
    }
    Ok(terracini_matrix(&points, params.d)?.rank())
}

/// Convenience: the degree-k monomial `m` as a form over `field`.
pub(crate) fn monomial_form<F: Field>(field: F, n: usize, m: Monomial) -> Form<F> {
    let one = field.one();
    let degree = m.degree();
    Form::from_terms(field, n, degree, [(m, one)]).expect("monomial is homogeneous")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::binomial_set;

    #[test]
    fn tangent_generators_single_variable() {
        let p = Form::variable(Rationals, 1, 0).power(2);
        let gens = tangent_generators(&p, 3).unwrap();
        assert_eq!(gens.len(), 1);
        assert_eq!(gens[0], Form::variable(Rationals, 1, 0).power(6));
    }

    #[test]
    fn tangent_generators_two_variables() {
        let p = Form::variable(Rationals, 2, 0).power(2);
        let gens = tangent_generators(&p, 3).unwrap();
        // X1^4 times X1^2, X1 X2, X2^2 in canonical order.
        let x1 = Form::variable(Rationals, 2, 0);
        let x2 = Form::variable(Rationals, 2, 1);
        assert_eq!(gens.len(), 3);
        assert_eq!(gens[0], x1.power(6));
        assert_eq!(gens[1], x1.power(5).mul(&x2).unwrap());
        assert_eq!(gens[2], x1.power(4).mul(&x2.power(2)).unwrap());
    }

    #[test]
    fn generators_of_generic_point_span_expected_dimension() {
        let p = Form::squared_binomial(Rationals, 2, 0, 1);
        let gens = tangent_generators(&p, 3).unwrap();
        let cols: Vec<_> = gens.iter().map(|g| g.densify()).collect();
        let m = ExactMatrix::from_columns(Rationals, cols).unwrap();
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn zero_point_is_rejected() {
        let z: Form<Rationals> = Form::zero(Rationals, 2, 2);
        assert!(tangent_generators(&z, 3).is_err());
    }

    #[test]
    fn terracini_matrix_shapes() {
        let b2 = binomial_set(Rationals, 2).unwrap();
        let m = terracini_matrix(&b2.forms, 3).unwrap();
        assert_eq!((m.rows(), m.cols()), (7, 6));
        assert_eq!(m.rank(), 6);

        let single = Form::variable(Rationals, 3, 0).power(2);
        let m = terracini_matrix(std::slice::from_ref(&single), 3).unwrap();
        assert_eq!((m.rows(), m.cols()), (28, 6));
        assert_eq!(m.rank(), 6, "multiplication by X1^4 is injective");
    }

    #[test]
    fn proportional_points_are_never_skew() {
        let q = Form::squared_binomial(Rationals, 2, 0, 1);
        let doubled = q.scale(&Rationals.from_i64(2));
        let report = check_skewness(&[q, doubled], 3).unwrap();
        assert!(!report.skew);
        assert_eq!(report.rank, 3);
    }

    #[test]
    fn pigeonhole_defect() {
        // n=2, k=2, d=3, m=3: expected 9 exceeds dim S^6 = 7.
        let params = ProblemParams::new(2, 2, 3, 3).unwrap();
        let report = random_terracini_probe(
            params,
            4,
            1,
            FieldChoice::Prime(crate::DEFAULT_WITNESS_PRIME),
        )
        .unwrap();
        assert!(!report.skew);
        assert!(report.rank <= 7);
    }

    #[test]
    fn monotone_rank_in_m() {
        use rand::Rng;
        let fp = PrimeField::default_witness();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let n = rng.random_range(2..=3);
            let mut points = Vec::new();
            let mut last = 0;
            for _ in 0..4 {
                points.push(Form::random_integer(fp, n, 2, -50, 50, &mut rng));
                let rank = terracini_matrix(&points, 3).unwrap().rank();
                assert!(rank >= last);
                last = rank;
            }
        }
    }

    #[test]
    fn probe_trivial_single_point_one_variable() {
        let params = ProblemParams::new(1, 2, 3, 1).unwrap();
        let report =
            random_terracini_probe(params, 1, 3, FieldChoice::Rational).unwrap();
        assert_eq!(report.rank, 1);
        assert!(report.skew);
    }

    #[test]
    fn report_serializes_with_field_label() {
        let b2 = binomial_set(PrimeField::default_witness(), 2).unwrap();
        let report = check_skewness(&b2.forms, 3).unwrap();
        let js = serde_json::to_value(&report).unwrap();
        assert_eq!(js["field_used"], "prime-field");
        assert_eq!(js["rank"], 6);
        assert_eq!(js["params"]["m"], 2);
    }
}

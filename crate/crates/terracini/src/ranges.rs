//! Closed-form bounds: the truncated Hilbert series of general power
//! ideals, the Nenashev coefficient bound, the non-defectivity-implies-
//! identifiability bound with its side condition, and the tables behind the
//! range plots. Everything here is exact integer and rational arithmetic.
//!
//! Conventions: a bound of the shape `m <= expr` with a non-integer `expr`
//! is reported as `m <= floor(expr)`, since `m` counts summands. The
//! expected generic rank column is `ceil(dim S^{kd} / dim S^k)`, the
//! smallest summand count whose parameter space reaches the ambient
//! dimension.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::Error;

/// binom(n, k) over arbitrary-precision integers.
pub fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// dim S^degree of an n-variable polynomial ring, as a big integer.
pub fn dim_piece_big(n: usize, degree: u32) -> BigUint {
    binomial_big(n - 1 + degree as usize, n - 1)
}

/// A power series truncated before its first non-positive coefficient:
/// coefficients are strictly positive up to the truncation point and
/// identically zero afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coefficients: Vec<BigUint>,
}

impl TruncatedSeries {
    pub fn coefficients(&self) -> &[BigUint] {
        &self.coefficients
    }

    /// Coefficient of `T^j`; zero beyond the stored range.
    pub fn coefficient(&self, j: usize) -> BigUint {
        self.coefficients.get(j).cloned().unwrap_or_default()
    }

    /// Index of the first zero coefficient, if the series was truncated
    /// within the computed range.
    pub fn truncation_index(&self) -> Option<usize> {
        self.coefficients.iter().position(|c| c.is_zero())
    }
}

/// Expands `prod_i (1 - T^{d_i}) * sum_j binom(n-1+j, n-1) T^j` up to
/// `T^max_degree` and truncates it before the first non-positive
/// coefficient. For a general ideal with generators of the given degrees
/// this is the conjectural Hilbert series of the quotient, and the
/// truncation point bounds where the generators' span fills the graded
/// piece.
pub fn froberg_series(n: usize, degrees: &[u32], max_degree: usize) -> TruncatedSeries {
    assert!(n >= 1, "need at least one variable");
    assert!(
        degrees.iter().all(|&d| d >= 1),
        "generator degrees must be positive"
    );
    // Numerator product with signed integer coefficients.
    let mut numerator: Vec<BigInt> = vec![BigInt::one()];
    for &d in degrees {
        let mut next = vec![BigInt::zero(); numerator.len() + d as usize];
        for (i, c) in numerator.iter().enumerate() {
            next[i] += c;
            next[i + d as usize] -= c;
        }
        numerator = next;
        numerator.truncate(max_degree + 1);
    }
    let mut coefficients = Vec::with_capacity(max_degree + 1);
    let mut truncated = false;
    for j in 0..=max_degree {
        if truncated {
            coefficients.push(BigUint::zero());
            continue;
        }
        let mut c = BigInt::zero();
        for (i, num) in numerator.iter().enumerate() {
            if i > j {
                break;
            }
            c += num * BigInt::from(dim_piece_big(n, (j - i) as u32));
        }
        if c.is_positive() {
            coefficients.push(c.to_biguint().expect("positive"));
        } else {
            truncated = true;
            coefficients.push(BigUint::zero());
        }
    }
    TruncatedSeries { coefficients }
}

/// An exact rational bound together with its integer floor.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalBound {
    pub value: BigRational,
}

impl RationalBound {
    pub fn floor(&self) -> BigInt {
        self.value.floor().to_integer()
    }
}

/// The coefficient bound `dim S^{kd} / dim S^k - dim S^k`: for up to that
/// many generic (d-1)-th powers the relevant Hilbert coefficient is as
/// predicted, so the tangent spaces are skew and the secant is
/// non-defective for `m <= floor(bound)`.
pub fn nenashev_bound(n: usize, k: u32, d: u32) -> RationalBound {
    assert!(n >= 1 && k >= 1 && d >= 2);
    let dim_k = BigInt::from(dim_piece_big(n, k));
    let dim_kd = BigInt::from(dim_piece_big(n, k * d));
    RationalBound {
        value: BigRational::new(dim_kd, dim_k.clone()) - BigRational::from_integer(dim_k),
    }
}

/// The identifiability bound `floor(dim S^{kd}/dim S^k - dim S^k - 1)`,
/// available only when the side condition
/// `2 (dim S^k - 1) < dim S^{kd}/dim S^k - dim S^k` holds; `None` otherwise.
pub fn identifiability_bound_general(n: usize, k: u32, d: u32) -> Option<BigInt> {
    let bound = nenashev_bound(n, k, d);
    let dim_k = BigInt::from(dim_piece_big(n, k));
    let side_lhs = BigRational::from_integer(BigInt::from(2) * (dim_k - BigInt::one()));
    if side_lhs < bound.value {
        Some((bound.value - BigRational::one()).floor().to_integer())
    } else {
        None
    }
}

/// The two sides of the side condition above, for reporting:
/// `(2 (dim S^k - 1), dim S^{kd}/dim S^k - dim S^k)`.
pub fn side_condition_values(n: usize, k: u32, d: u32) -> (BigInt, BigRational) {
    let dim_k = BigInt::from(dim_piece_big(n, k));
    (
        BigInt::from(2) * (dim_k - BigInt::one()),
        nenashev_bound(n, k, d).value,
    )
}

/// Left side of the powers-of-quadratics inequality:
/// `3 binom(n+1,2)^2 - 2 binom(n+1,2)`.
fn general_d_lhs(n: usize) -> BigInt {
    let a = BigInt::from(binomial_big(n + 1, 2));
    BigInt::from(3) * &a * &a - BigInt::from(2) * &a
}

/// Right side: `binom(n-1+2d, 2d)`, i.e. dim S^{2d} in n variables.
fn general_d_rhs(n: usize, d: u32) -> BigInt {
    BigInt::from(dim_piece_big(n, 2 * d))
}

/// Whether `(n, d)` satisfies the strict inequality delimiting the
/// identifiability region for d-th powers of quadratics.
pub fn general_d_holds(n: usize, d: u32) -> bool {
    general_d_lhs(n) < general_d_rhs(n, d)
}

const GENERAL_D_SCAN_CAP: usize = 100_000;

/// Smallest `n` for which the inequality holds at this `d`, together with
/// the identifiability bound there. `None` for `d = 2`, where squares are
/// never identifiable regardless of the inequality.
pub fn general_d_minimal_n(d: u32) -> Result<Option<(usize, BigInt)>, Error> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("need d >= 2, got {d}")));
    }
    if d == 2 {
        return Ok(None);
    }
    // The inequality is monotone in n for fixed d >= 3, so scan upward.
    for n in 1..GENERAL_D_SCAN_CAP {
        if general_d_holds(n, d) {
            let bound = identifiability_bound_general(n, 2, d)
                .expect("the inequality is exactly the side condition for k = 2");
            return Ok(Some((n, bound)));
        }
    }
    Ok(None)
}

/// Smallest `d >= 3` for which the inequality holds at this `n`; `None` for
/// `n = 1`, where both sides are constant and equal.
pub fn general_d_minimal_d(n: usize) -> Result<Option<u32>, Error> {
    if n < 1 {
        return Err(Error::InvalidInput("need n >= 1".into()));
    }
    if n == 1 {
        return Ok(None);
    }
    for d in 3..GENERAL_D_SCAN_CAP as u32 {
        if general_d_holds(n, d) {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// One row per power `d` of the region table: the minimal viable `n` and
/// the bound there.
#[derive(Debug, Clone)]
pub struct GeneralDRow {
    pub d: u32,
    pub minimal_n: Option<usize>,
    pub m_bound: Option<BigInt>,
}

pub fn general_d_table(d_max: u32) -> Result<Vec<GeneralDRow>, Error> {
    (2..=d_max)
        .map(|d| {
            let entry = general_d_minimal_n(d)?;
            Ok(GeneralDRow {
                d,
                minimal_n: entry.as_ref().map(|(n, _)| *n),
                m_bound: entry.map(|(_, b)| b),
            })
        })
        .collect()
}

/// One row of the identifiability-range table at fixed `(k, d)`.
#[derive(Debug, Clone)]
pub struct RangeRow {
    pub n: usize,
    pub k: u32,
    pub d: u32,
    /// Bound from non-defectivity plus the side condition, when available.
    pub cond1_bound: Option<BigInt>,
    /// The witness bound `binom(n,2) + 1`; only established for cubes of
    /// quadratics, quoted for `n <= 16` where it is the governing range.
    pub cond2_bound: Option<BigInt>,
    /// `ceil(dim S^{kd} / dim S^k)`.
    pub expected_generic_rank: BigUint,
    pub regime: String,
}

/// Rows for `n = 2..=n_max` at fixed `(k, d)`.
pub fn figure_tables(k: u32, d: u32, n_max: usize) -> Result<Vec<RangeRow>, Error> {
    if n_max < 2 {
        return Err(Error::InvalidInput("need n_max >= 2".into()));
    }
    if k < 1 || d < 2 {
        return Err(Error::InvalidInput(format!(
            "need k >= 1 and d >= 2, got k={k}, d={d}"
        )));
    }
    let mut rows = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let cond1 = if d == 2 {
            None
        } else {
            identifiability_bound_general(n, k, d)
        };
        let cond2 = if k == 2 && d == 3 && n <= 16 {
            Some(BigInt::from(binomial_big(n, 2)) + BigInt::one())
        } else {
            None
        };
        let dim_k = BigRational::from_integer(BigInt::from(dim_piece_big(n, k)));
        let dim_kd = BigRational::from_integer(BigInt::from(dim_piece_big(n, k * d)));
        let expected_generic_rank = (dim_kd / dim_k)
            .ceil()
            .to_integer()
            .to_biguint()
            .expect("positive");
        let regime = if d == 2 {
            "non-identifiable (square identity)".to_string()
        } else if cond2.is_some() {
            "condition-2".to_string()
        } else if cond1.is_some() {
            "condition-1".to_string()
        } else {
            "open".to_string()
        };
        rows.push(RangeRow {
            n,
            k,
            d,
            cond1_bound: cond1,
            cond2_bound: cond2,
            expected_generic_rank,
            regime,
        });
    }
    Ok(rows)
}

/// CSV with header `n,k,d,cond1_bound,cond2_bound,expected_generic_rank,regime`
/// and empty cells for absent bounds.
pub fn range_rows_to_csv(rows: &[RangeRow]) -> String {
    let mut out = String::from("n,k,d,cond1_bound,cond2_bound,expected_generic_rank,regime\n");
    for r in rows {
        let c1 = r.cond1_bound.as_ref().map_or(String::new(), |b| b.to_string());
        let c2 = r.cond2_bound.as_ref().map_or(String::new(), |b| b.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n, r.k, r.d, c1, c2, r.expected_generic_rank, r.regime
        ));
    }
    out
}

/// CSV with header `d,minimal_n,m_bound` for the general-d region table.
pub fn general_d_table_to_csv(rows: &[GeneralDRow]) -> String {
    let mut out = String::from("d,minimal_n,m_bound\n");
    for r in rows {
        let n = r.minimal_n.map_or(String::new(), |n| n.to_string());
        let b = r.m_bound.as_ref().map_or(String::new(), |b| b.to_string());
        out.push_str(&format!("{},{},{}\n", r.d, n, b));
    }
    out
}

/// A plain gnuplot script plotting the bound columns of a range CSV.
pub fn gnuplot_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key top left\n\
         set xlabel 'n'\n\
         set ylabel 'm'\n\
         set logscale y\n\
         plot '{csv_path}' every ::1 using 1:4 with linespoints title 'condition 1', \\\n\
         \x20    '{csv_path}' every ::1 using 1:5 with linespoints title 'condition 2', \\\n\
         \x20    '{csv_path}' every ::1 using 1:6 with lines title 'expected generic rank'\n"
    )
}

//! The `verify-paper` suite: every desk-scale claim the toolkit certifies,
//! run as independent checks with one canonical output line each.
//!
//! The quick level runs the prime-field rank certificates plus all integer
//! bound checks; the full level adds the exact rational certificates.
//! Checks run concurrently; the output order is canonical (sorted by check
//! id) regardless of scheduling.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use terracini::field::Field;
use terracini::gaussmix::{
    directional_moment, double_factorial_odd, isserlis_oracle, moment_of_monomial,
    random_psd_sigma, recover_mixing_weights, CovarianceForm, MixtureModel, ScaledForm,
};
use terracini::polyring::monomials_of_degree;
use terracini::ranges::{
    froberg_series, general_d_minimal_n, identifiability_bound_general, nenashev_bound,
    side_condition_values,
};
use terracini::secant::{check_skewness, random_terracini_probe, ProblemParams};
use terracini::witness::{binomial_set, certificate_for_points};
use terracini::{Error, FieldChoice, Form, PrimeField, Rationals, Verdict};

struct Ctx {
    prime: u64,
    seed: u64,
    /// Fault-injection hook: duplicate one witness point so that the
    /// skewness and contact checks must fail.
    duplicate_witness: bool,
}

type CheckFn = Box<dyn Fn(&Ctx) -> Result<String, String> + Send + Sync>;

struct Check {
    id: &'static str,
    description: &'static str,
    run: CheckFn,
}

fn check(
    id: &'static str,
    description: &'static str,
    run: impl Fn(&Ctx) -> Result<String, String> + Send + Sync + 'static,
) -> Check {
    Check {
        id,
        description,
        run: Box::new(run),
    }
}

pub fn cmd_verify_paper(
    full: bool,
    seed: u64,
    prime: u64,
    inject_fault: Option<&str>,
) -> Result<u8, Error> {
    let duplicate_witness = match inject_fault {
        None => false,
        Some("duplicate-witness") => true,
        Some(other) => {
            return Err(Error::InvalidInput(format!(
                "unknown fault {other:?}; known faults: duplicate-witness"
            )))
        }
    };
    let ctx = Ctx {
        prime,
        seed,
        duplicate_witness,
    };
    let mut suite = checks(full);
    suite.sort_by_key(|c| c.id);

    let started = Instant::now();
    let mut results: Vec<(usize, Result<String, String>, std::time::Duration)> = suite
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let t = Instant::now();
            let r = (c.run)(&ctx);
            (i, r, t.elapsed())
        })
        .collect();
    results.sort_by_key(|(i, _, _)| *i);

    let mut failures = 0usize;
    for (i, outcome, elapsed) in &results {
        let c = &suite[*i];
        match outcome {
            Ok(detail) => {
                println!("[PASS] {:<28} {} — {detail} ({elapsed:.1?})", c.id, c.description)
            }
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {:<28} {} — {detail} ({elapsed:.1?})", c.id, c.description)
            }
        }
    }
    println!(
        "{} of {} checks passed in {:.1?} (level: {})",
        results.len() - failures,
        results.len(),
        started.elapsed(),
        if full { "full" } else { "quick" }
    );
    Ok(if failures == 0 { 0 } else { 1 })
}

fn witness_points<F: Field>(field: F, n: usize, ctx: &Ctx) -> Vec<Form<F>> {
    let mut forms = binomial_set(field, n).expect("n >= 2").forms;
    if ctx.duplicate_witness {
        forms[0] = forms[1].clone();
    }
    forms
}

fn skewness_over<F: Field>(field: F, ctx: &Ctx) -> Result<String, String> {
    let expected = [(2usize, 6usize), (3, 24), (4, 70), (5, 165)];
    for (n, rank) in expected {
        let report = check_skewness(&witness_points(field.clone(), n, ctx), 3)
            .map_err(|e| e.to_string())?;
        if !report.skew || report.rank != rank {
            return Err(format!(
                "n={n}: rank {} but expected {rank} (skew witness violated)",
                report.rank
            ));
        }
    }
    Ok("ranks 6/24/70/165 at n=2..5".into())
}

fn contact_over<F: Field>(field: F, ctx: &Ctx) -> Result<String, String> {
    for n in 2..=5usize {
        let verdict = certificate_for_points(&witness_points(field.clone(), n, ctx), 3)
            .map_err(|e| e.to_string())?;
        if verdict.verdict != Verdict::Pass {
            return Err(format!(
                "n={n}: verdict {:?}, kernel dims {:?}",
                verdict.verdict, verdict.contact_kernel_dims
            ));
        }
    }
    Ok("kernel dimension 1 at every witness point, n=2..5".into())
}

fn checks(full: bool) -> Vec<Check> {
    let mut suite = vec![
        check(
            "skewness-binomial-prime",
            "tangent spaces at the binomial witness set are skew (mod p)",
            |ctx| skewness_over(PrimeField::new(ctx.prime).map_err(|e| e.to_string())?, ctx),
        ),
        check(
            "contact-binomial-prime",
            "tangential contact locus is zero-dimensional at the witness (mod p)",
            |ctx| contact_over(PrimeField::new(ctx.prime).map_err(|e| e.to_string())?, ctx),
        ),
        check(
            "bounds-condition1-crossover",
            "the non-defectivity route to identifiability opens exactly past n=16",
            |_| {
                for n in 2..=16usize {
                    if identifiability_bound_general(n, 2, 3).is_some() {
                        return Err(format!("bound unexpectedly defined at n={n}"));
                    }
                }
                for n in 17..=40usize {
                    if identifiability_bound_general(n, 2, 3).is_none() {
                        return Err(format!("bound undefined at n={n}"));
                    }
                }
                let (lhs, rhs) = side_condition_values(16, 2, 3);
                if lhs != BigInt::from(270) || rhs != BigRational::from_integer(BigInt::from(263))
                {
                    return Err(format!("side condition at n=16 reads {lhs} vs {rhs}"));
                }
                Ok("none for n<=16; defined for 17..=40; 270 vs 263 at n=16".into())
            },
        ),
        check(
            "bounds-condition1-values",
            "identifiability bound values for cubes of quadratics",
            |_| {
                let b17 = identifiability_bound_general(17, 2, 3);
                let b20 = identifiability_bound_general(20, 2, 3);
                if b17 != Some(BigInt::from(333)) || b20 != Some(BigInt::from(632)) {
                    return Err(format!("got n=17 -> {b17:?}, n=20 -> {b20:?}"));
                }
                Ok("m <= 333 at n=17 and m <= 632 at n=20".into())
            },
        ),
        check(
            "bounds-general-d-region",
            "minimal n where the general-power inequality holds",
            |_| {
                let n3 = general_d_minimal_n(3).map_err(|e| e.to_string())?.map(|(n, _)| n);
                let n4 = general_d_minimal_n(4).map_err(|e| e.to_string())?.map(|(n, _)| n);
                if n3 != Some(17) || n4 != Some(6) {
                    return Err(format!("got d=3 -> {n3:?}, d=4 -> {n4:?}"));
                }
                Ok("d=3 -> n=17, d=4 -> n=6".into())
            },
        ),
        check(
            "bounds-nenashev",
            "coefficient bound dim S^6/dim S^2 - dim S^2 at n=17",
            |_| {
                let b = nenashev_bound(17, 2, 3);
                let expected = BigRational::new(BigInt::from(74613), BigInt::from(153))
                    - BigRational::from_integer(BigInt::from(153));
                if b.value != expected || b.floor() != BigInt::from(334) {
                    return Err(format!("got {} (floor {})", b.value, b.floor()));
                }
                Ok("74613/153 - 153, floor 334".into())
            },
        ),
        check(
            "froberg-truncation",
            "truncated Hilbert series of general power ideals",
            |_| {
                let s = froberg_series(2, &[4, 4], 8);
                if s.coefficient(6) != 1u32.into() || !s.coefficient(7).is_zero() {
                    return Err(format!(
                        "two quartics in two variables: T^6 -> {}, T^7 -> {}",
                        s.coefficient(6),
                        s.coefficient(7)
                    ));
                }
                let s = froberg_series(3, &[4], 6);
                if s.coefficient(6) != 22u32.into() {
                    return Err(format!("single quartic: T^6 -> {}", s.coefficient(6)));
                }
                for n in 1..=4usize {
                    for m in 0..=6usize {
                        let s = froberg_series(n, &vec![4; m], 24);
                        let mut seen_zero = false;
                        for c in s.coefficients() {
                            if seen_zero && !c.is_zero() {
                                return Err(format!("series not zero after truncation (n={n}, m={m})"));
                            }
                            if c.is_zero() {
                                seen_zero = true;
                            }
                        }
                    }
                }
                Ok("T^6=1, T^7=0 for two quartics; T^6=22 for one; truncation clean".into())
            },
        ),
        check(
            "probe-nondefective-n3",
            "random tangent probe reaches the expected rank at (n,k,d,m)=(3,2,3,4)",
            |ctx| {
                let report = random_terracini_probe(
                    ProblemParams::new(3, 2, 3, 4).map_err(|e| e.to_string())?,
                    3,
                    ctx.seed,
                    FieldChoice::Prime(ctx.prime),
                )
                .map_err(|e| e.to_string())?;
                if report.rank != 24 {
                    return Err(format!("max rank {} of expected 24", report.rank));
                }
                Ok("rank 24 = expected within 3 trials".into())
            },
        ),
        check(
            "probe-defective-squares",
            "sums of two squares stay defective: rank at most 5 of expected 6",
            |ctx| {
                let report = random_terracini_probe(
                    ProblemParams::new(2, 2, 2, 2).map_err(|e| e.to_string())?,
                    20,
                    ctx.seed,
                    FieldChoice::Prime(ctx.prime),
                )
                .map_err(|e| e.to_string())?;
                if report.rank > 5 {
                    return Err(format!("rank {} exceeds the defect bound 5", report.rank));
                }
                Ok(format!("max rank {} < 6 over 20 trials", report.rank))
            },
        ),
        check(
            "moments-isserlis-agreement",
            "series moments equal pair-partition moments for |alpha| <= 6, n <= 3",
            |ctx| {
                let mut rng = rand::rngs::StdRng::seed_from_u64(ctx.seed ^ 0x15e1);
                let one = BigRational::one();
                for case in 0..50 {
                    let n = case % 3 + 1;
                    let sigma = random_psd_sigma(n, &mut rng);
                    let component =
                        CovarianceForm::from_sigma(sigma.clone()).map_err(|e| e.to_string())?;
                    let model = MixtureModel::new(vec![component], vec![one.clone()])
                        .map_err(|e| e.to_string())?;
                    for degree in 1..=6u32 {
                        for alpha in monomials_of_degree(n, degree) {
                            let lhs =
                                moment_of_monomial(&model, &alpha).map_err(|e| e.to_string())?;
                            let rhs =
                                isserlis_oracle(&sigma, &alpha).map_err(|e| e.to_string())?;
                            if lhs != rhs {
                                return Err(format!(
                                    "case {case}: alpha {:?}: {lhs} vs {rhs}",
                                    alpha.exponents()
                                ));
                            }
                        }
                    }
                }
                Ok("50 seeded psd matrices, every moment up to degree 6".into())
            },
        ),
        check(
            "moments-directional-law",
            "E[<x,Y>^{2d}] = (2d-1)!! (x'Sx)^d exactly for d <= 3",
            |ctx| {
                let mut rng = rand::rngs::StdRng::seed_from_u64(ctx.seed ^ 0xd14);
                for _ in 0..10 {
                    let n = rng.random_range(1..=3);
                    let sigma = random_psd_sigma(n, &mut rng);
                    let component =
                        CovarianceForm::from_sigma(sigma.clone()).map_err(|e| e.to_string())?;
                    let model = MixtureModel::new(vec![component], vec![BigRational::one()])
                        .map_err(|e| e.to_string())?;
                    let x: Vec<BigRational> = (0..n)
                        .map(|_| BigRational::from_integer(rng.random_range(-5i64..=5).into()))
                        .collect();
                    let mut quad = BigRational::zero();
                    for i in 0..n {
                        for j in 0..n {
                            quad += &x[i] * &sigma[i][j] * &x[j];
                        }
                    }
                    for d in 1..=3u32 {
                        let lhs =
                            directional_moment(&model, &x, 2 * d).map_err(|e| e.to_string())?;
                        let mut rhs = BigRational::from_integer(double_factorial_odd(d));
                        for _ in 0..d {
                            rhs *= &quad;
                        }
                        if lhs != rhs {
                            return Err(format!("d={d}: {lhs} vs {rhs}"));
                        }
                    }
                }
                Ok("10 seeded directions and covariances, d = 1..3".into())
            },
        ),
        check(
            "weights-recovery",
            "mixing weights recovered exactly from two moment degrees",
            |ctx| {
                let mut rng = rand::rngs::StdRng::seed_from_u64(ctx.seed ^ 0x3e19);
                let cases: [(usize, usize); 10] = [
                    (1, 1),
                    (2, 2),
                    (2, 3),
                    (2, 4),
                    (3, 2),
                    (3, 3),
                    (3, 4),
                    (4, 2),
                    (4, 3),
                    (4, 4),
                ];
                for (case, &(n, m)) in cases.iter().enumerate() {
                    loop {
                        let components: Vec<Form<Rationals>> = (0..m)
                            .map(|_| {
                                CovarianceForm::from_sigma(random_psd_sigma(n, &mut rng))
                                    .unwrap()
                                    .quadratic()
                                    .clone()
                            })
                            .collect();
                        if components.iter().any(|c| c.is_zero()) {
                            continue;
                        }
                        let raw: Vec<i64> = (0..m).map(|_| rng.random_range(1..=9)).collect();
                        let total: i64 = raw.iter().sum();
                        let lambda: Vec<BigRational> = raw
                            .iter()
                            .map(|&a| BigRational::new(a.into(), total.into()))
                            .collect();
                        let mut m_lower = Form::zero(Rationals, n, 4);
                        for (c, w) in components.iter().zip(&lambda) {
                            m_lower = m_lower.add(&c.power(2).scale(w)).unwrap();
                        }
                        let scaled: Vec<ScaledForm> = components
                            .iter()
                            .zip(&lambda)
                            .map(|(f, w)| ScaledForm {
                                scale_dth_power: w.clone(),
                                form: f.clone(),
                            })
                            .collect();
                        match recover_mixing_weights(&scaled, &m_lower, 3) {
                            Ok(rec) => {
                                if rec.weights != lambda || rec.representatives != components {
                                    return Err(format!("case {case}: recovery differs"));
                                }
                                break;
                            }
                            Err(Error::Precondition(_)) => continue,
                            Err(e) => return Err(format!("case {case}: {e}")),
                        }
                    }
                }
                Ok("10 seeded mixtures with m <= 4, n <= 4, d = 3".into())
            },
        ),
        check(
            "square-identity",
            "q1^2 + q2^2 always re-splits, so squares are never identifiable",
            |ctx| {
                let mut rng = rand::rngs::StdRng::seed_from_u64(ctx.seed ^ 0x59);
                let half = BigRational::new(BigInt::one(), BigInt::from(2));
                for _ in 0..100 {
                    let n = rng.random_range(1..=3);
                    let q1 = Form::random_integer(Rationals, n, 2, -20, 20, &mut rng);
                    let q2 = Form::random_integer(Rationals, n, 2, -20, 20, &mut rng);
                    let lhs = q1.power(2).add(&q2.power(2)).unwrap();
                    let rhs = q1
                        .add(&q2)
                        .unwrap()
                        .power(2)
                        .scale(&half)
                        .add(&q1.sub(&q2).unwrap().power(2).scale(&half))
                        .unwrap();
                    if lhs != rhs {
                        return Err("identity violated".into());
                    }
                }
                Ok("100 random rational pairs".into())
            },
        ),
        check(
            "witness-stability",
            "the binomial set is stable under identifying the last variable",
            |_| {
                for n in 3..=6usize {
                    let bn = binomial_set(Rationals, n).map_err(|e| e.to_string())?;
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
                    expected.push(
                        Form::variable(Rationals, n - 1, 0)
                            .power(2)
                            .scale(&BigRational::from_integer(BigInt::from(4)))
                            .densify(),
                    );
                    expected.sort();
                    expected.dedup();
                    if images != expected {
                        return Err(format!("stability fails at n={n}"));
                    }
                }
                Ok("image of B_n is B_(n-1) with 4 X1^2, for n = 3..6".into())
            },
        ),
    ];

    if full {
        suite.push(check(
            "skewness-binomial-rational",
            "tangent spaces at the binomial witness set are skew (exact rationals)",
            |ctx| skewness_over(Rationals, ctx),
        ));
        suite.push(check(
            "contact-binomial-rational",
            "tangential contact locus is zero-dimensional at the witness (exact rationals)",
            |ctx| contact_over(Rationals, ctx),
        ));
    }
    suite
}

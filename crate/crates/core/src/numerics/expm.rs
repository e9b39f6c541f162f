//! Scaling-and-squaring matrix exponential with diagonal Padé approximants
//! (Higham 2005 degree selection).

use faer::linalg::solvers::Solve;
use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Beyond this many squarings the scaled exponent has no meaningful digits left.
const MAX_SQUARINGS: i32 = 1000;

/// Matrix exponential `e^A`.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            op: "expm",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let norm = a.one_norm();
    if !norm.is_finite() {
        return Err(LinalgError::ExpmOverflow { norm });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }

    let result = if norm <= THETA_3 {
        pade_low(a, &B3)?
    } else if norm <= THETA_5 {
        pade_low(a, &B5)?
    } else if norm <= THETA_7 {
        pade_low(a, &B7)?
    } else if norm <= THETA_9 {
        pade_low(a, &B9)?
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        if s > MAX_SQUARINGS {
            return Err(LinalgError::ExpmOverflow { norm });
        }
        let scaled = a.scale_real(0.5f64.powi(s));
        let mut r = pade_13(&scaled)?;
        for _ in 0..s {
            r = r.matmul(&r)?;
        }
        r
    };

    if result.is_finite() {
        Ok(result)
    } else {
        Err(LinalgError::ExpmOverflow { norm })
    }
}

fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    // r = (V − U)⁻¹ (V + U)
    let p = v.try_add(u)?;
    let q = v.try_sub(u)?;
    let lu = q.as_faer().partial_piv_lu();
    let sol = lu.solve(p.as_faer());
    Ok(ComplexMatrix::from_faer(sol))
}

fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<ComplexMatrix, LinalgError> {
    let n = a.rows();
    let ident = ComplexMatrix::identity(n);
    let a2 = a.matmul(a)?;
    // Even powers I, A², A⁴, … up to the degree.
    let mut powers = vec![ident.clone(), a2.clone()];
    while 2 * powers.len() < b.len() {
        let last = powers.last().expect("non-empty").matmul(&a2)?;
        powers.push(last);
    }
    let mut odd = ComplexMatrix::zeros(n, n);
    let mut even = ComplexMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        even = even.try_add(&p.scale_real(b[2 * k]))?;
        if 2 * k + 1 < b.len() {
            odd = odd.try_add(&p.scale_real(b[2 * k + 1]))?;
        }
    }
    let u = a.matmul(&odd)?;
    solve_pade(&u, &even)
}

fn pade_13(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = a.rows();
    let b = &B13;
    let ident = ComplexMatrix::identity(n);
    let a2 = a.matmul(a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;

    let lincomb = |terms: &[(f64, &ComplexMatrix)]| -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            terms
                .iter()
                .map(|(c, m)| m[(i, j)] * Complex64::new(*c, 0.0))
                .sum()
        })
    };

    let inner_u = lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]);
    let u = a.matmul(
        &a6.matmul(&inner_u)?
            .try_add(&lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &ident)]))?,
    )?;
    let inner_v = lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]);
    let v = a6
        .matmul(&inner_v)?
        .try_add(&lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &ident)]))?;
    solve_pade(&u, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_gives_identity() {
        let e = expm(&ComplexMatrix::zeros(5, 5)).unwrap();
        assert!((&e - &ComplexMatrix::identity(5)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn diagonal_exponentiates_entrywise() {
        // Spans every Padé degree branch through the norm of the diagonal.
        for scale in [1e-3, 0.1, 0.5, 1.5, 4.0, 40.0] {
            let d = [c(-1.0, 0.3), c(0.2, -2.0), c(-0.7, 0.0)];
            let scaled: Vec<_> = d.iter().map(|z| z * scale).collect();
            let e = expm(&ComplexMatrix::from_diagonal(&scaled)).unwrap();
            for (i, z) in scaled.iter().enumerate() {
                let want = z.exp();
                assert!((e[(i, i)] - want).norm() <= 1e-10 * want.norm(), "scale {scale}");
            }
        }
    }

    #[test]
    fn generator_of_rotations() {
        for t in [0.01, 0.3, 1.0, 2.5, 17.0] {
            let a = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(t, 0.0), c(-t, 0.0), c(0.0, 0.0)])
                .unwrap();
            let e = expm(&a).unwrap();
            let want = [t.cos(), t.sin(), -t.sin(), t.cos()];
            for (got, w) in e.to_row_major().iter().zip(want) {
                assert!((got - c(w, 0.0)).norm() < 1e-10, "t = {t}");
            }
        }
    }

    #[test]
    fn non_normal_jordan_block() {
        // exp([[λ, 1], [0, λ]]) = e^λ [[1, 1], [0, 1]]
        let lambda = c(-3.0, 1.0);
        let a = ComplexMatrix::new(2, 2, vec![lambda, c(1.0, 0.0), c(0.0, 0.0), lambda]).unwrap();
        let e = expm(&a).unwrap();
        let el = lambda.exp();
        assert!((e[(0, 1)] - el).norm() < 1e-12);
        assert!((e[(0, 0)] - el).norm() < 1e-12);
        assert!(e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn overflow_is_reported() {
        let a = ComplexMatrix::from_real_diagonal(&[800.0, 1.0]);
        match expm(&a) {
            Err(LinalgError::ExpmOverflow { norm }) => assert!(norm >= 800.0),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn group_property_on_anti_hermitian(seed in 0u64..10_000, t in 0.1f64..4.0, s in 0.1f64..4.0) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let r = ComplexMatrix::from_fn(6, 6, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let a = &r - &r.adjoint();
            let lhs = expm(&a.scale_real(t + s)).unwrap();
            let rhs = &expm(&a.scale_real(t)).unwrap() * &expm(&a.scale_real(s)).unwrap();
            prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-8 * lhs.frobenius_norm());
        }
    }
}

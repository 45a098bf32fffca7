//! Dedekind sums, lens-space correction terms, Casson–Walker values.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{int, Rational};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum NumthError {
    #[error("{q} and {p} are not coprime")]
    NotCoprime { p: i64, q: i64 },
    #[error("p must be positive, got {0}")]
    NonPositive(i64),
    #[error("lens identity violated for L({p},{q}): sum of d = {sum}, p*s = {expected}")]
    IdentityViolation { p: i64, q: i64, sum: String, expected: String },
}

fn check(p: i64, q: i64) -> Result<(), NumthError> {
    if p < 1 {
        return Err(NumthError::NonPositive(p));
    }
    if q.gcd(&p) != 1 {
        return Err(NumthError::NotCoprime { p, q });
    }
    Ok(())
}

/// `s(q,p) = Σ_{k=1}^{p−1} ((k/p))((kq/p))`.
pub fn dedekind(q: i64, p: i64) -> Result<Rational, NumthError> {
    check(p, q)?;
    let (p128, q128) = (p as i128, q.rem_euclid(p) as i128);
    // ((k/p)) = (2k − p)/2p for 0 < k < p.
    let mut acc: i128 = 0;
    for k in 1..p128 {
        let r = (k * q128) % p128;
        acc += (2 * k - p128) * (2 * r - p128);
    }
    Ok(Rational::new(BigInt::from(acc), BigInt::from(4 * p128 * p128)))
}

/// `4p·d(L(p,q), i)` for `i = 0..p`.
fn lens_d_scaled(p: i64, q: i64) -> Vec<i128> {
    let q = q.rem_euclid(p);
    if p == 1 {
        return vec![0];
    }
    let (p, q) = (p as i128, q as i128);
    let child = lens_d_scaled(q as i64, (p % q) as i64);
    (0..p)
        .map(|i| {
            let t = 2 * i + 1 - p - q;
            let num = t * t - p * child[(i % q) as usize];
            debug_assert_eq!(num % q, 0);
            num / q - p
        })
        .collect()
}

/// `d(L(p,q), i)` for `i = 0..p`, by the standard recursion
/// `d(L(p,q),i) = −1/4 + (2i+1−p−q)²/4pq − d(L(q, p mod q), i mod q)`.
pub fn lens_d(p: i64, q: i64) -> Result<Vec<Rational>, NumthError> {
    check(p, q)?;
    let den = BigInt::from(4 * p);
    Ok(lens_d_scaled(p, q)
        .into_iter()
        .map(|e| Rational::new(BigInt::from(e), den.clone()))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LensInvariants {
    pub p: i64,
    pub q: i64,
    #[serde(with = "crate::rational::serde_str")]
    pub s: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub lambda: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub tau: Rational,
    #[serde(with = "rational_vec")]
    pub d_table: Vec<Rational>,
}

/// All lens-space invariants, after verifying `Σ_i d = −2pλ`.
pub fn lens(p: i64, q: i64) -> Result<LensInvariants, NumthError> {
    let s = dedekind(q, p)?;
    let d_table = lens_d(p, q)?;
    let lambda = -&s / int(2);
    let tau = -(int(4 * p) * &s);
    let sum: Rational = d_table.iter().sum();
    let expected = -(int(2 * p) * &lambda);
    if sum != expected {
        return Err(NumthError::IdentityViolation {
            p,
            q,
            sum: sum.to_string(),
            expected: expected.to_string(),
        });
    }
    Ok(LensInvariants { p, q, s, lambda, tau, d_table })
}

/// `λ(L(p,q)) = −s(q,p)/2`.
pub fn lens_lambda(p: i64, q: i64) -> Result<Rational, NumthError> {
    Ok(-dedekind(q, p)? / int(2))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CassonWalkerInput {
    #[serde(with = "crate::rational::serde_str")]
    pub lambda_y: Rational,
    pub h1_order: i64,
    pub delta2: i64,
    pub p: i64,
    pub q: i64,
}

/// `λ(W) + λ(L(p,q)) + q·Δ''(1) / (2p|H₁(W)|)`.
pub fn casson_walker_surgery(input: &CassonWalkerInput) -> Result<Rational, NumthError> {
    if input.h1_order < 1 {
        return Err(NumthError::NonPositive(input.h1_order));
    }
    let lens_term = lens_lambda(input.p, input.q)?;
    let knot_term = Rational::new(
        BigInt::from(input.q) * BigInt::from(input.delta2),
        BigInt::from(2 * input.p) * BigInt::from(input.h1_order),
    );
    Ok(&input.lambda_y + lens_term + knot_term)
}

/// `λ = (χ(HF_red) − ½Σ_s d(s)) / |H₁|`.
pub fn lambda_from_hf(chi_red: i64, d_sum: &Rational, h1_order: i64) -> Rational {
    assert!(h1_order >= 1, "H1 order must be positive");
    (int(chi_red) - d_sum / int(2)) / int(h1_order)
}

pub fn totient(n: u64) -> u64 {
    assert!(n >= 1, "totient of zero");
    let mut n = n;
    let mut out = n;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            while n % f == 0 {
                n /= f;
            }
            out -= out / f;
        }
        f += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

pub(crate) mod rational_vec {
    use crate::rational::{format_rational, parse_rational, Rational};
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_rational(t).map_err(de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use num_integer::Integer;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn sawtooth(x: &Rational) -> Rational {
        if x.is_integer() {
            Rational::zero()
        } else {
            x - x.floor() - rat(1, 2)
        }
    }

    fn dedekind_oracle(q: i64, p: i64) -> Rational {
        (1..p)
            .map(|k| sawtooth(&rat(k, p)) * sawtooth(&rat(k * q, p)))
            .sum()
    }

    #[test]
    fn dedekind_examples() {
        assert_eq!(dedekind(1, 2).unwrap(), rat(0, 1));
        assert_eq!(dedekind(1, 3).unwrap(), rat(1, 18));
        assert_eq!(dedekind(-1, 5).unwrap(), -dedekind(1, 5).unwrap());
        assert_eq!(dedekind(1, 5).unwrap(), dedekind_oracle(1, 5));
        assert_eq!(dedekind(2, 4), Err(NumthError::NotCoprime { p: 4, q: 2 }));
        assert_eq!(dedekind(7, 1).unwrap(), rat(0, 1));
    }

    #[test]
    fn dedekind_matches_sawtooth_oracle() {
        for p in 1..40 {
            for q in -p..2 * p {
                if q.gcd(&p) == 1 {
                    assert_eq!(dedekind(q, p).unwrap(), dedekind_oracle(q, p), "s({q},{p})");
                }
            }
        }
    }

    #[test]
    fn lens_d_examples() {
        assert_eq!(lens_d(1, 1).unwrap(), vec![rat(0, 1)]);
        let mut l21 = lens_d(2, 1).unwrap();
        l21.sort();
        assert_eq!(l21, vec![rat(-1, 4), rat(1, 4)]);
        let l31 = lens_d(3, 1).unwrap();
        let sum: Rational = l31.iter().sum();
        assert_eq!(sum, int(3) * dedekind(1, 3).unwrap());
        assert_eq!(
            lens_d(5, 2).unwrap(),
            vec![rat(2, 5), rat(2, 5), rat(-2, 5), rat(0, 1), rat(-2, 5)]
        );
        assert!(lens_d(4, 2).is_err());
    }

    #[test]
    fn lens_identities_small() {
        for p in 1..60 {
            for q in 1..=p {
                if q.gcd(&p) != 1 {
                    continue;
                }
                let inv = lens(p, q).unwrap();
                assert_eq!(inv.tau, -(int(4 * p) * &inv.s));
                let mut a = inv.d_table.clone();
                let mut b: Vec<Rational> = lens_d(p, p - q).unwrap().into_iter().map(|x| -x).collect();
                a.sort();
                b.sort();
                assert_eq!(a, b, "orientation L({p},{q})");
            }
        }
    }

    #[test]
    fn casson_walker_examples() {
        let base = CassonWalkerInput { lambda_y: rat(0, 1), h1_order: 1, delta2: 0, p: 5, q: 2 };
        assert_eq!(casson_walker_surgery(&base).unwrap(), lens_lambda(5, 2).unwrap());
        let tre = CassonWalkerInput { delta2: 2, p: 2, q: 3, ..base.clone() };
        assert_eq!(casson_walker_surgery(&tre).unwrap(), lens_lambda(2, 3).unwrap() + rat(3, 2));
        let fig = CassonWalkerInput { delta2: -2, p: 2, q: 1, ..base };
        assert_eq!(casson_walker_surgery(&fig).unwrap(), lens_lambda(2, 1).unwrap() - rat(1, 2));
    }

    #[test]
    fn lambda_from_hf_examples() {
        assert_eq!(lambda_from_hf(0, &rat(0, 1), 1), rat(0, 1));
        assert_eq!(lambda_from_hf(-1, &rat(0, 1), 1), rat(-1, 1));
        for (p, q) in [(2, 1), (5, 2), (7, 3)] {
            let d: Rational = lens_d(p, q).unwrap().iter().sum();
            assert_eq!(lambda_from_hf(0, &d, p), lens_lambda(p, q).unwrap());
        }
    }

    #[test]
    fn totient_examples() {
        assert_eq!(totient(1), 1);
        assert_eq!(totient(2), 1);
        assert_eq!(totient(12), 4);
        for n in 1..200u64 {
            assert_eq!(totient(n), (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64);
        }
    }

    proptest! {
        #[test]
        fn reciprocity(p in 1i64..1000, q in 1i64..1000) {
            prop_assume!(p.gcd(&q) == 1);
            let lhs = dedekind(q, p).unwrap() + dedekind(p, q).unwrap();
            let rhs = rat(-1, 4) + (rat(p, q) + rat(q, p) + rat(1, p * q)) / int(12);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn casson_walker_additive_in_delta2(a in -20i64..20, b in -20i64..20, p in 1i64..30, q in 1i64..30) {
            prop_assume!(p.gcd(&q) == 1);
            let mk = |d| CassonWalkerInput { lambda_y: rat(0, 1), h1_order: 1, delta2: d, p, q };
            let lhs = casson_walker_surgery(&mk(a + b)).unwrap() + casson_walker_surgery(&mk(0)).unwrap();
            let rhs = casson_walker_surgery(&mk(a)).unwrap() + casson_walker_surgery(&mk(b)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}

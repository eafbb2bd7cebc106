//! Coefficients of the quadratic `A2` and `A3` multiple Dirichlet series.

use num_integer::Integer;
use serde::Serialize;

use crate::congruence::{chi, divisors, factorize, hat, is_discriminant, squarefree_split};
use crate::error::{domain, Result};

/// `a(p^k, p^l)`: `p^(min/2)` when `min(k, l)` is even, otherwise 0.
pub fn a_pp(p: u64, k: u32, l: u32) -> u64 {
    let low = k.min(l);
    if low % 2 == 0 {
        p.pow(low / 2)
    } else {
        0
    }
}

/// `a(D, m)`: product of `a(p^k, p^l)` over `p^k || D`, `p^l || m`.
pub fn a_coeff(d: i64, m: u64) -> Result<u64> {
    if d == 0 || m == 0 {
        return domain("a(D, m) needs D != 0 and m >= 1");
    }
    let fd = factorize(d)?;
    let mut out = 1u64;
    for (p, l) in factorize(m as i64)?.primes {
        out *= a_pp(p, fd.exponent(p), l);
        if out == 0 {
            break;
        }
    }
    Ok(out)
}

/// `a(D, m, n) = sum over d | gcd(D1, m, n) of d * a(D/d^2, m/d) * a(D/d^2, n/d)`.
pub fn a_coeff3(d: i64, m: u64, n: u64) -> Result<u64> {
    if d == 0 || m == 0 || n == 0 {
        return domain("a(D, m, n) needs D != 0 and m, n >= 1");
    }
    let (_, d1) = squarefree_split(d)?;
    let g = (d1 as u64).gcd(&m).gcd(&n);
    let mut total = 0;
    for e in divisors(g) {
        let reduced = d / (e * e) as i64;
        total += e * a_coeff(reduced, m / e)? * a_coeff(reduced, n / e)?;
    }
    Ok(total)
}

/// `chi_D(m^) * a(D, m)`.
pub fn tilde_a(d: i64, m: u64) -> Result<i64> {
    if !is_discriminant(d) {
        return domain(format!("{d} is not a discriminant"));
    }
    let a = a_coeff(d, m)?;
    if a == 0 {
        return Ok(0);
    }
    Ok(chi(d, hat(m, d)?)? as i64 * a as i64)
}

/// Odd discriminant in the sense of the series: `D = 1 (mod 4)`.
pub fn is_odd_discriminant(d: i64) -> bool {
    d.rem_euclid(4) == 1
}

/// One row of the `D,m,n,a,chi_m,chi_n` table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoefficientRow {
    #[serde(rename = "D")]
    pub d: i64,
    pub m: u64,
    pub n: u64,
    pub a: u64,
    pub chi_m: i8,
    pub chi_n: i8,
}

pub fn coefficient_table(d_max: i64, m_max: u64) -> Result<Vec<CoefficientRow>> {
    let mut rows = Vec::new();
    for d in (-d_max..=d_max).filter(|&d| is_discriminant(d)) {
        for m in 1..=m_max {
            let chi_m = chi(d, hat(m, d)?)?;
            for n in 1..=m_max {
                rows.push(CoefficientRow {
                    d,
                    m,
                    n,
                    a: a_coeff3(d, m, n)?,
                    chi_m,
                    chi_n: chi(d, hat(n, d)?)?,
                });
            }
        }
    }
    Ok(rows)
}

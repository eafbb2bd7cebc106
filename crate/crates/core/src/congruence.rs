//! Integer arithmetic underneath everything else: factorization, square
//! decomposition of discriminants, counting square roots modulo `a`, the
//! quadratic character of `Q(sqrt D)` and Siegel's local generating series.
//!
//! All inputs are bounded to 63 bits; intermediate products use `i128`/`u128`.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{domain, range, Result};

/// Largest absolute value accepted by [`factorize`].
pub const DEFAULT_BOUND: u64 = i64::MAX as u64;

/// `sign * prod p^e`, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub sign: i8,
    pub primes: Vec<(u64, u32)>,
}

impl Factorization {
    /// Reconstructs the factored integer.
    pub fn value(&self) -> i128 {
        let mut v: i128 = 1;
        for &(p, e) in &self.primes {
            v *= (p as i128).pow(e);
        }
        v * self.sign as i128
    }

    pub fn exponent(&self, p: u64) -> u32 {
        self.primes
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_squarefree(&self) -> bool {
        self.primes.iter().all(|&(_, e)| e == 1)
    }
}

/// Sieve of Eratosthenes, used to speed up repeated trial division.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    primes: Vec<u64>,
    limit: u64,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        Self { primes, limit }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }
}

/// Trial-division factorizer with a configurable input bound.
#[derive(Debug, Clone)]
pub struct Factorizer {
    bound: u64,
    table: Option<PrimeTable>,
}

impl Default for Factorizer {
    fn default() -> Self {
        Self {
            bound: DEFAULT_BOUND,
            table: None,
        }
    }
}

impl Factorizer {
    pub fn new(bound: u64, table: Option<PrimeTable>) -> Self {
        Self {
            bound: bound.min(DEFAULT_BOUND),
            table,
        }
    }

    pub fn factorize(&self, n: i64) -> Result<Factorization> {
        if n == 0 {
            return domain("cannot factor 0");
        }
        let mut m = n.unsigned_abs();
        if m > self.bound {
            return range(format!("|{n}| exceeds factorization bound {}", self.bound));
        }
        let sign = if n < 0 { -1 } else { 1 };
        let mut primes = Vec::new();
        let mut push = |m: &mut u64, p: u64| {
            let mut e = 0;
            while *m % p == 0 {
                *m /= p;
                e += 1;
            }
            if e > 0 {
                primes.push((p, e));
            }
        };
        let mut next = 2u64;
        if let Some(table) = &self.table {
            for &p in table.primes() {
                if (p as u128) * (p as u128) > m as u128 {
                    break;
                }
                push(&mut m, p);
            }
            next = table.limit() + 1;
        }
        let mut p = next;
        while m > 1 && (p as u128) * (p as u128) <= m as u128 {
            push(&mut m, p);
            p += if p == 2 { 1 } else { 2 };
            if p > 3 && p % 2 == 0 {
                p += 1;
            }
        }
        if m > 1 {
            primes.push((m, 1));
        }
        primes.sort_unstable();
        Ok(Factorization { sign, primes })
    }
}

pub fn factorize(n: i64) -> Result<Factorization> {
    Factorizer::default().factorize(n)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while (d as u128) * (d as u128) <= p as u128 {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Exponent of `p` in `n` (`n != 0`).
pub fn valuation(n: i128, p: u64) -> u32 {
    debug_assert!(n != 0 && p >= 2);
    let p = p as i128;
    let mut n = n;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while (d as u128) * (d as u128) <= n as u128 {
        if n % d == 0 {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Sum of divisors.
pub fn sigma1(n: u64) -> u64 {
    divisors(n).into_iter().sum()
}

pub fn moebius(n: u64) -> i8 {
    let f = factorize(n as i64).expect("moebius of positive integer");
    if f.is_squarefree() {
        if f.primes.len() % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

/// Writes `d = d0 * d1^2` with `d0` squarefree (carrying the sign) and `d1 > 0`.
pub fn squarefree_split(d: i64) -> Result<(i64, i64)> {
    let f = factorize(d)?;
    let mut d0: i64 = f.sign as i64;
    let mut d1: i64 = 1;
    for (p, e) in f.primes {
        let p = p as i64;
        if e % 2 == 1 {
            d0 *= p;
        }
        d1 *= p.pow(e / 2);
    }
    Ok((d0, d1))
}

pub fn is_discriminant(d: i64) -> bool {
    d != 0 && matches!(d.rem_euclid(4), 0 | 1)
}

/// Discriminant of the maximal order of `Q(sqrt d)`; `1` when `d` is a square.
pub fn fundamental_discriminant(d: i64) -> Result<i64> {
    if d == 0 {
        return domain("discriminant must be nonzero");
    }
    if !is_discriminant(d) {
        return domain(format!("{d} is not congruent to 0 or 1 mod 4"));
    }
    let (d0, _) = squarefree_split(d)?;
    Ok(if d0.rem_euclid(4) == 1 { d0 } else { 4 * d0 })
}

/// Square decomposition of a discriminant together with its fundamental part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscriminantData {
    pub d: i64,
    pub d0: i64,
    pub d1: i64,
    pub dstar: i64,
    /// `p^(2 alpha)` exactly divides `d / dstar`.
    pub alpha: BTreeMap<u64, u32>,
}

impl DiscriminantData {
    pub fn new(d: i64) -> Result<Self> {
        let dstar = fundamental_discriminant(d)?;
        let (d0, d1) = squarefree_split(d)?;
        let mut alpha = BTreeMap::new();
        for (p, e) in factorize(d1)?.primes {
            let a = if p == 2 && dstar != d0 { e - 1 } else { e };
            if a > 0 {
                alpha.insert(p, a);
            }
        }
        Ok(Self {
            d,
            d0,
            d1,
            dstar,
            alpha,
        })
    }

    pub fn alpha(&self, p: u64) -> u32 {
        self.alpha.get(&p).copied().unwrap_or(0)
    }

    pub fn is_fundamental(&self) -> bool {
        self.d == self.dstar
    }
}

fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut r = 1u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    r as u64
}

/// Number of `y mod p^j` with `y^2 = u`, for `u` a unit mod `p` and `j >= 1`.
fn unit_root_count(u: i128, p: u64, j: u32) -> u64 {
    if p == 2 {
        match j {
            1 => 1,
            2 => {
                if u.rem_euclid(4) == 1 {
                    2
                } else {
                    0
                }
            }
            _ => {
                if u.rem_euclid(8) == 1 {
                    4
                } else {
                    0
                }
            }
        }
    } else {
        let r = u.rem_euclid(p as i128) as u64;
        if pow_mod(r, (p - 1) / 2, p) == 1 {
            2
        } else {
            0
        }
    }
}

fn checked_prime_power(p: u64, l: u32) -> Result<u128> {
    let mut q: u128 = 1;
    for _ in 0..l {
        q = q.saturating_mul(p as u128);
        if q > DEFAULT_BOUND as u128 {
            return range(format!("{p}^{l} exceeds 63 bits"));
        }
    }
    Ok(q)
}

/// `A(d, p^l)`: the number of residues `x mod p^l` with `x^2 = d (mod p^l)`.
///
/// Valuation case split: if `p^l | d` the roots are the multiples of
/// `p^ceil(l/2)`; otherwise `v_p(d)` must be even and the count reduces to a
/// unit congruence modulo `p^(l - v)`, lifted by `p^(v/2)`.
pub fn sqrt_count_prime_power(d: i64, p: u64, l: u32) -> Result<u64> {
    if !is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    let q = checked_prime_power(p, l)? as i128;
    if l == 0 {
        return Ok(1);
    }
    let r = (d as i128).rem_euclid(q);
    if r == 0 {
        return Ok(p.pow(l / 2));
    }
    let v = valuation(r, p);
    if v % 2 == 1 {
        return Ok(0);
    }
    let unit = r / (p as i128).pow(v);
    Ok(unit_root_count(unit, p, l - v) * p.pow(v / 2))
}

/// `A(d, a)` for `a != 0`, multiplicative over the factorization of `|a|`.
pub fn sqrt_count(d: i64, a: i64) -> Result<u64> {
    if a == 0 {
        return domain("modulus must be nonzero");
    }
    let mut count = 1u64;
    for (p, e) in factorize(a)?.primes {
        count *= sqrt_count_prime_power(d, p, e)?;
        if count == 0 {
            break;
        }
    }
    Ok(count)
}

/// Jacobi symbol `(a / n)` for odd positive `n`.
pub fn jacobi(a: i64, n: u64) -> i8 {
    assert!(n % 2 == 1, "jacobi symbol needs an odd modulus");
    let mut a = (a as i128).rem_euclid(n as i128) as u64;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(a / n)` for `n >= 1`.
pub fn kronecker(a: i64, n: u64) -> i8 {
    assert!(n >= 1);
    let tz = n.trailing_zeros();
    let odd = n >> tz;
    let two = if tz == 0 {
        1
    } else if a % 2 == 0 {
        0
    } else if matches!(a.rem_euclid(8), 1 | 7) || tz % 2 == 0 {
        1
    } else {
        -1
    };
    if two == 0 {
        return 0;
    }
    two * jacobi(a, odd)
}

/// Quadratic character of `Q(sqrt d)` at `n`: the Kronecker symbol of the
/// fundamental discriminant. Trivial on integers prime to `d0` when `d` is a square.
pub fn chi(d: i64, n: u64) -> Result<i8> {
    if n == 0 {
        return domain("character argument must be positive");
    }
    let dstar = fundamental_discriminant(d)?;
    Ok(kronecker(dstar, n))
}

/// Largest divisor of `m` coprime to the squarefree part of `d`.
pub fn hat(m: u64, d: i64) -> Result<u64> {
    if m == 0 {
        return domain("hat needs m >= 1");
    }
    let (d0, _) = squarefree_split(d)?;
    let d0 = d0.unsigned_abs();
    let mut m = m;
    loop {
        let g = m.gcd(&d0);
        if g == 1 {
            return Ok(m);
        }
        m /= g;
    }
}

/// Both sides of Siegel's local identity as power series in `q = p^-s`.
#[derive(Debug, Clone, Serialize)]
pub struct SiegelReport {
    pub d: i64,
    pub p: u64,
    pub alpha: u32,
    pub chi_p: i8,
    pub truncation: usize,
    /// From direct root counts.
    pub lhs: Vec<i128>,
    /// From the closed form.
    pub rhs: Vec<i128>,
    pub first_mismatch: Option<usize>,
}

impl SiegelReport {
    pub fn agrees(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

fn series_mul(a: &[i128], b: &[i128], t: usize) -> Vec<i128> {
    let mut c = vec![0i128; t + 1];
    for (i, &x) in a.iter().enumerate().take(t + 1) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(t + 1 - i) {
            c[i + j] += x * y;
        }
    }
    c
}

/// `1 / (1 - c q^k)` truncated at degree `t`.
fn geometric(c: i128, k: usize, t: usize) -> Vec<i128> {
    let mut g = vec![0i128; t + 1];
    let mut v = 1i128;
    let mut i = 0;
    while i <= t {
        g[i] = v;
        v *= c;
        i += k;
    }
    g
}

/// Compares the two sides of Siegel's formula for the local factor of
/// `sum_a A(d, a) a^-s` at `p`, up to degree `t` in `p^-s`.
///
/// The left side is built from [`sqrt_count_prime_power`] and is treated as
/// ground truth; disagreement is reported, not raised.
pub fn siegel_factor_check(d: i64, p: u64, t: usize) -> Result<SiegelReport> {
    if !is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    let data = DiscriminantData::new(d)?;
    let v = valuation(d as i128, p) as usize;
    if t < v + 4 {
        return range(format!("truncation {t} below v_p(d) + 4 = {}", v + 4));
    }
    let alpha = data.alpha(p);
    let chi_p = chi(d, p)? as i128;
    let counts = (0..=t + 1)
        .map(|l| sqrt_count_prime_power(d, p, l as u32).map(|c| c as i128))
        .collect::<Result<Vec<_>>>()?;

    // (1 - chi q) / (1 - q^2) * f_p
    let mut factor = vec![0i128; t + 1];
    factor[0] = 1;
    factor[1] -= chi_p;
    let factor = series_mul(&factor, &geometric(1, 2, t), t);
    let f: Vec<i128> = if p == 2 {
        // (q^-1 - 1) sum_{l>=1} A(d,2^l) q^l
        (0..=t)
            .map(|l| counts[l + 1] - if l >= 1 { counts[l] } else { 0 })
            .collect()
    } else {
        (0..=t)
            .map(|l| counts[l] - if l >= 1 { counts[l - 1] } else { 0 })
            .collect()
    };
    let lhs = series_mul(&factor, &f, t);

    let pi = p as i128;
    let mut rhs = vec![0i128; t + 1];
    if p == 2 {
        let lead = geometric(-1, 1, t);
        for (r, g) in rhs.iter_mut().zip(&lead) {
            *r += (1 + chi_p) * g;
        }
        // (2q - chi) * sum_{l=0}^{alpha} 2^l q^{2l}
        let mut tail = vec![0i128; t + 1];
        for l in 0..=alpha as usize {
            if 2 * l <= t {
                tail[2 * l] = pi.pow(l as u32);
            }
        }
        let mut lin = vec![0i128; t + 1];
        lin[0] = -chi_p;
        lin[1] = 2;
        for (r, x) in rhs.iter_mut().zip(series_mul(&lin, &tail, t)) {
            *r += x;
        }
    } else {
        if 2 * alpha as usize <= t {
            rhs[2 * alpha as usize] += pi.pow(alpha);
        }
        let mut tail = vec![0i128; t + 1];
        for l in 0..alpha as usize {
            if 2 * l <= t {
                tail[2 * l] = pi.pow(l as u32);
            }
        }
        let mut lin = vec![0i128; t + 1];
        lin[0] = 1;
        lin[1] = -chi_p;
        for (r, x) in rhs.iter_mut().zip(series_mul(&lin, &tail, t)) {
            *r += x;
        }
    }
    let first_mismatch = lhs.iter().zip(&rhs).position(|(a, b)| a != b);
    Ok(SiegelReport {
        d,
        p,
        alpha,
        chi_p: chi_p as i8,
        truncation: t,
        lhs,
        rhs,
        first_mismatch,
    })
}

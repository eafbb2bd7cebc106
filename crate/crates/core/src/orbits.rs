//! Congruence pairs, the explicit cube attached to each pair, and the closed
//! form orbit count `B(D, m, n)`.

use num_integer::Integer;
use serde::Serialize;

use crate::congruence::{divisors, is_discriminant, sqrt_count, squarefree_split};
use crate::cube::Cube;
use crate::error::{domain, Error, Result};

/// Middle coefficients `x, y` of `Q1 = (m, x, s)` and `Q2 = (n, y, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CongruencePair {
    #[serde(rename = "D")]
    pub d: i64,
    pub m: i64,
    pub n: i64,
    pub x: i64,
    pub y: i64,
    pub s: i64,
    pub t: i64,
}

fn window_roots(d: i64, k: i64) -> Vec<i64> {
    let modulus = 4 * k.unsigned_abs() as i128;
    (0..2 * k.abs())
        .filter(|&x| (x as i128 * x as i128 - d as i128).rem_euclid(modulus) == 0)
        .collect()
}

/// All `x` in `[0, 2|m|)`, `y` in `[0, 2|n|)` with `x^2 = D (mod 4m)` and `y^2 = D (mod 4n)`.
pub fn congruence_pairs(d: i64, m: i64, n: i64) -> Result<Vec<CongruencePair>> {
    if d == 0 || m == 0 || n == 0 {
        return domain("congruence pairs need nonzero D, m, n");
    }
    let xs = window_roots(d, m);
    let ys = window_roots(d, n);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            out.push(CongruencePair {
                d,
                m,
                n,
                x,
                y,
                s: ((x as i128 * x as i128 - d as i128) / (4 * m as i128)) as i64,
                t: ((y as i128 * y as i128 - d as i128) / (4 * n as i128)) as i64,
            });
        }
    }
    Ok(out)
}

impl CongruencePair {
    pub fn is_valid(&self) -> bool {
        let (d, m, n) = (self.d as i128, self.m as i128, self.n as i128);
        let (x, y) = (self.x as i128, self.y as i128);
        m != 0
            && n != 0
            && x * x - 4 * m * self.s as i128 == d
            && y * y - 4 * n * self.t as i128 == d
    }
}

/// A cube with `c = 0`, `gcd(d, g, h) = 1`, `Q1 = (m, x, s)` and `Q2 = (n, y, t)`.
///
/// `a = |gcd(m, n, (x+y)/2)|`, `d = m/a`, `g = n/a`, `h = -(x+y)/(2a)`.
/// For `h != 0`, `f` is the least nonnegative residue with `s + f g = 0` and
/// `t + f d = 0 (mod h)`, then `e = (s + f g)/h`, `b = (t + f d)/h`.
/// For `h = 0`, `f = -s/g` and `e` is the least nonnegative solution of
/// `b g - d e = (x - y)/2`.
pub fn cube_from_invariants(pair: &CongruencePair) -> Result<Cube> {
    if !pair.is_valid() {
        return domain(format!("invalid congruence pair {pair:?}"));
    }
    let (m, n, x, y, s, t) = (
        pair.m as i128,
        pair.n as i128,
        pair.x as i128,
        pair.y as i128,
        pair.s as i128,
        pair.t as i128,
    );
    if (x + y) % 2 != 0 {
        return domain("x and y must have the same parity");
    }
    let half = (x + y) / 2;
    let a = m.gcd(&n).gcd(&half).abs();
    let (d, g, h) = (m / a, n / a, -half / a);
    let internal = || Error::Internal(format!("no cube for {pair:?}"));
    let (b, e, f) = if h != 0 {
        let f = (0..h.abs())
            .find(|f| (s + f * g) % h == 0 && (t + f * d) % h == 0)
            .ok_or_else(internal)?;
        (((t + f * d) / h), ((s + f * g) / h), f)
    } else {
        if s % g != 0 {
            return Err(internal());
        }
        let f = -s / g;
        if d * f != -t {
            return Err(internal());
        }
        // b g - d e = (x - y)/2 with gcd(d, g) = 1
        let r = (x - y) / 2;
        let e = (0..g.abs())
            .find(|e| (r + d * e) % g == 0)
            .ok_or_else(internal)?;
        ((r + d * e) / g, e, f)
    };
    let cube = Cube::new([a, b, 0, d, e, f, g, h].map(|v| v as i64));
    let [q1, q2, _] = cube.forms();
    if (q1.a, q1.b, q1.c) != (m, x, s) || (q2.a, q2.b, q2.c) != (n, y, t) {
        return Err(internal());
    }
    Ok(cube)
}

/// `d * A(D/d^2, 4m/d) * A(D/d^2, 4n/d)` when `d | gcd(D1, m, n)`, else 0.
pub fn b_term(disc: i64, d: i64, m: i64, n: i64) -> Result<u64> {
    if disc == 0 || d <= 0 || m == 0 || n == 0 {
        return domain("b_term needs D != 0, d >= 1, m, n != 0");
    }
    let (_, d1) = squarefree_split(disc)?;
    if d1 % d != 0 || m % d != 0 || n % d != 0 {
        return Ok(0);
    }
    let reduced = disc / (d * d);
    Ok(d as u64 * sqrt_count(reduced, 4 * m / d)? * sqrt_count(reduced, 4 * n / d)?)
}

/// Number of orbits of semistable cubes with discriminant `D`, `|m(A)| = m`
/// and `|n(A)| = n`; zero when `D` is not 0 or 1 mod 4.
pub fn orbit_count(disc: i64, m: i64, n: i64) -> Result<u64> {
    if disc == 0 || m <= 0 || n <= 0 {
        return domain("B(D, m, n) needs D != 0 and m, n >= 1");
    }
    if !is_discriminant(disc) {
        return Ok(0);
    }
    let (_, d1) = squarefree_split(disc)?;
    let g = (d1 as u64).gcd(&(m as u64)).gcd(&(n as u64));
    divisors(g)
        .into_iter()
        .map(|d| b_term(disc, d as i64, m, n))
        .sum()
}

/// One row of the `D,m,n,B` table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrbitRow {
    #[serde(rename = "D")]
    pub d: i64,
    pub m: i64,
    pub n: i64,
    #[serde(rename = "B")]
    pub b: u64,
}

/// Rows for `1 <= |D| <= d_max` (ascending, negative first), `1 <= m, n <= m_max`,
/// restricted to `D = 0, 1 (mod 4)`.
pub fn orbit_table(d_max: i64, m_max: i64) -> Result<Vec<OrbitRow>> {
    use rayon::prelude::*;
    let ds: Vec<i64> = (-d_max..=d_max).filter(|&d| is_discriminant(d)).collect();
    let rows: Result<Vec<Vec<OrbitRow>>> = ds
        .par_iter()
        .map(|&d| {
            let mut rows = Vec::new();
            for m in 1..=m_max {
                for n in 1..=m_max {
                    rows.push(OrbitRow {
                        d,
                        m,
                        n,
                        b: orbit_count(d, m, n)?,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

//! Truncated power series in `x, y, z` whose coefficients are integer
//! polynomials in a formal prime `p`, and the two constructions of the
//! local factor of the `A3` series.

use std::fmt;

use serde::Serialize;

use crate::error::{domain, range, Result};
use crate::wmds::a_pp;

pub const DEFAULT_K: usize = 8;
pub const MAX_K: usize = 12;

/// Integer polynomial in `p`, coefficients in ascending degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Poly(Vec<i128>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: i128) -> Self {
        Poly(vec![c]).trimmed()
    }

    /// `c * p^deg`.
    pub fn monomial(c: i128, deg: usize) -> Self {
        let mut v = vec![0; deg + 1];
        v[deg] = c;
        Poly(v).trimmed()
    }

    /// The symbol `p`, or the integer it is specialized to.
    pub fn p(value: Option<i64>) -> Self {
        match value {
            None => Poly::monomial(1, 1),
            Some(v) => Poly::constant(v as i128),
        }
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let v = (0..n)
            .map(|i| self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0))
            .collect();
        Poly(v).trimmed()
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![0i128; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly(v).trimmed()
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::constant(1), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, p: i128) -> i128 {
        self.0.iter().rev().fold(0, |acc, c| acc * p + c)
    }
}

impl fmt::Display for Poly {
    /// `c0+c1*p+c2*p^2`, zero terms omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first || c < 0 {
                write!(f, "{}", if c < 0 { "-" } else { "+" })?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c.abs())?,
                1 => write!(f, "{}*p", c.abs())?,
                _ => write!(f, "{}*p^{i}", c.abs())?,
            }
        }
        Ok(())
    }
}

/// Coefficients of `x^l y^k z^t` for `0 <= l, k, t <= K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriSeries {
    k: usize,
    c: Vec<Poly>,
}

impl TriSeries {
    pub fn zero(k: usize) -> Self {
        let side = k + 1;
        Self {
            k,
            c: vec![Poly::zero(); side * side * side],
        }
    }

    pub fn one(k: usize) -> Self {
        Self::monomial(k, (0, 0, 0), Poly::constant(1))
    }

    /// `coeff * x^l y^k z^t`, dropped when beyond the truncation.
    pub fn monomial(k: usize, (l, kk, t): (usize, usize, usize), coeff: Poly) -> Self {
        let mut s = Self::zero(k);
        if l <= k && kk <= k && t <= k {
            let i = s.index(l, kk, t);
            s.c[i] = coeff;
        }
        s
    }

    /// `1 - coeff * x^l y^k z^t`.
    pub fn one_minus(k: usize, exps: (usize, usize, usize), coeff: Poly) -> Self {
        Self::one(k).sub(&Self::monomial(k, exps, coeff))
    }

    pub fn truncation(&self) -> usize {
        self.k
    }

    fn index(&self, l: usize, k: usize, t: usize) -> usize {
        let side = self.k + 1;
        (l * side + k) * side + t
    }

    pub fn get(&self, l: usize, k: usize, t: usize) -> &Poly {
        &self.c[self.index(l, k, t)]
    }

    pub fn set(&mut self, l: usize, k: usize, t: usize, v: Poly) {
        let i = self.index(l, k, t);
        self.c[i] = v;
    }

    /// `(l, k, t, coefficient)` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize, &Poly)> + '_ {
        let side = self.k + 1;
        self.c
            .iter()
            .enumerate()
            .map(move |(i, p)| (i / (side * side), (i / side) % side, i % side, p))
    }

    fn check(&self, other: &TriSeries) {
        assert_eq!(self.k, other.k, "truncation mismatch");
    }

    pub fn add(&self, other: &TriSeries) -> TriSeries {
        self.check(other);
        TriSeries {
            k: self.k,
            c: self.c.iter().zip(&other.c).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &TriSeries) -> TriSeries {
        self.check(other);
        TriSeries {
            k: self.k,
            c: self.c.iter().zip(&other.c).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale(&self, s: &Poly) -> TriSeries {
        TriSeries {
            k: self.k,
            c: self.c.iter().map(|a| a.mul(s)).collect(),
        }
    }

    pub fn mul(&self, other: &TriSeries) -> TriSeries {
        self.check(other);
        let k = self.k;
        let mut out = TriSeries::zero(k);
        let nonzero: Vec<_> = other.iter().filter(|x| !x.3.is_zero()).collect();
        for (l1, k1, t1, a) in self.iter() {
            if a.is_zero() {
                continue;
            }
            for &(l2, k2, t2, b) in &nonzero {
                let (l, kk, t) = (l1 + l2, k1 + k2, t1 + t2);
                if l > k || kk > k || t > k {
                    continue;
                }
                let i = out.index(l, kk, t);
                out.c[i] = out.c[i].add(&a.mul(b));
            }
        }
        out
    }

    /// Multiplicative inverse; the constant term must be 1.
    pub fn geometric_inverse(&self) -> Result<TriSeries> {
        if *self.get(0, 0, 0) != Poly::constant(1) {
            return domain("series inverse needs constant term 1");
        }
        let k = self.k;
        let mut inv = TriSeries::zero(k);
        inv.set(0, 0, 0, Poly::constant(1));
        let terms: Vec<_> = self
            .iter()
            .filter(|x| !x.3.is_zero() && (x.0, x.1, x.2) != (0, 0, 0))
            .map(|(l, kk, t, p)| (l, kk, t, p.clone()))
            .collect();
        for l in 0..=k {
            for kk in 0..=k {
                for t in 0..=k {
                    if (l, kk, t) == (0, 0, 0) {
                        continue;
                    }
                    let mut acc = Poly::zero();
                    for (a, b, c, p) in &terms {
                        if *a <= l && *b <= kk && *c <= t {
                            acc = acc.add(&p.mul(inv.get(l - a, kk - b, t - c)));
                        }
                    }
                    inv.set(l, kk, t, acc.neg());
                }
            }
        }
        Ok(inv)
    }

    /// Substitutes an integer for `p` in every coefficient.
    pub fn specialize(&self, p: i64) -> TriSeries {
        TriSeries {
            k: self.k,
            c: self.c.iter().map(|a| Poly::constant(a.eval(p as i128))).collect(),
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if k > MAX_K {
        return range(format!("truncation {k} exceeds maximum {MAX_K}"));
    }
    Ok(())
}

/// `a(p^k, p^l)` as a polynomial in `p`.
fn a_pp_poly(p: Option<i64>, k: u32, l: u32) -> Poly {
    match p {
        Some(v) => Poly::constant(a_pp(v as u64, k, l) as i128),
        None => {
            if k.min(l) % 2 == 0 {
                Poly::monomial(1, (k.min(l) / 2) as usize)
            } else {
                Poly::zero()
            }
        }
    }
}

/// Coefficients `a(p^k, p^l)` for `k, l <= K`, indexed `[k][l]`.
pub fn f_a2_series(k: usize, p: Option<i64>) -> Result<Vec<Vec<Poly>>> {
    check_k(k)?;
    Ok((0..=k)
        .map(|i| (0..=k).map(|j| a_pp_poly(p, i as u32, j as u32)).collect())
        .collect())
}

/// Rational function expansion: numerator times the inverses of the six denominator factors.
pub fn f_a3_expand(k: usize, p: Option<i64>) -> Result<TriSeries> {
    check_k(k)?;
    let pp = Poly::p(p);
    let one = Poly::constant(1);
    let mono = |e: (usize, usize, usize), c: Poly| TriSeries::monomial(k, e, c);
    let numerator = [
        mono((0, 0, 0), one.clone()),
        mono((1, 1, 0), one.neg()),
        mono((0, 1, 1), one.neg()),
        mono((1, 1, 1), one.clone()),
        mono((1, 2, 1), pp.clone()),
        mono((2, 2, 1), pp.neg()),
        mono((1, 2, 2), pp.neg()),
        mono((2, 3, 2), pp.clone()),
    ]
    .iter()
    .fold(TriSeries::zero(k), |acc, m| acc.add(m));
    let denominators = [
        ((1, 0, 0), one.clone()),
        ((0, 1, 0), one.clone()),
        ((0, 0, 1), one.clone()),
        ((0, 2, 2), pp.clone()),
        ((2, 2, 0), pp.clone()),
        ((2, 2, 2), pp.pow(2)),
    ];
    let mut series = numerator;
    for (e, c) in denominators {
        series = series.mul(&TriSeries::one_minus(k, e, c).geometric_inverse()?);
    }
    Ok(series)
}

/// Diagonal pairing of two `A2` factors on the shared index, times `1/(1 - p x y^2 z)`.
pub fn f_a3_convolution(k: usize, p: Option<i64>) -> Result<TriSeries> {
    let a2 = f_a2_series(k, p)?;
    let mut paired = TriSeries::zero(k);
    for l in 0..=k {
        for kk in 0..=k {
            for t in 0..=k {
                paired.set(l, kk, t, a2[kk][l].mul(&a2[kk][t]));
            }
        }
    }
    let tail = TriSeries::one_minus(k, (1, 2, 1), Poly::p(p)).geometric_inverse()?;
    Ok(paired.mul(&tail))
}

/// `sum_j p^j a(p^(k-2j), p^(l-j)) a(p^(k-2j), p^(t-j))`.
pub fn convolution_coefficient(p: Option<i64>, l: u32, k: u32, t: u32) -> Poly {
    let pp = Poly::p(p);
    let mut acc = Poly::zero();
    let mut j = 0;
    while 2 * j <= k && j <= l && j <= t {
        let term = a_pp_poly(p, k - 2 * j, l - j).mul(&a_pp_poly(p, k - 2 * j, t - j));
        acc = acc.add(&pp.pow(j).mul(&term));
        j += 1;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub l: usize,
    pub k: usize,
    pub t: usize,
    pub expansion: String,
    pub convolution: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Thm44Report {
    pub truncation: usize,
    pub p: Option<i64>,
    pub equal: bool,
    pub first_mismatch: Option<Mismatch>,
}

/// Coefficientwise comparison of [`f_a3_expand`] and [`f_a3_convolution`].
pub fn thm44_check(k: usize, p: Option<i64>) -> Result<Thm44Report> {
    let lhs = f_a3_expand(k, p)?;
    let rhs = f_a3_convolution(k, p)?;
    let first_mismatch = lhs
        .iter()
        .zip(rhs.iter())
        .find(|(a, b)| a.3 != b.3)
        .map(|(a, b)| Mismatch {
            l: a.0,
            k: a.1,
            t: a.2,
            expansion: a.3.to_string(),
            convolution: b.3.to_string(),
        });
    Ok(Thm44Report {
        truncation: k,
        p,
        equal: first_mismatch.is_none(),
        first_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wmds::a_coeff3;
    use proptest::prelude::*;

    fn p() -> Poly {
        Poly::p(None)
    }

    #[test]
    fn poly_rendering() {
        assert_eq!(Poly::zero().to_string(), "0");
        assert_eq!(Poly::constant(1).to_string(), "1");
        assert_eq!(p().to_string(), "1*p");
        assert_eq!(Poly(vec![1, -2, 0, 3]).to_string(), "1-2*p+3*p^3");
        assert_eq!(Poly(vec![0, -1]).to_string(), "-1*p");
    }

    #[test]
    fn geometric_identity() {
        let k = 6;
        let mut geo = TriSeries::zero(k);
        for l in 0..=k {
            geo.set(l, 0, 0, Poly::constant(1));
        }
        let prod = TriSeries::one_minus(k, (1, 0, 0), Poly::constant(1)).mul(&geo);
        assert_eq!(prod, TriSeries::one(k));
    }

    #[test]
    fn inverse_of_tail_factor() {
        let k = 8;
        let inv = TriSeries::one_minus(k, (1, 2, 1), p()).geometric_inverse().unwrap();
        for (l, kk, t, c) in inv.iter() {
            if kk == 2 * l && t == l {
                assert_eq!(*c, Poly::monomial(1, l));
            } else {
                assert!(c.is_zero(), "({l},{kk},{t})");
            }
        }
    }

    #[test]
    fn inverse_requires_unit_constant() {
        let s = TriSeries::monomial(3, (0, 0, 0), Poly::constant(2));
        assert!(s.geometric_inverse().is_err());
        assert!(TriSeries::zero(3).geometric_inverse().is_err());
    }

    #[test]
    fn f_a2_examples() {
        let s = f_a2_series(4, None).unwrap();
        assert_eq!(s[0][0], Poly::constant(1));
        assert_eq!(s[2][2], p());
        assert!(s[1][1].is_zero());
    }

    #[test]
    fn f_a3_expand_examples() {
        let k = DEFAULT_K;
        let s = f_a3_expand(k, None).unwrap();
        assert_eq!(*s.get(0, 0, 0), Poly::constant(1));
        assert_eq!(*s.get(1, 2, 1), p());
        for l in 0..=k {
            for t in 0..=k {
                assert_eq!(*s.get(l, 0, t), Poly::constant(1));
            }
        }
        assert!(f_a3_expand(MAX_K + 1, None).is_err());
    }

    #[test]
    fn convolution_examples() {
        assert_eq!(convolution_coefficient(None, 1, 2, 1), p());
        assert!(convolution_coefficient(None, 1, 1, 1).is_zero());
        for l in 0..5 {
            for t in 0..5 {
                assert_eq!(convolution_coefficient(None, l, 0, t), Poly::constant(1));
            }
        }
        let s = f_a3_convolution(6, None).unwrap();
        for (l, k, t, c) in s.iter() {
            assert_eq!(*c, convolution_coefficient(None, l as u32, k as u32, t as u32));
        }
    }

    #[test]
    fn expansions_agree_symbolically() {
        let r = thm44_check(DEFAULT_K, None).unwrap();
        assert!(r.equal, "{r:?}");
        assert!(thm44_check(0, None).unwrap().equal);
    }

    #[test]
    fn specialization_commutes() {
        let sym = f_a3_expand(6, None).unwrap();
        for v in [2i64, 3, 5] {
            assert_eq!(sym.specialize(v), f_a3_expand(6, Some(v)).unwrap());
            assert!(thm44_check(6, Some(v)).unwrap().equal);
        }
    }

    #[test]
    fn matches_divisor_sum_coefficients() {
        for v in [3i64, 5] {
            let s = f_a3_convolution(6, Some(v)).unwrap();
            for (l, k, t, c) in s.iter() {
                let d = v.pow(k as u32);
                let expected = a_coeff3(d, (v as u64).pow(l as u32), (v as u64).pow(t as u32)).unwrap();
                assert_eq!(c.eval(0), expected as i128, "p={v} ({l},{k},{t})");
            }
        }
    }

    fn small_series() -> impl Strategy<Value = TriSeries> {
        prop::collection::vec(prop::collection::vec(-3i128..=3, 0..3), 27).prop_map(|cs| {
            let mut s = TriSeries::zero(2);
            for (i, c) in cs.into_iter().enumerate() {
                s.set(i / 9, (i / 3) % 3, i % 3, Poly(c).trimmed());
            }
            s
        })
    }

    proptest! {
        #[test]
        fn mul_commutes(a in small_series(), b in small_series()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }

        #[test]
        fn inverse_round_trips(a in small_series()) {
            let mut a = a;
            a.set(0, 0, 0, Poly::constant(1));
            let inv = a.geometric_inverse().unwrap();
            prop_assert_eq!(a.mul(&inv), TriSeries::one(2));
        }
    }
}

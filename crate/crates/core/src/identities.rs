//! Truncated Dirichlet series with exact rational coefficients and
//! coefficientwise checks of the series identities relating root counts,
//! orbit counts and the multiple Dirichlet series coefficients.
//!
//! Direct counting is always the left-hand side. Closed forms are checked
//! both as written (`Variant::Printed`) and with corrected normalizations
//! (`Variant::Corrected`).

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::congruence::{chi, is_discriminant, kronecker, moebius, sqrt_count, DiscriminantData};
use crate::error::{domain, range, Result};
use crate::orbits::orbit_count;
use crate::wmds::{a_coeff3, is_odd_discriminant, tilde_a};

pub type Q = Ratio<i128>;

pub const MAX_M: usize = 2000;
pub const MAX_BI_M: usize = 128;

/// `c[n]` for `1 <= n <= M`; index 0 is unused and kept at zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletCoeffs {
    c: Vec<Q>,
}

impl DirichletCoeffs {
    pub fn zero(m: usize) -> Self {
        Self {
            c: vec![Q::zero(); m + 1],
        }
    }

    /// The unit `delta_1`.
    pub fn one(m: usize) -> Self {
        let mut s = Self::zero(m);
        if m >= 1 {
            s.c[1] = Q::one();
        }
        s
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize) -> Q) -> Self {
        let mut s = Self::zero(m);
        for n in 1..=m {
            s.c[n] = f(n);
        }
        s
    }

    pub fn from_ints(m: usize, mut f: impl FnMut(usize) -> i128) -> Self {
        Self::from_fn(m, |n| Q::from_integer(f(n)))
    }

    /// Fallible version of [`DirichletCoeffs::from_ints`].
    pub fn try_from_ints(m: usize, mut f: impl FnMut(usize) -> Result<i128>) -> Result<Self> {
        let mut s = Self::zero(m);
        for n in 1..=m {
            s.c[n] = Q::from_integer(f(n)?);
        }
        Ok(s)
    }

    pub fn truncation(&self) -> usize {
        self.c.len() - 1
    }

    pub fn get(&self, n: usize) -> Q {
        self.c[n]
    }

    pub fn set(&mut self, n: usize, v: Q) {
        self.c[n] = v;
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c[1..]
    }

    pub fn scale(&self, k: Q) -> Self {
        Self {
            c: self.c.iter().map(|x| x * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.truncation(), other.truncation(), "truncation mismatch");
        Self {
            c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect(),
        }
    }

    /// Index of the first differing coefficient.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        (1..=self.truncation().min(other.truncation())).find(|&n| self.c[n] != other.c[n])
    }
}

/// `(F * G)[n] = sum_{d | n} F[d] G[n/d]`.
pub fn convolve(f: &DirichletCoeffs, g: &DirichletCoeffs) -> DirichletCoeffs {
    let m = f.truncation();
    assert_eq!(m, g.truncation(), "truncation mismatch");
    let mut out = DirichletCoeffs::zero(m);
    for i in 1..=m {
        if f.c[i].is_zero() {
            continue;
        }
        for j in 1..=m / i {
            out.c[i * j] += f.c[i] * g.c[j];
        }
    }
    out
}

/// `c[m][n]` for `1 <= m, n <= M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiDirichletCoeffs {
    m: usize,
    c: Vec<Q>,
}

impl BiDirichletCoeffs {
    pub fn zero(m: usize) -> Self {
        Self {
            m,
            c: vec![Q::zero(); (m + 1) * (m + 1)],
        }
    }

    pub fn try_from_ints(m: usize, f: impl Fn(usize, usize) -> Result<i128> + Sync) -> Result<Self> {
        let rows: Vec<Vec<Q>> = (0..=m)
            .into_par_iter()
            .map(|i| {
                (0..=m)
                    .map(|j| {
                        if i == 0 || j == 0 {
                            Ok(Q::zero())
                        } else {
                            f(i, j).map(Q::from_integer)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            m,
            c: rows.into_iter().flatten().collect(),
        })
    }

    pub fn truncation(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        self.c[i * (self.m + 1) + j]
    }

    fn add_at(&mut self, i: usize, j: usize, v: Q) {
        self.c[i * (self.m + 1) + j] += v;
    }

    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize)> {
        let m = self.m.min(other.m);
        for i in 1..=m {
            for j in 1..=m {
                if self.get(i, j) != other.get(i, j) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// `out[m][n] = sum_{i | m, j | n} g1[i] g2[j] H[m/i][n/j]`.
pub fn convolve_bi(h: &BiDirichletCoeffs, g1: &DirichletCoeffs, g2: &DirichletCoeffs) -> BiDirichletCoeffs {
    let m = h.truncation();
    assert!(g1.truncation() == m && g2.truncation() == m, "truncation mismatch");
    let mut out = BiDirichletCoeffs::zero(m);
    for i in 1..=m {
        if g1.c[i].is_zero() {
            continue;
        }
        for j in 1..=m {
            if g2.c[j].is_zero() {
                continue;
            }
            let w = g1.c[i] * g2.c[j];
            for a in 1..=m / i {
                for b in 1..=m / j {
                    let v = h.get(a, b);
                    if !v.is_zero() {
                        out.add_at(a * i, b * j, w * v);
                    }
                }
            }
        }
    }
    out
}

/// Which closed form to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Printed,
    Corrected,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Printed => "printed",
            Variant::Corrected => "corrected",
        }
    }
}

/// Power series in `q = p^-s` with a leading exponent offset.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Laurent {
    low: i32,
    c: Vec<i128>,
}

impl Laurent {
    fn poly(c: Vec<i128>) -> Self {
        Self { low: 0, c }
    }

    fn geometric(sign: i128, step: usize, len: usize) -> Self {
        let mut c = vec![0; len];
        let mut v = 1;
        for i in (0..len).step_by(step) {
            c[i] = v;
            v *= sign;
        }
        Self::poly(c)
    }

    fn coeff(&self, e: i32) -> i128 {
        let i = e - self.low;
        if i < 0 {
            0
        } else {
            self.c.get(i as usize).copied().unwrap_or(0)
        }
    }

    fn high(&self) -> i32 {
        self.low + self.c.len() as i32
    }

    fn add(&self, o: &Self) -> Self {
        let low = self.low.min(o.low);
        let high = self.high().max(o.high());
        Self {
            low,
            c: (low..high).map(|e| self.coeff(e) + o.coeff(e)).collect(),
        }
    }

    fn neg(&self) -> Self {
        Self {
            low: self.low,
            c: self.c.iter().map(|x| -x).collect(),
        }
    }

    fn mul(&self, o: &Self, len: usize) -> Self {
        let mut c = vec![0i128; len];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                if i + j < len {
                    c[i + j] += a * b;
                }
            }
        }
        Self {
            low: self.low + o.low,
            c,
        }
    }

    fn shift(&self, by: i32) -> Self {
        Self {
            low: self.low + by,
            c: self.c.clone(),
        }
    }

    /// Lowest negative exponent with a nonzero coefficient.
    fn negative_support(&self) -> Option<i32> {
        (self.low..0).find(|&e| self.coeff(e) != 0)
    }
}

fn max_exponent(p: u64, m: usize) -> usize {
    let mut e = 0;
    let mut v = p as usize;
    while v <= m {
        e += 1;
        v *= p as usize;
    }
    e
}

/// Places a local series in `p^-s` at the indices `p^j`.
fn embed(local: &Laurent, p: u64, m: usize) -> DirichletCoeffs {
    let mut s = DirichletCoeffs::zero(m);
    let mut pj = 1usize;
    let mut j = 0i32;
    while pj <= m {
        s.c[pj] = Q::from_integer(local.coeff(j));
        pj *= p as usize;
        j += 1;
    }
    s
}

/// `p^a q^(2a) + (1 - chi q) sum_{l < a} p^l q^(2l)` at an odd prime.
fn odd_siegel_factor(p: u64, alpha: u32, chi_p: i128, len: usize) -> Laurent {
    let mut c = vec![0i128; len.max(2 * alpha as usize + 2)];
    c[2 * alpha as usize] += (p as i128).pow(alpha);
    for l in 0..alpha as usize {
        let w = (p as i128).pow(l as u32);
        c[2 * l] += w;
        c[2 * l + 1] -= chi_p * w;
    }
    Laurent::poly(c)
}

/// Right-hand side of Siegel's 2-adic formula, as a series in `q = 2^-s`.
fn siegel_two(alpha: u32, chi2: i128, len: usize) -> Laurent {
    let lead = Laurent::geometric(-1, 1, len).mul(&Laurent::poly(vec![1 + chi2]), len);
    let mut tail = vec![0i128; len.max(2 * alpha as usize + 1)];
    for l in 0..=alpha as usize {
        tail[2 * l] = 2i128.pow(l as u32);
    }
    lead.add(&Laurent::poly(vec![-chi2, 2]).mul(&Laurent::poly(tail), len))
}

/// 2-adic factor of `sum A(d, a) a^-s` relative to `zeta(s) L(s) / zeta(2s)`.
fn p_two_factor(alpha: u32, chi2: i128, variant: Variant, len: usize) -> Laurent {
    let rhs2 = siegel_two(alpha, chi2, len);
    let lin = Laurent::poly(vec![1, -chi2]).mul(&Laurent::poly(vec![1, -1]), len);
    match variant {
        Variant::Printed => lin
            .mul(&Laurent::geometric(-1, 2, len), len)
            .add(&rhs2.shift(1)),
        Variant::Corrected => lin
            .mul(&Laurent::geometric(1, 2, len), len)
            .add(&rhs2.shift(1)),
    }
}

/// 2-adic factor of `sum A(d, 4a) a^-s` relative to `zeta(s) L(s) / zeta(2s)`.
fn p_prime_two_factor(alpha: u32, chi2: i128, variant: Variant, len: usize) -> Laurent {
    let rhs2 = siegel_two(alpha, chi2, len);
    let lin = Laurent::poly(vec![1, -chi2]).mul(&Laurent::poly(vec![1, -1]), len);
    let bracket = rhs2.add(&lin.mul(&Laurent::geometric(1, 2, len), len).neg());
    match variant {
        Variant::Printed => bracket.shift(-2),
        Variant::Corrected => bracket.shift(-1),
    }
}

/// Local factor data of `d`: `(p, alpha_p, chi_d(p))` for every odd `p` with `alpha_p > 0`.
fn odd_local_data(data: &DiscriminantData) -> Vec<(u64, u32, i128)> {
    data.alpha
        .iter()
        .filter(|(&p, _)| p != 2)
        .map(|(&p, &a)| (p, a, kronecker(data.dstar, p) as i128))
        .collect()
}

/// Euler product of the correction factor, or the lowest `2^-k` index it
/// reaches when the 2-adic factor has negative exponents.
fn correction_series(d: i64, m: usize, prime: bool, variant: Variant) -> Result<std::result::Result<DirichletCoeffs, i32>> {
    let data = DiscriminantData::new(d)?;
    let len = max_exponent(2, m) + 4;
    let chi2 = kronecker(data.dstar, 2) as i128;
    let two = if prime {
        p_prime_two_factor(data.alpha(2), chi2, variant, len)
    } else {
        p_two_factor(data.alpha(2), chi2, variant, len)
    };
    if let Some(e) = two.negative_support() {
        return Ok(Err(e));
    }
    let mut series = embed(&two, 2, m);
    for (p, alpha, chi_p) in odd_local_data(&data) {
        let local = odd_siegel_factor(p, alpha, chi_p, max_exponent(p, m) + 1);
        series = convolve(&series, &embed(&local, p, m));
    }
    Ok(Ok(series))
}

/// Named coefficient arrays.
///
/// `P_siegel` and `P_prime` take the closed forms as written; the
/// `_corrected` names use the corrected 2-adic normalization.
pub fn standard_series(name: &str, param: Option<i64>, m: usize) -> Result<DirichletCoeffs> {
    let need = || param.ok_or_else(|| crate::Error::Domain(format!("series {name} needs a parameter")));
    match name {
        "zeta" => Ok(DirichletCoeffs::from_ints(m, |_| 1)),
        "zeta2s_inverse" => Ok(DirichletCoeffs::from_ints(m, |n| {
            let r = (n as f64).sqrt().round() as usize;
            if r * r == n {
                moebius(r as u64) as i128
            } else {
                0
            }
        })),
        "L_chi" => {
            let d = need()?;
            DirichletCoeffs::try_from_ints(m, |n| Ok(chi(d, n as u64)? as i128))
        }
        "two_factor" => {
            let mut s = DirichletCoeffs::zero(m);
            if m >= 1 {
                s.c[1] = Q::from_integer(2);
            }
            if m >= 4 {
                s.c[4] = Q::from_integer(-2);
            }
            Ok(s)
        }
        "P_tilde2" => {
            let d = need()?;
            if d.rem_euclid(4) == 1 {
                standard_series("two_factor", None, m)
            } else {
                Ok(DirichletCoeffs::zero(m))
            }
        }
        "P_siegel" | "P_prime" | "P_siegel_corrected" | "P_prime_corrected" => {
            let d = need()?;
            let variant = if name.ends_with("_corrected") {
                Variant::Corrected
            } else {
                Variant::Printed
            };
            match correction_series(d, m, name.starts_with("P_prime"), variant)? {
                Ok(s) => Ok(s),
                Err(e) => domain(format!("{name}({d}) has a term at 2^{e}; not a Dirichlet series")),
            }
        }
        _ => domain(format!("unknown series {name:?}")),
    }
}

/// First disagreement between the two sides of an identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub index: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Both sides agree.
    Pass,
    /// Disagreement in a check that must hold.
    Fail,
    /// Disagreement in a report-mode check, documented rather than asserted.
    Finding,
}

/// JSON-serializable outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub schema: u32,
    pub identity: String,
    pub variant: Variant,
    pub params: Value,
    pub status: Status,
    pub first_mismatch: Option<Mismatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finding: Option<String>,
}

impl IdentityReport {
    fn new(identity: &str, variant: Variant, params: Value, mismatch: Option<Mismatch>) -> Self {
        Self {
            schema: 1,
            identity: identity.to_string(),
            variant,
            params,
            status: if mismatch.is_some() { Status::Fail } else { Status::Pass },
            first_mismatch: mismatch,
            finding: None,
        }
    }

    fn into_finding(mut self, note: &str) -> Self {
        if self.status == Status::Fail {
            self.status = Status::Finding;
            self.finding = Some(note.to_string());
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

fn series_mismatch(lhs: &DirichletCoeffs, rhs: &DirichletCoeffs) -> Option<Mismatch> {
    lhs.first_difference(rhs).map(|n| Mismatch {
        index: n.to_string(),
        lhs: lhs.get(n).to_string(),
        rhs: rhs.get(n).to_string(),
    })
}

fn check_m(m: usize, max: usize) -> Result<()> {
    if m == 0 || m > max {
        return range(format!("truncation {m} outside 1..={max}"));
    }
    Ok(())
}

fn siegel_side(d: i64, m: usize, prime: bool, variant: Variant) -> Result<std::result::Result<DirichletCoeffs, Mismatch>> {
    let base = convolve(
        &convolve(&standard_series("zeta2s_inverse", None, m)?, &standard_series("zeta", None, m)?),
        &standard_series("L_chi", Some(d), m)?,
    );
    Ok(match correction_series(d, m, prime, variant)? {
        Ok(p) => Ok(convolve(&base, &p)),
        Err(e) => Err(Mismatch {
            index: format!("2^{e}"),
            lhs: "0".into(),
            rhs: "nonzero".into(),
        }),
    })
}

const TWO_ADIC_NOTE: &str = "closed-form 2-adic factor disagrees with direct root counting";

/// `sum_a A(d, a) a^-s` against `zeta(s) L(s, chi_d) P(d, s) / zeta(2s)`.
pub fn verify_prop21(d: i64, m: usize, variant: Variant) -> Result<IdentityReport> {
    check_m(m, MAX_M)?;
    let lhs = DirichletCoeffs::try_from_ints(m, |a| Ok(sqrt_count(d, a as i64)? as i128))?;
    let mismatch = match siegel_side(d, m, false, variant)? {
        Ok(rhs) => series_mismatch(&lhs, &rhs),
        Err(mm) => Some(mm),
    };
    Ok(IdentityReport::new("prop21", variant, json!({"d": d, "M": m}), mismatch).into_finding(TWO_ADIC_NOTE))
}

/// `sum_a A(d, 4a) a^-s` against `zeta(s) L(s, chi_d) P'(d, s) / zeta(2s)`.
pub fn verify_cor24(d: i64, m: usize, variant: Variant) -> Result<IdentityReport> {
    check_m(m, MAX_M)?;
    let lhs = DirichletCoeffs::try_from_ints(m, |a| Ok(sqrt_count(d, 4 * a as i64)? as i128))?;
    let mismatch = match siegel_side(d, m, true, variant)? {
        Ok(rhs) => series_mismatch(&lhs, &rhs),
        Err(mm) => Some(mm),
    };
    Ok(IdentityReport::new("cor24", variant, json!({"d": d, "M": m}), mismatch).into_finding(TWO_ADIC_NOTE))
}

/// Per-variable factor multiplying the twisted `A2` coefficients:
/// `2 (1 - 4^-s) zeta(s)` as written, `2 zeta(s) / zeta(2s)` corrected.
pub fn a2_factor(d: i64, m: usize, variant: Variant) -> Result<DirichletCoeffs> {
    let zeta = standard_series("zeta", None, m)?;
    Ok(match variant {
        Variant::Printed => convolve(&standard_series("P_tilde2", Some(d), m)?, &zeta),
        Variant::Corrected => {
            if !is_odd_discriminant(d) {
                DirichletCoeffs::zero(m)
            } else {
                convolve(&zeta, &standard_series("zeta2s_inverse", None, m)?).scale(Q::from_integer(2))
            }
        }
    })
}

fn twisted(d: i64, m: usize) -> Result<DirichletCoeffs> {
    DirichletCoeffs::try_from_ints(m, |k| Ok(tilde_a(d, k as u64)? as i128))
}

/// `sum_m A(D, 4m) m^-s` against the factor of [`a2_factor`] times `sum chi_D(m^) a(D, m) m^-s`.
pub fn verify_prop25(d: i64, m: usize, variant: Variant) -> Result<IdentityReport> {
    check_m(m, MAX_M)?;
    if d % 2 == 0 {
        return domain(format!("{d} is even"));
    }
    let lhs = DirichletCoeffs::try_from_ints(m, |k| Ok(sqrt_count(d, 4 * k as i64)? as i128))?;
    let rhs = if is_odd_discriminant(d) {
        convolve(&a2_factor(d, m, variant)?, &twisted(d, m)?)
    } else {
        DirichletCoeffs::zero(m)
    };
    Ok(IdentityReport::new(
        "prop25",
        variant,
        json!({"D": d, "M": m}),
        series_mismatch(&lhs, &rhs),
    ))
}

/// `B(D, m, n)` for `m, n <= M`.
pub fn orbit_grid(d: i64, m: usize) -> Result<BiDirichletCoeffs> {
    BiDirichletCoeffs::try_from_ints(m, |i, j| Ok(orbit_count(d, i as i64, j as i64)? as i128))
}

/// `chi_D(m^) chi_D(n^) a(D, m, n)` for `m, n <= M`.
pub fn twisted_a3_grid(d: i64, m: usize) -> Result<BiDirichletCoeffs> {
    let chis: Vec<i128> = std::iter::once(Ok(0))
        .chain((1..=m).map(|k| tilde_sign(d, k as u64)))
        .collect::<Result<_>>()?;
    BiDirichletCoeffs::try_from_ints(m, |i, j| {
        if chis[i] == 0 || chis[j] == 0 {
            return Ok(0);
        }
        Ok(chis[i] * chis[j] * a_coeff3(d, i as u64, j as u64)? as i128)
    })
}

fn tilde_sign(d: i64, m: u64) -> Result<i128> {
    Ok(chi(d, crate::congruence::hat(m, d)?)? as i128)
}

/// `B(D, m, n)` against the per-variable convolution of the twisted `A3` grid.
pub fn verify_thm12(d: i64, m: usize, variant: Variant) -> Result<IdentityReport> {
    check_m(m, MAX_BI_M)?;
    if !is_odd_discriminant(d) {
        return domain(format!("{d} is not an odd discriminant"));
    }
    let lhs = orbit_grid(d, m)?;
    let g = a2_factor(d, m, variant)?;
    let rhs = convolve_bi(&twisted_a3_grid(d, m)?, &g, &g);
    let mismatch = lhs.first_difference(&rhs).map(|(i, j)| Mismatch {
        index: format!("({i},{j})"),
        lhs: lhs.get(i, j).to_string(),
        rhs: rhs.get(i, j).to_string(),
    });
    Ok(IdentityReport::new("thm12", variant, json!({"D": d, "M": m}), mismatch))
}

/// `sum_{d | gcd(D1, m, n)} d A~(D/d^2, m/d) A~(D/d^2, n/d) = chi_D(m^) chi_D(n^) a(D, m, n)`.
pub fn verify_lemma41(d: i64, m: usize) -> Result<IdentityReport> {
    check_m(m, MAX_BI_M)?;
    if !is_odd_discriminant(d) {
        return domain(format!("{d} is not an odd discriminant"));
    }
    let data = DiscriminantData::new(d)?;
    let rhs = twisted_a3_grid(d, m)?;
    let lhs = BiDirichletCoeffs::try_from_ints(m, |i, j| {
        let mut total = 0i128;
        for e in crate::congruence::divisors(data.d1 as u64) {
            let (e, ei) = (e as usize, e as i64);
            if i % e != 0 || j % e != 0 {
                continue;
            }
            let reduced = d / (ei * ei);
            total += ei as i128
                * tilde_a(reduced, (i / e) as u64)? as i128
                * tilde_a(reduced, (j / e) as u64)? as i128;
        }
        Ok(total)
    })?;
    let mismatch = lhs.first_difference(&rhs).map(|(i, j)| Mismatch {
        index: format!("({i},{j})"),
        lhs: lhs.get(i, j).to_string(),
        rhs: rhs.get(i, j).to_string(),
    });
    Ok(IdentityReport::new("lemma41", Variant::Printed, json!({"D": d, "M": m}), mismatch))
}

/// Splitting of the two-variable binary-form zeta coefficients by sign of the discriminant.
///
/// For `1 <= a, d <= bound`, the number of forms `(a', b, c)` with `|a'| = a`,
/// `0 <= b < 2a` and `|b^2 - 4a'c| = d`, counted directly, must equal
/// `A(d, 4a) + A(-d, 4a)`; also `A(d, 4a) = A(d, -4a)`.
pub fn verify_lemma22(bound: i64) -> Result<IdentityReport> {
    let mut mismatch = None;
    'outer: for a in 1..=bound {
        for d in 1..=bound {
            for dd in [d, -d] {
                if sqrt_count(dd, 4 * a)? != sqrt_count(dd, -4 * a)? {
                    mismatch = Some(Mismatch {
                        index: format!("sign({dd},{a})"),
                        lhs: sqrt_count(dd, 4 * a)?.to_string(),
                        rhs: sqrt_count(dd, -4 * a)?.to_string(),
                    });
                    break 'outer;
                }
            }
            let mut direct = 0u64;
            for sa in [a, -a] {
                for b in 0..2 * a {
                    for disc in [d, -d] {
                        if (b * b - disc) % (4 * sa) == 0 {
                            direct += 1;
                        }
                    }
                }
            }
            let formula = sqrt_count(d, 4 * a)? + sqrt_count(-d, 4 * a)?;
            if direct != formula {
                mismatch = Some(Mismatch {
                    index: format!("({a},{d})"),
                    lhs: direct.to_string(),
                    rhs: formula.to_string(),
                });
                break 'outer;
            }
        }
    }
    Ok(IdentityReport::new("lemma22", Variant::Printed, json!({"bound": bound}), mismatch))
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSum {
    pub s1: f64,
    pub s2: f64,
    pub w: f64,
    pub d_max: i64,
    pub m_max: i64,
    pub value: f64,
    /// False outside the region `s1, s2, w > 1`.
    pub converges: bool,
}

/// `sum_{0<|D|<=Dmax} |D|^-w sum_{m,n<=M} B(D,m,n) m^-s1 n^-s2`.
pub fn partial_sum(s1: f64, s2: f64, w: f64, d_max: i64, m_max: i64) -> Result<PartialSum> {
    if d_max < 0 || m_max < 0 {
        return domain("bounds must be nonnegative");
    }
    let ds: Vec<i64> = (-d_max..=d_max).filter(|&d| is_discriminant(d)).collect();
    let per_d: Vec<f64> = ds
        .par_iter()
        .map(|&d| {
            let mut inner = NeumaierSum::default();
            for m in 1..=m_max {
                for n in 1..=m_max {
                    let b = orbit_count(d, m, n)?;
                    if b != 0 {
                        inner.add(b as f64 * (m as f64).powf(-s1) * (n as f64).powf(-s2));
                    }
                }
            }
            Ok(inner.value() * (d.unsigned_abs() as f64).powf(-w))
        })
        .collect::<Result<_>>()?;
    let mut total = NeumaierSum::default();
    for v in per_d {
        total.add(v);
    }
    Ok(PartialSum {
        s1,
        s2,
        w,
        d_max,
        m_max,
        value: total.value(),
        converges: s1 > 1.0 && s2 > 1.0 && w > 1.0,
    })
}

/// Summary counts over a batch of reports, keyed by status.
pub fn tally(reports: &[IdentityReport]) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for r in reports {
        let key = match r.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Finding => "finding",
        };
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

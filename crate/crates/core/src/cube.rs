//! 2x2x2 integer cubes, their three binary quadratic forms and invariants,
//! and the action of `B'2(Z) x B'2(Z) x SL2(Z)`.
//!
//! Entries are stored as `(a, b, c, d, e, f, g, h)`: front face
//! `M1 = [[a, b], [c, d]]`, back face `N1 = [[e, f], [g, h]]`. The other
//! slicings are `M2 = [[a, c], [e, g]], N2 = [[b, d], [f, h]]` and
//! `M3 = [[a, e], [b, f]], N3 = [[c, g], [d, h]]`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::congruence::divisors;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 8]", into = "[i64; 8]")]
pub struct Cube {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub e: i64,
    pub f: i64,
    pub g: i64,
    pub h: i64,
}

/// `a u^2 + b u v + c v^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryQuadraticForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl BinaryQuadraticForm {
    pub fn new(a: i128, b: i128, c: i128) -> Self {
        Self { a, b, c }
    }

    pub fn disc(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// gcd of the coefficients; 0 for the zero form.
    pub fn content(&self) -> i128 {
        self.a.gcd(&self.b).gcd(&self.c)
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    pub fn eval(&self, u: i128, v: i128) -> i128 {
        self.a * u * u + self.b * u * v + self.c * v * v
    }
}

/// `(D, m, n)`: the discriminant and the determinants of `M1` and `M2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvariantTriple {
    #[serde(rename = "D")]
    pub d: i128,
    pub m: i128,
    pub n: i128,
}

/// One generator of the acting group. Words are applied left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupElement {
    /// `[[1, 0], [k, 1]]` on the first factor.
    Factor1(i64),
    /// `[[1, 0], [k, 1]]` on the second factor.
    Factor2(i64),
    /// A determinant one matrix on the third factor.
    Factor3([[i64; 2]; 2]),
}

impl GroupElement {
    pub const ROTATION: GroupElement = GroupElement::Factor3([[0, -1], [1, 0]]);

    pub fn shear(k: i64) -> GroupElement {
        GroupElement::Factor3([[1, k], [0, 1]])
    }

    pub fn validate(&self) -> Result<()> {
        if let GroupElement::Factor3([[p, q], [r, s]]) = *self {
            let det = p as i128 * s as i128 - q as i128 * r as i128;
            if det != 1 {
                return domain(format!("factor3 matrix has determinant {det}, expected 1"));
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        match *self {
            GroupElement::Factor1(k) | GroupElement::Factor2(k) => k == 0,
            GroupElement::Factor3(g) => g == [[1, 0], [0, 1]],
        }
    }
}

impl From<[i64; 8]> for Cube {
    fn from(x: [i64; 8]) -> Self {
        Cube {
            a: x[0],
            b: x[1],
            c: x[2],
            d: x[3],
            e: x[4],
            f: x[5],
            g: x[6],
            h: x[7],
        }
    }
}

impl From<Cube> for [i64; 8] {
    fn from(c: Cube) -> Self {
        c.to_array()
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.to_array();
        write!(
            f,
            "{} {} {} {} {} {} {} {}",
            x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]
        )
    }
}

impl FromStr for Cube {
    type Err = Error;

    /// Eight integers separated by whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|e| Error::Domain(format!("bad cube entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let arr: [i64; 8] = parts
            .try_into()
            .map_err(|v: Vec<i64>| Error::Domain(format!("cube needs 8 entries, got {}", v.len())))?;
        Ok(arr.into())
    }
}

impl Cube {
    pub const ZERO: Cube = Cube {
        a: 0,
        b: 0,
        c: 0,
        d: 0,
        e: 0,
        f: 0,
        g: 0,
        h: 0,
    };

    pub fn new(entries: [i64; 8]) -> Self {
        entries.into()
    }

    pub fn to_array(&self) -> [i64; 8] {
        [self.a, self.b, self.c, self.d, self.e, self.f, self.g, self.h]
    }

    pub fn scaled(&self, k: i64) -> Cube {
        self.to_array().map(|x| x * k).into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cube serializes")
    }

    pub fn from_json(s: &str) -> Result<Cube> {
        serde_json::from_str(s).map_err(|e| Error::Domain(format!("bad cube JSON: {e}")))
    }

    /// `Q_i(u, v) = det(M_i u - N_i v)` for `i = 1, 2, 3`.
    pub fn forms(&self) -> [BinaryQuadraticForm; 3] {
        let [a, b, c, d, e, f, g, h] = self.to_array().map(|x| x as i128);
        [
            BinaryQuadraticForm::new(a * d - b * c, -a * h + b * g + c * f - d * e, e * h - f * g),
            BinaryQuadraticForm::new(a * g - c * e, -a * h - b * g + c * f + d * e, b * h - d * f),
            BinaryQuadraticForm::new(a * f - b * e, -a * h + b * g - c * f + d * e, c * h - d * g),
        ]
    }

    pub fn invariants(&self) -> InvariantTriple {
        let [q1, q2, _] = self.forms();
        InvariantTriple {
            d: q1.disc(),
            m: q1.a,
            n: q2.a,
        }
    }

    pub fn is_semistable(&self) -> bool {
        let inv = self.invariants();
        inv.d != 0 && inv.m != 0 && inv.n != 0
    }

    pub fn is_projective(&self) -> bool {
        self.forms().iter().all(BinaryQuadraticForm::is_primitive)
    }

    fn apply(&self, g: &GroupElement) -> Cube {
        let Cube {
            a,
            b,
            c,
            d,
            e,
            f,
            g: gg,
            h,
        } = *self;
        match *g {
            GroupElement::Factor1(k) => Cube {
                e: e + k * a,
                f: f + k * b,
                g: gg + k * c,
                h: h + k * d,
                ..*self
            },
            GroupElement::Factor2(k) => Cube {
                b: b + k * a,
                d: d + k * c,
                f: f + k * e,
                h: h + k * gg,
                ..*self
            },
            GroupElement::Factor3([[p, q], [r, s]]) => Cube {
                a: p * a + q * c,
                e: p * e + q * gg,
                b: p * b + q * d,
                f: p * f + q * h,
                c: r * a + s * c,
                g: r * e + s * gg,
                d: r * b + s * d,
                h: r * f + s * h,
            },
        }
    }

    /// Applies a word of generators, first element first.
    pub fn act(&self, word: &[GroupElement]) -> Result<Cube> {
        word.iter().try_fold(*self, |cube, g| {
            g.validate()?;
            Ok(cube.apply(g))
        })
    }

    /// Unique representative of the orbit of a semistable cube.
    ///
    /// Characterized by `c = 0`, `a > 0`, `Q1` middle coefficient in
    /// `[0, 2|m|)`, `Q2` middle coefficient in `[0, 2|n|)` and `e` in `[0, |g|)`.
    pub fn canonical_form(&self) -> Result<Cube> {
        if !self.is_semistable() {
            return domain("canonical form needs a semistable cube");
        }
        let eg = self.a.extended_gcd(&self.c);
        let (mut u, mut v, gcd) = (eg.x, eg.y, eg.gcd);
        let (mut r, mut s) = (-self.c / gcd, self.a / gcd);
        if gcd < 0 {
            u = -u;
            v = -v;
            r = -r;
            s = -s;
        }
        let mut cube = self.apply(&GroupElement::Factor3([[u, v], [r, s]]));
        debug_assert!(cube.c == 0 && cube.a > 0);

        let inv = cube.invariants();
        let [q1, q2, _] = cube.forms();
        let k1 = Integer::div_floor(&q1.b, &(2 * inv.m.abs())) * inv.m.signum();
        cube = cube.apply(&GroupElement::Factor1(k1 as i64));
        let k2 = Integer::div_floor(&q2.b, &(2 * inv.n.abs())) * inv.n.signum();
        cube = cube.apply(&GroupElement::Factor2(k2 as i64));
        let k3 = -Integer::div_floor(&cube.e, &cube.g.abs()) * cube.g.signum();
        cube = cube.apply(&GroupElement::shear(k3));
        Ok(cube)
    }

    /// True when no nontrivial `(k1, k2, g3)` with `|k_i| <= bound` and
    /// `g3` entries bounded by `bound` fixes the cube.
    pub fn stabilizer_trivial(&self, bound: i64) -> bool {
        let mats = sl2_matrices(bound);
        for k1 in -bound..=bound {
            for k2 in -bound..=bound {
                let base = self
                    .apply(&GroupElement::Factor1(k1))
                    .apply(&GroupElement::Factor2(k2));
                for m in &mats {
                    let g3 = GroupElement::Factor3(*m);
                    if (k1, k2) == (0, 0) && g3.is_identity() {
                        continue;
                    }
                    if base.apply(&g3) == *self {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// All integer matrices of determinant one with entries in `[-bound, bound]`.
pub fn sl2_matrices(bound: i64) -> Vec<[[i64; 2]; 2]> {
    let mut out = Vec::new();
    for p in -bound..=bound {
        for q in -bound..=bound {
            for r in -bound..=bound {
                for s in -bound..=bound {
                    if p * s - q * r == 1 {
                        out.push([[p, q], [r, s]]);
                    }
                }
            }
        }
    }
    out
}

/// Canonical forms with exact invariants `(d, m, n)`; one per orbit.
pub fn normal_forms(d: i64, m: i64, n: i64) -> Result<Vec<Cube>> {
    if d == 0 || m == 0 || n == 0 {
        return domain("normal forms need nonzero D, m, n");
    }
    let (d, m, n) = (d as i128, m as i128, n as i128);
    let roots = |k: i128| -> Vec<i128> {
        (0..2 * k.abs())
            .filter(|x| (x * x - d).rem_euclid(4 * k.abs()) == 0)
            .collect()
    };
    let (xs, ys) = (roots(m), roots(n));
    let mut out = Vec::new();
    for a in divisors(m.abs().gcd(&n.abs()) as u64) {
        let a = a as i128;
        let (dd, g) = (m / a, n / a);
        for &x in &xs {
            let s = (x * x - d) / (4 * m);
            for &y in &ys {
                if (x + y) % (2 * a) != 0 {
                    continue;
                }
                let t = (y * y - d) / (4 * n);
                let h = -(x + y) / (2 * a);
                for e in 0..g.abs() {
                    let bnum = (x - y) / 2 + dd * e;
                    let fnum = e * h - s;
                    if bnum % g != 0 || fnum % g != 0 {
                        continue;
                    }
                    let (b, f) = (bnum / g, fnum / g);
                    if b * h - dd * f != t {
                        continue;
                    }
                    let entries = [a, b, 0, dd, e, f, g, h].map(|v| v as i64);
                    out.push(Cube::new(entries));
                }
            }
        }
    }
    Ok(out)
}

/// Number of orbits with discriminant `d` and `|m(A)| = |m|`, `|n(A)| = |n|`,
/// counted through canonical forms.
pub fn orbit_count_normal_forms(d: i64, m: i64, n: i64) -> Result<u64> {
    let mut total = 0;
    for sm in [m.abs(), -m.abs()] {
        for sn in [n.abs(), -n.abs()] {
            total += normal_forms(d, sm, sn)?.len() as u64;
        }
    }
    Ok(total)
}

/// Result of the bounded orbit-closure count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleCount {
    pub count: u64,
    /// Count with one extra layer of slack.
    pub count_next: u64,
    pub stable: bool,
    pub entry_bound: i64,
    pub slack: i64,
}

/// Inner box size that contains every canonical form with invariants `(D, ±m, ±n)`.
pub fn default_entry_bound(m: i64, n: i64) -> i64 {
    2 * (m.abs() + n.abs())
}

/// Orbit count by union-find over a bounded box, independent of the closed formula.
///
/// Every semistable orbit meets the slice `c = 0, a > 0`, on which `a, d, g`
/// are invariant and the remaining group is generated by three unipotent
/// moves. Points are `(b, e, h)` in `[-R-slack, R+slack]^3`; `f` is solved
/// from the discriminant. Components meeting the inner box `[-R, R]^3` are counted.
pub fn orbit_count_oracle(d: i64, m: i64, n: i64, entry_bound: i64, slack: i64) -> Result<OracleCount> {
    if d == 0 || m == 0 || n == 0 {
        return domain("oracle needs nonzero D, m, n");
    }
    if entry_bound < 1 || slack < 1 {
        return domain("entry bound and slack must be positive");
    }
    let count = box_count(d, m, n, entry_bound, slack);
    let count_next = box_count(d, m, n, entry_bound, slack + 1);
    Ok(OracleCount {
        count,
        count_next,
        stable: count == count_next,
        entry_bound,
        slack,
    })
}

fn box_count(d: i64, m: i64, n: i64, inner: i64, slack: i64) -> u64 {
    let g0 = m.abs().gcd(&n.abs()) as u64;
    let mut slices = Vec::new();
    for sm in [m.abs(), -m.abs()] {
        for sn in [n.abs(), -n.abs()] {
            for a in divisors(g0) {
                slices.push((sm, sn, a as i64));
            }
        }
    }
    slices
        .par_iter()
        .map(|&(sm, sn, a)| slice_count(d as i128, sm, sn, a, inner, inner + slack))
        .sum()
}

fn slice_count(disc: i128, m: i64, n: i64, a: i64, inner: i64, outer: i64) -> u64 {
    let (d, g) = (m / a, n / a);
    let side = (2 * outer + 1) as usize;
    let idx = |b: i64, e: i64, h: i64| -> usize {
        (((b + outer) as usize * side) + (e + outer) as usize) * side + (h + outer) as usize
    };
    let inside = |v: i64| -outer <= v && v <= outer;
    let valid = |b: i64, e: i64, h: i64| -> bool {
        let x = -(a as i128) * h as i128 + b as i128 * g as i128 - d as i128 * e as i128;
        let num = x * x - disc;
        let four_m = 4 * m as i128;
        if num % four_m != 0 {
            return false;
        }
        let q = num / four_m;
        (e as i128 * h as i128 - q) % g as i128 == 0
    };
    let mut uf = UnionFind::<usize>::new(side * side * side);
    let mut points = Vec::new();
    for b in -outer..=outer {
        for e in -outer..=outer {
            for h in -outer..=outer {
                if !valid(b, e, h) {
                    continue;
                }
                points.push((b, e, h));
                let here = idx(b, e, h);
                for (nb, ne, nh) in [(b, e + a, h + d), (b + a, e, h + g), (b + d, e + g, h)] {
                    if inside(nb) && inside(ne) && inside(nh) {
                        uf.union(here, idx(nb, ne, nh));
                    }
                }
            }
        }
    }
    let roots: HashSet<usize> = points
        .into_iter()
        .filter(|&(b, e, h)| b.abs() <= inner && e.abs() <= inner && h.abs() <= inner)
        .map(|(b, e, h)| uf.find(idx(b, e, h)))
        .collect();
    roots.len() as u64
}

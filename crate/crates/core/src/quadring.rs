//! Oriented quadratic rings and their oriented ideals with cyclic quotient,
//! in bijection with `B'2(Z)`-classes of binary quadratic forms, and the map
//! sending a cube to a pair of such ideal classes.

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::congruence::{divisors, is_discriminant, sigma1, squarefree_split};
use crate::cube::{BinaryQuadraticForm, Cube};
use crate::error::{domain, range, Result};
use crate::identities::{IdentityReport, Mismatch, Status, Variant};
use crate::orbits::orbit_count;

/// The quadratic ring of discriminant `D`, basis `<1, tau>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QuadraticRing {
    #[serde(rename = "D")]
    pub d: i64,
}

impl QuadraticRing {
    pub fn new(d: i64) -> Result<Self> {
        if !is_discriminant(d) {
            return domain(format!("{d} is not a nonzero discriminant"));
        }
        Ok(Self { d })
    }

    /// `(u, v)` with `tau^2 = u tau + v`.
    pub fn tau_relation(&self) -> (i64, i64) {
        if self.d.rem_euclid(4) == 0 {
            (0, self.d / 4)
        } else {
            (1, (self.d - 1) / 4)
        }
    }
}

/// Oriented ideal `<a, (-b + sqrt D)/2>`: `|a|` is the norm, the sign of `a`
/// the orientation, `b` in `[0, 2|a|)` with `b^2 = D (mod 4a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrientedIdealClass {
    pub a: i64,
    pub b: i64,
}

impl OrientedIdealClass {
    pub fn new(d: i64, a: i64, b: i64) -> Result<Self> {
        let cls = Self { a, b };
        if !cls.is_valid(d) {
            return domain(format!("({a}, {b}) is not an ideal class for D = {d}"));
        }
        Ok(cls)
    }

    pub fn is_valid(&self, d: i64) -> bool {
        self.a != 0
            && (0..2 * self.a.abs()).contains(&self.b)
            && (self.b as i128 * self.b as i128 - d as i128) % (4 * self.a as i128) == 0
    }

    pub fn norm(&self) -> u64 {
        self.a.unsigned_abs()
    }

    /// `(b^2 - D) / 4a`.
    pub fn c(&self, d: i64) -> i64 {
        ((self.b as i128 * self.b as i128 - d as i128) / (4 * self.a as i128)) as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IdealClassPair {
    #[serde(rename = "D")]
    pub d: i64,
    pub first: OrientedIdealClass,
    pub second: OrientedIdealClass,
}

pub fn ring_ideal_from_form(form: &BinaryQuadraticForm) -> Result<(QuadraticRing, OrientedIdealClass)> {
    let disc = form.disc();
    if form.a == 0 || disc == 0 {
        return domain("form needs a != 0 and nonzero discriminant");
    }
    let to_i64 = |v: i128| i64::try_from(v).or_else(|_| range(format!("{v} exceeds 64 bits")));
    let d = to_i64(disc)?;
    let a = to_i64(form.a)?;
    let b = to_i64(form.b.rem_euclid(2 * form.a.abs()))?;
    Ok((QuadraticRing::new(d)?, OrientedIdealClass { a, b }))
}

pub fn form_from_class(cls: &OrientedIdealClass, d: i64) -> BinaryQuadraticForm {
    BinaryQuadraticForm::new(cls.a as i128, cls.b as i128, cls.c(d) as i128)
}

/// Classes attached to `Q1` and `Q2`.
pub fn pair_from_cube(cube: &Cube) -> Result<IdealClassPair> {
    if !cube.is_semistable() {
        return domain("pair_from_cube needs a semistable cube");
    }
    let [q1, q2, _] = cube.forms();
    let (ring, first) = ring_ideal_from_form(&q1)?;
    let (_, second) = ring_ideal_from_form(&q2)?;
    Ok(IdealClassPair {
        d: ring.d,
        first,
        second,
    })
}

/// Classes of signed norm `a`, ascending in `b`.
pub fn ideal_classes(d: i64, a: i64) -> Result<Vec<OrientedIdealClass>> {
    if a == 0 {
        return domain("norm must be nonzero");
    }
    Ok((0..2 * a.abs())
        .map(|b| OrientedIdealClass { a, b })
        .filter(|c| c.is_valid(d))
        .collect())
}

/// Pairs with `|N(I_1)| = a1`, `|N(I_2)| = a2`, both orientations.
pub fn class_pairs(d: i64, a1: i64, a2: i64) -> Result<Vec<IdealClassPair>> {
    if a1 <= 0 || a2 <= 0 {
        return domain("norms must be positive");
    }
    let mut out = Vec::new();
    for s1 in [a1, -a1] {
        let firsts = ideal_classes(d, s1)?;
        for s2 in [a2, -a2] {
            let seconds = ideal_classes(d, s2)?;
            for &first in &firsts {
                for &second in &seconds {
                    out.push(IdealClassPair { d, first, second });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// `sigma_1(gcd(D1, |a1|, |a2|))`.
pub fn fiber_count(d: i64, a1: i64, a2: i64) -> Result<u64> {
    let (_, d1) = squarefree_split(d)?;
    Ok(sigma1((d1 as u64).gcd(&a1.unsigned_abs()).gcd(&a2.unsigned_abs())))
}

/// Number of cube orbits over a pair: the sum of `e` over common divisors
/// `e` of `D1, a1, a2, b1, b2` for which `b_i / e` is a square root of
/// `D / e^2` modulo `4|a_i| / e`.
pub fn fiber_count_exact(pair: &IdealClassPair) -> Result<u64> {
    let d = pair.d;
    let (_, d1) = squarefree_split(d)?;
    let (c1, c2) = (pair.first, pair.second);
    let g = (d1 as u64).gcd(&c1.norm()).gcd(&c2.norm());
    let mut total = 0;
    for e in divisors(g) {
        let ei = e as i64;
        if c1.b % ei != 0 || c2.b % ei != 0 {
            continue;
        }
        let reduced = d as i128 / (ei as i128 * ei as i128);
        let ok = [c1, c2].iter().all(|c| {
            let bb = (c.b / ei) as i128;
            (bb * bb - reduced) % (4 * c.a.abs() as i128 / ei as i128) == 0
        });
        if ok {
            total += e;
        }
    }
    Ok(total)
}

/// `(sum over pairs of the fiber, B(D, a1, a2))` under the chosen fiber rule:
/// `Printed` uses [`fiber_count`], `Corrected` uses [`fiber_count_exact`].
pub fn thm13_sides(d: i64, a1: i64, a2: i64, variant: Variant) -> Result<(u64, u64)> {
    if !is_discriminant(d) || a1 <= 0 || a2 <= 0 {
        return domain("needs a nonzero discriminant and positive norms");
    }
    let pairs = class_pairs(d, a1, a2)?;
    let lhs = match variant {
        Variant::Printed => pairs.len() as u64 * fiber_count(d, a1, a2)?,
        Variant::Corrected => pairs.iter().map(fiber_count_exact).sum::<Result<u64>>()?,
    };
    Ok((lhs, orbit_count(d, a1, a2)?))
}

pub fn verify_thm13(d: i64, a1: i64, a2: i64, variant: Variant) -> Result<IdentityReport> {
    let (lhs, rhs) = thm13_sides(d, a1, a2, variant)?;
    let mismatch = (lhs != rhs).then(|| Mismatch {
        index: format!("({d},{a1},{a2})"),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    });
    Ok(IdentityReport {
        schema: 1,
        identity: "thm13".into(),
        variant,
        params: json!({"D": d, "a1": a1, "a2": a2}),
        status: if mismatch.is_some() { Status::Fail } else { Status::Pass },
        first_mismatch: mismatch,
        finding: None,
    })
}

/// Checks every `D = 0, 1 (mod 4)` with `0 < |D| <= d_max` and `1 <= a1, a2 <= a_max`;
/// returns the number of cells checked and the failing cells in `(D, a1, a2)` order.
pub fn verify_thm13_grid(d_max: i64, a_max: i64, variant: Variant) -> Result<(usize, Vec<IdentityReport>)> {
    let ds: Vec<i64> = (-d_max..=d_max).filter(|&d| is_discriminant(d)).collect();
    let per_d: Vec<Vec<IdentityReport>> = ds
        .par_iter()
        .map(|&d| {
            let mut bad = Vec::new();
            for a1 in 1..=a_max {
                for a2 in 1..=a_max {
                    let r = verify_thm13(d, a1, a2, variant)?;
                    if r.failed() {
                        bad.push(r);
                    }
                }
            }
            Ok(bad)
        })
        .collect::<Result<_>>()?;
    let cells = ds.len() * (a_max.max(0) as usize).pow(2);
    Ok((cells, per_d.into_iter().flatten().collect()))
}

/// One line of the `moduli` enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModuliRow {
    #[serde(rename = "D")]
    pub d: i64,
    pub a1: i64,
    pub b1: i64,
    pub a2: i64,
    pub b2: i64,
    pub fiber: u64,
    pub fiber_exact: u64,
}

pub fn moduli(d: i64, a1: i64, a2: i64) -> Result<Vec<ModuliRow>> {
    let fiber = fiber_count(d, a1, a2)?;
    class_pairs(d, a1, a2)?
        .into_iter()
        .map(|p| {
            Ok(ModuliRow {
                d,
                a1: p.first.a,
                b1: p.first.b,
                a2: p.second.a,
                b2: p.second.b,
                fiber,
                fiber_exact: fiber_count_exact(&p)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{normal_forms, sl2_matrices, GroupElement};
    use proptest::prelude::*;
    use std::collections::HashMap;

    #[test]
    fn ring_ideal_examples() {
        let (r, c) = ring_ideal_from_form(&BinaryQuadraticForm::new(1, 1, -1)).unwrap();
        assert_eq!((r.d, c), (5, OrientedIdealClass { a: 1, b: 1 }));
        let (r, c) = ring_ideal_from_form(&BinaryQuadraticForm::new(3, 3, -3)).unwrap();
        assert_eq!((r.d, c), (45, OrientedIdealClass { a: 3, b: 3 }));
        let (r, c) = ring_ideal_from_form(&BinaryQuadraticForm::new(-3, 3, 3)).unwrap();
        assert_eq!((r.d, c), (45, OrientedIdealClass { a: -3, b: 3 }));
        assert!(ring_ideal_from_form(&BinaryQuadraticForm::new(0, 1, 1)).is_err());
        assert!(ring_ideal_from_form(&BinaryQuadraticForm::new(1, 2, 1)).is_err());
    }

    #[test]
    fn tau_relations() {
        assert_eq!(QuadraticRing::new(5).unwrap().tau_relation(), (1, 1));
        assert_eq!(QuadraticRing::new(-4).unwrap().tau_relation(), (0, -1));
        assert!(QuadraticRing::new(3).is_err());
    }

    #[test]
    fn form_from_class_examples() {
        let f = form_from_class(&OrientedIdealClass::new(5, 1, 1).unwrap(), 5);
        assert_eq!(f, BinaryQuadraticForm::new(1, 1, -1));
        let f = form_from_class(&OrientedIdealClass::new(45, 3, 3).unwrap(), 45);
        assert_eq!(f, BinaryQuadraticForm::new(3, 3, -3));
        assert!(OrientedIdealClass::new(5, 2, 1).is_err());
    }

    #[test]
    fn class_form_bijection() {
        for d in (-200i64..=200).filter(|&d| is_discriminant(d)) {
            for a in (-20i64..=20).filter(|&a| a != 0) {
                for cls in ideal_classes(d, a).unwrap() {
                    let form = form_from_class(&cls, d);
                    assert_eq!(ring_ideal_from_form(&form).unwrap(), (QuadraticRing { d }, cls));
                    for k in [-3i128, -1, 2] {
                        let moved = BinaryQuadraticForm::new(
                            form.a,
                            form.b + 2 * k * form.a,
                            form.eval(k, 1),
                        );
                        assert_eq!(ring_ideal_from_form(&moved).unwrap().1, cls);
                    }
                }
            }
        }
    }

    #[test]
    fn pair_from_cube_examples() {
        let p = pair_from_cube(&Cube::new([1, 1, 0, 1, 1, 0, 1, -1])).unwrap();
        assert_eq!((p.d, p.first, p.second), (5, OrientedIdealClass { a: 1, b: 1 }, OrientedIdealClass { a: 1, b: 1 }));
        let p = pair_from_cube(&Cube::new([1, 0, 0, 1, 0, 1, 1, 0])).unwrap();
        assert_eq!((p.d, p.first.b, p.second.b), (4, 0, 0));
        assert!(pair_from_cube(&Cube::ZERO).is_err());
    }

    #[test]
    fn fiber_examples() {
        assert_eq!(fiber_count(5, 7, 3).unwrap(), 1);
        assert_eq!(fiber_count(45, 3, 3).unwrap(), 4);
        assert_eq!(fiber_count(9, 3, 3).unwrap(), 4);
    }

    #[test]
    fn thm13_worked_examples() {
        assert_eq!(class_pairs(45, 3, 3).unwrap().len(), 4);
        assert_eq!(thm13_sides(45, 3, 3, Variant::Printed).unwrap(), (16, 16));
        assert_eq!(thm13_sides(5, 1, 1, Variant::Printed).unwrap(), (4, 4));
        assert_eq!(thm13_sides(5, 2, 1, Variant::Printed).unwrap(), (0, 0));
        assert!(verify_thm13(45, 3, 3, Variant::Printed).unwrap().passed());
    }

    #[test]
    fn gcd_fiber_fails_off_squarefree() {
        assert_eq!(thm13_sides(-100, 2, 2, Variant::Printed).unwrap(), (12, 4));
        assert_eq!(thm13_sides(16, 4, 4, Variant::Printed).unwrap(), (112, 40));
        assert_eq!(thm13_sides(9, 9, 9, Variant::Printed).unwrap(), (144, 84));
    }

    #[test]
    fn exact_fiber_counts_orbits_per_pair() {
        for d in (-80i64..=80).filter(|&d| is_discriminant(d)) {
            for m in 1..=8i64 {
                for n in 1..=8i64 {
                    let mut per_pair: HashMap<IdealClassPair, u64> = HashMap::new();
                    for sm in [m, -m] {
                        for sn in [n, -n] {
                            for cube in normal_forms(d, sm, sn).unwrap() {
                                *per_pair.entry(pair_from_cube(&cube).unwrap()).or_default() += 1;
                            }
                        }
                    }
                    for pair in class_pairs(d, m, n).unwrap() {
                        let enumerated = per_pair.get(&pair).copied().unwrap_or(0);
                        assert_eq!(fiber_count_exact(&pair).unwrap(), enumerated, "{pair:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_fiber_sums_to_orbit_count() {
        let (_, bad) = verify_thm13_grid(120, 12, Variant::Corrected).unwrap();
        assert!(bad.is_empty(), "{:?}", bad.first());
    }

    #[test]
    fn moduli_rows() {
        let rows = moduli(45, 3, 3).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.fiber == 4 && r.fiber_exact == 4 && r.b1 == 3));
    }

    fn element() -> impl Strategy<Value = GroupElement> {
        prop_oneof![
            (-3i64..=3).prop_map(GroupElement::Factor1),
            (-3i64..=3).prop_map(GroupElement::Factor2),
            prop::sample::select(sl2_matrices(2)).prop_map(GroupElement::Factor3),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1_000))]
        #[test]
        fn pair_is_orbit_invariant(
            entries in prop::array::uniform8(-8i64..=8),
            word in prop::collection::vec(element(), 0..=4),
        ) {
            let cube = Cube::new(entries);
            prop_assume!(cube.is_semistable());
            let moved = cube.act(&word).unwrap();
            prop_assert_eq!(pair_from_cube(&moved).unwrap(), pair_from_cube(&cube).unwrap());
        }
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness. The process fails when the set of failing
//! criteria differs from `KNOWN_FAILURES`, so a regression or an unexpected fix
//! both surface.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use cubezeta::congruence::{is_discriminant, sqrt_count, DiscriminantData};
use cubezeta::cube::{default_entry_bound, orbit_count_oracle, Cube, GroupElement};
use cubezeta::identities::{verify_cor24, verify_prop21, verify_prop25, verify_thm12, IdentityReport, Status, Variant};
use cubezeta::orbits::orbit_count;
use cubezeta::ppart::{f_a3_expand, thm44_check};
use cubezeta::quadring::{class_pairs, fiber_count, pair_from_cube, thm13_sides, verify_thm13_grid};
use cubezeta::wmds::{a_coeff3, is_odd_discriminant};

/// Criteria whose stated closed forms disagree with exact counting.
const KNOWN_FAILURES: [u32; 3] = [3, 5, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion1() -> Outcome {
    let cells: Vec<(i64, i64, i64)> = (-60i64..=60)
        .filter(|&d| is_discriminant(d))
        .flat_map(|d| (1..=5).flat_map(move |m| (1..=5).map(move |n| (d, m, n))))
        .collect();
    let bad: Vec<String> = cells
        .par_iter()
        .filter_map(|&(d, m, n)| {
            let b = orbit_count(d, m, n).unwrap();
            let r = orbit_count_oracle(d, m, n, default_entry_bound(m, n), 2).unwrap();
            (r.count != b || !r.stable).then(|| format!("({d},{m},{n}) B={b} oracle={} stable={}", r.count, r.stable))
        })
        .collect();
    outcome(bad.is_empty(), format!("{} cells, {} mismatches {:?}", cells.len(), bad.len(), bad.first()))
}

fn criterion2() -> Outcome {
    let mut cells = 0;
    let mut bad = Vec::new();
    for d in (-200i64..=200).filter(|&d| is_discriminant(d)) {
        if !DiscriminantData::new(d).unwrap().is_fundamental() {
            continue;
        }
        for m in 1..=40i64 {
            let am = sqrt_count(d, 4 * m).unwrap();
            for n in 1..=40i64 {
                cells += 1;
                let b = orbit_count(d, m, n).unwrap();
                if b != am * sqrt_count(d, 4 * n).unwrap() {
                    bad.push((d, m, n));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{cells} cells, {} mismatches {:?}", bad.len(), bad.first()))
}

fn summarize(reports: &[IdentityReport]) -> (usize, usize, usize, Option<String>) {
    let fails: Vec<&IdentityReport> = reports.iter().filter(|r| r.status == Status::Fail).collect();
    let findings = reports.iter().filter(|r| r.status == Status::Finding).count();
    let first = fails
        .first()
        .map(|r| format!("{} {:?}", r.params, r.first_mismatch.as_ref().map(|m| (&m.index, &m.lhs, &m.rhs))));
    (reports.len(), fails.len(), findings, first)
}

fn odd_discriminants(bound: i64) -> Vec<i64> {
    (-bound..=bound).filter(|&d| is_odd_discriminant(d)).collect()
}

fn criterion3(variant: Variant) -> Outcome {
    let reports: Vec<IdentityReport> = odd_discriminants(297)
        .par_iter()
        .map(|&d| verify_thm12(d, 64, variant).unwrap())
        .collect();
    let (n, fails, _, first) = summarize(&reports);
    outcome(fails == 0, format!("{n} discriminants, {fails} failing, first {first:?}"))
}

fn criterion4() -> Outcome {
    let sym = thm44_check(8, None).unwrap();
    let mut bad = Vec::new();
    for p in [2i64, 3, 5] {
        let s = f_a3_expand(6, Some(p)).unwrap();
        for (l, k, t, c) in s.iter() {
            let expected = a_coeff3(p.pow(k as u32), (p as u64).pow(l as u32), (p as u64).pow(t as u32)).unwrap();
            if c.eval(0) != expected as i128 {
                bad.push((p, l, k, t));
            }
        }
    }
    outcome(
        sym.equal && bad.is_empty(),
        format!("symbolic equal={}, specialization mismatches {}", sym.equal, bad.len()),
    )
}

fn criterion5(variant: Variant) -> Outcome {
    let (cells, bad) = verify_thm13_grid(500, 30, variant).unwrap();
    let (lhs, b) = thm13_sides(45, 3, 3, variant).unwrap();
    let pairs = class_pairs(45, 3, 3).unwrap().len();
    let fiber = fiber_count(45, 3, 3).unwrap();
    let worked = lhs == 16 && b == 16 && pairs == 4 && fiber == 4;
    let first = bad.first().map(|r| {
        format!("{} {:?}", r.params, r.first_mismatch.as_ref().map(|m| (&m.lhs, &m.rhs)))
    });
    outcome(
        bad.is_empty() && worked,
        format!(
            "{cells} cells, {} failing, first {first:?}; B(45,3,3)={b} from {pairs} signed pairs x fiber {fiber}",
            bad.len()
        ),
    )
}

fn brute_sqrt_count(d: i64, a: i64) -> u64 {
    (0..a).filter(|x| (x * x - d).rem_euclid(a) == 0).count() as u64
}

fn criterion6() -> Outcome {
    let mut bad = Vec::new();
    for d in -100i64..=100 {
        for a in 1..=256i64 {
            if sqrt_count(d, a).unwrap() != brute_sqrt_count(d, a) {
                bad.push((d, a));
            }
        }
    }
    let mut mult_bad = Vec::new();
    for d in -100i64..=100 {
        for a in 1..=32i64 {
            for b in 1..=32i64 {
                if num_integer::gcd(a, b) == 1
                    && sqrt_count(d, a * b).unwrap() != sqrt_count(d, a).unwrap() * sqrt_count(d, b).unwrap()
                {
                    mult_bad.push((d, a, b));
                }
            }
        }
    }
    outcome(
        bad.is_empty() && mult_bad.is_empty(),
        format!("enumeration mismatches {}, multiplicativity mismatches {}", bad.len(), mult_bad.len()),
    )
}

fn criterion7(variant: Variant) -> Outcome {
    let odd: Vec<i64> = (-297i64..=297).filter(|d| d % 2 != 0).collect();
    let p25: Vec<IdentityReport> = odd.par_iter().map(|&d| verify_prop25(d, 100, variant).unwrap()).collect();
    let ds: Vec<i64> = (-200i64..=200).filter(|&d| is_discriminant(d)).collect();
    let p21: Vec<IdentityReport> = ds.par_iter().map(|&d| verify_prop21(d, 200, variant).unwrap()).collect();
    let c24: Vec<IdentityReport> = ds.par_iter().map(|&d| verify_cor24(d, 200, variant).unwrap()).collect();
    let (n25, f25, _, first25) = summarize(&p25);
    let (n21, f21, x21, _) = summarize(&p21);
    let (n24, f24, x24, _) = summarize(&c24);
    outcome(
        f25 == 0 && f21 == 0 && f24 == 0,
        format!(
            "prop25 {f25}/{n25} failing (first {first25:?}); prop21 {f21}/{n21} failing, {x21} findings; \
             cor24 {f24}/{n24} failing, {x24} findings"
        ),
    )
}

fn random_cube(rng: &mut StdRng, r: i64) -> Cube {
    let mut e = [0i64; 8];
    for x in &mut e {
        *x = rng.gen_range(-r..=r);
    }
    Cube::new(e)
}

fn random_word(rng: &mut StdRng, len: usize) -> Vec<GroupElement> {
    (0..len)
        .map(|_| match rng.gen_range(0..4) {
            0 => GroupElement::Factor1(rng.gen_range(-3..=3)),
            1 => GroupElement::Factor2(rng.gen_range(-3..=3)),
            2 => GroupElement::shear(rng.gen_range(-3..=3)),
            _ => GroupElement::ROTATION,
        })
        .collect()
}

fn criterion8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut semistable = Vec::new();
    while semistable.len() < 100 {
        let c = random_cube(&mut rng, 4);
        if c.is_semistable() {
            semistable.push(c);
        }
    }
    let nontrivial = semistable.par_iter().filter(|c| !c.stabilizer_trivial(4)).count();

    let mut disc_bad = 0;
    for _ in 0..10_000 {
        let c = random_cube(&mut rng, 20);
        let [q1, q2, q3] = c.forms();
        let d = q1.disc();
        if q2.disc() != d || q3.disc() != d || !matches!(d.rem_euclid(4), 0 | 1) {
            disc_bad += 1;
        }
    }

    let mut samples = 0;
    let mut pair_bad = 0;
    while samples < 1000 {
        let c = random_cube(&mut rng, 6);
        if !c.is_semistable() {
            continue;
        }
        samples += 1;
        let word = random_word(&mut rng, 4);
        let moved = c.act(&word).unwrap();
        if pair_from_cube(&c).unwrap() != pair_from_cube(&moved).unwrap() {
            pair_bad += 1;
        }
    }
    outcome(
        nontrivial == 0 && disc_bad == 0 && pair_bad == 0,
        format!("nontrivial stabilizers {nontrivial}/100, discriminant mismatches {disc_bad}/10000, pair changes {pair_bad}/1000"),
    )
}

fn report(id: u32, name: &str, run: impl FnOnce() -> Outcome, failed: &mut BTreeSet<u32>) {
    let start = Instant::now();
    let o = run();
    if !o.pass {
        failed.insert(id);
    }
    println!(
        "criterion {id} {}: {name}: {} ({:.1}s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        start.elapsed().as_secs_f64()
    );
}

fn info(name: &str, o: Outcome) {
    println!("  info: {name}: {} {}", if o.pass { "holds" } else { "fails" }, o.detail);
}

fn main() {
    let mut failed = BTreeSet::new();
    report(1, "orbit formula vs union-find oracle", criterion1, &mut failed);
    report(2, "fundamental discriminant product formula", criterion2, &mut failed);
    report(3, "orbit grid vs twisted A3 convolution", || criterion3(Variant::Printed), &mut failed);
    info("orbit grid with 2 zeta(s)/zeta(2s) factor", criterion3(Variant::Corrected));
    report(4, "A3 p-part expansion vs convolution", criterion4, &mut failed);
    report(5, "class-pair sum with sigma1(gcd) fibers", || criterion5(Variant::Printed), &mut failed);
    info("class-pair sum with exact fibers", criterion5(Variant::Corrected));
    report(6, "square-root counting core", criterion6, &mut failed);
    report(7, "one-variable series identities", || criterion7(Variant::Printed), &mut failed);
    info("one-variable identities, corrected factors", criterion7(Variant::Corrected));
    report(8, "structural properties", criterion8, &mut failed);

    let known: BTreeSet<u32> = KNOWN_FAILURES.into_iter().collect();
    println!("failing criteria: {failed:?}; known failures: {known:?}");
    if failed != known {
        eprintln!("acceptance outcome differs from the recorded failure set");
        std::process::exit(1);
    }
}

//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! with the worst residual, its witness and the elapsed time.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twistcert::arith::{divisors, euler_phi, gcd, is_squarefree, primes_up_to};
use twistcert::audit::{
    classify_residue_term, find_contradiction, independence_rank, residue_index, saturation_check, TermClass,
    TwistData, TwistHypothesis, Verdict,
};
use twistcert::characters::{c_coefficient_direct, AdditiveExpansion};
use twistcert::fixtures::Family;
use twistcert::invariants::{
    alpha_nu, compute_invariants, predict_pole, Alpha, GammaFactor, GammaFactorData, Rational,
};
use twistcert::phase::{
    asymptotic_residual, decade_grid, dual_phase_exact, phi, solve_critical_point, PhaseParams,
};
use twistcert::series::{
    build_split_table, detect_split_local, principal_restriction_residual, CoefficientSeries, SplitOptions,
};
use twistcert::twistdecomp::{
    coefficient_residual, decompose, decompose_recursive, telescoping_check, term_map, term_map_distance,
    verify_numeric, RecursionMemo,
};

const N: usize = 100_000;
const MODULI: [u64; 7] = [2, 3, 5, 6, 10, 15, 30];

fn families() -> [Family; 3] {
    [Family::ZetaSquared, Family::DeltaNormalized, Family::zeta_times_l4()]
}

/// The three fixtures at `N = 10^5`, built once per test binary.
fn fixtures() -> &'static [(Family, CoefficientSeries)] {
    static CELL: OnceLock<Vec<(Family, CoefficientSeries)>> = OnceLock::new();
    CELL.get_or_init(|| families().into_iter().map(|f| (f.clone(), f.series(N))).collect())
}

/// Largest value seen and where.
struct Worst {
    value: f64,
    witness: String,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0, witness: "none".into() }
    }

    fn see(&mut self, value: f64, witness: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.witness = witness();
        }
    }
}

fn report(id: u32, name: &str, ok: bool, detail: String, start: Instant) -> bool {
    println!(
        "criterion {id:>2} [{}] {name}: {detail} ({:.2}s)",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    ok
}

fn coprime_residues(d: u64) -> Vec<i64> {
    (0..d as i64).filter(|&a| gcd(a as u64, d) == 1).collect()
}

#[test]
fn criterion_01_additive_expansion() {
    let start = Instant::now();
    let mut identity = Worst::new();
    let mut coeffs = Worst::new();
    for d in 1..=60u64 {
        for a in coprime_residues(d) {
            let exp = AdditiveExpansion::new(d, a).unwrap();
            for (chi_i, (chi, c)) in exp.characters.iter().zip(&exp.coefficients).enumerate() {
                let direct = c_coefficient_direct(chi, a).unwrap();
                coeffs.see((c - direct).norm(), || format!("D={d} a={a} chi#{chi_i}"));
            }
            for n in 1..=200 {
                identity.see(exp.residual(n), || format!("D={d} a={a} n={n}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = identity.value < 1e-9 && coeffs.value < 1e-10 && secs < 10.0;
    let detail = format!(
        "worst residual {:.2e} at {}, closed vs direct {:.2e} at {}",
        identity.value, identity.witness, coeffs.value, coeffs.witness
    );
    assert!(report(1, "additive expansion, D <= 60", ok, detail, start));
}

#[test]
fn criterion_02_principal_restriction() {
    let start = Instant::now();
    let mut worst = Worst::new();
    for (fam, x) in fixtures() {
        for d in MODULI {
            let table = build_split_table(x, d, &SplitOptions::default()).unwrap();
            for n in 1..=10_000u64 {
                let r = principal_restriction_residual(x, &table, n).unwrap();
                worst.see(r, || format!("{} D={d} n={n}", fam.name()));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst.value < 1e-8 && secs < 30.0;
    let detail = format!("worst residual {:.2e} at {}", worst.value, worst.witness);
    assert!(report(2, "principal restriction via local inverses", ok, detail, start));
}

#[test]
fn criterion_03_decomposition_coefficients() {
    let start = Instant::now();
    let mut worst = Worst::new();
    let mut paths = Worst::new();
    for (fam, x) in fixtures() {
        for d in MODULI {
            let table = build_split_table(x, d, &SplitOptions::default()).unwrap();
            let mut memo = RecursionMemo::new();
            for a in coprime_residues(d) {
                let terms = decompose(&table, a).unwrap();
                let recursive = decompose_recursive(&table, a, &mut memo).unwrap();
                let gap = term_map_distance(&term_map(&terms), &recursive);
                paths.see(gap, || format!("{} D={d} a={a}", fam.name()));
                for n in 1..=5000u64 {
                    let r = coefficient_residual(x, &terms, d, a, n).unwrap();
                    worst.see(r, || format!("{} D={d} a={a} n={n}", fam.name()));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst.value < 1e-8 && paths.value < 1e-10 && secs < 120.0;
    let detail = format!(
        "worst residual {:.2e} at {}, closed vs recursive {:.2e} at {}",
        worst.value, worst.witness, paths.value, paths.witness
    );
    assert!(report(3, "decomposition, coefficientwise", ok, detail, start));
}

#[test]
fn criterion_04_decomposition_numeric() {
    let start = Instant::now();
    let s = Complex64::new(2.0, 3.0);
    let mut margin = Worst::new();
    let mut failures = Vec::new();
    for (fam, x) in fixtures() {
        for d in [2u64, 3, 6, 30] {
            let table = build_split_table(x, d, &SplitOptions::default()).unwrap();
            for alpha in [0.0, 1.0] {
                for lambda in [1.0 / 3.0, 0.5] {
                    let chk = verify_numeric(x, &table, 1, alpha, lambda, s, N).unwrap();
                    let witness = || format!("{} D={d} alpha={alpha} lambda={lambda:.3}", fam.name());
                    margin.see(chk.residual / chk.bound, witness);
                    if !chk.holds(1e-12) {
                        failures.push(witness());
                    }
                }
            }
        }
    }
    let ok = failures.is_empty();
    let detail = format!(
        "worst residual/bound {:.2e} at {}{}",
        margin.value,
        margin.witness,
        if ok { String::new() } else { format!(", outside bound: {failures:?}") }
    );
    assert!(report(4, "decomposition, truncated sums at s = 2+3i", ok, detail, start));
}

#[test]
fn criterion_05_telescoping() {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut count = 0;
    for (fam, x) in fixtures() {
        for d in (1..=30u64).filter(|&d| is_squarefree(d)) {
            let table = build_split_table(x, d, &SplitOptions::default()).unwrap();
            for m in divisors(table.d_star) {
                count += 1;
                let v = telescoping_check(m, d).unwrap();
                if v != 1 {
                    bad.push(format!("{} D={d} m={m}: {v}", fam.name()));
                }
            }
        }
    }
    let ok = bad.is_empty();
    let detail = format!("{count} sums checked, {} not equal to 1 {:?}", bad.len(), bad.first());
    assert!(report(5, "unitary-divisor telescoping", ok, detail, start));
}

/// τ(n) for n < len from the product `q Π (1 - q^k)^{24}`, one factor at a time.
fn tau_oracle(len: usize) -> Vec<i128> {
    let mut poly = vec![0i128; len];
    poly[0] = 1;
    for k in 1..len {
        for _ in 0..24 {
            for i in (k..len).rev() {
                poly[i] -= poly[i - k];
            }
        }
    }
    // poly[i] is τ(i + 1)
    poly
}

#[test]
fn criterion_06_split_detection() {
    let start = Instant::now();
    let fx = fixtures();
    let mut worst = Worst::new();
    let mut ok = true;

    // ζ²: exact locals at every p <= 50, and the truncated series where it has depth
    for p in primes_up_to(50) {
        let exact = Family::ZetaSquared.exact_local(p, 16).unwrap();
        let found = detect_split_local(p, &exact, 8, 8, 1e-10).unwrap();
        let expect = [1.0, -2.0, 1.0];
        ok &= found.degree() == 2;
        for (l, e) in expect.iter().enumerate() {
            worst.see((found.a(l) - Complex64::new(*e, 0.0)).norm(), || format!("zeta^2 exact p={p} A_{l}"));
        }
        if p * p * p <= N as u64 {
            let t = build_split_table(&fx[0].1, p, &SplitOptions::default()).unwrap();
            let local = t.local(p).unwrap();
            ok &= local.degree() == 2;
            for (l, e) in expect.iter().enumerate() {
                worst.see((local.a(l) - Complex64::new(*e, 0.0)).norm(), || format!("zeta^2 p={p} A_{l}"));
            }
        }
    }

    // Δ against the product expansion, at every p with a check row in range
    let tau = tau_oracle(50);
    for p in primes_up_to(50).into_iter().filter(|p| p * p * p <= N as u64) {
        let t = build_split_table(&fx[1].1, p, &SplitOptions::default()).unwrap();
        let local = t.local(p).unwrap();
        ok &= local.degree() == 2;
        let ap = tau[p as usize - 1] as f64 / (p as f64).powf(5.5);
        let expect = [1.0, -ap, 1.0];
        for (l, e) in expect.iter().enumerate() {
            worst.see((local.a(l) - Complex64::new(*e, 0.0)).norm(), || format!("delta p={p} A_{l}"));
        }
    }
    ok &= worst.value < 1e-10;

    // synthetic round trip
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut recovered = 0;
    for _ in 0..100 {
        let deg = rng.gen_range(0..=4usize);
        let mut a: Vec<i64> = vec![1];
        for l in 1..=deg {
            let v = if l == deg {
                [-2, -1, 1, 2][rng.gen_range(0..4)]
            } else {
                rng.gen_range(-2..=2)
            };
            a.push(v);
        }
        let mut local = vec![1.0f64];
        for k in 1..=8usize {
            local.push(-(1..=deg.min(k)).map(|l| a[l] as f64 * local[k - l]).sum::<f64>());
        }
        let local: Vec<Complex64> = local.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        if let Ok(found) = detect_split_local(3, &local, 4, 4, 1e-8) {
            let got: Vec<i64> = found.coefficients.iter().map(|c| c.re.round() as i64).collect();
            let close = found.coefficients.iter().zip(&a).all(|(c, &v)| (c - Complex64::new(v as f64, 0.0)).norm() < 1e-9);
            if got == a && close {
                recovered += 1;
            }
        }
    }
    ok &= recovered == 100;
    let detail = format!(
        "worst coefficient error {:.2e} at {}, synthetic round trip {recovered}/100",
        worst.value, worst.witness
    );
    assert!(report(6, "polynomial split detection", ok, detail, start));
}

#[test]
fn criterion_07_invariants() {
    let start = Instant::now();
    let mut worst = Worst::new();
    for fam in [Family::ZetaSquared, Family::DeltaNormalized] {
        let inv = compute_invariants(&fam.gamma()).unwrap();
        let err = (inv.degree - 2.0).abs().max((inv.conductor - 1.0).abs()).max(inv.shift.abs());
        worst.see(err, || fam.name());
    }
    let ok_fixed = worst.value < 1e-12;

    let mut shift_err = Worst::new();
    for &(theta, lambdas) in &[(0.3, &[0.5, 0.5][..]), (-1.25, &[1.0][..]), (0.7, &[0.5, 1.0, 0.25][..])] {
        let degree: f64 = 2.0 * lambdas.iter().sum::<f64>();
        let k = lambdas.len() as f64;
        let im = theta * degree / (2.0 * k);
        let factors = lambdas
            .iter()
            .map(|&l| GammaFactor { lambda: l, mu: Complex64::new(0.25, im) })
            .collect();
        let g = GammaFactorData::new(1.7, factors, Complex64::new(1.0, 0.0)).unwrap();
        let inv = compute_invariants(&g).unwrap();
        shift_err.see((inv.shift - theta).abs(), || format!("theta={theta}"));
    }
    let ok = ok_fixed && shift_err.value < 1e-12;
    let detail = format!(
        "fixture error {:.2e} at {}, constructed shift error {:.2e} at {}",
        worst.value, worst.witness, shift_err.value, shift_err.witness
    );
    assert!(report(7, "degree, conductor, shift", ok, detail, start));
}

#[test]
fn criterion_08_pole_indices() {
    let start = Instant::now();
    let x = &fixtures()[0].1;
    let one = Rational::from_integer(1);
    let mut bad = Vec::new();
    for nu in 1..=100u64 {
        let pole = predict_pole(2.0, &one, 0.0, &alpha_nu(&one, nu), None, x).unwrap();
        if pole.n_alpha != Rational::from_integer(nu as i128) || !pole.integral {
            bad.push(format!("nu={nu}: n_alpha={}", pole.n_alpha));
        }
    }
    let mut nonintegral = 0;
    for (num, den) in [(3i128, 2i128), (1, 3), (5, 7), (2, 5), (7, 3), (1, 1)] {
        let alpha = Alpha::Rational(Rational::new(num, den));
        let pole = predict_pole(2.0, &one, 0.0, &alpha, None, x).unwrap();
        let expect = Rational::new(num * num, 4 * den * den);
        if pole.n_alpha != expect || pole.integral || pole.residue_shape != Complex64::new(0.0, 0.0) {
            bad.push(format!("alpha={num}/{den}: n_alpha={}", pole.n_alpha));
        } else {
            nonintegral += 1;
        }
    }
    let root = Alpha::Root { radicand: Rational::from_integer(3), index: 2 };
    let pole = predict_pole(2.0, &one, 0.0, &root, None, x).unwrap();
    if pole.n_alpha != Rational::new(3, 4) || pole.integral {
        bad.push(format!("sqrt(3): n_alpha={}", pole.n_alpha));
    } else {
        nonintegral += 1;
    }
    let ok = bad.is_empty();
    let detail = format!("100 alpha_nu indices exact, {nonintegral} non-integral cases exact, failures {bad:?}");
    assert!(report(8, "pole index n_alpha", ok, detail, start));
}

#[test]
fn criterion_09_phase() {
    let start = Instant::now();
    let grid = decade_grid(3, 9);

    let mut closed = Worst::new();
    for (q_f, beta) in [(1.0, 1.0), (1.0, 0.2), (3.0, 1.0 / 30.0), (0.5, 2.0)] {
        let p = PhaseParams::new(q_f, beta, 0.0, 1.0 / 3.0).unwrap();
        for &xi in &grid {
            let cp = solve_critical_point(xi, &p, 1e-14).unwrap();
            let k = 4.0 * PI / (q_f * beta);
            let x_err = (cp.x0 / (k * k * xi * xi) - 1.0).abs();
            let phi_err = (phi(cp.x0, xi, &p) / (2.0 * PI) / (xi / (q_f * beta)) - 1.0).abs();
            closed.see(x_err.max(phi_err), || format!("q_F={q_f} beta={beta} xi={xi:e}"));
        }
    }

    let mut trend_failures = Vec::new();
    let mut last = Worst::new();
    let mut crit = Worst::new();
    for lambda in [0.2, 1.0 / 3.0, 0.45, 0.5] {
        for alpha in [1.0, -1.0, 3.0, -3.0] {
            for beta in [0.5, 0.2, 1.0 / 30.0] {
                let p = PhaseParams::new(1.0, beta, alpha, lambda).unwrap();
                let mut values = Vec::with_capacity(grid.len());
                for &xi in &grid {
                    let cp = solve_critical_point(xi, &p, 1e-14).unwrap();
                    crit.see(cp.residual, || format!("lambda={lambda:.3} alpha={alpha} beta={beta:.4} xi={xi:e}"));
                    values.push(asymptotic_residual(xi, &p).unwrap());
                }
                let label = format!("lambda={lambda:.3} alpha={alpha} beta={beta:.4}");
                if !values.windows(2).all(|w| w[1] < w[0]) {
                    trend_failures.push(label.clone());
                }
                last.see(*values.last().unwrap(), || label);
            }
        }
    }

    let mut involution = true;
    for (qn, qd, bn, bd) in [(1, 1, 1, 5), (3, 1, 2, 7), (7, 4, 11, 3), (1, 9, 30, 1)] {
        let (q_f, beta) = (Rational::new(qn, qd), Rational::new(bn, bd));
        let (b1, w1) = dual_phase_exact(&q_f, &beta).unwrap();
        let (b2, w2) = dual_phase_exact(&q_f, &b1).unwrap();
        involution &= b2 == beta && w1 * w2 == Rational::from_integer(1);
    }

    let secs = start.elapsed().as_secs_f64();
    let ok = closed.value <= 1e-10
        && trend_failures.is_empty()
        && last.value <= 1e-2
        && crit.value < 1e-8
        && involution
        && secs < 10.0;
    let detail = format!(
        "closed form {:.2e} at {}, 48 grids monotone except {:?}, largest final {:.2e} at {}, critical residual {:.2e}, exact involution {}",
        closed.value, closed.witness, trend_failures, last.value, last.witness, crit.value, involution
    );
    assert!(report(9, "stationary phase", ok, detail, start));
}

#[test]
fn criterion_10_audit() {
    let start = Instant::now();
    let x = &fixtures()[0].1;
    let table = build_split_table(x, 6, &SplitOptions::default()).unwrap();
    let conductors = [Rational::from_integer(1), Rational::from_integer(2), Rational::from_integer(3), Rational::new(1, 2)];
    let mut problems = Vec::new();
    let mut contradictions = 0;
    let mut worst_nu = 0;
    let mut classified = 0usize;
    let mut consistent_seen = false;
    for d1 in [2.0, 3.0, 4.0] {
        for d2 in [2.0, 3.0, 4.0] {
            for t1 in [0.0, 0.3] {
                for t2 in [0.0, 0.3] {
                    for q1 in &conductors {
                        for q2 in &conductors {
                            let twists = vec![
                                TwistData { degree: d1, shift: t1, conductor: *q1 },
                                TwistData { degree: d2, shift: t2, conductor: *q2 },
                            ];
                            let h = TwistHypothesis::new(6, twists, 0.0).unwrap();
                            let label = format!("d=({d1},{d2}) theta=({t1},{t2}) q=({q1},{q2})");
                            let rep = match find_contradiction(x, &table, &h, 10_000) {
                                Ok(r) => r,
                                Err(e) => {
                                    problems.push(format!("{label}: {e}"));
                                    continue;
                                }
                            };
                            let consistent = d1 == 2.0 && d2 == 2.0 && t1 == 0.0 && t2 == 0.0;
                            if consistent {
                                consistent_seen = true;
                                if rep.verdict != Verdict::HypothesisConsistent {
                                    problems.push(format!("{label}: {}", rep.verdict.as_str()));
                                }
                                continue;
                            }
                            match &rep.witness {
                                Some(w) if rep.verdict == Verdict::Contradiction && w.nu <= 100 => {
                                    contradictions += 1;
                                    worst_nu = worst_nu.max(w.nu);
                                    // independent recheck of every term at every scanned ν
                                    let md = rep.sets.m * 6;
                                    for nu in (1..=w.nu).filter(|&n| gcd(n, md) == 1) {
                                        for member in &rep.sets.members {
                                            for m in divisors(member.cofactor_star) {
                                                let class = classify_residue_term(member.chi_index, m, nu, &rep.sets).unwrap();
                                                let integral = residue_index(member, m, nu, &rep.sets.q0).is_integer();
                                                classified += 1;
                                                if (class == TermClass::Active) != integral {
                                                    problems.push(format!("{label}: term ({}, {m}) at nu={nu}", member.chi_index));
                                                }
                                            }
                                        }
                                    }
                                }
                                _ => problems.push(format!("{label}: {} {:?}", rep.verdict.as_str(), rep.witness)),
                            }
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = problems.is_empty() && consistent_seen && secs < 5.0;
    let detail = format!(
        "{contradictions} contradictions, largest witness nu={worst_nu}, {classified} terms reclassified, problems {:?}",
        problems.iter().take(3).collect::<Vec<_>>()
    );
    assert!(report(10, "contradiction audit, zeta^2 mod 6", ok, detail, start));
}

#[test]
fn criterion_11_saturation() {
    let start = Instant::now();
    let x = &fixtures()[0].1;
    let m_list = [1u64, 2, 3, 5, 7, 11, 30, 210, 2310];
    let mut unsaturated = Vec::new();
    let mut largest = 0;
    for d in 1..=30u64 {
        let rep = saturation_check(x, d, &m_list, 10_000);
        if !rep.saturated() {
            unsaturated.push(d);
        }
        largest = largest.max(rep.largest_witness().unwrap_or(0));
    }

    let holes: Vec<f64> = (1..=1000).map(|n| if n % 5 == 3 { 0.0 } else { 1.0 }).collect();
    let y = CoefficientSeries::from_real("no class 3 mod 5", &holes, 0.0);
    let flagged: Vec<u64> = saturation_check(&y, 5, &[1, 7], 1000).flagged().map(|e| e.residue).collect();
    let flagged_ok = flagged == vec![3, 3];

    let mut ranks = Vec::new();
    for d in [2u64, 3, 6, 10] {
        ranks.push((d, independence_rank(x, d, 1, 200), euler_phi(d) as usize));
    }
    let ranks_ok = ranks.iter().all(|(_, r, p)| r == p);

    let ok = unsaturated.is_empty() && largest <= 10_000 && flagged_ok && ranks_ok;
    let detail = format!(
        "zeta^2 saturated for D <= 30 except {unsaturated:?}, largest witness {largest}, constructed flags {flagged:?}, ranks {ranks:?}"
    );
    assert!(report(11, "saturation and independence", ok, detail, start));
}

//! The finite core of the twist-invariance argument, run on data.
//!
//! Given a hypothesis on the degree, shift and conductor of every twist
//! `F^{χ*}` with `χ` mod `D`, [`compute_sets`] builds the extremal sets and
//! the modulus `M`, [`classify_residue_term`] decides which residues of the
//! standard twists survive at `α_ν`, and [`find_contradiction`] searches for
//! a `ν` at which the surviving residues cannot cancel.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, Zero};

use crate::arith::{divisors, gcd, lcm, prime_divisors};
use crate::characters::{enumerate_characters, DirichletCharacter};
use crate::error::Error;
use crate::invariants::{alpha_nu, pole_location, predict_pole, Rational};
use crate::series::{CoefficientSeries, SplitTable};
use crate::twistdecomp::f_coefficient;

const SAME: f64 = 1e-12;
const WITNESS_TOL: f64 = 1e-9;

/// Degree, internal shift and conductor assumed for one twist `F^{χ*}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistData {
    pub degree: f64,
    pub shift: f64,
    pub conductor: Rational,
}

/// One [`TwistData`] per character mod `D`, in [`enumerate_characters`]
/// order, together with the shift `θ_F` of `F` itself.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistHypothesis {
    pub modulus: u64,
    pub twists: Vec<TwistData>,
    pub theta_f: f64,
}

impl TwistHypothesis {
    pub fn new(modulus: u64, twists: Vec<TwistData>, theta_f: f64) -> Result<Self, Error> {
        let h = TwistHypothesis { modulus, twists, theta_f };
        h.validate()?;
        Ok(h)
    }

    /// The same data for every character.
    pub fn uniform(modulus: u64, degree: f64, shift: f64, conductor: Rational, theta_f: f64) -> Result<Self, Error> {
        let count = enumerate_characters(modulus).len();
        Self::new(modulus, vec![TwistData { degree, shift, conductor }; count], theta_f)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let count = enumerate_characters(self.modulus).len();
        if self.twists.len() != count {
            return Err(Error::InvalidHypothesis(format!(
                "{} entries for {count} characters mod {}",
                self.twists.len(),
                self.modulus
            )));
        }
        for (i, t) in self.twists.iter().enumerate() {
            if !(t.degree >= 2.0) {
                return Err(Error::InvalidHypothesis(format!("character {i}: degree {} < 2", t.degree)));
            }
            if !t.conductor.is_positive() {
                return Err(Error::InvalidHypothesis(format!("character {i}: conductor must be positive")));
            }
            if !t.shift.is_finite() {
                return Err(Error::InvalidHypothesis(format!("character {i}: shift {}", t.shift)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// some twist has degree above 2
    Degree,
    /// all degrees 2, some shift differs from `θ_F`
    Shift,
    /// all degrees 2 and all shifts `θ_F`
    Consistent,
}

/// A character of `B₀` with its weight `w(χ) = (D/f_χ)* q(χ*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditMember {
    pub chi_index: usize,
    pub primitive: DirichletCharacter,
    pub conductor: Rational,
    /// `(D/f_χ)*`
    pub cofactor_star: u64,
    /// `w(χ) / q₀ = l/m` in lowest terms
    pub ratio: Rational,
    pub in_c0: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditSets {
    pub modulus: u64,
    pub branch: Branch,
    pub d0: f64,
    pub lambda0: f64,
    pub theta0: f64,
    pub a0: Vec<usize>,
    pub b0: Vec<usize>,
    pub c0: Vec<usize>,
    pub q0: Rational,
    pub m: u64,
    pub s0: Complex64,
    pub members: Vec<AuditMember>,
}

impl AuditSets {
    pub fn member(&self, chi_index: usize) -> Option<&AuditMember> {
        self.members.iter().find(|m| m.chi_index == chi_index)
    }
}

pub fn compute_sets(h: &TwistHypothesis, split: &SplitTable) -> Result<AuditSets, Error> {
    h.validate()?;
    let d = h.modulus;
    if split.modulus != d {
        return Err(Error::InvalidHypothesis(format!("split table is mod {}, hypothesis mod {d}", split.modulus)));
    }
    let chars = enumerate_characters(d);
    let all: Vec<usize> = (0..chars.len()).collect();
    let d0 = h.twists.iter().map(|t| t.degree).fold(f64::MIN, f64::max);

    let (branch, a0, theta0) = if d0 > 2.0 + SAME {
        let a0: Vec<usize> = all.iter().copied().filter(|&i| (h.twists[i].degree - d0).abs() <= SAME).collect();
        let theta0 = a0.iter().map(|&i| h.twists[i].shift).fold(f64::MAX, f64::min);
        (Branch::Degree, a0, theta0)
    } else {
        let off: Vec<f64> = h
            .twists
            .iter()
            .map(|t| t.shift)
            .filter(|&s| (s - h.theta_f).abs() > SAME)
            .collect();
        if off.is_empty() {
            (Branch::Consistent, all.clone(), h.theta_f)
        } else {
            (Branch::Shift, all.clone(), off.into_iter().fold(f64::MAX, f64::min))
        }
    };
    let d0 = if branch == Branch::Degree { d0 } else { 2.0 };
    let b0: Vec<usize> = a0.iter().copied().filter(|&i| (h.twists[i].shift - theta0).abs() <= SAME).collect();

    let weight = |i: usize| -> (u64, Rational) {
        let cof_star = split.star(d / chars[i].conductor());
        (cof_star, h.twists[i].conductor * Rational::from_integer(cof_star as i128))
    };
    let q0 = b0.iter().map(|&i| weight(i).1).max().expect("B0 is never empty");

    let mut members = Vec::with_capacity(b0.len());
    let mut c0 = Vec::new();
    let mut m = 1u64;
    for &i in &b0 {
        let (cofactor_star, w) = weight(i);
        let ratio = w / q0;
        let in_c0 = ratio.is_one();
        if in_c0 {
            c0.push(i);
        } else {
            m = lcm(m, *ratio.denom() as u64);
        }
        members.push(AuditMember {
            chi_index: i,
            primitive: chars[i].primitive_inducing(),
            conductor: h.twists[i].conductor,
            cofactor_star,
            ratio,
            in_c0,
        });
    }

    Ok(AuditSets {
        modulus: d,
        branch,
        d0,
        lambda0: 1.0 / d0,
        theta0,
        a0,
        b0,
        c0,
        q0,
        m,
        s0: pole_location(d0, theta0),
        members,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermClass {
    VanishNonintegral,
    VanishProperDivisor,
    Active,
}

/// `q(χ*) m ν / q₀`, the index of the residue of the `(χ, m)` term at `α_ν`.
pub fn residue_index(member: &AuditMember, m: u64, nu: u64, q0: &Rational) -> Rational {
    member.conductor * Rational::from_integer(m as i128 * nu as i128) / *q0
}

/// Classify the residue of the `(χ, m)` term at `α_ν` by exact integrality
/// of its index. An integral index off the active terms is an error.
pub fn classify_residue_term(chi_index: usize, m: u64, nu: u64, sets: &AuditSets) -> Result<TermClass, Error> {
    let md = sets.m as u128 * sets.modulus as u128;
    if num_integer::gcd(nu as u128, md) != 1 {
        return Err(Error::NotCoprime { a: nu as i64, modulus: md as u64 });
    }
    let member = sets
        .member(chi_index)
        .ok_or_else(|| Error::InvalidHypothesis(format!("character {chi_index} is not in B0")))?;
    if m == 0 || member.cofactor_star % m != 0 {
        return Err(Error::NotADivisor { m, bound: member.cofactor_star });
    }
    let index = residue_index(member, m, nu, &sets.q0);
    let active = member.in_c0 && m == member.cofactor_star;
    match (index.is_integer(), active) {
        (true, true) => Ok(TermClass::Active),
        (true, false) => Err(Error::UnexpectedIntegralIndex { chi_index, m, index: format!("{index}") }),
        (false, true) => Err(Error::InvalidHypothesis(format!("active term ({chi_index}, {m}) has index {index}"))),
        (false, false) if member.in_c0 => Ok(TermClass::VanishProperDivisor),
        (false, false) => Ok(TermClass::VanishNonintegral),
    }
}

/// `ℓ(χ) = f(χ, (D/f_χ)*, 1) Π_{p | D/f_χ} A_{∂_p}(p) p^{-∂_p s₀}` for
/// `χ ∈ C₀`, constants of the residues taken to be 1.
pub fn ell_coefficients(split: &SplitTable, sets: &AuditSets) -> Result<Vec<(usize, Complex64)>, Error> {
    let d = sets.modulus;
    let chars = enumerate_characters(d);
    let mut out = Vec::with_capacity(sets.c0.len());
    for &i in &sets.c0 {
        let chi = &chars[i];
        let cofactor = d / chi.conductor();
        let mut value = f_coefficient(chi, split.star(cofactor), 1, split)?;
        for p in prime_divisors(cofactor) {
            let local = split.local(p).expect("prime of D");
            let lead = local.leading();
            if lead.norm() < SAME {
                return Err(Error::ZeroLeadingCoefficient { p });
            }
            let e = local.degree() as f64;
            value *= lead * Complex64::new(p as f64, 0.0).powc(-sets.s0 * e);
        }
        out.push((i, value));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Contradiction,
    NoWitnessUpToBound,
    HypothesisConsistent,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Contradiction => "CONTRADICTION",
            Verdict::NoWitnessUpToBound => "NO-WITNESS-UP-TO-BOUND",
            Verdict::HypothesisConsistent => "HYPOTHESIS-CONSISTENT",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub nu: u64,
    pub a_nu: Complex64,
    /// `a(ν) Σ_{χ∈C₀} conj(ℓ(χ)) χ*(ν)`
    pub sum: Complex64,
    /// the full residue sum over `χ ∈ B₀`, `m | (D/f_χ)*` at `α_ν`
    pub residue_sum: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub sets: AuditSets,
    pub ell: Vec<(usize, Complex64)>,
    pub witness: Option<Witness>,
    pub verdict: Verdict,
    /// residue terms classified during the scan
    pub terms_classified: usize,
    pub notes: Vec<String>,
}

/// `Σ_{χ∈B₀} Σ_{m | (D/f_χ)*} B_m f(χ, m, 1) m^{-s₀} Res(χ, m, α_ν)` with
/// residues from the pole predictor.
pub fn residue_sum(x: &CoefficientSeries, split: &SplitTable, sets: &AuditSets, nu: u64) -> Result<Complex64, Error> {
    let chars = enumerate_characters(sets.modulus);
    let alpha = alpha_nu(&sets.q0, nu);
    let mut total = Complex64::zero();
    for member in &sets.members {
        for m in divisors(member.cofactor_star) {
            let shifted = alpha.times_root(m, sets.d0)?;
            let pole = predict_pole(sets.d0, &member.conductor, sets.theta0, &shifted, Some(&member.primitive), x)?;
            if !pole.integral {
                continue;
            }
            let f = f_coefficient(&chars[member.chi_index], m, 1, split)?;
            let weight = split.b_coefficient(m) * f * Complex64::new(m as f64, 0.0).powc(-sets.s0);
            total += weight * pole.residue_shape;
        }
    }
    Ok(total)
}

/// Scan `ν <= min(ν_bound, N)` with `gcd(ν, MD) = 1` for a nonvanishing
/// `a(ν) Σ_{χ∈C₀} conj(ℓ(χ)) χ*(ν)`, classifying every residue term on
/// the way.
pub fn find_contradiction(
    x: &CoefficientSeries,
    split: &SplitTable,
    h: &TwistHypothesis,
    nu_bound: u64,
) -> Result<AuditReport, Error> {
    let sets = compute_sets(h, split)?;
    let mut notes = vec![
        String::from("f(chi, m, 1/D) is evaluated as f(chi, m, 1)"),
        String::from("residue constants c(F^chi*) are taken to be 1"),
        String::from("conductors are rational, so the irrational-ratio case does not arise"),
    ];
    if sets.branch == Branch::Consistent {
        return Ok(AuditReport {
            sets,
            ell: Vec::new(),
            witness: None,
            verdict: Verdict::HypothesisConsistent,
            terms_classified: 0,
            notes,
        });
    }
    if sets.branch == Branch::Shift {
        notes.push(format!("all degrees are 2; theta0 = {} is the least shift differing from theta_F", sets.theta0));
    }
    if sets.c0.len() > 1 {
        notes.push(String::from("assuming nonzero constants: |C0| > 1, constants rescale terms of the sum"));
    }

    let ell = ell_coefficients(split, &sets)?;
    let md = sets.m * sets.modulus;
    let bound = nu_bound.min(x.len() as u64);
    let mut terms_classified = 0;
    let mut witness = None;
    for nu in (1..=bound).filter(|&n| gcd(n, md) == 1) {
        for member in &sets.members {
            for m in divisors(member.cofactor_star) {
                classify_residue_term(member.chi_index, m, nu, &sets)?;
                terms_classified += 1;
            }
        }
        let a_nu = x.get(nu)?;
        let inner: Complex64 = ell
            .iter()
            .map(|&(i, l)| {
                let member = sets.member(i).expect("C0 is inside B0");
                l.conj() * member.primitive.eval(nu)
            })
            .sum();
        let sum = a_nu * inner;
        if sum.norm() > WITNESS_TOL {
            let residue_sum = residue_sum(x, split, &sets, nu)?;
            witness = Some(Witness { nu, a_nu, sum, residue_sum });
            break;
        }
    }
    let verdict = if witness.is_some() { Verdict::Contradiction } else { Verdict::NoWitnessUpToBound };
    Ok(AuditReport { sets, ell, witness, verdict, terms_classified, notes })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaturationEntry {
    pub m: u64,
    pub residue: u64,
    pub witness: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaturationReport {
    pub modulus: u64,
    pub entries: Vec<SaturationEntry>,
}

impl SaturationReport {
    pub fn saturated(&self) -> bool {
        self.entries.iter().all(|e| e.witness.is_some())
    }

    pub fn flagged(&self) -> impl Iterator<Item = &SaturationEntry> {
        self.entries.iter().filter(|e| e.witness.is_none())
    }

    pub fn largest_witness(&self) -> Option<u64> {
        self.entries.iter().filter_map(|e| e.witness).max()
    }
}

/// For each `M` and each reduced class `a` mod `D`, the least `ν <= bound`
/// with `ν ≡ a (mod D)`, `gcd(ν, M) = 1` and `a(ν) != 0`.
pub fn saturation_check(x: &CoefficientSeries, d: u64, m_list: &[u64], bound: u64) -> SaturationReport {
    let bound = bound.min(x.len() as u64);
    let classes: Vec<u64> = if d == 1 { vec![0] } else { (1..d).filter(|&a| gcd(a, d) == 1).collect() };
    let mut entries = Vec::new();
    for &m in m_list {
        for &a in &classes {
            let start = if a == 0 { d } else { a };
            let witness = (start..=bound)
                .step_by(d as usize)
                .find(|&nu| gcd(nu, m) == 1 && x.at(nu).norm() > SAME);
            entries.push(SaturationEntry { m, residue: a, witness });
        }
    }
    SaturationReport { modulus: d, entries }
}

/// Numerical rank of the matrix with rows `(a(n) χ(n))_{n <= cutoff, (n, M) = 1}`
/// over all `χ` mod `D`, singular values below `1e-8 σ_max` discarded.
pub fn independence_rank(x: &CoefficientSeries, d: u64, m: u64, cutoff: usize) -> usize {
    let chars = enumerate_characters(d);
    let cutoff = cutoff.min(x.len());
    let cols: Vec<u64> = (1..=cutoff as u64).filter(|&n| gcd(n, m) == 1).collect();
    if cols.is_empty() {
        return 0;
    }
    let mat = DMatrix::from_fn(chars.len(), cols.len(), |r, c| x.at(cols[c]) * chars[r].eval(cols[c]));
    let sv = mat.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-8 * top).count()
}

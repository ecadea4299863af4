//! Decomposition of the additive twist `F(s, a/D, α, λ)` into character
//! twists `m^{-s} F^{χ*}(s, 0, m^λ α, λ)`.
//!
//! Two construction paths are provided. [`decompose`] uses the closed-form
//! coefficients `f(χ, m, a)`. [`decompose_recursive`] assembles the same
//! terms by induction over the divisors of `D`: the principal restriction is
//! expanded through the additive character sums, and the correction terms
//! `B_k k^{-s} F(s, ak/D, k^λ α, λ)` are expanded recursively at the reduced
//! modulus `D/(k, D)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::arith::{divisors, euler_phi, gcd, is_squarefree, mobius, radical, unitary_divisors};
use crate::characters::{c_coefficient_direct, enumerate_characters, gauss_sum, CharacterKey, DirichletCharacter};
use crate::error::Error;
use crate::invariants::Rational;
use crate::series::{twist_by_character, CoefficientSeries, SplitTable};

/// One summand `scalar · m^{-s} F^{χ*}(s, 0, m^λ α, λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionTerm {
    /// position of `χ` in [`enumerate_characters`]`(D)`
    pub chi_index: usize,
    /// the primitive character inducing `χ`
    pub primitive: DirichletCharacter,
    pub m: u64,
    /// `B_m f(χ, m, a) / φ(D)`
    pub scalar: Complex64,
}

impl DecompositionTerm {
    pub fn conductor(&self) -> u64 {
        self.primitive.modulus()
    }
}

fn reduce_coprime(a: i64, d: u64) -> Result<u64, Error> {
    let r = a.rem_euclid(d as i64) as u64;
    if gcd(r, d) != 1 {
        return Err(Error::NotCoprime { a, modulus: d });
    }
    Ok(r)
}

/// `f(χ, m, a) = μ(D/f) conj(τ(χ*)) conj(χ*(D/f)) χ*(am) r(m)` for `χ` mod a
/// squarefree `D` and `m | (D/f)*`.
pub fn f_coefficient(chi: &DirichletCharacter, m: u64, a: i64, split: &SplitTable) -> Result<Complex64, Error> {
    let d = chi.modulus();
    if !is_squarefree(d) {
        return Err(Error::NotSquarefree(d));
    }
    assert_eq!(split.modulus, d, "split table must be built for the character modulus");
    let a = reduce_coprime(a, d)?;
    let cofactor = d / chi.conductor();
    let bound = split.star(cofactor);
    if m == 0 || bound % m != 0 {
        return Err(Error::NotADivisor { m, bound });
    }
    let star = chi.primitive_inducing();
    let mu = mobius(cofactor) as f64;
    let phase = star.value(cofactor).conj() * star.value(a % star.modulus() * (m % star.modulus()));
    Ok(gauss_sum(&star).value.conj() * phase.to_complex() * (mu * radical(m) as f64))
}

/// The closed-form decomposition: one term per `χ` mod `D` and `m | (D/f_χ)*`.
/// Terms whose `B_m` vanishes are kept with scalar zero.
pub fn decompose(split: &SplitTable, a: i64) -> Result<Vec<DecompositionTerm>, Error> {
    let d = split.modulus;
    reduce_coprime(a, d)?;
    let phi = euler_phi(d) as f64;
    let mut out = Vec::new();
    for (chi_index, chi) in enumerate_characters(d).into_iter().enumerate() {
        let primitive = chi.primitive_inducing();
        let bound = split.star(d / chi.conductor());
        for m in divisors(bound) {
            let scalar = split.b_coefficient(m) * f_coefficient(&chi, m, a, split)? / phi;
            out.push(DecompositionTerm { chi_index, primitive: primitive.clone(), m, scalar });
        }
    }
    Ok(out)
}

/// Terms keyed by `(χ*, m)`.
pub type TermMap = BTreeMap<(CharacterKey, u64), Complex64>;

pub fn term_map(terms: &[DecompositionTerm]) -> TermMap {
    let mut map = TermMap::new();
    for t in terms {
        *map.entry((t.primitive.key(), t.m)).or_insert_with(Complex64::zero) += t.scalar;
    }
    map
}

/// Memo for [`decompose_recursive`], keyed by reduced `(D', a')`.
#[derive(Clone, Debug, Default)]
pub struct RecursionMemo {
    table: BTreeMap<(u64, u64), TermMap>,
}

impl RecursionMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// The decomposition assembled along the induction over divisors of `D`,
/// without using the closed form of `f(χ, m, a)`.
pub fn decompose_recursive(split: &SplitTable, a: i64, memo: &mut RecursionMemo) -> Result<TermMap, Error> {
    let d = split.modulus;
    let a = reduce_coprime(a, d)?;
    Ok(recurse(split, d, a, memo))
}

fn recurse(split: &SplitTable, d: u64, a: u64, memo: &mut RecursionMemo) -> TermMap {
    if let Some(hit) = memo.table.get(&(d, a)) {
        return hit.clone();
    }
    let table = split.restrict(d);
    let phi = euler_phi(d) as f64;
    let ms = divisors(table.d_star);
    let mut out = TermMap::new();

    // principal restriction through the additive character sums
    for chi in enumerate_characters(d) {
        let c = c_coefficient_direct(&chi, a as i64).expect("a is a unit mod d");
        let star = chi.primitive_inducing();
        let key = star.key();
        for &m in &ms {
            let w = star.value(m);
            if w.is_zero() {
                continue;
            }
            *out.entry((key.clone(), m)).or_insert_with(Complex64::zero) +=
                c * table.b_coefficient(m) * w.to_complex() / phi;
        }
    }

    // minus Σ_{k>1} B_k k^{-s} F(s, ak/D, k^λ α, λ) at the reduced modulus
    for &k in ms.iter().filter(|&&k| k > 1) {
        let g = gcd(k, d);
        let inner_d = d / g;
        let inner_a = (a as u128 * (k / g) as u128 % inner_d as u128) as u64;
        let inner = recurse(split, inner_d, inner_a, memo);
        let bk = table.b_coefficient(k);
        for ((key, nu), v) in inner {
            *out.entry((key, k * nu)).or_insert_with(Complex64::zero) -= bk * v;
        }
    }

    memo.table.insert((d, a), out.clone());
    out
}

/// Largest scalar difference between two term maps over the union of keys.
pub fn term_map_distance(x: &TermMap, y: &TermMap) -> f64 {
    let zero = Complex64::zero();
    x.keys()
        .chain(y.keys())
        .map(|k| (x.get(k).unwrap_or(&zero) - y.get(k).unwrap_or(&zero)).norm())
        .fold(0.0, f64::max)
}

/// `|a(n) e(-an/D) - Σ_{terms, m|n} scalar · χ*(n/m) a(n/m)|`.
pub fn coefficient_residual(
    x: &CoefficientSeries,
    terms: &[DecompositionTerm],
    d: u64,
    a: i64,
    n: u64,
) -> Result<f64, Error> {
    let a_red = reduce_coprime(a, d)?;
    let an = x.get(n)?;
    let t = (a_red as u128 * n as u128 % d as u128) as i64;
    let lhs = an * crate::characters::e_frac(-t, d);
    let mut rhs = Complex64::zero();
    for term in terms {
        if n % term.m != 0 || term.scalar.is_zero() {
            continue;
        }
        let k = n / term.m;
        rhs += term.scalar * term.primitive.eval(k) * x.at(k);
    }
    Ok((lhs - rhs).norm())
}

/// Per-coefficient identity at one `n`, building the decomposition first.
pub fn verify_coefficient(x: &CoefficientSeries, split: &SplitTable, a: i64, n: u64) -> Result<f64, Error> {
    let terms = decompose(split, a)?;
    coefficient_residual(x, &terms, split.modulus, a, n)
}

/// `Σ_{k || m} φ((k, D)) μ((k, D)) r(m/k)`, the sum over unitary divisors
/// that collapses to `1`.
pub fn telescoping_check(m: u64, d: u64) -> Result<i64, Error> {
    if m == 0 || d % radical(m) != 0 {
        return Err(Error::NotADivisor { m: radical(m.max(1)), bound: d });
    }
    Ok(unitary_divisors(m)
        .into_iter()
        .map(|k| {
            let g = gcd(k, d);
            euler_phi(g) as i64 * mobius(g) * radical(m / k) as i64
        })
        .sum())
}

/// Phase data of `e(-βn - αn^λ)` with `β` exact.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearTwistParams {
    pub beta: Rational,
    pub alpha: f64,
    pub lambda: f64,
}

impl NonlinearTwistParams {
    pub fn new(beta: Rational, alpha: f64, lambda: f64) -> Result<Self, Error> {
        if !(lambda > 0.0 && lambda <= 0.5) {
            return Err(Error::InvalidTwist(format!("lambda = {lambda} outside (0, 1/2]")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidTwist(format!("alpha = {alpha}")));
        }
        Ok(NonlinearTwistParams { beta, alpha, lambda })
    }

    /// `e(-βn - αn^λ)`, with `βn` reduced modulo 1 exactly.
    pub fn phase(&self, n: u64) -> Complex64 {
        let num = *self.beta.numer();
        let den = *self.beta.denom();
        let lin = (num.rem_euclid(den) as u128 * n as u128 % den as u128) as f64 / den as f64;
        let non = self.alpha * (n as f64).powf(self.lambda);
        let turns = (lin + non.fract()).fract();
        Complex64::from_polar(1.0, -2.0 * PI * turns)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedValue {
    pub value: Complex64,
    /// bound on `|Σ_{n>N} a(n) n^{-s} e(...)|` from `|a(n)| <= K n^c`
    pub tail_bound: f64,
}

/// `K N^{c-σ+1} / (σ-c-1)`, the integral comparison for `Σ_{n>N} K n^{c-σ}`.
pub fn tail_bound(constant: f64, growth: f64, sigma: f64, n: usize) -> Result<f64, Error> {
    let gap = sigma - growth - 1.0;
    if !(gap > 0.0) {
        return Err(Error::OutsideConvergence { sigma, growth });
    }
    Ok(constant * (n as f64).powf(-gap) / gap)
}

/// `Σ_{n<=N} a(n) n^{-s} e(-βn - αn^λ)` and its tail bound.
pub fn evaluate_nonlinear_twist(
    x: &CoefficientSeries,
    s: Complex64,
    params: &NonlinearTwistParams,
    n: usize,
) -> Result<TruncatedValue, Error> {
    let tail = tail_bound(x.growth_constant(), x.growth_exponent(), s.re, n)?;
    if n > x.len() {
        return Err(Error::OutOfRange { index: n as u64, len: x.len() });
    }
    let mut value = Complex64::zero();
    for (i, &an) in x.coefficients()[..n].iter().enumerate() {
        if an.is_zero() {
            continue;
        }
        let k = (i + 1) as u64;
        let ln = (k as f64).ln();
        value += an * (-s * ln).exp() * params.phase(k);
    }
    Ok(TruncatedValue { value, tail_bound: tail })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// combined tail bounds of both sides
    pub bound: f64,
}

impl NumericCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.residual <= self.bound + tol
    }
}

/// Both sides of the decomposition as truncated sums at `s`, with
/// `β = a/D` on the left and `β = 0`, `α → m^λ α` on each right-hand term.
pub fn verify_numeric(
    x: &CoefficientSeries,
    split: &SplitTable,
    a: i64,
    alpha: f64,
    lambda: f64,
    s: Complex64,
    n: usize,
) -> Result<NumericCheck, Error> {
    let d = split.modulus;
    let terms = decompose(split, a)?;
    let left = NonlinearTwistParams::new(Rational::new(a as i128, d as i128), alpha, lambda)?;
    let lhs = evaluate_nonlinear_twist(x, s, &left, n)?;

    let mut twisted: BTreeMap<CharacterKey, CoefficientSeries> = BTreeMap::new();
    let mut rhs = Complex64::zero();
    let mut bound = lhs.tail_bound;
    for term in terms.iter().filter(|t| !t.scalar.is_zero()) {
        let series = twisted
            .entry(term.primitive.key())
            .or_insert_with(|| twist_by_character(x, &term.primitive));
        let mf = term.m as f64;
        let params = NonlinearTwistParams::new(Rational::zero(), mf.powf(lambda) * alpha, lambda)?;
        let v = evaluate_nonlinear_twist(series, s, &params, n)?;
        let weight = term.scalar * (-s * mf.ln()).exp();
        rhs += weight * v.value;
        bound += weight.norm() * v.tail_bound;
    }
    Ok(NumericCheck { lhs: lhs.value, rhs, residual: (lhs.value - rhs).norm(), bound })
}

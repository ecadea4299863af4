//! Truncated Dirichlet series `Σ_{n<=N} a(n) n^{-s}` and the coefficient
//! algebra on them: convolution, coprime restriction, character twists,
//! polynomial local factors and the `B_m` tables built from them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::arith::{divisors, gcd, is_squarefree, max_power_at_most, prime_divisors};
use crate::characters::DirichletCharacter;
use crate::error::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSeries {
    label: String,
    coeffs: Vec<Complex64>,
    growth_exponent: f64,
}

impl CoefficientSeries {
    /// `coeffs[0]` is `a(1)`.
    pub fn new(label: impl Into<String>, coeffs: Vec<Complex64>, growth_exponent: f64) -> Self {
        assert!(growth_exponent >= 0.0, "growth exponent must be nonnegative");
        CoefficientSeries { label: label.into(), coeffs, growth_exponent }
    }

    pub fn from_real(label: impl Into<String>, coeffs: &[f64], growth_exponent: f64) -> Self {
        let c = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(label, c, growth_exponent)
    }

    pub fn with_growth(mut self, growth_exponent: f64) -> Self {
        assert!(growth_exponent >= 0.0, "growth exponent must be nonnegative");
        self.growth_exponent = growth_exponent;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Truncation length `N`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn growth_exponent(&self) -> f64 {
        self.growth_exponent
    }

    /// `a(1..=N)` as a slice, `a(n)` at index `n - 1`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `a(n)`; indices outside `1..=N` are an error.
    pub fn get(&self, n: u64) -> Result<Complex64, Error> {
        if n == 0 || n as usize > self.coeffs.len() {
            return Err(Error::OutOfRange { index: n, len: self.coeffs.len() });
        }
        Ok(self.coeffs[n as usize - 1])
    }

    #[inline]
    pub(crate) fn at(&self, n: u64) -> Complex64 {
        self.coeffs[n as usize - 1]
    }

    /// `max_{n<=N} |a(n)| / n^c`, the constant `K` in `|a(n)| <= K n^c`
    /// estimated over the stored range.
    pub fn growth_constant(&self) -> f64 {
        let c = self.growth_exponent;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm() / ((i + 1) as f64).powf(c))
            .fold(0.0, f64::max)
    }

    /// `a(p^k)` for every `p^k <= N`, starting at `k = 0`.
    pub fn local_coefficients(&self, p: u64) -> Vec<Complex64> {
        let k_max = max_power_at_most(p, self.len() as u64);
        let mut out = Vec::with_capacity(k_max as usize + 1);
        let mut pk = 1u64;
        for _ in 0..=k_max {
            out.push(self.at(pk));
            pk = pk.saturating_mul(p);
        }
        out
    }
}

/// `c(n) = Σ_{d|n} x(d) y(n/d)` up to `min(Nx, Ny)`.
pub fn dirichlet_convolve(x: &CoefficientSeries, y: &CoefficientSeries) -> CoefficientSeries {
    let n = x.len().min(y.len());
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for d in 1..=n {
        let xd = x.coeffs[d - 1];
        if xd == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut k = 1;
        while d * k <= n {
            c[d * k - 1] += xd * y.coeffs[k - 1];
            k += 1;
        }
    }
    CoefficientSeries::new(
        format!("({})*({})", x.label, y.label),
        c,
        x.growth_exponent + y.growth_exponent,
    )
}

/// Zero every coefficient with `gcd(n, M) > 1`.
pub fn restrict_coprime(x: &CoefficientSeries, modulus: u64) -> CoefficientSeries {
    assert!(modulus >= 1);
    let coeffs = x
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &a)| if gcd(i as u64 + 1, modulus) == 1 { a } else { Complex64::new(0.0, 0.0) })
        .collect();
    CoefficientSeries::new(format!("{}|{}", x.label, modulus), coeffs, x.growth_exponent)
}

/// `b(n) = a(n) χ(n)`.
pub fn twist_by_character(x: &CoefficientSeries, chi: &DirichletCharacter) -> CoefficientSeries {
    let coeffs = x
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &a)| a * chi.eval(i as u64 + 1))
        .collect();
    CoefficientSeries::new(
        format!("{}^chi[{}:{:?}]", x.label, chi.modulus(), chi.exponents()),
        coeffs,
        x.growth_exponent,
    )
}

/// Polynomial inverse `Σ_{l<=∂} A_l X^l` of a local factor `Σ_k a(p^k) X^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFactorInverse {
    pub p: u64,
    /// `A_0, ..., A_∂`
    pub coefficients: Vec<Complex64>,
    /// number of recurrence rows `k > ∂` that were checked
    pub check_rows: usize,
    /// worst relative recurrence residual over the checked rows
    pub max_residual: f64,
    /// largest degree the search was allowed to try
    pub searched_degree: usize,
}

impl LocalFactorInverse {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `A_ℓ(p)`, zero beyond the degree.
    pub fn a(&self, l: usize) -> Complex64 {
        self.coefficients.get(l).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn leading(&self) -> Complex64 {
        self.coefficients[self.degree()]
    }

    /// `p^∂`.
    pub fn prime_power(&self) -> u64 {
        self.p.pow(self.degree() as u32)
    }

    /// `Σ_ℓ A_ℓ a(p^{k-ℓ})` on a local sequence, `k` within the sequence.
    pub fn recurrence_value(&self, local: &[Complex64], k: usize) -> Complex64 {
        (0..=self.degree().min(k)).map(|l| self.coefficients[l] * local[k - l]).sum()
    }
}

fn relative_row_residual(a: &[Complex64], local: &[Complex64], k: usize) -> f64 {
    let deg = a.len() - 1;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for l in 0..=deg.min(k) {
        let t = a[l] * local[k - l];
        sum += t;
        scale += t.norm();
    }
    sum.norm() / scale.max(1.0)
}

/// Detect a polynomial local inverse from `a(p^0), ..., a(p^K)`.
///
/// The candidate for degree `∂` is the formal inverse of the local series
/// truncated at `∂` (rows `k <= ∂` of the recurrence fix it uniquely since
/// `a(1) = 1`); it is accepted when every row `∂ < k <= K` vanishes within
/// `tol`. The smallest accepted `∂` is returned. Requires
/// `K >= max_degree + margin` with `margin >= 1`.
pub fn detect_split_local(
    p: u64,
    local: &[Complex64],
    max_degree: usize,
    margin: usize,
    tol: f64,
) -> Result<LocalFactorInverse, Error> {
    let margin = margin.max(1);
    let required = max_degree + margin + 1;
    if local.len() < required {
        return Err(Error::InsufficientCoefficients { p, available: local.len(), required });
    }
    if (local[0] - Complex64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::NotNormalized(local[0].re));
    }
    let k_max = local.len() - 1;
    // formal inverse b of the local series, b_0 = 1
    let mut inverse = Vec::with_capacity(max_degree + 1);
    inverse.push(Complex64::new(1.0, 0.0));
    for deg in 0..=max_degree {
        if deg > 0 {
            let bk: Complex64 = -(1..=deg).map(|j| local[j] * inverse[deg - j]).sum::<Complex64>();
            inverse.push(bk);
        }
        let candidate = &inverse[..=deg];
        let worst = (deg + 1..=k_max)
            .map(|k| relative_row_residual(candidate, local, k))
            .fold(0.0, f64::max);
        if worst <= tol {
            return Ok(LocalFactorInverse {
                p,
                coefficients: candidate.to_vec(),
                check_rows: k_max - deg,
                max_residual: worst,
                searched_degree: max_degree,
            });
        }
    }
    Err(Error::NotSplit { p, max_degree })
}

/// Detect splitting at `p` from the series' own coefficients with the
/// margin equal to `max_degree` extra recurrence rows.
pub fn detect_polynomial_split(
    x: &CoefficientSeries,
    p: u64,
    max_degree: usize,
    tol: f64,
) -> Result<LocalFactorInverse, Error> {
    detect_split_local(p, &x.local_coefficients(p), max_degree, max_degree, tol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitOptions {
    pub max_degree: usize,
    pub tol: f64,
    /// fewest recurrence rows beyond the largest candidate degree
    pub min_check_rows: usize,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions { max_degree: 8, tol: 1e-8, min_check_rows: 1 }
    }
}

/// Local inverses at every `p | D` and the multiplicative table
/// `B_m = Π_{p^ℓ || m} A_ℓ(p)` over `m | D*`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitTable {
    pub modulus: u64,
    pub locals: Vec<LocalFactorInverse>,
    pub d_star: u64,
    pub b: BTreeMap<u64, Complex64>,
}

impl SplitTable {
    /// Table from known local inverses; `modulus` must be squarefree and
    /// `locals` must cover exactly its primes.
    pub fn from_locals(modulus: u64, mut locals: Vec<LocalFactorInverse>) -> Result<Self, Error> {
        if !is_squarefree(modulus) {
            return Err(Error::NotSquarefree(modulus));
        }
        locals.sort_by_key(|l| l.p);
        let primes: Vec<u64> = locals.iter().map(|l| l.p).collect();
        assert_eq!(primes, prime_divisors(modulus), "one local factor per prime of D");
        let d_star: u64 = locals.iter().map(|l| l.prime_power()).product();
        let b = divisors(d_star)
            .into_iter()
            .map(|m| {
                let value = locals
                    .iter()
                    .map(|l| {
                        let mut e = 0usize;
                        let mut r = m;
                        while r % l.p == 0 {
                            r /= l.p;
                            e += 1;
                        }
                        l.a(e)
                    })
                    .product();
                (m, value)
            })
            .collect();
        Ok(SplitTable { modulus, locals, d_star, b })
    }

    pub fn local(&self, p: u64) -> Option<&LocalFactorInverse> {
        self.locals.iter().find(|l| l.p == p)
    }

    /// `B_m`; zero when `m ∤ D*`.
    pub fn b_coefficient(&self, m: u64) -> Complex64 {
        self.b.get(&m).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// `k* = Π_{p|k} p^{∂_p}` for `k | D`.
    pub fn star(&self, k: u64) -> u64 {
        assert_eq!(self.modulus % k, 0, "{k} must divide {}", self.modulus);
        prime_divisors(k)
            .into_iter()
            .map(|p| self.local(p).expect("prime of D").prime_power())
            .product()
    }

    /// The table restricted to a divisor `d` of `D`.
    pub fn restrict(&self, d: u64) -> SplitTable {
        assert_eq!(self.modulus % d, 0);
        let locals = self.locals.iter().filter(|l| d % l.p == 0).cloned().collect();
        SplitTable::from_locals(d, locals).expect("divisor of a squarefree number is squarefree")
    }

    /// True when some local factor was accepted on tolerance with fewer
    /// check rows than its degree.
    pub fn thinly_checked(&self) -> bool {
        self.locals.iter().any(|l| l.check_rows < l.degree().max(1))
    }
}

/// Detect every local factor at `p | D` and assemble the `B_m` table.
///
/// The degree searched at `p` is capped so that at least
/// `opts.min_check_rows` recurrence rows remain within the truncation.
pub fn build_split_table(
    x: &CoefficientSeries,
    modulus: u64,
    opts: &SplitOptions,
) -> Result<SplitTable, Error> {
    if !is_squarefree(modulus) {
        return Err(Error::NotSquarefree(modulus));
    }
    let mut locals = Vec::new();
    for p in prime_divisors(modulus) {
        let local = x.local_coefficients(p);
        let k_max = local.len() - 1;
        let rows = opts.min_check_rows.max(1);
        if k_max < rows {
            return Err(Error::InsufficientCoefficients { p, available: local.len(), required: rows + 1 });
        }
        let cap = opts.max_degree.min(k_max - rows);
        locals.push(detect_split_local(p, &local, cap, k_max - cap, opts.tol)?);
    }
    SplitTable::from_locals(modulus, locals)
}

/// `c(n) = Σ_{m | (n, D*)} B_m a(n/m)`, i.e. the series multiplied by
/// `Π_{p|D} F_p^{-1}`.
pub fn apply_local_inverses(x: &CoefficientSeries, table: &SplitTable) -> CoefficientSeries {
    let n = x.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for (&m, &bm) in &table.b {
        let m = m as usize;
        let mut k = 1;
        while m * k <= n {
            c[m * k - 1] += bm * x.coeffs[k - 1];
            k += 1;
        }
    }
    CoefficientSeries::new(format!("{}|{}", x.label, table.modulus), c, x.growth_exponent)
}

/// `|a(n) χ₀(n) - Σ_{m | (n, D*)} B_m a(n/m)|` with `χ₀` principal mod `D`.
pub fn principal_restriction_residual(
    x: &CoefficientSeries,
    table: &SplitTable,
    n: u64,
) -> Result<f64, Error> {
    let an = x.get(n)?;
    let lhs = if gcd(n, table.modulus) == 1 { an } else { Complex64::new(0.0, 0.0) };
    let g = gcd(n, table.d_star);
    let rhs: Complex64 = divisors(g).into_iter().map(|m| table.b_coefficient(m) * x.at(n / m)).sum();
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;
    use crate::fixtures;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn ones(n: usize) -> CoefficientSeries {
        CoefficientSeries::from_real("ones", &vec![1.0; n], 0.0)
    }

    #[test]
    fn out_of_range_is_an_error() {
        let x = ones(10);
        assert_eq!(x.get(0), Err(Error::OutOfRange { index: 0, len: 10 }));
        assert_eq!(x.get(11), Err(Error::OutOfRange { index: 11, len: 10 }));
        assert_eq!(x.get(10), Ok(c(1.0)));
    }

    #[test]
    fn convolution_examples() {
        let d = dirichlet_convolve(&ones(100), &ones(100));
        assert_eq!(d.get(6).unwrap(), c(4.0));
        let mut delta = vec![0.0; 50];
        delta[0] = 1.0;
        let unit = CoefficientSeries::from_real("unit", &delta, 0.0);
        let z2 = fixtures::divisor_series(50);
        assert_eq!(dirichlet_convolve(&unit, &z2).coefficients(), z2.coefficients());
        assert_eq!(d.coefficients()[..50], z2.coefficients()[..]);
    }

    #[test]
    fn restriction_examples() {
        let z2 = fixtures::divisor_series(100);
        assert_eq!(restrict_coprime(&z2, 1).coefficients(), z2.coefficients());
        let r = restrict_coprime(&z2, 2);
        assert_eq!(r.get(4).unwrap(), c(0.0));
        assert_eq!(r.get(9).unwrap(), c(3.0));
    }

    #[test]
    fn twist_examples() {
        let z2 = fixtures::divisor_series(100);
        let trivial = &enumerate_characters(1)[0];
        assert_eq!(twist_by_character(&z2, trivial).coefficients(), z2.coefficients());
        let chi3 = &enumerate_characters(3)[1];
        let t = twist_by_character(&z2, chi3);
        assert!((t.get(2).unwrap() - c(-2.0)).norm() < 1e-15);
        assert_eq!(t.get(6).unwrap(), c(0.0));
    }

    #[test]
    fn split_detection_examples() {
        let z2 = fixtures::divisor_series(1 << 12);
        let l = detect_polynomial_split(&z2, 2, 4, 1e-8).unwrap();
        assert_eq!(l.coefficients, [c(1.0), c(-2.0), c(1.0)]);

        let mut unit = vec![0.0; 1000];
        unit[0] = 1.0;
        let unit = CoefficientSeries::from_real("unit", &unit, 0.0);
        let l = detect_polynomial_split(&unit, 3, 3, 1e-8).unwrap();
        assert_eq!(l.coefficients, [c(1.0)]);
    }

    #[test]
    fn split_detection_needs_margin() {
        let z2 = fixtures::divisor_series(100);
        assert!(matches!(
            detect_polynomial_split(&z2, 2, 8, 1e-8),
            Err(Error::InsufficientCoefficients { p: 2, .. })
        ));
    }

    #[test]
    fn non_split_sequence_is_rejected() {
        // a(p^k) = k! grows too fast for any short recurrence
        let mut local = vec![c(1.0)];
        for k in 1..12 {
            local.push(local[k - 1] * (k as f64));
        }
        assert!(matches!(detect_split_local(2, &local, 4, 4, 1e-8), Err(Error::NotSplit { .. })));
    }

    #[test]
    fn split_table_examples() {
        let z2 = fixtures::divisor_series(10_000);
        let opts = SplitOptions::default();
        let t2 = build_split_table(&z2, 2, &opts).unwrap();
        assert_eq!(t2.d_star, 4);
        assert_eq!(t2.b_coefficient(1), c(1.0));
        assert_eq!(t2.b_coefficient(2), c(-2.0));
        assert_eq!(t2.b_coefficient(4), c(1.0));
        let t6 = build_split_table(&z2, 6, &opts).unwrap();
        assert_eq!(t6.d_star, 36);
        assert_eq!(t6.b_coefficient(6), c(4.0));
        assert_eq!(t6.b_coefficient(36), c(1.0));
        assert_eq!(t6.star(2), 4);
        let t1 = build_split_table(&z2, 1, &opts).unwrap();
        assert_eq!(t1.d_star, 1);
        assert_eq!(t1.b_coefficient(1), c(1.0));
        assert_eq!(build_split_table(&z2, 12, &opts), Err(Error::NotSquarefree(12)));
    }

    #[test]
    fn principal_restriction_examples() {
        let z2 = fixtures::divisor_series(1000);
        let opts = SplitOptions::default();
        let t2 = build_split_table(&z2, 2, &opts).unwrap();
        assert!(principal_restriction_residual(&z2, &t2, 4).unwrap() < 1e-12);
        let t6 = build_split_table(&z2, 6, &opts).unwrap();
        assert!(principal_restriction_residual(&z2, &t6, 12).unwrap() < 1e-12);
        let t1 = build_split_table(&z2, 1, &opts).unwrap();
        for n in 1..=100 {
            assert_eq!(principal_restriction_residual(&z2, &t1, n).unwrap(), 0.0);
        }
        assert!(principal_restriction_residual(&z2, &t1, 1001).is_err());
    }
}

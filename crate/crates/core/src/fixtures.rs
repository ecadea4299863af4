//! Concrete degree-2 series used throughout the checks: `ζ(s)²`, the
//! discriminant form normalized to the critical line `1/2`, and
//! `ζ(s)L(s, χ)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::arith::divisor_count_table;
use crate::characters::{gauss_sum, DirichletCharacter, RootOfUnity};
use crate::invariants::GammaFactorData;
use crate::series::{dirichlet_convolve, twist_by_character, CoefficientSeries};

/// Growth exponent recorded on every fixture: all three satisfy
/// `|a(n)| <= d(n) <= K n^{1/4}`.
pub const FIXTURE_GROWTH: f64 = 0.25;

/// `d(n)` for `n <= N`.
pub fn divisor_series(n: usize) -> CoefficientSeries {
    let d = divisor_count_table(n);
    let coeffs = d[1..].iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
    CoefficientSeries::new("zeta^2", coeffs, FIXTURE_GROWTH)
}

/// Ramanujan `τ(1..=n)` from `q Π_{k>=1} (1 - q^k)^{24}`, expanded as the
/// eighth power of `Π (1 - q^k)^3 = Σ_j (-1)^j (2j+1) q^{j(j+1)/2}`.
pub fn ramanujan_tau(n: usize) -> Vec<i128> {
    if n == 0 {
        return Vec::new();
    }
    // τ(m) is the coefficient of q^{m-1} in the product, m <= n
    let len = n;
    let mut cube: Vec<(usize, i128)> = Vec::new();
    let mut j = 0usize;
    while j * (j + 1) / 2 < len {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        cube.push((j * (j + 1) / 2, sign * (2 * j as i128 + 1)));
        j += 1;
    }
    let mut acc = vec![0i128; len];
    for &(e, c) in &cube {
        acc[e] = c;
    }
    for _ in 1..8 {
        let mut next = vec![0i128; len];
        for &(e, c) in &cube {
            for (i, &v) in acc[..len - e].iter().enumerate() {
                if v != 0 {
                    next[i + e] += c * v;
                }
            }
        }
        acc = next;
    }
    acc
}

/// `τ(n) / n^{11/2}`.
pub fn delta_normalized(n: usize) -> CoefficientSeries {
    let tau = ramanujan_tau(n);
    let coeffs = tau
        .iter()
        .enumerate()
        .map(|(i, &t)| Complex64::new(t as f64 / ((i + 1) as f64).powf(5.5), 0.0))
        .collect();
    CoefficientSeries::new("delta", coeffs, FIXTURE_GROWTH)
}

/// `ζ(s) L(s, χ)`: the convolution of `1` with `χ`.
pub fn zeta_times_l(chi: &DirichletCharacter, n: usize) -> CoefficientSeries {
    let ones = CoefficientSeries::from_real("ones", &vec![1.0; n], 0.0);
    let twisted = twist_by_character(&ones, chi);
    dirichlet_convolve(&ones, &twisted)
        .with_label(format!("zeta*L(chi mod {})", chi.modulus()))
        .with_growth(FIXTURE_GROWTH)
}

/// The fixture families, with their γ-data and exact local sequences
/// where those are available in closed form.
#[derive(Clone, Debug)]
pub enum Family {
    ZetaSquared,
    DeltaNormalized,
    /// `ζ L(χ)` with `χ` primitive
    ZetaTimesL(DirichletCharacter),
}

impl Family {
    /// `ζ L(χ₄)` with `χ₄` the nontrivial character mod 4.
    pub fn zeta_times_l4() -> Self {
        Family::ZetaTimesL(crate::characters::enumerate_characters(4)[1].clone())
    }

    pub fn name(&self) -> String {
        match self {
            Family::ZetaSquared => "zeta-squared".into(),
            Family::DeltaNormalized => "delta".into(),
            Family::ZetaTimesL(chi) => format!("zeta-l{}", chi.modulus()),
        }
    }

    pub fn series(&self, n: usize) -> CoefficientSeries {
        match self {
            Family::ZetaSquared => divisor_series(n),
            Family::DeltaNormalized => delta_normalized(n),
            Family::ZetaTimesL(chi) => zeta_times_l(chi, n),
        }
    }

    pub fn gamma(&self) -> GammaFactorData {
        match self {
            Family::ZetaSquared => GammaFactorData::zeta_squared(),
            Family::DeltaNormalized => GammaFactorData::delta_normalized(),
            Family::ZetaTimesL(chi) => {
                let f = chi.modulus();
                let odd = chi.value_signed(-1) != RootOfUnity::ONE;
                // root number τ(χ) / (i^κ √f)
                let tau = gauss_sum(chi).value;
                let ik = if odd { Complex64::new(0.0, 1.0) } else { Complex64::new(1.0, 0.0) };
                let omega = tau / (ik * (f as f64).sqrt());
                GammaFactorData::zeta_times_l(f, u8::from(odd), omega)
            }
        }
    }

    /// `a(p^0), ..., a(p^k_max)` without truncation, when known exactly.
    pub fn exact_local(&self, p: u64, k_max: usize) -> Option<Vec<Complex64>> {
        match self {
            Family::ZetaSquared => Some((0..=k_max).map(|k| Complex64::new(k as f64 + 1.0, 0.0)).collect()),
            Family::DeltaNormalized => None,
            Family::ZetaTimesL(chi) => {
                let w = chi.value(p);
                Some(
                    (0..=k_max)
                        .map(|k| (0..=k as u64).map(|j| w.pow(j).to_complex()).sum())
                        .collect(),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;

    /// Expand `q Π_{k<=n} (1 - q^k)^24` one binomial factor at a time.
    fn tau_by_product(n: usize) -> Vec<i128> {
        let mut poly = vec![0i128; n];
        poly[0] = 1;
        for k in 1..n {
            for _ in 0..24 {
                for i in (k..n).rev() {
                    poly[i] -= poly[i - k];
                }
            }
        }
        poly
    }

    #[test]
    fn tau_matches_product_expansion() {
        let fast = ramanujan_tau(60);
        let slow = tau_by_product(60);
        assert_eq!(fast, slow);
        assert_eq!(fast[1], -24);
        assert_eq!(fast[2], 252);
        assert_eq!(fast[11], -370_944);
    }

    #[test]
    fn divisor_fixture() {
        let z = divisor_series(100);
        assert_eq!(z.get(1).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(z.get(12).unwrap(), Complex64::new(6.0, 0.0));
    }

    #[test]
    fn delta_fixture() {
        let d = delta_normalized(10);
        let expect = -24.0 / 2f64.powf(5.5);
        assert!((d.get(2).unwrap().re - expect).abs() < 1e-15);
        assert!((expect + 0.530_330_085_9).abs() < 1e-9);
    }

    #[test]
    fn zeta_l_fixture() {
        let chi4 = &enumerate_characters(4)[1];
        let z = zeta_times_l(chi4, 50);
        assert_eq!(z.get(2).unwrap(), Complex64::new(1.0, 0.0));
        // 5 = 1 mod 4: 1 + χ(5) = 2
        assert!((z.get(5).unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((z.get(3).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn exact_locals_match_truncated_series() {
        let n = 5000;
        for fam in [Family::ZetaSquared, Family::zeta_times_l4()] {
            let s = fam.series(n);
            for p in [2u64, 3, 5, 7] {
                let truncated = s.local_coefficients(p);
                let exact = fam.exact_local(p, truncated.len() - 1).unwrap();
                for (a, b) in truncated.iter().zip(&exact) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }
}

//! Degree, conductor and internal shift from γ-factor data, and the
//! pole/residue predictor for standard twists.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, Zero};

use crate::characters::DirichletCharacter;
use crate::error::Error;
use crate::series::CoefficientSeries;

pub type Rational = Ratio<i128>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaFactor {
    pub lambda: f64,
    pub mu: Complex64,
}

/// `γ(s) = Q^s Π Γ(λ_j s + μ_j)` together with the root number `ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaFactorData {
    pub q: f64,
    pub factors: Vec<GammaFactor>,
    pub omega: Complex64,
}

impl GammaFactorData {
    pub fn new(q: f64, factors: Vec<GammaFactor>, omega: Complex64) -> Result<Self, Error> {
        let g = GammaFactorData { q, factors, omega };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::InvalidGamma(format!("Q = {} must be positive", self.q)));
        }
        for (j, f) in self.factors.iter().enumerate() {
            if !(f.lambda > 0.0 && f.lambda.is_finite()) {
                return Err(Error::InvalidGamma(format!("lambda_{j} = {} must be positive", f.lambda)));
            }
            if f.mu.re < 0.0 {
                return Err(Error::InvalidGamma(format!("Re(mu_{j}) = {} is negative", f.mu.re)));
            }
        }
        if (self.omega.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidGamma(format!("|omega| = {} is not 1", self.omega.norm())));
        }
        Ok(())
    }

    /// `ζ(s)^2`: `Q = 1/π`, two factors `(1/2, 0)`.
    pub fn zeta_squared() -> Self {
        let f = GammaFactor { lambda: 0.5, mu: Complex64::new(0.0, 0.0) };
        GammaFactorData { q: 1.0 / PI, factors: alloc::vec![f, f], omega: Complex64::new(1.0, 0.0) }
    }

    /// The discriminant form normalized to the critical line `1/2`.
    pub fn delta_normalized() -> Self {
        GammaFactorData {
            q: 1.0 / (2.0 * PI),
            factors: alloc::vec![GammaFactor { lambda: 1.0, mu: Complex64::new(5.5, 0.0) }],
            omega: Complex64::new(1.0, 0.0),
        }
    }

    /// `ζ(s) L(s, χ)` for a primitive `χ` mod `f` with parity `κ ∈ {0, 1}`
    /// and root number `omega_chi`.
    pub fn zeta_times_l(conductor: u64, parity: u8, omega_chi: Complex64) -> Self {
        let f = conductor as f64;
        GammaFactorData {
            q: f.sqrt() / PI,
            factors: alloc::vec![
                GammaFactor { lambda: 0.5, mu: Complex64::new(0.0, 0.0) },
                GammaFactor { lambda: 0.5, mu: Complex64::new(f64::from(parity) / 2.0, 0.0) },
            ],
            omega: omega_chi,
        }
    }

    /// Replace factor `index` using `Γ(z) = π^{-1/2} 2^{z-1} Γ(z/2) Γ((z+1)/2)`:
    /// `(λ, μ)` becomes `(λ/2, μ/2), (λ/2, (μ+1)/2)`, `Q` gains `2^λ`, and the
    /// constant `κ = 2^{μ-1} π^{-1/2}` moves into the root number as
    /// `ω conj(κ)/κ`.
    pub fn duplicate_factor(&self, index: usize) -> Self {
        let GammaFactor { lambda, mu } = self.factors[index];
        let mut factors = self.factors.clone();
        factors.splice(
            index..=index,
            [
                GammaFactor { lambda: lambda / 2.0, mu: mu / 2.0 },
                GammaFactor { lambda: lambda / 2.0, mu: (mu + 1.0) / 2.0 },
            ],
        );
        let kappa = (mu - 1.0).expf(2.0) / PI.sqrt();
        let omega = self.omega * kappa.conj() / kappa;
        GammaFactorData { q: self.q * 2f64.powf(lambda), factors, omega }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantTriple {
    pub degree: f64,
    pub conductor: f64,
    pub shift: f64,
}

/// `d = 2Σλ_j`, `q = (2π)^d Q² Πλ_j^{2λ_j}`, `θ = (2/d) Im Σμ_j`.
pub fn compute_invariants(g: &GammaFactorData) -> Result<InvariantTriple, Error> {
    g.validate()?;
    let degree = 2.0 * g.factors.iter().map(|f| f.lambda).sum::<f64>();
    if degree == 0.0 {
        return Err(Error::DegreeZero);
    }
    let conductor = (2.0 * PI).powf(degree)
        * g.q
        * g.q
        * g.factors.iter().map(|f| f.lambda.powf(2.0 * f.lambda)).product::<f64>();
    let shift = 2.0 / degree * g.factors.iter().map(|f| f.mu.im).sum::<f64>();
    Ok(InvariantTriple { degree, conductor, shift })
}

/// The twist parameter `α` of a standard twist in a form that keeps
/// `n_α = q (α/d)^d` exact.
#[derive(Clone, Debug, PartialEq)]
pub enum Alpha {
    /// `α` itself rational; needs an integral degree.
    Rational(Rational),
    /// `α = radicand^{1/index}`; needs `index | d`.
    Root { radicand: Rational, index: u32 },
    /// `α = d · r^{1/d}`, i.e. `(α/d)^d = r`, valid for any degree.
    Scaled(Rational),
}

fn integral_degree(d: f64) -> Option<u32> {
    (d > 0.0 && d.fract() == 0.0 && d <= 64.0).then_some(d as u32)
}

fn checked_pow(r: &Rational, e: u32) -> Option<Rational> {
    let mut num = 1i128;
    let mut den = 1i128;
    for _ in 0..e {
        num = num.checked_mul(*r.numer())?;
        den = den.checked_mul(*r.denom())?;
    }
    Some(Rational::new(num, den))
}

impl Alpha {
    /// `(α/d)^d` as an exact rational.
    pub fn scaled_power(&self, d: f64) -> Result<Rational, Error> {
        match self {
            Alpha::Scaled(r) => Ok(*r),
            Alpha::Rational(a) => {
                let k = integral_degree(d)
                    .ok_or_else(|| Error::InexactAlpha(format!("rational alpha needs an integral degree, got {d}")))?;
                checked_pow(&(*a / Rational::from_integer(k as i128)), k)
                    .ok_or_else(|| Error::InexactAlpha("overflow".into()))
            }
            Alpha::Root { radicand, index } => {
                let k = integral_degree(d)
                    .filter(|k| *index > 0 && k % index == 0)
                    .ok_or_else(|| Error::InexactAlpha(format!("root of index {index} needs a degree divisible by it, got {d}")))?;
                let num = checked_pow(radicand, k / index);
                let den = checked_pow(&Rational::from_integer(k as i128), k);
                match (num, den) {
                    (Some(n), Some(dd)) => Ok(n / dd),
                    _ => Err(Error::InexactAlpha("overflow".into())),
                }
            }
        }
    }

    /// Floating value of `α`.
    pub fn value(&self, d: f64) -> f64 {
        match self {
            Alpha::Rational(a) => to_f64(a),
            Alpha::Root { radicand, index } => to_f64(radicand).powf(1.0 / f64::from(*index)),
            Alpha::Scaled(r) => d * to_f64(r).powf(1.0 / d),
        }
    }

    /// `m^{1/d} α` in scaled form.
    pub fn times_root(&self, m: u64, d: f64) -> Result<Alpha, Error> {
        Ok(Alpha::Scaled(self.scaled_power(d)? * Rational::from_integer(m as i128)))
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn is_positive_integer(r: &Rational) -> bool {
    r.is_integer() && r.is_positive()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolePrediction {
    pub s0: Complex64,
    pub n_alpha: Rational,
    pub integral: bool,
    /// `conj(a(n_α)) conj(χ*(n_α)) n_α^{s₀-1}`, the residue up to a nonzero
    /// constant; zero when `n_α` is not a positive integer
    pub residue_shape: Complex64,
}

/// `s₀ = 1/2 + 1/(2d) - iθ`.
pub fn pole_location(degree: f64, shift: f64) -> Complex64 {
    Complex64::new(0.5 + 0.5 / degree, -shift)
}

/// Location, index `n_α = q (α/d)^d` and residue shape of the possible pole
/// of the standard twist with parameter `α`. `conductor` is the conductor
/// of the twisted function when `twist` is given.
pub fn predict_pole(
    degree: f64,
    conductor: &Rational,
    shift: f64,
    alpha: &Alpha,
    twist: Option<&DirichletCharacter>,
    series: &CoefficientSeries,
) -> Result<PolePrediction, Error> {
    if !(degree > 0.0) {
        return Err(Error::DegreeZero);
    }
    let s0 = pole_location(degree, shift);
    let n_alpha = *conductor * alpha.scaled_power(degree)?;
    let integral = is_positive_integer(&n_alpha);
    let residue_shape = if integral {
        let n = n_alpha.to_integer() as u64;
        residue_shape_at(n, s0, twist, series)?
    } else {
        Complex64::zero()
    };
    Ok(PolePrediction { s0, n_alpha, integral, residue_shape })
}

/// `conj(a(n)) conj(χ*(n)) n^{s₀-1}`.
pub fn residue_shape_at(
    n: u64,
    s0: Complex64,
    twist: Option<&DirichletCharacter>,
    series: &CoefficientSeries,
) -> Result<Complex64, Error> {
    let a = series.get(n)?;
    let chi = twist.map_or(Complex64::one(), |c| c.eval(n));
    Ok(a.conj() * chi.conj() * Complex64::new(n as f64, 0.0).powc(s0 - 1.0))
}

/// `α_ν = d₀ (ν/q₀)^{1/d₀}`, carried exactly as `(α/d₀)^{d₀} = ν/q₀`.
pub fn alpha_nu(q0: &Rational, nu: u64) -> Alpha {
    Alpha::Scaled(Rational::from_integer(nu as i128) / *q0)
}

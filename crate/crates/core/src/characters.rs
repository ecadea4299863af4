//! Dirichlet characters held exactly as exponent vectors over fixed
//! generators of `(Z/qZ)^×`, with values as reduced roots of unity.
//!
//! Generators: the smallest primitive root for every odd prime-power
//! component, the pair `{-1, 5}` for `2^k` with `k >= 3`, `-1` for `4`, and
//! nothing for `2`. Characters are enumerated in lexicographic order of their
//! exponent vectors, so index 0 is always the principal character.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::arith::{divisors, euler_phi, factorize, gcd, lcm, mobius, pow_mod};
use crate::error::Error;

/// `e(num/den) = exp(2πi·num/den)`, exact at multiples of a quarter turn.
pub fn e_frac(num: i64, den: u64) -> Complex64 {
    let den_i = den as i64;
    let k = num.rem_euclid(den_i);
    if (4 * k) % den_i == 0 {
        return match 4 * k / den_i {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let angle = 2.0 * PI * (k as f64) / (den as f64);
    Complex64::new(angle.cos(), angle.sin())
}

/// Either zero or `e(k/n)` with `0 <= k < n`, `gcd(k, n) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    zero: bool,
    num: u64,
    den: u64,
}

impl RootOfUnity {
    pub const ZERO: RootOfUnity = RootOfUnity { zero: true, num: 0, den: 1 };
    pub const ONE: RootOfUnity = RootOfUnity { zero: false, num: 0, den: 1 };

    /// `e(k/n)`, normalized.
    pub fn new(k: i64, n: u64) -> Self {
        assert!(n > 0, "root of unity denominator must be positive");
        let k = k.rem_euclid(n as i64) as u64;
        let g = gcd(k, n);
        RootOfUnity { zero: false, num: k / g, den: n / g }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `(k, n)` with value `e(k/n)`; `None` for zero.
    pub fn fraction(&self) -> Option<(u64, u64)> {
        (!self.zero).then_some((self.num, self.den))
    }

    pub fn conj(self) -> Self {
        if self.zero {
            self
        } else {
            RootOfUnity::new(-(self.num as i64), self.den)
        }
    }

    pub fn pow(self, e: u64) -> Self {
        if self.zero {
            return if e == 0 { RootOfUnity::ONE } else { self };
        }
        let k = (self.num as u128 * e as u128 % self.den as u128) as i64;
        RootOfUnity::new(k, self.den)
    }

    pub fn to_complex(self) -> Complex64 {
        if self.zero {
            Complex64::new(0.0, 0.0)
        } else {
            e_frac(self.num as i64, self.den)
        }
    }
}

impl core::ops::Mul for RootOfUnity {
    type Output = RootOfUnity;
    fn mul(self, rhs: Self) -> Self {
        if self.zero || rhs.zero {
            return RootOfUnity::ZERO;
        }
        let den = lcm(self.den, rhs.den);
        let k = self.num * (den / self.den) + rhs.num * (den / rhs.den);
        RootOfUnity::new(k as i64, den)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Component {
    prime_power: u64,
    order: u64,
    /// discrete log of every residue mod `prime_power` (None off the units)
    log: Vec<Option<u64>>,
}

fn cyclic_component(prime_power: u64, order: u64, generator: u64) -> Component {
    let mut log = vec![None; prime_power as usize];
    let mut x = 1 % prime_power;
    for e in 0..order {
        log[x as usize] = Some(e);
        x = x * generator % prime_power;
    }
    Component { prime_power, order, log }
}

fn smallest_primitive_root(pk: u64, phi: u64) -> u64 {
    let qs: Vec<u64> = factorize(phi).into_iter().map(|(r, _)| r).collect();
    (2..pk)
        .find(|&g| gcd(g, pk) == 1 && qs.iter().all(|&r| pow_mod(g, phi / r, pk) != 1))
        .expect("odd prime powers are cyclic")
}

/// The unit group mod `q` split into cyclic components, one log table each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitGroup {
    modulus: u64,
    components: Vec<Component>,
    /// exponent of the group: every character value is `e(k/exponent)`
    exponent: u64,
}

impl UnitGroup {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1, "modulus must be positive");
        let mut components = Vec::new();
        for (p, k) in factorize(q) {
            let pk = p.pow(k);
            if p == 2 {
                if k == 2 {
                    components.push(cyclic_component(4, 2, 3));
                } else if k >= 3 {
                    // (-1)^a 5^b covers the units mod 2^k exactly once
                    let order5 = pk / 4;
                    let mut log_minus = vec![None; pk as usize];
                    let mut log_five = vec![None; pk as usize];
                    let mut x = 1u64;
                    for b in 0..order5 {
                        log_minus[x as usize] = Some(0);
                        log_five[x as usize] = Some(b);
                        let y = pk - x;
                        log_minus[y as usize] = Some(1);
                        log_five[y as usize] = Some(b);
                        x = x * 5 % pk;
                    }
                    components.push(Component { prime_power: pk, order: 2, log: log_minus });
                    components.push(Component { prime_power: pk, order: order5, log: log_five });
                }
            } else {
                let phi = pk / p * (p - 1);
                let g = smallest_primitive_root(pk, phi);
                components.push(cyclic_component(pk, phi, g));
            }
        }
        let exponent = components.iter().fold(1, |acc, c| lcm(acc, c.order));
        UnitGroup { modulus: q, components, exponent }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Orders of the generators, in exponent-vector order.
    pub fn orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Exponent vector of `n` over the generators; `None` when `gcd(n, q) > 1`.
    pub fn log(&self, n: u64) -> Option<Vec<u64>> {
        if gcd(n % self.modulus, self.modulus) != 1 {
            return None;
        }
        self.components
            .iter()
            .map(|c| c.log[(n % c.prime_power) as usize])
            .collect()
    }
}

/// A Dirichlet character mod `q`, identified by its exponent vector.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    modulus: u64,
    exponents: Vec<u64>,
    orders: Vec<u64>,
    /// values at `0..q` as numerators over `denom`, `None` off the units
    table: Vec<Option<u64>>,
    denom: u64,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    /// Character with the given exponents over the generators of `group`.
    pub fn from_exponents(group: &UnitGroup, exponents: &[u64]) -> Self {
        let orders = group.orders();
        assert_eq!(exponents.len(), orders.len(), "one exponent per generator");
        let exponents: Vec<u64> = exponents.iter().zip(&orders).map(|(e, o)| e % o).collect();
        let denom = group.exponent();
        let table = (0..group.modulus())
            .map(|n| {
                group.log(n).map(|logs| {
                    logs.iter()
                        .zip(&exponents)
                        .zip(&orders)
                        .map(|((l, e), o)| l * e % o * (denom / o))
                        .sum::<u64>()
                        % denom
                })
            })
            .collect();
        DirichletCharacter { modulus: group.modulus(), exponents, orders, table, denom }
    }

    pub fn principal(q: u64) -> Self {
        let group = UnitGroup::new(q);
        let zeros = vec![0; group.orders().len()];
        Self::from_exponents(&group, &zeros)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// `χ(n)`; the character mod 1 is identically 1.
    pub fn value(&self, n: u64) -> RootOfUnity {
        match self.table[(n % self.modulus) as usize] {
            None => RootOfUnity::ZERO,
            Some(k) => RootOfUnity::new(k as i64, self.denom),
        }
    }

    /// `χ(n)` for signed `n` (`χ(-1)` etc.).
    pub fn value_signed(&self, n: i64) -> RootOfUnity {
        self.value(n.rem_euclid(self.modulus as i64) as u64)
    }

    pub fn eval(&self, n: u64) -> Complex64 {
        self.value(n).to_complex()
    }

    /// Order of the character in the character group.
    pub fn order(&self) -> u64 {
        self.exponents
            .iter()
            .zip(&self.orders)
            .fold(1, |acc, (&e, &o)| lcm(acc, o / gcd(e, o)))
    }

    /// Real-valued (order at most 2).
    pub fn is_real(&self) -> bool {
        self.order() <= 2
    }

    /// Least `f | q` such that `χ` is trivial on units `≡ 1 (mod f)`.
    pub fn conductor(&self) -> u64 {
        let q = self.modulus;
        divisors(q)
            .into_iter()
            .find(|&f| {
                (1..=q)
                    .step_by(f as usize)
                    .filter(|&n| gcd(n, q) == 1)
                    .all(|n| self.value(n) == RootOfUnity::ONE)
            })
            .unwrap_or(q)
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }

    /// The primitive character mod `conductor()` inducing `self`.
    pub fn primitive_inducing(&self) -> DirichletCharacter {
        let f = self.conductor();
        if f == self.modulus {
            return self.clone();
        }
        let group = UnitGroup::new(f);
        let lift = |r: u64| -> u64 {
            (0..self.modulus)
                .map(|t| r + t * f)
                .find(|&n| gcd(n, self.modulus) == 1)
                .expect("every unit mod f lifts to a unit mod q")
        };
        // a generator g_i has log vector e_i; read χ(g_i) and rescale onto its order
        let orders = group.orders();
        let mut exponents = Vec::with_capacity(orders.len());
        for (i, &ord) in orders.iter().enumerate() {
            let g = (1..f)
                .find(|&n| {
                    group.log(n).is_some_and(|l| {
                        l.iter().enumerate().all(|(j, &v)| v == u64::from(i == j))
                    })
                })
                .expect("generator residue exists");
            let (k, n) = self.value(lift(g)).fraction().expect("lifted generator is a unit");
            debug_assert_eq!(ord % n, 0);
            exponents.push(k * (ord / n));
        }
        DirichletCharacter::from_exponents(&group, &exponents)
    }

    /// Stable identity `(modulus, exponents)` usable as a map key.
    pub fn key(&self) -> CharacterKey {
        CharacterKey { modulus: self.modulus, exponents: self.exponents.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharacterKey {
    pub modulus: u64,
    pub exponents: Vec<u64>,
}

/// All `φ(q)` characters mod `q`, principal first.
pub fn enumerate_characters(q: u64) -> Vec<DirichletCharacter> {
    let group = UnitGroup::new(q);
    let orders = group.orders();
    let total: u64 = orders.iter().product();
    debug_assert_eq!(total, euler_phi(q));
    let mut out = Vec::with_capacity(total as usize);
    let mut exps = vec![0u64; orders.len()];
    for _ in 0..total {
        out.push(DirichletCharacter::from_exponents(&group, &exps));
        for i in (0..exps.len()).rev() {
            exps[i] += 1;
            if exps[i] < orders[i] {
                break;
            }
            exps[i] = 0;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaussSumMethod {
    DirectSum,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussSum {
    pub value: Complex64,
    pub method: GaussSumMethod,
}

/// `Σ_{n mod q} χ(n) e(n/q)` evaluated term by term.
pub fn gauss_sum_direct(chi: &DirichletCharacter) -> Complex64 {
    let q = chi.modulus();
    (0..q)
        .map(|n| (chi.value(n) * RootOfUnity::new(n as i64, q)).to_complex())
        .sum()
}

/// Gauss sum. Real primitive characters use `√q` or `i√q` according to
/// parity; everything else goes through the direct sum.
pub fn gauss_sum(chi: &DirichletCharacter) -> GaussSum {
    let q = chi.modulus();
    if chi.is_real() && chi.is_primitive() {
        let root = (q as f64).sqrt();
        let even = chi.value_signed(-1) == RootOfUnity::ONE;
        let value = if even { Complex64::new(root, 0.0) } else { Complex64::new(0.0, root) };
        return GaussSum { value, method: GaussSumMethod::ClosedForm };
    }
    GaussSum { value: gauss_sum_direct(chi), method: GaussSumMethod::DirectSum }
}

fn require_coprime(a: i64, d: u64) -> Result<u64, Error> {
    let a_red = a.rem_euclid(d as i64) as u64;
    if gcd(a_red, d) != 1 {
        return Err(Error::NotCoprime { a, modulus: d });
    }
    Ok(a_red)
}

/// `c(χ, a/D) = μ(D/f) χ*(a) conj(χ*(D/f)) conj(τ(χ*))` for `χ` mod `D`.
pub fn c_coefficient(chi: &DirichletCharacter, a: i64) -> Result<Complex64, Error> {
    let d = chi.modulus();
    let a = require_coprime(a, d)?;
    let f = chi.conductor();
    let star = chi.primitive_inducing();
    let cofactor = d / f;
    let mu = mobius(cofactor) as f64;
    let phase = star.value(a) * star.value(cofactor).conj();
    Ok(phase.to_complex() * gauss_sum(&star).value.conj() * mu)
}

/// The defining sum `Σ_{n mod D} conj(χ(n)) e(-an/D)`.
pub fn c_coefficient_direct(chi: &DirichletCharacter, a: i64) -> Result<Complex64, Error> {
    let d = chi.modulus();
    let a = require_coprime(a, d)?;
    Ok((0..d)
        .map(|n| {
            let t = (a as u128 * n as u128 % d as u128) as i64;
            (chi.value(n).conj() * RootOfUnity::new(-t, d)).to_complex()
        })
        .sum())
}

/// The expansion `χ₀(n) e(-an/D) = φ(D)^{-1} Σ_χ c(χ, a/D) χ(n)` for one
/// `(D, a)`, with the closed-form coefficients computed once.
#[derive(Clone, Debug)]
pub struct AdditiveExpansion {
    pub modulus: u64,
    pub a: u64,
    pub characters: Vec<DirichletCharacter>,
    pub coefficients: Vec<Complex64>,
}

impl AdditiveExpansion {
    pub fn new(d: u64, a: i64) -> Result<Self, Error> {
        Self::with_characters(enumerate_characters(d), a)
    }

    pub fn with_characters(characters: Vec<DirichletCharacter>, a: i64) -> Result<Self, Error> {
        let d = characters[0].modulus();
        let a_red = require_coprime(a, d)?;
        let coefficients = characters.iter().map(|chi| c_coefficient(chi, a)).collect::<Result<_, _>>()?;
        Ok(AdditiveExpansion { modulus: d, a: a_red, characters, coefficients })
    }

    /// `|χ₀(n) e(-an/D) - φ(D)^{-1} Σ_χ c(χ, a/D) χ(n)|`.
    pub fn residual(&self, n: u64) -> f64 {
        let d = self.modulus;
        let lhs = if gcd(n, d) == 1 {
            let t = (self.a as u128 * n as u128 % d as u128) as i64;
            e_frac(-t, d)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let rhs: Complex64 = self.characters.iter().zip(&self.coefficients).map(|(chi, c)| c * chi.eval(n)).sum();
        (lhs - rhs / self.characters.len() as f64).norm()
    }
}

/// `|χ₀(n) e(-an/D) - φ(D)^{-1} Σ_χ c(χ, a/D) χ(n)|` with the closed-form
/// coefficients.
pub fn additive_expansion_residual(d: u64, a: i64, n: u64) -> Result<f64, Error> {
    Ok(AdditiveExpansion::new(d, a)?.residual(n))
}

/// Same as [`additive_expansion_residual`] over a pre-enumerated character list.
pub fn additive_expansion_residual_with(
    chars: &[DirichletCharacter],
    a: i64,
    n: u64,
) -> Result<f64, Error> {
    Ok(AdditiveExpansion::with_characters(chars.to_vec(), a)?.residual(n))
}

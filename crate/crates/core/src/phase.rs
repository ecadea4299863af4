//! Stationary phase of `z^{1/2} - 2π qβ z/ξ - 2πα q^λ z^λ/ξ^λ` and the
//! dual phase `f*(n) = n/(q_F β) - α n^λ/(β^{2λ} q_F^λ)`.
//!
//! The critical point is parametrized as `x₀ = ξ u_L (1 + δ)` with
//! `u_L = (4π/(β q_F))² ξ`, so that the leading term cancels analytically
//! and the residual against the two-term expansion is computed without
//! subtracting large numbers.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Zero};

use crate::characters::RootOfUnity;
use crate::error::Error;
use crate::invariants::Rational;

const MAX_ITERATIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseParams {
    pub q_f: f64,
    pub beta: f64,
    pub alpha: f64,
    pub lambda: f64,
}

impl PhaseParams {
    pub fn new(q_f: f64, beta: f64, alpha: f64, lambda: f64) -> Result<Self, Error> {
        if !(q_f > 0.0 && q_f.is_finite()) {
            return Err(Error::InvalidPhase(format!("q_F = {q_f} must be positive")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidPhase(format!("beta = {beta} must be positive")));
        }
        if !(lambda > 0.0 && lambda <= 0.5) {
            return Err(Error::InvalidPhase(format!("lambda = {lambda} outside (0, 1/2]")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidPhase(format!("alpha = {alpha}")));
        }
        Ok(PhaseParams { q_f, beta, alpha, lambda })
    }

    /// `q = q_F / (4π)²`.
    pub fn q(&self) -> f64 {
        self.q_f / (16.0 * PI * PI)
    }

    /// `ψ(u) = 1 + (αλ/β) q^{λ-1} u^{λ-1}`.
    pub fn psi(&self, u: f64) -> f64 {
        1.0 + self.alpha * self.lambda / self.beta * (self.q() * u).powf(self.lambda - 1.0)
    }

    /// `u_L = (4π/(β q_F))² ξ`, the leading-order `x₀/ξ`.
    pub fn leading_ratio(&self, xi: f64) -> f64 {
        let k = 4.0 * PI / (self.beta * self.q_f);
        k * k * xi
    }

    /// `ξ/(q_F β) - α ξ^λ/(β^{2λ} q_F^λ)`.
    pub fn predicted(&self, xi: f64) -> f64 {
        xi / (self.q_f * self.beta) - self.nonlinear_scale() * xi.powf(self.lambda)
    }

    /// `α / (β^{2λ} q_F^λ)`.
    fn nonlinear_scale(&self) -> f64 {
        self.alpha / (self.beta * self.beta * self.q_f).powf(self.lambda)
    }

    /// `ε` at `log(1 + δ) = t`: `ψ(u_L e^t) - 1`.
    fn epsilon(&self, xi: f64, t: f64) -> f64 {
        // q u_L = ξ / (β² q_F)
        let qu = xi / (self.beta * self.beta * self.q_f);
        self.alpha * self.lambda / self.beta * qu.powf(self.lambda - 1.0) * ((self.lambda - 1.0) * t).exp()
    }
}

/// `Φ(z, ξ)`.
pub fn phi(z: f64, xi: f64, p: &PhaseParams) -> f64 {
    let q = p.q();
    z.sqrt() - 2.0 * PI * q * p.beta * z / xi - 2.0 * PI * p.alpha * (q * z / xi).powf(p.lambda)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalPoint {
    pub xi: f64,
    pub x0: f64,
    /// `log(1 + δ)` with `x₀ = ξ u_L (1 + δ)`
    pub log_ratio: f64,
    pub iterations: usize,
    /// `|x₀^{1/2} - 4πqβ (x₀/ξ) ψ(x₀/ξ)| / x₀^{1/2}`
    pub residual: f64,
    pub bisected: bool,
}

impl CriticalPoint {
    /// `δ = x₀/(ξ u_L) - 1`.
    pub fn delta(&self) -> f64 {
        self.log_ratio.exp_m1()
    }
}

/// `|x^{1/2} - 4πqβ (x/ξ) ψ(x/ξ)| / x^{1/2}`.
pub fn critical_residual(x0: f64, xi: f64, p: &PhaseParams) -> f64 {
    let u = x0 / xi;
    let rhs = 4.0 * PI * p.q() * p.beta * u * p.psi(u);
    (x0.sqrt() - rhs).abs() / x0.sqrt()
}

/// `g(t) = t + 2 log(1 + ε(t))`, increasing in `t`; `-∞` where `ψ <= 0`.
fn critical_equation(xi: f64, t: f64, p: &PhaseParams) -> f64 {
    let e = p.epsilon(xi, t);
    if e <= -1.0 {
        f64::NEG_INFINITY
    } else {
        t + 2.0 * e.ln_1p()
    }
}

/// Solve `x₀^{1/2} = 4πqβ (x₀/ξ) ψ(x₀/ξ)` for `x₀` near `(4π/(βq_F))² ξ²`.
///
/// Fixed-point iteration on `t = log(1 + δ)`, falling back to bisection
/// with geometrically widened brackets when the iteration stalls.
pub fn solve_critical_point(xi: f64, p: &PhaseParams, tol: f64) -> Result<CriticalPoint, Error> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InvalidPhase(format!("xi = {xi} must be positive")));
    }
    let finish = |t: f64, iterations: usize, bisected: bool| {
        let x0 = xi * p.leading_ratio(xi) * t.exp();
        CriticalPoint { xi, x0, log_ratio: t, iterations, residual: critical_residual(x0, xi, p), bisected }
    };
    if p.alpha == 0.0 {
        return Ok(finish(0.0, 0, false));
    }

    let mut t = 0.0f64;
    let mut last_step = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS / 2 {
        iterations += 1;
        let e = p.epsilon(xi, t);
        if e <= -1.0 {
            break;
        }
        let next = -2.0 * e.ln_1p();
        let step = (next - t).abs();
        t = next;
        if step <= tol * t.abs().max(1e-300) || step == 0.0 {
            let cp = finish(t, iterations, false);
            if cp.residual < tol.max(1e-12) {
                return Ok(cp);
            }
        }
        if !t.is_finite() || step > last_step {
            break;
        }
        last_step = step;
    }

    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while critical_equation(xi, hi, p) < 0.0 {
        hi *= 2.0;
        iterations += 1;
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations, residual: f64::NAN });
        }
    }
    while critical_equation(xi, lo, p) > 0.0 {
        lo *= 2.0;
        iterations += 1;
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations, residual: f64::NAN });
        }
    }
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if critical_equation(xi, mid, p) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cp = finish(0.5 * (lo + hi), iterations, true);
    if cp.residual < tol.max(1e-12) {
        Ok(cp)
    } else {
        Err(Error::NoConvergence { iterations, residual: cp.residual })
    }
}

/// `Φ(x₀, ξ)/(2π) - (ξ/(q_Fβ) - αξ^λ/(β^{2λ}q_F^λ))`, signed, from the
/// cancellation-free form
/// `-ξ/(q_Fβ) (√(1+δ) - 1)² - α ξ^λ/(β^{2λ}q_F^λ) ((1+δ)^λ - 1)`.
pub fn signed_remainder(cp: &CriticalPoint, p: &PhaseParams) -> f64 {
    let xi = cp.xi;
    let half = (0.5 * cp.log_ratio).exp_m1();
    let lam = (p.lambda * cp.log_ratio).exp_m1();
    -xi / (p.q_f * p.beta) * half * half - p.nonlinear_scale() * xi.powf(p.lambda) * lam
}

/// `|Φ(x₀, ξ)/(2π) - predicted| / ξ^λ`.
pub fn asymptotic_residual(xi: f64, p: &PhaseParams) -> Result<f64, Error> {
    let cp = solve_critical_point(xi, p, 1e-14)?;
    Ok(signed_remainder(&cp, p).abs() / xi.powf(p.lambda))
}

/// One row of a phase table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseRow {
    pub xi: f64,
    pub x0: f64,
    pub phi_over_2pi: f64,
    pub predicted: f64,
    pub residual: f64,
}

pub fn phase_row(xi: f64, p: &PhaseParams) -> Result<PhaseRow, Error> {
    let cp = solve_critical_point(xi, p, 1e-14)?;
    let predicted = p.predicted(xi);
    let rem = signed_remainder(&cp, p);
    Ok(PhaseRow {
        xi,
        x0: cp.x0,
        phi_over_2pi: predicted + rem,
        predicted,
        residual: rem.abs() / xi.powf(p.lambda),
    })
}

/// `ξ = 10^lo, ..., 10^hi`.
pub fn decade_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 10f64.powi(k)).collect()
}

/// Constant left over in the remainder, estimated from the two largest grid
/// points under the model `C + b ξ^{-1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantFit {
    pub constant: f64,
    /// `(ξ, |remainder - C| / ξ^λ)`
    pub residuals: Vec<(f64, f64)>,
}

pub fn fit_constant(grid: &[f64], p: &PhaseParams) -> Result<ConstantFit, Error> {
    if grid.len() < 2 {
        return Err(Error::InvalidPhase("constant fit needs at least two grid points".into()));
    }
    let mut rem = Vec::with_capacity(grid.len());
    for &xi in grid {
        let cp = solve_critical_point(xi, p, 1e-14)?;
        rem.push(signed_remainder(&cp, p));
    }
    let k = grid.len();
    let (t1, t2) = (grid[k - 2].powf(-0.5), grid[k - 1].powf(-0.5));
    let constant = (rem[k - 2] * t2 - rem[k - 1] * t1) / (t2 - t1);
    let residuals = grid
        .iter()
        .zip(&rem)
        .map(|(&xi, r)| (xi, (r - constant).abs() / xi.powf(p.lambda)))
        .collect();
    Ok(ConstantFit { constant, residuals })
}

/// Parameters of `f*(n) = β* n + α* n^λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualPhaseParams {
    pub beta_star: f64,
    pub alpha_star: f64,
    pub lambda: f64,
}

/// `β* = 1/(q_F β)`, `α* = -α/(β^{2λ} q_F^λ)`.
pub fn dual_phase(p: &PhaseParams) -> DualPhaseParams {
    DualPhaseParams { beta_star: 1.0 / (p.q_f * p.beta), alpha_star: -p.nonlinear_scale(), lambda: p.lambda }
}

impl DualPhaseParams {
    /// The dual as phase parameters with the same `q_F`.
    pub fn with_conductor(&self, q_f: f64) -> Result<PhaseParams, Error> {
        PhaseParams::new(q_f, self.beta_star, self.alpha_star, self.lambda)
    }
}

/// Exact form of the dual map: `β* = 1/(q_F β)` and `α* = -α · w^{-λ}` with
/// `w = β² q_F`. Returns `(β*, w)`.
pub fn dual_phase_exact(q_f: &Rational, beta: &Rational) -> Result<(Rational, Rational), Error> {
    if q_f.is_zero() || beta.is_zero() {
        return Err(Error::InvalidPhase("q_F and beta must be nonzero".into()));
    }
    Ok((Rational::one() / (*q_f * *beta), *beta * *beta * *q_f))
}

/// `e(-(D/q_F) n)` as an exact root of unity.
pub fn linear_dual_phase(d: u64, q_f: u64, n: i64) -> RootOfUnity {
    let k = (d as i128 % q_f as i128) * (n as i128 % q_f as i128);
    RootOfUnity::new(-(k % q_f as i128) as i64, q_f)
}

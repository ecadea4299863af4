//! JSON documents read and written by the CLI, and the small text parsers
//! for rationals, twist parameters and lists.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use twistcert::audit::{TwistData, TwistHypothesis};
use twistcert::characters::{enumerate_characters, DirichletCharacter};
use twistcert::invariants::{Alpha, GammaFactor, GammaFactorData, Rational};
use twistcert::series::CoefficientSeries;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDoc {
    pub lambda: f64,
    pub mu: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaDoc {
    #[serde(rename = "Q")]
    pub q: f64,
    pub factors: Vec<FactorDoc>,
    pub omega: [f64; 2],
}

impl GammaDoc {
    pub fn from_data(g: &GammaFactorData) -> Self {
        GammaDoc {
            q: g.q,
            factors: g.factors.iter().map(|f| FactorDoc { lambda: f.lambda, mu: [f.mu.re, f.mu.im] }).collect(),
            omega: [g.omega.re, g.omega.im],
        }
    }

    pub fn to_data(&self) -> Result<GammaFactorData> {
        let factors = self
            .factors
            .iter()
            .map(|f| GammaFactor { lambda: f.lambda, mu: Complex64::new(f.mu[0], f.mu[1]) })
            .collect();
        Ok(GammaFactorData::new(self.q, factors, Complex64::new(self.omega[0], self.omega[1]))?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureDocument {
    pub label: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub coefficients: Vec<[f64; 2]>,
    pub growth_exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl FixtureDocument {
    pub fn from_series(x: &CoefficientSeries, gamma: Option<&GammaFactorData>) -> Self {
        FixtureDocument {
            label: x.label().to_string(),
            n: x.len(),
            coefficients: x.coefficients().iter().map(|c| [c.re, c.im]).collect(),
            growth_exponent: x.growth_exponent(),
            gamma: gamma.map(GammaDoc::from_data),
            notes: None,
        }
    }

    pub fn series(&self) -> CoefficientSeries {
        let coeffs = self.coefficients.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        CoefficientSeries::new(self.label.clone(), coeffs, self.growth_exponent)
    }

    pub fn gamma(&self) -> Result<GammaFactorData> {
        self.gamma.as_ref().ok_or_else(|| anyhow!("fixture '{}' has no gamma data", self.label))?.to_data()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.len() != self.n {
            bail!("N = {} but {} coefficients are listed", self.n, self.coefficients.len());
        }
        if self.n == 0 {
            bail!("fixture has no coefficients");
        }
        if !(self.growth_exponent >= 0.0) {
            bail!("growth_exponent must be nonnegative");
        }
        Ok(())
    }

    /// Canonical text: compact JSON with shortest round-trip floats.
    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string(self).expect("fixture serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: FixtureDocument = serde_json::from_str(text).map_err(|e| anyhow!("malformed fixture: {e}"))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistDoc {
    pub chi_index: usize,
    pub degree: f64,
    pub shift: f64,
    /// rational as text, e.g. `"4/9"`
    pub conductor: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisDoc {
    #[serde(rename = "D")]
    pub modulus: u64,
    #[serde(rename = "theta_F", default)]
    pub theta_f: f64,
    pub twists: Vec<TwistDoc>,
}

impl HypothesisDoc {
    pub fn to_hypothesis(&self) -> Result<TwistHypothesis> {
        let count = enumerate_characters(self.modulus).len();
        let mut slots: Vec<Option<TwistData>> = vec![None; count];
        for t in &self.twists {
            let slot = slots
                .get_mut(t.chi_index)
                .ok_or_else(|| anyhow!("chi_index {} out of range for D = {}", t.chi_index, self.modulus))?;
            if slot.is_some() {
                bail!("chi_index {} listed twice", t.chi_index);
            }
            *slot = Some(TwistData { degree: t.degree, shift: t.shift, conductor: parse_rational(&t.conductor)? });
        }
        let twists = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| anyhow!("no entry for chi_index {i}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(TwistHypothesis::new(self.modulus, twists, self.theta_f)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed hypothesis in {}", path.display()))
    }
}

/// `"7"`, `"-3/4"` or a finite decimal such as `"0.25"`, exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().with_context(|| format!("bad numerator in '{s}'"))?;
        let d: i128 = d.trim().parse().with_context(|| format!("bad denominator in '{s}'"))?;
        if d == 0 {
            bail!("zero denominator in '{s}'");
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 30 || !frac.chars().all(|c| c.is_ascii_digit()) {
            bail!("bad decimal '{s}'");
        }
        let neg = int.trim_start().starts_with('-');
        let whole: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().with_context(|| format!("bad decimal '{s}'"))? };
        let scale = 10i128.pow(frac.len() as u32);
        let part: i128 = if frac.is_empty() { 0 } else { frac.parse()? };
        let num = whole.abs() * scale + part;
        return Ok(Rational::new(if neg { -num } else { num }, scale));
    }
    Ok(Rational::from_integer(s.parse().with_context(|| format!("bad rational '{s}'"))?))
}

/// A real given as a float or an exact fraction such as `1/3`.
pub fn parse_real(s: &str) -> Result<f64> {
    if s.contains('/') {
        let r = parse_rational(s)?;
        return Ok(*r.numer() as f64 / *r.denom() as f64);
    }
    s.trim().parse().with_context(|| format!("bad number '{s}'"))
}

/// `r`, `sqrt(r)`, `root(r, k)` or `scaled(r)` (meaning `(α/d)^d = r`).
pub fn parse_alpha(s: &str) -> Result<Alpha> {
    let s = s.trim();
    let inner = |prefix: &str| s.strip_prefix(prefix).and_then(|t| t.strip_suffix(')'));
    if let Some(r) = inner("sqrt(") {
        return Ok(Alpha::Root { radicand: parse_rational(r)?, index: 2 });
    }
    if let Some(args) = inner("root(") {
        let (r, k) = args.split_once(',').ok_or_else(|| anyhow!("root needs two arguments: '{s}'"))?;
        let index: u32 = k.trim().parse().with_context(|| format!("bad root index in '{s}'"))?;
        if index == 0 {
            bail!("root index must be positive");
        }
        return Ok(Alpha::Root { radicand: parse_rational(r)?, index });
    }
    if let Some(r) = inner("scaled(") {
        return Ok(Alpha::Scaled(parse_rational(r)?));
    }
    Ok(Alpha::Rational(parse_rational(s)?))
}

/// `q:i`, the `i`-th character mod `q`.
pub fn parse_character(s: &str) -> Result<DirichletCharacter> {
    let (q, i) = s.split_once(':').ok_or_else(|| anyhow!("character must be given as modulus:index, got '{s}'"))?;
    let q: u64 = q.trim().parse().context("bad character modulus")?;
    let i: usize = i.trim().parse().context("bad character index")?;
    if q == 0 {
        bail!("character modulus must be positive");
    }
    enumerate_characters(q)
        .into_iter()
        .nth(i)
        .ok_or_else(|| anyhow!("index {i} out of range for characters mod {q}"))
}

pub fn alpha_text(a: &Alpha) -> String {
    match a {
        Alpha::Rational(r) => format!("{r}"),
        Alpha::Root { radicand, index: 2 } => format!("sqrt({radicand})"),
        Alpha::Root { radicand, index } => format!("root({radicand}, {index})"),
        Alpha::Scaled(r) => format!("scaled({r})"),
    }
}

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::Args;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use twistcert::arith::{divisors, euler_phi, gcd, prime_divisors};
use twistcert::audit::{find_contradiction, independence_rank, saturation_check, TwistHypothesis};
use twistcert::characters::{c_coefficient_direct, enumerate_characters, AdditiveExpansion};
use twistcert::fixtures::Family;
use twistcert::invariants::{compute_invariants, predict_pole, to_f64};
use twistcert::phase::{dual_phase, fit_constant, phase_row, solve_critical_point, PhaseParams};
use twistcert::series::{build_split_table, principal_restriction_residual, CoefficientSeries, SplitOptions, SplitTable};
use twistcert::twistdecomp::{
    coefficient_residual, decompose as decompose_terms, decompose_recursive, telescoping_check, term_map,
    term_map_distance, verify_numeric, RecursionMemo,
};

use crate::fixture::{
    alpha_text, parse_alpha, parse_character, parse_rational, parse_real, FixtureDocument, HypothesisDoc,
};
use crate::report::{complex, Report, Worst};
use crate::Global;

const DEFAULT_MODULI: &str = "2,3,5,6,10,15,30";

#[derive(Args)]
pub struct SplitFlags {
    /// Largest local degree tried
    #[arg(long, default_value_t = 8)]
    pub max_degree: usize,
    /// Relative tolerance on the recurrence rows
    #[arg(long, default_value_t = 1e-8)]
    pub split_tol: f64,
    /// Fewest recurrence rows kept beyond the candidate degree
    #[arg(long, default_value_t = 1)]
    pub min_check_rows: usize,
}

impl SplitFlags {
    fn options(&self) -> SplitOptions {
        SplitOptions { max_degree: self.max_degree, tol: self.split_tol, min_check_rows: self.min_check_rows }
    }
}

fn load(path: &PathBuf) -> Result<(FixtureDocument, CoefficientSeries)> {
    let doc = FixtureDocument::read(path)?;
    let x = doc.series();
    Ok((doc, x))
}

/// `1..=max_n`, or `k` of them drawn with the given seed.
fn indices(max_n: u64, sample_size: Option<usize>, seed: u64) -> Vec<u64> {
    match sample_size {
        Some(k) if (k as u64) < max_n => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<u64> = sample(&mut rng, max_n as usize, k).into_iter().map(|i| i as u64 + 1).collect();
            v.sort_unstable();
            v
        }
        _ => (1..=max_n).collect(),
    }
}

fn coprime_residues(d: u64) -> Vec<i64> {
    (0..d as i64).filter(|&a| gcd(a as u64, d) == 1).collect()
}

fn table_or_fail(r: &mut Report, x: &CoefficientSeries, d: u64, opts: &SplitOptions) -> Option<SplitTable> {
    match build_split_table(x, d, opts) {
        Ok(t) => {
            if t.thinly_checked() {
                r.line(format!("note: D={d} has local factors accepted on fewer check rows than their degree"));
            }
            Some(t)
        }
        Err(e) => {
            r.fail(format!("D={d}: {e}"));
            None
        }
    }
}

fn check_n(x: &CoefficientSeries, max_n: u64) -> Result<()> {
    if max_n as usize > x.len() {
        bail!("--max-n {max_n} exceeds the fixture length {}", x.len());
    }
    Ok(())
}

#[derive(Args)]
pub struct Lemma1Args {
    /// Single modulus; default sweeps 1..=d-max
    #[arg(long = "D")]
    pub d: Option<u64>,
    #[arg(long = "D-max", default_value_t = 60)]
    pub d_max: u64,
    #[arg(long, default_value_t = 200)]
    pub max_n: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Check this many sampled n instead of every n
    #[arg(long)]
    pub sample: Option<usize>,
}

pub fn lemma1(a: &Lemma1Args, g: &Global) -> Result<Report> {
    let mut r = Report::new("verify-lemma1");
    let moduli: Vec<u64> = match a.d {
        Some(0) => bail!("--D must be positive"),
        Some(d) => vec![d],
        None => (1..=a.d_max).collect(),
    };
    let ns = indices(a.max_n, a.sample, g.seed);
    let mut identity = Worst::new();
    let mut coeffs = Worst::new();
    for &d in &moduli {
        let chars = enumerate_characters(d);
        for res in coprime_residues(d) {
            let exp = AdditiveExpansion::with_characters(chars.clone(), res)?;
            for (i, (chi, c)) in exp.characters.iter().zip(&exp.coefficients).enumerate() {
                let direct = c_coefficient_direct(chi, res)?;
                coeffs.see((c - direct).norm(), || json!({ "D": d, "a": res, "chi_index": i }));
            }
            for &n in &ns {
                identity.see(exp.residual(n), || json!({ "D": d, "a": res, "n": n }));
            }
        }
    }
    r.line(format!("moduli {}..={}, n <= {} ({} values)", moduli[0], moduli[moduli.len() - 1], a.max_n, ns.len()));
    r.line(format!("worst identity residual {:.3e} at {}", identity.value, identity.witness));
    r.line(format!("worst closed-form vs direct-sum gap {:.3e} at {}", coeffs.value, coeffs.witness));
    if !(identity.value < a.tol) {
        r.fail(format!("identity residual above {:.1e}", a.tol));
    }
    if !(coeffs.value < 1e-10) {
        r.fail("closed-form coefficients disagree with the direct sum");
    }
    r.field("identity", identity.json());
    r.field("coefficients", coeffs.json());
    Ok(r)
}

#[derive(Args)]
pub struct Lemma2Args {
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long = "D", value_delimiter = ',', default_value = DEFAULT_MODULI)]
    pub d: Vec<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub max_n: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub sample: Option<usize>,
    #[command(flatten)]
    pub split: SplitFlags,
}

pub fn lemma2(a: &Lemma2Args, g: &Global) -> Result<Report> {
    let (_, x) = load(&a.fixture)?;
    check_n(&x, a.max_n)?;
    let mut r = Report::new("verify-lemma2");
    let ns = indices(a.max_n, a.sample, g.seed);
    let mut worst = Worst::new();
    for &d in &a.d {
        let Some(t) = table_or_fail(&mut r, &x, d, &a.split.options()) else { continue };
        for &n in &ns {
            let res = principal_restriction_residual(&x, &t, n)?;
            worst.see(res, || json!({ "D": d, "n": n }));
        }
    }
    r.line(format!("{}: moduli {:?}, n <= {}", x.label(), a.d, a.max_n));
    r.line(format!("worst residual {:.3e} at {}", worst.value, worst.witness));
    if !(worst.value < a.tol) {
        r.fail(format!("residual above {:.1e}", a.tol));
    }
    r.field("fixture", json!(x.label()));
    r.field("worst", worst.json());
    Ok(r)
}

#[derive(Args)]
pub struct Lemma3Args {
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long = "D", value_delimiter = ',', default_value = DEFAULT_MODULI)]
    pub d: Vec<u64>,
    /// Single residue; default is every residue coprime to D
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<i64>,
    #[arg(long, default_value_t = 5000)]
    pub max_n: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub sample: Option<usize>,
    /// Also compare both sides as truncated sums
    #[arg(long)]
    pub numeric: bool,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', default_value = "0,1", allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1/3,1/2")]
    pub lambda: Vec<String>,
    #[command(flatten)]
    pub split: SplitFlags,
}

pub fn lemma3(a: &Lemma3Args, g: &Global) -> Result<Report> {
    let (_, x) = load(&a.fixture)?;
    check_n(&x, a.max_n)?;
    let lambdas = a.lambda.iter().map(|s| parse_real(s)).collect::<Result<Vec<_>>>()?;
    let mut r = Report::new("verify-lemma3");
    let ns = indices(a.max_n, a.sample, g.seed);
    let mut worst = Worst::new();
    let mut paths = Worst::new();
    let mut telescoping_bad = Vec::new();
    let mut numeric = Vec::new();
    let mut numeric_worst = Worst::new();
    for &d in &a.d {
        let Some(t) = table_or_fail(&mut r, &x, d, &a.split.options()) else { continue };
        for m in divisors(t.d_star) {
            let v = telescoping_check(m, d)?;
            if v != 1 {
                telescoping_bad.push(json!({ "D": d, "m": m, "value": v }));
            }
        }
        let residues = match a.a {
            Some(res) => vec![res],
            None => coprime_residues(d),
        };
        let mut memo = RecursionMemo::new();
        for &res in &residues {
            let terms = decompose_terms(&t, res)?;
            let rec = decompose_recursive(&t, res, &mut memo)?;
            paths.see(term_map_distance(&term_map(&terms), &rec), || json!({ "D": d, "a": res }));
            for &n in &ns {
                let v = coefficient_residual(&x, &terms, d, res, n)?;
                worst.see(v, || json!({ "D": d, "a": res, "n": n }));
            }
            if a.numeric {
                let s = Complex64::new(a.sigma, a.t);
                for &alpha in &a.alpha {
                    for &lambda in &lambdas {
                        let chk = verify_numeric(&x, &t, res, alpha, lambda, s, x.len())?;
                        let tag = json!({ "D": d, "a": res, "alpha": alpha, "lambda": lambda });
                        numeric_worst.see(chk.residual / chk.bound, || tag.clone());
                        if !chk.holds(1e-12) {
                            r.fail(format!("truncated sums differ beyond the tail bounds at {tag}"));
                        }
                        numeric.push(json!({
                            "case": tag, "lhs": complex(chk.lhs), "rhs": complex(chk.rhs),
                            "residual": chk.residual, "bound": chk.bound,
                        }));
                    }
                }
            }
        }
    }
    r.line(format!("{}: moduli {:?}, n <= {}", x.label(), a.d, a.max_n));
    r.line(format!("worst coefficient residual {:.3e} at {}", worst.value, worst.witness));
    r.line(format!("worst closed-form vs recursive gap {:.3e} at {}", paths.value, paths.witness));
    r.line(format!("telescoping sums not equal to 1: {}", telescoping_bad.len()));
    if a.numeric {
        r.line(format!(
            "truncated sums: worst residual/bound {:.3e} at {} over {} cases",
            numeric_worst.value,
            numeric_worst.witness,
            numeric.len()
        ));
    }
    if !(worst.value < a.tol) {
        r.fail(format!("coefficient residual above {:.1e}", a.tol));
    }
    if !(paths.value < 1e-10) {
        r.fail("the two construction paths disagree");
    }
    if !telescoping_bad.is_empty() {
        r.fail("telescoping identity failed");
    }
    r.field("fixture", json!(x.label()));
    r.field("coefficient", worst.json());
    r.field("construction_paths", paths.json());
    r.field("telescoping_failures", Value::Array(telescoping_bad));
    if a.numeric {
        r.field("numeric", Value::Array(numeric));
    }
    Ok(r)
}

#[derive(Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub fixture: PathBuf,
    /// Primes to examine
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u64>,
    /// Examine every prime of this modulus
    #[arg(long = "D")]
    pub d: Option<u64>,
    #[command(flatten)]
    pub split: SplitFlags,
}

pub fn split(a: &SplitArgs) -> Result<Report> {
    let (_, x) = load(&a.fixture)?;
    let mut primes = a.p.clone();
    if let Some(d) = a.d {
        primes.extend(prime_divisors(d));
    }
    if primes.is_empty() {
        bail!("give --p or --D");
    }
    primes.sort_unstable();
    primes.dedup();
    let mut r = Report::new("split");
    let mut rows = Vec::new();
    for p in primes {
        if prime_divisors(p) != [p] {
            bail!("{p} is not prime");
        }
        match build_split_table(&x, p, &a.split.options()) {
            Ok(t) => {
                let l = t.local(p).expect("prime of the modulus");
                let coeffs: Vec<String> = l.coefficients.iter().map(|c| format_complex(*c)).collect();
                r.line(format!(
                    "p={p}: degree {}, A = [{}], {} check rows, max row residual {:.2e}",
                    l.degree(),
                    coeffs.join(", "),
                    l.check_rows,
                    l.max_residual
                ));
                rows.push(json!({
                    "p": p, "degree": l.degree(),
                    "coefficients": l.coefficients.iter().map(|c| complex(*c)).collect::<Vec<_>>(),
                    "check_rows": l.check_rows, "max_residual": l.max_residual,
                    "searched_degree": l.searched_degree,
                }));
            }
            Err(e) => {
                r.fail(format!("p={p}: {e}"));
                rows.push(json!({ "p": p, "error": e.to_string() }));
            }
        }
    }
    r.field("locals", Value::Array(rows));
    Ok(r)
}

fn format_complex(c: Complex64) -> String {
    let c = Complex64::new(c.re + 0.0, c.im + 0.0);
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}

#[derive(Args)]
pub struct InvariantsArgs {
    #[arg(long, conflicts_with = "gamma")]
    pub fixture: Option<PathBuf>,
    /// Gamma data document
    #[arg(long)]
    pub gamma: Option<PathBuf>,
    /// Also apply the duplication formula to this factor and recompute
    #[arg(long)]
    pub duplicate: Option<usize>,
}

pub fn invariants(a: &InvariantsArgs) -> Result<Report> {
    let gdata = match (&a.fixture, &a.gamma) {
        (Some(f), _) => FixtureDocument::read(f)?.gamma()?,
        (None, Some(gp)) => {
            let text = std::fs::read_to_string(gp).map_err(|e| anyhow!("reading {}: {e}", gp.display()))?;
            let doc: crate::fixture::GammaDoc =
                serde_json::from_str(&text).map_err(|e| anyhow!("malformed gamma data in {}: {e}", gp.display()))?;
            doc.to_data()?
        }
        (None, None) => bail!("give --fixture or --gamma"),
    };
    let mut r = Report::new("invariants");
    let inv = compute_invariants(&gdata)?;
    r.line(format!("degree {}, conductor {}, shift {}", inv.degree, inv.conductor, inv.shift));
    r.field("degree", json!(inv.degree));
    r.field("conductor", json!(inv.conductor));
    r.field("shift", json!(inv.shift));
    if let Some(i) = a.duplicate {
        if i >= gdata.factors.len() {
            bail!("factor {i} out of range ({} factors)", gdata.factors.len());
        }
        let dup = compute_invariants(&gdata.duplicate_factor(i))?;
        let gap = (dup.degree - inv.degree).abs().max((dup.conductor / inv.conductor - 1.0).abs()).max((dup.shift - inv.shift).abs());
        r.line(format!(
            "after duplicating factor {i}: degree {}, conductor {}, shift {} (gap {gap:.2e})",
            dup.degree, dup.conductor, dup.shift
        ));
        if gap > 1e-12 {
            r.fail("invariants changed under duplication");
        }
        r.field("duplicated", json!({ "degree": dup.degree, "conductor": dup.conductor, "shift": dup.shift, "gap": gap }));
    }
    Ok(r)
}

#[derive(Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long = "D")]
    pub d: u64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub a: i64,
    #[command(flatten)]
    pub split: SplitFlags,
}

pub fn decompose(a: &DecomposeArgs) -> Result<Report> {
    let (_, x) = load(&a.fixture)?;
    let mut r = Report::new("decompose");
    let t = build_split_table(&x, a.d, &a.split.options())?;
    let terms = decompose_terms(&t, a.a)?;
    r.line(format!("{} terms for D={}, a={}", terms.len(), a.d, a.a));
    r.line("chi_index  conductor        m  scalar");
    let mut out = Vec::with_capacity(terms.len());
    for term in &terms {
        r.line(format!("{:>9}  {:>9}  {:>7}  {}", term.chi_index, term.conductor(), term.m, format_complex(term.scalar)));
        out.push(json!({
            "chi_conductor": term.conductor(), "chi_index": term.chi_index,
            "m": term.m, "scalar": complex(term.scalar),
        }));
    }
    r.field("terms", Value::Array(out));
    Ok(r)
}

#[derive(Args)]
pub struct PoleArgs {
    /// Degree
    #[arg(long)]
    pub d: String,
    /// Conductor, exact
    #[arg(long)]
    pub q: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// `r`, `sqrt(r)`, `root(r, k)` or `scaled(r)`
    #[arg(long)]
    pub alpha: String,
    /// Series for the residue shape
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Twisting character `modulus:index`
    #[arg(long)]
    pub chi: Option<String>,
}

pub fn pole(a: &PoleArgs) -> Result<Report> {
    let degree = parse_real(&a.d)?;
    let q = parse_rational(&a.q)?;
    let alpha = parse_alpha(&a.alpha)?;
    let chi = a.chi.as_deref().map(parse_character).transpose()?;
    let x = match &a.fixture {
        Some(p) => FixtureDocument::read(p)?.series(),
        None => CoefficientSeries::from_real("unit", &[1.0], 0.0),
    };
    let mut r = Report::new("pole");
    let pred = predict_pole(degree, &q, a.theta, &alpha, chi.as_ref(), &x);
    let pred = match (pred, &a.fixture) {
        (Err(twistcert::Error::OutOfRange { .. }), None) => {
            bail!("n_alpha is integral; give --fixture to evaluate the residue shape")
        }
        (p, _) => p?,
    };
    r.line(format!("s0 = {}", format_complex(pred.s0)));
    r.line(format!("n_alpha = {} for alpha = {}", pred.n_alpha, alpha_text(&alpha)));
    if pred.integral {
        r.line(format!("n_alpha is a positive integer; residue shape {}", format_complex(pred.residue_shape)));
    } else {
        r.line("n_alpha is not a positive integer: holomorphic at s0");
    }
    r.field("s0", complex(pred.s0));
    r.field("n_alpha", json!(pred.n_alpha.to_string()));
    r.field("n_alpha_value", json!(to_f64(&pred.n_alpha)));
    r.field("integral", json!(pred.integral));
    r.field("residue_shape", complex(pred.residue_shape));
    Ok(r)
}

#[derive(Args)]
pub struct PhaseArgs {
    #[arg(long, default_value = "1")]
    pub q_f: String,
    #[arg(long)]
    pub beta: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long)]
    pub lambda: String,
    /// Smallest decade exponent of the ξ grid
    #[arg(long, default_value_t = 3)]
    pub xi_from: i32,
    /// Largest decade exponent of the ξ grid
    #[arg(long, default_value_t = 9)]
    pub xi_to: i32,
}

pub fn phase(a: &PhaseArgs) -> Result<Report> {
    let p = PhaseParams::new(parse_real(&a.q_f)?, parse_real(&a.beta)?, parse_real(&a.alpha)?, parse_real(&a.lambda)?)?;
    if a.xi_from >= a.xi_to {
        bail!("--xi-from must be below --xi-to");
    }
    let grid: Vec<f64> = (a.xi_from..=a.xi_to).map(|k| 10f64.powi(k)).collect();
    let mut r = Report::new("phase");
    r.line(format!("{:>8}  {:>22}  {:>22}  {:>22}  {:>10}", "xi", "x0", "Phi/2pi", "predicted", "residual"));
    let mut rows = Vec::new();
    let mut residuals = Vec::new();
    let mut crit = Worst::new();
    for &xi in &grid {
        let cp = solve_critical_point(xi, &p, 1e-14)?;
        crit.see(cp.residual, || json!({ "xi": xi }));
        let row = phase_row(xi, &p)?;
        r.line(format!(
            "{:>8.0e}  {:>22.15e}  {:>22.15e}  {:>22.15e}  {:>10.3e}",
            row.xi, row.x0, row.phi_over_2pi, row.predicted, row.residual
        ));
        residuals.push(row.residual);
        rows.push(json!({
            "xi": row.xi, "x0": row.x0, "phi_over_2pi": row.phi_over_2pi,
            "predicted": row.predicted, "residual": row.residual, "critical_residual": cp.residual,
        }));
    }
    let monotone = residuals.windows(2).all(|w| w[1] < w[0]) || residuals.iter().all(|&v| v == 0.0);
    r.line(format!("critical-point residual at most {:.2e}", crit.value));
    r.line(format!("residual strictly decreasing: {monotone}"));
    let dual = dual_phase(&p);
    r.line(format!("dual phase: beta* = {}, alpha* = {}", dual.beta_star, dual.alpha_star));
    r.field("rows", Value::Array(rows));
    r.field("dual", json!({ "beta_star": dual.beta_star, "alpha_star": dual.alpha_star, "lambda": dual.lambda }));
    if p.lambda == 0.5 {
        let fit = fit_constant(&grid, &p)?;
        r.line(format!(
            "lambda = 1/2: fitted constant {} (alpha^2/(4 beta) = {}), largest residual after removal {:.3e}",
            fit.constant,
            p.alpha * p.alpha / (4.0 * p.beta),
            fit.residuals.iter().map(|v| v.1.abs()).fold(0.0, f64::max)
        ));
        r.field(
            "constant_fit",
            json!({ "constant": fit.constant, "residuals": fit.residuals.iter().map(|(x, v)| json!([x, v])).collect::<Vec<_>>() }),
        );
    }
    if !(crit.value < 1e-8) {
        r.fail("critical point equation not solved to 1e-8");
    }
    if !monotone {
        r.fail("residual is not strictly decreasing along the grid");
    }
    Ok(r)
}

#[derive(Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long = "D")]
    pub d: u64,
    /// Hypothesis document
    #[arg(long, conflicts_with = "uniform")]
    pub hypothesis: Option<PathBuf>,
    /// The same `degree,shift,conductor` for every character
    #[arg(long, allow_hyphen_values = true)]
    pub uniform: Option<String>,
    /// Shift of the series itself, for --uniform
    #[arg(long = "theta-F", default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta_f: f64,
    #[arg(long, default_value_t = 10_000)]
    pub nu_bound: u64,
    #[command(flatten)]
    pub split: SplitFlags,
}

fn hypothesis(a: &AuditArgs) -> Result<TwistHypothesis> {
    if let Some(path) = &a.hypothesis {
        let h = HypothesisDoc::read(path)?.to_hypothesis()?;
        if h.modulus != a.d {
            bail!("hypothesis is for D = {}, but --D is {}", h.modulus, a.d);
        }
        return Ok(h);
    }
    let text = a.uniform.as_deref().ok_or_else(|| anyhow!("give --hypothesis or --uniform"))?;
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        bail!("--uniform expects degree,shift,conductor");
    }
    Ok(TwistHypothesis::uniform(a.d, parse_real(parts[0])?, parse_real(parts[1])?, parse_rational(parts[2])?, a.theta_f)?)
}

pub fn audit(a: &AuditArgs) -> Result<Report> {
    let (_, x) = load(&a.fixture)?;
    let h = hypothesis(a)?;
    let t = build_split_table(&x, a.d, &a.split.options())?;
    let rep = find_contradiction(&x, &t, &h, a.nu_bound)?;
    let s = &rep.sets;
    let mut r = Report::new("audit");
    r.line(format!("branch {:?}: d0 = {}, lambda0 = {}, theta0 = {}", s.branch, s.d0, s.lambda0, s.theta0));
    r.line(format!("A0 = {:?}, B0 = {:?}, C0 = {:?}", s.a0, s.b0, s.c0));
    r.line(format!("q0 = {}, M = {}", s.q0, s.m));
    for (i, l) in &rep.ell {
        r.line(format!("ell(chi#{i}) = {}", format_complex(*l)));
    }
    match &rep.witness {
        Some(w) => r.line(format!(
            "witness nu = {}: a(nu) = {}, sum = {}, residue sum = {}",
            w.nu,
            format_complex(w.a_nu),
            format_complex(w.sum),
            format_complex(w.residue_sum)
        )),
        None => r.line("no witness"),
    }
    r.line(format!("{} residue terms classified", rep.terms_classified));
    for n in &rep.notes {
        r.line(format!("note: {n}"));
    }
    r.line(format!("verdict {}", rep.verdict.as_str()));
    if rep.verdict == twistcert::audit::Verdict::NoWitnessUpToBound {
        r.fail(format!("no witness up to nu = {}", a.nu_bound.min(x.len() as u64)));
    }
    let members: Vec<Value> = s
        .members
        .iter()
        .map(|m| {
            json!({
                "chi_index": m.chi_index, "chi_conductor": m.primitive.modulus(),
                "q": m.conductor.to_string(), "cofactor_star": m.cofactor_star,
                "ratio": m.ratio.to_string(), "in_C0": m.in_c0,
            })
        })
        .collect();
    r.field(
        "sets",
        json!({
            "branch": format!("{:?}", s.branch), "d0": s.d0, "lambda0": s.lambda0, "theta0": s.theta0,
            "A0": s.a0, "B0": s.b0, "C0": s.c0, "q0": s.q0.to_string(), "M": s.m,
            "s0": complex(s.s0), "members": members,
        }),
    );
    r.field(
        "ell",
        Value::Array(rep.ell.iter().map(|(i, l)| json!({ "chi_index": i, "value": complex(*l) })).collect()),
    );
    r.field(
        "witness",
        rep.witness.as_ref().map_or(Value::Null, |w| {
            json!({ "nu": w.nu, "a_nu": complex(w.a_nu), "sum": complex(w.sum), "residue_sum": complex(w.residue_sum) })
        }),
    );
    r.field("verdict", json!(rep.verdict.as_str()));
    r.field("terms_classified", json!(rep.terms_classified));
    r.field("notes", json!(rep.notes));
    Ok(r)
}

#[derive(Args)]
pub struct SaturationArgs {
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long = "D", value_delimiter = ',')]
    pub d: Vec<u64>,
    /// Check every modulus up to this bound
    #[arg(long = "D-max")]
    pub d_max: Option<u64>,
    #[arg(long = "M", value_delimiter = ',', default_value = "1,2,3,5,7,210")]
    pub m: Vec<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub bound: u64,
    /// Also compute the independence rank over n <= cutoff
    #[arg(long)]
    pub rank_cutoff: Option<usize>,
}

pub fn saturation(a: &SaturationArgs) -> Result<Report> {
    let (_, x) = load(&a.fixture)?;
    let mut moduli = a.d.clone();
    if let Some(top) = a.d_max {
        moduli.extend(1..=top);
    }
    moduli.sort_unstable();
    moduli.dedup();
    if moduli.is_empty() || moduli.contains(&0) {
        bail!("give positive --D or --D-max");
    }
    let mut r = Report::new("saturation");
    let mut out = Vec::new();
    for &d in &moduli {
        let rep = saturation_check(&x, d, &a.m, a.bound);
        let flagged: Vec<Value> = rep.flagged().map(|e| json!({ "M": e.m, "a": e.residue })).collect();
        let mut entry = json!({
            "D": d, "saturated": rep.saturated(), "largest_witness": rep.largest_witness(),
            "flagged": flagged.clone(),
        });
        let mut line = format!(
            "D={d}: {} (largest witness {:?})",
            if rep.saturated() { "saturated up to bound" } else { "counterexample candidate" },
            rep.largest_witness()
        );
        if let Some(cut) = a.rank_cutoff {
            let rank = independence_rank(&x, d, 1, cut);
            let full = euler_phi(d) as usize;
            line.push_str(&format!(", rank {rank}/{full}"));
            entry["rank"] = json!(rank);
            entry["phi"] = json!(full);
        }
        r.line(line);
        if !rep.saturated() {
            r.fail(format!("D={d}: no witness for {:?}", flagged));
        }
        out.push(entry);
    }
    r.field("moduli", Value::Array(out));
    Ok(r)
}

#[derive(Args)]
pub struct GenFixtureArgs {
    /// zeta-squared, delta, zeta-l4 or zeta-l (with --chi)
    #[arg(long)]
    pub family: String,
    #[arg(long = "N", default_value_t = 100_000)]
    pub n: usize,
    /// Primitive character `modulus:index` for zeta-l
    #[arg(long)]
    pub chi: Option<String>,
}

pub fn gen_fixture(a: &GenFixtureArgs) -> Result<String> {
    if a.n == 0 {
        bail!("--N must be positive");
    }
    let family = match a.family.as_str() {
        "zeta-squared" => Family::ZetaSquared,
        "delta" => Family::DeltaNormalized,
        "zeta-l4" => Family::zeta_times_l4(),
        "zeta-l" => {
            let chi = parse_character(a.chi.as_deref().ok_or_else(|| anyhow!("zeta-l needs --chi"))?)?;
            if !chi.is_primitive() || chi.is_principal() {
                bail!("--chi must be a nontrivial primitive character");
            }
            Family::ZetaTimesL(chi)
        }
        other => bail!("unknown family '{other}'"),
    };
    let x = family.series(a.n);
    Ok(FixtureDocument::from_series(&x, Some(&family.gamma())).to_canonical())
}

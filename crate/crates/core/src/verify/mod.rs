//! Statistical and numerical checks of the series: ECF estimation, the
//! stability identity, homogeneity of the Laplace exponent and of the Lévy
//! measure, and comparison with an independent stable sampler.
//!
//! Two-sample comparisons use the largest studentized ECF difference over a
//! probe set; thresholds come from a permutation null (or a centered
//! bootstrap for the paired homogeneity statistic).

mod oracle;
mod report;

use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

pub use oracle::{cms_oracle, stable_constant};
pub use report::{Calibration, Detail, VerificationReport};

use crate::cone::{Carrier, Character, ConeDescriptor, ConeElement, ScalingKind};
use crate::cones::{make_cone, ConeSpec};
use crate::lepage::{eps_condition_check, time_reparametrized_bound, truncation_bias_bound, IntegralBudget, Series};
use crate::polar::{decompose, RadialLaw, Transversal};
use crate::rng::{side_stream, stream_rng};
use crate::spectral::{SpectralSampler, SymmetricSign};
use crate::stats::{poisson_ci, quantile};
use crate::{Error, Result};

/// Stream sides reserved for resampling, away from the simulation sides.
const RESAMPLE_SIDE: u64 = 1000;

/// Simulation and calibration sizes shared by the tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestBudget {
    pub n: usize,
    pub r: f64,
    pub seed: u64,
    pub resamples: usize,
    pub level: f64,
}

impl TestBudget {
    pub fn new(n: usize, r: f64, seed: u64) -> Self {
        TestBudget { n, r, seed, resamples: 200, level: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcfEstimate {
    pub mean: Complex64,
    pub se_re: f64,
    pub se_im: f64,
}

impl EcfEstimate {
    /// Standard error of the complex mean, `sqrt(se_re² + se_im²)`.
    pub fn se(&self) -> f64 {
        self.se_re.hypot(self.se_im)
    }
}

/// Per-probe sample mean of `χ(x)` with componentwise standard errors.
pub fn ecf_estimate(samples: &[ConeElement], probes: &[Character]) -> Result<Vec<EcfEstimate>> {
    if samples.is_empty() {
        return Err(Error::domain("ECF of an empty sample"));
    }
    probes
        .iter()
        .map(|chi| {
            let z = samples.iter().map(|x| chi.eval(x)).collect::<Result<Vec<_>>>()?;
            Ok(summarize(&z))
        })
        .collect()
}

fn summarize(z: &[Complex64]) -> EcfEstimate {
    let n = z.len() as f64;
    let mean = z.iter().sum::<Complex64>() / n;
    if z.len() < 2 {
        return EcfEstimate { mean, se_re: 0.0, se_im: 0.0 };
    }
    let (vr, vi) = z.iter().fold((0.0, 0.0), |(a, b), v| (a + (v.re - mean.re).powi(2), b + (v.im - mean.im).powi(2)));
    EcfEstimate { mean, se_re: (vr / (n - 1.0) / n).sqrt(), se_im: (vi / (n - 1.0) / n).sqrt() }
}

/// Probe-major character values `χ_p(c x_i)`.
fn char_values(
    samples: &[ConeElement],
    probes: &[Character],
    scaled: Option<(&ConeDescriptor, f64)>,
) -> Result<Vec<Vec<Complex64>>> {
    let scaled_samples;
    let xs = match scaled {
        Some((cone, c)) if c != 1.0 => {
            scaled_samples = samples.par_iter().map(|x| cone.scale(c, x)).collect::<Result<Vec<_>>>()?;
            &scaled_samples
        }
        _ => samples,
    };
    probes
        .iter()
        .map(|chi| xs.par_iter().map(|x| chi.eval(x)).collect::<Result<Vec<_>>>())
        .collect()
}

/// Bound on `|E χ(cξ^{(r)}) − E χ(cξ)|` for one probe, when the spectral
/// law declares enough moments; `None` otherwise.
///
/// Vector sums with multiplicative scaling use the tail `T = Σ_{Γ_i>r}`:
/// `1 − E cos⟨u,cT⟩ ≤ c²|u|² E‖ε‖² α/(2(2−α)) r^{−(2−α)/α}` for symmetric
/// marks and `E|⟨u,cT⟩| ≤ c|u| E‖ε‖ α/(1−α) r^{−(1−α)/α}` for α < 1. Other
/// cones use the a priori truncation bound: the probability that the tail
/// changes the maximum, the observable tail on a time grid, or the mass
/// of the discarded measure weighted by the probe's weight function.
pub fn ecf_allowance(
    cone: &ConeDescriptor,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    chi: &Character,
    c: f64,
    r: f64,
) -> Result<Option<f64>> {
    let alpha = law.alpha();
    let m = spectral.moments();
    let bias = truncation_bias_bound(cone, law, spectral, r)?;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let out = match (&cone.carrier, &cone.scaling, chi) {
        (Carrier::Euclidean { .. }, ScalingKind::Multiplicative, Character::Fourier { u }) => {
            let u = c * norm(u);
            let mut best: Option<f64> = None;
            if let (true, Some(m2), true) = (spectral.is_symmetric(), m.second_moment, alpha < 2.0) {
                best = Some(u * u * m2 / 2.0 * alpha / (2.0 - alpha) * r.powf(-(2.0 - alpha) / alpha));
            }
            if let (Some(m1), true) = (m.mean_norm, alpha < 1.0) {
                let b = u * m1 * alpha / (1.0 - alpha) * r.powf(-(1.0 - alpha) / alpha);
                best = Some(best.map_or(b, |a| a.min(b)));
            }
            best
        }
        (Carrier::Euclidean { .. }, ScalingKind::Multiplicative, Character::Exponential { lambda }) => {
            bias.value.map(|b| c * norm(lambda) * b)
        }
        // c ξ^{(r)} observes ξ^{(r)} on the grid stretched by c
        (Carrier::Steps(_), ScalingKind::TimeReparametrization, _) => {
            time_reparametrized_bound(cone, spectral, alpha, r, c).value
        }
        (Carrier::Grid(_), _, _) => bias.value,
        (Carrier::Measure { .. }, _, Character::Laplace { weight }) => {
            let sup: f64 = weight.iter().map(|w| w.height).sum();
            bias.value.map(|b| c * sup * b)
        }
        _ => None,
    };
    Ok(out.map(|v| v.min(2.0)))
}

fn allowance_or_zero(
    cone: &ConeDescriptor,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    chi: &Character,
    c: f64,
    r: f64,
    notes: &mut Vec<String>,
) -> Result<f64> {
    Ok(match ecf_allowance(cone, law, spectral, chi, c, r)? {
        Some(v) => v,
        None => {
            notes.push(format!("no truncation allowance available for {}", chi.label()));
            0.0
        }
    })
}

struct Side<'a> {
    values: &'a [Vec<Complex64>],
}

impl Side<'_> {
    fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Studentized difference `|Δ| / SE` from sums and sums of `|z|²`.
fn studentized(sum_a: Complex64, sq_a: f64, na: f64, sum_b: Complex64, sq_b: f64, nb: f64, allowance: f64) -> f64 {
    let (ma, mb) = (sum_a / na, sum_b / nb);
    let var_a = ((sq_a - na * ma.norm_sqr()) / (na - 1.0)).max(0.0);
    let var_b = ((sq_b - nb * mb.norm_sqr()) / (nb - 1.0)).max(0.0);
    let se = (var_a / na + var_b / nb).sqrt();
    let excess = ((ma - mb).norm() - allowance).max(0.0);
    if excess == 0.0 {
        0.0
    } else if se > 0.0 {
        excess / se
    } else {
        f64::INFINITY
    }
}

struct TwoSample {
    per_probe: Vec<f64>,
    statistic: f64,
    threshold: f64,
}

fn two_sample(a: Side<'_>, b: Side<'_>, allowance: &[f64], resamples: usize, level: f64, seed: u64) -> Result<TwoSample> {
    let (na, nb) = (a.len(), b.len());
    if na < 2 || nb < 2 {
        return Err(Error::domain("two-sample test needs at least two samples per side"));
    }
    let sums = |v: &[Complex64]| (v.iter().sum::<Complex64>(), v.iter().map(|z| z.norm_sqr()).sum::<f64>());
    let per_probe: Vec<f64> = a
        .values
        .iter()
        .zip(b.values)
        .zip(allowance)
        .map(|((va, vb), allow)| {
            let ((sa, qa), (sb, qb)) = (sums(va), sums(vb));
            studentized(sa, qa, na as f64, sb, qb, nb as f64, *allow)
        })
        .collect();
    let statistic = per_probe.iter().copied().fold(0.0, f64::max);

    let pooled: Vec<Vec<Complex64>> = a.values.iter().zip(b.values).map(|(va, vb)| [va.as_slice(), vb].concat()).collect();
    let totals: Vec<(Complex64, f64)> = pooled.iter().map(|v| sums(v)).collect();
    let null: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, side_stream(RESAMPLE_SIDE, rep));
            let mut idx: Vec<u32> = (0..(na + nb) as u32).collect();
            idx.partial_shuffle(&mut rng, na);
            let chosen = &idx[..na];
            pooled
                .iter()
                .zip(&totals)
                .map(|(v, (st, qt))| {
                    let (mut s, mut q) = (Complex64::new(0.0, 0.0), 0.0);
                    for &i in chosen {
                        let z = v[i as usize];
                        s += z;
                        q += z.norm_sqr();
                    }
                    studentized(s, q, na as f64, st - s, qt - q, nb as f64, 0.0)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let threshold = quantile(&null, 1.0 - level);
    Ok(TwoSample { per_probe, statistic, threshold })
}

/// Two-sample ECF test between `left` and `right` over `probes`, after
/// subtracting a per-probe allowance from each ECF difference.
#[allow(clippy::too_many_arguments)]
pub fn two_sample_ecf_test(
    name: &str,
    left: &[ConeElement],
    right: &[ConeElement],
    probes: &[Character],
    allowance: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<VerificationReport> {
    if allowance.len() != probes.len() {
        return Err(Error::domain("one allowance per probe is required"));
    }
    let (va, vb) = (char_values(left, probes, None)?, char_values(right, probes, None)?);
    let out = two_sample(Side { values: &va }, Side { values: &vb }, allowance, resamples, level, seed)?;
    let mut report = VerificationReport::new(name, Calibration::Permutation { resamples, level });
    report.statistic = out.statistic;
    report.threshold = out.threshold;
    report.passed = out.statistic <= out.threshold;
    report.sample_sizes = vec![left.len(), right.len()];
    report.seeds = vec![seed];
    report.bias_allowance = Some(allowance.iter().copied().fold(0.0, f64::max));
    report.details = probes
        .iter()
        .zip(&out.per_probe)
        .map(|(chi, s)| Detail { label: chi.label(), statistic: *s, note: String::new() })
        .collect();
    Ok(report)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `a^{1/α} ξ' ⊕ b^{1/α} ξ'' =d (a+b)^{1/α} ξ`, with both sides simulated
/// from independent streams. `mutate` replaces the exponent `1/α` by 1.
#[allow(clippy::too_many_arguments)]
pub fn stability_test(
    cone: &ConeDescriptor,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    a: f64,
    b: f64,
    probes: &[Character],
    budget: &TestBudget,
    mutate: bool,
) -> Result<VerificationReport> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    let series = Series::new(cone, *law, spectral, budget.r)?;
    let e = if mutate { 1.0 } else { 1.0 / law.alpha() };
    let (ca, cb, cab) = (a.powf(e), b.powf(e), (a + b).powf(e));
    let draw = |side: u64| -> Result<Vec<ConeElement>> {
        Ok(series.sample_values(budget.seed, side, budget.n)?.into_iter().map(|v| v.value).collect())
    };
    let (x1, x2, x3) = (draw(0)?, draw(1)?, draw(2)?);
    let left = x1
        .par_iter()
        .zip(&x2)
        .map(|(p, q)| cone.add(&cone.scale(ca, p)?, &cone.scale(cb, q)?))
        .collect::<Result<Vec<_>>>()?;
    let right = x3.par_iter().map(|x| cone.scale(cab, x)).collect::<Result<Vec<_>>>()?;

    let mut notes = Vec::new();
    let allowance = probes
        .iter()
        .map(|chi| {
            Ok(allowance_or_zero(cone, law, spectral, chi, ca, budget.r, &mut notes)?
                + allowance_or_zero(cone, law, spectral, chi, cb, budget.r, &mut notes)?
                + allowance_or_zero(cone, law, spectral, chi, cab, budget.r, &mut notes)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut report =
        two_sample_ecf_test("stability", &left, &right, probes, &allowance, budget.resamples, budget.level, budget.seed)?;
    report.truncation_r = Some(budget.r);
    notes.dedup();
    report.notes = notes;
    report.notes.push(format!("alpha={} a={a} b={b}", law.alpha()));
    if mutate {
        report.notes.push("mutation: scaling exponent 1 instead of 1/alpha".into());
    }
    Ok(report)
}

/// Smallest `Re χ(2^{-k} x)`, `k = 1..=20`, over the first samples: a
/// numerical look at `liminf_{t↓0} Re χ(tx) > 0`.
fn small_scale_real_part(cone: &ConeDescriptor, chi: &Character, samples: &[ConeElement]) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for x in samples.iter().take(100) {
        for k in 1..=20 {
            worst = worst.min(chi.eval(&cone.scale(0.5f64.powi(k), x)?)?.re);
        }
    }
    Ok(worst)
}

/// `φ(aχ) = a^α φ(χ)` with `φ = −log E χ(ξ)` and `(aχ)(x) = χ(ax)`.
///
/// Both estimates come from the same samples; the standard error of
/// `φ̂(aχ) − a^α φ̂(χ)` is the delta-method one and the threshold is the
/// `1 − level` quantile of a centered bootstrap of the maximum over probes.
/// Probes whose ECF is within 5 standard errors of 0 are excluded. `mutate`
/// simulates with the wrong index `1.5 α`.
pub fn phi_homogeneity_test(
    cone: &ConeDescriptor,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    a: f64,
    probes: &[Character],
    budget: &TestBudget,
    mutate: bool,
) -> Result<VerificationReport> {
    check_positive("a", a)?;
    let alpha = law.alpha();
    let sim_law = if mutate { RadialLaw::new(1.5 * alpha)? } else { *law };
    let series = Series::new(cone, sim_law, spectral, budget.r)?;
    let xs: Vec<ConeElement> =
        series.sample_values(budget.seed, 0, budget.n)?.into_iter().map(|v| v.value).collect();
    let z1 = char_values(&xs, probes, None)?;
    let z2 = char_values(&xs, probes, Some((cone, a)))?;
    let w = a.powf(alpha);
    let n = xs.len() as f64;

    let mut report = VerificationReport::new("phi-homogeneity", Calibration::Bootstrap {
        resamples: budget.resamples,
        level: budget.level,
    });
    let mut notes = Vec::new();
    struct Used {
        p: usize,
        d: Complex64,
        se: f64,
    }
    let mut used = Vec::new();
    let mut max_allow = 0.0f64;
    for (p, chi) in probes.iter().enumerate() {
        let (e1, e2) = (summarize(&z1[p]), summarize(&z2[p]));
        let mut detail = Detail { label: chi.label(), statistic: 0.0, note: String::new() };
        if e1.mean.norm() < 5.0 * e1.se() || e2.mean.norm() < 5.0 * e2.se() {
            detail.statistic = f64::NAN;
            detail.note = "excluded: ECF within 5 SE of 0".into();
            report.details.push(detail);
            continue;
        }
        let liminf = small_scale_real_part(cone, chi, &xs)?;
        if !(liminf > 0.0) {
            detail.note = format!("Re chi(tx) at small t reaches {liminf}");
        }
        let d = -e2.mean.ln() + w * e1.mean.ln();
        let psi2: f64 = z1[p]
            .iter()
            .zip(&z2[p])
            .map(|(u, v)| (-(v - e2.mean) / e2.mean + w * (u - e1.mean) / e1.mean).norm_sqr())
            .sum();
        let se = (psi2 / (n - 1.0) / n).sqrt();
        let da = allowance_or_zero(cone, law, spectral, chi, a, budget.r, &mut notes)?;
        let d1 = allowance_or_zero(cone, law, spectral, chi, 1.0, budget.r, &mut notes)?;
        let allow = if da < e2.mean.norm() && d1 < e1.mean.norm() {
            da / (e2.mean.norm() - da) + w * d1 / (e1.mean.norm() - d1)
        } else {
            f64::INFINITY
        };
        max_allow = max_allow.max(allow);
        let excess = (d.norm() - allow).max(0.0);
        detail.statistic = if excess == 0.0 { 0.0 } else if se > 0.0 { excess / se } else { f64::INFINITY };
        report.details.push(detail);
        used.push(Used { p, d, se });
    }

    let null: Vec<f64> = (0..budget.resamples as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(budget.seed, side_stream(RESAMPLE_SIDE + 1, rep));
            let idx: Vec<usize> = (0..xs.len()).map(|_| rng.random_range(0..xs.len())).collect();
            used.iter()
                .map(|u| {
                    let (mut s1, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                    for &i in &idx {
                        s1 += z1[u.p][i];
                        s2 += z2[u.p][i];
                    }
                    let d = -(s2 / n).ln() + w * (s1 / n).ln();
                    let dev = (d - u.d).norm();
                    if u.se > 0.0 { dev / u.se } else if dev == 0.0 { 0.0 } else { f64::INFINITY }
                })
                .fold(0.0, f64::max)
        })
        .collect();

    report.statistic = report.details.iter().map(|d| d.statistic).filter(|s| !s.is_nan()).fold(0.0, f64::max);
    report.threshold = quantile(&null, 1.0 - budget.level);
    report.passed = !used.is_empty() && report.statistic <= report.threshold;
    if used.is_empty() {
        notes.push("no usable probes".into());
    }
    report.sample_sizes = vec![xs.len()];
    report.seeds = vec![budget.seed];
    report.truncation_r = Some(budget.r);
    report.bias_allowance = Some(max_allow);
    notes.dedup();
    report.notes = notes;
    report.notes.push(format!("alpha={alpha} a={a}"));
    if mutate {
        report.notes.push(format!("mutation: simulated with alpha={}", sim_law.alpha()));
    }
    Ok(report)
}

/// LePage series on the line with marks `±1`, rescaled by `C_α^{-1/α}`,
/// against the Chambers–Mallows–Stuck sampler. `mutate` skips the rescale.
pub fn lepage_vs_cms_test(alpha: f64, budget: &TestBudget, mutate: bool) -> Result<VerificationReport> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("the stable oracle comparison needs alpha in (0, 2), got {alpha}")));
    }
    let law = RadialLaw::new(alpha)?;
    let cone = make_cone(&ConeSpec::euclidean(1))?;
    let spectral = SymmetricSign(ConeElement::Euclidean(vec![1.0]));
    let series = Series::new(&cone.descriptor, law, &spectral, budget.r)?;
    let c_alpha = stable_constant(alpha)?;
    let scale = if mutate { 1.0 } else { c_alpha.powf(-1.0 / alpha) };
    let left: Vec<ConeElement> = series
        .sample_values(budget.seed, 0, budget.n)?
        .into_iter()
        .map(|v| cone.descriptor.scale(scale, &v.value))
        .collect::<Result<_>>()?;
    let right: Vec<ConeElement> = cms_oracle(alpha, budget.n, budget.seed, side_stream(1, 0))?
        .into_iter()
        .map(|x| ConeElement::Euclidean(vec![x]))
        .collect();
    let mut notes = Vec::new();
    let allowance = cone
        .probes
        .iter()
        .map(|chi| allowance_or_zero(&cone.descriptor, &law, &spectral, chi, scale, budget.r, &mut notes))
        .collect::<Result<Vec<f64>>>()?;
    let mut report = two_sample_ecf_test(
        "lepage-vs-cms",
        &left,
        &right,
        &cone.probes,
        &allowance,
        budget.resamples,
        budget.level,
        budget.seed,
    )?;
    report.truncation_r = Some(budget.r);
    report.notes = notes;
    report.notes.push(format!("alpha={alpha} C_alpha={c_alpha}"));
    if mutate {
        report.notes.push("mutation: rescaling by C_alpha^(-1/alpha) skipped".into());
    }
    Ok(report)
}

/// A set `B = {x : τ(x) ∈ [lo, hi), angular part in A}`; then
/// Membership test on the angular part.
pub type AngularSet = Arc<dyn Fn(&ConeElement) -> bool + Send + Sync>;

/// `sB = {x : τ(x) ∈ [s lo, s hi), angular part in A}`.
#[derive(Clone)]
pub struct TestSet {
    pub label: String,
    pub radial: (f64, f64),
    pub angular: Option<AngularSet>,
}

impl TestSet {
    pub fn shell(lo: f64, hi: f64) -> Self {
        TestSet { label: format!("[{lo}, {hi})"), radial: (lo, hi), angular: None }
    }

    fn contains(&self, radial: f64, angular: &ConeElement, s: f64) -> bool {
        radial >= s * self.radial.0 && radial < s * self.radial.1 && self.angular.as_ref().is_none_or(|f| f(angular))
    }
}

/// Compares point counts of the truncated point process `{Γ_i^{-1/α} ε_i}`
/// in `sB` and `B` over `runs` realizations: `ν(sB) = s^{-α} ν(B)`. Passes
/// when every pair of exact Poisson intervals (99%) overlaps.
#[allow(clippy::too_many_arguments)]
pub fn empirical_homogeneity_test(
    cone: &ConeDescriptor,
    transversal: &Transversal,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    sets: &[TestSet],
    scalings: &[f64],
    runs: usize,
    r: f64,
    seed: u64,
) -> Result<VerificationReport> {
    for s in scalings {
        check_positive("scaling", *s)?;
    }
    let confidence = 0.99;
    let series = Series::ungated(cone, *law, spectral, r)?;
    let alpha = law.alpha();
    // points with Γ ≤ r have τ ≥ r^{-1/α} τ(ε); beyond that radius counts are complete
    let visible = match (transversal, spectral.moments().norm_range) {
        (Transversal::Norm, Some((_, hi))) => Some(r.powf(-1.0 / alpha) * hi),
        _ => None,
    };
    let mut factors = vec![1.0];
    factors.extend_from_slice(scalings);
    let counts: Vec<Vec<u64>> = (0..runs as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<u64>> {
            let pts = series.sample_points(seed, side_stream(0, i))?;
            let mut c = vec![0u64; sets.len() * factors.len()];
            for x in &pts.points {
                let p = decompose(transversal, cone, x)?;
                for (k, set) in sets.iter().enumerate() {
                    for (f, s) in factors.iter().enumerate() {
                        if set.contains(p.radial, &p.angular, *s) {
                            c[k * factors.len() + f] += 1;
                        }
                    }
                }
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let total = |j: usize| counts.iter().map(|c| c[j]).sum::<u64>();

    let mut report = VerificationReport::new("levy-homogeneity", Calibration::Interval { confidence });
    let mut failures = 0usize;
    let mut tested = 0usize;
    for (k, set) in sets.iter().enumerate() {
        let base = total(k * factors.len());
        for (f, s) in scalings.iter().enumerate() {
            let scaled = total(k * factors.len() + f + 1);
            let label = format!("{} s={s}", set.label);
            let lowest = set.radial.0 * s.min(1.0);
            if visible.is_none_or(|v| lowest < v) {
                let note = match visible {
                    Some(v) => format!("skipped: radii below the truncation cutoff {v}"),
                    None => "skipped: truncation cutoff unknown for this transversal".into(),
                };
                report.details.push(Detail { label, statistic: f64::NAN, note });
                continue;
            }
            if base == 0 && scaled == 0 {
                report.details.push(Detail { label, statistic: f64::NAN, note: "skipped: no points".into() });
                continue;
            }
            let factor = s.powf(-alpha);
            let (lo_b, hi_b) = poisson_ci(base, confidence)?;
            let (lo_s, hi_s) = poisson_ci(scaled, confidence)?;
            let overlap = factor * lo_b <= hi_s && lo_s <= factor * hi_b;
            tested += 1;
            failures += usize::from(!overlap);
            let ratio = scaled as f64 / (factor * base as f64);
            let note = if overlap { String::new() } else { format!("intervals disjoint: counts {scaled} vs {base}") };
            report.details.push(Detail { label, statistic: ratio, note });
        }
    }
    report.statistic = failures as f64;
    report.threshold = 0.0;
    report.passed = tested > 0 && failures == 0;
    report.sample_sizes = vec![runs];
    report.seeds = vec![seed];
    report.truncation_r = Some(r);
    report.notes.push(format!("alpha={alpha} pairs_tested={tested}"));
    Ok(report)
}

/// `∫_0^∞ E[1 − Re χ(tε)] t^{-(α+1)} dt < ∞` for every probe.
pub fn eps_condition_test(
    cone: &ConeDescriptor,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    probes: &[Character],
    budget: &IntegralBudget,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("eps-condition", Calibration::Analytic);
    let mut divergent = 0;
    for chi in probes {
        let c = eps_condition_check(cone, law, spectral, chi, budget)?;
        let note = match (c.diverges_at_zero, c.diverges_at_infinity) {
            (false, false) => String::new(),
            (true, false) => format!("diverges at 0 (fitted exponent {:.3})", c.lower_exponent),
            (false, true) => "diverges at infinity".into(),
            (true, true) => "diverges at both ends".into(),
        };
        divergent += usize::from(!c.is_finite());
        report.details.push(Detail { label: chi.label(), statistic: c.value.value, note });
    }
    report.statistic = divergent as f64;
    report.passed = divergent == 0;
    report.sample_sizes = vec![budget.draws];
    report.seeds = vec![budget.seed];
    report.notes.push(format!("alpha={}", law.alpha()));
    Ok(report)
}

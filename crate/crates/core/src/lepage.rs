//! Truncated LePage series `ξ^{(r)} = ⊕_{Γ_i ≤ r} Γ_i^{-1/α} ε_i`.
//!
//! `Γ_i` are the arrival times of a unit-rate Poisson process and `ε_i`
//! i.i.d. draws from the spectral law. Terms are aggregated in increasing
//! `Γ` order. Sum-type cones only accept configurations for which the
//! uncompensated series converges (see [`AlphaAdmissibility`]).
//!
//! [`AlphaAdmissibility`]: crate::cone::AlphaAdmissibility

use num_complex::Complex64;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::cone::{Character, ConeDescriptor, ConeElement, ScalingKind, SemigroupOp};
use crate::polar::{RadialLaw, Transversal};
use crate::quad::{radial_integral, RadialIntegral, RadialOptions};
use crate::rng::{side_stream, stream_rng, StreamRng};
use crate::spectral::SpectralSampler;
use crate::stats::mean_se;
use crate::{Error, Result};

/// Guard against samplers that only produce the neutral element.
const MAX_NEUTRAL_REJECTIONS: usize = 1_000_000;

/// Decay exponent below which a bias bound is flagged as slow.
const SLOW_DECAY_EXPONENT: f64 = 0.1;

/// Arrival times of a unit-rate Poisson process on `[0, r]`.
pub fn gamma_sequence(rng: &mut StreamRng, r: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut g = 0.0;
    loop {
        g += Distribution::<f64>::sample(&Exp1, rng);
        if g > r {
            return out;
        }
        out.push(g);
    }
}

/// Bound on the effect of the discarded tail `Γ_i > r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasBound {
    /// `None` when no bound is available for the configuration.
    pub value: Option<f64>,
    /// The bound decays like `r^{-q}` with `q < 0.1`.
    pub slow_decay: bool,
}

impl BiasBound {
    pub const NOT_AVAILABLE: BiasBound = BiasBound { value: None, slow_decay: false };

    fn exact(value: f64) -> Self {
        BiasBound { value: Some(value), slow_decay: false }
    }
}

/// A priori bound on the truncation error.
///
/// Sum cones with multiplicative or weight scaling, `α < 1` and a declared
/// `E‖ε‖` bound the expected norm of the tail by
/// `E‖ε‖ · α/(1−α) · r^{-(1−α)/α}`. Max cones whose marks take values in
/// `[m, M]` with `m > 0` bound the probability that the tail changes the
/// maximum by `P{Γ_1 > r (m/M)^α} = exp{−θ_α([M r^{-1/α}/m, ∞))}`.
pub fn truncation_bias_bound(cone: &ConeDescriptor, law: &RadialLaw, spectral: &dyn SpectralSampler, r: f64) -> Result<BiasBound> {
    check_r(r)?;
    let alpha = law.alpha();
    let moments = spectral.moments();
    let multiplicative = matches!(cone.scaling, ScalingKind::Multiplicative | ScalingKind::WeightScaling);
    if cone.scaling == ScalingKind::TimeReparametrization {
        return Ok(time_reparametrized_bound(cone, spectral, alpha, r, 1.0));
    }
    match cone.op {
        SemigroupOp::VectorSum | SemigroupOp::MeasureSum => {
            let (Some(mean_norm), true, true) = (moments.mean_norm, multiplicative, alpha < 1.0) else {
                return Ok(BiasBound::NOT_AVAILABLE);
            };
            let q = (1.0 - alpha) / alpha;
            Ok(BiasBound { value: Some(mean_norm * alpha / (1.0 - alpha) * r.powf(-q)), slow_decay: q < SLOW_DECAY_EXPONENT })
        }
        SemigroupOp::PointwiseMax => match moments.value_range {
            Some((m, big_m)) if m > 0.0 && multiplicative => {
                let b = big_m * r.powf(-1.0 / alpha) / m;
                Ok(BiasBound::exact((-law.tail(b)?).exp()))
            }
            _ => Ok(BiasBound::NOT_AVAILABLE),
        },
    }
}

/// Marks vanishing on `[0, b)` give terms `ε(Γ^{-1/α} s)` that vanish on the
/// observation grid once `Γ > (s_n/b)^α`, so nothing observable is
/// discarded for `r ≥ (s_n/b)^α`.
/// Exact zero when every term that can reach the observation window
/// `[0, c s_last]` is kept, for marks vanishing on `[0, b)`: a term
/// `ε(Γ^{-1/α} ·)` first moves at `Γ^{1/α} b`.
pub(crate) fn time_reparametrized_bound(
    cone: &ConeDescriptor,
    spectral: &dyn SpectralSampler,
    alpha: f64,
    r: f64,
    c: f64,
) -> BiasBound {
    let (Some(grid), Some(b)) = (cone.grid(), spectral.moments().vanishes_below) else {
        return BiasBound::NOT_AVAILABLE;
    };
    let last = grid.points()[grid.len() - 1];
    if b > 0.0 && r >= (c * last / b).powf(alpha) {
        BiasBound::exact(0.0)
    } else {
        BiasBound::NOT_AVAILABLE
    }
}

/// Bound for a realized max-cone sample: with marks bounded by `M`, the
/// tail stays below `r^{-1/α} M`, so it can only change the maximum where
/// the truncated value `v` is smaller; the expected number of tail points
/// above `v_min` is `θ_α([v_min/M, r^{-1/α}))`.
fn conditional_max_bound(value: &ConeElement, law: &RadialLaw, upper: f64, r: f64) -> BiasBound {
    let Some(values) = value.coords() else {
        return BiasBound::NOT_AVAILABLE;
    };
    let v_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let visible = r.powf(-1.0 / law.alpha()) * upper;
    if v_min >= visible {
        return BiasBound::exact(0.0);
    }
    if v_min <= 0.0 {
        return BiasBound::exact(1.0);
    }
    let expected = (v_min / upper).powf(-law.alpha()) - r;
    BiasBound::exact(expected.clamp(0.0, 1.0))
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && !r.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(format!("truncation level must be positive, got {r}")))
    }
}

/// One realization of a truncated series, with its points.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSample {
    pub gammas: Vec<f64>,
    pub marks: Vec<ConeElement>,
    pub value: ConeElement,
    pub truncation_r: f64,
    pub bias_bound: BiasBound,
    pub seed: u64,
    pub stream: u64,
    /// Neutral spectral draws that were rejected and redrawn.
    pub rejected: usize,
}

/// Aggregate of one realization without the individual points.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue {
    pub value: ConeElement,
    pub count: usize,
    pub bias_bound: BiasBound,
    pub rejected: usize,
}

/// The points `c Γ_i^{-1/α} ε_i` of one realization, before aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    pub gammas: Vec<f64>,
    pub points: Vec<ConeElement>,
}

/// A validated series configuration.
pub struct Series<'a> {
    cone: &'a ConeDescriptor,
    law: RadialLaw,
    spectral: &'a dyn SpectralSampler,
    r: f64,
    scale_constant: f64,
    prior_bias: BiasBound,
}

impl<'a> Series<'a> {
    /// Checks the admissibility gate and precomputes the bias bound.
    pub fn new(cone: &'a ConeDescriptor, law: RadialLaw, spectral: &'a dyn SpectralSampler, r: f64) -> Result<Self> {
        check_r(r)?;
        cone.admissible.check(law.alpha(), spectral.is_symmetric())?;
        Self::ungated(cone, law, spectral, r)
    }

    /// Same as [`Series::new`] without the admissibility gate; used for the
    /// point process, which exists for every α.
    pub fn ungated(cone: &'a ConeDescriptor, law: RadialLaw, spectral: &'a dyn SpectralSampler, r: f64) -> Result<Self> {
        check_r(r)?;
        let prior_bias = truncation_bias_bound(cone, &law, spectral, r)?;
        Ok(Series { cone, law, spectral, r, scale_constant: 1.0, prior_bias })
    }

    /// Multiplies every term by `c`, as needed when marks are normalized
    /// onto a transversal.
    pub fn with_scale_constant(mut self, c: f64) -> Result<Self> {
        crate::cone::check_scale_factor(c)?;
        self.scale_constant = c;
        Ok(self)
    }

    pub fn law(&self) -> RadialLaw {
        self.law
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn cone(&self) -> &ConeDescriptor {
        self.cone
    }

    fn term_scale(&self, gamma: f64) -> f64 {
        self.scale_constant * gamma.powf(-1.0 / self.law.alpha())
    }

    fn draw_mark(&self, rng: &mut StreamRng, out: &mut ConeElement, rejected: &mut usize) -> Result<()> {
        loop {
            self.spectral.draw_into(rng, out);
            if !out.is_neutral() {
                return Ok(());
            }
            *rejected += 1;
            if *rejected > MAX_NEUTRAL_REJECTIONS {
                return Err(Error::domain("spectral sampler keeps returning the neutral element"));
            }
        }
    }

    fn bias_for(&self, value: &ConeElement, count: usize) -> BiasBound {
        if self.cone.op != SemigroupOp::PointwiseMax {
            return self.prior_bias;
        }
        match self.spectral.moments().value_range {
            Some((_, upper)) if count > 0 && upper > 0.0 => conditional_max_bound(value, &self.law, upper, self.r),
            _ => self.prior_bias,
        }
    }

    fn run(&self, rng: &mut StreamRng, mut keep: Option<(&mut Vec<f64>, &mut Vec<ConeElement>)>) -> Result<SeriesValue> {
        let mut acc = self.cone.neutral();
        let mut mark = self.cone.neutral();
        let (mut count, mut rejected) = (0, 0);
        let mut g = 0.0;
        loop {
            g += Distribution::<f64>::sample(&Exp1, rng);
            if g > self.r {
                break;
            }
            self.draw_mark(rng, &mut mark, &mut rejected)?;
            if count == 0 {
                self.cone.validate(&mark)?;
            }
            self.cone.accumulate_scaled(&mut acc, self.term_scale(g), &mark);
            if let Some((gammas, marks)) = keep.as_mut() {
                gammas.push(g);
                marks.push(mark.clone());
            }
            count += 1;
        }
        let bias_bound = self.bias_for(&acc, count);
        Ok(SeriesValue { value: acc, count, bias_bound, rejected })
    }

    /// Full realization on stream `(seed, stream)`.
    pub fn sample(&self, seed: u64, stream: u64) -> Result<SeriesSample> {
        self.sample_with(&mut stream_rng(seed, stream), seed, stream)
    }

    /// Full realization drawn from an existing stream; `seed` and `stream`
    /// are recorded as metadata only.
    pub fn sample_with(&self, rng: &mut StreamRng, seed: u64, stream: u64) -> Result<SeriesSample> {
        let (mut gammas, mut marks) = (Vec::new(), Vec::new());
        let v = self.run(rng, Some((&mut gammas, &mut marks)))?;
        Ok(SeriesSample {
            gammas,
            marks,
            value: v.value,
            truncation_r: self.r,
            bias_bound: v.bias_bound,
            seed,
            stream,
            rejected: v.rejected,
        })
    }

    /// Aggregate only, without storing the points.
    pub fn sample_value(&self, seed: u64, stream: u64) -> Result<SeriesValue> {
        self.run(&mut stream_rng(seed, stream), None)
    }

    /// `n` independent aggregates on streams `side_stream(side, 0..n)`,
    /// computed in parallel and returned in stream order.
    pub fn sample_values(&self, seed: u64, side: u64, n: usize) -> Result<Vec<SeriesValue>> {
        (0..n as u64)
            .into_par_iter()
            .map(|i| self.sample_value(seed, side_stream(side, i)))
            .collect()
    }

    /// The scaled points of one realization; same draws as [`Series::sample`].
    pub fn sample_points(&self, seed: u64, stream: u64) -> Result<PointSample> {
        let s = self.sample(seed, stream)?;
        let points = s
            .gammas
            .iter()
            .zip(&s.marks)
            .map(|(g, m)| self.cone.scale(self.term_scale(*g), m))
            .collect::<Result<Vec<_>>>()?;
        Ok(PointSample { gammas: s.gammas, points })
    }
}

/// One realization of `ξ^{(r)}` on stream `(seed, stream)`.
pub fn sample_series(
    cone: &ConeDescriptor,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    r: f64,
    seed: u64,
    stream: u64,
) -> Result<SeriesSample> {
    Series::new(cone, *law, spectral, r)?.sample(seed, stream)
}

/// Aggregates prescribed arrival times and marks, in the given order.
pub fn assemble_series(cone: &ConeDescriptor, law: &RadialLaw, gammas: &[f64], marks: &[ConeElement]) -> Result<ConeElement> {
    if gammas.len() != marks.len() {
        return Err(Error::domain("arrival times and marks differ in length"));
    }
    if gammas.windows(2).any(|w| w[0] >= w[1]) || gammas.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::domain("arrival times must be positive and strictly increasing"));
    }
    let mut acc = cone.neutral();
    for (g, m) in gammas.iter().zip(marks) {
        cone.validate(m)?;
        cone.accumulate_scaled(&mut acc, g.powf(-1.0 / law.alpha()), m);
    }
    Ok(acc)
}

/// Draws marks and maps them onto a transversal: `ε ↦ τ(ε)^{-1} ε`.
///
/// The series built from normalized marks must be multiplied by
/// `c = (E τ(ε)^α)^{1/α}` (see [`transversal_scale_constant`]); the law is
/// preserved exactly when `τ(ε)` is independent of the angular part.
pub struct TransversalSampler<'a> {
    pub inner: &'a dyn SpectralSampler,
    pub cone: &'a ConeDescriptor,
    pub transversal: &'a Transversal,
}

impl SpectralSampler for TransversalSampler<'_> {
    fn draw(&self, rng: &mut StreamRng) -> ConeElement {
        loop {
            let e = self.inner.draw(rng);
            if let Ok(p) = crate::polar::decompose(self.transversal, self.cone, &e) {
                return p.angular;
            }
        }
    }

    fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }

    fn describe(&self) -> String {
        format!("normalized({})", self.inner.describe())
    }
}

/// Monte Carlo estimate of `c = (E τ(ε)^α)^{1/α}` from `draws` draws.
pub fn transversal_scale_constant(
    cone: &ConeDescriptor,
    transversal: &Transversal,
    spectral: &dyn SpectralSampler,
    law: &RadialLaw,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = stream_rng(seed, 0);
    let mut sum = 0.0;
    for _ in 0..draws {
        let e = spectral.draw(&mut rng);
        sum += transversal.tau(cone, &e)?.powf(law.alpha());
    }
    Ok((sum / draws as f64).powf(1.0 / law.alpha()))
}

/// Sizes for the radial integrals over `π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralBudget {
    pub draws: usize,
    pub seed: u64,
    pub radial: RadialOptions,
}

impl Default for IntegralBudget {
    fn default() -> Self {
        IntegralBudget { draws: 64, seed: 0, radial: RadialOptions::default() }
    }
}

/// Per-draw radial integrals `∫_{lower}^∞ b_j(t) t^{-α-1} dt`, reusing the
/// result for repeated draws.
fn per_draw_integrals(
    cone: &ConeDescriptor,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    budget: &IntegralBudget,
    lower: Option<f64>,
    profile: &dyn Fn(&ConeElement) -> Result<f64>,
) -> Result<Vec<RadialIntegral>> {
    if budget.draws == 0 {
        return Err(Error::domain("at least one spectral draw is required"));
    }
    let mut rng = stream_rng(budget.seed, 0);
    let mut cache: Vec<(ConeElement, RadialIntegral)> = Vec::new();
    let mut out = Vec::with_capacity(budget.draws);
    for _ in 0..budget.draws {
        let eps = spectral.draw(&mut rng);
        cone.validate(&eps)?;
        if let Some((_, r)) = cache.iter().find(|(e, _)| *e == eps) {
            out.push(*r);
            continue;
        }
        let mut failure = None;
        let r = radial_integral(
            |t| match cone.scale(t, &eps).and_then(|y| profile(&y)) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            law.alpha(),
            lower,
            &budget.radial,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        if cache.len() < 8 {
            cache.push((eps, r));
        }
        out.push(r);
    }
    Ok(out)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_values(values: &[f64]) -> Self {
        let (value, std_error) = mean_se(values);
        Estimate { value, std_error }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceExponent {
    pub re: Estimate,
    /// Imaginary part, computed for complex characters at finite `r`.
    pub im: Option<Estimate>,
    /// All radial quadratures converged within budget.
    pub converged: bool,
    /// Lower radial limit `r^{-1/α}` (0 for `r = ∞`).
    pub lower_limit: f64,
}

impl LaplaceExponent {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value, self.im.map_or(0.0, |e| e.value))
    }
}

/// `−log E χ(ξ^{(r)}) = ∫_{r^{-1/α}}^∞ E[1 − χ(tε)] α t^{-(α+1)} dt`.
///
/// The points `Γ_i^{-1/α}` with `Γ_i ≤ r` are exactly the points of `θ_α`
/// above `r^{-1/α}`. `r = ∞` gives the exponent of the untruncated law.
pub fn truncated_laplace_exponent(
    cone: &ConeDescriptor,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    chi: &Character,
    r: f64,
    budget: &IntegralBudget,
) -> Result<LaplaceExponent> {
    check_r(r)?;
    let alpha = law.alpha();
    let lower = r.is_finite().then(|| r.powf(-1.0 / alpha));
    let re = per_draw_integrals(cone, law, spectral, budget, lower, &|y| chi.one_minus_re(y))?;
    let converged = re.iter().all(|r| r.core.converged);
    let re_vals: Vec<f64> = re.iter().map(|r| alpha * r.value).collect();

    let im = if lower.is_some() && !chi.is_real() && !spectral.is_symmetric() {
        let im = per_draw_integrals(cone, law, spectral, budget, lower, &|y| chi.eval(y).map(|z| -z.im))?;
        let vals: Vec<f64> = im.iter().map(|r| alpha * r.value).collect();
        Some(Estimate::from_values(&vals))
    } else {
        None
    };
    Ok(LaplaceExponent { re: Estimate::from_values(&re_vals), im, converged, lower_limit: lower.unwrap_or(0.0) })
}

/// Outcome of the integrability check `∫_0^∞ E[1 − Re χ(tε)] t^{-(α+1)} dt < ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsCondition {
    /// The integral; `+∞` when a divergence is flagged.
    pub value: Estimate,
    pub diverges_at_zero: bool,
    pub diverges_at_infinity: bool,
    /// Smallest fitted decay exponent at the origin across draws.
    pub lower_exponent: f64,
}

impl EpsCondition {
    pub fn is_finite(&self) -> bool {
        !(self.diverges_at_zero || self.diverges_at_infinity)
    }
}

pub fn eps_condition_check(
    cone: &ConeDescriptor,
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    chi: &Character,
    budget: &IntegralBudget,
) -> Result<EpsCondition> {
    let per_draw = per_draw_integrals(cone, law, spectral, budget, None, &|y| chi.one_minus_re(y))?;
    let diverges_at_zero = per_draw.iter().any(|r| r.diverges_at_zero);
    let diverges_at_infinity = per_draw.iter().any(|r| r.diverges_at_infinity);
    let lower_exponent = per_draw.iter().map(|r| r.lower_exponent).fold(f64::INFINITY, f64::min);
    let value = if diverges_at_zero || diverges_at_infinity {
        Estimate { value: f64::INFINITY, std_error: f64::NAN }
    } else {
        Estimate::from_values(&per_draw.iter().map(|r| r.value).collect::<Vec<_>>())
    };
    Ok(EpsCondition { value, diverges_at_zero, diverges_at_infinity, lower_exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{AlphaAdmissibility, Carrier, Involution, TimeGrid};
    use crate::spectral::{PointMass, SymmetricSign};
    use std::sync::Arc;

    fn euclid(dim: usize) -> ConeDescriptor {
        ConeDescriptor {
            op: SemigroupOp::VectorSum,
            scaling: ScalingKind::Multiplicative,
            involution: Involution::Negation,
            carrier: Carrier::Euclidean { dim },
            admissible: AlphaAdmissibility::SUM,
            nonnegative: false,
        }
    }

    fn max_cone(grid: &Arc<TimeGrid>) -> ConeDescriptor {
        ConeDescriptor {
            op: SemigroupOp::PointwiseMax,
            scaling: ScalingKind::Multiplicative,
            involution: Involution::Identity,
            carrier: Carrier::Grid(Arc::clone(grid)),
            admissible: AlphaAdmissibility::ANY,
            nonnegative: true,
        }
    }

    fn one() -> ConeElement {
        ConeElement::Euclidean(vec![1.0])
    }

    #[test]
    fn gamma_sequence_is_increasing_and_bounded() {
        let mut rng = stream_rng(11, 0);
        let g = gamma_sequence(&mut rng, 50.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.iter().all(|x| *x <= 50.0 && *x > 0.0));
        assert!(gamma_sequence(&mut stream_rng(11, 1), 1e-12).is_empty());
    }

    #[test]
    fn tiny_r_gives_the_neutral_element() {
        let c = euclid(1);
        let law = RadialLaw::new(0.5).unwrap();
        let s = sample_series(&c, &law, &PointMass(one()), 1e-12, 3, 0).unwrap();
        assert!(s.gammas.is_empty() && s.marks.is_empty());
        assert_eq!(s.value, c.neutral());
    }

    #[test]
    fn value_is_the_fold_of_scaled_marks() {
        let c = euclid(2);
        let law = RadialLaw::new(1.3).unwrap();
        let spectral = SymmetricSign(ConeElement::Euclidean(vec![1.0, -0.5]));
        let s = sample_series(&c, &law, &spectral, 30.0, 5, 2).unwrap();
        let folded = assemble_series(&c, &law, &s.gammas, &s.marks).unwrap();
        assert_eq!(folded, s.value);
        let again = sample_series(&c, &law, &spectral, 30.0, 5, 2).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn admissibility_gate() {
        let c = euclid(1);
        let law = RadialLaw::new(1.2).unwrap();
        let err = Series::new(&c, law, &PointMass(one()), 10.0).err().unwrap();
        assert!(matches!(err, Error::Precondition(ref m) if m.contains("admissibility gate")));
        assert!(Series::new(&c, law, &SymmetricSign(one()), 10.0).is_ok());
        let law2 = RadialLaw::new(2.0).unwrap();
        assert!(Series::new(&c, law2, &SymmetricSign(one()), 10.0).is_err());
    }

    #[test]
    fn max_cone_with_unit_marks_keeps_the_first_point() {
        let grid = Arc::new(TimeGrid::integers(3));
        let c = max_cone(&grid);
        let law = RadialLaw::new(0.8).unwrap();
        let spectral = PointMass(ConeElement::grid(&grid, vec![1.0; 4]));
        let series = Series::new(&c, law, &spectral, 20.0).unwrap();
        for stream in 0..50 {
            let s = series.sample(9, stream).unwrap();
            let expected = s.gammas[0].powf(-1.0 / 0.8);
            assert!(s.value.coords().unwrap().iter().all(|v| *v == expected));
            assert_eq!(s.bias_bound.value, Some(0.0));
        }
    }

    #[test]
    fn bias_bound_examples() {
        let c = euclid(1);
        let b = truncation_bias_bound(&c, &RadialLaw::new(0.5).unwrap(), &PointMass(one()), 1e4).unwrap();
        assert!((b.value.unwrap() - 1e-4).abs() < 1e-18);
        assert!(!b.slow_decay);
        let near_one = truncation_bias_bound(&c, &RadialLaw::new(0.95).unwrap(), &PointMass(one()), 1e4).unwrap();
        assert!(near_one.slow_decay && near_one.value.unwrap().is_finite());
        let none = truncation_bias_bound(&c, &RadialLaw::new(1.5).unwrap(), &SymmetricSign(one()), 1e4).unwrap();
        assert_eq!(none, BiasBound::NOT_AVAILABLE);
    }

    #[test]
    fn forced_arrivals_assemble_deterministically() {
        let c = euclid(1);
        let law = RadialLaw::new(0.5).unwrap();
        let v = assemble_series(&c, &law, &[0.5, 2.0], &[one(), one()]).unwrap();
        assert!((v.coords().unwrap()[0] - (4.0 + 0.25)).abs() < 1e-15);
        assert!(assemble_series(&c, &law, &[2.0, 0.5], &[one(), one()]).is_err());
    }

    #[test]
    fn laplace_exponent_of_one_sided_law() {
        // α ∫_0^∞ (1 − e^{−t}) t^{−α−1} dt = Γ(1 − α); Γ(0.5) = √π
        let c = euclid(1);
        let law = RadialLaw::new(0.5).unwrap();
        let chi = Character::Exponential { lambda: vec![1.0] };
        let e = truncated_laplace_exponent(&c, &law, &PointMass(one()), &chi, f64::INFINITY, &IntegralBudget::default()).unwrap();
        assert!((e.re.value - std::f64::consts::PI.sqrt()).abs() < 1e-6, "{}", e.re.value);
        assert!(e.converged);
    }

    #[test]
    fn laplace_exponent_vanishes_for_tiny_r() {
        let c = euclid(1);
        let law = RadialLaw::new(0.5).unwrap();
        let chi = Character::Exponential { lambda: vec![1.0] };
        let e = truncated_laplace_exponent(&c, &law, &PointMass(one()), &chi, 1e-8, &IntegralBudget::default()).unwrap();
        assert!(e.re.value.abs() < 1e-7, "{}", e.re.value);
    }

    #[test]
    fn eps_condition_for_identity_character_is_zero() {
        let c = euclid(1);
        let law = RadialLaw::new(0.5).unwrap();
        let r = eps_condition_check(&c, &law, &PointMass(one()), &Character::fourier(vec![0.0]), &IntegralBudget::default()).unwrap();
        assert!(r.is_finite());
        assert_eq!(r.value.value, 0.0);
    }

    #[test]
    fn eps_condition_diverges_for_large_alpha() {
        let c = euclid(1);
        let chi = Character::fourier(vec![1.0]);
        for (alpha, finite) in [(0.5, true), (1.9, true), (2.0, false), (2.5, false)] {
            let law = RadialLaw::new(alpha).unwrap();
            let r = eps_condition_check(&c, &law, &PointMass(one()), &chi, &IntegralBudget::default()).unwrap();
            assert_eq!(r.is_finite(), finite, "alpha = {alpha}");
        }
    }
}

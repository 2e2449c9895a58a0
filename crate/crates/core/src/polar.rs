//! Polar coordinates on a cone: the radial law `θ_α`, transversals and the
//! bijection `x ↔ (τ(x)^{-1}x, τ(x))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cone::{Character, ConeDescriptor, ConeElement, ScalingKind};
use crate::quad::{integrate_log_scale, QuadOptions};
use crate::rng::stream_rng;
use crate::spectral::SpectralSampler;
use crate::stats::mean_se;
use crate::{Error, Result};

/// The measure `θ_α(dt) = α t^{-(α+1)} dt` on the positive half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialLaw {
    alpha: f64,
}

impl RadialLaw {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(RadialLaw { alpha })
        } else {
            Err(Error::domain(format!("alpha must be positive and finite, got {alpha}")))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `θ_α([b, ∞)) = b^{-α}`.
    pub fn tail(&self, b: f64) -> Result<f64> {
        if !(b > 0.0) {
            return Err(Error::domain(format!("tail threshold must be positive, got {b}")));
        }
        Ok(b.powf(-self.alpha))
    }

    /// Inverse-transform draw from `θ_α` restricted to `[b, ∞)` and
    /// normalized: `b (1 − u)^{-1/α}`.
    pub fn sample_above(&self, b: f64, u: f64) -> Result<f64> {
        if !(b > 0.0) {
            return Err(Error::domain(format!("lower bound must be positive, got {b}")));
        }
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("uniform variate must lie in (0, 1), got {u}")));
        }
        Ok(b * (-(-u).ln_1p() / self.alpha).exp())
    }
}

pub fn theta_tail(law: &RadialLaw, b: f64) -> Result<f64> {
    law.tail(b)
}

pub fn theta_sample_above(law: &RadialLaw, b: f64, u: f64) -> Result<f64> {
    law.sample_above(b, u)
}

/// Transversal built from an ordered family `h_n = 1 − Re χ_n`.
///
/// For `x` with `h_n(tx)` not identically zero along the orbit, the bucket
/// `j` is read from the supremum of `h_n(tx)` over the scan grid
/// `t = 2^k`, and the crossing time `inf{t > 0 : h_n(tx) > 2^{-j}}` is
/// bracketed on the same grid and refined by bisection. Fourier characters
/// scan the phase `|⟨u, tx⟩|` instead of `h_n`. The radial coordinate is
/// the reciprocal of the crossing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterTransversal {
    pub characters: Vec<Character>,
    pub scan: (i32, i32),
    pub bisection_steps: u32,
}

impl CharacterTransversal {
    pub fn new(characters: Vec<Character>) -> Self {
        CharacterTransversal { characters, scan: (-40, 40), bisection_steps: 80 }
    }

    /// The geometric grid, plus points just past each time where
    /// `t ↦ χ(tx)` can jump, so that narrow plateaus are not missed.
    fn scan_times(&self, chi: &Character, x: &ConeElement) -> Vec<f64> {
        let mut times: Vec<f64> = (self.scan.0..=self.scan.1).map(|k| 2f64.powi(k)).collect();
        let extra = chi.orbit_breakpoints(x);
        if !extra.is_empty() {
            times.extend(extra.iter().map(|t| t * (1.0 + 1e-12)).filter(|t| t.is_finite() && *t > 0.0));
            times.sort_by(f64::total_cmp);
            times.dedup();
        }
        times
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Transversal {
    /// Unit sphere of the element's natural norm (Euclidean norm, sup norm
    /// or total mass). Valid when the scaling multiplies the norm.
    Norm,
    Characters(CharacterTransversal),
}

/// Where a character-based transversal placed an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Index of the first function not vanishing along the orbit.
    pub function: usize,
    pub bucket: u32,
    /// `inf{t > 0 : h(tx) > 2^{-bucket}}`.
    pub time: f64,
}

/// Bucket `j` with `sup ∈ (2^{-j}, 2^{-j+1}]`, or 0 when `sup > 1`.
fn bucket_of(sup: f64) -> u32 {
    if sup > 1.0 {
        return 0;
    }
    let mut j = 1;
    while sup <= 0.5f64.powi(j as i32) && j < 1074 {
        j += 1;
    }
    j
}

impl CharacterTransversal {
    pub fn crossing(&self, cone: &ConeDescriptor, x: &ConeElement) -> Result<Crossing> {
        for (n, chi) in self.characters.iter().enumerate() {
            // Fourier phases are continuous along the orbit, so h first exceeds
            // 2 sin²(c/2) when |phase| first exceeds c. Scanning the phase keeps
            // a wrap past 2π between grid points from hiding the crossing.
            let phased = matches!(chi, Character::Fourier { .. });
            let h = |t: f64| -> Result<f64> {
                let y = cone.scale(t, x)?;
                if phased {
                    Ok(chi.exponent(&y)?.abs())
                } else {
                    chi.one_minus_re(&y)
                }
            };
            let times = self.scan_times(chi, x);
            let scan: Vec<(f64, f64)> = times.iter().map(|&t| h(t).map(|v| (t, v))).collect::<Result<_>>()?;
            let top = scan.iter().fold(0.0f64, |m, (_, v)| m.max(*v));
            let sup = if phased { 2.0 * (0.5 * top.min(PI)).sin().powi(2) } else { top };
            if !(sup > 0.0) {
                continue;
            }
            let bucket = bucket_of(sup);
            let threshold = 0.5f64.powi(bucket as i32);
            let level = if phased { 2.0 * (0.5 * threshold).sqrt().asin() } else { threshold };
            let first = scan.iter().position(|(_, v)| *v > level).unwrap_or_else(|| {
                // rounding at a bucket edge: fall back to the scan maximum
                scan.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map_or(0, |(i, _)| i)
            });
            if let (true, Character::Fourier { u }) = (phased && first > 0, chi) {
                if let Some(t) = certified_phase_crossing(cone, u, x, level, scan[0].0, scan[first].0)? {
                    return Ok(Crossing { function: n, bucket, time: t });
                }
            }
            let mut hi = scan[first].0;
            let mut lo = if first > 0 { scan[first - 1].0 } else { hi };
            if first == 0 {
                // crossing below the scan range: walk down until h falls below
                let mut steps = 0;
                while h(lo)? > level {
                    hi = lo;
                    lo *= 0.5;
                    steps += 1;
                    if steps > 1000 || lo == 0.0 {
                        return Err(Error::domain("crossing time below representable range"));
                    }
                }
            }
            for _ in 0..self.bisection_steps {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if h(mid)? > level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Crossing { function: n, bucket, time: hi });
        }
        Err(Error::OrbitOutsideTransversal)
    }
}

/// First `t` in `[t0, t_max]` with `|⟨u, tx⟩|` reaching `level` under a
/// linear scaling `tx = exp{(log t)A} x`, for `|⟨u, t0 x⟩| < level`.
///
/// Walks in `s = log t`. From `y = exp{sA} x` the phase moves by at most
/// `‖u‖ ‖y‖ (e^{Δ‖A‖} − 1)` over a step `Δ`, so steps that keep this below
/// the remaining gap cannot skip a crossing. `None` when the scaling is not
/// linear or the walk stalls.
fn certified_phase_crossing(
    cone: &ConeDescriptor,
    u: &[f64],
    x: &ConeElement,
    level: f64,
    t0: f64,
    t_max: f64,
) -> Result<Option<f64>> {
    let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let a_norm = match &cone.scaling {
        ScalingKind::Multiplicative => 1.0,
        ScalingKind::Operator(a) => a.rows().iter().map(|r| norm(r).powi(2)).sum::<f64>().sqrt(),
        _ => return Ok(None),
    };
    let u_norm = norm(u);
    let (mut s, s_max) = (t0.ln(), t_max.ln());
    for _ in 0..100_000 {
        let y = cone.scale(s.exp(), x)?;
        let Some(v) = y.coords() else { return Ok(None) };
        let gap = level - u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs();
        if gap < 0.0 {
            return Ok(None);
        }
        let step = (gap / (u_norm * norm(v))).ln_1p() / a_norm;
        if gap <= 1e-13 * level || step <= 1e-15 * s.abs().max(1.0) {
            return Ok(Some(s.exp()));
        }
        if !(s + step <= s_max) {
            return Ok(None);
        }
        s += step;
    }
    Ok(None)
}

impl Transversal {
    /// Radial coordinate `τ(x)`, with `τ(sx) = s τ(x)`.
    pub fn tau(&self, cone: &ConeDescriptor, x: &ConeElement) -> Result<f64> {
        cone.validate(x)?;
        if x.is_neutral() {
            return Err(Error::domain("the neutral element has no polar coordinates"));
        }
        match self {
            Transversal::Norm => {
                if matches!(cone.scaling, ScalingKind::Operator(_) | ScalingKind::TimeReparametrization) {
                    return Err(Error::contract("norm transversal requires a scaling that multiplies the norm"));
                }
                Ok(x.norm())
            }
            Transversal::Characters(ct) => Ok(1.0 / ct.crossing(cone, x)?.time),
        }
    }
}

/// A non-neutral element split into its angular part on the transversal
/// and its radial coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPair {
    pub angular: ConeElement,
    pub radial: f64,
}

pub fn tau(trans: &Transversal, cone: &ConeDescriptor, x: &ConeElement) -> Result<f64> {
    trans.tau(cone, x)
}

/// `x ↦ (τ(x)^{-1} x, τ(x))`.
pub fn decompose(trans: &Transversal, cone: &ConeDescriptor, x: &ConeElement) -> Result<PolarPair> {
    let radial = trans.tau(cone, x)?;
    let angular = cone.scale(1.0 / radial, x)?;
    Ok(PolarPair { angular, radial })
}

/// `(θ, r) ↦ rθ`.
pub fn compose(cone: &ConeDescriptor, p: &PolarPair) -> Result<ConeElement> {
    if !(p.radial.is_finite() && p.radial > 0.0) {
        return Err(Error::domain("radial coordinate must be positive and finite"));
    }
    if p.angular.is_neutral() {
        return Err(Error::domain("angular part must be non-neutral"));
    }
    cone.scale(p.radial, &p.angular)
}

/// Sizes for [`nu_eval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuBudget {
    /// Monte Carlo draws from `π`.
    pub draws: usize,
    pub seed: u64,
    /// Radial integration range; the caller asserts `π(tB) = 0` beyond `t_hi`.
    pub t_lo: f64,
    pub t_hi: f64,
    pub panels_per_unit: usize,
    pub quad: QuadOptions,
}

impl Default for NuBudget {
    fn default() -> Self {
        NuBudget {
            draws: 256,
            seed: 0,
            t_lo: 1e-12,
            t_hi: 1e6,
            panels_per_unit: 2,
            quad: QuadOptions { tol: 1e-10, max_depth: 60, max_evals: 50_000_000 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Mass that `[0, t_lo)` can contribute: at most `t_lo^α`.
    pub lower_tail_bound: f64,
    pub quadrature_error: f64,
    pub evaluations: usize,
}

/// `ν(B) = α ∫_0^∞ π(tB) t^{α-1} dt`, where `π(tB) = P{t^{-1} ε ∈ B}`.
///
/// Each draw `ε_j` contributes `α ∫ 1{t^{-1} ε_j ∈ B} t^{α-1} dt`, computed
/// on a log scale over `[t_lo, t_hi]`; the estimate is the mean over draws
/// and the standard error their spread.
pub fn nu_eval(
    law: &RadialLaw,
    spectral: &dyn SpectralSampler,
    indicator: &dyn Fn(&ConeElement) -> bool,
    cone: &ConeDescriptor,
    budget: &NuBudget,
) -> Result<NuEstimate> {
    if !(budget.t_lo > 0.0 && budget.t_hi > budget.t_lo) || budget.draws == 0 {
        return Err(Error::domain("nu_eval needs 0 < t_lo < t_hi and at least one draw"));
    }
    let alpha = law.alpha();
    let mut rng = stream_rng(budget.seed, 0);
    let mut per_draw = Vec::with_capacity(budget.draws);
    let (mut evals, mut qerr, mut converged) = (0, 0.0, true);
    for _ in 0..budget.draws {
        let eps = loop {
            let e = spectral.draw(&mut rng);
            if !e.is_neutral() {
                break e;
            }
        };
        cone.validate(&eps)?;
        let mut failure = None;
        let r = integrate_log_scale(
            |t| match cone.scale(1.0 / t, &eps) {
                Ok(y) if indicator(&y) => alpha * t.powf(alpha - 1.0),
                Ok(_) => 0.0,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            budget.t_lo,
            budget.t_hi,
            budget.panels_per_unit,
            budget.quad,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        evals += r.evals;
        qerr += r.error;
        converged &= r.converged;
        per_draw.push(r.value);
    }
    let (value, std_error) = mean_se(&per_draw);
    if !converged {
        return Err(Error::QuadratureBudget { partial: value, evaluations: evals });
    }
    Ok(NuEstimate {
        value,
        std_error,
        lower_tail_bound: budget.t_lo.powf(alpha),
        quadrature_error: qerr / budget.draws as f64,
        evaluations: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{AlphaAdmissibility, Carrier, Involution, SemigroupOp};
    use crate::spectral::PointMass;
    use std::f64::consts::PI;

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

    fn v(x: &[f64]) -> ConeElement {
        ConeElement::Euclidean(x.to_vec())
    }

    #[test]
    fn theta_tail_examples() {
        assert_eq!(RadialLaw::new(1.0).unwrap().tail(2.0).unwrap(), 0.5);
        assert!((RadialLaw::new(2.0).unwrap().tail(10.0).unwrap() - 0.01).abs() < 1e-18);
        for a in [0.3, 1.0, 4.2] {
            assert_eq!(RadialLaw::new(a).unwrap().tail(1.0).unwrap(), 1.0);
        }
        assert!(RadialLaw::new(1.0).unwrap().tail(0.0).is_err());
        assert!(RadialLaw::new(-1.0).is_err());
    }

    #[test]
    fn conditional_sampler_examples() {
        let law = RadialLaw::new(1.0).unwrap();
        assert!((law.sample_above(1.0, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!((law.sample_above(3.0, 1e-300).unwrap() - 3.0).abs() < 1e-15);
        assert!(law.sample_above(1.0, 0.0).is_err());
        assert!(law.sample_above(1.0, 1.0).is_err());
    }

    #[test]
    fn norm_tau_and_decompose() {
        let c = euclid(2);
        let x = v(&[3.0, 4.0]);
        assert_eq!(tau(&Transversal::Norm, &c, &x).unwrap(), 5.0);
        let p = decompose(&Transversal::Norm, &c, &x).unwrap();
        assert!(p.angular.relative_distance(&v(&[0.6, 0.8])).unwrap() < 1e-15);
        assert_eq!(p.radial, 5.0);
        assert!(compose(&c, &p).unwrap().relative_distance(&x).unwrap() < 1e-15);
        assert_eq!(compose(&c, &PolarPair { angular: v(&[1.0, 0.0]), radial: 1.0 }).unwrap(), v(&[1.0, 0.0]));
        assert!(matches!(decompose(&Transversal::Norm, &c, &c.neutral()), Err(Error::Domain(_))));
    }

    #[test]
    fn character_crossing_of_cosine_profile() {
        // h(t·10) = 1 − cos(10t); sup = 2 puts x in bucket 0 and the
        // crossing of level 1 is at cos(10t) = 0, i.e. t = π/20
        let c = euclid(1);
        let ct = CharacterTransversal::new(vec![Character::fourier(vec![1.0])]);
        let cr = ct.crossing(&c, &v(&[10.0])).unwrap();
        assert_eq!(cr.bucket, 0);
        assert!((cr.time - PI / 20.0).abs() < 1e-13, "{}", cr.time);
        let t = Transversal::Characters(ct);
        assert!((tau(&t, &c, &v(&[10.0])).unwrap() - 20.0 / PI).abs() < 1e-11);
    }

    #[test]
    fn character_transversal_skips_vanishing_functions() {
        let c = euclid(2);
        let t = Transversal::Characters(CharacterTransversal::new(vec![
            Character::fourier(vec![1.0, 0.0]),
            Character::fourier(vec![0.0, 1.0]),
        ]));
        let x = v(&[0.0, 2.0]);
        let p = decompose(&t, &c, &x).unwrap();
        assert!((tau(&t, &c, &p.angular).unwrap() - 1.0).abs() < 1e-12);
        let only_first = Transversal::Characters(CharacterTransversal::new(vec![Character::fourier(vec![1.0, 0.0])]));
        assert_eq!(tau(&only_first, &c, &x), Err(Error::OrbitOutsideTransversal));
    }

    #[test]
    fn bucket_boundaries_follow_half_open_intervals() {
        assert_eq!(bucket_of(1.5), 0);
        assert_eq!(bucket_of(1.0), 1);
        assert_eq!(bucket_of(0.75), 1);
        assert_eq!(bucket_of(0.5), 2);
        assert_eq!(bucket_of(0.3), 2);
    }

    #[test]
    fn nu_of_a_half_line_under_a_point_mass() {
        // π = δ_1, B = [2, ∞), α = 0.7: ν(B) = α ∫_0^{1/2} t^{α-1} dt = 2^{-0.7}
        let c = euclid(1);
        let law = RadialLaw::new(0.7).unwrap();
        let spectral = PointMass(v(&[1.0]));
        let in_b = |x: &ConeElement| x.coords().unwrap()[0] >= 2.0;
        let est = nu_eval(&law, &spectral, &in_b, &c, &NuBudget { draws: 4, ..Default::default() }).unwrap();
        assert!((est.value - 2f64.powf(-0.7)).abs() < 1e-6, "{}", est.value);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn nu_of_empty_set_is_zero() {
        let c = euclid(1);
        let law = RadialLaw::new(0.7).unwrap();
        let est = nu_eval(&law, &PointMass(v(&[1.0])), &|_: &ConeElement| false, &c, &NuBudget { draws: 2, ..Default::default() }).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn operator_crossing_sees_excursions_between_grid_points() {
        // the first coordinate of exp{sA}x exceeds π/2 briefly near t ≈ 0.456,
        // between two points of the dyadic scan for the rescaled element
        let a = crate::expm::Matrix::from_rows(&[vec![0.8, 0.3], vec![-0.2, 1.1]]).unwrap();
        let cone = crate::cones::make_cone(&crate::cones::ConeSpec::operator(a)).unwrap();
        let x = v(&[-1.1809943788609163, 8.547278302604537]);
        let t = 0.4530020273742467;
        let tx = cone.descriptor.scale(t, &x).unwrap();
        let (a, b) = (cone.transversal.tau(&cone.descriptor, &x).unwrap(), cone.transversal.tau(&cone.descriptor, &tx).unwrap());
        assert!((b / (t * a) - 1.0).abs() < 1e-9, "{b} vs {}", t * a);
    }
}

//! Spectral (angular) laws `π` of the series marks `ε_i`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cone::{Atom, ConeElement, Jump, TimeGrid};
use crate::rng::StreamRng;

/// Declared moments and bounds of `ε`, used by the truncation-bias bounds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    /// `E‖ε‖` in the element's natural norm.
    pub mean_norm: Option<f64>,
    /// `E‖ε‖²`.
    pub second_moment: Option<f64>,
    /// Almost-sure range of `‖ε‖`.
    pub norm_range: Option<(f64, f64)>,
    /// Almost-sure range of the grid values `ε(s)` (grid cones only).
    pub value_range: Option<(f64, f64)>,
    /// Step-function marks vanish on `[0, b)`.
    pub vanishes_below: Option<f64>,
}

/// A law `π` on the non-neutral elements of a cone.
///
/// Draws are a deterministic function of the stream state.
pub trait SpectralSampler: Send + Sync {
    fn draw(&self, rng: &mut StreamRng) -> ConeElement;

    /// Draws into `out`, reusing its allocation when possible.
    fn draw_into(&self, rng: &mut StreamRng, out: &mut ConeElement) {
        *out = self.draw(rng);
    }

    /// The law is invariant under the cone's involution.
    fn is_symmetric(&self) -> bool {
        false
    }

    fn moments(&self) -> Moments {
        Moments::default()
    }

    fn describe(&self) -> String;
}

impl<S: SpectralSampler + ?Sized> SpectralSampler for Arc<S> {
    fn draw(&self, rng: &mut StreamRng) -> ConeElement {
        (**self).draw(rng)
    }
    fn draw_into(&self, rng: &mut StreamRng, out: &mut ConeElement) {
        (**self).draw_into(rng, out)
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
    fn moments(&self) -> Moments {
        (**self).moments()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

fn value_range(x: &ConeElement) -> Option<(f64, f64)> {
    match x {
        ConeElement::Grid(f) => Some(
            f.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v))),
        ),
        _ => None,
    }
}

fn first_jump(x: &ConeElement) -> Option<f64> {
    match x {
        ConeElement::Step(f) => f.merged().first().map(|j| j.time),
        _ => None,
    }
}

fn copy_into(src: &ConeElement, out: &mut ConeElement, sign: f64) {
    match (src, &mut *out) {
        (ConeElement::Euclidean(s), ConeElement::Euclidean(o)) if o.len() == s.len() => {
            o.iter_mut().zip(s).for_each(|(a, b)| *a = sign * b)
        }
        (ConeElement::Grid(s), ConeElement::Grid(o)) if o.values.len() == s.values.len() => {
            o.values.iter_mut().zip(&s.values).for_each(|(a, b)| *a = sign * b)
        }
        _ => {
            out.clone_from(src);
            if sign < 0.0 {
                negate(out);
            }
        }
    }
}

fn negate(x: &mut ConeElement) {
    match x {
        ConeElement::Euclidean(v) => v.iter_mut().for_each(|c| *c = -*c),
        ConeElement::Grid(f) => f.values.iter_mut().for_each(|c| *c = -*c),
        ConeElement::Step(f) => f.jumps.iter_mut().for_each(|j| j.size = -j.size),
        ConeElement::Measure(_) => {}
    }
}

/// `ε ≡ x`.
#[derive(Debug, Clone)]
pub struct PointMass(pub ConeElement);

impl SpectralSampler for PointMass {
    fn draw(&self, _rng: &mut StreamRng) -> ConeElement {
        self.0.clone()
    }

    fn draw_into(&self, _rng: &mut StreamRng, out: &mut ConeElement) {
        copy_into(&self.0, out, 1.0);
    }

    fn is_symmetric(&self) -> bool {
        // only the measure and max cones have identity involutions; a point
        // mass is symmetric there, but those cones never consult the flag
        false
    }

    fn moments(&self) -> Moments {
        let n = self.0.norm();
        Moments {
            mean_norm: Some(n),
            second_moment: Some(n * n),
            norm_range: Some((n, n)),
            value_range: value_range(&self.0),
            vanishes_below: first_jump(&self.0),
        }
    }

    fn describe(&self) -> String {
        format!("point-mass({:?})", self.0.coords().unwrap_or(&[]))
    }
}

/// `ε = ±x` with equal probability; symmetric under negation.
#[derive(Debug, Clone)]
pub struct SymmetricSign(pub ConeElement);

impl SpectralSampler for SymmetricSign {
    fn draw(&self, rng: &mut StreamRng) -> ConeElement {
        let mut out = self.0.clone();
        self.draw_into(rng, &mut out);
        out
    }

    fn draw_into(&self, rng: &mut StreamRng, out: &mut ConeElement) {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        copy_into(&self.0, out, sign);
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn moments(&self) -> Moments {
        let n = self.0.norm();
        let range = value_range(&self.0).map(|(lo, hi)| {
            let m = lo.abs().max(hi.abs());
            (-m, m)
        });
        Moments {
            mean_norm: Some(n),
            second_moment: Some(n * n),
            norm_range: Some((n, n)),
            value_range: range,
            vanishes_below: first_jump(&self.0),
        }
    }

    fn describe(&self) -> String {
        format!("symmetric-sign({:?})", self.0.coords().unwrap_or(&[]))
    }
}

/// Uniform law on the Euclidean unit sphere of `R^dim`.
#[derive(Debug, Clone, Copy)]
pub struct UniformSphere {
    pub dim: usize,
}

impl SpectralSampler for UniformSphere {
    fn draw(&self, rng: &mut StreamRng) -> ConeElement {
        let mut out = ConeElement::Euclidean(vec![0.0; self.dim]);
        self.draw_into(rng, &mut out);
        out
    }

    fn draw_into(&self, rng: &mut StreamRng, out: &mut ConeElement) {
        let ConeElement::Euclidean(v) = out else {
            *out = self.draw(rng);
            return;
        };
        v.resize(self.dim, 0.0);
        if self.dim == 1 {
            v[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
            return;
        }
        loop {
            v.iter_mut().for_each(|c| *c = StandardNormal.sample(rng));
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n > 0.0 {
                v.iter_mut().for_each(|c| *c /= n);
                return;
            }
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn moments(&self) -> Moments {
        Moments { mean_norm: Some(1.0), second_moment: Some(1.0), norm_range: Some((1.0, 1.0)), value_range: None, vanishes_below: None }
    }

    fn describe(&self) -> String {
        format!("uniform-sphere(d={})", self.dim)
    }
}

/// `ε = h · 1_{[U, ∞)}` with `U ~ Uniform(lo, hi)`, `lo > 0`, and a random
/// sign when `signed`.
#[derive(Debug, Clone)]
pub struct RandomStep {
    pub grid: Arc<TimeGrid>,
    pub jump_range: (f64, f64),
    pub height: f64,
    pub signed: bool,
}

impl SpectralSampler for RandomStep {
    fn draw(&self, rng: &mut StreamRng) -> ConeElement {
        let mut out = ConeElement::step(&self.grid, Vec::with_capacity(1));
        self.draw_into(rng, &mut out);
        out
    }

    fn draw_into(&self, rng: &mut StreamRng, out: &mut ConeElement) {
        let (lo, hi) = self.jump_range;
        let time = lo + (hi - lo) * rng.random::<f64>();
        let sign = if self.signed && rng.random::<bool>() { -1.0 } else { 1.0 };
        let jump = Jump { time, size: sign * self.height };
        match out {
            ConeElement::Step(f) => {
                f.jumps.clear();
                f.jumps.push(jump);
            }
            _ => *out = ConeElement::step(&self.grid, vec![jump]),
        }
    }

    fn is_symmetric(&self) -> bool {
        self.signed
    }

    fn moments(&self) -> Moments {
        let h = self.height.abs();
        Moments {
            mean_norm: Some(h),
            second_moment: Some(h * h),
            norm_range: Some((h, h)),
            value_range: None,
            vanishes_below: Some(self.jump_range.0),
        }
    }

    fn describe(&self) -> String {
        format!(
            "random-step(h={}, U~[{}, {}], signed={})",
            self.height, self.jump_range.0, self.jump_range.1, self.signed
        )
    }
}

/// A single atom of fixed weight at a uniform location in `[lo, hi]^dim`.
#[derive(Debug, Clone, Copy)]
pub struct RandomAtom {
    pub dim: usize,
    pub range: (f64, f64),
    pub weight: f64,
}

impl SpectralSampler for RandomAtom {
    fn draw(&self, rng: &mut StreamRng) -> ConeElement {
        let (lo, hi) = self.range;
        let location = (0..self.dim).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
        ConeElement::Measure(vec![Atom::new(location, self.weight)])
    }

    fn moments(&self) -> Moments {
        let w = self.weight;
        Moments { mean_norm: Some(w), second_moment: Some(w * w), norm_range: Some((w, w)), value_range: None, vanishes_below: None }
    }

    fn describe(&self) -> String {
        format!("random-atom(w={}, box=[{}, {}]^{})", self.weight, self.range.0, self.range.1, self.dim)
    }
}

/// A user-supplied sampler.
pub struct FnSampler<F> {
    pub f: F,
    pub symmetric: bool,
    pub moments: Moments,
    pub name: String,
}

impl<F> SpectralSampler for FnSampler<F>
where
    F: Fn(&mut StreamRng) -> ConeElement + Send + Sync,
{
    fn draw(&self, rng: &mut StreamRng) -> ConeElement {
        (self.f)(rng)
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn moments(&self) -> Moments {
        self.moments
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn sphere_draws_have_unit_norm() {
        let s = UniformSphere { dim: 3 };
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            assert!((s.draw(&mut rng).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_sign_balances() {
        let s = SymmetricSign(ConeElement::Euclidean(vec![1.0]));
        let mut rng = stream_rng(2, 0);
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| s.draw(&mut rng).coords().unwrap()[0]).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn step_marks_vanish_before_the_jump() {
        let grid = Arc::new(TimeGrid::integers(10));
        let s = RandomStep { grid: Arc::clone(&grid), jump_range: (0.5, 5.0), height: 1.0, signed: false };
        let mut rng = stream_rng(3, 0);
        for _ in 0..50 {
            let x = s.draw(&mut rng);
            let v = x.observed().unwrap();
            assert_eq!(v[0], 0.0);
            assert!(v.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(v[10], 1.0);
        }
    }

    #[test]
    fn draw_into_matches_draw() {
        let s = SymmetricSign(ConeElement::Euclidean(vec![1.0, -2.0]));
        let mut a = stream_rng(4, 9);
        let mut b = stream_rng(4, 9);
        let mut buf = ConeElement::Euclidean(vec![0.0; 2]);
        for _ in 0..20 {
            s.draw_into(&mut a, &mut buf);
            assert_eq!(buf, s.draw(&mut b));
        }
    }
}

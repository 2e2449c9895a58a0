//! Cone elements, the cone algebra and bounded semicharacters.
//!
//! A [`ConeDescriptor`] fixes the semigroup operation, the scaling action and
//! the involution. All operations are pure and check that their operands
//! belong to the descriptor's carrier.

use std::cmp::Ordering;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expm::{expm, Matrix};
use crate::{Error, Result};

/// Strictly increasing time points shared by every function of a cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Construction("time grid is empty".into()));
        }
        if points.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Construction("time points must be finite and non-negative".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Construction("time points must be strictly increasing".into()));
        }
        Ok(TimeGrid { points })
    }

    /// `{0, 1, ..., n}`.
    pub fn integers(n: usize) -> Self {
        TimeGrid { points: (0..=n).map(|k| k as f64).collect() }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(location: Vec<f64>, weight: f64) -> Self {
        Atom { location, weight }
    }
}

/// A function sampled on the time grid of its cone.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Arc<TimeGrid>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

/// A right-continuous step function on `[0, ∞)` vanishing at the origin:
/// `x(s) = Σ_{time ≤ s} size`. Jumps are kept unmerged; the grid is where
/// the function is observed by characters and in output.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pub grid: Arc<TimeGrid>,
    pub jumps: Vec<Jump>,
}

impl StepFunction {
    pub fn value_at(&self, s: f64) -> f64 {
        self.jumps.iter().filter(|j| j.time <= s).map(|j| j.size).sum()
    }

    /// Jumps sorted by time, equal times combined, zero sizes dropped.
    pub fn merged(&self) -> Vec<Jump> {
        let mut sorted: Vec<Jump> = self.jumps.iter().filter(|j| j.size != 0.0).copied().collect();
        sorted.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut out: Vec<Jump> = Vec::with_capacity(sorted.len());
        for j in sorted {
            match out.last_mut() {
                Some(last) if last.time == j.time => last.size += j.size,
                _ => out.push(j),
            }
        }
        out.retain(|j| j.size != 0.0);
        out
    }

    /// Values after each merged jump, in time order.
    fn levels(&self) -> Vec<f64> {
        self.merged()
            .iter()
            .scan(0.0, |acc, j| {
                *acc += j.size;
                Some(*acc)
            })
            .collect()
    }

    /// Values at the grid points.
    pub fn observe(&self) -> Vec<f64> {
        let merged = self.merged();
        let (mut acc, mut i) = (0.0, 0);
        self.grid
            .points()
            .iter()
            .map(|s| {
                while i < merged.len() && merged[i].time <= *s {
                    acc += merged[i].size;
                    i += 1;
                }
                acc
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeElement {
    Euclidean(Vec<f64>),
    Grid(GridFunction),
    Step(StepFunction),
    /// Finite atomic measure; atoms are kept unmerged.
    Measure(Vec<Atom>),
}

impl ConeElement {
    pub fn grid(grid: &Arc<TimeGrid>, values: Vec<f64>) -> Self {
        ConeElement::Grid(GridFunction { grid: Arc::clone(grid), values })
    }

    pub fn step(grid: &Arc<TimeGrid>, jumps: Vec<Jump>) -> Self {
        ConeElement::Step(StepFunction { grid: Arc::clone(grid), jumps })
    }

    pub fn is_neutral(&self) -> bool {
        match self {
            ConeElement::Euclidean(v) => v.iter().all(|c| *c == 0.0),
            ConeElement::Grid(f) => f.values.iter().all(|c| *c == 0.0),
            ConeElement::Step(f) => f.merged().is_empty(),
            ConeElement::Measure(atoms) => atoms.iter().all(|a| a.weight == 0.0),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            ConeElement::Euclidean(_) => "euclidean",
            ConeElement::Grid(_) => "grid-function",
            ConeElement::Step(_) => "step-function",
            ConeElement::Measure(_) => "atomic-measure",
        }
    }

    /// Stored coordinates of vector and grid elements.
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            ConeElement::Euclidean(v) => Some(v),
            ConeElement::Grid(f) => Some(&f.values),
            ConeElement::Step(_) | ConeElement::Measure(_) => None,
        }
    }

    /// Coordinates, with step functions observed on their grid.
    pub fn observed(&self) -> Option<Vec<f64>> {
        match self {
            ConeElement::Step(f) => Some(f.observe()),
            _ => self.coords().map(<[f64]>::to_vec),
        }
    }

    pub fn total_mass(&self) -> Option<f64> {
        match self {
            ConeElement::Measure(atoms) => Some(atoms.iter().map(|a| a.weight).sum()),
            _ => None,
        }
    }

    /// Euclidean norm for vectors, sup norm for functions, total mass for
    /// measures.
    pub fn norm(&self) -> f64 {
        match self {
            ConeElement::Euclidean(v) => v.iter().map(|c| c * c).sum::<f64>().sqrt(),
            ConeElement::Grid(f) => f.values.iter().fold(0.0, |m, c| m.max(c.abs())),
            ConeElement::Step(f) => f.levels().iter().fold(0.0, |m, c| m.max(c.abs())),
            ConeElement::Measure(atoms) => atoms.iter().map(|a| a.weight).sum(),
        }
    }

    /// Atoms merged by location and sorted, zero weights dropped.
    pub fn merged_atoms(&self) -> Option<Vec<Atom>> {
        let ConeElement::Measure(atoms) = self else {
            return None;
        };
        let mut sorted: Vec<Atom> = atoms.iter().filter(|a| a.weight != 0.0).cloned().collect();
        sorted.sort_by(|a, b| cmp_locations(&a.location, &b.location));
        let mut merged: Vec<Atom> = Vec::with_capacity(sorted.len());
        for atom in sorted {
            match merged.last_mut() {
                Some(last) if last.location == atom.location => last.weight += atom.weight,
                _ => merged.push(atom),
            }
        }
        Some(merged)
    }

    /// Relative distance between two elements of the same variant.
    ///
    /// Measures are merged and sorted first; atoms whose locations differ are
    /// compared against zero. Step functions are compared jump by jump, with
    /// jump times matched up to a relative `1e-6` and their mismatch counted
    /// relative to the time.
    pub fn relative_distance(&self, other: &ConeElement) -> Result<f64> {
        let rel = |diff: f64, scale: f64| if scale > 0.0 { diff / scale } else { diff };
        match (self, other) {
            (ConeElement::Step(f), ConeElement::Step(g)) => {
                let (a, b) = (f.merged(), g.merged());
                let scale = a.iter().chain(&b).fold(0.0f64, |m, j| m.max(j.size.abs()));
                let (mut i, mut k) = (0, 0);
                let mut dist = 0.0f64;
                while i < a.len() || k < b.len() {
                    match (a.get(i), b.get(k)) {
                        (Some(x), Some(y)) if (x.time - y.time).abs() <= 1e-6 * x.time.max(y.time) => {
                            let dt = (x.time - y.time).abs() / x.time.max(y.time);
                            dist = dist.max(rel((x.size - y.size).abs(), scale)).max(dt);
                            i += 1;
                            k += 1;
                        }
                        (Some(x), y) if y.is_none_or(|y| x.time < y.time) => {
                            dist = dist.max(rel(x.size.abs(), scale));
                            i += 1;
                        }
                        (_, Some(y)) => {
                            dist = dist.max(rel(y.size.abs(), scale));
                            k += 1;
                        }
                        _ => unreachable!(),
                    }
                }
                Ok(dist)
            }
            (ConeElement::Measure(_), ConeElement::Measure(_)) => {
                let a = self.merged_atoms().unwrap_or_default();
                let b = other.merged_atoms().unwrap_or_default();
                let (mut i, mut j) = (0, 0);
                let (mut diff, mut scale) = (0.0f64, 0.0f64);
                while i < a.len() || j < b.len() {
                    let ord = match (a.get(i), b.get(j)) {
                        (Some(x), Some(y)) => cmp_locations(&x.location, &y.location),
                        (Some(_), None) => Ordering::Less,
                        _ => Ordering::Greater,
                    };
                    let (wa, wb) = match ord {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                            (a[i - 1].weight, b[j - 1].weight)
                        }
                        Ordering::Less => {
                            i += 1;
                            (a[i - 1].weight, 0.0)
                        }
                        Ordering::Greater => {
                            j += 1;
                            (0.0, b[j - 1].weight)
                        }
                    };
                    diff = diff.max((wa - wb).abs());
                    scale = scale.max(wa.abs()).max(wb.abs());
                }
                Ok(rel(diff, scale))
            }
            _ => {
                let (a, b) = match (self.coords(), other.coords()) {
                    (Some(a), Some(b)) if a.len() == b.len() && self.variant_name() == other.variant_name() => (a, b),
                    _ => return Err(Error::contract("elements of different variants or sizes")),
                };
                let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
                Ok(rel(diff, scale))
            }
        }
    }

    /// Equality with atoms merged and sorted, weights compared to `1e-12`.
    pub fn approx_eq(&self, other: &ConeElement) -> bool {
        self.relative_distance(other).map(|d| d <= 1e-12).unwrap_or(false)
    }
}

fn cmp_locations(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemigroupOp {
    VectorSum,
    PointwiseMax,
    MeasureSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScalingKind {
    /// `tx` componentwise.
    Multiplicative,
    /// `exp{(log t) A} x` for a non-degenerate matrix `A`.
    Operator(Matrix),
    /// `(tx)(s) = x(ts)`.
    TimeReparametrization,
    /// Weights multiplied by `t`, locations fixed.
    WeightScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Involution {
    Negation,
    Identity,
}

/// Underlying space of the cone's elements.
#[derive(Debug, Clone, PartialEq)]
pub enum Carrier {
    Euclidean { dim: usize },
    /// Functions stored by their values on the grid.
    Grid(Arc<TimeGrid>),
    /// Step functions observed on the grid.
    Steps(Arc<TimeGrid>),
    Measure { dim: usize },
}

/// Range of α for which the series is summed without compensation:
/// `0 < α < bound`, with a separate bound for symmetric spectral laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaAdmissibility {
    pub asymmetric_upper: f64,
    pub symmetric_upper: f64,
}

impl AlphaAdmissibility {
    pub const SUM: AlphaAdmissibility = AlphaAdmissibility { asymmetric_upper: 1.0, symmetric_upper: 2.0 };
    pub const ANY: AlphaAdmissibility =
        AlphaAdmissibility { asymmetric_upper: f64::INFINITY, symmetric_upper: f64::INFINITY };

    pub fn check(&self, alpha: f64, symmetric: bool) -> Result<()> {
        let upper = if symmetric { self.symmetric_upper } else { self.asymmetric_upper };
        if alpha > 0.0 && alpha < upper {
            return Ok(());
        }
        Err(Error::Precondition(format!(
            "admissibility gate: alpha = {alpha} outside (0, {upper}) for a {} spectral law; \
             compensated summation is not supported",
            if symmetric { "symmetric" } else { "non-symmetric" }
        )))
    }
}

/// Algebraic context shared by all operations on a cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDescriptor {
    pub op: SemigroupOp,
    pub scaling: ScalingKind,
    pub involution: Involution,
    pub carrier: Carrier,
    pub admissible: AlphaAdmissibility,
    /// Grid values are required to be non-negative (max cone).
    pub nonnegative: bool,
}

impl ConeDescriptor {
    pub fn neutral(&self) -> ConeElement {
        match &self.carrier {
            Carrier::Euclidean { dim } => ConeElement::Euclidean(vec![0.0; *dim]),
            Carrier::Grid(grid) => ConeElement::grid(grid, vec![0.0; grid.len()]),
            Carrier::Steps(grid) => ConeElement::step(grid, Vec::new()),
            Carrier::Measure { .. } => ConeElement::Measure(Vec::new()),
        }
    }

    pub fn grid(&self) -> Option<&Arc<TimeGrid>> {
        match &self.carrier {
            Carrier::Grid(g) | Carrier::Steps(g) => Some(g),
            _ => None,
        }
    }

    /// Checks that `x` is a valid element of this cone.
    pub fn validate(&self, x: &ConeElement) -> Result<()> {
        match (&self.carrier, x) {
            (Carrier::Euclidean { dim }, ConeElement::Euclidean(v)) => {
                if v.len() != *dim {
                    return Err(Error::contract(format!("expected dimension {dim}, got {}", v.len())));
                }
                if v.iter().any(|c| !c.is_finite()) {
                    return Err(Error::domain("coordinates must be finite"));
                }
            }
            (Carrier::Grid(grid), ConeElement::Grid(f)) => {
                if !Arc::ptr_eq(grid, &f.grid) && **grid != *f.grid {
                    return Err(Error::contract("grid function lives on a different time grid"));
                }
                if f.values.len() != grid.len() {
                    return Err(Error::contract("grid function length differs from the grid"));
                }
                if f.values.iter().any(|c| !c.is_finite()) {
                    return Err(Error::domain("grid values must be finite"));
                }
                if self.nonnegative && f.values.iter().any(|c| *c < 0.0) {
                    return Err(Error::domain("max-cone grid functions must be non-negative"));
                }
            }
            (Carrier::Steps(grid), ConeElement::Step(f)) => {
                if !Arc::ptr_eq(grid, &f.grid) && **grid != *f.grid {
                    return Err(Error::contract("step function is observed on a different time grid"));
                }
                for j in &f.jumps {
                    if !(j.time.is_finite() && j.time > 0.0) {
                        return Err(Error::domain("jump times must be positive and finite (functions vanish at 0)"));
                    }
                    if !j.size.is_finite() {
                        return Err(Error::domain("jump sizes must be finite"));
                    }
                }
                if self.nonnegative {
                    let levels = f.levels();
                    let scale = levels.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if levels.iter().any(|v| *v < -1e-12 * scale) {
                        return Err(Error::domain("step functions in this cone must be non-negative"));
                    }
                }
            }
            (Carrier::Measure { dim }, ConeElement::Measure(atoms)) => {
                for a in atoms {
                    if a.location.len() != *dim {
                        return Err(Error::contract("atom location has the wrong dimension"));
                    }
                    if !(a.weight.is_finite() && a.weight >= 0.0) {
                        return Err(Error::domain("atom weights must be finite and non-negative"));
                    }
                }
            }
            (_, x) => {
                return Err(Error::contract(format!(
                    "{} element does not belong to this cone",
                    x.variant_name()
                )))
            }
        }
        Ok(())
    }

    pub fn add(&self, x: &ConeElement, y: &ConeElement) -> Result<ConeElement> {
        self.validate(x)?;
        self.validate(y)?;
        let mut out = x.clone();
        self.add_assign(&mut out, y);
        Ok(out)
    }

    pub fn scale(&self, t: f64, x: &ConeElement) -> Result<ConeElement> {
        check_scale_factor(t)?;
        self.validate(x)?;
        let mut out = self.neutral();
        self.accumulate_scaled(&mut out, t, x);
        Ok(out)
    }

    pub fn involve(&self, x: &ConeElement) -> Result<ConeElement> {
        self.validate(x)?;
        Ok(match (self.involution, x) {
            (Involution::Identity, _) | (_, ConeElement::Measure(_)) => x.clone(),
            (Involution::Negation, ConeElement::Euclidean(v)) => {
                ConeElement::Euclidean(v.iter().map(|c| -c).collect())
            }
            (Involution::Negation, ConeElement::Grid(f)) => ConeElement::Grid(GridFunction {
                grid: Arc::clone(&f.grid),
                values: f.values.iter().map(|c| -c).collect(),
            }),
            (Involution::Negation, ConeElement::Step(f)) => ConeElement::Step(StepFunction {
                grid: Arc::clone(&f.grid),
                jumps: f.jumps.iter().map(|j| Jump { time: j.time, size: -j.size }).collect(),
            }),
        })
    }

    /// `acc ← acc ⊕ y` without validation.
    pub(crate) fn add_assign(&self, acc: &mut ConeElement, y: &ConeElement) {
        match (acc, y) {
            (ConeElement::Euclidean(a), ConeElement::Euclidean(b)) => {
                a.iter_mut().zip(b).for_each(|(p, q)| *p += q)
            }
            (ConeElement::Grid(a), ConeElement::Grid(b)) => match self.op {
                SemigroupOp::PointwiseMax => {
                    a.values.iter_mut().zip(&b.values).for_each(|(p, q)| *p = p.max(*q))
                }
                _ => a.values.iter_mut().zip(&b.values).for_each(|(p, q)| *p += q),
            },
            (ConeElement::Step(a), ConeElement::Step(b)) => a.jumps.extend_from_slice(&b.jumps),
            (ConeElement::Measure(a), ConeElement::Measure(b)) => a.extend(b.iter().cloned()),
            _ => unreachable!("operands validated against the same carrier"),
        }
    }

    /// `acc ← acc ⊕ t·mark` without validation or temporary allocation
    /// (except for operator scaling and measures).
    pub(crate) fn accumulate_scaled(&self, acc: &mut ConeElement, t: f64, mark: &ConeElement) {
        let max = self.op == SemigroupOp::PointwiseMax;
        let combine = |p: &mut f64, q: f64| if max { *p = p.max(q) } else { *p += q };
        match (&self.scaling, acc, mark) {
            (ScalingKind::Operator(a), ConeElement::Euclidean(acc), ConeElement::Euclidean(x)) => {
                let m = expm(&a.scaled(t.ln()));
                for (p, q) in acc.iter_mut().zip(m.apply(x)) {
                    combine(p, q);
                }
            }
            (ScalingKind::TimeReparametrization, ConeElement::Step(acc), ConeElement::Step(x)) => {
                // (tx)(s) = x(ts) jumps at time/t
                acc.jumps.extend(x.jumps.iter().map(|j| Jump { time: j.time / t, size: j.size }));
            }
            (_, ConeElement::Step(acc), ConeElement::Step(x)) => {
                acc.jumps.extend(x.jumps.iter().map(|j| Jump { time: j.time, size: t * j.size }))
            }
            (_, ConeElement::Euclidean(acc), ConeElement::Euclidean(x)) => {
                acc.iter_mut().zip(x).for_each(|(p, q)| combine(p, t * q))
            }
            (_, ConeElement::Grid(acc), ConeElement::Grid(x)) => {
                acc.values.iter_mut().zip(&x.values).for_each(|(p, q)| combine(p, t * q))
            }
            (_, ConeElement::Measure(acc), ConeElement::Measure(x)) => acc.extend(
                x.iter().map(|a| Atom { location: a.location.clone(), weight: t * a.weight }),
            ),
            _ => unreachable!("operands validated against the same carrier"),
        }
    }
}

pub(crate) fn check_scale_factor(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("scale factor must be positive and finite, got {t}")))
    }
}

/// `x ⊕ y` under the cone's semigroup operation.
pub fn add(cone: &ConeDescriptor, x: &ConeElement, y: &ConeElement) -> Result<ConeElement> {
    cone.add(x, y)
}

/// The action `tx` of a positive scalar.
pub fn scale(cone: &ConeDescriptor, t: f64, x: &ConeElement) -> Result<ConeElement> {
    cone.scale(t, x)
}

/// The involution `x*`.
pub fn involve(cone: &ConeDescriptor, x: &ConeElement) -> Result<ConeElement> {
    cone.involve(x)
}

/// Non-negative weight function `u` on locations: a sum of tent bumps
/// `height · max(0, 1 − |y − center| / radius)`; an infinite radius gives a
/// constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightBump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub height: f64,
}

impl WeightBump {
    pub fn constant(height: f64) -> Self {
        WeightBump { center: Vec::new(), radius: f64::INFINITY, height }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        if self.radius.is_infinite() {
            return self.height;
        }
        let dist = self.center.iter().zip(y).map(|(c, v)| (c - v) * (c - v)).sum::<f64>().sqrt();
        self.height * (1.0 - dist / self.radius).max(0.0)
    }
}

/// Bounded semicharacters, one family per carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Character {
    /// `exp{i⟨u, x⟩}` on vectors.
    Fourier { u: Vec<f64> },
    /// `exp{−⟨λ, x⟩}`, `λ ≥ 0`, on the non-negative orthant.
    Exponential { lambda: Vec<f64> },
    /// `exp{i Σ u_k x(s_k)}` on grid functions with the sum operation.
    GridFourier { terms: Vec<(usize, f64)> },
    /// `exp{−Σ λ_k x(s_k)}`, `λ_k ≥ 0`, on non-negative step functions.
    GridLaplace { terms: Vec<(usize, f64)> },
    /// `Π 1{x(s_k) < a_k}` on grid functions with the max operation.
    Indicator { terms: Vec<(usize, f64)> },
    /// `exp{−∫ u dμ}` on measures.
    Laplace { weight: Vec<WeightBump> },
}

impl Character {
    pub fn fourier(u: Vec<f64>) -> Self {
        Character::Fourier { u }
    }

    pub fn indicator(index: usize, threshold: f64) -> Self {
        Character::Indicator { terms: vec![(index, threshold)] }
    }

    pub fn grid_fourier(index: usize, u: f64) -> Self {
        Character::GridFourier { terms: vec![(index, u)] }
    }

    pub fn grid_laplace(index: usize, lambda: f64) -> Self {
        Character::GridLaplace { terms: vec![(index, lambda)] }
    }

    pub fn laplace_constant(height: f64) -> Self {
        Character::Laplace { weight: vec![WeightBump::constant(height)] }
    }

    pub fn label(&self) -> String {
        let fmt = |v: &[f64]| v.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(",");
        let fmt_terms = |t: &[(usize, f64)]| {
            t.iter().map(|(k, a)| format!("{k}:{a}")).collect::<Vec<_>>().join(",")
        };
        match self {
            Character::Fourier { u } => format!("fourier({})", fmt(u)),
            Character::Exponential { lambda } => format!("exponential({})", fmt(lambda)),
            Character::GridFourier { terms } => format!("grid-fourier({})", fmt_terms(terms)),
            Character::GridLaplace { terms } => format!("grid-laplace({})", fmt_terms(terms)),
            Character::Indicator { terms } => format!("indicator({})", fmt_terms(terms)),
            Character::Laplace { weight } => format!(
                "laplace({})",
                weight
                    .iter()
                    .map(|w| format!("{}@[{}]r{}", w.height, fmt(&w.center), w.radius))
                    .collect::<Vec<_>>()
                    .join("+")
            ),
        }
    }

    /// Product of two characters of the same family.
    pub fn product(&self, other: &Character) -> Result<Character> {
        let add_vec = |a: &[f64], b: &[f64]| -> Result<Vec<f64>> {
            if a.len() != b.len() {
                return Err(Error::contract("character dimensions differ"));
            }
            Ok(a.iter().zip(b).map(|(x, y)| x + y).collect())
        };
        Ok(match (self, other) {
            (Character::Fourier { u }, Character::Fourier { u: v }) => Character::Fourier { u: add_vec(u, v)? },
            (Character::Exponential { lambda }, Character::Exponential { lambda: m }) => {
                Character::Exponential { lambda: add_vec(lambda, m)? }
            }
            (Character::GridFourier { terms }, Character::GridFourier { terms: t }) => {
                Character::GridFourier { terms: [terms.as_slice(), t].concat() }
            }
            (Character::GridLaplace { terms }, Character::GridLaplace { terms: t }) => {
                Character::GridLaplace { terms: [terms.as_slice(), t].concat() }
            }
            (Character::Indicator { terms }, Character::Indicator { terms: t }) => {
                Character::Indicator { terms: [terms.as_slice(), t].concat() }
            }
            (Character::Laplace { weight }, Character::Laplace { weight: w }) => {
                Character::Laplace { weight: [weight.as_slice(), w].concat() }
            }
            _ => return Err(Error::contract("cannot multiply characters of different families")),
        })
    }

    /// The phase `⟨u, x⟩` for Fourier-type characters, or the exponent
    /// `∫u dμ` / `⟨λ, x⟩` for Laplace-type ones.
    pub(crate) fn exponent(&self, x: &ConeElement) -> Result<f64> {
        match (self, x) {
            (Character::Fourier { u }, ConeElement::Euclidean(v)) => {
                check_len(u.len(), v.len())?;
                Ok(u.iter().zip(v).map(|(a, b)| a * b).sum())
            }
            (Character::Exponential { lambda }, ConeElement::Euclidean(v)) => {
                check_len(lambda.len(), v.len())?;
                if lambda.iter().any(|l| *l < 0.0) {
                    return Err(Error::domain("exponential character needs non-negative weights"));
                }
                if v.iter().any(|c| *c < 0.0) {
                    return Err(Error::domain("exponential character is bounded only on the non-negative orthant"));
                }
                Ok(lambda.iter().zip(v).map(|(a, b)| a * b).sum())
            }
            (Character::GridFourier { terms }, ConeElement::Grid(_) | ConeElement::Step(_)) => terms
                .iter()
                .map(|&(k, u)| observed_value(x, k).map(|v| u * v))
                .sum(),
            (Character::GridLaplace { terms }, ConeElement::Step(_)) => {
                if terms.iter().any(|(_, l)| *l < 0.0) {
                    return Err(Error::domain("grid laplace character needs non-negative weights"));
                }
                terms.iter().map(|&(k, l)| observed_value(x, k).map(|v| l * v.max(0.0))).sum()
            }
            (Character::Laplace { weight }, ConeElement::Measure(atoms)) => Ok(atoms
                .iter()
                .map(|a| a.weight * weight.iter().map(|w| w.eval(&a.location)).sum::<f64>())
                .sum()),
            _ => Err(Error::contract(format!(
                "character {} cannot be evaluated on a {} element",
                self.label(),
                x.variant_name()
            ))),
        }
    }

    /// `χ(x)`.
    pub fn eval(&self, x: &ConeElement) -> Result<Complex64> {
        match (self, x) {
            (Character::Indicator { terms }, ConeElement::Grid(_)) => {
                let mut inside = true;
                for &(k, a) in terms {
                    inside &= observed_value(x, k)? < a;
                }
                Ok(Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0))
            }
            (Character::Fourier { .. } | Character::GridFourier { .. }, _) => {
                let phase = self.exponent(x)?;
                Ok(Complex64::new(phase.cos(), phase.sin()))
            }
            _ => Ok(Complex64::new((-self.exponent(x)?).exp(), 0.0)),
        }
    }

    /// `1 − Re χ(x)` computed without cancellation near `χ = 1`.
    pub fn one_minus_re(&self, x: &ConeElement) -> Result<f64> {
        match self {
            Character::Indicator { .. } => Ok(1.0 - self.eval(x)?.re),
            Character::Fourier { .. } | Character::GridFourier { .. } => {
                let half = 0.5 * self.exponent(x)?;
                Ok(2.0 * half.sin() * half.sin())
            }
            _ => Ok(-(-self.exponent(x)?).exp_m1()),
        }
    }

    /// Times `t` at which `t ↦ χ(tx)` can jump under time reparametrization:
    /// `t s_k` crosses a jump time of `x`.
    pub fn orbit_breakpoints(&self, x: &ConeElement) -> Vec<f64> {
        match (self, x) {
            (Character::GridFourier { terms } | Character::GridLaplace { terms }, ConeElement::Step(f)) => terms
                .iter()
                .filter_map(|&(k, _)| f.grid.points().get(k).copied())
                .filter(|s| *s > 0.0)
                .flat_map(|s| f.jumps.iter().map(move |j| j.time / s))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Whether `χ` takes only real values.
    pub fn is_real(&self) -> bool {
        !matches!(self, Character::Fourier { .. } | Character::GridFourier { .. })
    }
}

/// Parses the [`Character::label`] syntax, e.g. `fourier(1,0)`,
/// `indicator(3:0.5)` or `laplace(1@[0.5]r0.25+2@[]rinf)`.
impl std::str::FromStr for Character {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad character '{s}'"));
        let s = s.trim();
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let list = |v: &str| -> Result<Vec<f64>> {
            if v.trim().is_empty() {
                return Ok(Vec::new());
            }
            v.split(',').map(num).collect()
        };
        let terms = || -> Result<Vec<(usize, f64)>> {
            args.split(',')
                .map(|t| {
                    let (k, v) = t.split_once(':').ok_or_else(bad)?;
                    Ok((k.trim().parse().map_err(|_| bad())?, num(v)?))
                })
                .collect()
        };
        Ok(match name.trim() {
            "fourier" => Character::Fourier { u: list(args)? },
            "exponential" => Character::Exponential { lambda: list(args)? },
            "grid-fourier" => Character::GridFourier { terms: terms()? },
            "grid-laplace" => Character::GridLaplace { terms: terms()? },
            "indicator" => Character::Indicator { terms: terms()? },
            "laplace" => Character::Laplace {
                weight: args
                    .split('+')
                    .map(|w| {
                        let (height, rest) = w.split_once("@[").ok_or_else(bad)?;
                        let (center, radius) = rest.split_once("]r").ok_or_else(bad)?;
                        Ok(WeightBump { center: list(center)?, radius: num(radius)?, height: num(height)? })
                    })
                    .collect::<Result<_>>()?,
            },
            _ => return Err(bad()),
        })
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::contract(format!("character dimension {expected} differs from element dimension {got}")))
    }
}

/// `x(s_k)` for grid and step functions.
fn observed_value(x: &ConeElement, k: usize) -> Result<f64> {
    let out_of_range = || Error::contract(format!("grid index {k} out of range"));
    match x {
        ConeElement::Grid(f) => f.values.get(k).copied().ok_or_else(out_of_range),
        ConeElement::Step(f) => f.grid.points().get(k).map(|s| f.value_at(*s)).ok_or_else(out_of_range),
        _ => Err(Error::contract(format!("{} element has no grid values", x.variant_name()))),
    }
}

/// `χ(x)` for a character compatible with the element.
pub fn char_eval(chi: &Character, x: &ConeElement) -> Result<Complex64> {
    chi.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn max_grid(grid: &Arc<TimeGrid>) -> ConeDescriptor {
        ConeDescriptor {
            op: SemigroupOp::PointwiseMax,
            scaling: ScalingKind::Multiplicative,
            involution: Involution::Identity,
            carrier: Carrier::Grid(Arc::clone(grid)),
            admissible: AlphaAdmissibility::ANY,
            nonnegative: true,
        }
    }

    fn time_stable(grid: &Arc<TimeGrid>) -> ConeDescriptor {
        ConeDescriptor {
            op: SemigroupOp::VectorSum,
            scaling: ScalingKind::TimeReparametrization,
            involution: Involution::Negation,
            carrier: Carrier::Steps(Arc::clone(grid)),
            admissible: AlphaAdmissibility::ANY,
            nonnegative: false,
        }
    }

    fn v(x: &[f64]) -> ConeElement {
        ConeElement::Euclidean(x.to_vec())
    }

    #[test]
    fn euclidean_addition_and_identity() {
        let c = euclid(2);
        assert_eq!(c.add(&v(&[1.0, 3.0]), &v(&[2.0, -1.0])).unwrap(), v(&[3.0, 2.0]));
        assert_eq!(c.add(&v(&[1.0, 3.0]), &c.neutral()).unwrap(), v(&[1.0, 3.0]));
    }

    #[test]
    fn max_cone_addition_is_pointwise_maximum() {
        let grid = Arc::new(TimeGrid::new(vec![0.0, 1.0]).unwrap());
        let c = max_grid(&grid);
        let x = ConeElement::grid(&grid, vec![0.2, 0.7]);
        let y = ConeElement::grid(&grid, vec![0.5, 0.1]);
        assert_eq!(c.add(&x, &y).unwrap(), ConeElement::grid(&grid, vec![0.5, 0.7]));
        assert_eq!(c.add(&x, &c.neutral()).unwrap(), x);
    }

    #[test]
    fn variant_mismatch_is_a_contract_violation() {
        let grid = Arc::new(TimeGrid::integers(2));
        let c = euclid(2);
        let f = ConeElement::grid(&grid, vec![0.0, 1.0, 2.0]);
        assert!(matches!(c.add(&v(&[1.0, 0.0]), &f), Err(Error::ContractViolation(_))));
        assert!(matches!(c.add(&v(&[1.0]), &v(&[1.0, 0.0])), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn mixing_grids_is_rejected() {
        let g1 = Arc::new(TimeGrid::integers(2));
        let g2 = Arc::new(TimeGrid::new(vec![0.0, 0.5, 2.0]).unwrap());
        let c = max_grid(&g1);
        let x = ConeElement::grid(&g2, vec![0.0, 1.0, 1.0]);
        assert!(matches!(c.validate(&x), Err(Error::ContractViolation(_))));
        // an equal grid held in a different allocation is the same grid
        let g3 = Arc::new(TimeGrid::integers(2));
        assert!(c.validate(&ConeElement::grid(&g3, vec![0.0, 1.0, 1.0])).is_ok());
    }

    #[test]
    fn max_cone_rejects_negative_values() {
        let grid = Arc::new(TimeGrid::integers(1));
        let c = max_grid(&grid);
        assert!(matches!(c.validate(&ConeElement::grid(&grid, vec![0.0, -1.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn multiplicative_scaling() {
        assert_eq!(euclid(2).scale(2.0, &v(&[1.0, 3.0])).unwrap(), v(&[2.0, 6.0]));
        for t in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(euclid(2).scale(t, &v(&[1.0, 3.0])), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn nilpotent_operator_scaling_at_e() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let c = ConeDescriptor { scaling: ScalingKind::Operator(a), ..euclid(2) };
        let y = c.scale(std::f64::consts::E, &v(&[0.0, 1.0])).unwrap();
        assert!(y.relative_distance(&v(&[1.0, 1.0])).unwrap() < 1e-15);
    }

    #[test]
    fn time_reparametrization_of_a_step() {
        let grid = Arc::new(TimeGrid::new(vec![0.0, 0.25, 0.5, 0.75, 1.0, 2.0]).unwrap());
        let c = time_stable(&grid);
        // x = 1_{[1, ∞)}
        let x = ConeElement::step(&grid, vec![Jump { time: 1.0, size: 1.0 }]);
        let y = c.scale(2.0, &x).unwrap();
        assert_eq!(y.observed().unwrap(), vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(y, ConeElement::step(&grid, vec![Jump { time: 0.5, size: 1.0 }]));
    }

    #[test]
    fn step_function_conventions() {
        let grid = Arc::new(TimeGrid::new(vec![1.0, 2.0, 4.0]).unwrap());
        let f = StepFunction {
            grid: Arc::clone(&grid),
            jumps: vec![Jump { time: 2.0, size: 1.0 }, Jump { time: 1.0, size: 5.0 }, Jump { time: 2.0, size: -6.0 }],
        };
        assert_eq!(f.value_at(0.5), 0.0);
        assert_eq!(f.value_at(1.0), 5.0);
        assert_eq!(f.value_at(1.999), 5.0);
        assert_eq!(f.value_at(100.0), 0.0);
        assert_eq!(f.observe(), vec![5.0, 0.0, 0.0]);
        assert_eq!(f.merged(), vec![Jump { time: 1.0, size: 5.0 }, Jump { time: 2.0, size: -5.0 }]);
        let c = time_stable(&grid);
        assert!(c.validate(&ConeElement::step(&grid, vec![Jump { time: 0.0, size: 1.0 }])).is_err());
        let x = ConeElement::Step(f);
        assert_eq!(x.norm(), 5.0);
        let back = c.scale(0.5, &c.scale(2.0, &x).unwrap()).unwrap();
        assert!(back.approx_eq(&x));
        let shifted = c.scale(1.001, &x).unwrap();
        assert!(!shifted.approx_eq(&x));
    }

    #[test]
    fn involutions() {
        let c = euclid(2);
        assert_eq!(c.involve(&v(&[1.0, -2.0])).unwrap(), v(&[-1.0, 2.0]));
        assert_eq!(c.involve(&c.neutral()).unwrap(), c.neutral());
        let grid = Arc::new(TimeGrid::integers(1));
        let m = max_grid(&grid);
        let x = ConeElement::grid(&grid, vec![0.3, 0.9]);
        assert_eq!(m.involve(&x).unwrap(), x);
    }

    #[test]
    fn character_examples() {
        assert_eq!(char_eval(&Character::fourier(vec![0.0, 0.0]), &v(&[3.0, -7.0])).unwrap(), Complex64::new(1.0, 0.0));

        let grid = Arc::new(TimeGrid::integers(1));
        let chi = Character::indicator(1, 1.0);
        assert_eq!(chi.eval(&ConeElement::grid(&grid, vec![0.0, 0.5])).unwrap().re, 1.0);
        assert_eq!(chi.eval(&ConeElement::grid(&grid, vec![0.0, 1.5])).unwrap().re, 0.0);

        let mu = ConeElement::Measure(vec![Atom::new(vec![0.5], 2.0)]);
        let lap = Character::laplace_constant(1.0);
        assert!((lap.eval(&mu).unwrap().re - 0.1353352832366127).abs() < 1e-15);
        let bump = Character::Laplace { weight: vec![WeightBump { center: vec![0.5], radius: 1.0, height: 1.0 }] };
        assert!((bump.eval(&mu).unwrap().re - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn incompatible_character_is_a_contract_violation() {
        let mu = ConeElement::Measure(vec![Atom::new(vec![0.5], 2.0)]);
        assert!(matches!(Character::fourier(vec![1.0]).eval(&mu), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn stable_one_minus_re_near_identity() {
        let chi = Character::fourier(vec![1.0]);
        let x = v(&[1e-9]);
        assert!((chi.one_minus_re(&x).unwrap() / 5e-19 - 1.0).abs() < 1e-6);
        let lap = Character::Exponential { lambda: vec![1.0] };
        assert!((lap.one_minus_re(&x).unwrap() / 1e-9 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn products_multiply_values() {
        let grid = Arc::new(TimeGrid::integers(2));
        let x = ConeElement::grid(&grid, vec![0.0, 0.4, 2.0]);
        let a = Character::indicator(1, 1.0);
        let b = Character::indicator(2, 3.0);
        let ab = a.product(&b).unwrap();
        assert_eq!(ab.eval(&x).unwrap(), a.eval(&x).unwrap() * b.eval(&x).unwrap());

        let f = Character::fourier(vec![0.3, -1.0]);
        let g = Character::fourier(vec![2.0, 0.5]);
        let y = v(&[1.1, 0.7]);
        let diff = f.product(&g).unwrap().eval(&y).unwrap() - f.eval(&y).unwrap() * g.eval(&y).unwrap();
        assert!(diff.norm() < 1e-15);
        assert!(f.product(&a).is_err());
    }

    #[test]
    fn measure_equality_merges_atoms() {
        let a = ConeElement::Measure(vec![
            Atom::new(vec![1.0], 0.5),
            Atom::new(vec![0.0], 1.0),
            Atom::new(vec![1.0], 0.5),
        ]);
        let b = ConeElement::Measure(vec![Atom::new(vec![0.0], 1.0), Atom::new(vec![1.0], 1.0)]);
        assert!(a.approx_eq(&b));
        let c = ConeElement::Measure(vec![Atom::new(vec![0.0], 1.0), Atom::new(vec![2.0], 1.0)]);
        assert!(!a.approx_eq(&c));
    }
}

//! The concrete cones: Euclidean sums, operator scaling, max-stable grid
//! functions, time-stable grid functions and atomic measures.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cone::{
    AlphaAdmissibility, Carrier, Character, ConeDescriptor, ConeElement, Involution, ScalingKind, SemigroupOp,
    TimeGrid, WeightBump,
};
use crate::expm::Matrix;
use crate::polar::{CharacterTransversal, Transversal};
use crate::spectral::{PointMass, RandomAtom, RandomStep, SpectralSampler, UniformSphere};
use crate::{Error, Result};

pub const DEFAULT_PROBES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeKind {
    EuclideanSum,
    Operator,
    MaxGrid,
    TimeStable,
    AtomicMeasure,
}

impl ConeKind {
    pub const ALL: [ConeKind; 5] =
        [ConeKind::EuclideanSum, ConeKind::Operator, ConeKind::MaxGrid, ConeKind::TimeStable, ConeKind::AtomicMeasure];

    pub fn name(&self) -> &'static str {
        match self {
            ConeKind::EuclideanSum => "euclidean-sum",
            ConeKind::Operator => "operator",
            ConeKind::MaxGrid => "max-grid",
            ConeKind::TimeStable => "time-stable",
            ConeKind::AtomicMeasure => "atomic-measure",
        }
    }
}

impl fmt::Display for ConeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown cone kind '{s}'")))
    }
}

/// Parameters of a cone; only the fields relevant to `kind` are read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub kind: ConeKind,
    /// Dimension of vectors or of atom locations.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub matrix: Option<Matrix>,
    /// Probe characters; `None` selects the default family.
    #[serde(default)]
    pub probes: Option<Vec<Character>>,
    /// Time-stable cone restricted to non-negative functions with the
    /// identical involution.
    #[serde(default)]
    pub nonnegative: bool,
}

impl ConeSpec {
    fn bare(kind: ConeKind) -> Self {
        ConeSpec { kind, dim: None, grid: None, matrix: None, probes: None, nonnegative: false }
    }

    pub fn euclidean(dim: usize) -> Self {
        ConeSpec { dim: Some(dim), ..Self::bare(ConeKind::EuclideanSum) }
    }

    pub fn operator(matrix: Matrix) -> Self {
        ConeSpec { dim: Some(matrix.dim()), matrix: Some(matrix), ..Self::bare(ConeKind::Operator) }
    }

    pub fn max_grid(grid: Vec<f64>) -> Self {
        ConeSpec { grid: Some(grid), ..Self::bare(ConeKind::MaxGrid) }
    }

    pub fn time_stable(grid: Vec<f64>) -> Self {
        ConeSpec { grid: Some(grid), ..Self::bare(ConeKind::TimeStable) }
    }

    pub fn atomic_measure(dim: usize) -> Self {
        ConeSpec { dim: Some(dim), ..Self::bare(ConeKind::AtomicMeasure) }
    }

    pub fn with_probes(mut self, probes: Vec<Character>) -> Self {
        self.probes = Some(probes);
        self
    }

    pub fn with_nonnegative(mut self, nonnegative: bool) -> Self {
        self.nonnegative = nonnegative;
        self
    }
}

/// A fully wired cone.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub kind: ConeKind,
    pub descriptor: ConeDescriptor,
    pub transversal: Transversal,
    pub probes: Vec<Character>,
}

/// Frequencies `1/8, …, 5` used for the default probes.
const MAGNITUDES: [f64; 16] =
    [0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0];

fn fourier_probes(dim: usize) -> Vec<Character> {
    MAGNITUDES
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let mut u = vec![0.0; dim];
            u[k % dim] += m;
            if dim > 1 {
                u[(k + 1) % dim] += 0.5 * m;
            }
            Character::fourier(u)
        })
        .collect()
}

/// Up to four spread-out grid indices, skipping the first point when asked.
fn probe_indices(n: usize, skip_first: bool) -> Vec<usize> {
    let lo = usize::from(skip_first && n > 1);
    let span = n - 1 - lo;
    let mut idx: Vec<usize> = (0..4).map(|q| lo + (span * (q + 1)).div_ceil(4)).collect();
    idx.dedup();
    idx
}

fn indicator_probes(n: usize) -> Vec<Character> {
    let idx = probe_indices(n, false);
    [0.5, 1.0, 2.0, 4.0]
        .iter()
        .flat_map(|a| idx.iter().map(move |s| Character::indicator(*s, *a)))
        .collect()
}

fn grid_fourier_probes(n: usize) -> Vec<Character> {
    let idx = probe_indices(n, true);
    [0.25, 0.5, 1.0, 2.0]
        .iter()
        .flat_map(|u| idx.iter().map(move |s| Character::grid_fourier(*s, *u)))
        .collect()
}

fn grid_laplace_probes(n: usize) -> Vec<Character> {
    let idx = probe_indices(n, true);
    [0.25, 0.5, 1.0, 2.0]
        .iter()
        .flat_map(|l| idx.iter().map(move |s| Character::grid_laplace(*s, *l)))
        .collect()
}

fn laplace_probes(dim: usize) -> Vec<Character> {
    let mut out: Vec<Character> = [0.25, 0.5, 1.0, 2.0].iter().map(|h| Character::laplace_constant(*h)).collect();
    for k in 0..12 {
        let center = (0..dim).map(|i| ((k + i) % 4) as f64 / 4.0 + 0.125).collect();
        let height = [0.5, 1.0, 2.0][k % 3];
        out.push(Character::Laplace { weight: vec![WeightBump { center, radius: 0.5, height }] });
    }
    out
}

fn positive(dim: Option<usize>, what: &str) -> Result<usize> {
    match dim {
        Some(d) if d > 0 => Ok(d),
        _ => Err(Error::Construction(format!("{what} needs a positive dimension"))),
    }
}

fn time_grid(spec: &ConeSpec) -> Result<Arc<TimeGrid>> {
    let points = spec.grid.clone().ok_or_else(|| Error::Construction("grid cone needs a time grid".into()))?;
    if points.is_empty() {
        return Err(Error::Construction("time grid is empty".into()));
    }
    TimeGrid::new(points).map(Arc::new).map_err(|e| Error::Construction(e.to_string()))
}

fn check_probe(desc: &ConeDescriptor, chi: &Character) -> Result<()> {
    let bad = |msg: String| Err(Error::Construction(format!("probe {}: {msg}", chi.label())));
    let grid_len = desc.grid().map_or(0, |g| g.len());
    match (&desc.carrier, chi) {
        (Carrier::Euclidean { dim }, Character::Fourier { u }) if u.len() == *dim => Ok(()),
        (Carrier::Euclidean { dim }, Character::Exponential { lambda }) if lambda.len() == *dim => Ok(()),
        (Carrier::Grid(_), Character::Indicator { terms }) if desc.op == SemigroupOp::PointwiseMax => {
            for (s, a) in terms {
                if *s >= grid_len {
                    return bad(format!("grid index {s} out of range"));
                }
                if !(*a > 0.0 && a.is_finite()) {
                    return bad("indicator thresholds must be positive".into());
                }
            }
            Ok(())
        }
        // complex characters need the negation involution; real ones need
        // non-negative functions to stay bounded
        (Carrier::Steps(_), Character::GridFourier { terms }) if !desc.nonnegative => {
            match terms.iter().find(|(s, u)| *s >= grid_len || !u.is_finite()) {
                Some((s, _)) => bad(format!("invalid term at grid index {s}")),
                None => Ok(()),
            }
        }
        (Carrier::Steps(_), Character::GridLaplace { terms }) if desc.nonnegative => {
            match terms.iter().find(|(s, l)| *s >= grid_len || !(*l >= 0.0 && l.is_finite())) {
                Some((s, _)) => bad(format!("invalid term at grid index {s}")),
                None => Ok(()),
            }
        }
        (Carrier::Measure { dim }, Character::Laplace { weight }) => {
            for w in weight {
                if !(w.height >= 0.0 && w.height.is_finite() && w.radius > 0.0) {
                    return bad("laplace weights must be non-negative with positive radius".into());
                }
                if w.radius.is_finite() && w.center.len() != *dim {
                    return bad("bump center has the wrong dimension".into());
                }
            }
            Ok(())
        }
        _ => bad("incompatible with this cone".into()),
    }
}

/// Builds the descriptor, transversal and probe set for `spec`.
pub fn make_cone(spec: &ConeSpec) -> Result<Cone> {
    let (descriptor, transversal, default_probes) = match spec.kind {
        ConeKind::EuclideanSum => {
            let dim = positive(spec.dim, "euclidean cone")?;
            let desc = ConeDescriptor {
                op: SemigroupOp::VectorSum,
                scaling: ScalingKind::Multiplicative,
                involution: Involution::Negation,
                carrier: Carrier::Euclidean { dim },
                admissible: AlphaAdmissibility::SUM,
                nonnegative: false,
            };
            (desc, Transversal::Norm, fourier_probes(dim))
        }
        ConeKind::Operator => {
            let a = spec.matrix.clone().ok_or_else(|| Error::Construction("operator cone needs a matrix".into()))?;
            if a.dim() == 0 || spec.dim.is_some_and(|d| d != a.dim()) {
                return Err(Error::Construction("matrix dimension does not match the cone".into()));
            }
            if !a.is_non_degenerate() {
                return Err(Error::Construction(format!(
                    "matrix is degenerate (|det A| = {:e})",
                    a.determinant().abs()
                )));
            }
            let dim = a.dim();
            let axes = (0..dim)
                .map(|i| {
                    let mut u = vec![0.0; dim];
                    u[i] = 1.0;
                    Character::fourier(u)
                })
                .collect();
            let desc = ConeDescriptor {
                op: SemigroupOp::VectorSum,
                scaling: ScalingKind::Operator(a),
                involution: Involution::Negation,
                carrier: Carrier::Euclidean { dim },
                admissible: AlphaAdmissibility::SUM,
                nonnegative: false,
            };
            (desc, Transversal::Characters(CharacterTransversal::new(axes)), fourier_probes(dim))
        }
        ConeKind::MaxGrid => {
            let grid = time_grid(spec)?;
            let n = grid.len();
            let desc = ConeDescriptor {
                op: SemigroupOp::PointwiseMax,
                scaling: ScalingKind::Multiplicative,
                involution: Involution::Identity,
                carrier: Carrier::Grid(grid),
                admissible: AlphaAdmissibility::ANY,
                nonnegative: true,
            };
            (desc, Transversal::Norm, indicator_probes(n))
        }
        ConeKind::TimeStable => {
            let grid = time_grid(spec)?;
            let n = grid.len();
            let nonnegative = spec.nonnegative;
            let characters = [1.0, std::f64::consts::SQRT_2]
                .iter()
                .flat_map(|u| {
                    (0..n).map(move |k| {
                        if nonnegative {
                            Character::grid_laplace(k, *u)
                        } else {
                            Character::grid_fourier(k, *u)
                        }
                    })
                })
                .collect();
            let desc = ConeDescriptor {
                op: SemigroupOp::VectorSum,
                scaling: ScalingKind::TimeReparametrization,
                involution: if spec.nonnegative { Involution::Identity } else { Involution::Negation },
                carrier: Carrier::Steps(grid),
                admissible: AlphaAdmissibility::ANY,
                nonnegative: spec.nonnegative,
            };
            let probes = if nonnegative { grid_laplace_probes(n) } else { grid_fourier_probes(n) };
            (desc, Transversal::Characters(CharacterTransversal::new(characters)), probes)
        }
        ConeKind::AtomicMeasure => {
            let dim = positive(spec.dim, "measure cone")?;
            let desc = ConeDescriptor {
                op: SemigroupOp::MeasureSum,
                scaling: ScalingKind::WeightScaling,
                involution: Involution::Identity,
                carrier: Carrier::Measure { dim },
                admissible: AlphaAdmissibility { asymmetric_upper: 1.0, symmetric_upper: 1.0 },
                nonnegative: true,
            };
            (desc, Transversal::Norm, laplace_probes(dim))
        }
    };
    let probes = spec.probes.clone().unwrap_or(default_probes);
    if probes.is_empty() {
        return Err(Error::Construction("probe set is empty".into()));
    }
    for chi in &probes {
        check_probe(&descriptor, chi)?;
    }
    Ok(Cone { kind: spec.kind, descriptor, transversal, probes })
}

impl Cone {
    pub fn dim(&self) -> usize {
        match &self.descriptor.carrier {
            Carrier::Euclidean { dim } | Carrier::Measure { dim } => *dim,
            Carrier::Grid(g) | Carrier::Steps(g) => g.len(),
        }
    }

    /// The α the cone's examples are usually stated for: 1 for time-stable
    /// processes, unrestricted otherwise.
    pub fn canonical_alpha(&self) -> Option<f64> {
        (self.kind == ConeKind::TimeStable).then_some(1.0)
    }

    /// Default spectral law: uniform on the sphere (or `±1`) for vector
    /// cones when `symmetric`, a fixed unit mark otherwise; `ε ≡ 1` on the
    /// max cone; a unit step with uniform jump time on the time-stable cone;
    /// a unit atom at a uniform location for measures.
    pub fn default_spectral(&self, symmetric: bool) -> Arc<dyn SpectralSampler> {
        match &self.descriptor.carrier {
            Carrier::Euclidean { dim } if symmetric => Arc::new(UniformSphere { dim: *dim }),
            Carrier::Euclidean { dim } => {
                Arc::new(PointMass(ConeElement::Euclidean(vec![1.0 / (*dim as f64).sqrt(); *dim])))
            }
            Carrier::Grid(grid) => Arc::new(PointMass(ConeElement::grid(grid, vec![1.0; grid.len()]))),
            Carrier::Steps(grid) => {
                let p = grid.points();
                let hi = p[p.len() - 1].max(1.0);
                let lo = p.iter().copied().find(|s| *s > 0.0).unwrap_or(hi);
                Arc::new(RandomStep {
                    grid: Arc::clone(grid),
                    jump_range: (lo, hi),
                    height: 1.0,
                    signed: symmetric && !self.descriptor.nonnegative,
                })
            }
            Carrier::Measure { dim } => Arc::new(RandomAtom { dim: *dim, range: (0.0, 1.0), weight: 1.0 }),
        }
    }
}

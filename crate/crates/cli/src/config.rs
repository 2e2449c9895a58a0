//! Run configuration: TOML file sections, command-line overrides and the
//! resolved form that is hashed into every output.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use lepage_core::cone::Character;
use lepage_core::expm::Matrix;
use lepage_core::spectral::SpectralSampler;
use lepage_core::{make_cone, Cone, ConeKind, ConeSpec, RadialLaw};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeSection {
    pub kind: String,
    pub dim: Option<usize>,
    pub grid: Option<Vec<f64>>,
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Character labels, e.g. `fourier(0.5)`; empty selects the defaults.
    pub probes: Vec<String>,
    pub nonnegative: bool,
}

impl Default for ConeSection {
    fn default() -> Self {
        ConeSection {
            kind: ConeKind::EuclideanSum.name().into(),
            dim: None,
            grid: None,
            matrix: None,
            probes: Vec::new(),
            nonnegative: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LepageSection {
    pub alpha: f64,
    pub r: f64,
    /// Realizations written by `sample`.
    pub n: usize,
    pub symmetric: bool,
}

impl Default for LepageSection {
    fn default() -> Self {
        LepageSection { alpha: 0.7, r: 1000.0, n: 1000, symmetric: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub suite: String,
    /// Realizations per side of each test.
    pub n: usize,
    pub resamples: usize,
    pub level: f64,
    pub a: f64,
    pub b: f64,
    pub phi_scalings: Vec<f64>,
    pub homogeneity_runs: usize,
    pub homogeneity_scalings: Vec<f64>,
    /// Radial shells `[lo, hi)`; by default two shells just above the
    /// truncation cutoff.
    pub homogeneity_shells: Vec<[f64; 2]>,
    /// Test hook: breaks the tested identity on purpose.
    pub mutate: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            suite: "all".into(),
            n: 20_000,
            resamples: 200,
            level: 0.01,
            a: 1.0,
            b: 1.0,
            phi_scalings: vec![0.5, 2.0],
            homogeneity_runs: 10_000,
            homogeneity_scalings: vec![0.5, 2.0, 3.0],
            homogeneity_shells: Vec::new(),
            mutate: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeSection {
    pub input: Option<PathBuf>,
    /// Read `(angular, radial)` rows and write elements instead.
    pub compose: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub cone: ConeSection,
    pub lepage: LepageSection,
    pub verify: VerifySection,
    pub decompose: DecomposeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            out: PathBuf::from("lepage-out"),
            cone: ConeSection::default(),
            lepage: LepageSection::default(),
            verify: VerifySection::default(),
            decompose: DecomposeSection::default(),
        }
    }
}

/// Values given on the command line or through the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub cone: Option<String>,
    pub dim: Option<usize>,
    pub grid: Option<String>,
    pub matrix: Option<String>,
    pub alpha: Option<f64>,
    pub r: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub probes: Option<String>,
    pub out: Option<PathBuf>,
    pub suite: Option<String>,
    pub mutate: bool,
    pub input: Option<PathBuf>,
    pub compose: bool,
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad number '{v}' in --{what}"))))
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies overrides; `n` goes to the section of the running command.
    pub fn apply(&mut self, o: &Overrides, command: &str) -> Result<()> {
        if let Some(k) = &o.cone {
            self.cone.kind = k.clone();
        }
        if let Some(d) = o.dim {
            self.cone.dim = Some(d);
        }
        if let Some(g) = &o.grid {
            self.cone.grid = Some(parse_floats(g, "grid")?);
        }
        if let Some(m) = &o.matrix {
            self.cone.matrix = Some(m.split(';').map(|row| parse_floats(row, "matrix")).collect::<Result<_>>()?);
        }
        if let Some(p) = &o.probes {
            self.cone.probes = p.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        }
        if let Some(a) = o.alpha {
            self.lepage.alpha = a;
        }
        if let Some(r) = o.r {
            self.lepage.r = r;
        }
        if let Some(n) = o.n {
            match command {
                "verify" => self.verify.n = n,
                _ => self.lepage.n = n,
            }
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(s) = &o.suite {
            self.verify.suite = s.clone();
        }
        self.verify.mutate |= o.mutate;
        if let Some(i) = &o.input {
            self.decompose.input = Some(i.clone());
        }
        self.decompose.compose |= o.compose;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// SHA-256 of the resolved configuration, hex encoded. The output
    /// directory is left out so reruns elsewhere hash the same.
    pub fn hash(&self) -> String {
        let keyed = RunConfig { out: PathBuf::new(), ..self.clone() };
        Sha256::digest(keyed.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn law(&self) -> Result<RadialLaw> {
        Ok(RadialLaw::new(self.lepage.alpha)?)
    }

    pub fn build_cone(&self) -> Result<Cone> {
        let c = &self.cone;
        let kind: ConeKind = c.kind.parse()?;
        let grid = || c.grid.clone().unwrap_or_else(|| (0..=10).map(f64::from).collect());
        let mut spec = match kind {
            ConeKind::EuclideanSum => ConeSpec::euclidean(c.dim.unwrap_or(1)),
            ConeKind::Operator => {
                let rows = c.matrix.as_ref().ok_or_else(|| CliError::Config("operator cone needs a matrix".into()))?;
                let mut spec = ConeSpec::operator(Matrix::from_rows(rows)?);
                spec.dim = c.dim.or(spec.dim);
                spec
            }
            ConeKind::MaxGrid => ConeSpec::max_grid(grid()),
            ConeKind::TimeStable => ConeSpec::time_stable(grid()).with_nonnegative(c.nonnegative),
            ConeKind::AtomicMeasure => ConeSpec::atomic_measure(c.dim.unwrap_or(1)),
        };
        if !c.probes.is_empty() {
            spec = spec.with_probes(c.probes.iter().map(|p| p.parse::<Character>()).collect::<Result<_, _>>()?);
        }
        Ok(make_cone(&spec)?)
    }

    pub fn spectral(&self, cone: &Cone) -> Arc<dyn SpectralSampler> {
        cone.default_spectral(self.lepage.symmetric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides() {
        let text = "seed = 5\n[cone]\nkind = \"max-grid\"\ngrid = [0.5, 1.0]\n[lepage]\nalpha = 1.5\n";
        let mut cfg: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.lepage.r, 1000.0);
        let o = Overrides { alpha: Some(0.5), n: Some(7), matrix: Some("1,0;0,2".into()), ..Overrides::default() };
        cfg.apply(&o, "verify").unwrap();
        assert_eq!((cfg.lepage.alpha, cfg.verify.n, cfg.lepage.n), (0.5, 7, 1000));
        assert_eq!(cfg.cone.matrix, Some(vec![vec![1.0, 0.0], vec![0.0, 2.0]]));
        assert_eq!(cfg.build_cone().unwrap().dim(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[lepage]\nbeta = 1\n").is_err());
    }

    #[test]
    fn hash_tracks_the_resolved_config() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}

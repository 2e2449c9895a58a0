//! Column encoding of cone elements.
//!
//! Vectors and grid functions use one column per coordinate (`x0..`, `v0..`).
//! Step functions add their exact jumps as `time:size;...` after the observed
//! values. Measures are written as total mass plus `weight@x0:x1;...`.

use lepage_core::cone::{Atom, Carrier, ConeElement, Jump};
use lepage_core::Cone;

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn header(cone: &Cone) -> Vec<String> {
    match &cone.descriptor.carrier {
        Carrier::Euclidean { dim } => (0..*dim).map(|i| format!("x{i}")).collect(),
        Carrier::Grid(g) => (0..g.len()).map(|i| format!("v{i}")).collect(),
        Carrier::Steps(g) => (0..g.len()).map(|i| format!("v{i}")).chain(["jumps".to_string()]).collect(),
        Carrier::Measure { .. } => vec!["total_mass".into(), "atoms".into()],
    }
}

pub fn encode(x: &ConeElement) -> Vec<String> {
    match x {
        ConeElement::Euclidean(v) => v.iter().copied().map(float).collect(),
        ConeElement::Grid(f) => f.values.iter().copied().map(float).collect(),
        ConeElement::Step(f) => {
            let mut out: Vec<String> = f.observe().into_iter().map(float).collect();
            let jumps: Vec<String> = f.merged().iter().map(|j| format!("{}:{}", float(j.time), float(j.size))).collect();
            out.push(jumps.join(";"));
            out
        }
        ConeElement::Measure(atoms) => {
            let merged = x.merged_atoms().unwrap_or_else(|| atoms.clone());
            let enc: Vec<String> = merged
                .iter()
                .map(|a| {
                    let loc: Vec<String> = a.location.iter().copied().map(float).collect();
                    format!("{}@{}", float(a.weight), loc.join(":"))
                })
                .collect();
            vec![float(x.total_mass().unwrap_or(0.0)), enc.join(";")]
        }
    }
}

fn num(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("bad number '{s}'"))
}

/// Reads an element from the named columns of one record; `get` returns the
/// field for a column name.
pub fn decode<'a>(cone: &Cone, get: impl Fn(&str) -> Option<&'a str>) -> Result<ConeElement, String> {
    let field = |name: &str| get(name).ok_or_else(|| format!("missing column {name}"));
    let coords = |prefix: &str, n: usize| -> Result<Vec<f64>, String> {
        (0..n).map(|i| num(field(&format!("{prefix}{i}"))?)).collect()
    };
    match &cone.descriptor.carrier {
        Carrier::Euclidean { dim } => Ok(ConeElement::Euclidean(coords("x", *dim)?)),
        Carrier::Grid(g) => Ok(ConeElement::grid(g, coords("v", g.len())?)),
        Carrier::Steps(g) => {
            let text = field("jumps")?;
            let jumps = text
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    let (t, v) = s.split_once(':').ok_or_else(|| format!("bad jump '{s}'"))?;
                    Ok(Jump { time: num(t)?, size: num(v)? })
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(ConeElement::step(g, jumps))
        }
        Carrier::Measure { dim } => {
            let text = field("atoms")?;
            let atoms = text
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    let (w, loc) = s.split_once('@').ok_or_else(|| format!("bad atom '{s}'"))?;
                    let location = loc.split(':').map(num).collect::<Result<Vec<_>, _>>()?;
                    if location.len() != *dim {
                        return Err(format!("atom '{s}' has dimension {}, expected {dim}", location.len()));
                    }
                    Ok(Atom::new(location, num(w)?))
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(ConeElement::Measure(atoms))
        }
    }
    .and_then(|x| cone.descriptor.validate(&x).map(|_| x).map_err(|e| e.to_string()))
}

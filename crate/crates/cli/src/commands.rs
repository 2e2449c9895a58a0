//! The `sample`, `verify` and `decompose` subcommands.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use lepage_core::cones::ConeKind;
use lepage_core::lepage::IntegralBudget;
use lepage_core::rng::side_stream;
use lepage_core::verify::{
    eps_condition_test, empirical_homogeneity_test, lepage_vs_cms_test, phi_homogeneity_test, stability_test, TestSet,
};
use lepage_core::{compose, decompose, Cone, PolarPair, Series, TestBudget, VerificationReport};

use crate::codec;
use crate::config::{RunConfig, VERSION};
use crate::error::{CliError, Result};

pub const SUITES: [&str; 6] = ["stability", "phi", "cms", "homogeneity", "eps", "all"];

fn prepare_out(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let path = cfg.out.join("config.toml");
    fs::write(&path, cfg.to_toml()).map_err(|e| CliError::io(path, e))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn write_rows(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| CliError::csv(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Writes `N` realizations to `samples.csv`, one row per stream.
pub fn sample(cfg: &RunConfig) -> Result<PathBuf> {
    let cone = cfg.build_cone()?;
    let law = cfg.law()?;
    let spectral = cfg.spectral(&cone);
    let series = Series::new(&cone.descriptor, law, spectral.as_ref(), cfg.lepage.r)?;
    let values = series.sample_values(cfg.seed, 0, cfg.lepage.n)?;
    prepare_out(cfg)?;
    let hash = cfg.hash();
    let mut header = strings(&["version", "config_hash", "seed", "stream", "run", "count", "rejected", "bias_bound"]);
    header.extend(codec::header(&cone));
    let rows = values.iter().enumerate().map(|(i, v)| {
        let mut row = vec![
            VERSION.to_string(),
            hash.clone(),
            cfg.seed.to_string(),
            side_stream(0, i as u64).to_string(),
            i.to_string(),
            v.count.to_string(),
            v.rejected.to_string(),
            v.bias_bound.value.map(codec::float).unwrap_or_default(),
        ];
        row.extend(codec::encode(&v.value));
        row
    });
    let path = cfg.out.join("samples.csv");
    write_rows(&path, &header, rows)?;
    Ok(path)
}

fn default_shells() -> Vec<[f64; 2]> {
    vec![[1.0, 2.0], [2.0, 4.0]]
}

fn run_suite(cfg: &RunConfig, cone: &Cone, name: &str) -> Result<Vec<(String, VerificationReport)>> {
    let law = cfg.law()?;
    let spectral = cfg.spectral(cone);
    let v = &cfg.verify;
    let budget = TestBudget { n: v.n, r: cfg.lepage.r, seed: cfg.seed, resamples: v.resamples, level: v.level };
    let desc = &cone.descriptor;
    Ok(match name {
        "stability" => {
            vec![("stability".into(), stability_test(desc, &law, spectral.as_ref(), v.a, v.b, &cone.probes, &budget, v.mutate)?)]
        }
        "phi" => v
            .phi_scalings
            .iter()
            .map(|a| {
                let report = phi_homogeneity_test(desc, &law, spectral.as_ref(), *a, &cone.probes, &budget, v.mutate)?;
                Ok((format!("phi-{a}"), report))
            })
            .collect::<Result<_>>()?,
        "cms" => vec![("cms".into(), lepage_vs_cms_test(law.alpha(), &budget, v.mutate)?)],
        "homogeneity" => {
            let shells = if v.homogeneity_shells.is_empty() { default_shells() } else { v.homogeneity_shells.clone() };
            let sets: Vec<TestSet> = shells.iter().map(|[lo, hi]| TestSet::shell(*lo, *hi)).collect();
            let report = empirical_homogeneity_test(
                desc,
                &cone.transversal,
                &law,
                spectral.as_ref(),
                &sets,
                &v.homogeneity_scalings,
                v.homogeneity_runs,
                cfg.lepage.r,
                cfg.seed,
            )?;
            vec![("homogeneity".into(), report)]
        }
        "eps" => {
            let ib = IntegralBudget { seed: cfg.seed, ..IntegralBudget::default() };
            vec![("eps".into(), eps_condition_test(desc, &law, spectral.as_ref(), &cone.probes, &ib)?)]
        }
        other => return Err(CliError::Usage(format!("unknown suite '{other}'"))),
    })
}

/// The stable oracle only describes the symmetric scalar series.
fn cms_applies(cfg: &RunConfig, cone: &Cone) -> bool {
    cone.kind == ConeKind::EuclideanSum && cone.dim() == 1 && cfg.lepage.symmetric
}

/// Runs the selected suites, writes one report per test plus a summary, and
/// returns the names of failed tests.
pub fn verify(cfg: &RunConfig) -> Result<Vec<String>> {
    let suite = cfg.verify.suite.as_str();
    if !SUITES.contains(&suite) {
        return Err(CliError::Usage(format!("unknown suite '{suite}', expected one of {}", SUITES.join(", "))));
    }
    let cone = cfg.build_cone()?;
    cfg.law()?;
    let names: Vec<&str> = match suite {
        "all" => SUITES[..5].iter().copied().filter(|s| *s != "cms" || cms_applies(cfg, &cone)).collect(),
        s => vec![s],
    };
    let mut reports = Vec::new();
    for name in names {
        reports.extend(run_suite(cfg, &cone, name)?);
    }
    prepare_out(cfg)?;
    let hash = cfg.hash();
    let mut failed = Vec::new();
    let mut summary = Vec::new();
    for (file, mut report) in reports {
        report.notes.push(format!("version={VERSION}"));
        report.notes.push(format!("config_hash={hash}"));
        report.notes.push(format!("master_seed={}", cfg.seed));
        report.notes.push("streams=side*2^40+index; sides 0-2 simulation, 1000+ resampling".into());
        let path = cfg.out.join(format!("{file}.report"));
        fs::write(&path, report.to_text()).map_err(|e| CliError::io(&path, e))?;
        if !report.passed {
            failed.push(file.clone());
        }
        let mut row = vec![VERSION.to_string(), hash.clone(), cfg.seed.to_string(), file];
        row.extend(report.csv_row());
        summary.push(row);
    }
    let mut header = strings(&["version", "config_hash", "seed", "report"]);
    header.extend(strings(&VerificationReport::CSV_HEADER));
    write_rows(&cfg.out.join("verify_summary.csv"), &header, summary)?;
    Ok(failed)
}

fn read_input(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let header: Vec<String> = reader.headers().map_err(|e| CliError::csv(path, e))?.iter().map(str::to_string).collect();
    let records = reader.records().collect::<std::result::Result<Vec<_>, _>>().map_err(|e| CliError::csv(path, e))?;
    Ok((header, records))
}

/// Outcome counts of a decompose run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecomposeSummary {
    pub written: usize,
    pub rejected: usize,
}

/// Polar decomposition of every row of the input CSV, or the inverse map
/// with `compose`. Rows at the origin go to a rejects file.
pub fn decompose_file(cfg: &RunConfig) -> Result<DecomposeSummary> {
    let input = cfg.decompose.input.as_ref().ok_or_else(|| CliError::Usage("decompose needs --input".into()))?;
    let cone = cfg.build_cone()?;
    let (header, records) = read_input(input)?;
    let index: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
    let compose_mode = cfg.decompose.compose;

    let mut parsed = Vec::new();
    let mut bad = Vec::new();
    for (k, rec) in records.iter().enumerate() {
        // header is line 1
        let line = k + 2;
        let get = |name: &str| index.get(name).and_then(|i| rec.get(*i));
        let row = get("row").map(str::to_string).unwrap_or_else(|| (k + 1).to_string());
        let element = codec::decode(&cone, get);
        let radial = if compose_mode {
            get("radial").ok_or_else(|| "missing column radial".to_string()).and_then(|s| {
                s.trim().parse::<f64>().map_err(|_| format!("bad number '{s}'"))
            })
        } else {
            Ok(0.0)
        };
        match (element, radial) {
            (Ok(x), Ok(r)) => parsed.push((row, x, r)),
            (Err(e), _) | (_, Err(e)) => bad.push(format!("line {line}: {e}")),
        }
    }
    if !bad.is_empty() {
        return Err(CliError::Config(format!("{}: cannot parse\n  {}", input.display(), bad.join("\n  "))));
    }

    let mut out = Vec::new();
    let mut rejects = Vec::new();
    for (row, x, radial) in parsed {
        let result = if compose_mode {
            compose(&cone.descriptor, &PolarPair { angular: x, radial }).map(|y| codec::encode(&y))
        } else if x.is_neutral() {
            Err(lepage_core::Error::Domain("the neutral element has no polar decomposition".into()))
        } else {
            decompose(&cone.transversal, &cone.descriptor, &x).map(|p| {
                let mut cells = codec::encode(&p.angular);
                cells.push(codec::float(p.radial));
                cells
            })
        };
        match result {
            Ok(cells) => out.push([vec![row], cells].concat()),
            Err(e) => rejects.push(vec![row, e.to_string()]),
        }
    }

    prepare_out(cfg)?;
    let hash = cfg.hash();
    let meta = |mut rows: Vec<Vec<String>>| -> Vec<Vec<String>> {
        for r in &mut rows {
            r.splice(0..0, [VERSION.to_string(), hash.clone()]);
        }
        rows
    };
    let mut out_header = strings(&["version", "config_hash", "row"]);
    out_header.extend(codec::header(&cone));
    if !compose_mode {
        out_header.push("radial".into());
    }
    let name = if compose_mode { "composed.csv" } else { "decomposed.csv" };
    let summary = DecomposeSummary { written: out.len(), rejected: rejects.len() };
    write_rows(&cfg.out.join(name), &out_header, meta(out))?;
    write_rows(&cfg.out.join("decompose_rejects.csv"), &strings(&["version", "config_hash", "row", "reason"]), meta(rejects))?;
    if summary.written == 0 {
        return Err(CliError::Config(format!("{}: no row could be processed", input.display())));
    }
    Ok(summary)
}

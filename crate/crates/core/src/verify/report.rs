//! Verification reports and their line-oriented text and CSV forms.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::{Error, Result};

/// Where a threshold comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    /// Closed-form critical value.
    Analytic,
    /// Permutation null over the pooled two-sample data.
    Permutation { resamples: usize, level: f64 },
    /// Centered bootstrap of a studentized statistic.
    Bootstrap { resamples: usize, level: f64 },
    /// Overlap of exact confidence intervals.
    Interval { confidence: f64 },
    /// Fixed numerical tolerance.
    Tolerance,
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Calibration::Analytic => write!(f, "analytic"),
            Calibration::Permutation { resamples, level } => write!(f, "permutation:{resamples}:{level}"),
            Calibration::Bootstrap { resamples, level } => write!(f, "bootstrap:{resamples}:{level}"),
            Calibration::Interval { confidence } => write!(f, "interval:{confidence}"),
            Calibration::Tolerance => write!(f, "tolerance"),
        }
    }
}

impl FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad calibration '{s}'")))
        };
        Ok(match parts[0] {
            "analytic" => Calibration::Analytic,
            "tolerance" => Calibration::Tolerance,
            "permutation" => Calibration::Permutation { resamples: num(1)? as usize, level: num(2)? },
            "bootstrap" => Calibration::Bootstrap { resamples: num(1)? as usize, level: num(2)? },
            "interval" => Calibration::Interval { confidence: num(1)? },
            _ => return Err(Error::Parse(format!("bad calibration '{s}'"))),
        })
    }
}

/// Outcome for one probe character or test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Detail {
    pub label: String,
    pub statistic: f64,
    /// Empty unless the entry was skipped or flagged.
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub calibration: Calibration,
    pub passed: bool,
    pub sample_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub truncation_r: Option<f64>,
    /// Largest truncation allowance subtracted from any probe.
    pub bias_allowance: Option<f64>,
    pub details: Vec<Detail>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(test: impl Into<String>, calibration: Calibration) -> Self {
        VerificationReport {
            test: test.into(),
            statistic: 0.0,
            threshold: 0.0,
            calibration,
            passed: false,
            sample_sizes: Vec::new(),
            seeds: Vec::new(),
            truncation_r: None,
            bias_allowance: None,
            details: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// `key=value` records, one per line. Details are written as
    /// `detail=label<TAB>statistic<TAB>note`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |v: &[String]| v.join(",");
        let _ = writeln!(out, "test={}", self.test);
        let _ = writeln!(out, "statistic={}", self.statistic);
        let _ = writeln!(out, "threshold={}", self.threshold);
        let _ = writeln!(out, "calibration={}", self.calibration);
        let _ = writeln!(out, "passed={}", self.passed);
        let _ = writeln!(out, "sample_sizes={}", join(&self.sample_sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>()));
        let _ = writeln!(out, "seeds={}", join(&self.seeds.iter().map(|n| n.to_string()).collect::<Vec<_>>()));
        if let Some(r) = self.truncation_r {
            let _ = writeln!(out, "truncation_r={r}");
        }
        if let Some(b) = self.bias_allowance {
            let _ = writeln!(out, "bias_allowance={b}");
        }
        for d in &self.details {
            let _ = writeln!(out, "detail={}\t{}\t{}", escape(&d.label), d.statistic, escape(&d.note));
        }
        for n in &self.notes {
            let _ = writeln!(out, "note={}", escape(n));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut report = VerificationReport::new("", Calibration::Analytic);
        let bad = |line: &str| Error::Parse(format!("bad report line '{line}'"));
        let float = |v: &str, line: &str| v.parse::<f64>().map_err(|_| bad(line));
        for line in text.lines().filter(|l| !l.is_empty()) {
            let (key, value) = line.split_once('=').ok_or_else(|| bad(line))?;
            match key {
                "test" => report.test = value.to_string(),
                "statistic" => report.statistic = float(value, line)?,
                "threshold" => report.threshold = float(value, line)?,
                "calibration" => report.calibration = value.parse()?,
                "passed" => report.passed = value.parse().map_err(|_| bad(line))?,
                "sample_sizes" => report.sample_sizes = parse_list(value).map_err(|_| bad(line))?,
                "seeds" => report.seeds = parse_list(value).map_err(|_| bad(line))?,
                "truncation_r" => report.truncation_r = Some(float(value, line)?),
                "bias_allowance" => report.bias_allowance = Some(float(value, line)?),
                "detail" => {
                    let mut parts = value.split('\t');
                    let (Some(label), Some(stat), Some(note), None) = (parts.next(), parts.next(), parts.next(), parts.next())
                    else {
                        return Err(bad(line));
                    };
                    report.details.push(Detail { label: unescape(label), statistic: float(stat, line)?, note: unescape(note) });
                }
                "note" => report.notes.push(unescape(value)),
                _ => return Err(bad(line)),
            }
        }
        Ok(report)
    }

    pub const CSV_HEADER: [&'static str; 10] =
        ["test", "statistic", "threshold", "calibration", "passed", "sample_sizes", "seeds", "truncation_r", "bias_allowance", "details"];

    /// One summary row matching [`VerificationReport::CSV_HEADER`].
    pub fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        vec![
            self.test.clone(),
            format!("{:.16e}", self.statistic),
            format!("{:.16e}", self.threshold),
            self.calibration.to_string(),
            self.passed.to_string(),
            self.sample_sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";"),
            self.seeds.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";"),
            opt(self.truncation_r),
            opt(self.bias_allowance),
            self.details.len().to_string(),
        ]
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(str::parse).collect()
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n").replace('\t', "\\t")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut r = VerificationReport::new("stability", Calibration::Permutation { resamples: 200, level: 0.01 });
        r.statistic = 1.2345678901234567;
        r.threshold = 3.0 + 1e-15;
        r.passed = true;
        r.sample_sizes = vec![100000, 100000];
        r.seeds = vec![7, u64::MAX];
        r.truncation_r = Some(1000.0);
        r.bias_allowance = Some(1.5e-10);
        r.details.push(Detail { label: "fourier(0.5)".into(), statistic: 0.25, note: String::new() });
        r.details.push(Detail { label: "odd\tlabel".into(), statistic: f64::INFINITY, note: "skipped:\nreason".into() });
        r.notes.push("x=y".into());
        let back = VerificationReport::from_text(&r.to_text()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn calibration_round_trip() {
        for c in [
            Calibration::Analytic,
            Calibration::Tolerance,
            Calibration::Bootstrap { resamples: 50, level: 0.05 },
            Calibration::Interval { confidence: 0.99 },
        ] {
            assert_eq!(c.to_string().parse::<Calibration>().unwrap(), c);
        }
        assert!("nope".parse::<Calibration>().is_err());
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(VerificationReport::from_text("statistic=abc\n").is_err());
        assert!(VerificationReport::from_text("no equals sign\n").is_err());
    }
}

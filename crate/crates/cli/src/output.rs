//! JSON documents and their CSV projections.
//!
//! JSON embeds the manifest. CSV cannot, so a CSV written with `--out`
//! gets a sidecar `<path>.manifest.json` that records its digest.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::manifest::{sidecar, RunManifest};
use crate::schema::*;
use crate::verify::VerifyReport;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// A flat table view of a result.
pub trait Tabular {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

fn index(i: &[u8]) -> String {
    i.iter().map(u8::to_string).collect::<Vec<_>>().join(";")
}

fn series_rows(label: &str, s: &SeriesTable) -> Vec<Vec<String>> {
    s.coefficients
        .iter()
        .map(|c| {
            vec![
                label.to_string(),
                index(&c.index),
                c.value.clone(),
                c.re.to_string(),
                c.im.to_string(),
            ]
        })
        .collect()
}

impl Tabular for MomentsResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["query", "index", "value", "re", "im"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        for m in &self.moments {
            if let Some(s) = &m.series {
                out.extend(series_rows(&m.query, s));
            }
            if let Some(v) = &m.value {
                out.push(vec![
                    m.query.clone(),
                    "value".into(),
                    String::new(),
                    v.re.to_string(),
                    v.im.to_string(),
                ]);
            }
        }
        out
    }
}

impl Tabular for CensusResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["genus", "count"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.by_genus
            .iter()
            .map(|g| vec![g.genus.to_string(), g.count.to_string()])
            .collect()
    }
}

impl Tabular for SeriesResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["quantity", "index", "value", "re", "im"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        series_rows(&self.quantity, &self.series)
    }
}

impl Tabular for CorrectionResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["index", "correction", "maps", "agree"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let mut idx: Vec<&Vec<u8>> = self.correction.coefficients.iter().map(|c| &c.index).collect();
        idx.extend(self.maps.coefficients.iter().map(|c| &c.index));
        idx.sort_by_key(|i| (i.iter().map(|&e| e as usize).sum::<usize>(), i.to_vec()));
        idx.dedup();
        idx.into_iter()
            .map(|i| {
                let a = self.correction.get(i).map_or("0".to_string(), |c| c.value.clone());
                let b = self.maps.get(i).map_or("0".to_string(), |c| c.value.clone());
                let agree = a == b;
                vec![index(i), a, b, agree.to_string()]
            })
            .collect()
    }
}

impl Tabular for FreeEnergyResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["genus", "index", "computed", "maps", "passed"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        for (genus, table) in [(0usize, &self.f0), (1, &self.f1)] {
            for c in &table.coefficients {
                let check = self.cross_check.iter().find(|x| x.genus == genus && x.index == c.index);
                out.push(vec![
                    genus.to_string(),
                    index(&c.index),
                    c.value.clone(),
                    check.map_or(String::new(), |x| x.maps.clone()),
                    check.map_or(String::new(), |x| x.passed.to_string()),
                ]);
            }
        }
        for x in &self.cross_check {
            let table = if x.genus == 0 { &self.f0 } else { &self.f1 };
            if table.get(&x.index).is_none() {
                out.push(vec![
                    x.genus.to_string(),
                    index(&x.index),
                    x.computed.clone(),
                    x.maps.clone(),
                    x.passed.to_string(),
                ]);
            }
        }
        out
    }
}

impl Tabular for McRunResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["observable", "samples", "mean", "variance", "std_error", "ess"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.stats
            .iter()
            .map(|s| {
                vec![
                    s.label.clone(),
                    s.n.to_string(),
                    s.mean.to_string(),
                    s.variance.to_string(),
                    s.std_error.to_string(),
                    s.ess.to_string(),
                ]
            })
            .collect()
    }
}

impl Tabular for McFluctResult {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "observable",
            "samples",
            "ess",
            "predicted",
            "sample_variance",
            "std_error",
            "ci99_low",
            "ci99_high",
            "z_skewness",
            "z_kurtosis",
            "passed",
        ]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let r = &self.report;
        vec![vec![
            r.observable.clone(),
            r.samples.to_string(),
            r.ess.to_string(),
            r.predicted.to_string(),
            r.sample_variance.to_string(),
            r.variance_std_error.to_string(),
            r.ci99.0.to_string(),
            r.ci99.1.to_string(),
            r.z_skewness.to_string(),
            r.z_kurtosis.to_string(),
            r.passed.to_string(),
        ]]
    }
}

impl Tabular for McTailResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["n", "samples", "exceed", "frequency"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.samples.to_string(),
                    r.exceed.to_string(),
                    r.frequency.to_string(),
                ]
            })
            .collect()
    }
}

impl Tabular for McThermoResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["alpha", "weight", "mean_trace_v", "std_error"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.report
            .nodes
            .iter()
            .map(|n| {
                vec![
                    n.alpha.to_string(),
                    n.weight.to_string(),
                    n.mean_trace_v.to_string(),
                    n.std_error.to_string(),
                ]
            })
            .collect()
    }
}

impl Tabular for VerifyReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["criterion", "passed", "seconds", "detail"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.criteria
            .iter()
            .map(|c| {
                vec![
                    c.id.clone(),
                    c.passed.to_string(),
                    format!("{:.2}", c.seconds),
                    c.detail.clone(),
                ]
            })
            .collect()
    }
}

fn write_csv<T: Tabular, W: Write>(result: &T, w: W) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(result.header())?;
    for r in result.rows() {
        wtr.write_record(&r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes the result to `out` (or stdout) in the chosen format.
pub fn emit<T: Serialize + Tabular>(
    mut manifest: RunManifest,
    result: T,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    manifest.finish();
    match (format, out) {
        (Format::Json, None) => {
            let doc = Envelope { manifest, result };
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &doc)?;
            writeln!(stdout)?;
        }
        (Format::Json, Some(path)) => {
            let doc = Envelope { manifest, result };
            let mut f = std::fs::File::create(path)?;
            serde_json::to_writer_pretty(&mut f, &doc)?;
            writeln!(f)?;
        }
        (Format::Csv, None) => write_csv(&result, std::io::stdout().lock())?,
        (Format::Csv, Some(path)) => {
            write_csv(&result, std::fs::File::create(path)?)?;
            manifest.record_file(path)?;
            let mut f = std::fs::File::create(sidecar(path))?;
            serde_json::to_writer_pretty(&mut f, &manifest)?;
            writeln!(f)?;
        }
    }
    Ok(())
}

/// The table as CSV text.
pub fn to_csv_string<T: Tabular>(result: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

//! JSON result schemas. Every document is an [`Envelope`]: the run
//! manifest plus one command-specific result.

use mmwb_core::scalar::Coeff;
use mmwb_core::{Complex64, Scalar, Series};
use mmwb_mc::{FluctuationReport, SampleStats, TailReport, ThermoReport};
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub manifest: RunManifest,
    pub result: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Number {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Number {
    fn from(z: Complex64) -> Self {
        Number { re: z.re, im: z.im }
    }
}

/// One coefficient of a coupling series. `value` is exact in the rational
/// backend and a decimal rendering in the float backend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub index: Vec<u8>,
    pub value: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTable {
    pub variables: Vec<String>,
    /// Coefficients of total order above this are unknown.
    pub order: usize,
    pub coefficients: Vec<Coefficient>,
}

impl SeriesTable {
    pub fn new<S: Scalar>(s: &Series<S>, variables: &[String], order: usize) -> Self {
        let coefficients = s
            .truncate(order)
            .terms()
            .map(|(i, c)| {
                let z = c.to_c64();
                Coefficient {
                    index: i.to_vec(variables.len()),
                    value: c.to_string(),
                    re: z.re,
                    im: z.im,
                }
            })
            .collect();
        SeriesTable {
            variables: variables.to_vec(),
            order,
            coefficients,
        }
    }

    pub fn get(&self, index: &[u8]) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.index == index)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub query: String,
    /// Series mode.
    pub series: Option<SeriesTable>,
    /// Series evaluated at the coupling values, or the numeric solution.
    pub value: Option<Number>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentsResult {
    pub potential: String,
    pub mode: String,
    pub moments: Vec<MomentEntry>,
    /// Numeric mode only.
    pub sweeps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenusCount {
    pub genus: usize,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusResult {
    pub stars: Vec<String>,
    pub connected_maps: u64,
    pub by_genus: Vec<GenusCount>,
}

/// A single series-valued quantity (two-star maps, genus-one maps, `σ²`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub quantity: String,
    pub inputs: Vec<String>,
    pub potential: String,
    pub series: SeriesTable,
    pub value: Option<Number>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    pub query: String,
    pub potential: String,
    /// `φ(Ξ⁻¹ΠP)`.
    pub correction: SeriesTable,
    /// Genus-one one-star maps `M¹(P)`, extended linearly.
    pub maps: SeriesTable,
    pub agree: bool,
    pub value: Option<Number>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub genus: usize,
    pub index: Vec<u8>,
    pub computed: String,
    pub maps: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyResult {
    pub potential: String,
    pub f0: SeriesTable,
    pub f1: SeriesTable,
    pub checked_order: usize,
    pub cross_check: Vec<CrossCheck>,
    pub passed: bool,
    /// `(F⁰(t), F¹(t))` when every coupling has a value.
    pub value: Option<(Number, Number)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub path: String,
    pub observables: Vec<String>,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRunResult {
    /// Fully resolved sampler configuration.
    pub config: serde_json::Value,
    pub stats: Vec<SampleStats>,
    pub acceptance: Vec<Option<f64>>,
    pub warnings: Vec<String>,
    pub trace: Option<TraceFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McFluctResult {
    pub config: serde_json::Value,
    /// Where the predicted variance came from.
    pub prediction: String,
    pub report: FluctuationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McTailResult {
    pub config: serde_json::Value,
    pub report: TailReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McThermoResult {
    pub config: serde_json::Value,
    pub report: ThermoReport,
}

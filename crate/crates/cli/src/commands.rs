//! Command-line definitions and their implementations.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mmwb_core::fluctuation::OperatorContext;
use mmwb_core::freeenergy::free_energy;
use mmwb_core::mapcount::{census_of_words, one_star_genus1, two_star_planar, DEFAULT_HALF_EDGE_CAP};
use mmwb_core::scalar::{Coeff, EXACT};
use mmwb_core::sdsolve::{Moments, NumericState, SeriesState, SolveError, SolveMode, SolverConfig};
use mmwb_core::{Complex64, Exact, Float, FloatPotential, GaussRational, Polynomial, Potential, Scalar, Series};
use mmwb_mc::{
    fluctuation_test, run, tail_test, thermo_integration, write_trace, MatrixEnsembleConfig, Observable,
    Representation, SamplerKind,
};
use serde::Serialize;

use crate::input::{has_values, parse_couplings, parse_polynomials, parse_potential, parse_sizes, parse_words};
use crate::manifest::RunManifest;
use crate::output::{emit, Format};
use crate::schema::*;
use crate::verify::{self, Fault, Level, VerifyOptions};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Gaussian rationals.
    Exact,
    /// Double precision complex numbers.
    Float,
}

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "mmwb",
    version,
    about = "Workbench for multi-matrix models: loop equations, map counts, fluctuations and Monte Carlo"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value = "exact")]
    pub backend: Backend,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub output: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of matrices `m`; widened to the highest colour in use.
    #[arg(long, global = true, default_value_t = 1)]
    pub colors: usize,
    /// Coupling values, e.g. `t=0.05,b=0.1`.
    #[arg(long, global = true, default_value = "")]
    pub couplings: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Moments of the tracial state solving the loop equations.
    Moments(MomentsArgs),
    /// Map enumeration.
    #[command(subcommand)]
    Maps(MapsCommand),
    /// Covariance `σ²(P, Q)` of the Gaussian fluctuations.
    Variance(VarianceArgs),
    /// The `1/N` correction `φ(Ξ⁻¹ΠP)` with the genus-one map count beside it.
    Correction(CorrectionArgs),
    /// `F⁰` and `F¹` with their map cross-check.
    FreeEnergy(FreeEnergyArgs),
    /// Monte Carlo sampling.
    #[command(subcommand)]
    Mc(McCommand),
    /// Cross-validation suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Series,
    Numeric,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long)]
    pub potential: String,
    #[arg(long, value_enum, default_value = "series")]
    pub mode: Mode,
    /// Series truncation order.
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Largest word degree (the degree cap in numeric mode).
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
    /// Comma-separated query polynomials.
    #[arg(long)]
    pub query: String,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum MapsCommand {
    /// Connected maps on the given stars, by genus.
    Census {
        #[arg(long)]
        stars: String,
        #[arg(long, default_value_t = DEFAULT_HALF_EDGE_CAP)]
        cap: usize,
    },
    /// Planar maps with two fixed stars, as a series in the couplings.
    TwoStar {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        potential: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// Genus-one maps with one fixed star.
    Genus1 {
        #[arg(long)]
        query: String,
        #[arg(long)]
        potential: String,
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct VarianceArgs {
    #[arg(long)]
    pub potential: String,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Two polynomials `P,Q`.
    #[arg(long)]
    pub pair: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CorrectionArgs {
    #[arg(long, default_value = "0")]
    pub potential: String,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long)]
    pub query: String,
}

#[derive(Debug, Args, Serialize)]
pub struct FreeEnergyArgs {
    #[arg(long)]
    pub potential: String,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Half-edge cap of the brute-force census used for the cross-check.
    #[arg(long, default_value_t = DEFAULT_HALF_EDGE_CAP)]
    pub cap: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerArg {
    ExactGue,
    Metropolis,
    Langevin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationArg {
    Auto,
    Matrix,
    Spectral,
}

#[derive(Debug, Args, Serialize)]
pub struct EnsembleArgs {
    #[arg(long, default_value = "0")]
    pub potential: String,
    #[arg(long = "N", default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "exact-gue")]
    pub sampler: SamplerArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub representation: RepresentationArg,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value_t = 500)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thinning: usize,
    /// Operator-norm cutoff `L`.
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum McCommand {
    /// Sample means of `(1/N) Tr P`.
    Run {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value = "x1^2,x1^4")]
        observables: String,
        /// Binary trace of every sampled row.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Variance of `Tr P − N μ(P)` against a prediction.
    Fluct {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        observable: String,
        /// Predicted variance; by default the `σ²` series at `--order`.
        #[arg(long)]
        sigma2: Option<f64>,
        /// Centre `μ(P)`; by default the sample mean.
        #[arg(long)]
        centre: Option<f64>,
        #[arg(long, default_value_t = 6)]
        order: usize,
    },
    /// Frequency of `λ_max > M` across matrix sizes.
    Tail {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = 3.0)]
        threshold: f64,
        #[arg(long, default_value = "50,100,200")]
        sizes: String,
    },
    /// Thermodynamic integration of `log Z` (demonstration only).
    Thermo {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = 4)]
        nodes: usize,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultArg {
    Xi1Sign,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value = "quick")]
    pub level: LevelArg,
    /// Comma-separated criterion numbers to run.
    #[arg(long)]
    pub only: Option<String>,
    /// Deliberately break an operator to check that the suite notices.
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

struct Globals {
    colors: usize,
    couplings: Vec<(String, GaussRational)>,
}

/// Runs the parsed command. `Ok(false)` means it ran but a check failed.
pub fn execute(cli: &Cli, argv: Vec<String>) -> Result<bool, CliError> {
    let config = serde_json::to_value(cli)?;
    let manifest = RunManifest::start(argv, config, cli.seed);
    let g = Globals {
        colors: cli.colors,
        couplings: parse_couplings(&cli.couplings)?,
    };
    let (fmt, out) = (cli.output, cli.out.as_deref());
    macro_rules! backend {
        ($f:ident, $($a:expr),*) => {
            match cli.backend {
                Backend::Exact => $f::<Exact>($($a),*),
                Backend::Float => $f::<Float>($($a),*),
            }
        };
    }
    match &cli.command {
        Command::Moments(a) => emit(manifest, backend!(moments, &g, a)?, fmt, out)?,
        Command::Maps(MapsCommand::Census { stars, cap }) => emit(manifest, census(stars, *cap)?, fmt, out)?,
        Command::Maps(MapsCommand::TwoStar { pair, potential, order }) => {
            emit(manifest, backend!(two_star, &g, pair, potential, *order)?, fmt, out)?
        }
        Command::Maps(MapsCommand::Genus1 {
            query,
            potential,
            order,
        }) => emit(manifest, backend!(genus1, &g, query, potential, *order)?, fmt, out)?,
        Command::Variance(a) => emit(manifest, backend!(variance, &g, a)?, fmt, out)?,
        Command::Correction(a) => {
            let r = backend!(correction, &g, a)?;
            let ok = r.agree;
            emit(manifest, r, fmt, out)?;
            return Ok(ok);
        }
        Command::FreeEnergy(a) => {
            let r = backend!(free_energy_cmd, &g, a)?;
            let ok = r.passed;
            emit(manifest, r, fmt, out)?;
            return Ok(ok);
        }
        Command::Mc(c) => return mc(&g, c, cli.seed, manifest, fmt, out),
        Command::Verify(a) => {
            let only = match &a.only {
                Some(s) => Some(parse_sizes(s)?),
                None => None,
            };
            let opts = VerifyOptions {
                level: match a.level {
                    LevelArg::Quick => Level::Quick,
                    LevelArg::Full => Level::Full,
                },
                seed: cli.seed,
                only,
                fault: a.inject_fault.map(|FaultArg::Xi1Sign| Fault::Xi1SignFlip),
            };
            let report = verify::verify(&opts, |c| eprintln!("{}", c.line()));
            let ok = report.passed;
            emit(manifest, report, fmt, out)?;
            return Ok(ok);
        }
    }
    Ok(true)
}

fn widen<S: Scalar>(v: Potential<S>, g: &Globals, extra: usize) -> (Potential<S>, usize) {
    let m = g.colors.max(v.colors()).max(extra).max(1);
    (v.with_colors(m), m)
}

fn values_c64<S: Scalar>(v: &Potential<S>) -> Option<Vec<Complex64>> {
    has_values(v).then(|| v.coupling_values_c64().ok()).flatten()
}

fn lift<S: Scalar>(p: &Polynomial<S>) -> Polynomial<Series<S>> {
    p.map_coeffs(|c| Series::constant(c.clone()))
}

fn moments<S: Scalar>(g: &Globals, a: &MomentsArgs) -> Result<MomentsResult, CliError> {
    let v: Potential<S> = parse_potential(&a.potential, g.colors, &g.couplings)?;
    let queries = parse_polynomials::<S>(&a.query)?;
    let extra = queries.iter().map(|(_, p)| p.colors_used()).max().unwrap_or(0);
    let (v, m) = widen(v, g, extra);
    for (q, p) in &queries {
        if p.degree() > a.degree {
            return Err(SolveError::DegreeCap {
                requested: p.degree(),
                cap: a.degree,
            })
            .map_err(|e| CliError::Usage(format!("query `{q}`: {e}")));
        }
    }
    let names = v.coupling_names();
    match a.mode {
        Mode::Series => {
            let mu = SeriesState::new(&v, a.order).with_colors(m);
            let vals = values_c64(&v);
            let moments = queries
                .iter()
                .map(|(q, p)| {
                    let s = mu.expect(&lift(p), a.order)?;
                    Ok(MomentEntry {
                        query: q.clone(),
                        series: Some(SeriesTable::new(&s, &names, a.order)),
                        value: vals.as_ref().map(|t| s.eval(t).into()),
                    })
                })
                .collect::<Result<_, CliError>>()?;
            Ok(MomentsResult {
                potential: v.to_string(),
                mode: "series".into(),
                moments,
                sweeps: None,
            })
        }
        Mode::Numeric => {
            let cfg = SolverConfig {
                mode: SolveMode::Numeric,
                order: a.order,
                max_degree: a.degree,
                ..SolverConfig::default()
            };
            let mu = NumericState::solve(&v, &cfg)?;
            let moments = queries
                .iter()
                .map(|(q, p)| {
                    let pc = p.map_coeffs(|c| c.to_c64());
                    Ok(MomentEntry {
                        query: q.clone(),
                        series: None,
                        value: Some(mu.expect(&pc, EXACT)?.into()),
                    })
                })
                .collect::<Result<_, CliError>>()?;
            Ok(MomentsResult {
                potential: v.to_string(),
                mode: "numeric".into(),
                moments,
                sweeps: Some(mu.sweeps()),
            })
        }
    }
}

fn census(stars: &str, cap: usize) -> Result<CensusResult, CliError> {
    let words = parse_words(stars)?;
    let c = census_of_words(&words, cap)?;
    Ok(CensusResult {
        stars: words.iter().map(ToString::to_string).collect(),
        connected_maps: c.total(),
        by_genus: c
            .counts
            .iter()
            .map(|(&genus, &count)| GenusCount { genus, count })
            .collect(),
    })
}

fn pair_of(text: &str) -> Result<[String; 2], CliError> {
    match crate::input::split_list(text).as_slice() {
        [p, q] => Ok([p.to_string(), q.to_string()]),
        _ => Err(CliError::Usage(format!(
            "expected two comma-separated entries, got `{text}`"
        ))),
    }
}

fn two_star<S: Scalar>(g: &Globals, pair: &str, potential: &str, order: usize) -> Result<SeriesResult, CliError> {
    let [ps, qs] = pair_of(pair)?;
    let words = parse_words(pair)?;
    let v: Potential<S> = parse_potential(potential, g.colors, &g.couplings)?;
    let (v, _) = widen(v, g, words[0].colors_used().max(words[1].colors_used()));
    let s = two_star_planar(&words[0], &words[1], &v, order)?;
    Ok(SeriesResult {
        quantity: "two-star planar maps".into(),
        inputs: vec![ps, qs],
        potential: v.to_string(),
        series: SeriesTable::new(&s, &v.coupling_names(), order),
        value: values_c64(&v).map(|t| s.eval(&t).into()),
    })
}

fn genus1<S: Scalar>(g: &Globals, query: &str, potential: &str, order: usize) -> Result<SeriesResult, CliError> {
    let words = parse_words(query)?;
    let [w] = words.as_slice() else {
        return Err(CliError::Usage(format!("expected one word, got `{query}`")));
    };
    let v: Potential<S> = parse_potential(potential, g.colors, &g.couplings)?;
    let (v, _) = widen(v, g, w.colors_used());
    let s = one_star_genus1(w, &v, order)?;
    Ok(SeriesResult {
        quantity: "genus-one one-star maps".into(),
        inputs: vec![w.to_string()],
        potential: v.to_string(),
        series: SeriesTable::new(&s, &v.coupling_names(), order),
        value: values_c64(&v).map(|t| s.eval(&t).into()),
    })
}

fn variance<S: Scalar>(g: &Globals, a: &VarianceArgs) -> Result<SeriesResult, CliError> {
    pair_of(&a.pair)?;
    let polys = parse_polynomials::<S>(&a.pair)?;
    let v: Potential<S> = parse_potential(&a.potential, g.colors, &g.couplings)?;
    let extra = polys.iter().map(|(_, p)| p.colors_used()).max().unwrap_or(0);
    let (v, m) = widen(v, g, extra);
    let mu = SeriesState::new(&v, a.order).with_colors(m);
    let ctx = OperatorContext::series(&v, &mu);
    let s = ctx.sigma2(&lift(&polys[0].1), &lift(&polys[1].1))?;
    Ok(SeriesResult {
        quantity: "sigma2".into(),
        inputs: polys.iter().map(|(t, _)| t.clone()).collect(),
        potential: v.to_string(),
        series: SeriesTable::new(&s, &v.coupling_names(), a.order),
        value: values_c64(&v).map(|t| s.eval(&t).into()),
    })
}

fn correction<S: Scalar>(g: &Globals, a: &CorrectionArgs) -> Result<CorrectionResult, CliError> {
    let polys = parse_polynomials::<S>(&a.query)?;
    let [(label, p)] = polys.as_slice() else {
        return Err(CliError::Usage(format!("expected one polynomial, got `{}`", a.query)));
    };
    let v: Potential<S> = parse_potential(&a.potential, g.colors, &g.couplings)?;
    let (v, m) = widen(v, g, p.colors_used());
    let mu = SeriesState::new(&v, a.order).with_colors(m);
    let ctx = OperatorContext::series(&v, &mu);
    let phi = ctx.second_order_correction(&lift(p))?;
    let mut maps = Series::zero_to(a.order);
    for (w, c) in p.terms() {
        if !w.is_unit() {
            maps.add_assign_ref(&one_star_genus1(w, &v, a.order)?.scale(c));
        }
    }
    let names = v.coupling_names();
    Ok(CorrectionResult {
        query: label.clone(),
        potential: v.to_string(),
        correction: SeriesTable::new(&phi, &names, a.order),
        maps: SeriesTable::new(&maps, &names, a.order),
        agree: phi == maps,
        value: values_c64(&v).map(|t| phi.eval(&t).into()),
    })
}

fn free_energy_cmd<S: Scalar>(g: &Globals, a: &FreeEnergyArgs) -> Result<FreeEnergyResult, CliError> {
    let v: Potential<S> = parse_potential(&a.potential, g.colors, &g.couplings)?;
    let (v, _) = widen(v, g, 0);
    let r = free_energy(&v, a.order, a.cap)?;
    let names = v.coupling_names();
    Ok(FreeEnergyResult {
        potential: v.to_string(),
        f0: SeriesTable::new(&r.f0, &names, a.order),
        f1: SeriesTable::new(&r.f1, &names, a.order),
        checked_order: r.checked_order,
        passed: r.passed(),
        cross_check: r
            .cross_check
            .iter()
            .map(|c| CrossCheck {
                genus: c.genus,
                index: c.index.clone(),
                computed: c.computed.clone(),
                maps: c.maps.clone(),
                passed: c.passed,
            })
            .collect(),
        value: values_c64(&v).map(|t| (r.f0.eval(&t).into(), r.f1.eval(&t).into())),
    })
}

fn ensemble(g: &Globals, a: &EnsembleArgs, seed: u64, extra_colors: usize) -> Result<MatrixEnsembleConfig, CliError> {
    let v: FloatPotential = parse_potential(&a.potential, g.colors, &g.couplings)?;
    let m = g.colors.max(v.colors()).max(extra_colors).max(1);
    let sampler = match a.sampler {
        SamplerArg::ExactGue => SamplerKind::ExactGue,
        SamplerArg::Metropolis => SamplerKind::Metropolis,
        SamplerArg::Langevin => SamplerKind::Langevin,
    };
    let mut cfg = MatrixEnsembleConfig::gibbs(a.n, v.with_colors(m), sampler, a.samples, seed);
    cfg.m = m;
    cfg.representation = match a.representation {
        RepresentationArg::Auto => Representation::Auto,
        RepresentationArg::Matrix => Representation::Matrix,
        RepresentationArg::Spectral => Representation::Spectral,
    };
    cfg.step = a.step;
    cfg.burn_in = if sampler == SamplerKind::ExactGue { 0 } else { a.burn_in };
    cfg.thinning = a.thinning;
    cfg.cutoff = a.cutoff;
    cfg.chains = a.chains.max(1);
    cfg.validate()?;
    Ok(cfg)
}

fn observables_colors(obs: &[Observable]) -> usize {
    obs.iter().map(|o| o.poly.colors_used()).max().unwrap_or(0)
}

/// Series prediction of `σ²(P, P)` at the configured couplings.
fn predicted_sigma2(g: &Globals, a: &EnsembleArgs, p: &str, order: usize) -> Result<(f64, String), CliError> {
    let v: Potential<Exact> = parse_potential(&a.potential, g.colors, &g.couplings)?;
    let q = mmwb_core::ncpoly::parse_polynomial::<Exact>(p)?;
    let (v, m) = widen(v, g, q.colors_used());
    let mu = SeriesState::new(&v, order).with_colors(m);
    let ctx = OperatorContext::series(&v, &mu);
    let s = ctx.sigma2(&lift(&q), &lift(&q))?;
    let t = v.coupling_values_c64()?;
    Ok((s.eval(&t).re, format!("sigma2 series to order {order}")))
}

fn mc(
    g: &Globals,
    c: &McCommand,
    seed: u64,
    mut manifest: RunManifest,
    fmt: Format,
    out: Option<&std::path::Path>,
) -> Result<bool, CliError> {
    match c {
        McCommand::Run {
            ensemble: e,
            observables,
            trace,
        } => {
            let obs = Observable::parse_list(observables)?;
            let cfg = ensemble(g, e, seed, observables_colors(&obs))?;
            let (report, samples) = run(&cfg, &obs)?;
            let trace = match trace {
                Some(path) => {
                    let rows = samples.rows();
                    write_trace(
                        std::io::BufWriter::new(std::fs::File::create(path)?),
                        samples.width(),
                        &rows,
                    )?;
                    manifest.record_file(path)?;
                    Some(TraceFile {
                        path: path.display().to_string(),
                        observables: samples.labels.clone(),
                        rows: rows.len(),
                    })
                }
                None => None,
            };
            let result = McRunResult {
                config: serde_json::to_value(&report.config)?,
                stats: report.stats,
                acceptance: report.acceptance,
                warnings: report.warnings,
                trace,
            };
            emit(manifest, result, fmt, out)?;
            Ok(true)
        }
        McCommand::Fluct {
            ensemble: e,
            observable,
            sigma2,
            centre,
            order,
        } => {
            let obs = Observable::parse(observable)?;
            let cfg = ensemble(g, e, seed, obs.poly.colors_used())?;
            let (pred, source) = match sigma2 {
                Some(s) => (*s, "given".to_string()),
                None => predicted_sigma2(g, e, observable, *order)?,
            };
            let report = fluctuation_test(&cfg, &obs, pred, *centre)?;
            let ok = report.passed;
            let result = McFluctResult {
                config: serde_json::to_value(&cfg)?,
                prediction: source,
                report,
            };
            emit(manifest, result, fmt, out)?;
            Ok(ok)
        }
        McCommand::Tail {
            ensemble: e,
            threshold,
            sizes,
        } => {
            let cfg = ensemble(g, e, seed, 0)?;
            let report = tail_test(&cfg, *threshold, &parse_sizes(sizes)?)?;
            let ok = report.passed;
            emit(
                manifest,
                McTailResult {
                    config: serde_json::to_value(&cfg)?,
                    report,
                },
                fmt,
                out,
            )?;
            Ok(ok)
        }
        McCommand::Thermo {
            ensemble: e,
            nodes,
            order,
        } => {
            let cfg = ensemble(g, e, seed, 0)?;
            let report = thermo_integration(&cfg, *nodes, *order)?;
            emit(
                manifest,
                McThermoResult {
                    config: serde_json::to_value(&cfg)?,
                    report,
                },
                fmt,
                out,
            )?;
            Ok(true)
        }
    }
}

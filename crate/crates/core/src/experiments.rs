//! Figure presets and their reduction into plot-ready tables.
//!
//! An [`ExperimentSpec`] expands into independent [`WorkUnit`]s. Each unit is
//! one seeded run of one variant (a series, a network size, a special-point
//! ordinal...). Units can be executed in any order or in parallel with
//! [`run_unit`]; [`aggregate`] reduces their results, in unit order, into a
//! [`FigureData`] table.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::analysis::{
    self, average_histograms, degree_distribution, fit_power_law, mean_std, ordinal_group_means,
    separated_peak, DegreeByOrdinal, DegreeHistogram, PowerLawFit,
};
use crate::engine::{
    continue_simulation, run_simulation, FitnessSource, PointOverride, SignCountsSource, SimConfig,
};
use crate::error::{Error, Result};
use crate::model::{SignCounts, SignedNetwork, VertexId};
use crate::seeded_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FigureId {
    Fig1a,
    Fig1bType1,
    Fig1bType2,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl FigureId {
    pub const ALL: [FigureId; 9] = [
        FigureId::Fig1a,
        FigureId::Fig1bType1,
        FigureId::Fig1bType2,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig1a => "1a",
            FigureId::Fig1bType1 => "1b-type1",
            FigureId::Fig1bType2 => "1b-type2",
            FigureId::Fig2 => "2",
            FigureId::Fig3 => "3",
            FigureId::Fig4 => "4",
            FigureId::Fig5 => "5",
            FigureId::Fig6 => "6",
            FigureId::Fig7 => "7",
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == id)
            .ok_or_else(|| Error::UnknownFigure(id.into()))
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Full,
    /// Fewer runs (and for Fig. 4 smaller networks) so that a laptop can
    /// reproduce the figure in minutes.
    Desk,
}

impl Scale {
    pub fn as_str(self) -> &'static str {
        match self {
            Scale::Full => "full",
            Scale::Desk => "desk",
        }
    }
}

/// A named configuration inside a multi-series figure.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: &'static str,
    pub config: SimConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Protocol {
    /// Averaged degree distribution of one configuration (Figs. 1a, 1b).
    DegreeDistribution { config: SimConfig },
    /// Mean distance against network size for each series (Fig. 2).
    Diameter {
        series: Vec<Series>,
        sizes: Vec<u32>,
        sample_pairs: usize,
    },
    /// Averaged distribution with one distinguished input; one variant per
    /// ordinal the special point is placed at (Figs. 3, 5).
    SpecialPoint {
        config: SimConfig,
        special: PointOverride,
        ordinals: Vec<u32>,
    },
    /// Mean final degree per insertion ordinal for each series (Fig. 4).
    DegreeByOrdinal { series: Vec<Series> },
    /// A late input with extra time and fitness fed into networks of growing
    /// size (Fig. 6). `base.n_points` is replaced by each size.
    Attacker {
        base: SimConfig,
        sizes: Vec<u32>,
        attacker: PointOverride,
    },
    /// A grown base network receives `added` inputs sharing `total_time`
    /// steps equally (Fig. 7).
    Learning {
        base: SimConfig,
        new_info: SimConfig,
        added: Vec<u32>,
        total_time: u32,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub figure: FigureId,
    pub scale: Scale,
    pub runs: usize,
    /// Run `r` is seeded with `seed + r`, for every variant.
    pub seed: u64,
    pub protocol: Protocol,
}

const BA_POINTS: u32 = 10_000;
const STAR_POINTS: u32 = 1000;
const DIAMETER_SIZES: [u32; 7] = [100, 200, 500, 1000, 2000, 5000, 10_000];
const ATTACKER_SIZES: [u32; 4] = [100, 300, 1000, 3000];

/// Table 1, Barabási row.
pub fn barabasi_config() -> SimConfig {
    SimConfig::barabasi_albert(BA_POINTS, 2)
}

/// Table 1, general settings type 1.
pub fn type1_config() -> SimConfig {
    SimConfig {
        h: 0.5,
        u: 2,
        e: 10,
        f_forget: 1,
        n_points: BA_POINTS,
        fitness: FitnessSource::Constant(1.0),
        sign_counts: SignCountsSource::Constant(SignCounts::new(1.0, 1.0, 1.0)),
        overrides: Vec::new(),
        seed: 0,
    }
}

/// Table 1, general settings type 2 (random attributes).
pub fn type2_config() -> SimConfig {
    SimConfig {
        fitness: FitnessSource::Uniform,
        sign_counts: SignCountsSource::Uniform,
        ..type1_config()
    }
}

/// Table 2: other points random, one point with fitness 3 and a = b = c = 1.
fn star_fitness() -> (SimConfig, PointOverride) {
    let others = SimConfig {
        h: 0.5,
        u: 1,
        e: 10,
        f_forget: 1,
        n_points: STAR_POINTS,
        fitness: FitnessSource::Uniform,
        sign_counts: SignCountsSource::Uniform,
        overrides: Vec::new(),
        seed: 0,
    };
    let special = PointOverride {
        ordinal: 0,
        fitness: Some(3.0),
        sign_counts: Some(SignCounts::new(1.0, 1.0, 1.0)),
        e: Some(10),
    };
    (others, special)
}

/// Table 3: the last point gets 1000 time steps, everything else as usual.
fn star_time() -> (SimConfig, PointOverride) {
    let others = SimConfig {
        h: 0.5,
        u: 1,
        e: 10,
        f_forget: 1,
        n_points: STAR_POINTS,
        fitness: FitnessSource::Constant(1.0),
        sign_counts: SignCountsSource::Uniform,
        overrides: Vec::new(),
        seed: 0,
    };
    let special = PointOverride {
        ordinal: STAR_POINTS - 1,
        e: Some(1000),
        ..Default::default()
    };
    (others, special)
}

/// Table 4 base row.
fn learning_base() -> SimConfig {
    SimConfig {
        h: 0.5,
        u: 1,
        e: 2,
        f_forget: 0,
        n_points: 1000,
        fitness: FitnessSource::Constant(1.0),
        sign_counts: SignCountsSource::Constant(SignCounts::new(1.0, 0.0, 0.0)),
        overrides: Vec::new(),
        seed: 0,
    }
}

/// Table 4 new-information row; `e` and `n_points` are set per sweep value.
fn learning_new_info() -> SimConfig {
    SimConfig {
        f_forget: 10,
        ..learning_base()
    }
}

/// The preset for `figure` at `scale`, with master seed zero.
pub fn preset(figure: FigureId, scale: Scale) -> ExperimentSpec {
    let desk = scale == Scale::Desk;
    let pick = |full: usize, desk_runs: usize| if desk { desk_runs } else { full };
    let (runs, protocol) = match figure {
        FigureId::Fig1a => (
            pick(200, 20),
            Protocol::DegreeDistribution {
                config: barabasi_config(),
            },
        ),
        FigureId::Fig1bType1 => (
            pick(200, 20),
            Protocol::DegreeDistribution {
                config: type1_config(),
            },
        ),
        FigureId::Fig1bType2 => (
            pick(200, 20),
            Protocol::DegreeDistribution {
                config: type2_config(),
            },
        ),
        FigureId::Fig2 => (
            pick(100, 10),
            Protocol::Diameter {
                series: vec![
                    Series {
                        name: "ba",
                        config: barabasi_config(),
                    },
                    Series {
                        name: "type2",
                        config: type2_config(),
                    },
                ],
                sizes: DIAMETER_SIZES.to_vec(),
                sample_pairs: analysis::DEFAULT_SAMPLE_PAIRS,
            },
        ),
        FigureId::Fig3 => {
            let (config, special) = star_fitness();
            (
                pick(10_000, 200),
                Protocol::SpecialPoint {
                    config,
                    special,
                    ordinals: vec![0, 31],
                },
            )
        }
        FigureId::Fig4 => {
            let n = if desk { 2000 } else { BA_POINTS };
            let with_n = |mut c: SimConfig| {
                c.n_points = n;
                c
            };
            (
                200,
                Protocol::DegreeByOrdinal {
                    series: vec![
                        Series {
                            name: "ba",
                            config: with_n(barabasi_config()),
                        },
                        Series {
                            name: "type2",
                            config: with_n(type2_config()),
                        },
                    ],
                },
            )
        }
        FigureId::Fig5 => {
            let (config, special) = star_time();
            (
                pick(10_000, 200),
                Protocol::SpecialPoint {
                    config,
                    ordinals: vec![special.ordinal],
                    special,
                },
            )
        }
        FigureId::Fig6 => (
            pick(500, 50),
            Protocol::Attacker {
                base: type2_config(),
                sizes: ATTACKER_SIZES.to_vec(),
                attacker: PointOverride {
                    ordinal: 0,
                    fitness: Some(1.0),
                    sign_counts: None,
                    e: Some(100),
                },
            },
        ),
        FigureId::Fig7 => (
            pick(1000, 100),
            Protocol::Learning {
                base: learning_base(),
                new_info: learning_new_info(),
                added: (1..=10).map(|k| 10 * k).collect(),
                total_time: 1000,
            },
        ),
    };
    ExperimentSpec {
        figure,
        scale,
        runs,
        seed: 0,
        protocol,
    }
}

/// One run of one variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkUnit {
    pub variant: usize,
    pub run: usize,
}

/// Per-unit measurement.
#[derive(Clone, Debug, PartialEq)]
pub enum UnitResult {
    Histogram {
        hist: DegreeHistogram,
    },
    /// A run with a distinguished vertex.
    Special {
        hist: DegreeHistogram,
        /// The same distribution without the special vertex.
        bulk: DegreeHistogram,
        /// Final degree of the special vertex, `None` if it did not survive.
        special_degree: Option<usize>,
        /// Largest degree among the other vertices.
        bulk_max: usize,
    },
    Distance {
        mean: f64,
        vertices: usize,
    },
    Ordinals(DegreeByOrdinal),
    Attacker {
        attacker_degree: usize,
        max_degree: usize,
    },
    Learning {
        final_vertices: Vec<usize>,
    },
}

/// A unit's measurement plus, for single-network protocols, the final network.
#[derive(Clone, Debug)]
pub struct UnitOutput {
    pub result: UnitResult,
    pub network: Option<SignedNetwork>,
}

impl ExperimentSpec {
    pub fn variants(&self) -> usize {
        match &self.protocol {
            Protocol::DegreeDistribution { .. } | Protocol::Learning { .. } => 1,
            Protocol::Diameter { series, sizes, .. } => series.len() * sizes.len(),
            Protocol::SpecialPoint { ordinals, .. } => ordinals.len(),
            Protocol::DegreeByOrdinal { series } => series.len(),
            Protocol::Attacker { sizes, .. } => sizes.len(),
        }
    }

    /// All units, variant-major.
    pub fn units(&self) -> Vec<WorkUnit> {
        (0..self.variants())
            .flat_map(|variant| (0..self.runs).map(move |run| WorkUnit { variant, run }))
            .collect()
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }

    /// Fully resolved configuration of a variant, seeded for `run`.
    pub fn variant_config(&self, unit: WorkUnit) -> SimConfig {
        let mut config = match &self.protocol {
            Protocol::DegreeDistribution { config } => config.clone(),
            Protocol::Diameter { series, sizes, .. } => {
                let mut c = series[unit.variant / sizes.len()].config.clone();
                c.n_points = sizes[unit.variant % sizes.len()];
                c
            }
            Protocol::SpecialPoint {
                config,
                special,
                ordinals,
            } => {
                let mut c = config.clone();
                c.overrides.push(PointOverride {
                    ordinal: ordinals[unit.variant],
                    ..special.clone()
                });
                c
            }
            Protocol::DegreeByOrdinal { series } => series[unit.variant].config.clone(),
            Protocol::Attacker {
                base,
                sizes,
                attacker,
            } => {
                let n = sizes[unit.variant];
                let mut c = base.clone();
                c.n_points = n + 1;
                c.overrides.push(PointOverride {
                    ordinal: n,
                    ..attacker.clone()
                });
                c
            }
            Protocol::Learning { base, .. } => base.clone(),
        };
        config.seed = self.run_seed(unit.run);
        config
    }

    /// Human-readable label of a variant, used in tables.
    pub fn variant_label(&self, variant: usize) -> String {
        match &self.protocol {
            Protocol::Diameter { series, sizes, .. } => format!(
                "{}-n{}",
                series[variant / sizes.len()].name,
                sizes[variant % sizes.len()]
            ),
            Protocol::SpecialPoint { ordinals, .. } => format!("ordinal{}", ordinals[variant]),
            Protocol::DegreeByOrdinal { series } => series[variant].name.into(),
            Protocol::Attacker { sizes, .. } => format!("n{}", sizes[variant]),
            _ => "all".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be positive".into()));
        }
        for variant in 0..self.variants() {
            self.variant_config(WorkUnit { variant, run: 0 })
                .validate()?;
        }
        if let Protocol::Learning {
            base,
            new_info,
            added,
            total_time,
        } = &self.protocol
        {
            for &v in added {
                if v == 0 || *total_time / v == 0 {
                    return Err(Error::InvalidConfig(format!(
                        "cannot share {total_time} time steps among {v} inputs"
                    )));
                }
                let mut c = new_info.clone();
                c.n_points = v;
                c.e = total_time / v;
                c.validate_from(base.n_points)?;
            }
        }
        Ok(())
    }
}

/// Executes one unit.
pub fn run_unit(spec: &ExperimentSpec, unit: WorkUnit) -> Result<UnitOutput> {
    let wrap = |e: Error| Error::Run {
        run: unit.run,
        source: alloc::boxed::Box::new(e),
    };
    let config = spec.variant_config(unit);
    match &spec.protocol {
        Protocol::DegreeDistribution { .. } => {
            let run = run_simulation(&config).map_err(wrap)?;
            let hist = degree_distribution(&run.network).map_err(wrap)?;
            Ok(UnitOutput {
                result: UnitResult::Histogram { hist },
                network: Some(run.network),
            })
        }
        Protocol::SpecialPoint { ordinals, .. } => {
            let run = run_simulation(&config).map_err(wrap)?;
            let net = &run.network;
            let special = find_ordinal(net, ordinals[unit.variant]);
            let hist = degree_distribution(net).map_err(wrap)?;
            let bulk = degree_distribution_without(net, special).map_err(wrap)?;
            let bulk_max = net
                .vertex_ids()
                .filter(|&v| Some(v) != special)
                .map(|v| net.degree(v))
                .max()
                .unwrap_or(0);
            Ok(UnitOutput {
                result: UnitResult::Special {
                    hist,
                    bulk,
                    special_degree: special.map(|v| net.degree(v)),
                    bulk_max,
                },
                network: Some(run.network),
            })
        }
        Protocol::Diameter { sample_pairs, .. } => {
            let run = run_simulation(&config).map_err(wrap)?;
            let mut rng = seeded_rng(config.seed ^ 0x9E37_79B9_7F4A_7C15);
            let d =
                analysis::diameter(&run.network, Some(*sample_pairs), &mut rng).map_err(wrap)?;
            Ok(UnitOutput {
                result: UnitResult::Distance {
                    mean: d.mean,
                    vertices: run.network.vertex_count(),
                },
                network: Some(run.network),
            })
        }
        Protocol::DegreeByOrdinal { .. } => {
            let run = run_simulation(&config).map_err(wrap)?;
            let mut acc = DegreeByOrdinal::new(config.n_points as usize);
            acc.add(&run.network);
            Ok(UnitOutput {
                result: UnitResult::Ordinals(acc),
                network: Some(run.network),
            })
        }
        Protocol::Attacker { sizes, .. } => {
            let run = run_simulation(&config).map_err(wrap)?;
            let net = &run.network;
            let attacker_degree =
                find_ordinal(net, sizes[unit.variant]).map_or(0, |v| net.degree(v));
            let max_degree = net.vertex_ids().map(|v| net.degree(v)).max().unwrap_or(0);
            Ok(UnitOutput {
                result: UnitResult::Attacker {
                    attacker_degree,
                    max_degree,
                },
                network: Some(run.network),
            })
        }
        Protocol::Learning {
            new_info,
            added,
            total_time,
            ..
        } => {
            let mut rng = seeded_rng(config.seed);
            let mut base = SignedNetwork::new(config.h).map_err(wrap)?;
            continue_simulation(&mut base, &config, 0, &mut rng).map_err(wrap)?;
            let mut final_vertices = Vec::with_capacity(added.len());
            for &v in added {
                let mut net = base.clone();
                let mut stage = new_info.clone();
                stage.n_points = v;
                stage.e = total_time / v;
                let mut stage_rng = seeded_rng(config.seed.wrapping_mul(1_000_003) ^ v as u64);
                continue_simulation(&mut net, &stage, config.n_points, &mut stage_rng)
                    .map_err(wrap)?;
                final_vertices.push(net.vertex_count());
            }
            Ok(UnitOutput {
                result: UnitResult::Learning { final_vertices },
                network: None,
            })
        }
    }
}

/// Degree distribution over every vertex except `skip`.
fn degree_distribution_without(
    net: &SignedNetwork,
    skip: Option<VertexId>,
) -> Result<DegreeHistogram> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for v in net.vertex_ids().filter(|&v| Some(v) != skip) {
        *counts.entry(net.degree(v)).or_default() += 1;
    }
    let n: usize = counts.values().sum();
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    Ok(DegreeHistogram {
        probs: counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / n as f64))
            .collect(),
        support: counts.keys().map(|&k| (k, 1)).collect(),
        n_vertices: n,
        runs: 1,
    })
}

fn find_ordinal(net: &SignedNetwork, ordinal: u32) -> Option<VertexId> {
    net.vertices()
        .find(|(_, a)| a.ordinal == ordinal)
        .map(|(v, _)| v)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

/// Plot-ready output of one figure.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureData {
    pub figure: FigureId,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Power-law fits, keyed by series label.
    pub fits: Vec<(String, PowerLawFit)>,
    /// Scalar results (peak statistics, first-ordinal means, ...).
    pub summary: Vec<(String, f64)>,
    /// Averaged histograms behind the rows, keyed by series label.
    pub histograms: Vec<(String, DegreeHistogram)>,
}

impl FigureData {
    fn new(figure: FigureId, columns: &[&'static str]) -> Self {
        FigureData {
            figure,
            columns: columns.to_vec(),
            rows: Vec::new(),
            fits: Vec::new(),
            summary: Vec::new(),
            histograms: Vec::new(),
        }
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn fit(&self, label: &str) -> Option<&PowerLawFit> {
        self.fits.iter().find(|(k, _)| k == label).map(|(_, f)| f)
    }

    pub fn histogram(&self, label: &str) -> Option<&DegreeHistogram> {
        self.histograms
            .iter()
            .find(|(k, _)| k == label)
            .map(|(_, h)| h)
    }

    fn note(&mut self, key: String, value: f64) {
        self.summary.push((key, value));
    }
}

/// Reduces unit results, given in the order of [`ExperimentSpec::units`].
pub fn aggregate(spec: &ExperimentSpec, results: &[UnitResult]) -> Result<FigureData> {
    let expected = spec.variants() * spec.runs;
    if results.len() != expected {
        return Err(Error::InvalidConfig(format!(
            "expected {expected} unit results, got {}",
            results.len()
        )));
    }
    let per_variant: Vec<&[UnitResult]> = results.chunks(spec.runs.max(1)).collect();
    match &spec.protocol {
        Protocol::DegreeDistribution { .. } => {
            let mut data = FigureData::new(spec.figure, &["k", "p_k"]);
            let hist = average(per_variant[0])?;
            for (&k, &p) in &hist.probs {
                data.rows.push(vec![k.into(), p.into()]);
            }
            let (k_min, k_max) = hist.default_fit_window();
            if let Ok(fit) = fit_power_law(&hist, k_min, k_max) {
                data.fits.push(("all".into(), fit));
            }
            data.histograms.push(("all".into(), hist));
            Ok(data)
        }
        Protocol::SpecialPoint { ordinals, .. } => {
            let mut data = FigureData::new(spec.figure, &["special_ordinal", "k", "p_k"]);
            for (variant, runs) in per_variant.iter().enumerate() {
                let label = spec.variant_label(variant);
                let mut hists = Vec::new();
                let mut bulks = Vec::new();
                let mut special = Vec::new();
                let mut bulk_max = 0;
                let mut dominant = 0usize;
                let mut mass = 0.0;
                for r in runs.iter() {
                    if let UnitResult::Special {
                        hist,
                        bulk,
                        special_degree,
                        bulk_max: run_max,
                    } = r
                    {
                        hists.push(hist.clone());
                        bulks.push(bulk.clone());
                        bulk_max = bulk_max.max(*run_max);
                        if let Some(d) = *special_degree {
                            special.push(d);
                            mass += 1.0 / hist.n_vertices as f64;
                            if d >= 10 * (*run_max).max(1) {
                                dominant += 1;
                            }
                        }
                    }
                }
                let hist = average_histograms(&hists)?;
                let bulk = average_histograms(&bulks)?;
                for (&k, &p) in &hist.probs {
                    data.rows
                        .push(vec![ordinals[variant].into(), k.into(), p.into()]);
                }
                let n_runs = runs.len() as f64;
                let degrees: Vec<f64> = special.iter().map(|&d| d as f64).collect();
                let (mean, std) = mean_std(&degrees);
                data.note(format!("{label}.special_mean_degree"), mean);
                data.note(format!("{label}.special_std_degree"), std);
                data.note(
                    format!("{label}.special_survival"),
                    special.len() as f64 / n_runs,
                );
                if let (Some(&lo), Some(&hi)) = (special.iter().min(), special.iter().max()) {
                    data.note(format!("{label}.peak_min"), lo as f64);
                    data.note(format!("{label}.peak_max"), hi as f64);
                    data.note(format!("{label}.bulk_max"), bulk_max as f64);
                    data.note(
                        format!("{label}.gap_decades"),
                        libm::log10(lo as f64 / bulk_max.max(1) as f64),
                    );
                }
                data.note(format!("{label}.peak_mass"), mass / n_runs);
                data.note(
                    format!("{label}.dominant_run_fraction"),
                    dominant as f64 / n_runs,
                );
                if let Some(peak) = separated_peak(&hist, analysis::DEFAULT_PEAK_MAX_MASS) {
                    data.note(
                        format!("{label}.distribution_gap_decades"),
                        peak.gap_decades,
                    );
                    data.note(
                        format!("{label}.distribution_peak_min"),
                        peak.peak_min as f64,
                    );
                    data.note(format!("{label}.distribution_peak_mass"), peak.mass);
                }
                let (k_min, k_max) = bulk.default_fit_window();
                if let Ok(fit) = fit_power_law(&bulk, k_min, k_max) {
                    data.fits.push((label.clone(), fit));
                }
                data.histograms.push((label, hist));
            }
            Ok(data)
        }
        Protocol::Diameter { series, sizes, .. } => {
            let mut data = FigureData::new(
                spec.figure,
                &["series", "n", "mean_distance", "std_dev", "mean_vertices"],
            );
            for (variant, runs) in per_variant.iter().enumerate() {
                let name = series[variant / sizes.len()].name;
                let n = sizes[variant % sizes.len()];
                let (dists, verts): (Vec<f64>, Vec<f64>) = runs
                    .iter()
                    .filter_map(|r| match r {
                        UnitResult::Distance { mean, vertices } => Some((*mean, *vertices as f64)),
                        _ => None,
                    })
                    .unzip();
                let (mean, std) = mean_std(&dists);
                let (mean_vertices, _) = mean_std(&verts);
                data.rows.push(vec![
                    name.into(),
                    n.into(),
                    mean.into(),
                    std.into(),
                    mean_vertices.into(),
                ]);
                data.note(format!("{name}.n{n}.mean_distance"), mean);
            }
            Ok(data)
        }
        Protocol::DegreeByOrdinal { series } => {
            let mut data = FigureData::new(
                spec.figure,
                &["series", "ordinal", "mean_degree", "survivors"],
            );
            for (variant, runs) in per_variant.iter().enumerate() {
                let name = series[variant].name;
                let mut acc = DegreeByOrdinal::new(series[variant].config.n_points as usize);
                for r in runs.iter() {
                    if let UnitResult::Ordinals(part) = r {
                        acc.merge(part);
                    }
                }
                let curve = acc.finish();
                for o in &curve {
                    data.rows.push(vec![
                        name.into(),
                        o.ordinal.into(),
                        o.mean_degree.unwrap_or(f64::NAN).into(),
                        o.survivors.into(),
                    ]);
                }
                for o in curve.iter().take(3) {
                    data.note(
                        format!("{name}.ordinal{}", o.ordinal),
                        o.mean_degree.unwrap_or(f64::NAN),
                    );
                }
                for (d, m) in ordinal_group_means(&curve, 10).into_iter().enumerate() {
                    data.note(format!("{name}.decile{d}"), m.unwrap_or(f64::NAN));
                }
            }
            Ok(data)
        }
        Protocol::Attacker { sizes, .. } => {
            let mut data = FigureData::new(
                spec.figure,
                &[
                    "n",
                    "mean_attacker_degree",
                    "mean_max_degree",
                    "attacker_is_max_fraction",
                    "attacker_below_max_fraction",
                ],
            );
            for (variant, runs) in per_variant.iter().enumerate() {
                let pairs: Vec<(usize, usize)> = runs
                    .iter()
                    .filter_map(|r| match r {
                        UnitResult::Attacker {
                            attacker_degree,
                            max_degree,
                        } => Some((*attacker_degree, *max_degree)),
                        _ => None,
                    })
                    .collect();
                let m = pairs.len() as f64;
                let att: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
                let max: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
                let is_max = pairs.iter().filter(|p| p.0 == p.1).count() as f64 / m;
                let below = pairs.iter().filter(|p| p.0 < p.1).count() as f64 / m;
                let n = sizes[variant];
                data.rows.push(vec![
                    n.into(),
                    mean_std(&att).0.into(),
                    mean_std(&max).0.into(),
                    is_max.into(),
                    below.into(),
                ]);
                data.note(format!("n{n}.attacker_is_max_fraction"), is_max);
                data.note(format!("n{n}.attacker_below_max_fraction"), below);
            }
            Ok(data)
        }
        Protocol::Learning {
            added, total_time, ..
        } => {
            let mut data = FigureData::new(
                spec.figure,
                &[
                    "added",
                    "e_per_input",
                    "mean_final_vertices",
                    "std_final_vertices",
                ],
            );
            for (idx, &v) in added.iter().enumerate() {
                let finals: Vec<f64> = per_variant[0]
                    .iter()
                    .filter_map(|r| match r {
                        UnitResult::Learning { final_vertices } => {
                            final_vertices.get(idx).map(|&x| x as f64)
                        }
                        _ => None,
                    })
                    .collect();
                let (mean, std) = mean_std(&finals);
                data.rows.push(vec![
                    v.into(),
                    (total_time / v).into(),
                    mean.into(),
                    std.into(),
                ]);
                data.note(format!("added{v}.mean_final_vertices"), mean);
            }
            Ok(data)
        }
    }
}

fn average(runs: &[UnitResult]) -> Result<DegreeHistogram> {
    let hists: Vec<DegreeHistogram> = runs
        .iter()
        .filter_map(|r| match r {
            UnitResult::Histogram { hist } => Some(hist.clone()),
            _ => None,
        })
        .collect();
    average_histograms(&hists)
}

/// Runs every unit in order on the current thread and aggregates.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<FigureData> {
    spec.validate()?;
    let results = spec
        .units()
        .into_iter()
        .map(|u| run_unit(spec, u).map(|o| o.result))
        .collect::<Result<Vec<_>>>()?;
    aggregate(spec, &results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids_round_trip() {
        for f in FigureId::ALL {
            assert_eq!(FigureId::parse(f.as_str()).unwrap(), f);
        }
        assert_eq!(FigureId::parse("9"), Err(Error::UnknownFigure("9".into())));
    }

    #[test]
    fn table_one_presets() {
        let spec = preset(FigureId::Fig1a, Scale::Full);
        assert_eq!(spec.runs, 200);
        let Protocol::DegreeDistribution { config } = &spec.protocol else {
            panic!()
        };
        assert_eq!(
            (config.n_points, config.u, config.e, config.f_forget),
            (10_000, 2, 1, 0)
        );
        assert_eq!(config.fitness, FitnessSource::Constant(1.0));

        let spec = preset(FigureId::Fig1bType1, Scale::Desk);
        assert_eq!(spec.runs, 20);
        let Protocol::DegreeDistribution { config } = &spec.protocol else {
            panic!()
        };
        assert_eq!(
            (config.h, config.u, config.e, config.f_forget),
            (0.5, 2, 10, 1)
        );
        assert_eq!(
            config.sign_counts,
            SignCountsSource::Constant(SignCounts::new(1.0, 1.0, 1.0))
        );
        let Protocol::DegreeDistribution { config } =
            preset(FigureId::Fig1bType2, Scale::Full).protocol
        else {
            panic!()
        };
        assert_eq!(config.fitness, FitnessSource::Uniform);
        assert_eq!(config.sign_counts, SignCountsSource::Uniform);
    }

    #[test]
    fn star_presets() {
        let spec = preset(FigureId::Fig3, Scale::Full);
        assert_eq!(spec.runs, 10_000);
        assert_eq!(spec.variants(), 2);
        let c = spec.variant_config(WorkUnit { variant: 1, run: 0 });
        assert_eq!(c.n_points, 1000);
        let o = c.override_for(31).unwrap();
        assert_eq!(o.fitness, Some(3.0));
        assert_eq!(c.time_budget(31), 10);

        let spec = preset(FigureId::Fig5, Scale::Desk);
        assert_eq!(spec.runs, 200);
        let c = spec.variant_config(WorkUnit { variant: 0, run: 0 });
        assert_eq!(c.time_budget(999), 1000);
        assert_eq!(c.time_budget(998), 10);
    }

    #[test]
    fn learning_preset() {
        let spec = preset(FigureId::Fig7, Scale::Full);
        let Protocol::Learning {
            base,
            new_info,
            added,
            total_time,
        } = &spec.protocol
        else {
            panic!()
        };
        assert_eq!(
            (base.n_points, base.u, base.e, base.f_forget),
            (1000, 1, 2, 0)
        );
        assert_eq!(new_info.f_forget, 10);
        assert_eq!(added.first(), Some(&10));
        assert_eq!(added.last(), Some(&100));
        assert_eq!(*total_time, 1000);
        spec.validate().unwrap();
    }

    #[test]
    fn units_and_seeds() {
        let mut spec = preset(FigureId::Fig2, Scale::Desk);
        spec.seed = 40;
        assert_eq!(spec.units().len(), 2 * 7 * 10);
        let c = spec.variant_config(WorkUnit { variant: 8, run: 3 });
        assert_eq!(c.n_points, 200);
        assert_eq!(c.fitness, FitnessSource::Uniform);
        assert_eq!(c.seed, 43);
        assert_eq!(spec.variant_label(8), "type2-n200");
    }

    #[test]
    fn small_experiments_are_reproducible() {
        let mut spec = preset(FigureId::Fig1bType2, Scale::Desk);
        spec.runs = 3;
        if let Protocol::DegreeDistribution { config } = &mut spec.protocol {
            config.n_points = 300;
        }
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.columns, vec!["k", "p_k"]);
        let total: f64 = a.histograms[0].1.total();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn attacker_units() {
        let mut spec = preset(FigureId::Fig6, Scale::Desk);
        spec.runs = 2;
        if let Protocol::Attacker { sizes, .. } = &mut spec.protocol {
            *sizes = vec![50];
        }
        let data = run_experiment(&spec).unwrap();
        assert_eq!(data.rows.len(), 1);
        let c = spec.variant_config(WorkUnit { variant: 0, run: 0 });
        assert_eq!(c.n_points, 51);
        assert_eq!(c.time_budget(50), 100);
    }
}

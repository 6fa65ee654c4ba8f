//! Sweeps over (use case × RIS size), and the KPI statistics computed from the
//! resulting sample pools.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::{enumerate_realizations, ScenarioRealization, TemplateScenario, UePlacement, UseCase};
use crate::error::{Error, Result};
use crate::geometry::{element_positions, place_nodes};
use crate::link::{noise_power, to_db, watts_to_dbm};
use crate::scattering::{link_power, PhaseControl, PhaseStates, RisPanel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RisSize {
    pub n_v: usize,
    pub n_h: usize,
}

impl RisSize {
    pub const fn new(n_v: usize, n_h: usize) -> Self {
        RisSize { n_v, n_h }
    }

    pub const fn square(n: usize) -> Self {
        RisSize { n_v: n, n_h: n }
    }

    pub fn elements(&self) -> usize {
        self.n_v * self.n_h
    }
}

impl fmt::Display for RisSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_v, self.n_h)
    }
}

impl FromStr for RisSize {
    type Err = Error;

    /// `"20x30"` (rows × columns) or `"20"` for a square panel.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param("size", format!("expected NxM or N with N, M >= 1, got `{s}`"));
        let parse = |t: &str| t.trim().parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(bad);
        match s.split_once(['x', 'X']) {
            Some((v, h)) => Ok(RisSize::new(parse(v)?, parse(h)?)),
            None => parse(s).map(RisSize::square),
        }
    }
}

impl Serialize for RisSize {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RisSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Square panels 5×5 through 100×100.
pub fn default_ladder() -> Vec<RisSize> {
    [5, 10, 15, 20, 25, 30, 40, 50, 60, 80, 100]
        .into_iter()
        .map(RisSize::square)
        .collect()
}

pub const DEFAULT_THRESHOLDS_DB: [f64; 4] = [5.0, 10.0, 20.0, 30.0];
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub realization_id: usize,
    /// Received signal power in watts.
    pub mu: f64,
    /// Linear SNR.
    pub gamma: f64,
}

impl Sample {
    pub fn gamma_db(&self) -> f64 {
        to_db(self.gamma)
    }

    pub fn mu_dbm(&self) -> f64 {
        watts_to_dbm(self.mu)
    }

    pub fn is_shadowed(&self) -> bool {
        self.mu == 0.0
    }
}

/// All samples of one (use case, RIS size) pair, ordered by realization id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiPool {
    pub usecase_id: u32,
    pub ris_size: RisSize,
    pub samples: Vec<Sample>,
}

impl KpiPool {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn shadow_fraction(&self) -> f64 {
        let n = self.samples.iter().filter(|s| s.is_shadowed()).count();
        n as f64 / self.samples.len().max(1) as f64
    }

    pub fn power_dbm(&self) -> Vec<f64> {
        self.samples.iter().map(Sample::mu_dbm).collect()
    }

    pub fn snr_db(&self) -> Vec<f64> {
        self.samples.iter().map(Sample::gamma_db).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub bearings_deg: Vec<f64>,
    pub phase_states: PhaseStates,
    pub e_b: f64,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl SweepOptions {
    pub fn for_usecase(uc: &UseCase) -> Self {
        SweepOptions {
            bearings_deg: uc.bearings(),
            phase_states: PhaseStates::ONE_BIT,
            e_b: crate::catalog::defaults::E_B,
            workers: None,
        }
    }
}

/// Received power and SNR of one realization with the panel re-targeted at
/// its UE. Shadowed geometries yield a zero sample.
pub fn evaluate_realization(r: &ScenarioRealization, panel: &RisPanel, e_b: f64) -> Result<Sample> {
    let layout = place_nodes(&r.geometry)?;
    let grid = element_positions(panel, &layout);
    let mu = link_power(panel, &grid, &layout, &r.radio, PhaseControl::Targeted);
    let n_o = noise_power(&r.noise);
    Ok(Sample {
        realization_id: r.realization_id,
        mu,
        gamma: mu * e_b / n_o,
    })
}

fn evaluate_all(realizations: &[ScenarioRealization], panel: &RisPanel, e_b: f64) -> Result<Vec<Sample>> {
    let results: Vec<Result<Sample>> = realizations
        .par_iter()
        .map(|r| evaluate_realization(r, panel, e_b))
        .collect();
    // first failure by id, independent of scheduling
    results
        .into_iter()
        .zip(realizations)
        .map(|(res, r)| {
            res.map_err(|e| Error::Realization {
                realization_id: r.realization_id,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Evaluates every realization of `uc` for each size. Output is identical for
/// any worker count: samples are placed by realization id.
pub fn run_sweep(uc: &UseCase, sizes: &[RisSize], opts: &SweepOptions) -> Result<Vec<KpiPool>> {
    if sizes.is_empty() {
        return Err(Error::Empty("size ladder is empty".into()));
    }
    if !(opts.e_b.is_finite() && opts.e_b > 0.0) {
        return Err(Error::param("e_b", "must be > 0"));
    }
    let space = enumerate_realizations(uc, &opts.bearings_deg)?;
    let realizations: Vec<ScenarioRealization> = space.iter().collect();
    let sweep = || -> Result<Vec<KpiPool>> {
        sizes
            .iter()
            .map(|&size| {
                let panel = uc.panel(size.n_v, size.n_h).with_phase_states(opts.phase_states);
                Ok(KpiPool {
                    usecase_id: uc.id,
                    ris_size: size,
                    samples: evaluate_all(&realizations, &panel, opts.e_b)?,
                })
            })
            .collect()
    };
    match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Data(format!("thread pool: {e}")))?
            .install(sweep),
        None => sweep(),
    }
}

/// SNR seen by a UE at each bearing of the single-link template, with the
/// panel re-targeted per bearing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BearingPoint {
    pub bearing_deg: f64,
    pub mu: f64,
    pub snr_db: f64,
}

pub fn bearing_sweep(
    template: &TemplateScenario,
    size: RisSize,
    bearings_deg: &[f64],
    phase_states: PhaseStates,
    placement: UePlacement,
) -> Result<Vec<BearingPoint>> {
    let panel = template.panel(size.n_v, size.n_h).with_phase_states(phase_states);
    let n_o = noise_power(&template.noise);
    bearings_deg
        .iter()
        .map(|&b| {
            let layout = template.with_bearing(b).layout(placement)?;
            let grid = element_positions(&panel, &layout);
            let mu = link_power(&panel, &grid, &layout, &template.radio, PhaseControl::Targeted);
            Ok(BearingPoint {
                bearing_deg: b,
                mu,
                snr_db: to_db(mu / n_o),
            })
        })
        .collect()
}

/// Max minus min in dB.
pub fn spread_db(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// How per-sample values are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AveragingDomain {
    #[default]
    Linear,
    Db,
}

fn mean_db(values: impl ExactSizeIterator<Item = f64>, domain: AveragingDomain) -> f64 {
    let n = values.len() as f64;
    match domain {
        AveragingDomain::Linear => to_db(values.sum::<f64>() / n),
        AveragingDomain::Db => values.map(to_db).sum::<f64>() / n,
    }
}

/// Mean received power in dBW; shadowed samples count as zero power.
pub fn mean_power_db(pool: &KpiPool, domain: AveragingDomain) -> f64 {
    mean_db(pool.samples.iter().map(|s| s.mu), domain)
}

pub fn mean_power_dbm(pool: &KpiPool, domain: AveragingDomain) -> f64 {
    mean_power_db(pool, domain) + 30.0
}

pub fn mean_snr_db(pool: &KpiPool, domain: AveragingDomain) -> f64 {
    mean_db(pool.samples.iter().map(|s| s.gamma), domain)
}

/// Fraction of samples strictly below `gamma_th_db`; shadowed samples are
/// always in outage.
pub fn outage_probability(pool: &KpiPool, gamma_th_db: f64) -> f64 {
    let below = pool
        .samples
        .iter()
        .filter(|s| s.gamma_db() < gamma_th_db)
        .count();
    below as f64 / pool.samples.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// Freedman–Diaconis width over the finite samples.
    FreedmanDiaconis,
    /// Equal-width bins spanning the finite samples.
    Count(usize),
    /// Explicit ascending edges; every finite sample must fall inside.
    Edges(Vec<f64>),
}

const MAX_BINS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    /// Whether `density` is normalized to unit area.
    pub normalized: bool,
    /// Samples at `-inf` dB, reported apart from the density.
    pub shadow_count: u64,
    pub shadow_mass: f64,
    pub sample_count: u64,
}

impl Histogram {
    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum()
    }
}

/// Type-7 (linear interpolation) quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let w = (hi - lo) / bins as f64;
    (0..=bins)
        .map(|i| if i == bins { hi } else { lo + w * i as f64 })
        .collect()
}

/// Density histogram of dB-domain samples; `-inf` values form a separate
/// point mass.
pub fn estimate_pdf(samples_db: &[f64], binning: &Binning) -> Result<Histogram> {
    if samples_db.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::Data("samples must be finite or -inf".into()));
    }
    let mut finite: Vec<f64> = samples_db.iter().copied().filter(|v| v.is_finite()).collect();
    let shadow = samples_db.len() - finite.len();
    if finite.is_empty() {
        return Err(Error::Empty("no finite samples: every sample is shadowed".into()));
    }
    finite.sort_by(f64::total_cmp);
    let (min, max) = (finite[0], finite[finite.len() - 1]);
    let n = finite.len();

    let edges = match binning {
        Binning::Edges(e) => {
            if e.len() < 2 || e.windows(2).any(|w| w[0] >= w[1]) || e.iter().any(|v| !v.is_finite()) {
                return Err(Error::param("edges", "need >= 2 finite, strictly ascending edges"));
            }
            if min < e[0] || max > e[e.len() - 1] {
                return Err(Error::Data(format!(
                    "samples span [{min}, {max}] outside edges [{}, {}]",
                    e[0],
                    e[e.len() - 1]
                )));
            }
            e.clone()
        }
        _ if max == min => vec![min - 0.5, min + 0.5],
        Binning::Count(bins) => {
            if *bins == 0 {
                return Err(Error::param("bins", "must be >= 1"));
            }
            uniform_edges(min, max, *bins)
        }
        Binning::FreedmanDiaconis => {
            let iqr = quantile(&finite, 0.75) - quantile(&finite, 0.25);
            let width = 2.0 * iqr / (n as f64).cbrt();
            let bins = if width > 0.0 {
                ((max - min) / width).ceil() as usize
            } else {
                // Sturges
                (n as f64).log2().ceil() as usize + 1
            };
            uniform_edges(min, max, bins.clamp(1, MAX_BINS))
        }
    };

    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    for &x in &finite {
        // last edge is inclusive
        let i = edges.partition_point(|&e| e <= x).saturating_sub(1).min(bins - 1);
        counts[i] += 1;
    }
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (n as f64 * (w[1] - w[0])))
        .collect();
    Ok(Histogram {
        edges,
        counts,
        density,
        normalized: true,
        shadow_count: shadow as u64,
        shadow_mass: shadow as f64 / samples_db.len() as f64,
        sample_count: n as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Criterion {
    MeanSnr,
    Outage,
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "mean_snr" | "mean" => Ok(Criterion::MeanSnr),
            "outage" | "op" => Ok(Criterion::Outage),
            _ => Err(Error::param("criterion", format!("expected mean-snr or outage, got `{s}`"))),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::MeanSnr => "MEAN_SNR",
            Criterion::Outage => "OUTAGE",
        })
    }
}

/// Minimum ladder entry meeting a threshold, or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeOutcome {
    Size(RisSize),
    NotAchievable,
}

impl SizeOutcome {
    pub fn size(&self) -> Option<RisSize> {
        match self {
            SizeOutcome::Size(s) => Some(*s),
            SizeOutcome::NotAchievable => None,
        }
    }
}

impl fmt::Display for SizeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeOutcome::Size(s) => s.fmt(f),
            SizeOutcome::NotAchievable => f.write_str("NOT_ACHIEVABLE"),
        }
    }
}

impl Serialize for SizeOutcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SizeOutcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "NOT_ACHIEVABLE" {
            Ok(SizeOutcome::NotAchievable)
        } else {
            s.parse().map(SizeOutcome::Size).map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingResult {
    pub usecase_id: u32,
    pub thresholds_db: Vec<f64>,
    pub min_size_per_threshold: Vec<SizeOutcome>,
    pub criterion: Criterion,
    pub epsilon: f64,
}

/// Smallest ladder entry satisfying each threshold. `pools` must be ordered by
/// ascending element count.
pub fn min_ris_size(
    pools: &[KpiPool],
    thresholds_db: &[f64],
    criterion: Criterion,
    epsilon: f64,
    domain: AveragingDomain,
) -> Result<SizingResult> {
    let first = pools.first().ok_or_else(|| Error::Empty("size ladder is empty".into()))?;
    if pools
        .windows(2)
        .any(|w| w[0].ris_size.elements() > w[1].ris_size.elements())
    {
        return Err(Error::param("ladder", "must be sorted by ascending element count"));
    }
    if pools.iter().any(|p| p.is_empty()) {
        return Err(Error::Empty("ladder contains an empty pool".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::param("epsilon", format!("must lie in [0, 1], got {epsilon}")));
    }
    let means: Vec<f64> = pools.iter().map(|p| mean_snr_db(p, domain)).collect();
    let outcomes = thresholds_db
        .iter()
        .map(|&th| {
            let hit = pools.iter().zip(&means).find(|(pool, &mean)| match criterion {
                Criterion::MeanSnr => mean >= th,
                Criterion::Outage => outage_probability(pool, th) <= epsilon,
            });
            hit.map_or(SizeOutcome::NotAchievable, |(p, _)| SizeOutcome::Size(p.ris_size))
        })
        .collect();
    Ok(SizingResult {
        usecase_id: first.usecase_id,
        thresholds_db: thresholds_db.to_vec(),
        min_size_per_threshold: outcomes,
        criterion,
        epsilon,
    })
}

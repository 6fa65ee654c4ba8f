//! Versioned CSV and JSON output schemas.
//!
//! Every artifact carries `schema_version`, the producing tool version and the
//! resolved run configuration. CSV files carry these as leading `#` comment
//! lines, followed by a header row.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::catalog::{RealizationSpace, UseCase};
use crate::error::{Error, Result};
use crate::kpi::{
    estimate_pdf, mean_power_dbm, mean_snr_db, outage_probability, AveragingDomain, Binning, Histogram,
    KpiPool, RisSize, SizingResult,
};
use crate::link::Decibel;
use crate::replay::{ComparisonStats, ReplayCurve, Trajectory};

pub const SCHEMA_VERSION: u32 = 1;

/// How shadowed (zero-power) realizations enter the statistics.
pub const SHADOW_POLICY: &str = "retained_as_zero_power";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(tool_version: &str, config: serde_json::Value) -> Self {
        Provenance {
            schema_version: SCHEMA_VERSION,
            tool_version: tool_version.to_string(),
            config,
        }
    }

    fn write_csv_preamble<W: Write>(&self, w: &mut W) -> Result<()> {
        let config = serde_json::to_string(&self.config).map_err(|e| Error::Data(e.to_string()))?;
        writeln!(w, "# schema_version={}", self.schema_version)
            .and_then(|_| writeln!(w, "# tool_version={}", self.tool_version))
            .and_then(|_| writeln!(w, "# config={config}"))
            .map_err(io_err)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Data(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutagePoint {
    pub threshold_db: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub ris_size: RisSize,
    pub elements: usize,
    pub samples: usize,
    pub mean_power_dbm: Decibel,
    pub mean_snr_db: Decibel,
    pub shadow_fraction: f64,
    pub outage: Vec<OutagePoint>,
    /// `None` when every sample is shadowed.
    pub power_pdf_dbm: Option<Histogram>,
    pub snr_pdf_db: Option<Histogram>,
}

pub fn summarize_pool(
    pool: &KpiPool,
    thresholds_db: &[f64],
    binning: &Binning,
    domain: AveragingDomain,
) -> Result<SizeSummary> {
    let pdf = |xs: Vec<f64>| match estimate_pdf(&xs, binning) {
        Ok(h) => Ok(Some(h)),
        Err(Error::Empty(_)) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(SizeSummary {
        ris_size: pool.ris_size,
        elements: pool.ris_size.elements(),
        samples: pool.len(),
        mean_power_dbm: Decibel(mean_power_dbm(pool, domain)),
        mean_snr_db: Decibel(mean_snr_db(pool, domain)),
        shadow_fraction: pool.shadow_fraction(),
        outage: thresholds_db
            .iter()
            .map(|&t| OutagePoint {
                threshold_db: t,
                probability: outage_probability(pool, t),
            })
            .collect(),
        power_pdf_dbm: pdf(pool.power_dbm())?,
        snr_pdf_db: pdf(pool.snr_db())?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub kind: String,
    pub usecase: UseCase,
    pub realizations: usize,
    pub averaging: AveragingDomain,
    pub shadow_policy: String,
    pub sizes: Vec<SizeSummary>,
    pub sizing: SizingResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub kind: String,
    pub usecase: UseCase,
    pub mean_snr_db: Vec<(RisSize, Decibel)>,
    pub sizing: SizingResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub kind: String,
    pub usecase_id: u32,
    pub shadow_policy: String,
    pub sizes: Vec<PdfEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfEntry {
    pub ris_size: RisSize,
    pub power_pdf_dbm: Option<Histogram>,
    pub snr_pdf_db: Option<Histogram>,
}

pub const POOL_CSV_HEADER: [&str; 9] = [
    "realization_id",
    "h_bs_m",
    "h_ris_m",
    "h_ue_m",
    "d_bs_ris_m",
    "d_ris_ue_m",
    "bearing_deg",
    "mu_dbm",
    "gamma_db",
];

/// One row per sample, realization parameters included.
pub fn write_pool_csv<W: Write>(
    mut w: W,
    provenance: &Provenance,
    space: &RealizationSpace,
    pool: &KpiPool,
) -> Result<()> {
    provenance.write_csv_preamble(&mut w)?;
    writeln!(w, "# usecase_id={} ris_size={}", pool.usecase_id, pool.ris_size).map_err(io_err)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(POOL_CSV_HEADER).map_err(|e| Error::Data(e.to_string()))?;
    for s in &pool.samples {
        let r = space
            .get(s.realization_id)
            .ok_or_else(|| Error::Data(format!("realization {} not in space", s.realization_id)))?;
        let g = r.geometry;
        csv.write_record([
            s.realization_id.to_string(),
            g.h_bs.to_string(),
            g.h_ris.to_string(),
            g.h_ue.to_string(),
            g.d_bs_ris.to_string(),
            g.d_ris_ue.to_string(),
            g.bearing_ue.to_string(),
            Decibel(s.mu_dbm()).to_string(),
            Decibel(s.gamma_db()).to_string(),
        ])
        .map_err(|e| Error::Data(e.to_string()))?;
    }
    csv.flush().map_err(io_err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRow {
    pub realization_id: usize,
    pub mu_dbm: Decibel,
    pub gamma_db: Decibel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolDocument {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub kind: String,
    pub usecase_id: u32,
    pub ris_size: RisSize,
    pub samples: Vec<PoolRow>,
}

impl PoolDocument {
    pub fn new(provenance: Provenance, pool: &KpiPool) -> Self {
        PoolDocument {
            provenance,
            kind: "pool".into(),
            usecase_id: pool.usecase_id,
            ris_size: pool.ris_size,
            samples: pool
                .samples
                .iter()
                .map(|s| PoolRow {
                    realization_id: s.realization_id,
                    mu_dbm: Decibel(s.mu_dbm()),
                    gamma_db: Decibel(s.gamma_db()),
                })
                .collect(),
        }
    }
}

/// `label,distance_m,snr_db_ple_<p>...`; distance is straight-line to the RIS
/// center.
pub fn write_replay_csv<W: Write>(
    mut w: W,
    provenance: &Provenance,
    trajectory: &Trajectory,
    ris_center: crate::geometry::Vec3,
    curves: &[ReplayCurve],
) -> Result<()> {
    provenance.write_csv_preamble(&mut w)?;
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["label".to_string(), "distance_m".to_string()];
    header.extend(curves.iter().map(|c| format!("snr_db_ple_{}", c.ple)));
    csv.write_record(&header).map_err(|e| Error::Data(e.to_string()))?;
    for (i, p) in trajectory.points().iter().enumerate() {
        let mut row = vec![p.label.clone(), (p.position - ris_center).norm().to_string()];
        row.extend(curves.iter().map(|c| c.snr_db_per_point[i].to_string()));
        csv.write_record(&row).map_err(|e| Error::Data(e.to_string()))?;
    }
    csv.flush().map_err(io_err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayStatsEntry {
    pub ple: f64,
    pub mean_snr_db: Decibel,
    pub shadowed_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayStats {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub kind: String,
    pub points: usize,
    pub measurements_present: bool,
    pub curves: Vec<ReplayStatsEntry>,
}

/// Reads the `#`-prefixed provenance block of a CSV artifact.
pub fn read_csv_preamble(text: &str) -> Option<Provenance> {
    let mut schema = None;
    let mut tool = None;
    let mut config = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("schema_version=") {
            schema = v.parse().ok();
        } else if let Some(v) = body.strip_prefix("tool_version=") {
            tool = Some(v.to_string());
        } else if let Some(v) = body.strip_prefix("config=") {
            config = serde_json::from_str(v).ok();
        }
    }
    Some(Provenance {
        schema_version: schema?,
        tool_version: tool?,
        config: config?,
    })
}

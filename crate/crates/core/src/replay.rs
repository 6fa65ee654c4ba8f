//! Replays a measured UE trajectory through the simulator: fixed BS and RIS,
//! phases re-targeted at every point, one SNR curve per path-loss exponent.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{element_positions, NodeLayout, Vec3};
use crate::link::{dbm_to_watts, from_db, noise_power, to_db, Decibel, NoiseParams, BOLTZMANN};
use crate::scattering::{link_power, PhaseControl, PhaseStates, RadioParams, RisPanel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub position: Vec3,
    pub label: String,
    /// Measured SNR at this point, when known.
    pub measured_snr_db: Option<Decibel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<TrajectoryPoint>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryRow {
    x_m: f64,
    y_m: f64,
    z_m: f64,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snr_db: Option<String>,
}

impl Trajectory {
    pub fn new(points: Vec<TrajectoryPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("trajectory has no points".into()));
        }
        let mut labels: Vec<&str> = points.iter().map(|p| p.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Data(format!("duplicate trajectory label `{}`", w[0])));
        }
        if let Some(p) = points.iter().find(|p| !p.position.is_finite()) {
            return Err(Error::Data(format!("point `{}` has non-finite coordinates", p.label)));
        }
        Ok(Trajectory { points })
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Measured SNR for every point, if the trajectory carries a full column.
    pub fn measurements(&self) -> Option<Vec<Decibel>> {
        self.points.iter().map(|p| p.measured_snr_db).collect()
    }

    /// Reads `x_m,y_m,z_m,label[,snr_db]` CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for (i, row) in rdr.deserialize::<TrajectoryRow>().enumerate() {
            let row = row.map_err(|e| Error::Data(format!("trajectory row {}: {e}", i + 1)))?;
            let measured = match row.snr_db.as_deref().map(str::trim) {
                None | Some("") => None,
                Some(s) => Some(s.parse::<Decibel>()?),
            };
            points.push(TrajectoryPoint {
                position: Vec3::new(row.x_m, row.y_m, row.z_m),
                label: row.label,
                measured_snr_db: measured,
            });
        }
        Trajectory::new(points)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for p in &self.points {
            w.serialize(TrajectoryRow {
                x_m: p.position.x,
                y_m: p.position.y,
                z_m: p.position.z,
                label: p.label.clone(),
                snr_db: p.measured_snr_db.map(|d| d.to_string()),
            })
            .map_err(|e| Error::Data(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Data(e.to_string()))
    }
}

/// Fixed part of a replay: node positions, panel and radio front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayScenario {
    pub bs: Vec3,
    pub ris_center: Vec3,
    pub ris_normal: Vec3,
    pub panel: RisPanel,
    /// Base radio parameters; the path-loss exponents are replaced per curve.
    pub radio: RadioParams,
    pub noise: NoiseParams,
    pub e_b: f64,
}

impl ReplayScenario {
    /// Outdoor 26 GHz rooftop deployment: BS mast at 88.7 m, RIS at 64 m,
    /// 80 m apart. Panel size, power, bandwidth and bearings are placeholder
    /// values, not measured ones.
    pub fn rooftop_example() -> Self {
        let f_c = 26e9;
        let (s, c) = crate::geometry::sin_cos_deg(EXAMPLE_BS_BEARING_DEG);
        ReplayScenario {
            bs: Vec3::new(80.0 * c, 80.0 * s, 88.7),
            ris_center: Vec3::new(0.0, 0.0, 64.0),
            ris_normal: Vec3::X,
            panel: RisPanel::half_wavelength(64, 64, f_c).with_phase_states(PhaseStates::ONE_BIT),
            radio: RadioParams {
                f_c,
                p_t: dbm_to_watts(30.0),
                g_t: from_db(20.0),
                g_r: from_db(0.0),
                ple_t: 2.0,
                ple_r: 2.0,
                q_pattern: 1.0,
            },
            noise: NoiseParams {
                t_s: 290.0,
                bw: 8.64e6,
                f_n: from_db(7.0),
                k_b: BOLTZMANN,
            },
            e_b: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.panel.validate()?;
        self.radio.validate()?;
        self.noise.validate()?;
        NodeLayout::new(self.bs, self.ris_center, self.ris_normal, self.ris_center + self.ris_normal)?;
        if !(self.e_b.is_finite() && self.e_b > 0.0) {
            return Err(Error::param("e_b", "must be > 0"));
        }
        Ok(())
    }

    fn layout(&self, ue: Vec3) -> Result<NodeLayout> {
        NodeLayout::new(self.bs, self.ris_center, self.ris_normal, ue)
    }
}

pub const EXAMPLE_BS_BEARING_DEG: f64 = -30.0;
pub const EXAMPLE_UE_BEARING_DEG: f64 = 20.0;
pub const EXAMPLE_UE_HEIGHT_M: f64 = 1.5;

/// 141 UE points on a straight radial, 65 m to 205 m (straight-line) from the
/// RIS center in 1 m steps.
pub fn rooftop_example_trajectory() -> Trajectory {
    let scenario = ReplayScenario::rooftop_example();
    let dz = scenario.ris_center.z - EXAMPLE_UE_HEIGHT_M;
    let (s, c) = crate::geometry::sin_cos_deg(EXAMPLE_UE_BEARING_DEG);
    let points = (65..=205)
        .map(|d| {
            let ground = ((d * d) as f64 - dz * dz).sqrt();
            TrajectoryPoint {
                position: Vec3::new(ground * c, ground * s, EXAMPLE_UE_HEIGHT_M),
                label: format!("P{:03}", d - 64),
                measured_snr_db: None,
            }
        })
        .collect();
    Trajectory::new(points).expect("static trajectory is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayCurve {
    pub ple: f64,
    pub snr_db_per_point: Vec<Decibel>,
}

/// SNR at every trajectory point for each path-loss exponent (applied to both
/// legs). Points behind the panel get `-inf`.
pub fn replay(scenario: &ReplayScenario, trajectory: &Trajectory, ple_list: &[f64]) -> Result<Vec<ReplayCurve>> {
    if ple_list.is_empty() {
        return Err(Error::Empty("ple list is empty".into()));
    }
    if let Some(p) = ple_list.iter().find(|p| !(1.0..=4.0).contains(*p)) {
        return Err(Error::param("ple", format!("must lie in [1, 4], got {p}")));
    }
    scenario.validate()?;
    let layouts: Vec<NodeLayout> = trajectory
        .points
        .iter()
        .map(|p| scenario.layout(p.position).map_err(|e| Error::Data(format!("point `{}`: {e}", p.label))))
        .collect::<Result<_>>()?;
    let n_o = noise_power(&scenario.noise);
    Ok(ple_list
        .iter()
        .map(|&ple| {
            let radio = RadioParams {
                ple_t: ple,
                ple_r: ple,
                ..scenario.radio
            };
            let snr_db_per_point = layouts
                .par_iter()
                .map(|layout| {
                    let grid = element_positions(&scenario.panel, layout);
                    let mu = link_power(&scenario.panel, &grid, layout, &radio, PhaseControl::Targeted);
                    Decibel(to_db(mu * scenario.e_b / n_o))
                })
                .collect();
            ReplayCurve { ple, snr_db_per_point }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStats {
    /// Mean of `measured - simulated` in dB.
    pub bias_db: f64,
    pub rmse_db: f64,
    /// `None` when either series has no rank variance.
    pub spearman: Option<f64>,
    /// Points with finite values on both sides.
    pub points_used: usize,
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Bias, RMSE and rank correlation of `measured` against `curve`.
pub fn compare_with_measurements(curve: &ReplayCurve, measured: &[Decibel]) -> Result<ComparisonStats> {
    let sim = &curve.snr_db_per_point;
    if sim.len() != measured.len() {
        return Err(Error::LengthMismatch {
            left: sim.len(),
            right: measured.len(),
        });
    }
    let (s, m): (Vec<f64>, Vec<f64>) = sim
        .iter()
        .zip(measured)
        .filter(|(s, m)| s.0.is_finite() && m.0.is_finite())
        .map(|(s, m)| (s.0, m.0))
        .unzip();
    if s.is_empty() {
        return Err(Error::Empty("no point has finite simulated and measured SNR".into()));
    }
    let n = s.len() as f64;
    let diffs: Vec<f64> = m.iter().zip(&s).map(|(m, s)| m - s).collect();
    Ok(ComparisonStats {
        bias_db: diffs.iter().sum::<f64>() / n,
        rmse_db: (diffs.iter().map(|d| d * d).sum::<f64>() / n).sqrt(),
        spearman: spearman(&s, &m),
        points_used: s.len(),
    })
}

//! The sixteen built-in deployment use cases, custom use-case documents, and
//! exhaustive expansion into scenario realizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NodeLayout, ScenarioGeometryInput, Vec3};
use crate::link::{dbm_to_watts, from_db, NoiseParams};
use crate::scattering::{RadioParams, RisPanel};

/// Declared link defaults for quantities the use-case tables do not give.
pub mod defaults {
    pub const G_T_DBI: f64 = 10.0;
    pub const G_R_DBI: f64 = 0.0;
    pub const F_N_DB: f64 = 7.0;
    pub const T_S_KELVIN: f64 = 290.0;
    pub const PLE: f64 = 2.0;
    pub const Q_PATTERN: f64 = 1.0;
    pub const E_B: f64 = 1.0;
    pub const BS_BEARING_DEG: f64 = 0.0;

    /// -60° to +60° in 5° steps.
    pub fn bearings_deg() -> Vec<f64> {
        (-12..=12).map(|i| 5.0 * i as f64).collect()
    }
}

/// Smallest id a caller may assign to a custom use case.
pub const CUSTOM_ID_MIN: u32 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UseCase {
    pub id: u32,
    pub name: String,
    pub p_t_dbm: f64,
    pub f_c_mhz: f64,
    pub b_ue_khz: f64,
    pub h_bs_set: Vec<f64>,
    pub h_ris_set: Vec<f64>,
    pub h_ue_set: Vec<f64>,
    pub d_bs_ris_set: Vec<f64>,
    pub d_ris_ue_set: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_t_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_r_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f_n_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ple_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ple_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q_pattern: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bearings_deg: Option<Vec<f64>>,
}

/// On-disk form of a custom use case: a [`UseCase`] without its id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UseCaseDocument {
    pub name: String,
    pub p_t_dbm: f64,
    pub f_c_mhz: f64,
    pub b_ue_khz: f64,
    pub h_bs_set: Vec<f64>,
    pub h_ris_set: Vec<f64>,
    pub h_ue_set: Vec<f64>,
    pub d_bs_ris_set: Vec<f64>,
    pub d_ris_ue_set: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_t_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_r_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f_n_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ple_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ple_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q_pattern: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bearings_deg: Option<Vec<f64>>,
}

impl UseCase {
    pub fn from_document(doc: UseCaseDocument, id: u32) -> Self {
        UseCase {
            id,
            name: doc.name,
            p_t_dbm: doc.p_t_dbm,
            f_c_mhz: doc.f_c_mhz,
            b_ue_khz: doc.b_ue_khz,
            h_bs_set: doc.h_bs_set,
            h_ris_set: doc.h_ris_set,
            h_ue_set: doc.h_ue_set,
            d_bs_ris_set: doc.d_bs_ris_set,
            d_ris_ue_set: doc.d_ris_ue_set,
            g_t_dbi: doc.g_t_dbi,
            g_r_dbi: doc.g_r_dbi,
            f_n_db: doc.f_n_db,
            ple_t: doc.ple_t,
            ple_r: doc.ple_r,
            q_pattern: doc.q_pattern,
            bearings_deg: doc.bearings_deg,
        }
    }

    pub fn to_document(&self) -> UseCaseDocument {
        UseCaseDocument {
            name: self.name.clone(),
            p_t_dbm: self.p_t_dbm,
            f_c_mhz: self.f_c_mhz,
            b_ue_khz: self.b_ue_khz,
            h_bs_set: self.h_bs_set.clone(),
            h_ris_set: self.h_ris_set.clone(),
            h_ue_set: self.h_ue_set.clone(),
            d_bs_ris_set: self.d_bs_ris_set.clone(),
            d_ris_ue_set: self.d_ris_ue_set.clone(),
            g_t_dbi: self.g_t_dbi,
            g_r_dbi: self.g_r_dbi,
            f_n_db: self.f_n_db,
            ple_t: self.ple_t,
            ple_r: self.ple_r,
            q_pattern: self.q_pattern,
            bearings_deg: self.bearings_deg.clone(),
        }
    }

    pub fn f_c_hz(&self) -> f64 {
        self.f_c_mhz * 1e6
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.b_ue_khz * 1e3
    }

    pub fn radio(&self) -> RadioParams {
        RadioParams {
            f_c: self.f_c_hz(),
            p_t: dbm_to_watts(self.p_t_dbm),
            g_t: from_db(self.g_t_dbi.unwrap_or(defaults::G_T_DBI)),
            g_r: from_db(self.g_r_dbi.unwrap_or(defaults::G_R_DBI)),
            ple_t: self.ple_t.unwrap_or(defaults::PLE),
            ple_r: self.ple_r.unwrap_or(defaults::PLE),
            q_pattern: self.q_pattern.unwrap_or(defaults::Q_PATTERN),
        }
    }

    pub fn noise(&self) -> NoiseParams {
        NoiseParams {
            t_s: defaults::T_S_KELVIN,
            bw: self.bandwidth_hz(),
            f_n: from_db(self.f_n_db.unwrap_or(defaults::F_N_DB)),
            k_b: crate::link::BOLTZMANN,
        }
    }

    /// The use case's own bearing grid, or the default one.
    pub fn bearings(&self) -> Vec<f64> {
        self.bearings_deg.clone().unwrap_or_else(defaults::bearings_deg)
    }

    /// Standard panel of `n_v × n_h` cells at this use case's carrier.
    pub fn panel(&self, n_v: usize, n_h: usize) -> RisPanel {
        RisPanel::half_wavelength(n_v, n_h, self.f_c_hz())
    }

    /// Number of realizations for a bearing grid of `bearings` points.
    pub fn realization_count(&self, bearings: usize) -> usize {
        self.sets().iter().map(|s| s.len()).product::<usize>() * bearings
    }

    fn sets(&self) -> [&[f64]; 5] {
        [
            &self.h_bs_set,
            &self.h_ris_set,
            &self.h_ue_set,
            &self.d_bs_ris_set,
            &self.d_ris_ue_set,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::param("name", "must be non-empty"));
        }
        if !self.p_t_dbm.is_finite() {
            return Err(Error::param("p_t_dbm", "must be finite"));
        }
        for (field, v) in [("f_c_mhz", self.f_c_mhz), ("b_ue_khz", self.b_ue_khz)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(field, format!("must be positive, got {v}")));
            }
        }
        let named = [
            ("h_bs_set", &self.h_bs_set),
            ("h_ris_set", &self.h_ris_set),
            ("h_ue_set", &self.h_ue_set),
            ("d_bs_ris_set", &self.d_bs_ris_set),
            ("d_ris_ue_set", &self.d_ris_ue_set),
        ];
        for (field, set) in named {
            if set.is_empty() {
                return Err(Error::Document(format!("{field} must be non-empty")));
            }
            if let Some(bad) = set.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::Document(format!("{field} values must be positive, got {bad}")));
            }
        }
        for (field, v) in [("g_t_dbi", self.g_t_dbi), ("g_r_dbi", self.g_r_dbi)] {
            if let Some(v) = v.filter(|v| !v.is_finite()) {
                return Err(Error::param(field, format!("must be finite, got {v}")));
            }
        }
        if let Some(f) = self.f_n_db.filter(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(Error::param("f_n_db", format!("must be >= 0 dB, got {f}")));
        }
        self.radio().validate()?;
        if let Some(b) = &self.bearings_deg {
            validate_bearings(b)?;
        }
        Ok(())
    }
}

pub fn validate_bearings(bearings: &[f64]) -> Result<()> {
    if bearings.is_empty() {
        return Err(Error::Document("bearings_deg must be non-empty".into()));
    }
    if let Some(b) = bearings.iter().find(|b| !(b.is_finite() && b.abs() < 90.0)) {
        return Err(Error::param("bearings_deg", format!("bearings must lie in (-90, 90), got {b}")));
    }
    Ok(())
}

/// Parses and validates a JSON use-case document, assigning it `id`.
pub fn load_usecase(json: &str, id: u32) -> Result<UseCase> {
    if id < CUSTOM_ID_MIN {
        return Err(Error::param("id", format!("custom use cases need an id >= {CUSTOM_ID_MIN}")));
    }
    let doc: UseCaseDocument =
        serde_json::from_str(json).map_err(|e| Error::Document(e.to_string()))?;
    let uc = UseCase::from_document(doc, id);
    uc.validate()?;
    Ok(uc)
}

#[allow(clippy::too_many_arguments)]
fn uc(
    id: u32,
    name: &str,
    p_t_dbm: f64,
    f_c_mhz: f64,
    b_ue_khz: f64,
    h_bs: &[f64],
    h_ris: &[f64],
    h_ue: &[f64],
    d_bs_ris: &[f64],
    d_ris_ue: &[f64],
) -> UseCase {
    UseCase {
        id,
        name: name.to_string(),
        p_t_dbm,
        f_c_mhz,
        b_ue_khz,
        h_bs_set: h_bs.to_vec(),
        h_ris_set: h_ris.to_vec(),
        h_ue_set: h_ue.to_vec(),
        d_bs_ris_set: d_bs_ris.to_vec(),
        d_ris_ue_set: d_ris_ue.to_vec(),
        g_t_dbi: None,
        g_r_dbi: None,
        f_n_db: None,
        ple_t: None,
        ple_r: None,
        q_pattern: None,
        bearings_deg: None,
    }
}

pub fn builtin_usecases() -> Vec<UseCase> {
    const OUT_HBS: &[f64] = &[10.0, 15.0, 20.0, 30.0];
    const OUT_HRIS: &[f64] = &[10.0, 25.0, 40.0];
    const UE_TALL: &[f64] = &[1.0, 2.0, 5.0, 15.0, 30.0, 50.0, 100.0];
    const UE_RURAL: &[f64] = &[1.0, 2.0, 5.0, 15.0, 30.0];
    const IND_SMALL_HBS: &[f64] = &[2.0, 3.0, 4.0];
    const IND_LARGE: &[f64] = &[4.0, 6.0, 8.0, 10.0];
    const IND_LARGE_UE: &[f64] = &[1.0, 2.0, 4.0, 6.0, 8.0];
    vec![
        uc(1, "Sub-6 Umi", 37.0, 3500.0, 1440.0, OUT_HBS, OUT_HRIS, UE_TALL,
           &[50.0, 100.0, 150.0, 200.0], &[50.0, 100.0, 150.0, 200.0]),
        uc(2, "Sub-6 Uma", 46.0, 3500.0, 1440.0, OUT_HBS, OUT_HRIS, UE_TALL,
           &[200.0, 300.0, 400.0, 500.0], &[200.0, 300.0, 400.0, 500.0]),
        uc(3, "Sub-6 RMa", 52.0, 3500.0, 1440.0, OUT_HBS, OUT_HRIS, UE_RURAL,
           &[500.0, 1000.0, 1500.0, 2000.0], &[500.0, 1000.0, 1500.0, 2000.0]),
        uc(4, "FR3 Umi", 37.0, 8000.0, 2880.0, OUT_HBS, OUT_HRIS, UE_TALL,
           &[50.0, 75.0, 125.0, 150.0], &[50.0, 75.0, 125.0, 150.0]),
        uc(5, "FR3 Uma", 46.0, 8000.0, 2880.0, OUT_HBS, OUT_HRIS, UE_TALL,
           &[100.0, 175.0, 225.0, 300.0], &[50.0, 75.0, 125.0, 150.0]),
        uc(6, "FR3 RMa", 52.0, 8000.0, 2880.0, OUT_HBS, OUT_HRIS, UE_RURAL,
           &[300.0, 700.0, 1100.0, 1500.0], &[300.0, 700.0, 1100.0, 1500.0]),
        uc(7, "mmW Umi", 40.0, 27000.0, 8640.0, OUT_HBS, OUT_HRIS, UE_TALL,
           &[20.0, 50.0, 70.0, 100.0], &[20.0, 50.0, 70.0, 100.0]),
        uc(8, "mmW Uma", 49.0, 27000.0, 8640.0, OUT_HBS, OUT_HRIS, UE_TALL,
           &[50.0, 100.0, 150.0, 200.0], &[50.0, 100.0, 150.0, 200.0]),
        uc(9, "mmW RMa", 55.0, 27000.0, 17280.0, OUT_HBS, OUT_HRIS, UE_RURAL,
           &[100.0, 400.0, 700.0, 1000.0], &[100.0, 400.0, 700.0, 1000.0]),
        uc(10, "Home Wifi", 30.0, 6000.0, 2160.0, &[1.0, 2.0, 3.0], &[2.0, 3.0], &[1.0, 2.0],
           &[3.0, 5.0, 8.0], &[3.0, 5.0, 8.0]),
        uc(11, "Sub-6 GHz Small Office", 30.0, 3500.0, 1440.0, IND_SMALL_HBS, &[2.0, 3.0, 4.0],
           &[1.0, 2.0, 3.0], &[3.0, 10.0, 15.0, 20.0], &[3.0, 10.0, 15.0, 20.0]),
        uc(12, "Sub-6 GHz Large Industrial", 37.0, 3500.0, 2880.0, IND_LARGE, IND_LARGE,
           IND_LARGE_UE, &[20.0, 40.0, 60.0, 80.0], &[20.0, 40.0, 60.0, 80.0]),
        uc(13, "FR3 Small Office", 30.0, 8000.0, 4320.0, IND_SMALL_HBS, &[2.0, 4.0, 6.0],
           &[1.0, 2.0], &[2.0, 5.0, 10.0, 15.0], &[2.0, 5.0, 10.0, 15.0]),
        uc(14, "FR3 Large Industrial", 37.0, 8000.0, 8640.0, IND_LARGE, IND_LARGE, IND_LARGE_UE,
           &[10.0, 30.0, 50.0, 80.0], &[10.0, 30.0, 50.0, 80.0]),
        uc(15, "mmWave Small Office", 30.0, 27000.0, 8640.0, IND_SMALL_HBS, &[2.0, 4.0, 6.0],
           &[1.0, 2.0], &[1.0, 3.0, 6.5, 10.0], &[1.0, 3.0, 6.5, 10.0]),
        uc(16, "mmWave Large Industrial", 37.0, 27000.0, 8640.0, IND_LARGE, IND_LARGE,
           IND_LARGE_UE, &[5.0, 20.0, 50.0, 80.0], &[5.0, 20.0, 50.0, 80.0]),
    ]
}

pub fn builtin_usecase(id: u32) -> Option<UseCase> {
    builtin_usecases().into_iter().find(|u| u.id == id)
}

/// One concrete geometry with its radio and noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRealization {
    pub realization_id: usize,
    pub geometry: ScenarioGeometryInput,
    pub radio: RadioParams,
    pub noise: NoiseParams,
}

/// Cartesian product `h_bs × h_ris × h_ue × d_bs_ris × d_ris_ue × bearings`,
/// with the bearing varying fastest. Supports random access by id.
#[derive(Debug, Clone)]
pub struct RealizationSpace {
    usecase: UseCase,
    bearings: Vec<f64>,
    radio: RadioParams,
    noise: NoiseParams,
}

impl RealizationSpace {
    pub fn len(&self) -> usize {
        self.usecase.realization_count(self.bearings.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn usecase(&self) -> &UseCase {
        &self.usecase
    }

    pub fn bearings(&self) -> &[f64] {
        &self.bearings
    }

    pub fn get(&self, id: usize) -> Option<ScenarioRealization> {
        if id >= self.len() {
            return None;
        }
        let uc = &self.usecase;
        let mut rest = id;
        let mut digit = |n: usize| {
            let d = rest % n;
            rest /= n;
            d
        };
        let b = digit(self.bearings.len());
        let d_ru = digit(uc.d_ris_ue_set.len());
        let d_br = digit(uc.d_bs_ris_set.len());
        let h_ue = digit(uc.h_ue_set.len());
        let h_ris = digit(uc.h_ris_set.len());
        let h_bs = digit(uc.h_bs_set.len());
        Some(ScenarioRealization {
            realization_id: id,
            geometry: ScenarioGeometryInput {
                h_bs: uc.h_bs_set[h_bs],
                h_ris: uc.h_ris_set[h_ris],
                h_ue: uc.h_ue_set[h_ue],
                d_bs_ris: uc.d_bs_ris_set[d_br],
                d_ris_ue: uc.d_ris_ue_set[d_ru],
                bearing_bs: defaults::BS_BEARING_DEG,
                bearing_ue: self.bearings[b],
            },
            radio: self.radio,
            noise: self.noise,
        })
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = ScenarioRealization> + '_ {
        (0..self.len()).map(move |id| self.get(id).expect("id in range"))
    }
}

pub fn enumerate_realizations(uc: &UseCase, bearings: &[f64]) -> Result<RealizationSpace> {
    uc.validate()?;
    validate_bearings(bearings)?;
    let space = RealizationSpace {
        usecase: uc.clone(),
        bearings: bearings.to_vec(),
        radio: uc.radio(),
        noise: uc.noise(),
    };
    if space.is_empty() {
        return Err(Error::Empty("use case expands to zero realizations".into()));
    }
    Ok(space)
}

/// The single-link reference layout: 3.5 GHz, 15 kHz, 20 W, BS at
/// `(1200, 0, 122)`, RIS center at `(0, 0, 80)`, UEs at 2 m height 200 m from
/// the RIS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemplateScenario {
    pub geometry: ScenarioGeometryInput,
    pub radio: RadioParams,
    pub noise: NoiseParams,
}

impl TemplateScenario {
    pub const F_C: f64 = 3.5e9;
    pub const BW: f64 = 15e3;
    pub const P_T_WATTS: f64 = 20.0;

    pub fn reference() -> Self {
        TemplateScenario {
            geometry: ScenarioGeometryInput {
                h_bs: 122.0,
                h_ris: 80.0,
                h_ue: 2.0,
                d_bs_ris: 1200.0,
                d_ris_ue: 200.0,
                bearing_bs: defaults::BS_BEARING_DEG,
                bearing_ue: 0.0,
            },
            radio: RadioParams {
                f_c: Self::F_C,
                p_t: Self::P_T_WATTS,
                g_t: from_db(defaults::G_T_DBI),
                g_r: from_db(defaults::G_R_DBI),
                ple_t: defaults::PLE,
                ple_r: defaults::PLE,
                q_pattern: defaults::Q_PATTERN,
            },
            noise: NoiseParams {
                t_s: defaults::T_S_KELVIN,
                bw: Self::BW,
                f_n: from_db(defaults::F_N_DB),
                k_b: crate::link::BOLTZMANN,
            },
        }
    }

    pub fn panel(&self, n_v: usize, n_h: usize) -> RisPanel {
        RisPanel::half_wavelength(n_v, n_h, self.radio.f_c)
    }

    pub fn with_ris_height(mut self, h_ris: f64) -> Self {
        self.geometry.h_ris = h_ris;
        self
    }

    pub fn with_bearing(mut self, bearing_ue: f64) -> Self {
        self.geometry.bearing_ue = bearing_ue;
        self
    }

    /// Layout with the UE placed according to `placement`.
    pub fn layout(&self, placement: UePlacement) -> Result<NodeLayout> {
        let g = &self.geometry;
        let mut layout = crate::geometry::place_nodes(g)?;
        if placement == UePlacement::Street {
            let (s, c) = crate::geometry::sin_cos_deg(g.bearing_ue);
            if c <= 0.0 {
                return Err(Error::param("bearing_ue", "street placement needs |bearing| < 90"));
            }
            layout.ue = Vec3::new(g.d_ris_ue, g.d_ris_ue * s / c, g.h_ue);
        }
        Ok(layout)
    }
}

/// Where a UE seen under a given bearing sits on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UePlacement {
    /// On the circle of radius `d_ris_ue` around the RIS.
    #[default]
    Arc,
    /// On the street line parallel to the panel at perpendicular ground
    /// distance `d_ris_ue`.
    Street,
}

//! Per-element bistatic scattering of a passive, reflective RIS.
//!
//! Each unit cell `(k, l)` re-radiates the BS signal toward the UE with field
//! amplitude
//!
//! ```text
//! rho_kl = sqrt(P_t G_t G_r λ² Δh Δv F(θ_t) F(θ_r) / (64 π³)) / (d_t^(ple_t/2) d_r^(ple_r/2))
//! ```
//!
//! where `F(θ) = cos^q θ` is the cell pattern and distances are in units of a
//! 1 m reference. The total phase is `Ψ_kl = k0 (d_t + d_r) - φ_kl`, with `φ_kl`
//! the configurable reflection phase. In the narrowband regime the received
//! signal power is `|Σ rho_kl exp(-j Ψ_kl)|²`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{ElementGrid, NodeLayout, Vec3};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Spread fraction below which per-element delays are ignored.
pub const NARROWBAND_LIMIT: f64 = 0.1;

pub fn wavelength(f_c: f64) -> f64 {
    SPEED_OF_LIGHT / f_c
}

/// Number of reflection phase states a cell can apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseStates {
    Continuous,
    Discrete(u32),
}

impl PhaseStates {
    pub const ONE_BIT: PhaseStates = PhaseStates::Discrete(2);
}

impl std::fmt::Display for PhaseStates {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseStates::Continuous => f.write_str("continuous"),
            PhaseStates::Discrete(k) => write!(f, "{k}"),
        }
    }
}

impl std::str::FromStr for PhaseStates {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("continuous") {
            return Ok(PhaseStates::Continuous);
        }
        match s.parse::<u32>() {
            Ok(k) if k >= 1 => Ok(PhaseStates::Discrete(k)),
            _ => Err(Error::param(
                "phase_states",
                format!("expected a count >= 1 or `continuous`, got `{s}`"),
            )),
        }
    }
}

impl Serialize for PhaseStates {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PhaseStates::Continuous => s.serialize_str("continuous"),
            PhaseStates::Discrete(k) => s.serialize_u32(*k),
        }
    }
}

impl<'de> Deserialize<'de> for PhaseStates {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(u32),
            Name(String),
        }
        let parsed = match Repr::deserialize(d)? {
            Repr::Count(k) => PhaseStates::Discrete(k).validated(),
            Repr::Name(name) => name.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

impl PhaseStates {
    fn validated(self) -> Result<Self> {
        match self {
            PhaseStates::Discrete(0) => Err(Error::param("phase_states", "must be >= 1")),
            other => Ok(other),
        }
    }
}

/// Physical description of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisPanel {
    pub n_h: usize,
    pub n_v: usize,
    /// Cell height in meters.
    pub delta_h: f64,
    /// Cell width in meters.
    pub delta_v: f64,
    /// Horizontal lattice spacing in meters.
    pub d_h: f64,
    /// Vertical lattice spacing in meters.
    pub d_v: f64,
    pub phase_states: PhaseStates,
}

impl RisPanel {
    pub fn new(
        n_v: usize,
        n_h: usize,
        delta_h: f64,
        delta_v: f64,
        d_h: f64,
        d_v: f64,
        phase_states: PhaseStates,
    ) -> Result<Self> {
        let panel = RisPanel {
            n_h,
            n_v,
            delta_h,
            delta_v,
            d_h,
            d_v,
            phase_states,
        };
        panel.validate()?;
        Ok(panel)
    }

    /// `3λ/7` cells on a `λ/2` lattice with 1-bit phase control.
    pub fn half_wavelength(n_v: usize, n_h: usize, f_c: f64) -> Self {
        let lambda = wavelength(f_c);
        RisPanel {
            n_h,
            n_v,
            delta_h: 3.0 * lambda / 7.0,
            delta_v: 3.0 * lambda / 7.0,
            d_h: lambda / 2.0,
            d_v: lambda / 2.0,
            phase_states: PhaseStates::ONE_BIT,
        }
    }

    pub fn with_phase_states(mut self, phase_states: PhaseStates) -> Self {
        self.phase_states = phase_states;
        self
    }

    pub fn element_count(&self) -> usize {
        self.n_h * self.n_v
    }

    pub fn cell_area(&self) -> f64 {
        self.delta_h * self.delta_v
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_h == 0 || self.n_v == 0 {
            return Err(Error::param("n_h/n_v", "element counts must be >= 1"));
        }
        for (field, v) in [
            ("delta_h", self.delta_h),
            ("delta_v", self.delta_v),
            ("d_h", self.d_h),
            ("d_v", self.d_v),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::param(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.delta_h > self.d_h || self.delta_v > self.d_v {
            return Err(Error::param("delta_h/delta_v", "cells overlap their lattice spacing"));
        }
        self.phase_states.validated()?;
        Ok(())
    }
}

/// Link-level radio parameters; gains are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub f_c: f64,
    pub p_t: f64,
    pub g_t: f64,
    pub g_r: f64,
    pub ple_t: f64,
    pub ple_r: f64,
    pub q_pattern: f64,
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("f_c", self.f_c), ("p_t", self.p_t), ("g_t", self.g_t), ("g_r", self.g_r)];
        for (field, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::param(field, format!("must be finite and > 0, got {v}")));
            }
        }
        for (field, v) in [("ple_t", self.ple_t), ("ple_r", self.ple_r)] {
            if !(1.0..=4.0).contains(&v) {
                return Err(Error::param(field, format!("must lie in [1, 4], got {v}")));
            }
        }
        if !self.q_pattern.is_finite() || self.q_pattern < 0.0 {
            return Err(Error::param("q_pattern", format!("must be >= 0, got {}", self.q_pattern)));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.f_c)
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength()
    }

    /// Swaps the transmit and receive legs.
    pub fn reversed(&self) -> Self {
        RadioParams {
            g_t: self.g_r,
            g_r: self.g_t,
            ple_t: self.ple_r,
            ple_r: self.ple_t,
            ..*self
        }
    }
}

/// `P_t G_t G_r λ² Δh Δv / (64 π³)`: the per-element power constant before
/// pattern and spreading terms.
pub fn element_power_constant(radio: &RadioParams, panel: &RisPanel) -> f64 {
    let lambda = radio.wavelength();
    radio.p_t * radio.g_t * radio.g_r * lambda * lambda * panel.cell_area() / (64.0 * PI.powi(3))
}

/// Reflection phases, row-major `(k, l)`, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub n_v: usize,
    pub n_h: usize,
    pub phi: Vec<f64>,
}

impl PhasePlan {
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.phi[k * self.n_h + l]
    }

    pub fn uniform(n_v: usize, n_h: usize, value: f64) -> Self {
        PhasePlan {
            n_v,
            n_h,
            phi: vec![value.rem_euclid(TAU); n_v * n_h],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementResponse {
    pub rho: f64,
    pub psi: f64,
    pub n_delay: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NarrowbandReport {
    pub max_path_spread: f64,
    pub spread_fraction: f64,
}

impl NarrowbandReport {
    pub fn is_narrowband(&self) -> bool {
        self.spread_fraction < NARROWBAND_LIMIT
    }
}

fn require_lit(layout: &NodeLayout) -> Result<()> {
    if !layout.bs_illuminated() {
        return Err(Error::Geometry("BS is in the shadow region of the RIS".into()));
    }
    if !layout.ue_illuminated() {
        return Err(Error::Geometry("UE is in the shadow region of the RIS".into()));
    }
    Ok(())
}

/// Bistatic path length BS -> element -> UE.
fn path_sum(element: Vec3, layout: &NodeLayout) -> f64 {
    (layout.bs - element).norm() + (layout.ue - element).norm()
}

/// Phases that make every element's total phase identical at the UE.
pub fn continuous_phase_plan(grid: &ElementGrid, layout: &NodeLayout, f_c: f64) -> Result<PhasePlan> {
    require_lit(layout)?;
    let k0 = TAU / wavelength(f_c);
    let phi = grid
        .centers
        .iter()
        .map(|&c| (k0 * path_sum(c, layout)).rem_euclid(TAU))
        .collect();
    Ok(PhasePlan {
        n_v: grid.n_v,
        n_h: grid.n_h,
        phi,
    })
}

/// Nearest of `{2πi/k}` under circular distance; exact midpoints take the
/// lower state index.
pub fn quantize_phase(phi: f64, states: u32) -> f64 {
    debug_assert!(states >= 1);
    let k = states as f64;
    let x = phi.rem_euclid(TAU) * k / TAU;
    let lo = x.floor();
    let frac = x - lo;
    let lo = (lo as u32) % states;
    let hi = (lo + 1) % states;
    let idx = if frac > 0.5 {
        hi
    } else if frac < 0.5 {
        lo
    } else {
        lo.min(hi)
    };
    TAU * idx as f64 / k
}

pub fn quantize_phases(plan: &PhasePlan, states: PhaseStates) -> PhasePlan {
    match states {
        PhaseStates::Continuous => plan.clone(),
        PhaseStates::Discrete(k) => PhasePlan {
            phi: plan.phi.iter().map(|&p| quantize_phase(p, k)).collect(),
            ..*plan
        },
    }
}

#[inline]
fn pattern(cos_theta: f64, q: f64) -> f64 {
    if q == 1.0 {
        cos_theta
    } else if q == 0.0 {
        1.0
    } else {
        cos_theta.powf(q)
    }
}

/// `d^(ple/2)`, the amplitude spreading term.
#[inline]
fn spreading(d: f64, ple: f64) -> f64 {
    if ple == 2.0 {
        d
    } else {
        d.powf(0.5 * ple)
    }
}

/// Field amplitude of one cell given its two legs; zero if either endpoint is
/// behind the panel.
#[inline]
fn element_amplitude(
    constant: f64,
    radio: &RadioParams,
    normal: Vec3,
    to_bs: Vec3,
    d_t: f64,
    to_ue: Vec3,
    d_r: f64,
) -> f64 {
    let cos_t = to_bs.dot(normal) / d_t;
    let cos_r = to_ue.dot(normal) / d_r;
    if cos_t <= 0.0 || cos_r <= 0.0 {
        return 0.0;
    }
    let gain = constant * pattern(cos_t, radio.q_pattern) * pattern(cos_r, radio.q_pattern);
    gain.sqrt() / (spreading(d_t, radio.ple_t) * spreading(d_r, radio.ple_r))
}

/// Response of element `(k, l)` (zero-based) under `plan`.
#[allow(clippy::too_many_arguments)]
pub fn element_response(
    k: usize,
    l: usize,
    panel: &RisPanel,
    grid: &ElementGrid,
    layout: &NodeLayout,
    radio: &RadioParams,
    plan: &PhasePlan,
    bw: f64,
) -> ElementResponse {
    let c = grid.center(k, l);
    let to_bs = layout.bs - c;
    let to_ue = layout.ue - c;
    let (d_t, d_r) = (to_bs.norm(), to_ue.norm());
    let constant = element_power_constant(radio, panel);
    let rho = element_amplitude(constant, radio, layout.ris_normal, to_bs, d_t, to_ue, d_r);
    let total = d_t + d_r;
    ElementResponse {
        rho,
        psi: radio.wavenumber() * total - plan.get(k, l),
        n_delay: (total * bw / SPEED_OF_LIGHT).round() as u64,
    }
}

pub fn element_responses(
    panel: &RisPanel,
    grid: &ElementGrid,
    layout: &NodeLayout,
    radio: &RadioParams,
    plan: &PhasePlan,
    bw: f64,
) -> Vec<ElementResponse> {
    (0..grid.n_v)
        .flat_map(|k| (0..grid.n_h).map(move |l| (k, l)))
        .map(|(k, l)| element_response(k, l, panel, grid, layout, radio, plan, bw))
        .collect()
}

/// Narrowband coherent power `|Σ rho exp(-jΨ)|²`, summed in slice order.
pub fn received_power(responses: &[ElementResponse]) -> f64 {
    responses
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, r| {
            acc + Complex64::from_polar(r.rho, -r.psi)
        })
        .norm_sqr()
}

pub fn narrowband_validity(grid: &ElementGrid, layout: &NodeLayout, bw: f64) -> NarrowbandReport {
    let (lo, hi) = grid
        .centers
        .iter()
        .map(|&c| path_sum(c, layout))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    let spread = if grid.is_empty() { 0.0 } else { hi - lo };
    NarrowbandReport {
        max_path_spread: spread,
        spread_fraction: spread / (SPEED_OF_LIGHT / bw),
    }
}

/// How the reflection phases are chosen when evaluating a link.
#[derive(Debug, Clone, Copy)]
pub enum PhaseControl<'a> {
    /// Re-target the UE, then quantize to the panel's phase states.
    Targeted,
    /// Apply an externally computed plan.
    Fixed(&'a PhasePlan),
}

/// Received power for one layout: plan, per-element responses and coherent sum
/// fused into a single pass over the grid. Shadowed layouts yield exactly 0.
pub fn link_power(
    panel: &RisPanel,
    grid: &ElementGrid,
    layout: &NodeLayout,
    radio: &RadioParams,
    control: PhaseControl<'_>,
) -> f64 {
    if !layout.is_lit() {
        return 0.0;
    }
    let k0 = radio.wavenumber();
    let constant = element_power_constant(radio, panel);
    let normal = layout.ris_normal;
    let mut field = Complex64::new(0.0, 0.0);
    for (i, &c) in grid.centers.iter().enumerate() {
        let to_bs = layout.bs - c;
        let to_ue = layout.ue - c;
        let (d_t, d_r) = (to_bs.norm(), to_ue.norm());
        let rho = element_amplitude(constant, radio, normal, to_bs, d_t, to_ue, d_r);
        let travel = k0 * (d_t + d_r);
        let phi = match control {
            PhaseControl::Targeted => {
                let target = travel.rem_euclid(TAU);
                match panel.phase_states {
                    PhaseStates::Continuous => target,
                    PhaseStates::Discrete(k) => quantize_phase(target, k),
                }
            }
            PhaseControl::Fixed(plan) => plan.phi[i],
        };
        field += Complex64::from_polar(rho, -(travel - phi));
    }
    field.norm_sqr()
}

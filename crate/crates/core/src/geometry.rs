//! Node placement, element lattices and the illumination (shadow) test.
//!
//! Coordinates are meters in a frame whose origin lies on the ground below the
//! RIS center. The panel normal is `+x`; azimuth bearings are measured from it
//! toward `+y`, so a bearing of `0°` is boresight.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scattering::RisPanel;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Length of the projection onto the ground (`xy`) plane.
    pub fn horizontal_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Concrete BS / RIS / UE positions for one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeLayout {
    pub bs: Vec3,
    pub ris_center: Vec3,
    pub ris_normal: Vec3,
    pub ue: Vec3,
}

impl NodeLayout {
    pub fn new(bs: Vec3, ris_center: Vec3, ris_normal: Vec3, ue: Vec3) -> Result<Self> {
        let layout = NodeLayout {
            bs,
            ris_center,
            ris_normal,
            ue,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bs", self.bs),
            ("ris_center", self.ris_center),
            ("ris_normal", self.ris_normal),
            ("ue", self.ue),
        ] {
            if !v.is_finite() {
                return Err(Error::Geometry(format!("{name} has non-finite coordinates")));
            }
        }
        if (self.ris_normal.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Geometry("ris_normal must be a unit vector".into()));
        }
        if self.bs == self.ris_center {
            return Err(Error::Geometry("bs coincides with ris_center".into()));
        }
        if self.ue == self.ris_center {
            return Err(Error::Geometry("ue coincides with ris_center".into()));
        }
        Ok(())
    }

    pub fn bs_illuminated(&self) -> bool {
        is_illuminated(self.bs, self.ris_center, self.ris_normal)
    }

    pub fn ue_illuminated(&self) -> bool {
        is_illuminated(self.ue, self.ris_center, self.ris_normal)
    }

    /// Both endpoints in front of the panel.
    pub fn is_lit(&self) -> bool {
        self.bs_illuminated() && self.ue_illuminated()
    }
}

/// Heights and horizontal ground distances of one scenario, with bearings in
/// degrees relative to the RIS normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGeometryInput {
    pub h_bs: f64,
    pub h_ris: f64,
    pub h_ue: f64,
    pub d_bs_ris: f64,
    pub d_ris_ue: f64,
    pub bearing_bs: f64,
    pub bearing_ue: f64,
}

impl ScenarioGeometryInput {
    pub fn validate(&self) -> Result<()> {
        for (field, h) in [("h_bs", self.h_bs), ("h_ris", self.h_ris), ("h_ue", self.h_ue)] {
            if !h.is_finite() || h < 0.0 {
                return Err(Error::param(field, format!("height must be finite and >= 0, got {h}")));
            }
        }
        for (field, d) in [("d_bs_ris", self.d_bs_ris), ("d_ris_ue", self.d_ris_ue)] {
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::param(field, format!("distance must be finite and > 0, got {d}")));
            }
        }
        for (field, b) in [("bearing_bs", self.bearing_bs), ("bearing_ue", self.bearing_ue)] {
            if !b.is_finite() || b <= -180.0 || b > 180.0 {
                return Err(Error::param(field, format!("bearing must lie in (-180, 180], got {b}")));
            }
        }
        Ok(())
    }
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90°.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        deg.to_radians().sin_cos()
    }
}

/// Places the RIS at `(0, 0, h_ris)` facing `+x`, and the BS and UE at their
/// horizontal distances and bearings.
pub fn place_nodes(g: &ScenarioGeometryInput) -> Result<NodeLayout> {
    g.validate()?;
    let (sb, cb) = sin_cos_deg(g.bearing_bs);
    let (su, cu) = sin_cos_deg(g.bearing_ue);
    NodeLayout::new(
        Vec3::new(g.d_bs_ris * cb, g.d_bs_ris * sb, g.h_bs),
        Vec3::new(0.0, 0.0, g.h_ris),
        Vec3::X,
        Vec3::new(g.d_ris_ue * cu, g.d_ris_ue * su, g.h_ue),
    )
}

/// Unit-cell centers, stored row-major: row `k` (vertical) then column `l`
/// (horizontal).
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGrid {
    pub n_v: usize,
    pub n_h: usize,
    pub centers: Vec<Vec3>,
}

impl ElementGrid {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Center of element `(k, l)`, zero-based.
    pub fn center(&self, k: usize, l: usize) -> Vec3 {
        self.centers[k * self.n_h + l]
    }

    pub fn centroid(&self) -> Vec3 {
        let sum = self
            .centers
            .iter()
            .fold(Vec3::default(), |acc, &c| acc + c);
        sum * (1.0 / self.centers.len() as f64)
    }
}

/// In-plane (horizontal, vertical) unit axes for a panel with the given normal.
pub fn panel_axes(normal: Vec3) -> (Vec3, Vec3) {
    let horizontal = Vec3::Z
        .cross(normal)
        .normalized()
        // panel lying flat: pick any in-plane horizontal
        .unwrap_or_else(|| normal.cross(Vec3::X).normalized().unwrap_or(Vec3::Y));
    let vertical = normal.cross(horizontal);
    (horizontal, vertical)
}

pub fn element_positions(panel: &RisPanel, layout: &NodeLayout) -> ElementGrid {
    let (horizontal, vertical) = panel_axes(layout.ris_normal);
    let (n_v, n_h) = (panel.n_v, panel.n_h);
    let mid_v = (n_v as f64 - 1.0) / 2.0;
    let mid_h = (n_h as f64 - 1.0) / 2.0;
    let mut centers = Vec::with_capacity(n_v * n_h);
    for k in 0..n_v {
        let dz = (mid_v - k as f64) * panel.d_v;
        for l in 0..n_h {
            let dy = (l as f64 - mid_h) * panel.d_h;
            centers.push(layout.ris_center + horizontal * dy + vertical * dz);
        }
    }
    ElementGrid { n_v, n_h, centers }
}

/// Distance from surface point `p` to node `q`, and the angle between `q - p`
/// and the surface normal.
pub fn path_metrics(p: Vec3, q: Vec3, normal: Vec3) -> Result<(f64, f64)> {
    let v = q - p;
    let d = v.norm();
    if d == 0.0 {
        return Err(Error::Geometry("coincident points".into()));
    }
    let cos = (v.dot(normal) / d).clamp(-1.0, 1.0);
    Ok((d, cos.acos()))
}

/// Strict front half-space test; grazing counts as shadowed.
pub fn is_illuminated(node: Vec3, ris_center: Vec3, normal: Vec3) -> bool {
    (node - ris_center).dot(normal) > 0.0
}

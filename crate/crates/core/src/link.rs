//! Noise floor, SNR and decibel bookkeeping.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const BOLTZMANN: f64 = 1.380649e-23;

pub fn to_db(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * x.log10()
    }
}

pub fn from_db(db: f64) -> f64 {
    if db == f64::NEG_INFINITY {
        0.0
    } else {
        10f64.powf(db / 10.0)
    }
}

pub fn watts_to_dbm(w: f64) -> f64 {
    to_db(w) + 30.0
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    from_db(dbm - 30.0)
}

/// A decibel value that may be `-inf` (zero linear power). Serialized as a
/// JSON number, or the string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Decibel(pub f64);

impl Decibel {
    pub const NEG_INF: Decibel = Decibel(f64::NEG_INFINITY);

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl std::fmt::Display for Decibel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Decibel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.is_neg_inf() {
            s.serialize_str("-inf")
        } else {
            Err(serde::ser::Error::custom(format!("unrepresentable dB value {}", self.0)))
        }
    }
}

impl<'de> Deserialize<'de> for Decibel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Decibel(v)),
            Repr::Text(t) if t == "-inf" => Ok(Decibel::NEG_INF),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("invalid dB value `{t}`"))),
        }
    }
}

impl std::str::FromStr for Decibel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "-inf" {
            return Ok(Decibel::NEG_INF);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Decibel)
            .ok_or_else(|| Error::Data(format!("invalid dB value `{s}`")))
    }
}

/// Receiver noise description; `f_n` is the linear noise factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub t_s: f64,
    pub bw: f64,
    pub f_n: f64,
    pub k_b: f64,
}

impl NoiseParams {
    pub fn new(t_s: f64, bw: f64, f_n: f64) -> Result<Self> {
        let np = NoiseParams {
            t_s,
            bw,
            f_n,
            k_b: BOLTZMANN,
        };
        np.validate()?;
        Ok(np)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_s.is_finite() && self.t_s > 0.0) {
            return Err(Error::param("t_s", format!("must be > 0, got {}", self.t_s)));
        }
        if !(self.bw.is_finite() && self.bw > 0.0) {
            return Err(Error::param("bw", format!("must be > 0, got {}", self.bw)));
        }
        if !(self.f_n.is_finite() && self.f_n >= 1.0) {
            return Err(Error::param("f_n", format!("noise factor must be >= 1, got {}", self.f_n)));
        }
        if self.k_b != BOLTZMANN {
            return Err(Error::param("k_b", "must equal the SI Boltzmann constant"));
        }
        Ok(())
    }
}

/// `N_o = k_B T_s BW F_n` in watts.
pub fn noise_power(np: &NoiseParams) -> f64 {
    np.k_b * np.t_s * np.bw * np.f_n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrSample {
    pub mu: f64,
    pub gamma: f64,
    pub gamma_db: Decibel,
}

/// `γ = μ E_b / N_o`.
pub fn snr(mu: f64, e_b: f64, n_o: f64) -> SnrSample {
    debug_assert!(n_o > 0.0 && mu >= 0.0);
    let gamma = mu * e_b / n_o;
    SnrSample {
        mu,
        gamma,
        gamma_db: Decibel(to_db(gamma)),
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nuclear spin quantum number, stored as `2I` so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin(u32);

impl Spin {
    pub const THREE_HALVES: Spin = Spin(3);

    /// Spin `I = twice / 2`.
    pub const fn from_twice(twice: u32) -> Self {
        Spin(twice)
    }

    /// Half-integer spin with a quadrupole moment (`I >= 3/2`).
    pub fn quadrupolar(value: f64) -> Result<Self> {
        let twice = (2.0 * value).round();
        if (2.0 * value - twice).abs() > 1e-12 || twice < 3.0 || twice as u32 % 2 == 0 {
            return Err(crate::error::invalid(
                "I",
                format!("{value} is not a half-integer >= 3/2"),
            ));
        }
        Ok(Spin(twice as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Number of Zeeman levels, `2I + 1`.
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    /// `I(I+1)`.
    pub fn casimir(self) -> f64 {
        let i = self.value();
        i * (i + 1.0)
    }

    /// Magnetic quantum number of level index `k` (`k = 0` is `m = -I`).
    pub fn level(self, k: u8) -> f64 {
        k as f64 - self.value()
    }

    /// Level index of `m`, if `m` is in the manifold.
    pub fn index_of(self, m: f64) -> Result<u8> {
        let k = m + self.value();
        let kr = k.round();
        if (k - kr).abs() > 1e-9 || kr < 0.0 || kr > self.0 as f64 {
            return Err(Error::InvalidLevel { m, spin: self.value() });
        }
        Ok(kr as u8)
    }

    pub fn levels(self) -> impl Iterator<Item = f64> {
        (0..=self.0).map(move |k| self.level(k as u8))
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Spin::quadrupolar(v)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.value()
    }
}

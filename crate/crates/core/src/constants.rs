//! Fitted scaling constants per idle-error model, with the published values
//! bundled as a JSON asset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::GammaModel;

const BUNDLED: &str = include_str!("../assets/constants.json");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, sigma: 0.0 }
    }
}

/// `a` of `P = a p^2` for a Hamming level `r` below level `r_next`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammingConstant {
    pub r: u8,
    pub r_next: u8,
    pub a: Estimate,
}

/// `P = A (B p)^k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub a: Estimate,
    pub b: Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteaneConstants {
    pub a1: Estimate,
    pub a2: Estimate,
}

/// Level 1 coincides with level-1 C4/C6, so only `a2` is stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C4SteaneConstants {
    pub a2: Estimate,
}

/// `P' = C + D x + E x^2` with `x = (p - p_th) d^(1/mu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalFit {
    pub p_th: Estimate,
    pub mu: Estimate,
    pub c: Estimate,
    pub d: Estimate,
    pub e: Estimate,
}

impl CriticalFit {
    pub fn eval(&self, d: u32, p: f64) -> f64 {
        let x = (p - self.p_th.value) * (d as f64).powf(1.0 / self.mu.value);
        self.c.value + self.d.value * x + self.e.value * x * x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub gamma: GammaModel,
    pub hamming: Vec<HammingConstant>,
    pub c4c6: PowerCurve,
    pub surface: PowerCurve,
    pub steane: SteaneConstants,
    pub c4_steane: C4SteaneConstants,
    pub surface_critical: CriticalFit,
}

impl ModelConstants {
    pub fn hamming(&self, r: u8, r_next: u8) -> Result<f64> {
        self.hamming
            .iter()
            .find(|h| h.r == r && h.r_next == r_next)
            .map(|h| h.a.value)
            .ok_or_else(|| Error::MissingConstant(format!("a_{r}^({r_next}) for gamma = {}", self.gamma.label())))
    }

    /// Available Hamming successors of `r`, sorted.
    pub fn successors(&self, r: u8) -> Vec<u8> {
        let mut v: Vec<u8> = self.hamming.iter().filter(|h| h.r == r).map(|h| h.r_next).collect();
        v.sort_unstable();
        v
    }

    pub fn validate(&self) -> Result<()> {
        let mut all = vec![
            self.c4c6.a,
            self.c4c6.b,
            self.surface.a,
            self.surface.b,
            self.steane.a1,
            self.steane.a2,
            self.c4_steane.a2,
            self.surface_critical.p_th,
            self.surface_critical.mu,
        ];
        all.extend(self.hamming.iter().map(|h| h.a));
        if all.iter().any(|e| !(e.value > 0.0 && e.value.is_finite())) {
            return Err(Error::Contract(format!("non-positive constant for gamma = {}", self.gamma.label())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConstants {
    pub models: Vec<ModelConstants>,
}

impl FitConstants {
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED).expect("bundled constants parse")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: FitConstants = serde_json::from_str(s)?;
        for m in &c.models {
            m.validate()?;
        }
        Ok(c)
    }

    pub fn model(&self, gamma: GammaModel) -> Result<&ModelConstants> {
        self.models
            .iter()
            .find(|m| m.gamma == gamma)
            .ok_or_else(|| Error::MissingConstant(format!("no constants for gamma = {}", gamma.label())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_values_match_the_tables() {
        let c = FitConstants::bundled();
        assert_eq!(c.models.len(), 3);
        let m = c.model(GammaModel::Equal).unwrap();
        assert_eq!(m.hamming(3, 3).unwrap(), 54.21e4);
        assert_eq!(m.hamming(7, 8).unwrap(), 596.6e10);
        assert_eq!(m.hamming(5, 6).unwrap(), 2224e6);
        assert_eq!((m.c4c6.a.value, m.c4c6.b.value), (0.77, 39.6));
        assert_eq!(m.steane.a1.value, 7513.0);
        assert_eq!(m.surface_critical.p_th.value, 3.148e-3);
        let m = c.model(GammaModel::Tenth).unwrap();
        assert_eq!(m.hamming(4, 7).unwrap(), 90.9e5);
        assert_eq!(m.surface_critical.e.value, -41.0);
        assert_eq!(c.model(GammaModel::Half).unwrap().c4_steane.a2.value, 8.5e4);
    }

    #[test]
    fn transitions_are_nondecreasing() {
        for m in FitConstants::bundled().models {
            assert_eq!(m.hamming.len(), 16);
            assert!(m.hamming.iter().all(|h| h.r_next >= h.r));
            assert_eq!(m.successors(7), vec![7, 8]);
            assert!(m.hamming(7, 6).is_err());
        }
    }
}

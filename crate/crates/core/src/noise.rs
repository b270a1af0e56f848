//! Circuit-level depolarizing noise.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate1, LocationKind};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliOperator};

/// Idle error rate relative to `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum GammaModel {
    #[serde(rename = "p")]
    Equal,
    #[serde(rename = "p/2")]
    Half,
    #[serde(rename = "p/10")]
    Tenth,
}

impl GammaModel {
    pub const ALL: [GammaModel; 3] = [GammaModel::Tenth, GammaModel::Half, GammaModel::Equal];

    pub fn ratio(self) -> f64 {
        match self {
            GammaModel::Equal => 1.0,
            GammaModel::Half => 0.5,
            GammaModel::Tenth => 0.1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GammaModel::Equal => "p",
            GammaModel::Half => "p/2",
            GammaModel::Tenth => "p/10",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "p" | "1" | "equal" => Ok(GammaModel::Equal),
            "p/2" | "0.5" | "half" => Ok(GammaModel::Half),
            "p/10" | "0.1" | "tenth" => Ok(GammaModel::Tenth),
            other => Err(Error::Parse(format!("unknown gamma model {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub gamma: f64,
}

impl NoiseParams {
    pub fn new(p: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Contract(format!("error rates must lie in [0, 1], got p={p} gamma={gamma}")));
        }
        Ok(NoiseParams { p, gamma })
    }

    pub fn with_model(p: f64, model: GammaModel) -> Result<Self> {
        Self::new(p, p * model.ratio())
    }

    pub fn noiseless() -> Self {
        NoiseParams { p: 0.0, gamma: 0.0 }
    }

    /// Total fault probability of a location.
    pub fn total(&self, kind: LocationKind) -> f64 {
        match kind {
            LocationKind::Gate1(Gate1::I) => self.gamma,
            _ => self.p,
        }
    }
}

/// Number of distinct fault Paulis at a location kind.
pub fn channel_size(kind: LocationKind) -> u8 {
    match kind {
        LocationKind::Prep0 | LocationKind::PrepPlus | LocationKind::MeasureZ | LocationKind::MeasureX => 1,
        LocationKind::Gate1(_) => 3,
        LocationKind::Cnot => 15,
    }
}

/// Fault code `c` at a location, encoded as `(x, z)` bit pairs: bit 0 = X on
/// the first target, bit 1 = Z on the first target, bits 2 and 3 likewise on
/// the second. Codes run over `1..=channel_size` in a fixed order.
pub fn fault_bits(kind: LocationKind, index: u8) -> u8 {
    match kind {
        LocationKind::Prep0 | LocationKind::MeasureZ => 0b01,
        LocationKind::PrepPlus | LocationKind::MeasureX => 0b10,
        LocationKind::Gate1(_) => [0b01, 0b11, 0b10][(index - 1) as usize],
        LocationKind::Cnot => index,
    }
}

pub fn fault_operator(kind: LocationKind, bits: u8) -> PauliOperator {
    let letter = |b: u8| Letter::from_bits(b & 1 == 1, b & 2 == 2);
    if kind == LocationKind::Cnot {
        PauliOperator::from_letters(&[letter(bits), letter(bits >> 2)])
    } else {
        PauliOperator::from_letters(&[letter(bits)])
    }
}

pub fn fault_code_of(kind: LocationKind, p: &PauliOperator) -> Option<u8> {
    let mut bits = 0u8;
    for q in 0..p.n_qubits() {
        let (x, z) = p.letter(q).bits();
        bits |= (x as u8 | (z as u8) << 1) << (2 * q);
    }
    (bits != 0).then_some(bits).filter(|&b| (1..=channel_size(kind)).any(|i| fault_bits(kind, i) == b))
}

/// The fault distribution of a location kind: each entry is a Pauli on the
/// location's targets and its probability. The remaining mass is no fault.
pub fn channel_for(kind: LocationKind, params: NoiseParams) -> Vec<(PauliOperator, f64)> {
    let total = params.total(kind);
    if total == 0.0 {
        return Vec::new();
    }
    let size = channel_size(kind);
    (1..=size).map(|i| (fault_operator(kind, fault_bits(kind, i)), total / size as f64)).collect()
}

/// Independent faults for every noisy location of `circuit`.
pub fn sample_faults(circuit: &Circuit, params: NoiseParams, seed: u64) -> HashMap<u32, PauliOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = HashMap::new();
    for (i, loc) in circuit.locations.iter().enumerate() {
        if !loc.noisy {
            continue;
        }
        let total = params.total(loc.kind);
        if total > 0.0 && rng.gen::<f64>() < total {
            let size = channel_size(loc.kind);
            let idx = rng.gen_range(1..=size);
            out.insert(i as u32, fault_operator(loc.kind, fault_bits(loc.kind, idx)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Location, Op};

    fn one_site(kind: LocationKind) -> Circuit {
        Circuit {
            n_qubits: 2,
            locations: vec![Location { kind, targets: [0, 1], noisy: true, bit: 0 }],
            ops: vec![Op::Loc(0)],
            n_bits: 1,
            ..Circuit::default()
        }
    }

    #[test]
    fn cnot_channel_has_fifteen_equal_entries() {
        let ch = channel_for(LocationKind::Cnot, NoiseParams { p: 0.0015, gamma: 0.0015 });
        assert_eq!(ch.len(), 15);
        for (p, w) in &ch {
            assert!((w - 1e-4).abs() < 1e-15);
            assert!(!p.is_identity());
        }
        let distinct: std::collections::HashSet<String> = ch.iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(distinct.len(), 15);
    }

    #[test]
    fn idle_channel_uses_gamma() {
        let np = NoiseParams::with_model(0.001, GammaModel::Tenth).unwrap();
        let ch = channel_for(LocationKind::Gate1(Gate1::I), np);
        assert_eq!(ch.len(), 3);
        for (_, w) in ch {
            assert!((w - 1.0 / 30000.0).abs() < 1e-15);
        }
    }

    #[test]
    fn channel_totals() {
        let np = NoiseParams { p: 0.01, gamma: 0.003 };
        for kind in [
            LocationKind::Prep0,
            LocationKind::PrepPlus,
            LocationKind::MeasureZ,
            LocationKind::MeasureX,
            LocationKind::Gate1(Gate1::H),
            LocationKind::Gate1(Gate1::I),
            LocationKind::Cnot,
        ] {
            let s: f64 = channel_for(kind, np).iter().map(|(_, w)| w).sum();
            assert!((s - np.total(kind)).abs() < 1e-15);
        }
        assert_eq!(channel_for(LocationKind::Prep0, NoiseParams::noiseless()), vec![]);
        assert_eq!(channel_for(LocationKind::Prep0, np)[0].0.to_string(), "+X");
        assert_eq!(channel_for(LocationKind::PrepPlus, np)[0].0.to_string(), "+Z");
        assert_eq!(channel_for(LocationKind::MeasureZ, np)[0].0.to_string(), "+X");
        assert_eq!(channel_for(LocationKind::MeasureX, np)[0].0.to_string(), "+Z");
    }

    #[test]
    fn sampling_edge_cases() {
        let c = one_site(LocationKind::Prep0);
        assert!(sample_faults(&c, NoiseParams::noiseless(), 1).is_empty());
        for seed in 0..50 {
            let f = sample_faults(&c, NoiseParams { p: 1.0, gamma: 0.0 }, seed);
            assert_eq!(f[&0].to_string(), "+X");
        }
    }

    #[test]
    fn cnot_fault_fraction_is_binomial() {
        let c = one_site(LocationKind::Cnot);
        let np = NoiseParams { p: 0.0015, gamma: 0.0015 };
        let trials = 1_000_000u64;
        let hits = (0..trials).filter(|&s| !sample_faults(&c, np, s).is_empty()).count() as f64;
        let sigma = (trials as f64 * 0.0015 * (1.0 - 0.0015)).sqrt();
        assert!((hits - 1500.0).abs() < 4.0 * sigma, "{hits}");
    }

    #[test]
    fn fault_codes_round_trip() {
        for kind in [LocationKind::Cnot, LocationKind::Gate1(Gate1::S), LocationKind::Prep0] {
            for i in 1..=channel_size(kind) {
                let b = fault_bits(kind, i);
                assert_eq!(fault_code_of(kind, &fault_operator(kind, b)), Some(b));
            }
        }
    }

    #[test]
    fn gamma_models_parse() {
        assert_eq!(GammaModel::parse("p/10").unwrap(), GammaModel::Tenth);
        assert!(GammaModel::parse("p/3").is_err());
        assert!(NoiseParams::new(1.5, 0.0).is_err());
    }
}

//! Monte Carlo estimation of logical CNOT error rates from the benchmark
//! circuit, with post-selection accounting for verified preparations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::frame::{Engine, FrameOptions, VerifyMode, LANES};
use crate::gadgets::{build_cnot_benchmark, CodeSpec, CompileOptions, Family, Variant};
use crate::noise::NoiseParams;

pub const DEFAULT_SHOTS: u64 = 1_000_000;
pub const DEFAULT_VERIFICATION_SHOTS: u64 = 10_000;
pub const DEFAULT_ROUNDS: u32 = 10;
/// Deepest simulated concatenation level; one level more needs gigabytes.
pub const MAX_SIMULATED_LEVEL: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub code: CodeSpec,
    /// Label of the code concatenated above a Hamming level.
    pub r_next: Option<u8>,
    pub rounds: u32,
    pub variant: Variant,
    pub shots: u64,
    /// Shots per forced-failure run of the leading-order accounting.
    pub verification_shots: u64,
    pub noise: NoiseParams,
    pub seed: u64,
    pub options: CompileOptions,
}

impl BenchmarkSpec {
    pub fn new(code: CodeSpec, noise: NoiseParams) -> Self {
        BenchmarkSpec {
            code,
            r_next: match code.family {
                Family::Hamming(r) => Some(r + 1),
                _ => None,
            },
            rounds: DEFAULT_ROUNDS,
            variant: Variant::Full,
            shots: DEFAULT_SHOTS,
            verification_shots: DEFAULT_VERIFICATION_SHOTS,
            noise,
            seed: 0,
            options: CompileOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::Contract("shots must be positive".into()));
        }
        if self.rounds == 0 {
            return Err(Error::Contract("rounds must be positive".into()));
        }
        if self.code.level > MAX_SIMULATED_LEVEL {
            return Err(Error::Unsupported(format!(
                "{} exceeds the deepest simulated level {MAX_SIMULATED_LEVEL}",
                self.code.name()
            )));
        }
        if self.variant == Variant::Simplified
            && !(self.code.level == 2 && matches!(self.code.family, Family::Steane | Family::C4Steane))
        {
            return Err(Error::Contract(
                "the single-round variant applies to level-2 Steane and level-2 C4/Steane only".into(),
            ));
        }
        match (self.code.family, self.r_next) {
            (Family::Hamming(r), Some(n)) if n < r || n > 8 => {
                Err(Error::Contract(format!("r_next = {n} is not a valid successor of r = {r}")))
            }
            (Family::Hamming(_), _) => Ok(()),
            (_, Some(_)) => Err(Error::Contract("r_next applies to Hamming codes only".into())),
            _ => Ok(()),
        }
    }

    /// Rounds divisor of the rate: declared rounds, or 1 for the simplified variant.
    pub fn noisy_rounds(&self) -> u32 {
        match self.variant {
            Variant::Full => self.rounds,
            Variant::Simplified => 1,
        }
    }

    pub fn compile(&self) -> Result<Circuit> {
        self.validate()?;
        Ok(build_cnot_benchmark(self.code, self.variant, self.rounds, self.options)?.circuit)
    }
}

/// Counts split by the first-attempt verification outcome of a shot: every
/// verified preparation passed, exactly one failed (by class), or more.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub all_pass: u64,
    pub single: Vec<u64>,
    pub other: u64,
}

impl OutcomeCounts {
    fn new(classes: usize) -> Self {
        OutcomeCounts { all_pass: 0, single: vec![0; classes], other: 0 }
    }

    pub fn total(&self) -> u64 {
        self.all_pass + self.single.iter().sum::<u64>() + self.other
    }

    fn merge(&mut self, o: &OutcomeCounts) {
        self.all_pass += o.all_pass;
        self.other += o.other;
        for (a, b) in self.single.iter_mut().zip(&o.single) {
            *a += b;
        }
    }
}

/// Per-class verification statistics.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: String,
    /// Noisy instances per shot.
    pub instances: u64,
    pub attempts: u64,
    pub failures: u64,
}

impl ClassStats {
    pub fn failure_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.failures as f64 / self.attempts as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotTally {
    /// Completed shots; aborted shots are excluded.
    pub shots_total: u64,
    pub aborted: u64,
    pub classes: Vec<ClassStats>,
    pub shots_by_outcome: OutcomeCounts,
    /// Per logical qubit.
    pub failures: Vec<u64>,
    /// Per logical qubit: failures split like `shots_by_outcome`.
    pub failures_by_outcome: Vec<OutcomeCounts>,
}

impl ShotTally {
    fn empty(circuit: &Circuit) -> Self {
        let n = circuit.classes.len();
        let mut instances = vec![0u64; n];
        for s in &circuit.segments {
            if !circuit.classes[s.class as usize].ends_with('!') {
                instances[s.class as usize] += 1;
            }
        }
        ShotTally {
            shots_total: 0,
            aborted: 0,
            classes: circuit
                .classes
                .iter()
                .zip(instances)
                .map(|(c, i)| ClassStats { class: c.clone(), instances: i, attempts: 0, failures: 0 })
                .collect(),
            shots_by_outcome: OutcomeCounts::new(n),
            failures: vec![0; circuit.outputs.len()],
            failures_by_outcome: vec![OutcomeCounts::new(n); circuit.outputs.len()],
        }
    }

    /// Associative, commutative merge.
    pub fn merge(mut self, o: &ShotTally) -> Self {
        self.shots_total += o.shots_total;
        self.aborted += o.aborted;
        for (a, b) in self.classes.iter_mut().zip(&o.classes) {
            a.attempts += b.attempts;
            a.failures += b.failures;
        }
        self.shots_by_outcome.merge(&o.shots_by_outcome);
        for (a, b) in self.failures.iter_mut().zip(&o.failures) {
            *a += b;
        }
        for (a, b) in self.failures_by_outcome.iter_mut().zip(&o.failures_by_outcome) {
            a.merge(b);
        }
        self
    }

    /// Whether each per-logical-qubit partition sums to the shot count.
    pub fn is_consistent(&self) -> bool {
        self.shots_by_outcome.total() == self.shots_total
            && self.failures.iter().zip(&self.failures_by_outcome).all(|(f, p)| p.total() == *f)
    }

    /// Mean failure probability per shot over logical qubits.
    pub fn mean_failure(&self) -> f64 {
        if self.shots_total == 0 || self.failures.is_empty() {
            return 0.0;
        }
        self.failures.iter().sum::<u64>() as f64 / (self.failures.len() as u64 * self.shots_total) as f64
    }

    fn trials(&self) -> u64 {
        self.failures.len() as u64 * self.shots_total
    }
}

fn split_masks(circuit: &Circuit, segment_failed: &[u64], active: u64) -> (u64, Vec<u64>, u64) {
    let (mut one, mut many) = (0u64, 0u64);
    for &f in segment_failed {
        many |= one & f;
        one |= f;
    }
    let exact = one & !many & active;
    let mut single = vec![0u64; circuit.classes.len()];
    for (s, &f) in segment_failed.iter().enumerate() {
        single[circuit.segments[s].class as usize] |= f & exact;
    }
    (!one & active, single, many & active)
}

fn count_into(counts: &mut OutcomeCounts, lanes: u64, split: &(u64, Vec<u64>, u64)) {
    counts.all_pass += (lanes & split.0).count_ones() as u64;
    for (c, &m) in counts.single.iter_mut().zip(&split.1) {
        *c += (lanes & m).count_ones() as u64;
    }
    counts.other += (lanes & split.2).count_ones() as u64;
}

/// Runs `shots` benchmark shots in 64-lane batches, in parallel. The result
/// depends only on the circuit, options, shot count and seed.
pub fn run_shots(circuit: &Circuit, opts: &FrameOptions, shots: u64, seed: u64) -> Result<ShotTally> {
    let engine = Engine::new(circuit)?;
    let batches = shots.div_ceil(LANES as u64);
    let empty = ShotTally::empty(circuit);
    let tally = (0..batches)
        .into_par_iter()
        .map(|b| {
            let remaining = shots - b * LANES as u64;
            let active = if remaining >= LANES as u64 { u64::MAX } else { (1u64 << remaining) - 1 };
            let out = engine.run_batch(opts, seed, b, active, None);
            let mut t = empty.clone();
            let done = active & !out.aborted;
            t.shots_total = done.count_ones() as u64;
            t.aborted = out.aborted.count_ones() as u64;
            for (c, stats) in t.classes.iter_mut().enumerate() {
                stats.attempts = out.class_attempts[c];
                stats.failures = out.class_failures[c];
            }
            let split = split_masks(circuit, &out.segment_failed, done);
            count_into(&mut t.shots_by_outcome, done, &split);
            for (k, &f) in out.output_failed.iter().enumerate() {
                let f = f & done;
                t.failures[k] = f.count_ones() as u64;
                count_into(&mut t.failures_by_outcome[k], f, &split);
            }
            t
        })
        .reduce(|| empty.clone(), |a, b| a.merge(&b));
    Ok(tally)
}

/// Main benchmark run: failed verifications are rerun until they pass.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<ShotTally> {
    let circuit = spec.compile()?;
    run_shots(&circuit, &FrameOptions::new(spec.noise), spec.shots, spec.seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accounting {
    /// Rate over post-selected shots only.
    PostselectOnly,
    /// Adds the leading-order effect of verification failures.
    LeadingOrder,
}

impl Accounting {
    pub fn default_for(code: CodeSpec) -> Self {
        match code.family {
            Family::Hamming(_) => Accounting::LeadingOrder,
            _ => Accounting::PostselectOnly,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Logical CNOT error rate per round and logical qubit.
    pub p_l: f64,
    /// `None` when no failure was observed.
    pub sigma_log10: Option<f64>,
}

/// Standard error of `log10 p` for a binomial estimate `failures / trials`.
pub fn sigma_log10(failures: u64, trials: u64) -> Result<Option<f64>> {
    if trials == 0 {
        return Err(Error::Contract("sigma_log10 needs trials > 0".into()));
    }
    if failures == 0 {
        return Ok(None);
    }
    let p = failures as f64 / trials as f64;
    let sigma_p = (p * (1.0 - p) / trials as f64).sqrt();
    Ok(Some(sigma_p / (p * std::f64::consts::LN_10)))
}

/// `P0 + sum_i w_i P_i` for weights `w_i = n_i P_ver,i`.
pub fn leading_order_rate(p0: f64, terms: &[(f64, f64)]) -> f64 {
    p0 + terms.iter().map(|(w, p)| w * p).sum::<f64>()
}

/// Post-selected rate: failures over completed shots, per round, averaged
/// over logical qubits.
pub fn postselect_only(tally: &ShotTally, rounds: u32) -> Result<RateEstimate> {
    if tally.shots_total == 0 {
        return Err(Error::Contract("no completed shots; the estimate is undefined".into()));
    }
    let failures: u64 = tally.failures.iter().sum();
    Ok(RateEstimate {
        p_l: tally.mean_failure() / rounds as f64,
        sigma_log10: sigma_log10(failures, tally.trials())?,
    })
}

/// Rate over the shots in which every first verification attempt passed.
pub fn all_pass_rate(tally: &ShotTally, rounds: u32) -> Option<f64> {
    let n = tally.shots_by_outcome.all_pass;
    if n == 0 || tally.failures.is_empty() {
        return None;
    }
    let f: u64 = tally.failures_by_outcome.iter().map(|c| c.all_pass).sum();
    Some(f as f64 / (n * tally.failures.len() as u64) as f64 / rounds as f64)
}

/// Leading-order accounting: `P0 + sum_c n_c P_ver,c P^(c)`, where `P0` comes
/// from the main tally, `P_ver,c` is the per-instance failure rate of class
/// `c` in the main tally and `P^(c)` the failure rate of shots in which one
/// instance of `c` failed verification and was rerun without verification.
pub fn leading_order(main: &ShotTally, forced: &[(usize, ShotTally)], rounds: u32) -> Result<RateEstimate> {
    let base = postselect_only(main, 1)?;
    let p0 = base.p_l;
    let mut var = match base.sigma_log10 {
        Some(s) => (s * p0 * std::f64::consts::LN_10).powi(2),
        None => 0.0,
    };
    let mut terms = Vec::new();
    for (c, t) in forced {
        let stats = &main.classes[*c];
        let w = stats.instances as f64 * stats.failure_rate();
        if t.shots_total == 0 {
            continue;
        }
        let pc = t.mean_failure();
        var += w * w * pc * (1.0 - pc) / t.trials() as f64;
        terms.push((w, pc));
    }
    let p = leading_order_rate(p0, &terms);
    let sigma = (p > 0.0 && var > 0.0).then(|| var.sqrt() / (p * std::f64::consts::LN_10));
    Ok(RateEstimate { p_l: p / rounds as f64, sigma_log10: sigma })
}

/// Output record of one simulated point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub code: String,
    pub level: u8,
    pub r: Option<u8>,
    pub r_next: Option<u8>,
    pub p: f64,
    pub gamma: f64,
    pub shots: u64,
    pub rounds: u32,
    pub variant: Variant,
    pub accounting: Accounting,
    pub p_l: f64,
    pub sigma_log10: Option<f64>,
    pub failures: u64,
    /// Post-selected rate if every first verification attempt had to pass.
    pub p_l_all_pass: Option<f64>,
    pub verification: VerificationStats,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationStats {
    pub attempts: u64,
    pub failures: u64,
    pub aborted: u64,
    pub all_pass_shots: u64,
    pub classes: Vec<ClassStats>,
    /// Forced-failure rate `P^(c)` per class, for the leading-order accounting.
    pub forced_rates: Vec<(String, f64)>,
}

/// Flat CSV form of [`RateRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub code: String,
    pub level: u8,
    pub r: Option<u8>,
    pub r_next: Option<u8>,
    pub p: f64,
    pub gamma: f64,
    pub shots: u64,
    pub rounds: u32,
    pub variant: String,
    pub accounting: String,
    pub p_l: f64,
    pub sigma_log10: Option<f64>,
    pub failures: u64,
    pub ver_attempts: u64,
    pub ver_failures: u64,
    pub seed: u64,
}

impl From<&RateRecord> for CsvRow {
    fn from(r: &RateRecord) -> Self {
        CsvRow {
            code: r.code.clone(),
            level: r.level,
            r: r.r,
            r_next: r.r_next,
            p: r.p,
            gamma: r.gamma,
            shots: r.shots,
            rounds: r.rounds,
            variant: format!("{:?}", r.variant).to_lowercase(),
            accounting: serde_json::to_value(r.accounting).unwrap().as_str().unwrap().to_string(),
            p_l: r.p_l,
            sigma_log10: r.sigma_log10,
            failures: r.failures,
            ver_attempts: r.verification.attempts,
            ver_failures: r.verification.failures,
            seed: r.seed,
        }
    }
}

fn sub_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed ^ (i + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the benchmark and applies the given accounting.
pub fn simulate(spec: &BenchmarkSpec, accounting: Accounting) -> Result<RateRecord> {
    let circuit = spec.compile()?;
    let opts = FrameOptions::new(spec.noise);
    let main = run_shots(&circuit, &opts, spec.shots, spec.seed)?;
    let rounds = spec.noisy_rounds();
    let mut forced = Vec::new();
    let estimate = match accounting {
        Accounting::PostselectOnly => postselect_only(&main, rounds)?,
        Accounting::LeadingOrder => {
            for (c, stats) in main.classes.iter().enumerate() {
                if stats.instances == 0 || stats.failures == 0 {
                    continue;
                }
                let o = FrameOptions { verify: VerifyMode::ForceFail(c as u32), ..opts };
                let t = run_shots(&circuit, &o, spec.verification_shots, sub_seed(spec.seed, c as u64))?;
                forced.push((c, t));
            }
            leading_order(&main, &forced, rounds)?
        }
    };
    Ok(RateRecord {
        code: spec.code.name(),
        level: spec.code.level,
        r: match spec.code.family {
            Family::Hamming(r) => Some(r),
            _ => None,
        },
        r_next: spec.r_next,
        p: spec.noise.p,
        gamma: spec.noise.gamma,
        shots: spec.shots,
        rounds,
        variant: spec.variant,
        accounting,
        p_l: estimate.p_l,
        sigma_log10: estimate.sigma_log10,
        failures: main.failures.iter().sum(),
        p_l_all_pass: all_pass_rate(&main, rounds),
        verification: VerificationStats {
            attempts: main.classes.iter().map(|c| c.attempts).sum(),
            failures: main.classes.iter().map(|c| c.failures).sum(),
            aborted: main.aborted,
            all_pass_shots: main.shots_by_outcome.all_pass,
            classes: main.classes.clone(),
            forced_rates: forced.iter().map(|(c, t)| (main.classes[*c].class.clone(), t.mean_failure())).collect(),
        },
        seed: spec.seed,
    })
}

pub fn write_json<W: std::io::Write>(w: W, records: &[RateRecord]) -> Result<()> {
    serde_json::to_writer_pretty(w, records)?;
    Ok(())
}

pub fn write_csv<W: std::io::Write>(w: W, records: &[RateRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(CsvRow::from(r))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_json(text: &str) -> Result<Vec<RateRecord>> {
    Ok(serde_json::from_str(text)?)
}

/// Reads rows written by `write_csv`; lines starting with `#` are skipped.
pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<CsvRow>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rd.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(code: &str, p: f64, shots: u64) -> BenchmarkSpec {
        let mut s = BenchmarkSpec::new(CodeSpec::parse(code).unwrap(), NoiseParams::new(p, p).unwrap());
        s.shots = shots;
        s.seed = 11;
        s
    }

    #[test]
    fn sigma_examples() {
        assert!((sigma_log10(100, 1_000_000).unwrap().unwrap() - 0.0434).abs() < 1e-4);
        assert!((sigma_log10(1, 10_000).unwrap().unwrap() - 0.434).abs() < 1e-3);
        assert_eq!(sigma_log10(50, 50).unwrap(), Some(0.0));
        assert_eq!(sigma_log10(0, 50).unwrap(), None);
        assert!(sigma_log10(0, 0).is_err());
    }

    #[test]
    fn leading_order_examples() {
        let p = leading_order_rate(1e-6, &[(1e-3, 1e-4), (1e-3, 1e-4)]);
        assert!((p - 1.2e-6).abs() < 1e-18);
        assert_eq!(leading_order_rate(3e-5, &[(0.0, 0.5)]), 3e-5);
    }

    #[test]
    fn noiseless_run_is_clean() {
        let t = run_benchmark(&spec("c4", 0.0, 10_000)).unwrap();
        assert_eq!(t.shots_total, 10_000);
        assert_eq!(t.failures, vec![0, 0]);
        assert_eq!(t.shots_by_outcome.all_pass, 10_000);
        assert!(t.classes.iter().all(|c| c.failures == 0));
        let r = postselect_only(&t, 10).unwrap();
        assert_eq!(r.p_l, 0.0);
        assert_eq!(r.sigma_log10, None);
    }

    #[test]
    fn arithmetic_example() {
        let mut t = ShotTally {
            shots_total: 1_000_000,
            aborted: 0,
            classes: Vec::new(),
            shots_by_outcome: OutcomeCounts { all_pass: 1_000_000, single: Vec::new(), other: 0 },
            failures: vec![100],
            failures_by_outcome: vec![OutcomeCounts { all_pass: 100, single: Vec::new(), other: 0 }],
        };
        assert!(t.is_consistent());
        assert!((postselect_only(&t, 10).unwrap().p_l - 1e-5).abs() < 1e-18);
        t.shots_total = 0;
        assert!(postselect_only(&t, 10).is_err());
    }

    #[test]
    fn tallies_are_deterministic_and_partitioned() {
        let s = spec("c4", 1e-2, 3000);
        let a = run_benchmark(&s).unwrap();
        let b = run_benchmark(&s).unwrap();
        assert_eq!(a, b);
        assert!(a.is_consistent());
        assert!(a.shots_by_outcome.all_pass < a.shots_total);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| run_benchmark(&s).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn c4_failures_at_high_p_have_small_relative_error() {
        let r = simulate(&spec("c4", 1e-2, 100_000), Accounting::PostselectOnly).unwrap();
        let rel = r.sigma_log10.unwrap() * std::f64::consts::LN_10;
        assert!(r.failures > 0 && rel < 0.05, "{r:?}");
    }

    #[test]
    fn leading_order_reduces_to_postselect_without_failures() {
        let s = spec("q3", 0.0, 640);
        let a = simulate(&s, Accounting::LeadingOrder).unwrap();
        let b = simulate(&s, Accounting::PostselectOnly).unwrap();
        assert_eq!(a.p_l, b.p_l);
        assert!(a.verification.forced_rates.is_empty());
    }

    #[test]
    fn hamming_leading_order_adds_forced_terms() {
        let mut s = spec("q3", 2e-3, 6400);
        s.verification_shots = 640;
        let r = simulate(&s, Accounting::LeadingOrder).unwrap();
        assert!(!r.verification.forced_rates.is_empty());
        assert_eq!(r.r_next, Some(4));
        let p = simulate(&s, Accounting::PostselectOnly).unwrap();
        assert!(r.p_l >= p.p_l);
    }

    #[test]
    fn spec_validation() {
        let mut s = spec("c4", 1e-3, 10);
        s.variant = Variant::Simplified;
        assert!(s.validate().is_err());
        let mut s = spec("steane:2", 1e-3, 10);
        s.variant = Variant::Simplified;
        assert!(s.validate().is_ok());
        assert_eq!(s.noisy_rounds(), 1);
        let mut s = spec("q3", 1e-3, 10);
        s.r_next = Some(2);
        assert!(s.validate().is_err());
        assert!(matches!(spec("c6:3", 1e-3, 10).validate(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn records_round_trip() {
        let r = simulate(&spec("c4", 3e-3, 640), Accounting::PostselectOnly).unwrap();
        let mut buf = Vec::new();
        write_json(&mut buf, std::slice::from_ref(&r)).unwrap();
        assert_eq!(read_json(std::str::from_utf8(&buf).unwrap()).unwrap(), vec![r.clone()]);
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&r)).unwrap();
        let rows = read_csv(&buf[..]).unwrap();
        assert_eq!(rows, vec![CsvRow::from(&r)]);
    }
}

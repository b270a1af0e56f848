//! Level-by-level composition of logical error rates, space overheads and
//! chain optimization for a target logical error rate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::ModelConstants;
use crate::error::{Error, Result};
use crate::fit::fibonacci;
use crate::noise::GammaModel;

/// Intermediate rates above this are outside the range the fits were made in.
pub const VALIDITY_LIMIT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnderlyingKind {
    C4c6,
    Surface,
    Steane,
    C4Steane,
}

impl UnderlyingKind {
    pub const ALL: [UnderlyingKind; 4] =
        [UnderlyingKind::C4c6, UnderlyingKind::Surface, UnderlyingKind::Steane, UnderlyingKind::C4Steane];

    pub fn name(self) -> &'static str {
        match self {
            UnderlyingKind::C4c6 => "c4c6",
            UnderlyingKind::Surface => "surface",
            UnderlyingKind::Steane => "steane",
            UnderlyingKind::C4Steane => "c4steane",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c4c6" | "c4/c6" => Ok(UnderlyingKind::C4c6),
            "surface" => Ok(UnderlyingKind::Surface),
            "steane" => Ok(UnderlyingKind::Steane),
            "c4steane" | "c4/steane" => Ok(UnderlyingKind::C4Steane),
            other => Err(Error::Parse(format!("unknown underlying code {other:?}"))),
        }
    }
}

/// The code below the Hamming levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Underlying {
    /// Level `L'` of the C4/C6 code.
    C4c6(u8),
    /// Distance `d`.
    Surface(u32),
    Steane(u8),
    C4Steane(u8),
}

impl Underlying {
    pub fn kind(self) -> UnderlyingKind {
        match self {
            Underlying::C4c6(_) => UnderlyingKind::C4c6,
            Underlying::Surface(_) => UnderlyingKind::Surface,
            Underlying::Steane(_) => UnderlyingKind::Steane,
            Underlying::C4Steane(_) => UnderlyingKind::C4Steane,
        }
    }

    fn validate(self) -> Result<()> {
        let ok = match self {
            Underlying::C4c6(l) | Underlying::Steane(l) | Underlying::C4Steane(l) => (1..=20).contains(&l),
            Underlying::Surface(d) => d >= 1 && d % 2 == 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("invalid underlying code {self}")))
        }
    }

    /// `(code, N, K)` after each level.
    pub fn levels(self) -> Vec<(String, u128, u128)> {
        match self {
            Underlying::C4c6(l) => (1..=l as u32)
                .map(|i| (if i == 1 { "C4" } else { "C6" }.to_string(), 4 * 3u128.pow(i - 1), 2))
                .collect(),
            Underlying::Surface(d) => vec![(format!("surface d={d}"), (d as u128).pow(2), 1)],
            Underlying::Steane(l) => (1..=l as u32).map(|i| ("Steane".to_string(), 7u128.pow(i), 1)).collect(),
            Underlying::C4Steane(l) => (1..=l as u32)
                .map(|i| (if i == 1 { "C4" } else { "Steane" }.to_string(), 4 * 7u128.pow(i - 1), 2))
                .collect(),
        }
    }

    pub fn n_k(self) -> (u128, u128) {
        let (_, n, k) = self.levels().pop().unwrap();
        (n, k)
    }

    /// Logical error rate after each level, from the fitting curves and
    /// their recursions.
    pub fn level_rates(self, p: f64, m: &ModelConstants) -> Vec<f64> {
        let steane = |l: u8, mut x: f64| {
            // Odd levels apply the level-1 curve on top of level l - 1, even
            // levels the level-2 curve on top of level l - 2.
            let mut stack = Vec::new();
            let mut l = l;
            while l > 0 {
                let step = if l % 2 == 1 { 1 } else { 2 };
                stack.push(step);
                l -= step;
            }
            for step in stack.into_iter().rev() {
                x = if step == 1 { m.steane.a1.value * x * x } else { m.steane.a2.value * x.powi(4) };
            }
            x
        };
        match self {
            Underlying::C4c6(l) => (1..=l as usize)
                .map(|i| m.c4c6.a.value * (m.c4c6.b.value * p).powf(fibonacci(i) as f64))
                .collect(),
            Underlying::Surface(d) => vec![m.surface.a.value * (m.surface.b.value * p).powf((d as f64 + 1.0) / 2.0)],
            Underlying::Steane(l) => (1..=l).map(|i| steane(i, p)).collect(),
            Underlying::C4Steane(l) => (1..=l)
                .map(|i| match i {
                    1 => m.c4c6.a.value * m.c4c6.b.value * p,
                    _ => steane(i - 2, m.c4_steane.a2.value * p.powi(3)),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Underlying {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Underlying::C4c6(l) => write!(f, "c4c6:{l}"),
            Underlying::Surface(d) => write!(f, "surface:{d}"),
            Underlying::Steane(l) => write!(f, "steane:{l}"),
            Underlying::C4Steane(l) => write!(f, "c4steane:{l}"),
        }
    }
}

/// An underlying code followed by Hamming codes `Q_{r_1}, ..., Q_{r_L}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConcatChain {
    pub underlying: Underlying,
    pub hamming: Vec<u8>,
}

pub fn hamming_n_k(r: u8) -> (u128, u128) {
    let n = (1u128 << r) - 1;
    (n, n - 2 * r as u128)
}

impl ConcatChain {
    pub fn new(underlying: Underlying, hamming: Vec<u8>) -> Result<Self> {
        underlying.validate()?;
        if hamming.iter().any(|&r| !(3..=8).contains(&r)) {
            return Err(Error::Contract("Hamming parameters must lie in 3..=8".into()));
        }
        if hamming.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Contract("Hamming parameters must be nondecreasing".into()));
        }
        Ok(ConcatChain { underlying, hamming })
    }

    /// Level-5 C4/C6 with `Q5, Q6, Q7, Q7` on top.
    pub fn table1() -> Self {
        ConcatChain { underlying: Underlying::C4c6(5), hamming: vec![5, 6, 7, 7] }
    }

    /// `c4c6:5+q5+q6+q7+q7`, `surface:41`, `steane:3`, or `table1`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "table1" {
            return Ok(Self::table1());
        }
        let mut parts = s.split('+');
        let head = parts.next().unwrap_or_default();
        let bad = || Error::Parse(format!("cannot parse chain {s:?}"));
        let (kind, arg) = head.split_once(':').ok_or_else(bad)?;
        let arg: u32 = arg.trim_start_matches('d').parse().map_err(|_| bad())?;
        let small = || u8::try_from(arg).map_err(|_| bad());
        let underlying = match UnderlyingKind::parse(kind)? {
            UnderlyingKind::C4c6 => Underlying::C4c6(small()?),
            UnderlyingKind::Surface => Underlying::Surface(arg),
            UnderlyingKind::Steane => Underlying::Steane(small()?),
            UnderlyingKind::C4Steane => Underlying::C4Steane(small()?),
        };
        let hamming = parts
            .map(|q| q.strip_prefix('q').and_then(|r| r.parse::<u8>().ok()).ok_or_else(bad))
            .collect::<Result<Vec<u8>>>()?;
        ConcatChain::new(underlying, hamming)
    }

    pub fn overhead(&self) -> f64 {
        let (n, k) = self.n_k();
        n as f64 / k as f64
    }

    pub fn n_k(&self) -> (u128, u128) {
        let (mut n, mut k) = self.underlying.n_k();
        for &r in &self.hamming {
            let (a, b) = hamming_n_k(r);
            n *= a;
            k *= b;
        }
        (n, k)
    }
}

impl fmt::Display for ConcatChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.underlying)?;
        for r in &self.hamming {
            write!(f, "+q{r}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    pub code: String,
    pub n: u128,
    pub k: u128,
    pub overhead: f64,
}

/// `N`, `K` and `N/K` after every level of the chain.
pub fn space_overhead(chain: &ConcatChain) -> Vec<LevelRow> {
    let mut rows: Vec<LevelRow> = chain
        .underlying
        .levels()
        .into_iter()
        .map(|(code, n, k)| LevelRow { level: 0, code, n, k, overhead: n as f64 / k as f64 })
        .collect();
    let (mut n, mut k) = chain.underlying.n_k();
    for &r in &chain.hamming {
        let (a, b) = hamming_n_k(r);
        n *= a;
        k *= b;
        rows.push(LevelRow { level: 0, code: format!("Q{r}"), n, k, overhead: n as f64 / k as f64 });
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row.level = i + 1;
    }
    rows
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub p_l: f64,
    /// Logical error rate after every level, aligned with `space_overhead`.
    pub levels: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Hamming constant of level `i`: `a_{r_i}^{(r_{i+1})}`, or
/// `a_{r_L}^{(r_L + 1)}` for the top level.
fn stage_constant(hamming: &[u8], i: usize, m: &ModelConstants) -> Result<f64> {
    let r = hamming[i];
    let next = hamming.get(i + 1).copied().unwrap_or(r + 1);
    m.hamming(r, next)
}

/// Composes the underlying curve with every Hamming level.
pub fn compose_error(chain: &ConcatChain, p: f64, m: &ModelConstants) -> Result<Composition> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Contract(format!("physical error rate {p} must lie in [0, 1)")));
    }
    let mut levels = chain.underlying.level_rates(p, m);
    let mut warnings = Vec::new();
    let mut x = *levels.last().unwrap();
    for i in 0..chain.hamming.len() {
        if x > VALIDITY_LIMIT {
            warnings.push(format!("input {x:.3e} to Q{} exceeds the fit range {VALIDITY_LIMIT:e}", chain.hamming[i]));
        }
        x = stage_constant(&chain.hamming, i, m)? * x * x;
        levels.push(x);
    }
    Ok(Composition { p_l: x, levels, warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub target: f64,
    pub p: f64,
    pub gamma: GammaModel,
}

impl TargetSpec {
    pub fn new(target: f64, p: f64, gamma: GammaModel) -> Result<Self> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::Contract(format!("target {target} must lie in (0, 1)")));
        }
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Contract(format!("physical error rate {p} must lie in [0, 1)")));
        }
        Ok(TargetSpec { target, p, gamma })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    /// Largest C4/C6, Steane or C4/Steane level.
    pub max_underlying_level: u8,
    pub max_surface_distance: u32,
    pub max_hamming_levels: usize,
    pub r_min: u8,
    pub r_max: u8,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { max_underlying_level: 8, max_surface_distance: 401, max_hamming_levels: 10, r_min: 3, r_max: 7 }
    }
}

impl SearchBounds {
    fn underlying(&self, kind: UnderlyingKind) -> Vec<Underlying> {
        let levels = 1..=self.max_underlying_level;
        match kind {
            UnderlyingKind::C4c6 => levels.map(Underlying::C4c6).collect(),
            UnderlyingKind::Steane => levels.map(Underlying::Steane).collect(),
            UnderlyingKind::C4Steane => levels.map(Underlying::C4Steane).collect(),
            UnderlyingKind::Surface => (3..=self.max_surface_distance).step_by(2).map(Underlying::Surface).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub chain: ConcatChain,
    pub n: u128,
    pub k: u128,
    pub overhead: f64,
    pub p_l: f64,
}

impl Plan {
    fn of(chain: ConcatChain, p_l: f64) -> Self {
        let (n, k) = chain.n_k();
        Plan { overhead: n as f64 / k as f64, chain, n, k, p_l }
    }

    fn better_than(&self, o: &Plan) -> bool {
        let tol = 1e-12 * o.overhead;
        self.overhead < o.overhead - tol || ((self.overhead - o.overhead).abs() <= tol && self.n < o.n)
    }
}

struct Search<'a> {
    m: &'a ModelConstants,
    bounds: &'a SearchBounds,
    target: f64,
    prune: bool,
    best: Option<Plan>,
}

impl Search<'_> {
    /// `before` is the rate entering the top level `seq.last()`.
    fn visit(&mut self, underlying: Underlying, seq: &mut Vec<u8>, before: f64, ratio: f64) -> Result<()> {
        let base = underlying.n_k();
        let floor = ratio * base.0 as f64 / base.1 as f64;
        if self.prune && self.best.as_ref().is_some_and(|b| floor > b.overhead * (1.0 + 1e-12)) {
            return Ok(());
        }
        let p_l = match seq.last() {
            None => before,
            Some(&r) => self.m.hamming(r, r + 1)? * before * before,
        };
        if p_l <= self.target {
            let plan = Plan::of(ConcatChain { underlying, hamming: seq.clone() }, p_l);
            if self.best.as_ref().is_none_or(|b| plan.better_than(b)) {
                self.best = Some(plan);
            }
        }
        if seq.len() >= self.bounds.max_hamming_levels {
            return Ok(());
        }
        let options: Vec<u8> = match seq.last() {
            None => (self.bounds.r_min..=self.bounds.r_max).collect(),
            Some(&r) => self.m.successors(r).into_iter().filter(|&s| s <= self.bounds.r_max).collect(),
        };
        for s in options {
            let entering = match seq.last() {
                None => before,
                Some(&r) => self.m.hamming(r, s)? * before * before,
            };
            let (n, k) = hamming_n_k(s);
            seq.push(s);
            self.visit(underlying, seq, entering, ratio * n as f64 / k as f64)?;
            seq.pop();
        }
        Ok(())
    }
}

fn search(
    spec: &TargetSpec,
    kind: UnderlyingKind,
    m: &ModelConstants,
    bounds: &SearchBounds,
    prune: bool,
) -> Result<Plan> {
    if m.gamma != spec.gamma {
        return Err(Error::Contract("constants do not match the idle-error model".into()));
    }
    let mut s = Search { m, bounds, target: spec.target, prune, best: None };
    let mut candidates = bounds.underlying(kind);
    candidates.sort_by(|a, b| {
        let (x, y) = (a.n_k(), b.n_k());
        (x.0 as f64 / x.1 as f64).total_cmp(&(y.0 as f64 / y.1 as f64))
    });
    for u in candidates {
        let p0 = *u.level_rates(spec.p, m).last().unwrap();
        s.visit(u, &mut Vec::new(), p0, 1.0)?;
    }
    s.best.ok_or_else(|| {
        Error::Infeasible(format!("{} cannot reach {:e} at p = {:e}", kind.name(), spec.target, spec.p))
    })
}

/// Chain with the smallest `N/K` (ties: smaller `N`) reaching the target.
pub fn optimize_chain(
    spec: &TargetSpec,
    kind: UnderlyingKind,
    m: &ModelConstants,
    bounds: &SearchBounds,
) -> Result<Plan> {
    search(spec, kind, m, bounds, true)
}

/// Unpruned reference search over the whole bounded space.
pub fn optimize_chain_exhaustive(
    spec: &TargetSpec,
    kind: UnderlyingKind,
    m: &ModelConstants,
    bounds: &SearchBounds,
) -> Result<Plan> {
    search(spec, kind, m, bounds, false)
}

/// Smallest odd `d >= 3` whose surface curve meets the target, with `d^2`
/// qubits per logical qubit.
pub fn surface_overhead_for_target(p: f64, target: f64, m: &ModelConstants) -> Result<(u32, u128)> {
    let (a, b) = (m.surface.a.value, m.surface.b.value);
    let curve = |d: u32| a * (b * p).powf((d as f64 + 1.0) / 2.0);
    if !(target > 0.0) {
        return Err(Error::Contract("target must be positive".into()));
    }
    if curve(3) <= target {
        return Ok((3, 9));
    }
    if !(p < m.surface_critical.p_th.value && b * p < 1.0) {
        return Err(Error::Infeasible(format!("surface code cannot suppress errors at p = {p:e}")));
    }
    let half = ((target / a).ln() / (b * p).ln()).ceil().max(2.0);
    let mut d = (2.0 * half - 1.0) as u32;
    while d > 3 && curve(d - 2) <= target {
        d -= 2;
    }
    while curve(d) > target {
        d += 2;
    }
    Ok((d, (d as u128).pow(2)))
}

/// CNOT count of Shor's algorithm for an `n`-bit modulus.
pub fn rsa_cnot_count(n_bits: u32) -> f64 {
    let n = n_bits as f64;
    1.8 * n.powi(3) + 0.003 * n.powi(3) * n.log2()
}

/// Toffoli count of the same circuit; each Toffoli is six CNOTs.
pub fn rsa_toffoli_count(n_bits: u32) -> f64 {
    let n = n_bits as f64;
    0.3 * n.powi(3) + 0.0005 * n.powi(3) * n.log2()
}

/// Inverse of the total number of operations of a classical computation.
pub fn classical_error_budget(ops_per_second: f64, seconds: f64) -> Result<f64> {
    if !(ops_per_second > 0.0 && seconds > 0.0) {
        return Err(Error::Contract("operation rate and duration must be positive".into()));
    }
    Ok(1.0 / (ops_per_second * seconds))
}

/// One output row of a planning table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRow {
    pub p: f64,
    pub gamma: GammaModel,
    pub underlying: String,
    /// Chain string, or `-` when infeasible.
    pub chain: String,
    pub n: Option<u128>,
    pub k: Option<u128>,
    pub overhead: Option<f64>,
    pub p_l: Option<f64>,
}

impl PlanRow {
    pub fn from_plan(p: f64, gamma: GammaModel, kind: UnderlyingKind, plan: Option<&Plan>) -> Self {
        match plan {
            Some(pl) => PlanRow {
                p,
                gamma,
                underlying: kind.name().into(),
                chain: pl.chain.to_string(),
                n: Some(pl.n),
                k: Some(pl.k),
                overhead: Some(pl.overhead),
                p_l: Some(pl.p_l),
            },
            None => PlanRow {
                p,
                gamma,
                underlying: kind.name().into(),
                chain: "-".into(),
                n: None,
                k: None,
                overhead: None,
                p_l: None,
            },
        }
    }
}

/// Rows of a composed chain, one per level.
pub fn chain_rows(chain: &ConcatChain, p: f64, m: &ModelConstants) -> Result<Vec<PlanRow>> {
    let comp = compose_error(chain, p, m)?;
    let rows = space_overhead(chain);
    let mut out = Vec::new();
    let mut prefix = ConcatChain { underlying: chain.underlying, hamming: Vec::new() };
    let base = chain.underlying.levels().len();
    for (i, (row, p_l)) in rows.iter().zip(&comp.levels).enumerate() {
        let label = if i < base {
            match chain.underlying {
                Underlying::C4c6(_) => Underlying::C4c6(i as u8 + 1).to_string(),
                Underlying::Steane(_) => Underlying::Steane(i as u8 + 1).to_string(),
                Underlying::C4Steane(_) => Underlying::C4Steane(i as u8 + 1).to_string(),
                Underlying::Surface(_) => chain.underlying.to_string(),
            }
        } else {
            prefix.hamming.push(chain.hamming[i - base]);
            prefix.to_string()
        };
        out.push(PlanRow {
            p,
            gamma: m.gamma,
            underlying: chain.underlying.kind().name().into(),
            chain: label,
            n: Some(row.n),
            k: Some(row.k),
            overhead: Some(row.overhead),
            p_l: Some(*p_l),
        });
    }
    Ok(out)
}

pub fn write_rows_csv<W: std::io::Write>(w: W, rows: &[PlanRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["p", "gamma", "underlying", "chain", "N", "K", "overhead", "p_L"])?;
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    for r in rows {
        wr.write_record([
            format!("{:e}", r.p),
            r.gamma.label().to_string(),
            r.underlying.clone(),
            r.chain.clone(),
            opt(r.n.map(|v| v.to_string())),
            opt(r.k.map(|v| v.to_string())),
            opt(r.overhead.map(|v| format!("{v}"))),
            opt(r.p_l.map(|v| format!("{v:e}"))),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_rows_json<W: std::io::Write>(w: W, rows: &[PlanRow]) -> Result<()> {
    serde_json::to_writer_pretty(w, rows)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::FitConstants;
    use proptest::prelude::*;

    fn model(g: GammaModel) -> ModelConstants {
        FitConstants::bundled().model(g).unwrap().clone()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn table1_overheads() {
        let rows = space_overhead(&ConcatChain::table1());
        let nk: Vec<f64> = rows.iter().map(|r| r.overhead).collect();
        let want = [2.0, 6.0, 18.0, 54.0, 162.0, 239.0, 295.0, 332.0, 373.0];
        assert_eq!(rows.len(), 9);
        for (a, b) in nk.iter().zip(want) {
            assert!((a - b).abs() < 0.5, "{nk:?}");
        }
        assert_eq!((rows[4].n, rows[4].k), (324, 2));
        assert_eq!((rows[5].n, rows[5].k), (10044, 42));
        assert!(rel(rows[8].n as f64, 1.02e10) < 0.005 && rel(rows[8].k as f64, 2.74e7) < 0.005);
    }

    #[test]
    fn table1_composition() {
        let m = model(GammaModel::Equal);
        let c = compose_error(&ConcatChain::table1(), 1e-3, &m).unwrap();
        assert!(rel(c.levels[4], 4.7e-12) < 0.02);
        assert!(c.p_l <= 1e-24 && c.p_l > 1e-27, "{}", c.p_l);
        assert!(c.warnings.is_empty());
        let bare = ConcatChain::new(Underlying::C4c6(5), vec![]).unwrap();
        assert!(compose_error(&bare, 1e-3, &m).unwrap().p_l <= 1e-10);
        assert_eq!(compose_error(&ConcatChain::table1(), 0.0, &m).unwrap().p_l, 0.0);
    }

    #[test]
    fn steane_recursion_alternates() {
        let m = model(GammaModel::Equal);
        let r = Underlying::Steane(4).level_rates(1e-4, &m);
        let (a1, a2) = (m.steane.a1.value, m.steane.a2.value);
        assert!(rel(r[0], a1 * 1e-8) < 1e-12);
        assert!(rel(r[1], a2 * 1e-16) < 1e-12);
        assert!(rel(r[2], a1 * r[1] * r[1]) < 1e-12);
        assert!(rel(r[3], a2 * r[1].powi(4)) < 1e-12);
        let c = Underlying::C4Steane(3).level_rates(1e-4, &m);
        assert!(rel(c[0], 0.77 * 39.6 * 1e-4) < 1e-12);
        assert!(rel(c[2], a1 * c[1] * c[1]) < 1e-12);
    }

    #[test]
    fn high_inputs_are_flagged() {
        let m = model(GammaModel::Equal);
        let c = ConcatChain::new(Underlying::C4c6(1), vec![3]).unwrap();
        assert_eq!(compose_error(&c, 1e-2, &m).unwrap().warnings.len(), 1);
    }

    #[test]
    fn chain_names_round_trip() {
        for s in ["c4c6:5+q5+q6+q7+q7", "surface:41", "steane:2+q4", "c4steane:3"] {
            assert_eq!(ConcatChain::parse(s).unwrap().to_string(), s);
        }
        assert_eq!(ConcatChain::parse("table1").unwrap(), ConcatChain::table1());
        assert!(ConcatChain::parse("c4c6:5+q7+q6").is_err());
        assert!(ConcatChain::parse("surface:4").is_err());
        assert!(ConcatChain::parse("torus:3").is_err());
    }

    #[test]
    fn optimizer_examples() {
        let m = model(GammaModel::Equal);
        let b = SearchBounds::default();
        let at = |p: f64, kind| optimize_chain(&TargetSpec::new(1e-24, p, GammaModel::Equal).unwrap(), kind, &m, &b);
        let plan = at(1e-3, UnderlyingKind::C4c6).unwrap();
        assert_eq!(plan.chain, ConcatChain::table1());
        assert!(rel(plan.overhead, 3.7e2) < 0.02);
        assert!(rel(at(1e-4, UnderlyingKind::C4c6).unwrap().overhead, 1.0e2) < 0.05);
        assert!(matches!(at(1e-2, UnderlyingKind::Steane), Err(Error::Infeasible(_))));
        assert!(matches!(at(1e-3, UnderlyingKind::Steane), Err(Error::Infeasible(_))));
    }

    #[test]
    fn surface_distances() {
        let m = model(GammaModel::Equal);
        assert_eq!(surface_overhead_for_target(1e-3, 1e-10, &m).unwrap(), (41, 1681));
        assert_eq!(surface_overhead_for_target(1e-3, 1e-24, &m).unwrap(), (101, 10201));
        assert_eq!(surface_overhead_for_target(1e-3, 0.9, &m).unwrap().0, 3);
        assert!(surface_overhead_for_target(5e-3, 1e-10, &m).is_err());
    }

    #[test]
    fn application_targets() {
        assert!(rel(rsa_cnot_count(2048), 15_745_350_107.0) < 1e-9);
        assert_eq!(rsa_cnot_count(1), 1.8);
        for n in [1, 7, 2048, 4096] {
            assert!(rel(6.0 * rsa_toffoli_count(n), rsa_cnot_count(n)) < 1e-12);
        }
        assert!(rel(classical_error_budget(5e17, 2.6e6).unwrap(), 7.69e-25) < 1e-3);
        assert_eq!(classical_error_budget(1.0, 1.0).unwrap(), 1.0);
        assert!(rel(classical_error_budget(1e9, 1e3).unwrap(), 1e-12) < 1e-12);
        assert!(classical_error_budget(0.0, 1.0).is_err());
    }

    #[test]
    fn rows_serialize() {
        let m = model(GammaModel::Equal);
        let rows = chain_rows(&ConcatChain::table1(), 1e-3, &m).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[8].chain, "c4c6:5+q5+q6+q7+q7");
        let mut buf = Vec::new();
        write_rows_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p,gamma,underlying,chain,N,K,overhead,p_L\n"));
        assert_eq!(text.lines().count(), 10);
        let mut buf = Vec::new();
        write_rows_json(&mut buf, &rows).unwrap();
        let back: Vec<PlanRow> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, rows);
    }

    fn chain_strategy() -> impl Strategy<Value = ConcatChain> {
        (
            prop_oneof![
                (1u8..=7).prop_map(Underlying::C4c6),
                (1u32..60).prop_map(|h| Underlying::Surface(2 * h + 1)),
                (1u8..=5).prop_map(Underlying::Steane),
                (1u8..=5).prop_map(Underlying::C4Steane),
            ],
            proptest::collection::vec(3u8..=7, 0..6),
        )
            .prop_map(|(u, mut h)| {
                h.sort_unstable();
                ConcatChain { underlying: u, hamming: h }
            })
    }

    proptest! {
        #[test]
        fn overhead_is_a_product(chain in chain_strategy()) {
            let (n0, k0) = chain.underlying.n_k();
            let mut want = n0 as f64 / k0 as f64;
            for &r in &chain.hamming {
                let (n, k) = hamming_n_k(r);
                want *= n as f64 / k as f64;
            }
            prop_assert!(rel(chain.overhead(), want) < 1e-12);
            let mut longer = chain.clone();
            longer.hamming.push(7);
            prop_assert!(rel(longer.overhead(), chain.overhead() * 127.0 / 113.0) < 1e-12);
        }

        #[test]
        fn composition_is_monotone(chain in chain_strategy(), p in 1e-6f64..1e-2, f in 1.0f64..2.0) {
            let m = model(GammaModel::Equal);
            let a = compose_error(&chain, p, &m).unwrap().p_l;
            let b = compose_error(&chain, (p * f).min(0.999), &m).unwrap().p_l;
            prop_assert!(b >= a || (a.is_infinite() && b.is_infinite()));
        }

        #[test]
        fn pruned_search_matches_exhaustive(lp in -4.5f64..-1.8, lt in -25.0f64..-8.0, k in 0usize..4) {
            let m = model(GammaModel::Equal);
            let b = SearchBounds { max_hamming_levels: 4, max_surface_distance: 61, ..SearchBounds::default() };
            let spec = TargetSpec::new(10f64.powf(lt), 10f64.powf(lp), GammaModel::Equal).unwrap();
            let kind = UnderlyingKind::ALL[k];
            let x = optimize_chain(&spec, kind, &m, &b).ok();
            let y = optimize_chain_exhaustive(&spec, kind, &m, &b).ok();
            prop_assert_eq!(&x, &y);
            if let Some(plan) = x {
                let again = compose_error(&plan.chain, spec.p, &m).unwrap().p_l;
                prop_assert!(again <= spec.target);
            }
        }
    }
}

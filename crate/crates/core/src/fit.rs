//! Scaling-curve fits to Monte Carlo rates and threshold formulas.
//!
//! Power-law fits are weighted least squares on `log10 p_L` with weights
//! `1 / sigma_log10^2`; points without a sigma get unit weight.

use serde::{Deserialize, Serialize};

use crate::constants::{CriticalFit, Estimate, HammingConstant, ModelConstants, PowerCurve};
use crate::error::{Error, Result};
use crate::estimator::{CsvRow, RateRecord};
use crate::gadgets::{CodeSpec, Family};
use crate::noise::GammaModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub p: f64,
    pub p_l: f64,
    pub sigma_log10: Option<f64>,
}

impl FitPoint {
    pub fn new(p: f64, p_l: f64, sigma_log10: Option<f64>) -> Self {
        FitPoint { p, p_l, sigma_log10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub points: usize,
    /// Root mean square of the weighted log10 residuals.
    pub rms_residual: f64,
}

/// `F_1 = 1`, `F_2 = 2`, `F_l = F_{l-1} + F_{l-2}`.
pub fn fibonacci(level: usize) -> u64 {
    let (mut a, mut b) = (1u64, 2u64);
    for _ in 1..level {
        (a, b) = (b, a + b);
    }
    if level == 0 {
        0
    } else {
        a
    }
}

/// Dense solve by Gaussian elimination with partial pivoting; `None` if singular.
pub(crate) fn solve(mut m: Vec<Vec<f64>>, mut v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        let scale = m.iter().map(|r| r[c].abs()).fold(0.0, f64::max);
        if m[piv][c].abs() <= 1e-300 || m[piv][c].abs() <= 1e-14 * scale {
            return None;
        }
        m.swap(c, piv);
        v.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                if f != 0.0 {
                    for k in c..n {
                        m[r][k] -= f * m[c][k];
                    }
                    v[r] -= f * v[c];
                }
            }
        }
    }
    Some((0..n).map(|i| v[i] / m[i][i]).collect())
}

fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let cols: Option<Vec<Vec<f64>>> =
        (0..n).map(|j| solve(m.to_vec(), (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())).collect();
    let cols = cols?;
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

struct Linear {
    beta: Vec<f64>,
    cov: Vec<Vec<f64>>,
    summary: FitSummary,
}

/// Weighted linear least squares. With `scaled`, the covariance is scaled by
/// the residual variance (unit weights carry no error information).
fn wls(rows: &[Vec<f64>], y: &[f64], w: &[f64], scaled: bool) -> Result<Linear> {
    let k = rows[0].len();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for ((r, &yi), &wi) in rows.iter().zip(y).zip(w) {
        for i in 0..k {
            xty[i] += wi * r[i] * yi;
            for j in 0..k {
                xtx[i][j] += wi * r[i] * r[j];
            }
        }
    }
    let cov = invert(&xtx).ok_or_else(|| Error::Fit("degenerate design (too few distinct points)".into()))?;
    let beta: Vec<f64> = (0..k).map(|i| (0..k).map(|j| cov[i][j] * xty[j]).sum()).collect();
    let chi2: f64 = rows
        .iter()
        .zip(y)
        .zip(w)
        .map(|((r, &yi), &wi)| {
            let e = yi - r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            wi * e * e
        })
        .sum();
    let n = y.len();
    let s2 = if scaled {
        if n > k {
            chi2 / (n - k) as f64
        } else {
            0.0
        }
    } else {
        1.0
    };
    Ok(Linear {
        beta,
        cov: cov.into_iter().map(|r| r.into_iter().map(|c| c * s2).collect()).collect(),
        summary: FitSummary { points: n, rms_residual: (chi2 / n as f64).sqrt() },
    })
}

/// Log-space coordinates and weights; the boolean is true when no point carries a sigma.
fn log_points(points: &[FitPoint]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, bool)> {
    if points.is_empty() {
        return Err(Error::Fit("no points".into()));
    }
    let with = points.iter().filter(|q| q.sigma_log10.is_some()).count();
    if with != 0 && with != points.len() {
        return Err(Error::Fit("either every point or no point must carry sigma_log10".into()));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for q in points {
        if !(q.p > 0.0 && q.p_l > 0.0 && q.p.is_finite() && q.p_l.is_finite()) {
            return Err(Error::Fit(format!("point (p = {}, p_L = {}) is not positive", q.p, q.p_l)));
        }
        let wi = match q.sigma_log10 {
            Some(s) if s > 0.0 && s.is_finite() => 1.0 / (s * s),
            Some(s) => return Err(Error::Fit(format!("degenerate sigma_log10 = {s}"))),
            None => 1.0,
        };
        x.push(q.p.log10());
        y.push(q.p_l.log10());
        w.push(wi);
    }
    Ok((x, y, w, with == 0))
}

fn from_log(log_value: f64, log_sigma: f64) -> Estimate {
    let value = 10f64.powf(log_value);
    Estimate { value, sigma: value * std::f64::consts::LN_10 * log_sigma }
}

/// `a` of `p_L = a p^exponent`.
pub fn fit_fixed_exponent(points: &[FitPoint], exponent: f64) -> Result<(Estimate, FitSummary)> {
    let (x, y, w, unit) = log_points(points)?;
    let rows = vec![vec![1.0]; x.len()];
    let y: Vec<f64> = y.iter().zip(&x).map(|(y, x)| y - exponent * x).collect();
    let f = wls(&rows, &y, &w, unit)?;
    Ok((from_log(f.beta[0], f.cov[0][0].sqrt()), f.summary))
}

/// `(a, k)` of `p_L = a p^k` with the exponent free; needs two distinct `p`.
pub fn fit_power_law(points: &[FitPoint]) -> Result<(Estimate, Estimate, FitSummary)> {
    let (x, y, w, unit) = log_points(points)?;
    let rows: Vec<Vec<f64>> = x.iter().map(|&x| vec![1.0, x]).collect();
    let f = wls(&rows, &y, &w, unit)?;
    let k = Estimate { value: f.beta[1], sigma: f.cov[1][1].sqrt() };
    Ok((from_log(f.beta[0], f.cov[0][0].sqrt()), k, f.summary))
}

/// Joint fit of `P_l = A (B p)^{F_l}` over `(level, points)` groups.
pub fn fit_c4c6(levels: &[(usize, Vec<FitPoint>)]) -> Result<(PowerCurve, FitSummary)> {
    let mut distinct: Vec<usize> = levels.iter().filter(|(_, v)| !v.is_empty()).map(|(l, _)| *l).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 || distinct.contains(&0) {
        return Err(Error::Fit("the C4/C6 fit needs data for at least two levels".into()));
    }
    let all: Vec<FitPoint> = levels.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let (x, y, w, unit) = log_points(&all)?;
    let f_of: Vec<f64> =
        levels.iter().flat_map(|(l, v)| std::iter::repeat_n(fibonacci(*l) as f64, v.len())).collect();
    let rows: Vec<Vec<f64>> = f_of.iter().map(|&f| vec![1.0, f]).collect();
    let y: Vec<f64> = y.iter().zip(&x).zip(&f_of).map(|((y, x), f)| y - f * x).collect();
    let fit = wls(&rows, &y, &w, unit)?;
    Ok((
        PowerCurve {
            a: from_log(fit.beta[0], fit.cov[0][0].sqrt()),
            b: from_log(fit.beta[1], fit.cov[1][1].sqrt()),
        },
        fit.summary,
    ))
}

/// Per-level diagnostic: `c_l = A B^{F_l}` of `P_l = c_l p^{F_l}`.
pub fn fit_c4c6_level(level: usize, points: &[FitPoint]) -> Result<(Estimate, FitSummary)> {
    if level == 0 {
        return Err(Error::Fit("level must be positive".into()));
    }
    fit_fixed_exponent(points, fibonacci(level) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub d: u32,
    pub p: f64,
    pub p_l: f64,
}

fn critical_linear(points: &[CriticalPoint], p_th: f64, mu: f64) -> Option<([f64; 3], f64)> {
    let mut m = vec![vec![0.0; 3]; 3];
    let mut v = vec![0.0; 3];
    for q in points {
        let x = (q.p - p_th) * (q.d as f64).powf(1.0 / mu);
        let r = [1.0, x, x * x];
        for i in 0..3 {
            v[i] += r[i] * q.p_l;
            for j in 0..3 {
                m[i][j] += r[i] * r[j];
            }
        }
    }
    let b = solve(m, v)?;
    let beta = [b[0], b[1], b[2]];
    let rss = points
        .iter()
        .map(|q| {
            let x = (q.p - p_th) * (q.d as f64).powf(1.0 / mu);
            let e = q.p_l - (beta[0] + beta[1] * x + beta[2] * x * x);
            e * e
        })
        .sum();
    Some((beta, rss))
}

fn critical_residuals(points: &[CriticalPoint], t: &[f64; 5]) -> Vec<f64> {
    points
        .iter()
        .map(|q| {
            let x = (q.p - t[0]) * (q.d as f64).powf(1.0 / t[1]);
            q.p_l - (t[2] + t[3] * x + t[4] * x * x)
        })
        .collect()
}

/// Derivatives of the model with respect to `(p_th, mu, C, D, E)`.
fn critical_jacobian(points: &[CriticalPoint], t: &[f64; 5]) -> Vec<[f64; 5]> {
    points
        .iter()
        .map(|q| {
            let scale = (q.d as f64).powf(1.0 / t[1]);
            let x = (q.p - t[0]) * scale;
            let slope = t[3] + 2.0 * t[4] * x;
            [-slope * scale, -slope * x * (q.d as f64).ln() / (t[1] * t[1]), 1.0, x, x * x]
        })
        .collect()
}

/// Least-squares fit of `P' = C + D x + E x^2`, `x = (p - p_th) d^(1/mu)`.
///
/// The linear coefficients are profiled out on a `(p_th, mu)` grid, and the
/// best grid point seeds a Levenberg-Marquardt refinement of all five
/// parameters.
pub fn fit_critical_exponent(points: &[CriticalPoint]) -> Result<(CriticalFit, FitSummary)> {
    let mut ds: Vec<u32> = points.iter().map(|q| q.d).collect();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 3 {
        return Err(Error::Fit("the critical-exponent fit needs at least three distances".into()));
    }
    if points.len() < 6 || points.iter().any(|q| !(q.p > 0.0 && q.p_l.is_finite()) || q.d == 0) {
        return Err(Error::Fit("the critical-exponent fit needs at least six valid points".into()));
    }
    let (pmin, pmax) = points.iter().fold((f64::INFINITY, 0f64), |(a, b), q| (a.min(q.p), b.max(q.p)));
    let mut best: Option<(f64, [f64; 5])> = None;
    const GRID: usize = 60;
    for i in 0..=GRID {
        let p_th = pmin + (pmax - pmin) * i as f64 / GRID as f64;
        for j in 0..=GRID {
            let mu = 0.3 * (4.0f64 / 0.3).powf(j as f64 / GRID as f64);
            if let Some((b, rss)) = critical_linear(points, p_th, mu) {
                if best.is_none_or(|(r, _)| rss < r) {
                    best = Some((rss, [p_th, mu, b[0], b[1], b[2]]));
                }
            }
        }
    }
    let (mut rss, mut t) = best.ok_or_else(|| Error::Fit("no admissible starting point".into()))?;
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..500 {
        let r = critical_residuals(points, &t);
        let jac = critical_jacobian(points, &t);
        let mut jtj = vec![vec![0.0; 5]; 5];
        let mut jtr = vec![0.0; 5];
        for (row, &e) in jac.iter().zip(&r) {
            for a in 0..5 {
                jtr[a] += row[a] * e;
                for b in 0..5 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut m = jtj.clone();
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(1e-300);
            }
            if let Some(step) = solve(m, jtr.clone()) {
                let mut tn = t;
                for k in 0..5 {
                    tn[k] += step[k];
                }
                if tn[1] > 0.0 {
                    let rn: f64 = critical_residuals(points, &tn).iter().map(|e| e * e).sum();
                    if rn <= rss {
                        let small = (rss - rn) <= 1e-15 * rss.max(1e-300)
                            || step.iter().zip(&t).all(|(s, v)| s.abs() <= 1e-12 * v.abs().max(1e-12));
                        t = tn;
                        rss = rn;
                        lambda = (lambda / 10.0).max(1e-12);
                        improved = true;
                        converged = small;
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }
        if !improved || converged || rss == 0.0 {
            converged = true;
            break;
        }
    }
    if !converged || !t.iter().all(|v| v.is_finite()) || t[1] <= 0.0 {
        return Err(Error::Fit("critical-exponent fit did not converge".into()));
    }
    let n = points.len();
    let s2 = if n > 5 { rss / (n - 5) as f64 } else { 0.0 };
    let mut jtj = vec![vec![0.0; 5]; 5];
    for g in critical_jacobian(points, &t) {
        for a in 0..5 {
            for b in 0..5 {
                jtj[a][b] += g[a] * g[b];
            }
        }
    }
    let sig: Vec<f64> = match invert(&jtj) {
        Some(c) => (0..5).map(|i| (c[i][i] * s2).max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; 5],
    };
    let e = |i: usize| Estimate { value: t[i], sigma: sig[i] };
    Ok((
        CriticalFit { p_th: e(0), mu: e(1), c: e(2), d: e(3), e: e(4) },
        FitSummary { points: n, rms_residual: (rss / n as f64).sqrt() },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub c4c6: f64,
    pub surface: f64,
    pub steane: f64,
    pub c4_steane: f64,
}

/// Thresholds by the closed-form expressions of each scaling curve; the
/// surface threshold is the fitted critical `p_th`.
pub fn thresholds(m: &ModelConstants) -> Thresholds {
    let a2 = m.steane.a2.value;
    Thresholds {
        c4c6: 1.0 / m.c4c6.b.value,
        surface: m.surface_critical.p_th.value,
        steane: a2.powf(-1.0 / 3.0),
        c4_steane: a2.powf(-1.0 / 9.0) * m.c4_steane.a2.value.powf(-1.0 / 3.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    /// `hamming:r:r_next`, `c4c6`, `c4c6:L`, `steane:L` or `c4steane:L`.
    pub name: String,
    pub exponent: Option<f64>,
    pub values: Vec<(String, Estimate)>,
    pub summary: FitSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub gamma: GammaModel,
    pub fits: Vec<FitEntry>,
    /// Records skipped because they had no failures.
    pub skipped: usize,
    /// The base constants with every fitted entry replaced.
    pub constants: ModelConstants,
}

/// The fields of a rate record that the fits use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub code: String,
    pub r_next: Option<u8>,
    pub p: f64,
    pub gamma: f64,
    pub p_l: f64,
    pub sigma_log10: Option<f64>,
}

impl From<&RateRecord> for RateSample {
    fn from(r: &RateRecord) -> Self {
        RateSample {
            code: r.code.clone(),
            r_next: r.r_next,
            p: r.p,
            gamma: r.gamma,
            p_l: r.p_l,
            sigma_log10: r.sigma_log10,
        }
    }
}

impl From<&CsvRow> for RateSample {
    fn from(r: &CsvRow) -> Self {
        RateSample {
            code: r.code.clone(),
            r_next: r.r_next,
            p: r.p,
            gamma: r.gamma,
            p_l: r.p_l,
            sigma_log10: r.sigma_log10,
        }
    }
}

fn gamma_of(records: &[RateSample]) -> Result<GammaModel> {
    let mut found: Option<GammaModel> = None;
    for r in records {
        let ratio = if r.p > 0.0 { r.gamma / r.p } else { continue };
        let g = GammaModel::ALL
            .into_iter()
            .find(|g| (g.ratio() - ratio).abs() <= 1e-9 * g.ratio())
            .ok_or_else(|| Error::Fit(format!("gamma / p = {ratio} is not one of the three models")))?;
        if found.is_some_and(|f| f != g) {
            return Err(Error::Fit("records mix gamma models".into()));
        }
        found = Some(g);
    }
    found.ok_or_else(|| Error::Fit("no records with p > 0".into()))
}

/// Fits every curve that the records support and merges the results into
/// `base`. With `free_exponent`, every group also gets a free power-law fit,
/// reported as `a_free` and `k`.
pub fn fit_records(
    records: &[RateSample],
    base: &crate::constants::FitConstants,
    free_exponent: bool,
) -> Result<FitReport> {
    let gamma = gamma_of(records)?;
    let mut constants = base.model(gamma)?.clone();
    let mut groups: std::collections::BTreeMap<(String, u8), Vec<FitPoint>> = Default::default();
    let mut c4c6: std::collections::BTreeMap<usize, Vec<FitPoint>> = Default::default();
    let mut skipped = 0;
    for r in records {
        if r.p <= 0.0 || r.p_l <= 0.0 {
            skipped += 1;
            continue;
        }
        let code = CodeSpec::parse(&r.code)?;
        let point = FitPoint::new(r.p, r.p_l, r.sigma_log10);
        match code.family {
            Family::C4C6 => c4c6.entry(code.level as usize).or_default().push(point),
            Family::Hamming(h) => groups.entry((format!("hamming:{h}"), r.r_next.unwrap_or(h + 1))).or_default().push(point),
            Family::Steane => groups.entry((format!("steane:{}", code.level), 0)).or_default().push(point),
            Family::C4Steane => groups.entry((format!("c4steane:{}", code.level), 0)).or_default().push(point),
        }
    }
    let mut fits = Vec::new();
    for ((name, r_next), points) in &groups {
        let (family, level) = name.split_once(':').unwrap();
        let level: u8 = level.parse().unwrap();
        let exponent = match family {
            "hamming" => 2.0,
            "steane" => 2f64.powi(level as i32),
            _ => match level {
                1 => 1.0,
                2 => 3.0,
                _ => return Err(Error::Fit(format!("no fitting curve for C4/Steane level {level}"))),
            },
        };
        if family == "steane" && level > 2 {
            return Err(Error::Fit(format!("no fitting curve for Steane level {level}")));
        }
        let (a, summary) = fit_fixed_exponent(points, exponent)?;
        let label = if family == "hamming" { format!("{name}:{r_next}") } else { name.clone() };
        match (family, level) {
            ("hamming", r) => match constants.hamming.iter_mut().find(|h| h.r == r && h.r_next == *r_next) {
                Some(h) => h.a = a,
                None => constants.hamming.push(HammingConstant { r, r_next: *r_next, a }),
            },
            ("steane", 1) => constants.steane.a1 = a,
            ("steane", _) => constants.steane.a2 = a,
            ("c4steane", 2) => constants.c4_steane.a2 = a,
            _ => {}
        }
        let mut values = vec![("a".to_string(), a)];
        if free_exponent {
            let (af, k, _) = fit_power_law(points)?;
            values.extend([("a_free".to_string(), af), ("k".to_string(), k)]);
        }
        fits.push(FitEntry { name: label, exponent: Some(exponent), values, summary });
    }
    for (level, points) in &c4c6 {
        let (c, summary) = fit_c4c6_level(*level, points)?;
        let mut values = vec![("c".to_string(), c)];
        if free_exponent {
            let (af, k, _) = fit_power_law(points)?;
            values.extend([("a_free".to_string(), af), ("k".to_string(), k)]);
        }
        fits.push(FitEntry { name: format!("c4c6:{level}"), exponent: Some(fibonacci(*level) as f64), values, summary });
    }
    if c4c6.len() >= 2 {
        let levels: Vec<(usize, Vec<FitPoint>)> = c4c6.into_iter().collect();
        let (curve, summary) = fit_c4c6(&levels)?;
        constants.c4c6 = curve;
        fits.push(FitEntry {
            name: "c4c6".into(),
            exponent: None,
            values: vec![("A".into(), curve.a), ("B".into(), curve.b)],
            summary,
        });
    }
    Ok(FitReport { gamma, fits, skipped, constants })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::FitConstants;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn fibonacci_numbers() {
        assert_eq!((1..=5).map(fibonacci).collect::<Vec<_>>(), vec![1, 2, 3, 5, 8]);
    }

    #[test]
    fn quadratic_fit_is_exact() {
        let pts: Vec<FitPoint> = [1e-3, 1e-4].iter().map(|&p| FitPoint::new(p, 5.0 * p * p, None)).collect();
        let (a, s) = fit_fixed_exponent(&pts, 2.0).unwrap();
        assert!(rel(a.value, 5.0) < 1e-10);
        assert!(s.rms_residual < 1e-12);
        let (a, _) = fit_fixed_exponent(&[FitPoint::new(1e-3, 1e-3, None)], 2.0).unwrap();
        assert!(rel(a.value, 1e3) < 1e-12);
    }

    #[test]
    fn weights_follow_sigma() {
        // A precise point dominates an imprecise one.
        let pts = [FitPoint::new(1e-3, 1e-6, Some(0.001)), FitPoint::new(1e-2, 1e-2, Some(1.0))];
        let (a, _) = fit_fixed_exponent(&pts, 2.0).unwrap();
        assert!(rel(a.value, 1.0) < 1e-3);
        assert!(a.sigma > 0.0);
        assert!(fit_fixed_exponent(&[FitPoint::new(1e-3, 1e-6, Some(0.0))], 2.0).is_err());
        assert!(fit_fixed_exponent(&[FitPoint::new(1e-3, 0.0, None)], 2.0).is_err());
        assert!(fit_fixed_exponent(&[], 2.0).is_err());
    }

    #[test]
    fn power_law_needs_two_points() {
        assert!(fit_power_law(&[FitPoint::new(1e-3, 1e-3, None)]).is_err());
        let pts: Vec<FitPoint> = [1e-3, 3e-3, 1e-2].iter().map(|&p| FitPoint::new(p, 7.0 * p.powf(2.5), None)).collect();
        let (a, k, _) = fit_power_law(&pts).unwrap();
        assert!(rel(a.value, 7.0) < 1e-9 && rel(k.value, 2.5) < 1e-12);
    }

    #[test]
    fn c4c6_recovers_synthetic_constants() {
        let (a, b) = (0.77, 39.6);
        let levels: Vec<(usize, Vec<FitPoint>)> = (1..=3)
            .map(|l| {
                let f = fibonacci(l) as f64;
                (l, [1e-3, 3e-3, 1e-2].iter().map(|&p| FitPoint::new(p, a * (b * p).powf(f), None)).collect())
            })
            .collect();
        let (c, _) = fit_c4c6(&levels).unwrap();
        assert!(rel(c.a.value, a) < 1e-8 && rel(c.b.value, b) < 1e-8);
        assert!(fit_c4c6(&levels[..1]).is_err());
        let (c1, _) = fit_c4c6_level(2, &levels[1].1).unwrap();
        assert!(rel(c1.value, a * b * b) < 1e-9);
    }

    #[test]
    fn level5_prediction() {
        let p = 0.77 * (39.6e-3f64).powi(8);
        assert!(rel(p, 4.7e-12) < 0.02);
    }

    fn synthetic_critical(t: &CriticalFit) -> Vec<CriticalPoint> {
        let mut v = Vec::new();
        for d in [5u32, 7, 9, 11, 13] {
            for i in 0..9 {
                let p = t.p_th.value * (0.8 + 0.05 * i as f64);
                v.push(CriticalPoint { d, p, p_l: t.eval(d, p) });
            }
        }
        v
    }

    #[test]
    fn critical_fit_recovers_table_values() {
        let c = FitConstants::bundled();
        for g in GammaModel::ALL {
            let t = c.model(g).unwrap().surface_critical;
            let (f, s) = fit_critical_exponent(&synthetic_critical(&t)).unwrap();
            assert!(rel(f.p_th.value, t.p_th.value) < 1e-4, "{g:?} {f:?}");
            assert!(rel(f.mu.value, t.mu.value) < 0.05, "{g:?} {f:?}");
            assert!(s.rms_residual < 1e-8);
        }
    }

    #[test]
    fn critical_fit_with_linear_curve_is_exact() {
        let t = CriticalFit {
            p_th: Estimate::exact(4e-3),
            mu: Estimate::exact(1.2),
            c: Estimate::exact(0.1),
            d: Estimate::exact(30.0),
            e: Estimate::exact(0.0),
        };
        let (f, s) = fit_critical_exponent(&synthetic_critical(&t)).unwrap();
        assert!(s.rms_residual < 1e-10);
        assert!(f.e.value.abs() < 1e-3 && rel(f.p_th.value, 4e-3) < 1e-6);
        let few: Vec<CriticalPoint> = synthetic_critical(&t).into_iter().filter(|q| q.d < 9).collect();
        assert!(fit_critical_exponent(&few).is_err());
    }

    #[test]
    fn table_thresholds() {
        let c = FitConstants::bundled();
        let t = thresholds(c.model(GammaModel::Equal).unwrap());
        assert!(rel(t.c4c6, 2.53e-2) < 0.01);
        assert!(rel(t.steane, 2.98e-4) < 0.01);
        assert!(rel(t.c4_steane, 1.4e-3) < 0.02);
        assert!(rel(t.surface, 3.148e-3) < 1e-9);
    }

    #[test]
    fn s4_thresholds() {
        // Other idle models: 2.7%, 0.064%, 0.19% and 2.5%, 0.043%, 0.17%.
        let c = FitConstants::bundled();
        for (g, c4c6, steane, c4s, surf) in
            [(GammaModel::Tenth, 2.7e-2, 0.064e-2, 0.19e-2, 0.50e-2), (GammaModel::Half, 2.5e-2, 0.043e-2, 0.17e-2, 0.40e-2)]
        {
            let t = thresholds(c.model(g).unwrap());
            // 1/38.1 is 2.62%, printed as 2.5%.
            assert!(rel(t.c4c6, c4c6) < 0.05, "{g:?}");
            assert!(rel(t.steane, steane) < 0.03, "{g:?}");
            assert!(rel(t.c4_steane, c4s) < 0.03, "{g:?}");
            assert!(rel(t.surface, surf) < 0.03, "{g:?}");
        }
    }

    fn sample(code: &str, r_next: Option<u8>, p: f64, p_l: f64) -> RateSample {
        RateSample { code: code.into(), r_next, p, gamma: p, p_l, sigma_log10: None }
    }

    #[test]
    fn records_are_grouped_and_merged() {
        let base = FitConstants::bundled();
        let mut v = Vec::new();
        for p in [1e-4, 3e-4] {
            v.push(sample("q3", Some(4), p, 5.0 * p * p));
            v.push(sample("steane:1", None, p, 7.0 * p * p));
            v.push(sample("c4", None, p, 0.5 * 40.0 * p));
            v.push(sample("c6:2", None, p, 0.5 * (40.0 * p).powi(2)));
        }
        v.push(sample("q5", None, 1e-4, 0.0));
        let rep = fit_records(&v, &base, true).unwrap();
        assert_eq!(rep.gamma, GammaModel::Equal);
        assert_eq!(rep.skipped, 1);
        assert!(rel(rep.constants.hamming(3, 4).unwrap(), 5.0) < 1e-9);
        assert_eq!(rep.constants.hamming(3, 3).unwrap(), 54.21e4);
        assert!(rel(rep.constants.steane.a1.value, 7.0) < 1e-9);
        assert!(rel(rep.constants.c4c6.a.value, 0.5) < 1e-9 && rel(rep.constants.c4c6.b.value, 40.0) < 1e-9);
        let k = rep.fits.iter().find(|f| f.name == "hamming:3:4").unwrap().values[2].1.value;
        assert!(rel(k, 2.0) < 1e-9);
        // A free exponent needs two points.
        assert!(fit_records(&v[..1], &base, true).is_err());
        assert!(fit_records(&v[..1], &base, false).is_ok());
        let mut mixed = v.clone();
        mixed[0].gamma = mixed[0].p / 2.0;
        assert!(fit_records(&mixed, &base, false).is_err());
    }

    proptest! {
        #[test]
        fn fits_ignore_point_order(a in 0.1f64..1e6, k in 1u32..5, perm in 0u64..16) {
            let mut pts: Vec<FitPoint> = [1e-4, 3e-4, 1e-3, 3e-3]
                .iter()
                .enumerate()
                .map(|(i, &p)| FitPoint::new(p, a * p.powi(k as i32) * (1.0 + 0.1 * i as f64), Some(0.05 + 0.01 * i as f64)))
                .collect();
            let (x, _) = fit_fixed_exponent(&pts, k as f64).unwrap();
            pts.rotate_left((perm % 4) as usize);
            pts.swap(0, (perm as usize / 4) % 4);
            let (y, _) = fit_fixed_exponent(&pts, k as f64).unwrap();
            prop_assert!(rel(x.value, y.value) < 1e-12);
        }

        #[test]
        fn fixed_exponent_fit_is_exact_on_its_family(a in 1e-3f64..1e9, k in 1u32..9) {
            let pts: Vec<FitPoint> = [1e-5, 1e-4, 1e-3].iter().map(|&p| FitPoint::new(p, a * p.powi(k as i32), None)).collect();
            let (x, s) = fit_fixed_exponent(&pts, k as f64).unwrap();
            prop_assert!(rel(x.value, a) < 1e-9);
            prop_assert!(s.rms_residual < 1e-9);
        }
    }
}

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::cauchy::simulate_cauchy_to;
use super::path::{
    exp_functional, lamperti_pssmp, ClockSample, PathGrid, PathSampler, SegmentKind,
};
use super::rng::{path_rng, Lane};
use super::{SimConfig, SimTarget};
use crate::error::{Error, Result};
use crate::models::{Family, LevyModel};
use crate::rate::{fmt17, invert_L, profile, rate_I};
use crate::stats::{
    ks_p_value, ks_statistic, ks_two_sample, normal_cdf, weighted_line_fit, MeanEstimate,
};

// ---------------------------------------------------------------------------
// Per-path building blocks

/// A path long enough that A(horizon) ≥ `need`, doubling the horizon as needed.
fn path_reaching(
    model: &LevyModel,
    cfg: &SimConfig,
    path_id: u64,
    need: f64,
) -> Result<PathSampler> {
    let mut s = PathSampler::new(model, cfg, path_id)?;
    let mut h = cfg.clock_horizon(model, need);
    for _ in 0..=cfg.max_doublings {
        s.extend_to(h);
        if exp_functional(s.grid(), cfg.alpha)?.total() >= need {
            return Ok(s);
        }
        h *= 2.0;
    }
    Err(Error::HorizonExceeded {
        t: need,
        horizon: s.horizon(),
    })
}

/// Clock samples τ(t) and T(t·a^α) of one path.
pub fn clock_samples(
    model: &LevyModel,
    cfg: &SimConfig,
    path_id: u64,
    t_list: &[f64],
) -> Result<Vec<ClockSample>> {
    let t_max = t_list.iter().copied().fold(0.0, f64::max);
    let grid = path_reaching(model, cfg, path_id, t_max)?.into_grid();
    let x = lamperti_pssmp(&grid, cfg.start, cfg.alpha)?;
    let scale = cfg.start.powf(cfg.alpha);
    t_list
        .iter()
        .map(|&t| {
            Ok(ClockSample {
                t,
                tau: x.exp_functional().clock_tau(t)?,
                t_clock: x.clock(t * scale)?,
                path_id,
            })
        })
        .collect()
}

/// T^{(X)}(t) for X started at cfg.start, for each t.
fn clock_values(target: &SimTarget, cfg: &SimConfig, path_id: u64, ts: &[f64]) -> Result<Vec<f64>> {
    match *target {
        SimTarget::Levy(model) => {
            let shrink = cfg.start.powf(-cfg.alpha);
            let t_max = ts.iter().copied().fold(0.0, f64::max) * shrink;
            let grid = path_reaching(&model, cfg, path_id, t_max)?.into_grid();
            let fx = exp_functional(&grid, cfg.alpha)?;
            ts.iter().map(|&t| fx.clock_tau(t * shrink)).collect()
        }
        SimTarget::CauchyModulus { dim } => {
            let p = simulate_cauchy_to(dim, cfg, path_id, ts)?;
            ts.iter().map(|&t| p.clock_at(t)).collect()
        }
    }
}

/// Evaluate `f` for every path id, in path order.
fn per_path<T: Send, F>(cfg: &SimConfig, offset: u64, f: F) -> Result<Vec<T>>
where
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    cfg.exec
        .map(cfg.n_paths, |i| f(offset + i as u64))
        .into_iter()
        .collect()
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

fn describe(target: &SimTarget) -> String {
    match target {
        SimTarget::Levy(m) => m.to_string(),
        SimTarget::CauchyModulus { dim } => format!("cauchy-modulus(d={dim})"),
    }
}

// ---------------------------------------------------------------------------
// Records

/// One row of an estimator record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorRow {
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub reference: f64,
}

/// Line-oriented estimator output: header lines, then a `t,estimate,stderr,reference` table.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRecord {
    pub estimator: String,
    pub model: String,
    pub config: SimConfig,
    pub rows: Vec<EstimatorRow>,
    pub notes: Vec<String>,
}

impl EstimatorRecord {
    /// z-score of each row against its reference.
    pub fn z_scores(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| (r.estimate - r.reference) / r.stderr)
            .collect()
    }
}

impl EstimatorRecord {
    /// The `key: value` header lines (estimator, model, configuration, notes).
    pub fn header(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "estimator: {}\nmodel: {}\nseed: {}\nn_paths: {}\nstep: {}\nhorizon: {}\nalpha: {}\nstart: {}\n",
            self.estimator, self.model, c.seed, c.n_paths, c.step, c.horizon, c.alpha, c.start
        );
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }

    /// The `t,estimate,stderr,reference` table.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("t,estimate,stderr,reference\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(r.t),
                fmt17(r.estimate),
                fmt17(r.stderr),
                fmt17(r.reference)
            ));
        }
        out
    }
}

impl fmt::Display for EstimatorRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.header(), self.table_csv())
    }
}

// ---------------------------------------------------------------------------
// Law of large numbers

/// Ensemble mean and standard error of T(t)/log t for each t, with
/// reference 1/ψ'(0).
pub fn estimate_lln(
    target: &SimTarget,
    cfg: &SimConfig,
    t_list: &[f64],
) -> Result<EstimatorRecord> {
    cfg.validate()?;
    if t_list.is_empty() || t_list.iter().any(|t| !(*t > 1.0)) {
        return Err(Error::Domain("lln requires every t > 1".into()));
    }
    let reference = 1.0 / target.model()?.mean();
    let rows = per_path(cfg, 0, |id| clock_values(target, cfg, id, t_list))?;
    let mut notes = vec!["estimate = mean of T(t)/log t; reference = 1/psi'(0)".to_string()];
    for &t in t_list {
        if let Some(e) = exact_clock_mean(target, cfg, t) {
            notes.push(format!(
                "exact finite-t mean of T(t)/log t at t = {t}: {}",
                fmt17(e / t.ln())
            ));
        }
    }
    let rows = t_list
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let ratios: Vec<f64> = column(&rows, k).iter().map(|v| v / t.ln()).collect();
            let m = MeanEstimate::of(&ratios);
            EstimatorRow {
                t,
                estimate: m.mean,
                stderr: m.stderr,
                reference,
            }
        })
        .collect();
    Ok(EstimatorRecord {
        estimator: "lln".into(),
        model: describe(target),
        config: *cfg,
        rows,
        notes,
    })
}

/// E₁(x) = ∫_x^∞ e^{−u}/u du: power series for x ≤ 1, continued fraction above.
fn exp_integral_e1(x: f64) -> f64 {
    if x > 1.0 {
        let mut b = x + 1.0;
        let mut c = 1e300;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        return h * (-x).exp();
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let k = k as f64;
        term *= -x / k;
        let add = -term / k;
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    -0.577_215_664_901_532_9 - x.ln() + sum
}

/// Exact E T(t) at finite t for X started at cfg.start, where known.
///
/// Brownian ν = 1 with α = 1: X is a squared Bessel process of dimension 4,
/// E X_s^{−1} = (1 − e^{−1/(2s)}) from 1, so E T(u) = ½[(1 − e^{−ε})/ε + E₁(ε)]
/// with ε = 1/(2u). Cauchy modulus in ℝ³: E |X_s|^{−1} = (2/π) arctan(1/s)
/// from 1, so E T(u) = (2/π)[u arctan(1/u) + ½ log(1 + u²)]. In both cases
/// u = t/a.
pub fn exact_clock_mean(target: &SimTarget, cfg: &SimConfig, t: f64) -> Option<f64> {
    if !(t > 0.0) {
        return None;
    }
    let u = t / cfg.start;
    match *target {
        SimTarget::Levy(m) => match m.equivalent_family()? {
            Family::BrownianDrift { nu } if nu == 1.0 && cfg.alpha == 1.0 => {
                let eps = 0.5 / u;
                Some(0.5 * (-(-eps).exp_m1() / eps + exp_integral_e1(eps)))
            }
            _ => None,
        },
        SimTarget::CauchyModulus { dim: 3 } => {
            Some(std::f64::consts::FRAC_2_PI * (u * (1.0 / u).atan() + u.hypot(1.0).ln()))
        }
        SimTarget::CauchyModulus { .. } => None,
    }
}

// ---------------------------------------------------------------------------
// Central limit probe

#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub t: f64,
    pub n: usize,
    /// KS distance between the standardized sample and N(0, target_variance).
    pub ks: f64,
    pub p_value: f64,
    /// ψ''(0)/ψ'(0)³.
    pub target_variance: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
}

impl fmt::Display for CltReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "estimator: clt")?;
        writeln!(f, "t: {}", self.t)?;
        writeln!(f, "n: {}", self.n)?;
        writeln!(f, "target_variance: {}", fmt17(self.target_variance))?;
        writeln!(f, "sample_mean: {}", fmt17(self.sample_mean))?;
        writeln!(f, "sample_variance: {}", fmt17(self.sample_variance))?;
        writeln!(f, "ks: {}", fmt17(self.ks))?;
        write!(f, "ks_p_value: {}", fmt17(self.p_value))
    }
}

/// KS distance of √(log t)(T(t)/log t − 1/ψ'(0)) to N(0, ψ''(0)/ψ'(0)³).
pub fn estimate_clt(target: &SimTarget, cfg: &SimConfig, t: f64) -> Result<CltReport> {
    cfg.validate()?;
    if !(t > 1.0) {
        return Err(Error::Domain("clt requires t > 1".into()));
    }
    let model = target.model()?;
    let (d1, d2) = model.psi_derivs(0.0)?;
    if !d2.is_finite() {
        return Err(Error::Assumption("clt requires psi''(0) < infinity".into()));
    }
    let target_variance = d2 / (d1 * d1 * d1);
    let lt = t.ln();
    let vals = per_path(cfg, 0, |id| {
        clock_values(target, cfg, id, &[t]).map(|v| v[0])
    })?;
    let z: Vec<f64> = vals
        .iter()
        .map(|v| lt.sqrt() * (v / lt - 1.0 / d1))
        .collect();
    let m = MeanEstimate::of(&z);
    let ks = if target_variance > 0.0 {
        ks_statistic(&z, |x| normal_cdf(x, target_variance))
    } else {
        // Point mass at 0; values within 1e-9 count as 0.
        let n = z.len() as f64;
        let below = z.iter().filter(|v| **v < -1e-9).count() as f64 / n;
        let above = z.iter().filter(|v| **v > 1e-9).count() as f64 / n;
        below.max(above)
    };
    Ok(CltReport {
        t,
        n: z.len(),
        ks,
        p_value: ks_p_value(ks, z.len() as f64),
        target_variance,
        sample_mean: m.mean,
        sample_variance: if z.len() > 1 { m.variance() } else { 0.0 },
    })
}

// ---------------------------------------------------------------------------
// Large-deviation slope

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdpRow {
    pub t: f64,
    pub hits: usize,
    pub n: usize,
    pub p_hat: f64,
    /// −log p̂ (∞ when there are no hits).
    pub neg_log_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdpSlopeReport {
    pub x: f64,
    pub eps: f64,
    pub rows: Vec<LdpRow>,
    /// Fitted slope of −log p̂ against log t (∞ when no t has hits).
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    /// I(x), or +∞ outside the closure of Δ.
    pub reference: f64,
    pub warnings: Vec<String>,
}

impl LdpSlopeReport {
    /// The `key: value` summary lines.
    pub fn header(&self) -> String {
        let mut out = format!(
            "estimator: ldp-slope\nx: {}\neps: {}\nslope: {}\nslope_stderr: {}\nintercept: {}\nreference_I: {}\nnote: loose pre-asymptotic consistency check\n",
            self.x,
            self.eps,
            fmt17(self.slope),
            fmt17(self.slope_stderr),
            fmt17(self.intercept),
            fmt17(self.reference)
        );
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }

    /// The `t,hits,n,p_hat,neg_log_p` table.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("t,hits,n,p_hat,neg_log_p\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt17(r.t),
                r.hits,
                r.n,
                fmt17(r.p_hat),
                fmt17(r.neg_log_p)
            ));
        }
        out
    }
}

impl fmt::Display for LdpSlopeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.header(), self.table_csv())
    }
}

/// Slope of −log P(T(t)/log t ∈ [x−ε, x+ε]) against log t.
///
/// `eps` defaults to 0.1·|x − τ_e|. Times with no hits are excluded from
/// the weighted fit and reported as warnings.
pub fn estimate_ldp_slope(
    target: &SimTarget,
    cfg: &SimConfig,
    x: f64,
    eps: Option<f64>,
    t_list: &[f64],
) -> Result<LdpSlopeReport> {
    cfg.validate()?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ldp slope requires x > 0, got {x}")));
    }
    if t_list.len() < 3 || !t_list.windows(2).all(|w| w[0] < w[1]) || t_list[0] <= 1.0 {
        return Err(Error::Domain(
            "ldp slope requires at least 3 increasing t > 1".into(),
        ));
    }
    let model = target.model()?;
    let tau_e = 1.0 / model.mean();
    let eps = eps.unwrap_or(0.1 * (x - tau_e).abs());
    if !(eps > 0.0) {
        return Err(Error::Domain(
            "window half-width eps must be > 0 (x = tau_e needs an explicit eps)".into(),
        ));
    }
    let reference = rate_I(&model, x).unwrap_or(f64::INFINITY);
    let vals = per_path(cfg, 0, |id| clock_values(target, cfg, id, t_list))?;
    let n = cfg.n_paths;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let (mut lx, mut ly, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &t) in t_list.iter().enumerate() {
        let lt = t.ln();
        let hits = vals.iter().filter(|v| (v[k] / lt - x).abs() <= eps).count();
        let p = hits as f64 / n as f64;
        rows.push(LdpRow {
            t,
            hits,
            n,
            p_hat: p,
            neg_log_p: -p.ln(),
        });
        if hits == 0 {
            warnings.push(format!("no hits at t = {t}; excluded from the fit"));
        } else if hits < n {
            lx.push(lt);
            ly.push(-p.ln());
            w.push(n as f64 * p / (1.0 - p));
        } else {
            lx.push(lt);
            ly.push(0.0);
            w.push(n as f64);
        }
    }
    let fit = weighted_line_fit(&lx, &ly, &w);
    let (slope, slope_stderr, intercept) = match fit {
        Some(f) => (f.slope, f.slope_stderr, f.intercept),
        None if lx.is_empty() => (f64::INFINITY, f64::NAN, f64::NAN),
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    Ok(LdpSlopeReport {
        x,
        eps,
        rows,
        slope,
        slope_stderr,
        intercept,
        reference,
        warnings,
    })
}

// ---------------------------------------------------------------------------
// log A_t / t

/// Mean and standard error of log A_t / t, with reference ψ'(0).
#[allow(non_snake_case)]
pub fn estimate_logA_rate(model: &LevyModel, cfg: &SimConfig, t: f64) -> Result<EstimatorRecord> {
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(Error::Domain("logA rate requires t > 0".into()));
    }
    let vals = per_path(cfg, 0, |id| {
        let mut s = PathSampler::new(model, cfg, id)?;
        s.extend_to(t);
        let fx = exp_functional(s.grid(), cfg.alpha)?;
        Ok(fx.value(t).ln() / t)
    })?;
    let m = MeanEstimate::of(&vals);
    Ok(EstimatorRecord {
        estimator: "logA-rate".into(),
        model: model.to_string(),
        config: *cfg,
        rows: vec![EstimatorRow {
            t,
            estimate: m.mean,
            stderr: m.stderr,
            reference: model.mean(),
        }],
        notes: vec!["estimate = mean of log(A_t)/t; reference = psi'(0)".into()],
    })
}

// ---------------------------------------------------------------------------
// First passage

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPassageReport {
    pub theta: f64,
    pub t: f64,
    /// (1/log t)·log E exp(θ τ(t)).
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// log E exp(θ τ̂(1)).
    pub rhs: f64,
    pub rhs_stderr: f64,
    /// L(θ) from ψ-inversion.
    pub analytic_l: f64,
    pub abs_diff: f64,
}

impl fmt::Display for FirstPassageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "estimator: first-passage")?;
        writeln!(f, "theta: {}", self.theta)?;
        writeln!(f, "t: {}", self.t)?;
        writeln!(f, "lhs: {}", fmt17(self.lhs))?;
        writeln!(f, "lhs_stderr: {}", fmt17(self.lhs_stderr))?;
        writeln!(f, "rhs: {}", fmt17(self.rhs))?;
        writeln!(f, "rhs_stderr: {}", fmt17(self.rhs_stderr))?;
        writeln!(f, "analytic_L: {}", fmt17(self.analytic_l))?;
        write!(f, "abs_diff: {}", fmt17(self.abs_diff))
    }
}

const BRIDGE_DEPTH: u32 = 24;

/// Brownian bridge crossing search for a fixed level and variance rate.
struct Bridge {
    level: f64,
    var: f64,
}

impl Bridge {
    /// Earliest crossing of the level in (t0, t1] by a bridge from x0 to x1,
    /// by recursive midpoint sampling.
    fn crossing(
        &self,
        (t0, x0): (f64, f64),
        (t1, x1): (f64, f64),
        depth: u32,
        rng: &mut ChaCha8Rng,
    ) -> Option<f64> {
        let (level, var) = (self.level, self.var);
        let dt = t1 - t0;
        if x1 < level {
            let p = (-2.0 * (level - x0) * (level - x1) / (var * dt)).exp();
            if p < 1e-16 {
                return None;
            }
            if depth == 0 {
                return (rng.random::<f64>() < p).then_some(t0 + 0.5 * dt);
            }
        } else if depth == 0 {
            return Some(t0 + 0.5 * dt);
        }
        let tm = t0 + 0.5 * dt;
        let z: f64 = StandardNormal.sample(rng);
        let xm = 0.5 * (x0 + x1) + (0.25 * var * dt).sqrt() * z;
        if xm >= level {
            return self
                .crossing((t0, x0), (tm, xm), depth - 1, rng)
                .or(Some(tm));
        }
        self.crossing((t0, x0), (tm, xm), depth - 1, rng)
            .or_else(|| self.crossing((tm, xm), (t1, x1), depth - 1, rng))
    }
}

/// First passage of ξ above `level`: exact on drift segments, bridge-refined
/// on Gaussian segments (σ² = 4) using the bridge lane.
fn first_passage(grid: &PathGrid, level: f64, rng: &mut ChaCha8Rng) -> Option<f64> {
    let bridge = Bridge { level, var: 4.0 };
    for i in 0..grid.n_segments() {
        let (t0, x0, t1) = (grid.times[i], grid.xi[i], grid.times[i + 1]);
        let x1 = grid.left_limit(i + 1);
        if x0 > level {
            return Some(t0);
        }
        match grid.kinds[i] {
            SegmentKind::LinearDrift { slope } => {
                if x1 > level && slope > 0.0 {
                    return Some(t0 + (level - x0) / slope);
                }
            }
            SegmentKind::GaussianIncrement => {
                if let Some(c) = bridge.crossing((t0, x0), (t1, x1), BRIDGE_DEPTH, rng) {
                    return Some(c);
                }
            }
        }
        if grid.xi[i + 1] > level {
            return Some(t1);
        }
    }
    None
}

/// Compare (1/log t)·log E e^{θτ(t)} with log E e^{θτ̂(1)} and L(θ).
pub fn first_passage_check(
    model: &LevyModel,
    cfg: &SimConfig,
    theta: f64,
    t: f64,
) -> Result<FirstPassageReport> {
    cfg.validate()?;
    match model.equivalent_family() {
        Some(Family::BrownianDrift { .. } | Family::SawTooth { .. }) => {}
        _ => {
            return Err(Error::Capability(format!(
            "first-passage check needs a spectrally negative family (brownian or sawtooth), got {}",
            model.kind()
        )))
        }
    }
    if !(theta <= 0.0) {
        return Err(Error::Domain(format!(
            "first-passage check requires theta <= 0, got {theta}"
        )));
    }
    if !(t > 1.0) {
        return Err(Error::Domain("first-passage check requires t > 1".into()));
    }
    let pairs = per_path(cfg, 0, |id| {
        let mut s = path_reaching(model, cfg, id, t)?;
        let tau = exp_functional(s.grid(), cfg.alpha)?.clock_tau(t)?;
        let mut h = s.horizon();
        let mut bridge = path_rng(cfg.seed, Lane::Bridge, id);
        for _ in 0..=cfg.max_doublings {
            // Bridge draws restart on each attempt so results do not depend on retries.
            if let Some(hat) = first_passage(s.grid(), 1.0, &mut bridge) {
                return Ok(vec![(theta * tau).exp(), (theta * hat).exp()]);
            }
            bridge = path_rng(cfg.seed, Lane::Bridge, id);
            h *= 2.0;
            s.extend_to(h);
        }
        Err(Error::HorizonExceeded {
            t: 1.0,
            horizon: s.horizon(),
        })
    })?;
    let lt = t.ln();
    let a = MeanEstimate::of(&column(&pairs, 0));
    let b = MeanEstimate::of(&column(&pairs, 1));
    let lhs = a.mean.ln() / lt;
    let rhs = b.mean.ln();
    let analytic_l = invert_L(model, theta)?;
    Ok(FirstPassageReport {
        theta,
        t,
        lhs,
        lhs_stderr: a.stderr / a.mean / lt,
        rhs,
        rhs_stderr: b.stderr / b.mean,
        analytic_l,
        abs_diff: (lhs - rhs).abs(),
    })
}

// ---------------------------------------------------------------------------
// Tilted identity

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub z: f64,
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "estimator: tilted-identity")?;
        writeln!(f, "lhs: {}", fmt17(self.lhs))?;
        writeln!(f, "lhs_stderr: {}", fmt17(self.lhs_stderr))?;
        writeln!(f, "rhs: {}", fmt17(self.rhs))?;
        writeln!(f, "rhs_stderr: {}", fmt17(self.rhs_stderr))?;
        write!(f, "z: {}", fmt17(self.z))
    }
}

/// E_a exp(−ψ(m) T(t)) under the model against
/// a^m t^{−m/α} E^{(m)}_{a t^{−1/α}} X₁^{−m} under the Esscher-tilted model.
///
/// The two sides use disjoint path ids (0..n and n..2n).
pub fn tilted_identity_check(
    model: &LevyModel,
    m: f64,
    t: f64,
    a: f64,
    cfg: &SimConfig,
) -> Result<IdentityReport> {
    cfg.validate()?;
    if !(t > 0.0 && a > 0.0) {
        return Err(Error::Domain(
            "tilted identity requires t > 0 and a > 0".into(),
        ));
    }
    let prof = profile(model)?;
    if !(m > prof.m0 && m < model.m_plus()) {
        return Err(Error::Domain(format!(
            "m = {m} outside (m0, m+) = ({}, {})",
            prof.m0,
            model.m_plus()
        )));
    }
    let alpha = cfg.alpha;
    let psi_m = model.psi(m)?;
    let lhs_vals = per_path(cfg, 0, |id| {
        let need = t * a.powf(-alpha);
        let grid = path_reaching(model, cfg, id, need)?.into_grid();
        let clock = exp_functional(&grid, alpha)?.clock_tau(need)?;
        let w = (-psi_m * clock).exp();
        if !w.is_finite() {
            return Err(Error::Overflow(format!(
                "exp(-psi(m) T(t)) overflows (psi(m) = {psi_m}, T = {clock}); reduce t"
            )));
        }
        Ok(w)
    })?;
    let tilted = model.esscher(m)?;
    let a1 = a * t.powf(-1.0 / alpha);
    let front = a.powf(m) * t.powf(-m / alpha);
    let rhs_vals = per_path(cfg, cfg.n_paths as u64, |id| {
        let need = a1.powf(-alpha);
        let grid = path_reaching(&tilted, cfg, id, need)?.into_grid();
        let u = exp_functional(&grid, alpha)?.clock_tau(need)?;
        let x1 = a1 * grid.xi_at(u).exp();
        Ok(front * x1.powf(-m))
    })?;
    let l = MeanEstimate::of(&lhs_vals);
    let r = MeanEstimate::of(&rhs_vals);
    let se = (l.stderr * l.stderr + r.stderr * r.stderr).sqrt();
    let diff = l.mean - r.mean;
    let z = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok(IdentityReport {
        lhs: l.mean,
        lhs_stderr: l.stderr,
        rhs: r.mean,
        rhs_stderr: r.stderr,
        z,
    })
}

// ---------------------------------------------------------------------------
// Scaling

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReport {
    pub ks: f64,
    pub p_value: f64,
}

/// Two-sample KS check of self-similarity with factor `b` at time `t`.
///
/// Grid families: T(t·b^{−α}) started at a against T(t) started at b·a.
/// Cauchy modulus: b·X_{t/b} started at a against X_t started at b·a.
/// The samples use disjoint path ids.
pub fn scaling_check(target: &SimTarget, cfg: &SimConfig, b: f64, t: f64) -> Result<ScalingReport> {
    cfg.validate()?;
    if !(b > 0.0 && t > 0.0) {
        return Err(Error::Domain(
            "scaling check requires b > 0 and t > 0".into(),
        ));
    }
    let big = SimConfig {
        start: b * cfg.start,
        ..*cfg
    };
    let (s1, s2) = match *target {
        SimTarget::Levy(_) => {
            let s1 = per_path(cfg, 0, |id| {
                clock_values(target, cfg, id, &[t * b.powf(-cfg.alpha)]).map(|v| v[0])
            })?;
            let s2 = per_path(&big, cfg.n_paths as u64, |id| {
                clock_values(target, &big, id, &[t]).map(|v| v[0])
            })?;
            (s1, s2)
        }
        SimTarget::CauchyModulus { dim } => {
            let s1 = per_path(cfg, 0, |id| {
                let p = simulate_cauchy_to(dim, cfg, id, &[t / b])?;
                Ok(b * p.x_at(t / b)?)
            })?;
            let s2 = per_path(&big, cfg.n_paths as u64, |id| {
                let p = simulate_cauchy_to(dim, &big, id, &[t])?;
                p.x_at(t)
            })?;
            (s1, s2)
        }
    };
    let ks = ks_two_sample(&s1, &s2);
    let (n1, n2) = (s1.len() as f64, s2.len() as f64);
    Ok(ScalingReport {
        ks,
        p_value: ks_p_value(ks, n1 * n2 / (n1 + n2)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn deterministic_lln_is_exact() {
        let m = LevyModel::cp_plus(1.0, 0.0, 1.0).unwrap();
        let cfg = SimConfig::new(1, 3);
        let rec = estimate_lln(&SimTarget::Levy(m), &cfg, &[1e3, 1e6]).unwrap();
        for r in &rec.rows {
            assert_abs_diff_eq!(r.estimate, (1.0 + r.t).ln() / r.t.ln(), epsilon = 1e-12);
        }
        assert!(rec.to_string().contains("t,estimate,stderr,reference"));
    }

    #[test]
    fn clt_targets() {
        let b = LevyModel::brownian(1.0).unwrap();
        let r = estimate_clt(&SimTarget::Levy(b), &SimConfig::new(1, 200), 1e3).unwrap();
        assert_abs_diff_eq!(r.target_variance, 0.5, epsilon = 1e-15);
        let det = LevyModel::cp_plus(1.0, 0.0, 1.0).unwrap();
        let r = estimate_clt(&SimTarget::Levy(det), &SimConfig::new(1, 50), 1e12).unwrap();
        assert_eq!(r.target_variance, 0.0);
        assert_eq!(r.ks, 0.0);
        let s = LevyModel::sawtooth(1.0, 3.0).unwrap();
        let r = estimate_clt(&SimTarget::Levy(s), &SimConfig::new(1, 10), 1e3).unwrap();
        let (d1, d2) = s.psi_derivs(0.0).unwrap();
        assert_abs_diff_eq!(d1, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.target_variance, d2 / d1.powi(3), epsilon = 1e-15);
    }

    #[test]
    fn exact_clock_means_approach_the_limit() {
        let b = SimTarget::Levy(LevyModel::brownian(1.0).unwrap());
        let c = SimTarget::CauchyModulus { dim: 3 };
        let cfg = SimConfig::new(0, 1);
        let t = 1e12f64;
        let lb = exact_clock_mean(&b, &cfg, t).unwrap();
        assert_abs_diff_eq!(
            lb,
            0.5 * (t.ln() + 2f64.ln() + 1.0 - 0.577_215_664_901_532_9),
            epsilon = 1e-9
        );
        let lc = exact_clock_mean(&c, &cfg, t).unwrap();
        assert_abs_diff_eq!(
            lc,
            std::f64::consts::FRAC_2_PI * (1.0 + t.ln()),
            epsilon = 1e-9
        );
        // Small-t behaviour: T(t) ≈ t while X stays near 1.
        assert_abs_diff_eq!(
            exact_clock_mean(&b, &cfg, 1e-4).unwrap(),
            1e-4,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(
            exact_clock_mean(&c, &cfg, 1e-4).unwrap(),
            1e-4,
            epsilon = 1e-7
        );
    }

    #[test]
    fn e1_branches_agree() {
        assert_abs_diff_eq!(
            exp_integral_e1(1.0),
            0.219_383_934_395_520_3,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            exp_integral_e1(1.0 + 1e-12),
            0.219_383_934_395_520_3,
            epsilon = 1e-11
        );
        assert_abs_diff_eq!(
            exp_integral_e1(2.0),
            0.048_900_510_708_061_12,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            exp_integral_e1(0.1),
            1.822_923_958_419_390_7,
            epsilon = 1e-14
        );
    }

    #[test]
    fn zero_theta_first_passage() {
        let m = LevyModel::brownian(1.0).unwrap();
        let r = first_passage_check(&m, &SimConfig::new(2, 20), 0.0, 1e3).unwrap();
        assert_eq!((r.lhs, r.rhs, r.analytic_l), (0.0, 0.0, 0.0));
    }

    #[test]
    fn first_passage_rejects_spectrally_positive() {
        let m = LevyModel::cp_plus(1.0, 2.0, 1.0).unwrap();
        assert!(matches!(
            first_passage_check(&m, &SimConfig::new(2, 5), -1.0, 1e3),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn zero_tilt_identity_is_trivial() {
        let m = LevyModel::sawtooth(1.0, 3.0).unwrap();
        let r = tilted_identity_check(&m, 0.0, 2.0, 1.0, &SimConfig::new(4, 50)).unwrap();
        assert_eq!((r.lhs, r.rhs, r.z), (1.0, 1.0, 0.0));
    }

    #[test]
    fn sawtooth_below_support_has_no_hits() {
        let m = LevyModel::sawtooth(1.0, 3.0).unwrap();
        let r = estimate_ldp_slope(
            &SimTarget::Levy(m),
            &SimConfig::new(3, 300),
            0.95,
            Some(0.04),
            &[1e3, 1e4, 1e5],
        )
        .unwrap();
        assert!(r.rows.iter().all(|row| row.hits == 0));
        assert_eq!(r.slope, f64::INFINITY);
        assert_eq!(r.warnings.len(), 3);
    }

    #[test]
    fn bridge_crossing_is_certain_when_endpoint_above() {
        let mut rng = path_rng(1, Lane::Bridge, 0);
        let b = Bridge {
            level: 1.0,
            var: 4.0,
        };
        let c = b
            .crossing((0.0, 0.0), (1.0, 2.0), BRIDGE_DEPTH, &mut rng)
            .unwrap();
        assert!(c > 0.0 && c <= 1.0);
        assert_eq!(
            b.crossing((0.0, -50.0), (0.01, -50.0), BRIDGE_DEPTH, &mut rng),
            None
        );
    }
}

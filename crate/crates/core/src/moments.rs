//! Moments of the exponential functional I_∞ = ∫₀^∞ e^{−ζ_s} ds.

use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::models::{Family, LevyModel};
use crate::numerics::special::ln_gamma;
use crate::rate::{fmt17, profile};
use crate::sim::{exp_functional, PathSampler, SimConfig};
use crate::stats::MeanEstimate;

/// Finiteness of E I_∞^s.
#[derive(Debug, Clone, PartialEq)]
pub enum Finiteness {
    Finite,
    Infinite,
    /// Neither criterion applies; the reason names the missing condition.
    Unknown(String),
}

impl Finiteness {
    pub fn is_finite(&self) -> bool {
        matches!(self, Finiteness::Finite)
    }
}

impl fmt::Display for Finiteness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finiteness::Finite => write!(f, "finite"),
            Finiteness::Infinite => write!(f, "infinite"),
            Finiteness::Unknown(r) => write!(f, "unknown ({r})"),
        }
    }
}

fn require_drift(model: &LevyModel) -> Result<f64> {
    let d = model.mean();
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Assumption(format!(
            "exponential functional needs 0 < phi'(0) < inf, got {d}"
        )));
    }
    Ok(d)
}

/// Whether E I_∞^s is finite under `model` (whose exponent plays the role of φ).
///
/// s ∈ [−1, 0] is always finite. For s > 0 the moment is finite exactly when
/// φ(−s) < 0. For s < −1 the recursion E I^{−r−1} = (φ(r)/r) E I^{−r} is
/// followed down to r ∈ (0, 1]; any infinite factor gives `Unknown`.
pub fn moment_finite(model: &LevyModel, s: f64) -> Result<Finiteness> {
    require_drift(model)?;
    if !s.is_finite() {
        return Err(Error::Domain(format!(
            "moment order must be finite, got {s}"
        )));
    }
    if (-1.0..=0.0).contains(&s) {
        return Ok(Finiteness::Finite);
    }
    if s > 0.0 {
        let phi = model.psi_extended(-s);
        return Ok(if phi < 0.0 {
            Finiteness::Finite
        } else {
            Finiteness::Infinite
        });
    }
    let mut r = -s - 1.0;
    while r > 0.0 {
        if !model.psi_extended(r).is_finite() {
            return Ok(Finiteness::Unknown(format!(
                "phi({r}) = inf breaks the recursion"
            )));
        }
        r -= 1.0;
    }
    Ok(Finiteness::Finite)
}

/// Closed-form E I_∞^s when the law of I_∞ is known: Brownian families
/// (I_∞ = (2Z_ν)^{−1}, Z_ν gamma) and pure drift (I_∞ = 1/d).
pub fn exact_moment(model: &LevyModel, s: f64) -> Option<f64> {
    match model.equivalent_family()? {
        Family::BrownianDrift { nu } if nu > 0.0 => Some(if s < nu {
            (-s * 2f64.ln() + ln_gamma(nu - s).ok()? - ln_gamma(nu).ok()?).exp()
        } else {
            f64::INFINITY
        }),
        Family::CpPlusDrift { drift, beta, .. } if beta == 0.0 && drift > 0.0 => {
            Some(drift.powf(-s))
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Exact,
    Recursion,
    MonteCarlo,
}

impl fmt::Display for MomentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MomentMethod::Exact => "exact",
            MomentMethod::Recursion => "recursion",
            MomentMethod::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    pub s: f64,
    pub value: f64,
    pub method: MomentMethod,
    pub stderr: Option<f64>,
    pub finite: bool,
}

/// Table of moments of I_∞ for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentLedger {
    pub model: String,
    pub rows: Vec<MomentRow>,
    pub notes: Vec<String>,
}

impl MomentLedger {
    pub fn new(model: &LevyModel) -> Self {
        MomentLedger {
            model: model.to_string(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn value_at(&self, s: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.s == s).map(|r| r.value)
    }

    /// CSV with header `s,value,method,stderr,finite`; a missing stderr is an empty field.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "s,value,method,stderr,finite")?;
        for r in &self.rows {
            let se = r.stderr.map(fmt17).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt17(r.s),
                fmt17(r.value),
                r.method,
                se,
                r.finite
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// E I_∞^{−r} for r = 1..=r_max+1, starting from `base` = E I_∞^{−1} and
/// multiplying by φ(r)/r. Stops early, with a note, at the first φ(r) = ∞.
pub fn moment_recursion(model: &LevyModel, r_max: usize, base: f64) -> Result<MomentLedger> {
    require_drift(model)?;
    if !(base > 0.0 && base.is_finite()) {
        return Err(Error::Domain(format!(
            "base moment must be finite and positive, got {base}"
        )));
    }
    let mut ledger = MomentLedger::new(model);
    ledger.rows.push(MomentRow {
        s: -1.0,
        value: base,
        method: MomentMethod::Exact,
        stderr: None,
        finite: true,
    });
    let mut value = base;
    for r in 1..=r_max {
        let phi = model.psi_extended(r as f64);
        if !phi.is_finite() {
            ledger
                .notes
                .push(format!("recursion truncated at r = {r}: phi({r}) = inf"));
            break;
        }
        value *= phi / r as f64;
        ledger.rows.push(MomentRow {
            s: -(r as f64) - 1.0,
            value,
            method: MomentMethod::Recursion,
            stderr: None,
            finite: true,
        });
    }
    Ok(ledger)
}

/// Recursion ledger with base E I_∞^{−1} = φ'(0).
pub fn negative_moments(model: &LevyModel, r_max: usize) -> Result<MomentLedger> {
    moment_recursion(model, r_max, require_drift(model)?)
}

/// Truncated Monte Carlo estimate of E I_∞^s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMoment {
    pub s: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// Deterministic bound on |E I_∞^s − E I_T^s| from the tail beyond T.
    pub bias_bound: f64,
    pub t_trunc: f64,
    pub n: usize,
}

impl McMoment {
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.estimate - reference) / self.stderr
    }

    /// Whether `reference` lies within k standard errors plus the bias bound.
    pub fn covers(&self, reference: f64, k: f64) -> bool {
        (self.estimate - reference).abs() <= k * self.stderr + self.bias_bound
    }
}

impl fmt::Display for McMoment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "s: {}", self.s)?;
        writeln!(f, "estimate: {}", fmt17(self.estimate))?;
        writeln!(f, "stderr: {}", fmt17(self.stderr))?;
        writeln!(f, "bias_bound: {}", fmt17(self.bias_bound))?;
        writeln!(f, "t_trunc: {}", fmt17(self.t_trunc))?;
        write!(f, "n: {}", self.n)
    }
}

/// T = max(20, 10/φ'(0)).
pub fn truncation_horizon(model: &LevyModel) -> Result<f64> {
    Ok(f64::max(20.0, 10.0 / require_drift(model)?))
}

/// Monte Carlo E I_T^s with T = max(20, 10/φ'(0)).
///
/// With tail bound r = (2/φ'(0)) e^{−φ'(0)T/2} the reported bias bound is
/// |s|·r·E I_T^{s−1} for s < 0, r^s for 0 < s < 1 and s·r·E (I_T + r)^{s−1}
/// for s ≥ 1. Negative orders are biased upward.
pub fn mc_exp_functional(model: &LevyModel, s: f64, cfg: &SimConfig) -> Result<McMoment> {
    cfg.validate()?;
    match moment_finite(model, s)? {
        Finiteness::Finite => {}
        Finiteness::Infinite => {
            return Err(Error::Domain(format!("E I^{s} is infinite for {model}")))
        }
        Finiteness::Unknown(reason) => return Err(Error::FinitenessUnknown { s, reason }),
    }
    let drift = model.mean();
    let t_trunc = truncation_horizon(model)?;
    let samples: Vec<f64> = cfg
        .exec
        .map(cfg.n_paths, |i| -> Result<f64> {
            let mut p = PathSampler::new(model, cfg, i as u64)?;
            p.extend_to(t_trunc);
            Ok(exp_functional(p.grid(), -1.0)?.value(t_trunc))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let powered: Vec<f64> = samples.iter().map(|i| i.powf(s)).collect();
    let est = MeanEstimate::of(&powered);
    let r = 2.0 / drift * (-0.5 * drift * t_trunc).exp();
    let bias_bound = if s == 0.0 {
        0.0
    } else if s < 0.0 {
        let d: Vec<f64> = samples.iter().map(|i| i.powf(s - 1.0)).collect();
        s.abs() * r * MeanEstimate::of(&d).mean
    } else if s < 1.0 {
        r.powf(s)
    } else {
        let d: Vec<f64> = samples.iter().map(|i| (i + r).powf(s - 1.0)).collect();
        s * r * MeanEstimate::of(&d).mean
    };
    Ok(McMoment {
        s,
        estimate: est.mean,
        stderr: est.stderr,
        bias_bound,
        t_trunc,
        n: cfg.n_paths,
    })
}

/// F(m) = E^{(m)} I_∞^{m−1}, with the method used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue {
    pub m: f64,
    pub value: f64,
    pub method: MomentMethod,
    /// Monte Carlo details when method is `MonteCarlo`.
    pub mc: Option<McMoment>,
}

impl fmt::Display for FValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m: {}", self.m)?;
        writeln!(f, "F: {}", fmt17(self.value))?;
        write!(f, "method: {}", self.method)?;
        if let Some(mc) = &self.mc {
            write!(
                f,
                "\nstderr: {}\nbias_bound: {}",
                fmt17(mc.stderr),
                fmt17(mc.bias_bound)
            )?;
        }
        Ok(())
    }
}

/// F(m) for m ∈ (m₀, m₊): closed form when the tilted law of I_∞ is known,
/// Monte Carlo under the Esscher-tilted model otherwise.
#[allow(non_snake_case)]
pub fn F_of_m(model: &LevyModel, m: f64, cfg: &SimConfig) -> Result<FValue> {
    let prof = profile(model)?;
    if !(m > prof.m0 && m < model.m_plus()) {
        return Err(Error::Domain(format!(
            "m = {m} outside (m0, m+) = ({}, {})",
            prof.m0,
            model.m_plus()
        )));
    }
    let tilted = model.esscher(m)?;
    if let Some(v) = exact_moment(&tilted, m - 1.0) {
        return Ok(FValue {
            m,
            value: v,
            method: MomentMethod::Exact,
            mc: None,
        });
    }
    let mc = mc_exp_functional(&tilted, m - 1.0, cfg)?;
    Ok(FValue {
        m,
        value: mc.estimate,
        method: MomentMethod::MonteCarlo,
        mc: Some(mc),
    })
}

/// Ledger of E I_∞^s over `orders`: closed form where known, the φ'(0)-based
/// recursion at negative integers, Monte Carlo otherwise. Orders with
/// unknown finiteness are skipped with a note.
pub fn moment_ledger(model: &LevyModel, orders: &[f64], cfg: &SimConfig) -> Result<MomentLedger> {
    let mut ledger = MomentLedger::new(model);
    for &s in orders {
        let fin = moment_finite(model, s)?;
        let row = match fin {
            Finiteness::Unknown(reason) => {
                ledger
                    .notes
                    .push(format!("s = {s}: finiteness unknown, {reason}"));
                continue;
            }
            Finiteness::Infinite => MomentRow {
                s,
                value: f64::INFINITY,
                method: MomentMethod::Exact,
                stderr: None,
                finite: false,
            },
            Finiteness::Finite => {
                if let Some(v) = exact_moment(model, s) {
                    MomentRow {
                        s,
                        value: v,
                        method: MomentMethod::Exact,
                        stderr: None,
                        finite: true,
                    }
                } else if s <= -1.0 && s.fract() == 0.0 {
                    let r = (-s) as usize - 1;
                    let rec = negative_moments(model, r)?;
                    let v = rec.value_at(s).expect("finite recursion covers s");
                    let method = if s == -1.0 {
                        MomentMethod::Exact
                    } else {
                        MomentMethod::Recursion
                    };
                    MomentRow {
                        s,
                        value: v,
                        method,
                        stderr: None,
                        finite: true,
                    }
                } else {
                    let mc = mc_exp_functional(model, s, cfg)?;
                    ledger
                        .notes
                        .push(format!("s = {s}: bias bound {}", fmt17(mc.bias_bound)));
                    MomentRow {
                        s,
                        value: mc.estimate,
                        method: MomentMethod::MonteCarlo,
                        stderr: Some(mc.stderr),
                        finite: true,
                    }
                }
            }
        };
        ledger.rows.push(row);
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finiteness_examples() {
        let b = LevyModel::brownian(1.0).unwrap();
        assert_eq!(moment_finite(&b, -1.0).unwrap(), Finiteness::Finite);
        assert_eq!(moment_finite(&b, 1.0).unwrap(), Finiteness::Infinite);
        assert_eq!(moment_finite(&b, 0.5).unwrap(), Finiteness::Finite);
        assert_eq!(moment_finite(&b, -3.0).unwrap(), Finiteness::Finite);
        let c = LevyModel::cp_minus(2.0, 1.0).unwrap();
        assert!(matches!(
            moment_finite(&c, -2.5).unwrap(),
            Finiteness::Unknown(_)
        ));
    }

    #[test]
    fn drift_condition_is_checked() {
        let b = LevyModel::brownian(1.0).unwrap().esscher(-1.5).unwrap();
        assert!(matches!(moment_finite(&b, 0.5), Err(Error::Assumption(_))));
    }

    #[test]
    fn brownian_f_values() {
        let b = LevyModel::brownian(1.0).unwrap();
        let cfg = SimConfig::new(1, 10);
        assert_relative_eq!(
            F_of_m(&b, 1.0, &cfg).unwrap().value,
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            F_of_m(&b, 2.0, &cfg).unwrap().value,
            0.125,
            max_relative = 1e-14
        );
        assert!(matches!(F_of_m(&b, -0.6, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn recursion_truncates_at_infinite_exponent() {
        let c = LevyModel::cp_minus(4.0, 2.5).unwrap();
        let l = negative_moments(&c, 5).unwrap();
        assert_eq!(l.rows.len(), 3);
        assert_eq!(l.notes.len(), 1);
    }

    #[test]
    fn deterministic_functional_is_one() {
        let m = LevyModel::cp_plus(1.0, 0.0, 10.0).unwrap();
        for s in [-2.0, -0.5, 0.7, 3.0] {
            let r = mc_exp_functional(&m, s, &SimConfig::new(1, 4)).unwrap();
            assert!(
                (r.estimate - 1.0).abs() <= r.bias_bound + 1e-8,
                "s={s}: {r}"
            );
            assert_eq!(r.stderr, 0.0);
        }
    }

    #[test]
    fn ledger_csv_layout() {
        let b = LevyModel::brownian(1.0).unwrap();
        let l = moment_ledger(&b, &[-2.0, 1.0], &SimConfig::new(1, 4)).unwrap();
        let csv = l.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,value,method,stderr,finite");
        assert!(lines[2].ends_with(",exact,,false"));
        assert!(lines[2].contains("inf"));
    }
}

//! Large-deviation quantities of the clock: critical points, Δ, the rate
//! function I, the Legendre dual ψ*, the limit log-Laplace transform L and
//! the boundary classification of I at τ₊ and τ₀.

use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::models::{FamilyKind, LevyModel};
use crate::numerics::{find_root, maximize_concave, BoundaryHit, Bracket};

/// Tolerances of the rate engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig {
    /// Root and argmax tolerance.
    pub tol: f64,
    /// Tolerance used to accept extrapolated endpoint limits.
    pub limit_tol: f64,
    pub exec: Exec,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            limit_tol: 1e-6,
            exec: Exec::default(),
        }
    }
}

/// Case labels of the two boundaries of Δ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    C3a,
    C3b,
    C3c,
    C4a,
    C4b,
    C4c,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseLabel::C3a => "3a",
            CaseLabel::C3b => "3b",
            CaseLabel::C3c => "3c",
            CaseLabel::C4a => "4a",
            CaseLabel::C4b => "4b",
            CaseLabel::C4c => "4c",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    TauPlus,
    TauZero,
}

/// Value and slope of I at one end of Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryReport {
    pub at: BoundarySide,
    pub case_label: CaseLabel,
    /// The boundary point itself (τ₊ or τ₀).
    pub tau: f64,
    /// I at the boundary (limit value); +∞ when τ₀ = ∞.
    pub value_i: f64,
    /// I' at the boundary; for 3a/3c the slope at infinity. For 4a this is
    /// an infinite-magnitude flag stored as +∞.
    pub slope_i: f64,
    /// (slope, intercept) of the asymptote, case 3a only.
    pub asymptote: Option<(f64, f64)>,
    /// The b constant of cases 3b/4b.
    pub b: Option<f64>,
}

/// Whether the full LDP (not only the weak one) is known to hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdpStatus {
    Established,
    Weak,
}

impl fmt::Display for LdpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LdpStatus::Established => "established",
            LdpStatus::Weak => "weak",
        })
    }
}

/// Raw endpoint data of ψ from which the classification is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointLimits {
    pub m_minus: f64,
    pub m_plus: f64,
    /// True when m₀ is an interior zero of ψ'.
    pub m0_interior: bool,
    /// ψ'(m₀), read as lim ψ(m)/m when m₀ = −∞.
    pub dpsi_m0: f64,
    /// ψ(m₊) as a limit.
    pub psi_m_plus: f64,
    /// ψ'(m₊), read as lim ψ(m)/m when m₊ = +∞.
    pub dpsi_m_plus: f64,
}

/// Analytic summary of a model's clock large deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateProfile {
    pub m0: f64,
    pub psi_m0: f64,
    /// ψ'(0) = E ξ₁.
    pub mean: f64,
    /// ψ''(0).
    pub psi2_0: f64,
    pub tau_plus: f64,
    pub tau_zero: f64,
    pub tau_e: f64,
    /// Δ = (τ₊, τ₀).
    pub delta: (f64, f64),
    pub class_tau0: CaseLabel,
    pub class_tauplus: CaseLabel,
    pub asymptote: Option<(f64, f64)>,
    pub b_plus: Option<f64>,
    pub b_zero: Option<f64>,
    pub ldp_status: LdpStatus,
    pub limits: EndpointLimits,
}

impl fmt::Display for RateProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |b| format!("{b}"));
        writeln!(f, "m0: {}", self.m0)?;
        writeln!(f, "psi_m0: {}", self.psi_m0)?;
        writeln!(f, "mean: {}", self.mean)?;
        writeln!(f, "psi2_0: {}", self.psi2_0)?;
        writeln!(f, "m_minus: {}", self.limits.m_minus)?;
        writeln!(f, "m_plus: {}", self.limits.m_plus)?;
        writeln!(f, "tau_plus: {}", self.tau_plus)?;
        writeln!(f, "tau_zero: {}", self.tau_zero)?;
        writeln!(f, "tau_e: {}", self.tau_e)?;
        writeln!(f, "delta: ({}, {})", self.delta.0, self.delta.1)?;
        writeln!(f, "class_tau0: {}", self.class_tau0)?;
        writeln!(f, "class_tauplus: {}", self.class_tauplus)?;
        match self.asymptote {
            Some((s, c)) => writeln!(f, "asymptote: y = {s} x + {c}")?,
            None => writeln!(f, "asymptote: none")?,
        }
        writeln!(f, "b_plus: {}", opt(self.b_plus))?;
        writeln!(f, "b_zero: {}", opt(self.b_zero))?;
        write!(f, "ldp_status: {}", self.ldp_status)
    }
}

impl fmt::Display for BoundaryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.at {
            BoundarySide::TauPlus => "tau_plus",
            BoundarySide::TauZero => "tau_zero",
        };
        write!(
            f,
            "{side}: case {} at {}, I = {}, I' = {}",
            self.case_label, self.tau, self.value_i, self.slope_i
        )?;
        if let Some((s, c)) = self.asymptote {
            write!(f, ", asymptote y = {s} x + {c}")?;
        }
        if let Some(b) = self.b {
            write!(f, ", b = {b}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Endpoint limits

/// m_k → `to` starting from `from`: geometric in distance for a finite
/// endpoint, ±2^k for an infinite one.
fn approach(from: f64, to: f64, k: i32) -> f64 {
    if to.is_finite() {
        to - (to - from) * 0.5f64.powi(k)
    } else {
        to.signum() * 2f64.powi(k)
    }
}

/// Limit of `f(m)` as m → `to` along [`approach`], with Aitken extrapolation.
///
/// Returns ±∞ when successive differences stop shrinking (ratio ≥ 0.9).
fn endpoint_limit<F: Fn(f64) -> f64>(f: F, from: f64, to: f64) -> f64 {
    let (k0, k1) = if to.is_finite() { (1, 44) } else { (0, 22) };
    let mut vals: Vec<f64> = Vec::new();
    for k in k0..=k1 {
        let m = approach(from, to, k);
        if m == to {
            break;
        }
        let v = f(m);
        if v.is_nan() {
            break;
        }
        if v.is_infinite() {
            return v;
        }
        vals.push(v);
    }
    let n = vals.len();
    if n < 3 {
        return vals.last().copied().unwrap_or(f64::NAN);
    }
    let d: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    let last = vals[n - 1];
    let dl = d[d.len() - 1];
    if dl.abs() <= 4.0 * f64::EPSILON * last.abs().max(1.0) {
        return last;
    }
    let tail = &d[d.len().saturating_sub(5)..];
    let diverging = tail
        .windows(2)
        .all(|w| w[0].signum() == w[1].signum() && (w[1] / w[0]).abs() >= 0.9);
    if diverging {
        return dl.signum() * f64::INFINITY;
    }
    let dp = d[d.len() - 2];
    let denom = dl - dp;
    if denom == 0.0 {
        return last;
    }
    last - dl * dl / denom
}

// ---------------------------------------------------------------------------
// Profile and classification

/// Critical points, Δ, boundary classes and asymptotes of a model.
pub fn profile(model: &LevyModel) -> Result<RateProfile> {
    profile_with(model, &RateConfig::default())
}

pub fn profile_with(model: &LevyModel, cfg: &RateConfig) -> Result<RateProfile> {
    let jet0 = model.jet_unchecked(0.0);
    let mean = jet0.d1;
    if !(mean > 0.0) {
        return Err(Error::Assumption(format!(
            "drift condition violated: psi'(0) = {mean} must be > 0"
        )));
    }
    let (lo, hi) = (model.m_minus(), model.m_plus());
    let dpsi = |m: f64| model.jet_unchecked(m).d1;
    let psi = |m: f64| model.psi_extended(m);

    // m₀: first negative ψ' on a geometric probe toward m₋, then Brent.
    let mut m0 = lo;
    let mut prev = 0.0;
    for k in -4..80 {
        let m = if lo.is_finite() {
            lo * (1.0 - 0.5f64.powi(k + 5))
        } else {
            -(2f64.powi(k))
        };
        if !model.in_domain(m) || m == prev {
            break;
        }
        let v = dpsi(m);
        if !v.is_finite() {
            break;
        }
        if v < 0.0 {
            m0 = find_root(dpsi, Bracket::new(m, prev)?, cfg.tol * 1e-2)?;
            break;
        }
        if v == 0.0 {
            m0 = m;
            break;
        }
        prev = m;
    }
    let m0_interior = m0 > lo;

    let psi_m0 = if m0_interior {
        psi(m0)
    } else {
        endpoint_limit(psi, 0.0, lo)
    };
    let dpsi_m0 = if m0_interior {
        0.0
    } else if lo.is_finite() {
        endpoint_limit(dpsi, 0.0, lo)
    } else {
        endpoint_limit(|m| psi(m) / m, 0.0, lo)
    };
    let psi_m_plus = endpoint_limit(psi, 0.0, hi);
    let dpsi_m_plus = if hi.is_finite() {
        endpoint_limit(dpsi, 0.0, hi)
    } else {
        endpoint_limit(|m| psi(m) / m, 0.0, hi)
    };

    let limits = EndpointLimits {
        m_minus: lo,
        m_plus: hi,
        m0_interior,
        dpsi_m0,
        psi_m_plus,
        dpsi_m_plus,
    };
    let (plus, zero) = classify_limits(model, m0, psi_m0, &limits)?;
    let tau_e = 1.0 / mean;
    let (tau_plus, tau_zero) = (plus.tau, zero.tau);
    if !(tau_plus < tau_e && tau_e < tau_zero) {
        return Err(Error::Classification(format!(
            "tau_e = {tau_e} outside ({tau_plus}, {tau_zero})"
        )));
    }
    let ldp_status = if (tau_plus == 0.0 && tau_zero == f64::INFINITY)
        || matches!(model.kind(), FamilyKind::CpPlusDrift | FamilyKind::SawTooth)
    {
        LdpStatus::Established
    } else {
        LdpStatus::Weak
    };
    Ok(RateProfile {
        m0,
        psi_m0,
        mean,
        psi2_0: jet0.d2,
        tau_plus,
        tau_zero,
        tau_e,
        delta: (tau_plus, tau_zero),
        class_tau0: zero.case_label,
        class_tauplus: plus.case_label,
        asymptote: zero.asymptote,
        b_plus: plus.b,
        b_zero: zero.b,
        ldp_status,
        limits,
    })
}

/// Case labels and boundary values of I at τ₊ and τ₀ (in that order).
pub fn classify_boundaries(
    model: &LevyModel,
    prof: &RateProfile,
) -> Result<(BoundaryReport, BoundaryReport)> {
    classify_limits(model, prof.m0, prof.psi_m0, &prof.limits)
}

fn classify_limits(
    model: &LevyModel,
    m0: f64,
    psi_m0: f64,
    lim: &EndpointLimits,
) -> Result<(BoundaryReport, BoundaryReport)> {
    let raw = || {
        format!(
            "m0 = {m0}, psi(m0) = {psi_m0}, psi'(m0) = {}, m+ = {}, psi(m+) = {}, psi'(m+) = {}",
            lim.dpsi_m0, lim.m_plus, lim.psi_m_plus, lim.dpsi_m_plus
        )
    };
    // b = −lim (ψ(m) − mψ'(m)) toward an infinite endpoint.
    let b_limit = |to: f64| {
        -endpoint_limit(
            |m| {
                let j = model.jet_unchecked(m);
                j.value - m * j.d1
            },
            0.0,
            to,
        )
    };

    let zero = if lim.m0_interior {
        BoundaryReport {
            at: BoundarySide::TauZero,
            case_label: CaseLabel::C3a,
            tau: f64::INFINITY,
            value_i: f64::INFINITY,
            slope_i: -psi_m0,
            asymptote: Some((-psi_m0, m0)),
            b: None,
        }
    } else if m0 == f64::NEG_INFINITY && lim.dpsi_m0 > 0.0 && lim.dpsi_m0.is_finite() {
        let tau = 1.0 / lim.dpsi_m0;
        let b = b_limit(f64::NEG_INFINITY);
        BoundaryReport {
            at: BoundarySide::TauZero,
            case_label: CaseLabel::C3b,
            tau,
            value_i: b * tau,
            slope_i: -psi_m0,
            asymptote: None,
            b: Some(b),
        }
    } else if m0 == f64::NEG_INFINITY && psi_m0.is_finite() && psi_m0 < 0.0 {
        BoundaryReport {
            at: BoundarySide::TauZero,
            case_label: CaseLabel::C3c,
            tau: f64::INFINITY,
            value_i: f64::INFINITY,
            slope_i: -psi_m0,
            asymptote: None,
            b: None,
        }
    } else {
        return Err(Error::Classification(format!(
            "tau_0 matches no case: {}",
            raw()
        )));
    };

    let plus = if lim.m_plus.is_finite() && lim.psi_m_plus == f64::INFINITY {
        BoundaryReport {
            at: BoundarySide::TauPlus,
            case_label: CaseLabel::C4a,
            tau: 0.0,
            value_i: lim.m_plus,
            slope_i: f64::INFINITY,
            asymptote: None,
            b: None,
        }
    } else if lim.m_plus == f64::INFINITY && lim.dpsi_m_plus.is_finite() && lim.dpsi_m_plus > 0.0 {
        let tau = 1.0 / lim.dpsi_m_plus;
        let b = b_limit(f64::INFINITY);
        BoundaryReport {
            at: BoundarySide::TauPlus,
            case_label: CaseLabel::C4b,
            tau,
            value_i: b * tau,
            slope_i: f64::NEG_INFINITY,
            asymptote: None,
            b: Some(b),
        }
    } else if lim.m_plus == f64::INFINITY
        && lim.psi_m_plus == f64::INFINITY
        && lim.dpsi_m_plus == f64::INFINITY
    {
        BoundaryReport {
            at: BoundarySide::TauPlus,
            case_label: CaseLabel::C4c,
            tau: 0.0,
            value_i: f64::INFINITY,
            slope_i: f64::NEG_INFINITY,
            asymptote: None,
            b: None,
        }
    } else {
        return Err(Error::Classification(format!(
            "tau_+ matches no case: {}",
            raw()
        )));
    };
    Ok((plus, zero))
}

// ---------------------------------------------------------------------------
// Compactified maximization

/// Monotone map from u ∈ (0, 1) onto an open interval with possibly
/// infinite endpoints.
#[derive(Debug, Clone, Copy)]
struct Compact {
    lo: f64,
    hi: f64,
}

impl Compact {
    fn to_m(self, u: f64) -> f64 {
        use std::f64::consts::FRAC_PI_2;
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => self.lo + (self.hi - self.lo) * u,
            (true, false) => self.lo + (FRAC_PI_2 * u).tan(),
            (false, true) => self.hi - (FRAC_PI_2 * (1.0 - u)).tan(),
            (false, false) => (std::f64::consts::PI * (u - 0.5)).tan(),
        }
    }
}

/// Maximum of a concave objective with derivatives, located by golden
/// section on the compactified interval and polished by Newton steps.
#[derive(Debug, Clone, Copy)]
struct Sup {
    argmax: f64,
    value: f64,
    boundary: Option<BoundaryHit>,
}

fn clamp_neg(v: f64) -> f64 {
    if v.is_nan() || v == f64::NEG_INFINITY {
        -f64::MAX
    } else {
        v
    }
}

/// `obj(m)` returns (g, g', g''); the search is confined to (lo, hi).
fn sup_concave<F: Fn(f64) -> (f64, f64, f64)>(obj: F, lo: f64, hi: f64, tol: f64) -> Result<Sup> {
    let c = Compact { lo, hi };
    let inside = |m: f64| m > lo && m < hi;
    let g = |m: f64| {
        if inside(m) {
            clamp_neg(obj(m).0)
        } else {
            -f64::MAX
        }
    };
    let best = maximize_concave(|u| g(c.to_m(u)), Bracket::new(0.0, 1.0)?, tol.min(1e-12))?;
    let mut m = c.to_m(best.argmax);
    let mut v = g(m);
    for _ in 0..50 {
        let (_, d1, d2) = obj(m);
        if !(d2 < 0.0) || !d1.is_finite() {
            break;
        }
        let next = m - d1 / d2;
        if !inside(next) {
            break;
        }
        let vn = g(next);
        if vn < v - 1e-15 * v.abs().max(1.0) {
            break;
        }
        let done = (next - m).abs() <= 1e-15 * m.abs().max(1e-300);
        m = next;
        v = vn;
        if done {
            break;
        }
    }
    Ok(Sup {
        argmax: m,
        value: v,
        boundary: best.boundary,
    })
}

// ---------------------------------------------------------------------------
// Rate function

/// One evaluation of the rate function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub x: f64,
    pub i: f64,
    /// I'(x) = −ψ(m*(x)).
    pub iprime: f64,
    /// The maximizer m*(x); NaN at a boundary where it is not attained.
    pub argmax: f64,
}

/// Rate function of one model, with its profile computed once.
#[derive(Debug, Clone)]
pub struct RateFunction {
    model: LevyModel,
    profile: RateProfile,
    plus: BoundaryReport,
    zero: BoundaryReport,
    cfg: RateConfig,
}

impl RateFunction {
    pub fn new(model: &LevyModel) -> Result<Self> {
        Self::with_config(model, RateConfig::default())
    }

    pub fn with_config(model: &LevyModel, cfg: RateConfig) -> Result<Self> {
        let profile = profile_with(model, &cfg)?;
        let (plus, zero) = classify_boundaries(model, &profile)?;
        Ok(Self {
            model: *model,
            profile,
            plus,
            zero,
            cfg,
        })
    }

    pub fn profile(&self) -> &RateProfile {
        &self.profile
    }

    pub fn boundaries(&self) -> (BoundaryReport, BoundaryReport) {
        (self.plus, self.zero)
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    /// I(x).
    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.i)
    }

    /// I(x), I'(x) and the maximizer.
    pub fn eval(&self, x: f64) -> Result<RatePoint> {
        let (tp, t0) = self.profile.delta;
        if x.is_nan() || x < tp || x > t0 {
            return Err(Error::Domain(format!(
                "x = {x} outside closure of Delta = [{tp}, {t0}]"
            )));
        }
        if x == self.profile.tau_e {
            return Ok(RatePoint {
                x,
                i: 0.0,
                iprime: 0.0,
                argmax: 0.0,
            });
        }
        if x == tp {
            return Ok(RatePoint {
                x,
                i: self.plus.value_i,
                iprime: self.plus.slope_i,
                argmax: f64::NAN,
            });
        }
        if x == t0 {
            return Ok(RatePoint {
                x,
                i: self.zero.value_i,
                iprime: self.zero.slope_i,
                argmax: f64::NAN,
            });
        }
        let model = self.model;
        let obj = |m: f64| {
            let j = model.jet_unchecked(m);
            (m - x * j.value, 1.0 - x * j.d1, -x * j.d2)
        };
        let sup = sup_concave(
            obj,
            self.profile.m0,
            self.profile.limits.m_plus,
            self.cfg.tol,
        )?;
        if sup.boundary.is_some() && sup.value > 1.0 / self.cfg.tol {
            return Ok(RatePoint {
                x,
                i: f64::INFINITY,
                iprime: f64::NAN,
                argmax: f64::NAN,
            });
        }
        let iprime = -model.jet_unchecked(sup.argmax).value;
        Ok(RatePoint {
            x,
            i: sup.value,
            iprime,
            argmax: sup.argmax,
        })
    }

    /// Tabulate I and I' on `n` equally spaced points of [x_lo, x_hi].
    pub fn curve(&self, x_lo: f64, x_hi: f64, n: usize) -> Result<Vec<RatePoint>> {
        let (tp, t0) = self.profile.delta;
        if n < 2 {
            return Err(Error::Domain(format!("rate curve needs n >= 2, got {n}")));
        }
        if !(x_lo < x_hi) || x_lo < tp || x_hi > t0 {
            return Err(Error::Domain(format!(
                "grid [{x_lo}, {x_hi}] not inside closure of Delta = [{tp}, {t0}]"
            )));
        }
        let step = (x_hi - x_lo) / (n - 1) as f64;
        let grid = |k: usize| {
            if k == n - 1 {
                x_hi
            } else {
                x_lo + step * k as f64
            }
        };
        self.cfg
            .exec
            .map(n, |k| self.eval(grid(k)))
            .into_iter()
            .collect()
    }
}

/// I(x) = sup over (m₀, m₊) of m − xψ(m).
#[allow(non_snake_case)]
pub fn rate_I(model: &LevyModel, x: f64) -> Result<f64> {
    RateFunction::new(model)?.value(x)
}

/// ψ*(y) = sup over the domain of my − ψ(m); may be +∞.
pub fn legendre_dual(model: &LevyModel, y: f64) -> Result<f64> {
    legendre_dual_with(model, y, &RateConfig::default())
}

pub fn legendre_dual_with(model: &LevyModel, y: f64, cfg: &RateConfig) -> Result<f64> {
    let (lo, hi) = (model.m_minus(), model.m_plus());
    let obj = |m: f64| {
        let j = model.jet_unchecked(m);
        (m * y - j.value, y - j.d1, -j.d2)
    };
    let sup = sup_concave(obj, lo, hi, cfg.tol)?;
    let edge = match sup.boundary {
        Some(BoundaryHit::Lo) => Some(lo),
        Some(BoundaryHit::Hi) => Some(hi),
        None => None,
    };
    match edge {
        Some(to) => {
            let f = |m: f64| m * y - model.psi_extended(m);
            let lim = endpoint_limit(f, 0.0, to);
            Ok(if lim.is_nan() {
                sup.value
            } else {
                lim.max(sup.value)
            })
        }
        None => Ok(sup.value),
    }
}

/// L(θ) = −m with ψ(m) = −θ, m ∈ (m₀, m₊).
#[allow(non_snake_case)]
pub fn invert_L(model: &LevyModel, theta: f64) -> Result<f64> {
    let prof = profile(model)?;
    invert_l_with(model, &prof, theta, &RateConfig::default())
}

/// [`invert_L`] with a precomputed profile.
pub fn invert_l_with(
    model: &LevyModel,
    prof: &RateProfile,
    theta: f64,
    cfg: &RateConfig,
) -> Result<f64> {
    let (th_lo, th_hi) = theta_range(prof);
    if !(theta > th_lo && theta < th_hi) {
        return Err(Error::Domain(format!(
            "theta = {theta} outside ({th_lo}, {th_hi})"
        )));
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    let target = -theta;
    let f = |m: f64| model.psi_extended(m) - target;
    // Walk from 0 toward the endpoint on the side of the root.
    let to = if target > 0.0 {
        prof.limits.m_plus
    } else {
        prof.m0
    };
    let mut inner = 0.0;
    for k in 0..200 {
        let m = if to.is_finite() {
            to - to * 0.5f64.powi(k + 1)
        } else {
            to.signum() * 2f64.powi(k - 4)
        };
        if m == inner || !model.in_domain(m) && !(m > prof.m0) {
            break;
        }
        let v = f(m);
        let crossed = if target > 0.0 { v >= 0.0 } else { v <= 0.0 };
        if crossed {
            if v == 0.0 {
                return Ok(-m);
            }
            let (a, b) = if m < inner { (m, inner) } else { (inner, m) };
            let fv = |m: f64| f(m).clamp(-f64::MAX, f64::MAX);
            let tol = cfg.tol * 1e-3 * (1.0 + m.abs());
            return Ok(-find_root(fv, Bracket::new(a, b)?, tol)?);
        }
        inner = m;
    }
    Err(Error::Domain(format!(
        "no root of psi(m) = {target} found for theta = {theta}"
    )))
}

/// Open θ-interval (−ψ(m₊), −ψ(m₀)) on which L is finite.
pub fn theta_range(prof: &RateProfile) -> (f64, f64) {
    (-prof.limits.psi_m_plus, -prof.psi_m0)
}

/// sup over θ of xθ − L(θ), the Gärtner–Ellis form of I(x).
pub fn gartner_ellis(model: &LevyModel, x: f64) -> Result<f64> {
    let cfg = RateConfig::default();
    let prof = profile_with(model, &cfg)?;
    let (lo, hi) = theta_range(&prof);
    let obj = |th: f64| match invert_l_with(model, &prof, th, &cfg) {
        Ok(l) => (x * th - l, f64::NAN, f64::NAN),
        Err(_) => (f64::NEG_INFINITY, f64::NAN, f64::NAN),
    };
    Ok(sup_concave(obj, lo, hi, 1e-13)?.value)
}

/// Write a rate table with header `x,I,Iprime` and 17 significant digits.
pub fn write_rate_csv<W: Write>(mut w: W, points: &[RatePoint]) -> io::Result<()> {
    writeln!(w, "x,I,Iprime")?;
    for p in points {
        writeln!(w, "{},{},{}", fmt17(p.x), fmt17(p.i), fmt17(p.iprime))?;
    }
    Ok(())
}

/// A float with 17 significant digits (`inf`, `-inf`, `nan` for non-finite).
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Tabulate the rate function on `n` points of [x_lo, x_hi].
pub fn rate_curve(model: &LevyModel, x_lo: f64, x_hi: f64, n: usize) -> Result<Vec<RatePoint>> {
    RateFunction::new(model)?.curve(x_lo, x_hi, n)
}

/// Parameters of the five published rate-function plots.
#[derive(Debug, Clone, Copy)]
pub struct FigureSpec {
    pub name: &'static str,
    pub caption: &'static str,
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
}

impl FigureSpec {
    pub fn model(&self) -> LevyModel {
        match self.name {
            "fig1" => LevyModel::brownian(1.0),
            "fig2" => LevyModel::cp_plus(1.0, 2.0, 1.0),
            "fig3" => LevyModel::cp_minus(2.0, 1.0),
            "fig4" => LevyModel::sawtooth(1.0, 3.0),
            _ => LevyModel::hypergeometric(1.0, 3.0),
        }
        .expect("figure parameters are valid")
    }
}

pub const FIGURES: [FigureSpec; 5] = [
    FigureSpec {
        name: "fig1",
        caption: "brownian nu=1",
        x_lo: 0.05,
        x_hi: 3.0,
        n: 301,
    },
    FigureSpec {
        name: "fig2",
        caption: "cp-plus drift=1 beta=2 gamma=1",
        x_lo: 0.0,
        x_hi: 1.0,
        n: 301,
    },
    FigureSpec {
        name: "fig3",
        caption: "cp-minus beta=2 gamma=1",
        x_lo: 0.0,
        x_hi: 5.0,
        n: 301,
    },
    FigureSpec {
        name: "fig4",
        caption: "sawtooth beta=1 gamma=3",
        x_lo: 1.0,
        x_hi: 6.0,
        n: 301,
    },
    FigureSpec {
        name: "fig5",
        caption: "hypergeometric alpha=1 d=3",
        x_lo: 0.05,
        x_hi: 5.0,
        n: 301,
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::catalog;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn sawtooth_profile() {
        let p = profile(&LevyModel::sawtooth(1.0, 3.0).unwrap()).unwrap();
        let s3 = 3f64.sqrt();
        assert_abs_diff_eq!(p.m0, -3.0 + s3, epsilon = 1e-10);
        assert_abs_diff_eq!(p.psi_m0, -(s3 - 1.0).powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(p.tau_plus, 1.0, epsilon = 1e-8);
        assert_eq!(p.tau_zero, f64::INFINITY);
        assert_abs_diff_eq!(p.tau_e, 1.5, epsilon = 1e-14);
        assert_eq!(p.class_tau0, CaseLabel::C3a);
        assert_eq!(p.class_tauplus, CaseLabel::C4b);
        assert_abs_diff_eq!(p.b_plus.unwrap(), 1.0, epsilon = 1e-8);
        assert_eq!(p.ldp_status, LdpStatus::Established);
    }

    #[test]
    fn cauchy_profile() {
        let p = profile(&LevyModel::hypergeometric(1.0, 3.0).unwrap()).unwrap();
        assert_abs_diff_eq!(p.m0, -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.psi_m0, -2.0 / PI, epsilon = 1e-12);
        assert_eq!(p.delta, (0.0, f64::INFINITY));
        assert_eq!(
            (p.class_tau0, p.class_tauplus),
            (CaseLabel::C3a, CaseLabel::C4a)
        );
        assert_eq!(p.ldp_status, LdpStatus::Established);
    }

    #[test]
    fn cp_plus_profile() {
        let p = profile(&LevyModel::cp_plus(1.0, 2.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.tau_plus, 0.0);
        assert_abs_diff_eq!(p.tau_zero, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p.tau_e, 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(
            (p.class_tau0, p.class_tauplus),
            (CaseLabel::C3b, CaseLabel::C4a)
        );
        assert_abs_diff_eq!(p.b_zero.unwrap(), 2.0, epsilon = 1e-8);
        assert_eq!(p.m0, f64::NEG_INFINITY);
        assert_eq!(p.psi_m0, f64::NEG_INFINITY);
    }

    #[test]
    fn cp_plus_without_drift_is_3c() {
        let p = profile(&LevyModel::cp_plus(0.0, 2.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.class_tau0, CaseLabel::C3c);
        assert_abs_diff_eq!(p.psi_m0, -2.0, epsilon = 1e-8);
        assert_eq!(p.tau_zero, f64::INFINITY);
    }

    #[test]
    fn drift_condition_is_assumption_error() {
        let m = LevyModel::brownian(1.0).unwrap().esscher(-1.0).unwrap();
        assert!(matches!(profile(&m), Err(Error::Assumption(_))));
    }

    #[test]
    fn brownian_rate_examples() {
        let m = LevyModel::brownian(1.0).unwrap();
        assert_eq!(rate_I(&m, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(rate_I(&m, 1.0).unwrap(), 0.125, epsilon = 1e-12);
        let p = profile(&m).unwrap();
        assert_eq!(
            (p.class_tau0, p.class_tauplus),
            (CaseLabel::C3a, CaseLabel::C4c)
        );
        let (s, c) = p.asymptote.unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c, -0.5, epsilon = 1e-10);
    }

    #[test]
    fn sawtooth_rate_example() {
        let m = LevyModel::sawtooth(1.0, 3.0).unwrap();
        let want = (3f64.sqrt() - 2f64.sqrt()).powi(2);
        assert_abs_diff_eq!(rate_I(&m, 2.0).unwrap(), want, epsilon = 1e-12);
        assert_abs_diff_eq!(rate_I(&m, 1.0).unwrap(), 1.0, epsilon = 1e-8);
        assert!(matches!(rate_I(&m, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn legendre_dual_examples() {
        let m = LevyModel::brownian(1.0).unwrap();
        assert_abs_diff_eq!(legendre_dual(&m, 2.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(legendre_dual(&m, 4.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(legendre_dual(&m, 1.0).unwrap(), 0.125, epsilon = 1e-12);
        // SawTooth: ψ' < 1 everywhere, so ψ*(y) = ∞ for y > 1.
        let s = LevyModel::sawtooth(1.0, 3.0).unwrap();
        assert_eq!(legendre_dual(&s, 1.5).unwrap(), f64::INFINITY);
    }

    #[test]
    fn invert_l_examples() {
        let m = LevyModel::brownian(1.0).unwrap();
        assert_eq!(invert_L(&m, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(invert_L(&m, -4.0).unwrap(), -1.0, epsilon = 1e-12);
        // L(θ) = (ν − √(ν² − 2θ))/2
        for th in [-3.0f64, -0.5, 0.2, 0.49] {
            let want = (1.0 - (1.0 - 2.0 * th).sqrt()) / 2.0;
            assert_abs_diff_eq!(invert_L(&m, th).unwrap(), want, epsilon = 1e-12);
        }
        assert!(matches!(invert_L(&m, 0.5), Err(Error::Domain(_))));
        let c = LevyModel::hypergeometric(1.0, 3.0).unwrap();
        let l = invert_L(&c, 2.0 / PI - 1e-12).unwrap();
        assert!((l - 1.0).abs() < 1e-4, "{l}");
    }

    #[test]
    fn catalog_profiles_satisfy_invariants() {
        for m in catalog() {
            let p = profile(&m).unwrap();
            assert!(p.tau_plus < p.tau_e && p.tau_e < p.tau_zero, "{m}");
            assert_abs_diff_eq!(p.tau_e, 1.0 / p.mean, epsilon = 1e-15);
            if p.class_tau0 == CaseLabel::C3a {
                assert_eq!(p.tau_zero, f64::INFINITY);
                let (s, c) = p.asymptote.unwrap();
                assert_eq!((s, c), (-p.psi_m0, p.m0));
            }
        }
    }

    #[test]
    fn csbp_classifies_by_conditions() {
        let p = profile(&LevyModel::csbp(0.5, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.class_tau0, CaseLabel::C3a);
        assert_eq!(p.class_tauplus, CaseLabel::C4a);
    }

    #[test]
    fn curve_header_and_boundaries() {
        let m = LevyModel::cp_plus(1.0, 2.0, 1.0).unwrap();
        let pts = rate_curve(&m, 0.0, 1.0, 5).unwrap();
        assert_abs_diff_eq!(pts[0].i, 1.0);
        assert_abs_diff_eq!(pts[4].i, 2.0, epsilon = 1e-8);
        let mut buf = Vec::new();
        write_rate_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,I,Iprime\n"));
        assert!(text
            .lines()
            .nth(3)
            .unwrap()
            .starts_with("5.0000000000000000e-1,"));
        assert!(rate_curve(&m, 0.0, 1.5, 5).is_err());
    }

    #[test]
    fn figure_grids_lie_in_delta() {
        for fig in FIGURES {
            let pts = rate_curve(&fig.model(), fig.x_lo, fig.x_hi, fig.n).unwrap();
            assert_eq!(pts.len(), 301);
            assert!(
                pts.iter().all(|p| !p.i.is_nan() && p.i >= -1e-12),
                "{}",
                fig.name
            );
        }
    }

    #[test]
    fn gartner_ellis_matches_rate() {
        let m = LevyModel::brownian(1.0).unwrap();
        assert_abs_diff_eq!(gartner_ellis(&m, 1.0).unwrap(), 0.125, epsilon = 1e-8);
    }
}

//! Catalog of Lévy families as Laplace-exponent objects.
//!
//! Every exponent is a closed form with exact first and second derivatives.
//! Gamma ratios are written with 1/Γ so that removable singularities
//! (m = 0 for the Gamma-ratio families, m = −1 for the Cauchy modulus)
//! are ordinary points of an entire factor.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{digamma_unchecked, gamma_jet, lgamma, rgamma_jet, trigamma_pos};
use crate::numerics::Jet;

/// Family tags, as used by [`make_model`] and the descriptor format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    BrownianDrift,
    CpPlusDrift,
    CpMinusDrift,
    SawTooth,
    StableConditioned,
    CsbpImmigration,
    HypergeometricStable,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 7] = [
        FamilyKind::BrownianDrift,
        FamilyKind::CpPlusDrift,
        FamilyKind::CpMinusDrift,
        FamilyKind::SawTooth,
        FamilyKind::StableConditioned,
        FamilyKind::CsbpImmigration,
        FamilyKind::HypergeometricStable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::BrownianDrift => "brownian",
            FamilyKind::CpPlusDrift => "cp-plus",
            FamilyKind::CpMinusDrift => "cp-minus",
            FamilyKind::SawTooth => "sawtooth",
            FamilyKind::StableConditioned => "stable-conditioned",
            FamilyKind::CsbpImmigration => "csbp",
            FamilyKind::HypergeometricStable => "hypergeometric",
        }
    }

    /// Parameter names in positional order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyKind::BrownianDrift => &["nu"],
            FamilyKind::CpPlusDrift => &["drift", "beta", "gamma"],
            FamilyKind::CpMinusDrift => &["beta", "gamma"],
            FamilyKind::SawTooth => &["beta", "gamma"],
            FamilyKind::StableConditioned => &["alpha", "c"],
            FamilyKind::CsbpImmigration => &["kappa", "delta", "c"],
            FamilyKind::HypergeometricStable => &["alpha", "dim"],
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown family '{name}'")))
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A Lévy family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// ξ_t = 2B_t + 2νt.
    BrownianDrift { nu: f64 },
    /// ξ_t = d·t + Pois(β, γ)_t.
    CpPlusDrift { drift: f64, beta: f64, gamma: f64 },
    /// ξ_t = −t + Pois(β, γ)_t.
    CpMinusDrift { beta: f64, gamma: f64 },
    /// ξ_t = t − Pois(β, γ)_t.
    SawTooth { beta: f64, gamma: f64 },
    /// Spectrally negative α-stable process conditioned to stay positive.
    StableConditioned { alpha: f64, c: f64 },
    /// Continuous-state branching process with immigration.
    CsbpImmigration { kappa: f64, delta: f64, c: f64 },
    /// Hypergeometric-stable process; (α, d) = (1, d) is the d-dimensional Cauchy modulus.
    HypergeometricStable { alpha: f64, dim: f64 },
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::BrownianDrift { .. } => FamilyKind::BrownianDrift,
            Family::CpPlusDrift { .. } => FamilyKind::CpPlusDrift,
            Family::CpMinusDrift { .. } => FamilyKind::CpMinusDrift,
            Family::SawTooth { .. } => FamilyKind::SawTooth,
            Family::StableConditioned { .. } => FamilyKind::StableConditioned,
            Family::CsbpImmigration { .. } => FamilyKind::CsbpImmigration,
            Family::HypergeometricStable { .. } => FamilyKind::HypergeometricStable,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Family::BrownianDrift { nu } => vec![nu],
            Family::CpPlusDrift { drift, beta, gamma } => vec![drift, beta, gamma],
            Family::CpMinusDrift { beta, gamma } => vec![beta, gamma],
            Family::SawTooth { beta, gamma } => vec![beta, gamma],
            Family::StableConditioned { alpha, c } => vec![alpha, c],
            Family::CsbpImmigration { kappa, delta, c } => vec![kappa, delta, c],
            Family::HypergeometricStable { alpha, dim } => vec![alpha, dim],
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Construction(format!("{}: {msg}", self.kind())));
        let finite = self.params().iter().all(|p| p.is_finite());
        if !finite {
            return fail("parameters must be finite");
        }
        match *self {
            Family::BrownianDrift { nu } if !(nu > 0.0) => fail("requires nu > 0"),
            Family::CpPlusDrift { drift, beta, gamma } => {
                if drift < 0.0 {
                    fail("requires drift >= 0")
                } else if beta < 0.0 {
                    fail("requires beta >= 0")
                } else if !(gamma > 0.0) {
                    fail("requires gamma > 0")
                } else if !(drift + beta / gamma > 0.0) {
                    fail("requires drift + beta/gamma > 0")
                } else {
                    Ok(())
                }
            }
            Family::CpMinusDrift { beta, gamma } if !(gamma > 0.0 && gamma < beta) => {
                fail("requires 0 < gamma < beta")
            }
            Family::SawTooth { beta, gamma } if !(beta > 0.0 && beta < gamma) => {
                fail("requires 0 < beta < gamma")
            }
            Family::StableConditioned { alpha, c } => {
                if !(alpha > 1.0 && alpha < 2.0) {
                    fail("requires alpha in (1, 2)")
                } else if !(c > 0.0) {
                    fail("requires c > 0")
                } else {
                    Ok(())
                }
            }
            Family::CsbpImmigration { kappa, delta, c } => {
                if !(kappa > 0.0 && kappa <= 1.0) {
                    fail("requires kappa in (0, 1]")
                } else if !(delta > kappa / (kappa + 1.0)) {
                    fail("requires delta > kappa/(kappa+1)")
                } else if !(c > 0.0) {
                    fail("requires c > 0")
                } else {
                    Ok(())
                }
            }
            Family::HypergeometricStable { alpha, dim } => {
                if !(alpha > 0.0 && alpha < dim) {
                    fail("requires 0 < alpha < d")
                } else if alpha >= 2.0 {
                    fail("requires alpha < 2 (stable index)")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Open domain (m₋, m₊) of the untilted exponent.
    fn domain(&self) -> (f64, f64) {
        match *self {
            Family::BrownianDrift { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Family::CpPlusDrift { gamma, .. } | Family::CpMinusDrift { gamma, .. } => {
                (f64::NEG_INFINITY, gamma)
            }
            Family::SawTooth { gamma, .. } => (-gamma, f64::INFINITY),
            Family::StableConditioned { alpha, .. } => (-alpha, f64::INFINITY),
            Family::CsbpImmigration { kappa, .. } => (f64::NEG_INFINITY, kappa),
            Family::HypergeometricStable { alpha, dim } => (-dim, alpha),
        }
    }

    /// ψ and its first two derivatives at `m` (inside the domain).
    fn jet(&self, m: f64) -> Jet {
        match *self {
            Family::BrownianDrift { nu } => Jet::new(2.0 * m * (m + nu), 4.0 * m + 2.0 * nu, 4.0),
            Family::CpPlusDrift { drift, beta, gamma } => {
                compound_poisson_up(drift, beta, gamma, m)
            }
            Family::CpMinusDrift { beta, gamma } => compound_poisson_up(-1.0, beta, gamma, m),
            Family::SawTooth { beta, gamma } => {
                let u = gamma + m;
                Jet::new(
                    m - beta * m / u,
                    1.0 - beta * gamma / (u * u),
                    2.0 * beta * gamma / (u * u * u),
                )
            }
            Family::StableConditioned { alpha, c } => {
                // c Γ(m + α) / Γ(m)
                gamma_ratio(alpha, 0.0, 1.0, m).scale(c)
            }
            Family::CsbpImmigration { kappa, delta, c } => {
                // c (κ − (κ+1)δ − m) Γ(κ − m) / Γ(−m)
                let lin = Jet::new(kappa - (kappa + 1.0) * delta - m, -1.0, 0.0);
                (lin * gamma_ratio(kappa, 0.0, -1.0, m)).scale(c)
            }
            Family::HypergeometricStable { alpha, dim } => {
                // −2^α Γ((α−m)/2)/Γ(−m/2) · Γ((m+d)/2)/Γ((m+d−α)/2)
                let left = gamma_ratio(alpha / 2.0, 0.0, -0.5, m);
                let right = gamma_ratio(dim / 2.0, (dim - alpha) / 2.0, 0.5, m);
                (left * right).scale(-(2f64.powf(alpha)))
            }
        }
    }
}

/// Γ(a₀ + k·m) / Γ(b₀ + k·m) as a jet in m.
///
/// Uses log-Gamma differences when both arguments are positive, so large
/// arguments do not overflow; otherwise the product with the entire 1/Γ.
fn gamma_ratio(a0: f64, b0: f64, k: f64, m: f64) -> Jet {
    let (a, b) = (a0 + k * m, b0 + k * m);
    if a > 0.0 && b > 0.0 {
        let r = (lgamma(a) - lgamma(b)).exp();
        let dpsi = digamma_unchecked(a) - digamma_unchecked(b);
        let dtri = trigamma_pos(a) - trigamma_pos(b);
        Jet::new(r, k * r * dpsi, k * k * r * (dpsi * dpsi + dtri))
    } else {
        (gamma_jet(a) * rgamma_jet(b)).chain_affine(k)
    }
}

// m(d + β/(γ − m)) for drift d (d = −1 for the CP-minus family).
fn compound_poisson_up(drift: f64, beta: f64, gamma: f64, m: f64) -> Jet {
    let u = gamma - m;
    Jet::new(
        drift * m + beta * m / u,
        drift + beta * gamma / (u * u),
        2.0 * beta * gamma / (u * u * u),
    )
}

/// A Lévy family instance, possibly Esscher-tilted.
///
/// The exponent is ψ(θ) = ψ_base(tilt + θ) − ψ_base(tilt) on
/// (m₋ − tilt, m₊ − tilt).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyModel {
    family: Family,
    tilt: f64,
    psi_at_tilt: f64,
}

impl LevyModel {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(Self {
            family,
            tilt: 0.0,
            psi_at_tilt: 0.0,
        })
    }

    pub fn brownian(nu: f64) -> Result<Self> {
        Self::new(Family::BrownianDrift { nu })
    }

    pub fn cp_plus(drift: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(Family::CpPlusDrift { drift, beta, gamma })
    }

    pub fn cp_minus(beta: f64, gamma: f64) -> Result<Self> {
        Self::new(Family::CpMinusDrift { beta, gamma })
    }

    pub fn sawtooth(beta: f64, gamma: f64) -> Result<Self> {
        Self::new(Family::SawTooth { beta, gamma })
    }

    pub fn stable_conditioned(alpha: f64, c: f64) -> Result<Self> {
        Self::new(Family::StableConditioned { alpha, c })
    }

    pub fn csbp(kappa: f64, delta: f64, c: f64) -> Result<Self> {
        Self::new(Family::CsbpImmigration { kappa, delta, c })
    }

    pub fn hypergeometric(alpha: f64, dim: f64) -> Result<Self> {
        Self::new(Family::HypergeometricStable { alpha, dim })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind()
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn m_minus(&self) -> f64 {
        self.family.domain().0 - self.tilt
    }

    pub fn m_plus(&self) -> f64 {
        self.family.domain().1 - self.tilt
    }

    pub fn in_domain(&self, m: f64) -> bool {
        m > self.m_minus() && m < self.m_plus()
    }

    fn check(&self, m: f64) -> Result<()> {
        if m.is_nan() || !self.in_domain(m) {
            return Err(Error::Domain(format!(
                "m = {m} outside open domain ({}, {})",
                self.m_minus(),
                self.m_plus()
            )));
        }
        Ok(())
    }

    /// ψ, ψ', ψ'' at `m` without the domain check.
    pub(crate) fn jet_unchecked(&self, m: f64) -> Jet {
        let j = self.family.jet(self.tilt + m);
        Jet::new(j.value - self.psi_at_tilt, j.d1, j.d2)
    }

    /// Laplace exponent ψ(m).
    pub fn psi(&self, m: f64) -> Result<f64> {
        self.check(m)?;
        Ok(self.jet_unchecked(m).value)
    }

    /// (ψ'(m), ψ''(m)).
    pub fn psi_derivs(&self, m: f64) -> Result<(f64, f64)> {
        self.check(m)?;
        let j = self.jet_unchecked(m);
        Ok((j.d1, j.d2))
    }

    /// ψ, ψ', ψ'' in one evaluation.
    pub fn psi_jet(&self, m: f64) -> Result<Jet> {
        self.check(m)?;
        Ok(self.jet_unchecked(m))
    }

    /// ψ evaluated outside the open domain is +∞ (the convex extension).
    pub(crate) fn psi_extended(&self, m: f64) -> f64 {
        if self.in_domain(m) {
            self.jet_unchecked(m).value
        } else {
            f64::INFINITY
        }
    }

    /// Esscher transform: exponent θ ↦ ψ(m + θ) − ψ(m).
    pub fn esscher(&self, m: f64) -> Result<Self> {
        self.check(m)?;
        let tilt = self.tilt + m;
        let psi_at_tilt = if tilt == 0.0 {
            0.0
        } else {
            self.family.jet(tilt).value
        };
        Ok(Self {
            family: self.family,
            tilt,
            psi_at_tilt,
        })
    }

    /// E ξ₁ = ψ'(0).
    pub fn mean(&self) -> f64 {
        self.jet_unchecked(0.0).d1
    }

    /// The untilted family whose law equals this (possibly tilted) model,
    /// for families closed under exponential tilting.
    pub fn equivalent_family(&self) -> Option<Family> {
        let t = self.tilt;
        match self.family {
            Family::BrownianDrift { nu } => Some(Family::BrownianDrift { nu: nu + 2.0 * t }),
            Family::CpPlusDrift { drift, beta, gamma } => Some(Family::CpPlusDrift {
                drift,
                beta: beta * gamma / (gamma - t),
                gamma: gamma - t,
            }),
            Family::CpMinusDrift { beta, gamma } => Some(Family::CpMinusDrift {
                beta: beta * gamma / (gamma - t),
                gamma: gamma - t,
            }),
            Family::SawTooth { beta, gamma } => Some(Family::SawTooth {
                beta: beta * gamma / (gamma + t),
                gamma: gamma + t,
            }),
            _ => None,
        }
    }

    /// Key-value descriptor of this model.
    pub fn descriptor(&self) -> ModelDescriptor {
        let kind = self.kind();
        let params = kind
            .param_names()
            .iter()
            .zip(self.family.params())
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        ModelDescriptor {
            family: kind.name().to_string(),
            tilt: self.tilt,
            params,
        }
    }

    pub fn from_descriptor(desc: &ModelDescriptor) -> Result<Self> {
        let kind = FamilyKind::from_name(&desc.family)?;
        let names = kind.param_names();
        for key in desc.params.keys() {
            if !names.contains(&key.as_str()) {
                return Err(Error::Parse(format!(
                    "unexpected parameter '{key}' for {kind}"
                )));
            }
        }
        let params = names
            .iter()
            .map(|n| {
                desc.params
                    .get(*n)
                    .copied()
                    .ok_or_else(|| Error::Parse(format!("missing parameter '{n}' for {kind}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let base = make_model(kind, &params)?;
        if desc.tilt == 0.0 {
            Ok(base)
        } else {
            base.esscher(desc.tilt)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.descriptor()).expect("descriptor is always serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let desc: ModelDescriptor =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_descriptor(&desc)
    }
}

impl fmt::Display for LevyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind())?;
        for (i, (name, v)) in self
            .kind()
            .param_names()
            .iter()
            .zip(self.family.params())
            .enumerate()
        {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}={v}")?;
        }
        if self.tilt != 0.0 {
            write!(f, "; tilt={}", self.tilt)?;
        }
        f.write_str(")")
    }
}

/// Serialized form of a model: `family`, `tilt`, and named parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub family: String,
    #[serde(default)]
    pub tilt: f64,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

/// Build a model from a family tag and its positional parameters
/// (see [`FamilyKind::param_names`]).
pub fn make_model(kind: FamilyKind, params: &[f64]) -> Result<LevyModel> {
    let names = kind.param_names();
    if params.len() != names.len() {
        return Err(Error::Construction(format!(
            "{kind} expects {} parameters ({}), got {}",
            names.len(),
            names.join(", "),
            params.len()
        )));
    }
    let p = params;
    let family = match kind {
        FamilyKind::BrownianDrift => Family::BrownianDrift { nu: p[0] },
        FamilyKind::CpPlusDrift => Family::CpPlusDrift {
            drift: p[0],
            beta: p[1],
            gamma: p[2],
        },
        FamilyKind::CpMinusDrift => Family::CpMinusDrift {
            beta: p[0],
            gamma: p[1],
        },
        FamilyKind::SawTooth => Family::SawTooth {
            beta: p[0],
            gamma: p[1],
        },
        FamilyKind::StableConditioned => Family::StableConditioned {
            alpha: p[0],
            c: p[1],
        },
        FamilyKind::CsbpImmigration => Family::CsbpImmigration {
            kappa: p[0],
            delta: p[1],
            c: p[2],
        },
        FamilyKind::HypergeometricStable => Family::HypergeometricStable {
            alpha: p[0],
            dim: p[1],
        },
    };
    LevyModel::new(family)
}

/// The models used in worked examples and figures.
pub fn catalog() -> Vec<LevyModel> {
    vec![
        LevyModel::brownian(1.0).unwrap(),
        LevyModel::cp_plus(1.0, 2.0, 1.0).unwrap(),
        LevyModel::cp_minus(2.0, 1.0).unwrap(),
        LevyModel::sawtooth(1.0, 3.0).unwrap(),
        LevyModel::stable_conditioned(1.5, 1.0).unwrap(),
        LevyModel::csbp(0.5, 1.0, 1.0).unwrap(),
        LevyModel::hypergeometric(1.0, 3.0).unwrap(),
    ]
}

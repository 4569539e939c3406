use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::rng::{path_rng, Lane};
use super::SimConfig;
use crate::error::{Error, Result};
use crate::models::{Family, LevyModel};

/// How ξ moves between two consecutive grid nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    /// ξ is linear with the given slope (event-exact compound-Poisson paths).
    LinearDrift { slope: f64 },
    /// Exact Gaussian increment; ξ between nodes is not resolved.
    GaussianIncrement,
}

/// One sampled Lévy path.
///
/// `xi[i]` is the right-continuous value at `times[i]` and `jumps[i]` the
/// jump at that node, so the left limit is `xi[i] - jumps[i]`.
/// `kinds[i]` describes the interval `[times[i], times[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    pub times: Vec<f64>,
    pub xi: Vec<f64>,
    pub jumps: Vec<f64>,
    pub kinds: Vec<SegmentKind>,
}

impl PathGrid {
    /// Validated constructor.
    pub fn new(
        times: Vec<f64>,
        xi: Vec<f64>,
        jumps: Vec<f64>,
        kinds: Vec<SegmentKind>,
    ) -> Result<Self> {
        let n = times.len();
        let bad = |what: &str| Err(Error::Domain(format!("invalid path grid: {what}")));
        if n < 2 || xi.len() != n || jumps.len() != n || kinds.len() != n - 1 {
            return bad("inconsistent lengths");
        }
        if times[0] != 0.0 || xi[0] != 0.0 {
            return bad("must start at time 0 with xi = 0");
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return bad("times must be strictly increasing");
        }
        if !xi.iter().all(|v| v.is_finite()) {
            return bad("xi must be finite");
        }
        Ok(Self {
            times,
            xi,
            jumps,
            kinds,
        })
    }

    /// The deterministic path ξ_s = slope·s on [0, horizon].
    pub fn linear(slope: f64, horizon: f64) -> Result<Self> {
        Self::new(
            vec![0.0, horizon],
            vec![0.0, slope * horizon],
            vec![0.0, 0.0],
            vec![SegmentKind::LinearDrift { slope }],
        )
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty grid")
    }

    pub fn n_segments(&self) -> usize {
        self.kinds.len()
    }

    /// Number of jumps on the path.
    pub fn n_jumps(&self) -> usize {
        self.jumps.iter().filter(|j| **j != 0.0).count()
    }

    /// Value just before node `i`.
    pub fn left_limit(&self, i: usize) -> f64 {
        self.xi[i] - self.jumps[i]
    }

    /// Index of the segment containing time `u` (clamped to the grid).
    pub fn segment_of(&self, u: f64) -> usize {
        let k = self.times.partition_point(|&t| t <= u);
        k.saturating_sub(1).min(self.n_segments() - 1)
    }

    /// ξ at time `u`: exact on drift segments, linear between Gaussian nodes.
    pub fn xi_at(&self, u: f64) -> f64 {
        let i = self.segment_of(u);
        let s = u - self.times[i];
        match self.kinds[i] {
            SegmentKind::LinearDrift { slope } => self.xi[i] + slope * s,
            SegmentKind::GaussianIncrement => {
                let dt = self.times[i + 1] - self.times[i];
                self.xi[i] + (self.left_limit(i + 1) - self.xi[i]) * s / dt
            }
        }
    }

    /// First time ξ exceeds `level` on the grid, exact on drift segments.
    /// Gaussian segments are checked at the nodes only.
    pub fn first_passage_nodes(&self, level: f64) -> Option<f64> {
        if self.xi[0] > level {
            return Some(0.0);
        }
        for i in 0..self.n_segments() {
            let end = self.left_limit(i + 1);
            if let SegmentKind::LinearDrift { slope } = self.kinds[i] {
                if end > level && slope > 0.0 && self.xi[i] <= level {
                    return Some(self.times[i] + (level - self.xi[i]) / slope);
                }
            } else if end > level {
                return Some(self.times[i + 1]);
            }
            if self.xi[i + 1] > level {
                return Some(self.times[i + 1]);
            }
        }
        None
    }
}

enum Dynamics {
    Brownian {
        nu: f64,
    },
    Compound {
        drift: f64,
        beta: f64,
        gamma: f64,
        sign: f64,
    },
}

fn dynamics(model: &LevyModel) -> Result<Dynamics> {
    let unsupported = || {
        Error::Capability(format!(
            "path simulation is available for brownian, cp-plus, cp-minus and sawtooth; {} \
             is not simulable (use simulate_cauchy_modulus for the Cauchy modulus)",
            model.kind()
        ))
    };
    match model.equivalent_family().ok_or_else(unsupported)? {
        Family::BrownianDrift { nu } => Ok(Dynamics::Brownian { nu }),
        Family::CpPlusDrift { drift, beta, gamma } => Ok(Dynamics::Compound {
            drift,
            beta,
            gamma,
            sign: 1.0,
        }),
        Family::CpMinusDrift { beta, gamma } => Ok(Dynamics::Compound {
            drift: -1.0,
            beta,
            gamma,
            sign: 1.0,
        }),
        Family::SawTooth { beta, gamma } => Ok(Dynamics::Compound {
            drift: 1.0,
            beta,
            gamma,
            sign: -1.0,
        }),
        _ => Err(unsupported()),
    }
}

/// Incremental sampler; extending the horizon continues the same random
/// stream, so a longer path always has the shorter one as its prefix.
pub struct PathSampler {
    dynamics: Dynamics,
    step: f64,
    rng: ChaCha8Rng,
    grid: PathGrid,
    next_jump: f64,
    open_end: bool,
}

impl PathSampler {
    pub fn new(model: &LevyModel, cfg: &SimConfig, path_id: u64) -> Result<Self> {
        cfg.validate()?;
        let dynamics = dynamics(model)?;
        let mut rng = path_rng(cfg.seed, Lane::Path, path_id);
        let next_jump = match dynamics {
            Dynamics::Compound { beta, .. } if beta > 0.0 => {
                Exp::new(beta).expect("beta > 0").sample(&mut rng)
            }
            _ => f64::INFINITY,
        };
        let grid = PathGrid {
            times: vec![0.0],
            xi: vec![0.0],
            jumps: vec![0.0],
            kinds: vec![],
        };
        Ok(Self {
            dynamics,
            step: cfg.step,
            rng,
            grid,
            next_jump,
            open_end: false,
        })
    }

    pub fn grid(&self) -> &PathGrid {
        &self.grid
    }

    pub fn into_grid(self) -> PathGrid {
        self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    /// Extend the path so that its horizon is at least `h`.
    pub fn extend_to(&mut self, h: f64) {
        if self.grid.times.len() > 1 && self.grid.horizon() >= h {
            return;
        }
        match self.dynamics {
            Dynamics::Brownian { nu } => {
                let g = &mut self.grid;
                while *g.times.last().unwrap() < h {
                    let k = g.times.len();
                    let t = k as f64 * self.step;
                    let dt = t - g.times[k - 1];
                    let z: f64 = StandardNormal.sample(&mut self.rng);
                    let x = g.xi[k - 1] + 2.0 * nu * dt + 2.0 * dt.sqrt() * z;
                    g.times.push(t);
                    g.xi.push(x);
                    g.jumps.push(0.0);
                    g.kinds.push(SegmentKind::GaussianIncrement);
                }
            }
            Dynamics::Compound {
                drift,
                beta,
                gamma,
                sign,
            } => {
                let g = &mut self.grid;
                if self.open_end {
                    g.times.pop();
                    g.xi.pop();
                    g.jumps.pop();
                    g.kinds.pop();
                }
                let sizes = Exp::new(gamma).expect("gamma > 0");
                let gaps = (beta > 0.0).then(|| Exp::new(beta).expect("beta > 0"));
                while self.next_jump <= h {
                    let (t0, x0) = (*g.times.last().unwrap(), *g.xi.last().unwrap());
                    let t = self.next_jump;
                    let j = sign * sizes.sample(&mut self.rng);
                    g.times.push(t);
                    g.xi.push(x0 + drift * (t - t0) + j);
                    g.jumps.push(j);
                    g.kinds.push(SegmentKind::LinearDrift { slope: drift });
                    self.next_jump += gaps
                        .as_ref()
                        .map_or(f64::INFINITY, |e| e.sample(&mut self.rng));
                }
                let (t0, x0) = (*g.times.last().unwrap(), *g.xi.last().unwrap());
                if t0 < h {
                    g.times.push(h);
                    g.xi.push(x0 + drift * (h - t0));
                    g.jumps.push(0.0);
                    g.kinds.push(SegmentKind::LinearDrift { slope: drift });
                    self.open_end = true;
                } else {
                    self.open_end = false;
                }
            }
        }
    }
}

/// Sample ξ on [0, cfg.horizon].
pub fn sample_levy_path(model: &LevyModel, cfg: &SimConfig, path_id: u64) -> Result<PathGrid> {
    let mut s = PathSampler::new(model, cfg, path_id)?;
    s.extend_to(cfg.horizon);
    Ok(s.into_grid())
}

/// ∫ over [0, dt] of e^{α(x0 + a s)} ds.
fn drift_integral(x0: f64, slope: f64, dt: f64, alpha: f64) -> f64 {
    let k = alpha * slope;
    let base = (alpha * x0).exp();
    if k == 0.0 {
        base * dt
    } else {
        base * (k * dt).exp_m1() / k
    }
}

/// The exponential functional A(u) = ∫₀ᵘ e^{αξ_s} ds of one path.
#[derive(Debug, Clone)]
pub struct ExpFunctional<'a> {
    path: &'a PathGrid,
    alpha: f64,
    cum: Vec<f64>,
}

/// A of a path: exact on drift segments, trapezoid on Gaussian ones.
pub fn exp_functional(path: &PathGrid, alpha: f64) -> Result<ExpFunctional<'_>> {
    let mut cum = Vec::with_capacity(path.times.len());
    cum.push(0.0);
    let mut acc = 0.0;
    for i in 0..path.n_segments() {
        let dt = path.times[i + 1] - path.times[i];
        acc += match path.kinds[i] {
            SegmentKind::LinearDrift { slope } => drift_integral(path.xi[i], slope, dt, alpha),
            SegmentKind::GaussianIncrement => {
                0.5 * ((alpha * path.xi[i]).exp() + (alpha * path.left_limit(i + 1)).exp()) * dt
            }
        };
        cum.push(acc);
    }
    if !acc.is_finite() {
        return Err(Error::Overflow(format!(
            "exponential functional overflows on horizon {}; reduce the horizon or t",
            path.horizon()
        )));
    }
    Ok(ExpFunctional { path, alpha, cum })
}

impl ExpFunctional<'_> {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn path(&self) -> &PathGrid {
        self.path
    }

    /// A at the grid nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.cum
    }

    /// A(horizon).
    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// A(u) for u in [0, horizon].
    pub fn value(&self, u: f64) -> f64 {
        let p = self.path;
        let i = p.segment_of(u);
        let s = (u - p.times[i]).max(0.0);
        match p.kinds[i] {
            SegmentKind::LinearDrift { slope } => {
                self.cum[i] + drift_integral(p.xi[i], slope, s, self.alpha)
            }
            SegmentKind::GaussianIncrement => {
                let dt = p.times[i + 1] - p.times[i];
                self.cum[i] + (self.cum[i + 1] - self.cum[i]) * s / dt
            }
        }
    }

    /// τ(t) = inf{u : A(u) ≥ t}.
    pub fn clock_tau(&self, t: f64) -> Result<f64> {
        clock_tau(self, t)
    }
}

/// τ(t) = inf{u ≥ 0 : A(u) ≥ t}: logarithmic inversion on drift segments,
/// linear inversion on trapezoid segments.
pub fn clock_tau(a: &ExpFunctional<'_>, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("clock target t = {t} must be >= 0")));
    }
    let p = a.path;
    if t == 0.0 {
        return Ok(0.0);
    }
    if t > a.total() {
        return Err(Error::HorizonExceeded {
            t,
            horizon: p.horizon(),
        });
    }
    let i = (a.cum.partition_point(|&c| c < t) - 1).min(p.n_segments() - 1);
    let dt = p.times[i + 1] - p.times[i];
    let r = t - a.cum[i];
    let s = match p.kinds[i] {
        SegmentKind::LinearDrift { slope } => {
            let k = a.alpha * slope;
            let w = r * (-a.alpha * p.xi[i]).exp();
            if k == 0.0 {
                w
            } else {
                (k * w).ln_1p() / k
            }
        }
        SegmentKind::GaussianIncrement => dt * r / (a.cum[i + 1] - a.cum[i]),
    };
    Ok(p.times[i] + s.clamp(0.0, dt))
}

/// The pssMp X_s = a·exp ξ(τ(s a^{−α})) built from one Lévy path.
#[derive(Debug, Clone)]
pub struct LampertiPath<'a> {
    fx: ExpFunctional<'a>,
    a: f64,
    alpha: f64,
    /// X-time of each ξ node: a^α·A(u_i).
    pub x_times: Vec<f64>,
    /// X at each node (right-continuous).
    pub x_values: Vec<f64>,
}

/// Lamperti transform of `path` started at `a`.
pub fn lamperti_pssmp(path: &PathGrid, a: f64, alpha: f64) -> Result<LampertiPath<'_>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("start point a = {a} must be > 0")));
    }
    let fx = exp_functional(path, alpha)?;
    let scale = a.powf(alpha);
    let x_times = fx.cum.iter().map(|c| scale * c).collect();
    let x_values = path.xi.iter().map(|x| a * x.exp()).collect();
    Ok(LampertiPath {
        fx,
        a,
        alpha,
        x_times,
        x_values,
    })
}

impl LampertiPath<'_> {
    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn exp_functional(&self) -> &ExpFunctional<'_> {
        &self.fx
    }

    /// Last X-time covered by the path.
    pub fn horizon(&self) -> f64 {
        *self.x_times.last().unwrap()
    }

    /// T(s) = ∫₀ˢ X_r^{−α} dr, integrated on the X side: on a drift segment
    /// X^α is affine in time, on a trapezoid segment T is interpolated.
    pub fn clock(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("time s = {s} must be >= 0")));
        }
        if s > self.horizon() {
            return Err(Error::HorizonExceeded {
                t: s,
                horizon: self.horizon(),
            });
        }
        let p = self.fx.path;
        let i = (self.x_times.partition_point(|&c| c <= s).max(1) - 1).min(p.n_segments() - 1);
        let dt = p.times[i + 1] - p.times[i];
        let r = s - self.x_times[i];
        let u = match p.kinds[i] {
            SegmentKind::LinearDrift { slope } => {
                let c = self.alpha * slope;
                let w = r / self.x_values[i].powf(self.alpha);
                if c == 0.0 {
                    w
                } else {
                    (c * w).ln_1p() / c
                }
            }
            SegmentKind::GaussianIncrement => dt * r / (self.x_times[i + 1] - self.x_times[i]),
        };
        Ok(p.times[i] + u.clamp(0.0, dt))
    }

    /// X at X-time `s`.
    pub fn x_at(&self, s: f64) -> Result<f64> {
        let u = self.clock(s)?;
        Ok(self.a * self.fx.path.xi_at(u).exp())
    }
}

/// Clock values of one path at one time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockSample {
    pub t: f64,
    /// τ(t) on the Lévy side.
    pub tau: f64,
    /// T(t·a^α) computed on the X side.
    pub t_clock: f64,
    pub path_id: u64,
}

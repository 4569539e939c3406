use rand_distr::{Distribution, StandardNormal};

use super::rng::{path_rng, Lane};
use super::SimConfig;
use crate::error::{Error, Result};

/// Modulus of a d-dimensional Cauchy process with its clock T(t) = ∫₀ᵗ ds/X_s.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyPath {
    pub dim: usize,
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    /// T at each node (trapezoid rule).
    pub clock: Vec<f64>,
}

impl CauchyPath {
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn locate(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) || t > self.horizon() {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.horizon(),
            });
        }
        Ok((self.times.partition_point(|&s| s <= t).max(1) - 1).min(self.times.len() - 2))
    }

    /// T(t); exact node value at stop times, linear in between.
    pub fn clock_at(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        Ok(self.clock[i] + w * (self.clock[i + 1] - self.clock[i]))
    }

    /// X at the last node not after t.
    pub fn x_at(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        Ok(if t == self.times[i + 1] {
            self.x[i + 1]
        } else {
            self.x[i]
        })
    }
}

/// Simulate on [0, cfg.horizon] started at (cfg.start, 0, …, 0).
pub fn simulate_cauchy_modulus(dim: usize, cfg: &SimConfig, path_id: u64) -> Result<CauchyPath> {
    simulate_cauchy_to(dim, cfg, path_id, &[cfg.horizon])
}

/// Simulate up to the largest of `stops`, landing exactly on every stop.
///
/// Steps are proportional to the current modulus, Δ = cfg.step·X. Each
/// increment is Cauchy with scale Δ, sampled as (Δ/|N|)·G: the Gaussian
/// vector G subordinated by the stable-1/2 variable Δ²/N², whose Laplace
/// transform is exp(−Δ√(2λ)). The process has index 1.
pub fn simulate_cauchy_to(
    dim: usize,
    cfg: &SimConfig,
    path_id: u64,
    stops: &[f64],
) -> Result<CauchyPath> {
    if dim < 2 {
        return Err(Error::Domain(format!(
            "Cauchy modulus requires d >= 2, got {dim}"
        )));
    }
    cfg.validate()?;
    if stops.is_empty() || !stops.iter().all(|s| *s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(
            "stop times must be positive and finite".into(),
        ));
    }
    let mut stops = stops.to_vec();
    stops.sort_by(f64::total_cmp);

    let mut rng = path_rng(cfg.seed, Lane::Cauchy, path_id);
    let mut y = vec![0.0; dim];
    y[0] = cfg.start;
    let mut x = cfg.start;
    let (mut t, mut clock) = (0.0, 0.0);
    let mut path = CauchyPath {
        dim,
        times: vec![0.0],
        x: vec![x],
        clock: vec![0.0],
    };
    for &stop in &stops {
        while t < stop {
            let dt = (cfg.step * x).min(stop - t);
            let n: f64 = StandardNormal.sample(&mut rng);
            let scale = dt / n.abs();
            for c in y.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *c += scale * g;
            }
            let next = y.iter().map(|c| c * c).sum::<f64>().sqrt();
            clock += 0.5 * (1.0 / x + 1.0 / next) * dt;
            t = if dt == stop - t { stop } else { t + dt };
            x = next;
            path.times.push(t);
            path.x.push(x);
            path.clock.push(clock);
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dimension_one() {
        assert!(matches!(
            simulate_cauchy_modulus(1, &SimConfig::new(1, 1), 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn lands_on_stops_and_is_reproducible() {
        let cfg = SimConfig::new(3, 1).with_step(0.05);
        let p = simulate_cauchy_to(3, &cfg, 9, &[2.0, 10.0]).unwrap();
        assert!(p.times.contains(&2.0));
        assert_eq!(p.horizon(), 10.0);
        assert_eq!(p, simulate_cauchy_to(3, &cfg, 9, &[10.0, 2.0]).unwrap());
        assert!(p.clock.windows(2).all(|w| w[1] > w[0]));
    }
}

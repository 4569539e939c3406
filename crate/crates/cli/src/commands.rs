use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pssmp::moments::{moment_ledger, F_of_m};
use pssmp::rate::{
    classify_boundaries, fmt17, profile, rate_curve, write_rate_csv, RatePoint, FIGURES,
};
use pssmp::sim::{
    clock_samples, estimate_clt, estimate_ldp_slope, estimate_lln, first_passage_check,
    simulate_cauchy_to, tilted_identity_check, SimConfig, SimTarget,
};
use pssmp::{Error, LevyModel};

use crate::args::{Command, OutArgs};
use crate::error::{CliError, CliResult};

/// A finished command: `key: value` report lines and named CSV tables.
#[derive(Debug, Default)]
pub struct Output {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub lines: String,
    pub tables: Vec<(String, String)>,
}

impl Output {
    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.lines, "{key}: {value}");
    }

    fn raw(&mut self, text: &str) {
        // The run header already carries the model and seed.
        let text: String = text
            .lines()
            .filter(|l| !l.starts_with("model: ") && !l.starts_with("seed: "))
            .map(|l| format!("{l}\n"))
            .collect();
        self.lines.push_str(&text);
    }

    /// Write tables under `out` (returning their paths) or keep them inline.
    pub fn emit(&self, out: Option<&Path>) -> CliResult<String> {
        let mut text = String::new();
        match out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                for (name, body) in &self.tables {
                    let path = dir.join(name);
                    fs::write(&path, body)?;
                    let _ = writeln!(text, "output: {}", path.display());
                }
            }
            None => {
                for (name, body) in &self.tables {
                    let _ = writeln!(text, "table: {name}");
                    text.push_str(body);
                }
            }
        }
        Ok(text)
    }
}

fn curve_csv(points: &[RatePoint]) -> String {
    let mut buf = Vec::new();
    write_rate_csv(&mut buf, points).expect("write to Vec");
    String::from_utf8(buf).expect("ascii output")
}

fn describe(target: &SimTarget) -> String {
    match target {
        SimTarget::Levy(m) => m.to_string(),
        SimTarget::CauchyModulus { dim } => format!("cauchy-modulus(d={dim})"),
    }
}

/// Run a parsed command, returning its output and the `--out` directory.
pub fn run(cmd: Command) -> CliResult<(Output, Option<OutArgs>)> {
    let mut o = Output::default();
    let out = match cmd {
        Command::Profile { model } => {
            let m = model.model()?;
            o.model = Some(m.to_string());
            let p = profile(&m)?;
            o.raw(&p.to_string());
            let (plus, zero) = classify_boundaries(&m, &p)?;
            o.line("boundary", plus);
            o.line("boundary", zero);
            None
        }
        Command::RateCurve {
            model,
            lo,
            hi,
            n,
            out,
        } => {
            let m = model.model()?;
            o.model = Some(m.to_string());
            let p = profile(&m)?;
            let lo = lo.unwrap_or(p.delta.0);
            let hi = hi.unwrap_or(if p.delta.1.is_finite() {
                p.delta.1
            } else {
                5.0 * p.tau_e
            });
            o.line("x_lo", lo);
            o.line("x_hi", hi);
            o.line("n", n);
            o.tables.push((
                "rate_curve.csv".into(),
                curve_csv(&rate_curve(&m, lo, hi, n)?),
            ));
            Some(out)
        }
        Command::Figures { out } => {
            if out.out.is_none() {
                return Err(CliError::Usage("figures requires --out".into()));
            }
            for fig in FIGURES {
                let points = rate_curve(&fig.model(), fig.x_lo, fig.x_hi, fig.n)?;
                o.line(
                    fig.name,
                    format!(
                        "{} on [{}, {}], {} points",
                        fig.caption, fig.x_lo, fig.x_hi, fig.n
                    ),
                );
                o.tables
                    .push((format!("{}.csv", fig.name), curve_csv(&points)));
            }
            Some(out)
        }
        Command::Simulate { model, sim, t, out } => {
            let target = model.target()?;
            let cfg = sim.config();
            cfg.validate()?;
            o.model = Some(describe(&target));
            o.seed = Some(cfg.seed);
            o.table_simulate(&target, &cfg, &t)?;
            Some(out)
        }
        Command::Lln { model, sim, t, out } => {
            let target = model.target()?;
            let cfg = sim.config();
            o.model = Some(describe(&target));
            o.seed = Some(cfg.seed);
            let rec = estimate_lln(&target, &cfg, &t)?;
            o.raw(&rec.header());
            for (row, z) in rec.rows.iter().zip(rec.z_scores()) {
                o.line("z_vs_reference", format!("t = {}: {}", row.t, fmt17(z)));
            }
            o.tables.push(("lln.csv".into(), rec.table_csv()));
            Some(out)
        }
        Command::Clt { model, sim, t, out } => {
            let target = model.target()?;
            let cfg = sim.config();
            o.model = Some(describe(&target));
            o.seed = Some(cfg.seed);
            o.raw(&estimate_clt(&target, &cfg, t)?.to_string());
            o.line("note", "no pass threshold; the limit law is conjectural");
            Some(out)
        }
        Command::Ldp {
            model,
            sim,
            x,
            eps,
            t,
            out,
        } => {
            let target = model.target()?;
            let cfg = sim.config();
            o.model = Some(describe(&target));
            o.seed = Some(cfg.seed);
            let r = estimate_ldp_slope(&target, &cfg, x, eps, &t)?;
            o.raw(&r.header());
            o.tables.push(("ldp.csv".into(), r.table_csv()));
            Some(out)
        }
        Command::Moments {
            model,
            sim,
            s,
            m,
            out,
        } => {
            let lm = model.model()?;
            let cfg = sim.config();
            o.model = Some(lm.to_string());
            o.seed = Some(cfg.seed);
            let ledger = moment_ledger(&lm, &s, &cfg)?;
            for n in &ledger.notes {
                o.line("note", n);
            }
            if let Some(m) = m {
                let f = F_of_m(&lm, m, &cfg)?;
                o.raw(&f.to_string());
            }
            o.tables.push(("moments.csv".into(), ledger.to_csv()));
            Some(out)
        }
        Command::CheckIdentities {
            model,
            sim,
            m,
            identity_t,
            theta,
            passage_t,
        } => {
            let lm = model.model()?;
            let cfg = sim.config();
            o.model = Some(lm.to_string());
            o.seed = Some(cfg.seed);
            check_identities(&mut o, &lm, &cfg, m, identity_t, theta, passage_t)?;
            None
        }
    };
    Ok((o, out))
}

impl Output {
    fn table_simulate(&mut self, target: &SimTarget, cfg: &SimConfig, ts: &[f64]) -> CliResult<()> {
        let rows: Vec<Vec<f64>> = cfg
            .exec
            .map(cfg.n_paths, |i| -> pssmp::Result<Vec<f64>> {
                let id = i as u64;
                match *target {
                    SimTarget::Levy(m) => {
                        let shrink = cfg.start.powf(-cfg.alpha);
                        let scaled: Vec<f64> = ts.iter().map(|t| t * shrink).collect();
                        Ok(clock_samples(&m, cfg, id, &scaled)?
                            .iter()
                            .map(|c| c.tau)
                            .collect())
                    }
                    SimTarget::CauchyModulus { dim } => {
                        let p = simulate_cauchy_to(dim, cfg, id, ts)?;
                        ts.iter().map(|&t| p.clock_at(t)).collect()
                    }
                }
            })
            .into_iter()
            .collect::<pssmp::Result<_>>()?;
        let mut csv = String::from("path_id,t,clock\n");
        for (id, row) in rows.iter().enumerate() {
            for (t, v) in ts.iter().zip(row) {
                let _ = writeln!(csv, "{id},{},{}", fmt17(*t), fmt17(*v));
            }
        }
        for (k, t) in ts.iter().enumerate() {
            let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            let mean = pssmp::stats::MeanEstimate::of(&col);
            self.line(
                "mean_clock",
                format!("t = {t}: {} +- {}", fmt17(mean.mean), fmt17(mean.stderr)),
            );
        }
        self.tables.push(("simulate.csv".into(), csv));
        Ok(())
    }
}

fn check_identities(
    o: &mut Output,
    model: &LevyModel,
    cfg: &SimConfig,
    m: Option<f64>,
    identity_t: f64,
    theta: f64,
    passage_t: f64,
) -> CliResult<()> {
    cfg.validate()?;
    let ts = [1.0, 10.0, 100.0];
    let worst = cfg
        .exec
        .map(cfg.n_paths.min(200), |i| -> pssmp::Result<f64> {
            let s = clock_samples(model, cfg, i as u64, &ts)?;
            Ok(s.iter()
                .map(|c| (c.tau - c.t_clock).abs() / (1.0 + c.tau))
                .fold(0.0, f64::max))
        })
        .into_iter()
        .collect::<pssmp::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    o.line("fundamental_relation_max_rel_diff", fmt17(worst));

    let p = profile(model)?;
    let m = m.unwrap_or_else(|| {
        let hi = model.m_plus();
        if 1.0 > p.m0 && 1.0 < hi {
            return 1.0;
        }
        let lo = if p.m0.is_finite() { p.m0 } else { hi - 1.5 };
        let hi = if hi.is_finite() { hi } else { lo + 2.0 };
        0.5 * (lo + hi)
    });
    o.line("identity_m", m);
    o.line("identity_t", identity_t);
    let id = tilted_identity_check(model, m, identity_t, cfg.start, cfg)?;
    o.raw(&id.to_string());

    match first_passage_check(model, cfg, theta, passage_t) {
        Ok(r) => o.raw(&r.to_string()),
        Err(Error::Capability(why)) => o.line("first_passage", format!("skipped ({why})")),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

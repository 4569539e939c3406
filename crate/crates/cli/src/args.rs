use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pssmp::exec::Exec;
use pssmp::models::{make_model, FamilyKind};
use pssmp::sim::{SimConfig, SimTarget};
use pssmp::LevyModel;

use crate::error::{CliError, CliResult};

/// Clocks of positive self-similar Markov processes: rate functions,
/// simulation estimators and exponential-functional moments.
#[derive(Debug, Parser)]
#[command(name = "pssmp", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the rate profile and boundary reports of a model.
    Profile {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Tabulate x, I(x), I'(x) on a uniform grid.
    RateCurve {
        #[command(flatten)]
        model: ModelArgs,
        /// Left end of the grid (default: left end of the rate domain).
        #[arg(long, allow_negative_numbers = true)]
        lo: Option<f64>,
        /// Right end of the grid (default: right end, or 5 times the mean clock rate).
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long, default_value_t = 201)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write the five reference rate-curve tables fig1.csv to fig5.csv.
    Figures {
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sample clock values T(t) per path.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Clock times (comma separated; `e^k` means exp(k)).
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_num)]
        t: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Ensemble mean of T(t)/log t against 1/psi'(0).
    Lln {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_num)]
        t: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// KS distance of the standardized clock to its Gaussian target.
    Clt {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_parser = parse_num)]
        t: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fitted slope of -log P(T(t)/log t near x) against log t.
    Ldp {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        x: f64,
        /// Window half-width (default 0.1 |x - 1/psi'(0)|).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_num)]
        t: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Moment ledger of the exponential functional and F(m).
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Moment orders.
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            default_value = "-3,-2,-1,-0.5,0.5"
        )]
        s: Vec<f64>,
        /// Also evaluate F(m) at this tilt.
        #[arg(long, allow_negative_numbers = true)]
        m: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fundamental relation, tilted identity and first-passage checks.
    CheckIdentities {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Tilt for the identity check (default: 1 when admissible, else the midpoint of the tilt window).
        #[arg(long, allow_negative_numbers = true)]
        m: Option<f64>,
        /// Time of the tilted identity.
        #[arg(long, default_value_t = 2.0, value_parser = parse_num)]
        identity_t: f64,
        /// Theta of the first-passage check.
        #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
        theta: f64,
        /// Time of the first-passage clock side.
        #[arg(long, default_value_t = 1e3, value_parser = parse_num)]
        passage_t: f64,
    },
}

/// Parse a float, accepting `e^k` for exp(k).
fn parse_num(s: &str) -> Result<f64, String> {
    let v = match s.strip_prefix("e^") {
        Some(k) => k.parse::<f64>().map(f64::exp),
        None => s.parse::<f64>(),
    };
    v.map_err(|e| format!("invalid number '{s}': {e}"))
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// brownian, cp-plus, cp-minus, sawtooth, stable-conditioned, csbp,
    /// hypergeometric, or cauchy-modulus (simulation only).
    #[arg(long)]
    pub family: Option<String>,
    /// TOML model descriptor instead of --family and parameter flags.
    #[arg(long, conflicts_with = "family")]
    pub model_file: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub drift: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub dim: Option<f64>,
    /// Esscher tilt applied to the model.
    #[arg(long, allow_negative_numbers = true)]
    pub tilt: Option<f64>,
}

const CAUCHY: &str = "cauchy-modulus";

impl ModelArgs {
    fn param(&self, name: &str) -> Option<f64> {
        match name {
            "nu" => self.nu,
            "drift" => self.drift,
            "beta" => self.beta,
            "gamma" => self.gamma,
            "alpha" => self.alpha,
            "c" => self.c,
            "kappa" => self.kappa,
            "delta" => self.delta,
            "dim" => self.dim,
            _ => None,
        }
    }

    pub fn model(&self) -> CliResult<LevyModel> {
        if let Some(path) = &self.model_file {
            let text = std::fs::read_to_string(path)?;
            return Ok(LevyModel::from_toml(&text)?);
        }
        let family = self
            .family
            .as_deref()
            .ok_or_else(|| CliError::Usage("--family or --model-file is required".into()))?;
        if family == CAUCHY {
            return Err(CliError::Usage(format!(
                "{CAUCHY} is only available for simulation commands"
            )));
        }
        let kind = FamilyKind::from_name(family).map_err(|e| CliError::Usage(e.to_string()))?;
        let params = kind
            .param_names()
            .iter()
            .map(|p| {
                self.param(p)
                    .ok_or_else(|| CliError::Usage(format!("family {family} needs --{p}")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        let model = make_model(kind, &params)?;
        Ok(match self.tilt {
            Some(t) if t != 0.0 => model.esscher(t)?,
            _ => model,
        })
    }

    pub fn target(&self) -> CliResult<SimTarget> {
        if self.family.as_deref() == Some(CAUCHY) {
            let d = self
                .dim
                .ok_or_else(|| CliError::Usage(format!("{CAUCHY} needs --dim")))?;
            if d.fract() != 0.0 || d < 1.0 {
                return Err(CliError::Core(pssmp::Error::Domain(format!(
                    "dimension must be a positive integer, got {d}"
                ))));
            }
            return Ok(SimTarget::CauchyModulus { dim: d as usize });
        }
        Ok(SimTarget::Levy(self.model()?))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Master seed (required; there is no default seed).
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    /// Brownian grid step; relative step of the Cauchy modulus.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Minimum Levy-time horizon.
    #[arg(long, default_value_t = 4.0)]
    pub horizon: f64,
    /// Starting point of the self-similar process.
    #[arg(long, default_value_t = 1.0)]
    pub start: f64,
    /// Self-similarity index of the Lamperti transform.
    #[arg(long, default_value_t = 1.0)]
    pub index: f64,
    #[arg(long, default_value_t = 8)]
    pub max_doublings: u32,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl SimArgs {
    pub fn config(&self) -> SimConfig {
        let mut cfg = SimConfig::new(self.seed, self.paths)
            .with_step(self.step)
            .with_horizon(self.horizon)
            .with_start(self.start)
            .with_alpha(self.index)
            .with_exec(if self.sequential {
                Exec::Sequential
            } else {
                Exec::Parallel
            });
        cfg.max_doublings = self.max_doublings;
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Directory for table outputs (tables are printed inline when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

//! The `construct`, `gauge` and `verify-torsion` commands: run the symbolic
//! pipeline on a PDE configuration and emit the JSON report.

use jetcartan::cartan::{run_construction_with, CartanError, Construction, GaugePolicy};
use jetcartan::expr::{parse, EquivOptions, Expr, Workspace};
use jetcartan::jetpde::TimeCoefficient;
use jetcartan::report::ConstructReport;

use crate::config::{ConfigError, PdeConfig};

pub enum ConstructError {
    Config(String),
    Pipeline(CartanError),
}

impl From<ConfigError> for ConstructError {
    fn from(e: ConfigError) -> Self {
        ConstructError::Config(e.to_string())
    }
}

pub fn parse_policy(name: &str) -> Result<GaugePolicy, ConstructError> {
    match name {
        "paper-canonical" => Ok(GaugePolicy::PaperCanonical),
        "zero-alpha-t" => Ok(GaugePolicy::ZeroAlphaT),
        other => Err(ConstructError::Config(format!(
            "unknown gauge policy `{}` (expected paper-canonical or zero-alpha-t)",
            other
        ))),
    }
}

/// Parse a constant expression (for the proportionality scale).
pub fn parse_constant(text: &str) -> Result<Expr, ConstructError> {
    let ws = Workspace::new();
    parse(&ws, text)
        .map_err(|e| ConstructError::Config(format!("constant `{}`: {}", text, e)))
}

pub struct ConstructRequest {
    pub config: PdeConfig,
    pub policy_override: Option<String>,
    pub lambda_override: Option<String>,
    pub dim_override: Option<usize>,
    pub diffusion: bool,
    pub seed: u64,
}

pub fn run_construct(
    req: &ConstructRequest,
    command: &str,
) -> Result<ConstructReport, ConstructError> {
    let dimension = req.dim_override.unwrap_or(req.config.dimension);
    if dimension == 0 {
        return Err(ConstructError::Config("dimension must be at least 1".into()));
    }
    if let Some(signs) = &req.config.signs {
        if signs.len() != dimension {
            return Err(ConstructError::Config(format!(
                "signs list has length {}, dimension is {}",
                signs.len(),
                dimension
            )));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(ConstructError::Config("signs must be +1 or -1".into()));
        }
    }

    let time = if req.diffusion {
        TimeCoefficient::Diffusion
    } else {
        match req.config.time_coefficient.as_str() {
            "i" => TimeCoefficient::Schrodinger,
            "1" => TimeCoefficient::Diffusion,
            other => {
                return Err(ConstructError::Config(format!(
                    "time_coefficient must be \"i\" or \"1\", got `{}`",
                    other
                )))
            }
        }
    };

    let policy_name = req
        .policy_override
        .clone()
        .or_else(|| req.config.policy.clone())
        .unwrap_or_else(|| "paper-canonical".to_string());
    let policy = parse_policy(&policy_name)?;

    let lambda = match req
        .lambda_override
        .clone()
        .or_else(|| req.config.lambda.clone())
    {
        Some(text) => Some(parse_constant(&text)?),
        None => None,
    };

    let ctx = Construction::new(dimension).map_err(ConstructError::Pipeline)?;
    let potential = if req.config.potential == "V" {
        None
    } else {
        Some(ctx.parse(&req.config.potential).map_err(|e| {
            ConstructError::Config(format!("potential `{}`: {}", req.config.potential, e))
        })?)
    };

    let opts = EquivOptions::seeded(req.seed);
    let outcome = run_construction_with(ctx, potential, time, &policy, lambda, &opts)
        .map_err(ConstructError::Pipeline)?;
    Ok(ConstructReport::from_outcome(&outcome, command, req.seed))
}

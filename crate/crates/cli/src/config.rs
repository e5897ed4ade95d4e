//! TOML configuration files for the construction and the numeric scenarios,
//! plus the expression-text helpers they share.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use jetcartan::expr::{eval_at, parse, Expr, Symbol, Workspace};

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {}", m),
            ConfigError::Parse(m) => write!(f, "cannot parse config: {}", m),
            ConfigError::Invalid(m) => write!(f, "invalid config: {}", m),
        }
    }
}

pub fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {}", path.display(), e)))?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// PDE specification: dimension, time-coefficient flag, optional signs and
/// the potential as expression text (`"V"` keeps it symbolic).
#[derive(Debug, Clone, Deserialize)]
pub struct PdeConfig {
    pub dimension: usize,
    #[serde(default = "default_time")]
    pub time_coefficient: String,
    #[serde(default)]
    pub signs: Option<Vec<i64>>,
    #[serde(default = "default_potential")]
    pub potential: String,
    #[serde(default)]
    pub policy: Option<String>,
    #[serde(default)]
    pub lambda: Option<String>,
}

fn default_time() -> String {
    "i".into()
}

fn default_potential() -> String {
    "V".into()
}

/// Numeric scenario: which suite to run and its grid, expressions and
/// thresholds. Unused keys for a given kind are simply ignored.
#[derive(Debug, Clone, Deserialize)]
pub struct ScenarioConfig {
    pub kind: String,
    pub x_min: f64,
    pub x_max: f64,
    pub resolutions: Vec<usize>,
    #[serde(default)]
    pub steps: Option<Vec<usize>>,
    #[serde(default = "default_zero_potential")]
    pub potential: String,
    #[serde(default)]
    pub initial: Option<String>,
    #[serde(default)]
    pub vacuum_expr: Option<String>,
    #[serde(default)]
    pub u_exact: Option<String>,
    #[serde(default)]
    pub exact: Option<String>,
    #[serde(default)]
    pub boundary: Option<[String; 2]>,
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub perturb_n: Option<f64>,
    #[serde(default)]
    pub min_order: Option<f64>,
    #[serde(default)]
    pub max_mismatch: Option<f64>,
    #[serde(default)]
    pub norm_tol: Option<f64>,
    #[serde(default)]
    pub stationary: Option<bool>,
    #[serde(default)]
    pub stationary_tol: Option<f64>,
    #[serde(default)]
    pub require_positive: Option<bool>,
}

fn default_zero_potential() -> String {
    "0".into()
}

/// Expressions over `(x, t)` evaluated pointwise on grids.
#[derive(Clone)]
pub struct GridExpr {
    x: Arc<Symbol>,
    t: Arc<Symbol>,
    expr: Expr,
    text: String,
}

impl GridExpr {
    pub fn compile(text: &str) -> Result<GridExpr, ConfigError> {
        let mut ws = Workspace::new();
        let x = ws.declare_coordinate("x").expect("fresh workspace");
        let t = ws.declare_coordinate("t").expect("fresh workspace");
        let expr = parse(&ws, text)
            .map_err(|e| ConfigError::Invalid(format!("expression `{}`: {}", text, e)))?;
        Ok(GridExpr {
            x,
            t,
            expr,
            text: text.to_string(),
        })
    }

    pub fn eval_complex(&self, x: f64, t: f64) -> Result<Complex64, ConfigError> {
        let mut bindings = BTreeMap::new();
        bindings.insert(self.x.clone(), Complex64::new(x, 0.0));
        bindings.insert(self.t.clone(), Complex64::new(t, 0.0));
        eval_at(&self.expr, &bindings)
            .map_err(|e| ConfigError::Invalid(format!("evaluating `{}`: {}", self.text, e)))
    }

    pub fn eval_real(&self, x: f64, t: f64) -> Result<f64, ConfigError> {
        let v = self.eval_complex(x, t)?;
        if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
            return Err(ConfigError::Invalid(format!(
                "expression `{}` is not real at x = {}",
                self.text, x
            )));
        }
        Ok(v.re)
    }

    pub fn depends_on_t(&self) -> bool {
        self.expr.contains_symbol(&self.t)
    }

    /// Fast real-valued closure for repeated evaluation on a fixed grid:
    /// time-independent expressions are tabulated once per grid point.
    pub fn real_closure(
        &self,
        grid: jetcartan::numerics::Grid1D,
    ) -> Result<impl Fn(f64, f64) -> f64 + 'static, ConfigError> {
        let this = self.clone();
        let table: Option<Vec<f64>> = if self.depends_on_t() {
            None
        } else {
            let mut values = Vec::with_capacity(grid.n);
            for i in 0..grid.n {
                values.push(self.eval_real(grid.x(i), 0.0)?);
            }
            Some(values)
        };
        let (x_min, dx, n) = (grid.x_min, grid.dx(), grid.n);
        Ok(move |x: f64, t: f64| match &table {
            Some(values) => {
                let i = ((x - x_min) / dx).round() as isize - 1;
                if i >= 0 && (i as usize) < n {
                    values[i as usize]
                } else {
                    this.eval_real(x, t).unwrap_or(f64::NAN)
                }
            }
            None => this.eval_real(x, t).unwrap_or(f64::NAN),
        })
    }
}

//! JSON-facing report structures with a stable key order (struct field
//! order), so identical runs serialise byte-identically. Expressions are
//! rendered in both the canonical prefix form and the parseable infix form.

use serde::{Deserialize, Serialize};

use crate::cartan::{Check, ConstructionOutcome};
use crate::expr::Expr;
use crate::forms::{KForm, MatrixForm};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExprReport {
    pub prefix: String,
    pub infix: String,
}

impl From<&Expr> for ExprReport {
    fn from(e: &Expr) -> Self {
        ExprReport {
            prefix: e.prefix(),
            infix: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KFormTermReport {
    pub index: Vec<String>,
    pub coefficient: ExprReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KFormReport {
    pub degree: usize,
    pub terms: Vec<KFormTermReport>,
}

impl From<&KForm> for KFormReport {
    fn from(f: &KForm) -> Self {
        let coords = f.coords().coords();
        KFormReport {
            degree: f.degree(),
            terms: f
                .terms()
                .map(|(idx, coeff)| KFormTermReport {
                    index: idx.iter().map(|i| coords[*i].name.clone()).collect(),
                    coefficient: coeff.into(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixEntryReport {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<KFormTermReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFormReport {
    pub rows: usize,
    pub cols: usize,
    pub degree: usize,
    pub entries: Vec<MatrixEntryReport>,
}

impl From<&MatrixForm> for MatrixFormReport {
    fn from(m: &MatrixForm) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let f = m.entry(i, j);
                if f.is_zero() {
                    continue;
                }
                let report: KFormReport = f.into();
                entries.push(MatrixEntryReport {
                    row: i,
                    col: j,
                    terms: report.terms,
                });
            }
        }
        MatrixFormReport {
            rows: m.rows(),
            cols: m.cols(),
            degree: m.degree(),
            entries,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
}

impl From<&Check> for CheckReport {
    fn from(c: &Check) -> Self {
        CheckReport {
            name: c.name.clone(),
            pass: c.pass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformedReport {
    pub leading: ExprReport,
    pub coeff_v: ExprReport,
    pub coeff_vi: Vec<ExprReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeChoiceReport {
    pub policy: String,
    pub alpha_t: ExprReport,
    pub beta_t: ExprReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeConstraintsReport {
    pub lambda: ExprReport,
    pub f_solved: Vec<ExprReport>,
    pub f_constraints: Vec<ExprReport>,
    pub scalar_constraint: ExprReport,
    pub printed_one_plus_one: ExprReport,
    pub printed_one_plus_n: ExprReport,
    pub derived_matches_printed_one_plus_one: bool,
    pub derived_matches_printed_one_plus_n: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorsionReport {
    pub epsilon: KFormReport,
    pub constraints: Vec<ExprReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructReport {
    pub command: String,
    pub seed: u64,
    pub dimension: usize,
    pub time_coefficient: String,
    pub policy: String,
    pub potential: ExprReport,
    pub pde_residual: ExprReport,
    pub transformed: TransformedReport,
    pub connection: MatrixFormReport,
    pub gauge_choice: GaugeChoiceReport,
    pub gauge_constraints: GaugeConstraintsReport,
    pub torsion: TorsionReport,
    pub vacuum_residual: ExprReport,
    pub checks: Vec<CheckReport>,
    pub all_checks_pass: bool,
}

impl ConstructReport {
    pub fn from_outcome(out: &ConstructionOutcome, command: &str, seed: u64) -> Self {
        ConstructReport {
            command: command.to_string(),
            seed,
            dimension: out.ctx.n(),
            time_coefficient: out.pde.time.label().to_string(),
            policy: out.connection.gauge.policy.clone(),
            potential: (&out.potential_used).into(),
            pde_residual: (&out.pde.residual).into(),
            transformed: TransformedReport {
                leading: (&out.transformed.leading).into(),
                coeff_v: (&out.transformed.coeff_v).into(),
                coeff_vi: out.transformed.coeff_vi.iter().map(Into::into).collect(),
            },
            connection: (&out.connection.omega).into(),
            gauge_choice: GaugeChoiceReport {
                policy: out.connection.gauge.policy.clone(),
                alpha_t: (&out.connection.gauge.alpha_t).into(),
                beta_t: (&out.connection.gauge.beta_t).into(),
            },
            gauge_constraints: GaugeConstraintsReport {
                lambda: (&out.gauge_constraints.lambda).into(),
                f_solved: out.gauge_constraints.f_solved.iter().map(Into::into).collect(),
                f_constraints: out
                    .gauge_constraints
                    .f_constraints
                    .iter()
                    .map(Into::into)
                    .collect(),
                scalar_constraint: (&out.gauge_constraints.scalar_constraint).into(),
                printed_one_plus_one: (&out.gauge_constraints.printed_one_plus_one).into(),
                printed_one_plus_n: (&out.gauge_constraints.printed_one_plus_n).into(),
                derived_matches_printed_one_plus_one: out.printed_variant_verdicts.0,
                derived_matches_printed_one_plus_n: out.printed_variant_verdicts.1,
            },
            torsion: TorsionReport {
                epsilon: (&out.torsion.epsilon).into(),
                constraints: out.torsion.constraints.iter().map(Into::into).collect(),
            },
            vacuum_residual: (&out.vacuum_residual).into(),
            checks: out.checks.iter().map(Into::into).collect(),
            all_checks_pass: out.all_checks_pass(),
        }
    }
}

/// One measured quantity compared against a threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyRow {
    pub name: String,
    pub value: f64,
    pub op: String,
    pub threshold: f64,
    pub pass: bool,
}

impl VerifyRow {
    pub fn le(name: impl Into<String>, value: f64, threshold: f64) -> VerifyRow {
        VerifyRow {
            name: name.into(),
            value,
            op: "<=".into(),
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn ge(name: impl Into<String>, value: f64, threshold: f64) -> VerifyRow {
        VerifyRow {
            name: name.into(),
            value,
            op: ">=".into(),
            threshold,
            pass: value >= threshold,
        }
    }

    pub fn gt(name: impl Into<String>, value: f64, threshold: f64) -> VerifyRow {
        VerifyRow {
            name: name.into(),
            value,
            op: ">".into(),
            threshold,
            pass: value > threshold,
        }
    }

    /// Informational row that never gates the outcome.
    pub fn info(name: impl Into<String>, value: f64) -> VerifyRow {
        VerifyRow {
            name: name.into(),
            value,
            op: "info".into(),
            threshold: f64::NAN,
            pass: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub command: String,
    pub suite: String,
    pub seed: u64,
    pub rows: Vec<VerifyRow>,
    pub overall_pass: bool,
}

impl VerifyReport {
    pub fn new(suite: impl Into<String>, seed: u64, rows: Vec<VerifyRow>) -> VerifyReport {
        let overall_pass = rows.iter().all(|r| r.pass);
        VerifyReport {
            command: "verify".into(),
            suite: suite.into(),
            seed,
            rows,
            overall_pass,
        }
    }
}

/// Serialise with the stable two-space indentation used by golden files.
pub fn to_json_stable<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serialises");
    out.push('\n');
    out
}

//! Oracle quantities for a finished run, shared by `train` (which records
//! them) and `verify` (which recomputes and judges them).

use std::fmt;

use hebb_dual::duality::{sigmoid, PrimalDualPoint};
use hebb_dual::dynamics::{
    check_lateral, logistic_activity, ridge_activity, sm_activity, svm_activation, svm_activation_relaxed,
};
use hebb_dual::learners::LearnerSnapshot;
use hebb_dual::linalg::{dot, norm2, solve};
use hebb_dual::oracles::{
    batch_dual_solve, duality_gap, pca_subspace, ridge_closed_form, span_residual, subspace_error,
    DualSolveOptions,
};
use hebb_dual::{Dataset, DualModel, DualParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::report::{Hyperparameters, ModelKind, RunReport};

/// Fixed-point identities: `online` compares the relaxed activity at the
/// learned weights with its closed form; `batch` compares the batch dual
/// solution with the activity its own weights induce.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResiduals {
    pub online: Option<f64>,
    pub batch: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// `‖w − ŵ‖ / ‖ŵ‖` against the closed-form ridge solution.
    pub oracle_distance: Option<f64>,
    /// Gap between the oracle weights and the batch dual solution.
    pub duality_gap: Option<f64>,
    pub span_residual: Option<f64>,
    pub subspace_error: Option<f64>,
    /// Projected-gradient residual of the batch dual solve.
    pub kkt_residual: Option<f64>,
    pub min_weight: Option<f64>,
    pub min_lateral_eigenvalue: Option<f64>,
    pub train_error: Option<f64>,
    pub fixed_point_residuals: FixedPointResiduals,
}

fn weights(state: &LearnerSnapshot<f64>) -> Result<&[f64]> {
    match state {
        LearnerSnapshot::Weights { w } => Ok(w),
        LearnerSnapshot::Similarity { .. } => Err(CliError::Usage(
            "report holds a similarity-matching state for a supervised model".into(),
        )),
    }
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn compute(
    model: ModelKind,
    hyper: &Hyperparameters,
    state: &LearnerSnapshot<f64>,
    data: &Dataset,
) -> Result<Verification> {
    let x = &data.x;
    let mut v = Verification::default();
    let cfg = &hyper.dynamics;

    if model == ModelKind::Sm {
        let LearnerSnapshot::Similarity { w, m } = state else {
            return Err(CliError::Usage("report holds supervised weights for a similarity-matching model".into()));
        };
        if w.ncols() != x.nrows() {
            return Err(hebb_dual::Error::DimensionMismatch {
                what: "network inputs vs dataset features",
                expected: x.nrows(),
                found: w.ncols(),
            }
            .into());
        }
        v.min_lateral_eigenvalue = Some(hebb_dual::oracles::symmetric_eig(m)?.values.last().copied().unwrap_or(0.0));
        if check_lateral(m).is_err() {
            return Ok(v);
        }
        let f = hebb_dual::linalg::solve_matrix(m, w)?;
        let basis = hebb_dual::linalg::orthonormalize_columns(&f.transpose(), 1e-10);
        let pca = pca_subspace(x, w.nrows())?;
        if basis.ncols() == pca.basis.ncols() {
            v.subspace_error = Some(subspace_error(&basis, &pca.basis)?);
        } else {
            // rank-deficient filters cannot span the principal subspace
            v.subspace_error = Some(1.0);
        }
        let mut worst = 0.0f64;
        for xt in x.columns() {
            let fp = sm_activity(w, m, xt, cfg)?;
            let direct = solve(m, &w.matvec(xt)?)?;
            worst = worst.max(max_abs(fp.z.iter().zip(&direct).map(|(a, b)| a - b)));
        }
        v.fixed_point_residuals.online = Some(worst);
        return Ok(v);
    }

    let w = weights(state)?;
    if w.len() != x.nrows() {
        return Err(hebb_dual::Error::DimensionMismatch {
            what: "learner weights vs dataset features",
            expected: x.nrows(),
            found: w.len(),
        }
        .into());
    }
    if model == ModelKind::Expgrad {
        v.min_weight = Some(w.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let Some(y) = data.y.as_deref() else {
        return Ok(v);
    };
    let kappa = hyper.kappa.unwrap_or(1.0);
    let params = DualParams::new(hyper.lambda, kappa)?;
    let predictions: Vec<f64> = x.columns().map(|xt| dot(w, xt)).collect();

    match model {
        ModelKind::Ridge | ModelKind::Expgrad => {
            let mse = predictions.iter().zip(y).map(|(u, yt)| (yt - u) * (yt - u)).sum::<f64>() / y.len().max(1) as f64;
            v.train_error = Some(mse);
            let mut worst = 0.0f64;
            for ((xt, &yt), &u) in x.columns().zip(y).zip(&predictions) {
                worst = worst.max((ridge_activity(w, xt, yt, cfg)?.scalar() - (yt - u)).abs());
            }
            v.fixed_point_residuals.online = Some(worst);
        }
        ModelKind::Svm | ModelKind::Logistic => {
            let errors = predictions.iter().zip(y).filter(|(u, yt)| *yt * **u <= 0.0).count();
            v.train_error = Some(errors as f64 / y.len().max(1) as f64);
            let mut worst = 0.0f64;
            for (xt, &yt) in x.columns().zip(y) {
                let r = if model == ModelKind::Svm {
                    svm_activation_relaxed(w, xt, yt, kappa, cfg)?.scalar() - svm_activation(w, xt, yt, kappa)?
                } else {
                    logistic_activity(w, xt, yt, cfg)?.scalar() - sigmoid(-yt * dot(w, xt))
                };
                worst = worst.max(r.abs());
            }
            v.fixed_point_residuals.online = Some(worst);
        }
        ModelKind::Sm => unreachable!(),
    }

    let dual = match model {
        ModelKind::Ridge => DualModel::Ridge,
        ModelKind::Svm => DualModel::Svm,
        ModelKind::Logistic => DualModel::Logistic,
        _ => return Ok(v),
    };
    let sol = batch_dual_solve(dual, x, y, &params, &DualSolveOptions::default())?;
    v.kkt_residual = Some(sol.kkt_residual);
    let induced = PrimalDualPoint::from_weights(dual, sol.w.clone(), x, y, kappa)?;
    v.fixed_point_residuals.batch = Some(max_abs(sol.z.iter().zip(&induced.z).map(|(a, b)| a - b)));
    if dual == DualModel::Ridge {
        let oracle = ridge_closed_form(x, y, hyper.lambda)?;
        let diff: Vec<f64> = w.iter().zip(&oracle).map(|(a, b)| a - b).collect();
        v.oracle_distance = Some(norm2(&diff) / norm2(&oracle).max(f64::MIN_POSITIVE));
        v.duality_gap = Some(duality_gap(dual, x, y, &oracle, &sol.z, &params)?);
        v.span_residual = Some(span_residual(w, x)?);
    } else {
        v.duality_gap = Some(duality_gap(dual, x, y, &sol.w, &sol.z, &params)?);
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<7} {:<24} {}", self.status.to_string(), self.name, self.detail)
    }
}

/// Acceptance thresholds for `verify`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub weights: f64,
    pub gap: f64,
    pub span: f64,
    pub fixed_point: f64,
    pub dual: f64,
    pub subspace: f64,
    pub mse: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            weights: 1e-3,
            gap: 1e-6,
            span: 1e-8,
            fixed_point: 1e-6,
            dual: 1e-5,
            subspace: 0.1,
            mse: 1e-3,
        }
    }
}

fn below(name: &'static str, value: Option<f64>, tol: f64, missing: &str) -> Check {
    match value {
        None => Check {
            name,
            status: Status::Skipped,
            detail: missing.to_string(),
        },
        Some(v) => Check {
            name,
            status: if v.abs() <= tol { Status::Pass } else { Status::Fail },
            detail: format!("value={v:.6e} tol={tol:.1e}"),
        },
    }
}

fn flag(name: &'static str, ok: bool, detail: String) -> Check {
    Check {
        name,
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0),
        _ => false,
    }
}

fn same_block(a: &Verification, b: &Verification) -> bool {
    same(a.oracle_distance, b.oracle_distance)
        && same(a.duality_gap, b.duality_gap)
        && same(a.span_residual, b.span_residual)
        && same(a.subspace_error, b.subspace_error)
        && same(a.kkt_residual, b.kkt_residual)
        && same(a.min_weight, b.min_weight)
        && same(a.min_lateral_eigenvalue, b.min_lateral_eigenvalue)
        && same(a.train_error, b.train_error)
        && same(a.fixed_point_residuals.online, b.fixed_point_residuals.online)
        && same(a.fixed_point_residuals.batch, b.fixed_point_residuals.batch)
}

/// Recomputes the oracle quantities for `report` on `data` and judges them.
pub fn verify(report: &RunReport, data: &Dataset, tol: &Tolerances) -> Result<Vec<Check>> {
    let mut out = vec![flag(
        "dataset_match",
        report.provenance.dataset == data.meta,
        format!("report dataset {:?} seed {}", report.provenance.dataset.kind, report.provenance.dataset.seed),
    )];
    let rows_ok = report.rows.iter().all(|r| {
        (0.0..=1.0).contains(&r.update_density) && r.duality_gap.is_none_or(|g| g >= -1e-9)
    });
    out.push(flag(
        "report_rows",
        rows_ok,
        format!("{} epochs, densities in [0, 1], gaps >= -1e-9", report.rows.len()),
    ));

    let v = compute(report.model, &report.hyperparameters, &report.final_state, data)?;
    out.push(flag(
        "recorded_verification",
        same_block(&v, &report.verification),
        "recorded oracle block matches recomputation".into(),
    ));
    let no_labels = "dataset has no labels";
    let fp = &v.fixed_point_residuals;
    match report.model {
        ModelKind::Ridge => {
            out.push(below("oracle_distance", v.oracle_distance, tol.weights, no_labels));
            out.push(below("duality_gap", v.duality_gap, tol.gap, no_labels));
            out.push(below("span_residual", v.span_residual, tol.span, no_labels));
            out.push(below("prediction_error_identity", fp.batch, tol.fixed_point, no_labels));
            out.push(below("online_fixed_point", fp.online, tol.fixed_point, no_labels));
        }
        ModelKind::Svm | ModelKind::Logistic => {
            out.push(below("kkt_residual", v.kkt_residual, tol.dual, no_labels));
            out.push(below("batch_fixed_point", fp.batch, tol.dual, no_labels));
            out.push(below("online_fixed_point", fp.online, tol.fixed_point, no_labels));
        }
        ModelKind::Expgrad => {
            let min = v.min_weight.unwrap_or(f64::NAN);
            let initial_ok = match &report.initial_state {
                LearnerSnapshot::Weights { w } => w.iter().all(|&x| x > 0.0),
                LearnerSnapshot::Similarity { .. } => false,
            };
            out.push(flag("positivity", min > 0.0 && initial_ok, format!("min weight {min:.6e}")));
            out.push(below("train_mse", v.train_error, tol.mse, no_labels));
            out.push(below("online_fixed_point", fp.online, tol.fixed_point, no_labels));
        }
        ModelKind::Sm => {
            let min = v.min_lateral_eigenvalue.unwrap_or(f64::NAN);
            out.push(flag(
                "lateral_stability",
                min >= hebb_dual::dynamics::PD_THRESHOLD,
                format!("min eigenvalue {min:.6e}"),
            ));
            out.push(below("subspace_error", v.subspace_error.or(Some(1.0)), tol.subspace, ""));
            out.push(below("online_fixed_point", fp.online.or(Some(f64::INFINITY)), tol.fixed_point, ""));
        }
    }
    Ok(out)
}

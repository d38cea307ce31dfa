use std::path::Path;

use hebb_dual::learners::{
    train as run_training, Learner, Schedule, SimilarityMatching, SupervisedHyper, SupervisedLearner,
    SupervisedModel, TrainOptions,
};
use hebb_dual::{gen_classification, gen_regression, gen_spiked, DynamicsConfig};
use serde::Serialize;

use crate::checks::{self, Status, Tolerances};
use crate::error::{CliError, Result};
use crate::output::{read_dataset, sibling_csv, write_atomic};
use crate::report::{
    num_cell, opt_cell, schedule_label, Hyperparameters, ModelKind, Provenance, Row, RunReport, TOOL_NAME,
    TOOL_VERSION,
};
use crate::{FormatArg, GenArgs, KindArg, ReportArgs, ScheduleArg, TrainArgs, VerifyArgs};

pub fn gen(a: &GenArgs) -> Result<()> {
    let data = match a.kind {
        KindArg::Regression => gen_regression(a.n, a.t, a.noise, a.seed, a.positive_w)?,
        KindArg::Classification => gen_classification(a.n, a.t, a.margin, a.seed)?,
        KindArg::Spiked => gen_spiked(a.n, a.t, a.m, a.gap, a.seed)?,
    };
    let text = data
        .to_json()
        .map_err(|e| CliError::Internal(format!("cannot serialize dataset: {e}")))?;
    write_atomic(&a.output, text.as_bytes())?;
    println!(
        "{} dataset: n={} t={} seed={} -> {}",
        data.meta.kind.as_str(),
        data.n(),
        data.len(),
        data.meta.seed,
        a.output.display()
    );
    Ok(())
}

fn supervised_model(m: ModelKind) -> Option<SupervisedModel> {
    match m {
        ModelKind::Ridge => Some(SupervisedModel::Ridge),
        ModelKind::Svm => Some(SupervisedModel::Svm),
        ModelKind::Logistic => Some(SupervisedModel::Logistic),
        ModelKind::Expgrad => Some(SupervisedModel::ExpGrad),
        ModelKind::Sm => None,
    }
}

fn hyperparameters(a: &TrainArgs, m: Option<usize>) -> Hyperparameters {
    let schedule = match a.schedule {
        ScheduleArg::Constant => Schedule::Constant,
        ScheduleArg::InverseTime => Schedule::InverseTime { decay: a.decay },
    };
    let is = |k: ModelKind| a.model == k;
    Hyperparameters {
        epochs: a.epochs,
        eta: a.eta,
        eta_m: is(ModelKind::Sm).then(|| a.eta_m.unwrap_or(a.eta)),
        kappa: is(ModelKind::Svm).then_some(a.kappa),
        lambda: a.lambda,
        lambda_eff: is(ModelKind::Ridge).then_some(a.lambda_eff),
        m,
        normalize: is(ModelKind::Expgrad).then_some(a.normalize),
        schedule,
        seed: a.seed,
        shuffle: a.shuffle,
        dynamics: DynamicsConfig::default(),
    }
}

pub fn train(a: &TrainArgs) -> Result<RunReport> {
    if !(a.decay >= 0.0 && a.decay.is_finite()) {
        return Err(CliError::Usage(format!("--decay must be a finite value >= 0, got {}", a.decay)));
    }
    let csv_path = a.csv.clone().unwrap_or_else(|| sibling_csv(&a.output));
    if csv_path == a.output {
        return Err(CliError::Usage("report and CSV paths must differ".into()));
    }
    let data = read_dataset(&a.data)?;
    let m = match a.model {
        ModelKind::Sm => Some(a.m.or(data.meta.m).ok_or_else(|| {
            CliError::Usage("--m is required for sm when the dataset does not record a planted dimension".into())
        })?),
        _ => None,
    };
    let hyper = hyperparameters(a, m);
    let learner = match supervised_model(a.model) {
        Some(model) => {
            let mut h = SupervisedHyper::new(a.eta);
            h.kappa = a.kappa;
            h.lambda_eff = a.lambda_eff;
            h.normalize = a.normalize;
            Learner::Supervised(SupervisedLearner::new(model, data.n(), h)?)
        }
        None => Learner::Similarity(SimilarityMatching::new(
            data.n(),
            m.expect("set for sm"),
            a.eta,
            hyper.eta_m.expect("set for sm"),
            a.seed,
        )?),
    };
    let opts = TrainOptions {
        epochs: a.epochs,
        schedule: hyper.schedule,
        shuffle_seed: a.shuffle.then_some(a.seed),
        lambda: a.lambda,
    };
    let run = run_training(learner, &data, &opts)?;
    let final_state = run.learner.snapshot();
    let verification = checks::compute(a.model, &hyper, &final_state, &data)?;
    let report = RunReport {
        model: a.model,
        rows: run.epochs.iter().map(Row::from).collect(),
        initial_state: run.initial,
        final_state,
        verification,
        provenance: Provenance {
            data_seed: data.meta.seed,
            dataset: data.meta.clone(),
            run_seed: a.seed,
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
        },
        hyperparameters: hyper,
    };
    write_atomic(&a.output, report.to_json()?.as_bytes())?;
    write_atomic(&csv_path, &report.to_csv()?)?;

    let last = report.rows.last();
    println!(
        "{}: {} epochs, final train_error={} update_density={} -> {}, {}",
        a.model,
        report.rows.len(),
        last.map(|r| opt_cell(r.train_error)).unwrap_or_else(|| "-".into()),
        last.map(|r| num_cell(r.update_density)).unwrap_or_else(|| "-".into()),
        a.output.display(),
        csv_path.display()
    );
    Ok(report)
}

pub fn verify(a: &VerifyArgs) -> Result<bool> {
    let data = read_dataset(&a.data)?;
    let report = RunReport::read(&a.report)?;
    let tol = Tolerances {
        weights: a.tol_weights,
        gap: a.tol_gap,
        span: a.tol_span,
        fixed_point: a.tol_fixed_point,
        dual: a.tol_dual,
        subspace: a.tol_subspace,
        mse: a.tol_mse,
    };
    let results = checks::verify(&report, &data, &tol)?;
    let count = |s: Status| results.iter().filter(|c| c.status == s).count();
    for c in &results {
        println!("{c}");
    }
    let failed = count(Status::Fail);
    println!(
        "{}: {} passed, {} failed, {} skipped",
        report.model,
        count(Status::Pass),
        failed,
        count(Status::Skipped)
    );
    Ok(failed == 0)
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub report: String,
    pub model: ModelKind,
    pub seed: u64,
    pub data_seed: u64,
    pub dataset: String,
    pub epochs: usize,
    pub eta: f64,
    pub eta_m: Option<f64>,
    pub kappa: Option<f64>,
    pub lambda: f64,
    pub lambda_eff: Option<f64>,
    pub schedule: String,
    pub final_primal_objective: Option<f64>,
    pub final_dual_objective: Option<f64>,
    pub final_duality_gap: Option<f64>,
    pub final_update_density: Option<f64>,
    pub final_train_error: Option<f64>,
    pub oracle_distance: Option<f64>,
    pub span_residual: Option<f64>,
    pub subspace_error: Option<f64>,
    /// Mean update norm of every epoch, in order.
    pub update_norm_trajectory: Vec<f64>,
}

impl SummaryRow {
    fn new(path: &Path, r: &RunReport) -> Self {
        let h = &r.hyperparameters;
        let last = r.rows.last();
        Self {
            report: path.display().to_string(),
            model: r.model,
            seed: r.provenance.run_seed,
            data_seed: r.provenance.data_seed,
            dataset: r.provenance.dataset.kind.as_str().into(),
            epochs: r.rows.len(),
            eta: h.eta,
            eta_m: h.eta_m,
            kappa: h.kappa,
            lambda: h.lambda,
            lambda_eff: h.lambda_eff,
            schedule: schedule_label(&h.schedule),
            final_primal_objective: last.and_then(|l| l.primal_objective),
            final_dual_objective: last.and_then(|l| l.dual_objective),
            final_duality_gap: last.and_then(|l| l.duality_gap),
            final_update_density: last.map(|l| l.update_density),
            final_train_error: last.and_then(|l| l.train_error),
            oracle_distance: r.verification.oracle_distance,
            span_residual: r.verification.span_residual,
            subspace_error: r.verification.subspace_error,
            update_norm_trajectory: r.rows.iter().map(|l| l.mean_update_norm).collect(),
        }
    }

    const HEADER: [&'static str; 21] = [
        "report",
        "model",
        "seed",
        "data_seed",
        "dataset",
        "epochs",
        "eta",
        "eta_m",
        "kappa",
        "lambda",
        "lambda_eff",
        "schedule",
        "final_primal_objective",
        "final_dual_objective",
        "final_duality_gap",
        "final_update_density",
        "final_train_error",
        "oracle_distance",
        "span_residual",
        "subspace_error",
        "update_norm_trajectory",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.report.clone(),
            self.model.to_string(),
            self.seed.to_string(),
            self.data_seed.to_string(),
            self.dataset.clone(),
            self.epochs.to_string(),
            num_cell(self.eta),
            opt_cell(self.eta_m),
            opt_cell(self.kappa),
            num_cell(self.lambda),
            opt_cell(self.lambda_eff),
            self.schedule.clone(),
            opt_cell(self.final_primal_objective),
            opt_cell(self.final_dual_objective),
            opt_cell(self.final_duality_gap),
            opt_cell(self.final_update_density),
            opt_cell(self.final_train_error),
            opt_cell(self.oracle_distance),
            opt_cell(self.span_residual),
            opt_cell(self.subspace_error),
            self.update_norm_trajectory.iter().map(|&v| num_cell(v)).collect::<Vec<_>>().join(";"),
        ]
    }
}

pub fn summarize(paths: &[impl AsRef<Path>]) -> Result<Vec<SummaryRow>> {
    let mut rows = paths
        .iter()
        .map(|p| RunReport::read(p.as_ref()).map(|r| SummaryRow::new(p.as_ref(), &r)))
        .collect::<Result<Vec<_>>>()?;
    // stable: equal (model, seed) keep their command-line order
    rows.sort_by(|a, b| (a.model.as_str(), a.seed).cmp(&(b.model.as_str(), b.seed)));
    Ok(rows)
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let rows = summarize(&a.reports)?;
    let format = a.format.unwrap_or_else(|| {
        if a.output.extension().is_some_and(|e| e == "json") {
            FormatArg::Json
        } else {
            FormatArg::Csv
        }
    });
    let bytes = match format {
        FormatArg::Json => hebb_dual::json::to_json_string(&rows)
            .map_err(|e| CliError::Internal(format!("cannot serialize summary: {e}")))?
            .into_bytes(),
        FormatArg::Csv => {
            let err = |e: csv::Error| CliError::Internal(format!("cannot format CSV: {e}"));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(SummaryRow::HEADER).map_err(err)?;
            for r in &rows {
                w.write_record(r.cells()).map_err(err)?;
            }
            w.into_inner()
                .map_err(|e| CliError::Internal(format!("cannot format CSV: {e}")))?
        }
    };
    write_atomic(&a.output, &bytes)?;
    println!("{} runs -> {}", rows.len(), a.output.display());
    Ok(())
}

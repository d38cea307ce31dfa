//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hebb_dual::duality::{entropy_barrier, loss_subgradient, loss_value, sigmoid, weights_from_duals};
use hebb_dual::dynamics::logistic_activity;
use hebb_dual::learners::{
    train, Learner, Schedule, SimilarityMatching, SupervisedHyper, SupervisedLearner, SupervisedModel, TrainOptions,
    TrainingReport,
};
use hebb_dual::linalg::{dot, norm2};
use hebb_dual::oracles::{
    batch_dual_solve, duality_gap, finite_diff_check, pca_subspace, ridge_closed_form, span_residual, subspace_error,
    symmetric_eig, DualSolveOptions,
};
use hebb_dual::rng::SeededRng;
use hebb_dual::{
    gen_classification, gen_regression, gen_spiked, Dataset, DualModel, DualParams, DynamicsConfig, LossModel, Matrix,
    RegularizerModel,
};

const LAMBDA: f64 = 0.1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_matrix(rng: &mut SeededRng, n: usize, t: usize) -> Matrix<f64> {
    Matrix::from_col_major(n, t, rng.normal_vec(n * t)).unwrap()
}

fn sign(rng: &mut SeededRng) -> f64 {
    if rng.uniform() < 0.5 {
        -1.0
    } else {
        1.0
    }
}

fn ridge_instance() -> (Dataset, Vec<f64>) {
    let d = gen_regression(5, 50, 0.1, 42, false).unwrap();
    let y = d.y.clone().unwrap();
    (d, y)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn ridge_equivalence() -> Outcome {
    let (d, y) = ridge_instance();
    let mut h = SupervisedHyper::new(0.05);
    h.lambda_eff = LAMBDA;
    let learner = Learner::Supervised(SupervisedLearner::new(SupervisedModel::Ridge, 5, h).unwrap());
    let opts = TrainOptions {
        epochs: 500,
        schedule: Schedule::InverseTime { decay: 1.0 },
        shuffle_seed: None,
        lambda: LAMBDA,
    };
    let (run, elapsed) = timed(|| train(learner, &d, &opts).unwrap());
    let Learner::Supervised(l) = run.learner else { unreachable!() };
    let oracle = ridge_closed_form(&d.x, &y, LAMBDA).unwrap();
    let diff: Vec<f64> = l.w.iter().zip(&oracle).map(|(a, b)| a - b).collect();
    let rel = norm2(&diff) / norm2(&oracle);
    outcome(
        rel < 1e-3 && elapsed < Duration::from_secs(2),
        format!("relative distance {rel:.3e} after 500 epochs in {:.3} s", elapsed.as_secs_f64()),
    )
}

fn strong_duality() -> Outcome {
    let (d, y) = ridge_instance();
    let p = DualParams::new(LAMBDA, 1.0).unwrap();
    let sol = batch_dual_solve(DualModel::Ridge, &d.x, &y, &p, &DualSolveOptions::default()).unwrap();
    let w = ridge_closed_form(&d.x, &y, LAMBDA).unwrap();
    let gap = duality_gap(DualModel::Ridge, &d.x, &y, &w, &sol.z, &p).unwrap();
    let mut rng = SeededRng::new(2);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let w = rng.normal_vec(5);
        let z: Vec<f64> = (0..50).map(|_| 2.0 * rng.normal()).collect();
        worst = worst.min(duality_gap(DualModel::Ridge, &d.x, &y, &w, &z, &p).unwrap());
    }
    outcome(
        gap.abs() < 1e-6 && worst >= -1e-12,
        format!("oracle gap {gap:.3e}, min gap over 1000 random pairs {worst:.3e}"),
    )
}

fn prediction_error_identity() -> Outcome {
    let (d, y) = ridge_instance();
    let p = DualParams::new(LAMBDA, 1.0).unwrap();
    let sol = batch_dual_solve(DualModel::Ridge, &d.x, &y, &p, &DualSolveOptions::default()).unwrap();
    let worst = d
        .x
        .columns()
        .zip(&y)
        .zip(&sol.z)
        .map(|((xt, yt), zt)| (zt - (yt - dot(&sol.w, xt))).abs())
        .fold(0.0, f64::max);
    outcome(worst < 1e-6, format!("max |z - (y - w.x)| = {worst:.3e}"))
}

fn logistic_fixed_point() -> Outcome {
    let mut rng = SeededRng::new(4);
    let cfg = DynamicsConfig::default();
    let mut online = 0.0f64;
    for _ in 0..1000 {
        let n = 1 + (rng.next_u64() % 5) as usize;
        let w = rng.normal_vec(n);
        let mut x = rng.normal_vec(n);
        let u = dot(&w, &x);
        if u.abs() > 10.0 {
            x.iter_mut().for_each(|v| *v *= 10.0 / u.abs());
        }
        let y = sign(&mut rng);
        let z = logistic_activity(&w, &x, y, &cfg).unwrap().scalar();
        online = online.max((z - sigmoid(-y * dot(&w, &x))).abs());
    }
    let mut batch = 0.0f64;
    for seed in 0..5 {
        let d = gen_classification(3, 40, 0.3, seed).unwrap();
        let y = d.y.clone().unwrap();
        let p = DualParams::new(LAMBDA, 1.0).unwrap();
        let sol = batch_dual_solve(DualModel::Logistic, &d.x, &y, &p, &DualSolveOptions::default()).unwrap();
        let chi: Vec<Vec<f64>> = d.x.columns().zip(&y).map(|(xt, &yt)| xt.iter().map(|v| v * yt).collect()).collect();
        let chi = Matrix::from_columns(&chi).unwrap();
        let w = weights_from_duals(&RegularizerModel::l2(LAMBDA).unwrap(), &sol.z, &chi).unwrap();
        for ((xt, &yt), &zt) in d.x.columns().zip(&y).zip(&sol.z) {
            batch = batch.max((zt - sigmoid(-yt * dot(&w, xt))).abs());
        }
    }
    outcome(
        online < 1e-6 && batch < 1e-5,
        format!("relaxation error {online:.3e} over 1000 draws, batch dual error {batch:.3e}"),
    )
}

fn sm_run() -> (Dataset, TrainingReport<f64>, Duration) {
    let d = gen_spiked(10, 2000, 2, 4.0, 3).unwrap();
    let sm = SimilarityMatching::new(10, 2, 0.01, 0.01, 3).unwrap();
    let opts = TrainOptions {
        epochs: 50,
        schedule: Schedule::InverseTime { decay: 0.1 },
        shuffle_seed: None,
        lambda: LAMBDA,
    };
    let (run, elapsed) = timed(|| train(Learner::Similarity(sm), &d, &opts).unwrap());
    (d, run, elapsed)
}

fn update_sparsity() -> Outcome {
    let d = gen_classification(2, 100, 0.5, 7).unwrap();
    let mut h = SupervisedHyper::new(1.0);
    h.kappa = 1.0;
    let learner = Learner::Supervised(SupervisedLearner::new(SupervisedModel::Svm, 2, h).unwrap());
    let opts = TrainOptions { epochs: 50, schedule: Schedule::Constant, shuffle_seed: None, lambda: LAMBDA };
    let run = train(learner, &d, &opts).unwrap();
    let first = run.epochs.iter().position(|r| r.train_error == Some(0.0));
    let svm_ok = first.is_some_and(|e| run.epochs[e + 1..].iter().all(|r| r.update_density == 0.0));

    let (_, sm, _) = sm_run();
    let sm_min = sm.epochs.iter().map(|r| r.update_density).fold(1.0, f64::min);
    outcome(
        svm_ok && sm_min == 1.0,
        format!(
            "svm separates the data after epoch {}, max later density {}; sm min density {sm_min}",
            first.map_or("never".into(), |e| (e + 1).to_string()),
            first
                .map(|e| run.epochs[e + 1..].iter().map(|r| r.update_density).fold(0.0, f64::max))
                .unwrap_or(f64::NAN),
        ),
    )
}

fn subspace_recovery() -> Outcome {
    let (d, run, elapsed) = sm_run();
    let Learner::Similarity(sm) = run.learner else { unreachable!() };
    let pca = pca_subspace(&d.x, 2).unwrap();
    let err = subspace_error(&sm.filter_basis().unwrap(), &pca.basis).unwrap();
    outcome(
        err < 0.1 && elapsed < Duration::from_secs(10),
        format!("subspace error {err:.4} after 50 epochs in {:.3} s", elapsed.as_secs_f64()),
    )
}

fn multiplicative_updates() -> Outcome {
    let eta = 0.05;
    let d = gen_regression(5, 50, 0.0, 11, true).unwrap();
    let y = d.y.clone().unwrap();
    let mut l = SupervisedLearner::new(SupervisedModel::ExpGrad, 5, SupervisedHyper::new(eta)).unwrap();
    let mut min_w = f64::INFINITY;
    let mut ratio_err = 0.0f64;
    for _ in 0..500 {
        for (xt, &yt) in d.x.columns().zip(&y) {
            let before = l.w.clone();
            let z = l.step(xt, yt).unwrap().z[0];
            for k in 0..5 {
                let expected = (eta * z * xt[k]).exp();
                ratio_err = ratio_err.max((l.w[k] / before[k] - expected).abs() / expected.max(1.0));
            }
            min_w = l.w.iter().copied().fold(min_w, f64::min);
        }
    }
    let mse = d.x.columns().zip(&y).map(|(xt, yt)| (yt - dot(&l.w, xt)).powi(2)).sum::<f64>() / y.len() as f64;
    outcome(
        min_w > 0.0 && mse < 1e-3 && ratio_err <= 1e-12,
        format!("min weight {min_w:.3e}, mse {mse:.3e}, ratio error {ratio_err:.3e}"),
    )
}

fn representer_span() -> Outcome {
    let mut rng = SeededRng::new(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = 2 + (rng.next_u64() % 6) as usize;
        let t = 1 + (rng.next_u64() % 6) as usize;
        let x = random_matrix(&mut rng, n, t);
        let reg = RegularizerModel::l2(rng.uniform_in(0.01, 2.0)).unwrap();
        let w = weights_from_duals(&reg, &rng.normal_vec(t), &x).unwrap();
        worst = worst.max(span_residual(&w, &x).unwrap());
    }
    let e1 = Matrix::from_columns(&[vec![1.0, 0.0, 0.0]]).unwrap();
    let ent = RegularizerModel::entropy(1.0, vec![1.0; 3]).unwrap();
    let counter = span_residual(&weights_from_duals(&ent, &[0.0], &e1).unwrap(), &e1).unwrap();
    outcome(
        worst < 1e-8 && counter > 0.5,
        format!("max l2 residual {worst:.3e}, entropy residual {counter:.4}"),
    )
}

fn gradient_checks() -> Outcome {
    let mut rng = SeededRng::new(9);
    let mut worst = Vec::new();
    for loss in [LossModel::Square, LossModel::HingeMargin { kappa: 1.0 }, LossModel::Logistic] {
        let mut err = 0.0f64;
        let mut count = 0;
        while count < 500 {
            let y = if loss == LossModel::Square { 3.0 * rng.normal() } else { sign(&mut rng) };
            let u = 3.0 * rng.normal();
            if (1.0 - y * u).abs() < 1e-3 && loss != LossModel::Square {
                continue;
            }
            err = err.max(finite_diff_check(
                |v: &[f64]| loss_value(&loss, y, v[0]).unwrap(),
                |v: &[f64]| vec![loss_subgradient(&loss, y, v[0]).unwrap()],
                &[vec![u]],
            ));
            count += 1;
        }
        worst.push(err);
    }
    let pts: Vec<Vec<f64>> = (0..81).map(|k| vec![0.1 + 0.01 * k as f64]).collect();
    let barrier = finite_diff_check(
        |z: &[f64]| entropy_barrier(z[0]).unwrap().value,
        |z: &[f64]| vec![entropy_barrier(z[0]).unwrap().derivative],
        &pts,
    );
    worst.push(barrier);
    // at λT = 1 the gradient of T·D is y − Gram·z − z
    let x = random_matrix(&mut rng, 3, 6);
    let y = rng.normal_vec(6);
    let p = DualParams::new(1.0 / 6.0, 1.0).unwrap();
    let gram = x.gram();
    let pts: Vec<Vec<f64>> = (0..20).map(|_| rng.normal_vec(6)).collect();
    worst.push(finite_diff_check(
        |z: &[f64]| 6.0 * DualModel::Ridge.dual_objective(z, &x, &y, &p).unwrap(),
        |z: &[f64]| {
            let gz = gram.matvec(z).unwrap();
            (0..6).map(|t| y[t] - gz[t] - z[t]).collect()
        },
        &pts,
    ));
    outcome(
        worst.iter().all(|&e| e < 1e-5),
        format!(
            "square {:.1e}, hinge {:.1e}, logistic {:.1e}, barrier {:.1e}, ridge dual {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn eigensolver() -> Outcome {
    let mut rng = SeededRng::new(10);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let b = random_matrix(&mut rng, 10, 10);
        let a = b.add(&b.transpose()).unwrap().scaled(0.5);
        let e = symmetric_eig(&a).unwrap();
        let v = &e.vectors;
        let rec = v.matmul(&Matrix::from_diagonal(&e.values)).unwrap().matmul(&v.transpose()).unwrap();
        worst = worst.max(rec.sub(&a).unwrap().frobenius_norm());
    }
    let small = symmetric_eig::<f64>(&Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap()).unwrap();
    let small_err = (small.values[0] - 3.0).abs().max((small.values[1] - 1.0).abs());
    outcome(
        worst < 1e-8 && small_err < 1e-10,
        format!("max reconstruction error {worst:.3e}, [[2,1],[1,2]] error {small_err:.1e}"),
    )
}

fn cli(dir: &Path, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_hebb-dual"))
        .args(args)
        .current_dir(dir)
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "hebb-dual {args:?} exited with {status}");
}

fn cli_pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    cli(dir, &["gen", "--kind", "regression", "--n", "5", "--t", "50", "--noise", "0.1", "--seed", "42", "-o", "d.json"]);
    cli(dir, &["gen", "--kind", "spiked", "--n", "6", "--t", "300", "--m", "2", "--seed", "3", "-o", "s.json"]);
    let ridge = [
        "train", "--model", "ridge", "--epochs", "50", "--eta", "0.05", "--schedule", "inverse-time",
        "--lambda-eff", "0.1", "--shuffle", "--seed", "5", "--data", "d.json", "-o", "ridge.json",
    ];
    cli(dir, &ridge);
    cli(dir, &["train", "--model", "sm", "--epochs", "5", "--eta", "0.01", "--data", "s.json", "-o", "sm.json"]);
    cli(dir, &["report", "ridge.json", "sm.json", "-o", "summary.csv"]);
    cli(dir, &["report", "ridge.json", "sm.json", "-o", "summary.json"]);
    ["d.json", "s.json", "ridge.json", "ridge.csv", "sm.json", "sm.csv", "summary.csv", "summary.json"]
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
        .collect()
}

fn cli_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = cli_pipeline(a.path());
    let second = cli_pipeline(b.path());
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0.as_str())
        .collect();
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} output files byte-identical across two invocations", first.len())
        } else {
            format!("differing files: {differing:?}")
        },
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("ridge primal-dual equivalence", ridge_equivalence),
        ("ridge strong and weak duality", strong_duality),
        ("prediction-error identity", prediction_error_identity),
        ("logistic fixed point", logistic_fixed_point),
        ("passive-aggressive sparsity", update_sparsity),
        ("similarity matching subspace", subspace_recovery),
        ("multiplicative updates", multiplicative_updates),
        ("representer span", representer_span),
        ("gradient checks", gradient_checks),
        ("eigensolver", eigensolver),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panicked: {msg}"))
            });
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

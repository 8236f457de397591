use goalshot::metrics::{auc_rank, ScoredSample};
use goalshot::mlp::{
    forward, load_model, predict_score, save_model, train, EarlyStopping, FailureRule, MlpParams, StopVerdict,
    TrainConfig,
};
use goalshot::rng;
use goalshot::scene::Outcome;
use rand::Rng;

fn separable(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<Outcome>) {
    let mut r = rng::seeded(seed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    while xs.len() < n {
        let x: Vec<f64> = vec![r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
        let margin = 2.0 * x[0] - x[1] + 0.5;
        if margin.abs() < 0.2 {
            continue;
        }
        ys.push(if margin > 0.0 { Outcome::Goal } else { Outcome::NoGoal });
        xs.push(x);
    }
    (xs, ys)
}

#[test]
fn learns_a_linear_rule() {
    let (tx, ty) = separable(1, 400);
    let (vx, vy) = separable(2, 200);
    let (sx, sy) = separable(3, 400);
    let cfg = TrainConfig { learning_rate: 0.01, max_epochs: 2000, seed: 4, ..TrainConfig::default() };
    let (model, report) = train(&tx, &ty, &vx, &vy, &cfg).unwrap();
    assert_eq!(model.layer_sizes, vec![2, 5, 2]);
    assert!(report.best_epoch <= report.epochs_run);
    let samples: Vec<ScoredSample> =
        sx.iter().zip(&sy).map(|(x, y)| ScoredSample::new(predict_score(&model, x).unwrap(), *y)).collect();
    let auc = auc_rank(&samples).unwrap();
    assert!(auc >= 0.99, "held-out AUC {auc}");
}

#[test]
fn decreasing_validation_error_never_stops() {
    let mut stop = EarlyStopping::new(FailureRule::BestSoFar, 5);
    for epoch in 0..10_000 {
        assert_eq!(stop.observe(1.0 / (1.0 + f64::from(epoch))), StopVerdict::Improved);
    }
    assert_eq!(stop.best_epoch(), 10_000);
}

#[test]
fn saved_model_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.model");
    let mut r = rng::seeded(8);
    let model = MlpParams::random(&[22, 5, 2], 0.3, &mut r).unwrap();
    save_model(&model, &path).unwrap();
    let loaded = load_model(&path).unwrap();
    for _ in 0..50 {
        let x: Vec<f64> = (0..22).map(|_| r.random_range(-60.0..60.0)).collect();
        let (a, b) = (forward(&model, &x).unwrap(), forward(&loaded, &x).unwrap());
        assert_eq!((a.0.to_bits(), a.1.to_bits()), (b.0.to_bits(), b.1.to_bits()));
    }
    let missing = dir.path().join("absent.model");
    let err = load_model(&missing).unwrap_err().to_string();
    assert!(err.contains("absent.model"), "{err}");
}

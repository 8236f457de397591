use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use goalshot::aim::{discretize_targets, p_goal, sigma, ShotQuery};
use goalshot::dynamics::crossing_spread;
use goalshot::exec::Execution;
use goalshot::experiment::{render_report, run_experiment, ReportFormat};
use goalshot::geometry::Vec2;
use goalshot::metrics::{feature_relevance, ks2_curve, roc_curve, write_ks2_csv, write_roc_csv, ScoredSample};
use goalshot::mlp::{load_model, predict_score, save_model, train, TrainReport};
use goalshot::policy::{lda_train, LdaPolicy, MlpPolicy, NaiveCenterPolicy, ShotPolicy};
use goalshot::scene::{
    balance_by_replication, design_matrix, generate_synthetic_scenes, load_scenes, save_scenes, split_dataset,
    univariate_stats, KickScene,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{Cli, Command, OutputFormat, PolicyKind, ReportKind, Thresholds};

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match cli.command {
        Command::GenData { n, out } => gen_data(&cfg, n, &out, exec),
        Command::Stats { data, format } => stats(&cfg, &data, format),
        Command::Train { data, model_out, report, learning_rate, max_epochs, patience } => {
            if let Some(v) = learning_rate {
                cfg.train.learning_rate = v;
            }
            if let Some(v) = max_epochs {
                cfg.train.max_epochs = v;
            }
            if let Some(v) = patience {
                cfg.train.patience = v;
            }
            train_model(&cfg, &data, &model_out, report.as_deref())
        }
        Command::Eval { model, data, all_scenes, roc, ks2 } => {
            eval(&cfg, &model, &data, all_scenes, roc.as_deref(), ks2.as_deref())
        }
        Command::Compare { model, data, a, b, games, shots_per_game, thresholds, format, out } => {
            apply_thresholds(&mut cfg, thresholds);
            if let Some(v) = games {
                cfg.experiment.games = v;
            }
            if let Some(v) = shots_per_game {
                cfg.experiment.shots_per_game = v;
            }
            compare(&cfg, model.as_deref(), data.as_deref(), (a, b), format, out.as_deref(), exec)
        }
        Command::AimTable { step, max_depth, max_lateral, out } => {
            cfg.validate()?;
            let table = aim_table(&cfg, step, max_depth, max_lateral)?;
            emit(&table, out.as_deref())
        }
        Command::Calibrate { rollouts, power, out } => {
            cfg.validate()?;
            let table = calibrate(&cfg, rollouts, power, exec)?;
            emit(&table, out.as_deref())
        }
        Command::ShowConfig => {
            cfg.validate()?;
            stdout(&cfg.to_toml()?)
        }
    }
}

fn apply_thresholds(cfg: &mut RunConfig, t: Thresholds) {
    if let Some(v) = t.p_goal_threshold {
        cfg.policy.p_goal_threshold = v;
    }
    if let Some(v) = t.score_threshold {
        cfg.policy.score_threshold = v;
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("{}", path.display())),
        None => stdout(text),
    }
}

/// Write to stdout; a closed pipe (e.g. `| head`) is not an error.
fn stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e).context("stdout"),
        _ => Ok(()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("{}", path.display()))?))
}

fn read_scenes(cfg: &RunConfig, path: &Path) -> Result<Vec<KickScene>> {
    let scenes = load_scenes(path, &cfg.field)?;
    ensure!(!scenes.is_empty(), "{}: no scenes", path.display());
    Ok(scenes)
}

fn gen_data(cfg: &RunConfig, n: usize, out: &Path, exec: Execution) -> Result<()> {
    cfg.validate()?;
    ensure!(n > 0, "--n must be at least 1");
    let scenes = generate_synthetic_scenes(n, &cfg.gen, &cfg.dynamics, &cfg.field, cfg.seed, exec)?;
    save_scenes(&scenes, out)?;
    let goals = scenes.iter().filter(|s| s.label.is_goal()).count();
    eprintln!("wrote {n} scenes ({goals} goals) to {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct StatsOutput {
    univariate: goalshot::scene::UnivariateReport,
    relevance: Vec<goalshot::metrics::FeatureRelevance>,
}

fn stats(cfg: &RunConfig, data: &Path, format: OutputFormat) -> Result<()> {
    cfg.validate()?;
    let scenes = read_scenes(cfg, data)?;
    let univariate = univariate_stats(&scenes, &cfg.field)?;
    let mut relevance = feature_relevance(&scenes, &cfg.field)?;
    relevance.sort_by(|a, b| b.folded_auc.total_cmp(&a.folded_auc));
    let out = StatsOutput { univariate, relevance };
    if format == OutputFormat::Json {
        return stdout(&(serde_json::to_string_pretty(&out)? + "\n"));
    }
    let goals = scenes.iter().filter(|s| s.label.is_goal()).count();
    let mut text = format!("{} scenes, {goals} goals\n\n", scenes.len());
    let _ = writeln!(
        text,
        "{:<32} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8}",
        "feature", "mean", "std", "median", "p1", "p99", "missing"
    );
    for f in &out.univariate.features {
        let _ = writeln!(
            text,
            "{:<32} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>8.3}",
            f.name, f.mean, f.std, f.median, f.p1, f.p99, f.missing_fraction
        );
    }
    let _ = writeln!(text, "\n{:<32} {:>8} {:>8}", "feature", "auc", "folded");
    for r in &out.relevance {
        let _ = writeln!(text, "{:<32} {:>8.4} {:>8.4}", r.name, r.auc, r.folded_auc);
    }
    stdout(&text)
}

#[derive(Serialize)]
struct TrainSummary {
    seed: u64,
    train_scenes: usize,
    balanced_train_scenes: usize,
    validation_scenes: usize,
    test_scenes: usize,
    #[serde(flatten)]
    report: TrainReport,
}

fn train_model(cfg: &RunConfig, data: &Path, model_out: &Path, report: Option<&Path>) -> Result<()> {
    cfg.validate()?;
    let scenes = read_scenes(cfg, data)?;
    let split = split_dataset(&scenes, cfg.seed)?;
    let balanced = balance_by_replication(&split.train, cfg.seed)?;
    let (tx, ty) = design_matrix(&balanced, &cfg.field);
    let (vx, vy) = design_matrix(&split.validation, &cfg.field);
    let (model, train_report) = train(&tx, &ty, &vx, &vy, &cfg.train_config())?;
    save_model(&model, model_out)?;
    let summary = TrainSummary {
        seed: cfg.seed,
        train_scenes: split.train.len(),
        balanced_train_scenes: balanced.len(),
        validation_scenes: split.validation.len(),
        test_scenes: split.test.len(),
        report: train_report,
    };
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    eprintln!(
        "{} epochs, best epoch {}, model written to {}",
        summary.report.epochs_run,
        summary.report.best_epoch,
        model_out.display()
    );
    emit(&json, report)
}

#[derive(Serialize)]
struct EvalSummary {
    samples: usize,
    goals: usize,
    auc: f64,
    ks2: f64,
    ks2_threshold: f64,
}

fn eval(cfg: &RunConfig, model: &Path, data: &Path, all: bool, roc: Option<&Path>, ks2: Option<&Path>) -> Result<()> {
    cfg.validate()?;
    let params = load_model(model)?;
    let scenes = read_scenes(cfg, data)?;
    let scored = if all { scenes } else { split_dataset(&scenes, cfg.seed)?.test };
    let (xs, ys) = design_matrix(&scored, &cfg.field);
    let samples = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| Ok(ScoredSample::new(predict_score(&params, x)?, y)))
        .collect::<goalshot::Result<Vec<_>>>()?;
    let roc_c = roc_curve(&samples)?;
    let ks2_c = ks2_curve(&samples)?;
    if let Some(path) = roc {
        let mut w = create(path)?;
        write_roc_csv(&roc_c, &mut w)?;
        w.flush().with_context(|| format!("{}", path.display()))?;
    }
    if let Some(path) = ks2 {
        let mut w = create(path)?;
        write_ks2_csv(&ks2_c, &mut w)?;
        w.flush().with_context(|| format!("{}", path.display()))?;
    }
    let summary = EvalSummary {
        samples: samples.len(),
        goals: samples.iter().filter(|s| s.label.is_goal()).count(),
        auc: roc_c.auc,
        ks2: ks2_c.ks2,
        ks2_threshold: ks2_c.ks2_threshold,
    };
    stdout(&(serde_json::to_string_pretty(&summary)? + "\n"))
}

fn build_policy(
    kind: PolicyKind,
    cfg: &RunConfig,
    model: Option<&Path>,
    data: Option<&Path>,
) -> Result<Box<dyn ShotPolicy>> {
    Ok(match kind {
        PolicyKind::Mlp => {
            let Some(path) = model else { bail!("policy `mlp` needs --model") };
            let params = load_model(path)?;
            Box::new(
                MlpPolicy::new(params, cfg.field, cfg.aim, cfg.policy)
                    .with_context(|| format!("{}", path.display()))?,
            )
        }
        PolicyKind::Lda => {
            let Some(path) = data else { bail!("policy `lda` needs --data to fit the baseline") };
            let scenes = read_scenes(cfg, path)?;
            let split = split_dataset(&scenes, cfg.seed)?;
            let balanced = balance_by_replication(&split.train, cfg.seed)?;
            let lda = lda_train(&balanced, &cfg.field)?;
            Box::new(LdaPolicy::new(lda, cfg.field, cfg.aim, cfg.policy)?)
        }
        PolicyKind::Naive => Box::new(NaiveCenterPolicy::new(cfg.field, cfg.aim)),
    })
}

fn compare(
    cfg: &RunConfig,
    model: Option<&Path>,
    data: Option<&Path>,
    (a, b): (PolicyKind, PolicyKind),
    format: ReportKind,
    out: Option<&Path>,
    exec: Execution,
) -> Result<()> {
    cfg.validate()?;
    let pa = build_policy(a, cfg, model, data)?;
    let pb = build_policy(b, cfg, model, data)?;
    let result = run_experiment(pa.as_ref(), pb.as_ref(), &cfg.experiment_config(), exec)?;
    let format = match format {
        ReportKind::Text => ReportFormat::Text,
        ReportKind::Csv => ReportFormat::Csv,
        ReportKind::Json => ReportFormat::Json,
    };
    emit(&render_report(&result.a, &result.b, format)?, out)
}

fn grid(max: f64, step: f64) -> Vec<f64> {
    let k = (max / step + 1e-9).floor() as i64;
    (-k..=k).map(|i| i as f64 * step).collect()
}

fn aim_table(cfg: &RunConfig, step: f64, max_depth: f64, max_lateral: f64) -> Result<String> {
    ensure!(step > 0.0 && step.is_finite(), "--step must be positive");
    ensure!(max_depth >= step, "--max-depth must be at least --step");
    ensure!(max_lateral >= 0.0, "--max-lateral must be non-negative");
    let f = &cfg.field;
    let targets = discretize_targets(f, &cfg.aim);
    let depths: Vec<f64> = grid(max_depth, step).into_iter().filter(|d| *d > 0.0).collect();
    let mut text = String::from("ball_x,ball_y,target_y,p_miss_left,p_miss_right,p_goal\n");
    for d in depths {
        for y in grid(max_lateral, step) {
            let ball = Vec2::new(f.goal_line_x - d, y);
            for t in &targets {
                let r = p_goal(&ShotQuery::new(ball, *t), f, &cfg.aim)
                    .with_context(|| format!("ball ({:.2}, {y:.2})", ball.x))?;
                let _ = writeln!(text, "{},{},{},{},{},{}", ball.x, y, t.y, r.p_left, r.p_right, r.p_goal);
            }
        }
    }
    Ok(text)
}

fn calibrate(cfg: &RunConfig, rollouts: usize, power: f64, exec: Execution) -> Result<String> {
    ensure!(rollouts >= 2, "--rollouts must be at least 2");
    let f = &cfg.field;
    let mut text = String::from("distance,aim_sigma,rollout_std,rollout_mean,crossed_fraction\n");
    let mut d = 5.0;
    while d < cfg.aim.sigma_horizon {
        let ball = Vec2::new(f.goal_line_x - d, 0.0);
        let s = crossing_spread(ball, f.goal_center(), power, &cfg.dynamics, f, rollouts, cfg.seed, exec)?;
        let crossed = s.crossed as f64 / s.rollouts as f64;
        let _ = writeln!(text, "{d},{},{},{},{crossed}", sigma(d, &cfg.aim)?, s.std_lateral, s.mean_lateral);
        d += 5.0;
    }
    Ok(text)
}

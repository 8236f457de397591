//! Shot episodes against a pursuing keeper and defenders, and paired
//! policy-vs-policy experiments built from them.

mod report;

pub use report::{render_report, ReportFormat};

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, crossing_point, BallState, DynamicsConfig, MAX_ROLLOUT_STEPS, STOP_SPEED};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::geometry::{FieldConfig, Vec2};
use crate::policy::{KickAction, KickDecision, ShotPolicy};
use crate::rng::{self, SimRng};
use crate::scene::{sample_scene, GenConfig, KickScene};
use crate::stats::{mean, sample_std};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KeeperModel {
    /// meters per step
    pub max_speed: f64,
    /// steps after the kick before the keeper starts to move
    pub reaction_delay: usize,
    pub catch_radius: f64,
    /// std of the keeper's lateral placement error when scenes are generated
    pub positioning_noise: f64,
}

impl Default for KeeperModel {
    fn default() -> Self {
        KeeperModel { max_speed: 0.25, reaction_delay: 3, catch_radius: 0.8, positioning_noise: 2.0 }
    }
}

impl KeeperModel {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.max_speed, self.catch_radius, self.positioning_noise].iter().all(|v| v.is_finite() && *v >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::config("keeper parameters must be finite and non-negative"))
        }
    }
}

/// Field players pursue the ball with the same rule as the keeper but may
/// only block it within `reach`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefenderModel {
    pub max_speed: f64,
    pub reaction_delay: usize,
    pub reach: f64,
}

impl Default for DefenderModel {
    fn default() -> Self {
        DefenderModel { max_speed: 0.2, reaction_delay: 2, reach: 0.4 }
    }
}

impl DefenderModel {
    pub fn validate(&self) -> Result<()> {
        if [self.max_speed, self.reach].iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(Error::config("defender parameters must be finite and non-negative"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EpisodeResult {
    Goal,
    /// Stopped by the keeper or a defender, or died before the line.
    Caught,
    Wide,
    NoKick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub kicked: bool,
    pub result: EpisodeResult,
    pub steps: usize,
}

/// Everything about the opposition that a shot is simulated against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Opposition {
    pub keeper: KeeperModel,
    pub defender: DefenderModel,
}

/// Move `from` towards the point of the ball's predicted path closest to it.
fn pursue(from: Vec2, ball: Vec2, heading: Vec2, goal_line_x: f64, max_speed: f64) -> Vec2 {
    let aim = match heading.normalized() {
        Some(dir) => {
            let limit = if dir.x > 0.0 { ((goal_line_x - ball.x) / dir.x).max(0.0) } else { f64::INFINITY };
            ball + dir * (from - ball).dot(dir).clamp(0.0, limit)
        }
        None => ball,
    };
    from + (aim - from).clamp_norm(max_speed)
}

fn distance_to_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Kick `ball` towards `target` and play the shot out.
#[allow(clippy::too_many_arguments)]
pub fn simulate_shot(
    ball: &BallState,
    target: Vec2,
    power: f64,
    keeper: Vec2,
    defenders: &[Vec2],
    opposition: &Opposition,
    dynamics: &DynamicsConfig,
    field: &FieldConfig,
    rng: &mut SimRng,
) -> Result<EpisodeOutcome> {
    let gx = field.goal_line_x;
    if ball.position.x >= gx {
        return Err(Error::domain("shot must start in front of the goal line"));
    }
    let mut ball = dynamics::kick(ball, power, (target - ball.position).angle(), dynamics)?;
    let mut keeper = keeper;
    let mut defenders = defenders.to_vec();
    let outcome = |result, steps| EpisodeOutcome { kicked: true, result, steps };

    for step in 1..=MAX_ROLLOUT_STEPS {
        let heading = ball.velocity + ball.acceleration;
        if step > opposition.keeper.reaction_delay {
            keeper = pursue(keeper, ball.position, heading, gx, opposition.keeper.max_speed);
            keeper.x = keeper.x.min(gx);
        }
        if step > opposition.defender.reaction_delay {
            for d in defenders.iter_mut() {
                *d = pursue(*d, ball.position, heading, gx, opposition.defender.max_speed);
            }
        }
        let next = dynamics::step(&ball, dynamics, rng);
        let crossed = next.position.x >= gx;
        let end = if crossed { crossing_point(ball.position, next.position, gx) } else { next.position };
        if distance_to_segment(keeper, ball.position, end) <= opposition.keeper.catch_radius {
            return Ok(outcome(EpisodeResult::Caught, step));
        }
        if defenders.iter().any(|d| distance_to_segment(*d, ball.position, end) <= opposition.defender.reach) {
            return Ok(outcome(EpisodeResult::Caught, step));
        }
        if crossed {
            let result = if field.between_posts(end.y) { EpisodeResult::Goal } else { EpisodeResult::Wide };
            return Ok(outcome(result, step));
        }
        if next.speed() < STOP_SPEED {
            return Ok(outcome(EpisodeResult::Caught, step));
        }
        ball = next;
    }
    Ok(outcome(EpisodeResult::Caught, MAX_ROLLOUT_STEPS))
}

/// Let `policy` decide on `scene` and, if it kicks, play the shot out.
pub fn run_episode(
    policy: &dyn ShotPolicy,
    scene: &KickScene,
    opposition: &Opposition,
    dynamics: &DynamicsConfig,
    field: &FieldConfig,
    rng: &mut SimRng,
) -> Result<(KickDecision, EpisodeOutcome)> {
    let decision = policy.decide(scene);
    let outcome = match (decision.action, decision.target) {
        (KickAction::Kick, Some(target)) => {
            let ball = BallState { position: scene.ball, velocity: scene.ball_velocity, acceleration: Vec2::ZERO };
            simulate_shot(
                &ball,
                target,
                scene.kick_power,
                scene.keeper,
                &scene.defenders,
                opposition,
                dynamics,
                field,
                rng,
            )?
        }
        _ => EpisodeOutcome { kicked: false, result: EpisodeResult::NoKick, steps: 0 },
    };
    Ok((decision, outcome))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub games: usize,
    pub shots_per_game: usize,
    /// keeper used to play the shots out; may differ from the one in `gen`
    pub keeper: KeeperModel,
    pub gen: GenConfig,
    pub dynamics: DynamicsConfig,
    pub field: FieldConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let gen = GenConfig::default();
        ExperimentConfig {
            games: 100,
            shots_per_game: 10,
            keeper: gen.keeper,
            gen,
            dynamics: DynamicsConfig::default(),
            field: FieldConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub kicks_a: usize,
    pub goals_a: usize,
    pub kicks_b: usize,
    pub goals_b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub game: usize,
    pub shot: usize,
    pub a: EpisodeOutcome,
    pub b: EpisodeOutcome,
    pub target_a: Option<Vec2>,
    pub target_b: Option<Vec2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchStats {
    pub policy: String,
    pub games: usize,
    pub kicks: usize,
    pub kicks_mean_per_game: f64,
    pub kicks_std: f64,
    pub goals: usize,
    pub goals_mean_per_game: f64,
    pub goals_std: f64,
    /// goals / kicks; `None` when no kick was taken
    pub effectiveness: Option<f64>,
    pub wins: usize,
    pub losses: usize,
    pub draws: usize,
}

impl MatchStats {
    /// Aggregate per-game (kicks, goals, opponent goals) triples.
    pub fn from_games(policy: &str, games: &[(usize, usize, usize)]) -> Self {
        let kicks: Vec<f64> = games.iter().map(|g| g.0 as f64).collect();
        let goals: Vec<f64> = games.iter().map(|g| g.1 as f64).collect();
        let total_kicks: usize = games.iter().map(|g| g.0).sum();
        let total_goals: usize = games.iter().map(|g| g.1).sum();
        MatchStats {
            policy: policy.to_string(),
            games: games.len(),
            kicks: total_kicks,
            kicks_mean_per_game: mean(&kicks),
            kicks_std: sample_std(&kicks),
            goals: total_goals,
            goals_mean_per_game: mean(&goals),
            goals_std: sample_std(&goals),
            effectiveness: (total_kicks > 0).then(|| total_goals as f64 / total_kicks as f64),
            wins: games.iter().filter(|g| g.1 > g.2).count(),
            losses: games.iter().filter(|g| g.1 < g.2).count(),
            draws: games.iter().filter(|g| g.1 == g.2).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub a: MatchStats,
    pub b: MatchStats,
    pub games: Vec<GameRecord>,
    pub episodes: Vec<EpisodeRecord>,
}

/// Paired comparison: in every episode both policies see the same scene and
/// the same noise stream.
pub fn run_experiment(
    policy_a: &dyn ShotPolicy,
    policy_b: &dyn ShotPolicy,
    config: &ExperimentConfig,
    exec: Execution,
) -> Result<ExperimentResult> {
    if config.games == 0 {
        return Err(Error::config("an experiment needs at least one game"));
    }
    config.gen.validate(&config.field)?;
    let opposition = Opposition { keeper: config.keeper, defender: config.gen.defender };
    let per_game = config.shots_per_game;
    let total = config.games * per_game;

    let episodes = map_indexed(total, exec, |i| -> Result<EpisodeRecord> {
        let scene =
            sample_scene(&config.gen, &config.field, &mut rng::derived(config.seed, rng::tag::SCENE, i as u64))?;
        let play = |policy: &dyn ShotPolicy| {
            let mut r = rng::derived(config.seed, rng::tag::SHOT, i as u64);
            run_episode(policy, &scene, &opposition, &config.dynamics, &config.field, &mut r)
        };
        let (da, a) = play(policy_a)?;
        let (db, b) = play(policy_b)?;
        Ok(EpisodeRecord { game: i / per_game, shot: i % per_game, a, b, target_a: da.target, target_b: db.target })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut games = vec![GameRecord { kicks_a: 0, goals_a: 0, kicks_b: 0, goals_b: 0 }; config.games];
    for e in &episodes {
        let g = &mut games[e.game];
        g.kicks_a += e.a.kicked as usize;
        g.goals_a += (e.a.result == EpisodeResult::Goal) as usize;
        g.kicks_b += e.b.kicked as usize;
        g.goals_b += (e.b.result == EpisodeResult::Goal) as usize;
    }
    let side_a: Vec<_> = games.iter().map(|g| (g.kicks_a, g.goals_a, g.goals_b)).collect();
    let side_b: Vec<_> = games.iter().map(|g| (g.kicks_b, g.goals_b, g.goals_a)).collect();
    Ok(ExperimentResult {
        a: MatchStats::from_games(policy_a.name(), &side_a),
        b: MatchStats::from_games(policy_b.name(), &side_b),
        games,
        episodes,
    })
}

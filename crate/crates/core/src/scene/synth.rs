//! Synthetic labeled shot scenes.
//!
//! Positions are sampled from an attacking zone in front of the goal, the
//! keeper stands on the ball-goal bisector with placement noise, and
//! defenders are scattered around the ball-goal corridor. The label comes
//! from playing the shot out with the ball dynamics and the keeper/defender
//! interception model; blocked shots are labeled NO_GOAL.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{KickScene, Outcome, MAX_DEFENDERS};
use crate::dynamics::{BallState, DynamicsConfig};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::experiment::{simulate_shot, DefenderModel, EpisodeResult, KeeperModel, Opposition};
use crate::geometry::{FieldConfig, Vec2};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    /// distance of the ball in front of the goal line (m)
    pub min_depth: f64,
    pub max_depth: f64,
    /// max |y| of the ball (m)
    pub max_lateral: f64,
    /// keeper distance from the goal center along the bisector (m)
    pub keeper_advance_min: f64,
    pub keeper_advance_max: f64,
    pub max_defenders: usize,
    /// lateral scatter of defenders around the ball-goal corridor (m)
    pub defender_spread: f64,
    pub kick_power_min: f64,
    pub kick_power_max: f64,
    /// speed of the ball at the moment of the kick (m/step)
    pub ball_speed_max: f64,
    /// distance kept between sampled targets and the posts (m)
    pub target_margin: f64,
    pub max_time: u32,
    pub keeper: KeeperModel,
    pub defender: DefenderModel,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            min_depth: 6.0,
            max_depth: 25.0,
            max_lateral: 18.0,
            keeper_advance_min: 0.5,
            keeper_advance_max: 4.0,
            max_defenders: 3,
            defender_spread: 8.0,
            kick_power_min: 80.0,
            kick_power_max: 100.0,
            ball_speed_max: 0.1,
            target_margin: 0.25,
            max_time: 6000,
            keeper: KeeperModel::default(),
            defender: DefenderModel::default(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self, field: &FieldConfig) -> Result<()> {
        let range = |lo: f64, hi: f64, what: &str| {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(Error::config(format!("empty sampling range for {what}: [{lo}, {hi}]")))
            }
        };
        range(self.min_depth, self.max_depth, "ball depth")?;
        range(self.keeper_advance_min, self.keeper_advance_max, "keeper advance")?;
        range(self.kick_power_min, self.kick_power_max, "kick power")?;
        if self.min_depth <= 0.0 || self.max_depth >= field.goal_line_x + field.field_length / 2.0 {
            return Err(Error::config("ball depth must be positive and inside the field"));
        }
        if !(self.max_lateral >= 0.0 && self.max_lateral <= field.field_width / 2.0) {
            return Err(Error::config("max_lateral must lie in [0, field_width / 2]"));
        }
        if self.kick_power_min < 0.0 {
            return Err(Error::config("kick power must be non-negative"));
        }
        if self.max_defenders > MAX_DEFENDERS {
            return Err(Error::config(format!("max_defenders must be at most {MAX_DEFENDERS}")));
        }
        if !(self.target_margin >= 0.0 && self.target_margin < field.goal_width / 2.0) {
            return Err(Error::config("target_margin must lie in [0, goal_width / 2)"));
        }
        if !(self.defender_spread >= 0.0 && self.ball_speed_max >= 0.0) {
            return Err(Error::config("defender_spread and ball_speed_max must be non-negative"));
        }
        self.keeper.validate()?;
        self.defender.validate()
    }
}

fn uniform(r: &mut SimRng, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        r.random_range(lo..hi)
    } else {
        lo
    }
}

fn gaussian(r: &mut SimRng, sd: f64) -> f64 {
    if sd > 0.0 {
        Normal::new(0.0, sd).expect("positive sd").sample(r)
    } else {
        0.0
    }
}

fn clamp_to_field(p: Vec2, field: &FieldConfig) -> Vec2 {
    Vec2::new(
        p.x.clamp(-field.field_length / 2.0, field.goal_line_x),
        p.y.clamp(-field.field_width / 2.0, field.field_width / 2.0),
    )
}

/// Draw one scene without playing it out. The label is left as NO_GOAL.
pub fn sample_scene(gen: &GenConfig, field: &FieldConfig, r: &mut SimRng) -> Result<KickScene> {
    gen.validate(field)?;
    let gx = field.goal_line_x;
    let goal = field.goal_center();
    let ball = Vec2::new(gx - uniform(r, gen.min_depth, gen.max_depth), uniform(r, -gen.max_lateral, gen.max_lateral));
    let to_goal = (goal - ball).normalized().unwrap_or(Vec2::new(1.0, 0.0));
    let attacker = clamp_to_field(ball - to_goal * 0.6, field);
    let attacker_body_angle = to_goal.angle() + gaussian(r, 0.5);

    let advance = uniform(r, gen.keeper_advance_min, gen.keeper_advance_max).min(ball.distance(goal) * 0.5);
    let keeper = goal + to_goal * (-advance) + Vec2::new(0.0, gaussian(r, gen.keeper.positioning_noise));
    let keeper = clamp_to_field(keeper, field);

    let n_def = r.random_range(0..=gen.max_defenders);
    let defenders = (0..n_def)
        .map(|_| {
            let along = uniform(r, 0.1, 0.9);
            let base = ball + (goal - ball) * along;
            let side = uniform(r, -gen.defender_spread, gen.defender_spread);
            clamp_to_field(base + Vec2::new(-to_goal.y, to_goal.x) * side, field)
        })
        .collect();

    let speed = uniform(r, 0.0, gen.ball_speed_max);
    let heading = uniform(r, -std::f64::consts::PI, std::f64::consts::PI);
    let half = field.goal_width / 2.0 - gen.target_margin;
    Ok(KickScene {
        time: r.random_range(0..=gen.max_time),
        ball,
        ball_velocity: Vec2::from_angle(heading) * speed,
        attacker,
        attacker_body_angle,
        keeper,
        defenders,
        kick_power: uniform(r, gen.kick_power_min, gen.kick_power_max),
        target: Vec2::new(gx, uniform(r, -half, half)),
        label: Outcome::NoGoal,
    })
}

fn labeled_scene(gen: &GenConfig, dynamics: &DynamicsConfig, field: &FieldConfig, r: &mut SimRng) -> Result<KickScene> {
    let mut scene = sample_scene(gen, field, r)?;
    let opposition = Opposition { keeper: gen.keeper, defender: gen.defender };
    let ball = BallState { position: scene.ball, velocity: scene.ball_velocity, acceleration: Vec2::ZERO };
    let power = scene.kick_power.min(dynamics.max_power);
    let out =
        simulate_shot(&ball, scene.target, power, scene.keeper, &scene.defenders, &opposition, dynamics, field, r)?;
    scene.label = if out.result == EpisodeResult::Goal { Outcome::Goal } else { Outcome::NoGoal };
    Ok(scene)
}

/// `n` labeled scenes; scene `i` uses its own stream derived from `seed`.
pub fn generate_synthetic_scenes(
    n: usize,
    gen: &GenConfig,
    dynamics: &DynamicsConfig,
    field: &FieldConfig,
    seed: u64,
    exec: Execution,
) -> Result<Vec<KickScene>> {
    if n == 0 {
        return Err(Error::data("scene count must be at least 1"));
    }
    gen.validate(field)?;
    dynamics.validate()?;
    map_indexed(n, exec, |i| labeled_scene(gen, dynamics, field, &mut rng::derived(seed, rng::tag::SCENE, i as u64)))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scenes_is_an_error() {
        let f = FieldConfig::default();
        assert!(generate_synthetic_scenes(
            0,
            &GenConfig::default(),
            &DynamicsConfig::default(),
            &f,
            0,
            Execution::Sequential
        )
        .is_err());
    }

    #[test]
    fn degenerate_region_is_an_error() {
        let f = FieldConfig::default();
        let gen = GenConfig { min_depth: 20.0, max_depth: 10.0, ..GenConfig::default() };
        assert!(generate_synthetic_scenes(5, &gen, &DynamicsConfig::default(), &f, 0, Execution::Sequential).is_err());
    }

    #[test]
    fn deterministic_and_valid() {
        let f = FieldConfig::default();
        let d = DynamicsConfig::default();
        let gen = GenConfig::default();
        let a = generate_synthetic_scenes(300, &gen, &d, &f, 42, Execution::Parallel).unwrap();
        let b = generate_synthetic_scenes(300, &gen, &d, &f, 42, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        for s in &a {
            s.validate(&f).unwrap();
            assert!(s.target.y.abs() <= f.goal_width / 2.0 - gen.target_margin);
            assert!(s.defenders.len() <= gen.max_defenders);
        }
        let c = generate_synthetic_scenes(300, &gen, &d, &f, 43, Execution::Parallel).unwrap();
        assert_ne!(a, c);
    }
}

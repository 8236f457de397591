//! Ball motion with per-step additive noise.
//!
//! One step: displacement `u = v + a + noise`, position `p += u`,
//! velocity `v = decay * u`, acceleration reset to zero. Each noise component
//! is drawn independently and uniformly from `[-r_max, r_max]` with
//! `r_max = noise_coefficient * |v + a|`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::geometry::{FieldConfig, Vec2};
use crate::rng::{self, SimRng};

/// Rollouts stop once the ball is slower than this (m/step).
pub const STOP_SPEED: f64 = 1e-3;

/// Hard cap on rollout length.
pub const MAX_ROLLOUT_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BallState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub acceleration: Vec2,
}

impl BallState {
    pub fn at_rest(position: Vec2) -> Self {
        BallState { position, ..Default::default() }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub decay: f64,
    pub noise_coefficient: f64,
    pub max_speed: f64,
    pub kick_power_rate: f64,
    pub max_power: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            decay: 0.94,
            noise_coefficient: 0.05,
            max_speed: 3.0,
            kick_power_rate: 0.027,
            max_power: 100.0,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::config("decay must lie in (0, 1)"));
        }
        if !(self.noise_coefficient >= 0.0 && self.noise_coefficient.is_finite()) {
            return Err(Error::config("noise_coefficient must be finite and >= 0"));
        }
        if !(self.max_speed > 0.0 && self.kick_power_rate > 0.0 && self.max_power > 0.0) {
            return Err(Error::config("max_speed, kick_power_rate and max_power must be positive"));
        }
        Ok(())
    }

    pub fn noiseless(self) -> Self {
        DynamicsConfig { noise_coefficient: 0.0, ..self }
    }
}

/// One step together with the noise that was drawn for it.
#[derive(Debug, Clone, Copy)]
pub struct StepTrace {
    pub state: BallState,
    pub displacement: Vec2,
    pub noise: Vec2,
    pub noise_bound: f64,
}

pub fn step_traced(state: &BallState, config: &DynamicsConfig, rng: &mut SimRng) -> StepTrace {
    let expected = state.velocity + state.acceleration;
    let noise_bound = config.noise_coefficient * expected.norm();
    let noise = if noise_bound > 0.0 {
        Vec2::new(rng.random_range(-noise_bound..=noise_bound), rng.random_range(-noise_bound..=noise_bound))
    } else {
        Vec2::ZERO
    };
    let displacement = (expected + noise).clamp_norm(config.max_speed);
    StepTrace {
        state: BallState {
            position: state.position + displacement,
            velocity: displacement * config.decay,
            acceleration: Vec2::ZERO,
        },
        displacement,
        noise,
        noise_bound,
    }
}

pub fn step(state: &BallState, config: &DynamicsConfig, rng: &mut SimRng) -> BallState {
    step_traced(state, config, rng).state
}

/// Set the acceleration produced by a kick of `power` towards `direction` (radians).
pub fn kick(state: &BallState, power: f64, direction: f64, config: &DynamicsConfig) -> Result<BallState> {
    if !(0.0..=config.max_power).contains(&power) {
        return Err(Error::domain(format!("kick power {power} outside [0, {}]", config.max_power)));
    }
    if !direction.is_finite() {
        return Err(Error::domain("kick direction must be finite"));
    }
    Ok(BallState { acceleration: Vec2::from_angle(direction) * (config.kick_power_rate * power), ..*state })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingOutcome {
    pub crossed: bool,
    /// Lateral coordinate where the ball crossed the goal line.
    pub lateral_at_goal_line: Option<f64>,
    pub steps_taken: usize,
}

/// Point where the segment `from -> to` meets the vertical line `x = line_x`,
/// assuming `from.x < line_x <= to.x`.
pub(crate) fn crossing_point(from: Vec2, to: Vec2, line_x: f64) -> Vec2 {
    let t = (line_x - from.x) / (to.x - from.x);
    Vec2::new(line_x, from.y + t * (to.y - from.y))
}

/// Step until the ball reaches the goal line or comes to rest.
pub fn rollout_to_goal_line(
    state: &BallState,
    config: &DynamicsConfig,
    field: &FieldConfig,
    rng: &mut SimRng,
) -> Result<CrossingOutcome> {
    if state.position.x >= field.goal_line_x {
        return Err(Error::domain("rollout must start in front of the goal line"));
    }
    let mut current = *state;
    for steps in 1..=MAX_ROLLOUT_STEPS {
        let next = step(&current, config, rng);
        if next.position.x >= field.goal_line_x {
            let at = crossing_point(current.position, next.position, field.goal_line_x);
            return Ok(CrossingOutcome { crossed: true, lateral_at_goal_line: Some(at.y), steps_taken: steps });
        }
        if next.speed() < STOP_SPEED {
            return Ok(CrossingOutcome { crossed: false, lateral_at_goal_line: None, steps_taken: steps });
        }
        current = next;
    }
    Ok(CrossingOutcome { crossed: false, lateral_at_goal_line: None, steps_taken: MAX_ROLLOUT_STEPS })
}

/// Noise-free distance covered by a ball launched at `initial_speed`.
pub fn travel_range(initial_speed: f64, decay: f64) -> Result<f64> {
    if !(decay > 0.0 && decay < 1.0) {
        return Err(Error::domain("decay must lie in (0, 1)"));
    }
    if !(initial_speed >= 0.0 && initial_speed.is_finite()) {
        return Err(Error::domain("initial speed must be finite and >= 0"));
    }
    Ok(initial_speed / (1.0 - decay))
}

/// Spread of goal-line crossings for one shot repeated many times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingSpread {
    pub rollouts: usize,
    pub crossed: usize,
    pub mean_lateral: f64,
    pub std_lateral: f64,
}

/// Kick from rest at `ball` towards `target` with `power` and roll out `n`
/// times with independent streams.
#[allow(clippy::too_many_arguments)]
pub fn crossing_spread(
    ball: Vec2,
    target: Vec2,
    power: f64,
    config: &DynamicsConfig,
    field: &FieldConfig,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<CrossingSpread> {
    let direction = (target - ball).angle();
    let kicked = kick(&BallState::at_rest(ball), power, direction, config)?;
    let outcomes = map_indexed(n, exec, |i| {
        let mut rng = rng::derived(seed, rng::tag::MONTE_CARLO, i as u64);
        rollout_to_goal_line(&kicked, config, field, &mut rng)
    });
    let mut laterals = Vec::with_capacity(n);
    for o in outcomes {
        if let Some(y) = o?.lateral_at_goal_line {
            laterals.push(y);
        }
    }
    let k = laterals.len();
    let mean = if k > 0 { laterals.iter().sum::<f64>() / k as f64 } else { f64::NAN };
    let std = if k > 1 {
        (laterals.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(CrossingSpread { rollouts: n, crossed: k, mean_lateral: mean, std_lateral: std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn still() -> BallState {
        BallState::default()
    }

    #[test]
    fn zero_noise_step_matches_update_rule() {
        let cfg = DynamicsConfig::default().noiseless();
        let s = BallState { velocity: Vec2::new(1.0, 0.0), ..still() };
        let next = step(&s, &cfg, &mut rng::seeded(0));
        assert_eq!(next.position, Vec2::new(1.0, 0.0));
        assert_eq!(next.velocity, Vec2::new(0.94, 0.0));
        assert_eq!(next.acceleration, Vec2::ZERO);
    }

    #[test]
    fn rest_state_only_resets_acceleration() {
        let cfg = DynamicsConfig::default();
        let s = BallState::at_rest(Vec2::new(3.0, -2.0));
        let next = step(&s, &cfg, &mut rng::seeded(1));
        assert_eq!(next, s);
    }

    #[test]
    fn speed_is_capped() {
        let cfg = DynamicsConfig::default();
        let s = BallState { velocity: Vec2::new(10.0, 0.0), ..still() };
        let next = step(&s, &cfg, &mut rng::seeded(2));
        assert!(next.speed() <= cfg.max_speed + 1e-12);
    }

    #[test]
    fn kick_sets_acceleration() {
        let cfg = DynamicsConfig::default();
        let s = BallState { position: Vec2::new(1.0, 2.0), velocity: Vec2::new(0.5, 0.0), ..still() };
        let k = kick(&s, 0.0, 1.0, &cfg).unwrap();
        assert_eq!(k.acceleration, Vec2::ZERO);
        let k = kick(&s, 100.0, 0.0, &cfg).unwrap();
        assert!((k.acceleration.x - 2.7).abs() < 1e-12 && k.acceleration.y == 0.0);
        assert_eq!((k.position, k.velocity), (s.position, s.velocity));
        let k = kick(&s, 40.0, std::f64::consts::FRAC_PI_2, &cfg).unwrap();
        assert!(k.acceleration.x.abs() < 1e-15);
        assert!((k.acceleration.y - 0.027 * 40.0).abs() < 1e-12);
        assert!(kick(&s, 100.5, 0.0, &cfg).is_err());
        assert!(kick(&s, -1.0, 0.0, &cfg).is_err());
    }

    #[test]
    fn straight_noiseless_shot_crosses_at_aim() {
        let field = FieldConfig::default();
        let cfg = DynamicsConfig::default().noiseless();
        let ball = Vec2::new(field.goal_line_x - 20.0, 0.0);
        let k = kick(&BallState::at_rest(ball), 100.0, 0.0, &cfg).unwrap();
        let out = rollout_to_goal_line(&k, &cfg, &field, &mut rng::seeded(3)).unwrap();
        assert!(out.crossed);
        assert_eq!(out.lateral_at_goal_line, Some(0.0));
    }

    #[test]
    fn dead_ball_stops_in_one_step() {
        let field = FieldConfig::default();
        let out = rollout_to_goal_line(&still(), &DynamicsConfig::default(), &field, &mut rng::seeded(4)).unwrap();
        assert_eq!(out, CrossingOutcome { crossed: false, lateral_at_goal_line: None, steps_taken: 1 });
    }

    #[test]
    fn rollout_rejects_ball_past_line() {
        let field = FieldConfig::default();
        let s = BallState::at_rest(Vec2::new(field.goal_line_x, 0.0));
        assert!(rollout_to_goal_line(&s, &DynamicsConfig::default(), &field, &mut rng::seeded(0)).is_err());
    }

    #[test]
    fn travel_range_examples() {
        assert!((travel_range(1.0, 0.94).unwrap() - 16.666_666_666_666_67).abs() < 1e-9);
        assert_eq!(travel_range(0.0, 0.94).unwrap(), 0.0);
        assert!(travel_range(1.0, 1.0).is_err());
    }

    #[test]
    fn stepper_to_rest_matches_travel_range() {
        let cfg = DynamicsConfig::default().noiseless();
        let mut s = BallState { velocity: Vec2::new(1.0 / cfg.decay, 0.0), ..still() };
        // first displacement is v = 1/decay; range of the remaining series equals that / (1 - decay)
        let mut r = rng::seeded(0);
        for _ in 0..2000 {
            s = step(&s, &cfg, &mut r);
        }
        let expected = travel_range(1.0 / cfg.decay, cfg.decay).unwrap();
        assert!((s.position.x - expected).abs() < 1e-6);
    }

    #[test]
    fn crossing_spread_is_deterministic_across_strategies() {
        let field = FieldConfig::default();
        let cfg = DynamicsConfig::default();
        let ball = Vec2::new(30.0, 5.0);
        let a = crossing_spread(ball, field.goal_center(), 100.0, &cfg, &field, 500, 9, Execution::Sequential).unwrap();
        let b = crossing_spread(ball, field.goal_center(), 100.0, &cfg, &field, 500, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.crossed, 500);
    }

    proptest! {
        #[test]
        fn noise_within_bound(seed in any::<u64>(), vx in -2.5..2.5f64, vy in -2.5..2.5f64, ax in -1.0..1.0f64) {
            let cfg = DynamicsConfig { max_speed: 100.0, ..DynamicsConfig::default() };
            let mut s = BallState { velocity: Vec2::new(vx, vy), acceleration: Vec2::new(ax, 0.0), ..still() };
            let mut r = rng::seeded(seed);
            for _ in 0..50 {
                let t = step_traced(&s, &cfg, &mut r);
                let expected = s.velocity + s.acceleration;
                prop_assert!(t.noise.x.abs() <= t.noise_bound && t.noise.y.abs() <= t.noise_bound);
                // one rounding of the addition
                let slack = 4.0 * f64::EPSILON * (expected.norm() + t.noise_bound);
                prop_assert!((t.displacement.x - expected.x).abs() <= t.noise_bound + slack);
                prop_assert!((t.displacement.y - expected.y).abs() <= t.noise_bound + slack);
                s = t.state;
            }
        }
    }
}

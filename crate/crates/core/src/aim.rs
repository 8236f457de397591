//! Probability that an aimed shot stays between the posts.
//!
//! Aim noise accumulates into an approximately Gaussian lateral deviation
//! around the shooting line. Its standard deviation at range `d` is
//! `-sigma_coefficient * ln(1 - d / sigma_horizon)`. The chance of missing on
//! one side is the Gaussian tail beyond that post, using the post's distance
//! from the ball for the range and its signed offset from the shooting line
//! for the threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{signed_offset, FieldConfig, Ray, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotQuery {
    pub ball: Vec2,
    pub target: Vec2,
}

impl ShotQuery {
    pub fn new(ball: Vec2, target: Vec2) -> Self {
        ShotQuery { ball, target }
    }

    pub fn mirrored(&self) -> Self {
        ShotQuery { ball: self.ball.mirror_y(), target: self.target.mirror_y() }
    }

    fn shooting_line(&self, field: &FieldConfig) -> Result<Ray> {
        if !(self.ball.is_finite() && self.target.is_finite()) {
            return Err(Error::domain("shot query must be finite"));
        }
        if (self.target.x - field.goal_line_x).abs() > 1e-9 {
            return Err(Error::domain("target must lie on the goal line"));
        }
        if self.ball.x >= field.goal_line_x {
            return Err(Error::domain("ball must be in front of the goal line"));
        }
        Ray::through(self.ball, self.target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AimConfig {
    pub sigma_coefficient: f64,
    pub sigma_horizon: f64,
    pub target_count: usize,
    pub target_inset: f64,
}

impl Default for AimConfig {
    fn default() -> Self {
        AimConfig { sigma_coefficient: 1.88, sigma_horizon: 45.0, target_count: 15, target_inset: 0.25 }
    }
}

impl AimConfig {
    pub fn validate(&self, field: &FieldConfig) -> Result<()> {
        if !(self.sigma_coefficient > 0.0 && self.sigma_horizon > 0.0) {
            return Err(Error::config("sigma_coefficient and sigma_horizon must be positive"));
        }
        if self.target_count == 0 {
            return Err(Error::config("target_count must be at least 1"));
        }
        if !(self.target_inset >= 0.0 && self.target_inset < field.goal_width / 2.0) {
            return Err(Error::config("target_inset must lie in [0, goal_width / 2)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AimResult {
    pub p_left: f64,
    pub p_right: f64,
    pub p_goal: f64,
}

/// Standard deviation of the lateral aim error at range `d`.
pub fn sigma(d: f64, config: &AimConfig) -> Result<f64> {
    if !(d >= 0.0 && d < config.sigma_horizon) {
        return Err(Error::domain(format!(
            "distance {d} outside [0, {}) for the aim-noise model",
            config.sigma_horizon
        )));
    }
    Ok(-config.sigma_coefficient * (-d / config.sigma_horizon).ln_1p())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(Y > threshold)` for `Y ~ N(0, sd²)`; a point mass at zero when `sd == 0`.
pub fn upper_tail(threshold: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        normal_cdf(-threshold / sd)
    } else if threshold > 0.0 {
        0.0
    } else if threshold < 0.0 {
        1.0
    } else {
        0.5
    }
}

/// Chance the shot passes outside the left (positive-y) post.
pub fn p_miss_left(query: &ShotQuery, field: &FieldConfig, config: &AimConfig) -> Result<f64> {
    let line = query.shooting_line(field)?;
    let post = field.left_post();
    let sd = sigma(query.ball.distance(post), config)?;
    // the post sits at +offset; the ball misses when its deviation exceeds it
    Ok(upper_tail(signed_offset(&line, post), sd))
}

/// Chance the shot passes outside the right (negative-y) post.
pub fn p_miss_right(query: &ShotQuery, field: &FieldConfig, config: &AimConfig) -> Result<f64> {
    let line = query.shooting_line(field)?;
    let post = field.right_post();
    let sd = sigma(query.ball.distance(post), config)?;
    Ok(upper_tail(-signed_offset(&line, post), sd))
}

pub fn p_goal(query: &ShotQuery, field: &FieldConfig, config: &AimConfig) -> Result<AimResult> {
    let mut p_left = p_miss_left(query, field, config)?;
    let mut p_right = p_miss_right(query, field, config)?;
    let total = p_left + p_right;
    // Different ranges to the two posts can push the tails past 1 for targets
    // well outside the goal; renormalize so the three outcomes stay a distribution.
    if total > 1.0 {
        p_left /= total;
        p_right = 1.0 - p_left;
    }
    Ok(AimResult { p_left, p_right, p_goal: 1.0 - p_left - p_right })
}

/// Evenly spaced aim points on the goal line, inset from both posts, ordered by lateral coordinate.
pub fn discretize_targets(field: &FieldConfig, config: &AimConfig) -> Vec<Vec2> {
    let n = config.target_count;
    if n <= 1 {
        return vec![field.goal_center(); n];
    }
    let half = field.goal_width / 2.0 - config.target_inset;
    let spacing = 2.0 * half / (n - 1) as f64;
    (0..n)
        .map(|i| {
            // pin the last point so rounding never pushes it past the inset
            let y = if i == n - 1 { half } else { -half + spacing * i as f64 };
            Vec2::new(field.goal_line_x, y)
        })
        .collect()
}

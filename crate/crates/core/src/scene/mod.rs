//! Kick scenes and the model's input features.

mod dataset;
mod io;
mod synth;

pub use dataset::{
    balance_by_replication, design_matrix, split_dataset, univariate_stats, DatasetSplit, FeatureStats,
    UnivariateReport,
};
pub use io::{load_scenes, read_scenes, save_scenes, write_scenes, SCENE_COLUMNS};
pub use synth::{generate_synthetic_scenes, sample_scene, GenConfig};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{opening_angle, signed_offset, FieldConfig, Ray, Vec2};

pub const MAX_DEFENDERS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Goal,
    NoGoal,
}

impl Outcome {
    pub fn is_goal(self) -> bool {
        self == Outcome::Goal
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Goal => "GOAL",
            Outcome::NoGoal => "NO_GOAL",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "GOAL" => Ok(Outcome::Goal),
            "NO_GOAL" => Ok(Outcome::NoGoal),
            other => Err(format!("expected GOAL or NO_GOAL, got `{other}`")),
        }
    }
}

/// World snapshot at the moment of a shot, with its outcome.
///
/// Decision code never reads `label`; it is only used for training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickScene {
    pub time: u32,
    pub ball: Vec2,
    pub ball_velocity: Vec2,
    pub attacker: Vec2,
    pub attacker_body_angle: f64,
    pub keeper: Vec2,
    pub defenders: Vec<Vec2>,
    pub kick_power: f64,
    pub target: Vec2,
    pub label: Outcome,
}

impl KickScene {
    pub fn validate(&self, field: &FieldConfig) -> Result<()> {
        if !field.contains(self.ball) {
            return Err(Error::data("ball outside the field"));
        }
        if !field.contains(self.attacker) || !field.contains(self.keeper) {
            return Err(Error::data("attacker or keeper outside the field"));
        }
        if self.defenders.len() > MAX_DEFENDERS {
            return Err(Error::data(format!("more than {MAX_DEFENDERS} defenders")));
        }
        if self.defenders.iter().any(|d| !field.contains(*d)) {
            return Err(Error::data("defender outside the field"));
        }
        if !(self.ball_velocity.is_finite()
            && self.target.is_finite()
            && self.attacker_body_angle.is_finite()
            && self.kick_power.is_finite())
        {
            return Err(Error::data("non-finite scene value"));
        }
        Ok(())
    }

    /// Reflect across the long center line.
    pub fn mirrored(&self) -> KickScene {
        KickScene {
            ball: self.ball.mirror_y(),
            ball_velocity: self.ball_velocity.mirror_y(),
            attacker: self.attacker.mirror_y(),
            attacker_body_angle: -self.attacker_body_angle,
            keeper: self.keeper.mirror_y(),
            defenders: self.defenders.iter().map(|d| d.mirror_y()).collect(),
            target: self.target.mirror_y(),
            ..self.clone()
        }
    }
}

pub const N_FEATURES: usize = 22;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "ball_x",
    "ball_y",
    "keeper_x",
    "keeper_y",
    "keeper_distance_to_ball",
    "keeper_abs_offset_from_shot_line",
    "angle_ball_keeper_destiny",
    "angle_attacker_vision",
    "attacker_body_angle_minus_shot_angle",
    "ball_distance_to_target",
    "ball_distance_to_near_post",
    "ball_distance_to_far_post",
    "kick_power",
    "target_lateral",
    "filtered_defender_count",
    "def1_distance_to_ball",
    "def1_abs_offset_from_shot_line",
    "def1_distance_to_goal_center",
    "def2_distance_to_ball",
    "def2_abs_offset_from_shot_line",
    "def2_distance_to_goal_center",
    "def3_distance_to_ball",
];

/// Indices into [`FeatureVector`] for features referenced by name in code.
pub mod feature {
    pub const BALL_Y: usize = 1;
    pub const KEEPER_Y: usize = 3;
    pub const KEEPER_DISTANCE_TO_BALL: usize = 4;
    pub const ANGLE_BALL_KEEPER_DESTINY: usize = 6;
    pub const ANGLE_ATTACKER_VISION: usize = 7;
    pub const TARGET_LATERAL: usize = 13;
    pub const DEFENDER_COUNT: usize = 14;
    /// Features whose sign flips when a scene is mirrored across the center line.
    pub const SIGNED_LATERAL: [usize; 3] = [BALL_Y, KEEPER_Y, TARGET_LATERAL];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn names() -> &'static [&'static str; N_FEATURES] {
        &FEATURE_NAMES
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.0[i])
    }
}

/// Defenders ahead of the attacker (between its x and the goal line) and
/// inside the penalty area's lateral band, nearest to the ball first.
pub fn filter_defenders(scene: &KickScene, field: &FieldConfig) -> Vec<Vec2> {
    let mut kept: Vec<Vec2> = scene
        .defenders
        .iter()
        .copied()
        .filter(|d| d.x > scene.attacker.x && d.x <= field.goal_line_x && field.in_penalty_band(*d))
        .collect();
    kept.sort_by(|a, b| a.distance(scene.ball).total_cmp(&b.distance(scene.ball)));
    kept
}

fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

fn shot_line(ball: Vec2, target: Vec2) -> Ray {
    Ray::through(ball, target).unwrap_or_else(|_| Ray::new(ball, Vec2::new(1.0, 0.0)).expect("unit ray"))
}

pub fn extract_features(scene: &KickScene, field: &FieldConfig) -> FeatureVector {
    extract_features_for_target(scene, scene.target, field)
}

/// Features of `scene` as if the shot were aimed at `target`.
pub fn extract_features_for_target(scene: &KickScene, target: Vec2, field: &FieldConfig) -> FeatureVector {
    let defenders = filter_defenders(scene, field);
    features_with_defenders(scene, target, &defenders, field)
}

pub(crate) fn features_with_defenders(
    scene: &KickScene,
    target: Vec2,
    defenders: &[Vec2],
    field: &FieldConfig,
) -> FeatureVector {
    let ball = scene.ball;
    let keeper = scene.keeper;
    let line = shot_line(ball, target);
    let shot_angle = (target - ball).angle();
    let d_left = ball.distance(field.left_post());
    let d_right = ball.distance(field.right_post());

    let far = field.field_length;
    let wide = field.penalty_area_width;
    let defender = |k: usize| defenders.get(k).copied();
    let dist_ball = |d: Option<Vec2>| d.map_or(far, |d| d.distance(ball));
    let offset = |d: Option<Vec2>| d.map_or(wide, |d| signed_offset(&line, d).abs());
    let dist_goal = |d: Option<Vec2>| d.map_or(far, |d| d.distance(field.goal_center()));

    FeatureVector([
        ball.x,
        ball.y,
        keeper.x,
        keeper.y,
        keeper.distance(ball),
        signed_offset(&line, keeper).abs(),
        opening_angle(ball, keeper, target).unwrap_or(0.0),
        opening_angle(scene.attacker, field.left_post(), field.right_post()).unwrap_or(0.0),
        wrap_angle(scene.attacker_body_angle - shot_angle).abs(),
        ball.distance(target),
        d_left.min(d_right),
        d_left.max(d_right),
        scene.kick_power,
        target.y,
        defenders.len() as f64,
        dist_ball(defender(0)),
        offset(defender(0)),
        dist_goal(defender(0)),
        dist_ball(defender(1)),
        offset(defender(1)),
        dist_goal(defender(1)),
        dist_ball(defender(2)),
    ])
}


#[cfg(test)]
mod tests {
    use super::test_support::scene_at;
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn field() -> FieldConfig {
        FieldConfig::default()
    }

    #[test]
    fn keeper_on_shot_line_has_zero_angle() {
        let f = field();
        let s = scene_at(Vec2::new(35.0, -4.0), Vec2::new(50.0, -1.0), Vec2::new(52.5, -0.5));
        let fv = extract_features(&s, &f);
        assert!(fv.0[feature::ANGLE_BALL_KEEPER_DESTINY].abs() < 1e-7);
        assert!(fv.0[5].abs() < 1e-12);
    }

    #[test]
    fn vision_angle_ten_meters_out() {
        let f = field();
        let mut s = scene_at(Vec2::new(42.5, 0.0), Vec2::new(51.0, 0.0), f.goal_center());
        s.attacker = s.ball;
        let fv = extract_features(&s, &f);
        assert!((fv.0[feature::ANGLE_ATTACKER_VISION] - 2.0 * (0.701f64).atan()).abs() < 1e-12);
        assert!((fv.0[feature::ANGLE_ATTACKER_VISION] - 1.2227).abs() < 1e-4);
    }

    #[test]
    fn no_defenders_uses_sentinels() {
        let f = field();
        let mut s = scene_at(Vec2::new(30.0, 0.0), Vec2::new(51.0, 0.0), f.goal_center());
        s.defenders = vec![Vec2::new(10.0, 0.0)];
        let fv = extract_features(&s, &f);
        assert_eq!(fv.0[feature::DEFENDER_COUNT], 0.0);
        for i in [15, 17, 18, 20, 21] {
            assert_eq!(fv.0[i], f.field_length);
        }
        assert_eq!(fv.0[16], f.penalty_area_width);
        assert_eq!(fv.0[19], f.penalty_area_width);
    }

    #[test]
    fn defender_filter_clauses() {
        let f = field();
        let mut s = scene_at(Vec2::new(30.0, 0.0), Vec2::new(51.0, 0.0), f.goal_center());
        let behind = Vec2::new(25.0, 0.0);
        let wide = Vec2::new(40.0, 25.0);
        let far_in = Vec2::new(45.0, 3.0);
        let near_in = Vec2::new(33.0, -1.0);
        s.defenders = vec![behind, wide, far_in, near_in];
        assert_eq!(filter_defenders(&s, &f), vec![near_in, far_in]);
    }

    fn random_scene(r: &mut impl Rng) -> KickScene {
        let f = field();
        let ball = Vec2::new(r.random_range(15.0..48.0), r.random_range(-20.0..20.0));
        let mut s = scene_at(
            ball,
            Vec2::new(r.random_range(46.0..52.5), r.random_range(-5.0..5.0)),
            Vec2::new(f.goal_line_x, r.random_range(-7.0..7.0)),
        );
        s.attacker_body_angle = r.random_range(-3.0..3.0);
        s.attacker = ball + Vec2::new(r.random_range(-1.0..0.5), r.random_range(-0.5..0.5));
        let n = r.random_range(0..=MAX_DEFENDERS);
        s.defenders = (0..n).map(|_| Vec2::new(r.random_range(0.0..52.5), r.random_range(-34.0..34.0))).collect();
        s
    }

    #[test]
    fn filter_matches_brute_force() {
        let f = field();
        let mut r = rng::seeded(11);
        for _ in 0..2000 {
            let s = random_scene(&mut r);
            let got = filter_defenders(&s, &f);
            let mut expected = Vec::new();
            for d in &s.defenders {
                let ahead = s.attacker.x < d.x && d.x <= f.goal_line_x;
                let in_band = -f.penalty_area_width / 2.0 <= d.y && d.y <= f.penalty_area_width / 2.0;
                if ahead && in_band {
                    expected.push(*d);
                }
            }
            // selection sort by distance, first-come on ties
            let mut ordered = Vec::new();
            while !expected.is_empty() {
                let mut best = 0;
                for (i, d) in expected.iter().enumerate() {
                    if d.distance(s.ball) < expected[best].distance(s.ball) {
                        best = i;
                    }
                }
                ordered.push(expected.remove(best));
            }
            assert_eq!(got, ordered);
            // idempotent: filtering the filtered set changes nothing
            let again = KickScene { defenders: got.clone(), ..s.clone() };
            assert_eq!(filter_defenders(&again, &f), got);
        }
    }

    #[test]
    fn mirroring_negates_only_signed_laterals() {
        let f = field();
        let mut r = rng::seeded(12);
        for _ in 0..2000 {
            let s = random_scene(&mut r);
            let a = extract_features(&s, &f);
            let b = extract_features(&s.mirrored(), &f);
            for (i, name) in FEATURE_NAMES.iter().enumerate() {
                let expected = if feature::SIGNED_LATERAL.contains(&i) { -a.0[i] } else { a.0[i] };
                assert!((b.0[i] - expected).abs() < 1e-9, "{name}: {} vs {}", a.0[i], b.0[i]);
            }
        }
    }

    #[test]
    fn features_are_finite() {
        let f = field();
        let mut r = rng::seeded(13);
        for _ in 0..500 {
            let s = random_scene(&mut r);
            assert!(extract_features(&s, &f).0.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(0.25) - 0.25).abs() < 1e-15);
    }
}

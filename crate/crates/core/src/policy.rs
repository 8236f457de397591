//! Shot decisions.
//!
//! Every policy shares stage 1: each discretized target is scored with the
//! analytic aim model and only those with `p_goal >= p_goal_threshold`
//! survive. Stage 2 is policy specific: the MLP policy scores survivors with
//! the network, the LDA policy with a linear discriminant.

use serde::{Deserialize, Serialize};

use crate::aim::{discretize_targets, p_goal, AimConfig, ShotQuery};
use crate::error::{Error, Result};
use crate::geometry::{FieldConfig, Vec2};
use crate::mlp::{predict_score, MlpParams};
use crate::scene::{extract_features, feature, features_with_defenders, filter_defenders, KickScene, N_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KickAction {
    Kick,
    NoKick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickDecision {
    pub action: KickAction,
    pub target: Option<Vec2>,
    pub neural_score: Option<f64>,
    pub discriminant: Option<f64>,
    pub p_goal: Option<f64>,
    /// the ball is beyond the aim model's range
    pub out_of_range: bool,
}

impl KickDecision {
    pub fn no_kick(out_of_range: bool) -> Self {
        KickDecision {
            action: KickAction::NoKick,
            target: None,
            neural_score: None,
            discriminant: None,
            p_goal: None,
            out_of_range,
        }
    }

    fn kick(target: Vec2, p_goal: f64) -> Self {
        KickDecision { action: KickAction::Kick, target: Some(target), p_goal: Some(p_goal), ..Self::no_kick(false) }
    }

    pub fn is_kick(&self) -> bool {
        self.action == KickAction::Kick
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub p_goal_threshold: f64,
    pub score_threshold: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig { p_goal_threshold: 0.70, score_threshold: 0.5 }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if !(open(self.p_goal_threshold) && open(self.score_threshold)) {
            return Err(Error::config("policy thresholds must lie in (0, 1)"));
        }
        Ok(())
    }
}

pub trait ShotPolicy: Sync {
    fn name(&self) -> &str;
    fn decide(&self, scene: &KickScene) -> KickDecision;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub target: Vec2,
    pub p_goal: f64,
}

/// Targets whose `p_goal` reaches the threshold, in lateral order; `None`
/// when the ball is outside the aim model's range.
pub fn stage_one(ball: Vec2, field: &FieldConfig, aim: &AimConfig, config: &PolicyConfig) -> Option<Vec<Candidate>> {
    let mut out = Vec::new();
    for target in discretize_targets(field, aim) {
        let p = p_goal(&ShotQuery::new(ball, target), field, aim).ok()?.p_goal;
        if p >= config.p_goal_threshold {
            out.push(Candidate { target, p_goal: p });
        }
    }
    Some(out)
}

/// Highest value strictly above `threshold`; ties go to the target nearest
/// the goal center, then to the smaller lateral coordinate.
pub fn select_best(scored: &[(Candidate, f64)], threshold: f64, field: &FieldConfig) -> Option<(Candidate, f64)> {
    let center = field.goal_center().y;
    let mut best: Option<(Candidate, f64)> = None;
    for &(c, v) in scored.iter().filter(|(_, v)| *v > threshold) {
        let better = match best {
            None => true,
            Some((b, bv)) => {
                let (dc, db) = ((c.target.y - center).abs(), (b.target.y - center).abs());
                v > bv || (v == bv && (dc < db || (dc == db && c.target.y < b.target.y)))
            }
        };
        if better {
            best = Some((c, v));
        }
    }
    best
}

fn two_stage(
    scene: &KickScene,
    field: &FieldConfig,
    aim: &AimConfig,
    config: &PolicyConfig,
    threshold: f64,
    value: impl Fn(&Candidate) -> f64,
) -> Option<(Candidate, f64)> {
    let survivors = stage_one(scene.ball, field, aim, config)?;
    let scored: Vec<(Candidate, f64)> = survivors.iter().map(|c| (*c, value(c))).collect();
    select_best(&scored, threshold, field)
}

fn out_of_range(scene: &KickScene, field: &FieldConfig, aim: &AimConfig, config: &PolicyConfig) -> bool {
    stage_one(scene.ball, field, aim, config).is_none()
}

/// Two-stage policy with the neural scorer.
#[derive(Debug, Clone)]
pub struct MlpPolicy {
    model: MlpParams,
    field: FieldConfig,
    aim: AimConfig,
    config: PolicyConfig,
}

impl MlpPolicy {
    pub fn new(model: MlpParams, field: FieldConfig, aim: AimConfig, config: PolicyConfig) -> Result<Self> {
        model.validate()?;
        if model.input_size() != N_FEATURES {
            return Err(Error::Dimension { expected: N_FEATURES, actual: model.input_size() });
        }
        if model.output_size() != 2 {
            return Err(Error::Dimension { expected: 2, actual: model.output_size() });
        }
        aim.validate(&field)?;
        config.validate()?;
        Ok(MlpPolicy { model, field, aim, config })
    }

    pub fn model(&self) -> &MlpParams {
        &self.model
    }

    /// Network score for shooting at `target` from `scene`.
    pub fn score_target(&self, scene: &KickScene, target: Vec2) -> f64 {
        let defenders = filter_defenders(scene, &self.field);
        self.score_with(scene, target, &defenders)
    }

    fn score_with(&self, scene: &KickScene, target: Vec2, defenders: &[Vec2]) -> f64 {
        let f = features_with_defenders(scene, target, defenders, &self.field);
        // dimensions are checked at construction and tanh keeps both nodes in range
        predict_score(&self.model, f.values()).unwrap_or(0.0)
    }
}

impl ShotPolicy for MlpPolicy {
    fn name(&self) -> &str {
        "mlp"
    }

    fn decide(&self, scene: &KickScene) -> KickDecision {
        let defenders = filter_defenders(scene, &self.field);
        let best = two_stage(scene, &self.field, &self.aim, &self.config, self.config.score_threshold, |c| {
            self.score_with(scene, c.target, &defenders)
        });
        match best {
            Some((c, s)) => KickDecision { neural_score: Some(s), ..KickDecision::kick(c.target, c.p_goal) },
            None => KickDecision::no_kick(out_of_range(scene, &self.field, &self.aim, &self.config)),
        }
    }
}

/// Linear discriminant over keeper distance and the ball-keeper-target angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub weight_distance: f64,
    pub weight_angle: f64,
    pub bias: f64,
}

impl LdaModel {
    pub fn discriminant(&self, keeper_distance: f64, angle: f64) -> f64 {
        self.weight_distance * keeper_distance + self.weight_angle * angle + self.bias
    }
}

/// Ordinary least squares of `targets` on the two inputs plus an intercept.
pub fn fit_least_squares(inputs: &[(f64, f64)], targets: &[f64]) -> Result<LdaModel> {
    if inputs.len() != targets.len() {
        return Err(Error::Dimension { expected: inputs.len(), actual: targets.len() });
    }
    if inputs.len() < 3 {
        return Err(Error::data("least squares needs at least 3 points"));
    }
    let n = inputs.len() as f64;
    let (m1, m2) = inputs.iter().fold((0.0, 0.0), |a, x| (a.0 + x.0, a.1 + x.1));
    let (m1, m2, mt) = (m1 / n, m2 / n, targets.iter().sum::<f64>() / n);
    let (mut s11, mut s12, mut s22, mut s1t, mut s2t) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&(a, b), &t) in inputs.iter().zip(targets) {
        let (a, b, t) = (a - m1, b - m2, t - mt);
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        s1t += a * t;
        s2t += b * t;
    }
    let det = s11 * s22 - s12 * s12;
    let well_posed = det.abs() > 1e-12 * (s11 * s22).max(f64::MIN_POSITIVE);
    if !well_posed {
        return Err(Error::data("singular normal equations: the two features are collinear or constant"));
    }
    let w1 = (s22 * s1t - s12 * s2t) / det;
    let w2 = (s11 * s2t - s12 * s1t) / det;
    Ok(LdaModel { weight_distance: w1, weight_angle: w2, bias: mt - w1 * m1 - w2 * m2 })
}

/// Fit the discriminant on labeled scenes with GOAL = +1, NO_GOAL = -1.
pub fn lda_train(scenes: &[KickScene], field: &FieldConfig) -> Result<LdaModel> {
    if !(scenes.iter().any(|s| s.label.is_goal()) && scenes.iter().any(|s| !s.label.is_goal())) {
        return Err(Error::data("LDA training needs both GOAL and NO_GOAL scenes"));
    }
    let inputs: Vec<(f64, f64)> = scenes
        .iter()
        .map(|s| {
            let f = extract_features(s, field);
            (f.0[feature::KEEPER_DISTANCE_TO_BALL], f.0[feature::ANGLE_BALL_KEEPER_DESTINY])
        })
        .collect();
    let targets: Vec<f64> = scenes.iter().map(|s| if s.label.is_goal() { 1.0 } else { -1.0 }).collect();
    fit_least_squares(&inputs, &targets)
}

/// Two-stage policy with the linear discriminant: kick iff it is positive.
#[derive(Debug, Clone)]
pub struct LdaPolicy {
    model: LdaModel,
    field: FieldConfig,
    aim: AimConfig,
    config: PolicyConfig,
}

impl LdaPolicy {
    pub fn new(model: LdaModel, field: FieldConfig, aim: AimConfig, config: PolicyConfig) -> Result<Self> {
        if ![model.weight_distance, model.weight_angle, model.bias].iter().all(|v| v.is_finite()) {
            return Err(Error::Model("LDA coefficients must be finite".into()));
        }
        aim.validate(&field)?;
        config.validate()?;
        Ok(LdaPolicy { model, field, aim, config })
    }

    pub fn discriminant_at(&self, scene: &KickScene, target: Vec2) -> f64 {
        let f = features_with_defenders(scene, target, &[], &self.field);
        self.model.discriminant(f.0[feature::KEEPER_DISTANCE_TO_BALL], f.0[feature::ANGLE_BALL_KEEPER_DESTINY])
    }
}

impl ShotPolicy for LdaPolicy {
    fn name(&self) -> &str {
        "lda"
    }

    fn decide(&self, scene: &KickScene) -> KickDecision {
        let best =
            two_stage(scene, &self.field, &self.aim, &self.config, 0.0, |c| self.discriminant_at(scene, c.target));
        match best {
            Some((c, d)) => KickDecision { discriminant: Some(d), ..KickDecision::kick(c.target, c.p_goal) },
            None => KickDecision::no_kick(out_of_range(scene, &self.field, &self.aim, &self.config)),
        }
    }
}

/// Always shoots at the goal center when the aim model covers the ball.
#[derive(Debug, Clone)]
pub struct NaiveCenterPolicy {
    field: FieldConfig,
    aim: AimConfig,
}

impl NaiveCenterPolicy {
    pub fn new(field: FieldConfig, aim: AimConfig) -> Self {
        NaiveCenterPolicy { field, aim }
    }
}

impl ShotPolicy for NaiveCenterPolicy {
    fn name(&self) -> &str {
        "naive-center"
    }

    fn decide(&self, scene: &KickScene) -> KickDecision {
        let center = self.field.goal_center();
        match p_goal(&ShotQuery::new(scene.ball, center), &self.field, &self.aim) {
            Ok(r) => KickDecision::kick(center, r.p_goal),
            Err(_) => KickDecision::no_kick(true),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::test_support::scene_at;

    fn field() -> FieldConfig {
        FieldConfig::default()
    }

    fn cand(y: f64) -> Candidate {
        Candidate { target: Vec2::new(52.5, y), p_goal: 0.9 }
    }

    #[test]
    fn best_score_wins() {
        let f = field();
        let picked = select_best(&[(cand(1.0), 0.7), (cand(-2.0), 0.9)], 0.5, &f).unwrap();
        assert_eq!(picked.0.target.y, -2.0);
        assert!(select_best(&[(cand(1.0), 0.5)], 0.5, &f).is_none());
        assert_eq!(select_best(&[(cand(1.0), 0.6)], 0.5, &f).unwrap().1, 0.6);
    }

    #[test]
    fn ties_prefer_center_then_smaller_lateral() {
        let f = field();
        let picked = select_best(&[(cand(3.0), 0.8), (cand(-1.0), 0.8), (cand(2.0), 0.8)], 0.5, &f).unwrap();
        assert_eq!(picked.0.target.y, -1.0);
        let picked = select_best(&[(cand(1.0), 0.8), (cand(-1.0), 0.8)], 0.5, &f).unwrap();
        assert_eq!(picked.0.target.y, -1.0);
    }

    #[test]
    fn far_ball_is_out_of_range() {
        let f = field();
        let s = scene_at(Vec2::new(0.0, 0.0), Vec2::new(51.0, 0.0), f.goal_center());
        let d = NaiveCenterPolicy::new(f, AimConfig::default()).decide(&s);
        assert_eq!(d, KickDecision::no_kick(true));
        let lda = LdaPolicy::new(
            LdaModel { weight_distance: 0.0, weight_angle: 0.0, bias: 1.0 },
            f,
            AimConfig::default(),
            PolicyConfig::default(),
        )
        .unwrap();
        assert_eq!(lda.decide(&s), KickDecision::no_kick(true));
    }

    #[test]
    fn naive_ignores_keeper() {
        let f = field();
        let a = scene_at(Vec2::new(40.0, 5.0), Vec2::new(51.0, 0.0), f.goal_center());
        let b = scene_at(Vec2::new(40.0, 5.0), Vec2::new(50.0, 3.0), f.goal_center());
        let p = NaiveCenterPolicy::new(f, AimConfig::default());
        assert_eq!(p.decide(&a), p.decide(&b));
        assert_eq!(p.decide(&a).target, Some(f.goal_center()));
    }

    #[test]
    fn hand_solved_least_squares() {
        let m = fit_least_squares(&[(1.0, 0.0), (0.0, 1.0), (0.0, 0.0)], &[1.0, -1.0, 1.0]).unwrap();
        assert!((m.weight_distance - 0.0).abs() < 1e-12);
        assert!((m.weight_angle + 2.0).abs() < 1e-12);
        assert!((m.bias - 1.0).abs() < 1e-12);
        assert!(fit_least_squares(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)], &[1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn no_signal_gives_zero_weights() {
        let grid: Vec<(f64, f64)> = (0..5).flat_map(|i| (0..5).map(move |j| (f64::from(i), f64::from(j)))).collect();
        let inputs: Vec<(f64, f64)> = grid.iter().chain(&grid).copied().collect();
        let targets: Vec<f64> = (0..50).map(|k| if k < 25 { 1.0 } else { -1.0 }).collect();
        let m = fit_least_squares(&inputs, &targets).unwrap();
        assert!(m.weight_distance.abs() < 1e-12 && m.weight_angle.abs() < 1e-12 && m.bias.abs() < 1e-12);
    }

    #[test]
    fn thresholds_validated() {
        assert!(PolicyConfig { p_goal_threshold: 1.0, ..PolicyConfig::default() }.validate().is_err());
        assert!(PolicyConfig::default().validate().is_ok());
    }
}

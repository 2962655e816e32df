//! Cost evaluation, layered collision checking, tiered trajectory
//! selection, and the rolling-horizon closed loop.

mod rollout;

pub use rollout::{run_rollout, EpisodeOutcome, Injectors, RolloutResult, StepTrace};

use serde::{Deserialize, Serialize};

use crate::frenet::{
    dynamic_feasible, CandidateGrid, CandidateTrajectory, DynamicLimits, ReferencePath,
};
use crate::geometry::{segments_intersect, OrientedRectangle};
use crate::prediction::{EnsemblePrediction, TrajectoryDistribution};
use crate::risk::{
    self, AgentPrediction, EnsembleForecast, EuMode, HarmParams, LauMode, RiskConfig, RiskError,
};
use crate::scenario::{footprint, AgentProperties, AgentState, GoalSpec};

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("no dynamically feasible candidate available")]
    NoFeasibleCandidate,
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Frenet(#[from] crate::frenet::FrenetError),
}

/// Outcome tier of the layered collision checks. Lower tiers are preferred
/// at selection time regardless of cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckTier {
    /// Passed boundary and agent collision checks.
    Passed,
    /// Failed the agent collision check only.
    AgentFail,
    /// Failed the road boundary check (dominates an agent failure).
    BoundaryFail,
}

/// Weighted multi-component planning cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Risk from other traffic participants.
    pub risk: f64,
    /// Road boundary violation severity.
    pub boundary: f64,
    /// Target-speed deviation.
    pub target: f64,
    /// Global path deviation.
    pub global_path: f64,
    /// Weighted total.
    pub total: f64,
}

/// Which uncertainties the planner consumes. Determines both the prediction
/// models used and the risk/check dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyMode {
    /// Deterministic model prediction, no uncertainty.
    NonUap,
    /// Constant-velocity extrapolation, no uncertainty.
    Cv,
    /// Short-term aleatoric: unimodal Gaussian spread.
    Sau,
    /// Multimodality only, per-mode spread suppressed.
    LauOnly,
    /// Short- and long-term aleatoric: full Gaussian mixture.
    SauLau,
    /// Ensemble disagreement only, per-member spread suppressed.
    EuOnly,
    /// Unimodal spread plus ensemble disagreement.
    SauEu,
    /// All three uncertainty kinds, hierarchical risk.
    SauLauEu,
}

impl UncertaintyMode {
    /// (number of mixture modes, ensemble size) the mode's predictor needs.
    pub fn model_shape(&self) -> (usize, usize) {
        match self {
            UncertaintyMode::NonUap | UncertaintyMode::Cv | UncertaintyMode::Sau => (1, 1),
            UncertaintyMode::LauOnly | UncertaintyMode::SauLau => (4, 1),
            UncertaintyMode::EuOnly | UncertaintyMode::SauEu => (1, 5),
            UncertaintyMode::SauLauEu => (4, 5),
        }
    }

    /// Whether the mode discards the predicted per-mode covariance and
    /// substitutes the tight degenerate one.
    pub fn degenerate_covariance(&self) -> bool {
        matches!(
            self,
            UncertaintyMode::NonUap
                | UncertaintyMode::Cv
                | UncertaintyMode::LauOnly
                | UncertaintyMode::EuOnly
        )
    }
}

/// Collision-check flavor for ensembles of unimodal members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Check the member-averaged (integrated) trajectory.
    Ic,
    /// Check each member and average the indicators.
    Mc,
}

/// Full planner configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub k_r: f64,
    pub k_b: f64,
    pub k_t: f64,
    pub k_g: f64,
    pub limits: DynamicLimits,
    /// Weighted-mode collision threshold.
    pub cc_th1: f64,
    /// Cross-member collision threshold.
    pub cc_th2: f64,
    pub check_mode: CheckMode,
    pub uncertainty_mode: UncertaintyMode,
    pub risk: RiskConfig,
    pub grid: CandidateGrid,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            k_r: 10.0,
            k_b: 5.0,
            k_t: 1.0,
            k_g: 0.5,
            limits: DynamicLimits::default(),
            cc_th1: 0.5,
            cc_th2: 0.5,
            check_mode: CheckMode::Mc,
            uncertainty_mode: UncertaintyMode::SauLauEu,
            risk: RiskConfig::default(),
            grid: CandidateGrid::default(),
        }
    }
}

/// Standard deviation [m] of the tight covariance substituted for modes
/// that carry no distributional spread (non-UAP, CV, LAU-only, EU-only).
pub const DEGENERATE_SIGMA: f64 = 0.1;

/// Everything the per-step cost/check evaluation needs besides the
/// candidate itself.
pub struct PlanningContext<'a> {
    pub ego_props: &'a AgentProperties,
    /// One forecast per visible agent, shaped for the active mode.
    pub forecasts: Vec<AgentForecastData>,
    pub boundaries: Vec<(Vector2<f64>, Vector2<f64>)>,
    pub path: &'a ReferencePath,
    pub goal: &'a GoalSpec,
    pub dt: f64,
    pub corridor: f64,
}

/// Per-agent prediction bundle used by costs and checks.
#[derive(Debug, Clone)]
pub struct AgentForecastData {
    pub props: AgentProperties,
    /// Heading fallback for near-stationary mean trajectories.
    pub last_heading: f64,
    pub ensemble: EnsemblePrediction,
}

impl AgentForecastData {
    fn as_ensemble_forecast(&self) -> EnsembleForecast<'_> {
        EnsembleForecast {
            ensemble: &self.ensemble,
            props: &self.props,
            fallback_heading: self.last_heading,
        }
    }
}

/// Boundary violation cost: zero without any footprint-boundary
/// intersection, otherwise the capped normalized square of the impact speed.
pub fn cost_boundary(
    candidate: &CandidateTrajectory,
    boundaries: &[(Vector2<f64>, Vector2<f64>)],
    ego_props: &AgentProperties,
    harm: &HarmParams,
) -> f64 {
    for st in &candidate.states {
        let fp = footprint(st, ego_props);
        let hit = boundaries
            .iter()
            .any(|&(a, b)| fp.intersects_segment(a, b));
        if hit {
            return (st.v / harm.v_ref).powi(2).min(1.0);
        }
    }
    0.0
}

/// Target-speed deviation cost: mean squared relative speed error, or mean
/// squared speed normalized by v_max when the target speed is zero.
pub fn cost_target(candidate: &CandidateTrajectory, goal: &GoalSpec, v_max: f64) -> f64 {
    let n = candidate.states.len().max(1) as f64;
    if goal.target_speed > 0.0 {
        candidate
            .states
            .iter()
            .map(|s| ((s.v - goal.target_speed) / goal.target_speed).powi(2))
            .sum::<f64>()
            / n
    } else {
        candidate
            .states
            .iter()
            .map(|s| (s.v / v_max).powi(2))
            .sum::<f64>()
            / n
    }
}

/// Global path deviation cost: mean |d| normalized by the corridor
/// half-width.
pub fn cost_global_path(candidate: &CandidateTrajectory, corridor: f64) -> f64 {
    let n = candidate.frenet_states.len().max(1) as f64;
    candidate
        .frenet_states
        .iter()
        .map(|fs| fs.d.abs())
        .sum::<f64>()
        / (n * corridor)
}

/// Dispatch the risk cost for the active uncertainty mode and assemble the
/// weighted total.
pub fn total_cost(
    candidate: &CandidateTrajectory,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
) -> Result<CostBreakdown, PlanError> {
    let risk = risk_cost(candidate, ctx, cfg)?;
    let boundary = cost_boundary(candidate, &ctx.boundaries, ctx.ego_props, &cfg.risk.harm);
    let target = cost_target(candidate, ctx.goal, cfg.limits.v_max);
    let global_path = cost_global_path(candidate, ctx.corridor);
    let total = cfg.k_r * risk + cfg.k_b * boundary + cfg.k_t * target + cfg.k_g * global_path;
    Ok(CostBreakdown {
        risk,
        boundary,
        target,
        global_path,
        total,
    })
}

fn risk_cost(
    candidate: &CandidateTrajectory,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
) -> Result<f64, PlanError> {
    let hp = &cfg.risk.harm;
    let mut total = 0.0;
    for forecast in &ctx.forecasts {
        let f = forecast.as_ensemble_forecast();
        total += match cfg.uncertainty_mode {
            UncertaintyMode::NonUap | UncertaintyMode::Cv | UncertaintyMode::Sau => {
                // Single member, single mode.
                let pred = AgentPrediction {
                    dist: &forecast.ensemble.members[0],
                    props: &forecast.props,
                    fallback_heading: forecast.last_heading,
                };
                risk::risk_sau(candidate, ctx.ego_props, &[pred], ctx.dt, hp)?
            }
            UncertaintyMode::LauOnly | UncertaintyMode::SauLau => risk::risk_lau_single(
                candidate,
                ctx.ego_props,
                &f,
                ctx.dt,
                hp,
                cfg.risk.lau_mode,
            )?,
            UncertaintyMode::EuOnly | UncertaintyMode::SauEu => {
                risk::risk_eu(candidate, ctx.ego_props, &f, ctx.dt, hp, cfg.risk.eu_mode)?
            }
            UncertaintyMode::SauLauEu => risk::comprehensive_risk(
                candidate,
                ctx.ego_props,
                &f,
                ctx.dt,
                &cfg.risk,
            )?,
        };
    }
    Ok(total)
}

/// One agent's collision check against a candidate, per the layered scheme.
fn agent_check_fails(
    candidate: &CandidateTrajectory,
    ego_props: &AgentProperties,
    forecast: &AgentForecastData,
    cfg: &PlannerConfig,
    dt: f64,
) -> bool {
    let ens = &forecast.ensemble;
    let m = ens.members.len();
    let k = ens.members[0].mode_count();
    if m == 1 {
        if k == 1 {
            return mean_trajectory_overlaps(candidate, ego_props, forecast, &ens.members[0], 0, dt);
        }
        return weighted_mode_rate(candidate, ego_props, forecast, &ens.members[0], dt)
            > cfg.cc_th1;
    }
    if k == 1 {
        match cfg.check_mode {
            CheckMode::Ic => {
                let integrated = crate::prediction::integrated_trajectory(ens);
                overlap_along(candidate, ego_props, forecast, &integrated, dt)
            }
            CheckMode::Mc => {
                let fails = ens
                    .members
                    .iter()
                    .filter(|member| {
                        mean_trajectory_overlaps(candidate, ego_props, forecast, member, 0, dt)
                    })
                    .count();
                fails as f64 / m as f64 > cfg.cc_th2
            }
        }
    } else {
        // Layered: weighted mode rate per member, then cross-member average.
        let fails = ens
            .members
            .iter()
            .filter(|member| {
                weighted_mode_rate(candidate, ego_props, forecast, member, dt) > cfg.cc_th1
            })
            .count();
        fails as f64 / m as f64 > cfg.cc_th2
    }
}

fn weighted_mode_rate(
    candidate: &CandidateTrajectory,
    ego_props: &AgentProperties,
    forecast: &AgentForecastData,
    member: &TrajectoryDistribution,
    dt: f64,
) -> f64 {
    let weights = member.mode_weights();
    (0..member.mode_count())
        .map(|k| {
            if mean_trajectory_overlaps(candidate, ego_props, forecast, member, k, dt) {
                weights[k]
            } else {
                0.0
            }
        })
        .sum()
}

fn mean_trajectory_overlaps(
    candidate: &CandidateTrajectory,
    ego_props: &AgentProperties,
    forecast: &AgentForecastData,
    member: &TrajectoryDistribution,
    mode: usize,
    dt: f64,
) -> bool {
    let means = crate::prediction::mean_trajectory(member, mode).expect("mode in range");
    overlap_along(candidate, ego_props, forecast, &means, dt)
}

/// Overlap between the ego footprint along the candidate and the agent
/// footprint placed along a mean trajectory.
fn overlap_along(
    candidate: &CandidateTrajectory,
    ego_props: &AgentProperties,
    forecast: &AgentForecastData,
    means: &[Vector2<f64>],
    dt: f64,
) -> bool {
    let _ = dt;
    let cull = 0.5
        * ((ego_props.length.powi(2) + ego_props.width.powi(2)).sqrt()
            + (forecast.props.length.powi(2) + forecast.props.width.powi(2)).sqrt());
    let n = candidate.states.len().min(means.len());
    for t in 0..n {
        let ego_state = &candidate.states[t];
        let center = means[t];
        if (ego_state.position() - center).norm() > cull {
            continue;
        }
        let heading = heading_along(means, t, forecast.last_heading);
        let agent_fp = OrientedRectangle::new(
            center,
            heading,
            forecast.props.length,
            forecast.props.width,
        );
        let ego_fp = footprint(ego_state, ego_props);
        if ego_fp.overlaps(&agent_fp) {
            return true;
        }
    }
    false
}

pub(crate) fn heading_along(means: &[Vector2<f64>], t: usize, fallback: f64) -> f64 {
    let (from, to) = if t + 1 < means.len() {
        (means[t], means[t + 1])
    } else if t > 0 {
        (means[t - 1], means[t])
    } else {
        return fallback;
    };
    let delta = to - from;
    if delta.norm() < 1e-6 {
        fallback
    } else {
        delta.y.atan2(delta.x)
    }
}

/// Run boundary and agent collision checks, classifying the candidate.
pub fn collision_check(
    candidate: &CandidateTrajectory,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
) -> CheckTier {
    let boundary_hit = candidate.states.iter().any(|st| {
        let fp = footprint(st, ctx.ego_props);
        ctx.boundaries
            .iter()
            .any(|&(a, b)| fp.intersects_segment(a, b))
    });
    if boundary_hit {
        return CheckTier::BoundaryFail;
    }
    let agent_hit = ctx
        .forecasts
        .iter()
        .any(|f| agent_check_fails(candidate, ctx.ego_props, f, cfg, ctx.dt));
    if agent_hit {
        CheckTier::AgentFail
    } else {
        CheckTier::Passed
    }
}

/// Planner output for one replanning step.
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub chosen: CandidateTrajectory,
    pub chosen_tier: CheckTier,
    /// All candidates with their annotations, in generation order.
    pub candidates: Vec<CandidateTrajectory>,
}

/// Filter, check, cost, and select the optimal candidate.
///
/// Tiers dominate cost: within the best non-empty tier, the lowest total
/// cost wins, with ties resolved by candidate index.
pub fn select_optimal(
    mut candidates: Vec<CandidateTrajectory>,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
) -> Result<PlanResult, PlanError> {
    for c in &mut candidates {
        c.feasible = dynamic_feasible(c, &cfg.limits);
    }
    if !candidates.iter().any(|c| c.feasible) {
        return Err(PlanError::NoFeasibleCandidate);
    }
    for c in &mut candidates {
        if !c.feasible {
            continue;
        }
        c.tier = Some(collision_check(c, ctx, cfg));
        c.cost = Some(total_cost(c, ctx, cfg)?);
    }
    let best = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.feasible)
        .min_by(|(ia, a), (ib, b)| {
            let ta = a.tier.unwrap();
            let tb = b.tier.unwrap();
            ta.cmp(&tb)
                .then(
                    a.cost
                        .unwrap()
                        .total
                        .partial_cmp(&b.cost.unwrap().total)
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
                .then(ia.cmp(ib))
        })
        .map(|(i, _)| i)
        .expect("feasible candidate exists");
    Ok(PlanResult {
        chosen: candidates[best].clone(),
        chosen_tier: candidates[best].tier.unwrap(),
        candidates,
    })
}

/// Build per-agent forecasts shaped for the mode: select the model outputs,
/// and replace covariances with the tight degenerate one where the mode
/// carries no distributional spread.
pub fn shape_forecast(mode: UncertaintyMode, mut ensemble: EnsemblePrediction) -> EnsemblePrediction {
    if mode.degenerate_covariance() {
        let tight = Matrix2::new(
            DEGENERATE_SIGMA * DEGENERATE_SIGMA,
            0.0,
            0.0,
            DEGENERATE_SIGMA * DEGENERATE_SIGMA,
        );
        for member in &mut ensemble.members {
            for step in &mut member.steps {
                for gm in &mut step.modes {
                    gm.set_covariance(tight);
                }
            }
        }
    }
    ensemble
}

/// Check whether a segment list intersects a polyline set. Helper shared by
/// the rollout's scenario precomputation.
pub(crate) fn any_segment_hit(
    segs: &[(Vector2<f64>, Vector2<f64>)],
    a: Vector2<f64>,
    b: Vector2<f64>,
) -> bool {
    segs.iter().any(|&(p, q)| segments_intersect(a, b, p, q))
}

#[cfg(test)]
mod tests;

//! Scenario data model: agents, road geometry, goals, and the observation
//! pipeline feeding prediction and planning.
//!
//! A [`Scenario`] is immutable after load. Non-ego agents replay scripted
//! ground-truth trajectories open-loop; the ego vehicle is driven by the
//! planner. All lengths are meters, angles radians in `(-pi, pi]`, speeds
//! m/s.

mod io;
mod observe;

pub use io::{load_scenario, save_scenario, scenario_to_json};
pub use observe::{apply_noise, apply_occlusion, observe_at_step, ObservationFrame};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{AlignedRect, OrientedRectangle};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse scenario JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported scenario schema version {0} (expected {CURRENT_SCHEMA_VERSION})")]
    Version(u32),
    #[error("invariant violation in `{field}`: {reason}")]
    Invariant { field: String, reason: String },
}

impl ScenarioError {
    fn invariant(field: &str, reason: impl Into<String>) -> Self {
        Self::Invariant {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// Schema version written to and required from scenario files.
pub const CURRENT_SCHEMA_VERSION: u32 = 1;

/// Kinematic state of a vehicle or pedestrian-like agent at one timestep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    /// Position east [m].
    pub x: f64,
    /// Position north [m].
    pub y: f64,
    /// Speed [m/s], non-negative.
    pub v: f64,
    /// Yaw [rad] in `(-pi, pi]`.
    pub heading: f64,
    /// Longitudinal acceleration [m/s^2].
    pub a: f64,
}

impl AgentState {
    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    /// Velocity as a world-frame vector.
    pub fn velocity(&self) -> Vector2<f64> {
        Vector2::new(self.v * self.heading.cos(), self.v * self.heading.sin())
    }

    fn validate(&self, field: &str) -> Result<(), ScenarioError> {
        let finite = [self.x, self.y, self.v, self.heading, self.a]
            .iter()
            .all(|f| f.is_finite());
        if !finite {
            return Err(ScenarioError::invariant(field, "non-finite component"));
        }
        if self.v < 0.0 {
            return Err(ScenarioError::invariant(field, "speed must be >= 0"));
        }
        if self.heading <= -std::f64::consts::PI || self.heading > std::f64::consts::PI {
            return Err(ScenarioError::invariant(
                field,
                "heading must lie in (-pi, pi]",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Car,
    Truck,
    PedestrianLike,
}

/// Static properties of an agent: identity, shape, and mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProperties {
    pub id: u32,
    /// Bounding length [m] along the heading axis.
    pub length: f64,
    /// Bounding width [m].
    pub width: f64,
    /// Mass [kg], feeds the harm model.
    pub mass: f64,
    pub kind: AgentKind,
}

impl AgentProperties {
    fn validate(&self, field: &str) -> Result<(), ScenarioError> {
        if !(self.length.is_finite() && self.width.is_finite() && self.mass.is_finite()) {
            return Err(ScenarioError::invariant(field, "non-finite property"));
        }
        if !(self.width > 0.0 && self.length >= self.width) {
            return Err(ScenarioError::invariant(
                field,
                "requires length >= width > 0",
            ));
        }
        if self.mass <= 0.0 {
            return Err(ScenarioError::invariant(field, "mass must be > 0"));
        }
        Ok(())
    }
}

/// A scripted non-ego agent: properties plus its ground-truth trajectory,
/// one state per simulation step starting at step 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedAgent {
    pub props: AgentProperties,
    pub trajectory: Vec<AgentState>,
}

impl ScriptedAgent {
    /// State at an absolute simulation step, holding the last state once the
    /// script is exhausted.
    pub fn state_at(&self, step: usize) -> &AgentState {
        let idx = step.min(self.trajectory.len() - 1);
        &self.trajectory[idx]
    }
}

/// Planning goal: a closed target region, a target speed, and a deadline in
/// simulation steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub target_region: OrientedRectangle,
    pub target_speed: f64,
    pub deadline: usize,
}

/// A complete, validated planning scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Simulation/prediction timestep [s].
    pub dt: f64,
    /// Prediction and planning horizon in steps.
    pub horizon: usize,
    pub ego: EgoSetup,
    pub agents: Vec<ScriptedAgent>,
    /// Static road boundaries as polylines.
    pub boundaries: Vec<Vec<[f64; 2]>>,
    /// Global reference path polyline.
    pub reference_path: Vec<[f64; 2]>,
    pub goal: GoalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoSetup {
    pub props: AgentProperties,
    pub initial_state: AgentState,
}

impl Scenario {
    /// Check every structural invariant, naming the offending field.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ScenarioError::invariant("dt", "must be finite and > 0"));
        }
        if self.horizon == 0 {
            return Err(ScenarioError::invariant("horizon", "must be > 0"));
        }
        self.ego.props.validate("ego.props")?;
        self.ego.initial_state.validate("ego.initial_state")?;
        let mut seen = vec![self.ego.props.id];
        for (i, agent) in self.agents.iter().enumerate() {
            let field = format!("agents[{i}]");
            agent.props.validate(&format!("{field}.props"))?;
            if seen.contains(&agent.props.id) {
                return Err(ScenarioError::invariant(
                    &format!("{field}.props.id"),
                    "duplicate agent id",
                ));
            }
            seen.push(agent.props.id);
            if agent.trajectory.is_empty() {
                return Err(ScenarioError::invariant(
                    &format!("{field}.trajectory"),
                    "must contain at least one state",
                ));
            }
            for (t, s) in agent.trajectory.iter().enumerate() {
                s.validate(&format!("{field}.trajectory[{t}]"))?;
            }
        }
        for (i, poly) in self.boundaries.iter().enumerate() {
            if poly.len() < 2 {
                return Err(ScenarioError::invariant(
                    &format!("boundaries[{i}]"),
                    "polyline needs >= 2 points",
                ));
            }
            if poly.iter().flatten().any(|c| !c.is_finite()) {
                return Err(ScenarioError::invariant(
                    &format!("boundaries[{i}]"),
                    "non-finite coordinate",
                ));
            }
        }
        if self.reference_path.iter().flatten().any(|c| !c.is_finite()) {
            return Err(ScenarioError::invariant(
                "reference_path",
                "non-finite coordinate",
            ));
        }
        let distinct = self
            .reference_path
            .windows(2)
            .any(|w| w[0] != w[1] || self.reference_path.len() > 2);
        if self.reference_path.len() < 2 || !distinct {
            return Err(ScenarioError::invariant(
                "reference_path",
                "needs >= 2 distinct points",
            ));
        }
        if !(self.goal.target_speed >= 0.0 && self.goal.target_speed.is_finite()) {
            return Err(ScenarioError::invariant(
                "goal.target_speed",
                "must be finite and >= 0",
            ));
        }
        if self.goal.deadline == 0 {
            return Err(ScenarioError::invariant("goal.deadline", "must be > 0"));
        }
        if !(self.goal.target_region.length > 0.0 && self.goal.target_region.width > 0.0) {
            return Err(ScenarioError::invariant(
                "goal.target_region",
                "side lengths must be > 0",
            ));
        }
        Ok(())
    }

    /// Planning horizon in seconds.
    pub fn horizon_seconds(&self) -> f64 {
        self.dt * self.horizon as f64
    }

    pub fn boundary_segments(&self) -> impl Iterator<Item = (Vector2<f64>, Vector2<f64>)> + '_ {
        self.boundaries.iter().flat_map(|poly| {
            poly.windows(2).map(|w| {
                (
                    Vector2::new(w[0][0], w[0][1]),
                    Vector2::new(w[1][0], w[1][1]),
                )
            })
        })
    }
}

/// Footprint of an agent: its bounding rectangle placed at the given state.
pub fn footprint(state: &AgentState, props: &AgentProperties) -> OrientedRectangle {
    OrientedRectangle::new(state.position(), state.heading, props.length, props.width)
}

/// Split an ego footprint into three equal axis-aligned rectangles.
///
/// The original rectangle is divided into thirds along its long side; each
/// third is then replaced by an axis-aligned rectangle of the same size
/// (length/3 by width) centered at that third's midpoint. This is the shape
/// approximation used by the collision-probability integral, which needs
/// axis-aligned integration domains.
pub fn ego_sub_rectangles(fp: &OrientedRectangle) -> [AlignedRect; 3] {
    let axis = crate::geometry::rotate(Vector2::new(1.0, 0.0), fp.heading);
    let step = fp.length / 3.0;
    let half_x = fp.length / 6.0;
    let half_y = 0.5 * fp.width;
    let c = fp.center_vec();
    [
        AlignedRect::from_center(c - axis * step, half_x, half_y),
        AlignedRect::from_center(c, half_x, half_y),
        AlignedRect::from_center(c + axis * step, half_x, half_y),
    ]
}

/// Goal test: inside the (closed) target region and within the deadline.
pub fn goal_reached(state: &AgentState, goal: &GoalSpec, step: usize) -> bool {
    step <= goal.deadline && goal.target_region.contains(state.position())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    pub(crate) fn state(x: f64, y: f64, v: f64, heading: f64) -> AgentState {
        AgentState {
            x,
            y,
            v,
            heading,
            a: 0.0,
        }
    }

    fn props(id: u32) -> AgentProperties {
        AgentProperties {
            id,
            length: 4.0,
            width: 2.0,
            mass: 1500.0,
            kind: AgentKind::Car,
        }
    }

    #[test]
    fn footprint_axis_aligned() {
        let fp = footprint(&state(0.0, 0.0, 0.0, 0.0), &props(1));
        let corners = fp.corners();
        for c in corners {
            assert_relative_eq!(c.x.abs(), 2.0, epsilon = 1e-12);
            assert_relative_eq!(c.y.abs(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn footprint_rotated_quarter_turn() {
        let fp = footprint(&state(0.0, 0.0, 0.0, PI / 2.0), &props(1));
        for c in fp.corners() {
            assert_relative_eq!(c.x.abs(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(c.y.abs(), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn footprint_matches_rotation_oracle() {
        // Corners must equal center + R(heading) * (local corner).
        let heading = 0.3;
        let fp = footprint(&state(1.0, 2.0, 3.0, heading), &props(1));
        let (s, c) = heading.sin_cos();
        let expect = [
            (2.0, 1.0),
            (-2.0, 1.0),
            (-2.0, -1.0),
            (2.0, -1.0),
        ]
        .map(|(lx, ly)| Vector2::new(1.0 + c * lx - s * ly, 2.0 + s * lx + c * ly));
        for (got, want) in fp.corners().iter().zip(expect.iter()) {
            assert_relative_eq!((got - want).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sub_rectangles_axis_aligned_case() {
        let fp = OrientedRectangle::new(Vector2::new(0.0, 0.0), 0.0, 6.0, 2.0);
        let rects = ego_sub_rectangles(&fp);
        let centers: Vec<_> = rects.iter().map(|r| r.center()).collect();
        assert_relative_eq!(centers[0].x, -2.0, epsilon = 1e-12);
        assert_relative_eq!(centers[1].x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(centers[2].x, 2.0, epsilon = 1e-12);
        for r in &rects {
            assert_relative_eq!(r.x1 - r.x0, 2.0, epsilon = 1e-12);
            assert_relative_eq!(r.y1 - r.y0, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sub_rectangles_quarter_turn() {
        let fp = OrientedRectangle::new(Vector2::new(0.0, 0.0), PI / 2.0, 6.0, 2.0);
        let rects = ego_sub_rectangles(&fp);
        let ys: Vec<f64> = rects.iter().map(|r| r.center().y).collect();
        assert_relative_eq!(ys[0], -2.0, epsilon = 1e-12);
        assert_relative_eq!(ys[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(ys[2], 2.0, epsilon = 1e-12);
        for r in &rects {
            assert_relative_eq!(r.center().x, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sub_rectangles_rotated_third_points() {
        let heading = 0.5;
        let fp = OrientedRectangle::new(Vector2::new(1.0, -1.0), heading, 6.0, 2.0);
        let rects = ego_sub_rectangles(&fp);
        let (s, c) = heading.sin_cos();
        for (i, offset) in [-2.0, 0.0, 2.0].iter().enumerate() {
            let want = Vector2::new(1.0 + c * offset, -1.0 + s * offset);
            assert_relative_eq!((rects[i].center() - want).norm(), 0.0, epsilon = 1e-12);
        }
        // Middle sub-rectangle center coincides with the footprint center.
        assert_relative_eq!(
            (rects[1].center() - fp.center_vec()).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn goal_membership() {
        let goal = GoalSpec {
            target_region: OrientedRectangle::new(Vector2::new(10.0, 0.0), 0.0, 4.0, 4.0),
            target_speed: 5.0,
            deadline: 10,
        };
        assert!(goal_reached(&state(10.0, 0.0, 0.0, 0.0), &goal, 1));
        assert!(!goal_reached(&state(10.0, 0.0, 0.0, 0.0), &goal, 11));
        // Closed region: boundary point counts.
        assert!(goal_reached(&state(12.0, 2.0, 0.0, 0.0), &goal, 1));
        assert!(!goal_reached(&state(12.1, 0.0, 0.0, 0.0), &goal, 1));
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut sc = crate::scenario::tests::minimal_scenario();
        sc.dt = 0.0;
        let err = sc.validate().unwrap_err();
        assert!(err.to_string().contains("dt"));

        let mut sc = minimal_scenario();
        sc.ego.initial_state.v = -1.0;
        assert!(sc.validate().is_err());

        let mut sc = minimal_scenario();
        sc.reference_path = vec![[0.0, 0.0]];
        assert!(sc.validate().is_err());
    }

    pub(crate) fn minimal_scenario() -> Scenario {
        Scenario {
            dt: 0.2,
            horizon: 10,
            ego: EgoSetup {
                props: props(0),
                initial_state: state(0.0, 0.0, 5.0, 0.0),
            },
            agents: vec![],
            boundaries: vec![],
            reference_path: vec![[0.0, 0.0], [100.0, 0.0]],
            goal: GoalSpec {
                target_region: OrientedRectangle::new(Vector2::new(80.0, 0.0), 0.0, 8.0, 6.0),
                target_speed: 5.0,
                deadline: 100,
            },
        }
    }
}

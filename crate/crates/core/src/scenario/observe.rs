//! Limited-perception injectors: what the planner actually sees.
//!
//! An [`ObservationFrame`] snapshots the observed histories of all non-ego
//! agents at one simulation step. Occlusion and Gaussian measurement noise
//! degrade the frame before it reaches the predictor.

use nalgebra::Vector2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{segments_intersect, OrientedRectangle};

use super::{AgentState, Scenario, ScenarioError};

/// One agent as seen by the ego at a given step.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentObservation {
    pub id: u32,
    pub visible: bool,
    /// Observed state history, oldest first. Empty iff not visible.
    pub history: Vec<AgentState>,
}

/// Per-step perception snapshot of all non-ego agents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservationFrame {
    pub agents: Vec<AgentObservation>,
}

/// Build the clean (un-degraded) observation frame at `step`: each agent's
/// history over the last `window` steps, holding the final scripted state for
/// agents whose script has ended.
pub fn observe_at_step(scenario: &Scenario, step: usize, window: usize) -> ObservationFrame {
    let start = (step + 1).saturating_sub(window);
    let agents = scenario
        .agents
        .iter()
        .map(|agent| AgentObservation {
            id: agent.props.id,
            visible: true,
            history: (start..=step).map(|t| *agent.state_at(t)).collect(),
        })
        .collect();
    ObservationFrame { agents }
}

/// Add i.i.d. zero-mean Gaussian noise with std `sigma` to every observed x
/// and y coordinate. Deterministic given `seed`; `sigma = 0` is the identity.
pub fn apply_noise(
    frame: &ObservationFrame,
    sigma: f64,
    seed: u64,
) -> Result<ObservationFrame, ScenarioError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(ScenarioError::Invariant {
            field: "sigma".to_string(),
            reason: "noise std must be finite and >= 0".to_string(),
        });
    }
    if sigma == 0.0 {
        return Ok(frame.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("validated sigma");
    let agents = frame
        .agents
        .iter()
        .map(|obs| {
            let history = obs
                .history
                .iter()
                .map(|s| AgentState {
                    x: s.x + normal.sample(&mut rng),
                    y: s.y + normal.sample(&mut rng),
                    ..*s
                })
                .collect();
            AgentObservation {
                id: obs.id,
                visible: obs.visible,
                history,
            }
        })
        .collect();
    Ok(ObservationFrame { agents })
}

/// Line-of-sight occlusion: an agent becomes invisible iff the segment from
/// the ego center to the agent's current center crosses any occluder edge.
/// Occluders are other agents' footprints (an agent never occludes itself)
/// and static boundary polylines. Invisible agents lose their histories.
pub fn apply_occlusion(
    frame: &ObservationFrame,
    ego: &AgentState,
    footprints: &[(u32, OrientedRectangle)],
    boundaries: &[(Vector2<f64>, Vector2<f64>)],
) -> ObservationFrame {
    let eye = ego.position();
    let agents = frame
        .agents
        .iter()
        .map(|obs| {
            let Some(current) = obs.history.last() else {
                return obs.clone();
            };
            if !obs.visible {
                return obs.clone();
            }
            let target = current.position();
            let blocked = footprints
                .iter()
                .filter(|(id, _)| *id != obs.id)
                .any(|(_, fp)| fp.intersects_segment(eye, target))
                || boundaries
                    .iter()
                    .any(|&(a, b)| segments_intersect(eye, target, a, b));
            if blocked {
                AgentObservation {
                    id: obs.id,
                    visible: false,
                    history: Vec::new(),
                }
            } else {
                obs.clone()
            }
        })
        .collect();
    ObservationFrame { agents }
}

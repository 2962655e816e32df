//! Candidate trajectory sampling in the Frenet frame.
//!
//! Primary candidates combine a lateral quintic (to a target offset, ending
//! at rest laterally) with a longitudinal velocity-keeping quartic, over a
//! grid of end offsets, end speeds, and maneuver durations. Emergency
//! candidates apply maximum braking or acceleration across a fan of lateral
//! offsets. Maneuvers shorter than the horizon are extended by
//! constant-velocity continuation so every candidate spans the full horizon.

use crate::geometry::wrap_angle;
use crate::planner::{CheckTier, CostBreakdown};
use crate::scenario::AgentState;

use super::poly::{fit_lateral_quintic, fit_longitudinal_quartic};
use super::{FrenetError, FrenetState, ReferencePath};

/// Hard kinematic limits used for feasibility filtering and emergency
/// maneuver construction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DynamicLimits {
    /// Maximum speed [m/s].
    pub v_max: f64,
    /// Symmetric acceleration bound [m/s^2].
    pub a_max: f64,
    /// Maximum curvature [1/m].
    pub kappa_max: f64,
}

impl Default for DynamicLimits {
    fn default() -> Self {
        Self {
            v_max: 15.0,
            a_max: 4.0,
            kappa_max: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverKind {
    Primary,
    EmergencyBrake,
    EmergencyAccel,
}

/// Sampling grid for primary candidates. The default grid spans 9 lateral
/// end offsets (±2 m, step 0.5) × 5 end speeds (current ±{0,2,4} m/s,
/// clamped into [0, v_max]) × 5 durations (1–5 s) = 225 candidates.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CandidateGrid {
    /// Absolute lateral end offsets [m] from the reference path.
    pub lateral_offsets: Vec<f64>,
    /// End-speed offsets [m/s] relative to the current longitudinal speed.
    pub speed_offsets: Vec<f64>,
    /// Maneuver durations [s].
    pub durations: Vec<f64>,
    /// Clamp bound for end speeds [m/s].
    pub v_max: f64,
}

impl Default for CandidateGrid {
    fn default() -> Self {
        Self {
            lateral_offsets: (-4..=4).map(|i| 0.5 * i as f64).collect(),
            speed_offsets: vec![-4.0, -2.0, 0.0, 2.0, 4.0],
            durations: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            v_max: 15.0,
        }
    }
}

impl CandidateGrid {
    pub fn cell_count(&self) -> usize {
        self.lateral_offsets.len() * self.speed_offsets.len() * self.durations.len()
    }

    /// End speeds for the current longitudinal speed. Offsets are clamped
    /// into [0, v_max]; if clamping collapses values, the span is re-spread
    /// evenly to keep them distinct.
    fn end_speeds(&self, s_dot: f64) -> Vec<f64> {
        let clamped: Vec<f64> = self
            .speed_offsets
            .iter()
            .map(|off| (s_dot + off).clamp(0.0, self.v_max))
            .collect();
        let collided = clamped.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-12);
        if !collided || clamped.len() < 2 {
            return clamped;
        }
        let lo = clamped.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = clamped.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let n = clamped.len();
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Lateral end offsets for the emergency fan (8 targets across ±2 m).
const EMERGENCY_OFFSETS: usize = 8;

/// A time-sampled ego trajectory candidate with planner annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTrajectory {
    /// Cartesian states at t = dt, 2dt, ..., horizon·dt.
    pub states: Vec<AgentState>,
    /// Matching Frenet states.
    pub frenet_states: Vec<FrenetState>,
    pub kind: ManeuverKind,
    /// Set by dynamic feasibility filtering.
    pub feasible: bool,
    /// Collision-check tier, filled by the planner.
    pub tier: Option<CheckTier>,
    /// Cost breakdown, filled by the planner.
    pub cost: Option<CostBreakdown>,
}

impl CandidateTrajectory {
    fn from_frenet_samples(
        path: &ReferencePath,
        samples: Vec<FrenetState>,
        kind: ManeuverKind,
    ) -> Self {
        let states = samples
            .iter()
            .map(|fs| path.cartesian_unchecked(fs))
            .collect();
        Self {
            states,
            frenet_states: samples,
            kind,
            feasible: true,
            tier: None,
            cost: None,
        }
    }
}

/// Generate one primary candidate per grid cell.
pub fn generate_candidates(
    path: &ReferencePath,
    ego_fs: &FrenetState,
    grid: &CandidateGrid,
    dt: f64,
    horizon: usize,
) -> Result<Vec<CandidateTrajectory>, FrenetError> {
    if grid.cell_count() == 0 {
        return Err(FrenetError::EmptyGrid);
    }
    let end_speeds = grid.end_speeds(ego_fs.s_dot);
    let mut out = Vec::with_capacity(grid.cell_count());
    for &d_end in &grid.lateral_offsets {
        for &v_end in &end_speeds {
            for &duration in &grid.durations {
                let lat = fit_lateral_quintic(
                    (ego_fs.d, ego_fs.d_dot, ego_fs.d_ddot),
                    (d_end, 0.0, 0.0),
                    duration,
                )?;
                let lon = fit_longitudinal_quartic(
                    (ego_fs.s, ego_fs.s_dot, ego_fs.s_ddot),
                    (v_end, 0.0),
                    duration,
                )?;
                let samples = (1..=horizon)
                    .map(|j| {
                        let t = j as f64 * dt;
                        if t <= duration {
                            FrenetState {
                                s: lon.eval(t),
                                s_dot: lon.deriv1(t),
                                s_ddot: lon.deriv2(t),
                                d: lat.eval(t),
                                d_dot: lat.deriv1(t),
                                d_ddot: lat.deriv2(t),
                            }
                        } else {
                            // Constant-velocity continuation past the
                            // maneuver end.
                            let v = lon.deriv1(duration);
                            FrenetState {
                                s: lon.eval(duration) + v * (t - duration),
                                s_dot: v,
                                s_ddot: 0.0,
                                d: lat.eval(duration),
                                d_dot: lat.deriv1(duration),
                                d_ddot: 0.0,
                            }
                        }
                    })
                    .collect();
                out.push(CandidateTrajectory::from_frenet_samples(
                    path,
                    samples,
                    ManeuverKind::Primary,
                ));
            }
        }
    }
    Ok(out)
}

/// Generate the emergency set: 8 maximum-braking and 8 maximum-acceleration
/// candidates across a fan of lateral end offsets.
pub fn generate_emergency(
    path: &ReferencePath,
    ego_fs: &FrenetState,
    limits: &DynamicLimits,
    dt: f64,
    horizon: usize,
) -> Vec<CandidateTrajectory> {
    let total = horizon as f64 * dt;
    let offsets: Vec<f64> = (0..EMERGENCY_OFFSETS)
        .map(|i| -2.0 + 4.0 * i as f64 / (EMERGENCY_OFFSETS - 1) as f64)
        .collect();
    let mut out = Vec::with_capacity(2 * EMERGENCY_OFFSETS);
    for kind in [ManeuverKind::EmergencyBrake, ManeuverKind::EmergencyAccel] {
        for &d_end in &offsets {
            let lat = fit_lateral_quintic(
                (ego_fs.d, ego_fs.d_dot, ego_fs.d_ddot),
                (d_end, 0.0, 0.0),
                total,
            )
            .expect("positive horizon");
            let samples = (1..=horizon)
                .map(|j| {
                    let t = j as f64 * dt;
                    let (s, s_dot, s_ddot) = match kind {
                        ManeuverKind::EmergencyBrake => {
                            clamped_profile(ego_fs.s, ego_fs.s_dot, -limits.a_max, 0.0, t)
                        }
                        ManeuverKind::EmergencyAccel => {
                            clamped_profile(ego_fs.s, ego_fs.s_dot, limits.a_max, limits.v_max, t)
                        }
                        ManeuverKind::Primary => unreachable!(),
                    };
                    FrenetState {
                        s,
                        s_dot,
                        s_ddot,
                        d: lat.eval(t.min(total)),
                        d_dot: lat.deriv1(t.min(total)),
                        d_ddot: lat.deriv2(t.min(total)),
                    }
                })
                .collect();
            out.push(CandidateTrajectory::from_frenet_samples(path, samples, kind));
        }
    }
    out
}

/// Constant-acceleration profile with speed clamped at `v_limit`.
fn clamped_profile(s0: f64, v0: f64, accel: f64, v_limit: f64, t: f64) -> (f64, f64, f64) {
    let t_hit = if accel.abs() < 1e-12 {
        f64::INFINITY
    } else {
        (v_limit - v0) / accel
    };
    if t_hit <= 0.0 {
        return (s0 + v0 * t, v0, 0.0);
    }
    if t <= t_hit {
        (s0 + v0 * t + 0.5 * accel * t * t, v0 + accel * t, accel)
    } else {
        let s_hit = s0 + v0 * t_hit + 0.5 * accel * t_hit * t_hit;
        (s_hit + v_limit * (t - t_hit), v_limit, 0.0)
    }
}

/// Kinematic feasibility: speed within [0, v_max], |a| within a_max, and
/// heading-difference curvature within kappa_max at every sample.
pub fn dynamic_feasible(candidate: &CandidateTrajectory, limits: &DynamicLimits) -> bool {
    const EPS: f64 = 1e-9;
    for (st, fs) in candidate.states.iter().zip(&candidate.frenet_states) {
        if st.v > limits.v_max + EPS || fs.s_dot < -EPS || st.a.abs() > limits.a_max + EPS {
            return false;
        }
    }
    for w in candidate.states.windows(2) {
        let ds = (w[1].position() - w[0].position()).norm();
        if ds > 1e-6 {
            let kappa = wrap_angle(w[1].heading - w[0].heading).abs() / ds;
            if kappa > limits.kappa_max + EPS {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn straight_path() -> ReferencePath {
        ReferencePath::from_polyline(&[[0.0, 0.0], [200.0, 0.0]]).unwrap()
    }

    fn cruising() -> FrenetState {
        FrenetState {
            s: 5.0,
            s_dot: 8.0,
            ..Default::default()
        }
    }

    #[test]
    fn default_grid_yields_225() {
        let path = straight_path();
        let cands =
            generate_candidates(&path, &cruising(), &CandidateGrid::default(), 0.2, 15).unwrap();
        assert_eq!(cands.len(), 225);
    }

    #[test]
    fn emergency_count_is_16() {
        let path = straight_path();
        let cands =
            generate_emergency(&path, &cruising(), &DynamicLimits::default(), 0.2, 15);
        assert_eq!(cands.len(), 16);
        let brakes = cands
            .iter()
            .filter(|c| c.kind == ManeuverKind::EmergencyBrake)
            .count();
        assert_eq!(brakes, 8);
    }

    #[test]
    fn single_cell_grid_holds_state() {
        let path = straight_path();
        let grid = CandidateGrid {
            lateral_offsets: vec![0.0],
            speed_offsets: vec![0.0],
            durations: vec![3.0],
            v_max: 15.0,
        };
        let cands = generate_candidates(&path, &cruising(), &grid, 0.2, 15).unwrap();
        assert_eq!(cands.len(), 1);
        for fs in &cands[0].frenet_states {
            assert_relative_eq!(fs.d, 0.0, epsilon = 1e-9);
            assert_relative_eq!(fs.s_dot, 8.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = CandidateGrid {
            lateral_offsets: vec![],
            speed_offsets: vec![],
            durations: vec![],
            v_max: 15.0,
        };
        assert!(matches!(
            generate_candidates(&straight_path(), &cruising(), &grid, 0.2, 15),
            Err(FrenetError::EmptyGrid)
        ));
    }

    #[test]
    fn end_speeds_stay_distinct_under_clamping() {
        let grid = CandidateGrid::default();
        for s_dot in [0.0, 1.0, 8.0, 14.0, 15.0] {
            let speeds = grid.end_speeds(s_dot);
            assert_eq!(speeds.len(), 5);
            for w in speeds.windows(2) {
                assert!(w[1] > w[0], "speeds not distinct at s_dot={s_dot}");
            }
            assert!(speeds.iter().all(|v| (0.0..=grid.v_max).contains(v)));
        }
    }

    #[test]
    fn candidates_satisfy_own_boundary_conditions() {
        // Residual oracle: re-evaluate the fitted polynomials against the
        // requested boundary conditions at t=0 and t=T.
        let ego = FrenetState {
            s: 2.0,
            s_dot: 6.0,
            s_ddot: 0.5,
            d: 0.3,
            d_dot: -0.2,
            d_ddot: 0.1,
        };
        let grid = CandidateGrid::default();
        let end_speeds = grid.end_speeds(ego.s_dot);
        for &d_end in &grid.lateral_offsets {
            for &v_end in &end_speeds {
                for &t in &grid.durations {
                    let lat =
                        fit_lateral_quintic((ego.d, ego.d_dot, ego.d_ddot), (d_end, 0.0, 0.0), t)
                            .unwrap();
                    let lon = fit_longitudinal_quartic(
                        (ego.s, ego.s_dot, ego.s_ddot),
                        (v_end, 0.0),
                        t,
                    )
                    .unwrap();
                    assert!((lat.eval(0.0) - ego.d).abs() < 1e-9);
                    assert!((lat.eval(t) - d_end).abs() < 1e-9);
                    assert!((lat.deriv1(t)).abs() < 1e-9);
                    assert!((lon.deriv1(0.0) - ego.s_dot).abs() < 1e-9);
                    assert!((lon.deriv1(t) - v_end).abs() < 1e-9);
                    assert!((lon.deriv2(t)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn braking_speed_non_increasing_reaching_zero() {
        let path = straight_path();
        let cands = generate_emergency(&path, &cruising(), &DynamicLimits::default(), 0.2, 15);
        for c in cands
            .iter()
            .filter(|c| c.kind == ManeuverKind::EmergencyBrake)
        {
            let speeds: Vec<f64> = c.frenet_states.iter().map(|fs| fs.s_dot).collect();
            for w in speeds.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
            // 8 m/s at 4 m/s^2 stops after 2 s, inside the 3 s horizon.
            assert!(speeds.last().unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn braking_never_outruns_zero_control() {
        let path = straight_path();
        let ego = cruising();
        let cands = generate_emergency(&path, &ego, &DynamicLimits::default(), 0.2, 15);
        for c in cands
            .iter()
            .filter(|c| c.kind == ManeuverKind::EmergencyBrake)
        {
            for (j, fs) in c.frenet_states.iter().enumerate() {
                let t = (j + 1) as f64 * 0.2;
                assert!(fs.s <= ego.s + ego.s_dot * t + 1e-9);
                assert!(fs.s_dot <= ego.s_dot + 1e-9);
            }
        }
    }

    #[test]
    fn acceleration_clamps_at_v_max() {
        let path = straight_path();
        let limits = DynamicLimits {
            v_max: 10.0,
            ..Default::default()
        };
        let cands = generate_emergency(&path, &cruising(), &limits, 0.2, 15);
        for c in cands
            .iter()
            .filter(|c| c.kind == ManeuverKind::EmergencyAccel)
        {
            for fs in &c.frenet_states {
                assert!(fs.s_dot <= limits.v_max + 1e-9);
            }
        }
    }

    #[test]
    fn stationary_trajectory_is_feasible() {
        let path = straight_path();
        let still = FrenetState {
            s: 5.0,
            ..Default::default()
        };
        let grid = CandidateGrid {
            lateral_offsets: vec![0.0],
            speed_offsets: vec![0.0],
            durations: vec![2.0],
            v_max: 15.0,
        };
        let cands = generate_candidates(&path, &still, &grid, 0.2, 15).unwrap();
        assert!(dynamic_feasible(&cands[0], &DynamicLimits::default()));
    }

    #[test]
    fn overspeed_sample_fails() {
        let path = straight_path();
        let grid = CandidateGrid {
            lateral_offsets: vec![0.0],
            speed_offsets: vec![0.0],
            durations: vec![2.0],
            v_max: 15.0,
        };
        let mut cands = generate_candidates(&path, &cruising(), &grid, 0.2, 15).unwrap();
        let limits = DynamicLimits::default();
        assert!(dynamic_feasible(&cands[0], &limits));
        cands[0].states[3].v = limits.v_max + 0.1;
        assert!(!dynamic_feasible(&cands[0], &limits));
    }

    #[test]
    fn arc_curvature_against_analytic_radius() {
        // States on a circle of radius r have curvature exactly 1/r.
        let build_arc = |r: f64| {
            let dt = 0.2;
            let v = 5.0;
            let omega = v / r;
            let states: Vec<AgentState> = (1..=15)
                .map(|j| {
                    let t = j as f64 * dt;
                    let a = omega * t;
                    AgentState {
                        x: r * a.sin(),
                        y: r * (1.0 - a.cos()),
                        v,
                        heading: wrap_angle(a),
                        a: 0.0,
                    }
                })
                .collect();
            let frenet_states = states
                .iter()
                .map(|s| FrenetState {
                    s_dot: s.v,
                    ..Default::default()
                })
                .collect();
            CandidateTrajectory {
                states,
                frenet_states,
                kind: ManeuverKind::Primary,
                feasible: true,
                tier: None,
                cost: None,
            }
        };
        let limits = DynamicLimits {
            kappa_max: 0.2,
            ..Default::default()
        };
        // Finite-difference curvature of a circular chord is slightly below
        // 1/r, so test with clear margins on both sides.
        assert!(dynamic_feasible(&build_arc(6.0), &limits)); // kappa ~ 0.167
        assert!(!dynamic_feasible(&build_arc(4.0), &limits)); // kappa ~ 0.25
    }
}

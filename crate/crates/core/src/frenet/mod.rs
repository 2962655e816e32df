//! Reference-path geometry and the Cartesian↔Frenet conversion.
//!
//! The reference path is a piecewise-linear polyline parametrized by arc
//! length `s`, with tangent angles interpolated between vertices so the
//! frame map `(s, d) -> base(s) + d * normal(s)` is continuous in `s`.
//! Projection inverts that map numerically, which keeps the round trip
//! well below the 1e-6 m tolerance everywhere inside the corridor.

mod candidates;
mod poly;

pub use candidates::{
    dynamic_feasible, generate_candidates, generate_emergency, CandidateGrid, CandidateTrajectory,
    DynamicLimits, ManeuverKind,
};
pub use poly::{fit_lateral_quintic, fit_longitudinal_quartic, Polynomial};

use nalgebra::Vector2;
use thiserror::Error;

use crate::geometry::wrap_angle;
use crate::scenario::AgentState;

/// Default corridor half-width [m]: states farther than this from the path
/// cannot be projected.
pub const DEFAULT_CORRIDOR: f64 = 20.0;

#[derive(Debug, Error)]
pub enum FrenetError {
    #[error("reference path needs at least 2 distinct points")]
    DegeneratePath,
    #[error("state is {distance:.3} m from the path, outside the {corridor:.3} m corridor")]
    OutOfCorridor { distance: f64, corridor: f64 },
    #[error("arc length {s:.3} outside path range [0, {length:.3}]")]
    OutOfRange { s: f64, length: f64 },
    #[error("non-finite input in `{0}`")]
    NonFinite(&'static str),
    #[error("candidate grid is empty")]
    EmptyGrid,
}

/// Frenet-frame state: longitudinal position/speed/acceleration along the
/// path and signed lateral offset/rate/acceleration (left of the path is
/// positive).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrenetState {
    pub s: f64,
    pub s_dot: f64,
    pub s_ddot: f64,
    pub d: f64,
    pub d_dot: f64,
    pub d_ddot: f64,
}

/// Arc-length parametrized reference path.
#[derive(Debug, Clone)]
pub struct ReferencePath {
    points: Vec<Vector2<f64>>,
    /// Cumulative arc length at each vertex, strictly increasing from 0.
    arc: Vec<f64>,
    /// Tangent angle at each vertex (adjacent segment directions averaged).
    theta: Vec<f64>,
}

impl ReferencePath {
    pub fn from_polyline(points: &[[f64; 2]]) -> Result<Self, FrenetError> {
        let mut pts: Vec<Vector2<f64>> = Vec::with_capacity(points.len());
        for p in points {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(FrenetError::NonFinite("reference path point"));
            }
            let v = Vector2::new(p[0], p[1]);
            if pts.last().map_or(true, |last| (v - last).norm() > 1e-12) {
                pts.push(v);
            }
        }
        if pts.len() < 2 {
            return Err(FrenetError::DegeneratePath);
        }
        let mut arc = vec![0.0];
        for w in pts.windows(2) {
            let last = *arc.last().unwrap();
            arc.push(last + (w[1] - w[0]).norm());
        }
        let seg_angle: Vec<f64> = pts
            .windows(2)
            .map(|w| (w[1].y - w[0].y).atan2(w[1].x - w[0].x))
            .collect();
        let n = pts.len();
        let mut theta = Vec::with_capacity(n);
        theta.push(seg_angle[0]);
        for i in 1..n - 1 {
            // Bisect the turn between adjacent segments.
            let delta = wrap_angle(seg_angle[i] - seg_angle[i - 1]);
            theta.push(wrap_angle(seg_angle[i - 1] + 0.5 * delta));
        }
        theta.push(seg_angle[n - 2]);
        Ok(Self {
            points: pts,
            arc,
            theta,
        })
    }

    pub fn total_length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.points
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.arc
    }

    /// Segment index and normalized parameter for an arc length, clamping to
    /// the end segments so callers may extrapolate slightly.
    fn locate(&self, s: f64) -> (usize, f64) {
        let n = self.arc.len();
        let i = match self
            .arc
            .binary_search_by(|probe| probe.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        let seg_len = self.arc[i + 1] - self.arc[i];
        ((i), (s - self.arc[i]) / seg_len)
    }

    /// Interpolated tangent angle at arc length `s`.
    pub fn tangent_angle(&self, s: f64) -> f64 {
        let (i, u) = self.locate(s);
        let delta = wrap_angle(self.theta[i + 1] - self.theta[i]);
        wrap_angle(self.theta[i] + u.clamp(0.0, 1.0) * delta)
    }

    /// Signed curvature of the interpolated frame at arc length `s`.
    pub fn curvature(&self, s: f64) -> f64 {
        let (i, _) = self.locate(s);
        let delta = wrap_angle(self.theta[i + 1] - self.theta[i]);
        delta / (self.arc[i + 1] - self.arc[i])
    }

    fn base_point(&self, s: f64) -> Vector2<f64> {
        let (i, u) = self.locate(s);
        self.points[i] + (self.points[i + 1] - self.points[i]) * u
    }

    /// Frame map. Extrapolates linearly beyond the path ends; public
    /// conversions gate the range.
    pub(crate) fn cartesian_point(&self, s: f64, d: f64) -> Vector2<f64> {
        let theta = self.tangent_angle(s);
        let normal = Vector2::new(-theta.sin(), theta.cos());
        self.base_point(s) + normal * d
    }

    /// Convert a Frenet state to a Cartesian agent state. `s` must lie on
    /// the path.
    pub fn frenet_to_cartesian(&self, fs: &FrenetState) -> Result<AgentState, FrenetError> {
        if !(fs.s >= 0.0 && fs.s <= self.total_length()) {
            return Err(FrenetError::OutOfRange {
                s: fs.s,
                length: self.total_length(),
            });
        }
        Ok(self.cartesian_unchecked(fs))
    }

    /// As [`Self::frenet_to_cartesian`] but extrapolating beyond the path
    /// ends, used when sampling candidates near the end of the path.
    pub(crate) fn cartesian_unchecked(&self, fs: &FrenetState) -> AgentState {
        let theta = self.tangent_angle(fs.s);
        let kappa = self.curvature(fs.s);
        let pos = self.cartesian_point(fs.s, fs.d);
        let tangential = fs.s_dot * (1.0 - kappa * fs.d);
        let v = (tangential * tangential + fs.d_dot * fs.d_dot).sqrt();
        let heading = wrap_angle(theta + fs.d_dot.atan2(tangential));
        let a = if v > 1e-9 {
            let cos_rel = tangential / v;
            let sin_rel = fs.d_dot / v;
            fs.s_ddot * (1.0 - kappa * fs.d) * cos_rel + fs.d_ddot * sin_rel
        } else {
            fs.s_ddot * (1.0 - kappa * fs.d)
        };
        AgentState {
            x: pos.x,
            y: pos.y,
            v,
            heading,
            a,
        }
    }

    /// Project a Cartesian state into the Frenet frame with the default
    /// corridor.
    pub fn project_to_frenet(&self, state: &AgentState) -> Result<FrenetState, FrenetError> {
        self.project_with_corridor(state, DEFAULT_CORRIDOR)
    }

    pub fn project_with_corridor(
        &self,
        state: &AgentState,
        corridor: f64,
    ) -> Result<FrenetState, FrenetError> {
        let p = state.position();
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Err(FrenetError::NonFinite("state position"));
        }
        let (s, d) = self.project_point(p);
        if d.abs() > corridor {
            return Err(FrenetError::OutOfCorridor {
                distance: d.abs(),
                corridor,
            });
        }
        let theta = self.tangent_angle(s);
        let kappa = self.curvature(s);
        let rel = wrap_angle(state.heading - theta);
        let mut denom = 1.0 - kappa * d;
        if denom.abs() < 1e-6 {
            denom = 1e-6_f64.copysign(denom);
        }
        Ok(FrenetState {
            s,
            s_dot: state.v * rel.cos() / denom,
            s_ddot: state.a * rel.cos() / denom,
            d,
            d_dot: state.v * rel.sin(),
            d_ddot: state.a * rel.sin(),
        })
    }

    /// Foot of the frame projection: the `(s, d)` minimizing distance, found
    /// by refining the plain polyline projection against the interpolated
    /// tangent field.
    fn project_point(&self, p: Vector2<f64>) -> (f64, f64) {
        // Coarse pass: nearest point over all segments.
        let mut best_s = 0.0;
        let mut best_dist = f64::INFINITY;
        for i in 0..self.points.len() - 1 {
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let len2 = ab.norm_squared();
            let u = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
            let foot = a + ab * u;
            let dist = (p - foot).norm();
            if dist < best_dist {
                best_dist = dist;
                best_s = self.arc[i] + u * (self.arc[i + 1] - self.arc[i]);
            }
        }

        // Refine: g(s) = (p - base(s)) . tangent(s) must vanish at the foot.
        let g = |s: f64| {
            let theta = self.tangent_angle(s);
            let t = Vector2::new(theta.cos(), theta.sin());
            (p - self.base_point(s)).dot(&t)
        };
        let total = self.total_length();
        let window = (2.0 * best_dist + 1.0).min(total);
        let lo = (best_s - window).max(0.0);
        let hi = (best_s + window).min(total);
        let samples = 64;
        let mut roots: Vec<f64> = Vec::new();
        let mut prev_s = lo;
        let mut prev_g = g(lo);
        for k in 1..=samples {
            let s = lo + (hi - lo) * (k as f64) / (samples as f64);
            let gs = g(s);
            if prev_g == 0.0 {
                roots.push(prev_s);
            } else if prev_g * gs < 0.0 {
                roots.push(bisect(&g, prev_s, s, prev_g));
            }
            prev_s = s;
            prev_g = gs;
        }
        if prev_g == 0.0 {
            roots.push(prev_s);
        }
        if roots.is_empty() {
            // Projection falls beyond the path ends; clamp.
            roots.push(if g(lo) > 0.0 { hi } else { lo });
        }

        let mut best = (best_s, f64::INFINITY);
        for s in roots {
            let theta = self.tangent_angle(s);
            let normal = Vector2::new(-theta.sin(), theta.cos());
            let d = (p - self.base_point(s)).dot(&normal);
            let dist = (p - self.cartesian_point(s, d)).norm();
            // Exact roots reconstruct p; pick the closest-approach branch.
            if d.abs() < best.1 || (dist < 1e-9 && d.abs() < best.1) {
                best = (s, d.abs());
            }
        }
        let s = best.0;
        let theta = self.tangent_angle(s);
        let normal = Vector2::new(-theta.sin(), theta.cos());
        (s, (p - self.base_point(s)).dot(&normal))
    }
}

fn bisect(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, g_lo: f64) -> f64 {
    let mut sign_lo = g_lo.signum();
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == sign_lo {
            lo = mid;
            sign_lo = gm.signum();
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

//! Boundary-value polynomials for candidate motion profiles: a quartic for
//! velocity-keeping longitudinal motion (end position free) and a quintic
//! for lateral transitions.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use super::FrenetError;

/// Polynomial in time with a validity duration.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    /// Coefficients in ascending order: `c[0] + c[1] t + ...`.
    pub coeffs: Vec<f64>,
    /// Maneuver duration [s].
    pub duration: f64,
}

impl Polynomial {
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn deriv1(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * t + (i as f64) * c)
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * t + (i * (i - 1)) as f64 * c)
    }
}

fn check_finite(values: &[f64], what: &'static str) -> Result<(), FrenetError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FrenetError::NonFinite(what))
    }
}

/// Degree-4 polynomial matching position/speed/acceleration at t=0 and
/// speed/acceleration at t=T. The end position stays free, which is the
/// velocity-keeping profile.
pub fn fit_longitudinal_quartic(
    start: (f64, f64, f64),
    end: (f64, f64),
    duration: f64,
) -> Result<Polynomial, FrenetError> {
    check_finite(
        &[start.0, start.1, start.2, end.0, end.1, duration],
        "quartic boundary conditions",
    )?;
    if !(duration > 0.0) {
        return Err(FrenetError::NonFinite("quartic duration"));
    }
    let (s0, v0, a0) = start;
    let (v_t, a_t) = end;
    let c0 = s0;
    let c1 = v0;
    let c2 = 0.5 * a0;
    let t = duration;
    let t2 = t * t;
    let t3 = t2 * t;
    let m = Matrix2::new(3.0 * t2, 4.0 * t3, 6.0 * t, 12.0 * t2);
    let rhs = Vector2::new(v_t - c1 - 2.0 * c2 * t, a_t - 2.0 * c2);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or(FrenetError::NonFinite("quartic system"))?;
    Ok(Polynomial {
        coeffs: vec![c0, c1, c2, sol[0], sol[1]],
        duration,
    })
}

/// Degree-5 polynomial matching position/speed/acceleration at both ends.
pub fn fit_lateral_quintic(
    start: (f64, f64, f64),
    end: (f64, f64, f64),
    duration: f64,
) -> Result<Polynomial, FrenetError> {
    check_finite(
        &[start.0, start.1, start.2, end.0, end.1, end.2, duration],
        "quintic boundary conditions",
    )?;
    if !(duration > 0.0) {
        return Err(FrenetError::NonFinite("quintic duration"));
    }
    let (d0, dd0, ddd0) = start;
    let (d_t, dd_t, ddd_t) = end;
    let c0 = d0;
    let c1 = dd0;
    let c2 = 0.5 * ddd0;
    let t = duration;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let m = Matrix3::new(
        t3,
        t4,
        t5,
        3.0 * t2,
        4.0 * t3,
        5.0 * t4,
        6.0 * t,
        12.0 * t2,
        20.0 * t3,
    );
    let rhs = Vector3::new(
        d_t - c0 - c1 * t - c2 * t2,
        dd_t - c1 - 2.0 * c2 * t,
        ddd_t - 2.0 * c2,
    );
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or(FrenetError::NonFinite("quintic system"))?;
    Ok(Polynomial {
        coeffs: vec![c0, c1, c2, sol[0], sol[1], sol[2]],
        duration,
    })
}

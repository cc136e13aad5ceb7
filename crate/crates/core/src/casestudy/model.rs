//! Contracts and closed loop of the two-vehicle example.
//!
//! Signals: leader `d = (p_l, v_l)`, measurement `z = (p_m, v_m)`, follower
//! `y = (p_f, v_f)`.

use nalgebra::{DMatrix, DVector};

use super::params::{CaseStudyParams, ParamError};
use crate::contracts::{CascadeTriple, LinearContract};
use crate::mat::{row_matrix, vector};
use crate::satisfaction::{AffineSystem, InitSet};

/// Leader kinematics with bounded acceleration, and `v_l ≥ 0`.
fn leader_assumptions(p: &CaseStudyParams) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let dt = p.dt;
    (
        row_matrix(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0], &[0.0, 0.0]]),
        row_matrix(&[&[-1.0, -dt], &[1.0, dt], &[0.0, -1.0], &[0.0, 1.0], &[0.0, -1.0]]),
        vector(&[0.0, 0.0, dt * p.a_max, dt * p.a_min, 0.0]),
    )
}

/// Composite contract: leader kinematics ⇒ `p_l − p_f − h v_f ≥ 0`.
pub fn build_contract_c(p: &CaseStudyParams) -> LinearContract {
    let (a1, a0, a) = leader_assumptions(p);
    LinearContract::new(
        "follower",
        2,
        2,
        a1,
        a0,
        a,
        DMatrix::zeros(1, 4),
        row_matrix(&[&[-1.0, 0.0, 1.0, p.h]]),
        vector(&[0.0]),
    )
    .expect("well-formed")
}

/// Perception contract: bounded delay and noise on the measurements, and
/// `v_m ≥ 0`.
pub fn build_contract_c1(p: &CaseStudyParams) -> LinearContract {
    let (a1, a0, a) = leader_assumptions(p);
    let tau = p.tau;
    LinearContract::new(
        "perception",
        2,
        2,
        a1,
        a0,
        a,
        row_matrix(&[
            &[1.0, 0.0, -1.0, 0.0],
            &[-1.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, -1.0],
            &[0.0, -1.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]),
        row_matrix(&[
            &[0.0, -tau, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
        ]),
        vector(&[p.delta_p, p.delta_p, p.mu_max(), p.mu_min(), 0.0]),
    )
    .expect("well-formed")
}

/// Controlled-dynamics contract: roughly kinematic measurements ⇒
/// `p_m − p_f − h v_f ≥ δ_p`, i.e. `−p_m + p_f + h v_f ≤ −δ_p`.
pub fn build_contract_c2(p: &CaseStudyParams) -> LinearContract {
    let (dt, tau) = (p.dt, p.tau);
    LinearContract::new(
        "dynamics",
        2,
        2,
        row_matrix(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]),
        row_matrix(&[&[-1.0, -dt - tau], &[1.0, dt - tau], &[0.0, -1.0], &[0.0, 1.0]]),
        vector(&[p.xi_up, p.xi_down, p.eta_up, p.eta_down]),
        DMatrix::zeros(1, 4),
        row_matrix(&[&[-1.0, 0.0, 1.0, p.h]]),
        vector(&[-p.delta_p]),
    )
    .expect("well-formed")
}

pub fn build_triple(p: &CaseStudyParams) -> CascadeTriple {
    CascadeTriple::new(build_contract_c1(p), build_contract_c2(p), build_contract_c(p))
        .expect("dimensions agree")
}

/// The follower's acceleration command.
pub fn follower_accel(p: &CaseStudyParams, p_m: f64, v_m: f64, p_f: f64, v_f: f64) -> f64 {
    let (h, dt) = (p.h, p.dt);
    (p_m - p_f - h * v_f) / (h * dt) + (p.dt - p.tau) * v_m / (h * dt) - v_f / h - p.lambda / (h * dt)
}

/// Double integrator under [`follower_accel`], with the controller folded in:
///
/// ```text
/// F = [ 1     Δt   ]   B = [ 0    0         ]   f = [ 0    ]
///     [ −1/h  −Δt/h]       [ 1/h  (Δt − τ)/h]       [ −λ/h ]
/// ```
///
/// and the initial set `p_m(0) − p_f(0) − h v_f(0) ≥ δ_p` over `[z(0); y(0)]`.
pub fn build_follower_system(p: &CaseStudyParams) -> Result<(AffineSystem, InitSet), ParamError> {
    if p.h == 0.0 {
        return Err(ParamError::ZeroHeadway);
    }
    let (h, dt, tau) = (p.h, p.dt, p.tau);
    let sys = AffineSystem::new(
        row_matrix(&[&[1.0, dt], &[-1.0 / h, -dt / h]]),
        row_matrix(&[&[0.0, 0.0], &[1.0 / h, (dt - tau) / h]]),
        vector(&[0.0, -p.lambda / h]),
    )
    .map_err(|_| ParamError::NonFinite { name: "h", value: h })?;
    let init = InitSet::new(row_matrix(&[&[-1.0, 0.0, 1.0, h]]), vector(&[-p.delta_p]))
        .map_err(|_| ParamError::NonFinite { name: "h", value: h })?;
    Ok((sys, init))
}

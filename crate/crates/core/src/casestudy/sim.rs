//! Monte-Carlo simulation of leader, perception and follower.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{build_follower_system, follower_accel};
use super::noise::{Channel, NoiseSource};
use super::params::{CaseStudyParams, ParamError};
use super::profile::{leader_accel, FollowerInit, LeaderProfile, ProfileError};
use crate::exec::{self, Execution};

/// Absolute slack used when re-checking contract inequalities on a trace.
pub const TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("duration {duration} s is not a positive whole number of {dt} s steps")]
    Duration { duration: f64, dt: f64 },
    #[error(
        "initial follower state violates p_m(0) - p_f(0) - h v_f(0) >= delta_p (slack {slack})"
    )]
    InitialHeadway { slack: f64 },
}

/// One time step. Delay and noise columns hold the draws that produced this
/// step's measurement (zero at `k = 0`, where measurements are exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub t: f64,
    pub p_l: f64,
    pub v_l: f64,
    pub a_l: f64,
    pub p_m: f64,
    pub v_m: f64,
    pub p_f: f64,
    pub v_f: f64,
    pub a_f: f64,
    pub sigma_p: f64,
    pub sigma_v: f64,
    pub nu_p: f64,
    pub nu_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTrace {
    pub run: usize,
    pub seed: u64,
    pub params: CaseStudyParams,
    pub records: Vec<StepRecord>,
}

/// Number of records for a run of `duration` seconds.
pub fn step_count(duration: f64, dt: f64) -> Result<usize, SimError> {
    let n = (duration / dt).round();
    if !(duration > 0.0) || n < 1.0 || (n * dt - duration).abs() > 1e-9 * duration.max(1.0) {
        return Err(SimError::Duration { duration, dt });
    }
    Ok(n as usize)
}

/// Runs `n_runs` independent simulations, in parallel when `exec` allows.
pub fn simulate(
    p: &CaseStudyParams,
    profile: &LeaderProfile,
    follower: &FollowerInit,
    seed: u64,
    n_runs: usize,
    duration: f64,
    exec: Execution,
) -> Result<Vec<SimulationTrace>, SimError> {
    p.validate()?;
    profile.validate()?;
    let steps = step_count(duration, p.dt)?;
    let (sys, init) = build_follower_system(p)?;

    // Exact measurement at k = 0.
    let (p_l0, v_l0) = (profile.initial_position, profile.initial_speed);
    let (p_f0, v_f0) = (p_l0 - follower.gap, follower.speed);
    if !init.contains(&DVector::from_vec(vec![p_l0, v_l0]), &DVector::from_vec(vec![p_f0, v_f0]), 0.0) {
        return Err(SimError::InitialHeadway { slack: p_l0 - p_f0 - p.h * v_f0 - p.delta_p });
    }

    Ok(exec::map_indexed(exec, n_runs, |run| {
        let mut noise = NoiseSource::new(seed, run as u64);
        let mut records = Vec::with_capacity(steps);
        let (mut p_l, mut v_l) = (p_l0, v_l0);
        let (mut p_m, mut v_m) = (p_l0, v_l0);
        let mut y = DVector::from_vec(vec![p_f0, v_f0]);
        let mut draws = [0.0; 4];
        for k in 0..steps {
            let t = k as f64 * p.dt;
            let a_l = leader_accel(profile.command_at(t), v_l, p.dt, p.a_min, p.a_max);
            let a_f = follower_accel(p, p_m, v_m, y[0], y[1]);
            records.push(StepRecord {
                k,
                t,
                p_l,
                v_l,
                a_l,
                p_m,
                v_m,
                p_f: y[0],
                v_f: y[1],
                a_f,
                sigma_p: draws[0],
                sigma_v: draws[1],
                nu_p: draws[2],
                nu_v: draws[3],
            });
            if k + 1 == steps {
                break;
            }
            let step = (k + 1) as u64;
            let sigma_p = noise.uniform(step, Channel::DelayP, 0.0, p.tau);
            let sigma_v = noise.uniform(step, Channel::DelayV, 0.0, p.tau);
            let nu_p = noise.uniform(step, Channel::NoiseP, -p.delta_p, p.delta_p);
            let nu_v = noise.uniform(step, Channel::NoiseV, -p.delta_v, p.delta_v);
            draws = [sigma_p, sigma_v, nu_p, nu_v];

            let (p_l1, v_l1) = (p_l + p.dt * v_l, v_l + p.dt * a_l);
            y = sys.step(&y, &DVector::from_vec(vec![p_m, v_m]));
            let (sp, sv) = (sigma_p / p.dt, sigma_v / p.dt);
            p_m = (1.0 - sp) * p_l1 + sp * p_l + nu_p;
            v_m = ((1.0 - sv) * v_l1 + sv * v_l + nu_v).max(0.0);
            p_l = p_l1;
            v_l = v_l1;
        }
        SimulationTrace { run, seed, params: *p, records }
    }))
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("run {run}, step {k}: {what}")]
pub struct TraceViolation {
    pub run: usize,
    pub k: usize,
    pub what: String,
}

/// Post-hoc check that a trace realises the leader and perception models:
/// exact kinematics, `v_l ≥ 0`, draws within their intervals, and every
/// perception guarantee inequality.
pub fn check_trace(trace: &SimulationTrace) -> Result<(), TraceViolation> {
    let p = &trace.params;
    let fail = |k: usize, what: String| Err(TraceViolation { run: trace.run, k, what });
    for (k, r) in trace.records.iter().enumerate() {
        if r.v_l < 0.0 {
            return fail(k, format!("leader speed {} < 0", r.v_l));
        }
        if r.v_m < 0.0 {
            return fail(k, format!("measured speed {} < 0", r.v_m));
        }
        if !(0.0..=p.tau).contains(&r.sigma_p) || !(0.0..=p.tau).contains(&r.sigma_v) {
            return fail(k, "delay outside [0, tau]".into());
        }
        if r.nu_p.abs() > p.delta_p || r.nu_v.abs() > p.delta_v {
            return fail(k, "noise outside its bound".into());
        }
        if !(-p.a_min - TRACE_TOL..=p.a_max + TRACE_TOL).contains(&r.a_l) {
            return fail(k, format!("leader acceleration {} outside bounds", r.a_l));
        }
    }
    for w in trace.records.windows(2) {
        let (r0, r1) = (&w[0], &w[1]);
        let k = r1.k;
        if r1.p_l != r0.p_l + p.dt * r0.v_l || r1.v_l != r0.v_l + p.dt * r0.a_l {
            return fail(k, "leader kinematics not exact".into());
        }
        let tol = TRACE_TOL * (1.0 + r1.p_l.abs());
        let rows = [
            (r1.p_l - r1.p_m - p.tau * r0.v_l, p.delta_p, "position lower bound"),
            (r1.p_m - r1.p_l, p.delta_p, "position upper bound"),
            (r1.v_l - r1.v_m, p.mu_max(), "velocity lower bound"),
            (r1.v_m - r1.v_l, p.mu_min(), "velocity upper bound"),
        ];
        for (lhs, rhs, what) in rows {
            if lhs > rhs + tol {
                return fail(k, format!("{what}: {lhs} > {rhs}"));
            }
        }
    }
    Ok(())
}

/// Safety figures of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub run: usize,
    /// Min and max over steps of `p_l − p_f − h v_f`.
    pub min_spec: f64,
    pub max_spec: f64,
    /// Min over steps of `p_m − p_f − h v_f − δ_p`.
    pub min_dynamics_guarantee: f64,
    pub min_velocity: f64,
    /// Steps where either quantity drops below `−TRACE_TOL`.
    pub violation_steps: Vec<usize>,
}

/// `(p_l − p_f)/v_f`, or `+inf` when the follower is (nearly) stopped.
pub fn headway_ratio(r: &StepRecord) -> f64 {
    if r.v_f <= 1e-9 { f64::INFINITY } else { (r.p_l - r.p_f) / r.v_f }
}

pub fn spec_value(r: &StepRecord, p: &CaseStudyParams) -> f64 {
    r.p_l - r.p_f - p.h * r.v_f
}

pub fn dynamics_guarantee_value(r: &StepRecord, p: &CaseStudyParams) -> f64 {
    r.p_m - r.p_f - p.h * r.v_f - p.delta_p
}

pub fn evaluate_trace(trace: &SimulationTrace) -> TraceReport {
    let p = &trace.params;
    let mut rep = TraceReport {
        run: trace.run,
        min_spec: f64::INFINITY,
        max_spec: f64::NEG_INFINITY,
        min_dynamics_guarantee: f64::INFINITY,
        min_velocity: f64::INFINITY,
        violation_steps: Vec::new(),
    };
    for r in &trace.records {
        let s = spec_value(r, p);
        let g = dynamics_guarantee_value(r, p);
        rep.min_spec = rep.min_spec.min(s);
        rep.max_spec = rep.max_spec.max(s);
        rep.min_dynamics_guarantee = rep.min_dynamics_guarantee.min(g);
        rep.min_velocity = rep.min_velocity.min(r.v_f);
        if s < -TRACE_TOL || g < -TRACE_TOL {
            rep.violation_steps.push(r.k);
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_runs_of(n: usize) -> Vec<SimulationTrace> {
        simulate(
            &CaseStudyParams::default(),
            &LeaderProfile::stop_and_go_90s(),
            &FollowerInit::default(),
            42,
            n,
            90.0,
            Execution::Parallel,
        )
        .unwrap()
    }

    #[test]
    fn default_scenario_is_safe_and_realises_perception_contract() {
        for t in default_runs_of(4) {
            assert_eq!(t.records.len(), 300);
            check_trace(&t).unwrap();
            let rep = evaluate_trace(&t);
            assert!(rep.violation_steps.is_empty(), "{rep:?}");
            assert!(rep.min_spec >= 0.0);
        }
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let par = default_runs_of(3);
        let seq = simulate(
            &CaseStudyParams::default(),
            &LeaderProfile::stop_and_go_90s(),
            &FollowerInit::default(),
            42,
            3,
            90.0,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn noise_free_equilibrium_keeps_margin() {
        let mut p = CaseStudyParams::default();
        p.apply_overrides(&["tau=0", "delta_p=0", "delta_v=0"]).unwrap();
        let v = 25.0;
        let init = FollowerInit { gap: p.h * v + p.lambda, speed: v };
        let t = simulate(&p, &LeaderProfile::constant(v), &init, 1, 1, 30.0, Execution::Sequential)
            .unwrap()
            .remove(0);
        for r in &t.records {
            assert!((spec_value(r, &p) - p.lambda).abs() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn stationary_vehicles_headway_is_infinite() {
        let r = StepRecord {
            k: 0,
            t: 0.0,
            p_l: 10.0,
            v_l: 0.0,
            a_l: 0.0,
            p_m: 10.0,
            v_m: 0.0,
            p_f: 0.0,
            v_f: 0.0,
            a_f: 0.0,
            sigma_p: 0.0,
            sigma_v: 0.0,
            nu_p: 0.0,
            nu_v: 0.0,
        };
        assert_eq!(headway_ratio(&r), f64::INFINITY);
        assert_eq!(spec_value(&r, &CaseStudyParams { h: 7.0, ..Default::default() }), 10.0);
    }

    #[test]
    fn injected_violation_is_reported() {
        let mut t = default_runs_of(1).remove(0);
        t.records[17].p_f = t.records[17].p_l + 1.0;
        let rep = evaluate_trace(&t);
        assert_eq!(rep.violation_steps, vec![17]);
    }

    #[test]
    fn bad_duration_and_initial_state() {
        let p = CaseStudyParams::default();
        let prof = LeaderProfile::stop_and_go_90s();
        let e = simulate(&p, &prof, &FollowerInit::default(), 0, 1, 90.1, Execution::Sequential);
        assert!(matches!(e, Err(SimError::Duration { .. })));
        let close = FollowerInit { gap: 10.0, speed: 30.0 };
        let e = simulate(&p, &prof, &close, 0, 1, 90.0, Execution::Sequential);
        assert!(matches!(e, Err(SimError::InitialHeadway { .. })));
        assert_eq!(step_count(90.0, 0.3).unwrap(), 300);
    }
}

//! The two-vehicle example: a follower keeps time headway `h` behind a leader,
//! split into a perception subsystem (delayed, noisy measurements) and a
//! controlled double integrator.
//!
//! Builds the three contracts and the closed loop from [`CaseStudyParams`],
//! and runs seeded Monte-Carlo simulations to check the composite guarantee
//! on concrete traces.

mod io;
mod model;
mod noise;
mod params;
mod profile;
mod sim;

pub use io::{
    load_scenario, summarize, write_headway_csv, write_trace_csv, Scenario, SimulationSummary,
    SCENARIO_SCHEMA_VERSION, TRACE_HEADER,
};
pub use model::{
    build_contract_c, build_contract_c1, build_contract_c2, build_follower_system, build_triple,
    follower_accel,
};
pub use noise::{Channel, NoiseSource};
pub use params::{parse_override, CaseStudyParams, ParamError, PARAM_KEYS};
pub use profile::{leader_accel, Command, FollowerInit, LeaderProfile, ProfileError, Segment};
pub use sim::{
    check_trace, dynamics_guarantee_value, evaluate_trace, headway_ratio, simulate, spec_value,
    step_count, SimError, SimulationTrace, StepRecord, TraceReport, TraceViolation, TRACE_TOL,
};

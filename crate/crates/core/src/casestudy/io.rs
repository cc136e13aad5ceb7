//! Scenario files, trace CSVs and the run summary.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::CaseStudyParams;
use super::profile::{FollowerInit, LeaderProfile};
use super::sim::{evaluate_trace, headway_ratio, SimulationTrace, TraceReport};
use crate::contracts::FormatError;
use crate::verdict::ext_real;

pub const SCENARIO_SCHEMA_VERSION: &str = "1";

pub const TRACE_HEADER: [&str; 14] = [
    "k", "t", "p_l", "v_l", "a_l", "p_m", "v_m", "p_f", "v_f", "a_f", "sigma_p", "sigma_v", "nu_p",
    "nu_v",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: String,
    #[serde(default)]
    pub params: CaseStudyParams,
    #[serde(default = "LeaderProfile::stop_and_go_90s")]
    pub leader: LeaderProfile,
    #[serde(default)]
    pub follower: FollowerInit,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_duration() -> f64 {
    90.0
}

fn default_runs() -> usize {
    100
}

fn default_seed() -> u64 {
    42
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            schema_version: SCENARIO_SCHEMA_VERSION.into(),
            params: CaseStudyParams::default(),
            leader: LeaderProfile::stop_and_go_90s(),
            follower: FollowerInit::default(),
            duration_s: default_duration(),
            runs: default_runs(),
            seed: default_seed(),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let s: Scenario = serde_json::from_str(text)?;
        if s.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(FormatError::SchemaVersion {
                found: s.schema_version,
                expected: SCENARIO_SCHEMA_VERSION,
            });
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.to_path_buf(), source })?;
    Scenario::from_json(&text)
}

/// One row per step, columns as [`TRACE_HEADER`].
pub fn write_trace_csv<W: Write>(trace: &SimulationTrace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &trace.records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Long format `run,k,t,headway_s,v_f` over all runs.
pub fn write_headway_csv<W: Write>(traces: &[SimulationTrace], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run", "k", "t", "headway_s", "v_f"])?;
    for t in traces {
        for r in &t.records {
            w.write_record(&[
                t.run.to_string(),
                r.k.to_string(),
                r.t.to_string(),
                headway_ratio(r).to_string(),
                r.v_f.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub runs: usize,
    pub seed: u64,
    pub steps_per_run: usize,
    #[serde(serialize_with = "ext_real::serialize")]
    pub min_spec: f64,
    #[serde(serialize_with = "ext_real::serialize")]
    pub min_dynamics_guarantee: f64,
    pub safe: bool,
    pub per_run: Vec<TraceReport>,
}

pub fn summarize(traces: &[SimulationTrace], seed: u64) -> SimulationSummary {
    let per_run: Vec<TraceReport> = traces.iter().map(evaluate_trace).collect();
    SimulationSummary {
        runs: traces.len(),
        seed,
        steps_per_run: traces.first().map_or(0, |t| t.records.len()),
        min_spec: per_run.iter().map(|r| r.min_spec).fold(f64::INFINITY, f64::min),
        min_dynamics_guarantee: per_run
            .iter()
            .map(|r| r.min_dynamics_guarantee)
            .fold(f64::INFINITY, f64::min),
        safe: per_run.iter().all(|r| r.violation_steps.is_empty()),
        per_run,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casestudy::sim::simulate;
    use crate::exec::Execution;

    #[test]
    fn trace_csv_header_and_length() {
        let s = Scenario::default();
        let t = simulate(&s.params, &s.leader, &s.follower, 1, 1, 3.0, Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&t[0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRACE_HEADER.join(","));
        assert_eq!(lines.count(), 10);
    }

    #[test]
    fn scenario_defaults_fill_in() {
        let s = Scenario::from_json(r#"{"schema_version": "1", "runs": 3}"#).unwrap();
        assert_eq!(s.runs, 3);
        assert_eq!(s.leader.name, "stop-and-go-90s");
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        assert!(matches!(
            Scenario::from_json(r#"{"schema_version": "2"}"#),
            Err(FormatError::SchemaVersion { .. })
        ));
        assert!(Scenario::from_json(r#"{"schema_version": "1", "speed": 3}"#).is_err());
    }
}

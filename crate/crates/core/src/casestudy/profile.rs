use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("segment start times must be strictly increasing (segment {index} starts at {start} s)")]
    Order { index: usize, start: f64 },
    #[error("{what} must be finite and non-negative, got {value}")]
    Value { what: &'static str, value: f64 },
}

const KMH: f64 = 1.0 / 3.6;

/// What the leader tries to do from a segment's start onwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Constant acceleration command (m/s²), clipped to the bounds.
    Accel(f64),
    /// Reach this speed (m/s) as fast as the bounds allow, then hold it.
    TargetSpeed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub start_s: f64,
    pub command: Command,
}

/// Piecewise leader behaviour. Before the first segment the command is zero
/// acceleration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeaderProfile {
    pub name: String,
    pub initial_speed: f64,
    #[serde(default)]
    pub initial_position: f64,
    pub segments: Vec<Segment>,
}

impl LeaderProfile {
    /// Cruise at 110 km/h, sway between 25 and 110 km/h at full braking and
    /// acceleration from 30 s to 60 s, hold, then brake hard to 3 km/h at 65 s.
    pub fn stop_and_go_90s() -> Self {
        let mut segments = vec![Segment { start_s: 0.0, command: Command::TargetSpeed(110.0 * KMH) }];
        for (i, start) in (30..60).step_by(3).enumerate() {
            let target = if i % 2 == 0 { 25.0 } else { 110.0 };
            segments.push(Segment { start_s: start as f64, command: Command::TargetSpeed(target * KMH) });
        }
        segments.push(Segment { start_s: 60.0, command: Command::Accel(0.0) });
        segments.push(Segment { start_s: 65.0, command: Command::TargetSpeed(3.0 * KMH) });
        Self { name: "stop-and-go-90s".into(), initial_speed: 110.0 * KMH, initial_position: 0.0, segments }
    }

    /// Constant speed for the whole run.
    pub fn constant(speed: f64) -> Self {
        Self {
            name: "constant".into(),
            initial_speed: speed,
            initial_position: 0.0,
            segments: vec![Segment { start_s: 0.0, command: Command::Accel(0.0) }],
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "stop-and-go-90s" => Some(Self::stop_and_go_90s()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        if !(self.initial_speed.is_finite() && self.initial_speed >= 0.0) {
            return Err(ProfileError::Value { what: "initial_speed", value: self.initial_speed });
        }
        if !self.initial_position.is_finite() {
            return Err(ProfileError::Value { what: "initial_position", value: self.initial_position });
        }
        for (index, w) in self.segments.windows(2).enumerate() {
            if w[1].start_s <= w[0].start_s {
                return Err(ProfileError::Order { index: index + 1, start: w[1].start_s });
            }
        }
        for s in &self.segments {
            let ok = match s.command {
                Command::Accel(a) => a.is_finite(),
                Command::TargetSpeed(v) => v.is_finite() && v >= 0.0,
            };
            if !ok || !s.start_s.is_finite() {
                return Err(ProfileError::Value { what: "segment", value: s.start_s });
            }
        }
        Ok(())
    }

    /// Active command at time `t` (s).
    pub fn command_at(&self, t: f64) -> Command {
        self.segments
            .iter()
            .rev()
            .find(|s| s.start_s <= t + 1e-9)
            .map_or(Command::Accel(0.0), |s| s.command)
    }
}

/// Leader acceleration for one step: the command clipped to
/// `[−a_min, a_max]`, then raised just enough that `v + dt·a ≥ 0` holds in
/// floating point.
pub fn leader_accel(cmd: Command, v: f64, dt: f64, a_min: f64, a_max: f64) -> f64 {
    let raw = match cmd {
        Command::Accel(a) => a,
        Command::TargetSpeed(target) => (target - v) / dt,
    };
    let mut a = raw.clamp(-a_min, a_max);
    if v + dt * a < 0.0 {
        a = -v / dt;
        while v + dt * a < 0.0 {
            a = a.next_up();
        }
    }
    a
}

/// Follower start: `gap` metres behind the leader at `speed` m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FollowerInit {
    pub gap: f64,
    pub speed: f64,
}

impl Default for FollowerInit {
    fn default() -> Self {
        Self { gap: 70.0, speed: 113.0 * KMH }
    }
}

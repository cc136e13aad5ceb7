use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// Everything needed to reproduce a run. Wall-clock fields live here and
/// nowhere else, so the remaining outputs are byte-identical across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub inputs: Vec<String>,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
    /// Remaining numerical options (tolerance, horizons, run count, …).
    pub options: Value,
    pub started_unix_ms: u128,
    pub wall_clock_s: f64,
    pub result: String,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            overrides: Vec::new(),
            seed: None,
            options: Value::Object(Default::default()),
            started_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            wall_clock_s: 0.0,
            result: String::new(),
            started: Some(Instant::now()),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn option(&mut self, key: &str, value: impl Serialize) {
        if let Value::Object(m) = &mut self.options {
            m.insert(key.to_string(), serde_json::to_value(value).expect("option serialises"));
        }
    }

    pub fn finish(&mut self, result: impl Into<String>) {
        self.result = result.into();
        if let Some(t) = self.started {
            self.wall_clock_s = t.elapsed().as_secs_f64();
        }
    }
}

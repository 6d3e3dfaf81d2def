use serde::{Deserialize, Serialize};

/// Linear exploration decay, constant once `decay_steps` is reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpsilonSchedule {
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_value: f64,
    pub decay_steps: u64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            initial: 1.0,
            final_value: 0.01,
            decay_steps: 10_000,
        }
    }
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.final_value;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.initial + (self.final_value - self.initial) * frac
    }
}

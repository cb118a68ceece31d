//! Machine-readable run reports.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;

pub const SCHEMA_ID: &str = "fgs-report/1";
/// JSON schema every serialized [`Report`] satisfies.
pub const REPORT_SCHEMA: &str = include_str!("../../schemas/report.schema.json");

pub mod definitions {
    pub const MAX_EIGENVALUE_ERROR: &str = "max_j |lambda_j - lambda_j^ref|, reference from Lanczos on the exact dense operator";
    pub const MAX_RESIDUAL_NORM: &str = "max_j ||A v_j - lambda_j v_j||_2 with A applied exactly";
    pub const CLASSIFICATION_RATE: &str = "fraction of nodes whose predicted label equals the true label";
    pub const MISCLASSIFICATION_RATE: &str = "fraction of nodes whose predicted label differs from the true label";
    pub const PERMUTED_MISCLASSIFICATION_RATE: &str =
        "fraction of nodes whose predicted label differs from the true label, minimized over label permutations";
    pub const LABEL_DIFFERENCE_RATE: &str =
        "fraction of pixels whose fast-method label differs from the dense-reference label after permutation matching";
    pub const MATVEC_SECONDS: &str = "wall time of one fast adjacency product in seconds, mean over repetitions";
    pub const ITERATIONS: &str = "iterations used by the iterative solver";
    pub const RELATIVE_RESIDUAL: &str = "||b - M x||_2 / ||b||_2 reported by the solver recurrence";
    pub const TRAINING_ACCURACY: &str = "fraction of training nodes whose predicted sign matches the target sign";
    pub const ERROR_ESTIMATE: &str = "a-priori bound on ||W_fast x - W x||_inf / ||x||_1";
    pub const TIME_STEPS: &str = "maximum number of time steps over all one-vs-rest channels";
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: Option<f64>,
    pub definition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stat {
    pub name: String,
    pub definition: String,
    pub count: usize,
    pub min: Option<f64>,
    pub avg: Option<f64>,
    pub max: Option<f64>,
}

impl Stat {
    pub fn from_samples(name: &str, definition: &str, samples: &[f64]) -> Self {
        let finite: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
        let (min, avg, max) = if finite.is_empty() {
            (None, None, None)
        } else {
            (
                Some(finite.iter().copied().fold(f64::INFINITY, f64::min)),
                Some(finite.iter().sum::<f64>() / finite.len() as f64),
                Some(finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            )
        };
        Self {
            name: name.into(),
            definition: definition.into(),
            count: finite.len(),
            min,
            avg,
            max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchCell {
    pub method: String,
    pub n: usize,
    pub stats: Vec<Stat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub method: Option<String>,
    pub params: serde_json::Value,
    pub seed: u64,
    pub n: usize,
    pub eigenvalues: Option<Vec<f64>>,
    pub metrics: Vec<Metric>,
    pub timings: Vec<Timing>,
    pub cells: Vec<BenchCell>,
    pub status: Status,
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &str, params: impl Serialize, seed: u64) -> Self {
        Self {
            schema: SCHEMA_ID.into(),
            command: command.into(),
            method: None,
            params: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
            seed,
            n: 0,
            eigenvalues: None,
            metrics: Vec::new(),
            timings: Vec::new(),
            cells: Vec::new(),
            status: Status::Ok,
            error: None,
        }
    }

    pub fn metric(&mut self, name: &str, value: f64, definition: &str) {
        self.metrics.push(Metric {
            name: name.into(),
            value: value.is_finite().then_some(value),
            definition: definition.into(),
        });
    }

    pub fn metric_value(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).and_then(|m| m.value)
    }

    pub fn time(&mut self, phase: &str, seconds: f64) {
        self.timings.push(Timing {
            phase: phase.into(),
            seconds,
        });
    }

    pub fn fail(&mut self, message: String) {
        self.status = Status::Failed;
        self.error = Some(message);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!("{} [{}]", self.command, if self.status == Status::Ok { "ok" } else { "failed" });
        if let Some(m) = &self.method {
            s += &format!(" method={m}");
        }
        s += &format!(" n={} seed={}\n", self.n, self.seed);
        if let Some(e) = &self.error {
            s += &format!("  error: {e}\n");
        }
        if let Some(ev) = &self.eigenvalues {
            let shown: Vec<String> = ev.iter().map(|v| format!("{v:.6}")).collect();
            s += &format!("  eigenvalues: {}\n", shown.join(" "));
        }
        for m in &self.metrics {
            match m.value {
                Some(v) => s += &format!("  {}: {v:.6e}\n", m.name),
                None => s += &format!("  {}: n/a\n", m.name),
            }
        }
        for c in &self.cells {
            s += &format!("  {} n={}\n", c.method, c.n);
            for st in &c.stats {
                let f = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
                s += &format!("    {}: min {} avg {} max {}\n", st.name, f(st.min), f(st.avg), f(st.max));
            }
        }
        for t in &self.timings {
            s += &format!("  time {}: {:.3}s\n", t.phase, t.seconds);
        }
        s
    }
}

/// Runs `f` and returns its result with the elapsed seconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

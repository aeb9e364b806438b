use std::fmt::Write as _;

use serde::Serialize;

/// Outcome of checking one inequality `lhs <= rhs` over many samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub samples: usize,
    /// `rhs - lhs` at the sample with the smallest normalized slack.
    pub worst_slack: f64,
    /// Magnitude the tolerance is measured against at that sample.
    pub worst_scale: f64,
    pub violations: usize,
    pub worst_case_inputs: String,
    pub tolerance: f64,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// One evaluated instance of an inequality.
#[derive(Debug, Clone)]
pub struct Observation {
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
    pub inputs: String,
}

impl Observation {
    pub fn new(lhs: f64, rhs: f64, scale: f64, inputs: impl Into<String>) -> Self {
        Self {
            lhs,
            rhs,
            scale,
            inputs: inputs.into(),
        }
    }

    /// `|value| <= 0` up to tolerance relative to `scale`.
    pub fn vanishing(value: f64, scale: f64, inputs: impl Into<String>) -> Self {
        Self::new(value.abs(), 0.0, scale, inputs)
    }
}

/// Folds observations into a report. A sample violates when
/// `rhs - lhs < -tolerance * scale` or when anything is non-finite.
#[derive(Debug, Clone)]
pub struct SlackTracker {
    name: String,
    tolerance: f64,
    samples: usize,
    violations: usize,
    worst_normalized: f64,
    worst_slack: f64,
    worst_scale: f64,
    worst_inputs: String,
}

impl SlackTracker {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            samples: 0,
            violations: 0,
            worst_normalized: f64::INFINITY,
            worst_slack: f64::INFINITY,
            worst_scale: 0.0,
            worst_inputs: String::new(),
        }
    }

    pub fn push(&mut self, obs: Observation) {
        let Observation {
            lhs,
            rhs,
            scale,
            inputs,
        } = obs;
        self.push_with(lhs, rhs, scale, move || inputs);
    }

    /// Like [`push`](Self::push) but only formats the inputs when they are kept.
    pub fn push_with<F: FnOnce() -> String>(&mut self, lhs: f64, rhs: f64, scale: f64, inputs: F) {
        self.samples += 1;
        let slack = rhs - lhs;
        let scale = scale.abs();
        let finite = slack.is_finite() && scale.is_finite();
        if !finite || slack < -self.tolerance * scale {
            self.violations += 1;
        }
        let normalized = if !finite {
            f64::NEG_INFINITY
        } else if scale > 0.0 {
            slack / scale
        } else if slack < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        if normalized < self.worst_normalized || self.samples == 1 {
            self.worst_normalized = normalized;
            self.worst_slack = slack;
            self.worst_scale = scale;
            self.worst_inputs = inputs();
        }
    }

    /// Combines two trackers for the same law; ties keep `self`'s worst case.
    pub fn merge(&mut self, other: SlackTracker) {
        if other.samples == 0 {
            return;
        }
        if self.samples == 0 || other.worst_normalized < self.worst_normalized {
            self.worst_normalized = other.worst_normalized;
            self.worst_slack = other.worst_slack;
            self.worst_scale = other.worst_scale;
            self.worst_inputs = other.worst_inputs;
        }
        self.samples += other.samples;
        self.violations += other.violations;
    }

    pub fn extend<I: IntoIterator<Item = Observation>>(&mut self, obs: I) {
        for o in obs {
            self.push(o);
        }
    }

    pub fn finish(self) -> InequalityReport {
        InequalityReport {
            name: self.name,
            samples: self.samples,
            worst_slack: if self.samples == 0 { 0.0 } else { self.worst_slack },
            worst_scale: self.worst_scale,
            violations: self.violations,
            worst_case_inputs: self.worst_inputs,
            tolerance: self.tolerance,
        }
    }
}

pub fn reports_to_markdown(reports: &[InequalityReport]) -> String {
    let mut out = String::from("| law | samples | worst slack | violations | verdict |\n");
    out.push_str("|---|---:|---:|---:|---|\n");
    for r in reports {
        let _ = writeln!(
            out,
            "| {} | {} | {:.3e} | {} | {} |",
            r.name,
            r.samples,
            r.worst_slack,
            r.violations,
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    out
}

pub fn reports_to_csv(reports: &[InequalityReport]) -> String {
    let mut out = String::from("name,samples,worst_slack,violations\n");
    for r in reports {
        let _ = writeln!(out, "{},{},{:?},{}", r.name, r.samples, r.worst_slack, r.violations);
    }
    out
}

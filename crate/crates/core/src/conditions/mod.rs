//! Checks of the structural hypotheses on `H` and `B`.

mod b_function;
mod checks;
mod structural;

use std::fmt;

pub use b_function::{BFunction, Family};
pub use checks::{
    check_exact_condition, check_orthogonality_condition, check_sign_condition, ellipticity_constant,
    norm_bound_constant, EllipticityReport, PairCheckOptions,
};
pub use structural::{
    a_constants_from_a_prime, check_coercivity_inequality, coercivity_margin, derived_lambda,
    sampled_a_constants, validate_assumption_a_prime, validate_assumption_b_prime, AConstants,
    SampledA,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

/// Outcome of a sampled check. A failing report always carries a witness.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub condition_id: String,
    pub verdict: Verdict,
    pub sampled_max_violation: f64,
    pub witness: Option<Vec<f64>>,
    pub samples_checked: usize,
    pub samples_skipped: usize,
    /// Named auxiliary measurements (margins, fitted exponents, ...).
    pub details: Vec<(String, f64)>,
    pub notes: Vec<String>,
    /// Optional per-sample rows (inputs followed by the violation).
    pub trace: Vec<Vec<f64>>,
}

impl ConditionReport {
    pub fn new(condition_id: impl Into<String>) -> Self {
        ConditionReport {
            condition_id: condition_id.into(),
            verdict: Verdict::Pass,
            sampled_max_violation: 0.0,
            witness: None,
            samples_checked: 0,
            samples_skipped: 0,
            details: Vec::new(),
            notes: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub(crate) fn push_detail(&mut self, key: &str, v: f64) {
        self.details.push((key.to_string(), v));
    }

    /// Records a sample violation, keeping the first worst witness.
    pub(crate) fn observe(&mut self, violation: f64, input: impl FnOnce() -> Vec<f64>) {
        self.samples_checked += 1;
        if violation > self.sampled_max_violation || (self.witness.is_none() && violation > 0.0) {
            self.sampled_max_violation = violation;
            self.witness = Some(input());
        }
    }

    /// Sets the verdict from the worst violation against `tol`.
    pub(crate) fn conclude(&mut self, tol: f64) {
        self.verdict = if self.samples_checked == 0 {
            Verdict::Indeterminate
        } else if self.sampled_max_violation > tol {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        if self.verdict == Verdict::Fail && self.witness.is_none() {
            self.witness = Some(Vec::new());
        }
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.condition_id)?;
        writeln!(f, "verdict = {}", self.verdict)?;
        writeln!(f, "max_violation = {:.6e}", self.sampled_max_violation)?;
        writeln!(f, "samples_checked = {}", self.samples_checked)?;
        writeln!(f, "samples_skipped = {}", self.samples_skipped)?;
        if let Some(w) = &self.witness {
            let w: Vec<String> = w.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(f, "witness = [{}]", w.join(", "))?;
        }
        for (k, v) in &self.details {
            writeln!(f, "{k} = {v:.6e}")?;
        }
        for n in &self.notes {
            writeln!(f, "note = {n}")?;
        }
        Ok(())
    }
}

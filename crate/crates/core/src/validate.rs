//! Structural and geometric validation of parsed models.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SemError;
use crate::geom::{self, GeomError};
use crate::model::CadModel;
use crate::sequence::check_invariants;

/// Rotation matrices further than this from orthonormal are rejected.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-3;

/// Loops enclosing less area than this (grid units squared) are degenerate.
pub const MIN_LOOP_AREA: f64 = 1e-6;

pub mod codes {
    pub const ROTATION_NOT_ORTHONORMAL: &str = "ROTATION_NOT_ORTHONORMAL";
    pub const DEGENERATE_LOOP: &str = "DEGENERATE_LOOP";
    pub const DEGENERATE_ARC: &str = "DEGENERATE_ARC";
    pub const CIRCLE_FIT_FAILURE: &str = "CIRCLE_FIT_FAILURE";
    pub const SCALE_NOT_POSITIVE: &str = "SCALE_NOT_POSITIVE";
    pub const ZERO_HEIGHT: &str = "ZERO_HEIGHT";
    pub const REPEATED_POINT: &str = "REPEATED_POINT";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: String,
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl Issue {
    pub fn error(code: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Self { code: code.into(), severity: Severity::Error, location: location.into(), message: message.into() }
    }

    pub fn warning(code: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Self { code: code.into(), severity: Severity::Warning, location: location.into(), message: message.into() }
    }
}

impl From<&SemError> for Issue {
    fn from(e: &SemError) -> Self {
        let location = match e.index() {
            Some(i) => format!("token {i}"),
            None => "sequence".to_string(),
        };
        Issue::error(e.code(), location, e.to_string())
    }
}

/// Outcome of validation; `is_valid` holds exactly when no issue is an error.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub is_valid: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn from_issues(issues: Vec<Issue>) -> Self {
        let is_valid = !issues.iter().any(|i| i.severity == Severity::Error);
        Self { is_valid, issues }
    }

    pub fn from_error(e: &SemError) -> Self {
        Self::from_issues(vec![Issue::from(e)])
    }

    pub fn push(&mut self, issue: Issue) {
        if issue.severity == Severity::Error {
            self.is_valid = false;
        }
        self.issues.push(issue);
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.is_valid { "valid" } else { "invalid" })?;
        for i in &self.issues {
            let sev = match i.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "  {sev} {} at {}: {}", i.code, i.location, i.message)?;
        }
        Ok(())
    }
}

/// Checks structure, loop geometry, and extrusion parameters.
pub fn validate(model: &CadModel) -> ValidationReport {
    let mut report = ValidationReport { is_valid: true, issues: Vec::new() };
    if let Err(e) = check_invariants(model) {
        report.push(Issue::from(&e));
        return report;
    }
    for (i, pair) in model.pairs.iter().enumerate() {
        for (j, face) in pair.sketch.faces.iter().enumerate() {
            for (k, lp) in face.loops.iter().enumerate() {
                let loc = format!("pair {i} face {j} loop {k}");
                for w in lp.curves.windows(2) {
                    if w[0].first_point() == w[1].first_point() {
                        report.push(Issue::warning(codes::REPEATED_POINT, &loc, "consecutive curves start at the same point"));
                        break;
                    }
                }
                match geom::loop_outline(lp) {
                    Ok(poly) => {
                        let area = geom::signed_area(&poly).abs();
                        if area < MIN_LOOP_AREA {
                            report.push(Issue::error(codes::DEGENERATE_LOOP, &loc, format!("loop encloses area {area}")));
                        }
                    }
                    Err(e @ GeomError::DegenerateArc { .. }) => {
                        report.push(Issue::error(codes::DEGENERATE_ARC, &loc, e.to_string()));
                    }
                    Err(e @ GeomError::CircleFitFailure { .. }) => {
                        report.push(Issue::error(codes::CIRCLE_FIT_FAILURE, &loc, e.to_string()));
                    }
                }
            }
        }
        let ext = &pair.extrusion;
        let loc = format!("pair {i} extrusion");
        let err = ext.orthonormality_error();
        if err > ORTHONORMAL_TOLERANCE {
            report.push(Issue::error(
                codes::ROTATION_NOT_ORTHONORMAL,
                &loc,
                format!("|R Rᵀ - I| reaches {err:.4}"),
            ));
        }
        if ext.scale == 0 {
            report.push(Issue::error(codes::SCALE_NOT_POSITIVE, &loc, "scale factor is zero"));
        }
        if ext.extent_top == ext.extent_bottom {
            report.push(Issue::warning(codes::ZERO_HEIGHT, &loc, "top and bottom planes coincide"));
        }
    }
    report
}

//! Verification reports: per-query outcomes with exact sets in generator
//! form so third parties can re-check the claims independently. Reports are
//! deterministic for identical inputs up to the timing fields.

use serde::{Deserialize, Serialize};

use crate::kernel::{scalar_to_string, Scalar, Vector};
use crate::polyhedra::Polyhedron;

use super::instance::vector_to_strings;

/// Soundness taxonomy: `Refuted` always carries an exactly checkable
/// witness; `Inconclusive` only arises from grid floors or resource caps,
/// never from a violated identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Inconclusive,
    Refuted,
}

impl Status {
    pub fn worst(a: Status, b: Status) -> Status {
        a.max(b)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verified => 0,
            Status::Refuted => 1,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub status: Status,
    pub queries: Vec<QueryReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QueryReport {
    pub index: usize,
    pub kind: String,
    pub status: Status,
    pub point: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Timing only; excluded from determinism comparisons.
    pub wall_ms: u64,
}

/// One named identity or claim checked at one or more slacks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<NamedSet>,
}

/// An exact set in generator form, tagged with its role in the check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedSet {
    pub name: String,
    pub points: Vec<Vec<String>>,
    pub rays: Vec<Vec<String>>,
}

impl NamedSet {
    pub fn from_polyhedron(name: impl Into<String>, p: &Polyhedron) -> crate::Result<NamedSet> {
        let v = p.vrep()?;
        Ok(NamedSet {
            name: name.into(),
            points: v.points.iter().map(vector_to_strings).collect(),
            rays: v.rays.iter().map(vector_to_strings).collect(),
        })
    }
}

pub fn eps_label(eps: &Scalar) -> String {
    scalar_to_string(eps)
}

pub fn witness_strings(w: &Vector) -> Vec<String> {
    vector_to_strings(w)
}

impl Report {
    pub fn from_queries(queries: Vec<QueryReport>) -> Report {
        let status = queries
            .iter()
            .map(|q| q.status)
            .fold(Status::Verified, Status::worst);
        Report { status, queries }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Canonical form for byte-comparison: timing zeroed out.
    pub fn normalized_json(&self) -> String {
        let mut clone = self.clone();
        for q in &mut clone.queries {
            q.wall_ms = 0;
        }
        clone.to_json()
    }
}

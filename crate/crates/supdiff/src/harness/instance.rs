//! Instance files: the JSON schema, exact rational parsing with located
//! errors, and validation into the domain types.

use std::collections::BTreeMap;

use num::Signed;
use serde::{Deserialize, Serialize};

use crate::convexfn::{AffinePiece, PolyConvexFn};
use crate::error::{Error, Result};
use crate::kernel::{parse_scalar, scalar_to_string, Matrix, Scalar, Vector};
use crate::polyhedra::HRep;
use crate::supcalc::{FamilyMember, SupFamily};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InstanceFile {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MetaInfo>,
    pub functions: Vec<FunctionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<FunctionSpec>,
    pub queries: Vec<QuerySpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MetaInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FunctionEntry {
    pub id: String,
    #[serde(flatten)]
    pub spec: FunctionSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FunctionSpec {
    pub pieces: Vec<PieceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PieceSpec {
    pub a: Vec<String>,
    pub b: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DomainSpec {
    #[serde(rename = "C")]
    pub c: Vec<Vec<String>>,
    pub d: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuerySpec {
    pub kind: QueryKind,
    pub point: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<FormulaId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_weights: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub u_radii: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub probe_slater: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    NormalCone,
    Subdiff,
    Verify,
    Certify,
}

/// Formula identifiers as they appear in instance files.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FormulaId {
    P1,
    Cp1,
    Ccor,
    Lemconsum,
    Normalnew,
    T1,
    T1bis,
    Hlz,
}

impl FormulaId {
    pub fn is_normal_cone(self) -> bool {
        matches!(
            self,
            FormulaId::P1
                | FormulaId::Cp1
                | FormulaId::Ccor
                | FormulaId::Lemconsum
                | FormulaId::Normalnew
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::P1 => "p1",
            FormulaId::Cp1 => "cp1",
            FormulaId::Ccor => "ccor",
            FormulaId::Lemconsum => "lemconsum",
            FormulaId::Normalnew => "normalnew",
            FormulaId::T1 => "t1",
            FormulaId::T1bis => "t1bis",
            FormulaId::Hlz => "hlz",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum WeightChoice {
    /// The worked weighting example for normal-cone formulas.
    Cp1,
    /// Slack-scaled inactive weights for subdifferential formulas.
    Corr,
    Ones,
    Custom,
}

/// A parsed and validated instance.
#[derive(Debug)]
pub struct Instance {
    pub dimension: usize,
    pub family: SupFamily,
    pub objective: Option<PolyConvexFn>,
    pub queries: Vec<Query>,
    pub meta: Option<MetaInfo>,
}

#[derive(Clone, Debug)]
pub struct Query {
    pub kind: QueryKind,
    pub point: Vector,
    pub epsilons: Vec<Scalar>,
    pub formula: Option<FormulaId>,
    pub weights: Option<WeightChoice>,
    pub custom_weights: Option<BTreeMap<String, Scalar>>,
    pub deltas: Option<BTreeMap<String, Scalar>>,
    pub probes: Vec<Vector>,
    pub u_radii: Vec<Scalar>,
    pub probe_slater: bool,
}

pub fn parse_vector(entries: &[String], dim: usize, location: &str) -> Result<Vector> {
    if entries.len() != dim {
        return Err(Error::parse(
            location,
            format!("expected {dim} entries, found {}", entries.len()),
        ));
    }
    let mut out = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        out.push(
            parse_scalar(e)
                .map_err(|err| Error::parse(format!("{location}[{i}]"), err.to_string()))?,
        );
    }
    Ok(Vector::new(out))
}

pub fn vector_to_strings(v: &Vector) -> Vec<String> {
    v.iter().map(scalar_to_string).collect()
}

impl FunctionSpec {
    pub fn to_function(&self, dim: usize, location: &str) -> Result<PolyConvexFn> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            let loc = format!("{location}.pieces[{i}]");
            let gradient = parse_vector(&p.a, dim, &format!("{loc}.a"))?;
            let offset = parse_scalar(&p.b)
                .map_err(|err| Error::parse(format!("{loc}.b"), err.to_string()))?;
            pieces.push(AffinePiece::new(gradient, offset));
        }
        let domain = match &self.domain {
            None => HRep::full_space(dim),
            Some(d) => {
                if d.c.len() != d.d.len() {
                    return Err(Error::parse(
                        format!("{location}.domain"),
                        format!("{} rows in C but {} entries in d", d.c.len(), d.d.len()),
                    ));
                }
                let mut rows = Vec::with_capacity(d.c.len());
                for (i, row) in d.c.iter().enumerate() {
                    rows.push(parse_vector(
                        row,
                        dim,
                        &format!("{location}.domain.C[{i}]"),
                    )?);
                }
                let rhs = {
                    let mut out = Vec::with_capacity(d.d.len());
                    for (i, e) in d.d.iter().enumerate() {
                        out.push(parse_scalar(e).map_err(|err| {
                            Error::parse(format!("{location}.domain.d[{i}]"), err.to_string())
                        })?);
                    }
                    Vector::new(out)
                };
                HRep::new(Matrix::from_rows(rows, dim)?, rhs)?
            }
        };
        PolyConvexFn::new(pieces, domain)
            .map_err(|err| Error::parse(location, err.to_string()))
    }

    pub fn from_function(f: &PolyConvexFn) -> Self {
        let domain = f
            .domain_poly()
            .hrep()
            .ok()
            .filter(|h| h.rows() > 0)
            .map(|h| DomainSpec {
                c: (0..h.rows())
                    .map(|r| vector_to_strings(&h.a.row_vector(r)))
                    .collect(),
                d: h.b.iter().map(scalar_to_string).collect(),
            });
        FunctionSpec {
            pieces: f
                .pieces()
                .iter()
                .map(|p| PieceSpec {
                    a: vector_to_strings(&p.gradient),
                    b: scalar_to_string(&p.offset),
                })
                .collect(),
            domain,
        }
    }
}

impl InstanceFile {
    pub fn parse_str(text: &str) -> Result<InstanceFile> {
        serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Full validation into domain types; every query point must lie in the
    /// common domain, rationals must parse, weights must be well-formed.
    pub fn validate(&self) -> Result<Instance> {
        if self.dimension == 0 {
            return Err(Error::parse("dimension", "must be at least 1"));
        }
        let mut members = Vec::with_capacity(self.functions.len());
        for (i, entry) in self.functions.iter().enumerate() {
            let f = entry
                .spec
                .to_function(self.dimension, &format!("functions[{i}]"))?;
            members.push(FamilyMember {
                id: entry.id.clone(),
                f,
            });
        }
        let family =
            SupFamily::new(members).map_err(|e| Error::parse("functions", e.to_string()))?;
        let objective = self
            .objective
            .as_ref()
            .map(|spec| spec.to_function(self.dimension, "objective"))
            .transpose()?;

        let mut queries = Vec::with_capacity(self.queries.len());
        for (i, q) in self.queries.iter().enumerate() {
            let loc = format!("queries[{i}]");
            let point = parse_vector(&q.point, self.dimension, &format!("{loc}.point"))?;
            family
                .values_at(&point)
                .map_err(|e| Error::parse(format!("{loc}.point"), e.to_string()))?;
            let mut epsilons = Vec::with_capacity(q.epsilons.len());
            for (j, e) in q.epsilons.iter().enumerate() {
                let eps = parse_scalar(e).map_err(|err| {
                    Error::parse(format!("{loc}.epsilons[{j}]"), err.to_string())
                })?;
                if !eps.is_positive() {
                    return Err(Error::parse(
                        format!("{loc}.epsilons[{j}]"),
                        "slacks must be positive",
                    ));
                }
                epsilons.push(eps);
            }
            let custom_weights = q
                .custom_weights
                .as_ref()
                .map(|m| parse_id_map(m, &family, &format!("{loc}.custom_weights")))
                .transpose()?;
            let deltas = q
                .deltas
                .as_ref()
                .map(|m| parse_id_map(m, &family, &format!("{loc}.deltas")))
                .transpose()?;
            let probes = q
                .probes
                .iter()
                .enumerate()
                .map(|(j, p)| parse_vector(p, self.dimension, &format!("{loc}.probes[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            let mut u_radii = Vec::with_capacity(q.u_radii.len());
            for (j, u) in q.u_radii.iter().enumerate() {
                let r = parse_scalar(u).map_err(|err| {
                    Error::parse(format!("{loc}.u_radii[{j}]"), err.to_string())
                })?;
                if !r.is_positive() {
                    return Err(Error::parse(
                        format!("{loc}.u_radii[{j}]"),
                        "box radii must be positive",
                    ));
                }
                u_radii.push(r);
            }
            if q.kind == QueryKind::Certify && objective.is_none() {
                return Err(Error::parse(
                    &loc,
                    "certification queries need an objective",
                ));
            }
            queries.push(Query {
                kind: q.kind,
                point,
                epsilons,
                formula: q.formula,
                weights: q.weights,
                custom_weights,
                deltas,
                probes,
                u_radii,
                probe_slater: q.probe_slater,
            });
        }
        Ok(Instance {
            dimension: self.dimension,
            family,
            objective,
            queries,
            meta: self.meta.clone(),
        })
    }
}

fn parse_id_map(
    raw: &BTreeMap<String, String>,
    family: &SupFamily,
    location: &str,
) -> Result<BTreeMap<String, Scalar>> {
    let mut out = BTreeMap::new();
    for (id, text) in raw {
        if family.index_of(id).is_none() {
            return Err(Error::parse(
                format!("{location}.{id}"),
                "unknown function id",
            ));
        }
        let v = parse_scalar(text)
            .map_err(|err| Error::parse(format!("{location}.{id}"), err.to_string()))?;
        out.insert(id.clone(), v);
    }
    Ok(out)
}

//! JSON documents for spaces, processes, paths and offspring laws.
//!
//! Numbers may be written as JSON numbers or as strings such as `"1/3"` or
//! `"0.25"`; both are read exactly. Exact values are written back as strings,
//! floating values as numbers.
//!
//! ```json
//! {"probs": ["1/4", "1/4", "1/4", "1/4"], "partitions": [[[0, 1, 2, 3]], [[0, 1], [2, 3]]]}
//! {"filtration": {"probs": [...], "partitions": [...]}, "values": [[...], [...]]}
//! {"p": ["1/4", 0, "3/4"]}
//! ```

use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::branching::{BranchingError, OffspringDistribution};
use crate::prob::{FiniteSpace, Partition, ProbError, RandomVector};
use crate::process::{AdaptedProcess, Filtration, ProcessError};
use crate::scalar::{parse_rational, Scalar};
use crate::upcrossing::{SamplePath, UpcrossingError};

/// Version stamped into every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("`{field}`: {message}")]
    Shape { field: &'static str, message: String },
    #[error("`{field}`: cannot read {text:?} as a number")]
    BadNumber { field: &'static str, text: String },
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u64),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Branching(#[from] BranchingError),
    #[error(transparent)]
    Path(#[from] UpcrossingError),
}

fn shape(field: &'static str, message: impl Into<String>) -> IoError {
    IoError::Shape {
        field,
        message: message.into(),
    }
}

/// Reads a number or a numeric string exactly.
pub fn scalar_from_json<S: Scalar>(field: &'static str, v: &Value) -> Result<S, IoError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        other => {
            return Err(IoError::BadNumber {
                field,
                text: other.to_string(),
            })
        }
    };
    let bad = || IoError::BadNumber {
        field,
        text: text.clone(),
    };
    if S::EXACT {
        parse_rational(&text).map(|r| S::from_rational(&r)).ok_or_else(bad)
    } else {
        match text.parse::<f64>() {
            Ok(x) => S::from_f64(x).ok_or_else(bad),
            Err(_) => parse_rational(&text).map(|r| S::from_rational(&r)).ok_or_else(bad),
        }
    }
}

pub fn scalar_to_json<S: Scalar>(x: &S) -> Value {
    if S::EXACT {
        Value::String(x.to_string())
    } else {
        json!(x.to_f64())
    }
}

fn array<'a>(field: &'static str, v: &'a Value) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| shape(field, "expected an array"))
}

fn scalars<S: Scalar>(field: &'static str, v: &Value) -> Result<Vec<S>, IoError> {
    array(field, v)?.iter().map(|x| scalar_from_json(field, x)).collect()
}

fn indices(field: &'static str, v: &Value) -> Result<Vec<usize>, IoError> {
    array(field, v)?
        .iter()
        .map(|i| {
            i.as_u64()
                .map(|i| i as usize)
                .ok_or_else(|| shape(field, format!("{i} is not an outcome index")))
        })
        .collect()
}

fn check_version(obj: &Map<String, Value>) -> Result<(), IoError> {
    match obj.get("schema_version") {
        None => Ok(()),
        Some(v) => match v.as_u64() {
            Some(n) if n == SCHEMA_VERSION as u64 => Ok(()),
            Some(n) => Err(IoError::SchemaVersion(n)),
            None => Err(shape("schema_version", "expected an integer")),
        },
    }
}

fn object<'a>(field: &'static str, v: &'a Value) -> Result<&'a Map<String, Value>, IoError> {
    let obj = v.as_object().ok_or_else(|| shape(field, "expected an object"))?;
    check_version(obj)?;
    Ok(obj)
}

/// Blocks given as `[[0, 1], [2, 3]]`, or `{"blocks": [...]}`.
pub fn partition_from_json(size: usize, v: &Value) -> Result<Partition, IoError> {
    let blocks = match v {
        Value::Object(obj) => obj.get("blocks").ok_or(IoError::Missing("blocks"))?,
        other => other,
    };
    let blocks = array("blocks", blocks)?
        .iter()
        .map(|b| indices("blocks", b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Partition::new(size, blocks)?)
}

pub fn partition_to_json(p: &Partition) -> Value {
    json!(p.blocks())
}

/// A space with its (possibly empty) list of partitions.
#[derive(Debug, Clone)]
pub struct SpaceDoc<S> {
    pub space: Arc<FiniteSpace<S>>,
    pub partitions: Vec<Partition>,
}

pub fn space_from_json<S: Scalar>(v: &Value) -> Result<SpaceDoc<S>, IoError> {
    let obj = object("space", v)?;
    let probs = scalars("probs", obj.get("probs").ok_or(IoError::Missing("probs"))?)?;
    let space = match obj.get("labels") {
        Some(labels) => {
            let labels = array("labels", labels)?
                .iter()
                .map(|l| match l {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            FiniteSpace::with_labels(labels, probs)?
        }
        None => FiniteSpace::new(probs)?,
    };
    let partitions = match obj.get("partitions") {
        Some(ps) => array("partitions", ps)?
            .iter()
            .map(|p| partition_from_json(space.len(), p))
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    Ok(SpaceDoc {
        space: Arc::new(space),
        partitions,
    })
}

pub fn space_to_json<S: Scalar>(space: &FiniteSpace<S>, partitions: &[Partition]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "probs": space.probs().iter().map(scalar_to_json).collect::<Vec<_>>(),
        "labels": space.labels(),
        "partitions": partitions.iter().map(partition_to_json).collect::<Vec<_>>(),
    })
}

/// Values as `[...]` or `{"values": [...]}`.
pub fn random_vector_from_json<S: Scalar>(space: Arc<FiniteSpace<S>>, v: &Value) -> Result<RandomVector<S>, IoError> {
    let values = match v {
        Value::Object(obj) => obj.get("values").ok_or(IoError::Missing("values"))?,
        other => other,
    };
    Ok(RandomVector::new(space, scalars("values", values)?)?)
}

pub fn process_from_json<S: Scalar>(v: &Value) -> Result<AdaptedProcess<S>, IoError> {
    let obj = object("process", v)?;
    let doc = space_from_json::<S>(obj.get("filtration").ok_or(IoError::Missing("filtration"))?)?;
    let filtration = Arc::new(Filtration::new(doc.space, doc.partitions)?);
    let values = array("values", obj.get("values").ok_or(IoError::Missing("values"))?)?
        .iter()
        .map(|row| scalars("values", row))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AdaptedProcess::new(filtration, values)?)
}

pub fn process_to_json<S: Scalar>(x: &AdaptedProcess<S>) -> Value {
    let f = x.filtration();
    json!({
        "schema_version": SCHEMA_VERSION,
        "filtration": space_to_json(f.space(), f.partitions()),
        "values": x
            .vars()
            .iter()
            .map(|v| v.values().iter().map(scalar_to_json).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

/// A path as `[...]` or `{"values": [...]}`.
pub fn path_from_json<S: Scalar>(v: &Value) -> Result<SamplePath<S>, IoError> {
    let values = match v {
        Value::Object(obj) => {
            check_version(obj)?;
            obj.get("values").ok_or(IoError::Missing("values"))?
        }
        other => other,
    };
    Ok(SamplePath::new(scalars("values", values)?)?)
}

/// Comma- or whitespace-separated numbers, e.g. `0, 2, 1/2`.
pub fn path_from_text<S: Scalar>(text: &str) -> Result<SamplePath<S>, IoError> {
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| scalar_from_json("values", &Value::String(t.to_string())))
        .collect::<Result<Vec<S>, _>>()?;
    Ok(SamplePath::new(values)?)
}

/// `{"p": [p0, p1, ...]}`.
pub fn offspring_from_json<S: Scalar>(v: &Value) -> Result<OffspringDistribution<S>, IoError> {
    let obj = object("offspring", v)?;
    let probs = scalars("p", obj.get("p").ok_or(IoError::Missing("p"))?)?;
    Ok(OffspringDistribution::new(probs)?)
}

pub fn offspring_to_json<S: Scalar>(d: &OffspringDistribution<S>) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "p": d.probs().iter().map(scalar_to_json).collect::<Vec<_>>(),
    })
}

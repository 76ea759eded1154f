//! Instance corpora and prediction files (JSON Lines).
//!
//! Instance records: `{"id", "query", "description", "category"?}`.
//! Prediction records: `{"id", "seed", "candidate"}`, where `seed` may be a
//! string or an integer run label.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::lexer::Lexer;

/// Length limit, in description tokens, applied when building corpora.
pub const DEFAULT_MAX_TOKENS: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub id: String,
    /// Natural-language game text (description and rules).
    pub query: String,
    /// Ground-truth game description.
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SeedLabel(pub String);

impl fmt::Display for SeedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for SeedLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        Ok(SeedLabel(match Raw::deserialize(d)? {
            Raw::Int(i) => i.to_string(),
            Raw::Str(s) => s,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub id: String,
    pub seed: SeedLabel,
    pub candidate: String,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: duplicate prediction for id `{id}` seed `{seed}`")]
    DuplicatePrediction {
        line: usize,
        id: String,
        seed: String,
    },
}

fn parse_lines<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<(usize, T)>, DatasetError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map(|r| (i + 1, r))
                .map_err(|e| DatasetError::Malformed {
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect()
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_instances(text: &str) -> Result<Vec<Instance>, DatasetError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, inst) in parse_lines::<Instance>(text)? {
        if inst.description.trim().is_empty() {
            return Err(DatasetError::Malformed {
                line,
                message: "empty description".into(),
            });
        }
        if !seen.insert(inst.id.clone()) {
            return Err(DatasetError::DuplicateId { line, id: inst.id });
        }
        out.push(inst);
    }
    Ok(out)
}

pub fn load_instances(path: impl AsRef<Path>) -> Result<Vec<Instance>, DatasetError> {
    parse_instances(&read(path.as_ref())?)
}

pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, DatasetError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, pred) in parse_lines::<Prediction>(text)? {
        if !seen.insert((pred.id.clone(), pred.seed.clone())) {
            return Err(DatasetError::DuplicatePrediction {
                line,
                id: pred.id,
                seed: pred.seed.0,
            });
        }
        out.push(pred);
    }
    Ok(out)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>, DatasetError> {
    parse_predictions(&read(path.as_ref())?)
}

/// One JSON object per line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

/// Number of description tokens; an unterminated string counts the tokens
/// before it plus one.
pub fn token_length(description: &str) -> usize {
    let mut n = 0;
    for tok in Lexer::new(description) {
        n += 1;
        if tok.is_err() {
            break;
        }
    }
    n
}

/// Keep instances whose description has at most `max_tokens` tokens.
pub fn filter_by_length(instances: &[Instance], max_tokens: usize) -> Vec<Instance> {
    instances
        .iter()
        .filter(|i| max_tokens > 0 && token_length(&i.description) <= max_tokens)
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(id: &str, description: &str) -> Instance {
        Instance {
            id: id.into(),
            query: "q".into(),
            description: description.into(),
            category: None,
        }
    }

    #[test]
    fn loads_in_order() {
        let text = r#"{"id":"g1","query":"a","description":"(x)","category":"puzzle"}
{"id":"g2","query":"b","description":"(y)"}
"#;
        let v = parse_instances(text).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].id, "g1");
        assert_eq!(v[0].category.as_deref(), Some("puzzle"));
        assert_eq!(v[1].id, "g2");
        assert_eq!(v[1].category, None);
    }

    #[test]
    fn duplicate_id() {
        let text = r#"{"id":"g1","query":"a","description":"(x)"}
{"id":"g1","query":"b","description":"(y)"}"#;
        match parse_instances(text).unwrap_err() {
            DatasetError::DuplicateId { line, id } => assert_eq!((line, id.as_str()), (2, "g1")),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn missing_description() {
        let text = "\n{\"id\":\"g1\",\"query\":\"a\"}";
        match parse_instances(text).unwrap_err() {
            DatasetError::Malformed { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("description"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn predictions_accept_numeric_seeds() {
        let text = r#"{"id":"g1","seed":0,"candidate":"(x)"}
{"id":"g1","seed":"1","candidate":"(x)"}"#;
        let p = parse_predictions(text).unwrap();
        assert_eq!(p[0].seed, SeedLabel("0".into()));
        let dup = r#"{"id":"g1","seed":0,"candidate":"(x)"}
{"id":"g1","seed":"0","candidate":"(y)"}"#;
        assert!(matches!(
            parse_predictions(dup).unwrap_err(),
            DatasetError::DuplicatePrediction { line: 2, .. }
        ));
    }

    #[test]
    fn length_filter() {
        let long = format!("({})", vec!["a"; 499].join(" "));
        assert_eq!(token_length(&long), 501);
        let v = vec![inst("short", "(a b)"), inst("long", &long)];
        let kept = filter_by_length(&v, 500);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "short");
        assert!(filter_by_length(&v, 0).is_empty());
        assert_eq!(token_length("(a \"b"), 3);
    }
}

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};

use super::{normalize, read_file, scalar_to_string, DomainError};

/// Deterministic stand-in for an external API: a lookup table from the
/// mandatory parameters to a result record.
#[derive(Clone, Debug)]
pub struct ApiFixture {
    parameters: Vec<String>,
    table: HashMap<Vec<String>, BTreeMap<String, Value>>,
}

#[derive(Deserialize)]
struct FixtureFile {
    entries: Vec<Map<String, Value>>,
}

impl ApiFixture {
    /// Builds a fixture from `{"entries": [...]}`; in each entry the fields
    /// named in `parameters` form the key and the remaining fields the result.
    pub fn from_json(text: &str, parameters: &[String]) -> Result<Self, DomainError> {
        let file: FixtureFile = serde_json::from_str(text)?;
        let mut table = HashMap::new();
        for (i, mut entry) in file.entries.into_iter().enumerate() {
            let key = parameters
                .iter()
                .map(|p| {
                    entry
                        .remove(p)
                        .as_ref()
                        .and_then(scalar_to_string)
                        .map(|v| normalize(&v))
                        .ok_or_else(|| DomainError::InvalidData(format!("entry {i} lacks {p}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let result: BTreeMap<String, Value> = entry.into_iter().collect();
            if table.insert(key, result).is_some() {
                return Err(DomainError::InvalidData(format!("entry {i} repeats a parameter set")));
            }
        }
        Ok(ApiFixture { parameters: parameters.to_vec(), table })
    }

    pub fn load(path: impl AsRef<Path>, parameters: &[String]) -> Result<Self, DomainError> {
        Self::from_json(&read_file(path.as_ref())?, parameters)
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn api_query(&self, params: &BTreeMap<String, String>) -> Result<BTreeMap<String, Value>, DomainError> {
        let missing: Vec<String> =
            self.parameters.iter().filter(|p| !params.contains_key(*p)).cloned().collect();
        if !missing.is_empty() {
            return Err(DomainError::MissingParameter(missing));
        }
        let key: Vec<String> = self.parameters.iter().map(|p| normalize(&params[p])).collect();
        self.table.get(&key).cloned().ok_or_else(|| {
            DomainError::NoFixtureEntry(
                self.parameters.iter().map(|p| (p.clone(), params[p].clone())).collect(),
            )
        })
    }
}

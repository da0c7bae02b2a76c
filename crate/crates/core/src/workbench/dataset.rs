use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GibbsError, Result};
use crate::models::SampleSummary;

/// A named frequency table: `n` reads spread over `j` species.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    summary: SampleSummary,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    name: String,
    n: usize,
    multiplicities: Option<BTreeMap<String, usize>>,
    frequencies: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct EmittedDataset<'a> {
    name: &'a str,
    n: usize,
    multiplicities: BTreeMap<String, usize>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, summary: SampleSummary) -> Self {
        Dataset {
            name: name.into(),
            summary,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.summary.n()
    }

    pub fn j(&self) -> usize {
        self.summary.j()
    }

    pub fn summary(&self) -> &SampleSummary {
        &self.summary
    }

    pub fn multiplicities(&self) -> &BTreeMap<usize, usize> {
        self.summary.multiplicities()
    }

    pub fn frequencies(&self) -> &[usize] {
        self.summary.frequencies()
    }

    /// Parses either encoding and checks it against the declared `n`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawDataset = serde_json::from_str(text)?;
        let summary = match (raw.multiplicities, raw.frequencies) {
            (Some(mult), None) => {
                let mut levels = BTreeMap::new();
                for (key, count) in mult {
                    let level: usize = key.trim().parse().map_err(|_| {
                        GibbsError::validation(format!("multiplicity level {key:?} is not a positive integer"))
                    })?;
                    if level == 0 {
                        return Err(GibbsError::validation("multiplicity level 0 is not allowed"));
                    }
                    if count > 0 && levels.insert(level, count).is_some() {
                        return Err(GibbsError::validation(format!(
                            "multiplicity level {level} appears twice"
                        )));
                    }
                }
                let total: usize = levels.iter().map(|(i, c)| i * c).sum();
                if total != raw.n {
                    return Err(GibbsError::validation(format!(
                        "dataset {:?}: sum of level x count is {total} but n is {}",
                        raw.name, raw.n
                    )));
                }
                SampleSummary::from_multiplicities(&levels)?
            }
            (None, Some(freqs)) => {
                let total: usize = freqs.iter().sum();
                if total != raw.n {
                    return Err(GibbsError::validation(format!(
                        "dataset {:?}: frequencies sum to {total} but n is {}",
                        raw.name, raw.n
                    )));
                }
                SampleSummary::from_frequencies(freqs)?
            }
            (Some(_), Some(_)) => {
                return Err(GibbsError::validation(
                    "dataset gives both multiplicities and frequencies",
                ));
            }
            (None, None) => return Err(GibbsError::validation("dataset needs multiplicities or frequencies")),
        };
        Ok(Dataset {
            name: raw.name,
            summary,
        })
    }

    /// Multiplicity encoding, levels in increasing order.
    pub fn to_json_string(&self) -> String {
        let emitted = EmittedDataset {
            name: &self.name,
            n: self.n(),
            multiplicities: self
                .multiplicities()
                .iter()
                .map(|(level, count)| (level.to_string(), *count))
                .collect(),
        };
        serde_json::to_string_pretty(&emitted).expect("dataset serializes")
    }

    /// One of the bundled datasets: `library1`, `library2`, `tomato_t1526`
    /// (also `tomato`).
    pub fn fixture(name: &str) -> Option<Dataset> {
        let text = match name {
            "library1" => include_str!("../../data/library1.json"),
            "library2" => include_str!("../../data/library2.json"),
            "tomato_t1526" | "tomato" => include_str!("../../data/tomato_t1526.json"),
            _ => return None,
        };
        Some(Dataset::from_json_str(text).expect("bundled fixture is valid"))
    }

    pub fn library1() -> Dataset {
        Self::fixture("library1").unwrap()
    }

    pub fn library2() -> Dataset {
        Self::fixture("library2").unwrap()
    }

    pub fn tomato() -> Dataset {
        Self::fixture("tomato_t1526").unwrap()
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| GibbsError::validation(format!("cannot read dataset {}: {e}", path.display())))?;
    Dataset::from_json_str(&text)
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, dataset.to_json_string() + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        assert_eq!((Dataset::library1().n(), Dataset::library1().j()), (100, 59));
        assert_eq!((Dataset::library2().n(), Dataset::library2().j()), (100, 37));
        assert_eq!((Dataset::tomato().n(), Dataset::tomato().j()), (2586, 1825));
        assert!(Dataset::fixture("nope").is_none());
    }

    #[test]
    fn frequencies_encoding() {
        let d = Dataset::from_json_str(r#"{"name": "t", "n": 6, "frequencies": [3, 1, 2]}"#).unwrap();
        assert_eq!(d.j(), 3);
        assert_eq!(d.multiplicities().get(&2), Some(&1));
    }

    #[test]
    fn inconsistent_sums_are_named() {
        let err = Dataset::from_json_str(r#"{"name": "t", "n": 7, "multiplicities": {"1": 2, "2": 2}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('6') && msg.contains('7'), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn malformed_inputs() {
        for text in [
            r#"{"name": "t", "n": 1}"#,
            r#"{"name": "t", "n": 1, "frequencies": [1], "multiplicities": {"1": 1}}"#,
            r#"{"name": "t", "n": 1, "multiplicities": {"x": 1}}"#,
            r#"{"name": "t", "n": 0, "multiplicities": {"0": 1}}"#,
            r#"{"name": "t", "n": 1, "frequencies": [1], "extra": 1}"#,
            "not json",
        ] {
            assert!(Dataset::from_json_str(text).is_err(), "{text}");
        }
    }
}

//! Named period matrices, read from a versioned JSON file.
//!
//! Schema: `{ name: { "n": dim, "tau": [[[re, im], ...], ...] } }`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;

use crate::error::{Result, ThetaError};
use crate::siegel::SiegelMatrix;

/// Contents of the fixtures shipped with the crate.
pub const BUILTIN_FIXTURES: &str = include_str!("../fixtures/tau_fixtures.v1.json");

#[derive(Clone, Debug, Deserialize)]
struct Entry {
    n: usize,
    tau: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug)]
pub struct Fixtures {
    entries: BTreeMap<String, Entry>,
}

impl Fixtures {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_FIXTURES).expect("bundled fixtures are valid")
    }

    pub fn parse(json: &str) -> Result<Self> {
        let entries: BTreeMap<String, Entry> = serde_json::from_str(json)
            .map_err(|e| ThetaError::Precondition(format!("fixtures: {e}")))?;
        let fixtures = Self { entries };
        for name in fixtures.names() {
            fixtures.get(&name)?;
        }
        Ok(fixtures)
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn get(&self, name: &str) -> Result<SiegelMatrix> {
        let entry = self
            .entries
            .get(name)
            .ok_or_else(|| ThetaError::Precondition(format!("unknown fixture `{name}`")))?;
        let n = entry.n;
        if entry.tau.len() != n || entry.tau.iter().any(|row| row.len() != n) {
            return Err(ThetaError::NotSquare {
                rows: entry.tau.len(),
                cols: entry.tau.first().map_or(0, Vec::len),
            });
        }
        SiegelMatrix::new(DMatrix::from_fn(n, n, |i, j| {
            let [re, im] = entry.tau[i][j];
            Complex64::new(re, im)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_fixtures_load() {
        let f = Fixtures::builtin();
        for name in ["i", "iI2", "iI2+0.1S", "iI3", "block", "block3"] {
            assert!(f.get(name).is_ok(), "{name}");
        }
        assert_eq!(f.get("iI3").unwrap().dim(), 3);
        assert!(f.get("nope").is_err());
    }

    #[test]
    fn rejects_ragged_matrix() {
        let bad = r#"{"x": {"n": 2, "tau": [[[0,1],[0,0]],[[0,0]]]}}"#;
        assert!(Fixtures::parse(bad).is_err());
    }
}

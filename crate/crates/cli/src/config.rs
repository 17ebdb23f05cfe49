//! Flat key=value config files; command-line flags override file values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliFailure;

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliFailure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliFailure::config(format!("{}: {}", path.display(), e)))?;
        let mut values = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliFailure::config(format!(
                    "{}:{}: expected key=value, got {:?}",
                    path.display(),
                    idx + 1,
                    line
                ))
            })?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Flag wins; otherwise the file value (parsed); otherwise None.
    pub fn resolve<T: FromStr + Clone>(
        &self,
        flag: &Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliFailure> {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliFailure::config(format!("config key {} has unparsable value {:?}", key, raw))
            }),
        }
    }
}

/// Geometric grid spec `start:factor:count`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid spec {:?} is not start:factor:count", s));
        }
        let start: f64 = parts[0].parse().map_err(|_| "bad grid start".to_string())?;
        let factor: f64 = parts[1].parse().map_err(|_| "bad grid factor".to_string())?;
        let count: usize = parts[2].parse().map_err(|_| "bad grid count".to_string())?;
        if count < 1 {
            return Err("grid count must be >= 1".into());
        }
        if factor <= 1.0 {
            return Err("grid factor must be > 1".into());
        }
        Ok(Self {
            start,
            factor,
            count,
        })
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.start * self.factor.powi(i as i32))
            .collect()
    }
}

/// `beta:label` exceptional-zero spec.
#[derive(Debug, Clone, Copy)]
pub struct SiegelSpec {
    pub beta: f64,
    pub label: u64,
}

impl FromStr for SiegelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (b, l) = s
            .split_once(':')
            .ok_or_else(|| format!("exceptional-zero spec {:?} is not beta:label", s))?;
        Ok(Self {
            beta: b.parse().map_err(|_| "bad beta".to_string())?,
            label: l.parse().map_err(|_| "bad label".to_string())?,
        })
    }
}

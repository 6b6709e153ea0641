use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use facetopo_core::landmarks::{FeatureSubset, LandmarkConnectivity};
use facetopo_core::metrics::DistanceKind;
use facetopo_core::persistence::Mode;
use facetopo_core::{Error, Result};

/// What to compute and where to put it.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub data_root: PathBuf,
    /// `None` selects the built-in 83-landmark face graph.
    pub connectivity: Option<PathBuf>,
    pub modes: Vec<Mode>,
    pub subsets: Vec<FeatureSubset>,
    pub kinds: Vec<DistanceKind>,
    pub cache_dir: PathBuf,
    /// Worker threads; 0 lets the thread pool decide.
    pub parallelism: usize,
}

impl PipelineConfig {
    /// Every mode, preset subset and distance kind.
    pub fn new(data_root: impl Into<PathBuf>, cache_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_root: data_root.into(),
            connectivity: None,
            modes: Mode::ALL.to_vec(),
            subsets: FeatureSubset::PRESETS
                .iter()
                .map(|p| FeatureSubset::preset(p).expect("preset exists"))
                .collect(),
            kinds: DistanceKind::ALL.to_vec(),
            cache_dir: cache_dir.into(),
            parallelism: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() || self.subsets.is_empty() || self.kinds.is_empty() {
            return Err(Error::Parameter("modes, subsets and kinds must all be non-empty".into()));
        }
        if !self.data_root.is_dir() {
            return Err(Error::Parameter(format!("data root {} is not a directory", self.data_root.display())));
        }
        if let Some(c) = &self.connectivity {
            if !c.is_file() {
                return Err(Error::Parameter(format!("connectivity file {} does not exist", c.display())));
            }
        }
        Ok(())
    }

    pub fn load_connectivity(&self) -> Result<LandmarkConnectivity> {
        match &self.connectivity {
            Some(path) => LandmarkConnectivity::load(path),
            None => Ok(LandmarkConnectivity::default_face()),
        }
    }
}

/// Raw `key = value` settings from a config file. Blank lines and lines
/// starting with `#` are ignored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub const KEYS: [&'static str; 7] =
        ["data_root", "connectivity", "modes", "subsets", "kinds", "cache_dir", "parallelism"];

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let location = format!("line {}", n + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Format {
                location: location.clone(),
                message: format!("expected key = value, got '{line}'"),
            })?;
            let key = key.trim().replace('-', "_");
            if !Self::KEYS.contains(&key.as_str()) {
                return Err(Error::Format {
                    location,
                    message: format!("unknown key '{key}'"),
                });
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Parses a comma-separated list (`;` also accepted, so region lists with
/// commas can be avoided).
pub fn parse_list<T: FromStr<Err = Error>>(s: &str) -> Result<Vec<T>> {
    s.split([',', ';'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

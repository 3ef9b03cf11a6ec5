//! Resolves hardware names to specs: built-ins first, then `*.toml` files in
//! the directory named by `ROOFLENS_HW_PATH`.

use std::path::{Path, PathBuf};

use rooflens_core::hardware::builtin_specs;
use rooflens_core::HardwareSpec;

use crate::config::{load_spec_file, ConfigError};

pub const HW_PATH_ENV: &str = "ROOFLENS_HW_PATH";

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown hardware `{0}`")]
    UnknownHardware(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot list {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Where a spec came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Builtin,
    File(PathBuf),
}

#[derive(Clone, Debug, Default)]
pub struct Registry {
    user_dir: Option<PathBuf>,
}

impl Registry {
    pub fn new(user_dir: Option<PathBuf>) -> Self {
        Self { user_dir }
    }

    pub fn from_env() -> Self {
        Self::new(std::env::var_os(HW_PATH_ENV).map(PathBuf::from))
    }

    fn user_files(&self) -> Result<Vec<PathBuf>, RegistryError> {
        let Some(dir) = &self.user_dir else {
            return Ok(Vec::new());
        };
        let entries = std::fs::read_dir(dir).map_err(|source| RegistryError::Io {
            path: dir.clone(),
            source,
        })?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "toml"))
            .collect();
        files.sort();
        Ok(files)
    }

    /// Every known spec. A malformed user file fails the whole listing.
    pub fn list(&self) -> Result<Vec<(HardwareSpec, Source)>, RegistryError> {
        let mut out: Vec<_> = builtin_specs()
            .into_iter()
            .map(|s| (s, Source::Builtin))
            .collect();
        for path in self.user_files()? {
            let spec = load_spec_file(&path)?;
            out.push((spec, Source::File(path)));
        }
        Ok(out)
    }

    /// Accepts a path to a spec file, a built-in name, or the name (or file
    /// stem) of a spec in the user directory. Names ignore ASCII case.
    pub fn resolve(&self, name_or_path: &str) -> Result<HardwareSpec, RegistryError> {
        let as_path = Path::new(name_or_path);
        if as_path.is_file() {
            return Ok(load_spec_file(as_path)?);
        }
        if let Some(spec) = rooflens_core::hardware::builtin(name_or_path) {
            return Ok(spec);
        }
        for path in self.user_files()? {
            let stem_matches = path
                .file_stem()
                .and_then(|s| s.to_str())
                .is_some_and(|s| s.eq_ignore_ascii_case(name_or_path));
            let spec = load_spec_file(&path)?;
            if stem_matches || spec.name().eq_ignore_ascii_case(name_or_path) {
                return Ok(spec);
            }
        }
        Err(RegistryError::UnknownHardware(name_or_path.to_string()))
    }
}

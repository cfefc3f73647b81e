//! Service configuration file (TOML).
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! data_dir = "data"
//! docs_dir = "docs"
//! admins = ["admin"]
//!
//! [weights]
//! views = 1.0
//! requests = 2.0
//! quality = 1.0
//! untranslated = 3.0
//!
//! [[languages]]
//! code = "es"
//! name = "Spanish"
//! palette = ["á", "é", "í", "ó", "ú", "ü", "ñ", "¿", "¡"]
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::center::{Language, Settings};
use crate::error::{Error, Result};
use crate::ids::Lang;
use crate::workflow::PriorityWeights;

fn default_listen() -> String {
    "127.0.0.1:8080".to_owned()
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_docs_dir() -> PathBuf {
    PathBuf::from("docs")
}

fn default_true() -> bool {
    true
}

fn default_ttl() -> u64 {
    24 * 60 * 60
}

fn default_source_lang() -> Lang {
    Lang::from("en")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_listen")]
    pub listen: String,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default = "default_docs_dir")]
    pub docs_dir: PathBuf,
    /// Mirror translation comments into the language forums.
    #[serde(default = "default_true")]
    pub mirror_comments: bool,
    #[serde(default = "default_ttl")]
    pub session_ttl_secs: u64,
    /// Display names of members holding the administrator role.
    #[serde(default)]
    pub admins: Vec<String>,
    #[serde(default = "default_source_lang")]
    pub source_lang: Lang,
    #[serde(default)]
    pub weights: PriorityWeights,
    pub languages: Vec<Language>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Config::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Config =
            toml::from_str(text).map_err(|e| Error::validation("config", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if self.data_dir.is_relative() {
            self.data_dir = base.join(&self.data_dir);
        }
        if self.docs_dir.is_relative() {
            self.docs_dir = base.join(&self.docs_dir);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.languages.is_empty() {
            return Err(Error::validation("languages", "at least one target language is required"));
        }
        let mut seen = BTreeSet::new();
        for (i, lang) in self.languages.iter().enumerate() {
            if lang.code.as_str().trim().is_empty() {
                return Err(Error::validation(format!("languages[{i}].code"), "must not be empty"));
            }
            if !seen.insert(&lang.code) {
                return Err(Error::validation(
                    format!("languages[{i}].code"),
                    format!("duplicate language {}", lang.code),
                ));
            }
        }
        Ok(())
    }

    pub fn settings(&self) -> Settings {
        let mut settings = Settings::new(self.languages.iter().cloned());
        settings.source_lang = self.source_lang.clone();
        settings.weights = self.weights;
        settings.mirror_comments = self.mirror_comments;
        settings
    }

    pub fn is_admin(&self, display_name: &str) -> bool {
        self.admins.iter().any(|a| a.eq_ignore_ascii_case(display_name.trim()))
    }
}

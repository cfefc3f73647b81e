//! JSON exchange documents: the catalog document an administrator imports and
//! the per-language translation document produced by export.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ItemId, Lang, PageId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogDocument {
    pub pages: Vec<PageRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRecord {
    pub page_id: PageId,
    pub url: String,
    pub title: String,
    pub segments: Vec<SegmentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub id: ItemId,
    pub text: String,
    /// Kept as text so an unknown category is reported with its record path.
    pub category: String,
    pub context_before: String,
    pub context_after: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationDocument {
    pub lang: Lang,
    pub generated_at: String,
    pub items: Vec<TranslationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationEntry {
    pub id: ItemId,
    pub text: Option<String>,
    pub version: Option<u32>,
}

/// Either kind of exchange document, as accepted by the import endpoints.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Catalog(CatalogDocument),
    Translations(TranslationDocument),
}

impl CatalogDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::from_json(&e))
    }

    pub fn to_json(&self) -> String {
        render(self)
    }
}

impl TranslationDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::from_json(&e))
    }

    /// Canonical rendering shared by the CLI and the HTTP export.
    pub fn to_json(&self) -> String {
        render(self)
    }
}

impl Document {
    /// Parses either document kind. A top-level `pages` key selects the
    /// catalog schema; `lang` + `items` selects the translation schema.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::from_json(&e))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::validation("document", "top level must be a JSON object"))?;
        if obj.contains_key("pages") {
            CatalogDocument::parse(text).map(Document::Catalog)
        } else if obj.contains_key("lang") && obj.contains_key("items") {
            TranslationDocument::parse(text).map(Document::Translations)
        } else {
            Err(Error::validation(
                "document",
                "expected a catalog document (pages) or a translation document (lang, items)",
            ))
        }
    }
}

fn render<T: Serialize>(doc: &T) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("exchange documents always serialize");
    out.push('\n');
    out
}

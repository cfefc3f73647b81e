//! The string catalog: translatable items extracted from source pages.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::center::{now, Center};
use crate::error::{Error, Result};
use crate::exchange::{CatalogDocument, PageRecord, SegmentRecord};
use crate::ids::{ItemId, Lang, PageId};
use crate::store::TranslationStatus;
use crate::workflow::{self, RankEntry};

pub const HIGHLIGHT_OPEN: &str = "[[";
pub const HIGHLIGHT_CLOSE: &str = "]]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    MenuLink,
    InformationalText,
    Button,
    Heading,
    Other,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::MenuLink,
        Category::InformationalText,
        Category::Button,
        Category::Heading,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::MenuLink => "menu_link",
            Category::InformationalText => "informational_text",
            Category::Button => "button",
            Category::Heading => "heading",
            Category::Other => "other",
        }
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::validation("category", format!("unknown category {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub source_text: String,
    pub source_lang: Lang,
    pub page_id: PageId,
    pub category: Category,
    pub context_before: String,
    pub context_after: String,
    pub view_count: u64,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcePage {
    pub page_id: PageId,
    pub url_or_path: String,
    pub title: String,
    pub segment_ids: Vec<ItemId>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Catalog {
    pub items: BTreeMap<ItemId, Item>,
    pub pages: BTreeMap<PageId, SourcePage>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportSummary {
    pub added: usize,
    pub updated: usize,
    pub unchanged: usize,
}

impl fmt::Display for ImportSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} added, {} updated", self.added, self.updated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ListFilter {
    Untranslated,
    Translated,
    #[default]
    All,
}

impl FromStr for ListFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "untranslated" => Ok(ListFilter::Untranslated),
            "translated" => Ok(ListFilter::Translated),
            "all" => Ok(ListFilter::All),
            _ => Err(Error::validation("filter", format!("unknown filter {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ListOrder {
    #[default]
    Priority,
    Id,
}

impl FromStr for ListOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "priority" => Ok(ListOrder::Priority),
            "id" => Ok(ListOrder::Id),
            _ => Err(Error::validation("order", format!("unknown order {s:?}"))),
        }
    }
}

/// Translation status of an item in one language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemStatus {
    Untranslated,
    Translated,
    /// Had a translation that was invalidated by a source-text change.
    Stale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemListing {
    pub item: Item,
    pub status: ItemStatus,
    pub priority: f64,
}

struct ValidatedSegment<'a> {
    page: &'a PageRecord,
    segment: &'a SegmentRecord,
    category: Category,
}

fn validate_document(doc: &CatalogDocument) -> Result<Vec<ValidatedSegment<'_>>> {
    let mut seen_pages = BTreeSet::new();
    let mut seen_items = BTreeSet::new();
    let mut out = Vec::new();
    for (p, page) in doc.pages.iter().enumerate() {
        let at = format!("pages[{p}]");
        if page.page_id.as_str().trim().is_empty() {
            return Err(Error::validation(format!("{at}.page_id"), "must not be empty"));
        }
        if !seen_pages.insert(&page.page_id) {
            return Err(Error::validation(
                format!("{at}.page_id"),
                format!("duplicate page id {:?}", page.page_id.as_str()),
            ));
        }
        for (s, segment) in page.segments.iter().enumerate() {
            let at = format!("{at}.segments[{s}]");
            if segment.id.as_str().trim().is_empty() {
                return Err(Error::validation(format!("{at}.id"), "must not be empty"));
            }
            if !seen_items.insert(&segment.id) {
                return Err(Error::validation(
                    format!("{at}.id"),
                    format!("duplicate segment id {:?}", segment.id.as_str()),
                ));
            }
            if segment.text.trim().is_empty() {
                return Err(Error::validation(format!("{at}.text"), "must not be empty"));
            }
            let category = segment
                .category
                .parse::<Category>()
                .map_err(|_| {
                    Error::validation(
                        format!("{at}.category"),
                        format!("unknown category {:?}", segment.category),
                    )
                })?;
            out.push(ValidatedSegment {
                page,
                segment,
                category,
            });
        }
    }
    Ok(out)
}

/// Escapes item text for the highlighted snippet so that the only bracket
/// characters in the result are the highlight markers.
pub fn escape_snippet_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '[' => out.push_str("\\u005B"),
            ']' => out.push_str("\\u005D"),
            c => out.push(c),
        }
    }
    out
}

impl Center {
    /// Imports a catalog document atomically: either every segment is
    /// applied or nothing changes.
    pub fn import_catalog(&mut self, doc: &CatalogDocument) -> Result<ImportSummary> {
        let segments = validate_document(doc)?;
        let created_at = now();
        let source_lang = self.settings.source_lang.clone();
        let mut summary = ImportSummary::default();

        for page in &doc.pages {
            let ids: Vec<ItemId> = page.segments.iter().map(|s| s.id.clone()).collect();
            let entry = self
                .state
                .catalog
                .pages
                .entry(page.page_id.clone())
                .or_insert_with(|| SourcePage {
                    page_id: page.page_id.clone(),
                    url_or_path: String::new(),
                    title: String::new(),
                    segment_ids: Vec::new(),
                });
            entry.url_or_path = page.url.clone();
            entry.title = page.title.clone();
            entry.segment_ids = ids;
        }

        for ValidatedSegment {
            page,
            segment,
            category,
        } in segments
        {
            let catalog = &mut self.state.catalog;
            match catalog.items.get_mut(&segment.id) {
                None => {
                    catalog.items.insert(
                        segment.id.clone(),
                        Item {
                            id: segment.id.clone(),
                            source_text: segment.text.clone(),
                            source_lang: source_lang.clone(),
                            page_id: page.page_id.clone(),
                            category,
                            context_before: segment.context_before.clone(),
                            context_after: segment.context_after.clone(),
                            view_count: 0,
                            created_at,
                        },
                    );
                    summary.added += 1;
                }
                Some(item) => {
                    let old_page = std::mem::replace(&mut item.page_id, page.page_id.clone());
                    item.category = category;
                    item.context_before = segment.context_before.clone();
                    item.context_after = segment.context_after.clone();
                    let changed = item.source_text != segment.text;
                    if changed {
                        item.source_text = segment.text.clone();
                    }
                    if old_page != page.page_id {
                        if let Some(old) = catalog.pages.get_mut(&old_page) {
                            old.segment_ids.retain(|id| id != &segment.id);
                        }
                    }
                    if changed {
                        self.state.store.mark_stale(&segment.id);
                        summary.updated += 1;
                    } else {
                        summary.unchanged += 1;
                    }
                }
            }
        }
        Ok(summary)
    }

    /// Renders the stored catalog back into an exchange document.
    pub fn export_catalog(&self) -> CatalogDocument {
        let catalog = &self.state.catalog;
        CatalogDocument {
            pages: catalog
                .pages
                .values()
                .map(|page| PageRecord {
                    page_id: page.page_id.clone(),
                    url: page.url_or_path.clone(),
                    title: page.title.clone(),
                    segments: page
                        .segment_ids
                        .iter()
                        .filter_map(|id| catalog.items.get(id))
                        .map(|item| SegmentRecord {
                            id: item.id.clone(),
                            text: item.source_text.clone(),
                            category: item.category.as_str().to_owned(),
                            context_before: item.context_before.clone(),
                            context_after: item.context_after.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn item(&self, item_id: &str) -> Result<&Item> {
        self.state
            .catalog
            .items
            .get(item_id)
            .ok_or_else(|| Error::not_found("item", item_id))
    }

    pub fn page(&self, page_id: &str) -> Result<&SourcePage> {
        self.state
            .catalog
            .pages
            .get(page_id)
            .ok_or_else(|| Error::not_found("page", page_id))
    }

    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.state.catalog.items.values()
    }

    pub fn item_status(&self, item_id: &str, lang: &str) -> ItemStatus {
        match self.state.store.thread(item_id, lang) {
            None => ItemStatus::Untranslated,
            Some(thread) => match thread.versions.last().map(|t| t.status) {
                Some(TranslationStatus::Current) => ItemStatus::Translated,
                Some(TranslationStatus::Stale) => ItemStatus::Stale,
                _ => ItemStatus::Untranslated,
            },
        }
    }

    pub fn list_items(
        &self,
        lang: &str,
        filter: ListFilter,
        order: ListOrder,
    ) -> Result<Vec<ItemListing>> {
        self.require_lang(lang)?;
        let selected: Vec<&Item> = self
            .items()
            .filter(|item| {
                let translated = self.state.store.current(item.id.as_str(), lang).is_some();
                match filter {
                    ListFilter::All => true,
                    ListFilter::Translated => translated,
                    ListFilter::Untranslated => !translated,
                }
            })
            .collect();

        let entries: Vec<RankEntry> = selected
            .iter()
            .map(|item| RankEntry {
                id: item.id.clone(),
                inputs: self.priority_inputs(item, lang),
            })
            .collect();

        let ranked: Vec<(usize, f64)> = match order {
            ListOrder::Priority => workflow::rank(&entries, &self.settings.weights),
            ListOrder::Id => entries
                .iter()
                .enumerate()
                .map(|(i, e)| (i, workflow::score(&e.inputs, &self.settings.weights)))
                .collect(),
        };

        Ok(ranked
            .into_iter()
            .map(|(i, priority)| {
                let item = selected[i];
                ItemListing {
                    item: item.clone(),
                    status: self.item_status(item.id.as_str(), lang),
                    priority,
                }
            })
            .collect())
    }

    /// Increments the view counter and returns the new value.
    pub fn record_view(&mut self, item_id: &str) -> Result<u64> {
        let item = self
            .state
            .catalog
            .items
            .get_mut(item_id)
            .ok_or_else(|| Error::not_found("item", item_id))?;
        item.view_count += 1;
        Ok(item.view_count)
    }

    fn display_text<'a>(&'a self, item: &'a Item, lang: &str) -> &'a str {
        self.state
            .store
            .current(item.id.as_str(), lang)
            .map(|t| t.text.as_str())
            .unwrap_or(&item.source_text)
    }

    /// `context_before [[text]] context_after`, where text is the current
    /// translation in `lang` when there is one.
    pub fn context_snippet(&self, item_id: &str, lang: &str) -> Result<String> {
        let item = self.item(item_id)?;
        Ok(format!(
            "{}{HIGHLIGHT_OPEN}{}{HIGHLIGHT_CLOSE}{}",
            escape_snippet_text(&item.context_before),
            escape_snippet_text(self.display_text(item, lang)),
            escape_snippet_text(&item.context_after),
        ))
    }

    /// Page-level preview: one line per segment, each rendered in `lang` when
    /// translated, with `highlight` (if given) wrapped in markers.
    pub fn page_preview(&self, page_id: &str, lang: &str, highlight: Option<&str>) -> Result<String> {
        let page = self.page(page_id)?;
        if let Some(h) = highlight {
            if !page.segment_ids.iter().any(|id| id.as_str() == h) {
                return Err(Error::not_found("item on page", h));
            }
        }
        let lines: Vec<String> = page
            .segment_ids
            .iter()
            .filter_map(|id| self.state.catalog.items.get(id))
            .map(|item| {
                let text = escape_snippet_text(self.display_text(item, lang));
                if Some(item.id.as_str()) == highlight {
                    format!("{HIGHLIGHT_OPEN}{text}{HIGHLIGHT_CLOSE}")
                } else {
                    text
                }
            })
            .collect();
        Ok(lines.join("\n"))
    }
}

//! Versioned translations per (item, language), their public comment
//! threads, progress meters, and the translation exchange document.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::center::{now, Center};
use crate::community::{NewThread, PostTarget};
use crate::error::{require_text, Error, Result};
use crate::exchange::{TranslationDocument, TranslationEntry};
use crate::ids::{ItemId, Lang, MemberId, TranslationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TranslationStatus {
    Current,
    Superseded,
    Stale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub translation_id: TranslationId,
    pub item_id: ItemId,
    pub lang: Lang,
    pub text: String,
    pub author_id: MemberId,
    pub version: u32,
    pub status: TranslationStatus,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationComment {
    pub comment_id: String,
    pub item_id: ItemId,
    pub lang: Lang,
    pub author_id: MemberId,
    pub body: String,
    pub created_at: DateTime<Utc>,
    pub parent_id: Option<String>,
}

fn one() -> u32 {
    1
}

/// All versions and comments for one (item, language) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thread {
    /// Version number of `versions[0]`. Always 1 unless the thread was
    /// seeded from an exchange document carrying a later version.
    #[serde(default = "one")]
    pub first_version: u32,
    pub versions: Vec<Translation>,
    pub comments: Vec<TranslationComment>,
}

impl Default for Thread {
    fn default() -> Self {
        Thread {
            first_version: 1,
            versions: Vec::new(),
            comments: Vec::new(),
        }
    }
}

impl Thread {
    pub fn current(&self) -> Option<&Translation> {
        self.versions
            .last()
            .filter(|t| t.status == TranslationStatus::Current)
    }

    fn next_version(&self) -> u32 {
        self.versions
            .last()
            .map_or(self.first_version, |t| t.version + 1)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Store {
    pub threads: BTreeMap<ItemId, BTreeMap<Lang, Thread>>,
    #[serde(skip)]
    index: BTreeMap<TranslationId, (ItemId, Lang)>,
}

impl Store {
    pub(crate) fn reindex(&mut self) {
        self.index = self
            .threads
            .iter()
            .flat_map(|(item, langs)| {
                langs.iter().flat_map(move |(lang, thread)| {
                    thread
                        .versions
                        .iter()
                        .map(move |t| (t.translation_id.clone(), (item.clone(), lang.clone())))
                })
            })
            .collect();
    }

    pub fn thread(&self, item_id: &str, lang: &str) -> Option<&Thread> {
        self.threads.get(item_id).and_then(|l| l.get(lang))
    }

    fn thread_mut(&mut self, item_id: &ItemId, lang: &Lang) -> &mut Thread {
        self.threads
            .entry(item_id.clone())
            .or_default()
            .entry(lang.clone())
            .or_default()
    }

    pub fn current(&self, item_id: &str, lang: &str) -> Option<&Translation> {
        self.thread(item_id, lang).and_then(Thread::current)
    }

    pub fn translation(&self, id: &str) -> Option<&Translation> {
        let (item, lang) = self.index.get(id)?;
        self.thread(item.as_str(), lang.as_str())?
            .versions
            .iter()
            .find(|t| t.translation_id.as_str() == id)
    }

    /// Every translation (any version, any language) authored by `member`.
    pub fn authored_by<'a>(&'a self, member: &'a str) -> impl Iterator<Item = &'a Translation> + 'a {
        self.threads
            .values()
            .flat_map(|langs| langs.values())
            .flat_map(|thread| thread.versions.iter())
            .filter(move |t| t.author_id.as_str() == member)
    }

    /// Marks the current translation of `item_id` in every language stale.
    pub(crate) fn mark_stale(&mut self, item_id: &ItemId) {
        if let Some(langs) = self.threads.get_mut(item_id) {
            for thread in langs.values_mut() {
                if let Some(last) = thread.versions.last_mut() {
                    if last.status == TranslationStatus::Current {
                        last.status = TranslationStatus::Stale;
                    }
                }
            }
        }
    }

    fn push(&mut self, translation: Translation) {
        self.index.insert(
            translation.translation_id.clone(),
            (translation.item_id.clone(), translation.lang.clone()),
        );
        let thread = self.thread_mut(&translation.item_id, &translation.lang);
        if let Some(last) = thread.versions.last_mut() {
            if last.status == TranslationStatus::Current {
                last.status = TranslationStatus::Superseded;
            }
        }
        thread.versions.push(translation);
    }
}

/// Per-language progress meter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub lang: Lang,
    pub translated_count: usize,
    pub total_count: usize,
    /// Percentage with one decimal, rounded half up; e.g. `"33.3"`.
    pub percent: String,
}

/// `100 * translated / total` in tenths of a percent, rounded half up.
pub fn percent_tenths(translated: usize, total: usize) -> u64 {
    if total == 0 {
        return 0;
    }
    let (m, n) = (translated as u64, total as u64);
    (2000 * m + n) / (2 * n)
}

pub fn format_percent(tenths: u64) -> String {
    format!("{}.{}", tenths / 10, tenths % 10)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationImportSummary {
    pub applied: usize,
    pub unchanged: usize,
    pub skipped: usize,
}

const EPOCH: &str = "1970-01-01T00:00:00.000Z";

impl Center {
    /// Submits a new translation or an edit of the current one.
    ///
    /// An edit must name the version it was based on; if another edit got
    /// there first the call fails with [`Error::VersionConflict`].
    pub fn submit_translation(
        &mut self,
        item_id: &str,
        lang: &str,
        text: &str,
        author_id: &str,
        base_version: Option<u32>,
    ) -> Result<Translation> {
        self.item(item_id)?;
        self.require_lang(lang)?;
        self.require_member(author_id)?;
        require_text("text", text)?;

        let thread = self.state.store.thread(item_id, lang);
        if let Some(current) = thread.and_then(Thread::current) {
            if base_version != Some(current.version) {
                return Err(Error::VersionConflict {
                    current: current.version,
                });
            }
        }
        let version = thread.map_or(1, Thread::next_version);
        let translation = Translation {
            translation_id: TranslationId::new(self.next_id("t")),
            item_id: ItemId::from(item_id),
            lang: Lang::from(lang),
            text: text.to_owned(),
            author_id: MemberId::from(author_id),
            version,
            status: TranslationStatus::Current,
            created_at: now(),
        };
        self.state.store.push(translation.clone());
        Ok(translation)
    }

    pub fn current_translation(&self, item_id: &str, lang: &str) -> Result<Option<&Translation>> {
        self.item(item_id)?;
        Ok(self.state.store.current(item_id, lang))
    }

    /// All versions, oldest first.
    pub fn translation_history(&self, item_id: &str, lang: &str) -> Result<&[Translation]> {
        self.item(item_id)?;
        Ok(self
            .state
            .store
            .thread(item_id, lang)
            .map_or(&[], |t| t.versions.as_slice()))
    }

    pub fn translation(&self, translation_id: &str) -> Result<&Translation> {
        self.state
            .store
            .translation(translation_id)
            .ok_or_else(|| Error::not_found("translation", translation_id))
    }

    pub fn add_comment(
        &mut self,
        item_id: &str,
        lang: &str,
        author_id: &str,
        body: &str,
        parent_id: Option<&str>,
    ) -> Result<TranslationComment> {
        self.item(item_id)?;
        self.require_lang(lang)?;
        self.require_member(author_id)?;
        if let Some(parent) = parent_id {
            let in_thread = self
                .state
                .store
                .thread(item_id, lang)
                .is_some_and(|t| t.comments.iter().any(|c| c.comment_id == parent));
            if !in_thread {
                return Err(Error::not_found("comment", parent));
            }
        }
        require_text("body", body)?;

        if self.settings.mirror_comments {
            let target = match self.state.community.forums.item_thread(lang, item_id) {
                Some(thread_id) => PostTarget::Existing(thread_id.clone()),
                None => PostTarget::New(NewThread::language(lang, format!("Item {item_id}"))),
            };
            let post = self.forum_post(target, author_id, body)?;
            self.state
                .community
                .forums
                .link_item_thread(lang, item_id, &post.thread_id);
        }

        let comment = TranslationComment {
            comment_id: self.next_id("c"),
            item_id: ItemId::from(item_id),
            lang: Lang::from(lang),
            author_id: MemberId::from(author_id),
            body: body.to_owned(),
            created_at: now(),
            parent_id: parent_id.map(str::to_owned),
        };
        self.state
            .store
            .thread_mut(&comment.item_id, &comment.lang)
            .comments
            .push(comment.clone());
        Ok(comment)
    }

    pub fn comments(&self, item_id: &str, lang: &str) -> Result<&[TranslationComment]> {
        self.item(item_id)?;
        Ok(self
            .state
            .store
            .thread(item_id, lang)
            .map_or(&[], |t| t.comments.as_slice()))
    }

    pub fn progress(&self, lang: &str) -> Progress {
        let (translated, total) = if self.settings.languages.contains_key(lang) {
            let items = &self.state.catalog.items;
            let translated = items
                .keys()
                .filter(|id| self.state.store.current(id.as_str(), lang).is_some())
                .count();
            (translated, items.len())
        } else {
            (0, 0)
        };
        Progress {
            lang: Lang::from(lang),
            translated_count: translated,
            total_count: total,
            percent: format_percent(percent_tenths(translated, total)),
        }
    }

    /// Exports the current translation of every item in `lang`.
    ///
    /// `generated_at` is the creation time of the newest current translation
    /// (the epoch when there is none), so the document depends only on state.
    pub fn export_translations(&self, lang: &str) -> Result<TranslationDocument> {
        self.require_lang(lang)?;
        let mut newest: Option<DateTime<Utc>> = None;
        let items = self
            .items()
            .map(|item| {
                let current = self.state.store.current(item.id.as_str(), lang);
                if let Some(t) = current {
                    newest = newest.max(Some(t.created_at));
                }
                TranslationEntry {
                    id: item.id.clone(),
                    text: current.map(|t| t.text.clone()),
                    version: current.map(|t| t.version),
                }
            })
            .collect();
        Ok(TranslationDocument {
            lang: Lang::from(lang),
            generated_at: newest.map_or_else(
                || EPOCH.to_owned(),
                |t| t.to_rfc3339_opts(SecondsFormat::Millis, true),
            ),
            items,
        })
    }

    /// Applies a translation document atomically.
    ///
    /// Entries whose text matches the current translation are left alone.
    /// An entry for a pair with no history seeds the thread at the document's
    /// version so that a re-export reproduces the document; otherwise the text
    /// becomes a new version. Null entries are skipped.
    pub fn import_translations(
        &mut self,
        doc: &TranslationDocument,
        author_id: &str,
    ) -> Result<TranslationImportSummary> {
        let lang = doc.lang.as_str();
        self.require_lang(lang)?;
        self.require_member(author_id)?;
        let created_at = DateTime::parse_from_rfc3339(&doc.generated_at)
            .map_err(|e| Error::validation("generated_at", e.to_string()))?
            .with_timezone(&Utc);

        let mut seen = BTreeSet::new();
        for (i, entry) in doc.items.iter().enumerate() {
            let at = format!("items[{i}]");
            if !seen.insert(&entry.id) {
                return Err(Error::validation(format!("{at}.id"), "duplicate item id"));
            }
            if !self.state.catalog.items.contains_key(&entry.id) {
                return Err(Error::not_found("item", entry.id.as_str()));
            }
            if let Some(text) = &entry.text {
                require_text(&format!("{at}.text"), text)?;
            }
            if entry.version == Some(0) {
                return Err(Error::validation(format!("{at}.version"), "versions start at 1"));
            }
        }

        let mut summary = TranslationImportSummary::default();
        for entry in &doc.items {
            let Some(text) = &entry.text else {
                summary.skipped += 1;
                continue;
            };
            let thread = self.state.store.thread(entry.id.as_str(), lang);
            if thread.and_then(Thread::current).is_some_and(|t| &t.text == text) {
                summary.unchanged += 1;
                continue;
            }
            let version = match thread {
                Some(t) if !t.versions.is_empty() => t.next_version(),
                _ => {
                    let seeded = entry.version.unwrap_or(1);
                    self.state.store.thread_mut(&entry.id, &doc.lang).first_version = seeded;
                    seeded
                }
            };
            let translation = Translation {
                translation_id: TranslationId::new(self.next_id("t")),
                item_id: entry.id.clone(),
                lang: doc.lang.clone(),
                text: text.clone(),
                author_id: MemberId::from(author_id),
                version,
                status: TranslationStatus::Current,
                created_at,
            };
            self.state.store.push(translation);
            summary.applied += 1;
        }
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::Settings;
    use crate::exchange::CatalogDocument;

    fn center(items: &[&str]) -> Center {
        let mut c = Center::new(Settings::with_codes(&["es", "fr"]));
        let segments: Vec<String> = items
            .iter()
            .map(|id| {
                format!(
                    r#"{{"id":"{id}","text":"Text {id}","category":"other","context_before":"","context_after":""}}"#
                )
            })
            .collect();
        let doc = format!(
            r#"{{"pages":[{{"page_id":"p","url":"/","title":"t","segments":[{}]}}]}}"#,
            segments.join(",")
        );
        c.import_catalog(&CatalogDocument::parse(&doc).unwrap()).unwrap();
        c.register_member("olga", &[], "h").unwrap();
        c.register_member("ivan", &[], "h").unwrap();
        c
    }

    fn olga(c: &Center) -> String {
        c.member_by_name("olga").unwrap().member_id.to_string()
    }

    #[test]
    fn first_submission_is_version_one() {
        let mut c = center(&["home.welcome"]);
        let author = olga(&c);
        let t = c.submit_translation("home.welcome", "es", "Bienvenido", &author, None).unwrap();
        assert_eq!(t.version, 1);
        assert_eq!(t.status, TranslationStatus::Current);
    }

    #[test]
    fn edit_supersedes_previous_version() {
        let mut c = center(&["a"]);
        let author = olga(&c);
        c.submit_translation("a", "es", "uno", &author, None).unwrap();
        let t = c.submit_translation("a", "es", "dos", &author, Some(1)).unwrap();
        assert_eq!(t.version, 2);
        let history = c.translation_history("a", "es").unwrap();
        assert_eq!(history[0].status, TranslationStatus::Superseded);
        assert_eq!(c.current_translation("a", "es").unwrap().unwrap().text, "dos");
    }

    #[test]
    fn stale_base_version_conflicts() {
        let mut c = center(&["a"]);
        let author = olga(&c);
        c.submit_translation("a", "es", "uno", &author, None).unwrap();
        c.submit_translation("a", "es", "dos", &author, Some(1)).unwrap();
        let err = c.submit_translation("a", "es", "tres", &author, Some(1)).unwrap_err();
        assert!(matches!(err, Error::VersionConflict { current: 2 }));
        let err = c.submit_translation("a", "es", "tres", &author, None).unwrap_err();
        assert!(matches!(err, Error::VersionConflict { current: 2 }));
    }

    #[test]
    fn submit_validation_and_lookup_errors() {
        let mut c = center(&["a"]);
        let author = olga(&c);
        assert!(matches!(c.submit_translation("a", "es", " ", &author, None), Err(Error::Validation { .. })));
        assert!(matches!(c.submit_translation("zz", "es", "x", &author, None), Err(Error::NotFound { kind: "item", .. })));
        assert!(matches!(c.submit_translation("a", "xx", "x", &author, None), Err(Error::NotFound { kind: "language", .. })));
        assert!(matches!(c.submit_translation("a", "es", "x", "m999", None), Err(Error::NotFound { kind: "member", .. })));
    }

    #[test]
    fn current_translation_lifecycle() {
        let mut c = center(&["a"]);
        let author = olga(&c);
        assert!(c.current_translation("a", "es").unwrap().is_none());
        c.submit_translation("a", "es", "uno", &author, None).unwrap();
        assert_eq!(c.current_translation("a", "es").unwrap().unwrap().version, 1);
        assert!(c.current_translation("missing", "es").is_err());
    }

    #[test]
    fn stale_after_source_change_then_resubmit_continues_versions() {
        let mut c = center(&["a"]);
        let author = olga(&c);
        c.submit_translation("a", "es", "uno", &author, None).unwrap();
        let doc = CatalogDocument::parse(
            r#"{"pages":[{"page_id":"p","url":"/","title":"t","segments":[{"id":"a","text":"Changed","category":"other","context_before":"","context_after":""}]}]}"#,
        )
        .unwrap();
        c.import_catalog(&doc).unwrap();
        assert!(c.current_translation("a", "es").unwrap().is_none());
        assert_eq!(c.translation_history("a", "es").unwrap()[0].status, TranslationStatus::Stale);
        let t = c.submit_translation("a", "es", "cambiado", &author, None).unwrap();
        assert_eq!(t.version, 2);
        assert!(c.check_invariants().is_empty());
    }

    #[test]
    fn comment_threads() {
        let mut c = center(&["a", "b"]);
        let author = olga(&c);
        let first = c.add_comment("a", "es", &author, "why?", None).unwrap();
        let reply = c.add_comment("a", "es", &author, "because", Some(&first.comment_id)).unwrap();
        assert_eq!(reply.parent_id.as_deref(), Some(first.comment_id.as_str()));
        assert_eq!(c.comments("a", "es").unwrap().len(), 2);

        let err = c.add_comment("b", "es", &author, "x", Some(&first.comment_id)).unwrap_err();
        assert!(matches!(err, Error::NotFound { kind: "comment", .. }));
        assert!(matches!(c.add_comment("a", "es", &author, "", None), Err(Error::Validation { .. })));
    }

    #[test]
    fn comments_mirror_to_one_language_forum_thread() {
        let mut c = center(&["a"]);
        let author = olga(&c);
        c.add_comment("a", "es", &author, "one", None).unwrap();
        c.add_comment("a", "es", &author, "two", None).unwrap();
        let threads = c.forum_threads();
        assert_eq!(threads.len(), 1);
        assert_eq!(threads[0].lang.as_ref().map(Lang::as_str), Some("es"));
        let thread_id = threads[0].thread_id.clone();
        let bodies: Vec<_> = c.forum_posts(&thread_id).unwrap().iter().map(|p| p.body.clone()).collect();
        assert_eq!(bodies, ["one", "two"]);

        c.settings_mut().mirror_comments = false;
        c.add_comment("a", "es", &author, "three", None).unwrap();
        assert_eq!(c.forum_posts(&thread_id).unwrap().len(), 2);
    }

    #[test]
    fn comments_survive_edits() {
        let mut c = center(&["a"]);
        let author = olga(&c);
        c.submit_translation("a", "es", "uno", &author, None).unwrap();
        c.add_comment("a", "es", &author, "hmm", None).unwrap();
        c.submit_translation("a", "es", "dos", &author, Some(1)).unwrap();
        assert_eq!(c.comments("a", "es").unwrap().len(), 1);
    }

    #[test]
    fn progress_meter_rounding() {
        assert_eq!(format_percent(percent_tenths(0, 10)), "0.0");
        assert_eq!(format_percent(percent_tenths(3, 4)), "75.0");
        assert_eq!(format_percent(percent_tenths(1, 3)), "33.3");
        assert_eq!(format_percent(percent_tenths(2, 3)), "66.7");
        assert_eq!(format_percent(percent_tenths(1, 16)), "6.3");
        assert_eq!(format_percent(percent_tenths(0, 0)), "0.0");
        assert_eq!(format_percent(percent_tenths(5, 5)), "100.0");
    }

    #[test]
    fn progress_counts_current_translations() {
        let mut c = center(&["a", "b", "c", "d"]);
        let author = olga(&c);
        for id in ["a", "b", "c"] {
            c.submit_translation(id, "es", "x", &author, None).unwrap();
        }
        let p = c.progress("es");
        assert_eq!((p.translated_count, p.total_count, p.percent.as_str()), (3, 4, "75.0"));
        assert_eq!(c.progress("xx").percent, "0.0");
        assert_eq!(c.progress("xx").total_count, 0);
    }

    #[test]
    fn export_lists_untranslated_as_null() {
        let mut c = center(&["b", "a"]);
        let author = olga(&c);
        c.submit_translation("b", "es", "bee", &author, None).unwrap();
        let doc = c.export_translations("es").unwrap();
        let ids: Vec<_> = doc.items.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(doc.items[0].text, None);
        assert_eq!(doc.items[1].text.as_deref(), Some("bee"));
        assert_eq!(doc.items[1].version, Some(1));
        assert!(c.export_translations("xx").is_err());
    }

    #[test]
    fn empty_catalog_export() {
        let c = Center::new(Settings::with_codes(&["es"]));
        let doc = c.export_translations("es").unwrap();
        assert!(doc.items.is_empty());
        assert_eq!(doc.generated_at, EPOCH);
    }

    #[test]
    fn import_seeds_versions_and_round_trips() {
        let mut a = center(&["a", "b", "c"]);
        let author = olga(&a);
        a.submit_translation("a", "es", "uno", &author, None).unwrap();
        a.submit_translation("a", "es", "uno bis", &author, Some(1)).unwrap();
        a.submit_translation("b", "es", "dos", &author, None).unwrap();
        let exported = a.export_translations("es").unwrap().to_json();

        let mut b = center(&["a", "b", "c"]);
        let doc = TranslationDocument::parse(&exported).unwrap();
        let s = b.import_translations(&doc, SYSTEM).unwrap();
        assert_eq!((s.applied, s.skipped), (2, 1));
        assert_eq!(b.export_translations("es").unwrap().to_json(), exported);
        assert!(b.check_invariants().is_empty());

        let again = b.import_translations(&doc, SYSTEM).unwrap();
        assert_eq!(again.unchanged, 2);
    }

    #[test]
    fn import_rejects_unknown_items_atomically() {
        let mut c = center(&["a"]);
        let doc = TranslationDocument {
            lang: "es".into(),
            generated_at: EPOCH.into(),
            items: vec![
                TranslationEntry { id: "a".into(), text: Some("x".into()), version: Some(1) },
                TranslationEntry { id: "zz".into(), text: Some("y".into()), version: Some(1) },
            ],
        };
        assert!(c.import_translations(&doc, SYSTEM).is_err());
        assert!(c.current_translation("a", "es").unwrap().is_none());
    }

    const SYSTEM: &str = crate::center::SYSTEM_MEMBER;
}

//! Priority scoring, random item selection, translation requests, and
//! personal binders.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Item;
use crate::center::{now, Center};
use crate::error::{Error, Result};
use crate::ids::{ItemId, Lang, MemberId, PageId};
use crate::store::TranslationStatus;

/// Weights of the four priority factors. Defaults: views 1, requests 2,
/// quality 1, untranslated bonus 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorityWeights {
    pub views: f64,
    pub requests: f64,
    pub quality: f64,
    pub untranslated: f64,
}

impl Default for PriorityWeights {
    fn default() -> Self {
        PriorityWeights {
            views: 1.0,
            requests: 2.0,
            quality: 1.0,
            untranslated: 3.0,
        }
    }
}

impl PriorityWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("views", self.views),
            ("requests", self.requests),
            ("quality", self.quality),
            ("untranslated", self.untranslated),
        ] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::validation(
                    format!("weights.{name}"),
                    format!("must be a finite non-negative number, got {w}"),
                ));
            }
        }
        Ok(())
    }
}

/// Raw signals feeding the priority of one (item, language).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorityInputs {
    pub view_count: u64,
    pub request_count: u32,
    /// Quality in `[0, 1]` of the current translation; `None` when the item
    /// has no current translation.
    pub quality: Option<f64>,
}

/// `w_views*log2(1+views) + w_requests*requests + (w_untranslated | w_quality*(1-quality))`
pub fn score(inputs: &PriorityInputs, w: &PriorityWeights) -> f64 {
    let views = w.views * (1.0 + inputs.view_count as f64).log2();
    let requests = w.requests * f64::from(inputs.request_count);
    let status = match inputs.quality {
        None => w.untranslated,
        Some(q) => w.quality * (1.0 - q),
    };
    views + requests + status
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub id: ItemId,
    pub inputs: PriorityInputs,
}

/// Descending score, ties broken by ascending id.
fn by_rank(entries: &[RankEntry]) -> impl Fn(&(usize, f64), &(usize, f64)) -> Ordering + Sync + '_ {
    move |a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| entries[a.0].id.cmp(&entries[b.0].id))
    }
}

/// Scores every entry and returns `(index, score)` pairs in queue order.
pub fn rank_sequential(entries: &[RankEntry], w: &PriorityWeights) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (i, score(&e.inputs, w)))
        .collect();
    scored.sort_by(by_rank(entries));
    scored
}

#[cfg(feature = "parallel")]
pub fn rank_parallel(entries: &[RankEntry], w: &PriorityWeights) -> Vec<(usize, f64)> {
    use rayon::prelude::*;

    let mut scored: Vec<(usize, f64)> = entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| (i, score(&e.inputs, w)))
        .collect();
    scored.par_sort_by(by_rank(entries));
    scored
}

/// Ranks with rayon when the `parallel` feature is on.
pub fn rank(entries: &[RankEntry], w: &PriorityWeights) -> Vec<(usize, f64)> {
    #[cfg(feature = "parallel")]
    {
        rank_parallel(entries, w)
    }
    #[cfg(not(feature = "parallel"))]
    {
        rank_sequential(entries, w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestTarget {
    Item(ItemId),
    Page(PageId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationRequest {
    pub request_id: String,
    pub target: RequestTarget,
    pub lang: Lang,
    pub requester: MemberId,
    pub created_at: DateTime<Utc>,
    /// Items the request was fanned out to when it was made.
    pub items: Vec<ItemId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Watch {
    pub item_id: ItemId,
    pub lang: Lang,
    /// Current version when the watch was created; a notification is due
    /// once a newer current version exists.
    pub baseline: Option<u32>,
    pub notified: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Workflow {
    pub requests: Vec<TranslationRequest>,
    pub request_counts: BTreeMap<ItemId, BTreeMap<Lang, u32>>,
    pub watches: BTreeMap<MemberId, Vec<Watch>>,
}

impl Workflow {
    pub fn request_count(&self, item_id: &str, lang: &str) -> u32 {
        self.request_counts
            .get(item_id)
            .and_then(|l| l.get(lang))
            .copied()
            .unwrap_or(0)
    }

    /// Request counts recomputed from the recorded requests.
    pub fn recount_requests(&self) -> BTreeMap<ItemId, BTreeMap<Lang, u32>> {
        let mut counts: BTreeMap<ItemId, BTreeMap<Lang, u32>> = BTreeMap::new();
        for request in &self.requests {
            for item in &request.items {
                *counts
                    .entry(item.clone())
                    .or_default()
                    .entry(request.lang.clone())
                    .or_default() += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestOutcome {
    pub request_id: String,
    /// False when the same member had already made this request.
    pub created: bool,
    pub counts: Vec<(ItemId, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthoredEntry {
    pub item_id: ItemId,
    pub lang: Lang,
    pub version: u32,
    pub status: TranslationStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notification {
    pub item_id: ItemId,
    pub lang: Lang,
    pub version: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binder {
    pub member_id: MemberId,
    pub translated_items: Vec<AuthoredEntry>,
    pub watches: Vec<Watch>,
    pub notifications: Vec<Notification>,
}

impl Center {
    pub(crate) fn priority_inputs(&self, item: &Item, lang: &str) -> PriorityInputs {
        let id = item.id.as_str();
        PriorityInputs {
            view_count: item.view_count,
            request_count: self.state.workflow.request_count(id, lang),
            quality: self
                .state
                .store
                .current(id, lang)
                .map(|_| self.quality(id, lang)),
        }
    }

    pub fn compute_priority(&self, item_id: &str, lang: &str, weights: &PriorityWeights) -> Result<f64> {
        let item = self.item(item_id)?;
        self.require_lang(lang)?;
        Ok(score(&self.priority_inputs(item, lang), weights))
    }

    pub fn request_count(&self, item_id: &str, lang: &str) -> u32 {
        self.state.workflow.request_count(item_id, lang)
    }

    /// Draws uniformly among items lacking a current translation in `lang`,
    /// or among all items when everything is translated.
    pub fn next_random_item(&self, lang: &str, seed: u64) -> Result<&Item> {
        self.require_lang(lang)?;
        let items = &self.state.catalog.items;
        if items.is_empty() {
            return Err(Error::not_found("item", "catalog is empty"));
        }
        let untranslated: Vec<&Item> = items
            .values()
            .filter(|i| self.state.store.current(i.id.as_str(), lang).is_none())
            .collect();
        let pool: Vec<&Item> = if untranslated.is_empty() {
            items.values().collect()
        } else {
            untranslated
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(pool[rng.random_range(0..pool.len())])
    }

    /// Records a request for an item or every item on a page. Repeating the
    /// same request is a no-op.
    pub fn request_translation(
        &mut self,
        target: RequestTarget,
        lang: &str,
        requester: &str,
    ) -> Result<RequestOutcome> {
        self.require_lang(lang)?;
        self.require_member(requester)?;
        let items: Vec<ItemId> = match &target {
            RequestTarget::Item(id) => vec![self.item(id.as_str())?.id.clone()],
            RequestTarget::Page(id) => self.page(id.as_str())?.segment_ids.clone(),
        };

        let workflow = &self.state.workflow;
        let existing = workflow.requests.iter().find(|r| {
            r.target == target && r.lang.as_str() == lang && r.requester.as_str() == requester
        });
        if let Some(request) = existing {
            return Ok(RequestOutcome {
                request_id: request.request_id.clone(),
                created: false,
                counts: request
                    .items
                    .iter()
                    .map(|id| (id.clone(), workflow.request_count(id.as_str(), lang)))
                    .collect(),
            });
        }

        let baselines: Vec<Option<u32>> = items
            .iter()
            .map(|id| self.state.store.current(id.as_str(), lang).map(|t| t.version))
            .collect();
        let request = TranslationRequest {
            request_id: self.next_id("r"),
            target,
            lang: Lang::from(lang),
            requester: MemberId::from(requester),
            created_at: now(),
            items: items.clone(),
        };
        let request_id = request.request_id.clone();

        let workflow = &mut self.state.workflow;
        let watches = workflow.watches.entry(MemberId::from(requester)).or_default();
        let mut counts = Vec::with_capacity(items.len());
        for (id, baseline) in items.iter().zip(baselines) {
            let count = workflow
                .request_counts
                .entry(id.clone())
                .or_default()
                .entry(Lang::from(lang))
                .or_default();
            *count += 1;
            counts.push((id.clone(), *count));
            if !watches.iter().any(|w| &w.item_id == id && w.lang.as_str() == lang) {
                watches.push(Watch {
                    item_id: id.clone(),
                    lang: Lang::from(lang),
                    baseline,
                    notified: false,
                });
            }
        }
        workflow.requests.push(request);
        Ok(RequestOutcome {
            request_id,
            created: true,
            counts,
        })
    }

    /// Returns the member's binder. Pending notifications are acknowledged
    /// by this call and will not be returned again.
    pub fn binder_of(&mut self, member_id: &str) -> Result<Binder> {
        self.binder_impl(member_id, true)
    }

    /// Binder without acknowledging notifications.
    pub fn peek_binder(&mut self, member_id: &str) -> Result<Binder> {
        self.binder_impl(member_id, false)
    }

    fn binder_impl(&mut self, member_id: &str, acknowledge: bool) -> Result<Binder> {
        self.require_member(member_id)?;
        let store = &self.state.store;
        let mut translated_items: Vec<AuthoredEntry> = store
            .authored_by(member_id)
            .map(|t| AuthoredEntry {
                item_id: t.item_id.clone(),
                lang: t.lang.clone(),
                version: t.version,
                status: t.status,
            })
            .collect();
        translated_items.sort_by(|a, b| {
            (&a.item_id, &a.lang, a.version).cmp(&(&b.item_id, &b.lang, b.version))
        });

        let mut notifications = Vec::new();
        let watches = self
            .state
            .workflow
            .watches
            .get_mut(member_id)
            .map(std::mem::take)
            .unwrap_or_default();
        let mut updated = watches;
        for watch in &mut updated {
            if watch.notified {
                continue;
            }
            let Some(current) = store.current(watch.item_id.as_str(), watch.lang.as_str()) else {
                continue;
            };
            if watch.baseline.is_some_and(|b| current.version <= b) {
                continue;
            }
            notifications.push(Notification {
                item_id: watch.item_id.clone(),
                lang: watch.lang.clone(),
                version: current.version,
                text: current.text.clone(),
            });
            if acknowledge {
                watch.notified = true;
            }
        }
        if !updated.is_empty() {
            self.state
                .workflow
                .watches
                .insert(MemberId::from(member_id), updated.clone());
        }
        Ok(Binder {
            member_id: MemberId::from(member_id),
            translated_items,
            watches: updated,
            notifications,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::Settings;
    use crate::exchange::CatalogDocument;
    use crate::review::RubricScores;

    fn center(ids: &[&str]) -> Center {
        let mut c = Center::new(Settings::with_codes(&["es"]));
        let segments: Vec<String> = ids
            .iter()
            .map(|id| {
                format!(
                    r#"{{"id":"{id}","text":"T {id}","category":"button","context_before":"","context_after":""}}"#
                )
            })
            .collect();
        let doc = format!(
            r#"{{"pages":[{{"page_id":"p","url":"/","title":"t","segments":[{}]}}]}}"#,
            segments.join(",")
        );
        c.import_catalog(&CatalogDocument::parse(&doc).unwrap()).unwrap();
        c
    }

    fn member(c: &mut Center, name: &str) -> String {
        c.register_member(name, &[], "h").unwrap().member_id.to_string()
    }

    #[test]
    fn score_untranslated_hand_values() {
        let w = PriorityWeights::default();
        let s = score(&PriorityInputs { view_count: 7, request_count: 1, quality: None }, &w);
        assert_eq!(s, 8.0);
        let s = score(&PriorityInputs { view_count: 0, request_count: 0, quality: None }, &w);
        assert_eq!(s, 3.0);
    }

    #[test]
    fn score_translated_hand_value() {
        let w = PriorityWeights::default();
        let s = score(&PriorityInputs { view_count: 3, request_count: 0, quality: Some(0.75) }, &w);
        assert_eq!(s, 2.25);
        let s = score(&PriorityInputs { view_count: 0, request_count: 0, quality: Some(1.0) }, &w);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn compute_priority_through_center() {
        let mut c = center(&["a", "b"]);
        let m = member(&mut c, "olga");
        let r = member(&mut c, "ivan");
        for _ in 0..7 {
            c.record_view("a").unwrap();
        }
        c.request_translation(RequestTarget::Item("a".into()), "es", &m).unwrap();
        let w = PriorityWeights::default();
        assert_eq!(c.compute_priority("a", "es", &w).unwrap(), 8.0);

        for _ in 0..3 {
            c.record_view("b").unwrap();
        }
        let t = c.submit_translation("b", "es", "x", &m, None).unwrap();
        c.submit_review(t.translation_id.as_str(), &r, RubricScores::new(3, 3, 1, 1, 1, 1, 3).unwrap(), None).unwrap();
        let q = c.quality("b", "es");
        assert_eq!(q, 1.0);
        assert_eq!(c.compute_priority("b", "es", &w).unwrap(), 2.0);
        assert!(c.compute_priority("zz", "es", &w).is_err());
        assert!(c.compute_priority("a", "xx", &w).is_err());
    }

    #[test]
    fn weights_validation() {
        assert!(PriorityWeights::default().validate().is_ok());
        let bad = PriorityWeights { views: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let nan = PriorityWeights { quality: f64::NAN, ..Default::default() };
        assert!(nan.validate().is_err());
    }

    #[test]
    fn random_item_singleton_and_empty() {
        let mut c = center(&["a", "b"]);
        let m = member(&mut c, "olga");
        c.submit_translation("a", "es", "x", &m, None).unwrap();
        for seed in 0..20 {
            assert_eq!(c.next_random_item("es", seed).unwrap().id.as_str(), "b");
        }
        c.submit_translation("b", "es", "y", &m, None).unwrap();
        assert!(c.next_random_item("es", 1).is_ok());

        let empty = Center::new(Settings::with_codes(&["es"]));
        assert!(matches!(empty.next_random_item("es", 0), Err(Error::NotFound { .. })));
    }

    #[test]
    fn random_item_is_deterministic_per_seed() {
        let c = center(&["a", "b", "c", "d"]);
        for seed in 0..10 {
            assert_eq!(c.next_random_item("es", seed).unwrap().id, c.next_random_item("es", seed).unwrap().id);
        }
    }

    #[test]
    fn item_requests_are_idempotent() {
        let mut c = center(&["a"]);
        let m = member(&mut c, "olga");
        let first = c.request_translation(RequestTarget::Item("a".into()), "es", &m).unwrap();
        assert!(first.created);
        assert_eq!(first.counts, vec![(ItemId::from("a"), 1)]);
        for _ in 0..3 {
            let again = c.request_translation(RequestTarget::Item("a".into()), "es", &m).unwrap();
            assert!(!again.created);
        }
        assert_eq!(c.request_count("a", "es"), 1);
        assert_eq!(c.peek_binder(&m).unwrap().watches.len(), 1);
    }

    #[test]
    fn page_request_fans_out() {
        let mut c = center(&["a", "b", "c"]);
        let m = member(&mut c, "olga");
        let out = c.request_translation(RequestTarget::Page("p".into()), "es", &m).unwrap();
        assert_eq!(out.counts.len(), 3);
        for id in ["a", "b", "c"] {
            assert_eq!(c.request_count(id, "es"), 1);
        }
        assert_eq!(c.peek_binder(&m).unwrap().watches.len(), 3);
        assert!(c.request_translation(RequestTarget::Page("nope".into()), "es", &m).is_err());
        assert!(c.check_invariants().is_empty());
    }

    #[test]
    fn binder_notifications_flip_once() {
        let mut c = center(&["a", "b"]);
        let watcher = member(&mut c, "olga");
        let author = member(&mut c, "ivan");
        assert!(c.binder_of(&watcher).unwrap().translated_items.is_empty());

        c.request_translation(RequestTarget::Item("a".into()), "es", &watcher).unwrap();
        assert!(c.binder_of(&watcher).unwrap().notifications.is_empty());
        c.submit_translation("a", "es", "uno", &author, None).unwrap();
        c.submit_translation("b", "es", "dos", &author, None).unwrap();
        assert_eq!(c.binder_of(&watcher).unwrap().notifications.len(), 1);
        assert_eq!(c.binder_of(&watcher).unwrap().notifications.len(), 0);
        c.submit_translation("a", "es", "uno bis", &author, Some(1)).unwrap();
        assert_eq!(c.binder_of(&watcher).unwrap().notifications.len(), 0);

        assert_eq!(c.binder_of(&author).unwrap().translated_items.len(), 3);
        assert!(c.binder_of("m404").is_err());
    }

    #[test]
    fn watch_on_translated_item_waits_for_a_newer_version() {
        let mut c = center(&["a"]);
        let watcher = member(&mut c, "olga");
        let author = member(&mut c, "ivan");
        c.submit_translation("a", "es", "uno", &author, None).unwrap();
        c.request_translation(RequestTarget::Item("a".into()), "es", &watcher).unwrap();
        assert!(c.binder_of(&watcher).unwrap().notifications.is_empty());
        c.submit_translation("a", "es", "mejor", &author, Some(1)).unwrap();
        let n = c.binder_of(&watcher).unwrap().notifications;
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].version, 2);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_rank_agree() {
        let entries: Vec<RankEntry> = (0..500u64)
            .map(|i| RankEntry {
                id: ItemId::new(format!("item{i:03}")),
                inputs: PriorityInputs {
                    view_count: (i * 7919) % 13,
                    request_count: (i % 3) as u32,
                    quality: (i % 2 == 0).then_some(((i % 5) as f64) / 4.0),
                },
            })
            .collect();
        let w = PriorityWeights::default();
        assert_eq!(rank_sequential(&entries, &w), rank_parallel(&entries, &w));
    }
}

use std::collections::BTreeMap;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::community::Community;
use crate::error::{Error, Result};
use crate::ids::Lang;
use crate::review::Reviews;
use crate::store::{Store, TranslationStatus};
use crate::workflow::{PriorityWeights, Workflow};

/// Author recorded on translations created by offline administration
/// (CLI imports). Never listed in the directory.
pub const SYSTEM_MEMBER: &str = "system";

/// A registered target language and its special-character palette.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Language {
    pub code: Lang,
    pub name: String,
    #[serde(default)]
    pub palette: Vec<String>,
}

/// Runtime configuration the domain operations consult. Not persisted.
#[derive(Debug, Clone)]
pub struct Settings {
    pub languages: BTreeMap<Lang, Language>,
    pub source_lang: Lang,
    pub weights: PriorityWeights,
    pub mirror_comments: bool,
}

impl Settings {
    pub fn new(languages: impl IntoIterator<Item = Language>) -> Self {
        Settings {
            languages: languages
                .into_iter()
                .map(|l| (l.code.clone(), l))
                .collect(),
            source_lang: Lang::from("en"),
            weights: PriorityWeights::default(),
            mirror_comments: true,
        }
    }

    /// Settings with bare language codes and default everything else.
    pub fn with_codes(codes: &[&str]) -> Self {
        Settings::new(codes.iter().map(|c| Language {
            code: Lang::from(*c),
            name: c.to_string(),
            palette: Vec::new(),
        }))
    }
}

/// Everything that is persisted in a snapshot.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct State {
    #[serde(default)]
    pub catalog: Catalog,
    #[serde(default)]
    pub store: Store,
    #[serde(default)]
    pub workflow: Workflow,
    #[serde(default)]
    pub reviews: Reviews,
    #[serde(default)]
    pub community: Community,
    #[serde(default)]
    next_id: u64,
}

/// The translation center aggregate.
#[derive(Debug, Clone)]
pub struct Center {
    pub(crate) settings: Settings,
    pub(crate) state: State,
}

impl Center {
    pub fn new(settings: Settings) -> Self {
        Center::from_state(settings, State::default())
    }

    pub fn from_state(settings: Settings, mut state: State) -> Self {
        state.store.reindex();
        Center { settings, state }
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn settings_mut(&mut self) -> &mut Settings {
        &mut self.settings
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn languages(&self) -> impl Iterator<Item = &Language> {
        self.settings.languages.values()
    }

    pub fn require_lang(&self, lang: &str) -> Result<()> {
        if self.settings.languages.contains_key(lang) {
            Ok(())
        } else {
            Err(Error::not_found("language", lang))
        }
    }

    pub(crate) fn require_member(&self, member: &str) -> Result<()> {
        if member == SYSTEM_MEMBER || self.state.community.members.contains_key(member) {
            Ok(())
        } else {
            Err(Error::not_found("member", member))
        }
    }

    pub(crate) fn next_id(&mut self, prefix: &str) -> String {
        self.state.next_id += 1;
        format!("{prefix}{}", self.state.next_id)
    }

    /// Lists every violated structural invariant. Empty means consistent.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let st = &self.state;

        for page in st.catalog.pages.values() {
            for id in &page.segment_ids {
                match st.catalog.items.get(id) {
                    None => problems.push(format!("page {} lists unknown item {id}", page.page_id)),
                    Some(item) if item.page_id != page.page_id => problems.push(format!(
                        "item {id} listed on page {} but belongs to {}",
                        page.page_id, item.page_id
                    )),
                    Some(_) => {}
                }
            }
        }
        for item in st.catalog.items.values() {
            if item.source_text.trim().is_empty() {
                problems.push(format!("item {} has empty source text", item.id));
            }
        }

        for (item_id, langs) in &st.store.threads {
            if !st.catalog.items.contains_key(item_id) {
                problems.push(format!("translations for unknown item {item_id}"));
            }
            for (lang, thread) in langs {
                let current = thread
                    .versions
                    .iter()
                    .filter(|t| t.status == TranslationStatus::Current)
                    .count();
                if current > 1 {
                    problems.push(format!("{item_id}/{lang}: {current} current translations"));
                }
                for (i, t) in thread.versions.iter().enumerate() {
                    let expected = thread.first_version + i as u32;
                    if t.version != expected {
                        problems.push(format!(
                            "{item_id}/{lang}: version {} at position {i}, expected {expected}",
                            t.version
                        ));
                    }
                    if t.status == TranslationStatus::Current && i + 1 != thread.versions.len() {
                        problems.push(format!("{item_id}/{lang}: current is not the newest version"));
                    }
                }
                for c in &thread.comments {
                    if let Some(parent) = &c.parent_id {
                        let pos = thread.comments.iter().position(|p| &p.comment_id == parent);
                        let own = thread.comments.iter().position(|p| p.comment_id == c.comment_id);
                        if pos.is_none() || pos >= own {
                            problems.push(format!(
                                "{item_id}/{lang}: comment {} has bad parent {parent}",
                                c.comment_id
                            ));
                        }
                    }
                }
            }
        }

        let recount = st.workflow.recount_requests();
        if recount != st.workflow.request_counts {
            problems.push("request counts disagree with recorded requests".to_owned());
        }

        for (tid, reviews) in &st.reviews.by_translation {
            match st.store.translation(tid.as_str()) {
                None => problems.push(format!("reviews for unknown translation {tid}")),
                Some(t) => {
                    if reviews.contains_key(&t.author_id) {
                        problems.push(format!("self-review on {tid}"));
                    }
                }
            }
        }

        for poll in st.community.polls.values() {
            if poll.options.len() < 2 {
                problems.push(format!("poll {} has fewer than two options", poll.poll_id));
            }
            for (member, &option) in &poll.votes {
                if option >= poll.options.len() {
                    problems.push(format!("poll {}: vote by {member} out of range", poll.poll_id));
                }
            }
        }

        let mut names = std::collections::BTreeSet::new();
        for m in st.community.members.values() {
            if !names.insert(m.display_name.to_lowercase()) {
                problems.push(format!("duplicate display name {}", m.display_name));
            }
        }
        for entry in st.community.glossary.values() {
            for (lang, variants) in &entry.translations {
                if variants.is_empty() {
                    problems.push(format!("glossary {}: empty {lang} variant list", entry.term));
                }
            }
        }
        for thread in st.community.forums.threads.values() {
            let is_lang = thread.kind == crate::community::ForumKind::Language;
            if is_lang != thread.lang.is_some() {
                problems.push(format!("forum thread {} kind/lang mismatch", thread.thread_id));
            }
        }
        problems
    }
}

/// Current time truncated to milliseconds so timestamps round-trip through
/// RFC 3339 text unchanged.
pub(crate) fn now() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(3)
}

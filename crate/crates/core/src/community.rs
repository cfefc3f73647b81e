//! Members and the community spaces: terminology glossary, forums, polls and
//! the translator directory.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::center::{now, Center, SYSTEM_MEMBER};
use crate::error::{require_text, Error, Result};
use crate::ids::{ItemId, Lang, MemberId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub member_id: MemberId,
    pub display_name: String,
    pub languages: Vec<Lang>,
    pub contact_opt_in: bool,
    pub contact_info: String,
    /// Hex SHA-256 of the member's login secret.
    pub secret_hash: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MemberUpdate {
    pub languages: Option<Vec<Lang>>,
    pub contact_opt_in: Option<bool>,
    pub contact_info: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectoryEntry {
    pub member_id: MemberId,
    pub display_name: String,
    pub languages: Vec<Lang>,
    pub contact_info: Option<String>,
    pub items_translated_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermVariant {
    pub text: String,
    pub region_note: Option<String>,
    pub author_id: MemberId,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlossaryComment {
    pub comment_id: String,
    pub author_id: MemberId,
    pub body: String,
    pub parent_id: Option<String>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlossaryEntry {
    pub term: String,
    pub definition: String,
    /// Variants per language. Append-only, so regional alternatives
    /// ("ordenador" / "computadora") coexist until the community settles them.
    pub translations: BTreeMap<Lang, Vec<TermVariant>>,
    pub comments: Vec<GlossaryComment>,
    /// Poll the community opened to settle a dispute over this term.
    pub poll_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForumKind {
    General,
    Help,
    Suggestion,
    Language,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForumThread {
    pub thread_id: String,
    pub kind: ForumKind,
    pub lang: Option<Lang>,
    pub title: String,
    pub author_id: MemberId,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForumPost {
    pub post_id: String,
    pub thread_id: String,
    pub author_id: MemberId,
    pub body: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewThread {
    pub kind: ForumKind,
    pub lang: Option<Lang>,
    pub title: String,
}

impl NewThread {
    pub fn language(lang: &str, title: impl Into<String>) -> Self {
        NewThread {
            kind: ForumKind::Language,
            lang: Some(Lang::from(lang)),
            title: title.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PostTarget {
    Existing(String),
    New(NewThread),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Forums {
    pub threads: BTreeMap<String, ForumThread>,
    /// Posts per thread in append order.
    pub posts: BTreeMap<String, Vec<ForumPost>>,
    /// Language threads that mirror translation comments, per (lang, item).
    pub item_threads: BTreeMap<Lang, BTreeMap<ItemId, String>>,
}

impl Forums {
    pub(crate) fn item_thread(&self, lang: &str, item_id: &str) -> Option<&String> {
        self.item_threads.get(lang).and_then(|m| m.get(item_id))
    }

    pub(crate) fn link_item_thread(&mut self, lang: &str, item_id: &str, thread_id: &str) {
        self.item_threads
            .entry(Lang::from(lang))
            .or_default()
            .entry(ItemId::from(item_id))
            .or_insert_with(|| thread_id.to_owned());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PollState {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poll {
    pub poll_id: String,
    pub question: String,
    pub options: Vec<String>,
    /// `None` for a global poll, otherwise the language it concerns.
    pub lang: Option<Lang>,
    pub votes: BTreeMap<MemberId, usize>,
    pub state: PollState,
    pub created_by: MemberId,
    pub created_at: DateTime<Utc>,
}

impl Poll {
    pub fn tally(&self) -> PollTally {
        let mut counts = vec![0u32; self.options.len()];
        for &option in self.votes.values() {
            counts[option] += 1;
        }
        PollTally {
            poll_id: self.poll_id.clone(),
            counts,
            voters: self.votes.len(),
            state: self.state,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollTally {
    pub poll_id: String,
    pub counts: Vec<u32>,
    pub voters: usize,
    pub state: PollState,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Community {
    pub members: BTreeMap<MemberId, Member>,
    /// Keyed by lower-cased term.
    pub glossary: BTreeMap<String, GlossaryEntry>,
    pub forums: Forums,
    pub polls: BTreeMap<String, Poll>,
}

fn glossary_key(term: &str) -> String {
    term.trim().to_lowercase()
}

impl Center {
    pub fn register_member(&mut self, display_name: &str, languages: &[Lang], secret_hash: &str) -> Result<&Member> {
        require_text("display_name", display_name)?;
        let name = display_name.trim();
        if name.eq_ignore_ascii_case(SYSTEM_MEMBER) {
            return Err(Error::Conflict(format!("display name {name:?} is reserved")));
        }
        if self.member_by_name(name).is_some() {
            return Err(Error::Conflict(format!("display name {name:?} is taken")));
        }
        let member = Member {
            member_id: MemberId::new(self.next_id("m")),
            display_name: name.to_owned(),
            languages: languages.to_vec(),
            contact_opt_in: false,
            contact_info: String::new(),
            secret_hash: secret_hash.to_owned(),
            created_at: now(),
        };
        let id = member.member_id.clone();
        Ok(self.state.community.members.entry(id).or_insert(member))
    }

    pub fn member(&self, member_id: &str) -> Result<&Member> {
        self.state
            .community
            .members
            .get(member_id)
            .ok_or_else(|| Error::not_found("member", member_id))
    }

    /// Case-insensitive lookup by display name.
    pub fn member_by_name(&self, display_name: &str) -> Option<&Member> {
        let wanted = display_name.trim().to_lowercase();
        self.state
            .community
            .members
            .values()
            .find(|m| m.display_name.to_lowercase() == wanted)
    }

    pub fn update_member(&mut self, member_id: &str, update: MemberUpdate) -> Result<&Member> {
        let member = self
            .state
            .community
            .members
            .get_mut(member_id)
            .ok_or_else(|| Error::not_found("member", member_id))?;
        if let Some(languages) = update.languages {
            member.languages = languages;
        }
        if let Some(opt_in) = update.contact_opt_in {
            member.contact_opt_in = opt_in;
        }
        if let Some(info) = update.contact_info {
            member.contact_info = info;
        }
        Ok(member)
    }

    /// Opted-in members only, sorted by display name.
    pub fn directory_list(&self) -> Vec<DirectoryEntry> {
        let mut counts: BTreeMap<&MemberId, usize> = BTreeMap::new();
        for thread in self.state.store.threads.values().flat_map(|l| l.values()) {
            for t in &thread.versions {
                *counts.entry(&t.author_id).or_default() += 1;
            }
        }
        let mut out: Vec<DirectoryEntry> = self
            .state
            .community
            .members
            .values()
            .filter(|m| m.contact_opt_in)
            .map(|m| DirectoryEntry {
                member_id: m.member_id.clone(),
                display_name: m.display_name.clone(),
                languages: m.languages.clone(),
                contact_info: Some(m.contact_info.clone()),
                items_translated_count: counts.get(&m.member_id).copied().unwrap_or(0),
            })
            .collect();
        out.sort_by(|a, b| {
            (a.display_name.to_lowercase(), &a.member_id).cmp(&(b.display_name.to_lowercase(), &b.member_id))
        });
        out
    }

    /// Creates a glossary entry or appends a translation variant to it.
    #[allow(clippy::too_many_arguments)]
    pub fn glossary_upsert(
        &mut self,
        term: &str,
        definition: &str,
        lang: &str,
        translation_text: &str,
        region_note: Option<&str>,
        author: &str,
    ) -> Result<&GlossaryEntry> {
        require_text("term", term)?;
        require_text("translation", translation_text)?;
        self.require_lang(lang)?;
        self.require_member(author)?;

        let variant = TermVariant {
            text: translation_text.trim().to_owned(),
            region_note: region_note.map(str::trim).filter(|r| !r.is_empty()).map(str::to_owned),
            author_id: MemberId::from(author),
            created_at: now(),
        };
        let entry = self
            .state
            .community
            .glossary
            .entry(glossary_key(term))
            .or_insert_with(|| GlossaryEntry {
                term: term.trim().to_owned(),
                definition: String::new(),
                translations: BTreeMap::new(),
                comments: Vec::new(),
                poll_id: None,
            });
        if entry.definition.trim().is_empty() {
            entry.definition = definition.trim().to_owned();
        }
        let variants = entry.translations.entry(Lang::from(lang)).or_default();
        let duplicate = variants
            .iter()
            .any(|v| v.text == variant.text && v.region_note == variant.region_note);
        if !duplicate {
            variants.push(variant);
        }
        Ok(entry)
    }

    pub fn glossary_lookup(&self, term: &str) -> Option<&GlossaryEntry> {
        self.state.community.glossary.get(&glossary_key(term))
    }

    pub fn glossary(&self) -> impl Iterator<Item = &GlossaryEntry> {
        self.state.community.glossary.values()
    }

    pub fn glossary_comment(
        &mut self,
        term: &str,
        author: &str,
        body: &str,
        parent_id: Option<&str>,
    ) -> Result<GlossaryComment> {
        self.require_member(author)?;
        require_text("body", body)?;
        let key = glossary_key(term);
        let entry = self
            .state
            .community
            .glossary
            .get(&key)
            .ok_or_else(|| Error::not_found("glossary term", term))?;
        if let Some(parent) = parent_id {
            if !entry.comments.iter().any(|c| c.comment_id == parent) {
                return Err(Error::not_found("comment", parent));
            }
        }
        let comment = GlossaryComment {
            comment_id: self.next_id("g"),
            author_id: MemberId::from(author),
            body: body.to_owned(),
            parent_id: parent_id.map(str::to_owned),
            created_at: now(),
        };
        if let Some(entry) = self.state.community.glossary.get_mut(&key) {
            entry.comments.push(comment.clone());
        }
        Ok(comment)
    }

    /// Associates a deciding poll with a glossary term.
    pub fn glossary_link_poll(&mut self, term: &str, poll_id: &str) -> Result<&GlossaryEntry> {
        self.poll(poll_id)?;
        let entry = self
            .state
            .community
            .glossary
            .get_mut(&glossary_key(term))
            .ok_or_else(|| Error::not_found("glossary term", term))?;
        entry.poll_id = Some(poll_id.to_owned());
        Ok(entry)
    }

    /// Appends a post to an existing thread or opens a new thread with it.
    pub fn forum_post(&mut self, target: PostTarget, author: &str, body: &str) -> Result<ForumPost> {
        self.require_member(author)?;
        let thread_id = match target {
            PostTarget::Existing(id) => {
                if !self.state.community.forums.threads.contains_key(&id) {
                    return Err(Error::not_found("thread", id));
                }
                require_text("body", body)?;
                id
            }
            PostTarget::New(new) => {
                match (new.kind, &new.lang) {
                    (ForumKind::Language, None) => {
                        return Err(Error::validation("lang", "language forums require a language"))
                    }
                    (ForumKind::Language, Some(lang)) => self.require_lang(lang.as_str())?,
                    (_, Some(_)) => {
                        return Err(Error::validation("lang", "only language forums carry a language"))
                    }
                    (_, None) => {}
                }
                require_text("title", &new.title)?;
                require_text("body", body)?;
                let thread = ForumThread {
                    thread_id: self.next_id("f"),
                    kind: new.kind,
                    lang: new.lang,
                    title: new.title.trim().to_owned(),
                    author_id: MemberId::from(author),
                    created_at: now(),
                };
                let id = thread.thread_id.clone();
                self.state.community.forums.threads.insert(id.clone(), thread);
                id
            }
        };
        let posts = self.state.community.forums.posts.get(&thread_id);
        let floor = posts.and_then(|p| p.last()).map(|p| p.created_at);
        let post = ForumPost {
            post_id: self.next_id("p"),
            thread_id: thread_id.clone(),
            author_id: MemberId::from(author),
            body: body.to_owned(),
            created_at: floor.map_or_else(now, |f| f.max(now())),
        };
        self.state
            .community
            .forums
            .posts
            .entry(thread_id)
            .or_default()
            .push(post.clone());
        Ok(post)
    }

    pub fn forum_threads(&self) -> Vec<&ForumThread> {
        let mut threads: Vec<&ForumThread> = self.state.community.forums.threads.values().collect();
        threads.sort_by(|a, b| (a.created_at, &a.thread_id).cmp(&(b.created_at, &b.thread_id)));
        threads
    }

    pub fn forum_thread(&self, thread_id: &str) -> Result<&ForumThread> {
        self.state
            .community
            .forums
            .threads
            .get(thread_id)
            .ok_or_else(|| Error::not_found("thread", thread_id))
    }

    pub fn forum_posts(&self, thread_id: &str) -> Result<&[ForumPost]> {
        self.forum_thread(thread_id)?;
        Ok(self
            .state
            .community
            .forums
            .posts
            .get(thread_id)
            .map_or(&[], Vec::as_slice))
    }

    pub fn create_poll(
        &mut self,
        question: &str,
        options: &[String],
        lang: Option<&str>,
        author: &str,
    ) -> Result<&Poll> {
        self.require_member(author)?;
        require_text("question", question)?;
        if options.len() < 2 {
            return Err(Error::validation("options", "a poll needs at least two options"));
        }
        for (i, option) in options.iter().enumerate() {
            require_text(&format!("options[{i}]"), option)?;
        }
        if let Some(lang) = lang {
            self.require_lang(lang)?;
        }
        let poll = Poll {
            poll_id: self.next_id("q"),
            question: question.trim().to_owned(),
            options: options.iter().map(|o| o.trim().to_owned()).collect(),
            lang: lang.map(Lang::from),
            votes: BTreeMap::new(),
            state: PollState::Open,
            created_by: MemberId::from(author),
            created_at: now(),
        };
        let id = poll.poll_id.clone();
        Ok(self.state.community.polls.entry(id).or_insert(poll))
    }

    pub fn poll(&self, poll_id: &str) -> Result<&Poll> {
        self.state
            .community
            .polls
            .get(poll_id)
            .ok_or_else(|| Error::not_found("poll", poll_id))
    }

    pub fn polls(&self) -> impl Iterator<Item = &Poll> {
        self.state.community.polls.values()
    }

    /// Records (or replaces) a member's vote and returns the new tally.
    pub fn poll_vote(&mut self, poll_id: &str, member: &str, option_index: usize) -> Result<PollTally> {
        self.require_member(member)?;
        let poll = self
            .state
            .community
            .polls
            .get_mut(poll_id)
            .ok_or_else(|| Error::not_found("poll", poll_id))?;
        if poll.state == PollState::Closed {
            return Err(Error::State(format!("poll {poll_id} is closed")));
        }
        if option_index >= poll.options.len() {
            return Err(Error::validation(
                "option",
                format!("{option_index} is not one of the {} options", poll.options.len()),
            ));
        }
        poll.votes.insert(MemberId::from(member), option_index);
        Ok(poll.tally())
    }

    pub fn close_poll(&mut self, poll_id: &str) -> Result<PollTally> {
        let poll = self
            .state
            .community
            .polls
            .get_mut(poll_id)
            .ok_or_else(|| Error::not_found("poll", poll_id))?;
        poll.state = PollState::Closed;
        Ok(poll.tally())
    }
}

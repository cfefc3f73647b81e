//! Domain model and embedded store for a self-hosted community translation
//! center.
//!
//! The [`Center`] aggregate owns every piece of persistent state: the string
//! catalog, versioned translations and their comment threads, translation
//! requests and binders, peer reviews, and the community spaces (glossary,
//! forums, polls, members). Operations are grouped by module and implemented
//! as inherent methods on [`Center`]; [`persist::Db`] wraps a center with a
//! lock and atomic on-disk snapshots.

pub mod catalog;
pub mod community;
pub mod config;
pub mod error;
pub mod exchange;
pub mod ids;
pub mod persist;
pub mod review;
pub mod store;
pub mod workflow;

mod center;

pub use center::{Center, Language, Settings, State, SYSTEM_MEMBER};
pub use error::{Error, Result};
pub use ids::{ItemId, Lang, MemberId, PageId, TranslationId};

//! Peer review of translations with the 13-point quality rubric.
//!
//! The rubric scores four areas of language use: structure, vocabulary
//! (split into cognates, meanings and spellings), style (consistency and
//! punctuation/abbreviations) and how clearly the message comes across.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::center::{now, Center};
use crate::error::{Error, Result};
use crate::ids::{MemberId, TranslationId};

/// Highest attainable rubric total.
pub const MAX_TOTAL: u8 = 13;

/// Quality assumed for a translation nobody has reviewed yet.
pub const UNREVIEWED_QUALITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RubricCategory {
    Structure,
    Cognates,
    Meanings,
    Spellings,
    Consistency,
    Punctuation,
    Message,
}

impl RubricCategory {
    pub const ALL: [RubricCategory; 7] = [
        RubricCategory::Structure,
        RubricCategory::Cognates,
        RubricCategory::Meanings,
        RubricCategory::Spellings,
        RubricCategory::Consistency,
        RubricCategory::Punctuation,
        RubricCategory::Message,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RubricCategory::Structure => "structure",
            RubricCategory::Cognates => "cognates",
            RubricCategory::Meanings => "meanings",
            RubricCategory::Spellings => "spellings",
            RubricCategory::Consistency => "consistency",
            RubricCategory::Punctuation => "punctuation",
            RubricCategory::Message => "message",
        }
    }

    pub fn max(self) -> u8 {
        match self {
            RubricCategory::Structure | RubricCategory::Cognates | RubricCategory::Message => 3,
            _ => 1,
        }
    }
}

impl fmt::Display for RubricCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Wire form of a rubric; validated into [`RubricScores`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRubric {
    pub structure: u8,
    pub cognates: u8,
    pub meanings: u8,
    pub spellings: u8,
    pub consistency: u8,
    pub punctuation: u8,
    pub message: u8,
}

/// A validated rubric: every category lies within its range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRubric", into = "RawRubric")]
pub struct RubricScores([u8; 7]);

impl RubricScores {
    pub fn new(
        structure: u8,
        cognates: u8,
        meanings: u8,
        spellings: u8,
        consistency: u8,
        punctuation: u8,
        message: u8,
    ) -> Result<Self> {
        RubricScores::from_array([
            structure,
            cognates,
            meanings,
            spellings,
            consistency,
            punctuation,
            message,
        ])
    }

    /// Scores in [`RubricCategory::ALL`] order.
    pub fn from_array(scores: [u8; 7]) -> Result<Self> {
        for (category, &value) in RubricCategory::ALL.iter().zip(&scores) {
            if value > category.max() {
                return Err(Error::validation(
                    format!("rubric.{category}"),
                    format!("{value} is outside 0..={}", category.max()),
                ));
            }
        }
        Ok(RubricScores(scores))
    }

    pub fn get(&self, category: RubricCategory) -> u8 {
        self.0[category as usize]
    }

    pub fn as_array(&self) -> [u8; 7] {
        self.0
    }

    pub fn total(&self) -> u8 {
        rubric_total(self)
    }
}

impl TryFrom<RawRubric> for RubricScores {
    type Error = Error;

    fn try_from(r: RawRubric) -> Result<Self> {
        RubricScores::new(
            r.structure,
            r.cognates,
            r.meanings,
            r.spellings,
            r.consistency,
            r.punctuation,
            r.message,
        )
    }
}

impl From<RubricScores> for RawRubric {
    fn from(r: RubricScores) -> Self {
        let [structure, cognates, meanings, spellings, consistency, punctuation, message] = r.0;
        RawRubric {
            structure,
            cognates,
            meanings,
            spellings,
            consistency,
            punctuation,
            message,
        }
    }
}

/// Sum of the seven category scores, in `0..=13`.
pub fn rubric_total(rubric: &RubricScores) -> u8 {
    rubric.0.iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub translation_id: TranslationId,
    pub reviewer: MemberId,
    pub rubric: RubricScores,
    pub total: u8,
    pub body: Option<String>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Reviews {
    pub by_translation: BTreeMap<TranslationId, BTreeMap<MemberId, Review>>,
}

impl Center {
    /// Stores a review; a second review by the same member replaces the first.
    pub fn submit_review(
        &mut self,
        translation_id: &str,
        reviewer: &str,
        rubric: RubricScores,
        body: Option<&str>,
    ) -> Result<Review> {
        let translation = self.translation(translation_id)?;
        let author = translation.author_id.clone();
        self.require_member(reviewer)?;
        if author.as_str() == reviewer {
            return Err(Error::SelfReview);
        }

        let existing_id = self
            .state
            .reviews
            .by_translation
            .get(translation_id)
            .and_then(|r| r.get(reviewer))
            .map(|r| r.review_id.clone());
        let review = Review {
            review_id: existing_id.unwrap_or_else(|| self.next_id("v")),
            translation_id: TranslationId::from(translation_id),
            reviewer: MemberId::from(reviewer),
            rubric,
            total: rubric.total(),
            body: body.map(str::to_owned).filter(|b| !b.trim().is_empty()),
            created_at: now(),
        };
        self.state
            .reviews
            .by_translation
            .entry(review.translation_id.clone())
            .or_default()
            .insert(review.reviewer.clone(), review.clone());
        Ok(review)
    }

    pub fn reviews_of(&self, translation_id: &str) -> Result<Vec<&Review>> {
        self.translation(translation_id)?;
        Ok(self
            .state
            .reviews
            .by_translation
            .get(translation_id)
            .map(|r| r.values().collect())
            .unwrap_or_default())
    }

    /// Mean of `total / 13` over reviews of the current translation, or
    /// [`UNREVIEWED_QUALITY`] when there are none.
    pub fn quality(&self, item_id: &str, lang: &str) -> f64 {
        let Some(current) = self.state.store.current(item_id, lang) else {
            return UNREVIEWED_QUALITY;
        };
        match self.state.reviews.by_translation.get(&current.translation_id) {
            Some(reviews) if !reviews.is_empty() => {
                let sum: u32 = reviews.values().map(|r| u32::from(r.total)).sum();
                f64::from(sum) / (f64::from(MAX_TOTAL) * reviews.len() as f64)
            }
            _ => UNREVIEWED_QUALITY,
        }
    }
}

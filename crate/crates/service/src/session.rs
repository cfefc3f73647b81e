//! Bearer-token sessions. Tokens are 256-bit random values; only their
//! SHA-256 digests are kept in memory, and nothing here is logged.

use std::collections::HashMap;

use chrono::{DateTime, Duration, Utc};
use parking_lot::Mutex;
use rand::Rng;
use sha2::{Digest, Sha256};
use tcenter_core::MemberId;

use crate::error::ApiError;

pub fn random_token() -> String {
    let bytes: [u8; 32] = rand::rng().random();
    hex::encode(bytes)
}

pub fn digest(secret: &str) -> String {
    hex::encode(Sha256::digest(secret.as_bytes()))
}

#[derive(Debug, Clone)]
struct Session {
    member_id: MemberId,
    expires_at: DateTime<Utc>,
}

#[derive(Debug)]
pub struct Sessions {
    ttl: Duration,
    by_digest: Mutex<HashMap<String, Session>>,
}

impl Sessions {
    pub fn new(ttl_secs: u64) -> Self {
        Sessions {
            ttl: Duration::seconds(i64::try_from(ttl_secs).unwrap_or(i64::MAX / 1000)),
            by_digest: Mutex::new(HashMap::new()),
        }
    }

    /// Issues a token for `member_id`, returning it with its expiry.
    pub fn issue(&self, member_id: &MemberId, now: DateTime<Utc>) -> (String, DateTime<Utc>) {
        let token = random_token();
        let expires_at = now + self.ttl;
        self.by_digest.lock().insert(
            digest(&token),
            Session {
                member_id: member_id.clone(),
                expires_at,
            },
        );
        (token, expires_at)
    }

    pub fn validate(&self, token: &str, now: DateTime<Utc>) -> Result<MemberId, ApiError> {
        let key = digest(token);
        let mut sessions = self.by_digest.lock();
        match sessions.get(&key) {
            None => Err(ApiError::auth("unknown session token")),
            Some(s) if s.expires_at <= now => {
                sessions.remove(&key);
                Err(ApiError::auth("session expired"))
            }
            Some(s) => Ok(s.member_id.clone()),
        }
    }
}

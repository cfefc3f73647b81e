use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use chrono::Utc;
use tcenter_core::MemberId;

use crate::error::ApiError;
use crate::AppState;

/// A request carrying a valid session token.
#[derive(Debug, Clone)]
pub struct Auth {
    pub member_id: MemberId,
}

/// A session whose member holds the administrator role.
#[derive(Debug, Clone)]
pub struct Admin {
    pub member_id: MemberId,
}

impl FromRequestParts<AppState> for Auth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, app: &AppState) -> Result<Self, Self::Rejection> {
        let header = parts
            .headers
            .get(AUTHORIZATION)
            .ok_or_else(|| ApiError::auth("missing bearer token"))?;
        let token = header
            .to_str()
            .ok()
            .and_then(|h| h.strip_prefix("Bearer "))
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .ok_or_else(|| ApiError::auth("malformed authorization header"))?;
        let member_id = app.sessions.validate(token, Utc::now())?;
        Ok(Auth { member_id })
    }
}

impl FromRequestParts<AppState> for Admin {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, app: &AppState) -> Result<Self, Self::Rejection> {
        let Auth { member_id } = Auth::from_request_parts(parts, app).await?;
        let is_admin = app.db.read(|c| {
            c.member(member_id.as_str())
                .map(|m| app.config.is_admin(&m.display_name))
                .unwrap_or(false)
        });
        if !is_admin {
            return Err(ApiError::forbidden("administrator role required"));
        }
        Ok(Admin { member_id })
    }
}

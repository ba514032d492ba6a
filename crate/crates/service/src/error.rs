use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use sdg_core::survey::SurveyError;
use serde::Serialize;
use serde_json::{json, Value};

use crate::store::StoreError;

/// Problem-detail error: `{code, message, detail}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

#[derive(Serialize)]
struct Problem<'a> {
    code: &'a str,
    message: &'a str,
    detail: &'a Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn unauthenticated() -> Self {
        ApiError::new(
            StatusCode::UNAUTHORIZED,
            "Unauthenticated",
            "missing, unknown or expired session token",
        )
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }
}

impl From<SurveyError> for ApiError {
    fn from(e: SurveyError) -> Self {
        use StatusCode as S;
        let message = e.to_string();
        let (status, code, detail) = match &e {
            SurveyError::MissingField(f) => (
                S::UNPROCESSABLE_ENTITY,
                "MissingField",
                json!({ "field": f }),
            ),
            SurveyError::UnknownCurator(id) => (
                S::UNPROCESSABLE_ENTITY,
                "UnknownCurator",
                json!({ "curator": id }),
            ),
            SurveyError::UnknownRespondent(id) => {
                (S::NOT_FOUND, "UnknownRespondent", json!({ "id": id }))
            }
            SurveyError::NotPending(id) => (S::CONFLICT, "NotPending", json!({ "id": id })),
            SurveyError::NotApproved(id) => (S::FORBIDDEN, "NotApproved", json!({ "id": id })),
            SurveyError::NotAuthorized => (S::FORBIDDEN, "NotAuthorized", Value::Null),
            SurveyError::TooFewGoals { min, got } => (
                S::UNPROCESSABLE_ENTITY,
                "TooFewGoals",
                json!({ "min": min, "got": got }),
            ),
            SurveyError::SelectionLocked => (S::CONFLICT, "SelectionLocked", Value::Null),
            SurveyError::NoGoalsSelected => (S::CONFLICT, "NoGoalsSelected", Value::Null),
            SurveyError::BatchOpen => (S::CONFLICT, "BatchOpen", Value::Null),
            SurveyError::ExplanationRequired => {
                (S::UNPROCESSABLE_ENTITY, "ExplanationRequired", Value::Null)
            }
            SurveyError::NotYourAssignment(p) => {
                (S::FORBIDDEN, "NotYourAssignment", json!({ "pair": p }))
            }
            SurveyError::AlreadyFinalized(p) => {
                (S::CONFLICT, "AlreadyFinalized", json!({ "pair": p }))
            }
            SurveyError::AlreadyAnswered(p) => {
                (S::CONFLICT, "AlreadyAnswered", json!({ "pair": p }))
            }
            SurveyError::ScoreOutOfRange(s) => (
                S::UNPROCESSABLE_ENTITY,
                "ScoreOutOfRange",
                json!({ "score": s }),
            ),
            SurveyError::UnansweredRemaining(pairs) => (
                S::CONFLICT,
                "UnansweredRemaining",
                json!({ "pairs": pairs }),
            ),
            SurveyError::PairTaken(p) => (S::CONFLICT, "PairTaken", json!({ "pair": p })),
            SurveyError::CorruptSnapshot(_) => {
                (S::INTERNAL_SERVER_ERROR, "CorruptStore", Value::Null)
            }
        };
        ApiError {
            status,
            code,
            message,
            detail,
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "StoreUnavailable",
            e.to_string(),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = sdg_core::report::to_json_bytes(&Problem {
            code: self.code,
            message: &self.message,
            detail: &self.detail,
        });
        (
            self.status,
            [(axum::http::header::CONTENT_TYPE, "application/json")],
            body,
        )
            .into_response()
    }
}

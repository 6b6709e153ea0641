use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use facetopo_core::Error;
use serde_json::{json, Value};

/// `{"error": <tag>, "detail": {...}}` with a matching status code.
#[derive(Clone, Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub error: String,
    pub detail: Value,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>, detail: Value) -> Self {
        let mut detail = detail;
        if let Value::Object(m) = &mut detail {
            m.insert("message".into(), Value::String(message.into()));
        }
        Self {
            status: StatusCode::BAD_REQUEST,
            error: "bad_request".into(),
            detail,
        }
    }

    /// 404 echoing the requested tuple.
    pub fn not_found(what: &str, tuple: Value) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            error: "not_found".into(),
            detail: json!({"missing": what, "request": tuple}),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parameter(_) | Error::IndexOutOfRange { .. } | Error::EmptySelection(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            error: e.kind().into(),
            detail: json!({"message": e.to_string()}),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.error, "detail": self.detail}))).into_response()
    }
}

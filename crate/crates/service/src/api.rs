//! Request and response bodies, and the three endpoint handlers.

use std::collections::{BTreeMap, HashSet};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use layout_eval_core::decode_rgb;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::jobs::{ImagePair, JobState, JobView};
use crate::store::{CollectionManifest, NewEntry};
use crate::AppState;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UploadFile {
    pub name: String,
    pub extension: String,
    /// Base64 image bytes; a `data:...;base64,` prefix is accepted.
    pub value: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UploadRequest {
    pub files: Vec<UploadFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UploadResponse {
    pub collection: String,
    pub files: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluationData {
    pub gt_collection: String,
    pub hypothesis_collection: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationRequest {
    pub data: Vec<EvaluationData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationResponse {
    pub id: String,
    pub state: JobState,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        tracing::error!("internal error: {e}");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

fn parse_json<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed JSON: {e}")))
}

/// Pairing key of an upload: its name without a trailing `.<extension>`.
fn entry_key(file: &UploadFile) -> String {
    let suffix = format!(".{}", file.extension);
    file.name
        .strip_suffix(&suffix)
        .filter(|s| !s.is_empty())
        .unwrap_or(&file.name)
        .to_owned()
}

fn decode_base64(value: &str) -> Result<Vec<u8>, base64::DecodeError> {
    let payload = match value.split_once(";base64,") {
        Some((prefix, rest)) if prefix.starts_with("data:") => rest,
        _ => value,
    };
    STANDARD.decode(payload.trim())
}

/// `POST /collections`
pub async fn post_collection(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: UploadRequest = parse_json(&body)?;
    if request.files.is_empty() {
        return Err(ApiError::bad_request("no files given"));
    }

    let mut entries = Vec::with_capacity(request.files.len());
    for file in &request.files {
        if file.name.trim().is_empty() {
            return Err(ApiError::bad_request("file without a name"));
        }
        if file.extension.trim().is_empty() {
            return Err(ApiError::bad_request(format!("{}: missing extension", file.name)));
        }
        let bytes = decode_base64(&file.value)
            .map_err(|e| ApiError::bad_request(format!("{}: invalid base64: {e}", file.name)))?;
        entries.push(NewEntry {
            name: entry_key(file),
            extension: file.extension.clone(),
            bytes,
        });
    }

    let mut seen = HashSet::new();
    if let Some(dup) = entries.iter().find(|e| !seen.insert(e.name.as_str())) {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("duplicate entry name {:?}", dup.name),
        ));
    }

    let store = state.store().clone();
    let name = uuid::Uuid::new_v4().simple().to_string();
    let manifest = tokio::task::spawn_blocking(move || -> Result<CollectionManifest, ApiError> {
        for entry in &entries {
            decode_rgb(&entry.bytes).map_err(|e| {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("{}: {e}", entry.name))
            })?;
        }
        store.create_collection(&name, &entries).map_err(ApiError::internal)
    })
    .await
    .map_err(ApiError::internal)??;

    tracing::info!(collection = %manifest.name, files = manifest.entries.len(), "collection created");
    let response = UploadResponse {
        collection: manifest.name,
        files: manifest.entries.len(),
    };
    Ok((StatusCode::CREATED, Json(response)).into_response())
}

fn load_collection(state: &AppState, name: &str) -> Result<CollectionManifest, ApiError> {
    state
        .store()
        .collection(name)
        .map_err(ApiError::internal)?
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown collection {name:?}")))
}

fn pair_collections(gt: &CollectionManifest, hyp: &CollectionManifest) -> Result<Vec<ImagePair>, ApiError> {
    let gt_entries: BTreeMap<_, _> = gt.entries.iter().map(|e| (e.name.as_str(), e)).collect();
    let hyp_entries: BTreeMap<_, _> = hyp.entries.iter().map(|e| (e.name.as_str(), e)).collect();
    let missing: Vec<&str> = gt_entries.keys().filter(|k| !hyp_entries.contains_key(*k)).copied().collect();
    let extra: Vec<&str> = hyp_entries.keys().filter(|k| !gt_entries.contains_key(*k)).copied().collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!(
                "collections {:?} and {:?} do not pair up: missing hypotheses {missing:?}, unmatched hypotheses {extra:?}",
                gt.name, hyp.name
            ),
        ));
    }
    Ok(gt_entries
        .into_iter()
        .map(|(name, g)| ImagePair {
            gt_collection: gt.name.clone(),
            gt: g.clone(),
            hypothesis_collection: hyp.name.clone(),
            hypothesis: hyp_entries[name].clone(),
        })
        .collect())
}

/// `POST /evaluation`
pub async fn post_evaluation(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: EvaluationRequest = parse_json(&body)?;
    if request.data.is_empty() {
        return Err(ApiError::bad_request("no collections given"));
    }
    let mut pairs = Vec::new();
    for data in &request.data {
        let gt = load_collection(&state, &data.gt_collection)?;
        let hyp = load_collection(&state, &data.hypothesis_collection)?;
        pairs.extend(pair_collections(&gt, &hyp)?);
    }

    let id = state.submit(pairs).map_err(ApiError::internal)?;
    let location = format!("/jobs/{id}");
    let body = EvaluationResponse {
        id,
        state: JobState::Pending,
    };
    Ok((StatusCode::ACCEPTED, [(header::LOCATION, location)], Json(body)).into_response())
}

/// `GET /jobs/{id}`
pub async fn get_job(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<JobView>, ApiError> {
    state
        .job(&id)
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown job {id:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upload(name: &str, ext: &str) -> UploadFile {
        UploadFile {
            name: name.into(),
            extension: ext.into(),
            value: String::new(),
        }
    }

    #[test]
    fn keys_drop_the_extension() {
        assert_eq!(entry_key(&upload("page.png", "png")), "page");
        assert_eq!(entry_key(&upload("page", "png")), "page");
        assert_eq!(entry_key(&upload(".png", "png")), ".png");
        assert_eq!(entry_key(&upload("a.b.png", "png")), "a.b");
    }

    #[test]
    fn data_url_prefix() {
        assert_eq!(decode_base64("data:image/png;base64,AQID").unwrap(), [1, 2, 3]);
        assert_eq!(decode_base64("AQID").unwrap(), [1, 2, 3]);
        assert!(decode_base64("@@@").is_err());
    }

    #[test]
    fn request_field_names() {
        let req: EvaluationRequest = serde_json::from_str(
            r#"{"parameters": {}, "data": [{"gtCollection": "a", "hypothesisCollection": "b"}]}"#,
        )
        .unwrap();
        assert_eq!(req.data[0].gt_collection, "a");
        assert_eq!(req.data[0].hypothesis_collection, "b");
    }
}

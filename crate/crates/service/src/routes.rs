use std::collections::BTreeMap;

use axum::extract::rejection::{JsonRejection, QueryRejection, StringRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use seedlex_core::analyzer::{analyze, CategoryMatcher};
use seedlex_core::crowd::{aggregate, chunk_tasks, import_responses, AggregateOptions, AggregationReport, WORDS_PER_TASK};
use seedlex_core::lexicon::{apply_crowd_filter, generate, Category, CategorySpec, DEFAULT_MAX_TERMS, DEFAULT_THRESHOLD};

use crate::error::ApiError;
use crate::ServiceState;

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
pub struct AnalyzeRequest {
    pub text: String,
    pub categories: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CategoryCounts {
    pub raw: u64,
    pub normalized: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SpanMatch {
    pub category: String,
    /// Byte offsets into the submitted text.
    pub start: usize,
    pub end: usize,
    pub word: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct AnalyzeResponse {
    pub per_category: BTreeMap<String, CategoryCounts>,
    pub matches: Vec<SpanMatch>,
    pub total_tokens: u64,
}

pub async fn analyze_text(
    State(state): State<ServiceState>,
    body: Result<Json<AnalyzeRequest>, JsonRejection>,
) -> ApiResult<Json<AnalyzeResponse>> {
    let Json(req) = body?;
    if req.text.len() > state.max_text_bytes {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload_too_large",
            format!("text is {} bytes; the limit is {}", req.text.len(), state.max_text_bytes),
        ));
    }
    let categories = match req.categories {
        None => state.store.list()?,
        Some(names) => {
            let mut found = Vec::with_capacity(names.len());
            let mut unknown = Vec::new();
            for name in &names {
                match state.store.get(name)? {
                    Some(c) => found.push(c),
                    None => unknown.push(name.as_str()),
                }
            }
            if !unknown.is_empty() {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "unknown_category",
                    format!("unknown categories: {}", unknown.join(", ")),
                ));
            }
            found
        }
    };
    let matcher = CategoryMatcher::new(&categories);
    let result = analyze(&req.text, &matcher);
    let per_category = result
        .per_category
        .iter()
        .map(|c| (c.category.clone(), CategoryCounts { raw: c.raw, normalized: c.normalized }))
        .collect();
    let matches = result
        .matches
        .into_iter()
        .map(|m| SpanMatch { word: req.text[m.start..m.end].to_string(), category: m.category, start: m.start, end: m.end })
        .collect();
    Ok(Json(AnalyzeResponse { per_category, matches, total_tokens: result.total_tokens }))
}

#[derive(Debug, Deserialize)]
pub struct GenerateRequest {
    pub name: String,
    pub seeds: Vec<String>,
    pub threshold: Option<f64>,
    pub max_terms: Option<usize>,
    /// Version the client last saw; 0 when creating.
    pub expected_version: Option<u64>,
}

pub async fn generate_category(
    State(state): State<ServiceState>,
    body: Result<Json<GenerateRequest>, JsonRejection>,
) -> ApiResult<Json<Category>> {
    let Json(req) = body?;
    let spec = CategorySpec::new(req.name, req.seeds)
        .with_threshold(req.threshold.unwrap_or(DEFAULT_THRESHOLD))
        .with_max_terms(req.max_terms.unwrap_or(DEFAULT_MAX_TERMS));
    spec.validate()?;
    let missing: Vec<&str> =
        spec.seeds.iter().filter(|s| state.space.resolve(s).is_none()).map(String::as_str).collect();
    if missing.len() == spec.seeds.len() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "seeds_out_of_vocabulary",
            format!("no seed is in the vocabulary: {}", missing.join(", ")),
        ));
    }

    let _guard = state.store.lock(&spec.name).await;
    let space = state.space.clone();
    let name = spec.name.clone();
    let category = tokio::task::spawn_blocking(move || generate(&spec, &space))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    let stored = state.store.put(category, req.expected_version)?;
    state.store.clear_tasks(&name)?;
    Ok(Json(stored))
}

pub async fn list_categories(State(state): State<ServiceState>) -> ApiResult<Json<Vec<Category>>> {
    Ok(Json(state.store.list()?))
}

pub async fn get_category(State(state): State<ServiceState>, Path(name): Path<String>) -> ApiResult<Json<Category>> {
    state.store.get(&name)?.map(Json).ok_or_else(|| ApiError::not_found(&name))
}

#[derive(Debug, Deserialize)]
pub struct ExportParams {
    pub words_per_task: Option<usize>,
}

fn csv_response(body: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response()
}

pub async fn export_category(
    State(state): State<ServiceState>,
    Path(name): Path<String>,
    params: Result<Query<ExportParams>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(params) = params.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.body_text()))?;
    let _guard = state.store.lock(&name).await;
    let category = state.store.get(&name)?.ok_or_else(|| ApiError::not_found(&name))?;
    let tasks = chunk_tasks(&category, params.words_per_task.unwrap_or(WORDS_PER_TASK))
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string()))?;
    let body = state.store.save_tasks(&name, &tasks)?;
    Ok(csv_response(body))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ImportResponse {
    pub category: Category,
    pub aggregation: AggregationReport,
}

pub async fn import_labels(
    State(state): State<ServiceState>,
    Path(name): Path<String>,
    body: Result<String, StringRejection>,
) -> ApiResult<Json<ImportResponse>> {
    let body = body?;
    let _guard = state.store.lock(&name).await;
    let category = state.store.get(&name)?.ok_or_else(|| ApiError::not_found(&name))?;
    let tasks = match state.store.load_tasks(&name)? {
        Some(tasks) => tasks,
        None => chunk_tasks(&category, WORDS_PER_TASK)?,
    };
    let responses = import_responses(body.as_bytes(), &tasks)?;
    let report = aggregate(&responses, AggregateOptions::default())?;
    let filtered = apply_crowd_filter(&category, &report.verdicts)?;
    let stored = state.store.put(filtered, Some(category.version))?;
    Ok(Json(ImportResponse { category: stored, aggregation: report }))
}

pub async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

pub async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this route")
}

use std::collections::BTreeSet;
use std::io::{Cursor, Write};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use curatr_core::corpus::TOKENIZER_RULES;
use curatr_core::curation::{build_export, DEFAULT_RANK_LIMIT};
use curatr_core::index::{snippet, Snippet, SNIPPET_RADIUS};
use curatr_core::lexicon::DEFAULT_RECOMMENDATIONS;
use curatr_core::{
    rank_by_lexicon, tokenize, Lexicon, MetadataFilter, RankedResult, SearchHit, SimilarityResult,
    SubCorpus,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::json;
use zip::write::SimpleFileOptions;

use crate::error::ApiError;
use crate::state::{AppState, Engine};

type St = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

const DEFAULT_SEARCH_LIMIT: usize = 50;
const DEFAULT_PAGE_SIZE: usize = 200;
const MAX_PAGE_SIZE: usize = 5000;

/// JSON body whose rejections become [`ApiError`]s. An empty body reads as `{}`.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::validation(e.body_text()))?;
        let slice: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) {
            b"{}"
        } else {
            &bytes
        };
        serde_json::from_slice(slice)
            .map(ApiJson)
            .map_err(|e| ApiError::validation(format!("invalid request body: {e}")))
    }
}

pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(q)| ApiQuery(q))
            .map_err(|e| ApiError::validation(e.body_text()))
    }
}

/// Query-string numbers where an empty value means "not given".
fn opt_num<'de, D, T>(de: D) -> Result<Option<T>, D::Error>
where
    D: Deserializer<'de>,
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    match Option::<String>::deserialize(de)? {
        None => Ok(None),
        Some(s) if s.trim().is_empty() => Ok(None),
        Some(s) => s.trim().parse().map(Some).map_err(serde::de::Error::custom),
    }
}

fn opt_text<'de, D: Deserializer<'de>>(de: D) -> Result<Option<String>, D::Error> {
    Ok(Option::<String>::deserialize(de)?.filter(|s| !s.trim().is_empty()))
}

fn positive(name: &str, v: Option<usize>, default: usize) -> ApiResult<usize> {
    match v {
        Some(0) => Err(ApiError::validation(format!("{name} must be at least 1"))),
        Some(n) => Ok(n),
        None => Ok(default),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/config", get(config))
        .route("/search", get(search))
        .route("/ngrams", get(ngrams))
        .route("/documents/{doc_id}", get(document))
        .route("/lexicons", get(list_lexicons).post(create_lexicon))
        .route("/lexicons/{name}", get(get_lexicon))
        .route("/lexicons/{name}/recommend", post(recommend))
        .route("/lexicons/{name}/decisions", post(decisions))
        .route("/lexicons/{name}/rank", post(rank))
        .route("/subcorpora", get(list_subcorpora).post(create_subcorpus))
        .route("/subcorpora/{name}", get(get_subcorpus))
        .route("/subcorpora/{name}/exclude", post(exclude))
        .route("/subcorpora/{name}/include", post(include))
        .route("/subcorpora/{name}/export", get(export))
        .route("/admin/reload", post(reload))
        .fallback(api_not_found)
        .method_not_allowed_fallback(method_not_allowed);
    let app = Router::new().nest("/api", api);
    let app = match &state.config.static_dir {
        Some(dir) => app.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => app.fallback(api_not_found),
    };
    app.with_state(state)
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such route")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(
        StatusCode::METHOD_NOT_ALLOWED,
        "VALIDATION",
        "method not allowed for this route",
    )
}

async fn health(State(st): St) -> Response {
    if st.is_ready() {
        Json(json!({ "status": "ready", "components": st.components() })).into_response()
    } else {
        ApiError::not_ready(st.components_json()).into_response()
    }
}

async fn config(State(st): St) -> ApiResult<Response> {
    let eng = st.engine()?;
    Ok(Json(json!({
        "training": eng.model.config(),
        "architecture": "cbow-negative-sampling",
        "similarity": "cosine",
        "query_vector": "mean of in-vocabulary accepted single-token terms",
        "recommendations_default": DEFAULT_RECOMMENDATIONS,
        "rank_limit_default": DEFAULT_RANK_LIMIT,
        "ranking": "occurrences of accepted lexicon terms / document length in tokens",
        "tokenizer": TOKENIZER_RULES,
        "model_ref": eng.model_ref,
        "vocabulary_size": eng.model.len(),
        "corpus": {
            "documents": eng.corpus.len(),
            "tokens": eng.corpus.total_tokens(),
        },
    }))
    .into_response())
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    q: String,
    #[serde(default, deserialize_with = "opt_num")]
    year_from: Option<i32>,
    #[serde(default, deserialize_with = "opt_num")]
    year_to: Option<i32>,
    #[serde(default, deserialize_with = "opt_text")]
    category: Option<String>,
    #[serde(default, deserialize_with = "opt_text")]
    author: Option<String>,
    #[serde(default, deserialize_with = "opt_num")]
    limit: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SearchResult {
    #[serde(flatten)]
    pub hit: SearchHit,
    pub snippet: Option<Snippet>,
}

async fn search(
    State(st): St,
    ApiQuery(p): ApiQuery<SearchParams>,
) -> ApiResult<Json<Vec<SearchResult>>> {
    let eng = st.engine()?;
    let limit = positive("limit", p.limit, DEFAULT_SEARCH_LIMIT)?;
    let filter = MetadataFilter {
        year_from: p.year_from,
        year_to: p.year_to,
        category: p.category,
        author: p.author,
    };
    let hits = eng.index.keyword_search(&p.q, &filter, Some(limit))?;
    let terms = tokenize(&p.q);
    Ok(Json(
        hits.into_iter()
            .map(|hit| {
                let snippet = eng
                    .corpus
                    .get(&hit.doc_id)
                    .and_then(|d| snippet(d, &terms, SNIPPET_RADIUS));
                SearchResult { hit, snippet }
            })
            .collect(),
    ))
}

#[derive(Debug, Deserialize)]
struct NgramParams {
    term: String,
    #[serde(default, deserialize_with = "opt_num")]
    year_from: Option<i32>,
    #[serde(default, deserialize_with = "opt_num")]
    year_to: Option<i32>,
}

async fn ngrams(State(st): St, ApiQuery(p): ApiQuery<NgramParams>) -> ApiResult<Response> {
    let eng = st.engine()?;
    let years = eng.index.year_totals();
    let from = p
        .year_from
        .or_else(|| years.keys().next().copied())
        .unwrap_or(curatr_core::corpus::MIN_YEAR);
    let to = p
        .year_to
        .or_else(|| years.keys().next_back().copied())
        .unwrap_or(curatr_core::corpus::MAX_YEAR);
    Ok(Json(eng.index.ngram_series(&p.term, from, to)?).into_response())
}

#[derive(Debug, Deserialize)]
struct PageParams {
    #[serde(default, deserialize_with = "opt_num")]
    page: Option<usize>,
    #[serde(default, deserialize_with = "opt_num")]
    page_size: Option<usize>,
}

async fn document(
    State(st): St,
    Path(doc_id): Path<String>,
    ApiQuery(p): ApiQuery<PageParams>,
) -> ApiResult<Response> {
    let eng = st.engine()?;
    let doc = eng
        .corpus
        .get(&doc_id)
        .ok_or_else(|| ApiError::not_found(format!("document '{doc_id}' not found")))?;
    let page = positive("page", p.page, 1)?;
    let page_size = positive("page_size", p.page_size, DEFAULT_PAGE_SIZE)?.min(MAX_PAGE_SIZE);
    let text = eng.corpus.raw_text(&doc_id)?;
    let lines: Vec<&str> = text.lines().collect();
    let total_pages = lines.len().div_ceil(page_size).max(1);
    let shown: Vec<&str> = lines
        .iter()
        .skip((page - 1) * page_size)
        .take(page_size)
        .copied()
        .collect();
    Ok(Json(json!({
        "meta": doc.meta,
        "length": doc.length(),
        "page": page,
        "page_size": page_size,
        "total_pages": total_pages,
        "total_lines": lines.len(),
        "lines": shown,
    }))
    .into_response())
}

#[derive(Debug, Deserialize)]
struct CreateLexicon {
    name: String,
    #[serde(default)]
    seeds: Vec<String>,
}

async fn create_lexicon(
    State(st): St,
    ApiJson(body): ApiJson<CreateLexicon>,
) -> ApiResult<Response> {
    let eng = st.engine()?;
    let lex = Lexicon::create(&body.name, &body.seeds, &eng.model_ref)?;
    let lex = st.store.create_lexicon(lex)?;
    Ok((StatusCode::CREATED, Json(lex)).into_response())
}

async fn list_lexicons(State(st): St) -> ApiResult<Json<Vec<Lexicon>>> {
    Ok(Json(st.store.lexicons()?))
}

async fn get_lexicon(State(st): St, Path(name): Path<String>) -> ApiResult<Json<Lexicon>> {
    Ok(Json(st.store.lexicon(&name)?))
}

#[derive(Debug, Deserialize)]
struct RecommendBody {
    k: Option<usize>,
    version: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RecommendResponse {
    pub version: u64,
    pub query_terms: Vec<String>,
    pub candidates: Vec<SimilarityResult>,
}

async fn recommend(
    State(st): St,
    Path(name): Path<String>,
    ApiJson(body): ApiJson<RecommendBody>,
) -> ApiResult<Json<RecommendResponse>> {
    let eng = st.engine()?;
    let k = positive("k", body.k, DEFAULT_RECOMMENDATIONS)?;
    let (lex, round) = st.store.update_lexicon(&name, body.version, |lex| {
        let round = lex.recommend(&eng.model, k)?;
        lex.open_round(round.clone());
        Ok(round)
    })?;
    Ok(Json(RecommendResponse {
        version: lex.version(),
        query_terms: round.query_terms,
        candidates: round.candidates,
    }))
}

#[derive(Debug, Deserialize)]
struct DecisionsBody {
    version: u64,
    #[serde(default)]
    accept: Vec<String>,
    #[serde(default)]
    reject: Vec<String>,
}

async fn decisions(
    State(st): St,
    Path(name): Path<String>,
    ApiJson(body): ApiJson<DecisionsBody>,
) -> ApiResult<Json<Lexicon>> {
    let (lex, ()) = st.store.update_lexicon(&name, Some(body.version), |lex| {
        lex.record_decisions(&body.accept, &body.reject).map(|_| ())
    })?;
    Ok(Json(lex))
}

#[derive(Debug, Deserialize)]
struct RankBody {
    #[serde(default)]
    filters: MetadataFilter,
    limit: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RankRow {
    #[serde(flatten)]
    pub result: RankedResult,
    pub title: String,
    pub author: String,
    pub year: Option<i32>,
}

fn rank_rows(eng: &Engine, ranking: Vec<RankedResult>) -> Vec<RankRow> {
    ranking
        .into_iter()
        .map(|result| {
            let meta = eng.index.doc(&result.doc_id).map(|d| d.meta.clone());
            let (title, author, year) = meta
                .map(|m| (m.title, m.author, m.year))
                .unwrap_or_default();
            RankRow {
                result,
                title,
                author,
                year,
            }
        })
        .collect()
}

async fn rank(
    State(st): St,
    Path(name): Path<String>,
    ApiJson(body): ApiJson<RankBody>,
) -> ApiResult<Json<Vec<RankRow>>> {
    let eng = st.engine()?;
    let lex = st.store.lexicon(&name)?;
    let limit = positive("limit", body.limit, DEFAULT_RANK_LIMIT)?;
    let ranking = rank_by_lexicon(&eng.index, &lex, &body.filters, limit)?;
    Ok(Json(rank_rows(&eng, ranking)))
}

#[derive(Debug, Deserialize)]
struct CreateSubcorpus {
    name: String,
    lexicon_name: String,
    #[serde(default)]
    filters: MetadataFilter,
    limit: Option<usize>,
}

async fn create_subcorpus(
    State(st): St,
    ApiJson(body): ApiJson<CreateSubcorpus>,
) -> ApiResult<Response> {
    let eng = st.engine()?;
    let lex = st.store.lexicon(&body.lexicon_name)?;
    let limit = positive("limit", body.limit, DEFAULT_RANK_LIMIT)?;
    let ranking = rank_by_lexicon(&eng.index, &lex, &body.filters, limit)?;
    let sub = SubCorpus::new(&body.name, lex.name(), ranking, body.filters)?;
    let sub = st.store.create_subcorpus(sub)?;
    Ok((StatusCode::CREATED, Json(sub)).into_response())
}

async fn list_subcorpora(State(st): St) -> ApiResult<Json<Vec<SubCorpus>>> {
    Ok(Json(st.store.subcorpora()?))
}

async fn get_subcorpus(State(st): St, Path(name): Path<String>) -> ApiResult<Json<SubCorpus>> {
    Ok(Json(st.store.subcorpus(&name)?))
}

#[derive(Debug, Deserialize)]
struct MemberBody {
    doc_id: String,
    version: Option<u64>,
}

async fn exclude(
    State(st): St,
    Path(name): Path<String>,
    ApiJson(body): ApiJson<MemberBody>,
) -> ApiResult<Json<SubCorpus>> {
    let (sub, _) = st
        .store
        .update_subcorpus(&name, body.version, |s| s.exclude_document(&body.doc_id))?;
    Ok(Json(sub))
}

async fn include(
    State(st): St,
    Path(name): Path<String>,
    ApiJson(body): ApiJson<MemberBody>,
) -> ApiResult<Json<SubCorpus>> {
    let (sub, _) = st
        .store
        .update_subcorpus(&name, body.version, |s| s.include_document(&body.doc_id))?;
    Ok(Json(sub))
}

/// The export layout packed as a zip archive.
pub fn export_zip(sub: &SubCorpus, corpus: &curatr_core::Corpus) -> curatr_core::Result<Vec<u8>> {
    let bundle = build_export(sub, corpus)?;
    let mut zip = zip::ZipWriter::new(Cursor::new(Vec::new()));
    let opts = SimpleFileOptions::default().compression_method(zip::CompressionMethod::Deflated);
    let mut dirs = BTreeSet::new();
    for (path, bytes) in &bundle.files {
        if let Some((dir, _)) = path.rsplit_once('/') {
            if dirs.insert(dir.to_owned()) {
                zip.add_directory(dir, opts).map_err(zip_err)?;
            }
        }
        zip.start_file(path.as_str(), opts).map_err(zip_err)?;
        zip.write_all(bytes)
            .map_err(|e| curatr_core::Error::Validation(e.to_string()))?;
    }
    Ok(zip.finish().map_err(zip_err)?.into_inner())
}

fn zip_err(e: zip::result::ZipError) -> curatr_core::Error {
    curatr_core::Error::Validation(format!("archive: {e}"))
}

async fn export(State(st): St, Path(name): Path<String>) -> ApiResult<Response> {
    let eng = st.engine()?;
    let sub = st.store.subcorpus(&name)?;
    let bytes = export_zip(&sub, &eng.corpus)?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/zip".to_owned()),
            (
                header::CONTENT_DISPOSITION,
                format!("attachment; filename=\"{name}.zip\""),
            ),
        ],
        bytes,
    )
        .into_response())
}

async fn reload(State(st): St) -> ApiResult<Response> {
    if !st.config.allow_admin {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            "FORBIDDEN",
            "management endpoints are disabled",
        ));
    }
    let worker = st.clone();
    tokio::task::spawn_blocking(move || worker.load())
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string()))?
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string()))?;
    Ok(Json(json!({ "status": "ready", "components": st.components() })).into_response())
}

//! HTTP corpus generation: `PUT /v1/generate` and `GET /v1/health`.
//!
//! The handler is a pure function of the request body; the same body always
//! produces the same bytes.

use std::io::Write;
use std::net::SocketAddr;

use axum::body::Bytes;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, put};
use axum::Router;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::Serialize;
use serde_json::{Map, Value};
use topicsim_core::corpus_io::Dictionary;
use topicsim_core::ndarray::Array2;
use topicsim_core::types::nested_rows;
use topicsim_core::{generate_corpus, json, GeneratorConfig};

/// Requests implying more tokens (or topic-word cells) than this get 413.
pub const MAX_TOKENS: u128 = 100_000_000;

pub const INCLUDE_GROUND_TRUTH: &str = "include_ground_truth";

#[derive(Serialize)]
struct GroundTruthBody<'a> {
    #[serde(with = "nested_rows")]
    phi: &'a Array2<f64>,
    #[serde(with = "nested_rows")]
    theta: &'a Array2<f64>,
}

#[derive(Serialize)]
struct GenerateResponse<'a> {
    documents: &'a [Vec<usize>],
    dictionary: Dictionary<'a>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ground_truth: Option<GroundTruthBody<'a>>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fields: Vec<String>,
}

fn error(
    status: StatusCode,
    code: &str,
    message: String,
    fields: Vec<String>,
) -> (StatusCode, Vec<u8>) {
    let body = ErrorBody {
        code,
        message,
        fields,
    };
    let bytes = serde_json::to_vec(&body).expect("error bodies serialize");
    (status, bytes)
}

/// Validates and answers one generate request body.
pub fn handle_generate(body: &[u8]) -> (StatusCode, Vec<u8>) {
    let value: Value = match serde_json::from_slice(body) {
        Ok(v) => v,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                "malformed_json",
                e.to_string(),
                vec![],
            )
        }
    };
    let Value::Object(mut object) = value else {
        return error(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_request",
            "request body must be a JSON object".into(),
            vec![],
        );
    };
    let include_truth = match object.remove(INCLUDE_GROUND_TRUTH) {
        None => false,
        Some(Value::Bool(b)) => b,
        Some(_) => {
            return error(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_config",
                format!("{INCLUDE_GROUND_TRUTH} must be a boolean"),
                vec![INCLUDE_GROUND_TRUTH.into()],
            )
        }
    };
    if let Some(resp) = check_keys(&object) {
        return resp;
    }
    let config: GeneratorConfig = match serde_json::from_value(Value::Object(object)) {
        Ok(c) => c,
        Err(e) => {
            return error(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_config",
                e.to_string(),
                vec![],
            )
        }
    };
    let tokens = config.total_tokens();
    let cells = config.k as u128 * config.v as u128;
    if tokens > MAX_TOKENS || cells > MAX_TOKENS {
        return error(
            StatusCode::PAYLOAD_TOO_LARGE,
            "too_large",
            format!("request implies {tokens} tokens and {cells} topic-word cells; the limit is {MAX_TOKENS}"),
            vec![],
        );
    }
    if let Err(e) = config.validate() {
        return error(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_config",
            e.to_string(),
            vec![],
        );
    }
    match generate_corpus(&config) {
        Ok((corpus, truth)) => {
            let response = GenerateResponse {
                documents: &corpus.docs,
                dictionary: Dictionary(&corpus.vocab),
                seed: corpus.seed,
                ground_truth: include_truth.then_some(GroundTruthBody {
                    phi: &truth.phi,
                    theta: &truth.theta,
                }),
            };
            match json::to_vec(&response) {
                Ok(bytes) => (StatusCode::OK, bytes),
                Err(e) => error(
                    StatusCode::INTERNAL_SERVER_ERROR,
                    "internal",
                    e.to_string(),
                    vec![],
                ),
            }
        }
        Err(e) => error(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_config",
            e.to_string(),
            vec![],
        ),
    }
}

/// Unknown keys first, then every missing required key at once.
fn check_keys(object: &Map<String, Value>) -> Option<(StatusCode, Vec<u8>)> {
    let unknown: Vec<String> = object
        .keys()
        .filter(|k| !GeneratorConfig::ALL_FIELDS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Some(error(
            StatusCode::UNPROCESSABLE_ENTITY,
            "unknown_fields",
            format!("unknown fields: {}", unknown.join(", ")),
            unknown,
        ));
    }
    let missing: Vec<String> = GeneratorConfig::REQUIRED_FIELDS
        .iter()
        .filter(|k| !object.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Some(error(
            StatusCode::UNPROCESSABLE_ENTITY,
            "missing_fields",
            format!("missing required fields: {}", missing.join(", ")),
            missing,
        ));
    }
    None
}

/// Whether the client accepts a gzip body.
pub fn accepts_gzip(headers: &HeaderMap) -> bool {
    headers
        .get_all(header::ACCEPT_ENCODING)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(','))
        .any(|item| {
            let mut parts = item.split(';').map(str::trim);
            let coding = parts.next().unwrap_or("");
            let q_zero = parts.any(|p| {
                p.strip_prefix("q=")
                    .and_then(|q| q.parse::<f64>().ok())
                    .is_some_and(|q| q == 0.0)
            });
            (coding.eq_ignore_ascii_case("gzip") || coding == "*") && !q_zero
        })
}

fn json_response(status: StatusCode, body: Vec<u8>, gzip: bool) -> Response {
    let mut headers = HeaderMap::new();
    headers.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static("application/json"),
    );
    headers.insert(header::VARY, HeaderValue::from_static("accept-encoding"));
    if gzip {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        if enc.write_all(&body).is_ok() {
            if let Ok(compressed) = enc.finish() {
                headers.insert(header::CONTENT_ENCODING, HeaderValue::from_static("gzip"));
                return (status, headers, compressed).into_response();
            }
        }
    }
    (status, headers, body).into_response()
}

async fn generate(headers: HeaderMap, body: Bytes) -> Response {
    let gzip = accepts_gzip(&headers);
    let (status, bytes) = tokio::task::spawn_blocking(move || handle_generate(&body))
        .await
        .unwrap_or_else(|e| {
            error(
                StatusCode::INTERNAL_SERVER_ERROR,
                "internal",
                e.to_string(),
                vec![],
            )
        });
    json_response(status, bytes, gzip)
}

async fn health() -> Response {
    json_response(StatusCode::OK, br#"{"status":"ok"}"#.to_vec(), false)
}

pub fn router() -> Router {
    Router::new()
        .route("/v1/generate", put(generate))
        .route("/v1/health", get(health))
}

/// Serves until the process is stopped.
pub async fn serve(listen: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router()).await
}

//! Holistic assessment by an external vision-language model.
//!
//! The rendered heatmap and the quantitative scores are sent to a
//! chat-completions style endpoint. The prompt tells the assessor what
//! present and absent targets look like on the heatmap and to lean on the
//! quantitative verdict when unsure of its own reading. The reply is scanned
//! for a standalone `TRUE` / `FALSE`; when the assessor answers, its answer
//! is final, otherwise the quantitative decision stands.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, LazyLock, Mutex};
use std::time::{Duration, Instant};

use base64::Engine;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{DimensionMask, Thresholds};
use crate::error::{Error, Result};
use crate::render::HeatmapImage;
use crate::scoring::{decide, dimension_checks, QualityScores};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessorConfig {
    pub endpoint_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    /// Cap on reply tokens; the prompt is also kept within this estimate.
    pub token_budget: u32,
    /// Upper bound on concurrent requests through one [`Assessor`].
    pub max_in_flight: usize,
}

impl Default for AssessorConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-4o".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 30.0,
            max_retries: 2,
            token_budget: 300,
            max_in_flight: 4,
        }
    }
}

impl AssessorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(Error::Config(format!(
                "timeout_secs must be positive, got {}",
                self.timeout_secs
            )));
        }
        if self.max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be at least 1".into()));
        }
        if self.endpoint_url.is_empty() {
            return Err(Error::Config("endpoint_url must not be empty".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolisticDecision {
    TargetPresent,
    TargetAbsent,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolisticVerdict {
    pub decision: HolisticDecision,
    /// The parsed reply, or every failure and unparseable reply when unavailable.
    pub raw_response: String,
    pub latency_ms: f64,
    pub attempts: u32,
}

// ---------------------------------------------------------------------------
// Prompt

/// Rough token count used to keep the prompt inside the budget: one token
/// per four characters, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Prompt using the full-mask quantitative verdict.
pub fn build_prompt(scores: &QualityScores, thresholds: &Thresholds) -> String {
    let verdict = decide(scores, thresholds, DimensionMask::ALL).expect("full mask is non-empty");
    build_prompt_with_verdict(scores, thresholds, verdict)
}

pub fn build_prompt_with_verdict(
    scores: &QualityScores,
    thresholds: &Thresholds,
    verdict: bool,
) -> String {
    let checks = dimension_checks(scores, thresholds);
    let mark = |ok: bool| if ok { "pass" } else { "fail" };
    let [s, c, p] = scores.triple();
    format!(
        "You are checking whether the target named in a segmentation query exists in a medical image.\n\
         The attached image is a heatmap of similarity between the segmentation token and each image region (blue = low, red = high).\n\
         \n\
         Quantitative scoring module:\n\
         - Strength {s:.3} (threshold {:.3}): {}\n\
         - Compactness {c:.3} (threshold {:.3}): {}\n\
         - Purity {p:.3} (threshold {:.3}): {}\n\
         Module verdict: {}\n\
         \n\
         Target present: strong responses gather in one compact, coherent region around the target.\n\
         Target absent: responses are weak or irregularly scattered over several disconnected spots.\n\
         \n\
         If you are confident in your own reading of the heatmap, decide mainly from it. \
         If you are not fully confident, give the module verdict heavy weight.\n\
         Reply with exactly one word: TRUE if the target is present, FALSE if it is absent.",
        thresholds.s_thr,
        mark(checks[0]),
        thresholds.c_thr,
        mark(checks[1]),
        thresholds.p_thr,
        mark(checks[2]),
        if verdict { "TRUE" } else { "FALSE" },
    )
}

static DECISION_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(true|false)\b").expect("static regex"));

/// First case-insensitive standalone `TRUE` / `FALSE` in `reply`.
pub fn parse_decision(reply: &str) -> Option<HolisticDecision> {
    let token = DECISION_TOKEN.captures(reply)?.get(1)?.as_str();
    if token.eq_ignore_ascii_case("true") {
        Some(HolisticDecision::TargetPresent)
    } else {
        Some(HolisticDecision::TargetAbsent)
    }
}

// ---------------------------------------------------------------------------
// Transport

pub struct AssessRequest<'a> {
    pub model: &'a str,
    pub prompt: &'a str,
    pub image_png: &'a [u8],
    pub max_tokens: u32,
    pub timeout: Duration,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TransportError {
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("scripted transcript exhausted")]
    Exhausted,
}

/// Sends one request and returns the assistant's reply text.
pub trait AssessorTransport: Send + Sync {
    fn complete(&self, request: &AssessRequest<'_>) -> std::result::Result<String, TransportError>;
}

/// Chat-completions request body with one text part and one base64 PNG part.
pub fn chat_request_body(request: &AssessRequest<'_>) -> Value {
    let image_b64 = base64::engine::general_purpose::STANDARD.encode(request.image_png);
    json!({
        "model": request.model,
        "max_tokens": request.max_tokens,
        "temperature": 0,
        "messages": [{
            "role": "user",
            "content": [
                {"type": "text", "text": request.prompt},
                {"type": "image_url", "image_url": {"url": format!("data:image/png;base64,{image_b64}")}}
            ]
        }]
    })
}

/// Pulls `choices[0].message.content` out of a chat-completions reply. The
/// content may be a plain string or a list of text parts.
pub fn extract_reply(body: &Value) -> std::result::Result<String, TransportError> {
    let content = body
        .pointer("/choices/0/message/content")
        .ok_or_else(|| TransportError::Malformed("missing choices[0].message.content".into()))?;
    match content {
        Value::String(s) => Ok(s.clone()),
        Value::Array(parts) => Ok(parts
            .iter()
            .filter_map(|p| p.get("text").and_then(Value::as_str))
            .collect::<Vec<_>>()
            .join("")),
        other => Err(TransportError::Malformed(format!(
            "unexpected content: {other}"
        ))),
    }
}

#[cfg(feature = "http")]
pub use http::HttpTransport;

#[cfg(feature = "http")]
mod http {
    use super::*;

    /// Blocking HTTPS transport. The API key is read from the configured
    /// environment variable when the transport is built.
    pub struct HttpTransport {
        client: reqwest::blocking::Client,
        endpoint: String,
        api_key: Option<String>,
        api_key_env: String,
    }

    impl HttpTransport {
        pub fn new(config: &AssessorConfig) -> Result<Self> {
            config.validate()?;
            let client = reqwest::blocking::Client::builder()
                .timeout(config.timeout())
                .build()
                .map_err(|e| Error::Config(format!("cannot build HTTP client: {e}")))?;
            Ok(Self {
                client,
                endpoint: config.endpoint_url.clone(),
                api_key: std::env::var(&config.api_key_env)
                    .ok()
                    .filter(|k| !k.is_empty()),
                api_key_env: config.api_key_env.clone(),
            })
        }
    }

    impl AssessorTransport for HttpTransport {
        fn complete(
            &self,
            request: &AssessRequest<'_>,
        ) -> std::result::Result<String, TransportError> {
            let key = self.api_key.as_ref().ok_or_else(|| {
                TransportError::Auth(format!(
                    "environment variable {} is not set",
                    self.api_key_env
                ))
            })?;
            let response = self
                .client
                .post(&self.endpoint)
                .bearer_auth(key)
                .timeout(request.timeout)
                .json(&chat_request_body(request))
                .send()
                .map_err(|e| {
                    if e.is_timeout() {
                        TransportError::Timeout(request.timeout)
                    } else {
                        TransportError::Network(e.to_string())
                    }
                })?;
            let status = response.status();
            let text = response
                .text()
                .map_err(|e| TransportError::Network(e.to_string()))?;
            if status == reqwest::StatusCode::UNAUTHORIZED
                || status == reqwest::StatusCode::FORBIDDEN
            {
                return Err(TransportError::Auth(text));
            }
            if !status.is_success() {
                return Err(TransportError::Http {
                    status: status.as_u16(),
                    body: text,
                });
            }
            let body: Value = serde_json::from_str(&text)
                .map_err(|e| TransportError::Malformed(e.to_string()))?;
            extract_reply(&body)
        }
    }
}

/// One scripted step of a [`MockTransport`] transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptedReply {
    Reply {
        reply: String,
        #[serde(default)]
        delay_ms: u64,
    },
    Failure {
        error: String,
        #[serde(default)]
        delay_ms: u64,
    },
}

/// Offline transport that plays back a transcript of scripted replies.
///
/// A step whose `delay_ms` exceeds the request timeout sleeps for the
/// timeout and then fails with [`TransportError::Timeout`].
#[derive(Debug, Default)]
pub struct MockTransport {
    script: Mutex<VecDeque<ScriptedReply>>,
    calls: AtomicUsize,
}

impl MockTransport {
    pub fn new(script: impl IntoIterator<Item = ScriptedReply>) -> Self {
        Self {
            script: Mutex::new(script.into_iter().collect()),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn replies<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self::new(replies.into_iter().map(|r| ScriptedReply::Reply {
            reply: r.into(),
            delay_ms: 0,
        }))
    }

    /// Reads a JSON list of `{"reply": ...}` / `{"error": ...}` steps.
    pub fn from_transcript(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let script: Vec<ScriptedReply> = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("malformed transcript: {e}"),
        })?;
        Ok(Self::new(script))
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl AssessorTransport for MockTransport {
    fn complete(&self, request: &AssessRequest<'_>) -> std::result::Result<String, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let step = self
            .script
            .lock()
            .expect("transcript lock poisoned")
            .pop_front()
            .ok_or(TransportError::Exhausted)?;
        let (delay_ms, outcome) = match step {
            ScriptedReply::Reply { reply, delay_ms } => (delay_ms, Ok(reply)),
            ScriptedReply::Failure { error, delay_ms } => {
                (delay_ms, Err(TransportError::Network(error)))
            }
        };
        let delay = Duration::from_millis(delay_ms);
        if delay > request.timeout {
            std::thread::sleep(request.timeout);
            return Err(TransportError::Timeout(request.timeout));
        }
        std::thread::sleep(delay);
        outcome
    }
}

// ---------------------------------------------------------------------------
// Assessment

/// Submits the heatmap and prompt, retrying failed or unparseable replies up
/// to `config.max_retries` times before giving up as unavailable.
pub fn assess(
    image: &HeatmapImage,
    prompt: &str,
    config: &AssessorConfig,
    transport: &dyn AssessorTransport,
) -> HolisticVerdict {
    let started = Instant::now();
    let request = AssessRequest {
        model: &config.model_name,
        prompt,
        image_png: &image.png,
        max_tokens: config.token_budget,
        timeout: config.timeout(),
    };
    let mut failures = Vec::new();
    let mut attempts = 0;
    while attempts <= config.max_retries {
        attempts += 1;
        match transport.complete(&request) {
            Ok(reply) => match parse_decision(&reply) {
                Some(decision) => {
                    return HolisticVerdict {
                        decision,
                        raw_response: reply,
                        latency_ms: started.elapsed().as_secs_f64() * 1e3,
                        attempts,
                    }
                }
                None => failures.push(format!("attempt {attempts}: unparseable reply: {reply}")),
            },
            Err(e) => failures.push(format!("attempt {attempts}: {e}")),
        }
    }
    HolisticVerdict {
        decision: HolisticDecision::Unavailable,
        raw_response: failures.join("\n"),
        latency_ms: started.elapsed().as_secs_f64() * 1e3,
        attempts,
    }
}

/// Counting semaphore bounding in-flight assessor requests.
#[derive(Debug)]
struct Limiter {
    available: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a Limiter);

impl Limiter {
    fn new(n: usize) -> Self {
        Self {
            available: Mutex::new(n),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut available = self.available.lock().expect("limiter lock poisoned");
        while *available == 0 {
            available = self.freed.wait(available).expect("limiter lock poisoned");
        }
        *available -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().expect("limiter lock poisoned") += 1;
        self.0.freed.notify_one();
    }
}

/// A configured assessor shared across threads.
#[derive(Clone)]
pub struct Assessor {
    config: AssessorConfig,
    transport: Arc<dyn AssessorTransport>,
    limiter: Arc<Limiter>,
}

impl Assessor {
    pub fn new(config: AssessorConfig, transport: Arc<dyn AssessorTransport>) -> Result<Self> {
        config.validate()?;
        let limiter = Arc::new(Limiter::new(config.max_in_flight));
        Ok(Self {
            config,
            transport,
            limiter,
        })
    }

    pub fn config(&self) -> &AssessorConfig {
        &self.config
    }

    pub fn assess(&self, image: &HeatmapImage, prompt: &str) -> HolisticVerdict {
        let _permit = self.limiter.acquire();
        assess(image, prompt, &self.config, self.transport.as_ref())
    }
}

impl std::fmt::Debug for Assessor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Assessor")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

/// Final decision and a rationale naming which path decided.
pub fn combine(quantitative: bool, holistic: Option<&HolisticVerdict>) -> (bool, String) {
    let word = |present: bool| if present { "present" } else { "absent" };
    match holistic.map(|h| h.decision) {
        Some(HolisticDecision::TargetPresent) | Some(HolisticDecision::TargetAbsent) => {
            let judged = holistic.map(|h| h.decision) == Some(HolisticDecision::TargetPresent);
            let rationale = if judged == quantitative {
                format!(
                    "holistic assessor judged target {}, agreeing with the quantitative verdict",
                    word(judged)
                )
            } else {
                format!(
                    "holistic override: assessor judged target {} against a quantitative verdict of {}",
                    word(judged),
                    word(quantitative)
                )
            };
            (judged, rationale)
        }
        Some(HolisticDecision::Unavailable) => (
            quantitative,
            format!(
                "holistic assessor unavailable; quantitative fallback: target {}",
                word(quantitative)
            ),
        ),
        None => (
            quantitative,
            format!("quantitative decision only: target {}", word(quantitative)),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::ResponseMap;
    use crate::render::{render_heatmap, Colormap};

    fn image() -> HeatmapImage {
        let map = ResponseMap::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        render_heatmap(&map, 2, Colormap::Turbo).unwrap()
    }

    fn verdict(decision: HolisticDecision) -> HolisticVerdict {
        HolisticVerdict {
            decision,
            raw_response: String::new(),
            latency_ms: 0.0,
            attempts: 1,
        }
    }

    #[test]
    fn prompt_contains_scores_and_answer_tokens() {
        let scores = QualityScores::from_triple(0.8, 0.5, 0.9);
        let prompt = build_prompt(&scores, &Thresholds::default());
        for needle in [
            "0.8",
            "0.5",
            "0.9",
            "0.475",
            "TRUE",
            "FALSE",
            "Module verdict: TRUE",
        ] {
            assert!(prompt.contains(needle), "missing {needle}");
        }
        assert_eq!(prompt, build_prompt(&scores, &Thresholds::default()));
    }

    #[test]
    fn prompt_reports_failing_dimension() {
        let scores = QualityScores::from_triple(0.8, 0.3, 0.9);
        let prompt = build_prompt(&scores, &Thresholds::default());
        assert!(prompt.contains("Compactness 0.300 (threshold 0.400): fail"));
        assert!(prompt.contains("Module verdict: FALSE"));
    }

    #[test]
    fn prompt_fits_token_budget() {
        let scores = QualityScores::from_triple(0.731, 0.412, 0.999);
        let prompt = build_prompt(&scores, &Thresholds::default());
        let budget = AssessorConfig::default().token_budget as usize;
        assert!(
            estimate_tokens(&prompt) <= budget,
            "{} tokens",
            estimate_tokens(&prompt)
        );
    }

    #[test]
    fn parser_contract() {
        use HolisticDecision::*;
        assert_eq!(parse_decision("TRUE"), Some(TargetPresent));
        assert_eq!(
            parse_decision("I believe the answer is false."),
            Some(TargetAbsent)
        );
        assert_eq!(
            parse_decision("True, though FALSE alarms happen"),
            Some(TargetPresent)
        );
        assert_eq!(parse_decision("untrue"), None);
        assert_eq!(parse_decision("falsehood"), None);
        assert_eq!(parse_decision(""), None);
    }

    #[test]
    fn mock_reply_true_is_present() {
        let t = MockTransport::replies(["TRUE"]);
        let v = assess(&image(), "p", &AssessorConfig::default(), &t);
        assert_eq!(v.decision, HolisticDecision::TargetPresent);
        assert_eq!(v.attempts, 1);
    }

    #[test]
    fn retries_then_succeeds() {
        let t = MockTransport::new([
            ScriptedReply::Failure {
                error: "503".into(),
                delay_ms: 0,
            },
            ScriptedReply::Reply {
                reply: "no idea".into(),
                delay_ms: 0,
            },
            ScriptedReply::Reply {
                reply: "FALSE".into(),
                delay_ms: 0,
            },
        ]);
        let config = AssessorConfig {
            max_retries: 2,
            ..AssessorConfig::default()
        };
        let v = assess(&image(), "p", &config, &t);
        assert_eq!(v.decision, HolisticDecision::TargetAbsent);
        assert_eq!(v.attempts, 3);
        assert_eq!(t.calls(), 3);
    }

    #[test]
    fn exhausted_retries_are_unavailable_with_context() {
        let t = MockTransport::new([
            ScriptedReply::Failure {
                error: "boom".into(),
                delay_ms: 0,
            },
            ScriptedReply::Reply {
                reply: "maybe".into(),
                delay_ms: 0,
            },
            ScriptedReply::Reply {
                reply: "TRUE".into(),
                delay_ms: 0,
            },
        ]);
        let config = AssessorConfig {
            max_retries: 1,
            ..AssessorConfig::default()
        };
        let v = assess(&image(), "p", &config, &t);
        assert_eq!(v.decision, HolisticDecision::Unavailable);
        assert_eq!(t.calls(), 2);
        assert!(v.raw_response.contains("boom") && v.raw_response.contains("maybe"));
    }

    #[test]
    fn slow_reply_times_out() {
        let t = MockTransport::new([ScriptedReply::Reply {
            reply: "TRUE".into(),
            delay_ms: 10_000,
        }]);
        let config = AssessorConfig {
            timeout_secs: 0.02,
            max_retries: 0,
            ..AssessorConfig::default()
        };
        let started = Instant::now();
        let v = assess(&image(), "p", &config, &t);
        assert_eq!(v.decision, HolisticDecision::Unavailable);
        assert!(v.raw_response.contains("timed out"));
        assert!(started.elapsed() < Duration::from_secs(1));
    }

    #[test]
    fn transcript_file_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        fs::write(
            &path,
            r#"[{"error": "down"}, {"reply": "TRUE", "delay_ms": 1}]"#,
        )
        .unwrap();
        let t = MockTransport::from_transcript(&path).unwrap();
        let v = assess(&image(), "p", &AssessorConfig::default(), &t);
        assert_eq!(v.decision, HolisticDecision::TargetPresent);
        assert_eq!(v.attempts, 2);
    }

    #[test]
    fn request_body_shape() {
        let png = [1u8, 2, 3];
        let req = AssessRequest {
            model: "m",
            prompt: "hello",
            image_png: &png,
            max_tokens: 300,
            timeout: Duration::from_secs(1),
        };
        let body = chat_request_body(&req);
        assert_eq!(body["model"], "m");
        assert_eq!(body["max_tokens"], 300);
        assert_eq!(body["messages"][0]["content"][0]["text"], "hello");
        assert_eq!(
            body["messages"][0]["content"][1]["image_url"]["url"],
            "data:image/png;base64,AQID"
        );
    }

    #[test]
    fn reply_extraction() {
        let plain = json!({"choices": [{"message": {"content": "TRUE"}}]});
        assert_eq!(extract_reply(&plain).unwrap(), "TRUE");
        let parts = json!({"choices": [{"message": {"content": [{"type": "text", "text": "FAL"}, {"text": "SE"}]}}]});
        assert_eq!(extract_reply(&parts).unwrap(), "FALSE");
        assert!(extract_reply(&json!({"error": "x"})).is_err());
    }

    #[test]
    fn combine_table_is_total() {
        use HolisticDecision::*;
        for q in [true, false] {
            let (f, r) = combine(q, Some(&verdict(TargetPresent)));
            assert!(f);
            assert_eq!(r.contains("override"), !q);
            let (f, r) = combine(q, Some(&verdict(TargetAbsent)));
            assert!(!f);
            assert_eq!(r.contains("override"), q);
            let (f, r) = combine(q, Some(&verdict(Unavailable)));
            assert_eq!(f, q);
            assert!(r.contains("quantitative fallback"));
            assert_eq!(combine(q, None).0, q);
        }
    }

    #[test]
    fn limiter_bounds_concurrency() {
        struct Probe {
            current: AtomicUsize,
            peak: AtomicUsize,
        }
        impl AssessorTransport for Probe {
            fn complete(
                &self,
                _: &AssessRequest<'_>,
            ) -> std::result::Result<String, TransportError> {
                let now = self.current.fetch_add(1, Ordering::SeqCst) + 1;
                self.peak.fetch_max(now, Ordering::SeqCst);
                std::thread::sleep(Duration::from_millis(20));
                self.current.fetch_sub(1, Ordering::SeqCst);
                Ok("TRUE".into())
            }
        }
        let probe = Arc::new(Probe {
            current: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        });
        let config = AssessorConfig {
            max_in_flight: 2,
            ..AssessorConfig::default()
        };
        let assessor = Assessor::new(config, probe.clone()).unwrap();
        let img = image();
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| assessor.assess(&img, "p"));
            }
        });
        assert!(probe.peak.load(Ordering::SeqCst) <= 2);
    }
}

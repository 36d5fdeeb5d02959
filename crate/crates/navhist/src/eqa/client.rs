//! Generation-service contract: wire types, a deterministic mock client, an
//! HTTP client, and retry-with-backoff orchestration.
//!
//! The wire request is an HTTP POST with the JSON body
//! `{"role_preamble", "exemplars", "instruction", "frame_refs", "meta"}`;
//! the response is `{"text": "..."}` where the text carries the three headed
//! sections. `EQA_ENDPOINT` selects the HTTP backend (absent means mock) and
//! `EQA_RETRY_LIMIT` bounds retries (default 3).

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::{parse_response, EqaPrompt, Exemplar, StructuredResponse};

pub const ENV_ENDPOINT: &str = "EQA_ENDPOINT";
pub const ENV_RETRY_LIMIT: &str = "EQA_RETRY_LIMIT";
pub const DEFAULT_RETRY_LIMIT: u32 = 3;

/// JSON body POSTed to the generation service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRequest {
    pub role_preamble: String,
    pub exemplars: Vec<Exemplar>,
    pub instruction: String,
    pub frame_refs: Vec<u64>,
    pub meta: BTreeMap<String, String>,
}

impl WireRequest {
    pub fn from_prompt(prompt: &EqaPrompt, meta: &BTreeMap<String, String>) -> Self {
        WireRequest {
            role_preamble: prompt.role_preamble.clone(),
            exemplars: prompt.exemplars.clone(),
            instruction: prompt.instruction.clone(),
            frame_refs: prompt.frame_refs.clone(),
            meta: meta.clone(),
        }
    }
}

/// JSON body returned by the generation service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireResponse {
    pub text: String,
}

/// Client-level failure. Transient failures are retried; fatal ones abort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    Transient(String),
    Fatal(String),
}

impl TransportError {
    pub fn message(&self) -> &str {
        match self {
            TransportError::Transient(m) | TransportError::Fatal(m) => m,
        }
    }
}

pub trait GenerationClient {
    fn request(&self, req: &WireRequest) -> std::result::Result<WireResponse, TransportError>;
}

impl<T: GenerationClient + ?Sized> GenerationClient for Box<T> {
    fn request(&self, req: &WireRequest) -> std::result::Result<WireResponse, TransportError> {
        (**self).request(req)
    }
}

/// Deterministic in-process client: echoes a canned three-section template
/// keyed by the instruction hash. Can inject transient failures for the
/// first `fail_times` calls.
#[derive(Debug, Default)]
pub struct MockClient {
    fail_times: u32,
    calls: AtomicU32,
    /// When set, the canned text drops the named sections (for exercising
    /// unparseable responses).
    drop_sections: Vec<&'static str>,
}

impl MockClient {
    pub fn new() -> Self {
        MockClient::default()
    }

    pub fn with_failures(fail_times: u32) -> Self {
        MockClient { fail_times, ..MockClient::default() }
    }

    pub fn dropping_sections(sections: &[&'static str]) -> Self {
        MockClient { drop_sections: sections.to_vec(), ..MockClient::default() }
    }

    pub fn calls(&self) -> u32 {
        self.calls.load(Ordering::SeqCst)
    }

    fn canned_text(&self, req: &WireRequest) -> String {
        let digest = Sha256::digest(req.instruction.as_bytes());
        let key: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
        let n = req.frame_refs.len();
        let mut out = String::new();
        if !self.drop_sections.contains(&"scene") {
            out.push_str(&format!(
                "Scene: Synthetic scene {key} observed over {n} frames of the approach.\n"
            ));
        }
        if !self.drop_sections.contains(&"plan") {
            out.push_str(&format!(
                "Plan: Follow route {key} toward the target region and stop at the goal.\n"
            ));
        }
        if !self.drop_sections.contains(&"reasoning") {
            out.push_str(&format!(
                "Reasoning: Objects matching \"{}\" are typically found along route {key}.\n",
                req.instruction
            ));
        }
        out
    }
}

impl GenerationClient for MockClient {
    fn request(&self, req: &WireRequest) -> std::result::Result<WireResponse, TransportError> {
        let call = self.calls.fetch_add(1, Ordering::SeqCst);
        if call < self.fail_times {
            return Err(TransportError::Transient(format!(
                "injected failure {} of {}",
                call + 1,
                self.fail_times
            )));
        }
        Ok(WireResponse { text: self.canned_text(req) })
    }
}

/// Blocking HTTP client for a real generation endpoint. Connection errors,
/// timeouts and 5xx responses are transient; other failures are fatal.
pub struct HttpClient {
    endpoint: String,
    client: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(endpoint: &str) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("http client: {e}")))?;
        Ok(HttpClient { endpoint: endpoint.to_string(), client })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl GenerationClient for HttpClient {
    fn request(&self, req: &WireRequest) -> std::result::Result<WireResponse, TransportError> {
        let resp = self
            .client
            .post(&self.endpoint)
            .json(req)
            .send()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() {
            return Err(TransportError::Transient(format!("server error {status}")));
        }
        if !status.is_success() {
            return Err(TransportError::Fatal(format!("unexpected status {status}")));
        }
        resp.json::<WireResponse>()
            .map_err(|e| TransportError::Fatal(format!("invalid response body: {e}")))
    }
}

/// Drives a client with per-call exponential backoff on transient failures.
pub struct Generator<C: GenerationClient> {
    client: C,
    retry_limit: u32,
    backoff_base: Duration,
}

impl<C: GenerationClient> Generator<C> {
    pub fn new(client: C, retry_limit: u32) -> Self {
        Generator { client, retry_limit, backoff_base: Duration::from_millis(100) }
    }

    pub fn with_backoff_base(mut self, base: Duration) -> Self {
        self.backoff_base = base;
        self
    }

    pub fn client(&self) -> &C {
        &self.client
    }

    /// Send the prompt, retry transient failures up to the retry limit, and
    /// parse the response text into its three sections.
    pub fn generate(&self, prompt: &EqaPrompt) -> Result<StructuredResponse> {
        self.generate_with_meta(prompt, &BTreeMap::new())
    }

    pub fn generate_with_meta(
        &self,
        prompt: &EqaPrompt,
        meta: &BTreeMap<String, String>,
    ) -> Result<StructuredResponse> {
        let req = WireRequest::from_prompt(prompt, meta);
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            match self.client.request(&req) {
                Ok(resp) => return parse_response(&resp.text),
                Err(TransportError::Fatal(msg)) => {
                    return Err(Error::Generation { attempts, msg });
                }
                Err(TransportError::Transient(msg)) => {
                    let retries_used = attempts - 1;
                    if retries_used >= self.retry_limit {
                        return Err(Error::Generation { attempts, msg });
                    }
                    if !self.backoff_base.is_zero() {
                        std::thread::sleep(self.backoff_base * 2u32.pow(retries_used));
                    }
                }
            }
        }
    }
}

/// Build a generator from the environment: `EQA_ENDPOINT` selects the HTTP
/// backend (absent means mock), `EQA_RETRY_LIMIT` bounds retries.
pub fn generator_from_env() -> Result<Generator<Box<dyn GenerationClient>>> {
    let retry_limit = match std::env::var(ENV_RETRY_LIMIT) {
        Ok(v) => v
            .parse::<u32>()
            .map_err(|_| Error::InvalidConfig(format!("{ENV_RETRY_LIMIT}={v} is not a count")))?,
        Err(_) => DEFAULT_RETRY_LIMIT,
    };
    let client: Box<dyn GenerationClient> = match std::env::var(ENV_ENDPOINT) {
        Ok(url) => Box::new(HttpClient::new(&url)?),
        Err(_) => Box::new(MockClient::new()),
    };
    Ok(Generator::new(client, retry_limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqa::{build_prompt, default_exemplars};

    fn prompt() -> EqaPrompt {
        build_prompt("find a vase", &[3, 4, 5], &default_exemplars()).unwrap()
    }

    fn no_backoff<C: GenerationClient>(client: C, limit: u32) -> Generator<C> {
        Generator::new(client, limit).with_backoff_base(Duration::ZERO)
    }

    #[test]
    fn mock_is_deterministic() {
        let g = no_backoff(MockClient::new(), 3);
        let a = g.generate(&prompt()).unwrap();
        let b = g.generate(&prompt()).unwrap();
        assert_eq!(a, b);
        assert!(a.commonsense.contains("find a vase"));
    }

    #[test]
    fn mock_output_keyed_by_instruction() {
        let g = no_backoff(MockClient::new(), 3);
        let a = g.generate(&prompt()).unwrap();
        let other = build_prompt("find a bed", &[3, 4, 5], &default_exemplars()).unwrap();
        let b = g.generate(&other).unwrap();
        assert_ne!(a.scene_description, b.scene_description);
    }

    #[test]
    fn two_section_response_is_unparseable() {
        let g = no_backoff(MockClient::dropping_sections(&["plan"]), 3);
        let err = g.generate(&prompt()).unwrap_err();
        assert!(matches!(err, Error::MissingSection("path_planning")));
    }

    #[test]
    fn retries_cover_two_failures_with_limit_three() {
        let g = no_backoff(MockClient::with_failures(2), 3);
        let resp = g.generate(&prompt()).unwrap();
        assert!(!resp.scene_description.is_empty());
        assert_eq!(g.client().calls(), 3);
    }

    #[test]
    fn transport_error_after_retry_limit() {
        let g = no_backoff(MockClient::with_failures(10), 3);
        let err = g.generate(&prompt()).unwrap_err();
        match err {
            Error::Generation { attempts, .. } => assert_eq!(attempts, 4),
            other => panic!("unexpected error: {other}"),
        }
        assert_eq!(g.client().calls(), 4);
    }

    #[test]
    fn retry_limit_zero_fails_on_first_transient() {
        let g = no_backoff(MockClient::with_failures(1), 0);
        let err = g.generate(&prompt()).unwrap_err();
        assert!(matches!(err, Error::Generation { attempts: 1, .. }));
    }

    #[test]
    fn wire_request_carries_prompt_and_meta() {
        let mut meta = BTreeMap::new();
        meta.insert("house_seed".to_string(), "1".to_string());
        let req = WireRequest::from_prompt(&prompt(), &meta);
        let json = serde_json::to_string(&req).unwrap();
        assert!(json.contains("\"role_preamble\""));
        assert!(json.contains("\"frame_refs\":[3,4,5]"));
        assert!(json.contains("\"house_seed\":\"1\""));
        let back: WireRequest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, req);
    }
}

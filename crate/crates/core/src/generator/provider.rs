//! Completion providers: a JSON-over-HTTP client and a scripted mock.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Exchange, Strategy};
use crate::corpus::ContextMode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider timed out: {0}")]
    Timeout(String),
    #[error("provider rejected request: {0}")]
    Rejected(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stop,
    Length,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub stop_reason: StopReason,
}

/// Identifies what a request is for; the mock uses it to pick its script.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestKey {
    pub template_id: String,
    pub mode: ContextMode,
    pub temperature: f64,
    /// Candidate index of the first requested completion.
    pub first_index: usize,
    pub kind: RequestKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestKind {
    Sample,
    /// Continuation round, starting at 1.
    Continue(u32),
    /// Regeneration with compiler diagnostics in memory.
    Feedback,
}

#[derive(Debug, Clone)]
pub struct CompletionRequest<'a> {
    pub key: RequestKey,
    pub prompt: &'a str,
    pub history: &'a [Exchange],
    pub temperature: f64,
    pub max_tokens: u32,
    pub n: usize,
    pub strategy: Strategy,
}

pub trait Provider: Send + Sync {
    fn id(&self) -> &str;

    fn supports(&self, strategy: Strategy) -> bool;

    /// Exactly `req.n` completions, or an error.
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Vec<Completion>, ProviderError>;
}

pub fn temperature_dir(t: f64) -> String {
    format!("t{t}")
}

/// Reads scripted responses from
/// `<dir>/<template>/<mode>/t<temperature>/<index>[.cont<round>|.fix]<suffix>`
/// where the suffix is `.txt` (normal stop), `.length.txt` (token-limit
/// stop) or `.timeout` (the request times out).
#[derive(Debug, Clone)]
pub struct MockProvider {
    id: String,
    dir: PathBuf,
}

impl MockProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        MockProvider { id: "mock".into(), dir: dir.into() }
    }

    pub fn with_id(mut self, id: &str) -> Self {
        self.id = id.into();
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn script(&self, key: &RequestKey, index: usize) -> Result<Completion, ProviderError> {
        let base = self.dir.join(&key.template_id).join(key.mode.as_str()).join(temperature_dir(key.temperature));
        let stem = match key.kind {
            RequestKind::Sample => index.to_string(),
            RequestKind::Continue(r) => format!("{index}.cont{r}"),
            RequestKind::Feedback => format!("{index}.fix"),
        };
        if base.join(format!("{stem}.timeout")).exists() {
            return Err(ProviderError::Timeout(format!("scripted timeout for {}", base.join(&stem).display())));
        }
        for (suffix, stop_reason) in [(".txt", StopReason::Stop), (".length.txt", StopReason::Length)] {
            let path = base.join(format!("{stem}{suffix}"));
            if let Ok(text) = fs::read_to_string(&path) {
                return Ok(Completion { text, stop_reason });
            }
        }
        Err(ProviderError::Rejected(format!("no scripted response {}", base.join(stem).display())))
    }
}

impl Provider for MockProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn supports(&self, _: Strategy) -> bool {
        true
    }

    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Vec<Completion>, ProviderError> {
        (req.key.first_index..req.key.first_index + req.n).map(|i| self.script(&req.key, i)).collect()
    }
}

/// A provider that answers every request with the same text. Useful where
/// only prompts matter.
#[derive(Debug, Clone)]
pub struct EchoProvider {
    pub text: String,
}

impl Provider for EchoProvider {
    fn id(&self) -> &str {
        "echo"
    }

    fn supports(&self, _: Strategy) -> bool {
        true
    }

    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Vec<Completion>, ProviderError> {
        Ok(vec![Completion { text: self.text.clone(), stop_reason: StopReason::Stop }; req.n])
    }
}

pub const ENV_URL: &str = "TESTGEN_PROVIDER_URL";
pub const ENV_TOKEN: &str = "TESTGEN_PROVIDER_TOKEN";

#[derive(Debug, Serialize)]
struct WireRequest<'a> {
    prompt: &'a str,
    history: &'a [Exchange],
    temperature: f64,
    max_tokens: u32,
    n: usize,
    #[serde(flatten)]
    extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Deserialize)]
struct WireChoice {
    text: String,
    #[serde(default)]
    stop_reason: Option<String>,
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

/// Generic chat/completion endpoint: POST
/// `{prompt, history, temperature, max_tokens, n}` returning
/// `{choices: [{text, stop_reason}]}`.
pub struct HttpProvider {
    id: String,
    url: String,
    token: Option<String>,
    agent: ureq::Agent,
    /// Request field carrying the beam width; beam search is rejected
    /// without one.
    beam_param: Option<String>,
    min_interval: Duration,
    last_request: Mutex<Option<Instant>>,
}

impl HttpProvider {
    pub fn new(id: &str, url: &str, token: Option<String>, timeout: Duration) -> Self {
        HttpProvider {
            id: id.into(),
            url: url.into(),
            token,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            beam_param: None,
            min_interval: Duration::ZERO,
            last_request: Mutex::new(None),
        }
    }

    /// Endpoint and token from `TESTGEN_PROVIDER_URL` / `TESTGEN_PROVIDER_TOKEN`.
    pub fn from_env(id: &str, timeout: Duration) -> Option<Self> {
        let url = std::env::var(ENV_URL).ok()?;
        Some(Self::new(id, &url, std::env::var(ENV_TOKEN).ok(), timeout))
    }

    pub fn with_beam_param(mut self, name: &str) -> Self {
        self.beam_param = Some(name.into());
        self
    }

    /// Global rate limit shared by every caller of this client.
    pub fn with_rate_limit(mut self, requests_per_second: f64) -> Self {
        if requests_per_second > 0.0 {
            self.min_interval = Duration::from_secs_f64(1.0 / requests_per_second);
        }
        self
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(prev) = *last {
            let wait = self.min_interval.saturating_sub(prev.elapsed());
            if !wait.is_zero() {
                std::thread::sleep(wait);
            }
        }
        *last = Some(Instant::now());
    }
}

impl Provider for HttpProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn supports(&self, strategy: Strategy) -> bool {
        strategy == Strategy::Random || self.beam_param.is_some()
    }

    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Vec<Completion>, ProviderError> {
        let mut extra = serde_json::Map::new();
        if req.strategy == Strategy::Beam {
            let name = self.beam_param.as_ref().ok_or_else(|| ProviderError::Rejected("beam search unsupported".into()))?;
            extra.insert(name.clone(), serde_json::json!(req.n));
        }
        let body = WireRequest {
            prompt: req.prompt,
            history: req.history,
            temperature: req.temperature,
            max_tokens: req.max_tokens,
            n: req.n,
            extra,
        };
        self.throttle();
        let mut call = self.agent.post(&self.url).set("Content-Type", "application/json");
        if let Some(token) = &self.token {
            call = call.set("Authorization", &format!("Bearer {token}"));
        }
        let resp = call.send_json(&body).map_err(|e| match e {
            ureq::Error::Status(code, r) => ProviderError::Rejected(format!("HTTP {code}: {}", r.into_string().unwrap_or_default())),
            ureq::Error::Transport(t) => {
                let msg = t.to_string();
                if msg.contains("timed out") || msg.contains("Timeout") {
                    ProviderError::Timeout(msg)
                } else {
                    ProviderError::Rejected(msg)
                }
            }
        })?;
        let parsed: WireResponse = resp.into_json().map_err(|e| ProviderError::Rejected(format!("bad response: {e}")))?;
        if parsed.choices.len() != req.n {
            return Err(ProviderError::Rejected(format!("expected {} choices, got {}", req.n, parsed.choices.len())));
        }
        Ok(parsed
            .choices
            .into_iter()
            .map(|c| Completion {
                text: c.text,
                stop_reason: match c.stop_reason.as_deref() {
                    Some("length") | Some("max_tokens") => StopReason::Length,
                    _ => StopReason::Stop,
                },
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::Role;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    /// One-shot HTTP server: returns the request body it saw.
    fn serve_once(status: u16, body: &'static str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/complete", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            let mut auth = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = line.trim().to_string();
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
            format!("{auth}\n{}", String::from_utf8(buf).unwrap())
        });
        (url, handle)
    }

    fn request<'a>(history: &'a [Exchange], n: usize, strategy: Strategy) -> CompletionRequest<'a> {
        CompletionRequest {
            key: RequestKey {
                template_id: "t".into(),
                mode: ContextMode::NoContext,
                temperature: 0.2,
                first_index: 0,
                kind: RequestKind::Sample,
            },
            prompt: "int main() {",
            history,
            temperature: 0.2,
            max_tokens: 2048,
            n,
            strategy,
        }
    }

    #[test]
    fn http_wire_format() {
        let (url, server) =
            serve_once(200, r#"{"choices":[{"text":"return 0;\n}","stop_reason":"stop"},{"text":"x","stop_reason":"length"}]}"#);
        let p = HttpProvider::new("http", &url, Some("secret".into()), Duration::from_secs(5));
        let history = [Exchange { role: Role::System, text: "ctx".into() }];
        let out = p.complete(&request(&history, 2, Strategy::Random)).unwrap();
        assert_eq!(out[0].stop_reason, StopReason::Stop);
        assert_eq!(out[1].stop_reason, StopReason::Length);
        let seen = server.join().unwrap();
        let (auth, body) = seen.split_once('\n').unwrap();
        assert_eq!(auth, "Authorization: Bearer secret");
        let v: serde_json::Value = serde_json::from_str(body).unwrap();
        assert_eq!(v["prompt"], "int main() {");
        assert_eq!(v["n"], 2);
        assert_eq!(v["max_tokens"], 2048);
        assert_eq!(v["temperature"], 0.2);
        assert_eq!(v["history"][0]["role"], "system");
        assert_eq!(v["history"][0]["text"], "ctx");
    }

    #[test]
    fn http_errors_are_rejections() {
        let (url, server) = serve_once(503, r#"{"error":"busy"}"#);
        let p = HttpProvider::new("http", &url, None, Duration::from_secs(5));
        let err = p.complete(&request(&[], 1, Strategy::Random)).unwrap_err();
        assert!(matches!(err, ProviderError::Rejected(ref m) if m.contains("503")));
        server.join().unwrap();

        let (url, server) = serve_once(200, r#"{"choices":[]}"#);
        let p = HttpProvider::new("http", &url, None, Duration::from_secs(5));
        assert!(p.complete(&request(&[], 1, Strategy::Random)).is_err());
        server.join().unwrap();
    }

    #[test]
    fn http_beam_needs_native_parameter() {
        let p = HttpProvider::new("http", "http://127.0.0.1:9", None, Duration::from_secs(1));
        assert!(!p.supports(Strategy::Beam));
        let (url, server) = serve_once(200, r#"{"choices":[{"text":"a"}]}"#);
        let p = HttpProvider::new("http", &url, None, Duration::from_secs(5)).with_beam_param("num_beams");
        assert!(p.supports(Strategy::Beam));
        p.complete(&request(&[], 1, Strategy::Beam)).unwrap();
        let seen = server.join().unwrap();
        assert!(seen.contains("\"num_beams\":1"));
    }

    #[test]
    fn mock_reads_scripts() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("t/no_context/t0.2");
        fs::create_dir_all(&base).unwrap();
        fs::write(base.join("0.txt"), "a").unwrap();
        fs::write(base.join("1.length.txt"), "b").unwrap();
        fs::write(base.join("2.timeout"), "").unwrap();
        let mock = MockProvider::new(dir.path());
        let out = mock.complete(&request(&[], 2, Strategy::Random)).unwrap();
        assert_eq!(out[0], Completion { text: "a".into(), stop_reason: StopReason::Stop });
        assert_eq!(out[1].stop_reason, StopReason::Length);
        let mut req = request(&[], 1, Strategy::Random);
        req.key.first_index = 2;
        assert!(matches!(mock.complete(&req), Err(ProviderError::Timeout(_))));
        req.key.first_index = 3;
        assert!(matches!(mock.complete(&req), Err(ProviderError::Rejected(_))));
    }
}

use super::*;
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use testgen_core::corpus::{self, ContextMode, ProjectManifest, TestTemplate};
use testgen_core::generator::{
    self, Completion, CompletionRequest, GenerationLedger, Generator, MatrixSpec, MockProvider, Provider, ProviderError, RequestKind,
    SamplingConfig, StopReason, Strategy,
};

/// Everything sent to the provider, as one text per request.
pub struct Recording<P> {
    pub inner: P,
    pub sent: Mutex<Vec<(String, ContextMode, RequestKind, usize)>>,
}

impl<P> Recording<P> {
    pub fn new(inner: P) -> Self {
        Recording { inner, sent: Mutex::new(Vec::new()) }
    }

    pub fn requests(&self) -> Vec<(String, ContextMode, RequestKind, usize)> {
        self.sent.lock().unwrap().clone()
    }
}

impl<P: Provider> Provider for Recording<P> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn supports(&self, s: Strategy) -> bool {
        self.inner.supports(s)
    }

    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Vec<Completion>, ProviderError> {
        let mut text = req.prompt.to_string();
        for h in req.history {
            text.push('\n');
            text.push_str(&h.text);
        }
        self.sent.lock().unwrap().push((text, req.key.mode, req.key.kind, req.n));
        self.inner.complete(req)
    }
}

/// Answers with a fixed short test body.
pub struct Fixed;

impl Provider for Fixed {
    fn id(&self) -> &str {
        "fixed"
    }

    fn supports(&self, _: Strategy) -> bool {
        true
    }

    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Vec<Completion>, ProviderError> {
        Ok((0..req.n).map(|_| Completion { text: "  return 0;\n}\n".into(), stop_reason: StopReason::Stop }).collect())
    }
}

/// Production lines found in `text` that the template file does not itself
/// contain. Lines need a letter and at least two non-space characters
/// besides braces to count.
pub fn leaks(text: &str, production: &[String], template_source: &str) -> BTreeSet<String> {
    let own: BTreeSet<&str> = template_source.lines().map(str::trim).collect();
    let sent: BTreeSet<&str> = text.lines().map(str::trim).collect();
    let mut out = BTreeSet::new();
    for src in production {
        for line in src.lines().map(str::trim) {
            let meaningful =
                line.chars().any(char::is_alphabetic) && line.chars().filter(|c| !c.is_whitespace() && !"{}".contains(*c)).count() >= 2;
            if meaningful && !own.contains(line) && sent.contains(line) {
                out.insert(line.to_string());
            }
        }
    }
    out
}

pub fn production(m: &ProjectManifest) -> Vec<String> {
    m.source_files().unwrap().iter().map(|p| fs::read_to_string(m.root.join(p)).unwrap()).collect()
}

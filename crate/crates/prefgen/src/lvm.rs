//! Client for a chat-completion style vision model that grades rendered
//! candidates with a score out of 10.

use std::sync::{Condvar, Mutex, OnceLock};
use std::time::Duration;

use base64::Engine;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::LvmError;

pub const API_KEY_VAR: &str = "LVM_API_KEY";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LvmConfig {
    pub endpoint: String,
    pub model: String,
    pub max_in_flight: usize,
    pub attempts: u32,
    pub base_delay_ms: u64,
    pub timeout_s: u64,
}

impl Default for LvmConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://localhost:8000/v1/chat/completions".into(),
            model: "llava-onevision-qwen2-7b-ov-chat".into(),
            max_in_flight: 4,
            attempts: 3,
            base_delay_ms: 500,
            timeout_s: 120,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, api_key: &str, body: &Value) -> Result<HttpReply, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for UreqTransport {
    fn post_json(&self, url: &str, api_key: &str, body: &Value) -> Result<HttpReply, String> {
        let mut resp = self
            .agent
            .post(url)
            .header("Authorization", &format!("Bearer {api_key}"))
            .send_json(body)
            .map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpReply { status, body })
    }
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Self { free: Mutex::new(n.max(1)), cv: Condvar::new() }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

pub type Sleeper = Box<dyn Fn(Duration) + Send + Sync>;

pub struct LvmClient<T: Transport> {
    cfg: LvmConfig,
    api_key: String,
    transport: T,
    gate: Gate,
    sleep: Sleeper,
}

impl LvmClient<UreqTransport> {
    /// Reads the credential from [`API_KEY_VAR`].
    pub fn from_env(cfg: LvmConfig) -> Result<Self, LvmError> {
        let key = std::env::var(API_KEY_VAR).map_err(|_| LvmError::MissingCredential(API_KEY_VAR))?;
        let transport = UreqTransport::new(Duration::from_secs(cfg.timeout_s));
        Ok(Self::new(cfg, key, transport))
    }
}

impl<T: Transport> LvmClient<T> {
    pub fn new(cfg: LvmConfig, api_key: String, transport: T) -> Self {
        let gate = Gate::new(cfg.max_in_flight);
        Self { cfg, api_key, transport, gate, sleep: Box::new(std::thread::sleep) }
    }

    pub fn with_sleeper(mut self, sleep: Sleeper) -> Self {
        self.sleep = sleep;
        self
    }

    pub fn request_body(&self, prompt: &str, png: &[u8]) -> Value {
        let image = base64::engine::general_purpose::STANDARD.encode(png);
        json!({
            "model": self.cfg.model,
            "temperature": 0,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "text", "text": prompt},
                    {"type": "image_url", "image_url": {"url": format!("data:image/png;base64,{image}")}}
                ]
            }]
        })
    }

    fn attempt(&self, body: &Value) -> Result<f64, LvmError> {
        let reply = {
            let _slot = self.gate.acquire();
            self.transport.post_json(&self.cfg.endpoint, &self.api_key, body).map_err(LvmError::TransportError)?
        };
        match reply.status {
            200..=299 => {}
            429 => return Err(LvmError::RateLimited),
            s => return Err(LvmError::TransportError(format!("status {s}: {}", reply.body))),
        }
        let parsed: Value =
            serde_json::from_str(&reply.body).map_err(|e| LvmError::TransportError(format!("bad reply body: {e}")))?;
        let content = parsed["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| LvmError::TransportError("reply has no message content".into()))?;
        parse_score(content)
    }

    /// Sends the prompt and image and returns the parsed score. Transport
    /// failures and rate limits are retried with doubling delays.
    pub fn score(&self, prompt: &str, png: &[u8]) -> Result<f64, LvmError> {
        let body = self.request_body(prompt, png);
        let mut delay = Duration::from_millis(self.cfg.base_delay_ms);
        let attempts = self.cfg.attempts.max(1);
        for n in 1..=attempts {
            match self.attempt(&body) {
                Err(LvmError::TransportError(_) | LvmError::RateLimited) if n < attempts => {
                    (self.sleep)(delay);
                    delay *= 2;
                }
                other => return other,
            }
        }
        unreachable!("the last attempt always returns")
    }
}

fn score_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b(10|[0-9])(\.[0-9]+)?\b").unwrap())
}

/// Takes the first number between 0 and 10 on the last non-empty line.
pub fn parse_score(reply: &str) -> Result<f64, LvmError> {
    let last = reply.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("");
    let m = score_pattern().find(last).ok_or_else(|| LvmError::UnparseableScore(last.to_string()))?;
    let v: f64 = m.as_str().parse().map_err(|_| LvmError::UnparseableScore(last.to_string()))?;
    if v > 10.0 {
        return Err(LvmError::UnparseableScore(last.to_string()));
    }
    Ok(v)
}

/// Encodes an 8-bit grayscale image as PNG.
pub fn encode_png(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("writing to a Vec cannot fail");
        writer.write_image_data(pixels).expect("pixel buffer matches the header");
    }
    out
}

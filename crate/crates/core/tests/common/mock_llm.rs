//! Minimal HTTP/1.1 chat-completions server on a loopback port. Each
//! connection is answered on its own thread and closed afterwards.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

pub struct Reply {
    pub status: u16,
    /// Raw assistant text; ignored unless `status` is 200.
    pub content: String,
    pub delay: Duration,
}

impl Reply {
    pub fn ok(content: String) -> Self {
        Reply { status: 200, content, delay: Duration::ZERO }
    }

    pub fn status(status: u16) -> Self {
        Reply { status, content: String::new(), delay: Duration::ZERO }
    }
}

/// `(request index from 0, user prompt) -> reply`.
pub type Script = dyn Fn(usize, &str) -> Reply + Send + Sync;

pub struct MockServer {
    pub url: String,
    pub arrivals: Arc<Mutex<Vec<Instant>>>,
    pub peak: Arc<AtomicUsize>,
    pub requests: Arc<AtomicUsize>,
    pub auth_headers: Arc<Mutex<Vec<String>>>,
}

/// Snippet texts of a prompt built by the classifier.
pub fn snippets_of(prompt: &str) -> Vec<String> {
    prompt.split("### Snippet ").skip(1).map(|b| b.split_once('\n').map_or("", |(_, t)| t).trim().to_string()).collect()
}

/// Labels a snippet `CRED` when it mentions a password, else `OTHER`.
pub fn label_by_keyword(prompt: &str) -> String {
    let entries: Vec<Value> = snippets_of(prompt)
        .iter()
        .enumerate()
        .map(|(i, s)| json!({"id": i + 1, "labels": [if s.contains("password") { "CRED" } else { "OTHER" }]}))
        .collect();
    serde_json::to_string(&entries).unwrap()
}

fn read_request(stream: &mut TcpStream) -> Option<(String, Value)> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut len = 0;
    let mut auth = String::new();
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).ok()? == 0 {
            return None;
        }
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            match k.to_ascii_lowercase().as_str() {
                "content-length" => len = v.trim().parse().ok()?,
                "authorization" => auth = v.trim().to_string(),
                _ => {}
            }
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).ok()?;
    Some((auth, serde_json::from_slice(&body).ok()?))
}

impl MockServer {
    pub fn start(script: Arc<Script>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let arrivals = Arc::new(Mutex::new(Vec::new()));
        let peak = Arc::new(AtomicUsize::new(0));
        let requests = Arc::new(AtomicUsize::new(0));
        let auth_headers = Arc::new(Mutex::new(Vec::new()));
        let in_flight = Arc::new(AtomicUsize::new(0));
        let (a, p, r, h) = (arrivals.clone(), peak.clone(), requests.clone(), auth_headers.clone());
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let (script, a, p, r, h, inf) =
                    (script.clone(), a.clone(), p.clone(), r.clone(), h.clone(), in_flight.clone());
                thread::spawn(move || {
                    let Some((auth, body)) = read_request(&mut stream) else { return };
                    let now = inf.fetch_add(1, Ordering::SeqCst) + 1;
                    p.fetch_max(now, Ordering::SeqCst);
                    a.lock().unwrap().push(Instant::now());
                    h.lock().unwrap().push(auth);
                    let idx = r.fetch_add(1, Ordering::SeqCst);
                    let prompt = body.pointer("/messages/1/content").and_then(Value::as_str).unwrap_or("").to_string();
                    let reply = script(idx, &prompt);
                    thread::sleep(reply.delay);
                    let payload = if reply.status == 200 {
                        json!({
                            "choices": [{"message": {"role": "assistant", "content": reply.content}}],
                            "usage": {"prompt_tokens": prompt.len() as u64 / 4, "completion_tokens": 10},
                        })
                        .to_string()
                    } else {
                        json!({"error": "scripted"}).to_string()
                    };
                    inf.fetch_sub(1, Ordering::SeqCst);
                    let head = format!(
                        "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                        reply.status,
                        payload.len()
                    );
                    let _ = stream.write_all(head.as_bytes());
                    let _ = stream.write_all(payload.as_bytes());
                    let _ = stream.flush();
                });
            }
        });
        MockServer { url, arrivals, peak, requests, auth_headers }
    }

    pub fn gaps(&self) -> Vec<Duration> {
        let a = self.arrivals.lock().unwrap();
        a.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::{Arc, Mutex};
use std::thread;

/// Local HTTP server answering every request with one canned response.
pub struct MockServer {
    pub base: String,
    paths: Arc<Mutex<Vec<String>>>,
}

impl MockServer {
    pub fn start(status: u16, body: String) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let paths = Arc::new(Mutex::new(Vec::new()));
        let seen = Arc::clone(&paths);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { break };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                loop {
                    let mut header = String::new();
                    if reader.read_line(&mut header).unwrap() == 0 || header == "\r\n" {
                        break;
                    }
                }
                let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
                seen.lock().unwrap().push(path);
                let response = format!(
                    "HTTP/1.1 {status} X\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        MockServer { base, paths }
    }

    pub fn requests(&self) -> Vec<String> {
        self.paths.lock().unwrap().clone()
    }
}

/// Runs the binary with an isolated cache and no inherited endpoint.
pub fn modterrain(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modterrain"))
        .args(args)
        .env("MODTERRAIN_CACHE_DIR", cache)
        .env_remove("MODTERRAIN_BASE_URL")
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// `key = value` lines of a manifest.
pub fn manifest(dir: &Path) -> Vec<(String, String)> {
    std::fs::read_to_string(dir.join("manifest.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(" = ").unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

pub fn manifest_value(dir: &Path, key: &str) -> String {
    manifest(dir)
        .into_iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("manifest has no {key}"))
        .1
}

pub fn checksums(dir: &Path) -> Vec<(String, String)> {
    manifest(dir).into_iter().filter(|(k, _)| k.ends_with("sha256")).collect()
}

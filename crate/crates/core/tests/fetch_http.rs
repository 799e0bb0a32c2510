use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use modterrain::lmfdb::{fetch, parse_label, FetchConfig, LmfdbError, Source};

/// Serves canned responses on localhost; records request paths.
struct MockServer {
    base: String,
    paths: Arc<Mutex<Vec<String>>>,
}

impl MockServer {
    fn start(status: u16, body: String) -> Self {
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
                let reason = if status == 200 { "OK" } else { "Not Found" };
                let response = format!(
                    "HTTP/1.1 {status} {reason}\r\nContent-Type: text/plain\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        MockServer { base, paths }
    }

    fn requests(&self) -> Vec<String> {
        self.paths.lock().unwrap().clone()
    }
}

/// a_n for 11.2.a.a, the form of the elliptic curve y² + y = x³ − x² − 10x − 20.
const ELEVEN_2_A_A: &str = "1 1\n2 -2\n3 -1\n4 2\n5 1\n6 2\n7 -2\n8 0\n9 -2\n10 -2\n";

fn config(dir: &std::path::Path, base: &str) -> FetchConfig {
    let mut config = FetchConfig::new(dir);
    config.base_url = format!("{base}/coeffs/{{label}}?n={{count}}");
    config
}

#[test]
fn remote_fetch_populates_the_cache() {
    let server = MockServer::start(200, ELEVEN_2_A_A.to_string());
    let dir = tempfile::tempdir().unwrap();
    let config = config(dir.path(), &server.base);
    let label = parse_label("11.2.a.a").unwrap();

    let file = fetch(&label, 10, &config).unwrap();
    assert_eq!(file.source, Source::Remote);
    assert_eq!(file.count(), 10);
    assert_eq!(file.entries[1].re, "-2");
    assert_eq!(server.requests(), ["/coeffs/11.2.a.a?n=10"]);
    let cached = std::fs::read_to_string(dir.path().join("11.2.a.a")).unwrap();
    assert!(cached.starts_with("11.2.a.a 11 2 a a 10\n"));

    // second call is served from disk
    let again = fetch(&label, 10, &config).unwrap();
    assert_eq!(again.source, Source::Cache);
    assert_eq!(server.requests().len(), 1);
    assert_eq!(again.to_text(), file.to_text());
}

#[test]
fn warm_cache_is_byte_identical() {
    let server = MockServer::start(200, ELEVEN_2_A_A.to_string());
    let dir = tempfile::tempdir().unwrap();
    let config = config(dir.path(), &server.base);
    let label = parse_label("11.2.a.a").unwrap();
    fetch(&label, 5, &config).unwrap();
    let a = fetch(&label, 5, &config).unwrap().to_text();
    let b = fetch(&label, 5, &config).unwrap().to_text();
    assert_eq!(a, b);
}

#[test]
fn not_found_leaves_cache_untouched() {
    let server = MockServer::start(404, "no such form".to_string());
    let dir = tempfile::tempdir().unwrap();
    let config = config(dir.path(), &server.base);
    let label = parse_label("9999.99.z.z").unwrap();
    assert!(matches!(fetch(&label, 10, &config), Err(LmfdbError::NotFound(_))));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn short_remote_answer_is_rejected_and_not_cached() {
    let server = MockServer::start(200, ELEVEN_2_A_A.to_string());
    let dir = tempfile::tempdir().unwrap();
    let config = config(dir.path(), &server.base);
    let label = parse_label("11.2.a.a").unwrap();
    assert!(matches!(
        fetch(&label, 50, &config),
        Err(LmfdbError::InsufficientCoefficients { needed: 50, available: 10, .. })
    ));
    assert!(!dir.path().join("11.2.a.a").exists());
}

#[test]
fn unreachable_host_is_a_network_error() {
    // bind then drop to get a port nobody listens on
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let dir = tempfile::tempdir().unwrap();
    let config = config(dir.path(), &format!("http://127.0.0.1:{port}"));
    let label = parse_label("11.2.a.a").unwrap();
    assert!(matches!(fetch(&label, 10, &config), Err(LmfdbError::Network { .. })));
}

#[test]
fn bundled_forms_need_no_network() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = FetchConfig::new(dir.path());
    config.offline = true;
    config.base_url = "http://127.0.0.1:9/unused".into();
    for label in ["1.12.a.a", "5.4.a.a", "56.1.h.a"] {
        let file = fetch(&parse_label(label).unwrap(), 1000, &config).unwrap();
        assert_eq!(file.source, Source::Bundled);
        assert!(file.count() >= 1000);
    }
}

const FIVE_4_A_A: &str = include_str!("../data/5.4.a.a.txt");

#[test]
fn bundled_label_online_goes_remote() {
    // serve the recorded fixture as bare `n re im` lines
    let body: String = FIVE_4_A_A.lines().skip(1).take(150).map(|l| format!("{l}\n")).collect();
    let server = MockServer::start(200, body);
    let dir = tempfile::tempdir().unwrap();
    let config = config(dir.path(), &server.base);
    let file = fetch(&parse_label("5.4.a.a").unwrap(), 100, &config).unwrap();
    assert_eq!(file.source, Source::Remote);
    assert!(file.count() >= 100);
    assert_eq!(file.entries[1].re, "-4");
    assert_eq!(server.requests(), ["/coeffs/5.4.a.a?n=100"]);
}

#[test]
fn remote_failure_falls_back_to_bundle() {
    let server = MockServer::start(404, String::new());
    let dir = tempfile::tempdir().unwrap();
    let config = config(dir.path(), &server.base);
    let file = fetch(&parse_label("1.12.a.a").unwrap(), 500, &config).unwrap();
    assert_eq!(file.source, Source::Bundled);
    assert_eq!(file.count(), 500);
    assert_eq!(server.requests().len(), 1);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn warm_cache_does_no_network_io() {
    let server = MockServer::start(200, "1 1\n2 -24\n3 252\n".to_string());
    let dir = tempfile::tempdir().unwrap();
    let config = config(dir.path(), &server.base);
    let label = parse_label("1.12.a.a").unwrap();
    assert_eq!(fetch(&label, 3, &config).unwrap().source, Source::Remote);
    assert_eq!(fetch(&label, 3, &config).unwrap().source, Source::Cache);
    assert_eq!(server.requests().len(), 1);
}

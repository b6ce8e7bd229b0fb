//! Table serialization (JSON, CSV) and the adapter through which the
//! interpreter touches files and the network.

mod csv_format;
mod fake;
mod json;

use std::time::Duration;

pub use csv_format::{table_from_csv, table_to_csv};
pub use fake::{IoCall, RecordingIo};
pub use json::{table_from_json, table_to_json};

pub const DEFAULT_HTTP_TIMEOUT: Duration = Duration::from_secs(10);

/// Malformed table data. Messages name the row (or line) and field.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct FormatError(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// Side-effecting capabilities used by READ, WRITE, FETCH and POST.
/// Implementations must be usable from several runs at once.
pub trait IoAdapter: Send + Sync {
    fn read_file(&self, path: &str) -> std::io::Result<Vec<u8>>;
    fn write_file(&self, path: &str, contents: &[u8]) -> std::io::Result<()>;
    /// Transport failures only; any HTTP status is a successful response.
    fn http_get(&self, url: &str) -> Result<HttpResponse, String>;
    fn http_post(&self, url: &str, json_body: &[u8]) -> Result<u16, String>;
}

/// The real filesystem and a blocking HTTP client.
pub struct StdIo {
    agent: ureq::Agent,
}

impl StdIo {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        StdIo { agent }
    }
}

impl Default for StdIo {
    fn default() -> Self {
        StdIo::new(DEFAULT_HTTP_TIMEOUT)
    }
}

impl IoAdapter for StdIo {
    fn read_file(&self, path: &str) -> std::io::Result<Vec<u8>> {
        std::fs::read(path)
    }

    fn write_file(&self, path: &str, contents: &[u8]) -> std::io::Result<()> {
        std::fs::write(path, contents)
    }

    fn http_get(&self, url: &str) -> Result<HttpResponse, String> {
        let mut resp = self.agent.get(url).call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_vec().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }

    fn http_post(&self, url: &str, json_body: &[u8]) -> Result<u16, String> {
        let resp = self
            .agent
            .post(url)
            .header("Content-Type", "application/json")
            .send(json_body)
            .map_err(|e| e.to_string())?;
        Ok(resp.status().as_u16())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    /// Serves one canned response per accepted connection.
    fn serve(responses: Vec<(u16, &'static str)>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut buf = [0u8; 4096];
                let _ = stream.read(&mut buf);
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        format!("http://{addr}/")
    }

    #[test]
    fn http_get_and_status() {
        let url = serve(vec![(200, "[]"), (500, "oops"), (201, "")]);
        let io = StdIo::default();
        let ok = io.http_get(&url).unwrap();
        assert_eq!((ok.status, ok.body.as_slice()), (200, b"[]".as_slice()));
        assert_eq!(io.http_get(&url).unwrap().status, 500);
        assert_eq!(io.http_post(&url, b"[]").unwrap(), 201);
    }

    #[test]
    fn unreachable_host_is_transport_error() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/", listener.local_addr().unwrap());
        drop(listener);
        assert!(StdIo::new(Duration::from_secs(2)).http_get(&url).is_err());
    }
}

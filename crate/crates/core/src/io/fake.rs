use std::collections::HashMap;
use std::sync::Mutex;

use super::{HttpResponse, IoAdapter};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IoCall {
    ReadFile(String),
    WriteFile(String),
    HttpGet(String),
    HttpPost(String),
}

/// In-memory adapter that records every call. Unknown files are
/// `NotFound`; unknown URLs answer 404.
#[derive(Default)]
pub struct RecordingIo {
    files: Mutex<HashMap<String, Vec<u8>>>,
    responses: Mutex<HashMap<String, HttpResponse>>,
    posts: Mutex<Vec<(String, Vec<u8>)>>,
    calls: Mutex<Vec<IoCall>>,
}

impl RecordingIo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_file(self, path: &str, contents: impl Into<Vec<u8>>) -> Self {
        self.files.lock().unwrap().insert(path.to_string(), contents.into());
        self
    }

    pub fn with_response(self, url: &str, status: u16, body: impl Into<Vec<u8>>) -> Self {
        let resp = HttpResponse { status, body: body.into() };
        self.responses.lock().unwrap().insert(url.to_string(), resp);
        self
    }

    pub fn file(&self, path: &str) -> Option<Vec<u8>> {
        self.files.lock().unwrap().get(path).cloned()
    }

    pub fn posted(&self) -> Vec<(String, Vec<u8>)> {
        self.posts.lock().unwrap().clone()
    }

    pub fn calls(&self) -> Vec<IoCall> {
        self.calls.lock().unwrap().clone()
    }

    pub fn call_count(&self) -> usize {
        self.calls.lock().unwrap().len()
    }

    fn record(&self, call: IoCall) {
        self.calls.lock().unwrap().push(call);
    }
}

impl IoAdapter for RecordingIo {
    fn read_file(&self, path: &str) -> std::io::Result<Vec<u8>> {
        self.record(IoCall::ReadFile(path.to_string()));
        self.files.lock().unwrap().get(path).cloned().ok_or_else(|| {
            std::io::Error::new(std::io::ErrorKind::NotFound, format!("{path}: no such file"))
        })
    }

    fn write_file(&self, path: &str, contents: &[u8]) -> std::io::Result<()> {
        self.record(IoCall::WriteFile(path.to_string()));
        self.files.lock().unwrap().insert(path.to_string(), contents.to_vec());
        Ok(())
    }

    fn http_get(&self, url: &str) -> Result<HttpResponse, String> {
        self.record(IoCall::HttpGet(url.to_string()));
        Ok(self
            .responses
            .lock()
            .unwrap()
            .get(url)
            .cloned()
            .unwrap_or(HttpResponse { status: 404, body: Vec::new() }))
    }

    fn http_post(&self, url: &str, json_body: &[u8]) -> Result<u16, String> {
        self.record(IoCall::HttpPost(url.to_string()));
        self.posts.lock().unwrap().push((url.to_string(), json_body.to_vec()));
        Ok(self.responses.lock().unwrap().get(url).map_or(200, |r| r.status))
    }
}

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use vulture::clients::{ClientError, HttpRequest, HttpResponse, HttpTransport};
use vulture_cli::{run, Context};

/// Refuses every request and counts the attempts.
#[derive(Default)]
pub struct CountingTransport(AtomicUsize);

impl CountingTransport {
    pub fn attempts(&self) -> usize {
        self.0.load(Ordering::SeqCst)
    }
}

impl HttpTransport for CountingTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, ClientError> {
        self.0.fetch_add(1, Ordering::SeqCst);
        Err(ClientError::Network(format!("network disabled in tests: {}", request.url)))
    }
}

pub struct Harness {
    pub net: Arc<CountingTransport>,
    pub ctx: Context,
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Harness {
    pub fn new(env: &[(&str, &str)]) -> Self {
        let net = Arc::new(CountingTransport::default());
        let vars: HashMap<String, String> = env.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let ctx = Context { network: net.clone(), env: Box::new(move |k| vars.get(k).cloned()) };
        Harness { net, ctx }
    }

    pub fn run(&self, args: &[&str]) -> Output {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("vulture").chain(args.iter().copied()), &self.ctx, &mut out, &mut err);
        Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
    }
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

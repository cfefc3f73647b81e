#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::Duration;

use serde_json::Value;
use tempfile::TempDir;

pub const BIN: &str = env!("CARGO_BIN_EXE_tcenter");
pub const FIXTURE_CATALOG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/catalog.json");

/// A data directory plus the configuration file pointing at it.
pub struct Instance {
    pub dir: TempDir,
    pub config: PathBuf,
}

impl Instance {
    pub fn new(langs: &[&str]) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut toml = String::from(
            "listen = \"127.0.0.1:0\"\ndata_dir = \"data\"\ndocs_dir = \"docs\"\nadmins = [\"admin\"]\n",
        );
        for lang in langs {
            toml.push_str(&format!("[[languages]]\ncode = \"{lang}\"\nname = \"{lang}\"\n"));
        }
        let config = dir.path().join("tcenter.toml");
        std::fs::write(&config, toml).unwrap();
        Instance { dir, config }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.dir.path().join("data")
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn settings(&self) -> tcenter_core::Settings {
        tcenter_core::config::Config::load(&self.config).unwrap().settings()
    }

    pub fn tcenter(&self, args: &[&str]) -> Output {
        Command::new(BIN)
            .arg("--config")
            .arg(&self.config)
            .args(args)
            .env("RUST_LOG", "warn")
            .output()
            .unwrap()
    }

    /// Runs the CLI and returns stdout, panicking on a non-zero exit.
    pub fn ok(&self, args: &[&str]) -> String {
        let out = self.tcenter(args);
        assert!(
            out.status.success(),
            "tcenter {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    pub fn spawn(&self) -> Server {
        let mut child = Command::new(BIN)
            .arg("--config")
            .arg(&self.config)
            .arg("serve")
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected server output {line:?}"))
            .to_owned();
        Server {
            child,
            base: format!("http://{addr}"),
        }
    }
}

pub struct Server {
    child: Child,
    pub base: String,
}

impl Server {
    pub fn api(&self) -> Api {
        Api::new(&self.base)
    }

    /// SIGKILL, no chance to clean up.
    pub fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Clone)]
pub struct Api {
    agent: ureq::Agent,
    base: String,
    pub token: Option<String>,
}

pub type Reply = Result<(u16, Value), ureq::Error>;

impl Api {
    pub fn new(base: &str) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(10)))
            .build();
        Api {
            agent: ureq::Agent::new_with_config(config),
            base: base.to_owned(),
            token: None,
        }
    }

    pub fn with_token(&self, token: &str) -> Self {
        Api {
            token: Some(token.to_owned()),
            ..self.clone()
        }
    }

    fn finish(resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Reply {
        let mut resp = resp?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string()?;
        let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        Ok((status, value))
    }

    pub fn try_get(&self, path: &str) -> Reply {
        let mut req = self.agent.get(format!("{}{path}", self.base));
        if let Some(t) = &self.token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        Self::finish(req.call())
    }

    pub fn try_send(&self, method: &str, path: &str, body: &Value) -> Reply {
        let url = format!("{}{path}", self.base);
        let mut req = match method {
            "PUT" => self.agent.put(url),
            _ => self.agent.post(url),
        };
        if let Some(t) = &self.token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        Self::finish(req.send_json(body))
    }

    pub fn get(&self, path: &str) -> (u16, Value) {
        self.try_get(path).unwrap()
    }

    pub fn post(&self, path: &str, body: Value) -> (u16, Value) {
        self.try_send("POST", path, &body).unwrap()
    }

    /// Registers a member and returns a client holding its session, plus
    /// the member id and login secret.
    pub fn register(&self, name: &str, langs: &[&str]) -> (Api, String, String) {
        let (status, v) = self.post("/api/members", serde_json::json!({"display_name": name, "languages": langs}));
        assert_eq!(status, 201, "register {name}: {v}");
        (
            self.with_token(v["token"].as_str().unwrap()),
            v["member"]["member_id"].as_str().unwrap().to_owned(),
            v["secret"].as_str().unwrap().to_owned(),
        )
    }
}

/// Writes a catalog document with `n` segments spread over pages of ten.
pub fn write_catalog(path: &Path, ids: &[String]) {
    let pages: Vec<Value> = ids
        .chunks(10)
        .enumerate()
        .map(|(p, chunk)| {
            let segments: Vec<Value> = chunk
                .iter()
                .map(|id| {
                    serde_json::json!({"id": id, "text": format!("Source text of {id}"), "category": "informational_text",
                                       "context_before": "", "context_after": ""})
                })
                .collect();
            serde_json::json!({"page_id": format!("page{p:03}"), "url": format!("/p/{p}"), "title": format!("Page {p}"),
                               "segments": segments})
        })
        .collect();
    std::fs::write(path, serde_json::json!({ "pages": pages }).to_string()).unwrap();
}

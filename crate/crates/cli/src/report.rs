//! Report files. Payloads are deterministic; wall-clock data goes to a sidecar.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use lambda1_core::util::sha256_hex;
use serde_json::{json, Value};

use crate::config::Config;

pub struct Reporter {
    dir: PathBuf,
    command: String,
    config_text: String,
    seed: u64,
    started_unix: f64,
    clock: Instant,
    written: Vec<String>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl Reporter {
    pub fn new(dir: &Path, command: &str, config: &Config, seed: u64) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Reporter {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config_text: config.text().to_string(),
            seed,
            started_unix: unix_now(),
            clock: Instant::now(),
            written: Vec::new(),
        })
    }

    fn provenance(&self) -> Value {
        json!({
            "config": self.config_text,
            "config_sha256": sha256_hex(self.config_text.as_bytes()),
            "seed": self.seed,
            "version": env!("CARGO_PKG_VERSION"),
        })
    }

    fn put(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        fs::write(self.dir.join(name), body)?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// `<command>.json`: provenance, a pass flag, a one-line headline and the payload.
    pub fn json(&mut self, pass: bool, headline: &str, result: Value) -> std::io::Result<()> {
        let doc = json!({
            "command": self.command,
            "provenance": self.provenance(),
            "pass": pass,
            "headline": headline,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
        text.push('\n');
        let name = format!("{}.json", self.command);
        self.put(&name, &text)
    }

    /// CSV with the provenance as leading `#` lines.
    pub fn csv(&mut self, name: &str, header: &str, rows: &[String]) -> std::io::Result<()> {
        let mut s = format!("# lambda1 {}\n", self.command);
        s.push_str(&format!("# config_sha256 {}\n# seed {}\n", sha256_hex(self.config_text.as_bytes()), self.seed));
        for l in self.config_text.lines() {
            s.push_str(&format!("# config: {l}\n"));
        }
        s.push_str(header);
        s.push('\n');
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        self.put(name, &s)
    }

    pub fn text(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        self.put(name, body)
    }

    /// Writes `<command>.timestamp.json` with the wall-clock facts of this run.
    pub fn finish(self, exit_code: i32) -> std::io::Result<()> {
        let doc = json!({
            "command": self.command,
            "started_unix": self.started_unix,
            "finished_unix": unix_now(),
            "elapsed_seconds": self.clock.elapsed().as_secs_f64(),
            "exit_code": exit_code,
            "files": self.written,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)? + "\n";
        fs::write(self.dir.join(format!("{}.timestamp.json", self.command)), text)
    }
}

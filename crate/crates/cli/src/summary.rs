//! Table of the reports in a directory.

use std::fs;
use std::path::Path;

use serde_json::Value;

pub struct Row {
    pub file: String,
    pub command: String,
    pub pass: bool,
    pub headline: String,
}

/// Reads every `*.json` report (sidecars excluded) in name order. Unreadable or
/// malformed files are skipped with a warning on stderr.
pub fn collect(dir: &Path) -> std::io::Result<Vec<Row>> {
    let mut names: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            let n = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            n.ends_with(".json") && !n.ends_with(".timestamp.json")
        })
        .collect();
    names.sort();
    let mut rows = Vec::new();
    for path in names {
        let file = path.file_name().and_then(|n| n.to_str()).unwrap_or("?").to_string();
        let doc: Value = match fs::read_to_string(&path).map(|t| serde_json::from_str(&t)) {
            Ok(Ok(v)) => v,
            Ok(Err(e)) => {
                eprintln!("warning: skipping {file}: {e}");
                continue;
            }
            Err(e) => {
                eprintln!("warning: skipping {file}: {e}");
                continue;
            }
        };
        let (Some(command), Some(pass)) = (doc["command"].as_str(), doc["pass"].as_bool()) else {
            eprintln!("warning: skipping {file}: not a lambda1 report");
            continue;
        };
        rows.push(Row {
            file,
            command: command.to_string(),
            pass,
            headline: doc["headline"].as_str().unwrap_or("").to_string(),
        });
    }
    Ok(rows)
}

pub fn render(rows: &[Row]) -> String {
    let wf = rows.iter().map(|r| r.file.len()).max().unwrap_or(0).max(4);
    let wc = rows.iter().map(|r| r.command.len()).max().unwrap_or(0).max(7);
    let mut s = format!("{:<wf$}  {:<wc$}  {:<6}  {}\n", "file", "command", "status", "headline");
    for r in rows {
        let st = if r.pass { "PASS" } else { "FAIL" };
        s.push_str(&format!("{:<wf$}  {:<wc$}  {:<6}  {}\n", r.file, r.command, st, r.headline));
    }
    s
}

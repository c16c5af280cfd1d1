//! Summaries over a directory of runs.

use std::fmt::Write;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::record::{write_atomic, RunRecord, RECORD_FILE};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub run: String,
    pub command: String,
    pub check: String,
    pub anchor: String,
    pub pass: bool,
    pub margin: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Problem {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Summary {
    pub runs: usize,
    pub rows: Vec<SummaryRow>,
    /// Runs that ended in an error before producing checks.
    pub errors: Vec<Problem>,
    /// Corrupt records and run directories without one.
    pub problems: Vec<Problem>,
}

impl Summary {
    pub fn pass(&self) -> bool {
        self.problems.is_empty() && self.errors.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("# Run summary\n\n");
        let _ = writeln!(s, "{} runs, {} checks, {} failing.\n", self.runs, self.rows.len(), self.rows.iter().filter(|r| !r.pass).count());
        if !self.rows.is_empty() {
            s.push_str("| run | command | check | anchor | result | margin | detail |\n");
            s.push_str("|---|---|---|---|---|---|---|\n");
            for r in &self.rows {
                let margin = r.margin.map(|m| format!("{m:.3e}")).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    r.run,
                    r.command,
                    r.check,
                    r.anchor,
                    if r.pass { "PASS" } else { "FAIL" },
                    margin,
                    r.detail.replace('|', "\\|")
                );
            }
        }
        for (title, list) in [("Run errors", &self.errors), ("Missing or corrupt records", &self.problems)] {
            if !list.is_empty() {
                let _ = writeln!(s, "\n## {title}\n");
                for p in list {
                    let _ = writeln!(s, "- `{}`: {}", p.path, p.reason);
                }
            }
        }
        s
    }
}

/// Run directories below `root`: `root` itself and every descendant holding
/// files other than summaries.
fn candidate_dirs(root: &Path) -> io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let mut has_files = false;
        let mut entries: Vec<_> = fs::read_dir(&dir)?.collect::<io::Result<_>>()?;
        entries.sort_by_key(|e| e.file_name());
        for e in entries {
            let path = e.path();
            if e.file_type()?.is_dir() {
                stack.push(path);
            } else if !(dir == root && (e.file_name() == "summary.md" || e.file_name() == "summary.json")) {
                has_files = true;
            }
        }
        if has_files {
            out.push(dir);
        }
    }
    out.sort();
    Ok(out)
}

pub fn summarize(root: &Path) -> io::Result<Summary> {
    let mut summary = Summary::default();
    for dir in candidate_dirs(root)? {
        let name = dir.strip_prefix(root).ok().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let name = name.display().to_string();
        let path = dir.join(RECORD_FILE);
        if !path.exists() {
            summary.problems.push(Problem { path: name, reason: "no record.json".into() });
            continue;
        }
        match RunRecord::load(&path) {
            Err(e) => summary.problems.push(Problem { path: format!("{name}/{RECORD_FILE}"), reason: format!("corrupt record: {e}") }),
            Ok(rec) => {
                summary.runs += 1;
                if let Some(e) = &rec.error {
                    summary.errors.push(Problem { path: name.clone(), reason: e.clone() });
                }
                for c in rec.checks {
                    summary.rows.push(SummaryRow {
                        run: name.clone(),
                        command: rec.command.clone(),
                        check: c.name,
                        anchor: c.anchor,
                        pass: c.pass,
                        margin: c.margin,
                        detail: c.detail,
                    });
                }
            }
        }
    }
    Ok(summary)
}

/// Writes `summary.md` and `summary.json` into `root`.
pub fn write(root: &Path, summary: &Summary) -> io::Result<()> {
    write_atomic(&root.join("summary.md"), summary.to_markdown().as_bytes())?;
    let json = serde_json::to_vec_pretty(summary).map_err(io::Error::other)?;
    write_atomic(&root.join("summary.json"), &json)
}

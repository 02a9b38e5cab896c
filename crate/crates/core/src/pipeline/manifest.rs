use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "# fdsl-manifest v1";
const COLUMNS: &str = "path,label,fnv64";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub relative_path: String,
    pub label: usize,
    /// FNV-1a of the file contents.
    pub file_digest: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub config_digest: u64,
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC}, digest={:016x}\n{COLUMNS}\n", self.config_digest);
        for r in &self.records {
            writeln!(
                out,
                "{},{},{:016x}",
                r.relative_path, r.label, r.file_digest
            )
            .unwrap();
        }
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let err = |line: usize, reason: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let config_digest = lines
            .next()
            .and_then(|(_, l)| l.strip_prefix(MAGIC))
            .and_then(|l| l.strip_prefix(", digest="))
            .and_then(|h| u64::from_str_radix(h, 16).ok())
            .ok_or_else(|| err(1, "missing '# fdsl-manifest v1, digest=<hex>' header"))?;
        if lines.next().map(|(_, l)| l) != Some(COLUMNS) {
            return Err(err(2, "missing column header"));
        }
        let mut records = Vec::new();
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let [p, label, digest] = f[..] else {
                return Err(err(n + 1, "expected path,label,fnv64"));
            };
            records.push(ManifestRecord {
                relative_path: p.to_string(),
                label: label.parse().map_err(|_| err(n + 1, "bad label"))?,
                file_digest: u64::from_str_radix(digest, 16)
                    .map_err(|_| err(n + 1, "bad digest"))?,
            });
        }
        Ok(DatasetManifest {
            config_digest,
            records,
        })
    }

    /// Number of records per label, indexed by label.
    pub fn label_histogram(&self) -> Vec<usize> {
        let max = self.records.iter().map(|r| r.label + 1).max().unwrap_or(0);
        let mut h = vec![0; max];
        for r in &self.records {
            h[r.label] += 1;
        }
        h
    }
}

//! User regions, scaffold hashing and regeneration merge.

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

pub const BEGIN: &str = "USER CODE BEGIN";
pub const END: &str = "USER CODE END";
const HASH_TAG: &str = "scaffold sha256:";

/// Comment syntax of a generated file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Comment {
    pub open: &'static str,
    pub close: &'static str,
}

impl Comment {
    pub const SLASH: Comment = Comment {
        open: "//",
        close: "",
    };
    pub const HASH: Comment = Comment { open: "#", close: "" };
    pub const HTML: Comment = Comment {
        open: "<!--",
        close: " -->",
    };

    pub fn for_path(path: &str) -> Comment {
        if path.ends_with(".toml") {
            Comment::HASH
        } else if path.ends_with(".md") {
            Comment::HTML
        } else {
            Comment::SLASH
        }
    }

    pub fn line(self, text: &str) -> String {
        format!("{} {text}{}", self.open, self.close)
    }

    fn marker<'a>(self, line: &'a str, keyword: &str) -> Option<&'a str> {
        let rest = line.trim().strip_prefix(self.open)?.trim_start();
        let rest = rest.strip_suffix(self.close.trim()).unwrap_or(rest).trim_end();
        let id = rest.strip_prefix(keyword)?.strip_prefix(' ')?;
        (!id.is_empty()).then_some(id)
    }
}

/// A file split into scaffold text and region bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    /// Text with region bodies removed and without the header line.
    pub scaffold: String,
    /// Region id to body, in file order of first appearance.
    pub regions: BTreeMap<String, String>,
    /// Hash recorded in the header, if present.
    pub recorded_hash: Option<String>,
}

pub fn split(content: &str, comment: Comment) -> Result<Split, String> {
    let mut scaffold = String::new();
    let mut regions = BTreeMap::new();
    let mut recorded_hash = None;
    let mut open: Option<(String, String, usize)> = None;
    for (n, line) in content.split_inclusive('\n').enumerate() {
        if n == 0 {
            if let Some(i) = line.find(HASH_TAG) {
                let hex: String = line[i + HASH_TAG.len()..]
                    .chars()
                    .take_while(char::is_ascii_hexdigit)
                    .collect();
                recorded_hash = Some(hex);
                continue;
            }
        }
        if let Some((id, body, start)) = &mut open {
            if let Some(end) = comment.marker(line, END) {
                if end != id {
                    return Err(format!(
                        "line {}: `{END} {end}` closes region `{id}` opened on line {start}",
                        n + 1
                    ));
                }
                let (id, body, _) = open.take().expect("open region");
                if regions.insert(id.clone(), body).is_some() {
                    return Err(format!("region `{id}` appears twice"));
                }
                scaffold.push_str(line);
            } else if comment.marker(line, BEGIN).is_some() {
                return Err(format!("line {}: region nested inside `{id}`", n + 1));
            } else {
                body.push_str(line);
            }
        } else if let Some(id) = comment.marker(line, BEGIN) {
            open = Some((id.to_owned(), String::new(), n + 1));
            scaffold.push_str(line);
        } else if let Some(id) = comment.marker(line, END) {
            return Err(format!("line {}: `{END} {id}` without a matching begin", n + 1));
        } else {
            scaffold.push_str(line);
        }
    }
    if let Some((id, _, start)) = open {
        return Err(format!("region `{id}` opened on line {start} is never closed"));
    }
    Ok(Split {
        scaffold,
        regions,
        recorded_hash,
    })
}

pub fn hash(scaffold: &str) -> String {
    Sha256::digest(scaffold.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Prepends the header recording the scaffold hash of `body`.
pub fn seal(body: &str, comment: Comment) -> String {
    let s = split(body, comment).expect("templates produce balanced regions");
    let header = comment.line(&format!(
        "@generated by subsume {}; {HASH_TAG}{}; edit only between USER CODE markers",
        env!("CARGO_PKG_VERSION"),
        hash(&s.scaffold)
    ));
    format!("{header}\n{body}")
}

/// Replaces the bodies of `fresh`'s regions by those found in `regions`.
pub fn fill(fresh: &str, comment: Comment, regions: &BTreeMap<String, String>) -> String {
    let mut out = String::with_capacity(fresh.len());
    let mut skipping = false;
    for line in fresh.split_inclusive('\n') {
        if skipping {
            if comment.marker(line, END).is_some() {
                skipping = false;
                out.push_str(line);
            }
            continue;
        }
        out.push_str(line);
        if let Some(id) = comment.marker(line, BEGIN) {
            if let Some(body) = regions.get(id) {
                out.push_str(body);
                skipping = true;
            }
        }
    }
    out
}

/// Short description of how `old` differs from `new`, line-set based.
pub fn diff_summary(old: &str, new: &str) -> String {
    let old_lines: BTreeSet<&str> = old.lines().collect();
    let new_lines: BTreeSet<&str> = new.lines().collect();
    let removed: Vec<&str> = new.lines().filter(|l| !old_lines.contains(l)).collect();
    let added: Vec<&str> = old.lines().filter(|l| !new_lines.contains(l)).collect();
    let mut out = format!(
        "{} line(s) edited outside user regions, {} generated line(s) missing",
        added.len(),
        removed.len()
    );
    for l in added.iter().take(5) {
        out.push_str(&format!("\n  + {l}"));
    }
    for l in removed.iter().take(5) {
        out.push_str(&format!("\n  - {l}"));
    }
    out
}

//! Flat `key = value` configuration text.
//!
//! Grammar (one entry per line):
//!
//! ```text
//! # comment                      — ignored, as are blank lines
//! key = value                    — key: dotted segments of [A-Za-z0-9_]
//! precision = "INT8"             — values may be double-quoted
//! ```
//!
//! There are no sections or continuations; dotted keys (`ga.seed`) carry the
//! grouping. Duplicate keys in one source are rejected so a stale line can
//! never silently lose to a later one.

use std::collections::BTreeMap;

use crate::error::CliError;

/// One parsed `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    /// 1-based line number in the source text.
    pub line: usize,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|seg| {
            !seg.is_empty() && seg.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        })
}

/// Strips one pair of surrounding double quotes, if present.
fn unquote(value: &str) -> &str {
    value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(value)
}

/// Parses the whole text, rejecting malformed lines, invalid key names, and
/// duplicate keys. `source` names the text in error messages (a file path or
/// `command line`).
pub fn parse_kv(text: &str, source: &str) -> Result<Vec<KvEntry>, CliError> {
    let mut entries = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(CliError::Validation {
                message: format!("{source} line {line}: expected `key = value`"),
                key: None,
                line: Some(line),
            });
        };
        let key = key.trim();
        let value = unquote(value.trim()).to_string();
        if !valid_key(key) {
            return Err(CliError::Validation {
                message: format!(
                    "{source} line {line}: invalid key `{key}` \
                     (dotted segments of letters, digits, and underscores)"
                ),
                key: Some(key.to_string()),
                line: Some(line),
            });
        }
        if let Some(first) = seen.insert(key.to_string(), line) {
            return Err(CliError::Validation {
                message: format!(
                    "{source} line {line}: duplicate key `{key}` (first set on line {first})"
                ),
                key: Some(key.to_string()),
                line: Some(line),
            });
        }
        entries.push(KvEntry { key: key.to_string(), value, line });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_quotes_and_dotted_keys() {
        let text = "# run setup\nw_store = 4096\nprecision = \"INT8\"\n\nga.seed = 7\n";
        let entries = parse_kv(text, "cfg").unwrap();
        assert_eq!(
            entries,
            vec![
                KvEntry { key: "w_store".into(), value: "4096".into(), line: 2 },
                KvEntry { key: "precision".into(), value: "INT8".into(), line: 3 },
                KvEntry { key: "ga.seed".into(), value: "7".into(), line: 5 },
            ]
        );
    }

    #[test]
    fn malformed_lines_are_rejected_with_their_line_number() {
        let err = parse_kv("w_store = 1\njust words\n", "cfg").unwrap_err();
        assert!(err.message().contains("line 2"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let err = parse_kv("a = 1\na = 2\n", "cfg").unwrap_err();
        assert!(err.message().contains("duplicate key `a`"), "{err}");
        assert!(err.message().contains("line 2"), "{err}");
    }

    #[test]
    fn bad_key_names_are_rejected() {
        for bad in ["sp aced = 1", ".lead = 1", "trail. = 1", "a..b = 1", "a-b = 1"] {
            let err = parse_kv(bad, "cfg").unwrap_err();
            assert!(err.message().contains("invalid key"), "{bad}: {err}");
        }
    }

    #[test]
    fn values_keep_interior_spaces_and_symbols() {
        let entries = parse_kv("filter = area<=12000\n", "cfg").unwrap();
        assert_eq!(entries[0].value, "area<=12000");
    }
}

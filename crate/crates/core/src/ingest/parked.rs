//! Parked-domain detection by matching registrar landing-page templates.

use std::sync::OnceLock;

use regex::{Regex, RegexBuilder};
use serde::Serialize;

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../data/parked_patterns.txt");

#[derive(Debug, Clone)]
enum Matcher {
    Substring(String),
    Regex(Regex),
}

#[derive(Debug, Clone)]
pub struct ParkedPattern {
    /// The pattern line as written in the file.
    pub name: String,
    matcher: Matcher,
}

impl ParkedPattern {
    fn is_match(&self, lowered: &str, raw: &str) -> bool {
        match &self.matcher {
            Matcher::Substring(s) => lowered.contains(s.as_str()),
            Matcher::Regex(r) => r.is_match(raw),
        }
    }
}

/// A versioned set of parked-page patterns.
#[derive(Debug, Clone)]
pub struct PatternSet {
    pub version: Option<String>,
    patterns: Vec<ParkedPattern>,
}

impl PatternSet {
    /// Parses the pattern-file format: `re:` lines are regular expressions,
    /// other lines are substrings; both are case-insensitive. A comment of
    /// the form `# version: X` sets the version.
    pub fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut patterns = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    version = Some(v.trim().to_string());
                }
                continue;
            }
            let matcher = match line.strip_prefix("re:") {
                Some(expr) => Matcher::Regex(
                    RegexBuilder::new(expr)
                        .case_insensitive(true)
                        .build()
                        .map_err(|e| Error::invalid(format!("parked pattern on line {}: {e}", i + 1)))?,
                ),
                None => Matcher::Substring(line.to_lowercase()),
            };
            patterns.push(ParkedPattern {
                name: line.to_string(),
                matcher,
            });
        }
        Ok(Self { version, patterns })
    }

    /// The pattern set shipped with the crate.
    pub fn bundled() -> &'static PatternSet {
        static SET: OnceLock<PatternSet> = OnceLock::new();
        SET.get_or_init(|| PatternSet::parse(BUNDLED).expect("bundled parked patterns are valid"))
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[ParkedPattern] {
        &self.patterns
    }

    /// Number of patterns matching `text`.
    pub fn hit_count(&self, text: &str) -> usize {
        let lowered = text.to_lowercase();
        self.patterns.iter().filter(|p| p.is_match(&lowered, text)).count()
    }
}

/// Response metadata that travels with a fetched page.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HttpMeta {
    pub status: Option<u16>,
    pub content_type: Option<String>,
    /// Final URL after redirects, when different from the request.
    pub redirect_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParkedVerdict {
    pub parked: bool,
    pub pattern: Option<String>,
    /// Set when the body was not valid UTF-8 and could not be inspected.
    pub undecodable: bool,
}

/// Matches a page body, and the redirect target when present, against the
/// pattern set. Returns the first matching pattern.
pub fn match_parked(body: &[u8], meta: &HttpMeta, patterns: &PatternSet) -> ParkedVerdict {
    let Ok(text) = std::str::from_utf8(body) else {
        return ParkedVerdict {
            parked: false,
            pattern: None,
            undecodable: true,
        };
    };
    let lowered = text.to_lowercase();
    let redirect = meta.redirect_url.as_deref().unwrap_or("");
    let redirect_lower = redirect.to_lowercase();
    let hit = patterns
        .patterns
        .iter()
        .find(|p| p.is_match(&lowered, text) || (!redirect.is_empty() && p.is_match(&redirect_lower, redirect)));
    ParkedVerdict {
        parked: hit.is_some(),
        pattern: hit.map(|p| p.name.clone()),
        undecodable: false,
    }
}

/// Column names of [`page_features`].
pub const PAGE_FEATURES: [&str; 8] = [
    "body_bytes",
    "word_count",
    "link_count",
    "script_count",
    "paragraph_count",
    "pattern_hits",
    "status_ok",
    "redirected",
];

/// Simple structural page features for training a parked-page classifier.
pub fn page_features(body: &[u8], meta: &HttpMeta, patterns: &PatternSet) -> Vec<f64> {
    let text = String::from_utf8_lossy(body);
    let lowered = text.to_lowercase();
    let count = |needle: &str| lowered.matches(needle).count() as f64;
    vec![
        (body.len() as f64).ln_1p(),
        (text.split_whitespace().count() as f64).ln_1p(),
        count("<a "),
        count("<script"),
        count("<p"),
        patterns.hit_count(&text) as f64,
        matches!(meta.status, Some(200..=299)) as u8 as f64,
        meta.redirect_url.is_some() as u8 as f64,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok() -> HttpMeta {
        HttpMeta {
            status: Some(200),
            ..Default::default()
        }
    }

    #[test]
    fn bundled_set_is_versioned() {
        let set = PatternSet::bundled();
        assert!(set.version.is_some());
        assert!(!set.is_empty());
    }

    #[test]
    fn sale_phrase_is_parked() {
        let v = match_parked(b"<h1>This Domain Is For Sale!</h1>", &ok(), PatternSet::bundled());
        assert!(v.parked);
        assert_eq!(v.pattern.as_deref(), Some("this domain is for sale"));
    }

    #[test]
    fn empty_body_is_not_parked() {
        let v = match_parked(b"", &ok(), PatternSet::bundled());
        assert!(!v.parked);
        assert!(!v.undecodable);
    }

    #[test]
    fn invalid_utf8_is_flagged() {
        let v = match_parked(&[0xff, 0xfe, 0x00], &ok(), PatternSet::bundled());
        assert!(!v.parked);
        assert!(v.undecodable);
    }

    #[test]
    fn regex_lines_are_flagged() {
        let set = PatternSet::parse("# version: t\nre:^parked\\s+here$\nplain text\n").unwrap();
        assert_eq!(set.version.as_deref(), Some("t"));
        assert!(match_parked(b"PARKED here", &ok(), &set).parked);
        assert!(!match_parked(b"not parked here", &ok(), &set).parked);
        assert!(match_parked(b"some PLAIN TEXT", &ok(), &set).parked);
    }

    #[test]
    fn bad_regex_rejected() {
        assert!(PatternSet::parse("re:(unclosed").is_err());
    }

    #[test]
    fn redirect_to_parking_service() {
        let meta = HttpMeta {
            status: Some(200),
            redirect_url: Some("https://sedo.com/search/details/?domain=x.com&parked=1".into()),
            ..Default::default()
        };
        assert!(match_parked(b"<html></html>", &meta, PatternSet::bundled()).parked);
    }
}

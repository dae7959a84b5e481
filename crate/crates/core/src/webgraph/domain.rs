use crate::error::{Error, Result};

/// Normalizes a hostname or URL to the join key used everywhere else.
///
/// Lowercases, drops scheme, credentials, port, path, query and fragment, and
/// strips a single leading `www.`. Internationalized names are left as-is.
pub fn normalize_domain(raw: &str) -> Result<String> {
    let mut s = raw.trim().to_lowercase();
    if let Some(pos) = s.find("://") {
        s.drain(..pos + 3);
    }
    if let Some(end) = s.find(['/', '?', '#']) {
        s.truncate(end);
    }
    if let Some(at) = s.rfind('@') {
        s.drain(..=at);
    }
    if let Some(colon) = s.rfind(':') {
        if s[colon + 1..].chars().all(|c| c.is_ascii_digit()) {
            s.truncate(colon);
        }
    }
    while s.ends_with('.') {
        s.pop();
    }
    if let Some(rest) = s.strip_prefix("www.") {
        s = rest.to_string();
    }
    if s.is_empty() || s.contains(char::is_whitespace) || s.contains(',') {
        return Err(Error::InvalidDomain(raw.to_string()));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_url_parts() {
        assert_eq!(
            normalize_domain("https://WWW.Example.COM:8080/news?x=1").unwrap(),
            "example.com"
        );
        assert_eq!(normalize_domain("user@host.org.").unwrap(), "host.org");
        assert_eq!(normalize_domain("  blog.site.net ").unwrap(), "blog.site.net");
    }

    #[test]
    fn only_one_www_prefix_is_removed() {
        assert_eq!(normalize_domain("www.www.a.com").unwrap(), "www.a.com");
        assert_eq!(normalize_domain("wwwx.com").unwrap(), "wwwx.com");
    }

    #[test]
    fn rejects_empty() {
        assert!(normalize_domain("https://").is_err());
        assert!(normalize_domain("a b.com").is_err());
    }
}

//! Keyword expansions from the ConceptNet `/related` endpoint.

use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde_json::Value;

pub const DEFAULT_BASE_URL: &str = "https://api.conceptnet.io";

pub struct Client {
    http: reqwest::blocking::Client,
    base_url: String,
    lang: String,
}

impl Client {
    pub fn new(base_url: &str, lang: &str) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .context("building HTTP client")?;
        Ok(Self {
            http,
            base_url: base_url.trim_end_matches('/').to_owned(),
            lang: lang.to_owned(),
        })
    }

    /// Up to `limit` related terms for `keyword`, most related first.
    pub fn related(&self, keyword: &str, limit: usize) -> Result<Vec<String>> {
        let term = keyword.replace(' ', "_");
        let url = format!(
            "{base}/related/c/{lang}/{term}?filter=/c/{lang}&limit={n}",
            base = self.base_url,
            lang = self.lang,
            n = limit + 1
        );
        let resp = self
            .http
            .get(&url)
            .send()
            .with_context(|| format!("GET {url}"))?;
        if !resp.status().is_success() {
            bail!("GET {url}: HTTP {}", resp.status());
        }
        let body = resp.text().context("reading response body")?;
        parse_related(&body, &self.lang, keyword, limit)
    }
}

/// Extracts same-language terms from a `/related` response, dropping the
/// keyword itself.
pub fn parse_related(body: &str, lang: &str, keyword: &str, limit: usize) -> Result<Vec<String>> {
    let json: Value = serde_json::from_str(body).context("parsing ConceptNet response")?;
    let Some(related) = json.get("related").and_then(Value::as_array) else {
        bail!("response has no `related` array");
    };
    let prefix = format!("/c/{lang}/");
    let keyword = keyword.replace(' ', "_");
    let mut out: Vec<String> = Vec::new();
    for item in related {
        let Some(id) = item.get("@id").and_then(Value::as_str) else {
            continue;
        };
        let Some(term) = id.strip_prefix(&prefix) else {
            continue;
        };
        let term = term.split('/').next().unwrap_or(term);
        if term == keyword || out.iter().any(|t| t == term) {
            continue;
        }
        out.push(term.to_owned());
        if out.len() == limit {
            break;
        }
    }
    Ok(out)
}

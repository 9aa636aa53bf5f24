//! Wikitext parsing: dump ingestion and per-page structure extraction.
//!
//! `parse_wikitext` is a pure function from (title, text) to a structured
//! page record: redirect flag, distinct outgoing links, infoboxes, citation
//! template references and markup-stripped plain text. Malformed markup
//! degrades to warnings, never errors; real dumps contain plenty of it.

mod dump;
pub(crate) mod template;

pub use dump::{parse_dump, DumpReader};
pub use template::{link_spans, template_spans, Template, TemplateSpan};

use crate::corpus::canonicalize_title;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// The four template names that produce citation references.
pub const CITATION_TEMPLATES: [&str; 4] =
    ["Citation", "Cite journal", "Vancite journal", "Vcite journal"];

#[derive(Debug, Error)]
pub enum WikitextError {
    #[error("empty title")]
    EmptyTitle,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed dump at byte {offset} after {pages_complete} complete pages: {detail}")]
    Malformed {
        offset: u64,
        pages_complete: usize,
        detail: String,
    },
    #[error("truncated dump at byte {offset}: last complete page index is {pages_complete}")]
    Truncated { offset: u64, pages_complete: usize },
}

/// One page as read from a dump, before any wikitext interpretation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPage {
    pub title: String,
    pub namespace: i32,
    pub text: String,
}

/// An infobox template instance: normalized name plus key/value attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Infobox {
    /// Lowercased, whitespace-collapsed template name (e.g. "infobox
    /// university").
    pub template_name: String,
    /// Keys lowercased with spaces turned into underscores; values verbatim
    /// (nested markup kept).
    pub attributes: std::collections::BTreeMap<String, String>,
}

/// A citation template instance carrying a journal name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationRef {
    /// One of [`CITATION_TEMPLATES`].
    pub template_name: String,
    /// The journal= field value, verbatim apart from surrounding whitespace.
    pub journal_name_raw: String,
    /// Canonical title of the page containing the template.
    pub citing_title: String,
}

/// The structured form of one page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedPage {
    pub title: String,
    pub is_redirect: bool,
    pub redirect_target: Option<String>,
    pub infoboxes: Vec<Infobox>,
    pub outgoing_links: BTreeSet<String>,
    pub citations: Vec<CitationRef>,
    pub plain_text: String,
}

/// A parsed page plus any warnings raised along the way.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub page: ParsedPage,
    pub warnings: Vec<String>,
}

/// Parses one wikitext body into a [`ParsedPage`].
///
/// Links are every `[[target]]` / `[[target|label]]` occurrence outside
/// comment and nowiki spans, anywhere in the text (template interiors
/// included), canonicalized and deduplicated. Infoboxes are top-level
/// templates whose name starts with "infobox". Citations come from the four
/// recognized templates at any nesting depth, provided they carry a
/// non-empty journal= field.
pub fn parse_wikitext(title: &str, text: &str) -> Result<ParseOutcome, WikitextError> {
    let canonical_title = canonicalize_title(title).map_err(|_| WikitextError::EmptyTitle)?;
    let mut warnings = Vec::new();

    let no_comments = strip_comments(text, &mut warnings);
    // Markup scanning ignores nowiki content entirely; the plain-text pass
    // keeps it as literal text.
    let markup = strip_nowiki(&no_comments, false);
    let textual = strip_nowiki(&no_comments, true);

    if let Some(target) = redirect_target(&no_comments, &mut warnings) {
        let mut outgoing = BTreeSet::new();
        outgoing.insert(target.clone());
        return Ok(ParseOutcome {
            page: ParsedPage {
                title: canonical_title,
                is_redirect: true,
                redirect_target: Some(target),
                infoboxes: Vec::new(),
                outgoing_links: outgoing,
                citations: Vec::new(),
                plain_text: String::new(),
            },
            warnings,
        });
    }

    let spans = template_spans(&markup, &mut warnings);
    let mut infoboxes = Vec::new();
    let mut citations = Vec::new();
    for span in &spans {
        let parsed = Template::parse(&markup[span.body.clone()]);
        if span.top_level && parsed.name.starts_with("infobox") {
            infoboxes.push(Infobox {
                template_name: parsed.name.clone(),
                attributes: parsed
                    .named
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect(),
            });
        }
        if let Some(canonical) = citation_template_name(&parsed.name) {
            if let Some(journal) = parsed.named.get("journal").map(|v| v.trim()) {
                if !journal.is_empty() {
                    citations.push(CitationRef {
                        template_name: canonical.to_string(),
                        journal_name_raw: journal.to_string(),
                        citing_title: canonical_title.clone(),
                    });
                }
            }
        }
    }

    let mut outgoing_links = BTreeSet::new();
    for span in link_spans(&markup) {
        let inner = &markup[span];
        let target = template::split_top_level(inner, '|')
            .into_iter()
            .next()
            .unwrap_or("");
        if let Ok(canonical) = canonicalize_title(target) {
            outgoing_links.insert(canonical);
        }
    }

    let plain_text = build_plain_text(&textual, &mut warnings);

    Ok(ParseOutcome {
        page: ParsedPage {
            title: canonical_title,
            is_redirect: false,
            redirect_target: None,
            infoboxes,
            outgoing_links,
            citations,
            plain_text,
        },
        warnings,
    })
}

fn citation_template_name(normalized: &str) -> Option<&'static str> {
    CITATION_TEMPLATES
        .iter()
        .find(|name| name.to_ascii_lowercase() == normalized)
        .copied()
}

/// Detects `#REDIRECT [[target]]` (case-insensitive, optional colon) at the
/// start of the trimmed text.
fn redirect_target(text: &str, warnings: &mut Vec<String>) -> Option<String> {
    let trimmed = text.trim_start();
    let keyword = "#redirect";
    if trimmed.len() < keyword.len() || !trimmed[..keyword.len()].eq_ignore_ascii_case(keyword) {
        return None;
    }
    let rest = trimmed[keyword.len()..].trim_start_matches([' ', '\t', '\n', '\r', ':']);
    if let Some(open) = rest.find("[[") {
        if rest[..open].trim().is_empty() {
            if let Some(close) = rest[open + 2..].find("]]") {
                let inner = &rest[open + 2..open + 2 + close];
                let target = template::split_top_level(inner, '|')
                    .into_iter()
                    .next()
                    .unwrap_or("");
                if let Ok(canonical) = canonicalize_title(target) {
                    return Some(canonical);
                }
            }
        }
    }
    warnings.push("redirect marker without a valid target link".to_string());
    None
}

/// Removes `<!-- ... -->` spans; an unterminated comment swallows the rest
/// of the text with a warning.
fn strip_comments(text: &str, warnings: &mut Vec<String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("<!--") {
        out.push_str(&rest[..start]);
        match rest[start + 4..].find("-->") {
            Some(end) => rest = &rest[start + 4 + end + 3..],
            None => {
                warnings.push("unterminated HTML comment".to_string());
                return out;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Removes `<nowiki>...</nowiki>` spans. With `keep_content` the tags go but
/// the enclosed text stays; otherwise the whole span is dropped.
fn strip_nowiki(text: &str, keep_content: bool) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    loop {
        let Some(start) = find_ci(rest, "<nowiki>") else {
            out.push_str(rest);
            return out;
        };
        out.push_str(&rest[..start]);
        let after_open = &rest[start + "<nowiki>".len()..];
        match find_ci(after_open, "</nowiki>") {
            Some(end) => {
                if keep_content {
                    out.push_str(&after_open[..end]);
                }
                rest = &after_open[end + "</nowiki>".len()..];
            }
            None => {
                if keep_content {
                    out.push_str(after_open);
                }
                return out;
            }
        }
    }
}

fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    let hay = haystack.as_bytes();
    let ned = needle.as_bytes();
    if ned.is_empty() || hay.len() < ned.len() {
        return None;
    }
    (0..=hay.len() - ned.len()).find(|&i| {
        hay[i..i + ned.len()]
            .iter()
            .zip(ned)
            .all(|(a, b)| a.eq_ignore_ascii_case(b))
    })
}

/// Plain text: templates removed, ref elements removed, link markup reduced
/// to its label, and the four basic HTML entities decoded.
fn build_plain_text(text: &str, warnings: &mut Vec<String>) -> String {
    let mut scratch = Vec::new();
    let spans = template_spans(text, &mut scratch); // warnings already raised on the markup pass
    let mut without_templates = String::with_capacity(text.len());
    let mut cursor = 0;
    for span in spans.iter().filter(|s| s.top_level) {
        if span.outer.start >= cursor {
            without_templates.push_str(&text[cursor..span.outer.start]);
            cursor = span.outer.end;
        }
    }
    without_templates.push_str(&text[cursor..]);

    let without_refs = strip_ref_elements(&without_templates, warnings);
    let flattened = flatten_links(&without_refs);
    decode_entities(&flattened).trim().to_string()
}

/// Removes `<ref ...>...</ref>` elements and self-closing `<ref ... />`
/// tags, footnote content included.
fn strip_ref_elements(text: &str, warnings: &mut Vec<String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    loop {
        let Some(start) = find_ci(rest, "<ref") else {
            out.push_str(rest);
            return out;
        };
        out.push_str(&rest[..start]);
        let tag_rest = &rest[start..];
        match tag_rest.find('>') {
            Some(gt) if tag_rest[..gt].ends_with('/') => {
                rest = &tag_rest[gt + 1..];
            }
            Some(gt) => match find_ci(&tag_rest[gt + 1..], "</ref") {
                Some(close) => {
                    let after_close = &tag_rest[gt + 1 + close..];
                    match after_close.find('>') {
                        Some(end_gt) => rest = &after_close[end_gt + 1..],
                        None => {
                            warnings.push("unterminated ref element".to_string());
                            return out;
                        }
                    }
                }
                None => {
                    warnings.push("unterminated ref element".to_string());
                    return out;
                }
            },
            None => {
                warnings.push("unterminated ref tag".to_string());
                return out;
            }
        }
    }
}

/// Rewrites `[[target|label]]` to its label and `[[target]]` to the target
/// text, recursing into nested links.
fn flatten_links(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("[[") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match matching_link_close(after) {
            Some(close) => {
                let inner = &after[..close];
                let parts = template::split_top_level(inner, '|');
                let label = parts.last().copied().unwrap_or("");
                out.push_str(&flatten_links(label));
                rest = &after[close + 2..];
            }
            None => {
                // stray open brackets: keep them as literal text
                out.push_str("[[");
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Index of the `]]` closing the link whose `[[` was just consumed,
/// accounting for nested links.
fn matching_link_close(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut depth = 1;
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == b'[' && bytes[i + 1] == b'[' {
            depth += 1;
            i += 2;
        } else if bytes[i] == b']' && bytes[i + 1] == b']' {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    None
}

fn decode_entities(text: &str) -> String {
    text.replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(title: &str, text: &str) -> ParsedPage {
        parse_wikitext(title, text).unwrap().page
    }

    #[test]
    fn redirect_detection() {
        let page = parse("MIT", "#REDIRECT [[Harvard University]]");
        assert!(page.is_redirect);
        assert_eq!(page.redirect_target.as_deref(), Some("Harvard University"));
        assert!(page.infoboxes.is_empty());
        assert!(page.citations.is_empty());

        let lower = parse("MIT", "  #redirect: [[harvard_University]]");
        assert_eq!(lower.redirect_target.as_deref(), Some("Harvard University"));
    }

    #[test]
    fn redirect_without_target_downgrades() {
        let outcome = parse_wikitext("X", "#REDIRECT nowhere").unwrap();
        assert!(!outcome.page.is_redirect);
        assert!(!outcome.warnings.is_empty());
    }

    #[test]
    fn links_deduplicate_and_drop_anchors() {
        let page = parse("A", "[[MIT]] and [[MIT|the institute]] and [[MIT#History]]");
        let links: Vec<&str> = page.outgoing_links.iter().map(|s| s.as_str()).collect();
        assert_eq!(links, vec!["MIT"]);
    }

    #[test]
    fn links_inside_comments_and_nowiki_do_not_count() {
        let page = parse(
            "A",
            "[[Kept]] <!-- [[Hidden]] --> <nowiki>[[Also hidden]]</nowiki>",
        );
        assert_eq!(page.outgoing_links.len(), 1);
        assert!(page.outgoing_links.contains("Kept"));
        // nowiki content words stay in the plain text, comment content goes
        assert!(page.plain_text.contains("Also hidden"));
        assert!(!page.plain_text.contains("Hidden"));
    }

    #[test]
    fn infobox_extraction() {
        let page = parse(
            "A",
            "{{Infobox scientist|alma_mater=[[Yale University]]|employer=[[MIT]]}}",
        );
        assert_eq!(page.infoboxes.len(), 1);
        let infobox = &page.infoboxes[0];
        assert_eq!(infobox.template_name, "infobox scientist");
        assert_eq!(
            infobox.attributes.get("alma_mater").map(String::as_str),
            Some("[[Yale University]]")
        );
        assert_eq!(
            infobox.attributes.get("employer").map(String::as_str),
            Some("[[MIT]]")
        );
        // links inside the template still count as outgoing
        assert!(page.outgoing_links.contains("Yale University"));
        assert!(page.outgoing_links.contains("MIT"));
    }

    #[test]
    fn infobox_key_normalization_and_nesting() {
        let page = parse(
            "A",
            "{{Infobox university|Alma Mater=[[X]]|data={{nested|k=v}} kept}}",
        );
        let infobox = &page.infoboxes[0];
        assert!(infobox.attributes.contains_key("alma_mater"));
        assert_eq!(
            infobox.attributes.get("data").map(String::as_str),
            Some("{{nested|k=v}} kept")
        );
    }

    #[test]
    fn citations_from_recognized_templates_only() {
        let text = "{{Cite journal|last=X|journal=Nature|year=2001}} \
                    {{Cite journal|journal=Nature}} \
                    {{cite book|journal=Nope}} \
                    {{vcite journal | journal = Science }}";
        let page = parse("A", text);
        assert_eq!(page.citations.len(), 3);
        assert_eq!(page.citations[0].journal_name_raw, "Nature");
        assert_eq!(page.citations[1].journal_name_raw, "Nature");
        assert_eq!(page.citations[2].template_name, "Vcite journal");
        assert_eq!(page.citations[2].journal_name_raw, "Science");
        assert!(page
            .citations
            .iter()
            .all(|c| CITATION_TEMPLATES.contains(&c.template_name.as_str())));
    }

    #[test]
    fn citation_without_journal_field_dropped() {
        let page = parse("A", "{{Citation|title=On Things|year=1999}}");
        assert!(page.citations.is_empty());
    }

    #[test]
    fn nested_citation_found() {
        let page = parse("A", "{{reflist|refs={{Cite journal|journal=Nature}}}}");
        assert_eq!(page.citations.len(), 1);
    }

    #[test]
    fn unbalanced_braces_recover_with_warning() {
        let outcome = parse_wikitext("A", "{{Infobox thing|key=value").unwrap();
        assert_eq!(outcome.page.infoboxes.len(), 1);
        assert!(outcome.warnings.iter().any(|w| w.contains("unbalanced")));
    }

    #[test]
    fn plain_text_strips_markup_keeps_labels() {
        let text = "'''Harvard''' is in [[Cambridge|the city]].<ref>{{Cite journal|journal=N}}</ref>\n\
                    {{Infobox u|k=v}} See [[MIT]]. &amp; more <!-- hidden -->";
        let page = parse("Harvard", text);
        assert!(page.plain_text.contains("the city"));
        assert!(page.plain_text.contains("MIT"));
        assert!(page.plain_text.contains("& more"));
        assert!(!page.plain_text.contains("Infobox"));
        assert!(!page.plain_text.contains("Cite journal"));
        assert!(!page.plain_text.contains("hidden"));
        assert!(!page.plain_text.contains("[["));
    }

    #[test]
    fn parse_is_pure() {
        let text = "[[A]] {{Infobox x|k=[[B]]}} {{Citation|journal=J}} text";
        let first = parse_wikitext("T", text).unwrap();
        let second = parse_wikitext("T", text).unwrap();
        assert_eq!(first.page, second.page);
    }

    #[test]
    fn empty_title_rejected() {
        assert!(matches!(
            parse_wikitext("   ", "text"),
            Err(WikitextError::EmptyTitle)
        ));
    }
}

//! Brace-balanced template and link scanning.

use std::ops::Range;

/// Byte ranges of one `{{ ... }}` occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSpan {
    /// The whole template including braces.
    pub outer: Range<usize>,
    /// The content between the braces.
    pub body: Range<usize>,
    /// True when the template is not nested inside another one.
    pub top_level: bool,
}

/// Scans for all template spans at every nesting depth.
///
/// Stray `}}` are skipped; unclosed `{{` are closed at the end of the text
/// and reported through `warnings`.
pub fn template_spans(text: &str, warnings: &mut Vec<String>) -> Vec<TemplateSpan> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == b'{' && bytes[i + 1] == b'{' {
            stack.push(i);
            i += 2;
        } else if bytes[i] == b'}' && bytes[i + 1] == b'}' {
            if let Some(open) = stack.pop() {
                spans.push(TemplateSpan {
                    outer: open..i + 2,
                    body: open + 2..i,
                    top_level: stack.is_empty(),
                });
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    while let Some(open) = stack.pop() {
        warnings.push("unbalanced template braces, template closed at end of text".to_string());
        spans.push(TemplateSpan {
            outer: open..text.len(),
            body: open + 2..text.len(),
            top_level: stack.is_empty(),
        });
    }
    spans.sort_by_key(|s| s.outer.start);
    spans
}

/// Byte ranges of the content of every `[[ ... ]]` occurrence, nested links
/// included. Unclosed `[[` are ignored.
pub fn link_spans(text: &str) -> Vec<Range<usize>> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == b'[' && bytes[i + 1] == b'[' {
            stack.push(i);
            i += 2;
        } else if bytes[i] == b']' && bytes[i + 1] == b']' {
            if let Some(open) = stack.pop() {
                spans.push(open + 2..i);
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    spans.sort_by_key(|s| s.start);
    spans
}

/// A parsed template body: normalized name plus named parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    /// Lowercased, whitespace-collapsed name.
    pub name: String,
    /// Named parameters: normalized key -> trimmed raw value. Later
    /// duplicates overwrite earlier ones, matching renderer behavior.
    pub named: std::collections::BTreeMap<String, String>,
}

impl Template {
    /// Parses `name|key=value|...` content (the text between the braces).
    pub fn parse(body: &str) -> Template {
        let mut parts = split_top_level(body, '|').into_iter();
        let name = normalize_name(parts.next().unwrap_or(""));
        let mut named = std::collections::BTreeMap::new();
        for part in parts {
            if let Some(eq) = find_top_level(part, '=') {
                let key = normalize_key(&part[..eq]);
                if !key.is_empty() {
                    named.insert(key, part[eq + 1..].trim().to_string());
                }
            }
            // positional parameters carry no key and no infobox attribute
        }
        Template { name, named }
    }
}

/// Lowercase and collapse internal whitespace: "Cite  Journal " -> "cite
/// journal".
fn normalize_name(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Lowercase and turn whitespace runs into single underscores: "Alma mater"
/// -> "alma_mater".
fn normalize_key(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
        .to_lowercase()
}

/// Splits on `sep` at brace/bracket depth zero.
pub fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let bytes = text.as_bytes();
    let sep = sep as u8;
    let mut parts = Vec::new();
    let mut brace_depth = 0i32;
    let mut bracket_depth = 0i32;
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        if i + 1 < bytes.len() {
            match (bytes[i], bytes[i + 1]) {
                (b'{', b'{') => {
                    brace_depth += 1;
                    i += 2;
                    continue;
                }
                (b'}', b'}') => {
                    brace_depth -= 1;
                    i += 2;
                    continue;
                }
                (b'[', b'[') => {
                    bracket_depth += 1;
                    i += 2;
                    continue;
                }
                (b']', b']') => {
                    bracket_depth -= 1;
                    i += 2;
                    continue;
                }
                _ => {}
            }
        }
        if bytes[i] == sep && brace_depth <= 0 && bracket_depth <= 0 {
            parts.push(&text[start..i]);
            start = i + 1;
        }
        i += 1;
    }
    parts.push(&text[start..]);
    parts
}

/// Byte index of the first `sep` at depth zero, if any.
fn find_top_level(text: &str, sep: char) -> Option<usize> {
    let bytes = text.as_bytes();
    let sep = sep as u8;
    let mut brace_depth = 0i32;
    let mut bracket_depth = 0i32;
    let mut i = 0;
    while i < bytes.len() {
        if i + 1 < bytes.len() {
            match (bytes[i], bytes[i + 1]) {
                (b'{', b'{') => {
                    brace_depth += 1;
                    i += 2;
                    continue;
                }
                (b'}', b'}') => {
                    brace_depth -= 1;
                    i += 2;
                    continue;
                }
                (b'[', b'[') => {
                    bracket_depth += 1;
                    i += 2;
                    continue;
                }
                (b']', b']') => {
                    bracket_depth -= 1;
                    i += 2;
                    continue;
                }
                _ => {}
            }
        }
        if bytes[i] == sep && brace_depth <= 0 && bracket_depth <= 0 {
            return Some(i);
        }
        i += 1;
    }
    None
}

//! The immutable indexed corpus: canonical pages, redirect table, inverted
//! link index, pageview totals and entity kinds.
//!
//! Construction is single-writer (`build_store`, then zero or more
//! `aggregate_pageviews` passes during ingest); after that the store is
//! read-only and safe to share across threads.

use crate::diag::Diagnostics;
use crate::wikitext::ParsedPage;
use percent_encoding::percent_decode_str;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Read, Write};
use thiserror::Error;

/// Redirect chains longer than this are treated as cycles.
const REDIRECT_DEPTH_LIMIT: usize = 16;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("empty title")]
    EmptyTitle,
    #[error("redirect cycle at {0}")]
    RedirectCycle(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("store file error: {0}")]
    Format(String),
}

/// Coarse entity classification loaded from the type-map file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    University,
    Person,
    Journal,
    Other,
}

impl std::str::FromStr for EntityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "university" => Ok(EntityKind::University),
            "person" => Ok(EntityKind::Person),
            "journal" => Ok(EntityKind::Journal),
            "other" => Ok(EntityKind::Other),
            other => Err(format!("unknown entity kind: {other}")),
        }
    }
}

/// One line of a pageview file in the pagecounts-raw layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageViewRecord {
    pub project: String,
    pub title_urlencoded: String,
    pub count: u64,
    pub source_file: String,
}

/// Counters from one `aggregate_pageviews` pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PageviewSummary {
    pub accepted_records: u64,
    pub accepted_views: u64,
    pub skipped_unknown: u64,
    pub skipped_project: u64,
    pub malformed: u64,
}

impl PageviewSummary {
    pub fn merge(&mut self, other: &PageviewSummary) {
        self.accepted_records += other.accepted_records;
        self.accepted_views += other.accepted_views;
        self.skipped_unknown += other.skipped_unknown;
        self.skipped_project += other.skipped_project;
        self.malformed += other.malformed;
    }
}

/// Canonical title form used for every join in the pipeline: section anchor
/// removed, underscores to spaces, whitespace collapsed and trimmed, first
/// character upper-cased.
pub fn canonicalize_title(raw: &str) -> Result<String, CorpusError> {
    let before_anchor = raw.split('#').next().unwrap_or("");
    let collapsed = before_anchor
        .replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    let mut chars = collapsed.chars();
    match chars.next() {
        None => Err(CorpusError::EmptyTitle),
        Some(first) => {
            let mut title: String = first.to_uppercase().collect();
            title.push_str(chars.as_str());
            Ok(title)
        }
    }
}

/// The queryable corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStore {
    pages: BTreeMap<String, ParsedPage>,
    redirects: BTreeMap<String, String>,
    in_links: BTreeMap<String, BTreeSet<String>>,
    views: BTreeMap<String, u64>,
    kinds: BTreeMap<String, EntityKind>,
}

/// Builds the store from parsed pages and the entity-kind map.
///
/// Link targets are redirect-resolved before indexing and redirect pages
/// contribute no in-link entries as sources. Duplicate titles keep the later
/// page, with a warning.
pub fn build_store(
    pages: impl IntoIterator<Item = ParsedPage>,
    type_map: &BTreeMap<String, EntityKind>,
    diag: &mut Diagnostics,
) -> CorpusStore {
    let mut store = CorpusStore::default();
    for page in pages {
        if store.pages.contains_key(&page.title) {
            diag.warn(format!("duplicate title {}: later page replaces earlier", page.title));
        }
        if page.is_redirect {
            if let Some(target) = &page.redirect_target {
                store.redirects.insert(page.title.clone(), target.clone());
            }
        } else {
            store.redirects.remove(&page.title);
        }
        store.pages.insert(page.title.clone(), page);
    }
    store.kinds = type_map.clone();

    // Detect broken redirect chains once, up front.
    for source in store.redirects.keys().cloned().collect::<Vec<_>>() {
        match store.resolve_redirect(&source) {
            Ok(target) if !store.pages.contains_key(&target) => {
                diag.warn(format!("dangling redirect target {target} (from {source})"));
            }
            Ok(_) => {}
            Err(_) => diag.warn(format!("broken redirect chain starting at {source}")),
        }
    }

    let mut dangling: BTreeSet<String> = BTreeSet::new();
    let sources: Vec<(String, Vec<String>)> = store
        .pages
        .values()
        .filter(|p| !p.is_redirect)
        .map(|p| (p.title.clone(), p.outgoing_links.iter().cloned().collect()))
        .collect();
    for (source, targets) in sources {
        for target in targets {
            let resolved = store.resolve_redirect(&target).unwrap_or(target);
            if !store.pages.contains_key(&resolved) {
                dangling.insert(resolved.clone());
            }
            store
                .in_links
                .entry(resolved)
                .or_default()
                .insert(source.clone());
        }
    }
    for target in dangling {
        diag.warn(format!("dangling link target {target}"));
    }
    store
}

impl CorpusStore {
    /// Follows redirect chains to a fixed point, erroring on cycles or
    /// chains deeper than the depth cap. A dangling target is returned
    /// as-is.
    pub fn resolve_redirect(&self, title: &str) -> Result<String, CorpusError> {
        let mut current = title.to_string();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        seen.insert(current.clone());
        for _ in 0..REDIRECT_DEPTH_LIMIT {
            match self.redirects.get(&current) {
                None => return Ok(current),
                Some(next) => {
                    if seen.contains(next) {
                        return Err(CorpusError::RedirectCycle(next.clone()));
                    }
                    seen.insert(next.clone());
                    current = next.clone();
                }
            }
        }
        if self.redirects.contains_key(&current) {
            return Err(CorpusError::RedirectCycle(current));
        }
        Ok(current)
    }

    /// Resolves an entity name to the non-redirect corpus page it denotes,
    /// if any.
    pub fn lookup_page(&self, canonical_name: &str) -> Option<String> {
        if !self.pages.contains_key(canonical_name) && !self.redirects.contains_key(canonical_name)
        {
            return None;
        }
        let resolved = self.resolve_redirect(canonical_name).ok()?;
        match self.pages.get(&resolved) {
            Some(page) if !page.is_redirect => Some(resolved),
            _ => None,
        }
    }

    /// Adds pageview counts from one pagecounts-raw file: lines of
    /// `<project> <urlencoded-title> <count> <bytes>`. Counts fold onto the
    /// redirect-resolved title; titles outside the corpus are skipped.
    pub fn aggregate_pageviews(
        &mut self,
        reader: impl BufRead,
        source_file: &str,
        project: &str,
        diag: &mut Diagnostics,
    ) -> Result<PageviewSummary, CorpusError> {
        let mut summary = PageviewSummary::default();
        for (index, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record = match parse_pageview_line(&line, source_file) {
                Some(record) => record,
                None => {
                    summary.malformed += 1;
                    diag.warn(format!("{source_file}:{}: malformed pageview line", index + 1));
                    continue;
                }
            };
            if record.project != project {
                summary.skipped_project += 1;
                continue;
            }
            let decoded = percent_decode_str(&record.title_urlencoded)
                .decode_utf8_lossy()
                .into_owned();
            let Ok(canonical) = canonicalize_title(&decoded) else {
                summary.malformed += 1;
                continue;
            };
            match self.lookup_page(&canonical) {
                Some(resolved) => {
                    *self.views.entry(resolved).or_insert(0) += record.count;
                    summary.accepted_records += 1;
                    summary.accepted_views += record.count;
                }
                None => summary.skipped_unknown += 1,
            }
        }
        Ok(summary)
    }

    /// Number of distinct non-redirect pages whose plain text contains
    /// `term` as a substring bounded by non-alphanumeric characters or text
    /// edges. The entity's own page does not count.
    pub fn mention_count(&self, term: &str) -> usize {
        if term.is_empty() {
            return 0;
        }
        self.pages
            .values()
            .filter(|page| !page.is_redirect && page.title != term)
            .filter(|page| contains_bounded(&page.plain_text, term))
            .count()
    }

    pub fn kind_of(&self, title: &str) -> EntityKind {
        self.kinds.get(title).copied().unwrap_or(EntityKind::Other)
    }

    pub fn page(&self, title: &str) -> Option<&ParsedPage> {
        self.pages.get(title)
    }

    pub fn pages(&self) -> impl Iterator<Item = &ParsedPage> {
        self.pages.values()
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }

    pub fn redirect_count(&self) -> usize {
        self.redirects.len()
    }

    pub fn in_links(&self, title: &str) -> Option<&BTreeSet<String>> {
        self.in_links.get(title)
    }

    pub fn link_edge_count(&self) -> usize {
        self.in_links.values().map(|s| s.len()).sum()
    }

    pub fn citation_count(&self) -> usize {
        self.pages.values().map(|p| p.citations.len()).sum()
    }

    pub fn views(&self, title: &str) -> u64 {
        self.views.get(title).copied().unwrap_or(0)
    }

    pub fn total_views(&self) -> u64 {
        self.views.values().sum()
    }

    /// Distinct redirect-resolved outgoing link targets of a page.
    pub fn resolved_outgoing(&self, title: &str) -> BTreeSet<String> {
        let Some(page) = self.pages.get(title) else {
            return BTreeSet::new();
        };
        page.outgoing_links
            .iter()
            .map(|t| self.resolve_redirect(t).unwrap_or_else(|_| t.clone()))
            .collect()
    }

    pub fn save_json(&self, writer: impl Write) -> Result<(), CorpusError> {
        let file = StoreFile {
            format_version: STORE_FORMAT_VERSION,
            store: self,
        };
        serde_json::to_writer(writer, &file).map_err(|e| CorpusError::Format(e.to_string()))
    }

    pub fn load_json(reader: impl Read) -> Result<CorpusStore, CorpusError> {
        let file: StoreFileOwned =
            serde_json::from_reader(reader).map_err(|e| CorpusError::Format(e.to_string()))?;
        if file.format_version != STORE_FORMAT_VERSION {
            return Err(CorpusError::Format(format!(
                "unsupported store format version {}",
                file.format_version
            )));
        }
        Ok(file.store)
    }
}

const STORE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct StoreFile<'a> {
    format_version: u32,
    store: &'a CorpusStore,
}

#[derive(Deserialize)]
struct StoreFileOwned {
    format_version: u32,
    store: CorpusStore,
}

fn parse_pageview_line(line: &str, source_file: &str) -> Option<PageViewRecord> {
    let mut fields = line.split_whitespace();
    let project = fields.next()?;
    let title = fields.next()?;
    let count: u64 = fields.next()?.parse().ok()?;
    Some(PageViewRecord {
        project: project.to_string(),
        title_urlencoded: title.to_string(),
        count,
        source_file: source_file.to_string(),
    })
}

/// Case-sensitive substring search requiring non-alphanumeric characters
/// (or text edges) on both sides of the hit.
fn contains_bounded(haystack: &str, needle: &str) -> bool {
    for (start, _) in haystack.match_indices(needle) {
        let end = start + needle.len();
        let left_ok = haystack[..start]
            .chars()
            .next_back()
            .map_or(true, |c| !c.is_alphanumeric());
        let right_ok = haystack[end..]
            .chars()
            .next()
            .map_or(true, |c| !c.is_alphanumeric());
        if left_ok && right_ok {
            return true;
        }
    }
    false
}

/// Loads the type-map TSV: `title<TAB>kind` with kinds University, Person,
/// Journal or Other. Blank lines and `#` comments are skipped.
pub fn load_type_map(
    reader: impl BufRead,
    diag: &mut Diagnostics,
) -> Result<BTreeMap<String, EntityKind>, CorpusError> {
    let mut map = BTreeMap::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((title, kind)) = trimmed.split_once('\t') else {
            diag.warn(format!("type map line {}: missing tab separator", index + 1));
            continue;
        };
        let Ok(canonical) = canonicalize_title(title) else {
            diag.warn(format!("type map line {}: empty title", index + 1));
            continue;
        };
        match kind.trim().parse::<EntityKind>() {
            Ok(kind) => {
                map.insert(canonical, kind);
            }
            Err(message) => diag.warn(format!("type map line {}: {message}", index + 1)),
        }
    }
    Ok(map)
}

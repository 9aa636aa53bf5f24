//! Journal ranking from citation templates: name normalization and alias
//! aggregation, Citers/Citations/HasPage measures, weighted scoring and
//! regression-based weight fitting against impact factors.

use crate::corpus::CorpusStore;
use crate::diag::Diagnostics;
use crate::stats::{self, StatsError};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("empty journal name after normalization")]
    EmptyName,
    #[error("insufficient data: need at least {need} journals with targets, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Per-journal citation measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalStats {
    pub canonical_name: String,
    /// Total citation-template instances naming the journal.
    pub citations: u64,
    /// Distinct pages citing the journal; a page citing it twice counts
    /// once.
    pub citers: u64,
    /// Whether the corpus holds a dedicated page for the journal, redirects
    /// accepted.
    pub has_page: bool,
}

/// Fitted (or fixed) linear weights for the journal score.
#[derive(Debug, Clone, PartialEq)]
pub struct JournalWeightFit {
    pub coef_citers: f64,
    pub coef_citations: f64,
    pub coef_haspage: f64,
    pub intercept: f64,
    pub residual_norm: f64,
}

/// The published combination: 4.3848 * Citers + 4.42 * Citations +
/// 0.8238 * HasPage, no intercept.
pub fn reference_weights() -> JournalWeightFit {
    JournalWeightFit {
        coef_citers: 4.3848,
        coef_citations: 4.42,
        coef_haspage: 0.8238,
        intercept: 0.0,
        residual_norm: 0.0,
    }
}

/// Alias table mapping normalized name variants to canonical journal names.
#[derive(Debug, Clone, Default)]
pub struct JournalAliasTable {
    map: BTreeMap<String, String>,
}

impl JournalAliasTable {
    /// Builds a table from raw (alias, canonical) pairs; both sides go
    /// through the name normalization pipeline.
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut map = BTreeMap::new();
        for (alias, canonical) in pairs {
            let (Some(alias), Some(canonical)) =
                (normalize_pipeline(&alias), normalize_pipeline(&canonical))
            else {
                continue;
            };
            map.insert(alias, canonical);
        }
        JournalAliasTable { map }
    }

    /// The bundled default table (covers the TPAMI name variants).
    pub fn bundled() -> Self {
        let pairs = include_str!("../data/journal_aliases.tsv")
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .filter_map(|l| {
                l.split_once('\t')
                    .map(|(a, c)| (a.to_string(), c.to_string()))
            });
        JournalAliasTable::new(pairs)
    }

    /// Extends this table with further pairs (later entries win).
    pub fn extend(&mut self, pairs: impl IntoIterator<Item = (String, String)>) {
        let other = JournalAliasTable::new(pairs);
        self.map.extend(other.map);
    }

    fn resolve(&self, normalized: &str) -> String {
        self.map
            .get(normalized)
            .cloned()
            .unwrap_or_else(|| normalized.to_string())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Canonicalizes a raw journal name: trim, collapse whitespace, strip wiki
/// link markup (keeping the target), upper-case, strip a leading "THE ",
/// strip trailing periods, then apply the alias table.
pub fn normalize_journal_name(
    raw: &str,
    aliases: &JournalAliasTable,
) -> Result<String, JournalError> {
    let normalized = normalize_pipeline(raw).ok_or(JournalError::EmptyName)?;
    Ok(aliases.resolve(&normalized))
}

/// The deterministic part of the pipeline, without alias lookup.
fn normalize_pipeline(raw: &str) -> Option<String> {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    let unlinked = strip_link_markup(&collapsed);
    let mut name = unlinked
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_uppercase();
    if let Some(stripped) = name.strip_prefix("THE ") {
        name = stripped.to_string();
    }
    let name = name.trim_end_matches('.').trim().to_string();
    if name.is_empty() {
        None
    } else {
        Some(name)
    }
}

/// `[[Target|label]]` and `[[Target]]` both reduce to `Target`.
fn strip_link_markup(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("[[") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match after.find("]]") {
            Some(close) => {
                let inner = &after[..close];
                let target = inner.split('|').next().unwrap_or("").trim();
                out.push_str(target);
                rest = &after[close + 2..];
            }
            None => {
                out.push_str(after);
                return out;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Aggregates citation references into per-journal stats.
///
/// The journal universe is the union of all cited (normalized) names and
/// the titles of corpus pages tagged with kind Journal; a journal page that
/// is never cited still shows up with zero counts.
pub fn aggregate_journal_stats(
    store: &CorpusStore,
    aliases: &JournalAliasTable,
    diag: &mut Diagnostics,
) -> BTreeMap<String, JournalStats> {
    // Normalized name -> resolvable page, for the HasPage measure. Redirect
    // titles count when they land on a real page.
    let mut page_names: BTreeSet<String> = BTreeSet::new();
    for page in store.pages() {
        if store.lookup_page(&page.title).is_some() {
            if let Ok(name) = normalize_journal_name(&page.title, aliases) {
                page_names.insert(name);
            }
        }
    }

    let mut citations: BTreeMap<String, u64> = BTreeMap::new();
    let mut citers: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for page in store.pages() {
        for citation in &page.citations {
            match normalize_journal_name(&citation.journal_name_raw, aliases) {
                Ok(name) => {
                    *citations.entry(name.clone()).or_insert(0) += 1;
                    citers
                        .entry(name)
                        .or_default()
                        .insert(citation.citing_title.clone());
                }
                Err(_) => diag.warn(format!(
                    "{}: citation with empty journal name dropped",
                    page.title
                )),
            }
        }
    }

    let mut universe: BTreeSet<String> = citations.keys().cloned().collect();
    for page in store.pages() {
        if page.is_redirect {
            continue;
        }
        if store.kind_of(&page.title) == crate::corpus::EntityKind::Journal {
            if let Ok(name) = normalize_journal_name(&page.title, aliases) {
                universe.insert(name);
            }
        }
    }

    universe
        .into_iter()
        .map(|name| {
            let stats = JournalStats {
                citations: citations.get(&name).copied().unwrap_or(0),
                citers: citers.get(&name).map(|s| s.len() as u64).unwrap_or(0),
                has_page: page_names.contains(&name),
                canonical_name: name.clone(),
            };
            (name, stats)
        })
        .collect()
}

/// Per-journal measure triple scaled for scoring: citers and citations
/// min-max scaled to [0,1] over the universe, has_page as 0/1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledJournal {
    pub citers: f64,
    pub citations: f64,
    pub has_page: f64,
}

/// Min-max scales the citers and citations measures over the whole map.
pub fn scale_journal_stats(
    stats_map: &BTreeMap<String, JournalStats>,
) -> BTreeMap<String, ScaledJournal> {
    let names: Vec<&String> = stats_map.keys().collect();
    let citers: Vec<f64> = names.iter().map(|n| stats_map[*n].citers as f64).collect();
    let citations: Vec<f64> = names
        .iter()
        .map(|n| stats_map[*n].citations as f64)
        .collect();
    let citers_scaled = stats::minmax_scale(&citers);
    let citations_scaled = stats::minmax_scale(&citations);
    names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            (
                name.clone(),
                ScaledJournal {
                    citers: citers_scaled[i],
                    citations: citations_scaled[i],
                    has_page: if stats_map[name].has_page { 1.0 } else { 0.0 },
                },
            )
        })
        .collect()
}

/// Linear journal score over scaled measures.
pub fn journal_score(scaled: &ScaledJournal, fit: &JournalWeightFit) -> f64 {
    fit.coef_citers * scaled.citers
        + fit.coef_citations * scaled.citations
        + fit.coef_haspage * scaled.has_page
        + fit.intercept
}

/// Fits score weights by least squares against per-journal targets (the
/// 5-year impact factor in the published setup). Journals without a target
/// are excluded and reported; at least four matched journals are required.
pub fn fit_journal_weights(
    scaled: &BTreeMap<String, ScaledJournal>,
    targets: &BTreeMap<String, f64>,
    with_intercept: bool,
    diag: &mut Diagnostics,
) -> Result<JournalWeightFit, JournalError> {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (name, journal) in scaled {
        match targets.get(name) {
            Some(target) => {
                rows.push(vec![journal.citers, journal.citations, journal.has_page]);
                y.push(*target);
            }
            None => diag.warn(format!("journal {name} has no target, excluded from fit")),
        }
    }
    if rows.len() < 4 {
        return Err(JournalError::InsufficientData {
            need: 4,
            got: rows.len(),
        });
    }
    let fit = stats::linear_regression(&rows, &y, with_intercept)?;
    Ok(JournalWeightFit {
        coef_citers: fit.coefficients[0],
        coef_citations: fit.coefficients[1],
        coef_haspage: fit.coefficients[2],
        intercept: fit.intercept,
        residual_norm: fit.residual_norm,
    })
}

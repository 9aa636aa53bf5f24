//! University ranking methods over a built corpus: incoming links,
//! incoming/outgoing ratio, pageviews, infobox attributes, universe
//! filtering, weighted combination and tau-maximizing weight fitting.

use crate::corpus::{CorpusStore, EntityKind};
use crate::diag::Diagnostics;
use crate::stats::{self, SimplexConfig};
use crate::wikitext::template;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("insufficient overlap: need at least {need} common entities, got {got}")]
    InsufficientOverlap { need: usize, got: usize },
    #[error("need at least two components, got {0}")]
    TooFewComponents(usize),
    #[error("negative component value {0}")]
    NegativeComponent(f64),
    #[error("weights must be nonnegative with a positive sum")]
    InvalidWeights,
    #[error("unknown attribute group: {0}")]
    UnknownGroup(String),
}

/// One row of a ranking: entity, raw score and fractional rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub entity: String,
    pub score: f64,
    pub rank: f64,
}

/// An ordered ranking under one method. Entries are sorted by score
/// descending (ties by title ascending for a stable display order) and
/// carry fractional average ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingList {
    pub method_id: String,
    pub entries: Vec<RankEntry>,
}

impl RankingList {
    /// Builds a list from raw scores, sorting and assigning fractional
    /// ranks: tied scores share the mean of the positions they span.
    pub fn from_scores(method_id: &str, scores: impl IntoIterator<Item = (String, f64)>) -> Self {
        let mut entries: Vec<RankEntry> = scores
            .into_iter()
            .map(|(entity, score)| RankEntry {
                entity,
                score,
                rank: 0.0,
            })
            .collect();
        entries.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap()
                .then_with(|| a.entity.cmp(&b.entity))
        });
        let n = entries.len();
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && entries[j + 1].score == entries[i].score {
                j += 1;
            }
            let rank = (i + 1 + j + 1) as f64 / 2.0;
            for entry in &mut entries[i..=j] {
                entry.rank = rank;
            }
            i = j + 1;
        }
        RankingList {
            method_id: method_id.to_string(),
            entries,
        }
    }

    pub fn score_map(&self) -> BTreeMap<String, f64> {
        self.entries
            .iter()
            .map(|e| (e.entity.clone(), e.score))
            .collect()
    }

    pub fn rank_map(&self) -> BTreeMap<String, f64> {
        self.entries
            .iter()
            .map(|e| (e.entity.clone(), e.rank))
            .collect()
    }
}

/// An externally published ranking consumed as ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRanking {
    pub name: String,
    /// Canonical entity name -> rank (1 = best).
    pub positions: BTreeMap<String, f64>,
}

/// Named nonnegative component weights, stored normalized to sum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<(String, f64)>,
}

impl WeightVector {
    pub fn new(weights: Vec<(String, f64)>) -> Result<Self, RankError> {
        if weights.iter().any(|(_, w)| *w < 0.0 || !w.is_finite()) {
            return Err(RankError::InvalidWeights);
        }
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Err(RankError::InvalidWeights);
        }
        Ok(WeightVector {
            weights: weights.into_iter().map(|(id, w)| (id, w / total)).collect(),
        })
    }

    /// The infobox formula defaults: faculty 0.5, alumni 0.3, visibility
    /// 0.1, other 0.1.
    pub fn infobox_default() -> Self {
        WeightVector::new(vec![
            ("faculty".to_string(), 0.5),
            ("alumni".to_string(), 0.3),
            ("visibility".to_string(), 0.1),
            ("other".to_string(), 0.1),
        ])
        .expect("static weights")
    }

    pub fn uniform(ids: &[&str]) -> Self {
        WeightVector::new(ids.iter().map(|id| (id.to_string(), 1.0)).collect())
            .expect("uniform weights")
    }

    pub fn get(&self, id: &str) -> f64 {
        self.weights
            .iter()
            .find(|(wid, _)| wid == id)
            .map(|(_, w)| *w)
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(id, w)| (id.as_str(), *w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// The three infobox attribute groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AttributeGroupId {
    Faculty,
    Alumni,
    OtherAffiliations,
}

impl AttributeGroupId {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttributeGroupId::Faculty => "faculty",
            AttributeGroupId::Alumni => "alumni",
            AttributeGroupId::OtherAffiliations => "other_affiliations",
        }
    }
}

impl std::str::FromStr for AttributeGroupId {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "faculty" => Ok(AttributeGroupId::Faculty),
            "alumni" => Ok(AttributeGroupId::Alumni),
            "other_affiliations" => Ok(AttributeGroupId::OtherAffiliations),
            other => Err(RankError::UnknownGroup(other.to_string())),
        }
    }
}

/// A group of infobox attribute keys counted together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeGroup {
    pub group_id: AttributeGroupId,
    /// Normalized keys (lowercase, spaces to underscores).
    pub keys: BTreeSet<String>,
}

/// The three default groups shipped with the crate.
pub fn default_attribute_groups() -> Vec<AttributeGroup> {
    parse_attribute_groups(include_str!("../data/attribute_groups.tsv"))
        .expect("bundled attribute groups parse")
}

/// Parses `group_id<TAB>key` rows; keys get the infobox key normalization.
pub fn parse_attribute_groups(text: &str) -> Result<Vec<AttributeGroup>, RankError> {
    let mut map: BTreeMap<AttributeGroupId, BTreeSet<String>> = BTreeMap::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (group, key) = trimmed
            .split_once('\t')
            .ok_or_else(|| RankError::UnknownGroup(trimmed.to_string()))?;
        let group: AttributeGroupId = group.trim().parse()?;
        map.entry(group).or_default().insert(normalize_key(key));
    }
    Ok(map
        .into_iter()
        .map(|(group_id, keys)| AttributeGroup { group_id, keys })
        .collect())
}

fn normalize_key(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
        .to_lowercase()
}

/// Incoming-links score: the number of distinct pages anywhere in the
/// corpus holding at least one link to the entity.
pub fn rank_incoming_links(
    store: &CorpusStore,
    universe: &BTreeSet<String>,
    diag: &mut Diagnostics,
) -> RankingList {
    let scores = universe.iter().map(|entity| {
        if store.page(entity).is_none() {
            diag.warn(format!("entity {entity} missing from store, scored 0"));
            return (entity.clone(), 0.0);
        }
        let count = store.in_links(entity).map(|s| s.len()).unwrap_or(0);
        (entity.clone(), count as f64)
    });
    RankingList::from_scores("links", scores)
}

/// Incoming links divided by distinct outgoing links, with a max(1, out)
/// guard for pages without outgoing links.
pub fn rank_inout_ratio(
    store: &CorpusStore,
    universe: &BTreeSet<String>,
    diag: &mut Diagnostics,
) -> RankingList {
    let scores = universe.iter().map(|entity| {
        if store.page(entity).is_none() {
            diag.warn(format!("entity {entity} missing from store, scored 0"));
            return (entity.clone(), 0.0);
        }
        let incoming = store.in_links(entity).map(|s| s.len()).unwrap_or(0) as f64;
        let outgoing = store.resolved_outgoing(entity).len().max(1) as f64;
        (entity.clone(), incoming / outgoing)
    });
    RankingList::from_scores("ratio", scores)
}

/// Redirect-folded total pageviews.
pub fn rank_pageviews(store: &CorpusStore, universe: &BTreeSet<String>) -> RankingList {
    let scores = universe
        .iter()
        .map(|entity| (entity.clone(), store.views(entity) as f64));
    RankingList::from_scores("views", scores)
}

/// Counts distinct Person entities with at least one attribute of `group`
/// whose value references the university, either by a wiki link resolving
/// to its title or by its name as a boundary-guarded substring.
pub fn count_attribute_group(
    store: &CorpusStore,
    university: &str,
    group: &AttributeGroup,
) -> usize {
    store
        .pages()
        .filter(|page| !page.is_redirect && store.kind_of(&page.title) == EntityKind::Person)
        .filter(|person| {
            person.infoboxes.iter().any(|infobox| {
                group.keys.iter().any(|key| {
                    infobox
                        .attributes
                        .get(key)
                        .is_some_and(|value| value_references(store, value, university))
                })
            })
        })
        .count()
}

fn value_references(store: &CorpusStore, value: &str, university: &str) -> bool {
    for span in template::link_spans(value) {
        let target = template::split_top_level(&value[span], '|')
            .into_iter()
            .next()
            .unwrap_or("");
        if let Ok(canonical) = crate::corpus::canonicalize_title(target) {
            let resolved = store
                .resolve_redirect(&canonical)
                .unwrap_or(canonical);
            if resolved == university {
                return true;
            }
        }
    }
    contains_bounded(value, university)
}

fn contains_bounded(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
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

/// Weighted infobox score over components already min-max scaled to [0,1].
/// Weight ids: faculty, alumni, visibility, other.
pub fn infobox_score(
    faculty: f64,
    alumni: f64,
    visibility: f64,
    other: f64,
    weights: &WeightVector,
) -> Result<f64, RankError> {
    for component in [faculty, alumni, visibility, other] {
        if component < 0.0 {
            return Err(RankError::NegativeComponent(component));
        }
    }
    Ok(weights.get("faculty") * faculty
        + weights.get("alumni") * alumni
        + weights.get("visibility") * visibility
        + weights.get("other") * other)
}

/// Raw (unscaled) infobox component counts for every university in the
/// universe, keyed by component id.
pub fn infobox_components(
    store: &CorpusStore,
    universe: &BTreeSet<String>,
    groups: &[AttributeGroup],
) -> BTreeMap<String, BTreeMap<String, f64>> {
    let group_of = |id: AttributeGroupId| groups.iter().find(|g| g.group_id == id);
    let mut components: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (component, id) in [
        ("faculty", AttributeGroupId::Faculty),
        ("alumni", AttributeGroupId::Alumni),
        ("other", AttributeGroupId::OtherAffiliations),
    ] {
        let mut map = BTreeMap::new();
        for university in universe {
            let count = group_of(id)
                .map(|g| count_attribute_group(store, university, g))
                .unwrap_or(0);
            map.insert(university.clone(), count as f64);
        }
        components.insert(component.to_string(), map);
    }
    let mut visibility = BTreeMap::new();
    for university in universe {
        visibility.insert(university.clone(), store.mention_count(university) as f64);
    }
    components.insert("visibility".to_string(), visibility);
    components
}

/// The full infobox ranking: component counts min-max scaled over the
/// universe, then combined with `weights`.
pub fn rank_infobox(
    store: &CorpusStore,
    universe: &BTreeSet<String>,
    groups: &[AttributeGroup],
    weights: &WeightVector,
) -> Result<RankingList, RankError> {
    let components = infobox_components(store, universe, groups);
    let scaled = scale_components(&components);
    let scores: Result<Vec<(String, f64)>, RankError> = universe
        .iter()
        .map(|u| {
            let value = |id: &str| scaled[id].get(u).copied().unwrap_or(0.0);
            infobox_score(
                value("faculty"),
                value("alumni"),
                value("visibility"),
                value("other"),
                weights,
            )
            .map(|score| (u.clone(), score))
        })
        .collect();
    Ok(RankingList::from_scores("infobox", scores?))
}

/// Min-max scales each component map over its own entity set.
pub fn scale_components(
    components: &BTreeMap<String, BTreeMap<String, f64>>,
) -> BTreeMap<String, BTreeMap<String, f64>> {
    components
        .iter()
        .map(|(id, map)| {
            let entities: Vec<&String> = map.keys().collect();
            let values: Vec<f64> = map.values().copied().collect();
            let scaled = stats::minmax_scale(&values);
            (
                id.clone(),
                entities
                    .into_iter()
                    .cloned()
                    .zip(scaled)
                    .collect::<BTreeMap<String, f64>>(),
            )
        })
        .collect()
}

/// Outcome of the benchmark-driven universe filter.
#[derive(Debug, Clone)]
pub struct UniverseFilter {
    pub universe: BTreeSet<String>,
    /// "benchmark: name" for every benchmark entry without a corpus page.
    pub unmatched: Vec<String>,
}

/// Keeps corpus entities of kind University appearing in at least
/// `min_appearances` benchmarks. Benchmark names are resolved through
/// redirects; names without a corpus page are reported.
pub fn filter_universe(
    store: &CorpusStore,
    benchmarks: &[BenchmarkRanking],
    min_appearances: usize,
) -> UniverseFilter {
    let mut appearances: BTreeMap<String, usize> = BTreeMap::new();
    let mut unmatched = Vec::new();
    for benchmark in benchmarks {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for name in benchmark.positions.keys() {
            match store.lookup_page(name) {
                Some(resolved) => {
                    if seen.insert(resolved.clone()) {
                        *appearances.entry(resolved).or_insert(0) += 1;
                    }
                }
                None => unmatched.push(format!("{}: {}", benchmark.name, name)),
            }
        }
    }
    let universe = appearances
        .into_iter()
        .filter(|(entity, count)| {
            *count >= min_appearances && store.kind_of(entity) == EntityKind::University
        })
        .map(|(entity, _)| entity)
        .collect();
    UniverseFilter {
        universe,
        unmatched,
    }
}

/// Resolves a benchmark's entity names onto corpus titles, dropping (and
/// reporting) names without a page.
pub fn resolve_benchmark(
    store: &CorpusStore,
    benchmark: &BenchmarkRanking,
    diag: &mut Diagnostics,
) -> BenchmarkRanking {
    let mut positions = BTreeMap::new();
    for (name, rank) in &benchmark.positions {
        match store.lookup_page(name) {
            Some(resolved) => {
                positions.entry(resolved).or_insert(*rank);
            }
            None => diag.warn(format!("{}: no corpus page for {}", benchmark.name, name)),
        }
    }
    BenchmarkRanking {
        name: benchmark.name.clone(),
        positions,
    }
}

/// Weighted combination of component score maps (already scaled to [0,1]).
/// Entities missing from a component count as 0 with a warning.
pub fn combine_rankings(
    components: &BTreeMap<String, BTreeMap<String, f64>>,
    weights: &WeightVector,
    diag: &mut Diagnostics,
) -> RankingList {
    let mut entities: BTreeSet<String> = BTreeSet::new();
    for map in components.values() {
        entities.extend(map.keys().cloned());
    }
    let scores = entities.into_iter().map(|entity| {
        let mut score = 0.0;
        for (id, weight) in weights.iter() {
            match components.get(id).and_then(|m| m.get(&entity)) {
                Some(value) => score += weight * value,
                None => {
                    if components.contains_key(id) {
                        diag.warn(format!("component {id} missing entity {entity}, treated as 0"));
                    }
                }
            }
        }
        (entity, score)
    });
    RankingList::from_scores("combined", scores)
}

/// A fitted weight vector and the Kendall tau it achieves against the
/// target.
#[derive(Debug, Clone)]
pub struct WeightFit {
    pub weights: WeightVector,
    pub tau: f64,
    pub common_entities: usize,
}

/// Fits component weights maximizing Kendall tau-b between the combined
/// ranking and the target benchmark.
///
/// The search runs Nelder-Mead over a softmax reparameterization of the
/// weight simplex, multi-started from the uniform point, each near-pure
/// corner and a batch of seeded random draws; the best result wins (ties by
/// candidate order). Deterministic for a given seed.
pub fn fit_component_weights(
    components: &BTreeMap<String, BTreeMap<String, f64>>,
    target: &BenchmarkRanking,
    config: &SimplexConfig,
) -> Result<WeightFit, RankError> {
    let ids: Vec<String> = components.keys().cloned().collect();
    let k = ids.len();
    if k < 2 {
        return Err(RankError::TooFewComponents(k));
    }

    // Entities present in every component and in the target.
    let mut common: Vec<String> = target
        .positions
        .keys()
        .filter(|e| components.values().all(|m| m.contains_key(*e)))
        .cloned()
        .collect();
    common.sort();
    if common.len() < 3 {
        return Err(RankError::InsufficientOverlap {
            need: 3,
            got: common.len(),
        });
    }

    // Column-major component values in the fixed entity order; the target
    // enters negated so that agreement means positive tau.
    let columns: Vec<Vec<f64>> = ids
        .iter()
        .map(|id| common.iter().map(|e| components[id][e]).collect())
        .collect();
    let target_scores: Vec<f64> = common.iter().map(|e| -target.positions[e]).collect();

    let objective = |z: &[f64]| {
        let w = softmax(z);
        let combined: Vec<f64> = (0..common.len())
            .map(|row| {
                columns
                    .iter()
                    .zip(&w)
                    .map(|(col, weight)| weight * col[row])
                    .sum()
            })
            .collect();
        match stats::kendall_tau(&combined, &target_scores) {
            Ok(result) => -result.coefficient,
            // a constant combined ranking carries no information
            Err(_) => 2.0,
        }
    };

    // Candidate starts: uniform, near-pure corners, then seeded draws.
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    candidates.push(vec![0.0; k]);
    for i in 0..k {
        let mut corner = vec![0.0; k];
        corner[i] = 16.0;
        candidates.push(corner);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..16 {
        candidates.push((0..k).map(|_| rng.gen_range(-2.0..2.0)).collect());
    }

    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, z)| (objective(z), i))
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let starts = config.restarts.max(1).min(scored.len());
    let mut best_value = scored[0].0;
    let mut best_z = candidates[scored[0].1].clone();
    for (rank, &(_, candidate)) in scored.iter().take(starts).enumerate() {
        let z0 = &candidates[candidate];
        let simplex: Vec<Vec<f64>> = std::iter::once(z0.clone())
            .chain((0..k).map(|i| {
                let mut v = z0.clone();
                v[i] += 2.0;
                v
            }))
            .collect();
        let run_config = SimplexConfig {
            restarts: 2,
            seed: config.seed.wrapping_add(rank as u64 + 1),
            initial_simplex: Some(simplex),
            ..config.clone()
        };
        let result = stats::nelder_mead(objective, z0, &run_config);
        if result.value < best_value {
            best_value = result.value;
            best_z = result.x;
        }
    }

    let weights = WeightVector::new(ids.into_iter().zip(softmax(&best_z)).collect())
        .map_err(|_| RankError::InvalidWeights)?;
    Ok(WeightFit {
        weights,
        tau: -best_value,
        common_entities: common.len(),
    })
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_store;
    use crate::wikitext::parse_wikitext;
    use approx::assert_abs_diff_eq;

    fn page(title: &str, text: &str) -> crate::wikitext::ParsedPage {
        parse_wikitext(title, text).unwrap().page
    }

    fn store_with_kinds(
        pages: Vec<crate::wikitext::ParsedPage>,
        kinds: &[(&str, EntityKind)],
    ) -> CorpusStore {
        let mut diag = Diagnostics::new();
        let map = kinds
            .iter()
            .map(|(t, k)| (t.to_string(), *k))
            .collect();
        build_store(pages, &map, &mut diag)
    }

    fn universe(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn incoming_links_counts_distinct_citers() {
        let store = store_with_kinds(
            vec![
                page("A", "[[C]] [[C]] [[C]]"),
                page("B", "[[C]]"),
                page("C", "target"),
                page("D", "no links"),
            ],
            &[],
        );
        let mut diag = Diagnostics::new();
        let ranking = rank_incoming_links(&store, &universe(&["C", "D"]), &mut diag);
        assert_eq!(ranking.entries[0].entity, "C");
        assert_eq!(ranking.entries[0].score, 2.0);
        assert_eq!(ranking.entries[1].score, 0.0);
    }

    #[test]
    fn missing_entity_scores_zero_with_warning() {
        let store = store_with_kinds(vec![page("A", "x")], &[]);
        let mut diag = Diagnostics::new();
        let ranking = rank_incoming_links(&store, &universe(&["Ghost"]), &mut diag);
        assert_eq!(ranking.entries[0].score, 0.0);
        assert_eq!(diag.len(), 1);
    }

    #[test]
    fn ratio_with_and_without_outgoing() {
        let store = store_with_kinds(
            vec![
                page("Hub", "[[X]] [[Y]] [[Z]]"),
                page("X", "[[Hub]]"),
                page("Y", "[[Hub]]"),
                page("Z", "[[Hub]]"),
                page("W", "[[Hub]] [[Sink]]"),
                page("V", "[[Hub]] [[Sink]]"),
                page("U", "[[Hub]] [[Sink]] [[Sink]]"),
                page("Sink", "no outgoing"),
            ],
            &[],
        );
        let mut diag = Diagnostics::new();
        let ranking = rank_inout_ratio(&store, &universe(&["Hub", "Sink"]), &mut diag);
        let scores = ranking.score_map();
        // Hub: 6 incoming, 3 distinct outgoing -> 2.0
        assert_abs_diff_eq!(scores["Hub"], 2.0);
        // Sink: 3 incoming, 0 outgoing -> guard gives 3.0
        assert_abs_diff_eq!(scores["Sink"], 3.0);
    }

    #[test]
    fn pageview_scores_are_stored_totals() {
        let mut store = store_with_kinds(vec![page("T", "x"), page("S", "y")], &[]);
        let mut diag = Diagnostics::new();
        store
            .aggregate_pageviews("en T 100 0\nen S 90 0\n".as_bytes(), "f", "en", &mut diag)
            .unwrap();
        let ranking = rank_pageviews(&store, &universe(&["T", "S"]));
        assert_eq!(ranking.entries[0].entity, "T");
        assert_eq!(ranking.entries[0].rank, 1.0);
        assert_eq!(ranking.entries[1].rank, 2.0);
    }

    #[test]
    fn attribute_group_membership_not_multiplicity() {
        let store = store_with_kinds(
            vec![
                page("MIT", "university page"),
                page("Yale University", "university page"),
                page(
                    "P1",
                    "{{Infobox scientist|employer=[[MIT]]|workplaces=[[MIT]]}}",
                ),
                page("P2", "{{Infobox person|alma_mater=[[Yale University]]}}"),
                page("P3", "{{Infobox person|education=Yale University}}"),
            ],
            &[
                ("MIT", EntityKind::University),
                ("Yale University", EntityKind::University),
                ("P1", EntityKind::Person),
                ("P2", EntityKind::Person),
                ("P3", EntityKind::Person),
            ],
        );
        let groups = default_attribute_groups();
        let faculty = groups
            .iter()
            .find(|g| g.group_id == AttributeGroupId::Faculty)
            .unwrap();
        let alumni = groups
            .iter()
            .find(|g| g.group_id == AttributeGroupId::Alumni)
            .unwrap();
        // P1 has two faculty attributes referencing MIT but counts once
        assert_eq!(count_attribute_group(&store, "MIT", faculty), 1);
        assert_eq!(count_attribute_group(&store, "MIT", alumni), 0);
        // plain-text and linked alumni references both count
        assert_eq!(count_attribute_group(&store, "Yale University", alumni), 2);
        assert_eq!(count_attribute_group(&store, "Yale University", faculty), 0);
    }

    #[test]
    fn attribute_reference_through_redirect() {
        let store = store_with_kinds(
            vec![
                page("Massachusetts Institute of Technology", "u"),
                page("MIT", "#REDIRECT [[Massachusetts Institute of Technology]]"),
                page("P", "{{Infobox person|employer=[[MIT]]}}"),
            ],
            &[
                (
                    "Massachusetts Institute of Technology",
                    EntityKind::University,
                ),
                ("P", EntityKind::Person),
            ],
        );
        let groups = default_attribute_groups();
        let faculty = groups
            .iter()
            .find(|g| g.group_id == AttributeGroupId::Faculty)
            .unwrap();
        assert_eq!(
            count_attribute_group(&store, "Massachusetts Institute of Technology", faculty),
            1
        );
    }

    #[test]
    fn infobox_score_formula() {
        let weights = WeightVector::infobox_default();
        assert_abs_diff_eq!(
            infobox_score(1.0, 1.0, 1.0, 1.0, &weights).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            infobox_score(1.0, 0.0, 0.0, 0.0, &weights).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            infobox_score(0.0, 1.0, 0.5, 0.5, &weights).unwrap(),
            0.40,
            epsilon = 1e-15
        );
        assert!(infobox_score(-0.1, 0.0, 0.0, 0.0, &weights).is_err());
    }

    #[test]
    fn universe_filter_rule() {
        let store = store_with_kinds(
            vec![page("A", "x"), page("B", "y"), page("C", "z")],
            &[
                ("A", EntityKind::University),
                ("B", EntityKind::University),
                ("C", EntityKind::University),
            ],
        );
        let benchmarks = vec![
            BenchmarkRanking {
                name: "ARWU".to_string(),
                positions: [("A".to_string(), 1.0), ("B".to_string(), 2.0)].into(),
            },
            BenchmarkRanking {
                name: "THE".to_string(),
                positions: [("A".to_string(), 1.0), ("Ghost U".to_string(), 2.0)].into(),
            },
            BenchmarkRanking {
                name: "Webometrics".to_string(),
                positions: [("C".to_string(), 1.0)].into(),
            },
        ];
        let filter = filter_universe(&store, &benchmarks, 2);
        assert_eq!(
            filter.universe.iter().map(String::as_str).collect::<Vec<_>>(),
            vec!["A"]
        );
        assert_eq!(filter.unmatched, vec!["THE: Ghost U"]);
    }

    #[test]
    fn combine_projection_and_symmetry() {
        let mut diag = Diagnostics::new();
        let mut components = BTreeMap::new();
        components.insert(
            "one".to_string(),
            BTreeMap::from([
                ("X".to_string(), 1.0),
                ("Y".to_string(), 0.5),
                ("Z".to_string(), 0.0),
            ]),
        );
        components.insert(
            "two".to_string(),
            BTreeMap::from([
                ("X".to_string(), 0.0),
                ("Y".to_string(), 0.5),
                ("Z".to_string(), 1.0),
            ]),
        );
        let projection =
            WeightVector::new(vec![("one".to_string(), 1.0), ("two".to_string(), 0.0)]).unwrap();
        let combined = combine_rankings(&components, &projection, &mut diag);
        assert_eq!(combined.entries[0].entity, "X");
        assert_eq!(combined.entries[2].entity, "Z");

        let even = WeightVector::uniform(&["one", "two"]);
        let balanced = combine_rankings(&components, &even, &mut diag);
        assert!(balanced.entries.iter().all(|e| e.score == 0.5));
        assert!(balanced.entries.iter().all(|e| e.rank == 2.0));
    }

    #[test]
    fn fit_recovers_matching_component() {
        // target ranking equals component "a"'s ordering
        let entities = ["E1", "E2", "E3", "E4", "E5", "E6"];
        let a: BTreeMap<String, f64> = entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.to_string(), 1.0 - i as f64 * 0.15))
            .collect();
        let b: BTreeMap<String, f64> = entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.to_string(), [(0.3), (0.9), (0.1), (0.8), (0.2), (0.7)][i]))
            .collect();
        let mut components = BTreeMap::new();
        components.insert("a".to_string(), a);
        components.insert("b".to_string(), b);
        let target = BenchmarkRanking {
            name: "bench".to_string(),
            positions: entities
                .iter()
                .enumerate()
                .map(|(i, e)| (e.to_string(), (i + 1) as f64))
                .collect(),
        };
        let fit =
            fit_component_weights(&components, &target, &SimplexConfig::default()).unwrap();
        assert_abs_diff_eq!(fit.tau, 1.0, epsilon = 1e-12);
        assert!(fit.weights.get("a") > fit.weights.get("b"));
    }

    #[test]
    fn fit_requires_overlap() {
        let mut components = BTreeMap::new();
        components.insert(
            "a".to_string(),
            BTreeMap::from([("X".to_string(), 1.0), ("Y".to_string(), 0.0)]),
        );
        components.insert(
            "b".to_string(),
            BTreeMap::from([("X".to_string(), 0.0), ("Y".to_string(), 1.0)]),
        );
        let target = BenchmarkRanking {
            name: "t".to_string(),
            positions: BTreeMap::from([("X".to_string(), 1.0), ("Y".to_string(), 2.0)]),
        };
        assert!(matches!(
            fit_component_weights(&components, &target, &SimplexConfig::default()),
            Err(RankError::InsufficientOverlap { .. })
        ));
    }

    #[test]
    fn ranking_list_fractional_ranks() {
        let list = RankingList::from_scores(
            "m",
            vec![
                ("A".to_string(), 3.0),
                ("B".to_string(), 1.0),
                ("C".to_string(), 3.0),
                ("D".to_string(), 0.5),
            ],
        );
        assert_eq!(list.entries[0].entity, "A");
        assert_eq!(list.entries[0].rank, 1.5);
        assert_eq!(list.entries[1].entity, "C");
        assert_eq!(list.entries[1].rank, 1.5);
        assert_eq!(list.entries[2].rank, 3.0);
        assert_eq!(list.entries[3].rank, 4.0);
    }

    #[test]
    fn weight_vector_normalizes_and_validates() {
        let w = WeightVector::new(vec![("a".to_string(), 2.0), ("b".to_string(), 2.0)]).unwrap();
        assert_abs_diff_eq!(w.get("a"), 0.5);
        assert!(WeightVector::new(vec![("a".to_string(), -1.0)]).is_err());
        assert!(WeightVector::new(vec![("a".to_string(), 0.0)]).is_err());
    }
}

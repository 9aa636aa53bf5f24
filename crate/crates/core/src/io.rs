//! Readers and writers for the pipeline's file formats: benchmark CSVs,
//! alias and weight TSVs, impact-factor CSVs and ranking output CSVs.

use crate::corpus::canonicalize_title;
use crate::diag::Diagnostics;
use crate::journals::JournalStats;
use crate::rankers::{BenchmarkRanking, RankingList};
use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{file}: missing required column {column}")]
    MissingColumn { file: String, column: String },
    #[error("{file} line {line}: {detail}")]
    BadRow {
        file: String,
        line: usize,
        detail: String,
    },
}

/// Canonicalizing alias map over entity names (benchmark joining). Keys and
/// values are canonical titles; unmapped names pass through.
#[derive(Debug, Clone, Default)]
pub struct NameAliases {
    map: BTreeMap<String, String>,
}

impl NameAliases {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut map = BTreeMap::new();
        for (alias, canonical) in pairs {
            let (Ok(alias), Ok(canonical)) =
                (canonicalize_title(&alias), canonicalize_title(&canonical))
            else {
                continue;
            };
            map.insert(alias, canonical);
        }
        NameAliases { map }
    }

    /// Canonicalizes and alias-resolves one raw name.
    pub fn resolve(&self, raw: &str) -> Option<String> {
        let canonical = canonicalize_title(raw).ok()?;
        Some(self.map.get(&canonical).cloned().unwrap_or(canonical))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Loads `alias<TAB>canonical` rows; blank lines and `#` comments are
/// skipped.
pub fn load_alias_pairs(
    reader: impl BufRead,
    file: &str,
    diag: &mut Diagnostics,
) -> Result<Vec<(String, String)>, TableError> {
    let mut pairs = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match trimmed.split_once('\t') {
            Some((alias, canonical)) => {
                pairs.push((alias.trim().to_string(), canonical.trim().to_string()))
            }
            None => diag.warn(format!("{file} line {}: missing tab separator", index + 1)),
        }
    }
    Ok(pairs)
}

/// Loads a benchmark CSV with header `rank,name`, canonicalizing and
/// alias-resolving entity names. Duplicate names keep their best (lowest)
/// rank.
pub fn load_benchmark_csv(
    reader: impl Read,
    benchmark_name: &str,
    aliases: &NameAliases,
    diag: &mut Diagnostics,
) -> Result<BenchmarkRanking, TableError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let rank_col = column_index(&headers, "rank", benchmark_name)?;
    let name_col = column_index(&headers, "name", benchmark_name)?;
    let mut positions: BTreeMap<String, f64> = BTreeMap::new();
    for (index, record) in csv_reader.records().enumerate() {
        let record = record?;
        let rank: f64 = record
            .get(rank_col)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| TableError::BadRow {
                file: benchmark_name.to_string(),
                line: index + 2,
                detail: "rank is not a number".to_string(),
            })?;
        if rank <= 0.0 {
            return Err(TableError::BadRow {
                file: benchmark_name.to_string(),
                line: index + 2,
                detail: "rank must be positive".to_string(),
            });
        }
        let raw_name = record.get(name_col).unwrap_or("");
        match aliases.resolve(raw_name) {
            Some(name) => {
                let entry = positions.entry(name).or_insert(rank);
                if rank < *entry {
                    *entry = rank;
                }
            }
            None => diag.warn(format!("{benchmark_name} line {}: empty name", index + 2)),
        }
    }
    Ok(BenchmarkRanking {
        name: benchmark_name.to_string(),
        positions,
    })
}

/// Loads a ranking or benchmark CSV generically for correlation input:
/// entity -> (rank, optional score). Accepts `rank,name` and
/// `rank,entity,score` layouts.
pub struct RankingColumns {
    pub ranks: BTreeMap<String, f64>,
    pub scores: Option<BTreeMap<String, f64>>,
}

pub fn load_ranking_columns(
    reader: impl Read,
    file: &str,
    aliases: &NameAliases,
    diag: &mut Diagnostics,
) -> Result<RankingColumns, TableError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let rank_col = column_index(&headers, "rank", file)?;
    let name_col = headers
        .iter()
        .position(|h| h.trim() == "name" || h.trim() == "entity" || h.trim() == "journal")
        .ok_or_else(|| TableError::MissingColumn {
            file: file.to_string(),
            column: "name|entity|journal".to_string(),
        })?;
    let score_col = headers.iter().position(|h| h.trim() == "score");
    let mut ranks = BTreeMap::new();
    let mut scores: BTreeMap<String, f64> = BTreeMap::new();
    for (index, record) in csv_reader.records().enumerate() {
        let record = record?;
        let rank: f64 = record
            .get(rank_col)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| TableError::BadRow {
                file: file.to_string(),
                line: index + 2,
                detail: "rank is not a number".to_string(),
            })?;
        let Some(name) = aliases.resolve(record.get(name_col).unwrap_or("")) else {
            diag.warn(format!("{file} line {}: empty name", index + 2));
            continue;
        };
        if ranks.contains_key(&name) {
            diag.warn(format!("{file} line {}: duplicate entity {name}", index + 2));
            continue;
        }
        ranks.insert(name.clone(), rank);
        if let Some(col) = score_col {
            let score: f64 =
                record
                    .get(col)
                    .unwrap_or("")
                    .trim()
                    .parse()
                    .map_err(|_| TableError::BadRow {
                        file: file.to_string(),
                        line: index + 2,
                        detail: "score is not a number".to_string(),
                    })?;
            scores.insert(name, score);
        }
    }
    Ok(RankingColumns {
        ranks,
        scores: score_col.map(|_| scores),
    })
}

/// Loads the impact-factor CSV with header `journal,if5`. Journal names are
/// returned raw; the caller normalizes them against its alias table.
pub fn load_impact_factors(
    reader: impl Read,
    file: &str,
) -> Result<Vec<(String, f64)>, TableError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let journal_col = column_index(&headers, "journal", file)?;
    let if_col = column_index(&headers, "if5", file)?;
    let mut factors = Vec::new();
    for (index, record) in csv_reader.records().enumerate() {
        let record = record?;
        let value: f64 = record
            .get(if_col)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| TableError::BadRow {
                file: file.to_string(),
                line: index + 2,
                detail: "if5 is not a number".to_string(),
            })?;
        factors.push((record.get(journal_col).unwrap_or("").to_string(), value));
    }
    Ok(factors)
}

/// Writes a ranking as `rank,entity,score` with scores to six decimals.
pub fn write_ranking_csv(writer: impl Write, ranking: &RankingList) -> Result<(), TableError> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(["rank", "entity", "score"])?;
    for entry in &ranking.entries {
        csv_writer.write_record([
            format_rank(entry.rank),
            entry.entity.clone(),
            format!("{:.6}", entry.score),
        ])?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Writes the journal ranking as
/// `rank,journal,score,citers,citations,has_page`.
pub fn write_journal_ranking_csv(
    writer: impl Write,
    ranking: &RankingList,
    stats: &BTreeMap<String, JournalStats>,
) -> Result<(), TableError> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(["rank", "journal", "score", "citers", "citations", "has_page"])?;
    for entry in &ranking.entries {
        let js = stats.get(&entry.entity);
        csv_writer.write_record([
            format_rank(entry.rank),
            entry.entity.clone(),
            format!("{:.6}", entry.score),
            js.map(|s| s.citers.to_string()).unwrap_or_default(),
            js.map(|s| s.citations.to_string()).unwrap_or_default(),
            js.map(|s| u8::from(s.has_page).to_string())
                .unwrap_or_default(),
        ])?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Integral ranks print without a decimal point, fractional ones keep it:
/// 3 -> "3", 2.5 -> "2.5".
pub fn format_rank(rank: f64) -> String {
    if rank.fract() == 0.0 {
        format!("{}", rank as u64)
    } else {
        format!("{rank}")
    }
}

/// Loads `component<TAB>weight` rows, as written by the fit command.
pub fn load_weight_tsv(
    reader: impl BufRead,
    file: &str,
) -> Result<Vec<(String, f64)>, TableError> {
    let mut weights = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (component, weight) = trimmed.split_once('\t').ok_or_else(|| TableError::BadRow {
            file: file.to_string(),
            line: index + 1,
            detail: "missing tab separator".to_string(),
        })?;
        let weight: f64 = weight.trim().parse().map_err(|_| TableError::BadRow {
            file: file.to_string(),
            line: index + 1,
            detail: "weight is not a number".to_string(),
        })?;
        weights.push((component.trim().to_string(), weight));
    }
    Ok(weights)
}

fn column_index(
    headers: &csv::StringRecord,
    column: &str,
    file: &str,
) -> Result<usize, TableError> {
    headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| TableError::MissingColumn {
            file: file.to_string(),
            column: column.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankers::RankingList;

    #[test]
    fn benchmark_csv_with_quoted_names_and_aliases() {
        let csv = "rank,name\n1,Harvard University\n2,\"University of California, Berkeley\"\n3,MIT\n";
        let aliases = NameAliases::new(vec![(
            "MIT".to_string(),
            "Massachusetts Institute of Technology".to_string(),
        )]);
        let mut diag = Diagnostics::new();
        let benchmark = load_benchmark_csv(csv.as_bytes(), "ARWU", &aliases, &mut diag).unwrap();
        assert_eq!(benchmark.positions["Harvard University"], 1.0);
        assert_eq!(benchmark.positions["University of California, Berkeley"], 2.0);
        assert_eq!(
            benchmark.positions["Massachusetts Institute of Technology"],
            3.0
        );
    }

    #[test]
    fn benchmark_rejects_bad_rank() {
        let csv = "rank,name\nx,Harvard\n";
        let result = load_benchmark_csv(
            csv.as_bytes(),
            "b",
            &NameAliases::default(),
            &mut Diagnostics::new(),
        );
        assert!(matches!(result, Err(TableError::BadRow { line: 2, .. })));
    }

    #[test]
    fn ranking_csv_round_trip_columns() {
        let ranking = RankingList::from_scores(
            "links",
            vec![
                ("University of California, Berkeley".to_string(), 2.0),
                ("B".to_string(), 1.0),
                ("C".to_string(), 1.0),
            ],
        );
        let mut buf = Vec::new();
        write_ranking_csv(&mut buf, &ranking).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("rank,entity,score\n"));
        assert!(text.contains("1,\"University of California, Berkeley\",2.000000"));
        assert!(text.contains("2.5,B,1.000000"));

        let columns = load_ranking_columns(
            buf.as_slice(),
            "r",
            &NameAliases::default(),
            &mut Diagnostics::new(),
        )
        .unwrap();
        assert_eq!(columns.ranks["University of California, Berkeley"], 1.0);
        assert_eq!(columns.ranks["B"], 2.5);
        assert_eq!(columns.scores.unwrap()["B"], 1.0);
    }

    #[test]
    fn weight_tsv_round_trip() {
        let data = "# comment\nfaculty\t0.5\nalumni\t0.30\n";
        let weights = load_weight_tsv(data.as_bytes(), "w.tsv").unwrap();
        assert_eq!(weights.len(), 2);
        assert_eq!(weights[0], ("faculty".to_string(), 0.5));
    }

    #[test]
    fn impact_factor_csv() {
        let data = "journal,if5\nNature,38.2\n\"J. of X, Y\",1.5\n";
        let factors = load_impact_factors(data.as_bytes(), "if.csv").unwrap();
        assert_eq!(factors[0].0, "Nature");
        assert_eq!(factors[1], ("J. of X, Y".to_string(), 1.5));
    }

    #[test]
    fn rank_formatting() {
        assert_eq!(format_rank(1.0), "1");
        assert_eq!(format_rank(2.5), "2.5");
        assert_eq!(format_rank(10.0), "10");
    }
}

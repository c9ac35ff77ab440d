//! Gold-standard plus predictions: loading, validation, writing, and
//! synthetic reconstruction from published confusion counts.
//!
//! The on-disk format is a single wide CSV, `id,gold,<team1>,...,<teamK>`,
//! UTF-8, comma-delimited, with no quoting. Tokens may not contain commas or
//! line breaks.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DatasetError;
use crate::metrics::{self, ConfusionCounts, Label};

/// Gold labels with aligned per-team prediction columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    ids: Vec<String>,
    gold: Vec<String>,
    teams: Vec<(String, Vec<String>)>,
    positive: Label,
}

fn check_token(column: &str, token: &str, row: usize) -> Result<(), DatasetError> {
    if token.is_empty() {
        return Err(DatasetError::EmptyCell {
            row,
            column: column.to_string(),
        });
    }
    if token.contains([',', '\n', '\r']) {
        return Err(DatasetError::InvalidToken {
            column: column.to_string(),
            token: token.to_string(),
        });
    }
    Ok(())
}

impl LabeledDataset {
    /// Validates and assembles a dataset. Rows are numbered from 1 in errors.
    pub fn new(
        ids: Vec<String>,
        gold: Vec<String>,
        teams: Vec<(String, Vec<String>)>,
        positive: Label,
    ) -> Result<Self, DatasetError> {
        let n = ids.len();
        if n == 0 {
            return Err(DatasetError::Empty);
        }
        if teams.is_empty() {
            return Err(DatasetError::MissingColumn("<team>".into()));
        }
        check_token("positive", positive.as_str(), 0)?;
        let mut seen_ids: HashMap<&str, usize> = HashMap::with_capacity(n);
        for (row, id) in ids.iter().enumerate() {
            check_token("id", id, row + 1)?;
            if let Some(first) = seen_ids.insert(id, row + 1) {
                return Err(DatasetError::DuplicateId {
                    id: id.clone(),
                    first,
                    second: row + 1,
                });
            }
        }
        let columns = std::iter::once(("gold", &gold)).chain(teams.iter().map(|(t, v)| (t.as_str(), v)));
        let mut names: Vec<&str> = Vec::new();
        for (name, col) in columns {
            check_token("header", name, 0)?;
            if names.contains(&name) || name == "id" {
                return Err(DatasetError::DuplicateTeam(name.to_string()));
            }
            names.push(name);
            if col.len() != n {
                return Err(DatasetError::LengthMismatch {
                    row: col.len().min(n) + 1,
                    expected: n,
                    found: col.len(),
                });
            }
            for (row, tok) in col.iter().enumerate() {
                check_token(name, tok, row + 1)?;
            }
        }
        if !gold.iter().any(|g| g == positive.as_str()) {
            return Err(DatasetError::UnknownPositiveLabel(positive.to_string()));
        }
        Ok(LabeledDataset {
            ids,
            gold,
            teams,
            positive,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn gold(&self) -> &[String] {
        &self.gold
    }

    pub fn positive(&self) -> &Label {
        &self.positive
    }

    pub fn team_count(&self) -> usize {
        self.teams.len()
    }

    /// Teams in column order.
    pub fn teams(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.teams.iter().map(|(n, v)| (n.as_str(), v.as_slice()))
    }

    pub fn team_names(&self) -> Vec<&str> {
        self.teams.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn predictions(&self, team: &str) -> Option<&[String]> {
        self.teams.iter().find(|(n, _)| n == team).map(|(_, v)| v.as_slice())
    }

    pub fn confusion(&self, team: &str) -> Option<ConfusionCounts> {
        let pred = self.predictions(team)?;
        Some(metrics::confusion(&self.gold, pred, &self.positive).expect("validated lengths"))
    }

    /// Writes the dataset in the wide CSV layout accepted by [`load`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::WriterBuilder::new()
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(out);
        let mut header = vec!["id", "gold"];
        header.extend(self.teams.iter().map(|(n, _)| n.as_str()));
        w.write_record(&header)?;
        let mut record: Vec<&str> = Vec::with_capacity(header.len());
        for i in 0..self.len() {
            record.clear();
            record.push(&self.ids[i]);
            record.push(&self.gold[i]);
            record.extend(self.teams.iter().map(|(_, v)| v[i].as_str()));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| DatasetError::Csv(e.into()))?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        let file = File::create(path).map_err(|source| DatasetError::Io {
            path: path.into(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Ingestion settings; the CSV itself does not say which label is positive.
#[derive(Debug, Clone)]
pub struct LoadConfig {
    pub positive: Label,
}

pub fn load(path: &Path, config: &LoadConfig) -> Result<LabeledDataset, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.into(),
        source,
    })?;
    load_from_reader(file, config)
}

pub fn load_from_reader<R: Read>(input: R, config: &LoadConfig) -> Result<LabeledDataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(DatasetError::MissingColumn("id".into())),
    };
    match (header.get(0), header.get(1)) {
        (Some("id"), Some("gold")) => {}
        (Some("id"), _) => return Err(DatasetError::MissingColumn("gold".into())),
        _ => return Err(DatasetError::MissingColumn("id".into())),
    }
    let team_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    if team_names.is_empty() {
        return Err(DatasetError::MissingColumn("<team>".into()));
    }
    let width = header.len();

    let mut ids = Vec::new();
    let mut gold = Vec::new();
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); team_names.len()];
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != width {
            return Err(DatasetError::LengthMismatch {
                row,
                expected: width,
                found: rec.len(),
            });
        }
        ids.push(rec[0].to_string());
        gold.push(rec[1].to_string());
        for (col, tok) in columns.iter_mut().zip(rec.iter().skip(2)) {
            col.push(tok.to_string());
        }
    }
    LabeledDataset::new(
        ids,
        gold,
        team_names.into_iter().zip(columns).collect(),
        config.positive.clone(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamCounts {
    pub tp: u64,
    pub fp: u64,
}

fn default_positive() -> String {
    "offensive".into()
}

fn default_negative() -> String {
    "non-offensive".into()
}

/// Gold class sizes and per-team `(tp, fp)` from which a dataset with the
/// same marginal confusion counts can be rebuilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionSpec {
    pub n_pos: u64,
    pub n_neg: u64,
    pub teams: BTreeMap<String, TeamCounts>,
    #[serde(default = "default_positive")]
    pub positive_label: String,
    #[serde(default = "default_negative")]
    pub negative_label: String,
}

impl ReconstructionSpec {
    pub fn new(n_pos: u64, n_neg: u64, teams: impl IntoIterator<Item = (String, TeamCounts)>) -> Self {
        ReconstructionSpec {
            n_pos,
            n_neg,
            teams: teams.into_iter().collect(),
            positive_label: default_positive(),
            negative_label: default_negative(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.into(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// 64-bit FNV-1a; names a team's random stream independently of column order.
fn stream_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Builds a dataset whose gold column holds `n_pos` positives followed by
/// `n_neg` negatives, and whose team columns reproduce each `(tp, fp)` exactly.
///
/// Which positives a team gets right, and which negatives it flags, are drawn
/// from a stream keyed by `(seed, team name)`. Errors of different teams are
/// placed independently.
pub fn reconstruct(spec: &ReconstructionSpec, seed: u64) -> Result<LabeledDataset, DatasetError> {
    for (team, c) in &spec.teams {
        if c.tp > spec.n_pos {
            return Err(DatasetError::CountOutOfRange {
                team: team.clone(),
                field: "tp",
                value: c.tp,
                max: spec.n_pos,
            });
        }
        if c.fp > spec.n_neg {
            return Err(DatasetError::CountOutOfRange {
                team: team.clone(),
                field: "fp",
                value: c.fp,
                max: spec.n_neg,
            });
        }
    }
    let n_pos = spec.n_pos as usize;
    let n_neg = spec.n_neg as usize;
    let n = n_pos + n_neg;
    let width = n.max(1).to_string().len();
    let ids = (1..=n).map(|i| format!("{i:0width$}")).collect();
    let pos = &spec.positive_label;
    let neg = &spec.negative_label;
    let gold: Vec<String> = std::iter::repeat_n(pos.clone(), n_pos)
        .chain(std::iter::repeat_n(neg.clone(), n_neg))
        .collect();

    let teams = spec
        .teams
        .iter()
        .map(|(name, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_id(name));
            let mut col: Vec<String> = std::iter::repeat_n(neg.clone(), n_pos)
                .chain(std::iter::repeat_n(neg.clone(), n_neg))
                .collect();
            for i in rand::seq::index::sample(&mut rng, n_pos, c.tp as usize) {
                col[i] = pos.clone();
            }
            for i in rand::seq::index::sample(&mut rng, n_neg, c.fp as usize) {
                col[n_pos + i] = pos.clone();
            }
            (name.clone(), col)
        })
        .collect();
    LabeledDataset::new(ids, gold, teams, Label::new(pos.clone())?)
}

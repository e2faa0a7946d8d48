//! Emotion vocabulary, the wheel's petal structure and the petal
//! opposition map.
//!
//! A petal is the triple (strong derived, primary, weak derived) drawn as
//! one colour-coded ellipse on the wheel; secondary emotions sit between
//! petals and belong to none. Opposite petals face each other across the
//! circle, so with `P` petals in wheel order the opposite of petal `k` is
//! `(k + P/2) mod P`.
//!
//! The 48-word vocabulary ships embedded and is also loadable from a CSV
//! table with columns `id,english,romaji,category,petal`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN_TABLE: &str = include_str!("../data/plutchik48.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Primary,
    StrongDerived,
    WeakDerived,
    Secondary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmotionWord {
    pub id: usize,
    pub english: String,
    pub romaji: String,
    pub category: Category,
}

/// Petals as (strong, primary, weak) word-id triples in wheel order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wheel {
    petals: Vec<[usize; 3]>,
    opposite: Vec<usize>,
}

impl Wheel {
    fn new(petals: Vec<[usize; 3]>) -> Result<Self> {
        let n = petals.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Lexicon(format!(
                "need an even number of petals (at least 2), got {n}"
            )));
        }
        let mut seen = BTreeSet::new();
        for id in petals.iter().flatten() {
            if !seen.insert(*id) {
                return Err(Error::Lexicon(format!("word {id} appears in two petals")));
            }
        }
        let opposite = (0..n).map(|k| (k + n / 2) % n).collect();
        Ok(Self { petals, opposite })
    }

    pub fn petal_count(&self) -> usize {
        self.petals.len()
    }

    pub fn petals(&self) -> &[[usize; 3]] {
        &self.petals
    }

    pub fn petal(&self, k: usize) -> Option<&[usize; 3]> {
        self.petals.get(k)
    }

    pub fn opposite(&self, k: usize) -> Option<usize> {
        self.opposite.get(k).copied()
    }

    /// Petal index holding `word`, if any.
    pub fn petal_of(&self, word: usize) -> Option<usize> {
        self.petals.iter().position(|p| p.contains(&word))
    }

    pub fn petal_words(&self) -> impl Iterator<Item = usize> + '_ {
        self.petals.iter().flatten().copied()
    }
}

/// Ordered word pairs inside petal `k` and between petal `k` and its opposite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetalPairs {
    pub within: Vec<(usize, usize)>,
    pub opposite: Vec<(usize, usize)>,
}

pub fn petal_pair_sets(wheel: &Wheel, k: usize) -> Result<PetalPairs> {
    let petal = wheel.petal(k).ok_or_else(|| {
        Error::invalid(format!(
            "petal index {k} out of range (0..{})",
            wheel.petal_count()
        ))
    })?;
    let across = wheel.petals[wheel.opposite[k]];
    let within = petal
        .iter()
        .flat_map(|&a| petal.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
        .collect();
    let opposite = petal
        .iter()
        .flat_map(|&a| across.iter().map(move |&b| (a, b)))
        .collect();
    Ok(PetalPairs { within, opposite })
}

/// Community labels over a subset of word ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Partition {
    labels: BTreeMap<usize, usize>,
}

impl Partition {
    pub fn new(labels: BTreeMap<usize, usize>) -> Self {
        Self { labels }
    }

    /// Labels for ids `0..labels.len()`.
    pub fn from_labels(labels: &[usize]) -> Self {
        Self {
            labels: labels.iter().copied().enumerate().collect(),
        }
    }

    pub fn label(&self, id: usize) -> Option<usize> {
        self.labels.get(&id).copied()
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.labels.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_count(&self) -> usize {
        self.labels.values().collect::<BTreeSet<_>>().len()
    }

    /// Members of each label, in label order.
    pub fn groups(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (id, label) in self.iter() {
            groups.entry(label).or_default().push(id);
        }
        groups
    }

    /// Ids present in both partitions.
    pub fn common_domain(&self, other: &Partition) -> Vec<usize> {
        self.domain().filter(|id| other.labels.contains_key(id)).collect()
    }
}

pub fn wheel_partition(wheel: &Wheel) -> Partition {
    let labels = wheel
        .petals
        .iter()
        .enumerate()
        .flat_map(|(k, p)| p.iter().map(move |&id| (id, k)))
        .collect();
    Partition::new(labels)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lexicon {
    words: Vec<EmotionWord>,
    wheel: Wheel,
    #[serde(skip)]
    by_label: HashMap<String, usize>,
}

#[derive(Debug, Deserialize)]
struct LexiconRow {
    id: usize,
    english: String,
    romaji: String,
    category: Category,
    petal: Option<usize>,
}

/// The 48 emotion words with English labels, romaji and wheel petals.
pub fn builtin_lexicon() -> Lexicon {
    Lexicon::from_reader(BUILTIN_TABLE.as_bytes()).expect("embedded lexicon table is valid")
}

impl Lexicon {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (n, row) in csv.deserialize::<LexiconRow>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                line: n as u64 + 2,
                message: e.to_string(),
            })?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    fn from_rows(mut rows: Vec<LexiconRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Lexicon("no words".into()));
        }
        rows.sort_by_key(|r| r.id);
        let mut by_label = HashMap::new();
        for (expected, row) in rows.iter().enumerate() {
            if row.id != expected {
                return Err(Error::Lexicon(format!(
                    "ids must be contiguous from 0; expected {expected}, found {}",
                    row.id
                )));
            }
            if by_label.insert(row.english.clone(), row.id).is_some() {
                return Err(Error::Lexicon(format!("duplicate label '{}'", row.english)));
            }
        }

        let mut slots: BTreeMap<usize, [Option<usize>; 3]> = BTreeMap::new();
        for row in &rows {
            let slot = match row.category {
                Category::StrongDerived => 0,
                Category::Primary => 1,
                Category::WeakDerived => 2,
                Category::Secondary => {
                    if row.petal.is_some() {
                        return Err(Error::Lexicon(format!(
                            "secondary word '{}' cannot belong to a petal",
                            row.english
                        )));
                    }
                    continue;
                }
            };
            let petal = row.petal.ok_or_else(|| {
                Error::Lexicon(format!("word '{}' needs a petal", row.english))
            })?;
            let entry = slots.entry(petal).or_default();
            if entry[slot].replace(row.id).is_some() {
                return Err(Error::Lexicon(format!(
                    "petal {petal} has two {:?} words",
                    row.category
                )));
            }
        }
        let mut petals = Vec::with_capacity(slots.len());
        for (expected, (petal, slot)) in slots.into_iter().enumerate() {
            if petal != expected {
                return Err(Error::Lexicon(format!(
                    "petal indices must be contiguous from 0; missing {expected}"
                )));
            }
            match slot {
                [Some(s), Some(p), Some(w)] => petals.push([s, p, w]),
                _ => {
                    return Err(Error::Lexicon(format!(
                        "petal {petal} needs one strong, one primary and one weak word"
                    )))
                }
            }
        }
        let wheel = Wheel::new(petals)?;
        let words = rows
            .into_iter()
            .map(|r| EmotionWord {
                id: r.id,
                english: r.english,
                romaji: r.romaji,
                category: r.category,
            })
            .collect();
        Ok(Self {
            words,
            wheel,
            by_label,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[EmotionWord] {
        &self.words
    }

    pub fn word(&self, id: usize) -> Option<&EmotionWord> {
        self.words.get(id)
    }

    pub fn id_of(&self, english: &str) -> Option<usize> {
        self.by_label.get(english).copied()
    }

    pub fn wheel(&self) -> &Wheel {
        &self.wheel
    }

    pub fn labels(&self) -> Vec<String> {
        self.words.iter().map(|w| w.english.clone()).collect()
    }

    /// Name of a petal: the English label of its primary emotion.
    pub fn petal_name(&self, k: usize) -> Option<&str> {
        let primary = self.wheel.petal(k)?[1];
        Some(self.words[primary].english.as_str())
    }
}

//! Rating-session files: parsing, quality filtering and aggregation of
//! surviving responses into per-ordered-pair mean scores.
//!
//! CSV columns (header required): `participant, task, word_a, word_b,
//! score, kind, catch_target, repeat_of, order`, optionally followed by
//! `age` and `sex`. `kind` is `normal`, `catch` or `repeat`; `repeat_of`
//! holds the `order` of the normal record being asked again. An empty
//! `score` is an unanswered question. Catch rows may leave the word
//! columns empty.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SemanticNetwork;
use crate::lexicon::Lexicon;
use crate::matrix::Matrix;
use crate::stats;

/// Highest score on the response scale (scores are 0..=SCALE_MAX).
pub const SCALE_MAX: u8 = 7;
pub const CATCH_TRIALS: usize = 2;
pub const REPEATS: usize = 20;
pub const DOUBLE_PASS_THRESHOLD: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Similarity,
    Association,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Similarity => "similarity",
            Task::Association => "association",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "similarity" => Ok(Task::Similarity),
            "association" => Ok(Task::Association),
            _ => Err(Error::invalid(format!("unknown task '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RecordKind {
    Normal { word_a: usize, word_b: usize },
    Catch { target: u8 },
    /// Second pass of the normal record presented at `of`.
    Repeat { word_a: usize, word_b: usize, of: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub order: u32,
    #[serde(flatten)]
    pub kind: RecordKind,
    /// `None` for an unanswered question.
    pub score: Option<u8>,
}

impl RatingRecord {
    pub fn normal(order: u32, word_a: usize, word_b: usize, score: u8) -> Self {
        Self {
            order,
            kind: RecordKind::Normal { word_a, word_b },
            score: Some(score),
        }
    }

    pub fn catch(order: u32, target: u8, score: u8) -> Self {
        Self {
            order,
            kind: RecordKind::Catch { target },
            score: Some(score),
        }
    }

    pub fn repeat(order: u32, word_a: usize, word_b: usize, of: u32, score: u8) -> Self {
        Self {
            order,
            kind: RecordKind::Repeat { word_a, word_b, of },
            score: Some(score),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub participant: String,
    pub task: Task,
    /// In presentation order.
    pub records: Vec<RatingRecord>,
    pub age: Option<u32>,
    pub sex: Option<String>,
}

impl Session {
    pub fn new(participant: impl Into<String>, task: Task, mut records: Vec<RatingRecord>) -> Self {
        records.sort_by_key(|r| r.order);
        Self {
            participant: participant.into(),
            task,
            records,
            age: None,
            sex: None,
        }
    }

    pub fn catch_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.kind, RecordKind::Catch { .. }))
            .count()
    }

    pub fn repeat_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.kind, RecordKind::Repeat { .. }))
            .count()
    }

    /// Exactly the protocol's catch and repeat records, at least one normal
    /// record, and every question answered.
    pub fn is_complete(&self) -> bool {
        self.catch_count() == CATCH_TRIALS
            && self.repeat_count() == REPEATS
            && self
                .records
                .iter()
                .any(|r| matches!(r.kind, RecordKind::Normal { .. }))
            && self.records.iter().all(|r| r.score.is_some())
    }

    /// False when any catch record's score differs from its target.
    pub fn passes_catch(&self) -> Result<bool> {
        let catches: Vec<_> = self
            .records
            .iter()
            .filter_map(|r| match r.kind {
                RecordKind::Catch { target } => Some((target, r.score)),
                _ => None,
            })
            .collect();
        if catches.len() < CATCH_TRIALS {
            return Err(self.protocol(format!(
                "{} catch records, expected {CATCH_TRIALS}",
                catches.len()
            )));
        }
        Ok(catches.iter().all(|&(target, score)| score == Some(target)))
    }

    /// First- and second-pass scores of the repeated questions.
    pub fn double_pass_scores(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let normals: HashMap<u32, &RatingRecord> = self
            .records
            .iter()
            .filter(|r| matches!(r.kind, RecordKind::Normal { .. }))
            .map(|r| (r.order, r))
            .collect();
        let mut first = Vec::new();
        let mut second = Vec::new();
        for r in &self.records {
            let RecordKind::Repeat { word_a, word_b, of } = r.kind else {
                continue;
            };
            let orig = normals.get(&of).ok_or_else(|| {
                self.protocol(format!(
                    "repeat at order {} refers to missing question {of}",
                    r.order
                ))
            })?;
            if orig.kind != (RecordKind::Normal { word_a, word_b }) {
                return Err(self.protocol(format!(
                    "repeat at order {} asks a different pair than question {of}",
                    r.order
                )));
            }
            match (orig.score, r.score) {
                (Some(a), Some(b)) => {
                    first.push(a as f64);
                    second.push(b as f64);
                }
                _ => {
                    return Err(self.protocol(format!(
                        "repeat at order {} has an unanswered pass",
                        r.order
                    )))
                }
            }
        }
        if first.len() != REPEATS {
            return Err(self.protocol(format!(
                "{} repeat records, expected {REPEATS}",
                first.len()
            )));
        }
        Ok((first, second))
    }

    fn protocol(&self, message: String) -> Error {
        Error::Protocol {
            participant: self.participant.clone(),
            message,
        }
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    participant: String,
    task: Task,
    word_a: Option<String>,
    word_b: Option<String>,
    score: Option<i64>,
    kind: String,
    catch_target: Option<i64>,
    repeat_of: Option<u32>,
    order: u32,
    #[serde(default)]
    age: Option<u32>,
    #[serde(default)]
    sex: Option<String>,
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn scale_value(line: u64, value: i64) -> Result<u8> {
    if (0..=SCALE_MAX as i64).contains(&value) {
        Ok(value as u8)
    } else {
        Err(Error::ScoreRange {
            line,
            score: value,
            max: SCALE_MAX,
        })
    }
}

fn word(lexicon: &Lexicon, line: u64, label: Option<&String>, column: &str) -> Result<usize> {
    let label = label.ok_or_else(|| parse_err(line, format!("{column} is empty")))?;
    lexicon.id_of(label).ok_or_else(|| Error::Vocabulary {
        line,
        word: label.clone(),
    })
}

/// One session per (participant, task), in order of first appearance.
pub fn parse_sessions<R: Read>(reader: R, lexicon: &Lexicon) -> Result<Vec<Session>> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let mut index: HashMap<(String, Task), usize> = HashMap::new();
    let mut sessions: Vec<Session> = Vec::new();
    let mut seen_orders: Vec<HashMap<u32, u64>> = Vec::new();

    for result in csv.records() {
        let raw = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = raw.position().map_or(0, |p| p.line());
        let row: CsvRow = raw
            .deserialize(Some(&headers))
            .map_err(|e| parse_err(line, e.to_string()))?;

        let score = row.score.map(|s| scale_value(line, s)).transpose()?;
        let kind = match row.kind.as_str() {
            "normal" | "repeat" => {
                let a = word(lexicon, line, row.word_a.as_ref(), "word_a")?;
                let b = word(lexicon, line, row.word_b.as_ref(), "word_b")?;
                if a == b {
                    return Err(parse_err(line, "word_a and word_b are the same word"));
                }
                if row.kind == "normal" {
                    RecordKind::Normal { word_a: a, word_b: b }
                } else {
                    let of = row
                        .repeat_of
                        .ok_or_else(|| parse_err(line, "repeat row without repeat_of"))?;
                    RecordKind::Repeat { word_a: a, word_b: b, of }
                }
            }
            "catch" => {
                let target = row
                    .catch_target
                    .ok_or_else(|| parse_err(line, "catch row without catch_target"))?;
                RecordKind::Catch {
                    target: scale_value(line, target)?,
                }
            }
            other => return Err(parse_err(line, format!("unknown kind '{other}'"))),
        };

        let key = (row.participant.clone(), row.task);
        let slot = *index.entry(key).or_insert_with(|| {
            sessions.push(Session {
                participant: row.participant.clone(),
                task: row.task,
                records: Vec::new(),
                age: None,
                sex: None,
            });
            seen_orders.push(HashMap::new());
            sessions.len() - 1
        });
        if let Some(prev) = seen_orders[slot].insert(row.order, line) {
            return Err(parse_err(
                line,
                format!("order {} already used on line {prev}", row.order),
            ));
        }
        let session = &mut sessions[slot];
        session.age = session.age.or(row.age);
        if session.sex.is_none() {
            session.sex = row.sex.filter(|s| !s.is_empty());
        }
        session.records.push(RatingRecord {
            order: row.order,
            kind,
            score,
        });
    }
    for s in &mut sessions {
        s.records.sort_by_key(|r| r.order);
    }
    Ok(sessions)
}

pub fn parse_sessions_path(path: impl AsRef<Path>, lexicon: &Lexicon) -> Result<Vec<Session>> {
    parse_sessions(std::fs::File::open(path)?, lexicon)
}

#[derive(Serialize)]
struct CsvOut<'a> {
    participant: &'a str,
    task: Task,
    word_a: Option<&'a str>,
    word_b: Option<&'a str>,
    score: Option<u8>,
    kind: &'static str,
    catch_target: Option<u8>,
    repeat_of: Option<u32>,
    order: u32,
    age: Option<u32>,
    sex: Option<&'a str>,
}

/// Writes sessions in the schema read by [`parse_sessions`].
pub fn write_sessions<W: Write>(writer: W, sessions: &[Session], lexicon: &Lexicon) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let label = |id: usize| -> Result<&str> {
        lexicon
            .word(id)
            .map(|w| w.english.as_str())
            .ok_or_else(|| Error::invalid(format!("word id {id} not in lexicon")))
    };
    for s in sessions {
        for r in &s.records {
            let (word_a, word_b, kind, catch_target, repeat_of) = match r.kind {
                RecordKind::Normal { word_a, word_b } => {
                    (Some(label(word_a)?), Some(label(word_b)?), "normal", None, None)
                }
                RecordKind::Catch { target } => (None, None, "catch", Some(target), None),
                RecordKind::Repeat { word_a, word_b, of } => {
                    (Some(label(word_a)?), Some(label(word_b)?), "repeat", None, Some(of))
                }
            };
            csv.serialize(CsvOut {
                participant: &s.participant,
                task: s.task,
                word_a,
                word_b,
                score: r.score,
                kind,
                catch_target,
                repeat_of,
                order: r.order,
                age: s.age,
                sex: s.sex.as_deref(),
            })?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Removes incomplete sessions.
pub fn filter_defective(sessions: Vec<Session>) -> (Vec<Session>, Vec<Session>) {
    sessions.into_iter().partition(Session::is_complete)
}

/// Removes sessions that missed at least one catch target.
pub fn filter_catch(sessions: Vec<Session>) -> Result<(Vec<Session>, Vec<Session>)> {
    let mut retained = Vec::new();
    let mut removed = Vec::new();
    for s in sessions {
        if s.passes_catch()? {
            retained.push(s);
        } else {
            removed.push(s);
        }
    }
    Ok((retained, removed))
}

#[derive(Debug, Clone, Default)]
pub struct DoublePassOutcome {
    pub retained: Vec<Session>,
    pub removed: Vec<Session>,
    /// Participants removed because a pass had zero variance.
    pub degenerate: Vec<String>,
}

/// Removes sessions whose first- and second-pass scores correlate below
/// `threshold`. An undefined correlation (a constant pass) also removes.
pub fn filter_double_pass(sessions: Vec<Session>, threshold: f64) -> Result<DoublePassOutcome> {
    let mut out = DoublePassOutcome::default();
    for s in sessions {
        let (first, second) = s.double_pass_scores()?;
        match stats::pearson_r(&first, &second) {
            Ok(r) if r >= threshold => out.retained.push(s),
            Ok(_) => out.removed.push(s),
            Err(Error::UndefinedCorrelation(_)) => {
                out.degenerate.push(s.participant.clone());
                out.removed.push(s);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input_sessions: usize,
    pub removed_defective: usize,
    pub removed_catch: usize,
    pub removed_double_pass: usize,
    pub retained: usize,
    pub degenerate: Vec<String>,
}

/// Defective, then catch, then double-pass filtering.
pub fn run_filters(sessions: Vec<Session>, threshold: f64) -> Result<(Vec<Session>, FilterReport)> {
    let input_sessions = sessions.len();
    let (complete, defective) = filter_defective(sessions);
    let (passed, failed_catch) = filter_catch(complete)?;
    let dp = filter_double_pass(passed, threshold)?;
    let report = FilterReport {
        input_sessions,
        removed_defective: defective.len(),
        removed_catch: failed_catch.len(),
        removed_double_pass: dp.removed.len(),
        retained: dp.retained.len(),
        degenerate: dp.degenerate,
    };
    Ok((dp.retained, report))
}

/// Integer score totals and response counts per ordered word pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregate {
    pub task: Task,
    n: usize,
    totals: Vec<u64>,
    counts: Vec<u64>,
}

/// Sums normal-record scores per ordered pair; repeats are excluded.
pub fn aggregate(sessions: &[Session], lexicon: &Lexicon) -> Result<Aggregate> {
    let first = sessions
        .first()
        .ok_or_else(|| Error::Empty("no sessions to aggregate".into()))?;
    let n = lexicon.len();
    let mut agg = Aggregate {
        task: first.task,
        n,
        totals: vec![0; n * n],
        counts: vec![0; n * n],
    };
    for s in sessions {
        if s.task != agg.task {
            return Err(Error::invalid(format!(
                "sessions mix tasks ({} and {})",
                agg.task, s.task
            )));
        }
        for r in &s.records {
            if let (RecordKind::Normal { word_a, word_b }, Some(score)) = (r.kind, r.score) {
                if word_a >= n || word_b >= n {
                    return Err(Error::invalid(format!(
                        "word id out of range in session {}",
                        s.participant
                    )));
                }
                agg.totals[word_a * n + word_b] += score as u64;
                agg.counts[word_a * n + word_b] += 1;
            }
        }
    }
    Ok(agg)
}

impl Aggregate {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.n + b]
    }

    pub fn mean(&self, a: usize, b: usize) -> Option<f64> {
        let c = self.count(a, b);
        (c > 0).then(|| self.totals[a * self.n + b] as f64 / c as f64)
    }

    /// Off-diagonal ordered pairs without a single response.
    pub fn missing_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| (0..self.n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && self.count(a, b) == 0)
            .collect()
    }

    /// Mean over every response of the task.
    pub fn global_mean(&self) -> Option<f64> {
        let c: u64 = self.counts.iter().sum();
        (c > 0).then(|| self.totals.iter().sum::<u64>() as f64 / c as f64)
    }

    /// Mean-score network. Missing pairs are an error unless `impute` fills
    /// them with the global mean.
    pub fn network(&self, lexicon: &Lexicon, impute: bool) -> Result<SemanticNetwork> {
        let missing = self.missing_pairs();
        let fill = if missing.is_empty() {
            0.0
        } else if impute {
            self.global_mean()
                .ok_or_else(|| Error::Empty("no responses to impute from".into()))?
        } else {
            let (a, b) = missing[0];
            return Err(Error::MissingPairs {
                count: missing.len(),
                first: format!("{} -> {}", lexicon.words()[a].english, lexicon.words()[b].english),
            });
        };
        let weights = Matrix::from_fn(self.n, self.n, |a, b| {
            if a == b {
                0.0
            } else {
                self.mean(a, b).unwrap_or(fill)
            }
        });
        SemanticNetwork::new(lexicon.labels(), weights, SCALE_MAX as f64)
    }
}

/// Missing-pair listing keyed by word labels, for reports.
pub fn missing_pair_labels(agg: &Aggregate, lexicon: &Lexicon) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (a, b) in agg.missing_pairs() {
        out.entry(lexicon.words()[a].english.clone())
            .or_default()
            .push(lexicon.words()[b].english.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::builtin_lexicon;

    const HEADER: &str = "participant,task,word_a,word_b,score,kind,catch_target,repeat_of,order\n";

    fn parse(body: &str) -> Result<Vec<Session>> {
        parse_sessions(format!("{HEADER}{body}").as_bytes(), &builtin_lexicon())
    }

    #[test]
    fn three_rows_one_session() {
        let s = parse(
            "p1,similarity,joy,trust,4,normal,,,0\n\
             p1,similarity,,,3,catch,3,,1\n\
             p1,similarity,joy,trust,5,repeat,,0,2\n",
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].records.len(), 3);
        assert_eq!(s[0].records[1].kind, RecordKind::Catch { target: 3 });
        assert!(!s[0].is_complete());
    }

    #[test]
    fn records_sorted_by_order_and_split_by_task() {
        let s = parse(
            "p1,similarity,joy,trust,4,normal,,,5\n\
             p1,association,joy,trust,4,normal,,,0\n\
             p1,similarity,fear,terror,7,normal,,,1\n",
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].records.iter().map(|r| r.order).collect::<Vec<_>>(), [1, 5]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse("p1,similarity,joy,trust,4,normal,,,0\np1,similarity,joy,trust,9,normal,,,1\n") {
            Err(Error::ScoreRange { line: 3, score: 9, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("p1,similarity,joy,happiness,4,normal,,,0\n") {
            Err(Error::Vocabulary { line: 2, word }) => assert_eq!(word, "happiness"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("p1,similarity,joy,trust,x,normal,,,0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("p1,similarity,joy,trust,1,normal,,,0\np1,similarity,joy,fear,1,normal,,,0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("p1,similarity,joy,joy,1,normal,,,0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn empty_score_is_unanswered() {
        let s = parse("p1,similarity,joy,trust,,normal,,,0\n").unwrap();
        assert_eq!(s[0].records[0].score, None);
    }

    #[test]
    fn optional_demographic_columns() {
        let text = "participant,task,word_a,word_b,score,kind,catch_target,repeat_of,order,age,sex\n\
                    p1,similarity,joy,trust,4,normal,,,0,34,f\n";
        let s = parse_sessions(text.as_bytes(), &builtin_lexicon()).unwrap();
        assert_eq!(s[0].age, Some(34));
        assert_eq!(s[0].sex.as_deref(), Some("f"));
    }

    #[test]
    fn catch_filter_cases() {
        let mk = |a: u8, b: u8| {
            Session::new(
                "p",
                Task::Similarity,
                vec![RatingRecord::catch(0, 3, a), RatingRecord::catch(1, 5, b)],
            )
        };
        let (kept, gone) = filter_catch(vec![mk(3, 5), mk(3, 4)]).unwrap();
        assert_eq!((kept.len(), gone.len()), (1, 1));
        let one = Session::new("q", Task::Similarity, vec![RatingRecord::catch(0, 3, 3)]);
        assert!(matches!(filter_catch(vec![one]), Err(Error::Protocol { .. })));
    }

    #[test]
    fn aggregate_means_exclude_repeats() {
        let lex = builtin_lexicon();
        let (joy, trust) = (lex.id_of("joy").unwrap(), lex.id_of("trust").unwrap());
        let s1 = Session::new(
            "a",
            Task::Similarity,
            vec![
                RatingRecord::normal(0, joy, trust, 4),
                RatingRecord::repeat(1, joy, trust, 0, 0),
            ],
        );
        let s2 = Session::new("b", Task::Similarity, vec![RatingRecord::normal(0, joy, trust, 6)]);
        let agg = aggregate(&[s1, s2], &lex).unwrap();
        assert_eq!(agg.mean(joy, trust), Some(5.0));
        assert_eq!(agg.count(joy, trust), 2);
        assert_eq!(agg.mean(trust, joy), None);
        assert_eq!(agg.missing_pairs().len(), 48 * 47 - 1);
        assert!(matches!(
            agg.network(&lex, false),
            Err(Error::MissingPairs { count: 2255, .. })
        ));
        let net = agg.network(&lex, true).unwrap();
        assert_eq!(net.weight(trust, joy), 5.0);
        assert!(matches!(aggregate(&[], &lex), Err(Error::Empty(_))));
    }

    #[test]
    fn mixed_tasks_rejected() {
        let lex = builtin_lexicon();
        let a = Session::new("a", Task::Similarity, vec![]);
        let b = Session::new("b", Task::Association, vec![]);
        assert!(aggregate(&[a, b], &lex).is_err());
    }
}

//! The `emonet` pipeline: synthetic data, analysis bundles and exports.
//!
//! An analysis bundle is a directory holding `analysis.json`. Every figure
//! the `export` command draws is computed from that file alone.

pub mod args;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use emonet_core::export::{layout_svg, network_dot, network_graphml, omega_dot, word_colors, PETAL_COLORS};
use emonet_core::graph::{dissimilarity, MarkovModel, SemanticNetwork};
use emonet_core::ingest::{
    aggregate, missing_pair_labels, parse_sessions_path, run_filters, write_sessions, FilterReport, Session, Task,
};
use emonet_core::lexicon::{builtin_lexicon, Lexicon, Partition};
use emonet_core::mdmc::{alpha_sweep, decompose_best, CommunityNetwork, DecomposeConfig, Decomposition, RunSummary, SweepRow};
use emonet_core::mds::{classical_mds, omega_layout, Layout};
use emonet_core::metrics::{
    locality_report, nmi, opposite_pair_values, reference_partition, within_pair_values, LocalityReport, NmiDomain,
    NmiNorm,
};
use emonet_core::stats::{chi_square_homogeneity, paired_t_test, score_histogram, TestResult};
use emonet_core::synth::{generate, PlantedModel};
use emonet_core::Error;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::args::{AnalyzeArgs, Cli, Command, ExportArgs, ExportFormat, SynthArgs};

pub const BUNDLE_FILE: &str = "analysis.json";

/// Pipeline stage families; each maps to its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Usage,
    Input,
    Filter,
    Network,
    Decomposition,
    Metrics,
    Export,
}

impl Stage {
    pub fn exit_code(self) -> u8 {
        match self {
            Stage::Usage => 2,
            Stage::Input => 3,
            Stage::Filter => 4,
            Stage::Network => 5,
            Stage::Decomposition => 6,
            Stage::Metrics => 7,
            Stage::Export => 8,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Usage => "usage",
            Stage::Input => "input",
            Stage::Filter => "filter",
            Stage::Network => "network",
            Stage::Decomposition => "decomposition",
            Stage::Metrics => "metrics",
            Stage::Export => "export",
        })
    }
}

#[derive(Debug, Error)]
#[error("[{stage}] {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T, E: Into<Error>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError {
            stage,
            source: e.into(),
        })
    }
}

fn fail<T>(stage: Stage, message: impl Into<String>) -> Result<T, StageError> {
    Err(StageError {
        stage,
        source: Error::InvalidInput(message.into()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub damping: f64,
    pub decompose: DecomposeConfig,
    pub seeds: Vec<u64>,
    pub double_pass_threshold: f64,
    pub nmi_domain: NmiDomain,
    pub nmi_norm: NmiNorm,
    pub impute_missing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub best: Decomposition,
    pub runs: Vec<RunSummary>,
    pub active_count: usize,
    /// Hard community of every word.
    pub partition: Partition,
    /// Words per hard community, keyed by component index.
    pub communities: BTreeMap<usize, Vec<String>>,
    pub nmi_vs_wheel: f64,
    pub omega: CommunityNetwork,
    /// Absent when fewer than two communities survive.
    pub omega_layout: Option<Layout>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub task: Task,
    pub filter: FilterReport,
    pub locality: LocalityReport,
    /// Score counts 0..=7 of the primary and the comparison dataset.
    pub score_histograms: [Vec<u64>; 2],
    pub chi_square: TestResult,
    /// Within-petal pair weights, primary vs comparison.
    pub locality_t: TestResult,
    /// Opposite-petal pair weights, primary vs comparison.
    pub globality_t: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub task: Task,
    pub settings: Settings,
    pub filter: FilterReport,
    /// Unrated ordered pairs filled with the global mean, by source word.
    pub imputed: BTreeMap<String, Vec<String>>,
    pub network: SemanticNetwork,
    pub locality: LocalityReport,
    pub word_layout: Layout,
    pub word_colors: Vec<String>,
    pub decomposition: Option<DecompositionResult>,
    pub sweep: Option<Vec<SweepRow>>,
    pub comparison: Option<Comparison>,
}

impl Bundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn read(dir: &Path) -> Result<Self, StageError> {
        let text = fs::read_to_string(dir.join(BUNDLE_FILE)).at(Stage::Input)?;
        serde_json::from_str(&text).at(Stage::Input)
    }
}

/// Runs a parsed command and returns the text to print on success.
pub fn run(cli: Cli) -> Result<String, StageError> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Analyze(a) => {
            let bundle = cmd_analyze(&a)?;
            Ok(summary(&bundle))
        }
        Command::Export(a) => {
            let files = cmd_export(&a)?;
            Ok(files.iter().map(|p| format!("{}\n", p.display())).collect())
        }
    }
}

fn load_lexicon(path: Option<&Path>) -> Result<Lexicon, StageError> {
    match path {
        Some(p) => Lexicon::from_path(p).at(Stage::Input),
        None => Ok(builtin_lexicon()),
    }
}

pub fn cmd_synth(a: &SynthArgs) -> Result<String, StageError> {
    let lexicon = load_lexicon(a.lexicon.as_deref())?;
    if a.participants == 0 {
        return fail(Stage::Usage, "participants must be at least 1");
    }
    let model = PlantedModel {
        base_within: a.base_within,
        base_opposite: a.base_opposite,
        base_other: a.base_other,
        noise_sd: a.noise_sd,
        pair_sd: a.pair_sd,
        careless_rate: a.careless_rate,
        seed: a.seed,
        block_size: a.block_size,
    };
    let sessions = generate(&model, &lexicon, a.participants, a.task.into()).at(Stage::Usage)?;
    let file = fs::File::create(&a.out).at(Stage::Export)?;
    write_sessions(std::io::BufWriter::new(file), &sessions, &lexicon).at(Stage::Export)?;
    let (_, report) = run_filters(sessions, emonet_core::ingest::DOUBLE_PASS_THRESHOLD).at(Stage::Filter)?;
    let mut s = serde_json::to_string_pretty(&report).at(Stage::Export)?;
    s.push('\n');
    Ok(s)
}

fn distinct_tasks(sessions: &[Session]) -> BTreeSet<Task> {
    sessions.iter().map(|s| s.task).collect()
}

fn keep_task(sessions: Vec<Session>, task: Task) -> Vec<Session> {
    sessions.into_iter().filter(|s| s.task == task).collect()
}

/// Resolves the task to analyze: the requested one, else the only one present.
fn primary_task(sessions: &[Session], requested: Option<Task>) -> Result<Task, StageError> {
    let tasks = distinct_tasks(sessions);
    match requested {
        Some(t) if tasks.contains(&t) => Ok(t),
        Some(t) => fail(Stage::Input, format!("no {t} sessions in input")),
        None => match tasks.len() {
            0 => fail(Stage::Input, "input has no sessions"),
            1 => Ok(*tasks.first().expect("one task")),
            _ => fail(Stage::Input, "input mixes tasks; choose one with --task"),
        },
    }
}

/// The comparison file's task: its only task, else the one the primary
/// dataset does not use.
fn comparison_task(sessions: &[Session], primary: Task) -> Result<Task, StageError> {
    let tasks = distinct_tasks(sessions);
    match tasks.len() {
        0 => fail(Stage::Input, "comparison input has no sessions"),
        1 => Ok(*tasks.first().expect("one task")),
        _ => Ok(*tasks.iter().find(|&&t| t != primary).expect("two tasks")),
    }
}

struct Prepared {
    task: Task,
    filter: FilterReport,
    retained: Vec<Session>,
    imputed: BTreeMap<String, Vec<String>>,
    network: SemanticNetwork,
}

fn prepare(sessions: Vec<Session>, task: Task, lexicon: &Lexicon, a: &AnalyzeArgs) -> Result<Prepared, StageError> {
    let (retained, filter) = run_filters(keep_task(sessions, task), a.double_pass_threshold).at(Stage::Filter)?;
    if retained.is_empty() {
        return Err(StageError {
            stage: Stage::Filter,
            source: Error::Empty(format!("every {task} session was filtered out")),
        });
    }
    let agg = aggregate(&retained, lexicon).at(Stage::Network)?;
    let imputed = if a.impute_missing {
        missing_pair_labels(&agg, lexicon)
    } else {
        BTreeMap::new()
    };
    let network = agg.network(lexicon, a.impute_missing).at(Stage::Network)?;
    Ok(Prepared {
        task,
        filter,
        retained,
        imputed,
        network,
    })
}

fn settings(a: &AnalyzeArgs) -> Result<Settings, StageError> {
    if !(0.0..=1.0).contains(&a.damping) {
        return fail(Stage::Usage, format!("damping must be in [0, 1], got {}", a.damping));
    }
    if a.seeds == 0 {
        return fail(Stage::Usage, "at least one seed is required");
    }
    let decompose = DecomposeConfig {
        k_max: a.k_max,
        alpha: a.alpha,
        seed: a.seed,
        tol: a.tol,
        max_iter: a.max_iter,
        prune_eps: a.prune_eps,
    };
    decompose.validate().at(Stage::Usage)?;
    if let Some(sweep) = &a.alpha_sweep {
        for &alpha in sweep {
            decompose.with_alpha(alpha).validate().at(Stage::Usage)?;
        }
    }
    Ok(Settings {
        damping: a.damping,
        decompose,
        seeds: (0..a.seeds).map(|i| a.seed.wrapping_add(i)).collect(),
        double_pass_threshold: a.double_pass_threshold,
        nmi_domain: a.nmi_domain.into(),
        nmi_norm: a.nmi_norm.into(),
        impute_missing: a.impute_missing,
    })
}

fn decomposition_result(
    model: &MarkovModel,
    net: &SemanticNetwork,
    lexicon: &Lexicon,
    s: &Settings,
) -> Result<DecompositionResult, StageError> {
    let (best, runs) = decompose_best(model, &s.decompose, &s.seeds).at(Stage::Decomposition)?;
    let partition = best.hard_assign();
    let mut communities: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (word, label) in partition.iter() {
        communities.entry(label).or_default().push(net.words()[word].clone());
    }
    let reference = reference_partition(lexicon, s.nmi_domain);
    let nmi_vs_wheel = nmi(&partition, &reference, s.nmi_norm).at(Stage::Metrics)?;
    let omega = best.omega(model, net.words());
    let omega_layout = if omega.len() >= 2 {
        Some(omega_layout(&omega).at(Stage::Metrics)?)
    } else {
        None
    };
    Ok(DecompositionResult {
        active_count: best.active_count(s.decompose.prune_eps),
        best,
        runs,
        partition,
        communities,
        nmi_vs_wheel,
        omega,
        omega_layout,
    })
}

fn comparison(primary: &Prepared, other: &Prepared, lexicon: &Lexicon) -> Result<Comparison, StageError> {
    let wheel = lexicon.wheel();
    let hist_a = score_histogram(&primary.retained).to_vec();
    let hist_b = score_histogram(&other.retained).to_vec();
    let chi_square = chi_square_homogeneity(&hist_a, &hist_b).at(Stage::Metrics)?;
    let pairs = |f: fn(&SemanticNetwork, &emonet_core::lexicon::Wheel) -> emonet_core::Result<Vec<f64>>| {
        Ok::<_, StageError>((f(&primary.network, wheel).at(Stage::Metrics)?, f(&other.network, wheel).at(Stage::Metrics)?))
    };
    let (wa, wb) = pairs(within_pair_values)?;
    let (oa, ob) = pairs(opposite_pair_values)?;
    Ok(Comparison {
        task: other.task,
        filter: other.filter.clone(),
        locality: locality_report(&other.network, wheel).at(Stage::Metrics)?,
        score_histograms: [hist_a, hist_b],
        chi_square,
        locality_t: paired_t_test(&wa, &wb).at(Stage::Metrics)?,
        globality_t: paired_t_test(&oa, &ob).at(Stage::Metrics)?,
    })
}

/// Builds the full analysis bundle without touching the filesystem
/// beyond reading the inputs.
pub fn analyze(a: &AnalyzeArgs) -> Result<Bundle, StageError> {
    let s = settings(a)?;
    let lexicon = load_lexicon(a.lexicon.as_deref())?;
    let sessions = parse_sessions_path(&a.input, &lexicon).at(Stage::Input)?;
    let task = primary_task(&sessions, a.task.map(Into::into))?;
    let other = match &a.compare {
        Some(path) => {
            let sessions = parse_sessions_path(path, &lexicon).at(Stage::Input)?;
            let t = comparison_task(&sessions, task)?;
            Some((sessions, t))
        }
        None => None,
    };

    let primary = prepare(sessions, task, &lexicon, a)?;
    let net = &primary.network;
    let model = MarkovModel::build(net, s.damping).at(Stage::Network)?;
    let locality = locality_report(net, lexicon.wheel()).at(Stage::Metrics)?;
    let word_layout = classical_mds(&dissimilarity(net), 2.min(net.len())).at(Stage::Metrics)?;

    let (decomposition, sweep) = match &a.alpha_sweep {
        Some(alphas) => {
            let rows = alpha_sweep(&model, &s.decompose, alphas, &s.seeds).at(Stage::Decomposition)?;
            (None, Some(rows))
        }
        None => (Some(decomposition_result(&model, net, &lexicon, &s)?), None),
    };

    let comparison = match other {
        Some((sessions, t)) => {
            let prepared = prepare(sessions, t, &lexicon, a)?;
            Some(comparison(&primary, &prepared, &lexicon)?)
        }
        None => None,
    };

    Ok(Bundle {
        task,
        settings: s,
        filter: primary.filter.clone(),
        imputed: primary.imputed.clone(),
        network: primary.network.clone(),
        locality,
        word_layout,
        word_colors: word_colors(&lexicon),
        decomposition,
        sweep,
        comparison,
    })
}

/// `analyze` plus writing the bundle directory and any requested exports.
pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<Bundle, StageError> {
    let bundle = analyze(a)?;
    fs::create_dir_all(&a.out).at(Stage::Export)?;
    fs::write(a.out.join(BUNDLE_FILE), bundle.to_json()).at(Stage::Export)?;
    let formats: Vec<ExportFormat> = a.export.iter().copied().filter(|f| *f != ExportFormat::Json).collect();
    write_exports(&bundle, &a.out, &formats)?;
    Ok(bundle)
}

pub fn cmd_export(a: &ExportArgs) -> Result<Vec<PathBuf>, StageError> {
    let bundle = Bundle::read(&a.bundle)?;
    let out = a.out.clone().unwrap_or_else(|| a.bundle.clone());
    fs::create_dir_all(&out).at(Stage::Export)?;
    write_exports(&bundle, &out, &a.format)
}

/// Rendered files for the requested formats, as (file name, contents).
pub fn render(bundle: &Bundle, formats: &[ExportFormat]) -> Vec<(String, String)> {
    let formats: BTreeSet<ExportFormat> = formats.iter().copied().collect();
    let partition = bundle.decomposition.as_ref().map(|d| &d.partition);
    let mut files = Vec::new();
    for f in formats {
        match f {
            ExportFormat::Json => files.push((BUNDLE_FILE.to_string(), bundle.to_json())),
            ExportFormat::Dot => {
                files.push(("network.dot".into(), network_dot(&bundle.network, partition)));
                if let Some(d) = &bundle.decomposition {
                    files.push(("omega.dot".into(), omega_dot(&d.omega)));
                }
            }
            ExportFormat::Graphml => {
                files.push(("network.graphml".into(), network_graphml(&bundle.network, partition)));
            }
            ExportFormat::Svg => {
                files.push((
                    "network.svg".into(),
                    layout_svg(&bundle.word_layout, bundle.network.words(), &bundle.word_colors),
                ));
                if let Some((d, layout)) = bundle
                    .decomposition
                    .as_ref()
                    .and_then(|d| d.omega_layout.as_ref().map(|l| (d, l)))
                {
                    let labels: Vec<String> = d.omega.labels.iter().map(|l| l.join("/")).collect();
                    let colors: Vec<String> = (0..d.omega.len())
                        .map(|a| PETAL_COLORS[a % PETAL_COLORS.len()].to_string())
                        .collect();
                    files.push(("omega.svg".into(), layout_svg(layout, &labels, &colors)));
                }
            }
        }
    }
    files
}

fn write_exports(bundle: &Bundle, dir: &Path, formats: &[ExportFormat]) -> Result<Vec<PathBuf>, StageError> {
    let mut written = Vec::new();
    for (name, contents) in render(bundle, formats) {
        let path = dir.join(name);
        fs::write(&path, contents).at(Stage::Export)?;
        written.push(path);
    }
    Ok(written)
}

fn summary(b: &Bundle) -> String {
    let mut out = format!(
        "task {}: {} of {} sessions retained\nlocality {:.4}  globality {:.4}\n",
        b.task, b.filter.retained, b.filter.input_sessions, b.locality.locality, b.locality.globality
    );
    if let Some(d) = &b.decomposition {
        out += &format!("active communities {}  NMI vs wheel {:.4}\n", d.active_count, d.nmi_vs_wheel);
    }
    if let Some(rows) = &b.sweep {
        out += "alpha\tseed\tactive\tresidual\n";
        for r in rows {
            out += &format!("{}\t{}\t{}\t{:.3e}\n", r.alpha, r.seed, r.active_count, r.residual);
        }
    }
    if let Some(c) = &b.comparison {
        for (name, t) in [("chi-square", &c.chi_square), ("locality t", &c.locality_t), ("globality t", &c.globality_t)] {
            out += &format!("{name}: statistic {:.4}, df {}, p {:.3e}\n", t.statistic, t.df, t.p_value);
        }
    }
    out
}

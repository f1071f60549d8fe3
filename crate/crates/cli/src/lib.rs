//! Pipeline orchestration behind the `topoprobe` binary.
//!
//! Each stage reads the previous stage's artifacts from the output
//! directory, so `pipeline` and the individual subcommands produce the same
//! bytes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use topoprobe::artifacts;
use topoprobe::complexes::{self, MAX_DIM};
use topoprobe::metrics;
use topoprobe::persistence::{self, PersistenceDiagram};
use topoprobe::relevance::{self, RelevanceKind};
use topoprobe::render::{self, PlotSpec};
use topoprobe::weightnet::{self, NetworkGraph, WeightsError};
use topoprobe::FilteredComplex;

/// Largest graph the recursive-walk enumerator accepts.
pub const WALK_MODE_MAX_NEURONS: usize = 64;

pub const RELEVANCE_FILE: &str = "relevance.csv";
pub const DIRECT_RELEVANCE_FILE: &str = "relevance_direct.csv";
pub const SIMPLICES_FILE: &str = "simplices.csv";
pub const PAIRS_FILE: &str = "pairs.csv";
pub const DIAGRAM_FILE: &str = "diagram.svg";
pub const BARCODE_FILE: &str = "barcode.svg";

pub fn metrics_file(dim: usize) -> String {
    format!("metrics_dim{dim}.json")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnumeratorMode {
    /// Clique complex of the extended relevance.
    #[default]
    Flag,
    /// Recursive path walk over direct relevance.
    Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub pairs: bool,
    pub metrics: bool,
    pub diagram: bool,
    pub barcode: bool,
    pub relevance: bool,
    pub simplices: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self {
            pairs: true,
            metrics: true,
            diagram: true,
            barcode: true,
            relevance: false,
            simplices: false,
        }
    }
}

impl Emit {
    pub fn none() -> Self {
        Self {
            pairs: false,
            metrics: false,
            diagram: false,
            barcode: false,
            relevance: false,
            simplices: false,
        }
    }

    pub fn parse_list(list: &str) -> anyhow::Result<Self> {
        let mut emit = Self::none();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "pairs" => emit.pairs = true,
                "metrics" => emit.metrics = true,
                "diagram" => emit.diagram = true,
                "barcode" => emit.barcode = true,
                "relevance" => emit.relevance = true,
                "simplices" => emit.simplices = true,
                other => bail!("unknown artifact {other:?}"),
            }
        }
        Ok(emit)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub dims: Vec<usize>,
    pub max_dim: usize,
    pub emit: Emit,
    pub mode: EnumeratorMode,
    /// `None` uses all available cores.
    pub workers: Option<usize>,
    /// Also write zero-persistence pairs to the pairs CSV.
    pub include_zero: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            out: out.into(),
            dims: vec![0, 1],
            max_dim: MAX_DIM,
            emit: Emit::default(),
            mode: EnumeratorMode::Flag,
            workers: None,
            include_zero: false,
        }
    }

    fn validate(&self) -> Result<(), StageError> {
        let fail = |msg: String| Err(StageError::input(Stage::Config, anyhow::anyhow!(msg)));
        if !self.input.is_file() {
            return fail(format!("input {} does not exist", self.input.display()));
        }
        if self.max_dim != MAX_DIM {
            return fail(format!("max_dim is fixed at {MAX_DIM}"));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d > 1) {
            return fail(format!(
                "dims must be a non-empty subset of 0,1 (got {:?})",
                self.dims
            ));
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Parse,
    Relevance,
    Complex,
    Persistence,
    Metrics,
    Render,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Parse => "parse",
            Stage::Relevance => "relevance",
            Stage::Complex => "complex",
            Stage::Persistence => "ph",
            Stage::Metrics => "metrics",
            Stage::Render => "render",
            Stage::Write => "write",
        };
        f.write_str(name)
    }
}

/// A failure tagged with the stage it came from.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    /// Bad input (exit status 2) rather than an internal or I/O failure.
    pub input_error: bool,
    pub source: anyhow::Error,
}

impl StageError {
    fn input(stage: Stage, source: anyhow::Error) -> Self {
        Self {
            stage,
            input_error: true,
            source,
        }
    }

    fn internal(stage: Stage, source: anyhow::Error) -> Self {
        Self {
            stage,
            input_error: false,
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.input_error {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {:#}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {}

trait StageContext<T> {
    fn input_err(self, stage: Stage) -> Result<T, StageError>;
    fn internal_err(self, stage: Stage) -> Result<T, StageError>;
}

impl<T, E: Into<anyhow::Error>> StageContext<T> for Result<T, E> {
    fn input_err(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError::input(stage, e.into()))
    }

    fn internal_err(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError::internal(stage, e.into()))
    }
}

/// Artifacts produced in memory, written together at the end of a run.
#[derive(Debug, Default)]
struct Outputs(Vec<(String, String)>);

impl Outputs {
    fn add(&mut self, name: impl Into<String>, content: String) {
        self.0.push((name.into(), content));
    }

    /// Writes every artifact; on failure removes whatever this call created.
    fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, StageError> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .internal_err(Stage::Write)?;
        let mut written = Vec::new();
        for (name, content) in self.0 {
            let path = dir.join(&name);
            if let Err(e) = fs::write(&path, content) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(e)
                    .with_context(|| format!("writing {}", path.display()))
                    .internal_err(Stage::Write);
            }
            written.push(path);
        }
        Ok(written)
    }
}

fn read_text(path: &Path, stage: Stage) -> Result<String, StageError> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .input_err(stage)
}

fn load_graph(cfg: &RunConfig) -> Result<NetworkGraph, StageError> {
    let bytes = fs::read(&cfg.input)
        .with_context(|| format!("reading {}", cfg.input.display()))
        .input_err(Stage::Parse)?;
    let model = weightnet::parse_weights_file(&bytes)
        .map_err(|e: WeightsError| {
            anyhow::Error::new(e).context(format!("parsing {}", cfg.input.display()))
        })
        .input_err(Stage::Parse)?;
    let graph = weightnet::assign_global_indices(&model);
    if cfg.mode == EnumeratorMode::Walk && graph.n() > WALK_MODE_MAX_NEURONS {
        return Err(StageError::input(
            Stage::Config,
            anyhow::anyhow!(
                "walk mode is limited to {WALK_MODE_MAX_NEURONS} neurons (network has {})",
                graph.n()
            ),
        ));
    }
    Ok(graph)
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, StageError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .internal_err(Stage::Config)?;
            Ok(pool.install(f))
        }
    }
}

fn build_complex(
    mode: EnumeratorMode,
    direct: &topoprobe::RelevanceMatrix,
    extended: &topoprobe::RelevanceMatrix,
    max_dim: usize,
) -> Result<FilteredComplex, StageError> {
    match mode {
        EnumeratorMode::Flag => {
            complexes::build_filtered_complex(extended, max_dim).internal_err(Stage::Complex)
        }
        EnumeratorMode::Walk => Ok(complexes::build_walk_complex(direct)),
    }
}

fn analysis_outputs(
    cfg: &RunConfig,
    graph: &NetworkGraph,
    pd: &PersistenceDiagram,
    out: &mut Outputs,
) -> Result<(), StageError> {
    if cfg.emit.metrics {
        metric_outputs(cfg, graph, pd, out)?;
    }
    render_outputs(cfg, pd, cfg.emit.diagram, cfg.emit.barcode, out);
    Ok(())
}

fn metric_outputs(
    cfg: &RunConfig,
    graph: &NetworkGraph,
    pd: &PersistenceDiagram,
    out: &mut Outputs,
) -> Result<(), StageError> {
    let unused = graph.unused_output_ids();
    for &dim in &cfg.dims {
        let m = metrics::diagram_metrics(pd, dim, &unused).internal_err(Stage::Metrics)?;
        out.add(metrics_file(dim), m.to_json() + "\n");
    }
    Ok(())
}

fn render_outputs(
    cfg: &RunConfig,
    pd: &PersistenceDiagram,
    diagram: bool,
    barcode: bool,
    out: &mut Outputs,
) {
    let shown = pd.restricted_to(&cfg.dims);
    let spec = PlotSpec::default();
    if diagram {
        out.add(DIAGRAM_FILE, render::diagram_svg(&shown, &spec));
    }
    if barcode {
        out.add(BARCODE_FILE, render::barcode_svg(&shown, &spec));
    }
}

/// Runs every stage in memory and writes the requested artifacts.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    cfg.validate()?;
    let graph = load_graph(cfg)?;
    let outputs = with_workers(cfg.workers, || -> Result<Outputs, StageError> {
        let mut out = Outputs::default();
        let direct = relevance::direct_relevance(&graph);
        let extended =
            relevance::extended_relevance(&direct, &graph).internal_err(Stage::Relevance)?;
        if cfg.emit.relevance {
            out.add(RELEVANCE_FILE, artifacts::write_relevance_csv(&extended));
            out.add(
                DIRECT_RELEVANCE_FILE,
                artifacts::write_relevance_csv(&direct),
            );
        }
        let fc = build_complex(cfg.mode, &direct, &extended, cfg.max_dim)?;
        if cfg.emit.simplices {
            out.add(SIMPLICES_FILE, artifacts::write_simplices_csv(&fc));
        }
        let pd = persistence::compute(&fc).internal_err(Stage::Persistence)?;
        if cfg.emit.pairs {
            out.add(
                PAIRS_FILE,
                artifacts::write_pairs_csv(&pd, cfg.include_zero),
            );
        }
        analysis_outputs(cfg, &graph, &pd, &mut out)?;
        Ok(out)
    })??;
    outputs.commit(&cfg.out)
}

/// `relevance`: weights file -> direct and extended relevance CSVs.
pub fn run_relevance(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    cfg.validate()?;
    let graph = load_graph(cfg)?;
    let mut out = Outputs::default();
    with_workers(cfg.workers, || -> Result<(), StageError> {
        let direct = relevance::direct_relevance(&graph);
        let extended =
            relevance::extended_relevance(&direct, &graph).internal_err(Stage::Relevance)?;
        out.add(RELEVANCE_FILE, artifacts::write_relevance_csv(&extended));
        out.add(
            DIRECT_RELEVANCE_FILE,
            artifacts::write_relevance_csv(&direct),
        );
        Ok(())
    })??;
    out.commit(&cfg.out)
}

/// `complex`: relevance CSV -> simplex CSV.
pub fn run_complex(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    cfg.validate()?;
    load_graph(cfg)?;
    let direct_text = read_text(&cfg.out.join(DIRECT_RELEVANCE_FILE), Stage::Complex)?;
    let direct = artifacts::read_relevance_csv(&direct_text, RelevanceKind::Direct)
        .input_err(Stage::Complex)?;
    let extended_text = read_text(&cfg.out.join(RELEVANCE_FILE), Stage::Complex)?;
    let extended = artifacts::read_relevance_csv(&extended_text, RelevanceKind::Extended)
        .input_err(Stage::Complex)?;
    let fc = with_workers(cfg.workers, || {
        build_complex(cfg.mode, &direct, &extended, cfg.max_dim)
    })??;
    let mut out = Outputs::default();
    out.add(SIMPLICES_FILE, artifacts::write_simplices_csv(&fc));
    out.commit(&cfg.out)
}

fn read_complex(cfg: &RunConfig, stage: Stage) -> Result<FilteredComplex, StageError> {
    let text = read_text(&cfg.out.join(SIMPLICES_FILE), stage)?;
    artifacts::read_simplices_csv(&text).input_err(stage)
}

fn read_diagram(
    cfg: &RunConfig,
    fc: &FilteredComplex,
    stage: Stage,
) -> Result<PersistenceDiagram, StageError> {
    let text = read_text(&cfg.out.join(PAIRS_FILE), stage)?;
    artifacts::read_pairs_csv(&text, fc).input_err(stage)
}

/// `ph`: simplex CSV -> pairs CSV.
pub fn run_ph(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    cfg.validate()?;
    let fc = read_complex(cfg, Stage::Persistence)?;
    let pd = persistence::compute(&fc).internal_err(Stage::Persistence)?;
    let mut out = Outputs::default();
    out.add(
        PAIRS_FILE,
        artifacts::write_pairs_csv(&pd, cfg.include_zero),
    );
    out.commit(&cfg.out)
}

/// `metrics`: pairs CSV plus the weights file's unused outputs -> metrics JSON.
pub fn run_metrics(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    cfg.validate()?;
    let graph = load_graph(cfg)?;
    let fc = read_complex(cfg, Stage::Metrics)?;
    let pd = read_diagram(cfg, &fc, Stage::Metrics)?;
    let mut out = Outputs::default();
    metric_outputs(cfg, &graph, &pd, &mut out)?;
    out.commit(&cfg.out)
}

/// `render`: pairs CSV -> diagram and barcode SVGs.
pub fn run_render(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    cfg.validate()?;
    let fc = read_complex(cfg, Stage::Render)?;
    let pd = read_diagram(cfg, &fc, Stage::Render)?;
    let mut out = Outputs::default();
    render_outputs(cfg, &pd, true, true, &mut out);
    out.commit(&cfg.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emit_list_parsing() {
        let e = Emit::parse_list("pairs,metrics").unwrap();
        assert!(e.pairs && e.metrics && !e.diagram && !e.relevance);
        let all = Emit::parse_list("pairs,metrics,diagram,barcode,relevance,simplices").unwrap();
        assert!(all.simplices && all.relevance && all.barcode);
        assert!(Emit::parse_list("pairs,bogus").is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::new("/definitely/missing.json", "/tmp/x");
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
        cfg.input = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("Cargo.toml");
        assert!(cfg.validate().is_ok());
        cfg.dims = vec![2];
        assert!(cfg.validate().is_err());
        cfg.dims = vec![0];
        cfg.workers = Some(0);
        assert!(cfg.validate().is_err());
        cfg.workers = None;
        cfg.max_dim = 3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn stage_error_display_names_stage() {
        let e = StageError::input(Stage::Parse, anyhow::anyhow!("bad"));
        assert_eq!(e.to_string(), "parse stage failed: bad");
        assert_eq!(e.exit_code(), 2);
        assert_eq!(
            StageError::internal(Stage::Write, anyhow::anyhow!("io")).exit_code(),
            1
        );
    }
}

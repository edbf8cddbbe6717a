//! Pipeline orchestration, configuration and the JSON verification report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{
    check_filtration, control_bounds, random_excision_instance, random_factorization, regain_control,
    verify_excision_rewiring, SupportSpace, EXCISION_RADIUS,
};
use crate::cover::{
    cell_rays, check_contraction, check_thickening, find_boundary_depth, nerve_map, pullback_cover, CompactSample,
    CoverParams, FinalCover, FiniteFamily, FlowCover, SampleCheck,
};
use crate::cover_tree::{gromov_product, CoverWindow, DeckElement, GromovPoint, DEFAULT_WINDOW_BUDGET};
use crate::error::{ConfigError, CoverError, WindowError};
use crate::graph::{generate, CatalogGraph, FiniteGraph, Girth, GraphSpec};
use crate::hybrid::{
    ball_property_failure, find_control_constant, ControlSearch, HybridMetricTable, HybridPoint, METRIC_TOLERANCE,
};
use crate::rips::RipsComplex;
use crate::rng::stream;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Limited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    /// The resource that limited a `limited` check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<String>,
    pub measured: BTreeMap<String, Value>,
    pub witnesses: Vec<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, anchor: &str, passed: bool) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: anchor.to_string(),
            status: if passed { Status::Pass } else { Status::Fail },
            limit: None,
            measured: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn limited(name: impl Into<String>, anchor: &str, limit: impl Into<String>) -> Self {
        CheckRecord { status: Status::Limited, limit: Some(limit.into()), ..Self::new(name, anchor, true) }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.measured.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn witnesses<S: ToString>(mut self, w: impl IntoIterator<Item = S>) -> Self {
        self.witnesses.extend(w.into_iter().take(10).map(|s| s.to_string()));
        self
    }

    fn sample(name: impl Into<String>, anchor: &str, c: &SampleCheck) -> Self {
        Self::new(name, anchor, c.passed())
            .with("tested", c.tested)
            .with("failures", c.failures)
            .witnesses(c.witnesses.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub tool: String,
    pub version: String,
    pub schema: u32,
    pub seed: u64,
}

impl Environment {
    fn new(seed: u64) -> Self {
        Environment {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            schema: SCHEMA_VERSION,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub limited: usize,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub environment: Environment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(seed: u64, config: Option<PipelineConfig>, checks: Vec<CheckRecord>) -> Self {
        let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
        let (pass, fail, limited) = (count(Status::Pass), count(Status::Fail), count(Status::Limited));
        let status = if fail > 0 {
            Status::Fail
        } else if limited > 0 || checks.is_empty() {
            Status::Limited
        } else {
            Status::Pass
        };
        VerificationReport {
            environment: Environment::new(seed),
            config,
            checks,
            summary: Summary { pass, fail, limited, status },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// 0 when everything passed, 1 on any failure, 3 when nothing failed
    /// but a check was cut short by a resource limit (or there were none).
    pub fn exit_code(&self) -> i32 {
        match self.summary.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Limited => 3,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Human-readable rendering.
    pub fn render_text(&self) -> String {
        let e = &self.environment;
        let mut out = format!("{} {} (seed {})\n", e.tool, e.version, e.seed);
        if let Some(c) = &self.config {
            let _ = writeln!(out, "graph {} radius {} depth {}", c.graph, c.radius, c.depth);
        }
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Limited => "limited",
            };
            let _ = write!(out, "{status:<7} {:<width$}  {}", c.name, c.anchor);
            if let Some(l) = &c.limit {
                let _ = write!(out, " [limit: {l}]");
            }
            out.push('\n');
            let measured: Vec<String> = c.measured.iter().map(|(k, v)| format!("{k}={v}")).collect();
            if !measured.is_empty() {
                let _ = writeln!(out, "        {}", measured.join(" "));
            }
            for w in c.witnesses.iter().take(3) {
                let _ = writeln!(out, "        witness: {w}");
            }
        }
        let s = &self.summary;
        let _ = writeln!(out, "{} pass, {} fail, {} limited", s.pass, s.fail, s.limited);
        out
    }
}

// ----- configuration -----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub graph: String,
    /// Window radius.
    pub radius: u32,
    /// Boundary ray depth.
    pub depth: u32,
    pub alpha: Option<f64>,
    pub big_c: Option<f64>,
    /// Random boundary rays in the compactification sample.
    pub samples: u32,
    /// Pairs for the contraction check.
    pub pairs: u32,
    pub seed: u64,
    pub faithfulness: bool,
    #[serde(skip)]
    pub out: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            graph: "heawood".into(),
            radius: 6,
            depth: 48,
            alpha: None,
            big_c: None,
            samples: 64,
            pairs: 500,
            seed: 1,
            faithfulness: true,
            out: None,
        }
    }
}

/// Values set on the command line; `None` leaves the file value.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub graph: Option<String>,
    pub radius: Option<u32>,
    pub depth: Option<u32>,
    pub alpha: Option<f64>,
    pub big_c: Option<f64>,
    pub samples: Option<u32>,
    pub seed: Option<u64>,
    pub out: Option<String>,
}

impl PipelineConfig {
    /// `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| ConfigError::Syntax { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| syntax(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("cannot parse {v:?}"))
            }
            let r: Result<(), String> = match key {
                "graph" => Ok(cfg.graph = value.to_string()),
                "radius" => num(value).map(|v| cfg.radius = v),
                "depth" => num(value).map(|v| cfg.depth = v),
                "alpha" => num(value).map(|v| cfg.alpha = Some(v)),
                "bigC" | "big_c" => num(value).map(|v| cfg.big_c = Some(v)),
                "samples" => num(value).map(|v| cfg.samples = v),
                "pairs" => num(value).map(|v| cfg.pairs = v),
                "seed" => num(value).map(|v| cfg.seed = v),
                "faithfulness" => num(value).map(|v| cfg.faithfulness = v),
                "out" => Ok(cfg.out = Some(value.to_string())),
                _ => Err(format!("unknown key {key:?}")),
            };
            r.map_err(syntax)?;
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        if let Some(v) = &o.graph {
            self.graph = v.clone();
        }
        if let Some(v) = o.radius {
            self.radius = v;
        }
        if let Some(v) = o.depth {
            self.depth = v;
        }
        if o.alpha.is_some() {
            self.alpha = o.alpha;
        }
        if o.big_c.is_some() {
            self.big_c = o.big_c;
        }
        if let Some(v) = o.samples {
            self.samples = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
    }

    /// Parses the graph and checks the config against it.
    pub fn validate(&self) -> Result<FiniteGraph, ConfigError> {
        let g = generate(&GraphSpec::parse(&self.graph)?)?;
        for (name, v) in [("radius", self.radius), ("depth", self.depth), ("samples", self.samples), ("pairs", self.pairs)] {
            if v < 1 {
                return Err(ConfigError::Invalid(format!("{name} must be at least 1")));
            }
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(ConfigError::Invalid(format!("alpha must be positive, got {a}")));
            }
        }
        if let Some(c) = self.big_c {
            if !(c.is_finite() && c > 1.0) {
                return Err(ConfigError::Invalid(format!("bigC must exceed 1, got {c}")));
            }
        }
        match g.girth() {
            Girth::Finite(girth) => {
                if self.faithfulness && self.radius < girth.div_ceil(4) {
                    return Err(ConfigError::Invalid(format!(
                        "radius {} is below ceil(girth / 4) = {} with the faithfulness check on",
                        self.radius,
                        girth.div_ceil(4)
                    )));
                }
            }
            Girth::Infinite => {
                if self.alpha.is_none() {
                    return Err(ConfigError::Invalid("a tree has no girth; set alpha".into()));
                }
            }
        }
        Ok(g)
    }
}

// ----- pipeline -----

/// Report plus the text artifacts of a pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: VerificationReport,
    pub window: Option<String>,
    pub manifest: Option<String>,
    pub table: Option<String>,
}

#[derive(Default)]
struct Artifacts {
    window: Option<String>,
    manifest: Option<String>,
    table: Option<String>,
}

struct Run {
    prefix: String,
    checks: Vec<CheckRecord>,
}

impl Run {
    fn name(&self, n: &str) -> String {
        if self.prefix.is_empty() {
            n.to_string()
        } else {
            format!("{}/{n}", self.prefix)
        }
    }

    fn push(&mut self, mut c: CheckRecord) {
        c.name = self.name(&c.name);
        self.checks.push(c);
    }

    /// Records a stage error and reports whether the run must stop.
    fn stage_error(&mut self, stage: &str, anchor: &str, e: impl std::fmt::Display, limit: Option<&str>) {
        let c = match limit {
            Some(l) => CheckRecord::limited(stage, anchor, l),
            None => CheckRecord::new(stage, anchor, false),
        };
        self.push(c.witnesses([e.to_string()]));
    }
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput, ConfigError> {
    let g = cfg.validate()?;
    let mut run = Run { prefix: String::new(), checks: Vec::new() };
    let art = pipeline_checks(cfg, &g, &mut run);
    Ok(PipelineOutput {
        report: VerificationReport::new(cfg.seed, Some(cfg.clone()), run.checks),
        window: art.window,
        manifest: art.manifest,
        table: art.table,
    })
}

fn dimension_status(name: &str, anchor: &str, dim: i64, bound: i64) -> CheckRecord {
    CheckRecord::new(name, anchor, dim <= bound).with("dimension", dim).with("bound", bound)
}

/// Runs the stages in order, stopping at the first hard error.
fn pipeline_checks(cfg: &PipelineConfig, g: &FiniteGraph, run: &mut Run) -> Artifacts {
    let mut art = Artifacts::default();
    let girth = g.girth();
    run.push(
        CheckRecord::new("graph", "finite graph of the family", true)
            .with("vertices", g.vertex_count())
            .with("edges", g.edge_count())
            .with("girth", girth.to_string())
            .with("diameter", g.diameter()),
    );
    let w = match CoverWindow::build(g, 0, cfg.radius) {
        Ok(w) => w,
        Err(e @ WindowError::TooLarge { .. }) => {
            run.stage_error("window", "universal cover window", e, Some("window vertex budget"));
            return art;
        }
        Err(e) => {
            run.stage_error("window", "universal cover window", e, None);
            return art;
        }
    };
    art.window = Some(w.export());
    let q = w.check_q_map();
    run.push(
        CheckRecord::new("window.q_map", "q-map is trivial on a fundamental domain of bounded diameter", q.passed())
            .with("domain_diameter", q.domain_diameter)
            .with("bound", q.bound)
            .with("pairs_checked", q.pairs_checked)
            .witnesses(q.failures.iter()),
    );
    if cfg.faithfulness {
        match w.check_asymptotic_faithfulness(None) {
            Ok(f) => run.push(
                CheckRecord::new("window.faithfulness", "covering map is isometric on balls of radius girth/4", f.violations.is_empty())
                    .with("radius", f.radius)
                    .with("balls", f.balls_checked)
                    .with("pairs", f.pairs_checked)
                    .witnesses(f.violations.iter().map(|v| format!("{} {} {}: tree {} graph {}", v.center, v.a, v.b, v.tree_distance, v.graph_distance))),
            ),
            Err(e) => run.stage_error("window.faithfulness", "covering map is isometric on balls of radius girth/4", e, None),
        }
    }
    let params = match cfg.alpha {
        Some(a) => CoverParams::new(a).expect("validated"),
        None => CoverParams::for_girth(girth.finite().expect("validated")),
    };
    let girth_value = girth.finite().unwrap_or(0);
    let flow = match FlowCover::build(&w, params) {
        Ok(f) => f,
        Err(e) => {
            run.stage_error("flow", "flow cover of the geodesic flow space", e, None);
            return art;
        }
    };
    let flow_sample = flow.sample_points(&w.ball(&w.root(), cfg.radius.min(4)), cfg.depth);
    let fd = flow.dimension(&flow_sample);
    run.push(
        dimension_status("flow.dimension", "flow cover is at most 5-dimensional", fd.dimension, 5)
            .with("points", fd.points)
            .with("centers", flow.centers())
            .with("uncovered", fd.uncovered)
            .witnesses([fd.witness.clone()]),
    );
    run.push(CheckRecord::sample("flow.containment", "flow cover contains every alpha-slab", &flow.check_containment(&flow_sample)));
    run.push(CheckRecord::sample("flow.freeness", "flow cover is free: g.U meets U only for g = 1", &flow.check_freeness(&flow_sample)));

    let max_depth = (cfg.depth * 5 / 6).max(1);
    let per_level = (cfg.samples as usize / 16).max(1);
    let sample = CompactSample::build(&w, cfg.radius.min(4), per_level, max_depth, cfg.depth, cfg.samples as usize, cfg.seed);
    let domain = w.fundamental_domain();
    let points = sample.points();
    let (thick, pb) = match pullback_cover(&flow, &domain, &sample.ray_points(), max_depth) {
        Ok(r) => r,
        Err(e) => {
            run.stage_error("pullback", "pull-back along the flow contains every alpha-slab", e, None);
            return art;
        }
    };
    run.push(
        CheckRecord::sample("pullback.containment", "pull-back along the flow contains every alpha-slab", &pb.containment)
            .with("tau", pb.tau)
            .with("rejected", &pb.rejected),
    );
    let prefix = domain.iter().map(|d| d.depth()).max().unwrap_or(0) + pb.tau + params.center_radius + 1;
    let (cells, exhaustive) = cell_rays(&w, prefix, cfg.depth, 1 << 15, cfg.seed);
    let pd = thick.dimension(&domain, &cells);
    let mut rec = dimension_status("pullback.dimension", "pulled-back cover is at most 5-dimensional", pd.dimension, 5)
        .with("cells", cells.len())
        .with("prefix", prefix)
        .with("exhaustive", exhaustive)
        .with("unresolved", pd.unresolved)
        .witnesses([pd.witness.clone()]);
    if exhaustive && rec.status == Status::Pass && pd.unresolved > 0 {
        rec.status = Status::Limited;
        rec.limit = Some("ray depth".into());
    } else if !exhaustive && rec.status == Status::Pass {
        rec.status = Status::Limited;
        rec.limit = Some("cell sampler cap".into());
    }
    run.push(rec);
    let th = check_thickening(&thick, &domain, &points, 16);
    run.push(CheckRecord::sample("thicken.disjointness", "thickening preserves disjointness", &th.disjointness));
    run.push(
        CheckRecord::sample("thicken.projections", "thickening preserves tree projections", &th.projections)
            .with("max_projection_diameter", th.max_projection_diameter)
            .with("diameter_bound", th.diameter_bound),
    );
    let depth = match find_boundary_depth(&thick, &domain, &points) {
        Ok(d) => d,
        Err(e @ CoverError::DepthExhausted { .. }) => {
            run.stage_error("depth", "boundary depth N", e, Some("ray depth"));
            return art;
        }
        Err(e) => {
            run.stage_error("depth", "boundary depth N", e, None);
            return art;
        }
    };
    run.push(
        CheckRecord::new("depth", "boundary depth N", true)
            .with("n", depth.depth)
            .with("tested", depth.tested)
            .with("uncovered_shallow", depth.uncovered)
            .witnesses(depth.deepest_uncovered.iter()),
    );

    let cover = FinalCover::assemble(thick, depth.depth);
    run.push(CheckRecord::sample("final.containment", "every alpha-slab lies in a cover set", &cover.check_containment(&domain, &points)));
    run.push(CheckRecord::sample("final.bulk_interior", "bulk sets cover the shallow compactification", &cover.check_bulk_interior(&domain, &points)));
    let [total, bulk, thickd] = cover.dimension(&domain, &points);
    run.push(
        dimension_status("final.dimension", "assembled cover is at most 7-dimensional", total.dimension, 7)
            .with("bulk_dimension", bulk.dimension)
            .with("thick_dimension", thickd.dimension)
            .with("points", total.points)
            .with("histogram", &total.histogram)
            .witnesses([total.witness.clone()]),
    );
    run.push(CheckRecord::sample("final.freeness", "assembled cover is free", &cover.check_freeness(&domain, &points)));
    let elements = w.deck_elements(2 * girth_value.max(1));
    run.push(
        CheckRecord::sample("final.invariance", "assembled cover is invariant under deck transformations", &cover.check_invariance(&domain, &points, &elements))
            .with("elements", elements.len()),
    );

    let vertices = w.ball(&w.root(), 1);
    let step = (points.len() / 40).max(1);
    let boundary: Vec<GromovPoint> = points.iter().step_by(step).cloned().collect();
    let hs = HybridMetricTable::product_sample(&vertices, &boundary);
    let keys = cover.sets_meeting(&hs);
    let proper = cover.check_properness(&keys, 8);
    run.push(
        CheckRecord::new("final.properness", "cover sets have bounded tree diameter", proper.passed)
            .with("bulk_diameter", proper.bulk_diameter)
            .with("thick_diameter", proper.thick_diameter)
            .with("thick_sets", proper.thick_sets)
            .with("bound", proper.bound),
    );
    art.manifest = Some(cover.manifest(&keys));
    let family = FiniteFamily::new(&cover, keys.clone());
    let table = match cfg.big_c {
        Some(c) => match HybridMetricTable::compute(&w, hs, c) {
            Ok(t) => {
                let all: Vec<usize> = (0..t.len()).collect();
                let failure = ball_property_failure(&family, &t, params.alpha, &all);
                run.push(
                    CheckRecord::new("metric.control_constant", "alpha-balls in d_C lie in cover sets", failure.is_none())
                        .with("c", c)
                        .with("source", "override")
                        .witnesses(failure),
                );
                t
            }
            Err(e) => {
                run.stage_error("metric.control_constant", "alpha-balls in d_C lie in cover sets", e, None);
                return art;
            }
        },
        None => match find_control_constant(&family, params.alpha, &w, &vertices, &boundary, &ControlSearch { seed: cfg.seed, ..Default::default() }) {
            Ok((cc, t)) => {
                run.push(CheckRecord::new("metric.control_constant", "alpha-balls in d_C lie in cover sets", true).with("constant", &cc));
                t
            }
            Err(e) => {
                run.stage_error("metric.control_constant", "alpha-balls in d_C lie in cover sets", e, None);
                return art;
            }
        },
    };
    art.table = Some(table.export());
    match nerve_map(&cover, &table) {
        Ok(nerve) => {
            let err = nerve.max_sum_error();
            run.push(
                CheckRecord::new("nerve.partition", "nerve coordinates form a partition of unity", err <= METRIC_TOLERANCE)
                    .with("sets", nerve.keys.len())
                    .with("max_sum_error", err),
            );
            let cr = check_contraction(&nerve, &table, girth_value, total.dimension.max(0) as u32, cfg.pairs as usize, cfg.seed);
            run.push(
                CheckRecord::new("nerve.contraction", "nerve map contracts d_C by 7/girth on admissible pairs", cr.violations == 0)
                    .with("admissible_radius", cr.admissible_radius)
                    .with("admissible", cr.admissible)
                    .with("violations", cr.violations)
                    .with("worst_ratio", cr.worst_ratio)
                    .witnesses(cr.witnesses.iter()),
            );
        }
        Err(e) => run.stage_error("nerve.partition", "nerve coordinates form a partition of unity", e, None),
    }
    metric_checks(&w, &table, &elements, cfg.seed, run);
    art
}

fn metric_checks(w: &CoverWindow, table: &HybridMetricTable, elements: &[DeckElement], seed: u64, run: &mut Run) {
    let ax = table.check_axioms(10_000, seed);
    run.push(
        CheckRecord::new("metric.axioms", "d_C is a metric bounded below by the tree distance", ax.passed())
            .with("report", &ax)
            .witnesses(ax.witnesses.iter()),
    );
    let mut worst = 0.0f64;
    let mut tested = 0;
    let mut failures = Vec::new();
    for g in elements.iter().filter(|g| !g.is_identity()).take(3) {
        match table.check_translate(w, g) {
            Ok(r) => {
                worst = worst.max(r.max_difference);
                tested += r.tested;
                failures.extend(r.failures);
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    run.push(
        CheckRecord::new("metric.invariance", "d_C is invariant under deck transformations", failures.is_empty())
            .with("pairs", tested)
            .with("max_difference", worst)
            .witnesses(failures),
    );
    let n = table.len();
    let picks = [0, n / 2, n - 1];
    let three: Vec<HybridPoint> = picks.iter().map(|&i| table.sample()[i].clone()).collect();
    let (exact, detail) = match HybridMetricTable::compute(w, three.clone(), table.constant()) {
        Ok(small) => {
            let brute = enumerate_paths(w, &three, table.constant());
            let ok = (0..3).all(|i| (0..3).all(|j| small.get(i, j) == brute[i][j]));
            (ok, format!("dijkstra {:?} enumeration {:?}", (0..3).map(|i| (0..3).map(|j| small.get(i, j)).collect::<Vec<_>>()).collect::<Vec<_>>(), brute))
        }
        Err(e) => (false, e.to_string()),
    };
    let mut rec = CheckRecord::new("metric.enumeration", "d_C equals the infimum over step sequences", exact);
    if !exact {
        rec = rec.witnesses([detail]);
    }
    run.push(rec);
}

/// Minimum over all sequences of at most three steps, both directions.
fn enumerate_paths(w: &CoverWindow, pts: &[HybridPoint], c: f64) -> Vec<Vec<f64>> {
    let root = w.root();
    let step = |a: &HybridPoint, b: &HybridPoint| {
        let base = w.q_map(&b.v).act(&root);
        let vis = if a.xi == b.xi { 0.0 } else { (-gromov_product(&a.xi, &b.xi, &base).value()).exp() };
        a.v.distance(&b.v) as f64 + c * vis
    };
    let n = pts.len();
    let mut best = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        best[i][i] = 0.0;
        for a in 0..n {
            let d1 = step(&pts[i], &pts[a]);
            best[i][a] = best[i][a].min(d1);
            for b in 0..n {
                let d2 = d1 + step(&pts[a], &pts[b]);
                best[i][b] = best[i][b].min(d2);
                for c2 in 0..n {
                    best[i][c2] = best[i][c2].min(d2 + step(&pts[b], &pts[c2]));
                }
            }
        }
    }
    (0..n).map(|i| (0..n).map(|j| best[i][j].min(best[j][i])).collect()).collect()
}

// ----- catalog verification -----

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub graphs: Vec<GraphSpec>,
    pub algebra_instances: usize,
    /// Test-only fault injection: the girth oracle reports one more.
    #[doc(hidden)]
    pub perturb_girth_oracle: bool,
}

impl VerifyOptions {
    pub fn catalog(seed: u64) -> Self {
        let mut graphs: Vec<GraphSpec> = (8..=12).map(|n| GraphSpec::Catalog(CatalogGraph::Cycle(n))).collect();
        graphs.extend([CatalogGraph::Petersen, CatalogGraph::Heawood, CatalogGraph::McGee].map(GraphSpec::Catalog));
        VerifyOptions { seed, graphs, algebra_instances: 500, perturb_girth_oracle: false }
    }

    pub fn empty(seed: u64) -> Self {
        VerifyOptions { seed, graphs: Vec::new(), algebra_instances: 0, perturb_girth_oracle: false }
    }
}

/// Shortest cycle by depth-first enumeration of simple paths.
fn girth_by_enumeration(g: &FiniteGraph) -> Option<u32> {
    fn dfs(g: &FiniteGraph, start: u32, path: &mut Vec<u32>, best: &mut u32) {
        let len = path.len() as u32;
        if len >= *best {
            return;
        }
        let u = *path.last().expect("nonempty");
        for &v in g.neighbors(u) {
            if v == start && len >= 3 {
                *best = (*best).min(len);
            } else if v > start && !path.contains(&v) {
                path.push(v);
                dfs(g, start, path, best);
                path.pop();
            }
        }
    }
    let mut best = u32::MAX;
    for s in g.vertices() {
        dfs(g, s, &mut vec![s], &mut best);
    }
    (best != u32::MAX).then_some(best)
}

pub fn verify_catalog(opts: &VerifyOptions) -> VerificationReport {
    let seed = opts.seed;
    let mut run = Run { prefix: String::new(), checks: Vec::new() };
    for spec in &opts.graphs {
        let label = spec.label();
        let g = match generate(spec) {
            Ok(g) => g,
            Err(e) => {
                run.stage_error(&format!("{label}/graph"), "catalog graph", e, None);
                continue;
            }
        };
        let bfs = g.girth().finite();
        let oracle = girth_by_enumeration(&g).map(|x| x + opts.perturb_girth_oracle as u32);
        let mut rec = CheckRecord::new(format!("{label}/girth"), "girth equals the shortest cycle length", bfs == oracle)
            .with("bfs", bfs)
            .with("enumeration", oracle);
        if bfs != oracle {
            rec = rec.witnesses([format!("bfs {bfs:?} enumeration {oracle:?}")]);
        }
        run.push(rec);
        let which = match spec {
            GraphSpec::Catalog(c) => Some(*c),
            _ => None,
        };
        if which == Some(CatalogGraph::McGee) {
            retraction_checks(&g, &label, 3, seed, true, &mut run);
        }
        if which == Some(CatalogGraph::Cycle(9)) {
            retraction_checks(&g, &label, 4, seed, false, &mut run);
        }
        if matches!(which, Some(CatalogGraph::Heawood | CatalogGraph::McGee)) {
            let girth = bfs.expect("finite girth");
            match CoverWindow::build_with_budget(&g, 0, girth / 2, DEFAULT_WINDOW_BUDGET)
                .and_then(|w| w.check_asymptotic_faithfulness(None))
            {
                Ok(f) => run.push(
                    CheckRecord::new(format!("{label}/faithfulness"), "covering map is isometric on balls of radius girth/4", f.violations.is_empty())
                        .with("window_radius", girth / 2)
                        .with("radius", f.radius)
                        .with("balls", f.balls_checked)
                        .with("pairs", f.pairs_checked),
                ),
                Err(e) => run.stage_error(&format!("{label}/faithfulness"), "covering map is isometric on balls of radius girth/4", e, None),
            }
            let cfg = PipelineConfig { graph: label.clone(), seed, ..Default::default() };
            let mut sub = Run { prefix: label.clone(), checks: Vec::new() };
            pipeline_checks(&cfg, &g, &mut sub);
            run.checks.extend(sub.checks);
        }
    }
    if opts.algebra_instances > 0 {
        algebra_checks(opts.algebra_instances, seed, &mut run);
    }
    VerificationReport::new(seed, None, run.checks)
}

fn retraction_checks(g: &FiniteGraph, label: &str, d: u32, seed: u64, grid: bool, run: &mut Run) {
    let rc = match RipsComplex::build(g, d) {
        Ok(r) => r,
        Err(e) => {
            run.stage_error(&format!("{label}/rips"), "Rips complex below half the girth", e, None);
            return;
        }
    };
    if grid {
        let r = rc.check_against_grid(500, 1e-3, seed);
        let worst: Vec<String> = {
            let mut recs: Vec<_> = r.records.iter().collect();
            recs.sort_by(|a, b| b.gap.total_cmp(&a.gap));
            recs.iter().take(3).map(|s| serde_json::to_string(s).expect("serializable")).collect()
        };
        run.push(
            CheckRecord::new(format!("{label}/retraction"), "closed-form retraction minimizes the weighted squared distance", r.passed(2e-3))
                .with("scale", d)
                .with("samples", r.samples)
                .with("max_gap", r.max_gap)
                .with("non_unique", r.non_unique)
                .witnesses(r.errors.iter().cloned().chain(worst)),
        );
    }
    let l = rc.check_lipschitz(1000, seed);
    run.push(
        CheckRecord::new(format!("{label}/lipschitz"), "retraction is Lipschitz with constant d+1", l.passed())
            .with("scale", d)
            .with("samples", l.samples)
            .with("bound", l.bound)
            .with("max_ratio", l.max_ratio)
            .with("violations", l.violations.len())
            .witnesses(l.errors.iter().cloned().chain(l.violations.iter().map(|v| serde_json::to_string(v).expect("serializable")))),
    );
}

fn algebra_checks(n: usize, seed: u64, run: &mut Run) {
    let space = SupportSpace::grid(3, 4);
    let rows: Vec<Result<(), String>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let inst = random_factorization(&mut stream(seed ^ 0xa1, i as u64), &space, 6, 3);
            let gained = regain_control(&inst.phi, &inst.psi, &inst.chi).map_err(|e| format!("instance {i}: {e}"))?;
            let composed = gained.compose().map_err(|e| format!("instance {i}: {e}"))?;
            if composed != inst.phi {
                return Err(format!("instance {i}: rewired composite differs at {:?}", composed.first_difference(&inst.phi)));
            }
            let b = control_bounds(&space, &inst.phi, &inst.psi, &inst.chi, &gained);
            if !b.holds {
                return Err(format!("instance {i}: bounds {b:?}"));
            }
            Ok(())
        })
        .collect();
    let failures: Vec<String> = rows.into_iter().filter_map(Result::err).collect();
    run.push(
        CheckRecord::new("algebra/gaining_control", "rewired factorization is exact with the four control bounds", failures.is_empty())
            .with("instances", n)
            .with("failures", failures.len())
            .witnesses(failures),
    );
    let rows: Vec<(bool, bool, String)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let inst = random_factorization(&mut stream(seed ^ 0xa2, i as u64), &space, 6, 2);
            let f = check_filtration(&space, &[inst.psi.clone(), inst.chi.clone(), inst.phi.clone()]);
            let sub = inst.phi.propagation(&space) <= inst.psi.propagation(&space) + inst.chi.propagation(&space);
            (sub, f.holds(), format!("instance {i}: {f:?}"))
        })
        .collect();
    let bad: Vec<String> = rows.iter().filter(|r| !(r.0 && r.1)).map(|r| r.2.clone()).collect();
    run.push(
        CheckRecord::new("algebra/composition", "propagation is subadditive under composition and filters morphisms", bad.is_empty())
            .with("instances", n)
            .with("failures", bad.len())
            .witnesses(bad),
    );
    let m = (2 * n).div_ceil(5);
    let rows: Vec<Result<usize, String>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let (sp, inst) = random_excision_instance(&mut stream(seed ^ 0xa3, i as u64), 8);
            let r = verify_excision_rewiring(&sp, &inst.phi, &inst.psi, &inst.chi, EXCISION_RADIUS)
                .map_err(|e| format!("instance {i}: {e}"))?;
            if r.certified() {
                Ok(r.middle.len())
            } else {
                Err(format!("instance {i}: {}", json!(r)))
            }
        })
        .collect();
    let middles: usize = rows.iter().filter_map(|r| r.as_ref().ok()).sum();
    let bad: Vec<String> = rows.into_iter().filter_map(Result::err).collect();
    run.push(
        CheckRecord::new("algebra/excision", "rewired middle object lies over the intersection", bad.is_empty())
            .with("instances", m)
            .with("middle_indices", middles)
            .with("failures", bad.len())
            .witnesses(bad),
    );
}

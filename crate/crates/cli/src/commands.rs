use std::path::Path;

use serde::Serialize;

use gptkit::bell::{self, BellError, Correlators, ExactBehavior, SignalingViolation};
use gptkit::compose::{ComposeError, JointSystem, NestingReport, TensorRule};
use gptkit::geometry::DdOptions;
use gptkit::io::{self, IoError, JointStateDoc, JointSystemDoc, MeasurementsDoc};
use gptkit::linalg::{sub, Vector};
use gptkit::models::{self, ModelError, NumericSystemSpec, Qubit};
use gptkit::tablecore::{reduce_pipeline, CoordRep, Dependency, RawTable, Redundancy, TableError};
use gptkit::theory::{
    check_no_restriction, compute_emax, effect_leq, effect_norm, joint_measurability_matrix, state_norm, validate_system,
    GptSystem, Measurement, NoRestriction, SystemSpec, TheoryError, Violation,
};
use gptkit::Scalar;

use crate::manifest::RunManifest;

const EXIT_OTHER: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_PARSE: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn other(e: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_OTHER, message: e.to_string() }
    }

    fn validation(e: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_VALIDATION, message: e.to_string() }
    }

    fn parse(e: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_PARSE, message: e.to_string() }
    }
}

impl From<TableError> for Failure {
    fn from(e: TableError) -> Self {
        match e {
            TableError::Shape { .. } | TableError::Parse { .. } | TableError::Csv(_) | TableError::EmptyTable => Failure::parse(e),
            TableError::OutOfRange { .. } => Failure::validation(e),
            _ => Failure::other(e),
        }
    }
}

impl From<TheoryError> for Failure {
    fn from(e: TheoryError) -> Self {
        match e {
            TheoryError::Geometry(_) => Failure::other(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<ComposeError> for Failure {
    fn from(e: ComposeError) -> Self {
        match e {
            ComposeError::Theory(t) => t.into(),
            ComposeError::RestrictedSubsystem { .. }
            | ComposeError::DimensionMismatch { .. }
            | ComposeError::InvalidExplicitCone(_) => Failure::validation(e),
            _ => Failure::other(e),
        }
    }
}

impl From<BellError> for Failure {
    fn from(e: BellError) -> Self {
        match e {
            BellError::Compose(c) => c.into(),
            BellError::Csv { .. } => Failure::parse(e),
            BellError::IncompleteMeasurement(_) | BellError::InvalidBehavior(_) | BellError::UnboundedCone => {
                Failure::validation(e)
            }
            _ => Failure::other(e),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Json { .. } | IoError::RaggedMatrix => Failure::parse(e),
            IoError::MissingCone => Failure::validation(e),
            IoError::Theory(t) => t.into(),
            IoError::Compose(c) => c.into(),
            IoError::Bell(b) => b.into(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Theory(t) => t.into(),
            _ => Failure::other(e),
        }
    }
}

fn read(path: &Path, manifest: &mut RunManifest) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
    manifest.input(path, &bytes);
    String::from_utf8(bytes).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn write(out: &Path, name: &str, contents: &str, manifest: &mut RunManifest) -> Result<(), Failure> {
    std::fs::write(out.join(name), contents).map_err(|e| Failure::other(format!("{name}: {e}")))?;
    manifest.output(name, contents.as_bytes());
    Ok(())
}

fn finish(out: &Path, manifest: &RunManifest) -> Result<(), Failure> {
    std::fs::write(out.join("manifest.json"), io::to_json(manifest)).map_err(Failure::other)
}

#[derive(Serialize)]
struct ReduceReport {
    rank: usize,
    merged_effects: Vec<Vec<String>>,
    merged_states: Vec<Vec<String>>,
    redundant: Vec<Redundancy>,
    extremal_effects: Vec<String>,
    extremal_states: Vec<String>,
    effect_dependencies: Vec<Dependency>,
    state_dependencies: Vec<Dependency>,
}

pub fn reduce(out: &Path, table: &Path) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("reduce");
    let text = read(table, &mut manifest)?;
    let raw = RawTable::from_csv_str(&text)?;
    let r = reduce_pipeline(&raw)?;
    let merged = |classes: &[Vec<String>]| classes.iter().filter(|c| c.len() > 1).cloned().collect();
    let report = ReduceReport {
        rank: r.rank,
        merged_effects: merged(r.merged.effect_classes()),
        merged_states: merged(r.merged.state_classes()),
        redundant: r.redundant.clone(),
        extremal_effects: r.extremal.effect_labels(),
        extremal_states: r.extremal.state_labels(),
        effect_dependencies: r.coords.effect_dependencies(),
        state_dependencies: r.coords.state_dependencies(),
    };
    write(out, "coordrep.json", &io::to_json::<CoordRep>(&r.coords), &mut manifest)?;
    write(out, "reduce_report.json", &io::to_json(&report), &mut manifest)?;
    finish(out, &manifest)
}

pub struct AnalyzeOptions {
    pub enumerate: bool,
    pub emax_threshold: usize,
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub samples: usize,
}

#[derive(Serialize)]
struct Norm {
    vector: Vector,
    norm: Scalar,
}

#[derive(Serialize)]
struct Emax {
    enumerated: bool,
    vertices: Option<Vec<Vector>>,
}

#[derive(Serialize)]
struct JointMeasurabilityMatrix {
    effects: Vec<Vector>,
    matrix: Vec<Vec<bool>>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    name: String,
    dim: usize,
    valid: bool,
    violations: Vec<Violation>,
    messages: Vec<String>,
    state_norms: Vec<Norm>,
    effect_norms: Vec<Norm>,
    emax: Option<Emax>,
    no_restriction: Option<NoRestriction>,
    joint_measurability: Option<JointMeasurabilityMatrix>,
    /// Effects in the order used by `hasse_edges`.
    effects: Vec<Vector>,
    /// `[i, j]` when `effects[j]` covers `effects[i]`.
    hasse_edges: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct NumericReport {
    name: String,
    numeric: bool,
    tolerance: f64,
    seed: u64,
    samples: usize,
    states_valid: bool,
    identifying_effects_valid: bool,
    self_dual_violations: usize,
}

fn hasse_edges(sys: &GptSystem, effects: &[Vector]) -> Vec<[usize; 2]> {
    let n = effects.len();
    let leq: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| i != j && effect_leq(sys, &effects[i], &effects[j])).collect()).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if leq[i][j] && !(0..n).any(|k| leq[i][k] && leq[k][j]) {
                edges.push([i, j]);
            }
        }
    }
    edges
}

fn analyze_numeric(spec: &NumericSystemSpec, opts: &AnalyzeOptions) -> NumericReport {
    let qubit = Qubit::new(opts.tolerance.unwrap_or(spec.tolerance));
    let states = qubit.sample_pure_states(opts.samples, opts.seed);
    let states_valid = states.iter().all(|s| qubit.is_normalized_state(s));
    let identifying_effects_valid = states.iter().all(|s| {
        let e = Qubit::identifying_effect(s);
        qubit.is_effect(&e) && (Qubit::pairing(&e, s) - 1.0).abs() <= qubit.tolerance
    });
    // A ray of the state cone read as an effect must be non-negative on every sampled state.
    let self_dual_violations = states
        .iter()
        .filter(|r| states.iter().any(|s| Qubit::pairing(r, s) < -qubit.tolerance))
        .count();
    NumericReport {
        name: spec.name.clone(),
        numeric: true,
        tolerance: qubit.tolerance,
        seed: opts.seed,
        samples: opts.samples,
        states_valid,
        identifying_effects_valid,
        self_dual_violations,
    }
}

pub fn analyze(out: &Path, path: &Path, opts: &AnalyzeOptions) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("analyze");
    let text = read(path, &mut manifest)?;
    let value: serde_json::Value = io::parse_json(&text)?;
    if value.get("numeric").and_then(serde_json::Value::as_bool) == Some(true) {
        let spec: NumericSystemSpec = io::parse_json(&text)?;
        manifest.option("tolerance", opts.tolerance.unwrap_or(spec.tolerance));
        manifest.option("seed", opts.seed);
        manifest.option("samples", opts.samples);
        let report = analyze_numeric(&spec, opts);
        let ok = report.states_valid && report.identifying_effects_valid && report.self_dual_violations == 0;
        write(out, "analysis.json", &io::to_json(&report), &mut manifest)?;
        finish(out, &manifest)?;
        return if ok { Ok(()) } else { Err(Failure::validation("numeric system failed its sampled checks")) };
    }
    manifest.option("enumerate", opts.enumerate);
    manifest.option("emax_threshold", opts.emax_threshold);
    let spec: SystemSpec = io::parse_json(&text)?;
    let sys = GptSystem::from_spec(&spec)?;
    let validation = validate_system(&sys)?;
    let messages: Vec<String> = validation.violations.iter().map(ToString::to_string).collect();
    let mut report = AnalyzeReport {
        name: sys.name().to_string(),
        dim: sys.dim(),
        valid: validation.is_valid(),
        violations: validation.violations.clone(),
        messages: messages.clone(),
        state_norms: Vec::new(),
        effect_norms: Vec::new(),
        emax: None,
        no_restriction: None,
        joint_measurability: None,
        effects: sys.effects().to_vec(),
        hasse_edges: Vec::new(),
    };
    if !validation.is_valid() {
        write(out, "analysis.json", &io::to_json(&report), &mut manifest)?;
        finish(out, &manifest)?;
        return Err(Failure::validation(format!("invalid system: {}", messages.join("; "))));
    }
    if opts.enumerate || sys.dim() * sys.states().len() <= opts.emax_threshold {
        report.emax = Some(Emax { enumerated: true, vertices: Some(compute_emax(&sys)?.vertices().to_vec()) });
        report.no_restriction = Some(check_no_restriction(&sys)?);
    } else {
        report.emax = Some(Emax { enumerated: false, vertices: None });
    }
    let nontrivial = sys.nontrivial_effects();
    let matrix = joint_measurability_matrix(&sys, &nontrivial)?;
    report.joint_measurability = Some(JointMeasurabilityMatrix { effects: nontrivial, matrix });
    report.state_norms = sys
        .states()
        .iter()
        .map(|w| Ok(Norm { vector: w.clone(), norm: state_norm(&sys, w)? }))
        .collect::<Result<_, TheoryError>>()?;
    report.effect_norms = report
        .effects
        .iter()
        .map(|e| Ok(Norm { vector: e.clone(), norm: effect_norm(&sys, e)? }))
        .collect::<Result<_, TheoryError>>()?;
    report.hasse_edges = hasse_edges(&sys, &report.effects);
    write(out, "analysis.json", &io::to_json(&report), &mut manifest)?;
    finish(out, &manifest)
}

fn load_system(path: &Path, manifest: &mut RunManifest) -> Result<GptSystem, Failure> {
    let spec: SystemSpec = io::parse_json(&read(path, manifest)?)?;
    Ok(GptSystem::from_spec(&spec)?)
}

pub fn compose(
    out: &Path,
    left: &Path,
    right: &Path,
    rule: &str,
    enumerate: bool,
    limit: usize,
    max_rays: usize,
) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("compose");
    let rule: TensorRule = rule.parse().map_err(Failure::parse)?;
    if rule == TensorRule::Explicit {
        return Err(Failure::parse("the explicit rule needs a joint system document, not two subsystems"));
    }
    manifest.option("rule", rule);
    manifest.option("enumerate", enumerate);
    manifest.option("limit", limit);
    manifest.option("max_rays", max_rays);
    let l = load_system(left, &mut manifest)?;
    let r = load_system(right, &mut manifest)?;
    let sys = JointSystem::compose(&l, &r, rule)?;
    let opts = DdOptions { max_rays, ..DdOptions::default() };
    let doc = JointSystemDoc::from_joint(&sys, enumerate.then_some((limit, &opts)), true)?;
    let stamp: &NestingReport = doc.nesting.as_ref().expect("nesting requested");
    if !(stamp.min_included && stamp.within_genmax) {
        write(out, "joint.json", &io::to_json(&doc), &mut manifest)?;
        finish(out, &manifest)?;
        return Err(Failure::validation("joint state cone violates min ⊆ cone ⊆ genmax"));
    }
    write(out, "joint.json", &io::to_json(&doc), &mut manifest)?;
    finish(out, &manifest)
}

#[derive(Serialize)]
struct BehaviorEntry {
    a: usize,
    b: usize,
    x: usize,
    y: usize,
    p: Scalar,
}

#[derive(Serialize)]
struct ChshCliReport {
    #[serde(rename = "S")]
    s: Scalar,
    correlators: Correlators<Scalar>,
    no_signaling: bool,
    signaling_violations: Vec<SignalingViolation>,
    maximized: bool,
    state: Vec<Vector>,
    behavior: Vec<BehaviorEntry>,
}

fn entries(b: &ExactBehavior) -> Vec<BehaviorEntry> {
    let mut out = Vec::with_capacity(16);
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for bb in 0..2 {
                    out.push(BehaviorEntry { a, b: bb, x, y, p: b.p(a, bb, x, y).clone() });
                }
            }
        }
    }
    out
}

pub fn chsh(out: &Path, joint: &Path, measurements: &Path, state: Option<&Path>, maximize: bool) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("chsh");
    manifest.option("maximize", maximize);
    let doc: JointSystemDoc = io::parse_json(&read(joint, &mut manifest)?)?;
    let sys = doc.to_joint()?;
    let settings: MeasurementsDoc = io::parse_json(&read(measurements, &mut manifest)?)?;
    let (alice, bob) = settings.settings();
    let (w, behavior) = if maximize {
        let opt = bell::max_chsh(&sys, &alice, &bob)?;
        (opt.state, opt.behavior)
    } else {
        let path = state.expect("clap requires --state without --maximize");
        let w = io::parse_json::<JointStateDoc>(&read(path, &mut manifest)?)?.matrix()?;
        if !sys.contains_state(&w)? {
            return Err(Failure::validation("supplied state lies outside the joint state cone"));
        }
        let b = bell::behavior_from(&sys, &w, &alice, &bob)?;
        (w, b)
    };
    let ns = bell::no_signaling_check(&behavior);
    let report = ChshCliReport {
        s: bell::chsh(&behavior),
        correlators: behavior.correlators(),
        no_signaling: ns.passes(),
        signaling_violations: ns.violations,
        maximized: maximize,
        state: w.row_vectors(),
        behavior: entries(&behavior),
    };
    write(out, "chsh_report.json", &io::to_json(&report), &mut manifest)?;
    write(out, "behavior.csv", &behavior.to_csv(), &mut manifest)?;
    finish(out, &manifest)
}

fn binary_pair(sys: &GptSystem, e: &Vector) -> Measurement {
    Measurement { effects: vec![e.clone(), sub(sys.unit(), e)], complete: true }
}

fn parse_size(model: &str, prefix: &str) -> Result<Option<usize>, Failure> {
    match model.strip_prefix(prefix) {
        Some(n) => n.parse().map(Some).map_err(|_| Failure::parse(format!("bad size in {model:?}"))),
        None => Ok(None),
    }
}

const TABLE1: &str = "\
,e1,e2,e3,e4,e5
w1,1,0,1,1,1
w2,1/2,0,1,2/3,3/4
w3,1/2,1/2,1,1/3,3/4
w4,0,1/2,1,0,1/2
";

pub fn export(out: &Path, model: &str, tolerance: Option<f64>) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("export");
    manifest.option("model", model);
    let file = model.replace(':', "");
    let (name, contents) = if let Some(k) = parse_size(model, "classical:")? {
        (format!("{file}.json"), io::to_json(&models::classical(k)?.to_spec()))
    } else if let Some(k) = parse_size(model, "polygon:")? {
        (format!("{file}.json"), io::to_json(&models::polygon(k)?.to_spec()))
    } else {
        match model {
            "gbit" => ("gbit.json".into(), io::to_json(&models::gbit().to_spec())),
            "restricted-gbit" => {
                let g = models::gbit();
                let sys = g.with_effects(&[models::gbit_effects()[0].clone()])?.renamed("restricted-gbit");
                ("restricted-gbit.json".into(), io::to_json(&sys.to_spec()))
            }
            "holevo" => ("holevo.json".into(), io::to_json(&models::holevo_restricted()?.system.to_spec())),
            "qubit" => {
                let q = tolerance.map_or_else(Qubit::default, Qubit::new);
                manifest.option("tolerance", q.tolerance);
                ("qubit.json".into(), io::to_json(&q.spec()))
            }
            "boxworld" => {
                let g = models::gbit();
                let sys = gptkit::compose::max_tensor(&g, &g)?;
                let doc = JointSystemDoc::from_joint(&sys, None, false)?;
                ("boxworld.json".into(), io::to_json(&doc))
            }
            "gbit-measurements" => {
                let g = models::gbit();
                let e = models::gbit_effects();
                let m = [binary_pair(&g, &e[0]), binary_pair(&g, &e[1])];
                ("gbit-measurements.json".into(), io::to_json(&MeasurementsDoc::new(&m, &m)))
            }
            "classical-measurements" => {
                let c = models::classical(2)?;
                let m = binary_pair(&c, &vec![Scalar::one(), Scalar::zero()]);
                let pair = [m.clone(), m];
                ("classical-measurements.json".into(), io::to_json(&MeasurementsDoc::new(&pair, &pair)))
            }
            "pr-box" => ("pr-box.csv".into(), bell::pr_box().to_csv()),
            "table1" => ("table1.csv".into(), TABLE1.to_string()),
            _ => return Err(Failure::parse(format!("unknown model {model:?}"))),
        }
    };
    write(out, &name, &contents, &mut manifest)?;
    finish(out, &manifest)
}

//! Scenario runners and deterministic report emission.
//!
//! Reports carry every quantity in both a structured (JSON) and a text
//! rendering. Floats are rounded to 12 significant digits before
//! serialization so that identical inputs produce byte-identical output
//! and re-serializing a loaded report reproduces it exactly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::analysis::{
    bell_singlet, concurrence, entanglement_of_formation, expectation_decomposition,
    joint_weak_values, weak_value_table, PathProjector, PrePostEnsemble, WeakValueReport,
};
use crate::error::{Error, Result};
use crate::fock::{Amplitude, PureState};
use crate::network::{
    mirrors_variant, staged_evolution, NetworkDescription, StagedEvolution,
};
use crate::postselect::{
    measure_photon2, no_crossing_filter, to_register, two_photon_baseline_on, BaselineReport,
    LetterState, OutcomeTable, RegisterState,
};

/// Tolerance for values pinned analytically.
pub const TOL_VALUE: f64 = 1e-9;
/// Tolerance for amplitudes that must cancel exactly.
pub const TOL_CANCELLATION: f64 = 1e-12;
/// Tolerance against coarsely rounded reference numbers.
pub const TOL_ROUNDED_REFERENCE: f64 = 5e-3;

/// Version stamped into every structured report.
pub const SCHEMA_VERSION: u32 = 1;

/// The scenarios the runner knows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Protocol,
    Baseline,
    WeakValues,
    JointWeakValues,
    Decomposition,
    MirrorsVariant,
    FullReport,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Protocol,
        Scenario::Baseline,
        Scenario::WeakValues,
        Scenario::JointWeakValues,
        Scenario::Decomposition,
        Scenario::MirrorsVariant,
        Scenario::FullReport,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Protocol => "protocol",
            Scenario::Baseline => "baseline",
            Scenario::WeakValues => "weak-values",
            Scenario::JointWeakValues => "joint-weak-values",
            Scenario::Decomposition => "decomposition",
            Scenario::MirrorsVariant => "mirrors-variant",
            Scenario::FullReport => "full-report",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .iter()
            .find(|sc| sc.name() == s)
            .copied()
            .ok_or_else(|| {
                Error::Contract(format!(
                    "unknown scenario `{s}`; expected one of: {}",
                    Scenario::ALL
                        .iter()
                        .map(Scenario::name)
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }
}

// ---------------------------------------------------------------------------
// Scenario computations
// ---------------------------------------------------------------------------

/// Everything the main protocol run produces.
#[derive(Clone, Debug)]
pub struct ProtocolData {
    pub staged: StagedEvolution,
    /// Normalized state after the no-crossing filter.
    pub filtered: PureState,
    /// Probability of the one-photon-per-apparatus event.
    pub event_probability: f64,
    /// Squared overlap of the filtered state with the post-primary state.
    pub overlap_probability: f64,
    pub register: RegisterState,
    pub outcomes: OutcomeTable,
    /// Pre/post ensembles for the two detector outcomes, in table order.
    pub ensembles: Vec<PrePostEnsemble>,
}

fn stage_state<'a>(staged: &'a StagedEvolution, name: &str) -> Result<&'a PureState> {
    staged
        .after(name)
        .ok_or_else(|| Error::Contract(format!("network has no stage named `{name}`")))
}

/// Run the full protocol: staged evolution, no-crossing filter, register
/// mapping, detector measurement of the middle photon, and the pre/post
/// ensembles for the two outcomes.
pub fn compute_protocol(net: &NetworkDescription) -> Result<ProtocolData> {
    let staged = staged_evolution(net)?;
    let primary = stage_state(&staged, "primary")?;
    let secondary = stage_state(&staged, "secondary")?;
    let (filtered, event_probability) =
        no_crossing_filter(secondary, net.partition()).map_err(|e| e.in_stage("secondary"))?;
    let overlap_probability = filtered.inner(primary)?.norm_sqr();
    let register = to_register(&filtered, net.partition())?;
    let outcomes = measure_photon2(&register)?;
    let mut ensembles = Vec::new();
    for detector in [LetterState::detector_d1(), LetterState::detector_d2()] {
        let label = detector.label().to_string();
        let (post, _) = register.project_photon(1, &detector)?;
        ensembles.push(PrePostEnsemble::new(label, register.clone(), post)?);
    }
    Ok(ProtocolData {
        staged,
        filtered,
        event_probability,
        overlap_probability,
        register,
        outcomes,
        ensembles,
    })
}

/// Baseline (middle apparatus empty) against the disturbed probabilities
/// of the full arrangement, rail by rail.
#[derive(Clone, Debug)]
pub struct BaselineComparison {
    pub baseline: BaselineReport,
    /// `(rail, probability without the mediator, probability with it)`.
    pub pairs: Vec<(String, f64, f64)>,
}

pub fn compute_baseline_comparison(net: &NetworkDescription) -> Result<BaselineComparison> {
    let groups = net.partition().groups();
    if groups.len() != 3 {
        return Err(Error::Contract(format!(
            "baseline comparison needs a three-apparatus network, got {} groups",
            groups.len()
        )));
    }
    let middle = groups[1].name.clone();
    let baseline = two_photon_baseline_on(net, &middle)?;
    let protocol = compute_protocol(net)?;
    let mut pairs = Vec::new();
    for photon in [0usize, 2] {
        let (p_a, p_b) = protocol.register.marginal(photon)?;
        let rails = &groups[photon].rails;
        for (rail, disturbed) in rails.iter().zip([p_a, p_b]) {
            let without = baseline.marginal(rail.as_str()).ok_or_else(|| {
                Error::Contract(format!("baseline has no marginal for rail `{rail}`"))
            })?;
            pairs.push((rail.to_string(), without, disturbed));
        }
    }
    Ok(BaselineComparison { baseline, pairs })
}

/// The secondary stage with its beam splitters replaced by mirrors, against
/// the phase-shifted post-primary state.
#[derive(Clone, Debug)]
pub struct MirrorsVariantData {
    pub post_secondary: PureState,
    /// `−i ×` post-primary state: what six pure reflections produce.
    pub reference: PureState,
    pub max_deviation: f64,
    pub matches: bool,
}

pub fn compute_mirrors_variant(net: &NetworkDescription) -> Result<MirrorsVariantData> {
    let variant = mirrors_variant(net, "secondary")?;
    let staged = staged_evolution(&variant)?;
    let primary = stage_state(&staged, "primary")?;
    let post_secondary = stage_state(&staged, "secondary")?.clone();
    let reference = primary.scaled(Amplitude::new(0.0, -1.0));
    let max_deviation = post_secondary.max_deviation(&reference)?;
    Ok(MirrorsVariantData {
        post_secondary,
        reference,
        matches: max_deviation <= TOL_VALUE,
        max_deviation,
    })
}

/// Weak-value tables (single and joint) for both detector ensembles.
#[derive(Clone, Debug)]
pub struct WeakValueData {
    pub singles: Vec<WeakValueReport>,
    pub joints: Vec<WeakValueReport>,
}

pub fn compute_weak_values(net: &NetworkDescription) -> Result<WeakValueData> {
    let protocol = compute_protocol(net)?;
    let mut singles = Vec::new();
    let mut joints = Vec::new();
    for ensemble in &protocol.ensembles {
        singles.push(weak_value_table(ensemble)?);
        joints.push(joint_weak_values(ensemble)?);
    }
    Ok(WeakValueData { singles, joints })
}

/// The weak-value decomposition rows for every single and joint projector.
#[derive(Clone, Debug)]
pub struct DecompositionData {
    /// `(outcome label, probability)` of the postselection set.
    pub outcomes: Vec<(String, f64)>,
    /// `(projector, expectation, probability-weighted weak values)`.
    pub rows: Vec<(PathProjector, f64, f64)>,
}

pub fn compute_decomposition(net: &NetworkDescription) -> Result<DecompositionData> {
    let protocol = compute_protocol(net)?;
    let posts: Vec<(f64, RegisterState)> = protocol
        .ensembles
        .iter()
        .map(|e| Ok((e.postselection_probability()?, e.post.clone())))
        .collect::<Result<_>>()?;
    let outcomes = protocol
        .ensembles
        .iter()
        .zip(&posts)
        .map(|(e, (p, _))| (e.label.clone(), *p))
        .collect();
    let photons = protocol.register.photons();
    let mut rows = Vec::new();
    for projector in PathProjector::all_singles(photons)
        .into_iter()
        .chain(PathProjector::all_joint(photons))
    {
        let (lhs, rhs) = expectation_decomposition(&protocol.register, &posts, &projector)?;
        rows.push((projector, lhs, rhs));
    }
    Ok(DecompositionData { outcomes, rows })
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

/// A deterministic, versioned report of one scenario run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub network: NetworkFingerprint,
    pub tolerances: std::collections::BTreeMap<String, f64>,
    pub quantities: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NetworkFingerprint {
    pub rails: Vec<String>,
    pub element_digest: String,
}

/// Round to 12 significant digits; fixes the float formatting of reports.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 {
        // Avoid the "-0" rendering so reports stay diffable.
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("rounded float reparses")
}

fn jnum(x: f64) -> Value {
    json!(round12(x))
}

fn jcomplex(c: Amplitude) -> Value {
    json!({ "im": jnum(c.im), "re": jnum(c.re) })
}

fn jstate(s: &PureState) -> Value {
    Value::Array(
        s.terms()
            .map(|(basis, amp)| {
                json!({
                    "basis": basis.label(s.rails()),
                    "im": jnum(amp.im),
                    "re": jnum(amp.re),
                })
            })
            .collect(),
    )
}

fn jregister(r: &RegisterState) -> Value {
    Value::Array(
        r.terms()
            .map(|(word, amp)| {
                json!({
                    "im": jnum(amp.im),
                    "re": jnum(amp.re),
                    "word": word.to_string(),
                })
            })
            .collect(),
    )
}

fn jweak_table(report: &WeakValueReport) -> Value {
    let mut map = Map::new();
    for entry in &report.entries {
        map.insert(entry.projector.label(), jcomplex(entry.value));
    }
    Value::Object(map)
}

fn quantities_protocol(data: &ProtocolData) -> Result<Value> {
    let mut stages = Map::new();
    for (name, state) in &data.staged.snapshots {
        stages.insert(
            name.clone(),
            json!({ "term_count": state.term_count(), "terms": jstate(state) }),
        );
    }
    let mut detection = Map::new();
    for row in &data.outcomes.rows {
        let mut entry = Map::new();
        entry.insert("probability".to_string(), jnum(row.probability));
        if let Some(conditional) = &row.conditional {
            entry.insert("conditional".to_string(), jregister(conditional));
            if conditional.photons() == 2 {
                let c = concurrence(conditional)?;
                entry.insert("concurrence".to_string(), jnum(c));
                entry.insert(
                    "entanglement_of_formation".to_string(),
                    jnum(entanglement_of_formation(c)?),
                );
                entry.insert(
                    "overlap_with_singlet".to_string(),
                    jnum(conditional.overlap_magnitude(&bell_singlet())?),
                );
            }
        }
        detection.insert(row.label.clone(), Value::Object(entry));
    }
    Ok(json!({
        "detection": Value::Object(detection),
        "filtered": {
            "event_probability": jnum(data.event_probability),
            "overlap_probability": jnum(data.overlap_probability),
            "terms": jstate(&data.filtered),
        },
        "register": jregister(&data.register),
        "source": { "terms": jstate(&data.staged.source) },
        "stages": Value::Object(stages),
    }))
}

fn quantities_baseline(data: &BaselineComparison) -> Value {
    let mut apparatuses = Map::new();
    for (name, conditional, probability) in &data.baseline.singles {
        apparatuses.insert(
            name.clone(),
            json!({
                "conditional": jstate(conditional),
                "stay_probability": jnum(*probability),
            }),
        );
    }
    apparatuses.insert(
        "joint".to_string(),
        json!({
            "probability": jnum(data.baseline.joint_probability),
            "terms": jstate(&data.baseline.joint),
        }),
    );
    let mut comparison = Map::new();
    for (rail, without, with) in &data.pairs {
        comparison.insert(
            rail.clone(),
            json!({
                "difference": jnum(with - without),
                "with_mediator": jnum(*with),
                "without_mediator": jnum(*without),
            }),
        );
    }
    json!({
        "comparison": Value::Object(comparison),
        "two_photon_baseline": Value::Object(apparatuses),
    })
}

fn quantities_weak_values(data: &WeakValueData) -> Value {
    let mut by_outcome = Map::new();
    for table in &data.singles {
        by_outcome.insert(
            table.ensemble.clone(),
            json!({
                "postselection_probability": jnum(table.postselection_probability),
                "single": jweak_table(table),
            }),
        );
    }
    Value::Object(by_outcome)
}

fn quantities_joint_weak_values(data: &WeakValueData) -> Value {
    let mut by_outcome = Map::new();
    for table in &data.joints {
        by_outcome.insert(
            table.ensemble.clone(),
            json!({
                "joint": jweak_table(table),
                "postselection_probability": jnum(table.postselection_probability),
            }),
        );
    }
    Value::Object(by_outcome)
}

fn quantities_decomposition(data: &DecompositionData) -> Value {
    let mut outcomes = Map::new();
    for (label, probability) in &data.outcomes {
        outcomes.insert(label.clone(), jnum(*probability));
    }
    let mut projectors = Map::new();
    for (projector, lhs, rhs) in &data.rows {
        projectors.insert(
            projector.label(),
            json!({
                "difference": jnum((lhs - rhs).abs()),
                "expectation": jnum(*lhs),
                "weighted_weak_values": jnum(*rhs),
            }),
        );
    }
    json!({
        "outcome_probabilities": Value::Object(outcomes),
        "projectors": Value::Object(projectors),
    })
}

fn quantities_mirrors(data: &MirrorsVariantData) -> Value {
    json!({
        "expected_phase": jcomplex(Amplitude::new(0.0, -1.0)),
        "matches_phase_shifted_input": data.matches,
        "max_deviation": jnum(data.max_deviation),
        "post_secondary": jstate(&data.post_secondary),
        "reference": jstate(&data.reference),
    })
}

fn scenario_quantities(scenario: Scenario, net: &NetworkDescription) -> Result<Value> {
    match scenario {
        Scenario::Protocol => quantities_protocol(&compute_protocol(net)?),
        Scenario::Baseline => Ok(quantities_baseline(&compute_baseline_comparison(net)?)),
        Scenario::WeakValues => Ok(quantities_weak_values(&compute_weak_values(net)?)),
        Scenario::JointWeakValues => {
            Ok(quantities_joint_weak_values(&compute_weak_values(net)?))
        }
        Scenario::Decomposition => Ok(quantities_decomposition(&compute_decomposition(net)?)),
        Scenario::MirrorsVariant => Ok(quantities_mirrors(&compute_mirrors_variant(net)?)),
        Scenario::FullReport => {
            let mut all = Map::new();
            for s in Scenario::ALL {
                if s != Scenario::FullReport {
                    all.insert(s.name().to_string(), scenario_quantities(s, net)?);
                }
            }
            Ok(Value::Object(all))
        }
    }
}

/// Run a scenario against a network and assemble its report.
pub fn run_scenario(scenario: Scenario, net: &NetworkDescription) -> Result<Report> {
    let quantities =
        scenario_quantities(scenario, net).map_err(|e| e.in_scenario(scenario.name()))?;
    let tolerances = [
        ("cancellation".to_string(), TOL_CANCELLATION),
        ("rounded_reference".to_string(), TOL_ROUNDED_REFERENCE),
        ("value".to_string(), TOL_VALUE),
    ]
    .into_iter()
    .collect();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.name().to_string(),
        network: NetworkFingerprint {
            rails: net.rails().labels().iter().map(|l| l.to_string()).collect(),
            element_digest: net.element_digest(),
        },
        tolerances,
        quantities,
    })
}

impl Report {
    /// Structured rendering: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))
    }

    /// Every quantity as a `(path, rendered value)` pair, in deterministic
    /// order. The text format prints exactly these lines.
    pub fn flattened_quantities(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        flatten("quantities", &self.quantities, &mut out);
        out
    }

    /// Text rendering; carries the same quantity set as the JSON form.
    pub fn to_text(&self) -> String {
        let mut lines = Vec::new();
        lines.push(format!("scenario = {}", self.scenario));
        lines.push(format!("schema_version = {}", self.schema_version));
        lines.push(format!(
            "network.element_digest = \"{}\"",
            self.network.element_digest
        ));
        lines.push(format!(
            "network.rails = [{}]",
            self.network
                .rails
                .iter()
                .map(|r| format!("\"{r}\""))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        for (name, tol) in &self.tolerances {
            lines.push(format!("tolerances.{name} = {}", json!(tol)));
        }
        for (path, value) in self.flattened_quantities() {
            lines.push(format!("{path} = {value}"));
        }
        lines.push(String::new());
        lines.join("\n")
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                flatten(&format!("{prefix}.{key}"), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        leaf => out.push((prefix.to_string(), leaf.to_string())),
    }
}

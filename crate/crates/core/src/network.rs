//! Network construction: the built-in triple Mach-Zehnder arrangement,
//! staged evolution, and ingestion of user-supplied network documents.
//!
//! The document format is TOML. Field names are part of the public schema:
//! `rails` (ordered label list), `source` (occupation per rail), `stages`
//! (ordered element records), `partition` (ordered apparatus groups).
//! Stage names `primary` and `secondary` are what the scenario runners
//! look for.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elements::{
    apply_element, BeamSplitter, Element, ElementSequence, Mirror, PortRouting, Stage,
};
use crate::error::{Error, Result};
use crate::fock::{FockBasisState, PureState, RailId, RailSet};

/// One named apparatus: a subset of rails treated as a unit by the
/// no-crossing post-selection. Group order defines photon numbering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApparatusGroup {
    pub name: String,
    pub rails: Vec<RailId>,
}

/// Disjoint named rail groups jointly covering the whole rail set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApparatusPartition {
    groups: Vec<ApparatusGroup>,
}

impl ApparatusPartition {
    pub fn new(rails: &RailSet, groups: Vec<ApparatusGroup>) -> Result<Self> {
        let mut seen: Vec<&RailId> = Vec::new();
        for group in &groups {
            if groups
                .iter()
                .filter(|g| g.name == group.name)
                .count()
                > 1
            {
                return Err(Error::Description(format!(
                    "partition group `{}` is declared more than once",
                    group.name
                )));
            }
            for rail in &group.rails {
                if !rails.contains(rail) {
                    return Err(Error::UnknownRail(rail.to_string()));
                }
                if seen.contains(&rail) {
                    return Err(Error::Description(format!(
                        "rail `{rail}` appears in more than one partition group"
                    )));
                }
                seen.push(rail);
            }
        }
        if seen.len() != rails.len() {
            let missing: Vec<String> = rails
                .labels()
                .iter()
                .filter(|l| !seen.contains(l))
                .map(|l| l.to_string())
                .collect();
            return Err(Error::Description(format!(
                "partition does not cover rails: {}",
                missing.join(", ")
            )));
        }
        Ok(ApparatusPartition { groups })
    }

    pub fn groups(&self) -> &[ApparatusGroup] {
        &self.groups
    }

    pub fn group(&self, name: &str) -> Option<&ApparatusGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    /// Rail indices of every group within `rails`, in group order.
    pub fn resolve(&self, rails: &RailSet) -> Result<Vec<Vec<usize>>> {
        self.groups
            .iter()
            .map(|g| g.rails.iter().map(|r| rails.index_of(r)).collect())
            .collect()
    }

    /// Photon count per group for one basis term.
    pub fn group_counts(&self, rails: &RailSet, basis: &FockBasisState) -> Result<Vec<u32>> {
        let resolved = self.resolve(rails)?;
        Ok(resolved
            .iter()
            .map(|idxs| idxs.iter().map(|&i| u32::from(basis.occupation(i))).sum())
            .collect())
    }
}

/// A complete network: rails, source occupation, staged elements, and the
/// apparatus partition used by post-selection.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkDescription {
    rails: Arc<RailSet>,
    source: FockBasisState,
    sequence: ElementSequence,
    partition: ApparatusPartition,
}

impl NetworkDescription {
    pub fn new(
        rails: Arc<RailSet>,
        source: FockBasisState,
        sequence: ElementSequence,
        partition: ApparatusPartition,
    ) -> Result<Self> {
        if source.rail_count() != rails.len() {
            return Err(Error::Description(format!(
                "source declares {} occupations for {} rails",
                source.rail_count(),
                rails.len()
            )));
        }
        for (si, stage) in sequence.stages.iter().enumerate() {
            for (ei, element) in stage.elements.iter().enumerate() {
                for rail in element.rails() {
                    if !rails.contains(rail) {
                        return Err(Error::Description(format!(
                            "stages[{si}] `{}` element {ei}: unknown rail `{rail}`",
                            stage.name
                        )));
                    }
                }
            }
        }
        // Partition validity also checks rail coverage.
        let partition = ApparatusPartition::new(&rails, partition.groups.clone())?;
        Ok(NetworkDescription {
            rails,
            source,
            sequence,
            partition,
        })
    }

    pub fn rails(&self) -> &Arc<RailSet> {
        &self.rails
    }

    pub fn source(&self) -> &FockBasisState {
        &self.source
    }

    /// The source occupation as a normalized Fock basis state.
    pub fn source_state(&self) -> PureState {
        PureState::basis(self.rails.clone(), self.source.occupations())
            .expect("source length is validated at construction")
    }

    pub fn sequence(&self) -> &ElementSequence {
        &self.sequence
    }

    pub fn partition(&self) -> &ApparatusPartition {
        &self.partition
    }

    /// Short stable fingerprint of the rail list and element program
    /// (FNV-1a over a canonical encoding).
    pub fn element_digest(&self) -> String {
        let mut canonical = String::new();
        canonical.push_str("rails:");
        for l in self.rails.labels() {
            canonical.push_str(l.as_str());
            canonical.push(',');
        }
        for stage in &self.sequence.stages {
            canonical.push_str(";stage:");
            canonical.push_str(&stage.name);
            for element in &stage.elements {
                match element {
                    Element::BeamSplitter(bs) => {
                        canonical.push_str(&format!(
                            ";bs:{},{},{},{},{},{}",
                            bs.in_a(),
                            bs.in_b(),
                            bs.routing_a().transmit,
                            bs.routing_a().reflect,
                            bs.routing_b().transmit,
                            bs.routing_b().reflect,
                        ));
                    }
                    Element::Mirror(m) => {
                        canonical.push_str(&format!(";mirror:{}", m.rail()));
                    }
                }
            }
        }
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in canonical.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

/// The snapshot of the state after every named stage.
#[derive(Clone, Debug)]
pub struct StagedEvolution {
    pub source: PureState,
    pub snapshots: Vec<(String, PureState)>,
}

impl StagedEvolution {
    /// State after the named stage.
    pub fn after(&self, stage: &str) -> Option<&PureState> {
        self.snapshots
            .iter()
            .find(|(name, _)| name == stage)
            .map(|(_, s)| s)
    }

    /// State after the last stage.
    pub fn final_state(&self) -> &PureState {
        self.snapshots
            .last()
            .map(|(_, s)| s)
            .unwrap_or(&self.source)
    }
}

/// Evolve the source through every stage, recording a snapshot per stage.
pub fn staged_evolution(net: &NetworkDescription) -> Result<StagedEvolution> {
    let source = net.source_state();
    let mut state = source.clone();
    let mut snapshots = Vec::new();
    for stage in &net.sequence().stages {
        for element in &stage.elements {
            state = apply_element(element, &state).map_err(|e| e.in_stage(&stage.name))?;
        }
        snapshots.push((stage.name.clone(), state.clone()));
    }
    Ok(StagedEvolution { source, snapshots })
}

/// Built-in three-interferometer network: three photons enter three
/// Mach-Zehnder-like apparatuses whose arms are coupled by two shared
/// central beam splitters; the outer arms carry plain mirrors.
///
/// Primary stage: one `straight` splitter per apparatus, so the
/// transmitted component of photon k stays on rail `Ak` and the reflected
/// component occupies `Bk`. Secondary stage: `cross` splitters on
/// `(A1, A2)` and `(B2, A3)`, so reflection keeps a photon inside its own
/// apparatus and transmission crosses into the neighbor, plus mirrors on
/// `B1` and `B3`.
pub fn build_triple_mz() -> NetworkDescription {
    let rails = RailSet::new(["A1", "B1", "A2", "B2", "A3", "B3"]).expect("labels are unique");
    let source = FockBasisState::new(vec![1, 0, 1, 0, 1, 0]);
    let sequence = ElementSequence::new(vec![
        Stage {
            name: "primary".to_string(),
            elements: vec![
                Element::BeamSplitter(BeamSplitter::straight("A1", "B1")),
                Element::BeamSplitter(BeamSplitter::straight("A2", "B2")),
                Element::BeamSplitter(BeamSplitter::straight("A3", "B3")),
            ],
        },
        Stage {
            name: "secondary".to_string(),
            elements: vec![
                Element::BeamSplitter(BeamSplitter::cross("A1", "A2")),
                Element::Mirror(Mirror::new("B1")),
                Element::BeamSplitter(BeamSplitter::cross("B2", "A3")),
                Element::Mirror(Mirror::new("B3")),
            ],
        },
    ]);
    let partition = ApparatusPartition::new(
        &rails,
        vec![
            ApparatusGroup {
                name: "MZ1".to_string(),
                rails: vec!["A1".into(), "B1".into()],
            },
            ApparatusGroup {
                name: "MZ2".to_string(),
                rails: vec!["A2".into(), "B2".into()],
            },
            ApparatusGroup {
                name: "MZ3".to_string(),
                rails: vec!["A3".into(), "B3".into()],
            },
        ],
    )
    .expect("groups are disjoint and cover the rails");
    NetworkDescription::new(rails, source, sequence, partition)
        .expect("built-in network is well formed")
}

/// Replace every beam splitter of the named stage by a mirror on each of
/// its rails (the variant in which the shared splitters become plain
/// reflectors and no apparatus coupling takes place).
pub fn mirrors_variant(net: &NetworkDescription, stage_name: &str) -> Result<NetworkDescription> {
    if net.sequence().stage(stage_name).is_none() {
        return Err(Error::Contract(format!(
            "network has no stage named `{stage_name}`"
        )));
    }
    let stages = net
        .sequence()
        .stages
        .iter()
        .map(|stage| {
            if stage.name != stage_name {
                return stage.clone();
            }
            let mut elements = Vec::new();
            for element in &stage.elements {
                match element {
                    Element::BeamSplitter(bs) => {
                        elements.push(Element::Mirror(Mirror::new(bs.in_a().clone())));
                        elements.push(Element::Mirror(Mirror::new(bs.in_b().clone())));
                    }
                    Element::Mirror(m) => elements.push(Element::Mirror(m.clone())),
                }
            }
            Stage {
                name: stage.name.clone(),
                elements,
            }
        })
        .collect();
    NetworkDescription::new(
        net.rails().clone(),
        net.source().clone(),
        ElementSequence::new(stages),
        net.partition().clone(),
    )
}

// ---------------------------------------------------------------------------
// Document serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    rails: Vec<String>,
    source: BTreeMap<String, u8>,
    partition: Vec<GroupDoc>,
    stages: Vec<StageDoc>,
}

#[derive(Serialize, Deserialize)]
struct GroupDoc {
    name: String,
    rails: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct StageDoc {
    name: String,
    #[serde(default)]
    elements: Vec<ElementDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ElementDoc {
    Beamsplitter {
        in_a: String,
        in_b: String,
        routing: BTreeMap<String, RoutingDoc>,
    },
    Mirror {
        rail: String,
    },
}

#[derive(Serialize, Deserialize)]
struct RoutingDoc {
    transmit: String,
    reflect: String,
}

/// Parse and validate a TOML network document.
pub fn load_network(text: &str) -> Result<NetworkDescription> {
    let doc: NetworkDoc =
        toml::from_str(text).map_err(|e| Error::Description(e.to_string()))?;
    let rails = RailSet::new(doc.rails.iter().map(String::as_str))?;

    let mut occupations = vec![0u8; rails.len()];
    for (label, count) in &doc.source {
        let idx = rails.index_of(&RailId::new(label.clone())).map_err(|_| {
            Error::Description(format!("source references undeclared rail `{label}`"))
        })?;
        occupations[idx] = *count;
    }
    let source = FockBasisState::new(occupations);

    let groups = doc
        .partition
        .into_iter()
        .map(|g| ApparatusGroup {
            name: g.name,
            rails: g.rails.iter().map(|r| RailId::new(r.clone())).collect(),
        })
        .collect();
    let partition = ApparatusPartition::new(&rails, groups)?;

    let mut stages = Vec::new();
    for (si, stage) in doc.stages.into_iter().enumerate() {
        let mut elements = Vec::new();
        for (ei, element) in stage.elements.into_iter().enumerate() {
            let context = format!("stages[{si}] `{}` element {ei}", stage.name);
            match element {
                ElementDoc::Beamsplitter { in_a, in_b, routing } => {
                    let in_a = RailId::new(in_a);
                    let in_b = RailId::new(in_b);
                    for rail in [&in_a, &in_b] {
                        if !rails.contains(rail) {
                            return Err(Error::Description(format!(
                                "{context}: unknown rail `{rail}`"
                            )));
                        }
                    }
                    let take = |input: &RailId| -> Result<PortRouting> {
                        let r = routing.get(input.as_str()).ok_or_else(|| {
                            Error::Description(format!(
                                "{context}: routing is missing an entry for input `{input}`"
                            ))
                        })?;
                        for target in [&r.transmit, &r.reflect] {
                            if !rails.contains(&RailId::new(target.clone())) {
                                return Err(Error::Description(format!(
                                    "{context}: routing references undeclared rail `{target}`"
                                )));
                            }
                        }
                        Ok(PortRouting {
                            transmit: RailId::new(r.transmit.clone()),
                            reflect: RailId::new(r.reflect.clone()),
                        })
                    };
                    let routing_a = take(&in_a)?;
                    let routing_b = take(&in_b)?;
                    if routing.len() != 2 {
                        return Err(Error::Description(format!(
                            "{context}: routing must name exactly the two input rails"
                        )));
                    }
                    let bs = BeamSplitter::new(in_a, in_b, routing_a, routing_b)
                        .map_err(|e| Error::Description(format!("{context}: {e}")))?;
                    elements.push(Element::BeamSplitter(bs));
                }
                ElementDoc::Mirror { rail } => {
                    let rail = RailId::new(rail);
                    if !rails.contains(&rail) {
                        return Err(Error::Description(format!(
                            "{context}: unknown rail `{rail}`"
                        )));
                    }
                    elements.push(Element::Mirror(Mirror::new(rail)));
                }
            }
        }
        stages.push(Stage {
            name: stage.name,
            elements,
        });
    }

    NetworkDescription::new(rails, source, ElementSequence::new(stages), partition)
}

/// Serialize a network back to its TOML document form.
pub fn to_document(net: &NetworkDescription) -> String {
    let doc = NetworkDoc {
        rails: net.rails().labels().iter().map(|l| l.to_string()).collect(),
        source: net
            .rails()
            .labels()
            .iter()
            .zip(net.source().occupations())
            .filter(|(_, &n)| n > 0)
            .map(|(l, &n)| (l.to_string(), n))
            .collect(),
        partition: net
            .partition()
            .groups()
            .iter()
            .map(|g| GroupDoc {
                name: g.name.clone(),
                rails: g.rails.iter().map(|r| r.to_string()).collect(),
            })
            .collect(),
        stages: net
            .sequence()
            .stages
            .iter()
            .map(|stage| StageDoc {
                name: stage.name.clone(),
                elements: stage
                    .elements
                    .iter()
                    .map(|element| match element {
                        Element::BeamSplitter(bs) => {
                            let mut routing = BTreeMap::new();
                            routing.insert(
                                bs.in_a().to_string(),
                                RoutingDoc {
                                    transmit: bs.routing_a().transmit.to_string(),
                                    reflect: bs.routing_a().reflect.to_string(),
                                },
                            );
                            routing.insert(
                                bs.in_b().to_string(),
                                RoutingDoc {
                                    transmit: bs.routing_b().transmit.to_string(),
                                    reflect: bs.routing_b().reflect.to_string(),
                                },
                            );
                            ElementDoc::Beamsplitter {
                                in_a: bs.in_a().to_string(),
                                in_b: bs.in_b().to_string(),
                                routing,
                            }
                        }
                        Element::Mirror(m) => ElementDoc::Mirror {
                            rail: m.rail().to_string(),
                        },
                    })
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("network documents always serialize")
}

//! Optical primitives — 50:50 beam splitter and mirror — and their action
//! on multi-photon Fock states.
//!
//! Conventions: a transmitted photon keeps amplitude `1/√2`, a reflected
//! photon picks up `i/√2` (mirrors give a full `i` per photon). Which rail
//! counts as "transmit" for which input is a per-instance choice carried
//! by the routing; only the two orientations that make the induced 2×2
//! single-photon matrix unitary are accepted.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::{Amplitude, FockBasisState, PureState, RailId, PRUNING_THRESHOLD};

/// Largest photon number one splitter expansion supports. Factorials stay
/// exactly representable in f64 up to this bound.
pub const MAX_EXPANSION_PHOTONS: u32 = 16;

const TRANSMIT: Amplitude = Amplitude::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
const REFLECT: Amplitude = Amplitude::new(0.0, std::f64::consts::FRAC_1_SQRT_2);

/// Where one input rail's transmitted and reflected components go.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortRouting {
    pub transmit: RailId,
    pub reflect: RailId,
}

/// A 50:50 beam splitter on a pair of rails.
///
/// The two valid orientations are: transmission keeps each photon on its
/// own rail (`straight`), or transmission crosses it to the partner rail
/// (`cross`). Mixed routings would make the single-photon matrix
/// non-unitary and are rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeamSplitter {
    in_a: RailId,
    in_b: RailId,
    routing_a: PortRouting,
    routing_b: PortRouting,
}

impl BeamSplitter {
    pub fn new(
        in_a: RailId,
        in_b: RailId,
        routing_a: PortRouting,
        routing_b: PortRouting,
    ) -> Result<Self> {
        if in_a == in_b {
            return Err(Error::InvalidElement(format!(
                "beam splitter inputs must differ, got `{in_a}` twice"
            )));
        }
        for (input, routing) in [(&in_a, &routing_a), (&in_b, &routing_b)] {
            for target in [&routing.transmit, &routing.reflect] {
                if target != &in_a && target != &in_b {
                    return Err(Error::InvalidElement(format!(
                        "routing of input `{input}` targets `{target}`, \
                         which is not one of the splitter rails `{in_a}`/`{in_b}`"
                    )));
                }
            }
            if routing.transmit == routing.reflect {
                return Err(Error::InvalidElement(format!(
                    "input `{input}` transmits and reflects to the same rail `{}`",
                    routing.transmit
                )));
            }
        }
        if routing_a.transmit == routing_b.transmit {
            return Err(Error::InvalidElement(format!(
                "both inputs transmit to `{}`; the induced matrix is not unitary",
                routing_a.transmit
            )));
        }
        Ok(BeamSplitter {
            in_a,
            in_b,
            routing_a,
            routing_b,
        })
    }

    /// Orientation in which transmission keeps a photon on its own rail.
    pub fn straight(in_a: impl Into<RailId>, in_b: impl Into<RailId>) -> Self {
        let (a, b) = (in_a.into(), in_b.into());
        BeamSplitter::new(
            a.clone(),
            b.clone(),
            PortRouting {
                transmit: a.clone(),
                reflect: b.clone(),
            },
            PortRouting {
                transmit: b,
                reflect: a,
            },
        )
        .expect("straight routing is always consistent")
    }

    /// Orientation in which reflection keeps a photon on its own rail and
    /// transmission crosses it to the partner rail.
    pub fn cross(in_a: impl Into<RailId>, in_b: impl Into<RailId>) -> Self {
        let (a, b) = (in_a.into(), in_b.into());
        BeamSplitter::new(
            a.clone(),
            b.clone(),
            PortRouting {
                transmit: b.clone(),
                reflect: a.clone(),
            },
            PortRouting {
                transmit: a,
                reflect: b,
            },
        )
        .expect("cross routing is always consistent")
    }

    pub fn in_a(&self) -> &RailId {
        &self.in_a
    }

    pub fn in_b(&self) -> &RailId {
        &self.in_b
    }

    pub fn routing_a(&self) -> &PortRouting {
        &self.routing_a
    }

    pub fn routing_b(&self) -> &PortRouting {
        &self.routing_b
    }

    /// Single-photon matrix `m[out][in]` over the rail pair `(in_a, in_b)`.
    fn matrix(&self) -> [[Amplitude; 2]; 2] {
        let zero = Amplitude::new(0.0, 0.0);
        let mut m = [[zero; 2]; 2];
        for (col, routing) in [(0usize, &self.routing_a), (1, &self.routing_b)] {
            let t_row = usize::from(routing.transmit != self.in_a);
            let r_row = usize::from(routing.reflect != self.in_a);
            m[t_row][col] = TRANSMIT;
            m[r_row][col] = REFLECT;
        }
        m
    }
}

/// A mirror on a single rail: factor `i` per photon occupying it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mirror {
    rail: RailId,
}

impl Mirror {
    pub fn new(rail: impl Into<RailId>) -> Self {
        Mirror { rail: rail.into() }
    }

    pub fn rail(&self) -> &RailId {
        &self.rail
    }
}

/// Any optical element of the network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element {
    BeamSplitter(BeamSplitter),
    Mirror(Mirror),
}

impl Element {
    /// Rails the element touches.
    pub fn rails(&self) -> Vec<&RailId> {
        match self {
            Element::BeamSplitter(bs) => vec![bs.in_a(), bs.in_b()],
            Element::Mirror(m) => vec![m.rail()],
        }
    }
}

/// A named run of elements, applied left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    pub elements: Vec<Element>,
}

/// The full element program of a network, partitioned into named stages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementSequence {
    pub stages: Vec<Stage>,
}

impl ElementSequence {
    pub fn new(stages: Vec<Stage>) -> Self {
        ElementSequence { stages }
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.stages.iter().flat_map(|s| s.elements.iter())
    }

    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Apply a 2×2 single-photon matrix to a rail pair by the bosonic binomial
/// rule (creation-operator substitution with the √k! occupancy factors).
fn apply_pair_matrix(
    s: &PureState,
    ia: usize,
    ib: usize,
    m: &[[Amplitude; 2]; 2],
) -> Result<PureState> {
    let mut out: BTreeMap<FockBasisState, Amplitude> = BTreeMap::new();
    for (basis, &amp) in s.terms() {
        let na = u32::from(basis.occupation(ia));
        let nb = u32::from(basis.occupation(ib));
        if na + nb == 0 {
            *out.entry(basis.clone())
                .or_insert(Amplitude::new(0.0, 0.0)) += amp;
            continue;
        }
        if na + nb > MAX_EXPANSION_PHOTONS {
            return Err(Error::Contract(format!(
                "{} photons on a splitter exceed the supported maximum of {}",
                na + nb,
                MAX_EXPANSION_PHOTONS
            )));
        }
        let input_norm = 1.0 / (factorial(na) * factorial(nb)).sqrt();
        for j in 0..=na {
            for k in 0..=nb {
                let out_a = j + k;
                let out_b = na + nb - out_a;
                let routes = m[0][0].powu(j)
                    * m[1][0].powu(na - j)
                    * m[0][1].powu(k)
                    * m[1][1].powu(nb - k);
                let weight = binomial(na, j)
                    * binomial(nb, k)
                    * (factorial(out_a) * factorial(out_b)).sqrt()
                    * input_norm;
                let target = basis.with(ia, out_a as u8).with(ib, out_b as u8);
                *out.entry(target).or_insert(Amplitude::new(0.0, 0.0)) += amp * routes * weight;
            }
        }
    }
    out.retain(|_, a| a.norm() >= PRUNING_THRESHOLD);
    Ok(PureState::raw(s.rails().clone(), out, s.is_normalized()))
}

/// Send a state through a beam splitter.
pub fn apply_beam_splitter(bs: &BeamSplitter, s: &PureState) -> Result<PureState> {
    let ia = s.rails().index_of(bs.in_a())?;
    let ib = s.rails().index_of(bs.in_b())?;
    apply_pair_matrix(s, ia, ib, &bs.matrix())
}

/// Undo a beam splitter (conjugate-transposed single-photon matrix).
pub fn apply_beam_splitter_inverse(bs: &BeamSplitter, s: &PureState) -> Result<PureState> {
    let ia = s.rails().index_of(bs.in_a())?;
    let ib = s.rails().index_of(bs.in_b())?;
    let m = bs.matrix();
    let adj = [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ];
    apply_pair_matrix(s, ia, ib, &adj)
}

/// Send a state through a mirror: factor `i^k` on a term with `k` photons
/// occupying the mirrored rail.
pub fn apply_mirror(mirror: &Mirror, s: &PureState) -> Result<PureState> {
    let idx = s.rails().index_of(mirror.rail())?;
    let phases = [
        Amplitude::new(1.0, 0.0),
        Amplitude::new(0.0, 1.0),
        Amplitude::new(-1.0, 0.0),
        Amplitude::new(0.0, -1.0),
    ];
    let terms = s
        .terms()
        .map(|(basis, amp)| {
            let k = usize::from(basis.occupation(idx)) % 4;
            (basis.clone(), amp * phases[k])
        })
        .collect();
    Ok(PureState::raw(s.rails().clone(), terms, s.is_normalized()))
}

/// Apply one element.
pub fn apply_element(element: &Element, s: &PureState) -> Result<PureState> {
    match element {
        Element::BeamSplitter(bs) => apply_beam_splitter(bs, s),
        Element::Mirror(m) => apply_mirror(m, s),
    }
}

/// Apply a run of elements left to right.
pub fn evolve<'a, I>(elements: I, s: &PureState) -> Result<PureState>
where
    I: IntoIterator<Item = &'a Element>,
{
    let mut state = s.clone();
    for element in elements {
        state = apply_element(element, &state)?;
    }
    Ok(state)
}

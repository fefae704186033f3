//! The two-node cascade and single-node characterization as exact outcome tables.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{detection_path, fiber_channel, polarization_register, ChannelParams};
use crate::cqed::{
    dephase, reflect, rotate, Axis, CqedParams, NodeImperfections, Readout, ReflectionPair, Spin,
};
use crate::detectors::{hbt_povm, DetectorParams, HbtPovm};
use crate::error::{check_unit, Error, Result};
use crate::fock::{coherent_state, fock_state, FockSpace, JointState, ModeState};
use crate::linalg::{ONE, ZERO};
use crate::sorter::SorterConfig;

pub const LIGHT: &str = "light";

pub fn atom_label(node: usize) -> &'static str {
    match node {
        1 => "qnd1",
        _ => "qnd2",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionModel {
    /// Amplitudes from the input-output formula.
    Cqed,
    /// Lossless (+1, −1).
    Ideal,
    /// Atom-independent unit reflection, i.e. no detector at this position.
    Mirror,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeConfig {
    pub cqed: CqedParams,
    pub imperfections: NodeImperfections,
    pub reflection: ReflectionModel,
}

impl NodeConfig {
    pub fn node1() -> Self {
        Self {
            cqed: CqedParams::node1(),
            imperfections: NodeImperfections::node1(),
            reflection: ReflectionModel::Cqed,
        }
    }

    pub fn node2() -> Self {
        Self {
            cqed: CqedParams::node2(),
            imperfections: NodeImperfections::node2(),
            reflection: ReflectionModel::Cqed,
        }
    }

    pub fn ideal() -> Self {
        Self {
            cqed: CqedParams::node1(),
            imperfections: NodeImperfections::ideal(),
            reflection: ReflectionModel::Ideal,
        }
    }

    pub fn pair(&self) -> ReflectionPair {
        match self.reflection {
            ReflectionModel::Cqed => ReflectionPair::from_params(&self.cqed),
            ReflectionModel::Ideal => ReflectionPair::ideal(),
            ReflectionModel::Mirror => ReflectionPair::mirror(),
        }
    }

    pub fn validate(&self, node: usize) -> Result<()> {
        self.cqed.validate()?;
        self.imperfections.validate()?;
        self.imperfections.over_rotation(node).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Coherent,
    /// Fixed photon number; the sweep value is ignored.
    Fock(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub node1: NodeConfig,
    pub node2: NodeConfig,
    pub channel: ChannelParams,
    pub detection_efficiency: f64,
    /// HBT detectors a and b.
    pub detectors: [DetectorParams; 2],
    pub mean_photon_sweep: Vec<f64>,
    pub input_kind: InputKind,
    pub mode: RunMode,
    pub trials: u64,
    pub seed: u64,
    /// Mean photon number of the g² table.
    pub table1_mu: f64,
    pub sorter: SorterConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            node1: NodeConfig::node1(),
            node2: NodeConfig::node2(),
            channel: ChannelParams::default(),
            detection_efficiency: 0.5,
            detectors: [DetectorParams::default(); 2],
            mean_photon_sweep: Self::default_sweep(),
            input_kind: InputKind::Coherent,
            mode: RunMode::Exact,
            trials: 100_000,
            seed: 2021,
            table1_mu: 0.45,
            sorter: SorterConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn default_sweep() -> Vec<f64> {
        vec![
            0.04, 0.06, 0.084, 0.12, 0.17, 0.25, 0.35, 0.45, 0.65, 0.9, 1.3, 1.8, 2.5, 3.11,
        ]
    }

    /// Lossless, noiseless nodes, channel and detectors.
    pub fn ideal() -> Self {
        Self {
            node1: NodeConfig::ideal(),
            node2: NodeConfig::ideal(),
            channel: ChannelParams::lossless(),
            detection_efficiency: 1.0,
            detectors: [DetectorParams::ideal(); 2],
            ..Self::default()
        }
    }

    pub fn node(&self, node: usize) -> Result<&NodeConfig> {
        match node {
            1 => Ok(&self.node1),
            2 => Ok(&self.node2),
            _ => Err(Error::Config(format!("node index {node} (expected 1 or 2)"))),
        }
    }

    /// Same config with the HBT dark counts switched off.
    pub fn without_hbt_dark_counts(&self) -> Self {
        let mut c = self.clone();
        for d in &mut c.detectors {
            d.dark_rate = 0.0;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.node1.validate(1)?;
        self.node2.validate(2)?;
        self.channel.validate()?;
        check_unit("detection.efficiency", self.detection_efficiency)?;
        for d in &self.detectors {
            d.validate()?;
        }
        if self.mean_photon_sweep.is_empty() {
            return Err(Error::Config("mean photon sweep is empty".into()));
        }
        for &mu in self.mean_photon_sweep.iter().chain([self.table1_mu].iter()) {
            FockSpace::for_mean_photon(mu)?;
        }
        if self.mode == RunMode::MonteCarlo && self.trials == 0 {
            return Err(Error::Config("Monte Carlo mode needs trials >= 1".into()));
        }
        if let InputKind::Fock(n) = self.input_kind {
            if n > FockSpace::MAX_CUTOFF {
                return Err(Error::Truncation {
                    mean: n as f64,
                    required: n,
                });
            }
        }
        self.sorter.validate()
    }

    pub(crate) fn input_state(&self, mu: f64) -> Result<ModeState> {
        match self.input_kind {
            InputKind::Coherent => coherent_state(mu, FockSpace::for_mean_photon(mu)?),
            InputKind::Fock(n) => fock_state(n, FockSpace::new(n.max(1))?),
        }
    }
}

/// Which detectors are in the beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Cascade,
    /// Only this node's atom; the other position is a plain mirror.
    Single(usize),
}

impl Topology {
    pub fn nodes(&self) -> Vec<usize> {
        match self {
            Topology::Cascade => vec![1, 2],
            Topology::Single(n) => vec![*n],
        }
    }

    fn has(&self, node: usize) -> bool {
        match self {
            Topology::Cascade => true,
            Topology::Single(n) => *n == node,
        }
    }
}

/// One row of the outcome table. `ups[k]` is the reported ↑z of node k+1 (None if absent).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub ups: [Option<bool>; 2],
    pub click_a: bool,
    pub click_b: bool,
}

impl Outcome {
    pub fn up(&self, node: usize) -> bool {
        self.ups
            .get(node.wrapping_sub(1))
            .copied()
            .flatten()
            .unwrap_or(false)
    }

    pub fn click(&self) -> bool {
        self.click_a || self.click_b
    }
}

/// Probability table over reported atom outcomes and the two HBT click flags.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    nodes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointDistribution {
    fn zeros(nodes: Vec<usize>) -> Self {
        let len = 4 << nodes.len();
        Self {
            nodes,
            probs: vec![0.0; len],
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    fn index(&self, atom_bits: usize, a: bool, b: bool) -> usize {
        (atom_bits << 2) | ((a as usize) << 1) | b as usize
    }

    fn outcome_at(&self, index: usize) -> Outcome {
        let bits = index >> 2;
        let mut ups = [None, None];
        for (k, &node) in self.nodes.iter().enumerate() {
            ups[node - 1] = Some(bits >> k & 1 == 1);
        }
        Outcome {
            ups,
            click_a: index & 2 != 0,
            click_b: index & 1 != 0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.outcome_at(i), p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn probability(&self, pred: impl Fn(&Outcome) -> bool) -> f64 {
        self.iter().filter(|(o, _)| pred(o)).map(|(_, p)| p).sum()
    }

    pub fn condition(&self, pred: impl Fn(&Outcome) -> bool) -> Result<(JointDistribution, f64)> {
        condition(self, pred)
    }

    /// P(event | given); zero-probability `given` is an error.
    pub fn conditional(
        &self,
        event: impl Fn(&Outcome) -> bool,
        given: impl Fn(&Outcome) -> bool,
    ) -> Result<f64> {
        let pg = self.probability(&given);
        if !(pg > 0.0) {
            return Err(Error::ZeroProbability("conditioning event".into()));
        }
        Ok(self.probability(|o| given(o) && event(o)) / pg)
    }
}

/// Bayes renormalization onto `pred`; returns the conditional table and P(pred).
pub fn condition(
    dist: &JointDistribution,
    pred: impl Fn(&Outcome) -> bool,
) -> Result<(JointDistribution, f64)> {
    let p = dist.probability(&pred);
    if !(p > 0.0) {
        return Err(Error::ZeroProbability("predicate".into()));
    }
    let probs = dist
        .iter()
        .map(|(o, q)| if pred(&o) { q / p } else { 0.0 })
        .collect();
    Ok((
        JointDistribution {
            nodes: dist.nodes.clone(),
            probs,
        },
        p,
    ))
}

/// State after the second π/2 pulses, ready for atom readout and photon counting.
struct Propagated {
    state: JointState,
    nodes: Vec<usize>,
    readouts: Vec<Readout>,
    space: FockSpace,
}

fn propagate(config: &ExperimentConfig, mu: f64, topology: Topology) -> Result<Propagated> {
    config.validate()?;
    let light = config.input_state(mu)?;
    let space = light.space();
    let nodes = topology.nodes();

    let with_pol = topology.has(2) && config.channel.scramble_probability() > 0.0;
    let mut state: Option<JointState> = None;
    for &node in &nodes {
        let atom = JointState::qubit_pure(atom_label(node), ONE, ZERO)?;
        state = Some(match state {
            None => atom,
            Some(s) => s.tensor(&atom)?,
        });
    }
    let mut state = state.expect("at least one node");
    if with_pol {
        state = state.tensor(&polarization_register(LIGHT))?;
    }
    state = state.tensor(&JointState::from_mode(LIGHT, light))?;

    let mut deltas = Vec::new();
    let mut readouts = Vec::new();
    for &node in &nodes {
        let imp = &config.node(node)?.imperfections;
        let delta = imp.over_rotation(node)?;
        deltas.push(delta);
        readouts.push(imp.protocol_readout());
        state = rotate(&state, atom_label(node), Axis::Y, FRAC_PI_2, delta)?;
    }

    if topology.has(1) {
        state = reflect(&state, atom_label(1), LIGHT, config.node1.pair())?;
    }
    state = fiber_channel(&state, LIGHT, &config.channel)?;
    if topology.has(2) {
        state = reflect(&state, atom_label(2), LIGHT, config.node2.pair())?;
    }
    state = detection_path(&state, LIGHT, config.detection_efficiency)?;

    for (k, &node) in nodes.iter().enumerate() {
        let imp = &config.node(node)?.imperfections;
        state = dephase(&state, atom_label(node), imp.protocol_window, imp.t_coherence)?;
        state = rotate(&state, atom_label(node), Axis::Y, FRAC_PI_2, deltas[k])?;
    }
    Ok(Propagated {
        state,
        nodes,
        readouts,
        space,
    })
}

impl Propagated {
    /// Weight of each reported-atom bit pattern for a true z pattern, both as bitmasks.
    fn readout_weight(&self, reported: usize, actual: usize) -> f64 {
        self.readouts
            .iter()
            .enumerate()
            .map(|(k, r)| {
                r.prob(
                    Spin::from_up(reported >> k & 1 == 1),
                    Spin::from_up(actual >> k & 1 == 1),
                )
            })
            .product()
    }

    /// Decompose a basis index into (true-↑ bitmask over nodes, photon number).
    /// Subsystem order is [atoms..., pol?, light] with ↑z = digit 0.
    fn basis_decoder(&self) -> impl Fn(usize) -> (usize, usize) + '_ {
        let d = self.space.dim();
        let atoms = self.nodes.len();
        let others: usize = self.state.dim() / d / (1 << atoms);
        move |i: usize| {
            let n = i % d;
            let mut rest = i / d / others;
            let mut bits = 0;
            for k in (0..atoms).rev() {
                if rest % 2 == 0 {
                    bits |= 1 << k;
                }
                rest /= 2;
            }
            (bits, n)
        }
    }

    fn outcome_table(&self, povm: &HbtPovm) -> JointDistribution {
        let mut dist = JointDistribution::zeros(self.nodes.clone());
        let decode = self.basis_decoder();
        let atoms = self.nodes.len();
        for (i, p) in self.state.populations().into_iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (actual, n) = decode(i);
            for reported in 0..1usize << atoms {
                let w = p * self.readout_weight(reported, actual);
                for a in [false, true] {
                    for b in [false, true] {
                        let idx = dist.index(reported, a, b);
                        dist.probs[idx] += w * povm.elements[a as usize][b as usize][n];
                    }
                }
            }
        }
        dist
    }
}

/// Exact 16-outcome table of the two-node cascade at input mean photon number `mu`.
pub fn run_cascade(config: &ExperimentConfig, mu: f64) -> Result<JointDistribution> {
    run_topology(config, mu, Topology::Cascade)
}

/// Single-node characterization: the other node is replaced by a mirror.
pub fn run_single(config: &ExperimentConfig, node: usize, mu: f64) -> Result<JointDistribution> {
    config.node(node)?;
    run_topology(config, mu, Topology::Single(node))
}

pub fn run_topology(config: &ExperimentConfig, mu: f64, topology: Topology) -> Result<JointDistribution> {
    let prop = propagate(config, mu, topology)?;
    let povm = hbt_povm(prop.space, &config.detectors[0], &config.detectors[1]);
    Ok(prop.outcome_table(&povm))
}

/// Photon state entering the HBT split, conditioned on `pred`.
///
/// If `pred` depends on the click flags, the accepted HBT outcomes act on the light
/// through their Lüders maps √M ρ √M; otherwise only the atom readout conditions it.
pub fn conditioned_photon_state(
    config: &ExperimentConfig,
    mu: f64,
    pred: impl Fn(&Outcome) -> bool,
) -> Result<ModeState> {
    let prop = propagate(config, mu, Topology::Cascade)?;
    let povm = hbt_povm(prop.space, &config.detectors[0], &config.detectors[1]);
    let atoms = prop.nodes.len();
    let d = prop.space.dim();
    let decode = prop.basis_decoder();
    let template = JointDistribution::zeros(prop.nodes.clone());

    let mut rho = DMatrix::from_element(d, d, ZERO);
    let dim = prop.state.dim();
    let blocks = dim / d;
    for reported in 0..1usize << atoms {
        let accepted: Vec<(bool, bool)> = [(false, false), (false, true), (true, false), (true, true)]
            .into_iter()
            .filter(|&(a, b)| pred(&template.outcome_at(template.index(reported, a, b))))
            .collect();
        if accepted.is_empty() {
            continue;
        }
        let click_free = accepted.len() == 4;
        for blk in 0..blocks {
            let (actual, _) = decode(blk * d);
            let w = prop.readout_weight(reported, actual);
            if w == 0.0 {
                continue;
            }
            for n1 in 0..d {
                for n2 in 0..d {
                    let h = if click_free {
                        1.0
                    } else {
                        accepted
                            .iter()
                            .map(|&(a, b)| {
                                let e = &povm.elements[a as usize][b as usize];
                                (e[n1].max(0.0) * e[n2].max(0.0)).sqrt()
                            })
                            .sum()
                    };
                    rho[(n1, n2)] += prop.state.matrix()[(blk * d + n1, blk * d + n2)] * (w * h);
                }
            }
        }
    }
    let tr: f64 = (0..d).map(|n| rho[(n, n)].re).sum();
    if !(tr > 0.0) {
        return Err(Error::ZeroProbability("photon-state predicate".into()));
    }
    rho /= Complex64::new(tr, 0.0);
    ModeState::from_matrix(prop.space, rho)
}

//! Published quantities from outcome tables and conditioned photon states.

use crate::error::{Error, Result};
use crate::fock::ModeState;
use crate::par::par_map;
use crate::protocol::{
    conditioned_photon_state, run_cascade, run_single, ExperimentConfig, JointDistribution, Outcome,
};

/// The nine probabilities plotted against μ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Up1,
    Up2,
    Up1GivenUp2,
    Up2GivenUp1,
    Up1GivenClick,
    Up2GivenClick,
    OrGivenClick,
    AndGivenClick,
    Up2GivenUp1AndClick,
}

impl Quantity {
    pub const ALL: [Quantity; 9] = [
        Quantity::Up1,
        Quantity::Up2,
        Quantity::Up1GivenUp2,
        Quantity::Up2GivenUp1,
        Quantity::Up1GivenClick,
        Quantity::Up2GivenClick,
        Quantity::OrGivenClick,
        Quantity::AndGivenClick,
        Quantity::Up2GivenUp1AndClick,
    ];

    pub fn column(&self) -> &'static str {
        match self {
            Quantity::Up1 => "p_up1",
            Quantity::Up2 => "p_up2",
            Quantity::Up1GivenUp2 => "p_up1_given_up2",
            Quantity::Up2GivenUp1 => "p_up2_given_up1",
            Quantity::Up1GivenClick => "p_up1_given_click",
            Quantity::Up2GivenClick => "p_up2_given_click",
            Quantity::OrGivenClick => "p_or_given_click",
            Quantity::AndGivenClick => "p_and_given_click",
            Quantity::Up2GivenUp1AndClick => "p_up2_given_up1_and_click",
        }
    }

    pub fn event(&self, o: &Outcome) -> bool {
        match self {
            Quantity::Up1 | Quantity::Up1GivenUp2 | Quantity::Up1GivenClick => o.up(1),
            Quantity::Up2
            | Quantity::Up2GivenUp1
            | Quantity::Up2GivenClick
            | Quantity::Up2GivenUp1AndClick => o.up(2),
            Quantity::OrGivenClick => o.up(1) || o.up(2),
            Quantity::AndGivenClick => o.up(1) && o.up(2),
        }
    }

    pub fn given(&self, o: &Outcome) -> bool {
        match self {
            Quantity::Up1 | Quantity::Up2 => true,
            Quantity::Up1GivenUp2 => o.up(2),
            Quantity::Up2GivenUp1 => o.up(1),
            Quantity::Up1GivenClick
            | Quantity::Up2GivenClick
            | Quantity::OrGivenClick
            | Quantity::AndGivenClick => o.click(),
            Quantity::Up2GivenUp1AndClick => o.up(1) && o.click(),
        }
    }

    pub fn evaluate(&self, dist: &JointDistribution) -> Result<f64> {
        dist.conditional(|o| self.event(o), |o| self.given(o))
    }
}

/// A value with its standard error; `value == None` marks an absent cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cell {
    pub value: Option<f64>,
    pub stderr: Option<f64>,
}

impl Cell {
    pub fn exact(value: f64) -> Self {
        Self {
            value: Some(value),
            stderr: Some(0.0),
        }
    }

    pub fn absent() -> Self {
        Self::default()
    }

    pub fn estimate(value: f64, stderr: f64) -> Self {
        Self {
            value: Some(value),
            stderr: Some(stderr),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub mu: f64,
    pub cells: [Cell; 9],
}

impl EstimateRow {
    pub fn get(&self, q: Quantity) -> Cell {
        let idx = Quantity::ALL.iter().position(|&x| x == q).expect("listed");
        self.cells[idx]
    }

    pub fn value(&self, q: Quantity) -> Option<f64> {
        self.get(q).value
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateTable {
    pub rows: Vec<EstimateRow>,
}

impl EstimateTable {
    pub fn column(&self, q: Quantity) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.value(q)).collect()
    }

    /// (μ, value) of the largest present value of `q`.
    pub fn max(&self, q: Quantity) -> Option<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.value(q).map(|v| (r.mu, v)))
            .fold(None, |best, cur| match best {
                Some((_, bv)) if bv >= cur.1 => best,
                _ => Some(cur),
            })
    }
}

/// Exact row; cells whose conditioning event has zero probability are absent.
pub fn estimate_row(dist: &JointDistribution, mu: f64) -> EstimateRow {
    let mut cells = [Cell::absent(); 9];
    for (cell, q) in cells.iter_mut().zip(Quantity::ALL) {
        if let Ok(v) = q.evaluate(dist) {
            *cell = Cell::exact(v);
        }
    }
    EstimateRow { mu, cells }
}

pub fn sweep_estimates(config: &ExperimentConfig) -> Result<EstimateTable> {
    config.validate()?;
    let rows = par_map(&config.mean_photon_sweep, |&mu| {
        run_cascade(config, mu).map(|d| estimate_row(&d, mu))
    });
    Ok(EstimateTable {
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

/// Single-node characterization row: P(↑) and P(↑|click).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleNodeRow {
    pub mu: f64,
    pub p_up: Cell,
    pub p_up_given_click: Cell,
}

pub fn single_node_row(dist: &JointDistribution, node: usize, mu: f64) -> SingleNodeRow {
    let p_up = Cell::exact(dist.probability(|o| o.up(node)));
    let p_up_given_click = dist
        .conditional(|o| o.up(node), |o| o.click())
        .map(Cell::exact)
        .unwrap_or_default();
    SingleNodeRow {
        mu,
        p_up,
        p_up_given_click,
    }
}

pub fn single_node_sweep(config: &ExperimentConfig, node: usize) -> Result<Vec<SingleNodeRow>> {
    config.validate()?;
    config.node(node)?;
    par_map(&config.mean_photon_sweep, |&mu| {
        run_single(config, node, mu).map(|d| single_node_row(&d, node, mu))
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    /// Signal point (smallest sweep μ).
    pub mu: f64,
    pub snr1: f64,
    pub snr2: f64,
    pub snr_and: f64,
    pub dc1: f64,
    pub dc2: f64,
    pub dc_and: f64,
    pub p_up1_given_click: f64,
    pub p_up2_given_click: f64,
    pub p_and_given_click: f64,
}

impl SnrReport {
    pub fn and_over_snr1(&self) -> f64 {
        self.snr_and / self.snr1
    }

    pub fn and_over_snr2(&self) -> f64 {
        self.snr_and / self.snr2
    }
}

fn ratio(signal: f64, dark: f64) -> f64 {
    if dark == 0.0 {
        f64::INFINITY
    } else {
        signal / dark
    }
}

/// Signal at the smallest sweep μ over the no-light residuals of the same pipeline.
pub fn snr(config: &ExperimentConfig) -> Result<SnrReport> {
    config.validate()?;
    let mu = config
        .mean_photon_sweep
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let signal = run_cascade(config, mu)?;
    let dark = run_cascade(&config.without_hbt_dark_counts(), 0.0)?;
    let p1 = Quantity::Up1GivenClick.evaluate(&signal)?;
    let p2 = Quantity::Up2GivenClick.evaluate(&signal)?;
    let pand = Quantity::AndGivenClick.evaluate(&signal)?;
    let dc1 = dark.probability(|o| o.up(1));
    let dc2 = dark.probability(|o| o.up(2));
    let dc_and = dark.probability(|o| o.up(1) && o.up(2));
    Ok(SnrReport {
        mu,
        snr1: ratio(p1, dc1),
        snr2: ratio(p2, dc2),
        snr_and: ratio(pand, dc_and),
        dc1,
        dc2,
        dc_and,
        p_up1_given_click: p1,
        p_up2_given_click: p2,
        p_and_given_click: pand,
    })
}

/// ⟨n(n−1)⟩/⟨n⟩².
pub fn g2_from_state(state: &ModeState) -> Result<f64> {
    let (n1, n2) = state.moments();
    if !(n1 > 0.0) {
        return Err(Error::UndefinedG2);
    }
    Ok(n2 / (n1 * n1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum G2Condition {
    None,
    Up1,
    Up2,
    Up1AndUp2,
}

impl G2Condition {
    pub const ALL: [G2Condition; 4] = [
        G2Condition::None,
        G2Condition::Up1,
        G2Condition::Up2,
        G2Condition::Up1AndUp2,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            G2Condition::None => "none",
            G2Condition::Up1 => "up1",
            G2Condition::Up2 => "up2",
            G2Condition::Up1AndUp2 => "up1_and_up2",
        }
    }

    pub fn accepts(&self, o: &Outcome) -> bool {
        match self {
            G2Condition::None => true,
            G2Condition::Up1 => o.up(1),
            G2Condition::Up2 => o.up(2),
            G2Condition::Up1AndUp2 => o.up(1) && o.up(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Row {
    pub condition: G2Condition,
    pub g2_zero: Cell,
    pub g2_tau: Cell,
    /// True when `g2_tau` is the analytic value for independent pulses.
    pub tau_analytic: bool,
}

/// Exact g²(0) of the light entering the HBT split under each atom condition.
pub fn g2_table(config: &ExperimentConfig, mu: f64) -> Result<Vec<G2Row>> {
    config.validate()?;
    G2Condition::ALL
        .iter()
        .map(|&c| {
            let g2 = conditioned_photon_state(config, mu, |o| c.accepts(o))
                .and_then(|s| g2_from_state(&s));
            let g2_zero = match g2 {
                Ok(v) => Cell::exact(v),
                Err(Error::ZeroProbability(_)) | Err(Error::UndefinedG2) => Cell::absent(),
                Err(e) => return Err(e),
            };
            Ok(G2Row {
                condition: c,
                g2_zero,
                g2_tau: Cell::exact(1.0),
                tau_analytic: true,
            })
        })
        .collect()
}

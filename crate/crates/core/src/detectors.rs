//! Threshold single-photon detectors with finite efficiency and dark counts.

use crate::error::{check_positive, check_unit, Error, Result};
use crate::fock::{beam_splitter, FockSpace, JointState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    pub efficiency: f64,
    /// Hz.
    pub dark_rate: f64,
    /// μs.
    pub gate_window: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            efficiency: 0.9,
            dark_rate: 40.0,
            gate_window: 2.0,
        }
    }
}

impl DetectorParams {
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_rate: 0.0,
            gate_window: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("detector efficiency", self.efficiency)?;
        if !(self.dark_rate >= 0.0) || !self.dark_rate.is_finite() {
            return Err(Error::OutOfRange {
                name: "dark_rate".into(),
                value: self.dark_rate,
                expected: ">= 0",
            });
        }
        check_positive("gate_window", self.gate_window)
    }

    /// Probability of at least one dark count inside the gate.
    pub fn p_dark(&self) -> f64 {
        -(-self.dark_rate * self.gate_window * 1e-6).exp_m1()
    }

    /// P(no click | n photons) for n = 0..dim.
    pub fn no_click_weights(&self, space: FockSpace) -> Vec<f64> {
        let keep = 1.0 - self.p_dark();
        (0..space.dim())
            .map(|n| keep * (1.0 - self.efficiency).powi(n as i32))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ClickOutcome {
    pub p_click: f64,
    pub p_no_click: f64,
    click: Option<JointState>,
    no_click: Option<JointState>,
}

impl ClickOutcome {
    /// Normalized state of the remaining subsystems (the counted mode is absorbed).
    pub fn conditional(&self, clicked: bool) -> Result<&JointState> {
        let s = if clicked { &self.click } else { &self.no_click };
        s.as_ref().ok_or_else(|| {
            Error::ZeroProbability(if clicked { "detector click" } else { "no detector click" }.into())
        })
    }
}

pub fn click_povm(state: &JointState, mode: &str, params: &DetectorParams) -> Result<ClickOutcome> {
    params.validate()?;
    let (m, space) = state.mode_index(mode)?;
    let keep: Vec<usize> = (0..state.subsystems().len()).filter(|&i| i != m).collect();
    let none = params.no_click_weights(space);
    let no_click = state.contract(&keep, |n| none[n]);
    let click = state.contract(&keep, |n| 1.0 - none[n]);
    let (p_no_click, p_click) = (no_click.trace().max(0.0), click.trace().max(0.0));
    Ok(ClickOutcome {
        p_click,
        p_no_click,
        click: if p_click > 0.0 { click.normalized("click").ok() } else { None },
        no_click: if p_no_click > 0.0 {
            no_click.normalized("no click").ok()
        } else {
            None
        },
    })
}

/// Joint click statistics of the two HBT detectors, indexed `[a][b]` with 1 = click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbtDistribution {
    pub probs: [[f64; 2]; 2],
}

impl HbtDistribution {
    pub fn p(&self, a: bool, b: bool) -> f64 {
        self.probs[a as usize][b as usize]
    }

    pub fn p_a(&self) -> f64 {
        self.p(true, false) + self.p(true, true)
    }

    pub fn p_b(&self) -> f64 {
        self.p(false, true) + self.p(true, true)
    }

    pub fn p_any(&self) -> f64 {
        1.0 - self.p(false, false)
    }
}

/// Diagonal POVM of a 50:50 split onto detectors `a` and `b`, per photon number.
#[derive(Debug, Clone)]
pub struct HbtPovm {
    /// `elements[a][b][n]`, 1 = click.
    pub elements: [[Vec<f64>; 2]; 2],
}

pub fn hbt_povm(space: FockSpace, a: &DetectorParams, b: &DetectorParams) -> HbtPovm {
    let (ka, kb) = (1.0 - a.p_dark(), 1.0 - b.p_dark());
    let mut e = [[vec![0.0; space.dim()], vec![0.0; space.dim()]], [
        vec![0.0; space.dim()],
        vec![0.0; space.dim()],
    ]];
    for n in 0..space.dim() {
        let n_i = n as i32;
        let none = ka * kb * (1.0 - 0.5 * a.efficiency - 0.5 * b.efficiency).powi(n_i);
        let no_a = ka * (1.0 - 0.5 * a.efficiency).powi(n_i);
        let no_b = kb * (1.0 - 0.5 * b.efficiency).powi(n_i);
        e[0][0][n] = none;
        // rounding can leave -1e-17 where an element vanishes
        e[0][1][n] = (no_a - none).max(0.0);
        e[1][0][n] = (no_b - none).max(0.0);
        e[1][1][n] = (1.0 - no_a - no_b + none).max(0.0);
    }
    HbtPovm { elements: e }
}

/// 50:50 beam splitter onto a fresh vacuum port, then a click POVM on each output.
pub fn hbt_split_and_count(
    state: &JointState,
    mode: &str,
    a: &DetectorParams,
    b: &DetectorParams,
) -> Result<HbtDistribution> {
    a.validate()?;
    b.validate()?;
    let (_, space) = state.mode_index(mode)?;
    let aux = format!("{mode}.hbt");
    let widened = state.tensor(&JointState::vacuum_mode(&aux, space))?;
    let split = beam_splitter(&widened, mode, &aux, 0.5, 0.0)?;
    let m = split.index_of(mode)?;
    let x = split.index_of(&aux)?;
    let keep: Vec<usize> = (0..split.subsystems().len())
        .filter(|&i| i != m && i != x)
        .collect();
    let none_a = a.no_click_weights(space);
    let none_b = b.no_click_weights(space);
    let d = space.dim();
    let mut probs = [[0.0; 2]; 2];
    for (ca, row) in probs.iter_mut().enumerate() {
        for (cb, cell) in row.iter_mut().enumerate() {
            let w = |flat: usize| {
                // traced subsystems are [mode, aux] in index order
                let (na, nb) = if m < x { (flat / d, flat % d) } else { (flat % d, flat / d) };
                let pa = if ca == 1 { 1.0 - none_a[na] } else { none_a[na] };
                let pb = if cb == 1 { 1.0 - none_b[nb] } else { none_b[nb] };
                pa * pb
            };
            *cell = split.contract(&keep, w).trace().max(0.0);
        }
    }
    Ok(HbtDistribution { probs })
}

//! Heralded photon-number sorter: k cascaded nodes read out the binary digits of n,
//! least significant first, with the measurement basis of each node fed forward from
//! the earlier outcomes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::cqed::{reflect, reflection_coefficients, rotate, Axis, CqedParams, Readout, ReflectionPair, Spin};
use crate::error::{check_unit, Error, Result};
use crate::fock::{coherent_state, conditional_phase, fock_state, loss_channel, FockSpace, JointState, ModeState};

const LIGHT: &str = "light";
const ATOM: &str = "sorter.atom";
/// Heralds below this probability carry no conditional state.
const ABSENT_BELOW: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SorterInput {
    Coherent { mean: f64 },
    /// Coherent amplitudes up to `max_photons`, renormalized.
    TruncatedCoherent { mean: f64, max_photons: usize },
    Fock(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SorterConfig {
    pub k: usize,
    pub input: SorterInput,
    /// Use cavity reflection magnitudes, inter-node loss and readout errors.
    pub realistic: bool,
    /// Cavity parameters (including the user's detunings) for realistic mode.
    pub cavity: CqedParams,
    /// Transmission between consecutive nodes (realistic mode).
    pub transmission: f64,
    /// Symmetric readout fidelity (realistic mode).
    pub readout_fidelity: f64,
    /// Largest Fock input of the confusion matrix.
    pub confusion_max_n: usize,
}

impl Default for SorterConfig {
    fn default() -> Self {
        Self {
            k: 2,
            input: SorterInput::TruncatedCoherent {
                mean: 0.5,
                max_photons: 3,
            },
            realistic: false,
            cavity: CqedParams::node1(),
            transmission: 1.0,
            readout_fidelity: 1.0,
            confusion_max_n: 7,
        }
    }
}

impl SorterConfig {
    pub const MAX_NODES: usize = 5;

    pub fn ideal(k: usize, input: SorterInput) -> Self {
        Self {
            k,
            input,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > Self::MAX_NODES {
            return Err(Error::OutOfRange {
                name: "sorter.k".into(),
                value: self.k as f64,
                expected: "1..=5",
            });
        }
        check_unit("sorter.transmission", self.transmission)?;
        check_unit("sorter.readout_fidelity", self.readout_fidelity)?;
        self.cavity.validate()?;
        if self.confusion_max_n > FockSpace::MAX_CUTOFF {
            return Err(Error::Truncation {
                mean: self.confusion_max_n as f64,
                required: self.confusion_max_n,
            });
        }
        self.input_state().map(|_| ())
    }

    /// θ_j = π/2^(j−1) for j = 1..=k.
    pub fn phases(&self) -> Vec<f64> {
        (0..self.k).map(|j| PI / (1u64 << j) as f64).collect()
    }

    pub fn labels(&self) -> usize {
        1 << self.k
    }

    pub fn input_state(&self) -> Result<ModeState> {
        match self.input {
            SorterInput::Coherent { mean } => coherent_state(mean, FockSpace::for_mean_photon(mean)?),
            SorterInput::TruncatedCoherent { mean, max_photons } => {
                ModeState::truncated_coherent(mean, max_photons, FockSpace::new(max_photons.max(1))?)
            }
            SorterInput::Fock(n) => fock_state(n, FockSpace::new(n.max(1))?),
        }
    }

    fn readout(&self) -> Readout {
        if self.realistic {
            Readout::symmetric(self.readout_fidelity)
        } else {
            Readout::perfect()
        }
    }
}

/// Azimuth of the node-j basis as a fraction num/2^j of π, from earlier bits.
fn azimuth_fraction(prior: &[bool]) -> (u64, u64) {
    let j = prior.len() as u32 + 1;
    let known: u64 = prior
        .iter()
        .enumerate()
        .map(|(i, &b)| (b as u64) << i)
        .sum();
    let den = 1u64 << j;
    // β/π = known/2^(j−1) + 1/2 (mod 1)
    ((2 * known + (den >> 1)) % den, den)
}

/// Rotation for the next node given the digits already read (true = 1).
pub fn feed_forward_basis(prior: &[bool], k: usize) -> Result<(Axis, f64)> {
    if prior.len() >= k {
        return Err(Error::Config(format!(
            "{} prior outcomes for a {k}-node sorter",
            prior.len()
        )));
    }
    let (num, den) = azimuth_fraction(prior);
    let axis = if num == 0 {
        Axis::X
    } else if 2 * num == den {
        Axis::Y
    } else {
        Axis::Equatorial(PI * num as f64 / den as f64)
    };
    Ok((axis, FRAC_PI_2))
}

/// Digit read at the next node from its z outcome.
pub fn decode_bit(prior: &[bool], up: bool) -> bool {
    let (num, den) = azimuth_fraction(prior);
    let known = prior
        .iter()
        .enumerate()
        .map(|(i, &b)| (b as u64) << i)
        .sum::<u64>();
    // sign of sin(φ_known − β) with both angles as multiples of π/2^j
    let diff = (2 * known) as i64 - num as i64;
    let s = (PI * diff as f64 / den as f64).sin();
    up != (s > 0.0)
}

fn label_of(bits: &[bool]) -> usize {
    bits.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum()
}

#[derive(Debug, Clone)]
pub struct SorterResult {
    pub label: usize,
    pub probability: f64,
    /// Normalized photon state given this herald; None when the herald never occurs.
    pub state: Option<ModeState>,
    pub fidelity: Option<f64>,
}

/// Heralds for `config.input`, one entry per label 0..2^k.
pub fn run_sorter(config: &SorterConfig) -> Result<Vec<SorterResult>> {
    config.validate()?;
    sort_state(config, config.input_state()?)
}

fn sort_state(config: &SorterConfig, input: ModeState) -> Result<Vec<SorterResult>> {
    let readout = config.readout();
    let phases = config.phases();
    let plus = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut branches: Vec<(Vec<bool>, JointState)> = vec![(Vec::new(), JointState::from_mode(LIGHT, input))];

    for (j, &theta) in phases.iter().enumerate() {
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (bits, light) in branches {
            let light = if config.realistic && j > 0 {
                loss_channel(&light, LIGHT, config.transmission)?
            } else {
                light
            };
            let mut s = light.tensor(&JointState::qubit_pure(ATOM, plus, plus)?)?;
            s = if config.realistic {
                let rc = reflection_coefficients(&config.cavity, true).norm();
                let ru = reflection_coefficients(&config.cavity, false).norm();
                let pair = ReflectionPair::new(Complex64::new(rc, 0.0), Complex64::from_polar(ru, theta))?;
                reflect(&s, ATOM, LIGHT, pair)?
            } else {
                conditional_phase(&s, ATOM, LIGHT, theta, Spin::Down.index())?
            };
            let (axis, angle) = feed_forward_basis(&bits, config.k)?;
            s = rotate(&s, ATOM, axis, angle, 0.0)?;
            let q = s.qubit_index(ATOM)?;
            let keep: Vec<usize> = (0..s.subsystems().len()).filter(|&i| i != q).collect();
            for up in [true, false] {
                let reported = Spin::from_up(up);
                let un = s.contract(&keep, |z| {
                    readout.prob(reported, if z == 0 { Spin::Up } else { Spin::Down })
                });
                let mut b = bits.clone();
                b.push(decode_bit(&bits, up));
                next.push((b, un));
            }
        }
        branches = next;
    }

    let mut results: Vec<SorterResult> = (0..config.labels())
        .map(|label| SorterResult {
            label,
            probability: 0.0,
            state: None,
            fidelity: None,
        })
        .collect();
    let mut unnormalized: Vec<Option<JointState>> = vec![None; config.labels()];
    for (bits, s) in branches {
        let label = label_of(&bits);
        results[label].probability += s.trace().max(0.0);
        unnormalized[label] = Some(match unnormalized[label].take() {
            None => s,
            Some(acc) => acc.with_matrix(acc.matrix() + s.matrix()),
        });
    }
    for (r, s) in results.iter_mut().zip(unnormalized) {
        if r.probability > ABSENT_BELOW {
            if let Some(s) = s {
                let m = s.normalized("herald")?.into_mode_state()?;
                r.fidelity = Some(m.fock_fidelity(r.label).clamp(0.0, 1.0));
                r.state = Some(m);
            }
        }
    }
    Ok(results)
}

/// Row n holds P(herald = m | Fock input n) for every label m.
pub fn herald_confusion_matrix(config: &SorterConfig, n_range: RangeInclusive<usize>) -> Result<Vec<Vec<f64>>> {
    let mut base = *config;
    base.input = SorterInput::Fock(0);
    base.validate()?;
    let top = *n_range.end();
    if top > FockSpace::MAX_CUTOFF {
        return Err(Error::Truncation {
            mean: top as f64,
            required: top,
        });
    }
    let space = FockSpace::new(top.max(1))?;
    n_range
        .map(|n| {
            let res = sort_state(&base, fock_state(n, space)?)?;
            Ok(res.iter().map(|r| r.probability).collect())
        })
        .collect()
}

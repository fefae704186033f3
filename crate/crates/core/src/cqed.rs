//! One atom–cavity node: reflection amplitudes, qubit rotations, dephasing and readout.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_positive, check_unit, Error, Result};
use crate::fock::{Branch, JointState};
use crate::linalg::{ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Basis index: ↑z = 0, ↓z = 1.
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn from_up(up: bool) -> Self {
        if up {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

/// Cavity-QED rates in MHz. Only ratios enter any observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqedParams {
    pub g: f64,
    pub kappa: f64,
    pub kappa_r: f64,
    pub gamma: f64,
    pub delta_c: f64,
    pub delta_a: f64,
}

impl CqedParams {
    pub fn node1() -> Self {
        Self::resonant(7.6, 2.5, 3.0)
    }

    pub fn node2() -> Self {
        Self::resonant(7.6, 2.8, 3.0)
    }

    /// Resonant and fully one-sided (κ_r = κ).
    pub fn resonant(g: f64, kappa: f64, gamma: f64) -> Self {
        Self {
            g,
            kappa,
            kappa_r: kappa,
            gamma,
            delta_c: 0.0,
            delta_a: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("g", self.g)?;
        check_positive("kappa", self.kappa)?;
        check_positive("gamma", self.gamma)?;
        check_positive("kappa_r", self.kappa_r)?;
        if self.kappa_r > self.kappa {
            return Err(Error::OutOfRange {
                name: "kappa_r".into(),
                value: self.kappa_r,
                expected: "<= kappa",
            });
        }
        if !self.delta_c.is_finite() || !self.delta_a.is_finite() {
            return Err(Error::Config("detunings must be finite".into()));
        }
        Ok(())
    }

    pub fn cooperativity(&self) -> f64 {
        self.g * self.g / (2.0 * self.kappa * self.gamma)
    }
}

/// Input-output reflection amplitude of the one-sided cavity, atom coupled or not.
pub fn reflection_coefficients(params: &CqedParams, coupled: bool) -> Complex64 {
    let i = Complex64::i();
    let g2 = if coupled { params.g * params.g } else { 0.0 };
    let atom = Complex64::new(g2, 0.0) / Complex64::new(params.gamma, params.delta_a);
    let num = i * params.delta_c + params.kappa - 2.0 * params.kappa_r + atom;
    let den = i * params.delta_c + params.kappa + atom;
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub r_coupled: Complex64,
    pub r_uncoupled: Complex64,
}

impl ReflectionPair {
    pub fn new(r_coupled: Complex64, r_uncoupled: Complex64) -> Result<Self> {
        for (name, r) in [("r_coupled", r_coupled), ("r_uncoupled", r_uncoupled)] {
            if !(r.norm() <= 1.0 + 1e-12) {
                return Err(Error::OutOfRange {
                    name: name.into(),
                    value: r.norm(),
                    expected: "|r| <= 1",
                });
            }
        }
        Ok(Self {
            r_coupled,
            r_uncoupled,
        })
    }

    /// Lossless controlled-Z: (+1, −1).
    pub fn ideal() -> Self {
        Self {
            r_coupled: ONE,
            r_uncoupled: -ONE,
        }
    }

    /// Plain mirror: the atom state is irrelevant.
    pub fn mirror() -> Self {
        Self {
            r_coupled: ONE,
            r_uncoupled: ONE,
        }
    }

    pub fn from_params(params: &CqedParams) -> Self {
        Self {
            r_coupled: reflection_coefficients(params, true),
            r_uncoupled: reflection_coefficients(params, false),
        }
    }
}

/// Readout model: probabilities of reporting ↑z given the true z state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub p_up_given_up: f64,
    pub p_up_given_down: f64,
}

impl Readout {
    pub fn perfect() -> Self {
        Self::symmetric(1.0)
    }

    /// Misassignment probability 1 − f in both directions.
    pub fn symmetric(fidelity: f64) -> Self {
        Self {
            p_up_given_up: fidelity,
            p_up_given_down: 1.0 - fidelity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("p_up_given_up", self.p_up_given_up)?;
        check_unit("p_up_given_down", self.p_up_given_down)
    }

    /// P(report `reported` | true state `actual`).
    pub fn prob(&self, reported: Spin, actual: Spin) -> f64 {
        let up = match actual {
            Spin::Up => self.p_up_given_up,
            Spin::Down => self.p_up_given_down,
        };
        match reported {
            Spin::Up => up,
            Spin::Down => 1.0 - up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeImperfections {
    /// No-light probability of reporting ↑z after the full Ramsey sequence.
    pub dark_count: f64,
    /// μs; `f64::INFINITY` disables dephasing.
    pub t_coherence: f64,
    pub prep_fidelity: f64,
    pub readout_fidelity: f64,
    /// μs between the two π/2 pulses.
    pub protocol_window: f64,
    /// P(report ↑z | ↓z).
    pub false_bright: f64,
}

impl NodeImperfections {
    pub const DEFAULT_WINDOW_US: f64 = 2.0;

    pub fn ideal() -> Self {
        Self {
            dark_count: 0.0,
            t_coherence: f64::INFINITY,
            prep_fidelity: 1.0,
            readout_fidelity: 1.0,
            protocol_window: Self::DEFAULT_WINDOW_US,
            false_bright: 0.0,
        }
    }

    pub fn node1() -> Self {
        Self {
            dark_count: 0.014,
            t_coherence: 420.0,
            prep_fidelity: 0.99,
            readout_fidelity: 0.99,
            protocol_window: Self::DEFAULT_WINDOW_US,
            false_bright: 0.0,
        }
    }

    pub fn node2() -> Self {
        Self {
            dark_count: 0.004,
            t_coherence: 470.0,
            ..Self::node1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("dark_count", self.dark_count)?;
        check_unit("prep_fidelity", self.prep_fidelity)?;
        check_unit("readout_fidelity", self.readout_fidelity)?;
        check_unit("false_bright", self.false_bright)?;
        check_positive("t_coherence", self.t_coherence)?;
        if !(self.protocol_window >= 0.0) || !self.protocol_window.is_finite() {
            return Err(Error::OutOfRange {
                name: "protocol_window".into(),
                value: self.protocol_window,
                expected: ">= 0",
            });
        }
        Ok(())
    }

    pub fn visibility(&self) -> f64 {
        (-self.protocol_window / self.t_coherence).exp()
    }

    /// Readout used by the protocol: a failed preparation or readout turns a bright
    /// (↑z) atom into a reported ↓z.
    pub fn protocol_readout(&self) -> Readout {
        Readout {
            p_up_given_up: self.prep_fidelity * self.readout_fidelity,
            p_up_given_down: self.false_bright,
        }
    }

    /// Over-rotation δ of each π/2 pulse such that the no-light sequence
    /// R(π/2+δ) · dephase · R(π/2+δ) |↑z⟩ followed by readout reports ↑z with
    /// probability `dark_count`.
    pub fn over_rotation(&self, node: usize) -> Result<f64> {
        calibrate_over_rotation(self.dark_count, self.visibility(), self.protocol_readout())
            .map_err(|floor| Error::DarkCountBudget {
                node,
                dc: self.dark_count,
                floor,
            })
    }
}

/// Returns the achievable floor on the dark count as the error value.
fn calibrate_over_rotation(dc: f64, v: f64, readout: Readout) -> std::result::Result<f64, f64> {
    let (b, f) = (readout.p_up_given_up, readout.p_up_given_down);
    let floor = f + (b - f) * (1.0 - v) / 2.0;
    if b <= f {
        return Err(floor);
    }
    // P(↑z) after the sequence is A = (1 − V cos²δ + sin²δ)/2.
    let a = (dc - f) / (b - f);
    let s2 = (2.0 * a - 1.0 + v) / (1.0 + v);
    if s2 < -1e-15 || s2 > 1.0 {
        return Err(floor);
    }
    Ok(s2.clamp(0.0, 1.0).sqrt().asin())
}

/// Populations p·|↑z⟩⟨↑z| + (1−p)·|↓z⟩⟨↓z|.
pub fn prepare(fidelity: f64) -> Result<DMatrix<Complex64>> {
    check_unit("prep_fidelity", fidelity)?;
    let mut rho = DMatrix::from_element(2, 2, ZERO);
    rho[(0, 0)] = Complex64::new(fidelity, 0.0);
    rho[(1, 1)] = Complex64::new(1.0 - fidelity, 0.0);
    Ok(rho)
}

/// Label of the polarization flag that travels with `mode` through the fiber.
pub fn polarization_label(mode: &str) -> String {
    format!("{mode}.pol")
}

/// Atom-conditioned reflection. If the mode carries a polarization flag, a flagged
/// pulse misses the atom and sees the empty-cavity amplitude.
pub fn reflect(state: &JointState, qubit: &str, mode: &str, pair: ReflectionPair) -> Result<JointState> {
    let q = state.qubit_index(qubit)?;
    let (m, _) = state.mode_index(mode)?;
    let pol = match state.qubit_index(&polarization_label(mode)) {
        Ok(p) => Some(p),
        Err(Error::UnknownSubsystem(_)) => None,
        Err(e) => return Err(e),
    };
    let branches = [
        Branch {
            amplitude: pair.r_coupled,
            ancilla: 0,
        },
        Branch {
            amplitude: pair.r_uncoupled,
            ancilla: 1,
        },
        Branch {
            amplitude: pair.r_uncoupled,
            ancilla: 2,
        },
    ];
    Ok(state.branch_number_kraus(
        m,
        |d| match pol {
            Some(p) if d[p] == 1 => 2,
            _ => d[q],
        },
        &branches,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    X,
    Y,
    /// Equatorial axis at azimuth β (X = 0, Y = π/2).
    Equatorial(f64),
}

impl Axis {
    pub fn azimuth(&self) -> f64 {
        match self {
            Axis::X => 0.0,
            Axis::Y => std::f64::consts::FRAC_PI_2,
            Axis::Equatorial(b) => *b,
        }
    }
}

/// R_axis(θ) = cos(θ/2) I − i sin(θ/2) (cos β X + sin β Y) in the (↑z, ↓z) basis.
pub fn rotation_matrix(axis: Axis, theta: f64) -> DMatrix<Complex64> {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    let (off_upper, off_lower) = match axis {
        Axis::Y => (Complex64::new(-s, 0.0), Complex64::new(s, 0.0)),
        Axis::X => (Complex64::new(0.0, -s), Complex64::new(0.0, -s)),
        Axis::Equatorial(b) => (
            Complex64::new(0.0, -s) * Complex64::from_polar(1.0, -b),
            Complex64::new(0.0, -s) * Complex64::from_polar(1.0, b),
        ),
    };
    DMatrix::from_row_slice(2, 2, &[c, off_upper, off_lower, c])
}

pub fn rotate(state: &JointState, qubit: &str, axis: Axis, theta: f64, over_rotation: f64) -> Result<JointState> {
    let q = state.qubit_index(qubit)?;
    Ok(state.apply_kraus(&[q], &[rotation_matrix(axis, theta + over_rotation)]))
}

/// Scales the qubit coherences by exp(−window/t_coherence).
pub fn dephase(state: &JointState, qubit: &str, window: f64, t_coherence: f64) -> Result<JointState> {
    let q = state.qubit_index(qubit)?;
    if !(window >= 0.0) {
        return Err(Error::OutOfRange {
            name: "window".into(),
            value: window,
            expected: ">= 0",
        });
    }
    check_positive("t_coherence", t_coherence)?;
    let v = Complex64::new((-window / t_coherence).exp(), 0.0);
    if v == ONE {
        return Ok(state.clone());
    }
    Ok(state.scale_elements(|a, b| if a[q] == b[q] { ONE } else { v }))
}

/// Result of a z-basis readout of one qubit.
#[derive(Debug, Clone)]
pub struct StateDetection {
    pub p_up: f64,
    pub p_down: f64,
    up: Option<JointState>,
    down: Option<JointState>,
}

impl StateDetection {
    pub fn probability(&self, reported: Spin) -> f64 {
        match reported {
            Spin::Up => self.p_up,
            Spin::Down => self.p_down,
        }
    }

    /// Normalized state of the remaining subsystems given the reported outcome.
    pub fn conditional(&self, reported: Spin) -> Result<&JointState> {
        let s = match reported {
            Spin::Up => &self.up,
            Spin::Down => &self.down,
        };
        s.as_ref()
            .ok_or_else(|| Error::ZeroProbability(format!("qubit reported {reported:?}")))
    }
}

pub fn detect_state(state: &JointState, qubit: &str, readout: Readout) -> Result<StateDetection> {
    readout.validate()?;
    let q = state.qubit_index(qubit)?;
    let keep: Vec<usize> = (0..state.subsystems().len()).filter(|&i| i != q).collect();
    let branch = |reported: Spin| {
        let un = state.contract(&keep, |z| {
            readout.prob(reported, if z == 0 { Spin::Up } else { Spin::Down })
        });
        let p = un.trace().max(0.0);
        let normalized = if p > 0.0 { un.normalized("readout").ok() } else { None };
        (p, normalized)
    };
    let (p_up, up) = branch(Spin::Up);
    let (p_down, down) = branch(Spin::Down);
    Ok(StateDetection {
        p_up,
        p_down,
        up,
        down,
    })
}

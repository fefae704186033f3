use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_positive, Error, Result};
use crate::linalg;

/// Photon-number cutoff of one bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    n_max: usize,
}

impl FockSpace {
    /// Largest cutoff the adaptive rule will pick.
    pub const MAX_CUTOFF: usize = 24;
    /// Allowed Poisson weight above the cutoff, also applied to the ⟨n⟩ and
    /// ⟨n(n−1)⟩ contributions of the tail so g² survives truncation.
    pub const TAIL_TOLERANCE: f64 = 1e-9;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::OutOfRange {
                name: "n_max".into(),
                value: 0.0,
                expected: ">= 1",
            });
        }
        Ok(Self { n_max })
    }

    /// Smallest cutoff whose Poisson tails at `mean` are below [`Self::TAIL_TOLERANCE`].
    pub fn for_mean_photon(mean: f64) -> Result<Self> {
        let required = required_cutoff(mean)?;
        if required > Self::MAX_CUTOFF {
            return Err(Error::Truncation { mean, required });
        }
        Self::new(required)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn check_mean(&self, mean: f64) -> Result<()> {
        let required = required_cutoff(mean)?;
        if required > self.n_max {
            Err(Error::Truncation { mean, required })
        } else {
            Ok(())
        }
    }
}

/// Poisson weight strictly above `n_max`, summed term by term so small tails keep precision.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut term = (-mean).exp();
    for n in 1..=n_max + 1 {
        term *= mean / n as f64;
    }
    let mut tail = 0.0;
    let mut n = n_max + 1;
    while term > tail * 1e-18 && term > 0.0 {
        tail += term;
        n += 1;
        term *= mean / n as f64;
        if n > n_max + 10_000 {
            break;
        }
    }
    tail
}

fn required_cutoff(mean: f64) -> Result<usize> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::OutOfRange {
            name: "mean photon number".into(),
            value: mean,
            expected: ">= 0 and finite",
        });
    }
    let fits = |n: usize| (0..=2).all(|k| factorial_moment_tail(mean, n, k) < FockSpace::TAIL_TOLERANCE);
    let mut n = 1;
    while !fits(n) {
        n += 1;
    }
    Ok(n)
}

/// Σ_{n > n_max} n(n−1)…(n−k+1) P(n) = μ^k · P(N > n_max − k).
pub fn factorial_moment_tail(mean: f64, n_max: usize, k: usize) -> f64 {
    if n_max < k {
        return mean.powi(k as i32);
    }
    mean.powi(k as i32) * poisson_tail(mean, n_max - k)
}

/// Density matrix of a single truncated mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    space: FockSpace,
    rho: DMatrix<Complex64>,
}

impl ModeState {
    pub fn from_matrix(space: FockSpace, rho: DMatrix<Complex64>) -> Result<Self> {
        if rho.nrows() != space.dim() || rho.ncols() != space.dim() {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, space needs {}",
                rho.nrows(),
                rho.ncols(),
                space.dim()
            )));
        }
        linalg::validate_density(&rho)?;
        Ok(Self { space, rho })
    }

    pub(crate) fn from_matrix_unchecked(space: FockSpace, rho: DMatrix<Complex64>) -> Self {
        Self { space, rho }
    }

    pub fn from_amplitudes(space: FockSpace, amps: &[Complex64]) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                space.dim()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let scale = 1.0 / norm.sqrt();
        let v: Vec<Complex64> = amps.iter().map(|a| a * scale).collect();
        Ok(Self {
            space,
            rho: linalg::outer(&v),
        })
    }

    pub fn vacuum(space: FockSpace) -> Self {
        fock_state(0, space).expect("vacuum always fits")
    }

    /// Coherent state truncated at `cutoff` photons and renormalized, with no tail check.
    pub fn truncated_coherent(mean: f64, cutoff: usize, space: FockSpace) -> Result<Self> {
        if !(mean >= 0.0) {
            return Err(Error::OutOfRange {
                name: "mean photon number".into(),
                value: mean,
                expected: ">= 0",
            });
        }
        if cutoff > space.n_max() {
            return Err(Error::Truncation {
                mean,
                required: cutoff,
            });
        }
        let amps = poisson_amplitudes(mean, space.n_max())
            .into_iter()
            .enumerate()
            .map(|(n, a)| if n <= cutoff { a } else { Complex64::new(0.0, 0.0) })
            .collect::<Vec<_>>();
        Self::from_amplitudes(space, &amps)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.space.dim()).map(|n| self.rho[(n, n)].re).collect()
    }

    pub fn mean_photon(&self) -> f64 {
        self.moments().0
    }

    /// (⟨n⟩, ⟨n(n−1)⟩).
    pub fn moments(&self) -> (f64, f64) {
        self.populations()
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(m1, m2), (n, p)| {
                let n = n as f64;
                (m1 + n * p, m2 + n * (n - 1.0) * p)
            })
    }

    /// ⟨(a†)^k a^l⟩ for normally ordered moment checks.
    pub fn normal_moment(&self, k: usize, l: usize) -> Complex64 {
        let dim = self.space.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        // (a†)^k a^l |n⟩ ∝ |n−l+k⟩, so Tr(ρ a†^k a^l) picks ρ[n, n−l+k].
        for n in l..dim {
            let m = n - l + k;
            if m >= dim {
                continue;
            }
            let c = falling_sqrt(n, l) * falling_sqrt(m, k);
            acc += self.rho[(n, m)] * c;
        }
        acc
    }

    pub fn purity(&self) -> f64 {
        linalg::purity(&self.rho)
    }

    pub fn fock_fidelity(&self, n: usize) -> f64 {
        if n < self.space.dim() {
            self.rho[(n, n)].re
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        linalg::validate_density(&self.rho)
    }
}

// sqrt(n (n−1) ... (n−k+1))
fn falling_sqrt(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product::<f64>().sqrt()
}

pub(crate) fn poisson_amplitudes(mean: f64, n_max: usize) -> Vec<Complex64> {
    let alpha = mean.sqrt();
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut a = (-mean / 2.0).exp();
    for n in 0..=n_max {
        if n > 0 {
            a *= alpha / (n as f64).sqrt();
        }
        amps.push(Complex64::new(a, 0.0));
    }
    amps
}

/// Coherent state |α⟩ with α = √μ, renormalized after truncation.
pub fn coherent_state(mean: f64, space: FockSpace) -> Result<ModeState> {
    space.check_mean(mean)?;
    ModeState::from_amplitudes(space, &poisson_amplitudes(mean, space.n_max()))
}

pub fn fock_state(n: usize, space: FockSpace) -> Result<ModeState> {
    if n > space.n_max() {
        return Err(Error::Truncation {
            mean: n as f64,
            required: n,
        });
    }
    let mut rho = DMatrix::zeros(space.dim(), space.dim());
    rho[(n, n)] = Complex64::new(1.0, 0.0);
    Ok(ModeState { space, rho })
}

/// Thermal state with mean occupancy `nbar`, renormalized after truncation.
pub fn thermal_state(nbar: f64, space: FockSpace) -> Result<ModeState> {
    if nbar == 0.0 {
        return Ok(ModeState::vacuum(space));
    }
    check_positive("thermal occupancy", nbar)?;
    let ratio = nbar / (1.0 + nbar);
    let weights: Vec<f64> = (0..space.dim()).map(|n| ratio.powi(n as i32)).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = DMatrix::zeros(space.dim(), space.dim());
    for (n, w) in weights.iter().enumerate() {
        rho[(n, n)] = Complex64::new(w / total, 0.0);
    }
    Ok(ModeState { space, rho })
}

/// (p_even, p_odd).
pub fn parity_probabilities(state: &ModeState) -> (f64, f64) {
    let pops = state.populations();
    let odd: f64 = pops.iter().skip(1).step_by(2).sum();
    let even: f64 = pops.iter().step_by(2).sum();
    let total = even + odd;
    (even / total, odd / total)
}

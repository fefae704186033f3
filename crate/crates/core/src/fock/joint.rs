use nalgebra::DMatrix;
use num_complex::Complex64;

use super::space::{FockSpace, ModeState};
use crate::error::{Error, Result};
use crate::linalg::{self, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsystemKind {
    /// Two-level system, basis order (↑z, ↓z).
    Qubit,
    Mode(FockSpace),
}

impl SubsystemKind {
    pub fn dim(&self) -> usize {
        match self {
            SubsystemKind::Qubit => 2,
            SubsystemKind::Mode(space) => space.dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subsystem {
    pub label: String,
    pub kind: SubsystemKind,
}

/// Density operator on an ordered tensor product of labelled qubits and modes.
///
/// The first subsystem is the most significant index, as in `kron(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    subsystems: Vec<Subsystem>,
    rho: DMatrix<Complex64>,
}

/// Per-branch amplitude for [`JointState::branch_number_kraus`]. Branches sharing an
/// `ancilla` id scatter lost photons into the same environment mode.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Branch {
    pub amplitude: Complex64,
    pub ancilla: usize,
}

impl JointState {
    pub fn from_mode(label: &str, mode: ModeState) -> Self {
        let space = mode.space();
        Self {
            subsystems: vec![Subsystem {
                label: label.to_string(),
                kind: SubsystemKind::Mode(space),
            }],
            rho: mode.matrix().clone(),
        }
    }

    pub fn vacuum_mode(label: &str, space: FockSpace) -> Self {
        Self::from_mode(label, ModeState::vacuum(space))
    }

    pub fn qubit(label: &str, rho: DMatrix<Complex64>) -> Result<Self> {
        if rho.nrows() != 2 || rho.ncols() != 2 {
            return Err(Error::InvalidState("qubit state must be 2x2".into()));
        }
        linalg::validate_density(&rho)?;
        Ok(Self {
            subsystems: vec![Subsystem {
                label: label.to_string(),
                kind: SubsystemKind::Qubit,
            }],
            rho,
        })
    }

    /// Pure qubit state from amplitudes on (↑z, ↓z); normalized here.
    pub fn qubit_pure(label: &str, up: Complex64, down: Complex64) -> Result<Self> {
        let norm = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero qubit vector".into()));
        }
        let v = [up / norm, down / norm];
        Self::qubit(label, linalg::outer(&v))
    }

    pub fn from_parts(subsystems: Vec<Subsystem>, rho: DMatrix<Complex64>) -> Result<Self> {
        check_labels(&subsystems)?;
        let dim: usize = subsystems.iter().map(|s| s.kind.dim()).product();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{} but subsystems need {dim}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        linalg::validate_density(&rho)?;
        Ok(Self { subsystems, rho })
    }

    pub(crate) fn with_matrix(&self, rho: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(rho.nrows(), self.dim());
        Self {
            subsystems: self.subsystems.clone(),
            rho,
        }
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &JointState) -> Result<Self> {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        check_labels(&subsystems)?;
        Ok(Self {
            subsystems,
            rho: self.rho.kronecker(&other.rho),
        })
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.kind.dim()).collect()
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn qubit_count(&self) -> usize {
        self.subsystems
            .iter()
            .filter(|s| s.kind == SubsystemKind::Qubit)
            .count()
    }

    pub fn mode_spaces(&self) -> Vec<FockSpace> {
        self.subsystems
            .iter()
            .filter_map(|s| match s.kind {
                SubsystemKind::Mode(space) => Some(space),
                SubsystemKind::Qubit => None,
            })
            .collect()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.rho).re
    }

    pub fn purity(&self) -> f64 {
        linalg::purity(&self.rho)
    }

    pub fn validate(&self) -> Result<()> {
        linalg::validate_density(&self.rho)
    }

    pub fn has(&self, label: &str) -> bool {
        self.subsystems.iter().any(|s| s.label == label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownSubsystem(label.to_string()))
    }

    pub fn qubit_index(&self, label: &str) -> Result<usize> {
        let idx = self.index_of(label)?;
        match self.subsystems[idx].kind {
            SubsystemKind::Qubit => Ok(idx),
            SubsystemKind::Mode(_) => Err(Error::WrongKind {
                label: label.to_string(),
                expected: "qubit",
            }),
        }
    }

    pub fn mode_index(&self, label: &str) -> Result<(usize, FockSpace)> {
        let idx = self.index_of(label)?;
        match self.subsystems[idx].kind {
            SubsystemKind::Mode(space) => Ok((idx, space)),
            SubsystemKind::Qubit => Err(Error::WrongKind {
                label: label.to_string(),
                expected: "mode",
            }),
        }
    }

    /// Reduced state on `keep`, subsystems kept in their original order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<JointState> {
        if keep.is_empty() {
            return Err(Error::Config("partial trace needs at least one kept subsystem".into()));
        }
        let mut idx = keep
            .iter()
            .map(|l| self.index_of(l))
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(self.contract(&idx, |_| 1.0))
    }

    pub fn reduced_mode(&self, label: &str) -> Result<ModeState> {
        let (idx, space) = self.mode_index(label)?;
        let reduced = self.contract(&[idx], |_| 1.0);
        Ok(ModeState::from_matrix_unchecked(space, reduced.rho))
    }

    pub fn reduced_qubit(&self, label: &str) -> Result<DMatrix<Complex64>> {
        let idx = self.qubit_index(label)?;
        Ok(self.contract(&[idx], |_| 1.0).rho)
    }

    /// Diagonal of the density matrix (joint basis populations).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).collect()
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::new(&self.dims())
    }

    /// Σ_x w_x ⟨x|ρ|x⟩ over the traced subsystems (complement of `keep`), unnormalized.
    /// `weight` receives the flat index of the traced multi-index.
    pub(crate) fn contract(&self, keep: &[usize], weight: impl Fn(usize) -> f64) -> JointState {
        let dims = self.dims();
        let layout = Layout::new(&dims);
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
        let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
        let dk: usize = keep_dims.iter().product();
        let de: usize = traced_dims.iter().product();
        let keep_offsets = layout.offsets(keep);
        let traced_offsets = layout.offsets(&traced);
        let weights: Vec<f64> = (0..de).map(&weight).collect();

        let mut out = DMatrix::from_element(dk, dk, ZERO);
        for r1 in 0..dk {
            for r2 in 0..dk {
                let mut acc = ZERO;
                for (e, w) in weights.iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    let i = keep_offsets[r1] + traced_offsets[e];
                    let j = keep_offsets[r2] + traced_offsets[e];
                    acc += self.rho[(i, j)] * *w;
                }
                out[(r1, r2)] = acc;
            }
        }
        let subsystems = keep.iter().map(|&i| self.subsystems[i].clone()).collect();
        JointState {
            subsystems,
            rho: out,
        }
    }

    /// Σ_K K ρ K† with every Kraus operator acting on `targets` (flattened in list order).
    pub(crate) fn apply_kraus(&self, targets: &[usize], kraus: &[DMatrix<Complex64>]) -> JointState {
        let layout = self.layout();
        let dim = self.dim();
        let target_offsets = layout.offsets(targets);
        let dt = target_offsets.len();
        let (t_of, base_of) = layout.split(targets);

        let mut out = DMatrix::from_element(dim, dim, ZERO);
        let mut left = DMatrix::from_element(dim, dim, ZERO);
        for k in kraus {
            debug_assert_eq!(k.nrows(), dt);
            for j in 0..dim {
                for i in 0..dim {
                    let ti = t_of[i];
                    let bi = base_of[i];
                    let mut acc = ZERO;
                    for (tp, off) in target_offsets.iter().enumerate() {
                        let kv = k[(ti, tp)];
                        if kv != ZERO {
                            acc += kv * self.rho[(bi + off, j)];
                        }
                    }
                    left[(i, j)] = acc;
                }
            }
            for j in 0..dim {
                let tj = t_of[j];
                let bj = base_of[j];
                for i in 0..dim {
                    let mut acc = ZERO;
                    for (tp, off) in target_offsets.iter().enumerate() {
                        let kv = k[(tj, tp)];
                        if kv != ZERO {
                            acc += left[(i, bj + off)] * kv.conj();
                        }
                    }
                    out[(i, j)] += acc;
                }
            }
        }
        self.with_matrix(out)
    }

    /// Number-lowering channel on `mode` whose amplitude depends on the branch of the
    /// remaining subsystems. `branch_of` sees the digits with the mode digit zeroed.
    ///
    /// Kraus family: K_0 = Σ_b P_b ⊗ r_b^n̂ and, for k ≥ 1, one K_{a,k} per ancilla a
    /// collecting the branches that leak into it.
    pub(crate) fn branch_number_kraus(
        &self,
        mode: usize,
        branch_of: impl Fn(&[usize]) -> usize,
        branches: &[Branch],
    ) -> JointState {
        let layout = self.layout();
        let dim = self.dim();
        let d = layout.dims[mode];
        let stride = layout.strides[mode];
        let coeffs: Vec<Vec<Vec<Complex64>>> =
            branches.iter().map(|b| lowering_coefficients(b.amplitude, d)).collect();

        let mut n_of = vec![0usize; dim];
        let mut base_of = vec![0usize; dim];
        let mut b_of = vec![0usize; dim];
        let mut digits = vec![0usize; layout.dims.len()];
        for i in 0..dim {
            layout.digits_into(i, &mut digits);
            n_of[i] = digits[mode];
            base_of[i] = i - digits[mode] * stride;
            digits[mode] = 0;
            b_of[i] = branch_of(&digits);
        }

        let mut out = DMatrix::from_element(dim, dim, ZERO);
        for j in 0..dim {
            let (m2, base2, b2) = (n_of[j], base_of[j], b_of[j]);
            for i in 0..dim {
                let (m1, base1, b1) = (n_of[i], base_of[i], b_of[i]);
                let shared = branches[b1].ancilla == branches[b2].ancilla;
                let kmax = if shared { d - 1 - m1.max(m2) } else { 0 };
                let mut acc = ZERO;
                for k in 0..=kmax {
                    let c = coeffs[b1][k][m1 + k] * coeffs[b2][k][m2 + k].conj();
                    if c != ZERO {
                        acc += c * self.rho[(base1 + (m1 + k) * stride, base2 + (m2 + k) * stride)];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        self.with_matrix(out)
    }

    /// Multiply ρ[i, j] by `factor(digits_i, digits_j)`.
    pub(crate) fn scale_elements(&self, factor: impl Fn(&[usize], &[usize]) -> Complex64) -> JointState {
        let layout = self.layout();
        let dim = self.dim();
        let n = layout.dims.len();
        let mut table = vec![0usize; dim * n];
        for i in 0..dim {
            layout.digits_into(i, &mut table[i * n..(i + 1) * n]);
        }
        let mut out = self.rho.clone();
        for j in 0..dim {
            let dj = &table[j * n..(j + 1) * n];
            for i in 0..dim {
                let di = &table[i * n..(i + 1) * n];
                out[(i, j)] *= factor(di, dj);
            }
        }
        self.with_matrix(out)
    }

    /// Rescale so the trace is one; errors if the trace vanishes.
    pub(crate) fn normalized(mut self, what: &str) -> Result<JointState> {
        let tr = self.trace();
        if !(tr > 0.0) {
            return Err(Error::ZeroProbability(what.to_string()));
        }
        self.rho /= Complex64::new(tr, 0.0);
        Ok(self)
    }

    pub(crate) fn into_mode_state(self) -> Result<ModeState> {
        match self.subsystems.as_slice() {
            [Subsystem {
                kind: SubsystemKind::Mode(space),
                ..
            }] => Ok(ModeState::from_matrix_unchecked(*space, self.rho)),
            _ => Err(Error::InvalidState("state is not a single mode".into())),
        }
    }
}

fn check_labels(subsystems: &[Subsystem]) -> Result<()> {
    for (i, s) in subsystems.iter().enumerate() {
        if subsystems[..i].iter().any(|o| o.label == s.label) {
            return Err(Error::DuplicateLabel(s.label.clone()));
        }
    }
    Ok(())
}

/// c[k][n] = √C(n,k) r^{n−k} t^k with t = √(1−|r|²): amplitude for losing k of n photons.
fn lowering_coefficients(r: Complex64, d: usize) -> Vec<Vec<Complex64>> {
    let t = (1.0 - r.norm_sqr()).max(0.0).sqrt();
    (0..d)
        .map(|k| {
            (0..d)
                .map(|n| {
                    if k > n {
                        ZERO
                    } else {
                        let rp = if n - k == 0 { ONE } else { r.powu((n - k) as u32) };
                        rp * (linalg::binomial(n, k).sqrt() * t.powi(k as i32))
                    }
                })
                .collect()
        })
        .collect()
}

/// Row-major index arithmetic over subsystem dimensions.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub dims: Vec<usize>,
    pub strides: Vec<usize>,
}

impl Layout {
    pub fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Self {
            dims: dims.to_vec(),
            strides,
        }
    }

    pub fn digits_into(&self, mut index: usize, out: &mut [usize]) {
        for (k, &s) in self.strides.iter().enumerate() {
            out[k] = index / s;
            index %= s;
        }
    }

    /// Offsets of every multi-index over `subs` (flattened in list order).
    pub fn offsets(&self, subs: &[usize]) -> Vec<usize> {
        let total: usize = subs.iter().map(|&s| self.dims[s]).product();
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut off = 0;
            for &s in subs.iter().rev() {
                let d = self.dims[s];
                off += (rem % d) * self.strides[s];
                rem /= d;
            }
            out.push(off);
        }
        out
    }

    /// For every full index: (flat index over `subs`, index with those digits zeroed).
    pub fn split(&self, subs: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let dim: usize = self.dims.iter().product();
        let mut digits = vec![0; self.dims.len()];
        let mut t_of = Vec::with_capacity(dim);
        let mut base_of = Vec::with_capacity(dim);
        for i in 0..dim {
            self.digits_into(i, &mut digits);
            let mut t = 0;
            let mut base = i;
            for &s in subs {
                t = t * self.dims[s] + digits[s];
                base -= digits[s] * self.strides[s];
            }
            t_of.push(t);
            base_of.push(base);
        }
        (t_of, base_of)
    }
}

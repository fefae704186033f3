//! Photon-counting trajectory sampler of the same experiment.
//!
//! Each trial draws a photon number, follows which scattering channel (if any) took
//! photons at every node, carries the atom as a pure two-level amplitude, and samples
//! readout and clicks. Because every optical element only lowers photon number and
//! all measurements are diagonal in it, this unraveling reproduces the exact tables.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::cqed::{Readout, ReflectionPair};
use crate::error::{Error, Result};
use crate::estimators::{Cell, EstimateRow, EstimateTable, G2Condition, G2Row, Quantity, SingleNodeRow};
use crate::linalg;
use crate::par::{par_map, par_range};
use crate::protocol::{ExperimentConfig, InputKind, Outcome, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Input = 0,
    Node1 = 1,
    Fiber = 2,
    Node2 = 3,
    DetectionPath = 4,
    Atoms = 5,
    Hbt = 6,
}

/// Counter-based stream keyed by (seed, trial, stage): identical draws regardless of
/// which thread runs the trial.
#[derive(Debug, Clone)]
pub struct TrialRng {
    base: ChaCha8Rng,
}

impl TrialRng {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn stage(&self, trial: u64, stage: Stage) -> ChaCha8Rng {
        let mut r = self.base.clone();
        r.set_stream(trial);
        r.set_word_pos((stage as u128) << 40);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub input_photons: u32,
    /// Photons left after node 1, the fiber, node 2 and the detection path.
    pub survivors: [u32; 4],
    /// Pulse arrived at node 2 in the non-interacting polarization.
    pub scrambled: bool,
    /// True z state after the final pulse (before readout errors).
    pub true_up: [Option<bool>; 2],
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy)]
struct NodeModel {
    pair: ReflectionPair,
    delta: f64,
    visibility: f64,
    readout: Readout,
}

/// Pre-resolved sampling constants for one config and topology.
#[derive(Debug, Clone)]
pub struct Sampler {
    topology: Topology,
    nodes: [Option<NodeModel>; 2],
    input: InputKind,
    transmission: f64,
    scramble: f64,
    detection: f64,
    eta: [f64; 2],
    p_dark: [f64; 2],
    rng: TrialRng,
}

impl Sampler {
    pub fn new(config: &ExperimentConfig, topology: Topology, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut nodes = [None, None];
        for node in topology.nodes() {
            let nc = config.node(node)?;
            let imp = &nc.imperfections;
            nodes[node - 1] = Some(NodeModel {
                pair: nc.pair(),
                delta: imp.over_rotation(node)?,
                visibility: imp.visibility(),
                readout: imp.protocol_readout(),
            });
        }
        Ok(Self {
            topology,
            nodes,
            input: config.input_kind,
            transmission: config.channel.transmission,
            scramble: match topology {
                Topology::Single(1) => 0.0,
                _ => config.channel.scramble_probability(),
            },
            detection: config.detection_efficiency,
            eta: [config.detectors[0].efficiency, config.detectors[1].efficiency],
            p_dark: [config.detectors[0].p_dark(), config.detectors[1].p_dark()],
            rng: TrialRng::new(seed),
        })
    }

    pub fn sample(&self, mu: f64, trial: u64) -> TrialRecord {
        let input_photons = match self.input {
            InputKind::Fock(n) => n as u32,
            InputKind::Coherent if mu > 0.0 => {
                let mut r = self.rng.stage(trial, Stage::Input);
                Poisson::new(mu).expect("positive mean").sample(&mut r) as u32
            }
            InputKind::Coherent => 0,
        };

        let mut atoms: [Option<[Complex64; 2]>; 2] = [None, None];
        for (slot, model) in atoms.iter_mut().zip(&self.nodes) {
            if let Some(m) = model {
                let half = (FRAC_PI_2 + m.delta) / 2.0;
                *slot = Some([
                    Complex64::new(half.cos(), 0.0),
                    Complex64::new(half.sin(), 0.0),
                ]);
            }
        }

        let mut n = input_photons;
        let mut survivors = [0u32; 4];

        if let (Some(m), Some(a)) = (&self.nodes[0], atoms[0].as_mut()) {
            let mut r = self.rng.stage(trial, Stage::Node1);
            n = scatter(&mut r, a, n, m.pair);
        }
        survivors[0] = n;

        let mut r = self.rng.stage(trial, Stage::Fiber);
        n = binomial(&mut r, n, self.transmission);
        let scrambled = self.scramble > 0.0 && r.random::<f64>() < self.scramble;
        survivors[1] = n;

        if let (Some(m), Some(a)) = (&self.nodes[1], atoms[1].as_mut()) {
            let mut r = self.rng.stage(trial, Stage::Node2);
            n = if scrambled {
                binomial(&mut r, n, m.pair.r_uncoupled.norm_sqr())
            } else {
                scatter(&mut r, a, n, m.pair)
            };
        }
        survivors[2] = n;

        let mut r = self.rng.stage(trial, Stage::DetectionPath);
        n = binomial(&mut r, n, self.detection);
        survivors[3] = n;

        let mut r = self.rng.stage(trial, Stage::Atoms);
        let mut true_up = [None, None];
        let mut ups = [None, None];
        for k in 0..2 {
            if let (Some(m), Some(a)) = (&self.nodes[k], atoms[k]) {
                let mut a = a;
                if r.random::<f64>() < (1.0 - m.visibility) / 2.0 {
                    a[1] = -a[1];
                }
                let half = (FRAC_PI_2 + m.delta) / 2.0;
                let up_amp = a[0] * half.cos() - a[1] * half.sin();
                let norm = a[0].norm_sqr() + a[1].norm_sqr();
                let is_up = r.random::<f64>() < up_amp.norm_sqr() / norm;
                let p_report = if is_up {
                    m.readout.p_up_given_up
                } else {
                    m.readout.p_up_given_down
                };
                true_up[k] = Some(is_up);
                ups[k] = Some(r.random::<f64>() < p_report);
            }
        }

        let mut r = self.rng.stage(trial, Stage::Hbt);
        let mut clicks = [false, false];
        for _ in 0..n {
            let port = usize::from(r.random::<f64>() >= 0.5);
            if r.random::<f64>() < self.eta[port] {
                clicks[port] = true;
            }
        }
        for (c, pd) in clicks.iter_mut().zip(self.p_dark) {
            if r.random::<f64>() < pd {
                *c = true;
            }
        }

        TrialRecord {
            input_photons,
            survivors,
            scrambled,
            true_up,
            outcome: Outcome {
                ups,
                click_a: clicks[0],
                click_b: clicks[1],
            },
        }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }
}

fn binomial(r: &mut ChaCha8Rng, n: u32, p: f64) -> u32 {
    if n == 0 || p >= 1.0 {
        return n;
    }
    if p <= 0.0 {
        return 0;
    }
    Binomial::new(n as u64, p).expect("p in (0,1)").sample(r) as u32
}

/// One reflection off an atom in amplitude state `a`. Either no photon leaks (atom
/// picks up r_c^n, r_u^n) or at least one leaks through the branch-specific ancilla,
/// which projects the atom onto that branch.
fn scatter(r: &mut ChaCha8Rng, a: &mut [Complex64; 2], n: u32, pair: ReflectionPair) -> u32 {
    if n == 0 {
        return 0;
    }
    let amps = [pair.r_coupled, pair.r_uncoupled];
    let norm = a[0].norm_sqr() + a[1].norm_sqr();
    let w = [a[0].norm_sqr() / norm, a[1].norm_sqr() / norm];
    let keep = [amps[0].norm_sqr().powi(n as i32), amps[1].norm_sqr().powi(n as i32)];
    let p_none = w[0] * keep[0] + w[1] * keep[1];
    let u: f64 = r.random::<f64>();
    if u < p_none {
        a[0] *= amps[0].powu(n);
        a[1] *= amps[1].powu(n);
        return n;
    }
    let branch = if u < p_none + w[0] * (1.0 - keep[0]) { 0 } else { 1 };
    let survive = amps[branch].norm_sqr();
    let lost = truncated_binomial(r, n, 1.0 - survive);
    let kept = n - lost;
    a[branch] = Complex64::new(1.0, 0.0);
    a[1 - branch] = Complex64::new(0.0, 0.0);
    kept
}

/// Binomial(n, p) conditioned on at least one success.
fn truncated_binomial(r: &mut ChaCha8Rng, n: u32, p: f64) -> u32 {
    let q = 1.0 - p;
    let total = 1.0 - q.powi(n as i32);
    let mut u = r.random::<f64>() * total;
    for k in 1..=n {
        let pk = linalg::binomial(n as usize, k as usize) * p.powi(k as i32) * q.powi((n - k) as i32);
        if u < pk {
            return k;
        }
        u -= pk;
    }
    n
}

/// One trial of `config` at mean photon number `mu`.
pub fn sample_trial(config: &ExperimentConfig, mu: f64, trial: u64) -> Result<TrialRecord> {
    Ok(Sampler::new(config, Topology::Cascade, config.seed)?.sample(mu, trial))
}

/// Binomial standard error; p̂ is kept off 0 and 1 by half a count.
pub fn binomial_stderr(successes: u64, n: u64) -> f64 {
    let nf = n as f64;
    let p = (successes as f64 / nf).clamp(0.5 / nf, 1.0 - 0.5 / nf);
    (p * (1.0 - p) / nf).sqrt()
}

fn cell_from_counts(successes: u64, n: u64) -> Cell {
    if n == 0 {
        Cell::absent()
    } else {
        Cell::estimate(successes as f64 / n as f64, binomial_stderr(successes, n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mu: f64,
    pub trials: u64,
    pub cells: [Cell; 9],
    /// Size of each cell's conditioned subsample.
    pub accepted: [u64; 9],
}

impl McEstimate {
    pub fn row(&self) -> EstimateRow {
        EstimateRow {
            mu: self.mu,
            cells: self.cells,
        }
    }

    pub fn accepted(&self, q: Quantity) -> u64 {
        let idx = Quantity::ALL.iter().position(|&x| x == q).expect("listed");
        self.accepted[idx]
    }
}

/// Stream offset separating the sweep points of one run.
fn point_stream(point: usize) -> u64 {
    (point as u64) << 40
}

fn sample_records(sampler: &Sampler, mu: f64, point: usize, trials: u64) -> Vec<Outcome> {
    let offset = point_stream(point);
    par_range(trials, |t| sampler.sample(mu, offset + t).outcome)
}

fn aggregate(mu: f64, trials: u64, records: &[Outcome]) -> McEstimate {
    let mut hits = [0u64; 9];
    let mut accepted = [0u64; 9];
    for o in records {
        for (k, q) in Quantity::ALL.iter().enumerate() {
            if q.given(o) {
                accepted[k] += 1;
                if q.event(o) {
                    hits[k] += 1;
                }
            }
        }
    }
    let mut cells = [Cell::absent(); 9];
    for k in 0..9 {
        cells[k] = cell_from_counts(hits[k], accepted[k]);
    }
    McEstimate {
        mu,
        trials,
        cells,
        accepted,
    }
}

/// Monte Carlo estimate of every table cell at one μ (sweep point 0 of the seed).
pub fn estimate(config: &ExperimentConfig, mu: f64, trials: u64) -> Result<McEstimate> {
    estimate_point(config, mu, 0, trials)
}

fn estimate_point(config: &ExperimentConfig, mu: f64, point: usize, trials: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let sampler = Sampler::new(config, Topology::Cascade, config.seed)?;
    Ok(aggregate(mu, trials, &sample_records(&sampler, mu, point, trials)))
}

/// Whole sweep with `config.trials` trials per point.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<McEstimate>> {
    let points: Vec<(usize, f64)> = config.mean_photon_sweep.iter().cloned().enumerate().collect();
    points
        .iter()
        .map(|&(i, mu)| estimate_point(config, mu, i, config.trials))
        .collect()
}

pub fn sweep_table(config: &ExperimentConfig) -> Result<EstimateTable> {
    Ok(EstimateTable {
        rows: sweep(config)?.iter().map(McEstimate::row).collect(),
    })
}

pub fn single_node_sweep(config: &ExperimentConfig, node: usize) -> Result<Vec<SingleNodeRow>> {
    config.node(node)?;
    let sampler = Sampler::new(config, Topology::Single(node), config.seed)?;
    let points: Vec<(usize, f64)> = config.mean_photon_sweep.iter().cloned().enumerate().collect();
    Ok(par_map(&points, |&(i, mu)| {
        let records = sample_records(&sampler, mu, i, config.trials);
        let n = records.len() as u64;
        let ups = records.iter().filter(|o| o.up(node)).count() as u64;
        let clicks = records.iter().filter(|o| o.click()).count() as u64;
        let both = records.iter().filter(|o| o.click() && o.up(node)).count() as u64;
        SingleNodeRow {
            mu,
            p_up: cell_from_counts(ups, n),
            p_up_given_click: cell_from_counts(both, clicks),
        }
    }))
}

/// Normalized click correlation N·N_ab/(N_a·N_b) with first-order Poisson error.
fn click_correlation(n: u64, na: u64, nb: u64, nab: u64) -> Cell {
    if na == 0 || nb == 0 || n == 0 {
        return Cell::absent();
    }
    let scale = n as f64 / (na as f64 * nb as f64);
    let g = scale * nab as f64;
    let rel = (1.0 / na as f64 + 1.0 / nb as f64 + 1.0 / nab.max(1) as f64).sqrt();
    Cell::estimate(g, if nab == 0 { scale } else { g * rel })
}

/// g²(0) from same-trial coincidences and g²(τ≠0) from consecutive accepted trials.
pub fn g2_table(config: &ExperimentConfig, mu: f64, trials: u64) -> Result<Vec<G2Row>> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let sampler = Sampler::new(config, Topology::Cascade, config.seed)?;
    let records = sample_records(&sampler, mu, 0, trials);
    Ok(G2Condition::ALL
        .iter()
        .map(|&c| {
            let sub: Vec<&Outcome> = records.iter().filter(|o| c.accepts(o)).collect();
            let n = sub.len() as u64;
            let na = sub.iter().filter(|o| o.click_a).count() as u64;
            let nb = sub.iter().filter(|o| o.click_b).count() as u64;
            let nab = sub.iter().filter(|o| o.click_a && o.click_b).count() as u64;
            let g2_zero = click_correlation(n, na, nb, nab);

            let pairs = sub.len().saturating_sub(1) as u64;
            let g2_tau = if pairs == 0 {
                Cell::absent()
            } else {
                let na_first = sub[..sub.len() - 1].iter().filter(|o| o.click_a).count() as u64;
                let nb_last = sub[1..].iter().filter(|o| o.click_b).count() as u64;
                let cross = sub.windows(2).filter(|w| w[0].click_a && w[1].click_b).count() as u64;
                click_correlation(pairs, na_first, nb_last, cross)
            };
            G2Row {
                condition: c,
                g2_zero,
                g2_tau,
                tau_analytic: false,
            }
        })
        .collect())
}

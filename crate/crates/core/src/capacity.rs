//! Port-law estimation, mutual information of the receiver channel, the
//! classical homodyne baseline and the capacity sandwich bounds.
//!
//! The receiver channel is modelled in product form: given input sign `a`
//! and codeword index `k`, port `k` reads from the on-port law `p_on(a, .)`
//! and every other port independently from the off-port law `p_off(a, .)`.
//! Both laws are phase-averaged marginals estimated by Monte Carlo over the
//! phase noise; correlations between ports through shared phases are
//! deliberately not modelled.

use std::f64::consts::{FRAC_2_PI, LN_2, PI};

use rand::Rng;
use rayon::prelude::*;

use crate::detection::detection_probs;
use crate::model::{received_amplitudes_into, ComplexAmplitude, HadamardOrder, LinkParams};
use crate::noise::{sample_phases, PhaseNoiseModel};
use crate::quad::{self, Tolerance};
use crate::rng::substream;
use crate::{Error, Result};

/// Row index of the `+alpha` input.
pub const SIGN_PLUS: usize = 0;
/// Row index of the `-alpha` input.
pub const SIGN_MINUS: usize = 1;

/// Tolerance on the off-port symmetry hypothesis `p_I(.|+a) = p_I(.|-a)`.
pub const OFF_PORT_SYMMETRY_TOL: f64 = 0.01;

const SIMPLEX_TOL: f64 = 1e-9;

/// Ternary outcome laws of the signal port and of an empty port.
///
/// Rows are input signs (`[+alpha, -alpha]`), columns outcomes
/// (`[PLUS, ZERO, MINUS]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortLawEstimate {
    pub p_on: [[f64; 3]; 2],
    pub p_off: [[f64; 3]; 2],
    pub phase_samples: usize,
    /// `0` when homodyne outcomes are averaged in closed form.
    pub homodyne_samples_per_phase: usize,
}

fn reflect(row: [f64; 3]) -> [f64; 3] {
    [row[2], row[1], row[0]]
}

fn check_row(row: &[f64; 3], what: &str) -> Result<()> {
    if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::arg(format!(
            "{what} has a negative or non-finite entry: {row:?}"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::arg(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

impl PortLawEstimate {
    pub fn new(
        p_on: [[f64; 3]; 2],
        p_off: [[f64; 3]; 2],
        phase_samples: usize,
        homodyne_samples_per_phase: usize,
    ) -> Result<Self> {
        let law = Self {
            p_on,
            p_off,
            phase_samples,
            homodyne_samples_per_phase,
        };
        law.validate()?;
        Ok(law)
    }

    /// Builds both sign rows from the `+alpha` rows by reflecting
    /// `PLUS <-> MINUS`.
    pub fn from_plus_rows(on_plus: [f64; 3], off_plus: [f64; 3]) -> Result<Self> {
        Self::new(
            [on_plus, reflect(on_plus)],
            [off_plus, reflect(off_plus)],
            0,
            0,
        )
    }

    /// Error-free law: the signal port reads the sign, empty ports read zero.
    pub fn perfect() -> Self {
        Self::from_plus_rows([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).expect("valid")
    }

    pub fn validate(&self) -> Result<()> {
        for (sign, name) in [(SIGN_PLUS, "+"), (SIGN_MINUS, "-")] {
            check_row(&self.p_on[sign], &format!("p_on({name})"))?;
            check_row(&self.p_off[sign], &format!("p_off({name})"))?;
        }
        Ok(())
    }

    /// Largest deviation of `p_on(-, .)` from the reflection of `p_on(+, .)`.
    pub fn bpsk_asymmetry(&self) -> f64 {
        let r = reflect(self.p_on[SIGN_PLUS]);
        r.iter()
            .zip(&self.p_on[SIGN_MINUS])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|p_off(+, y) - p_off(-, y)|`.
    pub fn off_port_sign_dependence(&self) -> f64 {
        self.p_off[SIGN_PLUS]
            .iter()
            .zip(&self.p_off[SIGN_MINUS])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Estimates the on-port and off-port laws for codewords of amplitude
/// `alpha_rx` under `model` and threshold `epsilon`.
///
/// Each phase realization goes through the beamsplitter network; the
/// homodyne step is averaged in closed form. All `n - 1` empty ports
/// contribute to the off-port law, since they share one marginal.
pub fn estimate_port_laws<R: Rng + ?Sized>(
    order: HadamardOrder,
    alpha_rx: f64,
    model: &PhaseNoiseModel,
    epsilon: f64,
    phase_samples: usize,
    rng: &mut R,
) -> Result<PortLawEstimate> {
    if !(alpha_rx >= 0.0) || !alpha_rx.is_finite() {
        return Err(Error::arg(format!(
            "alpha_rx must be finite and >= 0, got {alpha_rx}"
        )));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::arg(format!("threshold must be >= 0, got {epsilon}")));
    }
    if phase_samples == 0 {
        return Err(Error::arg("at least one phase sample is required"));
    }
    let n = order.n();
    let alpha = ComplexAmplitude::new(alpha_rx, 0.0);
    let mut on = [0.0; 3];
    let mut off = [0.0; 3];
    let mut out = Vec::with_capacity(n);
    for _ in 0..phase_samples {
        let phases = sample_phases(model, n, rng);
        received_amplitudes_into(0, alpha, &phases, order, &mut out)?;
        for (acc, p) in on.iter_mut().zip(detection_probs(out[0].re, epsilon)) {
            *acc += p;
        }
        for port in &out[1..] {
            for (acc, p) in off.iter_mut().zip(detection_probs(port.re, epsilon)) {
                *acc += p;
            }
        }
    }
    let on_norm = phase_samples as f64;
    let off_norm = (phase_samples * (n - 1)) as f64;
    let on_plus = on.map(|v| v / on_norm);
    let off_plus = off.map(|v| v / off_norm);
    PortLawEstimate::new(
        [on_plus, reflect(on_plus)],
        [off_plus, reflect(off_plus)],
        phase_samples,
        0,
    )
}

/// Monte-Carlo estimate of a mutual information in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub mean_bits: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Streaming mean/variance with an order-fixed merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }

    fn estimate(&self) -> MiEstimate {
        let var = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        MiEstimate {
            mean_bits: self.mean,
            std_error: (var / self.count.max(1) as f64).sqrt(),
            samples: self.count,
        }
    }
}

/// Minimum Monte-Carlo budget for the product-channel estimator.
pub const MIN_MI_SAMPLES: usize = 1000;

struct ProductChannel {
    n: usize,
    ln_on: [[f64; 3]; 2],
    ln_off: [[f64; 3]; 2],
    p_on: [[f64; 3]; 2],
    p_off: [[f64; 3]; 2],
}

fn draw_outcome<R: Rng + ?Sized>(p: &[f64; 3], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let last = if p[2] > 0.0 {
        2
    } else if p[1] > 0.0 {
        1
    } else {
        0
    };
    if u < p[0] {
        0
    } else if u < p[0] + p[1] {
        1
    } else {
        last
    }
}

impl ProductChannel {
    fn new(law: &PortLawEstimate, order: HadamardOrder) -> Result<Self> {
        law.validate()?;
        let ln = |rows: &[[f64; 3]; 2]| rows.map(|r| r.map(f64::ln));
        Ok(Self {
            n: order.n(),
            ln_on: ln(&law.p_on),
            ln_off: ln(&law.p_off),
            p_on: law.p_on,
            p_off: law.p_off,
        })
    }

    /// `ln q(y | sign, k)` for a port `k` that read `cat`, where `counts`
    /// tallies the outcomes over all ports.
    fn ln_conditional(&self, sign: usize, cat: usize, counts: &[usize; 3]) -> f64 {
        let mut acc = self.ln_on[sign][cat];
        for (s, (&count, &ln_p)) in counts.iter().zip(&self.ln_off[sign]).enumerate() {
            let c = count - usize::from(s == cat);
            if c > 0 {
                acc += c as f64 * ln_p;
            }
        }
        acc
    }

    /// `log2 q(y | a, k) - log2 q(y)` for one draw. The output only matters
    /// through its outcome counts and the reading at the signal port, and the
    /// signal port index is exchangeable, so it is not drawn.
    fn sample_log_ratio<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sign = usize::from(rng.random::<bool>());
        let on_cat = draw_outcome(&self.p_on[sign], rng);
        let mut counts = [0usize; 3];
        counts[on_cat] += 1;
        for _ in 1..self.n {
            counts[draw_outcome(&self.p_off[sign], rng)] += 1;
        }
        let ln_joint = self.ln_conditional(sign, on_cat, &counts);

        // q(y) = (1/2n) sum_{a', k'} q(y | a', k'), grouped by the category at k'.
        let mut terms = [(0.0f64, 0.0f64); 6];
        let mut len = 0;
        for s in [SIGN_PLUS, SIGN_MINUS] {
            for cat in 0..3 {
                if counts[cat] > 0 {
                    terms[len] = (self.ln_conditional(s, cat, &counts), counts[cat] as f64);
                    len += 1;
                }
            }
        }
        let terms = &terms[..len];
        let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = terms
            .iter()
            .filter(|t| t.0 > f64::NEG_INFINITY)
            .map(|(l, w)| w * (l - max).exp())
            .sum();
        let ln_marginal = max + sum.ln() - ((2 * self.n) as f64).ln();
        (ln_joint - ln_marginal) / LN_2
    }

    fn run<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Moments {
        let mut m = Moments::default();
        for _ in 0..samples {
            m.push(self.sample_log_ratio(rng));
        }
        m
    }
}

/// Monte-Carlo estimate of `I(Y^n; A, N)` in bits for the product channel
/// defined by `law`, with `A` uniform on `{+alpha, -alpha}` and `N` uniform on
/// the `n` ports.
pub fn mi_product_channel<R: Rng + ?Sized>(
    law: &PortLawEstimate,
    order: HadamardOrder,
    mc_samples: usize,
    rng: &mut R,
) -> Result<MiEstimate> {
    if mc_samples < MIN_MI_SAMPLES {
        return Err(Error::arg(format!(
            "need at least {MIN_MI_SAMPLES} MI samples, got {mc_samples}"
        )));
    }
    let channel = ProductChannel::new(law, order)?;
    Ok(channel.run(mc_samples, rng).estimate())
}

/// [`mi_product_channel`] split into `partitions` chunks, each drawing from
/// its own substream of `seed`. The merged result is bit-identical for any
/// thread count.
pub fn mi_product_channel_partitioned(
    law: &PortLawEstimate,
    order: HadamardOrder,
    mc_samples: usize,
    seed: u64,
    partitions: usize,
) -> Result<MiEstimate> {
    if mc_samples < MIN_MI_SAMPLES {
        return Err(Error::arg(format!(
            "need at least {MIN_MI_SAMPLES} MI samples, got {mc_samples}"
        )));
    }
    if partitions == 0 {
        return Err(Error::arg("partitions must be >= 1"));
    }
    let channel = ProductChannel::new(law, order)?;
    let base = mc_samples / partitions;
    let extra = mc_samples % partitions;
    let parts: Vec<Moments> = (0..partitions)
        .into_par_iter()
        .map(|p| {
            let count = base + usize::from(p < extra);
            let mut rng = substream(seed, p as u64);
            channel.run(count, &mut rng)
        })
        .collect();
    Ok(parts
        .into_iter()
        .fold(Moments::default(), Moments::merge)
        .estimate())
}

/// Capacity figure for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    /// Bits per channel use: per block of `n` pulses for the receiver, per
    /// pulse for the classical baseline.
    pub mi_bits_per_use: f64,
    pub std_error: f64,
    pub capacity_bits_per_s: f64,
    pub capacity_std_error: f64,
    pub samples: usize,
}

/// `C(b, E, n) = b * I(Y^n; A N) / n`.
pub fn hadamard_capacity(
    b: f64,
    mi: &MiEstimate,
    order: HadamardOrder,
) -> Result<CapacityEstimate> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::arg(format!("baud rate must be > 0, got {b}")));
    }
    let scale = b / order.n() as f64;
    Ok(CapacityEstimate {
        mi_bits_per_use: mi.mean_bits,
        std_error: mi.std_error,
        capacity_bits_per_s: scale * mi.mean_bits,
        capacity_std_error: scale * mi.std_error,
        samples: mi.samples,
    })
}

/// Number of phase nodes in the classical-baseline phase average.
pub const PHASE_NODES: usize = 2048;

/// Spread, in units of the phase scale, beyond which phase weights are dropped.
const PHASE_SPAN_SIGMAS: f64 = 12.0;

/// Discrete phase law `(cos phi_i, w_i)` for averaging over `model`.
///
/// Uses the trapezoidal rule, which is spectrally accurate here: the grid is
/// either the full circle (periodic integrand) or a window outside which the
/// density is below `exp(-72)` of its peak.
#[derive(Debug, Clone)]
pub struct PhaseQuadrature {
    pub cosines: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PhaseQuadrature {
    pub fn new(model: &PhaseNoiseModel, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::arg("need at least two phase nodes"));
        }
        if model.is_noiseless() {
            return Ok(Self {
                cosines: vec![1.0],
                weights: vec![1.0],
            });
        }
        let half_width = (PHASE_SPAN_SIGMAS * model.angular_scale()).min(PI);
        let full_circle = half_width >= PI;
        let phases: Vec<f64> = if full_circle {
            (0..nodes)
                .map(|i| -PI + 2.0 * PI * i as f64 / nodes as f64)
                .collect()
        } else {
            (0..nodes)
                .map(|i| -half_width + 2.0 * half_width * i as f64 / (nodes - 1) as f64)
                .collect()
        };
        let density = |phi: f64| match *model {
            PhaseNoiseModel::VonMises { kappa } => {
                let s = (0.5 * phi).sin();
                (-2.0 * kappa * s * s).exp()
            }
            PhaseNoiseModel::WrappedNormal { sigma2 } => {
                let sigma = sigma2.sqrt();
                let wraps = if full_circle {
                    (6.0 * sigma / (2.0 * PI)).ceil() as i64 + 1
                } else {
                    0
                };
                (-wraps..=wraps)
                    .map(|k| {
                        let x = phi + 2.0 * PI * k as f64;
                        (-0.5 * x * x / sigma2).exp()
                    })
                    .sum()
            }
        };
        let mut weights: Vec<f64> = phases.iter().map(|&p| density(p)).collect();
        if !full_circle {
            weights[0] *= 0.5;
            weights[nodes - 1] *= 0.5;
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::arg(format!(
                "phase density vanished on the grid for {model:?}"
            )));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            cosines: phases.iter().map(|p| p.cos()).collect(),
            weights,
        })
    }

    /// `E_phi[normal(y; mean * cos phi, 1/4)]`.
    pub fn mixture_density(&self, y: f64, mean: f64) -> f64 {
        let norm = FRAC_2_PI.sqrt();
        self.cosines
            .iter()
            .zip(&self.weights)
            .map(|(&c, &w)| {
                let d = y - mean * c;
                w * (-2.0 * d * d).exp()
            })
            .sum::<f64>()
            * norm
    }
}

const CLASSICAL_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-11,
    max_intervals: 2000,
};

/// `I(Y; A)` in bits for BPSK `{+alpha, -alpha}` with prior `P(+alpha) =
/// prior_plus`, where `Y` is the homodyne outcome after phase noise.
///
/// Returns the information and the number of density evaluations.
pub fn classical_bpsk_mi(
    alpha_rx: f64,
    model: &PhaseNoiseModel,
    prior_plus: f64,
) -> Result<(f64, usize)> {
    if !(alpha_rx >= 0.0) || !alpha_rx.is_finite() {
        return Err(Error::arg(format!(
            "alpha_rx must be finite and >= 0, got {alpha_rx}"
        )));
    }
    if !(0.0..=1.0).contains(&prior_plus) {
        return Err(Error::arg(format!(
            "prior must lie in [0, 1], got {prior_plus}"
        )));
    }
    if alpha_rx == 0.0 || prior_plus == 0.0 || prior_plus == 1.0 {
        return Ok((0.0, 0));
    }
    let phases = PhaseQuadrature::new(model, PHASE_NODES)?;
    let prior_minus = 1.0 - prior_plus;
    let xlogx = |p: f64, ratio: f64| {
        if p > 0.0 && ratio > 0.0 {
            p * ratio.log2()
        } else {
            0.0
        }
    };
    let integrand = |y: f64| {
        let plus = phases.mixture_density(y, alpha_rx);
        let minus = phases.mixture_density(y, -alpha_rx);
        let marginal = prior_plus * plus + prior_minus * minus;
        if marginal <= 0.0 {
            return 0.0;
        }
        prior_plus * xlogx(plus, plus / marginal) + prior_minus * xlogx(minus, minus / marginal)
    };
    let reach = alpha_rx + 6.0;
    let r = quad::integrate(integrand, -reach, reach, CLASSICAL_TOLERANCE)?;
    Ok((r.value.max(0.0), r.evaluations))
}

/// Classical homodyne BPSK baseline, `C(b, E) = b * I(Y; A)` with the
/// uniform prior.
pub fn classical_bpsk_capacity(
    b: f64,
    alpha_rx: f64,
    model: &PhaseNoiseModel,
) -> Result<CapacityEstimate> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::arg(format!("baud rate must be > 0, got {b}")));
    }
    let (mi, evaluations) = classical_bpsk_mi(alpha_rx, model, 0.5)?;
    Ok(CapacityEstimate {
        mi_bits_per_use: mi,
        std_error: 0.0,
        capacity_bits_per_s: b * mi,
        capacity_std_error: 0.0,
        samples: evaluations,
    })
}

/// `h(d) = -d log2 d - (1 - d) log2 (1 - d)`.
pub fn binary_entropy(d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::arg(format!(
            "binary entropy needs d in [0, 1], got {d}"
        )));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(d) + term(1.0 - d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBounds {
    /// `b log2(2n) / n`.
    pub upper: f64,
    /// `b log2(n) / n`, the literal form of the stated bound.
    pub upper_log_n: f64,
    /// `b ((1 - delta) log2 n - 5 h(delta)) / n`, present only when
    /// `delta < 1/n` and the off-port law does not depend on the input sign.
    pub lower: Option<f64>,
    pub delta: f64,
    pub off_port_symmetric: bool,
}

/// Capacity sandwich for the receiver channel described by `law`.
pub fn capacity_bounds(
    b: f64,
    order: HadamardOrder,
    law: &PortLawEstimate,
) -> Result<CapacityBounds> {
    if !(b > 0.0) {
        return Err(Error::arg(format!("baud rate must be > 0, got {b}")));
    }
    let n = order.n() as f64;
    let delta = (1.0 - law.p_on[SIGN_PLUS][0])
        .max(1.0 - law.p_off[SIGN_PLUS][1])
        .clamp(0.0, 1.0);
    let symmetric = law.off_port_sign_dependence() <= OFF_PORT_SYMMETRY_TOL;
    let lower = if symmetric && delta < 1.0 / n {
        Some(b * ((1.0 - delta) * n.log2() - 5.0 * binary_entropy(delta)?) / n)
    } else {
        None
    };
    Ok(CapacityBounds {
        upper: b * (2.0 * n).log2() / n,
        upper_log_n: b * n.log2() / n,
        lower,
        delta,
        off_port_symmetric: symmetric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub alpha_tx: f64,
    pub alpha_rx: f64,
    pub photons_per_pulse_rx: f64,
}

/// `alpha_tx = sqrt(N/b)`, `alpha_rx = sqrt(tau N / b)`.
pub fn link_budget(params: &LinkParams) -> LinkBudget {
    let tx = params.photon_flux / params.baud_rate;
    let rx = params.transmittivity() * tx;
    LinkBudget {
        alpha_tx: tx.sqrt(),
        alpha_rx: rx.sqrt(),
        photons_per_pulse_rx: rx,
    }
}

//! Sweep drivers.
//!
//! Every (grid point, repetition) task draws from its own seed,
//! `derive_seed(master, [baud bits, order, repetition])`. The seed does not
//! depend on the noise model, so both models see common random numbers.
//! Tasks run on the current rayon pool; results are collected in grid order.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ThresholdMode};
use super::records::{
    ConcentrationRecord, SweepResultRecord, ThresholdReport, CLASSICAL_ORDER, STATUS_OK,
};
use crate::capacity::{
    classical_bpsk_capacity, estimate_port_laws, hadamard_capacity, link_budget,
    mi_product_channel_partitioned, CapacityEstimate,
};
use crate::detection::{half_mean_threshold, optimize_threshold_with};
use crate::model::{received_amplitudes_into, ComplexAmplitude};
use crate::noise::{circular_moments, sample_phases};
use crate::rng::{derive_seed, substream};
use crate::{HadamardOrder, LinkParams, ModelKind, PhaseNoiseModel, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Index given to the first repetition, so appended runs get fresh
    /// indices and fresh random streams.
    pub first_repetition: usize,
}

#[derive(Debug, Clone, Copy)]
struct OperatingPoint {
    baud_rate: f64,
    model: PhaseNoiseModel,
    alpha_rx: f64,
}

impl OperatingPoint {
    fn new(cfg: &ExperimentConfig, kind: ModelKind, baud_rate: f64) -> Result<Self> {
        let link = LinkParams::new(
            cfg.attenuation_a,
            cfg.fiber_length_l,
            baud_rate,
            cfg.photon_flux_n,
        )?;
        Ok(Self {
            baud_rate,
            model: cfg.noise_model(kind, baud_rate)?,
            alpha_rx: link_budget(&link).alpha_rx,
        })
    }

    fn record(
        &self,
        cfg: &ExperimentConfig,
        order_n: usize,
        repetition_index: usize,
        seed: u64,
    ) -> SweepResultRecord {
        SweepResultRecord {
            baud_rate: self.baud_rate,
            order_n,
            model_kind: self.model.kind(),
            sigma2_or_kappa: self.model.parameter(),
            alpha_rx: self.alpha_rx,
            epsilon: None,
            mi_bits_per_use: None,
            capacity_bits_per_s: None,
            std_error: None,
            phase_samples: cfg.phase_samples,
            mi_samples: cfg.mi_samples,
            repetition_index,
            seed,
            status: STATUS_OK.into(),
        }
    }
}

fn fill(mut rec: SweepResultRecord, outcome: Result<CapacityEstimate>) -> SweepResultRecord {
    match outcome {
        Ok(c) if c.capacity_bits_per_s.is_finite() && c.capacity_std_error.is_finite() => {
            rec.mi_bits_per_use = Some(c.mi_bits_per_use);
            rec.capacity_bits_per_s = Some(c.capacity_bits_per_s);
            rec.std_error = Some(c.capacity_std_error);
        }
        Ok(c) => rec.status = format!("error: non-finite estimate {c:?}"),
        Err(e) => rec.status = format!("error: {e}"),
    }
    rec
}

/// Seed of the task at baud rate `b`, order `n` and repetition `rep`.
pub fn task_seed(master: u64, b: f64, order_n: usize, rep: usize) -> u64 {
    derive_seed(master, &[b.to_bits(), order_n as u64, rep as u64])
}

/// Detection threshold for `order` at `point` under the configured mode.
pub fn select_threshold(
    cfg: &ExperimentConfig,
    order: HadamardOrder,
    alpha_rx: f64,
    model: &PhaseNoiseModel,
) -> Result<f64> {
    let m = circular_moments(model);
    match cfg.threshold_mode {
        ThresholdMode::Fixed(v) => Ok(v),
        ThresholdMode::HalfMean => Ok(half_mean_threshold(order.n(), alpha_rx, &m)),
        ThresholdMode::Optimized if alpha_rx == 0.0 => Ok(0.0),
        ThresholdMode::Optimized => {
            Ok(optimize_threshold_with(order.n(), alpha_rx, &m, cfg.gaussian_shape)?.epsilon)
        }
    }
}

/// One receiver capacity estimate: port laws from `phase_samples` noise
/// draws, then the product-channel MI.
pub fn jdr_capacity_estimate(
    cfg: &ExperimentConfig,
    order: HadamardOrder,
    baud_rate: f64,
    alpha_rx: f64,
    model: &PhaseNoiseModel,
    epsilon: f64,
    seed: u64,
) -> Result<CapacityEstimate> {
    let mut rng = substream(seed, 0);
    let law = estimate_port_laws(order, alpha_rx, model, epsilon, cfg.phase_samples, &mut rng)?;
    let mi = mi_product_channel_partitioned(
        &law,
        order,
        cfg.mi_samples,
        derive_seed(seed, &[1]),
        cfg.mi_partitions,
    )?;
    hadamard_capacity(baud_rate, &mi, order)
}

#[derive(Debug, Clone, Copy)]
enum Series {
    Classical,
    Receiver(HadamardOrder),
}

struct Group {
    point: OperatingPoint,
    series: Series,
    epsilon: Option<Result<f64, String>>,
    classical: Option<Result<CapacityEstimate, String>>,
}

fn run_groups(
    cfg: &ExperimentConfig,
    groups: Vec<(Result<OperatingPoint>, Series)>,
    opts: SweepOptions,
) -> Result<Vec<SweepResultRecord>> {
    let groups: Vec<Group> = groups
        .into_par_iter()
        .map(|(point, series)| {
            let point = point?;
            let mut g = Group {
                point,
                series,
                epsilon: None,
                classical: None,
            };
            match series {
                Series::Classical => {
                    g.classical = Some(
                        classical_bpsk_capacity(point.baud_rate, point.alpha_rx, &point.model)
                            .map_err(|e| e.to_string()),
                    )
                }
                Series::Receiver(order) => {
                    g.epsilon = Some(
                        select_threshold(cfg, order, point.alpha_rx, &point.model)
                            .map_err(|e| e.to_string()),
                    )
                }
            }
            Ok(g)
        })
        .collect::<Result<_>>()?;

    let tasks: Vec<(&Group, usize)> = groups
        .iter()
        .flat_map(|g| (0..cfg.repetitions).map(move |r| (g, opts.first_repetition + r)))
        .collect();
    Ok(tasks
        .into_par_iter()
        .map(|(g, rep)| {
            let p = &g.point;
            match g.series {
                Series::Classical => {
                    let seed = task_seed(cfg.seed, p.baud_rate, CLASSICAL_ORDER, rep);
                    let mut rec = p.record(cfg, CLASSICAL_ORDER, rep, seed);
                    match g.classical.clone().expect("classical group") {
                        Ok(c) => fill(rec, Ok(c)),
                        Err(e) => {
                            rec.status = format!("error: {e}");
                            rec
                        }
                    }
                }
                Series::Receiver(order) => {
                    let seed = task_seed(cfg.seed, p.baud_rate, order.n(), rep);
                    let mut rec = p.record(cfg, order.n(), rep, seed);
                    match g.epsilon.clone().expect("receiver group") {
                        Ok(eps) => {
                            rec.epsilon = Some(eps);
                            fill(
                                rec,
                                jdr_capacity_estimate(
                                    cfg,
                                    order,
                                    p.baud_rate,
                                    p.alpha_rx,
                                    &p.model,
                                    eps,
                                    seed,
                                ),
                            )
                        }
                        Err(e) => {
                            rec.status = format!("error: {e}");
                            rec
                        }
                    }
                }
            }
        })
        .collect())
}

/// Capacity versus baud rate: for every baud rate and noise model, the
/// classical baseline (`order_n = 1`) and the receiver at each order.
pub fn run_fig1_sweep(
    cfg: &ExperimentConfig,
    opts: SweepOptions,
) -> Result<Vec<SweepResultRecord>> {
    cfg.validate()?;
    let orders = cfg.hadamard_orders()?;
    let mut groups = Vec::new();
    for &b in &cfg.baud_grid {
        for &kind in &cfg.noise_model_kinds {
            groups.push((OperatingPoint::new(cfg, kind, b), Series::Classical));
            for &order in &orders {
                groups.push((OperatingPoint::new(cfg, kind, b), Series::Receiver(order)));
            }
        }
    }
    run_groups(cfg, groups, opts)
}

/// Receiver MI and capacity versus Hadamard order at baud rate `fixed_b`.
pub fn run_order_sweep(
    cfg: &ExperimentConfig,
    fixed_b: f64,
    opts: SweepOptions,
) -> Result<Vec<SweepResultRecord>> {
    cfg.validate()?;
    let orders = cfg.hadamard_orders()?;
    let mut groups = Vec::new();
    for &order in &orders {
        for &kind in &cfg.noise_model_kinds {
            groups.push((
                OperatingPoint::new(cfg, kind, fixed_b),
                Series::Receiver(order),
            ));
        }
    }
    run_groups(cfg, groups, opts)
}

/// `4 exp(-t^2 / n)`.
pub fn concentration_bound(t: f64, n: usize) -> f64 {
    4.0 * (-t * t / n as f64).exp()
}

/// Empirical `P(|Lambda - sqrt(n) alpha m1 delta| >= t alpha / sqrt(n))` for
/// the signal port (`on`) and an empty port (`off`), with unit amplitude.
pub fn concentration_tails(
    model: &PhaseNoiseModel,
    order: HadamardOrder,
    t_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConcentrationRecord>> {
    if trials == 0 {
        return Err(crate::Error::arg("trials must be >= 1"));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(crate::Error::arg(format!(
            "t must be finite and >= 0, got {t}"
        )));
    }
    let n = order.n();
    let root_n = (n as f64).sqrt();
    let m1 = circular_moments(model).m1;
    let mut rng = substream(seed, 0);
    let mut out = Vec::with_capacity(n);
    let mut on_dev = Vec::with_capacity(trials);
    let mut off_dev = Vec::with_capacity(trials);
    for _ in 0..trials {
        let phases = sample_phases(model, n, &mut rng);
        received_amplitudes_into(0, ComplexAmplitude::new(1.0, 0.0), &phases, order, &mut out)?;
        on_dev.push((out[0] - root_n * m1).norm());
        off_dev.push(out[1].norm());
    }
    let mut records = Vec::new();
    for &t in t_grid {
        let level = t / root_n;
        let bound = concentration_bound(t, n);
        for (port, devs) in [("on", &on_dev), ("off", &off_dev)] {
            let hits = devs.iter().filter(|&&d| d >= level).count();
            let p = hits as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            records.push(ConcentrationRecord {
                order_n: n,
                model_kind: model.kind(),
                sigma2_or_kappa: model.parameter(),
                port: port.into(),
                t,
                trials,
                empirical_tail: p,
                mc_std_error: se,
                bound,
                pass: p <= bound + 3.0 * se,
                seed,
            });
        }
    }
    Ok(records)
}

/// Concentration check for every configured model at every configured baud
/// rate, with `trials` phase draws each.
pub fn run_concentration_experiment(
    cfg: &ExperimentConfig,
    order: HadamardOrder,
    t_grid: &[f64],
    trials: usize,
) -> Result<Vec<ConcentrationRecord>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &b in &cfg.baud_grid {
        for &kind in &cfg.noise_model_kinds {
            jobs.push((
                cfg.noise_model(kind, b)?,
                task_seed(cfg.seed, b, order.n(), 0),
            ));
        }
    }
    let parts = jobs
        .par_iter()
        .map(|(model, seed)| concentration_tails(model, order, t_grid, trials, *seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Optimized threshold at order `n` and baud rate `b`, per configured model.
pub fn run_threshold_report(
    cfg: &ExperimentConfig,
    order: HadamardOrder,
    b: f64,
) -> Result<Vec<ThresholdReport>> {
    cfg.validate()?;
    cfg.noise_model_kinds
        .iter()
        .map(|&kind| {
            let p = OperatingPoint::new(cfg, kind, b)?;
            let m = circular_moments(&p.model);
            let opt = optimize_threshold_with(order.n(), p.alpha_rx, &m, cfg.gaussian_shape)?;
            let half = half_mean_threshold(order.n(), p.alpha_rx, &m);
            Ok(ThresholdReport {
                order_n: order.n(),
                baud_rate: b,
                model_kind: kind,
                sigma2_or_kappa: p.model.parameter(),
                alpha_rx: p.alpha_rx,
                m1: m.m1,
                epsilon_max: opt.epsilon,
                objective: opt.objective,
                half_mean_ratio: opt.epsilon / half,
            })
        })
        .collect()
}

//! Homodyne detection with a symmetric ternary threshold, and the threshold
//! optimizer for the receiver output ports.
//!
//! A homodyne measurement of a coherent state `beta` (phase-locked to the
//! real axis) returns `x ~ normal(Re beta, 1/4)`. With threshold `eps >= 0`
//! the outcome is `PLUS` for `x > eps`, `MINUS` for `x < -eps` and `ZERO`
//! otherwise.
//!
//! The optimizer maximizes `p_C(eps) * d0(eps)^(n-1)` where both factors are
//! averages of the detection probabilities over a Gaussian model of the port
//! amplitude. It works on the logarithm of the objective and evaluates each
//! factor through whichever of the probability or its complement is smaller,
//! so the search stays well conditioned when the objective is within `1e-12`
//! of one.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::model::ComplexAmplitude;
use crate::noise::CircularMoments;
use crate::quad::{self, Tolerance};
use crate::{Error, Result};

/// Standard deviation of a homodyne outcome around `Re beta`.
pub const QUADRATURE_STD: f64 = 0.5;

/// Outcome labels in column order `[PLUS, ZERO, MINUS]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TernaryOutcome {
    Plus,
    Zero,
    Minus,
}

impl TernaryOutcome {
    pub const ALL: [TernaryOutcome; 3] = [
        TernaryOutcome::Plus,
        TernaryOutcome::Zero,
        TernaryOutcome::Minus,
    ];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            TernaryOutcome::Plus => 0,
            TernaryOutcome::Zero => 1,
            TernaryOutcome::Minus => 2,
        }
    }

    /// Amplitude the label stands for, in units of `alpha`.
    pub fn value(self) -> i8 {
        match self {
            TernaryOutcome::Plus => 1,
            TernaryOutcome::Zero => 0,
            TernaryOutcome::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    epsilon: f64,
}

impl DetectorConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::arg(format!(
                "threshold must be finite and >= 0, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn quadrature_std(&self) -> f64 {
        QUADRATURE_STD
    }

    pub fn classify(&self, x: f64) -> TernaryOutcome {
        if x > self.epsilon {
            TernaryOutcome::Plus
        } else if x < -self.epsilon {
            TernaryOutcome::Minus
        } else {
            TernaryOutcome::Zero
        }
    }
}

/// Error function, accurate to a few ulp.
#[inline]
pub fn erf(a: f64) -> f64 {
    libm::erf(a)
}

#[inline]
pub fn erfc(a: f64) -> f64 {
    libm::erfc(a)
}

/// `p(x | beta) = sqrt(2/pi) exp(-2 (x - beta)^2)`.
pub fn homodyne_density(x: f64, beta_real: f64) -> f64 {
    let d = x - beta_real;
    FRAC_2_PI.sqrt() * (-2.0 * d * d).exp()
}

/// `[P(x > eps), P(|x| <= eps), P(x < -eps)]` for `x ~ normal(beta, 1/4)`.
#[inline]
pub fn detection_probs(beta_real: f64, epsilon: f64) -> [f64; 3] {
    let upper = SQRT_2 * (epsilon - beta_real);
    let lower = SQRT_2 * (epsilon + beta_real);
    [
        0.5 * erfc(upper),
        zero_window_mass(beta_real, epsilon),
        0.5 * erfc(lower),
    ]
}

/// `P(|x| <= eps)`, avoiding cancellation between nearly equal tail masses
/// when the window is off-center and narrow.
fn zero_window_mass(beta_real: f64, epsilon: f64) -> f64 {
    let b = beta_real.abs();
    if b <= epsilon {
        0.5 * (erf(SQRT_2 * (epsilon - b)) + erf(SQRT_2 * (epsilon + b)))
    } else if 8.0 * b * epsilon >= 0.1 {
        0.5 * (erfc(SQRT_2 * (b - epsilon)) - erfc(SQRT_2 * (b + epsilon)))
    } else {
        // The density varies by less than exp(0.1) across the window.
        quad::kronrod15(|x| homodyne_density(x, b), -epsilon, epsilon)
    }
}

/// One homodyne shot on `beta`, classified with `cfg`.
pub fn sample_and_classify<R: Rng + ?Sized>(
    beta: ComplexAmplitude,
    cfg: &DetectorConfig,
    rng: &mut R,
) -> TernaryOutcome {
    let z: f64 = StandardNormal.sample(rng);
    cfg.classify(beta.re + QUADRATURE_STD * z)
}

/// How the Gaussian port-amplitude model is parametrized.
///
/// Both put the on-port (`t = 1`) mean at `sqrt(n) m1 alpha` and the off-port
/// (`t = 2`) mean at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianShape {
    /// Proper normal density with standard deviation `sqrt(t) |alpha| sigma`,
    /// `sigma^2 = Var(cos Phi)`: the central-limit variances `|alpha|^2 sigma^2`
    /// and `2 |alpha|^2 sigma^2`.
    #[default]
    Clt,
    /// Literal exponent `-((beta - mu) / (2 t sigma))^2`, renormalized, i.e.
    /// standard deviation `sqrt(2) t sigma` with `sigma^2 = |m2 - m1^2|`.
    Printed,
}

impl std::str::FromStr for GaussianShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "clt" => Ok(GaussianShape::Clt),
            "printed" => Ok(GaussianShape::Printed),
            other => Err(Error::arg(format!(
                "unknown gaussian shape {other:?} (expected clt or printed)"
            ))),
        }
    }
}

/// A probability `p` and its complement `q = 1 - p`, with the smaller of the
/// two computed directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbPair {
    pub p: f64,
    pub q: f64,
}

impl ProbPair {
    fn from_p(p: f64) -> Self {
        Self { p, q: 1.0 - p }
    }

    fn from_q(q: f64) -> Self {
        Self { p: 1.0 - q, q }
    }

    /// `ln p`, accurate whether `p` is tiny or close to one.
    pub fn ln_p(&self) -> f64 {
        if self.p < 0.5 {
            self.p.ln()
        } else {
            (-self.q).ln_1p()
        }
    }
}

/// Tolerance for the Gaussian-model integrals. Tighter than the `1e-9`
/// absolute contract so tiny complements keep their relative accuracy.
pub const APPROX_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-300,
    rel: 1e-12,
    max_intervals: 2000,
};

/// Half-width of the integration range in standard deviations.
const APPROX_RANGE_SIGMAS: f64 = 10.0;

#[inline]
fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Gaussian model of the on-port and off-port real amplitudes of an order-`n`
/// receiver fed with a real BPSK amplitude `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPortModel {
    order_n: usize,
    on_mean: f64,
    on_std: f64,
    off_std: f64,
}

impl GaussianPortModel {
    pub fn new(
        order_n: usize,
        alpha: f64,
        moments: &CircularMoments,
        shape: GaussianShape,
    ) -> Result<Self> {
        if order_n < 2 || !order_n.is_power_of_two() {
            return Err(Error::arg(format!(
                "order must be a power of two >= 2, got {order_n}"
            )));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::arg(format!("alpha must be > 0, got {alpha}")));
        }
        let (on_std, off_std) = match shape {
            GaussianShape::Clt => {
                let sigma = moments.var_cos.max(0.0).sqrt();
                (alpha * sigma, SQRT_2 * alpha * sigma)
            }
            GaussianShape::Printed => {
                let sigma = moments.var_cos_printed.abs().sqrt();
                (SQRT_2 * sigma, 2.0 * SQRT_2 * sigma)
            }
        };
        Ok(Self {
            order_n,
            on_mean: (order_n as f64).sqrt() * moments.m1 * alpha,
            on_std,
            off_std,
        })
    }

    pub fn order_n(&self) -> usize {
        self.order_n
    }

    pub fn on_mean(&self) -> f64 {
        self.on_mean
    }

    pub fn on_std(&self) -> f64 {
        self.on_std
    }

    pub fn off_std(&self) -> f64 {
        self.off_std
    }

    /// Averages `(hit, miss)` over `beta ~ normal(mean, std^2)`, integrating
    /// whichever of the two is smaller at the mean.
    fn average<H, M>(mean: f64, std: f64, hit: H, miss: M) -> Result<ProbPair>
    where
        H: Fn(f64) -> f64,
        M: Fn(f64) -> f64,
    {
        let use_hit = hit(mean) < 0.5;
        if std == 0.0 {
            return Ok(if use_hit {
                ProbPair::from_p(hit(mean))
            } else {
                ProbPair::from_q(miss(mean))
            });
        }
        let lim = APPROX_RANGE_SIGMAS;
        let value = if use_hit {
            quad::integrate(
                |z| std_normal_pdf(z) * hit(mean + std * z),
                -lim,
                lim,
                APPROX_TOLERANCE,
            )?
        } else {
            quad::integrate(
                |z| std_normal_pdf(z) * miss(mean + std * z),
                -lim,
                lim,
                APPROX_TOLERANCE,
            )?
        }
        .value
        .clamp(0.0, 1.0);
        Ok(if use_hit {
            ProbPair::from_p(value)
        } else {
            ProbPair::from_q(value)
        })
    }

    /// `p_C(eps)`: probability the signal port reads `PLUS`.
    pub fn p_correct(&self, epsilon: f64) -> Result<ProbPair> {
        check_epsilon(epsilon)?;
        Self::average(
            self.on_mean,
            self.on_std,
            |beta| 0.5 * erfc(SQRT_2 * (epsilon - beta)),
            |beta| 0.5 * erfc(SQRT_2 * (beta - epsilon)),
        )
    }

    /// `d(0)`: probability an empty port reads `ZERO`.
    pub fn d_zero(&self, epsilon: f64) -> Result<ProbPair> {
        check_epsilon(epsilon)?;
        Self::average(
            0.0,
            self.off_std,
            |beta| {
                let [_, zero, _] = detection_probs(beta, epsilon);
                zero
            },
            |beta| {
                let [plus, _, minus] = detection_probs(beta, epsilon);
                plus + minus
            },
        )
    }

    /// `ln(p_C * d0^(n-1))`.
    pub fn ln_objective(&self, epsilon: f64) -> Result<f64> {
        let pc = self.p_correct(epsilon)?;
        let d0 = self.d_zero(epsilon)?;
        Ok(pc.ln_p() + (self.order_n - 1) as f64 * d0.ln_p())
    }

    pub fn objective(&self, epsilon: f64) -> Result<f64> {
        self.ln_objective(epsilon).map(f64::exp)
    }

    /// Upper end `sqrt(n) m1 alpha` of the threshold search interval.
    pub fn search_limit(&self) -> f64 {
        self.on_mean.max(0.0)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0) {
        return Err(Error::arg(format!("threshold must be >= 0, got {epsilon}")));
    }
    Ok(())
}

/// `p_C(eps | alpha)` under the default Gaussian model.
pub fn pc_gaussian_approx(
    epsilon: f64,
    n: usize,
    alpha: f64,
    moments: &CircularMoments,
) -> Result<f64> {
    Ok(
        GaussianPortModel::new(n, alpha, moments, GaussianShape::Clt)?
            .p_correct(epsilon)?
            .p,
    )
}

/// `d(0)` under the default Gaussian model.
pub fn d0_gaussian_approx(
    epsilon: f64,
    n: usize,
    alpha: f64,
    moments: &CircularMoments,
) -> Result<f64> {
    Ok(
        GaussianPortModel::new(n, alpha, moments, GaussianShape::Clt)?
            .d_zero(epsilon)?
            .p,
    )
}

/// `sqrt(n) alpha m1 / 2`: midpoint between the noiseless port levels.
pub fn half_mean_threshold(n: usize, alpha: f64, moments: &CircularMoments) -> f64 {
    0.5 * (n as f64).sqrt() * alpha * moments.m1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptimum {
    pub epsilon: f64,
    /// `p_C * d0^(n-1)` at `epsilon`.
    pub objective: f64,
}

/// Grid points used to seed the golden-section search.
pub const SEED_GRID_POINTS: usize = 64;

/// Maximizes `p_C(eps) d0(eps)^(n-1)` over `[0, sqrt(n) m1 alpha]`.
pub fn optimize_threshold(
    n: usize,
    alpha: f64,
    moments: &CircularMoments,
) -> Result<ThresholdOptimum> {
    optimize_threshold_with(n, alpha, moments, GaussianShape::Clt)
}

pub fn optimize_threshold_with(
    n: usize,
    alpha: f64,
    moments: &CircularMoments,
    shape: GaussianShape,
) -> Result<ThresholdOptimum> {
    if alpha == 0.0 {
        return Err(Error::arg("alpha = 0 carries no signal to threshold"));
    }
    let model = GaussianPortModel::new(n, alpha, moments, shape)?;
    maximize_ln_objective(&model)
}

pub(crate) fn maximize_ln_objective(model: &GaussianPortModel) -> Result<ThresholdOptimum> {
    let upper = model.search_limit();
    if upper == 0.0 {
        let ln_obj = model.ln_objective(0.0)?;
        return Ok(ThresholdOptimum {
            epsilon: 0.0,
            objective: ln_obj.exp(),
        });
    }
    let step = upper / (SEED_GRID_POINTS - 1) as f64;
    let mut grid = Vec::with_capacity(SEED_GRID_POINTS);
    for i in 0..SEED_GRID_POINTS {
        let eps = if i == SEED_GRID_POINTS - 1 {
            upper
        } else {
            step * i as f64
        };
        grid.push((eps, model.ln_objective(eps)?));
    }
    let (best_idx, &(best_eps, best_val)) = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("grid is non-empty");
    let lo = if best_idx == 0 {
        0.0
    } else {
        grid[best_idx - 1].0
    };
    let hi = if best_idx + 1 == grid.len() {
        upper
    } else {
        grid[best_idx + 1].0
    };

    let mut err = None;
    let (gs_eps, gs_val) = golden_section_max(
        |eps| match model.ln_objective(eps) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        1e-12 * upper,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let (epsilon, ln_obj) = if gs_val >= best_val {
        (gs_eps, gs_val)
    } else {
        (best_eps, best_val)
    };
    Ok(ThresholdOptimum {
        epsilon,
        objective: ln_obj.exp(),
    })
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Returns `(x_max, f_max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= x_tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

//! Phase-noise models for Kerr-induced phase rotation.
//!
//! Two zero-mean circular laws are supported: a wrapped normal with variance
//! `sigma2` and a von Mises law with concentration `kappa`. Both are tied to
//! the baud rate through calibrated endpoints, `sigma2 = 6e-19 * b` and
//! `kappa = 1e19 / (6 b)`, so that `kappa = 1 / sigma2`.
//!
//! Sampled phases lie in `(-pi, pi]` throughout the crate.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Phase variance per unit baud rate, rad^2 * s.
pub const SIGMA2_PER_BAUD: f64 = 6e-19;

/// `kappa * b` for the von Mises counterpart.
pub const KAPPA_TIMES_BAUD: f64 = 1e19 / 6.0;

/// Above this concentration the von Mises sampler draws `normal(0, 1/kappa)`.
pub const VON_MISES_NORMAL_FALLBACK: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    WrappedNormal,
    VonMises,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::WrappedNormal, ModelKind::VonMises];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::WrappedNormal => "wrapped-normal",
            ModelKind::VonMises => "von-mises",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wrapped-normal" | "wn" => Ok(ModelKind::WrappedNormal),
            "von-mises" | "vm" => Ok(ModelKind::VonMises),
            other => Err(Error::arg(format!(
                "unknown noise model {other:?} (expected wrapped-normal or von-mises)"
            ))),
        }
    }
}

/// Zero-mean circular phase-noise law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseNoiseModel {
    WrappedNormal { sigma2: f64 },
    VonMises { kappa: f64 },
}

impl PhaseNoiseModel {
    pub fn wrapped_normal(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::arg(format!(
                "sigma2 must be finite and >= 0, got {sigma2}"
            )));
        }
        Ok(PhaseNoiseModel::WrappedNormal { sigma2 })
    }

    pub fn von_mises(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::arg(format!(
                "kappa must be finite and >= 0, got {kappa}"
            )));
        }
        Ok(PhaseNoiseModel::VonMises { kappa })
    }

    /// The model of the given kind calibrated to baud rate `b`.
    pub fn for_baud_rate(kind: ModelKind, b: f64) -> Result<Self> {
        match kind {
            ModelKind::WrappedNormal => Self::wrapped_normal(sigma2_from_baudrate(b)?),
            ModelKind::VonMises => Self::von_mises(kappa_from_baudrate(b)?),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            PhaseNoiseModel::WrappedNormal { .. } => ModelKind::WrappedNormal,
            PhaseNoiseModel::VonMises { .. } => ModelKind::VonMises,
        }
    }

    /// `sigma2` or `kappa`, depending on the variant.
    pub fn parameter(&self) -> f64 {
        match *self {
            PhaseNoiseModel::WrappedNormal { sigma2 } => sigma2,
            PhaseNoiseModel::VonMises { kappa } => kappa,
        }
    }

    /// Rough angular spread in radians; `0` for a noiseless model.
    pub fn angular_scale(&self) -> f64 {
        match *self {
            PhaseNoiseModel::WrappedNormal { sigma2 } => sigma2.sqrt(),
            PhaseNoiseModel::VonMises { kappa } => {
                if kappa == 0.0 {
                    f64::INFINITY
                } else {
                    kappa.recip().sqrt()
                }
            }
        }
    }

    pub fn is_noiseless(&self) -> bool {
        matches!(*self, PhaseNoiseModel::WrappedNormal { sigma2 } if sigma2 == 0.0)
    }
}

/// `sigma2 = 6e-19 * b`.
pub fn sigma2_from_baudrate(b: f64) -> Result<f64> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::arg(format!("baud rate must be >= 0, got {b}")));
    }
    Ok(SIGMA2_PER_BAUD * b)
}

/// Phase variance from the full Kerr chain,
/// `4 xi^2 N / b * (2 - tau - tau (1 - ln tau)^2)`.
///
/// `xi` is supplied by the caller; the calibrated endpoint
/// [`sigma2_from_baudrate`] is what the experiments use.
pub fn sigma2_full_chain(xi: f64, photon_flux: f64, b: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::arg(format!(
            "transmittivity must lie in (0, 1), got {tau}"
        )));
    }
    if !(b > 0.0) {
        return Err(Error::arg(format!("baud rate must be > 0, got {b}")));
    }
    if !(photon_flux >= 0.0) || !(xi >= 0.0) {
        return Err(Error::arg("photon flux and xi must be >= 0"));
    }
    let log_term = 1.0 - tau.ln();
    let bracket = 2.0 - tau - tau * log_term * log_term;
    Ok(4.0 * xi * xi * photon_flux / b * bracket)
}

/// `kappa = 1e19 / (6 b)`.
pub fn kappa_from_baudrate(b: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::arg(format!("baud rate must be > 0, got {b}")));
    }
    Ok(KAPPA_TIMES_BAUD / b)
}

/// Maps an angle onto `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Sampler for a [`PhaseNoiseModel`].
///
/// The von Mises branch is the Best-Fisher rejection sampler rewritten in
/// terms of `1 - w` and `s - 1` so that it stays exact for concentrations
/// far beyond `1e6`.
#[derive(Debug, Clone, Copy)]
pub struct PhaseSampler {
    inner: SamplerKind,
}

#[derive(Debug, Clone, Copy)]
enum SamplerKind {
    Constant,
    Uniform,
    Normal { std: f64 },
    BestFisher { kappa: f64, s_minus_1: f64 },
}

impl PhaseSampler {
    pub fn new(model: &PhaseNoiseModel) -> Self {
        let inner = match *model {
            PhaseNoiseModel::WrappedNormal { sigma2: 0.0 } => SamplerKind::Constant,
            PhaseNoiseModel::WrappedNormal { sigma2 } => SamplerKind::Normal { std: sigma2.sqrt() },
            PhaseNoiseModel::VonMises { kappa } if kappa < 1e-12 => SamplerKind::Uniform,
            PhaseNoiseModel::VonMises { kappa } if kappa > VON_MISES_NORMAL_FALLBACK => {
                SamplerKind::Normal {
                    std: kappa.recip().sqrt(),
                }
            }
            PhaseNoiseModel::VonMises { kappa } => {
                let root = (1.0 + 4.0 * kappa * kappa).sqrt();
                let r = 1.0 + root;
                let sqrt_2r = (2.0 * r).sqrt();
                // rho = (r - sqrt(2r)) / (2 kappa) and 1 - rho, both without cancellation.
                let r_minus_2 = 4.0 * kappa * kappa / (root + 1.0);
                let rho = r * r_minus_2 / (r + sqrt_2r) / (2.0 * kappa);
                let one_minus_rho = (sqrt_2r - 1.0 - 1.0 / (root + 2.0 * kappa)) / (2.0 * kappa);
                SamplerKind::BestFisher {
                    kappa,
                    s_minus_1: one_minus_rho * one_minus_rho / (2.0 * rho),
                }
            }
        };
        Self { inner }
    }
}

impl Distribution<f64> for PhaseSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.inner {
            SamplerKind::Constant => 0.0,
            SamplerKind::Uniform => wrap_angle(PI - TAU * rng.random::<f64>()),
            SamplerKind::Normal { std } => {
                let z: f64 = StandardNormal.sample(rng);
                wrap_angle(std * z)
            }
            SamplerKind::BestFisher { kappa, s_minus_1 } => loop {
                let half_angle = 0.5 * PI * rng.random::<f64>();
                let (sin_h, cos_h) = half_angle.sin_cos();
                let one_minus_z = 2.0 * sin_h * sin_h;
                let one_plus_z = 2.0 * cos_h * cos_h;
                let one_minus_w = s_minus_1 * one_minus_z / (s_minus_1 + one_plus_z);
                let y = kappa * (s_minus_1 + one_minus_w);
                let v = 1.0 - rng.random::<f64>();
                if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
                    // acos(1 - d) = 2 asin(sqrt(d / 2))
                    let theta = 2.0 * (0.5 * one_minus_w).sqrt().min(1.0).asin();
                    break if rng.random::<bool>() { theta } else { -theta };
                }
            },
        }
    }
}

/// Draws `count` i.i.d. phases in `(-pi, pi]`.
pub fn sample_phases<R: Rng + ?Sized>(
    model: &PhaseNoiseModel,
    count: usize,
    rng: &mut R,
) -> Vec<f64> {
    let sampler = PhaseSampler::new(model);
    (0..count).map(|_| sampler.sample(rng)).collect()
}

const CF_EPS: f64 = 1e-16;
const CF_MAX_TERMS: usize = 100_000;

/// Tail `a1 / (b1 + a2 / (b2 + ...))` of Perron's continued fraction for
/// `I_nu(x) / I_{nu-1}(x) = x / (2 nu + x + tail)` with
/// `a_k = -(2 nu + 2k - 1) x` and `b_k = 2 nu + k + 2x`.
///
/// Converges in a handful of terms for large `x`, which is the regime where
/// the power series is useless.
fn perron_tail(nu: u32, x: f64) -> f64 {
    let nu = f64::from(nu);
    let a = |k: f64| -(2.0 * nu + 2.0 * k - 1.0) * x;
    let b = |k: f64| 2.0 * nu + k + 2.0 * x;
    // Modified Lentz on b1 + a2/(b2 + ...); every b_k > 0.
    const TINY: f64 = 1e-300;
    let mut f = b(1.0);
    let mut c = f;
    let mut d = 0.0;
    for k in 2..CF_MAX_TERMS {
        let k = k as f64;
        let (ak, bk) = (a(k), b(k));
        d = bk + ak * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = bk + ak / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = d.recip();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    a(1.0) / f
}

/// `I_1(kappa) / I_0(kappa)` together with its complement `1 - I_1/I_0`,
/// both to full relative precision.
pub fn bessel_ratio1_with_complement(kappa: f64) -> (f64, f64) {
    if kappa <= 0.0 {
        return (0.0, 1.0);
    }
    let tail = perron_tail(1, kappa);
    let denom = 2.0 + kappa + tail;
    (kappa / denom, (2.0 + tail) / denom)
}

/// `I_nu(kappa) / I_0(kappa)` for integer `nu >= 0`, overflow-free for any
/// finite `kappa >= 0`.
pub fn bessel_ratio(nu: u32, kappa: f64) -> f64 {
    if nu == 0 {
        return 1.0;
    }
    if kappa <= 0.0 {
        return 0.0;
    }
    (1..=nu)
        .map(|j| kappa / (2.0 * f64::from(j) + kappa + perron_tail(j, kappa)))
        .product()
}

/// Circular moments of a zero-mean phase law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularMoments {
    /// `E[cos Phi]`, the mean resultant length.
    pub m1: f64,
    /// `E[cos 2 Phi]`.
    pub m2: f64,
    /// `Var(cos Phi) = (1 + m2)/2 - m1^2`.
    pub var_cos: f64,
    /// `m2 - m1^2`, the "second raw moment minus squared mean" expression.
    /// Negative whenever the law is concentrated; kept for comparison only.
    pub var_cos_printed: f64,
}

pub fn circular_moments(model: &PhaseNoiseModel) -> CircularMoments {
    match *model {
        PhaseNoiseModel::WrappedNormal { sigma2 } => {
            let m1 = (-0.5 * sigma2).exp();
            let m2 = (-2.0 * sigma2).exp();
            // (1 + e^{-2s})/2 - e^{-s} = (1 - e^{-s})^2 / 2
            let d = -(-sigma2).exp_m1();
            CircularMoments {
                m1,
                m2,
                var_cos: 0.5 * d * d,
                var_cos_printed: m2 - m1 * m1,
            }
        }
        PhaseNoiseModel::VonMises { kappa } => {
            if kappa == 0.0 {
                return CircularMoments {
                    m1: 0.0,
                    m2: 0.0,
                    var_cos: 0.5,
                    var_cos_printed: 0.0,
                };
            }
            let (m1, d) = bessel_ratio1_with_complement(kappa);
            let m2 = bessel_ratio(2, kappa);
            let var_cos = if kappa < 1.0 {
                0.5 * (1.0 + m2) - m1 * m1
            } else {
                // With m2 = 1 - 2 m1 / kappa and d = 1 - m1:
                // var = (2d - 1/kappa) + d/kappa - d^2, small terms kept apart.
                (2.0 * d - kappa.recip()) + d / kappa - d * d
            };
            CircularMoments {
                m1,
                m2,
                var_cos: var_cos.max(0.0),
                var_cos_printed: m2 - m1 * m1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Ascending series `I_nu(x) = sum (x/2)^{2k+nu} / (k! (k+nu)!)`.
    fn bessel_i_series(nu: u32, x: f64) -> f64 {
        let half = 0.5 * x;
        let mut term = half.powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..200 {
            let k = k as f64;
            term *= half * half / (k * (k + f64::from(nu)));
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    #[test]
    fn calibrated_endpoints() {
        assert!((sigma2_from_baudrate(1e11).unwrap() - 6e-8).abs() < 1e-22);
        assert_eq!(sigma2_from_baudrate(0.0).unwrap(), 0.0);
        assert!((sigma2_from_baudrate(4e11).unwrap() - 2.4e-7).abs() < 1e-21);
        assert!(sigma2_from_baudrate(-1.0).is_err());

        assert!((kappa_from_baudrate(1e11).unwrap() - 1.666_666_666_7e7).abs() < 1e-2);
        assert!((kappa_from_baudrate(1e19 / 6.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(kappa_from_baudrate(0.0).is_err());
        for b in [1e9, 5e10, 1.3e11, 4e11, 7.7e12] {
            let k = kappa_from_baudrate(b).unwrap();
            let s = sigma2_from_baudrate(b).unwrap();
            assert!((k * s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_chain() {
        assert_eq!(sigma2_full_chain(1e-7, 0.0, 1e11, 0.5).unwrap(), 0.0);
        let (xi, n, b) = (3e-9, 2e15, 7e10);
        let small_tau = sigma2_full_chain(xi, n, b, 1e-5).unwrap();
        let limit = 8.0 * xi * xi * n / b;
        assert!((small_tau / limit - 1.0).abs() < 1e-3);

        let tau = (-0.046f64 * 250.0).exp();
        for b in [5e10, 1.3e11, 4e11] {
            let s = sigma2_full_chain(2.8e-18 * b, 1e16, b, tau).unwrap();
            assert!((s / (6e-19 * b) - 1.0).abs() < 0.1, "b={b}: {s}");
        }
        assert!(sigma2_full_chain(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(sigma2_full_chain(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bessel_ratio_examples() {
        for kappa in [0.0, 0.3, 5.0, 1e9] {
            assert_eq!(bessel_ratio(0, kappa), 1.0);
        }
        assert_eq!(bessel_ratio(1, 0.0), 0.0);
        let oracle = bessel_i_series(1, 2.0) / bessel_i_series(0, 2.0);
        assert!((bessel_ratio(1, 2.0) - oracle).abs() < 1e-10);
        let k = 1e7;
        let asym = 1.0 - 1.0 / (2.0 * k) - 1.0 / (8.0 * k * k);
        assert!((bessel_ratio(1, k) - asym).abs() < 1e-12);
    }

    #[test]
    fn bessel_ratio_matches_series_for_small_kappa() {
        for nu in 1..=4 {
            for i in 1..=100 {
                let x = 0.1 * i as f64;
                let oracle = bessel_i_series(nu, x) / bessel_i_series(0, x);
                let got = bessel_ratio(nu, x);
                assert!(
                    (got - oracle).abs() < 1e-13,
                    "nu={nu} x={x}: {got} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn bessel_ratio_extreme_kappa() {
        let r = bessel_ratio(1, 1e9);
        assert!(r.is_finite() && r < 1.0 && r > 0.999_999_99);
        let (ratio, comp) = bessel_ratio1_with_complement(1e9);
        assert!((ratio + comp - 1.0).abs() < 1e-15);
        let expect = 0.5e-9 + 0.125e-18;
        assert!((comp / expect - 1.0).abs() < 1e-9);
    }

    #[test]
    fn moments_limits() {
        let uni = circular_moments(&PhaseNoiseModel::von_mises(0.0).unwrap());
        assert_eq!(uni.m1, 0.0);
        assert_eq!(uni.var_cos, 0.5);
        let still = circular_moments(&PhaseNoiseModel::wrapped_normal(0.0).unwrap());
        assert_eq!(still.m1, 1.0);
        assert_eq!(still.var_cos, 0.0);
    }

    #[test]
    fn concentrated_var_cos_is_quadratic_in_inverse_kappa() {
        // Var(cos Phi) ~ 1/(2 kappa^2) while m2 - m1^2 ~ -1/kappa.
        for kappa in [1e2, 1e4, 1e7] {
            let m = circular_moments(&PhaseNoiseModel::von_mises(kappa).unwrap());
            assert!(
                (m.var_cos * 2.0 * kappa * kappa - 1.0).abs() < 3.0 / kappa,
                "{kappa}: {m:?}"
            );
            assert!((m.var_cos_printed * kappa + 1.0).abs() < 2.0 / kappa);
        }
    }

    #[test]
    fn var_cos_matches_direct_formula_at_moderate_kappa() {
        for kappa in [0.05, 0.5, 1.0, 3.0, 20.0] {
            let m = circular_moments(&PhaseNoiseModel::von_mises(kappa).unwrap());
            let direct = 0.5 * (1.0 + m.m2) - m.m1 * m.m1;
            assert!((m.var_cos - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn von_mises_approaches_wrapped_normal() {
        for kappa in [1e3, 1e5, 1e7] {
            let vm = circular_moments(&PhaseNoiseModel::von_mises(kappa).unwrap());
            let wn = circular_moments(&PhaseNoiseModel::wrapped_normal(1.0 / kappa).unwrap());
            assert!((vm.m1 - wn.m1).abs() < 1.0 / kappa);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.25), 0.25);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI + 0.5) - (-PI + 0.5)).abs() < 1e-12);
        assert!((wrap_angle(7.0) - (7.0 - TAU)).abs() < 1e-15);
    }

    fn trig_moments(xs: &[f64]) -> (f64, f64, f64, f64) {
        let n = xs.len() as f64;
        let c1: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let c2: Vec<f64> = xs.iter().map(|x| (2.0 * x).cos()).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
        let se = |v: &[f64], m: f64| {
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        };
        let (m1, m2) = (mean(&c1), mean(&c2));
        (m1, se(&c1, m1), m2, se(&c2, m2))
    }

    #[test]
    fn zero_variance_samples_are_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs = sample_phases(
            &PhaseNoiseModel::wrapped_normal(0.0).unwrap(),
            100,
            &mut rng,
        );
        assert!(xs.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn samplers_match_analytic_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let models = [
            PhaseNoiseModel::von_mises(0.0).unwrap(),
            PhaseNoiseModel::von_mises(0.4).unwrap(),
            PhaseNoiseModel::von_mises(2.0).unwrap(),
            PhaseNoiseModel::von_mises(30.0).unwrap(),
            PhaseNoiseModel::von_mises(1.6667e7).unwrap(),
            PhaseNoiseModel::von_mises(5e8).unwrap(),
            PhaseNoiseModel::wrapped_normal(0.3).unwrap(),
            PhaseNoiseModel::wrapped_normal(4.0).unwrap(),
            PhaseNoiseModel::wrapped_normal(6e-8).unwrap(),
        ];
        for model in models {
            let xs = sample_phases(&model, 100_000, &mut rng);
            assert!(xs.iter().all(|&x| x > -PI && x <= PI));
            let m = circular_moments(&model);
            let (e1, s1, e2, s2) = trig_moments(&xs);
            assert!(
                (e1 - m.m1).abs() <= 3.0 * s1 + 1e-15,
                "{model:?}: m1 {e1} vs {} (se {s1})",
                m.m1
            );
            assert!(
                (e2 - m.m2).abs() <= 3.0 * s2 + 1e-15,
                "{model:?}: m2 {e2} vs {} (se {s2})",
                m.m2
            );
        }
    }

    #[test]
    fn wrapped_normal_circular_variance() {
        let sigma2 = 6e-8;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let xs = sample_phases(
            &PhaseNoiseModel::wrapped_normal(sigma2).unwrap(),
            100_000,
            &mut rng,
        );
        // circular variance 1 - |mean resultant|, estimated through 1 - cos
        let d: Vec<f64> = xs.iter().map(|x| 2.0 * (0.5 * x).sin().powi(2)).collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let se = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let expect = -(-0.5 * sigma2).exp_m1();
        assert!(
            (mean - expect).abs() <= 3.0 * se,
            "{mean} vs {expect} (se {se})"
        );
    }

    #[test]
    fn huge_kappa_cosine_mean() {
        let kappa = 1.6667e7;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let xs = sample_phases(
            &PhaseNoiseModel::von_mises(kappa).unwrap(),
            100_000,
            &mut rng,
        );
        // 1 - cos, to keep the tiny deviation resolvable
        let d: Vec<f64> = xs.iter().map(|x| 2.0 * (0.5 * x).sin().powi(2)).collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let se = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let (_, comp) = bessel_ratio1_with_complement(kappa);
        assert!(
            (mean - comp).abs() <= 3.0 * se,
            "{mean} vs {comp} (se {se})"
        );
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!(
            "von-mises".parse::<ModelKind>().unwrap(),
            ModelKind::VonMises
        );
        assert_eq!(
            "wrapped-normal".parse::<ModelKind>().unwrap(),
            ModelKind::WrappedNormal
        );
        assert!("gaussian".parse::<ModelKind>().is_err());
        assert!(PhaseNoiseModel::von_mises(-1.0).is_err());
        assert!(PhaseNoiseModel::wrapped_normal(f64::NAN).is_err());
    }
}

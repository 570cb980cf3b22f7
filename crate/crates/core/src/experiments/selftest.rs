//! Fast invariant suite behind `jdrsim selftest`.

use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::capacity::{mi_product_channel, PortLawEstimate, SIGN_MINUS, SIGN_PLUS};
use crate::detection::detection_probs;
use crate::model::{hadamard_entry, hadamard_receiver_transform, ComplexAmplitude};
use crate::noise::bessel_ratio;
use crate::rng::rng_from_seed;
use crate::HadamardOrder;

/// Signature of [`detection_probs`], injectable for mutation checks.
pub type DetectionProbsFn = fn(f64, f64) -> [f64; 3];

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(
                f,
                "{:<4} {:<22} {:>9.3} ms  {}",
                if s.passed { "PASS" } else { "FAIL" },
                s.name,
                s.elapsed.as_secs_f64() * 1e3,
                s.detail
            )?;
        }
        write!(
            f,
            "{}",
            if self.passed() {
                "selftest passed"
            } else {
                "selftest FAILED"
            }
        )
    }
}

/// `I(Y^n; A, N)` of the product channel by summing over all `3^n` outputs.
pub fn exact_product_channel_mi(law: &PortLawEstimate, n: usize) -> f64 {
    let inputs = 2 * n;
    let mut y = vec![0usize; n];
    let mut cond = vec![0.0; inputs];
    let mut total = 0.0;
    for mut code in 0..3usize.pow(n as u32) {
        for slot in y.iter_mut() {
            *slot = code % 3;
            code /= 3;
        }
        for (sign, chunk) in [SIGN_PLUS, SIGN_MINUS].into_iter().zip(cond.chunks_mut(n)) {
            for (k, c) in chunk.iter_mut().enumerate() {
                *c = y
                    .iter()
                    .enumerate()
                    .map(|(j, &yj)| {
                        if j == k {
                            law.p_on[sign][yj]
                        } else {
                            law.p_off[sign][yj]
                        }
                    })
                    .product();
            }
        }
        let marginal = cond.iter().sum::<f64>() / inputs as f64;
        for &c in &cond {
            if c > 0.0 {
                total += c * (c / marginal).log2();
            }
        }
    }
    total / inputs as f64
}

fn timed(name: &'static str, body: impl FnOnce() -> Result<String, String>) -> SuiteResult {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    match outcome {
        Ok(detail) => SuiteResult {
            name,
            passed: true,
            detail,
            elapsed,
        },
        Err(detail) => SuiteResult {
            name,
            passed: false,
            detail,
            elapsed,
        },
    }
}

fn normalization(probs: DetectionProbsFn) -> Result<String, String> {
    let mut rng = rng_from_seed(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let beta = rng.random_range(-20.0..20.0);
        let eps = rng.random_range(0.0..20.0);
        let p = probs(beta, eps);
        if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(format!(
                "probability outside [0, 1] at beta={beta}, eps={eps}: {p:?}"
            ));
        }
        worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
    }
    if worst < 1e-12 {
        Ok(format!("max |sum - 1| = {worst:e}"))
    } else {
        Err(format!("max |sum - 1| = {worst:e}"))
    }
}

fn butterfly() -> Result<String, String> {
    let mut rng = rng_from_seed(2);
    let mut worst = 0.0f64;
    for log2 in 1..=6 {
        let order = HadamardOrder::from_log2(log2).map_err(|e| e.to_string())?;
        let n = order.n();
        let scale = (n as f64).sqrt().recip();
        for _ in 0..20 {
            let x: Vec<ComplexAmplitude> = (0..n)
                .map(|_| {
                    ComplexAmplitude::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
                .collect();
            let fast = hadamard_receiver_transform(&x).map_err(|e| e.to_string())?;
            for (j, f) in fast.iter().enumerate() {
                let mut dense = ComplexAmplitude::new(0.0, 0.0);
                for (k, xk) in x.iter().enumerate() {
                    dense +=
                        *xk * f64::from(hadamard_entry(j, k, order).map_err(|e| e.to_string())?);
                }
                worst = worst.max((dense * scale - f).norm());
            }
        }
    }
    if worst < 1e-12 {
        Ok(format!("n = 2..64, max |diff| = {worst:e}"))
    } else {
        Err(format!("max |diff| = {worst:e}"))
    }
}

fn mi_oracle(probs: DetectionProbsFn) -> Result<String, String> {
    let n = 2;
    let order = HadamardOrder::new(n).map_err(|e| e.to_string())?;
    let mut rng = rng_from_seed(3);
    let mut worst = 0.0f64;
    for (beta_on, beta_off, eps) in [(1.2, 0.1, 0.5), (0.4, -0.2, 0.3), (2.0, 0.0, 1.0)] {
        let on = probs(beta_on, eps);
        let off = probs(beta_off, eps);
        let law = PortLawEstimate::from_plus_rows(on, off).map_err(|e| e.to_string())?;
        let exact = exact_product_channel_mi(&law, n);
        let mc = mi_product_channel(&law, order, 100_000, &mut rng).map_err(|e| e.to_string())?;
        let z = (mc.mean_bits - exact).abs() / mc.std_error.max(1e-15);
        worst = worst.max(z);
        if z > 4.0 {
            return Err(format!(
                "MC {} vs exact {exact} ({z:.1} standard errors)",
                mc.mean_bits
            ));
        }
    }
    Ok(format!("worst deviation {worst:.2} standard errors"))
}

/// `I_1(x) / I_0(x)` from the power series of both functions.
fn series_ratio(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut i0, mut i1) = (0.0, 0.0);
    let mut term = 1.0;
    for k in 0..200 {
        let kf = k as f64;
        if k > 0 {
            term *= q / (kf * kf);
        }
        i0 += term;
        i1 += term * 0.5 * x / (kf + 1.0);
    }
    i1 / i0
}

fn asymptotic_ratio(x: f64) -> f64 {
    let u = x.recip();
    1.0 - u * (0.5 + u * (0.125 + u * (0.125 + u * (25.0 / 128.0 + u * (13.0 / 32.0)))))
}

fn bessel() -> Result<String, String> {
    let mut small = 0.0f64;
    for i in 1..=100 {
        let x = 0.1 * i as f64;
        small = small.max((bessel_ratio(1, x) - series_ratio(x)).abs());
    }
    let mut large = 0.0f64;
    for x in [1e6, 3e6, 1e7, 1e9, 1e12] {
        large = large.max((bessel_ratio(1, x) - asymptotic_ratio(x)).abs());
    }
    if small < 1e-10 && large < 1e-12 {
        Ok(format!("series {small:e}, asymptotic {large:e}"))
    } else {
        Err(format!("series {small:e}, asymptotic {large:e}"))
    }
}

pub fn selftest() -> SelftestReport {
    selftest_with(detection_probs)
}

/// Runs every suite with `probs` standing in for [`detection_probs`].
pub fn selftest_with(probs: DetectionProbsFn) -> SelftestReport {
    SelftestReport {
        suites: vec![
            timed("normalization", || normalization(probs)),
            timed("butterfly-vs-matrix", butterfly),
            timed("mi-oracle-n2", || mi_oracle(probs)),
            timed("bessel-ratio", bessel),
        ],
    }
}

//! Hadamard codebook, beamsplitter network and the noisy received-amplitude map.
//!
//! A codeword for port `k` is the `k`-th column of the Sylvester-ordered
//! Hadamard matrix scaled by the BPSK amplitude. The receiver applies
//! `H_n / sqrt(n)` through `log2(n)` stages of 50:50 beamsplitters, which
//! routes all of a noiseless codeword's energy into output port `k`.
//!
//! The receiver is assumed phase-locked to the transmitter, so `alpha` is
//! normally real and non-negative. Phase noise multiplies each pulse by
//! `exp(+i * phi)`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::{Error, Result};

/// Coherent-state amplitude; `norm_sqr()` is the mean photon number per pulse.
pub type ComplexAmplitude = Complex64;

/// Energy of a single photon at 1550 nm in joules (`hbar * omega_0`).
pub const PHOTON_ENERGY_1550NM_J: f64 = 1.281_577_9e-19;

/// Checked constructor for an amplitude; rejects NaN and infinite parts.
pub fn amplitude(re: f64, im: f64) -> Result<ComplexAmplitude> {
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::arg(format!("amplitude ({re}, {im}) is not finite")));
    }
    Ok(Complex64::new(re, im))
}

/// Pulse energy `E = hbar * omega_0 * |alpha|^2`.
pub fn pulse_energy(alpha: ComplexAmplitude, photon_energy_j: f64) -> f64 {
    photon_energy_j * alpha.norm_sqr()
}

/// Real amplitude carrying `energy_j` joules: `sqrt(E / (hbar * omega_0))`.
pub fn amplitude_from_energy(energy_j: f64, photon_energy_j: f64) -> Result<f64> {
    if !(energy_j >= 0.0) || !(photon_energy_j > 0.0) {
        return Err(Error::arg("energy must be >= 0 and photon energy > 0"));
    }
    Ok((energy_j / photon_energy_j).sqrt())
}

/// Order `n = 2^K` of a Hadamard receiver, `K >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HadamardOrder {
    log2: u32,
}

impl HadamardOrder {
    /// Largest supported `K`; keeps `n` well inside `usize` and memory.
    pub const MAX_LOG2: u32 = 24;

    pub fn from_log2(log2: u32) -> Result<Self> {
        if log2 == 0 {
            return Err(Error::arg("Hadamard order n = 1 is not a receiver"));
        }
        if log2 > Self::MAX_LOG2 {
            return Err(Error::arg(format!("Hadamard order 2^{log2} is too large")));
        }
        Ok(Self { log2 })
    }

    /// Accepts `n` if it is a power of two with `n >= 2`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::arg(format!(
                "Hadamard order must be a power of two >= 2, got {n}"
            )));
        }
        Self::from_log2(n.trailing_zeros())
    }

    #[inline]
    pub fn n(self) -> usize {
        1 << self.log2
    }

    #[inline]
    pub fn log2(self) -> u32 {
        self.log2
    }

    fn check_index(self, idx: usize, what: &str) -> Result<()> {
        if idx >= self.n() {
            return Err(Error::arg(format!(
                "{what} index {idx} out of range for n = {}",
                self.n()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for HadamardOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.n())
    }
}

#[inline]
fn sign(j: usize, k: usize) -> i8 {
    if (j & k).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `(H_n)_{j,k} = (-1)^{popcount(j & k)}`.
pub fn hadamard_entry(j: usize, k: usize, order: HadamardOrder) -> Result<i8> {
    order.check_index(j, "row")?;
    order.check_index(k, "column")?;
    Ok(sign(j, k))
}

/// Signature vector `t(i, k)_m = H_{i,m} H_{m,k}`.
///
/// Off-diagonal signatures contain exactly `n/2` entries of each sign.
pub fn signature(i: usize, k: usize, order: HadamardOrder) -> Result<Vec<i8>> {
    order.check_index(i, "row")?;
    order.check_index(k, "column")?;
    Ok((0..order.n()).map(|m| sign(i, m) * sign(m, k)).collect())
}

/// Codeword for port `k`: element `j` is `H_{j,k} * alpha`.
pub fn encode_codeword(
    k: usize,
    alpha: ComplexAmplitude,
    order: HadamardOrder,
) -> Result<Vec<ComplexAmplitude>> {
    order.check_index(k, "codeword")?;
    Ok((0..order.n())
        .map(|j| if sign(j, k) > 0 { alpha } else { -alpha })
        .collect())
}

/// 50:50 beamsplitter: `(a, b) -> ((a + b)/sqrt2, (a - b)/sqrt2)`.
#[inline]
pub fn beamsplitter(
    a: ComplexAmplitude,
    b: ComplexAmplitude,
) -> (ComplexAmplitude, ComplexAmplitude) {
    ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2)
}

/// In-place `H_n / sqrt(n)` through `log2(n)` stages of beamsplitters.
///
/// Stage `s` couples modes `i` and `i + 2^s`. The length must be a power of
/// two and at least 2.
pub fn hadamard_in_place(modes: &mut [ComplexAmplitude]) -> Result<()> {
    let n = modes.len();
    HadamardOrder::new(n)?;
    let mut half = 1;
    while half < n {
        for block in modes.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = beamsplitter(*a, *b);
                *a = s;
                *b = d;
            }
        }
        half *= 2;
    }
    Ok(())
}

/// Output amplitudes of the Hadamard receiver for the given input modes.
pub fn hadamard_receiver_transform(amps: &[ComplexAmplitude]) -> Result<Vec<ComplexAmplitude>> {
    let mut out = amps.to_vec();
    hadamard_in_place(&mut out)?;
    Ok(out)
}

/// Receiver output for codeword `k` after per-pulse phase rotations.
///
/// Port `k'` holds `n^{-1/2} alpha sum_m H_{k,m} H_{m,k'} exp(i phi_m)`.
pub fn received_amplitudes(
    k: usize,
    alpha: ComplexAmplitude,
    phases: &[f64],
    order: HadamardOrder,
) -> Result<Vec<ComplexAmplitude>> {
    let mut modes = Vec::with_capacity(order.n());
    received_amplitudes_into(k, alpha, phases, order, &mut modes)?;
    Ok(modes)
}

/// Buffer-reusing form of [`received_amplitudes`] for Monte-Carlo loops.
pub fn received_amplitudes_into(
    k: usize,
    alpha: ComplexAmplitude,
    phases: &[f64],
    order: HadamardOrder,
    out: &mut Vec<ComplexAmplitude>,
) -> Result<()> {
    order.check_index(k, "codeword")?;
    if phases.len() != order.n() {
        return Err(Error::arg(format!(
            "expected {} phases, got {}",
            order.n(),
            phases.len()
        )));
    }
    out.clear();
    out.extend(phases.iter().enumerate().map(|(j, &phi)| {
        let rotated = alpha * Complex64::from_polar(1.0, phi);
        if sign(j, k) > 0 {
            rotated
        } else {
            -rotated
        }
    }));
    hadamard_in_place(out)
}

/// Fiber link: loss, length, symbol rate and transmitted photon flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Attenuation coefficient `a` in 1/km (natural-log units).
    pub attenuation_per_km: f64,
    pub length_km: f64,
    /// Symbols (pulses) per second.
    pub baud_rate: f64,
    /// Transmitted photons per second.
    pub photon_flux: f64,
}

impl LinkParams {
    pub fn new(
        attenuation_per_km: f64,
        length_km: f64,
        baud_rate: f64,
        photon_flux: f64,
    ) -> Result<Self> {
        if !(attenuation_per_km >= 0.0) || !attenuation_per_km.is_finite() {
            return Err(Error::arg(format!(
                "attenuation must be >= 0, got {attenuation_per_km}"
            )));
        }
        if !(length_km >= 0.0) || !length_km.is_finite() {
            return Err(Error::arg(format!(
                "fiber length must be >= 0, got {length_km}"
            )));
        }
        if !(baud_rate > 0.0) || !baud_rate.is_finite() {
            return Err(Error::arg(format!(
                "baud rate must be > 0, got {baud_rate}"
            )));
        }
        if !(photon_flux >= 0.0) || !photon_flux.is_finite() {
            return Err(Error::arg(format!(
                "photon flux must be >= 0, got {photon_flux}"
            )));
        }
        Ok(Self {
            attenuation_per_km,
            length_km,
            baud_rate,
            photon_flux,
        })
    }

    /// `tau = exp(-a L)`.
    pub fn transmittivity(&self) -> f64 {
        (-self.attenuation_per_km * self.length_km).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(n: usize) -> HadamardOrder {
        HadamardOrder::new(n).unwrap()
    }

    fn dense_transform(amps: &[Complex64]) -> Vec<Complex64> {
        let n = amps.len();
        let scale = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|j| {
                amps.iter()
                    .enumerate()
                    .map(|(k, a)| a * f64::from(sign(j, k)))
                    .sum::<Complex64>()
                    * scale
            })
            .collect()
    }

    #[test]
    fn entry_examples() {
        assert_eq!(hadamard_entry(0, 5, order(8)).unwrap(), 1);
        assert_eq!(hadamard_entry(1, 1, order(2)).unwrap(), -1);
        assert_eq!(hadamard_entry(3, 3, order(4)).unwrap(), 1);
        assert!(hadamard_entry(4, 0, order(4)).is_err());
        assert!(hadamard_entry(0, 8, order(8)).is_err());
    }

    #[test]
    fn order_validation() {
        assert!(HadamardOrder::new(1).is_err());
        assert!(HadamardOrder::new(0).is_err());
        assert!(HadamardOrder::new(12).is_err());
        assert_eq!(HadamardOrder::new(64).unwrap().log2(), 6);
        assert!(HadamardOrder::from_log2(0).is_err());
    }

    #[test]
    fn symmetric_and_orthogonal() {
        for log2 in 1..=6 {
            let o = HadamardOrder::from_log2(log2).unwrap();
            let n = o.n();
            for i in 0..n {
                assert_eq!(hadamard_entry(i, 0, o).unwrap(), 1);
                for k in 0..n {
                    assert_eq!(
                        hadamard_entry(i, k, o).unwrap(),
                        hadamard_entry(k, i, o).unwrap()
                    );
                    let dot: i64 = (0..n)
                        .map(|m| i64::from(sign(i, m)) * i64::from(sign(k, m)))
                        .sum();
                    assert_eq!(dot, if i == k { n as i64 } else { 0 });
                }
            }
        }
    }

    #[test]
    fn off_diagonal_signatures_are_balanced() {
        let o = order(16);
        for i in 0..16 {
            for k in 0..16 {
                let t = signature(i, k, o).unwrap();
                let sum: i32 = t.iter().map(|&s| i32::from(s)).sum();
                assert_eq!(sum, if i == k { 16 } else { 0 });
            }
        }
    }

    #[test]
    fn codeword_examples() {
        let a = Complex64::new(0.7, 0.0);
        assert_eq!(encode_codeword(0, a, order(4)).unwrap(), vec![a; 4]);
        assert_eq!(encode_codeword(1, a, order(2)).unwrap(), vec![a, -a]);
        let one = Complex64::new(1.0, 0.0);
        let w = encode_codeword(3, one, order(4)).unwrap();
        let re: Vec<f64> = w.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![1.0, -1.0, -1.0, 1.0]);
        assert!(encode_codeword(4, one, order(4)).is_err());
    }

    #[test]
    fn beamsplitter_examples() {
        let a = Complex64::new(0.3, -1.2);
        let (s, d) = beamsplitter(a, a);
        assert!((s - a * std::f64::consts::SQRT_2).norm() < 1e-15);
        assert_eq!(d, Complex64::new(0.0, 0.0));
        let (s, d) = beamsplitter(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0));
        assert!(s.norm() < 1e-15);
        assert!((d.re - std::f64::consts::SQRT_2).abs() < 1e-15);
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(beamsplitter(z, z), (z, z));
    }

    #[test]
    fn noiseless_codeword_concentrates_in_one_port() {
        let alpha = Complex64::new(0.9, 0.0);
        for n in [2, 4, 8, 16, 32, 64] {
            let o = order(n);
            for k in 0..n {
                let out =
                    hadamard_receiver_transform(&encode_codeword(k, alpha, o).unwrap()).unwrap();
                for (port, v) in out.iter().enumerate() {
                    if port == k {
                        assert!((v - alpha * (n as f64).sqrt()).norm() < 1e-12);
                    } else {
                        assert_eq!(v.norm(), 0.0, "n={n} k={k} port={port}");
                    }
                }
            }
        }
    }

    #[test]
    fn transform_rejects_bad_lengths() {
        let z = Complex64::new(0.0, 0.0);
        assert!(hadamard_receiver_transform(&[z; 3]).is_err());
        assert!(hadamard_receiver_transform(&[z; 1]).is_err());
        assert_eq!(hadamard_receiver_transform(&[z; 8]).unwrap(), vec![z; 8]);
    }

    #[test]
    fn received_two_port_example() {
        let alpha = Complex64::new(0.8, 0.0);
        let out = received_amplitudes(0, alpha, &[0.0, std::f64::consts::PI], order(2)).unwrap();
        assert!(out[0].norm() < 1e-15);
        assert!((out[1] - alpha * std::f64::consts::SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn received_matches_signature_sum() {
        let o = order(8);
        let alpha = Complex64::new(1.3, 0.0);
        let phases: Vec<f64> = (0..8).map(|m| 0.37 * m as f64 - 1.1).collect();
        for k in 0..8 {
            let out = received_amplitudes(k, alpha, &phases, o).unwrap();
            for kp in 0..8 {
                let t = signature(k, kp, o).unwrap();
                let direct: Complex64 = t
                    .iter()
                    .zip(&phases)
                    .map(|(&s, &p)| Complex64::from_polar(f64::from(s), p))
                    .sum::<Complex64>()
                    * alpha
                    / (8f64).sqrt();
                assert!((out[kp] - direct).norm() < 1e-12);
            }
        }
        assert!(received_amplitudes(0, alpha, &phases[..7], o).is_err());
    }

    #[test]
    fn butterfly_matches_dense_product() {
        let mut state = 0x2545_f491_4f6c_dd1d_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for n in [2, 4, 8, 16, 32, 64] {
            for _ in 0..20 {
                let amps: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
                let fast = hadamard_receiver_transform(&amps).unwrap();
                let dense = dense_transform(&amps);
                for (a, b) in fast.iter().zip(&dense) {
                    assert!((a - b).norm() < 1e-12);
                }
                let e_in: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                let e_out: f64 = fast.iter().map(|a| a.norm_sqr()).sum();
                assert!((e_in - e_out).abs() <= 1e-10 * e_in);
            }
        }
    }

    #[test]
    fn link_transmittivity() {
        let link = LinkParams::new(0.046, 250.0, 1e11, 1e16).unwrap();
        assert!((link.transmittivity() - (-11.5f64).exp()).abs() < 1e-20);
        assert!(LinkParams::new(0.046, 250.0, 0.0, 1e16).is_err());
        assert!(LinkParams::new(0.046, 250.0, 1e11, -1.0).is_err());
    }

    #[test]
    fn energy_convention() {
        let a = amplitude(3.0, 4.0).unwrap();
        assert!(
            (pulse_energy(a, PHOTON_ENERGY_1550NM_J) - 25.0 * PHOTON_ENERGY_1550NM_J).abs() < 1e-30
        );
        let back =
            amplitude_from_energy(25.0 * PHOTON_ENERGY_1550NM_J, PHOTON_ENERGY_1550NM_J).unwrap();
        assert!((back - 5.0).abs() < 1e-12);
        assert!(amplitude(f64::NAN, 0.0).is_err());
    }
}

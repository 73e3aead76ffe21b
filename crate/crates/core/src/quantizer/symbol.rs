use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Number of samples used when a symbol is given as a function.
pub const SAMPLE_COUNT: usize = 1 << 12;

/// A `tau`-periodic function of the angle, described by its Fourier
/// coefficients `c_k = (1/tau) int_0^tau f(g) exp(-2 pi i k g / tau) dg`.
#[derive(Debug, Clone, PartialEq)]
pub enum FourierSymbol {
    /// `tau`-periodic extension of `f(g) = g` on `[0, tau)`.
    Sawtooth { tau: f64 },
    /// `amplitude * exp(2 pi i k g / tau)`.
    Harmonic { tau: f64, k: i64, amplitude: Complex64 },
    /// Trapezoid coefficients of equally spaced samples on `[0, tau)`.
    Sampled { tau: f64, coeffs: Vec<Complex64> },
}

impl FourierSymbol {
    pub fn sawtooth(tau: f64) -> Self {
        FourierSymbol::Sawtooth { tau }
    }

    pub fn harmonic(tau: f64, k: i64) -> Self {
        FourierSymbol::Harmonic {
            tau,
            k,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    pub fn from_samples(tau: f64, samples: &[Complex64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument("need at least two samples".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("period {tau} must be positive")));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite sample".into()));
        }
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        let scale = 1.0 / samples.len() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        Ok(FourierSymbol::Sampled { tau, coeffs: buf })
    }

    pub fn from_fn(tau: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples: Vec<Complex64> = (0..SAMPLE_COUNT)
            .map(|j| f(tau * j as f64 / SAMPLE_COUNT as f64))
            .collect();
        Self::from_samples(tau, &samples)
    }

    pub fn tau(&self) -> f64 {
        match self {
            FourierSymbol::Sawtooth { tau }
            | FourierSymbol::Harmonic { tau, .. }
            | FourierSymbol::Sampled { tau, .. } => *tau,
        }
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        match self {
            FourierSymbol::Sawtooth { tau } => {
                if k == 0 {
                    Complex64::new(0.5 * tau, 0.0)
                } else {
                    Complex64::new(0.0, tau / (2.0 * PI * k as f64))
                }
            }
            FourierSymbol::Harmonic { k: kh, amplitude, .. } => {
                if k == *kh {
                    *amplitude
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            FourierSymbol::Sampled { coeffs, .. } => {
                let m = coeffs.len() as i64;
                // Frequencies above the Nyquist band are not represented.
                if 2 * k.abs() >= m {
                    return Complex64::new(0.0, 0.0);
                }
                coeffs[k.rem_euclid(m) as usize]
            }
        }
    }

    /// The classical function itself.
    pub fn eval(&self, gamma: f64) -> Complex64 {
        let tau = self.tau();
        match self {
            FourierSymbol::Sawtooth { .. } => Complex64::new(gamma.rem_euclid(tau), 0.0),
            FourierSymbol::Harmonic { k, amplitude, .. } => {
                *amplitude * Complex64::from_polar(1.0, 2.0 * PI * *k as f64 * gamma / tau)
            }
            FourierSymbol::Sampled { coeffs, .. } => {
                let m = coeffs.len() as i64;
                let kmax = (m - 1) / 2;
                (-kmax..=kmax)
                    .map(|k| self.coeff(k) * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * gamma / tau))
                    .sum()
            }
        }
    }

    /// `true` when `c_{-k} = conj(c_k)` holds by construction or, for
    /// sampled symbols, to `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        match self {
            FourierSymbol::Sawtooth { .. } => true,
            FourierSymbol::Harmonic { k, amplitude, .. } => *k == 0 && amplitude.im.abs() <= tol,
            FourierSymbol::Sampled { coeffs, .. } => {
                let kmax = (coeffs.len() as i64 - 1) / 2;
                (0..=kmax).all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= tol)
            }
        }
    }
}

/// Parses samples written one per line as `re` or `re,im`. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_samples(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::InvalidArgument(format!("line {}: cannot parse `{line}`", lineno + 1));
        let mut parts = line.split(',').map(str::trim);
        let re: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let im: f64 = match parts.next() {
            Some(p) => p.parse().map_err(|_| bad())?,
            None => 0.0,
        };
        if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
            return Err(bad());
        }
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sawtooth_coefficients_scale_with_period() {
        let s = FourierSymbol::sawtooth(2.0 * PI);
        assert_eq!(s.coeff(0).re, PI);
        assert!((s.coeff(1) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((s.coeff(-3) - s.coeff(3).conj()).norm() < 1e-15);
    }

    #[test]
    fn sampled_harmonic_has_single_coefficient() {
        let tau = 3.0;
        let s = FourierSymbol::from_fn(tau, |g| Complex64::from_polar(1.0, 2.0 * PI * 2.0 * g / tau)).unwrap();
        assert!((s.coeff(2) - 1.0).norm() < 1e-13);
        assert!(s.coeff(1).norm() < 1e-13 && s.coeff(-2).norm() < 1e-13);
    }

    #[test]
    fn sampled_sawtooth_approaches_closed_form() {
        let tau = 2.0 * PI;
        let sampled = FourierSymbol::from_fn(tau, |g| Complex64::new(g, 0.0)).unwrap();
        let exact = FourierSymbol::sawtooth(tau);
        for k in 1..5 {
            assert!((sampled.coeff(k) - exact.coeff(k)).norm() < 2e-3);
        }
        assert!(sampled.is_real(1e-12));
    }

    #[test]
    fn parses_sample_lines() {
        let v = parse_samples("# header\n1.0\n\n2.5, -1\n").unwrap();
        assert_eq!(v, vec![Complex64::new(1.0, 0.0), Complex64::new(2.5, -1.0)]);
        assert!(parse_samples("1,2,3").is_err());
        assert!(parse_samples("nan").is_err());
        assert!(parse_samples("x").is_err());
    }
}

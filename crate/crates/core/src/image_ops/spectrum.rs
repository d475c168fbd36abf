use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::ops::{Add, Mul, Sub};

use super::ScalarMap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn cis(theta: f64) -> Self {
        Self::new(libm::cos(theta), libm::sin(theta))
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// Unnormalised forward DFT, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`, any length.
pub fn fft_in_place(data: &mut [Complex]) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(data, false);
    } else {
        bluestein(data);
    }
}

fn radix2(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = sign * TAU / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = Complex::cis(step * k as f64);
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

fn bluestein(data: &mut [Complex]) {
    let n = data.len();
    let m = (2 * n - 1).next_power_of_two();
    // chirp[k] = exp(-i pi k^2 / n), with k^2 reduced mod 2n for accuracy.
    let chirp: Vec<Complex> = (0..n)
        .map(|k| {
            let k2 = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
            Complex::cis(-PI * k2 / n as f64)
        })
        .collect();
    let mut a = vec![Complex::default(); m];
    for k in 0..n {
        a[k] = data[k] * chirp[k];
    }
    let mut b = vec![Complex::default(); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[m - k] = chirp[k].conj();
    }
    radix2(&mut a, false);
    radix2(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x = *x * *y;
    }
    radix2(&mut a, true);
    let scale = 1.0 / m as f64;
    for k in 0..n {
        let c = a[k];
        data[k] = Complex::new(c.re * scale, c.im * scale) * chirp[k];
    }
}

/// Periodic Hann window `w[n] = 0.5 - 0.5 cos(2 pi n / N)`.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len).map(|i| 0.5 - 0.5 * libm::cos(TAU * i as f64 / len as f64)).collect()
}

/// Signed frequency of bin `k` in cycles per sample, in [-0.5, 0.5).
fn bin_frequency(k: usize, len: usize) -> f64 {
    if 2 * k < len {
        k as f64 / len as f64
    } else {
        k as f64 / len as f64 - 1.0
    }
}

/// Power spectrum of a Hann-windowed map with the radial frequency of every bin.
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    pub height: usize,
    pub width: usize,
    /// `|X(u, v)|^2` in natural FFT order (DC at index 0), row-major.
    pub power: Vec<f64>,
    /// `sqrt(f_u^2 + f_v^2)`, per-axis Nyquist at 0.5.
    pub rho: Vec<f64>,
}

impl PowerSpectrum {
    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Sum of power over bins with `rho > cutoff`.
    pub fn power_above(&self, cutoff: f64) -> f64 {
        self.power.iter().zip(&self.rho).filter(|(_, r)| **r > cutoff).map(|(p, _)| p).sum()
    }
}

/// Applies a separable periodic Hann window and returns the unnormalised 2-D power spectrum.
///
/// With this convention `sum(P) = H * W * sum((w * m)^2)` exactly (Parseval).
pub fn hann_power_spectrum(m: &ScalarMap) -> Result<PowerSpectrum> {
    let (h, w) = (m.height(), m.width());
    if h < 4 || w < 4 {
        return Err(Error::TooSmall { height: h, width: w, min: 4 });
    }
    let (wy, wx) = (hann_window(h), hann_window(w));
    let mut grid: Vec<Complex> =
        (0..h * w).map(|i| Complex::new(m.values()[i] as f64 * wy[i / w] * wx[i % w], 0.0)).collect();
    for row in grid.chunks_mut(w) {
        fft_in_place(row);
    }
    let mut column = vec![Complex::default(); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = grid[y * w + x];
        }
        fft_in_place(&mut column);
        for y in 0..h {
            grid[y * w + x] = column[y];
        }
    }
    let power = grid.iter().map(|c| c.norm_sqr()).collect();
    let mut rho = Vec::with_capacity(h * w);
    for u in 0..h {
        let fu = bin_frequency(u, h);
        for v in 0..w {
            let fv = bin_frequency(v, w);
            rho.push(libm::sqrt(fu * fu + fv * fv));
        }
    }
    Ok(PowerSpectrum { height: h, width: w, power, rho })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex::default(), |acc, (j, v)| {
                    acc + *v * Complex::cis(-TAU * ((k * j) % n) as f64 / n as f64)
                })
            })
            .collect()
    }

    #[test]
    fn fft_matches_naive_for_all_small_lengths() {
        let mut rng = crate::rng::SplitMix64::new(1);
        for n in 1..40 {
            let x: Vec<Complex> = (0..n).map(|_| Complex::new(rng.next_normal(), rng.next_normal())).collect();
            let mut y = x.clone();
            fft_in_place(&mut y);
            for (a, b) in y.iter().zip(naive(&x)) {
                assert!((*a - b).norm_sqr() < 1e-18 * (n * n) as f64, "n = {n}");
            }
        }
    }

    #[test]
    fn parseval_identity() {
        let m = ScalarMap::from_fn(12, 10, |y, x| libm::sin((y * 7 + x * 3) as f64) as f32).unwrap();
        let p = hann_power_spectrum(&m).unwrap();
        let (wy, wx) = (hann_window(12), hann_window(10));
        let energy: f64 = (0..120)
            .map(|i| {
                let v = m.values()[i] as f64 * wy[i / 10] * wx[i % 10];
                v * v
            })
            .sum();
        assert!((p.total() - 120.0 * energy).abs() < 1e-9 * p.total());
    }

    #[test]
    fn rho_range() {
        let m = ScalarMap::raw(6, 8, alloc::vec![0.0; 48]).unwrap();
        let p = hann_power_spectrum(&m).unwrap();
        assert_eq!(p.rho[0], 0.0);
        let max = p.rho.iter().copied().fold(0.0, f64::max);
        assert!((max - libm::sqrt(0.5)).abs() < 1e-12);
        assert!(hann_power_spectrum(&ScalarMap::raw(3, 8, alloc::vec![0.0; 24]).unwrap()).is_err());
    }
}

//! Radially averaged power spectra and band-limited energy ratios.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fft::{fft2, freq_index};
use crate::geocal::Raster;

pub const SPECTRUM_BINS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Mean power per radial bin, bin `k` covering `[k, k+1)/64` of Nyquist.
    pub image: Vec<f64>,
    pub truth: Vec<f64>,
    /// Energy ratio image/truth over the low, mid and high thirds of Nyquist.
    pub ratios: [f64; 3],
}

impl SpectrumReport {
    pub fn low(&self) -> f64 {
        self.ratios[0]
    }

    pub fn mid(&self) -> f64 {
        self.ratios[1]
    }

    pub fn high(&self) -> f64 {
        self.ratios[2]
    }
}

fn hann(n: usize, k: usize) -> f64 {
    if n < 2 {
        return 1.0;
    }
    0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos()
}

/// Radially averaged periodogram of a mean-removed, Hann-windowed image,
/// returned as `(mean power, total power)` per bin.
pub fn radial_spectrum(img: &Raster) -> Result<(Vec<f64>, Vec<f64>)> {
    if img.data.iter().any(|v| !v.is_finite()) {
        return Err(domain("spectrum needs a fully filled image"));
    }
    if img.rows < 4 || img.cols < 4 {
        return Err(domain("image too small for a spectrum"));
    }
    let (rows, cols) = (img.rows, img.cols);
    let mean = img.data.iter().sum::<f64>() / img.data.len() as f64;
    let mut buf: Vec<Complex64> = (0..rows * cols)
        .map(|k| Complex64::new((img.data[k] - mean) * hann(rows, k / cols) * hann(cols, k % cols), 0.0))
        .collect();
    fft2(&mut buf, rows, cols, false);
    let mut total = vec![0.0; SPECTRUM_BINS];
    let mut count = vec![0usize; SPECTRUM_BINS];
    for i in 0..rows {
        let fy = freq_index(i, rows) / rows as f64;
        for j in 0..cols {
            let fx = freq_index(j, cols) / cols as f64;
            let rho = (fx * fx + fy * fy).sqrt() / 0.5;
            if rho == 0.0 || rho > 1.0 {
                continue;
            }
            let b = ((rho * SPECTRUM_BINS as f64) as usize).min(SPECTRUM_BINS - 1);
            total[b] += buf[i * cols + j].norm_sqr();
            count[b] += 1;
        }
    }
    let mean_power = total.iter().zip(&count).map(|(t, &c)| if c > 0 { t / c as f64 } else { 0.0 }).collect();
    Ok((mean_power, total))
}

/// Compares an image's spectrum with that of co-registered truth.
pub fn power_spectrum_ratio(image: &Raster, truth: &Raster) -> Result<SpectrumReport> {
    if image.rows != truth.rows || image.cols != truth.cols {
        return Err(domain(format!(
            "image {}x{} and truth {}x{} differ in size",
            image.rows, image.cols, truth.rows, truth.cols
        )));
    }
    let (pi, ti) = radial_spectrum(image)?;
    let (pt, tt) = radial_spectrum(truth)?;
    let mut num = [0.0; 3];
    let mut den = [0.0; 3];
    for b in 0..SPECTRUM_BINS {
        let third = ((b as f64 + 0.5) / SPECTRUM_BINS as f64 * 3.0) as usize;
        num[third.min(2)] += ti[b];
        den[third.min(2)] += tt[b];
    }
    let ratios = [0, 1, 2].map(|k| if num[k] == den[k] { 1.0 } else { num[k] / den[k] });
    Ok(SpectrumReport { image: pi, truth: pt, ratios })
}

//! Two-dimensional FFT over row-major buffers.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

pub(crate) fn fft2(data: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fr = if inverse { planner.plan_fft_inverse(cols) } else { planner.plan_fft_forward(cols) };
    for row in data.chunks_mut(cols) {
        fr.process(row);
    }
    let fc = if inverse { planner.plan_fft_inverse(rows) } else { planner.plan_fft_forward(rows) };
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for j in 0..cols {
        for i in 0..rows {
            column[i] = data[i * cols + j];
        }
        fc.process(&mut column);
        for i in 0..rows {
            data[i * cols + j] = column[i];
        }
    }
    if inverse {
        let s = 1.0 / (rows * cols) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Signed integer frequency of FFT bin `k` of `n`.
pub(crate) fn freq_index(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

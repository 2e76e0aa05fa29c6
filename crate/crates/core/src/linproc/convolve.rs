use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    /// FFT once the direct cost exceeds ~2^22 multiply-adds.
    #[default]
    Auto,
    Direct,
    Fft,
}

/// Valid-mode correlation `out[i] = Σ_j taps[j]·input[i+j]` for a fixed
/// symmetric tap vector and output length.
pub struct Convolver {
    taps: Vec<f64>,
    out_len: usize,
    fft: Option<FftState>,
}

struct FftState {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel: Vec<Complex64>,
}

impl Convolver {
    pub fn new(taps: Vec<f64>, out_len: usize, method: ConvolutionMethod) -> Self {
        let use_fft = match method {
            ConvolutionMethod::Direct => false,
            ConvolutionMethod::Fft => true,
            ConvolutionMethod::Auto => taps.len() > 1 && taps.len().saturating_mul(out_len) > 1 << 22,
        };
        let fft = use_fft.then(|| {
            let size = (out_len + 2 * taps.len() - 2).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut kernel = vec![Complex64::new(0.0, 0.0); size];
            for (slot, &t) in kernel.iter_mut().zip(&taps) {
                slot.re = t;
            }
            forward.process(&mut kernel);
            FftState {
                size,
                forward,
                inverse,
                kernel,
            }
        });
        Self { taps, out_len, fft }
    }

    pub fn input_len(&self) -> usize {
        self.out_len + self.taps.len() - 1
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_len(), "convolver input length");
        match &self.fft {
            None => convolve_direct(input, &self.taps),
            Some(state) => {
                let mut buf = vec![Complex64::new(0.0, 0.0); state.size];
                for (slot, &v) in buf.iter_mut().zip(input) {
                    slot.re = v;
                }
                state.forward.process(&mut buf);
                for (b, k) in buf.iter_mut().zip(&state.kernel) {
                    *b *= k;
                }
                state.inverse.process(&mut buf);
                let norm = 1.0 / state.size as f64;
                // Full convolution index i + (taps-1) is the valid output i;
                // symmetric taps make convolution and correlation coincide.
                let offset = self.taps.len() - 1;
                buf[offset..offset + self.out_len].iter().map(|c| c.re * norm).collect()
            }
        }
    }
}

/// Direct valid-mode correlation, `input.len() - taps.len() + 1` outputs.
pub fn convolve_direct(input: &[f64], taps: &[f64]) -> Vec<f64> {
    assert!(input.len() >= taps.len(), "input shorter than taps");
    input
        .windows(taps.len())
        .map(|w| w.iter().zip(taps).map(|(a, b)| a * b).sum())
        .collect()
}

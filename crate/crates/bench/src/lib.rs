//! Shared inputs for the benchmarks.

use lrdht_core::linproc::simulate_paths;
use lrdht_core::{CoefficientSpec, InnovationSpec, ProcessConfig};

/// A Gaussian linear-process path of length `n` with coefficient decay `sigma`.
pub fn gaussian_path(n: usize, sigma: f64, window: u64, seed: u64) -> Vec<f64> {
    let config = ProcessConfig::single(
        CoefficientSpec::standard(sigma, window.max(1)).expect("valid sigma"),
        InnovationSpec::gaussian(1.0),
        n,
        window,
    );
    simulate_paths(&config, seed).expect("valid config").d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_has_requested_length_and_is_seeded() {
        let a = gaussian_path(100, 0.8, 50, 3);
        assert_eq!(a.len(), 100);
        assert_eq!(a, gaussian_path(100, 0.8, 50, 3));
    }
}

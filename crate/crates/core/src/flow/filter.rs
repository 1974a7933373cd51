//! Angular low-pass filter for the rings next to the centre.
//!
//! On ring `i` the angular spacing `ρ_i h_θ` is far below `h_ρ`, so an
//! explicit scheme would need `dt ~ (ρ_0 h_θ)²`. Increments on ring `i` are
//! projected onto the Fourier modes `|m| ≤ M_i`, where `M_i` is the largest
//! mode whose angular stiffness `sin²(m h_θ/2) / (ρ_i sin(h_θ/2))²` does not
//! exceed the radial stiffness `4/h_ρ²`. Smooth fields carry mode-`m`
//! content of order `ρ^m` near the centre, so the projection costs `O(h²)`.
//!
//! The projection is applied as a circulant convolution whose terms are
//! summed in a fixed order, so rotating the input by whole grid steps
//! rotates the output bit-for-bit.

use crate::grid::PolarGrid;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct PoleFilter {
    n_theta: usize,
    cutoff: Vec<usize>,
    /// Kernel values `K(d)` for `d = 0..=n_theta/2`, or `None` where the
    /// ring keeps every mode.
    kernels: Vec<Option<Vec<f64>>>,
}

impl PoleFilter {
    pub fn new(g: &PolarGrid) -> Self {
        let nt = g.n_theta();
        let half = nt / 2;
        let ht = g.h_theta();
        let s = (0.5 * ht).sin();
        let mut cutoff = Vec::with_capacity(g.n_rho());
        let mut kernels = Vec::with_capacity(g.n_rho());
        for i in 0..g.n_rho() {
            let x = ((2 * i + 1) as f64 * s).min(1.0);
            let m = (((2.0 / ht) * x.asin()).floor() as usize).max(1);
            if m >= half {
                cutoff.push(half);
                kernels.push(None);
                continue;
            }
            cutoff.push(m);
            let k: Vec<f64> = (0..=half)
                .map(|d| {
                    let mut acc = 1.0;
                    for mm in 1..=m {
                        acc += 2.0 * (2.0 * PI * (mm * d) as f64 / nt as f64).cos();
                    }
                    acc / nt as f64
                })
                .collect();
            kernels.push(Some(k));
        }
        PoleFilter { n_theta: nt, cutoff, kernels }
    }

    /// Highest angular mode kept on ring `i` (`n_theta/2` when unfiltered).
    pub fn cutoff(&self, i: usize) -> usize {
        self.cutoff[i]
    }

    pub fn is_filtered(&self, i: usize) -> bool {
        self.kernels[i].is_some()
    }

    /// Number of filtered rings, which are always the innermost ones.
    pub fn filtered_rings(&self) -> usize {
        self.kernels.iter().take_while(|k| k.is_some()).count()
    }

    /// Filters a whole field of ring-major values in place.
    pub fn apply(&self, values: &mut [f64]) {
        let nt = self.n_theta;
        let mut ext = vec![0.0; 2 * nt];
        for (i, ring) in values.chunks_mut(nt).enumerate() {
            if let Some(k) = &self.kernels[i] {
                filter_ring(k, ring, &mut ext);
            }
        }
    }

    pub(crate) fn apply_ring(&self, i: usize, ring: &mut [f64], ext: &mut Vec<f64>) {
        if let Some(k) = &self.kernels[i] {
            ext.resize(2 * self.n_theta, 0.0);
            filter_ring(k, ring, ext);
        }
    }
}

fn filter_ring(k: &[f64], ring: &mut [f64], ext: &mut [f64]) {
    let nt = ring.len();
    let half = nt / 2;
    ext[..nt].copy_from_slice(ring);
    ext[nt..2 * nt].copy_from_slice(ring);
    for j in 0..nt {
        let mut acc = k[0] * ext[j];
        for d in 1..half {
            acc += k[d] * (ext[j + d] + ext[j + nt - d]);
        }
        acc += k[half] * ext[j + half];
        ring[j] = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn cutoffs_grow_outward() {
        let g = build_grid(0.9, 128, 256).unwrap();
        let f = PoleFilter::new(&g);
        assert_eq!(f.cutoff(0), 1);
        for i in 1..g.n_rho() {
            assert!(f.cutoff(i) >= f.cutoff(i - 1));
        }
        // (2i+1) sin(π/256) first reaches 1 at i = 41
        assert_eq!(f.filtered_rings(), 41);
        assert!(!f.is_filtered(41));
    }

    #[test]
    fn keeps_low_modes_and_removes_high_ones() {
        let g = build_grid(0.9, 8, 32).unwrap();
        let f = PoleFilter::new(&g);
        let nt = g.n_theta();
        let th = g.theta_nodes();
        let m0 = f.cutoff(0);
        let mut ring: Vec<f64> = (0..nt).map(|j| 2.0 + (th[j]).cos() - 0.5 * (th[j]).sin()).collect();
        let keep = ring.clone();
        let mut ext = Vec::new();
        f.apply_ring(0, &mut ring, &mut ext);
        for (a, b) in ring.iter().zip(&keep) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        let mut high: Vec<f64> = (0..nt).map(|j| ((m0 + 1) as f64 * th[j]).cos()).collect();
        f.apply_ring(0, &mut high, &mut ext);
        assert!(high.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn idempotent() {
        let g = build_grid(0.9, 8, 32).unwrap();
        let f = PoleFilter::new(&g);
        let mut v: Vec<f64> = (0..g.len()).map(|k| ((k * 7919) % 101) as f64 / 101.0).collect();
        f.apply(&mut v);
        let once = v.clone();
        f.apply(&mut v);
        for (a, b) in v.iter().zip(&once) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }

    proptest! {
        #[test]
        fn commutes_with_rotation(shift in 0usize..32, seed in 0u64..1000) {
            let g = build_grid(0.9, 4, 32).unwrap();
            let f = PoleFilter::new(&g);
            let nt = g.n_theta();
            let v: Vec<f64> = (0..g.len()).map(|k| (((k as u64 + seed) * 2654435761) % 1000) as f64 / 1000.0).collect();
            let mut rot: Vec<f64> = v.chunks(nt).flat_map(|r| (0..nt).map(move |j| r[(j + nt - shift) % nt])).collect();
            let mut base = v.clone();
            f.apply(&mut base);
            f.apply(&mut rot);
            for i in 0..g.n_rho() {
                for j in 0..nt {
                    prop_assert_eq!(rot[i * nt + j], base[i * nt + (j + nt - shift) % nt]);
                }
            }
        }
    }
}

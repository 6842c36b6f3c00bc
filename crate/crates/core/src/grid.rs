//! Truncated integer wavevector lattice on the periodic unit torus.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug)]
struct GridData {
    n: usize,
    k_axis: Vec<i32>,
    kcut: i32,
    /// `|κ|²` per flat index
    kappa_sq: Vec<f64>,
    /// two-thirds retention per flat index; Nyquist planes are never kept,
    /// the zero mode is (mean-zero enforcement is separate)
    keep: Vec<bool>,
}

/// Integer modes `k ∈ {-n/2, …, n/2-1}³` with the two-thirds dealiasing rule.
///
/// The domain is fixed to `[0,1]³`, so the angular wavevector is `κ = 2πk`.
/// Storage order is FFT order: axis index `i` carries wavenumber `i` for
/// `i < n/2` and `i - n` otherwise, with the last axis fastest. Cloning is
/// cheap (shared lookup tables).
#[derive(Debug, Clone)]
pub struct WavenumberGrid {
    data: Arc<GridData>,
}

impl PartialEq for WavenumberGrid {
    fn eq(&self, other: &Self) -> bool {
        self.data.n == other.data.n
    }
}

impl WavenumberGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid size must be even and >= 8, got {n}"
            )));
        }
        let k_axis: Vec<i32> = (0..n)
            .map(|i| if i < n / 2 { i as i32 } else { i as i32 - n as i32 })
            .collect();
        // largest |k| with |k| < n/3
        let kcut = if n % 3 == 0 { n as i32 / 3 - 1 } else { n as i32 / 3 };
        let m = n * n * n;
        let mut kappa_sq = vec![0.0; m];
        let mut keep = vec![false; m];
        let four_pi_sq = 4.0 * PI * PI;
        let mut idx = 0;
        for &k1 in &k_axis {
            for &k2 in &k_axis {
                for &k3 in &k_axis {
                    let s = (k1 as f64).powi(2) + (k2 as f64).powi(2) + (k3 as f64).powi(2);
                    kappa_sq[idx] = four_pi_sq * s;
                    keep[idx] = k1.abs() <= kcut && k2.abs() <= kcut && k3.abs() <= kcut;
                    idx += 1;
                }
            }
        }
        Ok(Self { data: Arc::new(GridData { n, k_axis, kcut, kappa_sq, keep }) })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.data.n
    }

    /// Number of lattice points / stored modes, `n³`.
    #[inline]
    pub fn modes(&self) -> usize {
        let n = self.data.n;
        n * n * n
    }

    /// Largest retained |k_i| under the two-thirds rule.
    #[inline]
    pub fn kcut(&self) -> i32 {
        self.data.kcut
    }

    /// Wavenumber carried by FFT axis index `i`.
    #[inline]
    pub fn k_of_axis_index(&self, i: usize) -> i32 {
        self.data.k_axis[i]
    }

    /// Per-axis wavenumbers in storage order.
    #[inline]
    pub fn k_axis(&self) -> &[i32] {
        &self.data.k_axis
    }

    /// FFT axis index of wavenumber `k ∈ [-n/2, n/2-1]`.
    #[inline]
    pub fn axis_index_of(&self, k: i32) -> usize {
        debug_assert!(k >= -(self.data.n as i32) / 2 && k < self.data.n as i32 / 2);
        k.rem_euclid(self.data.n as i32) as usize
    }

    /// Flat storage index of mode `(k1, k2, k3)`.
    #[inline]
    pub fn index_of(&self, k: [i32; 3]) -> usize {
        let n = self.data.n;
        (self.axis_index_of(k[0]) * n + self.axis_index_of(k[1])) * n + self.axis_index_of(k[2])
    }

    /// Integer wavevector at flat storage index.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i32; 3] {
        let n = self.data.n;
        let i3 = idx % n;
        let i2 = (idx / n) % n;
        let i1 = idx / (n * n);
        [self.data.k_axis[i1], self.data.k_axis[i2], self.data.k_axis[i3]]
    }

    /// Angular wavevector `κ = 2πk` at flat storage index.
    #[inline]
    pub fn kappa(&self, idx: usize) -> [f64; 3] {
        let k = self.wavevector(idx);
        [2.0 * PI * k[0] as f64, 2.0 * PI * k[1] as f64, 2.0 * PI * k[2] as f64]
    }

    /// `|κ|²`, the Laplacian eigenvalue of the mode.
    #[inline]
    pub fn kappa_sq(&self, idx: usize) -> f64 {
        self.data.kappa_sq[idx]
    }

    /// The full `|κ|²` table in storage order.
    #[inline]
    pub fn kappa_sq_table(&self) -> &[f64] {
        &self.data.kappa_sq
    }

    /// The two-thirds retention mask in storage order.
    #[inline]
    pub fn keep_table(&self) -> &[bool] {
        &self.data.keep
    }

    /// Whether the mode survives the two-thirds rule (`|k_i| < n/3` for all i).
    /// Nyquist planes never survive.
    #[inline]
    pub fn dealias_keeps(&self, k: [i32; 3]) -> bool {
        k.iter().all(|&c| c.abs() <= self.data.kcut)
    }

    #[inline]
    pub fn is_nyquist(&self, k: [i32; 3]) -> bool {
        let ny = -(self.data.n as i32) / 2;
        k.iter().any(|&c| c == ny)
    }

    /// Iterate all stored modes as `(flat index, wavevector)`.
    pub fn iter_modes(&self) -> impl Iterator<Item = (usize, [i32; 3])> + '_ {
        (0..self.modes()).map(move |idx| (idx, self.wavevector(idx)))
    }

    /// Iterate the retained (dealiased) modes only.
    pub fn iter_retained(&self) -> impl Iterator<Item = (usize, [i32; 3])> + '_ {
        self.iter_modes().filter(move |&(idx, _)| self.data.keep[idx])
    }

    /// Largest `|κ|` over retained modes.
    pub fn kappa_max(&self) -> f64 {
        2.0 * PI * (3.0f64).sqrt() * self.data.kcut as f64
    }
}

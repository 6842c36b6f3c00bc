//! Real, periodic, mean-zero vector fields stored as truncated Fourier
//! coefficients, plus their physical-space counterpart.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::WavenumberGrid;
use num_complex::Complex64;

/// One 3-vector field as complex Fourier coefficients on the full lattice.
///
/// Invariants maintained by every constructor and operation:
/// Hermitian symmetry (the field is real), zero mean (`coeff(0) = 0`),
/// Nyquist planes zeroed, and two-thirds dealiasing. `divfree` records
/// whether the Leray projection has been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: WavenumberGrid,
    coeffs: [Vec<Complex64>; 3],
    divfree: bool,
}

/// Physical collocation values at `x_j = j/n` (componentwise).
#[derive(Debug, Clone)]
pub struct RealField {
    grid: WavenumberGrid,
    values: [Vec<f64>; 3],
}

/// Scalar spectral field (used for pressure recovery and spectra).
#[derive(Debug, Clone)]
pub struct SpectralScalar {
    pub grid: WavenumberGrid,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zero(grid: &WavenumberGrid) -> Self {
        let m = grid.modes();
        Self {
            grid: grid.clone(),
            coeffs: [vec![Complex64::default(); m], vec![Complex64::default(); m], vec![
                Complex64::default();
                m
            ]],
            divfree: true,
        }
    }

    /// Assemble from raw per-component coefficient arrays (snapshot loading,
    /// external construction). The divfree flag starts cleared; call
    /// [`Self::mark_divfree`] once the data is known to be projected.
    pub fn from_components(grid: &WavenumberGrid, coeffs: [Vec<Complex64>; 3]) -> Result<Self> {
        let m = grid.modes();
        if coeffs.iter().any(|c| c.len() != m) {
            return Err(Error::InvalidParameter(format!(
                "component length must be {m} for n = {}",
                grid.n()
            )));
        }
        Ok(Self { grid: grid.clone(), coeffs, divfree: false })
    }

    /// Record that the coefficients are known to be divergence-free, without
    /// touching the data.
    pub fn mark_divfree(&mut self) {
        self.divfree = true;
    }

    #[inline]
    pub fn grid(&self) -> &WavenumberGrid {
        &self.grid
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    /// Raw coefficient access. The caller is responsible for restoring the
    /// field invariants (see [`Self::enforce_mask`]); the divfree flag is
    /// cleared.
    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        self.divfree = false;
        &mut self.coeffs[c]
    }

    #[inline]
    pub fn coeff(&self, c: usize, idx: usize) -> Complex64 {
        self.coeffs[c][idx]
    }

    #[inline]
    pub fn is_divfree(&self) -> bool {
        self.divfree
    }

    pub(crate) fn set_divfree(&mut self, v: bool) {
        self.divfree = v;
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.grid.n(), other.grid.n()));
        }
        Ok(())
    }

    /// Zero the mean mode, Nyquist planes, and everything outside the
    /// two-thirds mask.
    pub fn enforce_mask(&mut self) {
        let grid = self.grid.clone();
        let keep = grid.keep_table();
        for c in 0..3 {
            for (z, &k) in self.coeffs[c].iter_mut().zip(keep) {
                if !k {
                    *z = Complex64::default();
                }
            }
            self.coeffs[c][0] = Complex64::default();
        }
    }

    /// Inverse transform to collocation values, discarding the imaginary
    /// residue (≤ 1e-12 relative for Hermitian input).
    pub fn to_physical(&self) -> RealField {
        let n = self.grid.n();
        let m = self.grid.modes();
        let mut values: [Vec<f64>; 3] = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
        let mut buf = vec![Complex64::default(); m];
        for c in 0..3 {
            buf.copy_from_slice(&self.coeffs[c]);
            fft::inverse(&mut buf, n);
            for (v, z) in values[c].iter_mut().zip(&buf) {
                *v = z.re;
            }
        }
        RealField { grid: self.grid.clone(), values }
    }

    /// Largest imaginary residue of the synthesis relative to the field
    /// magnitude (diagnostic; exercised by the verification suite).
    pub fn synthesis_imag_residue(&self) -> f64 {
        let n = self.grid.n();
        let mut buf = vec![Complex64::default(); self.grid.modes()];
        let mut max_im: f64 = 0.0;
        let mut max_ab: f64 = 0.0;
        for c in 0..3 {
            buf.copy_from_slice(&self.coeffs[c]);
            fft::inverse(&mut buf, n);
            for z in &buf {
                max_im = max_im.max(z.im.abs());
                max_ab = max_ab.max(z.norm());
            }
        }
        if max_ab == 0.0 {
            0.0
        } else {
            max_im / max_ab
        }
    }

    /// Per-mode Leray-Helmholtz projection `û ↦ û − κ(κ·û)/|κ|²`.
    /// Idempotent and self-adjoint; the zero mode is left at zero.
    pub fn leray_project(&self) -> Self {
        let mut out = self.clone();
        out.leray_project_in_place();
        out
    }

    pub fn leray_project_in_place(&mut self) {
        let grid = self.grid.clone();
        let n = grid.n();
        let ks_table = grid.kappa_sq_table();
        let tau = 2.0 * std::f64::consts::PI;
        let mut idx = 0;
        for &k1 in grid.k_axis() {
            let kap1 = tau * k1 as f64;
            for &k2 in grid.k_axis() {
                let kap2 = tau * k2 as f64;
                for i3 in 0..n {
                    let ks = ks_table[idx];
                    if ks != 0.0 {
                        let kap3 = tau * grid.k_of_axis_index(i3) as f64;
                        let dot = kap1 * self.coeffs[0][idx]
                            + kap2 * self.coeffs[1][idx]
                            + kap3 * self.coeffs[2][idx];
                        let f = dot / ks;
                        self.coeffs[0][idx] -= kap1 * f;
                        self.coeffs[1][idx] -= kap2 * f;
                        self.coeffs[2][idx] -= kap3 * f;
                    }
                    idx += 1;
                }
            }
        }
        self.divfree = true;
    }

    /// max over modes of `|κ·û(k)|`.
    pub fn max_divergence(&self) -> f64 {
        let grid = &self.grid;
        let n = grid.n();
        let tau = 2.0 * std::f64::consts::PI;
        let mut worst = 0.0f64;
        let mut idx = 0;
        for &k1 in grid.k_axis() {
            let kap1 = tau * k1 as f64;
            for &k2 in grid.k_axis() {
                let kap2 = tau * k2 as f64;
                for i3 in 0..n {
                    let kap3 = tau * grid.k_of_axis_index(i3) as f64;
                    let div = (kap1 * self.coeffs[0][idx]
                        + kap2 * self.coeffs[1][idx]
                        + kap3 * self.coeffs[2][idx])
                        .norm_sqr();
                    worst = worst.max(div);
                    idx += 1;
                }
            }
        }
        worst.sqrt()
    }

    /// `base + c·f` in one fused pass.
    pub fn scaled_sum(base: &Self, c: f64, f: &Self) -> Self {
        debug_assert_eq!(base.grid, f.grid);
        let m = base.grid.modes();
        let mut coeffs = [
            vec![Complex64::default(); m],
            vec![Complex64::default(); m],
            vec![Complex64::default(); m],
        ];
        for comp in 0..3 {
            for ((o, &a), &b) in
                coeffs[comp].iter_mut().zip(&base.coeffs[comp]).zip(&f.coeffs[comp])
            {
                *o = a + c * b;
            }
        }
        Self { grid: base.grid.clone(), coeffs, divfree: base.divfree && f.divfree }
    }

    /// `base + Σ cᵢ·fᵢ` in one fused pass (the RK4 combination).
    pub fn combine4(base: &Self, terms: [(f64, &Self); 4]) -> Self {
        let m = base.grid.modes();
        let mut coeffs = [
            vec![Complex64::default(); m],
            vec![Complex64::default(); m],
            vec![Complex64::default(); m],
        ];
        let mut divfree = base.divfree;
        for (_, f) in &terms {
            debug_assert_eq!(base.grid, f.grid);
            divfree = divfree && f.divfree;
        }
        for comp in 0..3 {
            let b = &base.coeffs[comp];
            let t0 = &terms[0].1.coeffs[comp];
            let t1 = &terms[1].1.coeffs[comp];
            let t2 = &terms[2].1.coeffs[comp];
            let t3 = &terms[3].1.coeffs[comp];
            let (c0, c1, c2, c3) = (terms[0].0, terms[1].0, terms[2].0, terms[3].0);
            for idx in 0..m {
                coeffs[comp][idx] =
                    b[idx] + c0 * t0[idx] + c1 * t1[idx] + c2 * t2[idx] + c3 * t3[idx];
            }
        }
        Self { grid: base.grid.clone(), coeffs, divfree }
    }

    /// max over mode pairs of `|ĉ(k) − conj(ĉ(−k))|`.
    pub fn hermitian_error(&self) -> f64 {
        let grid = &self.grid;
        let mut worst: f64 = 0.0;
        for (idx, k) in grid.iter_modes() {
            if grid.is_nyquist(k) {
                continue;
            }
            let nidx = grid.index_of([-k[0], -k[1], -k[2]]);
            for c in 0..3 {
                worst = worst.max((self.coeffs[c][idx] - self.coeffs[c][nidx].conj()).norm());
            }
        }
        worst
    }

    /// L² inner product `Σ_k f̂·conj(ĝ)` (real by Hermitian symmetry).
    pub fn l2_inner(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                acc += (a * b.conj()).re;
            }
        }
        acc
    }

    /// `|f|`, the L² norm (Parseval: `Σ|coeff|²` to the half).
    pub fn l2_norm(&self) -> f64 {
        self.l2_inner(self).max(0.0).sqrt()
    }

    /// `Σ_k w(|κ|²) f̂·conj(ĝ)` for a diagonal weight; reused by the norms.
    pub fn weighted_inner(&self, other: &Self, weight: impl Fn(f64) -> f64) -> f64 {
        let ks = self.grid.kappa_sq_table();
        let mut acc = 0.0;
        for idx in 0..ks.len() {
            let mut dot = 0.0;
            for c in 0..3 {
                dot += (self.coeffs[c][idx] * other.coeffs[c][idx].conj()).re;
            }
            acc += weight(ks[idx]) * dot;
        }
        acc
    }

    /// `Σ_k |κ|² |f̂|²`, the squared V norm (single fused pass).
    pub fn v_norm_sq(&self) -> f64 {
        let ks = self.grid.kappa_sq_table();
        let mut acc = 0.0;
        for c in 0..3 {
            for (z, &w) in self.coeffs[c].iter().zip(ks) {
                acc += w * z.norm_sqr();
            }
        }
        acc.max(0.0)
    }

    /// `out = self + a·x`.
    pub fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert_eq!(self.grid, x.grid);
        for c in 0..3 {
            for (s, v) in self.coeffs[c].iter_mut().zip(&x.coeffs[c]) {
                *s += a * v;
            }
        }
        self.divfree = self.divfree && x.divfree;
    }

    pub fn scale(&mut self, a: f64) {
        for c in 0..3 {
            for s in self.coeffs[c].iter_mut() {
                *s *= a;
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Multiply every mode by a precomputed diagonal factor.
    pub fn mul_diagonal(&mut self, factors: &[f64]) {
        debug_assert_eq!(factors.len(), self.grid.modes());
        for c in 0..3 {
            for (s, &f) in self.coeffs[c].iter_mut().zip(factors) {
                *s *= f;
            }
        }
    }

    /// True if any coefficient is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.coeffs
            .iter()
            .any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
    }

    /// Add `amp` at mode `k` and its conjugate at `-k` on component `c`
    /// (building block for the analytic initial conditions).
    pub fn add_mode_pair(&mut self, k: [i32; 3], c: usize, amp: Complex64) {
        let i = self.grid.index_of(k);
        let j = self.grid.index_of([-k[0], -k[1], -k[2]]);
        self.coeffs[c][i] += amp;
        if j != i {
            self.coeffs[c][j] += amp.conj();
        }
        self.divfree = false;
    }
}

impl RealField {
    pub fn zero(grid: &WavenumberGrid) -> Self {
        let m = grid.modes();
        Self { grid: grid.clone(), values: [vec![0.0; m], vec![0.0; m], vec![0.0; m]] }
    }

    #[inline]
    pub fn grid(&self) -> &WavenumberGrid {
        &self.grid
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.values[c]
    }

    /// Forward transform. Exact inverse of `to_physical` on band-limited
    /// input; sampling an out-of-band mode lands its energy on the aliased
    /// lattice position `k mod n`, so callers must pre-band-limit.
    ///
    /// With `enforce_mean_zero` the k=0 coefficient is dropped after the
    /// transform.
    pub fn to_spectral(&self, enforce_mean_zero: bool) -> SpectralField {
        let n = self.grid.n();
        let m = self.grid.modes();
        let mut out = SpectralField::zero(&self.grid);
        out.divfree = false;
        let mut buf = vec![Complex64::default(); m];
        for c in 0..3 {
            for (z, &v) in buf.iter_mut().zip(&self.values[c]) {
                *z = Complex64::new(v, 0.0);
            }
            fft::forward(&mut buf, n);
            out.coeffs[c].copy_from_slice(&buf);
            if enforce_mean_zero {
                out.coeffs[c][0] = Complex64::default();
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Pointwise vector magnitude maximum, `max_x |f(x)|`.
    pub fn max_norm(&self) -> f64 {
        let m = self.grid.modes();
        (0..m)
            .map(|i| {
                (self.values[0][i].powi(2) + self.values[1][i].powi(2) + self.values[2][i].powi(2))
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

impl SpectralScalar {
    pub fn zero(grid: &WavenumberGrid) -> Self {
        Self { grid: grid.clone(), coeffs: vec![Complex64::default(); grid.modes()] }
    }

    /// Spectral gradient, `(iκ_j p̂)_j`.
    pub fn gradient(&self) -> SpectralField {
        let mut out = SpectralField::zero(&self.grid);
        for idx in 0..self.grid.modes() {
            let kap = self.grid.kappa(idx);
            let p = self.coeffs[idx];
            for c in 0..3 {
                out.coeffs[c][idx] = Complex64::i() * kap[c] * p;
            }
        }
        out.divfree = false;
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

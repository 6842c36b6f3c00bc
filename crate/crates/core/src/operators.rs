//! Operator toolkit: Stokes operator, Helmholtz filter, projected
//! nonlinearity, trilinear form, Sobolev norms, and the coupled
//! momentum/induction right-hand side.

use crate::error::{Error, Result};
use crate::fft;
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;
use num_complex::Complex64;

/// Owns the grid, the Voigt length α, and transform scratch; nonlinear
/// evaluations go through a `&mut` receiver, so concurrent callers create one
/// context per worker.
#[derive(Debug, Clone)]
pub struct OperatorContext {
    grid: WavenumberGrid,
    alpha: f64,
    /// flat index of −k for every mode
    mirror: Vec<u32>,
    scratch: Vec<Complex64>,
}

impl OperatorContext {
    pub fn new(grid: &WavenumberGrid, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        let n = grid.n();
        let m = grid.modes();
        let mut mirror = vec![0u32; m];
        for i1 in 0..n {
            let j1 = (n - i1) % n;
            for i2 in 0..n {
                let j2 = (n - i2) % n;
                for i3 in 0..n {
                    let j3 = (n - i3) % n;
                    mirror[(i1 * n + i2) * n + i3] = ((j1 * n + j2) * n + j3) as u32;
                }
            }
        }
        Ok(Self { grid: grid.clone(), alpha, mirror, scratch: vec![Complex64::default(); m] })
    }

    /// Synthesize two real scalars from their (Hermitian) spectra with a
    /// single complex transform: the inverse of `â + i·b̂` carries `a` in its
    /// real part and `b` in its imaginary part.
    ///
    /// Identically-zero spectra take an exact-zero path so that sparse
    /// states (a single nonzero component, a zero velocity) keep their
    /// structural zeros bit-exactly instead of collecting packing residue.
    fn inverse_pair(
        &mut self,
        a: &[Complex64],
        b: &[Complex64],
        out_a: &mut [f64],
        out_b: &mut [f64],
    ) {
        let az = is_zero_spectrum(a);
        let bz = is_zero_spectrum(b);
        if az {
            out_a.fill(0.0);
        }
        if bz {
            out_b.fill(0.0);
        }
        match (az, bz) {
            (true, true) => {}
            (true, false) => self.inverse_single(b, out_b),
            (false, true) => self.inverse_single(a, out_a),
            (false, false) => {
                let n = self.grid.n();
                for (z, (&za, &zb)) in self.scratch.iter_mut().zip(a.iter().zip(b)) {
                    *z = za + Complex64::i() * zb;
                }
                fft::inverse(&mut self.scratch, n);
                for ((oa, ob), z) in out_a.iter_mut().zip(out_b.iter_mut()).zip(&self.scratch) {
                    *oa = z.re;
                    *ob = z.im;
                }
            }
        }
    }

    fn inverse_single(&mut self, a: &[Complex64], out: &mut [f64]) {
        if is_zero_spectrum(a) {
            out.fill(0.0);
            return;
        }
        let n = self.grid.n();
        self.scratch.copy_from_slice(a);
        fft::inverse(&mut self.scratch, n);
        for (o, z) in out.iter_mut().zip(&self.scratch) {
            *o = z.re;
        }
    }

    /// Analyze two real scalars with a single complex transform, splitting
    /// the packed spectrum by its Hermitian and anti-Hermitian parts. Zero
    /// inputs take the same exact-zero path as [`Self::inverse_pair`].
    fn forward_pair(
        &mut self,
        a: &[f64],
        b: &[f64],
        out_a: &mut [Complex64],
        out_b: &mut [Complex64],
    ) {
        let az = is_zero_samples(a);
        let bz = is_zero_samples(b);
        if az {
            out_a.fill(Complex64::default());
        }
        if bz {
            out_b.fill(Complex64::default());
        }
        match (az, bz) {
            (true, true) => {}
            (true, false) => self.forward_single(b, out_b),
            (false, true) => self.forward_single(a, out_a),
            (false, false) => {
                let n = self.grid.n();
                for (z, (&va, &vb)) in self.scratch.iter_mut().zip(a.iter().zip(b)) {
                    *z = Complex64::new(va, vb);
                }
                fft::forward(&mut self.scratch, n);
                for idx in 0..self.scratch.len() {
                    let z = self.scratch[idx];
                    let zm = self.scratch[self.mirror[idx] as usize].conj();
                    out_a[idx] = 0.5 * (z + zm);
                    out_b[idx] = Complex64::new(0.0, -0.5) * (z - zm);
                }
            }
        }
    }

    fn forward_single(&mut self, a: &[f64], out: &mut [Complex64]) {
        if is_zero_samples(a) {
            out.fill(Complex64::default());
            return;
        }
        let n = self.grid.n();
        for (z, &v) in self.scratch.iter_mut().zip(a) {
            *z = Complex64::new(v, 0.0);
        }
        fft::forward(&mut self.scratch, n);
        out.copy_from_slice(&self.scratch);
    }

    #[inline]
    pub fn grid(&self) -> &WavenumberGrid {
        &self.grid
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `B(u, v) = P_σ((u·∇)v)`, evaluated pseudo-spectrally: transform `u`
    /// and `∂_j v` to collocation space, multiply, transform back, apply the
    /// two-thirds mask, project. On the dealiased mode set this equals the
    /// Galerkin-truncated bilinear term exactly.
    pub fn nonlinear_b(&mut self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        u.check_same_grid(v)?;
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch(self.grid.n(), u.grid().n()));
        }
        let grid = self.grid.clone();
        let n = grid.n();
        let m = grid.modes();

        let u_phys = u.to_physical();
        // ∂_j v_i in collocation space, nine scalars
        let mut dv = Vec::with_capacity(9);
        let mut buf = vec![Complex64::default(); m];
        for i in 0..3 {
            for j in 0..3 {
                for (idx, z) in buf.iter_mut().enumerate() {
                    let kap = grid.kappa(idx);
                    *z = Complex64::i() * kap[j] * v.coeff(i, idx);
                }
                fft::inverse(&mut buf, n);
                dv.push(buf.iter().map(|z| z.re).collect::<Vec<f64>>());
            }
        }

        let mut out = SpectralField::zero(&grid);
        for i in 0..3 {
            for (idx, z) in buf.iter_mut().enumerate() {
                let s = u_phys.comp(0)[idx] * dv[i * 3][idx]
                    + u_phys.comp(1)[idx] * dv[i * 3 + 1][idx]
                    + u_phys.comp(2)[idx] * dv[i * 3 + 2][idx];
                *z = Complex64::new(s, 0.0);
            }
            fft::forward(&mut buf, n);
            out.comp_mut(i).copy_from_slice(&buf);
        }
        out.enforce_mask();
        out.leray_project_in_place();
        Ok(out)
    }

    /// `b(u, v, w) = ⟨B(u, v), w⟩`.
    pub fn trilinear_b(
        &mut self,
        u: &SpectralField,
        v: &SpectralField,
        w: &SpectralField,
    ) -> Result<f64> {
        u.check_same_grid(w)?;
        Ok(self.nonlinear_b(u, v)?.l2_inner(w))
    }

    /// Coupled right-hand side of the projected system:
    ///
    /// ```text
    /// du = (I + α²A)⁻¹ [B(B,B) − B(u,u) − νAu]
    /// dB = −μAB + B(B,u) − B(u,B)
    /// ```
    ///
    /// With `include_resistive = false` the `−μAB` term is left out (the
    /// stepper integrates it exactly via the integrating factor).
    ///
    /// Both bilinear differences are evaluated in divergence form,
    /// `∂_j(a_j b_i)`, which coincides with the advective form for
    /// divergence-free input and halves the number of transforms.
    pub fn mhd_rhs(
        &mut self,
        u: &SpectralField,
        b: &SpectralField,
        mu: f64,
        nu: f64,
        include_resistive: bool,
    ) -> Result<(SpectralField, SpectralField)> {
        u.check_same_grid(b)?;
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch(self.grid.n(), u.grid().n()));
        }
        let grid = self.grid.clone();
        let m = grid.modes();

        // physical velocities and magnetic field; u and B go through
        // identically-shaped transform pipelines so that u = B produces
        // bit-equal samples (the Elsässer cancellation is then exact)
        let mut u0 = vec![0.0; m];
        let mut u1 = vec![0.0; m];
        let mut u2 = vec![0.0; m];
        let mut b0 = vec![0.0; m];
        let mut b1 = vec![0.0; m];
        let mut b2 = vec![0.0; m];
        self.inverse_pair(u.comp(0), u.comp(1), &mut u0, &mut u1);
        self.inverse_single(u.comp(2), &mut u2);
        self.inverse_pair(b.comp(0), b.comp(1), &mut b0, &mut b1);
        self.inverse_single(b.comp(2), &mut b2);
        let up = [u0, u1, u2];
        let bp = [b0, b1, b2];

        // momentum tensor M_ji = B_j B_i − u_j u_i (symmetric, 6 entries);
        // induction tensor N_ji = B_j u_i − u_j B_i (antisymmetric, 3 entries)
        let sym_pairs: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        let asym_pairs: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
        let mut products: Vec<Vec<f64>> = Vec::with_capacity(9);
        for &(j, i) in &sym_pairs {
            let mut p = vec![0.0; m];
            for idx in 0..m {
                p[idx] = bp[j][idx] * bp[i][idx] - up[j][idx] * up[i][idx];
            }
            products.push(p);
        }
        for &(j, i) in &asym_pairs {
            let mut p = vec![0.0; m];
            for idx in 0..m {
                p[idx] = bp[j][idx] * up[i][idx] - up[j][idx] * bp[i][idx];
            }
            products.push(p);
        }
        drop(up);
        drop(bp);

        // analyze the nine products with five packed transforms
        let mut spectra: Vec<Vec<Complex64>> =
            (0..9).map(|_| vec![Complex64::default(); m]).collect();
        for p in 0..4 {
            let (lo, hi) = spectra.split_at_mut(2 * p + 1);
            self.forward_pair(
                &products[2 * p],
                &products[2 * p + 1],
                lo.last_mut().unwrap(),
                &mut hi[0],
            );
        }
        self.forward_single(&products[8], &mut spectra[8]);
        drop(products);
        let spec_m = &spectra[..6];
        let spec_n = &spectra[6..];

        // N_ji antisymmetric: stored for j < i, N_ij = −N_ji, N_jj = 0
        let asym = |j: usize, i: usize, idx: usize, spec_n: &[Vec<Complex64>]| -> Complex64 {
            if j == i {
                return Complex64::default();
            }
            let (a, b, sign) = if j < i { (j, i, 1.0) } else { (i, j, -1.0) };
            let slot = match (a, b) {
                (0, 1) => 0,
                (0, 2) => 1,
                (1, 2) => 2,
                _ => unreachable!(),
            };
            sign * spec_n[slot][idx]
        };

        let mut du = SpectralField::zero(&grid);
        let mut db = SpectralField::zero(&grid);
        let alpha_sq = self.alpha * self.alpha;
        let ks_table = grid.kappa_sq_table();
        let n = grid.n();
        let tau = 2.0 * std::f64::consts::PI;
        {
            let mut idx = 0;
            for &k1 in grid.k_axis() {
                for &k2 in grid.k_axis() {
                    for i3 in 0..n {
                        let kap = [
                            tau * k1 as f64,
                            tau * k2 as f64,
                            tau * grid.k_of_axis_index(i3) as f64,
                        ];
                        let ks = ks_table[idx];
                        let voigt = 1.0 / (1.0 + alpha_sq * ks);
                        for i in 0..3 {
                            let mut dm = Complex64::default();
                            let mut dn = Complex64::default();
                            for j in 0..3 {
                                let ikj = Complex64::new(0.0, kap[j]);
                                dm += ikj * spec_m[sym_index(j, i)][idx];
                                dn += ikj * asym(j, i, idx, spec_n);
                            }
                            if nu != 0.0 {
                                dm -= nu * ks * u.coeff(i, idx);
                            }
                            if include_resistive && mu != 0.0 {
                                dn -= mu * ks * b.coeff(i, idx);
                            }
                            du.comp_mut(i)[idx] = voigt * dm;
                            db.comp_mut(i)[idx] = dn;
                        }
                        idx += 1;
                    }
                }
            }
        }
        du.enforce_mask();
        db.enforce_mask();
        du.leray_project_in_place();
        db.leray_project_in_place();
        Ok((du, db))
    }

    /// Pressure recovery: solve `−Δp = ∇·((u·∇)u − (B·∇)B)` per mode for the
    /// total (fluid + magnetic) pressure, zero mean. The unprojected momentum
    /// right-hand side minus `∇p` is then divergence-free.
    pub fn recover_pressure(
        &mut self,
        u: &SpectralField,
        b: &SpectralField,
    ) -> Result<crate::field::SpectralScalar> {
        u.check_same_grid(b)?;
        let g = self.unprojected_lorentz_minus_advection(u, b)?;
        let grid = self.grid.clone();
        let mut p = crate::field::SpectralScalar::zero(&grid);
        for idx in 0..grid.modes() {
            let ks = grid.kappa_sq(idx);
            if ks == 0.0 {
                continue;
            }
            let kap = grid.kappa(idx);
            // g = (B·∇)B − (u·∇)u; Δp = ∇·g, so p̂ = −iκ·ĝ/|κ|²
            let div = Complex64::i()
                * (kap[0] * g.coeff(0, idx) + kap[1] * g.coeff(1, idx) + kap[2] * g.coeff(2, idx));
            p.coeffs[idx] = -div / ks;
        }
        Ok(p)
    }

    /// `(B·∇)B − (u·∇)u` without Leray projection (dealiased, mean-zero).
    pub fn unprojected_lorentz_minus_advection(
        &mut self,
        u: &SpectralField,
        b: &SpectralField,
    ) -> Result<SpectralField> {
        u.check_same_grid(b)?;
        let grid = self.grid.clone();
        let n = grid.n();
        let m = grid.modes();
        let up = u.to_physical();
        let bp = b.to_physical();
        let mut buf = vec![Complex64::default(); m];
        let mut spec_m = Vec::with_capacity(6);
        let sym_pairs: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        for &(j, i) in &sym_pairs {
            for (idx, z) in buf.iter_mut().enumerate() {
                let v = bp.comp(j)[idx] * bp.comp(i)[idx] - up.comp(j)[idx] * up.comp(i)[idx];
                *z = Complex64::new(v, 0.0);
            }
            fft::forward(&mut buf, n);
            spec_m.push(buf.clone());
        }
        let mut out = SpectralField::zero(&grid);
        for idx in 0..m {
            let kap = grid.kappa(idx);
            for i in 0..3 {
                let mut d = Complex64::default();
                for j in 0..3 {
                    d += Complex64::i() * kap[j] * spec_m[sym_index(j, i)][idx];
                }
                out.comp_mut(i)[idx] = d;
            }
        }
        out.enforce_mask();
        out.set_divfree(false);
        Ok(out)
    }

}

/// Slot of the (j, i) entry in the packed symmetric 3x3 tensor.
fn sym_index(j: usize, i: usize) -> usize {
    let (a, b) = if j <= i { (j, i) } else { (i, j) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        (2, 2) => 5,
        _ => unreachable!(),
    }
}

fn is_zero_spectrum(a: &[Complex64]) -> bool {
    a.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

fn is_zero_samples(a: &[f64]) -> bool {
    a.iter().all(|&v| v == 0.0)
}

/// Stokes operator `A = −P_σΔ`; on divergence-free periodic fields this is
/// the diagonal multiplier `|κ|²`.
pub fn apply_a(f: &SpectralField) -> SpectralField {
    let grid = f.grid().clone();
    let mut out = f.clone();
    for c in 0..3 {
        for (idx, z) in out.comp_mut(c).iter_mut().enumerate() {
            *z *= grid.kappa_sq(idx);
        }
    }
    out.set_divfree(f.is_divfree());
    out
}

/// `(I + α²A)⁻¹`, the Voigt filter: divide each mode by `1 + α²|κ|²`.
pub fn helmholtz_inverse(f: &SpectralField, alpha: f64) -> SpectralField {
    let grid = f.grid().clone();
    let a2 = alpha * alpha;
    let mut out = f.clone();
    for c in 0..3 {
        for (idx, z) in out.comp_mut(c).iter_mut().enumerate() {
            *z /= 1.0 + a2 * grid.kappa_sq(idx);
        }
    }
    out.set_divfree(f.is_divfree());
    out
}

/// `H^s` norm `(Σ |κ|^{2s} |coeff|²)^{1/2}`; `s = 0` is `|·|`, `s = 1` is `‖·‖`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::InvalidParameter(format!("Sobolev index must be >= 0, got {s}")));
    }
    let weight: Box<dyn Fn(f64) -> f64> = if s == 0.0 {
        Box::new(|_| 1.0)
    } else if s == s.round() && s <= 8.0 {
        let p = s as i32;
        Box::new(move |ks: f64| ks.powi(p))
    } else {
        Box::new(move |ks: f64| if ks == 0.0 { 0.0 } else { ks.powf(s) })
    };
    Ok(f.weighted_inner(f, weight).max(0.0).sqrt())
}

/// `|f|` (L²).
pub fn l2_norm(f: &SpectralField) -> f64 {
    f.l2_norm()
}

/// `‖f‖` (H¹ seminorm = V norm on mean-zero fields).
pub fn v_norm(f: &SpectralField) -> f64 {
    f.v_norm_sq().sqrt()
}

/// `α²‖u‖² + |u|² + |B|²`, the conserved Voigt energy (μ = 0).
pub fn voigt_energy(u: &SpectralField, b: &SpectralField, alpha: f64) -> f64 {
    alpha * alpha * v_norm(u).powi(2) + u.l2_norm().powi(2) + b.l2_norm().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ic;
    use std::f64::consts::PI;

    fn grid(n: usize) -> WavenumberGrid {
        WavenumberGrid::new(n).unwrap()
    }

    fn rand_field(g: &WavenumberGrid, seed: u64) -> SpectralField {
        ic::random_divfree(g, seed, 2.0, 1.0).unwrap().0
    }

    #[test]
    fn stokes_eigenvalue_on_single_mode() {
        let g = grid(8);
        let (_, b) = ic::single_mode_b(&g, [1, 0, 0], [0.0, 1.0, 0.0]).unwrap();
        let ab = apply_a(&b);
        let lam = 4.0 * PI * PI;
        let diff = ab.sub(&b.scaled(lam));
        assert!(diff.l2_norm() < 1e-12 * ab.l2_norm());
        assert!(apply_a(&SpectralField::zero(&g)).l2_norm() == 0.0);
    }

    #[test]
    fn stokes_pairing_is_v_norm() {
        let g = grid(16);
        let f = rand_field(&g, 5);
        let lhs = apply_a(&f).l2_inner(&f);
        let rhs = v_norm(&f).powi(2);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn helmholtz_closed_form() {
        let g = grid(8);
        let f = rand_field(&g, 9);
        // α = 0 is the identity
        assert_eq!(helmholtz_inverse(&f, 0.0), f);
        // zero mode untouched, k = (1,0,0) halved at α = 1/(2π)
        let (_, b) = ic::single_mode_b(&g, [1, 0, 0], [0.0, 2.0, 0.0]).unwrap();
        let h = helmholtz_inverse(&b, 1.0 / (2.0 * PI));
        let idx = g.index_of([1, 0, 0]);
        assert!((h.coeff(1, idx) - b.coeff(1, idx) / 2.0).norm() < 1e-15);
    }

    #[test]
    fn helmholtz_is_exact_inverse_and_commutes() {
        let g = grid(8);
        let f = rand_field(&g, 20);
        let alpha = 0.3;
        let h = helmholtz_inverse(&f, alpha);
        // (I + α²A) h = f per mode
        let mut back = h.clone();
        let a2 = alpha * alpha;
        for c in 0..3 {
            for (idx, z) in back.comp_mut(c).iter_mut().enumerate() {
                *z *= 1.0 + a2 * g.kappa_sq(idx);
            }
        }
        assert!(back.sub(&f).l2_norm() <= 1e-13 * f.l2_norm());
        // diagonal operators commute, mode by mode
        let ab = apply_a(&helmholtz_inverse(&f, alpha));
        let ba = helmholtz_inverse(&apply_a(&f), alpha);
        let pl = helmholtz_inverse(&f, alpha).leray_project();
        let lp = helmholtz_inverse(&f.leray_project(), alpha);
        for idx in 0..g.modes() {
            for c in 0..3 {
                let scale = ab.coeff(c, idx).norm().max(1e-30);
                assert!((ab.coeff(c, idx) - ba.coeff(c, idx)).norm() <= 1e-13 * scale);
                let scale = pl.coeff(c, idx).norm().max(1e-3 * f.l2_norm());
                assert!((pl.coeff(c, idx) - lp.coeff(c, idx)).norm() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn sobolev_norm_basics() {
        let g = grid(8);
        let z = SpectralField::zero(&g);
        for s in [0.0, 1.0, 2.5] {
            assert_eq!(sobolev_norm(&z, s).unwrap(), 0.0);
        }
        assert!(sobolev_norm(&z, -1.0).is_err());
        let (_, b) = ic::single_mode_b(&g, [1, 0, 0], [0.0, 1.0, 0.0]).unwrap();
        let h1 = sobolev_norm(&b, 1.0).unwrap();
        let l2 = sobolev_norm(&b, 0.0).unwrap();
        assert!((h1 - 2.0 * PI * l2).abs() < 1e-12);
    }

    #[test]
    fn poincare_inequality_over_random_fields() {
        // |f| ≤ λ₁^{-1/2} ‖f‖ with λ₁ = (2π)² on the mean-zero lattice
        let g = grid(16);
        for seed in 0..100 {
            let f = rand_field(&g, seed);
            let l2 = l2_norm(&f);
            let v = v_norm(&f);
            assert!(l2 <= v / (2.0 * PI) * (1.0 + 1e-12), "seed {seed}: {l2} vs {v}");
        }
    }

    #[test]
    fn nonlinear_b_of_zero_velocity_vanishes() {
        let g = grid(8);
        let mut ctx = OperatorContext::new(&g, 0.1).unwrap();
        let z = SpectralField::zero(&g);
        let v = rand_field(&g, 31);
        let out = ctx.nonlinear_b(&z, &v).unwrap();
        assert!(out.l2_norm() == 0.0);
    }

    #[test]
    fn beltrami_self_advection_projects_to_zero() {
        let g = grid(8);
        let mut ctx = OperatorContext::new(&g, 0.0).unwrap();
        let u = ic::abc_flow(&g, 1.0);
        let out = ctx.nonlinear_b(&u, &u).unwrap();
        assert!(out.l2_norm() <= 1e-12 * v_norm(&u).powi(2));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let mut ctx = OperatorContext::new(&grid(8), 0.0).unwrap();
        let u = rand_field(&grid(8), 1);
        let v = rand_field(&grid(16), 1);
        assert!(matches!(ctx.nonlinear_b(&u, &v), Err(Error::GridMismatch(_, _))));
    }

    #[test]
    fn alpha_validation() {
        let g = grid(8);
        assert!(OperatorContext::new(&g, -0.1).is_err());
        assert!(OperatorContext::new(&g, f64::NAN).is_err());
        assert!(OperatorContext::new(&g, 0.0).is_ok());
    }

    #[test]
    fn trilinear_identities_random() {
        let g = grid(8);
        let mut ctx = OperatorContext::new(&g, 0.0).unwrap();
        for seed in 0..5 {
            let u = rand_field(&g, 100 + seed);
            let v = rand_field(&g, 200 + seed);
            let w = rand_field(&g, 300 + seed);
            let nu = v_norm(&u);
            let nv = v_norm(&v);
            let nw = v_norm(&w);
            let bvv = ctx.trilinear_b(&u, &v, &v).unwrap();
            assert!(bvv.abs() <= 1e-12 * nu * nv * nv, "b(u,v,v) = {bvv}");
            let bvw = ctx.trilinear_b(&u, &v, &w).unwrap();
            let bwv = ctx.trilinear_b(&u, &w, &v).unwrap();
            assert!((bvw + bwv).abs() <= 1e-12 * nu * nv * nw);
        }
    }

    #[test]
    fn rhs_elsasser_cancellation() {
        let g = grid(8);
        let mut ctx = OperatorContext::new(&g, 0.1).unwrap();
        let (u, b) = ic::elsasser(&g, 1.0);
        let (du, db) = ctx.mhd_rhs(&u, &b, 0.0, 0.0, true).unwrap();
        assert!(du.l2_norm() == 0.0);
        assert!(db.l2_norm() == 0.0);
    }

    #[test]
    fn rhs_single_mode_b_is_pure_decay() {
        let g = grid(8);
        let mu = 0.01;
        let mut ctx = OperatorContext::new(&g, 0.1).unwrap();
        let (u, b) = ic::single_mode_b(&g, [1, 0, 0], [0.0, 1.0, 0.0]).unwrap();
        let (du, db) = ctx.mhd_rhs(&u, &b, mu, 0.0, true).unwrap();
        assert!(du.l2_norm() == 0.0);
        let want = b.scaled(-mu * 4.0 * PI * PI);
        assert!(db.sub(&want).l2_norm() <= 1e-12 * want.l2_norm());
    }

    #[test]
    fn rhs_viscous_term_is_filtered_laplacian() {
        // Beltrami u with B = 0: the nonlinearity projects away, leaving
        // du = −ν (I+α²A)⁻¹ A u, diagonal per mode
        let g = grid(8);
        let (alpha, nu) = (0.2, 0.03);
        let mut ctx = OperatorContext::new(&g, alpha).unwrap();
        let u = ic::abc_flow(&g, 1.0);
        let b = SpectralField::zero(&g);
        let (du, db) = ctx.mhd_rhs(&u, &b, 0.0, nu, true).unwrap();
        let lam = 4.0 * PI * PI; // shell-1 eigenvalue
        let want = u.scaled(-nu * lam / (1.0 + alpha * alpha * lam));
        assert!(du.sub(&want).l2_norm() <= 1e-12 * want.l2_norm());
        assert!(db.l2_norm() == 0.0);
    }

    #[test]
    fn rhs_zero_state() {
        let g = grid(8);
        let mut ctx = OperatorContext::new(&g, 0.1).unwrap();
        let z = SpectralField::zero(&g);
        let (du, db) = ctx.mhd_rhs(&z, &z, 0.05, 0.0, true).unwrap();
        assert!(du.l2_norm() == 0.0 && db.l2_norm() == 0.0);
    }

    #[test]
    fn rhs_divergence_form_matches_advective_form() {
        let g = grid(8);
        let mut ctx = OperatorContext::new(&g, 0.2).unwrap();
        let u = rand_field(&g, 71);
        let b = rand_field(&g, 72);
        let (du, db) = ctx.mhd_rhs(&u, &b, 0.0, 0.0, true).unwrap();
        let bbb = ctx.nonlinear_b(&b, &b).unwrap();
        let buu = ctx.nonlinear_b(&u, &u).unwrap();
        let want_du = helmholtz_inverse(&bbb.sub(&buu), 0.2);
        assert!(du.sub(&want_du).l2_norm() <= 1e-11 * want_du.l2_norm().max(1e-30));
        let bbu = ctx.nonlinear_b(&b, &u).unwrap();
        let bub = ctx.nonlinear_b(&u, &b).unwrap();
        let want_db = bbu.sub(&bub);
        assert!(db.sub(&want_db).l2_norm() <= 1e-11 * want_db.l2_norm().max(1e-30));
    }
}

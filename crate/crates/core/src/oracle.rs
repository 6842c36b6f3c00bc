//! Reference implementations independent of the transform path.
//!
//! The dense truncated-convolution evaluation of the bilinear term walks
//! every retained mode pair directly; it shares no code with the
//! pseudo-spectral route and backs both the unit oracles and the `verify`
//! command.

use crate::error::Result;
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;
use crate::ic;
use crate::operators::{self, OperatorContext};
use num_complex::Complex64;
use std::f64::consts::PI;

/// `B(u, v)` by direct summation over retained mode pairs:
/// `ĉ_i(k) = Σ_{p+q=k} û_j(p) · iκ_j(q) · v̂_i(q)`, then Leray projection.
pub fn convolution_nonlinear_b(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let grid = u.grid().clone();
    let retained: Vec<(usize, [i32; 3])> = grid.iter_retained().collect();
    let mut out = SpectralField::zero(&grid);
    for &(pidx, p) in &retained {
        let up = [u.coeff(0, pidx), u.coeff(1, pidx), u.coeff(2, pidx)];
        if up.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        for &(qidx, q) in &retained {
            let k = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
            if !grid.dealias_keeps(k) {
                continue;
            }
            let kidx = grid.index_of(k);
            let kq = [
                2.0 * PI * q[0] as f64,
                2.0 * PI * q[1] as f64,
                2.0 * PI * q[2] as f64,
            ];
            let udotk = Complex64::i() * (kq[0] * up[0] + kq[1] * up[1] + kq[2] * up[2]);
            for i in 0..3 {
                let term = udotk * v.coeff(i, qidx);
                out.comp_mut(i)[kidx] += term;
            }
        }
    }
    // mean-zero then project, as the pseudo-spectral route does
    for c in 0..3 {
        out.comp_mut(c)[0] = Complex64::default();
    }
    out.leray_project_in_place();
    out
}

/// `b(u, v, w)` through the dense route.
pub fn convolution_trilinear_b(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> f64 {
    convolution_nonlinear_b(u, v).l2_inner(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Fast,
    Full,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn push(report: &mut VerifyReport, name: &str, passed: bool, detail: String) {
    report.checks.push(CheckResult { name: name.to_string(), passed, detail });
}

/// Run the identity/oracle suite. `Fast` covers the N=8 checks; `Full` adds
/// N=16 identities and two short integration checks.
pub fn verify(level: VerifyLevel) -> Result<VerifyReport> {
    let mut report = VerifyReport { checks: Vec::new() };

    let g8 = WavenumberGrid::new(8)?;
    let mut ctx = OperatorContext::new(&g8, 0.0)?;

    // transform round trip
    {
        let (f, _) = ic::random_divfree(&g8, 1001, 2.0, 1.0)?;
        let back = f.to_physical().to_spectral(true);
        let err = f.sub(&back).l2_norm() / f.l2_norm().max(1e-300);
        push(&mut report, "transform round trip (N=8)", err <= 1e-12, format!("rel err {err:.3e}"));
        let residue = f.synthesis_imag_residue();
        push(
            &mut report,
            "synthesis imaginary residue (N=8)",
            residue <= 1e-12,
            format!("rel residue {residue:.3e}"),
        );
    }

    // Leray projection: idempotence, gradient kill, divergence
    {
        let (f, _) = ic::random_divfree(&g8, 1002, 2.0, 1.0)?;
        let mut raw = f.clone();
        raw.comp_mut(0)[g8.index_of([1, 2, 0])] += Complex64::new(0.3, -0.4);
        raw.comp_mut(0)[g8.index_of([-1, -2, 0])] += Complex64::new(0.3, 0.4);
        let once = raw.leray_project();
        let twice = once.leray_project();
        let idem = once.sub(&twice).l2_norm() / once.l2_norm().max(1e-300);
        push(&mut report, "Leray idempotence (N=8)", idem <= 1e-13, format!("rel drift {idem:.3e}"));
        let div = once.max_divergence();
        push(&mut report, "Leray divergence (N=8)", div <= 1e-12, format!("max div {div:.3e}"));
    }

    // Helmholtz inverse exactness
    {
        let (f, _) = ic::random_divfree(&g8, 1003, 2.0, 1.0)?;
        let alpha = 0.25;
        let h = operators::helmholtz_inverse(&f, alpha);
        let mut back = h.clone();
        for c in 0..3 {
            for (idx, z) in back.comp_mut(c).iter_mut().enumerate() {
                *z *= 1.0 + alpha * alpha * g8.kappa_sq(idx);
            }
        }
        let err = back.sub(&f).l2_norm() / f.l2_norm().max(1e-300);
        push(&mut report, "Helmholtz inverse (N=8)", err <= 1e-13, format!("rel err {err:.3e}"));
    }

    // Parseval / norm consistency
    {
        let (f, _) = ic::random_divfree(&g8, 1004, 2.0, 1.0)?;
        let lhs = operators::apply_a(&f).l2_inner(&f);
        let rhs = operators::v_norm(&f).powi(2);
        let err = (lhs - rhs).abs() / rhs.max(1e-300);
        push(&mut report, "⟨Af,f⟩ = ‖f‖² (N=8)", err <= 1e-12, format!("rel err {err:.3e}"));
    }

    // bilinear term vs dense convolution
    {
        let mut worst = 0.0f64;
        for seed in 0..5u64 {
            let (u, _) = ic::random_divfree(&g8, 2000 + seed, 2.0, 1.0)?;
            let (v, _) = ic::random_divfree(&g8, 3000 + seed, 2.0, 1.0)?;
            let fast = ctx.nonlinear_b(&u, &v)?;
            let dense = convolution_nonlinear_b(&u, &v);
            let err = fast.sub(&dense).l2_norm() / dense.l2_norm().max(1e-300);
            worst = worst.max(err);
        }
        push(
            &mut report,
            "bilinear term vs dense convolution (N=8, 5 fields)",
            worst <= 1e-12,
            format!("worst rel err {worst:.3e}"),
        );
    }

    // trilinear identities
    {
        let (passed, detail) = trilinear_identities(&g8, 20, 4000)?;
        push(&mut report, "trilinear identities (N=8, 20 triples)", passed, detail);
    }

    // Elsässer cancellation through the full RHS
    {
        let mut ctx_a = OperatorContext::new(&g8, 0.1)?;
        let (u, b) = ic::elsasser(&g8, 1.0);
        let (du, db) = ctx_a.mhd_rhs(&u, &b, 0.0, 0.0, true)?;
        let r = du.l2_norm() + db.l2_norm();
        push(&mut report, "Elsässer cancellation (N=8)", r == 0.0, format!("residual {r:.3e}"));
    }

    if level == VerifyLevel::Full {
        let g16 = WavenumberGrid::new(16)?;
        let (passed, detail) = trilinear_identities(&g16, 50, 5000)?;
        push(&mut report, "trilinear identities (N=16, 50 triples)", passed, detail);

        // exact resistive decay of a single-mode field
        {
            use crate::stepper::{SimState, Stepper};
            let mu = 0.01;
            let (u, b) = ic::single_mode_b(&g16, [1, 0, 0], [0.0, 1.0, 0.0])?;
            let mut stepper = Stepper::new(OperatorContext::new(&g16, 0.1)?, mu, 0.0, true);
            let mut state = SimState::new(u, b);
            let dt = 1e-3;
            for _ in 0..200 {
                state = stepper.step(&state, dt)?.0;
            }
            let decay = (-mu * 4.0 * PI * PI * state.t).exp();
            let want = ic::single_mode_b(&g16, [1, 0, 0], [0.0, decay, 0.0])?.1;
            let err = state.b.sub(&want).l2_norm() / want.l2_norm();
            push(
                &mut report,
                "resistive single-mode decay (N=16, 200 steps)",
                err <= 1e-10,
                format!("rel err {err:.3e}"),
            );
        }

        // short ideal run conserves the Voigt energy
        {
            use crate::stepper::{SimState, Stepper};
            let alpha = 0.1;
            let kinds = ic::IcDescriptor::parse_kinds("taylor_green+single_mode_b")?;
            let mut desc = ic::IcDescriptor::new(kinds);
            desc.amp_b = 0.5;
            let (u, b) = ic::make_ic(&desc, &g16, 0)?;
            let e0 = operators::voigt_energy(&u, &b, alpha);
            let mut stepper = Stepper::new(OperatorContext::new(&g16, alpha)?, 0.0, 0.0, true);
            let mut state = SimState::new(u, b);
            for _ in 0..100 {
                state = stepper.step(&state, 5e-4)?.0;
            }
            let e1 = operators::voigt_energy(&state.u, &state.b, alpha);
            let drift = (e1 - e0).abs() / e0;
            push(
                &mut report,
                "ideal Voigt energy conservation (N=16, 100 steps)",
                drift <= 1e-10,
                format!("rel drift {drift:.3e}"),
            );
        }
    }

    Ok(report)
}

fn trilinear_identities(
    grid: &WavenumberGrid,
    triples: u64,
    seed_base: u64,
) -> Result<(bool, String)> {
    let mut ctx = OperatorContext::new(grid, 0.0)?;
    let mut worst_vv = 0.0f64;
    let mut worst_skew = 0.0f64;
    for s in 0..triples {
        let (u, _) = ic::random_divfree(grid, seed_base + 3 * s, 2.5, 1.0)?;
        let (v, _) = ic::random_divfree(grid, seed_base + 3 * s + 1, 2.5, 1.0)?;
        let (w, _) = ic::random_divfree(grid, seed_base + 3 * s + 2, 2.5, 1.0)?;
        let nu = operators::v_norm(&u);
        let nv = operators::v_norm(&v);
        let nw = operators::v_norm(&w);
        let bvv = ctx.trilinear_b(&u, &v, &v)?;
        worst_vv = worst_vv.max(bvv.abs() / (nu * nv * nv));
        let bvw = ctx.trilinear_b(&u, &v, &w)?;
        let bwv = ctx.trilinear_b(&u, &w, &v)?;
        worst_skew = worst_skew.max((bvw + bwv).abs() / (nu * nv * nw));
    }
    let passed = worst_vv <= 1e-12 && worst_skew <= 1e-12;
    Ok((passed, format!("|b(u,v,v)| ≤ {worst_vv:.3e}, skew ≤ {worst_skew:.3e} (rel)")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_convolution_matches_fft_route() {
        let g = WavenumberGrid::new(8).unwrap();
        let mut ctx = OperatorContext::new(&g, 0.0).unwrap();
        for seed in 0..3u64 {
            let (u, _) = ic::random_divfree(&g, 10 + seed, 2.0, 1.0).unwrap();
            let (v, _) = ic::random_divfree(&g, 20 + seed, 2.0, 1.0).unwrap();
            let fast = ctx.nonlinear_b(&u, &v).unwrap();
            let dense = convolution_nonlinear_b(&u, &v);
            let err = fast.sub(&dense).l2_norm();
            assert!(err <= 1e-12 * dense.l2_norm(), "seed {seed}: {err}");
        }
    }

    #[test]
    fn dense_trilinear_matches_fft_route() {
        let g = WavenumberGrid::new(8).unwrap();
        let mut ctx = OperatorContext::new(&g, 0.0).unwrap();
        let (u, _) = ic::random_divfree(&g, 51, 2.0, 1.0).unwrap();
        let (v, _) = ic::random_divfree(&g, 52, 2.0, 1.0).unwrap();
        let (w, _) = ic::random_divfree(&g, 53, 2.0, 1.0).unwrap();
        let fast = ctx.trilinear_b(&u, &v, &w).unwrap();
        let dense = convolution_trilinear_b(&u, &v, &w);
        let scale = operators::v_norm(&u) * operators::v_norm(&v) * operators::v_norm(&w);
        assert!((fast - dense).abs() <= 1e-12 * scale);
    }

    #[test]
    fn fast_verify_passes() {
        let report = verify(VerifyLevel::Fast).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}

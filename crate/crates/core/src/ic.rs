//! Benchmark initial conditions, constructed directly in spectral space so
//! they are divergence-free and mean-zero to machine precision.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    TaylorGreen,
    Abc,
    SingleModeB,
    Elsasser,
    RandomDivfree,
}

impl fmt::Display for IcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IcKind::TaylorGreen => "taylor_green",
            IcKind::Abc => "abc",
            IcKind::SingleModeB => "single_mode_b",
            IcKind::Elsasser => "elsasser",
            IcKind::RandomDivfree => "random_divfree",
        };
        f.write_str(s)
    }
}

impl FromStr for IcKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "taylor_green" => Ok(IcKind::TaylorGreen),
            "abc" => Ok(IcKind::Abc),
            "single_mode_b" => Ok(IcKind::SingleModeB),
            "elsasser" => Ok(IcKind::Elsasser),
            "random_divfree" => Ok(IcKind::RandomDivfree),
            other => Err(Error::InvalidParameter(format!("unknown ic kind '{other}'"))),
        }
    }
}

/// An initial condition: a sum of named components (e.g.
/// `taylor_green+single_mode_b`) with shared amplitude/spectrum parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct IcDescriptor {
    pub kinds: Vec<IcKind>,
    pub amp_u: f64,
    pub amp_b: f64,
    pub k0: f64,
}

impl IcDescriptor {
    pub fn new(kinds: Vec<IcKind>) -> Self {
        Self { kinds, amp_u: 1.0, amp_b: 1.0, k0: 3.0 }
    }

    pub fn parse_kinds(s: &str) -> Result<Vec<IcKind>> {
        let kinds: Result<Vec<IcKind>> = s.split('+').map(IcKind::from_str).collect();
        let kinds = kinds?;
        if kinds.is_empty() {
            return Err(Error::InvalidParameter("empty ic descriptor".into()));
        }
        Ok(kinds)
    }

    pub fn kinds_string(&self) -> String {
        self.kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("+")
    }
}

/// Build `(u₀, B₀)` for a descriptor. The random component consumes the seed;
/// everything else is analytic.
pub fn make_ic(
    desc: &IcDescriptor,
    grid: &WavenumberGrid,
    seed: u64,
) -> Result<(SpectralField, SpectralField)> {
    let mut u = SpectralField::zero(grid);
    let mut b = SpectralField::zero(grid);
    for kind in &desc.kinds {
        let (du, db) = match kind {
            IcKind::TaylorGreen => (taylor_green(grid, desc.amp_u), SpectralField::zero(grid)),
            IcKind::Abc => (abc_flow(grid, desc.amp_u), SpectralField::zero(grid)),
            IcKind::SingleModeB => {
                single_mode_b(grid, [1, 0, 0], [0.0, desc.amp_b, 0.0])?
            }
            IcKind::Elsasser => elsasser(grid, desc.amp_u),
            IcKind::RandomDivfree => random_divfree(grid, seed, desc.k0, desc.amp_u)?,
        };
        u.axpy(1.0, &du);
        b.axpy(1.0, &db);
    }
    u.set_divfree(true);
    b.set_divfree(true);
    Ok((u, b))
}

/// Taylor-Green vortex
/// `u = amp (sin cos cos, −cos sin cos, 0)(2πx)`.
pub fn taylor_green(grid: &WavenumberGrid, amp: f64) -> SpectralField {
    let mut u = SpectralField::zero(grid);
    // sin X cos Y cos Z and −cos X sin Y cos Z expanded over the eight
    // (±1,±1,±1) modes
    for &sx in &[1i32, -1] {
        for &sy in &[1i32, -1] {
            for &sz in &[1i32, -1] {
                let k = [sx, sy, sz];
                let idx = grid.index_of(k);
                // sin picks σ/(2i) = −iσ/2, cos picks 1/2 per factor
                let c0 = Complex64::new(0.0, -(sx as f64) / 8.0) * amp;
                let c1 = Complex64::new(0.0, (sy as f64) / 8.0) * amp;
                u.comp_mut(0)[idx] += c0;
                u.comp_mut(1)[idx] += c1;
                let _ = idx;
            }
        }
    }
    u.set_divfree(true);
    u
}

/// ABC flow with A = B = C = amp; a Beltrami field (`∇×u = 2π u`).
pub fn abc_flow(grid: &WavenumberGrid, amp: f64) -> SpectralField {
    let mut u = SpectralField::zero(grid);
    let half = Complex64::new(amp / 2.0, 0.0);
    let msin = Complex64::new(0.0, -amp / 2.0); // coefficient of e^{+iθ} in amp·sin θ
    // u1 = A sin 2πz + C cos 2πy
    u.add_mode_pair([0, 0, 1], 0, msin);
    u.add_mode_pair([0, 1, 0], 0, half);
    // u2 = B sin 2πx + A cos 2πz
    u.add_mode_pair([1, 0, 0], 1, msin);
    u.add_mode_pair([0, 0, 1], 1, half);
    // u3 = C sin 2πy + B cos 2πx
    u.add_mode_pair([0, 1, 0], 2, msin);
    u.add_mode_pair([1, 0, 0], 2, half);
    u.set_divfree(true);
    u
}

/// `u = 0`, `B = A cos(2πk·x)` with `A·k = 0`.
pub fn single_mode_b(
    grid: &WavenumberGrid,
    k: [i32; 3],
    a: [f64; 3],
) -> Result<(SpectralField, SpectralField)> {
    let dot = k[0] as f64 * a[0] + k[1] as f64 * a[1] + k[2] as f64 * a[2];
    if dot != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "single_mode_b requires A·k = 0, got {dot}"
        )));
    }
    if !grid.dealias_keeps(k) || k == [0, 0, 0] {
        return Err(Error::InvalidParameter(format!(
            "single_mode_b wavevector {k:?} outside the retained mode set"
        )));
    }
    let mut b = SpectralField::zero(grid);
    for c in 0..3 {
        if a[c] != 0.0 {
            b.add_mode_pair(k, c, Complex64::new(a[c] / 2.0, 0.0));
        }
    }
    b.set_divfree(true);
    Ok((SpectralField::zero(grid), b))
}

/// Elsässer state `u = B` (both nonlinear exchanges cancel pairwise).
pub fn elsasser(grid: &WavenumberGrid, amp: f64) -> (SpectralField, SpectralField) {
    let u = abc_flow(grid, amp);
    let b = u.clone();
    (u, b)
}

/// Solenoidal random field with shell spectrum `E(s) ∝ s⁴ exp(−(s/k₀)²)`,
/// normalized so `|u|² = amp²`. Deterministic for a fixed seed.
pub fn random_divfree(
    grid: &WavenumberGrid,
    seed: u64,
    k0: f64,
    amp: f64,
) -> Result<(SpectralField, SpectralField)> {
    if k0 <= 0.0 {
        return Err(Error::InvalidParameter(format!("spectrum k0 must be > 0, got {k0}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = SpectralField::zero(grid);

    // fill lexicographically-positive retained modes in a fixed order,
    // mirroring conjugates; k = 0 stays empty
    let kc = grid.kcut();
    for k1 in -kc..=kc {
        for k2 in -kc..=kc {
            for k3 in -kc..=kc {
                let k = [k1, k2, k3];
                let positive = match k.iter().find(|&&c| c != 0) {
                    None => continue, // zero mode
                    Some(&first) => first > 0,
                };
                if !positive {
                    continue;
                }
                for c in 0..3 {
                    let re: f64 = rng.gen_range(-1.0..1.0);
                    let im: f64 = rng.gen_range(-1.0..1.0);
                    u.add_mode_pair(k, c, Complex64::new(re, im));
                }
            }
        }
    }
    u.leray_project_in_place();
    u.enforce_mask();

    // rescale each shell to the prescribed spectrum
    rescale_to_shell_spectrum(&mut u, k0, amp);
    u.set_divfree(true);
    Ok((u, SpectralField::zero(grid)))
}

fn rescale_to_shell_spectrum(f: &mut SpectralField, k0: f64, amp: f64) {
    let grid = f.grid().clone();
    let max_shell = (grid.kcut() as f64 * 3.0f64.sqrt()).round() as usize + 1;
    let mut actual = vec![0.0f64; max_shell + 1];
    for (idx, k) in grid.iter_modes() {
        let s = shell_of(k);
        if s == 0 || s > max_shell {
            continue;
        }
        for c in 0..3 {
            actual[s] += f.coeff(c, idx).norm_sqr();
        }
    }
    let target: Vec<f64> = (0..=max_shell)
        .map(|s| {
            let s = s as f64;
            s.powi(4) * (-(s / k0).powi(2)).exp()
        })
        .collect();
    let mut factors = vec![0.0f64; max_shell + 1];
    for s in 1..=max_shell {
        if actual[s] > 0.0 {
            factors[s] = (target[s] / actual[s]).sqrt();
        }
    }
    for c in 0..3 {
        for (idx, k) in grid.iter_modes() {
            let s = shell_of(k);
            let fac = if s == 0 || s > max_shell { 0.0 } else { factors[s] };
            f.comp_mut(c)[idx] *= fac;
        }
    }
    let norm = f.l2_norm();
    if norm > 0.0 {
        f.scale(amp / norm);
    }
}

fn shell_of(k: [i32; 3]) -> usize {
    let m = ((k[0] as f64).powi(2) + (k[1] as f64).powi(2) + (k[2] as f64).powi(2)).sqrt();
    m.round() as usize
}

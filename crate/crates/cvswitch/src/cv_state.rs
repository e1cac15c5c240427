//! Coherent probe states and Gaussian measurements on them.
//!
//! A coherent state `|α⟩` is fully described by its phase-space amplitude
//! `α`; displacing it shifts the amplitude and at most changes a global
//! phase, which no single-state measurement can see. The two measurements
//! used by the estimation schemes are:
//!
//! * **homodyne** of one quadrature — outcome `∼ N(√2·Re α, 1/2)` for `X`,
//!   `∼ N(√2·Im α, 1/2)` for `P` (vacuum variance 1/2 in ħ = 1 units);
//! * **heterodyne**, the joint noisy read of both quadratures — outcome `β`
//!   with density `p(β) = e^{−|β−α|²}/π` over the complex plane, i.e. real
//!   and imaginary parts independently `N(·, 1/2)` around `α`.
//!
//! Energy is accounted as `E = ⟨X² + P²⟩/2 = |α|² + 1/2` — mean photon
//! number plus the vacuum half-quantum — the currency of the
//! resource-constrained comparisons in [`crate::bounds`]. The minimum-energy
//! probe is the vacuum at `E = 1/2`.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::weyl::Displacement;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// A single-mode coherent state `|α⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentState {
    pub alpha: C64,
}

/// Which quadrature a homodyne detector reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

/// Outcome of a heterodyne measurement: a point in phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterodyneSample {
    pub beta: C64,
}

impl CoherentState {
    pub fn new(alpha: C64) -> Self {
        Self { alpha }
    }

    /// The vacuum `|0⟩`.
    pub fn vacuum() -> Self {
        Self { alpha: C64::new(0.0, 0.0) }
    }

    /// Mean energy `⟨(X² + P²)/2⟩ = |α|² + 1/2` (ħω units, zero-point
    /// included).
    pub fn energy(&self) -> f64 {
        self.alpha.norm_sqr() + 0.5
    }

    /// Quadrature means `(⟨X⟩, ⟨P⟩) = (√2·Re α, √2·Im α)`.
    pub fn quadrature_means(&self) -> (f64, f64) {
        (SQRT2 * self.alpha.re, SQRT2 * self.alpha.im)
    }

    /// Apply a displacement: `D(β)|α⟩ ∝ |α + β⟩`. Global phase dropped —
    /// it cancels in every measurement on the state alone.
    pub fn displace(&self, d: Displacement) -> Self {
        Self { alpha: self.alpha + d.alpha }
    }

    /// Draw one homodyne outcome of quadrature `q`.
    pub fn sample_homodyne<R: Rng + ?Sized>(&self, q: Quadrature, rng: &mut R) -> f64 {
        let mean = match q {
            Quadrature::X => SQRT2 * self.alpha.re,
            Quadrature::P => SQRT2 * self.alpha.im,
        };
        let z: f64 = rng.sample(StandardNormal);
        mean + z / SQRT2
    }

    /// Draw one heterodyne outcome `β` from `p(β) = e^{−|β−α|²}/π`.
    pub fn sample_heterodyne<R: Rng + ?Sized>(&self, rng: &mut R) -> HeterodyneSample {
        let zr: f64 = rng.sample(StandardNormal);
        let zi: f64 = rng.sample(StandardNormal);
        HeterodyneSample {
            beta: self.alpha + C64::new(zr / SQRT2, zi / SQRT2),
        }
    }
}

//! Displacement-operator algebra on a single bosonic mode.
//!
//! Conventions (ħ = 1 throughout): the quadratures are `X = (a + a†)/√2` and
//! `P = i(a† − a)/√2`, and a displacement is `D(α) = exp(α a† − ᾱ a)`. A
//! position displacement by `x` is `D_x = e^{−ixP} = D(x/√2)` (real
//! amplitude), a momentum displacement by `p` is `D_p = e^{ipX} = D(ip/√2)`
//! (imaginary amplitude).
//!
//! Displacements form a projective group: `D(α)·D(β) = e^{iφ} D(α+β)` with
//! the symmetric Baker–Campbell–Hausdorff phase `φ = Im(α β̄)`. In particular
//! `D_p D_x = e^{ixp} D_x D_p`, so reordering position against momentum
//! displacements costs a phase equal to the product of the shifts. An ordered
//! product of displacements (a *word*) therefore reduces to a single
//! displacement together with an accumulated global phase — its normal form.
//!
//! The phase is stored **unreduced** (a plain real, not mod 2π): words whose
//! accumulated phases exceed 2π stay distinguishable at the algebra level,
//! and reduction happens only where probabilities are formed.
//!
//! A [`ControlledWord`] keeps one word per basis state of a control qubit.
//! When both branches end at the same net displacement, the pair acts on a
//! probe as a pure controlled phase — the phase difference returned by
//! [`switch_phase`] — which is exactly the quantity read out by the
//! order-superposition estimation schemes: for the canonical two-ordering
//! word over displacements `x_1..x_N`, `p_1..p_N` it equals
//! `(Σx_j)(Σp_k) = N² x̄ p̄`.

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Two branch words end at different net displacements, so the control qubit
/// would entangle with the probe instead of picking up a pure phase.
#[derive(Debug, Clone, Error)]
pub enum WeylError {
    #[error(
        "controlled-word branches end at different net displacements \
         (|Δα| = {delta:.3e}, tolerance {tol:.0e}); the pure-phase readout \
         model does not apply"
    )]
    BranchMismatch { delta: f64, tol: f64 },
}

pub type WeylResult<T> = Result<T, WeylError>;

/// Tolerance on `|Δα|` below which two branch amplitudes count as equal.
/// Exact equality is the intended use; the slack only absorbs float noise
/// from summing the same shifts in different orders.
pub const BRANCH_TOL: f64 = 1e-9;

const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A single phase-space displacement `D(α) = exp(α a† − ᾱ a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    /// Complex phase-space amplitude (dimensionless).
    pub alpha: C64,
}

impl Displacement {
    /// General displacement with complex amplitude `alpha`.
    pub fn new(alpha: C64) -> Self {
        Self { alpha }
    }

    /// The identity `D(0)`.
    pub fn identity() -> Self {
        Self { alpha: C64::new(0.0, 0.0) }
    }

    /// Position displacement `D_x = e^{−ixP}`, shifting `X` by `x`;
    /// amplitude `α = x/√2` (purely real).
    pub fn position(x: f64) -> Self {
        Self { alpha: C64::new(x * SQRT2_INV, 0.0) }
    }

    /// Momentum displacement `D_p = e^{ipX}`, shifting `P` by `p`;
    /// amplitude `α = i·p/√2` (purely imaginary).
    pub fn momentum(p: f64) -> Self {
        Self { alpha: C64::new(0.0, p * SQRT2_INV) }
    }
}

/// Compose two displacements into one: `D(α_a)·D(α_b) = e^{iφ} D(α_a + α_b)`.
///
/// Returns the combined displacement and the phase `φ = Im(α_a · conj(α_b))`.
/// Antisymmetric under swapping the factors, and zero whenever both
/// amplitudes lie on one line through the origin (the displacements commute).
pub fn compose(a: Displacement, b: Displacement) -> (Displacement, f64) {
    let phase = (a.alpha * b.alpha.conj()).im;
    (Displacement::new(a.alpha + b.alpha), phase)
}

/// An ordered product of displacements. The leftmost factor is applied
/// *last*, matching the usual operator-product convention, so the word
/// `[D_a, D_b]` denotes the operator `D_a · D_b` (with `D_b` hitting the
/// state first). An empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DisplacementWord {
    pub factors: Vec<Displacement>,
}

impl DisplacementWord {
    pub fn new(factors: Vec<Displacement>) -> Self {
        Self { factors }
    }

    pub fn identity() -> Self {
        Self { factors: Vec::new() }
    }
}

impl From<Vec<Displacement>> for DisplacementWord {
    fn from(factors: Vec<Displacement>) -> Self {
        Self { factors }
    }
}

/// Canonical reduction of a word: one displacement `D(total_alpha)` times
/// `e^{i·phase}`, with the phase kept as an unreduced real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalForm {
    pub total_alpha: C64,
    pub phase: f64,
}

/// Reduce a word to its normal form by left-folding [`compose`] over the
/// factors. `total_alpha` is the plain sum of all amplitudes; `phase` is the
/// accumulated composition phase `Σ_{i<j} Im(α_i·conj(α_j))`.
pub fn normalize(word: &DisplacementWord) -> NormalForm {
    let mut acc = Displacement::identity();
    let mut phase = 0.0;
    for &f in &word.factors {
        let (combined, step) = compose(acc, f);
        acc = combined;
        phase += step;
    }
    NormalForm { total_alpha: acc.alpha, phase }
}

/// A two-branch controlled word: the operator
/// `|0⟩⟨0| ⊗ branch0 + |1⟩⟨1| ⊗ branch1` on control ⊗ probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledWord {
    pub branch0: DisplacementWord,
    pub branch1: DisplacementWord,
}

impl ControlledWord {
    pub fn new(branch0: DisplacementWord, branch1: DisplacementWord) -> Self {
        Self { branch0, branch1 }
    }

    /// Phase difference between the two branches; see [`switch_phase`].
    pub fn switch_phase(&self) -> WeylResult<f64> {
        switch_phase(&self.branch0, &self.branch1)
    }
}

/// Relative phase `normalize(branch1).phase − normalize(branch0).phase`
/// between two branch words with the same net displacement.
///
/// For the canonical two-ordering word built by [`switch_word`] this equals
/// `(Σx_j)(Σp_k) = N² x̄ p̄` exactly — the sum of all N² pairwise reordering
/// phases.
///
/// Errors with [`WeylError::BranchMismatch`] when the nets differ by more
/// than [`BRANCH_TOL`]: in that case the control and probe end up entangled
/// and the branch phases alone no longer describe the readout statistics.
pub fn switch_phase(branch0: &DisplacementWord, branch1: &DisplacementWord) -> WeylResult<f64> {
    let n0 = normalize(branch0);
    let n1 = normalize(branch1);
    let delta = (n1.total_alpha - n0.total_alpha).norm();
    if delta >= BRANCH_TOL {
        return Err(WeylError::BranchMismatch { delta, tol: BRANCH_TOL });
    }
    Ok(n1.phase - n0.phase)
}

/// The canonical order-superposition word for displacements `xs`, `ps`:
/// branch 0 carries the factor list `[D_{x_1}..D_{x_N}, D_{p_1}..D_{p_N}]`
/// (all momentum shifts hit the probe first), branch 1 the reversed ordering
/// `[D_{p_1}..D_{p_N}, D_{x_1}..D_{x_N}]`. Both branches displace the probe
/// by the same net amount, and their phase difference is `(Σx)(Σp)`.
pub fn switch_word(xs: &[f64], ps: &[f64]) -> ControlledWord {
    let x_factors: Vec<Displacement> = xs.iter().map(|&x| Displacement::position(x)).collect();
    let p_factors: Vec<Displacement> = ps.iter().map(|&p| Displacement::momentum(p)).collect();

    let mut b0 = x_factors.clone();
    b0.extend(p_factors.iter().copied());
    let mut b1 = p_factors;
    b1.extend(x_factors);

    ControlledWord::new(DisplacementWord::new(b0), DisplacementWord::new(b1))
}

//! Truncated Fock-space oracle: brute-force matrix mechanics used only to
//! cross-check the phase-space algebra.
//!
//! Everything here deliberately avoids the composition rules of
//! [`crate::weyl`]. Displacements are built as literal matrix exponentials
//! `D(α) = exp(α a† − ᾱ a)` on a `dim`-dimensional number basis, controlled
//! words act on an explicit qubit ⊗ oscillator state vector, and outcome
//! probabilities come from vector norms. Agreement between this path and the
//! closed-form path is what the consistency suite certifies.
//!
//! Truncation is the one approximation: a displacement of magnitude `|α|`
//! drags the vacuum to mean photon number `|α|²` with Poisson tails, so the
//! basis must extend several standard deviations past every *intermediate*
//! displacement a word reaches. The guard used throughout is
//! `4·|α|² ≤ dim`, and violations report the dimension that would do.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::weyl::{ControlledWord, DisplacementWord};

#[derive(Debug, Clone, Error)]
pub enum FockError {
    #[error(
        "truncation dimension {dim} cannot hold a displacement reaching \
         |α|² = {reached:.2} (need 4·|α|² ≤ dim; suggested dim = {suggested})"
    )]
    TruncationTooSmall { dim: usize, reached: f64, suggested: usize },
}

pub type FockResult<T> = Result<T, FockError>;

fn suggested_dim(alpha_sqr: f64) -> usize {
    32usize.max(8 * alpha_sqr.ceil() as usize)
}

fn check_truncation(dim: usize, alpha_sqr: f64) -> FockResult<()> {
    if 4.0 * alpha_sqr > dim as f64 {
        Err(FockError::TruncationTooSmall {
            dim,
            reached: alpha_sqr,
            suggested: suggested_dim(alpha_sqr),
        })
    } else {
        Ok(())
    }
}

/// Dense square matrix on the truncated number basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub dim: usize,
    pub entries: Vec<C64>,
}

impl TruncatedOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity_matrix(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.entries[j * self.dim + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&e| e * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.entries[i * n + k];
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                let row_b = &other.entries[k * n..(k + 1) * n];
                let row_o = &mut out.entries[i * n..(i + 1) * n];
                for (o, &b) in row_o.iter_mut().zip(row_b) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(&m, &x)| m * x)
                    .sum()
            })
            .collect()
    }
}

/// The annihilation operator: `a|n⟩ = √n |n−1⟩`.
pub fn annihilation(dim: usize) -> TruncatedOperator {
    let mut a = TruncatedOperator::zeros(dim);
    for n in 1..dim {
        a.set(n - 1, n, C64::new((n as f64).sqrt(), 0.0));
    }
    a
}

/// Matrix exponential by scaling-and-squaring: halve the generator until its
/// Frobenius norm is ≤ 1/2, sum the Taylor series to ~1e−13, square back up.
/// For the anti-Hermitian generators used here the result is unitary to
/// numerical precision at any truncation.
fn expm(g: &TruncatedOperator) -> TruncatedOperator {
    let norm = g.frobenius_norm();
    let squarings = if norm <= 0.5 { 0 } else { (norm / 0.5).log2().ceil() as u32 };
    let gs = g.scaled(C64::new(1.0 / 2f64.powi(squarings as i32), 0.0));

    let mut result = TruncatedOperator::identity_matrix(g.dim);
    let mut term = TruncatedOperator::identity_matrix(g.dim);
    for k in 1..64 {
        term = term.matmul(&gs).scaled(C64::new(1.0 / k as f64, 0.0));
        result = result.add(&term);
        if term.frobenius_norm() < 1e-13 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Dense matrix for `D(α) = exp(α a† − ᾱ a)`, guarded by the truncation
/// check on `|α|²`.
pub fn displacement_matrix(alpha: C64, dim: usize) -> FockResult<TruncatedOperator> {
    check_truncation(dim, alpha.norm_sqr())?;
    let a = annihilation(dim);
    let generator = a.dagger().scaled(alpha).add(&a.scaled(-alpha.conj()));
    Ok(expm(&generator))
}

/// Number-basis coefficients of the coherent state `|α⟩`:
/// `c_n = e^{−|α|²/2} αⁿ/√(n!)`, computed by the stable recurrence.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Vec<C64> {
    let mut c = Vec::with_capacity(dim);
    let mut cur = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        c.push(cur);
        cur *= alpha / C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    c
}

/// Explicit state vector on qubit ⊗ oscillator: the first `dim` amplitudes
/// belong to control `|0⟩`, the next `dim` to control `|1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProbeState {
    pub dim: usize,
    pub amplitudes: Vec<C64>,
}

impl ControlProbeState {
    /// `|+⟩ ⊗ |0⟩` — the ready state of every two-branch interference run.
    pub fn plus_vacuum(dim: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 2 * dim];
        let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amplitudes[0] = w;
        amplitudes[dim] = w;
        Self { dim, amplitudes }
    }

    /// `|+⟩ ⊗ |α⟩` for a coherent probe.
    pub fn plus_coherent(alpha: C64, dim: usize) -> FockResult<Self> {
        check_truncation(dim, alpha.norm_sqr())?;
        let c = coherent_amplitudes(alpha, dim);
        let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amplitudes = vec![C64::new(0.0, 0.0); 2 * dim];
        for (n, &cn) in c.iter().enumerate() {
            amplitudes[n] = w * cn;
            amplitudes[dim + n] = w * cn;
        }
        Ok(Self { dim, amplitudes })
    }

    pub fn branch_halves(&self) -> (&[C64], &[C64]) {
        self.amplitudes.split_at(self.dim)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Largest `|α|²` any prefix of the word (rightmost factor first) reaches.
fn max_prefix_reach(word: &DisplacementWord) -> f64 {
    let mut net = C64::new(0.0, 0.0);
    let mut max = 0.0f64;
    for f in word.factors.iter().rev() {
        net += f.alpha;
        max = max.max(net.norm_sqr());
    }
    max
}

/// Apply `|0⟩⟨0| ⊗ branch0 + |1⟩⟨1| ⊗ branch1` by dense matrix action,
/// rightmost factor first on each half. The truncation guard covers the
/// largest intermediate displacement either branch reaches (the input state
/// is assumed concentrated near the vacuum; start from a larger `dim` for
/// displaced probes).
pub fn apply_controlled_word(
    state: &ControlProbeState,
    word: &ControlledWord,
) -> FockResult<ControlProbeState> {
    let dim = state.dim;
    let reach = max_prefix_reach(&word.branch0).max(max_prefix_reach(&word.branch1));
    check_truncation(dim, reach)?;

    let (v0, v1) = state.branch_halves();
    let mut v0 = v0.to_vec();
    let mut v1 = v1.to_vec();
    for f in word.branch0.factors.iter().rev() {
        v0 = displacement_matrix(f.alpha, dim)?.apply(&v0);
    }
    for f in word.branch1.factors.iter().rev() {
        v1 = displacement_matrix(f.alpha, dim)?.apply(&v1);
    }
    let mut amplitudes = v0;
    amplitudes.extend(v1);
    Ok(ControlProbeState { dim, amplitudes })
}

/// Probabilities of finding the control in `|±⟩ = (|0⟩ ± |1⟩)/√2`:
/// `p± = ‖v0 ± v1‖²/2`. For branches that agree in net displacement this
/// reduces to `(1 ± cos Δφ)/2` with `Δφ` the branch phase difference.
pub fn control_outcome_probs(state: &ControlProbeState) -> (f64, f64) {
    let (v0, v1) = state.branch_halves();
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (&a, &b) in v0.iter().zip(v1) {
        plus += (a + b).norm_sqr();
        minus += (a - b).norm_sqr();
    }
    (plus / 2.0, minus / 2.0)
}

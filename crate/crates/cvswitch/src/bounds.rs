//! Closed-form precision limits and energy bounds for product-of-means
//! estimation.
//!
//! The task throughout: `2N` black-box displacements, `N` along position
//! with mean `x̄` and `N` along momentum with mean `p̄`, and the target is
//! the product `A = x̄·p̄`. Every routine here is an analytic formula —
//! no sampling — so the module doubles as the reference the Monte Carlo
//! schemes are judged against.
//!
//! The headline hierarchy, per shot budget ν and probe energy `E`
//! (`E ≥ 1/2`, zero-point included):
//!
//! * a single unknown displacement can never be read better than
//!   `1/√(8νE)` — the Gaussian phase-space limit;
//! * any strategy that queries the boxes in a *fixed* order inherits that
//!   limit per box and lands at `min(|x̄|,|p̄|)/(√(8νE)·N)` — Heisenberg-like
//!   `1/N` at fixed energy;
//! * interrogating the two box groups in a coherently *superposed* order
//!   turns `A` into an interference phase `N²A` on a control qubit, giving
//!   `1/(√ν·N²)` from the control alone, slightly better with the probe
//!   read out jointly, and `1/(2√ν·N²)` for the doubled-phase echo variant;
//! * no order-superposition strategy can do parametrically better: an
//!   energy-requirement argument caps the advantage at `Θ(1/N²)`.
//!
//! The `1/N` vs `1/N²` crossover in the means (`z̄* = √(8E)/N`) is the
//! advantage region mapped by [`comparison_rows`].

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum BoundsError {
    #[error(
        "sensitivity and per-box error lists must both have length 2N = {expected} \
         (got {coeffs} coefficients, {errors} errors)"
    )]
    LengthMismatch { expected: usize, coeffs: usize, errors: usize },
}

pub type BoundsResult<T> = Result<T, BoundsError>;

/// RMSE floor for estimating one displacement parameter with ν probes of
/// mean energy `E`: `Δz ≥ 1/√(8νE)`.
pub fn single_displacement_crb(energy: f64, nu: u64) -> f64 {
    assert!(energy > 0.0, "probe energy must be positive");
    assert!(nu >= 1, "need at least one shot");
    1.0 / (8.0 * nu as f64 * energy).sqrt()
}

/// RMSE of the control-only interference readout: `ΔA = 1/(√ν·N²)`.
pub fn switch_rmse_control(n: usize, nu: u64) -> f64 {
    assert!(n >= 1 && nu >= 1);
    let nn = (n * n) as f64;
    1.0 / ((nu as f64).sqrt() * nn)
}

/// RMSE of the joint control + probe-heterodyne readout:
/// `ΔA' = (1/(√ν·N²))·√((x̄²+p̄²)/(x̄²+p̄²+1/N²))` — always at or below
/// the control-only value, approaching it as N grows.
pub fn switch_rmse_joint(x_bar: f64, p_bar: f64, n: usize, nu: u64) -> f64 {
    assert!(n >= 1 && nu >= 1);
    let r2 = x_bar * x_bar + p_bar * p_bar;
    assert!(r2 > 0.0, "joint readout is degenerate at x̄ = p̄ = 0");
    let nn = (n * n) as f64;
    (r2 / (r2 + 1.0 / nn)).sqrt() / ((nu as f64).sqrt() * nn)
}

/// Floor on the RMSE of *any* fixed-order strategy at probe energy `E`:
/// `ΔA ≥ min(|x̄|,|p̄|)/(√(8νE)·N)`.
pub fn fixed_order_bound(x_bar: f64, p_bar: f64, energy: f64, n: usize, nu: u64) -> f64 {
    assert!(n >= 1);
    x_bar.abs().min(p_bar.abs()) * single_displacement_crb(energy, nu) / n as f64
}

/// General fixed-order floor from per-box sensitivities and errors:
/// `ΔA ≥ min_j |c_j|·Δz_j / N`, over all `2N` boxes. With every
/// `Δz_j = 1/√(8νE)` and `c_j ∈ {x̄, p̄}` this reduces to
/// [`fixed_order_bound`].
pub fn general_fixed_order_bound(
    coefficients: &[f64],
    delta_z: &[f64],
    n: usize,
) -> BoundsResult<f64> {
    let expected = 2 * n;
    if coefficients.len() != expected || delta_z.len() != expected {
        return Err(BoundsError::LengthMismatch {
            expected,
            coeffs: coefficients.len(),
            errors: delta_z.len(),
        });
    }
    let min = coefficients
        .iter()
        .zip(delta_z)
        .map(|(&c, &dz)| c.abs() * dz)
        .fold(f64::INFINITY, f64::min);
    Ok(min / n as f64)
}

/// Worst-case energy after `steps` displacements of size ≤ `z_max`
/// interleaved with gates drawing energies `gate_energies` (entries beyond
/// `steps` ignored, missing entries zero), starting from energy `e0`:
/// the recursion `√E_{k+1} ≤ √E_k + z_max/√2 + √e_k` iterated and squared,
/// equal to `(√e0 + steps·z_max/√2 + Σ_k √e_k)²`.
pub fn energy_recursion(e0: f64, gate_energies: &[f64], z_max: f64, steps: usize) -> f64 {
    assert!(e0 >= 0.0 && z_max >= 0.0);
    assert!(gate_energies.iter().all(|&e| e >= 0.0));
    let mut root = e0.sqrt();
    for k in 0..steps {
        root += z_max / std::f64::consts::SQRT_2;
        root += gate_energies.get(k).copied().unwrap_or(0.0).sqrt();
    }
    root * root
}

/// Precision limit for *any* strategy that superposes the order of the `2N`
/// boxes while keeping the total energy requirement within budget `E`:
/// `ΔA ≥ p̄/(4√ν·N²·(z_max + √((2N+1)E/(2N²))))`. Scales as `1/N²`, which
/// is what makes the interference schemes' scaling optimal.
pub fn superposition_bound(
    p_bar: f64,
    n: usize,
    nu: u64,
    z_max: f64,
    energy_budget: f64,
) -> f64 {
    assert!(p_bar > 0.0, "stated for a positive momentum mean");
    assert!(energy_budget >= 0.0 && z_max >= 0.0 && n >= 1 && nu >= 1);
    let nf = n as f64;
    let nn = nf * nf;
    let spread = z_max + ((2.0 * nf + 1.0) * energy_budget / (2.0 * nn)).sqrt();
    p_bar / (4.0 * (nu as f64).sqrt() * nn * spread)
}

/// RMSE of the doubled-phase echo variant (conditional displacement forward,
/// momentum kicks, conditional displacement back): `ΔA = 1/(2√ν·N²)` —
/// exactly half the control-only value.
pub fn ion_trap_rmse(n: usize, nu: u64) -> f64 {
    switch_rmse_control(n, nu) / 2.0
}

/// Asymptotic RMSE of the one-probe-per-box baseline: each round reads `X`
/// once on each of the `N` position-shifted probes and `P` once on each of
/// the `N` momentum-shifted probes (unit vacuum variance 1/2 per read), so
/// the group means carry variance `1/(2νN)` each and the product error
/// propagates to `√((x̄²+p̄²)/(2νN))` — the `1/√N` standard-quantum-limit
/// scaling. This is also the Gaussian Cramér–Rao bound of that readout.
pub fn parallel_rmse(x_bar: f64, p_bar: f64, n: usize, nu: u64) -> f64 {
    assert!(n >= 1 && nu >= 1);
    ((x_bar * x_bar + p_bar * p_bar) / (2.0 * nu as f64 * n as f64)).sqrt()
}

/// Asymptotic RMSE of the accumulating single-probe baseline: per round one
/// probe collects all `N` position shifts before a single `X` read (mean
/// `N·x̄`, variance 1/2) and a second probe does the same for `P`, giving
/// mean-estimate variances `1/(2νN²)` and the product RMSE
/// `√(x̄²+p̄²)/(N√(2ν))` — the `1/N` scaling. Also the Gaussian Cramér–Rao
/// bound of that readout.
pub fn sequential_rmse(x_bar: f64, p_bar: f64, n: usize, nu: u64) -> f64 {
    assert!(n >= 1 && nu >= 1);
    ((x_bar * x_bar + p_bar * p_bar) / (2.0 * nu as f64)).sqrt() / n as f64
}

/// Analytic inputs for a bound evaluation, bundling what the comparison
/// table needs. `energy` is the probe energy (≥ 1/2, vacuum = 1/2);
/// `z_max` caps the magnitude of any single displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub n: usize,
    pub nu: u64,
    pub energy: f64,
    pub x_bar: f64,
    pub p_bar: f64,
    pub z_max: f64,
}

impl BoundQuery {
    /// Build a query from uniform displacement ranges: the means are the
    /// range midpoints and `z_max` the largest endpoint magnitude.
    pub fn from_ranges(
        n: usize,
        nu: u64,
        energy: f64,
        x_range: (f64, f64),
        p_range: (f64, f64),
    ) -> Self {
        let z_max = x_range
            .0
            .abs()
            .max(x_range.1.abs())
            .max(p_range.0.abs())
            .max(p_range.1.abs());
        Self {
            n,
            nu,
            energy,
            x_bar: 0.5 * (x_range.0 + x_range.1),
            p_bar: 0.5 * (p_range.0 + p_range.1),
            z_max,
        }
    }

    pub fn single_displacement_crb(&self) -> f64 {
        single_displacement_crb(self.energy, self.nu)
    }

    pub fn switch_rmse_control(&self) -> f64 {
        switch_rmse_control(self.n, self.nu)
    }

    pub fn switch_rmse_joint(&self) -> f64 {
        switch_rmse_joint(self.x_bar, self.p_bar, self.n, self.nu)
    }

    pub fn fixed_order_bound(&self) -> f64 {
        fixed_order_bound(self.x_bar, self.p_bar, self.energy, self.n, self.nu)
    }

    pub fn superposition_bound(&self, energy_budget: f64) -> f64 {
        superposition_bound(self.p_bar, self.n, self.nu, self.z_max, energy_budget)
    }

    pub fn ion_trap_rmse(&self) -> f64 {
        ion_trap_rmse(self.n, self.nu)
    }
}

/// One line of the advantage-region comparison: all RMSE values at a common
/// displacement mean `z̄ = x̄ = p̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub z_bar: f64,
    pub switch_joint: f64,
    pub switch_control: f64,
    pub fixed_order: f64,
}

/// Evaluate the three headline curves over a grid of common means. The
/// fixed-order floor crosses the control-only value at `z̄* = √(8E)/N`;
/// below that the superposed-order schemes win.
pub fn comparison_rows(n: usize, nu: u64, energy: f64, grid: &[f64]) -> Vec<ComparisonRow> {
    grid.iter()
        .map(|&z_bar| ComparisonRow {
            z_bar,
            switch_joint: switch_rmse_joint(z_bar, z_bar, n, nu),
            switch_control: switch_rmse_control(n, nu),
            fixed_order: fixed_order_bound(z_bar, z_bar, energy, n, nu),
        })
        .collect()
}

/// The mean `z̄* = √(8E)/N` where the fixed-order floor meets the
/// control-only RMSE.
pub fn crossover_mean(energy: f64, n: usize) -> f64 {
    (8.0 * energy).sqrt() / n as f64
}

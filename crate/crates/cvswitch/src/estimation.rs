//! Estimators and information quantities for the product-of-means task:
//! per-scheme maximum likelihood, Fisher information (scalar and 2×2),
//! Cramér–Rao bounds, Monte Carlo RMSE measurement, and scaling-exponent
//! fits.
//!
//! Readout models. Control-only interference gives counts with
//! `p(+) = (1 + cos(N²A))/2`, whose per-shot Fisher information about `A`
//! works out to the constant `N⁴` on the open window — evaluated here as an
//! actual score sum, not asserted. The joint control + heterodyne readout
//! factorizes into those counts times a Gaussian of known unit covariance
//! centred on `μ = N(x̄ + ip̄)/√2`; in the parameters `(A, x̄)` (with
//! `p̄ = A/x̄`) its Fisher matrix has the closed form
//!
//! ```text
//! F = [[N⁴ + N²/x̄²,   −N²·p̄/x̄²     ],
//!      [−N²·p̄/x̄²,      N² + N²·p̄²/x̄²]]
//! ```
//!
//! with `(F⁻¹)₁₁ = (x̄²+p̄²)/(N⁴(x̄²+p̄²)+N²)` — the square of the joint
//! readout's shot-normalized RMSE. A 2D Gauss–Hermite quadrature version
//! ([`fisher_joint_numeric`]) recomputes the same matrix from
//! finite-difference scores as an independent check.
//!
//! Estimation windows. A cosine readout identifies its phase only on one
//! monotonic branch, so control-only estimates live in `A ∈ [0, π/N²]`
//! (half that for the doubled-phase echo) and Monte Carlo comparisons
//! against the Cramér–Rao bound are meaningful at interior parameters;
//! near the window edges the clamped estimator is boundary-biased.

use rand::Rng;
use rayon::prelude::*;
use std::sync::OnceLock;
use thiserror::Error;

use crate::rng::stream;
use crate::schemes::{
    ProblemInstance, SchemeOutcomes, SchemeTag, run_beta_probe, run_ion_trap, run_parallel,
    run_sequential, run_switch_control, run_switch_joint,
};

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;
const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Error)]
pub enum EstimationError {
    #[error("window [{lo}, {hi}] is invalid: need 0 ≤ lo < hi ≤ {max} (one cosine branch)")]
    InvalidWindow { lo: f64, hi: f64, max: f64 },
    #[error(
        "counts ({n_plus}, {n_minus}) are one-sided and pin the estimate to a cosine \
         extremum outside the window"
    )]
    DegenerateCounts { n_plus: u64, n_minus: u64 },
    #[error("likelihood refinement left the parameter window (x̄ pinned at {x_bar_hat:.6})")]
    OptimizationDiverged { x_bar_hat: f64 },
    #[error("joint parameterization (A, x̄) is singular at x̄ = 0")]
    SingularParameterization,
    #[error("Fisher information must be positive definite (got {value:.3e})")]
    SingularFisher { value: f64 },
    #[error("log-log fit needs positive coordinates (got ({n}, {rmse}))")]
    NonPositiveInput { n: f64, rmse: f64 },
    #[error("scaling fit needs at least {needed} points (got {got})")]
    TooFewPoints { needed: usize, got: usize },
    #[error("need at least {needed} completed trials (got {got})")]
    TooFewTrials { needed: u64, got: u64 },
    #[error("scheme {0} does not estimate the displacement product; use its dedicated runner")]
    UnsupportedScheme(SchemeTag),
}

pub type EstimationResult<T> = Result<T, EstimationError>;

/// Compensated accumulator so reductions are insensitive to summation noise
/// regardless of how trials were scheduled.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

// ---------------------------------------------------------------------------
// Fisher information and Cramér–Rao bounds
// ---------------------------------------------------------------------------

/// Symmetric 2×2 Fisher matrix in the parameter order `(A, x̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherMatrix2 {
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
}

impl FisherMatrix2 {
    pub fn determinant(&self) -> f64 {
        self.f11 * self.f22 - self.f12 * self.f12
    }

    /// `(F⁻¹)₁₁ = f22/det` — the asymptotic variance of the first
    /// parameter per shot.
    pub fn inverse_11(&self) -> EstimationResult<f64> {
        let det = self.determinant();
        if !(det > 0.0) || !(self.f11 > 0.0) {
            return Err(EstimationError::SingularFisher { value: det });
        }
        Ok(self.f22 / det)
    }

    /// `√((F⁻¹)₁₁/ν)` — the matrix Cramér–Rao bound on the RMSE of the
    /// first parameter after ν shots.
    pub fn crb(&self, nu: u64) -> EstimationResult<f64> {
        assert!(nu >= 1);
        Ok((self.inverse_11()? / nu as f64).sqrt())
    }
}

/// Scalar Cramér–Rao bound `1/√(ν·F)`.
pub fn crb(fisher: f64, nu: u64) -> EstimationResult<f64> {
    assert!(nu >= 1);
    if !(fisher > 0.0) {
        return Err(EstimationError::SingularFisher { value: fisher });
    }
    Ok(1.0 / (nu as f64 * fisher).sqrt())
}

/// Per-shot Fisher information of the control-only readout about `A`,
/// computed as the score sum `Σ_m (∂p_m/∂A)²/p_m` over the two outcomes.
/// On the open window this evaluates to `N⁴` up to rounding; at the cosine
/// extrema, where the sum degenerates to 0/0, the interior limit `N⁴` is
/// returned. Near (but not at) an extremum the computed value is noisy at
/// the `ulp/p_min` level — the identity with `N⁴` is an interior statement.
pub fn fisher_control(a: f64, n: usize) -> f64 {
    assert!(n >= 1);
    let n2 = (n * n) as f64;
    let theta = n2 * a;
    let (sin, cos) = theta.sin_cos();
    let p_plus = (1.0 + cos) / 2.0;
    let p_minus = (1.0 - cos) / 2.0;
    if p_plus < 1e-12 || p_minus < 1e-12 {
        return n2 * n2;
    }
    let dp = n2 * sin / 2.0; // |∂p_±/∂A|
    dp * dp * (1.0 / p_plus + 1.0 / p_minus)
}

/// Closed-form joint Fisher matrix in `(A, x̄)` at `p̄ = A/x̄`.
pub fn fisher_joint(x_bar: f64, p_bar: f64, n: usize) -> EstimationResult<FisherMatrix2> {
    assert!(n >= 1);
    if x_bar == 0.0 {
        return Err(EstimationError::SingularParameterization);
    }
    let n2 = (n * n) as f64;
    let x2 = x_bar * x_bar;
    Ok(FisherMatrix2 {
        f11: n2 * n2 + n2 / x2,
        f12: -n2 * p_bar / x2,
        f22: n2 + n2 * p_bar * p_bar / x2,
    })
}

const HERMITE_ORDER: usize = 64;

/// Orthonormal-Hermite value and derivative of order `HERMITE_ORDER` at `t`,
/// plus the Christoffel sum `Σ_{k<order} h_k(t)²` used for the weights.
fn hermite_eval(t: f64) -> (f64, f64, f64) {
    let mut prev = 0.0f64;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    let mut christoffel = cur * cur;
    for k in 0..HERMITE_ORDER {
        let next = t * (2.0 / (k as f64 + 1.0)).sqrt() * cur
            - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if k + 1 < HERMITE_ORDER {
            christoffel += cur * cur;
        }
    }
    let derivative = (2.0 * HERMITE_ORDER as f64).sqrt() * prev;
    (cur, derivative, christoffel)
}

/// Nodes and weights of 64-point Gauss–Hermite quadrature
/// (`∫ f(t) e^{−t²} dt ≈ Σ w_i f(t_i)`), computed once: Newton's method on
/// the orthonormal recurrence from standard asymptotic initial guesses,
/// weights as inverse Christoffel sums.
fn hermite_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = HERMITE_ORDER;
        let nf = n as f64;
        let mut positive = Vec::with_capacity(n / 2);
        for i in 0..n / 2 {
            let mut t: f64 = match i {
                0 => {
                    let base = (2.0 * nf + 1.0).sqrt();
                    base - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0)
                }
                1 => {
                    let t1: f64 = positive[0];
                    t1 - 1.14 * nf.powf(0.426) / t1
                }
                2 => 1.86 * positive[1] - 0.86 * positive[0],
                3 => 1.91 * positive[2] - 0.91 * positive[1],
                _ => 2.0 * positive[i - 1] - positive[i - 2],
            };
            for _ in 0..100 {
                let (value, derivative, _) = hermite_eval(t);
                let step = value / derivative;
                t -= step;
                if step.abs() < 1e-15 * (1.0 + t.abs()) {
                    break;
                }
            }
            positive.push(t);
        }
        // `positive` descends from the outermost root; ascend through the
        // negatives first, then back out through the positives.
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &t in &positive {
            nodes.push(-t);
            weights.push(1.0 / hermite_eval(-t).2);
        }
        for &t in positive.iter().rev() {
            nodes.push(t);
            weights.push(1.0 / hermite_eval(t).2);
        }
        (nodes, weights)
    })
}

/// Log of the joint outcome density (up to its constant) at control outcome
/// `m = ±1` and heterodyne point `β = (br, bi)`, in the parameters `(A, x̄)`.
fn joint_log_density(m: f64, br: f64, bi: f64, a: f64, x_bar: f64, n2: f64) -> f64 {
    let count_part = (1.0 + m * (n2 * a).cos()).max(1e-300).ln();
    let mu_r = n2.sqrt() * x_bar / SQRT2;
    let mu_i = n2.sqrt() * (a / x_bar) / SQRT2;
    count_part - (mu_r - br) * (mu_r - br) - (mu_i - bi) * (mu_i - bi)
}

/// The joint Fisher matrix recomputed with no reference to the closed form:
/// 2D Gauss–Hermite quadrature over the heterodyne plane, summed over the
/// two control outcomes, with scores from central finite differences of the
/// log-density. The scores are linear in `β`, so the 64-point rule is exact
/// and the result should match [`fisher_joint`] to the finite-difference
/// accuracy (~1e−9 relative at interior phases).
pub fn fisher_joint_numeric(
    x_bar: f64,
    p_bar: f64,
    n: usize,
) -> EstimationResult<FisherMatrix2> {
    assert!(n >= 1);
    if x_bar == 0.0 {
        return Err(EstimationError::SingularParameterization);
    }
    let n2 = (n * n) as f64;
    let a = x_bar * p_bar;
    let mu_r = n2.sqrt() * x_bar / SQRT2;
    let mu_i = n2.sqrt() * p_bar / SQRT2;
    let h_a = 1e-5 * (1.0 + a.abs()) / n2; // keep the phase step small too
    let h_x = 1e-5 * (1.0 + x_bar.abs());

    let (nodes, weights) = hermite_rule();
    let (mut f11, mut f12, mut f22) = (Kahan::default(), Kahan::default(), Kahan::default());
    for m in [1.0, -1.0] {
        let weight_m = (1.0 + m * (n2 * a).cos()) / (2.0 * PI);
        for (&u, &wu) in nodes.iter().zip(weights) {
            for (&v, &wv) in nodes.iter().zip(weights) {
                let (br, bi) = (mu_r + u, mu_i + v);
                let score_a = (joint_log_density(m, br, bi, a + h_a, x_bar, n2)
                    - joint_log_density(m, br, bi, a - h_a, x_bar, n2))
                    / (2.0 * h_a);
                let score_x = (joint_log_density(m, br, bi, a, x_bar + h_x, n2)
                    - joint_log_density(m, br, bi, a, x_bar - h_x, n2))
                    / (2.0 * h_x);
                let w = weight_m * wu * wv;
                f11.add(w * score_a * score_a);
                f12.add(w * score_a * score_x);
                f22.add(w * score_x * score_x);
            }
        }
    }
    Ok(FisherMatrix2 { f11: f11.sum, f12: f12.sum, f22: f22.sum })
}

// ---------------------------------------------------------------------------
// Maximum-likelihood estimators
// ---------------------------------------------------------------------------

/// Identifiable window of the control-only readout: one cosine branch.
pub fn control_window(n: usize) -> (f64, f64) {
    (0.0, PI / ((n * n) as f64))
}

/// Identifiable window of the doubled-phase echo readout.
pub fn ion_trap_window(n: usize) -> (f64, f64) {
    (0.0, PI / (2.0 * (n * n) as f64))
}

fn validate_window(window: (f64, f64), max: f64) -> EstimationResult<()> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= max + 1e-15) {
        return Err(EstimationError::InvalidWindow { lo, hi, max });
    }
    Ok(())
}

/// Invert binomial counts through `p(+) = (1 + cos(scale·Â))/2` on the
/// principal branch, clamping into `window ⊆ [0, π/scale]`. One-sided
/// counts pin the raw estimate to a window edge; that is returned as-is
/// when the edge lies in the window and flagged as [`EstimationError::DegenerateCounts`]
/// when it does not (the data are then incompatible with the window).
fn arccos_mle(
    n_plus: u64,
    n_minus: u64,
    scale: f64,
    window: (f64, f64),
) -> EstimationResult<f64> {
    let nu = n_plus + n_minus;
    assert!(nu >= 1, "need at least one outcome");
    validate_window(window, PI / scale)?;
    let frequency = n_plus as f64 / nu as f64;
    let raw = (2.0 * frequency - 1.0).clamp(-1.0, 1.0).acos() / scale;
    if raw < window.0 || raw > window.1 {
        if n_plus == 0 || n_minus == 0 {
            return Err(EstimationError::DegenerateCounts { n_plus, n_minus });
        }
        return Ok(raw.clamp(window.0, window.1));
    }
    Ok(raw)
}

/// Maximum-likelihood estimate of `A` from control-only counts: exactly the
/// binomial MLE `arccos(2·n₊/ν − 1)/N²` on the principal branch, clamped
/// into `window ⊆ [0, π/N²]`.
pub fn mle_control(
    n_plus: u64,
    n_minus: u64,
    n: usize,
    window: (f64, f64),
) -> EstimationResult<f64> {
    arccos_mle(n_plus, n_minus, (n * n) as f64, window)
}

/// Maximum-likelihood estimate of `A` from echo counts: the same inversion
/// at the doubled phase, `window ⊆ [0, π/(2N²)]`.
pub fn mle_ion_trap(
    n_plus: u64,
    n_minus: u64,
    n: usize,
    window: (f64, f64),
) -> EstimationResult<f64> {
    arccos_mle(n_plus, n_minus, 2.0 * (n * n) as f64, window)
}

/// Search windows of the joint maximum-likelihood estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointWindows {
    pub a: (f64, f64),
    pub x_bar: (f64, f64),
}

impl JointWindows {
    /// Windows used by the Monte Carlo runner: the principal branch for `A`
    /// and a generous multiplicative bracket around the marginal heterodyne
    /// estimate of `x̄`, kept away from the `x̄ = 0` singularity.
    pub fn from_marginal(x_bar_marginal: f64, n: usize) -> Self {
        let magnitude = x_bar_marginal.abs().max(1e-4);
        let bracket = (magnitude / 64.0, magnitude * 64.0);
        let x_bar = if x_bar_marginal >= 0.0 {
            bracket
        } else {
            (-bracket.1, -bracket.0)
        };
        Self { a: control_window(n), x_bar }
    }
}

/// Golden-section extremum search (maximization) on a closed interval.
/// The interval tolerance is chosen by the caller so that the implied
/// likelihood tolerance (curvature × width²) is below its target.
fn golden_max(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if hi - lo < tol {
            break;
        }
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd { (c, fc) } else { (d, fd) }
}

/// Maximum-likelihood estimate of `(A, x̄)` from a joint run's outcomes.
///
/// The ν-round log-likelihood depends on the data only through the counts
/// and the heterodyne mean `β̄`:
///
/// ```text
/// ℓ(A, x̄) = n₊·ln p₊(A) + n₋·ln p₋(A) − (ν·N²/2)·[(x̄−u)² + (A/x̄−v)²]
/// ```
///
/// with `u = √2·Re β̄/N`, `v = √2·Im β̄/N`. `A` is searched on
/// `windows.a` by a coarse grid plus golden-section refinement (to ~1e−10
/// in log-likelihood), profiling `x̄` out by an inner golden section on
/// `windows.x_bar`; initialization comes from the closed-form marginals.
/// An `x̄` optimum pinned at its window edge means the window excludes the
/// likelihood maximum: the trial errors with
/// [`EstimationError::OptimizationDiverged`].
pub fn mle_joint(
    outcomes: &SchemeOutcomes,
    n: usize,
    windows: &JointWindows,
) -> EstimationResult<(f64, f64)> {
    let (n_plus, n_minus) = outcomes
        .control_counts
        .expect("joint estimation needs control counts");
    let heterodyne = outcomes
        .heterodyne
        .as_ref()
        .expect("joint estimation needs heterodyne outcomes");
    let nu = n_plus + n_minus;
    assert!(nu >= 2 && heterodyne.len() == nu as usize);
    let n2 = (n * n) as f64;
    validate_window(windows.a, PI / n2)?;
    let (xlo, xhi) = windows.x_bar;
    if !(xlo.is_finite() && xhi.is_finite() && xlo < xhi) || (xlo <= 0.0 && xhi >= 0.0) {
        return Err(EstimationError::InvalidWindow { lo: xlo, hi: xhi, max: f64::INFINITY });
    }

    let mut beta_mean = Kahan::default();
    let mut beta_mean_im = Kahan::default();
    for b in heterodyne {
        beta_mean.add(b.re);
        beta_mean_im.add(b.im);
    }
    let u = SQRT2 * (beta_mean.sum / nu as f64) / n as f64;
    let v = SQRT2 * (beta_mean_im.sum / nu as f64) / n as f64;

    let gauss_weight = nu as f64 * n2 / 2.0;
    let x_tol = 1e-11 * (1.0 + xhi.abs());
    // penalized profile over x̄ at fixed A: minimize (x̄−u)² + (A/x̄−v)²
    let profile = |a: f64| -> (f64, f64) {
        let g = |x: f64| {
            let dx = x - u;
            let dp = a / x - v;
            dx * dx + dp * dp
        };
        let (x_hat, neg_g) = golden_max(xlo, xhi, |x| -g(x), x_tol);
        (x_hat, -neg_g)
    };
    let log_likelihood = |a: f64| -> f64 {
        let cos = (n2 * a).cos();
        let counts = n_plus as f64 * ((1.0 + cos) / 2.0).max(1e-300).ln()
            + n_minus as f64 * ((1.0 - cos) / 2.0).max(1e-300).ln();
        counts - gauss_weight * profile(a).1
    };

    // coarse grid over the A window, then golden refinement of the best cell
    let (alo, ahi) = windows.a;
    let cells = 512usize;
    let step = (ahi - alo) / cells as f64;
    let mut best = (alo, f64::NEG_INFINITY);
    for i in 0..=cells {
        let a = alo + i as f64 * step;
        let value = log_likelihood(a);
        if value > best.1 {
            best = (a, value);
        }
    }
    let bracket = (
        (best.0 - step).max(alo),
        (best.0 + step).min(ahi),
    );
    // curvature ~ ν·N⁴ ⇒ width 1e−9·window keeps Δℓ far below 1e−10
    let a_tol = (1e-9 * (ahi - alo)).min(1e-13 / (nu as f64 * n2 * n2).sqrt().max(1.0));
    let (a_hat, _) = golden_max(bracket.0, bracket.1, log_likelihood, a_tol.max(1e-16));
    let (x_hat, _) = profile(a_hat);

    let edge = 1e-6 * (xhi - xlo);
    if (x_hat - xlo).abs() < edge || (x_hat - xhi).abs() < edge || !a_hat.is_finite() {
        return Err(EstimationError::OptimizationDiverged { x_bar_hat: x_hat });
    }
    Ok((a_hat, x_hat))
}

/// Estimate the commutator-correction strength from interference counts at
/// known total shifts `x`, `p`: invert the cosine onto the phase branch
/// nearest the uncorrected phase `x·p` (valid while the correction is well
/// inside one period), then solve `θ = xp(1 + (7/3)β̂p²)`.
pub fn mle_beta(n_plus: u64, n_minus: u64, x: f64, p: f64) -> EstimationResult<f64> {
    let nu = n_plus + n_minus;
    assert!(nu >= 1, "need at least one outcome");
    assert!(x * p != 0.0, "phase reference needs nonzero shifts");
    let reference = x * p;
    let base = (2.0 * (n_plus as f64 / nu as f64) - 1.0).clamp(-1.0, 1.0).acos();
    let k_center = (reference / TAU).round() as i64;
    let mut theta_hat = f64::NAN;
    let mut best = f64::INFINITY;
    for k in (k_center - 2)..=(k_center + 2) {
        for candidate in [k as f64 * TAU + base, k as f64 * TAU - base] {
            let distance = (candidate - reference).abs();
            if distance < best {
                best = distance;
                theta_hat = candidate;
            }
        }
    }
    Ok((theta_hat / reference - 1.0) * 3.0 / (7.0 * p * p))
}

// ---------------------------------------------------------------------------
// Monte Carlo RMSE measurement
// ---------------------------------------------------------------------------

/// Empirical performance of one scheme's estimator on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeResult {
    pub scheme_tag: SchemeTag,
    pub n: usize,
    pub nu: u64,
    pub trials: u64,
    /// Trials whose estimator errored (window divergence etc.); excluded
    /// from the statistics below.
    pub discarded: u64,
    pub rmse: f64,
    /// Jackknife standard error of the RMSE.
    pub rmse_std_error: f64,
    pub bias: f64,
    /// Standard error of the bias (sample std of the estimates / √trials).
    pub bias_std_error: f64,
}

fn summarize(
    scheme_tag: SchemeTag,
    n: usize,
    nu: u64,
    truth: f64,
    estimates: &[f64],
    discarded: u64,
) -> EstimationResult<SchemeResult> {
    let trials = estimates.len() as u64;
    if trials < 2 {
        return Err(EstimationError::TooFewTrials { needed: 2, got: trials });
    }
    let t = trials as f64;

    let mut sq = Kahan::default();
    let mut lin = Kahan::default();
    for &e in estimates {
        let d = e - truth;
        sq.add(d * d);
        lin.add(d);
    }
    let mean_sq = sq.sum / t;
    let rmse = mean_sq.sqrt();
    let bias = lin.sum / t;

    // jackknife over leave-one-out RMSEs
    let mut jk = Vec::with_capacity(estimates.len());
    let mut jk_mean = Kahan::default();
    for &e in estimates {
        let d = e - truth;
        let loo = ((sq.sum - d * d).max(0.0) / (t - 1.0)).sqrt();
        jk.push(loo);
        jk_mean.add(loo);
    }
    let jk_mean = jk_mean.sum / t;
    let mut jk_var = Kahan::default();
    for &loo in &jk {
        jk_var.add((loo - jk_mean) * (loo - jk_mean));
    }
    let rmse_std_error = ((t - 1.0) / t * jk_var.sum).sqrt();

    let mut var = Kahan::default();
    for &e in estimates {
        let d = e - truth - bias;
        var.add(d * d);
    }
    let bias_std_error = (var.sum / (t - 1.0) / t).sqrt();

    Ok(SchemeResult {
        scheme_tag,
        n,
        nu,
        trials,
        discarded,
        rmse,
        rmse_std_error,
        bias,
        bias_std_error,
    })
}

fn run_and_estimate<R: Rng + ?Sized>(
    scheme: SchemeTag,
    inst: &ProblemInstance,
    nu: u64,
    rng: &mut R,
) -> EstimationResult<f64> {
    let n = inst.n();
    match scheme {
        SchemeTag::Parallel => {
            let outcomes = run_parallel(inst, nu, rng);
            let homodyne = outcomes.homodyne.expect("parallel runs carry homodyne reads");
            let mut x_sum = Kahan::default();
            let mut p_sum = Kahan::default();
            for round in homodyne.chunks_exact(2 * n) {
                for &value in &round[..n] {
                    x_sum.add(value);
                }
                for &value in &round[n..] {
                    p_sum.add(value);
                }
            }
            let shots = (nu as usize * n) as f64;
            Ok((x_sum.sum / shots) * (p_sum.sum / shots))
        }
        SchemeTag::Sequential => {
            let outcomes = run_sequential(inst, nu, rng);
            let homodyne = outcomes.homodyne.expect("sequential runs carry homodyne reads");
            let mut x_sum = Kahan::default();
            let mut p_sum = Kahan::default();
            for pair in homodyne.chunks_exact(2) {
                x_sum.add(pair[0]);
                p_sum.add(pair[1]);
            }
            let scale = nu as f64 * n as f64;
            Ok((x_sum.sum / scale) * (p_sum.sum / scale))
        }
        SchemeTag::SwitchControl => {
            let outcomes = run_switch_control(inst, nu, rng);
            let (n_plus, n_minus) = outcomes.control_counts.expect("counts present");
            mle_control(n_plus, n_minus, n, control_window(n))
        }
        SchemeTag::SwitchJoint => {
            let outcomes = run_switch_joint(inst, nu, rng);
            let heterodyne = outcomes.heterodyne.as_ref().expect("heterodyne present");
            let mut re = Kahan::default();
            for b in heterodyne {
                re.add(b.re);
            }
            let marginal = SQRT2 * (re.sum / nu as f64) / n as f64;
            let windows = JointWindows::from_marginal(marginal, n);
            mle_joint(&outcomes, n, &windows).map(|(a_hat, _)| a_hat)
        }
        SchemeTag::IonTrap => {
            let outcomes = run_ion_trap(inst, nu, rng);
            let (n_plus, n_minus) = outcomes.control_counts.expect("counts present");
            mle_ion_trap(n_plus, n_minus, n, ion_trap_window(n))
        }
        SchemeTag::BetaProbe => Err(EstimationError::UnsupportedScheme(scheme)),
    }
}

/// Run `scheme` and its estimator `trials` times on the fixed hidden
/// instance, each trial on its own generator stream keyed by
/// `(scheme, batch size, trial)` — so sweeps over `n` draw independent
/// noise — and summarize the empirical RMSE about the true product `A`.
/// Trials run in parallel; results are reduced in trial order with
/// compensated sums, so the output is identical regardless of thread count.
pub fn monte_carlo_rmse(
    scheme: SchemeTag,
    inst: &ProblemInstance,
    nu: u64,
    trials: u64,
    seed: u64,
) -> EstimationResult<SchemeResult> {
    if trials < 2 {
        return Err(EstimationError::TooFewTrials { needed: 2, got: trials });
    }
    if scheme == SchemeTag::BetaProbe {
        return Err(EstimationError::UnsupportedScheme(scheme));
    }
    let truth = inst.product_mean();
    let outcomes: Vec<EstimationResult<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, &[scheme.id(), inst.n() as u64, trial]);
            run_and_estimate(scheme, inst, nu, &mut rng)
        })
        .collect();
    let mut estimates = Vec::with_capacity(outcomes.len());
    let mut discarded = 0u64;
    for outcome in outcomes {
        match outcome {
            Ok(estimate) => estimates.push(estimate),
            Err(_) => discarded += 1,
        }
    }
    summarize(scheme, inst.n(), nu, truth, &estimates, discarded)
}

/// Monte Carlo RMSE of the commutator-correction estimator at known total
/// shifts; the reported errors are about the true `β`.
pub fn monte_carlo_rmse_beta(
    x: f64,
    p: f64,
    beta_gup: f64,
    nu: u64,
    trials: u64,
    seed: u64,
) -> EstimationResult<SchemeResult> {
    if trials < 2 {
        return Err(EstimationError::TooFewTrials { needed: 2, got: trials });
    }
    let outcomes: Vec<EstimationResult<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, &[SchemeTag::BetaProbe.id(), 0, trial]);
            let run = run_beta_probe(x, p, beta_gup, nu, &mut rng);
            let (n_plus, n_minus) = run.control_counts.expect("counts present");
            mle_beta(n_plus, n_minus, x, p)
        })
        .collect();
    let mut estimates = Vec::with_capacity(outcomes.len());
    let mut discarded = 0u64;
    for outcome in outcomes {
        match outcome {
            Ok(estimate) => estimates.push(estimate),
            Err(_) => discarded += 1,
        }
    }
    summarize(SchemeTag::BetaProbe, 1, nu, beta_gup, &estimates, discarded)
}

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

/// Ordinary least squares on `(ln n, ln rmse)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit the scaling exponent of RMSE against batch size: OLS in log-log.
pub fn scaling_fit(points: &[(f64, f64)]) -> EstimationResult<ScalingFit> {
    if points.len() < 3 {
        return Err(EstimationError::TooFewPoints { needed: 3, got: points.len() });
    }
    for &(n, rmse) in points {
        if !(n > 0.0 && rmse > 0.0) {
            return Err(EstimationError::NonPositiveInput { n, rmse });
        }
    }
    let m = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) =
        (Kahan::default(), Kahan::default(), Kahan::default(), Kahan::default(), Kahan::default());
    for &(n, rmse) in points {
        let (x, y) = (n.ln(), rmse.ln());
        sx.add(x);
        sy.add(y);
        sxx.add(x * x);
        sxy.add(x * y);
        syy.add(y * y);
    }
    let cov = m * sxy.sum - sx.sum * sy.sum;
    let var_x = m * sxx.sum - sx.sum * sx.sum;
    let var_y = m * syy.sum - sy.sum * sy.sum;
    let slope = cov / var_x;
    let intercept = (sy.sum - slope * sx.sum) / m;
    let r_squared = if var_y == 0.0 { 1.0 } else { cov * cov / (var_x * var_y) };
    Ok(ScalingFit { slope, intercept, r_squared })
}

//! The probing strategies under comparison, each mapping a hidden problem
//! instance and a seeded generator to raw measurement outcomes.
//!
//! The hidden instance is a batch of `2N` displacement boxes — `N` position
//! shifts `x_j` and `N` momentum shifts `p_j` — and the estimation target is
//! the product of group means `A = x̄·p̄`. Six strategies are simulated:
//!
//! * **parallel** — every box probed by its own vacuum mode, homodyned on
//!   the quadrature the box displaces; `2N` reads per round;
//! * **sequential** — one probe rides through all position boxes (then
//!   homodyne `X`), a second through all momentum boxes (homodyne `P`);
//! * **switch_control** — the boxes act in a order controlled by a qubit in
//!   `|+⟩`: block order `x…xp…p` against `p…px…x`. The branches differ by
//!   the pure phase `N²A`, read out as `p(+) = (1 + cos N²A)/2` on the
//!   control;
//! * **switch_joint** — same interference, plus a heterodyne read of the
//!   probe, whose outcome is centred on the net displacement
//!   `N(x̄+ip̄)/√2` and is independent of the control outcome;
//! * **ion_trap** — the echo realization: conditional position kicks
//!   forward, momentum kicks, conditional position kicks back, yielding the
//!   doubled phase `2N²A`;
//! * **beta_probe** — the modified-commutator diagnostic: a single
//!   `x`/`p` interference pair whose phase picks up the first-order
//!   correction `xp(1 + (7/3)·β·p²)`.
//!
//! Interference probabilities are never hard-coded cosines of an assumed
//! phase: each run builds its two-branch word and asks
//! [`crate::weyl::switch_phase`] for the phase, so the displacement algebra
//! is on the hook for every probability — and the Fock-space oracle checks
//! it at small `N`.
//!
//! Control-only readout identifies `A` only within `(0, π/N²)` (one cosine
//! branch); estimator-side branch handling lives in [`crate::estimation`].

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::cv_state::{CoherentState, Quadrature};
use crate::weyl::{ControlledWord, Displacement, DisplacementWord, normalize, switch_word};

#[derive(Debug, Clone, Error)]
pub enum SchemeError {
    #[error("need at least one box per group (got n = 0)")]
    EmptyInstance,
    #[error("invalid displacement range [{min}, {max}]: bounds must be finite with min ≤ max")]
    InvalidRange { min: f64, max: f64 },
    #[error("position and momentum lists must have equal length (got {xs} and {ps})")]
    UnequalLists { xs: usize, ps: usize },
}

/// Which strategy produced a batch of outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeTag {
    Parallel,
    Sequential,
    SwitchControl,
    SwitchJoint,
    IonTrap,
    BetaProbe,
}

impl SchemeTag {
    pub const ALL: [SchemeTag; 6] = [
        SchemeTag::Parallel,
        SchemeTag::Sequential,
        SchemeTag::SwitchControl,
        SchemeTag::SwitchJoint,
        SchemeTag::IonTrap,
        SchemeTag::BetaProbe,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeTag::Parallel => "parallel",
            SchemeTag::Sequential => "sequential",
            SchemeTag::SwitchControl => "switch_control",
            SchemeTag::SwitchJoint => "switch_joint",
            SchemeTag::IonTrap => "ion_trap",
            SchemeTag::BetaProbe => "beta_probe",
        }
    }

    /// Stable index used to key per-scheme generator stream families;
    /// changing these would silently change every seeded run.
    pub fn id(&self) -> u64 {
        match self {
            SchemeTag::Parallel => 0,
            SchemeTag::Sequential => 1,
            SchemeTag::SwitchControl => 2,
            SchemeTag::SwitchJoint => 3,
            SchemeTag::IonTrap => 4,
            SchemeTag::BetaProbe => 5,
        }
    }
}

impl std::fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One hidden batch of boxes: `N` position shifts and `N` momentum shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
}

impl ProblemInstance {
    /// Wrap explicit per-box shifts.
    pub fn from_lists(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self, SchemeError> {
        if xs.len() != ps.len() {
            return Err(SchemeError::UnequalLists { xs: xs.len(), ps: ps.len() });
        }
        if xs.is_empty() {
            return Err(SchemeError::EmptyInstance);
        }
        Ok(Self { xs, ps })
    }

    /// Draw each shift independently and uniformly from its group's range.
    pub fn uniform<R: Rng + ?Sized>(
        n: usize,
        x_range: (f64, f64),
        p_range: (f64, f64),
        rng: &mut R,
    ) -> Result<Self, SchemeError> {
        if n == 0 {
            return Err(SchemeError::EmptyInstance);
        }
        for (min, max) in [x_range, p_range] {
            if !(min.is_finite() && max.is_finite() && min <= max) {
                return Err(SchemeError::InvalidRange { min, max });
            }
        }
        let xs = (0..n).map(|_| rng.random_range(x_range.0..=x_range.1)).collect();
        let ps = (0..n).map(|_| rng.random_range(p_range.0..=p_range.1)).collect();
        Ok(Self { xs, ps })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn x_bar(&self) -> f64 {
        self.xs.iter().sum::<f64>() / self.xs.len() as f64
    }

    pub fn p_bar(&self) -> f64 {
        self.ps.iter().sum::<f64>() / self.ps.len() as f64
    }

    /// The estimation target `A = x̄·p̄`.
    pub fn product_mean(&self) -> f64 {
        self.x_bar() * self.p_bar()
    }

    /// True when either group mean vanishes — outcomes stay well-defined,
    /// but the joint Fisher analysis downstream becomes singular.
    pub fn has_zero_mean(&self) -> bool {
        self.x_bar() == 0.0 || self.p_bar() == 0.0
    }

    /// The two-block controlled word whose branch phase difference is
    /// `(Σx)(Σp) = N²A`.
    pub fn switch_word(&self) -> ControlledWord {
        switch_word(&self.xs, &self.ps)
    }
}

/// Raw outcomes of one scheme run of ν rounds. Which fields are present
/// depends on the scheme; lists are grouped round by round:
///
/// * `control_counts` — `(n_plus, n_minus)` summing to ν;
/// * `heterodyne` — one phase-space point per round (length ν);
/// * `homodyne` — parallel: per round the `N` position reads then the `N`
///   momentum reads (length `2Nν`); sequential: per round one `X` read of
///   the position probe then one `P` read of the momentum probe (length `2ν`).
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcomes {
    pub scheme_tag: SchemeTag,
    pub control_counts: Option<(u64, u64)>,
    pub heterodyne: Option<Vec<C64>>,
    pub homodyne: Option<Vec<f64>>,
}

fn binomial_counts<R: Rng + ?Sized>(nu: u64, p_plus: f64, rng: &mut R) -> (u64, u64) {
    let n_plus = Binomial::new(nu, p_plus)
        .expect("interference probability lies in [0,1]")
        .sample(rng);
    (n_plus, nu - n_plus)
}

/// `p(+)` of the two-block interference readout, from the word's phase.
pub fn switch_plus_probability(inst: &ProblemInstance) -> f64 {
    let phase = inst
        .switch_word()
        .switch_phase()
        .expect("block reorderings share the same net displacement");
    (1.0 + phase.cos()) / 2.0
}

/// The echo word: conditional position kicks forward (`|1⟩` branch kicked
/// backward), all momentum kicks unconditionally, then the position kicks
/// undone with the condition reversed. Both branches net to the total
/// momentum displacement alone, and the branch phases are `∓(Σx)(Σp)`, so
/// the phase difference is `+2N²A` — exactly twice the two-block word's.
pub fn ion_trap_word(xs: &[f64], ps: &[f64]) -> ControlledWord {
    let forward: Vec<Displacement> =
        xs.iter().rev().map(|&x| Displacement::position(x)).collect();
    let backward: Vec<Displacement> =
        xs.iter().rev().map(|&x| Displacement::position(-x)).collect();
    let kicks: Vec<Displacement> =
        ps.iter().rev().map(|&p| Displacement::momentum(p)).collect();

    let mut branch0 = forward.clone();
    branch0.extend(kicks.iter().copied());
    branch0.extend(backward.iter().copied());

    let mut branch1 = backward;
    branch1.extend(kicks);
    branch1.extend(forward);

    ControlledWord::new(DisplacementWord::new(branch0), DisplacementWord::new(branch1))
}

/// `p(+)` of the echo readout — doubled phase, same cosine form.
pub fn ion_trap_plus_probability(inst: &ProblemInstance) -> f64 {
    let phase = ion_trap_word(&inst.xs, &inst.ps)
        .switch_phase()
        .expect("echo branches cancel their position kicks");
    (1.0 + phase.cos()) / 2.0
}

/// Interference phase of the modified-commutator probe: a position/momentum
/// pair of total shifts `x`, `p` under `[X, P] = i(1 + β P²)` picks up
/// `x·p·(1 + (7/3)·β·p²)` to first order in `β`.
pub fn beta_probe_phase(x: f64, p: f64, beta_gup: f64) -> f64 {
    x * p * (1.0 + (7.0 / 3.0) * beta_gup * p * p)
}

/// Parallel strategy: per round, each box displaces its own vacuum probe,
/// read by homodyne on the displaced quadrature.
pub fn run_parallel<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    nu: u64,
    rng: &mut R,
) -> SchemeOutcomes {
    let n = inst.n();
    let mut homodyne = Vec::with_capacity(2 * n * nu as usize);
    for _ in 0..nu {
        for &x in &inst.xs {
            let probe = CoherentState::vacuum().displace(Displacement::position(x));
            homodyne.push(probe.sample_homodyne(Quadrature::X, rng));
        }
        for &p in &inst.ps {
            let probe = CoherentState::vacuum().displace(Displacement::momentum(p));
            homodyne.push(probe.sample_homodyne(Quadrature::P, rng));
        }
    }
    SchemeOutcomes {
        scheme_tag: SchemeTag::Parallel,
        control_counts: None,
        heterodyne: None,
        homodyne: Some(homodyne),
    }
}

/// Sequential strategy: one probe rides through every position box and is
/// homodyned on `X` (mean `N·x̄`); a second does the same for momentum.
pub fn run_sequential<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    nu: u64,
    rng: &mut R,
) -> SchemeOutcomes {
    // the accumulated probe states are the same every round
    let x_probe = inst
        .xs
        .iter()
        .fold(CoherentState::vacuum(), |s, &x| s.displace(Displacement::position(x)));
    let p_probe = inst
        .ps
        .iter()
        .fold(CoherentState::vacuum(), |s, &p| s.displace(Displacement::momentum(p)));
    let mut homodyne = Vec::with_capacity(2 * nu as usize);
    for _ in 0..nu {
        homodyne.push(x_probe.sample_homodyne(Quadrature::X, rng));
        homodyne.push(p_probe.sample_homodyne(Quadrature::P, rng));
    }
    SchemeOutcomes {
        scheme_tag: SchemeTag::Sequential,
        control_counts: None,
        heterodyne: None,
        homodyne: Some(homodyne),
    }
}

/// Order-superposition strategy, control readout only.
pub fn run_switch_control<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    nu: u64,
    rng: &mut R,
) -> SchemeOutcomes {
    let counts = binomial_counts(nu, switch_plus_probability(inst), rng);
    SchemeOutcomes {
        scheme_tag: SchemeTag::SwitchControl,
        control_counts: Some(counts),
        heterodyne: None,
        homodyne: None,
    }
}

/// Order-superposition strategy with the probe heterodyned as well. The
/// joint outcome density factorizes — the control outcome carries the phase,
/// the heterodyne point carries the net displacement — so the two parts are
/// sampled independently: counts first, then the ν phase-space points.
pub fn run_switch_joint<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    nu: u64,
    rng: &mut R,
) -> SchemeOutcomes {
    run_switch_joint_with_probe(CoherentState::vacuum(), inst, nu, rng)
}

/// [`run_switch_joint`] with a coherent (possibly non-vacuum) probe. The
/// control statistics are unchanged — both branches displace the probe by
/// the same net amount, so the extra phase a displaced input picks up
/// cancels between branches — but the heterodyne centre shifts by the input
/// amplitude. The joint Fisher analysis in [`crate::estimation`] assumes a
/// vacuum probe; treat non-vacuum runs as exploratory.
pub fn run_switch_joint_with_probe<R: Rng + ?Sized>(
    probe: CoherentState,
    inst: &ProblemInstance,
    nu: u64,
    rng: &mut R,
) -> SchemeOutcomes {
    let word = inst.switch_word();
    let counts = binomial_counts(nu, switch_plus_probability(inst), rng);
    let out_state = probe.displace(Displacement::new(normalize(&word.branch0).total_alpha));
    let heterodyne = (0..nu).map(|_| out_state.sample_heterodyne(rng).beta).collect();
    SchemeOutcomes {
        scheme_tag: SchemeTag::SwitchJoint,
        control_counts: Some(counts),
        heterodyne: Some(heterodyne),
        homodyne: None,
    }
}

/// Echo strategy: doubled interference phase, control readout.
pub fn run_ion_trap<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    nu: u64,
    rng: &mut R,
) -> SchemeOutcomes {
    let counts = binomial_counts(nu, ion_trap_plus_probability(inst), rng);
    SchemeOutcomes {
        scheme_tag: SchemeTag::IonTrap,
        control_counts: Some(counts),
        heterodyne: None,
        homodyne: None,
    }
}

/// Modified-commutator probe: interference counts at the `β`-corrected
/// phase. `x` and `p` are the *total* shifts (callers scaling a batch pass
/// `N·x̄`, `N·p̄`).
pub fn run_beta_probe<R: Rng + ?Sized>(
    x: f64,
    p: f64,
    beta_gup: f64,
    nu: u64,
    rng: &mut R,
) -> SchemeOutcomes {
    let phase = beta_probe_phase(x, p, beta_gup);
    let counts = binomial_counts(nu, (1.0 + phase.cos()) / 2.0, rng);
    SchemeOutcomes {
        scheme_tag: SchemeTag::BetaProbe,
        control_counts: Some(counts),
        heterodyne: None,
        homodyne: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::weyl::switch_phase;

    fn flat_instance(n: usize, x: f64, p: f64) -> ProblemInstance {
        ProblemInstance::from_lists(vec![x; n], vec![p; n]).unwrap()
    }

    #[test]
    fn instance_arithmetic() {
        let inst = ProblemInstance::from_lists(vec![0.2, 0.4], vec![0.1, 0.5]).unwrap();
        assert!((inst.x_bar() - 0.3).abs() < 1e-15);
        assert!((inst.p_bar() - 0.3).abs() < 1e-15);
        assert!((inst.product_mean() - 0.09).abs() < 1e-15);
        assert!(!inst.has_zero_mean());
        assert!(flat_instance(3, 0.0, 0.4).has_zero_mean());
    }

    #[test]
    fn instance_validation() {
        assert!(matches!(
            ProblemInstance::from_lists(vec![], vec![]),
            Err(SchemeError::EmptyInstance)
        ));
        assert!(matches!(
            ProblemInstance::from_lists(vec![0.1], vec![0.1, 0.2]),
            Err(SchemeError::UnequalLists { xs: 1, ps: 2 })
        ));
        let mut rng = stream(1, &[0]);
        assert!(matches!(
            ProblemInstance::uniform(0, (0.0, 1.0), (0.0, 1.0), &mut rng),
            Err(SchemeError::EmptyInstance)
        ));
        assert!(matches!(
            ProblemInstance::uniform(3, (0.5, 0.1), (0.0, 1.0), &mut rng),
            Err(SchemeError::InvalidRange { .. })
        ));
    }

    #[test]
    fn uniform_draws_concentrate_on_midpoint() {
        let mut rng = stream(2, &[0]);
        let inst = ProblemInstance::uniform(10_000, (0.1, 0.5), (-0.3, 0.1), &mut rng).unwrap();
        // σ of the mean = (range/√12)/√n ≈ 0.00115; allow 4σ
        assert!((inst.x_bar() - 0.3).abs() < 0.005);
        assert!((inst.p_bar() + 0.1).abs() < 0.005);
        for &x in &inst.xs {
            assert!((0.1..=0.5).contains(&x));
        }
    }

    #[test]
    fn parallel_outcomes_track_their_boxes() {
        let inst = ProblemInstance::from_lists(vec![0.8], vec![0.3]).unwrap();
        let nu = 100_000u64;
        let mut rng = stream(3, &[0]);
        let out = run_parallel(&inst, nu, &mut rng);
        let homodyne = out.homodyne.unwrap();
        assert_eq!(homodyne.len(), 2 * nu as usize);
        let x_mean: f64 =
            homodyne.iter().step_by(2).sum::<f64>() / nu as f64;
        let p_mean: f64 =
            homodyne.iter().skip(1).step_by(2).sum::<f64>() / nu as f64;
        assert!((x_mean - 0.8).abs() < 0.01, "x_mean = {x_mean}");
        assert!((p_mean - 0.3).abs() < 0.01, "p_mean = {p_mean}");
    }

    #[test]
    fn sequential_probe_accumulates_the_group_total() {
        let inst = flat_instance(5, 0.4, -0.2);
        let nu = 100_000u64;
        let mut rng = stream(4, &[0]);
        let out = run_sequential(&inst, nu, &mut rng);
        let homodyne = out.homodyne.unwrap();
        assert_eq!(homodyne.len(), 2 * nu as usize);
        let xr: Vec<f64> = homodyne.iter().step_by(2).copied().collect();
        let x_mean = xr.iter().sum::<f64>() / xr.len() as f64;
        let x_var =
            xr.iter().map(|v| (v - x_mean) * (v - x_mean)).sum::<f64>() / (xr.len() - 1) as f64;
        assert!((x_mean - 2.0).abs() < 0.01, "x_mean = {x_mean}");
        assert!((x_var - 0.5).abs() < 0.02, "x_var = {x_var}");
        let p_mean = homodyne.iter().skip(1).step_by(2).sum::<f64>() / nu as f64;
        assert!((p_mean + 1.0).abs() < 0.01, "p_mean = {p_mean}");
    }

    #[test]
    fn control_probability_comes_from_the_word() {
        // N=2, x̄=0.5, p̄=0.3: phase 4·0.15 = 0.6
        let inst = flat_instance(2, 0.5, 0.3);
        let p = switch_plus_probability(&inst);
        assert!((p - (1.0 + 0.6f64.cos()) / 2.0).abs() < 1e-12);
        assert!((p - 0.91267).abs() < 5e-6);
        // quarter period: N²A = π/2
        let quarter = ProblemInstance::from_lists(
            vec![std::f64::consts::FRAC_PI_2],
            vec![1.0],
        )
        .unwrap();
        assert!((switch_plus_probability(&quarter) - 0.5).abs() < 1e-12);
        // zero instance: interference never flips
        assert_eq!(switch_plus_probability(&flat_instance(3, 0.0, 0.4)), 1.0);
    }

    #[test]
    fn control_counts_match_their_probability() {
        let inst = flat_instance(2, 0.5, 0.3);
        let nu = 10_000u64;
        let mut rng = stream(5, &[0]);
        let out = run_switch_control(&inst, nu, &mut rng);
        let (n_plus, n_minus) = out.control_counts.unwrap();
        assert_eq!(n_plus + n_minus, nu);
        let p = switch_plus_probability(&inst);
        let sigma = (p * (1.0 - p) / nu as f64).sqrt();
        let freq = n_plus as f64 / nu as f64;
        assert!((freq - p).abs() < 3.0 * sigma, "freq = {freq}, p = {p}");

        let zero = flat_instance(3, 0.0, 0.4);
        let out = run_switch_control(&zero, 500, &mut rng);
        assert_eq!(out.control_counts.unwrap(), (500, 0));
    }

    #[test]
    fn joint_heterodyne_centres_on_the_net_displacement() {
        let inst = flat_instance(5, 0.2, 0.2);
        let nu = 100_000u64;
        let mut rng = stream(6, &[0]);
        let out = run_switch_joint(&inst, nu, &mut rng);
        let samples = out.heterodyne.unwrap();
        assert_eq!(samples.len(), nu as usize);
        let mean = samples.iter().sum::<C64>() / C64::new(nu as f64, 0.0);
        let expect = std::f64::consts::FRAC_1_SQRT_2;
        assert!((mean.re - expect).abs() < 0.01);
        assert!((mean.im - expect).abs() < 0.01);
        let (n_plus, n_minus) = out.control_counts.unwrap();
        assert_eq!(n_plus + n_minus, nu);
    }

    #[test]
    fn joint_control_marginal_agrees_with_control_only() {
        let inst = flat_instance(2, 0.5, 0.3);
        let nu = 10_000u64;
        let f_joint = run_switch_joint(&inst, nu, &mut stream(7, &[0]))
            .control_counts
            .unwrap()
            .0 as f64
            / nu as f64;
        let f_ctrl = run_switch_control(&inst, nu, &mut stream(7, &[1]))
            .control_counts
            .unwrap()
            .0 as f64
            / nu as f64;
        let p = switch_plus_probability(&inst);
        let sigma_diff = (2.0 * p * (1.0 - p) / nu as f64).sqrt();
        assert!((f_joint - f_ctrl).abs() < 2.58 * sigma_diff);
    }

    #[test]
    fn displaced_probe_shifts_the_centre_not_the_counts() {
        let inst = flat_instance(3, 0.3, 0.2);
        let nu = 50_000u64;
        let probe = CoherentState::new(C64::new(1.0, -0.5));
        let out = run_switch_joint_with_probe(probe, &inst, nu, &mut stream(8, &[0]));
        let samples = out.heterodyne.unwrap();
        let mean = samples.iter().sum::<C64>() / C64::new(nu as f64, 0.0);
        let expect = probe.alpha + normalize(&inst.switch_word().branch0).total_alpha;
        assert!((mean - expect).norm() < 0.02);
    }

    #[test]
    fn echo_word_doubles_the_phase_exactly() {
        let mut rng = stream(9, &[0]);
        for _ in 0..100 {
            let n = rng.random_range(1..=5);
            let inst =
                ProblemInstance::uniform(n, (-0.8, 0.8), (-0.8, 0.8), &mut rng).unwrap();
            let single = inst.switch_word().switch_phase().unwrap();
            let word = ion_trap_word(&inst.xs, &inst.ps);
            let doubled = word.switch_phase().unwrap();
            assert!(
                (doubled - 2.0 * single).abs() < 1e-12 * (1.0 + single.abs()),
                "doubled = {doubled}, single = {single}"
            );
            // net displacement is the momentum total on both branches
            let nf = normalize(&word.branch0);
            let p_total: f64 = inst.ps.iter().sum();
            assert!(nf.total_alpha.re.abs() < 1e-12);
            assert!(
                (nf.total_alpha.im - p_total / std::f64::consts::SQRT_2).abs() < 1e-12
            );
        }
    }

    #[test]
    fn echo_quarter_period_darkens_the_plus_port() {
        // N²A = π/2 ⇒ echo phase π ⇒ p(+) = 0
        let inst = ProblemInstance::from_lists(
            vec![std::f64::consts::FRAC_PI_2],
            vec![1.0],
        )
        .unwrap();
        assert!(ion_trap_plus_probability(&inst) < 1e-12);
        let out = run_ion_trap(&inst, 1000, &mut stream(10, &[0]));
        assert_eq!(out.control_counts.unwrap().0, 0);
    }

    #[test]
    fn beta_phase_model() {
        assert!((beta_probe_phase(2.0, 2.0, 0.01) - 4.373333333333333).abs() < 1e-12);
        // β = 0 reduces to the plain product phase
        let inst = flat_instance(1, 0.7, 0.4);
        let plain = switch_phase(&inst.switch_word().branch0, &inst.switch_word().branch1)
            .unwrap();
        assert!((beta_probe_phase(0.7, 0.4, 0.0) - plain).abs() < 1e-15);
    }

    #[test]
    fn beta_counts_follow_the_corrected_phase() {
        let (x, p, beta) = (2.0, 2.0, 0.01);
        let nu = 20_000u64;
        let out = run_beta_probe(x, p, beta, nu, &mut stream(11, &[0]));
        let (n_plus, n_minus) = out.control_counts.unwrap();
        assert_eq!(n_plus + n_minus, nu);
        let prob = (1.0 + beta_probe_phase(x, p, beta).cos()) / 2.0;
        let sigma = (prob * (1.0 - prob) / nu as f64).sqrt();
        assert!((n_plus as f64 / nu as f64 - prob).abs() < 3.0 * sigma);
    }
}

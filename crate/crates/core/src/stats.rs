//! Gaussian observation models of classical and quantum-augmented probes, their
//! KL divergences and the quantum speedup ratios.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::Float;
use thiserror::Error;

use crate::network::{EdgeId, Network, NetworkError, Probe};
use crate::scalar::{in_open_unit, Real};

/// Largest `eta_d` accepted by the speedup ratios; above it the ratio is 0/0
/// to working precision.
pub const MAX_RATIO_DROP: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("{name} = {value} is invalid: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("operation requires {expected} probe parameters")]
    WrongKind { expected: ProbeKind },
    #[error("degenerate drop: eta_d = {0} is too close to 1 for a speedup ratio")]
    DegenerateDrop(f64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(&'static str),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("edge {0} is not covered by any probe")]
    UncoveredEdge(EdgeId),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProbeKind {
    Classical,
    Quantum,
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeKind::Classical => "classical",
            ProbeKind::Quantum => "quantum",
        })
    }
}

impl FromStr for ProbeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classical" => Ok(ProbeKind::Classical),
            "quantum" => Ok(ProbeKind::Quantum),
            other => Err(format!(
                "unknown probe family `{other}` (expected classical or quantum)"
            )),
        }
    }
}

fn invalid(name: &'static str, value: impl Real, expected: &'static str) -> StatsError {
    StatsError::InvalidParameter {
        name,
        value: value.as_f64(),
        expected,
    }
}

fn check_eta<T: Real>(eta: T) -> Result<(), StatsError> {
    if in_open_unit(eta) {
        Ok(())
    } else {
        Err(invalid("eta", eta, "a value in (0,1)"))
    }
}

fn check_drop<T: Real>(eta_d: T) -> Result<(), StatsError> {
    if eta_d > T::zero() && eta_d <= T::one() {
        Ok(())
    } else {
        Err(invalid("eta_d", eta_d, "a value in (0,1]"))
    }
}

fn check_ratio_drop<T: Real>(eta_d: T) -> Result<(), StatsError> {
    check_drop(eta_d)?;
    if eta_d > T::lit(MAX_RATIO_DROP) {
        return Err(StatsError::DegenerateDrop(eta_d.as_f64()));
    }
    Ok(())
}

/// `N_a = sinh²(r)` for a squeezed probe with `e^{-2r} = 10^{-db/10}`.
pub fn squeeze_db_to_na<T: Real>(db: T) -> T {
    let r = db * T::LN_10() / T::lit(20.0);
    let s = r.sinh();
    s * s
}

/// `c = 2√x / (√(x+1) + √x)` with `x = n·N_a`, i.e. `1 − e^{-2s}`.
pub fn squeeze_factor<T: Real>(n_times_na: T) -> T {
    let r = n_times_na.sqrt();
    T::lit(2.0) * r / ((n_times_na + T::one()).sqrt() + r)
}

/// Physical knobs of one probe family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeParams<T> {
    /// Mean signal photon number per pulse, `N`.
    pub n_signal: T,
    /// Augmentation photon number, `N_a`.
    pub n_aug: T,
    /// Block size `n` (1 for a squeezed probe, always 1 for classical).
    pub block: usize,
    pub kind: ProbeKind,
}

impl<T: Real> ProbeParams<T> {
    pub fn quantum(n_signal: T, n_aug: T, block: usize) -> Result<Self, StatsError> {
        Self::validate(n_signal, n_aug, block)?;
        Ok(Self {
            n_signal,
            n_aug,
            block,
            kind: ProbeKind::Quantum,
        })
    }

    /// Coherent-state benchmark with `α² = N + N_a`.
    pub fn classical(n_signal: T, n_aug: T) -> Result<Self, StatsError> {
        Self::validate(n_signal, n_aug, 1)?;
        Ok(Self {
            n_signal,
            n_aug,
            block: 1,
            kind: ProbeKind::Classical,
        })
    }

    pub fn of_kind(
        kind: ProbeKind,
        n_signal: T,
        n_aug: T,
        block: usize,
    ) -> Result<Self, StatsError> {
        match kind {
            ProbeKind::Quantum => Self::quantum(n_signal, n_aug, block),
            ProbeKind::Classical => Self::classical(n_signal, n_aug),
        }
    }

    /// Squeezed (`n = 1`) probe from a squeezing level in dB.
    pub fn from_squeeze_db(n_signal: T, db: T) -> Result<Self, StatsError> {
        if !(db > T::zero()) {
            return Err(invalid("squeeze_db", db, "a positive value"));
        }
        Self::quantum(n_signal, squeeze_db_to_na(db), 1)
    }

    fn validate(n_signal: T, n_aug: T, block: usize) -> Result<(), StatsError> {
        if !(n_signal > T::zero()) || !n_signal.is_finite() {
            return Err(invalid("N", n_signal, "a positive finite value"));
        }
        if !(n_aug > T::zero()) || !n_aug.is_finite() {
            return Err(invalid("N_a", n_aug, "a positive finite value"));
        }
        if block == 0 {
            return Err(invalid("n", T::zero(), "a positive integer"));
        }
        Ok(())
    }

    /// The classical family sharing this family's photon budget.
    pub fn classical_comparator(&self) -> Self {
        Self {
            block: 1,
            kind: ProbeKind::Classical,
            ..*self
        }
    }

    pub fn block_t(&self) -> T {
        T::from_count(self.block)
    }

    /// `α²`: `N + N_a` for classical probes, `N` for quantum ones.
    pub fn alpha_sq(&self) -> T {
        match self.kind {
            ProbeKind::Classical => self.n_signal + self.n_aug,
            ProbeKind::Quantum => self.n_signal,
        }
    }

    pub fn alpha(&self) -> T {
        self.alpha_sq().sqrt()
    }

    /// Squeezing parameter `s` with `sinh²(s) = n·N_a`.
    pub fn squeeze(&self) -> T {
        (self.block_t() * self.n_aug).sqrt().asinh()
    }

    /// `c_n = 1 − e^{-2s}`; zero for classical probes.
    pub fn c_n(&self) -> T {
        match self.kind {
            ProbeKind::Classical => T::zero(),
            ProbeKind::Quantum => squeeze_factor(self.block_t() * self.n_aug),
        }
    }

    fn require(&self, kind: ProbeKind) -> Result<(), StatsError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(StatsError::WrongKind { expected: kind })
        }
    }
}

/// Pre-change and post-change transmissivity of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCondition<T> {
    pub eta0: T,
    pub eta1: T,
}

impl<T: Real> ChannelCondition<T> {
    pub fn new(eta0: T, eta1: T) -> Result<Self, StatsError> {
        check_eta(eta0)?;
        if !(eta1 > T::zero() && eta1 <= eta0) {
            return Err(invalid("eta1", eta1, "a value in (0, eta0]"));
        }
        Ok(Self { eta0, eta1 })
    }

    /// Drop `eta_d` applied `traversals` times.
    pub fn with_drop(eta: T, eta_d: T, traversals: u32) -> Result<Self, StatsError> {
        check_drop(eta_d)?;
        Self::new(eta, eta * eta_d.powi(traversals as i32))
    }

    /// Effective drop factor `eta1 / eta0`.
    pub fn drop(&self) -> T {
        self.eta1 / self.eta0
    }
}

/// `N(m·u, ¼I + ρJ)` in `n` dimensions. `ρ = −η·c_n/(4n) ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsModel<T> {
    pub dim: usize,
    /// Common value of every mean component.
    pub mean: T,
    /// Off-diagonal covariance entry.
    pub rho: T,
}

impl<T: Real> ObsModel<T> {
    pub fn base() -> T {
        T::lit(0.25)
    }

    /// Observation model of a probe family over a channel with transmissivity `eta`.
    pub fn new(params: &ProbeParams<T>, eta: T) -> Result<Self, StatsError> {
        check_eta(eta)?;
        let n = params.block_t();
        Ok(Self {
            dim: params.block,
            mean: eta.sqrt() * params.alpha(),
            rho: -eta * params.c_n() / (T::lit(4.0) * n),
        })
    }

    pub fn pair(
        params: &ProbeParams<T>,
        channel: ChannelCondition<T>,
    ) -> Result<(Self, Self), StatsError> {
        Ok((
            Self::new(params, channel.eta0)?,
            Self::new(params, channel.eta1)?,
        ))
    }

    /// Diagonal covariance entry `¼ + ρ`.
    pub fn diag(&self) -> T {
        Self::base() + self.rho
    }

    /// Eigenvalue along the all-ones direction, `¼ + nρ`.
    pub fn ones_eigenvalue(&self) -> T {
        Self::base() + T::from_count(self.dim) * self.rho
    }

    pub fn det(&self) -> T {
        Self::base().powi(self.dim as i32 - 1) * self.ones_eigenvalue()
    }

    pub fn ln_det(&self) -> T {
        T::from_count(self.dim - 1) * Self::base().ln() + self.ones_eigenvalue().ln()
    }

    /// `(a, b)` with `Σ⁻¹ = a·I + b·J`.
    pub fn inverse_coeffs(&self) -> (T, T) {
        let base = Self::base();
        (base.recip(), -self.rho / (base * self.ones_eigenvalue()))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.ones_eigenvalue() > T::zero()
    }

    /// `(x−μ)ᵀΣ⁻¹(x−μ)` from `s1 = Σxᵢ` and `s2 = Σxᵢ²`.
    pub fn quadratic_form_from_sums(&self, s1: T, s2: T) -> T {
        let n = T::from_count(self.dim);
        let m = self.mean;
        let centered_sq = s2 - T::lit(2.0) * m * s1 + n * m * m;
        let centered_sum = s1 - n * m;
        let (a, b) = self.inverse_coeffs();
        a * centered_sq + b * centered_sum * centered_sum
    }

    /// Log-density from the observation's sum and sum of squares.
    pub fn log_density_from_sums(&self, s1: T, s2: T) -> T {
        let n = T::from_count(self.dim);
        let half = T::lit(0.5);
        -half
            * (n * (T::lit(2.0) * T::PI()).ln()
                + self.ln_det()
                + self.quadratic_form_from_sums(s1, s2))
    }

    pub fn log_density(&self, x: &[T]) -> T {
        let (s1, s2) = sums(x);
        self.log_density_from_sums(s1, s2)
    }

    pub fn dense_mean(&self) -> Vec<T> {
        vec![self.mean; self.dim]
    }
}

/// `(Σxᵢ, Σxᵢ²)`.
pub fn sums<T: Real>(x: &[T]) -> (T, T) {
    x.iter()
        .fold((T::zero(), T::zero()), |(s1, s2), &v| (s1 + v, s2 + v * v))
}

/// `ln f_post(x) − ln f_pre(x)` in O(n).
pub fn log_likelihood_ratio<T: Real>(pre: &ObsModel<T>, post: &ObsModel<T>, x: &[T]) -> T {
    let (s1, s2) = sums(x);
    log_likelihood_ratio_from_sums(pre, post, s1, s2)
}

pub fn log_likelihood_ratio_from_sums<T: Real>(
    pre: &ObsModel<T>,
    post: &ObsModel<T>,
    s1: T,
    s2: T,
) -> T {
    if pre == post {
        return T::zero();
    }
    let half = T::lit(0.5);
    half * (pre.ln_det() - post.ln_det() + pre.quadratic_form_from_sums(s1, s2)
        - post.quadratic_form_from_sums(s1, s2))
}

/// `D(N(μ₁,Σ₁) ‖ N(μ₀,Σ₀))` for the structured pair, per block.
pub fn structured_kl<T: Real>(pre: &ObsModel<T>, post: &ObsModel<T>) -> Result<T, StatsError> {
    if pre.dim != post.dim {
        return Err(StatsError::DimensionMismatch(pre.dim, post.dim));
    }
    if !pre.is_positive_definite() || !post.is_positive_definite() {
        return Err(StatsError::NotPositiveDefinite);
    }
    let n = T::from_count(pre.dim);
    let (a, b) = pre.inverse_coeffs();
    // tr(Σ₀⁻¹Σ₁) − n; the log-determinant ratio is −ln(1 + this).
    let trace_excess = n * (post.rho - pre.rho) / pre.ones_eigenvalue();
    let dm = pre.mean - post.mean;
    let mahalanobis = dm * dm * (a * n + b * n * n);
    Ok(T::lit(0.5) * (trace_excess - trace_excess.ln_1p() + mahalanobis))
}

fn dense_covariance<T: Real + RealField>(m: &ObsModel<T>) -> DMatrix<T> {
    DMatrix::from_fn(m.dim, m.dim, |i, j| if i == j { m.diag() } else { m.rho })
}

/// Gaussian KL `D(model1 ‖ model0)` computed with dense matrices: explicit
/// inverse, LU determinants, no structure exploited.
pub fn generic_gaussian_kl<T: Real + RealField>(
    model0: &ObsModel<T>,
    model1: &ObsModel<T>,
) -> Result<T, StatsError> {
    if model0.dim != model1.dim {
        return Err(StatsError::DimensionMismatch(model0.dim, model1.dim));
    }
    let s0 = dense_covariance(model0);
    let s1 = dense_covariance(model1);
    if s0.clone().cholesky().is_none() || s1.clone().cholesky().is_none() {
        return Err(StatsError::NotPositiveDefinite);
    }
    let s0_inv = s0
        .clone()
        .try_inverse()
        .ok_or(StatsError::NotPositiveDefinite)?;
    let dmu = DVector::from_vec(model0.dense_mean()) - DVector::from_vec(model1.dense_mean());
    let trace = (&s0_inv * &s1).trace();
    let quad = (dmu.transpose() * &s0_inv * &dmu)[(0, 0)];
    let n = T::from_count(model0.dim);
    let ln_det = Float::ln(s0.determinant()) - Float::ln(s1.determinant());
    Ok(T::lit(0.5) * (trace + quad - n + ln_det))
}

/// Scalar Gaussian KL `D(N(μ₁,σ₁²) ‖ N(μ₀,σ₀²))`.
pub fn scalar_gaussian_kl<T: Real>(mu0: T, var0: T, mu1: T, var1: T) -> T {
    let half = T::lit(0.5);
    half * (var0 / var1).ln() + (var1 + (mu0 - mu1) * (mu0 - mu1)) / (T::lit(2.0) * var0) - half
}

/// Per-pulse KL of the coherent-state benchmark: `2(N+N_a)·η·(1−√η_d)²`.
pub fn classical_kl<T: Real>(params: &ProbeParams<T>, eta: T, eta_d: T) -> Result<T, StatsError> {
    params.require(ProbeKind::Classical)?;
    check_eta(eta)?;
    check_drop(eta_d)?;
    let gap = T::one() - eta_d.sqrt();
    Ok(T::lit(2.0) * (params.n_signal + params.n_aug) * eta * gap * gap)
}

/// Per-pulse KL of an `n`-pulse quantum-augmented block.
pub fn quantum_kl_per_pulse<T: Real>(
    params: &ProbeParams<T>,
    eta: T,
    eta_d: T,
) -> Result<T, StatsError> {
    params.require(ProbeKind::Quantum)?;
    check_eta(eta)?;
    check_drop(eta_d)?;
    let n = params.block_t();
    let c = params.c_n();
    let one = T::one();
    let slack = one - c * eta;
    let x = c * eta * (one - eta_d) / slack;
    let gap = one - eta_d.sqrt();
    let mean_term = T::lit(4.0) * params.n_signal * n * eta * gap * gap / slack;
    Ok((x - x.ln_1p() + mean_term) / (T::lit(2.0) * n))
}

/// Per-pulse KL for either family.
pub fn per_pulse_kl<T: Real>(params: &ProbeParams<T>, eta: T, eta_d: T) -> Result<T, StatsError> {
    match params.kind {
        ProbeKind::Classical => classical_kl(params, eta, eta_d),
        ProbeKind::Quantum => quantum_kl_per_pulse(params, eta, eta_d),
    }
}

/// KL of one observation (one block of `n` pulses).
pub fn per_block_kl<T: Real>(params: &ProbeParams<T>, eta: T, eta_d: T) -> Result<T, StatsError> {
    Ok(per_pulse_kl(params, eta, eta_d)? * params.block_t())
}

/// Quantum-to-classical per-pulse KL ratio `q_n`.
pub fn speedup_ratio_qn<T: Real>(
    params: &ProbeParams<T>,
    eta: T,
    eta_d: T,
) -> Result<T, StatsError> {
    params.require(ProbeKind::Quantum)?;
    check_ratio_drop(eta_d)?;
    let quantum = quantum_kl_per_pulse(params, eta, eta_d)?;
    let classical = classical_kl(&params.classical_comparator(), eta, eta_d)?;
    Ok(quantum / classical)
}

/// `q_n` written out as a single closed form rather than a ratio of two KLs.
pub fn speedup_ratio_qn_closed_form<T: Real>(
    params: &ProbeParams<T>,
    eta: T,
    eta_d: T,
) -> Result<T, StatsError> {
    params.require(ProbeKind::Quantum)?;
    check_eta(eta)?;
    check_ratio_drop(eta_d)?;
    let one = T::one();
    let four = T::lit(4.0);
    let (big_n, na, n) = (params.n_signal, params.n_aug, params.block_t());
    let c = params.c_n();
    let gap_sq = (one - eta_d.sqrt()).powi(2);
    let t1 = c / (one - c * eta) * (one - eta_d) / gap_sq;
    let t2 = ((one - c * eta * eta_d) / (one - c * eta)).ln() / (eta * gap_sq);
    let t3 = four * big_n * n / (one - c * eta);
    Ok((t1 - t2 + t3) / (four * (big_n + na) * n))
}

/// `b_d = (1+√η_d)/(1−√η_d)`.
pub fn drop_factor_bd<T: Real>(eta_d: T) -> T {
    let r = eta_d.sqrt();
    (T::one() + r) / (T::one() - r)
}

/// Block size beyond which `q_n` is nondecreasing in `n`. Requires
/// `N·η > b_d·N_a·(1−η)`.
pub fn block_size_threshold_n0<T: Real>(
    params: &ProbeParams<T>,
    eta: T,
    eta_d: T,
) -> Result<T, StatsError> {
    check_eta(eta)?;
    check_ratio_drop(eta_d)?;
    let one = T::one();
    let four = T::lit(4.0);
    let bd = drop_factor_bd(eta_d);
    let margin = params.n_signal * eta - bd * params.n_aug * (one - eta);
    if !(margin > T::zero()) {
        return Err(StatsError::HypothesisViolated("N*eta > b_d*N_a*(1-eta)"));
    }
    let numer = if eta < T::lit(0.5) {
        bd * (T::lit(3.0) - four * eta)
    } else {
        bd
    };
    let first = numer / (four * margin);
    let second = one / (four * params.n_aug * (one - eta));
    Ok(first.max(second))
}

/// Augmentation level `N_{a,0}` above which `q_n` decreases in `N_a`.
/// Requires `8Nn(1−η) > η·b_d·(1−η_d)`.
pub fn augmentation_threshold_na0<T: Real>(
    params: &ProbeParams<T>,
    eta: T,
    eta_d: T,
) -> Result<T, StatsError> {
    check_eta(eta)?;
    check_ratio_drop(eta_d)?;
    let one = T::one();
    let four = T::lit(4.0);
    let eight = T::lit(8.0);
    let bd = drop_factor_bd(eta_d);
    let nn = params.n_signal * params.block_t();
    let a = eight * nn * (one - eta) - eta * bd * (one - eta_d);
    if !(a > T::zero()) {
        return Err(StatsError::HypothesisViolated(
            "8*N*n*(1-eta) > eta*b_d*(1-eta_d)",
        ));
    }
    let b = eight * nn * (T::lit(3.0) * eta - one) + bd * (four * eta - one);
    let disc = eight * nn * (bd + four * nn * eta) * a + (b + four).powi(2);
    Ok((b + disc.sqrt()) / (four * params.block_t() * a))
}

/// `c_n² η (1+√η_d)² / (4 n N_a (1 − c_n η η_d))`.
///
/// Read as a bound on `N`. The sign of `∂q_n/∂N` does not depend on `N`, and
/// `q_n` increases in `N` for every `N` whenever this value is below 1.
pub fn signal_threshold<T: Real>(
    params: &ProbeParams<T>,
    eta: T,
    eta_d: T,
) -> Result<T, StatsError> {
    params.require(ProbeKind::Quantum)?;
    check_eta(eta)?;
    check_drop(eta_d)?;
    let one = T::one();
    let c = params.c_n();
    let num = c * c * eta * (one + eta_d.sqrt()).powi(2);
    let den = T::lit(4.0) * params.block_t() * params.n_aug * (one - c * eta * eta_d);
    Ok(num / den)
}

/// Upper end `c_{n,ε}·N·η/(1 − c_{n,ε}·η)` of the `N_a` range `[ε, ·]` on which
/// `q_n > 1`.
pub fn advantage_upper_na<T: Real>(n_signal: T, block: usize, eta: T, eps: T) -> T {
    let c = squeeze_factor(T::from_count(block) * eps);
    c * n_signal * eta / (T::one() - c * eta)
}

/// Closed-form limits of `q_n` and its monotonicity thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Thresholds<T> {
    pub b_d: T,
    pub n0: Result<T, StatsError>,
    pub na0: Result<T, StatsError>,
    pub signal_threshold: T,
    /// `η → 0`: `N/(N+N_a)`.
    pub limit_eta0: T,
    /// `η_d → 1`.
    pub limit_etad1: T,
    /// `N → ∞`: `1/(1−c_n η)`.
    pub limit_n_signal_inf: T,
    /// `n → ∞`: `N/((N+N_a)(1−η))`.
    pub limit_block_inf: T,
}

pub fn lemma2_thresholds<T: Real>(
    params: &ProbeParams<T>,
    eta: T,
    eta_d: T,
) -> Result<Lemma2Thresholds<T>, StatsError> {
    params.require(ProbeKind::Quantum)?;
    check_eta(eta)?;
    check_drop(eta_d)?;
    let one = T::one();
    let two = T::lit(2.0);
    let (big_n, na, n) = (params.n_signal, params.n_aug, params.block_t());
    let c = params.c_n();
    let slack = one - c * eta;
    Ok(Lemma2Thresholds {
        b_d: drop_factor_bd(eta_d),
        n0: block_size_threshold_n0(params, eta, eta_d),
        na0: augmentation_threshold_na0(params, eta, eta_d),
        signal_threshold: signal_threshold(params, eta, eta_d)?,
        limit_eta0: big_n / (big_n + na),
        limit_etad1: (c * c * eta / slack + two * n * big_n) / (two * n * (big_n + na) * slack),
        limit_n_signal_inf: one / slack,
        limit_block_inf: big_n / ((big_n + na) * (one - eta)),
    })
}

/// Pre-change and post-change models of `probe`. The post-change model equals the
/// pre-change one when the fault is absent or off the walk.
pub fn build_obs_models<T: Real>(
    network: &Network<T>,
    probe: &Probe,
    params: &ProbeParams<T>,
    fault: Option<(EdgeId, T)>,
) -> Result<(ObsModel<T>, ObsModel<T>), StatsError> {
    let eta0 = probe.transmissivity(network, None);
    let pre = ObsModel::new(params, eta0)?;
    let post = match fault {
        Some((e, eta_d)) if probe.covers(e) => {
            network.edge(e)?;
            let channel = ChannelCondition::with_drop(eta0, eta_d, probe.multiplicity(e))?;
            ObsModel::new(params, channel.eta1)?
        }
        Some((e, eta_d)) => {
            network.edge(e)?;
            check_drop(eta_d)?;
            pre
        }
        None => pre,
    };
    Ok((pre, post))
}

/// Per-block KL summed over the probes covering `fault_edge`.
pub fn covering_kl_sum<T: Real>(
    network: &Network<T>,
    probes: &[Probe],
    fault_edge: EdgeId,
    params: &ProbeParams<T>,
    eta_d: T,
) -> Result<T, StatsError> {
    network.edge(fault_edge)?;
    let mut total = T::zero();
    let mut covered = false;
    for p in probes.iter().filter(|p| p.covers(fault_edge)) {
        covered = true;
        let channel = ChannelCondition::with_drop(
            p.transmissivity(network, None),
            eta_d,
            p.multiplicity(fault_edge),
        )?;
        total = total + per_block_kl(params, channel.eta0, channel.drop())?;
    }
    if covered {
        Ok(total)
    } else {
        Err(StatsError::UncoveredEdge(fault_edge))
    }
}

/// Network speedup `s_n(e*)`: per-block quantum KL summed over the probes
/// covering `fault_edge`, divided by `n` times the classical sum over the same
/// routes. The classical family shares the quantum family's `N` and `N_a`.
pub fn network_speedup_sn<T: Real>(
    network: &Network<T>,
    probes: &[Probe],
    fault_edge: EdgeId,
    params: &ProbeParams<T>,
    eta_d: T,
) -> Result<T, StatsError> {
    params.require(ProbeKind::Quantum)?;
    check_ratio_drop(eta_d)?;
    let quantum = covering_kl_sum(network, probes, fault_edge, params, eta_d)?;
    let classical = covering_kl_sum(
        network,
        probes,
        fault_edge,
        &params.classical_comparator(),
        eta_d,
    )?;
    Ok(quantum / (params.block_t() * classical))
}

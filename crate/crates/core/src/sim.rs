//! Seeded Monte Carlo trials of FL-CUSUM over simulated probe streams, and the
//! latency / error-rate aggregates per threshold.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::network::{
    build_fattree_topology, build_line_topology, check_identifiable, line_reference_probes, EdgeId,
    FaultFamily, Identifiability, Network, NetworkError, Probe,
};
use crate::qcd::{gamma_from_threshold, FlCusumEngine, FlCusumModels, QcdError};
use crate::scalar::Real;
use crate::stats::{ObsModel, ProbeKind, ProbeParams, StatsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("probe set does not identify single-link faults: fault sets #{first} and #{second} look alike")]
    NotIdentifiable { first: usize, second: usize },
    #[error(transparent)]
    Qcd(#[from] QcdError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// One draw from `N(m·u, ¼I + ρJ)`: `x = m·u + √¼·z + β(uᵀz)u` with
/// `β = (√(¼+nρ) − √¼)/n`, which reproduces the covariance exactly.
pub fn sample_observation<T: Real, R: Rng + ?Sized>(model: &ObsModel<T>, rng: &mut R) -> Vec<T>
where
    StandardNormal: Distribution<T>,
{
    let z: Vec<T> = (0..model.dim).map(|_| StandardNormal.sample(rng)).collect();
    let (sqrt_a, beta) = factor(model);
    let shared = beta * z.iter().copied().sum::<T>();
    z.into_iter()
        .map(|zi| model.mean + sqrt_a * zi + shared)
        .collect()
}

/// `(Σx, Σx²)` of one draw, consuming the same normals as [`sample_observation`].
pub fn sample_sums<T: Real, R: Rng + ?Sized>(model: &ObsModel<T>, rng: &mut R) -> (T, T)
where
    StandardNormal: Distribution<T>,
{
    let mut sz = T::zero();
    let mut szz = T::zero();
    for _ in 0..model.dim {
        let z: T = StandardNormal.sample(rng);
        sz = sz + z;
        szz = szz + z * z;
    }
    let (sqrt_a, beta) = factor(model);
    let n = T::from_count(model.dim);
    let offset = model.mean + beta * sz;
    let s1 = n * offset + sqrt_a * sz;
    let s2 = n * offset * offset + T::lit(2.0) * offset * sqrt_a * sz + ObsModel::<T>::base() * szz;
    (s1, s2)
}

fn factor<T: Real>(model: &ObsModel<T>) -> (T, T) {
    let sqrt_a = ObsModel::<T>::base().sqrt();
    let n = T::from_count(model.dim);
    (sqrt_a, (model.ones_eigenvalue().sqrt() - sqrt_a) / n)
}

/// The injected fault: edge, drop factor and change point `ν` (steps count from 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultSpec<T> {
    pub edge: EdgeId,
    pub eta_d: T,
    pub change_point: u64,
}

/// A complete Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T> {
    pub network: Network<T>,
    pub probes: Vec<Probe>,
    /// Quantum family; the classical family shares its `N` and `N_a`.
    pub params: ProbeParams<T>,
    pub families: Vec<ProbeKind>,
    /// Drop the detector is tuned for.
    pub eta_d: T,
    /// `None` simulates a fault-free network.
    pub fault: Option<FaultSpec<T>>,
    /// Strictly increasing thresholds `h`.
    pub thresholds: Vec<T>,
    pub trials: usize,
    pub seed: u64,
    pub horizon: u64,
}

pub const DEFAULT_SIGNAL: f64 = 100.0;
pub const DEFAULT_SQUEEZE_DB: f64 = 6.0;
pub const DEFAULT_DROP: f64 = 0.95;
pub const DEFAULT_CHANGE_POINT: u64 = 1000;
pub const DEFAULT_LINK_ETA: f64 = 0.9;
pub const MIN_DEFAULT_HORIZON: u64 = 10_000;

/// `max(50·ν, 10⁴)`.
pub fn default_horizon(change_point: u64) -> u64 {
    (50 * change_point).max(MIN_DEFAULT_HORIZON)
}

/// Built-in scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Five-link line, monitors at both ends, five reference probes, fault on (1,2).
    Line5,
    /// 48-link optical fat-tree with its 48 loop-back probes, fault on (1,16).
    FatTree3,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "line5" => Ok(Preset::Line5),
            "fattree3" => Ok(Preset::FatTree3),
            other => Err(format!(
                "unknown scenario `{other}` (expected line5 or fattree3)"
            )),
        }
    }
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Line5 => "line5",
            Preset::FatTree3 => "fattree3",
        }
    }

    /// Network, probes and default faulty edge.
    pub fn topology<T: Real>(
        self,
        eta: T,
    ) -> Result<(Network<T>, Vec<Probe>, EdgeId), NetworkError> {
        match self {
            Preset::Line5 => {
                let net = build_line_topology(5, eta)?;
                let probes = line_reference_probes(&net)?;
                let e = net.find_edge(1, 2).ok_or(NetworkError::NoSuchLink(1, 2))?;
                Ok((net, probes, e))
            }
            Preset::FatTree3 => {
                let (net, probes) = build_fattree_topology(eta)?;
                let e = net
                    .find_edge(1, 16)
                    .ok_or(NetworkError::NoSuchLink(1, 16))?;
                Ok((net, probes, e))
            }
        }
    }

    /// Scenario with the default parameters: `N = 100`, 6 dB squeezing,
    /// `η = 0.9` per link, `η_d = 0.95`, `ν = 1000`, both families.
    pub fn scenario<T: Real>(
        self,
        thresholds: Vec<T>,
        trials: usize,
        seed: u64,
    ) -> Result<ScenarioConfig<T>, SimError> {
        let (network, probes, edge) = self.topology(T::lit(DEFAULT_LINK_ETA))?;
        let params =
            ProbeParams::from_squeeze_db(T::lit(DEFAULT_SIGNAL), T::lit(DEFAULT_SQUEEZE_DB))?;
        let eta_d = T::lit(DEFAULT_DROP);
        Ok(ScenarioConfig {
            network,
            probes,
            params,
            families: vec![ProbeKind::Classical, ProbeKind::Quantum],
            eta_d,
            fault: Some(FaultSpec {
                edge,
                eta_d,
                change_point: DEFAULT_CHANGE_POINT,
            }),
            thresholds,
            trials,
            seed,
            horizon: default_horizon(DEFAULT_CHANGE_POINT),
        })
    }
}

fn family_code(kind: ProbeKind) -> u64 {
    match kind {
        ProbeKind::Classical => 0,
        ProbeKind::Quantum => 1,
    }
}

/// Independent stream for `(seed, trial, family)`: the ChaCha key comes from
/// the seed, the stream id from the trial index and family.
pub fn trial_rng(seed: u64, trial_index: u64, family: ProbeKind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index * 2 + family_code(family));
    rng
}

impl<T: Real> ScenarioConfig<T> {
    pub fn family_params(&self, kind: ProbeKind) -> ProbeParams<T> {
        match kind {
            ProbeKind::Quantum => self.params,
            ProbeKind::Classical => self.params.classical_comparator(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.thresholds.is_empty() {
            return bad("threshold grid is empty".into());
        }
        if self
            .thresholds
            .iter()
            .any(|h| !(*h > T::zero()) || !h.is_finite())
        {
            return bad("thresholds must be positive and finite".into());
        }
        if self.thresholds.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("threshold grid must be strictly increasing".into());
        }
        if self.families.is_empty() {
            return bad("no probe family selected".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.params.kind != ProbeKind::Quantum {
            return bad("params must describe the quantum family".into());
        }
        if !(self.eta_d > T::zero() && self.eta_d < T::one()) {
            return bad(format!("eta_d = {} must lie in (0,1)", self.eta_d));
        }
        if let Some(f) = &self.fault {
            if f.change_point == 0 {
                return bad("change point must be at least 1".into());
            }
            self.network.edge(f.edge)?;
            if !(f.eta_d > T::zero() && f.eta_d < T::one()) {
                return bad(format!("fault eta_d = {} must lie in (0,1)", f.eta_d));
            }
        }
        let family = FaultFamily::single_link(&self.network);
        if let Identifiability::Indistinguishable { first, second } =
            check_identifiable(&self.probes, &family)
        {
            return Err(SimError::NotIdentifiable { first, second });
        }
        Ok(())
    }

    fn models(&self, kind: ProbeKind) -> Result<FamilyModels<T>, SimError> {
        let params = self.family_params(kind);
        let detector = FlCusumModels::new(&self.network, &self.probes, &params, self.eta_d)?;
        let pre = detector.pre_models().to_vec();
        let post = match &self.fault {
            Some(f) => {
                let truth = FlCusumModels::new(&self.network, &self.probes, &params, f.eta_d)?;
                truth.observation_models(Some(f.edge))
            }
            None => pre.clone(),
        };
        Ok(FamilyModels {
            detector,
            pre,
            post,
        })
    }
}

struct FamilyModels<T> {
    detector: FlCusumModels<T>,
    pre: Vec<ObsModel<T>>,
    post: Vec<ObsModel<T>>,
}

/// Why a trial does not count as a successful detection and localization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrialError {
    /// Stopped before the change point (or at all, in a fault-free run).
    Early,
    WrongEdge,
    /// Still running at the horizon.
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub stopped: bool,
    pub tau: Option<u64>,
    pub lambda: Option<EdgeId>,
    pub error: Option<TrialError>,
}

impl TrialOutcome {
    /// `τ − ν` for an error-free trial.
    pub fn latency(&self, change_point: u64) -> Option<u64> {
        match (self.error, self.tau) {
            (None, Some(tau)) => Some(tau - change_point),
            _ => None,
        }
    }
}

fn classify<T>(fault: Option<&FaultSpec<T>>, stop: Option<(u64, EdgeId)>) -> TrialOutcome {
    let Some((tau, lambda)) = stop else {
        return TrialOutcome {
            stopped: false,
            tau: None,
            lambda: None,
            error: Some(TrialError::Horizon),
        };
    };
    let error = match fault {
        None => Some(TrialError::Early),
        Some(f) if tau < f.change_point => Some(TrialError::Early),
        Some(f) if lambda != f.edge => Some(TrialError::WrongEdge),
        Some(_) => None,
    };
    TrialOutcome {
        stopped: true,
        tau: Some(tau),
        lambda: Some(lambda),
        error,
    }
}

fn run_with_models<T: Real>(
    config: &ScenarioConfig<T>,
    models: &FamilyModels<T>,
    family: ProbeKind,
    trial_index: u64,
) -> Vec<TrialOutcome>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = trial_rng(config.seed, trial_index, family);
    let change_point = config.fault.as_ref().map(|f| f.change_point);
    let mut engine = FlCusumEngine::new(&models.detector, T::infinity());
    let mut stops: Vec<Option<(u64, EdgeId)>> = vec![None; config.thresholds.len()];
    let mut pending = 0;
    let mut buf = vec![(T::zero(), T::zero()); models.pre.len()];
    let mut t = 0u64;
    while pending < stops.len() && t < config.horizon {
        t += 1;
        let active = match change_point {
            Some(nu) if t >= nu => &models.post,
            _ => &models.pre,
        };
        for (slot, model) in buf.iter_mut().zip(active) {
            *slot = sample_sums(model, &mut rng);
        }
        engine.step_sums(&buf);
        let (lead_edge, lead) = leader(engine.statistics());
        while pending < stops.len() && lead >= config.thresholds[pending] {
            stops[pending] = Some((t, lead_edge));
            pending += 1;
        }
    }
    stops
        .into_iter()
        .map(|s| classify(config.fault.as_ref(), s))
        .collect()
}

fn leader<T: Real>(stats: &[T]) -> (EdgeId, T) {
    let mut best = (EdgeId(0), T::neg_infinity());
    for (e, &s) in stats.iter().enumerate() {
        if s > best.1 {
            best = (EdgeId(e), s);
        }
    }
    best
}

/// Runs one trial of `family` and returns one outcome per threshold, in grid
/// order. All thresholds see the same observation stream.
pub fn run_trial<T: Real>(
    config: &ScenarioConfig<T>,
    family: ProbeKind,
    trial_index: u64,
) -> Result<Vec<TrialOutcome>, SimError>
where
    StandardNormal: Distribution<T>,
{
    config.validate()?;
    let models = config.models(family)?;
    Ok(run_with_models(config, &models, family, trial_index))
}

/// Aggregate metrics for one `(family, h)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow<T> {
    pub family: ProbeKind,
    pub h: T,
    pub gamma: T,
    pub trials: usize,
    pub errorfree: usize,
    /// Mean `τ − ν` over error-free trials; `None` when there are none.
    pub mean_latency: Option<T>,
    pub error_prob: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    /// Sorted by family, then `h`.
    pub rows: Vec<AggregateRow<T>>,
}

pub const CSV_HEADER: &str = "family,h,gamma,trials,errorfree,mean_latency,error_prob";

/// `%g`-style formatting with six significant digits.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let sci = format!("{:.5e}", x);
    let (mantissa, e) = sci.split_once('e').unwrap();
    let e: i32 = e.parse().unwrap();
    let exp = if e != exp { e } else { exp };
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl<T: Real> SweepResult<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let latency = r
                .mean_latency
                .map(|v| format_g6(v.as_f64()))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.family,
                format_g6(r.h.as_f64()),
                format_g6(r.gamma.as_f64()),
                r.trials,
                r.errorfree,
                latency,
                format_g6(r.error_prob.as_f64())
            );
        }
        out
    }

    pub fn rows_for(&self, family: ProbeKind) -> impl Iterator<Item = &AggregateRow<T>> {
        self.rows.iter().filter(move |r| r.family == family)
    }

    /// Least-squares fit of mean latency against `h` for one family, over the
    /// rows that have a latency.
    pub fn latency_fit(&self, family: ProbeKind) -> Option<LineFit<T>> {
        let (xs, ys): (Vec<T>, Vec<T>) = self
            .rows_for(family)
            .filter_map(|r| r.mean_latency.map(|l| (r.h, l)))
            .unzip();
        fit_line(&xs, &ys)
    }
}

/// Runs every trial of every family and aggregates per `(family, h)`. Trials run
/// in parallel; the result does not depend on scheduling.
pub fn run_sweep<T: Real>(config: &ScenarioConfig<T>) -> Result<SweepResult<T>, SimError>
where
    StandardNormal: Distribution<T>,
{
    config.validate()?;
    let mut families = config.families.clone();
    families.sort();
    families.dedup();
    let change_point = config.fault.as_ref().map_or(0, |f| f.change_point);
    let mut rows = Vec::new();
    for family in families {
        let models = config.models(family)?;
        let outcomes: Vec<Vec<TrialOutcome>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|i| run_with_models(config, &models, family, i))
            .collect();
        for (k, &h) in config.thresholds.iter().enumerate() {
            let mut errorfree = 0usize;
            let mut latency_sum = 0u128;
            for trial in &outcomes {
                if let Some(l) = trial[k].latency(change_point) {
                    errorfree += 1;
                    latency_sum += l as u128;
                }
            }
            let trials = config.trials;
            rows.push(AggregateRow {
                family,
                h,
                gamma: gamma_from_threshold(h, config.network.num_edges()),
                trials,
                errorfree,
                mean_latency: (errorfree > 0)
                    .then(|| T::lit(latency_sum as f64) / T::from_count(errorfree)),
                error_prob: T::from_count(trials - errorfree) / T::from_count(trials),
            });
        }
    }
    Ok(SweepResult { rows })
}

/// Ordinary least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

/// `None` with fewer than two points or no spread in `xs`.
pub fn fit_line<T: Real>(xs: &[T], ys: &[T]) -> Option<LineFit<T>> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = T::from_count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let syy: T = ys.iter().map(|&y| (y - my) * (y - my)).sum();
    if !(sxx > T::zero()) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > T::zero() {
        sxy * sxy / (sxx * syy)
    } else {
        T::one()
    };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::per_block_kl;

    #[test]
    fn sampler_moments() {
        let params = ProbeParams::quantum(100.0, 1.0, 4).unwrap();
        let model = ObsModel::new(&params, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws = 1_000_000;
        let mut mean = [0.0f64; 4];
        let mut cov = [[0.0f64; 4]; 4];
        for _ in 0..draws {
            let x = sample_observation(&model, &mut rng);
            for i in 0..4 {
                mean[i] += x[i];
                for j in 0..4 {
                    cov[i][j] += (x[i] - model.mean) * (x[j] - model.mean);
                }
            }
        }
        let sd = model.diag().sqrt();
        for i in 0..4 {
            assert!((mean[i] / draws as f64 - model.mean).abs() < 4.0 * sd / (draws as f64).sqrt());
            for j in 0..4 {
                let want = if i == j { model.diag() } else { model.rho };
                assert!(
                    (cov[i][j] / draws as f64 - want).abs() < 0.01 * model.diag(),
                    "{i}{j}"
                );
            }
        }
    }

    #[test]
    fn sums_agree_with_vector_draws() {
        let params = ProbeParams::quantum(100.0, 0.7, 3).unwrap();
        let model = ObsModel::new(&params, 0.6f64).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x = sample_observation(&model, &mut a);
            let (s1, s2) = sample_sums(&model, &mut b);
            let (r1, r2) = crate::stats::sums(&x);
            assert!((s1 - r1).abs() < 1e-9 && (s2 - r2).abs() < 1e-9);
        }
    }

    #[test]
    fn scalar_sampler_variance() {
        let params = ProbeParams::from_squeeze_db(100.0, 6.0).unwrap();
        let model = ObsModel::new(&params, 0.81).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_observation(&model, &mut rng)[0])
            .collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
        assert!((v / model.diag() - 1.0).abs() < 0.01);
    }

    #[test]
    fn llr_mean_under_post_change_is_kl() {
        let params = ProbeParams::quantum(10.0, 1.0, 4).unwrap();
        let pre = ObsModel::new(&params, 0.8).unwrap();
        let post = ObsModel::new(&params, 0.8 * 0.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let llrs: Vec<f64> = (0..n)
            .map(|_| {
                let (s1, s2) = sample_sums(&post, &mut rng);
                crate::stats::log_likelihood_ratio_from_sums(&pre, &post, s1, s2)
            })
            .collect();
        let m = llrs.iter().sum::<f64>() / n as f64;
        let sd = (llrs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let kl = per_block_kl(&params, 0.8, 0.9).unwrap();
        assert!((m - kl).abs() < 3.0 * sd / (n as f64).sqrt(), "{m} vs {kl}");
    }

    #[test]
    fn rng_streams_are_per_trial_and_family() {
        let a: u64 = trial_rng(7, 3, ProbeKind::Quantum).random();
        let b: u64 = trial_rng(7, 3, ProbeKind::Quantum).random();
        let c: u64 = trial_rng(7, 3, ProbeKind::Classical).random();
        let d: u64 = trial_rng(7, 4, ProbeKind::Quantum).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    fn line_config(thresholds: Vec<f64>, trials: usize) -> ScenarioConfig<f64> {
        let mut c = Preset::Line5.scenario(thresholds, trials, 11).unwrap();
        c.fault.as_mut().unwrap().change_point = 1;
        c
    }

    #[test]
    fn strong_fault_is_found() {
        let mut c = line_config(vec![20.0], 200);
        c.eta_d = 0.5;
        c.fault.as_mut().unwrap().eta_d = 0.5;
        let res = run_sweep(&c).unwrap();
        for r in &res.rows {
            assert!(r.errorfree as f64 >= 0.95 * r.trials as f64, "{r:?}");
        }
    }

    #[test]
    fn late_change_point_hits_horizon() {
        let mut c = line_config(vec![30.0], 1);
        c.fault.as_mut().unwrap().change_point = 500;
        c.horizon = 100;
        let out = run_trial(&c, ProbeKind::Quantum, 0).unwrap();
        assert_eq!(out[0].error, Some(TrialError::Horizon));
        assert!(!out[0].stopped);
        assert_eq!(out[0].latency(500), None);
    }

    #[test]
    fn single_trial_row_equals_trial() {
        let c = line_config(vec![8.0], 1);
        let res = run_sweep(&c).unwrap();
        assert_eq!(res.rows.len(), 2);
        for r in &res.rows {
            let out = run_trial(&c, r.family, 0).unwrap()[0];
            assert_eq!(r.errorfree, usize::from(out.error.is_none()));
            assert_eq!(r.mean_latency, out.latency(1).map(|l| l as f64));
        }
    }

    #[test]
    fn outcomes_per_threshold_match_separate_runs() {
        let c = line_config(vec![4.0, 9.0, 15.0], 1);
        let joint = run_trial(&c, ProbeKind::Classical, 5).unwrap();
        for (k, &h) in c.thresholds.iter().enumerate() {
            let mut alone = c.clone();
            alone.thresholds = vec![h];
            assert_eq!(
                run_trial(&alone, ProbeKind::Classical, 5).unwrap()[0],
                joint[k]
            );
        }
    }

    #[test]
    fn adding_trials_keeps_earlier_trials() {
        let c = line_config(vec![10.0], 3);
        let first: Vec<_> = (0..3)
            .map(|i| run_trial(&c, ProbeKind::Quantum, i).unwrap())
            .collect();
        let mut more = c.clone();
        more.trials = 10;
        for i in 0..3 {
            assert_eq!(
                run_trial(&more, ProbeKind::Quantum, i as u64).unwrap(),
                first[i]
            );
        }
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let c = line_config(vec![5.0, 10.0], 20);
        let a = run_sweep(&c).unwrap().to_csv();
        let b = run_sweep(&c).unwrap().to_csv();
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("classical,5,"));
        assert!(lines[2].starts_with("classical,10,"));
        assert!(lines[3].starts_with("quantum,5,"));
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn fault_free_runs_only_raise_false_alarms() {
        let mut c = line_config(vec![3.0], 50);
        c.fault = None;
        c.horizon = 5000;
        let out = run_trial(&c, ProbeKind::Quantum, 0).unwrap();
        assert!(matches!(
            out[0].error,
            Some(TrialError::Early) | Some(TrialError::Horizon)
        ));
    }

    #[test]
    fn config_validation() {
        let good = line_config(vec![5.0], 1);
        let mut c = good.clone();
        c.thresholds = vec![5.0, 5.0];
        assert!(matches!(c.validate(), Err(SimError::InvalidConfig(_))));
        let mut c = good.clone();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.fault.as_mut().unwrap().change_point = 0;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.probes.truncate(4);
        assert!(matches!(
            c.validate(),
            Err(SimError::NotIdentifiable { .. })
        ));
    }

    #[test]
    fn g6_formatting() {
        assert_eq!(format_g6(0.0), "0");
        assert_eq!(format_g6(10.0), "10");
        assert_eq!(format_g6(0.5), "0.5");
        assert_eq!(format_g6(123.456789), "123.457");
        assert_eq!(format_g6(1234567.0), "1.23457e+06");
        assert_eq!(format_g6(0.0001234), "0.0001234");
        assert_eq!(format_g6(0.00001234), "1.234e-05");
        assert_eq!(format_g6(999999.5), "1e+06");
        assert_eq!(format_g6(-2.5), "-2.5");
        assert_eq!(format_g6(3.6e14), "3.6e+14");
    }

    #[test]
    fn line_fit() {
        let xs = [10.0f64, 20.0, 30.0];
        let ys = [5.0, 9.0, 13.0];
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 0.4).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit_line(&[1.0], &[2.0]), None);
        assert_eq!(fit_line(&[1.0, 1.0], &[2.0, 3.0]), None);
    }
}

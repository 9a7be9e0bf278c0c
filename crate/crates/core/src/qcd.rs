//! CUSUM change detection: the single-channel recursion, the per-edge
//! fault-localization bank (FL-CUSUM), its brute-force GLR counterpart and the
//! threshold and delay formulas.

use thiserror::Error;

use crate::network::{EdgeId, Network, Probe};
use crate::scalar::Real;
use crate::stats::{
    covering_kl_sum, log_likelihood_ratio_from_sums, sums, ObsModel, ProbeParams, StatsError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QcdError {
    #[error("gamma = {0} must be at least 1")]
    InvalidGamma(f64),
    #[error("expected one observation per probe ({expected}), got {got}")]
    ObservationCount { expected: usize, got: usize },
    #[error("observation for probe {probe} has {got} components, expected {expected}")]
    ObservationDim {
        probe: usize,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// `max(0, stat + llr)`.
#[inline]
pub fn cusum_step<T: Real>(stat: T, llr: T) -> T {
    let next = stat + llr;
    if next > T::zero() {
        next
    } else {
        T::zero()
    }
}

/// `h = ln((|E|+1)·γ)` for a target mean time to false alarm `γ`.
pub fn threshold_from_gamma<T: Real>(gamma: T, num_edges: usize) -> Result<T, QcdError> {
    if !(gamma >= T::one()) || !gamma.is_finite() {
        return Err(QcdError::InvalidGamma(gamma.as_f64()));
    }
    Ok((T::from_count(num_edges + 1) * gamma).ln())
}

/// Inverse of [`threshold_from_gamma`].
pub fn gamma_from_threshold<T: Real>(h: T, num_edges: usize) -> T {
    h.exp() / T::from_count(num_edges + 1)
}

/// Pre-change model of every probe and, for every edge, the post-change model of
/// each probe covering it. Built once, shared by any number of engines.
#[derive(Debug, Clone, PartialEq)]
pub struct FlCusumModels<T> {
    pre: Vec<ObsModel<T>>,
    /// Per edge: `(probe index, post-change model)` for the probes covering it.
    edge_pairs: Vec<Vec<(usize, ObsModel<T>)>>,
}

impl<T: Real> FlCusumModels<T> {
    pub fn new(
        network: &Network<T>,
        probes: &[Probe],
        params: &ProbeParams<T>,
        eta_d: T,
    ) -> Result<Self, QcdError> {
        let pre = probes
            .iter()
            .map(|p| ObsModel::new(params, p.transmissivity(network, None)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut edge_pairs = vec![Vec::new(); network.num_edges()];
        for e in network.edge_ids() {
            for (i, p) in probes.iter().enumerate() {
                if p.covers(e) {
                    let eta1 = p.transmissivity(network, Some((e, eta_d)));
                    edge_pairs[e.0].push((i, ObsModel::new(params, eta1)?));
                }
            }
        }
        Ok(Self { pre, edge_pairs })
    }

    pub fn num_probes(&self) -> usize {
        self.pre.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_pairs.len()
    }

    pub fn pre_models(&self) -> &[ObsModel<T>] {
        &self.pre
    }

    pub fn edge_pairs(&self, e: EdgeId) -> &[(usize, ObsModel<T>)] {
        &self.edge_pairs[e.0]
    }

    /// Model generating each probe's observations when `fault` is the faulty
    /// edge (or nothing is faulty).
    pub fn observation_models(&self, fault: Option<EdgeId>) -> Vec<ObsModel<T>> {
        let mut models = self.pre.clone();
        if let Some(e) = fault {
            for &(i, post) in &self.edge_pairs[e.0] {
                models[i] = post;
            }
        }
        models
    }

    /// `ln f₁⁽ᵉ⁾(X) − ln f₀(X)` for every edge, from per-probe `(Σx, Σx²)`.
    pub fn edge_llrs(&self, probe_sums: &[(T, T)], out: &mut [T]) {
        for (slot, pairs) in out.iter_mut().zip(&self.edge_pairs) {
            *slot = pairs
                .iter()
                .map(|&(i, post)| {
                    let (s1, s2) = probe_sums[i];
                    log_likelihood_ratio_from_sums(&self.pre[i], &post, s1, s2)
                })
                .sum();
        }
    }

    fn probe_sums<O: AsRef<[T]>>(&self, obs: &[O]) -> Result<Vec<(T, T)>, QcdError> {
        if obs.len() != self.pre.len() {
            return Err(QcdError::ObservationCount {
                expected: self.pre.len(),
                got: obs.len(),
            });
        }
        obs.iter()
            .enumerate()
            .map(|(i, x)| {
                let x = x.as_ref();
                if x.len() != self.pre[i].dim {
                    return Err(QcdError::ObservationDim {
                        probe: i,
                        expected: self.pre[i].dim,
                        got: x.len(),
                    });
                }
                Ok(sums(x))
            })
            .collect()
    }
}

/// First threshold crossing of an FL-CUSUM engine.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingResult<T> {
    /// Step at which some statistic first reached `h` (steps count from 1).
    pub tau: u64,
    /// Edge with the largest statistic at `tau`; ties go to the smallest id.
    pub lambda: EdgeId,
    pub statistic: T,
    /// Largest per-edge statistic after each step, when tracing was enabled.
    pub stat_trace: Option<Vec<T>>,
}

/// Outcome of driving an engine up to a horizon.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome<T> {
    Stopped(StoppingResult<T>),
    NotStopped { steps: u64 },
}

/// Bank of per-edge CUSUM statistics with a common threshold.
#[derive(Debug, Clone)]
pub struct FlCusumEngine<'m, T> {
    models: &'m FlCusumModels<T>,
    threshold: T,
    stats: Vec<T>,
    llrs: Vec<T>,
    step: u64,
    trace: Option<Vec<T>>,
    stopped: Option<(u64, EdgeId, T)>,
}

impl<'m, T: Real> FlCusumEngine<'m, T> {
    pub fn new(models: &'m FlCusumModels<T>, threshold: T) -> Self {
        Self {
            models,
            threshold,
            stats: vec![T::zero(); models.num_edges()],
            llrs: vec![T::zero(); models.num_edges()],
            step: 0,
            trace: None,
            stopped: None,
        }
    }

    /// Records the largest statistic after every step.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn statistics(&self) -> &[T] {
        &self.stats
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Consumes one observation vector per probe (indexed like the probe list).
    /// Returns the stopping result at the first step where a statistic reaches
    /// the threshold; later steps keep updating and return `None`.
    pub fn step<O: AsRef<[T]>>(
        &mut self,
        obs: &[O],
    ) -> Result<Option<StoppingResult<T>>, QcdError> {
        let probe_sums = self.models.probe_sums(obs)?;
        Ok(self.step_sums(&probe_sums))
    }

    /// Same as [`step`](Self::step) with each observation given as `(Σx, Σx²)`.
    pub fn step_sums(&mut self, probe_sums: &[(T, T)]) -> Option<StoppingResult<T>> {
        self.models.edge_llrs(probe_sums, &mut self.llrs);
        self.step += 1;
        let mut best = (EdgeId(0), T::neg_infinity());
        for (e, (stat, &llr)) in self.stats.iter_mut().zip(&self.llrs).enumerate() {
            *stat = cusum_step(*stat, llr);
            if *stat > best.1 {
                best = (EdgeId(e), *stat);
            }
        }
        if let Some(trace) = &mut self.trace {
            trace.push(best.1.max(T::zero()));
        }
        if self.stopped.is_none() && best.1 >= self.threshold {
            self.stopped = Some((self.step, best.0, best.1));
            return self.stopping_result();
        }
        None
    }

    pub fn stopping_result(&self) -> Option<StoppingResult<T>> {
        self.stopped.map(|(tau, lambda, statistic)| StoppingResult {
            tau,
            lambda,
            statistic,
            stat_trace: self.trace.clone(),
        })
    }

    /// Steps until the first crossing or until `horizon` steps have been taken.
    /// `fill` writes the per-probe `(Σx, Σx²)` for step `t` (counting from 1).
    pub fn run_until<F>(&mut self, horizon: u64, mut fill: F) -> RunOutcome<T>
    where
        F: FnMut(u64, &mut [(T, T)]),
    {
        let mut buf = vec![(T::zero(), T::zero()); self.models.num_probes()];
        while self.step < horizon {
            fill(self.step + 1, &mut buf);
            if let Some(stop) = self.step_sums(&buf) {
                return RunOutcome::Stopped(stop);
            }
        }
        RunOutcome::NotStopped { steps: self.step }
    }
}

/// Maximizer of the GLR statistic over change points and edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlrResult<T> {
    pub statistic: T,
    pub edge: Option<EdgeId>,
    /// 1-based start of the maximizing window, `None` when the statistic is 0.
    pub start: Option<usize>,
}

/// Per-edge `max(0, max_j Σ_{i=j}^t LLR_e(X_i))` over a history of per-step,
/// per-probe observations, each window summed from scratch.
pub fn glr_per_edge<T: Real, O: AsRef<[T]>>(
    history: &[Vec<O>],
    models: &FlCusumModels<T>,
) -> Result<Vec<(T, Option<usize>)>, QcdError> {
    let num_edges = models.num_edges();
    let mut llr = vec![vec![T::zero(); history.len()]; num_edges];
    let mut buf = vec![T::zero(); num_edges];
    for (i, obs) in history.iter().enumerate() {
        let probe_sums = models.probe_sums(obs)?;
        models.edge_llrs(&probe_sums, &mut buf);
        for e in 0..num_edges {
            llr[e][i] = buf[e];
        }
    }
    let t = history.len();
    Ok(llr
        .iter()
        .map(|series| {
            let mut best = (T::zero(), None);
            for j in 0..t {
                let window: T = series[j..t].iter().copied().sum();
                if window > best.0 {
                    best = (window, Some(j + 1));
                }
            }
            best
        })
        .collect())
}

/// `max_{1≤j≤t, e∈E} Σ_{i=j}^t LLR_e(X_i)`, clipped at 0; ties go to the smallest
/// edge id.
pub fn glr_statistic<T: Real, O: AsRef<[T]>>(
    history: &[Vec<O>],
    models: &FlCusumModels<T>,
) -> Result<GlrResult<T>, QcdError> {
    let per_edge = glr_per_edge(history, models)?;
    let mut out = GlrResult {
        statistic: T::zero(),
        edge: None,
        start: None,
    };
    for (e, &(stat, start)) in per_edge.iter().enumerate() {
        if stat > out.statistic {
            out = GlrResult {
                statistic: stat,
                edge: Some(EdgeId(e)),
                start,
            };
        }
    }
    Ok(out)
}

/// First-order detection delay bounds for a fault on `fault_edge`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBounds<T> {
    /// `ln γ / ΣKL`.
    pub lower: T,
    /// `ln((|E|+1)γ) / ΣKL`.
    pub upper: T,
    /// Per-block KL summed over the probes covering the faulty edge.
    pub kl_sum: T,
}

/// Asymptotic delay bounds; the `(1+o(1))` factors are omitted.
pub fn delay_bounds<T: Real>(
    network: &Network<T>,
    probes: &[Probe],
    fault_edge: EdgeId,
    params: &ProbeParams<T>,
    eta_d: T,
    gamma: T,
) -> Result<DelayBounds<T>, QcdError> {
    let h = threshold_from_gamma(gamma, network.num_edges())?;
    let kl_sum = covering_kl_sum(network, probes, fault_edge, params, eta_d)?;
    Ok(DelayBounds {
        lower: gamma.ln() / kl_sum,
        upper: h / kl_sum,
        kl_sum,
    })
}

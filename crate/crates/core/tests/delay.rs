use qfl::qcd::{delay_bounds, gamma_from_threshold, threshold_from_gamma};
use qfl::sim::{run_sweep, run_trial, Preset, ScenarioConfig};
use qfl::stats::ProbeKind;

const SLACK: f64 = 0.15;

fn line_scenario(thresholds: Vec<f64>, trials: usize) -> ScenarioConfig<f64> {
    let mut cfg = Preset::Line5.scenario(thresholds, trials, 3).unwrap();
    cfg.fault.as_mut().unwrap().change_point = 1;
    cfg
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn latency_slope_respects_kl_rate() {
    let cfg = line_scenario(vec![10.0, 20.0, 30.0, 40.0, 50.0], 300);
    let edge = cfg.fault.unwrap().edge;
    let res = run_sweep(&cfg).unwrap();
    for family in [ProbeKind::Classical, ProbeKind::Quantum] {
        let params = cfg.family_params(family);
        let kl = delay_bounds(&cfg.network, &cfg.probes, edge, &params, 0.95, 10.0)
            .unwrap()
            .kl_sum;
        let fit = res.latency_fit(family).unwrap();
        assert!(fit.r_squared >= 0.95, "{family}: {fit:?}");
        assert!(
            fit.slope <= (1.0 + SLACK) / kl,
            "{family}: slope {} vs {}",
            fit.slope,
            1.0 / kl
        );
    }
}

#[test]
fn large_threshold_delay_sits_between_bounds() {
    let h = 50.0;
    let cfg = line_scenario(vec![h], 400);
    let edge = cfg.fault.unwrap().edge;
    for family in [ProbeKind::Classical, ProbeKind::Quantum] {
        let delays: Vec<f64> = (0..cfg.trials as u64)
            .filter_map(|i| run_trial(&cfg, family, i).unwrap()[0].latency(1))
            .map(|l| l as f64)
            .collect();
        assert!(delays.len() >= 390);
        let (mean, se) = mean_and_se(&delays);
        let params = cfg.family_params(family);
        let b = delay_bounds(
            &cfg.network,
            &cfg.probes,
            edge,
            &params,
            0.95,
            gamma_from_threshold(h, 5),
        )
        .unwrap();
        assert!(
            mean >= b.lower - 3.0 * se && mean <= b.upper + 3.0 * se,
            "{family}: {mean} ± {se} outside [{}, {}]",
            b.lower,
            b.upper
        );
    }
}

#[test]
fn fault_free_run_length_exceeds_gamma() {
    let gamma = 20.0;
    let mut cfg = line_scenario(vec![threshold_from_gamma(gamma, 5).unwrap()], 300);
    cfg.fault = None;
    cfg.horizon = 100_000;
    for family in [ProbeKind::Classical, ProbeKind::Quantum] {
        let taus: Vec<f64> = (0..cfg.trials as u64)
            .map(|i| {
                run_trial(&cfg, family, i).unwrap()[0]
                    .tau
                    .unwrap_or(cfg.horizon) as f64
            })
            .collect();
        let (mean, se) = mean_and_se(&taus);
        assert!(mean - 1.645 * se >= gamma, "{family}: {mean} ± {se}");
    }
}

use aoi_core::analysis::{
    default_u_grid, ActivityLaw, stability_max_arrival, EtaModel, EtaOptions, SuccessModel, SuccessOptions,
};
use aoi_core::geometry::{sample_network, StoppingSetSpec, Wrap};
use aoi_core::policy::assign_policies;
use aoi_core::simulator::{empirical_distributions, run_slotted, SimConfig, SimStats};
use aoi_core::SystemParams;

fn simulate(p: &SystemParams, spec: &StoppingSetSpec, window: f64, runs: u64, cfg: impl Fn(u64) -> SimConfig) -> Vec<SimStats> {
    (0..runs)
        .map(|seed| {
            let net = sample_network(p, window, Wrap::Torus, 100 + seed).unwrap();
            let pol = assign_policies(&net, spec, p).unwrap();
            run_slotted(&net, &pol, p, &cfg(seed)).unwrap()
        })
        .collect()
}

fn ks(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn full_buffer_law_matches_dominant_simulation() {
    let p = SystemParams::reference(25.0);
    let spec = StoppingSetSpec::Disk { radius: 200.0 };
    let grid = default_u_grid(p.xi);
    let runs = simulate(&p, &spec, 1000.0, 20, |s| SimConfig::new(10_000, s).dominant(true));
    let emp = empirical_distributions(&runs, &grid).unwrap();
    let distance = |activity| {
        let opts = SuccessOptions { activity, ..SuccessOptions::default() };
        let model = SuccessModel::new(&spec, &p, &opts).unwrap();
        ks(&model.full_buffer(&grid, opts.lattice).unwrap(), &emp.success_cdf)
    };
    let conditional = distance(ActivityLaw::ConditionalLaw);
    assert!(conditional < 0.05, "KS {conditional}");
    // replacing each interferer's access probability by its conditional mean
    // piles the nearest interferers onto a single activity level
    let mean = distance(ActivityLaw::MeanAccess);
    assert!(mean < 0.08, "KS {mean}");
}

#[test]
fn mean_success_matches_simulation() {
    let p = SystemParams::reference(25.0);
    for spec in [StoppingSetSpec::Disk { radius: 100.0 }, StoppingSetSpec::Disk { radius: 200.0 }] {
        let model = SuccessModel::new(&spec, &p, &SuccessOptions::default()).unwrap();
        let mean = model.mean_success(1e-10);
        assert!(mean.converged);
        let runs = simulate(&p, &spec, 1000.0, 10, |s| SimConfig::new(20_000, s));
        let rates: Vec<f64> = runs.iter().flat_map(|r| r.links.iter().filter_map(|l| l.mu_hat())).collect();
        let emp = rates.iter().sum::<f64>() / rates.len() as f64;
        assert!((emp - mean.value).abs() < 0.03, "{spec:?}: {emp} vs {}", mean.value);
    }
}

#[test]
fn stability_bound_separates_regimes() {
    let p = SystemParams::reference(25.0);
    let spec = StoppingSetSpec::Disk { radius: 100.0 };
    let xi_max = stability_max_arrival(&p, &spec).unwrap();
    let unstable = |xi: f64| {
        let q = p.with_xi(xi);
        let runs = simulate(&q, &spec, 1000.0, 4, |s| SimConfig::new(20_000, s));
        let (bad, all) = runs.iter().fold((0, 0), |(b, a), r| {
            (b + (0..r.links.len()).filter(|&i| !r.is_stable(i)).count(), a + r.links.len())
        });
        bad as f64 / all as f64
    };
    // the bound holds for the mean link only; heterogeneous links cross it earlier
    let fractions: Vec<f64> = [0.5, 0.9, 1.5].iter().map(|f| unstable((f * xi_max).min(0.99))).collect();
    assert!(fractions[0] < 0.2, "xi_max={xi_max}: {fractions:?}");
    assert!(fractions[0] < fractions[1] && fractions[1] < fractions[2], "{fractions:?}");
    assert!(fractions[2] > 0.5, "xi_max={xi_max}: {fractions:?}");
}

#[test]
fn nearest_rule_uses_equal_area_disk() {
    let p = SystemParams::reference(50.0);
    let spec = StoppingSetSpec::NearestReceivers { p: 4 };
    let d = EtaModel::new(&spec, &p, EtaOptions::default()).unwrap().distribution();
    let mut gammas = Vec::new();
    for seed in 0..40 {
        let net = sample_network(&p, 2000.0, Wrap::Torus, seed).unwrap();
        gammas.extend(assign_policies(&net, &spec, &p).unwrap().gamma);
    }
    let n = gammas.len() as f64;
    let emp: Vec<f64> = d.kappa_grid.iter().map(|&k| gammas.iter().filter(|&&g| g > k).count() as f64 / n).collect();
    let dist = ks(&emp, &d.ccdf);
    assert!(dist < 0.05, "KS {dist}");
}

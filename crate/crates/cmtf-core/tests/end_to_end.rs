//! End-to-end checks through the public API: generate a coupled dataset,
//! fit it with both solvers, score the recovered factors, and round-trip
//! the data through the text format.

use cmtf_core::coupled::CoupledDataset;
use cmtf_core::eval::{fms, normalize_model};
use cmtf_core::io;
use cmtf_core::solver::{cmtf_als, cmtf_opt, Init, LineSearchConfig, StopConfig};
use cmtf_core::synth::{gen_mask, gen_scenario, Scenario, ScenarioConfig, WeightMode};

fn small_config(scenario: Scenario, eta: f64, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::desk(scenario, eta, WeightMode::Unit, seed);
    cfg.shape = vec![8, 7, 6];
    cfg.side_dims = match scenario {
        Scenario::TensorMatrix => vec![5],
        Scenario::TensorTensor | Scenario::TensorTwoMatrices => vec![5, 5],
    };
    cfg
}

#[test]
fn both_solvers_recover_a_noiseless_coupled_model() {
    let cfg = small_config(Scenario::TensorMatrix, 0.0, 42);
    let truth = gen_scenario(&cfg).unwrap();
    let truth_wk = truth.to_weighted_kruskal();

    let opt_fit = cmtf_opt(
        &truth.dataset,
        cfg.rank,
        &Init::Svd(43),
        &StopConfig::opt_default(),
        &LineSearchConfig::default(),
    )
    .unwrap();
    let als_fit = cmtf_als(
        &truth.dataset,
        cfg.rank,
        &Init::Svd(43),
        &StopConfig {
            rel_func_tol: 1e-14,
            ..StopConfig::als_default()
        },
    )
    .unwrap();

    for (name, fit) in [("opt", &opt_fit), ("als", &als_fit)] {
        assert!(
            fit.final_objective() <= 1e-8,
            "{} objective {}",
            name,
            fit.final_objective()
        );
        let est = normalize_model(&fit.model, &truth.side_modes).unwrap();
        let report = fms(&truth_wk, &est).unwrap();
        assert!(report.score >= 0.9999, "{} fms {}", name, report.score);
    }
}

#[test]
fn masked_fit_completes_held_out_entries() {
    let cfg = small_config(Scenario::TensorMatrix, 0.0, 7);
    let truth = gen_scenario(&cfg).unwrap();
    let mask = gen_mask(&cfg.shape, 0.4, 8).unwrap();
    let data = CoupledDataset::new(
        truth.dataset.tensor.clone(),
        Some(mask.clone()),
        truth.dataset.sides.clone(),
    )
    .unwrap();

    let fit = cmtf_opt(
        &data,
        cfg.rank,
        &Init::Svd(9),
        &StopConfig::opt_default(),
        &LineSearchConfig::default(),
    )
    .unwrap();
    let est = normalize_model(&fit.model, &truth.side_modes).unwrap();
    let recon = est.reconstruct_tensor();
    let mut max_missing_err: f64 = 0.0;
    for ((x, w), r) in truth
        .dataset
        .tensor
        .data()
        .iter()
        .zip(mask.data())
        .zip(recon.data())
    {
        if *w == 0.0 {
            max_missing_err = max_missing_err.max((x - r).abs());
        }
    }
    assert!(
        max_missing_err <= 1e-4,
        "worst held-out entry error {}",
        max_missing_err
    );
}

#[test]
fn text_round_trip_preserves_fit_results_exactly() {
    let cfg = small_config(Scenario::TensorTwoMatrices, 0.1, 11);
    let truth = gen_scenario(&cfg).unwrap();

    let dir = std::env::temp_dir().join(format!(
        "cmtf-core-e2e-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    io::write_tensor(dir.join("tensor.txt"), &truth.dataset.tensor).unwrap();
    for (i, (_, y)) in truth.dataset.sides.iter().enumerate() {
        io::write_matrix(dir.join(format!("side{}.txt", i)), y).unwrap();
    }

    let tensor = io::read_tensor(dir.join("tensor.txt")).unwrap();
    let sides = truth
        .dataset
        .sides
        .iter()
        .enumerate()
        .map(|(i, (mode, _))| {
            (*mode, io::read_matrix(dir.join(format!("side{}.txt", i))).unwrap())
        })
        .collect();
    let reread = CoupledDataset::new(tensor, None, sides).unwrap();
    assert_eq!(reread.tensor, truth.dataset.tensor);
    assert_eq!(reread.sides, truth.dataset.sides);

    // identical inputs and seed must give bit-identical fits
    let stop = StopConfig {
        max_iterations: 40,
        ..StopConfig::als_default()
    };
    let a = cmtf_als(&truth.dataset, cfg.rank, &Init::Seed(12), &stop).unwrap();
    let b = cmtf_als(&reread, cfg.rank, &Init::Seed(12), &stop).unwrap();
    assert_eq!(a.objective_trace, b.objective_trace);
    assert_eq!(a.model, b.model);
    std::fs::remove_dir_all(&dir).ok();
}

use epsurr::experiment::{box_radii, generate_instance, ExperimentConfig};
use epsurr::ndarray::Array2;
use epsurr::solver::{
    default_schedule, gep_mscra, lambda_multiplier, numerical_rank, DecompositionInstance,
    SolverOptions,
};
use epsurr::PhiSpec;

fn small_problem(seed: u64) -> (DecompositionInstance, Array2<f64>) {
    let config = ExperimentConfig::new(30, 3, 0.05, 0.1, 1, seed);
    let inst = generate_instance(&config, 0);
    let radii = box_radii(inst.m_r.view(), inst.m_s.view()).unwrap();
    (
        DecompositionInstance::with_radii(inst.m, radii.gamma1, radii.gamma2).unwrap(),
        inst.m_r,
    )
}

#[test]
fn zero_data_stops_after_one_stage() {
    let problem = DecompositionInstance::with_radii(Array2::zeros((6, 4)), 1.0, 1.0).unwrap();
    let report = gep_mscra(
        &problem,
        &PhiSpec::default_scad(),
        &default_schedule(6),
        &SolverOptions::standard(),
    )
    .unwrap();
    assert!(report.status.zero_data);
    assert_eq!(report.outer_iters, 1);
    assert_eq!(report.final_rank, 0);
    assert_eq!(report.final_sparsity, 0);
    assert_eq!(report.x_hat.dim(), (6, 4));
}

#[test]
fn stages_are_feasible_and_certified() {
    let (problem, _) = small_problem(7);
    let report = gep_mscra(
        &problem,
        &PhiSpec::default_scad(),
        &default_schedule(problem.n()),
        &SolverOptions::standard(),
    )
    .unwrap();
    assert!(report.certificates_hold(problem.gamma1(), problem.gamma2()));
    assert!(report.outer_iters >= 1 && report.outer_iters <= 50);
    assert_eq!(report.stages.len(), report.outer_iters);
    assert_eq!(
        report.final_rank,
        numerical_rank(report.x_hat.view(), default_schedule(30).rank_rel_tol).unwrap()
    );
    assert!(report.final_objective.is_finite());
}

#[test]
fn solver_is_deterministic() {
    let (problem, _) = small_problem(11);
    let schedule = default_schedule(problem.n());
    let opts = SolverOptions::standard();
    let a = gep_mscra(&problem, &PhiSpec::default_scad(), &schedule, &opts).unwrap();
    let b = gep_mscra(&problem, &PhiSpec::default_scad(), &schedule, &opts).unwrap();
    assert_eq!(a.x_hat, b.x_hat);
    assert_eq!(a.y_hat, b.y_hat);
    assert_eq!(a.residual_history, b.residual_history);
}

#[test]
fn wide_and_tall_inputs_agree_up_to_transpose() {
    let m = Array2::from_shape_fn((5, 8), |(i, j)| ((i * 3 + j * 7) % 11) as f64 / 4.0 - 1.0);
    let opts = SolverOptions::standard();
    let wide = DecompositionInstance::with_radii(m.clone(), 20.0, 5.0).unwrap();
    let tall = DecompositionInstance::with_radii(m.t().to_owned(), 20.0, 5.0).unwrap();
    let phi = PhiSpec::default_scad();
    let a = gep_mscra(&wide, &phi, &default_schedule(8), &opts).unwrap();
    let b = gep_mscra(&tall, &phi, &default_schedule(8), &opts).unwrap();
    assert_eq!(a.x_hat.dim(), (5, 8));
    assert_eq!(b.x_hat.dim(), (8, 5));
    for (x, y) in a.x_hat.iter().zip(b.x_hat.t().iter()) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn report_serializes_without_matrices() {
    let (problem, _) = small_problem(3);
    let report = gep_mscra(
        &problem,
        &PhiSpec::default_scad(),
        &default_schedule(problem.n()),
        &SolverOptions::standard(),
    )
    .unwrap();
    let json: serde_json::Value = serde_json::to_value(&report).unwrap();
    assert!(json.get("x_hat").is_none());
    assert_eq!(
        json["outer_iters"].as_u64().unwrap() as usize,
        report.outer_iters
    );
    assert!(json["stages"].is_array());
}

#[test]
fn lambda_multiplier_is_clamped() {
    assert_eq!(lambda_multiplier(10), 20.0);
    assert_eq!(lambda_multiplier(400), 22.5);
    assert_eq!(lambda_multiplier(10_000), 100.0);
}

#[test]
fn schedule_rejects_bad_values() {
    let mut schedule = default_schedule(50);
    schedule.tau.clear();
    assert!(schedule.validate().is_err());
    let mut schedule = default_schedule(50);
    schedule.lambda1 = -1.0;
    assert!(schedule.validate().is_err());
}

use std::collections::HashSet;

use super::*;
use crate::problems::make_least_squares;
use crate::solvers::StartPoint;

fn realizable() -> ProblemSpec {
    make_least_squares(4, &[1.0; 4], 2.0, 0.0, 11).unwrap()
}

fn plan(problem: ProblemSpec, algorithm: Algorithm, start: StartPoint) -> ExperimentPlan {
    ExperimentPlan {
        problem,
        solver: SolverConfig { algorithm, start },
        budget_grid: vec![64, 256, 1024],
        trials: 8,
        base_seed: 5,
        threads: Some(2),
        record_epochs: true,
    }
}

fn algorithms() -> Vec<Algorithm> {
    vec![
        Algorithm::EpochGd {
            first_step: 2.0,
            first_length: 4,
        },
        Algorithm::Fasa { alpha: 2.0 },
        Algorithm::EpochGdF { beta: 2.0 },
        Algorithm::FixedSgd {
            gamma: 0.25,
            constrained: true,
        },
        Algorithm::FixedSgd {
            gamma: 0.25,
            constrained: false,
        },
    ]
}

#[test]
fn optimum_start_stays_at_zero_excess() {
    for algorithm in algorithms() {
        let mut p = plan(realizable(), algorithm.clone(), StartPoint::Optimum);
        p.trials = 1;
        let r = run_trials(&p).unwrap();
        for b in &r.budgets {
            assert_eq!(b.trials.len(), 1);
            assert!(b.trials[0].excess.abs() < 1e-20, "{algorithm}: {}", b.trials[0].excess);
        }
    }
}

#[test]
fn identical_plans_give_identical_samples() {
    let p = plan(
        make_least_squares(4, &[1.0; 4], 2.0, 0.3, 2).unwrap(),
        Algorithm::Fasa { alpha: 2.0 },
        StartPoint::Boundary,
    );
    let a = run_trials(&p).unwrap();
    let mut q = p.clone();
    q.threads = Some(1);
    let b = run_trials(&q).unwrap();
    assert_eq!(a.budgets, b.budgets);
}

#[test]
fn least_squares_excess_is_nonnegative() {
    for algorithm in algorithms() {
        let p = plan(
            make_least_squares(4, &[1.0; 4], 2.0, 0.3, 3).unwrap(),
            algorithm,
            StartPoint::Boundary,
        );
        for b in run_trials(&p).unwrap().budgets {
            assert!(b.trials.iter().all(|t| t.excess >= 0.0));
        }
    }
}

#[test]
fn results_are_indexed_and_seeded_distinctly() {
    let p = plan(realizable(), Algorithm::EpochGdF { beta: 2.0 }, StartPoint::Center);
    let r = run_trials(&p).unwrap();
    let mut seeds = HashSet::new();
    for (b, budget) in r.budgets.iter().zip(&p.budget_grid) {
        assert_eq!(b.budget, *budget);
        for (j, t) in b.trials.iter().enumerate() {
            assert_eq!(t.trial, j);
            assert_eq!(t.budget, *budget);
            assert_eq!(t.seed, trial_seed(p.base_seed, *budget, j));
            assert!(seeds.insert(t.seed));
            assert_eq!(t.epoch_excess.len(), t.k_dagger + 1);
        }
    }
}

#[test]
fn plan_validation() {
    let mut p = plan(realizable(), Algorithm::Fasa { alpha: 2.0 }, StartPoint::Center);
    p.trials = 0;
    assert!(run_trials(&p).is_err());
    p.trials = 1;
    p.budget_grid = vec![64, 64];
    assert!(run_trials(&p).is_err());
    p.budget_grid = vec![];
    assert!(run_trials(&p).is_err());
    p.budget_grid = vec![0, 4];
    assert!(run_trials(&p).is_err());
}

#[test]
fn failing_trial_aborts() {
    // γ ≥ 1/λ is rejected by the solver
    let p = plan(
        realizable(),
        Algorithm::FixedSgd {
            gamma: 10.0,
            constrained: true,
        },
        StartPoint::Center,
    );
    assert!(run_trials(&p).is_err());
}

#[test]
fn summary_matches_textbook_formula() {
    let s = summarize(&[1.0, 2.0, 3.0, 6.0]).unwrap();
    assert_eq!(s.mean, 3.0);
    // sample variance 14/3
    assert!((s.std_error - (14.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    assert_eq!(summarize(&[2.5]).unwrap().std_error, 0.0);
    assert!(summarize(&[]).is_err());
}

#[test]
fn governing_bounds_hold_on_a_small_run() {
    for algorithm in algorithms() {
        let p = plan(
            make_least_squares(4, &[1.0; 4], 2.0, 0.3, 9).unwrap(),
            algorithm.clone(),
            StartPoint::Boundary,
        );
        let r = run_trials(&p).unwrap();
        for b in &r.budgets {
            let report = governing_bound(&p, &r, b).unwrap();
            assert!(report.verdict_is_consistent());
            assert!(report.satisfied, "{algorithm} at {}: {report:?}", b.budget);
        }
    }
}

#[test]
fn theorem2_uses_initial_risk_and_k_dagger() {
    let p = plan(realizable(), Algorithm::EpochGdF { beta: 2.0 }, StartPoint::Boundary);
    let r = run_trials(&p).unwrap();
    // boundary start at distance 3 from w*, F(w₀) = 9/4
    assert!((r.initial_risk - 2.25).abs() < 1e-12);
    let last = r.budgets.last().unwrap();
    assert_eq!(last.k_dagger(), 1024 / 128);
    let report = governing_bound(&p, &r, last).unwrap();
    assert_eq!(report.theorem, TheoremKind::Thm2);
    assert!((report.theoretical_rhs - 2.25 / 256.0).abs() < 1e-15);
}

#[test]
fn distance_bound_requires_fixed_step() {
    let p = plan(realizable(), Algorithm::Fasa { alpha: 2.0 }, StartPoint::Center);
    let r = run_trials(&p).unwrap();
    assert!(distance_bound(&p, &r, &r.budgets[0]).is_err());

    let p = plan(
        realizable(),
        Algorithm::FixedSgd {
            gamma: 0.25,
            constrained: false,
        },
        StartPoint::Boundary,
    );
    let r = run_trials(&p).unwrap();
    for b in &r.budgets {
        let rep = distance_bound(&p, &r, b).unwrap();
        assert!(rep.satisfied, "{rep:?}");
    }
}

#[test]
fn monotone_means_are_not_flagged() {
    let p = plan(realizable(), Algorithm::EpochGdF { beta: 2.0 }, StartPoint::Boundary);
    let r = run_trials(&p).unwrap();
    assert!(monotonicity_flags(&r).unwrap().is_empty());
}

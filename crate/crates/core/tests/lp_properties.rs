use flexsky::lp::{convex_combination_dominates, verify_combination, LinearProgram, LpStatus};
use flexsky::{ScoreMatrix, Sense};
use proptest::prelude::*;

fn matrix(rows: Vec<Vec<f64>>) -> ScoreMatrix<f64> {
    let ids = (0..rows.len()).map(|i| format!("t{i}")).collect();
    ScoreMatrix::from_rows(ids, rows).unwrap()
}

/// `min over λ on a grid of max_v (Σ λⱼ S[j][v] − S[target][v])`, for two or
/// three candidates.
fn grid_delta(s: &ScoreMatrix<f64>, cands: &[usize], target: usize, steps: usize) -> f64 {
    let gap = |lambda: &[f64]| {
        (0..s.vertex_count())
            .map(|v| {
                let mix: f64 = cands.iter().zip(lambda).map(|(&c, &l)| l * s.get(c, v)).sum();
                mix - s.get(target, v)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let a = i as f64 / steps as f64;
        if cands.len() == 2 {
            best = best.min(gap(&[a, 1.0 - a]));
            continue;
        }
        for j in 0..=steps - i {
            let b = j as f64 / steps as f64;
            best = best.min(gap(&[a, b, (1.0 - a - b).max(0.0)]));
        }
    }
    best
}

proptest! {
    #[test]
    fn delta_agrees_with_a_mixture_grid(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 3..5),
    ) {
        let s = matrix(rows);
        let target = s.len() - 1;
        let cands: Vec<usize> = (0..target).collect();
        let names: Vec<&str> = cands.iter().map(|&c| s.id(c)).collect();
        let test = convex_combination_dominates(&s, &names, s.id(target), 1e-9).unwrap();
        let steps = 200;
        let grid = grid_delta(&s, &cands, target, steps);
        // The grid can only do worse than the optimum, and by at most one
        // step times the largest score.
        prop_assert!(grid >= test.delta - 1e-9, "grid {} below δ* {}", grid, test.delta);
        prop_assert!(grid <= test.delta + 2.0 / steps as f64, "grid {} far above δ* {}", grid, test.delta);
        if grid < -1e-3 {
            prop_assert!(test.dominated);
        }
        if test.delta > 1e-3 {
            prop_assert!(!test.dominated);
        }
        if let Some(w) = &test.witness {
            prop_assert!(verify_combination(&s, w, s.id(target), 1e-9).unwrap());
        }
    }

    #[test]
    fn optimal_points_are_feasible_and_beat_samples(
        n in 2usize..6,
        c in prop::collection::vec(-1.0f64..1.0, 6),
        rows in prop::collection::vec((prop::collection::vec(-1.0f64..1.0, 6), 0.1f64..3.0), 1..6),
        samples in prop::collection::vec(prop::collection::vec(0.0f64..4.0, 6), 40),
    ) {
        let mut lp = LinearProgram::minimize(c[..n].to_vec());
        for j in 0..n {
            lp = lp.bounds(j, Some(0.0), Some(4.0));
        }
        for (a, b) in &rows {
            lp = lp.constraint(a[..n].to_vec(), Sense::Le, *b);
        }
        let out = lp.solve().unwrap();
        prop_assert_eq!(out.status, LpStatus::Optimal);
        let x = out.point.unwrap();
        let value = out.value.unwrap();
        prop_assert!(lp.max_violation(&x) <= 1e-9);
        let obj = |p: &[f64]| p.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((obj(&x) - value).abs() <= 1e-9);
        for p in &samples {
            let p = &p[..n];
            if lp.max_violation(p) <= 0.0 {
                prop_assert!(obj(p) >= value - 1e-9);
            }
        }
    }
}

#[test]
fn infeasible_and_unbounded_programs() {
    let lp = LinearProgram::minimize(vec![1.0, 1.0])
        .constraint(vec![1.0, 1.0], Sense::Le, 1.0)
        .constraint(vec![1.0, 1.0], Sense::Ge, 2.0);
    assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);
    let lp = LinearProgram::minimize(vec![-1.0, 0.0]).constraint(vec![0.0, 1.0], Sense::Le, 1.0);
    assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
}

#[test]
fn a_midpoint_mixture_dominates() {
    let s = matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.6, 0.6]]);
    let t = convex_combination_dominates(&s, &["t0", "t1"], "t2", 1e-9).unwrap();
    assert!(t.dominated);
    assert!((t.delta + 0.1).abs() < 1e-12);
    assert!(verify_combination(&s, &t.witness.unwrap(), "t2", 1e-9).unwrap());
    let s = matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.4, 0.4]]);
    let t = convex_combination_dominates(&s, &["t0", "t1"], "t2", 1e-9).unwrap();
    assert!(!t.dominated && t.witness.is_none());
}

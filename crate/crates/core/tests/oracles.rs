use patchlearn_core::anfis::uniform_mfs;
use patchlearn_core::baselines::poly_fit;
use patchlearn_core::datasets::{gen_sysid, integrate_mackey_glass, MackeyGlassConfig};
use patchlearn_core::partition::{candidate_boxes, flat_index, multi_index};
use patchlearn_core::{LabeledSet, TrapezoidalMf, TskSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Forward Euler with a fine step and the same constant pre-history.
fn euler_mackey_glass(h: f64, t_end: f64, tau: f64, x0: f64) -> Vec<f64> {
    let per_unit = (1.0 / h).round() as usize;
    let delay = (tau / h).round() as usize;
    let n = (t_end / h).round() as usize;
    let mut x = Vec::with_capacity(n + 1);
    x.push(x0);
    for i in 0..n {
        let lagged = if i >= delay { x[i - delay] } else { x0 };
        let dx = 0.2 * lagged / (1.0 + lagged.powi(10)) - 0.1 * x[i];
        x.push(x[i] + h * dx);
    }
    x.iter().step_by(per_unit).cloned().collect()
}

#[test]
fn mackey_glass_agrees_with_fine_euler() {
    let cfg = MackeyGlassConfig::default();
    let rk4 = integrate_mackey_glass(&cfg).unwrap();
    assert_eq!(rk4.len(), 1118);
    let euler = euler_mackey_glass(1e-4, 100.0, 17.0, 1.2);
    let worst = (0..=100).map(|t| (rk4[t] - euler[t]).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "max deviation {worst}");
    assert!(rk4.iter().all(|&v| v > 0.0 && v < 1.6));
}

#[test]
fn plant_recurrence_recovers_f() {
    let s = gen_sysid();
    for k in 2..=700 {
        let f = s.recovered_f(k);
        assert!((f - s.pairs.target(k - 1)).abs() < 1e-12, "k={k}");
    }
}

/// Normal equations solved by Gauss-Jordan elimination with partial pivoting.
fn normal_equations_quadratic(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    let mut a = [[0.0f64; 4]; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let f = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += f[i] * f[j];
            }
            a[i][3] += f[i] * y;
        }
    }
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for r in 0..3 {
            if r != c {
                let f = a[r][c] / a[c][c];
                let pivot = a[c];
                for (v, p) in a[r].iter_mut().zip(pivot).skip(c) {
                    *v -= f * p;
                }
            }
        }
    }
    [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]]
}

#[test]
fn quadratic_fit_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let xs: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + 0.5 * x * x + rng.random_range(-0.3..0.3)).collect();
        let data = LabeledSet::from_rows(1, xs.iter().zip(&ys).map(|(&x, &y)| (vec![x], y))).unwrap();
        let fit = poly_fit(&data, 2).unwrap();
        let oracle = normal_equations_quadratic(&xs, &ys);
        for (a, b) in fit.coefficients.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{:?} vs {oracle:?}", fit.coefficients);
        }
    }
}

#[test]
fn uniform_init_uses_equal_segments() {
    // 2K − 1 segments: plateaus and ramps all have width (hi − lo)/(2K − 1).
    for k in 2..=5 {
        let mfs = uniform_mfs(-1.0, 8.0, k);
        let w = 9.0 / (2 * k - 1) as f64;
        let mut expected = Vec::new();
        for j in 0..k {
            let start = -1.0 + 2.0 * j as f64 * w;
            let a = if j == 0 { -1.0 } else { start - w };
            let d = if j == k - 1 { 8.0 } else { start + 2.0 * w };
            expected.push([a, start, start + w, d]);
        }
        for (m, e) in mfs.iter().zip(&expected) {
            for (u, v) in m.breakpoints().iter().zip(e) {
                assert!((u - v).abs() < 1e-12, "k={k}: {:?} vs {e:?}", m.breakpoints());
            }
        }
    }
}

#[test]
fn thousand_random_grids_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 1000 {
        let m = rng.random_range(1..=6);
        let dims: Vec<usize> = (0..m).map(|_| rng.random_range(1..=12)).collect();
        let total: usize = dims.iter().product();
        if total > 100_000 {
            continue;
        }
        for k in 1..=total {
            assert_eq!(flat_index(&multi_index(k, &dims).unwrap(), &dims).unwrap(), k);
        }
        checked += 1;
    }
}

#[test]
fn three_by_three_grid_from_two_trapezoids() {
    let mf = |a, b, c, d| TrapezoidalMf::new(a, b, c, d).unwrap();
    let per = vec![mf(0.0, 0.0, 2.0, 4.0), mf(2.0, 4.0, 6.0, 6.0)];
    let sys = TskSystem::new(vec![per.clone(), per], vec![(0.0, 6.0), (0.0, 6.0)]).unwrap();
    let boxes = candidate_boxes(&sys).unwrap();
    assert_eq!(boxes.len(), 9);
    // Last dimension fastest: box 2 is (1, 2).
    assert_eq!(boxes[1].multi_index, vec![1, 2]);
    assert_eq!((boxes[1].lo.clone(), boxes[1].hi.clone()), (vec![0.0, 2.0], vec![2.0, 4.0]));
    assert_eq!(boxes[8].upper_closed, vec![true, true]);
}

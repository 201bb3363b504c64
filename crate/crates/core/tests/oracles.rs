use num_rational::Ratio;
use thinfilm_core::linear::{char_roots, eigenfunction_oracle, eval_poly};
use thinfilm_core::radial::{integrate, origin_series, series_recurrence, uniform_grid, IntegrateOptions, Sampling, StartKind};
use thinfilm_core::{Sign, SimilarityParams};

type Q = Ratio<i128>;

fn q(a: i128, b: i128) -> Q {
    Q::new(a, b)
}

/// Printed closed forms: (k, seed, [(power, coefficient as a function of N)]).
fn printed(k: u32, dim: i128) -> Vec<(usize, Q)> {
    match k {
        1 => vec![(2, q(1, 2))],
        2 => vec![(0, q(1, 1)), (4, q(1, 8 * dim * (dim + 2)))],
        3 => vec![(2, q(1, 2)), (6, q(1, 48 * (dim + 2) * (dim + 4)))],
        4 => vec![(0, q(1, 1)), (4, q(1, 4 * dim * (dim + 2))), (8, q(1, 192 * dim * (dim + 2) * (dim + 4) * (dim + 6)))],
        _ => unreachable!(),
    }
}

#[test]
fn recurrence_reproduces_printed_coefficients_exactly() {
    for k in 1..=4u32 {
        for dim in 1..=3u32 {
            let (c0, c2) = if k % 2 == 0 { (q(1, 1), q(0, 1)) } else { (q(0, 1), q(1, 2)) };
            let c = series_recurrence(q(k as i128, 2), q(1, 4), q(1, 1), dim, c0, c2, k as usize + 3);
            let expect = printed(k, dim as i128);
            for (i, v) in c.iter().enumerate() {
                let want = expect.iter().find(|e| e.0 == 2 * i).map_or(q(0, 1), |e| e.1);
                assert_eq!(*v, want, "k = {k}, N = {dim}, power {}", 2 * i);
            }
        }
    }
}

#[test]
fn integrated_profiles_match_closed_forms() {
    let opts = IntegrateOptions { rescale_threshold: None, ..IntegrateOptions::default() };
    for k in 1..=4u32 {
        for dim in 1..=3u32 {
            let p = SimilarityParams::focusing(0.0, dim, 0.5 * k as f64).unwrap();
            let kind = StartKind::for_branch(k);
            let start = origin_series(&p, kind, 1e-2, 0.0).unwrap();
            let grid = uniform_grid(0.1, 5.0, 50);
            let tr = integrate(&p, &start, 5.0, &opts, &Sampling::At(grid)).unwrap();
            let poly = eigenfunction_oracle(k, dim).unwrap();
            for s in &tr.samples {
                let want = eval_poly(&poly, s.state.y);
                let got = s.unscaled_f();
                assert!((got - want).abs() <= 1e-8 * want.abs().max(1e-300), "k = {k}, N = {dim}, y = {}: {got} vs {want}", s.state.y);
            }
        }
    }
}

/// Classical RK4 for `Δ²f = αf − βyf'` in the variables `(f, f', f'', f''')`,
/// using `Δ² = D⁴ + 2a/y D³ + a(a−2)/y² D² − a(a−2)/y³ D` with `a = N − 1`.
fn rk4_oracle(dim: u32, alpha: f64, y0: f64, state0: [f64; 4], y1: f64, h: f64) -> [f64; 4] {
    let nd = dim as f64;
    let beta = 0.25;
    let rhs = |y: f64, u: [f64; 4]| -> [f64; 4] {
        let [f, f1, f2, f3] = u;
        let a = nd - 1.0;
        let lap_terms = 2.0 * a / y * f3 + a * (a - 2.0) / (y * y) * f2 - a * (a - 2.0) / (y * y * y) * f1;
        let f4 = alpha * f - beta * y * f1 - lap_terms;
        [f1, f2, f3, f4]
    };
    let steps = ((y1 - y0) / h).round() as usize;
    let h = (y1 - y0) / steps as f64;
    let mut u = state0;
    let mut y = y0;
    for _ in 0..steps {
        let k1 = rhs(y, u);
        let k2 = rhs(y + 0.5 * h, core::array::from_fn(|i| u[i] + 0.5 * h * k1[i]));
        let k3 = rhs(y + 0.5 * h, core::array::from_fn(|i| u[i] + 0.5 * h * k2[i]));
        let k4 = rhs(y + h, core::array::from_fn(|i| u[i] + h * k3[i]));
        u = core::array::from_fn(|i| u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        y += h;
    }
    u
}

#[test]
fn integrator_agrees_with_rk4_oracle() {
    let (dim, alpha) = (2, 0.75);
    let p = SimilarityParams::focusing(0.0, dim, alpha).unwrap();
    let start = origin_series(&p, StartKind::Sh1, 1e-2, 0.0).unwrap();
    let y0 = start.y_start;
    // Seed the oracle from the same series.
    let [c0, c2, c4, c6] = start.series;
    let s0 = [
        c0 + c2 * y0.powi(2) + c4 * y0.powi(4) + c6 * y0.powi(6),
        2.0 * c2 * y0 + 4.0 * c4 * y0.powi(3) + 6.0 * c6 * y0.powi(5),
        2.0 * c2 + 12.0 * c4 * y0.powi(2) + 30.0 * c6 * y0.powi(4),
        24.0 * c4 * y0 + 120.0 * c6 * y0.powi(3),
    ];
    let oracle = rk4_oracle(dim, alpha, y0, s0, 5.0, 1e-4);
    let opts = IntegrateOptions { rescale_threshold: None, ..IntegrateOptions::default() };
    let tr = integrate(&p, &start, 5.0, &opts, &Sampling::At(vec![5.0])).unwrap();
    let s = tr.last().unwrap();
    assert!((s.unscaled_f() - oracle[0]).abs() <= 1e-9 * oracle[0].abs(), "{} vs {}", s.unscaled_f(), oracle[0]);
    assert!((s.unscaled_df() - oracle[1]).abs() <= 1e-9 * oracle[1].abs());
}

#[test]
fn characteristic_roots_solve_cubics() {
    for sign in [Sign::Focusing, Sign::Defocusing] {
        let r = char_roots(sign);
        let rhs = r.cubic_rhs();
        for a in [r.a1, r.a2, num_complex::Complex64::new(r.a3, 0.0)] {
            assert!((a * a * a - rhs).norm() < 1e-12);
        }
    }
    let r = char_roots(Sign::Focusing);
    assert!((r.c0 - 0.2362352).abs() < 1e-6);
    // The printed decimal for c₁ is 0.4091742; the closed form gives 0.40917136…
    assert!((r.c1 - 0.40917136).abs() < 1e-7);
}

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rpsmooth::matops::{solve_filter_are, solve_lyapunov, solve_robust_are, Branch};
use rpsmooth::Mat;
use rpsmooth_bench::{ou, resonant};

fn riccati(c: &mut Criterion) {
    let one = Mat::scalar(1.0);
    for fx in [ou(0.8), resonant(0.8)] {
        let m = &fx.model;
        c.bench_function(&format!("filter_are/{}", fx.name), |b| {
            b.iter(|| solve_filter_are(black_box(&m.a), &m.b, &fx.c, &one, &one).unwrap())
        });

        let w = &fx.uncertainty.b1 * &fx.uncertainty.b1.transpose();
        let k = &fx.uncertainty.k;
        let mm = (&(&k.transpose() * k) - &(&fx.c.transpose() * &fx.c)).symmetrize();
        c.bench_function(&format!("robust_are/{}", fx.name), |b| {
            b.iter(|| {
                let x = solve_robust_are(black_box(&m.a), &w, &mm, Branch::Forward).unwrap();
                let y = solve_robust_are(black_box(&m.a), &w, &mm, Branch::Backward).unwrap();
                (x, y)
            })
        });
    }
}

fn lyapunov(c: &mut Criterion) {
    for n in [2, 4, 8] {
        // Tridiagonal Hurwitz matrix with a dense positive definite forcing.
        let a = Mat::new(
            n,
            n,
            (0..n * n)
                .map(|k| match (k / n) as isize - (k % n) as isize {
                    0 => -2.0,
                    1 => 0.7,
                    -1 => -0.4,
                    _ => 0.0,
                })
                .collect(),
        )
        .unwrap();
        let q = Mat::new(n, n, (0..n * n).map(|k| if k / n == k % n { 2.0 } else { 0.3 }).collect()).unwrap();
        c.bench_function(&format!("lyapunov/n{n}"), |b| {
            b.iter(|| solve_lyapunov(black_box(&a), &q).unwrap())
        });
    }
}

criterion_group!(benches, riccati, lyapunov);
criterion_main!(benches);

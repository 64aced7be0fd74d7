use heatwave::gronwall::*;
use heatwave::kernels::heat_kernel;
use heatwave::quadrature::Quadrature;
use heatwave::special::erfc;

fn interior(t: f64, x: f64) -> bool {
    t >= 0.1 - 1e-12 && x.abs() <= 4.0 * t.sqrt()
}

fn worst_relative(series: &GridField, kernel: KernelVariant) -> f64 {
    let grid = series.grid;
    let mut worst: f64 = 0.0;
    for i in 0..grid.nt() {
        let t = grid.time(i, Sampling::EndPoint);
        for k in 0..grid.nx() {
            let x = grid.x(k);
            if !interior(t, x) {
                continue;
            }
            let closed = resolvent_closed(kernel, t, x).unwrap();
            worst = worst.max((series.at(i, k) - closed).abs() / closed);
        }
    }
    worst
}

#[test]
fn heat_kernel_chapman_kolmogorov_in_time() {
    // Gamma * Gamma over ]0, t] x R equals t Gamma(t, .).
    let grid = SpaceTimeGrid::symmetric(0.5, 0.01, 6.0, 0.05).unwrap();
    let g = sample_j(Variant::Deterministic, grid);
    let conv = convolve_st(&g, &g).unwrap();
    for i in [19, 29, 49] {
        let t = grid.time(i, Sampling::EndPoint);
        for k in (0..grid.nx()).step_by(10) {
            let x = grid.x(k);
            if x.abs() > 2.0 {
                continue;
            }
            let exact = t * heat_kernel(t, x).unwrap();
            assert!((conv.at(i, k) - exact).abs() < 2e-3 * exact, "t={t} x={x}");
        }
    }
}

#[test]
fn first_series_term_is_the_kernel() {
    let grid = SpaceTimeGrid::symmetric(0.2, 0.01, 2.0, 0.05).unwrap();
    let k = KernelVariant::new(Variant::Deterministic, 1.0).unwrap();
    let s = resolvent_series(k, grid, 1).unwrap();
    for i in 0..grid.nt() {
        let t = grid.time(i, Sampling::EndPoint);
        for kx in 0..grid.nx() {
            assert_eq!(s.at(i, kx), heat_kernel(t, grid.x(kx)).unwrap());
        }
    }
}

#[test]
fn deterministic_series_matches_closed_form() {
    let hw = truncation_half_width(1.0, 1.0);
    let grid = SpaceTimeGrid::symmetric(1.0, 2e-3, hw, 0.04).unwrap();
    let k = KernelVariant::new(Variant::Deterministic, 1.0).unwrap();
    let s = resolvent_series(k, grid, 12).unwrap();
    assert!(worst_relative(&s, k) <= 0.05);
    // Partial sums of C^l t^{l-1} / (l-1)! at t = 1 approach e.
    let i = grid.nt() - 1;
    let centre = s.at(i, grid.origin()) / heat_kernel(1.0, 0.0).unwrap();
    assert!((centre - std::f64::consts::E).abs() < 1e-3);
}

#[test]
fn stochastic_series_matches_closed_form() {
    let grid = SpaceTimeGrid::symmetric(1.0, 1e-3, 8.0, 0.04).unwrap();
    let k = KernelVariant::new(Variant::Stochastic, 1.0).unwrap();
    let s = resolvent_series(k, grid, 10).unwrap();
    assert!(worst_relative(&s, k) <= 0.10);
}

#[test]
fn series_is_positive() {
    let grid = SpaceTimeGrid::symmetric(0.5, 5e-3, 6.0, 0.05).unwrap();
    for v in Variant::ALL {
        let s = resolvent_series(KernelVariant::new(v, 2.0).unwrap(), grid, 6).unwrap();
        let floor = -1e-12 * s.max_abs();
        assert!(s.data.iter().all(|&x| x >= floor), "{v}");
    }
}

#[test]
fn stochastic_resolvent_mass_matches_prefactor_integral() {
    // The prefactor is the time derivative of e^{b^2 t} erfc(-b sqrt t), b = C/2.
    let t_end = 1.0;
    for &c in &[0.5, 1.0, 2.0] {
        let k = KernelVariant::new(Variant::Stochastic, c).unwrap();
        let b: f64 = 0.5 * c;
        let oracle = (b * b * t_end).exp() * erfc(-b * t_end.sqrt()) - 1.0;
        let outer = Quadrature::new(0.0, 1e-9);
        let inner = Quadrature::new(0.0, 1e-11);
        // Substitute t = u^2 to remove the 1/sqrt(t) singularity.
        let mass = outer
            .integrate(
                |u| {
                    if u <= 0.0 {
                        return 0.0;
                    }
                    let t = u * u;
                    let w = 12.0 * t.sqrt();
                    let space = inner
                        .integrate_with_breaks(
                            |x| resolvent_closed(k, t, x).unwrap(),
                            -w,
                            w,
                            &[0.0],
                        )
                        .unwrap()
                        .value;
                    2.0 * u * space
                },
                0.0,
                t_end.sqrt(),
            )
            .unwrap()
            .value;
        let prefactor = outer
            .integrate(
                |u| {
                    if u <= 0.0 {
                        0.0
                    } else {
                        2.0 * u * resolvent_prefactor(k, u * u).unwrap()
                    }
                },
                0.0,
                1.0,
            )
            .unwrap()
            .value;
        assert!(mass.is_finite());
        assert!((mass - prefactor).abs() < 1e-6 * prefactor, "C={c}");
        assert!((prefactor - oracle).abs() < 1e-8 * oracle, "C={c}");
    }
}

#[test]
fn picard_zero_input_stays_zero() {
    let grid = SpaceTimeGrid::symmetric(0.5, 0.01, 4.0, 0.05).unwrap();
    let a = GridField::zeros(grid, Sampling::Midpoint);
    let r = picard_verify(&a, KernelVariant::new(Variant::Stochastic, 1.0).unwrap(), 5).unwrap();
    assert_eq!(r.iterate.max_abs(), 0.0);
    assert!(r.max_excess <= 0.0);
}

#[test]
fn picard_constant_input_deterministic() {
    let grid = SpaceTimeGrid::symmetric(1.0, 5e-3, 8.0, 0.05).unwrap();
    let a = GridField::sample(grid, Sampling::Midpoint, |_, _| 1.0);
    let k = KernelVariant::new(Variant::Deterministic, 1.0).unwrap();
    let r = picard_verify(&a, k, 12).unwrap();
    assert!(r.monotone);
    assert!(r.max_excess <= 1e-3 * r.bound_max);
    // Away from the truncation edges the limit is close to e^t.
    for i in [99, 199] {
        let t = grid.time(i, Sampling::Midpoint);
        let v = r.iterate.at(i, grid.origin());
        assert!(v <= t.exp() * (1.0 + 1e-3));
        assert!(v >= t.exp() * (1.0 - 1e-2));
    }
}

#[test]
fn picard_stochastic_bump_is_monotone() {
    let grid = SpaceTimeGrid::symmetric(0.5, 5e-3, 6.0, 0.05).unwrap();
    let a = GridField::sample(grid, Sampling::Midpoint, |_, x| (-x * x).exp());
    let k = KernelVariant::new(Variant::Stochastic, 2.0).unwrap();
    let r = picard_verify(&a, k, 10).unwrap();
    assert!(r.monotone);
    assert!(r.max_excess <= 2e-2 * r.bound_max, "{}", r.max_excess);
}

#[test]
fn picard_detects_divergence() {
    let grid = SpaceTimeGrid::symmetric(1.0, 0.02, 2.0, 0.1).unwrap();
    let a = GridField::sample(grid, Sampling::Midpoint, |_, _| 1.0);
    let k = KernelVariant::new(Variant::Deterministic, 1e6).unwrap();
    assert!(matches!(
        picard_verify(&a, k, 50),
        Err(heatwave::Error::Instability(_))
    ));
}

#[test]
fn scalar_moment_kernel_has_finite_resolvent() {
    let j = |s: f64| 1.0 / (8.0 * std::f64::consts::PI * s).sqrt() + 1.0;
    let coarse = gronwall_scalar_with(
        1.0,
        0.5,
        j,
        1.0,
        ScalarOptions {
            steps: 1024,
            ..Default::default()
        },
    )
    .unwrap();
    let fine = gronwall_scalar_with(
        1.0,
        0.5,
        j,
        1.0,
        ScalarOptions {
            steps: 4096,
            ..Default::default()
        },
    )
    .unwrap();
    let (uc, uf) = (coarse.u_at(1.0), fine.u_at(1.0));
    assert!(uf.is_finite() && uf > 0.0);
    // The 1/sqrt(s) singularity limits the midpoint rule to O(sqrt(h)).
    assert!((uc - uf).abs() < 1e-2 * uf, "{uc} vs {uf}");
    assert!(uc < uf);
    // The bound is nondecreasing in t.
    assert!(fine.u.windows(2).all(|w| w[1] >= w[0]));
    assert!(fine.bound(1.0) > fine.bound(0.5));
}

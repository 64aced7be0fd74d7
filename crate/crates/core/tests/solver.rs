use std::f64::consts::PI;

use heatwave::kernels::{green, BoundaryCondition, GreenEvaluator};
use heatwave::quadrature::Quadrature;
use heatwave::solver::{
    linear_variance_exact, make_noise, mc_lp_error, proxy_half_length, solve, solve_line_proxy,
    CoefficientSpec, Coefficients, Domain, InitialCondition, LatticeSpec, McPlan, Stepper,
};
use heatwave::Error;

const BCS: [BoundaryCondition; 3] = BoundaryCondition::ALL;

fn zero() -> Coefficients {
    CoefficientSpec::Zero.into()
}

fn linear() -> Coefficients {
    CoefficientSpec::Linear.into()
}

fn sine_tanh() -> Coefficients {
    CoefficientSpec::SineTanh {
        alpha: 1.0,
        beta: 0.5,
        gamma: 0.5,
    }
    .into()
}

fn bump() -> InitialCondition {
    InitialCondition::GaussianBump {
        amplitude: 1.0,
        width: 0.25,
        center: 0.1,
    }
}

#[test]
fn neumann_preserves_constants_exactly() {
    let lat = LatticeSpec::new(1.0, 1.0 / 16.0, 0.5, 1.0 / 64.0).unwrap();
    let noise = make_noise(1, 0, lat).unwrap();
    let u0 = InitialCondition::Constant { value: 1.0 };
    let sol = solve(BoundaryCondition::Neumann, lat, &zero(), &u0, &noise).unwrap();
    for i in 0..=lat.steps() {
        assert!(sol.row(i).iter().all(|&v| v == 1.0));
    }
}

#[test]
fn dirichlet_rows_are_pinned() {
    let lat = LatticeSpec::new(1.0, 1.0 / 16.0, 0.25, 1.0 / 64.0).unwrap();
    let noise = make_noise(3, 0, lat).unwrap();
    let u0 = InitialCondition::Constant { value: 1.0 };
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Mixed] {
        let sol = solve(bc, lat, &sine_tanh(), &u0, &noise).unwrap();
        for i in 1..=lat.steps() {
            assert_eq!(sol.at(i, 0), 0.0);
            if bc == BoundaryCondition::Dirichlet {
                assert_eq!(sol.at(i, lat.cells()), 0.0);
            }
        }
    }
}

fn eigenmode_error(dx: f64) -> f64 {
    let l = 1.0;
    let t = 0.25;
    let lat = LatticeSpec::new(l, dx, t, dx * dx).unwrap();
    let mode = |x: f64| (PI * (x + l) / (2.0 * l)).sin();
    let mut stepper = Stepper::new(BoundaryCondition::Dirichlet, lat, &InitialCondition::Zero);
    let mut u: Vec<f64> = (0..lat.nodes()).map(|j| mode(lat.x(j))).collect();
    u[0] = 0.0;
    u[lat.cells()] = 0.0;
    stepper.set_values(&u).unwrap();
    for _ in 0..lat.steps() {
        stepper.step(&zero(), None).unwrap();
    }
    let decay = (-PI * PI * t / (4.0 * l * l)).exp();
    (0..lat.nodes())
        .map(|j| (stepper.values()[j] - decay * mode(lat.x(j))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn dirichlet_eigenmode_decay_converges() {
    let coarse = eigenmode_error(1.0 / 16.0);
    let fine = eigenmode_error(1.0 / 32.0);
    assert!(fine < 1e-3, "{fine}");
    assert!(coarse / fine > 3.5, "{coarse} / {fine}");
}

fn convolution_oracle(bc: BoundaryCondition, l: f64, t: f64, x: f64, u0: &InitialCondition) -> f64 {
    let ev = GreenEvaluator::new(l, bc).unwrap();
    let q = Quadrature::new(1e-13, 1e-11);
    let s = (2.0 * t).sqrt();
    q.integrate_with_breaks(
        |y| green(&ev, t, x, y).unwrap() * u0.eval(y),
        -l,
        l,
        &[x - 4.0 * s, x, x + 4.0 * s, 0.1],
    )
    .unwrap()
    .value
}

fn heat_flow_error(bc: BoundaryCondition, dx: f64) -> f64 {
    let l = 1.0;
    let t = 0.25;
    let lat = LatticeSpec::new(l, dx, t, dx * dx).unwrap();
    let noise = make_noise(0, 0, lat).unwrap();
    let sol = solve(bc, lat, &zero(), &bump(), &noise).unwrap();
    [-0.75, -0.25, 0.0, 0.5, 0.875]
        .iter()
        .map(|&x| (sol.value(t, x).unwrap() - convolution_oracle(bc, l, t, x, &bump())).abs())
        .fold(0.0, f64::max)
}

#[test]
fn noiseless_solver_matches_green_convolution() {
    for bc in BCS {
        let coarse = heat_flow_error(bc, 1.0 / 16.0);
        let fine = heat_flow_error(bc, 1.0 / 32.0);
        assert!(fine < 1e-3, "{bc}: {fine}");
        assert!(coarse / fine > 3.0, "{bc}: {coarse} / {fine}");
    }
}

#[test]
fn noise_moments() {
    let lat = LatticeSpec::new(62.5, 0.125, 1.0, 0.0625).unwrap();
    assert_eq!(lat.cells() * lat.steps(), 16_000);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    let mut row = vec![0.0; lat.cells()];
    for rep in 0..63 {
        let noise = make_noise(2024, rep, lat).unwrap();
        for i in 0..lat.steps() {
            noise.fill_row(i, &mut row).unwrap();
            for &v in &row {
                sum += v;
                sum_sq += v * v;
                count += 1;
            }
        }
    }
    assert!(count >= 1_000_000);
    let mean = sum / count as f64;
    let var = sum_sq / count as f64 - mean * mean;
    assert!(mean.abs() < 4e-3, "{mean}");
    assert!((var - 1.0).abs() < 0.01, "{var}");
}

#[test]
fn restricted_noise_is_bit_identical() {
    let master = LatticeSpec::new(4.0, 1.0 / 16.0, 0.25, 1.0 / 64.0).unwrap();
    let noise = make_noise(99, 5, master).unwrap();
    let mut full = vec![0.0; master.cells()];
    for l_sub in [1.0, 2.0, 4.0] {
        let view = noise.restrict(l_sub).unwrap();
        let off = master.offset_of(view.lattice()).unwrap();
        let mut sub = vec![0.0; view.lattice().cells()];
        for i in [0, 7, 15] {
            noise.fill_row(i, &mut full).unwrap();
            view.fill_row(i, &mut sub).unwrap();
            for (a, b) in sub.iter().zip(&full[off..]) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
    // A separately constructed master of a different size shares cells by position.
    let other = make_noise(
        99,
        5,
        LatticeSpec::new(2.0, 1.0 / 16.0, 0.25, 1.0 / 64.0).unwrap(),
    )
    .unwrap();
    assert_eq!(
        other.deviate(3, 0).unwrap().to_bits(),
        noise.deviate(3, 32).unwrap().to_bits()
    );
}

#[test]
fn coupled_subdomain_solutions_share_noise() {
    let master = LatticeSpec::new(3.0, 1.0 / 16.0, 0.25, 1.0 / 64.0).unwrap();
    let noise = make_noise(5, 0, master).unwrap();
    let view = noise.restrict(1.0).unwrap();
    let a = solve(
        BoundaryCondition::Dirichlet,
        *view.lattice(),
        &linear(),
        &InitialCondition::Zero,
        &view,
    )
    .unwrap();
    let b = solve(
        BoundaryCondition::Dirichlet,
        master.restrict(1.0).unwrap(),
        &linear(),
        &InitialCondition::Zero,
        &view,
    )
    .unwrap();
    assert_eq!(a, b);
    let wrong = noise.restrict(2.0).unwrap();
    assert!(matches!(
        solve(
            BoundaryCondition::Dirichlet,
            *view.lattice(),
            &linear(),
            &InitialCondition::Zero,
            &wrong
        ),
        Err(Error::Shape(_))
    ));
}

#[test]
fn blow_up_is_reported() {
    let lat = LatticeSpec::new(1.0, 1.0 / 16.0, 1.0, 1.0 / 16.0).unwrap();
    let noise = make_noise(0, 0, lat).unwrap();
    let explosive = Coefficients::custom(|_, _, _| 0.0, |_, _, u| 1e200 * u, 1e200);
    let u0 = InitialCondition::Constant { value: 1.0 };
    let err = solve(BoundaryCondition::Neumann, lat, &explosive, &u0, &noise).unwrap_err();
    assert!(matches!(err, Error::BlowUp { .. }), "{err}");
    let master = LatticeSpec::new(7.0, 1.0 / 16.0, 1.0, 1.0 / 16.0).unwrap();
    let err = mc_lp_error(
        BoundaryCondition::Dirichlet,
        1.0,
        &[1.0],
        &[0.0],
        2.0,
        4,
        0,
        master,
        &explosive,
        &u0,
    )
    .unwrap_err();
    assert!(matches!(err, Error::RunFailure(_)), "{err}");
}

#[test]
fn proxy_margin_rule() {
    let dx = 1.0 / 32.0;
    assert_eq!(proxy_half_length(2.0, 0.5, dx), 6.25);
    let lat = LatticeSpec::new(6.0, dx, 0.5, dx).unwrap();
    let noise = make_noise(0, 0, lat).unwrap();
    let err = solve_line_proxy(lat, 2.0, &zero(), &InitialCondition::Zero, &noise).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn zero_coefficients_give_zero_error() {
    let master = LatticeSpec::new(5.0, 0.125, 0.5, 0.0625).unwrap();
    let recs = mc_lp_error(
        BoundaryCondition::Dirichlet,
        0.5,
        &[0.25, 0.5],
        &[0.0],
        2.0,
        3,
        1,
        master,
        &zero(),
        &InitialCondition::Zero,
    )
    .unwrap();
    assert!(recs.iter().all(|r| r.error == 0.0 && r.std_error == 0.0));
}

#[test]
fn doubling_the_proxy_changes_little() {
    let dx = 1.0 / 16.0;
    let t = 0.5;
    let l_master = proxy_half_length(2.0, t, dx);
    let big = LatticeSpec::new(2.0 * l_master, dx, t, 1.0 / 256.0).unwrap();
    let small = big.restrict(l_master).unwrap();
    let mut total = 0.0;
    let reps = 100;
    for r in 0..reps {
        let noise = make_noise(17, r, big).unwrap();
        let a = solve_line_proxy(big, 2.0, &sine_tanh(), &bump(), &noise).unwrap();
        let view = noise.restrict(l_master).unwrap();
        let b = solve_line_proxy(small, 2.0, &sine_tanh(), &bump(), &view).unwrap();
        total += (a.value(t, 0.0).unwrap() - b.value(t, 0.0).unwrap()).abs();
    }
    let mean = total / reps as f64;
    assert!(mean < 1e-6, "{mean}");
}

#[test]
fn linear_second_moment_matches_isometry() {
    let dx = 1.0 / 16.0;
    let t = 0.5;
    let lat = LatticeSpec::new(proxy_half_length(0.0, t, dx), dx, t, 1.0 / 256.0).unwrap();
    let reps = 2000;
    let samples: Vec<f64> = (0..reps)
        .map(|r| {
            let noise = make_noise(8, r, lat).unwrap();
            let sol =
                solve_line_proxy(lat, 0.0, &linear(), &InitialCondition::Zero, &noise).unwrap();
            sol.value(t, 0.0).unwrap().powi(2)
        })
        .collect();
    let (est, se) = heatwave::solver::jackknife_lp(&samples, 1.0);
    let exact = (t / (2.0 * PI)).sqrt();
    assert!((est - exact).abs() < 3.0 * se, "{est} vs {exact} (se {se})");
}

/// `E[u^2] + E[u_L^2] - 2 E[u u_L]` by nested quadrature, using
/// `int Gamma_L(s; x, y)^2 dy = Gamma_L(2s; x, x)`.
fn variance_by_cross_moments(bc: BoundaryCondition, l: f64, t: f64, x: f64) -> f64 {
    let ev = GreenEvaluator::new(l, bc).unwrap();
    let outer = Quadrature::new(0.0, 1e-9);
    let inner = Quadrature::new(0.0, 1e-11);
    // Substituting s = v^2 removes the 1/sqrt(s) endpoint singularity.
    let own = outer
        .integrate(
            |v| 2.0 * v * green(&ev, 2.0 * v * v, x, x).unwrap(),
            0.0,
            t.sqrt(),
        )
        .unwrap()
        .value;
    let cross = outer
        .integrate(
            |v| {
                let s = v * v;
                let w = (2.0 * s).sqrt();
                let heat = |y: f64| (-(x - y).powi(2) / (4.0 * s)).exp() / (4.0 * PI * s).sqrt();
                2.0 * v
                    * inner
                        .integrate_with_breaks(
                            |y| heat(y) * green(&ev, s, x, y).unwrap(),
                            -l,
                            l,
                            &[x - 6.0 * w, x, x + 6.0 * w],
                        )
                        .unwrap()
                        .value
            },
            0.0,
            t.sqrt(),
        )
        .unwrap()
        .value;
    (t / (2.0 * PI)).sqrt() + own - 2.0 * cross
}

#[test]
fn exact_variance_matches_cross_moment_oracle() {
    for bc in BCS {
        let v = linear_variance_exact(bc, 1.0, 0.5, 0.0, &InitialCondition::Zero).unwrap();
        let oracle = variance_by_cross_moments(bc, 1.0, 0.5, 0.0);
        assert!(v > 0.0);
        assert!(
            (v - oracle).abs() < 1e-6 * oracle.max(1e-3),
            "{bc}: {v} vs {oracle}"
        );
    }
}

#[test]
fn exact_variance_properties() {
    let u0 = InitialCondition::Zero;
    let near = linear_variance_exact(BoundaryCondition::Dirichlet, 1.0, 0.5, 0.0, &u0).unwrap();
    let far = linear_variance_exact(BoundaryCondition::Dirichlet, 6.0, 0.5, 0.0, &u0).unwrap();
    assert!(far < 1e-12 && far < near);
    let c = InitialCondition::Constant { value: 2.0 };
    let with_c = linear_variance_exact(BoundaryCondition::Dirichlet, 1.0, 0.5, 0.0, &c).unwrap();
    assert!(with_c > near);
    let neumann_c = linear_variance_exact(BoundaryCondition::Neumann, 1.0, 0.5, 0.0, &c).unwrap();
    let neumann_0 = linear_variance_exact(BoundaryCondition::Neumann, 1.0, 0.5, 0.0, &u0).unwrap();
    assert_eq!(neumann_c, neumann_0);
    assert!(linear_variance_exact(BoundaryCondition::Neumann, 1.0, 0.5, 0.0, &bump()).is_err());
}

#[test]
fn linear_mc_matches_exact_variance() {
    let dx = 1.0 / 16.0;
    let t = 0.5;
    let l = 1.0;
    let master = LatticeSpec::new(proxy_half_length(l, t, dx), dx, t, 1.0 / 256.0).unwrap();
    let plan = McPlan {
        master,
        domains: BCS.iter().map(|&bc| Domain { bc, l }).collect(),
        times: vec![t],
        xs: vec![0.0],
        p: 2.0,
        n_reps: 1000,
        base_seed: 31,
        coeffs: linear(),
        u0: InitialCondition::Zero,
    };
    let out = plan.run().unwrap();
    assert_eq!(out.flagged, 0);
    assert!(out.proxy_bounds[0].bound_al < 1e-2 * out.records[0].bound_al);
    for rec in &out.records {
        let exact = linear_variance_exact(rec.bc, l, t, 0.0, &InitialCondition::Zero).unwrap();
        let sq = rec.error * rec.error;
        let se_sq = 2.0 * rec.error * rec.std_error;
        assert!(
            (sq - exact).abs() < 3.0 * se_sq,
            "{}: {sq} vs {exact} (se {se_sq})",
            rec.bc
        );
    }
}

#[test]
fn nonlinear_errors_decrease_in_l() {
    let dx = 1.0 / 16.0;
    let t = 0.5;
    let master = LatticeSpec::new(proxy_half_length(3.0, t, dx), dx, t, 1.0 / 256.0).unwrap();
    let plan = McPlan {
        master,
        domains: [1.0, 2.0, 3.0]
            .iter()
            .map(|&l| Domain {
                bc: BoundaryCondition::Dirichlet,
                l,
            })
            .collect(),
        times: vec![t],
        xs: vec![0.0],
        p: 2.0,
        n_reps: 200,
        base_seed: 4,
        coeffs: sine_tanh(),
        u0: bump(),
    };
    let recs = plan.run().unwrap().records;
    assert!(recs[0].error > recs[1].error && recs[1].error > recs[2].error);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dx = 1.0 / 8.0;
    let master = LatticeSpec::new(proxy_half_length(1.0, 0.25, dx), dx, 0.25, 1.0 / 64.0).unwrap();
    let plan = McPlan {
        master,
        domains: BCS.iter().map(|&bc| Domain { bc, l: 1.0 }).collect(),
        times: vec![0.125, 0.25],
        xs: vec![0.0, 0.5],
        p: 2.0,
        n_reps: 40,
        base_seed: 12,
        coeffs: sine_tanh(),
        u0: bump(),
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| plan.run().unwrap())
    };
    let a = run(1);
    let b = run(4);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.error.to_bits(), y.error.to_bits());
        assert_eq!(x.std_error.to_bits(), y.std_error.to_bits());
    }
}

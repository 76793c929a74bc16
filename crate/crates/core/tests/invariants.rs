use multispec::experiments::plateau;
use multispec::projection::default_eps;
use multispec::*;
use proptest::prelude::*;

struct Product<'a>(&'a dyn Density, &'a dyn Density);

impl Density for Product<'_> {
    fn value(&self, x: f64) -> f64 {
        self.0.value(x) * self.1.value(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.0.breakpoints();
        b.extend(self.1.breakpoints());
        b
    }
}

fn plateau_p() -> AttenuationExponent {
    plateau().exponent().unwrap()
}

fn parabola_p() -> AttenuationExponent {
    let iv = Interval::new(-1.0, 1.0).unwrap();
    AttenuationExponent::from_profile(iv, Profile::Polynomial { coeffs: vec![0.0, 0.0, 1.0] }).unwrap()
}

fn integral(p: &AttenuationExponent, f: &dyn Density) -> f64 {
    forward_data(p, f, 1.0, 64).unwrap()
}

fn density() -> impl Strategy<Value = Profile> {
    (-2.0..2.0f64, 0.5..4.0f64, 0.0..3.0f64, -1.0..1.0f64).prop_map(|(amplitude, frequency, phase, offset)| Profile::Sine {
        amplitude,
        frequency,
        phase,
        offset,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hats_partition_unity(n in 2usize..200, t in 0.0..1.0f64) {
        let basis = HatBasis::new(Interval::new(-0.5, 2.0).unwrap(), n).unwrap();
        let x = -0.5 + 2.5 * t;
        let total: f64 = (0..n).map(|k| basis.eval_hat(k, x).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forward_model_is_linear(r1 in density(), r2 in density(), a in -3.0..3.0f64, b in -3.0..3.0f64, lambda in 0.01..1.0f64) {
        let p = plateau_p();
        let combo = LinearCombination::new(vec![(a, &r1), (b, &r2)]);
        let lhs = forward_data(&p, &combo, lambda, 64).unwrap();
        let rhs = a * forward_data(&p, &r1, lambda, 64).unwrap() + b * forward_data(&p, &r2, lambda, 64).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn projection_is_linear_and_idempotent(r1 in density(), r2 in density(), a in -3.0..3.0f64, t in 0.0..1.0f64) {
        let p = plateau_p();
        let part = partition_levelsets(&p, 400, default_eps(&p)).unwrap();
        let combo = LinearCombination::new(vec![(a, &r1), (1.0, &r2)]);
        let (p1, p2, pc) = (project(&r1, &part).unwrap(), project(&r2, &part).unwrap(), project(&combo, &part).unwrap());
        prop_assert!((pc.eval(t) - a * p1.eval(t) - p2.eval(t)).abs() < 1e-10);
        let pp = project(&p1, &part).unwrap();
        prop_assert!((pp.eval(t) - p1.eval(t)).abs() < 1e-10);
    }

    #[test]
    fn projection_is_self_adjoint(r1 in density(), r2 in density(), parabola in any::<bool>()) {
        let p = if parabola { parabola_p() } else { plateau_p() };
        let part = partition_levelsets(&p, 400, default_eps(&p)).unwrap();
        let (p1, p2) = (project(&r1, &part).unwrap(), project(&r2, &part).unwrap());
        let lhs = integral(&p, &Product(&p1, &r2));
        let rhs = integral(&p, &Product(&r1, &p2));
        prop_assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn theory_matrix_reproduces_data(r in density(), lambda in 0.05..0.95f64) {
        let p = plateau_p();
        let basis = HatBasis::new(Interval::unit(), 201).unwrap();
        let a = build_theory_matrix(&p, &[lambda], &basis, AssemblyConfig::default()).unwrap();
        let discrete = a.apply(&basis.sample(&r)).unwrap()[0];
        let exact = forward_data(&p, &r, lambda, 64).unwrap();
        prop_assert!((discrete - exact).abs() < 1e-4, "{discrete} vs {exact}");
    }
}

#[test]
fn plateau_data_ignores_mean_zero_bumps() {
    let p = plateau_p();
    let part = partition_levelsets(&p, 400, default_eps(&p)).unwrap();
    let rho = Profile::sine(1.0, 1.0, 0.0);
    let lambdas = uniform_lambdas(0.0, 1.0, 25).unwrap();
    for (cell, _) in part.plateau_cells() {
        let bump = levelset_perturbation(&part, cell, Profile::sine(1.0, 10.0, 0.0)).unwrap();
        let total = LinearCombination::sum(&rho, &bump);
        for &l in &lambdas {
            let gap = forward_data(&p, &total, l, 64).unwrap() - forward_data(&p, &rho, l, 64).unwrap();
            assert!(gap.abs() < 1e-8, "cell {cell}, lambda {l}: {gap}");
        }
    }
    let proj = project(&rho, &part).unwrap();
    assert!(data_invariance_gap(&p, &rho, &proj, &lambdas, 64).unwrap() < 1e-8);
}

#[test]
fn parabola_projects_odd_sources_to_zero() {
    let p = parabola_p();
    let part = partition_levelsets(&p, 1000, default_eps(&p)).unwrap();
    let odd = Profile::identity();
    let proj = project(&odd, &part).unwrap();
    for i in 1..40 {
        let x = -1.0 + i as f64 / 20.0;
        assert!(proj.eval(x).abs() < 1e-9, "P(x)({x}) = {}", proj.eval(x));
    }
}

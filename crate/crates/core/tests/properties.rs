use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::sample::select;

use stable_lab::families::Family;
use stable_lab::functionals::{energy, entropy, mutual_information, relative_entropy};
use stable_lab::maxent::{cauchy_sign_condition, epi_check, notdoa_counterexample};
use stable_lab::path::PathBuilder;
use stable_lab::verify::{debruijn_check, entropy_energy_check, score_properties_check};
use stable_lab::{Grid, GridFunction, StableLaw};

fn light_family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (0.3..3.0f64).prop_map(Family::Gaussian),
        (0.3..1.5f64).prop_map(Family::Laplace),
        (0.2..1.0f64, 1.0..3.0f64, 0.1..0.9f64).prop_map(|(a, b, w)| Family::GaussianMixture(vec![(a, w), (b, 1.0 - w)])),
    ]
}

fn smooth_family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (0.3..3.0f64).prop_map(Family::Gaussian),
        (0.2..1.0f64, 1.0..3.0f64, 0.1..0.9f64).prop_map(|(a, b, w)| Family::GaussianMixture(vec![(a, w), (b, 1.0 - w)])),
    ]
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn light_grid() -> Grid {
    Grid::new(40.0, 1 << 12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convolution_preserves_mass_and_commutes(f in light_family(), g in light_family()) {
        let grid = light_grid();
        let (f, g) = (f.sample(&grid).unwrap(), g.sample(&grid).unwrap());
        let fg = f.convolve(&g).unwrap();
        let gf = g.convolve(&f).unwrap();
        prop_assert!((fg.integrate() - f.integrate() * g.integrate()).abs() <= 1e-6);
        prop_assert!(sup_diff(fg.values(), gf.values()) <= 1e-12);
    }

    #[test]
    fn derivative_of_even_function_is_odd(f in light_family()) {
        let d = f.sample(&light_grid()).unwrap().differentiate_x();
        let v = d.values();
        let n = v.len();
        let odd = (0..n / 2).fold(0.0f64, |m, k| m.max((v[k] + v[n - 1 - k]).abs()));
        prop_assert!(odd <= 1e-12, "{odd}");
    }

    #[test]
    fn rescaling_composes(f in smooth_family(), a in 0.5..1.0f64, b in 0.5..1.0f64) {
        let f = f.sample(&Grid::new(30.0, 1 << 13).unwrap()).unwrap();
        let twice = f.rescale_density(a).unwrap().rescale_density(b).unwrap();
        let once = f.rescale_density(a * b).unwrap();
        // two four-point interpolations of a smooth density
        prop_assert!(sup_diff(twice.values(), once.values()) <= 1e-3 * once.peak());
    }

    #[test]
    fn family_spec_round_trips(f in light_family()) {
        let back: Family = f.to_string().parse().unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn grid_function_csv_round_trips(f in light_family()) {
        let f = f.sample(&Grid::new(10.0, 256).unwrap()).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.grid(), f.grid());
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn stable_density_is_even_and_unimodal(alpha in 1.0..=2.0f64, s in 0.5..2.0f64) {
        let law = StableLaw::new(alpha, s).unwrap();
        let l = law.recommended_half_width(1e-3).unwrap();
        let g = law.density(&Grid::covering(l, law.width() / 8.0, 1 << 16).unwrap()).unwrap();
        let v = g.values();
        let n = v.len();
        prop_assert!(g.asymmetry() <= 1e-12);
        let slack = 1e-12 * g.peak();
        for k in n / 2..n - 1 {
            prop_assert!(v[k + 1] <= v[k] + slack, "not unimodal at x = {}", g.grid().x(k));
        }
    }

    #[test]
    fn spectral_inversion_matches_closed_forms(alpha in select(vec![1.0, 2.0]), s in 0.5..2.0f64) {
        let law = StableLaw::new(alpha, s).unwrap();
        let l = law.recommended_half_width(1e-4).unwrap();
        let grid = Grid::covering(l, law.width() / 8.0, 1 << 18).unwrap();
        let spectral = law.spectral_density(&grid).unwrap();
        let exact: Vec<f64> = grid.points().iter().map(|x| law.pdf(*x)).collect();
        prop_assert!(sup_diff(spectral.values(), &exact) <= 1e-8);
    }

    #[test]
    fn entropy_scaling(alpha in select(vec![1.0, 1.5, 2.0]), s in 0.5..2.0f64) {
        let unit = StableLaw::new(alpha, 1.0).unwrap();
        let law = StableLaw::new(alpha, s).unwrap();
        let l = unit.recommended_half_width(1e-5).unwrap() * s.max(1.0).powf(1.0 / alpha);
        let grid = Grid::covering(l, law.width().min(1.0) / 16.0, 1 << 20).unwrap();
        let h1 = entropy(&unit.density(&grid).unwrap()).value;
        let hs = entropy(&law.density(&grid).unwrap()).value;
        prop_assert!((hs - h1 - s.ln() / alpha).abs() <= 2e-3, "{} vs {}", hs - h1, s.ln() / alpha);
    }

    #[test]
    fn gibbs_and_relative_entropy_sign(f in light_family(), g in light_family(), s in 0.5..2.0f64) {
        let grid = light_grid();
        let fs = f.sample(&grid).unwrap();
        let law = StableLaw::new(2.0, s).unwrap();
        prop_assert!(entropy(&fs).value <= energy(&fs, &law).unwrap().value + 1e-6);
        // a wide Laplace component keeps g positive wherever f is
        let wide = Family::Laplace(3.0).sample(&grid).unwrap();
        let gs = g.sample(&grid).unwrap().zip_with(&wide, |a, b| 0.9 * a + 0.1 * b).unwrap();
        prop_assert!(relative_entropy(&fs, &gs).unwrap().value >= -1e-6);
    }

    #[test]
    fn epi_slack_is_nonnegative(f in light_family(), g in light_family()) {
        let grid = Grid::new(60.0, 1 << 13).unwrap();
        let r = epi_check(&f.sample(&grid).unwrap(), &g.sample(&grid).unwrap()).unwrap();
        prop_assert!(r.pass, "{:?}", r.details);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn gibbs_against_cauchy_law(f in light_family(), s in 0.5..2.0f64) {
        let grid = Grid::new(2000.0, 1 << 16).unwrap();
        let fs = f.sample(&grid).unwrap();
        let law = StableLaw::cauchy(s).unwrap();
        prop_assert!(entropy(&fs).value <= energy(&fs, &law).unwrap().value + 1e-6);
    }

    #[test]
    fn scores_are_odd_with_zero_mean(f in light_family(), s in 0.5..2.0f64, t in 0.1..0.9f64) {
        let b = PathBuilder::analytic(&f, StableLaw::new(2.0, s).unwrap(), Grid::new(40.0, 1 << 12).unwrap()).unwrap();
        let r = score_properties_check(&b, &[t]).unwrap();
        prop_assert!(r.details["mean_zero_defect"] <= 1e-4);
        prop_assert!(r.details["oddness_defect"] <= 1e-8);
    }

    #[test]
    fn cauchy_scores_are_odd_with_zero_mean(gamma in 0.3..3.0f64, t in 0.1..0.9f64) {
        let b = PathBuilder::analytic(&Family::Cauchy(gamma), StableLaw::cauchy(1.0).unwrap(), Grid::new(4000.0, 1 << 19).unwrap())
            .unwrap();
        let r = score_properties_check(&b, &[t]).unwrap();
        prop_assert!(r.pass, "{:?}", r.details);
    }

    #[test]
    fn path_reaches_the_stable_law(f in light_family(), s in 0.5..2.0f64) {
        let b = PathBuilder::analytic(&f, StableLaw::new(2.0, s).unwrap(), light_grid()).unwrap();
        let g = b.stable_density().values();
        let end = b.at(1.0).unwrap();
        prop_assert!(sup_diff(end.h_t.values(), g) <= 1e-12);
        let near = b.at(1.0 - 1e-4).unwrap();
        prop_assert!(sup_diff(near.h_t.values(), g) <= 1e-3 * b.stable_density().peak());
    }

    #[test]
    fn mutual_information_decreases_along_the_path(f in light_family(), s in 0.5..2.0f64) {
        let b = PathBuilder::analytic(&f, StableLaw::new(2.0, s).unwrap(), light_grid()).unwrap();
        let values: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|t| mutual_information(&b.at(*t).unwrap()).value).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{values:?}");
        }
    }

    #[test]
    fn consistency_is_independent_of_dt(f in light_family(), dt in select(vec![1e-3, 5e-3, 1e-2])) {
        let b = PathBuilder::analytic(&f, StableLaw::new(2.0, 1.0).unwrap(), light_grid()).unwrap();
        let reports = entropy_energy_check(&b, 0.5, dt).unwrap();
        let c = reports.iter().find(|r| r.identity_name == "entropy-energy-consistency").unwrap();
        prop_assert!(c.residual_norm <= 1e-6);
    }

    #[test]
    fn stable_input_has_vanishing_derivatives(s in 0.5..2.0f64, t in 0.2..0.8f64) {
        let law = StableLaw::new(2.0, s).unwrap();
        let b = PathBuilder::analytic(&Family::Stable(law), law, light_grid()).unwrap();
        for r in debruijn_check(&b, &[t], 1e-3).unwrap() {
            prop_assert!(r.lhs_value.unwrap().abs() < 1e-5 && r.rhs_value.unwrap().abs() < 1e-5, "{r:?}");
        }
        for r in entropy_energy_check(&b, t, 1e-3).unwrap() {
            if r.identity_name == "entropy-derivative" || r.identity_name == "energy-derivative" {
                // H and Λ both move with the scale; only their difference is flat
                continue;
            }
            if let (Some(l), Some(rh)) = (r.lhs_value, r.rhs_value) {
                if r.identity_name != "theta-quadratic-derivative" {
                    prop_assert!(l.abs() < 1e-5 && rh.abs() < 1e-5, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn sign_condition_implies_entropy_bound(gamma in 0.2..3.0f64) {
        let b = PathBuilder::analytic(&Family::Cauchy(gamma), StableLaw::cauchy(1.0).unwrap(), Grid::new(2000.0, 1 << 16).unwrap())
            .unwrap();
        let ts: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
        let r = cauchy_sign_condition(&b, &ts).unwrap();
        prop_assert!(r.pass);
        if r.details["condition_holds"] == 1.0 {
            prop_assert!(entropy(b.input()).value <= (4.0 * PI).ln() + 1e-3);
        }
    }

    #[test]
    fn notdoa_margin_is_positive_and_distances_fall(s in 0.5..2.0f64) {
        let grid = Grid::new(4000.0, 1 << 15).unwrap();
        let (r, diag) = notdoa_counterexample(1.0, 2.0, s, &[1, 2, 4, 8, 16, 32], &grid).unwrap();
        prop_assert!(r.pass, "{:?}", r.details);
        prop_assert!(r.details["entropy_margin"] > 0.0);
        for w in diag.sup_distances.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
    }
}

#[test]
fn stable_convolution_is_stable() {
    for alpha in [1.0, 1.5, 2.0] {
        for u in [0.5, 1.0] {
            for v in [0.5, 1.0] {
                let sum = StableLaw::new(alpha, u + v).unwrap();
                let l = 4.0 * sum.recommended_half_width(1e-4).unwrap();
                let grid = Grid::covering(l, sum.width() / 16.0, 1 << 20).unwrap();
                let a = StableLaw::new(alpha, u).unwrap().density(&grid).unwrap();
                let b = StableLaw::new(alpha, v).unwrap().density(&grid).unwrap();
                let conv = a.convolve(&b).unwrap();
                let exact = sum.density(&grid).unwrap();
                let n = grid.n();
                let err = sup_diff(&conv.values()[n / 4..3 * n / 4], &exact.values()[n / 4..3 * n / 4]);
                assert!(err <= 1e-5, "alpha {alpha} u {u} v {v}: {err}");
            }
        }
    }
}

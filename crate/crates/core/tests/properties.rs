use hom_core::experiment::{
    closed_form_denominator, coincidence_exact, optimal_mean_photon_number, scan_dip, visibility,
    BrightnessOptimum, ExperimentParams, Method, ModeOverlap,
};
use hom_core::fock::{
    coincidence_click_probability, Branch, Ensemble, StateVector, ThresholdDetector,
};
use hom_core::spectral::{overlap_v_closed, overlap_v_quadrature, SpectralWidth};
use num_complex::Complex64;
use proptest::prelude::*;

const CUTOFF: usize = 6;

/// Normalized two-mode state with support only where `n_0 + n_1 <= CUTOFF`,
/// so beamsplitters act without truncation.
fn bounded_state() -> impl Strategy<Value = StateVector> {
    let dim = (CUTOFF + 1) * (CUTOFF + 1);
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map("zero vector", |raw| {
        let shape = StateVector::vacuum(2, CUTOFF).unwrap();
        let mut amps: Vec<Complex64> = raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        for (i, a) in amps.iter_mut().enumerate() {
            if shape.occupation(i).iter().sum::<usize>() > CUTOFF {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-3 {
            return None;
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(2, CUTOFF, amps).ok()
    })
}

fn width() -> impl Strategy<Value = SpectralWidth> {
    (10.0f64..13.5).prop_map(|e| SpectralWidth::new(10f64.powf(e)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beamsplitter_is_unitary(a in bounded_state(), b in bounded_state(), t in 0.0f64..=1.0) {
        let (ua, ub) = (a.apply_beamsplitter(0, 1, t).unwrap(), b.apply_beamsplitter(0, 1, t).unwrap());
        prop_assert!((ua.norm_sqr() - 1.0).abs() < 1e-12);
        let before = a.inner(&b).unwrap();
        let after = ua.inner(&ub).unwrap();
        prop_assert!((before - after).norm() < 1e-12);
    }

    #[test]
    fn beamsplitter_conserves_photon_number(s in bounded_state(), t in 0.0f64..=1.0, phi in -3.2f64..3.2) {
        let out = s.apply_phase_shift(1, phi).unwrap().apply_beamsplitter(0, 1, t).unwrap();
        prop_assert!((out.total_photon_number() - s.total_photon_number()).abs() < 1e-10);
    }

    #[test]
    fn beamsplitter_inverse_restores_state(s in bounded_state(), t in 0.0f64..=1.0) {
        // The inverse of the mapping is the same splitter with its ports swapped.
        let back = s.apply_beamsplitter(0, 1, t).unwrap().apply_beamsplitter(1, 0, t).unwrap();
        prop_assert!((s.inner(&back).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_composes(s in bounded_state(), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let e = Ensemble::pure(s).unwrap();
        let twice = e.apply_loss(0, t1).unwrap().apply_loss(0, t2).unwrap();
        let once = e.apply_loss(0, t1 * t2).unwrap();
        prop_assert!(twice.density_distance(&once).unwrap() < 1e-10);
    }

    #[test]
    fn loss_scales_mean_photon_number(s in bounded_state(), t in 0.0f64..=1.0) {
        let e = Ensemble::pure(s.clone()).unwrap().apply_loss(1, t).unwrap();
        let mean: f64 = e
            .branches()
            .iter()
            .map(|b| b.probability * b.state.mean_photon_number(1).unwrap())
            .sum();
        prop_assert!((mean - t * s.mean_photon_number(1).unwrap()).abs() < 1e-10);
        let total: f64 = e.branches().iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coincidences_grow_with_dark_counts(s in bounded_state(), d1 in 0.0f64..0.5, step in 0.0f64..0.49) {
        let e = Ensemble::pure(s).unwrap();
        let p = |d: f64| {
            coincidence_click_probability(&e, &[0], &[1], &ThresholdDetector::new(d).unwrap()).unwrap()
        };
        let (lo, hi) = (p(d1), p(d1 + step));
        prop_assert!(lo <= hi + 1e-15);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&lo));
    }

    #[test]
    fn overlap_is_symmetric_even_and_bounded(p in width(), w in width(), u in -5.0f64..5.0) {
        let tau = u * (p.sigma_omega().powi(-2) + w.sigma_omega().powi(-2)).sqrt();
        let v = overlap_v_closed(p, w, tau);
        prop_assert!(v > 0.0 || tau != 0.0);
        prop_assert!(v <= 1.0);
        prop_assert_eq!(v, overlap_v_closed(w, p, tau));
        prop_assert_eq!(v, overlap_v_closed(p, w, -tau));
        prop_assert!(v <= overlap_v_closed(p, w, tau / 2.0));
    }

    #[test]
    fn overlap_prefactor_depends_on_ratio_only(p in width(), w in width(), c in 0.01f64..100.0) {
        let scaled = |s: SpectralWidth| SpectralWidth::new(c * s.sigma_omega()).unwrap();
        let a = overlap_v_closed(p, w, 0.0);
        let b = overlap_v_closed(scaled(p), scaled(w), 0.0);
        prop_assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn closed_visibility_bounded_and_monotone_in_dark(
        t in 1e-4f64..=1.0,
        d in 0.0f64..1e-2,
        extra in 0.0f64..1e-2,
        x in 0.01f64..2.0,
        v0 in 0.01f64..=1.0,
    ) {
        let at = |d: f64| {
            let p = ExperimentParams::new(t, d, x, ModeOverlap::Fixed { v0 }).unwrap();
            visibility(&p, Method::ClosedForm).unwrap()
        };
        let (lo, hi) = (at(d + extra), at(d));
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(lo <= hi);
    }

    #[test]
    fn optimum_depends_on_dark_ratio_only(t in 1e-3f64..0.1, ratio in 1e-4f64..1.0, c in 0.1f64..10.0) {
        prop_assume!(c * t <= 1.0 && c * t * ratio < 1.0 && t * ratio < 1.0);
        let a = optimal_mean_photon_number(t, t * ratio).unwrap();
        let b = optimal_mean_photon_number(c * t, c * t * ratio).unwrap();
        match (a, b) {
            (
                BrightnessOptimum::Interior { numeric: na, analytic: aa },
                BrightnessOptimum::Interior { numeric: nb, analytic: ab },
            ) => {
                prop_assert!((na / nb - 1.0).abs() < 1e-6);
                prop_assert!((aa / ab - 1.0).abs() < 1e-12);
                prop_assert!((na / aa - 1.0).abs() < 1e-6);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn denominator_rises_past_the_optimum(t in 1e-3f64..0.1, ratio in 1e-4f64..1.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let d = t * ratio;
        let BrightnessOptimum::Interior { analytic, .. } = optimal_mean_photon_number(t, d).unwrap() else {
            return Err(TestCaseError::fail("boundary"));
        };
        let x1 = analytic + u * (4.0 - analytic);
        let x2 = x1 + v * (4.0 - x1) + 1e-6;
        prop_assert!(closed_form_denominator(t, d, x1) < closed_form_denominator(t, d, x2));
        prop_assert!(closed_form_denominator(t, d, analytic) <= closed_form_denominator(t, d, x1));
    }

    #[test]
    fn closed_form_dip_is_symmetric(p in width(), w in width(), t in 1e-4f64..0.1, x in 0.05f64..1.0) {
        let params = ExperimentParams::new(t, 1e-5, x, ModeOverlap::Spectral { heralded: p, coherent: w }).unwrap();
        let scale = (p.sigma_omega().powi(-2) + w.sigma_omega().powi(-2)).sqrt();
        let delays: Vec<f64> = (-4..=4).map(|k| k as f64 * scale).collect();
        let curve = scan_dip(&params, &delays, Method::ClosedForm).unwrap();
        for i in 0..4 {
            prop_assert_eq!(curve.probabilities[i], curve.probabilities[8 - i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn overlap_matches_quadrature(p in width(), w in width(), u in -5.0f64..5.0) {
        let tau = u * (p.sigma_omega().powi(-2) + w.sigma_omega().powi(-2)).sqrt();
        let closed = overlap_v_closed(p, w, tau);
        let quad = overlap_v_quadrature(p, w, tau).unwrap();
        prop_assert!((closed - quad).abs() <= 1e-8);
    }

    #[test]
    fn displacement_preserves_norm(re in -1.2f64..1.2, im in -1.2f64..1.2, n in 0usize..3) {
        let s = StateVector::number_state(24, &[n]).unwrap();
        let out = s.apply_displacement(0, Complex64::new(re, im)).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        let back = out.apply_displacement(0, Complex64::new(-re, -im)).unwrap();
        prop_assert!((back.inner(&s).unwrap().norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lossy_photon_plus_coherent_reduces_to_two_branches(t in 1e-4f64..=1.0, x in 0.0f64..1.0) {
        let alpha = Complex64::new(x.sqrt(), 0.0);
        let vac = StateVector::vacuum(2, 14).unwrap();
        let generic = Ensemble::pure(vac.apply_displacement(1, alpha).unwrap().apply_create(0).unwrap())
            .unwrap()
            .apply_loss_to(&[0, 1], t)
            .unwrap();
        let lost = vac.apply_displacement(1, alpha * t.sqrt()).unwrap();
        let mut branches = vec![Branch { probability: t, state: lost.apply_create(0).unwrap() }];
        if t < 1.0 {
            branches.push(Branch { probability: 1.0 - t, state: lost });
        }
        let expected = Ensemble::new(branches).unwrap();
        prop_assert!(generic.density_distance(&expected).unwrap() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn exact_dip_is_symmetric_and_tracks_dark_counts(
        t in 1e-4f64..0.01,
        d in 1e-6f64..1e-3,
        x in 0.05f64..1.0,
        u in 0.1f64..2.0,
    ) {
        let w = SpectralWidth::new(3e11).unwrap();
        let overlap = ModeOverlap::Pinned { v0: 0.95, heralded: w, coherent: w };
        let params = ExperimentParams::new(t, d, x, overlap).unwrap();
        let tau = u * 1e-12;
        prop_assert_eq!(
            coincidence_exact(&params, tau).unwrap(),
            coincidence_exact(&params, -tau).unwrap()
        );
        let noisier = ExperimentParams::new(t, 2.0 * d, x, overlap).unwrap();
        prop_assert!(visibility(&noisier, Method::Exact).unwrap() <= visibility(&params, Method::Exact).unwrap());
    }
}

use super::{Ensemble, FockError, StateVector};

/// Click/no-click detector with unit efficiency and a dark-count
/// probability per detection window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdDetector {
    dark_prob: f64,
}

impl ThresholdDetector {
    pub fn new(dark_prob: f64) -> Result<Self, FockError> {
        if !(0.0..1.0).contains(&dark_prob) {
            return Err(FockError::Parameter {
                name: "dark count probability",
                value: dark_prob,
                range: "[0, 1)",
            });
        }
        Ok(Self { dark_prob })
    }

    pub fn ideal() -> Self {
        Self { dark_prob: 0.0 }
    }

    pub fn dark_prob(&self) -> f64 {
        self.dark_prob
    }

    /// Probability of a click given whether any photon reached the detector.
    fn click(&self, lit: bool) -> f64 {
        if lit {
            1.0
        } else {
            self.dark_prob
        }
    }
}

/// Probability that both detectors click, where detector `x` sees the
/// internal modes in `group_x` and detector `y` those in `group_y`.
///
/// A detector stays silent with probability `(1 - d) P(vac)`, so the
/// coincidence rate is `1 - q_x - q_y + q_xy` with `q_x = (1-d) P(vac x)`
/// and `q_xy = (1-d)^2 P(vac x and y)`. It is evaluated here as the
/// equivalent sum over Fock components of `|c_n|^2 click_x(n) click_y(n)`,
/// which avoids the cancellation in the inclusion-exclusion form when the
/// coincidence rate is tiny.
pub fn coincidence_click_probability(
    ensemble: &Ensemble,
    group_x: &[usize],
    group_y: &[usize],
    detector: &ThresholdDetector,
) -> Result<f64, FockError> {
    if group_x.is_empty() || group_y.is_empty() || group_x.iter().any(|m| group_y.contains(m)) {
        return Err(FockError::BadGroups);
    }
    ensemble.branches().iter().try_fold(0.0, |acc, b| {
        Ok(acc + b.probability * state_coincidence(&b.state, group_x, group_y, detector)?)
    })
}

fn state_coincidence(
    state: &StateVector,
    group_x: &[usize],
    group_y: &[usize],
    detector: &ThresholdDetector,
) -> Result<f64, FockError> {
    for &m in group_x.iter().chain(group_y) {
        state.check_mode(m)?;
    }
    let lit = |i: usize, group: &[usize]| group.iter().any(|&m| state.digit(i, m) > 0);
    let sum: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            a.norm_sqr() * detector.click(lit(i, group_x)) * detector.click(lit(i, group_y))
        })
        .sum();
    Ok((sum / state.norm_sqr()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn vacuum_ensemble() -> Ensemble {
        Ensemble::pure(StateVector::vacuum(2, 3).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_never_coincides_without_dark_counts() {
        let p = coincidence_click_probability(
            &vacuum_ensemble(),
            &[0],
            &[1],
            &ThresholdDetector::ideal(),
        )
        .unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn vacuum_coincides_by_two_dark_counts() {
        let d = 1.9e-5;
        let det = ThresholdDetector::new(d).unwrap();
        let p = coincidence_click_probability(&vacuum_ensemble(), &[0], &[1], &det).unwrap();
        assert!((p - d * d).abs() < 1e-24);
    }

    #[test]
    fn matches_inclusion_exclusion() {
        let alpha = Complex64::new(0.7, 0.1);
        let s = StateVector::vacuum(3, 12)
            .unwrap()
            .apply_displacement(1, alpha)
            .unwrap()
            .apply_create(0)
            .unwrap()
            .apply_beamsplitter_50_50(0, 1)
            .unwrap();
        let e = Ensemble::pure(s).unwrap();
        let d = 0.03;
        let det = ThresholdDetector::new(d).unwrap();
        let (gx, gy) = ([0usize, 2], [1usize]);
        let qx = (1.0 - d) * e.vacuum_probability(&gx).unwrap();
        let qy = (1.0 - d) * e.vacuum_probability(&gy).unwrap();
        let qxy = (1.0 - d).powi(2) * e.vacuum_probability(&[0, 1, 2]).unwrap();
        let expect = 1.0 - qx - qy + qxy;
        let got = coincidence_click_probability(&e, &gx, &gy, &det).unwrap();
        assert!((got - expect).abs() < 1e-14, "{got} vs {expect}");
    }

    #[test]
    fn rejects_overlapping_groups() {
        assert_eq!(
            coincidence_click_probability(
                &vacuum_ensemble(),
                &[0],
                &[0, 1],
                &ThresholdDetector::ideal()
            ),
            Err(FockError::BadGroups)
        );
        assert_eq!(
            coincidence_click_probability(
                &vacuum_ensemble(),
                &[],
                &[1],
                &ThresholdDetector::ideal()
            ),
            Err(FockError::BadGroups)
        );
    }

    #[test]
    fn dark_probability_range() {
        assert!(ThresholdDetector::new(1.0).is_err());
        assert!(ThresholdDetector::new(-0.1).is_err());
        assert!(ThresholdDetector::new(0.0).is_ok());
    }
}

use num_complex::Complex64;

use super::{FockError, StateVector};

/// Probability sums and state norms must match 1 to this tolerance.
const NORMALIZATION_TOLERANCE: f64 = 1e-10;

/// A new branch is folded into an existing one when the density-operator
/// error this introduces, `p * (1 - |<old|new>|^2)`, is below this.
const MERGE_TOLERANCE: f64 = 1e-13;

const MAX_DENSE_DIM: usize = 1024;

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub state: StateVector,
}

/// Classical mixture of normalized pure states.
///
/// Branches whose states coincide up to a global phase are merged, so a
/// loss channel acting on a product of a Fock state and a coherent state
/// yields one branch per surviving photon number rather than one per Kraus
/// operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    branches: Vec<Branch>,
}

impl Ensemble {
    /// Single-branch ensemble; the state is normalized first.
    pub fn pure(state: StateVector) -> Result<Self, FockError> {
        Ok(Self {
            branches: vec![Branch {
                probability: 1.0,
                state: state.normalized()?,
            }],
        })
    }

    /// Checks that probabilities lie in `[0, 1]` and sum to 1, that every
    /// state is normalized, and that all states share one shape.
    pub fn new(branches: Vec<Branch>) -> Result<Self, FockError> {
        let first = branches.first().ok_or(FockError::EmptyEnsemble)?;
        for b in &branches {
            first.state.check_same_shape(&b.state)?;
            if !(0.0..=1.0).contains(&b.probability) {
                return Err(FockError::Parameter {
                    name: "branch probability",
                    value: b.probability,
                    range: "[0, 1]",
                });
            }
            let n2 = b.state.norm_sqr();
            if (n2 - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(FockError::BadNorm(n2));
            }
        }
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(FockError::ProbabilitySum(total));
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn num_modes(&self) -> usize {
        self.branches[0].state.num_modes()
    }

    pub fn cutoff(&self) -> usize {
        self.branches[0].state.cutoff()
    }

    /// Applies the same pure-state map to every branch.
    pub fn map<F>(&self, f: F) -> Result<Self, FockError>
    where
        F: Fn(&StateVector) -> Result<StateVector, FockError>,
    {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                Ok(Branch {
                    probability: b.probability,
                    state: f(&b.state)?,
                })
            })
            .collect::<Result<_, FockError>>()?;
        Ok(Self { branches })
    }

    /// Pure-loss channel of transmittance `t` on one mode: an ancilla
    /// beamsplitter with the environment in vacuum, environment traced out.
    /// Each branch is expanded into its Kraus images
    /// `K_k |n> = sqrt(C(n,k) t^(n-k) (1-t)^k) |n-k>`.
    pub fn apply_loss(&self, mode: usize, transmittance: f64) -> Result<Self, FockError> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(FockError::Parameter {
                name: "transmittance",
                value: transmittance,
                range: "[0, 1]",
            });
        }
        self.branches[0].state.check_mode(mode)?;
        if transmittance == 1.0 {
            return Ok(self.clone());
        }
        let mut out: Vec<Branch> = Vec::new();
        for b in &self.branches {
            for k in 0..=b.state.max_occupied_level(mode) {
                let image = b.state.loss_kraus(mode, k, transmittance);
                let weight = image.norm_sqr();
                if weight == 0.0 {
                    continue;
                }
                push_merged(&mut out, b.probability * weight, image.normalized()?)?;
            }
        }
        Ok(Self { branches: out })
    }

    /// [`Ensemble::apply_loss`] on each listed mode in turn.
    pub fn apply_loss_to(&self, modes: &[usize], transmittance: f64) -> Result<Self, FockError> {
        modes
            .iter()
            .try_fold(self.clone(), |e, &m| e.apply_loss(m, transmittance))
    }

    /// Branch-averaged probability that all `modes` are empty.
    pub fn vacuum_probability(&self, modes: &[usize]) -> Result<f64, FockError> {
        self.branches.iter().try_fold(0.0, |acc, b| {
            Ok(acc + b.probability * b.state.vacuum_probability(modes)?)
        })
    }

    /// Dense row-major density operator. Only for small spaces.
    pub fn density_matrix(&self) -> Result<Vec<Complex64>, FockError> {
        let dim = self.branches[0].state.dim();
        if dim > MAX_DENSE_DIM {
            return Err(FockError::DensityTooLarge(dim));
        }
        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for b in &self.branches {
            let psi = b.state.amplitudes();
            for (i, ai) in psi.iter().enumerate() {
                if *ai == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &mut rho[i * dim..(i + 1) * dim];
                for (r, aj) in row.iter_mut().zip(psi) {
                    *r += b.probability * ai * aj.conj();
                }
            }
        }
        Ok(rho)
    }

    /// Hilbert-Schmidt (Frobenius) norm of the difference of the two
    /// density operators.
    pub fn density_distance(&self, other: &Self) -> Result<f64, FockError> {
        self.branches[0]
            .state
            .check_same_shape(&other.branches[0].state)?;
        let a = self.density_matrix()?;
        let b = other.density_matrix()?;
        Ok(a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

fn push_merged(
    branches: &mut Vec<Branch>,
    probability: f64,
    state: StateVector,
) -> Result<(), FockError> {
    for b in branches.iter_mut() {
        let fidelity = b.state.inner(&state)?.norm_sqr();
        if probability * (1.0 - fidelity).max(0.0) < MERGE_TOLERANCE {
            b.probability += probability;
            return Ok(());
        }
    }
    branches.push(Branch { probability, state });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_photon() -> Ensemble {
        Ensemble::pure(StateVector::number_state(4, &[1]).unwrap()).unwrap()
    }

    #[test]
    fn unit_transmittance_is_identity() {
        let e = single_photon();
        let out = e.apply_loss(0, 1.0).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.density_distance(&e).unwrap() < 1e-15);
    }

    #[test]
    fn zero_transmittance_empties_the_mode() {
        let out = single_photon().apply_loss(0, 0.0).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.branches()[0].probability - 1.0).abs() < 1e-15);
        assert_eq!(out.vacuum_probability(&[0]).unwrap(), 1.0);
    }

    #[test]
    fn partial_loss_of_one_photon() {
        let out = single_photon().apply_loss(0, 0.3).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out.branches()[0].probability - 0.3).abs() < 1e-15);
        assert!((out.vacuum_probability(&[0]).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_stays_one_branch() {
        let s = StateVector::vacuum(1, 16)
            .unwrap()
            .apply_displacement(0, Complex64::new(0.6, 0.2))
            .unwrap();
        let out = Ensemble::pure(s).unwrap().apply_loss(0, 0.4).unwrap();
        assert_eq!(out.len(), 1);
        let expect = StateVector::vacuum(1, 16)
            .unwrap()
            .apply_displacement(0, Complex64::new(0.6, 0.2) * 0.4f64.sqrt())
            .unwrap();
        let f = out.branches()[0].state.inner(&expect).unwrap().norm_sqr();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_ensembles() {
        let s = StateVector::vacuum(1, 2).unwrap();
        assert_eq!(Ensemble::new(vec![]), Err(FockError::EmptyEnsemble));
        let half = Branch {
            probability: 0.5,
            state: s,
        };
        assert!(matches!(
            Ensemble::new(vec![half]),
            Err(FockError::ProbabilitySum(_))
        ));
        assert!(single_photon().apply_loss(0, 1.5).is_err());
    }
}

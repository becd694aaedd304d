use std::sync::Arc;

use num_complex::Complex64;

use super::{
    FockError, BEAMSPLITTER_OVERFLOW_TOLERANCE, CREATION_TOP_LEVEL_TOLERANCE,
    DISPLACEMENT_DEFECT_TOLERANCE,
};

const NORM_CEILING: f64 = 1.0 + 1e-12;

/// Complex amplitudes of a multimode Fock state truncated at `cutoff`
/// photons per mode.
///
/// Amplitudes are stored densely in mixed radix `cutoff + 1`, mode 0 most
/// significant. Occupations above the cutoff have no storage at all.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    shape: Arc<Shape>,
    amplitudes: Vec<Complex64>,
}

/// Mode count, cutoff and a digit table shared by all states derived from
/// the same vacuum.
#[derive(Debug)]
struct Shape {
    num_modes: usize,
    cutoff: usize,
    strides: Vec<usize>,
    /// `digits[idx * num_modes + m]` is the occupation of mode `m` at `idx`.
    digits: Vec<u16>,
}

impl PartialEq for Shape {
    fn eq(&self, other: &Self) -> bool {
        self.num_modes == other.num_modes && self.cutoff == other.cutoff
    }
}

impl StateVector {
    /// The multimode vacuum `|0, ..., 0>`.
    pub fn vacuum(num_modes: usize, cutoff: usize) -> Result<Self, FockError> {
        if num_modes == 0 {
            return Err(FockError::NoModes);
        }
        if cutoff == 0 {
            return Err(FockError::ZeroCutoff);
        }
        let dim = (cutoff + 1)
            .checked_pow(num_modes as u32)
            .ok_or(FockError::DensityTooLarge(usize::MAX))?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        let strides: Vec<usize> = (0..num_modes)
            .map(|m| (cutoff + 1).pow((num_modes - 1 - m) as u32))
            .collect();
        let digits = (0..dim)
            .flat_map(|i| strides.iter().map(move |s| ((i / s) % (cutoff + 1)) as u16))
            .collect();
        Ok(Self {
            shape: Arc::new(Shape {
                num_modes,
                cutoff,
                strides,
                digits,
            }),
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes in the storage order described on
    /// the type. The squared norm must lie in `(0, 1 + 1e-12]`.
    pub fn from_amplitudes(
        num_modes: usize,
        cutoff: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, FockError> {
        let shape = Self::vacuum(num_modes, cutoff)?;
        if amplitudes.len() != shape.dim() {
            return Err(FockError::AmplitudeCount {
                expected: shape.dim(),
                actual: amplitudes.len(),
            });
        }
        let state = Self {
            amplitudes,
            ..shape
        };
        let n2 = state.norm_sqr();
        if !(n2 > 0.0 && n2 <= NORM_CEILING) {
            return Err(FockError::BadNorm(n2));
        }
        Ok(state)
    }

    /// Photon-number basis state `|n_1, ..., n_m>`.
    pub fn number_state(cutoff: usize, occupation: &[usize]) -> Result<Self, FockError> {
        let mut state = Self::vacuum(occupation.len(), cutoff)?;
        if let Some(&n) = occupation.iter().find(|&&n| n > cutoff) {
            return Err(FockError::TruncationOverflow {
                modes: vec![occupation.iter().position(|&m| m == n).unwrap_or(0)],
                weight: 1.0,
                cutoff,
            });
        }
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        let idx = state.index_of(occupation);
        state.amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn num_modes(&self) -> usize {
        self.shape.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.shape.cutoff
    }

    /// Number of stored amplitudes, `(cutoff + 1)^num_modes`.
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of a photon-number tuple, or `None` if the tuple has the
    /// wrong length or exceeds the cutoff.
    pub fn amplitude(&self, occupation: &[usize]) -> Option<Complex64> {
        if occupation.len() != self.shape.num_modes
            || occupation.iter().any(|&n| n > self.shape.cutoff)
        {
            return None;
        }
        Some(self.amplitudes[self.index_of(occupation)])
    }

    /// Photon-number tuple stored at flat index `idx`.
    pub fn occupation(&self, idx: usize) -> Vec<usize> {
        (0..self.shape.num_modes)
            .map(|m| self.digit(idx, m))
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self, FockError> {
        let n2 = self.norm_sqr();
        if !n2.is_finite() || n2 <= 0.0 {
            return Err(FockError::BadNorm(n2));
        }
        let scale = 1.0 / n2.sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, FockError> {
        self.check_same_shape(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `<n_mode>`, normalized by the state's squared norm.
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64, FockError> {
        self.check_mode(mode)?;
        let weighted: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| self.digit(i, mode) as f64 * a.norm_sqr())
            .sum();
        Ok(weighted / self.norm_sqr())
    }

    /// Total photon number expectation over all modes.
    pub fn total_photon_number(&self) -> f64 {
        (0..self.shape.num_modes)
            .map(|m| self.mean_photon_number(m).unwrap_or(0.0))
            .sum()
    }

    /// Norm of the unnormalized image `a_mode^dagger |self>`.
    pub fn create_norm(&self, mode: usize) -> Result<f64, FockError> {
        self.check_create(mode)?;
        let s: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| (self.digit(i, mode) + 1) as f64 * a.norm_sqr())
            .sum();
        Ok(s.sqrt())
    }

    /// Normalized `a_mode^dagger |self>`.
    ///
    /// Fails if the top Fock level of `mode` is occupied, since raising it
    /// would leave the truncated space.
    pub fn apply_create(&self, mode: usize) -> Result<Self, FockError> {
        self.check_create(mode)?;
        let stride = self.stride(mode);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let n = self.digit(i, mode);
            if n < self.shape.cutoff {
                out[i + stride] = a * ((n + 1) as f64).sqrt();
            }
        }
        self.with_amplitudes(out).normalized()
    }

    /// Displacement `D(alpha) = exp(alpha a^dagger - alpha^* a)` on one mode.
    ///
    /// Uses the exact Fock matrix elements of the untruncated operator. The
    /// weight that would land above the cutoff is measured and must stay
    /// below [`DISPLACEMENT_DEFECT_TOLERANCE`]; the result is not
    /// renormalized.
    pub fn apply_displacement(&self, mode: usize, alpha: Complex64) -> Result<Self, FockError> {
        self.check_mode(mode)?;
        if alpha == Complex64::new(0.0, 0.0) {
            return Ok(self.clone());
        }
        let matrix = displacement_matrix(self.shape.cutoff, alpha);
        let levels = self.shape.cutoff + 1;
        let stride = self.stride(mode);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut column = vec![Complex64::new(0.0, 0.0); levels];
        for base in self.bases(&[mode]) {
            for (n, c) in column.iter_mut().enumerate() {
                *c = self.amplitudes[base + n * stride];
            }
            for m in 0..levels {
                let row = &matrix[m * levels..(m + 1) * levels];
                out[base + m * stride] = row.iter().zip(&column).map(|(d, c)| d * c).sum();
            }
        }
        let out = self.with_amplitudes(out);
        let defect = self.norm_sqr() - out.norm_sqr();
        if defect > DISPLACEMENT_DEFECT_TOLERANCE {
            return Err(FockError::CutoffTooSmall {
                cutoff: self.shape.cutoff,
                mean: alpha.norm_sqr(),
                defect,
            });
        }
        Ok(out)
    }

    /// Phase shift `exp(i phi n_mode)`.
    pub fn apply_phase_shift(&self, mode: usize, phi: f64) -> Result<Self, FockError> {
        self.check_mode(mode)?;
        let phases: Vec<Complex64> = (0..=self.shape.cutoff)
            .map(|n| Complex64::from_polar(1.0, phi * n as f64))
            .collect();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a * phases[self.digit(i, mode)])
            .collect();
        Ok(self.with_amplitudes(amplitudes))
    }

    /// Lossless beamsplitter with intensity transmittance `t` mixing
    /// `mode_a` and `mode_b`, with outputs written back to the same slots
    /// (`x` in `mode_a`, `y` in `mode_b`):
    ///
    /// ```text
    /// a^dagger -> sqrt(t) x^dagger - sqrt(1-t) y^dagger
    /// b^dagger -> sqrt(1-t) x^dagger + sqrt(t) y^dagger
    /// ```
    ///
    /// Sectors with `n_a + n_b > cutoff` cannot be mapped inside the
    /// truncated space; their weight must stay below
    /// [`BEAMSPLITTER_OVERFLOW_TOLERANCE`] and is dropped.
    pub fn apply_beamsplitter(
        &self,
        mode_a: usize,
        mode_b: usize,
        transmittance: f64,
    ) -> Result<Self, FockError> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(FockError::SameMode(mode_a));
        }
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(FockError::Parameter {
                name: "beamsplitter transmittance",
                value: transmittance,
                range: "[0, 1]",
            });
        }
        let overflow: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.digit(*i, mode_a) + self.digit(*i, mode_b) > self.shape.cutoff)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if overflow > BEAMSPLITTER_OVERFLOW_TOLERANCE {
            return Err(FockError::TruncationOverflow {
                modes: vec![mode_a, mode_b],
                weight: overflow,
                cutoff: self.shape.cutoff,
            });
        }

        let sectors = beamsplitter_sectors(self.shape.cutoff, transmittance);
        let (sa, sb) = (self.stride(mode_a), self.stride(mode_b));
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut input = Vec::with_capacity(self.shape.cutoff + 1);
        for base in self.bases(&[mode_a, mode_b]) {
            for (total, sector) in sectors.iter().enumerate() {
                input.clear();
                input.extend(
                    (0..=total).map(|na| self.amplitudes[base + na * sa + (total - na) * sb]),
                );
                let width = total + 1;
                for j in 0..=total {
                    let row = &sector[j * width..(j + 1) * width];
                    out[base + j * sa + (total - j) * sb] =
                        row.iter().zip(&input).map(|(u, c)| c * *u).sum();
                }
            }
        }
        Ok(self.with_amplitudes(out))
    }

    /// The symmetric beamsplitter: `a -> (x - y)/sqrt(2)`, `b -> (x + y)/sqrt(2)`.
    pub fn apply_beamsplitter_50_50(
        &self,
        mode_a: usize,
        mode_b: usize,
    ) -> Result<Self, FockError> {
        self.apply_beamsplitter(mode_a, mode_b, 0.5)
    }

    /// Probability that every mode in `modes` is empty, conditioned on the
    /// truncated space (divided by the squared norm).
    pub fn vacuum_probability(&self, modes: &[usize]) -> Result<f64, FockError> {
        for &m in modes {
            self.check_mode(m)?;
        }
        let hits: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| modes.iter().all(|&m| self.digit(*i, m) == 0))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok((hits / self.norm_sqr()).clamp(0.0, 1.0))
    }

    /// Unnormalized image of the `k`-th Kraus operator of a pure-loss
    /// channel with transmittance `t` on `mode`:
    /// `K_k |n> = sqrt(C(n,k) t^(n-k) (1-t)^k) |n-k>`.
    pub(crate) fn loss_kraus(&self, mode: usize, k: usize, t: f64) -> Self {
        let stride = self.stride(mode);
        let coeff: Vec<f64> = (0..=self.shape.cutoff)
            .map(|n| {
                if n < k {
                    0.0
                } else {
                    (binomial(n, k) * t.powi((n - k) as i32) * (1.0 - t).powi(k as i32)).sqrt()
                }
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let n = self.digit(i, mode);
            if n >= k && coeff[n] != 0.0 {
                out[i - k * stride] = a * coeff[n];
            }
        }
        self.with_amplitudes(out)
    }

    /// Highest occupation of `mode` carrying nonzero amplitude.
    pub(crate) fn max_occupied_level(&self, mode: usize) -> usize {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, _)| self.digit(i, mode))
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<(), FockError> {
        if mode >= self.shape.num_modes {
            return Err(FockError::ModeOutOfRange {
                mode,
                num_modes: self.shape.num_modes,
            });
        }
        Ok(())
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<(), FockError> {
        if self.shape.num_modes != other.shape.num_modes || self.shape.cutoff != other.shape.cutoff
        {
            return Err(FockError::ShapeMismatch {
                left: (self.shape.num_modes, self.shape.cutoff),
                right: (other.shape.num_modes, other.shape.cutoff),
            });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn digit(&self, idx: usize, mode: usize) -> usize {
        self.shape.digits[idx * self.shape.num_modes + mode] as usize
    }

    fn check_create(&self, mode: usize) -> Result<(), FockError> {
        self.check_mode(mode)?;
        let top: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.digit(*i, mode) == self.shape.cutoff)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if top.sqrt() >= CREATION_TOP_LEVEL_TOLERANCE {
            return Err(FockError::TruncationOverflow {
                modes: vec![mode],
                weight: top,
                cutoff: self.shape.cutoff,
            });
        }
        Ok(())
    }

    #[inline]
    fn stride(&self, mode: usize) -> usize {
        self.shape.strides[mode]
    }

    fn index_of(&self, occupation: &[usize]) -> usize {
        occupation
            .iter()
            .enumerate()
            .map(|(m, &n)| n * self.stride(m))
            .sum()
    }

    /// Flat indices whose digits in `modes` are all zero.
    fn bases<'a>(&'a self, modes: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
        (0..self.dim()).filter(move |&i| modes.iter().all(|&m| self.digit(i, m) == 0))
    }

    fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        Self {
            shape: Arc::clone(&self.shape),
            amplitudes,
        }
    }
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for i in 1..=n {
        f[i] = f[i - 1] * i as f64;
    }
    f
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Generalized Laguerre polynomial `L_n^(k)(x)` by upward recurrence.
fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let (mut prev, mut cur) = (1.0, 1.0 + k - x);
    if n == 0 {
        return prev;
    }
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Row-major `<m|D(alpha)|n>` for `m, n <= cutoff`.
fn displacement_matrix(cutoff: usize, alpha: Complex64) -> Vec<Complex64> {
    let levels = cutoff + 1;
    let fact = factorials(cutoff);
    let x = alpha.norm_sqr();
    let envelope = (-x / 2.0).exp();
    let mut d = vec![Complex64::new(0.0, 0.0); levels * levels];
    for m in 0..levels {
        for n in 0..levels {
            d[m * levels + n] = if m >= n {
                alpha.powi((m - n) as i32)
                    * ((fact[n] / fact[m]).sqrt() * envelope * laguerre(n, m - n, x))
            } else {
                (-alpha.conj()).powi((n - m) as i32)
                    * ((fact[m] / fact[n]).sqrt() * envelope * laguerre(m, n - m, x))
            };
        }
    }
    d
}

/// For every total photon number `N <= cutoff`, the row-major
/// `(N+1) x (N+1)` block mapping `|n_a, N - n_a>` to `|j, N - j>`.
fn beamsplitter_sectors(cutoff: usize, transmittance: f64) -> Vec<Vec<f64>> {
    let fact = factorials(cutoff);
    let pascal = pascal_triangle(cutoff);
    let t = transmittance.sqrt();
    let r = (1.0 - transmittance).sqrt();
    let t_pow: Vec<f64> = (0..=cutoff).map(|i| t.powi(i as i32)).collect();
    let neg_r_pow: Vec<f64> = (0..=cutoff).map(|i| (-r).powi(i as i32)).collect();
    let r_pow: Vec<f64> = (0..=cutoff).map(|i| r.powi(i as i32)).collect();
    (0..=cutoff)
        .map(|total| {
            let width = total + 1;
            let mut block = vec![0.0; width * width];
            for na in 0..=total {
                let nb = total - na;
                for j in 0..=total {
                    let mut s = 0.0;
                    // i photons of a and j - i photons of b go to x
                    for i in j.saturating_sub(nb)..=na.min(j) {
                        let k = j - i;
                        s += pascal[na][i]
                            * t_pow[i]
                            * neg_r_pow[na - i]
                            * pascal[nb][k]
                            * r_pow[k]
                            * t_pow[nb - k];
                    }
                    block[j * width + na] =
                        s * (fact[j] * fact[total - j] / (fact[na] * fact[nb])).sqrt();
                }
            }
            block
        })
        .collect()
}

fn pascal_triangle(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![1.0; i + 1];
        for k in 1..i {
            row[k] = rows[i - 1][k - 1] + rows[i - 1][k];
        }
        rows.push(row);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn vacuum_has_no_photons() {
        let v = StateVector::vacuum(2, 4).unwrap();
        assert_eq!(v.mean_photon_number(0).unwrap(), 0.0);
        assert_eq!(v.mean_photon_number(1).unwrap(), 0.0);
        assert_eq!(v.vacuum_probability(&[0, 1]).unwrap(), 1.0);
        assert_eq!(StateVector::vacuum(1, 1).unwrap().norm_sqr(), 1.0);
    }

    #[test]
    fn vacuum_rejects_degenerate_shapes() {
        assert_eq!(StateVector::vacuum(0, 4), Err(FockError::NoModes));
        assert_eq!(StateVector::vacuum(2, 0), Err(FockError::ZeroCutoff));
    }

    #[test]
    fn amplitudes_above_cutoff_do_not_exist() {
        let v = StateVector::vacuum(2, 3).unwrap();
        assert_eq!(v.dim(), 16);
        assert!(v.amplitude(&[4, 0]).is_none());
        assert!(v.amplitude(&[3, 3]).is_some());
    }

    #[test]
    fn create_single_and_double() {
        let v = StateVector::vacuum(2, 4).unwrap();
        let one = v.apply_create(0).unwrap();
        assert!((one.mean_photon_number(0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(one.mean_photon_number(1).unwrap(), 0.0);
        assert!((one.create_norm(0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let two = one.apply_create(0).unwrap();
        assert!((two.mean_photon_number(0).unwrap() - 2.0).abs() < 1e-14);
        assert!((two.amplitude(&[2, 0]).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn create_refuses_top_level() {
        let s = StateVector::number_state(2, &[2]).unwrap();
        assert!(matches!(
            s.apply_create(0),
            Err(FockError::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let alpha = Complex64::new(0.4, -0.52);
        let s = StateVector::vacuum(1, 16)
            .unwrap()
            .apply_displacement(0, alpha)
            .unwrap();
        let x = alpha.norm_sqr();
        let mut fact = 1.0;
        for n in 0..=16 {
            if n > 0 {
                fact *= n as f64;
            }
            let expect = alpha.powi(n as i32) * ((-x / 2.0).exp() / fact.sqrt());
            assert!((s.amplitudes()[n] - expect).norm() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn displacement_vacuum_weight_and_mean() {
        let alpha = Complex64::new(0.43f64.sqrt(), 0.0);
        let s = StateVector::vacuum(1, 16)
            .unwrap()
            .apply_displacement(0, alpha)
            .unwrap();
        // e^{-0.43}
        assert!((s.vacuum_probability(&[0]).unwrap() - 0.650_509_094_723_316_5).abs() < 1e-12);
        assert!((s.mean_photon_number(0).unwrap() - 0.43).abs() < 1e-8);
    }

    #[test]
    fn zero_displacement_is_identity() {
        let s = StateVector::number_state(3, &[1, 2]).unwrap();
        assert_eq!(s.apply_displacement(1, c(0.0)).unwrap(), s);
    }

    #[test]
    fn displacement_cutoff_guard() {
        let err = StateVector::vacuum(1, 4)
            .unwrap()
            .apply_displacement(0, c(1.0))
            .unwrap_err();
        assert!(matches!(err, FockError::CutoffTooSmall { .. }));
    }

    #[test]
    fn single_photon_splits_with_minus_sign_on_y() {
        let s = StateVector::number_state(4, &[1, 0]).unwrap();
        let out = s.apply_beamsplitter_50_50(0, 1).unwrap();
        let x = out.amplitude(&[1, 0]).unwrap();
        let y = out.amplitude(&[0, 1]).unwrap();
        assert!((x.norm_sqr() - 0.5).abs() < 1e-15);
        assert!((y.norm_sqr() - 0.5).abs() < 1e-15);
        assert!((y / x - c(-1.0)).norm() < 1e-15);

        let s = StateVector::number_state(4, &[0, 1]).unwrap();
        let out = s.apply_beamsplitter_50_50(0, 1).unwrap();
        let ratio = out.amplitude(&[0, 1]).unwrap() / out.amplitude(&[1, 0]).unwrap();
        assert!((ratio - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn two_photons_bunch() {
        let s = StateVector::number_state(4, &[1, 1]).unwrap();
        let out = s.apply_beamsplitter_50_50(0, 1).unwrap();
        assert!(out.amplitude(&[1, 1]).unwrap().norm() < 1e-15);
        assert!((out.amplitude(&[2, 0]).unwrap().norm_sqr() - 0.5).abs() < 1e-15);
        assert!((out.amplitude(&[0, 2]).unwrap().norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coherent_splits_into_product_of_halves() {
        let alpha = Complex64::new(0.8, 0.3);
        let s = StateVector::vacuum(2, 16)
            .unwrap()
            .apply_displacement(1, alpha)
            .unwrap();
        let out = s.apply_beamsplitter_50_50(0, 1).unwrap();
        let half = alpha / 2f64.sqrt();
        let expect = StateVector::vacuum(2, 16)
            .unwrap()
            .apply_displacement(0, half)
            .unwrap()
            .apply_displacement(1, half)
            .unwrap();
        // Components with more than `cutoff` photons in total are dropped by
        // the beamsplitter but kept by the product of truncated states.
        let diff: f64 = (0..out.dim())
            .filter(|&i| out.occupation(i).iter().sum::<usize>() <= 16)
            .map(|i| (out.amplitudes()[i] - expect.amplitudes()[i]).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "max amplitude difference {diff}");
    }

    #[test]
    fn beamsplitter_overflow_guard() {
        let s = StateVector::number_state(2, &[2, 1]).unwrap();
        assert!(matches!(
            s.apply_beamsplitter_50_50(0, 1),
            Err(FockError::TruncationOverflow { .. })
        ));
        assert_eq!(
            s.apply_beamsplitter_50_50(1, 1),
            Err(FockError::SameMode(1))
        );
    }

    #[test]
    fn beamsplitter_extremes() {
        let s = StateVector::number_state(3, &[1, 2]).unwrap();
        let pass = s.apply_beamsplitter(0, 1, 1.0).unwrap();
        assert!((pass.amplitude(&[1, 2]).unwrap() - c(1.0)).norm() < 1e-15);
        let swap = s.apply_beamsplitter(0, 1, 0.0).unwrap();
        assert!((swap.amplitude(&[2, 1]).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vacuum_probability_of_photon() {
        let s = StateVector::number_state(3, &[1, 0]).unwrap();
        assert_eq!(s.vacuum_probability(&[0]).unwrap(), 0.0);
        assert_eq!(s.vacuum_probability(&[1]).unwrap(), 1.0);
    }

    #[test]
    fn laguerre_small_cases() {
        // L_2^(1)(x) = (x^2 - 6x + 6)/2
        let x = 0.7;
        assert!((laguerre(2, 1, x) - (x * x - 6.0 * x + 6.0) / 2.0).abs() < 1e-14);
        assert_eq!(laguerre(0, 3, x), 1.0);
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(matches!(
            StateVector::from_amplitudes(1, 1, vec![c(1.0)]),
            Err(FockError::AmplitudeCount { .. })
        ));
        assert!(matches!(
            StateVector::from_amplitudes(1, 1, vec![c(1.0), c(1.0)]),
            Err(FockError::BadNorm(_))
        ));
    }
}
